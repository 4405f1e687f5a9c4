//! Binary-feedback recommenders behind one scoring interface.
//!
//! All kinds train on the same implicit-feedback [`InteractionMatrix`] and
//! expose raw scores over an arbitrary candidate set. Scores are min-max
//! normalized per candidate set before list construction, so heterogeneous
//! score scales never leak into selection probabilities.
//!
//! Additional kinds can be plugged in by extending [`ModelState`] and the
//! dispatch in [`RecommenderModel::raw_scores`]; nothing else assumes a
//! closed set of algorithms.

mod factor;
mod knn;
mod pgn;

pub use factor::{
    bpr_triple_grad, bpr_triple_loss, mf_sample_grad, mf_sample_loss, train_bpr, train_mf,
    FactorState,
};
pub use knn::{cosine_sets, train_item_knn, train_user_knn, ItemKnnState, UserKnnState};
pub use pgn::{train_pgn, PgnState};

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Catalog, VisitEvent};
use crate::rng::weighted_index;
use crate::types::{Timestamp, UserId, VenueId};

/// Recommender algorithm families built in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RecommenderKind {
    Popularity,
    UserKnn,
    ItemKnn,
    Mf,
    BprMf,
    Pgn,
}

impl RecommenderKind {
    pub const ALL: [RecommenderKind; 6] = [
        RecommenderKind::Popularity,
        RecommenderKind::UserKnn,
        RecommenderKind::ItemKnn,
        RecommenderKind::Mf,
        RecommenderKind::BprMf,
        RecommenderKind::Pgn,
    ];

    /// Kinds that require a non-empty matrix to fit.
    pub fn is_learning(self) -> bool {
        self != RecommenderKind::Popularity
    }
}

impl std::fmt::Display for RecommenderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RecommenderKind::Popularity => "Popularity",
            RecommenderKind::UserKnn => "UserKNN",
            RecommenderKind::ItemKnn => "ItemKNN",
            RecommenderKind::Mf => "MF",
            RecommenderKind::BprMf => "BPRMF",
            RecommenderKind::Pgn => "PGN",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for RecommenderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<RecommenderKind> {
        match s.to_ascii_lowercase().as_str() {
            "popularity" | "pop" => Ok(RecommenderKind::Popularity),
            "userknn" | "user-knn" => Ok(RecommenderKind::UserKnn),
            "itemknn" | "item-knn" => Ok(RecommenderKind::ItemKnn),
            "mf" => Ok(RecommenderKind::Mf),
            "bprmf" | "bpr" => Ok(RecommenderKind::BprMf),
            "pgn" => Ok(RecommenderKind::Pgn),
            other => Err(Error::invalid(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Training hyperparameters shared by every kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingHyper {
    pub factors: usize,
    pub knn_k: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub loss_tol: f64,
    pub init_scale: f64,
}

impl Default for TrainingHyper {
    fn default() -> TrainingHyper {
        TrainingHyper {
            factors: 32,
            knn_k: 10,
            learning_rate: 0.001,
            l2: 0.0001,
            batch_size: 16,
            max_epochs: 500,
            patience: 5,
            loss_tol: 1e-6,
            init_scale: 0.01,
        }
    }
}

/// Sparse binary user x venue matrix.
///
/// Rows and columns are indexed in first-appearance order of the source
/// visit stream; each axis also keeps the catalog id it maps to.
#[derive(Clone, Debug)]
pub struct InteractionMatrix {
    users: Vec<UserId>,
    venues: Vec<VenueId>,
    user_rows: Vec<Vec<u32>>,
    venue_cols: Vec<Vec<u32>>,
    user_index: HashMap<UserId, u32>,
    venue_index: HashMap<VenueId, u32>,
    nnz: usize,
}

impl InteractionMatrix {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_venues(&self) -> usize {
        self.venues.len()
    }

    /// Distinct (user, venue) pairs.
    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn venues(&self) -> &[VenueId] {
        &self.venues
    }

    pub fn row_of(&self, u: UserId) -> Option<u32> {
        self.user_index.get(&u).copied()
    }

    pub fn venue_col_of(&self, v: VenueId) -> Option<u32> {
        self.venue_index.get(&v).copied()
    }

    /// Column indices of one row, ascending.
    pub fn row(&self, r: u32) -> &[u32] {
        &self.user_rows[r as usize]
    }

    /// Row indices of one column, ascending.
    pub fn col(&self, c: u32) -> &[u32] {
        &self.venue_cols[c as usize]
    }

    pub fn has(&self, r: u32, c: u32) -> bool {
        self.user_rows[r as usize].binary_search(&c).is_ok()
    }
}

/// Binarize a visit stream into an [`InteractionMatrix`].
pub fn build_interactions(pairs: impl IntoIterator<Item = (UserId, VenueId)>) -> InteractionMatrix {
    let mut users: Vec<UserId> = Vec::new();
    let mut venues: Vec<VenueId> = Vec::new();
    let mut user_index: HashMap<UserId, u32> = HashMap::new();
    let mut venue_index: HashMap<VenueId, u32> = HashMap::new();
    let mut entries: Vec<(u32, u32)> = Vec::new();

    for (u, v) in pairs {
        let r = *user_index.entry(u).or_insert_with(|| {
            users.push(u);
            users.len() as u32 - 1
        });
        let c = *venue_index.entry(v).or_insert_with(|| {
            venues.push(v);
            venues.len() as u32 - 1
        });
        entries.push((r, c));
    }
    entries.sort_unstable();
    entries.dedup();

    let mut user_rows = vec![Vec::new(); users.len()];
    let mut venue_cols = vec![Vec::new(); venues.len()];
    for &(r, c) in &entries {
        user_rows[r as usize].push(c);
        venue_cols[c as usize].push(r);
    }
    InteractionMatrix {
        users,
        venues,
        user_rows,
        venue_cols,
        user_index,
        venue_index,
        nnz: entries.len(),
    }
}

/// Convenience: pairs from an event slice.
pub fn event_pairs(events: &[VisitEvent]) -> impl Iterator<Item = (UserId, VenueId)> + '_ {
    events.iter().map(|e| (e.user, e.venue))
}

/// Learned state, one variant per kind.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum ModelState {
    Popularity,
    UserKnn(UserKnnState),
    ItemKnn(ItemKnnState),
    Factors(FactorState),
    Pgn(PgnState),
}

/// A trained recommender.
///
/// Every model carries per-venue unique-visitor counts and the set of users
/// seen in training: unknown users are scored by popularity and flagged.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecommenderModel {
    pub kind: RecommenderKind,
    pub hyper: TrainingHyper,
    /// Unique train-period visitors per catalog venue.
    pub popularity: Vec<u32>,
    /// Per catalog user: had at least one training interaction.
    pub known_users: Vec<bool>,
    pub state: ModelState,
}

/// Scoring context passed through to the model.
pub struct ScoreContext<'a> {
    pub catalog: &'a Catalog,
    pub t: Timestamp,
}

/// Raw and normalized scores over one candidate set.
#[derive(Clone, Debug)]
pub struct ScoredCandidates {
    pub venues: Vec<VenueId>,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    /// True when the user was unseen in training and popularity was used.
    pub cold_user_fallback: bool,
}

/// Min-max scale into [0, 1]. A constant vector maps to `1/n` everywhere,
/// which makes proportional selection uniform.
pub fn min_max_normalize(raw: &[f64]) -> Vec<f64> {
    let n = raw.len();
    if n == 0 {
        return Vec::new();
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in raw {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if hi > lo {
        raw.iter().map(|&x| (x - lo) / (hi - lo)).collect()
    } else {
        vec![1.0 / n as f64; n]
    }
}

impl RecommenderModel {
    pub fn knows_user(&self, u: UserId) -> bool {
        self.known_users.get(u.idx()).copied().unwrap_or(false)
    }

    /// Kind-specific raw score per candidate.
    pub fn raw_scores(&self, user: UserId, candidates: &[VenueId], ctx: &ScoreContext) -> Vec<f64> {
        match &self.state {
            ModelState::Popularity => candidates
                .iter()
                .map(|&v| self.popularity[v.idx()] as f64)
                .collect(),
            ModelState::UserKnn(s) => s.scores(user, candidates),
            ModelState::ItemKnn(s) => s.scores(user, candidates),
            ModelState::Factors(s) => s.scores(user, candidates),
            ModelState::Pgn(s) => s.scores(user, candidates, &self.popularity, ctx.catalog),
        }
    }
}

/// Score a candidate set for a user, falling back to popularity for users
/// unseen in training.
pub fn score(
    model: &RecommenderModel,
    user: UserId,
    candidates: &[VenueId],
    ctx: &ScoreContext,
) -> Result<ScoredCandidates> {
    if candidates.is_empty() {
        return Err(Error::invalid("empty candidate set"));
    }
    let (raw, cold) = if model.knows_user(user) {
        (model.raw_scores(user, candidates, ctx), false)
    } else {
        (
            candidates
                .iter()
                .map(|&v| model.popularity[v.idx()] as f64)
                .collect(),
            true,
        )
    };
    let normalized = min_max_normalize(&raw);
    Ok(ScoredCandidates {
        venues: candidates.to_vec(),
        raw,
        normalized,
        cold_user_fallback: cold,
    })
}

/// Pick from the top-`k` of a scored set with probability proportional to
/// the normalized score; ties in the ranking break by ascending venue id.
/// If every top-k weight is zero the choice is uniform over the top-k.
pub fn select_top_k(scored: &ScoredCandidates, k: usize, rng: &mut impl Rng) -> VenueId {
    debug_assert!(!scored.venues.is_empty());
    let n = scored.venues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        scored.normalized[b]
            .partial_cmp(&scored.normalized[a])
            .expect("finite scores")
            .then_with(|| scored.venues[a].cmp(&scored.venues[b]))
    });
    order.truncate(k.max(1).min(n));
    let weights: Vec<f64> = order.iter().map(|&i| scored.normalized[i]).collect();
    match weighted_index(&weights, rng) {
        Some(j) => scored.venues[order[j]],
        None => scored.venues[order[rng.gen_range(0..order.len())]],
    }
}

/// Score then sample one venue from the top-`k`.
pub fn recommend(
    model: &RecommenderModel,
    user: UserId,
    candidates: &[VenueId],
    k: usize,
    ctx: &ScoreContext,
    rng: &mut impl Rng,
) -> Result<(VenueId, bool)> {
    let scored = score(model, user, candidates, ctx)?;
    let cold = scored.cold_user_fallback;
    Ok((select_top_k(&scored, k, rng), cold))
}

fn popularity_counts(m: &InteractionMatrix, n_venues: usize) -> Vec<u32> {
    let mut counts = vec![0u32; n_venues];
    for (c, vid) in m.venues().iter().enumerate() {
        counts[vid.idx()] = m.col(c as u32).len() as u32;
    }
    counts
}

fn known_users(m: &InteractionMatrix, n_users: usize) -> Vec<bool> {
    let mut known = vec![false; n_users];
    for u in m.users() {
        known[u.idx()] = true;
    }
    known
}

/// Fit a model of the given kind.
pub fn train(
    kind: RecommenderKind,
    m: &InteractionMatrix,
    catalog: &Catalog,
    n_users: usize,
    hyper: &TrainingHyper,
    rng: &mut ChaCha8Rng,
) -> Result<RecommenderModel> {
    if kind.is_learning() && m.nnz() == 0 {
        return Err(Error::degenerate(format!(
            "cannot train {kind} on a matrix with no positives"
        )));
    }
    let state = match kind {
        RecommenderKind::Popularity => ModelState::Popularity,
        RecommenderKind::UserKnn => {
            ModelState::UserKnn(train_user_knn(m, n_users, hyper.knn_k))
        }
        RecommenderKind::ItemKnn => {
            ModelState::ItemKnn(train_item_knn(m, n_users, catalog.len(), hyper.knn_k))
        }
        RecommenderKind::Mf => {
            let (state, _losses) = train_mf(m, n_users, catalog.len(), hyper, rng);
            ModelState::Factors(state)
        }
        RecommenderKind::BprMf => {
            let (state, _losses) = train_bpr(m, n_users, catalog.len(), hyper, rng);
            ModelState::Factors(state)
        }
        RecommenderKind::Pgn => ModelState::Pgn(train_pgn(m, catalog, n_users, hyper.knn_k)),
    };
    Ok(RecommenderModel {
        kind,
        hyper: *hyper,
        popularity: popularity_counts(m, catalog.len()),
        known_users: known_users(m, n_users),
        state,
    })
}

/// Full retrain from scratch on `base` plus `simulated`, with fresh
/// parameter initialization from the provided stream.
pub fn retrain(
    kind: RecommenderKind,
    base: &[VisitEvent],
    simulated: impl IntoIterator<Item = (UserId, VenueId)>,
    catalog: &Catalog,
    n_users: usize,
    hyper: &TrainingHyper,
    rng: &mut ChaCha8Rng,
) -> Result<RecommenderModel> {
    let m = build_interactions(event_pairs(base).chain(simulated));
    train(kind, &m, catalog, n_users, hyper, rng)
}

/// Offline ranking evaluation.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub hit_rate: f64,
    pub mrr: f64,
    pub evaluated: u64,
    pub skipped: u64,
}

/// For each post-split visit, rank all catalog venues sharing the true
/// venue's category by raw score and look for the true venue in the top
/// `k`. Visits by users unseen in training are skipped and counted.
pub fn evaluate(
    model: &RecommenderModel,
    post: &[VisitEvent],
    catalog: &Catalog,
    k: usize,
) -> EvalReport {
    let mut hits = 0u64;
    let mut rr_sum = 0.0;
    let mut evaluated = 0u64;
    let mut skipped = 0u64;
    let ctx = ScoreContext { catalog, t: 0 };

    for e in post {
        if !model.knows_user(e.user) {
            skipped += 1;
            continue;
        }
        let category = catalog.venue(e.venue).category;
        let candidates = catalog.venues_in_category(category);
        let raw = model.raw_scores(e.user, candidates, &ctx);
        let true_pos = candidates
            .iter()
            .position(|&v| v == e.venue)
            .expect("true venue is in its own category");
        let s_true = raw[true_pos];
        // rank = 1 + number of candidates strictly better under the
        // (score desc, id asc) order
        let mut better = 0usize;
        for (i, &s) in raw.iter().enumerate() {
            if i == true_pos {
                continue;
            }
            if s > s_true || (s == s_true && candidates[i] < e.venue) {
                better += 1;
            }
        }
        let rank = better + 1;
        evaluated += 1;
        if rank <= k {
            hits += 1;
            rr_sum += 1.0 / rank as f64;
        }
    }
    EvalReport {
        hit_rate: if evaluated > 0 {
            hits as f64 / evaluated as f64
        } else {
            0.0
        },
        mrr: if evaluated > 0 {
            rr_sum / evaluated as f64
        } else {
            0.0
        },
        evaluated,
        skipped,
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    model: RecommenderModel,
}

const MODEL_FORMAT_VERSION: u32 = 1;

/// Serialize a trained model to versioned JSON.
pub fn dump_model(model: &RecommenderModel) -> Result<String> {
    Ok(serde_json::to_string(&ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    })?)
}

/// Load a model serialized by [`dump_model`].
pub fn load_model(s: &str) -> Result<RecommenderModel> {
    let file: ModelFile = serde_json::from_str(s)?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::invalid(format!(
            "unsupported model format version {}",
            file.format_version
        )));
    }
    Ok(file.model)
}
