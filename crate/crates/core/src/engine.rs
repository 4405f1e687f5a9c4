//! Simulation driver: replays post-split visits, substituting each venue
//! choice with a recommendation-or-autonomous decision, and retrains the
//! recommender at fixed event-time intervals.
//!
//! ## Determinism
//! Every user owns a ChaCha8 stream derived from the run seed and the user
//! id string; training rounds own labeled streams. Within one retraining
//! window users are independent, so their event subsequences execute in
//! parallel; the collected visits are re-sorted by original event index
//! before the next retraining, making output bytes independent of the
//! worker count.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{relevance_table, venues_within, JumpLengthDistribution, SpatialIndex};
use crate::ingest::{Catalog, Dataset, UserTable, VisitEvent};
use crate::metrics;
use crate::mobility::{
    exploration_probability, explore, fallback, preferential_return, DecisionMode,
    ExplorationPolicy, FallbackContext, FallbackStage, UserHistory,
};
use crate::recsys::{
    build_interactions, event_pairs, recommend, retrain, train, RecommenderKind, RecommenderModel,
    ScoreContext, TrainingHyper,
};
use crate::rng::RngStreams;
use crate::types::{days_to_secs, CategoryId, Timestamp, UserId, VenueId};

/// Which venue anchors the radius query of a decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnchorMode {
    /// The real trace position of the driving event.
    Trace,
    /// The user's last simulated venue (trace position until one exists).
    Simulated,
}

impl std::str::FromStr for AnchorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<AnchorMode> {
        match s.to_ascii_lowercase().as_str() {
            "trace" => Ok(AnchorMode::Trace),
            "simulated" => Ok(AnchorMode::Simulated),
            other => Err(Error::invalid(format!("unknown anchor mode {other:?}"))),
        }
    }
}

/// Where the jump-length distribution is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpScope {
    /// Train plus post events.
    Full,
    /// Train events only.
    TrainOnly,
}

/// One simulation cell's parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Adoption probability.
    pub eta: f64,
    /// Retraining period in days of event time.
    pub delta_days: f64,
    pub algorithm: RecommenderKind,
    /// Recommendation list length.
    pub top_k: usize,
    pub policy: ExplorationPolicy,
    pub anchor: AnchorMode,
    pub seed: u64,
    pub hyper: TrainingHyper,
}

impl Default for SimulationConfig {
    fn default() -> SimulationConfig {
        SimulationConfig {
            eta: 0.0,
            delta_days: 7.0,
            algorithm: RecommenderKind::Popularity,
            top_k: 20,
            policy: ExplorationPolicy::default(),
            anchor: AnchorMode::Trace,
            seed: 0,
            hyper: TrainingHyper::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::invalid(format!("eta {} outside [0, 1]", self.eta)));
        }
        if !(self.delta_days > 0.0) {
            return Err(Error::invalid("delta_days must be positive"));
        }
        if self.top_k < 1 {
            return Err(Error::invalid("top_k must be at least 1"));
        }
        Ok(())
    }
}

/// One simulated visit; the timestamp is copied from the driving event.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimulatedVisit {
    pub user: UserId,
    pub venue: VenueId,
    pub t: Timestamp,
    pub mode: DecisionMode,
    pub epoch: u32,
}

impl SimulatedVisit {
    pub fn as_event(&self) -> VisitEvent {
        VisitEvent {
            user: self.user,
            venue: self.venue,
            t: self.t,
            tz_offset_min: 0,
        }
    }
}

/// Everything a run needs, shared across sweep cells.
pub struct SimData {
    pub train: Vec<VisitEvent>,
    pub post: Vec<VisitEvent>,
    pub catalog: Catalog,
    pub users: UserTable,
    pub jump: JumpLengthDistribution,
    pub r_star: f64,
    pub relevance: Vec<u32>,
    pub index: SpatialIndex,
}

impl SimData {
    /// Precompute the jump distribution, spatial index, and relevance
    /// table from a train/post split (both halves share catalog tables).
    pub fn prepare(train: &Dataset, post: &Dataset, scope: JumpScope) -> Result<SimData> {
        if train.catalog.len() != post.catalog.len() || train.users.len() != post.users.len() {
            return Err(Error::invalid(
                "train and post splits must share catalog and user tables",
            ));
        }
        let pairs = match scope {
            JumpScope::TrainOnly => jump_from_events(&train.events, train.users.len()),
            JumpScope::Full => {
                let mut all = train.events.clone();
                all.extend_from_slice(&post.events);
                jump_from_events(&all, train.users.len())
            }
        };
        let jump = JumpLengthDistribution::from_samples(jump_samples(&pairs, &train.catalog));
        if jump.is_empty() && !post.events.is_empty() {
            return Err(Error::degenerate(
                "no user has two visits; jump-length distribution is empty",
            ));
        }
        let r_star = jump.median();
        let index = SpatialIndex::build(&train.catalog, r_star.max(1.0));
        let relevance = relevance_table(&index, &train.catalog, r_star);
        Ok(SimData {
            train: train.events.clone(),
            post: post.events.clone(),
            catalog: train.catalog.clone(),
            users: train.users.clone(),
            jump,
            r_star,
            relevance,
            index,
        })
    }
}

// helpers keeping JumpLengthDistribution construction in one place
fn jump_from_events(events: &[VisitEvent], n_users: usize) -> Vec<(VenueId, VenueId)> {
    let mut last: Vec<Option<VenueId>> = vec![None; n_users];
    let mut pairs = Vec::new();
    for e in events {
        if let Some(prev) = last[e.user.idx()] {
            pairs.push((prev, e.venue));
        }
        last[e.user.idx()] = Some(e.venue);
    }
    pairs
}

fn jump_samples(pairs: &[(VenueId, VenueId)], catalog: &Catalog) -> Vec<f64> {
    pairs
        .iter()
        .map(|&(a, b)| {
            let va = catalog.venue(a);
            let vb = catalog.venue(b);
            crate::geo::haversine(va.lat, va.lon, vb.lat, vb.lon)
        })
        .collect()
}

/// Execution record of one run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config: SimulationConfig,
    pub post_events: u64,
    pub simulated_visits: u64,
    /// Retraining barriers crossed (`t − t_last > Δ`). At η = 0 the model
    /// is never consulted, so fitting is skipped, but barriers still count.
    pub retrain_count: u32,
    pub mode_counts: std::collections::BTreeMap<String, u64>,
    /// Recommendation decisions served by the cold-user popularity path.
    pub cold_user_recs: u64,
    pub degenerate_events: u64,
    /// First and last event timestamp of each epoch.
    pub epoch_windows: Vec<(Timestamp, Timestamp)>,
    pub wall_time_ms: u64,
}

struct UserState {
    history: UserHistory,
    rng: ChaCha8Rng,
    last_sim: Option<VenueId>,
}

/// One decision of Algorithm "venue selection": sample a jump radius,
/// choose recommendation vs autonomous behavior, resolve fallbacks, and
/// record the choice in the user's history.
///
/// Returns the venue, the decision mode, and whether a recommendation was
/// served through the cold-user fallback.
pub fn venue_selection(
    user: UserId,
    anchor: VenueId,
    t: Timestamp,
    category: CategoryId,
    model: Option<&RecommenderModel>,
    cfg: &SimulationConfig,
    data: &SimData,
    history: &mut UserHistory,
    rng: &mut ChaCha8Rng,
) -> Result<(VenueId, DecisionMode, bool)> {
    let r = data.jump.sample(rng)?;
    let fctx = FallbackContext {
        catalog: &data.catalog,
        index: &data.index,
        relevance: &data.relevance,
        anchor,
        category,
        radius_km: r,
    };

    let adopt = rng.gen::<f64>() < cfg.eta;
    let (venue, mode, cold) = if adopt {
        let model = model.expect("model is trained whenever eta > 0");
        let candidates = venues_within(&data.index, &data.catalog, anchor, r, Some(category));
        if candidates.is_empty() {
            let (v, m) = fallback(FallbackStage::Explore, &fctx, history, rng);
            (v, m, false)
        } else {
            let ctx = ScoreContext {
                catalog: &data.catalog,
                t,
            };
            let (v, cold) = recommend(model, user, &candidates, cfg.top_k, &ctx, rng)?;
            (v, DecisionMode::Rec, cold)
        }
    } else {
        let p = exploration_probability(&cfg.policy, data.catalog.len(), history);
        if rng.gen::<f64>() < p {
            let mut candidates =
                venues_within(&data.index, &data.catalog, anchor, r, Some(category));
            candidates.retain(|&v| v != anchor);
            match explore(&candidates, history, |v| data.relevance[v.idx()], rng) {
                Some(v) => (v, DecisionMode::Explore, false),
                None => {
                    let (v, m) = fallback(FallbackStage::Explore, &fctx, history, rng);
                    (v, m, false)
                }
            }
        } else {
            match preferential_return(history, category, &data.catalog, rng) {
                Some(v) => (v, DecisionMode::Return, false),
                None => {
                    let (v, m) = fallback(FallbackStage::Return, &fctx, history, rng);
                    (v, m, false)
                }
            }
        }
    };
    history.record(venue);
    Ok((venue, mode, cold))
}

/// Epochs of the post split: maximal runs of events processed under one
/// model. The event that crosses `t − t_last > Δ` still belongs to the
/// closing epoch; retraining happens after it and re-anchors the clock at
/// its timestamp.
fn partition_epochs(
    post: &[VisitEvent],
    t_last_training: Timestamp,
    delta_secs: i64,
) -> Vec<(usize, usize, bool)> {
    let mut epochs = Vec::new();
    let mut start = 0usize;
    let mut t_last = t_last_training;
    let mut i = 0usize;
    while i < post.len() {
        if post[i].t - t_last > delta_secs {
            epochs.push((start, i, true));
            t_last = post[i].t;
            start = i + 1;
        }
        i += 1;
    }
    if start < post.len() {
        epochs.push((start, post.len() - 1, false));
    }
    epochs
}

/// Run Algorithm "simulation framework" over the post split.
pub fn run_simulation(
    data: &SimData,
    cfg: &SimulationConfig,
) -> Result<(Vec<SimulatedVisit>, RunMetadata)> {
    cfg.validate()?;
    let started = Instant::now();
    let streams = RngStreams::new(cfg.seed);

    // Alg. line 1: initial training. Skipped when the recommender can
    // never be consulted.
    let mut model: Option<RecommenderModel> = if cfg.eta > 0.0 {
        let m = build_interactions(event_pairs(&data.train));
        let mut rng = streams.labeled_stream("train", 0);
        Some(train(
            cfg.algorithm,
            &m,
            &data.catalog,
            data.users.len(),
            &cfg.hyper,
            &mut rng,
        )?)
    } else {
        None
    };

    // Alg. lines 2-3: the retraining clock starts at the last train event.
    let t_last_training = data
        .train
        .last()
        .map(|e| e.t)
        .or_else(|| data.post.first().map(|e| e.t))
        .unwrap_or(0);
    let delta_secs = days_to_secs(cfg.delta_days).max(1);
    let epochs = partition_epochs(&data.post, t_last_training, delta_secs);

    // per-user state for users appearing in the post split
    let mut states: HashMap<UserId, UserState> = HashMap::new();
    for e in &data.post {
        states.entry(e.user).or_insert_with(|| UserState {
            history: UserHistory::new(),
            rng: streams.user_stream(data.users.name(e.user)),
            last_sim: None,
        });
    }
    for e in &data.train {
        if let Some(state) = states.get_mut(&e.user) {
            state.history.record(e.venue);
        }
    }

    let mut visits: Vec<SimulatedVisit> = Vec::with_capacity(data.post.len());
    let mut retrain_count = 0u32;
    let mut cold_user_recs = 0u64;
    let mut epoch_windows = Vec::with_capacity(epochs.len());

    for (epoch_idx, &(start, end, retrain_after)) in epochs.iter().enumerate() {
        let slice = &data.post[start..=end];
        epoch_windows.push((slice[0].t, slice[slice.len() - 1].t));

        // group this epoch's events by user, preserving per-user order
        let mut groups: HashMap<UserId, Vec<(usize, &VisitEvent)>> = HashMap::new();
        for (offset, e) in slice.iter().enumerate() {
            groups.entry(e.user).or_default().push((start + offset, e));
        }
        let mut work: Vec<(UserId, Vec<(usize, &VisitEvent)>, UserState)> = Vec::new();
        let mut user_ids: Vec<UserId> = groups.keys().copied().collect();
        user_ids.sort_unstable();
        for u in user_ids {
            let events = groups.remove(&u).expect("grouped above");
            let state = states.remove(&u).expect("state created above");
            work.push((u, events, state));
        }

        let model_ref = model.as_ref();
        let results: Vec<Result<(UserId, UserState, Vec<(usize, SimulatedVisit)>, u64)>> = work
            .into_par_iter()
            .map(|(user, events, mut state)| {
                let mut out = Vec::with_capacity(events.len());
                let mut cold = 0u64;
                for (orig_idx, e) in events {
                    let anchor = match cfg.anchor {
                        AnchorMode::Trace => e.venue,
                        AnchorMode::Simulated => state.last_sim.unwrap_or(e.venue),
                    };
                    let category = data.catalog.venue(e.venue).category;
                    let (venue, mode, was_cold) = venue_selection(
                        user,
                        anchor,
                        e.t,
                        category,
                        model_ref,
                        cfg,
                        data,
                        &mut state.history,
                        &mut state.rng,
                    )?;
                    state.last_sim = Some(venue);
                    cold += was_cold as u64;
                    out.push((
                        orig_idx,
                        SimulatedVisit {
                            user,
                            venue,
                            t: e.t,
                            mode,
                            epoch: epoch_idx as u32,
                        },
                    ));
                }
                Ok((user, state, out, cold))
            })
            .collect();

        let mut epoch_visits: Vec<(usize, SimulatedVisit)> = Vec::with_capacity(slice.len());
        for r in results {
            let (user, state, out, cold) = r?;
            states.insert(user, state);
            cold_user_recs += cold;
            epoch_visits.extend(out);
        }
        // serialized collection: restore chronological (event-index) order
        epoch_visits.sort_unstable_by_key(|&(i, _)| i);
        visits.extend(epoch_visits.into_iter().map(|(_, v)| v));

        // Alg. lines 9-11: retrain on the train split plus everything
        // simulated so far
        if retrain_after {
            retrain_count += 1;
            if cfg.eta > 0.0 {
                let mut rng = streams.labeled_stream("retrain", retrain_count as u64);
                model = Some(retrain(
                    cfg.algorithm,
                    &data.train,
                    visits.iter().map(|v| (v.user, v.venue)),
                    &data.catalog,
                    data.users.len(),
                    &cfg.hyper,
                    &mut rng,
                )?);
            }
        }
    }

    let mut mode_counts = std::collections::BTreeMap::new();
    let mut degenerate_events = 0u64;
    for v in &visits {
        *mode_counts.entry(v.mode.as_str().to_string()).or_insert(0) += 1;
        if v.mode == DecisionMode::Degenerate {
            degenerate_events += 1;
        }
    }

    let meta = RunMetadata {
        config: cfg.clone(),
        post_events: data.post.len() as u64,
        simulated_visits: visits.len() as u64,
        retrain_count,
        mode_counts,
        cold_user_recs,
        degenerate_events,
        epoch_windows,
        wall_time_ms: started.elapsed().as_millis() as u64,
    };
    Ok((visits, meta))
}

/// Run inside a dedicated pool of `threads` workers (0 = ambient pool).
pub fn run_simulation_with_threads(
    data: &SimData,
    cfg: &SimulationConfig,
    threads: usize,
) -> Result<(Vec<SimulatedVisit>, RunMetadata)> {
    if threads == 0 {
        return run_simulation(data, cfg);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| run_simulation(data, cfg))
}

/// Render simulated visits as the canonical visit CSV.
pub fn visits_csv(data: &SimData, visits: &[SimulatedVisit]) -> String {
    let mut out = String::from("user_id,venue_id,category,lat,lon,timestamp_iso8601,mode,epoch_index\n");
    for v in visits {
        let venue = data.catalog.venue(v.venue);
        let cat = data.catalog.category_name(venue.category);
        let cat_field = if cat.contains(',') || cat.contains('"') {
            format!("\"{}\"", cat.replace('"', "\"\""))
        } else {
            cat.to_string()
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            data.users.name(v.user),
            venue.id,
            cat_field,
            venue.lat,
            venue.lon,
            crate::ingest::format_timestamp(v.t),
            v.mode.as_str(),
            v.epoch
        ));
    }
    out
}

/// Number of top-degree nodes in the rich club.
pub const RICH_CLUB_SIZE: usize = 15;

/// Metrics of one completed run, computed on the simulated visits alone
/// (`gini_scope = simulated_only`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMetrics {
    pub eta: f64,
    pub algorithm: String,
    pub seed: u64,
    pub mean_individual_gini: Option<f64>,
    pub collective_gini: Option<f64>,
    pub alpha: Option<f64>,
    pub richclub_density: Option<f64>,
    pub peripheral_density: Option<f64>,
    pub median_degree: Option<f64>,
    pub node_count: u64,
    pub edge_count: u64,
    pub gini_scope: String,
}

/// Compute the standard per-run metric set from simulated visits, using
/// the run's epoch windows for co-location.
pub fn run_metrics(
    cfg: &SimulationConfig,
    visits: &[SimulatedVisit],
    meta: &RunMetadata,
    rich_h: usize,
) -> RunMetrics {
    let events: Vec<VisitEvent> = visits.iter().map(|v| v.as_event()).collect();
    let net = metrics::colocation(&events, &meta.epoch_windows);
    RunMetrics {
        eta: cfg.eta,
        algorithm: cfg.algorithm.to_string(),
        seed: cfg.seed,
        mean_individual_gini: metrics::mean_individual_gini(&events).ok(),
        collective_gini: metrics::collective_gini(&events).ok(),
        alpha: metrics::degree_slope(&net).ok(),
        richclub_density: metrics::richclub_density(&net, rich_h).ok(),
        peripheral_density: metrics::peripheral_density(&net, rich_h).ok(),
        median_degree: net.median_degree().map(|d| d as f64),
        node_count: net.node_count() as u64,
        edge_count: net.edge_count() as u64,
        gini_scope: "simulated_only".to_string(),
    }
}

/// Sweep grid specification.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub etas: Vec<f64>,
    pub algorithms: Vec<RecommenderKind>,
    pub runs: u32,
    pub base: SimulationConfig,
    pub rich_h: usize,
}

/// One executed sweep cell.
#[derive(Clone, Debug, Serialize)]
pub struct CellResult {
    pub eta: f64,
    pub algorithm: String,
    pub run_index: u32,
    pub seed: u64,
    pub metrics: Option<RunMetrics>,
    pub meta: Option<RunMetadata>,
    pub error: Option<String>,
}

/// Derive the seed of one (eta, algorithm, replicate) cell from the master
/// seed. Uses the algorithm name and the exact eta bits, so any grid is
/// stable under reordering.
pub fn cell_seed(master: u64, algorithm: RecommenderKind, eta: f64, run_index: u32) -> u64 {
    RngStreams::new(master).derive(
        &format!("cell|{algorithm}|{:016x}|{run_index}", eta.to_bits()),
        run_index as u64,
    )
}

/// Execute the full grid. Cell failures are recorded and the sweep
/// continues. `per_cell` observes every finished cell with its visits
/// (called from worker threads, serialized internally by the caller's
/// sync primitive if needed — this function invokes it under a lock).
pub fn sweep(
    data: &SimData,
    spec: &SweepSpec,
    per_cell: impl Fn(&CellResult, &[SimulatedVisit]) + Sync,
) -> Vec<CellResult> {
    let mut cells: Vec<(RecommenderKind, f64, u32)> = Vec::new();
    for &algo in &spec.algorithms {
        for &eta in &spec.etas {
            for run in 0..spec.runs.max(1) {
                cells.push((algo, eta, run));
            }
        }
    }
    let lock = std::sync::Mutex::new(());
    let mut results: Vec<CellResult> = cells
        .into_par_iter()
        .map(|(algo, eta, run)| {
            let seed = cell_seed(spec.base.seed, algo, eta, run);
            let cfg = SimulationConfig {
                eta,
                algorithm: algo,
                seed,
                ..spec.base.clone()
            };
            let mut cell = CellResult {
                eta,
                algorithm: algo.to_string(),
                run_index: run,
                seed,
                metrics: None,
                meta: None,
                error: None,
            };
            match run_simulation(data, &cfg) {
                Ok((visits, meta)) => {
                    cell.metrics = Some(run_metrics(&cfg, &visits, &meta, spec.rich_h));
                    cell.meta = Some(meta);
                    let _guard = lock.lock().unwrap();
                    per_cell(&cell, &visits);
                }
                Err(e) => {
                    cell.error = Some(e.to_string());
                    let _guard = lock.lock().unwrap();
                    per_cell(&cell, &[]);
                }
            }
            cell
        })
        .collect();
    // deterministic report order: algorithm grid order, eta order, run
    results.sort_by(|a, b| {
        let ka = (
            spec.algorithms
                .iter()
                .position(|x| x.to_string() == a.algorithm)
                .unwrap_or(usize::MAX),
            spec.etas
                .iter()
                .position(|&x| x == a.eta)
                .unwrap_or(usize::MAX),
            a.run_index,
        );
        let kb = (
            spec.algorithms
                .iter()
                .position(|x| x.to_string() == b.algorithm)
                .unwrap_or(usize::MAX),
            spec.etas
                .iter()
                .position(|&x| x == b.eta)
                .unwrap_or(usize::MAX),
            b.run_index,
        );
        ka.cmp(&kb)
    });
    results
}

/// Per-(eta, algorithm) aggregate of a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct AggregateRow {
    pub eta: f64,
    pub algorithm: String,
    pub runs: u32,
    pub failed: u32,
    pub mean_individual_gini: Option<(f64, f64)>,
    pub collective_gini: Option<(f64, f64)>,
    pub alpha: Option<(f64, f64)>,
    pub richclub_density: Option<(f64, f64)>,
    pub peripheral_density: Option<(f64, f64)>,
    pub median_degree: Option<(f64, f64)>,
}

fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Aggregate cell results into one row per (eta, algorithm), in the order
/// the cells appear.
pub fn aggregate(results: &[CellResult]) -> Vec<AggregateRow> {
    let mut order: Vec<(f64, String)> = Vec::new();
    for r in results {
        if !order
            .iter()
            .any(|(e, a)| *e == r.eta && a == &r.algorithm)
        {
            order.push((r.eta, r.algorithm.clone()));
        }
    }
    order
        .into_iter()
        .map(|(eta, algorithm)| {
            let group: Vec<&CellResult> = results
                .iter()
                .filter(|r| r.eta == eta && r.algorithm == algorithm)
                .collect();
            let failed = group.iter().filter(|r| r.error.is_some()).count() as u32;
            let pick = |f: fn(&RunMetrics) -> Option<f64>| {
                let vals: Vec<f64> = group
                    .iter()
                    .filter_map(|r| r.metrics.as_ref().and_then(f))
                    .collect();
                mean_std(&vals)
            };
            AggregateRow {
                eta,
                algorithm,
                runs: group.len() as u32,
                failed,
                mean_individual_gini: pick(|m| m.mean_individual_gini),
                collective_gini: pick(|m| m.collective_gini),
                alpha: pick(|m| m.alpha),
                richclub_density: pick(|m| m.richclub_density),
                peripheral_density: pick(|m| m.peripheral_density),
                median_degree: pick(|m| m.median_degree),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
