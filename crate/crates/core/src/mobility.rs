//! Autonomous venue choice: exploration and preferential return, plus the
//! fallback chain that keeps selection total.
//!
//! Preferential return samples from the user's own history proportionally
//! to visit counts; exploration samples an unvisited venue within the jump
//! radius proportionally to venue relevance. When either comes up empty the
//! fallback chain widens the search (first-level category, then nearest
//! same-category venue) and tags the visit with the stage that resolved it.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geo::{haversine, SpatialIndex};
use crate::ingest::Catalog;
use crate::rng::weighted_index;
use crate::types::{CategoryId, VenueId};

/// A user's venue visit counts: train-period visits plus the user's own
/// simulated visits. Ordered map so that weighted draws are deterministic.
#[derive(Clone, Debug, Default)]
pub struct UserHistory {
    visit_counts: BTreeMap<VenueId, u32>,
}

impl UserHistory {
    pub fn new() -> UserHistory {
        UserHistory::default()
    }

    pub fn record(&mut self, v: VenueId) {
        *self.visit_counts.entry(v).or_insert(0) += 1;
    }

    pub fn count(&self, v: VenueId) -> u32 {
        self.visit_counts.get(&v).copied().unwrap_or(0)
    }

    pub fn contains(&self, v: VenueId) -> bool {
        self.visit_counts.contains_key(&v)
    }

    /// Number of distinct venues visited.
    pub fn distinct_count(&self) -> usize {
        self.visit_counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VenueId, u32)> + '_ {
        self.visit_counts.iter().map(|(&v, &c)| (v, c))
    }
}

/// How the exploration probability is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExplorationMode {
    /// `p = rho * |V|^(-gamma)`, constant over the run.
    FixedGlobal,
    /// `p = rho * S^(-gamma)` with the user's current distinct venue count.
    PerUser,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplorationPolicy {
    pub mode: ExplorationMode,
    pub rho: f64,
    pub gamma: f64,
}

impl Default for ExplorationPolicy {
    fn default() -> ExplorationPolicy {
        ExplorationPolicy {
            mode: ExplorationMode::FixedGlobal,
            rho: 0.6,
            gamma: 0.21,
        }
    }
}

/// Probability of exploring rather than returning, clamped to [0, 1].
/// Users with no history count as `S = 1`.
pub fn exploration_probability(
    policy: &ExplorationPolicy,
    catalog_size: usize,
    history: &UserHistory,
) -> f64 {
    let base = match policy.mode {
        ExplorationMode::FixedGlobal => catalog_size.max(1) as f64,
        ExplorationMode::PerUser => history.distinct_count().max(1) as f64,
    };
    (policy.rho * base.powf(-policy.gamma)).clamp(0.0, 1.0)
}

/// How one simulated visit was decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecisionMode {
    Rec,
    Return,
    Explore,
    FallbackFirstLevel,
    FallbackNearest,
    FallbackToExplore,
    Degenerate,
}

impl DecisionMode {
    pub const ALL: [DecisionMode; 7] = [
        DecisionMode::Rec,
        DecisionMode::Return,
        DecisionMode::Explore,
        DecisionMode::FallbackFirstLevel,
        DecisionMode::FallbackNearest,
        DecisionMode::FallbackToExplore,
        DecisionMode::Degenerate,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DecisionMode::Rec => "rec",
            DecisionMode::Return => "return",
            DecisionMode::Explore => "explore",
            DecisionMode::FallbackFirstLevel => "fallback_first_level",
            DecisionMode::FallbackNearest => "fallback_nearest",
            DecisionMode::FallbackToExplore => "fallback_to_explore",
            DecisionMode::Degenerate => "degenerate",
        }
    }
}

impl std::str::FromStr for DecisionMode {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<DecisionMode> {
        DecisionMode::ALL
            .iter()
            .find(|m| m.as_str() == s)
            .copied()
            .ok_or_else(|| crate::error::Error::invalid(format!("unknown decision mode {s:?}")))
    }
}

/// Preferential return restricted to one category: sample a history venue
/// of that category with probability proportional to its visit count.
/// `None` when the history holds no venue of the category.
pub fn preferential_return(
    history: &UserHistory,
    category: CategoryId,
    catalog: &Catalog,
    rng: &mut impl Rng,
) -> Option<VenueId> {
    let matching: Vec<(VenueId, u32)> = history
        .iter()
        .filter(|&(v, _)| catalog.venue(v).category == category)
        .collect();
    if matching.is_empty() {
        return None;
    }
    let weights: Vec<f64> = matching.iter().map(|&(_, c)| c as f64).collect();
    let i = weighted_index(&weights, rng).expect("counts are positive");
    Some(matching[i].0)
}

/// Explore among candidates: drop already-visited venues and sample the
/// rest with probability proportional to relevance; uniform when every
/// remaining relevance is zero. `None` when no unvisited candidate exists.
pub fn explore(
    candidates: &[VenueId],
    history: &UserHistory,
    relevance_of: impl Fn(VenueId) -> u32,
    rng: &mut impl Rng,
) -> Option<VenueId> {
    let unvisited: Vec<VenueId> = candidates
        .iter()
        .copied()
        .filter(|&v| !history.contains(v))
        .collect();
    if unvisited.is_empty() {
        return None;
    }
    let weights: Vec<f64> = unvisited.iter().map(|&v| relevance_of(v) as f64).collect();
    match weighted_index(&weights, rng) {
        Some(i) => Some(unvisited[i]),
        None => Some(unvisited[rng.gen_range(0..unvisited.len())]),
    }
}

/// Which primary selection failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FallbackStage {
    Explore,
    Return,
}

/// Everything the fallback chain needs to widen a failed selection.
pub struct FallbackContext<'a> {
    pub catalog: &'a Catalog,
    pub index: &'a SpatialIndex,
    pub relevance: &'a [u32],
    pub anchor: VenueId,
    pub category: CategoryId,
    pub radius_km: f64,
}

impl FallbackContext<'_> {
    /// Explore candidates of the target's first-level category within the
    /// radius, excluding the anchor.
    fn first_level_candidates(&self) -> Option<Vec<VenueId>> {
        let fl = self.catalog.first_level_of_category(self.category)?;
        let anchor = self.catalog.venue(self.anchor);
        let hits = self
            .index
            .query_radius(anchor.lat, anchor.lon, self.radius_km);
        Some(
            hits.into_iter()
                .filter(|&v| v != self.anchor && self.catalog.venue(v).first_level == Some(fl))
                .collect(),
        )
    }

    /// Same-category explore candidates within the radius, excluding the
    /// anchor.
    fn category_candidates(&self) -> Vec<VenueId> {
        let anchor = self.catalog.venue(self.anchor);
        self.index
            .query_radius(anchor.lat, anchor.lon, self.radius_km)
            .into_iter()
            .filter(|&v| v != self.anchor && self.catalog.venue(v).category == self.category)
            .collect()
    }

    /// Nearest venue of the original category at any distance, excluding
    /// the anchor; distance ties break by ascending venue id.
    fn nearest_in_category(&self) -> Option<VenueId> {
        let anchor = self.catalog.venue(self.anchor);
        let mut best: Option<(f64, VenueId)> = None;
        for &v in self.catalog.venues_in_category(self.category) {
            if v == self.anchor {
                continue;
            }
            let venue = self.catalog.venue(v);
            let d = haversine(anchor.lat, anchor.lon, venue.lat, venue.lon);
            // venues iterate ascending by id, so strict improvement keeps
            // the lowest id on ties
            if best.map(|(bd, _)| d < bd).unwrap_or(true) {
                best = Some((d, v));
            }
        }
        best.map(|(_, v)| v)
    }
}

/// Resolve a failed primary selection. Always yields a venue: when the
/// catalog holds no venue of the target category besides possibly the
/// anchor, the anchor itself is returned tagged [`DecisionMode::Degenerate`].
pub fn fallback(
    stage: FallbackStage,
    ctx: &FallbackContext<'_>,
    history: &UserHistory,
    rng: &mut impl Rng,
) -> (VenueId, DecisionMode) {
    match stage {
        FallbackStage::Return => {
            // (1) preferential return over the first-level category
            if let Some(fl) = ctx.catalog.first_level_of_category(ctx.category) {
                let matching: Vec<(VenueId, u32)> = history
                    .iter()
                    .filter(|&(v, _)| ctx.catalog.venue(v).first_level == Some(fl))
                    .collect();
                if !matching.is_empty() {
                    let weights: Vec<f64> = matching.iter().map(|&(_, c)| c as f64).collect();
                    let i = weighted_index(&weights, rng).expect("counts are positive");
                    return (matching[i].0, DecisionMode::FallbackFirstLevel);
                }
            }
            // (2) switch to exploration mode
            let candidates = ctx.category_candidates();
            if let Some(v) = explore(&candidates, history, |v| ctx.relevance[v.idx()], rng) {
                return (v, DecisionMode::FallbackToExplore);
            }
            fallback(FallbackStage::Explore, ctx, history, rng)
        }
        FallbackStage::Explore => {
            // (1) explore among the broader first-level category within r
            if let Some(candidates) = ctx.first_level_candidates() {
                if let Some(v) = explore(&candidates, history, |v| ctx.relevance[v.idx()], rng) {
                    return (v, DecisionMode::FallbackFirstLevel);
                }
            }
            // (2) nearest venue of the original category, any distance
            if let Some(v) = ctx.nearest_in_category() {
                return (v, DecisionMode::FallbackNearest);
            }
            (ctx.anchor, DecisionMode::Degenerate)
        }
    }
}
