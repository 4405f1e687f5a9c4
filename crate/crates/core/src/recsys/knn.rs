//! Neighborhood models over the binary interaction matrix.
//!
//! Similarity is plain cosine between binary profiles:
//! `|A ∩ B| / sqrt(|A| · |B|)`. Each user (or item) keeps its top-k
//! neighbors, ranked by similarity with ties broken by ascending id.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::types::{UserId, VenueId};

use super::InteractionMatrix;

/// Cosine similarity between two sorted binary index sets.
pub fn cosine_sets(a: &[u32], b: &[u32]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut i = 0;
    let mut j = 0;
    let mut overlap = 0usize;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                overlap += 1;
                i += 1;
                j += 1;
            }
        }
    }
    overlap as f64 / ((a.len() as f64) * (b.len() as f64)).sqrt()
}

/// User-based neighborhood model, keyed by catalog user id.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UserKnnState {
    /// Per catalog user: top-k `(neighbor, similarity)`.
    pub neighbors: Vec<Vec<(UserId, f64)>>,
    /// Per catalog user: sorted training venues.
    pub user_items: Vec<Vec<VenueId>>,
}

impl UserKnnState {
    /// `score(u, v) = Σ_{u' ∈ N_k(u)} sim(u, u') · 1[u' visited v]`
    pub fn scores(&self, user: UserId, candidates: &[VenueId]) -> Vec<f64> {
        let neigh = &self.neighbors[user.idx()];
        candidates
            .iter()
            .map(|&v| {
                neigh
                    .iter()
                    .filter(|(u2, _)| self.user_items[u2.idx()].binary_search(&v).is_ok())
                    .map(|(_, s)| s)
                    .sum()
            })
            .collect()
    }
}

/// Item-based neighborhood model, keyed by catalog venue id.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ItemKnnState {
    /// Per catalog venue: top-k `(neighbor venue, similarity)`.
    pub neighbors: Vec<Vec<(VenueId, f64)>>,
    /// Per catalog user: sorted training venues.
    pub user_items: Vec<Vec<VenueId>>,
}

impl ItemKnnState {
    /// `score(u, v) = Σ_{v' ∈ history(u)} sim(v, v') · 1[v' ∈ N_k(v)]`
    pub fn scores(&self, user: UserId, candidates: &[VenueId]) -> Vec<f64> {
        let history = &self.user_items[user.idx()];
        candidates
            .iter()
            .map(|&v| {
                self.neighbors[v.idx()]
                    .iter()
                    .filter(|(v2, _)| history.binary_search(v2).is_ok())
                    .map(|(_, s)| s)
                    .sum()
            })
            .collect()
    }
}

/// Sorted catalog venue lists per catalog user.
pub(super) fn user_item_lists(m: &InteractionMatrix, n_users: usize) -> Vec<Vec<VenueId>> {
    let mut lists = vec![Vec::new(); n_users];
    for (r, &u) in m.users().iter().enumerate() {
        let mut items: Vec<VenueId> = m.row(r as u32).iter().map(|&c| m.venues()[c as usize]).collect();
        items.sort_unstable();
        lists[u.idx()] = items;
    }
    lists
}

fn top_k_neighbors<I: Copy + Ord>(mut sims: Vec<(I, f64)>, k: usize) -> Vec<(I, f64)> {
    sims.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite similarity")
            .then_with(|| a.0.cmp(&b.0))
    });
    sims.truncate(k);
    sims
}

/// Fit a user-based k-nearest-neighbor model.
pub fn train_user_knn(m: &InteractionMatrix, n_users: usize, k: usize) -> UserKnnState {
    let rows = m.n_users();
    let per_row: Vec<Vec<(UserId, f64)>> = (0..rows as u32)
        .into_par_iter()
        .map(|r| {
            let items = m.row(r);
            let mut overlap: HashMap<u32, u32> = HashMap::new();
            for &c in items {
                for &r2 in m.col(c) {
                    if r2 != r {
                        *overlap.entry(r2).or_insert(0) += 1;
                    }
                }
            }
            let len_r = items.len() as f64;
            let sims: Vec<(UserId, f64)> = overlap
                .into_iter()
                .map(|(r2, cnt)| {
                    let len2 = m.row(r2).len() as f64;
                    (m.users()[r2 as usize], cnt as f64 / (len_r * len2).sqrt())
                })
                .collect();
            top_k_neighbors(sims, k)
        })
        .collect();

    let mut neighbors = vec![Vec::new(); n_users];
    for (r, list) in per_row.into_iter().enumerate() {
        neighbors[m.users()[r].idx()] = list;
    }
    UserKnnState {
        neighbors,
        user_items: user_item_lists(m, n_users),
    }
}

/// Fit an item-based k-nearest-neighbor model.
pub fn train_item_knn(
    m: &InteractionMatrix,
    n_users: usize,
    n_venues: usize,
    k: usize,
) -> ItemKnnState {
    let cols = m.n_venues();
    let per_col: Vec<Vec<(VenueId, f64)>> = (0..cols as u32)
        .into_par_iter()
        .map(|c| {
            let visitors = m.col(c);
            let mut overlap: HashMap<u32, u32> = HashMap::new();
            for &r in visitors {
                for &c2 in m.row(r) {
                    if c2 != c {
                        *overlap.entry(c2).or_insert(0) += 1;
                    }
                }
            }
            let len_c = visitors.len() as f64;
            let sims: Vec<(VenueId, f64)> = overlap
                .into_iter()
                .map(|(c2, cnt)| {
                    let len2 = m.col(c2).len() as f64;
                    (m.venues()[c2 as usize], cnt as f64 / (len_c * len2).sqrt())
                })
                .collect();
            top_k_neighbors(sims, k)
        })
        .collect();

    let mut neighbors = vec![Vec::new(); n_venues];
    for (c, list) in per_col.into_iter().enumerate() {
        neighbors[m.venues()[c].idx()] = list;
    }
    ItemKnnState {
        neighbors,
        user_items: user_item_lists(m, n_users),
    }
}
