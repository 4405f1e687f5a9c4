//! Hybrid model blending a user-based neighborhood score, venue
//! popularity, and proximity to the user's historical centroid.
//!
//! Each component is min-max normalized over the candidate set before
//! averaging, since the three live on unrelated scales.

use serde::{Deserialize, Serialize};

use crate::geo::haversine;
use crate::ingest::Catalog;
use crate::types::{UserId, VenueId};

use super::knn::{train_user_knn, user_item_lists, UserKnnState};
use super::{min_max_normalize, InteractionMatrix};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PgnState {
    pub user_knn: UserKnnState,
    /// Mean coordinates of each user's distinct training venues.
    pub centroids: Vec<Option<(f64, f64)>>,
}

impl PgnState {
    pub fn scores(
        &self,
        user: UserId,
        candidates: &[VenueId],
        popularity: &[u32],
        catalog: &Catalog,
    ) -> Vec<f64> {
        let knn = min_max_normalize(&self.user_knn.scores(user, candidates));
        let pop = min_max_normalize(
            &candidates
                .iter()
                .map(|&v| popularity[v.idx()] as f64)
                .collect::<Vec<_>>(),
        );
        let geo_raw: Vec<f64> = match self.centroids[user.idx()] {
            Some((clat, clon)) => candidates
                .iter()
                .map(|&v| {
                    let venue = catalog.venue(v);
                    1.0 / (1.0 + haversine(clat, clon, venue.lat, venue.lon))
                })
                .collect(),
            None => vec![0.0; candidates.len()],
        };
        let geo = min_max_normalize(&geo_raw);
        (0..candidates.len())
            .map(|i| (knn[i] + pop[i] + geo[i]) / 3.0)
            .collect()
    }
}

pub fn train_pgn(m: &InteractionMatrix, catalog: &Catalog, n_users: usize, k: usize) -> PgnState {
    let user_knn = train_user_knn(m, n_users, k);
    let items = user_item_lists(m, n_users);
    let centroids = items
        .iter()
        .map(|venues| {
            if venues.is_empty() {
                None
            } else {
                let (mut lat, mut lon) = (0.0, 0.0);
                for &v in venues {
                    let venue = catalog.venue(v);
                    lat += venue.lat;
                    lon += venue.lon;
                }
                let n = venues.len() as f64;
                Some((lat / n, lon / n))
            }
        })
        .collect();
    PgnState { user_knn, centroids }
}
