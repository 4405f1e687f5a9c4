//! Synthetic check-in generator.
//!
//! Produces a city with clustered venue geography, skewed category and
//! popularity structure, and users following an exploration /
//! preferential-return process — the same behavioral regime the simulation
//! models autonomously. Useful for demos, tests, and running the pipeline
//! when no real check-in file is at hand.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geo::SpatialIndex;
use crate::ingest::{format_timestamp, Catalog, Dataset, UserTable, VisitEvent};
use crate::rng::weighted_index;
use crate::types::{Timestamp, UserId, VenueId};

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub users: usize,
    pub venues: usize,
    pub categories: usize,
    pub first_levels: usize,
    pub days: f64,
    pub mean_visits_per_user: f64,
    /// Lognormal sigma of per-user activity.
    pub activity_sigma: f64,
    pub seed: u64,

    pub clusters: usize,
    pub cluster_sigma_km: f64,
    pub city_radius_km: f64,
    /// Fraction of venues scattered uniformly instead of clustered.
    pub sprawl_fraction: f64,

    /// Exploration probability of the generating process:
    /// `rho * max(S / saturation_distinct, 1)^-gamma`. Near-constant
    /// exploration until a user's repertoire reaches the saturation scale,
    /// then power-law decay.
    pub rho: f64,
    pub gamma: f64,
    pub saturation_distinct: f64,
    /// Median and lognormal sigma of generated jump lengths, km.
    pub jump_median_km: f64,
    pub jump_sigma: f64,
    /// Zipf exponent for category sizes.
    pub category_zipf: f64,
    /// Zipf exponent for intrinsic venue attractiveness.
    pub attractiveness_zipf: f64,
    /// Fraction of venues labeled with a category from the default
    /// exclusion list, to give preprocessing something to do.
    pub excluded_fraction: f64,
    /// Preferred categories per user (0 disables taste niches).
    pub affinity_categories: usize,
    /// Return weight = count^return_exponent; 1.0 is classic preferential
    /// return, smaller values flatten per-user favorites.
    pub return_exponent: f64,
    /// Number of high-traffic landmark venues drawing occasional visits
    /// from the whole population (rotating crowds).
    pub landmark_count: usize,
    /// Probability that any single visit targets a landmark.
    pub landmark_prob: f64,
    /// Zipf exponent of landmark popularity.
    pub landmark_zipf: f64,
    /// Number of categories reserved for landmarks ("attraction"
    /// categories); ordinary venues never use them, which keeps landmark
    /// traffic pinned to its trace share instead of absorbing whole
    /// categories through preferential return.
    pub landmark_categories: usize,
    /// Explore weight of non-preferred categories relative to preferred.
    pub affinity_background: f64,
}

impl Default for SynthConfig {
    fn default() -> SynthConfig {
        SynthConfig {
            users: 600,
            venues: 23_000,
            categories: 100,
            first_levels: 10,
            days: 304.0,
            mean_visits_per_user: 150.0,
            activity_sigma: 0.8,
            seed: 7,
            clusters: 40,
            cluster_sigma_km: 2.5,
            city_radius_km: 14.0,
            sprawl_fraction: 0.7,
            rho: 0.9,
            gamma: 2.5,
            saturation_distinct: 45.0,
            jump_median_km: 2.0,
            jump_sigma: 1.0,
            category_zipf: 1.0,
            attractiveness_zipf: 0.5,
            excluded_fraction: 0.02,
            affinity_categories: 6,
            return_exponent: 1.0,
            affinity_background: 0.02,
            landmark_count: 80,
            landmark_prob: 0.06,
            landmark_zipf: 0.7,
            landmark_categories: 8,
        }
    }
}

pub struct SynthOutput {
    pub dataset: Dataset,
    pub hierarchy: HashMap<String, String>,
}

const BASE_LAT: f64 = 40.75;
const BASE_LON: f64 = -73.98;
const BASE_T: Timestamp = 1_333_476_000; // 2012-04-03T16:40:00Z
const KM_PER_DEG: f64 = std::f64::consts::PI * crate::geo::EARTH_RADIUS_KM / 180.0;

fn offset_km(lat: f64, lon: f64, east_km: f64, north_km: f64) -> (f64, f64) {
    (
        lat + north_km / KM_PER_DEG,
        lon + east_km / (KM_PER_DEG * lat.to_radians().cos()),
    )
}

fn disk_point(rng: &mut ChaCha8Rng, radius_km: f64) -> (f64, f64) {
    let r = radius_km * rng.gen::<f64>().sqrt();
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    offset_km(BASE_LAT, BASE_LON, r * theta.cos(), r * theta.sin())
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn generate(cfg: &SynthConfig) -> SynthOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // category names and their first-level grouping; the tail of the list
    // is reserved for landmark venues
    let n_cat = cfg.categories.max(1);
    let n_attraction = cfg.landmark_categories.min(n_cat.saturating_sub(1));
    let n_ordinary = n_cat - n_attraction;
    let cat_names: Vec<String> = (0..n_cat).map(|i| format!("cat{i:03}")).collect();
    let mut hierarchy = HashMap::new();
    for (i, name) in cat_names.iter().enumerate() {
        let fl = i * cfg.first_levels.max(1) / n_cat;
        hierarchy.insert(name.clone(), format!("area{fl}"));
    }
    let cat_weights: Vec<f64> = (0..n_ordinary)
        .map(|i| 1.0 / ((i + 1) as f64).powf(cfg.category_zipf))
        .collect();

    // clustered venue geography
    let centers: Vec<(f64, f64)> = (0..cfg.clusters.max(1))
        .map(|_| disk_point(&mut rng, cfg.city_radius_km * 0.6))
        .collect();
    let center_weights: Vec<f64> = (0..centers.len())
        .map(|i| 1.0 / (i + 1) as f64)
        .collect();

    // pick which venue slots become landmarks
    let n_land = cfg.landmark_count.min(cfg.venues);
    let landmark_slots: std::collections::HashSet<usize> = {
        let mut idx: Vec<usize> = (0..cfg.venues).collect();
        for i in 0..n_land {
            let j = rng.gen_range(i..idx.len());
            idx.swap(i, j);
        }
        idx.truncate(n_land);
        idx.into_iter().collect()
    };

    let excluded_label = "Office";
    let mut venue_rows = Vec::with_capacity(cfg.venues);
    let mut landmark_ids: Vec<String> = Vec::new();
    for i in 0..cfg.venues {
        let (lat, lon) = if rng.gen::<f64>() < cfg.sprawl_fraction {
            disk_point(&mut rng, cfg.city_radius_km)
        } else {
            let c = weighted_index(&center_weights, &mut rng).unwrap_or(0);
            let (clat, clon) = centers[c];
            let dx = gauss(&mut rng) * cfg.cluster_sigma_km;
            let dy = gauss(&mut rng) * cfg.cluster_sigma_km;
            offset_km(clat, clon, dx, dy)
        };
        let id = format!("v{i:05}");
        let category = if landmark_slots.contains(&i) && n_attraction > 0 {
            landmark_ids.push(id.clone());
            cat_names[n_ordinary + rng.gen_range(0..n_attraction)].clone()
        } else if rng.gen::<f64>() < cfg.excluded_fraction {
            excluded_label.to_string()
        } else {
            cat_names[weighted_index(&cat_weights, &mut rng).unwrap_or(0)].clone()
        };
        venue_rows.push((id, category, lat, lon));
    }
    let catalog = Catalog::from_rows(venue_rows);
    let index = SpatialIndex::build(&catalog, 1.0);

    // intrinsic attractiveness, decoupled from venue id order
    let mut attract: Vec<f64> = (0..catalog.len())
        .map(|i| 1.0 / ((i + 1) as f64).powf(cfg.attractiveness_zipf))
        .collect();
    for i in (1..attract.len()).rev() {
        let j = rng.gen_range(0..=i);
        attract.swap(i, j);
    }

    let landmarks: Vec<u32> = landmark_ids
        .iter()
        .map(|id| catalog.venue_by_id(id).expect("landmark interned").0)
        .collect();
    let landmark_weights: Vec<f64> = (0..landmarks.len())
        .map(|i| 1.0 / ((i + 1) as f64).powf(cfg.landmark_zipf))
        .collect();

    // users with lognormal activity levels
    let users = UserTable::from_ids((0..cfg.users).map(|i| format!("u{i:05}")).collect());
    let mu = cfg.mean_visits_per_user.max(4.0).ln() - cfg.activity_sigma * cfg.activity_sigma / 2.0;

    let jump_mu = cfg.jump_median_km.max(0.05).ln();
    let mut events: Vec<VisitEvent> = Vec::new();

    for uidx in 0..users.len() {
        let user = UserId(uidx as u32);
        // taste niche: preferred categories explore-weighted above the rest
        let affinity: Vec<f64> = if cfg.affinity_categories == 0 {
            vec![1.0; catalog.categories().len()]
        } else {
            let n_all = catalog.categories().len();
            let mut pick: Vec<usize> = (0..n_all).collect();
            for i in 0..cfg.affinity_categories.min(n_all) {
                let j = rng.gen_range(i..n_all);
                pick.swap(i, j);
            }
            let mut w = vec![cfg.affinity_background; n_all];
            for &c in pick.iter().take(cfg.affinity_categories.min(n_all)) {
                w[c] = 1.0;
            }
            w
        };
        let venue_weight =
            |v: usize| attract[v] * affinity[catalog.venues()[v].category.idx()];
        let n_visits = ((mu + cfg.activity_sigma * gauss(&mut rng)).exp().round() as usize).max(4);
        let mut times: Vec<Timestamp> = (0..n_visits)
            .map(|_| BASE_T + (rng.gen::<f64>() * cfg.days * 86_400.0) as i64)
            .collect();
        times.sort_unstable();

        // seed the trajectory at a random venue of a preferred category,
        // spreading users across districts
        let start = {
            let seed_weights: Vec<f64> = (0..catalog.len())
                .map(|v| affinity[catalog.venues()[v].category.idx()])
                .collect();
            VenueId(weighted_index(&seed_weights, &mut rng).unwrap_or(0) as u32)
        };
        let mut counts: HashMap<VenueId, u32> = HashMap::new();
        let mut current = start;
        // trips radiate from home rather than chaining endlessly, keeping
        // users district-local
        let home = catalog.venue(start);
        let (home_lat, home_lon) = (home.lat, home.lon);

        for (k, &t) in times.iter().enumerate() {
            let venue = if k == 0 {
                start
            } else if !landmarks.is_empty() && rng.gen::<f64>() < cfg.landmark_prob {
                let i = weighted_index(&landmark_weights, &mut rng).unwrap_or(0);
                VenueId(landmarks[i])
            } else {
                let s = counts.len().max(1) as f64;
                let p_explore = (cfg.rho
                    * (s / cfg.saturation_distinct.max(1.0)).max(1.0).powf(-cfg.gamma))
                .clamp(0.0, 1.0);
                if rng.gen::<f64>() < p_explore {
                    // explore: taste-weighted unvisited venue within a
                    // lognormal jump radius of home
                    let r = (jump_mu + cfg.jump_sigma * gauss(&mut rng)).exp();
                    let near: Vec<VenueId> = index
                        .query_radius(home_lat, home_lon, r)
                        .into_iter()
                        .filter(|v| !counts.contains_key(v) && *v != current)
                        .collect();
                    if near.is_empty() {
                        // widen to the whole city
                        let weights: Vec<f64> = (0..catalog.len())
                            .map(|i| {
                                if counts.contains_key(&VenueId(i as u32)) {
                                    0.0
                                } else {
                                    venue_weight(i)
                                }
                            })
                            .collect();
                        match weighted_index(&weights, &mut rng) {
                            Some(i) => VenueId(i as u32),
                            None => current,
                        }
                    } else {
                        let weights: Vec<f64> =
                            near.iter().map(|v| venue_weight(v.idx())).collect();
                        let i = weighted_index(&weights, &mut rng)
                            .unwrap_or_else(|| rng.gen_range(0..near.len()));
                        near[i]
                    }
                } else {
                    // preferential return over own counts
                    let items: Vec<(VenueId, u32)> = {
                        let mut v: Vec<_> = counts.iter().map(|(&v, &c)| (v, c)).collect();
                        v.sort_unstable();
                        v
                    };
                    let weights: Vec<f64> = items
                        .iter()
                        .map(|&(_, c)| (c as f64).powf(cfg.return_exponent))
                        .collect();
                    match weighted_index(&weights, &mut rng) {
                        Some(i) => items[i].0,
                        None => current,
                    }
                }
            };
            *counts.entry(venue).or_insert(0) += 1;
            current = venue;
            events.push(VisitEvent {
                user,
                venue,
                t,
                tz_offset_min: 0,
            });
        }
    }

    events.sort_by_key(|e| e.t);
    SynthOutput {
        dataset: Dataset {
            events,
            catalog,
            users,
        },
        hierarchy,
    }
}

/// Render a dataset in the raw 8-column check-in layout (tab-separated).
pub fn raw_lines(d: &Dataset) -> String {
    let mut out = String::new();
    for e in &d.events {
        let v = d.catalog.venue(e.venue);
        let cat = d.catalog.category_name(v.category);
        out.push_str(&format!(
            "{}\t{}\tcid\t{}\t{}\t{}\t{}\t{}\n",
            d.users.name(e.user),
            v.id,
            cat,
            v.lat,
            v.lon,
            e.tz_offset_min,
            format_timestamp(e.t)
        ));
    }
    out
}

/// Render a hierarchy map as a two-column CSV, sorted for determinism.
pub fn hierarchy_csv(h: &HashMap<String, String>) -> String {
    let mut rows: Vec<(&String, &String)> = h.iter().collect();
    rows.sort();
    rows.iter()
        .map(|(k, v)| format!("{k},{v}\n"))
        .collect::<Vec<_>>()
        .join("")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_checkins_from_bytes, Format, RowPolicy};

    fn tiny() -> SynthConfig {
        SynthConfig {
            users: 30,
            venues: 120,
            categories: 8,
            first_levels: 3,
            days: 60.0,
            mean_visits_per_user: 25.0,
            seed: 11,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn generate_is_deterministic_and_well_formed() {
        let a = generate(&tiny());
        let b = generate(&tiny());
        assert_eq!(a.dataset.canonical_csv(), b.dataset.canonical_csv());
        assert_eq!(a.dataset.users.len(), 30);
        assert_eq!(a.dataset.catalog.len(), 120);
        assert!(!a.dataset.events.is_empty());
        // sorted by time
        assert!(a.dataset.events.windows(2).all(|w| w[0].t <= w[1].t));
    }

    #[test]
    fn raw_round_trip_through_loader() {
        let out = generate(&tiny());
        let raw = raw_lines(&out.dataset);
        let (loaded, rep) =
            load_checkins_from_bytes(raw.as_bytes(), Format::Raw, RowPolicy::Fail).unwrap();
        assert_eq!(rep.skipped, 0);
        assert_eq!(loaded.events.len(), out.dataset.events.len());
        assert_eq!(loaded.canonical_csv(), out.dataset.canonical_csv());
    }

    #[test]
    fn hierarchy_covers_all_generated_categories() {
        let out = generate(&tiny());
        for c in out.dataset.catalog.categories() {
            if c != "Office" {
                assert!(out.hierarchy.contains_key(c), "missing {c}");
            }
        }
    }
}
