//! Great-circle distance, a grid index for radius queries, and the
//! empirical jump-length distribution.

use rand::Rng;

use crate::error::{Error, Result};
use crate::ingest::{Catalog, Dataset};
use crate::types::{CategoryId, VenueId};

/// Mean Earth radius in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Great-circle distance between two (lat, lon) points in degrees, in km.
#[inline]
pub fn haversine(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let lat1r = lat1.to_radians();
    let lat2r = lat2.to_radians();
    let dlat = (lat2r - lat1r) / 2.0;
    let dlon = (lon2 - lon1).to_radians() / 2.0;
    let a = dlat.sin().powi(2) + lat1r.cos() * lat2r.cos() * dlon.sin().powi(2);
    2.0 * a.sqrt().min(1.0).asin() * EARTH_RADIUS_KM
}

const KM_PER_DEG_LAT: f64 = std::f64::consts::PI * EARTH_RADIUS_KM / 180.0;

/// Uniform lat/lon grid over the catalog. Radius queries scan every cell
/// intersecting the bounding box of the query disc and check exact
/// distances, so results match a brute-force scan.
#[derive(Clone, Debug)]
pub struct SpatialIndex {
    cell_deg: f64,
    cells: std::collections::HashMap<(i32, i32), Vec<VenueId>>,
    positions: Vec<(f64, f64)>,
}

impl SpatialIndex {
    /// Build over the whole catalog with a cell size of roughly
    /// `max(cell_km, 1.0)` km converted to degrees at the mean latitude.
    pub fn build(catalog: &Catalog, cell_km: f64) -> SpatialIndex {
        let positions: Vec<(f64, f64)> = catalog.venues().iter().map(|v| (v.lat, v.lon)).collect();
        let cell_km = cell_km.max(1.0);
        let mean_lat = if positions.is_empty() {
            0.0
        } else {
            positions.iter().map(|p| p.0).sum::<f64>() / positions.len() as f64
        };
        // Use the smaller km-per-degree (longitude shrinks with latitude) so
        // cells are at least cell_km wide in both axes.
        let coslat = mean_lat.to_radians().cos().abs().max(1e-6);
        let cell_deg = cell_km / (KM_PER_DEG_LAT * coslat.min(1.0));

        let mut cells: std::collections::HashMap<(i32, i32), Vec<VenueId>> =
            std::collections::HashMap::new();
        for (i, &(lat, lon)) in positions.iter().enumerate() {
            let key = (
                (lat / cell_deg).floor() as i32,
                (lon / cell_deg).floor() as i32,
            );
            cells.entry(key).or_default().push(VenueId(i as u32));
        }
        SpatialIndex {
            cell_deg,
            cells,
            positions,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// All venues within `r_km` of the point, ascending by venue id.
    pub fn query_radius(&self, lat: f64, lon: f64, r_km: f64) -> Vec<VenueId> {
        if r_km < 0.0 || self.positions.is_empty() {
            return Vec::new();
        }
        let dlat_deg = r_km / KM_PER_DEG_LAT;
        let coslat = lat.to_radians().cos().abs().max(1e-6);
        let dlon_deg = (r_km / (KM_PER_DEG_LAT * coslat)).min(180.0);

        let lat_lo = ((lat - dlat_deg) / self.cell_deg).floor() as i32;
        let lat_hi = ((lat + dlat_deg) / self.cell_deg).floor() as i32;
        let lon_lo = ((lon - dlon_deg) / self.cell_deg).floor() as i32;
        let lon_hi = ((lon + dlon_deg) / self.cell_deg).floor() as i32;

        let mut out = Vec::new();
        for ci in lat_lo..=lat_hi {
            for cj in lon_lo..=lon_hi {
                if let Some(ids) = self.cells.get(&(ci, cj)) {
                    for &vid in ids {
                        let (vlat, vlon) = self.positions[vid.idx()];
                        if haversine(lat, lon, vlat, vlon) <= r_km {
                            out.push(vid);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Venues within `r_km` of `center`, optionally restricted to one category.
/// The center venue itself is included when it matches; callers that need
/// displacement exclude it.
pub fn venues_within(
    index: &SpatialIndex,
    catalog: &Catalog,
    center: VenueId,
    r_km: f64,
    category: Option<CategoryId>,
) -> Vec<VenueId> {
    let c = catalog.venue(center);
    let hits = index.query_radius(c.lat, c.lon, r_km);
    match category {
        None => hits,
        Some(cat) => hits
            .into_iter()
            .filter(|&v| catalog.venue(v).category == cat)
            .collect(),
    }
}

/// Number of other venues within `r_star` km of `v`, any category.
pub fn relevance(index: &SpatialIndex, catalog: &Catalog, v: VenueId, r_star: f64) -> u32 {
    let c = catalog.venue(v);
    let hits = index.query_radius(c.lat, c.lon, r_star);
    hits.iter().filter(|&&x| x != v).count() as u32
}

/// Precompute `relevance` for the whole catalog.
pub fn relevance_table(index: &SpatialIndex, catalog: &Catalog, r_star: f64) -> Vec<u32> {
    use rayon::prelude::*;
    (0..catalog.len() as u32)
        .into_par_iter()
        .map(|i| relevance(index, catalog, VenueId(i), r_star))
        .collect()
}

/// Multiset of km distances between consecutive same-user visits.
#[derive(Clone, Debug, Default)]
pub struct JumpLengthDistribution {
    /// Ascending jump lengths; one per consecutive same-user visit pair.
    samples: Vec<f64>,
    median: f64,
}

impl JumpLengthDistribution {
    /// Enumerate consecutive venue pairs in each user's time-ordered visit
    /// sequence. Users with fewer than two visits contribute nothing.
    pub fn from_dataset(d: &Dataset) -> JumpLengthDistribution {
        let mut last_venue: Vec<Option<VenueId>> = vec![None; d.users.len()];
        let mut samples = Vec::new();
        for e in &d.events {
            if let Some(prev) = last_venue[e.user.idx()] {
                let a = d.catalog.venue(prev);
                let b = d.catalog.venue(e.venue);
                samples.push(haversine(a.lat, a.lon, b.lat, b.lon));
            }
            last_venue[e.user.idx()] = Some(e.venue);
        }
        Self::from_samples(samples)
    }

    pub fn from_samples(mut samples: Vec<f64>) -> JumpLengthDistribution {
        samples.sort_by(|a, b| a.partial_cmp(b).expect("finite jump lengths"));
        let median = if samples.is_empty() {
            0.0
        } else {
            // lower of the two middles for even counts
            samples[(samples.len() - 1) / 2]
        };
        JumpLengthDistribution { samples, median }
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn median(&self) -> f64 {
        self.median
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Draw one stored sample uniformly at random (empirical bootstrap).
    pub fn sample(&self, rng: &mut impl Rng) -> Result<f64> {
        if self.samples.is_empty() {
            return Err(Error::degenerate("empty jump-length distribution"));
        }
        Ok(self.samples[rng.gen_range(0..self.samples.len())])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_checkins_from_bytes, Format, RowPolicy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haversine_identity_and_known_arcs() {
        assert_eq!(haversine(12.3, 45.6, 12.3, 45.6), 0.0);
        // one degree of longitude on the equator
        let one_deg = std::f64::consts::PI * EARTH_RADIUS_KM / 180.0;
        assert!((haversine(0.0, 0.0, 0.0, 1.0) - one_deg).abs() < 1e-6);
        // antipodal along the equator: half circumference
        let half = std::f64::consts::PI * EARTH_RADIUS_KM;
        assert!((haversine(0.0, 0.0, 0.0, 180.0) - half).abs() < 1e-6);
        assert!((one_deg - 111.195).abs() < 1e-3);
        assert!((half - 20015.1).abs() < 0.1);
    }

    #[test]
    fn haversine_symmetry_and_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let mut p = || {
                (
                    rng_range(&mut rng, -90.0, 90.0),
                    rng_range(&mut rng, -180.0, 180.0),
                )
            };
            let (alat, alon) = p();
            let (blat, blon) = p();
            let (clat, clon) = p();
            let ab = haversine(alat, alon, blat, blon);
            let ba = haversine(blat, blon, alat, alon);
            assert!((ab - ba).abs() < 1e-9);
            let ac = haversine(alat, alon, clat, clon);
            let bc = haversine(blat, blon, clat, clon);
            assert!(ac <= ab + bc + 1e-9);
        }
    }

    fn rng_range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
        use rand::Rng;
        rng.gen_range(lo..hi)
    }

    fn catalog_from(rows: &[(&str, &str, f64, f64)]) -> Catalog {
        let lines: Vec<String> = rows
            .iter()
            .enumerate()
            .map(|(i, (id, cat, lat, lon))| {
                format!(
                    "u\t{id}\tcid\t{cat}\t{lat}\t{lon}\t0\t2012-04-03T18:00:{:02}Z",
                    i % 60
                )
            })
            .collect();
        load_checkins_from_bytes(lines.join("\n").as_bytes(), Format::Raw, RowPolicy::Fail)
            .unwrap()
            .0
            .catalog
    }

    #[test]
    fn venues_within_category_and_radius() {
        // venues 1, 2, 3 km east of the center, plus the center itself
        let km_deg = 1.0 / (std::f64::consts::PI * EARTH_RADIUS_KM / 180.0);
        let cat = catalog_from(&[
            ("c0", "Cafe", 0.0, 0.0),
            ("v1", "Cafe", 0.0, km_deg),
            ("v2", "Cafe", 0.0, 2.0 * km_deg),
            ("v3", "Cafe", 0.0, 3.0 * km_deg),
            ("x1", "Park", 0.0, km_deg),
        ]);
        let index = SpatialIndex::build(&cat, 1.0);
        let center = cat.venue_by_id("c0").unwrap();
        let cafe = cat.category_by_name("Cafe").unwrap();
        let got = venues_within(&index, &cat, center, 2.5, Some(cafe));
        let names: Vec<&str> = got.iter().map(|&v| cat.venue(v).id.as_str()).collect();
        assert_eq!(names, vec!["c0", "v1", "v2"]);

        // r = 0 keeps only co-located matches (the center itself here)
        let zero = venues_within(&index, &cat, center, 0.0, Some(cafe));
        assert_eq!(zero.len(), 1);
        assert_eq!(cat.venue(zero[0]).id, "c0");

        // a category with no venues in range
        let park = cat.category_by_name("Park").unwrap();
        let none = venues_within(&index, &cat, center, 0.5, Some(park));
        assert!(none.is_empty());
    }

    #[test]
    fn relevance_counts_other_venues() {
        let km_deg = 1.0 / (std::f64::consts::PI * EARTH_RADIUS_KM / 180.0);
        let cat = catalog_from(&[
            ("a", "Cafe", 0.0, 0.0),
            ("b", "Park", 0.0, km_deg),
            ("c", "Bar", 0.0, 2.0 * km_deg),
        ]);
        let index = SpatialIndex::build(&cat, 1.0);
        let a = cat.venue_by_id("a").unwrap();
        let b = cat.venue_by_id("b").unwrap();
        let c = cat.venue_by_id("c").unwrap();
        // r* slightly above 1 km to absorb floating-point edge error
        let r = 1.0 + 1e-9;
        assert_eq!(relevance(&index, &cat, b, r), 2);
        assert_eq!(relevance(&index, &cat, a, r), 1);
        assert_eq!(relevance(&index, &cat, c, r), 1);
        // zero radius, distinct points
        assert_eq!(relevance(&index, &cat, a, 0.0), 0);
        // singleton catalog
        let single = catalog_from(&[("only", "Cafe", 5.0, 5.0)]);
        let sidx = SpatialIndex::build(&single, 1.0);
        assert_eq!(relevance(&sidx, &single, VenueId(0), 10.0), 0);
    }

    #[test]
    fn radius_query_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _case in 0..10 {
            let n = rng.gen_range(1..=500usize);
            let rows: Vec<(String, f64, f64)> = (0..n)
                .map(|i| {
                    (
                        format!("v{i:04}"),
                        rng_range(&mut rng, 40.0, 41.0),
                        rng_range(&mut rng, -74.5, -73.5),
                    )
                })
                .collect();
            let refs: Vec<(&str, &str, f64, f64)> = rows
                .iter()
                .map(|(id, lat, lon)| (id.as_str(), "Cafe", *lat, *lon))
                .collect();
            let cat = catalog_from(&refs);
            let index = SpatialIndex::build(&cat, 2.0);
            for _q in 0..10 {
                let qlat = rng_range(&mut rng, 40.0, 41.0);
                let qlon = rng_range(&mut rng, -74.5, -73.5);
                let r = rng_range(&mut rng, 0.0, 30.0);
                let got = index.query_radius(qlat, qlon, r);
                let mut expect: Vec<VenueId> = (0..cat.len() as u32)
                    .map(VenueId)
                    .filter(|&v| {
                        let vv = cat.venue(v);
                        haversine(qlat, qlon, vv.lat, vv.lon) <= r
                    })
                    .collect();
                expect.sort_unstable();
                assert_eq!(got, expect);
            }
        }
    }

    #[test]
    fn jump_distribution_from_sequences() {
        let km_deg = 1.0 / (std::f64::consts::PI * EARTH_RADIUS_KM / 180.0);
        let lines = [
            format!("u1\tA\tc\tCafe\t0\t0\t0\t2012-04-03T10:00:00Z"),
            format!("u1\tB\tc\tCafe\t0\t{km_deg}\t0\t2012-04-03T11:00:00Z"),
            format!("u1\tC\tc\tCafe\t0\t{}\t0\t2012-04-03T12:00:00Z", 3.0 * km_deg),
            format!("u2\tA\tc\tCafe\t0\t0\t0\t2012-04-03T13:00:00Z"),
            format!("u3\tB\tc\tCafe\t0\t{km_deg}\t0\t2012-04-03T14:00:00Z"),
        ];
        let (d, _) = load_checkins_from_bytes(
            lines.join("\n").as_bytes(),
            Format::Raw,
            RowPolicy::Fail,
        )
        .unwrap();
        let dist = JumpLengthDistribution::from_dataset(&d);
        // u1 contributes d(A,B)=1 and d(B,C)=2; u2 and u3 nothing
        assert_eq!(dist.len(), 2);
        assert!((dist.samples()[0] - 1.0).abs() < 1e-6);
        assert!((dist.samples()[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn jump_distribution_empty_when_no_pairs() {
        let lines = [
            "u1\tA\tc\tCafe\t0\t0\t0\t2012-04-03T10:00:00Z".to_string(),
            "u2\tB\tc\tCafe\t0\t1\t0\t2012-04-03T11:00:00Z".to_string(),
        ];
        let (d, _) = load_checkins_from_bytes(
            lines.join("\n").as_bytes(),
            Format::Raw,
            RowPolicy::Fail,
        )
        .unwrap();
        let dist = JumpLengthDistribution::from_dataset(&d);
        assert!(dist.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(dist.sample(&mut rng).is_err());
    }

    #[test]
    fn median_is_lower_middle() {
        let dist = JumpLengthDistribution::from_samples(vec![9.0, 1.0, 2.0]);
        assert_eq!(dist.median(), 2.0);
        let even = JumpLengthDistribution::from_samples(vec![4.0, 1.0, 2.0, 3.0]);
        assert_eq!(even.median(), 2.0);
    }

    #[test]
    fn sampling_is_uniform_and_seeded() {
        let dist = JumpLengthDistribution::from_samples(vec![1.0, 2.0, 3.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut counts = [0u32; 3];
        let draws = 30_000;
        for _ in 0..draws {
            let v = dist.sample(&mut rng).unwrap();
            counts[(v as usize) - 1] += 1;
        }
        for c in counts {
            let f = c as f64 / draws as f64;
            assert!((f - 1.0 / 3.0).abs() < 0.02, "frequency {f}");
        }

        // single sample → always that value
        let single = JumpLengthDistribution::from_samples(vec![5.0]);
        for _ in 0..10 {
            assert_eq!(single.sample(&mut rng).unwrap(), 5.0);
        }

        // seeded determinism
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let s1: Vec<f64> = (0..50).map(|_| dist.sample(&mut r1).unwrap()).collect();
        let s2: Vec<f64> = (0..50).map(|_| dist.sample(&mut r2).unwrap()).collect();
        assert_eq!(s1, s2);
    }
}
