//! Inequality, co-location network, and attention-shift measurements.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::VisitEvent;
use crate::types::{Timestamp, UserId, VenueId};

/// Gini coefficient of a non-negative count vector.
///
/// With the counts `x_i` sorted ascending:
/// `G = (1/n) * (n + 1 - 2 * Σ (n + 1 - i) x_i / Σ x)`.
/// Requires at least one strictly positive count.
pub fn gini(counts: &[f64]) -> Result<f64> {
    let n = counts.len();
    if n == 0 {
        return Err(Error::degenerate("gini of an empty vector"));
    }
    if counts.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::invalid("gini requires finite non-negative counts"));
    }
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::degenerate("gini of an all-zero vector"));
    }
    let mut sorted = counts.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite counts"));
    let nf = n as f64;
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (nf + 1.0 - (i as f64 + 1.0)) * x)
        .sum();
    Ok((nf + 1.0 - 2.0 * weighted / total) / nf)
}

/// Per-user visit-count vectors from a visit set.
fn per_user_counts(visits: &[VisitEvent]) -> BTreeMap<UserId, BTreeMap<VenueId, u64>> {
    let mut map: BTreeMap<UserId, BTreeMap<VenueId, u64>> = BTreeMap::new();
    for e in visits {
        *map.entry(e.user).or_default().entry(e.venue).or_insert(0) += 1;
    }
    map
}

/// Visit totals per venue, ascending by venue id. Only venues that appear
/// in the visit set are counted.
pub fn visit_counts_per_venue(visits: &[VisitEvent]) -> Vec<(VenueId, u64)> {
    let mut map: BTreeMap<VenueId, u64> = BTreeMap::new();
    for e in visits {
        *map.entry(e.venue).or_insert(0) += 1;
    }
    map.into_iter().collect()
}

/// Mean over users of the per-user Gini of venue visit counts.
/// A user with a single distinct venue contributes 0.
pub fn mean_individual_gini(visits: &[VisitEvent]) -> Result<f64> {
    if visits.is_empty() {
        return Err(Error::degenerate("no visits"));
    }
    let users = per_user_counts(visits);
    let mut sum = 0.0;
    for counts in users.values() {
        let v: Vec<f64> = counts.values().map(|&c| c as f64).collect();
        sum += gini(&v)?;
    }
    Ok(sum / users.len() as f64)
}

/// Collective Gini over venues receiving at least one visit.
pub fn collective_gini(visits: &[VisitEvent]) -> Result<f64> {
    let counts: Vec<f64> = visit_counts_per_venue(visits)
        .into_iter()
        .map(|(_, c)| c as f64)
        .collect();
    gini(&counts)
}

/// Lorenz curve points from `(0, 0)` to `(1, 1)`: cumulative venue share
/// versus cumulative visit share with counts ascending.
pub fn lorenz(counts: &[f64]) -> Result<Vec<(f64, f64)>> {
    // validated by the same rules as gini
    gini(counts)?;
    let mut sorted = counts.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite counts"));
    let total: f64 = sorted.iter().sum();
    let n = sorted.len() as f64;
    let mut points = Vec::with_capacity(sorted.len() + 1);
    points.push((0.0, 0.0));
    let mut acc = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        acc += x;
        points.push(((i as f64 + 1.0) / n, acc / total));
    }
    Ok(points)
}

/// Undirected simple graph of users co-present at a venue within an epoch.
#[derive(Clone, Debug, Default)]
pub struct ColocationNetwork {
    nodes: Vec<UserId>,
    edges: BTreeSet<(UserId, UserId)>,
    /// Per edge, the deduplicated `(venue, window index)` witnesses.
    witnesses: BTreeMap<(UserId, UserId), BTreeSet<(VenueId, u32)>>,
}

impl ColocationNetwork {
    /// Build from explicit parts; self-loops are rejected and edges are
    /// normalized to `(min, max)`.
    pub fn from_edges(nodes: Vec<UserId>, edges: impl IntoIterator<Item = (UserId, UserId)>) -> ColocationNetwork {
        let mut node_set: BTreeSet<UserId> = nodes.into_iter().collect();
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            assert_ne!(a, b, "self-loop");
            let e = (a.min(b), a.max(b));
            node_set.insert(e.0);
            node_set.insert(e.1);
            set.insert(e);
        }
        ColocationNetwork {
            nodes: node_set.into_iter().collect(),
            edges: set,
            witnesses: BTreeMap::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[UserId] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: UserId, b: UserId) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn witnesses(&self, a: UserId, b: UserId) -> Option<&BTreeSet<(VenueId, u32)>> {
        self.witnesses.get(&(a.min(b), a.max(b)))
    }

    /// Degrees aligned with `nodes()`.
    pub fn degrees(&self) -> Vec<usize> {
        let index: HashMap<UserId, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &u)| (u, i))
            .collect();
        let mut deg = vec![0usize; self.nodes.len()];
        for &(a, b) in &self.edges {
            deg[index[&a]] += 1;
            deg[index[&b]] += 1;
        }
        deg
    }

    /// Median degree, lower of the two middles for even node counts.
    pub fn median_degree(&self) -> Option<u64> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut deg = self.degrees();
        deg.sort_unstable();
        Some(deg[(deg.len() - 1) / 2] as u64)
    }
}

/// Build the co-location network: within each `[t1, t2]` window (inclusive
/// bounds), every pair of distinct users visiting the same venue gains an
/// edge. Edges are unioned across windows; nodes are users with at least
/// one visit inside any window.
pub fn colocation(visits: &[VisitEvent], windows: &[(Timestamp, Timestamp)]) -> ColocationNetwork {
    let mut nodes: BTreeSet<UserId> = BTreeSet::new();
    let mut edges: BTreeSet<(UserId, UserId)> = BTreeSet::new();
    let mut witnesses: BTreeMap<(UserId, UserId), BTreeSet<(VenueId, u32)>> = BTreeMap::new();

    for (w, &(t1, t2)) in windows.iter().enumerate() {
        let mut venue_users: BTreeMap<VenueId, BTreeSet<UserId>> = BTreeMap::new();
        for e in visits {
            if e.t >= t1 && e.t <= t2 {
                nodes.insert(e.user);
                venue_users.entry(e.venue).or_default().insert(e.user);
            }
        }
        for (&venue, users) in &venue_users {
            let users: Vec<UserId> = users.iter().copied().collect();
            for i in 0..users.len() {
                for j in (i + 1)..users.len() {
                    let edge = (users[i], users[j]);
                    edges.insert(edge);
                    witnesses.entry(edge).or_default().insert((venue, w as u32));
                }
            }
        }
    }
    ColocationNetwork {
        nodes: nodes.into_iter().collect(),
        edges,
        witnesses,
    }
}

/// Absolute slope of the least-squares fit of `ln P(k)` on `ln k`, over
/// degrees `k >= 1` with `P(k) > 0`. Errors with fewer than two usable
/// points.
pub fn degree_slope(net: &ColocationNetwork) -> Result<f64> {
    let degrees = net.degrees();
    let n = net.node_count() as f64;
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for d in degrees {
        if d >= 1 {
            *hist.entry(d).or_insert(0) += 1;
        }
    }
    if hist.len() < 2 {
        return Err(Error::degenerate(
            "degree slope needs at least two distinct positive degrees",
        ));
    }
    let points: Vec<(f64, f64)> = hist
        .into_iter()
        .map(|(k, cnt)| ((k as f64).ln(), (cnt as f64 / n).ln()))
        .collect();
    let m = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    Ok(slope.abs())
}

fn top_h_nodes(net: &ColocationNetwork, h: usize) -> Vec<UserId> {
    let degrees = net.degrees();
    let mut order: Vec<(usize, UserId)> = net
        .nodes()
        .iter()
        .copied()
        .enumerate()
        .map(|(i, u)| (degrees[i], u))
        .collect();
    // degree descending, ties by ascending user id
    order.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    order.into_iter().take(h).map(|(_, u)| u).collect()
}

fn internal_density(net: &ColocationNetwork, members: &BTreeSet<UserId>) -> Result<f64> {
    let m = members.len();
    if m < 2 {
        return Err(Error::degenerate(
            "density undefined for fewer than two nodes",
        ));
    }
    let inside = net
        .edges()
        .filter(|(a, b)| members.contains(a) && members.contains(b))
        .count();
    Ok(inside as f64 / (m * (m - 1) / 2) as f64)
}

/// Edge density among the `h` highest-degree nodes.
pub fn richclub_density(net: &ColocationNetwork, h: usize) -> Result<f64> {
    if net.node_count() < h {
        return Err(Error::invalid(format!(
            "rich club of {h} nodes on a {}-node network",
            net.node_count()
        )));
    }
    let rich: BTreeSet<UserId> = top_h_nodes(net, h).into_iter().collect();
    internal_density(net, &rich)
}

/// Edge density among everything outside the top-`h` core. Edges with one
/// endpoint in each set count in neither density.
pub fn peripheral_density(net: &ColocationNetwork, h: usize) -> Result<f64> {
    if net.node_count() < h {
        return Err(Error::invalid(format!(
            "peripheral split of {h} nodes on a {}-node network",
            net.node_count()
        )));
    }
    let rich: BTreeSet<UserId> = top_h_nodes(net, h).into_iter().collect();
    let periph: BTreeSet<UserId> = net
        .nodes()
        .iter()
        .copied()
        .filter(|u| !rich.contains(u))
        .collect();
    internal_density(net, &periph)
}

/// Venues ranked by descending visits; ties keep ascending venue id.
pub fn rank_size(counts: &[(VenueId, u64)]) -> Vec<(usize, VenueId, u64)> {
    let mut sorted = counts.to_vec();
    sorted.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, (v, c))| (i + 1, v, c))
        .collect()
}

/// Simulated `(user, venue)` pairs whose venue is outside the user's
/// train-period venue set — the "novel exploration" interactions.
pub fn novel_pairs(
    train: &[VisitEvent],
    simulated: impl IntoIterator<Item = (UserId, VenueId)>,
) -> Vec<(UserId, VenueId)> {
    let mut seen: HashMap<UserId, HashSet<VenueId>> = HashMap::new();
    for e in train {
        seen.entry(e.user).or_default().insert(e.venue);
    }
    simulated
        .into_iter()
        .filter(|(u, v)| seen.get(u).map(|s| !s.contains(v)).unwrap_or(true))
        .collect()
}

/// Attention shares per venue-popularity decile.
#[derive(Clone, Debug, Serialize)]
pub struct DecileReport {
    /// Ten venue groups, ascending train popularity; sizes differ by at
    /// most one with remainders assigned to the lower deciles.
    pub deciles: Vec<Vec<VenueId>>,
    pub train_share: Vec<f64>,
    pub exploration_share: Vec<f64>,
    pub delta: Vec<f64>,
}

/// Compare attention across popularity deciles between the binarized train
/// network and the binarized exploration network.
///
/// `exploration` must already be restricted to novel interactions (see
/// [`novel_pairs`]). Venues with fewer than `min_visitors` unique train
/// visitors are excluded from both networks.
pub fn decile_report(
    train: &[(UserId, VenueId)],
    exploration: &[(UserId, VenueId)],
    min_visitors: u32,
) -> Result<DecileReport> {
    let mut train_visitors: BTreeMap<VenueId, BTreeSet<UserId>> = BTreeMap::new();
    for &(u, v) in train {
        train_visitors.entry(v).or_default().insert(u);
    }
    // ascending popularity, ties by ascending venue id
    let mut eligible: Vec<(VenueId, usize)> = train_visitors
        .iter()
        .map(|(&v, users)| (v, users.len()))
        .filter(|&(_, c)| c as u32 >= min_visitors)
        .collect();
    eligible.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let n = eligible.len();
    if n < 10 {
        return Err(Error::degenerate(format!(
            "decile report needs at least 10 eligible venues, got {n}"
        )));
    }

    let base = n / 10;
    let rem = n % 10;
    let mut deciles: Vec<Vec<VenueId>> = Vec::with_capacity(10);
    let mut cursor = 0usize;
    for g in 0..10 {
        let size = base + if g < rem { 1 } else { 0 };
        deciles.push(
            eligible[cursor..cursor + size]
                .iter()
                .map(|&(v, _)| v)
                .collect(),
        );
        cursor += size;
    }

    let eligible_set: BTreeSet<VenueId> = eligible.iter().map(|&(v, _)| v).collect();
    let mut expl_visitors: BTreeMap<VenueId, BTreeSet<UserId>> = BTreeMap::new();
    for &(u, v) in exploration {
        if eligible_set.contains(&v) {
            expl_visitors.entry(v).or_default().insert(u);
        }
    }

    let train_total: f64 = eligible.iter().map(|&(_, c)| c as f64).sum();
    let expl_total: f64 = expl_visitors.values().map(|s| s.len() as f64).sum();
    if expl_total <= 0.0 {
        return Err(Error::degenerate(
            "exploration network has no interactions on eligible venues",
        ));
    }

    let train_count: BTreeMap<VenueId, usize> = eligible.iter().copied().collect();
    let mut train_share = Vec::with_capacity(10);
    let mut exploration_share = Vec::with_capacity(10);
    let mut delta = Vec::with_capacity(10);
    for group in &deciles {
        let t: f64 = group.iter().map(|v| train_count[v] as f64).sum::<f64>() / train_total;
        let x: f64 = group
            .iter()
            .map(|v| expl_visitors.get(v).map(|s| s.len()).unwrap_or(0) as f64)
            .sum::<f64>()
            / expl_total;
        train_share.push(t);
        exploration_share.push(x);
        delta.push(x - t);
    }

    Ok(DecileReport {
        deciles,
        train_share,
        exploration_share,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ev(user: u32, venue: u32, t: i64) -> VisitEvent {
        VisitEvent {
            user: UserId(user),
            venue: VenueId(venue),
            t,
            tz_offset_min: 0,
        }
    }

    /// Mean-absolute-difference form: `ΣΣ|xi − xj| / (2 n Σx)`.
    pub(super) fn gini_mad_oracle(counts: &[f64]) -> f64 {
        let n = counts.len() as f64;
        let total: f64 = counts.iter().sum();
        let mut mad = 0.0;
        for &a in counts {
            for &b in counts {
                mad += (a - b).abs();
            }
        }
        mad / (2.0 * n * total)
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[5.0, 5.0, 5.0, 5.0]).unwrap(), 0.0);
        let g = gini(&[1.0, 1.0, 8.0]).unwrap();
        assert!((g - 7.0 / 15.0).abs() < 1e-12);
        // single holder of n = 10: G = 1 − 1/n
        let mut v = vec![0.0; 9];
        v.push(1.0);
        assert!((gini(&v).unwrap() - 0.9).abs() < 1e-12);
        // all-zero is undefined
        assert!(gini(&[0.0, 0.0]).is_err());
        assert!(gini(&[]).is_err());
        // n = 1 gives 0
        assert_eq!(gini(&[3.0]).unwrap(), 0.0);
    }

    #[test]
    fn gini_matches_mad_oracle_on_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let n = rng.gen_range(1..40);
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
            if v.iter().sum::<f64>() <= 0.0 {
                continue;
            }
            let a = gini(&v).unwrap();
            let b = gini_mad_oracle(&v);
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn mean_individual_gini_examples() {
        // every user on a single venue → 0
        let visits = vec![ev(0, 0, 1), ev(0, 0, 2), ev(1, 1, 3)];
        assert_eq!(mean_individual_gini(&visits).unwrap(), 0.0);

        // users with count vectors [1,1] and [1,3] → mean(0, 0.25)
        let visits = vec![
            ev(0, 0, 1),
            ev(0, 1, 2),
            ev(1, 2, 3),
            ev(1, 3, 4),
            ev(1, 3, 5),
            ev(1, 3, 6),
        ];
        assert!((mean_individual_gini(&visits).unwrap() - 0.125).abs() < 1e-12);

        assert!(mean_individual_gini(&[]).is_err());
    }

    #[test]
    fn lorenz_examples() {
        // equal counts: diagonal
        let pts = lorenz(&[2.0, 2.0]).unwrap();
        assert_eq!(pts, vec![(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]);

        let pts = lorenz(&[1.0, 1.0, 8.0]).unwrap();
        let expect = [(0.0, 0.0), (1.0 / 3.0, 0.1), (2.0 / 3.0, 0.2), (1.0, 1.0)];
        for (p, e) in pts.iter().zip(expect.iter()) {
            assert!((p.0 - e.0).abs() < 1e-12 && (p.1 - e.1).abs() < 1e-12);
        }

        // degenerate single venue
        assert_eq!(lorenz(&[4.0]).unwrap(), vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn lorenz_below_diagonal_and_area_matches_gini() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<f64> = (0..2000).map(|_| rng.gen_range(0.0..10.0f64).powi(3)).collect();
        let pts = lorenz(&v).unwrap();
        for &(x, y) in &pts {
            assert!(y <= x + 1e-12);
        }
        // trapezoid area deficit ×2 approximates gini
        let mut area = 0.0;
        for w in pts.windows(2) {
            area += (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0;
        }
        let approx = 1.0 - 2.0 * area;
        let exact = gini(&v).unwrap();
        assert!((approx - exact).abs() < 0.01, "{approx} vs {exact}");
    }

    #[test]
    fn colocation_examples() {
        // same venue, same window → edge
        let net = colocation(&[ev(0, 0, 1), ev(1, 0, 3)], &[(0, 7)]);
        assert_eq!(net.node_count(), 2);
        assert!(net.has_edge(UserId(0), UserId(1)));
        assert!(net.witnesses(UserId(0), UserId(1)).is_some());

        // same venue, different windows → no edge
        let net = colocation(&[ev(0, 0, 1), ev(1, 0, 10)], &[(0, 7), (8, 14)]);
        assert_eq!(net.edge_count(), 0);
        assert_eq!(net.node_count(), 2);

        // three users at one venue in one window → triangle
        let net = colocation(&[ev(0, 0, 1), ev(1, 0, 2), ev(2, 0, 3)], &[(0, 7)]);
        assert_eq!(net.edge_count(), 3);
    }

    #[test]
    fn colocation_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n_events = rng.gen_range(0..200);
            let windows: Vec<(i64, i64)> = match rng.gen_range(1..=3) {
                1 => vec![(0, 9)],
                2 => vec![(0, 9), (10, 19)],
                _ => vec![(0, 9), (10, 19), (25, 30)],
            };
            let visits: Vec<VisitEvent> = (0..n_events)
                .map(|_| {
                    ev(
                        rng.gen_range(0..20),
                        rng.gen_range(0..10),
                        rng.gen_range(0..35),
                    )
                })
                .collect();
            let net = colocation(&visits, &windows);

            // brute force over event pairs
            let mut expect: BTreeSet<(UserId, UserId)> = BTreeSet::new();
            let mut expect_nodes: BTreeSet<UserId> = BTreeSet::new();
            for a in &visits {
                for &(t1, t2) in &windows {
                    if a.t >= t1 && a.t <= t2 {
                        expect_nodes.insert(a.user);
                    }
                }
                for b in &visits {
                    if a.user == b.user || a.venue != b.venue {
                        continue;
                    }
                    for &(t1, t2) in &windows {
                        if a.t >= t1 && a.t <= t2 && b.t >= t1 && b.t <= t2 {
                            expect.insert((a.user.min(b.user), a.user.max(b.user)));
                        }
                    }
                }
            }
            let got: BTreeSet<(UserId, UserId)> = net.edges().collect();
            assert_eq!(got, expect);
            let got_nodes: BTreeSet<UserId> = net.nodes().iter().copied().collect();
            assert_eq!(got_nodes, expect_nodes);
        }
    }

    /// Network with P(k) exactly proportional to k^-2 on k in {1, 2, 4, 8}:
    /// 64 nodes of degree 1, 16 of degree 2, 4 of degree 4, 1 of degree 8.
    fn power_law_network() -> ColocationNetwork {
        let mut edges = Vec::new();
        let mut next = 1000u32; // leaf ids, above all hub ids
        let mut leaf = |edges: &mut Vec<(UserId, UserId)>, hub: u32, n: u32| {
            for _ in 0..n {
                edges.push((UserId(hub), UserId(next)));
                next += 1;
            }
        };
        leaf(&mut edges, 0, 8); // one degree-8 hub
        for h in 1..=4 {
            leaf(&mut edges, h, 4); // four degree-4 hubs
        }
        for h in 5..=20 {
            leaf(&mut edges, h, 2); // sixteen degree-2 hubs
        }
        // eight more degree-1 nodes from four isolated edges
        for i in 0..4 {
            edges.push((UserId(500 + 2 * i), UserId(501 + 2 * i)));
        }
        ColocationNetwork::from_edges(Vec::new(), edges)
    }

    #[test]
    fn degree_slope_exact_on_power_law() {
        let net = power_law_network();
        assert_eq!(net.node_count(), 85);
        let alpha = degree_slope(&net).unwrap();
        assert!((alpha - 2.0).abs() < 1e-6, "alpha = {alpha}");
    }

    #[test]
    fn degree_slope_errors_on_uniform_degrees() {
        // a single edge: both nodes have degree 1 → one distinct degree
        let net = ColocationNetwork::from_edges(Vec::new(), vec![(UserId(0), UserId(1))]);
        assert!(degree_slope(&net).is_err());
    }

    #[test]
    fn richclub_and_peripheral_density() {
        // complete graph on 5 nodes → RD = 1 for every h <= 5
        let mut edges = Vec::new();
        for i in 0..5u32 {
            for j in (i + 1)..5 {
                edges.push((UserId(i), UserId(j)));
            }
        }
        let net = ColocationNetwork::from_edges(Vec::new(), edges);
        for h in 2..=5 {
            assert_eq!(richclub_density(&net, h).unwrap(), 1.0);
        }

        // two 2-star hubs sharing no edge: top-2 by degree are the hubs
        let net = ColocationNetwork::from_edges(
            Vec::new(),
            vec![
                (UserId(0), UserId(10)),
                (UserId(0), UserId(11)),
                (UserId(1), UserId(12)),
                (UserId(1), UserId(13)),
            ],
        );
        assert_eq!(richclub_density(&net, 2).unwrap(), 0.0);
        // peripheral nodes (the four leaves) share no edges either
        assert_eq!(peripheral_density(&net, 2).unwrap(), 0.0);

        // h larger than the network errors
        assert!(richclub_density(&net, 7).is_err());
    }

    #[test]
    fn rank_size_sorting_and_ties() {
        let counts = vec![
            (VenueId(0), 3u64),
            (VenueId(1), 1),
            (VenueId(2), 2),
        ];
        let ranked = rank_size(&counts);
        assert_eq!(
            ranked,
            vec![
                (1, VenueId(0), 3),
                (2, VenueId(2), 2),
                (3, VenueId(1), 1)
            ]
        );
        // ties keep ascending venue id
        let ranked = rank_size(&[(VenueId(5), 2), (VenueId(3), 2)]);
        assert_eq!(ranked[0].1, VenueId(3));
        assert_eq!(ranked[1].1, VenueId(5));
    }

    fn pairs(list: &[(u32, u32)]) -> Vec<(UserId, VenueId)> {
        list.iter().map(|&(u, v)| (UserId(u), VenueId(v))).collect()
    }

    #[test]
    fn decile_report_zero_delta_when_identical() {
        // 10 venues, 3 visitors each (just eligible), identical networks
        let mut train = Vec::new();
        for v in 0..10u32 {
            for u in 0..3u32 {
                train.push((100 * v + u, v));
            }
        }
        let train = pairs(&train.iter().map(|&(u, v)| (u, v)).collect::<Vec<_>>());
        let report = decile_report(&train, &train, 3).unwrap();
        assert_eq!(report.deciles.len(), 10);
        for d in &report.delta {
            assert!(d.abs() < 1e-12);
        }
        let t_sum: f64 = report.train_share.iter().sum();
        let x_sum: f64 = report.exploration_share.iter().sum();
        let d_sum: f64 = report.delta.iter().sum();
        assert!((t_sum - 1.0).abs() < 1e-9);
        assert!((x_sum - 1.0).abs() < 1e-9);
        assert!(d_sum.abs() < 1e-9);
    }

    #[test]
    fn decile_report_concentrated_exploration() {
        // 20 venues with increasing popularity; exploration touches only
        // the top-2 venues (the top decile).
        let mut train = Vec::new();
        for v in 0..20u32 {
            for u in 0..(3 + v) {
                train.push((1000 + u, v));
            }
        }
        let train = pairs(&train);
        // top-2 by visitors are venues 18 and 19
        let exploration = pairs(&[(1, 18), (2, 18), (3, 19), (4, 19), (5, 19)]);
        let report = decile_report(&train, &exploration, 3).unwrap();
        assert!((report.exploration_share[9] - 1.0).abs() < 1e-12);
        assert!(report.delta[9] > 0.0);
        for g in 0..9 {
            assert_eq!(report.exploration_share[g], 0.0);
        }
    }

    #[test]
    fn decile_report_errors() {
        // fewer than 10 eligible venues
        let train = pairs(&[(0, 0), (1, 0), (2, 0)]);
        assert!(decile_report(&train, &train, 3).is_err());

        // venues below the visitor floor are excluded from both networks
        let mut t = Vec::new();
        for v in 0..12u32 {
            let visitors = if v < 10 { 3 } else { 1 };
            for u in 0..visitors {
                t.push((100 * v + u, v));
            }
        }
        let train = pairs(&t);
        let report = decile_report(&train, &train, 3).unwrap();
        let all: Vec<VenueId> = report.deciles.iter().flatten().copied().collect();
        assert_eq!(all.len(), 10);
        assert!(!all.contains(&VenueId(10)));
        assert!(!all.contains(&VenueId(11)));
    }

    #[test]
    fn novel_pairs_filters_train_venues() {
        let train = vec![ev(0, 0, 1), ev(0, 1, 2), ev(1, 0, 3)];
        let sim = vec![
            (UserId(0), VenueId(0)), // seen in train
            (UserId(0), VenueId(2)), // novel
            (UserId(1), VenueId(1)), // novel for u1
            (UserId(2), VenueId(0)), // user not in train at all
        ];
        let novel = novel_pairs(&train, sim);
        assert_eq!(
            novel,
            vec![
                (UserId(0), VenueId(2)),
                (UserId(1), VenueId(1)),
                (UserId(2), VenueId(0))
            ]
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// gini(c·x) = gini(x) for c > 0.
            #[test]
            fn gini_scale_invariant(
                v in proptest::collection::vec(0.0f64..1e4, 1..50),
                c in 0.001f64..1e4,
            ) {
                prop_assume!(v.iter().sum::<f64>() > 0.0);
                let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
                let a = gini(&v).unwrap();
                let b = gini(&scaled).unwrap();
                prop_assert!((a - b).abs() < 1e-9);
            }

            /// G stays within [0, 1 − 1/n].
            #[test]
            fn gini_range(v in proptest::collection::vec(0.0f64..1e4, 1..50)) {
                prop_assume!(v.iter().sum::<f64>() > 0.0);
                let g = gini(&v).unwrap();
                let n = v.len() as f64;
                prop_assert!(g >= -1e-12);
                prop_assert!(g <= 1.0 - 1.0 / n + 1e-12);
            }
        }
    }
}
