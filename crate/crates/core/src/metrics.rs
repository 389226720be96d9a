//! `d₁`, the cut distance `d_□`, and variation distance between
//! distributions over labelled graphs.

use std::collections::BTreeMap;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{pair_count, pairs, PairWeights};

/// Above this order the exact cut distance refuses to run.
pub const EXACT_CAP: usize = 16;

fn same_order<A: PairWeights + ?Sized, B: PairWeights + ?Sized>(a: &A, b: &B) -> Result<usize> {
    if a.order() != b.order() {
        return Err(Error::domain(format!(
            "weighted graphs on {} and {} vertices",
            a.order(),
            b.order()
        )));
    }
    Ok(a.order())
}

/// `(1/n²) Σ_{i<j} |R(i,j) − R′(i,j)|`.
pub fn d1<A: PairWeights + ?Sized, B: PairWeights + ?Sized>(r: &A, rp: &B) -> Result<f64> {
    let n = same_order(r, rp)?;
    let total: f64 = pairs(n)
        .map(|(i, j)| (r.weight(i, j) - rp.weight(i, j)).abs())
        .sum();
    Ok(total / (n * n) as f64)
}

/// A cut-distance value together with whether it was computed exactly.
/// Heuristic values are lower bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutEstimate {
    pub value: f64,
    pub exact: bool,
}

#[derive(Clone, Copy, Debug)]
pub enum CutMode {
    Exact,
    /// Alternating ascent from `starts` random Boolean row vectors.
    Heuristic { starts: usize, seed: u64 },
}

impl CutMode {
    pub fn heuristic(seed: u64) -> Self {
        CutMode::Heuristic { starts: 32, seed }
    }
}

/// Exact `d_□(R, R′)` over pairs `i < j`. Fails with a size error above
/// [`EXACT_CAP`].
pub fn d_box<A: PairWeights + ?Sized, B: PairWeights + ?Sized>(r: &A, rp: &B) -> Result<f64> {
    Ok(d_box_with(r, rp, CutMode::Exact)?.value)
}

pub fn d_box_with<A: PairWeights + ?Sized, B: PairWeights + ?Sized>(
    r: &A,
    rp: &B,
    mode: CutMode,
) -> Result<CutEstimate> {
    let n = same_order(r, rp)?;
    let mut m = vec![0.0; n * n];
    for (i, j) in pairs(n) {
        m[i * n + j] = r.weight(i, j) - rp.weight(i, j);
    }
    cut_value(&m, n, mode)
}

/// The same maximisation with the sum taken over all ordered pairs `x ≠ y`.
pub fn d_box_ordered<A: PairWeights + ?Sized, B: PairWeights + ?Sized>(
    r: &A,
    rp: &B,
    mode: CutMode,
) -> Result<CutEstimate> {
    let n = same_order(r, rp)?;
    let mut m = vec![0.0; n * n];
    for (i, j) in pairs(n) {
        let d = r.weight(i, j) - rp.weight(i, j);
        m[i * n + j] = d;
        m[j * n + i] = d;
    }
    cut_value(&m, n, mode)
}

/// `max_{S,T} |Σ_{x∈S, y∈T} m(x,y)| / n²` for an `n × n` row-major matrix.
pub(crate) fn cut_value(m: &[f64], n: usize, mode: CutMode) -> Result<CutEstimate> {
    let norm = (n * n) as f64;
    match mode {
        CutMode::Exact => {
            if n > EXACT_CAP {
                return Err(Error::size("exact cut distance (vertices)", n as f64, EXACT_CAP as f64));
            }
            Ok(CutEstimate {
                value: cut_max_exact(m, n) / norm,
                exact: true,
            })
        }
        CutMode::Heuristic { starts, seed } => Ok(CutEstimate {
            value: cut_max_ascent(m, n, starts, seed) / norm,
            exact: false,
        }),
    }
}

/// Gray-code scan over row subsets, keeping the column sums current.
pub(crate) fn cut_max_exact(m: &[f64], n: usize) -> f64 {
    cut_max_exact_witness(m, n).0
}

/// As [`cut_max_exact`], also returning a maximising row set `S` and column
/// set `T` as bitmasks (the first maximiser in scan order).
pub(crate) fn cut_max_exact_witness(m: &[f64], n: usize) -> (f64, u64, u64) {
    let mut c = vec![0.0; n];
    let (mut best, mut best_rows) = (0.0f64, 0u64);
    let mut rows = 0u64;
    let mut best_cols = 0u64;
    for step in 1u64..(1u64 << n) {
        let i = step.trailing_zeros() as usize;
        let sign = if rows >> i & 1 == 1 { -1.0 } else { 1.0 };
        rows ^= 1 << i;
        let row = &m[i * n..(i + 1) * n];
        for (cj, &x) in c.iter_mut().zip(row) {
            *cj += sign * x;
        }
        let pos: f64 = c.iter().filter(|&&x| x > 0.0).sum();
        let neg: f64 = -c.iter().filter(|&&x| x < 0.0).sum::<f64>();
        let (v, s) = if pos >= neg { (pos, 1.0) } else { (neg, -1.0) };
        if v > best {
            best = v;
            best_rows = rows;
            best_cols = (0..n)
                .filter(|&j| c[j] * s > 0.0)
                .fold(0u64, |acc, j| acc | 1 << j);
        }
    }
    (best, best_rows, best_cols)
}

/// Alternates between the optimal columns for fixed rows and the optimal
/// rows for fixed columns, for both signs, from seeded random starts.
pub(crate) fn cut_max_ascent(m: &[f64], n: usize, starts: usize, seed: u64) -> f64 {
    cut_max_ascent_witness(m, n, starts, seed).0
}

pub(crate) fn cut_max_ascent_witness(m: &[f64], n: usize, starts: usize, seed: u64) -> (f64, Vec<bool>, Vec<bool>) {
    let mut rng = crate::rng::seeded(seed);
    let mut best = (0.0f64, vec![false; n], vec![false; n]);
    for _ in 0..starts.max(1) {
        let init: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        for sign in [1.0, -1.0] {
            let mut rows = init.clone();
            let mut last = f64::NEG_INFINITY;
            loop {
                let cols: Vec<bool> = (0..n)
                    .map(|j| sign * (0..n).filter(|&i| rows[i]).map(|i| m[i * n + j]).sum::<f64>() > 0.0)
                    .collect();
                let row_sums: Vec<f64> = (0..n)
                    .map(|i| sign * (0..n).filter(|&j| cols[j]).map(|j| m[i * n + j]).sum::<f64>())
                    .collect();
                let next: Vec<bool> = row_sums.iter().map(|&s| s > 0.0).collect();
                let value: f64 = row_sums.iter().filter(|&&s| s > 0.0).sum();
                if value <= last + 1e-15 {
                    break;
                }
                last = value;
                if value > best.0 {
                    best = (value, next.clone(), cols);
                }
                rows = next;
            }
        }
    }
    best
}

/// A probability distribution over labelled graphs on `q` vertices, keyed
/// by the pair bitmask (pairs in lexicographic order).
#[derive(Clone, Debug, PartialEq)]
pub struct GraphDistribution {
    pub q: usize,
    pub probs: BTreeMap<u64, f64>,
}

impl GraphDistribution {
    pub fn new(q: usize, probs: BTreeMap<u64, f64>) -> Result<Self> {
        if pair_count(q) > 63 {
            return Err(Error::domain(format!("q = {q} is too large for a pair bitmask")));
        }
        let limit = 1u64 << pair_count(q);
        if let Some((&k, &p)) = probs.iter().find(|&(&k, &p)| k >= limit || p < 0.0) {
            return Err(Error::domain(format!("invalid entry {k} ↦ {p}")));
        }
        let d = GraphDistribution { q, probs };
        if (d.total_mass() - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("total mass {} is not 1", d.total_mass())));
        }
        Ok(d)
    }

    /// The law of a random graph with independent pairs, pair `k` present
    /// with probability `p[k]`.
    pub fn product(q: usize, p: &[f64]) -> Result<Self> {
        let m = pair_count(q);
        if p.len() != m {
            return Err(Error::domain(format!("{} pair probabilities for q = {q}", p.len())));
        }
        if m > 24 {
            return Err(Error::size("product distribution support", (1u64 << m.min(63)) as f64, (1u64 << 24) as f64));
        }
        let mut probs = BTreeMap::new();
        for mask in 0..(1u64 << m) {
            let w: f64 = (0..m)
                .map(|k| if mask >> k & 1 == 1 { p[k] } else { 1.0 - p[k] })
                .product();
            if w > 0.0 {
                probs.insert(mask, w);
            }
        }
        Self::new(q, probs)
    }

    pub fn prob(&self, mask: u64) -> f64 {
        self.probs.get(&mask).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Mass of the graphs accepted by `event`.
    pub fn event_prob(&self, event: impl Fn(u64) -> bool) -> f64 {
        self.probs.iter().filter(|(&k, _)| event(k)).map(|(_, &p)| p).sum()
    }
}

/// `(1/2) Σ_H |μ(H) − ν(H)|`.
pub fn variation_distance(mu: &GraphDistribution, nu: &GraphDistribution) -> Result<f64> {
    if mu.q != nu.q {
        return Err(Error::domain(format!("distributions on {} and {} vertices", mu.q, nu.q)));
    }
    let keys: std::collections::BTreeSet<u64> = mu.probs.keys().chain(nu.probs.keys()).copied().collect();
    Ok(keys.iter().map(|&k| (mu.prob(k) - nu.prob(k)).abs()).sum::<f64>() / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;

    fn two_pair(n: usize, pairs: &[((usize, usize), f64)]) -> (WeightedGraph, WeightedGraph) {
        let r = WeightedGraph::new(n);
        let mut rp = WeightedGraph::new(n);
        let mut r2 = r.clone();
        for &((i, j), d) in pairs {
            if d >= 0.0 {
                rp.set(i, j, d).unwrap();
            } else {
                r2.set(i, j, -d).unwrap();
            }
        }
        (rp, r2)
    }

    /// Reference value by scanning every Boolean `(α, β)`.
    fn d_box_full(r: &WeightedGraph, rp: &WeightedGraph) -> f64 {
        let n = r.n();
        let mut best = 0.0f64;
        for a in 0u32..(1 << n) {
            for b in 0u32..(1 << n) {
                let mut s = 0.0;
                for (i, j) in pairs(n) {
                    if a >> i & 1 == 1 && b >> j & 1 == 1 {
                        s += r.get(i, j) - rp.get(i, j);
                    }
                }
                best = best.max(s.abs());
            }
        }
        best / (n * n) as f64
    }

    fn random_pair(n: usize, rng: &mut crate::rng::Rng) -> (WeightedGraph, WeightedGraph) {
        let r = WeightedGraph::from_fn(n, |_, _| rng.gen::<f64>()).unwrap();
        let rp = WeightedGraph::from_fn(n, |_, _| rng.gen::<f64>()).unwrap();
        (r, rp)
    }

    #[test]
    fn d1_examples() {
        let (r, rp) = random_pair(5, &mut crate::rng::seeded(1));
        assert_eq!(d1(&r, &r).unwrap(), 0.0);
        assert!(d1(&r, &rp).unwrap() > 0.0);
        let (a, b) = two_pair(2, &[((0, 1), 0.5)]);
        assert_eq!(d1(&a, &b).unwrap(), 0.125);
        let (a, b) = two_pair(4, &[((0, 1), 0.5), ((2, 3), 0.5)]);
        assert_eq!(d1(&a, &b).unwrap(), 0.0625);
        assert!(d1(&WeightedGraph::new(3), &WeightedGraph::new(4)).is_err());
    }

    #[test]
    fn d_box_examples() {
        let (r, _) = random_pair(6, &mut crate::rng::seeded(2));
        assert_eq!(d_box(&r, &r).unwrap(), 0.0);
        let (a, b) = two_pair(2, &[((0, 1), 0.5)]);
        assert_eq!(d_box(&a, &b).unwrap(), 0.125);
        // +0.5 on (0,1), −0.5 on (2,3)
        let mut a = WeightedGraph::new(4);
        let mut b = WeightedGraph::new(4);
        a.set(0, 1, 0.5).unwrap();
        b.set(2, 3, 0.5).unwrap();
        assert!((d_box(&a, &b).unwrap() - 0.03125).abs() < 1e-15);
        assert!((d_box_full(&a, &b) - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn d_box_matches_full_enumeration() {
        let mut rng = crate::rng::seeded(3);
        for n in 1..=7 {
            for _ in 0..5 {
                let (r, rp) = random_pair(n, &mut rng);
                let fast = d_box(&r, &rp).unwrap();
                assert!((fast - d_box_full(&r, &rp)).abs() < 1e-12);
                assert!(fast <= d1(&r, &rp).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn d_box_cap_and_heuristic() {
        let (r, rp) = random_pair(EXACT_CAP + 1, &mut crate::rng::seeded(4));
        assert!(d_box(&r, &rp).unwrap_err().is_size());
        let est = d_box_with(&r, &rp, CutMode::heuristic(9)).unwrap();
        assert!(!est.exact && est.value > 0.0);
        let (r, rp) = random_pair(10, &mut crate::rng::seeded(5));
        let exact = d_box(&r, &rp).unwrap();
        let heur = d_box_with(&r, &rp, CutMode::heuristic(9)).unwrap().value;
        assert!(heur <= exact + 1e-12);
        assert!(heur >= 0.8 * exact, "heuristic {heur} vs exact {exact}");
    }

    #[test]
    fn variation_distance_examples() {
        let edge = GraphDistribution::new(2, BTreeMap::from([(1, 1.0)])).unwrap();
        let none = GraphDistribution::new(2, BTreeMap::from([(0, 1.0)])).unwrap();
        let half = GraphDistribution::product(2, &[0.5]).unwrap();
        assert_eq!(variation_distance(&edge, &edge).unwrap(), 0.0);
        assert_eq!(variation_distance(&edge, &none).unwrap(), 1.0);
        assert_eq!(variation_distance(&edge, &half).unwrap(), 0.5);
        let q3 = GraphDistribution::product(3, &[0.5; 3]).unwrap();
        assert!(variation_distance(&edge, &q3).is_err());
        assert!(GraphDistribution::new(2, BTreeMap::from([(1, 0.5)])).is_err());
    }

    #[test]
    fn events_are_bounded_by_variation_distance() {
        let mut rng = crate::rng::seeded(6);
        for _ in 0..50 {
            let p: Vec<f64> = (0..6).map(|_| rng.gen()).collect();
            let r: Vec<f64> = (0..6).map(|_| rng.gen()).collect();
            let mu = GraphDistribution::product(4, &p).unwrap();
            let nu = GraphDistribution::product(4, &r).unwrap();
            let tv = variation_distance(&mu, &nu).unwrap();
            for _ in 0..20 {
                let salt: u64 = rng.gen();
                let ev = |k: u64| crate::rng::derive(salt, &[k]) & 1 == 1;
                assert!((mu.event_prob(ev) - nu.event_prob(ev)).abs() <= tv + 1e-12);
            }
        }
    }
}
