//! Induced homomorphism densities, q-statistics and perceived q-statistics.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{pair_count, pair_index, pairs, Graph, PairWeights};
use crate::metrics::GraphDistribution;

/// A labelled graph on `q` vertices as a bitmask over its pairs in
/// lexicographic order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabeledGraphCode {
    pub q: usize,
    pub mask: u64,
}

impl LabeledGraphCode {
    pub fn new(q: usize, mask: u64) -> Result<Self> {
        if q == 0 || pair_count(q) > 63 || mask >> pair_count(q) != 0 {
            return Err(Error::domain(format!("mask {mask} is not a labelled graph on {q} vertices")));
        }
        Ok(LabeledGraphCode { q, mask })
    }

    pub fn of(g: &Graph) -> Self {
        LabeledGraphCode {
            q: g.n(),
            mask: g.pair_mask(),
        }
    }

    pub fn graph(&self) -> Graph {
        Graph::from_pair_mask(self.q, self.mask)
    }

    /// Every labelled graph on `q` vertices.
    pub fn all(q: usize) -> impl Iterator<Item = LabeledGraphCode> {
        (0..(1u64 << pair_count(q))).map(move |mask| LabeledGraphCode { q, mask })
    }
}

/// Exact-versus-sampled switch shared by the statistics in this module.
#[derive(Clone, Copy, Debug)]
pub struct StatConfig {
    /// Largest number of map or tuple evaluations done exhaustively.
    pub exact_limit: f64,
    /// Sample count once the exhaustive route is too large.
    pub samples: usize,
    pub seed: u64,
}

impl Default for StatConfig {
    fn default() -> Self {
        StatConfig {
            exact_limit: 1e8,
            samples: 200_000,
            seed: 0x5eed,
        }
    }
}

/// A density together with its additive 95% Chernoff radius (0 when exact).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub radius: f64,
    pub exact: bool,
}

/// Two-sided 95% Hoeffding radius for the mean of `m` draws in `[0, 1]`.
pub fn chernoff_radius(m: usize) -> f64 {
    ((2.0f64 / 0.05).ln() / (2.0 * m as f64)).sqrt()
}

/// Weight contributed by assigning the `a`-th vertex of `f` to `v`, given
/// the images of the earlier vertices.
#[inline]
fn step_weight<W: PairWeights + ?Sized>(f: &Graph, r: &W, image: &[usize], v: usize) -> f64 {
    let a = image.len();
    let mut w = 1.0;
    for (b, &u) in image.iter().enumerate() {
        let x = if u == v { 0.0 } else { r.weight(u, v) };
        w *= if f.has_edge(a, b) { x } else { 1.0 - x };
        if w == 0.0 {
            break;
        }
    }
    w
}

fn map_weight<W: PairWeights + ?Sized>(f: &Graph, r: &W, image: &[usize], injective: bool) -> f64 {
    let mut w = 1.0;
    for (i, j) in pairs(image.len()) {
        let (u, v) = (image[i], image[j]);
        if u == v && injective {
            return 0.0;
        }
        let x = if u == v { 0.0 } else { r.weight(u, v) };
        w *= if f.has_edge(i, j) { x } else { 1.0 - x };
    }
    w
}

fn dfs<W: PairWeights + ?Sized>(f: &Graph, r: &W, injective: bool, image: &mut Vec<usize>, acc: f64) -> f64 {
    if image.len() == f.n() {
        return acc;
    }
    let mut total = 0.0;
    for v in 0..r.order() {
        if injective && image.contains(&v) {
            continue;
        }
        let w = step_weight(f, r, image, v);
        if w == 0.0 {
            continue;
        }
        image.push(v);
        total += dfs(f, r, injective, image, acc * w);
        image.pop();
    }
    total
}

fn ind_generic<W: PairWeights + ?Sized>(f: &Graph, r: &W, injective: bool, cfg: &StatConfig) -> Estimate {
    let (h, k) = (f.n(), r.order());
    if injective && h > k {
        return Estimate {
            value: 0.0,
            radius: 0.0,
            exact: true,
        };
    }
    let maps = (k as f64).powi(h as i32);
    if maps <= cfg.exact_limit {
        let total = dfs(f, r, injective, &mut Vec::with_capacity(h), 1.0);
        return Estimate {
            value: total / maps,
            radius: 0.0,
            exact: true,
        };
    }
    let mut rng = crate::rng::seeded(cfg.seed);
    let mut image = vec![0; h];
    let mut total = 0.0;
    for _ in 0..cfg.samples {
        for x in image.iter_mut() {
            *x = rng.gen_range(0..k);
        }
        total += map_weight(f, r, &image, injective);
    }
    Estimate {
        value: total / cfg.samples as f64,
        radius: chernoff_radius(cfg.samples),
        exact: false,
    }
}

/// `ind(F, R)`: the average over all `k^h` maps `V(F) → V(R)` of the
/// induced weight of the map, non-injective maps scoring 0.
pub fn ind_induced<W: PairWeights + ?Sized>(f: &Graph, r: &W) -> f64 {
    ind_induced_with(f, r, &StatConfig::default()).value
}

pub fn ind_induced_with<W: PairWeights + ?Sized>(f: &Graph, r: &W, cfg: &StatConfig) -> Estimate {
    ind_generic(f, r, true, cfg)
}

/// Like [`ind_induced`] but every map counts, with `R(v, v) = 0`.
pub fn ind_prime<W: PairWeights + ?Sized>(f: &Graph, r: &W) -> f64 {
    ind_prime_with(f, r, &StatConfig::default()).value
}

pub fn ind_prime_with<W: PairWeights + ?Sized>(f: &Graph, r: &W, cfg: &StatConfig) -> Estimate {
    ind_generic(f, r, false, cfg)
}

fn falling(n: usize, q: usize) -> f64 {
    (0..q).map(|i| (n - i) as f64).product()
}

fn tuple_mask(g: &Graph, tuple: &[usize]) -> u64 {
    let q = tuple.len();
    let mut mask = 0u64;
    for (a, b) in pairs(q) {
        if g.has_edge(tuple[a], tuple[b]) {
            mask |= 1 << pair_index(q, a, b);
        }
    }
    mask
}

fn ordered_tuples(n: usize, q: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(n: usize, q: usize, cur: &mut Vec<usize>, used: &mut [bool], visit: &mut dyn FnMut(&[usize])) {
        if cur.len() == q {
            visit(cur);
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(n, q, cur, used, visit);
                cur.pop();
                used[v] = false;
            }
        }
    }
    rec(n, q, &mut Vec::with_capacity(q), &mut vec![false; n], &mut visit);
}

/// Law of the labelled subgraph induced on `q` distinct vertices drawn in
/// order uniformly at random.
pub fn q_statistic(g: &Graph, q: usize) -> Result<GraphDistribution> {
    Ok(q_statistic_with(g, q, &StatConfig::default())?.0)
}

/// As [`q_statistic`]; the flag reports whether the result is exact.
pub fn q_statistic_with(g: &Graph, q: usize, cfg: &StatConfig) -> Result<(GraphDistribution, bool)> {
    let n = g.n();
    if q == 0 || q > n {
        return Err(Error::domain(format!("q = {q} for a graph on {n} vertices")));
    }
    if pair_count(q) > 63 {
        return Err(Error::domain(format!("q = {q} is too large for a pair bitmask")));
    }
    let mut counts: BTreeMap<u64, f64> = BTreeMap::new();
    let tuples = falling(n, q);
    if tuples <= cfg.exact_limit {
        ordered_tuples(n, q, |t| *counts.entry(tuple_mask(g, t)).or_default() += 1.0);
        for c in counts.values_mut() {
            *c /= tuples;
        }
        return Ok((GraphDistribution::new(q, counts)?, true));
    }
    let mut rng = crate::rng::seeded(cfg.seed);
    for _ in 0..cfg.samples {
        let t = rand::seq::index::sample(&mut rng, n, q).into_vec();
        *counts.entry(tuple_mask(g, &t)).or_default() += 1.0;
    }
    for c in counts.values_mut() {
        *c /= cfg.samples as f64;
    }
    Ok((GraphDistribution::new(q, counts)?, false))
}

/// The law of the graph obtained by picking distinct indices
/// `i₁, …, i_q` of `s` uniformly and joining `a, b` independently with
/// probability `s(i_a, i_b)`.
pub fn perceived_q_statistic<W: PairWeights + ?Sized>(s: &W, q: usize) -> Result<GraphDistribution> {
    let t = s.order();
    if q == 0 || q > t {
        return Err(Error::domain(format!("q = {q} for a signature on {t} parts")));
    }
    let m = pair_count(q);
    let work = falling(t, q) * (1u64 << m.min(62)) as f64;
    if m > 24 || work > StatConfig::default().exact_limit {
        return Err(Error::size("perceived statistic (sequences × graphs)", work, StatConfig::default().exact_limit));
    }
    let seqs = falling(t, q);
    let mut probs: BTreeMap<u64, f64> = BTreeMap::new();
    ordered_tuples(t, q, |seq| {
        let p: Vec<f64> = pairs(q).map(|(a, b)| s.weight(seq[a], seq[b])).collect();
        for mask in 0..(1u64 << m) {
            let w: f64 = p
                .iter()
                .enumerate()
                .map(|(k, &x)| if mask >> k & 1 == 1 { x } else { 1.0 - x })
                .product();
            if w > 0.0 {
                *probs.entry(mask).or_default() += w / seqs;
            }
        }
    });
    GraphDistribution::new(q, probs)
}
