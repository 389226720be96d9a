//! Maximum partition index, finality, the improvement iteration and the
//! signature search over a partition-property oracle.

use std::collections::{BTreeMap, HashSet};

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{
    block_edges, canonical_equipartition, enumerate_equipartitions, equipartition_count, pair_count, pairs,
    Equipartition, Graph,
};
use crate::signature::{
    enumerate_property_grid, grid_levels, index_of_partition, index_of_property, property_distance, GridMode,
    PartitionProperty, Signature, PROPERTY_DISTANCE_CAP,
};

/// Parameters of the final-partition search. `growth` is the multiplier `g`
/// in `f(x) = g·x`; `t_cap` bounds the sizes the search may return.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FinalSearchParams {
    pub k: usize,
    pub gamma: f64,
    pub growth: usize,
    pub mu: f64,
    pub t_cap: usize,
}

impl FinalSearchParams {
    /// Parameters with the largest grid quantum `μ = 1/L ≤ γ/(48 g² T²)`.
    pub fn with_sandwich_mu(k: usize, gamma: f64, growth: usize, t_cap: usize) -> Result<Self> {
        let bound = gamma / (48.0 * (growth * growth * t_cap * t_cap) as f64);
        let l = (1.0 / bound).ceil();
        let p = FinalSearchParams {
            k,
            gamma,
            growth,
            mu: 1.0 / l,
            t_cap,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::domain("k must be positive"));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::domain(format!("γ = {} must be positive", self.gamma)));
        }
        if self.growth == 0 {
            return Err(Error::domain("growth must be at least 1"));
        }
        if self.t_cap < self.k {
            return Err(Error::domain(format!("t_cap = {} is below k = {}", self.t_cap, self.k)));
        }
        grid_levels(self.mu)?;
        Ok(())
    }

    /// The window `[t, g·t] ∩ [1, n]`.
    pub fn window(&self, t: usize, n: usize) -> std::ops::RangeInclusive<usize> {
        t.max(1)..=(self.growth * t).min(n)
    }
}

fn check_scan(n: usize, s: usize) -> Result<()> {
    if s == 0 || s > n {
        return Err(Error::domain(format!("{s} parts for {n} vertices")));
    }
    let count = equipartition_count(n, s);
    if count > PROPERTY_DISTANCE_CAP {
        return Err(Error::size("index maximisation (equipartitions)", count, PROPERTY_DISTANCE_CAP));
    }
    Ok(())
}

/// `M_G(s)`: the largest index over equipartitions into `s` parts.
pub fn max_index(g: &Graph, s: usize) -> Result<f64> {
    Ok(best_partition(g, s)?.0)
}

/// The maximising equipartition, first in enumeration order among ties.
pub fn best_partition(g: &Graph, s: usize) -> Result<(f64, Equipartition)> {
    check_scan(g.n(), s)?;
    let mut best: Option<(f64, Equipartition)> = None;
    for a in enumerate_equipartitions(g.n(), s)? {
        let v = index_of_partition(g, &a);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, a));
        }
    }
    Ok(best.expect("at least one equipartition exists"))
}

/// No equipartition with between `t` and `g·t` parts has index at least
/// `ind(A) + γ`.
pub fn is_final(g: &Graph, a: &Equipartition, params: &FinalSearchParams) -> Result<bool> {
    is_final_at(g, a, params.growth, params.gamma)
}

pub fn is_final_at(g: &Graph, a: &Equipartition, growth: usize, gamma: f64) -> Result<bool> {
    if a.n() != g.n() {
        return Err(Error::domain("partition and graph sizes differ"));
    }
    let base = index_of_partition(g, a);
    let hi = (growth * a.t()).min(g.n());
    for s in a.t()..=hi {
        if max_index(g, s)? >= base + gamma - 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct FinalRun {
    pub partition: Equipartition,
    pub index: f64,
    pub rounds: usize,
}

/// Starts from the canonical `k`-partition and moves to the best partition
/// in the window while that gains at least `γ/2`. Ties prefer fewer parts.
pub fn find_final(g: &Graph, params: &FinalSearchParams) -> Result<FinalRun> {
    params.validate()?;
    let n = g.n();
    let mut a = canonical_equipartition(n, params.k.min(n))?;
    let mut index = index_of_partition(g, &a);
    let mut rounds = 0;
    loop {
        let mut best: Option<(f64, Equipartition)> = None;
        for s in params.window(a.t(), n) {
            let (v, b) = best_partition(g, s)?;
            if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                best = Some((v, b));
            }
        }
        match best {
            Some((v, b)) if v >= index + params.gamma / 2.0 - 1e-12 => {
                a = b;
                index = v;
                rounds += 1;
            }
            _ => break,
        }
    }
    Ok(FinalRun {
        partition: a,
        index,
        rounds,
    })
}

/// Query accounting for an oracle. `edge` and `vertex` count distinct pairs
/// and vertices inspected; `properties` counts answered questions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryCounts {
    pub edge: u64,
    pub vertex: u64,
    pub properties: u64,
}

/// The best accepted slab property at one size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlabChoice {
    pub property: PartitionProperty,
    pub index: f64,
}

/// Integer grid levels of a property with bounds on multiples of `1/l`.
fn levels(values: &[f64], l: usize) -> Option<Vec<usize>> {
    values
        .iter()
        .map(|&x| {
            let a = (x * l as f64).round();
            ((x * l as f64 - a).abs() < 1e-6).then_some(a as usize)
        })
        .collect()
}

/// Answers whether a graph is close to a partition property.
pub trait PartitionOracle {
    /// The grid quantum this oracle tests at.
    fn mu(&self) -> f64;

    fn accepts(&mut self, g: &Graph, pi: &PartitionProperty) -> Result<bool>;

    fn queries(&self) -> QueryCounts;

    /// The accepted slab property of size `s` with the largest index, ties
    /// broken by the lexicographically least `α`.
    fn best_accepted_slab(&mut self, g: &Graph, s: usize) -> Result<Option<SlabChoice>> {
        let l = grid_levels(self.mu())?;
        let mut best: Option<(usize, PartitionProperty)> = None;
        for pi in enumerate_property_grid(s, self.mu(), GridMode::Slab)? {
            let key: usize = levels(&pi.alpha, l).expect("grid levels").iter().map(|a| a * a).sum();
            if best.as_ref().is_some_and(|(b, _)| key <= *b) {
                continue;
            }
            if self.accepts(g, &pi)? {
                best = Some((key, pi));
            }
        }
        Ok(best.map(|(_, property)| SlabChoice {
            index: index_of_property(&property),
            property,
        }))
    }
}

/// Cost of one cross pair scaled by `l`: `l·p·max(0, α − d, d − β)` with
/// `α = a/l`, `β = b/l`, `d = e/p`.
#[inline]
fn scaled_cost(e: usize, p: usize, a: usize, b: usize, l: usize) -> i64 {
    let (e, p, a, b, l) = (e as i64, p as i64, a as i64, b as i64, l as i64);
    (a * p - e * l).max(e * l - b * p).max(0)
}

/// Accepts exactly the properties at normalised edit distance below `μ`.
#[derive(Clone, Debug)]
pub struct ExactOracle {
    mu: f64,
    levels: usize,
    /// Route [`PartitionOracle::best_accepted_slab`] through the generic
    /// grid enumeration instead of the per-partition knapsack.
    pub enumerate_grid: bool,
    counts: QueryCounts,
    seen_graph: Option<usize>,
}

impl ExactOracle {
    pub fn new(mu: f64) -> Result<Self> {
        Ok(ExactOracle {
            mu,
            levels: grid_levels(mu)?,
            enumerate_grid: false,
            counts: QueryCounts::default(),
            seen_graph: None,
        })
    }

    fn touch(&mut self, g: &Graph) {
        // the exact oracle reads every pair once
        if self.seen_graph != Some(g.n()) {
            self.seen_graph = Some(g.n());
            self.counts.edge = pair_count(g.n()).max(1) as u64;
            self.counts.vertex = g.n() as u64;
        }
    }

    /// Minimum integer cost over labelled equipartitions, stopping early
    /// once below `budget`.
    fn min_scaled_cost(&self, g: &Graph, s: usize, lo: &[usize], hi: &[usize], budget: i64) -> Result<i64> {
        check_scan(g.n(), s)?;
        let l = self.levels;
        let mut best = i64::MAX;
        for a in enumerate_equipartitions(g.n(), s)? {
            let e = block_edges(g, &a);
            let sizes = a.sizes();
            for perm in (0..s).permutations(s) {
                let mut cost = 0i64;
                for (k, (i, j)) in pairs(s).enumerate() {
                    let (x, y) = (perm[i], perm[j]);
                    cost += scaled_cost(e[x][y], sizes[x] * sizes[y], lo[k], hi[k], l);
                    if cost >= best {
                        break;
                    }
                }
                best = best.min(cost);
                if best < budget {
                    return Ok(best);
                }
            }
        }
        Ok(best)
    }
}

/// One cross pair seen by the slab knapsack: `p` cells, `e` edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Cell {
    p: usize,
    e: usize,
}

/// Best `Σ a_k²` over slab levels with `Σ cost ≤ budget`, and the
/// lexicographically least level vector attaining it.
fn slab_knapsack(cells: &[Cell], l: usize, budget: usize) -> (u64, Vec<usize>) {
    let m = cells.len();
    // options per pair: (level, cost)
    let opts: Vec<Vec<(usize, usize)>> = cells
        .iter()
        .map(|c| {
            let free = (c.e * l / c.p).min(l);
            let mut o = Vec::new();
            for a in free..=l {
                let cost = scaled_cost(c.e, c.p, a, (a + 1).min(l), l) as usize;
                if cost > budget {
                    break;
                }
                o.push((a, cost));
            }
            o
        })
        .collect();
    // suffix tables: best[k][b] = best value of pairs k.. with budget b
    let mut best = vec![vec![0u64; budget + 1]; m + 1];
    for k in (0..m).rev() {
        for b in 0..=budget {
            best[k][b] = opts[k]
                .iter()
                .filter(|&&(_, c)| c <= b)
                .map(|&(a, c)| (a * a) as u64 + best[k + 1][b - c])
                .max()
                .unwrap_or(0);
        }
    }
    let total = best[0][budget];
    let mut levels = Vec::with_capacity(m);
    let mut b = budget;
    for k in 0..m {
        let &(a, c) = opts[k]
            .iter()
            .filter(|&&(_, c)| c <= b)
            .find(|&&(a, c)| (a * a) as u64 + best[k + 1][b - c] == best[k][b])
            .expect("the optimum is attained");
        levels.push(a);
        b -= c;
    }
    (total, levels)
}

fn cells_of(g: &Graph, a: &Equipartition, perm: &[usize]) -> Vec<Cell> {
    let e = block_edges(g, a);
    let sizes = a.sizes();
    pairs(a.t())
        .map(|(i, j)| {
            let (x, y) = (perm[i], perm[j]);
            Cell {
                p: sizes[x] * sizes[y],
                e: e[x][y],
            }
        })
        .collect()
}

impl PartitionOracle for ExactOracle {
    fn mu(&self) -> f64 {
        self.mu
    }

    fn accepts(&mut self, g: &Graph, pi: &PartitionProperty) -> Result<bool> {
        self.touch(g);
        self.counts.properties += 1;
        let n2 = (g.n() * g.n()) as i64;
        match (levels(&pi.alpha, self.levels), levels(&pi.beta, self.levels)) {
            (Some(lo), Some(hi)) => Ok(self.min_scaled_cost(g, pi.s, &lo, &hi, n2)? < n2),
            _ => Ok(property_distance(g, pi)? < self.mu),
        }
    }

    fn queries(&self) -> QueryCounts {
        self.counts
    }

    fn best_accepted_slab(&mut self, g: &Graph, s: usize) -> Result<Option<SlabChoice>> {
        if self.enumerate_grid {
            let mut generic = GridRoute(self);
            return generic.best_accepted_slab(g, s);
        }
        self.touch(g);
        let n = g.n();
        check_scan(n, s)?;
        let l = self.levels;
        let budget = n * n - 1;
        let identity: Vec<usize> = (0..s).collect();

        // first pass: the optimum over unlabelled partitions
        let mut best_value = 0u64;
        let mut optimal: HashSet<Vec<Cell>> = HashSet::new();
        for a in enumerate_equipartitions(n, s)? {
            let cells = cells_of(g, &a, &identity);
            let free: u64 = cells.iter().map(|c| ((c.e * l / c.p).min(l) as u64).pow(2)).sum();
            let top = cells.iter().map(|c| (c.e * l / c.p).min(l)).max().unwrap_or(0) as u64;
            let reach = cells.iter().map(|c| budget / c.p + 1).sum::<usize>() as u64;
            if !optimal.is_empty() && free + 2 * top * reach + reach * reach < best_value {
                continue;
            }
            let (v, _) = slab_knapsack(&cells, l, budget);
            if optimal.is_empty() || v > best_value {
                best_value = v;
                optimal.clear();
                optimal.insert(cells);
            } else if v == best_value {
                optimal.insert(cells);
            }
        }
        self.counts.properties += 1;

        // second pass: lexicographically least α over all labellings
        let mut best_alpha: Option<Vec<usize>> = None;
        let mut tried: HashSet<Vec<Cell>> = HashSet::new();
        for cells in &optimal {
            for perm in (0..s).permutations(s) {
                let permuted: Vec<Cell> = pairs(s)
                    .map(|(i, j)| {
                        let (x, y) = (perm[i].min(perm[j]), perm[i].max(perm[j]));
                        cells[crate::graph::pair_index(s, x, y)]
                    })
                    .collect();
                if !tried.insert(permuted.clone()) {
                    continue;
                }
                let (v, alpha) = slab_knapsack(&permuted, l, budget);
                debug_assert_eq!(v, best_value);
                if best_alpha.as_ref().is_none_or(|b| alpha < *b) {
                    best_alpha = Some(alpha);
                }
            }
        }
        let alpha = match best_alpha {
            Some(a) => a,
            None if s == 1 => Vec::new(),
            None => return Ok(None),
        };
        let lf = l as f64;
        let property = PartitionProperty::new(
            s,
            alpha.iter().map(|&a| a as f64 / lf).collect(),
            alpha.iter().map(|&a| (a + 1).min(l) as f64 / lf).collect(),
        )?;
        Ok(Some(SlabChoice {
            index: index_of_property(&property),
            property,
        }))
    }
}

/// Forces the trait's default grid route for an oracle.
struct GridRoute<'a, O: PartitionOracle>(&'a mut O);

impl<O: PartitionOracle> PartitionOracle for GridRoute<'_, O> {
    fn mu(&self) -> f64 {
        self.0.mu()
    }

    fn accepts(&mut self, g: &Graph, pi: &PartitionProperty) -> Result<bool> {
        self.0.accepts(g, pi)
    }

    fn queries(&self) -> QueryCounts {
        self.0.queries()
    }
}

/// Amplified sampling tester: each of `reps` rounds samples `q_prime`
/// vertices and checks whether the induced graph is `μ/2`-close to the
/// property; the majority decides.
#[derive(Clone, Debug)]
pub struct SampledOracle {
    mu: f64,
    pub q_prime: usize,
    pub reps: usize,
    seed: u64,
    counts: QueryCounts,
    seen_pairs: HashSet<(usize, usize)>,
    seen_vertices: HashSet<usize>,
}

impl SampledOracle {
    pub const DEFAULT_Q: usize = 60;

    pub fn new(mu: f64, q_prime: usize, reps: usize, seed: u64) -> Result<Self> {
        grid_levels(mu)?;
        if q_prime == 0 || reps == 0 {
            return Err(Error::domain("sample size and repetitions must be positive"));
        }
        Ok(SampledOracle {
            mu,
            q_prime,
            reps,
            seed,
            counts: QueryCounts::default(),
            seen_pairs: HashSet::new(),
            seen_vertices: HashSet::new(),
        })
    }

    /// `10·⌈log₂ b⌉` rounds for `b` properties (at least 10).
    pub fn default_reps(b: usize) -> usize {
        10 * (b.max(2) as f64).log2().ceil() as usize
    }
}

impl PartitionOracle for SampledOracle {
    fn mu(&self) -> f64 {
        self.mu
    }

    fn accepts(&mut self, g: &Graph, pi: &PartitionProperty) -> Result<bool> {
        let n = g.n();
        let q = self.q_prime.min(n);
        let l = grid_levels(self.mu)?;
        let mut coords = vec![pi.s as u64];
        for (a, b) in pi.alpha.iter().zip(&pi.beta) {
            coords.push((a * l as f64).round() as u64);
            coords.push((b * l as f64).round() as u64);
        }
        let mut rng = crate::rng::seeded(crate::rng::derive(self.seed, &coords));
        let mut yes = 0;
        for _ in 0..self.reps {
            let mut sample = rand::seq::index::sample(&mut rng, n, q).into_vec();
            sample.sort_unstable();
            for (x, &u) in sample.iter().enumerate() {
                self.seen_vertices.insert(u);
                for &v in &sample[x + 1..] {
                    self.seen_pairs.insert((u, v));
                }
            }
            let h = g.induced(&sample);
            if pi.s <= q && property_distance(&h, pi)? <= self.mu / 2.0 {
                yes += 1;
            }
        }
        self.counts.properties += 1;
        self.counts.edge = self.seen_pairs.len() as u64;
        self.counts.vertex = self.seen_vertices.len() as u64;
        Ok(2 * yes > self.reps)
    }

    fn queries(&self) -> QueryCounts {
        self.counts
    }
}

/// Result of the signature search.
#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub s_star: usize,
    pub property: PartitionProperty,
    pub signature: Signature,
    /// `M(s)` for every scanned size; `None` when nothing was accepted.
    pub m_values: BTreeMap<usize, Option<f64>>,
    pub queries: QueryCounts,
}

/// Computes `M(s)`, the largest index of an accepted slab property, for
/// `s ∈ [k, min(g·T, n)]`, then returns the accepted property at the
/// smallest `s⋆ ≤ T` with `M(s′) ≤ M(s⋆) + 3γ/4` for all `s⋆ < s′ ≤ g·s⋆`.
pub fn signature_search<O: PartitionOracle>(g: &Graph, params: &FinalSearchParams, oracle: &mut O) -> Result<SearchOutcome> {
    params.validate()?;
    if (oracle.mu() - params.mu).abs() > 1e-12 {
        return Err(Error::domain(format!(
            "oracle tests at μ = {} but the search uses μ = {}",
            oracle.mu(),
            params.mu
        )));
    }
    let n = g.n();
    if params.k > n {
        return Err(Error::domain(format!("k = {} exceeds n = {n}", params.k)));
    }
    let top = (params.growth * params.t_cap).min(n);
    let mut choices: BTreeMap<usize, Option<SlabChoice>> = BTreeMap::new();
    for s in params.k..=top {
        choices.insert(s, oracle.best_accepted_slab(g, s)?);
    }
    let m = |s: usize| choices[&s].as_ref().map(|c| c.index);
    for s in params.k..=params.t_cap.min(n) {
        let Some(ms) = m(s) else { continue };
        let hi = (params.growth * s).min(n);
        if (s + 1..=hi).all(|sp| m(sp).is_none_or(|v| v <= ms + 0.75 * params.gamma + 1e-12)) {
            let choice = choices[&s].clone().expect("checked above");
            return Ok(SearchOutcome {
                s_star: s,
                signature: choice.property.alpha_signature(),
                property: choice.property,
                m_values: choices.keys().map(|&s| (s, m(s))).collect(),
                queries: oracle.queries(),
            });
        }
    }
    Err(Error::SearchFailed(format!(
        "no size in [{}, {}] is stable within 3γ/4",
        params.k,
        params.t_cap.min(n)
    )))
}
