//! Signatures, partition indices, extensions, partition-property grids and
//! the exact distance to a partition property.

use std::fmt::Write as _;
use std::path::Path;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    block_densities, block_edges, enumerate_equipartitions, equipartition_count, is_refinement,
    pair_count, pair_index, pairs, Equipartition, Graph, PairWeights,
};

/// A density `η_{i,j} ∈ [0, 1]` for every pair of parts `i < j`, stored in
/// lexicographic pair order. Viewed as a weighted graph on `t` vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    t: usize,
    eta: Vec<f64>,
}

impl Signature {
    pub fn new(t: usize, eta: Vec<f64>) -> Result<Self> {
        if t == 0 {
            return Err(Error::domain("a signature needs at least one part"));
        }
        if eta.len() != pair_count(t) {
            return Err(Error::domain(format!("{} densities for {t} parts", eta.len())));
        }
        if let Some(x) = eta.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::domain(format!("density {x} outside [0, 1]")));
        }
        Ok(Signature { t, eta })
    }

    pub fn constant(t: usize, x: f64) -> Result<Self> {
        Self::new(t, vec![x; pair_count(t)])
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// `η_{i,j}` for 0-based parts; symmetric, 0 on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.eta[pair_index(self.t, i, j)],
            std::cmp::Ordering::Greater => self.eta[pair_index(self.t, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn set(&mut self, i: usize, j: usize, x: f64) -> Result<()> {
        if i == j || i.max(j) >= self.t || !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("cannot set η({i}, {j}) = {x}")));
        }
        let (a, b) = (i.min(j), i.max(j));
        self.eta[pair_index(self.t, a, b)] = x;
        Ok(())
    }

    /// `(1/t²) Σ_{i<j} η²`.
    pub fn index(&self) -> f64 {
        self.eta.iter().map(|x| x * x).sum::<f64>() / (self.t * self.t) as f64
    }
}

impl PairWeights for Signature {
    fn order(&self) -> usize {
        self.t
    }

    fn weight(&self, u: usize, v: usize) -> f64 {
        self.get(u, v)
    }
}

/// Parses `t` followed by `C(t,2)` lines `i j eta` with `1 ≤ i < j ≤ t`.
pub fn parse_signature(text: &str) -> Result<Signature> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let t = crate::graph::parse_numbers(hl, header, 1)?[0];
    if t == 0 {
        return Err(Error::parse(hl, "a signature needs at least one part"));
    }
    let mut eta = vec![None; pair_count(t)];
    for (ln, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(ln, format!("expected 3 fields, found {}", fields.len())));
        }
        let ij = crate::graph::parse_numbers(ln, &fields[..2].join(" "), 2)?;
        let (i, j) = (ij[0], ij[1]);
        if !(1 <= i && i < j && j <= t) {
            return Err(Error::parse(ln, format!("pair ({i}, {j}) violates 1 ≤ i < j ≤ {t}")));
        }
        let x: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(ln, format!("not a number: {:?}", fields[2])))?;
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::parse(ln, format!("density {x} outside [0, 1]")));
        }
        let k = pair_index(t, i - 1, j - 1);
        if eta[k].replace(x).is_some() {
            return Err(Error::parse(ln, format!("duplicate pair ({i}, {j})")));
        }
    }
    let eta: Option<Vec<f64>> = eta.into_iter().collect();
    let eta = eta.ok_or_else(|| Error::parse(hl, format!("expected {} pairs", pair_count(t))))?;
    Signature::new(t, eta)
}

pub fn write_signature(s: &Signature) -> String {
    let mut out = format!("{}\n", s.t);
    for (i, j) in pairs(s.t) {
        writeln!(out, "{} {} {}", i + 1, j + 1, s.get(i, j)).unwrap();
    }
    out
}

pub fn read_signature(path: impl AsRef<Path>) -> Result<Signature> {
    parse_signature(&std::fs::read_to_string(path)?)
}

/// A partition property: `s` parts and bounds `α ≤ β` on every pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionProperty {
    pub s: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl PartitionProperty {
    pub fn new(s: usize, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if s == 0 || alpha.len() != pair_count(s) || beta.len() != pair_count(s) {
            return Err(Error::domain(format!("bounds do not match {s} parts")));
        }
        for (a, b) in alpha.iter().zip(&beta) {
            if !(0.0 <= *a && a <= b && *b <= 1.0) {
                return Err(Error::domain(format!("bounds [{a}, {b}] are not nested in [0, 1]")));
            }
        }
        Ok(PartitionProperty { s, alpha, beta })
    }

    /// The lower bounds read as a signature.
    pub fn alpha_signature(&self) -> Signature {
        Signature::new(self.s, self.alpha.clone()).expect("bounds lie in [0, 1]")
    }
}

/// `(1/t²) Σ_{i<j} d²(V_i, V_j)`.
pub fn index_of_partition(g: &Graph, a: &Equipartition) -> f64 {
    let d = block_densities(g, a);
    let t = a.t();
    pairs(t).map(|(i, j)| d[i][j] * d[i][j]).sum::<f64>() / (t * t) as f64
}

/// `(1/s²) Σ_{i<j} α²`.
pub fn index_of_property(pi: &PartitionProperty) -> f64 {
    pi.alpha.iter().map(|a| a * a).sum::<f64>() / (pi.s * pi.s) as f64
}

/// The exact pair densities of `a`.
pub fn zero_signature(g: &Graph, a: &Equipartition) -> Signature {
    let d = block_densities(g, a);
    let eta = pairs(a.t()).map(|(i, j)| d[i][j]).collect();
    Signature::new(a.t(), eta).expect("densities lie in [0, 1]")
}

/// Number of pairs with `|d(V_i, V_j) − η_{i,j}| > γ`.
pub fn signature_violations(s: &Signature, a: &Equipartition, g: &Graph, gamma: f64) -> Result<usize> {
    if s.t() != a.t() || a.n() != g.n() {
        return Err(Error::domain(format!(
            "signature on {} parts against a {}-part partition of {} vertices (graph has {})",
            s.t(),
            a.t(),
            a.n(),
            g.n()
        )));
    }
    let d = block_densities(g, a);
    Ok(pairs(a.t())
        .filter(|&(i, j)| (d[i][j] - s.get(i, j)).abs() > gamma + 1e-12)
        .count())
}

/// Whether all but at most `ε·C(t,2)` pairs are within `γ` of `η`.
pub fn signature_check(s: &Signature, a: &Equipartition, g: &Graph, gamma: f64, eps: f64) -> Result<bool> {
    let bad = signature_violations(s, a, g, gamma)?;
    Ok(bad as f64 <= eps * pair_count(a.t()) as f64 + 1e-9)
}

/// Extends `s` (a signature for `a`) to the refinement `b`: pairs of `b`
/// from different parts of `a` inherit the density between those parts,
/// pairs from the same part get 0.
pub fn extend_signature(s: &Signature, a: &Equipartition, b: &Equipartition) -> Result<Signature> {
    if s.t() != a.t() {
        return Err(Error::domain("signature size does not match the partition"));
    }
    if !is_refinement(b, a)? {
        return Err(Error::domain("the target partition is not a refinement"));
    }
    let origin: Vec<usize> = b.parts().iter().map(|p| a.part_of(p[0])).collect();
    Ok(extend_by_origin(s, &origin))
}

/// Extension along an explicit origin map from new parts to old parts.
pub fn extend_by_origin(s: &Signature, origin: &[usize]) -> Signature {
    let m = origin.len();
    let eta = pairs(m)
        .map(|(i, j)| {
            if origin[i] == origin[j] {
                0.0
            } else {
                s.get(origin[i], origin[j])
            }
        })
        .collect();
    Signature::new(m, eta).expect("inherited densities lie in [0, 1]")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridMode {
    /// Every `α ≤ β` on the grid.
    Full,
    /// `β = α + μ`, capped at 1.
    Slab,
}

/// Largest grid the enumerator will stream.
pub const GRID_CAP: f64 = 1e7;

/// `1/μ` as an integer, or a domain error if it is not one.
pub fn grid_levels(mu: f64) -> Result<usize> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::domain(format!("grid quantum {mu} outside (0, 1]")));
    }
    let l = (1.0 / mu).round();
    if ((1.0 / mu) - l).abs() > 1e-9 * l.max(1.0) {
        return Err(Error::domain(format!("1/μ = {} is not an integer", 1.0 / mu)));
    }
    Ok(l as usize)
}

/// Number of properties [`enumerate_property_grid`] would produce.
pub fn property_grid_size(s: usize, levels: usize, mode: GridMode) -> f64 {
    let per_pair = match mode {
        GridMode::Full => ((levels + 1) * (levels + 2) / 2) as f64,
        GridMode::Slab => (levels + 1) as f64,
    };
    per_pair.powi(pair_count(s) as i32)
}

/// Streams the grid of partition properties on `s` parts with bounds on
/// multiples of `μ`, ordered lexicographically by the sequence of per-pair
/// `(α, β)`. In slab mode this is the lexicographic order of `α`.
pub fn enumerate_property_grid(s: usize, mu: f64, mode: GridMode) -> Result<impl Iterator<Item = PartitionProperty>> {
    if s == 0 {
        return Err(Error::domain("a partition property needs at least one part"));
    }
    let l = grid_levels(mu)?;
    let count = property_grid_size(s, l, mode);
    if count > GRID_CAP {
        return Err(Error::size("partition-property grid", count, GRID_CAP));
    }
    let options: Vec<(usize, usize)> = match mode {
        GridMode::Full => (0..=l).flat_map(|a| (a..=l).map(move |b| (a, b))).collect(),
        GridMode::Slab => (0..=l).map(|a| (a, (a + 1).min(l))).collect(),
    };
    let m = pair_count(s);
    let mut digits = vec![0usize; m];
    let mut done = false;
    let lf = l as f64;
    Ok(std::iter::from_fn(move || {
        if done {
            return None;
        }
        let alpha = digits.iter().map(|&d| options[d].0 as f64 / lf).collect();
        let beta = digits.iter().map(|&d| options[d].1 as f64 / lf).collect();
        let item = PartitionProperty { s, alpha, beta };
        // odometer, last pair fastest
        done = true;
        for k in (0..m).rev() {
            if digits[k] + 1 < options.len() {
                digits[k] += 1;
                done = false;
                break;
            }
            digits[k] = 0;
        }
        Some(item)
    }))
}

/// Largest number of equipartitions [`property_distance`] will scan.
pub const PROPERTY_DISTANCE_CAP: f64 = 2e6;

/// Cost in `[0, 1]` per cross pair: how far `d` lies outside `[α, β]`.
#[inline]
fn excess(d: f64, lo: f64, hi: f64) -> f64 {
    (lo - d).max(d - hi).max(0.0)
}

/// Minimum over labelled equipartitions into `π.s` parts of
/// `(1/n²) Σ_{i<j} |V_i||V_j| · max(0, α − d, d − β)`, the normalised
/// number of cross-pair edits needed to satisfy `π`.
pub fn property_distance(g: &Graph, pi: &PartitionProperty) -> Result<f64> {
    let (n, s) = (g.n(), pi.s);
    if s > n {
        return Err(Error::domain(format!("{s} parts for {n} vertices")));
    }
    let count = equipartition_count(n, s);
    if count > PROPERTY_DISTANCE_CAP {
        return Err(Error::size("property distance (equipartitions)", count, PROPERTY_DISTANCE_CAP));
    }
    let mut best = f64::INFINITY;
    for a in enumerate_equipartitions(n, s)? {
        let e = block_edges(g, &a);
        let sizes = a.sizes();
        for perm in (0..s).permutations(s) {
            // part perm[i] plays the role of V_i
            let mut cost = 0.0;
            for (k, (i, j)) in pairs(s).enumerate() {
                let (pi_, pj) = (perm[i], perm[j]);
                let p = (sizes[pi_] * sizes[pj]) as f64;
                cost += p * excess(e[pi_][pj] as f64 / p, pi.alpha[k], pi.beta[k]);
                if cost >= best {
                    break;
                }
            }
            if cost < best {
                best = cost;
                if best == 0.0 {
                    return Ok(0.0);
                }
            }
        }
    }
    Ok(best / (n * n) as f64)
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::{canonical_equipartition, Equipartition};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Refining each part of a divisible partition into `r` equal pieces
        /// never lowers the index.
        #[test]
        fn refinement_index_monotone(seed in any::<u64>(), t in 1usize..4, r in 1usize..4, q in 1usize..4) {
            let mut rng = crate::rng::seeded(seed);
            let n = t * r * q;
            let g = gnp(n, 0.5, &mut rng);
            let a = random_equipartition(n, t, &mut rng);
            let mut fine = Vec::new();
            for part in a.parts() {
                for chunk in part.chunks(q) {
                    fine.push(chunk.to_vec());
                }
            }
            let b = Equipartition::from_parts(n, &fine).unwrap();
            prop_assert!(is_refinement(&b, &a).unwrap());
            prop_assert!(index_of_partition(&g, &b) >= index_of_partition(&g, &a) - 1e-12);
        }

        #[test]
        fn zero_signature_extends_consistently(seed in any::<u64>()) {
            let mut rng = crate::rng::seeded(seed);
            let g = gnp(8, 0.5, &mut rng);
            let a = canonical_equipartition(8, 2).unwrap();
            let b = canonical_equipartition(8, 4).unwrap();
            let ext = extend_signature(&zero_signature(&g, &a), &a, &b).unwrap();
            let zb = zero_signature(&g, &b);
            let da = zero_signature(&g, &a);
            for (i, j) in pairs(4) {
                let (oi, oj) = (i / 2, j / 2);
                if oi != oj {
                    prop_assert_eq!(ext.get(i, j), da.get(oi, oj));
                    // averaging: the coarse density is the mean of the fine ones
                    let mean = (0..2).flat_map(|x| (0..2).map(move |y| (2 * oi + x, 2 * oj + y)))
                        .map(|(x, y)| zb.get(x, y)).sum::<f64>() / 4.0;
                    prop_assert!((mean - ext.get(i, j)).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn zero_distance_iff_some_partition_fits(seed in any::<u64>()) {
            let mut rng = crate::rng::seeded(seed);
            let g = gnp(6, 0.5, &mut rng);
            let pi = enumerate_property_grid(2, 0.5, GridMode::Slab).unwrap().nth((seed % 3) as usize).unwrap();
            let fits = enumerate_equipartitions(6, 2).unwrap().any(|a| {
                let d = zero_signature(&g, &a).get(0, 1);
                pi.alpha[0] <= d && d <= pi.beta[0]
            });
            prop_assert_eq!(property_distance(&g, &pi).unwrap() == 0.0, fits);
        }
    }
}
