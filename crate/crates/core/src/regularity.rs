//! Averaged graphs, the two Frieze–Kannan irregularity measures, and
//! refinement along an irregularity witness.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{block_densities, pairs, Equipartition, Graph, VertexSet, WeightedGraph};
use crate::metrics::{cut_max_ascent_witness, cut_max_exact_witness};
use crate::signature::index_of_partition;

/// Which blocks of the partition enter the irregularity sums.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Blocks {
    /// Only pairs in different parts; the averaged graph keeps `G` inside
    /// parts.
    #[default]
    Cross,
    /// Also the diagonal blocks, averaged with the ordered-pair density.
    All,
}

/// `G_A`: cross pairs get `d(V_i, V_j)`, pairs inside a part keep `G`.
pub fn averaged_graph(g: &Graph, a: &Equipartition) -> WeightedGraph {
    averaged_graph_with(g, a, Blocks::Cross)
}

pub fn averaged_graph_with(g: &Graph, a: &Equipartition, blocks: Blocks) -> WeightedGraph {
    let d = block_densities(g, a);
    WeightedGraph::from_fn(g.n(), |u, v| {
        let (i, j) = (a.part_of(u), a.part_of(v));
        if i != j || blocks == Blocks::All {
            d[i][j]
        } else if g.has_edge(u, v) {
            1.0
        } else {
            0.0
        }
    })
    .expect("densities lie in [0, 1]")
}

/// The residual `G − G_A` as a dense row-major matrix with zero diagonal.
fn residual(g: &Graph, a: &Equipartition, blocks: Blocks) -> Vec<f64> {
    let n = g.n();
    let avg = averaged_graph_with(g, a, blocks);
    let mut m = vec![0.0; n * n];
    for (u, v) in pairs(n) {
        let x = if g.has_edge(u, v) { 1.0 } else { 0.0 } - avg.get(u, v);
        m[u * n + v] = x;
        m[v * n + u] = x;
    }
    m
}

/// An irregularity value with its maximising pair `(S, T)`. Values marked
/// inexact are lower bounds from a heuristic search.
#[derive(Clone, Debug, PartialEq)]
pub struct Irregularity {
    pub value: f64,
    pub exact: bool,
    pub witness: (VertexSet, VertexSet),
}

/// Largest order scanned exhaustively by [`fk_irregularity`].
pub const FK_EXACT_CAP: usize = 24;

/// Work budget (subset pairs times parts) for the exhaustive starred scan.
pub const FK_STAR_EXACT_BUDGET: f64 = 5e8;

/// Largest part scanned exhaustively inside the starred search.
pub const PART_SCAN_CAP: usize = 20;

fn mask_set(n: usize, mask: u64) -> VertexSet {
    VertexSet::from_indices(n, (0..n).filter(|&v| mask >> v & 1 == 1)).unwrap()
}

fn bool_set(flags: &[bool]) -> VertexSet {
    VertexSet::from_indices(flags.len(), (0..flags.len()).filter(|&v| flags[v])).unwrap()
}

/// `max_{S,T} |e(S,T) − e_{G_A}(S,T)| / n²`, exhaustive up to
/// [`FK_EXACT_CAP`] vertices and a seeded ascent beyond.
pub fn fk_irregularity(g: &Graph, a: &Equipartition) -> Result<Irregularity> {
    fk_irregularity_with(g, a, Blocks::Cross, 0)
}

pub fn fk_irregularity_with(g: &Graph, a: &Equipartition, blocks: Blocks, seed: u64) -> Result<Irregularity> {
    check_sizes(g, a)?;
    let n = g.n();
    let m = residual(g, a, blocks);
    let norm = (n * n) as f64;
    if n <= FK_EXACT_CAP {
        let (v, s, t) = cut_max_exact_witness(&m, n);
        Ok(Irregularity {
            value: v / norm,
            exact: true,
            witness: (mask_set(n, s), mask_set(n, t)),
        })
    } else {
        let (v, s, t) = cut_max_ascent_witness(&m, n, 32, seed);
        Ok(Irregularity {
            value: v / norm,
            exact: false,
            witness: (bool_set(&s), bool_set(&t)),
        })
    }
}

fn check_sizes(g: &Graph, a: &Equipartition) -> Result<()> {
    if g.n() != a.n() {
        return Err(Error::domain(format!("partition of {} vertices for a graph on {}", a.n(), g.n())));
    }
    Ok(())
}

/// Best `T ⊆ members` for `max_T Σ_i |Σ_{y∈T} c[i][y]|`, the sum skipping
/// row `skip` when given. Returns the value and the chosen members as a mask
/// over `members`.
fn best_block_subset(members: &[usize], c: &[Vec<f64>], skip: Option<usize>) -> (f64, u64) {
    let rows = c.len();
    let mut s = vec![0.0; rows];
    let (mut best, mut best_mask) = (0.0f64, 0u64);
    let mut mask = 0u64;
    for step in 1u64..(1u64 << members.len()) {
        let k = step.trailing_zeros() as usize;
        let y = members[k];
        let sign = if mask >> k & 1 == 1 { -1.0 } else { 1.0 };
        mask ^= 1 << k;
        for (si, ci) in s.iter_mut().zip(c) {
            *si += sign * ci[y];
        }
        let v: f64 = s
            .iter()
            .enumerate()
            .filter(|&(i, _)| Some(i) != skip)
            .map(|(_, x)| x.abs())
            .sum();
        if v > best {
            best = v;
            best_mask = mask;
        }
    }
    (best, best_mask)
}

/// `max_{S,T} (1/n²) Σ_{i,j} |e(S_i, T_j) − d_{ij}|S_i||T_j||` over cross
/// blocks `i ≠ j` (or all blocks under [`Blocks::All`]).
pub fn fk_star_irregularity(g: &Graph, a: &Equipartition) -> Result<Irregularity> {
    fk_star_irregularity_with(g, a, Blocks::Cross, 0)
}

pub fn fk_star_irregularity_with(g: &Graph, a: &Equipartition, blocks: Blocks, seed: u64) -> Result<Irregularity> {
    check_sizes(g, a)?;
    let n = g.n();
    let t = a.t();
    let largest = a.parts().iter().map(Vec::len).max().unwrap();
    if largest > PART_SCAN_CAP {
        return Err(Error::size("starred irregularity (part size)", largest as f64, PART_SCAN_CAP as f64));
    }
    let d = residual(g, a, blocks);
    let skip = |j: usize| if blocks == Blocks::Cross { Some(j) } else { None };
    let work: f64 = 2f64.powi(n as i32) * a.parts().iter().map(|p| 2f64.powi(p.len() as i32)).sum::<f64>() * t as f64;

    // c[i][y] = Σ_{x ∈ S_i} D(x, y)
    let columns_for = |c: &[Vec<f64>]| -> (f64, Vec<u64>) {
        let mut total = 0.0;
        let mut masks = Vec::with_capacity(t);
        for (j, part) in a.parts().iter().enumerate() {
            let (v, m) = best_block_subset(part, c, skip(j));
            total += v;
            masks.push(m);
        }
        (total, masks)
    };
    let expand = |masks: &[u64]| -> VertexSet {
        let mut set = VertexSet::empty(n);
        for (part, &m) in a.parts().iter().zip(masks) {
            for (k, &v) in part.iter().enumerate() {
                if m >> k & 1 == 1 {
                    set.insert(v);
                }
            }
        }
        set
    };
    let norm = (n * n) as f64;

    if work <= FK_STAR_EXACT_BUDGET && n < 64 {
        let mut c = vec![vec![0.0; n]; t];
        let mut rows = 0u64;
        let (mut best, mut best_rows, mut best_cols) = (0.0f64, 0u64, vec![0u64; t]);
        for step in 1u64..(1u64 << n) {
            let x = step.trailing_zeros() as usize;
            let sign = if rows >> x & 1 == 1 { -1.0 } else { 1.0 };
            rows ^= 1 << x;
            let ci = &mut c[a.part_of(x)];
            for (cy, &dv) in ci.iter_mut().zip(&d[x * n..(x + 1) * n]) {
                *cy += sign * dv;
            }
            let (v, masks) = columns_for(&c);
            if v > best {
                best = v;
                best_rows = rows;
                best_cols = masks;
            }
        }
        return Ok(Irregularity {
            value: best / norm,
            exact: true,
            witness: (mask_set(n, best_rows), expand(&best_cols)),
        });
    }

    // block-alternating ascent: each half-step is exact per part
    use rand::Rng as _;
    let mut rng = crate::rng::seeded(seed);
    let mut best = (0.0f64, VertexSet::empty(n), VertexSet::empty(n));
    for _ in 0..32 {
        let mut s_set: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let mut last = f64::NEG_INFINITY;
        loop {
            let mut c = vec![vec![0.0; n]; t];
            for x in (0..n).filter(|&x| s_set[x]) {
                for y in 0..n {
                    c[a.part_of(x)][y] += d[x * n + y];
                }
            }
            let (_, t_masks) = columns_for(&c);
            let t_set = expand(&t_masks);
            // by symmetry of D the row step has the same shape
            let mut r = vec![vec![0.0; n]; t];
            for y in t_set.iter() {
                for x in 0..n {
                    r[a.part_of(y)][x] += d[y * n + x];
                }
            }
            let (v, s_masks) = columns_for(&r);
            let new_s = expand(&s_masks);
            if v <= last + 1e-15 {
                break;
            }
            last = v;
            if v > best.0 {
                best = (v, new_s.clone(), t_set);
            }
            s_set = (0..n).map(|x| new_s.contains(x)).collect();
        }
    }
    Ok(Irregularity {
        value: best.0 / norm,
        exact: false,
        witness: (best.1, best.2),
    })
}

/// One refinement along an irregularity witness.
#[derive(Clone, Debug)]
pub struct RefinementStep {
    pub before: Equipartition,
    pub after: Equipartition,
    pub index_gain: f64,
    pub irregularity: f64,
    pub witness: (VertexSet, VertexSet),
}

#[derive(Clone, Debug)]
pub enum RefineOutcome {
    AlreadyRegular { irregularity: f64 },
    Refined(RefinementStep),
}

/// Refines `a` along an exact starred-irregularity witness when the
/// irregularity exceeds `eps`.
///
/// Each part is cut into the atoms of `S` and `T` and then rebalanced into
/// `m` near-equal pieces, `m` the largest atom count (at most the smallest
/// part size), by moving minimum-index vertices from oversized pieces.
pub fn fk_refine(g: &Graph, a: &Equipartition, eps: f64) -> Result<RefineOutcome> {
    let irr = fk_star_irregularity(g, a)?;
    if !irr.exact {
        return Err(Error::size(
            "exact witness search (subset work)",
            2f64.powi(g.n() as i32),
            FK_STAR_EXACT_BUDGET,
        ));
    }
    if irr.value <= eps {
        return Ok(RefineOutcome::AlreadyRegular { irregularity: irr.value });
    }
    let (s, t) = &irr.witness;
    let atoms: Vec<Vec<Vec<usize>>> = a
        .parts()
        .iter()
        .map(|part| {
            let mut cells = vec![Vec::new(); 4];
            for &v in part {
                let k = (!s.contains(v) as usize) * 2 + (!t.contains(v) as usize);
                cells[k].push(v);
            }
            cells.retain(|c| !c.is_empty());
            cells
        })
        .collect();
    let smallest = a.parts().iter().map(Vec::len).min().unwrap();
    let m = atoms.iter().map(Vec::len).max().unwrap().min(smallest);

    let mut pieces: Vec<Vec<usize>> = Vec::with_capacity(a.t() * m);
    for (part, mut cells) in a.parts().iter().zip(atoms) {
        while cells.len() > m {
            let extra = cells.pop().unwrap();
            cells.last_mut().unwrap().extend(extra);
        }
        cells.resize(m, Vec::new());
        for c in cells.iter_mut() {
            c.sort_unstable();
        }
        let (q, r) = (part.len() / m, part.len() % m);
        let target: Vec<usize> = (0..m).map(|k| if k < r { q + 1 } else { q }).collect();
        // match larger atoms to larger targets
        cells.sort_by(|x, y| y.len().cmp(&x.len()).then(x.first().cmp(&y.first())));
        let mut spill = Vec::new();
        for (c, &want) in cells.iter_mut().zip(&target) {
            while c.len() > want {
                spill.push(c.remove(0));
            }
        }
        spill.sort_unstable();
        let mut spill = spill.into_iter();
        for (c, &want) in cells.iter_mut().zip(&target) {
            while c.len() < want {
                c.push(spill.next().expect("sizes balance"));
            }
        }
        pieces.extend(cells);
    }
    let after = Equipartition::from_parts(g.n(), &pieces)?.normalized();
    let gain = index_of_partition(g, &after) - index_of_partition(g, a);
    Ok(RefineOutcome::Refined(RefinementStep {
        before: a.clone(),
        after,
        index_gain: gain,
        irregularity: irr.value,
        witness: irr.witness,
    }))
}

/// The starred sum `(1/n²) Σ |e(S_i, T_j) − d_{ij}|S_i||T_j||` for one
/// given pair `(S, T)`.
pub fn starred_sum(g: &Graph, a: &Equipartition, s: &VertexSet, t: &VertexSet, blocks: Blocks) -> f64 {
    let n = g.n();
    let d = block_densities(g, a);
    let k = a.t();
    let mut e = vec![vec![0.0; k]; k];
    let mut sz_s = vec![0usize; k];
    let mut sz_t = vec![0usize; k];
    for x in s.iter() {
        sz_s[a.part_of(x)] += 1;
        for y in t.iter() {
            if g.has_edge(x, y) {
                e[a.part_of(x)][a.part_of(y)] += 1.0;
            }
        }
    }
    for y in t.iter() {
        sz_t[a.part_of(y)] += 1;
    }
    let mut total = 0.0;
    for i in 0..k {
        for j in 0..k {
            if i == j && blocks == Blocks::Cross {
                continue;
            }
            // diagonal blocks: pairs x = y are absent from both terms
            let mut cells = (sz_s[i] * sz_t[j]) as f64;
            if i == j {
                cells -= s.iter().filter(|&x| a.part_of(x) == i && t.contains(x)).count() as f64;
            }
            total += (e[i][j] - d[i][j] * cells).abs();
        }
    }
    total / (n * n) as f64
}
