//! Graph properties, the exhaustive distance oracle and the canonical
//! sampling tester.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph};

/// Largest order the distance oracle scans by default.
pub const ORACLE_MAX_N: usize = 7;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Kind {
    Edgeless,
    TriangleFree,
    Bipartite,
    P4Free,
    CliqueFree(usize),
    /// Members listed as `(n, pair mask)`.
    Table(BTreeSet<(usize, u64)>),
}

/// A named graph property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertySpec {
    name: String,
    hereditary: bool,
    kind: Kind,
}

impl fmt::Display for PropertySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl PropertySpec {
    pub fn edgeless() -> Self {
        Self::builtin("edgeless", Kind::Edgeless)
    }

    pub fn triangle_free() -> Self {
        Self::builtin("triangle-free", Kind::TriangleFree)
    }

    pub fn bipartite() -> Self {
        Self::builtin("bipartite", Kind::Bipartite)
    }

    /// No induced path on four vertices.
    pub fn p4_free() -> Self {
        Self::builtin("p4-free", Kind::P4Free)
    }

    pub fn clique_free(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::domain("clique-free needs k ≥ 2"));
        }
        Ok(PropertySpec {
            name: format!("{k}-clique-free"),
            hereditary: true,
            kind: Kind::CliqueFree(k),
        })
    }

    fn builtin(name: &str, kind: Kind) -> Self {
        PropertySpec {
            name: name.to_string(),
            hereditary: true,
            kind,
        }
    }

    /// Resolves a built-in name (`edgeless`, `triangle-free`, `bipartite`,
    /// `p4-free`, `K-clique-free`) or `table:PATH`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "edgeless" => Ok(Self::edgeless()),
            "triangle-free" => Ok(Self::triangle_free()),
            "bipartite" => Ok(Self::bipartite()),
            "p4-free" => Ok(Self::p4_free()),
            _ => {
                if let Some(path) = name.strip_prefix("table:") {
                    return Self::read_table(path);
                }
                if let Some(k) = name.strip_suffix("-clique-free") {
                    let k = k
                        .parse()
                        .map_err(|_| Error::Usage(format!("bad clique size in {name:?}")))?;
                    return Self::clique_free(k);
                }
                Err(Error::Usage(format!("unknown property {name:?}")))
            }
        }
    }

    /// Truth-table format: a first line `hereditary true|false`, then one
    /// member per line as `n mask`, the mask in pair order. Graphs not
    /// listed are not in the property.
    pub fn parse_table(name: &str, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (no, head) = lines.next().ok_or_else(|| Error::parse(1, "empty property table"))?;
        let hereditary = match head.split_whitespace().collect::<Vec<_>>()[..] {
            ["hereditary", "true"] => true,
            ["hereditary", "false"] => false,
            _ => return Err(Error::parse(no, "expected `hereditary true|false`")),
        };
        let mut members = BTreeSet::new();
        for (no, line) in lines {
            let f = crate::graph::parse_numbers(no, line, 2)?;
            let (n, mask) = (f[0], f[1] as u64);
            if n == 0 || n > ORACLE_MAX_N + 1 {
                return Err(Error::parse(no, format!("table order {n} outside 1..=8")));
            }
            if pair_count(n) < 64 && mask >> pair_count(n) != 0 {
                return Err(Error::parse(no, format!("mask {mask} has bits beyond C({n},2)")));
            }
            members.insert((n, mask));
        }
        Ok(PropertySpec {
            name: name.to_string(),
            hereditary,
            kind: Kind::Table(members),
        })
    }

    pub fn read_table(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse_table(&format!("table:{}", path.display()), &text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn hereditary(&self) -> bool {
        self.hereditary
    }

    pub fn holds(&self, g: &Graph) -> bool {
        match &self.kind {
            Kind::Edgeless => g.edge_count() == 0,
            Kind::TriangleFree => !has_clique(g, 3),
            Kind::CliqueFree(k) => !has_clique(g, *k),
            Kind::Bipartite => is_bipartite(g),
            Kind::P4Free => !has_induced_p4(g),
            Kind::Table(members) => g.n() <= ORACLE_MAX_N + 1 && members.contains(&(g.n(), g.pair_mask())),
        }
    }
}

fn has_clique(g: &Graph, k: usize) -> bool {
    fn grow(g: &Graph, clique: &mut Vec<usize>, k: usize, from: usize) -> bool {
        if clique.len() == k {
            return true;
        }
        for v in from..g.n() {
            if clique.iter().all(|&u| g.has_edge(u, v)) {
                clique.push(v);
                if grow(g, clique, k, v + 1) {
                    return true;
                }
                clique.pop();
            }
        }
        false
    }
    grow(g, &mut Vec::with_capacity(k), k, 0)
}

fn is_bipartite(g: &Graph) -> bool {
    let mut colour = vec![None; g.n()];
    for start in 0..g.n() {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(false);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            let c = colour[u].unwrap();
            for v in g.neighbors(u) {
                match colour[v] {
                    None => {
                        colour[v] = Some(!c);
                        stack.push(v);
                    }
                    Some(cv) if cv == c => return false,
                    _ => {}
                }
            }
        }
    }
    true
}

fn has_induced_p4(g: &Graph) -> bool {
    let n = g.n();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let q = [a, b, c, d];
                    let mut deg = [0; 4];
                    let mut m = 0;
                    for i in 0..4 {
                        for j in i + 1..4 {
                            if g.has_edge(q[i], q[j]) {
                                deg[i] += 1;
                                deg[j] += 1;
                                m += 1;
                            }
                        }
                    }
                    deg.sort_unstable();
                    if m == 3 && deg == [1, 1, 2, 2] {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Exact `dist_P(G)`: the fewest pair flips, over `n²`, reaching a member.
pub fn dist_oracle(g: &Graph, property: &PropertySpec) -> Result<f64> {
    dist_oracle_with(g, property, false)
}

/// As [`dist_oracle`]; `allow_eight` lifts the order limit to 8.
pub fn dist_oracle_with(g: &Graph, property: &PropertySpec, allow_eight: bool) -> Result<f64> {
    let n = g.n();
    let cap = if allow_eight { ORACLE_MAX_N + 1 } else { ORACLE_MAX_N };
    if n > cap {
        return Err(Error::size("distance oracle (graphs 2^C(n,2))", 2f64.powi(pair_count(n) as i32), 2f64.powi(pair_count(cap) as i32)));
    }
    if property.holds(g) {
        return Ok(0.0);
    }
    let m = pair_count(n);
    let pair_at: Vec<(usize, usize)> = crate::graph::pairs(n).collect();
    // Gray-code walk over all graphs, flipping one pair per step
    let mut h = g.clone();
    let mut diff = 0u32;
    let mut best = u32::MAX;
    for step in 1u64..(1u64 << m) {
        let bit = step.trailing_zeros() as usize;
        let (u, v) = pair_at[bit];
        h.toggle_edge(u, v);
        diff = (diff as i64 + if h.has_edge(u, v) == g.has_edge(u, v) { -1 } else { 1 }) as u32;
        if diff < best && property.holds(&h) {
            best = diff;
            if best == 1 {
                break;
            }
        }
    }
    if best == u32::MAX {
        return Err(Error::domain(format!("no graph on {n} vertices is {property}")));
    }
    Ok(best as f64 / (n * n) as f64)
}

/// Edge-query access to a graph with accounting.
#[derive(Clone, Debug)]
pub struct QueryCountingOracle<'a> {
    g: &'a Graph,
    total: u64,
    pairs: HashSet<(usize, usize)>,
    vertices: HashSet<usize>,
}

impl<'a> QueryCountingOracle<'a> {
    pub fn new(g: &'a Graph) -> Self {
        QueryCountingOracle {
            g,
            total: 0,
            pairs: HashSet::new(),
            vertices: HashSet::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn query(&mut self, u: usize, v: usize) -> bool {
        self.total += 1;
        self.pairs.insert((u.min(v), u.max(v)));
        self.vertices.insert(u);
        self.vertices.insert(v);
        self.g.has_edge(u, v)
    }

    /// Every query made, repeats included.
    pub fn total_queries(&self) -> u64 {
        self.total
    }

    /// Distinct unordered pairs queried.
    pub fn edge_queries(&self) -> u64 {
        self.pairs.len() as u64
    }

    /// Distinct vertices touched by a query.
    pub fn vertex_queries(&self) -> u64 {
        self.vertices.len() as u64
    }
}

/// Samples `q` distinct vertices, queries every pair among them and accepts
/// iff the induced graph has the property.
pub fn canonical_test(oracle: &mut QueryCountingOracle, property: &PropertySpec, q: usize, seed: u64) -> Result<bool> {
    if !property.hereditary() {
        return Err(Error::domain(format!("{property} is not hereditary")));
    }
    let n = oracle.n();
    if q > n {
        return Err(Error::domain(format!("sample of {q} from {n} vertices")));
    }
    let mut rng = crate::rng::seeded(seed);
    let mut sample = rand::seq::index::sample(&mut rng, n, q).into_vec();
    sample.sort_unstable();
    let mut h = Graph::new(q.max(1));
    for a in 0..q {
        for b in a + 1..q {
            if oracle.query(sample[a], sample[b]) {
                h.set_edge(a, b, true);
            }
        }
    }
    if q == 0 {
        return Ok(true);
    }
    Ok(property.holds(&h))
}
