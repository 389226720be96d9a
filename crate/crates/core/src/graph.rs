//! Graphs, weighted graphs, equipartitions and the elementary quantities
//! defined on them: densities, normalised edit distance and blowups.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng as _;

use crate::error::{Error, Result};

/// Index of the unordered pair `{i, j}` (`i < j`) in the lexicographic
/// order `(0,1), (0,2), …, (0,n-1), (1,2), …`.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// All pairs `i < j` of `[0, n)` in [`pair_index`] order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Anything that assigns a weight in `[0, 1]` to each pair of `[0, n)`,
/// with weight 0 on the diagonal.
pub trait PairWeights {
    fn order(&self) -> usize;

    fn weight(&self, u: usize, v: usize) -> f64;

    /// `e(X, Y)`: the sum of `w(x, y)` over ordered pairs `x ∈ X, y ∈ Y`,
    /// `x ≠ y`.
    fn cross_weight(&self, x: &VertexSet, y: &VertexSet) -> f64 {
        let mut total = 0.0;
        for u in x.iter() {
            for v in y.iter() {
                if u != v {
                    total += self.weight(u, v);
                }
            }
        }
        total
    }
}

/// A subset of `[0, n)` stored as a bitmask.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexSet {
    n: usize,
    bits: Vec<u64>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet {
            n,
            bits: vec![0; n.div_ceil(64).max(1)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    pub fn from_indices(n: usize, items: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut s = Self::empty(n);
        for v in items {
            if v >= n {
                return Err(Error::domain(format!("vertex {v} outside [0, {n})")));
            }
            s.insert(v);
        }
        Ok(s)
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, v: usize) {
        self.bits[v / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        self.bits[v / 64] &= !(1 << (v % 64));
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v < self.n && self.bits[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * 64 + b)
                }
            })
        })
    }
}

/// A simple undirected graph on `[0, n)` stored as a symmetric bit matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    /// The edgeless graph on `n ≥ 1` vertices.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a graph needs at least one vertex");
        let words = n.div_ceil(64);
        Graph {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::domain(format!("invalid edge ({u}, {v}) for n = {n}")));
            }
            g.set_edge(u, v, true);
        }
        Ok(g)
    }

    /// Decodes a graph from a bitmask over the pairs in [`pair_index`] order.
    pub fn from_pair_mask(n: usize, mask: u64) -> Self {
        let mut g = Graph::new(n);
        for (k, (i, j)) in pairs(n).enumerate() {
            if mask >> k & 1 == 1 {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// Inverse of [`Graph::from_pair_mask`]; requires `C(n, 2) ≤ 64`.
    pub fn pair_mask(&self) -> u64 {
        assert!(pair_count(self.n) <= 64, "pair mask needs n ≤ 11");
        pairs(self.n)
            .enumerate()
            .filter(|&(_, (i, j))| self.has_edge(i, j))
            .fold(0u64, |m, (k, _)| m | 1 << k)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn set_edge(&mut self, u: usize, v: usize, present: bool) {
        if u == v {
            return;
        }
        let (wu, bu) = (u * self.words + v / 64, 1u64 << (v % 64));
        let (wv, bv) = (v * self.words + u / 64, 1u64 << (u % 64));
        if present {
            self.bits[wu] |= bu;
            self.bits[wv] |= bv;
        } else {
            self.bits[wu] &= !bu;
            self.bits[wv] &= !bv;
        }
    }

    pub fn toggle_edge(&mut self, u: usize, v: usize) {
        let present = self.has_edge(u, v);
        self.set_edge(u, v, !present);
    }

    /// The adjacency row of `u` as packed words.
    #[inline]
    pub fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words..(u + 1) * self.words]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.has_edge(u, v))
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        pairs(self.n).filter(|&(u, v)| self.has_edge(u, v))
    }

    /// The subgraph induced on `vertices`, relabelled `0..k` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut h = Graph::new(vertices.len());
        for (a, &u) in vertices.iter().enumerate() {
            for (b, &v) in vertices.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, v) {
                    h.set_edge(a, b, true);
                }
            }
        }
        h
    }

    pub fn complement(&self) -> Graph {
        let mut h = Graph::new(self.n);
        for (u, v) in pairs(self.n) {
            if !self.has_edge(u, v) {
                h.set_edge(u, v, true);
            }
        }
        h
    }
}

impl PairWeights for Graph {
    fn order(&self) -> usize {
        self.n
    }

    #[inline]
    fn weight(&self, u: usize, v: usize) -> f64 {
        if self.has_edge(u, v) {
            1.0
        } else {
            0.0
        }
    }

    fn cross_weight(&self, x: &VertexSet, y: &VertexSet) -> f64 {
        // the diagonal is never set, so x = y pairs drop out on their own
        let mut total = 0usize;
        for u in x.iter() {
            total += self
                .row(u)
                .iter()
                .zip(y.words())
                .map(|(a, b)| (a & b).count_ones() as usize)
                .sum::<usize>();
        }
        total as f64
    }
}

/// A complete graph with pair weights in `[0, 1]` and a zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    w: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        WeightedGraph {
            n,
            w: vec![0.0; n * n],
        }
    }

    /// Builds a weighted graph from `f(i, j)` evaluated on pairs `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut r = WeightedGraph::new(n);
        for (i, j) in pairs(n) {
            r.set(i, j, f(i, j))?;
        }
        Ok(r)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.w[u * self.n + v]
    }

    pub fn set(&mut self, u: usize, v: usize, x: f64) -> Result<()> {
        if u == v {
            return Err(Error::domain("diagonal weights are fixed at 0"));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("weight {x} outside [0, 1]")));
        }
        self.w[u * self.n + v] = x;
        self.w[v * self.n + u] = x;
        Ok(())
    }
}

impl PairWeights for WeightedGraph {
    fn order(&self) -> usize {
        self.n
    }

    #[inline]
    fn weight(&self, u: usize, v: usize) -> f64 {
        self.get(u, v)
    }
}

impl From<&Graph> for WeightedGraph {
    fn from(g: &Graph) -> Self {
        let mut r = WeightedGraph::new(g.n());
        for (u, v) in g.edges() {
            r.w[u * g.n() + v] = 1.0;
            r.w[v * g.n() + u] = 1.0;
        }
        r
    }
}

/// `d(X, Y) = e(X, Y) / (|X| |Y|)`, counting ordered pairs with `x ≠ y`.
pub fn density<W: PairWeights + ?Sized>(g: &W, x: &VertexSet, y: &VertexSet) -> Result<f64> {
    if x.universe() != g.order() || y.universe() != g.order() {
        return Err(Error::domain("vertex set universe does not match the graph"));
    }
    let (nx, ny) = (x.len(), y.len());
    if nx == 0 || ny == 0 {
        return Err(Error::domain("density of an empty vertex set"));
    }
    Ok(g.cross_weight(x, y) / (nx * ny) as f64)
}

/// `|E(G) Δ E(H)| / n²`, each unordered pair counted once.
pub fn edit_distance(g: &Graph, h: &Graph) -> Result<f64> {
    Ok(edit_count(g, h)? as f64 / (g.n() * g.n()) as f64)
}

/// Number of unordered pairs on which `g` and `h` differ.
pub fn edit_count(g: &Graph, h: &Graph) -> Result<usize> {
    if g.n() != h.n() {
        return Err(Error::domain(format!(
            "edit distance between graphs on {} and {} vertices",
            g.n(),
            h.n()
        )));
    }
    let diff: usize = g
        .bits
        .iter()
        .zip(&h.bits)
        .map(|(a, b)| (a ^ b).count_ones() as usize)
        .sum();
    Ok(diff / 2)
}

/// Replaces vertex `i` of `h` by a class of `sizes[i]` vertices, joins
/// classes completely along the edges of `h`, and makes class `i` a clique
/// when `cliques[i]` is set.
pub fn blowup(h: &Graph, sizes: &[usize], cliques: &[bool]) -> Result<Graph> {
    if sizes.len() != h.n() || cliques.len() != h.n() {
        return Err(Error::domain("blowup needs one size and one flag per vertex"));
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::domain("blowup class sizes must be positive"));
    }
    let mut starts = Vec::with_capacity(sizes.len() + 1);
    starts.push(0);
    for &s in sizes {
        starts.push(starts.last().unwrap() + s);
    }
    let class = |i: usize| starts[i]..starts[i + 1];
    let mut g = Graph::new(starts[sizes.len()]);
    for i in 0..h.n() {
        if cliques[i] {
            for u in class(i) {
                for v in class(i).filter(|&v| v > u) {
                    g.set_edge(u, v, true);
                }
            }
        }
        for j in (i + 1)..h.n() {
            if h.has_edge(i, j) {
                for u in class(i) {
                    for v in class(j) {
                        g.set_edge(u, v, true);
                    }
                }
            }
        }
    }
    Ok(g)
}

/// A partition of `[0, n)` into `t` nonempty parts whose sizes differ by at
/// most one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Equipartition {
    part_of: Vec<usize>,
    parts: Vec<Vec<usize>>,
}

impl std::fmt::Debug for Equipartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("Equipartition").field(&self.parts).finish()
    }
}

impl Equipartition {
    pub fn from_assignment(part_of: Vec<usize>, t: usize) -> Result<Self> {
        let n = part_of.len();
        if t == 0 || t > n {
            return Err(Error::domain(format!("{t} parts for {n} vertices")));
        }
        let mut parts = vec![Vec::new(); t];
        for (v, &p) in part_of.iter().enumerate() {
            if p >= t {
                return Err(Error::domain(format!("vertex {v} assigned to part {p} ≥ {t}")));
            }
            parts[p].push(v);
        }
        let lo = parts.iter().map(Vec::len).min().unwrap();
        let hi = parts.iter().map(Vec::len).max().unwrap();
        if lo == 0 {
            return Err(Error::domain("equipartition with an empty part"));
        }
        if hi - lo > 1 {
            return Err(Error::domain(format!("part sizes range from {lo} to {hi}")));
        }
        Ok(Equipartition { part_of, parts })
    }

    pub fn from_parts(n: usize, parts: &[Vec<usize>]) -> Result<Self> {
        let mut part_of = vec![usize::MAX; n];
        for (p, part) in parts.iter().enumerate() {
            for &v in part {
                if v >= n || part_of[v] != usize::MAX {
                    return Err(Error::domain(format!("vertex {v} repeated or out of range")));
                }
                part_of[v] = p;
            }
        }
        if part_of.contains(&usize::MAX) {
            return Err(Error::domain("parts do not cover every vertex"));
        }
        Self::from_assignment(part_of, parts.len())
    }

    pub fn n(&self) -> usize {
        self.part_of.len()
    }

    pub fn t(&self) -> usize {
        self.parts.len()
    }

    #[inline]
    pub fn part_of(&self, v: usize) -> usize {
        self.part_of[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.part_of
    }

    pub fn part(&self, i: usize) -> &[usize] {
        &self.parts[i]
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn part_set(&self, i: usize) -> VertexSet {
        VertexSet::from_indices(self.n(), self.parts[i].iter().copied())
            .expect("parts lie inside [0, n)")
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.parts.iter().map(Vec::len).collect()
    }

    /// Relabels parts in order of their minimum element.
    pub fn normalized(&self) -> Equipartition {
        let mut order: Vec<usize> = (0..self.t()).collect();
        order.sort_by_key(|&p| self.parts[p][0]);
        let mut relabel = vec![0; self.t()];
        for (new, &old) in order.iter().enumerate() {
            relabel[old] = new;
        }
        let part_of = self.part_of.iter().map(|&p| relabel[p]).collect();
        Equipartition::from_assignment(part_of, self.t()).expect("relabelling preserves validity")
    }
}

/// The deterministic equipartition whose first `n mod t` parts hold
/// `⌈n/t⌉` consecutive vertices and the rest `⌊n/t⌋`.
pub fn canonical_equipartition(n: usize, t: usize) -> Result<Equipartition> {
    if t == 0 || t > n {
        return Err(Error::domain(format!("cannot split {n} vertices into {t} parts")));
    }
    let (q, r) = (n / t, n % t);
    let mut part_of = Vec::with_capacity(n);
    for p in 0..t {
        let size = if p < r { q + 1 } else { q };
        part_of.extend(std::iter::repeat_n(p, size));
    }
    Equipartition::from_assignment(part_of, t)
}

/// Whether every part of `b` lies inside a single part of `a`.
pub fn is_refinement(b: &Equipartition, a: &Equipartition) -> Result<bool> {
    if a.n() != b.n() {
        return Err(Error::domain("refinement check across different vertex sets"));
    }
    Ok(b.parts()
        .iter()
        .all(|part| part.iter().all(|&v| a.part_of(v) == a.part_of(part[0]))))
}

/// Number of equipartitions of `[0, n)` into `s` unlabelled parts,
/// `n! / ((q+1)!^r q!^(s-r) r! (s-r)!)` with `q = n / s`, `r = n mod s`.
pub fn equipartition_count(n: usize, s: usize) -> f64 {
    if s == 0 || s > n {
        return 0.0;
    }
    let (q, r) = (n / s, n % s);
    let lf = |k: usize| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    let ln = lf(n) - r as f64 * lf(q + 1) - (s - r) as f64 * lf(q) - lf(r) - lf(s - r);
    ln.exp().round()
}

/// Streams every equipartition of `[0, n)` into `s` parts exactly once.
///
/// Parts are labelled by first appearance (so by minimum element) and the
/// stream follows the lexicographic order of the label sequences.
pub fn enumerate_equipartitions(n: usize, s: usize) -> Result<EquipartitionIter> {
    if s == 0 || s > n {
        return Err(Error::domain(format!("cannot split {n} vertices into {s} parts")));
    }
    Ok(EquipartitionIter::new(n, s))
}

pub struct EquipartitionIter {
    n: usize,
    s: usize,
    q: usize,
    r: usize,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    big: usize,
    used: usize,
    started: bool,
    done: bool,
}

impl EquipartitionIter {
    fn new(n: usize, s: usize) -> Self {
        EquipartitionIter {
            n,
            s,
            q: n / s,
            r: n % s,
            labels: Vec::with_capacity(n),
            sizes: vec![0; s],
            big: 0,
            used: 0,
            started: false,
            done: false,
        }
    }

    fn cap(&self) -> usize {
        if self.r > 0 {
            self.q + 1
        } else {
            self.q
        }
    }

    fn can_place(&self, c: usize) -> bool {
        let v = self.labels.len();
        let used_after = self.used.max(c + 1);
        if c > self.used || c >= self.s {
            return false;
        }
        let new_size = self.sizes[c] + 1;
        if new_size > self.cap() || (new_size == self.q + 1 && self.r > 0 && self.big >= self.r) {
            return false;
        }
        self.s - used_after <= self.n - v - 1
    }

    fn place(&mut self, c: usize) {
        self.sizes[c] += 1;
        if self.r > 0 && self.sizes[c] == self.q + 1 {
            self.big += 1;
        }
        if c == self.used {
            self.used += 1;
        }
        self.labels.push(c);
    }

    fn unplace(&mut self) -> usize {
        let c = self.labels.pop().unwrap();
        if self.r > 0 && self.sizes[c] == self.q + 1 {
            self.big -= 1;
        }
        self.sizes[c] -= 1;
        if self.sizes[c] == 0 {
            self.used -= 1;
        }
        c
    }

    /// Completes the current prefix with the smallest admissible labels.
    fn fill(&mut self) {
        while self.labels.len() < self.n {
            let c = (0..=self.used.min(self.s - 1))
                .find(|&c| self.can_place(c))
                .expect("every admissible prefix extends");
            self.place(c);
        }
    }

    fn current(&self) -> Equipartition {
        Equipartition::from_assignment(self.labels.clone(), self.s)
            .expect("enumerated assignments are equipartitions")
    }
}

impl Iterator for EquipartitionIter {
    type Item = Equipartition;

    fn next(&mut self) -> Option<Equipartition> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.fill();
            return Some(self.current());
        }
        while !self.labels.is_empty() {
            let c = self.unplace();
            let hi = self.used.min(self.s - 1);
            if let Some(next) = (c + 1..=hi).find(|&d| self.can_place(d)) {
                self.place(next);
                self.fill();
                return Some(self.current());
            }
        }
        self.done = true;
        None
    }
}

/// The `t × t` matrix of edge counts `e(V_i, V_j)` over ordered pairs.
/// Diagonal entries count every edge inside a part twice.
pub fn block_edges(g: &Graph, a: &Equipartition) -> Vec<Vec<usize>> {
    let t = a.t();
    let mut e = vec![vec![0usize; t]; t];
    for (u, v) in g.edges() {
        let (i, j) = (a.part_of(u), a.part_of(v));
        e[i][j] += 1;
        e[j][i] += 1;
    }
    e
}

/// Densities `d(V_i, V_j)` for every pair of parts, under the ordered-pair
/// convention on the diagonal.
pub fn block_densities(g: &Graph, a: &Equipartition) -> Vec<Vec<f64>> {
    let e = block_edges(g, a);
    let sizes = a.sizes();
    (0..a.t())
        .map(|i| {
            (0..a.t())
                .map(|j| e[i][j] as f64 / (sizes[i] * sizes[j]) as f64)
                .collect()
        })
        .collect()
}

/// Parses the edge-list format: a header `n m` followed by `m` lines `u v`
/// with `0 ≤ u < v < n`.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let head = parse_numbers(hl, header, 2)?;
    let (n, m) = (head[0], head[1]);
    if n == 0 {
        return Err(Error::parse(hl, "graph needs at least one vertex"));
    }
    let mut g = Graph::new(n);
    let mut seen = 0usize;
    for (ln, line) in lines {
        let uv = parse_numbers(ln, line, 2)?;
        let (u, v) = (uv[0], uv[1]);
        if !(u < v && v < n) {
            return Err(Error::parse(ln, format!("pair ({u}, {v}) violates 0 ≤ u < v < {n}")));
        }
        if g.has_edge(u, v) {
            return Err(Error::parse(ln, format!("duplicate pair ({u}, {v})")));
        }
        g.set_edge(u, v, true);
        seen += 1;
    }
    if seen != m {
        return Err(Error::parse(hl, format!("header announces {m} edges, found {seen}")));
    }
    Ok(g)
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

/// Parses a partition file: a header `n t` followed by `n` lines, line `v`
/// holding the 0-based part index of vertex `v`.
pub fn parse_partition(text: &str) -> Result<Equipartition> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let head = parse_numbers(hl, header, 2)?;
    let (n, t) = (head[0], head[1]);
    let mut part_of = Vec::with_capacity(n);
    for (ln, line) in lines {
        part_of.push(parse_numbers(ln, line, 1)?[0]);
    }
    if part_of.len() != n {
        return Err(Error::parse(hl, format!("expected {n} assignments, found {}", part_of.len())));
    }
    Equipartition::from_assignment(part_of, t).map_err(|e| Error::parse(hl, e.to_string()))
}

pub fn write_partition(a: &Equipartition) -> String {
    let mut out = format!("{} {}\n", a.n(), a.t());
    for &p in a.assignment() {
        writeln!(out, "{p}").unwrap();
    }
    out
}

pub(crate) fn parse_numbers(line_no: usize, line: &str, count: usize) -> Result<Vec<usize>> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != count {
        return Err(Error::parse(
            line_no,
            format!("expected {count} fields, found {}", fields.len()),
        ));
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("not a nonnegative integer: {f:?}")))
        })
        .collect()
}

/// Standard fixture graphs.
pub mod fixtures {
    use super::*;

    pub fn empty(n: usize) -> Graph {
        Graph::new(n)
    }

    pub fn complete(n: usize) -> Graph {
        let mut g = Graph::new(n);
        for (u, v) in pairs(n) {
            g.set_edge(u, v, true);
        }
        g
    }

    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|v| (v - 1, v))).unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3);
        Graph::from_edges(n, (0..n).map(|v| (v, (v + 1) % n))).unwrap()
    }

    /// `K_{a,b}` with sides `[0, a)` and `[a, a+b)`.
    pub fn complete_bipartite(a: usize, b: usize) -> Graph {
        let k2 = Graph::from_edges(2, [(0, 1)]).unwrap();
        blowup(&k2, &[a, b], &[false, false]).unwrap()
    }

    /// The half graph on `n = 2m` vertices: left vertex `i` is joined to
    /// right vertex `m + j` iff `i ≤ j`.
    pub fn half_graph(n: usize) -> Graph {
        assert!(n % 2 == 0);
        let m = n / 2;
        let mut g = Graph::new(n);
        for i in 0..m {
            for j in i..m {
                g.set_edge(i, m + j, true);
            }
        }
        g
    }

    /// Erdős–Rényi `G(n, p)`.
    pub fn gnp(n: usize, p: f64, rng: &mut crate::rng::Rng) -> Graph {
        let mut g = Graph::new(n);
        for (u, v) in pairs(n) {
            if rng.gen::<f64>() < p {
                g.set_edge(u, v, true);
            }
        }
        g
    }

    /// A uniformly random equipartition of `[0, n)` into `t` parts.
    pub fn random_equipartition(n: usize, t: usize, rng: &mut crate::rng::Rng) -> Equipartition {
        use rand::seq::SliceRandom;
        let canon = canonical_equipartition(n, t).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let mut part_of = vec![0; n];
        for (pos, &v) in perm.iter().enumerate() {
            part_of[v] = canon.part_of(pos);
        }
        Equipartition::from_assignment(part_of, t).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use std::collections::HashSet;

    fn set(n: usize, v: &[usize]) -> VertexSet {
        VertexSet::from_indices(n, v.iter().copied()).unwrap()
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&complete(3), &set(3, &[0]), &set(3, &[1, 2])).unwrap(), 1.0);
        assert_eq!(density(&empty(4), &set(4, &[0, 1]), &set(4, &[2, 3])).unwrap(), 0.0);
        assert_eq!(density(&cycle(4), &set(4, &[0]), &set(4, &[2])).unwrap(), 0.0);
        assert!(density(&cycle(4), &set(4, &[]), &set(4, &[2])).is_err());
    }

    #[test]
    fn density_of_whole_vertex_set_is_twice_edges_over_n_squared() {
        let mut rng = crate::rng::seeded(5);
        for n in 1..20 {
            let g = gnp(n, 0.4, &mut rng);
            let all = VertexSet::full(n);
            let d = density(&g, &all, &all).unwrap();
            assert!((d - 2.0 * g.edge_count() as f64 / (n * n) as f64).abs() < 1e-15);
            let w = WeightedGraph::from(&g);
            assert!((density(&w, &all, &all).unwrap() - d).abs() < 1e-12);
        }
    }

    #[test]
    fn edit_distance_examples() {
        let k3 = complete(3);
        let mut k3m = k3.clone();
        k3m.set_edge(0, 1, false);
        assert_eq!(edit_distance(&k3, &k3).unwrap(), 0.0);
        assert_eq!(edit_distance(&k3, &k3m).unwrap(), 1.0 / 9.0);
        assert_eq!(edit_distance(&complete(4), &empty(4)).unwrap(), 6.0 / 16.0);
        assert!(edit_distance(&complete(4), &empty(5)).is_err());
    }

    #[test]
    fn blowup_examples() {
        let k2 = complete(2);
        let g = blowup(&k2, &[2, 2], &[false, false]).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g, complete_bipartite(2, 2));
        assert_eq!(blowup(&k2, &[2, 2], &[true, true]).unwrap(), complete(4));
        assert_eq!(blowup(&Graph::new(1), &[3], &[true]).unwrap(), complete(3));
        assert!(blowup(&k2, &[2], &[false]).is_err());
    }

    #[test]
    fn unit_blowup_is_identity() {
        let mut rng = crate::rng::seeded(9);
        for n in 1..10 {
            let h = gnp(n, 0.5, &mut rng);
            assert_eq!(blowup(&h, &vec![1; n], &vec![false; n]).unwrap(), h);
        }
    }

    #[test]
    fn canonical_equipartition_examples() {
        assert_eq!(
            canonical_equipartition(5, 2).unwrap().parts(),
            &[vec![0, 1, 2], vec![3, 4]]
        );
        assert_eq!(
            canonical_equipartition(4, 4).unwrap().parts(),
            &[vec![0], vec![1], vec![2], vec![3]]
        );
        assert_eq!(
            canonical_equipartition(6, 3).unwrap().parts(),
            &[vec![0, 1], vec![2, 3], vec![4, 5]]
        );
        assert!(canonical_equipartition(3, 4).is_err());
    }

    #[test]
    fn refinement_examples() {
        let single = canonical_equipartition(4, 4).unwrap();
        let a = Equipartition::from_parts(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let b = Equipartition::from_parts(4, &[vec![0, 2], vec![1, 3]]).unwrap();
        assert!(is_refinement(&single, &a).unwrap());
        assert!(is_refinement(&a, &a).unwrap());
        assert!(!is_refinement(&b, &a).unwrap());
        assert!(is_refinement(&a, &canonical_equipartition(5, 1).unwrap()).is_err());
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_equipartitions(4, 2).unwrap().count(), 3);
        assert_eq!(enumerate_equipartitions(3, 3).unwrap().count(), 1);
        assert_eq!(enumerate_equipartitions(6, 2).unwrap().count(), 10);
        assert!(enumerate_equipartitions(3, 4).is_err());
    }

    /// Set-based brute force: label all `s^n` assignments, keep the
    /// equipartitions, and canonicalise as sets of sets.
    fn brute_force_equipartitions(n: usize, s: usize) -> HashSet<Vec<Vec<usize>>> {
        let mut out = HashSet::new();
        let total = s.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut parts = vec![Vec::new(); s];
            for v in 0..n {
                parts[c % s].push(v);
                c /= s;
            }
            let lo = parts.iter().map(Vec::len).min().unwrap();
            let hi = parts.iter().map(Vec::len).max().unwrap();
            if lo > 0 && hi - lo <= 1 {
                parts.sort();
                out.insert(parts);
            }
        }
        out
    }

    #[test]
    fn enumeration_matches_brute_force_and_closed_form() {
        for n in 1..=8 {
            for s in 1..=n {
                let listed: Vec<Vec<Vec<usize>>> = enumerate_equipartitions(n, s)
                    .unwrap()
                    .map(|a| {
                        let mut p = a.parts().to_vec();
                        p.sort();
                        p
                    })
                    .collect();
                let unique: HashSet<_> = listed.iter().cloned().collect();
                assert_eq!(unique.len(), listed.len(), "duplicates at n={n}, s={s}");
                assert_eq!(unique, brute_force_equipartitions(n, s), "n={n}, s={s}");
                assert_eq!(listed.len() as f64, equipartition_count(n, s), "n={n}, s={s}");
            }
        }
    }

    #[test]
    fn enumeration_labels_parts_by_minimum() {
        for a in enumerate_equipartitions(7, 3).unwrap() {
            let mins: Vec<usize> = a.parts().iter().map(|p| p[0]).collect();
            assert!(mins.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(a, a.normalized());
        }
    }

    #[test]
    fn graph_text_roundtrip_and_errors() {
        let g = cycle(5);
        assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
        assert!(parse_graph("3 1\n0 3\n").is_err());
        assert!(parse_graph("3 1\n1 0\n").is_err());
        assert!(parse_graph("3 2\n0 1\n0 1\n").is_err());
        assert!(parse_graph("3 2\n0 1\n").is_err());
        assert!(parse_graph("0 0\n").is_err());
    }

    #[test]
    fn partition_text_roundtrip() {
        let a = canonical_equipartition(7, 3).unwrap();
        assert_eq!(parse_partition(&write_partition(&a)).unwrap(), a);
        assert!(parse_partition("3 2\n0\n0\n0\n").is_err());
    }

    #[test]
    fn pair_mask_roundtrip() {
        for mask in 0..64u64 {
            assert_eq!(Graph::from_pair_mask(4, mask).pair_mask(), mask);
        }
        assert_eq!(pair_index(5, 1, 3), pairs(5).position(|p| p == (1, 3)).unwrap());
    }
}
