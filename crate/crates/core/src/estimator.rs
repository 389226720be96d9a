//! Extension and certificate families, the signature-space distance
//! estimators, and the end-to-end pipelines.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::final_partition::{signature_search, ExactOracle, FinalSearchParams, QueryCounts, SampledOracle};
use crate::graph::{pair_count, Graph};
use crate::homstats::{ind_induced, perceived_q_statistic, LabeledGraphCode};
use crate::metrics::d1;
use crate::oracle::{dist_oracle, PropertySpec, ORACLE_MAX_N};
use crate::signature::{extend_by_origin, GridMode, Signature};

pub const EXTENSION_CAP: f64 = 1e6;
pub const CERTIFICATE_CAP: f64 = 1e7;

/// Absolute slack on the `d₁ ≤ α − ε/2` comparison.
const TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimatorParams {
    pub alpha: f64,
    pub eps: f64,
    pub delta: f64,
    pub beta: f64,
    /// Largest extension and certificate size `T`.
    pub cap: usize,
    pub gamma: f64,
    pub removal_m: usize,
    pub removal_delta: f64,
    pub removal_n0: usize,
}

impl EstimatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= self.alpha && self.alpha <= 1.0) {
            return Err(Error::domain(format!(
                "need 0 < ε ≤ α ≤ 1, got ε = {}, α = {}",
                self.eps, self.alpha
            )));
        }
        beta_levels(self.beta)?;
        if self.cap == 0 {
            return Err(Error::domain("T must be positive"));
        }
        if !(self.delta > 0.0) {
            return Err(Error::domain("δ must be positive"));
        }
        Ok(())
    }

    /// `α − ε/2`, the witness threshold.
    pub fn threshold(&self) -> f64 {
        self.alpha - self.eps / 2.0
    }

    /// The substitution `α′ = α − ε/2`, `ε′ = ε/2` used by the pipelines.
    pub fn halved(&self) -> Self {
        EstimatorParams {
            alpha: self.alpha - self.eps / 2.0,
            eps: self.eps / 2.0,
            ..*self
        }
    }
}

fn beta_levels(beta: f64) -> Result<usize> {
    crate::signature::grid_levels(beta).map_err(|_| Error::domain(format!("1/β must be a positive integer, got β = {beta}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Close,
    Far,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub extension: Signature,
    pub certificate: Signature,
    pub d1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub case: Case,
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn is_close(&self) -> bool {
        self.case == Case::Close
    }
}

/// An extension together with its split vector `(m₁, …, m_t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Extension {
    pub split: Vec<usize>,
    pub signature: Signature,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Split vectors with every `m_i ≥ 1` and `t ≤ Σ m_i ≤ cap`, by total and
/// then lexicographically.
struct Splits {
    t: usize,
    total: usize,
    cap: usize,
    cur: Option<Vec<usize>>,
}

impl Splits {
    fn first(t: usize, total: usize) -> Vec<usize> {
        let mut v = vec![1; t];
        v[t - 1] = total - t + 1;
        v
    }
}

impl Iterator for Splits {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let t = self.t;
        let cur = self.cur.as_mut().unwrap();
        // rightmost position whose suffix still has surplus to hand over
        let mut surplus = cur[t - 1] - 1;
        let mut advanced = false;
        for i in (0..t - 1).rev() {
            if surplus > 0 {
                cur[i] += 1;
                for x in cur.iter_mut().take(t - 1).skip(i + 1) {
                    *x = 1;
                }
                let used: usize = cur[..t - 1].iter().sum();
                cur[t - 1] = self.total - used;
                advanced = true;
                break;
            }
            surplus += cur[i] - 1;
        }
        if !advanced {
            self.total += 1;
            self.cur = (self.total <= self.cap).then(|| Splits::first(t, self.total));
        }
        Some(out)
    }
}

/// Every extension of `s` onto at most `cap` parts.
pub fn extensions_of(s: &Signature, cap: usize) -> Result<impl Iterator<Item = Extension> + '_> {
    let t = s.t();
    if t == 0 || t > cap {
        return Err(Error::domain(format!("signature on {t} parts with cap T = {cap}")));
    }
    let count: f64 = (t..=cap).map(|m| binomial(m - 1, t - 1)).sum();
    if count > EXTENSION_CAP {
        return Err(Error::size("extensions (split vectors)", count, EXTENSION_CAP));
    }
    let splits = Splits {
        t,
        total: t,
        cap,
        cur: Some(Splits::first(t, t)),
    };
    Ok(splits.map(move |split| {
        let origin: Vec<usize> = split.iter().enumerate().flat_map(|(i, &m)| std::iter::repeat_n(i, m)).collect();
        Extension {
            signature: extend_by_origin(s, &origin),
            split,
        }
    }))
}

/// Every signature on `t` parts with densities in `{0, β, 2β, …, 1}`, in
/// lexicographic order of the density vector.
pub fn quantized_signatures(t: usize, beta: f64) -> Result<impl Iterator<Item = Signature>> {
    let l = beta_levels(beta)?;
    let count = ((l + 1) as f64).powi(pair_count(t) as i32);
    if count > CERTIFICATE_CAP {
        return Err(Error::size("certificate grid", count, CERTIFICATE_CAP));
    }
    let m = pair_count(t);
    let mut levels = Some(vec![0usize; m]);
    Ok(std::iter::from_fn(move || {
        let cur = levels.take()?;
        let eta = cur.iter().map(|&a| a as f64 / l as f64).collect();
        // odometer, last pair fastest
        let mut next = cur;
        for k in (0..m).rev() {
            if next[k] < l {
                next[k] += 1;
                next[k + 1..].iter_mut().for_each(|x| *x = 0);
                levels = Some(next);
                break;
            }
        }
        Some(Signature::new(t, eta).expect("grid densities lie in [0, 1]"))
    }))
}

fn check_grid_caps(sizes: impl Iterator<Item = usize>, beta: f64) -> Result<()> {
    let l = beta_levels(beta)?;
    for t in sizes {
        let count = ((l + 1) as f64).powi(pair_count(t) as i32);
        if count > CERTIFICATE_CAP {
            return Err(Error::size("certificate grid", count, CERTIFICATE_CAP));
        }
    }
    Ok(())
}

/// Whether `c` keeps every forbidden graph's induced density at most `δ/2`.
pub fn is_hereditary_certificate(c: &Signature, h_family: &[Graph], delta: f64) -> bool {
    h_family.iter().all(|h| ind_induced(h, c) <= delta / 2.0 + TOL)
}

/// Mass the perceived `q`-statistic of `c` puts on the family.
pub fn family_mass(c: &Signature, h_family: &[LabeledGraphCode], q: usize) -> Result<f64> {
    let dist = perceived_q_statistic(c, q)?;
    Ok(h_family.iter().filter(|h| h.q == q).map(|h| dist.prob(h.mask)).sum())
}

pub fn is_general_certificate(c: &Signature, h_family: &[LabeledGraphCode], q: usize) -> Result<bool> {
    Ok(family_mass(c, h_family, q)? >= 0.5 - TOL)
}

/// Quantized signatures on at most `cap` parts passing the forbidden
/// density filter, by size and then grid order.
pub fn hereditary_certificates<'a>(
    h_family: &'a [Graph],
    delta: f64,
    cap: usize,
    beta: f64,
) -> Result<impl Iterator<Item = Signature> + 'a> {
    check_grid_caps(1..=cap, beta)?;
    let mut sizes = Vec::new();
    for t in 1..=cap {
        sizes.push(quantized_signatures(t, beta)?);
    }
    Ok(sizes
        .into_iter()
        .flatten()
        .filter(move |c| is_hereditary_certificate(c, h_family, delta)))
}

/// Quantized signatures on `q ≤ t ≤ cap` parts whose perceived
/// `q`-statistic gives the family mass at least 1/2. Sizes below `q` have
/// no perceived statistic and are skipped.
pub fn general_certificates<'a>(
    h_family: &'a [LabeledGraphCode],
    q: usize,
    cap: usize,
    beta: f64,
) -> Result<impl Iterator<Item = Signature> + 'a> {
    check_grid_caps(q.max(1)..=cap, beta)?;
    let mut sizes = Vec::new();
    for t in q.max(1)..=cap {
        sizes.push(quantized_signatures(t, beta)?);
    }
    Ok(sizes
        .into_iter()
        .flatten()
        .filter(move |c| is_general_certificate(c, h_family, q).unwrap_or(false)))
}

/// Extensions outer, same-size certificates inner; the first pair within
/// `α − ε/2` in `d₁` is the witness.
fn scan(
    s: &Signature,
    params: &EstimatorParams,
    mut certificates_of_size: impl FnMut(usize) -> Result<Vec<Signature>>,
) -> Result<Verdict> {
    params.validate()?;
    let threshold = params.threshold();
    let mut cache: HashMap<usize, Vec<Signature>> = HashMap::new();
    for ext in extensions_of(s, params.cap)? {
        let m = ext.signature.t();
        if !cache.contains_key(&m) {
            cache.insert(m, certificates_of_size(m)?);
        }
        for c in &cache[&m] {
            let d = d1(&ext.signature, c)?;
            if d <= threshold + TOL {
                return Ok(Verdict {
                    case: Case::Close,
                    witness: Some(Witness {
                        extension: ext.signature,
                        certificate: c.clone(),
                        d1: d,
                    }),
                });
            }
        }
    }
    Ok(Verdict {
        case: Case::Far,
        witness: None,
    })
}

pub fn estimate_hereditary(s: &Signature, h_family: &[Graph], params: &EstimatorParams) -> Result<Verdict> {
    check_grid_caps(1..=params.cap, params.beta)?;
    scan(s, params, |m| {
        Ok(quantized_signatures(m, params.beta)?
            .filter(|c| is_hereditary_certificate(c, h_family, params.delta))
            .collect())
    })
}

pub fn estimate_general(s: &Signature, h_family: &[LabeledGraphCode], q: usize, params: &EstimatorParams) -> Result<Verdict> {
    check_grid_caps(q.max(1)..=params.cap, params.beta)?;
    scan(s, params, |m| {
        if m < q {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for c in quantized_signatures(m, params.beta)? {
            if is_general_certificate(&c, h_family, q)? {
                out.push(c);
            }
        }
        Ok(out)
    })
}

/// Canonical labelling of a small graph: the least pair mask over all
/// vertex orders.
fn canonical_mask(g: &Graph) -> u64 {
    let n = g.n();
    (0..n)
        .permutations(n)
        .map(|p| {
            let mut h = Graph::new(n);
            for (u, v) in g.edges() {
                h.set_edge(p[u], p[v], true);
            }
            h.pair_mask()
        })
        .min()
        .unwrap_or(0)
}

pub const REMOVAL_M_CAP: usize = 5;

/// Graphs on `1..=m` vertices violating the property, one per
/// isomorphism class.
pub fn forbidden_family(property: &PropertySpec, m: usize) -> Result<Vec<Graph>> {
    if m > REMOVAL_M_CAP {
        return Err(Error::size("forbidden family order", m as f64, REMOVAL_M_CAP as f64));
    }
    let mut out = Vec::new();
    for order in 1..=m {
        let mut seen = BTreeSet::new();
        for mask in 0..1u64 << pair_count(order) {
            let g = Graph::from_pair_mask(order, mask);
            if !property.holds(&g) && seen.insert(canonical_mask(&g)) {
                out.push(g);
            }
        }
    }
    Ok(out)
}

/// The smallest order admitting a violator, if any up to the cap.
pub fn default_removal_m(property: &PropertySpec) -> Option<usize> {
    (1..=REMOVAL_M_CAP).find(|&m| {
        (0..1u64 << pair_count(m)).any(|mask| !property.holds(&Graph::from_pair_mask(m, mask)))
    })
}

/// Which partition oracle the pipelines search with.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Exact,
    Sampled { q_prime: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PipelineOptions {
    pub oracle: OracleKind,
    pub seed: u64,
    /// Largest order at which a failing component falls back to the
    /// distance oracle.
    pub shortcut_max_n: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            oracle: OracleKind::Exact,
            seed: 0,
            shortcut_max_n: ORACLE_MAX_N,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub verdict: Verdict,
    pub s_star: Option<usize>,
    pub signature: Option<Signature>,
    /// Set when the verdict came from the distance oracle.
    pub oracle_dist: Option<f64>,
    pub shortcut: bool,
    pub queries: QueryCounts,
}

fn search_signature(g: &Graph, search: &FinalSearchParams, opts: &PipelineOptions) -> Result<(usize, Signature, QueryCounts)> {
    let out = match opts.oracle {
        OracleKind::Exact => signature_search(g, search, &mut ExactOracle::new(search.mu)?)?,
        OracleKind::Sampled { q_prime } => {
            let l = crate::signature::grid_levels(search.mu)?;
            let top = (search.growth * search.t_cap).min(g.n());
            let b: f64 = (search.k..=top)
                .map(|s| crate::signature::property_grid_size(s, l, GridMode::Slab))
                .sum();
            let reps = SampledOracle::default_reps(b.min(usize::MAX as f64) as usize);
            signature_search(g, search, &mut SampledOracle::new(search.mu, q_prime, reps, opts.seed)?)?
        }
    };
    Ok((out.s_star, out.signature, out.queries))
}

fn oracle_shortcut(g: &Graph, property: &PropertySpec, params: &EstimatorParams) -> Result<PipelineReport> {
    let dist = dist_oracle(g, property)?;
    let n = g.n() as u64;
    Ok(PipelineReport {
        verdict: Verdict {
            case: if dist <= params.threshold() + TOL { Case::Close } else { Case::Far },
            witness: None,
        },
        s_star: None,
        signature: None,
        oracle_dist: Some(dist),
        shortcut: true,
        queries: QueryCounts {
            edge: (n * (n - 1) / 2).max(1),
            vertex: n,
            properties: 0,
        },
    })
}

fn recoverable(e: &Error) -> bool {
    matches!(e, Error::Size { .. } | Error::SearchFailed(_))
}

/// Signature search, then the hereditary estimator at `α − ε/2`, `ε/2`.
/// Small graphs (below `removal_n0`, or where a component cap fails) are
/// answered by the distance oracle at threshold `α − ε/2`.
pub fn pipeline_hereditary(
    g: &Graph,
    property: &PropertySpec,
    params: &EstimatorParams,
    search: &FinalSearchParams,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    params.validate()?;
    if !property.hereditary() {
        return Err(Error::domain(format!("{property} is not hereditary")));
    }
    let small = g.n() <= opts.shortcut_max_n;
    if small && g.n() < params.removal_n0 {
        return oracle_shortcut(g, property, params);
    }
    let run = || -> Result<PipelineReport> {
        let family = forbidden_family(property, params.removal_m)?;
        let (s_star, signature, queries) = search_signature(g, search, opts)?;
        let verdict = estimate_hereditary(&signature, &family, &params.halved())?;
        Ok(PipelineReport {
            verdict,
            s_star: Some(s_star),
            signature: Some(signature),
            oracle_dist: None,
            shortcut: false,
            queries,
        })
    };
    match run() {
        Err(e) if small && recoverable(&e) => oracle_shortcut(g, property, params),
        other => other,
    }
}

/// Signature search, then the general estimator at `α − ε/2`, `ε/2`. The
/// distance-oracle fallback needs `fallback`, the property the family
/// tests for.
pub fn pipeline_general(
    g: &Graph,
    h_family: &[LabeledGraphCode],
    q: usize,
    params: &EstimatorParams,
    search: &FinalSearchParams,
    fallback: Option<&PropertySpec>,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    params.validate()?;
    let small = g.n() <= opts.shortcut_max_n;
    if let Some(p) = fallback.filter(|_| small && g.n() < params.removal_n0) {
        return oracle_shortcut(g, p, params);
    }
    let run = || -> Result<PipelineReport> {
        let (s_star, signature, queries) = search_signature(g, search, opts)?;
        let verdict = estimate_general(&signature, h_family, q, &params.halved())?;
        Ok(PipelineReport {
            verdict,
            s_star: Some(s_star),
            signature: Some(signature),
            oracle_dist: None,
            shortcut: false,
            queries,
        })
    };
    match (run(), fallback) {
        (Err(e), Some(p)) if small && recoverable(&e) => oracle_shortcut(g, p, params),
        (other, _) => other,
    }
}
