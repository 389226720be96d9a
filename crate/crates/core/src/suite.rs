//! Seeded experiment scenarios producing machine-readable records.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::estimator::{pipeline_hereditary, EstimatorParams, PipelineOptions};
use crate::final_partition::FinalSearchParams;
use crate::graph::fixtures::{complete, cycle, gnp};
use crate::graph::{blowup, canonical_equipartition, edit_distance, pair_count, pairs, Equipartition, Graph};
use crate::metrics::d1;
use crate::oracle::{canonical_test, dist_oracle, PropertySpec, QueryCountingOracle};
use crate::rng::{derive, seeded};
use crate::rounding::{flip_probabilities, randomized_round};
use crate::signature::{zero_signature, Signature};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    OracleCheck,
    RoundingStats,
    EstimateVsOracle,
    TesterPower,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::OracleCheck,
        Scenario::RoundingStats,
        Scenario::EstimateVsOracle,
        Scenario::TesterPower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::OracleCheck => "oracle-check",
            Scenario::RoundingStats => "rounding-stats",
            Scenario::EstimateVsOracle => "estimate-vs-oracle",
            Scenario::TesterPower => "tester-power",
        }
    }

    fn default_instances(self) -> usize {
        match self {
            Scenario::OracleCheck => 3,
            Scenario::RoundingStats => 200,
            Scenario::EstimateVsOracle => 100,
            Scenario::TesterPower => 300,
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown scenario {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub scenario: Scenario,
    pub seed: u64,
    /// Overrides the scenario's instance count.
    pub instances: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub id: usize,
    pub seed: u64,
    pub params: BTreeMap<String, Value>,
    pub verdict: String,
    pub oracle_dist: Option<f64>,
    pub queries_edge: u64,
    pub queries_vertex: u64,
    pub wall_ms: f64,
}

fn record(id: usize, seed: u64, params: Value, verdict: impl Into<String>) -> ExperimentRecord {
    let params = match params {
        Value::Object(m) => m.into_iter().collect(),
        _ => BTreeMap::new(),
    };
    ExperimentRecord {
        id,
        seed,
        params,
        verdict: verdict.into(),
        oracle_dist: None,
        queries_edge: 0,
        queries_vertex: 0,
        wall_ms: 0.0,
    }
}

/// Runs every instance of the scenario in parallel. Instance `i` draws all
/// its randomness from `derive(seed, [i])`, so the output does not depend
/// on scheduling.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<ExperimentRecord>> {
    let count = config.instances.unwrap_or(config.scenario.default_instances());
    if config.scenario == Scenario::OracleCheck && count > 3 {
        return Err(Error::Usage("oracle-check has exactly three fixtures".into()));
    }
    let shared = match config.scenario {
        Scenario::RoundingStats => Some(RoundingFixture::new(120, 3, 0.1, config.seed)?),
        _ => None,
    };
    (0..count)
        .into_par_iter()
        .map(|id| {
            let seed = derive(config.seed, &[id as u64]);
            let start = Instant::now();
            let mut r = match config.scenario {
                Scenario::OracleCheck => oracle_check(id, seed),
                Scenario::RoundingStats => rounding_instance(shared.as_ref().unwrap(), id, seed),
                Scenario::EstimateVsOracle => estimate_vs_oracle(id, seed),
                Scenario::TesterPower => tester_power(id, seed),
            }?;
            r.wall_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(r)
        })
        .collect()
}

fn oracle_check(id: usize, seed: u64) -> Result<ExperimentRecord> {
    let (name, g, p) = match id {
        0 => ("K3", complete(3), PropertySpec::triangle_free()),
        1 => ("C5", cycle(5), PropertySpec::bipartite()),
        _ => ("K4", complete(4), PropertySpec::edgeless()),
    };
    let dist = dist_oracle(&g, &p)?;
    let mut r = record(
        id,
        seed,
        json!({"graph": name, "n": g.n(), "property": p.name()}),
        if dist == 0.0 { "member" } else { "non-member" },
    );
    r.oracle_dist = Some(dist);
    r.queries_edge = pair_count(g.n()) as u64;
    r.queries_vertex = g.n() as u64;
    Ok(r)
}

/// A graph with an equipartition, its own zero signature `S` and a random
/// target `S′`.
#[derive(Clone, Debug)]
pub struct RoundingFixture {
    pub g: Graph,
    pub a: Equipartition,
    pub s: Signature,
    pub target: Signature,
    pub eps: f64,
    pub gamma: f64,
}

impl RoundingFixture {
    pub fn new(n: usize, t: usize, eps: f64, seed: u64) -> Result<Self> {
        let mut rng = seeded(seed);
        let g = gnp(n, 0.5, &mut rng);
        let a = canonical_equipartition(n, t)?;
        let s = zero_signature(&g, &a);
        let target = Signature::new(t, (0..pair_count(t)).map(|_| rng.gen::<f64>()).collect())?;
        Ok(RoundingFixture {
            g,
            a,
            s,
            target,
            eps,
            gamma: eps / 6.0,
        })
    }
}

/// Measurements from one rounding run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundingSample {
    pub edit_distance: f64,
    pub d1: f64,
    pub realized: Vec<f64>,
    /// Fraction of sampled subset pairs whose realised density strays more
    /// than `γ/4` from its expectation.
    pub subset_violation_rate: f64,
}

pub const SUBSET_PAIRS: usize = 100;

pub fn rounding_sample(fx: &RoundingFixture, seed: u64) -> Result<RoundingSample> {
    let rep = randomized_round(&fx.g, &fx.a, &fx.target, seed)?;
    let d = crate::graph::block_densities(&fx.g, &fx.a);
    let mut rng = seeded(derive(seed, &[u64::MAX]));
    let part_pairs: Vec<(usize, usize)> = pairs(fx.a.t()).collect();
    let mut bad = 0;
    for _ in 0..SUBSET_PAIRS {
        let &(i, j) = part_pairs.choose(&mut rng).expect("at least two parts");
        let pick = |rng: &mut crate::rng::Rng, part: &[usize]| {
            let lo = ((2.0 * fx.gamma * part.len() as f64).ceil() as usize).clamp(1, part.len());
            let k = rng.gen_range(lo..=part.len());
            part.choose_multiple(rng, k).copied().collect::<Vec<_>>()
        };
        let x = pick(&mut rng, fx.a.part(i));
        let y = pick(&mut rng, fx.a.part(j));
        let (remove, add) = flip_probabilities(d[i][j], fx.target.get(i, j));
        let (mut expected, mut realized) = (0.0, 0.0);
        for &u in &x {
            for &v in &y {
                expected += if fx.g.has_edge(u, v) { 1.0 - remove } else { add };
                realized += rep.result.has_edge(u, v) as u8 as f64;
            }
        }
        let cells = (x.len() * y.len()) as f64;
        if ((realized - expected) / cells).abs() > fx.gamma / 4.0 {
            bad += 1;
        }
    }
    Ok(RoundingSample {
        edit_distance: edit_distance(&fx.g, &rep.result)?,
        d1: d1(&fx.s, &fx.target)?,
        realized: rep.realized.eta().to_vec(),
        subset_violation_rate: bad as f64 / SUBSET_PAIRS as f64,
    })
}

fn rounding_instance(fx: &RoundingFixture, id: usize, seed: u64) -> Result<ExperimentRecord> {
    let s = rounding_sample(fx, seed)?;
    let within = s.edit_distance <= s.d1 + fx.eps;
    let mut r = record(
        id,
        seed,
        json!({
            "n": fx.g.n(),
            "t": fx.a.t(),
            "eps": fx.eps,
            "gamma": fx.gamma,
            "target": fx.target.eta(),
            "realized": s.realized,
            "d1": s.d1,
            "edit_distance": s.edit_distance,
            "subset_violation_rate": s.subset_violation_rate,
        }),
        if within { "within" } else { "exceeds" },
    );
    r.queries_edge = pair_count(fx.g.n()) as u64;
    r.queries_vertex = fx.g.n() as u64;
    Ok(r)
}

/// Parameters of the estimate-vs-oracle scenario.
pub fn desk_params() -> (EstimatorParams, FinalSearchParams) {
    (
        EstimatorParams {
            alpha: 0.3,
            eps: 0.1,
            delta: 0.1,
            beta: 0.25,
            cap: 3,
            gamma: 0.25,
            removal_m: 2,
            removal_delta: 0.1,
            removal_n0: 0,
        },
        FinalSearchParams {
            k: 2,
            gamma: 0.25,
            growth: 2,
            mu: 0.125,
            t_cap: 2,
        },
    )
}

/// Seeded graph for the estimate-vs-oracle scenario: `G(7, p)` with `p`
/// uniform in `[0, 1)`.
pub fn estimate_instance_graph(seed: u64) -> Graph {
    let mut rng = seeded(seed);
    let p = rng.gen::<f64>();
    gnp(7, p, &mut rng)
}

fn estimate_vs_oracle(id: usize, seed: u64) -> Result<ExperimentRecord> {
    let g = estimate_instance_graph(seed);
    let property = PropertySpec::edgeless();
    let (params, search) = desk_params();
    let opts = PipelineOptions {
        seed,
        ..PipelineOptions::default()
    };
    let report = pipeline_hereditary(&g, &property, &params, &search, &opts)?;
    let dist = dist_oracle(&g, &property)?;
    let mut r = record(
        id,
        seed,
        json!({
            "n": g.n(),
            "edges": g.edge_count(),
            "property": property.name(),
            "estimator": params,
            "search": search,
            "s_star": report.s_star,
            "shortcut": report.shortcut,
        }),
        if report.verdict.is_close() { "close" } else { "far" },
    );
    r.oracle_dist = Some(dist);
    r.queries_edge = report.queries.edge;
    r.queries_vertex = report.queries.vertex;
    Ok(r)
}

/// Blowup of `K₃` with one class of `⌈εn⌉` vertices and two equal classes,
/// all independent: every triangle meets the small class.
pub fn tester_power_fixture(n: usize, eps: f64) -> Result<Graph> {
    let small = (eps * n as f64).ceil() as usize;
    let rest = n - small;
    blowup(&complete(3), &[rest / 2, rest - rest / 2, small], &[false; 3])
}

pub const TESTER_POWER_N: usize = 60;
pub const TESTER_POWER_EPS: f64 = 0.1;
pub const TESTER_POWER_C: [usize; 3] = [1, 2, 3];

fn tester_power(id: usize, seed: u64) -> Result<ExperimentRecord> {
    let g = tester_power_fixture(TESTER_POWER_N, TESTER_POWER_EPS)?;
    let property = PropertySpec::triangle_free();
    let mut verdicts = BTreeMap::new();
    let mut edge = 0;
    let mut vertices = BTreeSet::new();
    for (k, &c) in TESTER_POWER_C.iter().enumerate() {
        let q = ((c as f64 / TESTER_POWER_EPS).ceil() as usize).min(g.n());
        let mut oracle = QueryCountingOracle::new(&g);
        let accept = canonical_test(&mut oracle, &property, q, derive(seed, &[k as u64]))?;
        verdicts.insert(format!("c{c}_q{q}"), if accept { "accept" } else { "reject" });
        edge = edge.max(oracle.edge_queries());
        vertices.insert(oracle.vertex_queries());
    }
    let mut r = record(
        id,
        seed,
        json!({
            "n": g.n(),
            "eps": TESTER_POWER_EPS,
            "property": property.name(),
            "outcomes": verdicts,
        }),
        // the verdict at the largest sample
        verdicts.values().last().copied().unwrap_or("accept"),
    );
    r.queries_edge = edge;
    r.queries_vertex = vertices.into_iter().max().unwrap_or(0);
    Ok(r)
}

/// One JSON object per line.
pub fn write_json_lines(records: &[ExperimentRecord], mut out: impl Write) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&format!("{prefix}.{k}"), x, out);
            }
        }
        Value::Null => {
            out.insert(prefix.to_string(), String::new());
        }
        Value::String(s) => {
            out.insert(prefix.to_string(), s.clone());
        }
        other => {
            out.insert(prefix.to_string(), other.to_string());
        }
    }
}

/// CSV with a header row; nested parameters become `params.a.b` columns.
pub fn write_csv(records: &[ExperimentRecord], out: impl Write) -> Result<()> {
    let flat: Vec<BTreeMap<String, String>> = records
        .iter()
        .map(|r| {
            let mut m = BTreeMap::new();
            for (k, v) in &r.params {
                flatten(&format!("params.{k}"), v, &mut m);
            }
            m
        })
        .collect();
    let param_cols: BTreeSet<&String> = flat.iter().flat_map(|m| m.keys()).collect();
    let fixed = ["id", "seed", "verdict", "oracle_dist", "queries_edge", "queries_vertex", "wall_ms"];
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(fixed.iter().copied().chain(param_cols.iter().map(|s| s.as_str())))
        .map_err(csv_err)?;
    for (r, m) in records.iter().zip(&flat) {
        let mut row = vec![
            r.id.to_string(),
            r.seed.to_string(),
            r.verdict.clone(),
            r.oracle_dist.map(|d| d.to_string()).unwrap_or_default(),
            r.queries_edge.to_string(),
            r.queries_vertex.to_string(),
            format!("{:.3}", r.wall_ms),
        ];
        row.extend(param_cols.iter().map(|c| m.get(*c).cloned().unwrap_or_default()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(scenario: Scenario, instances: Option<usize>) -> SuiteConfig {
        SuiteConfig {
            scenario,
            seed: 11,
            instances,
        }
    }

    #[test]
    fn scenario_names_round_trip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
        }
        assert!(matches!("nope".parse::<Scenario>(), Err(Error::Usage(_))));
    }

    #[test]
    fn oracle_check_replays_fixtures() {
        let recs = run_suite(&cfg(Scenario::OracleCheck, None)).unwrap();
        let d: Vec<_> = recs.iter().map(|r| r.oracle_dist.unwrap()).collect();
        assert_eq!(d, vec![1.0 / 9.0, 1.0 / 25.0, 6.0 / 16.0]);
        assert!(run_suite(&cfg(Scenario::OracleCheck, Some(4))).is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let strip = |mut v: Vec<ExperimentRecord>| {
            v.iter_mut().for_each(|r| r.wall_ms = 0.0);
            v
        };
        let a = strip(run_suite(&cfg(Scenario::EstimateVsOracle, Some(6))).unwrap());
        let b = strip(run_suite(&cfg(Scenario::EstimateVsOracle, Some(6))).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|r| r.id).collect::<Vec<_>>(), (0..6).collect::<Vec<_>>());
        for r in &a {
            assert!(r.queries_edge >= 1 && r.queries_edge <= 49);
        }
    }

    #[test]
    fn tester_power_fixture_is_far_and_queries_are_counted() {
        let g = tester_power_fixture(20, 0.2).unwrap();
        assert_eq!(g.n(), 20);
        assert!(!PropertySpec::triangle_free().holds(&g));
        let recs = run_suite(&cfg(Scenario::TesterPower, Some(3))).unwrap();
        for r in &recs {
            assert_eq!(r.queries_edge, pair_count(30) as u64);
        }
    }

    #[test]
    fn writers() {
        let recs = run_suite(&cfg(Scenario::OracleCheck, None)).unwrap();
        let mut buf = Vec::new();
        write_json_lines(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        for key in ["id", "seed", "params", "verdict", "oracle_dist", "queries_edge", "queries_vertex", "wall_ms"] {
            assert!(first.get(key).is_some(), "{key}");
        }
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("id,seed,verdict,oracle_dist"));
        assert!(header.contains("params.property"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn rounding_sample_is_sane() {
        let fx = RoundingFixture::new(30, 3, 0.1, 1).unwrap();
        let s = rounding_sample(&fx, 2).unwrap();
        assert!(s.edit_distance <= s.d1 + 0.1);
        assert!((0.0..=1.0).contains(&s.subset_violation_rate));
    }
}
