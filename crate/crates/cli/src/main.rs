use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fkest::estimator::default_removal_m;
use fkest::final_partition::is_final_at;
use fkest::graph::{parse_partition, read_graph, write_graph};
use fkest::signature::read_signature;
use fkest::suite::{write_csv, write_json_lines};
use fkest::{
    canonical_equipartition, dist_oracle, find_final, fk_irregularity, fk_star_irregularity, signature_search,
    pipeline_general, pipeline_hereditary, randomized_round, run_suite, Equipartition, Error, EstimatorParams,
    ExactOracle, FinalSearchParams, LabeledGraphCode, OracleKind, PipelineOptions, PropertySpec, Scenario,
    SuiteConfig, VertexSet,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "fkest", version, about = "Graph distance estimation from partition signatures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact distance to a property by exhaustive search (n ≤ 7).
    DistOracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        property: String,
    },
    /// Close/far verdict from the signature pipeline.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        property: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        cap: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Forbidden subgraph order; defaults to the smallest non-member order.
        #[arg(long)]
        removal_m: Option<usize>,
        /// Below this order the distance oracle answers directly.
        #[arg(long, default_value_t = 0)]
        removal_n0: usize,
        /// Sample order for non-hereditary properties.
        #[arg(long, default_value_t = 3)]
        q: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        growth: usize,
        #[arg(long, default_value_t = 0.125)]
        mu: f64,
        #[arg(long, default_value_t = 2)]
        t_cap: usize,
        #[arg(long, value_enum, default_value_t = OracleArg::Exact)]
        oracle: OracleArg,
        #[arg(long, default_value_t = 8)]
        q_prime: usize,
    },
    /// Exhaustive search for a final partition.
    FinalPartition {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        growth: usize,
        #[arg(long)]
        mu: f64,
        /// Also run the signature search up to this many parts.
        #[arg(long)]
        t_cap: Option<usize>,
    },
    /// Frieze–Kannan irregularity of a partition.
    Regularity {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, conflicts_with = "t", required_unless_present = "t")]
        parts: Option<PathBuf>,
        /// Use the canonical equipartition into T parts.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long)]
        star: bool,
    },
    /// Randomised rounding towards a target signature.
    Round {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        parts: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs an experiment scenario.
    Suite {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        instances: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fkest: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Size { .. } => 3,
        Error::Usage(_) | Error::Parse { .. } | Error::Domain(_) => 2,
        _ => 1,
    }
}

fn print(v: Value) -> fkest::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &v).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn read_parts(path: &Path) -> fkest::Result<Equipartition> {
    parse_partition(&std::fs::read_to_string(path)?)
}

fn set_json(s: &VertexSet) -> Value {
    json!(s.iter().collect::<Vec<_>>())
}

fn run(cmd: Command) -> fkest::Result<()> {
    match cmd {
        Command::DistOracle { input, property } => {
            let g = read_graph(&input)?;
            let p = PropertySpec::by_name(&property)?;
            let d = dist_oracle(&g, &p)?;
            print(json!({ "property": p.name(), "n": g.n(), "dist": d, "edits": (d * (g.n() * g.n()) as f64).round() }))
        }
        Command::Estimate {
            input,
            property,
            alpha,
            eps,
            delta,
            beta,
            cap,
            gamma,
            seed,
            removal_m,
            removal_n0,
            q,
            k,
            growth,
            mu,
            t_cap,
            oracle,
            q_prime,
        } => {
            let g = read_graph(&input)?;
            let p = PropertySpec::by_name(&property)?;
            let removal_m = match removal_m {
                Some(m) => m,
                None => default_removal_m(&p)
                    .ok_or_else(|| Error::Domain(format!("{p} holds for every small graph; pass --removal-m")))?,
            };
            let params = EstimatorParams {
                alpha,
                eps,
                delta,
                beta,
                cap,
                gamma,
                removal_m,
                removal_delta: delta,
                removal_n0,
            };
            let search = FinalSearchParams {
                k,
                gamma,
                growth,
                mu,
                t_cap,
            };
            let opts = PipelineOptions {
                oracle: match oracle {
                    OracleArg::Exact => OracleKind::Exact,
                    OracleArg::Sampled => OracleKind::Sampled { q_prime },
                },
                seed,
                ..PipelineOptions::default()
            };
            let report = if p.hereditary() {
                pipeline_hereditary(&g, &p, &params, &search, &opts)?
            } else {
                // tester family: the labelled q-vertex members
                let family: Vec<LabeledGraphCode> = LabeledGraphCode::all(q).filter(|c| p.holds(&c.graph())).collect();
                pipeline_general(&g, &family, q, &params, &search, Some(&p), &opts)?
            };
            print(json!({ "property": p.name(), "params": params, "report": report }))
        }
        Command::FinalPartition {
            input,
            k,
            gamma,
            growth,
            mu,
            t_cap,
        } => {
            let g = read_graph(&input)?;
            let params = FinalSearchParams {
                k,
                gamma,
                growth,
                mu,
                t_cap: t_cap.unwrap_or(g.n()).max(k),
            };
            let run = find_final(&g, &params)?;
            let mut v = json!({
                "parts": run.partition.t(),
                "assignment": run.partition.assignment(),
                "index": run.index,
                "rounds": run.rounds,
                "final": is_final_at(&g, &run.partition, growth, gamma)?,
            });
            if t_cap.is_some() {
                v["search"] = match signature_search(&g, &params, &mut ExactOracle::new(mu)?) {
                    Ok(out) => json!({
                        "s_star": out.s_star,
                        "signature": out.signature,
                        "queries": out.queries,
                    }),
                    Err(Error::SearchFailed(msg)) => json!({ "failed": msg }),
                    Err(e) => return Err(e),
                };
            }
            print(v)
        }
        Command::Regularity { input, parts, t, star } => {
            let g = read_graph(&input)?;
            let a = match (parts, t) {
                (Some(path), _) => read_parts(&path)?,
                (None, Some(t)) => canonical_equipartition(g.n(), t)?,
                (None, None) => return Err(Error::Usage("pass --parts or --t".into())),
            };
            if a.n() != g.n() {
                return Err(Error::Domain(format!("partition covers {} vertices, graph has {}", a.n(), g.n())));
            }
            let irr = if star { fk_star_irregularity(&g, &a)? } else { fk_irregularity(&g, &a)? };
            print(json!({
                "measure": if star { "fk-star" } else { "fk" },
                "value": irr.value,
                "exact": irr.exact,
                "witness": [set_json(&irr.witness.0), set_json(&irr.witness.1)],
            }))
        }
        Command::Round {
            input,
            parts,
            target,
            seed,
            out,
        } => {
            let g = read_graph(&input)?;
            let a = read_parts(&parts)?;
            let target = read_signature(&target)?;
            let r = randomized_round(&g, &a, &target, seed)?;
            std::fs::write(&out, write_graph(&r.result))?;
            print(json!({
                "edits": r.edits,
                "realized": r.realized,
                "per_pair_dev": r.per_pair_dev,
                "out": out,
            }))
        }
        Command::Suite {
            scenario,
            seed,
            out,
            format,
            instances,
        } => {
            let scenario: Scenario = scenario.parse()?;
            let records = run_suite(&SuiteConfig {
                scenario,
                seed,
                instances,
            })?;
            let file = BufWriter::new(File::create(&out)?);
            match format {
                Format::Json => write_json_lines(&records, file)?,
                Format::Csv => write_csv(&records, file)?,
            }
            eprintln!("{} records written to {}", records.len(), out.display());
            Ok(())
        }
    }
}
