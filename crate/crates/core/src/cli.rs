//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::engine::{random_run_with, Diagnostics, RunOptions};
use crate::error::{Error, Result};
use crate::examples::{
    dpa_query, gen_abt, gen_dpa, gen_timer, gen_traingate, timer_query, traingate_query, AbtVariant, DpaSpec,
    ABT_COST_QUERY, ABT_TIME_QUERY,
};
use crate::hist::histogram;
use crate::model::{validate, NetworkModel};
use crate::monitor::{check, Outcome};
use crate::oracle::exact_probability;
use crate::rng::substream;
use crate::sampler::{outcome_pairs, outcomes, satisfied, satisfied_pairs, Jobs};
use crate::stats::{
    compare, compare_param, estimate, required_samples, sprt, CompareParams, EstimateParams, SprtParams, SprtVerdict,
};
use crate::text::{parse_model, parse_query, serialize_run, PwctlQuery};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "nptasmc", version, about = "Statistical model checking of networks of priced timed automata")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
    #[command(flatten)]
    pub stats: StatFlags,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Model file (.nptam).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Query file (.npq) or inline query text.
    #[arg(long, global = true)]
    pub query: Option<String>,
    /// Second model for `compare` and `pcompare` (defaults to --model).
    #[arg(long, global = true)]
    pub model2: Option<PathBuf>,
    /// Second query for `compare` and `pcompare` (defaults to --query).
    #[arg(long, global = true)]
    pub query2: Option<String>,
    #[arg(long, global = true, env = "NPTASMC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file, or directory for `examples`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct StatFlags {
    #[arg(long, global = true, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, global = true, default_value_t = 0.05)]
    pub beta: f64,
    /// SPRT threshold (defaults to the query's probability bound).
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true, default_value_t = 0.01)]
    pub delta0: f64,
    #[arg(long, global = true, default_value_t = 0.01)]
    pub delta1: f64,
    #[arg(long, global = true, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long, global = true, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, global = true, default_value_t = 0.5)]
    pub u0: f64,
    #[arg(long, global = true, default_value_t = 2.0)]
    pub u1: f64,
    #[arg(long, global = true, default_value_t = 0.999)]
    pub p0eq: f64,
    #[arg(long, global = true, default_value_t = 0.99)]
    pub p1eq: f64,
    #[arg(long, global = true, default_value_t = 50)]
    pub bins: usize,
    /// Number of bounds for `pcompare`.
    #[arg(long = "N", global = true, default_value_t = 20)]
    #[serde(rename = "N")]
    pub n: usize,
    #[arg(long, global = true, default_value_t = 10_000_000)]
    pub max_samples: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a model.
    Validate,
    /// Generate runs and print their traces.
    Simulate {
        #[arg(long, default_value_t = 1)]
        runs: u64,
    },
    /// Estimate the probability of the query.
    Estimate,
    /// Sequential hypothesis test on the query's probability.
    Test,
    /// Compare two processes.
    Compare,
    /// Compare two processes at N equally spaced bounds up to the query bound.
    Pcompare,
    /// Numerical probability of the query by unfolding.
    Oracle {
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// List the bundled example models, or write them to --out.
    Examples,
    /// Histogram of hit costs of the query.
    Hist {
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
    },
}

/// Parses `args` (including the program name) and executes; returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match execute(&cli) {
        Ok(Artifact::Text(s)) => match &cli.global.out {
            Some(p) if !matches!(cli.command, Command::Examples) => match std::fs::write(p, s) {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {}: {e}", p.display());
                    1
                }
            },
            _ => {
                let _ = stdout.write_all(s.as_bytes());
                0
            }
        },
        Err(Failure::Usage(m)) => {
            let _ = writeln!(stderr, "usage error: {m}");
            2
        }
        Err(Failure::Model(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

enum Artifact {
    Text(String),
}

enum Failure {
    Usage(String),
    Model(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(m) => Failure::Usage(m),
            e => Failure::Model(e),
        }
    }
}

type Out = std::result::Result<Artifact, Failure>;

fn usage<T>(m: impl Into<String>) -> std::result::Result<T, Failure> {
    Err(Failure::Usage(m.into()))
}

fn load_model(path: Option<&Path>, flag: &str) -> std::result::Result<NetworkModel, Failure> {
    let Some(path) = path else {
        return usage(format!("--{flag} is required"));
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Model(Error::Io(e)))?;
    let doc = parse_model(&text).map_err(|e| Failure::Model(e.into()))?;
    validate(&doc).map_err(|e| Failure::Model(e.into()))
}

fn load_query(src: Option<&str>, model: &NetworkModel, flag: &str) -> std::result::Result<PwctlQuery, Failure> {
    let Some(src) = src else {
        return usage(format!("--{flag} is required"));
    };
    let text = if Path::new(src).is_file() {
        std::fs::read_to_string(src).map_err(|e| Failure::Model(Error::Io(e)))?
    } else {
        src.to_string()
    };
    parse_query(&text, model).map_err(|e| Failure::Model(e.into()))
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn echo(cli: &Cli, extra: Value) -> Value {
    let g = &cli.global;
    let mut v = json!({
        "seed": g.seed,
        "model": g.model,
        "query": g.query,
        "flags": cli.stats,
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

fn csv_row(header: &str, values: &[String]) -> String {
    format!("{header}\n{}\n", values.join(","))
}

fn execute(cli: &Cli) -> Out {
    let g = &cli.global;
    let st = &cli.stats;
    let jobs = || Jobs::new(g.jobs).map_err(Failure::from);
    let opts = RunOptions::default();
    match &cli.command {
        Command::Validate => {
            let m = load_model(g.model.as_deref(), "model")?;
            let summary = json!({
                "valid": true,
                "network": m.name,
                "components": m.components.iter().map(|c| &c.name).collect::<Vec<_>>(),
                "clocks": m.clocks.iter().map(|c| &c.name).collect::<Vec<_>>(),
                "ints": m.ints.iter().map(|v| &v.name).collect::<Vec<_>>(),
                "actions": m.actions,
            });
            Ok(Artifact::Text(json_text(&summary)))
        }
        Command::Simulate { runs } => {
            let m = load_model(g.model.as_deref(), "model")?;
            let q = load_query(g.query.as_deref(), &m, "query")?;
            let mut traces = Vec::new();
            let mut diag = Diagnostics::default();
            for k in 0..*runs {
                let mut rng = substream(g.seed, k);
                let run = random_run_with(&m, q.observer, q.bound, &mut rng, opts, &mut diag, |_, _| {})?;
                let o = check(&m, &run, &q)?;
                traces.push((serialize_run(&run, &m), o));
            }
            Ok(Artifact::Text(match g.format {
                Format::Json => json_text(&echo(
                    cli,
                    json!({
                        "command": "simulate",
                        "runs": traces.iter().map(|(t, o)| json!({"trace": t, "outcome": o})).collect::<Vec<_>>(),
                        "diagnostics": diag,
                    }),
                )),
                Format::Csv => {
                    let mut s = String::new();
                    for (t, _) in &traces {
                        s.push_str(t);
                    }
                    s
                }
            }))
        }
        Command::Estimate => {
            let m = load_model(g.model.as_deref(), "model")?;
            let q = load_query(g.query.as_deref(), &m, "query")?;
            let p = EstimateParams { delta: st.delta, epsilon: st.epsilon };
            let n = required_samples(&p)?;
            let mut src = outcomes(&m, &q, g.seed, jobs()?, opts);
            let r = estimate(satisfied(&mut src), &p)?;
            Ok(Artifact::Text(match g.format {
                Format::Json => json_text(&echo(
                    cli,
                    json!({
                        "command": "estimate",
                        "params": p,
                        "required_samples": n,
                        "result": r,
                        "diagnostics": src.diagnostics,
                    }),
                )),
                Format::Csv => csv_row(
                    "p_hat,lo,hi,samples,successes,epsilon,delta,seed",
                    &[
                        r.p_hat.to_string(),
                        r.lo.to_string(),
                        r.hi.to_string(),
                        r.samples.to_string(),
                        r.successes.to_string(),
                        p.epsilon.to_string(),
                        p.delta.to_string(),
                        g.seed.to_string(),
                    ],
                ),
            }))
        }
        Command::Test => {
            let m = load_model(g.model.as_deref(), "model")?;
            let q = load_query(g.query.as_deref(), &m, "query")?;
            let Some(theta) = st.theta.or(q.comparison.map(|(_, p)| p)) else {
                return usage("--theta is required when the query has no probability bound");
            };
            let mut p = SprtParams::new(theta, st.delta0, st.delta1, st.alpha, st.beta);
            p.max_samples = st.max_samples;
            let mut src = outcomes(&m, &q, g.seed, jobs()?, opts);
            let r = sprt(satisfied(&mut src), &p)?;
            // H0 says the probability is at least theta.
            let holds = q.comparison.and_then(|(rel, _)| match r.verdict {
                SprtVerdict::Undecided => None,
                v => Some(if rel.is_lower() { v == SprtVerdict::H0 } else { v == SprtVerdict::H1 }),
            });
            Ok(Artifact::Text(match g.format {
                Format::Json => json_text(&echo(
                    cli,
                    json!({
                        "command": "test",
                        "params": p,
                        "p0": p.p0(),
                        "p1": p.p1(),
                        "result": r,
                        "query_holds": holds,
                        "diagnostics": src.diagnostics,
                    }),
                )),
                Format::Csv => csv_row(
                    "verdict,samples,successes,llr,theta,seed",
                    &[
                        format!("{:?}", r.verdict),
                        r.samples.to_string(),
                        r.successes.to_string(),
                        r.llr.to_string(),
                        theta.to_string(),
                        g.seed.to_string(),
                    ],
                ),
            }))
        }
        Command::Compare | Command::Pcompare => {
            let m1 = load_model(g.model.as_deref(), "model")?;
            let q1 = load_query(g.query.as_deref(), &m1, "query")?;
            let m2 = match &g.model2 {
                Some(p) => load_model(Some(p), "model2")?,
                None => m1.clone(),
            };
            let q2 = load_query(g.query2.as_deref().or(g.query.as_deref()), &m2, "query2")?;
            let mut p = CompareParams::new(st.u0, st.u1, st.alpha, st.beta, st.p0eq, st.p1eq);
            p.max_pairs = st.max_samples;
            let (a, r, c) = p.count_bounds();
            let constants = json!({"a": a, "r": r, "c": c});
            let pairs = outcome_pairs((&m1, &q1), (&m2, &q2), g.seed, jobs()?, opts);
            if matches!(cli.command, Command::Compare) {
                let res = compare(satisfied_pairs(pairs), &p)?;
                return Ok(Artifact::Text(match g.format {
                    Format::Json => json_text(&echo(
                        cli,
                        json!({
                            "command": "compare",
                            "model2": g.model2,
                            "query2": g.query2,
                            "params": p,
                            "count_bounds": constants,
                            "result": res,
                        }),
                    )),
                    Format::Csv => csv_row(
                        "verdict,informative,total,wins2,seed",
                        &[
                            format!("{:?}", res.verdict),
                            res.informative.to_string(),
                            res.total.to_string(),
                            res.wins2.to_string(),
                            g.seed.to_string(),
                        ],
                    ),
                }));
            }
            if q1.bound != q2.bound || q1.observer != q2.observer {
                return usage("pcompare needs both queries on the same observer and bound");
            }
            let res = compare_param(pairs, q1.bound, st.n, &p)?;
            let scores = res.scores();
            Ok(Artifact::Text(match g.format {
                Format::Json => json_text(&echo(
                    cli,
                    json!({
                        "command": "pcompare",
                        "model2": g.model2,
                        "query2": g.query2,
                        "params": p,
                        "N": st.n,
                        "count_bounds": constants,
                        "result": res,
                        "scores": scores,
                    }),
                )),
                Format::Csv => {
                    let mut s = String::from("index,bound,verdict,score,pairs\n");
                    for (i, score) in scores.iter().enumerate() {
                        let score = score.map(|x| x.to_string()).unwrap_or_default();
                        let _ =
                            writeln!(s, "{},{},{:?},{score},{}", i + 1, res.bounds[i], res.verdicts[i], res.pairs[i]);
                    }
                    s
                }
            }))
        }
        Command::Oracle { tolerance, depth } => {
            let m = load_model(g.model.as_deref(), "model")?;
            let q = load_query(g.query.as_deref(), &m, "query")?;
            let r = exact_probability(&m, &q, *tolerance, *depth)?;
            Ok(Artifact::Text(match g.format {
                Format::Json => json_text(&echo(
                    cli,
                    json!({"command": "oracle", "tolerance": tolerance, "depth": depth, "result": r}),
                )),
                Format::Csv => {
                    csv_row("probability,error_bound", &[r.probability.to_string(), r.error_bound.to_string()])
                }
            }))
        }
        Command::Examples => {
            let list = bundled_examples()?;
            if let Some(dir) = &g.out {
                std::fs::create_dir_all(dir).map_err(|e| Failure::Model(e.into()))?;
                for (name, model, query) in &list {
                    std::fs::write(dir.join(format!("{name}.nptam")), model).map_err(|e| Failure::Model(e.into()))?;
                    std::fs::write(dir.join(format!("{name}.npq")), format!("{query}\n"))
                        .map_err(|e| Failure::Model(e.into()))?;
                }
            }
            let mut s = String::from("name,query\n");
            for (name, _, query) in &list {
                let _ = writeln!(s, "{name},\"{}\"", query.replace('"', "\"\""));
            }
            Ok(Artifact::Text(s))
        }
        Command::Hist { runs } => {
            let m = load_model(g.model.as_deref(), "model")?;
            let q = load_query(g.query.as_deref(), &m, "query")?;
            if st.bins == 0 {
                return usage("--bins must be at least 1");
            }
            let mut src = outcomes(&m, &q, g.seed, jobs()?, opts);
            let os: Vec<Outcome> = (&mut src).take(*runs as usize).collect::<Result<_>>()?;
            let h = histogram(&os, st.bins, q.bound);
            Ok(Artifact::Text(match g.format {
                Format::Csv => h.to_csv(),
                Format::Json => json_text(&echo(
                    cli,
                    json!({"command": "hist", "bins": st.bins, "histogram": h, "diagnostics": src.diagnostics}),
                )),
            }))
        }
    }
}

/// `(name, model text, query text)` of every bundled example.
pub fn bundled_examples() -> Result<Vec<(String, String, String)>> {
    let mut v = Vec::new();
    for var in AbtVariant::ALL {
        let doc = gen_abt(var).to_string();
        v.push((format!("{}_time", var.name()), doc.clone(), ABT_TIME_QUERY.to_string()));
        v.push((format!("{}_cost", var.name()), doc, ABT_COST_QUERY.to_string()));
    }
    v.push(("traingate6".into(), gen_traingate(6).to_string(), traingate_query(0, 100)));
    v.push(("dpa_4_4_3".into(), gen_dpa(&DpaSpec::random(4, 4, 3, 1))?.to_string(), dpa_query(4, 60)));
    v.push(("timer_narrow".into(), gen_timer(41, 43, 20).to_string(), timer_query(4)));
    v.push(("timer_wide".into(), gen_timer(0, 5, 1).to_string(), timer_query(4)));
    Ok(v)
}
