mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mlrank::corpus::{make_example, ExampleParams, Instance};
use mlrank::decomp::{pr_decompose, pr_decompose_d1, verify, DecomposeOptions};
use mlrank::json;
use mlrank::polyops::{mult, multsz_check};
use mlrank::ranks::{avg_rank, comm_rank, max_rank, CommRankMode, MaxRankMode, DEFAULT_BUDGET, DEFAULT_TRIALS};
use mlrank::schur::diff_schur;
use mlrank::tensor3::{analytic_rank, flatten, slice_decompose, SliceOptions, DEFAULT_TENSOR_BUDGET};
use mlrank::{Error, ScalarMatrix};
use serde_json::{json, Value};

use crate::io::{elems_json, emit, input_error, parse_elems, parse_list, InputError};

#[derive(Parser)]
#[command(name = "mlrank", version, about = "Ranks and partition-rank decompositions of matrices of multilinear forms")]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankKind {
    Max,
    Comm,
    Analytic,
    Avg,
}

#[derive(Clone, Copy, ValueEnum)]
enum TensorOp {
    Ar,
    Slice,
    Flatten,
}

#[derive(Subcommand)]
enum Command {
    /// Max, commutative, average or analytic rank.
    Rank {
        #[arg(long, value_enum)]
        kind: RankKind,
        #[arg(long = "in")]
        input: PathBuf,
        /// max: exhaustive|sample; comm: auto|symbolic|grid|probabilistic.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draws for probabilistic or sampled modes.
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Partition-rank decomposition by iterated differential Schur complements.
    Decompose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        allow_extension: bool,
        /// Largest point space searched exhaustively.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Normal-form decomposition of a matrix of linear forms.
    DecomposeD1 {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Checks that a decomposition sums to a matrix.
    Verify {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        decomp: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// One differential Schur complement step.
    Schur {
        #[arg(long = "in")]
        input: PathBuf,
        /// Pivot rows, 0-based and comma-separated.
        #[arg(long)]
        rows: String,
        #[arg(long)]
        cols: String,
        /// JSON array with one vector per block.
        #[arg(long)]
        point: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Operations on 3-tensors.
    Tensor {
        #[arg(long, value_enum)]
        op: TensorOp,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Multiplicity of a polynomial at a point.
    Mult {
        #[arg(long)]
        poly: PathBuf,
        /// Comma-separated element indices.
        #[arg(long)]
        point: String,
    },
    /// Both sides of the multiplicity Schwartz–Zippel inequality.
    Multsz {
        #[arg(long)]
        poly: PathBuf,
        /// Grid set as element indices; defaults to the whole field.
        #[arg(long)]
        set: Option<String>,
    },
    /// Writes a named example.
    Gen {
        #[arg(long)]
        example: String,
        #[arg(long, default_value_t = 2)]
        q: u64,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Renders a matrix or tensor with α, β, γ for the first three blocks.
    Show {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Runs the built-in example suite.
    Selfcheck,
}

/// Signals a failed check; exits with status 1 after the report is printed.
struct Failed;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<InputError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded(_)) => 3,
        Some(Error::NoProgress { .. } | Error::BoundViolation(_) | Error::Internal(_)) => 1,
        _ => 2,
    }
}

fn check(ok: bool) -> Result<Result<(), Failed>> {
    Ok(if ok { Ok(()) } else { Err(Failed) })
}

fn run(cmd: Command) -> Result<Result<(), Failed>> {
    match cmd {
        Command::Rank { kind, input, mode, seed, trials, budget } => {
            rank(kind, &input, mode.as_deref(), seed, trials, budget)?;
        }
        Command::Decompose { input, out, allow_extension, budget, seed } => {
            let m = io::read_matrix(&input)?;
            let mut opts = DecomposeOptions { allow_extension, seed, ..DecomposeOptions::default() };
            if let Some(b) = budget {
                opts.point_budget = b;
            }
            let dec = pr_decompose(&m, &opts)?;
            let mut doc = serde_json::to_value(json::decomposition_to_json(&dec)?)?;
            doc["seed"] = json!(seed);
            emit(&doc, Some(&out))?;
            emit(&json!({"terms": dec.len(), "rounds": dec.log.len(), "seed": seed, "out": out}), None)?;
        }
        Command::DecomposeD1 { input, out } => {
            let m = io::read_matrix(&input)?;
            let d1 = pr_decompose_d1(&m, &DecomposeOptions::default())?;
            let mut doc = serde_json::to_value(json::decomposition_to_json(&d1.decomposition)?)?;
            doc["P"] = scalar_json(&d1.p);
            doc["Q"] = scalar_json(&d1.q);
            doc["r1"] = json!(d1.r1);
            doc["r2"] = json!(d1.r2);
            emit(&doc, Some(&out))?;
            emit(&json!({"r1": d1.r1, "r2": d1.r2, "terms": d1.decomposition.len(), "out": out}), None)?;
        }
        Command::Verify { matrix, decomp, budget } => {
            let m = io::read_matrix(&matrix)?;
            let dec = io::read_decomposition(&decomp)?;
            let r = verify(&m, &dec, budget.unwrap_or(DEFAULT_BUDGET))?;
            let subsets: Vec<Value> =
                r.subset_counts.iter().map(|(s, c)| json!({"S": s, "count": c})).collect();
            emit(
                &json!({
                    "equal": r.equal,
                    "term_count": r.term_count,
                    "subset_counts": subsets,
                    "comm_rank": r.comm_rank,
                    "constant": r.bound.constant.as_ref().map_or("invalid".to_string(), ToString::to_string),
                    "bound_value": r.bound_value.as_ref().map(ToString::to_string),
                    "within_bound": r.within_bound,
                }),
                None,
            )?;
            return check(r.equal && r.within_bound != Some(false));
        }
        Command::Schur { input, rows, cols, point, out, budget } => {
            let m = io::read_matrix(&input)?;
            let to_idx = |s: &str| -> Result<Vec<usize>> { Ok(parse_list(s)?.into_iter().map(|i| i as usize).collect()) };
            let p = io::read_point(&point, m.field())?;
            let ds = diff_schur(&m, &to_idx(&rows)?, &to_idx(&cols)?, &p, None, budget.unwrap_or(DEFAULT_BUDGET))?;
            let c = &ds.certificate;
            let partial: Vec<Value> = c.partial_crs.iter().map(|(s, cr)| json!({"S": s, "cr": cr})).collect();
            emit(
                &json!({
                    "remainder": json::matrix_to_json(&ds.remainder),
                    "terms": json::terms_to_json_list(&ds.terms),
                    "certificate": {
                        "r": c.r,
                        "term_count": c.term_count,
                        "term_bound": c.term_bound,
                        "remainder_cr": c.remainder_cr,
                        "partial_crs": partial,
                        "rank_bound": c.rank_bound,
                    },
                }),
                out.as_deref(),
            )?;
        }
        Command::Tensor { op, input, budget } => {
            let t = io::read_tensor(&input)?;
            let budget = budget.unwrap_or(DEFAULT_TENSOR_BUDGET);
            match op {
                TensorOp::Flatten => emit(&serde_json::to_value(json::matrix_to_json(&flatten(&t)))?, None)?,
                TensorOp::Ar => {
                    let r = analytic_rank(&t, budget)?;
                    emit(
                        &json!({
                            "bias": r.bias.to_string(),
                            "bias_by_rank": r.bias_by_rank.to_string(),
                            "zero_set_size": r.zero_set_size,
                            "ar": r.ar,
                        }),
                        None,
                    )?;
                    return check(r.bias == r.bias_by_rank);
                }
                TensorOp::Slice => {
                    let s = slice_decompose(&t, None, &SliceOptions { budget, ..SliceOptions::default() })?;
                    let f = t.field();
                    let terms: Vec<Value> = s
                        .terms
                        .iter()
                        .map(|term| {
                            json!({
                                "slot": term.slot,
                                "linear": json::form_to_json(&term.linear, false),
                                "rest": json::form_to_json(&term.rest, false),
                            })
                        })
                        .collect();
                    let sub = &s.subspace;
                    emit(
                        &json!({
                            "field": json::field_to_json(f),
                            "n": s.n,
                            "count": s.count(),
                            "codim": s.codim,
                            "r1": s.r1,
                            "r2": s.r2,
                            "a": sub.a.to_string(),
                            "bias": sub.ar.bias.to_string(),
                            "ar": sub.ar.ar,
                            "y0": elems_json(f, &sub.y0),
                            "within_bound": s.within_bound,
                            "terms": terms,
                        }),
                        None,
                    )?;
                    return check(s.within_bound);
                }
            }
        }
        Command::Mult { poly, point } => {
            let g = io::read_poly(&poly)?;
            let p = parse_elems(g.field(), &point)?;
            let m = mult(&g, &p)?;
            emit(&json!({"mult": m.map_or(json!("inf"), |v| json!(v))}), None)?;
        }
        Command::Multsz { poly, set } => {
            let g = io::read_poly(&poly)?;
            let f = g.field();
            let s = match set {
                Some(s) => parse_elems(f, &s)?,
                None => f.elements().collect(),
            };
            let r = multsz_check(&g, &s)?;
            emit(&json!({"lhs": r.lhs, "rhs": r.rhs, "holds": r.holds, "set_size": s.len()}), None)?;
            return check(r.holds);
        }
        Command::Gen { example, q, k, d, n, rows, cols, density, seed, out } => {
            let params = ExampleParams { q, k, d, n, rows, cols, density, seed };
            let mut doc = match make_example(&example, &params) {
                Ok(Instance::Matrix(m)) => serde_json::to_value(json::matrix_to_json(&m))?,
                Ok(Instance::Tensor(t)) => serde_json::to_value(json::form_to_json(t.form(), true))?,
                Err(e @ (Error::UnknownExample(_) | Error::InvalidParameter(_) | Error::NotPrime(_))) => {
                    bail!(input_error(e.to_string()))
                }
                Err(e) => return Err(e.into()),
            };
            doc["seed"] = json!(seed);
            emit(&doc, out.as_deref())?;
        }
        Command::Show { input } => match io::read_input(&input)? {
            io::Input::Matrix(m) => println!("{m}"),
            io::Input::Tensor(t) => println!("{}", t.form()),
        },
        Command::Selfcheck => {
            let rows = mlrank::selfcheck::run();
            let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
            for r in &rows {
                println!("{}  {:width$}  {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            let failed = rows.iter().filter(|r| !r.passed).count();
            println!("{} passed, {failed} failed", rows.len() - failed);
            return check(failed == 0);
        }
    }
    Ok(Ok(()))
}

fn rank(kind: RankKind, input: &Path, mode: Option<&str>, seed: u64, trials: Option<u32>, budget: Option<u64>) -> Result<()> {
    let out = match kind {
        RankKind::Analytic => {
            let t = io::read_tensor(input)?;
            let r = analytic_rank(&t, budget.unwrap_or(DEFAULT_TENSOR_BUDGET))?;
            json!({"kind": "analytic", "value": r.ar, "bias": r.bias.to_string(), "exact": true, "mode": "enumeration"})
        }
        RankKind::Avg => {
            let m = io::read_matrix(input)?;
            let v = avg_rank(&m, budget.unwrap_or(DEFAULT_BUDGET))?;
            json!({"kind": "avg", "value": v.to_string(), "exact": true, "mode": "enumeration"})
        }
        RankKind::Max => {
            let m = io::read_matrix(input)?;
            let budget = budget.unwrap_or(DEFAULT_BUDGET);
            let md = match mode.unwrap_or("exhaustive") {
                "exhaustive" => MaxRankMode::Exhaustive { budget },
                "sample" => MaxRankMode::Sample { count: trials.map_or(budget, u64::from), seed },
                other => bail!(input_error(format!("unknown max-rank mode {other:?}"))),
            };
            let r = max_rank(&m, md)?;
            json!({"kind": "max", "value": r.value, "exact": r.exact, "mode": r.method, "seed": seed})
        }
        RankKind::Comm => {
            let m = io::read_matrix(input)?;
            let budget = budget.unwrap_or(DEFAULT_BUDGET);
            let md = match mode.unwrap_or("auto") {
                "auto" => CommRankMode::Auto { budget },
                "symbolic" => CommRankMode::Symbolic,
                "grid" => CommRankMode::Grid { budget },
                "probabilistic" => CommRankMode::Probabilistic { trials: trials.unwrap_or(DEFAULT_TRIALS), seed },
                other => bail!(input_error(format!("unknown commutative-rank mode {other:?}"))),
            };
            let r = comm_rank(&m, md)?;
            json!({"kind": "comm", "value": r.value, "exact": r.exact, "mode": r.method, "seed": seed})
        }
    };
    emit(&out, None)
}

fn scalar_json(m: &ScalarMatrix) -> Value {
    m.to_rows().iter().map(|row| elems_json(m.field(), row)).collect()
}
