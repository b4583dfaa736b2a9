//! Command-line front end. Every command returns a JSON document carrying
//! `schema: 1`; `--pretty` renders it as indented text instead.

pub mod corpus;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::classify::{
    check_euler, classify_general, euler_predict, evaluate_on_units, field_of_characteristic, ClassifyError,
    ClassifyOptions, Mode, UnitError, UnitTuple,
};
use crate::field::FieldSpec;
use crate::freealg::weights::WeightVector;
use crate::freealg::{builtin, FreePoly};
use crate::generic::ProbeError;
use crate::matalg::Mat2;
use crate::oracle::{alternating_trace_trials, enumerate_image, enumerate_naive, OracleError, DEFAULT_TUPLE_BUDGET};

pub const SCHEMA: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "polimage", version, about = "Images of noncommutative polynomials on 2x2 matrices")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "POLIMAGE_THREADS")]
    pub threads: Option<usize>,
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the image of a polynomial.
    Classify {
        #[arg(long)]
        poly: String,
        /// Number of variables (default: highest index used).
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long = "char", default_value_t = 0)]
        characteristic: u64,
        /// Weight vector `w1,...,wm`; may be repeated.
        #[arg(long = "weights")]
        weights: Vec<String>,
        #[arg(long, default_value = "auto")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stored-term budget for symbolic expansion.
        #[arg(long)]
        budget: Option<usize>,
        /// Evaluations per witness search.
        #[arg(long)]
        search_budget: Option<usize>,
    },
    /// Enumerate the image over M_2(F_q) exhaustively.
    Enumerate {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long)]
        field: u64,
        /// Write the sorted image, one matrix per line.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TUPLE_BUDGET)]
        budget: u64,
        /// Evaluate every tuple even for multilinear input.
        #[arg(long)]
        naive: bool,
    },
    /// Run the built-in corpus and compare with expected verdicts.
    Corpus {
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cone class and invariants of a matrix.
    Cone {
        /// Entries as `a,b;c,d`.
        #[arg(long)]
        matrix: String,
        #[arg(long = "char", default_value_t = 0)]
        characteristic: u64,
    },
    /// Eulerian prediction for a tuple of matrix units.
    Euler {
        /// Units such as `e12,e21`.
        #[arg(long)]
        units: String,
        #[arg(long)]
        poly: Option<String>,
        /// Matrix size (default: largest index, at least 2).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Numerical verification of an identity.
    Verify {
        #[arg(long)]
        identity: Identity,
        #[arg(long)]
        field: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Full multilinearization of a homogeneous polynomial.
    Linearize {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        vars: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Identity {
    AlternatingTrace,
}

/// A failure with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        let code = match &e {
            ClassifyError::Budget(_) | ClassifyError::Units(UnitError::TooManyTuples { .. }) => EXIT_BUDGET,
            _ => EXIT_INPUT,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        let code = match &e {
            OracleError::Budget { .. } => EXIT_BUDGET,
            OracleError::Classify(c) => return c.clone().into(),
            _ => EXIT_INPUT,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<ProbeError> for CliError {
    fn from(e: ProbeError) -> Self {
        CliError::input(e.to_string())
    }
}

/// Highest variable index mentioned in `text` (or implied by a builtin).
pub fn infer_vars(text: &str) -> usize {
    let t = text.trim();
    if let Some(f) = builtin(t, FieldSpec::rationals()) {
        return f.nvars();
    }
    let bytes = t.as_bytes();
    let mut best = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'x' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if let Ok(k) = t[start..j].parse::<usize>() {
                best = best.max(k);
            }
            i = j.max(i + 1);
        } else {
            i += 1;
        }
    }
    best
}

/// Parses a polynomial or a builtin name (`s4`, `c4`, ...).
pub fn parse_poly(text: &str, vars: Option<usize>, field: FieldSpec) -> Result<FreePoly, CliError> {
    let m = vars.unwrap_or_else(|| infer_vars(text));
    if let Some(f) = builtin(text.trim(), field) {
        return f.with_nvars(m.max(f.nvars())).map_err(|e| CliError::input(e.to_string()));
    }
    FreePoly::parse(text, m, field)
        .map_err(|e| CliError::input(format!("parse error at position {}: {}", e.position, e.message)))
}

fn parse_weights(specs: &[String]) -> Result<Vec<WeightVector>, CliError> {
    specs
        .iter()
        .map(|s| {
            s.split(',')
                .map(|x| x.trim().parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map(WeightVector)
                .map_err(|_| CliError::input(format!("bad weight vector `{s}`")))
        })
        .collect()
}

fn document(command: &str, body: impl Serialize) -> Value {
    let mut doc = json!({ "schema": SCHEMA, "command": command });
    let body = serde_json::to_value(body).expect("serializable");
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    doc
}

/// Executes a command; `Ok` carries the document and the exit code.
pub fn execute(cli: &Cli) -> Result<(Value, i32), CliError> {
    match &cli.command {
        Command::Classify { poly, vars, characteristic, weights, mode, seed, budget, search_budget } => {
            field_of_characteristic(*characteristic).map_err(|e| CliError::input(e.to_string()))?;
            let f = parse_poly(poly, *vars, FieldSpec::rationals())?;
            let mut opts =
                ClassifyOptions { mode: *mode, seed: *seed, weights: parse_weights(weights)?, ..Default::default() };
            if let Some(b) = budget {
                opts.term_budget = *b;
            }
            if let Some(b) = search_budget {
                opts.search_budget = *b;
            }
            let class = classify_general(&f, *characteristic, &opts)?;
            let doc = document("classify", json!({ "polynomial": f.to_string(), "vars": f.nvars(), "result": class }));
            Ok((doc, EXIT_OK))
        }
        Command::Enumerate { poly, vars, field, dump, budget, naive } => {
            let f = parse_poly(poly, *vars, FieldSpec::rationals())?;
            let report =
                if *naive { enumerate_naive(&f, *field, *budget)? } else { enumerate_image(&f, *field, *budget)? };
            if let Some(path) = dump {
                std::fs::write(path, report.dump())
                    .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
            }
            let doc = document("enumerate", json!({ "polynomial": f.to_string(), "report": report }));
            Ok((doc, EXIT_OK))
        }
        Command::Corpus { only, seed } => {
            let entries: Vec<&corpus::CorpusEntry> = match only {
                Some(name) => {
                    vec![corpus::find(name).ok_or_else(|| CliError::input(format!("no corpus entry named `{name}`")))?]
                }
                None => corpus::CORPUS.iter().collect(),
            };
            let results = entries.iter().map(|e| corpus::run_entry(e, *seed)).collect::<Result<Vec<_>, _>>()?;
            let failed = results.iter().filter(|r| !r.pass).count();
            let doc = document(
                "corpus",
                json!({ "seed": seed, "passed": results.len() - failed, "failed": failed, "entries": results }),
            );
            Ok((doc, if failed == 0 { EXIT_OK } else { EXIT_MISMATCH }))
        }
        Command::Cone { matrix, characteristic } => {
            let field = field_of_characteristic(*characteristic).map_err(|e| CliError::input(e.to_string()))?;
            let m = Mat2::parse(matrix, field).map_err(|e| CliError::input(e.to_string()))?;
            let class = m.cone_class();
            let doc = document(
                "cone",
                json!({
                    "matrix": m,
                    "class": class.tag(),
                    "detail": class.to_string(),
                    "trace": m.trace(),
                    "det": m.det(),
                    "disc": m.disc(),
                    "pi": m.pi_invariant().to_string(),
                }),
            );
            Ok((doc, EXIT_OK))
        }
        Command::Euler { units, poly, n } => {
            let guess = UnitTuple::parse(units, usize::MAX).map_err(|e| CliError::input(e.to_string()))?;
            let size = n.unwrap_or_else(|| guess.units.iter().map(|u| u.row.max(u.col)).max().unwrap_or(2).max(2));
            let t = UnitTuple::parse(units, size).map_err(|e| CliError::input(e.to_string()))?;
            let verdict = euler_predict(&t);
            let mut body = json!({ "units": t.to_string(), "n": size, "graph": t.graph(), "verdict": verdict });
            if let Some(text) = poly {
                let f = parse_poly(text, Some(t.len()), FieldSpec::rationals())?;
                let value = evaluate_on_units(&f, &t).map_err(|e| CliError::input(e.to_string()))?;
                body["polynomial"] = json!(f.to_string());
                body["value"] = json!(value);
                body["compatible"] = match check_euler(&f, &t) {
                    Ok(ok) => json!(ok),
                    Err(e) => return Err(CliError::input(e.to_string())),
                };
            }
            Ok((document("euler", body), EXIT_OK))
        }
        Command::Verify { identity: Identity::AlternatingTrace, field, trials, seed } => {
            let report =
                alternating_trace_trials(*field, *trials, *seed).map_err(|e| CliError::input(e.to_string()))?;
            let code = if report.all_hold && report.linear_in_t { EXIT_OK } else { EXIT_MISMATCH };
            Ok((document("verify", json!({ "identity": "alternating-trace", "report": report })), code))
        }
        Command::Linearize { poly, vars } => {
            let f = parse_poly(poly, *vars, FieldSpec::rationals())?;
            let lin = f.multilinearize().map_err(|e| CliError::input(e.to_string()))?;
            let doc = document(
                "linearize",
                json!({ "input": f.to_string(), "vars": lin.nvars(), "terms": lin.num_terms(), "polynomial": lin.to_string() }),
            );
            Ok((doc, EXIT_OK))
        }
    }
}

/// Indented `key: value` rendering of a JSON document.
pub fn render_pretty(v: &Value) -> String {
    fn go(v: &Value, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match v {
            Value::Object(map) => {
                for (k, x) in map {
                    match x {
                        Value::Object(m) if !m.is_empty() => {
                            out.push_str(&format!("{pad}{k}:\n"));
                            go(x, indent + 1, out);
                        }
                        Value::Array(a) if a.iter().any(|e| e.is_object() || e.is_array()) => {
                            out.push_str(&format!("{pad}{k}:\n"));
                            go(x, indent + 1, out);
                        }
                        _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(x))),
                    }
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    out.push_str(&format!("{pad}- [{i}]\n"));
                    go(x, indent + 1, out);
                }
            }
            other => out.push_str(&format!("{pad}{}\n", scalar(other))),
        }
    }
    fn scalar(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            Value::Array(a) => format!("[{}]", a.iter().map(scalar).collect::<Vec<_>>().join(", ")),
            Value::Null => "-".into(),
            other => other.to_string(),
        }
    }
    let mut out = String::new();
    go(v, 0, &mut out);
    out
}

/// One line per corpus entry plus a summary line.
pub fn corpus_table(doc: &Value) -> String {
    let mut out = String::new();
    for e in doc["entries"].as_array().into_iter().flatten() {
        let status = if e["pass"] == true { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "{status}  {:<20} {:<22} expected {}\n",
            e["name"].as_str().unwrap_or(""),
            e["observed"].as_str().unwrap_or(""),
            e["expected"].as_str().unwrap_or("")
        ));
        for c in e["checks"].as_array().into_iter().flatten().skip(1) {
            out.push_str(&format!(
                "      {}: {}\n",
                c["name"].as_str().unwrap_or(""),
                c["detail"].as_str().unwrap_or("")
            ));
        }
    }
    out.push_str(&format!("{} passed, {} failed\n", doc["passed"], doc["failed"]));
    out
}

/// Runs the parsed command line; returns stdout text and the exit code.
/// Errors are reported on stderr by the caller.
pub fn run(cli: &Cli) -> Result<(String, i32), CliError> {
    if let Some(n) = cli.threads {
        // the global pool can be configured once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (doc, code) = execute(cli)?;
    let text = if cli.pretty && matches!(cli.command, Command::Corpus { .. }) {
        corpus_table(&doc)
    } else if cli.pretty {
        render_pretty(&doc)
    } else {
        let mut s = serde_json::to_string(&doc).expect("serializable");
        s.push('\n');
        s
    };
    Ok((text, code))
}
