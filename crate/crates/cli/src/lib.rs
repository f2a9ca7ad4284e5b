//! Command-line front end for `causalgap`.
//!
//! [`run`] takes the argument vector and returns the exit code together
//! with everything destined for stdout and stderr, so the binary is a thin
//! wrapper and tests can drive commands in-process.
//!
//! Exit codes: 0 success, 1 substantive negative (not d-separated, not
//! local, scenario or property failure), 2 input error, 3 numeric failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use causalgap::lhv::{chsh_all_symmetries, chsh_value, extract_bell, lhv_feasible, BellRoles, LhvError, LhvVerdict};
use causalgap::quantum::QuantumError;
use causalgap::sampling::{self, PropertyReport};
use causalgap::scenarios::{self, certificate_of, ExactValue, ScenarioName};
use causalgap::{CausalGraph, ExactTable, Model, QSqrt2, Scalar, ScenarioError, SnapError};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable overriding the property-driver seed.
pub const SEED_ENV: &str = "CAUSALGAP_SEED";

#[derive(Debug, Parser)]
#[command(name = "causalgap", version, about = "Classical/quantum gaps in causal structures")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide `x ⊥ y | given`; prints an open path when the answer is no.
    Dsep {
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
    },
    /// Evaluate a quantum model and print its exact distribution.
    Eval { model: PathBuf },
    /// CHSH value of a table's Bell block.
    Chsh {
        table: PathBuf,
        /// `setting_a,setting_b;outcome_a,outcome_b`
        #[arg(long)]
        roles: String,
    },
    /// Decide membership in the local polytope.
    Lhv {
        table: PathBuf,
        #[arg(long)]
        roles: String,
    },
    /// Run an end-to-end gap pipeline.
    Scenario { name: String },
    /// Run a randomized property driver.
    Check {
        #[arg(value_enum)]
        property: Property,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Write the bundled fixtures to a directory.
    Export { dir: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Property {
    Dsep,
    Theorem1,
    Lemma1,
    Lemma3,
    G2InG1,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// A failure with its exit code and a stable kind tag.
#[derive(Debug)]
struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn input(kind: &'static str, message: impl ToString) -> Self {
        Self {
            code: EXIT_INPUT,
            kind,
            message: message.to_string(),
        }
    }

    fn numeric(kind: &'static str, message: impl ToString) -> Self {
        Self {
            code: EXIT_NUMERIC,
            kind,
            message: message.to_string(),
        }
    }

    /// `error[kind]: message` on a single line.
    fn diagnostic(&self) -> String {
        format!("error[{}]: {}\n", self.kind, self.message.replace('\n', " "))
    }
}

struct Rendered {
    code: i32,
    text: String,
    json: serde_json::Value,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: rendered,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: Failure::input("usage", rendered.lines().next().unwrap_or("invalid arguments"))
                        .diagnostic(),
                },
            };
        }
    };
    match dispatch(&cli) {
        Ok(r) => {
            let body = match cli.format {
                Format::Text => r.text,
                Format::Json => serde_json::to_string_pretty(&r.json).expect("json value serializes") + "\n",
            };
            match &cli.output {
                Some(path) => match fs::write(path, &body) {
                    Ok(()) => Outcome {
                        code: r.code,
                        stdout: String::new(),
                        stderr: String::new(),
                    },
                    Err(e) => Outcome {
                        code: EXIT_INPUT,
                        stdout: String::new(),
                        stderr: Failure::input("io", format!("{}: {e}", path.display())).diagnostic(),
                    },
                },
                None => Outcome {
                    code: r.code,
                    stdout: body,
                    stderr: String::new(),
                },
            }
        }
        Err(f) => Outcome {
            code: f.code,
            stdout: String::new(),
            stderr: f.diagnostic(),
        },
    }
}

fn dispatch(cli: &Cli) -> Result<Rendered, Failure> {
    match &cli.command {
        Command::Dsep { graph, x, y, given } => cmd_dsep(graph, x, y, given),
        Command::Eval { model } => cmd_eval(model),
        Command::Chsh { table, roles } => cmd_chsh(table, roles),
        Command::Lhv { table, roles } => cmd_lhv(table, roles),
        Command::Scenario { name } => cmd_scenario(name),
        Command::Check {
            property,
            seed,
            samples,
        } => cmd_check(*property, *seed, *samples),
        Command::Export { dir } => cmd_export(dir),
    }
}

fn read(path: &FsPath) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input("io", format!("{}: {e}", path.display())))
}

fn load_graph(path: &FsPath) -> Result<CausalGraph, Failure> {
    CausalGraph::from_json_str(&read(path)?).map_err(|e| Failure::input("graph", e))
}

fn load_table(path: &FsPath) -> Result<ExactTable, Failure> {
    ExactTable::from_json_str(&read(path)?).map_err(|e| Failure::input("table", e))
}

fn load_model(path: &FsPath) -> Result<Model, Failure> {
    Model::from_json_str(&read(path)?).map_err(|e| Failure::input("model", e))
}

fn parse_roles(s: &str) -> Result<BellRoles, Failure> {
    BellRoles::parse(s).ok_or_else(|| {
        Failure::input(
            "roles",
            format!("expected 'setting_a,setting_b;outcome_a,outcome_b', got {s:?}"),
        )
    })
}

fn cmd_dsep(graph: &FsPath, x: &[String], y: &[String], given: &[String]) -> Result<Rendered, Failure> {
    let g = load_graph(graph)?;
    let ids = |names: &[String]| g.ids(names).map_err(|e| Failure::input("graph", e));
    let (xs, ys, zs) = (ids(x)?, ids(y)?, ids(given)?);
    let separated = g
        .d_separated_ids(&xs, &ys, &zs)
        .map_err(|e| Failure::input("query", e))?;
    let witness = if separated {
        None
    } else {
        g.active_path(&xs, &ys, &zs)
            .map_err(|e| Failure::input("query", e))?
            .map(|p| g.render_path(&p))
    };
    let mut text = format!("{separated}\n");
    if let Some(w) = &witness {
        writeln!(text, "witness: {w}").unwrap();
    }
    Ok(Rendered {
        code: if separated { EXIT_OK } else { EXIT_NEGATIVE },
        text,
        json: json!({ "x": x, "y": y, "given": given, "separated": separated, "witness": witness }),
    })
}

fn evaluate_exact(model: &Model) -> Result<ExactTable, Failure> {
    let floats = model.evaluate_distribution().map_err(|e| match e {
        QuantumError::ModelInvalid(_) | QuantumError::Parse(_) | QuantumError::IncompleteAssignment(_) => {
            Failure::input("model", e)
        }
        QuantumError::OutOfRange(_) | QuantumError::NotNormalized(_) => Failure::numeric("numeric", e),
    })?;
    causalgap::snap_table(&floats).map_err(|e: SnapError| Failure::numeric("snap", e))
}

fn table_text(t: &ExactTable) -> String {
    let names = t.var_names();
    let mut out = String::new();
    for (a, p) in t.iter() {
        let cells: Vec<String> = names.iter().zip(&a).map(|(n, v)| format!("{n}={v}")).collect();
        writeln!(out, "{}  {}  {:.9}", cells.join(" "), p, p.to_f64()).unwrap();
    }
    out
}

fn cmd_eval(model: &FsPath) -> Result<Rendered, Failure> {
    let m = load_model(model)?;
    let t = evaluate_exact(&m)?;
    Ok(Rendered {
        code: EXIT_OK,
        text: table_text(&t),
        json: serde_json::to_value(t.to_json()).expect("table serializes"),
    })
}

fn lhv_failure(e: LhvError) -> Failure {
    match e {
        LhvError::Internal(_) => Failure::numeric("lhv", e),
        _ => Failure::input("roles", e),
    }
}

fn cmd_chsh(table: &FsPath, roles: &str) -> Result<Rendered, Failure> {
    let t = load_table(table)?;
    let bell = extract_bell(&t, &parse_roles(roles)?).map_err(lhv_failure)?;
    let value = chsh_value(&bell);
    let orbit = chsh_all_symmetries(&bell);
    let exceeds = value > QSqrt2::from_parts(3, 0, 1);
    let mut text = format!("CHSH = {value} ~ {:.9}\n", value.to_f64());
    writeln!(
        text,
        "orbit: {}",
        orbit.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
    )
    .unwrap();
    writeln!(text, "exceeds local bound 3: {exceeds}").unwrap();
    Ok(Rendered {
        code: EXIT_OK,
        text,
        json: json!({
            "value": ExactValue::from(&value),
            "orbit": orbit.iter().map(ExactValue::from).collect::<Vec<_>>(),
            "exceeds_local_bound": exceeds,
        }),
    })
}

fn cmd_lhv(table: &FsPath, roles: &str) -> Result<Rendered, Failure> {
    let t = load_table(table)?;
    let bell = extract_bell(&t, &parse_roles(roles)?).map_err(lhv_failure)?;
    match lhv_feasible(&bell).map_err(lhv_failure)? {
        LhvVerdict::Feasible(weights) => {
            let support: Vec<(usize, &QSqrt2)> = weights.iter().enumerate().filter(|(_, w)| !w.approx_zero()).collect();
            let mut text = String::from("Feasible\n");
            for (k, w) in &support {
                let s = causalgap::lhv::DetStrategy::from_index(*k);
                writeln!(text, "  strategy {k:2} a(x)={:?} b(y)={:?}: {w}", s.a_of_x, s.b_of_y).unwrap();
            }
            Ok(Rendered {
                code: EXIT_OK,
                text,
                json: json!({
                    "verdict": "feasible",
                    "weights": weights.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                }),
            })
        }
        LhvVerdict::Infeasible(ineq) => {
            let cert = certificate_of(&ineq, bell.conditional());
            let mut text = String::from("Infeasible\n");
            writeln!(
                text,
                "certificate: value {} > bound {} (vertex max {})",
                cert.value_on_data.exact, cert.bound, cert.max_over_strategies.exact
            )
            .unwrap();
            for (k, c) in &cert.coefficients {
                if c != "0/1" {
                    writeln!(text, "  P({k}) * {c}").unwrap();
                }
            }
            Ok(Rendered {
                code: EXIT_NEGATIVE,
                text,
                json: json!({ "verdict": "infeasible", "certificate": cert }),
            })
        }
    }
}

fn cmd_scenario(name: &str) -> Result<Rendered, Failure> {
    let name = ScenarioName::parse(name).map_err(|e| Failure::input("scenario", e))?;
    let report = scenarios::run_scenario(name).map_err(|e| match e {
        ScenarioError::UnknownScenario(_) => Failure::input("scenario", e),
        _ => Failure {
            code: EXIT_NEGATIVE,
            kind: "pipeline",
            message: e.to_string(),
        },
    })?;
    Ok(Rendered {
        code: if report.passed { EXIT_OK } else { EXIT_NEGATIVE },
        text: format!("{report}\n"),
        json: serde_json::to_value(&report).expect("report serializes"),
    })
}

#[derive(Serialize)]
struct PropertyJson<'a> {
    property: &'a str,
    samples: usize,
    checks: usize,
    failures: &'a [String],
    passed: bool,
}

fn resolve_seed(seed: Option<u64>) -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::input("seed", format!("{SEED_ENV}={v:?} is not an integer"))),
        Err(_) => Ok(seed.unwrap_or(sampling::DEFAULT_SEED)),
    }
}

fn cmd_check(property: Property, seed: Option<u64>, samples: Option<usize>) -> Result<Rendered, Failure> {
    let seed = resolve_seed(seed)?;
    let table_err = |e: causalgap::TableError| Failure::numeric("table", e);
    let mut reports: Vec<PropertyReport> = Vec::new();
    let wanted = |p: Property| property == p || property == Property::All;
    if wanted(Property::Dsep) {
        reports.push(sampling::dsep_oracle_driver(seed, samples.unwrap_or(200), 7));
    }
    if wanted(Property::Theorem1) {
        reports.push(sampling::theorem1_driver(seed, samples.unwrap_or(100), 5).map_err(table_err)?);
    }
    if wanted(Property::Lemma1) {
        reports.push(sampling::lemma1_driver(seed, samples.unwrap_or(200)));
    }
    if wanted(Property::Lemma3) {
        reports.push(sampling::lemma3_driver(seed, samples.unwrap_or(200)));
    }
    if wanted(Property::G2InG1) {
        reports.push(sampling::g2_in_g1_driver(seed, samples.unwrap_or(100)).map_err(table_err)?);
    }
    let passed = reports.iter().all(|r| r.passed());
    let mut text = String::new();
    for r in &reports {
        writeln!(
            text,
            "{}: {} samples, {} checks, {} failures: {}",
            r.property,
            r.samples,
            r.checks,
            r.failures.len(),
            if r.passed() { "PASS" } else { "FAIL" }
        )
        .unwrap();
        for f in &r.failures {
            writeln!(text, "  {f}").unwrap();
        }
    }
    let json: Vec<PropertyJson> = reports
        .iter()
        .map(|r| PropertyJson {
            property: r.property,
            samples: r.samples,
            checks: r.checks,
            failures: &r.failures,
            passed: r.passed(),
        })
        .collect();
    Ok(Rendered {
        code: if passed { EXIT_OK } else { EXIT_NEGATIVE },
        text,
        json: json!({ "seed": seed, "reports": json }),
    })
}

/// File name and contents of every bundled fixture.
pub fn fixtures() -> Vec<(&'static str, String)> {
    let graph = |g: CausalGraph| serde_json::to_string_pretty(&g.to_json()).expect("graph serializes") + "\n";
    let table = |t: &ExactTable| t.to_json_string() + "\n";
    let table1 = causalgap::snap_table(
        &scenarios::lemma2_model()
            .evaluate_distribution()
            .expect("model evaluates"),
    )
    .expect("model snaps");
    let mut out = vec![
        ("g1.graph.json", graph(scenarios::build_g1())),
        ("g2.graph.json", graph(scenarios::build_g2())),
        ("triangle.graph.json", graph(scenarios::build_triangle())),
        ("lemma2.model.json", scenarios::lemma2_model().to_json_string() + "\n"),
        (
            "triangle.model.json",
            scenarios::fritz_triangle_model().to_json_string() + "\n",
        ),
        ("table1.table.json", table(&table1)),
        (
            "noise.bell.json",
            table(&bell_table(|_, _, _, _| QSqrt2::from_parts(1, 0, 16))),
        ),
    ];
    for (k, name) in DETERMINISTIC_NAMES.iter().enumerate() {
        let s = causalgap::lhv::DetStrategy::from_index(k);
        let t = bell_table(|x, y, a, b| {
            if s.a_of_x[x] == a && s.b_of_y[y] == b {
                QSqrt2::from_parts(1, 0, 4)
            } else {
                QSqrt2::from_parts(0, 0, 1)
            }
        });
        out.push((name, table(&t)));
    }
    out
}

const DETERMINISTIC_NAMES: [&str; 16] = [
    "det00.bell.json",
    "det01.bell.json",
    "det02.bell.json",
    "det03.bell.json",
    "det04.bell.json",
    "det05.bell.json",
    "det06.bell.json",
    "det07.bell.json",
    "det08.bell.json",
    "det09.bell.json",
    "det10.bell.json",
    "det11.bell.json",
    "det12.bell.json",
    "det13.bell.json",
    "det14.bell.json",
    "det15.bell.json",
];

/// Roles of the Bell fixtures.
pub const BELL_FIXTURE_ROLES: &str = "X,Y;A,B";

/// Joint table over `X, Y, A, B` with uniform settings.
fn bell_table<F: Fn(usize, usize, usize, usize) -> QSqrt2>(p: F) -> ExactTable {
    let vars = ["X", "Y", "A", "B"]
        .iter()
        .map(|n| causalgap::Alphabet::new(*n, 2))
        .collect();
    ExactTable::from_fn(vars, |v| p(v[0], v[1], v[2], v[3])).expect("fixture is a distribution")
}

fn cmd_export(dir: &FsPath) -> Result<Rendered, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::input("io", format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, body) in fixtures() {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Failure::input("io", format!("{}: {e}", path.display())))?;
        written.push(name);
    }
    let text = written.iter().map(|n| format!("{n}\n")).collect();
    Ok(Rendered {
        code: EXIT_OK,
        text,
        json: json!({ "written": written }),
    })
}
