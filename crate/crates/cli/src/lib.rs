//! Command-line front end: `twistor eval|dim|chi|verify|sweep|table`.
//!
//! Exit codes: 0 on success, 1 when a verification or assertion fails,
//! 2 on usage, parse and input errors.

mod args;

use std::ffi::OsString;
use std::fs;
use std::io::Write;

use clap::Parser;
use num_traits::ToPrimitive;
use serde_json::{json, Value as Json};

use twistor_core::bundle::euler_characteristic;
use twistor_core::dsl::{ErrorKind, Interpreter};
use twistor_core::instanton::{
    chi_via, corrupted_ring, moduli_dimension, pullback_bundle, rational_string::render, sweep,
    verify_identity_grid, APolicy, BPolicy, Divisor, IdentitySet, InstantonData, InstantonError,
    Route, SweepConfig, VerificationReport,
};
use twistor_core::twistor::Topology;
use twistor_core::{Bundle, C2Mode, Rational, Space, SpaceError, SpaceOptions};

use args::{
    APolicyArg, BPolicyArg, BundleArgs, ChiArgs, Cli, Command, DimArgs, Divisors, EvalArgs,
    GridArgs, Identity, Mode, Modes, Routes, SpaceArgs, SweepArgs, TableArgs, Vary, VerifyArgs,
};

pub const SCHEMA_VERSION: u64 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// An error that ends the run; `code` is the exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
    position: Option<(usize, usize)>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            kind: "usage",
            message: message.into(),
            position: None,
        }
    }

    fn flag(flag: &str, message: impl std::fmt::Display) -> Self {
        Self::usage(format!("{flag}: {message}"))
    }
}

struct Emit {
    json: bool,
    text: String,
    doc: Json,
    code: i32,
    /// Written to the error stream in text mode.
    diagnostic: Option<String>,
}

impl Emit {
    fn new(json: bool, text: String, doc: Json, code: i32) -> Self {
        Emit {
            json,
            text,
            doc,
            code,
            diagnostic: None,
        }
    }
}

/// Parse `args` (including the program name), run the command and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let json = match &cli.command {
        Command::Eval(a) => a.output.json,
        Command::Dim(a) => a.output.json,
        Command::Chi(a) => a.output.json,
        Command::Verify(a) => a.output.json,
        Command::Sweep(a) => a.output.json,
        Command::Table(a) => a.output.json,
    };
    let result = match cli.command {
        Command::Eval(a) => eval(a),
        Command::Dim(a) => dim(a),
        Command::Chi(a) => chi(a),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Table(a) => table(a),
    };
    match result {
        Ok(emit) => {
            let written = if emit.json {
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&emit.doc).expect("json")
                )
            } else {
                if let Some(d) = &emit.diagnostic {
                    let _ = writeln!(err, "{d}");
                }
                write!(out, "{}", emit.text)
            };
            if written.is_err() {
                return EXIT_USAGE;
            }
            emit.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            if json {
                let mut error = json!({ "kind": f.kind, "message": f.message });
                if let Some((line, column)) = f.position {
                    error["line"] = json!(line);
                    error["column"] = json!(column);
                }
                let doc = envelope("error", json!({ "error": error }));
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
            }
            f.code
        }
    }
}

fn envelope(kind: &str, body: Json) -> Json {
    let mut doc = json!({ "schema": SCHEMA_VERSION, "kind": kind });
    if let (Some(doc), Json::Object(body)) = (doc.as_object_mut(), body) {
        doc.extend(body);
    }
    doc
}

fn mode_of(mode: Mode) -> C2Mode {
    match mode {
        Mode::Paper => C2Mode::Paper,
        Mode::Normalized => C2Mode::Normalized,
    }
}

fn routes_of(routes: Routes) -> Vec<Route> {
    match routes {
        Routes::Standard => vec![Route::Standard],
        Routes::Paper => vec![Route::Paper],
        Routes::Both => Route::ALL.to_vec(),
    }
}

fn build_space(args: &SpaceArgs, n: usize, a: Option<&[i64]>) -> Result<Space, Failure> {
    let a = a.map(<[i64]>::to_vec).unwrap_or_else(|| vec![1; n]);
    let topology = match (args.euler, args.signature) {
        (None, None) => None,
        (euler, signature) => {
            let standard = twistor_core::twistor::euler_and_signature(n);
            Some(Topology {
                euler: euler.unwrap_or(standard.euler),
                signature: signature.unwrap_or(standard.signature),
            })
        }
    };
    let options = SpaceOptions {
        topology,
        ring: args.corrupt_relation.then(|| corrupted_ring(n)),
    };
    Space::build_with(n, &a, mode_of(args.c2_mode), options).map_err(|e| match e {
        SpaceError::LengthMismatch { .. } | SpaceError::BadEntry { .. } => Failure::flag("--a", e),
        other => Failure::usage(other.to_string()),
    })
}

fn instanton_data(args: &BundleArgs, n: usize) -> Result<InstantonData, Failure> {
    if args.rank == 0 {
        return Err(Failure::flag("--rank", "rank must be positive"));
    }
    let b = args
        .c1
        .as_ref()
        .map(|l| l.0.clone())
        .unwrap_or_else(|| vec![0; n]);
    if b.len() != n {
        return Err(Failure::flag(
            "--c1",
            format!("expected {n} entries, got {}", b.len()),
        ));
    }
    Ok(InstantonData {
        rank: args.rank,
        b,
        k: args.k,
    })
}

fn computation(e: InstantonError) -> Failure {
    Failure {
        code: EXIT_USAGE,
        kind: "input",
        message: e.to_string(),
        position: None,
    }
}

fn eval(args: EvalArgs) -> Result<Emit, Failure> {
    let path = args.script.display().to_string();
    let text =
        fs::read_to_string(&args.script).map_err(|e| Failure::usage(format!("{path}: {e}")))?;
    let run = Interpreter::new()
        .with_corrupt_relation(args.corrupt_relation)
        .run_text(&text);
    let code = match &run.error {
        None if run.failed_checks == 0 => EXIT_OK,
        None => EXIT_FAILED,
        Some(e) if e.kind == ErrorKind::AssertionFailed => EXIT_FAILED,
        Some(_) => EXIT_USAGE,
    };
    let doc = envelope(
        "eval",
        json!({
            "script": path,
            "outputs": run.outputs,
            "failed_checks": run.failed_checks,
            "error": run.error,
            "pass": run.passed(),
        }),
    );
    let mut emit = Emit::new(args.output.json, run.text(), doc, code);
    emit.diagnostic = match &run.error {
        Some(e) => Some(format!("error: {path}:{e}")),
        None if run.failed_checks > 0 => Some(format!(
            "error: {path}: {} checks failed",
            run.failed_checks
        )),
        None => None,
    };
    Ok(emit)
}

fn dim(args: DimArgs) -> Result<Emit, Failure> {
    let space = build_space(
        &args.space,
        args.space.n,
        args.space.a.as_ref().map(|l| l.0.as_slice()),
    )?;
    let data = instanton_data(&args.bundle, space.n())?;
    let d = moduli_dimension(&space, &data).map_err(computation)?;
    let text = format!(
        "dimension: {}\nreal dimension: {}\nchi(End(V)(-S)): {}\n",
        d.dimension, d.real_dimension, d.chi
    );
    let doc = envelope(
        "dim",
        json!({ "space": space.doc(), "params": data, "result": d }),
    );
    Ok(Emit::new(args.output.json, text, doc, EXIT_OK))
}

fn chi(args: ChiArgs) -> Result<Emit, Failure> {
    let space = build_space(
        &args.space,
        args.space.n,
        args.space.a.as_ref().map(|l| l.0.as_slice()),
    )?;
    let data = instanton_data(&args.bundle, space.n())?;
    let v = pullback_bundle(&space, &data).map_err(computation)?;
    let divisors = match args.divisor {
        Divisors::S => vec![Divisor::S],
        Divisors::Sbar => vec![Divisor::SBar],
        Divisors::Both => vec![Divisor::S, Divisor::SBar],
    };
    let mut text = String::new();
    let mut results = Vec::new();
    for route in routes_of(args.route) {
        for &d in &divisors {
            let value = chi_via(&space, &v, d, route).map_err(computation)?;
            let label = match d {
                Divisor::S => "S",
                Divisor::SBar => "Sbar",
            };
            text.push_str(&format!("chi(End(V)(-{label})) [{route}]: {value}\n"));
            results.push(json!({
                "route": route,
                "divisor": d,
                "chi": render(&value),
                "integral": value.is_integer(),
            }));
        }
    }
    let doc = envelope(
        "chi",
        json!({ "space": space.doc(), "params": data, "results": results }),
    );
    Ok(Emit::new(args.output.json, text, doc, EXIT_OK))
}

fn grid_config(grid: &GridArgs, default_n_max: usize) -> SweepConfig {
    SweepConfig {
        n_min: grid.n_min,
        n_max: grid.n_max.unwrap_or(default_n_max),
        a_policy: match grid.a_policy {
            APolicyArg::All => APolicy::All,
            APolicyArg::Ones => APolicy::AllOnes,
        },
        r_min: grid.r_min,
        r_max: grid.r_max,
        k_min: grid.k_min,
        k_max: grid.k_max,
        b_policy: match grid.b {
            BPolicyArg::Zero => BPolicy::Zero,
            BPolicyArg::All => BPolicy::All,
            BPolicyArg::Sample => BPolicy::Sample {
                count: grid.samples,
                seed: grid.seed,
            },
        },
        routes: routes_of(grid.route),
        modes: match grid.c2_mode {
            Modes::Paper => vec![C2Mode::Paper],
            Modes::Normalized => vec![C2Mode::Normalized],
            Modes::Both => C2Mode::ALL.to_vec(),
        },
        identities: true,
        corrupt_relation: grid.corrupt_relation,
    }
}

fn range_failure(e: InstantonError) -> Failure {
    match e {
        InstantonError::EmptyRange(which) => {
            Failure::usage(format!("--{which}-min/--{which}-max: empty range"))
        }
        other => computation(other),
    }
}

fn describe_counterexample(report: &VerificationReport) -> String {
    match report.first_counterexample() {
        None => String::new(),
        Some(c) => match &c.params {
            Some(p) => format!(
                "counterexample [{}]: n={} a={:?} c2={} rank={} b={:?} k={} route={}: {}\n",
                c.kind, p.space.n, p.space.a, p.space.c2_mode, p.rank, p.b, p.k, p.route, c.detail
            ),
            None => format!("counterexample [{}]: {}\n", c.kind, c.detail),
        },
    }
}

fn summary(label: &str, report: &VerificationReport) -> String {
    let count = if report.cases.is_empty() {
        format!("{} identities", report.identities.len())
    } else {
        format!(
            "{} cases, {} identities",
            report.cases.len(),
            report.identities.len()
        )
    };
    if report.pass {
        format!("{label}: pass ({count})\n")
    } else {
        format!(
            "{label}: FAIL ({count}, {} counterexamples)\n{}",
            report.counterexamples.len(),
            describe_counterexample(report)
        )
    }
}

fn verify(args: VerifyArgs) -> Result<Emit, Failure> {
    let (label, report) = match (&args.lemma, args.identity) {
        (Some(lemma), None) => {
            if lemma != "2.5" {
                return Err(Failure::flag(
                    "--lemma",
                    format!("unknown lemma `{lemma}` (expected 2.5)"),
                ));
            }
            let config = grid_config(&args.grid, 5);
            (
                "lemma2.5".to_string(),
                sweep(&config).map_err(range_failure)?,
            )
        }
        (None, Some(identity)) => {
            let config = grid_config(&args.grid, 8);
            let (name, set) = match identity {
                Identity::Canonical => ("canonical", IdentitySet::Canonical),
                Identity::Intersections => ("intersections", IdentitySet::Intersections),
                Identity::All => ("all", IdentitySet::All),
            };
            (
                format!("identity {name}"),
                verify_identity_grid(&config, set).map_err(range_failure)?,
            )
        }
        _ => return Err(Failure::usage("give exactly one of --lemma and --identity")),
    };
    let code = if report.pass { EXIT_OK } else { EXIT_FAILED };
    let text = summary(&label, &report);
    let doc = envelope("verify", json!({ "check": label, "report": report }));
    Ok(Emit::new(args.output.json, text, doc, code))
}

fn sweep_cmd(args: SweepArgs) -> Result<Emit, Failure> {
    let config = grid_config(&args.grid, 5);
    let report = sweep(&config).map_err(range_failure)?;
    let mut text = String::from("n,a,c2_mode,rank,b,k,route,chi_S,chi_Sbar,diff,dim\n");
    for c in &report.cases {
        let p = &c.params;
        let join = |v: &[i64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let a: Vec<i64> = p.space.a.iter().map(|&x| x as i64).collect();
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            p.space.n,
            join(&a),
            p.space.c2_mode,
            p.rank,
            join(&p.b),
            p.k,
            p.route,
            c.chi_s,
            c.chi_sbar,
            c.diff,
            c.dim.map(|d| d.to_string()).unwrap_or_default()
        ));
    }
    text.push_str(&summary("lemma2.5", &report));
    let code = if report.pass { EXIT_OK } else { EXIT_FAILED };
    let doc = envelope("sweep", json!({ "report": report }));
    Ok(Emit::new(args.output.json, text, doc, code))
}

fn table(args: TableArgs) -> Result<Emit, Failure> {
    let vary = match args.vary.as_slice() {
        [one] => *one,
        _ => {
            return Err(Failure::flag(
                "--vary",
                "give exactly one parameter to vary",
            ))
        }
    };
    if args.from > args.to {
        return Err(Failure::flag(
            "--from/--to",
            format!("empty range {}..={}", args.from, args.to),
        ));
    }
    if vary == Vary::N {
        if args.space.a.is_some() {
            return Err(Failure::flag(
                "--a",
                "cannot be fixed while n varies (all ones is used)",
            ));
        }
        if args.bundle.c1.is_some() {
            return Err(Failure::flag(
                "--c1",
                "cannot be fixed while n varies (zero is used)",
            ));
        }
        if args.from < 0 {
            return Err(Failure::flag("--from", "n must be non-negative"));
        }
    }
    if vary == Vary::R && args.from < 1 {
        return Err(Failure::flag("--from", "rank must be positive"));
    }

    let mut rows = Vec::new();
    let mut text = String::from("n,A,c2_mode,rank,k,dim,real_dim,chi,chi_O\n");
    for value in args.from..=args.to {
        let n = if vary == Vary::N {
            value as usize
        } else {
            args.space.n
        };
        let a = args.space.a.as_ref().map(|l| l.0.clone());
        let space = build_space(&args.space, n, a.as_deref())?;
        let mut data = instanton_data(
            &BundleArgs {
                rank: args.bundle.rank,
                c1: args.bundle.c1.clone(),
                k: args.bundle.k,
            },
            n,
        )?;
        match vary {
            Vary::K => data.k = value,
            Vary::R => {
                data.rank =
                    u32::try_from(value).map_err(|_| Failure::flag("--to", "rank is too large"))?
            }
            Vary::N => {}
        }
        let v = pullback_bundle(&space, &data).map_err(computation)?;
        let chi = chi_via(&space, &v, Divisor::S, Route::Standard).map_err(computation)?;
        let chi_o = trivial_chi(&space)?;
        // formal data may give a non-integral chi; no dimension then
        let dim = chi
            .is_integer()
            .then(|| (-&chi).to_integer().to_i64())
            .flatten();
        let blank = |d: Option<i64>| d.map(|d| d.to_string()).unwrap_or_default();
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            n,
            space.a_count(),
            space.c2_mode(),
            data.rank,
            data.k,
            blank(dim),
            blank(dim.map(|d| 2 * d)),
            chi,
            chi_o
        ));
        rows.push(json!({
            "space": space.doc(),
            "rank": data.rank,
            "b": data.b,
            "k": data.k,
            "dim": dim,
            "real_dim": dim.map(|d| 2 * d),
            "chi": render(&chi),
            "chi_O": render(&chi_o),
        }));
    }
    let vary_name = match vary {
        Vary::K => "k",
        Vary::R => "r",
        Vary::N => "n",
    };
    let doc = envelope("table", json!({ "vary": vary_name, "rows": rows }));
    Ok(Emit::new(args.output.json, text, doc, EXIT_OK))
}

fn trivial_chi(space: &Space) -> Result<Rational, Failure> {
    let o = Bundle::trivial(space.n(), 1).map_err(|e| Failure::usage(e.to_string()))?;
    euler_characteristic(&o, space)
        .map(|c| c.value)
        .map_err(|e| Failure::usage(e.to_string()))
}
