use std::collections::HashMap;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;
use serde_json::json;

use super::ast::{BundleDef, CmpOp, Expr, Located, Script, Statement, SweepParam, SweepValue};
use super::{parse, DslError, ErrorKind};
use crate::bundle::{euler_characteristic, BundleError};
use crate::instanton::{
    canonical_identity, chi_via, corrupted_ring, moduli_dimension_of, pullback_bundle,
    rational_string, sweep, verify_identities, APolicy, BPolicy, Divisor, InstantonData,
    InstantonError, Route, SweepConfig, VerificationReport,
};
use crate::ring::RingError;
use crate::twistor::{C2Mode, SpaceError, SpaceOptions};
use crate::{Bundle, Class, Rational, Space};

const RESERVED: &[&str] = &[
    "w", "F", "S", "Sbar", "pt", "eta", "sigma", "sigmabar", "c1P", "c2P", "O",
];

const FUNCTIONS: &[&str] = &[
    "End",
    "dual",
    "O",
    "integrate",
    "ch",
    "c1",
    "c2",
    "c3",
    "rank",
    "chi",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Class(Class),
    Bundle(Bundle),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Class(c) => write!(f, "{c}"),
            Value::Bundle(b) => write!(
                f,
                "rank={} c1={} c2={} c3={}",
                b.rank(),
                b.c1(),
                b.c2(),
                b.c3()
            ),
        }
    }
}

/// One line of script output together with its machine-readable form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Output {
    pub line: usize,
    pub statement: String,
    pub text: String,
    pub data: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Execution {
    pub outputs: Vec<Output>,
    /// Number of `verify` and `sweep` statements that reported a failure.
    pub failed_checks: usize,
    pub error: Option<DslError>,
    /// Zero-based index of the statement that raised `error`.
    pub failed_statement: Option<usize>,
}

impl Execution {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.failed_checks == 0
    }

    pub fn text(&self) -> String {
        self.outputs
            .iter()
            .map(|o| format!("{}\n", o.text))
            .collect()
    }
}

/// Evaluation state: the current space and the names bound since it was set.
#[derive(Debug, Default)]
pub struct Interpreter {
    space: Option<Space>,
    env: HashMap<String, Value>,
    corrupt_relation: bool,
}

struct At {
    line: usize,
    column: usize,
}

impl At {
    fn err(&self, kind: ErrorKind, message: impl Into<String>) -> DslError {
        DslError::new(kind, self.line, self.column, message)
    }

    fn ring(&self, e: RingError) -> DslError {
        self.err(ErrorKind::Value, e.to_string())
    }

    fn bundle(&self, e: BundleError) -> DslError {
        match e {
            BundleError::NotHomogeneous { .. } => {
                self.err(ErrorKind::DegreeMismatch, e.to_string())
            }
            other => self.err(ErrorKind::Value, other.to_string()),
        }
    }

    fn instanton(&self, e: InstantonError) -> DslError {
        match e {
            InstantonError::Bundle(b) => self.bundle(b),
            other => self.err(ErrorKind::Value, other.to_string()),
        }
    }

    fn space(&self, e: SpaceError) -> DslError {
        self.err(ErrorKind::Value, e.to_string())
    }
}

fn int(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn chi_json(value: &Rational) -> serde_json::Value {
    json!(rational_string::render(value))
}

impl Interpreter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build every space over the relations with a deliberately wrong point value.
    pub fn with_corrupt_relation(mut self, corrupt: bool) -> Self {
        self.corrupt_relation = corrupt;
        self
    }

    pub fn space(&self) -> Option<&Space> {
        self.space.as_ref()
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        self.env.get(name)
    }

    pub fn run_text(&mut self, text: &str) -> Execution {
        match parse(text) {
            Ok(script) => self.run(&script),
            Err(error) => Execution {
                outputs: Vec::new(),
                failed_checks: 0,
                error: Some(error),
                failed_statement: None,
            },
        }
    }

    /// Execute statements in order, stopping at the first error.
    pub fn run(&mut self, script: &Script) -> Execution {
        let mut outputs = Vec::new();
        let mut failed_checks = 0;
        for (index, located) in script.statements.iter().enumerate() {
            match self.statement(located) {
                Ok(Some((output, pass))) => {
                    if !pass {
                        failed_checks += 1;
                    }
                    outputs.push(output);
                }
                Ok(None) => {}
                Err(error) => {
                    return Execution {
                        outputs,
                        failed_checks,
                        error: Some(error),
                        failed_statement: Some(index),
                    }
                }
            }
        }
        Execution {
            outputs,
            failed_checks,
            error: None,
            failed_statement: None,
        }
    }

    fn current_space(&self, at: &At) -> Result<&Space, DslError> {
        self.space.as_ref().ok_or_else(|| {
            at.err(
                ErrorKind::NoSpace,
                "no `space` statement precedes this statement",
            )
        })
    }

    fn statement(&mut self, located: &Located) -> Result<Option<(Output, bool)>, DslError> {
        let at = At {
            line: located.line,
            column: located.column,
        };
        let output = |text: String, data: serde_json::Value| Output {
            line: located.line,
            statement: located.node.to_string(),
            text,
            data,
        };
        match &located.node {
            Statement::Space { n, a, c2 } => {
                let n = usize::try_from(*n)
                    .map_err(|_| at.err(ErrorKind::Value, "n must be non-negative"))?;
                let a = a.clone().unwrap_or_else(|| vec![1; n]);
                let mode = match c2.as_deref() {
                    None => C2Mode::Paper,
                    Some(m) => m.parse::<C2Mode>().map_err(|e| at.space(e))?,
                };
                let options = SpaceOptions {
                    ring: self.corrupt_relation.then(|| corrupted_ring(n)),
                    ..SpaceOptions::default()
                };
                let space = Space::build_with(n, &a, mode, options).map_err(|e| at.space(e))?;
                let doc = space.doc();
                let text = format!(
                    "space n={} A={} e={} sgn={} c2={}",
                    doc.n, doc.derived.a_count, doc.derived.e, doc.derived.sgn, doc.c2_mode
                );
                self.space = Some(space);
                self.env.clear();
                Ok(Some((output(text, json!({ "space": doc })), true)))
            }
            Statement::Let { name, value } => {
                self.check_bindable(name, &at)?;
                let v = self.eval(value, &at)?;
                self.env.insert(name.clone(), v);
                Ok(None)
            }
            Statement::Bundle { name, def } => {
                self.check_bindable(name, &at)?;
                let bundle = self.define_bundle(def, &at)?;
                self.env.insert(name.clone(), Value::Bundle(bundle));
                Ok(None)
            }
            Statement::Chi(expr) => {
                let bundle = self.eval_bundle(expr, &at)?;
                let space = self.current_space(&at)?;
                let chi = euler_characteristic(&bundle, space).map_err(|e| at.ring(e))?;
                let mut text = format!("chi({expr}) = {}", chi.value);
                if !chi.integral {
                    text.push_str(" (not integral)");
                }
                let data = json!({ "expr": expr.to_string(), "chi": chi_json(&chi.value), "integral": chi.integral });
                Ok(Some((output(text, data), true)))
            }
            Statement::Dim(expr) => {
                let bundle = self.eval_bundle(expr, &at)?;
                let space = self.current_space(&at)?;
                let dim = moduli_dimension_of(space, &bundle).map_err(|e| at.instanton(e))?;
                let text = format!("dimension: {}", dim.dimension);
                let data = serde_json::to_value(&dim).expect("dimension serializes");
                Ok(Some((output(text, data), true)))
            }
            Statement::Verify { check, target } => {
                let (pass, data) = self.verify(check, target.as_ref(), &at)?;
                let text = format!("verify {check}: {}", if pass { "pass" } else { "FAIL" });
                Ok(Some((output(text, data), pass)))
            }
            Statement::Sweep { params, check } => {
                if check != "lemma2.5" {
                    return Err(at.err(ErrorKind::Value, format!("sweep cannot check `{check}`")));
                }
                let config = self.sweep_config(params, &at)?;
                let report = sweep(&config).map_err(|e| at.instanton(e))?;
                let text = sweep_summary(check, &report);
                let data = serde_json::to_value(&report).expect("report serializes");
                Ok(Some((output(text, data), report.pass)))
            }
            Statement::Print(expr) => {
                let v = self.eval(expr, &at)?;
                let data = match &v {
                    Value::Class(c) => json!({ "class": c.to_string() }),
                    Value::Bundle(b) => json!({
                        "rank": b.rank(),
                        "c1": b.c1().to_string(),
                        "c2": b.c2().to_string(),
                        "c3": b.c3().to_string(),
                    }),
                };
                Ok(Some((output(v.to_string(), data), true)))
            }
            Statement::Assert { lhs, rhs } => {
                let l = self.eval(lhs, &at)?;
                let r = self.eval(rhs, &at)?;
                if l != r {
                    return Err(at.err(
                        ErrorKind::AssertionFailed,
                        format!("`{lhs}` is {l} but `{rhs}` is {r}"),
                    ));
                }
                Ok(None)
            }
        }
    }

    fn check_bindable(&self, name: &str, at: &At) -> Result<(), DslError> {
        if RESERVED.contains(&name) || generator_index(name).is_some() || FUNCTIONS.contains(&name)
        {
            return Err(at.err(ErrorKind::Type, format!("`{name}` is a reserved name")));
        }
        Ok(())
    }

    fn define_bundle(&self, def: &BundleDef, at: &At) -> Result<Bundle, DslError> {
        let space = self.current_space(at)?;
        match def {
            BundleDef::General { rank, c1, c2, c3 } => {
                let rank = positive_rank(*rank, at)?;
                let c1 = self.eval_class(c1, at)?;
                let c2 = self.eval_class(c2, at)?;
                let c3 = match c3 {
                    Some(e) => self.eval_class(e, at)?,
                    None => Class::zero(space.n()),
                };
                Bundle::new(rank, c1, c2, c3).map_err(|e| at.bundle(e))
            }
            BundleDef::Pullback { rank, c1, c2 } => {
                let data = InstantonData {
                    rank: positive_rank(*rank, at)?,
                    b: c1.clone(),
                    k: *c2,
                };
                pullback_bundle(space, &data).map_err(|e| at.instanton(e))
            }
        }
    }

    fn verify(
        &self,
        check: &str,
        target: Option<&Expr>,
        at: &At,
    ) -> Result<(bool, serde_json::Value), DslError> {
        let space = self.current_space(at)?;
        let no_target = |check: &str| -> Result<(), DslError> {
            match target {
                Some(_) => Err(at.err(
                    ErrorKind::Type,
                    format!("`verify {check}` takes no argument"),
                )),
                None => Ok(()),
            }
        };
        match check {
            "canonical" => {
                no_target(check)?;
                let record = canonical_identity(space);
                Ok((
                    record.pass,
                    serde_json::to_value(&record).expect("record serializes"),
                ))
            }
            "identities" => {
                no_target(check)?;
                let report = verify_identities(space).map_err(|e| at.instanton(e))?;
                Ok((
                    report.pass,
                    serde_json::to_value(&report).expect("report serializes"),
                ))
            }
            "lemma2.5" => {
                let expr = target
                    .ok_or_else(|| at.err(ErrorKind::Type, "`verify lemma2.5` needs a bundle"))?;
                let bundle = self.eval_bundle(expr, at)?;
                let mut routes = Vec::new();
                let mut pass = true;
                for route in Route::ALL {
                    let s =
                        chi_via(space, &bundle, Divisor::S, route).map_err(|e| at.instanton(e))?;
                    let sbar = chi_via(space, &bundle, Divisor::SBar, route)
                        .map_err(|e| at.instanton(e))?;
                    let diff = &s - &sbar;
                    pass &= diff.is_zero();
                    routes.push(json!({
                        "route": route,
                        "chi_S": chi_json(&s),
                        "chi_Sbar": chi_json(&sbar),
                        "diff": chi_json(&diff),
                    }));
                }
                Ok((
                    pass,
                    json!({ "space": space.doc(), "routes": routes, "pass": pass }),
                ))
            }
            other => Err(at.err(ErrorKind::Value, format!("unknown check `{other}`"))),
        }
    }

    fn sweep_config(&self, params: &[SweepParam], at: &At) -> Result<SweepConfig, DslError> {
        let mut config = SweepConfig {
            corrupt_relation: self.corrupt_relation,
            ..SweepConfig::default()
        };
        let mut samples = 16;
        let mut seed = 0;
        let mut sampled = false;
        for p in params {
            let bad = || {
                at.err(
                    ErrorKind::Value,
                    format!("invalid sweep parameter `{}`", p.key),
                )
            };
            let int_value = || match p.value {
                SweepValue::Int(v) => Ok(v),
                SweepValue::Word(_) => Err(bad()),
            };
            let word = || match &p.value {
                SweepValue::Word(w) => Ok(w.as_str()),
                SweepValue::Int(_) => Err(bad()),
            };
            let eq_only = || {
                if p.op == CmpOp::Eq {
                    Ok(())
                } else {
                    Err(bad())
                }
            };
            match p.key.as_str() {
                "n" => {
                    let v = usize::try_from(int_value()?).map_err(|_| bad())?;
                    bound(p.op, v, &mut config.n_min, &mut config.n_max);
                }
                "r" => {
                    let v = u32::try_from(int_value()?).map_err(|_| bad())?;
                    bound(p.op, v, &mut config.r_min, &mut config.r_max);
                }
                "k" => bound(p.op, int_value()?, &mut config.k_min, &mut config.k_max),
                "mode" => {
                    eq_only()?;
                    config.modes = match word()? {
                        "both" => C2Mode::ALL.to_vec(),
                        m => vec![m.parse::<C2Mode>().map_err(|_| bad())?],
                    };
                }
                "route" => {
                    eq_only()?;
                    config.routes = match word()? {
                        "both" => Route::ALL.to_vec(),
                        r => vec![r.parse::<Route>().map_err(|_| bad())?],
                    };
                }
                "a" => {
                    eq_only()?;
                    config.a_policy = match word()? {
                        "all" => APolicy::All,
                        "ones" => APolicy::AllOnes,
                        _ => return Err(bad()),
                    };
                }
                "b" => {
                    eq_only()?;
                    config.b_policy = match word()? {
                        "zero" => BPolicy::Zero,
                        "all" => BPolicy::All,
                        "sample" => {
                            sampled = true;
                            BPolicy::Zero
                        }
                        _ => return Err(bad()),
                    };
                }
                "samples" => {
                    eq_only()?;
                    samples = usize::try_from(int_value()?).map_err(|_| bad())?;
                }
                "seed" => {
                    eq_only()?;
                    seed = u64::try_from(int_value()?).map_err(|_| bad())?;
                }
                _ => return Err(bad()),
            }
        }
        if sampled {
            config.b_policy = BPolicy::Sample {
                count: samples,
                seed,
            };
        }
        Ok(config)
    }

    fn eval_class(&self, expr: &Expr, at: &At) -> Result<Class, DslError> {
        match self.eval(expr, at)? {
            Value::Class(c) => Ok(c),
            Value::Bundle(_) => Err(at.err(
                ErrorKind::Type,
                format!("`{expr}` is a bundle, expected a class"),
            )),
        }
    }

    fn eval_bundle(&self, expr: &Expr, at: &At) -> Result<Bundle, DslError> {
        match self.eval(expr, at)? {
            Value::Bundle(b) => Ok(b),
            Value::Class(_) => Err(at.err(
                ErrorKind::Type,
                format!("`{expr}` is a class, expected a bundle"),
            )),
        }
    }

    fn twist(&self, bundle: &Bundle, arg: &Expr, at: &At) -> Result<Value, DslError> {
        let space = self.current_space(at)?;
        let l = self.eval_class(arg, at)?;
        if !l.is_homogeneous_of(2) {
            return Err(at.err(
                ErrorKind::DegreeMismatch,
                format!("twist by `{arg}` needs a degree-2 class"),
            ));
        }
        Ok(Value::Bundle(
            bundle.twist(&l, space.ring()).map_err(|e| at.bundle(e))?,
        ))
    }

    fn eval(&self, expr: &Expr, at: &At) -> Result<Value, DslError> {
        let space = self.current_space(at)?;
        let ring = space.ring();
        let n = space.n();
        let class = |e: &Expr| self.eval_class(e, at);
        match expr {
            Expr::Int(v) => Ok(Value::Class(Class::constant(n, int(*v)))),
            Expr::Name(name) => self.name(name, at),
            Expr::Neg(e) => Ok(Value::Class(class(e)?.neg())),
            Expr::Add(a, b) => Ok(Value::Class(
                class(a)?.add(&class(b)?).map_err(|e| at.ring(e))?,
            )),
            Expr::Sub(a, b) => Ok(Value::Class(
                class(a)?.sub(&class(b)?).map_err(|e| at.ring(e))?,
            )),
            Expr::Mul(a, b) => Ok(Value::Class(
                ring.mul(&class(a)?, &class(b)?).map_err(|e| at.ring(e))?,
            )),
            Expr::Pow(a, k) => Ok(Value::Class(
                ring.pow(&class(a)?, *k).map_err(|e| at.ring(e))?,
            )),
            Expr::Apply(callee, arg) => {
                let bundle = self.eval_bundle(callee, at)?;
                self.twist(&bundle, arg, at)
            }
            Expr::Call(name, args) => {
                if let Some(Value::Bundle(b)) = self.env.get(name) {
                    let [arg] = args.as_slice() else {
                        return Err(at.err(
                            ErrorKind::Type,
                            format!("twist `{name}(...)` takes one class"),
                        ));
                    };
                    return self.twist(b, arg, at);
                }
                self.call(name, args, at)
            }
        }
    }

    fn call(&self, name: &str, args: &[Expr], at: &At) -> Result<Value, DslError> {
        let space = self.current_space(at)?;
        let ring = space.ring();
        let n = space.n();
        if !FUNCTIONS.contains(&name) {
            return Err(at.err(
                ErrorKind::UnboundIdentifier,
                format!("unknown function `{name}`"),
            ));
        }
        let [arg] = args else {
            return Err(at.err(
                ErrorKind::Type,
                format!("`{name}` takes exactly one argument"),
            ));
        };
        let constant = |v: Rational| Value::Class(Class::constant(n, v));
        match name {
            "O" => {
                let l = self.eval_class(arg, at)?;
                if !l.is_homogeneous_of(2) {
                    return Err(at.err(
                        ErrorKind::DegreeMismatch,
                        format!("O(`{arg}`) needs a degree-2 class"),
                    ));
                }
                Ok(Value::Bundle(Bundle::line(l).map_err(|e| at.bundle(e))?))
            }
            "integrate" => Ok(constant(self.eval_class(arg, at)?.integrate())),
            _ => {
                let b = self.eval_bundle(arg, at)?;
                Ok(match name {
                    "End" => Value::Bundle(b.end_bundle(ring).map_err(|e| at.bundle(e))?),
                    "dual" => Value::Bundle(b.dual()),
                    "ch" => Value::Class(
                        b.chern_character(ring)
                            .map_err(|e| at.ring(e))?
                            .total()
                            .clone(),
                    ),
                    "c1" => Value::Class(b.c1().clone()),
                    "c2" => Value::Class(b.c2().clone()),
                    "c3" => Value::Class(b.c3().clone()),
                    "rank" => constant(int(b.rank() as i64)),
                    "chi" => constant(
                        euler_characteristic(&b, space)
                            .map_err(|e| at.ring(e))?
                            .value,
                    ),
                    _ => unreachable!("function list is exhaustive"),
                })
            }
        }
    }

    fn name(&self, name: &str, at: &At) -> Result<Value, DslError> {
        if let Some(v) = self.env.get(name) {
            return Ok(v.clone());
        }
        let space = self.current_space(at)?;
        let class = |c: &Class| Ok(Value::Class(c.clone()));
        match name {
            "w" => class(space.omega()),
            "F" => class(space.fibre()),
            "S" => class(space.s()),
            "Sbar" => class(space.s_bar()),
            "pt" => Ok(Value::Class(space.point())),
            "eta" => class(space.eta()),
            "sigma" => class(space.sigma()),
            "sigmabar" => class(space.sigma_bar()),
            "c1P" => class(space.c1()),
            "c2P" => class(space.c2()),
            "O" => Ok(Value::Bundle(
                Bundle::line(Class::zero(space.n())).map_err(|e| at.bundle(e))?,
            )),
            _ => match generator_index(name) {
                Some(i) if (1..=space.n()).contains(&i) => {
                    Ok(Value::Class(space.eta_i(i).map_err(|e| at.ring(e))?))
                }
                Some(i) => Err(at.err(
                    ErrorKind::UnboundGenerator,
                    format!("generator `e{i}` does not exist for n = {}", space.n()),
                )),
                None => Err(at.err(
                    ErrorKind::UnboundIdentifier,
                    format!("`{name}` is not defined"),
                )),
            },
        }
    }
}

fn positive_rank(rank: i64, at: &At) -> Result<u32, DslError> {
    u32::try_from(rank).ok().filter(|r| *r > 0).ok_or_else(|| {
        at.err(
            ErrorKind::Value,
            format!("rank must be a positive integer, got {rank}"),
        )
    })
}

fn bound<T: Copy>(op: CmpOp, v: T, min: &mut T, max: &mut T) {
    match op {
        CmpOp::Le => *max = v,
        CmpOp::Ge => *min = v,
        CmpOp::Eq => {
            *min = v;
            *max = v;
        }
    }
}

/// `e<digits>` names the generator with that index.
fn generator_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('e')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(digits.parse().unwrap_or(usize::MAX))
}

fn sweep_summary(check: &str, report: &VerificationReport) -> String {
    match report.first_counterexample() {
        None => format!("sweep {check}: pass ({} cases)", report.cases.len()),
        Some(c) => format!(
            "sweep {check}: FAIL ({} cases, {} counterexamples; first: {} {})",
            report.cases.len(),
            report.counterexamples.len(),
            c.kind,
            c.detail
        ),
    }
}
