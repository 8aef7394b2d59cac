//! Script syntax tree and its canonical printer.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Script {
    pub statements: Vec<Located>,
}

impl Script {
    /// Statements without source positions, for structural comparison.
    pub fn nodes(&self) -> Vec<&Statement> {
        self.statements.iter().map(|s| &s.node).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Located {
    pub node: Statement,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "statement", rename_all = "snake_case")]
pub enum Statement {
    Space {
        n: i64,
        a: Option<Vec<i64>>,
        c2: Option<String>,
    },
    Let {
        name: String,
        value: Expr,
    },
    Bundle {
        name: String,
        def: BundleDef,
    },
    Chi(Expr),
    Dim(Expr),
    Verify {
        check: String,
        target: Option<Expr>,
    },
    Sweep {
        params: Vec<SweepParam>,
        check: String,
    },
    Print(Expr),
    Assert {
        lhs: Expr,
        rhs: Expr,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum BundleDef {
    General {
        rank: i64,
        c1: Expr,
        c2: Expr,
        c3: Option<Expr>,
    },
    /// `c1 = sum b_i e_i`, `c2 = k F`
    Pullback { rank: i64, c1: Vec<i64>, c2: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CmpOp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SweepValue {
    Int(i64),
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepParam {
    pub key: String,
    pub op: CmpOp,
    pub value: SweepValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Expr {
    Int(i64),
    Name(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(String, Vec<Expr>),
    /// `E(L)`: twist of a bundle expression by a class.
    Apply(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Int(_) | Expr::Name(_) | Expr::Call(..) | Expr::Apply(..) => 5,
        }
    }
}

struct Wrapped<'a> {
    expr: &'a Expr,
    parens: bool,
}

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parens {
            write!(f, "({})", self.expr)
        } else {
            write!(f, "{}", self.expr)
        }
    }
}

fn at_least<'a>(expr: &'a Expr, level: u8) -> Wrapped<'a> {
    Wrapped {
        expr,
        parens: expr.precedence() < level,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Name(s) => write!(f, "{s}"),
            Expr::Neg(e) => write!(f, "-{}", at_least(e, 3)),
            Expr::Add(a, b) => write!(f, "{} + {}", at_least(a, 1), at_least(b, 2)),
            Expr::Sub(a, b) => write!(f, "{} - {}", at_least(a, 1), at_least(b, 2)),
            Expr::Mul(a, b) => write!(f, "{}*{}", at_least(a, 2), at_least(b, 3)),
            Expr::Pow(a, k) => write!(f, "{}^{k}", at_least(a, 5)),
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Apply(callee, arg) => {
                // a bare name followed by `(` would read back as a call
                let parens =
                    callee.precedence() < 5 || matches!(**callee, Expr::Name(_) | Expr::Int(_));
                write!(
                    f,
                    "{}({arg})",
                    Wrapped {
                        expr: callee,
                        parens
                    }
                )
            }
        }
    }
}

fn write_ints(f: &mut fmt::Formatter<'_>, values: &[i64]) -> fmt::Result {
    write!(f, "[")?;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{v}")?;
    }
    write!(f, "]")
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Space { n, a, c2 } => {
                write!(f, "space n={n}")?;
                if let Some(a) = a {
                    write!(f, " a=")?;
                    write_ints(f, a)?;
                }
                if let Some(c2) = c2 {
                    write!(f, " c2={c2}")?;
                }
                Ok(())
            }
            Statement::Let { name, value } => write!(f, "let {name} = {value}"),
            Statement::Bundle { name, def } => match def {
                BundleDef::General { rank, c1, c2, c3 } => {
                    write!(f, "bundle {name} rank={rank} c1={c1} c2={c2}")?;
                    if let Some(c3) = c3 {
                        write!(f, " c3={c3}")?;
                    }
                    Ok(())
                }
                BundleDef::Pullback { rank, c1, c2 } => {
                    write!(f, "bundle {name} = bundle(rank={rank}, c1=")?;
                    write_ints(f, c1)?;
                    write!(f, ", c2={c2})")
                }
            },
            Statement::Chi(e) => write!(f, "chi {e}"),
            Statement::Dim(e) => write!(f, "dim {e}"),
            Statement::Verify { check, target } => {
                write!(f, "verify {check}")?;
                if let Some(t) = target {
                    write!(f, " {t}")?;
                }
                Ok(())
            }
            Statement::Sweep { params, check } => {
                write!(f, "sweep")?;
                for p in params {
                    let op = match p.op {
                        CmpOp::Le => "<=",
                        CmpOp::Ge => ">=",
                        CmpOp::Eq => "=",
                    };
                    match &p.value {
                        SweepValue::Int(v) => write!(f, " {}{op}{v}", p.key)?,
                        SweepValue::Word(w) => write!(f, " {}{op}{w}", p.key)?,
                    }
                }
                write!(f, " verify {check}")
            }
            Statement::Print(e) => write!(f, "print {e}"),
            Statement::Assert { lhs, rhs } => write!(f, "assert {lhs} == {rhs}"),
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{}", s.node)?;
        }
        Ok(())
    }
}
