//! The graded ring `H^even(P)` of a twistor space over `#n(-CP2)`.
//!
//! The ring is generated by `w` (omega) and `e1..en` (eta_i), all of degree 2,
//! subject to
//!
//! ```text
//! e_i * e_j  -> 0                          (i != j)
//! e_i^2      -> -w^2 - sum_j w*e_j          (= -[F])
//! deg > 6    -> 0
//! w^3        -> (1 - n) [pt]
//! w^2 * e_i  -> [pt]
//! ```
//!
//! Every class is stored in the normal-form basis
//! `{1} | {w, e1..en} | {w^2, w*e1..w*en} | {pt}`.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::scalar::Scalar;

/// Top real degree of the threefold.
pub const TOP_DEGREE: u64 = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("presentation mismatch: expected {expected} eta generators, found {found}")]
    PresentationMismatch { expected: usize, found: usize },
    #[error("generator e{index} does not exist for n = {n}")]
    UnknownGenerator { index: usize, n: usize },
    #[error("cannot parse class at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

/// A normal-form basis monomial. Eta indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    One,
    Omega,
    Eta(usize),
    OmegaSq,
    OmegaEta(usize),
    Point,
}

impl Basis {
    /// Every basis element for `n` eta generators, in storage order.
    pub fn all(n: usize) -> impl Iterator<Item = Basis> {
        (0..basis_len(n)).map(move |i| basis_at(n, i))
    }

    pub fn degree(self) -> u64 {
        match self {
            Basis::One => 0,
            Basis::Omega | Basis::Eta(_) => 2,
            Basis::OmegaSq | Basis::OmegaEta(_) => 4,
            Basis::Point => 6,
        }
    }

    /// The raw monomial this basis element stands for.
    pub fn to_raw(self, n: usize) -> RawMonomial {
        let mut m = RawMonomial::one(n);
        match self {
            Basis::One => {}
            Basis::Omega => m.omega = 1,
            Basis::Eta(i) => m.eta[i - 1] = 1,
            Basis::OmegaSq => m.omega = 2,
            Basis::OmegaEta(i) => {
                m.omega = 1;
                m.eta[i - 1] = 1;
            }
            Basis::Point => m.point = 1,
        }
        m
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::One => write!(f, "1"),
            Basis::Omega => write!(f, "w"),
            Basis::Eta(i) => write!(f, "e{i}"),
            Basis::OmegaSq => write!(f, "w^2"),
            Basis::OmegaEta(i) => write!(f, "w*e{i}"),
            Basis::Point => write!(f, "pt"),
        }
    }
}

/// An arbitrary product `w^a * e1^b1 * ... * en^bn * pt^c`, not yet reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawMonomial {
    pub omega: u32,
    pub eta: Vec<u32>,
    pub point: u32,
}

impl RawMonomial {
    pub fn one(n: usize) -> Self {
        RawMonomial {
            omega: 0,
            eta: vec![0; n],
            point: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.eta.len()
    }

    pub fn degree(&self) -> u64 {
        let gens = self.omega as u64 + self.eta.iter().map(|&e| e as u64).sum::<u64>();
        2 * gens + TOP_DEGREE * self.point as u64
    }

    /// Product of monomials over the same generator set.
    pub fn times(&self, other: &RawMonomial) -> RawMonomial {
        debug_assert_eq!(self.n(), other.n());
        RawMonomial {
            omega: self.omega.saturating_add(other.omega),
            eta: self
                .eta
                .iter()
                .zip(&other.eta)
                .map(|(a, b)| a.saturating_add(*b))
                .collect(),
            point: self.point.saturating_add(other.point),
        }
    }
}

/// A formal linear combination of raw monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPolynomial<T> {
    pub n: usize,
    pub terms: Vec<(T, RawMonomial)>,
}

impl<T: Scalar> RawPolynomial<T> {
    pub fn new(n: usize) -> Self {
        RawPolynomial {
            n,
            terms: Vec::new(),
        }
    }

    pub fn push(&mut self, coeff: T, monomial: RawMonomial) -> &mut Self {
        self.terms.push((coeff, monomial));
        self
    }
}

/// Position of a basis monomial in the dense coefficient layout
/// `[1, w, e1..en, w^2, w*e1..w*en, pt]`.
fn basis_index(n: usize, b: Basis) -> usize {
    match b {
        Basis::One => 0,
        Basis::Omega => 1,
        Basis::Eta(i) => 1 + i,
        Basis::OmegaSq => n + 2,
        Basis::OmegaEta(i) => n + 2 + i,
        Basis::Point => 2 * n + 3,
    }
}

fn basis_at(n: usize, index: usize) -> Basis {
    match index {
        0 => Basis::One,
        1 => Basis::Omega,
        i if i <= n + 1 => Basis::Eta(i - 1),
        i if i == n + 2 => Basis::OmegaSq,
        i if i <= 2 * n + 2 => Basis::OmegaEta(i - n - 2),
        _ => Basis::Point,
    }
}

fn basis_len(n: usize) -> usize {
    2 * n + 4
}

/// Normal forms of all products of two basis monomials, indexed by
/// `i * len + j`.
type ProductTable = Vec<Vec<(usize, i64)>>;

/// Relations of `H^even(P)` for a given number of eta generators.
///
/// The degree-6 evaluations are kept explicit so that a deliberately broken
/// presentation can be built for negative-control runs.
#[derive(Debug, Clone)]
pub struct RingPresentation {
    n: usize,
    omega_cubed: i64,
    omega_sq_eta: Vec<i64>,
    table: OnceLock<ProductTable>,
    pairing: OnceLock<Vec<Vec<(usize, i64)>>>,
}

impl PartialEq for RingPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.omega_cubed == other.omega_cubed
            && self.omega_sq_eta == other.omega_sq_eta
    }
}

impl Eq for RingPresentation {}

impl RingPresentation {
    pub fn new(n: usize) -> Self {
        RingPresentation {
            n,
            omega_cubed: 1 - n as i64,
            omega_sq_eta: vec![1; n],
            table: OnceLock::new(),
            pairing: OnceLock::new(),
        }
    }

    /// A presentation with non-standard values for `w^3` and `w^2 e_i`.
    pub fn with_point_values(
        n: usize,
        omega_cubed: i64,
        omega_sq_eta: Vec<i64>,
    ) -> Result<Self, RingError> {
        if omega_sq_eta.len() != n {
            return Err(RingError::PresentationMismatch {
                expected: n,
                found: omega_sq_eta.len(),
            });
        }
        Ok(RingPresentation {
            n,
            omega_cubed,
            omega_sq_eta,
            table: OnceLock::new(),
            pairing: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega_cubed(&self) -> i64 {
        self.omega_cubed
    }

    pub fn omega_sq_eta(&self) -> &[i64] {
        &self.omega_sq_eta
    }

    /// Whether this presentation carries the relations of an actual twistor space.
    pub fn is_standard(&self) -> bool {
        *self == RingPresentation::new(self.n)
    }

    fn check<T>(&self, class: &CohomologyClass<T>) -> Result<(), RingError> {
        if class.n != self.n {
            return Err(RingError::PresentationMismatch {
                expected: self.n,
                found: class.n,
            });
        }
        Ok(())
    }

    pub fn generator<T: Scalar>(&self, basis: Basis) -> Result<CohomologyClass<T>, RingError> {
        CohomologyClass::basis(self.n, basis)
    }

    pub fn omega<T: Scalar>(&self) -> CohomologyClass<T> {
        CohomologyClass::basis(self.n, Basis::Omega).expect("omega always exists")
    }

    pub fn eta_i<T: Scalar>(&self, i: usize) -> Result<CohomologyClass<T>, RingError> {
        CohomologyClass::basis(self.n, Basis::Eta(i))
    }

    /// Rewrite an arbitrary combination of monomials into normal form.
    pub fn normalize<T: Scalar>(
        &self,
        raw: &RawPolynomial<T>,
    ) -> Result<CohomologyClass<T>, RingError> {
        if raw.n != self.n {
            return Err(RingError::PresentationMismatch {
                expected: self.n,
                found: raw.n,
            });
        }
        let mut acc = CohomologyClass::zero(self.n);
        for (coeff, monomial) in &raw.terms {
            if monomial.n() != self.n {
                return Err(RingError::PresentationMismatch {
                    expected: self.n,
                    found: monomial.n(),
                });
            }
            self.reduce_into(coeff.clone(), monomial.clone(), &mut acc);
        }
        Ok(acc)
    }

    fn reduce_into<T: Scalar>(&self, coeff: T, m: RawMonomial, acc: &mut CohomologyClass<T>) {
        if coeff.is_zero() || m.degree() > TOP_DEGREE {
            return;
        }
        let n = self.n;
        let slot = |b: Basis| basis_index(n, b);
        if m.point > 0 {
            // degree <= 6 leaves pt alone
            acc.coeffs[slot(Basis::Point)] += coeff;
            return;
        }
        let mut support = m.eta.iter().enumerate().filter(|(_, &e)| e > 0);
        let first = support.next().map(|(i, &e)| (i, e));
        if support.next().is_some() {
            return;
        }
        match first {
            None => match m.omega {
                0 => acc.coeffs[slot(Basis::One)] += coeff,
                1 => acc.coeffs[slot(Basis::Omega)] += coeff,
                2 => acc.coeffs[slot(Basis::OmegaSq)] += coeff,
                _ => acc.coeffs[slot(Basis::Point)] += coeff * T::from_int(self.omega_cubed),
            },
            Some((i, e)) if e >= 2 => {
                let mut rest = m;
                rest.eta[i] -= 2;
                let mut t = rest.clone();
                t.omega += 2;
                self.reduce_into(-coeff.clone(), t, acc);
                for j in 0..n {
                    let mut t = rest.clone();
                    t.omega += 1;
                    t.eta[j] += 1;
                    self.reduce_into(-coeff.clone(), t, acc);
                }
            }
            Some((i, _)) => match m.omega {
                0 => acc.coeffs[slot(Basis::Eta(i + 1))] += coeff,
                1 => acc.coeffs[slot(Basis::OmegaEta(i + 1))] += coeff,
                _ => acc.coeffs[slot(Basis::Point)] += coeff * T::from_int(self.omega_sq_eta[i]),
            },
        }
    }

    fn table(&self) -> &ProductTable {
        self.table.get_or_init(|| {
            let len = basis_len(self.n);
            let mut table = Vec::with_capacity(len * len);
            for i in 0..len {
                for j in 0..len {
                    let (bi, bj) = (basis_at(self.n, i), basis_at(self.n, j));
                    let mut acc = CohomologyClass::<i64>::zero(self.n);
                    if bi.degree() + bj.degree() <= TOP_DEGREE {
                        let m = bi.to_raw(self.n).times(&bj.to_raw(self.n));
                        self.reduce_into(1, m, &mut acc);
                    }
                    table.push(
                        acc.coeffs
                            .iter()
                            .enumerate()
                            .filter(|(_, c)| **c != 0)
                            .map(|(k, c)| (k, *c))
                            .collect(),
                    );
                }
            }
            table
        })
    }

    /// For each basis index `i`, the `(j, c)` with `b_i * b_j = c [pt]`, `c != 0`.
    fn pairing_rows(&self) -> &[Vec<(usize, i64)>] {
        self.pairing.get_or_init(|| {
            let len = basis_len(self.n);
            let point = basis_index(self.n, Basis::Point);
            let table = self.table();
            (0..len)
                .map(|i| {
                    (0..len)
                        .filter_map(|j| {
                            let entry = &table[i * len + j];
                            entry
                                .iter()
                                .find(|(k, _)| *k == point)
                                .map(|&(_, c)| (j, c))
                        })
                        .collect()
                })
                .collect()
        })
    }

    /// `integrate(a * b)` without forming the lower-degree part of the product.
    pub fn pairing<T: Scalar>(
        &self,
        a: &CohomologyClass<T>,
        b: &CohomologyClass<T>,
    ) -> Result<T, RingError> {
        self.check(a)?;
        self.check(b)?;
        let mut acc = T::zero();
        for (ca, row) in a.coeffs.iter().zip(self.pairing_rows()) {
            if ca.is_zero() {
                continue;
            }
            for &(j, c) in row {
                let cb = &b.coeffs[j];
                if cb.is_zero() {
                    continue;
                }
                let product = ca.clone() * cb.clone();
                acc += if c == 1 {
                    product
                } else {
                    product * T::from_int(c)
                };
            }
        }
        Ok(acc)
    }

    /// Product in the ring. Basis products are reduced once by the rewrite
    /// rules and cached.
    pub fn mul<T: Scalar>(
        &self,
        a: &CohomologyClass<T>,
        b: &CohomologyClass<T>,
    ) -> Result<CohomologyClass<T>, RingError> {
        self.check(a)?;
        self.check(b)?;
        let table = self.table();
        let len = basis_len(self.n);
        let mut acc = CohomologyClass::zero(self.n);
        for (i, ca) in a.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            for (j, cb) in b.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                let entry = &table[i * len + j];
                if entry.is_empty() {
                    continue;
                }
                let product = ca.clone() * cb.clone();
                for &(k, c) in entry {
                    if c == 1 {
                        acc.coeffs[k] += product.clone();
                    } else {
                        acc.coeffs[k] += product.clone() * T::from_int(c);
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Product of several classes, left to right.
    pub fn product<T: Scalar>(
        &self,
        factors: &[&CohomologyClass<T>],
    ) -> Result<CohomologyClass<T>, RingError> {
        let mut acc = CohomologyClass::one(self.n);
        for f in factors {
            acc = self.mul(&acc, f)?;
        }
        Ok(acc)
    }

    pub fn pow<T: Scalar>(
        &self,
        a: &CohomologyClass<T>,
        exp: u32,
    ) -> Result<CohomologyClass<T>, RingError> {
        self.check(a)?;
        let mut acc = CohomologyClass::one(self.n);
        for _ in 0..exp {
            acc = self.mul(&acc, a)?;
        }
        Ok(acc)
    }

    /// Parse the canonical rendering produced by `Display`, e.g. `3*w^2 + 2*w*e1 - 1/6*pt`.
    pub fn parse_class<T: Scalar>(&self, text: &str) -> Result<CohomologyClass<T>, RingError> {
        CanonicalParser::new(text, self.n).parse()
    }
}

/// An element of `H^even(P)` in normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct CohomologyClass<T> {
    n: usize,
    /// `[1, w, e1..en, w^2, w*e1..w*en, pt]`
    coeffs: Vec<T>,
}

impl<T: Scalar> CohomologyClass<T> {
    pub fn zero(n: usize) -> Self {
        CohomologyClass {
            n,
            coeffs: vec![T::zero(); basis_len(n)],
        }
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, T::one())
    }

    pub fn constant(n: usize, value: T) -> Self {
        let mut c = Self::zero(n);
        c.coeffs[0] = value;
        c
    }

    pub fn basis(n: usize, b: Basis) -> Result<Self, RingError> {
        let mut c = Self::zero(n);
        *c.slot_mut(b)? = T::one();
        Ok(c)
    }

    /// Build a class from `(basis, coefficient)` pairs; repeated entries add up.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self, RingError>
    where
        I: IntoIterator<Item = (Basis, T)>,
    {
        let mut c = Self::zero(n);
        for (b, coeff) in terms {
            *c.slot_mut(b)? += coeff;
        }
        Ok(c)
    }

    /// `sum_i coeffs[i] * e_{i+1}`
    pub fn eta_combination(coeffs: &[T]) -> Self {
        let n = coeffs.len();
        let mut c = Self::zero(n);
        for (i, v) in coeffs.iter().enumerate() {
            c.coeffs[basis_index(n, Basis::Eta(i + 1))] = v.clone();
        }
        c
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slot_mut(&mut self, b: Basis) -> Result<&mut T, RingError> {
        if let Basis::Eta(i) | Basis::OmegaEta(i) = b {
            if i == 0 || i > self.n {
                return Err(RingError::UnknownGenerator {
                    index: i,
                    n: self.n,
                });
            }
        }
        Ok(&mut self.coeffs[basis_index(self.n, b)])
    }

    pub fn coefficient(&self, b: Basis) -> T {
        match b {
            Basis::Eta(i) | Basis::OmegaEta(i) if i == 0 || i > self.n => T::zero(),
            _ => self.coeffs[basis_index(self.n, b)].clone(),
        }
    }

    /// Nonzero terms, ordered by degree then by basis index.
    pub fn terms(&self) -> impl Iterator<Item = (Basis, &T)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (basis_at(self.n, i), c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self, RingError> {
        if self.n != other.n {
            return Err(RingError::PresentationMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(CohomologyClass {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, RingError> {
        self.zip_with(other, |a, b| {
            if b.is_zero() {
                a.clone()
            } else if a.is_zero() {
                b.clone()
            } else {
                a.clone() + b.clone()
            }
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, RingError> {
        self.zip_with(other, |a, b| {
            if b.is_zero() {
                a.clone()
            } else {
                a.clone() - b.clone()
            }
        })
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return CohomologyClass::zero(self.n);
        }
        self.map(|x| {
            if x.is_zero() {
                T::zero()
            } else {
                x.clone() * c.clone()
            }
        })
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> CohomologyClass<U> {
        CohomologyClass {
            n: self.n,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// The part of real degree `degree` (0, 2, 4 or 6).
    pub fn component(&self, degree: u64) -> Self {
        let n = self.n;
        CohomologyClass {
            n,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if basis_at(n, i).degree() == degree {
                        c.clone()
                    } else {
                        T::zero()
                    }
                })
                .collect(),
        }
    }

    /// `Some(d)` when every nonzero term has degree `d`; the zero class is
    /// homogeneous of every degree and reports `None`.
    pub fn homogeneous_degree(&self) -> Option<u64> {
        let mut degrees = self.terms().map(|(b, _)| b.degree());
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous_of(&self, degree: u64) -> bool {
        self.terms().all(|(b, _)| b.degree() == degree)
    }

    /// Evaluation against the fundamental class: the `[pt]` coefficient.
    pub fn integrate(&self) -> T {
        self.coeffs[basis_index(self.n, Basis::Point)].clone()
    }

    pub fn to_raw(&self) -> RawPolynomial<T> {
        RawPolynomial {
            n: self.n,
            terms: self
                .terms()
                .map(|(b, c)| (c.clone(), b.to_raw(self.n)))
                .collect(),
        }
    }
}

impl<T: Scalar> fmt::Display for CohomologyClass<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (b, c) in self.terms() {
            let magnitude = if first {
                c.clone()
            } else if c.is_negative() {
                write!(f, " - ")?;
                c.abs()
            } else {
                write!(f, " + ")?;
                c.clone()
            };
            match b {
                Basis::One => write!(f, "{magnitude}")?,
                _ => write!(f, "{magnitude}*{b}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

struct CanonicalParser<'a> {
    text: &'a str,
    pos: usize,
    n: usize,
}

impl<'a> CanonicalParser<'a> {
    fn new(text: &'a str, n: usize) -> Self {
        CanonicalParser { text, pos: 0, n }
    }

    fn err(&self, message: impl Into<String>) -> RingError {
        RingError::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !f(c))
            .unwrap_or(self.rest().len());
        self.pos += len;
        &self.text[start..start + len]
    }

    fn parse<T: Scalar>(mut self) -> Result<CohomologyClass<T>, RingError> {
        let mut class = CohomologyClass::zero(self.n);
        self.skip_ws();
        if self.rest() == "0" {
            return Ok(class);
        }
        let mut negative = self.eat("-");
        loop {
            self.skip_ws();
            let coeff_text = self.take_while(|c| c.is_ascii_digit() || c == '/');
            if coeff_text.is_empty() {
                return Err(self.err("expected a coefficient"));
            }
            let mut coeff: T = coeff_text
                .parse()
                .map_err(|_| self.err(format!("bad coefficient `{coeff_text}`")))?;
            if negative {
                coeff = -coeff;
            }
            let basis = if self.eat("*") {
                self.monomial()?
            } else {
                Basis::One
            };
            let slot = class.slot_mut(basis).map_err(|e| match e {
                RingError::UnknownGenerator { .. } => self.err(e.to_string()),
                other => other,
            })?;
            *slot += coeff;
            if self.eat("+") {
                negative = false;
            } else if self.eat("-") {
                negative = true;
            } else {
                self.skip_ws();
                if !self.rest().is_empty() {
                    return Err(self.err("expected `+`, `-` or end of input"));
                }
                return Ok(class);
            }
        }
    }

    fn eta_index(&mut self) -> Result<usize, RingError> {
        let digits = self.take_while(|c| c.is_ascii_digit());
        digits
            .parse()
            .map_err(|_| self.err("expected generator index"))
    }

    fn monomial(&mut self) -> Result<Basis, RingError> {
        self.skip_ws();
        if self.eat("pt") {
            return Ok(Basis::Point);
        }
        if self.eat("e") {
            return Ok(Basis::Eta(self.eta_index()?));
        }
        if self.eat("w") {
            if self.eat("^2") {
                return Ok(Basis::OmegaSq);
            }
            if self.eat("*e") {
                return Ok(Basis::OmegaEta(self.eta_index()?));
            }
            return Ok(Basis::Omega);
        }
        Err(self.err("expected a basis monomial"))
    }
}
