//! Framed instanton bundles pulled back from `M`: moduli dimension
//! `-chi(End(V)(-S))` and the equality `chi(End(V)(-S)) = chi(End(V)(-Sbar))`.
//!
//! Two routes compute `chi(End(V)(-D))`:
//!
//! * [`Route::Standard`] twists `End V` (rank `r^2`) by `O(-D)` with the
//!   general Chern calculus and applies Riemann-Roch.
//! * [`Route::Paper`] evaluates the closed-form expression written in terms of
//!   `r`, `sigma` and `c2(End V)` term by term, using the rank-`r` Chern data
//!   of [`PaperChernList`].

use std::fmt;
use std::str::FromStr;

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundle::{
    binomial, euler_characteristic, todd, BundleError, EulerCharacteristic, ToddClass,
};
use crate::ring::{RingError, RingPresentation};
use crate::twistor::{a_vectors, C2Mode, SpaceDoc, SpaceError, SpaceOptions};
use crate::{Bundle, Class, Rational, Space};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstantonError {
    #[error("c1 vector has length {len}, expected n = {n}")]
    LengthMismatch { n: usize, len: usize },
    #[error("chi(End(V)(-S)) = {chi} is not an integer; the Chern data is formal only")]
    NonIntegral { chi: Rational },
    #[error("A = {a} is outside 0..={n}")]
    AOutOfRange { a: i64, n: i64 },
    #[error("empty sweep range for `{0}`")]
    EmptyRange(&'static str),
    #[error("value {0} does not fit in 64 bits")]
    Overflow(Rational),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Rank `r`, `c1(V) = sum b_i eta_i`, `c2(V) = k [F]`, `c3(V) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstantonData {
    pub rank: u32,
    pub b: Vec<i64>,
    pub k: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Divisor {
    S,
    #[serde(rename = "Sbar")]
    SBar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Standard,
    Paper,
}

impl Route {
    pub const ALL: [Route; 2] = [Route::Standard, Route::Paper];
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Standard => "standard",
            Route::Paper => "paper",
        })
    }
}

impl FromStr for Route {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(Route::Standard),
            "paper" => Ok(Route::Paper),
            other => Err(format!(
                "unknown route `{other}` (expected `standard` or `paper`)"
            )),
        }
    }
}

fn int(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn q(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

fn divisor_class(space: &Space, divisor: Divisor) -> &Class {
    match divisor {
        Divisor::S => space.s(),
        Divisor::SBar => space.s_bar(),
    }
}

fn eta_part(space: &Space, divisor: Divisor) -> &Class {
    match divisor {
        Divisor::S => space.sigma(),
        Divisor::SBar => space.sigma_bar(),
    }
}

pub fn pullback_bundle(space: &Space, data: &InstantonData) -> Result<Bundle, InstantonError> {
    let n = space.n();
    if data.b.len() != n {
        return Err(InstantonError::LengthMismatch {
            n,
            len: data.b.len(),
        });
    }
    let c1 = Class::eta_combination(&data.b.iter().map(|&b| int(b)).collect::<Vec<_>>());
    let c2 = space.fibre().scale(&int(data.k));
    Ok(Bundle::new(data.rank, c1, c2, Class::zero(n))?)
}

/// `End(V) (x) O(-D)` through the general twist formulas.
pub fn end_twisted(
    space: &Space,
    bundle: &Bundle,
    divisor: Divisor,
) -> Result<Bundle, InstantonError> {
    let ring = space.ring();
    let end = bundle.end_bundle(ring)?;
    Ok(end.twist(&divisor_class(space, divisor).neg(), ring)?)
}

pub fn chi_standard(
    space: &Space,
    bundle: &Bundle,
    divisor: Divisor,
) -> Result<EulerCharacteristic<Rational>, InstantonError> {
    Ok(euler_characteristic(
        &end_twisted(space, bundle, divisor)?,
        space,
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuliDimension {
    pub dimension: i64,
    #[serde(with = "rational_string")]
    pub chi: Rational,
    pub integral: bool,
    pub real_dimension: i64,
}

/// `-chi(End(V)(-S))` for an arbitrary formal bundle.
pub fn moduli_dimension_of(
    space: &Space,
    bundle: &Bundle,
) -> Result<ModuliDimension, InstantonError> {
    let chi = chi_standard(space, bundle, Divisor::S)?;
    if !chi.integral {
        return Err(InstantonError::NonIntegral { chi: chi.value });
    }
    let dimension = to_i64(&-chi.value.clone())?;
    Ok(ModuliDimension {
        dimension,
        chi: chi.value,
        integral: true,
        real_dimension: 2 * dimension,
    })
}

pub fn moduli_dimension(
    space: &Space,
    data: &InstantonData,
) -> Result<ModuliDimension, InstantonError> {
    moduli_dimension_of(space, &pullback_bundle(space, data)?)
}

fn to_i64(value: &Rational) -> Result<i64, InstantonError> {
    value
        .is_integer()
        .then(|| value.to_integer().to_i64())
        .flatten()
        .ok_or_else(|| InstantonError::Overflow(value.clone()))
}

/// Chern classes of `End(V)(-D)` as listed alongside the closed-form
/// Riemann-Roch expression: a rank-`r` calculus in `l = w + sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperChernList {
    pub rank: u32,
    pub c2_end: Class,
    pub c1: Class,
    pub c2: Class,
    pub c3: Class,
}

impl PaperChernList {
    pub fn new(space: &Space, bundle: &Bundle, divisor: Divisor) -> Result<Self, InstantonError> {
        let ring = space.ring();
        let r = bundle.rank() as i64;
        let c2_end = bundle.end_bundle(ring)?.c2().clone();
        let w = space.omega();
        let sigma = eta_part(space, divisor);
        let w2 = ring.mul(w, w)?;
        let w3 = ring.mul(&w2, w)?;
        let w_sigma = ring.mul(w, sigma)?;
        let sigma2 = ring.mul(sigma, sigma)?;
        let l = w.add(sigma)?;
        // w^2 + 2 w sigma + sigma^2
        let square = w2.add(&w_sigma.scale(&int(2)))?.add(&sigma2)?;
        // w^3 + 3 w^2 sigma + 3 w sigma^2
        let cube = w3
            .add(&ring.mul(&w2, sigma)?.scale(&int(3)))?
            .add(&ring.mul(w, &sigma2)?.scale(&int(3)))?;

        let c1 = l.scale(&int(r));
        let c2 = c2_end.add(&square.scale(&int(binomial(r, 2))))?;
        let c3 = ring
            .mul(&c2_end, &l)?
            .scale(&int(r - 2))
            .add(&cube.scale(&int(binomial(r, 3))))?;
        Ok(PaperChernList {
            rank: bundle.rank(),
            c2_end,
            c1,
            c2,
            c3,
        })
    }

    /// The list read as a rank-`r` formal bundle.
    pub fn as_bundle(&self) -> Result<Bundle, InstantonError> {
        Ok(Bundle::new(
            self.rank,
            self.c1.clone(),
            self.c2.clone(),
            self.c3.clone(),
        )?)
    }
}

/// Closed-form `chi(End(V)(-D))`, evaluated term by term:
///
/// ```text
///   r/24 c1(P) c2(P)
/// + (r w + r s)/12 (16 w^2 + 4 eta^2 + 16 w eta + c2(P))
/// + (2w + eta)/2 (r^2 w^2 + r^2 s^2 + 2 r^2 w s - 2 c2(End V) - (r^2 - r)(w^2 + s^2 + 2 w s))
/// + r^3/6 (w^3 + 3 w^2 s + 3 w s^2)
/// - (r w + r s)/2 (c2(End V) + (r^2 - r)/2 (w^2 + s^2 + 2 w s))
/// + (r - 2)/6 c2(End V)(w + s)
/// + (r^3 - 3r^2 + 2r)/36 (w^3 + 3 w^2 s + 3 w s^2)
/// ```
///
/// with `s = sigma` for `D = S` and `s = sigmabar` for `D = Sbar`. The
/// `c2(P)` inside the second bracket is `3(e - sgn)[F]` in paper mode and the
/// space's `c2(P)` in general.
pub fn chi_paper_route_of(
    space: &Space,
    bundle: &Bundle,
    divisor: Divisor,
) -> Result<Rational, InstantonError> {
    let ring = space.ring();
    let r = bundle.rank() as i64;
    let mul = |a: &Class, b: &Class| ring.mul(a, b);
    let pair = |a: &Class, b: &Class| ring.pairing(a, b);
    let (w, eta, c1p, c2p) = (space.omega(), space.eta(), space.c1(), space.c2());
    let s = eta_part(space, divisor);
    let c2_end = bundle.end_bundle(ring)?.c2().clone();

    let w2 = mul(w, w)?;
    let s2 = mul(s, s)?;
    let ws = mul(w, s)?;
    let w_plus_s = w.add(s)?;
    let quad = w2.add(&s2)?.add(&ws.scale(&int(2)))?;
    let cube = pair(&w2, w)? + pair(&w2, s)? * int(3) + pair(w, &s2)? * int(3);
    let r_w_plus_r_s = w.scale(&int(r)).add(&s.scale(&int(r)))?;

    let t1 = pair(c1p, c2p)? * q(r, 24);
    let bracket = w2
        .scale(&int(16))
        .add(&mul(eta, eta)?.scale(&int(4)))?
        .add(&mul(w, eta)?.scale(&int(16)))?
        .add(c2p)?;
    let t2 = pair(&r_w_plus_r_s, &bracket)? * q(1, 12);
    let inner = w2
        .scale(&int(r * r))
        .add(&s2.scale(&int(r * r)))?
        .add(&ws.scale(&int(2 * r * r)))?
        .sub(&c2_end.scale(&int(2)))?
        .sub(&quad.scale(&int(r * r - r)))?;
    let t3 = pair(&w.scale(&int(2)).add(eta)?, &inner)? * q(1, 2);
    let t4 = cube.clone() * q(r * r * r, 6);
    let t5 = pair(&r_w_plus_r_s, &c2_end.add(&quad.scale(&q(r * r - r, 2)))?)? * q(-1, 2);
    let t6 = pair(&c2_end, &w_plus_s)? * q(r - 2, 6);
    let t7 = cube * q(r * r * r - 3 * r * r + 2 * r, 36);

    Ok(t1 + t2 + t3 + t4 + t5 + t6 + t7)
}

pub fn chi_paper_route(
    space: &Space,
    data: &InstantonData,
    divisor: Divisor,
) -> Result<Rational, InstantonError> {
    chi_paper_route_of(space, &pullback_bundle(space, data)?, divisor)
}

/// Riemann-Roch applied to [`PaperChernList`] read as a rank-`r` bundle.
pub fn chi_of_paper_list(
    space: &Space,
    data: &InstantonData,
    divisor: Divisor,
) -> Result<Rational, InstantonError> {
    let list = PaperChernList::new(space, &pullback_bundle(space, data)?, divisor)?;
    Ok(euler_characteristic(&list.as_bundle()?, space)?.value)
}

/// `chi(End(V)(-D))` through the chosen route.
pub fn chi_via(
    space: &Space,
    bundle: &Bundle,
    divisor: Divisor,
    route: Route,
) -> Result<Rational, InstantonError> {
    match route {
        Route::Standard => Ok(chi_standard(space, bundle, divisor)?.value),
        Route::Paper => chi_paper_route_of(space, bundle, divisor),
    }
}

/// `chi(End(V)(-S)) - chi(End(V)(-Sbar))`
pub fn lemma25_difference(
    space: &Space,
    data: &InstantonData,
    route: Route,
) -> Result<Rational, InstantonError> {
    let v = pullback_bundle(space, data)?;
    Ok(chi_via(space, &v, Divisor::S, route)? - chi_via(space, &v, Divisor::SBar, route)?)
}

/// The difference written through the three intersection numbers
/// `w(sigma^2 - sigmabar^2) = n - 2A`, `w^2(sigma - sigmabar) = 2A - n`,
/// `w eta (sigma - sigmabar) = n - 2A`.
pub fn difference_polynomial(r: i64, n: i64, a: i64) -> Result<Rational, InstantonError> {
    if a < 0 || a > n {
        return Err(InstantonError::AOutOfRange { a, n });
    }
    let r = int(r);
    let r2 = &r * &r;
    let r3 = &r2 * &r;
    let cubic = |lin: Rational| lin * &r + &r2 * q(1, 2) - &r3 * q(1, 6);
    let first = int(n - 2 * a) * cubic(q(7, 6));
    let second = int(2 * a - n) * cubic(q(13, 6));
    let third = int(n - 2 * a) * &r;
    Ok(first + second + third)
}

/// One checked intersection identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRecord {
    pub space: SpaceDoc,
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseParams {
    pub space: SpaceDoc,
    pub rank: u32,
    pub b: Vec<i64>,
    pub k: i64,
    pub route: Route,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRecord {
    pub params: CaseParams,
    #[serde(rename = "chi_S", with = "rational_string")]
    pub chi_s: Rational,
    #[serde(rename = "chi_Sbar", with = "rational_string")]
    pub chi_sbar: Rational,
    #[serde(with = "rational_string")]
    pub diff: Rational,
    /// Only the standard route reports a dimension.
    pub dim: Option<i64>,
    pub integral: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub kind: String,
    pub params: Option<CaseParams>,
    pub detail: String,
}

/// Outcome of an identity check or a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub config: serde_json::Value,
    pub cases: Vec<CaseRecord>,
    pub identities: Vec<IdentityRecord>,
    pub pass: bool,
    pub counterexamples: Vec<Counterexample>,
}

impl VerificationReport {
    fn assemble(
        config: serde_json::Value,
        cases: Vec<CaseRecord>,
        identities: Vec<IdentityRecord>,
        mut counterexamples: Vec<Counterexample>,
    ) -> Self {
        counterexamples.extend(
            identities
                .iter()
                .filter(|i| !i.pass)
                .map(|i| Counterexample {
                    kind: "identity".into(),
                    params: None,
                    detail: format!(
                        "{} on n={} a={:?}: expected {}, got {}",
                        i.name, i.space.n, i.space.a, i.expected, i.actual
                    ),
                }),
        );
        VerificationReport {
            config,
            cases,
            identities,
            pass: counterexamples.is_empty(),
            counterexamples,
        }
    }

    pub fn first_counterexample(&self) -> Option<&Counterexample> {
        self.counterexamples.first()
    }
}

fn integral_identity(space: &Space, name: &str, value: &Class, expected: i64) -> IdentityRecord {
    let actual = value.integrate();
    IdentityRecord {
        space: space.doc(),
        name: name.into(),
        expected: expected.to_string(),
        actual: actual.to_string(),
        pass: value.is_homogeneous_of(6) && actual == int(expected),
    }
}

fn class_identity(space: &Space, name: &str, lhs: &Class, rhs: &Class) -> IdentityRecord {
    IdentityRecord {
        space: space.doc(),
        name: name.into(),
        expected: rhs.to_string(),
        actual: lhs.to_string(),
        pass: lhs == rhs,
    }
}

/// `c1(P) = 2[S] + 2[Sbar]`
pub fn canonical_identity(space: &Space) -> IdentityRecord {
    let two = int(2);
    let rhs = space
        .s()
        .scale(&two)
        .add(&space.s_bar().scale(&two))
        .expect("classes of one space");
    IdentityRecord {
        space: space.doc(),
        name: "c1(P) = 2S + 2Sbar".into(),
        expected: rhs.to_string(),
        actual: space.c1().to_string(),
        pass: space.canonical_class_check(),
    }
}

fn identity_records(space: &Space) -> Result<Vec<IdentityRecord>, RingError> {
    let ring = space.ring();
    let mul = |a: &Class, b: &Class| ring.mul(a, b);
    let (w, eta, f) = (space.omega(), space.eta(), space.fibre());
    let (s, sb) = (space.sigma(), space.sigma_bar());
    let n = space.n() as i64;
    let a = space.a_count() as i64;
    let zero = Class::zero(space.n());

    let delta = s.sub(sb)?;
    let delta_sq = mul(s, s)?.sub(&mul(sb, sb)?)?;
    let w2 = mul(w, w)?;
    let weta = mul(w, eta)?;

    Ok(vec![
        integral_identity(
            space,
            "w*(sigma^2 - sigmabar^2)",
            &mul(w, &delta_sq)?,
            n - 2 * a,
        ),
        integral_identity(
            space,
            "w^2*(sigma - sigmabar)",
            &mul(&w2, &delta)?,
            2 * a - n,
        ),
        integral_identity(
            space,
            "w*eta*(sigma - sigmabar)",
            &mul(&weta, &delta)?,
            n - 2 * a,
        ),
        class_identity(
            space,
            "(sigma - sigmabar)*eta^2",
            &mul(&delta, &mul(eta, eta)?)?,
            &zero,
        ),
        class_identity(
            space,
            "(sigma^2 - sigmabar^2)*eta",
            &mul(&delta_sq, eta)?,
            &zero,
        ),
        class_identity(space, "(sigma - sigmabar)*F", &mul(&delta, f)?, &zero),
        // c2(End V) of a pullback bundle is an integer multiple of [F]
        class_identity(
            space,
            "(sigma - sigmabar)*c2(End V)",
            &mul(&delta, &f.scale(&int(7)))?,
            &zero,
        ),
        class_identity(
            space,
            "(sigma - sigmabar)*(w^2 + w*eta)",
            &mul(&delta, &w2.add(&weta)?)?,
            &zero,
        ),
        class_identity(space, "eta*sigma = sigma^2", &mul(eta, s)?, &mul(s, s)?),
        class_identity(
            space,
            "eta*sigmabar = sigmabar^2",
            &mul(eta, sb)?,
            &mul(sb, sb)?,
        ),
    ])
}

/// The intersection identities behind the vanishing of the difference.
pub fn verify_identities(space: &Space) -> Result<VerificationReport, InstantonError> {
    let config = serde_json::json!({ "space": space.doc() });
    Ok(VerificationReport::assemble(
        config,
        Vec::new(),
        identity_records(space)?,
        Vec::new(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentitySet {
    Canonical,
    Intersections,
    All,
}

/// Check an identity set on every space of the grid described by `config`
/// (its `n` range, a-policy, first c2 mode and relations).
pub fn verify_identity_grid(
    config: &SweepConfig,
    set: IdentitySet,
) -> Result<VerificationReport, InstantonError> {
    config.validate()?;
    let mode = config.modes[0];
    let mut records = Vec::new();
    for n in config.n_min..=config.n_max {
        let a_list: Vec<Vec<i64>> = match config.a_policy {
            APolicy::All => a_vectors(n).collect(),
            APolicy::AllOnes => vec![vec![1; n]],
        };
        for a in a_list {
            let space = config.build_space(n, &a, mode)?;
            if set != IdentitySet::Intersections {
                records.push(canonical_identity(&space));
            }
            if set != IdentitySet::Canonical {
                records.extend(identity_records(&space)?);
            }
        }
    }
    let doc = serde_json::json!({
        "identities": set,
        "n_min": config.n_min,
        "n_max": config.n_max,
        "a_policy": config.a_policy,
        "c2_mode": mode,
        "corrupt_relation": config.corrupt_relation,
    });
    Ok(VerificationReport::assemble(
        doc,
        Vec::new(),
        records,
        Vec::new(),
    ))
}

/// Relations with `w^2 e_1 = 2 pt` (or `w^3 = 2 pt` when `n = 0`), used as a
/// negative control: sweeps over this presentation must fail.
pub fn corrupted_ring(n: usize) -> RingPresentation {
    let standard = RingPresentation::new(n);
    let mut values = standard.omega_sq_eta().to_vec();
    let omega_cubed = if n == 0 {
        2
    } else {
        values[0] = 2;
        standard.omega_cubed()
    };
    RingPresentation::with_point_values(n, omega_cubed, values).expect("lengths agree")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum APolicy {
    /// Every `a in {0,1}^n`.
    All,
    AllOnes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BPolicy {
    Zero,
    /// Every `b in {-1,0,1}^n`.
    All,
    /// The zero vector plus `count` seeded samples from `{-1,0,1}^n`.
    Sample {
        count: usize,
        seed: u64,
    },
}

/// Parameter grid for [`sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub a_policy: APolicy,
    pub r_min: u32,
    pub r_max: u32,
    pub k_min: i64,
    pub k_max: i64,
    pub b_policy: BPolicy,
    pub routes: Vec<Route>,
    pub modes: Vec<C2Mode>,
    pub identities: bool,
    pub corrupt_relation: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_min: 0,
            n_max: 5,
            a_policy: APolicy::All,
            r_min: 1,
            r_max: 3,
            k_min: 0,
            k_max: 6,
            b_policy: BPolicy::Zero,
            routes: Route::ALL.to_vec(),
            modes: vec![C2Mode::Paper],
            identities: true,
            corrupt_relation: false,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<(), InstantonError> {
        if self.n_min > self.n_max {
            return Err(InstantonError::EmptyRange("n"));
        }
        if self.r_min == 0 || self.r_min > self.r_max {
            return Err(InstantonError::EmptyRange("r"));
        }
        if self.k_min > self.k_max {
            return Err(InstantonError::EmptyRange("k"));
        }
        if self.routes.is_empty() {
            return Err(InstantonError::EmptyRange("route"));
        }
        if self.modes.is_empty() {
            return Err(InstantonError::EmptyRange("c2 mode"));
        }
        Ok(())
    }

    pub fn build_space(&self, n: usize, a: &[i64], mode: C2Mode) -> Result<Space, SpaceError> {
        let options = SpaceOptions {
            ring: self.corrupt_relation.then(|| corrupted_ring(n)),
            ..SpaceOptions::default()
        };
        Space::build_with(n, a, mode, options)
    }

    fn b_vectors(&self, n: usize, salt: u64) -> Vec<Vec<i64>> {
        match self.b_policy {
            BPolicy::Zero => vec![vec![0; n]],
            BPolicy::All => (0..3usize.pow(n as u32))
                .map(|mut code| {
                    let mut b = vec![0; n];
                    for slot in b.iter_mut().rev() {
                        *slot = (code % 3) as i64 - 1;
                        code /= 3;
                    }
                    b
                })
                .collect(),
            BPolicy::Sample { count, seed } => {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let mut out = vec![vec![0; n]];
                for _ in 0..count {
                    let b: Vec<i64> = (0..n).map(|_| rng.gen_range(-1..=1)).collect();
                    if !out.contains(&b) {
                        out.push(b);
                    }
                }
                out
            }
        }
    }
}

struct GridPoint {
    space: std::sync::Arc<Space>,
    td: std::sync::Arc<ToddClass<Rational>>,
    data: InstantonData,
}

fn evaluate_point(
    point: &GridPoint,
    routes: &[Route],
) -> Result<(Vec<CaseRecord>, Vec<Counterexample>), InstantonError> {
    let space = &*point.space;
    let v = pullback_bundle(space, &point.data)?;
    let mut records = Vec::with_capacity(routes.len());
    let mut bad = Vec::new();
    for &route in routes {
        let params = CaseParams {
            space: space.doc(),
            rank: point.data.rank,
            b: point.data.b.clone(),
            k: point.data.k,
            route,
        };
        let (chi_s, chi_sbar) = match route {
            Route::Standard => {
                let chi = |d| -> Result<Rational, InstantonError> {
                    let e = end_twisted(space, &v, d)?;
                    let ch = e.chern_character(space.ring())?;
                    Ok(crate::bundle::chi_from_character(&ch, &point.td, space.ring())?.value)
                };
                (chi(Divisor::S)?, chi(Divisor::SBar)?)
            }
            Route::Paper => (
                chi_paper_route_of(space, &v, Divisor::S)?,
                chi_paper_route_of(space, &v, Divisor::SBar)?,
            ),
        };
        let diff = &chi_s - &chi_sbar;
        let integral = chi_s.is_integer();
        let dim = match route {
            Route::Standard if integral => Some(to_i64(&-chi_s.clone())?),
            _ => None,
        };
        if !diff.is_zero() {
            bad.push(Counterexample {
                kind: "lemma2.5".into(),
                params: Some(params.clone()),
                detail: format!("chi(-S) - chi(-Sbar) = {diff}"),
            });
        }
        if route == Route::Standard && space.n() == 0 {
            let expected = 2 * point.data.rank as i64 * point.data.k;
            if dim != Some(expected) {
                bad.push(Counterexample {
                    kind: "dimension".into(),
                    params: Some(params.clone()),
                    detail: format!("dimension {} differs from 2rk = {expected}", -chi_s.clone()),
                });
            }
        }
        records.push(CaseRecord {
            params,
            chi_s,
            chi_sbar,
            diff,
            dim,
            integral,
        });
    }
    Ok((records, bad))
}

/// Run the difference, the dimension and (optionally) the identity checks
/// over a parameter grid. Case order is deterministic.
pub fn sweep(config: &SweepConfig) -> Result<VerificationReport, InstantonError> {
    use std::sync::Arc;

    config.validate()?;
    let mut points = Vec::new();
    let mut identities = Vec::new();
    for &mode in &config.modes {
        for n in config.n_min..=config.n_max {
            let a_list: Vec<Vec<i64>> = match config.a_policy {
                APolicy::All => a_vectors(n).collect(),
                APolicy::AllOnes => vec![vec![1; n]],
            };
            for (a_index, a) in a_list.iter().enumerate() {
                let space = Arc::new(config.build_space(n, a, mode)?);
                if config.identities && mode == config.modes[0] {
                    identities.push(canonical_identity(&space));
                    identities.extend(identity_records(&space)?);
                }
                let td = Arc::new(todd(&space)?);
                let salt = ((n as u64) << 32) | a_index as u64;
                for b in config.b_vectors(n, salt) {
                    for rank in config.r_min..=config.r_max {
                        for k in config.k_min..=config.k_max {
                            points.push(GridPoint {
                                space: Arc::clone(&space),
                                td: Arc::clone(&td),
                                data: InstantonData {
                                    rank,
                                    b: b.clone(),
                                    k,
                                },
                            });
                        }
                    }
                }
            }
        }
    }

    let results = points
        .par_iter()
        .map(|p| evaluate_point(p, &config.routes))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cases = Vec::new();
    let mut counterexamples = Vec::new();
    for (records, bad) in results {
        cases.extend(records);
        counterexamples.extend(bad);
    }
    let config_doc = serde_json::to_value(config).expect("config serializes");
    Ok(VerificationReport::assemble(
        config_doc,
        cases,
        identities,
        counterexamples,
    ))
}

/// Render rationals as `"p/q"` strings.
pub mod rational_string {
    use serde::Serializer;

    use crate::Rational;

    pub fn render(value: &Rational) -> String {
        format!("{}/{}", value.numer(), value.denom())
    }

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&render(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize, a: &[i64], mode: C2Mode) -> Space {
        Space::build(n, a, mode).unwrap()
    }

    #[test]
    fn identity_grid_covers_every_a_vector() {
        let config = SweepConfig {
            n_max: 3,
            ..SweepConfig::default()
        };
        let report = verify_identity_grid(&config, IdentitySet::Canonical).unwrap();
        assert!(report.pass);
        assert_eq!(report.identities.len(), 1 + 2 + 4 + 8);
        let corrupt = SweepConfig {
            corrupt_relation: true,
            ..config
        };
        assert!(
            verify_identity_grid(&corrupt, IdentitySet::Canonical)
                .unwrap()
                .pass
        );
        assert!(
            !verify_identity_grid(&corrupt, IdentitySet::Intersections)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn pullback_examples() {
        let p = space(0, &[], C2Mode::Paper);
        let v = pullback_bundle(
            &p,
            &InstantonData {
                rank: 2,
                b: vec![],
                k: 1,
            },
        )
        .unwrap();
        assert_eq!(v.c2(), &p.mul(p.omega(), p.omega()).unwrap());
        assert!(v.c1().is_zero() && v.c3().is_zero());

        let p = space(2, &[1, 0], C2Mode::Paper);
        let v = pullback_bundle(
            &p,
            &InstantonData {
                rank: 3,
                b: vec![1, -2],
                k: 0,
            },
        )
        .unwrap();
        let expected = p
            .eta_i(1)
            .unwrap()
            .sub(&p.eta_i(2).unwrap().scale(&int(2)))
            .unwrap();
        assert_eq!(v.c1(), &expected);
        assert!(v.c2().is_zero());

        let p = space(1, &[1], C2Mode::Paper);
        assert!(pullback_bundle(
            &p,
            &InstantonData {
                rank: 1,
                b: vec![0],
                k: 5
            }
        )
        .is_ok());
        assert_eq!(
            pullback_bundle(
                &p,
                &InstantonData {
                    rank: 1,
                    b: vec![],
                    k: 5
                }
            )
            .unwrap_err(),
            InstantonError::LengthMismatch { n: 1, len: 0 }
        );
    }

    #[test]
    fn dimension_on_cp3() {
        let p = space(0, &[], C2Mode::Paper);
        for r in 1..=5u32 {
            for k in 0..=10 {
                let d = moduli_dimension(
                    &p,
                    &InstantonData {
                        rank: r,
                        b: vec![],
                        k,
                    },
                )
                .unwrap();
                assert_eq!(d.dimension, 2 * r as i64 * k);
                assert_eq!(d.real_dimension, 2 * d.dimension);
            }
        }
    }

    #[test]
    fn paper_route_on_cp3() {
        let p = space(0, &[], C2Mode::Paper);
        let data = InstantonData {
            rank: 2,
            b: vec![],
            k: 1,
        };
        assert_eq!(chi_paper_route(&p, &data, Divisor::S).unwrap(), int(-4));
        assert_eq!(chi_of_paper_list(&p, &data, Divisor::S).unwrap(), int(-4));
        assert_eq!(lemma25_difference(&p, &data, Route::Paper).unwrap(), int(0));
    }

    /// The closed form enters `c3` with weight 1/6 where Riemann-Roch uses
    /// 1/2, so the two evaluations differ by exactly `-integrate(c3)/3`.
    #[test]
    fn closed_form_gap_is_a_third_of_c3() {
        for n in 0..4 {
            for a in a_vectors(n) {
                let p = space(n, &a, C2Mode::Paper);
                for rank in 1..=4 {
                    for k in -2..4 {
                        let data = InstantonData {
                            rank,
                            b: vec![1; n],
                            k,
                        };
                        for d in [Divisor::S, Divisor::SBar] {
                            let list =
                                PaperChernList::new(&p, &pullback_bundle(&p, &data).unwrap(), d)
                                    .unwrap();
                            let gap = chi_paper_route(&p, &data, d).unwrap()
                                - chi_of_paper_list(&p, &data, d).unwrap();
                            assert_eq!(gap, -list.c3.integrate() * q(1, 3));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn difference_polynomial_vanishes() {
        assert_eq!(difference_polynomial(1, 0, 0).unwrap(), int(0));
        assert_eq!(q(7, 6) - q(13, 6) + int(1), int(0));
        for r in 1..=6 {
            for n in 0..=6 {
                for a in 0..=n {
                    assert!(difference_polynomial(r, n, a).unwrap().is_zero());
                }
            }
        }
        assert!(difference_polynomial(2, 3, 4).is_err());
        assert!(difference_polynomial(2, 3, -1).is_err());
    }

    #[test]
    fn identity_examples() {
        let p = space(4, &[1, 1, 0, 0], C2Mode::Paper);
        let report = verify_identities(&p).unwrap();
        assert!(report.pass);
        assert_eq!(report.identities[0].actual, "0");

        let p = space(3, &[1, 1, 1], C2Mode::Paper);
        let report = verify_identities(&p).unwrap();
        assert_eq!(report.identities[1].actual, "3");
        assert!(report.pass);
    }

    #[test]
    fn difference_independent_of_k_and_mode() {
        let p = space(3, &[1, 0, 1], C2Mode::Paper);
        let pn = space(3, &[1, 0, 1], C2Mode::Normalized);
        for route in Route::ALL {
            let base = lemma25_difference(
                &p,
                &InstantonData {
                    rank: 3,
                    b: vec![1, -1, 0],
                    k: 0,
                },
                route,
            )
            .unwrap();
            for k in -3..6 {
                let data = InstantonData {
                    rank: 3,
                    b: vec![1, -1, 0],
                    k,
                };
                assert_eq!(lemma25_difference(&p, &data, route).unwrap(), base);
                assert_eq!(lemma25_difference(&pn, &data, route).unwrap(), base);
            }
        }
    }

    #[test]
    fn dimension_invariant_under_b_negation() {
        let p = space(3, &[1, 0, 0], C2Mode::Paper);
        for b in [vec![1, 0, -1], vec![2, 1, 1], vec![0, -3, 1]] {
            let neg: Vec<i64> = b.iter().map(|x| -x).collect();
            for k in 0..4 {
                let d1 = moduli_dimension(
                    &p,
                    &InstantonData {
                        rank: 2,
                        b: b.clone(),
                        k,
                    },
                )
                .unwrap();
                let d2 = moduli_dimension(
                    &p,
                    &InstantonData {
                        rank: 2,
                        b: neg.clone(),
                        k,
                    },
                )
                .unwrap();
                assert_eq!(d1, d2);
            }
        }
    }

    #[test]
    fn small_sweep_passes_and_is_deterministic() {
        let config = SweepConfig {
            n_max: 2,
            k_min: -1,
            k_max: 2,
            b_policy: BPolicy::Sample { count: 2, seed: 7 },
            modes: C2Mode::ALL.to_vec(),
            ..SweepConfig::default()
        };
        let a = sweep(&config).unwrap();
        assert!(a.pass, "{:?}", a.first_counterexample());
        assert_eq!(a, sweep(&config).unwrap());
    }

    #[test]
    fn corrupted_sweep_fails() {
        let config = SweepConfig {
            n_max: 2,
            corrupt_relation: true,
            ..SweepConfig::default()
        };
        let report = sweep(&config).unwrap();
        assert!(!report.pass);
        assert!(report.first_counterexample().is_some());
    }

    #[test]
    fn empty_ranges_rejected() {
        let config = SweepConfig {
            k_min: 3,
            k_max: 2,
            ..SweepConfig::default()
        };
        assert_eq!(sweep(&config).unwrap_err(), InstantonError::EmptyRange("k"));
        let config = SweepConfig {
            r_min: 0,
            ..SweepConfig::default()
        };
        assert_eq!(sweep(&config).unwrap_err(), InstantonError::EmptyRange("r"));
    }
}
