//! The twistor space `P` over `M = #n(-CP2)` (`n = 0` is `S^4`, `P = CP3`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ring::{Basis, CohomologyClass, RingError, RingPresentation};
use crate::scalar::Scalar;

/// How `c2(P)` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum C2Mode {
    /// `c2(P) = 3(e(M) - sgn(M)) [F]`
    Paper,
    /// `c2(P) = 6 [F]`, which makes `chi(O_P) = 1` for every `n`.
    Normalized,
}

impl C2Mode {
    pub const ALL: [C2Mode; 2] = [C2Mode::Paper, C2Mode::Normalized];
}

impl fmt::Display for C2Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            C2Mode::Paper => "paper",
            C2Mode::Normalized => "normalized",
        })
    }
}

impl FromStr for C2Mode {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(C2Mode::Paper),
            "normalized" => Ok(C2Mode::Normalized),
            other => Err(SpaceError::UnknownMode(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("a-vector has length {len}, expected n = {n}")]
    LengthMismatch { n: usize, len: usize },
    #[error("a-vector entry {index} is {value}; entries must be 0 or 1")]
    BadEntry { index: usize, value: i64 },
    #[error("unknown c2 mode `{0}` (expected `paper` or `normalized`)")]
    UnknownMode(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Euler number and signature of the base four-manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub euler: i64,
    pub signature: i64,
}

/// `e(#n(-CP2)) = 2 + n`, `sgn(#n(-CP2)) = -n`.
pub fn euler_and_signature(n: usize) -> Topology {
    Topology {
        euler: 2 + n as i64,
        signature: -(n as i64),
    }
}

/// Expert knobs for [`TwistorSpace::build_with`].
#[derive(Debug, Clone, Default)]
pub struct SpaceOptions {
    /// Replaces the computed `e(M)`, `sgn(M)`.
    pub topology: Option<Topology>,
    /// Replaces the standard relations (negative controls only).
    pub ring: Option<RingPresentation>,
}

/// Serializable description of a space, embedded in every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub n: usize,
    pub a: Vec<u8>,
    pub c2_mode: C2Mode,
    pub derived: DerivedDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedDoc {
    #[serde(rename = "A")]
    pub a_count: usize,
    pub e: i64,
    pub sgn: i64,
}

/// Ring presentation plus the distinguished classes of `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistorSpace<T> {
    n: usize,
    a: Vec<u8>,
    c2_mode: C2Mode,
    topology: Topology,
    ring: RingPresentation,
    omega: CohomologyClass<T>,
    eta: CohomologyClass<T>,
    sigma: CohomologyClass<T>,
    sigma_bar: CohomologyClass<T>,
    fibre: CohomologyClass<T>,
    s: CohomologyClass<T>,
    s_bar: CohomologyClass<T>,
    c1: CohomologyClass<T>,
    c2: CohomologyClass<T>,
}

impl<T: Scalar> TwistorSpace<T> {
    pub fn build(n: usize, a: &[i64], c2_mode: C2Mode) -> Result<Self, SpaceError> {
        Self::build_with(n, a, c2_mode, SpaceOptions::default())
    }

    /// `a = (1, .., 1)`, i.e. `A = n`.
    pub fn with_all_ones(n: usize, c2_mode: C2Mode) -> Result<Self, SpaceError> {
        Self::build(n, &vec![1; n], c2_mode)
    }

    pub fn build_with(
        n: usize,
        a: &[i64],
        c2_mode: C2Mode,
        options: SpaceOptions,
    ) -> Result<Self, SpaceError> {
        if a.len() != n {
            return Err(SpaceError::LengthMismatch { n, len: a.len() });
        }
        let a = a
            .iter()
            .enumerate()
            .map(|(index, &value)| match value {
                0 | 1 => Ok(value as u8),
                _ => Err(SpaceError::BadEntry { index, value }),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        let ring = match options.ring {
            Some(ring) if ring.n() != n => {
                return Err(RingError::PresentationMismatch {
                    expected: n,
                    found: ring.n(),
                }
                .into())
            }
            Some(ring) => ring,
            None => RingPresentation::new(n),
        };
        let topology = options.topology.unwrap_or_else(|| euler_and_signature(n));

        let omega: CohomologyClass<T> = ring.omega();
        let ones = |pick: &dyn Fn(u8) -> bool| {
            CohomologyClass::eta_combination(
                &a.iter()
                    .map(|&ai| if pick(ai) { T::one() } else { T::zero() })
                    .collect::<Vec<_>>(),
            )
        };
        let eta = ones(&|_| true);
        let sigma = ones(&|ai| ai == 1);
        let sigma_bar = ones(&|ai| ai == 0);
        let fibre = ring.mul(&omega, &omega)?.add(&ring.mul(&omega, &eta)?)?;
        let s = omega.add(&sigma)?;
        let s_bar = omega.add(&sigma_bar)?;
        let c1 = omega
            .scale(&T::from_int(4))
            .add(&eta.scale(&T::from_int(2)))?;
        let c2_factor = match c2_mode {
            C2Mode::Paper => 3 * (topology.euler - topology.signature),
            C2Mode::Normalized => 6,
        };
        let c2 = fibre.scale(&T::from_int(c2_factor));

        Ok(TwistorSpace {
            n,
            a,
            c2_mode,
            topology,
            ring,
            omega,
            eta,
            sigma,
            sigma_bar,
            fibre,
            s,
            s_bar,
            c1,
            c2,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &[u8] {
        &self.a
    }

    /// `A = sum a_i`
    pub fn a_count(&self) -> usize {
        self.a.iter().filter(|&&ai| ai == 1).count()
    }

    pub fn c2_mode(&self) -> C2Mode {
        self.c2_mode
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn ring(&self) -> &RingPresentation {
        &self.ring
    }

    pub fn omega(&self) -> &CohomologyClass<T> {
        &self.omega
    }

    pub fn eta_i(&self, i: usize) -> Result<CohomologyClass<T>, RingError> {
        self.ring.eta_i(i)
    }

    /// `eta = sum eta_i`
    pub fn eta(&self) -> &CohomologyClass<T> {
        &self.eta
    }

    pub fn sigma(&self) -> &CohomologyClass<T> {
        &self.sigma
    }

    pub fn sigma_bar(&self) -> &CohomologyClass<T> {
        &self.sigma_bar
    }

    /// The twistor fibre class `[F] = w^2 + w*eta`.
    pub fn fibre(&self) -> &CohomologyClass<T> {
        &self.fibre
    }

    pub fn s(&self) -> &CohomologyClass<T> {
        &self.s
    }

    pub fn s_bar(&self) -> &CohomologyClass<T> {
        &self.s_bar
    }

    pub fn c1(&self) -> &CohomologyClass<T> {
        &self.c1
    }

    pub fn c2(&self) -> &CohomologyClass<T> {
        &self.c2
    }

    pub fn point(&self) -> CohomologyClass<T> {
        CohomologyClass::basis(self.n, Basis::Point).expect("pt always exists")
    }

    /// Replace `c1(P)`; only useful to exercise [`Self::canonical_class_check`].
    pub fn with_c1(mut self, c1: CohomologyClass<T>) -> Self {
        self.c1 = c1;
        self
    }

    /// `K_P = O(-2S - 2Sbar)`, i.e. `c1(P) = 2[S] + 2[Sbar]`.
    pub fn canonical_class_check(&self) -> bool {
        let two = T::from_int(2);
        let lhs = self.s.scale(&two).add(&self.s_bar.scale(&two));
        matches!(lhs, Ok(lhs) if lhs == self.c1)
    }

    pub fn mul(
        &self,
        a: &CohomologyClass<T>,
        b: &CohomologyClass<T>,
    ) -> Result<CohomologyClass<T>, RingError> {
        self.ring.mul(a, b)
    }

    pub fn doc(&self) -> SpaceDoc {
        SpaceDoc {
            n: self.n,
            a: self.a.clone(),
            c2_mode: self.c2_mode,
            derived: DerivedDoc {
                a_count: self.a_count(),
                e: self.topology.euler,
                sgn: self.topology.signature,
            },
            relations: (!self.ring.is_standard()).then(|| "modified".to_string()),
        }
    }
}

/// All `2^n` a-vectors in lexicographic order.
pub fn a_vectors(n: usize) -> impl Iterator<Item = Vec<i64>> {
    (0u64..1 << n).map(move |bits| (0..n).map(|i| ((bits >> (n - 1 - i)) & 1) as i64).collect())
}
