//! Formal bundles on `P`: Chern classes, Chern character, Todd class and
//! Hirzebruch-Riemann-Roch on the threefold.

use thiserror::Error;

use crate::ring::{CohomologyClass, RingError, RingPresentation};
use crate::scalar::{Field, Scalar};
use crate::twistor::TwistorSpace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error("rank must be positive")]
    ZeroRank,
    #[error("{which} must be homogeneous of degree {expected}")]
    NotHomogeneous { which: &'static str, expected: u64 },
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// `C(a, b)`, zero when `a < b`.
pub fn binomial(a: i64, b: u32) -> i64 {
    if a < b as i64 {
        return 0;
    }
    (0..b as i64).fold(1, |acc, i| acc * (a - i) / (i + 1))
}

fn require_degree<T: Scalar>(
    class: &CohomologyClass<T>,
    which: &'static str,
    expected: u64,
) -> Result<(), BundleError> {
    if class.is_homogeneous_of(expected) {
        Ok(())
    } else {
        Err(BundleError::NotHomogeneous { which, expected })
    }
}

/// Rank and Chern classes `c1, c2, c3` of a (possibly formal) bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalBundle<T> {
    rank: u32,
    c1: CohomologyClass<T>,
    c2: CohomologyClass<T>,
    c3: CohomologyClass<T>,
}

impl<T: Scalar> FormalBundle<T> {
    pub fn new(
        rank: u32,
        c1: CohomologyClass<T>,
        c2: CohomologyClass<T>,
        c3: CohomologyClass<T>,
    ) -> Result<Self, BundleError> {
        if rank == 0 {
            return Err(BundleError::ZeroRank);
        }
        let n = c1.n();
        for c in [&c2, &c3] {
            if c.n() != n {
                return Err(RingError::PresentationMismatch {
                    expected: n,
                    found: c.n(),
                }
                .into());
            }
        }
        require_degree(&c1, "c1", 2)?;
        require_degree(&c2, "c2", 4)?;
        require_degree(&c3, "c3", 6)?;
        Ok(FormalBundle { rank, c1, c2, c3 })
    }

    pub fn trivial(n: usize, rank: u32) -> Result<Self, BundleError> {
        let z = CohomologyClass::zero(n);
        Self::new(rank, z.clone(), z.clone(), z)
    }

    pub fn line(c1: CohomologyClass<T>) -> Result<Self, BundleError> {
        let z = CohomologyClass::zero(c1.n());
        Self::new(1, c1, z.clone(), z)
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn n(&self) -> usize {
        self.c1.n()
    }

    pub fn c1(&self) -> &CohomologyClass<T> {
        &self.c1
    }

    pub fn c2(&self) -> &CohomologyClass<T> {
        &self.c2
    }

    pub fn c3(&self) -> &CohomologyClass<T> {
        &self.c3
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> FormalBundle<U> {
        FormalBundle {
            rank: self.rank,
            c1: self.c1.map(&f),
            c2: self.c2.map(&f),
            c3: self.c3.map(&f),
        }
    }

    /// `c_i -> (-1)^i c_i`
    pub fn dual(&self) -> Self {
        FormalBundle {
            rank: self.rank,
            c1: self.c1.neg(),
            c2: self.c2.clone(),
            c3: self.c3.neg(),
        }
    }

    /// Tensor with a line bundle of first Chern class `l`.
    pub fn twist(
        &self,
        l: &CohomologyClass<T>,
        ring: &RingPresentation,
    ) -> Result<Self, BundleError> {
        require_degree(l, "twisting class", 2)?;
        let r = self.rank as i64;
        let k = |v: i64| T::from_int(v);
        let l2 = ring.mul(l, l)?;
        let l3 = ring.mul(&l2, l)?;
        let c1 = self.c1.add(&l.scale(&k(r)))?;
        let c2 = self
            .c2
            .add(&ring.mul(&self.c1, l)?.scale(&k(r - 1)))?
            .add(&l2.scale(&k(binomial(r, 2))))?;
        let c3 = self
            .c3
            .add(&ring.mul(&self.c2, l)?.scale(&k(r - 2)))?
            .add(&ring.mul(&self.c1, &l2)?.scale(&k(binomial(r - 1, 2))))?
            .add(&l3.scale(&k(binomial(r, 3))))?;
        Ok(FormalBundle {
            rank: self.rank,
            c1,
            c2,
            c3,
        })
    }

    /// `End V = V (x) V^*`: rank `r^2`, `c1 = c3 = 0`, `c2 = 2r c2(V) + (1 - r) c1(V)^2`.
    pub fn end_bundle(&self, ring: &RingPresentation) -> Result<Self, BundleError> {
        let r = self.rank as i64;
        let zero = CohomologyClass::zero(self.n());
        let c2 = self
            .c2
            .scale(&T::from_int(2 * r))
            .add(&ring.mul(&self.c1, &self.c1)?.scale(&T::from_int(1 - r)))?;
        Ok(FormalBundle {
            rank: self.rank * self.rank,
            c1: zero.clone(),
            c2,
            c3: zero,
        })
    }
}

/// A class split into its homogeneous parts of degree 0, 2, 4, 6.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedClass<T> {
    total: CohomologyClass<T>,
}

impl<T: Scalar> GradedClass<T> {
    pub fn new(total: CohomologyClass<T>) -> Self {
        GradedClass { total }
    }

    pub fn total(&self) -> &CohomologyClass<T> {
        &self.total
    }

    /// The part of complex degree `i` (real degree `2i`).
    pub fn part(&self, i: u64) -> CohomologyClass<T> {
        self.total.component(2 * i)
    }

    pub fn parts(&self) -> [CohomologyClass<T>; 4] {
        [self.part(0), self.part(1), self.part(2), self.part(3)]
    }

    pub fn add(&self, other: &Self) -> Result<Self, RingError> {
        Ok(GradedClass::new(self.total.add(&other.total)?))
    }

    /// Product truncated above degree 6.
    pub fn product(&self, other: &Self, ring: &RingPresentation) -> Result<Self, RingError> {
        Ok(GradedClass::new(ring.mul(&self.total, &other.total)?))
    }
}

pub type ChernCharacter<T> = GradedClass<T>;
pub type ToddClass<T> = GradedClass<T>;

impl<T: Field> FormalBundle<T> {
    /// `ch = r + c1 + (c1^2 - 2c2)/2 + (c1^3 - 3 c1 c2 + 3 c3)/6`
    pub fn chern_character(&self, ring: &RingPresentation) -> Result<ChernCharacter<T>, RingError> {
        let c1_sq = ring.mul(&self.c1, &self.c1)?;
        let c1_cu = ring.mul(&c1_sq, &self.c1)?;
        let c1c2 = ring.mul(&self.c1, &self.c2)?;
        let ch2 = c1_sq
            .sub(&self.c2.scale(&T::from_int(2)))?
            .scale(&T::ratio(1, 2));
        let ch3 = c1_cu
            .sub(&c1c2.scale(&T::from_int(3)))?
            .add(&self.c3.scale(&T::from_int(3)))?
            .scale(&T::ratio(1, 6));
        let total = CohomologyClass::constant(self.n(), T::from_int(self.rank as i64))
            .add(&self.c1)?
            .add(&ch2)?
            .add(&ch3)?;
        Ok(GradedClass::new(total))
    }
}

/// `exp(l)` truncated at degree 6.
pub fn exponential<T: Field>(
    l: &CohomologyClass<T>,
    ring: &RingPresentation,
) -> Result<GradedClass<T>, RingError> {
    let l2 = ring.mul(l, l)?;
    let l3 = ring.mul(&l2, l)?;
    let total = CohomologyClass::one(l.n())
        .add(l)?
        .add(&l2.scale(&T::ratio(1, 2)))?
        .add(&l3.scale(&T::ratio(1, 6)))?;
    Ok(GradedClass::new(total))
}

/// Todd class of `P`: `1 + c1/2 + (c1^2 + c2)/12 + c1 c2 / 24`.
pub fn todd<T: Field>(space: &TwistorSpace<T>) -> Result<ToddClass<T>, RingError> {
    let ring = space.ring();
    let c1 = space.c1();
    let c2 = space.c2();
    let td2 = ring.mul(c1, c1)?.add(c2)?.scale(&T::ratio(1, 12));
    let td3 = ring.mul(c1, c2)?.scale(&T::ratio(1, 24));
    let total = CohomologyClass::one(space.n())
        .add(&c1.scale(&T::ratio(1, 2)))?
        .add(&td2)?
        .add(&td3)?;
    Ok(GradedClass::new(total))
}

/// Value of `chi` together with whether it is an integer.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerCharacteristic<T> {
    pub value: T,
    pub integral: bool,
}

/// `integrate(ch * td)`
pub fn chi_from_character<T: Field>(
    ch: &ChernCharacter<T>,
    td: &ToddClass<T>,
    ring: &RingPresentation,
) -> Result<EulerCharacteristic<T>, RingError> {
    let value = ring.pairing(ch.total(), td.total())?;
    let integral = value.is_integral();
    Ok(EulerCharacteristic { value, integral })
}

pub fn euler_characteristic<T: Field>(
    bundle: &FormalBundle<T>,
    space: &TwistorSpace<T>,
) -> Result<EulerCharacteristic<T>, RingError> {
    let ch = bundle.chern_character(space.ring())?;
    chi_from_character(&ch, &todd(space)?, space.ring())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Basis;
    use crate::twistor::C2Mode;
    use crate::Rational;

    type Space = TwistorSpace<Rational>;
    type Class = CohomologyClass<Rational>;
    type Bundle = FormalBundle<Rational>;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    fn int(a: i64) -> Rational {
        q(a, 1)
    }

    fn pt(n: usize, v: Rational) -> Class {
        Class::from_terms(n, [(Basis::Point, v)]).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(5, 3), 10);
        assert_eq!(binomial(1, 2), 0);
        assert_eq!(binomial(0, 2), 0);
        assert_eq!(binomial(3, 0), 1);
        assert_eq!(binomial(2, 3), 0);
    }

    #[test]
    fn dual_examples() {
        let p = Space::build(1, &[1], C2Mode::Paper).unwrap();
        let v = Bundle::new(2, Class::zero(1), p.fibre().scale(&int(3)), Class::zero(1)).unwrap();
        assert_eq!(v.dual(), v);
        let l = Bundle::line(p.omega().clone()).unwrap();
        assert_eq!(l.dual().c1(), &p.omega().neg());
        assert_eq!(l.dual().dual(), l);
    }

    #[test]
    fn rejects_inhomogeneous_data() {
        let p = Space::build(1, &[1], C2Mode::Paper).unwrap();
        let bad = p.omega().add(p.fibre()).unwrap();
        assert_eq!(
            Bundle::new(1, bad.clone(), Class::zero(1), Class::zero(1)).unwrap_err(),
            BundleError::NotHomogeneous {
                which: "c1",
                expected: 2
            }
        );
        let v = Bundle::trivial(1, 2).unwrap();
        assert!(v.twist(&bad, p.ring()).is_err());
        assert_eq!(Bundle::trivial(1, 0).unwrap_err(), BundleError::ZeroRank);
    }

    #[test]
    fn twist_examples() {
        let p = Space::build(0, &[], C2Mode::Paper).unwrap();
        let ring = p.ring();
        let w = p.omega();
        let v = Bundle::new(3, w.scale(&int(2)), p.fibre().clone(), pt(0, int(5))).unwrap();
        assert_eq!(v.twist(&Class::zero(0), ring).unwrap(), v);

        let o = Bundle::trivial(0, 1).unwrap();
        assert_eq!(
            o.twist(&w.neg(), ring).unwrap(),
            Bundle::line(w.neg()).unwrap()
        );

        // rank 4, c2 = 4k w^2 twisted by -w on CP3
        for k in -2..5 {
            let e = Bundle::new(
                4,
                Class::zero(0),
                p.fibre().scale(&int(4 * k)),
                Class::zero(0),
            )
            .unwrap();
            let t = e.twist(&w.neg(), ring).unwrap();
            assert_eq!(t.c1(), &w.scale(&int(-4)));
            assert_eq!(t.c2(), &p.fibre().scale(&int(4 * k + 6)));
            assert_eq!(t.c3(), &pt(0, int(-(8 * k + 4))));
            assert_eq!(t.twist(w, ring).unwrap(), e);
        }
    }

    #[test]
    fn end_examples() {
        let p = Space::build(2, &[1, 0], C2Mode::Paper).unwrap();
        let ring = p.ring();
        let z = Class::zero(2);
        for k in -2..4 {
            let v = Bundle::new(2, z.clone(), p.fibre().scale(&int(k)), z.clone()).unwrap();
            let e = v.end_bundle(ring).unwrap();
            assert_eq!(e.rank(), 4);
            assert_eq!(e.c2(), &p.fibre().scale(&int(4 * k)));
            assert!(e.c1().is_zero() && e.c3().is_zero());
        }
        let line = Bundle::line(p.omega().add(&p.eta_i(2).unwrap()).unwrap()).unwrap();
        assert_eq!(
            line.end_bundle(ring).unwrap(),
            Bundle::trivial(2, 1).unwrap()
        );

        let e1 = p.eta_i(1).unwrap();
        let v = Bundle::new(3, e1.clone(), z.clone(), z.clone()).unwrap();
        let e = v.end_bundle(ring).unwrap();
        assert_eq!(e.rank(), 9);
        assert_eq!(e.c2(), &ring.mul(&e1, &e1).unwrap().scale(&int(-2)));
        assert_eq!(e.c2(), &p.fibre().scale(&int(2)));
    }

    #[test]
    fn chern_character_examples() {
        let p = Space::build(0, &[], C2Mode::Paper).unwrap();
        let ring = p.ring();
        let ch = Bundle::trivial(0, 5)
            .unwrap()
            .chern_character(ring)
            .unwrap();
        assert_eq!(ch.total(), &Class::constant(0, int(5)));

        let w = p.omega();
        let ch = Bundle::line(w.clone())
            .unwrap()
            .chern_character(ring)
            .unwrap();
        let [c0, c1, c2, c3] = ch.parts();
        assert_eq!(c0, Class::one(0));
        assert_eq!(&c1, w);
        assert_eq!(c2, ring.mul(w, w).unwrap().scale(&q(1, 2)));
        assert_eq!(c3, pt(0, q(1, 6)));

        let p = Space::build(2, &[0, 1], C2Mode::Paper).unwrap();
        for k in -3..4 {
            let z = Class::zero(2);
            let v = Bundle::new(2, z.clone(), p.fibre().scale(&int(k)), z.clone()).unwrap();
            let ch = v.chern_character(p.ring()).unwrap();
            assert_eq!(ch.part(2), p.fibre().scale(&int(-k)));
            assert!(ch.part(3).is_zero());
        }
    }

    #[test]
    fn todd_examples() {
        let p = Space::build(0, &[], C2Mode::Paper).unwrap();
        let td = todd(&p).unwrap();
        let w = p.omega();
        let w2 = p.mul(w, w).unwrap();
        assert_eq!(
            td.parts(),
            [
                Class::one(0),
                w.scale(&int(2)),
                w2.scale(&q(11, 6)),
                pt(0, int(1))
            ]
        );

        for n in 0..6 {
            let p = Space::with_all_ones(n, C2Mode::Paper).unwrap();
            let (w, eta, f) = (p.omega(), p.eta(), p.fibre());
            let e_minus_sgn = p.topology().euler - p.topology().signature;
            let bracket = p
                .mul(w, w)
                .unwrap()
                .scale(&int(16))
                .add(&p.mul(eta, eta).unwrap().scale(&int(4)))
                .unwrap()
                .add(&p.mul(w, eta).unwrap().scale(&int(16)))
                .unwrap()
                .add(&f.scale(&int(3 * e_minus_sgn)))
                .unwrap();
            assert_eq!(todd(&p).unwrap().part(2).scale(&int(12)), bracket);

            let p = Space::with_all_ones(n, C2Mode::Normalized).unwrap();
            assert_eq!(todd(&p).unwrap().part(3).integrate(), int(1));
        }
    }

    #[test]
    fn chi_examples() {
        let p = Space::build(0, &[], C2Mode::Paper).unwrap();
        let o = Bundle::trivial(0, 1).unwrap();
        assert_eq!(euler_characteristic(&o, &p).unwrap().value, int(1));
        let minus_s = Bundle::line(p.s().neg()).unwrap();
        assert_eq!(euler_characteristic(&minus_s, &p).unwrap().value, int(0));
        // chi(O(d)) on CP3 is C(d + 3, 3)
        for d in -6i64..6 {
            let l = Bundle::line(p.omega().scale(&int(d))).unwrap();
            let expected = Rational::from_integer(((d + 1) * (d + 2) * (d + 3) / 6).into());
            assert_eq!(euler_characteristic(&l, &p).unwrap().value, expected);
        }

        for n in 1..6 {
            let o = Bundle::trivial(n, 1).unwrap();
            let paper = Space::with_all_ones(n, C2Mode::Paper).unwrap();
            let norm = Space::with_all_ones(n, C2Mode::Normalized).unwrap();
            assert_eq!(
                euler_characteristic(&o, &paper).unwrap().value,
                int(1 + n as i64)
            );
            assert_eq!(euler_characteristic(&o, &norm).unwrap().value, int(1));
        }
    }

    #[test]
    fn non_integral_chi_is_flagged() {
        let p = Space::build(0, &[], C2Mode::Paper).unwrap();
        let v = Bundle::new(1, Class::zero(0), Class::zero(0), pt(0, int(1))).unwrap();
        let chi = euler_characteristic(&v, &p).unwrap();
        assert_eq!(chi.value, q(3, 2));
        assert!(!chi.integral);
    }
}
