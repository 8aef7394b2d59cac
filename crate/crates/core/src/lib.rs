//! Exact intersection theory on twistor spaces over `#n(-CP2)`.
//!
//! The math modules are generic over the coefficient type; the aliases below
//! fix the exact integer and rational instantiations used everywhere else.

pub mod bundle;
pub mod dsl;
pub mod instanton;
pub mod ring;
pub mod scalar;
pub mod twistor;

pub use bundle::{BundleError, EulerCharacteristic, FormalBundle, GradedClass};
pub use ring::{Basis, CohomologyClass, RawMonomial, RawPolynomial, RingError, RingPresentation};
pub use scalar::{Field, Scalar};
pub use twistor::{C2Mode, SpaceDoc, SpaceError, SpaceOptions, Topology, TwistorSpace};

pub type Integer = num_bigint::BigInt;
pub type Rational = num_rational::BigRational;

pub type IntClass = CohomologyClass<Integer>;
pub type Class = CohomologyClass<Rational>;
pub type Bundle = FormalBundle<Rational>;
pub type Space = TwistorSpace<Rational>;
