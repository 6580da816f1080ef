//! Simulation library for (k, m)-threshold controlled quantum teleportation.
//!
//! * [`field`]: exact GF(p) arithmetic, elimination, Vandermonde codes.
//! * [`sharing`]: classical threshold keys `c = A x` and secrecy tooling.
//! * [`sim`]: mixed-radix state vectors, generic over the real scalar.
//! * [`protocol`]: the party state machines and the five control schemes.

pub mod field;
pub mod protocol;
pub mod rng;
pub mod sharing;
pub mod sim;

pub use field::{FieldElement, FieldMatrix, PrimeModulus};
pub use rng::RunRng;
pub use sharing::{SecretVector, ShareSet, ThresholdConfig};

/// Amplitude type used by the protocol engine.
pub type Complex = num_complex::Complex64;
pub type StateVector = sim::State<f64>;
pub type Gate = sim::Operator<f64>;
pub type Basis = sim::BasisSpec<f64>;
pub type Measurement = sim::MeasureBasis<f64>;
