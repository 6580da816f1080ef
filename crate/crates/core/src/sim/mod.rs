//! Exact mixed-radix state-vector simulation.
//!
//! Amplitudes are indexed big-endian in site order: site 0 is the most
//! significant digit. Everything is generic over the real scalar `T`; the
//! crate root exports `f64` aliases, and the `f64` tolerances used by the
//! protocol tests (1e-12 for algebraic identities, 1e-9 end to end) assume
//! double precision.

mod basis;
mod operator;
mod register;
mod state;

pub use basis::{bell_vector, BasisSpec, MeasureBasis};
pub use operator::Operator;
pub use register::{Register, MAX_DIMENSION};
pub use state::{fidelity, MeasurementRecord, SiteInit, State};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use thiserror::Error;

/// Real scalar the simulator is generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance for unitarity and normalisation checks at this precision.
    fn tolerance() -> Self {
        let floor = Self::from_f64(1e-12).unwrap();
        floor.max(Self::epsilon() * Self::from_f64(1e3).unwrap())
    }

    fn lit(v: f64) -> Self {
        Self::from_f64(v).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("register dimension {0} exceeds the cap {MAX_DIMENSION}")]
    CapExceeded(u128),
    #[error("duplicate site label {0}")]
    DuplicateLabel(String),
    #[error("unknown site {0}")]
    UnknownSite(String),
    #[error("operator is not unitary (deviation {0:e})")]
    NonUnitary(f64),
    #[error("site {0} used twice in one operation")]
    SiteCollision(usize),
    #[error("site {0} is not a qubit")]
    NotQubit(usize),
    #[error("basis of dimension {basis} does not fit local dimension {local}")]
    BasisDimensionMismatch { basis: usize, local: usize },
    #[error("states have different shapes")]
    ShapeMismatch,
    #[error("state is not normalised (norm^2 = {0})")]
    NotNormalised(f64),
}
