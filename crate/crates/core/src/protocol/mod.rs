//! Party state machines for the five control schemes.
//!
//! A run is strictly sequential: the dealer prepares the shared state, then
//! the phases of [`Phase`] execute in order and every message, measurement
//! and gate is appended to the [`Transcript`]. Sites are labelled `A'l`,
//! `Al`, `Bl` (`l = 1..n`) and `Cs` (`s = 1..m`).

mod analysis;
mod config;
mod engine;
mod message;
mod parties;
mod prepare;

pub use analysis::{
    candidate_recoveries, expected_controller_recovery_ops, minus_probability, coarse_estimate, soundness,
    CandidateRecovery, Soundness,
};
pub use config::{AgreeSpec, BasisChoice, Fault, InputSpec, RunConfig, ScenarioKind, SchemeKind};
pub use engine::{run_protocol, DealerRecord, Flags, RunResult, SUCCESS_THRESHOLD};
pub use message::{AbortReason, Envelope, Event, MessageBody, Metrics, PartyId, Phase, Transcript};
pub use parties::{
    alice_run, apply_pauli_frame, bob_recover, controller_act, phase_corrections, Action, BobKnowledge, Controller,
    ControllerStep, Honesty, PhaseCorrection, Reported, Role,
};
pub use prepare::{
    alice_label, bob_label, classical_phase_exponent, completion_matrix, controller_label, input_label,
    prepare_shared_state, PrepOp, Prepared,
};

use thiserror::Error;

use crate::field::FieldError;
use crate::sharing::SharingError;
use crate::sim::SimError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Sharing(#[from] SharingError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("operation needs scheme {expected}, got {actual}")]
    WrongScheme { expected: SchemeKind, actual: SchemeKind },
    #[error("controller {s} acted out of order")]
    ProtocolOrderViolation { s: usize },
}

#[cfg(test)]
mod tests;
