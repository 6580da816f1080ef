use serde::{Deserialize, Serialize};
use std::fmt;

use crate::sim::MeasurementRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartyId {
    Dealer,
    Alice,
    Bob,
    /// 1-based controller index.
    Controller(usize),
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dealer => f.write_str("dealer"),
            Self::Alice => f.write_str("alice"),
            Self::Bob => f.write_str("bob"),
            Self::Controller(s) => write!(f, "C{s}"),
        }
    }
}

/// Scheduler phases, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Setup,
    Alice,
    PreVote,
    Vote,
    BobPartial,
    Solicits,
    Replies,
    BobFinish,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortReason {
    /// Fewer than `need` keys reached Bob.
    InsufficientAgreement { have: usize, need: usize },
    /// A solicit beyond the `cap = m - k` allowance.
    SolicitCapExceeded { cap: usize },
    /// Over-determined keys do not lie on one codeword.
    InconsistentShares,
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InsufficientAgreement { have, need } => write!(f, "insufficient agreement: {have} of {need} keys"),
            Self::SolicitCapExceeded { cap } => write!(f, "more than {cap} solicits"),
            Self::InconsistentShares => f.write_str("inconsistent shares"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageBody {
    /// `(i_l, j_l)` for `l = 1..n`.
    BellOutcomes(Vec<(u8, u8)>),
    /// Outcome `r_s`, `u_s`, a GHZ sign bit or a qudit digit, plus the key.
    AgreeReport { s: usize, outcome: u64, key: Option<u64> },
    Solicit { s: usize },
    SolicitReply { s: usize, outcome: u64 },
    ClassicalKey { s: usize, key: u64 },
    Abort { reason: AbortReason },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub seq: u64,
    pub from: PartyId,
    pub to: PartyId,
    pub body: MessageBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "event")]
pub enum Event {
    Message { phase: Phase, envelope: Envelope },
    Measurement { phase: Phase, party: PartyId, record: MeasurementRecord },
    Operation { phase: Phase, party: PartyId, gate: String, sites: Vec<String> },
}

impl Event {
    pub fn phase(&self) -> Phase {
        match self {
            Self::Message { phase, .. } | Self::Measurement { phase, .. } | Self::Operation { phase, .. } => *phase,
        }
    }
}

/// Ordered record of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Transcript {
    pub events: Vec<Event>,
}

impl Transcript {
    pub fn messages(&self) -> impl Iterator<Item = &Envelope> {
        self.events.iter().filter_map(|e| match e {
            Event::Message { envelope, .. } => Some(envelope),
            _ => None,
        })
    }

    pub fn measurements(&self) -> impl Iterator<Item = (PartyId, &MeasurementRecord)> {
        self.events.iter().filter_map(|e| match e {
            Event::Measurement { party, record, .. } => Some((*party, record)),
            _ => None,
        })
    }

    pub fn operations(&self) -> impl Iterator<Item = (Phase, PartyId, &str)> {
        self.events.iter().filter_map(|e| match e {
            Event::Operation { phase, party, gate, .. } => Some((*phase, *party, gate.as_str())),
            _ => None,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transcript serialises")
    }
}

/// Operation and measurement counts of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub prep_single_qubit_ops: usize,
    pub prep_two_qubit_ops: usize,
    pub bell_measurements: usize,
    pub controller_measurements: usize,
    pub bob_alice_recovery_ops: usize,
    pub bob_controller_recovery_ops: usize,
    pub solicits_sent: usize,
}
