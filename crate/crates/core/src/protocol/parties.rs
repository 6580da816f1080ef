use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

use super::config::SchemeKind;
use super::message::MessageBody;
use super::prepare::{alice_label, bob_label, controller_label, input_label};
use super::ProtocolError;
use crate::sim::{MeasureBasis, MeasurementRecord};
use crate::{Basis, Gate, StateVector};

/// Alice's Bell measurements on `(A'_l, A_l)` for `l = 1..n`, in order. The
/// measured qubits are dropped from the returned state.
pub fn alice_run<R: RngCore>(
    state: StateVector,
    n: usize,
    rng: &mut R,
) -> Result<(MessageBody, StateVector, Vec<MeasurementRecord>), ProtocolError> {
    let mut state = state;
    let mut outcomes = Vec::with_capacity(n);
    let mut records = Vec::with_capacity(n);
    for l in 1..=n {
        let sites = [state.site(&input_label(l))?, state.site(&alice_label(l))?];
        let (rec, rest) = state.measure_and_discard(&sites, &MeasureBasis::Bell, rng)?;
        outcomes.push(((rec.outcome >> 1) as u8, (rec.outcome & 1) as u8));
        records.push(rec);
        state = rest;
    }
    Ok((MessageBody::BellOutcomes(outcomes), state, records))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Agree,
    Disagree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Acting on the controller's own vote (or early, when friendly).
    Vote,
    /// Acting on a solicit from Bob.
    Solicited,
}

/// What a lying controller corrupts in its reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Honesty {
    pub flip_outcome: bool,
    pub wrong_key: bool,
}

/// One controller's private view.
#[derive(Debug, Clone)]
pub struct Controller<'a> {
    pub s: usize,
    pub scheme: SchemeKind,
    pub role: Role,
    pub basis: Option<&'a Basis>,
    pub key: u64,
    pub p: u64,
    pub honesty: Honesty,
}

#[derive(Debug, Clone)]
pub struct ControllerStep {
    pub messages: Vec<MessageBody>,
    pub state: StateVector,
    pub record: Option<MeasurementRecord>,
}

impl Controller<'_> {
    fn basis(&self) -> Result<&Basis, ProtocolError> {
        self.basis.ok_or_else(|| ProtocolError::Validation(format!("controller {} has no basis", self.s)))
    }

    fn measurement(&self, action: Action) -> Result<MeasureBasis<f64>, ProtocolError> {
        Ok(match (self.scheme, action) {
            (SchemeKind::Ghz, _) => MeasureBasis::X,
            (SchemeKind::QuditPoly, _) => MeasureBasis::Computational,
            (SchemeKind::EconBob, Action::Vote) => self.basis()?.plus_minus_basis(),
            (SchemeKind::EconQubit | SchemeKind::EconBob, _) => self.basis()?.measure_basis(),
            (SchemeKind::Classical, _) => unreachable!("classical controllers hold no qubit"),
        })
    }

    fn report_outcome(&self, outcome: u64) -> u64 {
        match (self.scheme, self.honesty.flip_outcome) {
            (_, false) => outcome,
            (SchemeKind::QuditPoly, true) => (outcome + 1) % self.p,
            (_, true) => 1 - outcome,
        }
    }

    fn report_key(&self, key: u64) -> u64 {
        if self.honesty.wrong_key {
            (key + 1) % self.p
        } else {
            key
        }
    }
}

/// Performs the controller's part for `action` and returns its messages to
/// Bob. The measured site is dropped from the returned state.
pub fn controller_act<R: RngCore>(
    ctl: &Controller<'_>,
    action: Action,
    state: StateVector,
    rng: &mut R,
) -> Result<ControllerStep, ProtocolError> {
    if ctl.role == Role::Disagree && action == Action::Vote {
        return Err(ProtocolError::ProtocolOrderViolation { s: ctl.s });
    }
    if ctl.scheme == SchemeKind::Classical {
        if action == Action::Solicited {
            return Err(ProtocolError::ProtocolOrderViolation { s: ctl.s });
        }
        let key = ctl.report_key(ctl.key);
        return Ok(ControllerStep { messages: vec![MessageBody::ClassicalKey { s: ctl.s, key }], state, record: None });
    }
    if action == Action::Solicited && !ctl.scheme.is_econ() {
        return Err(ProtocolError::ProtocolOrderViolation { s: ctl.s });
    }
    let site = state.site(&controller_label(ctl.s))?;
    let (record, state) = state.measure_and_discard(&[site], &ctl.measurement(action)?, rng)?;
    let outcome = record.outcome as u64;
    let body = match action {
        Action::Solicited => MessageBody::SolicitReply { s: ctl.s, outcome: ctl.report_outcome(outcome) },
        Action::Vote => {
            let reported = ctl.report_outcome(outcome);
            let key = match ctl.scheme {
                SchemeKind::Ghz => None,
                SchemeKind::QuditPoly => Some(ctl.report_key(reported)),
                _ => Some(ctl.report_key(ctl.key)),
            };
            let outcome = if ctl.scheme == SchemeKind::QuditPoly { key.unwrap_or(reported) } else { reported };
            MessageBody::AgreeReport { s: ctl.s, outcome, key }
        }
    };
    Ok(ControllerStep { messages: vec![body], state, record: Some(record) })
}

/// A controller outcome as Bob received it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reported {
    pub outcome: u64,
    /// Measured on a solicit rather than on the controller's own vote.
    pub solicited: bool,
}

/// Exact phase gate `diag[e^{-2πi zero/denom}, e^{-2πi one/denom}]` on `B_channel`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhaseCorrection {
    pub channel: usize,
    pub zero: u64,
    pub one: u64,
    pub denom: u64,
}

impl PhaseCorrection {
    pub const fn z(channel: usize) -> Self {
        Self { channel, zero: 0, one: 1, denom: 2 }
    }

    pub fn gate(&self) -> Gate {
        let a = |e: u64| -TAU * e as f64 / self.denom as f64;
        Gate::phases(&[a(self.zero), a(self.one)])
    }

    pub fn label(&self) -> String {
        if *self == Self::z(self.channel) {
            "Z".into()
        } else {
            format!("D[-2pi*{}/{},-2pi*{}/{}]", self.zero, self.denom, self.one, self.denom)
        }
    }

    /// Relative phase `(one - zero) / denom` in lowest terms, which fixes the
    /// gate up to a global phase.
    pub fn relative(&self) -> (u64, u64) {
        let num = (self.one + self.denom - self.zero % self.denom) % self.denom;
        let g = gcd(num, self.denom);
        (num / g, self.denom / g)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// What Bob knows once every needed report is in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BobKnowledge {
    pub n: usize,
    pub p: u64,
    /// Channel of each controller, 1-based.
    pub channels: Vec<usize>,
    /// All `m` keys (the reconstructed codeword); empty for GHZ.
    pub keys: Vec<u64>,
    /// Classical phase exponent; only used by the classical scheme.
    pub classical_exponent: u64,
    pub outcomes: BTreeMap<usize, Reported>,
}

/// Controller-dependent corrections, in application order. All of them are
/// diagonal and must precede the Pauli frame `Z^i X^j` of their channel.
pub fn phase_corrections(scheme: SchemeKind, know: &BobKnowledge) -> Vec<PhaseCorrection> {
    let p = know.p;
    let n = know.n;
    let tilde = |s: usize, r: u64, c: u64| PhaseCorrection {
        channel: know.channels[s - 1],
        zero: (r * c) % p,
        one: ((1 - r) * c) % p,
        denom: p,
    };
    match scheme {
        SchemeKind::Ghz => {
            let minus = know.outcomes.values().filter(|r| r.outcome == 1).count();
            if minus % 2 == 1 {
                vec![PhaseCorrection::z(n)]
            } else {
                vec![]
            }
        }
        SchemeKind::QuditPoly => {
            // θ = π Σ c_s / p = 2π Σ c_s / (2p)
            let sum: u64 = know.keys.iter().sum();
            vec![PhaseCorrection { channel: n, zero: 0, one: sum % (2 * p), denom: 2 * p }]
        }
        SchemeKind::Classical => {
            vec![PhaseCorrection { channel: n, zero: 0, one: know.classical_exponent % p, denom: p }]
        }
        SchemeKind::EconQubit => {
            know.outcomes.iter().map(|(&s, r)| tilde(s, r.outcome, know.keys[s - 1])).collect()
        }
        SchemeKind::EconBob => know
            .outcomes
            .iter()
            .filter_map(|(&s, r)| match (r.solicited, r.outcome) {
                (true, v) => Some(tilde(s, v, know.keys[s - 1])),
                (false, 1) => Some(PhaseCorrection::z(know.channels[s - 1])),
                (false, _) => None,
            })
            .collect(),
    }
}

/// Applies `Z^i X^j` to `B_l` (X first) and returns the gates applied.
pub fn apply_pauli_frame(state: &mut StateVector, l: usize, (i, j): (u8, u8)) -> Result<Vec<&'static str>, ProtocolError> {
    let site = state.site(&bob_label(l))?;
    let mut gates = Vec::new();
    if j == 1 {
        state.apply_single(site, &Gate::pauli_x())?;
        gates.push("X");
    }
    if i == 1 {
        state.apply_single(site, &Gate::pauli_z())?;
        gates.push("Z");
    }
    Ok(gates)
}

/// Bob's final recovery on the controlled channels: the phase corrections,
/// then the Pauli frame. Returns the labels and sites of the applied gates,
/// split into controller-dependent and Alice-dependent ones.
pub fn bob_recover(
    state: &mut StateVector,
    corrections: &[PhaseCorrection],
    frames: &[(usize, (u8, u8))],
) -> Result<(Vec<(String, String)>, Vec<(String, String)>), ProtocolError> {
    let mut from_controllers = Vec::new();
    for c in corrections {
        let site = state.site(&bob_label(c.channel))?;
        state.apply_single(site, &c.gate())?;
        from_controllers.push((c.label(), bob_label(c.channel)));
    }
    let mut from_alice = Vec::new();
    for &(l, ij) in frames {
        for g in apply_pauli_frame(state, l, ij)? {
            from_alice.push((g.to_string(), bob_label(l)));
        }
    }
    Ok((from_controllers, from_alice))
}
