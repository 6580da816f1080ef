use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use super::config::{AgreeSpec, BasisChoice, Fault, InputSpec, RunConfig, ScenarioKind, SchemeKind};
use super::message::{AbortReason, Envelope, Event, MessageBody, Metrics, PartyId, Phase, Transcript};
use super::parties::{
    alice_run, apply_pauli_frame, bob_recover, controller_act, phase_corrections, Action, BobKnowledge, Controller,
    Honesty, Reported, Role,
};
use super::prepare::{bob_label, classical_phase_exponent, prepare_shared_state};
use super::ProtocolError;
use crate::field::FieldElement;
use crate::rng::RunRng;
use crate::sharing::{generate_shares, reconstruct_keys, SecretVector, ShareSet, SharingError};
use crate::sim::{MeasurementRecord, Register};
use crate::{Basis, StateVector};

/// Fidelity above which a run counts as a success.
pub const SUCCESS_THRESHOLD: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    /// Some controllers acted before the vote opened.
    pub schedule_violation: bool,
    /// Bob finished without waiting for the vote.
    pub completed_before_vote: bool,
    /// Number of stolen keys Bob used.
    pub stolen_keys_used: usize,
}

/// The dealer's private draws, kept for analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DealerRecord {
    pub secret: Vec<u64>,
    pub keys: Vec<u64>,
    /// Controllers voting to let Bob finish, including early ones.
    pub agree: Vec<usize>,
    pub channels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    /// Between Bob's register and Alice's input; 0 for aborted runs.
    pub fidelity: f64,
    pub success: bool,
    /// Fidelity Bob ends up with in an aborted run if he applies the
    /// Pauli frame alone.
    pub guess_fidelity: Option<f64>,
    pub abort: Option<AbortReason>,
    pub flags: Flags,
    pub metrics: Metrics,
    pub dealer: DealerRecord,
    pub transcript: Transcript,
}

struct Run<'a> {
    cfg: &'a RunConfig,
    threshold: crate::sharing::ThresholdConfig,
    p: u64,
    keys: ShareSet,
    bases: Vec<Basis>,
    agree: BTreeSet<usize>,
    channels: Vec<usize>,
    state: StateVector,
    rng: RunRng,
    events: Vec<Event>,
    seq: u64,
    metrics: Metrics,
    phase: Phase,
    bell: Vec<(u8, u8)>,
    reports: BTreeMap<usize, Reported>,
    reported_keys: BTreeMap<usize, u64>,
    flags: Flags,
}

impl Run<'_> {
    fn send(&mut self, from: PartyId, to: PartyId, body: MessageBody) {
        let envelope = Envelope { seq: self.seq, from, to, body };
        self.seq += 1;
        self.events.push(Event::Message { phase: self.phase, envelope });
    }

    fn measured(&mut self, party: PartyId, record: MeasurementRecord) {
        self.events.push(Event::Measurement { phase: self.phase, party, record });
    }

    fn operation(&mut self, party: PartyId, gate: String, sites: Vec<String>) {
        self.events.push(Event::Operation { phase: self.phase, party, gate, sites });
    }

    fn honesty(&self, s: usize) -> Honesty {
        match self.cfg.scenario {
            ScenarioKind::WrongOutcome(l) if l == s => Honesty { flip_outcome: true, wrong_key: false },
            ScenarioKind::WrongKey(l) if l == s => Honesty { flip_outcome: false, wrong_key: true },
            _ => Honesty::default(),
        }
    }

    fn controller_step(&mut self, s: usize, action: Action) -> Result<(), ProtocolError> {
        let role = if self.agree.contains(&s) { Role::Agree } else { Role::Disagree };
        let key = self.keys.get(s).expect("full codeword").value();
        let ctl = Controller {
            s,
            scheme: self.cfg.scheme,
            role,
            basis: self.bases.get(s - 1),
            key,
            p: self.p,
            honesty: self.honesty(s),
        };
        let state = std::mem::replace(&mut self.state, StateVector::zero(Register::qubits(["_"])?));
        let step = controller_act(&ctl, action, state, &mut self.rng)?;
        self.state = step.state;
        if let Some(rec) = step.record {
            self.metrics.controller_measurements += 1;
            self.measured(PartyId::Controller(s), rec);
        }
        for body in step.messages {
            match &body {
                MessageBody::AgreeReport { outcome, key, .. } => {
                    self.reports.insert(s, Reported { outcome: *outcome, solicited: false });
                    if let Some(k) = key {
                        self.reported_keys.insert(s, *k);
                    }
                }
                MessageBody::SolicitReply { outcome, .. } => {
                    self.reports.insert(s, Reported { outcome: *outcome, solicited: true });
                }
                MessageBody::ClassicalKey { key, .. } => {
                    self.reported_keys.insert(s, *key);
                }
                _ => {}
            }
            self.send(PartyId::Controller(s), PartyId::Bob, body);
        }
        Ok(())
    }

    /// Keys Bob holds: reported ones, overridden by stolen true keys.
    fn known_keys(&mut self) -> ShareSet {
        let mut known = ShareSet::new();
        for (&s, &c) in &self.reported_keys {
            known.insert(s, FieldElement::new(c, self.threshold.modulus()));
        }
        let mut used = 0;
        for s in self.cfg.scenario.stolen() {
            if !self.reported_keys.contains_key(&s) {
                used += 1;
            }
            known.insert(s, self.keys.get(s).expect("full codeword"));
        }
        self.flags.stolen_keys_used = used;
        known
    }

    fn bob_ready(&mut self) -> bool {
        match self.cfg.scheme {
            SchemeKind::Ghz => self.reports.len() == self.cfg.m,
            _ => self.known_keys().len() >= self.cfg.k,
        }
    }

    fn controlled_channels(&self) -> BTreeSet<usize> {
        match self.cfg.scheme {
            SchemeKind::EconBob => self.channels.iter().copied().collect(),
            _ => [self.cfg.n].into(),
        }
    }

    /// Pauli frames of the uncontrolled channels.
    fn bob_partial(&mut self) -> Result<(), ProtocolError> {
        self.phase = Phase::BobPartial;
        let controlled = self.controlled_channels();
        for l in 1..=self.cfg.n {
            if !controlled.contains(&l) {
                for g in apply_pauli_frame(&mut self.state, l, self.bell[l - 1])? {
                    self.metrics.bob_alice_recovery_ops += 1;
                    self.operation(PartyId::Bob, g.into(), vec![bob_label(l)]);
                }
            }
        }
        Ok(())
    }

    /// Step (iii): all keys from at least `k` of them.
    fn bob_keys(&mut self) -> Result<Result<Vec<u64>, AbortReason>, ProtocolError> {
        if self.cfg.scheme == SchemeKind::Ghz {
            if self.reports.len() < self.cfg.m {
                return Ok(Err(AbortReason::InsufficientAgreement { have: self.reports.len(), need: self.cfg.m }));
            }
            return Ok(Ok(vec![]));
        }
        let known = self.known_keys();
        match reconstruct_keys(&known, &self.threshold) {
            Ok(all) => Ok(Ok(all.values())),
            Err(SharingError::InsufficientShares { have, need }) => {
                Ok(Err(AbortReason::InsufficientAgreement { have, need }))
            }
            Err(SharingError::InconsistentShares) => Ok(Err(AbortReason::InconsistentShares)),
            Err(e) => Err(e.into()),
        }
    }

    /// Steps (iv)-(v). Controllers refuse, and abort, once the dealer's
    /// bulletin shows more than `m - k` solicits.
    fn solicit_rest(&mut self) -> Result<Option<AbortReason>, ProtocolError> {
        if !self.cfg.scheme.is_econ() {
            return Ok(None);
        }
        self.phase = Phase::Solicits;
        let cap = self.cfg.m - self.cfg.k;
        let pending: Vec<usize> = (1..=self.cfg.m).filter(|s| !self.reports.contains_key(s)).collect();
        let mut bulletin = 0usize;
        let mut accepted = Vec::new();
        for s in pending {
            self.send(PartyId::Bob, PartyId::Controller(s), MessageBody::Solicit { s });
            self.metrics.solicits_sent += 1;
            bulletin += 1;
            if bulletin > cap {
                let reason = AbortReason::SolicitCapExceeded { cap };
                self.send(PartyId::Controller(s), PartyId::Bob, MessageBody::Abort { reason: reason.clone() });
                return Ok(Some(reason));
            }
            accepted.push(s);
        }
        self.phase = Phase::Replies;
        for s in accepted {
            self.controller_step(s, Action::Solicited)?;
        }
        Ok(None)
    }

    fn finish(&mut self, keys: Vec<u64>) -> Result<(), ProtocolError> {
        self.phase = Phase::BobFinish;
        let classical_exponent = if self.cfg.scheme == SchemeKind::Classical {
            let full = ShareSet::from_pairs(
                keys.iter().enumerate().map(|(i, &c)| (i + 1, FieldElement::new(c, self.threshold.modulus()))),
            )?;
            classical_phase_exponent(&full, &self.threshold)?
        } else {
            0
        };
        let know = BobKnowledge {
            n: self.cfg.n,
            p: self.p,
            channels: self.channels.clone(),
            keys,
            classical_exponent,
            outcomes: self.reports.clone(),
        };
        let corrections = match self.cfg.fault {
            Fault::None => phase_corrections(self.cfg.scheme, &know),
            Fault::SkipPhaseRecovery => vec![],
        };
        let frames = self.controlled_frames();
        let (ctl, alice) = bob_recover(&mut self.state, &corrections, &frames)?;
        self.metrics.bob_controller_recovery_ops += ctl.len();
        self.metrics.bob_alice_recovery_ops += alice.len();
        for (gate, site) in ctl.into_iter().chain(alice) {
            self.operation(PartyId::Bob, gate, vec![site]);
        }
        Ok(())
    }

    fn controlled_frames(&self) -> Vec<(usize, (u8, u8))> {
        self.controlled_channels().into_iter().map(|l| (l, self.bell[l - 1])).collect()
    }

    fn fidelity(&self, input: &StateVector) -> Result<f64, ProtocolError> {
        let sites = (1..=self.cfg.n).map(|l| self.state.site(&bob_label(l))).collect::<Result<Vec<_>, _>>()?;
        Ok(self.state.fidelity_on(&sites, input)?)
    }
}

fn draw_input(cfg: &RunConfig, rng: &mut RunRng) -> Result<StateVector, ProtocolError> {
    let reg = Register::qubits((1..=cfg.n).map(bob_label))?;
    Ok(match &cfg.input {
        InputSpec::Random => StateVector::random(reg, rng),
        InputSpec::Amplitudes(a) => StateVector::from_amplitudes(reg, a.clone())?,
    })
}

/// Runs one protocol instance end to end under the engine's fixed phase
/// order. Aborts are recorded in the result; invalid configurations and
/// simulator failures are errors.
pub fn run_protocol(cfg: &RunConfig) -> Result<RunResult, ProtocolError> {
    cfg.validate()?;
    let threshold = cfg.threshold()?;
    let modulus = threshold.modulus();
    let mut rng = RunRng::new(cfg.seed);

    let secret = match &cfg.secret {
        Some(x) => SecretVector::new(x, modulus),
        None => SecretVector::random(&mut rng, cfg.k, modulus),
    };
    let keys = generate_shares(&secret, &threshold)?;
    let bases: Vec<Basis> = if cfg.scheme.is_econ() {
        (1..=cfg.m)
            .map(|s| match cfg.bases {
                BasisChoice::Haar => Basis::haar(&mut rng, format!("C{s}")),
                BasisChoice::Computational => Basis::computational(format!("C{s}")),
            })
            .collect()
    } else {
        vec![]
    };
    let input = draw_input(cfg, &mut rng)?;
    let agree: BTreeSet<usize> = match &cfg.agree {
        AgreeSpec::Explicit(set) => set.clone(),
        AgreeSpec::Random(t) => sample(&mut rng, cfg.m, *t).into_iter().map(|i| i + 1).collect(),
    };
    let friendly = cfg.scenario.friendly();
    let voters: BTreeSet<usize> = agree.union(&friendly).copied().collect();

    let prepared = prepare_shared_state(cfg, &threshold, &keys, &bases, &input)?;
    let mut run = Run {
        cfg,
        p: modulus.get(),
        threshold,
        keys,
        bases,
        agree: voters.clone(),
        channels: cfg.channel_map(),
        state: prepared.state,
        rng,
        events: Vec::new(),
        seq: 0,
        metrics: Metrics {
            prep_single_qubit_ops: prepared.single_ops,
            prep_two_qubit_ops: prepared.two_ops,
            ..Metrics::default()
        },
        phase: Phase::Setup,
        bell: Vec::new(),
        reports: BTreeMap::new(),
        reported_keys: BTreeMap::new(),
        flags: Flags::default(),
    };
    for op in prepared.ops {
        run.operation(PartyId::Dealer, op.gate, op.sites);
    }

    run.phase = Phase::Alice;
    let state = std::mem::replace(&mut run.state, StateVector::zero(Register::qubits(["_"])?));
    let (msg, state, records) = alice_run(state, cfg.n, &mut run.rng)?;
    run.state = state;
    for rec in records {
        run.metrics.bell_measurements += 1;
        run.measured(PartyId::Alice, rec);
    }
    if let MessageBody::BellOutcomes(o) = &msg {
        run.bell = o.clone();
    }
    run.send(PartyId::Alice, PartyId::Bob, msg);

    let mut early = false;
    if !friendly.is_empty() {
        run.phase = Phase::PreVote;
        run.flags.schedule_violation = true;
        for &s in &friendly {
            run.controller_step(s, Action::Vote)?;
        }
        early = run.bob_ready();
    }
    if !early {
        run.phase = Phase::Vote;
        for &s in agree.difference(&friendly) {
            run.controller_step(s, Action::Vote)?;
        }
    }

    run.bob_partial()?;
    let mut abort = None;
    match run.bob_keys()? {
        Err(reason) => abort = Some(reason),
        Ok(all_keys) => match run.solicit_rest()? {
            Some(reason) => abort = Some(reason),
            None => run.finish(all_keys)?,
        },
    }
    run.flags.completed_before_vote = early && abort.is_none();

    let (fidelity, guess_fidelity) = match &abort {
        None => (run.fidelity(&input)?, None),
        Some(_) => {
            run.phase = Phase::BobFinish;
            for (l, ij) in run.controlled_frames() {
                apply_pauli_frame(&mut run.state, l, ij)?;
            }
            (0.0, Some(run.fidelity(&input)?))
        }
    };
    Ok(RunResult {
        seed: cfg.seed,
        fidelity,
        success: abort.is_none() && fidelity > SUCCESS_THRESHOLD,
        guess_fidelity,
        abort,
        flags: run.flags,
        metrics: run.metrics,
        dealer: DealerRecord {
            secret: secret.values(),
            keys: run.keys.values(),
            agree: voters.into_iter().collect(),
            channels: run.channels,
        },
        transcript: Transcript { events: run.events },
    })
}
