use super::*;
use crate::field::{FieldElement, PrimeModulus};
use crate::sharing::{codeword_set, ShareSet, ThresholdConfig};
use crate::sim::{MeasureBasis, Register};
use crate::{Basis, Complex, Gate, StateVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

fn zero_input(n: usize) -> StateVector {
    StateVector::zero(Register::qubits((1..=n).map(bob_label)).unwrap())
}

fn keys(values: &[u64], p: u64) -> ShareSet {
    let p = PrimeModulus::new(p).unwrap();
    ShareSet::from_pairs(values.iter().enumerate().map(|(i, &c)| (i + 1, FieldElement::new(c, p)))).unwrap()
}

/// Amplitudes with `A'` in `|0...0>`: the channel part of a prepared state.
fn channel_part(st: &StateVector, n: usize) -> Vec<Complex> {
    let rest = st.amplitudes().len() >> n;
    st.amplitudes()[..rest].to_vec()
}

fn equal_up_to_phase(a: &[Complex], b: &[Complex], tol: f64) -> bool {
    let ip: Complex = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    (ip.norm() - (na * nb).sqrt()).abs() < tol
}

#[test]
fn econ_channel_example() {
    let mut cfg = RunConfig::new(SchemeKind::EconQubit, 1, 1, 1).with_p(2);
    cfg.secret = Some(vec![1]);
    let th = cfg.threshold().unwrap();
    let bases = [Basis::computational("C1")];
    let prep = prepare_shared_state(&cfg, &th, &keys(&[1], 2), &bases, &zero_input(1)).unwrap();
    // Oracle: (1/√2) Σ_y |yy> (e^{iπy}|0> + e^{iπ¬y}|1>)/√2 over A1 B1 C1.
    let mut oracle = vec![Complex::new(0.0, 0.0); 8];
    for y in 0..2usize {
        for c in 0..2usize {
            let bit = if c == 0 { y } else { 1 - y };
            oracle[(y << 2) | (y << 1) | c] = Complex::from_polar(0.5, PI * bit as f64);
        }
    }
    let got = channel_part(&prep.state, 1);
    assert!(equal_up_to_phase(&got, &oracle, 1e-12));
    // Closed form (1/2)[|00>(|0>-|1>) + |11>(-|0>+|1>)].
    let h = Complex::new(0.5, 0.0);
    let closed = [h, -h, Complex::default(), Complex::default(), Complex::default(), Complex::default(), -h, h];
    assert!(equal_up_to_phase(&got, &closed, 1e-12));
}

#[test]
fn ghz_channel_example() {
    let cfg = RunConfig::new(SchemeKind::Ghz, 1, 2, 2);
    let th = cfg.threshold().unwrap();
    let prep = prepare_shared_state(&cfg, &th, &keys(&[0, 0], 2), &[], &zero_input(1)).unwrap();
    let got = channel_part(&prep.state, 1);
    let mut want = vec![Complex::default(); 16];
    want[0] = Complex::new(FRAC_1_SQRT_2, 0.0);
    want[15] = Complex::new(FRAC_1_SQRT_2, 0.0);
    assert!(got.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
}

#[test]
fn qudit_channel_is_phased_codeword_superposition() {
    let cfg = RunConfig::new(SchemeKind::QuditPoly, 1, 3, 2);
    let th = cfg.threshold().unwrap();
    let prep = prepare_shared_state(&cfg, &th, &keys(&[0, 0, 0], 3), &[], &zero_input(1)).unwrap();
    let got = channel_part(&prep.state, 1);
    let words = codeword_set(&th).unwrap();
    let norm = 1.0 / (2.0 * words.len() as f64).sqrt();
    let mut want = vec![Complex::default(); 4 * 27];
    for y in 0..2usize {
        for w in &words {
            let idx = w.iter().fold(0usize, |acc, &c| acc * 3 + c as usize);
            let theta = PI * w.iter().sum::<u64>() as f64 / 3.0;
            want[((y << 1) | y) * 27 + idx] = Complex::from_polar(norm, y as f64 * theta);
        }
    }
    assert!(got.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12));
    assert_eq!(prep.single_ops, 1 + 2);
    assert_eq!(prep.two_ops, 1 + 2 + 3);
}

#[test]
fn completion_matrix_extends_codewords() {
    for (k, m, p) in [(2, 3, 3), (3, 5, 5), (2, 5, 7)] {
        let th = ThresholdConfig::vandermonde(k, m, Some(PrimeModulus::new(p).unwrap())).unwrap();
        let l = completion_matrix(&th).unwrap();
        for w in codeword_set(&th).unwrap() {
            for (row, s) in l.iter().zip(k..m) {
                let c = row.iter().zip(&w[..k]).fold(0, |acc, (a, c)| (acc + a * c) % p);
                assert_eq!(c, w[s]);
            }
        }
    }
}

#[test]
fn preparation_counts() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let cfg = RunConfig::new(SchemeKind::EconQubit, 3, 2, 2);
    let th = cfg.threshold().unwrap();
    let bases: Vec<Basis> = (1..=2).map(|s| Basis::haar(&mut rng, format!("C{s}"))).collect();
    let prep = prepare_shared_state(&cfg, &th, &keys(&[1, 2], 2), &bases, &zero_input(3)).unwrap();
    assert_eq!((prep.single_ops, prep.two_ops), (5, 5));
    assert_eq!(prep.ops.len(), 10);

    let ghz = RunConfig::new(SchemeKind::Ghz, 3, 2, 2);
    let prep = prepare_shared_state(&ghz, &th, &keys(&[1, 2], 2), &[], &zero_input(3)).unwrap();
    assert_eq!((prep.single_ops, prep.two_ops), (3, 5));

    let classical = RunConfig::new(SchemeKind::Classical, 3, 2, 2);
    let prep = prepare_shared_state(&classical, &th, &keys(&[1, 2], 2), &[], &zero_input(3)).unwrap();
    assert_eq!((prep.single_ops, prep.two_ops), (4, 3));
}

#[test]
fn oversized_register_is_rejected() {
    let cfg = RunConfig::new(SchemeKind::QuditPoly, 3, 5, 3).with_p(7);
    let th = cfg.threshold().unwrap();
    let err = prepare_shared_state(&cfg, &th, &keys(&[0; 5], 7), &[], &zero_input(3)).unwrap_err();
    assert!(matches!(err, ProtocolError::Sim(crate::sim::SimError::CapExceeded(_))));
}

fn prepared_ghz1() -> StateVector {
    let cfg = RunConfig::new(SchemeKind::Ghz, 1, 1, 1);
    let th = cfg.threshold().unwrap();
    prepare_shared_state(&cfg, &th, &keys(&[0], 2), &[], &zero_input(1)).unwrap().state
}

#[test]
fn alice_outcomes_and_conditional_state() {
    let mut seen_00 = false;
    for seed in 0..32 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (msg, rest, recs) = alice_run(prepared_ghz1(), 1, &mut rng).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].distribution.iter().all(|p| (p - 0.25).abs() < 1e-12));
        let MessageBody::BellOutcomes(o) = msg else { panic!("expected Bell outcomes") };
        assert_eq!(o.len(), 1);
        if o[0] == (0, 0) {
            seen_00 = true;
            // Input |0>: B1 C1 = |0>|κ(0)> = |00>.
            assert_eq!(rest.register().labels(), &["B1".to_string(), "C1".to_string()]);
            assert!((rest.amplitudes()[0].norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
    assert!(seen_00);
}

#[test]
fn bell_outcomes_uniform_for_every_channel() {
    let mut rng = ChaCha20Rng::seed_from_u64(21);
    let cfg = RunConfig::new(SchemeKind::Classical, 3, 2, 2);
    let th = cfg.threshold().unwrap();
    let input = StateVector::random(Register::qubits(["x", "y", "z"]).unwrap(), &mut rng);
    let prep = prepare_shared_state(&cfg, &th, &keys(&[1, 0], 2), &[], &input).unwrap();
    let (msg, _, recs) = alice_run(prep.state, 3, &mut rng).unwrap();
    assert_eq!(recs.len(), 3);
    for r in &recs {
        assert!(r.distribution.iter().all(|p| (p - 0.25).abs() < 1e-12));
    }
    assert!(matches!(msg, MessageBody::BellOutcomes(o) if o.len() == 3));
}

#[test]
fn controller_examples() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let basis = Basis::haar(&mut rng, "C1");
    let cfg = RunConfig::new(SchemeKind::EconQubit, 1, 1, 1).with_p(3);
    let th = cfg.threshold().unwrap();
    let state = || {
        prepare_shared_state(&cfg, &th, &keys(&[2], 3), std::slice::from_ref(&basis), &zero_input(1))
            .unwrap()
            .state
    };
    let mut ctl = Controller {
        s: 1,
        scheme: SchemeKind::EconQubit,
        role: Role::Agree,
        basis: Some(&basis),
        key: 2,
        p: 3,
        honesty: Honesty::default(),
    };
    let step = controller_act(&ctl, Action::Vote, state(), &mut rng).unwrap();
    let rec = step.record.unwrap();
    assert_eq!(rec.basis, "tilde[C1]");
    assert_eq!(step.messages, vec![MessageBody::AgreeReport { s: 1, outcome: rec.outcome as u64, key: Some(2) }]);
    assert!(!step.state.register().labels().contains(&"C1".to_string()));

    ctl.scheme = SchemeKind::EconBob;
    let step = controller_act(&ctl, Action::Vote, state(), &mut rng).unwrap();
    assert_eq!(step.record.unwrap().basis, "pm-tilde[C1]");
    let step = controller_act(&ctl, Action::Solicited, state(), &mut rng).unwrap();
    assert!(matches!(step.messages[0], MessageBody::SolicitReply { s: 1, .. }));

    ctl.role = Role::Disagree;
    assert_eq!(
        controller_act(&ctl, Action::Vote, state(), &mut rng).unwrap_err(),
        ProtocolError::ProtocolOrderViolation { s: 1 }
    );

    let classical = Controller { scheme: SchemeKind::Classical, role: Role::Agree, basis: None, ..ctl };
    let st = zero_input(1);
    let step = controller_act(&classical, Action::Vote, st.clone(), &mut rng).unwrap();
    assert_eq!(step.messages, vec![MessageBody::ClassicalKey { s: 1, key: 2 }]);
    assert!(step.record.is_none());
    assert_eq!(step.state, st);

    let liar = Controller { honesty: Honesty { flip_outcome: true, wrong_key: true }, role: Role::Agree, ..ctl };
    let mut a = ChaCha20Rng::seed_from_u64(1);
    let mut b = ChaCha20Rng::seed_from_u64(1);
    let honest = Controller { honesty: Honesty::default(), ..liar.clone() };
    let h = controller_act(&honest, Action::Vote, state(), &mut a).unwrap();
    let l = controller_act(&liar, Action::Vote, state(), &mut b).unwrap();
    match (&h.messages[0], &l.messages[0]) {
        (
            MessageBody::AgreeReport { outcome: o1, key: Some(k1), .. },
            MessageBody::AgreeReport { outcome: o2, key: Some(k2), .. },
        ) => {
            assert_eq!(*o2, 1 - o1);
            assert_eq!(*k2, (k1 + 1) % 3);
        }
        other => panic!("unexpected messages {other:?}"),
    }
}

fn knowledge(p: u64, keys: Vec<u64>, outcomes: &[(usize, u64, bool)]) -> BobKnowledge {
    BobKnowledge {
        n: 1,
        p,
        channels: vec![1; keys.len().max(outcomes.len())],
        keys,
        classical_exponent: 0,
        outcomes: outcomes.iter().map(|&(s, o, sol)| (s, Reported { outcome: o, solicited: sol })).collect(),
    }
}

#[test]
fn recovery_examples() {
    // r = 0, c = 1, p = 2: diag[1, e^{-iπ}] = Z.
    let k = knowledge(2, vec![1], &[(1, 0, false)]);
    let c = phase_corrections(SchemeKind::EconQubit, &k);
    assert_eq!(c.len(), 1);
    assert!(c[0].gate().approx_eq(&Gate::pauli_z(), 1e-12));
    assert_eq!(c[0].label(), "Z");

    // Direct evaluation of diag[e^{-i2π r c/p}, e^{-i2π ¬r c/p}] for p = 5.
    for c in 0..5u64 {
        for r in 0..2u64 {
            let k = knowledge(5, vec![c], &[(1, r, false)]);
            let g = phase_corrections(SchemeKind::EconQubit, &k)[0].gate();
            let want = Gate::diagonal(&[
                Complex::from_polar(1.0, -2.0 * PI * (r * c) as f64 / 5.0),
                Complex::from_polar(1.0, -2.0 * PI * ((1 - r) * c) as f64 / 5.0),
            ]);
            assert!(g.approx_eq(&want, 1e-12));
        }
    }

    let plus_plus = knowledge(2, vec![], &[(1, 0, false), (2, 0, false)]);
    assert!(phase_corrections(SchemeKind::Ghz, &plus_plus).is_empty());
    let plus_minus = knowledge(2, vec![], &[(1, 0, false), (2, 1, false)]);
    assert_eq!(phase_corrections(SchemeKind::Ghz, &plus_minus), vec![PhaseCorrection::z(1)]);

    let agree_plus = knowledge(5, vec![3], &[(1, 0, false)]);
    assert!(phase_corrections(SchemeKind::EconBob, &agree_plus).is_empty());
    let agree_minus = knowledge(5, vec![3], &[(1, 1, false)]);
    assert_eq!(phase_corrections(SchemeKind::EconBob, &agree_minus)[0].label(), "Z");
    let solicited = knowledge(5, vec![3], &[(1, 1, true)]);
    assert_eq!(phase_corrections(SchemeKind::EconBob, &solicited)[0].denom, 5);

    // θ = π (1 + 2 + 0) / 3 for qudit-poly.
    let q = knowledge(3, vec![1, 2, 0], &[]);
    let g = phase_corrections(SchemeKind::QuditPoly, &q)[0].gate();
    assert!(g.approx_eq(&Gate::phases(&[0.0, -PI]), 1e-12));
}

#[test]
fn pauli_frame_counts() {
    let mut st = zero_input(2);
    assert_eq!(apply_pauli_frame(&mut st, 1, (1, 1)).unwrap(), vec!["X", "Z"]);
    assert_eq!(apply_pauli_frame(&mut st, 2, (0, 0)).unwrap(), Vec::<&str>::new());
    assert!((st.amplitudes()[2] + Complex::new(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn honest_runs_teleport_exactly() {
    for scheme in SchemeKind::ALL {
        for (k, m) in [(2, 2), (2, 3)] {
            let (k, m) = if scheme == SchemeKind::Ghz { (m, m) } else { (k, m) };
            for n in 1..=2 {
                for seed in 0..4 {
                    let cfg = RunConfig::new(scheme, n, m, k).with_seed(seed).with_agree(AgreeSpec::Random(k));
                    let r = run_protocol(&cfg).unwrap();
                    assert!(r.success, "{scheme} n={n} k={k} m={m} seed={seed}: {}", r.fidelity);
                    assert!(r.abort.is_none());
                    assert!(r.metrics.bob_alice_recovery_ops <= 2 * n);
                    assert!(r.metrics.solicits_sent <= m - k);
                    assert_eq!(r.metrics.bell_measurements, n);
                }
            }
        }
    }
}

#[test]
fn econ_bob_multi_channel() {
    for seed in 0..8 {
        let mut cfg = RunConfig::new(SchemeKind::EconBob, 3, 4, 2).with_seed(seed).with_agree(AgreeSpec::Random(3));
        cfg.channels = Some(vec![1, 3, 3, 2]);
        let r = run_protocol(&cfg).unwrap();
        assert!(r.success);
        assert_eq!((r.metrics.prep_single_qubit_ops, r.metrics.prep_two_qubit_ops), (7, 7));
        assert!(r.metrics.bob_alice_recovery_ops <= 6);
    }
}

#[test]
fn too_few_agreeing_controllers_abort() {
    let cfg = RunConfig::new(SchemeKind::EconQubit, 1, 5, 3).with_agree("1,2".parse().unwrap());
    let r = run_protocol(&cfg).unwrap();
    assert_eq!(r.abort, Some(AbortReason::InsufficientAgreement { have: 2, need: 3 }));
    assert_eq!(r.fidelity, 0.0);
    assert!(!r.success);
    assert_eq!(r.metrics.solicits_sent, 0);
    assert!(r.guess_fidelity.unwrap() < SUCCESS_THRESHOLD);
    for scheme in [SchemeKind::Classical, SchemeKind::QuditPoly, SchemeKind::EconBob] {
        let cfg = RunConfig::new(scheme, 1, 3, 2).with_agree("3".parse().unwrap());
        assert!(matches!(run_protocol(&cfg).unwrap().abort, Some(AbortReason::InsufficientAgreement { .. })));
    }
    let ghz = RunConfig::new(SchemeKind::Ghz, 1, 3, 3).with_agree("1,2".parse().unwrap());
    assert!(matches!(run_protocol(&ghz).unwrap().abort, Some(AbortReason::InsufficientAgreement { have: 2, need: 3 })));
}

#[test]
fn stolen_keys() {
    let steal: ScenarioKind = "steal:3,4,5".parse().unwrap();
    let econ = RunConfig::new(SchemeKind::EconQubit, 1, 5, 3)
        .with_agree("1".parse().unwrap())
        .with_scenario(steal.clone());
    let r = run_protocol(&econ).unwrap();
    assert_eq!(r.abort, Some(AbortReason::SolicitCapExceeded { cap: 2 }));
    assert_eq!(r.metrics.solicits_sent, 3);
    let aborts: Vec<_> = r.transcript.messages().filter(|e| matches!(e.body, MessageBody::Abort { .. })).collect();
    assert_eq!(aborts.len(), 1);
    assert_eq!(aborts[0].from, PartyId::Controller(4));

    let classical = RunConfig::new(SchemeKind::Classical, 2, 5, 3)
        .with_agree("1".parse().unwrap())
        .with_scenario(steal);
    let r = run_protocol(&classical).unwrap();
    assert!(r.success);
    assert_eq!(r.flags.stolen_keys_used, 3);
}

#[test]
fn schedule_violation() {
    let cfg = RunConfig::new(SchemeKind::EconQubit, 2, 5, 3)
        .with_agree(AgreeSpec::Explicit([].into()))
        .with_scenario("schedule:1,2,4".parse().unwrap());
    let r = run_protocol(&cfg).unwrap();
    assert!(r.success);
    assert!(r.flags.schedule_violation && r.flags.completed_before_vote);
    assert!(r.transcript.events.iter().all(|e| e.phase() != Phase::Vote));
    assert_eq!(r.metrics.solicits_sent, 2);

    let few = cfg.clone().with_scenario("schedule:1".parse().unwrap()).with_agree("2,3".parse().unwrap());
    let r = run_protocol(&few).unwrap();
    assert!(r.success && r.flags.schedule_violation && !r.flags.completed_before_vote);
}

#[test]
fn lying_controllers() {
    let over = RunConfig::new(SchemeKind::EconQubit, 1, 5, 3).with_scenario(ScenarioKind::WrongKey(2));
    assert_eq!(run_protocol(&over).unwrap().abort, Some(AbortReason::InconsistentShares));
    let q = RunConfig::new(SchemeKind::QuditPoly, 1, 3, 2).with_scenario(ScenarioKind::WrongKey(1));
    assert_eq!(run_protocol(&q).unwrap().abort, Some(AbortReason::InconsistentShares));

    let mut damaged = 0;
    for seed in 0..10 {
        let exact = RunConfig::new(SchemeKind::EconQubit, 1, 5, 3)
            .with_agree("1,2,3".parse().unwrap())
            .with_scenario(ScenarioKind::WrongKey(2))
            .with_seed(seed);
        let r = run_protocol(&exact).unwrap();
        assert!(r.abort.is_none());
        damaged += usize::from(r.fidelity < SUCCESS_THRESHOLD);
    }
    assert!(damaged > 0);

    let mut damaged = 0;
    for seed in 0..10 {
        let cfg = RunConfig::new(SchemeKind::EconQubit, 1, 3, 2)
            .with_scenario(ScenarioKind::WrongOutcome(3))
            .with_seed(seed);
        damaged += usize::from(run_protocol(&cfg).unwrap().fidelity < SUCCESS_THRESHOLD);
    }
    assert!(damaged > 0);
}

#[test]
fn skipping_phase_recovery_breaks_econ_runs() {
    let mut broken = 0;
    for seed in 0..10 {
        let mut cfg = RunConfig::new(SchemeKind::EconQubit, 1, 3, 2).with_seed(seed);
        cfg.fault = Fault::SkipPhaseRecovery;
        broken += usize::from(!run_protocol(&cfg).unwrap().success);
    }
    assert!(broken > 0);
}

#[test]
fn transcripts_are_deterministic_and_phase_ordered() {
    for scheme in SchemeKind::ALL {
        let k = if scheme == SchemeKind::Ghz { 3 } else { 2 };
        let cfg = RunConfig::new(scheme, 2, 3, k).with_seed(99).with_agree(AgreeSpec::Random(k));
        let a = run_protocol(&cfg).unwrap();
        let b = run_protocol(&cfg).unwrap();
        assert_eq!(a.transcript.to_json(), b.transcript.to_json());
        let phases: Vec<Phase> = a.transcript.events.iter().map(Event::phase).collect();
        assert!(phases.windows(2).all(|w| w[0] <= w[1]), "{scheme}");
        let seqs: Vec<u64> = a.transcript.messages().map(|e| e.seq).collect();
        assert_eq!(seqs, (0..seqs.len() as u64).collect::<Vec<_>>());
        let c = run_protocol(&cfg.clone().with_seed(100)).unwrap();
        assert_ne!(a.transcript.to_json(), c.transcript.to_json());
    }
}

#[test]
fn metrics_match_transcript() {
    let cfg = RunConfig::new(SchemeKind::EconBob, 2, 5, 3).with_seed(4).with_agree("1,2,4".parse().unwrap());
    let r = run_protocol(&cfg).unwrap();
    let ops: Vec<_> = r.transcript.operations().collect();
    let prep = ops.iter().filter(|(ph, _, _)| *ph == Phase::Setup).count();
    assert_eq!(prep, r.metrics.prep_single_qubit_ops + r.metrics.prep_two_qubit_ops);
    let bob = ops.iter().filter(|(_, who, _)| *who == PartyId::Bob).count();
    assert_eq!(bob, r.metrics.bob_alice_recovery_ops + r.metrics.bob_controller_recovery_ops);
    let solicits = r.transcript.messages().filter(|e| matches!(e.body, MessageBody::Solicit { .. })).count();
    assert_eq!(solicits, r.metrics.solicits_sent);
    assert_eq!(solicits, 2);
    let ctl = r.transcript.measurements().filter(|(p, _)| matches!(p, PartyId::Controller(_))).count();
    assert_eq!(ctl, r.metrics.controller_measurements);
    assert_eq!(ctl, 5);
}

#[test]
fn expected_ops_examples() {
    let cfg = RunConfig::new(SchemeKind::EconBob, 1, 3, 2);
    assert_eq!(expected_controller_recovery_ops(&cfg, &[1, 2, 0], &[]).unwrap(), 3.0);
    let two = RunConfig::new(SchemeKind::EconBob, 1, 1, 1).with_p(2);
    assert!((expected_controller_recovery_ops(&two, &[1], &[1]).unwrap() - 1.0).abs() < 1e-15);
    let five = RunConfig::new(SchemeKind::EconBob, 1, 1, 1).with_p(5);
    let e = expected_controller_recovery_ops(&five, &[1], &[1]).unwrap();
    assert!((e - 0.345_491_502_812_526_3).abs() < 1e-12);
    assert_eq!(coarse_estimate(5, 2), 4.0);
    let wrong = RunConfig::new(SchemeKind::EconQubit, 1, 1, 1);
    assert!(matches!(
        expected_controller_recovery_ops(&wrong, &[1], &[1]),
        Err(ProtocolError::WrongScheme { .. })
    ));
}

#[test]
fn soundness_with_missing_key() {
    let th = ThresholdConfig::vandermonde(3, 5, None).unwrap();
    let known = keys(&[4, 1], 5);
    for scheme in [SchemeKind::EconQubit, SchemeKind::Classical, SchemeKind::QuditPoly] {
        let s = soundness(scheme, &th, &known).unwrap();
        assert_eq!(s.candidates, 5);
        assert!(s.distinct_recoveries >= 2, "{scheme}: {s:?}");
    }
    let s = soundness(SchemeKind::EconQubit, &th, &known).unwrap();
    assert_eq!(s.patterns, 32);
    assert!(s.determined_patterns < s.patterns);
    let full = keys(&[4, 1], 5);
    let cands = candidate_recoveries(SchemeKind::Classical, &th, &full).unwrap();
    let tops: std::collections::BTreeSet<u64> = cands.iter().map(|c| c.secret[2]).collect();
    assert_eq!(tops.len(), 5);
}

#[test]
fn controller_outcomes_ignore_the_input() {
    let mut rng = ChaCha20Rng::seed_from_u64(77);
    for scheme in [SchemeKind::Ghz, SchemeKind::QuditPoly, SchemeKind::EconQubit, SchemeKind::EconBob] {
        let k = if scheme == SchemeKind::Ghz { 3 } else { 2 };
        let mut reference: Option<Vec<Vec<f64>>> = None;
        for _ in 0..5 {
            let psi = StateVector::random(Register::qubits(["a", "b"]).unwrap(), &mut rng);
            let cfg = RunConfig::new(scheme, 2, 3, k)
                .with_seed(5)
                .with_agree("1,2".parse().unwrap())
                .with_input(InputSpec::Amplitudes(psi.amplitudes().to_vec()));
            let cfg = if scheme == SchemeKind::Ghz { cfg.with_agree(AgreeSpec::all(3)) } else { cfg };
            let r = run_protocol(&cfg).unwrap();
            let d: Vec<Vec<f64>> = r
                .transcript
                .measurements()
                .filter(|(p, _)| matches!(p, PartyId::Controller(_)))
                .map(|(_, rec)| rec.distribution.clone())
                .collect();
            assert!(!d.is_empty());
            match &reference {
                None => reference = Some(d),
                Some(want) => {
                    for (x, y) in want.iter().flatten().zip(d.iter().flatten()) {
                        assert!((x - y).abs() < 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn explicit_input_and_secret() {
    let mut cfg = RunConfig::new(SchemeKind::Classical, 1, 3, 2).with_input(InputSpec::Amplitudes(vec![
        Complex::new(0.6, 0.0),
        Complex::new(0.0, 0.8),
    ]));
    cfg.secret = Some(vec![1, 2]);
    let r = run_protocol(&cfg).unwrap();
    assert!(r.success);
    assert_eq!(r.dealer.secret, vec![1, 2]);
    // c_s = 1 + 2 z_s with z_s = s - 1 over GF(3).
    assert_eq!(r.dealer.keys, vec![1, 0, 2]);
}

#[test]
fn run_result_round_trips() {
    let cfg = RunConfig::new(SchemeKind::EconBob, 1, 3, 2).with_seed(1);
    let r = run_protocol(&cfg).unwrap();
    let json = serde_json::to_string(&r).unwrap();
    let back: RunResult = serde_json::from_str(&json).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), json);
}

#[test]
fn measurement_basis_of_ghz_controllers() {
    let r = run_protocol(&RunConfig::new(SchemeKind::Ghz, 1, 2, 2)).unwrap();
    let bases: Vec<&str> = r
        .transcript
        .measurements()
        .filter(|(p, _)| matches!(p, PartyId::Controller(_)))
        .map(|(_, rec)| rec.basis.as_str())
        .collect();
    assert_eq!(bases, vec![MeasureBasis::<f64>::X.label(), MeasureBasis::<f64>::X.label()]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn honest_runs_with_enough_votes_succeed(
        scheme_idx in 0usize..5,
        n in 1usize..=2,
        m in 1usize..=4,
        k_frac in 0.0f64..1.0,
        extra in 0usize..4,
        seed in any::<u64>(),
    ) {
        let scheme = SchemeKind::ALL[scheme_idx];
        let k = if scheme == SchemeKind::Ghz { m } else { 1 + ((m - 1) as f64 * k_frac) as usize };
        let t = (k + extra).min(m);
        let cfg = RunConfig::new(scheme, n, m, k).with_seed(seed).with_agree(AgreeSpec::Random(t));
        let r = run_protocol(&cfg).unwrap();
        prop_assert!(r.success, "{:?}", cfg);
        prop_assert!(r.metrics.bob_alice_recovery_ops <= 2 * n);
        prop_assert!(r.metrics.solicits_sent <= m - k);
        if scheme.is_econ() {
            prop_assert_eq!(r.metrics.prep_single_qubit_ops, n + m);
            prop_assert_eq!(r.metrics.prep_two_qubit_ops, n + m);
        }
    }
}
