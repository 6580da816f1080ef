use clap::ValueEnum;
use itertools::Itertools;
use rand::Rng;

use ctqt_core::field::{FieldElement, FieldMatrix, PrimeModulus};
use ctqt_core::protocol::{run_protocol, AbortReason, AgreeSpec, Fault, RunConfig, SchemeKind, SUCCESS_THRESHOLD};
use ctqt_core::sharing::{
    consistent_secrets, generate_shares, reconstruct_secret, satisfies_unique_completion, SecretVector,
    ThresholdConfig,
};
use ctqt_core::sim::{MeasureBasis, Register};
use ctqt_core::{Gate, RunRng, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Field,
    Sharing,
    Sim,
    Protocol,
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    /// `None` on success, otherwise a counterexample.
    pub failure: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

type Outcome = Result<(), String>;

const CASES: u64 = 32;

fn modulus(p: u64) -> PrimeModulus {
    PrimeModulus::new(p).expect("prime")
}

/// Runs `f` on `CASES` derived seeds and reports the first failing one.
fn per_seed(seed: u64, mut f: impl FnMut(u64) -> Outcome) -> Outcome {
    (0..CASES).try_for_each(|i| {
        let s = RunRng::trial_seed(seed, i);
        f(s).map_err(|e| format!("seed {s}: {e}"))
    })
}

fn field_axioms(_: u64) -> Outcome {
    for p in [2u64, 3, 5, 7, 11] {
        let q = modulus(p);
        let el = |v| FieldElement::new(v, q);
        for (a, b, c) in (0..p).cartesian_product(0..p).cartesian_product(0..p).map(|((a, b), c)| (el(a), el(b), el(c)))
        {
            if (a + b) + c != a + (b + c) || (a * b) * c != a * (b * c) {
                return Err(format!("associativity fails at p={p}, ({a},{b},{c})"));
            }
            if a * (b + c) != a * b + a * c {
                return Err(format!("distributivity fails at p={p}, ({a},{b},{c})"));
            }
        }
        for a in (1..p).map(el) {
            let inv = a.inv().map_err(|e| e.to_string())?;
            if a * inv != FieldElement::one(q) {
                return Err(format!("{a} * {inv} != 1 mod {p}"));
            }
        }
        if el(0).inv().is_ok() {
            return Err(format!("0 is invertible mod {p}"));
        }
    }
    Ok(())
}

fn field_solve(seed: u64) -> Outcome {
    per_seed(seed, |s| {
        let mut rng = RunRng::new(s);
        let q = modulus(101);
        let n = rng.gen_range(1..=5);
        let a = FieldMatrix::new(q, n, n, (0..n * n).map(|_| rng.gen_range(0..101)).collect())
            .map_err(|e| e.to_string())?;
        let x: Vec<FieldElement> = (0..n).map(|_| FieldElement::new(rng.gen_range(0..101), q)).collect();
        let b = a.mul_vec(&x).map_err(|e| e.to_string())?;
        match a.solve_unique(&b) {
            Ok(y) if y == x => Ok(()),
            Ok(y) => Err(format!("solve returned {y:?}, expected {x:?}")),
            Err(_) if a.rank() < n => Ok(()),
            Err(e) => Err(format!("full-rank system rejected: {e}")),
        }
    })
}

fn field_vandermonde(_: u64) -> Outcome {
    for (k, m, p) in [(1, 3, 3), (2, 3, 3), (2, 5, 5), (3, 5, 7), (4, 6, 7)] {
        let t = ThresholdConfig::vandermonde(k, m, Some(modulus(p))).map_err(|e| e.to_string())?;
        if !t.matrix().is_threshold_matrix(k).map_err(|e| e.to_string())? {
            return Err(format!("Vandermonde matrix for (k,m,p)=({k},{m},{p}) has a singular k-row subset"));
        }
    }
    Ok(())
}

fn sharing_roundtrip(seed: u64) -> Outcome {
    per_seed(seed, |s| {
        let mut rng = RunRng::new(s);
        let m = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=m);
        let t = ThresholdConfig::vandermonde(k, m, None).map_err(|e| e.to_string())?;
        let x = SecretVector::random(&mut rng, k, t.modulus());
        let shares = generate_shares(&x, &t).map_err(|e| e.to_string())?;
        for subset in (1..=m).combinations(k) {
            let y = reconstruct_secret(&shares.restrict(&subset), &t).map_err(|e| e.to_string())?;
            if y != x {
                return Err(format!("(k,m)=({k},{m}) subset {subset:?} gives {:?}, not {:?}", y.values(), x.values()));
            }
        }
        Ok(())
    })
}

fn sharing_secrecy(seed: u64) -> Outcome {
    per_seed(seed, |s| {
        let mut rng = RunRng::new(s);
        let m = rng.gen_range(2..=5);
        let k = rng.gen_range(2..=m);
        let t = ThresholdConfig::vandermonde(k, m, None).map_err(|e| e.to_string())?;
        let x = SecretVector::random(&mut rng, k, t.modulus());
        let shares = generate_shares(&x, &t).map_err(|e| e.to_string())?;
        let known: Vec<usize> = (1..=m).take(rng.gen_range(0..k)).collect();
        let count = consistent_secrets(&shares.restrict(&known), &t).map_err(|e| e.to_string())?.len() as u64;
        let want = t.modulus().get().pow((k - known.len()) as u32);
        if count != want {
            return Err(format!("(k,m)=({k},{m}) with keys {known:?}: {count} consistent secrets, expected {want}"));
        }
        Ok(())
    })
}

fn sharing_completion(_: u64) -> Outcome {
    for m in 1..=6 {
        for k in 1..=m {
            let t = ThresholdConfig::vandermonde(k, m, None).map_err(|e| e.to_string())?;
            if !satisfies_unique_completion(&t).map_err(|e| e.to_string())? {
                return Err(format!("unique completion fails for (k,m)=({k},{m})"));
            }
        }
    }
    Ok(())
}

fn sim_norm(seed: u64) -> Outcome {
    per_seed(seed, |s| {
        let mut rng = RunRng::new(s);
        let reg = Register::new([("a", 2), ("b", 3), ("c", 2)]).map_err(|e| e.to_string())?;
        let mut st = StateVector::random(reg, &mut rng);
        st.apply_single(0, &Gate::hadamard()).map_err(|e| e.to_string())?;
        st.apply_single(1, &Gate::fourier(3)).map_err(|e| e.to_string())?;
        st.apply_two(2, 0, &Gate::cnot()).map_err(|e| e.to_string())?;
        let dev = (st.norm_sqr() - 1.0).abs();
        if dev > 1e-12 {
            return Err(format!("norm drifted by {dev:e}"));
        }
        Ok(())
    })
}

fn sim_unitary(_: u64) -> Outcome {
    for d in 2..=7 {
        for g in [Gate::fourier(d), Gate::modular_sum(d, 1), Gate::modular_sum(d, d - 1)] {
            let dev = g.unitarity_defect();
            if dev > 1e-12 {
                return Err(format!("gate on dimension {d} deviates from unitary by {dev:e}"));
            }
        }
    }
    Ok(())
}

fn sim_bell_uniform(seed: u64) -> Outcome {
    per_seed(seed, |s| {
        let mut rng = RunRng::new(s);
        let input = StateVector::random(Register::qubits(["in"]).map_err(|e| e.to_string())?, &mut rng);
        let mut epr = StateVector::zero(Register::qubits(["a", "b"]).map_err(|e| e.to_string())?);
        epr.apply_single(0, &Gate::hadamard()).map_err(|e| e.to_string())?;
        epr.apply_two(0, 1, &Gate::cnot()).map_err(|e| e.to_string())?;
        let st = input.kron(&epr).map_err(|e| e.to_string())?;
        let probs = st.outcome_distribution(&[0, 1], &MeasureBasis::Bell).map_err(|e| e.to_string())?;
        match probs.iter().find(|q| (*q - 0.25).abs() > 1e-12) {
            Some(_) => Err(format!("Bell outcome distribution {probs:?} is not uniform")),
            None => Ok(()),
        }
    })
}

fn small_configs() -> Vec<RunConfig> {
    vec![
        RunConfig::new(SchemeKind::Ghz, 1, 3, 3),
        RunConfig::new(SchemeKind::QuditPoly, 1, 3, 2),
        RunConfig::new(SchemeKind::Classical, 2, 3, 2),
        RunConfig::new(SchemeKind::EconQubit, 2, 3, 2),
        RunConfig::new(SchemeKind::EconBob, 1, 4, 2).with_agree(AgreeSpec::Random(2)),
    ]
}

fn protocol_honest(seed: u64, fault: Fault) -> Outcome {
    per_seed(seed, |s| {
        for base in small_configs() {
            let mut cfg = base.with_seed(s);
            cfg.fault = fault;
            let r = run_protocol(&cfg).map_err(|e| e.to_string())?;
            if !r.success || r.fidelity < SUCCESS_THRESHOLD {
                return Err(format!("{} (n,m,k)=({},{},{}) fidelity {}", cfg.scheme, cfg.n, cfg.m, cfg.k, r.fidelity));
            }
            let mt = &r.metrics;
            if mt.bob_alice_recovery_ops > 2 * cfg.n || mt.solicits_sent > cfg.m - cfg.k {
                return Err(format!("{}: metrics out of bounds {mt:?}", cfg.scheme));
            }
        }
        Ok(())
    })
}

fn protocol_threshold(seed: u64) -> Outcome {
    per_seed(seed, |s| {
        for base in small_configs().into_iter().filter(|c| c.k > 1 && c.scheme != SchemeKind::EconBob) {
            let t = base.k - 1;
            let cfg = base.with_agree(AgreeSpec::Explicit((1..=t).collect())).with_seed(s);
            let r = run_protocol(&cfg).map_err(|e| e.to_string())?;
            if !matches!(r.abort, Some(AbortReason::InsufficientAgreement { .. })) || r.fidelity != 0.0 {
                return Err(format!("{} with {t} of {} agreeing did not abort: {:?}", cfg.scheme, cfg.k, r.abort));
            }
        }
        Ok(())
    })
}

fn protocol_determinism(seed: u64) -> Outcome {
    for cfg in small_configs() {
        let cfg = cfg.with_seed(seed);
        let a = run_protocol(&cfg).map_err(|e| e.to_string())?;
        let b = run_protocol(&cfg).map_err(|e| e.to_string())?;
        if a.transcript.to_json() != b.transcript.to_json() || a.fidelity != b.fidelity {
            return Err(format!("seed {seed}: {} runs differ", cfg.scheme));
        }
    }
    Ok(())
}

fn check(suite: &'static str, name: &'static str, r: Outcome) -> Check {
    Check { suite, name, failure: r.err() }
}

/// Runs a suite; `fault` is forwarded to the protocol runs.
pub fn run_suite(suite: Suite, seed: u64, fault: Fault) -> Vec<Check> {
    let has = |s: Suite| suite == s || suite == Suite::All;
    let mut out = Vec::new();
    if has(Suite::Field) {
        out.push(check("field", "axioms", field_axioms(seed)));
        out.push(check("field", "solve_roundtrip", field_solve(seed)));
        out.push(check("field", "vandermonde_threshold", field_vandermonde(seed)));
    }
    if has(Suite::Sharing) {
        out.push(check("sharing", "reconstruct_every_subset", sharing_roundtrip(seed)));
        out.push(check("sharing", "secrecy_count", sharing_secrecy(seed)));
        out.push(check("sharing", "unique_completion", sharing_completion(seed)));
    }
    if has(Suite::Sim) {
        out.push(check("sim", "norm_preserved", sim_norm(seed)));
        out.push(check("sim", "gates_unitary", sim_unitary(seed)));
        out.push(check("sim", "bell_outcomes_uniform", sim_bell_uniform(seed)));
    }
    if has(Suite::Protocol) {
        out.push(check("protocol", "honest_fidelity", protocol_honest(seed, fault)));
        out.push(check("protocol", "threshold_abort", protocol_threshold(seed)));
        out.push(check("protocol", "determinism", protocol_determinism(seed)));
    }
    out
}
