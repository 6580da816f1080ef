use std::f64::consts::{PI, TAU};

use super::config::{RunConfig, SchemeKind};
use super::ProtocolError;
use crate::field::FieldElement;
use crate::sharing::{reconstruct_secret, ShareSet, ThresholdConfig};
use crate::sim::{Register, SiteInit};
use crate::{Basis, Gate, StateVector};

pub fn input_label(l: usize) -> String {
    format!("A'{l}")
}

pub fn alice_label(l: usize) -> String {
    format!("A{l}")
}

pub fn bob_label(l: usize) -> String {
    format!("B{l}")
}

pub fn controller_label(s: usize) -> String {
    format!("C{s}")
}

/// One preparation gate.
#[derive(Debug, Clone, PartialEq)]
pub struct PrepOp {
    pub gate: String,
    pub sites: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub state: StateVector,
    pub ops: Vec<PrepOp>,
    pub single_ops: usize,
    pub two_ops: usize,
}

/// Exponent `e` of the classical scheme's phase `θ = 2π e / p`: the top
/// coefficient of the secret, which depends on every key.
pub fn classical_phase_exponent(keys: &ShareSet, threshold: &ThresholdConfig) -> Result<u64, ProtocolError> {
    let x = reconstruct_secret(keys, threshold)?;
    Ok(x.elements()[threshold.k() - 1].value())
}

/// Coefficients `L` with `c_s = Σ_j L[s-k-1][j] c_j` for `s > k`, so that the
/// codeword follows from its first `k` digits.
pub fn completion_matrix(threshold: &ThresholdConfig) -> Result<Vec<Vec<u64>>, ProtocolError> {
    let (k, m, p) = (threshold.k(), threshold.m(), threshold.modulus());
    let a = threshold.matrix();
    let top = a.select_rows(&(0..k).collect::<Vec<_>>());
    let mut inv_cols = Vec::with_capacity(k);
    for j in 0..k {
        let e: Vec<FieldElement> = (0..k).map(|i| FieldElement::new(u64::from(i == j), p)).collect();
        inv_cols.push(top.solve_unique(&e)?);
    }
    let pv = p.get();
    Ok((k..m)
        .map(|s| {
            (0..k)
                .map(|j| (0..k).fold(0, |acc, i| (acc + a.row(s)[i] * inv_cols[j][i].value()) % pv))
                .collect()
        })
        .collect())
}

fn register(cfg: &RunConfig, p: usize) -> Result<Register, ProtocolError> {
    let n = cfg.n;
    let mut sites: Vec<(String, usize)> = Vec::new();
    sites.extend((1..=n).map(|l| (alice_label(l), 2)));
    sites.extend((1..=n).map(|l| (bob_label(l), 2)));
    if cfg.scheme.has_controller_sites() {
        let d = if cfg.scheme == SchemeKind::QuditPoly { p } else { 2 };
        sites.extend((1..=cfg.m).map(|s| (controller_label(s), d)));
    }
    Ok(Register::new(sites)?)
}

struct Builder {
    state: StateVector,
    ops: Vec<PrepOp>,
    single: usize,
    two: usize,
}

impl Builder {
    fn single(&mut self, site: &str, gate: &Gate, name: String) -> Result<(), ProtocolError> {
        let i = self.state.site(site)?;
        self.state.apply_single(i, gate)?;
        self.single += 1;
        self.ops.push(PrepOp { gate: name, sites: vec![site.to_string()] });
        Ok(())
    }

    fn two(&mut self, a: &str, b: &str, gate: &Gate, name: String) -> Result<(), ProtocolError> {
        let (i, j) = (self.state.site(a)?, self.state.site(b)?);
        self.state.apply_two(i, j, gate)?;
        self.two += 1;
        self.ops.push(PrepOp { gate: name, sites: vec![a.to_string(), b.to_string()] });
        Ok(())
    }
}

/// Builds `A' ⊗ A ⊗ B ⊗ C` with Alice's input on `A'`, EPR pairs on the
/// uncontrolled channels and the scheme's controlled channel state.
///
/// `keys` must be the full codeword; `bases` holds one entry per controller
/// for the economical schemes and is ignored otherwise.
pub fn prepare_shared_state(
    cfg: &RunConfig,
    threshold: &ThresholdConfig,
    keys: &ShareSet,
    bases: &[Basis],
    input: &StateVector,
) -> Result<Prepared, ProtocolError> {
    let (n, m) = (cfg.n, cfg.m);
    let p = threshold.modulus().get();
    let reg = register(cfg, p as usize)?;
    if input.register().dims() != vec![2; n].as_slice() {
        return Err(ProtocolError::Validation(format!("input must be an {n}-qubit state")));
    }
    if cfg.scheme.is_econ() && bases.len() != m {
        return Err(ProtocolError::Validation(format!("expected {m} controller bases, got {}", bases.len())));
    }
    let inits: Vec<SiteInit<f64>> = reg
        .labels()
        .iter()
        .map(|label| match label.strip_prefix('C') {
            Some(s) if cfg.scheme.is_econ() => {
                let s: usize = s.parse().expect("controller label");
                SiteInit::Vector(bases[s - 1].vector(0))
            }
            _ => SiteInit::Index(0),
        })
        .collect();
    let channel = StateVector::product(reg, &inits)?;
    let relabelled = Register::qubits((1..=n).map(input_label))?;
    let input = StateVector::from_amplitudes(relabelled, input.amplitudes().to_vec())?;
    // No preparation gate touches A', so the input is attached afterwards.
    let mut b = Builder { state: channel, ops: Vec::new(), single: 0, two: 0 };

    for l in 1..=n {
        b.single(&alice_label(l), &Gate::hadamard(), "H".into())?;
        b.two(&alice_label(l), &bob_label(l), &Gate::cnot(), "CNOT".into())?;
    }
    let an = alice_label(n);
    let key = |s: usize| keys.get(s).map(|c| c.value()).ok_or(ProtocolError::Validation(format!("missing key {s}")));
    match cfg.scheme {
        SchemeKind::Ghz => {
            for s in 1..=m {
                b.two(&an, &controller_label(s), &Gate::cnot(), "CNOT".into())?;
            }
        }
        SchemeKind::Classical => {
            let e = classical_phase_exponent(keys, threshold)?;
            let theta = TAU * e as f64 / p as f64;
            b.single(&an, &Gate::phases(&[0.0, theta]), format!("PHASE[2pi*{e}/{p}]"))?;
        }
        SchemeKind::QuditPoly => {
            let d = p as usize;
            let k = threshold.k();
            for s in 1..=k {
                b.single(&controller_label(s), &Gate::fourier(d), "F".into())?;
            }
            for (row, s) in completion_matrix(threshold)?.iter().zip(k + 1..=m) {
                for (j, &f) in row.iter().enumerate() {
                    if f != 0 {
                        let g = Gate::modular_sum(d, f as usize);
                        b.two(&controller_label(j + 1), &controller_label(s), &g, format!("SUM[{f}]"))?;
                    }
                }
            }
            // |a, c> -> e^{i a c π / d} |a, c>
            let angles: Vec<f64> = (0..2 * d).map(|idx| ((idx / d) * (idx % d)) as f64 * PI / d as f64).collect();
            let cphase = Gate::phases(&angles);
            for s in 1..=m {
                b.two(&an, &controller_label(s), &cphase, format!("CPHASE[pi/{d}]"))?;
            }
        }
        SchemeKind::EconQubit | SchemeKind::EconBob => {
            let channels = cfg.channel_map();
            for s in 1..=m {
                let basis = &bases[s - 1];
                let cs = controller_label(s);
                b.single(&cs, &basis.hadamard(), "H~".into())?;
                let phi = TAU * key(s)? as f64 / p as f64;
                let d = basis.lift_second(&Gate::phases(&[0.0, phi, phi, 0.0]));
                b.two(&alice_label(channels[s - 1]), &cs, &d, format!("D~[2pi*{}/{p}]", key(s)?))?;
            }
        }
    }
    Ok(Prepared { state: input.kron(&b.state)?, ops: b.ops, single_ops: b.single, two_ops: b.two })
}
