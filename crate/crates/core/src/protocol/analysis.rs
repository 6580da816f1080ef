use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use super::config::{RunConfig, SchemeKind};
use super::parties::{phase_corrections, BobKnowledge, PhaseCorrection, Reported};
use super::prepare::classical_phase_exponent;
use super::ProtocolError;
use crate::sharing::{consistent_secrets, generate_shares, ShareSet, ThresholdConfig};

/// Born probability of `-̃` for an agreeing controller with key `c`.
pub fn minus_probability(c: u64, p: u64) -> f64 {
    (PI * c as f64 / p as f64).sin().powi(2)
}

/// Exact mean of Bob's controller-dependent gates in the econ-bob scheme:
/// `Σ_{s in agree} sin²(π c_s / p) + (m - t)`.
pub fn expected_controller_recovery_ops(cfg: &RunConfig, keys: &[u64], agree: &[usize]) -> Result<f64, ProtocolError> {
    if cfg.scheme != SchemeKind::EconBob {
        return Err(ProtocolError::WrongScheme { expected: SchemeKind::EconBob, actual: cfg.scheme });
    }
    let p = cfg.modulus()?.get();
    if keys.len() != cfg.m {
        return Err(ProtocolError::Validation(format!("expected {} keys, got {}", cfg.m, keys.len())));
    }
    let agree: BTreeSet<usize> = agree.iter().copied().collect();
    let agreeing: f64 = agree.iter().map(|&s| minus_probability(keys[s - 1], p)).sum();
    Ok(agreeing + (cfg.m - agree.len()) as f64)
}

/// The estimate `m - t/2`, which assumes `P(-̃) = 1/2` for every key.
pub fn coarse_estimate(m: usize, t: usize) -> f64 {
    m as f64 - t as f64 / 2.0
}

/// Sum of relative phases, as a fraction of a full turn in lowest terms.
fn combined_relative(corrections: &[PhaseCorrection]) -> (u64, u64) {
    corrections.iter().fold((0, 1), |(a, b), c| {
        let (x, y) = c.relative();
        let den = b * y;
        let num = (a * y + x * b) % den;
        let g = gcd(num, den);
        (num / g, den / g)
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Bob's recovery under one hypothesis about the secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateRecovery {
    pub secret: Vec<u64>,
    pub keys: Vec<u64>,
    /// Relative phase on `B_n` (numerator, denominator of a full turn) per
    /// outcome pattern. Econ-qubit has one entry per pattern `r in {0,1}^m`,
    /// indexed big-endian with `C1` as the top bit; the key schemes without
    /// controller outcomes have a single entry.
    pub table: Vec<(u64, u64)>,
}

/// Enumerates every secret consistent with `known` and the phase recovery
/// each one implies, single channel.
pub fn candidate_recoveries(
    scheme: SchemeKind,
    threshold: &ThresholdConfig,
    known: &ShareSet,
) -> Result<Vec<CandidateRecovery>, ProtocolError> {
    let (m, p) = (threshold.m(), threshold.modulus().get());
    let patterns: Vec<Vec<u64>> = match scheme {
        SchemeKind::EconQubit => (0..1u64 << m).map(|r| (0..m).map(|s| (r >> (m - 1 - s)) & 1).collect()).collect(),
        SchemeKind::Classical | SchemeKind::QuditPoly => vec![vec![0; m]],
        other => return Err(ProtocolError::WrongScheme { expected: SchemeKind::EconQubit, actual: other }),
    };
    let mut out = Vec::new();
    for x in consistent_secrets(known, threshold)? {
        let full = generate_shares(&x, threshold)?;
        let keys = full.values();
        let classical_exponent = classical_phase_exponent(&full, threshold)?;
        let table = patterns
            .iter()
            .map(|r| {
                let outcomes: BTreeMap<usize, Reported> =
                    r.iter().enumerate().map(|(i, &o)| (i + 1, Reported { outcome: o, solicited: true })).collect();
                let know = BobKnowledge {
                    n: 1,
                    p,
                    channels: vec![1; m],
                    keys: keys.clone(),
                    classical_exponent,
                    outcomes,
                };
                combined_relative(&phase_corrections(scheme, &know))
            })
            .collect();
        out.push(CandidateRecovery { secret: x.values(), keys, table });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Soundness {
    pub candidates: usize,
    /// Distinct recovery tables among the candidates.
    pub distinct_recoveries: usize,
    /// Outcome patterns on which every candidate prescribes the same gate.
    pub determined_patterns: usize,
    pub patterns: usize,
}

pub fn soundness(scheme: SchemeKind, threshold: &ThresholdConfig, known: &ShareSet) -> Result<Soundness, ProtocolError> {
    let cands = candidate_recoveries(scheme, threshold, known)?;
    let distinct: BTreeSet<&Vec<(u64, u64)>> = cands.iter().map(|c| &c.table).collect();
    let patterns = cands.first().map_or(0, |c| c.table.len());
    let determined = (0..patterns)
        .filter(|&i| cands.iter().map(|c| c.table[i]).collect::<BTreeSet<_>>().len() == 1)
        .count();
    Ok(Soundness { candidates: cands.len(), distinct_recoveries: distinct.len(), determined_patterns: determined, patterns })
}
