//! Classical (k, m)-threshold key generation over GF(p).
//!
//! Keys are `c = A x` for a hidden secret vector `x` and a public `m x k`
//! share matrix `A` in which every `k` rows are independent. Any `k` keys fix
//! `x` (and hence every other key); `k - 1` keys leave exactly `p` candidates.

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

use crate::field::{smallest_valid_prime, FieldElement, FieldError, FieldMatrix, PrimeModulus};

/// Upper bound on `p^k` for the exhaustive enumerators.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SharingError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid threshold configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least {need} shares, got {have}")]
    InsufficientShares { have: usize, need: usize },
    #[error("supplied shares do not lie on a common codeword")]
    InconsistentShares,
    #[error("share index {index} outside 1..={m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("share index {0} supplied twice")]
    DuplicateIndex(usize),
    #[error("secret has length {actual}, expected {expected}")]
    SecretLength { expected: usize, actual: usize },
    #[error("enumeration of {size} vectors exceeds the limit {ENUMERATION_LIMIT}")]
    EnumerationTooLarge { size: u64 },
}

/// Public parameters of a (k, m)-threshold code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    k: usize,
    m: usize,
    modulus: PrimeModulus,
    matrix: FieldMatrix,
    /// Evaluation points when `matrix` is a Vandermonde matrix.
    points: Option<Vec<FieldElement>>,
}

impl ThresholdConfig {
    /// Vandermonde code with the default points `z_s = s - 1`. The modulus
    /// defaults to the smallest prime `>= m`.
    pub fn vandermonde(k: usize, m: usize, modulus: Option<PrimeModulus>) -> Result<Self, SharingError> {
        let modulus = modulus.unwrap_or_else(|| smallest_valid_prime(m));
        let points = (0..m as u64).map(|z| FieldElement::new(z, modulus)).collect();
        Self::with_points(k, m, modulus, points)
    }

    pub fn with_points(
        k: usize,
        m: usize,
        modulus: PrimeModulus,
        points: Vec<FieldElement>,
    ) -> Result<Self, SharingError> {
        Self::check_shape(k, m, modulus)?;
        if let Some(bad) = points.iter().find(|z| z.modulus() != modulus) {
            return Err(FieldError::ModulusMismatch { left: modulus.get(), right: bad.modulus().get() }.into());
        }
        let matrix = FieldMatrix::vandermonde(m, k, &points)?;
        let mut cfg = Self::with_matrix(k, m, matrix)?;
        cfg.points = Some(points);
        Ok(cfg)
    }

    /// Arbitrary share matrix, e.g. a systematic `(I | T)^t` code. The matrix
    /// is rejected unless every `k` of its rows are independent.
    pub fn with_matrix(k: usize, m: usize, matrix: FieldMatrix) -> Result<Self, SharingError> {
        let modulus = matrix.modulus();
        Self::check_shape(k, m, modulus)?;
        if matrix.rows() != m || matrix.cols() != k {
            return Err(SharingError::InvalidConfig(format!(
                "share matrix is {}x{}, expected {m}x{k}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_threshold_matrix(k)? {
            return Err(SharingError::InvalidConfig(
                "some k rows of the share matrix are linearly dependent".into(),
            ));
        }
        Ok(Self { k, m, modulus, matrix, points: None })
    }

    fn check_shape(k: usize, m: usize, modulus: PrimeModulus) -> Result<(), SharingError> {
        if k == 0 || k > m {
            return Err(SharingError::InvalidConfig(format!("need 1 <= k <= m, got k={k}, m={m}")));
        }
        if !modulus.admits_controllers(m) {
            return Err(SharingError::InvalidConfig(format!("p={modulus} must be at least m={m}")));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }

    pub fn points(&self) -> Option<&[FieldElement]> {
        self.points.as_deref()
    }

    /// `p^k`, the number of secrets (and codewords).
    pub fn secret_space_size(&self) -> u64 {
        self.modulus.get().saturating_pow(self.k as u32)
    }

    fn check_index(&self, s: usize) -> Result<(), SharingError> {
        if s == 0 || s > self.m {
            return Err(SharingError::IndexOutOfRange { index: s, m: self.m });
        }
        Ok(())
    }

    fn enumerable(&self) -> Result<u64, SharingError> {
        let size = self.secret_space_size();
        if size > ENUMERATION_LIMIT {
            return Err(SharingError::EnumerationTooLarge { size });
        }
        Ok(size)
    }
}

/// The hidden vector `x` of the share equation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SecretVector(Vec<FieldElement>);

impl SecretVector {
    pub fn new(values: &[u64], modulus: PrimeModulus) -> Self {
        Self(values.iter().map(|&v| FieldElement::new(v, modulus)).collect())
    }

    /// Uniform over GF(p)^k; draws `k` values in component order.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, k: usize, modulus: PrimeModulus) -> Self {
        let p = modulus.get();
        Self((0..k).map(|_| FieldElement::new(rng.gen_range(0..p), modulus)).collect())
    }

    /// The `index`-th element of GF(p)^k in lexicographic order.
    fn from_index(mut index: u64, k: usize, modulus: PrimeModulus) -> Self {
        let p = modulus.get();
        let mut digits = vec![FieldElement::zero(modulus); k];
        for slot in digits.iter_mut().rev() {
            *slot = FieldElement::new(index % p, modulus);
            index /= p;
        }
        Self(digits)
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn values(&self) -> Vec<u64> {
        self.0.iter().map(|e| e.value()).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Keys `c_s` indexed by controller `s` in `1..=m`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShareSet(BTreeMap<usize, FieldElement>);

impl ShareSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Self, SharingError>
    where
        I: IntoIterator<Item = (usize, FieldElement)>,
    {
        let mut set = Self::new();
        for (s, c) in pairs {
            if set.0.insert(s, c).is_some() {
                return Err(SharingError::DuplicateIndex(s));
            }
        }
        Ok(set)
    }

    /// Inserts or replaces the key of controller `s`.
    pub fn insert(&mut self, s: usize, c: FieldElement) -> Option<FieldElement> {
        self.0.insert(s, c)
    }

    pub fn get(&self, s: usize) -> Option<FieldElement> {
        self.0.get(&s).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, FieldElement)> + '_ {
        self.0.iter().map(|(&s, &c)| (s, c))
    }

    /// Keeps only the listed controllers.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        Self(self.0.iter().filter(|(s, _)| indices.contains(s)).map(|(&s, &c)| (s, c)).collect())
    }

    /// Values in index order.
    pub fn values(&self) -> Vec<u64> {
        self.0.values().map(|c| c.value()).collect()
    }
}

/// `c = A x` for every controller.
pub fn generate_shares(x: &SecretVector, cfg: &ThresholdConfig) -> Result<ShareSet, SharingError> {
    if x.len() != cfg.k {
        return Err(SharingError::SecretLength { expected: cfg.k, actual: x.len() });
    }
    let c = cfg.matrix.mul_vec(x.elements())?;
    ShareSet::from_pairs(c.into_iter().enumerate().map(|(i, c)| (i + 1, c)))
}

/// Solves for the secret from the rows of the supplied controllers.
///
/// More than `k` shares are cross-checked; with exactly `k` a wrong key is
/// undetectable and yields a wrong secret.
pub fn reconstruct_secret(partial: &ShareSet, cfg: &ThresholdConfig) -> Result<SecretVector, SharingError> {
    for s in partial.indices() {
        cfg.check_index(s)?;
    }
    if partial.len() < cfg.k {
        return Err(SharingError::InsufficientShares { have: partial.len(), need: cfg.k });
    }
    let rows: Vec<usize> = partial.indices().map(|s| s - 1).collect();
    let sub = cfg.matrix.select_rows(&rows);
    let rhs: Vec<FieldElement> = partial.iter().map(|(_, c)| c).collect();
    match sub.solve_unique(&rhs) {
        Ok(x) => Ok(SecretVector(x)),
        Err(FieldError::Inconsistent) => Err(SharingError::InconsistentShares),
        Err(FieldError::NoUniqueSolution { .. }) => Err(SharingError::InvalidConfig(
            "share matrix lost rank on a k-row subset".into(),
        )),
        Err(e) => Err(e.into()),
    }
}

/// Recovers all `m` keys from at least `k` of them.
pub fn reconstruct_keys(partial: &ShareSet, cfg: &ThresholdConfig) -> Result<ShareSet, SharingError> {
    let x = reconstruct_secret(partial, cfg)?;
    generate_shares(&x, cfg)
}

fn all_secrets(cfg: &ThresholdConfig) -> Result<impl Iterator<Item = SecretVector> + '_, SharingError> {
    let size = cfg.enumerable()?;
    Ok((0..size).map(|i| SecretVector::from_index(i, cfg.k, cfg.modulus)))
}

/// Every secret whose codeword agrees with `partial` on its indices, in
/// lexicographic order.
pub fn consistent_secrets(partial: &ShareSet, cfg: &ThresholdConfig) -> Result<Vec<SecretVector>, SharingError> {
    for s in partial.indices() {
        cfg.check_index(s)?;
    }
    let p = cfg.modulus.get();
    let constraints: Vec<(usize, u64)> = partial.iter().map(|(s, c)| (s - 1, c.value())).collect();
    Ok(all_secrets(cfg)?
        .filter(|x| {
            constraints.iter().all(|&(row, c)| {
                let dot = cfg
                    .matrix
                    .row(row)
                    .iter()
                    .zip(x.elements())
                    .fold(0u64, |acc, (a, xj)| (acc + a * xj.value()) % p);
                dot == c
            })
        })
        .collect())
}

/// The codeword set `{A x : x in GF(p)^k}` as digit strings `c_1 ... c_m`.
pub fn codeword_set(cfg: &ThresholdConfig) -> Result<BTreeSet<Vec<u64>>, SharingError> {
    all_secrets(cfg)?
        .map(|x| Ok(generate_shares(&x, cfg)?.values()))
        .collect()
}

/// Histogram over GF(p) of the key `target` implied by each secret
/// consistent with `partial`.
pub fn implied_key_histogram(
    partial: &ShareSet,
    cfg: &ThresholdConfig,
    target: usize,
) -> Result<Vec<usize>, SharingError> {
    cfg.check_index(target)?;
    let mut counts = vec![0usize; cfg.modulus.get() as usize];
    for x in consistent_secrets(partial, cfg)? {
        let c = generate_shares(&x, cfg)?.get(target).expect("full share set");
        counts[c.value() as usize] += 1;
    }
    Ok(counts)
}

/// Fixing any `k` digit positions to the values of a codeword leaves
/// exactly that one codeword. Exhaustive over codewords and position sets.
pub fn satisfies_unique_completion(cfg: &ThresholdConfig) -> Result<bool, SharingError> {
    let words = codeword_set(cfg)?;
    for positions in (0..cfg.m).combinations(cfg.k) {
        let mut seen: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        for w in &words {
            let key: Vec<u64> = positions.iter().map(|&i| w[i]).collect();
            *seen.entry(key).or_default() += 1;
        }
        if seen.values().any(|&n| n != 1) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    fn shares(p: u64, pairs: &[(usize, u64)]) -> ShareSet {
        ShareSet::from_pairs(pairs.iter().map(|&(s, c)| (s, FieldElement::new(c, gf(p))))).unwrap()
    }

    fn gf3_code() -> ThresholdConfig {
        ThresholdConfig::vandermonde(2, 3, Some(gf(3))).unwrap()
    }

    #[test]
    fn generate_examples() {
        let cfg = gf3_code();
        let c = generate_shares(&SecretVector::new(&[2, 1], gf(3)), &cfg).unwrap();
        assert_eq!(c, shares(3, &[(1, 2), (2, 0), (3, 1)]));
        let zero = generate_shares(&SecretVector::new(&[0, 0], gf(3)), &cfg).unwrap();
        assert_eq!(zero.values(), vec![0, 0, 0]);
        let cfg5 = ThresholdConfig::vandermonde(2, 3, Some(gf(5))).unwrap();
        let c5 = generate_shares(&SecretVector::new(&[1, 1], gf(5)), &cfg5).unwrap();
        assert_eq!(c5, shares(5, &[(1, 1), (2, 2), (3, 3)]));
        assert!(matches!(
            generate_shares(&SecretVector::new(&[1], gf(3)), &cfg),
            Err(SharingError::SecretLength { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn reconstruct_examples() {
        let cfg = gf3_code();
        let full = shares(3, &[(1, 2), (2, 0), (3, 1)]);
        assert_eq!(reconstruct_keys(&shares(3, &[(1, 2), (3, 1)]), &cfg).unwrap(), full);
        assert_eq!(reconstruct_keys(&full, &cfg).unwrap(), full);
        assert_eq!(
            reconstruct_keys(&shares(3, &[(1, 2)]), &cfg),
            Err(SharingError::InsufficientShares { have: 1, need: 2 })
        );
        assert_eq!(
            reconstruct_keys(&shares(3, &[(1, 2), (2, 0), (3, 2)]), &cfg),
            Err(SharingError::InconsistentShares)
        );
        assert_eq!(
            reconstruct_keys(&shares(3, &[(1, 2), (4, 0)]), &cfg),
            Err(SharingError::IndexOutOfRange { index: 4, m: 3 })
        );
    }

    #[test]
    fn consistent_secret_counts() {
        let cfg = ThresholdConfig::vandermonde(3, 5, None).unwrap();
        let x = SecretVector::new(&[4, 1, 3], gf(5));
        let all = generate_shares(&x, &cfg).unwrap();
        assert_eq!(consistent_secrets(&all.restrict(&[1, 3, 5]), &cfg).unwrap(), vec![x]);
        assert_eq!(consistent_secrets(&all.restrict(&[2, 4]), &cfg).unwrap().len(), 5);
        assert_eq!(consistent_secrets(&ShareSet::new(), &cfg).unwrap().len(), 125);
    }

    #[test]
    fn codeword_examples() {
        let cfg = gf3_code();
        assert_eq!(codeword_set(&cfg).unwrap().len(), 9);
        assert!(satisfies_unique_completion(&cfg).unwrap());

        let single = FieldMatrix::from_rows(gf(2), &[vec![1]]).unwrap();
        let cfg1 = ThresholdConfig::with_matrix(1, 1, single).unwrap();
        let words: Vec<_> = codeword_set(&cfg1).unwrap().into_iter().collect();
        assert_eq!(words, vec![vec![0], vec![1]]);
    }

    #[test]
    fn enumeration_limit() {
        let cfg = ThresholdConfig::vandermonde(3, 5, Some(gf(101))).unwrap();
        assert!(matches!(codeword_set(&cfg), Err(SharingError::EnumerationTooLarge { size: 1_030_301 })));
    }

    #[test]
    fn config_validation() {
        assert!(ThresholdConfig::vandermonde(4, 3, None).is_err());
        assert!(ThresholdConfig::vandermonde(0, 3, None).is_err());
        assert!(ThresholdConfig::vandermonde(2, 5, Some(gf(3))).is_err());
        let dependent = FieldMatrix::from_rows(gf(5), &[vec![1, 2], vec![2, 4], vec![0, 1]]).unwrap();
        assert!(ThresholdConfig::with_matrix(2, 3, dependent).is_err());
        assert_eq!(ThresholdConfig::vandermonde(2, 4, None).unwrap().modulus().get(), 5);
    }

    #[test]
    fn every_k_subset_reconstructs() {
        for (k, m, p) in [(2, 3, 3), (2, 3, 5), (3, 5, 5), (3, 4, 7), (4, 5, 7)] {
            let cfg = ThresholdConfig::vandermonde(k, m, Some(gf(p))).unwrap();
            let mut rng = rand::thread_rng();
            for _ in 0..5 {
                let x = SecretVector::random(&mut rng, k, cfg.modulus());
                let full = generate_shares(&x, &cfg).unwrap();
                for subset in (1..=m).combinations(k) {
                    assert_eq!(reconstruct_keys(&full.restrict(&subset), &cfg).unwrap(), full);
                }
            }
        }
    }

    #[test]
    fn k_minus_one_keys_leave_unshared_keys_uniform() {
        for p in [3u64, 5, 7] {
            for (k, m) in [(2usize, 3usize), (3, 5), (2, 2), (3, 4)] {
                if (m as u64) > p {
                    continue;
                }
                let cfg = ThresholdConfig::vandermonde(k, m, Some(gf(p))).unwrap();
                let full = generate_shares(&SecretVector::new(&vec![1; k], gf(p)), &cfg).unwrap();
                for known in (1..=m).combinations(k - 1) {
                    let partial = full.restrict(&known);
                    assert_eq!(consistent_secrets(&partial, &cfg).unwrap().len(), p as usize);
                    for target in (1..=m).filter(|s| !known.contains(s)) {
                        let hist = implied_key_histogram(&partial, &cfg, target).unwrap();
                        assert!(hist.iter().all(|&n| n == 1), "p={p} k={k} m={m} {known:?}->{target}: {hist:?}");
                    }
                }
            }
        }
    }
}
