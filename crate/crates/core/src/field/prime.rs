use serde::{Deserialize, Serialize};
use std::fmt;

use super::FieldError;

/// Largest modulus accepted. Keeps `(p-1)^2` far below `u64::MAX`.
pub const MAX_PRIME: u64 = 1_000_000;

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// A prime modulus `p <= MAX_PRIME`, checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p > MAX_PRIME {
            return Err(FieldError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// Whether the field has room for `m` mutually distinct evaluation points.
    pub fn admits_controllers(self, m: usize) -> bool {
        self.0 >= m as u64
    }
}

impl TryFrom<u64> for PrimeModulus {
    type Error = FieldError;

    fn try_from(p: u64) -> Result<Self, Self::Error> {
        Self::new(p)
    }
}

impl From<PrimeModulus> for u64 {
    fn from(p: PrimeModulus) -> u64 {
        p.0
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Smallest prime `p >= m` (and `p >= 2`). A prime `m` is its own answer.
pub fn smallest_valid_prime(m: usize) -> PrimeModulus {
    let mut p = (m as u64).max(2);
    while !is_prime(p) {
        p += 1;
    }
    PrimeModulus(p)
}
