use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{FieldError, PrimeModulus};

/// A residue in `[0, p)` tagged with its modulus.
///
/// The `std::ops` impls panic when the moduli differ; use [`field_arith`] or
/// the `checked_*` methods where the operands come from untrusted input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElement {
    value: u64,
    modulus: PrimeModulus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    Inv,
    Neg,
}

impl FieldElement {
    /// Reduces `value` into `[0, p)`.
    pub fn new(value: u64, modulus: PrimeModulus) -> Self {
        Self {
            value: value % modulus.get(),
            modulus,
        }
    }

    pub fn from_i64(value: i64, modulus: PrimeModulus) -> Self {
        let p = modulus.get() as i64;
        Self::new(value.rem_euclid(p) as u64, modulus)
    }

    pub fn zero(modulus: PrimeModulus) -> Self {
        Self { value: 0, modulus }
    }

    pub fn one(modulus: PrimeModulus) -> Self {
        Self::new(1, modulus)
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> PrimeModulus {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, rhs: Self) -> Result<u64, FieldError> {
        if self.modulus != rhs.modulus {
            return Err(FieldError::ModulusMismatch {
                left: self.modulus.get(),
                right: rhs.modulus.get(),
            });
        }
        Ok(self.modulus.get())
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, FieldError> {
        self.same_field(rhs)?;
        Ok(Self::new(self.value + rhs.value, self.modulus))
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self, FieldError> {
        let p = self.same_field(rhs)?;
        Ok(Self::new(self.value + p - rhs.value, self.modulus))
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self, FieldError> {
        self.same_field(rhs)?;
        Ok(Self::new(self.value * rhs.value, self.modulus))
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self, FieldError> {
        self.same_field(rhs)?;
        self.checked_mul(rhs.inv()?)
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(self) -> Result<Self, FieldError> {
        let p = self.modulus.get();
        if self.value == 0 {
            return Err(FieldError::DivisionByZero(p));
        }
        let (mut r0, mut r1) = (p as i64, self.value as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(Self::from_i64(t0, self.modulus))
    }

    pub fn pow(self, mut exp: u64) -> Self {
        let p = self.modulus.get();
        let mut base = self.value;
        let mut acc = 1 % p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            exp >>= 1;
        }
        Self::new(acc, self.modulus)
    }
}

/// Applies `op` to `a` (and `b` for binary operations). `b` is ignored for
/// the unary `Inv` and `Neg`.
pub fn field_arith(a: FieldElement, b: FieldElement, op: FieldOp) -> Result<FieldElement, FieldError> {
    match op {
        FieldOp::Add => a.checked_add(b),
        FieldOp::Sub => a.checked_sub(b),
        FieldOp::Mul => a.checked_mul(b),
        FieldOp::Div => a.checked_div(b),
        FieldOp::Inv => a.inv(),
        FieldOp::Neg => Ok(-a),
    }
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("field modulus mismatch")
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).expect("field modulus mismatch")
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("field modulus mismatch")
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        let p = self.modulus.get();
        Self::new(p - self.value, self.modulus)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}
