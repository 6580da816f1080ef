use num_traits::{One, Zero};
use std::ops::Mul;

use super::{Real, SimError, C};

/// Dense square complex matrix acting on a local space of dimension `dim`.
///
/// Row-major; for multi-site operators the local index is big-endian in the
/// order the sites are passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator<T> {
    dim: usize,
    data: Vec<C<T>>,
}

impl<T: Real> Operator<T> {
    pub fn from_rows(dim: usize, data: Vec<C<T>>) -> Result<Self, SimError> {
        if data.len() != dim * dim {
            return Err(SimError::BadDimension(format!(
                "{dim}x{dim} operator needs {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    /// Operator whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C<T>>]) -> Result<Self, SimError> {
        let dim = columns.len();
        if columns.iter().any(|c| c.len() != dim) {
            return Err(SimError::BadDimension("columns must form a square matrix".into()));
        }
        let mut data = vec![C::zero(); dim * dim];
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                data[i * dim + j] = v;
            }
        }
        Ok(Self { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![C::one(); dim])
    }

    pub fn diagonal(entries: &[C<T>]) -> Self {
        let dim = entries.len();
        let mut data = vec![C::zero(); dim * dim];
        for (i, &e) in entries.iter().enumerate() {
            data[i * dim + i] = e;
        }
        Self { dim, data }
    }

    /// `diag(e^{i phi_0}, e^{i phi_1}, ...)`.
    pub fn phases(angles: &[T]) -> Self {
        let entries: Vec<_> = angles.iter().map(|&a| C::from_polar(T::one(), a)).collect();
        Self::diagonal(&entries)
    }

    pub fn hadamard() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self::from_rows(2, vec![C::new(h, T::zero()), C::new(h, T::zero()), C::new(h, T::zero()), C::new(-h, T::zero())])
            .unwrap()
    }

    pub fn pauli_x() -> Self {
        let (o, l) = (C::zero(), C::one());
        Self::from_rows(2, vec![o, l, l, o]).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::diagonal(&[C::one(), -C::one()])
    }

    /// CNOT with the first site as control.
    pub fn cnot() -> Self {
        Self::permutation(4, |i| match i {
            2 => 3,
            3 => 2,
            i => i,
        })
    }

    /// Permutation matrix sending basis state `i` to `image(i)`.
    pub fn permutation(dim: usize, image: impl Fn(usize) -> usize) -> Self {
        let mut data = vec![C::zero(); dim * dim];
        for i in 0..dim {
            data[image(i) * dim + i] = C::one();
        }
        Self { dim, data }
    }

    /// Discrete Fourier transform on a `d`-level system.
    pub fn fourier(d: usize) -> Self {
        let norm = T::one() / T::lit(d as f64).sqrt();
        let tau = T::lit(std::f64::consts::TAU / d as f64);
        let data = (0..d * d)
            .map(|idx| {
                let (j, k) = (idx / d, idx % d);
                C::from_polar(norm, tau * T::lit(((j * k) % d) as f64))
            })
            .collect();
        Self { dim: d, data }
    }

    /// Two-qudit modular adder `|a, b> -> |a, b + factor * a mod d>`.
    pub fn modular_sum(d: usize, factor: usize) -> Self {
        Self::permutation(d * d, |i| {
            let (a, b) = (i / d, i % d);
            a * d + (b + factor * a) % d
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C<T> {
        self.data[row * self.dim + col]
    }

    pub fn column(&self, col: usize) -> Vec<C<T>> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        let data = (0..d * d).map(|idx| self.get(idx % d, idx / d).conj()).collect();
        Self { dim: d, data }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let d = a * b;
        let mut data = vec![C::zero(); d * d];
        for i in 0..a {
            for j in 0..a {
                let s = self.get(i, j);
                for k in 0..b {
                    for l in 0..b {
                        data[(i * b + k) * d + (j * b + l)] = s * other.get(k, l);
                    }
                }
            }
        }
        Self { dim: d, data }
    }

    /// Largest entry of `|U† U - I|`.
    pub fn unitarity_defect(&self) -> T {
        let prod = &self.dagger() * self;
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { C::one() } else { C::zero() };
                worst = worst.max((prod.get(i, j) - target).norm());
            }
        }
        worst
    }

    pub fn check_unitary(&self) -> Result<(), SimError> {
        let defect = self.unitarity_defect();
        if defect > T::tolerance() {
            return Err(SimError::NonUnitary(defect.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(())
    }

    pub fn apply_to(&self, v: &[C<T>]) -> Vec<C<T>> {
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .fold(C::zero(), |acc, (&a, &x)| acc + a * x)
            })
            .collect()
    }

    /// Entry-wise closeness.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.dim == other.dim && self.data.iter().zip(&other.data).all(|(a, b)| (*a - *b).norm() <= tol)
    }
}

impl<T: Real> Mul for &Operator<T> {
    type Output = Operator<T>;

    fn mul(self, rhs: Self) -> Operator<T> {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        let d = self.dim;
        let mut data = vec![C::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] = data[i * d + j] + a * rhs.get(k, j);
                }
            }
        }
        Operator { dim: d, data }
    }
}
