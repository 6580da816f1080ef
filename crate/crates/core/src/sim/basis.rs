use rand::Rng;
use rand_distr::StandardNormal;

use super::{Operator, Real, SimError, C};

/// Basis a measurement projects onto.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureBasis<T> {
    /// Computational basis of the measured sites.
    Computational,
    /// `{|+>, |->}` on a single qubit; outcome 0 is `+`.
    X,
    /// Bell basis on a qubit pair; outcome `2i + j` is `|B_{i,j}>`.
    Bell,
    /// Columns of `columns` are the basis vectors.
    Custom { label: String, columns: Operator<T> },
}

impl<T: Real> MeasureBasis<T> {
    pub fn label(&self) -> String {
        match self {
            Self::Computational => "computational".into(),
            Self::X => "x".into(),
            Self::Bell => "bell".into(),
            Self::Custom { label, .. } => label.clone(),
        }
    }

    pub(crate) fn columns(&self, sites: &[usize], dims: &[usize]) -> Result<Operator<T>, SimError> {
        let local: usize = dims.iter().product();
        let op = match self {
            Self::Computational => Operator::identity(local),
            Self::X => {
                if dims != [2] {
                    return Err(not_qubit(sites, dims));
                }
                Operator::hadamard()
            }
            Self::Bell => {
                if dims != [2, 2] {
                    return Err(not_qubit(sites, dims));
                }
                bell_columns()
            }
            Self::Custom { columns, .. } => {
                columns.check_unitary()?;
                columns.clone()
            }
        };
        if op.dim() != local {
            return Err(SimError::BasisDimensionMismatch { basis: op.dim(), local });
        }
        Ok(op)
    }
}

fn not_qubit(sites: &[usize], dims: &[usize]) -> SimError {
    let bad = sites.iter().zip(dims).find(|(_, &d)| d != 2).map_or(sites.len(), |(&s, _)| s);
    SimError::NotQubit(bad)
}

/// `|B_{i,j}> = (1/√2) Σ_x (-1)^{x i} |x, j ⊕ x>`, as column `2i + j`.
pub(crate) fn bell_columns<T: Real>() -> Operator<T> {
    let h = T::FRAC_1_SQRT_2();
    let mut cols = Vec::with_capacity(4);
    for i in 0..2usize {
        for j in 0..2usize {
            let mut v = vec![C::new(T::zero(), T::zero()); 4];
            for x in 0..2usize {
                let sign = if x * i == 1 { -h } else { h };
                v[2 * x + (j ^ x)] = C::new(sign, T::zero());
            }
            cols.push(v);
        }
    }
    Operator::from_columns(&cols).expect("4x4")
}

/// `|B_{i,j}>` in computational coordinates over two qubits.
pub fn bell_vector<T: Real>(i: usize, j: usize) -> Vec<C<T>> {
    bell_columns().column(2 * (i & 1) + (j & 1))
}

/// A controller's private single-qubit basis `{|0̃>, |1̃>}`, stored as the
/// unitary whose columns are the two basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec<T> {
    unitary: Operator<T>,
    owner: String,
    /// Only the dealer and the owner may read this basis.
    secret: bool,
}

impl<T: Real> BasisSpec<T> {
    pub fn new(unitary: Operator<T>, owner: impl Into<String>, secret: bool) -> Result<Self, SimError> {
        if unitary.dim() != 2 {
            return Err(SimError::BadDimension(format!("basis must be 2x2, got {}", unitary.dim())));
        }
        unitary.check_unitary()?;
        Ok(Self { unitary, owner: owner.into(), secret })
    }

    pub fn computational(owner: impl Into<String>) -> Self {
        Self { unitary: Operator::identity(2), owner: owner.into(), secret: false }
    }

    /// Haar-random basis. Draws eight standard normals (real then imaginary
    /// part, column-major) and orthonormalises the columns.
    pub fn haar<R: Rng + ?Sized>(rng: &mut R, owner: impl Into<String>) -> Self {
        let mut draw = || {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C::new(T::lit(re), T::lit(im))
        };
        let a = [draw(), draw()];
        let b = [draw(), draw()];
        let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
        let e0 = [a[0] / na, a[1] / na];
        let overlap = e0[0].conj() * b[0] + e0[1].conj() * b[1];
        let r = [b[0] - e0[0] * overlap, b[1] - e0[1] * overlap];
        let nr = (r[0].norm_sqr() + r[1].norm_sqr()).sqrt();
        let e1 = [r[0] / nr, r[1] / nr];
        let unitary = Operator::from_columns(&[e0.to_vec(), e1.to_vec()]).expect("2x2");
        Self { unitary, owner: owner.into(), secret: true }
    }

    pub fn unitary(&self) -> &Operator<T> {
        &self.unitary
    }

    pub fn owner(&self) -> &str {
        &self.owner
    }

    pub fn is_secret(&self) -> bool {
        self.secret
    }

    /// `|0̃>` or `|1̃>` in computational coordinates.
    pub fn vector(&self, index: usize) -> Vec<C<T>> {
        self.unitary.column(index)
    }

    /// Expresses an operator given in the `{|0̃>, |1̃>}` basis in
    /// computational coordinates: `U op U†`.
    pub fn lift(&self, op: &Operator<T>) -> Operator<T> {
        &(&self.unitary * op) * &self.unitary.dagger()
    }

    /// Same as [`lift`](Self::lift) for a two-site operator whose second
    /// factor is this basis' qubit: `(I ⊗ U) op (I ⊗ U†)`.
    pub fn lift_second(&self, op: &Operator<T>) -> Operator<T> {
        let left = Operator::identity(op.dim() / 2);
        let u = left.kron(&self.unitary);
        &(&u * op) * &u.dagger()
    }

    /// Hadamard in this basis: `|0̃> -> |+̃>`.
    pub fn hadamard(&self) -> Operator<T> {
        self.lift(&Operator::hadamard())
    }

    pub fn measure_basis(&self) -> MeasureBasis<T> {
        MeasureBasis::Custom { label: format!("tilde[{}]", self.owner), columns: self.unitary.clone() }
    }

    /// `{|+̃>, |-̃>}` with `|±̃> = (|0̃> ± |1̃>)/√2`; outcome 0 is `+̃`.
    pub fn plus_minus_basis(&self) -> MeasureBasis<T> {
        MeasureBasis::Custom {
            label: format!("pm-tilde[{}]", self.owner),
            columns: &self.unitary * &Operator::hadamard(),
        }
    }
}
