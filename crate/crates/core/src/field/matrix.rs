use itertools::Itertools;
use serde::{Deserialize, Serialize};
use std::fmt;

use super::{FieldElement, FieldError, PrimeModulus};

/// Dense row-major matrix over GF(p).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldMatrix {
    modulus: PrimeModulus,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl FieldMatrix {
    /// Builds a matrix from row-major residues; entries are reduced mod p.
    pub fn new(modulus: PrimeModulus, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self, FieldError> {
        if data.len() != rows * cols {
            return Err(FieldError::BadDimensions(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        let p = modulus.get();
        let data = data.into_iter().map(|v| v % p).collect();
        Ok(Self { modulus, rows, cols, data })
    }

    pub fn from_rows(modulus: PrimeModulus, rows: &[Vec<u64>]) -> Result<Self, FieldError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(FieldError::BadDimensions(format!(
                "ragged rows: expected {cols} columns, found {}",
                bad.len()
            )));
        }
        Self::new(modulus, rows.len(), cols, rows.concat())
    }

    pub fn zeros(modulus: PrimeModulus, rows: usize, cols: usize) -> Self {
        Self { modulus, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(modulus: PrimeModulus, n: usize) -> Self {
        let mut m = Self::zeros(modulus, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % modulus.get();
        }
        m
    }

    /// The `m x k` Vandermonde matrix whose row `i` is `(1, z_i, ..., z_i^(k-1))`.
    pub fn vandermonde(m: usize, k: usize, points: &[FieldElement]) -> Result<Self, FieldError> {
        if points.len() != m {
            return Err(FieldError::DimensionMismatch { expected: m, actual: points.len() });
        }
        if k == 0 || k > m {
            return Err(FieldError::BadDimensions(format!("need 1 <= k <= m, got k={k}, m={m}")));
        }
        let modulus = points[0].modulus();
        if let Some(bad) = points.iter().find(|z| z.modulus() != modulus) {
            return Err(FieldError::ModulusMismatch { left: modulus.get(), right: bad.modulus().get() });
        }
        if (m as u64) > modulus.get() {
            return Err(FieldError::BadDimensions(format!(
                "{m} distinct points do not exist in GF({modulus})"
            )));
        }
        if !points.iter().map(|z| z.value()).all_unique() {
            return Err(FieldError::DuplicatePoints);
        }
        let data = points
            .iter()
            .flat_map(|&z| (0..k as u64).map(move |e| z.pow(e).value()))
            .collect();
        Ok(Self { modulus, rows: m, cols: k, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        FieldElement::new(self.data[i * self.cols + j], self.modulus)
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn select_rows(&self, selection: &[usize]) -> Self {
        let data = selection.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Self { modulus: self.modulus, rows: selection.len(), cols: self.cols, data }
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.data[i * self.cols + j]);
            }
        }
        Self { modulus: self.modulus, rows: self.cols, cols: self.rows, data }
    }

    fn check_vector(&self, v: &[FieldElement], expected: usize) -> Result<(), FieldError> {
        if v.len() != expected {
            return Err(FieldError::DimensionMismatch { expected, actual: v.len() });
        }
        if let Some(bad) = v.iter().find(|e| e.modulus() != self.modulus) {
            return Err(FieldError::ModulusMismatch { left: self.modulus.get(), right: bad.modulus().get() });
        }
        Ok(())
    }

    /// `b_i = sum_j A_ij x_j mod p`.
    pub fn mul_vec(&self, x: &[FieldElement]) -> Result<Vec<FieldElement>, FieldError> {
        self.check_vector(x, self.cols)?;
        let p = self.modulus.get();
        Ok((0..self.rows)
            .map(|i| {
                let acc = self
                    .row(i)
                    .iter()
                    .zip(x)
                    .fold(0u64, |acc, (&a, xj)| (acc + a * xj.value()) % p);
                FieldElement::new(acc, self.modulus)
            })
            .collect())
    }

    pub fn rank(&self) -> usize {
        let mut work = self.data.clone();
        eliminate(&mut work, self.rows, self.cols, self.cols, self.modulus.get()).len()
    }

    /// Returns the unique `x` with `A x = b`, or why there is none.
    ///
    /// Rank deficiency (including `f < g`) is reported before inconsistency.
    pub fn solve_unique(&self, b: &[FieldElement]) -> Result<Vec<FieldElement>, FieldError> {
        self.check_vector(b, self.rows)?;
        let p = self.modulus.get();
        let (f, g) = (self.rows, self.cols);
        let rank = self.rank();
        if f < g || rank < g {
            return Err(FieldError::NoUniqueSolution { rank, rows: f, cols: g });
        }

        // Augmented [A | b], reduced to RREF over the first g columns.
        let width = g + 1;
        let mut work = Vec::with_capacity(f * width);
        for i in 0..f {
            work.extend_from_slice(self.row(i));
            work.push(b[i].value());
        }
        let pivots = eliminate(&mut work, f, width, g, p);
        debug_assert_eq!(pivots.len(), g);
        if (g..f).any(|i| work[i * width + g] != 0) {
            return Err(FieldError::Inconsistent);
        }
        let x: Vec<_> = (0..g).map(|i| FieldElement::new(work[i * width + g], self.modulus)).collect();

        if self.mul_vec(&x)? != b {
            return Err(FieldError::Inconsistent);
        }
        Ok(x)
    }

    /// Every `k`-row submatrix has full rank `k` (exhaustive over all row subsets).
    pub fn is_threshold_matrix(&self, k: usize) -> Result<bool, FieldError> {
        if self.cols != k || self.rows < k || k == 0 {
            return Err(FieldError::BadDimensions(format!(
                "threshold check needs an m x k matrix with m >= k >= 1, got {}x{} for k={k}",
                self.rows, self.cols
            )));
        }
        Ok((0..self.rows)
            .combinations(k)
            .all(|rows| self.select_rows(&rows).rank() == k))
    }
}

/// Gauss-Jordan elimination in place over the first `pivot_cols` columns of a
/// `rows x width` row-major buffer. Pivot rows are taken in order of smallest
/// row index with a nonzero entry. Returns the pivot columns; pivot rows end
/// up in positions `0..len` with unit pivots.
fn eliminate(work: &mut [u64], rows: usize, width: usize, pivot_cols: usize, p: u64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next_row = 0;
    for col in 0..pivot_cols {
        if next_row == rows {
            break;
        }
        let Some(src) = (next_row..rows).find(|&r| work[r * width + col] != 0) else {
            continue;
        };
        if src != next_row {
            for j in 0..width {
                work.swap(src * width + j, next_row * width + j);
            }
        }
        let inv = FieldElement::new(work[next_row * width + col], PrimeModulus::new(p).expect("prime"))
            .inv()
            .expect("nonzero pivot")
            .value();
        for j in 0..width {
            let e = &mut work[next_row * width + j];
            *e = *e * inv % p;
        }
        for r in 0..rows {
            if r == next_row {
                continue;
            }
            let factor = work[r * width + col];
            if factor == 0 {
                continue;
            }
            for j in 0..width {
                let sub = factor * work[next_row * width + j] % p;
                let e = &mut work[r * width + j];
                *e = (*e + p - sub) % p;
            }
        }
        pivots.push(col);
        next_row += 1;
    }
    pivots
}

impl fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row = self.row(i).iter().map(u64::to_string).join(" ");
            writeln!(f, "[{row}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    fn elems(p: u64, vs: &[u64]) -> Vec<FieldElement> {
        vs.iter().map(|&v| FieldElement::new(v, gf(p))).collect()
    }

    fn values(v: &[FieldElement]) -> Vec<u64> {
        v.iter().map(|e| e.value()).collect()
    }

    /// Enumerates all of GF(p)^g and keeps the vectors solving `A x = b`.
    fn brute_force_solutions(a: &FieldMatrix, b: &[FieldElement]) -> Vec<Vec<u64>> {
        let p = a.modulus().get();
        let g = a.cols() as u32;
        (0..p.pow(g))
            .map(|mut code| {
                (0..g)
                    .map(|_| {
                        let d = code % p;
                        code /= p;
                        d
                    })
                    .collect::<Vec<_>>()
            })
            .filter(|x| {
                (0..a.rows()).all(|i| {
                    a.row(i).iter().zip(x).map(|(aij, xj)| aij * xj).sum::<u64>() % p == b[i].value()
                })
            })
            .collect()
    }

    #[test]
    fn mat_vec_examples() {
        let a = FieldMatrix::from_rows(gf(3), &[vec![1, 0], vec![1, 1], vec![1, 2]]).unwrap();
        assert_eq!(values(&a.mul_vec(&elems(3, &[2, 1])).unwrap()), vec![2, 0, 1]);
        assert_eq!(values(&a.mul_vec(&elems(3, &[0, 0])).unwrap()), vec![0, 0, 0]);
        let id = FieldMatrix::identity(gf(3), 2);
        assert_eq!(values(&id.mul_vec(&elems(3, &[1, 2])).unwrap()), vec![1, 2]);
        assert!(matches!(
            a.mul_vec(&elems(3, &[1])),
            Err(FieldError::DimensionMismatch { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(FieldMatrix::identity(gf(3), 3).rank(), 3);
        let ones = FieldMatrix::from_rows(gf(2), &[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(ones.rank(), 1);
        let a = FieldMatrix::from_rows(gf(3), &[vec![1, 0], vec![1, 1], vec![1, 2]]).unwrap();
        assert_eq!(a.rank(), 2);
        assert_eq!(FieldMatrix::zeros(gf(5), 3, 2).rank(), 0);
    }

    #[test]
    fn solve_examples() {
        let a = FieldMatrix::from_rows(gf(3), &[vec![1, 0], vec![1, 2]]).unwrap();
        let b = elems(3, &[2, 1]);
        assert_eq!(values(&a.solve_unique(&b).unwrap()), vec![2, 1]);
        assert_eq!(brute_force_solutions(&a, &b), vec![vec![2, 1]]);

        let id = FieldMatrix::identity(gf(7), 3);
        assert_eq!(values(&id.solve_unique(&elems(7, &[4, 0, 6])).unwrap()), vec![4, 0, 6]);

        let singular = FieldMatrix::from_rows(gf(3), &[vec![1, 1], vec![2, 2]]).unwrap();
        assert_eq!(
            singular.solve_unique(&elems(3, &[0, 0])),
            Err(FieldError::NoUniqueSolution { rank: 1, rows: 2, cols: 2 })
        );

        let tall = FieldMatrix::from_rows(gf(3), &[vec![1, 0], vec![1, 1], vec![1, 2]]).unwrap();
        assert_eq!(tall.solve_unique(&elems(3, &[2, 0, 0])), Err(FieldError::Inconsistent));

        let wide = FieldMatrix::from_rows(gf(5), &[vec![1, 2, 3]]).unwrap();
        assert!(matches!(wide.solve_unique(&elems(5, &[1])), Err(FieldError::NoUniqueSolution { .. })));
    }

    #[test]
    fn vandermonde_examples() {
        let v = FieldMatrix::vandermonde(3, 2, &elems(3, &[0, 1, 2])).unwrap();
        assert_eq!(v, FieldMatrix::from_rows(gf(3), &[vec![1, 0], vec![1, 1], vec![1, 2]]).unwrap());
        let col = FieldMatrix::vandermonde(3, 1, &elems(7, &[3, 5, 6])).unwrap();
        assert_eq!(col, FieldMatrix::from_rows(gf(7), &[vec![1], vec![1], vec![1]]).unwrap());
        let v5 = FieldMatrix::vandermonde(2, 2, &elems(5, &[1, 3])).unwrap();
        assert_eq!(v5, FieldMatrix::from_rows(gf(5), &[vec![1, 1], vec![1, 3]]).unwrap());

        assert_eq!(FieldMatrix::vandermonde(3, 2, &elems(5, &[1, 1, 2])), Err(FieldError::DuplicatePoints));
        assert!(matches!(FieldMatrix::vandermonde(2, 3, &elems(5, &[1, 2])), Err(FieldError::BadDimensions(_))));
        assert!(matches!(FieldMatrix::vandermonde(3, 2, &elems(2, &[0, 1, 0])), Err(FieldError::BadDimensions(_))));
    }

    #[test]
    fn threshold_matrix_examples() {
        let v = FieldMatrix::vandermonde(3, 2, &elems(3, &[0, 1, 2])).unwrap();
        assert!(v.is_threshold_matrix(2).unwrap());
        let repeated = FieldMatrix::from_rows(gf(5), &[vec![1, 2], vec![1, 2], vec![0, 1]]).unwrap();
        assert!(!repeated.is_threshold_matrix(2).unwrap());
        let v5 = FieldMatrix::vandermonde(5, 3, &elems(5, &[0, 1, 2, 3, 4])).unwrap();
        assert!(v5.is_threshold_matrix(3).unwrap());
        assert!(v.is_threshold_matrix(3).is_err());

        // (I | T)^t with T = [[1, 1]] is a valid (2,3) code over GF(5).
        let systematic = FieldMatrix::from_rows(gf(5), &[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
        assert!(systematic.is_threshold_matrix(2).unwrap());
        let bad_t = FieldMatrix::from_rows(gf(5), &[vec![1, 0], vec![0, 1], vec![1, 0]]).unwrap();
        assert!(!bad_t.is_threshold_matrix(2).unwrap());
    }

    #[test]
    fn square_vandermonde_minors_nonsingular() {
        for p in [5u64, 7, 11] {
            for m in 1..=6usize {
                if m as u64 > p {
                    continue;
                }
                let pts = elems(p, &(0..m as u64).collect::<Vec<_>>());
                for k in 1..=m {
                    let v = FieldMatrix::vandermonde(m, k, &pts).unwrap();
                    for rows in (0..m).combinations(k) {
                        assert_eq!(v.select_rows(&rows).rank(), k, "p={p} m={m} k={k} rows={rows:?}");
                    }
                }
            }
        }
    }

    fn arb_system() -> impl Strategy<Value = (u64, usize, usize, Vec<u64>, Vec<u64>)> {
        (prop::sample::select(vec![2u64, 3, 5]), 1usize..=4, 1usize..=4).prop_flat_map(|(p, f, g)| {
            (
                Just(p),
                Just(f),
                Just(g),
                prop::collection::vec(0..p, f * g),
                prop::collection::vec(0..p, f),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn solve_round_trip(p in prop::sample::select(vec![3u64, 5, 7, 11]), f in 1usize..=6, g in 1usize..=6, seed in any::<u64>()) {
            prop_assume!(f >= g);
            let m = gf(p);
            let mut s = seed;
            let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 33) % p };
            let a = FieldMatrix::new(m, f, g, (0..f * g).map(|_| next()).collect()).unwrap();
            prop_assume!(a.rank() == g);
            let x: Vec<_> = (0..g).map(|_| FieldElement::new(next(), m)).collect();
            let b = a.mul_vec(&x).unwrap();
            prop_assert_eq!(a.solve_unique(&b).unwrap(), x);
        }

        #[test]
        fn unique_solution_iff_brute_force_finds_one((p, f, g, data, rhs) in arb_system()) {
            let a = FieldMatrix::new(gf(p), f, g, data).unwrap();
            let b = elems(p, &rhs);
            let brute = brute_force_solutions(&a, &b);
            match a.solve_unique(&b) {
                Ok(x) => prop_assert_eq!(brute, vec![values(&x)]),
                Err(_) => prop_assert_ne!(brute.len(), 1),
            }
        }
    }
}
