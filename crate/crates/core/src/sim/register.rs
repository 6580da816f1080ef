use serde::{Deserialize, Serialize};

use super::SimError;

/// Largest total dimension a register may have (2^22).
pub const MAX_DIMENSION: usize = 1 << 22;

/// Ordered list of named subsystems with their dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    dims: Vec<usize>,
    labels: Vec<String>,
    strides: Vec<usize>,
}

impl Register {
    pub fn new<S: Into<String>>(sites: impl IntoIterator<Item = (S, usize)>) -> Result<Self, SimError> {
        let (labels, dims): (Vec<String>, Vec<usize>) = sites.into_iter().map(|(l, d)| (l.into(), d)).unzip();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(SimError::DuplicateLabel(l.clone()));
            }
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(SimError::BadDimension(format!("site dimension {d} < 2")));
        }
        let total = dims.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
        if total > MAX_DIMENSION as u128 {
            return Err(SimError::CapExceeded(total));
        }
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Ok(Self { dims, labels, strides })
    }

    pub fn qubits<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self, SimError> {
        Self::new(labels.into_iter().map(|l| (l, 2)))
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self, site: usize) -> usize {
        self.dims[site]
    }

    pub fn label(&self, site: usize) -> &str {
        &self.labels[site]
    }

    pub fn stride(&self, site: usize) -> usize {
        self.strides[site]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index_of(&self, label: &str) -> Result<usize, SimError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| SimError::UnknownSite(label.to_string()))
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &Register) -> Result<Register, SimError> {
        Register::new(
            self.labels
                .iter()
                .cloned()
                .zip(self.dims.iter().copied())
                .chain(other.labels.iter().cloned().zip(other.dims.iter().copied())),
        )
    }

    /// Register with the listed sites removed.
    pub fn without(&self, sites: &[usize]) -> Register {
        Register::new(
            (0..self.len())
                .filter(|i| !sites.contains(i))
                .map(|i| (self.labels[i].clone(), self.dims[i])),
        )
        .expect("sub-register of a valid register")
    }

    pub(crate) fn check_sites(&self, sites: &[usize]) -> Result<usize, SimError> {
        let mut local = 1;
        for (i, &s) in sites.iter().enumerate() {
            if s >= self.len() {
                return Err(SimError::UnknownSite(format!("#{s}")));
            }
            if sites[..i].contains(&s) {
                return Err(SimError::SiteCollision(s));
            }
            local *= self.dims[s];
        }
        Ok(local)
    }

    /// Offsets of every local basis state of `sites` (first site most
    /// significant) relative to a base index whose digits there are zero.
    pub(crate) fn local_offsets(&self, sites: &[usize]) -> Vec<usize> {
        let mut offsets = vec![0usize];
        for &s in sites {
            let mut next = Vec::with_capacity(offsets.len() * self.dims[s]);
            for &o in &offsets {
                for d in 0..self.dims[s] {
                    next.push(o + d * self.strides[s]);
                }
            }
            offsets = next;
        }
        offsets
    }

    /// All indices whose digits on `sites` are zero, in increasing order.
    pub(crate) fn base_indices(&self, sites: &[usize]) -> Vec<usize> {
        let rest: Vec<usize> = (0..self.len()).filter(|i| !sites.contains(i)).collect();
        let mut bases = vec![0usize];
        for &s in &rest {
            let mut next = Vec::with_capacity(bases.len() * self.dims[s]);
            for &b in &bases {
                for d in 0..self.dims[s] {
                    next.push(b + d * self.strides[s]);
                }
            }
            bases = next;
        }
        bases.sort_unstable();
        bases
    }
}
