use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{MeasureBasis, Operator, Real, Register, SimError, C};

/// How one site of a product state starts out.
#[derive(Debug, Clone, PartialEq)]
pub enum SiteInit<T> {
    /// Computational basis state `|index>`.
    Index(usize),
    /// Explicit unit vector in computational coordinates.
    Vector(Vec<C<T>>),
}

/// Outcome of one projective measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub sites: Vec<String>,
    pub basis: String,
    pub outcome: usize,
    /// Born probabilities of every outcome just before the measurement.
    pub distribution: Vec<f64>,
}

/// Pure state of a [`Register`].
#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    register: Register,
    amps: Vec<C<T>>,
}

impl<T: Real> State<T> {
    /// `|0...0>`.
    pub fn zero(register: Register) -> Self {
        let mut amps = vec![C::zero(); register.total_dim()];
        amps[0] = C::new(T::one(), T::zero());
        Self { register, amps }
    }

    pub fn product(register: Register, inits: &[SiteInit<T>]) -> Result<Self, SimError> {
        if inits.len() != register.len() {
            return Err(SimError::BadDimension(format!(
                "{} site initialisers for {} sites",
                inits.len(),
                register.len()
            )));
        }
        let mut amps = vec![C::new(T::one(), T::zero())];
        for (site, init) in inits.iter().enumerate() {
            let d = register.dim(site);
            let local = match init {
                SiteInit::Index(i) if *i < d => {
                    let mut v = vec![C::zero(); d];
                    v[*i] = C::new(T::one(), T::zero());
                    v
                }
                SiteInit::Index(i) => {
                    return Err(SimError::BadDimension(format!("index {i} on a {d}-level site")));
                }
                SiteInit::Vector(v) if v.len() == d => {
                    let n: T = v.iter().map(|a| a.norm_sqr()).fold(T::zero(), |a, b| a + b);
                    if (n - T::one()).abs() > T::tolerance() {
                        return Err(SimError::NotNormalised(n.to_f64().unwrap_or(f64::NAN)));
                    }
                    v.clone()
                }
                SiteInit::Vector(v) => {
                    return Err(SimError::BadDimension(format!("{}-vector on a {d}-level site", v.len())));
                }
            };
            amps = amps.iter().flat_map(|&a| local.iter().map(move |&b| a * b)).collect();
        }
        Ok(Self { register, amps })
    }

    /// Checks the norm to 1e-9 and rescales exactly to one.
    pub fn from_amplitudes(register: Register, amps: Vec<C<T>>) -> Result<Self, SimError> {
        if amps.len() != register.total_dim() {
            return Err(SimError::BadDimension(format!(
                "{} amplitudes for dimension {}",
                amps.len(),
                register.total_dim()
            )));
        }
        let mut s = Self { register, amps };
        let n = s.norm_sqr();
        if (n - T::one()).abs() > T::lit(1e-9) {
            return Err(SimError::NotNormalised(n.to_f64().unwrap_or(f64::NAN)));
        }
        s.scale(T::one() / n.sqrt());
        Ok(s)
    }

    /// Normalised complex-Gaussian vector; draws real then imaginary part
    /// for each amplitude in index order.
    pub fn random<R: Rng + ?Sized>(register: Register, rng: &mut R) -> Self {
        let mut amps: Vec<C<T>> = (0..register.total_dim())
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C::new(T::lit(re), T::lit(im))
            })
            .collect();
        let n = amps.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr()).sqrt();
        amps.iter_mut().for_each(|a| *a = *a / n);
        Self { register, amps }
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Result<Self, SimError> {
        let register = self.register.concat(&other.register)?;
        let amps = self.amps.iter().flat_map(|&a| other.amps.iter().map(move |&b| a * b)).collect();
        Ok(Self { register, amps })
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn site(&self, label: &str) -> Result<usize, SimError> {
        self.register.index_of(label)
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    fn scale(&mut self, factor: T) {
        self.amps.iter_mut().for_each(|a| *a = a.scale(factor));
    }

    /// Applies a unitary on `sites` (first site most significant in the
    /// operator's local index).
    pub fn apply(&mut self, sites: &[usize], op: &Operator<T>) -> Result<(), SimError> {
        let local = self.register.check_sites(sites)?;
        if op.dim() != local {
            return Err(SimError::BadDimension(format!(
                "operator of dimension {} on sites of local dimension {local}",
                op.dim()
            )));
        }
        op.check_unitary()?;
        let offsets = self.register.local_offsets(sites);
        let bases = self.register.base_indices(sites);
        if op.is_diagonal() {
            let diag: Vec<C<T>> = (0..local).map(|i| op.get(i, i)).collect();
            for &b in &bases {
                for (o, d) in offsets.iter().zip(&diag) {
                    self.amps[b + o] = self.amps[b + o] * d;
                }
            }
            return Ok(());
        }
        let mut buf = vec![C::zero(); local];
        for &b in &bases {
            for (slot, o) in buf.iter_mut().zip(&offsets) {
                *slot = self.amps[b + o];
            }
            let out = op.apply_to(&buf);
            for (v, o) in out.into_iter().zip(&offsets) {
                self.amps[b + o] = v;
            }
        }
        Ok(())
    }

    pub fn apply_single(&mut self, site: usize, op: &Operator<T>) -> Result<(), SimError> {
        self.apply(&[site], op)
    }

    pub fn apply_two(&mut self, first: usize, second: usize, op: &Operator<T>) -> Result<(), SimError> {
        self.apply(&[first, second], op)
    }

    /// `⟨v_o| ψ_rest⟩` for every base index, where `v_o` is column `o`.
    fn projections(&self, sites: &[usize], columns: &Operator<T>, outcome: usize) -> Vec<C<T>> {
        self.project(sites, &columns.column(outcome))
    }

    /// Partial inner product of `vector` (on `sites`) with the state.
    fn project(&self, sites: &[usize], vector: &[C<T>]) -> Vec<C<T>> {
        let offsets = self.register.local_offsets(sites);
        let bra: Vec<C<T>> = vector.iter().map(|c| c.conj()).collect();
        self.register
            .base_indices(sites)
            .into_iter()
            .map(|b| offsets.iter().zip(&bra).fold(C::zero(), |acc, (o, v)| acc + *v * self.amps[b + o]))
            .collect()
    }

    fn probabilities(&self, sites: &[usize], columns: &Operator<T>) -> Vec<T> {
        (0..columns.dim())
            .map(|o| {
                self.projections(sites, columns, o)
                    .iter()
                    .fold(T::zero(), |acc, a| acc + a.norm_sqr())
            })
            .collect()
    }

    fn local_dims(&self, sites: &[usize]) -> Result<Vec<usize>, SimError> {
        self.register.check_sites(sites)?;
        Ok(sites.iter().map(|&s| self.register.dim(s)).collect())
    }

    /// Exact Born probabilities of measuring `sites` in `basis`; the state
    /// is left untouched.
    pub fn outcome_distribution(&self, sites: &[usize], basis: &MeasureBasis<T>) -> Result<Vec<T>, SimError> {
        let dims = self.local_dims(sites)?;
        let columns = basis.columns(sites, &dims)?;
        Ok(self.probabilities(sites, &columns))
    }

    fn sample<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let total: f64 = probs.iter().sum();
        let mut acc = 0.0;
        let mut last = 0;
        for (o, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p / total;
            last = o;
            if u < acc {
                return o;
            }
        }
        last
    }

    fn record(&self, sites: &[usize], basis: &MeasureBasis<T>, outcome: usize, probs: Vec<f64>) -> MeasurementRecord {
        MeasurementRecord {
            sites: sites.iter().map(|&s| self.register.label(s).to_string()).collect(),
            basis: basis.label(),
            outcome,
            distribution: probs,
        }
    }

    /// Samples one outcome (one uniform draw from `rng`), collapses and
    /// renormalises.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        sites: &[usize],
        basis: &MeasureBasis<T>,
        rng: &mut R,
    ) -> Result<MeasurementRecord, SimError> {
        let dims = self.local_dims(sites)?;
        let columns = basis.columns(sites, &dims)?;
        let probs: Vec<f64> = self.probabilities(sites, &columns).iter().map(|p| p.to_f64().unwrap()).collect();
        let outcome = Self::sample(&probs, rng);
        let proj = self.projections(sites, &columns, outcome);
        let norm = proj.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr()).sqrt();
        let vector = columns.column(outcome);
        let offsets = self.register.local_offsets(sites);
        for (b, a) in self.register.base_indices(sites).into_iter().zip(proj) {
            let a = a / norm;
            for (o, v) in offsets.iter().zip(&vector) {
                self.amps[b + o] = a * v;
            }
        }
        Ok(self.record(sites, basis, outcome, probs))
    }

    /// Like [`measure`](Self::measure) but drops the measured sites, which
    /// are left in a known product state, from the returned state.
    pub fn measure_and_discard<R: Rng + ?Sized>(
        &self,
        sites: &[usize],
        basis: &MeasureBasis<T>,
        rng: &mut R,
    ) -> Result<(MeasurementRecord, State<T>), SimError> {
        let dims = self.local_dims(sites)?;
        let columns = basis.columns(sites, &dims)?;
        let probs: Vec<f64> = self.probabilities(sites, &columns).iter().map(|p| p.to_f64().unwrap()).collect();
        let outcome = Self::sample(&probs, rng);
        let proj = self.projections(sites, &columns, outcome);
        let norm = proj.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr()).sqrt();
        let rest = State { register: self.register.without(sites), amps: proj.into_iter().map(|a| a / norm).collect() };
        Ok((self.record(sites, basis, outcome, probs), rest))
    }

    /// Bell measurement on two qubits; returns `(i, j)`.
    pub fn bell_project<R: Rng + ?Sized>(
        &mut self,
        first: usize,
        second: usize,
        rng: &mut R,
    ) -> Result<((usize, usize), MeasurementRecord), SimError> {
        let rec = self.measure(&[first, second], &MeasureBasis::Bell, rng)?;
        Ok(((rec.outcome >> 1, rec.outcome & 1), rec))
    }

    /// `⟨t| ρ_sites |t⟩` where `ρ_sites` is the reduced state of `sites` and
    /// `t` is a pure state on a register of matching dimensions.
    pub fn fidelity_on(&self, sites: &[usize], target: &State<T>) -> Result<T, SimError> {
        let dims = self.local_dims(sites)?;
        if dims != target.register.dims() {
            return Err(SimError::ShapeMismatch);
        }
        let proj = self.project(sites, &target.amps);
        Ok(proj.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr()))
    }
}

/// `|⟨a|b⟩|²`; insensitive to global phase.
pub fn fidelity<T: Real>(a: &State<T>, b: &State<T>) -> Result<T, SimError> {
    if a.register.dims() != b.register.dims() {
        return Err(SimError::ShapeMismatch);
    }
    let ip = a.amps.iter().zip(&b.amps).fold(C::zero(), |acc: C<T>, (x, y)| acc + x.conj() * y);
    Ok(ip.norm_sqr())
}
