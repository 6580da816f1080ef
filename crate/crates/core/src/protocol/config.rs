use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::ProtocolError;
use crate::field::{smallest_valid_prime, PrimeModulus};
use crate::sharing::ThresholdConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// GHZ channel, X-basis controllers, (m, m) only.
    Ghz,
    /// Qudit codeword superposition with a sum phase.
    QuditPoly,
    /// Classical keys; the controllers hold no quantum system.
    Classical,
    /// One qubit per controller, measured in a private basis.
    EconQubit,
    /// As `EconQubit`, but agreeing controllers measure in the `±̃` basis.
    EconBob,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [Self::Ghz, Self::QuditPoly, Self::Classical, Self::EconQubit, Self::EconBob];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ghz => "ghz",
            Self::QuditPoly => "qudit-poly",
            Self::Classical => "classical",
            Self::EconQubit => "econ-qubit",
            Self::EconBob => "econ-bob",
        }
    }

    pub fn is_econ(self) -> bool {
        matches!(self, Self::EconQubit | Self::EconBob)
    }

    /// Whether Bob needs classical keys from the controllers.
    pub fn uses_keys(self) -> bool {
        !matches!(self, Self::Ghz)
    }

    pub fn has_controller_sites(self) -> bool {
        !matches!(self, Self::Classical)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ProtocolError::Parse(format!("unknown scheme `{s}`")))
    }
}

/// Who votes to let Bob finish.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AgreeSpec {
    /// Explicit 1-based controller indices.
    Explicit(BTreeSet<usize>),
    /// A uniformly random subset of this size, drawn per run.
    Random(usize),
}

impl AgreeSpec {
    pub fn all(m: usize) -> Self {
        Self::Explicit((1..=m).collect())
    }

    pub fn size(&self) -> usize {
        match self {
            Self::Explicit(set) => set.len(),
            Self::Random(t) => *t,
        }
    }
}

impl fmt::Display for AgreeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Explicit(set) => f.write_str(&join(set.iter())),
            Self::Random(t) => write!(f, "random:{t}"),
        }
    }
}

impl FromStr for AgreeSpec {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(t) = s.strip_prefix("random:") {
            return Ok(Self::Random(parse_usize(t)?));
        }
        Ok(Self::Explicit(parse_index_set(s)?))
    }
}

impl TryFrom<String> for AgreeSpec {
    type Error = ProtocolError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<AgreeSpec> for String {
    fn from(a: AgreeSpec) -> Self {
        a.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ScenarioKind {
    #[default]
    Honest,
    /// Bob holds these controllers' keys before the protocol starts.
    BobStealsKeys(BTreeSet<usize>),
    /// These controllers measure and report before the vote opens.
    ScheduleViolation(BTreeSet<usize>),
    /// This controller reports the opposite measurement outcome.
    WrongOutcome(usize),
    /// This controller reports `c_s + 1`.
    WrongKey(usize),
}

impl ScenarioKind {
    fn indices(&self) -> Vec<usize> {
        match self {
            Self::Honest => vec![],
            Self::BobStealsKeys(s) | Self::ScheduleViolation(s) => s.iter().copied().collect(),
            Self::WrongOutcome(s) | Self::WrongKey(s) => vec![*s],
        }
    }

    pub fn stolen(&self) -> BTreeSet<usize> {
        match self {
            Self::BobStealsKeys(s) => s.clone(),
            _ => BTreeSet::new(),
        }
    }

    pub fn friendly(&self) -> BTreeSet<usize> {
        match self {
            Self::ScheduleViolation(s) => s.clone(),
            _ => BTreeSet::new(),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Honest => f.write_str("honest"),
            Self::BobStealsKeys(s) => write!(f, "steal:{}", join(s.iter())),
            Self::ScheduleViolation(s) => write!(f, "schedule:{}", join(s.iter())),
            Self::WrongOutcome(s) => write!(f, "wrong-outcome:{s}"),
            Self::WrongKey(s) => write!(f, "wrong-key:{s}"),
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "honest" {
            return Ok(Self::Honest);
        }
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| ProtocolError::Parse(format!("unknown scenario `{s}`")))?;
        match kind {
            "steal" => Ok(Self::BobStealsKeys(parse_index_set(arg)?)),
            "schedule" => Ok(Self::ScheduleViolation(parse_index_set(arg)?)),
            "wrong-outcome" => Ok(Self::WrongOutcome(parse_usize(arg)?)),
            "wrong-key" => Ok(Self::WrongKey(parse_usize(arg)?)),
            _ => Err(ProtocolError::Parse(format!("unknown scenario `{kind}`"))),
        }
    }
}

impl TryFrom<String> for ScenarioKind {
    type Error = ProtocolError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ScenarioKind> for String {
    fn from(s: ScenarioKind) -> Self {
        s.to_string()
    }
}

/// Alice's `n`-qubit input.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputSpec {
    /// Gaussian random state drawn from the run's stream.
    #[default]
    Random,
    /// `2^n` amplitudes, big-endian over `A'1 ... A'n`.
    Amplitudes(Vec<Complex64>),
}

/// How the dealer picks each controller's private qubit basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisChoice {
    #[default]
    Haar,
    Computational,
}

/// Deliberate defects for mutation checks of the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    #[default]
    None,
    /// Bob skips every controller-dependent phase correction.
    SkipPhaseRecovery,
}

impl Fault {
    fn is_none(&self) -> bool {
        *self == Fault::None
    }
}

/// One protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// Field size; defaults to the smallest prime `>= m`. Also the qudit
    /// dimension of the qudit-poly scheme.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    pub agree: AgreeSpec,
    /// Channel `l in 1..=n` of each controller. Defaults to channel `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<usize>>,
    #[serde(default)]
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub input: InputSpec,
    #[serde(default)]
    pub bases: BasisChoice,
    /// Fixed secret `x` instead of a random one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Fault::is_none")]
    pub fault: Fault,
}

impl RunConfig {
    /// Honest run with every controller agreeing.
    pub fn new(scheme: SchemeKind, n: usize, m: usize, k: usize) -> Self {
        Self {
            scheme,
            n,
            m,
            k,
            p: None,
            agree: AgreeSpec::all(m),
            channels: None,
            scenario: ScenarioKind::Honest,
            seed: 0,
            input: InputSpec::Random,
            bases: BasisChoice::Haar,
            secret: None,
            fault: Fault::None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_agree(mut self, agree: AgreeSpec) -> Self {
        self.agree = agree;
        self
    }

    pub fn with_scenario(mut self, scenario: ScenarioKind) -> Self {
        self.scenario = scenario;
        self
    }

    pub fn with_p(mut self, p: u64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_input(mut self, input: InputSpec) -> Self {
        self.input = input;
        self
    }

    pub fn modulus(&self) -> Result<PrimeModulus, ProtocolError> {
        match self.p {
            Some(p) => PrimeModulus::new(p).map_err(|e| ProtocolError::Validation(e.to_string())),
            None => Ok(smallest_valid_prime(self.m)),
        }
    }

    /// Controller channel assignment, 1-based, one entry per controller.
    pub fn channel_map(&self) -> Vec<usize> {
        self.channels.clone().unwrap_or_else(|| vec![self.n; self.m])
    }

    pub fn threshold(&self) -> Result<ThresholdConfig, ProtocolError> {
        Ok(ThresholdConfig::vandermonde(self.k, self.m, Some(self.modulus()?))?)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |msg: String| Err(ProtocolError::Validation(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        if self.k == 0 || self.k > self.m {
            return bad(format!("k = {} must satisfy 1 <= k <= m = {}", self.k, self.m));
        }
        if self.scheme == SchemeKind::Ghz && self.k != self.m {
            return bad(format!("ghz requires k = m, got k = {} and m = {}", self.k, self.m));
        }
        let p = self.modulus()?;
        if !p.admits_controllers(self.m) {
            return bad(format!("p = {} must be at least m = {}", p.get(), self.m));
        }
        match &self.agree {
            AgreeSpec::Explicit(set) => self.check_indices("agree set", set.iter().copied())?,
            AgreeSpec::Random(t) if *t > self.m => return bad(format!("random:{t} exceeds m = {}", self.m)),
            AgreeSpec::Random(_) => {}
        }
        if let Some(ch) = &self.channels {
            if ch.len() != self.m {
                return bad(format!("channel assignment has {} entries, expected m = {}", ch.len(), self.m));
            }
            if let Some(l) = ch.iter().find(|&&l| l == 0 || l > self.n) {
                return bad(format!("channel {l} outside 1..={}", self.n));
            }
            if self.scheme != SchemeKind::EconBob && ch.iter().any(|&l| l != self.n) {
                return bad(format!("{} places every controller on channel n", self.scheme));
            }
        }
        self.check_indices("scenario", self.scenario.indices().into_iter())?;
        match (&self.scenario, self.scheme) {
            (ScenarioKind::BobStealsKeys(_), SchemeKind::Ghz | SchemeKind::QuditPoly) => {
                return bad(format!("{} distributes no classical keys to steal", self.scheme))
            }
            (ScenarioKind::WrongKey(_), SchemeKind::Ghz) => return bad("ghz controllers hold no keys".into()),
            (ScenarioKind::WrongOutcome(_), SchemeKind::Classical) => {
                return bad("classical controllers report no outcomes".into())
            }
            (ScenarioKind::WrongKey(s), _) => {
                if let AgreeSpec::Explicit(set) = &self.agree {
                    if !set.contains(s) && !self.scenario.friendly().contains(s) {
                        return bad(format!("wrong-key liar {s} never reports a key"));
                    }
                }
            }
            _ => {}
        }
        if let InputSpec::Amplitudes(a) = &self.input {
            let want = 1usize.checked_shl(self.n as u32).unwrap_or(usize::MAX);
            if a.len() != want {
                return bad(format!("input has {} amplitudes, expected 2^n = {want}", a.len()));
            }
            let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-9 {
                return bad(format!("input norm^2 is {norm}, expected 1"));
            }
        }
        if let Some(x) = &self.secret {
            if x.len() != self.k {
                return bad(format!("secret has {} entries, expected k = {}", x.len(), self.k));
            }
            if x.iter().any(|&v| v >= p.get()) {
                return bad(format!("secret entries must lie in 0..{}", p.get()));
            }
        }
        Ok(())
    }

    fn check_indices(&self, what: &str, mut it: impl Iterator<Item = usize>) -> Result<(), ProtocolError> {
        match it.find(|&s| s == 0 || s > self.m) {
            Some(s) => Err(ProtocolError::Validation(format!("{what}: controller {s} outside 1..={}", self.m))),
            None => Ok(()),
        }
    }
}

fn join<'a>(it: impl Iterator<Item = &'a usize>) -> String {
    it.map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_usize(s: &str) -> Result<usize, ProtocolError> {
    s.trim().parse().map_err(|_| ProtocolError::Parse(format!("expected a non-negative integer, got `{s}`")))
}

fn parse_index_set(s: &str) -> Result<BTreeSet<usize>, ProtocolError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(BTreeSet::new());
    }
    let mut out = BTreeSet::new();
    for part in s.split(',') {
        let v = parse_usize(part)?;
        if !out.insert(v) {
            return Err(ProtocolError::Parse(format!("index {v} listed twice")));
        }
    }
    Ok(out)
}
