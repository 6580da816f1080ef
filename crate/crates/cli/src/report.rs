use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use ctqt_core::protocol::{
    expected_controller_recovery_ops, coarse_estimate, run_protocol, AbortReason, RunConfig, RunResult, SchemeKind,
};
use ctqt_core::RunRng;

use crate::spec::{ExperimentSpec, Format};
use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AbortCounts {
    pub insufficient_agreement: usize,
    pub solicit_cap_exceeded: usize,
    pub inconsistent_shares: usize,
}

/// Batch statistics. Variances are population variances over all trials.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: usize,
    pub mean_fidelity: f64,
    pub fidelity_var: f64,
    pub success_rate: f64,
    pub mean_guess_fidelity: Option<f64>,
    pub prep_single_ops: f64,
    pub prep_two_ops: f64,
    pub bob_alice_ops: f64,
    pub bob_alice_ops_var: f64,
    pub bob_controller_ops_mean: f64,
    pub bob_controller_ops_var: f64,
    pub solicits_mean: f64,
    pub solicits_var: f64,
    pub aborts: usize,
    pub abort_reasons: AbortCounts,
    pub schedule_violations: usize,
    /// Mean of the exact per-run expectation of controller-dependent gates
    /// (econ-bob only; aborted runs contribute 0).
    pub expected_controller_ops: Option<f64>,
    /// `m - t/2` (econ-bob only).
    pub coarse_estimate: Option<f64>,
}

/// One trial. The transcript is carried by the flattened result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub trial: usize,
    pub expected_controller_ops: Option<f64>,
    #[serde(flatten)]
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateResult {
    pub config: RunConfig,
    pub seed: u64,
    pub aggregates: Aggregates,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<Vec<RunRecord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub seed: u64,
    pub trials: usize,
    pub results: Vec<TemplateResult>,
}

fn mean_var(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

fn expected_for(cfg: &RunConfig, r: &RunResult) -> Result<Option<f64>, CliError> {
    if cfg.scheme != SchemeKind::EconBob {
        return Ok(None);
    }
    if r.abort.is_some() {
        return Ok(Some(0.0));
    }
    expected_controller_recovery_ops(cfg, &r.dealer.keys, &r.dealer.agree)
        .map(Some)
        .map_err(|e| CliError::Runtime(e.to_string()))
}

/// Aggregates computed from per-run records in trial order.
pub fn aggregate(cfg: &RunConfig, runs: &[RunRecord]) -> Aggregates {
    let res = || runs.iter().map(|r| &r.result);
    let metric = |f: fn(&RunResult) -> usize| mean_var(res().map(move |r| f(r) as f64));
    let (mean_fidelity, fidelity_var) = mean_var(res().map(|r| r.fidelity));
    let (bob_alice_ops, bob_alice_ops_var) = metric(|r| r.metrics.bob_alice_recovery_ops);
    let (bob_controller_ops_mean, bob_controller_ops_var) = metric(|r| r.metrics.bob_controller_recovery_ops);
    let (solicits_mean, solicits_var) = metric(|r| r.metrics.solicits_sent);
    let guesses: Vec<f64> = res().filter_map(|r| r.guess_fidelity).collect();
    let mut abort_reasons = AbortCounts::default();
    for r in res() {
        match r.abort {
            Some(AbortReason::InsufficientAgreement { .. }) => abort_reasons.insufficient_agreement += 1,
            Some(AbortReason::SolicitCapExceeded { .. }) => abort_reasons.solicit_cap_exceeded += 1,
            Some(AbortReason::InconsistentShares) => abort_reasons.inconsistent_shares += 1,
            None => {}
        }
    }
    let econ_bob = cfg.scheme == SchemeKind::EconBob;
    Aggregates {
        trials: runs.len(),
        mean_fidelity,
        fidelity_var,
        success_rate: res().filter(|r| r.success).count() as f64 / runs.len().max(1) as f64,
        mean_guess_fidelity: (!guesses.is_empty()).then(|| mean_var(guesses.iter().copied()).0),
        prep_single_ops: metric(|r| r.metrics.prep_single_qubit_ops).0,
        prep_two_ops: metric(|r| r.metrics.prep_two_qubit_ops).0,
        bob_alice_ops,
        bob_alice_ops_var,
        bob_controller_ops_mean,
        bob_controller_ops_var,
        solicits_mean,
        solicits_var,
        aborts: res().filter(|r| r.abort.is_some()).count(),
        abort_reasons,
        schedule_violations: res().filter(|r| r.flags.schedule_violation).count(),
        expected_controller_ops: econ_bob
            .then(|| mean_var(runs.iter().map(|r| r.expected_controller_ops.unwrap_or(0.0))).0),
        coarse_estimate: econ_bob.then(|| coarse_estimate(cfg.m, cfg.agree.size())),
    }
}

fn run_template(cfg: &RunConfig, seed: u64, trials: usize, keep_runs: bool) -> Result<TemplateResult, CliError> {
    let runs: Vec<RunRecord> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut result = run_protocol(&cfg.clone().with_seed(RunRng::trial_seed(seed, trial as u64)))
                .map_err(|e| CliError::Runtime(format!("trial {trial}: {e}")))?;
            if !keep_runs {
                result.transcript.events.clear();
            }
            let expected_controller_ops = expected_for(cfg, &result)?;
            Ok(RunRecord { trial, expected_controller_ops, result })
        })
        .collect::<Result<_, CliError>>()?;
    Ok(TemplateResult {
        config: cfg.clone().with_seed(seed),
        seed,
        aggregates: aggregate(cfg, &runs),
        runs: keep_runs.then_some(runs),
    })
}

/// Runs every template for `spec.trials` trials. Trial `i` of template `j`
/// uses seed `trial_seed(trial_seed(spec.seed, j), i)`, so reports do not
/// depend on thread scheduling.
pub fn run_experiments(spec: &ExperimentSpec) -> Result<Report, CliError> {
    let results = spec
        .templates
        .iter()
        .enumerate()
        .map(|(j, cfg)| {
            let t = run_template(cfg, RunRng::trial_seed(spec.seed, j as u64), spec.trials, spec.full_transcript)?;
            if spec.verbosity > 0 {
                let a = &t.aggregates;
                eprintln!(
                    "template {j}: {} (n,m,k)=({},{},{}) success {:.4} fidelity {:.6} aborts {}",
                    cfg.scheme, cfg.n, cfg.m, cfg.k, a.success_rate, a.mean_fidelity, a.aborts
                );
            }
            if spec.verbosity > 1 {
                eprintln!("  {:?}", t.aggregates);
            }
            Ok(t)
        })
        .collect::<Result<_, CliError>>()?;
    Ok(Report {
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        seed: spec.seed,
        trials: spec.trials,
        results,
    })
}

/// CSV column names, one row per template.
pub const CSV_HEADER: &[&str] = &[
    "seed",
    "scheme",
    "n",
    "m",
    "k",
    "p",
    "agree",
    "scenario",
    "trials",
    "mean_fidelity",
    "fidelity_var",
    "success_rate",
    "mean_guess_fidelity",
    "prep_single_ops",
    "prep_two_ops",
    "bob_alice_ops",
    "bob_alice_ops_var",
    "bob_controller_ops_mean",
    "bob_controller_ops_var",
    "solicits_mean",
    "solicits_var",
    "aborts",
    "aborts_insufficient_agreement",
    "aborts_solicit_cap_exceeded",
    "aborts_inconsistent_shares",
    "schedule_violations",
    "expected_controller_ops",
    "coarse_estimate",
];

/// Shortest round-trip representation.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_row(t: &TemplateResult) -> Vec<String> {
    let (c, a) = (&t.config, &t.aggregates);
    let p = c.modulus().map(|p| p.get().to_string()).unwrap_or_default();
    vec![
        t.seed.to_string(),
        c.scheme.to_string(),
        c.n.to_string(),
        c.m.to_string(),
        c.k.to_string(),
        p,
        c.agree.to_string(),
        c.scenario.to_string(),
        a.trials.to_string(),
        num(a.mean_fidelity),
        num(a.fidelity_var),
        num(a.success_rate),
        opt(a.mean_guess_fidelity),
        num(a.prep_single_ops),
        num(a.prep_two_ops),
        num(a.bob_alice_ops),
        num(a.bob_alice_ops_var),
        num(a.bob_controller_ops_mean),
        num(a.bob_controller_ops_var),
        num(a.solicits_mean),
        num(a.solicits_var),
        a.aborts.to_string(),
        a.abort_reasons.insufficient_agreement.to_string(),
        a.abort_reasons.solicit_cap_exceeded.to_string(),
        a.abort_reasons.inconsistent_shares.to_string(),
        a.schedule_violations.to_string(),
        opt(a.expected_controller_ops),
        opt(a.coarse_estimate),
    ]
}

pub fn to_csv(report: &Report) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for t in &report.results {
        w.write_record(csv_row(t)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn to_json(report: &Report) -> Result<String, CliError> {
    serde_json::to_string_pretty(report).map_err(|e| CliError::Runtime(e.to_string()))
}

/// Writes the report to `out`, or to stdout when `out` is `None`.
pub fn write_report(report: &Report, format: Format, out: Option<&std::path::Path>) -> Result<(), CliError> {
    let mut text = match format {
        Format::Json => to_json(report)?,
        Format::Csv => to_csv(report)?,
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}
