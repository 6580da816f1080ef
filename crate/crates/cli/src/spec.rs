use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use ctqt_core::protocol::{AgreeSpec, BasisChoice, RunConfig, ScenarioKind, SchemeKind};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by batch runs. Every field is optional so that a config file
/// can supply it; flags win over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// ghz | qudit-poly | classical | econ-qubit | econ-bob
    #[arg(long)]
    pub scheme: Option<String>,
    /// Qubits teleported.
    #[arg(long)]
    pub n: Option<usize>,
    /// Controllers.
    #[arg(long)]
    pub m: Option<usize>,
    /// Threshold.
    #[arg(long)]
    pub k: Option<usize>,
    /// Field size; defaults to the smallest prime >= m.
    #[arg(long)]
    pub p: Option<u64>,
    /// Comma list of agreeing controllers, or `random:t`.
    #[arg(long)]
    pub agree: Option<String>,
    /// honest | steal:S | schedule:S | wrong-outcome:s | wrong-key:s
    #[arg(long)]
    pub scenario: Option<String>,
    /// Comma list with the channel of each controller (econ-bob).
    #[arg(long)]
    pub channels: Option<String>,
    /// haar | computational
    #[arg(long)]
    pub bases: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed; per-trial seeds are derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Include per-run records with transcripts.
    #[arg(long)]
    pub full_transcript: bool,
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print per-template summaries to stderr; repeat for more detail.
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

/// One `[[template]]` of an experiment file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    scheme: Option<String>,
    n: Option<usize>,
    m: Option<usize>,
    k: Option<usize>,
    p: Option<u64>,
    agree: Option<String>,
    scenario: Option<String>,
    channels: Option<Vec<usize>>,
    bases: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    trials: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    full_transcript: Option<bool>,
    verbosity: Option<u8>,
    #[serde(default)]
    template: Vec<TemplateFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub templates: Vec<RunConfig>,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub full_transcript: bool,
    pub verbosity: u8,
}

fn flag_error(flag: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("--{flag}: {e}"))
}

fn parse_list(flag: &str, s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',').map(|v| v.trim().parse().map_err(|e| flag_error(flag, format!("`{v}`: {e}")))).collect()
}

fn parse_bases(flag: &str, s: &str) -> Result<BasisChoice, CliError> {
    match s {
        "haar" => Ok(BasisChoice::Haar),
        "computational" => Ok(BasisChoice::Computational),
        other => Err(flag_error(flag, format!("unknown basis choice `{other}`"))),
    }
}

fn build(t: TemplateFile, origin: &str) -> Result<RunConfig, CliError> {
    let scheme: SchemeKind = match &t.scheme {
        Some(s) => s.parse().map_err(|e| flag_error(&format!("{origin}scheme"), e))?,
        None => SchemeKind::EconQubit,
    };
    let m = t.m.unwrap_or(3);
    let mut cfg = RunConfig::new(scheme, t.n.unwrap_or(1), m, t.k.unwrap_or(2.min(m)));
    cfg.p = t.p;
    if let Some(a) = &t.agree {
        cfg.agree = a.parse::<AgreeSpec>().map_err(|e| flag_error(&format!("{origin}agree"), e))?;
    }
    if let Some(s) = &t.scenario {
        cfg.scenario = s.parse::<ScenarioKind>().map_err(|e| flag_error(&format!("{origin}scenario"), e))?;
    }
    cfg.channels = t.channels;
    if let Some(b) = &t.bases {
        cfg.bases = parse_bases(&format!("{origin}bases"), b)?;
    }
    Ok(cfg)
}

fn overlay(mut t: TemplateFile, a: &RunArgs) -> Result<TemplateFile, CliError> {
    macro_rules! take {
        ($($f:ident),*) => { $( if a.$f.is_some() { t.$f = a.$f.clone(); } )* };
    }
    take!(scheme, n, m, k, p, agree, scenario, bases);
    if let Some(ch) = &a.channels {
        t.channels = Some(parse_list("channels", ch)?);
    }
    Ok(t)
}

/// Reads the optional experiment file, applies flag overrides and validates
/// every template.
pub fn parse_config(args: &RunArgs) -> Result<ExperimentSpec, CliError> {
    let file = match &args.config {
        Some(path) => read_file(path)?,
        None => ExperimentFile::default(),
    };
    let mut raw = file.template;
    if raw.is_empty() {
        raw.push(TemplateFile::default());
    }
    let mut templates: Vec<RunConfig> = raw
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let origin = if args.config.is_some() { format!("template[{i}].") } else { String::new() };
            build(overlay(t, args)?, &origin)
        })
        .collect::<Result<Vec<_>, _>>()?;
    for (i, cfg) in templates.iter_mut().enumerate() {
        let invalid = |e: ctqt_core::protocol::ProtocolError| CliError::Validation(format!("template {i}: {e}"));
        cfg.validate().map_err(invalid)?;
        cfg.p = Some(cfg.modulus().map_err(invalid)?.get());
    }
    let trials = args.trials.or(file.trials).unwrap_or(1);
    if trials == 0 {
        return Err(CliError::Validation("trials must be at least 1".into()));
    }
    Ok(ExperimentSpec {
        templates,
        trials,
        seed: args.seed.or(file.seed).unwrap_or(0),
        out: args.out.clone().or(file.out),
        format: args.format.or(file.format).unwrap_or_default(),
        full_transcript: args.full_transcript || file.full_transcript.unwrap_or(false),
        verbosity: args.verbose.max(file.verbosity.unwrap_or(0)),
    })
}

fn read_file(path: &Path) -> Result<ExperimentFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}
