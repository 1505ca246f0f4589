//! Simulation settings: command-line flags override a TOML file, which
//! overrides built-in defaults.

use std::path::{Path, PathBuf};

use qcldpc::{DecoderConfig, StoppingRule};
use serde::{Deserialize, Serialize};

use crate::args::SimulateArgs;
use crate::error::{CliError, CliResult};

/// One settings layer. Every field is optional so layers can be merged.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin_3x8: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub llr_clip: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_frame_errors: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_log_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

pub fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("`{t}` in --p-grid is not a number")))
        })
        .collect()
}

impl SimSettings {
    pub fn from_args(args: &SimulateArgs) -> CliResult<Self> {
        Ok(Self {
            builtin_3x8: args.source.builtin_3x8.then_some(true),
            pair: args.source.pair.clone(),
            p: args.p,
            p_grid: args.p_grid.as_deref().map(parse_grid).transpose()?,
            seed: args.seed,
            max_iters: args.max_iters,
            llr_clip: args.llr_clip,
            damping: args.damping,
            min_frame_errors: args.min_frame_errors,
            max_trials: args.max_trials,
            failure_log_cap: args.failure_log_cap,
            threads: args.threads,
            out: args.out.clone(),
        })
    }

    /// Reads a settings file. A manifest written by `simulate` is accepted
    /// too: its `[config]` table is used.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut table: toml::Table = text
            .parse()
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let table = match table.remove("config") {
            Some(toml::Value::Table(inner)) => inner,
            Some(_) => {
                return Err(CliError::Validation(format!(
                    "{}: `config` must be a table",
                    path.display()
                )))
            }
            None => table,
        };
        table
            .try_into()
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    /// Fields of `self` win; gaps are filled from `lower`.
    pub fn over(self, lower: SimSettings) -> SimSettings {
        // a code source in the upper layer replaces the lower one entirely
        let (builtin_3x8, pair) = if self.builtin_3x8 == Some(true) || self.pair.is_some() {
            (self.builtin_3x8, self.pair)
        } else {
            (lower.builtin_3x8, lower.pair)
        };
        SimSettings {
            builtin_3x8,
            pair,
            p: self.p.or(lower.p),
            p_grid: self.p_grid.or(lower.p_grid),
            seed: self.seed.or(lower.seed),
            max_iters: self.max_iters.or(lower.max_iters),
            llr_clip: self.llr_clip.or(lower.llr_clip),
            damping: self.damping.or(lower.damping),
            min_frame_errors: self.min_frame_errors.or(lower.min_frame_errors),
            max_trials: self.max_trials.or(lower.max_trials),
            failure_log_cap: self.failure_log_cap.or(lower.failure_log_cap),
            threads: self.threads.or(lower.threads),
            out: self.out.or(lower.out),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CodeChoice {
    Builtin3x8,
    PairFile(PathBuf),
}

/// Fully specified simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub code: CodeChoice,
    pub circulant: usize,
    pub p_grid: Vec<f64>,
    pub seed: u64,
    pub decoder: DecoderConfig,
    pub stop: StoppingRule,
    pub failure_log_cap: usize,
    pub threads: Option<usize>,
    pub out: PathBuf,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_FAILURE_LOG_CAP: usize = 1000;

impl RunConfig {
    pub fn resolve(settings: SimSettings) -> CliResult<Self> {
        let code = match (settings.builtin_3x8, settings.pair) {
            (Some(true), Some(_)) => {
                return Err(CliError::Usage("choose one of --builtin-3x8 and --pair".into()))
            }
            (Some(true), None) => CodeChoice::Builtin3x8,
            (_, Some(path)) => CodeChoice::PairFile(path),
            _ => {
                return Err(CliError::Usage(
                    "a code source (--builtin-3x8 or --pair) is required".into(),
                ))
            }
        };
        let circulant = settings
            .p
            .ok_or_else(|| CliError::Usage("--p is required".into()))?;
        let p_grid = settings
            .p_grid
            .ok_or_else(|| CliError::Usage("--p-grid is required".into()))?;
        qcldpc::sim::validate_grid(&p_grid)?;
        let defaults = DecoderConfig::default();
        let decoder = DecoderConfig {
            max_iterations: settings.max_iters.unwrap_or(defaults.max_iterations),
            llr_clip: settings.llr_clip.unwrap_or(defaults.llr_clip),
            damping: settings.damping.unwrap_or(defaults.damping),
        };
        decoder.validate()?;
        let stop_defaults = StoppingRule::default();
        let stop = StoppingRule {
            min_frame_errors: settings
                .min_frame_errors
                .unwrap_or(stop_defaults.min_frame_errors),
            max_trials: settings.max_trials.unwrap_or(stop_defaults.max_trials),
        };
        stop.validate()?;
        if settings.threads == Some(0) {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        Ok(Self {
            code,
            circulant,
            p_grid,
            seed: settings.seed.unwrap_or(DEFAULT_SEED),
            decoder,
            stop,
            failure_log_cap: settings.failure_log_cap.unwrap_or(DEFAULT_FAILURE_LOG_CAP),
            threads: settings.threads,
            out: settings.out.unwrap_or_else(|| PathBuf::from("run")),
        })
    }

    /// Settings layer that reproduces this run when loaded back.
    pub fn to_settings(&self) -> SimSettings {
        let (builtin_3x8, pair) = match &self.code {
            CodeChoice::Builtin3x8 => (Some(true), None),
            CodeChoice::PairFile(p) => (None, Some(p.clone())),
        };
        SimSettings {
            builtin_3x8,
            pair,
            p: Some(self.circulant),
            p_grid: Some(self.p_grid.clone()),
            seed: Some(self.seed),
            max_iters: Some(self.decoder.max_iterations),
            llr_clip: Some(self.decoder.llr_clip),
            damping: Some(self.decoder.damping),
            min_frame_errors: Some(self.stop.min_frame_errors),
            max_trials: Some(self.stop.max_trials),
            failure_log_cap: Some(self.failure_log_cap),
            threads: self.threads,
            out: Some(self.out.clone()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub code_length: usize,
    pub design_rate: String,
    pub hashing_bound_p: f64,
    pub config: SimSettings,
}
