//! Monte Carlo FER/BER estimation.
//!
//! Each trial samples an error, decodes its syndrome and classifies the
//! outcome modulo stabilizers. Trials are keyed by `(seed, point, trial)`
//! and aggregated in index order, so a [`PointResult`] does not depend on
//! the worker count.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{extract_syndrome, sample_error, trial_rng, PauliError};
use crate::code::QuantumQcCode;
use crate::decoder::{DecodeOutcome, DecoderConfig, JointBpDecoder};
use crate::error::{Error, Result};
use crate::gf2::RowSpace;

/// Standard normal quantile for a two-sided 95% interval.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub min_frame_errors: u64,
    pub max_trials: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            min_frame_errors: 100,
            max_trials: 1_000_000,
        }
    }
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        if self.min_frame_errors == 0 || self.max_trials == 0 {
            return Err(Error::invalid(
                "stopping rule needs min_frame_errors >= 1 and max_trials >= 1",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub converged: bool,
    pub success: bool,
    /// Qubits with `x_i != x̂_i` or `z_i != ẑ_i`; zero on success.
    pub bit_errors: usize,
    pub residual_weight_x: usize,
    pub residual_weight_z: usize,
    pub iterations: usize,
}

/// A failed trial as written to failure logs, one JSON object per line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub trial: u64,
    pub p_d: f64,
    pub bit_errors: usize,
    pub residual_weight_x: usize,
    pub residual_weight_z: usize,
    pub iterations: usize,
    pub residual_x: Vec<usize>,
    pub residual_z: Vec<usize>,
}

/// Decides decoding success modulo stabilizers: the residual `x̂ + x` must
/// lie in the row space of `H_X` and `ẑ + z` in that of `H_Z`.
#[derive(Clone, Debug)]
pub struct Classifier {
    x_stabilizers: RowSpace,
    z_stabilizers: RowSpace,
}

impl Classifier {
    pub fn new(code: &QuantumQcCode) -> Self {
        Self {
            x_stabilizers: RowSpace::new(code.h_x()),
            z_stabilizers: RowSpace::new(code.h_z()),
        }
    }

    pub fn residual(truth: &PauliError, outcome: &DecodeOutcome) -> Result<PauliError> {
        if truth.x.len() != outcome.x_hat.len() || truth.z.len() != outcome.z_hat.len() {
            return Err(Error::invalid("estimate and error lengths differ"));
        }
        Ok(PauliError {
            x: &truth.x ^ &outcome.x_hat,
            z: &truth.z ^ &outcome.z_hat,
        })
    }

    pub fn classify(
        &self,
        trial_index: u64,
        truth: &PauliError,
        outcome: &DecodeOutcome,
    ) -> Result<TrialRecord> {
        if truth.len() != self.x_stabilizers.cols() {
            return Err(Error::invalid(format!(
                "error length {} but code length {}",
                truth.len(),
                self.x_stabilizers.cols()
            )));
        }
        let residual = Self::residual(truth, outcome)?;
        let success =
            self.x_stabilizers.contains(&residual.x)? && self.z_stabilizers.contains(&residual.z)?;
        Ok(TrialRecord {
            trial_index,
            converged: outcome.converged,
            success,
            bit_errors: if success { 0 } else { residual.weight() },
            residual_weight_x: residual.x.weight(),
            residual_weight_z: residual.z.weight(),
            iterations: outcome.iterations,
        })
    }
}

pub fn classify(code: &QuantumQcCode, truth: &PauliError, outcome: &DecodeOutcome) -> Result<TrialRecord> {
    Classifier::new(code).classify(0, truth, outcome)
}

/// Wilson score interval for `successes / trials` at 95% confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (
        ((centre - half).max(0.0)).min(p),
        ((centre + half).min(1.0)).max(p),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub p_d: f64,
    pub n: usize,
    pub trials: u64,
    pub frame_errors: u64,
    pub total_bit_errors: u64,
    pub total_iterations: u64,
    pub fer: f64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Failure count per residual weight (bit-error metric).
    pub weight_histogram: BTreeMap<usize, u64>,
    /// Failure records, at most [`Simulator::failure_log_cap`] of them.
    pub failures: Vec<FailureRecord>,
}

impl PointResult {
    fn empty(p_d: f64, n: usize) -> Self {
        Self {
            p_d,
            n,
            trials: 0,
            frame_errors: 0,
            total_bit_errors: 0,
            total_iterations: 0,
            fer: 0.0,
            ber: 0.0,
            ci_low: 0.0,
            ci_high: 1.0,
            weight_histogram: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    fn finish(&mut self) {
        let trials = self.trials.max(1) as f64;
        self.fer = self.frame_errors as f64 / trials;
        self.ber = self.total_bit_errors as f64 / (trials * self.n as f64);
        let (lo, hi) = wilson_interval(self.frame_errors, self.trials);
        self.ci_low = lo;
        self.ci_high = hi;
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.total_iterations as f64 / self.trials as f64
        }
    }
}

struct TrialResult {
    record: TrialRecord,
    failure: Option<FailureRecord>,
}

/// Runs Monte Carlo points for one code and decoder configuration.
pub struct Simulator<'a> {
    code: &'a QuantumQcCode,
    classifier: Classifier,
    decoder_cfg: DecoderConfig,
    stop: StoppingRule,
    seed: u64,
    failure_log_cap: usize,
    pool: rayon::ThreadPool,
}

impl<'a> Simulator<'a> {
    /// `threads = None` uses the machine's parallelism.
    pub fn new(
        code: &'a QuantumQcCode,
        decoder_cfg: DecoderConfig,
        stop: StoppingRule,
        seed: u64,
        threads: Option<usize>,
    ) -> Result<Self> {
        decoder_cfg.validate()?;
        stop.validate()?;
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            if t == 0 {
                return Err(Error::invalid("thread count must be at least 1"));
            }
            builder = builder.num_threads(t);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::invalid(format!("cannot build worker pool: {e}")))?;
        Ok(Self {
            code,
            classifier: Classifier::new(code),
            decoder_cfg,
            stop,
            seed,
            failure_log_cap: 1000,
            pool,
        })
    }

    pub fn with_failure_log_cap(mut self, cap: usize) -> Self {
        self.failure_log_cap = cap;
        self
    }

    pub fn failure_log_cap(&self) -> usize {
        self.failure_log_cap
    }

    fn run_trial(
        &self,
        decoder: &mut JointBpDecoder,
        p_d: f64,
        point: u64,
        trial: u64,
    ) -> Result<TrialResult> {
        let n = self.code.n();
        let mut rng = trial_rng(self.seed, point, trial);
        let truth = sample_error(n, p_d, &mut rng)?;
        let syn = extract_syndrome(self.code, &truth)?;
        let outcome = decoder.decode(&syn, p_d)?;
        let record = self.classifier.classify(trial, &truth, &outcome)?;
        let failure = (!record.success).then(|| {
            let residual = Classifier::residual(&truth, &outcome).expect("lengths checked");
            FailureRecord {
                trial,
                p_d,
                bit_errors: record.bit_errors,
                residual_weight_x: record.residual_weight_x,
                residual_weight_z: record.residual_weight_z,
                iterations: record.iterations,
                residual_x: residual.x.support(),
                residual_z: residual.z.support(),
            }
        });
        Ok(TrialResult { record, failure })
    }

    /// Estimates FER/BER at `p_d`, using point index 0 for the random streams.
    pub fn run_point(&self, p_d: f64) -> Result<PointResult> {
        self.run_point_indexed(p_d, 0)
    }

    pub fn run_point_indexed(&self, p_d: f64, point: u64) -> Result<PointResult> {
        if !(0.0..=1.0).contains(&p_d) {
            return Err(Error::invalid(format!("p_d = {p_d} outside [0, 1]")));
        }
        let mut result = PointResult::empty(p_d, self.code.n());
        let mut next = 0u64;
        let mut batch = 64u64;
        'outer: while next < self.stop.max_trials {
            let end = (next + batch).min(self.stop.max_trials);
            let proto = JointBpDecoder::for_code(self.code, self.decoder_cfg)?;
            let outcomes: Vec<Result<TrialResult>> = self.pool.install(|| {
                (next..end)
                    .into_par_iter()
                    .map_init(|| proto.clone(), |dec, t| self.run_trial(dec, p_d, point, t))
                    .collect()
            });
            for outcome in outcomes {
                let TrialResult { record, failure } = outcome?;
                result.trials += 1;
                result.total_iterations += record.iterations as u64;
                if !record.success {
                    result.frame_errors += 1;
                    result.total_bit_errors += record.bit_errors as u64;
                    *result.weight_histogram.entry(record.bit_errors).or_insert(0) += 1;
                    if result.failures.len() < self.failure_log_cap {
                        result.failures.extend(failure);
                    }
                    if result.frame_errors >= self.stop.min_frame_errors {
                        break 'outer;
                    }
                }
            }
            next = end;
            batch = (batch * 2).min(16_384);
        }
        result.finish();
        Ok(result)
    }

    /// One point per grid value; point `i` uses stream key `(seed, i)`.
    pub fn run_sweep(&self, p_grid: &[f64]) -> Result<Vec<PointResult>> {
        validate_grid(p_grid)?;
        p_grid
            .iter()
            .enumerate()
            .map(|(i, &p)| self.run_point_indexed(p, i as u64))
            .collect()
    }
}

/// Non-empty, within `[0, 1]`, strictly monotone.
pub fn validate_grid(p_grid: &[f64]) -> Result<()> {
    if p_grid.is_empty() {
        return Err(Error::invalid("p grid is empty"));
    }
    if let Some(p) = p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("grid value {p} outside [0, 1]")));
    }
    let increasing = p_grid.windows(2).all(|w| w[0] < w[1]);
    let decreasing = p_grid.windows(2).all(|w| w[0] > w[1]);
    if !(increasing || decreasing) {
        return Err(Error::invalid("p grid must be strictly increasing or decreasing"));
    }
    Ok(())
}

pub fn run_point(
    code: &QuantumQcCode,
    p_d: f64,
    stop: StoppingRule,
    seed: u64,
    cfg: DecoderConfig,
) -> Result<PointResult> {
    Simulator::new(code, cfg, stop, seed, None)?.run_point(p_d)
}

pub fn run_sweep(
    code: &QuantumQcCode,
    p_grid: &[f64],
    stop: StoppingRule,
    seed: u64,
    cfg: DecoderConfig,
) -> Result<Vec<PointResult>> {
    Simulator::new(code, cfg, stop, seed, None)?.run_sweep(p_grid)
}

/// Fraction of failures with at most `k * L` bit errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FloorFraction {
    NoData,
    Fraction { within: u64, total: u64 },
}

impl FloorFraction {
    pub fn value(self) -> Option<f64> {
        match self {
            FloorFraction::NoData => None,
            FloorFraction::Fraction { within, total } => Some(within as f64 / total as f64),
        }
    }
}

pub fn floor_statistics(
    bit_errors: impl IntoIterator<Item = usize>,
    l: usize,
    k_values: &[usize],
) -> Result<BTreeMap<usize, FloorFraction>> {
    if l == 0 {
        return Err(Error::invalid("L must be at least 1"));
    }
    let weights: Vec<usize> = bit_errors.into_iter().collect();
    let total = weights.len() as u64;
    Ok(k_values
        .iter()
        .map(|&k| {
            let fraction = if total == 0 {
                FloorFraction::NoData
            } else {
                let within = weights.iter().filter(|&&w| w <= k * l).count() as u64;
                FloorFraction::Fraction { within, total }
            };
            (k, fraction)
        })
        .collect())
}

pub fn write_failure_log<W: Write>(mut out: W, failures: &[FailureRecord]) -> Result<()> {
    for f in failures {
        serde_json::to_writer(&mut out, f).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_failure_log<R: BufRead>(input: R) -> Result<Vec<FailureRecord>> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            column: e.column(),
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// `H2(p) + p log2 3`, the entropy of a depolarizing qubit error.
pub fn depolarizing_entropy(p: f64) -> f64 {
    binary_entropy(p) + p * 3f64.log2()
}

/// Depolarizing probability where the hashing bound equals `rate`, i.e. the
/// root of `1 - rate = H2(p) + p log2 3` on `[0, 3/4]`.
pub fn hashing_bound_threshold(rate: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::invalid(format!("rate {rate} outside [0, 1]")));
    }
    let target = 1.0 - rate;
    if target == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 0.75f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if depolarizing_entropy(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
