//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p qcldpc-cli --test acceptance`.

use std::collections::HashSet;
use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use qcldpc::channel::trial_rng;
use qcldpc::gf2::mat_mul_mod2;
use qcldpc::sim::{write_failure_log, Classifier};
use qcldpc::{
    build_code, builtin_pair_j3_l8, design_rate, extract_syndrome, hashing_bound_threshold, measured_rate,
    sample_error, BitVector, DecodeOutcome, DecoderConfig, FailureRecord, Girth, JointBpDecoder, Pauli,
    PauliError, PointResult, QuantumQcCode, Simulator, StoppingRule,
};
use qcldpc_cli::args::{CodeArgs, CodeSource, FloorArgs};
use qcldpc_cli::commands::{cmd_code, cmd_floor, csv_row};
use rand::Rng;

/// First circulant size in [3, 512] whose builtin code has girth 6 in both
/// Tanner graphs, frozen from the first scan.
const GIRTH6_P: usize = 25;
/// Larger girth-6 member of the family, four times `GIRTH6_P`.
const LARGE_P: usize = 100;
const CODE_SIZES: [usize; 6] = [3, 5, 21, 51, 121, 255];

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn builtin(p: usize) -> QuantumQcCode {
    build_code(&builtin_pair_j3_l8(), p).expect("builtin pair builds")
}

fn c1_orthogonality() -> Check {
    let start = Instant::now();
    for p in CODE_SIZES {
        let code = build_code(&builtin_pair_j3_l8(), p).map_err(|e| format!("P={p}: {e}"))?;
        let product = mat_mul_mod2(code.h_x(), &code.h_z().transpose()).map_err(|e| e.to_string())?;
        ensure(product.is_zero(), || {
            format!("P={p}: H_X H_Z^T has {} ones", product.nnz())
        })?;
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!("H_X H_Z^T = 0 for P in {CODE_SIZES:?}"))
}

fn c2_weights() -> Check {
    for p in CODE_SIZES {
        let code = builtin(p);
        for (name, h) in [("H_X", code.h_x()), ("H_Z", code.h_z())] {
            ensure(h.col_weights().iter().all(|&w| w == 3), || {
                format!("P={p}: {name} column weight != 3")
            })?;
            ensure(h.row_weights().iter().all(|&w| w == 8), || {
                format!("P={p}: {name} row weight != 8")
            })?;
        }
    }
    Ok("column weight 3, row weight 8 throughout".into())
}

fn c3_girth() -> Check {
    let start = Instant::now();
    let args = CodeArgs {
        source: CodeSource {
            builtin_3x8: true,
            pair: None,
        },
        p: None,
        scan_p: Some("3..512".into()),
    };
    let mut buf = Vec::new();
    cmd_code(&args, &mut buf).map_err(|e| e.to_string())?;
    let text = String::from_utf8(buf).unwrap();
    let hits: Vec<usize> = text
        .lines()
        .find_map(|l| l.strip_prefix("# girth-6 P: "))
        .ok_or("scan printed no summary")?
        .split_whitespace()
        .filter_map(|t| t.parse().ok())
        .collect();
    ensure(hits.first() == Some(&GIRTH6_P), || {
        format!("first girth-6 P is {:?}", hits.first())
    })?;
    ensure(hits.contains(&LARGE_P), || format!("P={LARGE_P} is not girth 6"))?;
    let code = builtin(GIRTH6_P);
    ensure(
        code.girth_x() == Girth::Finite(6) && code.girth_z() == Girth::Finite(6),
        || "direct girth check disagrees".into(),
    )?;
    within(start.elapsed(), 60.0)?;
    Ok(format!("{} girth-6 sizes, first P = {GIRTH6_P}", hits.len()))
}

fn c4_rate() -> Check {
    let design = design_rate(3, 8).map_err(|e| e.to_string())?;
    ensure(design == Ratio::new(1, 4), || format!("design rate {design}"))?;
    let mut sizes: Vec<usize> = CODE_SIZES.to_vec();
    sizes.extend([GIRTH6_P, LARGE_P]);
    let mut equalities = 0;
    for p in sizes {
        let code = builtin(p);
        let rate = measured_rate(&code);
        ensure(rate >= design, || format!("P={p}: measured {rate} < {design}"))?;
        let full = qcldpc::gf2::gf2_rank(code.h_x()) == 3 * p && qcldpc::gf2::gf2_rank(code.h_z()) == 3 * p;
        ensure((rate == design) == full, || {
            format!("P={p}: rate {rate}, full rank {full}")
        })?;
        equalities += usize::from(full);
    }
    Ok(format!(
        "measured >= 1/4, equality exactly at full rank ({equalities} full-rank codes)"
    ))
}

fn c5_weight_one() -> Check {
    let start = Instant::now();
    let code = builtin(GIRTH6_P);
    let n = code.n();
    let cfg = DecoderConfig {
        max_iterations: 20,
        ..DecoderConfig::default()
    };
    let mut decoder = JointBpDecoder::for_code(&code, cfg).map_err(|e| e.to_string())?;
    let mut recovered = 0;
    for qubit in 0..n {
        for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
            let e = PauliError::single(n, qubit, pauli);
            let syn = extract_syndrome(&code, &e).map_err(|err| err.to_string())?;
            let out = decoder.decode(&syn, 0.01).map_err(|err| err.to_string())?;
            ensure(out.converged && out.x_hat == e.x && out.z_hat == e.z, || {
                format!(
                    "{pauli:?} on qubit {qubit} not recovered ({} iterations)",
                    out.iterations
                )
            })?;
            recovered += 1;
        }
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!("{recovered}/{} single-qubit errors at n = {n}", 3 * n))
}

fn c6_soundness() -> Check {
    let code = builtin(GIRTH6_P);
    let mut decoder = JointBpDecoder::for_code(&code, DecoderConfig::default()).map_err(|e| e.to_string())?;
    let mut converged = 0;
    for (point, p) in [0.02, 0.05, 0.08].into_iter().enumerate() {
        for trial in 0..10_000 {
            let mut rng = trial_rng(99, point as u64, trial);
            let e = sample_error(code.n(), p, &mut rng).map_err(|err| err.to_string())?;
            let syn = extract_syndrome(&code, &e).map_err(|err| err.to_string())?;
            let out = decoder.decode(&syn, p).map_err(|err| err.to_string())?;
            if out.converged {
                let estimate = PauliError::new(out.x_hat, out.z_hat).map_err(|err| err.to_string())?;
                let again = extract_syndrome(&code, &estimate).map_err(|err| err.to_string())?;
                ensure(again == syn, || {
                    format!("p={p} trial {trial}: converged with wrong syndrome")
                })?;
                converged += 1;
            }
        }
    }
    Ok(format!(
        "0 violations over {converged} converged of 30000 decodes"
    ))
}

/// Row masks of a matrix with at most 64 columns.
fn row_masks(rows: &[Vec<usize>]) -> Vec<u64> {
    rows.iter()
        .map(|r| r.iter().fold(0u64, |m, &c| m | 1 << c))
        .collect()
}

fn span(rows: &[u64]) -> HashSet<u64> {
    let mut set = HashSet::from([0u64]);
    for &r in rows {
        let next: Vec<u64> = set.iter().map(|&s| s ^ r).collect();
        set.extend(next);
    }
    set
}

/// Kernel basis by Gauss-Jordan elimination on u64 masks.
fn kernel(rows: &[u64], cols: usize) -> Vec<u64> {
    let mut m = rows.to_vec();
    let mut pivots = Vec::new();
    for col in 0..cols {
        let rank = pivots.len();
        let Some(sel) = (rank..m.len()).find(|&r| m[r] >> col & 1 == 1) else {
            continue;
        };
        m.swap(rank, sel);
        for r in 0..m.len() {
            if r != rank && m[r] >> col & 1 == 1 {
                m[r] ^= m[rank];
            }
        }
        pivots.push(col);
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|f| {
            pivots
                .iter()
                .enumerate()
                .filter(|&(r, _)| m[r] >> f & 1 == 1)
                .fold(1u64 << f, |v, (_, &p)| v | 1 << p)
        })
        .collect()
}

fn to_vector(mask: u64, n: usize) -> BitVector {
    BitVector::from_bools(&(0..n).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
}

fn c7_degeneracy() -> Check {
    let code = builtin(5);
    let n = code.n();
    let classifier = Classifier::new(&code);
    let hx = row_masks(code.h_x().row_supports());
    let mut rng = trial_rng(7, 0, 0);
    for case in 0..100 {
        let truth = sample_error(n, 0.2, &mut rng).map_err(|e| e.to_string())?;
        let mut x_hat = truth.x.clone();
        for (r, _) in hx.iter().enumerate() {
            if rng.gen::<bool>() {
                x_hat ^= &code.h_x().row_vector(r);
            }
        }
        let outcome = DecodeOutcome {
            x_hat,
            z_hat: truth.z.clone(),
            converged: true,
            iterations: 1,
        };
        let record = classifier
            .classify(case, &truth, &outcome)
            .map_err(|e| e.to_string())?;
        ensure(record.success, || {
            format!("stabilizer-shifted estimate {case} classified as failure")
        })?;
    }

    let stabilizers = span(&hx);
    let logical = kernel(&row_masks(code.h_z().row_supports()), n)
        .into_iter()
        .find(|k| !stabilizers.contains(k))
        .ok_or("no logical operator found")?;
    let truth = PauliError::identity(n);
    let outcome = DecodeOutcome {
        x_hat: to_vector(logical, n),
        z_hat: BitVector::zeros(n),
        converged: true,
        iterations: 1,
    };
    let record = classifier
        .classify(0, &truth, &outcome)
        .map_err(|e| e.to_string())?;
    ensure(!record.success, || {
        "logical residual classified as success".into()
    })?;
    Ok(format!(
        "100/100 stabilizer shifts succeed; weight-{} logical fails (n = {n})",
        logical.count_ones()
    ))
}

fn c8_hashing_bound() -> Check {
    let p0 = hashing_bound_threshold(0.0).map_err(|e| e.to_string())?;
    ensure((p0 - 0.18929).abs() <= 1e-4, || format!("threshold(0) = {p0}"))?;
    let p1 = hashing_bound_threshold(1.0).map_err(|e| e.to_string())?;
    ensure(p1 == 0.0, || format!("threshold(1) = {p1}"))?;
    let mut worst: f64 = 0.0;
    for rate in [0.0, 0.1, 0.25, 1.0 / 3.0, 0.5, 0.75, 0.9] {
        let p = hashing_bound_threshold(rate).map_err(|e| e.to_string())?;
        let h = -p * p.log2() - (1.0 - p) * (1.0 - p).log2() + p * 3f64.log2();
        worst = worst.max((1.0 - rate - h).abs());
    }
    ensure(worst < 1e-10, || format!("residual {worst:e}"))?;
    Ok(format!(
        "threshold(0) = {p0:.7}, threshold(1) = 0, max residual {worst:.1e}"
    ))
}

/// 95% interval of `ln FER(high) - ln FER(low)` from the two Wilson intervals.
fn log_drop(high: &PointResult, low: &PointResult) -> (f64, f64, f64) {
    (
        high.fer.ln() - low.fer.ln(),
        high.ci_low.ln() - low.ci_high.ln(),
        high.ci_high.ln() - low.ci_low.ln(),
    )
}

fn c9_waterfall() -> Check {
    let start = Instant::now();
    let stop = StoppingRule {
        min_frame_errors: 100,
        max_trials: 1_000_000,
    };
    let grid = [0.10, 0.08];
    let mut drops = Vec::new();
    for p in [GIRTH6_P, LARGE_P] {
        let code = builtin(p);
        let sim = Simulator::new(&code, DecoderConfig::default(), stop, 2024, None)
            .map_err(|e| e.to_string())?
            .with_failure_log_cap(0);
        let points = sim.run_sweep(&grid).map_err(|e| e.to_string())?;
        for r in &points {
            ensure(r.frame_errors >= 100, || {
                format!("P={p} p_D={}: {} frame errors", r.p_d, r.frame_errors)
            })?;
        }
        drops.push((code.n(), log_drop(&points[0], &points[1])));
    }
    let (small_n, small) = drops[0];
    let (large_n, large) = drops[1];
    let summary = format!(
        "ln-FER drop 0.10 -> 0.08: n={small_n} {:.2} [{:.2}, {:.2}], n={large_n} {:.2} [{:.2}, {:.2}], {:.0} s",
        small.0,
        small.1,
        small.2,
        large.0,
        large.1,
        large.2,
        start.elapsed().as_secs_f64()
    );
    ensure(large.1 > small.2, || format!("intervals overlap: {summary}"))?;
    within(start.elapsed(), 1800.0)?;
    Ok(summary)
}

fn failure(bit_errors: usize) -> FailureRecord {
    FailureRecord {
        trial: 0,
        p_d: 0.05,
        bit_errors,
        residual_weight_x: bit_errors,
        residual_weight_z: 0,
        iterations: 100,
        residual_x: (0..bit_errors).collect(),
        residual_z: vec![],
    }
}

fn c10_floor_tooling() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let floor = |weights: &[usize], k: &str| -> Result<String, String> {
        let path = dir.path().join(format!("log{}.jsonl", weights.len()));
        let records: Vec<_> = weights.iter().map(|&w| failure(w)).collect();
        write_failure_log(fs::File::create(&path).map_err(|e| e.to_string())?, &records)
            .map_err(|e| e.to_string())?;
        let args = FloorArgs {
            logs: vec![path],
            l: 8,
            k: k.into(),
            p_min: None,
            p_max: None,
        };
        let mut buf = Vec::new();
        cmd_floor(&args, &mut buf).map_err(|e| e.to_string())?;
        Ok(String::from_utf8(buf).unwrap())
    };
    let a = floor(&[3, 5, 40], "1,3")?;
    for line in ["failures 3", "1,8,0.666667,2,3", "3,24,0.666667,2,3", "40,1"] {
        ensure(a.lines().any(|l| l == line), || {
            format!("missing `{line}` in\n{a}")
        })?;
    }
    let b = floor(&[1, 4, 8, 8], "1,2")?;
    for line in ["1,8,1.000000,4,4", "2,16,1.000000,4,4", "8,2"] {
        ensure(b.lines().any(|l| l == line), || {
            format!("missing `{line}` in\n{b}")
        })?;
    }
    let empty = floor(&[], "1")?;
    ensure(empty == "no failures recorded\n", || {
        format!("empty log printed {empty:?}")
    })?;
    Ok("(3,5,40) L=8 -> 2/3, 2/3; all <= L -> 1; empty -> no failures recorded".into())
}

fn c11_determinism() -> Check {
    let code = builtin(GIRTH6_P);
    let stop = StoppingRule {
        min_frame_errors: 50,
        max_trials: 100_000,
    };
    let mut rows = Vec::new();
    for threads in [1, 4, 8] {
        let sim = Simulator::new(&code, DecoderConfig::default(), stop, 5, Some(threads))
            .map_err(|e| e.to_string())?;
        let r = sim.run_point(0.07).map_err(|e| e.to_string())?;
        rows.push(csv_row(&r));
    }
    ensure(rows.iter().all(|r| r == &rows[0]), || {
        format!("rows differ: {rows:?}")
    })?;
    Ok(format!("1/4/8 threads -> {}", rows[0]))
}

fn c12_sampling() -> Check {
    let (n, trials, p) = (1000, 100, 0.3);
    let mut counts = [0u64; 4];
    for trial in 0..trials {
        let mut rng = trial_rng(12, 0, trial);
        let e = sample_error(n, p, &mut rng).map_err(|err| err.to_string())?;
        for q in 0..n {
            counts[e.get(q) as usize] += 1;
        }
    }
    let total = (n as u64 * trials) as f64;
    let expected = [1.0 - p, p / 3.0, p / 3.0, p / 3.0];
    let mut worst: f64 = 0.0;
    for (c, q) in counts.iter().zip(expected) {
        let sigma = (total * q * (1.0 - q)).sqrt();
        worst = worst.max((*c as f64 - total * q).abs() / sigma);
    }
    ensure(worst <= 4.0, || {
        format!("counts {counts:?}, worst deviation {worst:.2} sigma")
    })?;
    Ok(format!(
        "I/X/Y/Z counts {counts:?}, max deviation {worst:.2} sigma"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("orthogonality", c1_orthogonality),
        ("weights", c2_weights),
        ("girth", c3_girth),
        ("rate", c4_rate),
        ("weight-1 decoding", c5_weight_one),
        ("convergence soundness", c6_soundness),
        ("degeneracy", c7_degeneracy),
        ("hashing bound", c8_hashing_bound),
        ("waterfall trend", c9_waterfall),
        ("floor tooling", c10_floor_tooling),
        ("determinism", c11_determinism),
        ("sampling", c12_sampling),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.2} s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.2} s)", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
