use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::ops::RangeInclusive;

use qcldpc::code::ratio_to_f64;
use qcldpc::sim::{read_failure_log, write_failure_log, FailureRecord};
use qcldpc::{
    build_code, builtin_pair_j3_l8, code_report, design_rate, floor_statistics, hashing_bound_threshold,
    load_pair, scan_circulants, ExponentPair, FloorFraction, PointResult, QuantumQcCode, Simulator,
};

use crate::args::{BoundArgs, CodeArgs, CodeSource, FloorArgs, SimulateArgs};
use crate::config::{CodeChoice, Manifest, RunConfig, SimSettings};
use crate::error::{CliError, CliResult};

pub const CSV_HEADER: &str =
    "p_d,trials,frame_errors,fer,ci_low,ci_high,total_bit_errors,ber,mean_iterations";

fn load_source(source: &CodeSource) -> CliResult<ExponentPair> {
    match (&source.pair, source.builtin_3x8) {
        (Some(path), false) => Ok(load_pair(path)?),
        (None, true) => Ok(builtin_pair_j3_l8()),
        (Some(_), true) => Err(CliError::Usage("choose one of --builtin-3x8 and --pair".into())),
        (None, false) => Err(CliError::Usage(
            "a code source (--builtin-3x8 or --pair) is required".into(),
        )),
    }
}

fn load_choice(choice: &CodeChoice) -> CliResult<ExponentPair> {
    match choice {
        CodeChoice::Builtin3x8 => Ok(builtin_pair_j3_l8()),
        CodeChoice::PairFile(path) => Ok(load_pair(path)?),
    }
}

/// Parses an inclusive range `A..B` (or `A..=B`).
pub fn parse_range(text: &str) -> CliResult<RangeInclusive<usize>> {
    let bad = || CliError::Usage(format!("`{text}` is not a range A..B"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let lo: usize = a.trim().parse().map_err(|_| bad())?;
    let hi: usize = b.trim().parse().map_err(|_| bad())?;
    if lo < 2 || lo > hi {
        return Err(CliError::Usage(format!("range {text} must satisfy 2 <= A <= B")));
    }
    Ok(lo..=hi)
}

pub fn cmd_code(args: &CodeArgs, out: &mut dyn Write) -> CliResult<()> {
    let pair = load_source(&args.source)?;
    match (&args.p, &args.scan_p) {
        (Some(p), None) => {
            let code = build_code(&pair, *p)?;
            writeln!(out, "{}", code_report(&code))?;
            Ok(())
        }
        (None, Some(range)) => {
            let rows = scan_circulants(&pair, parse_range(range)?)?;
            writeln!(out, "P,n,orthogonal,weights_ok,girth_x,girth_z,girth6")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.circulant,
                    r.n,
                    r.orthogonal,
                    r.weights_ok,
                    r.girth_x,
                    r.girth_z,
                    r.is_girth_six()
                )?;
            }
            let hits: Vec<String> = rows
                .iter()
                .filter(|r| r.is_girth_six())
                .map(|r| r.circulant.to_string())
                .collect();
            writeln!(
                out,
                "# girth-6 P: {}",
                if hits.is_empty() {
                    "none".into()
                } else {
                    hits.join(" ")
                }
            )?;
            Ok(())
        }
        _ => Err(CliError::Usage("give exactly one of --p and --scan-p".into())),
    }
}

/// One CSV data row (no trailing newline).
pub fn csv_row(r: &PointResult) -> String {
    format!(
        "{},{},{},{:.6e},{:.6e},{:.6e},{},{:.6e},{:.4}",
        r.p_d,
        r.trials,
        r.frame_errors,
        r.fer,
        r.ci_low,
        r.ci_high,
        r.total_bit_errors,
        r.ber,
        r.mean_iterations()
    )
}

fn code_label(choice: &CodeChoice) -> String {
    match choice {
        CodeChoice::Builtin3x8 => "builtin-3x8".into(),
        CodeChoice::PairFile(p) => p.display().to_string(),
    }
}

/// CSV with `#` metadata lines, the header and one row per point.
pub fn render_csv(run: &RunConfig, code: &QuantumQcCode, results: &[PointResult]) -> CliResult<String> {
    let rate = design_rate(code.j(), code.l())?;
    let bound = hashing_bound_threshold(ratio_to_f64(rate).clamp(0.0, 1.0))?;
    let mut text = format!(
        "# code={} J={} L={} P={} n={}\n# design_rate={} hashing_bound_p={:.6}\n{CSV_HEADER}\n",
        code_label(&run.code),
        code.j(),
        code.l(),
        code.circulant(),
        code.n(),
        rate,
        bound
    );
    for r in results {
        text.push_str(&csv_row(r));
        text.push('\n');
    }
    Ok(text)
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> CliResult<()> {
    let flags = SimSettings::from_args(args)?;
    let file = match &args.config {
        Some(path) => SimSettings::load(path)?,
        None => SimSettings::default(),
    };
    let run = RunConfig::resolve(flags.over(file))?;
    simulate(&run, out)
}

pub fn simulate(run: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let pair = load_choice(&run.code)?;
    let code = build_code(&pair, run.circulant)?;
    let sim = Simulator::new(&code, run.decoder, run.stop, run.seed, run.threads)?
        .with_failure_log_cap(run.failure_log_cap);

    fs::create_dir_all(&run.out)?;
    let mut results = Vec::with_capacity(run.p_grid.len());
    for (i, &p) in run.p_grid.iter().enumerate() {
        let r = sim.run_point_indexed(p, i as u64)?;
        writeln!(out, "{}", csv_row(&r))?;
        results.push(r);
    }

    let csv = render_csv(run, &code, &results)?;
    fs::write(run.out.join("results.csv"), &csv)?;
    let failures: Vec<FailureRecord> = results.iter().flat_map(|r| r.failures.iter().cloned()).collect();
    let log = BufWriter::new(File::create(run.out.join("failures.jsonl"))?);
    write_failure_log(log, &failures)?;

    let rate = design_rate(code.j(), code.l())?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        code_length: code.n(),
        design_rate: rate.to_string(),
        hashing_bound_p: hashing_bound_threshold(ratio_to_f64(rate).clamp(0.0, 1.0))?,
        config: run.to_settings(),
    };
    let manifest_text = toml::to_string(&manifest)
        .map_err(|e| CliError::Validation(format!("cannot serialize manifest: {e}")))?;
    fs::write(run.out.join("manifest.toml"), manifest_text)?;
    Ok(())
}

pub fn parse_k_list(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| CliError::Usage(format!("`{t}` in --k is not an integer")))
        })
        .collect()
}

pub fn cmd_floor(args: &FloorArgs, out: &mut dyn Write) -> CliResult<()> {
    let ks = parse_k_list(&args.k)?;
    if ks.is_empty() {
        return Err(CliError::Usage("--k needs at least one value".into()));
    }
    if args.l == 0 {
        return Err(CliError::Usage("--l must be at least 1".into()));
    }
    let mut records = Vec::new();
    for path in &args.logs {
        let file = File::open(path)?;
        records.extend(
            read_failure_log(BufReader::new(file))
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?,
        );
    }
    records.retain(|r| args.p_min.is_none_or(|lo| r.p_d >= lo) && args.p_max.is_none_or(|hi| r.p_d <= hi));
    if records.is_empty() {
        writeln!(out, "no failures recorded")?;
        return Ok(());
    }
    let weights: Vec<usize> = records.iter().map(|r| r.bit_errors).collect();
    let stats = floor_statistics(weights.iter().copied(), args.l, &ks)?;
    writeln!(out, "failures {}", weights.len())?;
    writeln!(out, "k,max_bit_errors,fraction,within,total")?;
    for (k, fraction) in &stats {
        match fraction {
            FloorFraction::Fraction { within, total } => writeln!(
                out,
                "{k},{},{:.6},{within},{total}",
                k * args.l,
                *within as f64 / *total as f64
            )?,
            FloorFraction::NoData => writeln!(out, "{k},{},no data,0,0", k * args.l)?,
        }
    }
    let mut histogram = std::collections::BTreeMap::new();
    for w in weights {
        *histogram.entry(w).or_insert(0u64) += 1;
    }
    writeln!(out, "bit_errors,count")?;
    for (w, c) in histogram {
        writeln!(out, "{w},{c}")?;
    }
    Ok(())
}

pub fn cmd_bound(args: &BoundArgs, out: &mut dyn Write) -> CliResult<()> {
    let rate = match (args.rate, args.j, args.l) {
        (Some(r), None, None) => r,
        (None, Some(j), Some(l)) => ratio_to_f64(design_rate(j, l)?),
        _ => return Err(CliError::Usage("give --rate or both --j and --l".into())),
    };
    let p = hashing_bound_threshold(rate)?;
    writeln!(out, "{p:.6}")?;
    Ok(())
}
