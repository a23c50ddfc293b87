//! CSV export.
//!
//! `runs.csv`, `summary.csv` and the traces depend only on the config, so
//! repeated runs give identical bytes. Wall-clock times go to `timing.csv`.

use std::fs;
use std::path::Path;

use crate::aggregate::{SummaryRow, Stats};
use crate::error::Result;
use crate::runner::MetricsRecord;

/// Six significant digits, plain notation for moderate magnitudes and
/// scientific notation otherwise; trailing zeros are trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn delta_field(r: &naosa_core::algorithms::Algorithm) -> String {
    match r {
        naosa_core::algorithms::Algorithm::SoftMaxMin { delta } => fmt_sig(*delta),
        _ => String::new(),
    }
}

pub fn write_runs(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "point",
        "algorithm",
        "delta",
        "mapping",
        "rf_chains",
        "shifters_per_chain",
        "phase_shifters",
        "transmit_power_mw",
        "total_power_mw",
        "seed",
        "min_bps_hz",
        "sum_bps_hz",
        "per_user_bps_hz",
        "iterations",
        "converged",
        "final_penalty",
        "error",
    ])?;
    for r in records {
        let p = &r.point;
        let mut row = vec![
            p.label.clone(),
            r.algorithm.name().to_string(),
            delta_field(&r.algorithm),
            p.mapping.to_string(),
            p.rf_chains.to_string(),
            p.shifters_per_chain.to_string(),
            p.phase_shifters().to_string(),
            fmt_sig(p.transmit_power_mw),
            fmt_sig(p.total_power_mw),
            r.seed.to_string(),
        ];
        match &r.outcome {
            Ok(m) => row.extend([
                fmt_sig(m.min_throughput),
                fmt_sig(m.sum_throughput),
                m.per_user.iter().map(|&x| fmt_sig(x)).collect::<Vec<_>>().join(";"),
                m.iterations.to_string(),
                m.converged.to_string(),
                fmt_sig(m.final_penalty),
                String::new(),
            ]),
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push(e.clone());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn stats_fields(s: Option<Stats>) -> [String; 2] {
    match s {
        Some(s) => [fmt_sig(s.mean), fmt_sig(s.std)],
        None => [String::new(), String::new()],
    }
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "point",
        "algorithm",
        "delta",
        "rf_chains",
        "phase_shifters",
        "transmit_power_mw",
        "total_power_mw",
        "runs",
        "failed",
        "min_mean_bps_hz",
        "min_std_bps_hz",
        "sum_mean_bps_hz",
        "sum_std_bps_hz",
        "warning",
    ])?;
    for s in rows {
        let p = &s.point;
        let mut row = vec![
            p.label.clone(),
            s.algorithm.name().to_string(),
            delta_field(&s.algorithm),
            p.rf_chains.to_string(),
            p.phase_shifters().to_string(),
            fmt_sig(p.transmit_power_mw),
            fmt_sig(p.total_power_mw),
            s.runs.to_string(),
            s.failed.to_string(),
        ];
        row.extend(stats_fields(s.min_throughput));
        row.extend(stats_fields(s.sum_throughput));
        row.push(s.warning.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Iteration trace of one run; throughputs in bps/Hz.
pub fn write_trace(path: &Path, record: &MetricsRecord) -> Result<()> {
    let Ok(m) = &record.outcome else {
        return Ok(());
    };
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "objective", "penalty", "gamma", "power", "min_bps_hz", "sum_bps_hz"])?;
    for t in &m.trace.records {
        let bits: Vec<f64> = t.per_user.iter().map(|r| r / std::f64::consts::LN_2).collect();
        let min = bits.iter().copied().fold(f64::INFINITY, f64::min);
        w.write_record([
            t.iteration.to_string(),
            fmt_sig(t.objective),
            fmt_sig(t.penalty),
            fmt_sig(t.gamma),
            fmt_sig(t.power),
            fmt_sig(min),
            fmt_sig(bits.iter().sum()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timing(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["point", "algorithm", "seed", "wall_s"])?;
    for r in records {
        w.write_record([r.point.label.clone(), r.algorithm.name().to_string(), r.seed.to_string(), format!("{:.3}", r.wall_s)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every output file under `dir`, creating it if needed.
pub fn write_all(dir: &Path, records: &[MetricsRecord], summary: &[SummaryRow], traces: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_runs(&dir.join("runs.csv"), records)?;
    write_summary(&dir.join("summary.csv"), summary)?;
    write_timing(&dir.join("timing.csv"), records)?;
    if traces {
        for r in records {
            write_trace(&dir.join(format!("trace_{}.csv", r.id())), r)?;
        }
    }
    Ok(())
}
