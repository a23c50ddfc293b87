//! Per-sweep-point statistics.

use naosa_core::algorithms::Algorithm;

use crate::config::SweepPoint;
use crate::runner::MetricsRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> Option<Stats> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some(Stats { mean, std })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub point: SweepPoint,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub failed: usize,
    /// bps/Hz; `None` when no run of the group succeeded.
    pub min_throughput: Option<Stats>,
    pub sum_throughput: Option<Stats>,
    pub warning: Option<String>,
}

/// Groups by (sweep point, algorithm) in first-seen order.
pub fn aggregate(records: &[MetricsRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, &'static str)> = Vec::new();
    for r in records {
        let key = (r.point_index, r.algorithm.name());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|key| {
            let group: Vec<&MetricsRecord> =
                records.iter().filter(|r| (r.point_index, r.algorithm.name()) == key).collect();
            let ok: Vec<_> = group.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            let mins: Vec<f64> = ok.iter().map(|m| m.min_throughput).collect();
            let sums: Vec<f64> = ok.iter().map(|m| m.sum_throughput).collect();
            let failed = group.len() - ok.len();
            let warning = if ok.is_empty() {
                Some(format!("no successful runs out of {}", group.len()))
            } else if failed > 0 {
                Some(format!("{failed} of {} runs failed", group.len()))
            } else {
                None
            };
            SummaryRow {
                point: group[0].point.clone(),
                algorithm: group[0].algorithm,
                runs: group.len(),
                failed,
                min_throughput: mean_std(&mins),
                sum_throughput: mean_std(&sums),
                warning,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        assert_eq!(mean_std(&[2.5]), Some(Stats { mean: 2.5, std: 0.0 }));
        assert_eq!(mean_std(&[4.0, 4.0]), Some(Stats { mean: 4.0, std: 0.0 }));
        let s = mean_std(&[1.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[]), None);
    }
}
