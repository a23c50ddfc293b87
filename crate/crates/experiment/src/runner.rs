//! Seeded sweep execution on a thread pool.

use std::time::Instant;

use naosa_core::algorithms::{run, Algorithm, AlgorithmSettings, RunTrace};
use naosa_core::channel::generate_channels;
use naosa_core::HybridSystem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SweepPoint};
use crate::error::{ExperimentError, Result};

/// Environment variable that fixes the worker count.
pub const THREADS_ENV: &str = "NAOSA_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    /// Bits per second per Hz.
    pub min_throughput: f64,
    pub sum_throughput: f64,
    pub per_user: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_penalty: f64,
    pub trace: RunTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    /// Index into the sweep points.
    pub point_index: usize,
    pub point: SweepPoint,
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Run failures are kept per row so the sweep can continue.
    pub outcome: std::result::Result<RunMetrics, String>,
    pub wall_s: f64,
}

impl MetricsRecord {
    /// File-name friendly identifier of the row.
    pub fn id(&self) -> String {
        format!("{}_{}_s{}", self.point.label, self.algorithm.name(), self.seed)
    }
}

/// One run with the channels drawn from `seed`, so every sweep point and
/// algorithm sees the same users for a given seed.
pub fn run_single(cfg: &ExperimentConfig, point: &SweepPoint, algorithm: Algorithm, seed: u64) -> Result<RunMetrics> {
    let scenario = cfg.scenario(point);
    let channels = generate_channels(&scenario, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let system = HybridSystem::from_scenario(&scenario, &channels)?;
    let settings = AlgorithmSettings { max_iters: cfg.max_iters, seed, ..Default::default() };
    let out = run(&system, algorithm, &settings)?;
    Ok(RunMetrics {
        min_throughput: out.report.min_bits(),
        sum_throughput: out.report.sum_bits(),
        per_user: out.report.per_user_bits(),
        iterations: out.iterations,
        converged: out.converged,
        final_penalty: out.final_penalty,
        trace: out.trace,
    })
}

fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| ExperimentError::Config(format!("{THREADS_ENV} must be a thread count, got '{v}'"))),
        // zero lets rayon decide
        Err(_) => Ok(0),
    }
}

/// Runs every (sweep point, algorithm, seed) and returns the records in that
/// order, independent of completion order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricsRecord>> {
    let points = cfg.validate()?;
    let jobs: Vec<(usize, Algorithm, u64)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            cfg.algorithms_for(p).into_iter().flat_map(move |a| cfg.seeds.iter().map(move |&s| (i, a, s)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    let records = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, algorithm, seed)| {
                let start = Instant::now();
                let outcome = run_single(cfg, &points[i], algorithm, seed).map_err(|e| e.to_string());
                MetricsRecord {
                    point_index: i,
                    point: points[i].clone(),
                    algorithm,
                    seed,
                    outcome,
                    wall_s: start.elapsed().as_secs_f64(),
                }
            })
            .collect()
    });
    Ok(records)
}
