use std::fs;
use std::path::Path;
use std::process::Command;

use naosa_core::algorithms::Algorithm;
use naosa_experiment::output::write_all;
use naosa_experiment::{aggregate, run_experiment, ExperimentConfig, MetricsRecord, RunMetrics};

const TINY: &str = "
elevation_elements = 2
azimuth_elements = 6
users = 2
rf_chains = 2
user_antennas = 1
sweep_lc = 2, 3
include_aosa = true
algo = maxmin, sum, soft
seeds = 0..2
max_iters = 40
";

fn tiny(out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_text(TINY).unwrap();
    cfg.out = out.to_path_buf();
    cfg
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timing.csv")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn csv_output_is_byte_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [a.path(), b.path()] {
        let cfg = tiny(dir);
        let records = run_experiment(&cfg).unwrap();
        write_all(dir, &records, &aggregate(&records), true).unwrap();
    }
    let (fa, fb) = (outputs(a.path()), outputs(b.path()));
    // 3 points x 3 algorithms x 2 seeds traces, plus runs and summary
    assert_eq!(fa.len(), 18 + 2);
    assert_eq!(fa, fb);

    let runs = String::from_utf8(fa.iter().find(|(n, _)| n == "runs.csv").unwrap().1.clone()).unwrap();
    assert_eq!(runs.lines().count(), 1 + 18);
    assert!(runs.lines().nth(1).unwrap().starts_with("naosa-4-nc2,maxmin,,balanced,2,2,4,100,"));
    let summary = String::from_utf8(fa.iter().find(|(n, _)| n == "summary.csv").unwrap().1.clone()).unwrap();
    assert_eq!(summary.lines().count(), 1 + 9);
    assert!(summary.contains("aosa-12-nc2,softmaxmin,0.5,2,12,100,"));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(dir.path());
    // wall-clock stamps in the traces are the only expected difference
    let strip = |rs: Vec<MetricsRecord>| {
        rs.into_iter()
            .map(|r| {
                let id = r.id();
                let outcome = r.outcome.map(|mut m| {
                    m.trace.records.iter_mut().for_each(|t| t.elapsed_s = 0.0);
                    m
                });
                (id, outcome)
            })
            .collect::<Vec<_>>()
    };
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_experiment(&cfg));
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| run_experiment(&cfg));
    assert_eq!(strip(serial.unwrap()), strip(parallel.unwrap()));
}

fn fake(point_index: usize, seed: u64, outcome: Result<f64, &str>) -> MetricsRecord {
    let cfg = ExperimentConfig::default();
    let point = cfg.sweep_points().unwrap().remove(0);
    MetricsRecord {
        point_index,
        point,
        algorithm: Algorithm::MaxMin,
        seed,
        outcome: outcome
            .map(|v| RunMetrics {
                min_throughput: v,
                sum_throughput: 2.0 * v,
                per_user: vec![v, v],
                iterations: 1,
                converged: true,
                final_penalty: 0.0,
                trace: Default::default(),
            })
            .map_err(str::to_string),
        wall_s: 0.0,
    }
}

#[test]
fn aggregate_groups_and_warns() {
    let records = vec![fake(0, 0, Ok(1.0)), fake(0, 1, Ok(3.0)), fake(1, 0, Err("singular")), fake(0, 2, Err("x"))];
    let rows = aggregate(&records);
    assert_eq!(rows.len(), 2);
    let first = rows[0].min_throughput.unwrap();
    assert_eq!(first.mean, 2.0);
    assert!((first.std - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(rows[0].sum_throughput.unwrap().mean, 4.0);
    assert_eq!((rows[0].runs, rows[0].failed), (3, 1));
    assert!(rows[0].warning.as_deref().unwrap().contains("1 of 3"));
    assert_eq!(rows[1].min_throughput, None);
    assert!(rows[1].warning.as_deref().unwrap().contains("no successful runs"));

    let dir = tempfile::tempdir().unwrap();
    write_all(dir.path(), &records, &rows, false).unwrap();
    let runs = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    assert!(runs.lines().nth(3).unwrap().ends_with(",,,,,,singular"));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.lines().nth(2).unwrap().ends_with(",,,,,no successful runs out of 1"));
}

#[test]
fn every_preset_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    let mut names = Vec::new();
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap();
        assert!(!cfg.validate().unwrap().is_empty(), "{}", path.display());
        assert!(cfg.seeds.len() >= 20);
        names.push(path.file_stem().unwrap().to_string_lossy().into_owned());
    }
    names.sort();
    assert_eq!(names, ["equal_total", "equal_transmit", "per_user", "rf_chains"]);
}

#[test]
fn cli_writes_outputs_and_applies_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("tiny.cfg");
    fs::write(&cfg_path, TINY).unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_naosa-sim"))
        .args(["--config", cfg_path.to_str().unwrap(), "--algo", "sum", "--seed", "3", "--sweep-lc", "2"])
        .args(["--power-mode", "total", "--set", "total_power_mw=1000", "--out", out.to_str().unwrap()])
        .env("NAOSA_THREADS", "2")
        .status()
        .unwrap();
    assert!(status.success());
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 3);
    // 1000 - 2 * 118 - 4 * 20
    assert!(runs.lines().nth(1).unwrap().starts_with("naosa-4-nc2,sum,,balanced,2,2,4,684,1000,3,"));
    assert!(out.join("trace_aosa-12-nc2_sum_s3.csv").exists());
    assert!(out.join("timing.csv").exists());

    let bad = Command::new(env!("CARGO_BIN_EXE_naosa-sim"))
        .args(["--config", cfg_path.to_str().unwrap(), "--delta", "2", "--dry-run"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("delta"));
}
