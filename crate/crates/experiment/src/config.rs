//! Flat `key = value` experiment configuration.
//!
//! Lines starting with `#` are comments. Lists are comma separated; seed lists
//! also accept half-open ranges such as `0..20`. Command-line overrides go
//! through [`ExperimentConfig::set`] so files and flags share one parser.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use naosa_core::algorithms::{default_delta, Algorithm};
use naosa_core::channel::{ArrayGeometry, ClusterConfig};
use naosa_core::scenario::noise_power_mw;
use naosa_core::{MappingKind, Scenario};

use crate::error::{config_err, ExperimentError, Result};
use crate::power::PowerModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    /// Every sweep point radiates the same transmit power.
    FixedTransmit,
    /// Every sweep point consumes the same total power.
    FixedTotal,
}

impl FromStr for PowerMode {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "transmit" | "fixed-transmit" | "p" => Ok(Self::FixedTransmit),
            "total" | "fixed-total" | "p_total" => Ok(Self::FixedTotal),
            other => config_err(format!("unknown power mode '{other}'")),
        }
    }
}

impl fmt::Display for PowerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FixedTransmit => "transmit",
            Self::FixedTotal => "total",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    /// Reduced phase-shifter subarrays.
    Reduced,
    /// One phase shifter per antenna.
    Full,
}

/// One configuration of the analog front end with its power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub label: String,
    pub kind: ArrayKind,
    pub rf_chains: usize,
    pub shifters_per_chain: usize,
    pub mapping: MappingKind,
    pub transmit_power_mw: f64,
    pub total_power_mw: f64,
}

impl SweepPoint {
    pub fn phase_shifters(&self) -> usize {
        self.rf_chains * self.shifters_per_chain
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub elevation_elements: usize,
    pub azimuth_elements: usize,
    pub users: usize,
    pub user_antennas: usize,
    pub rf_chains: usize,
    /// `L_c` when no shifter sweep is given.
    pub shifters_per_chain: usize,
    pub resolution_bits: u32,
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
    pub clusters: usize,
    pub subpaths: usize,
    pub angle_spread_deg: f64,
    pub noise_density_dbm_hz: f64,
    pub bandwidth_hz: f64,

    pub algorithms: Vec<Algorithm>,
    pub mapping: MappingKind,
    /// RF-chain counts to sweep; empty means `rf_chains` only.
    pub sweep_rf_chains: Vec<usize>,
    /// `L_c` values to sweep.
    pub sweep_shifters_per_chain: Vec<usize>,
    /// Total phase-shifter counts to sweep; `L_c = N_PS / N_c`.
    pub sweep_phase_shifters: Vec<usize>,
    /// Append a one-shifter-per-antenna baseline for every RF-chain count.
    pub include_full_array: bool,

    pub power_mode: PowerMode,
    pub transmit_power_mw: f64,
    pub total_power_mw: f64,
    pub power_model: PowerModel,

    pub seeds: Vec<u64>,
    /// Soft max-min scaling; `None` picks it from the transmit power.
    pub delta: Option<f64>,
    pub max_iters: usize,
    pub write_traces: bool,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let geom = ArrayGeometry::default();
        let cl = ClusterConfig::default();
        let sc = Scenario::default();
        Self {
            elevation_elements: geom.elevation_elements,
            azimuth_elements: geom.azimuth_elements,
            users: sc.users,
            user_antennas: geom.user_antennas,
            rf_chains: sc.rf_chains,
            shifters_per_chain: sc.shifters_per_chain,
            resolution_bits: sc.resolution_bits,
            cell_radius_m: sc.cell_radius_m,
            min_distance_m: sc.min_distance_m,
            clusters: cl.clusters,
            subpaths: cl.subpaths,
            angle_spread_deg: cl.angle_spread_deg,
            noise_density_dbm_hz: -174.0,
            bandwidth_hz: 100e6,
            algorithms: vec![Algorithm::MaxMin],
            mapping: sc.mapping,
            sweep_rf_chains: Vec::new(),
            sweep_shifters_per_chain: Vec::new(),
            sweep_phase_shifters: Vec::new(),
            include_full_array: false,
            power_mode: PowerMode::FixedTransmit,
            transmit_power_mw: sc.transmit_power_mw,
            total_power_mw: 3924.0,
            power_model: PowerModel::default(),
            seeds: vec![0],
            delta: None,
            max_iters: 500,
            write_traces: true,
            out: PathBuf::from("out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().or_else(|_| config_err(format!("{key}: cannot parse '{value}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse(key, s)).collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => config_err(format!("{key}: expected a boolean, got '{value}'")),
    }
}

/// `3`, `1,4,9` or `0..20`, mixed freely.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = parse("seeds", lo)?;
            let hi: u64 = parse("seeds", hi)?;
            if hi <= lo {
                return config_err(format!("seeds: empty range '{part}'"));
            }
            out.extend(lo..hi);
        } else {
            out.push(parse("seeds", part)?);
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text).map_err(|e| match e {
            ExperimentError::Config(msg) => ExperimentError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return config_err(format!("line {}: expected 'key = value'", n + 1));
            };
            self.set(key.trim(), value.trim()).map_err(|e| match e {
                ExperimentError::Config(msg) => ExperimentError::Config(format!("line {}: {msg}", n + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Sets one key; unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "elevation_elements" => self.elevation_elements = parse(key, value)?,
            "azimuth_elements" => self.azimuth_elements = parse(key, value)?,
            "users" => self.users = parse(key, value)?,
            "user_antennas" => self.user_antennas = parse(key, value)?,
            "rf_chains" => self.rf_chains = parse(key, value)?,
            "shifters_per_chain" => self.shifters_per_chain = parse(key, value)?,
            "resolution_bits" => self.resolution_bits = parse(key, value)?,
            "cell_radius_m" => self.cell_radius_m = parse(key, value)?,
            "min_distance_m" => self.min_distance_m = parse(key, value)?,
            "clusters" => self.clusters = parse(key, value)?,
            "subpaths" => self.subpaths = parse(key, value)?,
            "angle_spread_deg" => self.angle_spread_deg = parse(key, value)?,
            "noise_density_dbm_hz" => self.noise_density_dbm_hz = parse(key, value)?,
            "bandwidth_hz" => self.bandwidth_hz = parse(key, value)?,
            "algorithm" | "algo" => {
                self.algorithms = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<Algorithm>().map_err(ExperimentError::from))
                    .collect::<Result<_>>()?
            }
            "mapping" => self.mapping = value.parse()?,
            "sweep_nc" => self.sweep_rf_chains = parse_list(key, value)?,
            "sweep_lc" => self.sweep_shifters_per_chain = parse_list(key, value)?,
            "sweep_nps" => self.sweep_phase_shifters = parse_list(key, value)?,
            "include_aosa" => self.include_full_array = parse_bool(key, value)?,
            "power_mode" => self.power_mode = value.parse()?,
            "transmit_power_mw" => self.transmit_power_mw = parse(key, value)?,
            "total_power_mw" => self.total_power_mw = parse(key, value)?,
            "rf_chain_mw" => self.power_model.rf_chain_mw = parse(key, value)?,
            "phase_shifter_mw" => self.power_model.phase_shifter_mw = parse(key, value)?,
            "seeds" | "seed" => self.seeds = parse_seeds(value)?,
            "delta" => {
                self.delta = match value.trim() {
                    "auto" | "" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "max_iters" => self.max_iters = parse(key, value)?,
            "traces" => self.write_traces = parse_bool(key, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            other => return config_err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn antennas(&self) -> usize {
        self.elevation_elements * self.azimuth_elements
    }

    /// Soft max-min scaling for a given transmit power.
    pub fn delta_for(&self, transmit_power_mw: f64) -> f64 {
        self.delta.unwrap_or_else(|| default_delta(transmit_power_mw))
    }

    /// Algorithms with the soft variant's `δ` resolved for one sweep point.
    pub fn algorithms_for(&self, point: &SweepPoint) -> Vec<Algorithm> {
        self.algorithms
            .iter()
            .map(|a| match a {
                Algorithm::SoftMaxMin { .. } => Algorithm::SoftMaxMin { delta: self.delta_for(point.transmit_power_mw) },
                other => *other,
            })
            .collect()
    }

    fn point(&self, kind: ArrayKind, rf_chains: usize, shifters_per_chain: usize) -> Result<SweepPoint> {
        let nps = rf_chains * shifters_per_chain;
        let (transmit, total) = match self.power_mode {
            PowerMode::FixedTransmit => {
                (self.transmit_power_mw, self.power_model.total_power(self.transmit_power_mw, rf_chains, nps))
            }
            PowerMode::FixedTotal => {
                (self.power_model.transmit_budget(self.total_power_mw, rf_chains, nps)?, self.total_power_mw)
            }
        };
        let (prefix, mapping) = match kind {
            ArrayKind::Reduced => ("naosa", self.mapping),
            ArrayKind::Full => ("aosa", MappingKind::Identity),
        };
        Ok(SweepPoint {
            label: format!("{prefix}-{nps}-nc{rf_chains}"),
            kind,
            rf_chains,
            shifters_per_chain,
            mapping,
            transmit_power_mw: transmit,
            total_power_mw: total,
        })
    }

    /// Sweep points in config order: RF-chain counts outermost, then the
    /// shifter counts, then the full-array baseline.
    pub fn sweep_points(&self) -> Result<Vec<SweepPoint>> {
        if !self.sweep_shifters_per_chain.is_empty() && !self.sweep_phase_shifters.is_empty() {
            return config_err("set at most one of sweep_lc and sweep_nps");
        }
        let chains = if self.sweep_rf_chains.is_empty() { vec![self.rf_chains] } else { self.sweep_rf_chains.clone() };
        let n = self.antennas();
        let mut points = Vec::new();
        for &nc in &chains {
            if nc == 0 || !n.is_multiple_of(nc) {
                return config_err(format!("{n} antennas cannot be split into {nc} subarrays"));
            }
            let l = n / nc;
            let per_chain: Vec<usize> = if !self.sweep_shifters_per_chain.is_empty() {
                self.sweep_shifters_per_chain.clone()
            } else if !self.sweep_phase_shifters.is_empty() {
                self.sweep_phase_shifters
                    .iter()
                    .map(|&nps| {
                        if nps % nc != 0 {
                            config_err(format!("{nps} phase shifters cannot be split over {nc} RF chains"))
                        } else {
                            Ok(nps / nc)
                        }
                    })
                    .collect::<Result<_>>()?
            } else {
                vec![self.shifters_per_chain]
            };
            for lc in per_chain {
                if lc == 0 || lc > l {
                    return config_err(format!("need 1 <= L_c <= {l}, got {lc}"));
                }
                points.push(self.point(ArrayKind::Reduced, nc, lc)?);
            }
            if self.include_full_array {
                points.push(self.point(ArrayKind::Full, nc, l)?);
            }
        }
        Ok(points)
    }

    pub fn scenario(&self, point: &SweepPoint) -> Scenario {
        Scenario {
            geometry: ArrayGeometry {
                elevation_elements: self.elevation_elements,
                azimuth_elements: self.azimuth_elements,
                user_antennas: self.user_antennas,
                ..ArrayGeometry::default()
            },
            clusters: ClusterConfig {
                clusters: self.clusters,
                subpaths: self.subpaths,
                angle_spread_deg: self.angle_spread_deg,
            },
            users: self.users,
            rf_chains: point.rf_chains,
            shifters_per_chain: point.shifters_per_chain,
            mapping: point.mapping,
            resolution_bits: self.resolution_bits,
            transmit_power_mw: point.transmit_power_mw,
            noise_power_mw: noise_power_mw(self.noise_density_dbm_hz, self.bandwidth_hz),
            cell_radius_m: self.cell_radius_m,
            min_distance_m: self.min_distance_m,
        }
    }

    /// Checks everything that can be checked before any run starts.
    pub fn validate(&self) -> Result<Vec<SweepPoint>> {
        if self.algorithms.is_empty() {
            return config_err("no algorithm selected");
        }
        if self.seeds.is_empty() {
            return config_err("no seeds");
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d <= 1.0) {
                return config_err(format!("delta must lie in (0, 1], got {d}"));
            }
        }
        if self.max_iters == 0 {
            return config_err("max_iters must be positive");
        }
        let points = self.sweep_points()?;
        for p in &points {
            self.scenario(p).validate()?;
        }
        Ok(points)
    }
}
