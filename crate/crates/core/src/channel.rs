//! Clustered mmWave channels between a cylindrical-array base station and
//! users equipped with half-wavelength linear arrays.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{config, domain, Result};
use crate::linalg::{c, cis, CMat, CVec};
use crate::scenario::Scenario;

/// Base-station cylinder and user array dimensions. Lengths are in
/// wavelengths so no carrier frequency is needed.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub elevation_elements: usize,
    pub azimuth_elements: usize,
    pub user_antennas: usize,
    pub ucya_radius_wavelengths: f64,
    pub vertical_spacing_wavelengths: f64,
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        Self {
            elevation_elements: 12,
            azimuth_elements: 12,
            user_antennas: 2,
            ucya_radius_wavelengths: 2.0,
            vertical_spacing_wavelengths: 0.5,
        }
    }
}

impl ArrayGeometry {
    /// Total base-station antenna count `N = N_e * N_a`.
    pub fn antennas(&self) -> usize {
        self.elevation_elements * self.azimuth_elements
    }

    pub fn validate(&self) -> Result<()> {
        if self.elevation_elements == 0 || self.azimuth_elements == 0 || self.user_antennas == 0 {
            return config("array element counts must be at least 1");
        }
        if !(self.ucya_radius_wavelengths.is_finite() && self.vertical_spacing_wavelengths.is_finite()) {
            return config("array lengths must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    pub clusters: usize,
    pub subpaths: usize,
    /// Standard deviation of the per-subpath Laplacian deviation, degrees.
    pub angle_spread_deg: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self { clusters: 5, subpaths: 10, angle_spread_deg: 10.0 }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 || self.subpaths == 0 {
            return config("cluster and subpath counts must be at least 1");
        }
        if !(self.angle_spread_deg >= 0.0) {
            return config("angle spread must be non-negative");
        }
        Ok(())
    }
}

/// Departure azimuth/elevation and arrival azimuth of one subpath, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAngles {
    pub cluster: usize,
    pub departure_azimuth: f64,
    pub departure_elevation: f64,
    pub arrival_azimuth: f64,
}

/// Path loss in dB at distance `d` meters.
pub fn path_loss_db(distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return domain(format!("distance must be positive, got {distance_m}"));
    }
    Ok(36.72 + 35.3 * distance_m.log10())
}

/// Half-wavelength ULA response, unit norm.
pub fn ula_response(phi: f64, elements: usize) -> CVec {
    let norm = 1.0 / (elements as f64).sqrt();
    let s = phi.sin();
    CVec::from_iterator(elements, (0..elements).map(|n| cis(PI * n as f64 * s) * norm))
}

/// Cylindrical array response `a^a(phi, theta) ⊗ a^e(theta)`, unit norm.
///
/// Antenna `n` is indexed as `n_a * N_e + n_e`.
pub fn ucya_response(phi: f64, theta: f64, geom: &ArrayGeometry) -> CVec {
    let na = geom.azimuth_elements;
    let ne = geom.elevation_elements;
    let k_r = TAU * geom.ucya_radius_wavelengths * theta.sin();
    let k_h = TAU * geom.vertical_spacing_wavelengths * theta.cos();
    let sa = 1.0 / (na as f64).sqrt();
    let se = 1.0 / (ne as f64).sqrt();
    let azimuth: Vec<_> = (0..na)
        .map(|i| {
            let offset = TAU * i as f64 / na as f64;
            cis(k_r * (phi - offset).cos()) * sa
        })
        .collect();
    let elevation: Vec<_> = (0..ne).map(|i| cis(-k_h * i as f64) * se).collect();
    let mut out = CVec::zeros(na * ne);
    for (i, a) in azimuth.iter().enumerate() {
        for (j, e) in elevation.iter().enumerate() {
            out[i * ne + j] = a * e;
        }
    }
    out
}

fn laplacian<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    // inverse CDF on u in (-1/2, 1/2)
    let u: f64 = rng.random::<f64>() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

/// Draws `clusters * subpaths` angle triples: uniform cluster means on
/// `[0, 2π)` and Laplacian per-subpath deviations, wrapped into `[0, 2π)`.
pub fn sample_angles<R: Rng + ?Sized>(rng: &mut R, cfg: &ClusterConfig) -> Vec<PathAngles> {
    // std of a Laplacian with scale b is b·√2
    let scale = cfg.angle_spread_deg.to_radians() / 2f64.sqrt();
    let mut out = Vec::with_capacity(cfg.clusters * cfg.subpaths);
    for cluster in 0..cfg.clusters {
        let means: [f64; 3] = [
            rng.random::<f64>() * TAU,
            rng.random::<f64>() * TAU,
            rng.random::<f64>() * TAU,
        ];
        for _ in 0..cfg.subpaths {
            let [a, b, r] = means.map(|m| (m + laplacian(rng, scale)).rem_euclid(TAU));
            out.push(PathAngles {
                cluster,
                departure_azimuth: a,
                departure_elevation: b,
                arrival_azimuth: r,
            });
        }
    }
    out
}

/// Per-user channel matrices `H_k` (`N_t x N`) partitioned into `N_c`
/// subarray blocks of `L` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    matrices: Vec<CMat>,
    subarray: usize,
    path_loss_db: Vec<f64>,
}

impl ChannelSet {
    /// Wraps raw channel matrices; all must share a shape whose column count
    /// is divisible by `rf_chains`.
    pub fn from_matrices(matrices: Vec<CMat>, rf_chains: usize) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return config("channel set needs at least one user");
        };
        let (nt, n) = first.shape();
        if rf_chains == 0 || n % rf_chains != 0 {
            return config(format!("{n} antennas cannot be split into {rf_chains} subarrays"));
        }
        if matrices.iter().any(|h| h.shape() != (nt, n)) {
            return config("channel matrices must share dimensions");
        }
        if matrices.iter().any(|h| h.iter().any(|x| !x.re.is_finite() || !x.im.is_finite())) {
            return config("channel entries must be finite");
        }
        let users = matrices.len();
        Ok(Self { matrices, subarray: n / rf_chains, path_loss_db: vec![0.0; users] })
    }

    pub fn with_path_loss(mut self, path_loss_db: Vec<f64>) -> Self {
        assert_eq!(path_loss_db.len(), self.matrices.len());
        self.path_loss_db = path_loss_db;
        self
    }

    pub fn users(&self) -> usize {
        self.matrices.len()
    }

    pub fn rx_antennas(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn antennas(&self) -> usize {
        self.matrices[0].ncols()
    }

    pub fn subarray_size(&self) -> usize {
        self.subarray
    }

    pub fn rf_chains(&self) -> usize {
        self.antennas() / self.subarray
    }

    pub fn path_loss_db(&self) -> &[f64] {
        &self.path_loss_db
    }

    pub fn matrix(&self, k: usize) -> &CMat {
        &self.matrices[k]
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    /// Block `H_{k,n_c}` (`N_t x L`).
    pub fn block(&self, k: usize, chain: usize) -> CMat {
        self.matrices[k].columns(chain * self.subarray, self.subarray).into_owned()
    }

    /// Row `H_{k,n_c}(n_t)` (`1 x L`).
    pub fn block_row(&self, k: usize, chain: usize, rx: usize) -> CMat {
        self.matrices[k].view((rx, chain * self.subarray), (1, self.subarray)).into_owned()
    }

    /// Concatenates the block views back into `H_k`.
    pub fn reassemble(&self, k: usize) -> CMat {
        let blocks: Vec<CMat> = (0..self.rf_chains()).map(|n| self.block(k, n)).collect();
        let mut out = CMat::zeros(self.rx_antennas(), self.antennas());
        for (n, b) in blocks.iter().enumerate() {
            out.columns_mut(n * self.subarray, self.subarray).copy_from(b);
        }
        out
    }

    /// Multiplies every channel by `factor`; used to normalize noise to 1.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrices: self.matrices.iter().map(|h| h.scale(factor)).collect(),
            subarray: self.subarray,
            path_loss_db: self.path_loss_db.clone(),
        }
    }
}

/// Evaluates the clustered sum for one user from explicit gains and angles.
pub fn channel_from_paths(
    geom: &ArrayGeometry,
    path_loss_db: f64,
    gains: &[num_complex::Complex64],
    paths: &[PathAngles],
) -> CMat {
    assert_eq!(gains.len(), paths.len());
    let n = geom.antennas();
    let nt = geom.user_antennas;
    let amplitude =
        ((n * nt) as f64 / paths.len() as f64).sqrt() * 10f64.powf(-path_loss_db / 20.0);
    let mut h = CMat::zeros(nt, n);
    for (g, p) in gains.iter().zip(paths) {
        let ar = ula_response(p.arrival_azimuth, nt);
        let at = ucya_response(p.departure_azimuth, p.departure_elevation, geom);
        h += (&ar * at.adjoint()) * *g;
    }
    h * c(amplitude, 0.0)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws a distance uniformly over the area of the annulus `[inner, outer]`.
pub fn sample_distance<R: Rng + ?Sized>(rng: &mut R, inner: f64, outer: f64) -> f64 {
    let u: f64 = rng.random();
    (inner * inner + u * (outer * outer - inner * inner)).sqrt()
}

/// Generates one channel realization for every user of the scenario.
pub fn generate_channels<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<ChannelSet> {
    scenario.validate()?;
    let geom = &scenario.geometry;
    let mut matrices = Vec::with_capacity(scenario.users);
    let mut losses = Vec::with_capacity(scenario.users);
    for _ in 0..scenario.users {
        let d = sample_distance(rng, scenario.min_distance_m, scenario.cell_radius_m);
        let pl = path_loss_db(d)?;
        let paths = sample_angles(rng, &scenario.clusters);
        let gains: Vec<_> = paths.iter().map(|_| complex_gaussian(rng)).collect();
        matrices.push(channel_from_paths(geom, pl, &gains, &paths));
        losses.push(pl);
    }
    Ok(ChannelSet::from_matrices(matrices, scenario.rf_chains)?.with_path_loss(losses))
}
