#![allow(dead_code)]

use naosa_core::analog::{MappingKind, MappingMatrix, PhaseGrid};
use naosa_core::channel::ChannelSet;
use naosa_core::linalg::{c, CMat, CVec};
use naosa_core::precoder::{rescale_to_budget, HybridSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub mod oracles;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| gaussian(rng))
}

/// Random Hermitian positive definite matrix.
pub fn random_hpd(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> CMat {
    let a = gaussian_mat(rng, n, n);
    &a * a.adjoint() + naosa_core::linalg::identity(n).scale(floor)
}

/// A random desk-scale system with its raw pieces.
pub struct Instance {
    pub channels: ChannelSet,
    pub mapping: MappingMatrix,
    pub system: HybridSystem,
    pub digital: Vec<CMat>,
    pub analog: CVec,
}

pub struct Dims {
    pub users: usize,
    pub rf_chains: usize,
    pub rx: usize,
    pub subarray: usize,
    pub shifters: usize,
}

pub fn random_dims(rng: &mut ChaCha8Rng, max_users: usize, max_chains: usize, max_rx: usize) -> Dims {
    let subarray = rng.random_range(1..=4);
    Dims {
        users: rng.random_range(1..=max_users),
        rf_chains: rng.random_range(1..=max_chains),
        rx: rng.random_range(1..=max_rx),
        subarray,
        shifters: rng.random_range(1..=subarray),
    }
}

pub fn instance(rng: &mut ChaCha8Rng, dims: &Dims) -> Instance {
    let n = dims.rf_chains * dims.subarray;
    let matrices = (0..dims.users).map(|_| gaussian_mat(rng, dims.rx, n)).collect();
    let channels = ChannelSet::from_matrices(matrices, dims.rf_chains).unwrap();
    let kind = if dims.shifters == dims.subarray { MappingKind::Identity } else { MappingKind::Balanced };
    let mapping = MappingMatrix::new(kind, dims.subarray, dims.shifters).unwrap();
    let noise = rng.random_range(0.05..2.0);
    let budget = rng.random_range(0.5..4.0);
    let system = HybridSystem::new(&channels, &mapping, PhaseGrid::new(3).unwrap(), noise, budget).unwrap();
    let mut digital: Vec<CMat> = (0..dims.users).map(|_| gaussian_mat(rng, dims.rf_chains, dims.rx)).collect();
    rescale_to_budget(&mut digital, budget);
    let analog = gaussian_vec(rng, dims.rf_chains * dims.shifters);
    Instance { channels, mapping, system, digital, analog }
}

pub fn random_instance(seed: u64, max_users: usize, max_chains: usize, max_rx: usize) -> Instance {
    let mut r = rng(seed);
    let dims = random_dims(&mut r, max_users, max_chains, max_rx);
    instance(&mut r, &dims)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Real coordinates of a list of complex matrices, in a fixed order.
pub fn flatten(ms: &[CMat]) -> Vec<f64> {
    ms.iter().flat_map(|m| m.iter().flat_map(|x| [x.re, x.im])).collect()
}

/// Inverse of [`flatten`]; entries are column-major like nalgebra's iterators.
pub fn unflatten(template: &[CMat], xs: &[f64]) -> Vec<CMat> {
    let mut out = Vec::with_capacity(template.len());
    let mut offset = 0;
    for m in template {
        let len = m.len();
        let entries: Vec<num_complex::Complex64> =
            xs[offset..offset + 2 * len].chunks(2).map(|p| c(p[0], p[1])).collect();
        out.push(CMat::from_column_slice(m.nrows(), m.ncols(), &entries));
        offset += 2 * len;
    }
    out
}

/// Central-difference gradient over the real coordinates.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], step: f64) -> Vec<f64> {
    let mut g = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let up = f(&probe);
        probe[i] = x[i] - step;
        let down = f(&probe);
        probe[i] = x[i];
        g.push((up - down) / (2.0 * step));
    }
    g
}

pub fn vec_rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1e-8);
    diff / scale
}

pub fn cvec_to_reals(z: &CVec) -> Vec<f64> {
    z.iter().flat_map(|x| [x.re, x.im]).collect()
}

pub fn reals_to_cvec(xs: &[f64]) -> CVec {
    CVec::from_iterator(xs.len() / 2, xs.chunks(2).map(|p| c(p[0], p[1])))
}
