//! Independent references for the solvers and the analog search.

use naosa_core::linalg::{c, hermitian_eigenvalues, identity, CMat, CVec};
use naosa_core::precoder::{phase_vector, transmit_power, HybridSystem};
use naosa_core::solvers::{ap_values, dp_values};
use naosa_core::surrogates::{ApMinorant, DpMinorant};
use rand::Rng;

pub fn real_spd(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> CMat {
    let a = CMat::from_fn(n, n, |_, _| c(r.random_range(-1.0..1.0), 0.0));
    &a * a.transpose() + identity(n).scale(0.2)
}

pub fn real_mat(r: &mut rand_chacha::ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c(r.random_range(-scale..scale), 0.0))
}

pub fn lmax(m: &CMat) -> f64 {
    *hermitian_eigenvalues(m).last().unwrap()
}

/// Projected gradient ascent on `Σ_k [a_k + 2Re tr(B_k V_k) - Σ_j tr(V_j^H C_k V_j)]`
/// with weights `λ` over the power ball.
pub fn pga_dp(bundles: &[DpMinorant], lambda: &[f64], budget: f64, users: usize) -> (Vec<CMat>, f64) {
    let n = bundles[0].quadratic.nrows();
    let nt = bundles[0].linear.nrows();
    let quad = bundles.iter().zip(lambda).fold(CMat::zeros(n, n), |acc, (b, &l)| acc + b.quadratic.scale(l));
    let step = 0.5 / lmax(&quad).max(1e-9);
    let mut v: Vec<CMat> = vec![CMat::zeros(n, nt); users];
    for _ in 0..20_000 {
        for k in 0..users {
            let mut grad = -(&quad * &v[k]);
            for (b, &l) in bundles.iter().zip(lambda) {
                if b.user == k {
                    grad += b.linear.adjoint().scale(l);
                }
            }
            v[k] += grad.scale(2.0 * step);
        }
        let p = transmit_power(&v);
        if p > budget {
            let f = (budget / p).sqrt();
            v.iter_mut().for_each(|m| *m = m.scale(f));
        }
    }
    let vals = dp_values(bundles, &v);
    let weighted = vals.iter().zip(lambda).map(|(x, l)| x * l).sum();
    (v, weighted)
}

pub fn pga_ap(bundles: &[ApMinorant], lambda: &[f64], gamma: f64, theta: &[f64]) -> (CVec, f64) {
    let n = bundles[0].linear.len();
    let quad = bundles.iter().zip(lambda).fold(CMat::zeros(n, n), |acc, (b, &l)| acc + b.quadratic.scale(l));
    let lin = bundles.iter().zip(lambda).fold(CVec::zeros(n), |acc, (b, &l)| acc + b.linear.scale(l));
    let anchor = phase_vector(theta);
    let step = 0.5 / (lmax(&quad) + gamma);
    let mut z = anchor.clone();
    for _ in 0..20_000 {
        let grad = lin.map(|x| x.conj()) - &quad * &z - (&z - &anchor).scale(gamma);
        z += grad.scale(2.0 * step);
    }
    let vals = ap_values(bundles, gamma, theta, &z);
    let weighted = vals.iter().zip(lambda).map(|(x, l)| x * l).sum();
    (z, weighted)
}

/// Minimizes the convex dual function over `λ ∈ [0, 1]` by golden section.
pub fn golden_min<F: Fn(f64) -> f64>(f: F) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0))
}

pub fn tiny_dp_bundles(r: &mut rand_chacha::ChaCha8Rng) -> Vec<DpMinorant> {
    (0..2)
        .map(|k| DpMinorant {
            user: k,
            constant: r.random_range(0.0..1.0),
            linear: real_mat(r, 1, 2, 1.0),
            quadratic: real_spd(r, 2),
            upsilon: identity(1),
        })
        .collect()
}

pub fn tiny_ap_bundles(r: &mut rand_chacha::ChaCha8Rng) -> Vec<ApMinorant> {
    (0..2)
        .map(|_| ApMinorant {
            constant: r.random_range(0.0..1.0),
            linear: CVec::from_fn(2, |_, _| c(r.random_range(-1.0..1.0), 0.0)),
            quadratic: real_spd(r, 2),
            upsilon: identity(1),
        })
        .collect()
}

/// Single-user capacity `max ln|I + H V V^H H^H / σ|` over `||V||^2 <= P` by
/// water-filling on the eigenvalues of `H^H H / σ`.
pub fn water_filling(gains: &[f64], budget: f64) -> f64 {
    let g: Vec<f64> = gains.iter().copied().filter(|&x| x > 1e-15).collect();
    if g.is_empty() {
        return 0.0;
    }
    let alloc = |level: f64| g.iter().map(|&x| (level - 1.0 / x).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, budget + g.iter().map(|x| 1.0 / x).fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if alloc(mid) > budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    g.iter().map(|&x| (1.0 + x * (lo - 1.0 / x).max(0.0)).ln()).sum()
}

pub fn exhaustive_best(sys: &HybridSystem) -> f64 {
    let n = sys.analog_len();
    let levels = sys.grid().levels();
    let mut best = 0.0f64;
    let mut idx = vec![0usize; n];
    loop {
        let phases: Vec<f64> = idx.iter().map(|&i| sys.grid().level(i)).collect();
        let h = sys.effective(0, &phase_vector(&phases));
        let gains = hermitian_eigenvalues(&(h.adjoint() * &h).scale(1.0 / sys.noise()));
        best = best.max(water_filling(&gains, sys.power_budget()));
        let mut pos = 0;
        while pos < n {
            idx[pos] += 1;
            if idx[pos] < levels {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == n {
            return best;
        }
    }
}

