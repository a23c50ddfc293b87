//! Per-iteration subproblem solvers: power-constrained quadratic maximizers,
//! the penalized analog update, the max-min saddle and the phase projection.

use nalgebra::SymmetricEigen;

use crate::analog::PhaseGrid;
use crate::error::{config, domain, Error, Result};
use crate::linalg::{c, hermitian_part, identity, regularize, solve_hpd_vec, CMat, CVec};
use crate::precoder::phase_vector;
use crate::surrogates::{gram_sum, linear_value, quadratic_value, ApMinorant, DpMinorant};

const REGULARIZATION: f64 = 1e-12;

/// Total digital power bound `Σ_k ||V_k||^2 <= P_L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallConstraint {
    radius_sq: f64,
}

impl BallConstraint {
    pub fn new(radius_sq: f64) -> Result<Self> {
        if !(radius_sq > 0.0 && radius_sq.is_finite()) {
            return config(format!("power budget must be positive, got {radius_sq}"));
        }
        Ok(Self { radius_sq })
    }

    pub fn radius_sq(&self) -> f64 {
        self.radius_sq
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleSettings {
    pub max_iters: usize,
    /// Initial multiplicative-weights rate, relative to the spread of the
    /// user values; adapted by backtracking afterwards.
    pub weight_step: f64,
    /// Relative duality gap at which the saddle is declared solved.
    pub tolerance: f64,
}

impl Default for SaddleSettings {
    fn default() -> Self {
        Self { max_iters: 500, weight_step: 0.1, tolerance: 1e-6 }
    }
}

impl SaddleSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.weight_step > 0.0) || !(self.tolerance > 0.0) {
            return config("saddle settings must be positive");
        }
        Ok(())
    }
}

/// Finds `μ >= 0` with `power(μ) = target` for a decreasing `power`.
///
/// Returns 0 when `power(0)` already meets the target. The upper end of the
/// final bracket is returned, so `power(μ) <= target` always holds.
pub fn bisect_power_multiplier<F: Fn(f64) -> f64>(power: F, target: f64) -> Result<f64> {
    if !(target > 0.0) {
        return domain(format!("target power must be positive, got {target}"));
    }
    if power(0.0) <= target {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while power(hi) > target {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Numerical("power bracket not found".into()));
        }
    }
    for _ in 0..400 {
        let p = power(hi);
        if target - p <= 1e-12 * target || hi - lo <= f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if power(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (power(hi) - target).abs() > 1e-8 * target {
        return Err(Error::Numerical("power bisection did not reach tolerance".into()));
    }
    Ok(hi)
}

/// Quadratic coefficient of the digital subproblem: one matrix for all users
/// or one per user.
#[derive(Debug, Clone, Copy)]
pub enum DpQuadratic<'a> {
    Shared(&'a CMat),
    PerUser(&'a [CMat]),
}

#[derive(Debug, Clone)]
pub struct DpSolution {
    pub digital: Vec<CMat>,
    pub multiplier: f64,
}

struct Spectral {
    values: Vec<f64>,
    vectors: CMat,
}

fn spectral(m: &CMat) -> Spectral {
    let reg = regularize(&hermitian_part(m), REGULARIZATION);
    let eig = SymmetricEigen::new(reg);
    Spectral { values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
}

/// Maximizes `Σ_k [2Re tr(B_k V_k) - tr(V_k^H C_k V_k)]` over
/// `Σ_k ||V_k||^2 <= P_L`: `V_k = (C_k + μI)^{-1} B_k^H` with the smallest
/// feasible `μ >= 0`.
pub fn solve_weighted_dp(
    linear: &[CMat],
    quadratic: DpQuadratic<'_>,
    ball: &BallConstraint,
) -> Result<DpSolution> {
    let shared = match quadratic {
        DpQuadratic::Shared(m) => Some(spectral(m)),
        DpQuadratic::PerUser(ms) => {
            if ms.len() != linear.len() {
                return config("need one quadratic coefficient per user");
            }
            None
        }
    };
    let own: Vec<Spectral> = match quadratic {
        DpQuadratic::PerUser(ms) => ms.iter().map(spectral).collect(),
        DpQuadratic::Shared(_) => Vec::new(),
    };
    let spec = |k: usize| shared.as_ref().unwrap_or_else(|| &own[k]);

    // Projections of B_k^H onto the eigenbasis, row energies per eigenvalue.
    let proj: Vec<CMat> = linear.iter().enumerate().map(|(k, b)| spec(k).vectors.adjoint() * b.adjoint()).collect();
    let energy: Vec<Vec<f64>> = proj
        .iter()
        .map(|p| p.row_iter().map(|r| r.iter().map(|x| x.norm_sqr()).sum()).collect())
        .collect();
    let power = |mu: f64| -> f64 {
        let mut total = 0.0;
        for (k, e) in energy.iter().enumerate() {
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0.0 {
                    let d = spec(k).values[i] + mu;
                    total += if d > 0.0 { ei / (d * d) } else { f64::INFINITY };
                }
            }
        }
        total
    };
    let mu = bisect_power_multiplier(power, ball.radius_sq())?;
    let digital = proj
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let s = spec(k);
            let mut scaled = p.clone();
            for (i, mut row) in scaled.row_iter_mut().enumerate() {
                let d = s.values[i] + mu;
                let f = if d > 0.0 { 1.0 / d } else { 0.0 };
                row *= c(f, 0.0);
            }
            &s.vectors * scaled
        })
        .collect::<Vec<CMat>>();
    if digital.iter().any(|v| v.iter().any(|x| !x.re.is_finite() || !x.im.is_finite())) {
        return Err(Error::Numerical("digital update is not finite".into()));
    }
    Ok(DpSolution { digital, multiplier: mu })
}

/// Maximizer of `2Re(b z) - z^H C z - γ||z - e^{jθ}||^2`:
/// `z = (C + γI)^{-1}(b^H + γ e^{jθ})`.
pub fn solve_quadratic_ap(linear: &CVec, quadratic: &CMat, gamma: f64, theta: &[f64]) -> Result<CVec> {
    if !(gamma > 0.0) {
        return domain(format!("penalty factor must be positive, got {gamma}"));
    }
    let n = linear.len();
    let m = hermitian_part(quadratic) + identity(n).scale(gamma);
    let rhs = linear.map(|x| x.conj()) + phase_vector(theta).scale(gamma);
    solve_hpd_vec(&m, &rhs)
}

/// Nearest grid phase of every entry; a zero entry maps to phase 0.
pub fn project_theta(z: &CVec, grid: &PhaseGrid) -> Vec<f64> {
    z.iter()
        .map(|x| if x.norm_sqr() == 0.0 { 0.0 } else { grid.quantize(x.arg()) })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SaddleOutcome<T> {
    pub point: T,
    /// Final simplex weights, reusable as a warm start.
    pub weights: Vec<f64>,
    /// `min_k` of the user values at `point`.
    pub value: f64,
    /// Best dual bound minus `value`.
    pub gap: f64,
    pub iterations: usize,
    /// True when no point beating the expansion point was found.
    pub stalled: bool,
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn start_weights(k: usize, warm: Option<&[f64]>) -> Vec<f64> {
    let uniform = vec![1.0 / k as f64; k];
    let Some(w) = warm.filter(|w| w.len() == k) else { return uniform };
    // keep every user reachable by the multiplicative update
    let floored: Vec<f64> = w.iter().map(|&x| if x.is_finite() { x.max(1e-9) } else { 1e-9 }).collect();
    let s: f64 = floored.iter().sum();
    floored.iter().map(|x| x / s).collect()
}

/// Max-min over a family of concave user values by entropic mirror descent
/// on the dual weights. `respond(λ)` must maximize `Σ λ_k v_k`.
fn saddle<T: Clone>(
    users: usize,
    mut respond: impl FnMut(&[f64]) -> Result<T>,
    values: impl Fn(&T) -> Vec<f64>,
    expansion: T,
    warm: Option<&[f64]>,
    settings: &SaddleSettings,
) -> Result<SaddleOutcome<T>> {
    settings.validate()?;
    let base_value = min_of(&values(&expansion));
    let mut lambda = start_weights(users, warm);
    let x = respond(&lambda)?;
    let mut v = values(&x);
    let mut g = dot(&lambda, &v);
    let mut best = (x.clone(), min_of(&v));
    let mut dual = g;
    let spread = v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - best.1;
    let mut eta = settings.weight_step / spread.max(1e-12);
    let mut iterations = 0;

    while iterations < settings.max_iters {
        if users == 1 || dual - best.1 <= settings.tolerance * best.1.abs().max(1.0) {
            break;
        }
        iterations += 1;
        let mut accepted = false;
        for _ in 0..60 {
            let shift = min_of(&v);
            let raw: Vec<f64> = lambda.iter().zip(&v).map(|(l, vk)| l * (-eta * (vk - shift)).exp()).collect();
            let s: f64 = raw.iter().sum();
            let next: Vec<f64> = raw.iter().map(|r| r / s).collect();
            let xn = respond(&next)?;
            let vn = values(&xn);
            let gn = dot(&next, &vn);
            let kl: f64 = next
                .iter()
                .zip(&lambda)
                .filter(|(a, _)| **a > 0.0)
                .map(|(a, b)| a * (a / b).ln())
                .sum();
            let linear: f64 = v.iter().zip(next.iter().zip(&lambda)).map(|(vk, (a, b))| vk * (a - b)).sum();
            let mn = min_of(&vn);
            if mn > best.1 {
                best = (xn, mn);
            }
            dual = dual.min(gn);
            if gn <= g + linear + kl / eta + 1e-14 * g.abs().max(1.0) {
                lambda = next;
                v = vn;
                g = gn;
                eta *= 1.5;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if best.1 < base_value {
        return Ok(SaddleOutcome {
            point: expansion,
            weights: lambda,
            value: base_value,
            gap: dual - base_value,
            iterations,
            stalled: true,
        });
    }
    Ok(SaddleOutcome { point: best.0, weights: lambda, value: best.1, gap: dual - best.1, iterations, stalled: false })
}

/// Value of every DP minorant at `digital`, sharing the Gram sum.
pub fn dp_values(bundles: &[DpMinorant], digital: &[CMat]) -> Vec<f64> {
    let mix = gram_sum(digital);
    bundles
        .iter()
        .map(|b| {
            let lin: f64 = {
                let p = &b.linear * &digital[b.user];
                p.trace().re
            };
            let quad: f64 = b.quadratic.iter().zip(mix.iter()).map(|(x, y)| (x.conj() * y).re).sum();
            b.constant + 2.0 * lin - quad
        })
        .collect()
}

/// `max_V min_k r̃_k(V)` over the power ball.
pub fn maximin_dp(
    bundles: &[DpMinorant],
    ball: &BallConstraint,
    expansion: &[CMat],
    warm: Option<&[f64]>,
    settings: &SaddleSettings,
) -> Result<SaddleOutcome<Vec<CMat>>> {
    if bundles.is_empty() {
        return config("no users");
    }
    let n = bundles[0].quadratic.nrows();
    let respond = |lambda: &[f64]| -> Result<Vec<CMat>> {
        let mut quad = CMat::zeros(n, n);
        let mut linear = Vec::with_capacity(bundles.len());
        for (b, &l) in bundles.iter().zip(lambda) {
            quad += b.quadratic.scale(l);
            linear.push(b.linear.scale(l));
        }
        Ok(solve_weighted_dp(&linear, DpQuadratic::Shared(&quad), ball)?.digital)
    };
    saddle(bundles.len(), respond, |v| dp_values(bundles, v), expansion.to_vec(), warm, settings)
}

/// Values `r̃_k(z) - γ||z - e^{jθ}||^2` of every AP minorant.
pub fn ap_values(bundles: &[ApMinorant], gamma: f64, theta: &[f64], z: &CVec) -> Vec<f64> {
    let pen = (z - phase_vector(theta)).norm_squared();
    bundles
        .iter()
        .map(|b| b.constant + 2.0 * linear_value(&b.linear, z) - quadratic_value(&b.quadratic, z) - gamma * pen)
        .collect()
}

/// `max_z [min_k r̃_k(z) - γ||z - e^{jθ}||^2]`.
pub fn maximin_ap(
    bundles: &[ApMinorant],
    gamma: f64,
    theta: &[f64],
    expansion: &CVec,
    warm: Option<&[f64]>,
    settings: &SaddleSettings,
) -> Result<SaddleOutcome<CVec>> {
    if bundles.is_empty() {
        return config("no users");
    }
    let n = bundles[0].linear.len();
    let respond = |lambda: &[f64]| -> Result<CVec> {
        let mut quad = CMat::zeros(n, n);
        let mut linear = CVec::zeros(n);
        for (b, &l) in bundles.iter().zip(lambda) {
            quad += b.quadratic.scale(l);
            linear += b.linear.scale(l);
        }
        solve_quadratic_ap(&linear, &quad, gamma, theta)
    };
    saddle(bundles.len(), respond, |z| ap_values(bundles, gamma, theta, z), expansion.clone(), warm, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cis, norm_sq};
    use std::f64::consts::PI;

    #[test]
    fn bisection_scalar_case() {
        let mu = bisect_power_multiplier(|m| 1.0 / ((1.0 + m) * (1.0 + m)), 0.25).unwrap();
        assert!((mu - 1.0).abs() < 1e-8);
        assert_eq!(bisect_power_multiplier(|_| 0.1, 0.25).unwrap(), 0.0);
        assert!(bisect_power_multiplier(|_| 1.0, 0.25).is_err());
    }

    #[test]
    fn zero_linear_gives_zero() {
        let b = vec![CMat::zeros(2, 3)];
        let cq = identity(3);
        let sol = solve_weighted_dp(&b, DpQuadratic::Shared(&cq), &BallConstraint::new(1.0).unwrap()).unwrap();
        assert_eq!(sol.multiplier, 0.0);
        assert!(norm_sq(&sol.digital[0]) == 0.0);
    }

    #[test]
    fn active_constraint_hits_budget() {
        let b = vec![CMat::from_element(1, 2, c(3.0, 1.0)), CMat::from_element(1, 2, c(-1.0, 2.0))];
        let cq = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(0.5, 0.0)]);
        let ball = BallConstraint::new(0.5).unwrap();
        let sol = solve_weighted_dp(&b, DpQuadratic::Shared(&cq), &ball).unwrap();
        let p: f64 = sol.digital.iter().map(norm_sq).sum();
        assert!(sol.multiplier > 0.0);
        assert!((p - 0.5).abs() <= 1e-8 * 0.5);
    }

    #[test]
    fn ap_reduces_to_anchor() {
        let theta = vec![0.0, PI / 2.0, PI];
        let z = solve_quadratic_ap(&CVec::zeros(3), &CMat::zeros(3, 3), 2.0, &theta).unwrap();
        for (zi, t) in z.iter().zip(&theta) {
            assert!((zi - cis(*t)).norm() < 1e-14);
        }
        assert!(solve_quadratic_ap(&CVec::zeros(3), &CMat::zeros(3, 3), 0.0, &theta).is_err());
    }

    #[test]
    fn projection_fixed_points() {
        let g = PhaseGrid::new(2).unwrap();
        let z = CVec::from_vec(vec![c(2.0, 0.0), c(0.0, 0.0), cis(PI / 2.0), cis(-0.1)]);
        let t = project_theta(&z, &g);
        assert_eq!(t, vec![0.0, 0.0, PI / 2.0, 0.0]);
        let again = project_theta(&phase_vector(&t), &g);
        assert_eq!(again, t);
    }
}
