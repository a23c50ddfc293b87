//! Tight quadratic minorants and majorants of the log-det objectives.
//!
//! Every bundle touches its target at the expansion point and bounds it
//! globally; the solvers only ever see the quadratic coefficients.

use crate::error::{domain, Result};
use crate::linalg::{gram, hermitian_part, identity, inv_hpd, is_hpd, logdet_hpd, trace, CMat, CVec};
use crate::precoder::HybridSystem;
use crate::throughput::interference_covariance;

/// `Re tr(A B)`.
fn re_tr_prod(a: &CMat, b: &CMat) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// `Re(z^H C z)`.
pub fn quadratic_value(c: &CMat, z: &CVec) -> f64 {
    (z.adjoint() * c * z)[(0, 0)].re
}

/// `Re(Σ_i b_i z_i)`.
pub fn linear_value(b: &CVec, z: &CVec) -> f64 {
    b.iter().zip(z.iter()).map(|(x, y)| (x * y).re).sum()
}

/// Lower bound of `ln|I + [X]^2 Y^{-1}|` expanded at `(X̄, Ȳ)`.
#[derive(Debug, Clone)]
pub struct LogdetMinorant {
    value: f64,
    /// `X̄^H Ȳ^{-1}`.
    coef: CMat,
    /// `tr([X̄]^2 Ȳ^{-1})`.
    offset: f64,
    upsilon: CMat,
}

impl LogdetMinorant {
    pub fn new(xbar: &CMat, ybar: &CMat) -> Result<Self> {
        if !is_hpd(ybar) {
            return domain("expansion covariance is not positive definite");
        }
        let ybar_inv = inv_hpd(ybar)?;
        let outer = gram(xbar);
        let upsilon = hermitian_part(&(&ybar_inv - inv_hpd(&(ybar + &outer))?));
        let coef = xbar.adjoint() * &ybar_inv;
        let offset = re_tr_prod(&coef, xbar);
        let value = logdet_hpd(&(ybar + outer))? - logdet_hpd(ybar)?;
        Ok(Self { value, coef, offset, upsilon })
    }

    /// `ln|I + [X̄]^2 Ȳ^{-1}|`.
    pub fn expansion_value(&self) -> f64 {
        self.value
    }

    /// `Υ = Ȳ^{-1} - (Ȳ + [X̄]^2)^{-1}`.
    pub fn upsilon(&self) -> &CMat {
        &self.upsilon
    }

    /// `X̄^H Ȳ^{-1}`.
    pub fn coefficient(&self) -> &CMat {
        &self.coef
    }

    /// Constant part once the `Y`-dependent term is split off.
    fn base(&self) -> f64 {
        self.value - self.offset
    }

    pub fn evaluate(&self, x: &CMat, y: &CMat) -> f64 {
        self.base() + 2.0 * re_tr_prod(&self.coef, x) - re_tr_prod(&self.upsilon, &(gram(x) + y))
    }
}

pub fn logdet_minorant(xbar: &CMat, ybar: &CMat) -> Result<LogdetMinorant> {
    LogdetMinorant::new(xbar, ybar)
}

/// `ln|Σ_k (I - X_k^H Y_k^{-1} X_k)|`.
pub fn log_det_pi(xs: &[CMat], ys: &[CMat]) -> Result<f64> {
    let m = xs.first().map_or(0, |x| x.ncols());
    let mut pi = CMat::zeros(m, m);
    for (x, y) in xs.iter().zip(ys) {
        pi += identity(m) - x.adjoint() * inv_hpd(y)? * x;
    }
    if !is_hpd(&pi) {
        return domain("matrix sum is not positive definite");
    }
    logdet_hpd(&pi)
}

/// Upper bound of `ln|Σ_k (I - X_k^H Y_k^{-1} X_k)|` expanded at
/// `(X̄_k, Ȳ_k)`, valid on `[X_k]^2 ≺ Y_k`.
#[derive(Debug, Clone)]
pub struct LogdetMajorant {
    offset: f64,
    /// `Π̄^{-1} X̄_k^H Ȳ_k^{-1}`.
    coefs: Vec<CMat>,
    /// `Ȳ_k^{-1} X̄_k Π̄^{-1} X̄_k^H Ȳ_k^{-1}`.
    weights: Vec<CMat>,
    value: f64,
}

impl LogdetMajorant {
    pub fn new(xbars: &[CMat], ybars: &[CMat]) -> Result<Self> {
        if xbars.len() != ybars.len() || xbars.is_empty() {
            return domain("need one covariance per signal block");
        }
        let m = xbars[0].ncols();
        let mut pi = CMat::zeros(m, m);
        let mut yx = Vec::with_capacity(xbars.len());
        for (x, y) in xbars.iter().zip(ybars) {
            if !is_hpd(&(y - gram(x))) {
                return domain("expansion point violates [X]^2 < Y");
            }
            let t = inv_hpd(y)? * x;
            pi += identity(m) - x.adjoint() * &t;
            yx.push(t);
        }
        if !is_hpd(&pi) {
            return domain("matrix sum is not positive definite");
        }
        let value = logdet_hpd(&pi)?;
        let pi_inv = inv_hpd(&pi)?;
        let mut offset = value;
        let mut coefs = Vec::with_capacity(yx.len());
        let mut weights = Vec::with_capacity(yx.len());
        for (t, x) in yx.iter().zip(xbars) {
            let coef = &pi_inv * t.adjoint();
            offset += re_tr_prod(&coef, x);
            weights.push(hermitian_part(&(t * &coef)));
            coefs.push(coef);
        }
        Ok(Self { offset, coefs, weights, value })
    }

    pub fn expansion_value(&self) -> f64 {
        self.value
    }

    pub fn coefficients(&self) -> &[CMat] {
        &self.coefs
    }

    pub fn weights(&self) -> &[CMat] {
        &self.weights
    }

    pub fn evaluate(&self, xs: &[CMat], ys: &[CMat]) -> f64 {
        let mut v = self.offset;
        for k in 0..self.coefs.len() {
            v += -2.0 * re_tr_prod(&self.coefs[k], &xs[k]) + re_tr_prod(&self.weights[k], &ys[k]);
        }
        v
    }
}

pub fn logdet_majorant(xbars: &[CMat], ybars: &[CMat]) -> Result<LogdetMajorant> {
    LogdetMajorant::new(xbars, ybars)
}

/// Minorant of one user's throughput as a function of all digital
/// precoders: `a + 2Re tr(B V_k) - Σ_j tr(V_j^H C V_j)`.
#[derive(Debug, Clone)]
pub struct DpMinorant {
    pub user: usize,
    pub constant: f64,
    pub linear: CMat,
    pub quadratic: CMat,
    pub upsilon: CMat,
}

impl DpMinorant {
    pub fn value(&self, digital: &[CMat]) -> f64 {
        let quad: f64 = digital.iter().map(|v| re_tr_prod(&v.adjoint(), &(&self.quadratic * v))).sum();
        self.constant + 2.0 * re_tr_prod(&self.linear, &digital[self.user]) - quad
    }
}

pub fn dp_minorant(effective: &[CMat], digital: &[CMat], noise: f64) -> Result<Vec<DpMinorant>> {
    effective
        .iter()
        .enumerate()
        .map(|(k, h)| {
            let x = h * &digital[k];
            let psi = interference_covariance(h, digital, k, noise);
            let m = LogdetMinorant::new(&x, &psi)?;
            let constant = m.base() - noise * trace(m.upsilon()).re;
            Ok(DpMinorant {
                user: k,
                constant,
                linear: m.coefficient() * h,
                quadratic: hermitian_part(&(h.adjoint() * m.upsilon() * h)),
                upsilon: m.upsilon().clone(),
            })
        })
        .collect()
}

/// Minorant of one user's throughput as a function of `z`:
/// `a + 2Re(b z) - z^H C z`.
#[derive(Debug, Clone)]
pub struct ApMinorant {
    pub constant: f64,
    pub linear: CVec,
    pub quadratic: CMat,
    pub upsilon: CMat,
}

impl ApMinorant {
    pub fn value(&self, z: &CVec) -> f64 {
        self.constant + 2.0 * linear_value(&self.linear, z) - quadratic_value(&self.quadratic, z)
    }
}

/// `Σ_k V_k V_k^H`.
pub fn gram_sum(digital: &[CMat]) -> CMat {
    let n = digital.first().map_or(0, |v| v.nrows());
    digital.iter().fold(CMat::zeros(n, n), |acc, v| acc + gram(v))
}

pub fn ap_minorant(system: &HybridSystem, digital: &[CMat], z: &CVec) -> Result<Vec<ApMinorant>> {
    let noise = system.noise();
    let effective = system.effective_all(z);
    let mix = gram_sum(digital);
    effective
        .iter()
        .enumerate()
        .map(|(k, h)| {
            let x = h * &digital[k];
            let psi = interference_covariance(h, digital, k, noise);
            let m = LogdetMinorant::new(&x, &psi)?;
            Ok(ApMinorant {
                constant: m.base() - noise * trace(m.upsilon()).re,
                linear: system.linear_lift(k, m.coefficient(), &digital[k]),
                quadratic: hermitian_part(&system.quadratic_lift(k, m.upsilon(), &mix)),
                upsilon: m.upsilon().clone(),
            })
        })
        .collect()
}

/// Majorant of `ln|Ξ_δ|` over the digital precoders:
/// `a - 2Σ_k Re tr(B_k V_k) + Σ_k tr(V_k^H C_k V_k)`.
#[derive(Debug, Clone)]
pub struct DpMajorant {
    pub constant: f64,
    pub linear: Vec<CMat>,
    pub quadratic: Vec<CMat>,
    /// Per-user weights on the `Y_k` terms.
    pub weights: Vec<CMat>,
}

impl DpMajorant {
    pub fn value(&self, digital: &[CMat]) -> f64 {
        let mut v = self.constant;
        for (k, d) in digital.iter().enumerate() {
            v += -2.0 * re_tr_prod(&self.linear[k], d) + re_tr_prod(&d.adjoint(), &(&self.quadratic[k] * d));
        }
        v
    }
}

fn soft_expansion(
    effective: &[CMat],
    digital: &[CMat],
    noise: f64,
    delta: f64,
) -> Result<(Vec<CMat>, LogdetMajorant)> {
    if !(delta > 0.0 && delta <= 1.0) {
        return domain(format!("delta must lie in (0, 1], got {delta}"));
    }
    let mut xs = Vec::with_capacity(effective.len());
    let mut ys = Vec::with_capacity(effective.len());
    for (k, h) in effective.iter().enumerate() {
        let x = h * &digital[k];
        let psi = interference_covariance(h, digital, k, noise);
        ys.push(gram(&x) + psi.scale(delta));
        xs.push(x);
    }
    let major = LogdetMajorant::new(&xs, &ys)?;
    Ok((xs, major))
}

pub fn softmin_majorant_dp(
    effective: &[CMat],
    digital: &[CMat],
    noise: f64,
    delta: f64,
) -> Result<DpMajorant> {
    let (_, major) = soft_expansion(effective, digital, noise, delta)?;
    let w = major.weights();
    let lifted: Vec<CMat> = effective.iter().zip(w).map(|(h, c)| h.adjoint() * c * h).collect();
    let total = lifted.iter().fold(CMat::zeros(lifted[0].nrows(), lifted[0].ncols()), |acc, m| acc + m);
    let quadratic = lifted
        .iter()
        .map(|own| hermitian_part(&(own + (&total - own).scale(delta))))
        .collect();
    let linear = effective.iter().zip(major.coefficients()).map(|(h, b)| b * h).collect();
    let constant = major.offset + delta * noise * w.iter().map(|c| trace(c).re).sum::<f64>();
    Ok(DpMajorant { constant, linear, quadratic, weights: w.to_vec() })
}

/// Majorant of `ln|Ξ_δ|` over `z`: `a - 2Re(b z) + z^H C z`, with the
/// per-user pieces whose sums give `b` and `C`.
#[derive(Debug, Clone)]
pub struct ApMajorant {
    pub constant: f64,
    pub linear: CVec,
    pub quadratic: CMat,
    pub user_linear: Vec<CVec>,
    pub user_quadratic: Vec<CMat>,
    pub weights: Vec<CMat>,
}

impl ApMajorant {
    pub fn value(&self, z: &CVec) -> f64 {
        self.constant - 2.0 * linear_value(&self.linear, z) + quadratic_value(&self.quadratic, z)
    }
}

pub fn softmin_majorant_ap(
    system: &HybridSystem,
    digital: &[CMat],
    z: &CVec,
    delta: f64,
) -> Result<ApMajorant> {
    let noise = system.noise();
    let effective = system.effective_all(z);
    let (_, major) = soft_expansion(&effective, digital, noise, delta)?;
    let total = gram_sum(digital);
    let mut user_linear = Vec::with_capacity(digital.len());
    let mut user_quadratic = Vec::with_capacity(digital.len());
    for (k, v) in digital.iter().enumerate() {
        let own = gram(v);
        let mix = &own + (&total - &own).scale(delta);
        user_linear.push(system.linear_lift(k, &major.coefficients()[k], v));
        user_quadratic.push(hermitian_part(&system.quadratic_lift(k, &major.weights()[k], &mix)));
    }
    let n = system.analog_len();
    let linear = user_linear.iter().fold(CVec::zeros(n), |acc, b| acc + b);
    let quadratic = user_quadratic.iter().fold(CMat::zeros(n, n), |acc, c| acc + c);
    let constant =
        major.offset + delta * noise * major.weights().iter().map(|c| trace(c).re).sum::<f64>();
    Ok(ApMajorant {
        constant,
        linear,
        quadratic,
        user_linear,
        user_quadratic,
        weights: major.weights().to_vec(),
    })
}
