//! Log-det throughput model and its δ-scaled soft max-min variants.
//!
//! All throughputs are in nats; `*_bits` helpers divide by `ln 2`.

use std::f64::consts::LN_2;

use crate::analog::MappingMatrix;
use crate::channel::ChannelSet;
use crate::error::{domain, Result};
use crate::linalg::{gram, identity, inv_hpd, logdet_hpd, logdet_identity_plus_gram, whiten, CMat};
use crate::precoder::{tilde_channel, PrecoderState};

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub per_user: Vec<f64>,
}

impl ThroughputReport {
    pub fn min(&self) -> f64 {
        self.per_user.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        self.per_user.iter().sum()
    }

    pub fn min_bits(&self) -> f64 {
        self.min() / LN_2
    }

    pub fn sum_bits(&self) -> f64 {
        self.sum() / LN_2
    }

    pub fn per_user_bits(&self) -> Vec<f64> {
        self.per_user.iter().map(|r| r / LN_2).collect()
    }
}

fn check_noise(noise: f64) -> Result<()> {
    if !(noise > 0.0) {
        return domain(format!("noise power must be positive, got {noise}"));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return domain(format!("delta must lie in (0, 1], got {delta}"));
    }
    Ok(())
}

/// `Ψ_k = Σ_{k'≠k} [ℋ_k V_{k'}]^2 + σI`.
pub fn interference_covariance(effective_k: &CMat, digital: &[CMat], k: usize, noise: f64) -> CMat {
    let mut psi = identity(effective_k.nrows()).scale(noise);
    for (j, v) in digital.iter().enumerate() {
        if j != k {
            psi += gram(&(effective_k * v));
        }
    }
    psi
}

fn logdet_ratio(signal: &CMat, psi: &CMat, scale: f64) -> Result<f64> {
    let w = whiten(psi, signal)?;
    logdet_identity_plus_gram(&w, scale)
}

/// `r_k = ln|I + [ℋ_k V_k]^2 Ψ_k^{-1}|` for every user.
pub fn throughput(effective: &[CMat], digital: &[CMat], noise: f64) -> Result<ThroughputReport> {
    check_noise(noise)?;
    let per_user = effective
        .iter()
        .enumerate()
        .map(|(k, h)| {
            let psi = interference_covariance(h, digital, k, noise);
            logdet_ratio(&(h * &digital[k]), &psi, 1.0)
        })
        .collect::<Result<_>>()?;
    Ok(ThroughputReport { per_user })
}

/// Same quantity evaluated through the `H̃_k(V, z)` factorization, with the
/// determinant taken as `ln|Ψ + [X]^2| - ln|Ψ|`.
pub fn throughput_via_tilde(
    channels: &ChannelSet,
    mapping: &MappingMatrix,
    state: &PrecoderState,
    noise: f64,
) -> Result<ThroughputReport> {
    check_noise(noise)?;
    let users = channels.users();
    let per_user = (0..users)
        .map(|k| {
            let tildes: Vec<CMat> = state
                .digital
                .iter()
                .map(|v| tilde_channel(channels, k, mapping, v, &state.analog))
                .collect();
            let nt = channels.rx_antennas();
            let mut psi = identity(nt).scale(noise);
            for (j, t) in tildes.iter().enumerate() {
                if j != k {
                    psi += gram(t);
                }
            }
            let total = &psi + gram(&tildes[k]);
            Ok(logdet_hpd(&total)? - logdet_hpd(&psi)?)
        })
        .collect::<Result<_>>()?;
    Ok(ThroughputReport { per_user })
}

/// δ-scaled quantities of the soft max-min formulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftReport {
    /// `r_{k,δ}`.
    pub scaled: Vec<f64>,
    /// `f_SA = ln Σ_k exp(-r_{k,δ})`.
    pub f_sa: f64,
    /// `φ = ln|Ξ_δ|`.
    pub log_det_xi: f64,
}

impl SoftReport {
    /// `f_δ = min_k r_{k,δ}`.
    pub fn min_scaled(&self) -> f64 {
        self.scaled.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `Ξ_δ = Σ_k (I - X_k^H ([X_k]^2 + δΨ_k)^{-1} X_k)` with `X_k = ℋ_k V_k`.
pub fn xi_matrix(effective: &[CMat], digital: &[CMat], noise: f64, delta: f64) -> Result<CMat> {
    check_noise(noise)?;
    check_delta(delta)?;
    let nt = effective.first().map_or(0, |h| h.nrows());
    let streams = digital.first().map_or(nt, |v| v.ncols());
    let mut xi = CMat::zeros(streams, streams);
    for (k, h) in effective.iter().enumerate() {
        let x = h * &digital[k];
        let psi = interference_covariance(h, digital, k, noise);
        let y = gram(&x) + psi.scale(delta);
        xi += identity(streams) - x.adjoint() * inv_hpd(&y)? * &x;
    }
    Ok(xi)
}

pub fn scaled_throughput(
    effective: &[CMat],
    digital: &[CMat],
    noise: f64,
    delta: f64,
) -> Result<SoftReport> {
    check_noise(noise)?;
    check_delta(delta)?;
    let scaled: Vec<f64> = effective
        .iter()
        .enumerate()
        .map(|(k, h)| {
            let psi = interference_covariance(h, digital, k, noise);
            logdet_ratio(&(h * &digital[k]), &psi, 1.0 / delta)
        })
        .collect::<Result<_>>()?;
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let f_sa = -lo + scaled.iter().map(|r| (lo - r).exp()).sum::<f64>().ln();
    let log_det_xi = logdet_hpd(&xi_matrix(effective, digital, noise, delta)?)?;
    Ok(SoftReport { scaled, f_sa, log_det_xi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn toy() -> (Vec<CMat>, Vec<CMat>) {
        let h1 = CMat::from_row_slice(2, 2, &[c(1.0, 0.2), c(0.3, -0.5), c(-0.2, 0.1), c(0.8, 0.4)]);
        let h2 = CMat::from_row_slice(2, 2, &[c(0.5, -0.1), c(-0.7, 0.2), c(0.1, 0.9), c(0.2, 0.0)]);
        let v1 = CMat::from_row_slice(2, 2, &[c(0.4, 0.1), c(0.0, -0.3), c(0.2, 0.2), c(0.5, 0.0)]);
        let v2 = CMat::from_row_slice(2, 2, &[c(-0.1, 0.3), c(0.6, 0.0), c(0.0, 0.1), c(-0.2, -0.4)]);
        (vec![h1, h2], vec![v1, v2])
    }

    #[test]
    fn zero_precoder_gives_zero() {
        let (h, v) = toy();
        let zeros: Vec<CMat> = v.iter().map(|m| CMat::zeros(m.nrows(), m.ncols())).collect();
        let r = throughput(&h, &zeros, 0.5).unwrap();
        assert!(r.per_user.iter().all(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn single_user_is_snr_logdet() {
        let (h, v) = toy();
        let r = throughput(&h[..1], &v[..1], 0.3).unwrap();
        let x = &h[0] * &v[0];
        let m = identity(2) + gram(&x).scale(1.0 / 0.3);
        let expected = m.lu().determinant().re.ln();
        assert!((r.per_user[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn delta_one_reduces_to_plain() {
        let (h, v) = toy();
        let r = throughput(&h, &v, 0.2).unwrap();
        let s = scaled_throughput(&h, &v, 0.2, 1.0).unwrap();
        for (a, b) in r.per_user.iter().zip(&s.scaled) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_arguments() {
        let (h, v) = toy();
        assert!(throughput(&h, &v, 0.0).is_err());
        assert!(scaled_throughput(&h, &v, 1.0, 0.0).is_err());
        assert!(scaled_throughput(&h, &v, 1.0, 1.5).is_err());
    }

    #[test]
    fn soft_min_sandwich() {
        let (h, v) = toy();
        let s = scaled_throughput(&h, &v, 0.1, 0.5).unwrap();
        let f_delta = s.min_scaled();
        assert!(f_delta >= -s.f_sa - 1e-12);
        assert!(-s.f_sa >= f_delta - 2f64.ln() - 1e-12);
    }
}
