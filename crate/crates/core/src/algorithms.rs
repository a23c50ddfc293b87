//! Penalized alternating optimization: digital step, analog step, phase
//! projection, then the penalty-factor update.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{config, domain, Error, Result};
use crate::linalg::{c, CMat, CVec};
use crate::precoder::{penalty, rescale_to_budget, HybridSystem, PrecoderState};
use crate::solvers::{
    maximin_ap, maximin_dp, project_theta, solve_quadratic_ap, solve_weighted_dp, BallConstraint, DpQuadratic,
    SaddleSettings,
};
use crate::surrogates::{ap_minorant, dp_minorant, softmin_majorant_ap, softmin_majorant_dp};
use crate::throughput::{scaled_throughput, throughput, ThroughputReport};

/// Soft max-min scaling used unless the transmit budget is large.
pub const DEFAULT_DELTA: f64 = 0.5;

/// `δ = 0.5`, or `δ = 1` once the transmit budget exceeds 1000 mW.
pub fn default_delta(transmit_power_mw: f64) -> f64 {
    if transmit_power_mw > 1000.0 {
        1.0
    } else {
        DEFAULT_DELTA
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    /// Nonsmooth max-min throughput.
    MaxMin,
    /// Sum throughput.
    Sum,
    /// Soft max-min with scaling `δ`.
    SoftMaxMin { delta: f64 },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Self::MaxMin => "maxmin",
            Self::Sum => "sum",
            Self::SoftMaxMin { .. } => "softmaxmin",
        }
    }

    /// True when the penalized objective is maximized.
    pub fn maximizes(&self) -> bool {
        !matches!(self, Self::SoftMaxMin { .. })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    /// Parses the selector; the soft variant gets [`DEFAULT_DELTA`].
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "maxmin" | "alg1" | "1" => Ok(Self::MaxMin),
            "sum" | "alg2" | "2" => Ok(Self::Sum),
            "softmaxmin" | "soft" | "alg3" | "3" => Ok(Self::SoftMaxMin { delta: DEFAULT_DELTA }),
            other => config(format!("unknown algorithm '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySchedule {
    pub gamma: f64,
    pub growth: f64,
    pub trigger_ratio: f64,
    pub termination_threshold: f64,
}

impl PenaltySchedule {
    pub fn new(gamma: f64) -> Result<Self> {
        let s = Self { gamma, growth: 1.2, trigger_ratio: 0.9, termination_threshold: 0.1 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return config(format!("penalty factor must be positive, got {}", self.gamma));
        }
        if !(self.growth > 1.0) || !(self.trigger_ratio > 0.0 && self.trigger_ratio < 1.0) {
            return config("need growth > 1 and 0 < trigger ratio < 1");
        }
        if !(self.termination_threshold > 0.0) {
            return config("termination threshold must be positive");
        }
        Ok(())
    }
}

/// Grows `γ` when the penalty failed to drop below `trigger_ratio` times its
/// previous value.
pub fn update_gamma(schedule: &PenaltySchedule, penalty_now: f64, penalty_prev: f64) -> PenaltySchedule {
    let mut next = *schedule;
    if penalty_now > schedule.trigger_ratio * penalty_prev {
        next.gamma *= schedule.growth;
    }
    next
}

/// `γ₀` matching the penalty term to the objective magnitude; 1 when either
/// side vanishes.
pub fn init_gamma(objective_magnitude: f64, penalty: f64) -> f64 {
    if penalty > 0.0 && objective_magnitude > 0.0 && objective_magnitude.is_finite() {
        objective_magnitude / penalty
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmSettings {
    pub max_iters: usize,
    /// Relative objective change below which a run with a small penalty stops.
    pub stall_tolerance: f64,
    pub saddle: SaddleSettings,
    /// Seed of the initial point.
    pub seed: u64,
}

impl Default for AlgorithmSettings {
    fn default() -> Self {
        Self { max_iters: 500, stall_tolerance: 1e-4, saddle: SaddleSettings::default(), seed: 0 }
    }
}

/// Random start: `|z| < 1` entries, digital precoders scaled onto the budget.
pub fn init_state<R: Rng + ?Sized>(system: &HybridSystem, rng: &mut R) -> PrecoderState {
    let n = system.analog_len();
    let analog = CVec::from_iterator(
        n,
        (0..n).map(|_| {
            let m: f64 = rng.random::<f64>();
            num_complex::Complex64::from_polar(m, rng.random::<f64>() * std::f64::consts::TAU)
        }),
    );
    let mut digital: Vec<CMat> = (0..system.users())
        .map(|_| {
            CMat::from_fn(system.rf_chains(), system.rx_antennas(), |_, _| {
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            })
        })
        .collect();
    rescale_to_budget(&mut digital, system.power_budget());
    let phases = project_theta(&analog, &system.grid());
    PrecoderState { digital, analog, phases }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Penalized objective under the `gamma` of this record.
    pub objective: f64,
    pub penalty: f64,
    pub gamma: f64,
    /// Throughputs at the current (unquantized) iterate, nats.
    pub per_user: Vec<f64>,
    pub power: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
}

impl RunTrace {
    /// Largest step in the wrong direction between consecutive records that
    /// share the same `γ`; 0 when the trace is monotone.
    pub fn worst_stage_violation(&self, maximizes: bool) -> f64 {
        self.records
            .windows(2)
            .filter(|w| w[0].gamma == w[1].gamma)
            .map(|w| {
                let step = w[1].objective - w[0].objective;
                if maximizes {
                    -step
                } else {
                    step
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub algorithm: Algorithm,
    /// Final iterate; `phases` lie on the grid.
    pub state: PrecoderState,
    /// Throughputs with `z` replaced by `e^{jθ}`.
    pub report: ThroughputReport,
    pub trace: RunTrace,
    pub iterations: usize,
    /// Stopped by the penalty/stall rule rather than the iteration cap.
    pub converged: bool,
    pub final_penalty: f64,
    /// Number of saddle solves that returned their expansion point.
    pub stalled_saddles: usize,
}

/// Penalized objective and per-user throughputs at a state.
fn evaluate(
    system: &HybridSystem,
    algorithm: Algorithm,
    state: &PrecoderState,
    gamma: f64,
) -> Result<(f64, f64, ThroughputReport)> {
    let eff = system.effective_all(&state.analog);
    let pen = state.penalty();
    let report = throughput(&eff, &state.digital, system.noise())?;
    let value = match algorithm {
        Algorithm::MaxMin => report.min() - gamma * pen,
        Algorithm::Sum => report.sum() - gamma * pen,
        Algorithm::SoftMaxMin { delta } => {
            scaled_throughput(&eff, &state.digital, system.noise(), delta)?.log_det_xi + gamma * pen
        }
    };
    Ok((value, pen, report))
}

fn objective_magnitude(system: &HybridSystem, algorithm: Algorithm, state: &PrecoderState) -> Result<f64> {
    let eff = system.effective_all(&state.analog);
    Ok(match algorithm {
        Algorithm::MaxMin => throughput(&eff, &state.digital, system.noise())?.min(),
        Algorithm::Sum => throughput(&eff, &state.digital, system.noise())?.sum(),
        Algorithm::SoftMaxMin { delta } => {
            scaled_throughput(&eff, &state.digital, system.noise(), delta)?.log_det_xi.abs()
        }
    })
}

/// Runs one algorithm from the seeded random start.
pub fn run(system: &HybridSystem, algorithm: Algorithm, settings: &AlgorithmSettings) -> Result<RunOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let start = init_state(system, &mut rng);
    run_from(system, algorithm, settings, start)
}

/// Runs one algorithm from a given start.
pub fn run_from(
    system: &HybridSystem,
    algorithm: Algorithm,
    settings: &AlgorithmSettings,
    start: PrecoderState,
) -> Result<RunOutcome> {
    if let Algorithm::SoftMaxMin { delta } = algorithm {
        if !(delta > 0.0 && delta <= 1.0) {
            return domain(format!("delta must lie in (0, 1], got {delta}"));
        }
    }
    if settings.max_iters == 0 || !(settings.stall_tolerance > 0.0) {
        return config("iteration cap and stall tolerance must be positive");
    }
    system.check_state(&start)?;
    let clock = Instant::now();
    let ball = BallConstraint::new(system.power_budget())?;
    let grid = system.grid();
    let noise = system.noise();

    let mut state = start;
    let mut schedule =
        PenaltySchedule::new(init_gamma(objective_magnitude(system, algorithm, &state)?, state.penalty()))?;
    let (mut prev_obj, mut prev_pen, report) = evaluate(system, algorithm, &state, schedule.gamma)?;
    let mut trace = RunTrace::default();
    trace.records.push(IterationRecord {
        iteration: 0,
        objective: prev_obj,
        penalty: prev_pen,
        gamma: schedule.gamma,
        per_user: report.per_user,
        power: state.transmit_power(),
        elapsed_s: clock.elapsed().as_secs_f64(),
    });

    let mut warm_dp: Option<Vec<f64>> = None;
    let mut warm_ap: Option<Vec<f64>> = None;
    let mut stalled_saddles = 0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < settings.max_iters {
        iterations += 1;
        let gamma = schedule.gamma;
        let eff = system.effective_all(&state.analog);

        state.digital = match algorithm {
            Algorithm::MaxMin => {
                let bundles = dp_minorant(&eff, &state.digital, noise)?;
                let out = maximin_dp(&bundles, &ball, &state.digital, warm_dp.as_deref(), &settings.saddle)?;
                stalled_saddles += usize::from(out.stalled);
                warm_dp = Some(out.weights);
                out.point
            }
            Algorithm::Sum => {
                let bundles = dp_minorant(&eff, &state.digital, noise)?;
                let n = system.rf_chains();
                let quad = bundles.iter().fold(CMat::zeros(n, n), |acc, b| acc + &b.quadratic);
                let linear: Vec<CMat> = bundles.iter().map(|b| b.linear.clone()).collect();
                solve_weighted_dp(&linear, DpQuadratic::Shared(&quad), &ball)?.digital
            }
            Algorithm::SoftMaxMin { delta } => {
                let maj = softmin_majorant_dp(&eff, &state.digital, noise, delta)?;
                solve_weighted_dp(&maj.linear, DpQuadratic::PerUser(&maj.quadratic), &ball)?.digital
            }
        };

        state.analog = match algorithm {
            Algorithm::MaxMin => {
                let bundles = ap_minorant(system, &state.digital, &state.analog)?;
                let out =
                    maximin_ap(&bundles, gamma, &state.phases, &state.analog, warm_ap.as_deref(), &settings.saddle)?;
                stalled_saddles += usize::from(out.stalled);
                warm_ap = Some(out.weights);
                out.point
            }
            Algorithm::Sum => {
                let bundles = ap_minorant(system, &state.digital, &state.analog)?;
                let n = system.analog_len();
                let quad = bundles.iter().fold(CMat::zeros(n, n), |acc, b| acc + &b.quadratic);
                let linear = bundles.iter().fold(CVec::zeros(n), |acc, b| acc + &b.linear);
                solve_quadratic_ap(&linear, &quad, gamma, &state.phases)?
            }
            Algorithm::SoftMaxMin { delta } => {
                let maj = softmin_majorant_ap(system, &state.digital, &state.analog, delta)?;
                solve_quadratic_ap(&maj.linear, &maj.quadratic, gamma, &state.phases)?
            }
        };

        state.phases = project_theta(&state.analog, &grid);
        let (obj, pen, report) = evaluate(system, algorithm, &state, gamma)?;
        trace.records.push(IterationRecord {
            iteration: iterations,
            objective: obj,
            penalty: pen,
            gamma,
            per_user: report.per_user,
            power: state.transmit_power(),
            elapsed_s: clock.elapsed().as_secs_f64(),
        });

        let change = (obj - prev_obj).abs() / prev_obj.abs().max(1.0);
        if pen < schedule.termination_threshold && change < settings.stall_tolerance {
            converged = true;
            break;
        }
        schedule = update_gamma(&schedule, pen, prev_pen);
        prev_obj = obj;
        prev_pen = pen;
    }

    let final_penalty = penalty(&state.analog, &state.phases);
    let quantized = state.quantized();
    let report = throughput(&system.effective_all(&quantized.analog), &quantized.digital, noise)?;
    Ok(RunOutcome { algorithm, state, report, trace, iterations, converged, final_penalty, stalled_saddles })
}

/// Nonsmooth max-min throughput.
pub fn run_maxmin(system: &HybridSystem, settings: &AlgorithmSettings) -> Result<RunOutcome> {
    run(system, Algorithm::MaxMin, settings)
}

/// Sum throughput with closed-form updates.
pub fn run_sum(system: &HybridSystem, settings: &AlgorithmSettings) -> Result<RunOutcome> {
    run(system, Algorithm::Sum, settings)
}

/// Soft max-min with closed-form updates.
pub fn run_softmaxmin(system: &HybridSystem, settings: &AlgorithmSettings, delta: f64) -> Result<RunOutcome> {
    run(system, Algorithm::SoftMaxMin { delta }, settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_rule() {
        let s = PenaltySchedule::new(2.0).unwrap();
        assert_eq!(update_gamma(&s, 0.5, 1.0).gamma, 2.0);
        assert!((update_gamma(&s, 1.0, 1.0).gamma - 2.4).abs() < 1e-15);
        assert_eq!(update_gamma(&s, 0.9, 1.0).gamma, 2.0);
    }

    #[test]
    fn gamma_start() {
        assert_eq!(init_gamma(3.0, 1.5), 2.0);
        assert_eq!(init_gamma(0.0, 1.5), 1.0);
        assert_eq!(init_gamma(3.0, 0.0), 1.0);
        assert_eq!(init_gamma(6.0, 1.5), 2.0 * init_gamma(3.0, 1.5));
    }

    #[test]
    fn selector_parsing() {
        assert_eq!("maxmin".parse::<Algorithm>().unwrap(), Algorithm::MaxMin);
        assert_eq!("alg2".parse::<Algorithm>().unwrap(), Algorithm::Sum);
        assert_eq!("soft".parse::<Algorithm>().unwrap(), Algorithm::SoftMaxMin { delta: 0.5 });
        assert!("bogus".parse::<Algorithm>().is_err());
    }

    #[test]
    fn delta_default() {
        assert_eq!(default_delta(100.0), 0.5);
        assert_eq!(default_delta(1380.0), 1.0);
    }
}
