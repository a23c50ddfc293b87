//! Hybrid precoder state and the channel views the algorithms work with.

use crate::analog::{MappingMatrix, PhaseGrid};
use crate::channel::ChannelSet;
use crate::error::{config, Result};
use crate::linalg::{cis, norm_sq, CMat, CVec, ZERO};
use crate::scenario::Scenario;

/// Digital precoders `V_k` (`N_c x N_t` each), the analog vector `z`
/// (`N_c L_c`, chain-major) and grid phases `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderState {
    pub digital: Vec<CMat>,
    pub analog: CVec,
    pub phases: Vec<f64>,
}

impl PrecoderState {
    /// `e^{jθ}`.
    pub fn phase_vector(&self) -> CVec {
        phase_vector(&self.phases)
    }

    /// Penalty term `||z - e^{jθ}||^2`.
    pub fn penalty(&self) -> f64 {
        penalty(&self.analog, &self.phases)
    }

    /// The same precoder with `z` replaced by `e^{jθ}`.
    pub fn quantized(&self) -> Self {
        Self { digital: self.digital.clone(), analog: self.phase_vector(), phases: self.phases.clone() }
    }

    pub fn transmit_power(&self) -> f64 {
        transmit_power(&self.digital)
    }
}

pub fn phase_vector(phases: &[f64]) -> CVec {
    CVec::from_iterator(phases.len(), phases.iter().map(|&t| cis(t)))
}

pub fn penalty(z: &CVec, phases: &[f64]) -> f64 {
    z.iter().zip(phases).map(|(zi, &t)| (zi - cis(t)).norm_sqr()).sum()
}

/// `Σ_k ||V_k||^2`.
pub fn transmit_power(digital: &[CMat]) -> f64 {
    digital.iter().map(norm_sq).sum()
}

/// Checks the digital power constraint against `P_L`.
pub fn is_power_feasible(digital: &[CMat], budget: f64) -> bool {
    transmit_power(digital) <= budget * (1.0 + 1e-8)
}

/// The `N x N_c` analog precoder `diag[A z_1, ..., A z_{N_c}]`.
pub fn analog_precoder(mapping: &MappingMatrix, z: &CVec, rf_chains: usize) -> CMat {
    let (l, lc) = (mapping.antennas(), mapping.shifters());
    let mut va = CMat::zeros(l * rf_chains, rf_chains);
    for n in 0..rf_chains {
        let az = mapping.apply(&z.as_slice()[n * lc..(n + 1) * lc]);
        va.view_mut((n * l, n), (l, 1)).copy_from(&az);
    }
    va
}

/// `ℋ_k(z)` built column by column as `H_{k,n_c} A z_{n_c}`.
pub fn effective_channel(blocks: &[CMat], mapping: &MappingMatrix, z: &CVec) -> Result<CMat> {
    let lc = mapping.shifters();
    if z.len() != blocks.len() * lc {
        return config(format!("analog vector has length {}, expected {}", z.len(), blocks.len() * lc));
    }
    let nt = blocks.first().map_or(0, |b| b.nrows());
    let mut out = CMat::zeros(nt, blocks.len());
    for (n, block) in blocks.iter().enumerate() {
        if block.ncols() != mapping.antennas() || block.nrows() != nt {
            return config("channel block does not match the mapping size");
        }
        let az = mapping.apply(&z.as_slice()[n * lc..(n + 1) * lc]);
        out.set_column(n, &(block * az));
    }
    Ok(out)
}

/// `H̃_k(V, z)` assembled entry by entry from the row vectors
/// `[V(1,s) H_{k,1}(r) A, ..., V(N_c,s) H_{k,N_c}(r) A]` applied to `z`.
pub fn tilde_channel(
    channels: &ChannelSet,
    k: usize,
    mapping: &MappingMatrix,
    v: &CMat,
    z: &CVec,
) -> CMat {
    let nt = channels.rx_antennas();
    let nc = channels.rf_chains();
    let a = mapping.to_matrix();
    let streams = v.ncols();
    let mut out = CMat::zeros(nt, streams);
    for r in 0..nt {
        for s in 0..streams {
            let mut row = CMat::zeros(1, nc * mapping.shifters());
            for n in 0..nc {
                let piece = channels.block_row(k, n, r) * &a * v[(n, s)];
                row.columns_mut(n * mapping.shifters(), mapping.shifters()).copy_from(&piece);
            }
            out[(r, s)] = (row * z)[(0, 0)];
        }
    }
    out
}

/// Channel data preprocessed for a fixed analog structure.
///
/// Stores `G_k = H_k · diag[A, ..., A]` (`N_t x N_c L_c`) so that column
/// `n_c` of `ℋ_k(z)` is `G_k` restricted to chain `n_c` times `z_{n_c}`.
#[derive(Debug, Clone)]
pub struct HybridSystem {
    expanded: Vec<CMat>,
    rf_chains: usize,
    shifters: usize,
    subarray: usize,
    noise: f64,
    power_budget: f64,
    grid: PhaseGrid,
}

impl HybridSystem {
    pub fn new(
        channels: &ChannelSet,
        mapping: &MappingMatrix,
        grid: PhaseGrid,
        noise: f64,
        power_budget: f64,
    ) -> Result<Self> {
        if mapping.antennas() != channels.subarray_size() {
            return config(format!(
                "mapping covers {} antennas, subarrays have {}",
                mapping.antennas(),
                channels.subarray_size()
            ));
        }
        if !(noise > 0.0) {
            return config("noise power must be positive");
        }
        if !(power_budget > 0.0) {
            return config("power budget must be positive");
        }
        let (l, lc, nc) = (mapping.antennas(), mapping.shifters(), channels.rf_chains());
        let expanded = channels
            .matrices()
            .iter()
            .map(|h| {
                let mut g = CMat::zeros(h.nrows(), nc * lc);
                for n in 0..nc {
                    for i in 0..l {
                        let col = n * lc + mapping.shifter_of(i);
                        let src = h.column(n * l + i).into_owned();
                        let mut dst = g.column_mut(col);
                        dst += src;
                    }
                }
                g
            })
            .collect();
        Ok(Self { expanded, rf_chains: nc, shifters: lc, subarray: l, noise, power_budget, grid })
    }

    /// Builds the system for a scenario with channels rescaled by `1/√σ`
    /// so the noise power becomes 1; throughputs are unchanged.
    pub fn from_scenario(scenario: &Scenario, channels: &ChannelSet) -> Result<Self> {
        scenario.validate()?;
        let mapping = scenario.mapping_matrix()?;
        let normalized = channels.scaled(1.0 / scenario.noise_power_mw.sqrt());
        Self::new(&normalized, &mapping, scenario.phase_grid()?, 1.0, scenario.power_budget())
    }

    pub fn users(&self) -> usize {
        self.expanded.len()
    }

    pub fn rx_antennas(&self) -> usize {
        self.expanded[0].nrows()
    }

    pub fn rf_chains(&self) -> usize {
        self.rf_chains
    }

    pub fn shifters_per_chain(&self) -> usize {
        self.shifters
    }

    pub fn subarray_size(&self) -> usize {
        self.subarray
    }

    /// Length of `z`.
    pub fn analog_len(&self) -> usize {
        self.rf_chains * self.shifters
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    pub fn grid(&self) -> PhaseGrid {
        self.grid
    }

    pub fn expanded(&self, k: usize) -> &CMat {
        &self.expanded[k]
    }

    /// `ℋ_k(z)`.
    pub fn effective(&self, k: usize, z: &CVec) -> CMat {
        let g = &self.expanded[k];
        let mut out = CMat::zeros(g.nrows(), self.rf_chains);
        for n in 0..self.rf_chains {
            for s in 0..self.shifters {
                let idx = n * self.shifters + s;
                let zi = z[idx];
                if zi == ZERO {
                    continue;
                }
                for r in 0..g.nrows() {
                    out[(r, n)] += g[(r, idx)] * zi;
                }
            }
        }
        out
    }

    pub fn effective_all(&self, z: &CVec) -> Vec<CMat> {
        (0..self.users()).map(|k| self.effective(k, z)).collect()
    }

    /// Expands column `s` of `V` onto the analog index set:
    /// entry `(n_c, l_c)` is `V(n_c, s)`.
    pub fn spread_column(&self, v: &CMat, s: usize) -> CVec {
        CVec::from_iterator(
            self.analog_len(),
            (0..self.analog_len()).map(|i| v[(i / self.shifters, s)]),
        )
    }

    /// Linear maps `M_s` with `Ω_{k,k'}(z)` column `s` equal to `M_s z`,
    /// where `Ω_{k,k'}(z) = ℋ_k(z) V_{k'}`.
    pub fn omega_operator(&self, k: usize, v: &CMat) -> Vec<CMat> {
        let g = &self.expanded[k];
        (0..v.ncols())
            .map(|s| {
                let d = self.spread_column(v, s);
                let mut m = g.clone();
                for (j, mut col) in m.column_iter_mut().enumerate() {
                    col *= d[j];
                }
                m
            })
            .collect()
    }

    /// Row vector `b` (stored as a column) with
    /// `tr(coef · ℋ_k(z) V) = Σ_i b_i z_i` for every `z`.
    pub fn linear_lift(&self, k: usize, coef: &CMat, v: &CMat) -> CVec {
        let bg = coef * &self.expanded[k];
        let n = self.analog_len();
        CVec::from_iterator(
            n,
            (0..n).map(|j| {
                let chain = j / self.shifters;
                (0..v.ncols()).map(|s| bg[(s, j)] * v[(chain, s)]).sum()
            }),
        )
    }

    /// Hermitian `C` with `Σ_{V} tr((ℋ_k(z)V)^H W ℋ_k(z)V) = z^H C z`, where
    /// the sum runs over the precoders whose Gram sum `Σ V V^H` is `mix`.
    pub fn quadratic_lift(&self, k: usize, weight: &CMat, mix: &CMat) -> CMat {
        let g = &self.expanded[k];
        let q = g.adjoint() * weight * g;
        let lc = self.shifters;
        CMat::from_fn(q.nrows(), q.ncols(), |i, j| q[(i, j)] * mix[(j / lc, i / lc)])
    }

    /// Validates state dimensions against the system.
    pub fn check_state(&self, state: &PrecoderState) -> Result<()> {
        if state.analog.len() != self.analog_len() || state.phases.len() != self.analog_len() {
            return config("analog vector length does not match the system");
        }
        if state.digital.len() != self.users()
            || state
                .digital
                .iter()
                .any(|v| v.shape() != (self.rf_chains, self.rx_antennas()))
        {
            return config("digital precoder dimensions do not match the system");
        }
        Ok(())
    }

    /// `Σ_k ||diag[A z_{n_c}] V_k||^2`, the radiated power for a given `z`.
    pub fn radiated_power(&self, mapping: &MappingMatrix, state: &PrecoderState) -> f64 {
        let va = analog_precoder(mapping, &state.analog, self.rf_chains);
        state.digital.iter().map(|v| norm_sq(&(&va * v))).sum()
    }
}

/// Scales `digital` so that its total power equals `budget`.
pub fn rescale_to_budget(digital: &mut [CMat], budget: f64) {
    let p = transmit_power(digital);
    if p > 0.0 {
        let f = (budget / p).sqrt();
        for v in digital.iter_mut() {
            *v *= num_complex::Complex64::new(f, 0.0);
        }
    }
}
