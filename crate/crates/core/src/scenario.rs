use crate::analog::{MappingKind, MappingMatrix, PhaseGrid};
use crate::channel::{ArrayGeometry, ClusterConfig};
use crate::error::{config, Result};

/// Noise power in mW for a density in dBm/Hz over a bandwidth in Hz.
pub fn noise_power_mw(density_dbm_hz: f64, bandwidth_hz: f64) -> f64 {
    10f64.powf((density_dbm_hz + 10.0 * bandwidth_hz.log10()) / 10.0)
}

/// System dimensions, budgets and the analog structure of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: ArrayGeometry,
    pub clusters: ClusterConfig,
    pub users: usize,
    pub rf_chains: usize,
    /// Phase shifters per RF chain `L_c`.
    pub shifters_per_chain: usize,
    pub mapping: MappingKind,
    pub resolution_bits: u32,
    /// Transmit budget `P`, mW.
    pub transmit_power_mw: f64,
    /// Noise power `σ`, mW.
    pub noise_power_mw: f64,
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            geometry: ArrayGeometry::default(),
            clusters: ClusterConfig::default(),
            users: 8,
            rf_chains: 8,
            shifters_per_chain: 10,
            mapping: MappingKind::Balanced,
            resolution_bits: 3,
            transmit_power_mw: 100.0,
            noise_power_mw: noise_power_mw(-174.0, 100e6),
            cell_radius_m: 200.0,
            min_distance_m: 10.0,
        }
    }
}

impl Scenario {
    /// Base-station antennas `N`.
    pub fn antennas(&self) -> usize {
        self.geometry.antennas()
    }

    /// Antennas per subarray `L = N / N_c`.
    pub fn subarray_size(&self) -> usize {
        self.antennas() / self.rf_chains.max(1)
    }

    pub fn phase_shifters(&self) -> usize {
        self.rf_chains * self.shifters_per_chain
    }

    /// Digital power budget `P_L = P / L`.
    pub fn power_budget(&self) -> f64 {
        self.transmit_power_mw / self.subarray_size() as f64
    }

    pub fn mapping_matrix(&self) -> Result<MappingMatrix> {
        MappingMatrix::new(self.mapping, self.subarray_size(), self.shifters_per_chain)
    }

    pub fn phase_grid(&self) -> Result<PhaseGrid> {
        PhaseGrid::new(self.resolution_bits)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.clusters.validate()?;
        if self.users == 0 {
            return config("need at least one user");
        }
        if self.rf_chains == 0 || !self.antennas().is_multiple_of(self.rf_chains) {
            return config(format!(
                "{} antennas cannot be split into {} subarrays",
                self.antennas(),
                self.rf_chains
            ));
        }
        self.mapping_matrix()?;
        self.phase_grid()?;
        if !(self.transmit_power_mw > 0.0) {
            return config("transmit power must be positive");
        }
        if !(self.noise_power_mw > 0.0) {
            return config("noise power must be positive");
        }
        if !(self.min_distance_m > 0.0 && self.cell_radius_m >= self.min_distance_m) {
            return config("need 0 < min distance <= cell radius");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_noise_is_minus_94_dbm() {
        let s = Scenario::default();
        assert!((10.0 * s.noise_power_mw.log10() + 94.0).abs() < 1e-9);
    }

    #[test]
    fn default_budget() {
        let s = Scenario::default();
        s.validate().unwrap();
        assert_eq!(s.subarray_size(), 18);
        assert_eq!(s.phase_shifters(), 80);
        assert!((s.power_budget() - 100.0 / 18.0).abs() < 1e-15);
    }
}
