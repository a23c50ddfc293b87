//! Front-end power accounting: transmit power plus RF-chain and
//! phase-shifter consumption.

use crate::error::{config_err, Result};

/// Consumption of one RF chain, mW.
pub const RF_CHAIN_MW: f64 = 118.0;
/// Consumption of one phase shifter, mW.
pub const PHASE_SHIFTER_MW: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub rf_chain_mw: f64,
    pub phase_shifter_mw: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self { rf_chain_mw: RF_CHAIN_MW, phase_shifter_mw: PHASE_SHIFTER_MW }
    }
}

impl PowerModel {
    /// Hardware consumption excluding the radiated power.
    pub fn circuit_power(&self, rf_chains: usize, phase_shifters: usize) -> f64 {
        rf_chains as f64 * self.rf_chain_mw + phase_shifters as f64 * self.phase_shifter_mw
    }

    pub fn total_power(&self, transmit_mw: f64, rf_chains: usize, phase_shifters: usize) -> f64 {
        transmit_mw + self.circuit_power(rf_chains, phase_shifters)
    }

    /// Transmit power left once the hardware has been paid for.
    pub fn transmit_budget(&self, total_mw: f64, rf_chains: usize, phase_shifters: usize) -> Result<f64> {
        let circuit = self.circuit_power(rf_chains, phase_shifters);
        if !(total_mw >= circuit) {
            return config_err(format!(
                "total power {total_mw} mW cannot cover {rf_chains} RF chains and {phase_shifters} phase shifters ({circuit} mW)"
            ));
        }
        Ok(total_mw - circuit)
    }
}

/// `P + 118 N_c + 20 N_PS` with the default constants.
pub fn total_power(transmit_mw: f64, rf_chains: usize, phase_shifters: usize) -> f64 {
    PowerModel::default().total_power(transmit_mw, rf_chains, phase_shifters)
}

/// Inverse of [`total_power`]; fails when the hardware alone exceeds the total.
pub fn transmit_budget_from_total(total_mw: f64, rf_chains: usize, phase_shifters: usize) -> Result<f64> {
    PowerModel::default().transmit_budget(total_mw, rf_chains, phase_shifters)
}
