//! Scalar dB-domain link budgets.
//!
//! Powers given in dBm are converted to dBW (−30) before they meet any SI
//! quantity such as Boltzmann's constant.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::wavelength;
use crate::error::{Result, SimError};

pub const BOLTZMANN: f64 = 1.380649e-23;
/// Reference noise temperature for terrestrial receivers.
pub const T0_KELVIN: f64 = 290.0;
/// Stand-in for −∞ dB.
pub const DB_FLOOR: f64 = -400.0;

const JANSKY: f64 = 1e-26;

pub fn boltzmann_db() -> f64 {
    10.0 * BOLTZMANN.log10()
}

pub fn lin_to_db(x: f64) -> f64 {
    if x > 0.0 {
        (10.0 * x.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

pub fn db_to_lin(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Terrestrial-to-satellite interference budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SatLinkBudget {
    pub p_tx_dbm: f64,
    pub g_over_t_dbk: f64,
    pub extra_loss_db: f64,
    pub bandwidth_hz: f64,
    pub boltzmann_db: f64,
}

impl Default for SatLinkBudget {
    fn default() -> Self {
        Self::gnb()
    }
}

impl SatLinkBudget {
    pub fn gnb() -> Self {
        Self {
            p_tx_dbm: 33.0,
            g_over_t_dbk: 13.0,
            extra_loss_db: 0.0,
            bandwidth_hz: 30e6,
            boltzmann_db: boltzmann_db(),
        }
    }

    pub fn ue() -> Self {
        Self {
            p_tx_dbm: 23.0,
            ..Self::gnb()
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) || !self.bandwidth_hz.is_finite() {
            return Err(SimError::config(format!("{path}.bandwidth_hz"), "must be positive"));
        }
        if (self.boltzmann_db - boltzmann_db()).abs() > 0.01 {
            return Err(SimError::config(
                format!("{path}.boltzmann_db"),
                format!("{} is not 10log10(k)", self.boltzmann_db),
            ));
        }
        for (name, v) in [
            ("p_tx_dbm", self.p_tx_dbm),
            ("g_over_t_dbk", self.g_over_t_dbk),
            ("extra_loss_db", self.extra_loss_db),
        ] {
            if !v.is_finite() {
                return Err(SimError::config(format!("{path}.{name}"), "must be finite"));
            }
        }
        Ok(())
    }
}

/// INR at the satellite for an effective channel gain `|wᴴ h_sat|²`.
pub fn inr_db(budget: &SatLinkBudget, effective_gain: f64) -> f64 {
    if !(effective_gain > 0.0) {
        return DB_FLOOR;
    }
    let inr = (budget.p_tx_dbm - 30.0) + 10.0 * effective_gain.log10() + budget.g_over_t_dbk
        - budget.extra_loss_db
        - 10.0 * budget.bandwidth_hz.log10()
        - budget.boltzmann_db;
    inr.max(DB_FLOOR)
}

/// Satellite SNR degradation `10 log10(1 + 10^(INR/10))`.
pub fn snr_degradation_delta(inr_db: f64) -> f64 {
    // ln_1p keeps precision for very negative INR
    10.0 * (10f64.powf(0.1 * inr_db)).ln_1p() / std::f64::consts::LN_10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateModel {
    pub alpha: f64,
    pub rho_max: f64,
}

impl Default for RateModel {
    fn default() -> Self {
        Self {
            alpha: 0.57,
            rho_max: 4.8,
        }
    }
}

impl RateModel {
    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(SimError::config(format!("{path}.alpha"), "must lie in (0, 1]"));
        }
        if !(self.rho_max > 0.0) || !self.rho_max.is_finite() {
            return Err(SimError::config(format!("{path}.rho_max"), "must be positive"));
        }
        Ok(())
    }
}

/// Shannon-with-loss rate `B · min(ρ_max, α log2(1 + SNR))`.
pub fn rate_bps(snr_db: f64, bandwidth_hz: f64, model: &RateModel) -> f64 {
    let se = model.alpha * (1.0 + db_to_lin(snr_db)).log2();
    bandwidth_hz * se.min(model.rho_max).max(0.0)
}

/// Linear-in-frequency penetration loss `a + b f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct O2IMaterial {
    pub name: String,
    pub a_db: f64,
    pub b_db_per_ghz: f64,
}

pub fn o2i_loss_db(material: &O2IMaterial, freq_ghz: f64) -> f64 {
    material.a_db + material.b_db_per_ghz * freq_ghz
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialFile {
    version: u32,
    material: Vec<O2IMaterial>,
}

const DEFAULT_MATERIALS: &str = include_str!("../data/o2i_materials.toml");

/// Parses a material table (`version = 1`, `[[material]]` rows).
pub fn parse_material_table(text: &str) -> Result<Vec<O2IMaterial>> {
    let file: MaterialFile = toml::from_str(text).map_err(|e| SimError::config("material", e.to_string()))?;
    if file.version != 1 {
        return Err(SimError::config("version", format!("unsupported material table version {}", file.version)));
    }
    for (i, m) in file.material.iter().enumerate() {
        if !m.a_db.is_finite() || !m.b_db_per_ghz.is_finite() {
            return Err(SimError::config(format!("material[{i}]"), "coefficients must be finite"));
        }
    }
    Ok(file.material)
}

/// The shipped default materials.
pub fn default_materials() -> Vec<O2IMaterial> {
    parse_material_table(DEFAULT_MATERIALS).expect("shipped material table is valid")
}

pub fn find_material(name: &str) -> Option<O2IMaterial> {
    default_materials().into_iter().find(|m| m.name == name)
}

/// Thermal noise power in dBW for a bandwidth and noise figure at 290 K.
pub fn noise_power_dbw(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    boltzmann_db() + 10.0 * T0_KELVIN.log10() + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

pub fn terrestrial_snr_db(p_tx_dbm: f64, bf_gain_linear: f64, noise_figure_db: f64, bandwidth_hz: f64) -> f64 {
    if !(bf_gain_linear > 0.0) {
        return DB_FLOOR;
    }
    (p_tx_dbm - 30.0) + 10.0 * bf_gain_linear.log10() - noise_power_dbw(bandwidth_hz, noise_figure_db)
}

pub fn sinr_db(serving_rx_dbw: f64, interferer_rx_dbw: &[f64], noise_dbw: f64) -> f64 {
    let denom: f64 = interferer_rx_dbw.iter().map(|i| db_to_lin(*i)).sum::<f64>() + db_to_lin(noise_dbw);
    serving_rx_dbw - 10.0 * denom.log10()
}

/// Effective aperture `G λ² / 4π` in m².
pub fn effective_aperture_m2(freq_hz: f64, antenna_gain_dbi: f64) -> f64 {
    db_to_lin(antenna_gain_dbi) * wavelength(freq_hz).powi(2) / (4.0 * PI)
}

/// Power received from a source of flux density `flux_jy` over a bandwidth.
pub fn jansky_rx_power_dbm(flux_jy: f64, freq_hz: f64, antenna_gain_dbi: f64, bandwidth_hz: f64) -> Result<f64> {
    if !(flux_jy > 0.0 && freq_hz > 0.0 && bandwidth_hz > 0.0) {
        return Err(SimError::Domain("flux, frequency and bandwidth must be positive".into()));
    }
    let w = flux_jy * JANSKY * effective_aperture_m2(freq_hz, antenna_gain_dbi) * bandwidth_hz;
    Ok(10.0 * w.log10() + 30.0)
}
