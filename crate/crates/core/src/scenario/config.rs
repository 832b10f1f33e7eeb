//! Declarative run description, loaded from TOML.
//!
//! Every section is optional; omitted fields take the documented defaults.
//! Unknown keys are rejected so typos cannot silently fall back to defaults.

use serde::{Deserialize, Serialize};

use crate::antenna::{ArraySpec, ElementPattern};
use crate::channel::{AngularErrorModel, ChannelModelConfig};
use crate::error::{Result, SimError};
use crate::geometry::EARTH_RADIUS_M;
use crate::linkbudget::{find_material, RateModel, SatLinkBudget};
use crate::linkbudget::{boltzmann_db, O2IMaterial};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkDirection {
    /// gNB transmits.
    Dl,
    /// UE transmits.
    Ul,
}

impl LinkDirection {
    pub fn as_str(&self) -> &'static str {
        match self {
            LinkDirection::Dl => "dl",
            LinkDirection::Ul => "ul",
        }
    }
}

impl std::str::FromStr for LinkDirection {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dl" => Ok(LinkDirection::Dl),
            "ul" => Ok(LinkDirection::Ul),
            other => Err(SimError::config("direction", format!("expected dl or ul, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    pub spacing_wavelengths: f64,
    pub pattern: ElementPattern,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self::ura(1, 1)
    }
}

impl ArrayConfig {
    pub fn ura(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            spacing_wavelengths: 0.5,
            pattern: ElementPattern::default(),
        }
    }

    pub fn spec(&self) -> ArraySpec {
        ArraySpec {
            pattern: self.pattern,
            rows: self.rows,
            cols: self.cols,
            spacing_wavelengths: self.spacing_wavelengths,
            mount: Default::default(),
        }
    }

    fn validate(&self, path: &str) -> Result<()> {
        self.spec()
            .validate()
            .map_err(|e| SimError::config(path, e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SatConfig {
    pub altitude_m: f64,
    pub earth_radius_m: f64,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
    pub g_over_t_dbk: f64,
    pub bandwidth_hz: f64,
    pub extra_loss_db: f64,
    /// Add a ground-reflected path to the satellite channel.
    pub include_nlos: bool,
    pub nlos_extra_loss_db: f64,
}

impl Default for SatConfig {
    fn default() -> Self {
        Self {
            altitude_m: 600e3,
            earth_radius_m: EARTH_RADIUS_M,
            elevation_min_deg: 10.0,
            elevation_max_deg: 90.0,
            g_over_t_dbk: 13.0,
            bandwidth_hz: 30e6,
            extra_loss_db: 0.0,
            include_nlos: false,
            nlos_extra_loss_db: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub max_ue_range_m: f64,
    pub min_ue_range_m: f64,
    pub bs_downtilt_deg: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub n_sectors: u32,
    pub gnb_tx_power_dbm: f64,
    pub ue_tx_power_dbm: f64,
    pub ue_noise_figure_db: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            max_ue_range_m: 1000.0,
            min_ue_range_m: 10.0,
            bs_downtilt_deg: 12.0,
            bs_height_m: 10.0,
            ue_height_m: 1.5,
            n_sectors: 3,
            gnb_tx_power_dbm: 33.0,
            ue_tx_power_dbm: 23.0,
            ue_noise_figure_db: 7.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AngularErrors {
    pub enabled: bool,
    pub gnb: AngularErrorModel,
    pub ue: AngularErrorModel,
    /// Directions averaged in the robust covariance.
    pub robust_samples: usize,
}

impl Default for AngularErrors {
    fn default() -> Self {
        Self {
            enabled: false,
            gnb: AngularErrorModel::gnb(),
            ue: AngularErrorModel::ue(),
            robust_samples: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SatIntConfig {
    pub frequencies_hz: Vec<f64>,
    pub bs_array: ArrayConfig,
    pub ue_array: ArrayConfig,
    pub lambda_grid: Vec<f64>,
}

impl Default for SatIntConfig {
    fn default() -> Self {
        Self {
            frequencies_hz: vec![6e9, 18e9],
            bs_array: ArrayConfig::ura(8, 8),
            ue_array: ArrayConfig::ura(1, 2),
            lambda_grid: vec![0.0, 1e6, 1e8],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandConfig {
    pub frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub bs_array: ArrayConfig,
    pub ue_array: ArrayConfig,
}

impl Default for BandConfig {
    fn default() -> Self {
        Self {
            frequency_hz: 6e9,
            bandwidth_hz: 100e6,
            bs_array: ArrayConfig::ura(2, 2),
            ue_array: ArrayConfig::ura(1, 2),
        }
    }
}

/// Indoor material, either a row of the shipped table (by name) or explicit
/// coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialShare {
    pub name: String,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_db_per_ghz: Option<f64>,
}

impl MaterialShare {
    fn named(name: &str, weight: f64) -> Self {
        Self {
            name: name.into(),
            weight,
            a_db: None,
            b_db_per_ghz: None,
        }
    }

    pub fn material(&self) -> Option<O2IMaterial> {
        match (self.a_db, self.b_db_per_ghz) {
            (Some(a), Some(b)) => Some(O2IMaterial {
                name: self.name.clone(),
                a_db: a,
                b_db_per_ghz: b,
            }),
            (None, None) => find_material(&self.name),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndoorConfig {
    pub enabled: bool,
    pub materials: Vec<MaterialShare>,
}

impl Default for IndoorConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            materials: ["glass", "irr_glass", "concrete", "wood"]
                .iter()
                .map(|n| MaterialShare::named(n, 0.25))
                .collect(),
        }
    }
}

impl IndoorConfig {
    pub fn concrete_only() -> Self {
        Self {
            enabled: true,
            materials: vec![MaterialShare::named("concrete", 1.0)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterferenceConfig {
    pub enabled: bool,
}

#[allow(clippy::derivable_impls)]
impl Default for InterferenceConfig {
    fn default() -> Self {
        Self { enabled: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityConfig {
    pub bands: Vec<BandConfig>,
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub n_bs: usize,
    /// Sites per row of the square grid.
    pub grid_cols: usize,
    pub isd_m: f64,
    pub indoor: IndoorConfig,
    pub interference: InterferenceConfig,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        let band = |ghz: f64, mhz: f64, bs: usize, ue: usize| BandConfig {
            frequency_hz: ghz * 1e9,
            bandwidth_hz: mhz * 1e6,
            bs_array: ArrayConfig::ura(bs, bs),
            ue_array: ArrayConfig::ura(1, ue),
        };
        Self {
            bands: vec![
                band(6.0, 100.0, 2, 2),
                band(12.0, 200.0, 4, 2),
                band(18.0, 300.0, 5, 3),
                band(24.0, 400.0, 7, 3),
            ],
            area_width_m: 1120.0,
            area_height_m: 510.0,
            n_bs: 18,
            grid_cols: 6,
            isd_m: 200.0,
            indoor: IndoorConfig::default(),
            interference: InterferenceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub master_seed: u64,
    pub n_drops: usize,
    pub direction: LinkDirection,
    pub link: LinkConfig,
    pub sat: SatConfig,
    pub channel: ChannelModelConfig,
    pub angular_errors: AngularErrors,
    pub rate_model: RateModel,
    pub satint: SatIntConfig,
    pub capacity: CapacityConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            master_seed: 1,
            n_drops: 2000,
            direction: LinkDirection::Dl,
            link: LinkConfig::default(),
            sat: SatConfig::default(),
            channel: ChannelModelConfig::default(),
            angular_errors: AngularErrors::default(),
            rate_model: RateModel::default(),
            satint: SatIntConfig::default(),
            capacity: CapacityConfig::default(),
        }
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::config(path, format!("{v} must be positive and finite")))
    }
}

fn non_negative(path: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::config(path, format!("{v} must be finite and >= 0")))
    }
}

fn finite(path: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(SimError::config(path, format!("{v} must be finite")))
    }
}

impl ScenarioConfig {
    /// Satellite budget for the configured transmitter.
    pub fn sat_budget(&self) -> SatLinkBudget {
        let p_tx_dbm = match self.direction {
            LinkDirection::Dl => self.link.gnb_tx_power_dbm,
            LinkDirection::Ul => self.link.ue_tx_power_dbm,
        };
        SatLinkBudget {
            p_tx_dbm,
            g_over_t_dbk: self.sat.g_over_t_dbk,
            extra_loss_db: self.sat.extra_loss_db,
            bandwidth_hz: self.sat.bandwidth_hz,
            boltzmann_db: boltzmann_db(),
        }
    }

    /// Pointing error of the transmitter that does the nulling.
    pub fn tx_angular_error(&self) -> AngularErrorModel {
        match self.direction {
            LinkDirection::Dl => self.angular_errors.gnb,
            LinkDirection::Ul => self.angular_errors.ue,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SimError::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.master_seed > i64::MAX as u64 {
            return Err(SimError::config("master_seed", "must fit in a signed 64-bit integer"));
        }
        if self.n_drops == 0 {
            return Err(SimError::config("n_drops", "must be at least 1"));
        }

        let l = &self.link;
        positive("link.max_ue_range_m", l.max_ue_range_m)?;
        non_negative("link.min_ue_range_m", l.min_ue_range_m)?;
        if l.min_ue_range_m >= l.max_ue_range_m {
            return Err(SimError::config("link.min_ue_range_m", "must be below link.max_ue_range_m"));
        }
        finite("link.bs_downtilt_deg", l.bs_downtilt_deg)?;
        if l.bs_downtilt_deg.abs() > 90.0 {
            return Err(SimError::config("link.bs_downtilt_deg", "must lie in [-90, 90]"));
        }
        non_negative("link.bs_height_m", l.bs_height_m)?;
        non_negative("link.ue_height_m", l.ue_height_m)?;
        if l.n_sectors == 0 {
            return Err(SimError::config("link.n_sectors", "must be at least 1"));
        }
        finite("link.gnb_tx_power_dbm", l.gnb_tx_power_dbm)?;
        finite("link.ue_tx_power_dbm", l.ue_tx_power_dbm)?;
        finite("link.ue_noise_figure_db", l.ue_noise_figure_db)?;

        let s = &self.sat;
        positive("sat.altitude_m", s.altitude_m)?;
        positive("sat.earth_radius_m", s.earth_radius_m)?;
        if !(0.0 <= s.elevation_min_deg && s.elevation_min_deg < s.elevation_max_deg && s.elevation_max_deg <= 90.0) {
            return Err(SimError::config(
                "sat.elevation_min_deg",
                "elevation range must satisfy 0 <= min < max <= 90",
            ));
        }
        finite("sat.g_over_t_dbk", s.g_over_t_dbk)?;
        positive("sat.bandwidth_hz", s.bandwidth_hz)?;
        finite("sat.extra_loss_db", s.extra_loss_db)?;
        non_negative("sat.nlos_extra_loss_db", s.nlos_extra_loss_db)?;

        self.channel.validate()?;
        self.angular_errors.gnb.validate("angular_errors.gnb")?;
        self.angular_errors.ue.validate("angular_errors.ue")?;
        if self.angular_errors.robust_samples == 0 {
            return Err(SimError::config("angular_errors.robust_samples", "must be at least 1"));
        }
        self.rate_model.validate("rate_model")?;

        let si = &self.satint;
        if si.frequencies_hz.is_empty() {
            return Err(SimError::config("satint.frequencies_hz", "must not be empty"));
        }
        for (i, f) in si.frequencies_hz.iter().enumerate() {
            positive(&format!("satint.frequencies_hz[{i}]"), *f)?;
        }
        si.bs_array.validate("satint.bs_array")?;
        si.ue_array.validate("satint.ue_array")?;
        if si.lambda_grid.is_empty() {
            return Err(SimError::config("satint.lambda_grid", "must not be empty"));
        }
        for (i, w) in si.lambda_grid.iter().enumerate() {
            non_negative(&format!("satint.lambda_grid[{i}]"), *w)?;
            if i > 0 && *w <= si.lambda_grid[i - 1] {
                return Err(SimError::config(
                    format!("satint.lambda_grid[{i}]"),
                    "grid must be strictly ascending",
                ));
            }
        }

        let c = &self.capacity;
        if c.bands.is_empty() {
            return Err(SimError::config("capacity.bands", "must not be empty"));
        }
        for (i, b) in c.bands.iter().enumerate() {
            positive(&format!("capacity.bands[{i}].frequency_hz"), b.frequency_hz)?;
            positive(&format!("capacity.bands[{i}].bandwidth_hz"), b.bandwidth_hz)?;
            b.bs_array.validate(&format!("capacity.bands[{i}].bs_array"))?;
            b.ue_array.validate(&format!("capacity.bands[{i}].ue_array"))?;
        }
        positive("capacity.area_width_m", c.area_width_m)?;
        positive("capacity.area_height_m", c.area_height_m)?;
        positive("capacity.isd_m", c.isd_m)?;
        if c.n_bs == 0 {
            return Err(SimError::config("capacity.n_bs", "must be at least 1"));
        }
        if c.grid_cols == 0 {
            return Err(SimError::config("capacity.grid_cols", "must be at least 1"));
        }
        if c.indoor.materials.is_empty() {
            return Err(SimError::config("capacity.indoor.materials", "must not be empty"));
        }
        let mut total = 0.0;
        for (i, m) in c.indoor.materials.iter().enumerate() {
            let path = format!("capacity.indoor.materials[{i}]");
            non_negative(&format!("{path}.weight"), m.weight)?;
            total += m.weight;
            match m.material() {
                Some(mat) if mat.a_db.is_finite() && mat.b_db_per_ghz.is_finite() => {}
                Some(_) => return Err(SimError::config(path, "coefficients must be finite")),
                None => {
                    return Err(SimError::config(
                        path,
                        format!(
                            "unknown material {:?}; give both a_db and b_db_per_ghz or use a shipped name",
                            m.name
                        ),
                    ))
                }
            }
        }
        if !(total > 0.0) {
            return Err(SimError::config("capacity.indoor.materials", "weights must not all be zero"));
        }
        Ok(())
    }

    /// Parses TOML without validating. Errors carry the offending field path.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| SimError::config("<document>", e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            SimError::config(path, e.into_inner().to_string())
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SimError::config("<document>", e.to_string()))
    }
}
