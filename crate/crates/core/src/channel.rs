//! Narrowband multipath channels.
//!
//! A parametric LOS-plus-clusters generator produces [`PathSet`]s, which are
//! turned into MIMO matrices or satellite interference vectors by summing
//! rank-one array-response products. Path gains carry propagation loss only;
//! element gains enter through [`array_response`].

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::antenna::{array_response, ArraySpec};
use crate::error::{Result, SimError};
use crate::geometry::{slant_distance, to_local_direction, Direction, EarthSatGeometry};
use crate::linalg::{ComplexMatrix, ComplexVector, C64};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn wavelength(freq_hz: f64) -> f64 {
    SPEED_OF_LIGHT / freq_hz
}

/// Free-space path loss `20 log10(4π d f / c)` in dB.
pub fn fspl_db(distance_m: f64, freq_hz: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !(freq_hz > 0.0) {
        return Err(SimError::Domain(format!(
            "free-space loss needs positive distance and frequency (d={distance_m}, f={freq_hz})"
        )));
    }
    Ok(20.0 * (4.0 * PI * distance_m * freq_hz / SPEED_OF_LIGHT).log10())
}

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    /// Propagation gain (negative loss) in dB, excluding antenna elements.
    pub gain_db: f64,
    pub phase_rad: f64,
    /// Departure direction, global frame.
    pub aod: Direction,
    /// Arrival direction, global frame.
    pub aoa: Direction,
    pub is_los: bool,
}

impl Path {
    fn amplitude(&self) -> C64 {
        C64::from_polar(10f64.powf(self.gain_db / 20.0), self.phase_rad)
    }

    /// The same path traversed in the opposite direction.
    pub fn reversed(&self) -> Path {
        Path {
            aod: self.aoa,
            aoa: self.aod,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub paths: Vec<Path>,
}

impl PathSet {
    pub fn new(paths: Vec<Path>) -> Self {
        Self { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn has_los(&self) -> bool {
        self.paths.iter().any(|p| p.is_los)
    }

    /// Swaps departure and arrival for use on the reverse link.
    pub fn reversed(&self) -> PathSet {
        PathSet::new(self.paths.iter().map(Path::reversed).collect())
    }

    /// Attenuates every path by `loss_db`.
    pub fn with_extra_loss(&self, loss_db: f64) -> PathSet {
        PathSet::new(
            self.paths
                .iter()
                .map(|p| Path {
                    gain_db: p.gain_db - loss_db,
                    ..*p
                })
                .collect(),
        )
    }

    /// Concatenation of two path sets.
    pub fn union(&self, other: &PathSet) -> PathSet {
        PathSet::new(self.paths.iter().chain(&other.paths).copied().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockageConfig {
    pub enabled: bool,
    /// Number of blockers the per-path probability is meant to represent.
    pub k_blockers: u32,
    pub block_prob_per_path: f64,
    pub block_loss_db: f64,
}

impl Default for BlockageConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            k_blockers: 4,
            block_prob_per_path: 0.3,
            block_loss_db: 20.0,
        }
    }
}

/// Knobs of the stochastic multipath generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelModelConfig {
    pub p_los: f64,
    pub n_nlos_clusters: u32,
    /// Mean of the exponential excess loss of each NLOS path.
    pub nlos_excess_loss_db: f64,
    /// Standard deviation of NLOS angles around the LOS angles.
    pub nlos_angle_spread_deg: f64,
    pub blockage: BlockageConfig,
}

impl Default for ChannelModelConfig {
    fn default() -> Self {
        Self {
            p_los: 0.8,
            n_nlos_clusters: 4,
            nlos_excess_loss_db: 15.0,
            nlos_angle_spread_deg: 30.0,
            blockage: BlockageConfig::default(),
        }
    }
}

impl ChannelModelConfig {
    /// Single deterministic LOS path.
    pub fn los_only() -> Self {
        Self {
            p_los: 1.0,
            n_nlos_clusters: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(SimError::config(name, format!("probability {p} outside [0, 1]")))
            }
        };
        prob("channel.p_los", self.p_los)?;
        prob("channel.blockage.block_prob_per_path", self.blockage.block_prob_per_path)?;
        if !(self.nlos_excess_loss_db >= 0.0) || !self.nlos_excess_loss_db.is_finite() {
            return Err(SimError::config("channel.nlos_excess_loss_db", "must be finite and >= 0"));
        }
        if !(self.nlos_angle_spread_deg >= 0.0) || !self.nlos_angle_spread_deg.is_finite() {
            return Err(SimError::config("channel.nlos_angle_spread_deg", "must be finite and >= 0"));
        }
        if !(self.blockage.block_loss_db >= 0.0) || !self.blockage.block_loss_db.is_finite() {
            return Err(SimError::config("channel.blockage.block_loss_db", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// RMS pointing error of an orientation sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngularErrorModel {
    pub rms_az_deg: f64,
    pub rms_el_deg: f64,
}

impl AngularErrorModel {
    pub const NONE: AngularErrorModel = AngularErrorModel {
        rms_az_deg: 0.0,
        rms_el_deg: 0.0,
    };

    /// High-precision compass at a base station.
    pub fn gnb() -> Self {
        Self {
            rms_az_deg: 0.3,
            rms_el_deg: 0.1,
        }
    }

    /// Magnetometer with IMU filtering in a handset.
    pub fn ue() -> Self {
        Self {
            rms_az_deg: 1.5,
            rms_el_deg: 1.5,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rms_az_deg == 0.0 && self.rms_el_deg == 0.0
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.rms_az_deg >= 0.0 && self.rms_el_deg >= 0.0)
            || !self.rms_az_deg.is_finite()
            || !self.rms_el_deg.is_finite()
        {
            return Err(SimError::config(path, "RMS angle errors must be finite and >= 0"));
        }
        Ok(())
    }
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, std: f64) -> f64 {
    // std validated non-negative and finite by callers
    Normal::new(0.0, std).map(|n| n.sample(rng)).unwrap_or(0.0)
}

/// Draws the terrestrial paths between two positions (ENU metres).
///
/// The random draws happen in a fixed order regardless of configuration
/// outcome (LOS coin, then per cluster: excess loss, four angle offsets,
/// phase), so path `k` of two calls with the same generator state uses the
/// same numbers even when the frequency differs.
pub fn synth_terrestrial_paths<R: Rng + ?Sized>(
    cfg: &ChannelModelConfig,
    tx_pos: [f64; 3],
    rx_pos: [f64; 3],
    freq_hz: f64,
    rng: &mut R,
) -> Result<PathSet> {
    let d = distance(tx_pos, rx_pos);
    if !(d > 0.0) {
        return Err(SimError::Domain("transmitter and receiver coincide".into()));
    }
    let loss = fspl_db(d, freq_hz)?;
    let aod = Direction::between(tx_pos, rx_pos);
    let aoa = Direction::between(rx_pos, tx_pos);

    let mut paths = Vec::with_capacity(cfg.n_nlos_clusters as usize + 1);
    let los = rng.random::<f64>() < cfg.p_los;
    let los_phase = rng.random::<f64>() * TAU;
    if los {
        paths.push(Path {
            gain_db: -loss,
            phase_rad: los_phase,
            aod,
            aoa,
            is_los: true,
        });
    }

    let excess = (cfg.nlos_excess_loss_db > 0.0)
        .then(|| Exp::new(1.0 / cfg.nlos_excess_loss_db).ok())
        .flatten();
    let sigma = cfg.nlos_angle_spread_deg;
    for _ in 0..cfg.n_nlos_clusters {
        let extra = match &excess {
            Some(e) => e.sample(rng),
            None => 0.0,
        };
        let d_aod_az = gaussian(rng, sigma);
        let d_aod_el = gaussian(rng, sigma);
        let d_aoa_az = gaussian(rng, sigma);
        let d_aoa_el = gaussian(rng, sigma);
        let phase = rng.random::<f64>() * TAU;
        paths.push(Path {
            gain_db: -loss - extra,
            phase_rad: phase,
            aod: Direction::new(aod.azimuth_deg + d_aod_az, aod.elevation_deg + d_aod_el),
            aoa: Direction::new(aoa.azimuth_deg + d_aoa_az, aoa.elevation_deg + d_aoa_el),
            is_los: false,
        });
    }
    Ok(PathSet::new(paths))
}

/// `H = Σ_p g_p e^{jψ_p} a_rx(aoa_p) a_tx(aod_p)ᴴ`, shape `N_rx × N_tx`.
pub fn assemble_mimo(paths: &PathSet, tx: &ArraySpec, rx: &ArraySpec, freq_hz: f64) -> Result<ComplexMatrix> {
    tx.validate()?;
    rx.validate()?;
    let wl = wavelength(freq_hz);
    let mut h = ComplexMatrix::zeros(rx.num_elements(), tx.num_elements());
    for p in &paths.paths {
        let a_rx = array_response(rx, &to_local_direction(&p.aoa, &rx.mount), wl);
        let a_tx = array_response(tx, &to_local_direction(&p.aod, &tx.mount), wl);
        h.add_outer(p.amplitude(), &a_rx, &a_tx);
    }
    Ok(h)
}

/// `h = Σ_p g_p e^{jψ_p} a_tx(aod_p)` for a single-antenna receiver.
pub fn assemble_vector(paths: &PathSet, tx: &ArraySpec, freq_hz: f64) -> Result<ComplexVector> {
    tx.validate()?;
    let wl = wavelength(freq_hz);
    let mut h = ComplexVector::zeros(tx.num_elements());
    for p in &paths.paths {
        let a_tx = array_response(tx, &to_local_direction(&p.aod, &tx.mount), wl);
        h.axpy(p.amplitude(), &a_tx);
    }
    Ok(h)
}

/// Paths from a ground transmitter to a satellite: the direct path at the
/// slant-range free-space loss, plus an optional ground reflection leaving
/// at the mirrored elevation with `nlos_extra_loss_db` more loss.
pub fn satellite_paths<R: Rng + ?Sized>(
    sat_dir_global: &Direction,
    geom: &EarthSatGeometry,
    freq_hz: f64,
    nlos_extra_loss_db: Option<f64>,
    rng: &mut R,
) -> Result<PathSet> {
    let loss = fspl_db(slant_distance(geom)?, freq_hz)?;
    let mut paths = vec![Path {
        gain_db: -loss,
        phase_rad: rng.random::<f64>() * TAU,
        aod: *sat_dir_global,
        aoa: sat_dir_global.reversed(),
        is_los: true,
    }];
    let refl_phase = rng.random::<f64>() * TAU;
    if let Some(extra) = nlos_extra_loss_db {
        let aod = Direction::new(sat_dir_global.azimuth_deg, -sat_dir_global.elevation_deg);
        paths.push(Path {
            gain_db: -loss - extra,
            phase_rad: refl_phase,
            aod,
            aoa: sat_dir_global.reversed(),
            is_los: false,
        });
    }
    Ok(PathSet::new(paths))
}

/// Channel vector from a ground array to a single-antenna satellite.
pub fn synth_satellite_channel<R: Rng + ?Sized>(
    tx: &ArraySpec,
    sat_dir_global: &Direction,
    geom: &EarthSatGeometry,
    freq_hz: f64,
    nlos_extra_loss_db: Option<f64>,
    rng: &mut R,
) -> Result<ComplexVector> {
    let paths = satellite_paths(sat_dir_global, geom, freq_hz, nlos_extra_loss_db, rng)?;
    assemble_vector(&paths, tx, freq_hz)
}

/// Deterministic LOS-only satellite channel (zero path phase), as predicted
/// from ephemeris for a given direction.
pub fn los_satellite_channel(
    tx: &ArraySpec,
    sat_dir_global: &Direction,
    sat_altitude_m: f64,
    earth_radius_m: f64,
    freq_hz: f64,
) -> Result<ComplexVector> {
    let geom = EarthSatGeometry::new(sat_altitude_m, *sat_dir_global).with_earth_radius(earth_radius_m);
    let loss = fspl_db(slant_distance(&geom)?, freq_hz)?;
    let wl = wavelength(freq_hz);
    let a = array_response(tx, &to_local_direction(sat_dir_global, &tx.mount), wl);
    Ok(a.scale_real(10f64.powf(-loss / 20.0)))
}

/// Adds Gaussian azimuth/elevation errors; elevation is clamped to ±90°.
pub fn perturb_direction<R: Rng + ?Sized>(dir: &Direction, err: &AngularErrorModel, rng: &mut R) -> Direction {
    let daz = gaussian(rng, err.rms_az_deg);
    let del = gaussian(rng, err.rms_el_deg);
    Direction::new(dir.azimuth_deg + daz, dir.elevation_deg + del)
}

/// Independently attenuates each path by `block_loss_db` with probability
/// `block_prob_per_path`. Identity when blockage is disabled.
pub fn apply_blockage<R: Rng + ?Sized>(paths: &PathSet, cfg: &ChannelModelConfig, rng: &mut R) -> PathSet {
    if !cfg.blockage.enabled {
        return paths.clone();
    }
    let b = &cfg.blockage;
    PathSet::new(
        paths
            .paths
            .iter()
            .map(|p| {
                let blocked = rng.random::<f64>() < b.block_prob_per_path;
                Path {
                    gain_db: if blocked { p.gain_db - b.block_loss_db } else { p.gain_db },
                    ..*p
                }
            })
            .collect(),
    )
}
