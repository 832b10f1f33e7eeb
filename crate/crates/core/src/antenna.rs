//! Element radiation pattern and planar array responses.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::geometry::{wrap_signed_degrees, Direction, Orientation};
use crate::linalg::{ComplexVector, C64};

/// Parabolic-in-dB sector element (3GPP TR 37.840 style).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElementPattern {
    pub max_gain_dbi: f64,
    pub hpbw_az_deg: f64,
    pub hpbw_el_deg: f64,
    pub front_to_back_db: f64,
    pub sidelobe_floor_db: f64,
}

impl Default for ElementPattern {
    fn default() -> Self {
        Self {
            max_gain_dbi: 8.0,
            hpbw_az_deg: 65.0,
            hpbw_el_deg: 65.0,
            front_to_back_db: 30.0,
            sidelobe_floor_db: 30.0,
        }
    }
}

impl ElementPattern {
    /// Unit-gain element, handy for scalar test channels.
    pub fn isotropic() -> Self {
        Self {
            max_gain_dbi: 0.0,
            hpbw_az_deg: 179.0,
            hpbw_el_deg: 179.0,
            front_to_back_db: 0.0,
            sidelobe_floor_db: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.max_gain_dbi,
            self.hpbw_az_deg,
            self.hpbw_el_deg,
            self.front_to_back_db,
            self.sidelobe_floor_db,
        ];
        if fields.iter().any(|x| !x.is_finite()) {
            return Err(SimError::Domain("element pattern has non-finite fields".into()));
        }
        for (name, bw) in [("hpbw_az_deg", self.hpbw_az_deg), ("hpbw_el_deg", self.hpbw_el_deg)] {
            if !(bw > 0.0 && bw < 180.0) {
                return Err(SimError::Domain(format!("{name} = {bw} must lie in (0, 180)")));
            }
        }
        if self.front_to_back_db < 0.0 || self.sidelobe_floor_db < 0.0 {
            return Err(SimError::Domain("pattern attenuations must be non-negative".into()));
        }
        Ok(())
    }
}

/// Element gain in dBi towards a direction given in the array-local frame.
///
/// Azimuth and elevation offsets are both measured from boresight.
pub fn element_gain_db(pattern: &ElementPattern, local_dir: &Direction) -> f64 {
    let phi = wrap_signed_degrees(local_dir.azimuth_deg);
    let theta = local_dir.elevation_deg;
    let a_h = -(12.0 * (phi / pattern.hpbw_az_deg).powi(2)).min(pattern.front_to_back_db);
    let a_v = -(12.0 * (theta / pattern.hpbw_el_deg).powi(2)).min(pattern.sidelobe_floor_db);
    pattern.max_gain_dbi - (-(a_h + a_v)).min(pattern.front_to_back_db)
}

/// Uniform rectangular array on the local y-z plane; a ULA is a single row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub pattern: ElementPattern,
    /// Elements along local z (vertical).
    pub rows: usize,
    /// Elements along local y (horizontal).
    pub cols: usize,
    /// Element pitch in carrier wavelengths.
    pub spacing_wavelengths: f64,
    pub mount: Orientation,
}

impl ArraySpec {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            pattern: ElementPattern::default(),
            rows,
            cols,
            spacing_wavelengths: 0.5,
            mount: Orientation::identity(),
        }
    }

    pub fn with_pattern(mut self, pattern: ElementPattern) -> Self {
        self.pattern = pattern;
        self
    }

    pub fn with_mount(mut self, mount: Orientation) -> Self {
        self.mount = mount;
        self
    }

    pub fn num_elements(&self) -> usize {
        self.rows * self.cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(SimError::Dimension(format!(
                "array must have at least one element ({}x{})",
                self.rows, self.cols
            )));
        }
        if !(self.spacing_wavelengths > 0.0) {
            return Err(SimError::Domain(format!(
                "element spacing {} must be positive",
                self.spacing_wavelengths
            )));
        }
        self.pattern.validate()
    }
}

/// Unit-norm steering vector for a local direction.
///
/// Element `(r, c)` sits at `spacing · λ · (0, c, r)` with the reference
/// element at the origin; the phase of each entry is `k · (position · u)`.
/// Element spacing is specified in wavelengths of the carrier, so the
/// wavelength only sets the physical scale.
pub fn steering_vector(spec: &ArraySpec, local_dir: &Direction, wavelength_m: f64) -> ComplexVector {
    let n = spec.num_elements();
    let u = local_dir.unit_vector();
    let d = spec.spacing_wavelengths * wavelength_m;
    let k = TAU / wavelength_m;
    let amp = 1.0 / (n as f64).sqrt();
    let mut out = Vec::with_capacity(n);
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            let phase = k * d * (c as f64 * u[1] + r as f64 * u[2]);
            out.push(C64::from_polar(amp, phase));
        }
    }
    ComplexVector::new(out)
}

/// Steering vector scaled by the element amplitude gain, so that
/// `‖response‖²` is the linear element gain.
pub fn array_response(spec: &ArraySpec, local_dir: &Direction, wavelength_m: f64) -> ComplexVector {
    let g = 10f64.powf(element_gain_db(&spec.pattern, local_dir) / 20.0);
    steering_vector(spec, local_dir, wavelength_m).scale_real(g)
}
