//! Earth–satellite geometry, directions, and array mounting rotations.
//!
//! Frames are right-handed East-North-Up. A [`Direction`] is an
//! (azimuth, elevation) pair in degrees, azimuth counter-clockwise from the
//! frame's x axis and elevation above its xy plane. In an array-local frame
//! x is the array boresight, y is horizontal across the face and z points up
//! the face.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Observer-to-satellite geometry for a spherical Earth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarthSatGeometry {
    pub earth_radius_m: f64,
    pub sat_altitude_m: f64,
    pub elevation_deg: f64,
    pub azimuth_deg: f64,
}

impl EarthSatGeometry {
    pub fn new(sat_altitude_m: f64, direction: Direction) -> Self {
        Self {
            earth_radius_m: EARTH_RADIUS_M,
            sat_altitude_m,
            elevation_deg: direction.elevation_deg,
            azimuth_deg: direction.azimuth_deg,
        }
    }

    pub fn with_earth_radius(mut self, earth_radius_m: f64) -> Self {
        self.earth_radius_m = earth_radius_m;
        self
    }

    pub fn direction(&self) -> Direction {
        Direction::new(self.azimuth_deg, self.elevation_deg)
    }
}

/// Line-of-sight range from a ground observer to a satellite at the given
/// elevation: `sqrt(R² sin²θ + h² + 2hR) − R sinθ`.
pub fn slant_distance(geom: &EarthSatGeometry) -> Result<f64> {
    let r = geom.earth_radius_m;
    let h = geom.sat_altitude_m;
    if !(r > 0.0) || !(h > 0.0) {
        return Err(SimError::Domain(format!(
            "slant distance needs positive radius and altitude (R={r}, h={h})"
        )));
    }
    let s = geom.elevation_deg.to_radians().sin();
    let rs = r * s;
    // Rationalized form of sqrt(rs² + h² + 2hr) − rs; avoids cancellation
    // at high elevation and is exact (h) at zenith.
    let radicand = rs * rs + h * (h + 2.0 * r);
    let d = h * (h + 2.0 * r) / (radicand.sqrt() + rs);
    if s == 1.0 {
        return Ok(h);
    }
    Ok(d)
}

/// A pointing direction in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl Direction {
    /// Builds a direction, wrapping azimuth into `[0, 360)` and clamping
    /// elevation into `[-90, 90]`.
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Self {
        Self {
            azimuth_deg: wrap_degrees(azimuth_deg),
            elevation_deg: elevation_deg.clamp(-90.0, 90.0),
        }
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (sa, ca) = self.azimuth_deg.to_radians().sin_cos();
        let (se, ce) = self.elevation_deg.to_radians().sin_cos();
        [ce * ca, ce * sa, se]
    }

    /// Inverse of [`Direction::unit_vector`]; the input need not be normalized.
    pub fn from_vector(v: [f64; 3]) -> Self {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let z = (v[2] / n).clamp(-1.0, 1.0);
        let el = z.asin().to_degrees();
        let az = v[1].atan2(v[0]).to_degrees();
        Self::new(az, el)
    }

    /// Direction from `from` towards `to` (both ENU positions in metres).
    pub fn between(from: [f64; 3], to: [f64; 3]) -> Self {
        Self::from_vector([to[0] - from[0], to[1] - from[1], to[2] - from[2]])
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.azimuth_deg + 180.0, -self.elevation_deg)
    }

    /// Angle between two directions in degrees.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        dot3(&a, &b).clamp(-1.0, 1.0).acos().to_degrees()
    }
}

/// Wraps an angle into `[0, 360)`.
pub fn wrap_degrees(a: f64) -> f64 {
    let w = a.rem_euclid(360.0);
    // rem_euclid can return 360.0 for tiny negative inputs
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Wraps an angle into `(-180, 180]`.
pub fn wrap_signed_degrees(a: f64) -> f64 {
    let w = wrap_degrees(a);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Rigid rotation from the global frame to an array-local frame.
///
/// Intrinsic Z-Y-X (yaw, pitch, roll). Yaw turns the boresight
/// counter-clockwise seen from above; positive pitch raises the boresight
/// (a 12° downtilt is `pitch_deg = -12`); roll turns about the boresight.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Orientation {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
}

type Mat3 = [[f64; 3]; 3];

impl Orientation {
    pub fn new(yaw_deg: f64, pitch_deg: f64, roll_deg: f64) -> Self {
        Self {
            yaw_deg,
            pitch_deg,
            roll_deg,
        }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    /// Fixed mount facing `yaw_deg` with `downtilt_deg` of mechanical tilt.
    pub fn downtilted(yaw_deg: f64, downtilt_deg: f64) -> Self {
        Self::new(yaw_deg, -downtilt_deg, 0.0)
    }

    /// Local-to-global rotation matrix (columns are the local axes in global
    /// coordinates).
    pub fn matrix(&self) -> Mat3 {
        let (sy, cy) = self.yaw_deg.to_radians().sin_cos();
        // standard right-handed rotation about y by -pitch
        let (sp, cp) = (-self.pitch_deg).to_radians().sin_cos();
        let (sr, cr) = self.roll_deg.to_radians().sin_cos();
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    }

    fn from_matrix(m: &Mat3) -> Self {
        let sp = (-m[2][0]).clamp(-1.0, 1.0);
        let std_pitch = sp.asin();
        let (yaw, roll) = if sp.abs() < 1.0 - 1e-12 {
            (m[1][0].atan2(m[0][0]), m[2][1].atan2(m[2][2]))
        } else {
            // gimbal lock: fold everything into yaw
            ((-m[0][1]).atan2(m[1][1]), 0.0)
        };
        Self::new(yaw.to_degrees(), -std_pitch.to_degrees(), roll.to_degrees())
    }

    /// The rotation undoing this one.
    pub fn inverse(&self) -> Self {
        Self::from_matrix(&transpose(&self.matrix()))
    }

    /// `self` followed by `other` (first rotate into `self`'s frame, then
    /// interpret `other` relative to it).
    pub fn then(&self, other: &Orientation) -> Self {
        Self::from_matrix(&matmul3(&self.matrix(), &other.matrix()))
    }

    /// Uniformly distributed rotation (Haar measure on SO(3)).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        // Shoemake's subgroup algorithm for a uniform unit quaternion.
        let u1: f64 = rng.random();
        let u2: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let u3: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let a = (1.0 - u1).sqrt();
        let b = u1.sqrt();
        let (w, x, y, z) = (a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos());
        let m = [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - z * w),
                2.0 * (x * z + y * w),
            ],
            [
                2.0 * (x * y + z * w),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - x * w),
            ],
            [
                2.0 * (x * z - y * w),
                2.0 * (y * z + x * w),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ];
        Self::from_matrix(&m)
    }
}

fn transpose(m: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            t[j][i] = *x;
        }
    }
    t
}

fn matmul3(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Expresses a global direction in the array-local frame of `mount`.
pub fn to_local_direction(global: &Direction, mount: &Orientation) -> Direction {
    let u = global.unit_vector();
    let r = mount.matrix();
    // local = Rᵀ u
    let local = [
        r[0][0] * u[0] + r[1][0] * u[1] + r[2][0] * u[2],
        r[0][1] * u[0] + r[1][1] * u[1] + r[2][1] * u[2],
        r[0][2] * u[0] + r[1][2] * u[1] + r[2][2] * u[2],
    ];
    Direction::from_vector(local)
}

/// Inverse of [`to_local_direction`].
pub fn to_global_direction(local: &Direction, mount: &Orientation) -> Direction {
    let u = local.unit_vector();
    let r = mount.matrix();
    let global = [dot3(&r[0], &u), dot3(&r[1], &u), dot3(&r[2], &u)];
    Direction::from_vector(global)
}

/// Samples a satellite direction: azimuth uniform on `[0, 360)`, elevation
/// uniform on `[elev_lo_deg, elev_hi_deg]`.
pub fn sample_satellite_direction<R: Rng + ?Sized>(
    rng: &mut R,
    elev_lo_deg: f64,
    elev_hi_deg: f64,
) -> Result<Direction> {
    if !(0.0..=90.0).contains(&elev_lo_deg)
        || !(0.0..=90.0).contains(&elev_hi_deg)
        || !(elev_lo_deg < elev_hi_deg)
    {
        return Err(SimError::InvalidRange(format!(
            "satellite elevation range [{elev_lo_deg}, {elev_hi_deg}] must satisfy 0 <= lo < hi <= 90"
        )));
    }
    let az = rng.random::<f64>() * 360.0;
    let el = elev_lo_deg + rng.random::<f64>() * (elev_hi_deg - elev_lo_deg);
    Ok(Direction::new(az, el))
}

/// Largest change in the line-of-sight angle to a satellite moving at
/// `sat_speed_mps` over `interval_s`: `atan(vT / h)` in degrees.
pub fn max_angular_variation(sat_speed_mps: f64, interval_s: f64, sat_altitude_m: f64) -> Result<f64> {
    if !(sat_speed_mps > 0.0) || !(interval_s >= 0.0) || !(sat_altitude_m > 0.0) {
        return Err(SimError::Domain(format!(
            "angular variation needs v > 0, T >= 0, h > 0 (v={sat_speed_mps}, T={interval_s}, h={sat_altitude_m})"
        )));
    }
    Ok((sat_speed_mps * interval_s / sat_altitude_m).atan().to_degrees())
}
