//! Monte-Carlo orchestration for the two experiment families.

pub mod capacity;
pub mod config;
pub mod rng;
pub mod satint;
pub mod stats;

pub use capacity::{run_capacity, run_capacity_drop, BandOutcome, CapacityRecord};
pub use config::{LinkDirection, ScenarioConfig};
pub use satint::{run_satint, run_satint_drop, LambdaPoint, SatIntRecord};
pub use stats::{empirical_cdf, fraction_exceeding, median, percentile};

use crate::error::{Result, SimError};
use crate::geometry::wrap_degrees;

/// Boresight azimuth of the sector containing `azimuth_deg`; sector centres
/// are at multiples of `360 / n_sectors`.
pub fn sector_yaw_deg(azimuth_deg: f64, n_sectors: u32) -> f64 {
    let width = 360.0 / n_sectors as f64;
    wrap_degrees((wrap_degrees(azimuth_deg) / width).round() * width)
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub(crate) fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if threads == 0 {
        return Err(SimError::Domain("thread count must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SimError::Domain(format!("cannot start worker pool: {e}")))?
        .install(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sectors() {
        assert_eq!(sector_yaw_deg(10.0, 3), 0.0);
        assert_eq!(sector_yaw_deg(70.0, 3), 120.0);
        assert_eq!(sector_yaw_deg(350.0, 3), 0.0);
        assert_eq!(sector_yaw_deg(200.0, 3), 240.0);
        assert_eq!(sector_yaw_deg(123.0, 1), 0.0);
    }
}
