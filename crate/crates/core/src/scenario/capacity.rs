//! Multi-band downlink capacity drops.
//!
//! Base stations sit on a square grid; a UE is dropped uniformly over the
//! service area and attaches, per band, to the site with the best SNR. All
//! bands reuse the same random draws, so per-band differences come from the
//! carrier, the arrays and the bandwidth only.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antenna::ArraySpec;
use crate::beamforming::{link_gain, svd_beamformers};
use crate::channel::{apply_blockage, assemble_mimo, synth_terrestrial_paths, PathSet};
use crate::error::Result;
use crate::geometry::{Direction, Orientation};
use crate::linkbudget::{noise_power_dbw, o2i_loss_db, rate_bps, sinr_db, terrestrial_snr_db, O2IMaterial, DB_FLOOR};

use super::config::{BandConfig, ScenarioConfig};
use super::rng::{stream_rng, Stream};
use super::{sector_yaw_deg, with_pool};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandOutcome {
    pub freq_hz: f64,
    pub serving_bs: usize,
    pub snr_db: f64,
    pub sinr_db: Option<f64>,
    pub rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRecord {
    pub drop_index: u64,
    pub ue_position: [f64; 3],
    pub material: Option<String>,
    pub bands: Vec<BandOutcome>,
    pub best_band_index: usize,
    pub best_rate_bps: f64,
}

/// Site positions: rows of `grid_cols` sites at `isd_m` pitch, centred in
/// the service area.
pub fn bs_positions(cfg: &ScenarioConfig) -> Vec<[f64; 3]> {
    let c = &cfg.capacity;
    let cols = c.grid_cols.min(c.n_bs);
    let rows = c.n_bs.div_ceil(cols);
    let x0 = 0.5 * (c.area_width_m - (cols - 1) as f64 * c.isd_m);
    let y0 = 0.5 * (c.area_height_m - (rows - 1) as f64 * c.isd_m);
    (0..c.n_bs)
        .map(|i| {
            let (r, k) = (i / cols, i % cols);
            [x0 + k as f64 * c.isd_m, y0 + r as f64 * c.isd_m, cfg.link.bs_height_m]
        })
        .collect()
}

fn sample_material<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> O2IMaterial {
    let shares = &cfg.capacity.indoor.materials;
    let total: f64 = shares.iter().map(|m| m.weight).sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut pick = shares.len() - 1;
    for (i, m) in shares.iter().enumerate() {
        acc += m.weight;
        if u < acc && m.weight > 0.0 {
            pick = i;
            break;
        }
    }
    // validated in ScenarioConfig::validate
    shares[pick].material().expect("validated material")
}

fn sector_mount(cfg: &ScenarioConfig, bs: [f64; 3], target: [f64; 3]) -> Orientation {
    let az = Direction::between(bs, target).azimuth_deg;
    Orientation::downtilted(sector_yaw_deg(az, cfg.link.n_sectors), cfg.link.bs_downtilt_deg)
}

/// Interfering site's transmit beam, aimed at a UE of its own.
fn interferer_beam(
    cfg: &ScenarioConfig,
    drop_index: u64,
    site: usize,
    bs_pos: [f64; 3],
    band: &BandConfig,
) -> Result<(ArraySpec, crate::linalg::ComplexVector)> {
    let c = &cfg.capacity;
    let mut rng = stream_rng(cfg.master_seed, drop_index, Stream::InterfererPlacement, site as u64);
    let ue_pos = [
        bs_pos[0] + (rng.random::<f64>() - 0.5) * c.isd_m,
        bs_pos[1] + (rng.random::<f64>() - 0.5) * c.isd_m,
        cfg.link.ue_height_m,
    ];
    let ue = band.ue_array.spec().with_mount(Orientation::random(&mut rng));
    let bs = band.bs_array.spec().with_mount(sector_mount(cfg, bs_pos, ue_pos));
    let mut rng = stream_rng(cfg.master_seed, drop_index, Stream::InterfererPaths, site as u64);
    let paths = synth_terrestrial_paths(&cfg.channel, bs_pos, ue_pos, band.frequency_hz, &mut rng)?;
    let bf = svd_beamformers(&assemble_mimo(&paths, &bs, &ue, band.frequency_hz)?)?;
    Ok((bs, bf.w_t))
}

pub fn run_capacity_drop(cfg: &ScenarioConfig, drop_index: u64) -> Result<CapacityRecord> {
    let c = &cfg.capacity;
    let sites = bs_positions(cfg);

    let mut rng = stream_rng(cfg.master_seed, drop_index, Stream::Placement, 0);
    let ue_pos = [
        rng.random::<f64>() * c.area_width_m,
        rng.random::<f64>() * c.area_height_m,
        cfg.link.ue_height_m,
    ];
    let ue_mount = Orientation::random(&mut rng);

    let material = c.indoor.enabled.then(|| {
        let mut rng = stream_rng(cfg.master_seed, drop_index, Stream::Indoor, 0);
        sample_material(cfg, &mut rng)
    });

    let p_tx_dbw = cfg.link.gnb_tx_power_dbm - 30.0;
    let nf = cfg.link.ue_noise_figure_db;
    let mut bands = Vec::with_capacity(c.bands.len());
    for band in &c.bands {
        let f = band.frequency_hz;
        let ue = band.ue_array.spec().with_mount(ue_mount);
        let o2i = material.as_ref().map_or(0.0, |m| o2i_loss_db(m, f / 1e9));

        // Per-site paths with blockage and penetration loss applied.
        let links: Vec<PathSet> = sites
            .iter()
            .enumerate()
            .map(|(j, bs)| {
                let mut rng = stream_rng(cfg.master_seed, drop_index, Stream::TerrestrialPaths, j as u64);
                let paths = synth_terrestrial_paths(&cfg.channel, *bs, ue_pos, f, &mut rng)?;
                let mut rng = stream_rng(cfg.master_seed, drop_index, Stream::Blockage, j as u64);
                Ok(apply_blockage(&paths, &cfg.channel, &mut rng).with_extra_loss(o2i))
            })
            .collect::<Result<_>>()?;

        let mut serving = 0;
        let mut best_gain = f64::NEG_INFINITY;
        let mut serving_bf = None;
        for (j, (bs_pos, paths)) in sites.iter().zip(&links).enumerate() {
            let bs = band.bs_array.spec().with_mount(sector_mount(cfg, *bs_pos, ue_pos));
            let bf = svd_beamformers(&assemble_mimo(paths, &bs, &ue, f)?)?;
            if bf.gain_linear > best_gain {
                best_gain = bf.gain_linear;
                serving = j;
                serving_bf = Some(bf);
            }
        }
        let serving_bf = serving_bf.expect("at least one site");
        let snr_db = terrestrial_snr_db(cfg.link.gnb_tx_power_dbm, serving_bf.gain_linear, nf, band.bandwidth_hz);

        let sinr = if c.interference.enabled {
            let mut interferers = Vec::with_capacity(sites.len().saturating_sub(1));
            for (j, (bs_pos, paths)) in sites.iter().zip(&links).enumerate() {
                if j == serving {
                    continue;
                }
                let (bs, w_t) = interferer_beam(cfg, drop_index, j, *bs_pos, band)?;
                let g = link_gain(&assemble_mimo(paths, &bs, &ue, f)?, &serving_bf.w_r, &w_t);
                interferers.push(if g > 0.0 { p_tx_dbw + 10.0 * g.log10() } else { DB_FLOOR });
            }
            let serving_dbw = if serving_bf.gain_linear > 0.0 {
                p_tx_dbw + 10.0 * serving_bf.gain_linear.log10()
            } else {
                DB_FLOOR
            };
            Some(sinr_db(serving_dbw, &interferers, noise_power_dbw(band.bandwidth_hz, nf)))
        } else {
            None
        };

        bands.push(BandOutcome {
            freq_hz: f,
            serving_bs: serving,
            snr_db,
            sinr_db: sinr,
            rate_bps: rate_bps(sinr.unwrap_or(snr_db), band.bandwidth_hz, &cfg.rate_model),
        });
    }

    let mut best = 0;
    for (i, b) in bands.iter().enumerate() {
        if b.rate_bps > bands[best].rate_bps {
            best = i;
        }
    }
    Ok(CapacityRecord {
        drop_index,
        ue_position: ue_pos,
        material: material.map(|m| m.name),
        best_rate_bps: bands[best].rate_bps,
        best_band_index: best,
        bands,
    })
}

pub fn run_capacity(cfg: &ScenarioConfig, threads: usize) -> Result<Vec<CapacityRecord>> {
    with_pool(threads, || {
        (0..cfg.n_drops as u64)
            .into_par_iter()
            .map(|i| run_capacity_drop(cfg, i))
            .collect()
    })
}
