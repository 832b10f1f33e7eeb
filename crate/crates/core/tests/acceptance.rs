//! Acceptance suite: one PASS/FAIL line per criterion, with wall-clock limits.
//! Run with `cargo test --test acceptance`.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use fr3sim::beamforming::{dominant_eigpair, nulling_beamformer, nulling_objective, svd_beamformers, EIG_MAX_ITER, EIG_TOL};
use fr3sim::channel::ChannelModelConfig;
use fr3sim::geometry::{max_angular_variation, slant_distance, Direction, EarthSatGeometry};
use fr3sim::linalg::{ComplexMatrix, ComplexVector, C64};
use fr3sim::linkbudget::{jansky_rx_power_dbm, rate_bps, snr_degradation_delta};
use fr3sim::scenario::config::IndoorConfig;
use fr3sim::scenario::stats::{fraction_exceeding, mean, median, percentile};
use fr3sim::scenario::{run_capacity, run_satint, LinkDirection, ScenarioConfig};

type Outcome = Result<(bool, String), String>;

const THREADS: usize = 4;

struct Suite {
    failed: usize,
}

impl Suite {
    fn check(&mut self, id: &str, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok((ok, d)) => (ok, d),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= limit;
        let pass = ok && in_time;
        if !pass {
            self.failed += 1;
        }
        let timing = format!("{:.2}s/{:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64());
        let late = if in_time { "" } else { " TOO SLOW" };
        println!(
            "{} [{id}] {name}: {detail} ({timing}{late})",
            if pass { "PASS" } else { "FAIL" }
        );
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

fn rand_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gauss(rng))
}

fn rand_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> ComplexVector {
    (0..n).map(|_| gauss(rng) * scale).collect()
}

fn to_na(m: &ComplexMatrix) -> DMatrix<C64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn overlap(a: &ComplexVector, b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm()
}

fn analytic() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let d = slant_distance(&EarthSatGeometry::new(600e3, Direction::new(0.0, 90.0))).map_err(|e| e.to_string())?;
    ok &= d == 600e3;
    notes.push(format!("slant={d}"));

    let delta = snr_degradation_delta(-6.0);
    ok &= (delta - 0.973).abs() <= 0.001;
    notes.push(format!("delta(-6)={delta:.4}"));

    let dtheta = max_angular_variation(7.56e3, 1e-3, 600e3).map_err(|e| e.to_string())?;
    ok &= (dtheta - 7.2e-4).abs() <= 1e-5;
    notes.push(format!("dtheta={dtheta:.3e}"));

    let cfg = ScenarioConfig::default();
    let caps: Vec<f64> = cfg
        .capacity
        .bands
        .iter()
        .map(|b| rate_bps(300.0, b.bandwidth_hz, &cfg.rate_model))
        .collect();
    ok &= caps == [0.48e9, 0.96e9, 1.44e9, 1.92e9];
    notes.push(format!("caps={caps:?}"));

    let jy = jansky_rx_power_dbm(1.0, 6e9, 0.0, 1.0).map_err(|e| e.to_string())?;
    ok &= (jy + 267.0).abs() <= 1.0;
    notes.push(format!("1Jy={jy:.2}dBm"));

    Ok((ok, notes.join(", ")))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_val, mut worst_vec, mut ties, mut bad) = (0.0f64, 1.0f64, 0usize, 0usize);
    for i in 0..200 {
        if i % 2 == 0 {
            let n = rng.random_range(1..=8);
            let a = rand_matrix(&mut rng, n, n);
            let m = a.matmul(&a.adjoint()).hermitian_part();
            let mut shifted = m.clone();
            // indefinite half of the cases
            if i % 4 == 0 {
                shifted.add_assign(&ComplexMatrix::from_fn(n, n, |r, c| {
                    if r == c {
                        C64::new(-(n as f64) * 2.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }));
            }
            let eig = to_na(&shifted).symmetric_eigen();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
            if n > 1 && eig.eigenvalues[order[0]] - eig.eigenvalues[order[1]] < 1e-6 {
                ties += 1;
                continue;
            }
            let top = dominant_eigpair(&shifted, EIG_TOL, EIG_MAX_ITER).map_err(|e| e.to_string())?;
            let v: Vec<C64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
            let dv = (top.value - eig.eigenvalues[order[0]]).abs();
            let ov = overlap(&top.vector, &v);
            worst_val = worst_val.max(dv);
            worst_vec = worst_vec.min(ov);
            if dv > 1e-9 || ov <= 1.0 - 1e-9 {
                bad += 1;
            }
        } else {
            let rows = rng.random_range(1..=8);
            let cols = rng.random_range(1..=8);
            let h = rand_matrix(&mut rng, rows, cols);
            let svd = to_na(&h).svd(true, true);
            let sv = &svd.singular_values;
            let mut order: Vec<usize> = (0..sv.len()).collect();
            order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]));
            if sv.len() > 1 && sv[order[0]] - sv[order[1]] < 1e-6 {
                ties += 1;
                continue;
            }
            let bf = svd_beamformers(&h).map_err(|e| e.to_string())?;
            let u = svd.u.as_ref().expect("u requested");
            let v_t = svd.v_t.as_ref().expect("v_t requested");
            let u1: Vec<C64> = u.column(order[0]).iter().copied().collect();
            let v1: Vec<C64> = v_t.row(order[0]).iter().map(|z| z.conj()).collect();
            let dv = (bf.gain_linear.sqrt() - sv[order[0]]).abs();
            let ov = overlap(&bf.w_r, &u1).min(overlap(&bf.w_t, &v1));
            worst_val = worst_val.max(dv);
            worst_vec = worst_vec.min(ov);
            if dv > 1e-9 || ov <= 1.0 - 1e-9 {
                bad += 1;
            }
        }
    }
    Ok((
        bad == 0,
        format!("{bad} mismatches, {ties} ties skipped, max |dvalue|={worst_val:.2e}, min overlap=1-{:.2e}", 1.0 - worst_vec),
    ))
}

fn regularization_path() -> Outcome {
    let grid = [0.0, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = Vec::new();
    let mut worst_rho0 = 0.0f64;
    for inst in 0..100 {
        let rows = rng.random_range(1..=4);
        let cols = rng.random_range(2..=16);
        let h = rand_matrix(&mut rng, rows, cols);
        // satellite channels span many orders of magnitude below the link
        let scale = 10f64.powf(rng.random_range(-6.0..0.0));
        let h_sat = rand_vec(&mut rng, cols, scale);
        let w_r = svd_beamformers(&h).map_err(|e| e.to_string())?.w_r;
        let hs2 = h_sat.norm_sqr();

        let mut prev: Option<(f64, f64)> = None;
        for &lam in &grid {
            let r = nulling_beamformer(&h, &w_r, &h_sat, lam).map_err(|e| e.to_string())?;
            if lam == 0.0 {
                worst_rho0 = worst_rho0.max(r.rho_db.abs());
                if r.rho_db.abs() > 1e-9 {
                    violations.push(format!("#{inst} rho(0)={:.2e}", r.rho_db));
                }
            }
            if let Some((i_prev, rho_prev)) = prev {
                if r.interference_linear > i_prev * (1.0 + 1e-9) + 1e-15 * hs2 {
                    violations.push(format!("#{inst} interference rose at {lam:e}"));
                }
                if r.rho_db < rho_prev - 1e-9 {
                    violations.push(format!("#{inst} rho fell at {lam:e}"));
                }
            }
            prev = Some((r.interference_linear, r.rho_db));

            let best = nulling_objective(&h, &w_r, &h_sat, lam, &r.w_t_lambda);
            for _ in 0..1000 {
                let u = rand_vec(&mut rng, cols, 1.0).normalized().expect("nonzero");
                let o = nulling_objective(&h, &w_r, &h_sat, lam, &u);
                if o > best + 1e-9 * (best.abs() + o.abs()) {
                    violations.push(format!("#{inst} random vector beats optimum at {lam:e}"));
                    break;
                }
            }
        }
    }
    let first = violations.first().cloned().unwrap_or_default();
    Ok((
        violations.is_empty(),
        format!("{} violations over 700 solves {first}; max |rho(0)|={worst_rho0:.1e} dB", violations.len()),
    ))
}

fn reductions(cfg: &ScenarioConfig) -> Result<Vec<f64>, String> {
    let recs = run_satint(cfg, 6e9, THREADS).map_err(|e| e.to_string())?;
    Ok(recs.iter().map(|r| r.inr_baseline_db - r.nulling[0].inr_db).collect())
}

fn deep_null() -> Outcome {
    let mut cfg = ScenarioConfig::default();
    cfg.n_drops = 100;
    cfg.sat.include_nlos = false;
    cfg.satint.lambda_grid = vec![1e12];
    let red = reductions(&cfg)?;
    let deep = red.iter().filter(|&&r| r >= 40.0).count();
    let min = red.iter().copied().fold(f64::INFINITY, f64::min);

    // same drops with a LOS-only terrestrial channel, for reference
    cfg.channel = ChannelModelConfig::los_only();
    let red_los = reductions(&cfg)?;
    let deep_los = red_los.iter().filter(|&&r| r >= 40.0).count();
    Ok((
        deep == 100,
        format!(
            "{deep}/100 drops >= 40 dB (min {min:.1} dB, median {:.1} dB); LOS terrestrial: {deep_los}/100",
            median(&red).map_err(|e| e.to_string())?
        ),
    ))
}

fn friis_scaling() -> Outcome {
    let mut cfg = ScenarioConfig::default();
    cfg.n_drops = 500;
    cfg.satint.lambda_grid = vec![0.0];
    let med = |f: f64| -> Result<f64, String> {
        let recs = run_satint(&cfg, f, THREADS).map_err(|e| e.to_string())?;
        median(&recs.iter().map(|r| r.inr_baseline_db).collect::<Vec<_>>()).map_err(|e| e.to_string())
    };
    let (m6, m18) = (med(6e9)?, med(18e9)?);
    Ok((m18 <= m6 - 6.0, format!("median INR 6 GHz {m6:.2} dB, 18 GHz {m18:.2} dB, shift {:.2} dB", m18 - m6)))
}

fn robustness() -> Outcome {
    let mut cfg = ScenarioConfig::default();
    cfg.n_drops = 500;
    cfg.direction = LinkDirection::Dl;
    cfg.angular_errors.enabled = true;
    cfg.satint.lambda_grid = vec![1e9];
    let recs = run_satint(&cfg, 6e9, THREADS).map_err(|e| e.to_string())?;
    let db = |pick: &dyn Fn(&fr3sim::scenario::SatIntRecord) -> f64| -> Vec<f64> { recs.iter().map(pick).collect() };
    let free = db(&|r| r.nulling[0].inr_db);
    let plain = db(&|r| r.nulling_with_error.as_ref().unwrap()[0].inr_db);
    let robust = db(&|r| r.robust.as_ref().unwrap()[0].inr_db);
    let m = |v: &[f64]| mean(v).map_err(|e| e.to_string());
    let (mf, mp, mr) = (m(&free)?, m(&plain)?, m(&robust)?);
    let lin = |v: &[f64]| 10.0 * (v.iter().map(|x| 10f64.powf(x / 10.0)).sum::<f64>() / v.len() as f64).log10();
    Ok((
        mr <= mf + 3.0 && mr < mp,
        format!(
            "mean INR (dB average) error-free {mf:.2}, plain with error {mp:.2}, robust {mr:.2}; \
             power average {:.2}/{:.2}/{:.2} dB",
            lin(&free),
            lin(&plain),
            lin(&robust)
        ),
    ))
}

fn ul_vs_dl_cost() -> Outcome {
    let mut ul = ScenarioConfig::default();
    ul.direction = LinkDirection::Ul;
    ul.satint.lambda_grid = vec![1e7];
    let mut dl = ScenarioConfig::default();
    dl.direction = LinkDirection::Dl;
    dl.satint.lambda_grid = vec![1e8];
    let rho = |cfg: &ScenarioConfig| -> Result<Vec<f64>, String> {
        Ok(run_satint(cfg, 6e9, THREADS)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|r| r.nulling[0].rho_db)
            .collect())
    };
    let p_ul = percentile(&rho(&ul)?, 78.0).map_err(|e| e.to_string())?;
    let p_dl = percentile(&rho(&dl)?, 97.0).map_err(|e| e.to_string())?;
    Ok((p_ul > p_dl, format!("UL p78 rho {p_ul:.3} dB vs DL p97 rho {p_dl:.3} dB")))
}

fn capacity_ordering() -> Outcome {
    let mut cfg = ScenarioConfig::default();
    cfg.n_drops = 1000;
    cfg.channel.blockage.enabled = false;
    let recs = run_capacity(&cfg, THREADS).map_err(|e| e.to_string())?;
    let violations = recs
        .iter()
        .filter(|r| r.bands.iter().any(|b| b.rate_bps > r.best_rate_bps))
        .count();

    cfg.channel.blockage.enabled = true;
    cfg.capacity.indoor = IndoorConfig::concrete_only();
    let recs = run_capacity(&cfg, THREADS).map_err(|e| e.to_string())?;
    let med = |i: usize| median(&recs.iter().map(|r| r.bands[i].rate_bps).collect::<Vec<_>>()).map_err(|e| e.to_string());
    let last = cfg.capacity.bands.len() - 1;
    let (m6, m24) = (med(0)?, med(last)?);
    Ok((
        violations == 0 && m6 > m24,
        format!(
            "{violations} drops with a band above best choice; blocked indoor median 6 GHz {:.1} Mbps vs 24 GHz {:.1} Mbps",
            m6 / 1e6,
            m24 / 1e6
        ),
    ))
}

fn anchor() -> Outcome {
    let mut cfg = ScenarioConfig::default();
    cfg.n_drops = 2000;
    cfg.satint.lambda_grid = vec![0.0];
    let recs = run_satint(&cfg, 6e9, THREADS).map_err(|e| e.to_string())?;
    let inr: Vec<f64> = recs.iter().map(|r| r.inr_baseline_db).collect();
    let p = fraction_exceeding(&inr, -6.0).map_err(|e| e.to_string())?;
    Ok((
        (0.05..=0.60).contains(&p),
        format!(
            "P(INR >= -6 dB) = {p:.4} (median {:.1} dB, p90 {:.1} dB)",
            median(&inr).map_err(|e| e.to_string())?,
            percentile(&inr, 90.0).map_err(|e| e.to_string())?
        ),
    ))
}

fn read_outputs(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let name = entry.file_name().to_string_lossy().into_owned();
        // timestamps differ by construction
        if name != "manifest.json" {
            files.insert(name, std::fs::read(entry.path()).map_err(|e| e.to_string())?);
        }
    }
    Ok(files)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let out = tmp.path().join(format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_fr3sim"))
            .args(["satint", "--threads", threads, "--out"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("satint --threads {threads} exited with {status}"));
        }
        outputs.push(read_outputs(&out)?);
    }
    let same = outputs[0] == outputs[1];
    Ok((
        same && !outputs[0].is_empty(),
        format!("{} files compared, identical: {same}", outputs[0].len()),
    ))
}

fn main() {
    let mut s = Suite { failed: 0 };
    let secs = Duration::from_secs;
    s.check("1", "analytic golden values", secs(1), analytic);
    s.check("2", "oracle equivalence", secs(10), oracle_equivalence);
    s.check("3", "regularization path", secs(30), regularization_path);
    s.check("4", "deep null at lambda=1e12", secs(10), deep_null);
    s.check("5", "Friis scaling 6 vs 18 GHz", secs(60), friis_scaling);
    s.check("6", "robust nulling under pointing error", secs(120), robustness);
    s.check("7", "UL vs DL nulling cost", secs(120), ul_vs_dl_cost);
    s.check("8", "capacity ordering", secs(120), capacity_ordering);
    s.check("9", "6 GHz DL exceedance anchor", secs(120), anchor);
    s.check("10", "thread-count determinism", secs(120), determinism);
    if s.failed > 0 {
        println!("{} criteria failed", s.failed);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
