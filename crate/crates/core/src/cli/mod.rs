//! `fr3sim` command-line front end.
//!
//! Each command validates the configuration and all overrides, runs every
//! drop in memory, and only then creates the output directory and writes
//! files, so a rejected invocation leaves nothing behind.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Result, SimError};
use crate::scenario::stats::{empirical_cdf, fraction_exceeding, median, Summary};
use crate::scenario::{run_capacity, run_satint, CapacityRecord, LinkDirection, SatIntRecord, ScenarioConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// INR level whose exceedance probability is reported.
pub const INR_THRESHOLD_DB: f64 = -6.0;

#[derive(Debug, Parser)]
#[command(name = "fr3sim", version, about = "Upper mid-band coverage and satellite interference simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Terrestrial-to-satellite interference with and without nulling.
    Satint(RunArgs),
    /// Multi-band downlink capacity.
    Capacity(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML scenario file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "FR3SIM_OUT_DIR", default_value = "fr3sim-out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub drops: Option<usize>,
    /// Comma-separated carriers, in Hz or with a GHz/MHz suffix.
    #[arg(long, value_delimiter = ',')]
    pub freq: Option<Vec<String>>,
    /// Comma-separated regularization weights.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// dl or ul.
    #[arg(long)]
    pub direction: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Parses `6e9`, `6GHz`, `6 ghz`, `6000MHz` or `6000000000Hz`.
pub fn parse_frequency(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase();
    let (num, scale) = if let Some(n) = t.strip_suffix("ghz") {
        (n, 1e9)
    } else if let Some(n) = t.strip_suffix("mhz") {
        (n, 1e6)
    } else if let Some(n) = t.strip_suffix("hz") {
        (n, 1.0)
    } else {
        (t.as_str(), 1.0)
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| SimError::config("--freq", format!("cannot parse frequency {text:?}")))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(SimError::config("--freq", format!("frequency {text:?} must be positive")));
    }
    Ok(v * scale)
}

/// `6e9` → `6GHz`, `6.5e9` → `6.5GHz`.
pub fn freq_label(freq_hz: f64) -> String {
    format!("{}GHz", freq_hz / 1e9)
}

/// `0` → `0`, `1e8` → `1e8`, `2.5e6` → `2.5e6`.
pub fn lambda_label(lambda: f64) -> String {
    if lambda == 0.0 {
        "0".into()
    } else {
        format!("{lambda:e}")
    }
}

/// Reads and validates a config file; `None` yields the defaults.
pub fn load_config(path: Option<&Path>) -> Result<ScenarioConfig> {
    let cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| SimError::config("--config", format!("cannot read {}: {e}", p.display())))?;
            ScenarioConfig::from_toml_str(&text)?
        }
        None => ScenarioConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    SatInt,
    Capacity,
}

/// Applies command-line overrides and re-validates.
pub fn apply_overrides(mut cfg: ScenarioConfig, ov: &Overrides, family: Family) -> Result<ScenarioConfig> {
    if let Some(s) = ov.seed {
        cfg.master_seed = s;
    }
    if let Some(n) = ov.drops {
        cfg.n_drops = n;
    }
    if let Some(d) = &ov.direction {
        cfg.direction = d.parse()?;
    }
    if let Some(l) = &ov.lambda {
        cfg.satint.lambda_grid = l.clone();
    }
    if let Some(list) = &ov.freq {
        let freqs = list.iter().map(|f| parse_frequency(f)).collect::<Result<Vec<_>>>()?;
        match family {
            Family::SatInt => cfg.satint.frequencies_hz = freqs,
            Family::Capacity => {
                // select configured bands; an unknown carrier is an error
                let mut bands = Vec::with_capacity(freqs.len());
                for f in freqs {
                    let band = cfg
                        .capacity
                        .bands
                        .iter()
                        .find(|b| (b.frequency_hz - f).abs() <= 1e-6 * f)
                        .ok_or_else(|| {
                            SimError::config("--freq", format!("no configured band at {}", freq_label(f)))
                        })?;
                    bands.push(*band);
                }
                cfg.capacity.bands = bands;
            }
        }
    }
    if ov.threads == Some(0) {
        return Err(SimError::config("--threads", "must be at least 1"));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// SHA-256 of the canonical JSON rendering of a resolved config.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    let canonical = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(&canonical))
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub started_utc: String,
    pub finished_utc: String,
    pub outputs: Vec<String>,
}

/// Files of one run, rendered in memory.
#[derive(Default)]
struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    fn cdf(&mut self, name: impl Into<String>, column: &str, samples: &[f64]) -> Result<()> {
        let mut s = format!("{column},cdf\n");
        for (x, p) in empirical_cdf(samples)? {
            s.push_str(&format!("{x},{p}\n"));
        }
        self.add(name, s);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| SimError::Domain(e.to_string()))?;
        text.push('\n');
        self.add(name, text);
        Ok(())
    }

    fn write(self, out_dir: &Path, command: &str, cfg: &ScenarioConfig, started: String) -> Result<()> {
        fs::create_dir_all(out_dir)?;
        let mut names = Vec::with_capacity(self.files.len() + 1);
        for (name, bytes) in &self.files {
            fs::write(out_dir.join(name), bytes)?;
            names.push(name.clone());
        }
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: config_hash(cfg),
            master_seed: cfg.master_seed,
            started_utc: started,
            finished_utc: now(),
            outputs: names,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| SimError::Domain(e.to_string()))?;
        fs::write(out_dir.join("manifest.json"), text + "\n")?;
        Ok(())
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[derive(Debug, Serialize)]
struct Distribution {
    fraction_exceeding: f64,
    median_db: f64,
    summary: Summary,
}

impl Distribution {
    fn of(samples: &[f64]) -> Result<Self> {
        Ok(Self {
            fraction_exceeding: fraction_exceeding(samples, INR_THRESHOLD_DB)?,
            median_db: median(samples)?,
            summary: Summary::of(samples)?,
        })
    }
}

#[derive(Debug, Serialize)]
struct LambdaSummary {
    lambda: f64,
    inr: Distribution,
    rho: Summary,
}

#[derive(Debug, Serialize)]
struct FreqSummary {
    freq_hz: f64,
    baseline: Distribution,
    nulling: Vec<LambdaSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nulling_with_error: Option<Vec<LambdaSummary>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    robust: Option<Vec<LambdaSummary>>,
}

#[derive(Debug, Serialize)]
struct SatIntSummary {
    direction: LinkDirection,
    n_drops: usize,
    master_seed: u64,
    inr_threshold_db: f64,
    frequencies: Vec<FreqSummary>,
}

type Pick = fn(&SatIntRecord) -> Option<&Vec<crate::scenario::LambdaPoint>>;

fn column(recs: &[SatIntRecord], pick: Pick, k: usize, rho: bool) -> Vec<f64> {
    recs.iter()
        .map(|r| {
            let p = pick(r).expect("variant present")[k];
            if rho {
                p.rho_db
            } else {
                p.inr_db
            }
        })
        .collect()
}

fn lambda_summaries(cfg: &ScenarioConfig, recs: &[SatIntRecord], pick: Pick) -> Result<Vec<LambdaSummary>> {
    cfg.satint
        .lambda_grid
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            Ok(LambdaSummary {
                lambda,
                inr: Distribution::of(&column(recs, pick, k, false))?,
                rho: Summary::of(&column(recs, pick, k, true))?,
            })
        })
        .collect()
}

const NULLING: Pick = |r| Some(&r.nulling);
const WITH_ERROR: Pick = |r| r.nulling_with_error.as_ref();
const ROBUST: Pick = |r| r.robust.as_ref();

fn satint_outputs(cfg: &ScenarioConfig, runs: &[(f64, Vec<SatIntRecord>)]) -> Result<Outputs> {
    let mut out = Outputs::default();
    let dir = cfg.direction.as_str();
    let errors = cfg.angular_errors.enabled;
    for (f, recs) in runs {
        let base: Vec<f64> = recs.iter().map(|r| r.inr_baseline_db).collect();
        out.cdf(format!("inr_cdf_{}_{dir}.csv", freq_label(*f)), "inr_db", &base)?;
    }

    // per-lambda files for the first carrier
    let (_, first) = &runs[0];
    for (k, &lam) in cfg.satint.lambda_grid.iter().enumerate() {
        let l = lambda_label(lam);
        out.cdf(format!("nulling_cdf_{l}.csv"), "inr_db", &column(first, NULLING, k, false))?;
        out.cdf(format!("rho_cdf_{l}.csv"), "rho_db", &column(first, NULLING, k, true))?;
        if errors {
            out.cdf(format!("nulling_error_cdf_{l}.csv"), "inr_db", &column(first, WITH_ERROR, k, false))?;
            out.cdf(format!("robust_nulling_cdf_{l}.csv"), "inr_db", &column(first, ROBUST, k, false))?;
            out.cdf(format!("robust_rho_cdf_{l}.csv"), "rho_db", &column(first, ROBUST, k, true))?;
        }
    }

    let mut drops = String::from("drop_index,freq_hz,sat_azimuth_deg,sat_elevation_deg,ue_distance_m,inr_baseline_db");
    for &lam in &cfg.satint.lambda_grid {
        let l = lambda_label(lam);
        drops.push_str(&format!(",inr_db_{l},rho_db_{l}"));
        if errors {
            drops.push_str(&format!(",inr_error_db_{l},inr_robust_db_{l},rho_robust_db_{l}"));
        }
    }
    drops.push('\n');
    for (_, recs) in runs {
        for r in recs {
            drops.push_str(&format!(
                "{},{},{},{},{},{}",
                r.drop_index, r.freq_hz, r.sat_azimuth_deg, r.sat_elevation_deg, r.ue_distance_m, r.inr_baseline_db
            ));
            for (k, p) in r.nulling.iter().enumerate() {
                drops.push_str(&format!(",{},{}", p.inr_db, p.rho_db));
                if let (Some(e), Some(rb)) = (&r.nulling_with_error, &r.robust) {
                    drops.push_str(&format!(",{},{},{}", e[k].inr_db, rb[k].inr_db, rb[k].rho_db));
                }
            }
            drops.push('\n');
        }
    }
    out.add("drops.csv", drops);

    let frequencies = runs
        .iter()
        .map(|(f, recs)| {
            let base: Vec<f64> = recs.iter().map(|r| r.inr_baseline_db).collect();
            Ok(FreqSummary {
                freq_hz: *f,
                baseline: Distribution::of(&base)?,
                nulling: lambda_summaries(cfg, recs, NULLING)?,
                nulling_with_error: errors.then(|| lambda_summaries(cfg, recs, WITH_ERROR)).transpose()?,
                robust: errors.then(|| lambda_summaries(cfg, recs, ROBUST)).transpose()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.json(
        "summary.json",
        &SatIntSummary {
            direction: cfg.direction,
            n_drops: cfg.n_drops,
            master_seed: cfg.master_seed,
            inr_threshold_db: INR_THRESHOLD_DB,
            frequencies,
        },
    )?;
    Ok(out)
}

#[derive(Debug, Serialize)]
struct BandSummary {
    freq_hz: f64,
    bandwidth_hz: f64,
    snr_db: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    sinr_db: Option<Summary>,
    rate_bps: Summary,
    fraction_best: f64,
}

#[derive(Debug, Serialize)]
struct CapacitySummary {
    n_drops: usize,
    master_seed: u64,
    indoor: bool,
    interference: bool,
    blockage: bool,
    bands: Vec<BandSummary>,
    best_rate_bps: Summary,
}

fn capacity_outputs(cfg: &ScenarioConfig, recs: &[CapacityRecord]) -> Result<Outputs> {
    let mut out = Outputs::default();
    let mut bands = Vec::with_capacity(cfg.capacity.bands.len());
    for (i, band) in cfg.capacity.bands.iter().enumerate() {
        let label = freq_label(band.frequency_hz);
        let snr: Vec<f64> = recs.iter().map(|r| r.bands[i].snr_db).collect();
        let rate: Vec<f64> = recs.iter().map(|r| r.bands[i].rate_bps).collect();
        out.cdf(format!("snr_cdf_{label}.csv"), "snr_db", &snr)?;
        out.cdf(format!("rate_cdf_{label}.csv"), "rate_bps", &rate)?;
        let sinr = if cfg.capacity.interference.enabled {
            let v: Vec<f64> = recs.iter().map(|r| r.bands[i].sinr_db.unwrap_or(f64::NAN)).collect();
            out.cdf(format!("sinr_cdf_{label}.csv"), "sinr_db", &v)?;
            Some(Summary::of(&v)?)
        } else {
            None
        };
        bands.push(BandSummary {
            freq_hz: band.frequency_hz,
            bandwidth_hz: band.bandwidth_hz,
            snr_db: Summary::of(&snr)?,
            sinr_db: sinr,
            rate_bps: Summary::of(&rate)?,
            fraction_best: recs.iter().filter(|r| r.best_band_index == i).count() as f64 / recs.len() as f64,
        });
    }
    let best: Vec<f64> = recs.iter().map(|r| r.best_rate_bps).collect();
    out.cdf("rate_cdf_best.csv", "rate_bps", &best)?;

    let mut drops = String::from("drop_index,ue_x_m,ue_y_m,material");
    for band in &cfg.capacity.bands {
        let l = freq_label(band.frequency_hz);
        drops.push_str(&format!(",serving_bs_{l},snr_db_{l}"));
        if cfg.capacity.interference.enabled {
            drops.push_str(&format!(",sinr_db_{l}"));
        }
        drops.push_str(&format!(",rate_bps_{l}"));
    }
    drops.push_str(",best_band_index,best_rate_bps\n");
    for r in recs {
        drops.push_str(&format!(
            "{},{},{},{}",
            r.drop_index,
            r.ue_position[0],
            r.ue_position[1],
            r.material.as_deref().unwrap_or("")
        ));
        for b in &r.bands {
            drops.push_str(&format!(",{},{}", b.serving_bs, b.snr_db));
            if let Some(s) = b.sinr_db {
                drops.push_str(&format!(",{s}"));
            }
            drops.push_str(&format!(",{}", b.rate_bps));
        }
        drops.push_str(&format!(",{},{}\n", r.best_band_index, r.best_rate_bps));
    }
    out.add("drops.csv", drops);

    out.json(
        "summary.json",
        &CapacitySummary {
            n_drops: cfg.n_drops,
            master_seed: cfg.master_seed,
            indoor: cfg.capacity.indoor.enabled,
            interference: cfg.capacity.interference.enabled,
            blockage: cfg.channel.blockage.enabled,
            bands,
            best_rate_bps: Summary::of(&best)?,
        },
    )?;
    Ok(out)
}

fn exit_code(e: &SimError) -> i32 {
    match e {
        SimError::Config { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn report(e: SimError) -> i32 {
    eprintln!("fr3sim: {e}");
    exit_code(&e)
}

fn prepare(config_path: Option<&Path>, overrides: &Overrides, family: Family) -> Result<(ScenarioConfig, usize)> {
    let cfg = apply_overrides(load_config(config_path)?, overrides, family)?;
    Ok((cfg, overrides.threads.unwrap_or_else(default_threads)))
}

fn with_resolved(mut out: Outputs, cfg: &ScenarioConfig) -> Result<Outputs> {
    out.add("resolved_config.toml", cfg.to_toml_string()?);
    Ok(out)
}

/// Runs the interference study; returns the process exit status.
pub fn cmd_satint(config_path: Option<&Path>, out_dir: &Path, overrides: &Overrides) -> i32 {
    let started = now();
    let (cfg, threads) = match prepare(config_path, overrides, Family::SatInt) {
        Ok(v) => v,
        Err(e) => return report(e),
    };
    let result = cfg
        .satint
        .frequencies_hz
        .iter()
        .map(|&f| Ok((f, run_satint(&cfg, f, threads)?)))
        .collect::<Result<Vec<_>>>()
        .and_then(|runs| satint_outputs(&cfg, &runs))
        .and_then(|out| with_resolved(out, &cfg))
        .and_then(|out| out.write(out_dir, "satint", &cfg, started));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => report(e),
    }
}

/// Runs the capacity study; returns the process exit status.
pub fn cmd_capacity(config_path: Option<&Path>, out_dir: &Path, overrides: &Overrides) -> i32 {
    let started = now();
    let (cfg, threads) = match prepare(config_path, overrides, Family::Capacity) {
        Ok(v) => v,
        Err(e) => return report(e),
    };
    let result = run_capacity(&cfg, threads)
        .and_then(|recs| capacity_outputs(&cfg, &recs))
        .and_then(|out| with_resolved(out, &cfg))
        .and_then(|out| out.write(out_dir, "capacity", &cfg, started));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => report(e),
    }
}

/// Parses arguments and dispatches; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Satint(a) => cmd_satint(a.config.as_deref(), &a.out, &a.overrides),
        Command::Capacity(a) => cmd_capacity(a.config.as_deref(), &a.out, &a.overrides),
    }
}
