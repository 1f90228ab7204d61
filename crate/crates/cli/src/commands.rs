//! The subcommands as plain functions from configuration to reports.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use oamcv::criteria::ETA_RESOLUTION;
use oamcv::modes::{pgm_file_name, DEFAULT_ASTIGMATISM};
use oamcv::tomography::{derive_seed, CERTIFICATION_SIGMAS};
use oamcv::{
    classify, classify_reconstruction, count_dark_stripes, distributed_state,
    entanglement_death_eta, lg_field, reconstruct_cm, simulate_measurements, steering_death_eta,
    tilted_lens_pattern, variances_from_batches, BitDepth, CertifiedReport, Charge,
    CovarianceMatrix, CriteriaReport, Direction, GridSpec, LgMode, Setting, SqueezingSpec,
    SteeringClass, ValidityReport,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{snap_eta, SweepConfig};
use crate::error::{CliError, CliResult};

/// Opens `path` for writing, or stdout when absent.
pub fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::io(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn io_path(path: Option<&Path>) -> PathBuf {
    path.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("<stdout>"))
}

/// Writes pretty JSON plus a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult<()> {
    write_text(&serde_json::to_string_pretty(value).expect("reports serialize"), path)
}

pub fn write_text(text: &str, path: Option<&Path>) -> CliResult<()> {
    let mut w = output(path)?;
    writeln!(w, "{text}")
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(io_path(path), e))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateEntry {
    pub l: Charge,
    pub eta: f64,
    pub delta: f64,
    pub spec: SqueezingSpec,
    pub cm: CovarianceMatrix,
    pub validity: ValidityReport,
    pub report: CriteriaReport,
}

pub fn run_state(cfg: &SweepConfig, eta: f64) -> CliResult<Vec<StateEntry>> {
    let mut out = Vec::new();
    for l in cfg.sorted_charges() {
        for delta in cfg.sorted_deltas() {
            let spec = cfg.spec_for(l);
            let cm = distributed_state(&spec, eta, delta)?;
            out.push(StateEntry {
                l,
                eta,
                delta,
                spec,
                validity: oamcv::validate(cm.matrix()),
                report: classify(&cm)?,
                cm,
            });
        }
    }
    Ok(out)
}

pub const SWEEP_HEADER: [&str; 8] = ["l", "eta", "delta", "nu", "entangled", "gAB", "gBA", "class"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub l: Charge,
    pub eta: f64,
    pub delta: f64,
    pub nu: f64,
    pub entangled: bool,
    #[serde(rename = "gAB")]
    pub g_ab: f64,
    #[serde(rename = "gBA")]
    pub g_ba: f64,
    pub class: SteeringClass,
}

/// One row per `(l, δ, η)`, sorted in that order.
pub fn run_sweep(cfg: &SweepConfig) -> CliResult<Vec<SweepRow>> {
    let etas = cfg.eta.points();
    let mut points = Vec::new();
    for l in cfg.sorted_charges() {
        for delta in cfg.sorted_deltas() {
            for &eta in &etas {
                points.push((l, delta, eta));
            }
        }
    }
    points
        .par_iter()
        .map(|&(l, delta, eta)| {
            let r = classify(&distributed_state(&cfg.spec_for(l), eta, delta)?)?;
            Ok(SweepRow {
                l,
                eta: snap_eta(eta),
                delta,
                nu: r.nu,
                entangled: r.entangled,
                g_ab: r.g_ab,
                g_ba: r.g_ba,
                class: r.class,
            })
        })
        .collect()
}

pub fn write_sweep_csv(rows: &[SweepRow], path: Option<&Path>) -> CliResult<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(output(path)?);
    let wrap = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(io_path(path), io),
        other => CliError::Check(format!("csv: {other:?}")),
    };
    wtr.write_record(SWEEP_HEADER).map_err(wrap)?;
    for row in rows {
        wtr.serialize(row).map_err(wrap)?;
    }
    wtr.flush().map_err(|e| CliError::io(io_path(path), e))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdEntry {
    pub l: Charge,
    pub delta: f64,
    /// Transmission below which the resource is gone; `null` when it
    /// survives at every `η > 0`.
    pub entanglement: Option<f64>,
    #[serde(rename = "AB")]
    pub a_to_b: Option<f64>,
    #[serde(rename = "BA")]
    pub b_to_a: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub eta_resolution: f64,
    pub thresholds: Vec<ThresholdEntry>,
}

pub fn run_thresholds(cfg: &SweepConfig) -> CliResult<ThresholdReport> {
    let mut keys = Vec::new();
    for l in cfg.sorted_charges() {
        for delta in cfg.sorted_deltas() {
            keys.push((l, delta));
        }
    }
    let thresholds = keys
        .par_iter()
        .map(|&(l, delta)| {
            let spec = cfg.spec_for(l);
            Ok(ThresholdEntry {
                l,
                delta,
                entanglement: entanglement_death_eta(&spec, delta)?,
                a_to_b: steering_death_eta(&spec, delta, Direction::AToB)?,
                b_to_a: steering_death_eta(&spec, delta, Direction::BToA)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(ThresholdReport { eta_resolution: ETA_RESOLUTION, thresholds })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub setting: Setting,
    pub db: f64,
    pub stderr_db: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TomoEntry {
    pub l: Charge,
    pub eta: f64,
    pub delta: f64,
    pub seed: u64,
    pub n_per_setting: usize,
    pub levels: Vec<Level>,
    pub true_cm: CovarianceMatrix,
    pub reconstructed_cm: CovarianceMatrix,
    /// Reconstructed minus true, entrywise.
    pub errors: [[f64; 4]; 4],
    pub stderr: Option<[[f64; 4]; 4]>,
    pub true_report: CriteriaReport,
    pub reconstructed_report: CertifiedReport,
    pub warnings: Vec<String>,
}

/// Simulated homodyne tomography of every `(l, δ)` state at transmission
/// `eta`. Each state draws from its own seed stream; raw samples go to
/// `samples_dir` when given.
pub fn run_tomo(cfg: &SweepConfig, eta: f64, samples_dir: Option<&Path>) -> CliResult<Vec<TomoEntry>> {
    let mut keys = Vec::new();
    for l in cfg.sorted_charges() {
        for delta in cfg.sorted_deltas() {
            keys.push((l, delta));
        }
    }
    let mut out = Vec::with_capacity(keys.len());
    for (k, (l, delta)) in keys.into_iter().enumerate() {
        let seed = derive_seed(cfg.seed, k as u64);
        let cm = distributed_state(&cfg.spec_for(l), eta, delta)?;
        let batches = simulate_measurements(&cm, cfg.n_per_setting, seed)?;
        if let Some(dir) = samples_dir {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            for b in &batches {
                let path = dir.join(format!("samples_l{l}_delta{delta}_{}.csv", b.setting));
                let f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
                b.write_csv(BufWriter::new(f)).map_err(|e| match e {
                    oamcv::Error::Io(io) => CliError::io(&path, io),
                    other => other.into(),
                })?;
            }
        }
        let vs = variances_from_batches(&batches)?;
        let rec = reconstruct_cm(&vs)?;
        let mut errors = [[0.0; 4]; 4];
        for (i, row) in errors.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = rec.cm.get(i, j) - cm.get(i, j);
            }
        }
        out.push(TomoEntry {
            l,
            eta,
            delta,
            seed,
            n_per_setting: cfg.n_per_setting,
            levels: Setting::ALL
                .iter()
                .map(|&s| Level { setting: s, db: vs.get(s).db.0, stderr_db: vs.get(s).stderr_db })
                .collect(),
            true_report: classify(&cm)?,
            reconstructed_report: classify_reconstruction(&vs, CERTIFICATION_SIGMAS)?,
            true_cm: cm,
            reconstructed_cm: rec.cm,
            errors,
            stderr: rec.stderr,
            warnings: rec.warnings,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModesOptions {
    pub charges: Vec<Charge>,
    pub astigmatism: f64,
    pub grid: GridSpec,
    pub depth: BitDepth,
    pub out_dir: PathBuf,
}

impl Default for ModesOptions {
    fn default() -> Self {
        Self {
            charges: vec![0, 1, 2],
            astigmatism: DEFAULT_ASTIGMATISM,
            grid: GridSpec::default(),
            depth: BitDepth::Eight,
            out_dir: PathBuf::from("."),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeEntry {
    pub l: Charge,
    pub count: usize,
    pub sign: i32,
    pub axis_angle_deg: f64,
    pub indeterminate: bool,
    pub matches_charge: bool,
    pub mode_image: String,
    pub tilted_image: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModesReport {
    pub astigmatism: f64,
    pub grid: GridSpec,
    pub modes: Vec<ModeEntry>,
}

fn write_pgm(image: &oamcv::IntensityGrid, path: &Path, depth: BitDepth) -> CliResult<()> {
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(f);
    image.write_pgm(&mut w, depth).map_err(|e| match e {
        oamcv::Error::Io(io) => CliError::io(path, io),
        other => other.into(),
    })?;
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Writes the mode and tilted-lens images of every charge and returns the
/// stripe readout.
pub fn run_modes(opts: &ModesOptions) -> CliResult<ModesReport> {
    if opts.charges.is_empty() {
        return Err(CliError::config("charges list is empty"));
    }
    fs::create_dir_all(&opts.out_dir).map_err(|e| CliError::io(&opts.out_dir, e))?;
    let mut charges = opts.charges.clone();
    charges.sort_unstable();
    charges.dedup();
    let modes = charges
        .par_iter()
        .map(|&l| {
            let field = lg_field(&LgMode::with_charge(l)?, &opts.grid)?;
            let tilted = tilted_lens_pattern(&field, opts.astigmatism)?;
            let count = count_dark_stripes(&tilted);
            let mode_image = pgm_file_name(l, "mode");
            let tilted_image = pgm_file_name(l, "tilted");
            write_pgm(&field.intensity(), &opts.out_dir.join(&mode_image), opts.depth)?;
            write_pgm(&tilted, &opts.out_dir.join(&tilted_image), opts.depth)?;
            Ok(ModeEntry {
                l,
                count: count.count,
                sign: count.sign,
                axis_angle_deg: count.axis_angle_deg,
                indeterminate: count.indeterminate,
                matches_charge: !count.indeterminate && count.charge() == l,
                mode_image,
                tilted_image,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(ModesReport { astigmatism: opts.astigmatism, grid: opts.grid, modes })
}
