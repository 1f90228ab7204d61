use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oamcv::modes::DEFAULT_ASTIGMATISM;
use oamcv::{BitDepth, GridSpec, SqueezingSpec};

use crate::commands::{self, ModesOptions};
use crate::config::{Preset, SweepConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "oamcv", version, about = "Entanglement and steering of OAM-multiplexed Gaussian states in lossy, noisy channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Covariance matrix and criteria of each distributed state.
    State(StateArgs),
    /// CSV of PPT value and steerabilities over the transmission grid.
    Sweep(ConfigArgs),
    /// JSON of sudden-death transmissions per charge and excess noise.
    Thresholds(ConfigArgs),
    /// Simulated homodyne tomography and reconstruction report.
    Tomo(TomoArgs),
    /// Beam and tilted-lens images with the dark-stripe readout.
    Modes(ModesArgs),
    /// Prints the resolved configuration as JSON.
    Config(ConfigArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Parameter bundle applied first: fig2c, fig3 or fig4.
    #[arg(long)]
    pub preset: Option<Preset>,
    /// JSON configuration overlaid on the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Squeezed variance of the source.
    #[arg(long, requires = "vp", conflicts_with = "r")]
    pub v: Option<f64>,
    /// Anti-squeezed variance of the source.
    #[arg(long, requires = "v", conflicts_with = "r")]
    pub vp: Option<f64>,
    /// Squeezing parameter of a pure source.
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Comma-separated excess noise values, shot-noise units.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub delta: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta_stop: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta_step: Option<f64>,
    /// Comma-separated topological charges.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, num_args = 0..)]
    pub charges: Option<Vec<i32>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Samples per homodyne setting.
    #[arg(long)]
    pub n: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ConfigArgs {
    /// Preset, then file, then flags.
    pub fn resolve(&self) -> CliResult<SweepConfig> {
        let mut cfg = self.preset.map(SweepConfig::preset).unwrap_or_default();
        if let Some(path) = &self.config {
            cfg = SweepConfig::load(&cfg, path)?;
        }
        match (self.v, self.vp, self.r) {
            (Some(v), Some(vp), _) => cfg.spec = SqueezingSpec::new(v, vp)?,
            (_, _, Some(r)) => cfg.spec = SqueezingSpec::from_squeezing(r)?,
            _ => {}
        }
        if let Some(d) = &self.delta {
            cfg.delta = d.clone();
        }
        if let Some(x) = self.eta_start {
            cfg.eta.start = x;
        }
        if let Some(x) = self.eta_stop {
            cfg.eta.stop = x;
        }
        if let Some(x) = self.eta_step {
            cfg.eta.step = x;
        }
        if let Some(c) = &self.charges {
            cfg.charges = c.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.n {
            cfg.n_per_setting = n;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct StateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Transmission of the probe channel.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
}

#[derive(Debug, Args)]
pub struct TomoArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Transmission of the probe channel.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Directory for the raw homodyne samples, one CSV per setting.
    #[arg(long)]
    pub samples_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Bits {
    #[value(name = "8")]
    Eight,
    #[value(name = "16")]
    Sixteen,
}

#[derive(Debug, Args)]
pub struct ModesArgs {
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, num_args = 0.., default_value = "0,1,2")]
    pub charges: Vec<i32>,
    #[arg(long, default_value_t = DEFAULT_ASTIGMATISM)]
    pub astigmatism: f64,
    /// Pixels per side.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Half-width of the grid in beam waists.
    #[arg(long, default_value_t = 6.0)]
    pub extent: f64,
    #[arg(long, value_enum, default_value = "8")]
    pub bits: Bits,
    /// Directory for the images and `stripes.json`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn check_eta(eta: f64) -> CliResult<()> {
    if eta.is_finite() && (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(CliError::config(format!("eta must lie in [0, 1], got {eta}")))
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::State(a) => {
            let cfg = a.config.resolve()?;
            check_eta(a.eta)?;
            commands::write_json(&commands::run_state(&cfg, a.eta)?, cfg.out.as_deref())
        }
        Command::Sweep(a) => {
            let cfg = a.resolve()?;
            commands::write_sweep_csv(&commands::run_sweep(&cfg)?, cfg.out.as_deref())
        }
        Command::Thresholds(a) => {
            let cfg = a.resolve()?;
            commands::write_json(&commands::run_thresholds(&cfg)?, cfg.out.as_deref())
        }
        Command::Tomo(a) => {
            let cfg = a.config.resolve()?;
            check_eta(a.eta)?;
            let report = commands::run_tomo(&cfg, a.eta, a.samples_dir.as_deref())?;
            commands::write_json(&report, cfg.out.as_deref())
        }
        Command::Modes(a) => {
            if !(a.astigmatism.is_finite() && a.astigmatism > 0.0) {
                return Err(CliError::config(format!("astigmatism must be > 0, got {}", a.astigmatism)));
            }
            let opts = ModesOptions {
                charges: a.charges,
                astigmatism: a.astigmatism,
                grid: GridSpec::square(a.grid, a.extent),
                depth: match a.bits {
                    Bits::Eight => BitDepth::Eight,
                    Bits::Sixteen => BitDepth::Sixteen,
                },
                out_dir: a.out,
            };
            let report = commands::run_modes(&opts)?;
            commands::write_json(&report, Some(&opts.out_dir.join("stripes.json")))?;
            commands::write_json(&report, None)?;
            match report.modes.iter().find(|m| !m.matches_charge) {
                Some(m) => Err(CliError::Check(format!(
                    "stripe readout for l={} gave {} (sign {}, indeterminate {})",
                    m.l, m.count, m.sign, m.indeterminate
                ))),
                None => Ok(()),
            }
        }
        Command::Config(a) => {
            let cfg = a.resolve()?;
            commands::write_text(&cfg.to_json(), cfg.out.as_deref())
        }
    }
}
