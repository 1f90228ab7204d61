//! Run configuration: built-in presets, JSON files and command-line flags,
//! applied in that order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use oamcv::{Charge, SqueezingSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Sweep points are snapped to this grid so that accumulated steps print
/// cleanly and compare exactly.
pub const ETA_QUANTUM: f64 = 1e-10;

pub const DEFAULT_N_PER_SETTING: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl EtaGrid {
    /// Points `start, start + step, …` up to and including `stop`.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        let mut pts: Vec<f64> =
            (0..=n).map(|k| snap_eta((self.start + k as f64 * self.step).min(self.stop))).collect();
        let last = snap_eta(self.stop);
        if pts.last().is_some_and(|&p| p < last) {
            pts.push(last);
        }
        pts.dedup();
        pts
    }
}

pub fn snap_eta(eta: f64) -> f64 {
    (eta / ETA_QUANTUM).round() * ETA_QUANTUM
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Source used for every charge without its own entry in `per_l`.
    pub spec: SqueezingSpec,
    #[serde(default)]
    pub per_l: BTreeMap<Charge, SqueezingSpec>,
    pub delta: Vec<f64>,
    pub eta: EtaGrid,
    pub charges: Vec<Charge>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub n_per_setting: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Pure loss, the PPT-versus-transmission curves.
    Fig2c,
    /// Excess noise 0.15, 0.5 and 1.
    Fig3,
    /// Steerability under pure loss and under excess noise 0.15.
    Fig4,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fig2c" => Ok(Preset::Fig2c),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            _ => Err(format!("unknown preset {s:?}, expected fig2c, fig3 or fig4")),
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            spec: SqueezingSpec::new(0.47, 4.11).expect("default source is physical"),
            per_l: BTreeMap::new(),
            delta: vec![0.0],
            eta: EtaGrid { start: 0.0, stop: 1.0, step: 0.01 },
            charges: vec![0, 1, 2],
            out: None,
            seed: 0,
            n_per_setting: DEFAULT_N_PER_SETTING,
        }
    }
}

impl SweepConfig {
    pub fn preset(p: Preset) -> Self {
        let delta = match p {
            Preset::Fig2c => vec![0.0],
            Preset::Fig3 => vec![0.15, 0.5, 1.0],
            Preset::Fig4 => vec![0.0, 0.15],
        };
        Self { delta, ..Self::default() }
    }

    /// `base` overlaid with the top-level fields present in `file`.
    pub fn overlay_json(base: &Self, file: &str) -> CliResult<Self> {
        let patch: Value =
            serde_json::from_str(file).map_err(|e| CliError::config(format!("config file: {e}")))?;
        let Value::Object(patch) = patch else {
            return Err(CliError::config("config file must hold a JSON object"));
        };
        let mut merged = serde_json::to_value(base).expect("config serializes");
        let obj = merged.as_object_mut().expect("config is an object");
        for (k, v) in patch {
            obj.insert(k, v);
        }
        serde_json::from_value(merged).map_err(|e| CliError::config(format!("config file: {e}")))
    }

    pub fn load(base: &Self, path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::overlay_json(base, &text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn spec_for(&self, l: Charge) -> SqueezingSpec {
        self.per_l.get(&l).copied().unwrap_or(self.spec)
    }

    pub fn validate(&self) -> CliResult<()> {
        let EtaGrid { start, stop, step } = self.eta;
        let in_unit = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
        if !(in_unit(start) && in_unit(stop)) {
            return Err(CliError::config(format!("eta grid [{start}, {stop}] must lie within [0, 1]")));
        }
        if start > stop {
            return Err(CliError::config(format!("eta start {start} exceeds stop {stop}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(CliError::config(format!("eta step must be > 0, got {step}")));
        }
        if self.charges.is_empty() {
            return Err(CliError::config("charges list is empty"));
        }
        let mut seen = self.charges.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.charges.len() {
            return Err(CliError::config("charges list has duplicates"));
        }
        if self.delta.is_empty() {
            return Err(CliError::config("delta list is empty"));
        }
        if let Some(d) = self.delta.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(CliError::config(format!("excess noise must be >= 0, got {d}")));
        }
        if self.n_per_setting < 2 {
            return Err(CliError::config("n_per_setting must be at least 2"));
        }
        Ok(())
    }

    pub fn sorted_charges(&self) -> Vec<Charge> {
        let mut c = self.charges.clone();
        c.sort_unstable();
        c
    }

    pub fn sorted_deltas(&self) -> Vec<f64> {
        let mut d = self.delta.clone();
        d.sort_by(f64::total_cmp);
        d.dedup();
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_both_ends() {
        let g = EtaGrid { start: 0.0, stop: 1.0, step: 0.1 };
        let pts = g.points();
        assert_eq!(pts.len(), 11);
        assert_eq!(pts[3], 0.3);
        assert_eq!(*pts.last().unwrap(), 1.0);
    }

    #[test]
    fn ragged_grid_ends_at_stop() {
        let g = EtaGrid { start: 0.0, stop: 1.0, step: 0.3 };
        assert_eq!(g.points(), vec![0.0, 0.3, 0.6, 0.9, 1.0]);
    }

    #[test]
    fn file_overrides_preset() {
        let base = SweepConfig::preset(Preset::Fig3);
        let cfg = SweepConfig::overlay_json(&base, r#"{"charges":[5],"spec":{"r":0.5}}"#).unwrap();
        assert_eq!(cfg.charges, vec![5]);
        assert_eq!(cfg.delta, vec![0.15, 0.5, 1.0]);
        assert_eq!(cfg.spec, SqueezingSpec::from_squeezing(0.5).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let mut cfg = SweepConfig::preset(Preset::Fig4);
        cfg.per_l.insert(-2, SqueezingSpec::from_squeezing(0.3).unwrap());
        cfg.out = Some("x.csv".into());
        let back = SweepConfig::overlay_json(&SweepConfig::default(), &cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = |f: fn(&mut SweepConfig)| {
            let mut c = SweepConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.charges.clear()));
        assert!(bad(|c| c.charges = vec![1, 1]));
        assert!(bad(|c| c.eta.step = 0.0));
        assert!(bad(|c| c.eta.stop = 1.5));
        assert!(bad(|c| {
            c.eta.start = 0.8;
            c.eta.stop = 0.5;
        }));
        assert!(!bad(|c| c.eta.stop = 0.5));
        assert!(bad(|c| c.delta = vec![-0.1]));
        assert!(SweepConfig::overlay_json(&SweepConfig::default(), r#"{"bogus":1}"#).is_err());
        assert!(SweepConfig::overlay_json(&SweepConfig::default(), r#"{"spec":{"V":0.2,"Vp":2}}"#).is_err());
    }
}
