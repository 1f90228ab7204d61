//! Six-setting homodyne tomography: Monte Carlo measurement records and
//! covariance-matrix reconstruction from measured noise variances.
//!
//! Four settings measure single quadratures against the single-mode SNL
//! (absolute variance 1). The joint settings `X_p − X_c` and `Y_p + Y_c`
//! are referenced to the two-mode SNL (absolute variance 2). X–Y cross
//! terms are never measured and reconstruct as exactly zero.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{
    classify, ppt_nu, steering_unclamped, CriteriaReport, SteeringClass, DECISION_TOL,
};
use crate::error::{Error, Result};
use crate::gaussian::{validate, CovarianceMatrix, Decibel, ValidityReport};

const DB_PER_NEPER_POWER: f64 = 10.0 / std::f64::consts::LN_10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Setting {
    Xc,
    Yc,
    Xp,
    Yp,
    Xdiff,
    Ysum,
}

impl Setting {
    pub const ALL: [Setting; 6] = [
        Setting::Xc,
        Setting::Yc,
        Setting::Xp,
        Setting::Yp,
        Setting::Xdiff,
        Setting::Ysum,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Setting::Xc => "Xc",
            Setting::Yc => "Yc",
            Setting::Xp => "Xp",
            Setting::Yp => "Yp",
            Setting::Xdiff => "Xdiff",
            Setting::Ysum => "Ysum",
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }

    pub fn is_joint(&self) -> bool {
        matches!(self, Setting::Xdiff | Setting::Ysum)
    }

    /// Absolute variance of the shot-noise reference for this setting.
    pub fn snl(&self) -> f64 {
        if self.is_joint() {
            2.0
        } else {
            1.0
        }
    }

    /// Coefficients of the measured observable over `(Xc, Yc, Xp, Yp)`.
    pub fn weights(&self) -> [f64; 4] {
        match self {
            Setting::Xc => [1.0, 0.0, 0.0, 0.0],
            Setting::Yc => [0.0, 1.0, 0.0, 0.0],
            Setting::Xp => [0.0, 0.0, 1.0, 0.0],
            Setting::Yp => [0.0, 0.0, 0.0, 1.0],
            Setting::Xdiff => [-1.0, 0.0, 1.0, 0.0],
            Setting::Ysum => [0.0, 1.0, 0.0, 1.0],
        }
    }

    /// Variance of the observable in the state `cm`, absolute units.
    pub fn variance_in(&self, cm: &CovarianceMatrix) -> f64 {
        let w = self.weights();
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                acc += w[i] * cm.get(i, j) * w[j];
            }
        }
        acc
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Setting::ALL
            .into_iter()
            .find(|set| set.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown measurement setting {s:?}")))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for stream `stream` of master seed `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream.wrapping_add(1)))
}

/// Homodyne record for one setting. `seed` regenerates it via
/// [`sample_setting`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub setting: Setting,
    pub samples: Vec<f64>,
    pub seed: u64,
}

impl SampleBatch {
    /// Unbiased sample variance.
    pub fn sample_variance(&self) -> Result<f64> {
        let n = self.samples.len();
        if n < 2 {
            return Err(Error::invalid(format!(
                "batch {} has {n} samples, need at least 2",
                self.setting
            )));
        }
        let first = self.samples[0];
        if self.samples.iter().all(|&x| x == first) {
            return Err(Error::DegenerateBatch {
                setting: self.setting.to_string(),
            });
        }
        let mean = self.samples.iter().sum::<f64>() / n as f64;
        let ss: f64 = self.samples.iter().map(|x| (x - mean).powi(2)).sum();
        let var = ss / (n - 1) as f64;
        if !(var.is_finite() && var > 0.0) {
            return Err(Error::DegenerateBatch {
                setting: self.setting.to_string(),
            });
        }
        Ok(var)
    }

    /// One-column CSV with the setting name as header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([self.setting.name()])?;
        for x in &self.samples {
            wtr.write_record([x.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Draws `n` zero-mean Gaussian outcomes of the given absolute variance.
pub fn sample_setting(setting: Setting, variance: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    let normal = Normal::new(0.0, variance.sqrt())
        .map_err(|e| Error::invalid(format!("setting {setting}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n).map(|_| normal.sample(&mut rng)).collect();
    Ok(SampleBatch { setting, samples, seed })
}

/// Simulates the six measurement settings as independent batches of `n`
/// samples each. Sub-seeds derive from `seed`, so the output does not
/// depend on thread scheduling.
pub fn simulate_measurements(cm: &CovarianceMatrix, n: usize, seed: u64) -> Result<Vec<SampleBatch>> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 samples per setting, got {n}")));
    }
    let report = validate(cm.matrix());
    if !report.passed() {
        return Err(Error::invalid("cannot simulate measurements of an unphysical state"));
    }
    Setting::ALL
        .par_iter()
        .map(|&s| sample_setting(s, s.variance_in(cm), n, derive_seed(seed, s.index() as u64)))
        .collect()
}

/// A noise level in dB above the setting's SNL, with an optional standard
/// error also in dB.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub db: Decibel,
    pub stderr_db: Option<f64>,
}

/// The six measured variances, indexed by [`Setting`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceSet {
    entries: [Measurement; 6],
}

#[derive(Serialize, Deserialize)]
struct VarianceRow {
    setting: Setting,
    db: f64,
    stderr_db: Option<f64>,
}

impl VarianceSet {
    pub fn new(entries: [Measurement; 6]) -> Result<Self> {
        for (s, m) in Setting::ALL.iter().zip(&entries) {
            if !m.db.0.is_finite() {
                return Err(Error::invalid(format!("{s}: level must be finite")));
            }
            if let Some(se) = m.stderr_db {
                if !(se.is_finite() && se >= 0.0) {
                    return Err(Error::invalid(format!("{s}: standard error must be >= 0")));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Levels in dB, ordered as [`Setting::ALL`], without error bars.
    pub fn from_db(levels: [f64; 6]) -> Result<Self> {
        Self::new(levels.map(|db| Measurement { db: Decibel(db), stderr_db: None }))
    }

    /// Exact levels for the state `cm`.
    pub fn expected(cm: &CovarianceMatrix) -> Result<Self> {
        let mut entries = [Measurement { db: Decibel(0.0), stderr_db: None }; 6];
        for s in Setting::ALL {
            entries[s.index()].db = Decibel::from_linear(s.variance_in(cm) / s.snl())?;
        }
        Self::new(entries)
    }

    pub fn get(&self, s: Setting) -> Measurement {
        self.entries[s.index()]
    }

    /// Variance in absolute units (SNL reference undone).
    pub fn absolute(&self, s: Setting) -> f64 {
        self.get(s).db.to_linear() * s.snl()
    }

    /// Standard error of [`Self::absolute`], if known.
    pub fn absolute_stderr(&self, s: Setting) -> Option<f64> {
        self.get(s).stderr_db.map(|se| self.absolute(s) * se / DB_PER_NEPER_POWER)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for s in Setting::ALL {
            let m = self.get(s);
            wtr.serialize(VarianceRow { setting: s, db: m.db.0, stderr_db: m.stderr_db })?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads `setting,db,stderr_db` rows; each setting must appear once.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["setting", "db", "stderr_db"] {
            return Err(Error::invalid(format!(
                "expected header setting,db,stderr_db, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut entries: [Option<Measurement>; 6] = [None; 6];
        for row in rdr.deserialize() {
            let row: VarianceRow = row?;
            let slot = &mut entries[row.setting.index()];
            if slot.is_some() {
                return Err(Error::invalid(format!("setting {} listed twice", row.setting)));
            }
            *slot = Some(Measurement { db: Decibel(row.db), stderr_db: row.stderr_db });
        }
        let mut out = [Measurement { db: Decibel(0.0), stderr_db: None }; 6];
        for s in Setting::ALL {
            out[s.index()] = entries[s.index()]
                .ok_or_else(|| Error::invalid(format!("setting {s} missing")))?;
        }
        Self::new(out)
    }
}

/// Sample variances of the six batches, in dB above each setting's SNL, with
/// standard errors from `Var(s²) = 2σ⁴/(n−1)`. Batch order is irrelevant.
pub fn variances_from_batches(batches: &[SampleBatch]) -> Result<VarianceSet> {
    let mut entries: [Option<Measurement>; 6] = [None; 6];
    for batch in batches {
        let var = batch.sample_variance()?;
        let n = batch.samples.len();
        let db = Decibel::from_linear(var / batch.setting.snl())?;
        let stderr_db = DB_PER_NEPER_POWER * (2.0 / (n - 1) as f64).sqrt();
        let slot = &mut entries[batch.setting.index()];
        if slot.is_some() {
            return Err(Error::invalid(format!("setting {} supplied twice", batch.setting)));
        }
        *slot = Some(Measurement { db, stderr_db: Some(stderr_db) });
    }
    let mut out = [Measurement { db: Decibel(0.0), stderr_db: None }; 6];
    for s in Setting::ALL {
        out[s.index()] =
            entries[s.index()].ok_or_else(|| Error::invalid(format!("no batch for setting {s}")))?;
    }
    VarianceSet::new(out)
}

/// `Cov(a, b) = ½[Δ²(a + b) − Δ²a − Δ²b]`.
pub fn covariance_from_sum(var_sum: f64, var_a: f64, var_b: f64) -> f64 {
    0.5 * (var_sum - var_a - var_b)
}

/// `Cov(a, b) = −½[Δ²(a − b) − Δ²a − Δ²b]`.
pub fn covariance_from_difference(var_diff: f64, var_a: f64, var_b: f64) -> f64 {
    -0.5 * (var_diff - var_a - var_b)
}

/// Result of [`reconstruct_cm`]. Validity problems are warnings: measured
/// data can be marginally unphysical.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reconstruction {
    pub cm: CovarianceMatrix,
    /// Entrywise standard errors, when the input carried them.
    pub stderr: Option<[[f64; 4]; 4]>,
    pub validity: ValidityReport,
    pub warnings: Vec<String>,
}

pub fn reconstruct_cm(vs: &VarianceSet) -> Result<Reconstruction> {
    use Setting::*;
    let (xc, yc, xp, yp) = (vs.absolute(Xc), vs.absolute(Yc), vs.absolute(Xp), vs.absolute(Yp));
    let cov_x = covariance_from_difference(vs.absolute(Xdiff), xp, xc);
    let cov_y = covariance_from_sum(vs.absolute(Ysum), yp, yc);
    let cm = CovarianceMatrix::from_rows([
        [xc, 0.0, cov_x, 0.0],
        [0.0, yc, 0.0, cov_y],
        [cov_x, 0.0, xp, 0.0],
        [0.0, cov_y, 0.0, yp],
    ])?;

    let se = |s: Setting| vs.absolute_stderr(s);
    let stderr = match (se(Xc), se(Yc), se(Xp), se(Yp), se(Xdiff), se(Ysum)) {
        (Some(a), Some(b), Some(c), Some(d), Some(e), Some(f)) => {
            let sx = 0.5 * (e * e + c * c + a * a).sqrt();
            let sy = 0.5 * (f * f + d * d + b * b).sqrt();
            Some([
                [a, 0.0, sx, 0.0],
                [0.0, b, 0.0, sy],
                [sx, 0.0, c, 0.0],
                [0.0, sy, 0.0, d],
            ])
        }
        _ => None,
    };

    let validity = validate(cm.matrix());
    let mut warnings = Vec::new();
    if !validity.positive_definite {
        warnings.push("reconstructed matrix is not positive definite".to_string());
    } else if !validity.physical {
        warnings.push(format!(
            "reconstructed matrix violates the uncertainty bound (min symplectic eigenvalue {:.6})",
            validity.min_symplectic_eigenvalue
        ));
    }
    Ok(Reconstruction { cm, stderr, validity, warnings })
}

/// Coverage factor, in standard errors, a reconstructed resource must clear
/// before [`classify_reconstruction`] certifies it.
pub const CERTIFICATION_SIGMAS: f64 = 3.0;

/// Criteria of a reconstructed state together with their propagated
/// standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertifiedReport {
    /// Point estimates; the flags are certified at `sigmas` standard errors.
    pub report: CriteriaReport,
    pub nu_stderr: f64,
    #[serde(rename = "gAB_stderr")]
    pub g_ab_stderr: f64,
    #[serde(rename = "gBA_stderr")]
    pub g_ba_stderr: f64,
    pub sigmas: f64,
}

/// Classifies the state reconstructed from `vs`. Without error bars this is
/// plain [`classify`]. With them, standard errors of `ν̃`, `G_AB`, `G_BA` are
/// propagated linearly from the six levels, and entanglement or steering is
/// reported only beyond `sigmas` standard errors.
pub fn classify_reconstruction(vs: &VarianceSet, sigmas: f64) -> Result<CertifiedReport> {
    if !(sigmas.is_finite() && sigmas >= 0.0) {
        return Err(Error::invalid(format!("coverage factor must be >= 0, got {sigmas}")));
    }
    let point = classify(&reconstruct_cm(vs)?.cm)?;
    let eval = |levels: &VarianceSet| -> Result<[f64; 3]> {
        let cm = reconstruct_cm(levels)?.cm;
        let g = steering_unclamped(&cm)?;
        Ok([ppt_nu(&cm)?, g.0, g.1])
    };
    let mut var = [0.0f64; 3];
    let mut have_errors = true;
    for s in Setting::ALL {
        let m = vs.get(s);
        let Some(se) = m.stderr_db else {
            have_errors = false;
            break;
        };
        let h = 1e-4;
        let shifted = |d: f64| {
            let mut entries = vs.entries;
            entries[s.index()].db = Decibel(m.db.0 + d);
            VarianceSet::new(entries)
        };
        let up = eval(&shifted(h)?)?;
        let down = eval(&shifted(-h)?)?;
        for k in 0..3 {
            var[k] += ((up[k] - down[k]) / (2.0 * h) * se).powi(2);
        }
    }
    if !have_errors {
        return Ok(CertifiedReport {
            report: point,
            nu_stderr: 0.0,
            g_ab_stderr: 0.0,
            g_ba_stderr: 0.0,
            sigmas,
        });
    }
    let [se_nu, se_ab, se_ba] = var.map(f64::sqrt);
    let mut report = point;
    report.entangled = point.nu + sigmas * se_nu < 1.0 - DECISION_TOL;
    report.class = SteeringClass::from_flags(
        point.g_ab > sigmas * se_ab + DECISION_TOL,
        point.g_ba > sigmas * se_ba + DECISION_TOL,
    );
    Ok(CertifiedReport {
        report,
        nu_stderr: se_nu,
        g_ab_stderr: se_ab,
        g_ba_stderr: se_ba,
        sigmas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{make_tmss, SqueezingSpec};
    use approx::assert_abs_diff_eq;

    fn source() -> CovarianceMatrix {
        make_tmss(&SqueezingSpec::new(0.47, 4.11).unwrap())
    }

    #[test]
    fn setting_variances_of_source() {
        let cm = source();
        assert_abs_diff_eq!(Setting::Xc.variance_in(&cm), 2.29, epsilon = 1e-12);
        assert_abs_diff_eq!(Setting::Xdiff.variance_in(&cm), 0.94, epsilon = 1e-12);
        assert_abs_diff_eq!(Setting::Ysum.variance_in(&cm), 0.94, epsilon = 1e-12);
    }

    #[test]
    fn vacuum_samples_have_unit_variance() {
        let n = 100_000;
        let batches = simulate_measurements(&CovarianceMatrix::vacuum(), n, 3).unwrap();
        assert_eq!(batches.len(), 6);
        for b in batches.iter().filter(|b| !b.setting.is_joint()) {
            let var = b.sample_variance().unwrap();
            assert!((var - 1.0).abs() <= 3.0 * (2.0 / n as f64).sqrt(), "{}: {var}", b.setting);
        }
    }

    #[test]
    fn source_samples_match_quoted_levels() {
        let n = 100_000;
        let batches = simulate_measurements(&source(), n, 11).unwrap();
        let by = |s: Setting| batches.iter().find(|b| b.setting == s).unwrap();
        let xdiff = by(Setting::Xdiff).sample_variance().unwrap();
        assert!((xdiff - 0.94).abs() < 0.02, "{xdiff}");
        let xc = by(Setting::Xc).sample_variance().unwrap();
        assert!((xc - 2.29).abs() < 0.05, "{xc}");
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let a = simulate_measurements(&source(), 1000, 42).unwrap();
        let b = simulate_measurements(&source(), 1000, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_measurements(&source(), 1000, 43).unwrap();
        assert_ne!(a, c);
        for batch in &a {
            let again =
                sample_setting(batch.setting, batch.setting.variance_in(&source()), 1000, batch.seed)
                    .unwrap();
            assert_eq!(&again, batch);
        }
    }

    #[test]
    fn simulation_rejects_bad_input() {
        assert!(simulate_measurements(&source(), 1, 0).is_err());
        let bad = CovarianceMatrix::new(nalgebra::Matrix4::identity() * 0.5).unwrap();
        assert!(simulate_measurements(&bad, 10, 0).is_err());
    }

    #[test]
    fn degenerate_and_short_batches() {
        let constant = SampleBatch { setting: Setting::Xc, samples: vec![0.3; 10], seed: 0 };
        assert!(matches!(constant.sample_variance(), Err(Error::DegenerateBatch { .. })));
        let short = SampleBatch { setting: Setting::Xc, samples: vec![0.3], seed: 0 };
        assert!(matches!(short.sample_variance(), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn vacuum_levels_near_zero_db() {
        let batches = simulate_measurements(&CovarianceMatrix::vacuum(), 100_000, 5).unwrap();
        let vs = variances_from_batches(&batches).unwrap();
        for s in Setting::ALL {
            assert!(vs.get(s).db.0.abs() < 0.1, "{s}: {}", vs.get(s).db);
        }
    }

    #[test]
    fn source_levels_round_trip() {
        let batches = simulate_measurements(&source(), 100_000, 9).unwrap();
        let vs = variances_from_batches(&batches).unwrap();
        let expected = [3.6, 3.6, 3.6, 3.6, -3.3, -3.3];
        for (s, e) in Setting::ALL.iter().zip(expected) {
            assert!((vs.get(*s).db.0 - e).abs() < 0.1, "{s}: {}", vs.get(*s).db);
        }
        let se = vs.get(Setting::Xc).stderr_db.unwrap();
        assert_abs_diff_eq!(se, DB_PER_NEPER_POWER * (2.0 / 99_999.0f64).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn batch_order_is_irrelevant() {
        let mut batches = simulate_measurements(&source(), 5000, 1).unwrap();
        let forward = variances_from_batches(&batches).unwrap();
        batches.reverse();
        assert_eq!(variances_from_batches(&batches).unwrap(), forward);
        batches.pop();
        assert!(variances_from_batches(&batches).is_err());
    }

    #[test]
    fn reconstruct_quoted_levels() {
        let vs = VarianceSet::from_db([3.6, 3.6, 3.6, 3.6, -3.3, -3.3]).unwrap();
        let rec = reconstruct_cm(&vs).unwrap();
        let va = Decibel(3.6).to_linear();
        let v = Decibel(-3.3).to_linear();
        assert_abs_diff_eq!(rec.cm.get(0, 0), va, epsilon = 1e-12);
        assert_abs_diff_eq!(rec.cm.get(0, 0), 2.29, epsilon = 0.01);
        assert_abs_diff_eq!(rec.cm.get(0, 2), va - v, epsilon = 1e-12);
        assert_abs_diff_eq!(rec.cm.get(0, 2), 1.82, epsilon = 0.01);
        assert_abs_diff_eq!(rec.cm.get(1, 3), -(va - v), epsilon = 1e-12);
        assert_eq!(rec.cm.get(0, 1), 0.0);
        assert_eq!(rec.cm.get(0, 3), 0.0);
        assert!(rec.stderr.is_none());
        assert!(rec.warnings.is_empty());
    }

    #[test]
    fn reconstruct_vacuum_levels() {
        let rec = reconstruct_cm(&VarianceSet::from_db([0.0; 6]).unwrap()).unwrap();
        assert_eq!(rec.cm, CovarianceMatrix::vacuum());
    }

    #[test]
    fn unphysical_reconstruction_warns() {
        let rec = reconstruct_cm(&VarianceSet::from_db([-1.0, -1.0, 0.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!(!rec.validity.physical);
        assert_eq!(rec.warnings.len(), 1);
    }

    #[test]
    fn analytic_levels_reconstruct_exactly() {
        for (eta, delta) in [(1.0, 0.0), (0.3, 0.5), (0.7, 0.15), (0.05, 1.0)] {
            let cm = crate::criteria::distributed_state(&SqueezingSpec::new(0.47, 4.11).unwrap(), eta, delta)
                .unwrap();
            let rec = reconstruct_cm(&VarianceSet::expected(&cm).unwrap()).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    assert_abs_diff_eq!(rec.cm.get(i, j), cm.get(i, j), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn sum_and_difference_forms_agree() {
        let cm = source();
        let (xc, xp) = (cm.get(0, 0), cm.get(2, 2));
        let sum = xc + xp + 2.0 * cm.get(0, 2);
        let diff = xc + xp - 2.0 * cm.get(0, 2);
        let a = covariance_from_sum(sum, xp, xc);
        let b = covariance_from_difference(diff, xp, xc);
        assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        assert_abs_diff_eq!(a, cm.get(0, 2), epsilon = 1e-14);
    }

    #[test]
    fn variance_csv_round_trip() {
        let batches = simulate_measurements(&source(), 2000, 4).unwrap();
        let vs = variances_from_batches(&batches).unwrap();
        let mut buf = Vec::new();
        vs.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("setting,db,stderr_db\nXc,"));
        assert_eq!(VarianceSet::read_csv(buf.as_slice()).unwrap(), vs);

        let no_se = VarianceSet::from_db([1.0, 2.0, 3.0, 4.0, -1.0, -2.0]).unwrap();
        let mut buf = Vec::new();
        no_se.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().contains("Xdiff,-1.0,\n"));
        assert_eq!(VarianceSet::read_csv(buf.as_slice()).unwrap(), no_se);
    }

    #[test]
    fn variance_csv_rejects_bad_files() {
        let missing = "setting,db,stderr_db\nXc,1,\n";
        assert!(VarianceSet::read_csv(missing.as_bytes()).is_err());
        let dup = "setting,db,stderr_db\nXc,1,\nXc,1,\nYc,1,\nXp,1,\nYp,1,\nXdiff,1,\n";
        assert!(VarianceSet::read_csv(dup.as_bytes()).is_err());
        let header = "name,db,stderr_db\n";
        assert!(VarianceSet::read_csv(header.as_bytes()).is_err());
        let unknown = "setting,db,stderr_db\nZz,1,\n";
        assert!(VarianceSet::read_csv(unknown.as_bytes()).is_err());
    }

    #[test]
    fn batch_csv_is_one_column() {
        let batch = sample_setting(Setting::Ysum, 2.0, 3, 1).unwrap();
        let mut buf = Vec::new();
        batch.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "Ysum");
        assert_eq!(lines[1].parse::<f64>().unwrap(), batch.samples[0]);
    }

    #[test]
    fn setting_names_parse() {
        for s in Setting::ALL {
            assert_eq!(s.name().parse::<Setting>().unwrap(), s);
        }
        assert!("Xsum".parse::<Setting>().is_err());
    }
}
