//! Entanglement and steering certification for two-mode Gaussian states.
//!
//! Entanglement uses the PPT criterion: the state is entangled iff the
//! smallest symplectic eigenvalue `ν̃` of the partially transposed matrix is
//! below 1. Steerability in either direction is
//! `G = max{0, ½ ln(det σ_X / det σ_AB)}` (nats), with `σ_X` the steering
//! party's reduced block.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channels::{apply_channel, ChannelParams};
use crate::error::{Error, Result};
use crate::gaussian::{make_tmss, CovarianceMatrix, SqueezingSpec};

/// Tolerance applied to the strict inequalities `ν̃ < 1` and `G > 0`.
pub const DECISION_TOL: f64 = 1e-9;
/// Lower end of the transmission bracket searched by the threshold solvers.
pub const ETA_BRACKET_LOW: f64 = 1e-6;
/// Bracket width at which bisection stops.
pub const ETA_RESOLUTION: f64 = 1e-6;
pub const MAX_BISECTION_ITER: usize = 200;

/// Local symplectic invariants `(det A, det B, det C, det σ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Invariants {
    pub det_a: f64,
    pub det_b: f64,
    pub det_c: f64,
    pub det: f64,
}

impl Invariants {
    pub fn of(cm: &CovarianceMatrix) -> Self {
        Self {
            det_a: cm.block_a().determinant(),
            det_b: cm.block_b().determinant(),
            det_c: cm.block_c().determinant(),
            det: cm.det(),
        }
    }

    /// `Δ̃ = det A + det B − 2 det C`, the seralian of the partial transpose.
    pub fn seralian_pt(&self) -> f64 {
        self.det_a + self.det_b - 2.0 * self.det_c
    }
}

fn require_positive_definite(cm: &CovarianceMatrix) -> Result<()> {
    if cm.is_positive_definite() {
        Ok(())
    } else {
        Err(Error::invalid("covariance matrix is not positive definite"))
    }
}

/// Smallest symplectic eigenvalue of the partial transpose, from the
/// closed form `ν̃² = (Δ̃ − √(Δ̃² − 4 det σ))/2`.
///
/// Accepts any symmetric positive-definite matrix, including slightly
/// unphysical reconstructions.
pub fn ppt_nu(cm: &CovarianceMatrix) -> Result<f64> {
    require_positive_definite(cm)?;
    let inv = Invariants::of(cm);
    let delta = inv.seralian_pt();
    let mut disc = delta * delta - 4.0 * inv.det;
    if disc < 0.0 {
        if disc < -DECISION_TOL * delta.powi(2).max(1.0) {
            return Err(Error::NumericalDegeneracy(format!(
                "negative discriminant {disc:e} in the symplectic spectrum"
            )));
        }
        disc = 0.0;
    }
    // Product of the two roots is det σ; dividing avoids cancellation.
    let nu_sq = 2.0 * inv.det / (delta + disc.sqrt());
    Ok(nu_sq.sqrt())
}

/// Same quantity as [`ppt_nu`], from the eigenvalues of `iΩσ̃`.
pub fn ppt_nu_spectral(cm: &CovarianceMatrix) -> Result<f64> {
    require_positive_definite(cm)?;
    Ok(cm.partial_transpose().symplectic_eigenvalues()[0])
}

/// `1 − Δ̃ + det σ`: negative iff the state is entangled.
pub fn ppt_witness(cm: &CovarianceMatrix) -> f64 {
    let inv = Invariants::of(cm);
    1.0 - inv.seralian_pt() + inv.det
}

/// Gaussian steerabilities in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Steerability {
    /// Alice (conjugate) steering Bob (probe).
    pub a_to_b: f64,
    pub b_to_a: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "AB")]
    AToB,
    #[serde(rename = "BA")]
    BToA,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::AToB => "A->B",
            Direction::BToA => "B->A",
        })
    }
}

/// Unclamped log ratios `½ ln(det σ_A / det σ)` and `½ ln(det σ_B / det σ)`.
pub fn steering_unclamped(cm: &CovarianceMatrix) -> Result<(f64, f64)> {
    let inv = Invariants::of(cm);
    if inv.det.is_nan() || inv.det <= 0.0 {
        return Err(Error::invalid(format!(
            "invalid state: det σ_AB = {} is not positive",
            inv.det
        )));
    }
    if !(inv.det_a > 0.0 && inv.det_b > 0.0) {
        return Err(Error::invalid("invalid state: reduced blocks must have positive determinant"));
    }
    Ok((
        0.5 * (inv.det_a / inv.det).ln(),
        0.5 * (inv.det_b / inv.det).ln(),
    ))
}

pub fn steering(cm: &CovarianceMatrix) -> Result<Steerability> {
    let (ab, ba) = steering_unclamped(cm)?;
    Ok(Steerability {
        a_to_b: ab.max(0.0),
        b_to_a: ba.max(0.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SteeringClass {
    #[serde(rename = "two-way")]
    TwoWay,
    #[serde(rename = "one-way-AB")]
    OneWayAToB,
    #[serde(rename = "one-way-BA")]
    OneWayBToA,
    #[serde(rename = "none")]
    NoSteering,
}

impl SteeringClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SteeringClass::TwoWay => "two-way",
            SteeringClass::OneWayAToB => "one-way-AB",
            SteeringClass::OneWayBToA => "one-way-BA",
            SteeringClass::NoSteering => "none",
        }
    }

    pub fn from_flags(ab: bool, ba: bool) -> Self {
        match (ab, ba) {
            (true, true) => SteeringClass::TwoWay,
            (true, false) => SteeringClass::OneWayAToB,
            (false, true) => SteeringClass::OneWayBToA,
            (false, false) => SteeringClass::NoSteering,
        }
    }
}

impl fmt::Display for SteeringClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub nu: f64,
    pub entangled: bool,
    #[serde(rename = "gAB")]
    pub g_ab: f64,
    #[serde(rename = "gBA")]
    pub g_ba: f64,
    #[serde(rename = "class")]
    pub class: SteeringClass,
}

impl CriteriaReport {
    /// `ν̃` within [`DECISION_TOL`] of 1; classified as not entangled.
    pub fn is_boundary(&self) -> bool {
        (self.nu - 1.0).abs() <= DECISION_TOL
    }
}

impl fmt::Display for CriteriaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ent = if self.is_boundary() {
            "boundary"
        } else if self.entangled {
            "entangled"
        } else {
            "separable"
        };
        write!(
            f,
            "nu={:.6} ({ent}) G(A->B)={:.6} G(B->A)={:.6} steering={}",
            self.nu, self.g_ab, self.g_ba, self.class
        )
    }
}

pub fn classify(cm: &CovarianceMatrix) -> Result<CriteriaReport> {
    let nu = ppt_nu(cm)?;
    let g = steering(cm)?;
    Ok(CriteriaReport {
        nu,
        entangled: nu < 1.0 - DECISION_TOL,
        g_ab: g.a_to_b,
        g_ba: g.b_to_a,
        class: SteeringClass::from_flags(g.a_to_b > DECISION_TOL, g.b_to_a > DECISION_TOL),
    })
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `tol`. Returns the bracket midpoint.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::invalid(format!("empty bracket [{lo}, {hi}]")));
    }
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NumericalDegeneracy(format!(
            "no sign change on [{lo}, {hi}]: f = {f_lo:e}, {f_hi:e}"
        )));
    }
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Covariance matrix of `spec` after its probe crosses `(eta, delta)`.
pub fn distributed_state(spec: &SqueezingSpec, eta: f64, delta: f64) -> Result<CovarianceMatrix> {
    apply_channel(&make_tmss(spec), ChannelParams::new(eta, delta)?)
}

/// Smallest transmission at which a resource, positive where `present(η) > 0`,
/// is still held. `None` when it survives down to [`ETA_BRACKET_LOW`];
/// `Some(1.0)` when it is absent even at full transmission.
fn death_threshold<F>(present: F) -> Result<Option<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    if present(ETA_BRACKET_LOW)? > 0.0 {
        return Ok(None);
    }
    if present(1.0)? <= 0.0 {
        return Ok(Some(1.0));
    }
    bisect(present, ETA_BRACKET_LOW, 1.0, ETA_RESOLUTION, MAX_BISECTION_ITER).map(Some)
}

/// Transmission below which entanglement of the distributed state dies.
pub fn entanglement_death_eta(spec: &SqueezingSpec, delta: f64) -> Result<Option<f64>> {
    ChannelParams::new(1.0, delta)?;
    death_threshold(|eta| Ok(-ppt_witness(&distributed_state(spec, eta, delta)?)))
}

/// Transmission below which steering in `direction` dies.
pub fn steering_death_eta(
    spec: &SqueezingSpec,
    delta: f64,
    direction: Direction,
) -> Result<Option<f64>> {
    ChannelParams::new(1.0, delta)?;
    death_threshold(|eta| {
        let (ab, ba) = steering_unclamped(&distributed_state(spec, eta, delta)?)?;
        Ok(match direction {
            Direction::AToB => ab,
            Direction::BToA => ba,
        })
    })
}

/// Closed-form B→A steering threshold of a pure-loss channel,
/// `(V + V' − 2) / (2 (1 − V)(V' − 1))`. `None` for `V ≥ 1`.
pub fn lossy_b_to_a_threshold(spec: &SqueezingSpec) -> Option<f64> {
    let (v, vp) = (spec.v(), spec.vp());
    if v >= 1.0 || vp <= 1.0 {
        return None;
    }
    Some((v + vp - 2.0) / (2.0 * (1.0 - v) * (vp - 1.0)))
}
