//! Lossy and noisy transmission of the probe mode.
//!
//! The probe field `a` leaves the channel as `√η a + √(1-η)(ε + μ)`, where
//! `μ` is vacuum and `ε` carries excess noise of variance `δ` per
//! quadrature. The conjugate mode stays with Alice and is untouched.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{validate, CovarianceMatrix, MultiplexedState};

/// Transmission efficiency `eta ∈ [0, 1]` and excess noise `delta ≥ 0`
/// (shot-noise units). `delta = 0` is a pure-loss channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel", into = "RawChannel")]
pub struct ChannelParams {
    eta: f64,
    delta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawChannel {
    eta: f64,
    delta: f64,
}

impl TryFrom<RawChannel> for ChannelParams {
    type Error = Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        ChannelParams::new(raw.eta, raw.delta)
    }
}

impl From<ChannelParams> for RawChannel {
    fn from(ch: ChannelParams) -> Self {
        RawChannel { eta: ch.eta, delta: ch.delta }
    }
}

impl ChannelParams {
    pub fn new(eta: f64, delta: f64) -> Result<Self> {
        if !(eta.is_finite() && (0.0..=1.0).contains(&eta)) {
            return Err(Error::invalid(format!("transmission efficiency must lie in [0, 1], got {eta}")));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::invalid(format!("excess noise must be >= 0, got {delta}")));
        }
        Ok(Self { eta, delta })
    }

    pub fn lossy(eta: f64) -> Result<Self> {
        Self::new(eta, 0.0)
    }

    pub fn identity() -> Self {
        Self { eta: 1.0, delta: 0.0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_lossy_only(&self) -> bool {
        self.delta == 0.0
    }
}

/// Sends the probe half of `cm` through the channel: Bob's block becomes
/// `η B + (1-η)(1+δ) I`, the cross block `√η C`, Alice's block is kept.
pub fn apply_channel(cm: &CovarianceMatrix, ch: ChannelParams) -> Result<CovarianceMatrix> {
    let report = validate(cm.matrix());
    if !report.passed() {
        return Err(Error::invalid(format!(
            "channel input is not a physical state (min symplectic eigenvalue {:.6})",
            report.min_symplectic_eigenvalue
        )));
    }
    let eta = ch.eta();
    let b = cm.block_b() * eta + Matrix2::identity() * ((1.0 - eta) * (1.0 + ch.delta()));
    let c = cm.block_c() * eta.sqrt();
    CovarianceMatrix::from_blocks(cm.block_a(), b, c)
}

/// Applies the same channel independently to every OAM pair.
pub fn apply_channel_multiplexed(
    ms: &MultiplexedState,
    ch: ChannelParams,
) -> Result<MultiplexedState> {
    ms.try_map_cm(|cm| apply_channel(cm, ch))
}
