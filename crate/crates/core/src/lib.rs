//! Gaussian-state toolkit for OAM-multiplexed continuous-variable
//! entanglement: two-mode squeezed sources, lossy and noisy distribution of
//! the probe mode, PPT and steering certification with sudden-death
//! thresholds, six-setting homodyne tomography, and Laguerre-Gaussian beam
//! diagnostics.
//!
//! ```
//! use oamcv::{classify, distributed_state, SqueezingSpec, SteeringClass};
//!
//! let spec = SqueezingSpec::new(0.47, 4.11).unwrap();
//! let report = classify(&distributed_state(&spec, 0.5, 0.0).unwrap()).unwrap();
//! assert!(report.entangled);
//! assert_eq!(report.class, SteeringClass::OneWayAToB);
//! ```

pub mod channels;
pub mod criteria;
pub mod error;
pub mod gaussian;
pub mod modes;
pub mod tomography;

pub use channels::{apply_channel, apply_channel_multiplexed, ChannelParams};
pub use criteria::{
    classify, distributed_state, entanglement_death_eta, ppt_nu, ppt_nu_spectral, steering,
    steering_death_eta, steering_unclamped, CriteriaReport, Direction, Steerability, SteeringClass,
};
pub use error::{Error, Result};
pub use gaussian::{
    db_to_linear, linear_to_db, make_multiplexed, make_tmss, validate, Charge, CovarianceMatrix,
    Decibel, ModePair, MultiplexedState, SqueezingSpec, ValidityReport,
};
pub use modes::{
    count_dark_stripes, lg_field, tilted_lens_pattern, BitDepth, FieldGrid, GridSpec,
    IntensityGrid, LgMode, StripeCount,
};
pub use tomography::{
    classify_reconstruction, reconstruct_cm, simulate_measurements, variances_from_batches, Reconstruction, SampleBatch,
    CertifiedReport, Setting, VarianceSet,
};
