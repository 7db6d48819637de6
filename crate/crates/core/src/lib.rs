//! Stochastic Wigner-field simulation of parametric down-conversion.
//!
//! Quantum fields are replaced by classical complex Gaussian amplitudes in
//! symmetric ordering. Each repetition starts from vacuum noise, passes
//! through linear optics, and ensemble averages with an ordering correction
//! give normal-ordered detector moments. Closed-form oracles in [`oracle`]
//! validate every pipeline.

pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod moments;
pub mod multimode;
pub mod optics;
pub mod oracle;
pub mod pipelines;
mod reduce;

pub use error::{Error, Result};
pub use gaussian::{derive_stream, sample_vacuum, ComplexAmplitude, FieldEnsemble, OrderingConstants, RngStream};
pub use moments::{
    chsh_coefficient, chsh_parameter, correlation_coefficient, covariance_intensity, field_pair_moment,
    fourfold_covariance, gaussian_moment_check, hom_dip_amplitude, mean_intensity, port_contrast, single_shot_snr,
    variance_intensity, ChshAngles, ChshEstimate, ComplexEstimate, FourfoldEstimate, MomentEstimate, PortContrast,
};
pub use optics::{
    beam_split, detector_loss, parametric_amplify, polarizer_project, BeamSplitter, DetectorParams, GainParams,
    PolarizerAngle,
};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 24301;
