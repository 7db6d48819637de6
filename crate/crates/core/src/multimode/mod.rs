//! Multimode (pixel-resolved) twin beams.

mod fit;
mod hom2d;
mod kernel;
mod schmidt;
mod synth;

pub use fit::{fit_gaussian_dip, DipFit};
pub use hom2d::{build_kernel, default_thetas, expected_dip_curve, run_hom2d, shift_operator, DipCurve, Hom2dConfig};
pub use kernel::{axis_coordinate, coupling_matrix, mirror_index, JointAmplitudeKernel, MAX_DENSE_PIXELS};
pub use schmidt::{gain_from_lambda, schmidt_decompose, SchmidtDecomposition};
pub use synth::{sample_multimode, MultimodeSample};
