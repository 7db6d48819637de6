//! Single-mode experiment chains: vacuum in, detector fields out.

use crate::error::Result;
use crate::gaussian::FieldEnsemble;
use crate::optics::{beam_split, detector_loss, parametric_amplify, BeamSplitter, DetectorParams, GainParams};

/// Column layout of [`twin_beam_ensemble`].
pub mod twin {
    pub const SIGNAL: usize = 0;
    pub const IDLER: usize = 1;
}

/// Column layout of [`hom_ensemble`].
pub mod hom {
    pub const SIGNAL: usize = 0;
    pub const IDLER: usize = 1;
    pub const OUT1: usize = 2;
    pub const OUT2: usize = 3;
}

/// Column layout of [`bell_ensemble`].
pub mod bell {
    pub const ARM1_X: usize = 0;
    pub const ARM1_Y: usize = 1;
    pub const ARM2_X: usize = 2;
    pub const ARM2_Y: usize = 3;
}

/// Amplified signal and idler, each seen through a detector of efficiency `eta`.
pub fn twin_beam_ensemble(seed: u64, reps: usize, gain: &GainParams, det: &DetectorParams) -> Result<FieldEnsemble> {
    FieldEnsemble::generate(seed, reps, 2, |rng, row| {
        let (vs, vi) = (rng.vacuum(), rng.vacuum());
        let (es, ei) = parametric_amplify(vs, vi, gain);
        let (ls, li) = (rng.vacuum(), rng.vacuum());
        row[twin::SIGNAL] = detector_loss(es, det, ls);
        row[twin::IDLER] = detector_loss(ei, det, li);
    })
}

/// Twin beams and the two outputs of a beam splitter that recombines them.
pub fn hom_ensemble(seed: u64, reps: usize, gain: &GainParams, bs: &BeamSplitter) -> Result<FieldEnsemble> {
    FieldEnsemble::generate(seed, reps, 4, |rng, row| {
        let (vs, vi) = (rng.vacuum(), rng.vacuum());
        let (es, ei) = parametric_amplify(vs, vi, gain);
        let (e1, e2) = beam_split(es, ei, bs);
        row[hom::SIGNAL] = es;
        row[hom::IDLER] = ei;
        row[hom::OUT1] = e1;
        row[hom::OUT2] = e2;
    })
}

/// Two independent amplifiers whose outputs are routed crosswise into the
/// orthogonal polarizations of two arms, `(1x, 2y)` and `(1y, 2x)`.
pub fn bell_ensemble(seed: u64, reps: usize, gain: &GainParams) -> Result<FieldEnsemble> {
    FieldEnsemble::generate(seed, reps, 4, |rng, row| {
        let (a_s, a_i) = parametric_amplify(rng.vacuum(), rng.vacuum(), gain);
        let (b_s, b_i) = parametric_amplify(rng.vacuum(), rng.vacuum(), gain);
        row[bell::ARM1_X] = a_s;
        row[bell::ARM2_Y] = a_i;
        row[bell::ARM1_Y] = b_s;
        row[bell::ARM2_X] = b_i;
    })
}
