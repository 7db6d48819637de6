//! Vacuum sampling and ensembles of symmetric-ordered field amplitudes.
//!
//! Every repetition owns an independent counter-based random stream derived
//! from `(seed, repetition)`, so ensembles are reproducible bit for bit and do
//! not depend on the thread count or the order in which rows are generated.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::reduce::CHUNK;

/// A single complex field amplitude in symmetric (Wigner) ordering.
pub type ComplexAmplitude = Complex64;

/// Offsets that convert symmetric-ordered moments to normal-ordered ones.
#[derive(Debug, Clone, Copy)]
pub struct OrderingConstants;

impl OrderingConstants {
    /// Subtracted from a symmetric mean intensity.
    pub const INTENSITY: f64 = 0.5;
    /// Subtracted from a symmetric intensity variance.
    pub const VARIANCE: f64 = 0.25;
}

/// Independent random stream for one repetition.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One vacuum amplitude: circular complex Gaussian with `<|E|^2> = 1/2`.
    pub fn vacuum(&mut self) -> ComplexAmplitude {
        // 1 - u lies in (0, 1], so the logarithm is finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-0.5 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        Complex64::new(r * c, r * s)
    }

    pub fn fill_vacuum(&mut self, out: &mut [ComplexAmplitude]) {
        for z in out {
            *z = self.vacuum();
        }
    }
}

/// Stream for repetition `repetition` under `seed`. Pure in its inputs.
pub fn derive_stream(seed: u64, repetition: u64) -> RngStream {
    RngStream::new(seed, repetition)
}

/// `reps x modes` symmetric-ordered amplitudes, stored column by column.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldEnsemble {
    reps: usize,
    modes: usize,
    seed: u64,
    data: Vec<ComplexAmplitude>,
}

impl FieldEnsemble {
    /// Runs `row` once per repetition with that repetition's stream.
    ///
    /// The closure fills a slice of length `modes`. Rows are produced in
    /// parallel; the result is independent of scheduling.
    pub fn generate<F>(seed: u64, reps: usize, modes: usize, row: F) -> Result<Self>
    where
        F: Fn(&mut RngStream, &mut [ComplexAmplitude]) + Sync,
    {
        if reps == 0 {
            return Err(invalid("ensemble needs at least one repetition"));
        }
        if modes == 0 {
            return Err(invalid("ensemble needs at least one mode"));
        }
        let chunks = reps.div_ceil(CHUNK);
        let blocks: Vec<Vec<ComplexAmplitude>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = ((c + 1) * CHUNK).min(reps);
                let mut buf = vec![Complex64::new(0.0, 0.0); (hi - lo) * modes];
                for (k, r) in (lo..hi).enumerate() {
                    let mut stream = derive_stream(seed, r as u64);
                    row(&mut stream, &mut buf[k * modes..(k + 1) * modes]);
                }
                buf
            })
            .collect();
        let mut data = vec![Complex64::new(0.0, 0.0); reps * modes];
        for (c, buf) in blocks.iter().enumerate() {
            let lo = c * CHUNK;
            for (k, rowbuf) in buf.chunks_exact(modes).enumerate() {
                for (m, z) in rowbuf.iter().enumerate() {
                    data[m * reps + lo + k] = *z;
                }
            }
        }
        Ok(Self { reps, modes, seed, data })
    }

    /// Builds an ensemble from equally long columns.
    pub fn from_columns(seed: u64, columns: Vec<Vec<ComplexAmplitude>>) -> Result<Self> {
        let modes = columns.len();
        let reps = columns.first().map_or(0, Vec::len);
        if modes == 0 || reps == 0 {
            return Err(invalid("empty ensemble"));
        }
        if columns.iter().any(|c| c.len() != reps) {
            return Err(invalid("ensemble columns differ in length"));
        }
        let data = columns.into_iter().flatten().collect();
        Ok(Self { reps, modes, seed, data })
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// All repetitions of one mode.
    pub fn column(&self, mode: usize) -> &[ComplexAmplitude] {
        &self.data[mode * self.reps..(mode + 1) * self.reps]
    }

    pub fn get(&self, rep: usize, mode: usize) -> ComplexAmplitude {
        self.data[mode * self.reps + rep]
    }

    pub fn row(&self, rep: usize) -> Vec<ComplexAmplitude> {
        (0..self.modes).map(|m| self.get(rep, m)).collect()
    }
}

/// Independent vacuum amplitudes for `modes` modes over `reps` repetitions.
pub fn sample_vacuum(seed: u64, reps: usize, modes: usize) -> Result<FieldEnsemble> {
    FieldEnsemble::generate(seed, reps, modes, |s, row| s.fill_vacuum(row))
}
