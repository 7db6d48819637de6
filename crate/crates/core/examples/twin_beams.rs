// Twin beams from a parametric amplifier: Monte Carlo intensity moments
// next to their closed forms, from the photon-starved to the bright regime.
//
// `cargo run --release --example twin_beams -- 1e6`

use spdc_wigner::experiment::parse_count;
use spdc_wigner::oracle::twin_moments;
use spdc_wigner::pipelines::{twin, twin_beam_ensemble};
use spdc_wigner::{covariance_intensity, mean_intensity, variance_intensity, DetectorParams, GainParams, DEFAULT_SEED};

pub fn run(reps: usize) -> spdc_wigner::Result<()> {
    let det = DetectorParams::ideal();
    println!("{:>6} {:>22} {:>22} {:>22}", "G", "mean (exact)", "variance (exact)", "covariance (exact)");
    for g in [0.01, 0.1, 1.0, 10.0] {
        let gain = GainParams::from_mean_photons(g)?;
        let e = twin_beam_ensemble(DEFAULT_SEED, reps, &gain, &det)?;
        let (s, i) = (e.column(twin::SIGNAL), e.column(twin::IDLER));
        let want = twin_moments(&gain, &det);
        let (m, v, c) = (mean_intensity(s)?, variance_intensity(s)?, covariance_intensity(s, i)?);
        println!(
            "{g:>6} {:>12.4} ({:>7.4}) {:>12.4} ({:>7.4}) {:>12.4} ({:>7.4})",
            m.value, want.mean, v.value, want.variance, c.value, want.covariance
        );
    }
    Ok(())
}

fn main() -> spdc_wigner::Result<()> {
    let reps = std::env::args().nth(1).map(|s| parse_count(&s)).transpose()?.unwrap_or(1_000_000);
    run(reps)
}
