// Detector loss mixes vacuum into each beam. The covariance falls as
// `eta^2` while the variance keeps a shot-noise part linear in `eta`, so
// the twin correlation weakens but never disappears.
//
// `cargo run --release --example detector_efficiency -- 1e6`

use spdc_wigner::experiment::parse_count;
use spdc_wigner::oracle::twin_moments;
use spdc_wigner::pipelines::{twin, twin_beam_ensemble};
use spdc_wigner::{covariance_intensity, variance_intensity, DetectorParams, GainParams, DEFAULT_SEED};

pub fn run(reps: usize) -> spdc_wigner::Result<()> {
    let gain = GainParams::from_mean_photons(1.0)?;
    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "eta", "var", "cov", "cov/var", "exact");
    for eta in [1.0, 0.8, 0.5, 0.2] {
        let det = DetectorParams::new(eta)?;
        let e = twin_beam_ensemble(DEFAULT_SEED, reps, &gain, &det)?;
        let (s, i) = (e.column(twin::SIGNAL), e.column(twin::IDLER));
        let (v, c) = (variance_intensity(s)?, covariance_intensity(s, i)?);
        let want = twin_moments(&gain, &det);
        println!(
            "{eta:>5} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            v.value,
            c.value,
            c.value / v.value,
            want.covariance / want.variance
        );
    }
    Ok(())
}

fn main() -> spdc_wigner::Result<()> {
    let reps = std::env::args().nth(1).map(|s| parse_count(&s)).transpose()?.unwrap_or(1_000_000);
    run(reps)
}
