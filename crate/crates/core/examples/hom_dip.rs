// Single-mode twin beams recombined on a splitter. The output covariance
// scales as `|t_s1 t_i2 + r_i1 r_s2|^2` and vanishes on a balanced splitter
// at every gain.
//
// `cargo run --release --example hom_dip -- 1e6`

use spdc_wigner::experiment::parse_count;
use spdc_wigner::oracle::hom_cov_ratio;
use spdc_wigner::pipelines::{hom, hom_ensemble};
use spdc_wigner::{covariance_intensity, hom_dip_amplitude, BeamSplitter, GainParams, DEFAULT_SEED};

pub fn run(reps: usize) -> spdc_wigner::Result<()> {
    for g in [0.01, 10.0] {
        let gain = GainParams::from_mean_photons(g)?;
        println!("G = {g}");
        println!("  {:>5} {:>14} {:>14} {:>10}", "tau", "cov_out", "amplitude", "exact");
        for tau in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let bs = BeamSplitter::with_transmittance(tau)?;
            let e = hom_ensemble(DEFAULT_SEED, reps, &gain, &bs)?;
            let cols = |k| e.column(k);
            let cov = covariance_intensity(cols(hom::OUT1), cols(hom::OUT2))?;
            let amp = hom_dip_amplitude(cols(hom::SIGNAL), cols(hom::IDLER), cols(hom::OUT1), cols(hom::OUT2))?;
            println!("  {tau:>5} {:>14.5} {:>14.5} {:>10.5}", cov.value, amp.value, hom_cov_ratio(&bs));
        }
    }
    Ok(())
}

fn main() -> spdc_wigner::Result<()> {
    let reps = std::env::args().nth(1).map(|s| parse_count(&s)).transpose()?.unwrap_or(1_000_000);
    run(reps)
}
