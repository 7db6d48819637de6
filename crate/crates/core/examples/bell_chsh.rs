// Two crossed amplifiers make polarization-entangled beams. The CHSH
// combination exceeds 2 only while the mean photon number per mode stays
// below the threshold where multi-pair emission washes out the violation.
//
// `cargo run --release --example bell_chsh -- 1e6`

use std::f64::consts::SQRT_2;

use spdc_wigner::experiment::parse_count;
use spdc_wigner::oracle::chsh_threshold_gain;
use spdc_wigner::pipelines::{bell, bell_ensemble};
use spdc_wigner::{chsh_parameter, ChshAngles, GainParams, DEFAULT_SEED};

pub fn run(reps: usize) -> spdc_wigner::Result<()> {
    let threshold = chsh_threshold_gain();
    println!("threshold G = {threshold:.5}");
    println!("{:>8} {:>18} {:>8}", "G", "B (Monte Carlo)", "exact");
    for g in [0.01, 0.1, threshold, 1.0, 10.0] {
        let e = bell_ensemble(DEFAULT_SEED, reps, &GainParams::from_mean_photons(g)?)?;
        let est = chsh_parameter(
            e.column(bell::ARM1_X),
            e.column(bell::ARM1_Y),
            e.column(bell::ARM2_X),
            e.column(bell::ARM2_Y),
            &ChshAngles::standard(),
        )?;
        let b = est.parameter;
        let want = (1.0 + g) / (1.0 + 3.0 * g) * 2.0 * SQRT_2;
        println!("{g:>8.4} {:>9.4} ± {:<6.4} {want:>8.4}", b.value, b.std_error);
    }
    Ok(())
}

fn main() -> spdc_wigner::Result<()> {
    let reps = std::env::args().nth(1).map(|s| parse_count(&s)).transpose()?.unwrap_or(1_000_000);
    run(reps)
}
