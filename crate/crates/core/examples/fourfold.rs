// Four-fold intensity moment with every detector on the same signal/idler
// pair. The direct average is compared with the nine pair-moment products,
// grouped into the bunching, low-gain and mixed classes.
//
// `cargo run --release --example fourfold -- 1e7`

use spdc_wigner::experiment::parse_count;
use spdc_wigner::oracle::{fourfold_terms, PairMoments, TERM_CLASSES};
use spdc_wigner::pipelines::{twin, twin_beam_ensemble};
use spdc_wigner::{fourfold_covariance, DetectorParams, GainParams, DEFAULT_SEED};

pub fn run(reps: usize) -> spdc_wigner::Result<()> {
    let gain = GainParams::from_mean_photons(1.0)?;
    let e = twin_beam_ensemble(DEFAULT_SEED, reps, &gain, &DetectorParams::ideal())?;
    let (s, i) = (e.column(twin::SIGNAL), e.column(twin::IDLER));
    let est = fourfold_covariance(s, s, i, i)?;
    let want = fourfold_terms(&PairMoments::coincident(&gain));
    println!("direct       {:>9.4} ± {:.4}", est.direct.value, est.direct.std_error);
    println!("pairing sum  {:>9.4} ± {:.4}", est.pairing_sum.value, est.pairing_sum.std_error);
    println!("exact        {:>9.4}", want.total().re);
    for (label, got, exact) in [
        ("bunching", est.bunching, want.bunching()),
        ("low gain", est.low_gain, want.low_gain()),
        ("mixed", est.mixed, want.mixed()),
    ] {
        println!("  {label:<10} {:>9.4} ± {:.4} (exact {exact:.4})", got.value, got.std_error);
    }
    println!("terms at the estimated pair moments:");
    for (k, (term, class)) in est.terms.terms.iter().zip(TERM_CLASSES).enumerate() {
        println!("  {k}: {:>9.4} {class:?}", term.re);
    }
    Ok(())
}

fn main() -> spdc_wigner::Result<()> {
    let reps = std::env::args().nth(1).map(|s| parse_count(&s)).transpose()?.unwrap_or(10_000_000);
    run(reps)
}
