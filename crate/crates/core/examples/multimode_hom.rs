// Spatially resolved interference of twin images at four brightness levels.
//
// For each gain the example prints the Monte Carlo dip amplitude next to
// the exact pair-moment expectation, then the fitted dip width. The dip
// widens as the gain grows because more Schmidt modes lose their pairing
// with a single partner.
//
// Run with `cargo run --release --example multimode_hom`.

use spdc_wigner::experiment::parse_count;
use spdc_wigner::multimode::{
    build_kernel, expected_dip_curve, fit_gaussian_dip, run_hom2d, schmidt_decompose, Hom2dConfig,
};

pub fn run(reps: usize) -> spdc_wigner::Result<()> {
    let mut widths = Vec::new();
    for ppp in [0.01, 0.1, 1.0, 10.0] {
        let cfg = Hom2dConfig { photons_per_pixel: ppp, reps, ..Hom2dConfig::default() };
        let (kernel, _) = build_kernel(&cfg)?;
        let dec = schmidt_decompose(&kernel, cfg.mode_floor)?;
        let exact = expected_dip_curve(&dec, &cfg)?;
        let curve = run_hom2d(&cfg)?;
        println!(
            "photons/pixel {ppp}: peak gain {:.3}, {} modes, input correlation {:.3}",
            curve.peak_gain, curve.modes_kept, curve.input_correlation
        );
        println!("  theta[mrad]   mc        se       exact");
        for (k, want) in exact.iter().enumerate() {
            println!(
                "  {:+.3}     {:8.4} {:8.4} {want:8.4}",
                curve.thetas[k] * 1e3,
                curve.amplitudes[k],
                curve.std_errors[k]
            );
        }
        match curve.sigma_theta {
            Some(s) => println!("  fitted width {:.4} mrad", s * 1e3),
            None => println!("  no dip width could be fitted"),
        }
        if let Some(f) = fit_gaussian_dip(&cfg.thetas, &exact) {
            println!("  width of the exact curve {:.4} mrad", f.sigma * 1e3);
        }
        widths.push(curve.sigma_theta);
    }
    if let (Some(lo), Some(hi)) = (widths[0], widths[3]) {
        println!("width ratio, brightest to dimmest: {:.2}", hi / lo);
    }
    Ok(())
}

fn main() -> spdc_wigner::Result<()> {
    let reps = std::env::args().nth(1).map(|s| parse_count(&s)).transpose()?.unwrap_or(100);
    run(reps)
}
