//! Acceptance run: one PASS/FAIL line per criterion at its stated tolerance.
//!
//! Criteria that are known to be unattainable are still evaluated in full and
//! printed as FAIL; they are listed in `KNOWN_FAILURES` with the reason. The
//! process exits non-zero only for failures outside that list.

use std::f64::consts::{FRAC_PI_8, SQRT_2};
use std::time::Instant;

use spdc_wigner::experiment::{run_hom, run_twin, Settings};
use spdc_wigner::multimode::{run_hom2d, Hom2dConfig};
use spdc_wigner::oracle::{bell_prediction, chsh_threshold_gain, fourfold_terms, PairMoments};
use spdc_wigner::pipelines::{bell, bell_ensemble, hom, hom_ensemble, twin, twin_beam_ensemble};
use spdc_wigner::{
    chsh_parameter, correlation_coefficient, covariance_intensity, fourfold_covariance, gaussian_moment_check,
    mean_intensity, polarizer_project, port_contrast, single_shot_snr, variance_intensity, BeamSplitter, ChshAngles,
    ComplexAmplitude, DetectorParams, GainParams, MomentEstimate, PolarizerAngle, DEFAULT_SEED,
};

const K_SE: f64 = 5.0;
const MEGA: usize = 1_000_000;

/// Criteria expected to fail, with the reason recorded in the decisions ledger.
const KNOWN_FAILURES: &[(u32, &str)] = &[
    (8, "with 100 repetitions, vacuum noise swamps the summed pixel moments at 0.01 and 0.1 photons/pixel"),
    (9, "at low gain the single-repetition SNR tends to 2 S^2, outside a factor 1.5 of S^2"),
];

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn within(est: &MomentEstimate, oracle: f64) -> bool {
    est.deviation_se(oracle).abs() < K_SE
}

fn fmt(est: &MomentEstimate) -> String {
    format!("{:.5}±{:.5}", est.value, est.std_error)
}

fn gain(photons: f64) -> GainParams {
    GainParams::from_mean_photons(photons).unwrap()
}

fn port(x: &[ComplexAmplitude], y: &[ComplexAmplitude], angle: f64) -> Vec<ComplexAmplitude> {
    x.iter().zip(y).map(|(&a, &b)| polarizer_project(a, b, PolarizerAngle(angle))).collect()
}

fn twin_moments() -> Outcome {
    let started = Instant::now();
    let settings = Settings { gain_gl: Some(1f64.asinh()), reps: Some(MEGA), ..Settings::default() };
    let report = run_twin(&settings).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let mut pass = elapsed < 10.0;
    let mut detail = Vec::new();
    for (stat, want) in [("mean", 1.0), ("var", 2.0), ("cov", 2.0)] {
        let row = report.row(stat).unwrap();
        pass &= row.pass && ((row.mc_value - want) / want).abs() <= 0.02;
        detail.push(format!("{stat} {:.4} ({:+.2} se)", row.mc_value, row.deviation_se));
    }
    Outcome { id: 1, name: "twin-beam moments", pass, detail: format!("{}, {elapsed:.2} s", detail.join(", ")) }
}

fn detector_efficiency() -> Outcome {
    let e = twin_beam_ensemble(DEFAULT_SEED, MEGA, &gain(1.0), &DetectorParams::new(0.5).unwrap()).unwrap();
    let (s, i) = (e.column(twin::SIGNAL), e.column(twin::IDLER));
    let var = variance_intensity(s).unwrap();
    let cov = covariance_intensity(s, i).unwrap();
    let ratio = cov.value / var.value;
    let pass = within(&var, 0.75) && within(&cov, 0.5) && (ratio / (2.0 / 3.0) - 1.0).abs() <= 0.03;
    Outcome {
        id: 2,
        name: "detector efficiency",
        pass,
        detail: format!("var {}, cov {}, cov/var {ratio:.4}", fmt(&var), fmt(&cov)),
    }
}

fn hom_null() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for g in [0.01, 1.0, 10.0] {
        let settings = Settings { mean_photons: Some(g), reps: Some(MEGA), ..Settings::default() };
        let report = run_hom(&settings).unwrap();
        let cov = report.row("cov_out").unwrap();
        let dip = report.row("dip_amplitude").unwrap();
        pass &= cov.deviation_se.abs() < K_SE && dip.mc_value.abs() < 0.02;
        detail.push(format!("G={g}: cov {:+.2} se, dip {:.2e}", cov.deviation_se, dip.mc_value));
    }
    Outcome { id: 3, name: "HOM null", pass, detail: detail.join("; ") }
}

fn bell_correlation_law() -> Outcome {
    // The law does not depend on gain; at G = 1 one standard error is well
    // below the absolute bound.
    let g = 1.0;
    let e = bell_ensemble(DEFAULT_SEED, MEGA, &gain(g)).unwrap();
    let (x1, y1, x2, y2) =
        (e.column(bell::ARM1_X), e.column(bell::ARM1_Y), e.column(bell::ARM2_X), e.column(bell::ARM2_Y));
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut worst_se: f64 = 0.0;
    for k in 0..8 {
        let total = k as f64 * FRAC_PI_8;
        let rho = correlation_coefficient(&port(x1, y1, total / 2.0), &port(x2, y2, total / 2.0)).unwrap();
        let want = bell_prediction(total / 2.0, total / 2.0, g).unwrap().rho;
        pass &= within(&rho, want);
        worst = worst.max((rho.value - want).abs());
        worst_se = worst_se.max(rho.deviation_se(want).abs());
    }
    pass &= worst < 0.02;
    Outcome {
        id: 4,
        name: "Bell correlation law",
        pass,
        detail: format!("G={g}, 8 angle sums, max |dev| {worst:.4}, max {worst_se:.2} se"),
    }
}

fn chsh_gain_law() -> Outcome {
    let threshold = chsh_threshold_gain();
    let mut pass = true;
    let mut detail = Vec::new();
    for g in [0.01, 0.26120, 1.0, 10.0] {
        let e = bell_ensemble(DEFAULT_SEED, MEGA, &gain(g)).unwrap();
        let b = chsh_parameter(
            e.column(bell::ARM1_X),
            e.column(bell::ARM1_Y),
            e.column(bell::ARM2_X),
            e.column(bell::ARM2_Y),
            &ChshAngles::standard(),
        )
        .unwrap()
        .parameter;
        let want = (1.0 + g) / (1.0 + 3.0 * g) * 2.0 * SQRT_2;
        pass &= within(&b, want);
        if g == 0.01 {
            pass &= b.value > 2.7;
        }
        if g == 0.26120 {
            pass &= (b.value - 2.0).abs() <= 0.02;
        }
        if g == 10.0 {
            pass &= b.value < 1.05;
        }
        detail.push(format!("B({g}) {} vs {want:.4}", fmt(&b)));
    }
    Outcome { id: 5, name: "CHSH gain law", pass, detail: format!("{}; threshold G {threshold:.5}", detail.join(", ")) }
}

fn positivity() -> Outcome {
    let e = bell_ensemble(DEFAULT_SEED, MEGA, &gain(1.0)).unwrap();
    let (x, y) = (e.column(bell::ARM1_X), e.column(bell::ARM1_Y));
    let angle = FRAC_PI_8;
    let c = port_contrast(&port(x, y, angle), &port(x, y, angle + std::f64::consts::FRAC_PI_2)).unwrap();
    let pass = c.raw_within_bound == 1.0 && c.subtracted_beyond_bound > 0.0;
    Outcome {
        id: 6,
        name: "positivity",
        pass,
        detail: format!(
            "raw within bound {:.6}, vacuum-subtracted beyond bound {:.4}",
            c.raw_within_bound, c.subtracted_beyond_bound
        ),
    }
}

fn fourfold() -> Outcome {
    let e = twin_beam_ensemble(DEFAULT_SEED, 10 * MEGA, &gain(1.0), &DetectorParams::ideal()).unwrap();
    let (s, i) = (e.column(twin::SIGNAL), e.column(twin::IDLER));
    let est = fourfold_covariance(s, s, i, i).unwrap();
    drop(e);
    let want = fourfold_terms(&PairMoments::coincident(&gain(1.0))).total().re;
    let mut pass = within(&est.direct, want) && est.consistency_se().abs() < K_SE;
    let bunching = |g: f64| {
        let e = twin_beam_ensemble(DEFAULT_SEED, MEGA, &gain(g), &DetectorParams::ideal()).unwrap();
        let (s, i) = (e.column(twin::SIGNAL), e.column(twin::IDLER));
        fourfold_covariance(s, s, i, i).unwrap().bunching.value
    };
    let ratio = bunching(10.0) / bunching(5.0);
    let target = (10.5f64 / 5.5).powi(4);
    pass &= (ratio / target - 1.0).abs() <= 0.10;
    Outcome {
        id: 7,
        name: "four-fold covariance",
        pass,
        detail: format!(
            "direct {} vs {want}, pairing route {:+.2} se; bunching ratio {ratio:.3} vs {target:.3}",
            fmt(&est.direct),
            est.consistency_se()
        ),
    }
}

fn multimode_hom() -> Outcome {
    let started = Instant::now();
    let gains = [0.01, 0.1, 1.0, 10.0];
    let curves: Vec<_> = gains
        .iter()
        .map(|&ppp| run_hom2d(&Hom2dConfig { photons_per_pixel: ppp, reps: 100, ..Hom2dConfig::default() }).unwrap())
        .collect();
    let elapsed = started.elapsed().as_secs_f64();
    let centre = |c: &spdc_wigner::multimode::DipCurve| {
        let k = c.thetas.iter().enumerate().min_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap().0;
        c.amplitudes[k]
    };
    let wing_se = |c: &spdc_wigner::multimode::DipCurve| {
        let edge = c.thetas.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let w: Vec<f64> =
            c.thetas.iter().zip(&c.std_errors).filter(|(t, _)| t.abs() >= 0.75 * edge).map(|(_, se)| *se).collect();
        w.iter().sum::<f64>() / w.len() as f64
    };
    let centres: Vec<f64> = curves.iter().map(centre).collect();
    let a = centres.iter().all(|v| v.abs() <= 0.05);
    let sigmas: Vec<Option<f64>> = curves.iter().map(|c| c.sigma_theta).collect();
    let b = match sigmas.iter().copied().collect::<Option<Vec<f64>>>() {
        Some(s) => s.windows(2).all(|w| w[1] >= w[0]) && s[3] / s[0] < 3.0,
        None => false,
    };
    let c = wing_se(&curves[0]) > wing_se(&curves[3]);
    let pass = a && b && c && elapsed < 600.0;
    let show = |s: &Option<f64>| s.map_or("none".to_string(), |v| format!("{:.4}", v * 1e3));
    Outcome {
        id: 8,
        name: "multimode HOM",
        pass,
        detail: format!(
            "(a) {} centre {:.3?}; (b) {} widths [mrad] {}; (c) {} wing se {:.3} vs {:.3}; {elapsed:.1} s",
            if a { "ok" } else { "fail" },
            centres,
            if b { "ok" } else { "fail" },
            sigmas.iter().map(show).collect::<Vec<_>>().join(" "),
            if c { "ok" } else { "fail" },
            wing_se(&curves[0]),
            wing_se(&curves[3])
        ),
    }
}

fn snr_scaling() -> Outcome {
    let snr = |g: f64| {
        let e = twin_beam_ensemble(DEFAULT_SEED, MEGA, &gain(g), &DetectorParams::ideal()).unwrap();
        single_shot_snr(e.column(twin::SIGNAL)).unwrap()
    };
    let (high, low) = (snr(10.0), snr(0.01));
    let high_ok = (high - 1.0).abs() <= 0.10;
    let low_ratio = low / 0.01;
    let low_ok = (1.0 / 1.5..=1.5).contains(&low_ratio);
    let ensemble = |reps: usize| {
        let e = twin_beam_ensemble(DEFAULT_SEED, reps, &gain(1.0), &DetectorParams::ideal()).unwrap();
        let m = mean_intensity(e.column(twin::SIGNAL)).unwrap();
        m.value / m.std_error
    };
    let growth = ensemble(4000) / ensemble(1000);
    let growth_ok = (growth / 2.0 - 1.0).abs() <= 0.20;
    Outcome {
        id: 9,
        name: "SNR scaling",
        pass: high_ok && low_ok && growth_ok,
        detail: format!(
            "S^2=10: {high:.4} ({}); S^2=0.01: {low:.5} = {low_ratio:.3} S^2 ({}); R 1e3 -> 4e3 growth {growth:.3} ({})",
            if high_ok { "ok" } else { "fail" },
            if low_ok { "ok" } else { "fail" },
            if growth_ok { "ok" } else { "fail" }
        ),
    }
}

fn gaussian_moment_theorem() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut check = |a: &[ComplexAmplitude], b: &[ComplexAmplitude]| {
        worst = worst.max(gaussian_moment_check(a, b).unwrap().abs());
    };
    for eta in [1.0, 0.5] {
        let e = twin_beam_ensemble(DEFAULT_SEED, MEGA, &gain(1.0), &DetectorParams::new(eta).unwrap()).unwrap();
        check(e.column(twin::SIGNAL), e.column(twin::IDLER));
    }
    for g in [0.01, 1.0, 10.0] {
        let e = hom_ensemble(DEFAULT_SEED, MEGA, &gain(g), &BeamSplitter::balanced()).unwrap();
        check(e.column(hom::SIGNAL), e.column(hom::IDLER));
        check(e.column(hom::OUT1), e.column(hom::OUT2));
        check(e.column(hom::SIGNAL), e.column(hom::OUT1));
    }
    let e = bell_ensemble(DEFAULT_SEED, MEGA, &gain(0.26120)).unwrap();
    let (x1, y1, x2, y2) =
        (e.column(bell::ARM1_X), e.column(bell::ARM1_Y), e.column(bell::ARM2_X), e.column(bell::ARM2_Y));
    for (t1, t2) in ChshAngles::standard().settings() {
        check(&port(x1, y1, t1), &port(x2, y2, t2));
    }
    check(x1, y2);
    Outcome {
        id: 10,
        name: "Gaussian moment theorem",
        pass: worst < K_SE,
        detail: format!("max |residual| {worst:.2} se over twin, lossy twin, HOM and Bell pairs"),
    }
}

fn reproducibility() -> Outcome {
    let settings = Settings { mean_photons: Some(1.0), reps: Some(200_000), ..Settings::default() };
    let first = run_twin(&settings).unwrap().to_csv();
    let again = run_twin(&settings).unwrap().to_csv();
    let pooled = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let report = run_hom(&settings).unwrap();
            let cfg = Hom2dConfig { reps: 20, ..Hom2dConfig::default() };
            let curve = run_hom2d(&cfg).unwrap();
            (report.rows, curve.amplitudes, curve.std_errors)
        })
    };
    let same_seed = first == again;
    let thread_free = pooled(1) == pooled(8);
    Outcome {
        id: 11,
        name: "reproducibility",
        pass: same_seed && thread_free,
        detail: format!("same seed identical: {same_seed}; 1 vs 8 threads identical: {thread_free}"),
    }
}

fn main() {
    let criteria: [fn() -> Outcome; 11] = [
        twin_moments,
        detector_efficiency,
        hom_null,
        bell_correlation_law,
        chsh_gain_law,
        positivity,
        fourfold,
        multimode_hom,
        snr_scaling,
        gaussian_moment_theorem,
        reproducibility,
    ];
    let mut unexpected = Vec::new();
    for run in criteria {
        let o = run();
        let known = KNOWN_FAILURES.iter().find(|(id, _)| *id == o.id);
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {:>2} {}: {}", o.id, o.name, o.detail);
        match (o.pass, known) {
            (false, Some((_, why))) => println!("     known failure: {why}"),
            (false, None) => unexpected.push(o.id),
            (true, Some(_)) => println!("     listed as a known failure but passed"),
            (true, None) => {}
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
