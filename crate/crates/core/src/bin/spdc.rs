//! Command-line front end for the stochastic Wigner experiments.
//!
//! Exit codes: 0 when every statistic agrees with its oracle, 1 on a
//! statistical failure, 2 on a usage or configuration error, 3 on a numeric
//! or I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spdc_wigner::experiment::{
    dip_curve_csv, dip_sidecar_json, oracle_table, parse_count, run_bell, run_fourfold, run_hom, run_hom2d_experiment,
    run_twin, RunReport, Settings, SEED_ENV,
};
use spdc_wigner::{Error, Result};

#[derive(Parser)]
#[command(name = "spdc", version, about = "Stochastic Wigner simulations of parametric down-conversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Twin-beam intensity moments behind lossy detectors.
    Twin {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gain: Gain,
        /// Detector efficiency in [0, 1].
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Two-photon interference of a single twin-beam pair on a splitter.
    Hom {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gain: Gain,
        /// Power transmittance of the splitter.
        #[arg(long)]
        transmittance: Option<f64>,
    },
    /// Polarization correlations and the CHSH combination.
    Bell {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gain: Gain,
        /// First polarizer angle in degrees.
        #[arg(long)]
        theta1: Option<f64>,
        /// Second polarizer angle in degrees.
        #[arg(long)]
        theta2: Option<f64>,
    },
    /// Multimode imaging interferometer swept over mirror tilt.
    Hom2d {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        imaging: Imaging,
    },
    /// Four-fold intensity moment against its nine pairings.
    Fourfold {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gain: Gain,
    },
    /// Closed-form predictions over a list of mean photon numbers.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Comma-separated mean photon numbers.
        #[arg(long, value_delimiter = ',')]
        g_values: Option<Vec<f64>>,
        #[arg(long)]
        eta: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Repetitions; scientific notation such as 1e6 is accepted.
    #[arg(long, value_parser = parse_reps)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread cap. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Flat TOML file of settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct Gain {
    /// Gain as gL.
    #[arg(long = "gain-gl", conflicts_with = "mean_photons")]
    gain_gl: Option<f64>,
    /// Gain as mean photon number per mode, sinh^2(gL).
    #[arg(long = "G")]
    mean_photons: Option<f64>,
}

#[derive(Args)]
struct Imaging {
    #[arg(long)]
    photons_per_pixel: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    crystal_length_mm: Option<f64>,
    #[arg(long)]
    pump_width_px: Option<f64>,
    #[arg(long)]
    pm_width_px_at_1mm: Option<f64>,
    #[arg(long)]
    pixel_angle_rad: Option<f64>,
    #[arg(long)]
    mode_floor: Option<f64>,
    /// Sweep runs over [-theta_max, theta_max] radians of tilt.
    #[arg(long)]
    theta_max_rad: Option<f64>,
    #[arg(long)]
    theta_points: Option<usize>,
    #[arg(long)]
    transmittance: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_reps(s: &str) -> std::result::Result<usize, String> {
    parse_count(s).map_err(|e| e.to_string())
}

impl Common {
    fn settings(&self) -> Settings {
        Settings { reps: self.reps, seed: self.seed, threads: self.threads, ..Settings::default() }
    }
}

impl Gain {
    fn apply(&self, s: &mut Settings) {
        s.gain_gl = self.gain_gl;
        s.mean_photons = self.mean_photons;
    }
}

/// What a subcommand produced.
enum Outcome {
    Report(Box<RunReport>),
    Files { passed: bool, body: String, sidecar: Option<String> },
}

fn write_output(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(Error::from),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn execute(command: &Command, settings: &Settings, format: Format) -> Result<Outcome> {
    match command {
        Command::Twin { .. } => Ok(Outcome::Report(Box::new(run_twin(settings)?))),
        Command::Hom { .. } => Ok(Outcome::Report(Box::new(run_hom(settings)?))),
        Command::Bell { .. } => Ok(Outcome::Report(Box::new(run_bell(settings)?))),
        Command::Fourfold { .. } => Ok(Outcome::Report(Box::new(run_fourfold(settings)?))),
        Command::Hom2d { .. } => {
            let run = run_hom2d_experiment(settings)?;
            let sidecar = dip_sidecar_json(&run.curve, &run.expected, &run.config, &run.report.metadata)?;
            let passed = run.report.passed();
            Ok(match format {
                Format::Csv => Outcome::Files { passed, body: dip_curve_csv(&run.curve), sidecar: Some(sidecar) },
                Format::Json => Outcome::Files { passed, body: run.report.to_json()? + "\n", sidecar: Some(sidecar) },
            })
        }
        Command::Oracle { .. } => {
            let table = oracle_table(settings)?;
            let body = match format {
                Format::Csv => table.to_csv(),
                Format::Json => serde_json::to_string_pretty(&table.rows)? + "\n",
            };
            Ok(Outcome::Files { passed: true, body, sidecar: None })
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let (common, flags) = match &cli.command {
        Command::Twin { common, gain, eta } => {
            let mut s = common.settings();
            gain.apply(&mut s);
            s.eta = *eta;
            (common, s)
        }
        Command::Hom { common, gain, transmittance } => {
            let mut s = common.settings();
            gain.apply(&mut s);
            s.transmittance = *transmittance;
            (common, s)
        }
        Command::Bell { common, gain, theta1, theta2 } => {
            let mut s = common.settings();
            gain.apply(&mut s);
            s.theta1_deg = *theta1;
            s.theta2_deg = *theta2;
            (common, s)
        }
        Command::Fourfold { common, gain } => {
            let mut s = common.settings();
            gain.apply(&mut s);
            (common, s)
        }
        Command::Hom2d { common, imaging: m } => {
            let s = Settings {
                photons_per_pixel: m.photons_per_pixel,
                grid: m.grid,
                crystal_length_mm: m.crystal_length_mm,
                pump_width_px: m.pump_width_px,
                pm_width_px_at_1mm: m.pm_width_px_at_1mm,
                pixel_angle_rad: m.pixel_angle_rad,
                mode_floor: m.mode_floor,
                theta_max_rad: m.theta_max_rad,
                theta_points: m.theta_points,
                transmittance: m.transmittance,
                ..common.settings()
            };
            (common, s)
        }
        Command::Oracle { common, g_values, eta } => {
            let s = Settings { g_values: g_values.clone(), eta: *eta, ..common.settings() };
            (common, s)
        }
    };
    let file = common.config.as_deref().map(Settings::load).transpose()?;
    let env_seed = std::env::var(SEED_ENV).ok();
    let settings = Settings::resolve(&flags, file.as_ref(), env_seed.as_deref())?;

    let outcome = match settings.threads {
        Some(0) => return Err(Error::Config("threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}")))?
            .install(|| execute(&cli.command, &settings, common.format))?,
        None => execute(&cli.command, &settings, common.format)?,
    };

    let out = common.out.as_deref();
    match outcome {
        Outcome::Report(report) => {
            let body = match common.format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json()? + "\n",
            };
            write_output(out, &body)?;
            for row in report.rows.iter().filter(|r| !r.pass) {
                eprintln!("{}: {} vs oracle {} ({:+.2} se)", row.statistic, row.mc_value, row.oracle, row.deviation_se);
            }
            Ok(report.passed())
        }
        Outcome::Files { passed, body, sidecar } => {
            write_output(out, &body)?;
            if let (Some(path), Some(json)) = (out, sidecar) {
                std::fs::write(sidecar_path(path), json + "\n")?;
            }
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("spdc: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
