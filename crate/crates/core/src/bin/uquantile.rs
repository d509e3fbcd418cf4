use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use uquantile::asymptotics::{
    oracle_constants, oracle_hl, oracle_interpoint, oracle_mwise_mean, AsymptoticConfig, InterpointBudget,
    DEFAULT_SEED,
};
use uquantile::distributions::DistributionSpec;
use uquantile::engine::{Backend, QuantileSpec};
use uquantile::montecarlo::run;
use uquantile::report::{estimate_report, to_canonical_json, values_csv};
use uquantile::scenario::parse_scenario;
use uquantile::{Error, KernelSpec, Norm, Sample};

const EXIT_INPUT: u8 = 2;
const EXIT_HYPOTHESIS: u8 = 3;

#[derive(Parser)]
#[command(name = "uquantile", version, about = "Quantiles of kernel values over all m-subsets of a sample")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point estimate, plug-in constants and confidence interval for a CSV sample.
    Estimate {
        /// CSV file, one point per line; `-` reads standard input.
        #[arg(long)]
        file: PathBuf,
        /// walsh, mean:<m> or dist:<euclidean|manhattan|chebyshev>
        #[arg(long, default_value = "walsh")]
        kernel: KernelSpec,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, default_value = "auto")]
        backend: Backend,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Kernel density bandwidth; Silverman's rule when omitted.
        #[arg(long)]
        bandwidth: Option<f64>,
    },
    /// Runs a Monte Carlo scenario file and writes JSON and CSV reports.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Worker threads; 0 uses every available core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Output directory for `<name>.json` and `<name>.csv`.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Prints population constants for a built-in example.
    Oracle {
        name: OracleName,
        /// Distribution; defaults to normal, or the unit square for interpoint.
        #[arg(long)]
        dist: Option<DistributionSpec>,
        /// Radius for the interpoint ball constants; the p-quantile when omitted.
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value = "euclidean")]
        norm: Norm,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleName {
    Hl,
    MwiseMean,
    Interpoint,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Estimate { file, kernel, p, level, backend, seed, bandwidth } => {
            estimate(&file, &kernel, p, level, backend, seed, bandwidth)
        }
        Command::Simulate { scenario, workers, out } => simulate(&scenario, workers, &out),
        Command::Oracle { name, dist, theta, m, p, norm, seed } => oracle(name, dist, theta, m, p, norm, seed),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Hypothesis { .. } => EXIT_HYPOTHESIS,
                _ => EXIT_INPUT,
            })
        }
    }
}

fn read_input(path: &Path) -> Result<String, Error> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Error> {
    print!("{}", to_canonical_json(value)?);
    Ok(())
}

fn estimate(
    file: &Path,
    kernel: &KernelSpec,
    p: f64,
    level: f64,
    backend: Backend,
    seed: u64,
    bandwidth: Option<f64>,
) -> Result<ExitCode, Error> {
    let sample = Sample::from_csv(&read_input(file)?).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", file.display()),
        },
        e => e,
    })?;
    let cfg = AsymptoticConfig {
        backend,
        bandwidth,
        seed,
        ..AsymptoticConfig::default()
    };
    let (report, violation) = estimate_report(&sample, kernel, QuantileSpec::new(p)?, level, &cfg)?;
    print_json(&report)?;
    Ok(match violation {
        None => ExitCode::SUCCESS,
        Some(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_HYPOTHESIS)
        }
    })
}

fn simulate(path: &Path, workers: usize, out: &Path) -> Result<ExitCode, Error> {
    let spec = parse_scenario(&read_input(path)?)?;
    let report = run(&spec, workers)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .unwrap_or("scenario");
    std::fs::create_dir_all(out)?;
    let json_path = out.join(format!("{stem}.json"));
    let csv_path = out.join(format!("{stem}.csv"));
    std::fs::write(&json_path, to_canonical_json(&report)?)?;
    std::fs::write(&csv_path, values_csv(&report.standardized_values))?;
    let coverage = match &report.plugin_coverage {
        Some(c) => c.coverage,
        None => report.coverage,
    };
    println!(
        "ks_distance={:.4} ks_critical={:.4} empirical_variance={:.4} target_variance={} coverage={:.4} json={} csv={}",
        report.ks_distance,
        report.ks_critical,
        report.empirical_variance,
        report.target_variance.map_or("none".to_string(), |v| format!("{v:.4}")),
        coverage,
        json_path.display(),
        csv_path.display(),
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct HlOutput {
    example: &'static str,
    distribution: String,
    center: f64,
    zeta: f64,
    square_integral: f64,
    density_at_center: f64,
    sigma2: f64,
}

#[derive(Serialize)]
struct ConstantsOutput {
    example: &'static str,
    distribution: String,
    kernel: String,
    p: f64,
    quantile: f64,
    quantile_se: f64,
    zeta: f64,
    zeta_se: f64,
    left_derivative: f64,
    right_derivative: f64,
    derivative_se: f64,
    sigma2: Option<f64>,
}

#[derive(Serialize)]
struct BallOutput {
    example: &'static str,
    distribution: String,
    norm: &'static str,
    theta: f64,
    ball_probability: f64,
    zeta: f64,
    zeta_se: f64,
    density_at_theta: f64,
    density_at_theta_se: f64,
}

fn oracle(
    name: OracleName,
    dist: Option<DistributionSpec>,
    theta: Option<f64>,
    m: usize,
    p: f64,
    norm: Norm,
    seed: u64,
) -> Result<ExitCode, Error> {
    let budget = InterpointBudget::default();
    match name {
        OracleName::Hl => {
            let dist = dist.unwrap_or_else(DistributionSpec::standard_normal);
            let o = oracle_hl(&dist)?;
            print_json(&HlOutput {
                example: "hl",
                distribution: dist.to_string(),
                center: o.center,
                zeta: o.zeta,
                square_integral: o.square_integral,
                density_at_center: o.density_at_center,
                sigma2: o.sigma2,
            })?;
        }
        OracleName::MwiseMean => {
            let dist = dist.unwrap_or_else(DistributionSpec::standard_normal);
            let c = oracle_mwise_mean(&dist, m, p)?;
            print_json(&constants_output("mwise-mean", &dist, &KernelSpec::Mean(m), c))?;
        }
        OracleName::Interpoint => {
            let dist = dist.unwrap_or(DistributionSpec::UnitCube { dim: 2 });
            match theta {
                Some(theta) => {
                    let o = oracle_interpoint(&dist, norm, theta, p, &budget, seed)?;
                    print_json(&BallOutput {
                        example: "interpoint",
                        distribution: dist.to_string(),
                        norm: norm.as_str(),
                        theta: o.theta,
                        ball_probability: o.ball_probability,
                        zeta: o.zeta,
                        zeta_se: o.zeta_se,
                        density_at_theta: o.f_theta,
                        density_at_theta_se: o.f_theta_se,
                    })?;
                }
                None => {
                    let kernel = KernelSpec::Distance(norm);
                    let c = oracle_constants(&dist, &kernel, p, &budget, seed)?;
                    print_json(&constants_output("interpoint", &dist, &kernel, c))?;
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn constants_output(
    example: &'static str,
    dist: &DistributionSpec,
    kernel: &KernelSpec,
    c: uquantile::asymptotics::OracleConstants,
) -> ConstantsOutput {
    ConstantsOutput {
        example,
        distribution: dist.to_string(),
        kernel: kernel.to_string(),
        p: c.p,
        quantile: c.quantile,
        quantile_se: c.quantile_se,
        zeta: c.zeta,
        zeta_se: c.zeta_se,
        left_derivative: c.left_derivative,
        right_derivative: c.right_derivative,
        derivative_se: c.derivative_se,
        sigma2: c.sigma2(),
    }
}
