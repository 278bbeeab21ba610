use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use quantest::core::{DispersionRule, Error, KernelKind, QuantileSpec, TestConfig};
use quantest::inference::median_test;
use quantest::io::{
    parse_grouped_file, parse_sample_files, power_csv, power_svg, write_atomic, RunReport,
};
use quantest::montecarlo::{power_curve, Family, PowerConfig};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "quantest", about = "k-sample test for equality of medians and quantiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the quantile-equality test on CSV samples.
    Test(TestArgs),
    /// Run a Monte Carlo power study and write a power-curve CSV.
    Power(PowerArgs),
}

#[derive(Args)]
struct TestArgs {
    /// One single-column CSV per group; argument order fixes the
    /// contrast order.
    #[arg(long, num_args = 1.., conflicts_with = "grouped")]
    input: Vec<PathBuf>,
    /// One CSV with columns (group,value); groups ordered by first
    /// appearance.
    #[arg(long)]
    grouped: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    quantile: f64,
    #[arg(long, value_enum, default_value_t = KernelArg::Gaussian)]
    kernel: KernelArg,
    #[arg(long, default_value_t = 1.0)]
    bandwidth_const: f64,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Normal)]
    family: FamilyArg,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Shift grid as start:stop:step (stop inclusive).
    #[arg(long, default_value = "0:0.5:0.025")]
    deltas: String,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (written atomically).
    #[arg(long)]
    out: PathBuf,
    /// Optional SVG plot path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Gaussian,
    Epanechnikov,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Normal,
    Cauchy,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::TooFewGroups(_)
        | Error::TooFewObservations { .. }
        | Error::NonFiniteValue { .. }
        | Error::FileNotFound(_)
        | Error::Parse { .. }
        | Error::InvalidConfig(_)
        | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

fn parse_delta_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = |m: &str| Error::InvalidConfig(format!("bad --deltas '{spec}': {m}"));
    if parts.len() != 3 {
        return Err(bad("expected start:stop:step"));
    }
    let start: f64 = parts[0].parse().map_err(|_| bad("start is not a number"))?;
    let stop: f64 = parts[1].parse().map_err(|_| bad("stop is not a number"))?;
    let step: f64 = parts[2].parse().map_err(|_| bad("step is not a number"))?;
    if !(step > 0.0) {
        return Err(bad("step must be positive"));
    }
    if stop < start {
        return Err(bad("stop must be >= start"));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

fn init_thread_pool() -> Result<(), Error> {
    if let Ok(raw) = std::env::var("QUANTEST_THREADS") {
        let threads: usize = raw
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("QUANTEST_THREADS must be a count, got '{raw}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    Ok(())
}

fn run_test(args: &TestArgs) -> Result<(), Error> {
    let config = TestConfig {
        quantile: QuantileSpec::new(args.quantile)?,
        alpha: args.alpha,
        kernel: match args.kernel {
            KernelArg::Gaussian => KernelKind::Gaussian,
            KernelArg::Epanechnikov => KernelKind::Epanechnikov,
        },
        bandwidth_const: args.bandwidth_const,
        dispersion_rule: DispersionRule::Robust,
    };
    config.validate()?;

    let samples = if let Some(grouped) = &args.grouped {
        parse_grouped_file(grouped)?
    } else if !args.input.is_empty() {
        parse_sample_files(&args.input)?
    } else {
        return Err(Error::InvalidConfig(
            "one of --input or --grouped is required".into(),
        ));
    };

    let outcome = median_test(&samples, &config)?;
    let report = RunReport::new(&config, &samples, &outcome, Vec::new());
    match args.format {
        FormatArg::Json => println!("{}", report.to_json()),
        FormatArg::Text => {
            println!("T = {:.6}  df = {}  p-value = {:.6}", report.statistic, report.df, report.p_value);
            println!("decision: {}", if report.reject { "reject H0" } else { "fail to reject H0" });
            println!("{:<16} {:>8} {:>12} {:>12} {:>14}", "group", "n", "median", "bandwidth", "f_hat(median)");
            for g in &report.groups {
                println!(
                    "{:<16} {:>8} {:>12.6} {:>12.6} {:>14.6}",
                    g.label, g.n, g.median, g.bandwidth, g.density_at_median
                );
            }
        }
    }
    Ok(())
}

fn run_power(args: &PowerArgs) -> Result<(), Error> {
    let config = PowerConfig {
        family: match args.family {
            FamilyArg::Normal => Family::Normal,
            FamilyArg::Cauchy => Family::Cauchy,
        },
        k: args.k,
        n: args.n,
        deltas: parse_delta_grid(&args.deltas)?,
        reps: args.reps,
        alpha: args.alpha,
        seed: args.seed,
    };
    config.validate()?;
    let points = power_curve(&config)?;
    write_atomic(&args.out, &power_csv(&points))?;
    if let Some(svg_path) = &args.svg {
        write_atomic(svg_path, &power_svg(&points, config.alpha))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_thread_pool() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match &cli.command {
        Command::Test(args) => run_test(args),
        Command::Power(args) => run_power(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
