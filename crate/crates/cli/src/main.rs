use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use qbench::sweep::run_sweep;
use qbench_cli::config::{resolve_sweep, ConfigFile, SweepOverrides};
use qbench_cli::plot::{load_series, render_svg, PlotSpec};
use qbench_cli::{amplitudes, output, validate, CliError, EXIT_FAILURE, EXIT_OK};

/// Noisy two-qubit simulation of the joint Peres/Sorkin interference tests.
#[derive(Debug, Parser)]
#[command(name = "qbench", version)]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, env = "QBENCH_SEED")]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path (CSV for sweep, SVG for plot).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML experiment file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the joint test over a noise grid and write a CSV.
    Sweep(SweepArgs),
    /// Evaluate the n-path interference residual for a list of amplitudes.
    KappaN(KappaNArgs),
    /// Run the fast invariant suite.
    Validate(ValidateArgs),
    /// Scatter-plot a sweep CSV as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// readout, depolarizing, thermal or readout-depolarizing
    #[arg(long)]
    noise: Option<String>,
    /// Grid points per axis.
    #[arg(long)]
    steps: Option<usize>,
    /// T2 / T1 on the thermal axis.
    #[arg(long)]
    t2_ratio: Option<f64>,
    /// random, specific or explicit (explicit states come from the config)
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    n_states: Option<usize>,
    /// exact or shots
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    ci_level: Option<f64>,
    /// Bootstrap resamples per confidence interval.
    #[arg(long)]
    resamples: Option<usize>,
}

#[derive(Debug, Args)]
struct KappaNArgs {
    /// Amplitudes as re,im pairs.
    #[arg(allow_hyphen_values = true)]
    amplitudes: Vec<String>,
    /// Read amplitudes from a file (whitespace separated, # comments).
    #[arg(long, conflicts_with = "amplitudes")]
    file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, hide = true, default_value_t = 3.0)]
    kappa_triple_weight: f64,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Sweep CSV to plot.
    csv: PathBuf,
    /// Column on the x axis.
    #[arg(long, default_value = "p_readout")]
    x: String,
    /// kappa or f (any numeric column works).
    #[arg(long, default_value = "kappa")]
    y: String,
    /// Logarithmic x axis; on by default for the *_ns columns.
    #[arg(long)]
    log_x: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    if let Some(n) = cli.threads.or(file.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let out = cli.out.clone().or_else(|| file.out.clone());
    match cli.command {
        Command::Sweep(args) => sweep(&file, args, seed, out),
        Command::KappaN(args) => kappa_n(args),
        Command::Validate(args) => {
            let opts = validate::ValidateOptions {
                seed,
                kappa_triple_weight: args.kappa_triple_weight,
                config: cli.config.is_some().then_some(file),
            };
            let checks = validate::run(&opts);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            if failed.is_empty() {
                Ok(EXIT_OK)
            } else {
                eprintln!("failed checks: {}", failed.join(", "));
                Ok(EXIT_FAILURE)
            }
        }
        Command::Plot(args) => plot(args, out),
    }
}

fn sweep(file: &ConfigFile, args: SweepArgs, seed: u64, out: Option<PathBuf>) -> Result<i32, CliError> {
    let flags = SweepOverrides {
        noise: args.noise,
        steps: args.steps,
        t2_ratio: args.t2_ratio,
        state: args.state,
        n_states: args.n_states,
        mode: args.mode,
        shots: args.shots,
        repeats: args.repeats,
        ci_level: args.ci_level,
        resamples: args.resamples,
    };
    let cfg = resolve_sweep(file, &flags, seed)?;
    let out = out.unwrap_or_else(|| PathBuf::from(format!("sweep_{}.csv", cfg.axis)));
    let start = Instant::now();
    let records = run_sweep(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    output::write_atomic(&out, &output::to_csv(&records)?)?;
    let undefined = records.iter().filter(|r| r.gamma_undefined).count();
    println!(
        "{} records ({} gamma-undefined) written to {} in {:.2} s",
        records.len(),
        undefined,
        out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(EXIT_OK)
}

fn kappa_n(args: KappaNArgs) -> Result<i32, CliError> {
    let x = match &args.file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            amplitudes::parse_list(&text)?
        }
        None => args.amplitudes.iter().map(|s| amplitudes::parse_amplitude(s)).collect::<Result<_, _>>()?,
    };
    if x.is_empty() {
        return Err(CliError::Usage("no amplitudes given".into()));
    }
    let r = amplitudes::report(&x);
    println!("n = {}", r.n);
    println!("|sum x_i|^2 = {}", output::format_g(r.lhs));
    println!("sum_{{i<j}} |x_i + x_j|^2 - (n - 2) sum |x_i|^2 = {}", output::format_g(r.rhs));
    println!("lhs - rhs = {:e}", r.lhs - r.rhs);
    println!("kappa_n = {:e}", r.kappa_n);
    println!("kappa_n (symmetric form) = {:e}", r.kappa_n_symmetric);
    Ok(EXIT_OK)
}

fn plot(args: PlotArgs, out: Option<PathBuf>) -> Result<i32, CliError> {
    let bytes =
        std::fs::read(&args.csv).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.csv.display())))?;
    let spec = PlotSpec { log_x: args.log_x || args.x.ends_with("_ns"), ..PlotSpec::new(&args.x, &args.y) };
    let series = load_series(&bytes, &spec)?;
    let out = out.unwrap_or_else(|| args.csv.with_extension("svg"));
    output::write_atomic(&out, render_svg(&series, &spec).as_bytes())?;
    println!("{} series plotted to {}", series.len(), out.display());
    Ok(EXIT_OK)
}
