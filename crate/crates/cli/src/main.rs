//! `dising` command-line front end: single-point runs, parameter sweeps,
//! exceptional-point lines, resource tables, and a mitigation demo.
//!
//! Set `DISING_WORKERS` to cap the worker-thread count.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dising::hamiltonian::FieldPattern;
use dising::mitigation::{mitigate, ConfusionSpec};
use dising::noise::NoiseModel;
use dising::simulator::{expectation_observable, post_select, run_postselected_exact, run_shots};
use dising::sweep::{
    default_n_steps, exceptional_line, exceptional_to_csv, monotonicity_warning, resources_row,
    resources_table, resources_to_csv, run_sweep, sweep_to_csv, GridSpec, SweepConfig,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PatternArg {
    All,
    Alternate,
}

impl From<PatternArg> for FieldPattern {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::All => FieldPattern::AllSites,
            PatternArg::Alternate => FieldPattern::AlternateSites,
        }
    }
}

#[derive(Parser)]
#[command(name = "dising", version, about = "Dissipative Ising chain simulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one (theta, h_x) point and print the post-selected observable.
    Evolve(EvolveArgs),
    /// Run a (theta, h_x) grid sweep and emit CSV.
    Sweep(SweepArgs),
    /// Trace the exceptional line theta*(h_x) and emit CSV.
    Exceptional(ExceptionalArgs),
    /// Print the CNOT and measurement budget per chain size.
    Resources(ResourcesArgs),
    /// Synthetic readout-mitigation pipeline on one circuit's output.
    MitigateDemo(MitigateDemoArgs),
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long, default_value_t = 2)]
    n_sites: usize,
    #[arg(long, value_enum, default_value_t = PatternArg::Alternate)]
    pattern: PatternArg,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.7)]
    h_x: f64,
    #[arg(long, default_value_t = 0.4)]
    theta: f64,
    #[arg(long, default_value_t = 0.3)]
    dt: f64,
    /// Trotter steps; defaults to the per-size hardware budget.
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Apply the demo noise model (depolarizing + readout).
    #[arg(long)]
    noise_demo: bool,
    /// Mitigate readout errors on the post-selected counts.
    #[arg(long)]
    mitigate: bool,
    #[arg(long, default_value_t = 3)]
    cutoff: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML config file; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_sites: Option<usize>,
    #[arg(long, value_enum)]
    pattern: Option<PatternArg>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    theta_min: Option<f64>,
    #[arg(long)]
    theta_max: Option<f64>,
    #[arg(long)]
    theta_count: Option<usize>,
    #[arg(long)]
    hx_min: Option<f64>,
    #[arg(long)]
    hx_max: Option<f64>,
    #[arg(long)]
    hx_count: Option<usize>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    noise_demo: bool,
    #[arg(long)]
    mitigate: bool,
    #[arg(long)]
    cutoff: Option<usize>,
    /// Output CSV path; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExceptionalArgs {
    #[arg(long, default_value_t = 2)]
    n_sites: usize,
    #[arg(long, value_enum, default_value_t = PatternArg::Alternate)]
    pattern: PatternArg,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.02)]
    hx_min: f64,
    #[arg(long, default_value_t = 2.0)]
    hx_max: f64,
    #[arg(long, default_value_t = 50)]
    hx_count: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ResourcesArgs {
    /// Chain sizes to tabulate.
    #[arg(long, num_args = 1.., default_values_t = [2usize, 4, 6])]
    n_sites: Vec<usize>,
    #[arg(long, value_enum, default_value_t = PatternArg::Alternate)]
    pattern: PatternArg,
    /// Step count for every row; defaults to the per-size budget.
    #[arg(long)]
    n_steps: Option<usize>,
    /// Emit CSV instead of the aligned table.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct MitigateDemoArgs {
    #[arg(long, default_value_t = 2)]
    n_sites: usize,
    #[arg(long, value_enum, default_value_t = PatternArg::Alternate)]
    pattern: PatternArg,
    #[arg(long, default_value_t = 0.4)]
    theta: f64,
    #[arg(long, default_value_t = 0.7)]
    h_x: f64,
    /// Symmetric readout flip probability injected on every system qubit.
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    cutoff: usize,
}

fn init_workers() -> Result<()> {
    if let Ok(raw) = std::env::var("DISING_WORKERS") {
        let n: usize = raw
            .parse()
            .with_context(|| format!("DISING_WORKERS must be a positive integer, got '{raw}'"))?;
        if n == 0 {
            bail!("DISING_WORKERS must be >= 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("failed to initialize worker pool")?;
    }
    Ok(())
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_evolve(args: EvolveArgs) -> Result<()> {
    let spec = dising::hamiltonian::HamiltonianSpec::new(
        args.lambda,
        args.h_x,
        args.theta,
        args.n_sites,
        args.pattern.into(),
    )?;
    let n_steps = args.n_steps.unwrap_or_else(|| default_n_steps(args.n_sites));
    let circuit = dising::circuit::build_trotter_circuit(&spec, args.dt, n_steps)?;
    let noise = args
        .noise_demo
        .then(|| NoiseModel::demo_default(circuit.n_qubits()));
    let table = run_shots(&circuit, args.shots, args.seed, noise.as_ref())?;
    let (kept, fraction) = post_select(&table);
    let observable = expectation_observable::<f64>(&kept, args.n_sites)?;
    let (_, survival) = run_postselected_exact(&spec, args.dt, n_steps, None)?;

    println!("theta = {}, h_x = {}, N = {}, N_t = {n_steps}", args.theta, args.h_x, args.n_sites);
    println!("<O>                    = {observable:.6}");
    if args.mitigate {
        let cspec = match &noise {
            Some(noise) => ConfusionSpec::from_noise_model(noise, args.n_sites),
            None => ConfusionSpec::identity(args.n_sites),
        };
        let mitigated = mitigate(&kept, &cspec, args.cutoff)?.expectation_observable(args.n_sites);
        println!("<O> (mitigated)        = {mitigated:.6}");
    }
    println!("post-selected fraction = {fraction:.6}");
    println!("exact survival         = {survival:.6}");
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut config: SweepConfig<f64> = match &args.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let n_sites = args
                .n_sites
                .context("either --config or --n-sites is required")?;
            SweepConfig::new(
                n_sites,
                args.pattern.map_or(FieldPattern::AlternateSites, Into::into),
            )
        }
    };
    if let Some(n) = args.n_sites {
        config.n_sites = n;
    }
    if let Some(p) = args.pattern {
        config.pattern = p.into();
    }
    if let Some(v) = args.lambda {
        config.lambda = v;
    }
    if let Some(v) = args.dt {
        config.dt = v;
    }
    if let Some(v) = args.n_steps {
        config.n_steps = Some(v);
    }
    if let Some(v) = args.theta_min {
        config.theta_grid.min = v;
    }
    if let Some(v) = args.theta_max {
        config.theta_grid.max = v;
    }
    if let Some(v) = args.theta_count {
        config.theta_grid.count = v;
    }
    if let Some(v) = args.hx_min {
        config.hx_grid.min = v;
    }
    if let Some(v) = args.hx_max {
        config.hx_grid.max = v;
    }
    if let Some(v) = args.hx_count {
        config.hx_grid.count = v;
    }
    if let Some(v) = args.shots {
        config.n_shots = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if args.noise_demo {
        let n_qubits = config.n_sites + config.n_sites.div_ceil(2);
        config.noise = Some(NoiseModel::demo_default(n_qubits));
    }
    if args.mitigate {
        config.mitigate = true;
    }
    if let Some(v) = args.cutoff {
        config.hamming_cutoff = v;
    }

    let rows = run_sweep(&config)?;
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    if failures > 0 {
        eprintln!("warning: {failures} of {} grid points failed; see the error column", rows.len());
    }
    write_output(&args.output, &sweep_to_csv(&rows))
}

fn cmd_exceptional(args: ExceptionalArgs) -> Result<()> {
    let grid = GridSpec {
        min: args.hx_min,
        max: args.hx_max,
        count: args.hx_count,
    };
    let rows = exceptional_line(
        args.n_sites,
        args.pattern.into(),
        args.lambda,
        &grid,
        args.tol,
    )?;
    if let Some(warning) = monotonicity_warning(&rows) {
        eprintln!("warning: {warning}");
    }
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("warning: h_x = {}: {}", r.h_x, r.error.as_deref().unwrap());
    }
    write_output(&args.output, &exceptional_to_csv(&rows))
}

fn cmd_resources(args: ResourcesArgs) -> Result<()> {
    let rows = args
        .n_sites
        .iter()
        .map(|&n| {
            let steps = args.n_steps.unwrap_or_else(|| default_n_steps(n));
            Ok(resources_row(n, args.pattern.into(), steps)?)
        })
        .collect::<Result<Vec<_>>>()?;
    if args.csv {
        print!("{}", resources_to_csv(&rows));
    } else {
        print!("{}", resources_table(&rows));
    }
    Ok(())
}

fn cmd_mitigate_demo(args: MitigateDemoArgs) -> Result<()> {
    let spec = dising::hamiltonian::HamiltonianSpec::new(
        1.0,
        args.h_x,
        args.theta,
        args.n_sites,
        args.pattern.into(),
    )?;
    let n_steps = default_n_steps(args.n_sites);
    let circuit = dising::circuit::build_trotter_circuit(&spec, 0.3, n_steps)?;

    // Ideal shots, then the same seed rerun with readout noise only.
    let clean = run_shots(&circuit, args.shots, args.seed, None)?;
    let noise = NoiseModel::noiseless().with_uniform_readout(args.p, args.p, args.n_sites);
    let noisy = run_shots(&circuit, args.shots, args.seed, Some(&noise))?;

    let (ideal_counts, _) = post_select(&clean);
    let (noisy_counts, _) = post_select(&noisy);
    let ideal = expectation_observable::<f64>(&ideal_counts, args.n_sites)?;
    let raw = expectation_observable::<f64>(&noisy_counts, args.n_sites)?;
    let cspec = ConfusionSpec::from_noise_model(&noise, args.n_sites);
    let mitigated =
        mitigate(&noisy_counts, &cspec, args.cutoff)?.expectation_observable(args.n_sites);

    println!("readout flip probability = {}", args.p);
    println!("<O> ideal     = {ideal:.6}");
    println!("<O> corrupted = {raw:.6}  (error {:+.6})", raw - ideal);
    println!("<O> mitigated = {mitigated:.6}  (error {:+.6})", mitigated - ideal);
    Ok(())
}

fn main() -> Result<()> {
    init_workers()?;
    match Cli::parse().command {
        Command::Evolve(args) => cmd_evolve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Exceptional(args) => cmd_exceptional(args),
        Command::Resources(args) => cmd_resources(args),
        Command::MitigateDemo(args) => cmd_mitigate_demo(args),
    }
}
