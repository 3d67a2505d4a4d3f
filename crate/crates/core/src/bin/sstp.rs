use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use sstp::config::{RunConfig, SchemeKind};
use sstp::engine::{Engine, HopStats};
use sstp::oracle::enumerate_dyson;
use sstp::output::{default_output_dir, run_experiment, ExperimentOptions};
use sstp::rng::{stream, Purpose};
use sstp::{Error, SurfacePair};

#[derive(Parser)]
#[command(name = "sstp", version, about = "SSTP surface hopping for the spin-boson model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble and write CSV + metadata.
    Run(RunArgs),
    /// Compare the stochastic engine against exact branch enumeration.
    Oracle(OracleArgs),
    /// Print the resolved configuration.
    Config(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Built-in parameter set (fig1, fig2, uncoupled, oracle-small).
    #[arg(long)]
    preset: Option<String>,
    /// Key-value config file, applied after the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set n_traj=2000`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.preset {
            Some(p) => RunConfig::preset(p)?,
            None => RunConfig::default(),
        };
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for o in &self.overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| Error::MalformedLine {
                line: 0,
                text: o.clone(),
            })?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory (default: $SSTP_OUTPUT_DIR or ./sstp-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run primitive and energy-conserving sampling on the same draws.
    #[arg(long)]
    compare: bool,
    /// With --compare, stop the primitive run at this time.
    #[arg(long)]
    primitive_t_max: Option<f64>,
    /// Dump every accepted transition.
    #[arg(long)]
    hop_log: bool,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Trajectory index whose bath draw is used as the fixed start.
    #[arg(long, default_value_t = 0)]
    start_index: u64,
    #[arg(long)]
    threads: Option<usize>,
}

fn init_threads(n: Option<usize>) {
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run(args: RunArgs) -> Result<(), Error> {
    init_threads(args.threads);
    let cfg = args.config.resolve()?;
    let dir = args.out.unwrap_or_else(default_output_dir);
    let opts = ExperimentOptions {
        compare: args.compare,
        hop_log: args.hop_log,
        primitive_t_max: args.primitive_t_max,
    };
    let result = run_experiment(&cfg, &dir, &opts);
    match &result {
        Ok(out) => {
            for r in &out.metadata.runs {
                println!(
                    "{}: {} trajectories ({} used, {} over cap), {} hops accepted, {:.1}s -> {}",
                    r.scheme,
                    r.n_traj,
                    r.n_used,
                    r.n_over_cap,
                    r.hop_stats.accepted,
                    r.wall_time_s,
                    dir.join(&r.csv).display()
                );
            }
        }
        Err(Error::NumericFailure(n)) => {
            eprintln!(
                "{n} trajectories produced non-finite weights; see {}",
                dir.join("metadata.json").display()
            );
        }
        Err(_) => {}
    }
    result.map(|_| ())
}

fn oracle(args: OracleArgs) -> Result<(), Error> {
    init_threads(args.threads);
    let cfg = args.config.resolve()?;
    let base = Engine::new(&cfg)?;
    let (x0, _) = base.initial_conditions(args.start_index);
    let n_steps = base.n_steps();
    println!("start: R = {:?}, P = {:?}", x0.positions, x0.momenta);
    println!("scheme             pair  exact                     monte carlo               |diff|/se");

    let mut worst: f64 = 0.0;
    for kind in [SchemeKind::Primitive, SchemeKind::EnergyConserving] {
        let engine = Engine::new(&cfg.with_scheme(kind))?;
        for pair in SurfacePair::ALL {
            let exact = enumerate_dyson(&x0, pair, n_steps, cfg.tau, engine.model(), engine.scheme())?;
            let (mean, se) = monte_carlo(&engine, &x0, pair, cfg.n_traj, cfg.seed);
            // With every hop filtered the samples are identical; the only
            // deviation left is the rounding of the sum.
            let floor = cfg.n_traj as f64 * f64::EPSILON * exact.value.norm().max(1e-300);
            let diff = mean - exact.value;
            let z = (diff.re.abs() / se.re.max(floor)).max(diff.im.abs() / se.im.max(floor));
            worst = worst.max(z);
            println!(
                "{:<18} {}  {:+.6e}{:+.6e}i  {:+.6e}{:+.6e}i  {:.2}",
                kind.name(),
                pair,
                exact.value.re,
                exact.value.im,
                mean.re,
                mean.im,
                z
            );
        }
    }
    println!("largest deviation: {worst:.2} standard errors");
    Ok(())
}

/// Mean and per-component standard error of `n` engine samples from a
/// fixed start.
fn monte_carlo(
    engine: &Engine,
    x0: &sstp::PhasePoint,
    pair: SurfacePair,
    n: usize,
    seed: u64,
) -> (Complex64, Complex64) {
    let samples: Vec<Complex64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i, Purpose::Hops(pair.slot() as u8));
            engine.sample_from(x0, pair, &mut rng, &mut HopStats::default())
        })
        .collect();
    let nf = n as f64;
    let mean = samples.iter().sum::<Complex64>() / nf;
    let var_re = samples.iter().map(|s| (s.re - mean.re).powi(2)).sum::<f64>() / (nf - 1.0);
    let var_im = samples.iter().map(|s| (s.im - mean.im).powi(2)).sum::<f64>() / (nf - 1.0);
    (mean, Complex64::new((var_re / nf).sqrt(), (var_im / nf).sqrt()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Oracle(a) => oracle(a),
        Command::Config(a) => a.resolve().map(|c| print!("{}", c.to_kv_string())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, Error::NumericFailure(_)) {
                eprintln!("error: {e}");
            }
            ExitCode::FAILURE
        }
    }
}
