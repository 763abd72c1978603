use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use friedrichs::config::{parse_config, RunConfig, Task};
use friedrichs::error::Error;
use friedrichs::pipeline::run_pipeline;

#[derive(Debug, Parser)]
#[command(
    name = "friedrichs",
    about = "Resonances of finite-dimensional Friedrichs models via certified operator roots",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate the model and report contour admissibility.
    Check(RunArgs),
    /// Solve the right and left operator roots.
    Solve(RunArgs),
    /// Extract and classify resonances.
    Resonances(RunArgs),
    /// Run the full verification battery.
    Verify(RunArgs),
    /// Scan a grid of coupling scales.
    Sweep(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    /// Write the report only.
    Json,
    /// Additionally write plot CSVs next to the report.
    Csv,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Path to a JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Existing directory to write report.json (and CSVs) into; the report
    /// always goes to stdout too.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Override the quadrature order per panel.
    #[arg(long)]
    nodes: Option<usize>,
    /// Override the solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Keep going on contours that fail the contraction hypothesis.
    #[arg(long)]
    force: bool,
}

impl Command {
    fn task(&self) -> Task {
        match self {
            Command::Check(_) => Task::Check,
            Command::Solve(_) => Task::Solve,
            Command::Resonances(_) => Task::Resonances,
            Command::Verify(_) => Task::Verify,
            Command::Sweep(_) => Task::Sweep,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Check(a)
            | Command::Solve(a)
            | Command::Resonances(a)
            | Command::Verify(a)
            | Command::Sweep(a) => a,
        }
    }
}

fn load_config(args: &RunArgs, task: Task) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut config = parse_config(&text)?;
    config.tasks = vec![task];
    if let Some(order) = args.nodes {
        config.quadrature.order = order;
    }
    if let Some(tol) = args.tol {
        config.solver.tol = tol;
    }
    if args.force {
        config.solver.force = true;
    }
    config.validate()?;
    Ok(config)
}

fn write_outputs(
    args: &RunArgs,
    outcome: &friedrichs::pipeline::PipelineOutcome,
    json: &str,
) -> Result<(), Error> {
    if let Some(out) = &args.out {
        let path = out.join("report.json");
        std::fs::write(&path, json)?;
        eprintln!("wrote {}", path.display());
    }
    let csv_dir: Option<&Path> = match args.format {
        Format::Csv => Some(args.out.as_deref().unwrap_or_else(|| Path::new("."))),
        Format::Json => None,
    };
    if let Some(dir) = csv_dir {
        for path in outcome.plot.write_csvs(dir)? {
            eprintln!("wrote {}", path.display());
        }
    } else if let Some(out) = &args.out {
        if let Some(path) = outcome.plot.write_trajectory(out)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn run() -> i32 {
    // BLAS threading adds nothing at these matrix sizes and makes
    // reductions order-dependent.
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    }
    let cli = Cli::parse();
    let args = cli.command.args();
    let config = match load_config(args, cli.command.task()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let started = Instant::now();
    let outcome = match run_pipeline(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let json = outcome.report.to_json();
    println!("{json}");
    for (stage, seconds) in &outcome.timings {
        eprintln!("{stage}: {seconds:.3}s");
    }
    eprintln!("total: {:.3}s", started.elapsed().as_secs_f64());
    if let Err(e) = write_outputs(args, &outcome, &json) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    outcome.exit_code
}

fn main() {
    std::process::exit(run());
}
