use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fpplab::{run, sweep, ExpError, ExperimentConfig, Kind, Overrides};
use serde_json::json;

#[derive(Parser)]
#[command(name = "fpplab", version, about = "First-passage percolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory; defaults to $FPPLAB_OUT/<kind>-<hash>.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, trials: self.trials, out: self.out.clone(), threads: self.threads }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Empirical limit shape and flat-edge check.
    Shape(RunArgs),
    /// Nested distribution construction.
    Construct(RunArgs),
    /// Oriented percolation edge speed and critical point.
    Oriented(RunArgs),
    /// Competing growth from several seeds.
    Compete(RunArgs),
    /// Ends of the infection tree.
    Ends(RunArgs),
    /// Busemann separation from lines.
    Busemann(RunArgs),
    /// Disjointness diagnostics for geodesics.
    Diagnose(RunArgs),
    /// Runs several configs of one kind and merges their main tables.
    Sweep {
        /// Config files, all of the same kind.
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Directory for per-config outputs and `sweep.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn validate(o: &Overrides) -> Result<(), ExpError> {
    if o.trials == Some(0) {
        return Err(ExpError::Config("--trials must be positive".into()));
    }
    if o.threads == Some(0) {
        return Err(ExpError::Config("--threads must be positive".into()));
    }
    Ok(())
}

fn single(kind: Kind, args: RunArgs) -> Result<(), ExpError> {
    let o = args.overrides();
    validate(&o)?;
    let cfg = ExperimentConfig::load(&args.config, Some(kind))?.apply(&o);
    let artifact = run(&cfg)?;
    println!("{}", artifact.summary_line());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Shape(a) => single(Kind::Shape, a),
        Command::Construct(a) => single(Kind::Construct, a),
        Command::Oriented(a) => single(Kind::Oriented, a),
        Command::Compete(a) => single(Kind::Compete, a),
        Command::Ends(a) => single(Kind::Ends, a),
        Command::Busemann(a) => single(Kind::Busemann, a),
        Command::Diagnose(a) => single(Kind::Diagnose, a),
        Command::Sweep { configs, out, threads } => {
            let o = Overrides { threads, ..Default::default() };
            validate(&o).and_then(|_| {
                let root = out
                    .or_else(|| std::env::var_os("FPPLAB_OUT").map(PathBuf::from))
                    .unwrap_or_else(|| PathBuf::from("fpplab-out"));
                let entries = configs.iter().map(|p| ExperimentConfig::load(p, None).map(|c| c.apply(&o))).collect();
                let report = sweep(entries, &root)?;
                for r in &report.results {
                    match r {
                        Ok(a) => println!("{}", a.summary_line()),
                        Err(e) => eprintln!("fpplab: {e}"),
                    }
                }
                println!(
                    "{}",
                    json!({
                        "sweep": report.merged,
                        "succeeded": report.artifacts().count(),
                        "failed": report.failures(),
                    })
                );
                Ok(())
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fpplab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
