use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use plkg::channel::{run_session, DopplerMode};
use plkg::config::parse_override;
use plkg::pipeline::{summary_csv, write_sweep};
use plkg::trace::{read_trace, save_trace, Trace};
use plkg::{run_pipeline, sweep, PipelineConfig, Result, Source, SweepGrid};

/// Physical-layer key generation simulator and CSI trace tool.
#[derive(Parser)]
#[command(name = "plkg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set snr_db=30`. Repeatable; wins over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<PipelineConfig> {
        let overrides = self
            .set
            .iter()
            .map(|s| parse_override(s))
            .collect::<Result<Vec<_>>>()?;
        PipelineConfig::load(self.config.as_deref(), &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a probing session and write its CSI trace.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run the full pipeline on a trace or a live simulation.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Read CSI from this trace instead of simulating.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the JSON report here instead of stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Include raw quantized bit streams in the report.
        #[arg(long)]
        insecure_debug: bool,
    },
    /// Run a grid of configurations and write reports plus summary.csv.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        bits: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snr_db: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        modes: Option<Vec<DopplerMode>>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Check a trace file and print a short summary.
    Validate { trace: PathBuf },
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = config.load()?;
            cfg.session.validate()?;
            let triples = run_session(&cfg.session)?;
            save_trace(&out, &Trace::from_session(&cfg.session, &triples))?;
            eprintln!("wrote {} probes to {}", triples.len(), out.display());
        }
        Command::Run {
            config,
            trace,
            out,
            insecure_debug,
        } => {
            let mut cfg = config.load()?;
            if let Some(t) = trace {
                cfg.source = Source::Trace(t);
            }
            cfg.insecure_debug |= insecure_debug;
            let report = run_pipeline(&cfg)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            write_output(out.as_deref(), &report.to_json())?;
        }
        Command::Sweep {
            config,
            levels,
            bits,
            snr_db,
            modes,
            out_dir,
        } => {
            let cfg = config.load()?;
            let single = SweepGrid::single(&cfg);
            let grid = SweepGrid {
                levels: levels.unwrap_or(single.levels),
                bits: bits.unwrap_or(single.bits),
                snr_db: snr_db.unwrap_or(single.snr_db),
                modes: modes.unwrap_or(single.modes),
            };
            let points = sweep(&cfg, &grid)?;
            write_sweep(&out_dir, &points)?;
            print!("{}", summary_csv(&points));
            let failed = points.iter().filter(|p| p.outcome.is_err()).count();
            if failed > 0 {
                eprintln!("warning: {failed} of {} sweep points failed", points.len());
            }
        }
        Command::Validate { trace } => {
            let t = read_trace(&trace)?;
            println!(
                "ok: format_version={} num_subcarriers={} probes={}",
                t.header.format_version,
                t.header.num_subcarriers,
                t.probe_count()
            );
            for (node, est) in &t.nodes {
                println!("{node}: {} estimates", est.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
