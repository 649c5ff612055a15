use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use vorproc_cli::commands::{self, RenderKind};
use vorproc_cli::config::RunConfig;
use vorproc_cli::selftest;

#[derive(Parser)]
#[command(name = "vorproc", version, about = "Voronoi-cell driven thinning-replacement point processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `process.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// `dotted.key=value` edits applied before validation; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut ov = self.overrides.clone();
        if let Some(s) = self.seed {
            ov.push(format!("process.seed={s}"));
        }
        let mut cfg = RunConfig::load(&self.config, &ov)?;
        if let Some(d) = &self.out_dir {
            cfg.output.dir = d.clone();
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    Incircle,
}

#[derive(Subcommand)]
enum Command {
    /// Run one chain and write its trajectory, snapshots, statistics and rasters.
    Simulate(RunArgs),
    /// Run one chain per α (or per configured selection) concurrently.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated α values; replaces `sweep.alphas`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alphas: Option<Vec<f64>>,
    },
    /// Render a trajectory file as a graymap.
    Render {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long, value_enum, default_value = "spacetime")]
        kind: RenderKind,
        /// Position bins (space-time) or raster side (snapshot).
        #[arg(long, default_value_t = 256)]
        bins: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute statistics tables from a trajectory file.
    Stats {
        #[arg(long)]
        trajectory: PathBuf,
        /// Configuration supplying the `[statistics]` block.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the reduced verification suites.
    Selftest {
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
}

fn run(cli: Cli) -> Result<bool> {
    let summary = match cli.command {
        Command::Simulate(args) => commands::simulate(&args.load()?)?,
        Command::Sweep { run, alphas } => commands::sweep(&run.load()?, alphas.as_deref())?,
        Command::Render { trajectory, kind, bins, out } => commands::render(&trajectory, kind, bins, out)?,
        Command::Stats { trajectory, config, out_dir, overrides } => {
            let cfg = config.map(|p| RunConfig::load(&p, &overrides)).transpose()?;
            commands::stats(&trajectory, cfg.as_ref(), out_dir)?
        }
        Command::Selftest { inject_fault } => {
            if let Some(Fault::Incircle) = inject_fault {
                vorproc::geometry::predicates::inject_incircle_fault(true);
            }
            let ok = selftest::run_all(&mut std::io::stdout());
            println!("selftest: {}", if ok { "all suites passed" } else { "FAILED" });
            return Ok(ok);
        }
    };
    println!("{summary}");
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
