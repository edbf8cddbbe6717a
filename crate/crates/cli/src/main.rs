use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use girthlab::error::ConfigError;
use girthlab::graph::{generate, GraphSpec};
use girthlab::report::{run_pipeline, verify_catalog, ConfigOverrides, PipelineConfig, VerificationReport, VerifyOptions};

#[derive(Parser)]
#[command(name = "girthlab", version, about = "Finite-witness checks for graphs with large girth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the edge list of a graph.
    Gen {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cover pipeline on one graph.
    Pipeline {
        /// key = value config file; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run the acceptance suite over the catalog.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the catalog and the algebra instances.
        #[arg(long)]
        empty: bool,
    },
    /// Render a stored JSON report as text.
    Report { path: PathBuf },
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    radius: Option<u32>,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "bigC")]
    big_c: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u32>,
    #[arg(long)]
    out: Option<String>,
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), ConfigError> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(report: &VerificationReport, out: Option<&Path>) -> Result<u8, ConfigError> {
    write_or_print(out, &report.to_json())?;
    if out.is_some() {
        eprint!("{}", report.render_text());
    }
    Ok(report.exit_code() as u8)
}

fn run(cli: Cli) -> Result<u8, ConfigError> {
    match cli.command {
        Command::Gen { graph, out } => {
            let g = generate(&GraphSpec::parse(&graph)?)?;
            write_or_print(out.as_deref(), &g.to_edge_list())?;
            Ok(0)
        }
        Command::Pipeline { config, flags } => {
            let mut cfg = match config {
                Some(p) => PipelineConfig::parse(&std::fs::read_to_string(p)?)?,
                None => PipelineConfig::default(),
            };
            cfg.apply(&ConfigOverrides {
                graph: flags.graph,
                radius: flags.radius,
                depth: flags.depth,
                alpha: flags.alpha,
                big_c: flags.big_c,
                samples: flags.samples,
                seed: flags.seed,
                out: flags.out,
            });
            let output = run_pipeline(&cfg)?;
            let out = cfg.out.as_ref().map(PathBuf::from);
            if let Some(o) = &out {
                for (ext, text) in [("window", &output.window), ("manifest", &output.manifest), ("table", &output.table)] {
                    if let Some(t) = text {
                        std::fs::write(o.with_extension(ext), t)?;
                    }
                }
            }
            finish(&output.report, out.as_deref())
        }
        Command::Verify { seed, out, empty } => {
            let opts = if empty { VerifyOptions::empty(seed) } else { VerifyOptions::catalog(seed) };
            finish(&verify_catalog(&opts), out.as_deref())
        }
        Command::Report { path } => {
            let text = std::fs::read_to_string(path)?;
            let report = VerificationReport::from_json(&text)
                .map_err(|e| ConfigError::Invalid(format!("not a verification report: {e}")))?;
            print!("{}", report.render_text());
            Ok(report.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
