//! The `featherpipe` command line: fit pipelines, apply them to datasets,
//! run single-row inference, check backend parity and serve bundles over
//! HTTP.

pub mod commands;
pub mod error;
pub mod ingest;
pub mod serve;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use featherpipe_parity::Fault;
use featherpipe_runtime::RowMode;

pub use error::CliError;
pub use ingest::{Format, IngestionConfig};

#[derive(Debug, Parser)]
#[command(name = "featherpipe", version, about = "Feature preprocessing pipelines with a standalone runtime")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Number of partitions to split the dataset into.
    #[arg(long, default_value_t = 1)]
    pub partitions: usize,
    /// CSV cells equal to this string read as null.
    #[arg(long, default_value = "")]
    pub null_token: String,
}

impl DataArgs {
    fn config(&self, path: &std::path::Path) -> IngestionConfig {
        IngestionConfig {
            null_token: self.null_token.clone(),
            partitions: self.partitions,
            ..IngestionConfig::for_path(path, self.format)
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a pipeline spec on a dataset and write the bundle.
    Fit {
        spec: PathBuf,
        data: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        data_args: DataArgs,
    },
    /// Transform a dataset with a bundle, or with a spec fitted on the fly.
    Apply {
        data: PathBuf,
        /// Output jsonlines path; `-` for standard output.
        #[arg(short, long, default_value = "-")]
        out: PathBuf,
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        bundle: Option<PathBuf>,
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Dataset to fit the spec on; defaults to the data being applied.
        #[arg(long, requires = "spec")]
        fit_data: Option<PathBuf>,
        /// Comma-separated output columns.
        #[arg(long, value_delimiter = ',')]
        select: Option<Vec<String>>,
        #[command(flatten)]
        data_args: DataArgs,
    },
    /// Run one JSON row through a bundle.
    Infer {
        bundle: PathBuf,
        #[arg(long)]
        row: String,
        /// Ignore fields the bundle does not expect instead of rejecting them.
        #[arg(long)]
        lenient: bool,
    },
    /// Compare batch and bundle execution of a spec on generated rows.
    Parity {
        spec: PathBuf,
        #[arg(long, default_value_t = 1000)]
        rows: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        partitions: usize,
        /// Corrupt the bundle before comparing (swaps two vocabulary labels).
        #[arg(long)]
        inject_fault: bool,
        /// Also write the summary document here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Validate a spec and write it as an unfitted manifest.
    Export {
        spec: PathBuf,
        #[arg(short, long, default_value = "-")]
        out: PathBuf,
    },
    /// Serve a bundle over HTTP.
    Serve {
        bundle: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        lenient: bool,
    },
}

fn row_mode(lenient: bool) -> RowMode {
    if lenient {
        RowMode::Lenient
    } else {
        RowMode::Strict
    }
}

/// Runs one parsed command line.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Fit {
            spec,
            data,
            out: bundle,
            data_args,
        } => commands::cmd_fit(&spec, &data, &bundle, &data_args.config(&data), out),
        Command::Apply {
            data,
            out: out_path,
            bundle,
            spec,
            fit_data,
            select,
            data_args,
        } => {
            let source = match (bundle, spec) {
                (Some(b), _) => commands::PipelineSource::Bundle(b),
                (None, Some(spec)) => commands::PipelineSource::Spec { spec, fit_data },
                (None, None) => unreachable!("clap requires --bundle or --spec"),
            };
            commands::cmd_apply(&source, &data, &out_path, select.as_deref(), &data_args.config(&data), out)
        }
        Command::Infer { bundle, row, lenient } => commands::cmd_infer(&bundle, &row, row_mode(lenient), out),
        Command::Parity {
            spec,
            rows,
            seed,
            partitions,
            inject_fault,
            summary,
        } => {
            let opts = commands::ParityOptions {
                rows,
                seed,
                partitions,
                fault: inject_fault.then_some(Fault::SwapLabels),
                summary,
            };
            commands::cmd_parity(&spec, &opts, out)
        }
        Command::Export { spec, out: out_path } => commands::cmd_export(&spec, &out_path, out),
        Command::Serve {
            bundle,
            port,
            host,
            lenient,
        } => commands::cmd_serve(&bundle, &host, port, row_mode(lenient)),
    }
}
