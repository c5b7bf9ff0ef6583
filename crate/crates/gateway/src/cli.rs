//! The `munidss` command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use munidss_core::{
    portfolio_coverage, validate_project, Analysis, InfluenceOptions, Method, NodeId, Scenario,
};

use crate::api::{serve, ServeConfig};
use crate::error::{GatewayError, Result};
use crate::files::{load_project_path, parse_portfolio, parse_project, read_text, to_canonical_json};
use crate::render::{coverage_table, matrix_csv, outcome_table, rating_table, InfluencePayload, MatrixChoice};

#[derive(Debug, Parser)]
#[command(name = "munidss", version, about = "Indicator influence rating for municipal development planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    #[default]
    Series,
    Closed,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Series => Method::Series,
            MethodArg::Closed => Method::Closed,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    #[default]
    Table,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct InfluenceArgs {
    /// Total-influence method.
    #[arg(long, value_enum, default_value_t)]
    pub method: MethodArg,
    /// Series length (default: number of nodes).
    #[arg(long)]
    pub k: Option<usize>,
}

impl From<&InfluenceArgs> for InfluenceOptions {
    fn from(a: &InfluenceArgs) -> Self {
        InfluenceOptions {
            method: a.method.into(),
            k: a.k,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a project file; exit status 1 when it is invalid.
    Validate { project: PathBuf },
    /// Print the direct or total influence matrix.
    Influence {
        project: PathBuf,
        #[command(flatten)]
        influence: InfluenceArgs,
        #[arg(long, value_enum, default_value_t)]
        out: MatrixFormat,
        /// Matrix to print as CSV.
        #[arg(long, value_enum, default_value_t)]
        matrix: MatrixChoice,
    },
    /// Rate indicators by their influence on one targeted indicator.
    Rate {
        project: PathBuf,
        #[arg(long)]
        target: String,
        #[command(flatten)]
        influence: InfluenceArgs,
        #[arg(long, value_enum, default_value_t)]
        out: TableFormat,
    },
    /// Predict the effect of additive shocks, e.g. `--delta a=1,b=-0.5`.
    Whatif {
        project: PathBuf,
        #[arg(long, value_delimiter = ',', value_parser = parse_delta, required = true)]
        delta: Vec<(String, f64)>,
        #[command(flatten)]
        influence: InfluenceArgs,
        #[arg(long, value_enum, default_value_t)]
        out: TableFormat,
    },
    /// Check a document portfolio against the strategic-planning grid.
    Coverage {
        portfolio: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        out: TableFormat,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "./projects")]
        data_dir: PathBuf,
    },
}

fn parse_delta(s: &str) -> std::result::Result<(String, f64), String> {
    let (id, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected <indicatorId>=<real>, got `{s}`"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|e| format!("bad shock value in `{s}`: {e}"))?;
    Ok((id.trim().to_owned(), value))
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    to_canonical_json(value)
}

fn execute(command: Command) -> Result<(String, ExitCode)> {
    match command {
        Command::Validate { project } => {
            let parsed = parse_project(&read_text(&project)?)?;
            let report = validate_project(&parsed);
            if report.is_valid() {
                Ok((String::new(), ExitCode::SUCCESS))
            } else {
                for v in &report.violations {
                    eprintln!("{}: {}", v.code, v.message);
                }
                Ok((String::new(), ExitCode::FAILURE))
            }
        }
        Command::Influence {
            project,
            influence,
            out,
            matrix,
        } => {
            let project = load_project_path(&project)?;
            let analysis = Analysis::new(&project, (&influence).into())?;
            let text = match out {
                MatrixFormat::Json => json(&InfluencePayload::new(&analysis))?,
                MatrixFormat::Csv => {
                    let m = match matrix {
                        MatrixChoice::Total => analysis.influence().totals(),
                        MatrixChoice::Direct => analysis.impact().weights(),
                    };
                    matrix_csv(analysis.influence().node_order(), m)
                }
            };
            Ok((text, ExitCode::SUCCESS))
        }
        Command::Rate {
            project,
            target,
            influence,
            out,
        } => {
            let project = load_project_path(&project)?;
            let analysis = Analysis::new(&project, (&influence).into())?;
            let rating = analysis.rating(&target)?;
            let text = match out {
                TableFormat::Json => json(&rating)?,
                TableFormat::Table => rating_table(&rating),
            };
            Ok((text, ExitCode::SUCCESS))
        }
        Command::Whatif {
            project,
            delta,
            influence,
            out,
        } => {
            let project = load_project_path(&project)?;
            let analysis = Analysis::new(&project, (&influence).into())?;
            let mut scenario = Scenario::new();
            for (id, value) in delta {
                *scenario.entry(NodeId::from(id)).or_default() += value;
            }
            let outcome = analysis.what_if(&scenario)?;
            let text = match out {
                TableFormat::Json => json(&outcome)?,
                TableFormat::Table => outcome_table(&outcome),
            };
            Ok((text, ExitCode::SUCCESS))
        }
        Command::Coverage { portfolio, out } => {
            let documents = parse_portfolio(&read_text(&portfolio)?)?;
            let report = portfolio_coverage(&documents);
            let text = match out {
                TableFormat::Json => json(&report)?,
                TableFormat::Table => coverage_table(&report),
            };
            Ok((text, ExitCode::SUCCESS))
        }
        Command::Serve { port, data_dir } => {
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| GatewayError::io("tokio runtime", e))?;
            match runtime.block_on(serve(ServeConfig { port, data_dir })) {
                Ok(()) => Ok((String::new(), ExitCode::SUCCESS)),
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok((String::new(), ExitCode::FAILURE))
                }
            }
        }
    }
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok((text, code)) => {
            print!("{text}");
            code
        }
        Err(GatewayError::Invalid(report)) => {
            for v in &report.violations {
                eprintln!("{}: {}", v.code, v.message);
            }
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
