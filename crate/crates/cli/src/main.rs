//! `cameral-lab`: cameral covers, fibers, monodromy and the Seiberg-Witten
//! derivative from the command line.
//!
//! Exit codes: 0 success, 1 validation failure, 2 numerical failure,
//! 3 genericity rejection. Errors go to stderr as one JSON object.

mod commands;
mod error;
mod input;
mod output;

use std::io::Write;
use std::process::ExitCode;

use cameral_core::geomobs::QuadOptions;
use cameral_core::tolerances::TAU_QUAD;
use clap::{Parser, Subcommand};
use num_complex::Complex64 as C;

use commands::{A1Choice, CubicRequest, GridSpec, IdentityCheck, LoopChoice, Outcome, SwRequest};
use error::CliError;
use input::{parse_complex, ChartArgs};
use output::{to_json, Format};

#[derive(Parser, Debug)]
#[command(name = "cameral-lab", version, about = "Cameral covers and the Seiberg-Witten differential")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for the fiber solver's random start points (and for verify-all).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Root data and Weyl group of a group.
    Roots {
        #[arg(long)]
        group: String,
        /// Also list every Weyl group element.
        #[arg(long)]
        elements: bool,
    },
    /// Basic invariants and exact identity checks.
    Invariants {
        #[arg(long)]
        group: String,
        /// Comma-separated identities to check.
        #[arg(long, value_enum, value_delimiter = ',')]
        check: Vec<IdentityCheck>,
        /// Normalization of the A1 generator.
        #[arg(long, value_enum, default_value_t = A1Choice::Curve)]
        a1_convention: A1Choice,
    },
    /// All points of the cover over one z.
    Fiber {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: C,
    },
    /// Sheet permutation along a closed loop.
    Monodromy {
        #[command(flatten)]
        chart: ChartArgs,
        /// Loop vertices `[[re, im], ...]`, inline or a path.
        #[arg(long = "loop")]
        loop_path: Option<String>,
        /// Lasso around the branch point with this index instead.
        #[arg(long)]
        around: Option<usize>,
        /// Lasso radius (default: 0.3 times the distance to the nearest other branch point).
        #[arg(long)]
        radius: Option<f64>,
        /// Base point of the loop.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        base: Option<C>,
    },
    /// Gauss-Manin derivative of the Seiberg-Witten differential.
    SwDeriv {
        #[command(flatten)]
        chart: ChartArgs,
        /// Deformation `{"gamma": [...]}` or bare coefficient arrays, inline or a path.
        #[arg(long)]
        gamma: String,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Option<C>,
        /// Sheet to report when --all-sheets is absent.
        #[arg(long, default_value_t = 0)]
        sheet: usize,
        /// Report every sheet and the Weyl equivariance defect.
        #[arg(long)]
        all_sheets: bool,
        /// Run the holomorphy probe at every branch point.
        #[arg(long)]
        probe_ramification: bool,
        /// Write a CSV of values on an n x n grid of z instead.
        #[arg(long, value_name = "N")]
        emit_grid: Option<usize>,
        /// Grid centre.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0")]
        grid_center: C,
        /// Half side length of the grid square.
        #[arg(long)]
        grid_half_width: Option<f64>,
    },
    /// Residue cubic on the base.
    Cubic {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long)]
        g1: String,
        #[arg(long)]
        g2: String,
        #[arg(long)]
        g3: String,
        /// `default` or an integer matrix, inline or a path.
        #[arg(long, default_value = "default")]
        pairing: String,
    },
    /// Rank-one special Kahler metric over a disc.
    SkMetric {
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long)]
        gamma: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Relative quadrature tolerance.
        #[arg(long, default_value_t = TAU_QUAD)]
        tol: f64,
        #[arg(long, default_value_t = 200_000)]
        max_cells: usize,
    },
    /// Genus of the cameral cover of a curve of genus g_X.
    Genus {
        #[arg(long)]
        group: String,
        #[arg(long)]
        gx: u32,
    },
    /// Run the full acceptance suite.
    VerifyAll,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CAMERAL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::validation(format!("CAMERAL_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::validation(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    configure_threads()?;
    let (format, seed) = (cli.format, cli.seed);
    match cli.command {
        Command::Roots { group, elements } => commands::roots(&group, elements, format),
        Command::Invariants {
            group,
            check,
            a1_convention,
        } => commands::invariants(&group, &check, a1_convention, format),
        Command::Fiber { chart, z } => commands::fiber(&chart, z, seed, format),
        Command::Monodromy {
            chart,
            loop_path,
            around,
            radius,
            base,
        } => commands::monodromy(
            &chart,
            LoopChoice {
                path: loop_path.as_deref(),
                around,
                radius,
                base,
            },
            seed,
            format,
        ),
        Command::SwDeriv {
            chart,
            gamma,
            z,
            sheet,
            all_sheets,
            probe_ramification,
            emit_grid,
            grid_center,
            grid_half_width,
        } => commands::sw_deriv(
            &chart,
            SwRequest {
                gamma: &gamma,
                z,
                sheet,
                all_sheets,
                probe: probe_ramification,
                grid: emit_grid.map(|n| GridSpec {
                    n,
                    center: grid_center,
                    half_width: grid_half_width,
                }),
            },
            seed,
            format,
        ),
        Command::Cubic {
            chart,
            g1,
            g2,
            g3,
            pairing,
        } => commands::cubic_cmd(
            &chart,
            CubicRequest {
                g1: &g1,
                g2: &g2,
                g3: &g3,
                pairing: &pairing,
            },
            seed,
            format,
        ),
        Command::SkMetric {
            chart,
            gamma,
            radius,
            tol,
            max_cells,
        } => commands::sk_metric_cmd(
            &chart,
            &gamma,
            radius,
            QuadOptions {
                tol,
                max_cells,
                ..QuadOptions::default()
            },
            seed,
            format,
        ),
        Command::Genus { group, gx } => commands::genus(&group, gx, format),
        Command::VerifyAll => commands::verify_all(seed, format),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", to_json(&serde_json::json!({ "error": e })));
    ExitCode::from(e.kind.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return fail(&CliError::validation(e.to_string().trim_end()));
        }
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => fail(&e),
    }
}
