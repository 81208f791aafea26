//! Command-line interface.
//!
//! Exit codes: 0 when the test fails to reject (or a non-test command
//! succeeds), 2 when it rejects, 1 on any usage, IO, parse or numerical error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use matvar_core::estimation::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use matvar_core::simulation::{gen_matnorm_dataset, gen_nonkron_dataset, sweep_to_csv, DataKind};
use matvar_core::{
    flip_flop_mle, matrix_normality_test, render_csv, render_svg, DdPlotData, MatrixDataset, NormalityTest, Seed,
    SweepConfig,
};

use crate::error::{AppError, Result};
use crate::io::{dataset_to_csv, read_csv_dataset, read_idx_images, read_idx_labels, write_all_atomic, write_atomic};
use crate::mnist::{jitter, select_digits};
use crate::report::{to_json, DatasetInfo, EstimateReport, TestReport};
use crate::sweep::parallel_sweep;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REJECT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "matvar", version, about = "Matrix variate normality assessment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a matrix normal distribution by flip-flop and print the estimates.
    Estimate {
        #[command(flatten)]
        input: CsvInput,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Run the two-sample KS test; exits 0 (fail to reject) or 2 (reject).
    Test {
        #[command(flatten)]
        input: CsvInput,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Also write the JSON report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write the DD-plot as SVG and CSV.
    Ddplot {
        #[command(flatten)]
        input: CsvInput,
        #[arg(long)]
        svg: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[command(flatten)]
        plot: PlotArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Monte-Carlo rejection-rate sweep.
    Simulate {
        kind: SweepKind,
        /// Comma-separated matrix shapes, e.g. `2x2,4x4`.
        #[arg(long, value_delimiter = ',', value_parser = parse_dim, required = true)]
        dims: Vec<(usize, usize)>,
        #[arg(long)]
        n_start: usize,
        #[arg(long)]
        n_end: usize,
        #[arg(long, default_value_t = 5)]
        n_step: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 500)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit one distribution to pooled MNIST digit classes, plot and test.
    MnistDemo {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Comma-separated digit classes pooled into one sample, e.g. `3,7,1`.
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u8).range(0..=9))]
        digits: Vec<u8>,
        #[arg(long)]
        svg: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Standard deviation of iid normal noise added to every pixel.
        #[arg(long)]
        jitter: Option<f64>,
        #[arg(long, default_value_t = 0)]
        jitter_seed: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        plot: PlotArgs,
    },
    /// Write a simulated dataset as CSV.
    Generate {
        kind: GenerateKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct CsvInput {
    /// CSV with one `vec(X_i)` (column-major) per row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    title: Option<String>,
    #[arg(long, default_value_t = 640)]
    width: u32,
    #[arg(long, default_value_t = 640)]
    height: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepKind {
    /// Matrix normal data.
    Type1,
    /// Unstructured multivariate normal data.
    Power,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenerateKind {
    Kron,
    Nonkron,
}

fn parse_dim(s: &str) -> std::result::Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected RxC, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{s:?}: {e}"));
    Ok((parse(r)?, parse(c)?))
}

impl CsvInput {
    fn load(&self) -> Result<MatrixDataset> {
        read_csv_dataset(&self.input, self.rows, self.cols)
    }

    fn info(&self, n: usize) -> DatasetInfo {
        DatasetInfo { source: display(&self.input), n, rows: self.rows, cols: self.cols }
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn timed_test(data: &MatrixDataset, alpha: f64, tol: f64) -> Result<(NormalityTest, f64)> {
    let start = Instant::now();
    let test = matrix_normality_test(data, alpha, tol)?;
    Ok((test, start.elapsed().as_secs_f64() * 1e3))
}

fn plot(test: &NormalityTest, data: &MatrixDataset, args: &PlotArgs, default_title: String) -> Result<DdPlotData> {
    let title = args.title.clone().unwrap_or(default_title);
    Ok(DdPlotData::from_test(test, data.rows(), data.cols(), title)?)
}

/// Runs one command and returns its exit code.
fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Estimate { input, tol, max_iter } => {
            let data = input.load()?;
            let rep = flip_flop_mle(&data, tol, max_iter)?;
            print!("{}", to_json(&EstimateReport::new(input.info(data.len()), &rep))?);
            Ok(EXIT_OK)
        }
        Command::Test { input, alpha, tol, report } => {
            let data = input.load()?;
            let (test, ms) = timed_test(&data, alpha, tol)?;
            let rep = TestReport::new(display(&input.input), input.rows, input.cols, &test, ms);
            let json = to_json(&rep)?;
            if let Some(path) = report {
                write_atomic(&path, json.as_bytes())?;
            }
            print!("{json}");
            Ok(rep.decision.exit_code())
        }
        Command::Ddplot { input, svg, csv, plot: args, tol } => {
            let data = input.load()?;
            let (test, ms) = timed_test(&data, 0.05, tol)?;
            let d = plot(&test, &data, &args, display(&input.input))?;
            let svg_text = render_svg(&d, args.width, args.height)?;
            let csv_text = render_csv(&d);
            write_all_atomic(&[(&svg, svg_text.as_bytes()), (&csv, csv_text.as_bytes())])?;
            let rep = TestReport::new(display(&input.input), input.rows, input.cols, &test, ms);
            print!("{}", to_json(&rep)?);
            Ok(EXIT_OK)
        }
        Command::Simulate { kind, dims, n_start, n_end, n_step, alpha, reps, seed, tol, out } => {
            let cfg = SweepConfig {
                dims,
                n_start,
                n_end,
                n_step,
                alpha,
                replicates: reps,
                master_seed: Seed(seed),
                flip_flop_tol: tol,
            };
            let kind = match kind {
                SweepKind::Type1 => DataKind::MatrixNormal,
                SweepKind::Power => DataKind::NonKronecker,
            };
            let rows = parallel_sweep(kind, &cfg)?;
            for row in rows.iter().filter(|r| r.failures > 0) {
                eprintln!(
                    "matvar: {}x{} N={}: {} of {} replicates failed to estimate",
                    row.r, row.c, row.n, row.failures, row.replicates
                );
            }
            write_atomic(&out, sweep_to_csv(&rows).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::MnistDemo { images, labels, digits, svg, csv, jitter: eps, jitter_seed, alpha, tol, plot: args } => {
            let all = read_idx_images(&images)?;
            let lab = read_idx_labels(&labels)?;
            let (mut data, kept) = select_digits(&all, &lab, &digits)?;
            if let Some(eps) = eps {
                data = jitter(&data, eps, Seed(jitter_seed))?;
            }
            let (test, ms) = timed_test(&data, alpha, tol)?;
            let names: Vec<String> = digits.iter().map(u8::to_string).collect();
            let source = format!("{} digits {}", display(&images), names.join(","));
            let d = plot(&test, &data, &args, format!("MNIST digits {}", names.join(", ")))?.with_labels(kept)?;
            let svg_text = render_svg(&d, args.width, args.height)?;
            let csv_text = csv.as_ref().map(|_| render_csv(&d));
            let mut files: Vec<(&Path, &[u8])> = vec![(&svg, svg_text.as_bytes())];
            if let (Some(path), Some(text)) = (&csv, &csv_text) {
                files.push((path, text.as_bytes()));
            }
            write_all_atomic(&files)?;
            let rep = TestReport::new(source, data.rows(), data.cols(), &test, ms);
            print!("{}", to_json(&rep)?);
            Ok(rep.decision.exit_code())
        }
        Command::Generate { kind, n, rows, cols, seed, out } => {
            let data = match kind {
                GenerateKind::Kron => gen_matnorm_dataset(n, rows, cols, Seed(seed))?.0,
                GenerateKind::Nonkron => gen_nonkron_dataset(n, rows, cols, Seed(seed))?.0,
            };
            write_atomic(&out, dataset_to_csv(&data).as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Diagnostics go to stderr as a single line.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    EXIT_OK
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    eprintln!("matvar: missing subcommand (see `matvar --help`)");
                    EXIT_ERROR
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("invalid arguments");
                    eprintln!("matvar: {}", first.trim_start_matches("error: "));
                    EXIT_ERROR
                }
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("matvar: {}", one_line(&e));
            EXIT_ERROR
        }
    }
}

fn one_line(e: &AppError) -> String {
    e.to_string().replace('\n', " ")
}
