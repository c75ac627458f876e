//! Command-line front end.
//!
//! ```text
//! bridgelab study <kind> --config <path> [--out <dir>] [--workers k] [--plot] [--overwrite]
//! bridgelab gh --a <csv> --b <csv> [--exact]
//! bridgelab limit-sample --alpha a --eps e --seed s --out <file> [--overwrite]
//! bridgelab matrix --config <path> --out <file> [--overwrite]
//! ```
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, size caps), 2 config or
//! usage error. Nothing is written outside the `--out` target.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::gh::gh_bounds;
use crate::harness::{run_study, trial_grid_matrix, Aggregate, ConvergenceReport, StudyConfig, StudyKind};
use crate::limits::sample_subordinator;
use crate::rng::StreamKey;
use crate::walks::DistanceMatrix;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bridgelab", version, about = "Gromov-Hausdorff convergence studies for random bridges")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte Carlo study and write report.csv, summary.csv and resolved_config.json.
    Study {
        /// lemma1, theorem1, theorem2, truncation or angular
        kind: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Also write plot.svg with medians against d.
        #[arg(long)]
        plot: bool,
        #[arg(long)]
        overwrite: bool,
    },
    /// Print Gromov-Hausdorff bounds between two distance-matrix CSV files as JSON.
    Gh {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Also run the exhaustive oracle (at most 5 points per space).
        #[arg(long)]
        exact: bool,
    },
    /// Sample a truncated subordinator and write its atoms as CSV.
    LimitSample {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        overwrite: bool,
    },
    /// Write the scaled grid distance matrix of trial 0 at the first schedule point.
    Matrix {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        overwrite: bool,
    },
}

/// Parsed and validated options of the `study` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub study: StudyConfig,
    pub out_dir: PathBuf,
    pub overwrite: bool,
    pub workers: usize,
    pub plot: bool,
}

/// Reads and validates a JSON study config.
pub fn parse_config(path: &Path) -> Result<StudyConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let config: StudyConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

fn exit_code(err: &Error) -> i32 {
    if err.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_RUNTIME
    }
}

/// Entry point used by the binary.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Study {
            kind,
            config,
            out: out_dir,
            workers,
            plot,
            overwrite,
        } => {
            let kind: StudyKind = kind.parse()?;
            if workers == 0 {
                return Err(Error::Config("--workers must be at least 1".into()));
            }
            let study = parse_config(&config)?;
            if study.study != kind {
                return Err(Error::Config(format!(
                    "config {} describes a {} study, not {kind}",
                    config.display(),
                    study.study
                )));
            }
            let cli = CliConfig {
                study,
                out_dir: out_dir.unwrap_or_else(|| PathBuf::from(format!("{kind}-results"))),
                overwrite,
                workers,
                plot,
            };
            run_study_command(&cli)
        }
        Command::Gh { a, b, exact } => {
            let da = read_matrix(&a)?;
            let db = read_matrix(&b)?;
            let report = gh_bounds(&da, &db, exact)?;
            let line = serde_json::to_string(&report).expect("report serialises");
            writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
        }
        Command::LimitSample {
            alpha,
            eps,
            seed,
            out: path,
            overwrite,
        } => {
            crate::increments::check_alpha(alpha)?;
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::Config(format!("--eps must be positive, got {eps}")));
            }
            let sample = sample_subordinator(alpha, eps, seed, StreamKey::new(0))?;
            write_file(&path, sample.to_csv().as_bytes(), overwrite)
        }
        Command::Matrix {
            config,
            out: path,
            overwrite,
        } => {
            let study = parse_config(&config)?;
            let (d, n) = study.schedule[0];
            let matrix = trial_grid_matrix(&study, d, n, 0)?;
            write_file(&path, matrix.to_csv().as_bytes(), overwrite)
        }
    }
}

fn read_matrix(path: &Path) -> Result<DistanceMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DistanceMatrix::from_csv(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn refuse_overwrite(path: &Path, overwrite: bool) -> Result<()> {
    if !overwrite && path.exists() {
        return Err(Error::Config(format!(
            "{} already exists (pass --overwrite to replace it)",
            path.display()
        )));
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8], overwrite: bool) -> Result<()> {
    refuse_overwrite(path, overwrite)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn run_study_command(cli: &CliConfig) -> Result<()> {
    let dir = &cli.out_dir;
    let targets = ["report.csv", "summary.csv", "resolved_config.json", "notes.txt", "plot.svg"];
    for name in targets {
        refuse_overwrite(&dir.join(name), cli.overwrite)?;
    }
    let report = run_study(&cli.study, cli.workers)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let resolved = serde_json::to_string_pretty(&cli.study).expect("config serialises") + "\n";
    write_file(&dir.join("resolved_config.json"), resolved.as_bytes(), true)?;
    write_file(&dir.join("report.csv"), report.to_csv().as_bytes(), true)?;
    write_file(&dir.join("summary.csv"), report.summary_csv().as_bytes(), true)?;
    if !report.notes.is_empty() {
        let notes = report.notes.join("\n") + "\n";
        write_file(&dir.join("notes.txt"), notes.as_bytes(), true)?;
    }
    if cli.plot {
        write_file(&dir.join("plot.svg"), median_plot_svg(&report).as_bytes(), true)?;
    }
    Ok(())
}

/// Line plot of each statistic's median against `log10 d`.
pub fn median_plot_svg(report: &ConvergenceReport) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

    let series: Vec<(String, Vec<(f64, f64)>)> = report
        .statistics()
        .into_iter()
        .map(|stat| {
            let pts = report
                .summaries
                .iter()
                .filter(|s| s.statistic == stat && s.aggregate == Aggregate::Median)
                .map(|s| ((s.d as f64).log10(), s.value))
                .collect();
            (stat, pts)
        })
        .collect();
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        x0 = 0.0;
        x1 = 1.0;
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 <= 0.0 {
        y1 = 1.0;
    }
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - y / y1 * (H - 2.0 * PAD);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    );
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">{} ({}): median vs log10 d</text>\n",
        W / 2.0,
        report.study,
        report.family
    ));
    svg.push_str(&format!(
        "<line x1=\"{PAD}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n<line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - PAD,
        W - PAD
    ));
    svg.push_str(&format!(
        "<text x=\"{PAD}\" y=\"{}\" font-size=\"11\">{x0:.2}</text>\n<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{x1:.2}</text>\n<text x=\"5\" y=\"{PAD}\" font-size=\"11\">{y1:.3}</text>\n",
        H - PAD + 15.0,
        W - PAD,
        H - PAD + 15.0
    ));
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{name}</text>\n",
            W - PAD - 120.0,
            PAD + 14.0 * k as f64
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
