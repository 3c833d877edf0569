// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line front end for `energy-cp`.
//!
//! [`run_cli`] takes the argument vector and output sinks explicitly so the
//! binary and the tests drive exactly the same code.

#![forbid(unsafe_code)]

pub mod ingest;
pub mod plot;
pub mod record;

use clap::{Args, Parser, Subcommand, ValueEnum};
use energy_cp::simgen::{self, Method, StudyCell, StudyConfig};
use energy_cp::{
    Alpha, DivisiveConfig, InitialMembership, Penalty, RandomStream, Segmentation, TimeSeries,
    adjusted_rand_index, e_agglo, e_divisive, rand_index,
};
use record::{AggloSettings, InputDigest, RandComparison, Run, RunRecord};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] energy_cp::Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "energy-cp",
    version,
    about = "Nonparametric multiple change point analysis with energy statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hierarchical divisive estimation with permutation testing
    Divisive(DivisiveArgs),
    /// Agglomerative estimation from an initial segmentation
    Agglo(AggloArgs),
    /// Generate a scenario, or run a Monte Carlo study
    Simulate(SimulateArgs),
    /// Compare two label files
    RandIndex(RandArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Delimited numeric file, one observation per row
    #[arg(long)]
    input: PathBuf,
    /// First line holds column names
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Worker threads for parallel sections
    #[arg(long)]
    threads: Option<usize>,
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock duration (makes output non-reproducible)
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Also write an SVG plot of the series
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Known change points to draw as solid rules, e.g. 101,201
    #[arg(long, value_delimiter = ',', requires = "plot")]
    truth: Vec<usize>,
}

#[derive(Args, Debug)]
struct DivisiveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0.05)]
    sig_lvl: f64,
    #[arg(long, default_value_t = 199)]
    permutations: usize,
    #[arg(long, default_value_t = 30)]
    min_size: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Fixed number of change points; disables testing
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0, value_parser = seed_parser())]
    seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 1000)]
    half: usize,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    plot: PlotArgs,
}

#[derive(Args, Debug)]
struct AggloArgs {
    #[command(flatten)]
    input: InputArgs,
    /// `width:N` for equal blocks, or a file with one integer label per line
    #[arg(long, default_value = "width:1")]
    member: String,
    /// none, neg-count, mean-gap, or table:<file> with one value per step
    #[arg(long, default_value = "none")]
    penalty: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    plot: PlotArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Divisive,
    Agglo,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_parser = seed_parser())]
    seed: u64,
    /// Study table (1, 2 or 3)
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3), required_unless_present = "scenario", conflicts_with = "scenario")]
    table: Option<u8>,
    /// Study cell such as T=300,mu=2; repeatable; default is every cell of the table
    #[arg(long, requires = "table")]
    cell: Vec<String>,
    #[arg(long, default_value_t = 50)]
    replicates: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Divisive)]
    method: MethodArg,
    #[arg(long, default_value_t = 0.05)]
    sig_lvl: f64,
    #[arg(long, default_value_t = 199)]
    permutations: usize,
    #[arg(long, default_value_t = 30)]
    min_size: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Initial block width for the agglomerative method
    #[arg(long, default_value_t = 10)]
    width: usize,
    /// Penalty for the agglomerative method: none, neg-count or mean-gap
    #[arg(long, default_value = "none")]
    penalty: String,
    /// Scenario definition file; writes the generated series as CSV
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// With --scenario, write the true boundaries here, one per line
    #[arg(long, requires = "scenario")]
    truth_out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RandArgs {
    /// Label file, one label per line
    #[arg(long)]
    u: PathBuf,
    #[arg(long)]
    v: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

fn seed_parser() -> clap::builder::RangedU64ValueParser<u64> {
    // Records store integers as signed 64-bit.
    clap::value_parser!(u64).range(..=i64::MAX as u64)
}

/// Runs the tool and returns the process exit code: 0 on success, 2 on usage
/// errors, 1 on data errors.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(text.as_bytes());
                return 0;
            }
            let _ = stderr.write_all(text.as_bytes());
            return 2;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    let threads = match &command {
        Command::Divisive(a) => a.output.threads,
        Command::Agglo(a) => a.output.threads,
        Command::Simulate(a) => a.threads,
        Command::RandIndex(a) => a.output.threads,
    };
    let pool = match threads {
        Some(0) => return Err(usage("--threads must be >= 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Data(e.to_string()))?,
        None => rayon::ThreadPoolBuilder::new()
            .build()
            .map_err(|e| CliError::Data(e.to_string()))?,
    };
    let (text, out) = pool.install(|| match command {
        Command::Divisive(a) => divisive(a),
        Command::Agglo(a) => agglo(a),
        Command::Simulate(a) => simulate(a),
        Command::RandIndex(a) => rand(a),
    })?;
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|e| CliError::io(&path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

type Rendered = (String, Option<PathBuf>);

fn load(input: &InputArgs) -> Result<(TimeSeries, InputDigest), CliError> {
    if !input.delimiter.is_ascii() {
        return Err(usage(format!(
            "--delimiter must be a single ASCII character; got `{}`",
            input.delimiter
        )));
    }
    let bytes = std::fs::read(&input.input).map_err(|e| CliError::io(&input.input, e))?;
    let x = ingest::parse_table(&bytes, input.header, input.delimiter as u8)
        .map_err(|msg| CliError::Data(format!("{}: {msg}", input.input.display())))?;
    let digest = InputDigest::new(&bytes, x.len(), x.dim());
    Ok((x, digest))
}

fn alpha(value: f64) -> Result<Alpha, CliError> {
    Alpha::new(value).map_err(usage)
}

fn finish(run: Run, started: Instant, output: &OutputArgs) -> Result<Rendered, CliError> {
    let mut record = RunRecord::new(run);
    if output.timing {
        record.elapsed_ms = Some(started.elapsed().as_millis() as u64);
    }
    let text = record
        .to_toml()
        .map_err(|e| CliError::Data(e.to_string()))?;
    Ok((text, output.out.clone()))
}

fn write_plot(plot: &PlotArgs, x: &TimeSeries, estimates: &Segmentation) -> Result<(), CliError> {
    if let Some(path) = &plot.plot {
        let svg = plot::render_svg(x, estimates.change_points(), &plot.truth);
        std::fs::write(path, svg).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

fn divisive(a: DivisiveArgs) -> Result<Rendered, CliError> {
    let started = Instant::now();
    let cfg = DivisiveConfig {
        sig_lvl: a.sig_lvl,
        permutations: a.permutations,
        min_size: a.min_size,
        alpha: alpha(a.alpha)?,
        k: a.k,
        seed: a.seed,
        eps: a.eps,
        half: a.half,
    };
    cfg.validate().map_err(usage)?;
    let (x, input) = load(&a.input)?;
    let result = e_divisive(&x, &cfg)?;
    write_plot(&a.plot, &x, &result.estimates)?;
    finish(
        Run::Divisive {
            input,
            config: cfg,
            result,
        },
        started,
        &a.output,
    )
}

fn parse_penalty(spec: &str, allow_table: bool) -> Result<Penalty, CliError> {
    match spec {
        "none" => Ok(Penalty::None),
        "neg-count" => Ok(Penalty::NegCount),
        "mean-gap" => Ok(Penalty::MeanGap),
        _ => match spec.strip_prefix("table:") {
            Some(path) if allow_table => {
                let path = Path::new(path);
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let values = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .enumerate()
                    .map(|(i, l)| {
                        l.parse::<f64>().map_err(|_| {
                            CliError::Data(format!(
                                "{}: entry {}: `{l}` is not a number",
                                path.display(),
                                i + 1
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Penalty::Table(values))
            }
            _ => Err(usage(format!(
                "unknown penalty `{spec}`; expected none, neg-count, mean-gap{}",
                if allow_table { " or table:<file>" } else { "" }
            ))),
        },
    }
}

fn parse_member(spec: &str, len: usize) -> Result<(InitialMembership, String), CliError> {
    if let Some(w) = spec.strip_prefix("width:") {
        let width: usize = w.parse().map_err(|_| {
            usage(format!(
                "--member width:N needs a positive integer; got `{w}`"
            ))
        })?;
        if width == 0 {
            return Err(usage("--member width must be >= 1"));
        }
        return Ok((InitialMembership::equal_width(len, width)?, spec.to_owned()));
    }
    let path = Path::new(spec);
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let labels = String::from_utf8_lossy(&bytes)
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse::<i64>().map_err(|_| {
                CliError::Data(format!("{spec}: label {}: `{l}` is not an integer", i + 1))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if labels.len() != len {
        return Err(CliError::Data(format!(
            "{spec}: {} labels for {len} observations",
            labels.len()
        )));
    }
    let digest = InputDigest::new(&bytes, labels.len(), 1);
    Ok((
        InitialMembership::from_labels(&labels)?,
        format!("file:{}", digest.sha256),
    ))
}

fn agglo(a: AggloArgs) -> Result<Rendered, CliError> {
    let started = Instant::now();
    let alpha = alpha(a.alpha)?;
    let penalty = parse_penalty(&a.penalty, true)?;
    let (x, input) = load(&a.input)?;
    let (member, member_echo) = parse_member(&a.member, x.len())?;
    let result = e_agglo(&x, &member, alpha, &penalty)?;
    write_plot(&a.plot, &x, &result.opt)?;
    let config = AggloSettings {
        alpha,
        member: member_echo,
        initial_segments: member.segment_count(),
        penalty,
    };
    finish(
        Run::Agglo {
            input,
            config,
            result,
        },
        started,
        &a.output,
    )
}

fn rand(a: RandArgs) -> Result<Rendered, CliError> {
    let started = Instant::now();
    let u = ingest::read_labels(&a.u)?;
    let v = ingest::read_labels(&a.v)?;
    let digest = |labels: &[String], path: &Path| -> Result<InputDigest, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Ok(InputDigest::new(&bytes, labels.len(), 1))
    };
    let result = RandComparison {
        observations: u.len(),
        rand_index: rand_index(&u, &v).map_err(|e| CliError::Data(e.to_string()))?,
        adjusted_rand_index: adjusted_rand_index(&u, &v)?,
    };
    let run = Run::RandIndex {
        u: digest(&u, &a.u)?,
        v: digest(&v, &a.v)?,
        result,
    };
    finish(run, started, &a.output)
}

fn simulate(a: SimulateArgs) -> Result<Rendered, CliError> {
    let stream = RandomStream::new(a.seed);
    if let Some(path) = &a.scenario {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let scenario = simgen::parse_scenario(&text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let sim = simgen::generate(&scenario, &stream)?;
        if let Some(truth_path) = &a.truth_out {
            let lines: String = sim
                .truth
                .boundaries()
                .iter()
                .map(|b| format!("{b}\n"))
                .collect();
            std::fs::write(truth_path, lines).map_err(|e| CliError::io(truth_path, e))?;
        }
        return Ok((series_csv(&sim.series, sim.times.as_deref()), a.out));
    }

    let table = a.table.expect("clap enforces --table without --scenario");
    let cells = if a.cell.is_empty() {
        simgen::study_cells(table)?
    } else {
        a.cell
            .iter()
            .map(|c| StudyCell::parse(c).map_err(usage))
            .collect::<Result<Vec<_>, _>>()?
    };
    for cell in &cells {
        simgen::cell_scenario(table, cell).map_err(usage)?;
    }
    if a.replicates < 2 {
        return Err(usage("--replicates must be >= 2"));
    }
    let mut cfg = StudyConfig::new(table, cells, a.replicates);
    cfg.method = match a.method {
        MethodArg::Divisive => Method::Divisive,
        MethodArg::Agglo => Method::Agglo,
    };
    cfg.divisive = DivisiveConfig {
        sig_lvl: a.sig_lvl,
        permutations: a.permutations,
        min_size: a.min_size,
        alpha: alpha(a.alpha)?,
        ..Default::default()
    };
    cfg.divisive.validate().map_err(usage)?;
    if a.width == 0 {
        return Err(usage("--width must be >= 1"));
    }
    cfg.agglo_width = a.width;
    cfg.agglo_penalty = parse_penalty(&a.penalty, false)?;
    let rows = simgen::run_study(&cfg, &stream)?;
    Ok((simgen::report_csv(&rows), a.out))
}

fn series_csv(x: &TimeSeries, times: Option<&[f64]>) -> String {
    let mut header: Vec<String> = (1..=x.dim()).map(|j| format!("x{j}")).collect();
    if times.is_some() {
        header.insert(0, "t".into());
    }
    let mut out = header.join(",");
    out.push('\n');
    for (i, row) in x.rows().enumerate() {
        let mut cells: Vec<String> = row.iter().map(f64::to_string).collect();
        if let Some(t) = times {
            cells.insert(0, t[i].to_string());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
