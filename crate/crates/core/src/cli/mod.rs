//! Command-line front end: `run`, `sweep`, `advise`, `check` and `trace`.
//!
//! Flag errors exit with status 2 and usage text; runtime failures exit
//! with status 1.

pub mod check;
pub mod point;
pub mod report;
pub mod svg;
pub mod sweep;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use thiserror::Error;

use crate::analysis::{merge_advice, padding_advice, predict_stream_class, AdvisorReport};
use crate::hostbench::HostError;
use crate::memmodel::{MemConfig, MemError};
use crate::patterns::{
    block_geometry, AccessStream, ArrayConfig, PatternError, PatternKind, VectorSpec,
};

use check::{run_check, AnchorFile, Compare};
use point::{Backend, HostOptions, RunPoint, DEFAULT_FREQ_MHZ};
use report::{write_rows, Format, ReportRow};
use sweep::SweepSpec;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Output(#[from] io::Error),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Mem(#[from] MemError),
    #[error(transparent)]
    Host(#[from] HostError),
    #[error("checksum verification failed: {source}")]
    Checksum {
        row: Box<ReportRow>,
        source: HostError,
    },
    #[error("point {index}: {source}")]
    Point { index: usize, source: Box<CliError> },
    #[error("{0} anchor(s) failed")]
    CheckFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "membench",
    version,
    about = "Vector memory-access benchmarks on a banked memory model or host memory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute one configuration and print a result row
    Run(RunArgs),
    /// Execute the cross product described by a sweep file
    Sweep(SweepArgs),
    /// Recommend padding and array merges
    Advise(AdviseArgs),
    /// Compare the model against reference anchors
    Check(CheckArgs),
    /// Export the per-lane access trace of a pattern as CSV
    Trace(TraceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PatternArgs {
    /// Blocking pattern: 1d, 15d or 25d
    #[arg(long, default_value = "1d")]
    pub pattern: PatternKind,
    /// Array configuration, e.g. R1W1
    #[arg(long, default_value = "R1W1")]
    pub config: ArrayConfig,
    /// Lanes per access
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub vector: u32,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub elem_bytes: u32,
    /// Overlap half-width in elements
    #[arg(long, default_value_t = 0)]
    pub halo: u64,
    /// Block length in elements [default: 1024, 256 for 25d]
    #[arg(long)]
    pub bsize: Option<u64>,
    /// Leading pad in elements
    #[arg(long, default_value_t = 0)]
    pub pad: u64,
    #[arg(long, default_value_t = 0)]
    pub row_pad: u64,
    #[arg(long, default_value_t = 0)]
    pub plane_pad: u64,
    /// Target bytes per array [default: 16 MiB sim, 256 MiB host]
    #[arg(long)]
    pub size_bytes: Option<u64>,
    /// Explicit extents x[,y[,z]] in elements
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<u64>>,
}

impl PatternArgs {
    fn point(&self) -> RunPoint {
        RunPoint {
            pattern: self.pattern,
            config: self.config,
            lanes: self.vector,
            elem_bytes: self.elem_bytes,
            halo: self.halo,
            pad: self.pad,
            row_pad: self.row_pad,
            plane_pad: self.plane_pad,
            bsize: self.bsize,
            size_bytes: self.size_bytes,
            dims: self.dims.clone(),
            ..RunPoint::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub pattern: PatternArgs,
    #[arg(long, value_enum, default_value_t = Backend::Sim)]
    pub backend: Backend,
    /// Kernel clock in MHz
    #[arg(long, default_value_t = DEFAULT_FREQ_MHZ)]
    pub freq: f64,
    /// Interleave addresses across banks (default)
    #[arg(long, overrides_with = "no_interleave")]
    pub interleave: bool,
    /// Map each port to one bank
    #[arg(long)]
    pub no_interleave: bool,
    /// JSON file overriding memory model parameters
    #[arg(long)]
    pub mem_config: Option<PathBuf>,
    /// Read/write turnaround in controller cycles
    #[arg(long)]
    pub turnaround: Option<u32>,
    /// Measured repetitions (host)
    #[arg(long, default_value_t = HostOptions::default().repetitions)]
    pub reps: u32,
    /// Unmeasured repetitions before timing (host)
    #[arg(long, default_value_t = HostOptions::default().warmup)]
    pub warmup: u32,
    /// Worker threads (host, sequential 1D only)
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Non-temporal stores (host)
    #[arg(long)]
    pub streaming_stores: bool,
    /// Pin the measuring thread to a core (host, Linux)
    #[arg(long)]
    pub pin_core: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Omit the CSV header
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep description (JSON)
    pub spec: PathBuf,
    /// Result file; stdout when absent
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write a chart of the sweep; requires a "chart" entry in the spec
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AdviseArgs {
    /// Overlap half-width in elements
    #[arg(long)]
    pub halo: Option<u64>,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub vector: u32,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub elem_bytes: u32,
    #[arg(long, default_value_t = crate::patterns::DEFAULT_BSIZE)]
    pub bsize: u64,
    /// Read array count for merge advice
    #[arg(long)]
    pub reads: Option<u32>,
    /// Write array count for merge advice
    #[arg(long)]
    pub writes: Option<u32>,
    /// Also classify a generated pattern with these parameters
    #[arg(long)]
    pub pattern: Option<PatternKind>,
    /// Leading pad used for pattern classification
    #[arg(long, default_value_t = 0)]
    pub pad: u64,
    /// Extents for pattern classification
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Anchor file; the bundled anchors when absent
    #[arg(long)]
    pub anchors: Option<PathBuf>,
    /// Print the report as JSON
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub pattern: PatternArgs,
    /// Kernel cycles to export
    #[arg(long, default_value_t = 1024)]
    pub max_cycles: u64,
    /// Output file; stdout when absent
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn open_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Io {
                path: p.display().to_string(),
                source: e,
            }
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_mem(args: &RunArgs) -> Result<MemConfig, CliError> {
    let mut mem = match &args.mem_config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io {
                path: p.display().to_string(),
                source: e,
            })?;
            let de = &mut serde_json::Deserializer::from_str(&text);
            serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
                path: format!("{}: {}", p.display(), e.path()),
                message: e.into_inner().to_string(),
            })?
        }
        None => MemConfig::default(),
    };
    if args.no_interleave {
        mem.interleave = false;
    } else if args.interleave {
        mem.interleave = true;
    }
    if let Some(t) = args.turnaround {
        mem.rw_turnaround_ctrl_cycles = t;
    }
    Ok(mem)
}

pub fn cmd_run(args: &RunArgs) -> Result<ReportRow, CliError> {
    if !(args.freq.is_finite() && args.freq > 0.0) {
        return Err(CliError::Usage(format!(
            "--freq must be positive, got {}",
            args.freq
        )));
    }
    let point = RunPoint {
        backend: args.backend,
        freq_mhz: args.freq,
        mem: load_mem(args)?,
        host: HostOptions {
            repetitions: args.reps,
            warmup: args.warmup,
            threads: args.threads,
            streaming_stores: args.streaming_stores,
            pin_core: args.pin_core,
        },
        ..args.pattern.point()
    };
    point.execute()
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Vec<ReportRow>, CliError> {
    let spec = SweepSpec::load(&args.spec)?;
    if args.svg.is_some() && spec.chart.is_none() {
        return Err(CliError::Usage(
            "--svg needs a \"chart\" entry in the sweep file".into(),
        ));
    }
    let points = spec.points()?;
    eprintln!("sweep: {} points", points.len());
    let rows = sweep::run_points(&points)?;
    let mut out = open_out(args.out.as_ref())?;
    write_rows(&mut out, &rows, args.format, true)?;
    if let (Some(path), Some(chart)) = (&args.svg, &spec.chart) {
        let svg = sweep::chart(&spec, chart, &points, &rows).render();
        std::fs::write(path, svg).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
    }
    Ok(rows)
}

/// Reports produced by `advise`, in print order.
pub fn cmd_advise(args: &AdviseArgs) -> Result<Vec<(String, AdvisorReport)>, CliError> {
    let vector = VectorSpec::new(args.vector, args.elem_bytes)?;
    let bus_word = MemConfig::default().bus_word_bytes();
    let merge_requested = args.reads.is_some() || args.writes.is_some();
    let mut out = Vec::new();
    if args.halo.is_some() || !merge_requested {
        let halo = args.halo.unwrap_or(0);
        let block = block_geometry(args.bsize, halo).map_err(|e| CliError::Usage(e.to_string()))?;
        let r = padding_advice(halo, vector, block.csize(), bus_word);
        let text = format!(
            "padding: halo {halo}, V{}, csize {}: pad {} -> {} alignment ({})",
            args.vector,
            block.csize(),
            r.pad,
            r.class,
            r.rule
        );
        out.push((text, r));
    }
    if merge_requested {
        let arrays = ArrayConfig::new(args.reads.unwrap_or(0), args.writes.unwrap_or(0))
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let r = merge_advice(arrays, args.elem_bytes);
        let text = match &r.merge {
            Some(m) if m.merged != arrays => format!(
                "merge: {arrays} -> {} with {} B read structs and {} B write structs ({})",
                m.merged, m.read_struct_bytes, m.write_struct_bytes, r.rule
            ),
            Some(_) => format!("merge: {arrays} is already minimal ({})", r.rule),
            None => format!(
                "merge: no straightforward merge for {arrays}; array counts must be 0 or a power of two ({})",
                r.rule
            ),
        };
        out.push((text, r));
    }
    Ok(out)
}

fn advise_prediction(args: &AdviseArgs) -> Result<Option<String>, CliError> {
    let Some(pattern) = args.pattern else {
        return Ok(None);
    };
    let point = RunPoint {
        pattern,
        lanes: args.vector,
        elem_bytes: args.elem_bytes,
        halo: args.halo.unwrap_or(0),
        pad: args.pad,
        bsize: Some(args.bsize),
        dims: args.dims.clone(),
        ..RunPoint::default()
    };
    let spec = point.pattern_spec()?;
    let p = predict_stream_class(&spec, &MemConfig::default());
    Ok(Some(serde_json::to_string(&p).map_err(io::Error::other)?))
}

pub fn cmd_trace(args: &TraceArgs) -> Result<(), CliError> {
    let spec = args.pattern.point().pattern_spec()?;
    let stream = AccessStream::new(spec)?;
    let out = open_out(args.out.as_ref())?;
    stream
        .write_trace(out, Some(args.max_cycles))
        .map_err(io::Error::other)?;
    Ok(())
}

fn compare_symbol(c: Compare) -> &'static str {
    match c {
        Compare::Within => "~",
        Compare::AtMost => "<=",
        Compare::AtLeast => ">=",
    }
}

pub fn cmd_check(args: &CheckArgs) -> Result<check::CheckReport, CliError> {
    let file = match &args.anchors {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io {
                path: p.display().to_string(),
                source: e,
            })?;
            AnchorFile::from_json(&text)?
        }
        None => AnchorFile::bundled(),
    };
    run_check(&file)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let header = !args.no_header;
            match cmd_run(&args) {
                Ok(row) => write_rows(io::stdout().lock(), &[row], args.format, header)?,
                Err(CliError::Checksum { row, source }) => {
                    write_rows(io::stdout().lock(), &[*row.clone()], args.format, header)?;
                    return Err(CliError::Checksum { row, source });
                }
                Err(e) => return Err(e),
            }
        }
        Command::Sweep(args) => {
            cmd_sweep(&args)?;
        }
        Command::Advise(args) => {
            let reports = cmd_advise(&args)?;
            let prediction = advise_prediction(&args)?;
            let mut out = io::stdout().lock();
            for (text, _) in &reports {
                writeln!(out, "{text}")?;
            }
            for (_, r) in &reports {
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string(r).map_err(io::Error::other)?
                )?;
            }
            if let Some(p) = prediction {
                writeln!(out, "{p}")?;
            }
        }
        Command::Check(args) => {
            let report = cmd_check(&args)?;
            let mut out = io::stdout().lock();
            if args.json {
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(io::Error::other)?
                )?;
            } else {
                for o in &report.outcomes {
                    writeln!(
                        out,
                        "{} {:<34} computed {:.6} {} {} (tol {})",
                        if o.pass { "PASS" } else { "FAIL" },
                        o.name,
                        o.computed,
                        compare_symbol(o.compare),
                        o.value,
                        o.tolerance
                    )?;
                }
                if !report.unknown.is_empty() {
                    writeln!(out, "unknown anchors: {}", report.unknown.join(", "))?;
                }
                if !report.missing.is_empty() {
                    writeln!(out, "missing anchors: {}", report.missing.join(", "))?;
                }
            }
            if !report.passed() {
                let failed = report.outcomes.iter().filter(|o| !o.pass).count()
                    + report.missing.len()
                    + report.unknown.len();
                return Err(CliError::CheckFailed(failed));
            }
        }
        Command::Trace(args) => cmd_trace(&args)?,
    }
    Ok(())
}

fn usage_text(cli_args: &[String]) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let sub = cli_args.get(1).cloned().unwrap_or_default();
    match cmd.find_subcommand_mut(&sub) {
        Some(s) => s.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

/// Parse `args` (including the program name) and run.
pub fn main_with_args(args: Vec<String>) -> ExitCode {
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let rendered = e.render().to_string();
            if e.use_stderr() && !rendered.contains("Usage:") {
                eprintln!("\n{}", usage_text(&args));
            }
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // reader went away, e.g. `| head`
        Err(CliError::Output(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}", usage_text(&args));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn main() -> ExitCode {
    main_with_args(std::env::args().collect())
}
