//! Run configuration, commands and output.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use meanfol::foliation::{build_configuration, ConfigError, ConfigOptions, Seeding};
use meanfol::geometry::Foliation;
use meanfol::liecartan::fiber_equilibria;
use meanfol::singularities::find_singularities;
use meanfol::{catalog, SurfaceDef, Tolerances};
use rayon::prelude::*;

use crate::export::{self, Plot};
use crate::report::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Config(String),
    #[error("degenerate surface: {0}")]
    Degenerate(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Degenerate(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceSource {
    File(PathBuf),
    /// Catalog entry such as `lifted_ellipsoid(1, 1.2, 1.5)`.
    Catalog(String),
}

impl SurfaceSource {
    /// A path to an existing file, otherwise a catalog name.
    pub fn from_arg(s: &str) -> Self {
        if Path::new(s).is_file() {
            SurfaceSource::File(PathBuf::from(s))
        } else {
            SurfaceSource::Catalog(s.to_string())
        }
    }

    pub fn label(&self) -> String {
        match self {
            SurfaceSource::File(p) => p.display().to_string(),
            SurfaceSource::Catalog(s) => s.clone(),
        }
    }

    pub fn load(&self) -> Result<SurfaceDef, CliError> {
        match self {
            SurfaceSource::File(p) => {
                let src = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                SurfaceDef::parse(&src).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))
            }
            SurfaceSource::Catalog(s) => catalog::by_name(s).map_err(|e| CliError::Parse(e.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Classify,
    Portrait,
    Cycles,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Portrait => "portrait",
            Command::Cycles => "cycles",
        }
    }

    pub fn default_formats(self) -> Vec<Format> {
        match self {
            Command::Portrait => vec![Format::Svg, Format::Csv],
            _ => vec![Format::Json],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub surface: SurfaceSource,
    /// Cells per side of the singularity search grid.
    pub grid: usize,
    pub tolerances: Vec<(String, f64)>,
    pub seeding: Seeding,
    pub out: Option<PathBuf>,
    /// Empty means the command's defaults.
    pub formats: Vec<Format>,
    pub workers: Option<usize>,
    pub perturb: bool,
}

pub const MIN_GRID: usize = 16;

impl RunConfig {
    pub fn new(surface: SurfaceSource) -> Self {
        RunConfig {
            surface,
            grid: 64,
            tolerances: Vec::new(),
            seeding: Seeding::Grid(12),
            out: None,
            formats: Vec::new(),
            workers: None,
            perturb: false,
        }
    }

    /// Validated tolerances with all overrides applied.
    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        if self.grid < MIN_GRID {
            return Err(CliError::Config(format!("grid resolution must be at least {MIN_GRID}, got {}", self.grid)));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        let mut t = Tolerances::default();
        for (k, v) in &self.tolerances {
            t.set(k, *v).map_err(CliError::Config)?;
        }
        Ok(t)
    }

    fn options(&self, cycles: bool) -> ConfigOptions {
        ConfigOptions {
            grid: self.grid,
            seeding: self.seeding.clone(),
            cycles,
        }
    }
}

/// `key=value`.
pub fn parse_tolerance(s: &str) -> Result<(String, f64), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("expected key=value, got `{s}`")))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("tolerance `{}` has non-numeric value `{}`", k.trim(), v.trim())))?;
    Ok((k.trim().to_string(), v))
}

/// `SxS`, `none`, or an explicit list `u,v;u,v;...`.
pub fn parse_seeds(s: &str) -> Result<Seeding, CliError> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("none") {
        return Ok(Seeding::None);
    }
    if let Some((a, b)) = s.split_once(['x', 'X']) {
        let a: usize = a.trim().parse().map_err(|_| CliError::Config(format!("bad seed grid `{s}`")))?;
        let b: usize = b.trim().parse().map_err(|_| CliError::Config(format!("bad seed grid `{s}`")))?;
        if a != b || a == 0 {
            return Err(CliError::Config(format!("seed grid must be square and non-empty, got `{s}`")));
        }
        return Ok(Seeding::Grid(a));
    }
    let mut pts = Vec::new();
    for pair in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (u, v) = pair
            .split_once(',')
            .ok_or_else(|| CliError::Config(format!("bad seed point `{pair}`")))?;
        let u: f64 = u.trim().parse().map_err(|_| CliError::Config(format!("bad seed point `{pair}`")))?;
        let v: f64 = v.trim().parse().map_err(|_| CliError::Config(format!("bad seed point `{pair}`")))?;
        pts.push([u, v]);
    }
    Ok(Seeding::List(pts))
}

/// Result of a command: the report and what a portrait would draw.
#[derive(Clone, Debug)]
pub struct Run {
    pub report: Report,
    pub plot: Plot,
}

fn degenerate() -> CliError {
    CliError::Degenerate("every point is singular; the principal mean configuration is undefined".into())
}

/// Singularities with their fiber equilibria.
pub fn cmd_classify(cfg: &RunConfig) -> Result<Run, CliError> {
    let tol = cfg.tolerances()?;
    let surface = cfg.surface.load()?;
    let scan = find_singularities(&surface, cfg.grid, &tol);
    if scan.globally_degenerate {
        return Err(degenerate());
    }
    let equilibria: Vec<_> = scan
        .singularities
        .par_iter()
        .map(|s| fiber_equilibria(&surface, s.location, &tol).map_err(|e| e.to_string()))
        .collect();
    let mut report = Report::new(Command::Classify.name(), &cfg.surface.label(), &surface, cfg.grid, &tol);
    report.set_scan(&scan, &equilibria);
    Ok(Run {
        report,
        plot: Plot::from_scan(*surface.domain(), &scan),
    })
}

fn configure(cmd: Command, cfg: &RunConfig, cycles: bool) -> Result<Run, CliError> {
    let tol = cfg.tolerances()?;
    let surface = cfg.surface.load()?;
    let conf = build_configuration(&surface, &cfg.options(cycles), &tol).map_err(|e| match e {
        ConfigError::GloballyDegenerate => degenerate(),
    })?;
    let mut report = Report::new(cmd.name(), &cfg.surface.label(), &surface, cfg.grid, &tol);
    report.set_configuration(&conf, cfg.perturb);
    Ok(Run {
        report,
        plot: Plot::from_configuration(*surface.domain(), &conf),
    })
}

/// Singularities, separatrices and seeded leaves of both foliations.
pub fn cmd_portrait(cfg: &RunConfig) -> Result<Run, CliError> {
    configure(Command::Portrait, cfg, false)
}

/// Full configuration with cycles and their holonomy.
pub fn cmd_cycles(cfg: &RunConfig) -> Result<Run, CliError> {
    configure(Command::Cycles, cfg, true)
}

/// Runs `cmd` on a pool of `cfg.workers` threads.
pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<Run, CliError> {
    if cfg.perturb && cmd != Command::Cycles {
        return Err(CliError::Config("--perturb applies to the cycles command".into()));
    }
    let run = || match cmd {
        Command::Classify => cmd_classify(cfg),
        Command::Portrait => cmd_portrait(cfg),
        Command::Cycles => cmd_cycles(cfg),
    };
    match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(run),
        None => run(),
    }
}

pub fn to_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes the requested formats. Without `--out`, JSON goes to `stdout`
/// and files to the working directory.
pub fn emit(cmd: Command, cfg: &RunConfig, run: &Run, stdout: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    let formats = if cfg.formats.is_empty() { cmd.default_formats() } else { cfg.formats.clone() };
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    if cfg.out.is_some() {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    let mut written = Vec::new();
    let mut seen = Vec::new();
    for f in formats {
        if seen.contains(&f) {
            continue;
        }
        seen.push(f);
        match f {
            Format::Json => {
                let json = to_json(&run.report);
                if cfg.out.is_some() {
                    let p = dir.join("report.json");
                    write_file(&p, &json)?;
                    written.push(p);
                } else {
                    stdout.write_all(json.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
                }
            }
            Format::Svg => {
                for fol in [Foliation::Minimal, Foliation::Maximal] {
                    let p = dir.join(format!("portrait_{}.svg", fol.name()));
                    write_file(&p, &export::svg(&run.plot, fol))?;
                    written.push(p);
                }
            }
            Format::Csv => {
                let p = dir.join("polylines.csv");
                write_file(&p, &export::csv(&run.plot).map_err(|e| CliError::Io(e.to_string()))?)?;
                written.push(p);
            }
        }
    }
    Ok(written)
}

#[derive(Debug, Parser)]
#[command(name = "meanfol", version, about = "Principal mean curvature configurations of surfaces in R^4")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Locate and classify singularities.
    Classify(RunArgs),
    /// Draw both foliations with singularities and separatrices.
    Portrait(RunArgs),
    /// Find cycles and compute their holonomy.
    Cycles(RunArgs),
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Surface file or catalog entry, e.g. `lifted_ellipsoid(1, 1.2, 1.5)`.
    #[arg(long)]
    pub surface: String,
    /// Cells per side of the singularity grid (at least 16).
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Seeds: `SxS`, `none`, or `u,v;u,v;...`.
    #[arg(long, default_value = "12x12")]
    pub seeds: String,
    /// Tolerance override `key=value`, repeatable.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    pub tol: Vec<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub workers: Option<usize>,
    /// `delta=auto`: report the holonomy derivative along δ = −τ H̃₁.
    #[arg(long)]
    pub perturb: Option<String>,
    /// Output format, repeatable.
    #[arg(long = "format", value_enum)]
    pub format: Vec<Format>,
}

impl RunArgs {
    pub fn to_config(&self) -> Result<RunConfig, CliError> {
        let perturb = match self.perturb.as_deref().map(str::trim) {
            None => false,
            Some("delta=auto") => true,
            Some(other) => return Err(CliError::Config(format!("unsupported perturbation `{other}`; expected delta=auto"))),
        };
        Ok(RunConfig {
            surface: SurfaceSource::from_arg(&self.surface),
            grid: self.grid,
            tolerances: self.tol.iter().map(|t| parse_tolerance(t)).collect::<Result<_, _>>()?,
            seeding: parse_seeds(&self.seeds)?,
            out: self.out.clone(),
            formats: self.format.clone(),
            workers: self.workers,
            perturb,
        })
    }
}

/// Parses `args`, runs the command and writes its outputs. Returns the
/// process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    let (cmd, args) = match &cli.command {
        CliCommand::Classify(a) => (Command::Classify, a),
        CliCommand::Portrait(a) => (Command::Portrait, a),
        CliCommand::Cycles(a) => (Command::Cycles, a),
    };
    let start = std::time::Instant::now();
    let result = args
        .to_config()
        .and_then(|cfg| execute(cmd, &cfg).and_then(|run| emit(cmd, &cfg, &run, stdout)));
    match result {
        Ok(files) => {
            for f in files {
                let _ = writeln!(stderr, "wrote {}", f.display());
            }
            let _ = writeln!(stderr, "{} finished in {:.3} s", cmd.name(), start.elapsed().as_secs_f64());
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
