use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "abflow",
    version,
    about = "Probability-current flow around a magnetic string",
    long_about = "Evaluate, analyze and render the probability current around an \
                  idealized magnetic string. Worker threads are taken from the \
                  ABFLOW_WORKERS environment variable."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Every field quantity at one point (--at x,y)
    Eval(Flags),
    /// Streamline portrait: level curves of the stream function
    Portrait(Flags),
    /// Stagnation point and vortex
    Stagnation(Flags),
    /// Homoclinic loop and unbounded separatrix branches
    Separatrix(Flags),
    /// Circulation around a circle (--at center, --radius)
    Circulation(Flags),
    /// Integrate a streamline from --start
    Trajectory(Flags),
    /// Numerical verification of the analytic identities
    Verify(Flags),
    /// Separatrix measurements over a list of flux parameters (--deltas)
    Sweep(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Portrait(_) => "portrait",
            Command::Stagnation(_) => "stagnation",
            Command::Separatrix(_) => "separatrix",
            Command::Circulation(_) => "circulation",
            Command::Trajectory(_) => "trajectory",
            Command::Verify(_) => "verify",
            Command::Sweep(_) => "sweep",
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Eval(f)
            | Command::Portrait(f)
            | Command::Stagnation(f)
            | Command::Separatrix(f)
            | Command::Circulation(f)
            | Command::Trajectory(f)
            | Command::Verify(f)
            | Command::Sweep(f) => f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
    All,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::All)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::All)
    }

    pub fn svg(self) -> bool {
        matches!(self, Format::Svg | Format::All)
    }
}

/// `x,y`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair(pub f64, pub f64);

/// `xmin,xmax,ymin,ymax`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxArg(pub [f64; 4]);

/// `NxM` cells
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridArg(pub usize, pub usize);

/// `v1,v2,...`
#[derive(Debug, Clone, PartialEq)]
pub struct ListArg(pub Vec<f64>);

/// Flags shared by every subcommand. All are optional here so that a
/// config file can fill the gaps before defaults apply.
#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Magnetic flux; converted to delta (conflicts with --delta)
    #[arg(long)]
    pub flux: Option<f64>,
    #[arg(long)]
    pub charge: Option<f64>,
    #[arg(long = "light-speed")]
    pub light_speed: Option<f64>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, value_name = "X,Y")]
    pub at: Option<Pair>,
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true, value_name = "XMIN,XMAX,YMIN,YMAX")]
    pub bbox: Option<BoxArg>,
    #[arg(long, value_parser = parse_grid, value_name = "NxM")]
    pub grid: Option<GridArg>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true, value_name = "V1,V2,...")]
    pub levels: Option<ListArg>,
    /// Add the separatrix level to the portrait
    #[arg(long)]
    pub separatrix: bool,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, value_name = "X,Y")]
    pub start: Option<Pair>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flux parameters for sweep
    #[arg(long, value_parser = parse_list, value_name = "D1,D2,...")]
    pub deltas: Option<ListArg>,
    /// Directory for CSV/JSON/SVG artifacts
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Accept delta > 1/2
    #[arg(long = "allow-any-delta")]
    pub allow_any_delta: bool,
    /// key=value file with defaults for any of the flags above
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

fn parse_numbers(s: &str, what: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("invalid number {t:?} in {what}"))
        })
        .collect()
}

pub fn parse_pair(s: &str) -> Result<Pair, String> {
    match parse_numbers(s, "point")?.as_slice() {
        [x, y] => Ok(Pair(*x, *y)),
        _ => Err(format!("expected x,y, got {s:?}")),
    }
}

pub fn parse_box(s: &str) -> Result<BoxArg, String> {
    match parse_numbers(s, "bounding box")?.as_slice() {
        &[a, b, c, d] => Ok(BoxArg([a, b, c, d])),
        _ => Err(format!("expected xmin,xmax,ymin,ymax, got {s:?}")),
    }
}

pub fn parse_grid(s: &str) -> Result<GridArg, String> {
    let (n, m) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM, got {s:?}"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid cell count {t:?} in grid"))
    };
    Ok(GridArg(parse(n)?, parse(m)?))
}

pub fn parse_list(s: &str) -> Result<ListArg, String> {
    if s.trim().is_empty() {
        return Err("empty list".to_string());
    }
    parse_numbers(s, "list").map(ListArg)
}

pub fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("expected a boolean, got {other:?}")),
    }
}
