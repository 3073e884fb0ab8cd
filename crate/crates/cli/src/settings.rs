//! Flag resolution: command-line flags, then a `key=value` config file,
//! then built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use abflow::field::{self, PhysicalConstants};
use abflow::{Bounds, FlowParams, Vec2};

use crate::args::{self, Flags, Format};
use crate::error::CliError;

pub const DEFAULT_BBOX: [f64; 4] = [-4.0, 4.0, -3.0, 3.0];
pub const DEFAULT_GRID: (usize, usize) = (400, 300);
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 512;
pub const DEFAULT_RADIUS: f64 = 1.0;
pub const DEFAULT_DELTAS: [f64; 5] = [0.5, 0.4, 0.3, 0.2, 0.1];

const KNOWN_KEYS: [&str; 23] = [
    "hbar",
    "mass",
    "k",
    "delta",
    "flux",
    "charge",
    "light-speed",
    "at",
    "bbox",
    "grid",
    "levels",
    "separatrix",
    "radius",
    "samples",
    "start",
    "tmax",
    "rtol",
    "atol",
    "seed",
    "deltas",
    "out",
    "format",
    "allow-any-delta",
];

/// Parse a `key = value` file. Blank lines and `#` comments are ignored;
/// keys may use `-` or `_`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", n + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key {key:?}",
                n + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub params: FlowParams,
    pub consts: PhysicalConstants,
    /// Flux corresponding to the resolved delta.
    pub flux: f64,
    pub at: Option<Vec2>,
    pub bbox: Bounds,
    pub grid: (usize, usize),
    pub levels: Option<Vec<f64>>,
    pub separatrix: bool,
    pub radius: f64,
    pub samples: usize,
    pub start: Option<Vec2>,
    pub tmax: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub seed: u64,
    pub deltas: Vec<f64>,
    pub allow_any_delta: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
}

struct Layer<'a> {
    config: &'a BTreeMap<String, String>,
}

impl Layer<'_> {
    fn get<T>(
        &self,
        flag: Option<T>,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.config.get(key) {
            Some(v) => parse(v)
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
            None => Ok(None),
        }
    }

    fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        Ok(self.get(None, key, args::parse_bool)?.unwrap_or(false))
    }
}

fn number<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim()
        .parse::<T>()
        .map_err(|_| format!("invalid value {s:?}"))
}

fn finite(s: &str) -> Result<f64, String> {
    number::<f64>(s).and_then(|v| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("value {s:?} is not finite"))
        }
    })
}

fn format_value(s: &str) -> Result<Format, String> {
    <Format as clap::ValueEnum>::from_str(s.trim(), true)
}

impl Settings {
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let config = match &flags.config {
            Some(path) => load_config(path)?,
            None => BTreeMap::new(),
        };
        Self::resolve_with(flags, &config)
    }

    pub fn resolve_with(
        flags: &Flags,
        config: &BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        let layer = Layer { config };
        let hbar = layer.get(flags.hbar, "hbar", finite)?.unwrap_or(1.0);
        let mass = layer.get(flags.mass, "mass", finite)?.unwrap_or(1.0);
        let k = layer.get(flags.k, "k", finite)?.unwrap_or(1.0);
        let charge = layer.get(flags.charge, "charge", finite)?.unwrap_or(1.0);
        let light_speed = layer
            .get(flags.light_speed, "light-speed", finite)?
            .unwrap_or(1.0);
        let consts = PhysicalConstants::new(charge, light_speed)?;
        let allow_any_delta = layer.switch(flags.allow_any_delta, "allow-any-delta")?;

        let delta = layer.get(flags.delta, "delta", finite)?;
        let flux = layer.get(flags.flux, "flux", finite)?;
        let delta = match (delta, flux) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "--delta and --flux both given; specify only one".to_string(),
                ))
            }
            (Some(d), None) => d,
            (None, Some(f)) => field::flux_to_delta(&consts, hbar, f)?,
            (None, None) => 0.5,
        };
        let params = if allow_any_delta {
            FlowParams::relaxed(hbar, mass, k, delta)?
        } else {
            FlowParams::new(hbar, mass, k, delta)?
        };
        let flux = field::delta_to_flux(&consts, hbar, delta)?;

        let point = |p: args::Pair| Vec2::new(p.0, p.1);
        let at = layer.get(flags.at, "at", args::parse_pair)?.map(point);
        let start = layer
            .get(flags.start, "start", args::parse_pair)?
            .map(point);
        let [xmin, xmax, ymin, ymax] = layer
            .get(flags.bbox, "bbox", args::parse_box)?
            .map_or(DEFAULT_BBOX, |b| b.0);
        let bbox = Bounds::new(xmin, xmax, ymin, ymax);
        if !bbox.is_valid() {
            return Err(CliError::Usage(format!(
                "bounding box must satisfy xmin < xmax and ymin < ymax, got {xmin},{xmax},{ymin},{ymax}"
            )));
        }
        let grid = layer
            .get(flags.grid, "grid", args::parse_grid)?
            .map_or(DEFAULT_GRID, |g| (g.0, g.1));
        let levels = layer
            .get(flags.levels.clone(), "levels", args::parse_list)?
            .map(|l| l.0);
        let deltas = layer
            .get(flags.deltas.clone(), "deltas", args::parse_list)?
            .map_or(DEFAULT_DELTAS.to_vec(), |l| l.0);

        Ok(Settings {
            params,
            consts,
            flux,
            at,
            bbox,
            grid,
            levels,
            separatrix: layer.switch(flags.separatrix, "separatrix")?,
            radius: layer
                .get(flags.radius, "radius", finite)?
                .unwrap_or(DEFAULT_RADIUS),
            samples: layer
                .get(flags.samples, "samples", number)?
                .unwrap_or(DEFAULT_SAMPLES),
            start,
            tmax: layer.get(flags.tmax, "tmax", finite)?,
            rtol: layer.get(flags.rtol, "rtol", finite)?,
            atol: layer.get(flags.atol, "atol", finite)?,
            seed: layer
                .get(flags.seed, "seed", number)?
                .unwrap_or(DEFAULT_SEED),
            deltas,
            allow_any_delta,
            out: layer.get(flags.out.clone(), "out", |s| Ok(PathBuf::from(s.trim())))?,
            format: layer
                .get(flags.format, "format", format_value)?
                .unwrap_or(Format::All),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(flags: Flags, config: &str) -> Result<Settings, CliError> {
        Settings::resolve_with(&flags, &parse_config(config).unwrap())
    }

    #[test]
    fn defaults() {
        let s = resolve(Flags::default(), "").unwrap();
        assert_eq!(s.params, FlowParams::natural(1.0, 0.5).unwrap());
        assert_eq!(s.bbox, Bounds::new(-4.0, 4.0, -3.0, 3.0));
        assert_eq!(s.grid, (400, 300));
        assert_eq!(s.seed, 42);
        assert_eq!(s.format, Format::All);
        assert!(!s.separatrix);
    }

    #[test]
    fn flags_beat_config_beat_defaults() {
        let flags = Flags {
            delta: Some(0.25),
            ..Flags::default()
        };
        let s = resolve(
            flags,
            "delta = 0.1\nk = 2 # comment\nseparatrix = true\ngrid=10x8",
        )
        .unwrap();
        assert_eq!(s.params.delta(), 0.25);
        assert_eq!(s.params.k(), 2.0);
        assert!(s.separatrix);
        assert_eq!(s.grid, (10, 8));
    }

    #[test]
    fn flux_sets_delta() {
        let flags = Flags {
            flux: Some(std::f64::consts::PI),
            ..Flags::default()
        };
        let s = resolve(flags, "").unwrap();
        assert!((s.params.delta() - 0.5).abs() < 1e-15);
        let both = Flags {
            flux: Some(1.0),
            delta: Some(0.1),
            ..Flags::default()
        };
        assert!(matches!(resolve(both, ""), Err(CliError::Usage(_))));
    }

    #[test]
    fn delta_bound_needs_opt_in() {
        let big = Flags {
            delta: Some(0.8),
            ..Flags::default()
        };
        assert!(resolve(big.clone(), "").is_err());
        assert!(resolve(big.clone(), "allow-any-delta = true").is_ok());
        let relaxed = Flags {
            allow_any_delta: true,
            ..big
        };
        assert!(resolve(relaxed, "").is_ok());
    }

    #[test]
    fn config_errors() {
        assert!(parse_config("bogus = 1").is_err());
        assert!(parse_config("k").is_err());
        assert!(resolve(Flags::default(), "k = abc").is_err());
        assert!(parse_config("light_speed = 2").is_ok());
    }
}
