use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use spinchain::scans::{linspace, DEFAULT_TOL};
use spinchain::separable::MinimizerOptions;
use spinchain::spectra::cache::ENV_CACHE_DIR;
use spinchain::{ChainSpec, Limits, SpinValue};

use crate::CliError;

/// Options shared by every command. All values are kept as text until
/// resolution so the flag and config-file paths go through one parser.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Spin quantum number, e.g. 1/2, 1, 3/2 or 1.5; comma-separated for scans.
    #[arg(long, global = true)]
    pub spin: Option<String>,
    /// Number of sites: "N", "a..b" (inclusive) or a comma-separated list.
    #[arg(long, global = true)]
    pub sites: Option<String>,
    /// Exchange coupling J: a value, a comma-separated list or "a:b:n".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub coupling: Option<String>,
    /// Temperature: a value, a comma-separated list or "a:b:n".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub temperature: Option<String>,
    /// Root-finding tolerance on temperatures.
    #[arg(long, global = true)]
    pub tol: Option<String>,
    /// Seed for the product-state minimizer restarts.
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Number of minimizer restarts.
    #[arg(long, global = true)]
    pub restarts: Option<String>,
    /// Directory for cached spectra (also SPINCHAIN_CACHE_DIR).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format: csv, json or svg-plot.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Use an open chain instead of a ring.
    #[arg(long, global = true)]
    pub open_chain: bool,
    /// File of key=value lines supplying defaults for the options above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    SvgPlot,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::SvgPlot => "svg-plot",
        })
    }
}

const KEYS: [&str; 11] =
    ["spin", "sites", "coupling", "temperature", "tol", "seed", "restarts", "cache-dir", "out", "format", "open-chain"];

/// Fully parsed options. List-valued fields are `None` when unset so each
/// command can apply its own default.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub spins: Option<Vec<SpinValue>>,
    pub sites: Option<Vec<usize>>,
    pub couplings: Option<Vec<f64>>,
    pub temperatures: Option<Vec<f64>>,
    pub tol: f64,
    pub seed: u64,
    pub restarts: usize,
    pub cache_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub periodic: bool,
    pub limits: Limits,
}

fn invalid(field: &str, message: impl fmt::Display) -> CliError {
    CliError::config(format!("{field}: {message}"))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("config {}: {e}", path.display())))?;
    let mut entries = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| invalid("config", format!("line {}: expected key=value", n + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(invalid("config", format!("line {}: unknown key {key:?}", n + 1)));
        }
        entries.insert(key, value.trim().to_string());
    }
    Ok(entries)
}

fn parse_f64(field: &str, text: &str) -> Result<f64, CliError> {
    let v: f64 = text.trim().parse().map_err(|_| invalid(field, format!("{text:?} is not a number")))?;
    if !v.is_finite() {
        return Err(invalid(field, format!("{text:?} is not finite")));
    }
    Ok(v)
}

/// A value, a comma-separated list, or `a:b:n` for `n` evenly spaced points.
pub fn parse_grid(field: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [a, b, n] => {
            let n: usize = n.trim().parse().map_err(|_| invalid(field, format!("{n:?} is not a point count")))?;
            if n == 0 {
                return Err(invalid(field, "grid needs at least one point"));
            }
            linspace(parse_f64(field, a)?, parse_f64(field, b)?, n)
        }
        [_] => text.split(',').map(|p| parse_f64(field, p)).collect::<Result<_, _>>()?,
        _ => return Err(invalid(field, format!("{text:?} is neither a list nor a:b:n"))),
    };
    Ok(values)
}

/// `N`, `a..b` (inclusive) or a comma-separated list.
pub fn parse_sites(text: &str) -> Result<Vec<usize>, CliError> {
    let one = |p: &str| -> Result<usize, CliError> {
        let v: usize = p.trim().parse().map_err(|_| invalid("sites", format!("{p:?} is not a site count")))?;
        if v < 2 {
            return Err(invalid("sites", format!("need at least 2 sites, got {v}")));
        }
        Ok(v)
    };
    if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (one(a)?, one(b.trim_start_matches('='))?);
        if a > b {
            return Err(invalid("sites", format!("empty range {text:?}")));
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(one).collect()
}

pub fn parse_spins(text: &str, limits: &Limits) -> Result<Vec<SpinValue>, CliError> {
    text.split(',')
        .map(|p| {
            let s: SpinValue = p.trim().parse().map_err(|e| invalid("spin", e))?;
            limits.check_spin(s).map_err(|e| invalid("spin", e))?;
            Ok(s)
        })
        .collect()
}

fn parse_format(text: &str) -> Result<Format, CliError> {
    match text.trim() {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        "svg-plot" | "svg" => Ok(Format::SvgPlot),
        other => Err(invalid("format", format!("{other:?} is not one of csv, json, svg-plot"))),
    }
}

fn parse_bool(field: &str, text: &str) -> Result<bool, CliError> {
    match text.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(invalid(field, format!("{other:?} is not a boolean"))),
    }
}

impl RunConfig {
    /// Precedence: flags, then the config file, then environment, then defaults.
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let pick = |flag: &Option<String>, key: &str| flag.clone().or_else(|| file.get(key).cloned());
        let limits = Limits::from_env();

        let spins = pick(&flags.spin, "spin").map(|t| parse_spins(&t, &limits)).transpose()?;
        let sites = pick(&flags.sites, "sites").map(|t| parse_sites(&t)).transpose()?;
        let couplings = pick(&flags.coupling, "coupling").map(|t| parse_grid("coupling", &t)).transpose()?;
        let temperatures =
            pick(&flags.temperature, "temperature").map(|t| parse_grid("temperature", &t)).transpose()?;
        if let Some(ts) = &temperatures {
            if let Some(bad) = ts.iter().find(|t| **t <= 0.0) {
                return Err(invalid("temperature", format!("must be positive, got {bad}")));
            }
        }
        let tol = pick(&flags.tol, "tol").map(|t| parse_f64("tol", &t)).transpose()?.unwrap_or(DEFAULT_TOL);
        if tol <= 0.0 {
            return Err(invalid("tol", format!("must be positive, got {tol}")));
        }
        let seed = pick(&flags.seed, "seed")
            .map(|t| t.trim().parse::<u64>().map_err(|_| invalid("seed", format!("{t:?} is not an unsigned integer"))))
            .transpose()?
            .unwrap_or(0);
        let restarts = pick(&flags.restarts, "restarts")
            .map(|t| t.trim().parse::<usize>().map_err(|_| invalid("restarts", format!("{t:?} is not a count"))))
            .transpose()?
            .unwrap_or(MinimizerOptions::default().restarts);
        if restarts == 0 {
            return Err(invalid("restarts", "must be at least 1"));
        }
        let cache_dir = flags
            .cache_dir
            .clone()
            .or_else(|| file.get("cache-dir").map(PathBuf::from))
            .or_else(|| std::env::var_os(ENV_CACHE_DIR).filter(|v| !v.is_empty()).map(PathBuf::from));
        let out = flags.out.clone().or_else(|| file.get("out").map(PathBuf::from));
        let format = pick(&flags.format, "format").map(|t| parse_format(&t)).transpose()?.unwrap_or(Format::Csv);
        let open_chain = if flags.open_chain {
            true
        } else {
            file.get("open-chain").map(|t| parse_bool("open-chain", t)).transpose()?.unwrap_or(false)
        };

        Ok(RunConfig {
            spins,
            sites,
            couplings,
            temperatures,
            tol,
            seed,
            restarts,
            cache_dir,
            out,
            format,
            periodic: !open_chain,
            limits,
        })
    }

    pub fn minimizer(&self) -> MinimizerOptions {
        MinimizerOptions { restarts: self.restarts, seed: self.seed, ..MinimizerOptions::default() }
    }

    pub fn spin(&self) -> Result<SpinValue, CliError> {
        match self.spins.as_deref() {
            None => Ok(SpinValue::HALF),
            Some([s]) => Ok(*s),
            Some(_) => Err(invalid("spin", "this command takes a single spin")),
        }
    }

    pub fn coupling(&self) -> Result<f64, CliError> {
        match self.couplings.as_deref() {
            None => Ok(1.0),
            Some([j]) => Ok(*j),
            Some(_) => Err(invalid("coupling", "this command takes a single coupling")),
        }
    }

    pub fn site_list(&self) -> Vec<usize> {
        self.sites.clone().unwrap_or_else(|| vec![2])
    }

    pub fn single_sites(&self) -> Result<usize, CliError> {
        match self.site_list().as_slice() {
            [l] => Ok(*l),
            _ => Err(invalid("sites", "this command takes a single site count")),
        }
    }

    pub fn chain(&self, sites: usize) -> Result<ChainSpec, CliError> {
        ChainSpec::with_boundary(self.spin()?, sites, self.coupling()?, self.periodic).map_err(CliError::from)
    }

    pub fn required_temperatures(&self, command: &str) -> Result<Vec<f64>, CliError> {
        self.temperatures.clone().ok_or_else(|| invalid("temperature", format!("required by {command}")))
    }
}
