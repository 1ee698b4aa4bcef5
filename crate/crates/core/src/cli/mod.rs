//! The experiment runner behind the `heatpot` binary.
//!
//! Every subcommand writes `<name>.csv` (and, for most, `<name>.svg`) into
//! the output directory and exits 0 when all in-run tolerances hold, 1 when
//! one fails or the computation errors, and 2 on a configuration or shape
//! file error. Values from `--config` override command-line flags.

mod experiments;
mod svg;
mod table;

pub use svg::Plot;
pub use table::{Cell, Table};

use crate::error::Error;
use crate::geometry::{load_shape, BoundaryMap};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

/// Exit status of a passing run.
pub const EXIT_PASS: i32 = 0;
/// Exit status when a tolerance fails or the computation errors.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for configuration and shape-file errors.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "heatpot", version, about = "Numerical checks for layer heat potentials on planar curves")]
struct Cli {
    #[command(subcommand)]
    experiment: Experiment,
    #[command(flatten)]
    flags: Flags,
}

/// The experiments, one per subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Experiment {
    /// Mass of the planar Gaussian by tensor trapezoid.
    KernelCheck,
    /// One-sided limits against the ±½μ jump relations.
    JumpTest,
    /// Double layer of the constant density against the disk heat flow.
    DlpIdentity,
    /// Weak pulled-back heat residuals on the collar shells.
    PullbackWeak,
    /// Residuals of the transmission problem for both layer kinds.
    Transmission,
    /// Energy balance on the collar with a negative control.
    Energy,
    /// Finite-difference shape derivatives of the boundary operators.
    ShapeSweep,
    /// Holder estimator sanity and operator norm ratios.
    Norms,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::KernelCheck,
        Experiment::JumpTest,
        Experiment::DlpIdentity,
        Experiment::PullbackWeak,
        Experiment::Transmission,
        Experiment::Energy,
        Experiment::ShapeSweep,
        Experiment::Norms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::KernelCheck => "kernel-check",
            Experiment::JumpTest => "jump-test",
            Experiment::DlpIdentity => "dlp-identity",
            Experiment::PullbackWeak => "pullback-weak",
            Experiment::Transmission => "transmission",
            Experiment::Energy => "energy",
            Experiment::ShapeSweep => "shape-sweep",
            Experiment::Norms => "norms",
        }
    }

    /// Grid and parameter defaults, sized to finish in seconds.
    fn defaults(self) -> ExperimentConfig {
        let base = ExperimentConfig {
            experiment: self,
            shape: None,
            n: 64,
            m: 64,
            t_final: 1.0,
            alpha: 0.5,
            delta: 0.3,
            seed: 0,
            out: PathBuf::from("heatpot-out"),
        };
        match self {
            Experiment::KernelCheck | Experiment::JumpTest => base,
            Experiment::DlpIdentity => ExperimentConfig { n: 128, m: 128, ..base },
            Experiment::PullbackWeak => ExperimentConfig { delta: 0.2, ..base },
            Experiment::Transmission => ExperimentConfig { m: 32, ..base },
            Experiment::Energy => ExperimentConfig { n: 128, ..base },
            Experiment::ShapeSweep => ExperimentConfig { n: 16, m: 8, ..base },
            Experiment::Norms => ExperimentConfig { n: 16, m: 8, ..base },
        }
    }
}

#[derive(Debug, Default, Args)]
struct Flags {
    /// Shape file with trigonometric coefficients of the boundary map.
    #[arg(long, global = true)]
    shape: Option<PathBuf>,
    /// Spatial nodes on the reference circle (even, at least 8).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Time steps (at least 2).
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Final time.
    #[arg(long, global = true)]
    t_final: Option<f64>,
    /// Holder exponent in (0, 1).
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Collar half-width.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Seed for random densities and pair sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML file whose values override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub shape: Option<PathBuf>,
    pub n: usize,
    pub m: usize,
    pub t_final: f64,
    pub alpha: f64,
    pub delta: f64,
    pub seed: u64,
    pub out: PathBuf,
}

/// A configuration problem tied to one key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub msg: String,
}

impl ConfigError {
    fn new(key: &str, msg: impl Into<String>) -> Self {
        Self { key: key.into(), msg: msg.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config: {}: {}", self.key, self.msg)
    }
}

pub const CONFIG_KEYS: [&str; 8] = ["shape", "n", "m", "t_final", "alpha", "delta", "seed", "out"];

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 8 || !self.n.is_multiple_of(2) {
            return Err(ConfigError::new("n", format!("must be even and at least 8, got {}", self.n)));
        }
        if self.m < 2 {
            return Err(ConfigError::new("m", format!("must be at least 2, got {}", self.m)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(ConfigError::new("t_final", format!("must be positive, got {}", self.t_final)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::new("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(ConfigError::new("delta", format!("must be positive, got {}", self.delta)));
        }
        Ok(())
    }

    /// Applies the keys of a TOML table. Relative paths resolve against `base`.
    pub fn apply_toml(&mut self, text: &str, base: &Path) -> Result<(), ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let msg = e.message().replace('\n', " ");
            ConfigError::new("config", format!("not valid TOML: {msg}"))
        })?;
        for (key, value) in &table {
            let uint = || {
                value
                    .as_integer()
                    .and_then(|v| u64::try_from(v).ok())
                    .ok_or_else(|| ConfigError::new(key, "expected a non-negative integer"))
            };
            let float = || {
                value
                    .as_float()
                    .or_else(|| value.as_integer().map(|v| v as f64))
                    .ok_or_else(|| ConfigError::new(key, "expected a number"))
            };
            let path = || {
                value.as_str().map(|s| base.join(s)).ok_or_else(|| ConfigError::new(key, "expected a string"))
            };
            match key.as_str() {
                "shape" => self.shape = Some(path()?),
                "n" => self.n = uint()? as usize,
                "m" => self.m = uint()? as usize,
                "t_final" => self.t_final = float()?,
                "alpha" => self.alpha = float()?,
                "delta" => self.delta = float()?,
                "seed" => self.seed = uint()?,
                "out" => self.out = path()?,
                _ => return Err(ConfigError::new(key, format!("unknown key (expected one of {})", CONFIG_KEYS.join(", ")))),
            }
        }
        Ok(())
    }

    fn resolve(experiment: Experiment, flags: &Flags) -> Result<Self, ConfigError> {
        let mut c = experiment.defaults();
        if flags.shape.is_some() {
            c.shape = flags.shape.clone();
        }
        c.n = flags.n.unwrap_or(c.n);
        c.m = flags.m.unwrap_or(c.m);
        c.t_final = flags.t_final.unwrap_or(c.t_final);
        c.alpha = flags.alpha.unwrap_or(c.alpha);
        c.delta = flags.delta.unwrap_or(c.delta);
        c.seed = flags.seed.unwrap_or(c.seed);
        if let Some(out) = &flags.out {
            c.out = out.clone();
        }
        if let Some(path) = &flags.config {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
            let base = path.parent().unwrap_or(Path::new(""));
            c.apply_toml(&text, base)?;
        }
        c.validate()?;
        if experiment == Experiment::DlpIdentity && c.shape.is_some() {
            return Err(ConfigError::new("shape", "dlp-identity runs on the unit circle and takes no shape"));
        }
        Ok(c)
    }

    /// Loads the configured shape file, if any.
    pub fn load_shape(&self) -> crate::Result<Option<BoundaryMap>> {
        self.shape.as_deref().map(load_shape).transpose()
    }
}

/// What an experiment produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub plot: Option<Plot>,
    pub passed: bool,
    /// One-line summary printed to stdout.
    pub summary: String,
}

/// Runs the experiment on an already loaded shape and writes its artifacts.
pub fn execute(cfg: &ExperimentConfig, shape: Option<&BoundaryMap>) -> Result<Outcome, Error> {
    let outcome = experiments::run(cfg, shape)?;
    std::fs::create_dir_all(&cfg.out)?;
    let name = cfg.experiment.name();
    std::fs::write(cfg.out.join(format!("{name}.csv")), outcome.table.to_csv())?;
    if let Some(plot) = &outcome.plot {
        std::fs::write(cfg.out.join(format!("{name}.svg")), plot.to_svg())?;
    }
    Ok(outcome)
}

/// Parses the arguments, runs one experiment and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match ExperimentConfig::resolve(cli.experiment, &cli.flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("heatpot: {e}");
            return EXIT_CONFIG;
        }
    };
    // any problem with the shape file is a configuration error
    let shape = match cfg.load_shape() {
        Ok(s) => s,
        Err(Error::ShapeFile { key, msg }) => {
            eprintln!("heatpot: shape file: {key}: {msg}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("heatpot: shape file: shape: {e}");
            return EXIT_CONFIG;
        }
    };
    match execute(&cfg, shape.as_ref()) {
        Ok(o) => {
            println!("{}: {} {}", cfg.experiment.name(), if o.passed { "PASS" } else { "FAIL" }, o.summary);
            if o.passed {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("heatpot: {}: {e}", cfg.experiment.name());
            EXIT_FAIL
        }
    }
}
