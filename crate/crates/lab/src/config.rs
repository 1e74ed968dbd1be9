//! JSON experiment configs: strict schema, defaults and validation.

use std::fmt;
use std::path::Path;

use flathilbert::curves::{default_grid, log_grid};
use flathilbert::opnorm::{Grid1d, Grid2d, NormMethod};
use flathilbert::oscquad::SweepEntry;
use flathilbert::{Curve, CurveFamily, Parity, Polynomial};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    CheckCurve,
    EkMeasure,
    UpsilonSweep,
    JrBounds,
    KernelDecay,
    OpnormSweep,
    PlancherelCheck,
}

impl CommandName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandName::CheckCurve => "check-curve",
            CommandName::EkMeasure => "ek-measure",
            CommandName::UpsilonSweep => "upsilon-sweep",
            CommandName::JrBounds => "jr-bounds",
            CommandName::KernelDecay => "kernel-decay",
            CommandName::OpnormSweep => "opnorm-sweep",
            CommandName::PlancherelCheck => "plancherel-check",
        }
    }

    fn uses_randomness(&self) -> bool {
        matches!(self, CommandName::UpsilonSweep | CommandName::OpnormSweep | CommandName::PlancherelCheck)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveConfig {
    /// A built-in curve name such as `"t2-log1p"`.
    Name(String),
    Spec(CurveSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    /// Built-in name; mutually exclusive with `family`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRecord {
    pub k: u32,
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

/// The on-disk config. Every knob is optional; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveConfig>,
    /// Comma-separated coefficients, constant term first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_panels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist_levels: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trend_tol: Option<f64>,
    /// Explicit J^r sweep; replaces the generated `k_max` × `dist_levels` grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ys: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_geometric: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_uniform: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_d_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_slack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hilbert_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement_tol: Option<f64>,
}

/// A config problem, reported with the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigError { field: field.to_string(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field '{}': {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

type Checked<T> = Result<T, ConfigError>;

/// Reads a config file and merges flag overrides (already in config-key
/// form) on top.
pub fn load(path: &Path, overrides: &Map<String, Value>) -> Checked<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("--config", format!("cannot read {}: {e}", path.display())))?;
    parse(&text, overrides)
}

pub fn parse(text: &str, overrides: &Map<String, Value>) -> Checked<ExperimentConfig> {
    let mut value: Value = serde_json::from_str(text)
        .map_err(|e| ConfigError::new("<root>", format!("invalid JSON: {e}")))?;
    let obj = value.as_object_mut().ok_or_else(|| ConfigError::new("<root>", "the config must be a JSON object"))?;
    for (k, v) in overrides {
        obj.insert(k.clone(), v.clone());
    }
    for key in obj.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::new(key, "unknown key"));
        }
    }
    for (key, v) in obj.iter() {
        serde_json::from_value::<ExperimentConfig>(Value::Object(Map::from_iter([(key.clone(), v.clone())])))
            .map_err(|e| ConfigError::new(key, e.to_string()))?;
    }
    serde_json::from_value(value).map_err(|e| ConfigError::new("<root>", e.to_string()))
}

const KNOWN_KEYS: &[&str] = &[
    "command", "curve", "poly", "seed", "threads", "output", "grid_lo", "grid_hi", "grid_points", "c1", "alpha",
    "k_max", "resolution", "samples", "omega_min", "omega_max", "z_points", "u", "tol", "max_panels",
    "dist_levels", "trend_tol", "sweep", "ys", "row_geometric", "row_uniform", "row_d_min", "min_points", "slope_slack",
    "degrees", "u_values", "extent", "step", "norm_method", "norm_tol", "max_iter", "max_ratio", "hilbert_tol",
    "n1", "n2", "a1", "a2", "agreement_tol",
];

fn positive(field: &str, v: f64) -> Checked<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be a positive finite number, got {v}")))
    }
}

fn at_least(field: &str, v: usize, min: usize) -> Checked<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be at least {min}, got {v}")))
    }
}

pub fn curve_from(cfg: &CurveConfig) -> Checked<Curve> {
    let unknown = |n: &str| ConfigError::new("curve", format!("unknown built-in curve '{n}'"));
    match cfg {
        CurveConfig::Name(n) => Curve::builtin(n).ok_or_else(|| unknown(n)),
        CurveConfig::Spec(s) => {
            let base = match (&s.name, &s.family) {
                (Some(n), None) => {
                    if s.alpha.is_some() {
                        return Err(ConfigError::new("curve.alpha", "built-in curves take no alpha"));
                    }
                    Curve::builtin(n).ok_or_else(|| unknown(n))?
                }
                (None, Some(f)) => {
                    let fam = CurveFamily::from_name(f, s.alpha)
                        .map_err(|e| ConfigError::new("curve.family", e.to_string()))?;
                    let label = match s.alpha {
                        Some(a) => format!("{f}-{a}"),
                        None => f.clone(),
                    };
                    Curve::new(fam, Parity::Even, &label)
                }
                _ => return Err(ConfigError::new("curve", "give exactly one of 'name' and 'family'")),
            };
            match s.parity.as_deref() {
                None | Some("even") => Ok(base.with_parity(Parity::Even)),
                Some("odd") => Ok(base.with_parity(Parity::Odd)),
                Some(p) => Err(ConfigError::new("curve.parity", format!("expected 'even' or 'odd', got '{p}'"))),
            }
        }
    }
}

fn poly_from(s: &str) -> Checked<Polynomial> {
    s.parse::<Polynomial>().map_err(|e| ConfigError::new("poly", e.to_string()))
}

fn norm_method_from(s: &str) -> Checked<NormMethod> {
    match s {
        "auto" => Ok(NormMethod::Auto),
        "power" | "power_iteration" => Ok(NormMethod::PowerIteration),
        "dense" | "dense_svd" => Ok(NormMethod::DenseSvd),
        "lanczos" => Ok(NormMethod::Lanczos),
        _ => Err(ConfigError::new("norm_method", format!("expected auto, power, dense or lanczos, got '{s}'"))),
    }
}

#[derive(Debug, Clone)]
pub struct CheckCurveParams {
    pub curves: Vec<Curve>,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EkParams {
    pub poly: Polynomial,
    pub c1: f64,
    pub alpha: f64,
    pub k_max: u32,
    pub resolution: f64,
}

#[derive(Debug, Clone)]
pub struct UpsilonParams {
    pub curves: Vec<Curve>,
    pub samples: usize,
    pub seed: u64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub k_max: u32,
    pub z_points: usize,
    /// Grid for the C1 estimate; must cover every argument `ω2^k·w`.
    pub c1_grid: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct JrParams {
    pub curve: Curve,
    pub poly: Polynomial,
    pub u: f64,
    pub c1: Option<f64>,
    pub k_max: u32,
    pub sweep: Vec<SweepEntry>,
    pub tol: f64,
    pub max_panels: usize,
    pub trend_tol: f64,
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct KernelParams {
    pub curve: Curve,
    pub poly: Polynomial,
    pub u: f64,
    pub c1: Option<f64>,
    pub k_max: u32,
    pub ys: Vec<f64>,
    pub row_geometric: usize,
    pub row_uniform: usize,
    pub row_d_min: f64,
    pub tol: f64,
    pub max_panels: usize,
    pub min_points: usize,
    pub slope_slack: f64,
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct OpnormParams {
    pub curve: Curve,
    pub degrees: Vec<usize>,
    pub samples: usize,
    pub u_values: Vec<f64>,
    pub grid: Grid1d,
    pub method: NormMethod,
    pub norm_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub max_ratio: f64,
    pub hilbert_tol: f64,
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct PlancherelParams {
    pub curve: Curve,
    pub poly: Polynomial,
    pub samples: usize,
    pub seed: u64,
    pub grid: Grid2d,
    pub agreement_tol: f64,
}

#[derive(Debug, Clone)]
pub enum Params {
    CheckCurve(CheckCurveParams),
    EkMeasure(EkParams),
    UpsilonSweep(UpsilonParams),
    JrBounds(JrParams),
    KernelDecay(KernelParams),
    OpnormSweep(OpnormParams),
    PlancherelCheck(PlancherelParams),
}

impl ExperimentConfig {
    /// Applies defaults and validates every knob the command reads.
    pub fn resolve(&self, command: CommandName) -> Checked<Params> {
        if let Some(c) = self.command {
            if c != command {
                return Err(ConfigError::new(
                    "command",
                    format!("config is for '{}' but '{}' was requested", c.as_str(), command.as_str()),
                ));
            }
        }
        if command.uses_randomness() && self.seed.is_none() {
            return Err(ConfigError::new("seed", "required for this command (set it in the config or pass --seed)"));
        }
        let threads = at_least("threads", self.threads.unwrap_or_else(default_threads), 1)?;
        let curve = |default: &str| -> Checked<Curve> {
            match &self.curve {
                Some(c) => curve_from(c),
                None => Ok(Curve::builtin(default).expect("default curve is built in")),
            }
        };
        let poly = |default: &str| poly_from(self.poly.as_deref().unwrap_or(default));
        let f = |field: &str, v: Option<f64>, d: f64| positive(field, v.unwrap_or(d));
        let c1 = self.c1.map(|v| positive("c1", v)).transpose()?;
        let tol = f("tol", self.tol, flathilbert::oscquad::DEFAULT_TOL)?;
        let max_panels = at_least("max_panels", self.max_panels.unwrap_or(flathilbert::oscquad::PANEL_BUDGET), 1)?;

        let params = match command {
            CommandName::CheckCurve => {
                let curves = match &self.curve {
                    Some(c) => vec![curve_from(c)?],
                    None => Curve::corpus(),
                };
                let grid = self.log_grid(default_grid())?;
                Params::CheckCurve(CheckCurveParams { curves, grid })
            }
            CommandName::EkMeasure => {
                let p = poly("1,0,1")?;
                if p.degree() == 0 {
                    return Err(ConfigError::new("poly", "E_k needs a polynomial of degree at least 1"));
                }
                let alpha = self.alpha.unwrap_or(0.5);
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(ConfigError::new("alpha", format!("must lie in (0, 1), got {alpha}")));
                }
                Params::EkMeasure(EkParams {
                    poly: p,
                    c1: c1.unwrap_or(1.0),
                    alpha,
                    k_max: self.k_max.unwrap_or(20),
                    resolution: f("resolution", self.resolution, 1e-6)?,
                })
            }
            CommandName::UpsilonSweep => {
                let curves = match &self.curve {
                    Some(c) => vec![curve_from(c)?],
                    None => Curve::corpus(),
                };
                let omega_min = f("omega_min", self.omega_min, 1e-3)?;
                let omega_max = f("omega_max", self.omega_max, 1e3)?;
                if omega_min > omega_max {
                    return Err(ConfigError::new("omega_min", "must not exceed omega_max"));
                }
                let k_max = self.k_max.unwrap_or(20);
                if k_max > 60 {
                    return Err(ConfigError::new("k_max", "at most 60"));
                }
                let reach = 4.0 * omega_max * (k_max as f64).exp2();
                let lo = f("grid_lo", self.grid_lo, 1e-4f64.min(omega_min))?;
                let hi = f("grid_hi", self.grid_hi, reach.max(1e4))?;
                let points = at_least("grid_points", self.grid_points.unwrap_or(4000), 2)?;
                if lo >= hi {
                    return Err(ConfigError::new("grid_lo", "must be below grid_hi"));
                }
                Params::UpsilonSweep(UpsilonParams {
                    curves,
                    samples: at_least("samples", self.samples.unwrap_or(1000), 1)?,
                    seed: self.seed.unwrap_or_default(),
                    omega_min,
                    omega_max,
                    k_max,
                    z_points: at_least("z_points", self.z_points.unwrap_or(33), 2)?,
                    c1_grid: log_grid(lo, hi, points),
                })
            }
            CommandName::JrBounds => {
                let sweep = self.jr_sweep()?;
                Params::JrBounds(JrParams {
                    curve: curve("power-2")?,
                    poly: self.nonconstant(poly("2,2,1")?)?,
                    u: self.nonzero_u()?,
                    c1,
                    k_max: sweep.iter().map(|e| e.k).max().unwrap_or(0),
                    sweep,
                    tol,
                    max_panels,
                    trend_tol: f("trend_tol", self.trend_tol, 0.05)?,
                    threads,
                })
            }
            CommandName::KernelDecay => {
                let ys = self.ys.clone().unwrap_or_else(|| vec![-0.5, 0.0, 0.5]);
                if ys.is_empty() || ys.iter().any(|y| !y.is_finite()) {
                    return Err(ConfigError::new("ys", "need at least one finite anchor"));
                }
                Params::KernelDecay(KernelParams {
                    curve: curve("power-2")?,
                    poly: self.nonconstant(poly("1,0,1")?)?,
                    u: self.nonzero_u()?,
                    c1,
                    k_max: self.k_max.unwrap_or(10),
                    ys,
                    row_geometric: at_least("row_geometric", self.row_geometric.unwrap_or(256), 2)?,
                    row_uniform: at_least("row_uniform", self.row_uniform.unwrap_or(256), 1)?,
                    row_d_min: {
                        let d = f("row_d_min", self.row_d_min, 1e-6)?;
                        if d >= 1.0 {
                            return Err(ConfigError::new("row_d_min", "must be below 1"));
                        }
                        d
                    },
                    tol,
                    max_panels,
                    min_points: at_least("min_points", self.min_points.unwrap_or(8), 2)?,
                    slope_slack: {
                        let s = self.slope_slack.unwrap_or(0.1);
                        if !(s >= 0.0 && s.is_finite()) {
                            return Err(ConfigError::new("slope_slack", "must be a nonnegative number"));
                        }
                        s
                    },
                    threads,
                })
            }
            CommandName::OpnormSweep => {
                let degrees = self.degrees.clone().unwrap_or_else(|| vec![1, 2, 3]);
                if degrees.is_empty() {
                    return Err(ConfigError::new("degrees", "need at least one degree"));
                }
                let u_values = self.u_values.clone().unwrap_or_else(|| vec![1e-3, 1e-1, 1e1, 1e3]);
                if u_values.is_empty() || u_values.iter().any(|u| !u.is_finite()) {
                    return Err(ConfigError::new("u_values", "need at least one finite value"));
                }
                let extent = f("extent", self.extent, 32.0)?;
                let step = f("step", self.step, 1.0 / 32.0)?;
                let grid = Grid1d::new(extent, step).map_err(|e| ConfigError::new("step", e.to_string()))?;
                Params::OpnormSweep(OpnormParams {
                    curve: curve("power-2")?,
                    degrees,
                    samples: at_least("samples", self.samples.unwrap_or(20), 1)?,
                    u_values,
                    grid,
                    method: norm_method_from(self.norm_method.as_deref().unwrap_or("lanczos"))?,
                    norm_tol: f("norm_tol", self.norm_tol, 1e-8)?,
                    max_iter: at_least("max_iter", self.max_iter.unwrap_or(10_000), 1)?,
                    seed: self.seed.unwrap_or_default(),
                    max_ratio: f("max_ratio", self.max_ratio, 10.0)?,
                    hilbert_tol: f("hilbert_tol", self.hilbert_tol, 0.05)?,
                    threads,
                })
            }
            CommandName::PlancherelCheck => {
                let d = Grid2d::default();
                let grid = Grid2d {
                    n1: at_least("n1", self.n1.unwrap_or(d.n1), 2)?,
                    n2: at_least("n2", self.n2.unwrap_or(d.n2), 2)?,
                    a1: f("a1", self.a1, d.a1)?,
                    a2: f("a2", self.a2, d.a2)?,
                };
                Params::PlancherelCheck(PlancherelParams {
                    curve: curve("power-2")?,
                    poly: poly("0,1")?,
                    samples: at_least("samples", self.samples.unwrap_or(10), 1)?,
                    seed: self.seed.unwrap_or_default(),
                    grid,
                    agreement_tol: f("agreement_tol", self.agreement_tol, 0.02)?,
                })
            }
        };
        Ok(params)
    }

    fn log_grid(&self, default: Vec<f64>) -> Checked<Vec<f64>> {
        if self.grid_lo.is_none() && self.grid_hi.is_none() && self.grid_points.is_none() {
            return Ok(default);
        }
        let lo = positive("grid_lo", self.grid_lo.unwrap_or(1e-4))?;
        let hi = positive("grid_hi", self.grid_hi.unwrap_or(1e4))?;
        if lo >= hi {
            return Err(ConfigError::new("grid_lo", "must be below grid_hi"));
        }
        let n = at_least("grid_points", self.grid_points.unwrap_or(2000), 3)?;
        Ok(log_grid(lo, hi, n))
    }

    /// The explicit `sweep`, or x = 0, y = 2^{-j}, r = 2 for every k ≤ k_max
    /// and j < dist_levels.
    fn jr_sweep(&self) -> Checked<Vec<SweepEntry>> {
        if let Some(records) = &self.sweep {
            if records.is_empty() {
                return Err(ConfigError::new("sweep", "need at least one entry"));
            }
            return records
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    if e.y > e.x && e.r - e.y >= 1.0 && e.r - e.x <= 2.0 {
                        Ok(SweepEntry { k: e.k, x: e.x, y: e.y, r: e.r })
                    } else {
                        Err(ConfigError::new("sweep", format!("entry {i} needs 1 <= r-y < r-x <= 2")))
                    }
                })
                .collect();
        }
        let k_max = self.k_max.unwrap_or(12);
        let levels = self.dist_levels.unwrap_or(9).max(1);
        Ok((0..=k_max)
            .flat_map(|k| (0..levels).map(move |j| SweepEntry { k, x: 0.0, y: (-(j as f64)).exp2(), r: 2.0 }))
            .collect())
    }

    fn nonzero_u(&self) -> Checked<f64> {
        let u = self.u.unwrap_or(1.0);
        if u == 0.0 || !u.is_finite() {
            return Err(ConfigError::new("u", "must be finite and nonzero"));
        }
        Ok(u)
    }

    fn nonconstant(&self, p: Polynomial) -> Checked<Polynomial> {
        if p.degree() == 0 {
            return Err(ConfigError::new("poly", "needs degree at least 1"));
        }
        Ok(p)
    }
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
