//! Scenario files: flat `section.key = value` lines, `#` starts a comment.
//!
//! ```text
//! problem.a = 1.0
//! problem.p = 0.5
//! problem.c = trig(0.1, pi, 1)
//! problem.horizon = 40
//! data.w0 = random(42, 2)
//! data.w1 = random(43, 1)
//! grid.n = 200
//! run.epsilons = 1e-1, 1e-2, 1e-3
//! run.window = 3, 35
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use wavelab_core::data::{DataFamily, DataSource};
use wavelab_core::field::SampledGrid;
use wavelab_core::{CoefficientField, Orientation, ProblemSpec};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}` (first set on line {first})")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("line {line}: invalid value for `{key}`: {msg}")]
    Value { line: usize, key: String, msg: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

pub const KEYS: &[&str] = &[
    "problem.a",
    "problem.p",
    "problem.orientation",
    "problem.c",
    "problem.a1",
    "problem.horizon",
    "data.w0",
    "data.w1",
    "grid.n",
    "grid.record_every",
    "run.tols",
    "run.window",
    "run.floor",
    "run.epsilons",
    "run.n_list",
    "run.l_list",
    "run.query_times",
    "run.t0",
    "run.t_end",
    "run.refine",
    "run.picard_tol",
    "run.picard_max_iter",
    "output.dir",
    "output.emit_plots",
    "output.snapshots",
    "reproduction",
    "forcing.manufactured",
];

/// A fully validated scenario. Keys a command does not use are still
/// parsed and checked.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub a: Option<f64>,
    pub p: Option<f64>,
    pub orientation: Orientation,
    pub c: CoefficientField,
    pub a1: CoefficientField,
    pub horizon: Option<f64>,
    pub w0: Option<DataFamily>,
    pub w1: Option<DataFamily>,
    pub n: Option<usize>,
    pub record_every: usize,
    pub tols: Vec<f64>,
    pub window: Option<(f64, f64)>,
    pub floor: f64,
    pub epsilons: Vec<f64>,
    pub n_list: Vec<usize>,
    pub l_list: Vec<u32>,
    pub query_times: Vec<f64>,
    pub t0: Option<f64>,
    pub t_end: Option<f64>,
    pub refine: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub output_dir: Option<PathBuf>,
    pub emit_plots: bool,
    pub snapshots: bool,
    pub reproduction: bool,
    pub manufactured: bool,
}

struct Entry {
    line: usize,
    value: String,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok(Self::parse(&text, base)?)
    }

    /// Relative paths inside values (sampled coefficient files) resolve
    /// against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut raw: BTreeMap<&'static str, Entry> = BTreeMap::new();
        for (i, full) in text.lines().enumerate() {
            let line = i + 1;
            let body = full.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(ConfigError::Syntax { line, msg: format!("expected `key = value`, got `{body}`") });
            };
            let (k, v) = (k.trim(), v.trim());
            let Some(&key) = KEYS.iter().find(|&&known| known == k) else {
                return Err(ConfigError::UnknownKey { line, key: k.to_string() });
            };
            if v.is_empty() {
                return Err(ConfigError::Value { line, key: k.into(), msg: "empty value".into() });
            }
            if let Some(prev) = raw.get(key) {
                return Err(ConfigError::Duplicate { line, key: k.into(), first: prev.line });
            }
            raw.insert(key, Entry { line, value: v.to_string() });
        }

        let p = Parser { raw: &raw };
        let cfg = ScenarioConfig {
            a: p.get("problem.a", real)?,
            p: p.get("problem.p", real)?,
            orientation: p.get("problem.orientation", orientation)?.unwrap_or(Orientation::LeftSmoothing),
            c: p.get("problem.c", |s| coefficient(s, base))?.unwrap_or(CoefficientField::Zero),
            a1: p.get("problem.a1", |s| coefficient(s, base))?.unwrap_or(CoefficientField::Zero),
            horizon: p.get("problem.horizon", positive)?,
            w0: p.get("data.w0", data_family)?,
            w1: p.get("data.w1", data_family)?,
            n: p.get("grid.n", |s| at_least(s, 4))?,
            record_every: p.get("grid.record_every", |s| at_least(s, 1))?.unwrap_or(1),
            tols: p.get("run.tols", |s| list(s, positive))?.unwrap_or_else(|| vec![1e-12]),
            window: p.get("run.window", window)?,
            floor: p.get("run.floor", positive)?.unwrap_or(1e-13),
            epsilons: p.get("run.epsilons", epsilons)?.unwrap_or_default(),
            n_list: p.get("run.n_list", |s| increasing(list(s, |v| at_least(v, 4))?))?.unwrap_or_default(),
            l_list: p
                .get("run.l_list", |s| {
                    let v = increasing(list(s, |v| at_least(v, 2))?)?;
                    v.into_iter().map(|l| u32::try_from(l).map_err(|_| "level too large".to_string())).collect()
                })?
                .unwrap_or_default(),
            query_times: p.get("run.query_times", |s| list(s, non_negative))?.unwrap_or_default(),
            t0: p.get("run.t0", non_negative)?,
            t_end: p.get("run.t_end", positive)?,
            refine: p.get("run.refine", |s| at_least(s, 1))?.unwrap_or(2),
            picard_tol: p.get("run.picard_tol", positive)?.unwrap_or(1e-13),
            picard_max_iter: p.get("run.picard_max_iter", |s| at_least(s, 1))?.unwrap_or(200),
            output_dir: p.get("output.dir", |s| Ok(PathBuf::from(s)))?,
            emit_plots: p.get("output.emit_plots", boolean)?.unwrap_or(false),
            snapshots: p.get("output.snapshots", boolean)?.unwrap_or(false),
            reproduction: p.get("reproduction", boolean)?.unwrap_or(false),
            manufactured: p.get("forcing.manufactured", boolean)?.unwrap_or(false),
        };

        if cfg.reproduction && cfg.manufactured {
            let line = raw["forcing.manufactured"].line;
            return Err(ConfigError::Value {
                line,
                key: "forcing.manufactured".into(),
                msg: "forcing is not allowed in a reproduction run".into(),
            });
        }
        if cfg.manufactured && (cfg.w0.is_some() || cfg.w1.is_some()) {
            return Err(ConfigError::Invalid(
                "forcing.manufactured fixes its own initial data; remove data.w0 and data.w1".into(),
            ));
        }
        if let (Some(a), Some(h)) = (cfg.a, cfg.horizon) {
            ProblemSpec::new(a, cfg.p.unwrap_or(0.0), cfg.c.clone(), h)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn spec(&self) -> Result<ProblemSpec, ConfigError> {
        let a = self.a.ok_or(ConfigError::Missing("problem.a"))?;
        let p = self.p.ok_or(ConfigError::Missing("problem.p"))?;
        let horizon = self.horizon.ok_or(ConfigError::Missing("problem.horizon"))?;
        let spec = ProblemSpec::new(a, p, self.c.clone(), horizon)
            .and_then(|s| s.with_a1(self.a1.clone()))
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(spec.with_orientation(self.orientation))
    }

    pub fn data_source(&self) -> Result<DataSource, ConfigError> {
        let w0 = self.w0.clone().ok_or(ConfigError::Missing("data.w0"))?;
        let w1 = self.w1.clone().ok_or(ConfigError::Missing("data.w1"))?;
        Ok(DataSource::new(w0, w1))
    }

    pub fn grid_n(&self) -> Result<usize, ConfigError> {
        self.n.ok_or(ConfigError::Missing("grid.n"))
    }

    pub fn require_window(&self) -> Result<(f64, f64), ConfigError> {
        self.window.ok_or(ConfigError::Missing("run.window"))
    }

    pub fn require_epsilons(&self) -> Result<&[f64], ConfigError> {
        nonempty(&self.epsilons, "run.epsilons")
    }

    pub fn require_n_list(&self) -> Result<&[usize], ConfigError> {
        nonempty(&self.n_list, "run.n_list")
    }

    pub fn require_l_list(&self) -> Result<&[u32], ConfigError> {
        nonempty(&self.l_list, "run.l_list")
    }

    pub fn require_query_times(&self) -> Result<&[f64], ConfigError> {
        nonempty(&self.query_times, "run.query_times")
    }
}

fn nonempty<'a, T>(v: &'a [T], key: &'static str) -> Result<&'a [T], ConfigError> {
    if v.is_empty() {
        Err(ConfigError::Missing(key))
    } else {
        Ok(v)
    }
}

struct Parser<'a> {
    raw: &'a BTreeMap<&'static str, Entry>,
}

impl Parser<'_> {
    fn get<T>(&self, key: &'static str, f: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        match self.raw.get(key) {
            None => Ok(None),
            Some(e) => f(&e.value)
                .map(Some)
                .map_err(|msg| ConfigError::Value { line: e.line, key: key.into(), msg }),
        }
    }
}

/// A decimal number, `pi`, or `<number>*pi` / `<number>pi`.
pub fn real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = if let Some(head) = s.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let k = match head {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))?,
        };
        k * std::f64::consts::PI
    } else {
        s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = real(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {v}"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = real(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a non-negative number, got {v}"))
    }
}

fn at_least(s: &str, min: usize) -> Result<usize, String> {
    let v: usize = s.trim().parse().map_err(|_| format!("`{}` is not a non-negative integer", s.trim()))?;
    if v >= min {
        Ok(v)
    } else {
        Err(format!("expected at least {min}, got {v}"))
    }
}

fn boolean(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected `true` or `false`, got `{s}`")),
    }
}

fn orientation(s: &str) -> Result<Orientation, String> {
    match s {
        "left" => Ok(Orientation::LeftSmoothing),
        "right" => Ok(Orientation::RightSmoothing),
        _ => Err(format!("expected `left` or `right`, got `{s}`")),
    }
}

fn list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    s.split(',').map(|x| item(x.trim())).collect()
}

fn increasing<T: PartialOrd + Copy>(v: Vec<T>) -> Result<Vec<T>, String> {
    if v.windows(2).all(|w| w[0] < w[1]) {
        Ok(v)
    } else {
        Err("list must be strictly increasing".into())
    }
}

fn window(s: &str) -> Result<(f64, f64), String> {
    match list(s, non_negative)?.as_slice() {
        [lo, hi] if lo < hi => Ok((*lo, *hi)),
        [_, _] => Err("window start must be below its end".into()),
        _ => Err("expected two numbers `start, end`".into()),
    }
}

fn epsilons(s: &str) -> Result<Vec<f64>, String> {
    let v = list(s, non_negative)?;
    for (i, x) in v.iter().enumerate() {
        if v[..i].contains(x) {
            return Err(format!("duplicate epsilon {x}"));
        }
    }
    Ok(v)
}

/// `name(arg, ...)` or a bare `name`.
fn call(s: &str) -> Result<(&str, Vec<&str>), String> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s, Vec::new())),
        Some(i) => {
            let inner = s[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| format!("unbalanced parentheses in `{s}`"))?;
            let args = if inner.trim().is_empty() { Vec::new() } else { inner.split(',').map(str::trim).collect() };
            Ok((s[..i].trim(), args))
        }
    }
}

fn arity<'a>(name: &str, args: &'a [&'a str], n: usize) -> Result<&'a [&'a str], String> {
    if args.len() == n {
        Ok(args)
    } else {
        Err(format!("`{name}` takes {n} argument(s), got {}", args.len()))
    }
}

/// `zero | sine(k) | hat(center[, half_width]) | step(edge) | random(seed, smoothness)`
pub fn data_family(s: &str) -> Result<DataFamily, String> {
    let (name, args) = call(s)?;
    let fam = match name {
        "zero" => {
            arity(name, &args, 0)?;
            DataFamily::Zero
        }
        "sine" => DataFamily::Sine { k: arity(name, &args, 1)?[0].parse().map_err(|_| "sine needs an integer k".to_string())? },
        "hat" => match args.len() {
            1 => DataFamily::hat(real(args[0])?),
            2 => DataFamily::Hat { center: real(args[0])?, half_width: real(args[1])? },
            _ => return Err("`hat` takes 1 or 2 arguments".into()),
        },
        "step" => DataFamily::Step { edge: real(arity(name, &args, 1)?[0])? },
        "random" => {
            let a = arity(name, &args, 2)?;
            DataFamily::Random {
                seed: a[0].parse().map_err(|_| "random needs an integer seed".to_string())?,
                smoothness: real(a[1])?,
            }
        }
        _ => return Err(format!("unknown data family `{name}`")),
    };
    fam.validate().map_err(|e| e.to_string())?;
    Ok(fam)
}

/// A number (constant field) or `zero | trig(A, kx, kt) | gauss(A, center,
/// width, kt) | sampled(path, t_max)`.
pub fn coefficient(s: &str, base: &Path) -> Result<CoefficientField, String> {
    if let Ok(v) = real(s) {
        return Ok(CoefficientField::Constant(v));
    }
    let (name, args) = call(s)?;
    let f = match name {
        "zero" => {
            arity(name, &args, 0)?;
            CoefficientField::Zero
        }
        "trig" => {
            let a = arity(name, &args, 3)?;
            CoefficientField::SeparableTrig { amplitude: real(a[0])?, x_freq: real(a[1])?, t_freq: real(a[2])? }
        }
        "gauss" => {
            let a = arity(name, &args, 4)?;
            CoefficientField::GaussianBump {
                amplitude: real(a[0])?,
                center: real(a[1])?,
                width: real(a[2])?,
                t_freq: real(a[3])?,
            }
        }
        "sampled" => {
            let a = arity(name, &args, 2)?;
            let path = base.join(a[0]);
            let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let rows = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| list(l, real))
                .collect::<Result<Vec<_>, _>>()?;
            CoefficientField::SampledGrid(SampledGrid::new(real(a[1])?, rows).map_err(|e| e.to_string())?)
        }
        _ => return Err(format!("unknown coefficient `{s}`")),
    };
    f.validate().map_err(|e| e.to_string())?;
    Ok(f)
}
