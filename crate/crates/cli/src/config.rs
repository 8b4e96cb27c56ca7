//! Flat `key = value` run configuration.

use std::fmt;

use loglap::discretization::{Domain, QuadratureSpec};
use loglap::fucik::GradientMetric;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainSpec {
    Interval { a: f64, b: f64 },
    Disc { radius: f64 },
}

impl DomainSpec {
    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            DomainSpec::Disc { .. } => 2,
        }
    }

    pub fn build(&self) -> loglap::Result<Domain<f64>> {
        match *self {
            DomainSpec::Interval { a, b } => Domain::interval(a, b),
            DomainSpec::Disc { radius } => Domain::disc(radius),
        }
    }
}

/// A value that defaults to one derived from the spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AutoOr {
    Auto,
    Value(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub n: usize,
    pub quad: QuadratureSpec,
    pub k: usize,
    pub r_min: f64,
    /// `auto` is `10 (λ₂ − λ₁)`.
    pub r_max: AutoOr,
    pub steps: usize,
    pub m: usize,
    pub grad_tol: f64,
    pub verify_tol: f64,
    pub max_sweeps: usize,
    pub metric: GradientMetric,
    pub polish: bool,
    pub parallel: bool,
    pub seed: u64,
    pub restarts: usize,
    pub dump_vectors: bool,
    pub s_list: Vec<f64>,
    /// Offset of the target curve point; `auto` is `λ₂ − λ₁`.
    pub nonres_r: AutoOr,
    /// Slopes are `(1 − θ)(λ₁, λ₁) + θ(α, β)`.
    pub nonres_theta: f64,
    pub nonres_eps: f64,
    pub nonres_forcing: f64,
    pub nonres_margin: f64,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: DomainSpec::Interval { a: -0.5, b: 0.5 },
            n: 256,
            quad: QuadratureSpec::default(),
            k: 6,
            r_min: 0.0,
            r_max: AutoOr::Auto,
            steps: 11,
            m: 41,
            grad_tol: 1e-6,
            verify_tol: 1e-6,
            max_sweeps: 20_000,
            metric: GradientMetric::Lumped,
            polish: true,
            parallel: false,
            seed: 0,
            restarts: 0,
            dump_vectors: false,
            s_list: vec![0.1, 0.05, 0.025],
            nonres_r: AutoOr::Auto,
            nonres_theta: 0.5,
            nonres_eps: 0.1,
            nonres_forcing: 0.1,
            nonres_margin: 1.0,
            output_dir: "out".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based; 0 for command-line overrides.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "override: {}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

pub const KEYS: &[&str] = &[
    "domain.kind",
    "domain.dim",
    "domain.a",
    "domain.b",
    "domain.radius",
    "mesh.n",
    "quad.gauss_order",
    "quad.singular_subdivisions",
    "quad.boundary_grading",
    "quad.consistency_tol",
    "eig.k",
    "eig.dump_vectors",
    "curve.r_min",
    "curve.r_max",
    "curve.steps",
    "curve.restarts",
    "path.m",
    "tol.grad",
    "tol.verify",
    "solver.max_sweeps",
    "solver.metric",
    "solver.polish",
    "solver.parallel",
    "run.seed",
    "fracexp.s_list",
    "nonres.r",
    "nonres.theta",
    "nonres.eps",
    "nonres.forcing",
    "nonres.margin",
    "output.dir",
];

/// Parses a document and validates the result against the defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut kind = None;
    let mut dim = None;
    let (mut a, mut b, mut radius) = (-0.5, 0.5, 0.5);
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError {
                line,
                message: format!("expected `key = value`, found `{body}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        apply(&mut cfg, &mut kind, &mut dim, (&mut a, &mut b, &mut radius), key, value)
            .map_err(|message| ConfigError { line, message })?;
    }
    finish(cfg, kind, dim, a, b, radius)
}

/// Applies `key=value` overrides on top of a parsed document.
pub fn with_overrides(base: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut text = base.to_string();
    let first_override = text.lines().count() + 1;
    for o in overrides {
        if !o.contains('=') {
            return Err(ConfigError {
                line: 0,
                message: format!("expected key=value, found `{o}`"),
            });
        }
        text.push('\n');
        text.push_str(o);
    }
    parse_config(&text).map_err(|e| {
        if e.line >= first_override {
            ConfigError { line: 0, ..e }
        } else {
            e
        }
    })
}

fn number(key: &str, value: &str) -> Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|_| format!("{key}: expected a number, found `{value}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{key}: value must be finite"))
    }
}

fn count(key: &str, value: &str, lo: usize, hi: usize) -> Result<usize, String> {
    let v: usize = value
        .parse()
        .map_err(|_| format!("{key}: expected a nonnegative integer, found `{value}`"))?;
    if v < lo || v > hi {
        return Err(format!("{key}: {v} outside [{lo}, {hi}]"));
    }
    Ok(v)
}

fn flag(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("{key}: expected true or false, found `{value}`")),
    }
}

fn positive(key: &str, value: &str) -> Result<f64, String> {
    let v = number(key, value)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{key}: must be positive, got {v}"))
    }
}

fn apply(
    cfg: &mut RunConfig,
    kind: &mut Option<String>,
    dim: &mut Option<usize>,
    geo: (&mut f64, &mut f64, &mut f64),
    key: &str,
    value: &str,
) -> Result<(), String> {
    match key {
        "domain.kind" => match value {
            "interval" | "disc" => *kind = Some(value.to_string()),
            _ => return Err(format!("domain.kind: expected interval or disc, found `{value}`")),
        },
        "domain.dim" => *dim = Some(count(key, value, 1, 2)?),
        "domain.a" => *geo.0 = number(key, value)?,
        "domain.b" => *geo.1 = number(key, value)?,
        "domain.radius" => *geo.2 = positive(key, value)?,
        "mesh.n" => cfg.n = count(key, value, 2, 4096)?,
        "quad.gauss_order" => cfg.quad.gauss_order = count(key, value, 2, 64)?,
        "quad.singular_subdivisions" => cfg.quad.singular_subdivisions = count(key, value, 1, 64)?,
        "quad.boundary_grading" => cfg.quad.boundary_grading = count(key, value, 1, 16)?,
        "quad.consistency_tol" => cfg.quad.consistency_tol = positive(key, value)?,
        "eig.k" => cfg.k = count(key, value, 1, 4096)?,
        "eig.dump_vectors" => cfg.dump_vectors = flag(key, value)?,
        "curve.r_min" => {
            let v = number(key, value)?;
            if v < 0.0 {
                return Err(format!("curve.r_min: must be nonnegative, got {v}"));
            }
            cfg.r_min = v;
        }
        "curve.r_max" => {
            cfg.r_max = if value == "auto" {
                AutoOr::Auto
            } else {
                AutoOr::Value(positive(key, value)?)
            }
        }
        "curve.steps" => cfg.steps = count(key, value, 2, 10_000)?,
        "curve.restarts" => cfg.restarts = count(key, value, 0, 1000)?,
        "path.m" => cfg.m = count(key, value, 3, 10_000)?,
        "tol.grad" => cfg.grad_tol = positive(key, value)?,
        "tol.verify" => cfg.verify_tol = positive(key, value)?,
        "solver.max_sweeps" => cfg.max_sweeps = count(key, value, 1, 10_000_000)?,
        "solver.metric" => {
            cfg.metric = match value {
                "lumped" => GradientMetric::Lumped,
                "consistent" => GradientMetric::Consistent,
                _ => return Err(format!("solver.metric: expected lumped or consistent, found `{value}`")),
            }
        }
        "solver.polish" => cfg.polish = flag(key, value)?,
        "solver.parallel" => cfg.parallel = flag(key, value)?,
        "run.seed" => {
            cfg.seed = value
                .parse()
                .map_err(|_| format!("run.seed: expected an unsigned integer, found `{value}`"))?
        }
        "fracexp.s_list" => {
            let list = value
                .split(',')
                .map(|s| positive(key, s.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            if list.is_empty() || list.iter().any(|&s| s > 0.5) {
                return Err("fracexp.s_list: entries must lie in (0, 0.5]".into());
            }
            if list.windows(2).any(|w| w[1] >= w[0]) {
                return Err("fracexp.s_list: must be strictly descending".into());
            }
            cfg.s_list = list;
        }
        "nonres.r" => {
            cfg.nonres_r = if value == "auto" {
                AutoOr::Auto
            } else {
                AutoOr::Value(positive(key, value)?)
            }
        }
        "nonres.theta" => {
            let v = number(key, value)?;
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("nonres.theta: must lie in (0, 1), got {v}"));
            }
            cfg.nonres_theta = v;
        }
        "nonres.eps" => {
            let v = number(key, value)?;
            if v < 0.0 {
                return Err(format!("nonres.eps: must be nonnegative, got {v}"));
            }
            cfg.nonres_eps = v;
        }
        "nonres.forcing" => cfg.nonres_forcing = number(key, value)?,
        "nonres.margin" => cfg.nonres_margin = positive(key, value)?,
        "output.dir" => {
            if value.is_empty() {
                return Err("output.dir: must not be empty".into());
            }
            cfg.output_dir = value.to_string();
        }
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

fn finish(
    mut cfg: RunConfig,
    kind: Option<String>,
    dim: Option<usize>,
    a: f64,
    b: f64,
    radius: f64,
) -> Result<RunConfig, ConfigError> {
    let err = |message: String| ConfigError { line: 0, message };
    cfg.domain = match kind.as_deref().unwrap_or("interval") {
        "disc" => DomainSpec::Disc { radius },
        _ => {
            if !(a < b) {
                return Err(err(format!("domain: need a < b, got a = {a}, b = {b}")));
            }
            DomainSpec::Interval { a, b }
        }
    };
    if let Some(d) = dim {
        if d != cfg.domain.dim() {
            return Err(err(format!("domain.dim = {d} does not match the domain kind")));
        }
    }
    if cfg.k > cfg.n {
        return Err(err(format!("eig.k = {} exceeds mesh.n = {}", cfg.k, cfg.n)));
    }
    if let AutoOr::Value(r) = cfg.r_max {
        if r <= cfg.r_min {
            return Err(err(format!("curve.r_max = {r} must exceed curve.r_min = {}", cfg.r_min)));
        }
    }
    Ok(cfg)
}

fn float(v: f64) -> String {
    format!("{v:?}")
}

/// Canonical form without `output.dir`; the run hash is taken over this.
pub fn emit_settings(cfg: &RunConfig) -> String {
    emit(cfg)
        .lines()
        .filter(|l| !l.starts_with("output.dir"))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// Canonical text form: every key, fixed order.
pub fn emit(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    match cfg.domain {
        DomainSpec::Interval { a, b } => {
            put("domain.kind", "interval".into());
            put("domain.dim", "1".into());
            put("domain.a", float(a));
            put("domain.b", float(b));
        }
        DomainSpec::Disc { radius } => {
            put("domain.kind", "disc".into());
            put("domain.dim", "2".into());
            put("domain.radius", float(radius));
        }
    }
    put("mesh.n", cfg.n.to_string());
    put("quad.gauss_order", cfg.quad.gauss_order.to_string());
    put("quad.singular_subdivisions", cfg.quad.singular_subdivisions.to_string());
    put("quad.boundary_grading", cfg.quad.boundary_grading.to_string());
    put("quad.consistency_tol", float(cfg.quad.consistency_tol));
    put("eig.k", cfg.k.to_string());
    put("eig.dump_vectors", cfg.dump_vectors.to_string());
    put("curve.r_min", float(cfg.r_min));
    put(
        "curve.r_max",
        match cfg.r_max {
            AutoOr::Auto => "auto".into(),
            AutoOr::Value(v) => float(v),
        },
    );
    put("curve.steps", cfg.steps.to_string());
    put("curve.restarts", cfg.restarts.to_string());
    put("path.m", cfg.m.to_string());
    put("tol.grad", float(cfg.grad_tol));
    put("tol.verify", float(cfg.verify_tol));
    put("solver.max_sweeps", cfg.max_sweeps.to_string());
    put(
        "solver.metric",
        match cfg.metric {
            GradientMetric::Lumped => "lumped".into(),
            GradientMetric::Consistent => "consistent".into(),
        },
    );
    put("solver.polish", cfg.polish.to_string());
    put("solver.parallel", cfg.parallel.to_string());
    put("run.seed", cfg.seed.to_string());
    put(
        "fracexp.s_list",
        cfg.s_list.iter().map(|&s| float(s)).collect::<Vec<_>>().join(","),
    );
    put(
        "nonres.r",
        match cfg.nonres_r {
            AutoOr::Auto => "auto".into(),
            AutoOr::Value(v) => float(v),
        },
    );
    put("nonres.theta", float(cfg.nonres_theta));
    put("nonres.eps", float(cfg.nonres_eps));
    put("nonres.forcing", float(cfg.nonres_forcing));
    put("nonres.margin", float(cfg.nonres_margin));
    put("output.dir", cfg.output_dir.clone());
    out
}
