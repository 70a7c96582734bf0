//! Flat key-value experiment configs and their validation.
//!
//! Command-line flags and config files both produce an [`ExperimentConfig`];
//! [`ExperimentConfig::validate`] checks every precondition at once and
//! resolves defaults into a typed [`Plan`].

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use liftlab::bounds::BoundsInput;
use liftlab::spectral::{uniform_grid, GalerkinProcess, DEFAULT_DEGREE};
use liftlab::{PhaseState, Potential, Process, Tagged};
use serde::{Deserialize, Serialize};

use crate::potential::parse_potential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Liftcheck,
    Spectral,
    Circle,
    Bounds,
    Reproduce,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Liftcheck => "liftcheck",
            Command::Spectral => "spectral",
            Command::Circle => "circle",
            Command::Bounds => "bounds",
            Command::Reproduce => "reproduce",
        }
    }

    /// Keys that apply to this command besides `command`, `seed`, `out`, `threads`.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Command::Simulate => {
                &["potential", "process", "gamma", "chains", "horizon", "step", "record_every", "x0", "v0"]
            }
            Command::Liftcheck => &["potential", "process", "degree", "samples", "chains"],
            Command::Spectral => &[
                "potential",
                "process",
                "gamma",
                "degree",
                "grid",
                "eps",
                "sweep_gamma",
                "method",
                "outer",
                "inner",
                "step",
            ],
            Command::Circle => &["n", "eps_rule", "tol"],
            Command::Bounds => &["potential", "m", "kappa_minus", "T", "auto_T", "gamma", "eps", "degree"],
            Command::Reproduce => &["target"],
        }
    }
}

/// Reference results regenerated by `reproduce`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Fig1,
    GaussianTrel,
    CircleScaling,
    ConstantsTable,
    Optimality,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Fig1 => "fig1",
            Target::GaussianTrel => "gaussian-trel",
            Target::CircleScaling => "circle-scaling",
            Target::ConstantsTable => "constants-table",
            Target::Optimality => "optimality",
        }
    }
}

/// A refresh rate or `"auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Value(f64),
    Word(String),
}

impl std::str::FromStr for GammaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.parse::<f64>() {
            Ok(v) => Ok(GammaSpec::Value(v)),
            Err(_) => Ok(GammaSpec::Word(s.to_string())),
        }
    }
}

/// One experiment, as read from a config file or assembled from flags.
/// Absent keys take the documented defaults during validation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_gamma: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_minus: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(rename = "auto_T", skip_serializing_if = "Option::is_none")]
    pub auto_t: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
}

/// A single failed precondition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub key: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{} violation(s):\n{}", .0.len(), .0.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
}

/// How the spectral command obtains its curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralMethod {
    Galerkin,
    Empirical,
}

/// Flip probability of the lifted circle walk as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsRule {
    InverseN,
    Fixed(f64),
}

impl EpsRule {
    pub fn at(self, n: usize) -> f64 {
        match self {
            EpsRule::InverseN => 1.0 / n as f64,
            EpsRule::Fixed(e) => e,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulatePlan {
    pub process: Process,
    pub potential: Potential,
    pub gamma: f64,
    pub chains: usize,
    pub horizon: f64,
    pub step: f64,
    pub record_every: f64,
    pub init: PhaseState,
}

#[derive(Debug, Clone)]
pub struct LiftcheckPlan {
    pub process: Process,
    pub potential: Potential,
    pub degree: usize,
    pub samples: usize,
    pub chains: usize,
}

#[derive(Debug, Clone)]
pub struct SpectralPlan {
    pub process: Process,
    pub potential: Potential,
    pub gamma: f64,
    pub degree: usize,
    pub grid: Vec<f64>,
    pub eps: Vec<f64>,
    pub method: SpectralMethod,
    pub outer: usize,
    pub inner: usize,
    pub step: f64,
    /// Refresh rates for a gap sweep instead of a single analysis.
    pub sweep: Option<Vec<f64>>,
}

impl SpectralPlan {
    pub fn galerkin_process(&self) -> GalerkinProcess {
        GalerkinProcess::try_from(self.process).expect("validated Galerkin process")
    }
}

#[derive(Debug, Clone)]
pub struct CirclePlan {
    pub ns: Vec<usize>,
    pub eps_rule: EpsRule,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct BoundsPlan {
    pub input: BoundsInput,
    /// One-dimensional potential whose relaxation times are measured.
    pub potential: Option<Potential>,
    pub degree: usize,
}

#[derive(Debug, Clone)]
pub enum Plan {
    Simulate(SimulatePlan),
    Liftcheck(LiftcheckPlan),
    Spectral(SpectralPlan),
    Circle(CirclePlan),
    Bounds(BoundsPlan),
    Reproduce(Target),
}

/// `start:end:step` to a grid.
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:end:step, got '{s}'"));
    }
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("'{p}' is not a number")))
        .collect::<Result<Vec<_>, _>>()?;
    uniform_grid(nums[0], nums[1], nums[2]).map_err(|e| e.to_string())
}

struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn fail(&mut self, key: &str, message: impl Into<String>) {
        self.violations.push(Violation { key: key.to_string(), message: message.into() });
    }

    fn positive(&mut self, key: &str, value: Option<f64>, default: f64) -> f64 {
        let v = value.unwrap_or(default);
        if !(v > 0.0 && v.is_finite()) {
            self.fail(key, format!("must be positive and finite, got {v}"));
        }
        v
    }

    fn count(&mut self, key: &str, value: Option<usize>, default: usize, min: usize) -> usize {
        let v = value.unwrap_or(default);
        if v < min {
            self.fail(key, format!("must be at least {min}, got {v}"));
        }
        v
    }

    fn potential(&mut self, spec: Option<&str>) -> Option<Potential> {
        match parse_potential(spec.unwrap_or("gaussian")) {
            Ok(p) => Some(p),
            Err(e) => {
                self.fail("potential", e);
                None
            }
        }
    }

    fn process(&mut self, spec: Option<&str>, allowed: &[Process]) -> Option<Process> {
        let names = allowed.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(", ");
        let Some(s) = spec else {
            self.fail("process", format!("is required (one of {names})"));
            return None;
        };
        match s.parse::<Process>() {
            Ok(p) if allowed.contains(&p) => Some(p),
            _ => {
                self.fail("process", format!("unknown or unsupported process '{s}'; expected one of {names}"));
                None
            }
        }
    }

    /// A numeric refresh rate; `γ > 0` is required whenever the process
    /// mixes through its refresh (the contraction rate is `γ/(γ²C0 + C1)`).
    fn gamma(&mut self, spec: Option<&GammaSpec>, process: Option<Process>, default: f64) -> f64 {
        let g = match spec {
            None => default,
            Some(GammaSpec::Value(v)) => *v,
            Some(GammaSpec::Word(w)) => {
                self.fail("gamma", format!("expected a number, got '{w}' ('auto' is only accepted by bounds)"));
                return default;
            }
        };
        let needs_positive = matches!(process, Some(Process::Langevin | Process::Rhmc));
        if !g.is_finite() || g < 0.0 || (needs_positive && g <= 0.0) {
            self.fail(
                "gamma",
                format!("gamma = {g} violates the precondition γ > 0 (the contraction rate γ/(γ²C0 + C1) needs a positive refresh rate)"),
            );
        }
        g
    }

    fn eps(&mut self, key: &str, e: f64) {
        if !(e > 0.0 && e < 1.0) {
            self.fail(key, format!("must lie in (0, 1), got {e}"));
        }
    }
}

impl ExperimentConfig {
    /// Keys set in this config, in file spelling.
    fn present_keys(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => {
                map.into_iter().filter(|(_, v)| !v.is_null()).map(|(k, _)| k).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Check every precondition and resolve defaults. All violations are
    /// reported, not just the first.
    pub fn validate(&self) -> Result<Plan, Vec<Violation>> {
        let mut c = Checker { violations: Vec::new() };
        let Some(command) = self.command else {
            c.fail("command", "is required (simulate, liftcheck, spectral, circle, bounds or reproduce)");
            return Err(c.violations);
        };
        for key in self.present_keys() {
            let general = ["command", "seed", "out", "threads"].contains(&key.as_str());
            if !general && !command.keys().contains(&key.as_str()) {
                c.fail(&key, format!("does not apply to `{}`", command.as_str()));
            }
        }
        if self.threads == Some(0) {
            c.fail("threads", "must be at least 1");
        }
        let plan = match command {
            Command::Simulate => self.simulate(&mut c).map(Plan::Simulate),
            Command::Liftcheck => self.liftcheck(&mut c).map(Plan::Liftcheck),
            Command::Spectral => self.spectral(&mut c).map(Plan::Spectral),
            Command::Circle => self.circle(&mut c).map(Plan::Circle),
            Command::Bounds => self.bounds(&mut c).map(Plan::Bounds),
            Command::Reproduce => match self.target {
                Some(t) => Some(Plan::Reproduce(t)),
                None => {
                    let names = Target::value_variants().iter().map(|t| t.as_str()).collect::<Vec<_>>();
                    c.fail("target", format!("is required (one of {})", names.join(", ")));
                    None
                }
            },
        };
        match plan {
            Some(plan) if c.violations.is_empty() => Ok(plan),
            _ => Err(c.violations),
        }
    }

    fn simulate(&self, c: &mut Checker) -> Option<SimulatePlan> {
        let all = [Process::Overdamped, Process::Hamiltonian, Process::Langevin, Process::Rhmc, Process::Bps];
        let process = c.process(self.process.as_deref(), &all);
        let potential = c.potential(self.potential.as_deref());
        let gamma = c.gamma(self.gamma.as_ref(), process, 1.0);
        let chains = c.count("chains", self.chains, 1, 1);
        let horizon = c.positive("horizon", self.horizon, 10.0);
        let step = c.positive("step", self.step, 0.01);
        let record_every = c.positive("record_every", self.record_every, 0.1);
        let (process, potential) = (process?, potential?);
        let d = potential.dim();
        let x = self.x0.clone().unwrap_or_else(|| vec![0.0; d]);
        let v = match (&self.v0, process) {
            (_, Process::Overdamped) => Vec::new(),
            (Some(v), _) => v.clone(),
            (None, _) => (0..d).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
        };
        if x.len() != d {
            c.fail("x0", format!("has {} entries, the potential has dimension {d}", x.len()));
        }
        if process.is_lift() && v.len() != d {
            c.fail("v0", format!("has {} entries, the potential has dimension {d}", v.len()));
        }
        let init = if process.is_lift() { PhaseState::new(x, v) } else { PhaseState::position_only(x) };
        let init = match init {
            Ok(s) => s,
            Err(e) => {
                c.fail("x0", e.to_string());
                return None;
            }
        };
        Some(SimulatePlan { process, potential, gamma, chains, horizon, step, record_every, init })
    }

    fn liftcheck(&self, c: &mut Checker) -> Option<LiftcheckPlan> {
        let process = c.process(self.process.as_deref(), &Process::LIFTS);
        let potential = c.potential(self.potential.as_deref());
        let degree = c.count("degree", self.degree, 4, 1);
        let chains = c.count("chains", self.chains, 100, 2);
        let samples = c.count("samples", self.samples, 1_000_000, chains.max(2));
        Some(LiftcheckPlan { process: process?, potential: potential?, degree, samples, chains })
    }

    fn spectral(&self, c: &mut Checker) -> Option<SpectralPlan> {
        let method = match self.method.as_deref().unwrap_or("galerkin") {
            "galerkin" => SpectralMethod::Galerkin,
            "empirical" => SpectralMethod::Empirical,
            other => {
                c.fail("method", format!("unknown method '{other}'; expected galerkin or empirical"));
                SpectralMethod::Galerkin
            }
        };
        let allowed: &[Process] = match method {
            SpectralMethod::Galerkin => &[Process::Overdamped, Process::Langevin, Process::Rhmc],
            SpectralMethod::Empirical => &[Process::Overdamped, Process::Langevin, Process::Rhmc, Process::Bps],
        };
        let process = match (&self.process, &self.sweep_gamma) {
            (None, Some(_)) => Some(Process::Langevin),
            _ => c.process(self.process.as_deref(), allowed),
        };
        let potential = c.potential(self.potential.as_deref());
        let gamma = match process {
            Some(Process::Overdamped) => {
                if self.gamma.is_some() {
                    c.fail("gamma", "the overdamped diffusion has no refresh rate");
                }
                0.0
            }
            p => c.gamma(self.gamma.as_ref(), p, 1.0),
        };
        let degree = c.count("degree", self.degree, DEFAULT_DEGREE, 2);
        let grid = match parse_range(self.grid.as_deref().unwrap_or("0:20:0.05")) {
            Ok(g) if g.first() == Some(&0.0) => g,
            Ok(_) => {
                c.fail("grid", "must start at 0");
                Vec::new()
            }
            Err(e) => {
                c.fail("grid", e);
                Vec::new()
            }
        };
        let eps = self.eps.clone().unwrap_or_else(|| vec![(-1.0f64).exp()]);
        if eps.is_empty() {
            c.fail("eps", "needs at least one value");
        }
        for &e in &eps {
            c.eps("eps", e);
        }
        let sweep = match &self.sweep_gamma {
            None => None,
            Some(s) => match parse_range(s) {
                Ok(g) if g.iter().all(|&x| x > 0.0) => Some(g),
                Ok(_) => {
                    c.fail("sweep_gamma", "refresh rates must be positive");
                    None
                }
                Err(e) => {
                    c.fail("sweep_gamma", e);
                    None
                }
            },
        };
        if sweep.is_some() && !matches!(process, Some(Process::Langevin | Process::Rhmc)) {
            c.fail("sweep_gamma", "sweeps need the langevin or rhmc process");
        }
        if sweep.is_some() && method == SpectralMethod::Empirical {
            c.fail("sweep_gamma", "sweeps use the galerkin method");
        }
        let outer = c.count("outer", self.outer, 200, 2);
        let inner = c.count("inner", self.inner, 50, 2);
        let step = c.positive("step", self.step, 0.01);
        let potential = potential?;
        if method == SpectralMethod::Galerkin && potential.dim() != 1 {
            c.fail("potential", "Galerkin analysis needs a one-dimensional potential; use method = empirical");
        }
        Some(SpectralPlan { process: process?, potential, gamma, degree, grid, eps, method, outer, inner, step, sweep })
    }

    fn circle(&self, c: &mut Checker) -> Option<CirclePlan> {
        let ns = self.n.clone().unwrap_or_else(|| vec![9, 17, 33, 65]);
        if ns.is_empty() {
            c.fail("n", "needs at least one circle size");
        }
        for &n in &ns {
            if !(2..=4096).contains(&n) {
                c.fail("n", format!("circle sizes must lie in [2, 4096], got {n}"));
            }
        }
        let eps_rule = match self.eps_rule.as_deref().unwrap_or("1/n") {
            "1/n" => EpsRule::InverseN,
            s => match s.parse::<f64>() {
                Ok(e) if (0.0..=1.0).contains(&e) => EpsRule::Fixed(e),
                _ => {
                    c.fail("eps_rule", format!("expected '1/n' or a probability in [0, 1], got '{s}'"));
                    EpsRule::InverseN
                }
            },
        };
        let tol = self.tol.unwrap_or(0.25);
        c.eps("tol", tol);
        Some(CirclePlan { ns, eps_rule, tol })
    }

    fn bounds(&self, c: &mut Checker) -> Option<BoundsPlan> {
        let potential = match &self.potential {
            None => None,
            Some(s) => c.potential(Some(s)),
        };
        if let Some(p) = &potential {
            if p.dim() != 1 {
                c.fail("potential", "measured relaxation times need a one-dimensional potential");
            }
            if self.m.is_some() {
                c.fail("m", "is derived from the potential; give one or the other");
            }
            if self.kappa_minus.is_some() {
                c.fail("kappa_minus", "is derived from the potential; give one or the other");
            }
        } else if self.potential.is_none() && self.m.is_none() {
            c.fail("m", "is required unless a potential is given");
        }
        let m = self.m.unwrap_or(1.0);
        if !(m > 0.0 && m.is_finite()) {
            c.fail("m", format!("must be positive, got {m}"));
        }
        let kappa = self.kappa_minus.unwrap_or(0.0);
        if !(kappa >= 0.0 && kappa.is_finite()) {
            c.fail("kappa_minus", format!("must be non-negative, got {kappa}"));
        }
        if self.t.is_some() && self.auto_t == Some(true) {
            c.fail("T", "give either T or auto_T, not both");
        }
        if let Some(t) = self.t {
            if !(t > 0.0 && t.is_finite()) {
                c.fail("T", format!("must be positive, got {t}"));
            }
        }
        let gamma = match &self.gamma {
            None => None,
            Some(GammaSpec::Word(w)) if w == "auto" => None,
            Some(GammaSpec::Word(w)) => {
                c.fail("gamma", format!("expected a number or 'auto', got '{w}'"));
                None
            }
            Some(GammaSpec::Value(g)) => {
                if !(*g > 0.0 && g.is_finite()) {
                    c.fail(
                        "gamma",
                        format!("gamma = {g} violates the precondition γ > 0 (the contraction rate γ/(γ²C0 + C1) needs a positive refresh rate)"),
                    );
                }
                Some(*g)
            }
        };
        let eps = match self.eps.as_deref() {
            None => (-1.0f64).exp(),
            Some([e]) => *e,
            Some(_) => {
                c.fail("eps", "bounds take a single eps");
                (-1.0f64).exp()
            }
        };
        c.eps("eps", eps);
        let degree = c.count("degree", self.degree, DEFAULT_DEGREE, 2);
        let mut input = BoundsInput::new(m, kappa, eps);
        input.m = Tagged::exact(m);
        input.t = self.t;
        input.gamma = gamma;
        Some(BoundsPlan { input, potential, degree })
    }
}

/// Byte offset to 1-based line and column.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parse a config text. Syntax and type errors carry a line and column.
pub fn parse_config(path: &Path, text: &str) -> Result<ExperimentConfig, ConfigError> {
    toml::from_str::<ExperimentConfig>(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        ConfigError::Parse { path: path.to_path_buf(), line, column, message: e.message().to_string() }
    })
}

/// Read, parse and precondition-check a config file.
pub fn validate_config(path: &Path) -> Result<(ExperimentConfig, Plan), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let config = parse_config(path, &text)?;
    let plan = config.validate().map_err(ConfigError::Invalid)?;
    Ok((config, plan))
}

impl ExperimentConfig {
    /// The config as a flat TOML document.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serialises")
    }
}
