// SPDX-License-Identifier: Apache-2.0

//! Scenario configuration files.
//!
//! A config is a TOML document with one table per concern and an array of
//! `[[detector]]` tables. Every numeric field accepts either a number or an
//! arithmetic expression string such as `"4*pi"` or `"3*L/4"`; the names
//! `pi`, `e` and `L` (the cavity length) are predefined. Unknown keys are
//! rejected.
//!
//! ```toml
//! scenario = "unruh"
//! picture = "interaction"
//!
//! [cavity]
//! length = "4*pi"
//! boundary = "periodic"
//! modes = 40
//!
//! [[detector]]
//! gap = 4
//! coupling = 0.01
//! switching = "gaussian"
//! delta = "8/7"
//! position = 0
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cavity::{Boundary, CavityConfig, DetectorConfig, InitialState, Picture, SwitchingProfile, System, Worldline};
use crate::evolver::{IntegratorConfig, Method, STEP_CEILING_FRACTION};
use crate::{Error, Result};

/// A number, or an expression evaluated when the config is resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Expr(String),
}

impl From<f64> for Quantity {
    fn from(x: f64) -> Self {
        Quantity::Number(x)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Number(x) => write!(f, "{x}"),
            Quantity::Expr(s) => f.write_str(s),
        }
    }
}

/// Integer literals become floats so that `8/7` is not truncated.
fn promote_integers(src: &str) -> String {
    let bytes = src.as_bytes();
    let mut out = String::with_capacity(src.len() + 8);
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let starts_literal = c.is_ascii_digit()
            && (i == 0 || {
                let p = bytes[i - 1] as char;
                !(p.is_ascii_alphanumeric() || p == '_' || p == '.' || p == ':')
            });
        if !starts_literal {
            out.push(c);
            i += 1;
            continue;
        }
        let start = i;
        let mut is_float = false;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'.' {
            is_float = true;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                is_float = true;
                i = j;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
        out.push_str(&src[start..i]);
        if !is_float {
            out.push_str(".0");
        }
    }
    out
}

/// Named values visible to expressions.
#[derive(Debug, Clone, Copy)]
pub struct Vars {
    pub length: Option<f64>,
}

impl Quantity {
    pub fn resolve(&self, vars: Vars, field: &str) -> Result<f64> {
        use evalexpr::{ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Value};
        let value = match self {
            Quantity::Number(x) => *x,
            Quantity::Expr(src) => {
                let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
                let mut set = |name: &str, v: f64| {
                    ctx.set_value(name.into(), Value::Float(v))
                        .expect("plain float variables are always accepted");
                };
                set("pi", std::f64::consts::PI);
                set("e", std::f64::consts::E);
                if let Some(l) = vars.length {
                    set("L", l);
                }
                evalexpr::eval_number_with_context(&promote_integers(src), &ctx)
                    .map_err(|e| Error::Config(format!("{field}: cannot evaluate {src:?}: {e}")))?
            }
        };
        if !value.is_finite() {
            return Err(Error::Config(format!("{field}: value {value} is not finite")));
        }
        Ok(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    SwitchingNoise,
    Causality,
    Unruh,
    Harvesting,
    CrossValidation,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::SwitchingNoise,
        ScenarioKind::Causality,
        ScenarioKind::Unruh,
        ScenarioKind::Harvesting,
        ScenarioKind::CrossValidation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::SwitchingNoise => "switching_noise",
            ScenarioKind::Causality => "causality",
            ScenarioKind::Unruh => "unruh",
            ScenarioKind::Harvesting => "harvesting",
            ScenarioKind::CrossValidation => "cross_validation",
        }
    }

    /// The checked-in default config for this scenario.
    pub fn builtin(self) -> &'static str {
        match self {
            ScenarioKind::SwitchingNoise => include_str!("../../../configs/switching_noise.cfg"),
            ScenarioKind::Causality => include_str!("../../../configs/causality.cfg"),
            ScenarioKind::Unruh => include_str!("../../../configs/unruh.cfg"),
            ScenarioKind::Harvesting => include_str!("../../../configs/harvesting.cfg"),
            ScenarioKind::CrossValidation => include_str!("../../../configs/cross_validation.cfg"),
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}")))
    }
}

fn default_picture() -> Picture {
    Picture::Interaction
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub length: Quantity,
    pub boundary: Boundary,
    /// `N`: Dirichlet modes `1..=N`, periodic `±1..=±N`.
    pub modes: usize,
    #[serde(default, skip_serializing_if = "is_false")]
    pub include_zero_mode: bool,
    /// Divide mode functions by `√(ω_n L)`; off by default.
    #[serde(default, skip_serializing_if = "is_false")]
    pub normalize_modes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchingKind {
    Sharp,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub gap: Quantity,
    pub coupling: Quantity,
    pub switching: SwitchingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Quantity>,
    pub position: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceleration: Option<Quantity>,
    /// Initial single-mode squeezing `r`; vacuum when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeezing: Option<Quantity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Rk45,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub method: MethodKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_ceiling: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_ceiling_fraction: Option<Quantity>,
    #[serde(default)]
    pub resymplectify_every: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            method: MethodKind::Rk45,
            rtol: None,
            atol: None,
            dt: None,
            drift_ceiling: None,
            step_ceiling_fraction: None,
            resymplectify_every: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Gaussian width of every detector.
    Delta,
    /// Proper acceleration of every detector.
    Acceleration,
    /// Field-mode count `N`.
    Modes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Quantity>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

/// Sample grid `τ = end·k/samples`, `k = 0..=samples`, for sharp switching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimelineSection {
    pub end: Quantity,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    ExcitationProbability,
    GroundProbability,
    LogNegativity,
    Temperature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    pub observable: Observable,
    pub tolerance: Quantity,
    pub schedule: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Fraction `η` of the final separation that marks divergence onset.
    #[serde(default = "AnalysisSection::default_onset")]
    pub onset_fraction: f64,
    /// Log-negativity level that counts as entangled.
    #[serde(default = "AnalysisSection::default_negativity")]
    pub negativity_threshold: f64,
    /// Largest admissible `delta_p0 / p1_therm`.
    #[serde(default = "AnalysisSection::default_thermality")]
    pub thermality_ratio: f64,
    /// Number of random systems for cross-validation.
    #[serde(default = "AnalysisSection::default_cases")]
    pub cases: usize,
    /// Gaussian switching runs over `[-k δ, k δ]` with this `k`.
    #[serde(default = "AnalysisSection::default_window")]
    pub window_deltas: f64,
}

impl AnalysisSection {
    fn default_onset() -> f64 {
        0.01
    }
    fn default_negativity() -> f64 {
        1e-6
    }
    fn default_thermality() -> f64 {
        1e-5
    }
    fn default_cases() -> usize {
        20
    }
    fn default_window() -> f64 {
        4.0
    }
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            onset_fraction: Self::default_onset(),
            negativity_threshold: Self::default_negativity(),
            thermality_ratio: Self::default_thermality(),
            cases: Self::default_cases(),
            window_deltas: Self::default_window(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default = "default_picture")]
    pub picture: Picture,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub cavity: CavitySection,
    #[serde(default, rename = "detector")]
    pub detectors: Vec<DetectorSection>,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeline: Option<TimelineSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

/// Parses and validates config text.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Per-detector values after expression evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedDetector {
    pub gap: f64,
    pub coupling: f64,
    pub delta: Option<f64>,
    pub position: f64,
    pub acceleration: f64,
    pub squeezing: f64,
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical serialisation, hex encoded.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn length(&self) -> Result<f64> {
        let l = self.cavity.length.resolve(Vars { length: None }, "cavity.length")?;
        if l <= 0.0 {
            return Err(Error::Config(format!("cavity.length must be positive, got {l}")));
        }
        Ok(l)
    }

    fn vars(&self) -> Result<Vars> {
        Ok(Vars {
            length: Some(self.length()?),
        })
    }

    pub fn resolve(&self, q: &Quantity, field: &str) -> Result<f64> {
        q.resolve(self.vars()?, field)
    }

    pub fn detector(&self, i: usize) -> Result<ResolvedDetector> {
        let d = self
            .detectors
            .get(i)
            .ok_or_else(|| Error::Config(format!("detector {i} is not defined")))?;
        let field = |name: &str| format!("detector[{i}].{name}");
        let opt = |q: &Option<Quantity>, name: &str| q.as_ref().map(|q| self.resolve(q, &field(name))).transpose();
        let out = ResolvedDetector {
            gap: self.resolve(&d.gap, &field("gap"))?,
            coupling: self.resolve(&d.coupling, &field("coupling"))?,
            delta: opt(&d.delta, "delta")?,
            position: self.resolve(&d.position, &field("position"))?,
            acceleration: opt(&d.acceleration, "acceleration")?.unwrap_or(0.0),
            squeezing: opt(&d.squeezing, "squeezing")?.unwrap_or(0.0),
        };
        if out.gap <= 0.0 {
            return Err(Error::Config(format!("{}: must be positive, got {}", field("gap"), out.gap)));
        }
        if out.coupling < 0.0 {
            return Err(Error::Config(format!(
                "{}: must be non-negative, got {}",
                field("coupling"),
                out.coupling
            )));
        }
        if out.acceleration < 0.0 {
            return Err(Error::Config(format!("{}: must be non-negative", field("acceleration"))));
        }
        match (d.switching, out.delta) {
            (SwitchingKind::Gaussian, None) => {
                return Err(Error::Config(format!("{}: required for gaussian switching", field("delta"))))
            }
            (SwitchingKind::Gaussian, Some(x)) if x <= 0.0 => {
                return Err(Error::Config(format!("{}: must be positive, got {x}", field("delta"))))
            }
            _ => {}
        }
        Ok(out)
    }

    /// Values of the sweep axis, if any.
    pub fn sweep_values(&self) -> Result<Option<Vec<f64>>> {
        let Some(s) = &self.sweep else { return Ok(None) };
        let values = match (&s.values, &s.start, &s.stop, s.count) {
            (Some(v), None, None, None) => v
                .iter()
                .enumerate()
                .map(|(i, q)| self.resolve(q, &format!("sweep.values[{i}]")))
                .collect::<Result<Vec<_>>>()?,
            (None, Some(a), Some(b), Some(n)) if n >= 2 => {
                let a = self.resolve(a, "sweep.start")?;
                let b = self.resolve(b, "sweep.stop")?;
                (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
            }
            _ => {
                return Err(Error::Config(
                    "sweep: give either `values` or `start`, `stop` and `count >= 2`".into(),
                ))
            }
        };
        if values.is_empty() {
            return Err(Error::Config("sweep: no values".into()));
        }
        let positive = match s.parameter {
            SweepParameter::Delta => values.iter().all(|&v| v > 0.0),
            SweepParameter::Acceleration => values.iter().all(|&v| v >= 0.0),
            SweepParameter::Modes => values.iter().all(|&v| v >= 1.0 && v.fract() == 0.0),
        };
        if !positive {
            return Err(Error::Config(format!("sweep: invalid values for {:?}: {values:?}", s.parameter)));
        }
        Ok(Some(values))
    }

    /// `(end, samples)` of the sharp-switching time grid.
    pub fn timeline(&self) -> Result<Option<(f64, usize)>> {
        let Some(t) = &self.timeline else { return Ok(None) };
        let end = self.resolve(&t.end, "timeline.end")?;
        if end <= 0.0 || t.samples == 0 {
            return Err(Error::Config("timeline: end and samples must be positive".into()));
        }
        Ok(Some((end, t.samples)))
    }

    pub fn convergence_tolerance(&self) -> Result<Option<f64>> {
        let Some(c) = &self.convergence else { return Ok(None) };
        let tol = self.resolve(&c.tolerance, "convergence.tolerance")?;
        if tol <= 0.0 {
            return Err(Error::Config("convergence.tolerance must be positive".into()));
        }
        Ok(Some(tol))
    }

    pub fn integrator(&self) -> Result<IntegratorConfig<f64>> {
        let s = &self.integrator;
        let opt = |q: &Option<Quantity>, name: &str| {
            q.as_ref()
                .map(|q| self.resolve(q, &format!("integrator.{name}")))
                .transpose()
        };
        let method = match s.method {
            MethodKind::Rk45 => Method::Rk45Adaptive {
                rtol: opt(&s.rtol, "rtol")?.unwrap_or(1e-9),
                atol: opt(&s.atol, "atol")?.unwrap_or(1e-12),
            },
            MethodKind::Rk4 => Method::Rk4Fixed {
                dt: opt(&s.dt, "dt")?
                    .ok_or_else(|| Error::Config("integrator.dt: required for rk4".into()))?,
            },
        };
        let cfg = IntegratorConfig {
            method,
            resymplectify_every: s.resymplectify_every,
            drift_ceiling: opt(&s.drift_ceiling, "drift_ceiling")?.unwrap_or(1e-6),
            step_ceiling_fraction: opt(&s.step_ceiling_fraction, "step_ceiling_fraction")?
                .unwrap_or(STEP_CEILING_FRACTION),
            ..IntegratorConfig::default()
        };
        cfg.validate().map_err(|e| Error::Config(format!("integrator: {e}")))?;
        Ok(cfg)
    }

    /// Cavity with `n` modes per the boundary's default mode set.
    pub fn cavity_config(&self, n: usize) -> Result<CavityConfig<f64>> {
        CavityConfig::with_mode_count(self.length()?, self.cavity.boundary, n, self.cavity.include_zero_mode)?
            .with_normalization(self.cavity.normalize_modes)
    }

    /// Detector `i` with optional sweep overrides of `δ` and `a`.
    pub fn detector_config(&self, i: usize, delta: Option<f64>, accel: Option<f64>) -> Result<DetectorConfig<f64>> {
        let d = self.detector(i)?;
        let switching = match self.detectors[i].switching {
            SwitchingKind::Sharp => SwitchingProfile::Sharp { lambda: d.coupling },
            SwitchingKind::Gaussian => SwitchingProfile::Gaussian {
                lambda: d.coupling,
                delta: delta.or(d.delta).expect("validated"),
            },
        };
        let a = accel.unwrap_or(d.acceleration);
        let worldline = if a > 0.0 {
            Worldline::accelerated(a, d.position)?
        } else {
            Worldline::inertial(d.position)
        };
        let state = if d.squeezing != 0.0 {
            InitialState::Squeezed { r: d.squeezing }
        } else {
            InitialState::Vacuum
        };
        Ok(DetectorConfig::new(d.gap, switching, worldline).with_initial_state(state))
    }

    /// The system at mode count `n` with every detector, before sweeps.
    pub fn system(&self, n: usize) -> Result<System<f64>> {
        self.system_with(n, None, None)
    }

    pub fn system_with(&self, n: usize, delta: Option<f64>, accel: Option<f64>) -> Result<System<f64>> {
        let detectors = (0..self.detectors.len())
            .map(|i| self.detector_config(i, delta, accel))
            .collect::<Result<Vec<_>>>()?;
        System::new(self.cavity_config(n)?, detectors, self.picture)
    }

    /// Checks every field; called by [`parse_config`].
    pub fn validate(&self) -> Result<()> {
        self.length()?;
        if self.cavity.modes == 0 {
            return Err(Error::Config("cavity.modes must be at least 1".into()));
        }
        if self.detectors.is_empty() && self.scenario != ScenarioKind::CrossValidation {
            return Err(Error::Config("at least one [[detector]] is required".into()));
        }
        for i in 0..self.detectors.len() {
            self.detector(i)?;
        }
        self.integrator()?;
        self.sweep_values()?;
        self.timeline()?;
        self.convergence_tolerance()?;
        if let Some(c) = &self.convergence {
            if c.schedule.len() < 2 || c.schedule.windows(2).any(|w| w[0] >= w[1]) || c.schedule[0] == 0 {
                return Err(Error::Config(
                    "convergence.schedule must list at least two strictly increasing positive counts".into(),
                ));
            }
        }
        let a = &self.analysis;
        if !(a.onset_fraction > 0.0 && a.onset_fraction < 1.0) {
            return Err(Error::Config("analysis.onset_fraction must lie in (0, 1)".into()));
        }
        if !(a.window_deltas >= 1.0 && a.window_deltas.is_finite()) {
            return Err(Error::Config("analysis.window_deltas must be at least 1".into()));
        }
        if a.negativity_threshold <= 0.0 || a.thermality_ratio <= 0.0 {
            return Err(Error::Config("analysis thresholds must be positive".into()));
        }
        if !self.detectors.is_empty() {
            self.cavity_config(self.cavity.modes).map_err(|e| Error::Config(format!("cavity: {e}")))?;
            self.system(self.cavity.modes).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Replaces the mode-count schedule: the sweep values when sweeping over
    /// `N`, otherwise the convergence schedule, otherwise `cavity.modes`.
    pub fn override_modes(&mut self, modes: &[usize]) -> Result<()> {
        if modes.is_empty() {
            return Err(Error::Config("--modes: empty list".into()));
        }
        match (&mut self.sweep, &mut self.convergence) {
            (Some(s), _) if s.parameter == SweepParameter::Modes => {
                s.values = Some(modes.iter().map(|&n| Quantity::Number(n as f64)).collect());
                s.start = None;
                s.stop = None;
                s.count = None;
            }
            (_, Some(_)) if modes.len() == 1 => self.convergence = None,
            (_, Some(c)) => c.schedule = modes.to_vec(),
            _ if modes.len() == 1 => {}
            _ => {
                return Err(Error::Config(
                    "--modes: this config has no convergence schedule; give a single N".into(),
                ))
            }
        }
        self.cavity.modes = modes[0];
        self.validate()
    }

    pub fn override_seed(&mut self, seed: u64) -> Result<()> {
        self.seed = Some(seed);
        self.validate()
    }

    /// Replaces the sweep grid with explicit values.
    pub fn override_sweep(&mut self, values: &[f64]) -> Result<()> {
        let s = self
            .sweep
            .as_mut()
            .ok_or_else(|| Error::Config("--sweep: this config has no [sweep] section".into()))?;
        if values.is_empty() {
            return Err(Error::Config("--sweep: empty list".into()));
        }
        s.values = Some(values.iter().map(|&v| Quantity::Number(v)).collect());
        s.start = None;
        s.stop = None;
        s.count = None;
        self.validate()
    }

    pub fn override_tolerance(&mut self, tol: f64) -> Result<()> {
        let c = self
            .convergence
            .as_mut()
            .ok_or_else(|| Error::Config("--tolerance: this config has no [convergence] section".into()))?;
        c.tolerance = Quantity::Number(tol);
        self.validate()
    }
}
