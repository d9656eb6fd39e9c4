// SPDX-License-Identifier: Apache-2.0

//! Canned experiments built from a [`ScenarioConfig`]: switching noise,
//! causal signalling between two detectors, the temperature of an
//! accelerated detector, entanglement harvesting, and the dual-method
//! cross-check. Each returns one or more [`ScenarioResult`] tables.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::cavity::{SwitchingProfile, System};
use crate::config::{Observable, ScenarioConfig, ScenarioKind, SweepParameter};
use crate::evolver::{evolve_with, static_evolve_with, IntegratorConfig};
use crate::gaussian::{
    excitation_probability, log_negativity, nu_minus_one, temperature_from_excess,
    thermality_gap, CovarianceMatrix, SymplecticMatrix, PHYSICAL_TOL,
};
use crate::oracle::{random_suite, CrossValidationConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            values,
        }
    }
}

/// Invariant checks accumulated over every evolution of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Checks {
    /// Largest `‖SΩSᵀ − Ω‖∞` over final states.
    pub max_drift: f64,
    /// Largest `|det σ − 1|` over final states of pure starts.
    pub max_det_error: f64,
    pub evolutions: usize,
}

impl Checks {
    fn merge(&mut self, o: Checks) {
        self.max_drift = self.max_drift.max(o.max_drift);
        self.max_det_error = self.max_det_error.max(o.max_det_error);
        self.evolutions += o.evolutions;
    }

    /// Records the final `S` of one evolution started from `sigma0`.
    ///
    /// The physicality slack grows with the symplectic drift of `S` and with
    /// the round-off a strongly squeezed `sigma0` carries into `ν`.
    fn record(&mut self, s: &SymplecticMatrix<f64>, sigma0: &CovarianceMatrix<f64>) -> Result<()> {
        let drift = s.drift();
        self.max_drift = self.max_drift.max(drift);
        let sigma = crate::gaussian::evolve_covariance(s, sigma0)?;
        let slack = PHYSICAL_TOL
            .max(10.0 * drift)
            .max(10.0 * f64::EPSILON * sigma0.condition_number());
        sigma.check_physical_within(slack)?;
        if (sigma0.det() - 1.0).abs() < 1e-12 {
            self.max_det_error = self.max_det_error.max((sigma.det() - 1.0).abs());
        }
        self.evolutions += 1;
        Ok(())
    }
}

/// One mode count tried by [`mode_convergence`] and how much the observable
/// moved on going to the next count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceStep {
    pub modes: usize,
    pub change: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Metadata {
    /// `N` used for the emitted series.
    pub modes: usize,
    pub convergence: Vec<ConvergenceStep>,
    pub integrator: IntegratorConfig<f64>,
    pub checks: Checks,
    pub wall_time: f64,
    pub summary: BTreeMap<String, f64>,
    /// Per-point violations that do not abort the run.
    pub flags: Vec<Flag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagKind {
    /// A point failed the `delta_p0 ≤ ratio · p1_therm` check.
    Thermality,
    /// The onset the scenario looks for never happened in the window.
    NoOnset,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flag {
    pub kind: FlagKind,
    pub message: String,
}

impl Flag {
    fn new(kind: FlagKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub scenario: String,
    /// File stem of the emitted table.
    pub label: String,
    pub axis: Series,
    pub series: Vec<Series>,
    pub metadata: Metadata,
}

impl ScenarioResult {
    fn new(kind: ScenarioKind, label: &str, axis: Series, series: Vec<Series>, metadata: Metadata) -> Result<Self> {
        if let Some(s) = series.iter().find(|s| s.values.len() != axis.values.len()) {
            return Err(Error::InvalidArgument(format!(
                "series {} has {} values for an axis of {}",
                s.name,
                s.values.len(),
                axis.values.len()
            )));
        }
        Ok(Self {
            scenario: kind.name().to_string(),
            label: label.to_string(),
            axis,
            series,
            metadata,
        })
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        if self.axis.name == name {
            return Some(&self.axis.values);
        }
        self.series.iter().find(|s| s.name == name).map(|s| s.values.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePolicy {
    pub observable: Observable,
    pub tolerance: f64,
    pub schedule: Vec<usize>,
}

impl ConvergencePolicy {
    pub fn new(observable: Observable, tolerance: f64, schedule: Vec<usize>) -> Result<Self> {
        if schedule.len() < 2 || schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "convergence schedule needs at least two strictly increasing mode counts".into(),
            ));
        }
        if tolerance <= 0.0 {
            return Err(Error::Config("convergence tolerance must be positive".into()));
        }
        Ok(Self {
            observable,
            tolerance,
            schedule,
        })
    }

    fn from_config(cfg: &ScenarioConfig) -> Result<Option<Self>> {
        match (&cfg.convergence, cfg.convergence_tolerance()?) {
            (Some(c), Some(tol)) => Self::new(c.observable, tol, c.schedule.clone()).map(Some),
            _ => Ok(None),
        }
    }
}

/// Outcome of [`mode_convergence`]: the run at `modes` plus the history.
#[derive(Debug, Clone)]
pub struct Converged<R> {
    pub modes: usize,
    pub history: Vec<ConvergenceStep>,
    pub result: R,
}

/// Runs `run(N)` along the schedule and stops at the first `N` whose
/// observable differs from the next one's by less than the tolerance
/// (largest entrywise change across the series).
pub fn mode_convergence<R, F>(policy: &ConvergencePolicy, mut run: F) -> Result<Converged<R>>
where
    F: FnMut(usize) -> Result<(Vec<f64>, R)>,
{
    let mut history = Vec::new();
    let mut prev: Option<(usize, Vec<f64>, R)> = None;
    for &n in &policy.schedule {
        let (obs, result) = run(n)?;
        if let Some((pn, pobs, presult)) = prev.take() {
            if pobs.len() != obs.len() {
                return Err(Error::InvalidArgument("observable length changed with N".into()));
            }
            let change = pobs.iter().zip(&obs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            history.push(ConvergenceStep {
                modes: pn,
                change: Some(change),
            });
            if change < policy.tolerance {
                return Ok(Converged {
                    modes: pn,
                    history,
                    result: presult,
                });
            }
        }
        prev = Some((n, obs, result));
    }
    if let Some((n, _, _)) = prev {
        history.push(ConvergenceStep { modes: n, change: None });
    }
    let trail: Vec<String> = history
        .iter()
        .filter_map(|s| s.change.map(|c| format!("N={}: {c:.3e}", s.modes)))
        .collect();
    Err(Error::NonConvergence(format!(
        "{:?} did not settle below {:e} over {:?} ({})",
        policy.observable,
        policy.tolerance,
        policy.schedule,
        trail.join(", ")
    )))
}

/// Converges when the config asks for it, otherwise runs once at
/// `cavity.modes`.
fn converge_or_once<R, F>(cfg: &ScenarioConfig, want: Observable, mut run: F) -> Result<Converged<R>>
where
    F: FnMut(usize) -> Result<(Vec<f64>, R)>,
{
    match ConvergencePolicy::from_config(cfg)? {
        Some(p) => {
            if p.observable != want {
                return Err(Error::Config(format!(
                    "{} converges on {want:?}, config selects {:?}",
                    cfg.scenario.name(),
                    p.observable
                )));
            }
            mode_convergence(&p, run)
        }
        None => {
            let n = cfg.cavity.modes;
            let (_, result) = run(n)?;
            Ok(Converged {
                modes: n,
                history: Vec::new(),
                result,
            })
        }
    }
}

/// Covariance of the listed detectors (mode indices) after `S`.
pub fn detector_state(
    s: &SymplecticMatrix<f64>,
    sigma0: &CovarianceMatrix<f64>,
    detectors: &[usize],
) -> Result<CovarianceMatrix<f64>> {
    let k = s.modes();
    let rows: Vec<usize> = detectors.iter().copied().chain(detectors.iter().map(|d| d + k)).collect();
    let sd = s.matrix().select_rows(&rows);
    CovarianceMatrix::new(&sd * sigma0.matrix() * sd.transpose())
}

/// Evolves over `grid` (first entry is the start, last is the end) and
/// calls `observer` at every grid point. Static systems starting at switch-on
/// use matrix exponentials.
fn sample_grid<O>(system: &System<f64>, grid: &[f64], cfg: &IntegratorConfig<f64>, mut observer: O) -> Result<SymplecticMatrix<f64>>
where
    O: FnMut(f64, &SymplecticMatrix<f64>) -> Result<()>,
{
    let (&start, &end) = match (grid.first(), grid.last()) {
        (Some(a), Some(b)) if b > a => (a, b),
        _ => return Err(Error::InvalidArgument("sample grid needs two increasing points".into())),
    };
    let mut last = None;
    if system.is_static() && start == 0.0 {
        static_evolve_with(system, grid, |t, s| {
            observer(t, s)?;
            last = Some(s.clone());
            Ok(())
        })?;
    } else {
        let inner = &grid[1..grid.len() - 1];
        let summary = evolve_with(system, (start, end), cfg, inner, |t, s| observer(t, s))?;
        last = Some(summary.final_state);
    }
    Ok(last.expect("grid has an end point"))
}

fn uniform_grid(end: f64, samples: usize) -> Vec<f64> {
    (0..=samples).map(|k| end * k as f64 / samples as f64).collect()
}

/// First abscissa where `|y|` exceeds `level`, linearly interpolated.
pub fn first_crossing(x: &[f64], y: &[f64], level: f64) -> Option<f64> {
    let i = y.iter().position(|v| v.abs() > level)?;
    if i == 0 {
        return Some(x[0]);
    }
    let (y0, y1) = (y[i - 1].abs(), y[i].abs());
    Some(x[i - 1] + (x[i] - x[i - 1]) * (level - y0) / (y1 - y0))
}

/// Ordinary least squares `y ≈ slope·x + intercept` with its `R²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::InvalidArgument("linear fit needs two or more paired points".into()));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("linear fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Every mode count a run of `cfg` would use.
pub fn mode_counts(cfg: &ScenarioConfig) -> Result<Vec<usize>> {
    if let (Some(SweepParameter::Modes), Some(v)) = (cfg.sweep.as_ref().map(|s| s.parameter), cfg.sweep_values()?) {
        return Ok(v.into_iter().map(|x| x as usize).collect());
    }
    Ok(match &cfg.convergence {
        Some(c) => c.schedule.clone(),
        None => vec![cfg.cavity.modes],
    })
}

/// `(δ, a)` overrides for every sweep point; a single `(None, None)` when
/// the config does not sweep either. A timeline run is included as
/// `(None, None)` as well.
pub fn sweep_points(cfg: &ScenarioConfig) -> Result<Vec<(Option<f64>, Option<f64>)>> {
    let mut out = Vec::new();
    if cfg.timeline.is_some() {
        out.push((None, None));
    }
    match (cfg.sweep.as_ref().map(|s| s.parameter), cfg.sweep_values()?) {
        (Some(SweepParameter::Delta), Some(v)) => out.extend(v.into_iter().map(|d| (Some(d), None))),
        (Some(SweepParameter::Acceleration), Some(v)) => out.extend(v.into_iter().map(|a| (None, Some(a)))),
        _ => {}
    }
    if out.is_empty() {
        out.push((None, None));
    }
    Ok(out)
}

/// Proper-time window of one evolution. An explicit `delta` (or a gaussian
/// first detector without a timeline) gives `[-k δ, k δ]`; otherwise the
/// timeline `[0, end]`.
pub fn integration_window(cfg: &ScenarioConfig, delta: Option<f64>) -> Result<(f64, f64)> {
    let k = cfg.analysis.window_deltas;
    if let Some(d) = delta {
        return Ok((-k * d, k * d));
    }
    if let Some((end, _)) = cfg.timeline()? {
        return Ok((0.0, end));
    }
    match cfg.detector(0)?.delta {
        Some(d) => Ok((-k * d, k * d)),
        None => Err(Error::Config("no integration window: give a [timeline] or gaussian switching".into())),
    }
}

fn metadata(cfg: &ScenarioConfig, modes: usize, history: Vec<ConvergenceStep>, checks: Checks, start: Instant) -> Metadata {
    Metadata {
        modes,
        convergence: history,
        integrator: cfg.integrator().unwrap_or_default(),
        checks,
        wall_time: start.elapsed().as_secs_f64(),
        summary: BTreeMap::new(),
        flags: Vec::new(),
    }
}

fn expect_kind(cfg: &ScenarioConfig, kind: ScenarioKind) -> Result<()> {
    if cfg.scenario != kind {
        return Err(Error::Config(format!(
            "config is for {}, not {}",
            cfg.scenario.name(),
            kind.name()
        )));
    }
    Ok(())
}

fn with_switching(system: &System<f64>, f: impl Fn(SwitchingProfile<f64>) -> SwitchingProfile<f64>) -> Result<System<f64>> {
    let dets = system
        .detectors()
        .iter()
        .map(|d| {
            let mut d = d.clone();
            d.switching = f(d.switching);
            d
        })
        .collect();
    System::new(system.cavity().clone(), dets, system.picture())
}

/// Excitation of detector 0: `(τ, 1 − p₀(τ))` with sharp switching on the
/// timeline, and `(δ, 1 − p₀)` over the integration window for each Gaussian
/// width in the sweep.
pub fn run_switching_noise(cfg: &ScenarioConfig) -> Result<Vec<ScenarioResult>> {
    expect_kind(cfg, ScenarioKind::SwitchingNoise)?;
    let icfg = cfg.integrator()?;
    let mut out = Vec::new();

    if let Some((end, samples)) = cfg.timeline()? {
        let start = Instant::now();
        let grid = uniform_grid(end, samples);
        let conv = converge_or_once(cfg, Observable::ExcitationProbability, |n| {
            let system = with_switching(&cfg.system(n)?, |s| SwitchingProfile::Sharp { lambda: s.strength() })?;
            let sigma0 = system.initial_covariance();
            let mut series = Vec::with_capacity(grid.len());
            let last = sample_grid(&system, &grid, &icfg, |_, s| {
                series.push(excitation_probability(&detector_state(s, &sigma0, &[0])?)?);
                Ok(())
            })?;
            let mut checks = Checks::default();
            checks.record(&last, &sigma0)?;
            Ok((series.clone(), (series, checks)))
        })?;
        let (series, checks) = conv.result;
        let meta = metadata(cfg, conv.modes, conv.history, checks, start);
        out.push(ScenarioResult::new(
            cfg.scenario,
            "sharp",
            Series::new("tau", grid),
            vec![Series::new("excitation_probability", series)],
            meta,
        )?);
    }

    if let Some(deltas) = cfg.sweep_values()? {
        if cfg.sweep.as_ref().map(|s| s.parameter) != Some(SweepParameter::Delta) {
            return Err(Error::Config("switching_noise sweeps over delta".into()));
        }
        let start = Instant::now();
        let conv = converge_or_once(cfg, Observable::ExcitationProbability, |n| {
            let points = deltas
                .par_iter()
                .map(|&delta| {
                    let system = with_switching(&cfg.system(n)?, |s| SwitchingProfile::Gaussian {
                        lambda: s.strength(),
                        delta,
                    })?;
                    let sigma0 = system.initial_covariance();
                    let (a, b) = integration_window(cfg, Some(delta))?;
                    let last = sample_grid(&system, &[a, b], &icfg, |_, _| Ok(()))?;
                    let mut checks = Checks::default();
                    checks.record(&last, &sigma0)?;
                    Ok((excitation_probability(&detector_state(&last, &sigma0, &[0])?)?, checks))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut checks = Checks::default();
            points.iter().for_each(|(_, c)| checks.merge(*c));
            let series: Vec<f64> = points.into_iter().map(|(p, _)| p).collect();
            Ok((series.clone(), (series, checks)))
        })?;
        let (series, checks) = conv.result;
        let meta = metadata(cfg, conv.modes, conv.history, checks, start);
        out.push(ScenarioResult::new(
            cfg.scenario,
            "gaussian",
            Series::new("delta", deltas),
            vec![Series::new("excitation_probability", series)],
            meta,
        )?);
    }
    if out.is_empty() {
        return Err(Error::Config("switching_noise needs a [timeline] or a [sweep]".into()));
    }
    Ok(out)
}

/// Excitation probability of detector 0 while detector 1 starts in the vacuum
/// or squeezed, for every `N` in the sweep. One evolution serves both
/// initial states. The divergence onset `τ*` is the first time the two
/// curves separate by more than `η` times their final separation.
pub fn run_causality(cfg: &ScenarioConfig) -> Result<Vec<ScenarioResult>> {
    expect_kind(cfg, ScenarioKind::Causality)?;
    if cfg.detectors.len() != 2 {
        return Err(Error::Config("causality needs exactly two detectors".into()));
    }
    let (end, samples) = cfg
        .timeline()?
        .ok_or_else(|| Error::Config("causality needs a [timeline]".into()))?;
    let modes: Vec<usize> = match (cfg.sweep.as_ref().map(|s| s.parameter), cfg.sweep_values()?) {
        (Some(SweepParameter::Modes), Some(v)) => v.into_iter().map(|x| x as usize).collect(),
        (None, None) => vec![cfg.cavity.modes],
        _ => return Err(Error::Config("causality sweeps over modes only".into())),
    };
    let (d0, d1) = (cfg.detector(0)?, cfg.detector(1)?);
    let tau_c = (d1.position - d0.position).abs();
    if tau_c == 0.0 {
        return Err(Error::Config("causality needs separated detectors".into()));
    }
    let grid = uniform_grid(end, samples);
    let eta = cfg.analysis.onset_fraction;
    let icfg = cfg.integrator()?;

    modes
        .par_iter()
        .map(|&n| {
            let start = Instant::now();
            let system = cfg.system(n)?;
            for (i, d) in system.detectors().iter().enumerate() {
                if system.cavity().resonant_modes(d.gap).is_empty() {
                    return Err(Error::Config(format!(
                        "N = {n} does not reach the mode resonant with detector {i} (gap {})",
                        d.gap
                    )));
                }
            }
            let squeezed = system.initial_covariance();
            let ground = vacuum_start(&system);
            let (mut pg, mut ps) = (Vec::new(), Vec::new());
            let last = sample_grid(&system, &grid, &icfg, |_, s| {
                pg.push(excitation_probability(&detector_state(s, &ground, &[0])?)?);
                ps.push(excitation_probability(&detector_state(s, &squeezed, &[0])?)?);
                Ok(())
            })?;
            let mut checks = Checks::default();
            checks.record(&last, &ground)?;
            checks.record(&last, &squeezed)?;
            let x: Vec<f64> = grid.iter().map(|t| t / tau_c).collect();
            let diff: Vec<f64> = pg.iter().zip(&ps).map(|(a, b)| b - a).collect();
            let final_sep = diff.last().copied().unwrap_or(0.0).abs();
            let mut meta = metadata(cfg, n, Vec::new(), checks, start);
            meta.summary.insert("tau_c".into(), tau_c);
            meta.summary.insert("final_separation".into(), final_sep);
            match first_crossing(&x, &diff, eta * final_sep).filter(|_| final_sep > 0.0) {
                Some(onset) => {
                    meta.summary.insert("onset_tau_over_tauc".into(), onset);
                }
                None => meta.flags.push(Flag::new(FlagKind::NoOnset, "curves never separate")),
            }
            ScenarioResult::new(
                cfg.scenario,
                &format!("n{n}"),
                Series::new("tau_over_tauc", x),
                vec![
                    Series::new("p_ground_neighbor", pg),
                    Series::new("p_squeezed_neighbor", ps),
                ],
                meta,
            )
        })
        .collect()
}

fn vacuum_start(system: &System<f64>) -> CovarianceMatrix<f64> {
    CovarianceMatrix::vacuum(system.modes())
}

/// Temperature of one accelerated detector for each acceleration in the
/// sweep, with its thermality gap and an OLS line `T(a)`.
pub fn run_unruh(cfg: &ScenarioConfig) -> Result<Vec<ScenarioResult>> {
    expect_kind(cfg, ScenarioKind::Unruh)?;
    let accels = match (cfg.sweep.as_ref().map(|s| s.parameter), cfg.sweep_values()?) {
        (Some(SweepParameter::Acceleration), Some(v)) => v,
        _ => return Err(Error::Config("unruh sweeps over acceleration".into())),
    };
    if cfg.detectors.len() != 1 {
        return Err(Error::Config("unruh uses exactly one detector".into()));
    }
    let det = cfg.detector(0)?;
    let delta = det
        .delta
        .ok_or_else(|| Error::Config("unruh needs gaussian switching".into()))?;
    let (a, b) = integration_window(cfg, Some(delta))?;
    let window = [a, b];
    let icfg = cfg.integrator()?;
    let start = Instant::now();

    let conv = converge_or_once(cfg, Observable::Temperature, |n| {
        let points = accels
            .par_iter()
            .map(|&a| {
                let system = cfg.system_with(n, None, Some(a))?;
                let sigma0 = system.initial_covariance();
                let last = sample_grid(&system, &window, &icfg, |_, _| Ok(()))?;
                let mut checks = Checks::default();
                checks.record(&last, &sigma0)?;
                let sd = detector_state(&last, &sigma0, &[0])?;
                let excess = nu_minus_one(&sd)?;
                let gap = thermality_gap(&sd)?;
                Ok(([gap.nu, temperature_from_excess(excess, det.gap), gap.delta_p0, gap.p1_therm], checks))
            })
            .collect::<Result<Vec<_>>>()?;
        let temps = points.iter().map(|(p, _)| p[1]).collect();
        Ok((temps, points))
    })?;

    let mut checks = Checks::default();
    let mut cols = vec![Vec::new(); 4];
    for (p, c) in &conv.result {
        checks.merge(*c);
        for (col, v) in cols.iter_mut().zip(p) {
            col.push(*v);
        }
    }
    let mut meta = metadata(cfg, conv.modes, conv.history, checks, start);
    let ratio = cfg.analysis.thermality_ratio;
    for (i, a) in accels.iter().enumerate() {
        if cols[2][i] > ratio * cols[3][i] {
            meta.flags.push(Flag::new(
                FlagKind::Thermality,
                format!("a = {a}: delta_p0 {:e} exceeds {ratio:e} p1_therm ({:e})", cols[2][i], cols[3][i]),
            ));
        }
    }
    let fit = linear_fit(&accels, &cols[1])?;
    meta.summary.insert("fit_slope".into(), fit.slope);
    meta.summary.insert("fit_intercept".into(), fit.intercept);
    meta.summary.insert("fit_r_squared".into(), fit.r_squared);
    let [nu, temp, dp0, p1]: [Vec<f64>; 4] = cols.try_into().expect("four columns");
    Ok(vec![ScenarioResult::new(
        cfg.scenario,
        "unruh",
        Series::new("acceleration", accels),
        vec![
            Series::new("nu", nu),
            Series::new("temperature", temp),
            Series::new("delta_p0", dp0),
            Series::new("p1_therm", p1),
        ],
        meta,
    )?])
}

/// Log-negativity of the two-detector state along the timeline, and the
/// first `τ/τ_c` where it exceeds the configured threshold.
pub fn run_harvesting(cfg: &ScenarioConfig) -> Result<Vec<ScenarioResult>> {
    expect_kind(cfg, ScenarioKind::Harvesting)?;
    if cfg.detectors.len() != 2 {
        return Err(Error::Config("harvesting needs exactly two detectors".into()));
    }
    let (end, samples) = cfg
        .timeline()?
        .ok_or_else(|| Error::Config("harvesting needs a [timeline]".into()))?;
    let tau_c = (cfg.detector(1)?.position - cfg.detector(0)?.position).abs();
    if tau_c == 0.0 {
        return Err(Error::Config("harvesting needs separated detectors".into()));
    }
    let grid = uniform_grid(end, samples);
    let icfg = cfg.integrator()?;
    let start = Instant::now();

    let conv = converge_or_once(cfg, Observable::LogNegativity, |n| {
        let system = cfg.system(n)?;
        let sigma0 = system.initial_covariance();
        let mut en = Vec::with_capacity(grid.len());
        let last = sample_grid(&system, &grid, &icfg, |_, s| {
            en.push(log_negativity(&detector_state(s, &sigma0, &[0, 1])?)?);
            Ok(())
        })?;
        let mut checks = Checks::default();
        checks.record(&last, &sigma0)?;
        Ok((en.clone(), (en, checks)))
    })?;
    let (en, checks) = conv.result;
    let x: Vec<f64> = grid.iter().map(|t| t / tau_c).collect();
    let mut meta = metadata(cfg, conv.modes, conv.history, checks, start);
    meta.summary.insert("tau_c".into(), tau_c);
    match first_crossing(&x, &en, cfg.analysis.negativity_threshold) {
        Some(onset) => {
            meta.summary.insert("onset_tau_over_tauc".into(), onset);
        }
        None => meta.flags.push(Flag::new(FlagKind::NoOnset, "log-negativity never exceeds the threshold")),
    }
    Ok(vec![ScenarioResult::new(
        cfg.scenario,
        "harvesting",
        Series::new("tau_over_tauc", x),
        vec![Series::new("log_negativity", en)],
        meta,
    )?])
}

/// Symplectic evolver against the squeezing-generator oracle on random small
/// systems drawn from the config seed.
pub fn run_cross_validation(cfg: &ScenarioConfig) -> Result<Vec<ScenarioResult>> {
    expect_kind(cfg, ScenarioKind::CrossValidation)?;
    let start = Instant::now();
    let icfg = cfg.integrator()?;
    let cfgs = CrossValidationConfig {
        symplectic: icfg,
        oracle: icfg,
    };
    let seed = cfg.seed.unwrap_or(0);
    let cases = random_suite(seed, cfg.analysis.cases, &cfgs)?;
    let mut meta = metadata(cfg, cfg.cavity.modes, Vec::new(), Checks::default(), start);
    let worst = cases.iter().fold(0.0f64, |m, c| m.max(c.discrepancy));
    meta.summary.insert("max_discrepancy".into(), worst);
    meta.summary.insert("seed".into(), seed as f64);
    Ok(vec![ScenarioResult::new(
        cfg.scenario,
        "cross_validation",
        Series::new("case", (0..cases.len()).map(|i| i as f64).collect()),
        vec![
            Series::new("detectors", cases.iter().map(|c| c.detectors as f64).collect()),
            Series::new("modes", cases.iter().map(|c| c.modes as f64).collect()),
            Series::new("discrepancy", cases.iter().map(|c| c.discrepancy).collect()),
            Series::new("consistency_residual", cases.iter().map(|c| c.max_residual).collect()),
        ],
        meta,
    )?])
}

/// Dispatches on `cfg.scenario`.
pub fn run(cfg: &ScenarioConfig) -> Result<Vec<ScenarioResult>> {
    match cfg.scenario {
        ScenarioKind::SwitchingNoise => run_switching_noise(cfg),
        ScenarioKind::Causality => run_causality(cfg),
        ScenarioKind::Unruh => run_unruh(cfg),
        ScenarioKind::Harvesting => run_harvesting(cfg),
        ScenarioKind::CrossValidation => run_cross_validation(cfg),
    }
}
