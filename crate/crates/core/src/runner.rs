// SPDX-License-Identifier: Apache-2.0

//! Run manifests, output files and the dry-run report behind the `hodet`
//! binary.
//!
//! A run writes one CSV per [`ScenarioResult`] (`<scenario>_<label>.csv`)
//! and a JSON sidecar `<scenario>.json`. Every CSV starts with
//! `# config_hash: <sha256>` followed by the header row; floats are written
//! with 17 significant digits.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{parse_config, parse_config_str, ScenarioConfig, ScenarioKind};
use crate::scenario::{self, FlagKind, Metadata, ScenarioResult};
use crate::{Error, Result};

const HASH_PREFIX: &str = "# config_hash: ";

/// Everything a run needs besides the config file contents.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunManifest {
    /// Scenario to run. Required when `config` is absent; checked against
    /// the file otherwise.
    pub scenario: Option<ScenarioKind>,
    /// Config file. Without one the checked-in default for `scenario` is used.
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    /// Mode-count schedule (or a single `N`).
    pub modes: Option<Vec<usize>>,
    pub tolerance: Option<f64>,
    /// Explicit subset of sweep values.
    pub sweep: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(scenario: ScenarioKind, out: impl Into<PathBuf>) -> Self {
        Self {
            scenario: Some(scenario),
            out: out.into(),
            ..Self::default()
        }
    }

    /// Loads the config and applies every override. Nothing is computed.
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = match (&self.config, self.scenario) {
            (Some(path), _) => parse_config(path)?,
            (None, Some(kind)) => parse_config_str(kind.builtin())?,
            (None, None) => return Err(Error::Config("give a scenario or a config file".into())),
        };
        if let Some(kind) = self.scenario {
            if kind != cfg.scenario {
                return Err(Error::Config(format!(
                    "--scenario {} does not match config scenario {}",
                    kind.name(),
                    cfg.scenario.name()
                )));
            }
        }
        if let Some(m) = &self.modes {
            cfg.override_modes(m)?;
        }
        if let Some(t) = self.tolerance {
            cfg.override_tolerance(t)?;
        }
        if let Some(v) = &self.sweep {
            cfg.override_sweep(v)?;
        }
        if let Some(s) = self.seed {
            cfg.override_seed(s)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// What a finished run wrote and the exit code it maps to.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub results: Vec<ScenarioResult>,
    pub config_hash: String,
    /// 0 unless some result carries a flag that maps to a failure category.
    pub exit_code: i32,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    scenario: &'a str,
    config_hash: &'a str,
    config: &'a str,
    manifest: &'a RunManifest,
    results: Vec<SidecarEntry<'a>>,
}

#[derive(Serialize)]
struct SidecarEntry<'a> {
    label: &'a str,
    file: String,
    columns: Vec<&'a str>,
    metadata: &'a Metadata,
}

/// Resolves the manifest, runs the scenario and writes its outputs.
///
/// Hard failures (drift ceiling, non-convergence, unphysical states) come
/// back as `Err`; flagged thermality violations still write every file and
/// report exit code 5.
pub fn run(manifest: &RunManifest) -> Result<RunOutcome> {
    let cfg = manifest.resolve()?;
    ensure_writable(&manifest.out)?;
    let hash = cfg.hash()?;
    let results = scenario::run(&cfg)?;

    let mut files = Vec::new();
    let mut entries = Vec::new();
    for r in &results {
        let name = format!("{}_{}.csv", r.scenario, r.label);
        let path = manifest.out.join(&name);
        write_csv(&path, &hash, r)?;
        files.push(path);
        entries.push(SidecarEntry {
            label: &r.label,
            file: name,
            columns: std::iter::once(r.axis.name.as_str())
                .chain(r.series.iter().map(|s| s.name.as_str()))
                .collect(),
            metadata: &r.metadata,
        });
    }
    let toml = cfg.to_toml()?;
    let sidecar = Sidecar {
        scenario: cfg.scenario.name(),
        config_hash: &hash,
        config: &toml,
        manifest,
        results: entries,
    };
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Config(format!("json: {e}")))?;
    let path = manifest.out.join(format!("{}.json", cfg.scenario.name()));
    fs::write(&path, json + "\n")?;
    files.push(path);

    let thermality = results
        .iter()
        .flat_map(|r| &r.metadata.flags)
        .any(|f| f.kind == FlagKind::Thermality);
    let exit_code = if thermality {
        Error::Thermality(String::new()).exit_code()
    } else {
        0
    };
    Ok(RunOutcome {
        files,
        results,
        config_hash: hash,
        exit_code,
    })
}

fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".hodet-write-check");
    fs::write(&probe, b"")?;
    fs::remove_file(&probe)?;
    Ok(())
}

/// Writes one result as CSV, hash line first.
pub fn write_csv(path: &Path, config_hash: &str, result: &ScenarioResult) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "{HASH_PREFIX}{config_hash}")?;
    let header: Vec<&str> = std::iter::once(result.axis.name.as_str())
        .chain(result.series.iter().map(|s| s.name.as_str()))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for i in 0..result.axis.values.len() {
        let row: Vec<String> = std::iter::once(result.axis.values[i])
            .chain(result.series.iter().map(|s| s.values[i]))
            .map(|v| format!("{v:.16e}"))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    fs::write(path, out)?;
    Ok(())
}

/// A CSV file as written by [`write_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub config_hash: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let bad = |msg: &str| Error::Config(format!("{}: {msg}", path.display()));
    let config_hash = lines
        .next()
        .and_then(|l| l.strip_prefix(HASH_PREFIX))
        .ok_or_else(|| bad("missing config hash line"))?
        .trim()
        .to_string();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| bad("missing header row"))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for l in lines.filter(|l| !l.is_empty()) {
        let row = l
            .split(',')
            .map(|v| v.parse::<f64>().map_err(|_| bad(&format!("bad number {v:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != header.len() {
            return Err(bad("row width does not match header"));
        }
        rows.push(row);
    }
    Ok(CsvTable {
        config_hash,
        header,
        rows,
    })
}

/// Largest absolute entry difference between two tables of one config.
pub fn compare_tables(a: &CsvTable, b: &CsvTable) -> Result<f64> {
    if a.config_hash != b.config_hash {
        return Err(Error::Config(format!(
            "config hash mismatch: {} vs {}",
            a.config_hash, b.config_hash
        )));
    }
    if a.header != b.header || a.rows.len() != b.rows.len() {
        return Err(Error::Config("tables differ in shape".into()));
    }
    Ok(a.rows
        .iter()
        .zip(&b.rows)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max))
}

/// Dry-run summary of a manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub scenario: String,
    pub config_hash: String,
    /// Every mode count the run would use.
    pub modes: Vec<usize>,
    /// Largest field frequency at the largest `N`.
    pub omega_max: f64,
    /// Bound on the generator's fastest rotation over the integration window.
    pub spectral_radius: f64,
    /// Suggested step ceiling, `fraction · 2π / spectral_radius`.
    pub dt_max: f64,
    pub warnings: Vec<String>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario        {}", self.scenario)?;
        writeln!(f, "config hash     {}", self.config_hash)?;
        let modes: Vec<String> = self.modes.iter().map(|n| n.to_string()).collect();
        writeln!(f, "N               {}", modes.join(", "))?;
        writeln!(f, "omega_max       {:.6}", self.omega_max)?;
        writeln!(f, "spectral radius {:.6}", self.spectral_radius)?;
        writeln!(f, "dt_max          {:.6e}", self.dt_max)?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Resolves the config and reports mode sets and step bounds without
/// integrating anything.
pub fn validate(manifest: &RunManifest) -> Result<ValidationReport> {
    let cfg = manifest.resolve()?;
    let modes = scenario::mode_counts(&cfg)?;
    let n_max = modes.iter().copied().max().unwrap_or(cfg.cavity.modes);
    let icfg = cfg.integrator()?;
    let mut warnings = Vec::new();
    let mut omega_max = 0.0f64;
    let mut radius = 0.0f64;
    if !cfg.detectors.is_empty() {
        let cavity = cfg.cavity_config(n_max)?;
        omega_max = cavity.max_frequency();
        for i in 0..cfg.detectors.len() {
            let d = cfg.detector(i)?;
            if cavity.resonant_modes(d.gap).is_empty() {
                warnings.push(format!("detector {i}: gap {} is not resonant with any included mode", d.gap));
            }
        }
        for (delta, accel) in scenario::sweep_points(&cfg)? {
            let system = cfg.system_with(n_max, delta, accel)?;
            let (a, b) = scenario::integration_window(&cfg, delta)?;
            radius = radius.max(system.max_frequency_on(a, b));
        }
    }
    let dt_max = if radius > 0.0 {
        icfg.step_ceiling_fraction * std::f64::consts::TAU / radius
    } else {
        f64::INFINITY
    };
    Ok(ValidationReport {
        scenario: cfg.scenario.name().to_string(),
        config_hash: cfg.hash()?,
        modes,
        omega_max,
        spectral_radius: radius,
        dt_max,
        warnings,
    })
}
