//! Experiment configuration.
//!
//! Configs are TOML documents with strict keys. [`ExperimentConfig::resolve`]
//! fills every default and checks cross-field constraints; resolving an
//! already resolved config returns it unchanged.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::{DephasingSpec, DisorderSpec};
use crate::error::{Error, Result};
use crate::lattice::{Boundary, DiagConvention, InitialStateSpec, LatticeSpec};
use crate::propagate::{Method, ZGrid, MAX_CHEBYSHEV_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Ballistic,
    Disorder,
    BoundarySweep,
    Classical,
    Dephasing,
}

/// A scalar applied to every entry, or one value per entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerSite {
    Uniform(f64),
    List(Vec<f64>),
}

impl PerSite {
    fn expand(&self, len: usize) -> Vec<f64> {
        match self {
            PerSite::Uniform(v) => vec![*v; len],
            PerSite::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    #[serde(default = "default_sites")]
    pub n_sites: usize,
    #[serde(default = "default_coupling")]
    pub coupling: PerSite,
    #[serde(default = "default_beta")]
    pub beta: PerSite,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub diag_convention: DiagConvention,
}

fn default_sites() -> usize {
    101
}

fn default_coupling() -> PerSite {
    PerSite::Uniform(1.0)
}

fn default_beta() -> PerSite {
    PerSite::Uniform(0.0)
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            n_sites: default_sites(),
            coupling: default_coupling(),
            beta: default_beta(),
            boundary: Boundary::Open,
            diag_convention: DiagConvention::BetaAsGiven,
        }
    }
}

impl LatticeConfig {
    pub fn to_spec(&self) -> LatticeSpec {
        let n_couplings = match self.boundary {
            Boundary::Open => self.n_sites.saturating_sub(1),
            Boundary::Periodic => self.n_sites,
        };
        LatticeSpec {
            n_sites: self.n_sites,
            beta: self.beta.expand(self.n_sites),
            coupling: self.coupling.expand(n_couplings),
            boundary: self.boundary,
            diag_convention: self.diag_convention,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    SingleSite {
        site: usize,
    },
    TwoSite {
        first: usize,
        second: usize,
        #[serde(default)]
        relative_phase: f64,
    },
    GaussianBeam {
        center: f64,
        width: f64,
        #[serde(default)]
        tilt: f64,
    },
}

impl InitialConfig {
    pub fn to_spec(&self) -> InitialStateSpec {
        match *self {
            InitialConfig::SingleSite { site } => InitialStateSpec::SingleSite(site),
            InitialConfig::TwoSite {
                first,
                second,
                relative_phase,
            } => InitialStateSpec::TwoSite {
                first,
                second,
                relative_phase,
            },
            InitialConfig::GaussianBeam {
                center,
                width,
                tilt,
            } => InitialStateSpec::GaussianBeam {
                center,
                width_sites: width,
                tilt,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZGridConfig {
    #[serde(default)]
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl ZGridConfig {
    pub fn to_grid(&self) -> Result<ZGrid> {
        match self.spacing {
            Spacing::Linear => ZGrid::linear(self.start, self.stop, self.steps),
            Spacing::Geometric => ZGrid::geometric(self.start, self.stop, self.steps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub first_input: usize,
    #[serde(default = "default_last_input")]
    pub last_input: usize,
    /// Leftmost sites kept in the carpet; all sites when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view_sites: Option<usize>,
}

fn default_last_input() -> usize {
    20
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            first_input: 0,
            last_input: default_last_input(),
            view_sites: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Pgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatmapScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
    #[serde(default)]
    pub heatmap_scale: HeatmapScale,
}

fn default_directory() -> String {
    "out".into()
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: default_directory(),
            formats: default_formats(),
            heatmap_scale: HeatmapScale::Linear,
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zgrid: Option<ZGridConfig>,
    #[serde(default)]
    pub propagator: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dephasing: Option<DephasingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_realizations() -> usize {
    1
}

/// Propagation range used when a config has no `[zgrid]` section.
fn default_zgrid(kind: ExperimentKind) -> ZGridConfig {
    let (start, stop, steps, spacing) = match kind {
        ExperimentKind::Ballistic | ExperimentKind::Classical => (0.0, 10.0, 100, Spacing::Linear),
        ExperimentKind::Disorder => (0.0, 30.0, 60, Spacing::Linear),
        ExperimentKind::BoundarySweep => (0.0, 8.0, 80, Spacing::Linear),
        ExperimentKind::Dephasing => (2.0, 20.0, 20, Spacing::Geometric),
    };
    ZGridConfig {
        start,
        stop,
        steps,
        spacing,
    }
}

fn key_err(key: &str, err: Error) -> Error {
    match err {
        Error::Config { .. } => err,
        other => Error::config(key, other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("(document)", e.message().trim().to_string()))
    }

    /// Fills defaults and checks every constraint.
    pub fn resolve(mut self) -> Result<Self> {
        let n = self.lattice.n_sites;
        if n < 2 {
            return Err(Error::config("lattice.n_sites", format!("need at least 2 sites, got {n}")));
        }
        let spec = self.lattice.to_spec();
        if let PerSite::List(v) = &self.lattice.beta {
            if v.len() != n {
                return Err(Error::config(
                    "lattice.beta",
                    format!("expected {n} entries, got {}", v.len()),
                ));
            }
        }
        if let PerSite::List(v) = &self.lattice.coupling {
            if v.len() != spec.expected_couplings() {
                return Err(Error::config(
                    "lattice.coupling",
                    format!(
                        "expected {} entries for a {:?} lattice, got {}",
                        spec.expected_couplings(),
                        self.lattice.boundary,
                        v.len()
                    ),
                ));
            }
        }
        spec.validate().map_err(|e| key_err("lattice", e))?;

        let initial = self
            .initial
            .take()
            .unwrap_or(InitialConfig::SingleSite { site: n / 2 });
        crate::lattice::make_initial_state(&initial.to_spec(), n)
            .map_err(|e| key_err("initial", e))?;
        self.initial = Some(initial);

        let zgrid = self.zgrid.take().unwrap_or_else(|| default_zgrid(self.experiment));
        zgrid.to_grid().map_err(|e| key_err("zgrid", e))?;
        self.zgrid = Some(zgrid);

        if let Method::Chebyshev { tol } = self.propagator {
            if !(tol > 0.0 && tol <= MAX_CHEBYSHEV_TOL) {
                return Err(Error::config(
                    "propagator.tol",
                    format!("must lie in (0, {MAX_CHEBYSHEV_TOL:e}], got {tol:e}"),
                ));
            }
        }
        if self.n_realizations == 0 {
            return Err(Error::config("n_realizations", "must be at least 1"));
        }

        if let Some(d) = &self.disorder {
            if !(d.offdiag_strength >= 0.0 && d.offdiag_strength < 1.0) {
                return Err(Error::config(
                    "disorder.offdiag_strength",
                    format!(
                        "must satisfy 0 <= w < 1 so couplings stay positive, got {}",
                        d.offdiag_strength
                    ),
                ));
            }
            if !(d.diag_strength >= 0.0 && d.diag_strength.is_finite()) {
                return Err(Error::config(
                    "disorder.diag_strength",
                    format!("must be finite and >= 0, got {}", d.diag_strength),
                ));
            }
        }
        if let Some(d) = &self.dephasing {
            if !(d.segment_length > 0.0 && d.segment_length.is_finite()) {
                return Err(Error::config(
                    "dephasing.segment_length",
                    format!("must be positive, got {}", d.segment_length),
                ));
            }
            if !(d.phase_strength >= 0.0 && d.phase_strength.is_finite()) {
                return Err(Error::config(
                    "dephasing.phase_strength",
                    format!("must be finite and >= 0, got {}", d.phase_strength),
                ));
            }
        }

        match self.experiment {
            ExperimentKind::Disorder if self.disorder.is_none() => {
                return Err(Error::config("disorder", "the disorder experiment needs a [disorder] section"));
            }
            ExperimentKind::Dephasing if self.dephasing.is_none() => {
                return Err(Error::config(
                    "dephasing",
                    "the dephasing experiment needs a [dephasing] section",
                ));
            }
            ExperimentKind::Classical => {
                if !matches!(self.initial, Some(InitialConfig::SingleSite { .. })) {
                    return Err(Error::config(
                        "initial.kind",
                        "the classical walk starts from a single site",
                    ));
                }
            }
            ExperimentKind::BoundarySweep => {
                if self.lattice.boundary != Boundary::Open {
                    return Err(Error::config(
                        "lattice.boundary",
                        "the boundary sweep needs an open lattice",
                    ));
                }
                let mut sweep = self.sweep.take().unwrap_or_default();
                if sweep.first_input > sweep.last_input || sweep.last_input >= n {
                    return Err(Error::config(
                        "sweep",
                        format!(
                            "inputs {}..={} must be ordered and inside {n} sites",
                            sweep.first_input, sweep.last_input
                        ),
                    ));
                }
                let view = sweep.view_sites.unwrap_or(n);
                if view == 0 || view > n {
                    return Err(Error::config(
                        "sweep.view_sites",
                        format!("must lie in 1..={n}, got {view}"),
                    ));
                }
                sweep.view_sites = Some(view);
                self.sweep = Some(sweep);
            }
            _ => {}
        }
        Ok(self)
    }

    pub fn lattice_spec(&self) -> LatticeSpec {
        self.lattice.to_spec()
    }

    pub fn initial_spec(&self) -> InitialStateSpec {
        self.initial
            .as_ref()
            .expect("resolved config has an initial state")
            .to_spec()
    }

    pub fn grid(&self) -> Result<ZGrid> {
        self.zgrid
            .as_ref()
            .expect("resolved config has a grid")
            .to_grid()
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

/// Reads and resolves a config. TOML files are parsed directly; a `.json`
/// file is accepted when it is a `run.json` written by a previous run (its
/// `config` member) or a bare config object.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("(file)", format!("cannot read {}: {e}", path.display())))?;
    let raw = if path.extension().is_some_and(|e| e == "json") {
        let mut doc: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::config("(document)", e.to_string()))?;
        let cfg = match doc.get_mut("config") {
            Some(inner) => inner.take(),
            None => doc,
        };
        serde_json::from_value(cfg).map_err(|e| Error::config("(document)", e.to_string()))?
    } else {
        ExperimentConfig::from_toml_str(&text)?
    };
    raw.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml_str(text)?.resolve()
    }

    fn config_key(r: Result<ExperimentConfig>) -> String {
        match r {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_ballistic_defaults() {
        let c = parse("experiment = \"ballistic\"").unwrap();
        assert_eq!(c.lattice.beta, PerSite::Uniform(0.0));
        assert_eq!(c.lattice.boundary, Boundary::Open);
        assert_eq!(c.lattice.diag_convention, DiagConvention::BetaAsGiven);
        assert_eq!(c.initial, Some(InitialConfig::SingleSite { site: 50 }));
        assert_eq!(c.propagator, Method::Eigen);
        assert_eq!(c.grid().unwrap().last(), 10.0);
    }

    #[test]
    fn resolve_is_idempotent() {
        let c = parse(
            "experiment = \"boundary_sweep\"\n[lattice]\nn_sites = 61\n[propagator]\nmethod = \"chebyshev\"\ntol = 1e-10\n",
        )
        .unwrap();
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string())
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(c, again);
        assert_eq!(c.clone().resolve().unwrap(), c);
    }

    #[test]
    fn missing_disorder_block_is_named() {
        let key = config_key(parse("experiment = \"disorder\""));
        assert_eq!(key, "disorder");
        let key = config_key(parse("experiment = \"dephasing\""));
        assert_eq!(key, "dephasing");
    }

    #[test]
    fn strong_offdiag_disorder_rejected() {
        let r = parse("experiment = \"disorder\"\n[disorder]\noffdiag_strength = 1.5\n");
        match r {
            Err(Error::Config { key, message }) => {
                assert_eq!(key, "disorder.offdiag_strength");
                assert!(message.contains("w < 1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse("experiment = \"ballistic\"\nbogus = 1\n").is_err());
        assert!(parse("experiment = \"ballistic\"\n[lattice]\nsites = 10\n").is_err());
        assert!(parse("experiment = \"ballistic\"\n[initial]\nkind = \"single_site\"\nsite = 3\nwidth = 2.0\n").is_err());
    }

    #[test]
    fn range_violations_carry_key_paths() {
        assert_eq!(
            config_key(parse("experiment = \"ballistic\"\n[initial]\nkind = \"single_site\"\nsite = 500\n")),
            "initial"
        );
        assert_eq!(
            config_key(parse("experiment = \"ballistic\"\n[zgrid]\nstop = 5.0\nsteps = 0\n")),
            "zgrid"
        );
        assert_eq!(
            config_key(parse("experiment = \"ballistic\"\n[lattice]\nn_sites = 1\n")),
            "lattice.n_sites"
        );
        assert_eq!(
            config_key(parse("experiment = \"ballistic\"\n[propagator]\nmethod = \"chebyshev\"\ntol = 0.1\n")),
            "propagator.tol"
        );
        assert_eq!(
            config_key(parse("experiment = \"ballistic\"\n[lattice]\nn_sites = 4\ncoupling = [1.0, 1.0]\n")),
            "lattice.coupling"
        );
        assert_eq!(
            config_key(parse("experiment = \"boundary_sweep\"\n[sweep]\nlast_input = 400\n")),
            "sweep"
        );
    }

    #[test]
    fn per_site_lists() {
        let c = parse("experiment = \"ballistic\"\n[lattice]\nn_sites = 3\ncoupling = [1.0, 2.0]\nbeta = [0.0, 0.5, 0.0]\n").unwrap();
        let spec = c.lattice_spec();
        assert_eq!(spec.coupling, vec![1.0, 2.0]);
        assert_eq!(spec.beta, vec![0.0, 0.5, 0.0]);
    }
}
