//! Run configuration files.
//!
//! A config is one JSON object. The keys `schema_version`, `experiment`,
//! `master_seed`, `format` and `units` are shared by every experiment; all
//! remaining keys belong to the experiment and are rejected if unknown.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use polaritonix::dense::SweepMethod;
use polaritonix::macrostate::InitialState;
use polaritonix::model::{CavitySpec, EnsembleSpec, VibrationalSpec};

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "1";

const SHARED_KEYS: [&str; 5] = ["schema_version", "experiment", "master_seed", "format", "units"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum Experiment {
    Transmit,
    Darkrate,
    VrsSweep,
    FretScan,
    DonorCubic,
    Macro,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Transmit => "transmit",
            Experiment::Darkrate => "darkrate",
            Experiment::VrsSweep => "vrs-sweep",
            Experiment::FretScan => "fret-scan",
            Experiment::DonorCubic => "donor-cubic",
            Experiment::Macro => "macro",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Reference rate the dimensionless numbers are quoted in. Labels only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Kappa,
    Gamma,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shared {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub units: Units,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// `points` values from `lo` to `hi` inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

/// Either an explicit list or a [`Grid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Grid(Grid),
}

impl Axis {
    pub fn values(&self, name: &'static str) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Axis::List(v) => v.clone(),
            Axis::Grid(g) => {
                if g.points < 2 {
                    return Err(CliError::config(format!("{name}: a grid needs at least two points")));
                }
                if !(g.hi > g.lo) {
                    return Err(CliError::config(format!("{name}: grid needs hi > lo")));
                }
                match g.spacing {
                    Spacing::Linear => polaritonix::transmission::uniform_grid(g.lo, g.hi, g.points),
                    Spacing::Log => {
                        if !(g.lo > 0.0) {
                            return Err(CliError::config(format!("{name}: log grid needs lo > 0")));
                        }
                        polaritonix::transmission::uniform_grid(g.lo.ln(), g.hi.ln(), g.points)
                            .into_iter()
                            .map(f64::exp)
                            .collect()
                    }
                }
            }
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config(format!("{name}: values must be finite and nonempty")));
        }
        Ok(v)
    }
}

fn default_realizations() -> usize {
    1
}

fn default_weight_tol() -> f64 {
    polaritonix::fret::DEFAULT_WEIGHT_TOL
}

/// Vibronic transfer settings; the ensemble must carry a near-field law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FretSettings {
    pub vib: VibrationalSpec,
    #[serde(default = "default_weight_tol")]
    pub weight_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmitParams {
    pub ensemble: EnsembleSpec,
    pub cavity: CavitySpec,
    pub grid: Axis,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    #[serde(default)]
    pub aggregate: bool,
    #[serde(default)]
    pub fret: Option<FretSettings>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DarkrateParams {
    pub n_molecules: usize,
    pub gamma: f64,
    pub widths: Axis,
    pub n_realizations: usize,
    /// Write the sorted dark-block shifts of the first realization per width.
    #[serde(default)]
    pub dump_spectrum: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisorderMethod {
    Eigen,
    Reduced,
    #[default]
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramSettings {
    /// One histogram per molecule count.
    pub n_molecules: Vec<usize>,
    pub bins: usize,
    #[serde(default)]
    pub range: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sweep", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VrsSweepParams {
    /// Splitting against disorder width; `ensemble.disorder_width` is replaced.
    Disorder {
        ensemble: EnsembleSpec,
        cavity: CavitySpec,
        widths: Axis,
        n_realizations: usize,
        #[serde(default)]
        method: DisorderMethod,
    },
    /// Splitting against molecule number at fixed volume.
    Density {
        ensemble: EnsembleSpec,
        cavity: CavitySpec,
        vib: VibrationalSpec,
        #[serde(default = "default_weight_tol")]
        weight_tol: f64,
        n_values: Vec<usize>,
        n_realizations: usize,
        #[serde(default = "default_sweep_method")]
        method: SweepMethod,
        #[serde(default)]
        histogram: Option<HistogramSettings>,
    },
}

fn default_sweep_method() -> SweepMethod {
    SweepMethod::Eigen
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraSettings {
    pub gamma: f64,
    #[serde(default)]
    pub delta: f64,
    pub omega: Axis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FretScanParams {
    pub vib: VibrationalSpec,
    pub omega_dd: f64,
    pub delta_diff: Axis,
    #[serde(default = "default_weight_tol")]
    pub weight_tol: f64,
    /// Also evaluate the time-domain integral for every point.
    #[serde(default)]
    pub oracle: bool,
    #[serde(default)]
    pub spectra: Option<SpectraSettings>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampSettings {
    pub count: usize,
    pub gamma_max: f64,
    pub steps_per_molecule: usize,
}

fn zero_axis() -> Axis {
    Axis::List(vec![0.0])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DonorCubicParams {
    pub n_molecules: usize,
    pub g: f64,
    pub gamma: f64,
    pub kappa: f64,
    /// Donor detuning; rows run over every `(gamma_prime, delta)` pair.
    #[serde(default = "zero_axis")]
    pub delta: Axis,
    pub gamma_prime: Axis,
    #[serde(default)]
    pub ramp: Option<RampSettings>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacroParams {
    pub ensemble: EnsembleSpec,
    /// `eta` and `omega_laser` of the cavity set the drive.
    pub cavity: CavitySpec,
    /// One trajectory per selector and realization.
    pub initial_states: Vec<InitialState>,
    pub t_end: f64,
    pub points: usize,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    #[serde(default)]
    pub fret: Option<FretSettings>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Transmit(TransmitParams),
    Darkrate(DarkrateParams),
    VrsSweep(VrsSweepParams),
    FretScan(FretScanParams),
    DonorCubic(DonorCubicParams),
    Macro(MacroParams),
}

/// Parsed and resolved configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub shared: Shared,
    pub params: Params,
}

fn typed<T: DeserializeOwned>(value: Value) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::config(e.to_string()))
}

impl RunConfig {
    pub fn parse(text: &str, experiment: Experiment) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        let Value::Object(mut map) = value else {
            return Err(CliError::config("config must be a JSON object"));
        };
        let mut shared_map = Map::new();
        for key in SHARED_KEYS {
            if let Some(v) = map.remove(key) {
                shared_map.insert(key.to_string(), v);
            }
        }
        let shared: Shared = typed(Value::Object(shared_map))?;
        if shared.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(format!(
                "unsupported schema_version `{}` (expected `{SCHEMA_VERSION}`)",
                shared.schema_version
            )));
        }
        if let Some(e) = shared.experiment {
            if e != experiment {
                return Err(CliError::config(format!(
                    "config is for `{}` but `{}` was requested",
                    e.name(),
                    experiment.name()
                )));
            }
        }
        let rest = Value::Object(map);
        let params = match experiment {
            Experiment::Transmit => Params::Transmit(typed(rest)?),
            Experiment::Darkrate => Params::Darkrate(typed(rest)?),
            Experiment::VrsSweep => Params::VrsSweep(typed(rest)?),
            Experiment::FretScan => Params::FretScan(typed(rest)?),
            Experiment::DonorCubic => Params::DonorCubic(typed(rest)?),
            Experiment::Macro => Params::Macro(typed(rest)?),
        };
        Ok(Self {
            experiment,
            shared: Shared {
                experiment: Some(experiment),
                ..shared
            },
            params,
        })
    }

    /// Flat JSON object with shared keys and experiment parameters, as echoed
    /// in the manifest. Feeding it back to [`RunConfig::parse`] reproduces the run.
    pub fn resolved(&self) -> Value {
        let mut out = match serde_json::to_value(&self.shared) {
            Ok(Value::Object(m)) => m,
            _ => Map::new(),
        };
        if let Ok(Value::Object(p)) = serde_json::to_value(&self.params) {
            out.extend(p);
        }
        Value::Object(out)
    }
}
