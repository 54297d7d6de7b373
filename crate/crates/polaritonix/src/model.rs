//! Parameter types and seeded sampling of disorder realizations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::fret::{self, NearFieldLaw};
use crate::{Error, Result, C64};

/// Single cavity mode under weak coherent drive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavitySpec {
    #[serde(default)]
    pub omega_c: f64,
    pub kappa: f64,
    #[serde(default)]
    pub eta: f64,
    /// Drive frequency used where a single laser frequency is needed.
    #[serde(default)]
    pub omega_laser: f64,
}

impl CavitySpec {
    pub fn new(omega_c: f64, kappa: f64) -> Self {
        Self {
            omega_c,
            kappa,
            eta: 0.0,
            omega_laser: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::invalid("kappa", "must be positive and finite"));
        }
        if !(self.eta >= 0.0) {
            return Err(Error::invalid("eta", "must be nonnegative"));
        }
        if !self.omega_c.is_finite() || !self.omega_laser.is_finite() {
            return Err(Error::invalid("omega_c", "frequencies must be finite"));
        }
        Ok(())
    }
}

/// How the light-matter coupling is assigned before orientation factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Uniform(f64),
    PerMolecule(Vec<f64>),
}

impl Coupling {
    fn value(&self, j: usize) -> f64 {
        match self {
            Coupling::Uniform(g) => *g,
            Coupling::PerMolecule(gs) => gs[j],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrientationMode {
    /// All dipoles along the cavity field.
    #[default]
    Fixed,
    /// Polar angle uniform on [0, pi], azimuth uniform on [0, 2 pi).
    Random3d,
}

/// Ball in which molecule positions are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    #[serde(default = "Geometry::default_radius")]
    pub radius: f64,
    /// Rejection distance used when near-field couplings are computed.
    #[serde(default = "Geometry::default_min_separation")]
    pub min_separation: f64,
}

impl Geometry {
    fn default_radius() -> f64 {
        150.0
    }
    fn default_min_separation() -> f64 {
        0.1
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            radius: Self::default_radius(),
            min_separation: Self::default_min_separation(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_molecules: usize,
    #[serde(default)]
    pub omega_e: f64,
    pub gamma: f64,
    #[serde(default)]
    pub disorder_width: f64,
    pub coupling: Coupling,
    #[serde(default)]
    pub geometry: Geometry,
    #[serde(default)]
    pub orientation: OrientationMode,
    /// When present, the realization carries the full near-field matrix.
    #[serde(default)]
    pub near_field: Option<NearFieldLaw>,
}

impl EnsembleSpec {
    /// Uniformly coupled ensemble with Gaussian level disorder and no near field.
    pub fn uniform(n_molecules: usize, g: f64, gamma: f64, disorder_width: f64) -> Self {
        Self {
            n_molecules,
            omega_e: 0.0,
            gamma,
            disorder_width,
            coupling: Coupling::Uniform(g),
            geometry: Geometry::default(),
            orientation: OrientationMode::Fixed,
            near_field: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_molecules == 0 {
            return Err(Error::invalid("n_molecules", "must be at least 1"));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::invalid("gamma", "must be positive and finite"));
        }
        if !(self.disorder_width >= 0.0) || !self.disorder_width.is_finite() {
            return Err(Error::invalid("disorder_width", "must be nonnegative and finite"));
        }
        if let Coupling::PerMolecule(gs) = &self.coupling {
            if gs.len() != self.n_molecules {
                return Err(Error::invalid(
                    "coupling",
                    format!("expected {} values, got {}", self.n_molecules, gs.len()),
                ));
            }
        }
        if !(self.geometry.radius > 0.0) {
            return Err(Error::invalid("geometry.radius", "must be positive"));
        }
        if !(self.geometry.min_separation >= 0.0) {
            return Err(Error::invalid("geometry.min_separation", "must be nonnegative"));
        }
        if let Some(law) = &self.near_field {
            law.validate()?;
        }
        Ok(())
    }
}

/// One vibrational mode shared by every molecule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VibrationalMode {
    pub nu: f64,
    /// Square root of the Huang-Rhys factor.
    pub lambda: f64,
    pub damping: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VibrationalSpec {
    pub modes: Vec<VibrationalMode>,
}

impl VibrationalSpec {
    pub fn single(nu: f64, lambda: f64, damping: f64) -> Self {
        Self {
            modes: vec![VibrationalMode { nu, lambda, damping }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for m in &self.modes {
            if !(m.nu > 0.0) || !m.nu.is_finite() {
                return Err(Error::invalid("nu", "must be positive"));
            }
            if !(m.damping > 0.0) || !m.damping.is_finite() {
                return Err(Error::invalid("damping", "must be positive"));
            }
            if !(m.lambda >= 0.0) || !m.lambda.is_finite() {
                return Err(Error::invalid("lambda", "must be nonnegative"));
            }
        }
        Ok(())
    }

    /// Sum of Huang-Rhys factors.
    pub fn total_huang_rhys(&self) -> f64 {
        self.modes.iter().map(|m| m.lambda * m.lambda).sum()
    }
}

/// Symmetric near-field coupling matrix with zero diagonal, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearFieldMatrix {
    n: usize,
    data: Vec<f64>,
}

impl NearFieldMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set_pair(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// One concrete draw of the ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub omega_e: f64,
    pub gamma: f64,
    pub deltas: Vec<f64>,
    pub positions: Vec<[f64; 3]>,
    /// Unit dipole directions.
    pub dipoles: Vec<[f64; 3]>,
    pub g: Vec<C64>,
    pub omega_dd: Option<NearFieldMatrix>,
    pub seed: u64,
}

impl Realization {
    /// Realization with explicit detunings and couplings, all molecules at the origin.
    pub fn from_parts(omega_e: f64, gamma: f64, deltas: Vec<f64>, g: Vec<C64>) -> Self {
        let n = deltas.len();
        assert_eq!(n, g.len(), "deltas and couplings must have equal length");
        Self {
            omega_e,
            gamma,
            deltas,
            positions: vec![[0.0; 3]; n],
            dipoles: vec![[0.0, 0.0, 1.0]; n],
            g,
            omega_dd: None,
            seed: 0,
        }
    }

    /// Uniform real coupling `g` for every molecule.
    pub fn with_uniform_coupling(omega_e: f64, gamma: f64, deltas: Vec<f64>, g: f64) -> Self {
        let n = deltas.len();
        Self::from_parts(omega_e, gamma, deltas, vec![C64::new(g, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    /// Collective coupling sqrt(sum |g_j|^2).
    pub fn collective_coupling(&self) -> f64 {
        self.g.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt()
    }
}

const PLACEMENT_ATTEMPTS: usize = 10_000;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for realization `index` of a sweep driven by `master`.
pub fn realization_seed(master: u64, index: u64) -> u64 {
    let a = mix64(master.wrapping_add(0x9e37_79b9_7f4a_7c15));
    mix64(a ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(0x632b_e59b_d9b4_e019))
}

fn uniform_in_ball<R: Rng>(rng: &mut R, radius: f64) -> [f64; 3] {
    let r = radius * rng.random::<f64>().cbrt();
    let cos_t: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    [r * sin_t * phi.cos(), r * sin_t * phi.sin(), r * cos_t]
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Draw one realization. Identical `(spec, seed)` give identical output.
///
/// Draw order: detunings, positions, orientations. Minimum-separation
/// rejection only runs when the spec carries a near-field law.
pub fn sample_realization(spec: &EnsembleSpec, seed: u64) -> Result<Realization> {
    spec.validate()?;
    let n = spec.n_molecules;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let normal = Normal::new(0.0, spec.disorder_width)
        .map_err(|e| Error::invalid("disorder_width", e.to_string()))?;
    let deltas: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();

    let min_sep2 = spec.geometry.min_separation.powi(2);
    let reject = spec.near_field.is_some() && min_sep2 > 0.0;
    let mut positions: Vec<[f64; 3]> = Vec::with_capacity(n);
    for index in 0..n {
        let mut attempts = 0;
        loop {
            let p = uniform_in_ball(&mut rng, spec.geometry.radius);
            if !reject || positions.iter().all(|q| dist2(&p, q) >= min_sep2) {
                positions.push(p);
                break;
            }
            attempts += 1;
            if attempts >= PLACEMENT_ATTEMPTS {
                return Err(Error::Placement {
                    index,
                    attempts,
                    min_separation: spec.geometry.min_separation,
                });
            }
        }
    }

    let mut dipoles = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for j in 0..n {
        let g0 = spec.coupling.value(j);
        match spec.orientation {
            OrientationMode::Fixed => {
                dipoles.push([0.0, 0.0, 1.0]);
                g.push(C64::new(g0, 0.0));
            }
            OrientationMode::Random3d => {
                let theta = PI * rng.random::<f64>();
                let phi = 2.0 * PI * rng.random::<f64>();
                dipoles.push([
                    theta.sin() * phi.cos(),
                    theta.sin() * phi.sin(),
                    theta.cos(),
                ]);
                g.push(C64::new(g0 * theta.cos(), 0.0));
            }
        }
    }

    let omega_dd = match &spec.near_field {
        Some(law) => {
            let mut mat = NearFieldMatrix::zeros(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let omega = fret::dipole_coupling(
                        &positions[i],
                        &positions[j],
                        &dipoles[i],
                        &dipoles[j],
                        law,
                        spec.orientation,
                    )
                    .map_err(|_| Error::CoincidentPositions(i, j))?;
                    mat.set_pair(i, j, omega);
                }
            }
            Some(mat)
        }
        None => None,
    };

    Ok(Realization {
        omega_e: spec.omega_e,
        gamma: spec.gamma,
        deltas,
        positions,
        dipoles,
        g,
        omega_dd,
        seed,
    })
}

/// Population variance `(1/N) sum d^2 - ((1/N) sum d)^2`.
pub fn empirical_variance(deltas: &[f64]) -> f64 {
    let n = deltas.len() as f64;
    let mean = deltas.iter().sum::<f64>() / n;
    let mean_sq = deltas.iter().map(|d| d * d).sum::<f64>() / n;
    mean_sq - mean * mean
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
