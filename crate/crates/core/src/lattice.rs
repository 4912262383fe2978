//! Lattice model: coupled waveguides described by the discrete Schrödinger
//! equation
//!
//! ```text
//!     i dA_j/dz = β_j A_j + C_{j,j+1} A_{j+1} + C_{j,j-1} A_{j-1}
//! ```
//!
//! The same tridiagonal generator covers the continuous-time quantum walk,
//! whose diagonal is `-d_j γ` with `d_j` the number of neighbours of site `j`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalization tolerance enforced when a state is constructed.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// How the diagonal of the Hamiltonian is filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagConvention {
    /// Diagonal is the on-site propagation constant `beta[j]`.
    #[default]
    BetaAsGiven,
    /// Diagonal is `-d_j * mean(coupling)`; `beta` is ignored.
    MinusDegreeGamma,
}

/// Description of a one-dimensional waveguide lattice.
///
/// `coupling[j]` connects sites `j` and `j + 1`. A periodic lattice stores
/// the wrap-around coupling between `n_sites - 1` and `0` as its last entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub n_sites: usize,
    pub beta: Vec<f64>,
    pub coupling: Vec<f64>,
    pub boundary: Boundary,
    pub diag_convention: DiagConvention,
}

impl LatticeSpec {
    /// Uniform open chain with zero on-site terms.
    pub fn uniform(n_sites: usize, coupling: f64) -> Self {
        Self::uniform_with(n_sites, coupling, Boundary::Open)
    }

    pub fn uniform_with(n_sites: usize, coupling: f64, boundary: Boundary) -> Self {
        let n_couplings = match boundary {
            Boundary::Open => n_sites.saturating_sub(1),
            Boundary::Periodic => n_sites,
        };
        LatticeSpec {
            n_sites,
            beta: vec![0.0; n_sites],
            coupling: vec![coupling; n_couplings],
            boundary,
            diag_convention: DiagConvention::BetaAsGiven,
        }
    }

    pub fn expected_couplings(&self) -> usize {
        match self.boundary {
            Boundary::Open => self.n_sites.saturating_sub(1),
            Boundary::Periodic => self.n_sites,
        }
    }

    pub fn mean_coupling(&self) -> f64 {
        self.coupling.iter().sum::<f64>() / self.coupling.len() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::InvalidLattice(format!(
                "need at least 2 sites, got {}",
                self.n_sites
            )));
        }
        // A two-site ring would double-count the single bond.
        if self.boundary == Boundary::Periodic && self.n_sites < 3 {
            return Err(Error::InvalidLattice(
                "periodic lattice needs at least 3 sites".into(),
            ));
        }
        if self.beta.len() != self.n_sites {
            return Err(Error::InvalidLattice(format!(
                "beta has {} entries for {} sites",
                self.beta.len(),
                self.n_sites
            )));
        }
        if self.coupling.len() != self.expected_couplings() {
            return Err(Error::InvalidLattice(format!(
                "{:?} boundary needs {} couplings, got {}",
                self.boundary,
                self.expected_couplings(),
                self.coupling.len()
            )));
        }
        if let Some((j, c)) = self
            .coupling
            .iter()
            .enumerate()
            .find(|(_, c)| !(c.is_finite() && **c > 0.0))
        {
            return Err(Error::InvalidLattice(format!(
                "coupling {j} must be positive and finite, got {c}"
            )));
        }
        if let Some((j, b)) = self.beta.iter().enumerate().find(|(_, b)| !b.is_finite()) {
            return Err(Error::InvalidLattice(format!("beta {j} is not finite: {b}")));
        }
        Ok(())
    }

    /// Number of neighbours of site `j`.
    pub fn degree(&self, j: usize) -> usize {
        match self.boundary {
            Boundary::Periodic => 2,
            Boundary::Open if j == 0 || j + 1 == self.n_sites => 1,
            Boundary::Open => 2,
        }
    }
}

/// Real symmetric tridiagonal generator, with corner entries when periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub diag: Vec<f64>,
    /// `offdiag[j]` couples `j` and `j + 1`; for a ring the last entry is the
    /// `(n - 1, 0)` corner.
    pub offdiag: Vec<f64>,
    pub boundary: Boundary,
}

pub fn build_hamiltonian(spec: &LatticeSpec) -> Result<Hamiltonian> {
    spec.validate()?;
    let diag = match spec.diag_convention {
        DiagConvention::BetaAsGiven => spec.beta.clone(),
        DiagConvention::MinusDegreeGamma => {
            let gamma = spec.mean_coupling();
            (0..spec.n_sites)
                .map(|j| -(spec.degree(j) as f64) * gamma)
                .collect()
        }
    };
    Ok(Hamiltonian {
        diag,
        offdiag: spec.coupling.clone(),
        boundary: spec.boundary,
    })
}

impl Hamiltonian {
    pub fn n_sites(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n_sites();
        let mut m = DMatrix::zeros(n, n);
        for (j, &d) in self.diag.iter().enumerate() {
            m[(j, j)] = d;
        }
        for j in 0..n - 1 {
            m[(j, j + 1)] = self.offdiag[j];
            m[(j + 1, j)] = self.offdiag[j];
        }
        if self.boundary == Boundary::Periodic {
            let c = self.offdiag[n - 1];
            m[(n - 1, 0)] = c;
            m[(0, n - 1)] = c;
        }
        m
    }

    /// Same operator with every diagonal entry shifted by `delta`.
    pub fn shifted(&self, delta: f64) -> Hamiltonian {
        Hamiltonian {
            diag: self.diag.iter().map(|d| d + delta).collect(),
            ..self.clone()
        }
    }

    /// `out = H psi` without allocating.
    pub fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        let n = self.n_sites();
        debug_assert_eq!(psi.len(), n);
        debug_assert_eq!(out.len(), n);
        for j in 0..n {
            out[j] = psi[j] * self.diag[j];
        }
        for j in 0..n - 1 {
            let c = self.offdiag[j];
            out[j] += psi[j + 1] * c;
            out[j + 1] += psi[j] * c;
        }
        if self.boundary == Boundary::Periodic {
            let c = self.offdiag[n - 1];
            out[n - 1] += psi[0] * c;
            out[0] += psi[n - 1] * c;
        }
    }
}

pub fn apply_hamiltonian(h: &Hamiltonian, psi: &[Complex64]) -> Result<Vec<Complex64>> {
    if psi.len() != h.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: h.n_sites(),
            found: psi.len(),
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    h.apply_into(psi, &mut out);
    Ok(out)
}

/// Complex amplitude per site.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    amps: Vec<Complex64>,
}

impl WaveFunction {
    /// Wraps amplitudes that must already be normalized to [`NORM_TOL`].
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let wf = WaveFunction { amps };
        let err = (wf.norm_sqr() - 1.0).abs();
        if err > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "amplitudes are not normalized (|norm^2 - 1| = {err:e})"
            )));
        }
        Ok(wf)
    }

    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("cannot normalize a zero state".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(WaveFunction { amps })
    }

    /// Output of a propagator; norm is checked by the caller's tolerance.
    pub(crate) fn from_evolved(amps: Vec<Complex64>) -> Self {
        WaveFunction { amps }
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`, conjugating `self`.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn conj(&self) -> WaveFunction {
        WaveFunction {
            amps: self.amps.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &WaveFunction) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Launch condition at the input facet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialStateSpec {
    SingleSite(usize),
    /// `(e_first + e^{i phase} e_second) / sqrt(2)`
    TwoSite {
        first: usize,
        second: usize,
        relative_phase: f64,
    },
    /// Gaussian envelope of width `width_sites` with a linear phase `tilt` per site.
    GaussianBeam {
        center: f64,
        width_sites: f64,
        tilt: f64,
    },
}

pub fn make_initial_state(spec: &InitialStateSpec, n_sites: usize) -> Result<WaveFunction> {
    let zero = Complex64::new(0.0, 0.0);
    let check_site = |j: usize| {
        if j < n_sites {
            Ok(())
        } else {
            Err(Error::InvalidState(format!(
                "site {j} outside lattice of {n_sites} sites"
            )))
        }
    };
    match *spec {
        InitialStateSpec::SingleSite(j0) => {
            check_site(j0)?;
            let mut amps = vec![zero; n_sites];
            amps[j0] = Complex64::new(1.0, 0.0);
            Ok(WaveFunction { amps })
        }
        InitialStateSpec::TwoSite {
            first,
            second,
            relative_phase,
        } => {
            check_site(first)?;
            check_site(second)?;
            if first == second {
                return Err(Error::InvalidState("two-site input needs distinct sites".into()));
            }
            let a = std::f64::consts::FRAC_1_SQRT_2;
            let mut amps = vec![zero; n_sites];
            amps[first] = Complex64::new(a, 0.0);
            amps[second] = Complex64::from_polar(a, relative_phase);
            Ok(WaveFunction { amps })
        }
        InitialStateSpec::GaussianBeam {
            center,
            width_sites,
            tilt,
        } => {
            if !(center >= 0.0 && center < n_sites as f64) {
                return Err(Error::InvalidState(format!(
                    "beam center {center} outside lattice of {n_sites} sites"
                )));
            }
            if !(width_sites > 0.0 && width_sites.is_finite()) {
                return Err(Error::InvalidState(format!(
                    "beam width must be positive, got {width_sites}"
                )));
            }
            let amps = (0..n_sites)
                .map(|j| {
                    let x = j as f64 - center;
                    Complex64::from_polar(
                        (-x * x / (2.0 * width_sites * width_sites)).exp(),
                        tilt * j as f64,
                    )
                })
                .collect();
            WaveFunction::normalized(amps)
        }
    }
}
