//! Propagation `psi(z) = exp(-i H z) psi(0)` on a grid of distances.
//!
//! Three independent routes are provided: exact diagonalization (the
//! reference), a Chebyshev expansion (scales to large lattices), and a
//! fixed-step RK4 integrator that only serves as a test oracle.

mod chebyshev;
mod ode;
mod spectral;

pub use chebyshev::{
    chebyshev_apply, evolve_chebyshev, spectral_bounds, SpectralBounds, MAX_CHEBYSHEV_ORDER,
};
pub use ode::evolve_ode_oracle;
pub use spectral::{decompose, evolve_eigen, SpectralDecomposition};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Hamiltonian, WaveFunction};

/// Largest Chebyshev tolerance accepted.
pub const MAX_CHEBYSHEV_TOL: f64 = 1e-4;

/// Propagation distances, nonnegative and strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ZGrid {
    values: Vec<f64>,
}

impl ZGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if values.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidGrid("grid contains non-finite values".into()));
        }
        if values[0] < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "propagation distance must be nonnegative, got {}",
                values[0]
            )));
        }
        if let Some(w) = values.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "grid must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(ZGrid { values })
    }

    pub fn single(z: f64) -> Result<Self> {
        Self::new(vec![z])
    }

    /// `steps + 1` evenly spaced points from `start` to `stop`.
    pub fn linear(start: f64, stop: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidGrid("steps must be at least 1".into()));
        }
        let values = (0..=steps)
            .map(|i| start + (stop - start) * i as f64 / steps as f64)
            .collect();
        Self::new(values)
    }

    /// `steps + 1` geometrically spaced points from `start > 0` to `stop`.
    pub fn geometric(start: f64, stop: f64, steps: usize) -> Result<Self> {
        if !(start > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "geometric grid needs a positive start, got {start}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("steps must be at least 1".into()));
        }
        let ratio = (stop / start).ln();
        let values = (0..=steps)
            .map(|i| start * (ratio * i as f64 / steps as f64).exp())
            .collect();
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("grid is never empty")
    }
}

/// Which propagator produced a set of snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    Eigen,
    Chebyshev { tol: f64 },
}

impl Default for Method {
    fn default() -> Self {
        Method::Eigen
    }
}

impl Method {
    /// Evolves `psi0` over `zgrid` with the selected propagator.
    pub fn evolve(&self, h: &Hamiltonian, psi0: &WaveFunction, zgrid: &ZGrid) -> Result<Snapshots> {
        match *self {
            Method::Eigen => evolve_eigen(h, psi0, zgrid),
            Method::Chebyshev { tol } => evolve_chebyshev(h, psi0, zgrid, tol),
        }
    }

    pub(crate) fn norm_tolerance(&self) -> f64 {
        match *self {
            Method::Eigen => SNAPSHOT_NORM_TOL,
            Method::Chebyshev { tol } => SNAPSHOT_NORM_TOL.max(10.0 * tol),
        }
    }
}

/// Norm drift allowed on any stored snapshot.
pub const SNAPSHOT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshots {
    pub zgrid: ZGrid,
    pub states: Vec<WaveFunction>,
    pub method: Method,
}

impl Snapshots {
    pub fn last(&self) -> &WaveFunction {
        self.states.last().expect("snapshots are never empty")
    }

    pub(crate) fn checked(zgrid: ZGrid, states: Vec<WaveFunction>, method: Method) -> Result<Self> {
        let limit = method.norm_tolerance();
        for (z, s) in zgrid.values().iter().zip(&states) {
            let drift = (s.norm_sqr().sqrt() - 1.0).abs();
            if !(drift <= limit) {
                return Err(Error::Numerical(format!(
                    "norm drift {drift:e} at z = {z} exceeds {limit:e}"
                )));
            }
        }
        Ok(Snapshots {
            zgrid,
            states,
            method,
        })
    }
}

pub(crate) fn check_dims(h: &Hamiltonian, psi: &WaveFunction) -> Result<()> {
    if h.n_sites() != psi.len() {
        return Err(Error::DimensionMismatch {
            expected: h.n_sites(),
            found: psi.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(ZGrid::new(vec![]).is_err());
        assert!(ZGrid::new(vec![-1.0, 0.0]).is_err());
        assert!(ZGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(ZGrid::new(vec![0.0, f64::NAN]).is_err());
        assert!(ZGrid::linear(0.0, 1.0, 0).is_err());
        assert!(ZGrid::geometric(0.0, 1.0, 4).is_err());
        let g = ZGrid::linear(0.0, 2.0, 4).unwrap();
        assert_eq!(g.values(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        let g = ZGrid::geometric(1.0, 10.0, 2).unwrap();
        assert!((g.values()[1] - 10f64.sqrt()).abs() < 1e-14);
        assert!((g.last() - 10.0).abs() < 1e-13);
    }
}
