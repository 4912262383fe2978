use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_dims, Method, Snapshots, ZGrid};
use crate::error::Result;
use crate::lattice::{Hamiltonian, WaveFunction};

/// Full eigensystem `H = V diag(λ) Vᵀ`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

pub fn decompose(h: &Hamiltonian) -> SpectralDecomposition {
    let eig = SymmetricEigen::new(h.to_dense());
    let n = h.n_sites();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

impl SpectralDecomposition {
    pub fn n_sites(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Expansion coefficients `Vᵀ psi`.
    pub fn project(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let v = &self.eigenvectors;
        (0..self.n_sites())
            .map(|k| {
                v.column(k)
                    .iter()
                    .zip(psi)
                    .map(|(&vjk, a)| a * vjk)
                    .sum()
            })
            .collect()
    }

    /// `V e^{-iΛz} coeffs`.
    pub fn synthesize(&self, coeffs: &[Complex64], z: f64) -> Vec<Complex64> {
        let n = self.n_sites();
        let rotated: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .zip(coeffs)
            .map(|(&lambda, c)| c * Complex64::from_polar(1.0, -lambda * z))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (k, r) in rotated.iter().enumerate() {
            for (o, &vjk) in out.iter_mut().zip(self.eigenvectors.column(k).iter()) {
                *o += r * vjk;
            }
        }
        out
    }

    pub fn propagate(&self, psi: &[Complex64], z: f64) -> Vec<Complex64> {
        self.synthesize(&self.project(psi), z)
    }

    /// Max-entry residual of `HV - VΛ`.
    pub fn residual(&self, h: &Hamiltonian) -> f64 {
        let hv = h.to_dense() * &self.eigenvectors;
        let vl = &self.eigenvectors * DMatrix::from_diagonal(&self.eigenvalues.clone().into());
        (hv - vl).amax()
    }

    /// Max-entry deviation of `VᵀV` from the identity.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.n_sites();
        (self.eigenvectors.transpose() * &self.eigenvectors - DMatrix::identity(n, n)).amax()
    }
}

pub fn evolve_eigen(h: &Hamiltonian, psi0: &WaveFunction, zgrid: &ZGrid) -> Result<Snapshots> {
    check_dims(h, psi0)?;
    let spec = decompose(h);
    let coeffs = spec.project(psi0.amps());
    let states = zgrid
        .values()
        .par_iter()
        .map(|&z| {
            if z == 0.0 {
                psi0.clone()
            } else {
                WaveFunction::from_evolved(spec.synthesize(&coeffs, z))
            }
        })
        .collect();
    Snapshots::checked(zgrid.clone(), states, Method::Eigen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_hamiltonian, make_initial_state, InitialStateSpec, LatticeSpec};

    #[test]
    fn two_site_spectrum() {
        let h = build_hamiltonian(&LatticeSpec::uniform(2, 1.0)).unwrap();
        let d = decompose(&h);
        assert!((d.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((d.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_site_spectrum() {
        let h = build_hamiltonian(&LatticeSpec::uniform(3, 1.0)).unwrap();
        let d = decompose(&h);
        let s = 2f64.sqrt();
        for (got, want) in d.eigenvalues.iter().zip([-s, 0.0, s]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_chain_matches_cosine_band() {
        let n = 100;
        let h = build_hamiltonian(&LatticeSpec::uniform(n, 1.0)).unwrap();
        let d = decompose(&h);
        let mut exact: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        exact.sort_by(f64::total_cmp);
        for (got, want) in d.eigenvalues.iter().zip(&exact) {
            assert!((got - want).abs() < 1e-12);
            assert!(got.abs() <= 2.0);
        }
        assert!(d.residual(&h) < 1e-10 * 2.0);
        assert!(d.orthogonality_error() < 1e-10);
    }

    #[test]
    fn zero_distance_is_identity() {
        let h = build_hamiltonian(&LatticeSpec::uniform(9, 1.0)).unwrap();
        let psi0 = make_initial_state(&InitialStateSpec::SingleSite(3), 9).unwrap();
        let snaps = evolve_eigen(&h, &psi0, &ZGrid::single(0.0).unwrap()).unwrap();
        assert_eq!(snaps.states[0], psi0);
    }

    #[test]
    fn two_site_full_transfer() {
        let h = build_hamiltonian(&LatticeSpec::uniform(2, 1.0)).unwrap();
        let psi0 = make_initial_state(&InitialStateSpec::SingleSite(0), 2).unwrap();
        let z = std::f64::consts::FRAC_PI_2;
        let snaps = evolve_eigen(&h, &psi0, &ZGrid::single(z).unwrap()).unwrap();
        assert!((snaps.last().amps()[1].norm_sqr() - 1.0).abs() < 1e-10);
        // closed form: psi = (cos Cz, -i sin Cz)
        let grid = ZGrid::linear(0.0, 3.0, 12).unwrap();
        let snaps = evolve_eigen(&h, &psi0, &grid).unwrap();
        for (z, s) in grid.values().iter().zip(&snaps.states) {
            assert!((s.amps()[0] - Complex64::new(z.cos(), 0.0)).norm() < 1e-14);
            assert!((s.amps()[1] - Complex64::new(0.0, -z.sin())).norm() < 1e-14);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let h = build_hamiltonian(&LatticeSpec::uniform(4, 1.0)).unwrap();
        let psi0 = make_initial_state(&InitialStateSpec::SingleSite(0), 3).unwrap();
        assert!(evolve_eigen(&h, &psi0, &ZGrid::single(1.0).unwrap()).is_err());
    }
}
