//! Chebyshev expansion of the propagator.
//!
//! With `H = a + b H̃` and the spectrum of `H̃` inside `[-1, 1]`,
//!
//! ```text
//!     exp(-i H z) = e^{-i a z} [ J_0(bz) + 2 Σ_{k≥1} (-i)^k J_k(bz) T_k(H̃) ]
//! ```
//!
//! The series is cut once three consecutive coefficients past the turning
//! point `k ≈ bz` fall below the requested tolerance.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_dims, Method, Snapshots, ZGrid, MAX_CHEBYSHEV_TOL};
use crate::error::{Error, Result};
use crate::lattice::{Hamiltonian, WaveFunction};
use crate::special::bessel_j;

/// Hard cap on the expansion order.
pub const MAX_CHEBYSHEV_ORDER: usize = 200_000;

/// Enclosure `[emin, emax]` of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub emin: f64,
    pub emax: f64,
}

impl SpectralBounds {
    pub fn center(&self) -> f64 {
        0.5 * (self.emax + self.emin)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.emax - self.emin)
    }

    pub fn radius(&self) -> f64 {
        self.emin.abs().max(self.emax.abs())
    }

    pub fn contains(&self, lambda: f64) -> bool {
        self.emin <= lambda && lambda <= self.emax
    }
}

/// Gershgorin discs of the real symmetric generator.
pub fn spectral_bounds(h: &Hamiltonian) -> SpectralBounds {
    let n = h.n_sites();
    let mut radius = vec![0.0; n];
    for j in 0..n - 1 {
        radius[j] += h.offdiag[j].abs();
        radius[j + 1] += h.offdiag[j].abs();
    }
    if h.boundary == crate::lattice::Boundary::Periodic {
        radius[0] += h.offdiag[n - 1].abs();
        radius[n - 1] += h.offdiag[n - 1].abs();
    }
    let mut emin = f64::INFINITY;
    let mut emax = f64::NEG_INFINITY;
    for (d, r) in h.diag.iter().zip(&radius) {
        emin = emin.min(d - r);
        emax = emax.max(d + r);
    }
    SpectralBounds { emin, emax }
}

/// Coefficients `J_k(x)` for `k = 0..=K`, `K` from the three-in-a-row rule.
fn expansion_coefficients(x: f64, tol: f64) -> Result<Vec<f64>> {
    if !x.is_finite() || x > MAX_CHEBYSHEV_ORDER as f64 {
        return Err(Error::ChebyshevNonConvergence {
            required: if x.is_finite() { x.ceil() as usize } else { usize::MAX },
            cap: MAX_CHEBYSHEV_ORDER,
        });
    }
    let mut order = x.ceil() as usize + 40 + 10 * x.cbrt().ceil() as usize;
    loop {
        if order > MAX_CHEBYSHEV_ORDER {
            return Err(Error::ChebyshevNonConvergence {
                required: order,
                cap: MAX_CHEBYSHEV_ORDER,
            });
        }
        let mut coeffs = bessel_j(x, order);
        let mut run = 0;
        for k in 0..coeffs.len() {
            if k as f64 >= x && 2.0 * coeffs[k].abs() < tol {
                run += 1;
                if run == 3 {
                    coeffs.truncate(k + 1);
                    return Ok(coeffs);
                }
            } else {
                run = 0;
            }
        }
        order *= 2;
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol <= MAX_CHEBYSHEV_TOL {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "Chebyshev tolerance must lie in (0, {MAX_CHEBYSHEV_TOL:e}], got {tol:e}"
        )))
    }
}

/// `exp(-i H z) psi` for a single distance `z >= 0`.
pub fn chebyshev_apply(
    h: &Hamiltonian,
    bounds: SpectralBounds,
    psi: &[Complex64],
    z: f64,
    tol: f64,
) -> Result<Vec<Complex64>> {
    check_tol(tol)?;
    if psi.len() != h.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: h.n_sites(),
            found: psi.len(),
        });
    }
    if z == 0.0 {
        return Ok(psi.to_vec());
    }
    let n = psi.len();
    let a = bounds.center();
    let b = bounds.half_width();
    let coeffs = expansion_coefficients(b * z, tol)?;

    // H̃ v = (H v - a v) / b
    let rescaled = |v: &[Complex64], out: &mut [Complex64]| {
        h.apply_into(v, out);
        for (o, x) in out.iter_mut().zip(v) {
            *o = (*o - x * a) / b;
        }
    };

    let mut acc: Vec<Complex64> = psi.iter().map(|x| x * coeffs[0]).collect();
    if coeffs.len() > 1 {
        let mut prev = psi.to_vec();
        let mut curr = vec![Complex64::new(0.0, 0.0); n];
        rescaled(&prev, &mut curr);
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        // (-i)^k cycles through 1, -i, -1, i
        let phases = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        for (k, &jk) in coeffs.iter().enumerate().skip(1) {
            if k > 1 {
                rescaled(&curr, &mut next);
                for (nx, p) in next.iter_mut().zip(&prev) {
                    *nx = *nx * 2.0 - p;
                }
                std::mem::swap(&mut prev, &mut curr);
                std::mem::swap(&mut curr, &mut next);
            }
            let w = phases[k % 4] * (2.0 * jk);
            for (o, t) in acc.iter_mut().zip(&curr) {
                *o += t * w;
            }
        }
    }
    let global = Complex64::from_polar(1.0, -a * z);
    acc.iter_mut().for_each(|x| *x *= global);
    Ok(acc)
}

pub fn evolve_chebyshev(
    h: &Hamiltonian,
    psi0: &WaveFunction,
    zgrid: &ZGrid,
    tol: f64,
) -> Result<Snapshots> {
    check_dims(h, psi0)?;
    check_tol(tol)?;
    let bounds = spectral_bounds(h);
    let states = zgrid
        .values()
        .par_iter()
        .map(|&z| chebyshev_apply(h, bounds, psi0.amps(), z, tol).map(WaveFunction::from_evolved))
        .collect::<Result<Vec<_>>>()?;
    Snapshots::checked(zgrid.clone(), states, Method::Chebyshev { tol })
}
