use num_complex::Complex64;

use super::{check_dims, spectral_bounds};
use crate::error::{Error, Result};
use crate::lattice::{Hamiltonian, WaveFunction};

/// Classic fixed-step RK4 integration of `i dψ/dz = Hψ`.
///
/// Independent of the spectral machinery; kept as a verification oracle.
/// The step is `z / ceil(z / dz_max)`.
pub fn evolve_ode_oracle(
    h: &Hamiltonian,
    psi0: &WaveFunction,
    z: f64,
    dz_max: f64,
) -> Result<WaveFunction> {
    check_dims(h, psi0)?;
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "propagation distance must be finite and nonnegative, got {z}"
        )));
    }
    let radius = spectral_bounds(h).radius();
    if !(dz_max > 0.0 && dz_max * radius < 1.0) {
        return Err(Error::StepTooLarge { dz: dz_max, radius });
    }
    if z == 0.0 {
        return Ok(psi0.clone());
    }
    let steps = (z / dz_max).ceil() as usize;
    let dz = z / steps as f64;
    let n = h.n_sites();
    let zero = Complex64::new(0.0, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);

    let mut psi = psi0.amps().to_vec();
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut tmp = vec![zero; n];

    // f(ψ) = -i H ψ
    let rhs = |v: &[Complex64], out: &mut [Complex64]| {
        h.apply_into(v, out);
        out.iter_mut().for_each(|x| *x *= minus_i);
    };

    for _ in 0..steps {
        rhs(&psi, &mut k1);
        for j in 0..n {
            tmp[j] = psi[j] + k1[j] * (0.5 * dz);
        }
        rhs(&tmp, &mut k2);
        for j in 0..n {
            tmp[j] = psi[j] + k2[j] * (0.5 * dz);
        }
        rhs(&tmp, &mut k3);
        for j in 0..n {
            tmp[j] = psi[j] + k3[j] * dz;
        }
        rhs(&tmp, &mut k4);
        for j in 0..n {
            psi[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (dz / 6.0);
        }
    }
    Ok(WaveFunction::from_evolved(psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_hamiltonian, make_initial_state, InitialStateSpec, LatticeSpec};
    use crate::propagate::{evolve_eigen, ZGrid};

    #[test]
    fn zero_distance() {
        let h = build_hamiltonian(&LatticeSpec::uniform(5, 1.0)).unwrap();
        let psi0 = make_initial_state(&InitialStateSpec::SingleSite(1), 5).unwrap();
        assert_eq!(evolve_ode_oracle(&h, &psi0, 0.0, 1e-3).unwrap(), psi0);
    }

    #[test]
    fn two_site_transfer() {
        let h = build_hamiltonian(&LatticeSpec::uniform(2, 1.0)).unwrap();
        let psi0 = make_initial_state(&InitialStateSpec::SingleSite(0), 2).unwrap();
        let out = evolve_ode_oracle(&h, &psi0, std::f64::consts::FRAC_PI_2, 1e-4).unwrap();
        assert!((out.amps()[1].norm_sqr() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn agrees_with_eigen_on_51_sites() {
        let h = build_hamiltonian(&LatticeSpec::uniform(51, 1.0)).unwrap();
        let psi0 = make_initial_state(&InitialStateSpec::SingleSite(25), 51).unwrap();
        let ode = evolve_ode_oracle(&h, &psi0, 3.0, 1e-3).unwrap();
        let eig = evolve_eigen(&h, &psi0, &ZGrid::single(3.0).unwrap()).unwrap();
        assert!(ode.max_abs_diff(eig.last()) < 1e-7);
    }

    #[test]
    fn rejects_large_step() {
        let h = build_hamiltonian(&LatticeSpec::uniform(5, 1.0)).unwrap();
        let psi0 = make_initial_state(&InitialStateSpec::SingleSite(1), 5).unwrap();
        assert!(matches!(
            evolve_ode_oracle(&h, &psi0, 1.0, 0.5),
            Err(Error::StepTooLarge { .. })
        ));
    }
}
