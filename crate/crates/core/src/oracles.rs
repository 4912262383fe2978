//! Closed-form references.
//!
//! On the infinite uniform chain with zero on-site terms, a walker launched
//! at `j0` has amplitude
//!
//! ```text
//!     ψ_j(z) = (-i)^{|j - j0|} J_{|j - j0|}(2 C z)
//! ```
//!
//! A reflecting wall to the left of site 0 (the chain simply ends) is the
//! condition `ψ_{-1} = 0`, met by subtracting the free solution launched
//! from the mirror site `-j0 - 2`. The classical continuous-time walk with
//! hopping rate `γ` to each neighbour has `p_j(t) = e^{-2γt} I_{|j - j0|}(2γt)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::WaveFunction;
use crate::observables::ProbabilityDist;
use crate::special::{bessel_i_scaled, bessel_j};

/// Largest probability allowed outside a truncated quantum window.
pub const QUANTUM_TAIL_LIMIT: f64 = 1e-12;
/// Largest probability allowed outside a truncated classical window.
pub const CLASSICAL_TAIL_LIMIT: f64 = 1e-10;

fn check_inputs(j0: usize, rate: f64, time: f64, n_sites: usize) -> Result<()> {
    if j0 >= n_sites {
        return Err(Error::InvalidParameter(format!(
            "source site {j0} outside window of {n_sites} sites"
        )));
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "rate must be positive, got {rate}"
        )));
    }
    if !(time >= 0.0 && time.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative, got {time}"
        )));
    }
    Ok(())
}

/// Orders needed so that everything beyond `n_max` is far below f64 precision.
fn safe_order(x: f64, n_max: usize) -> usize {
    n_max.max(x.ceil() as usize + 40 + 10 * x.cbrt().ceil() as usize)
}

/// `(-i)^n`
fn minus_i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// Free single-site solution on the infinite chain, restricted to
/// `0..n_sites`. No renormalization is applied; the window must hold all but
/// [`QUANTUM_TAIL_LIMIT`] of the probability.
pub fn bessel_free_state(j0: usize, c: f64, z: f64, n_sites: usize) -> Result<WaveFunction> {
    check_inputs(j0, c, z, n_sites)?;
    let x = 2.0 * c * z;
    let order = safe_order(x, n_sites);
    let j = bessel_j(x, order);
    let tail = |first: usize| j[first.min(j.len())..].iter().map(|v| v * v).sum::<f64>();
    let outside = tail(j0 + 1) + tail(n_sites - j0);
    if outside > QUANTUM_TAIL_LIMIT {
        return Err(Error::WindowTooSmall {
            n_sites,
            tail: outside,
            limit: QUANTUM_TAIL_LIMIT,
        });
    }
    let amps = (0..n_sites)
        .map(|site| {
            let n = site.abs_diff(j0);
            minus_i_pow(n) * j[n]
        })
        .collect();
    Ok(WaveFunction::from_evolved(amps))
}

/// Single-site solution on the half chain `0, 1, 2, ...` with a reflecting
/// wall left of site 0, restricted to `0..n_sites`.
pub fn image_boundary_state(j0: usize, c: f64, z: f64, n_sites: usize) -> Result<WaveFunction> {
    check_inputs(j0, c, z, n_sites)?;
    let x = 2.0 * c * z;
    let mirror_offset = j0 + 2;
    let order = safe_order(x, n_sites + mirror_offset + j0);
    let j = bessel_j(x, order);
    let free = |n: usize| minus_i_pow(n) * j.get(n).copied().unwrap_or(0.0);
    // source at j0, image of opposite sign at -j0 - 2
    let amp = |site: usize| free(site.abs_diff(j0)) - free(site + mirror_offset);

    let outside: f64 = (n_sites..=order - mirror_offset)
        .map(|site| amp(site).norm_sqr())
        .sum();
    if outside > QUANTUM_TAIL_LIMIT {
        return Err(Error::WindowTooSmall {
            n_sites,
            tail: outside,
            limit: QUANTUM_TAIL_LIMIT,
        });
    }
    Ok(WaveFunction::from_evolved((0..n_sites).map(amp).collect()))
}

/// Classical continuous-time random walk from `j0` with hopping rate `gamma`
/// to each neighbour, restricted to `0..n_sites`.
pub fn classical_ctrw_distribution(
    j0: usize,
    gamma: f64,
    t: f64,
    n_sites: usize,
) -> Result<ProbabilityDist> {
    check_inputs(j0, gamma, t, n_sites)?;
    let x = 2.0 * gamma * t;
    let order = n_sites + 30 + (12.0 * x.sqrt()).ceil() as usize;
    let scaled = bessel_i_scaled(x, order);
    let tail = |first: usize| scaled[first.min(scaled.len())..].iter().sum::<f64>();
    let outside = tail(j0 + 1) + tail(n_sites - j0);
    if outside > CLASSICAL_TAIL_LIMIT {
        return Err(Error::WindowTooSmall {
            n_sites,
            tail: outside,
            limit: CLASSICAL_TAIL_LIMIT,
        });
    }
    let probs = (0..n_sites).map(|site| scaled[site.abs_diff(j0)]).collect();
    Ok(ProbabilityDist::from_raw(probs))
}

/// Ballistic spread `σ²(z) = 2 C² z²` of a single-site launch on the
/// infinite uniform chain.
pub fn cqw_variance_law(c: f64, z: f64) -> f64 {
    2.0 * c * c * z * z
}

/// Variance `2 γ t` of the classical walk.
pub fn ctrw_variance_law(gamma: f64, t: f64) -> f64 {
    2.0 * gamma * t
}
