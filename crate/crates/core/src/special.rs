//! Integer-order Bessel functions.
//!
//! `J_n(x)` and the exponentially scaled `e^{-x} I_n(x)` are produced for all
//! orders `0..=n_max` at once by Miller's backward recurrence, normalized with
//! the generating-function sums
//!
//! ```text
//!     J_0 + 2 Σ_k J_{2k}          = 1
//!     e^{-x} (I_0 + 2 Σ_k I_k)    = 1
//! ```
//!
//! Small arguments use the ascending power series instead.

const RESCALE_ABOVE: f64 = 1e200;
const RESCALE_BY: f64 = 1e-200;
const SERIES_BELOW: f64 = 1.0;

/// `J_n(x)` for `n = 0..=n_max`, `x >= 0`.
pub fn bessel_j(x: f64, n_max: usize) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel_j needs finite x >= 0, got {x}");
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < SERIES_BELOW {
        for (n, v) in out.iter_mut().enumerate() {
            *v = bessel_j_series(x, n);
        }
        return out;
    }

    let top = n_max.max(x.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt().ceil() as usize;
    start += start % 2;

    let mut f_next = 0.0;
    let mut f = 1e-30;
    let mut norm = 0.0;
    for k in (0..=start).rev() {
        if k <= n_max {
            out[k] = f;
        }
        if k == 0 {
            norm += f;
            break;
        }
        if k % 2 == 0 {
            norm += 2.0 * f;
        }
        let f_prev = (2.0 * k as f64 / x) * f - f_next;
        f_next = f;
        f = f_prev;
        if f.abs() > RESCALE_ABOVE {
            f *= RESCALE_BY;
            f_next *= RESCALE_BY;
            norm *= RESCALE_BY;
            out[k.min(n_max + 1)..].iter_mut().for_each(|v| *v *= RESCALE_BY);
        }
    }
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

fn bessel_j_series(x: f64, n: usize) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 0usize;
    loop {
        k += 1;
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            return sum;
        }
    }
}

/// `e^{-x} I_n(x)` for `n = 0..=n_max`, `x >= 0`.
pub fn bessel_i_scaled(x: f64, n_max: usize) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel_i_scaled needs finite x >= 0, got {x}");
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    // e^{-x} I_n(x) ~ exp(-n^2 / 2x): start where that is far below f64 epsilon.
    let start = n_max + 30 + (12.0 * x.sqrt()).ceil() as usize;

    let mut f_next = 0.0;
    let mut f = 1e-30;
    let mut norm = 0.0;
    for k in (0..=start).rev() {
        if k <= n_max {
            out[k] = f;
        }
        if k == 0 {
            norm += f;
            break;
        }
        norm += 2.0 * f;
        let f_prev = (2.0 * k as f64 / x) * f + f_next;
        f_next = f;
        f = f_prev;
        if f.abs() > RESCALE_ABOVE {
            f *= RESCALE_BY;
            f_next *= RESCALE_BY;
            norm *= RESCALE_BY;
            out[k.min(n_max + 1)..].iter_mut().for_each(|v| *v *= RESCALE_BY);
        }
    }
    out.iter_mut().for_each(|v| *v /= norm);
    out
}
