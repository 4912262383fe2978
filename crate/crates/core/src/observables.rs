//! Intensity-level observables.

use crate::error::{Error, Result};
use crate::lattice::WaveFunction;

/// Nonnegative weights over lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDist {
    probs: Vec<f64>,
}

/// Normalization tolerance for [`ProbabilityDist::new`].
pub const PROB_SUM_TOL: f64 = 1e-10;

impl ProbabilityDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "probabilities must be finite and nonnegative, found {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(ProbabilityDist { probs })
    }

    /// No normalization check; used for ensemble means and truncated windows.
    pub fn from_raw(probs: Vec<f64>) -> Self {
        ProbabilityDist { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

pub fn intensity(psi: &WaveFunction) -> ProbabilityDist {
    ProbabilityDist::from_raw(psi.amps().iter().map(|a| a.norm_sqr()).collect())
}

pub fn mean_position(p: &ProbabilityDist) -> f64 {
    p.probs
        .iter()
        .enumerate()
        .map(|(j, pj)| j as f64 * pj)
        .sum()
}

/// Second central moment of the site index.
pub fn spread_variance(p: &ProbabilityDist) -> f64 {
    let mu = mean_position(p);
    p.probs
        .iter()
        .enumerate()
        .map(|(j, pj)| {
            let d = j as f64 - mu;
            d * d * pj
        })
        .sum()
}

/// `1 / Σ p_j²`
pub fn participation_ratio(p: &ProbabilityDist) -> f64 {
    1.0 / p.probs.iter().map(|x| x * x).sum::<f64>()
}

/// Sites with `min_dist <= |j - origin| <= max_dist`, on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailWindow {
    pub origin: usize,
    pub min_dist: usize,
    pub max_dist: usize,
}

impl TailWindow {
    /// Default tail window that skips the peaks near the launch site.
    pub fn beyond_peak(origin: usize, max_dist: usize) -> Self {
        TailWindow {
            origin,
            min_dist: 10,
            max_dist,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationFit {
    /// `-1 / slope`, present only when the slope is negative.
    pub xi: Option<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: TailWindow,
}

/// Floor applied before taking logarithms.
const LOG_FLOOR: f64 = 1e-300;

/// Least-squares line through `(x, y)`; returns `(slope, intercept, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    (slope, intercept, r_squared)
}

/// Fits `ln p_j` against `|j - origin|` over the tail window.
pub fn fit_localization_length(p: &ProbabilityDist, window: TailWindow) -> Result<LocalizationFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = p
        .probs
        .iter()
        .enumerate()
        .filter_map(|(j, &pj)| {
            let d = j.abs_diff(window.origin);
            (d >= window.min_dist && d <= window.max_dist)
                .then(|| (d as f64, pj.max(LOG_FLOOR).ln()))
        })
        .unzip();
    let distinct = {
        let mut d: Vec<u64> = xs.iter().map(|x| *x as u64).collect();
        d.sort_unstable();
        d.dedup();
        d.len()
    };
    if xs.len() < 4 || distinct < 2 {
        return Err(Error::DegenerateWindow { points: xs.len() });
    }
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    Ok(LocalizationFit {
        xi: (slope < 0.0).then(|| -1.0 / slope),
        slope,
        intercept,
        r_squared,
        window,
    })
}

/// Slope of `ln y` against `ln x`.
pub fn power_law_exponent(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly).0
}

pub fn total_variation_distance(p: &ProbabilityDist, q: &ProbabilityDist) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(0.5
        * p.probs
            .iter()
            .zip(&q.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Total-variation distance between `q` and `p` translated by `shift` sites;
/// weight translated off the lattice counts as mismatch.
pub fn shifted_total_variation_distance(
    p: &ProbabilityDist,
    q: &ProbabilityDist,
    shift: isize,
) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    let n = p.len() as isize;
    let moved = |j: isize| {
        let src = j - shift;
        if (0..n).contains(&src) {
            p.probs[src as usize]
        } else {
            0.0
        }
    };
    let inside: f64 = (0..n).map(|j| (moved(j) - q.probs[j as usize]).abs()).sum();
    let lost: f64 = (0..n)
        .filter(|&j| !(0..n).contains(&(j + shift)))
        .map(|j| p.probs[j as usize])
        .sum();
    Ok(0.5 * (inside + lost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn dist(v: &[f64]) -> ProbabilityDist {
        ProbabilityDist::new(v.to_vec()).unwrap()
    }

    #[test]
    fn intensity_basics() {
        let psi = WaveFunction::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(intensity(&psi).probs(), &[0.0, 1.0]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = WaveFunction::new(vec![Complex64::new(s, 0.0), Complex64::new(0.0, s)]).unwrap();
        let p = intensity(&psi);
        assert!((p.probs()[0] - 0.5).abs() < 1e-15);
        assert!((p.probs()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn variance_examples() {
        assert_eq!(spread_variance(&dist(&[0.0, 0.0, 1.0, 0.0])), 0.0);
        assert_eq!(spread_variance(&dist(&[0.5, 0.0, 0.5])), 1.0);
    }

    #[test]
    fn participation_examples() {
        assert_eq!(participation_ratio(&dist(&[0.0, 1.0, 0.0])), 1.0);
        let n = 8;
        let uniform = dist(&vec![1.0 / n as f64; n]);
        assert!((participation_ratio(&uniform) - n as f64).abs() < 1e-12);
    }

    #[test]
    fn exponential_tail_fit() {
        let n = 81;
        let origin = 40;
        let raw: Vec<f64> = (0..n)
            .map(|j: usize| (-(j.abs_diff(origin) as f64) / 4.0).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        let p = dist(&raw.iter().map(|x| x / total).collect::<Vec<_>>());
        let fit = fit_localization_length(&p, TailWindow::beyond_peak(origin, 30)).unwrap();
        assert!((fit.xi.unwrap() - 4.0).abs() < 1e-6);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_profile_has_no_length() {
        let p = dist(&vec![1.0 / 50.0; 50]);
        let fit = fit_localization_length(&p, TailWindow::beyond_peak(25, 20)).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert!(fit.xi.is_none());
    }

    #[test]
    fn degenerate_window() {
        let p = dist(&vec![0.1; 10]);
        let w = TailWindow {
            origin: 0,
            min_dist: 8,
            max_dist: 9,
        };
        assert!(matches!(
            fit_localization_length(&p, w),
            Err(Error::DegenerateWindow { points: 2 })
        ));
    }

    #[test]
    fn tv_distance_examples() {
        let p = dist(&[0.2, 0.3, 0.5]);
        assert_eq!(total_variation_distance(&p, &p).unwrap(), 0.0);
        let a = dist(&[1.0, 0.0, 0.0]);
        let b = dist(&[0.0, 0.0, 1.0]);
        assert_eq!(total_variation_distance(&a, &b).unwrap(), 1.0);
        assert!(total_variation_distance(&a, &dist(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn shifted_tv_distance() {
        let a = dist(&[0.0, 0.25, 0.75, 0.0]);
        let b = dist(&[0.0, 0.0, 0.25, 0.75]);
        assert_eq!(shifted_total_variation_distance(&a, &b, 1).unwrap(), 0.0);
        assert_eq!(shifted_total_variation_distance(&a, &b, 0).unwrap(), 0.75);
        // weight pushed off the lattice is a mismatch
        let c = dist(&[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(shifted_total_variation_distance(&c, &c, 1).unwrap(), 1.0);
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(ProbabilityDist::new(vec![0.5, 0.4]).is_err());
        assert!(ProbabilityDist::new(vec![1.5, -0.5]).is_err());
    }
}
