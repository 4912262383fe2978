//! Disorder and dephasing ensembles.
//!
//! Every realization `k` draws from its own ChaCha stream selected by
//! `(master_seed, k)`, so a realization never depends on which worker ran it
//! or in what order. Realizations are evaluated in fixed-size chunks and
//! folded into the running statistics strictly by index, which keeps the
//! floating-point reduction identical for any thread count.

use num_complex::Complex64;
use rand::distr::{Distribution, Uniform};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    build_hamiltonian, make_initial_state, Hamiltonian, InitialStateSpec, LatticeSpec,
    WaveFunction,
};
use crate::observables::{intensity, participation_ratio, spread_variance, ProbabilityDist};
use crate::propagate::{chebyshev_apply, spectral_bounds, Method, Snapshots, ZGrid};

/// Realizations evaluated concurrently before being folded into the totals.
const CHUNK: usize = 64;

/// Chebyshev tolerance for each constant-noise segment.
pub const SEGMENT_TOL: f64 = 1e-13;

/// Static spatial disorder.
///
/// Couplings become `C_j (1 + w u_j)` and on-site terms `β_j + W v_j` with
/// `u_j` uniform on `[-1, 1]` and `v_j` uniform on `[-1/2, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    /// `w`, must stay below 1 so couplings remain positive.
    #[serde(default)]
    pub offdiag_strength: f64,
    /// `W`
    #[serde(default)]
    pub diag_strength: f64,
}

impl DisorderSpec {
    pub fn offdiag(w: f64) -> Self {
        DisorderSpec {
            offdiag_strength: w,
            diag_strength: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.offdiag_strength;
        if !(w >= 0.0 && w < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "off-diagonal disorder strength must satisfy 0 <= w < 1, got {w}"
            )));
        }
        let big_w = self.diag_strength;
        if !(big_w >= 0.0 && big_w.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "diagonal disorder strength must be finite and >= 0, got {big_w}"
            )));
        }
        Ok(())
    }

    pub fn is_clean(&self) -> bool {
        self.offdiag_strength == 0.0 && self.diag_strength == 0.0
    }
}

/// Temporal disorder: on-site terms redrawn uniformly on
/// `[-W_t/2, W_t/2]` for every segment of length `segment_length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingSpec {
    pub segment_length: f64,
    pub phase_strength: f64,
}

impl DephasingSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.segment_length > 0.0 && self.segment_length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "segment length must be positive, got {}",
                self.segment_length
            )));
        }
        if !(self.phase_strength >= 0.0 && self.phase_strength.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "phase strength must be finite and >= 0, got {}",
                self.phase_strength
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPolicy {
    pub master_seed: u64,
}

impl SeedPolicy {
    pub fn new(master_seed: u64) -> Self {
        SeedPolicy { master_seed }
    }

    /// Random stream of realization `k`.
    pub fn rng(&self, k: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(k);
        rng
    }
}

pub fn sample_disordered_lattice(
    base: &LatticeSpec,
    d: &DisorderSpec,
    seeds: SeedPolicy,
    k: u64,
) -> Result<LatticeSpec> {
    base.validate()?;
    d.validate()?;
    if d.is_clean() {
        return Ok(base.clone());
    }
    let mut rng = seeds.rng(k);
    let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let half = Uniform::new_inclusive(-0.5, 0.5).expect("valid range");
    let mut out = base.clone();
    // couplings first, then on-site terms, always both
    for c in out.coupling.iter_mut() {
        *c *= 1.0 + d.offdiag_strength * unit.sample(&mut rng);
    }
    for b in out.beta.iter_mut() {
        *b += d.diag_strength * half.sample(&mut rng);
    }
    Ok(out)
}

/// Ensemble means over realizations, indexed `[z][site]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub n_realizations: usize,
    pub zgrid: ZGrid,
    pub mean_intensity: Vec<Vec<f64>>,
    /// Standard error of the mean (unbiased sample variance); zero for one realization.
    pub sem_intensity: Vec<Vec<f64>>,
    pub mean_variance: Vec<f64>,
    pub sem_variance: Vec<f64>,
    pub mean_participation: Vec<f64>,
    pub sem_participation: Vec<f64>,
}

impl EnsembleStats {
    pub fn mean_distribution(&self, z_index: usize) -> ProbabilityDist {
        ProbabilityDist::from_raw(self.mean_intensity[z_index].clone())
    }

    pub fn n_sites(&self) -> usize {
        self.mean_intensity.first().map_or(0, Vec::len)
    }
}

/// Per-realization observables on the grid.
struct Sample {
    intensity: Vec<Vec<f64>>,
    variance: Vec<f64>,
    participation: Vec<f64>,
}

impl Sample {
    fn from_snapshots(snaps: &Snapshots) -> Self {
        let dists: Vec<ProbabilityDist> = snaps.states.iter().map(intensity).collect();
        Sample {
            variance: dists.iter().map(spread_variance).collect(),
            participation: dists.iter().map(participation_ratio).collect(),
            intensity: dists.into_iter().map(ProbabilityDist::into_probs).collect(),
        }
    }
}

/// Welford accumulator over a flat vector.
struct Running {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Running {
    fn new(len: usize) -> Self {
        Running {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, values: impl Iterator<Item = f64>) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(values) {
            let delta = x - *m;
            *m += delta / n;
            *s += delta * (x - *m);
        }
    }

    fn sem(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.mean.len()];
        }
        let n = self.count as f64;
        self.m2.iter().map(|s| (s / (n - 1.0) / n).sqrt()).collect()
    }
}

fn unflatten(flat: Vec<f64>, width: usize) -> Vec<Vec<f64>> {
    flat.chunks(width).map(<[f64]>::to_vec).collect()
}

/// Evaluates `n` realizations with `realize` and folds them in index order.
fn accumulate<F>(zgrid: &ZGrid, n_sites: usize, n: usize, realize: F) -> Result<EnsembleStats>
where
    F: Fn(u64) -> Result<Sample> + Sync,
{
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one realization".into()));
    }
    let nz = zgrid.len();
    let mut intens = Running::new(nz * n_sites);
    let mut var = Running::new(nz);
    let mut pr = Running::new(nz);
    for start in (0..n).step_by(CHUNK) {
        let end = (start + CHUNK).min(n);
        let samples: Vec<Result<Sample>> = (start..end)
            .into_par_iter()
            .map(|k| realize(k as u64))
            .collect();
        for s in samples {
            let s = s?;
            intens.push(s.intensity.iter().flatten().copied());
            var.push(s.variance.iter().copied());
            pr.push(s.participation.iter().copied());
        }
    }
    Ok(EnsembleStats {
        n_realizations: n,
        zgrid: zgrid.clone(),
        sem_intensity: unflatten(intens.sem(), n_sites),
        mean_intensity: unflatten(intens.mean, n_sites),
        sem_variance: var.sem(),
        mean_variance: var.mean,
        sem_participation: pr.sem(),
        mean_participation: pr.mean,
    })
}

/// Static-disorder ensemble.
pub fn run_ensemble(
    base: &LatticeSpec,
    d: &DisorderSpec,
    init: &InitialStateSpec,
    zgrid: &ZGrid,
    n_realizations: usize,
    master_seed: u64,
    method: Method,
) -> Result<EnsembleStats> {
    base.validate()?;
    d.validate()?;
    let psi0 = make_initial_state(init, base.n_sites)?;
    let seeds = SeedPolicy::new(master_seed);
    accumulate(zgrid, base.n_sites, n_realizations, |k| {
        let lattice = sample_disordered_lattice(base, d, seeds, k)?;
        let h = build_hamiltonian(&lattice)?;
        Ok(Sample::from_snapshots(&method.evolve(&h, &psi0, zgrid)?))
    })
}

/// One dephased trajectory: piecewise-constant random on-site terms, each
/// segment propagated exactly (to [`SEGMENT_TOL`]) and composed in order.
pub fn dephased_realization(
    base: &LatticeSpec,
    deph: &DephasingSpec,
    psi0: &WaveFunction,
    zgrid: &ZGrid,
    seeds: SeedPolicy,
    k: u64,
) -> Result<Snapshots> {
    deph.validate()?;
    let h0 = build_hamiltonian(base)?;
    if psi0.len() != h0.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: h0.n_sites(),
            found: psi0.len(),
        });
    }
    let method = Method::Chebyshev { tol: SEGMENT_TOL };
    if deph.phase_strength == 0.0 {
        return method.evolve(&h0, psi0, zgrid);
    }

    let mut rng = seeds.rng(k);
    let noise = Uniform::new_inclusive(-0.5, 0.5).expect("valid range");
    let dz = deph.segment_length;
    let z = zgrid.values();
    let mut states = Vec::with_capacity(z.len());
    let mut next = 0;
    while next < z.len() && z[next] == 0.0 {
        states.push(psi0.clone());
        next += 1;
    }
    let mut psi: Vec<Complex64> = psi0.amps().to_vec();
    let mut segment = 0usize;
    while next < z.len() {
        let seg_start = segment as f64 * dz;
        let seg_end = (segment + 1) as f64 * dz;
        let h = Hamiltonian {
            diag: h0
                .diag
                .iter()
                .map(|d| d + deph.phase_strength * noise.sample(&mut rng))
                .collect(),
            ..h0.clone()
        };
        let bounds = spectral_bounds(&h);
        // grid points inside (seg_start, seg_end], with slack for rounding
        while next < z.len() && z[next] <= seg_end + 1e-12 * seg_end {
            let amps = chebyshev_apply(&h, bounds, &psi, z[next] - seg_start, SEGMENT_TOL)?;
            states.push(WaveFunction::from_evolved(amps));
            next += 1;
        }
        if next < z.len() {
            psi = chebyshev_apply(&h, bounds, &psi, dz, SEGMENT_TOL)?;
        }
        segment += 1;
    }
    Snapshots::checked(zgrid.clone(), states, method)
}

/// Temporal-disorder ensemble; `phase_strength = 0` is the clean evolution.
pub fn evolve_dephasing(
    base: &LatticeSpec,
    deph: &DephasingSpec,
    init: &InitialStateSpec,
    zgrid: &ZGrid,
    n_realizations: usize,
    master_seed: u64,
) -> Result<EnsembleStats> {
    base.validate()?;
    deph.validate()?;
    let psi0 = make_initial_state(init, base.n_sites)?;
    let seeds = SeedPolicy::new(master_seed);
    accumulate(zgrid, base.n_sites, n_realizations, |k| {
        let snaps = dephased_realization(base, deph, &psi0, zgrid, seeds, k)?;
        Ok(Sample::from_snapshots(&snaps))
    })
}
