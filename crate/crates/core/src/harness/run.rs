//! Runs a resolved experiment and writes its outputs.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind, InitialConfig, OutputFormat};
use super::output::{site_header, write_pgm, write_run_json, write_table};
use crate::ensemble::{evolve_dephasing, run_ensemble, EnsembleStats};
use crate::error::Result;
use crate::lattice::{build_hamiltonian, make_initial_state, InitialStateSpec};
use crate::observables::{intensity, participation_ratio, spread_variance, ProbabilityDist};
use crate::oracles::classical_ctrw_distribution;
use crate::propagate::{Snapshots, ZGrid};

/// Final intensities for each launch site of a boundary sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Carpet {
    pub inputs: Vec<usize>,
    /// `[input][site]`, truncated to the configured view.
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub zgrid: ZGrid,
    /// Dimensionless time `C̄ z`.
    pub tau: Vec<f64>,
    /// `[z][site]`; ensemble means for stochastic experiments.
    pub intensity: Vec<Vec<f64>>,
    pub intensity_sem: Option<Vec<Vec<f64>>>,
    pub variance: Vec<f64>,
    pub participation: Vec<f64>,
    /// `|Σ_j p_j - 1|` per snapshot.
    pub norm_error: Vec<f64>,
    pub carpet: Option<Carpet>,
}

impl RunResult {
    fn from_rows(zgrid: ZGrid, c_mean: f64, rows: Vec<Vec<f64>>) -> Self {
        let dists: Vec<ProbabilityDist> = rows.into_iter().map(ProbabilityDist::from_raw).collect();
        RunResult {
            tau: zgrid.values().iter().map(|z| c_mean * z).collect(),
            zgrid,
            variance: dists.iter().map(spread_variance).collect(),
            participation: dists.iter().map(participation_ratio).collect(),
            norm_error: dists.iter().map(|d| (d.total() - 1.0).abs()).collect(),
            intensity: dists.into_iter().map(ProbabilityDist::into_probs).collect(),
            intensity_sem: None,
            carpet: None,
        }
    }

    fn from_snapshots(snaps: &Snapshots, c_mean: f64) -> Self {
        let rows = snaps
            .states
            .iter()
            .map(|s| intensity(s).into_probs())
            .collect();
        Self::from_rows(snaps.zgrid.clone(), c_mean, rows)
    }

    fn from_ensemble(stats: EnsembleStats, c_mean: f64) -> Self {
        let mut out = Self::from_rows(stats.zgrid, c_mean, stats.mean_intensity);
        out.variance = stats.mean_variance;
        out.participation = stats.mean_participation;
        out.intensity_sem = Some(stats.sem_intensity);
        out
    }
}

/// Computes an experiment without touching the file system.
pub fn compute(cfg: &ExperimentConfig) -> Result<RunResult> {
    let spec = cfg.lattice_spec();
    let c_mean = spec.mean_coupling();
    let zgrid = cfg.grid()?;
    let init = cfg.initial_spec();
    match cfg.experiment {
        ExperimentKind::Ballistic => {
            let h = build_hamiltonian(&spec)?;
            let psi0 = make_initial_state(&init, spec.n_sites)?;
            let snaps = cfg.propagator.evolve(&h, &psi0, &zgrid)?;
            Ok(RunResult::from_snapshots(&snaps, c_mean))
        }
        ExperimentKind::Disorder => {
            let d = cfg.disorder.expect("resolved disorder config");
            let stats = run_ensemble(
                &spec,
                &d,
                &init,
                &zgrid,
                cfg.n_realizations,
                cfg.master_seed,
                cfg.propagator,
            )?;
            Ok(RunResult::from_ensemble(stats, c_mean))
        }
        ExperimentKind::Dephasing => {
            let d = cfg.dephasing.expect("resolved dephasing config");
            let stats = evolve_dephasing(
                &spec,
                &d,
                &init,
                &zgrid,
                cfg.n_realizations,
                cfg.master_seed,
            )?;
            Ok(RunResult::from_ensemble(stats, c_mean))
        }
        ExperimentKind::Classical => {
            let j0 = match cfg.initial {
                Some(InitialConfig::SingleSite { site }) => site,
                _ => unreachable!("resolved classical config starts from one site"),
            };
            let rows = zgrid
                .values()
                .iter()
                .map(|&t| classical_ctrw_distribution(j0, c_mean, t, spec.n_sites).map(|p| p.into_probs()))
                .collect::<Result<Vec<_>>>()?;
            Ok(RunResult::from_rows(zgrid, c_mean, rows))
        }
        ExperimentKind::BoundarySweep => {
            let sweep = cfg.sweep.clone().expect("resolved sweep config");
            let view = sweep.view_sites.expect("resolved view width");
            let h = build_hamiltonian(&spec)?;
            let inputs: Vec<usize> = (sweep.first_input..=sweep.last_input).collect();
            let runs = inputs
                .par_iter()
                .map(|&s| {
                    let psi0 = make_initial_state(&InitialStateSpec::SingleSite(s), spec.n_sites)?;
                    cfg.propagator.evolve(&h, &psi0, &zgrid)
                })
                .collect::<Result<Vec<_>>>()?;
            let rows = runs
                .iter()
                .map(|snaps| intensity(snaps.last()).into_probs()[..view].to_vec())
                .collect();
            let mut out = RunResult::from_snapshots(&runs[0], c_mean);
            out.carpet = Some(Carpet { inputs, rows });
            Ok(out)
        }
    }
}

/// Writes the files selected by `cfg.output.formats`; returns their paths.
pub fn write_outputs(cfg: &ExperimentConfig, result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let n_sites = result.intensity.first().map_or(0, Vec::len);
    let zs = result.zgrid.values();

    if cfg.output.wants(OutputFormat::Csv) {
        let path = dir.join("intensity.csv");
        write_table(
            &path,
            &site_header("z", n_sites),
            zs.iter()
                .zip(&result.intensity)
                .map(|(z, row)| (super::output::fmt_f64(*z), row.as_slice())),
        )?;
        written.push(path);

        if let Some(sem) = &result.intensity_sem {
            let path = dir.join("intensity_sem.csv");
            write_table(
                &path,
                &site_header("z", n_sites),
                zs.iter()
                    .zip(sem)
                    .map(|(z, row)| (super::output::fmt_f64(*z), row.as_slice())),
            )?;
            written.push(path);
        }

        let path = dir.join("observables.csv");
        let header: Vec<String> = ["z", "tau", "variance", "participation_ratio", "norm_error"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows: Vec<[f64; 4]> = (0..zs.len())
            .map(|i| {
                [
                    result.tau[i],
                    result.variance[i],
                    result.participation[i],
                    result.norm_error[i],
                ]
            })
            .collect();
        write_table(
            &path,
            &header,
            zs.iter()
                .zip(&rows)
                .map(|(z, r)| (super::output::fmt_f64(*z), r.as_slice())),
        )?;
        written.push(path);

        if let Some(carpet) = &result.carpet {
            let path = dir.join("carpet.csv");
            let width = carpet.rows.first().map_or(0, Vec::len);
            write_table(
                &path,
                &site_header("input_site", width),
                carpet
                    .inputs
                    .iter()
                    .zip(&carpet.rows)
                    .map(|(s, row)| (s.to_string(), row.as_slice())),
            )?;
            written.push(path);
        }
    }

    if cfg.output.wants(OutputFormat::Pgm) {
        if let Some(carpet) = &result.carpet {
            let path = dir.join("carpet.pgm");
            write_pgm(&path, &carpet.rows, cfg.output.heatmap_scale)?;
            written.push(path);
        }
    }

    if cfg.output.wants(OutputFormat::Json) {
        let path = dir.join("run.json");
        write_run_json(&path, cfg)?;
        written.push(path);
    }
    Ok(written)
}

/// Computes a resolved experiment and writes its outputs into `dir`.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<RunResult> {
    let result = compute(cfg)?;
    write_outputs(cfg, &result, dir)?;
    Ok(result)
}
