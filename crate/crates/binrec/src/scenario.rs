//! Experiment drivers: generate → blur/measure → noise → reconstruct → compare.

use std::path::Path;
use std::time::Instant;

use binrec_core::fourier::{blur, default_hsize, gaussian_filter, measure, FilterSpectrum, FrequencyMask};
use binrec_core::generate::{add_measurement_noise, add_noise};
use binrec_core::rng::derive_seed;
use binrec_core::signal::hamming;
use binrec_core::solver::{Problem, Reconstruction, Solver};
use binrec_core::{BinarySignal, GridGeometry};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::{ExperimentConfig, NoiseDomain, ScenarioKind, SolverMode};
use crate::error::{input, Result, StageExt};
use crate::io::{save_binary, write_json, write_output};
use crate::mask::parse_mask;
use crate::source::make_signal;
use crate::stats::{mean, median, spearman, std_dev, std_err};

/// Blur, mask, noise and solver settings for one reconstruction.
#[derive(Debug, Clone)]
pub struct Pipeline<'a> {
    pub cfg: &'a ExperimentConfig,
    pub mask: FrequencyMask,
    pub noise_std: f64,
}

impl Pipeline<'_> {
    fn filter(&self, g: GridGeometry) -> Result<Option<FilterSpectrum>> {
        let c = self.cfg;
        if c.blur_sigma == 0.0 {
            return Ok(None);
        }
        let hsize = c.hsize.unwrap_or_else(|| default_hsize(c.blur_sigma));
        Ok(Some(gaussian_filter(c.blur_sigma, hsize, g)?))
    }

    /// Runs the measure and solve stages on `u0`; noise draws come from `noise_seed`.
    pub fn run(&self, u0: &BinarySignal, noise_seed: u64) -> Result<Reconstruction> {
        let c = self.cfg;
        let g = u0.geometry();
        let mut precondition = None;
        let problem = match self.filter(g).stage("blur")? {
            Some(k) => {
                if c.noise_domain == NoiseDomain::Measurement && self.noise_std > 0.0 {
                    return Err(input("blurred scenarios take spatial noise only")).stage("noise");
                }
                let y = blur(&u0.to_real(), &k).stage("blur")?;
                let y = add_noise(&y, self.noise_std, noise_seed).stage("noise")?;
                if c.solver.mode == SolverMode::Noisy {
                    precondition = Some(k.power());
                }
                Problem::masked_blurred(&y, &k, &self.mask).stage("measure")?
            }
            None => {
                let mut u = u0.to_real();
                if c.noise_domain == NoiseDomain::Spatial {
                    u = add_noise(&u, self.noise_std, noise_seed).stage("noise")?;
                }
                let mut b = measure(&u, &self.mask).stage("measure")?;
                if c.noise_domain == NoiseDomain::Measurement {
                    b = add_measurement_noise(&b, self.noise_std, noise_seed).stage("noise")?;
                }
                Problem::masked(&b).stage("measure")?
            }
        };
        let mut config = c.solver.for_problem(problem.data_energy());
        config.preconditioner = precondition;
        Ok(Solver::new(problem, config).stage("reconstruct")?.solve())
    }
}

fn signal_seed(master: u64, trial: usize) -> u64 {
    derive_seed(master, 2 * trial as u64)
}

fn noise_seed(master: u64, trial: usize) -> u64 {
    derive_seed(master, 2 * trial as u64 + 1)
}

/// Mask `low:m` on a line, `disk:m` on a grid.
fn sized_mask(g: GridGeometry, m: usize) -> Result<FrequencyMask> {
    Ok(if g.h() == 1 { FrequencyMask::lowpass(g, m) } else { FrequencyMask::disk(g, m as f64)? })
}

#[derive(Debug, Clone, Serialize)]
pub struct SingleOutcome {
    pub misses: usize,
    pub ones: usize,
    pub measurements: usize,
    pub iterations: usize,
    pub residual: f64,
    pub seconds: f64,
    pub converged: bool,
    #[serde(skip)]
    pub truth: BinarySignal,
    #[serde(skip)]
    pub reconstruction: Reconstruction,
}

/// Family-wise false-alarm rate of the mask-axis increase test.
pub const TREND_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct SweepTrend {
    /// Spearman ρ between noise level and the miss count averaged over mask sizes.
    pub spearman_noise: f64,
    /// The same ρ within each mask size.
    pub spearman_noise_by_mask: Vec<f64>,
    /// Largest adjacent increase along the mask axis, in paired standard
    /// errors (negative when every step decreases).
    pub worst_increase_se: f64,
    /// One-sided Bonferroni threshold `Φ⁻¹(1 − α/K)` over the `K` adjacent steps.
    pub increase_threshold_se: f64,
    /// No step up by more than the threshold, and the largest mask does at
    /// least as well as the smallest at every noise level.
    pub non_increasing_in_measurements: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub noise_levels: Vec<f64>,
    pub mask_sizes: Vec<usize>,
    /// Real dimension of each mask.
    pub measurements: Vec<usize>,
    /// `[noise][mask]` averages.
    pub mean_misses: Vec<Vec<f64>>,
    pub std_misses: Vec<Vec<f64>>,
    pub not_converged: usize,
    pub trend: SweepTrend,
    /// `[noise][mask][trial]`.
    #[serde(skip)]
    pub misses: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingOutcome {
    pub mask_sizes: Vec<usize>,
    /// Mask size minus the smallest mask size.
    pub extra_radius: Vec<usize>,
    pub mean_seconds: Vec<f64>,
    pub median_seconds: Vec<f64>,
    pub mean_iterations: Vec<f64>,
    /// Spearman ρ between extra radius and mean seconds.
    pub spearman_seconds: f64,
    pub spearman_iterations: f64,
    /// Summed over trials.
    pub misses_by_mask: Vec<usize>,
    pub not_converged: usize,
    /// `[mask][trial]`.
    #[serde(skip)]
    pub seconds: Vec<Vec<f64>>,
    #[serde(skip)]
    pub iterations: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Single(SingleOutcome),
    Sweep(SweepOutcome),
    Timing(TimingOutcome),
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub config: ExperimentConfig,
    pub seconds: f64,
    pub outcome: Outcome,
}

pub fn run_scenario(cfg: &ExperimentConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let start = Instant::now();
    let outcome = match cfg.kind {
        ScenarioKind::Single => Outcome::Single(run_single(cfg)?),
        ScenarioKind::Sweep => Outcome::Sweep(run_sweep(cfg)?),
        ScenarioKind::Timing => Outcome::Timing(run_timing(cfg)?),
    };
    let report = ScenarioReport { config: cfg.clone(), seconds: start.elapsed().as_secs_f64(), outcome };
    if let Some(dir) = &cfg.out_dir {
        write_outputs(dir, &report).stage("write")?;
    }
    Ok(report)
}

fn run_single(cfg: &ExperimentConfig) -> Result<SingleOutcome> {
    let u0 = make_signal(&cfg.signal, cfg.dim, cfg.n, signal_seed(cfg.seed, 0)).stage("generate")?;
    let mask = parse_mask(&cfg.mask, u0.geometry(), false).stage("measure")?;
    let measurements = mask.real_rank();
    let rec = Pipeline { cfg, mask, noise_std: cfg.noise_std }.run(&u0, noise_seed(cfg.seed, 0))?;
    let r = &rec.report;
    Ok(SingleOutcome {
        misses: hamming(&rec.binary, &u0).stage("compare")?,
        ones: u0.ones(),
        measurements,
        iterations: r.iterations,
        residual: r.residual,
        seconds: r.seconds,
        converged: r.converged,
        truth: u0,
        reconstruction: rec,
    })
}

fn truths(cfg: &ExperimentConfig) -> Result<Vec<BinarySignal>> {
    (0..cfg.trials).map(|t| make_signal(&cfg.signal, cfg.dim, cfg.n, signal_seed(cfg.seed, t))).collect::<Result<_>>().stage("generate")
}

fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    let u0s = truths(cfg)?;
    let g = u0s[0].geometry();
    let masks = cfg.mask_sizes.iter().map(|&m| sized_mask(g, m)).collect::<Result<Vec<_>>>().stage("measure")?;
    let cells: Vec<(usize, usize, usize)> = (0..cfg.noise_levels.len())
        .flat_map(|i| (0..masks.len()).flat_map(move |j| (0..cfg.trials).map(move |t| (i, j, t))))
        .collect();
    let runs = cells
        .par_iter()
        .map(|&(i, j, t)| {
            let p = Pipeline { cfg, mask: masks[j].clone(), noise_std: cfg.noise_levels[i] };
            let rec = p.run(&u0s[t], noise_seed(cfg.seed, t))?;
            Ok((hamming(&rec.binary, &u0s[t]).stage("compare")?, rec.report.converged))
        })
        .collect::<Result<Vec<_>>>()?;
    let (nn, nm, nt) = (cfg.noise_levels.len(), masks.len(), cfg.trials);
    let misses: Vec<Vec<Vec<usize>>> =
        (0..nn).map(|i| (0..nm).map(|j| (0..nt).map(|t| runs[(i * nm + j) * nt + t].0).collect()).collect()).collect();
    let as_f = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<f64>>();
    let mean_misses: Vec<Vec<f64>> = misses.iter().map(|row| row.iter().map(|c| mean(&as_f(c))).collect()).collect();
    let std_misses = misses.iter().map(|row| row.iter().map(|c| std_dev(&as_f(c))).collect()).collect();
    let trend = sweep_trend(&cfg.noise_levels, &misses);
    Ok(SweepOutcome {
        noise_levels: cfg.noise_levels.clone(),
        mask_sizes: cfg.mask_sizes.clone(),
        measurements: masks.iter().map(|m| m.real_rank()).collect(),
        mean_misses,
        std_misses,
        not_converged: runs.iter().filter(|r| !r.1).count(),
        trend,
        misses,
    })
}

/// Trend statistics of a `[noise][mask][trial]` miss table whose trials are
/// paired across cells.
pub fn sweep_trend(noise_levels: &[f64], misses: &[Vec<Vec<usize>>]) -> SweepTrend {
    let cell_mean = |c: &[usize]| c.iter().sum::<usize>() as f64 / c.len() as f64;
    let row_means: Vec<f64> = misses.iter().map(|row| mean(&row.iter().map(|c| cell_mean(c)).collect::<Vec<_>>())).collect();
    let nm = misses.first().map_or(0, Vec::len);
    let spearman_noise_by_mask =
        (0..nm).map(|j| spearman(noise_levels, &misses.iter().map(|row| cell_mean(&row[j])).collect::<Vec<_>>())).collect();
    let steps = misses.len() * nm.saturating_sub(1);
    let threshold = Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(1.0 - TREND_ALPHA / steps.max(1) as f64);
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for row in misses {
        for w in row.windows(2) {
            let diff: Vec<f64> = w[1].iter().zip(&w[0]).map(|(&b, &a)| b as f64 - a as f64).collect();
            let (d, se) = (mean(&diff), std_err(&diff));
            let z = if se > 0.0 {
                d / se
            } else if d > 0.0 {
                f64::INFINITY
            } else if d < 0.0 {
                f64::NEG_INFINITY
            } else {
                0.0
            };
            worst = worst.max(z);
            ok &= z <= threshold;
        }
        if let (Some(first), Some(last)) = (row.first(), row.last()) {
            ok &= cell_mean(last) <= cell_mean(first);
        }
    }
    SweepTrend {
        spearman_noise: spearman(noise_levels, &row_means),
        spearman_noise_by_mask,
        worst_increase_se: worst,
        increase_threshold_se: threshold,
        non_increasing_in_measurements: ok,
    }
}

/// Sequential on purpose: concurrent solves would distort the timings.
fn run_timing(cfg: &ExperimentConfig) -> Result<TimingOutcome> {
    let u0s = truths(cfg)?;
    let g = u0s[0].geometry();
    let (mut seconds, mut iterations) = (Vec::new(), Vec::new());
    let (mut misses_by_mask, mut not_converged) = (Vec::new(), 0);
    for &m in &cfg.mask_sizes {
        let p = Pipeline { cfg, mask: sized_mask(g, m).stage("measure")?, noise_std: cfg.noise_std };
        let (mut s_row, mut i_row, mut misses) = (Vec::new(), Vec::new(), 0);
        for (t, u0) in u0s.iter().enumerate() {
            let rec = p.run(u0, noise_seed(cfg.seed, t))?;
            misses += hamming(&rec.binary, u0).stage("compare")?;
            not_converged += usize::from(!rec.report.converged);
            s_row.push(rec.report.seconds);
            i_row.push(rec.report.iterations);
        }
        seconds.push(s_row);
        iterations.push(i_row);
        misses_by_mask.push(misses);
    }
    let m0 = cfg.mask_sizes[0];
    let extra_radius: Vec<usize> = cfg.mask_sizes.iter().map(|&m| m.saturating_sub(m0)).collect();
    let extra_f: Vec<f64> = extra_radius.iter().map(|&e| e as f64).collect();
    let mean_seconds: Vec<f64> = seconds.iter().map(|r| mean(r)).collect();
    let mean_iterations: Vec<f64> = iterations.iter().map(|r| mean(&r.iter().map(|&i| i as f64).collect::<Vec<_>>())).collect();
    Ok(TimingOutcome {
        mask_sizes: cfg.mask_sizes.clone(),
        spearman_seconds: spearman(&extra_f, &mean_seconds),
        spearman_iterations: spearman(&extra_f, &mean_iterations),
        extra_radius,
        median_seconds: seconds.iter().map(|r| median(r)).collect(),
        mean_seconds,
        mean_iterations,
        misses_by_mask,
        not_converged,
        seconds,
        iterations,
    })
}

fn signal_ext(u: &BinarySignal) -> &'static str {
    if u.geometry().h() == 1 {
        "csv"
    } else {
        "pgm"
    }
}

/// `report.json` plus `truth` / `reconstruction` files, `grid.csv` or `timing.csv`.
pub fn write_outputs(dir: &Path, report: &ScenarioReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
    match &report.outcome {
        Outcome::Single(s) => {
            let ext = signal_ext(&s.truth);
            save_binary(&dir.join(format!("truth.{ext}")), &s.truth)?;
            save_binary(&dir.join(format!("reconstruction.{ext}")), &s.reconstruction.binary)?;
        }
        Outcome::Sweep(s) => {
            let mut csv = String::from("noise_std,mask_size,measurements,trials,mean_misses,std_misses\n");
            for (i, noise) in s.noise_levels.iter().enumerate() {
                for (j, m) in s.mask_sizes.iter().enumerate() {
                    let trials = s.misses[i][j].len();
                    csv += &format!("{noise},{m},{},{trials},{},{}\n", s.measurements[j], s.mean_misses[i][j], s.std_misses[i][j]);
                }
            }
            write_output(Some(&dir.join("grid.csv")), &csv)?;
        }
        Outcome::Timing(s) => {
            let mut csv = String::from("mask_size,extra_radius,trial,seconds,iterations\n");
            for (j, m) in s.mask_sizes.iter().enumerate() {
                for (t, sec) in s.seconds[j].iter().enumerate() {
                    csv += &format!("{m},{},{t},{sec},{}\n", s.extra_radius[j], s.iterations[j][t]);
                }
            }
            write_output(Some(&dir.join("timing.csv")), &csv)?;
        }
    }
    write_json(Some(&dir.join("report.json")), report)
}
