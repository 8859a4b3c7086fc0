//! Split Bregman iteration for box- or sign-constrained least squares.
//!
//! The problem is `min ‖Â u − b₀‖²` over `0 ≤ u ≤ 1` (or `u ≥ 0`), where `Â`
//! is diagonal in frequency: `(Â u)_k = g_k (F u)_k`. A 0/1 gain is a
//! frequency mask, a general Hermitian gain is a blur filter, and a product of
//! the two is a masked blur. Every step is then two FFTs and a few
//! elementwise passes:
//!
//! ```text
//! d  ← P(u − v)
//! u  ← (λÂᵀMÂ + I)⁻¹ (λÂᵀM bᵏ + d + v)
//! v  ← v + d − u
//! bᵏ ← bᵏ + b₀ − Â u
//! ```
//!
//! With `Âᵀ = N^h F⁻¹ conj(g)` the inverse is `F⁻¹ (λN^h M|g|² + I)⁻¹ F`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fourier::{FilterSpectrum, MeasurementSet, Transform, HERMITIAN_TOL};
use crate::signal::{threshold, BinarySignal, GridGeometry, RealSignal};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `0 ≤ u ≤ 1`.
    Box,
    /// `u ≥ 0`.
    NonNeg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    /// Stop once `‖Â P(u) − b₀‖² ≤ tol`. `None` means `1e-10·max(1, ‖b₀‖²)`.
    ///
    /// The misfit is taken at the projected iterate: the raw `u` fits the data
    /// to `O(1/λN^h)` from the first step even when it is far from feasible.
    pub tol: Option<f64>,
    pub max_iters: usize,
    /// Iterations between misfit checks (each costs one FFT). `None` checks
    /// every step on grids up to 4096 points and every 10th above.
    pub check_every: Option<usize>,
    pub constraint: Constraint,
    /// Frequency weights `M` in `‖Â u − b‖²_M`.
    pub preconditioner: Option<FilterSpectrum>,
    /// Keep every iteration's misfit in the report (forces a check per step).
    pub trace: bool,
    /// Add the residual back into `bᵏ` after each step. Without it the
    /// iteration is plain ADMM for the penalized least-squares fit, which does
    /// not chase noise into the data.
    pub add_back: bool,
    /// Stop once `max |dᵏ − dᵏ⁻¹| ≤ step_tol` instead of on the misfit. Noisy
    /// data never reach a misfit tolerance.
    pub step_tol: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: 10.0,
            tol: None,
            max_iters: 10_000,
            check_every: None,
            constraint: Constraint::Box,
            preconditioner: None,
            trace: false,
            add_back: true,
            step_tol: None,
        }
    }
}

impl SolverConfig {
    /// Settings for blurred noisy data: no add-back, `λ = 1`, stop on a
    /// stalled projection.
    pub fn noisy() -> Self {
        SolverConfig { lambda: 1.0, add_back: false, step_tol: Some(1e-4), max_iters: 5000, ..SolverConfig::default() }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(invalid("lambda must be positive"));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(invalid("tol must be positive"));
            }
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if let Some(t) = self.step_tol {
            if !(t > 0.0) {
                return Err(invalid("step_tol must be positive"));
            }
        }
        if self.check_every == Some(0) {
            return Err(invalid("check_every must be at least 1"));
        }
        if let Some(m) = &self.preconditioner {
            if !m.is_nonneg_real() {
                return Err(invalid("preconditioner gains must be real and nonnegative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final `‖Â P(u) − b₀‖²`.
    pub residual: f64,
    /// The tolerance actually used.
    pub tol: f64,
    /// Wall time; zero without the `std` feature.
    pub seconds: f64,
    pub converged: bool,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// `B(u)`.
    pub binary: BinarySignal,
    /// The last `u` iterate.
    pub raw: RealSignal,
    /// The last projected iterate `d`, always feasible.
    pub projected: RealSignal,
    pub report: SolveReport,
}

pub fn project_box(d: &RealSignal) -> RealSignal {
    d.map(|x| x.clamp(0.0, 1.0))
}

pub fn project_nonneg(d: &RealSignal) -> RealSignal {
    d.map(|x| x.max(0.0))
}

fn project(c: Constraint, x: f64) -> f64 {
    match c {
        Constraint::Box => x.clamp(0.0, 1.0),
        Constraint::NonNeg => x.max(0.0),
    }
}

/// Frequency-diagonal data term: gains `g_k` and data `b₀` in natural order.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    geometry: GridGeometry,
    gains: Vec<Complex64>,
    data: Vec<Complex64>,
}

impl Problem {
    pub fn new(geometry: GridGeometry, gains: Vec<Complex64>, data: Vec<Complex64>) -> Result<Self> {
        if gains.len() != geometry.len() || data.len() != geometry.len() {
            return Err(invalid("gain and data length must match the geometry"));
        }
        FilterSpectrum::new(geometry, gains.clone())?;
        FilterSpectrum::new(geometry, data.clone())?;
        Ok(Problem { geometry, gains, data })
    }

    /// Partial Fourier data `b = S F u₀`.
    pub fn masked(b: &MeasurementSet) -> Result<Self> {
        let deviation = b.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let g = b.geometry();
        let gains = b.mask().selector().iter().map(|&s| Complex64::new(if s { 1.0 } else { 0.0 }, 0.0)).collect();
        Ok(Problem { geometry: g, gains, data: b.to_full() })
    }

    /// A blurred signal `y = F⁻¹(K F u₀)`; the data becomes `F y`.
    pub fn blurred(y: &RealSignal, k: &FilterSpectrum) -> Result<Self> {
        let g = y.geometry();
        g.check_same(&k.geometry())?;
        let data = Transform::new(g).forward(y).coeffs().to_vec();
        Ok(Problem { geometry: g, gains: k.gains().to_vec(), data })
    }

    /// Only the masked coefficients of a blurred signal: `S F y` against `S K F`.
    pub fn masked_blurred(y: &RealSignal, k: &FilterSpectrum, mask: &crate::fourier::FrequencyMask) -> Result<Self> {
        let mut p = Self::blurred(y, k)?;
        p.geometry.check_same(&mask.geometry())?;
        for (i, s) in mask.selector().into_iter().enumerate() {
            if !s {
                p.gains[i] = ZERO;
                p.data[i] = ZERO;
            }
        }
        Ok(p)
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// `‖b₀‖²`.
    pub fn data_energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `‖Â u − b₀‖²` for a spatial `u`.
    pub fn residual(&self, u: &RealSignal) -> Result<f64> {
        self.geometry.check_same(&u.geometry())?;
        let uhat = Transform::new(self.geometry).forward(u);
        Ok(self.residual_hat(uhat.coeffs()))
    }

    fn residual_hat(&self, uhat: &[Complex64]) -> f64 {
        self.gains.iter().zip(uhat).zip(&self.data).map(|((g, u), b)| (g * u - b).norm_sqr()).sum()
    }
}

/// Iterates `(u, v, d, bᵏ)`; `uhat = F u` is cached for the residual.
#[derive(Debug, Clone, PartialEq)]
pub struct BregmanState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub d: Vec<f64>,
    pub bk: Vec<Complex64>,
    pub uhat: Vec<Complex64>,
    pub iterations: usize,
    /// `max |dᵏ − dᵏ⁻¹|` of the last step.
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct Solver {
    problem: Problem,
    config: SolverConfig,
    transform: Transform,
    /// `λN^h M_k conj(g_k)`.
    coupling: Vec<Complex64>,
    /// `λN^h M_k |g_k|² + 1`.
    denom: Vec<f64>,
    buf: Vec<Complex64>,
}

impl Solver {
    pub fn new(problem: Problem, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let g = problem.geometry;
        if let Some(m) = &config.preconditioner {
            g.check_same(&m.geometry())?;
        }
        let scale = config.lambda * g.len() as f64;
        let weight = |k: usize| config.preconditioner.as_ref().map_or(1.0, |m| m.gains()[k].re);
        let coupling = (0..g.len()).map(|k| problem.gains[k].conj() * (scale * weight(k))).collect();
        let denom = (0..g.len()).map(|k| scale * weight(k) * problem.gains[k].norm_sqr() + 1.0).collect();
        Ok(Solver { transform: Transform::new(g), problem, config, coupling, denom, buf: vec![ZERO; g.len()] })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn tolerance(&self) -> f64 {
        self.config.tol.unwrap_or_else(|| 1e-10 * self.problem.data_energy().max(1.0))
    }

    /// `u = F⁻¹ b₀`, `v = 0`, `bᵏ = b₀`.
    pub fn initial_state(&mut self) -> BregmanState {
        let n = self.problem.geometry.len();
        self.buf.copy_from_slice(&self.problem.data);
        let mut u = vec![0.0; n];
        self.transform.inverse_into(&mut self.buf, &mut u);
        BregmanState {
            u,
            v: vec![0.0; n],
            d: vec![0.0; n],
            bk: self.problem.data.clone(),
            uhat: self.problem.data.clone(),
            iterations: 0,
            step: f64::INFINITY,
        }
    }

    /// `(λÂᵀMÂ + I)⁻¹ rhs`.
    pub fn apply_inverse(&mut self, rhs: &[f64]) -> Vec<f64> {
        self.transform.forward_into(rhs, &mut self.buf);
        for (z, &den) in self.buf.iter_mut().zip(&self.denom) {
            *z /= den;
        }
        let mut out = vec![0.0; rhs.len()];
        self.transform.inverse_into(&mut self.buf, &mut out);
        out
    }

    /// One pass of the four update lines; returns `‖Â u − b₀‖²`.
    pub fn iterate(&mut self, s: &mut BregmanState) -> f64 {
        let c = self.config.constraint;
        let mut w = vec![0.0; s.u.len()];
        let mut step = 0.0f64;
        for i in 0..s.u.len() {
            let d = project(c, s.u[i] - s.v[i]);
            step = step.max((d - s.d[i]).abs());
            s.d[i] = d;
            w[i] = s.d[i] + s.v[i];
        }
        self.transform.forward_into(&w, &mut self.buf);
        for k in 0..self.buf.len() {
            self.buf[k] = (self.buf[k] + self.coupling[k] * s.bk[k]) / self.denom[k];
        }
        s.uhat.copy_from_slice(&self.buf);
        self.transform.inverse_into(&mut self.buf, &mut s.u);
        for i in 0..s.u.len() {
            s.v[i] += s.d[i] - s.u[i];
        }
        let mut residual = 0.0;
        for k in 0..s.bk.len() {
            let r = self.problem.data[k] - self.problem.gains[k] * s.uhat[k];
            if self.config.add_back {
                s.bk[k] += r;
            }
            residual += r.norm_sqr();
        }
        s.step = step;
        s.iterations += 1;
        residual
    }

    /// `‖Â P(u) − b₀‖²`: the data misfit of the nearest feasible point.
    pub fn feasible_residual(&mut self, s: &BregmanState) -> f64 {
        let c = self.config.constraint;
        let w: Vec<f64> = s.u.iter().map(|&x| project(c, x)).collect();
        self.transform.forward_into(&w, &mut self.buf);
        self.problem.residual_hat(&self.buf)
    }

    pub fn solve(&mut self) -> Reconstruction {
        #[cfg(feature = "std")]
        let start = std::time::Instant::now();
        let tol = self.tolerance();
        let mut state = self.initial_state();
        let mut trace = Vec::new();
        let mut residual = f64::INFINITY;
        let mut converged = false;
        let every = match (self.config.trace, self.config.check_every) {
            (true, _) => 1,
            (false, Some(k)) => k,
            (false, None) if self.problem.geometry.len() <= 4096 => 1,
            (false, None) => 10,
        };
        while state.iterations < self.config.max_iters {
            self.iterate(&mut state);
            if let Some(st) = self.config.step_tol {
                if state.step <= st && state.iterations > 1 {
                    residual = self.feasible_residual(&state);
                    converged = true;
                    break;
                }
            }
            if !state.iterations.is_multiple_of(every) && state.iterations < self.config.max_iters {
                continue;
            }
            residual = self.feasible_residual(&state);
            if self.config.trace {
                trace.push(residual);
            }
            if residual <= tol && self.config.step_tol.is_none() {
                converged = true;
                break;
            }
        }
        #[cfg(feature = "std")]
        let seconds = start.elapsed().as_secs_f64();
        #[cfg(not(feature = "std"))]
        let seconds = 0.0;
        let g = self.problem.geometry;
        let raw = RealSignal::from_raw(g, state.u);
        Reconstruction {
            binary: threshold(&raw),
            raw,
            projected: RealSignal::from_raw(g, state.d),
            report: SolveReport { iterations: state.iterations, residual, tol, seconds, converged, trace },
        }
    }
}

/// Solves from partial Fourier data `b = S F u₀`.
pub fn reconstruct(b: &MeasurementSet, config: &SolverConfig) -> Result<Reconstruction> {
    Ok(Solver::new(Problem::masked(b)?, config.clone())?.solve())
}

/// Solves from a blurred signal `y = F⁻¹(K F u₀)`.
pub fn reconstruct_filtered(y: &RealSignal, k: &FilterSpectrum, config: &SolverConfig) -> Result<Reconstruction> {
    Ok(Solver::new(Problem::blurred(y, k)?, config.clone())?.solve())
}
