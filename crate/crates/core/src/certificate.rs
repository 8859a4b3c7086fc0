//! Dual certificates for exact recovery.
//!
//! `u₀` is the unique box-feasible solution of `A u = A u₀` exactly when some
//! `v = Aᵀη` is strictly negative where `u₀ = 1` and strictly positive where
//! `u₀ = 0`. Otherwise a nonzero `v ∈ ker A` with those signs (non-strict)
//! exists. Both sides are small linear programs over a real parametrization of
//! `η`, and in 1D a certificate can also be written down directly from the run
//! boundaries of `u₀`.
//!
//! The real parametrization is isometric: a `±k` pair contributes the columns
//! `√2 cos θ` and `−√2 sin θ` (`θ = 2π⟨k, x⟩/N`, `x` 1-based), a
//! self-conjugate index the column `cos θ`. The Euclidean norm of the
//! parameters is then the norm of `η` over the mask.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fourier::{adjoint_measure, measure, FrequencyMask, MeasurementSet};
use crate::lp::{Bound, LinearProgram, LpOutcome, Relation};
use crate::math::{cis_turns, l2};
use crate::signal::{interval_decomposition, BinarySignal, GridGeometry, RealSignal};

/// LP optima above this count as strictly positive.
pub const STRICT_TOL: f64 = 1e-9;

/// Relative bound on `‖A v‖ / ‖v‖` for a kernel witness.
pub const KERNEL_TOL: f64 = 1e-9;

/// `v = Aᵀη` with the sign pattern opposite to `u₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub eta: MeasurementSet,
    pub v: RealSignal,
    /// `min_x σ(x) v(x)`, with `σ = −1` on the ones of `u₀` and `+1` elsewhere.
    pub margin: f64,
    /// `‖η‖` over the mask.
    pub norm: f64,
    pub lp_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certification {
    Certified(Certificate),
    /// The best achievable margin was not above [`STRICT_TOL`].
    NotCertifiable { optimum: f64, lp_iterations: usize },
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified(_))
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Certification::Certified(c) => Some(c),
            Certification::NotCertifiable { .. } => None,
        }
    }

    /// Optimal LP margin (or the constructed margin).
    pub fn optimum(&self) -> f64 {
        match self {
            Certification::Certified(c) => c.margin,
            Certification::NotCertifiable { optimum, .. } => *optimum,
        }
    }

    pub fn lp_iterations(&self) -> usize {
        match self {
            Certification::Certified(c) => c.lp_iterations,
            Certification::NotCertifiable { lp_iterations, .. } => *lp_iterations,
        }
    }
}

/// Nonzero `v` with `A v = 0`, `Σ|v| = 1`, `v ≤ 0` on the ones of `u₀` and
/// `v ≥ 0` on its zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWitness {
    pub v: RealSignal,
    pub lp_iterations: usize,
}

/// Trigonometric polynomial `Σ_{|m|≤n} a_m e^{2πimt}` on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    degree: usize,
    /// `a_m` at `m + degree`.
    coeffs: Vec<Complex64>,
}

impl TrigPolynomial {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, m: i64) -> Complex64 {
        let n = self.degree as i64;
        if m.abs() > n {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(m + n) as usize]
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let n = self.degree as i64;
        let frac = t - crate::math::floor(t);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| a * cis_turns((j as i64 - n) as f64 * frac))
            .sum()
    }

    /// Folds the coefficients onto the frequencies of an `N`-point grid.
    pub fn alias(&self, n: usize) -> Vec<(i64, Complex64)> {
        let mut out: Vec<(i64, Complex64)> = Vec::new();
        let half = (n / 2) as i64;
        for (j, &a) in self.coeffs.iter().enumerate() {
            let m = j as i64 - self.degree as i64;
            let k = (m + half).rem_euclid(n as i64) - half;
            match out.iter_mut().find(|e| e.0 == k) {
                Some(e) => e.1 += a,
                None => out.push((k, a)),
            }
        }
        out.sort_by_key(|e| e.0);
        out
    }
}

/// The real degree-`n` trigonometric polynomial vanishing exactly at the `2n`
/// given points of `[0, 1)`: `C z^{−n} ∏(z − e^{2πiα_k})` with
/// `C = ∏ e^{−πiα_k}`. It changes sign at every point.
pub fn trig_interpolant(points: &[f64]) -> Result<TrigPolynomial> {
    if points.len() % 2 == 1 {
        return Err(invalid("trig_interpolant needs an even number of points"));
    }
    if points.iter().any(|p| !(0.0..1.0).contains(p)) {
        return Err(invalid("interpolation points must lie in [0, 1)"));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("interpolation points must be distinct"));
    }
    let degree = sorted.len() / 2;
    // poly[j] multiplies z^j.
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    let mut c = Complex64::new(1.0, 0.0);
    for &alpha in &sorted {
        let root = cis_turns(alpha);
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (j, &p) in poly.iter().enumerate() {
            next[j + 1] += p;
            next[j] -= p * root;
        }
        poly = next;
        c *= cis_turns(-alpha / 2.0);
    }
    let coeffs = poly.into_iter().map(|p| p * c).collect();
    Ok(TrigPolynomial { degree, coeffs })
}

/// `σ(x) = −1` where `u₀ = 1`, else `+1`.
pub fn sign_pattern(u0: &BinarySignal) -> Vec<f64> {
    u0.bits().map(|b| if b { -1.0 } else { 1.0 }).collect()
}

/// Real basis of the mask's row space: `N^h × r`, row-major, with one
/// `(index, self-conjugate)` entry per orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct RealBasis {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealBasis {
    /// From an explicit row-major `rows × cols` matrix (rows are grid points).
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(invalid("basis data does not match its shape"));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(invalid("basis entries must be finite"));
        }
        Ok(RealBasis { rows, cols, data })
    }

    /// The isometric Fourier parametrization of `η` on `mask`.
    pub fn fourier(mask: &FrequencyMask) -> Self {
        let g = mask.geometry();
        let reps = mask.representatives();
        let cols: usize = reps.iter().map(|&(_, s)| if s { 1 } else { 2 }).sum();
        let n = g.n() as i64;
        let mut data = vec![0.0; g.len() * cols];
        for x in 0..g.len() {
            let pos = g.position(x);
            let mut c = 0;
            for &(idx, self_conj) in &reps {
                let k = g.index_freq(idx);
                let phase = (k[0] * pos[0] as i64 + k[1] * pos[1] as i64).rem_euclid(n);
                let z = cis_turns(phase as f64 / n as f64);
                if self_conj {
                    data[x * cols + c] = z.re;
                    c += 1;
                } else {
                    data[x * cols + c] = SQRT_2 * z.re;
                    data[x * cols + c + 1] = -SQRT_2 * z.im;
                    c += 2;
                }
            }
        }
        RealBasis { rows: g.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.data[x * self.cols..(x + 1) * self.cols]
    }

    /// `B η`.
    pub fn apply(&self, eta: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|x| self.row(x).iter().zip(eta).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Maps real parameters back to a Hermitian coefficient set on the mask.
fn params_to_eta(mask: &FrequencyMask, params: &[f64]) -> Result<MeasurementSet> {
    let g = mask.geometry();
    let mut values = vec![Complex64::new(0.0, 0.0); mask.len()];
    let pos = |idx: usize| mask.indices().binary_search(&idx).expect("closed mask");
    let mut c = 0;
    for (idx, self_conj) in mask.representatives() {
        if self_conj {
            values[pos(idx)] = Complex64::new(params[c], 0.0);
            c += 1;
        } else {
            let z = Complex64::new(params[c], params[c + 1]) / SQRT_2;
            values[pos(idx)] = z;
            values[pos(g.conj_index(idx))] = z.conj();
            c += 2;
        }
    }
    MeasurementSet::new(mask.clone(), values)
}

/// Outcome of the sign-margin LP on an explicit basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginSolution {
    /// Optimal `t` in `max t s.t. σ(x)(Bη)(x) ≥ t, |η|∞ ≤ 1`; never negative
    /// since `η = 0` is feasible.
    pub optimum: f64,
    pub params: Vec<f64>,
    pub iterations: usize,
}

/// `max t` subject to `σ(x)(Bη)(x) ≥ t` for rows with `σ ≠ 0`, `(Bη)(x) = 0`
/// for rows with `σ = 0`, and `|η_j| ≤ 1`. The split `η = η⁺ − η⁻` keeps the
/// origin feasible so only problems with equality rows need a phase one.
///
/// Large instances are highly degenerate at the origin. They are first solved
/// with the zero right-hand sides lifted by tiny pseudo-random amounts; when
/// the resulting `η` has a verified strict margin it is returned, otherwise
/// the exact program decides.
pub fn max_sign_margin(basis: &RealBasis, sigma: &[f64]) -> Result<MarginSolution> {
    if sigma.len() != basis.rows {
        return Err(invalid("sign pattern length does not match the basis"));
    }
    if basis.rows > PERTURB_ROWS {
        let trial = margin_lp(basis, sigma, PERTURBATION)?;
        let v = basis.apply(&trial.params);
        let exact = v.iter().zip(sigma).filter(|(_, &s)| s != 0.0).map(|(a, s)| a * s).fold(f64::INFINITY, f64::min);
        let zero_ok = v.iter().zip(sigma).filter(|(_, &s)| s == 0.0).all(|(a, _)| a.abs() <= STRICT_TOL);
        if exact > STRICT_TOL && zero_ok {
            return Ok(MarginSolution { optimum: exact, ..trial });
        }
        let mut exact_sol = margin_lp(basis, sigma, 0.0)?;
        exact_sol.iterations += trial.iterations;
        return Ok(exact_sol);
    }
    margin_lp(basis, sigma, 0.0)
}

/// Grids above this size get the perturbed first attempt.
const PERTURB_ROWS: usize = 128;
const PERTURBATION: f64 = 1e-7;

fn margin_lp(basis: &RealBasis, sigma: &[f64], perturbation: f64) -> Result<MarginSolution> {
    let r = basis.cols;
    let mut jitter = crate::rng::seeded(0x5eed);
    let mut lp = LinearProgram::maximize({
        let mut c = vec![0.0; 2 * r + 1];
        c[2 * r] = 1.0;
        c
    });
    for j in 0..2 * r {
        lp.set_bound(j, Bound::Range(0.0, 1.0));
    }
    for (x, &s) in sigma.iter().enumerate() {
        let row = basis.row(x);
        let mut coeffs = vec![0.0; 2 * r + 1];
        if s == 0.0 {
            for j in 0..r {
                coeffs[j] = row[j];
                coeffs[r + j] = -row[j];
            }
            lp.add(coeffs, Relation::Eq, 0.0);
        } else {
            for j in 0..r {
                coeffs[j] = -s * row[j];
                coeffs[r + j] = s * row[j];
            }
            coeffs[2 * r] = 1.0;
            let lift = if perturbation > 0.0 { perturbation * (0.5 + rand::Rng::gen::<f64>(&mut jitter)) } else { 0.0 };
            lp.add(coeffs, Relation::Le, lift);
        }
    }
    let sol = lp.solve()?;
    match sol.outcome {
        LpOutcome::Optimal { x, objective } => Ok(MarginSolution {
            optimum: objective,
            params: (0..r).map(|j| x[j] - x[r + j]).collect(),
            iterations: sol.iterations,
        }),
        LpOutcome::Unbounded => Err(invalid("margin LP has no strict rows")),
        LpOutcome::Infeasible => unreachable!("η = 0, t = 0 is feasible"),
    }
}

fn certificate_from_params(mask: &FrequencyMask, sigma: &[f64], params: &[f64], iterations: usize) -> Result<Certificate> {
    let eta = params_to_eta(mask, params)?;
    let v = adjoint_measure(&eta)?;
    let margin = signed_margin(&v, sigma);
    let norm = l2(params);
    Ok(Certificate { eta, v, margin, norm, lp_iterations: iterations })
}

fn signed_margin(v: &RealSignal, sigma: &[f64]) -> f64 {
    v.values()
        .iter()
        .zip(sigma)
        .filter(|(_, &s)| s != 0.0)
        .map(|(a, s)| a * s)
        .fold(f64::INFINITY, f64::min)
}

/// Decides whether `u₀` is the only solution in `[0,1]^{N^h}` of `A u = A u₀`
/// with `A = S F`, by maximising the sign margin of `v = Aᵀη`.
pub fn certify_unique(u0: &BinarySignal, mask: &FrequencyMask) -> Result<Certification> {
    u0.geometry().check_same(&mask.geometry())?;
    let basis = RealBasis::fourier(mask);
    let sigma = sign_pattern(u0);
    if basis.cols == 0 {
        return Ok(Certification::NotCertifiable { optimum: 0.0, lp_iterations: 0 });
    }
    let sol = max_sign_margin(&basis, &sigma)?;
    if sol.optimum > STRICT_TOL {
        Ok(Certification::Certified(certificate_from_params(mask, &sigma, &sol.params, sol.iterations)?))
    } else {
        Ok(Certification::NotCertifiable { optimum: sol.optimum, lp_iterations: sol.iterations })
    }
}

/// The same decision for an explicit real matrix: `basis` holds `Aᵀ`
/// (one row per grid point) and `sigma` the signs `±1` of the wanted `v`.
pub fn certify_unique_with_basis(basis: &RealBasis, sigma: &[f64]) -> Result<(bool, MarginSolution)> {
    if sigma.iter().any(|&s| s != 1.0 && s != -1.0) {
        return Err(invalid("sign pattern entries must be ±1"));
    }
    if basis.cols == 0 {
        return Ok((false, MarginSolution { optimum: 0.0, params: Vec::new(), iterations: 0 }));
    }
    let sol = max_sign_margin(basis, sigma)?;
    Ok((sol.optimum > STRICT_TOL, sol))
}

/// Searches for a nonzero `v ∈ ker A` in the closed orthant of `u₀`:
/// `v = σ ⊙ w` with `w ≥ 0`, `Σ w = 1` and `Bᵀ v = 0`.
pub fn kernel_witness(u0: &BinarySignal, mask: &FrequencyMask) -> Result<Option<KernelWitness>> {
    let g = u0.geometry();
    g.check_same(&mask.geometry())?;
    let basis = RealBasis::fourier(mask);
    let sigma = sign_pattern(u0);
    let n = g.len();
    let mut lp = LinearProgram::maximize(vec![0.0; n]);
    for j in 0..basis.cols {
        let coeffs = (0..n).map(|x| basis.row(x)[j] * sigma[x]).collect();
        lp.add(coeffs, Relation::Eq, 0.0);
    }
    lp.add(vec![1.0; n], Relation::Eq, 1.0);
    let sol = lp.solve()?;
    let LpOutcome::Optimal { x, .. } = sol.outcome else {
        return Ok(None);
    };
    let values: Vec<f64> = x.iter().zip(&sigma).map(|(w, s)| w.max(0.0) * s).collect();
    let v = RealSignal::new(g, values)?;
    let image = measure(&v, mask)?;
    if crate::math::sqrt(image.energy()) >= KERNEL_TOL * v.norm().max(f64::MIN_POSITIVE) || v.norm() == 0.0 {
        return Ok(None);
    }
    Ok(Some(KernelWitness { v, lp_iterations: sol.iterations }))
}

/// The explicit certificate for a 1D signal with `2d` runs: the degree-`d`
/// polynomial vanishing at the run boundaries `(s_i − 1/2)/N`, sampled on the
/// grid, normalized to `‖η‖ = 1` and signed so the margin is positive. A
/// constant signal gets the DC certificate `v ≡ ∓1`.
pub fn lowfreq_certificate(u0: &BinarySignal) -> Result<Certificate> {
    let g = u0.geometry();
    if g.h() != 1 {
        return Err(Error::WrongDimension { expected: 1, found: g.h() });
    }
    let n = g.n();
    let sigma = sign_pattern(u0);
    let dec = interval_decomposition(u0)?;
    if dec.d == 0 {
        let mask = FrequencyMask::lowpass(g, 0);
        return certificate_from_params(&mask, &sigma, &[sigma[0]], 0);
    }
    let points: Vec<f64> = dec.starts().iter().map(|&s| (s as f64 - 0.5) / n as f64).collect();
    let poly = trig_interpolant(&points)?;
    let mask = FrequencyMask::lowpass(g, dec.d);
    let terms = poly.alias(n);
    let mut values = vec![Complex64::new(0.0, 0.0); mask.len()];
    for (k, a) in terms {
        let idx = g.freq_index(&[k])?;
        let p = mask.indices().binary_search(&idx).map_err(|_| invalid("alias outside the mask"))?;
        values[p] += a;
    }
    // Exact Hermitian symmetry after rounding.
    let sym: Vec<Complex64> = mask
        .indices()
        .iter()
        .enumerate()
        .map(|(p, &idx)| {
            let q = mask.indices().binary_search(&g.conj_index(idx)).expect("closed mask");
            (values[p] + values[q].conj()) / 2.0
        })
        .collect();
    let norm = crate::math::sqrt(sym.iter().map(|z| z.norm_sqr()).sum::<f64>());
    let mut eta = MeasurementSet::new(mask, sym)?.scale(1.0 / norm);
    let mut v = adjoint_measure(&eta)?;
    if signed_margin(&v, &sigma) < 0.0 {
        eta = eta.scale(-1.0);
        v = v.map(|x| -x);
    }
    let margin = signed_margin(&v, &sigma);
    Ok(Certificate { eta, v, margin, norm: 1.0, lp_iterations: 0 })
}

/// Uniqueness among nonnegative solutions for a signal supported on
/// `support` (0-based linear indices): `max t` with `v = 0` on the support
/// and `v ≥ t` off it. With full support this reduces to injectivity.
pub fn certify_nonneg(support: &[usize], mask: &FrequencyMask) -> Result<Certification> {
    let g = mask.geometry();
    if support.iter().any(|&i| i >= g.len()) {
        return Err(invalid("support index outside the grid"));
    }
    let mut sigma = vec![1.0; g.len()];
    for &i in support {
        sigma[i] = 0.0;
    }
    if sigma.iter().all(|&s| s == 0.0) {
        // No strict rows: unique iff A is injective.
        let full = mask.len() == g.len();
        return Ok(if full {
            let params = vec![0.0; RealBasis::fourier(mask).cols];
            let c = certificate_from_params(mask, &sigma, &params, 0)?;
            Certification::Certified(Certificate { margin: f64::INFINITY, ..c })
        } else {
            Certification::NotCertifiable { optimum: 0.0, lp_iterations: 0 }
        });
    }
    let basis = RealBasis::fourier(mask);
    if basis.cols == 0 {
        return Ok(Certification::NotCertifiable { optimum: 0.0, lp_iterations: 0 });
    }
    let sol = max_sign_margin(&basis, &sigma)?;
    if sol.optimum > STRICT_TOL {
        Ok(Certification::Certified(certificate_from_params(mask, &sigma, &sol.params, sol.iterations)?))
    } else {
        Ok(Certification::NotCertifiable { optimum: sol.optimum, lp_iterations: sol.iterations })
    }
}

/// The nonnegative degree-`d` certificate `∏_j (1 − cos 2π(t − z_j))` for
/// spikes at the 1-based positions `spikes`, on `low:d` with `d = |spikes|`.
pub fn spike_certificate(n: usize, spikes: &[usize]) -> Result<Certificate> {
    let g = GridGeometry::line(n)?;
    if spikes.iter().any(|&s| s == 0 || s > n) {
        return Err(invalid("spike positions are 1-based and at most N"));
    }
    // (1 − cos 2π(t − z)) = −½ e^{−2πiz} e^{2πit} + 1 − ½ e^{2πiz} e^{−2πit}
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for &s in spikes {
        let w = cis_turns(-(s as f64) / n as f64);
        let factor = [-w.conj() * 0.5, Complex64::new(1.0, 0.0), -w * 0.5];
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 2];
        for (j, &p) in poly.iter().enumerate() {
            for (f, &c) in factor.iter().enumerate() {
                next[j + f] += p * c;
            }
        }
        poly = next;
    }
    let d = spikes.len();
    let trig = TrigPolynomial { degree: d, coeffs: poly };
    let mask = FrequencyMask::lowpass(g, d);
    let mut values = vec![Complex64::new(0.0, 0.0); mask.len()];
    for (k, a) in trig.alias(n) {
        let p = mask.indices().binary_search(&g.freq_index(&[k])?).map_err(|_| invalid("alias outside the mask"))?;
        values[p] += a;
    }
    let sym: Vec<Complex64> = mask
        .indices()
        .iter()
        .enumerate()
        .map(|(p, &idx)| {
            let q = mask.indices().binary_search(&g.conj_index(idx)).expect("closed mask");
            (values[p] + values[q].conj()) / 2.0
        })
        .collect();
    let eta = MeasurementSet::new(mask, sym)?;
    let v = adjoint_measure(&eta)?;
    let mut sigma = vec![1.0; n];
    for &s in spikes {
        sigma[s - 1] = 0.0;
    }
    let margin = signed_margin(&v, &sigma);
    let norm = crate::math::sqrt(eta.energy());
    Ok(Certificate { eta, v, margin, norm, lp_iterations: 0 })
}

/// `h = min_x |v(x)| / (2‖η‖)`: measurement noise below `h` cannot move the
/// thresholded least-squares solution off `u₀`.
pub fn robustness_margin(c: &Certificate) -> Result<f64> {
    if !(c.margin > 0.0) || !(c.norm > 0.0) {
        return Err(invalid("robustness margin needs a valid certificate"));
    }
    let smallest = c.v.values().iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    Ok(smallest / (2.0 * c.norm))
}
