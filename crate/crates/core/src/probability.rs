//! Recovery probabilities for uniformly random binary signals.
//!
//! `P_{r,N} = Σ_{i≤r} C(N,i) / 2^N` is the binomial(`N`, ½) distribution
//! function. A generic `r`-dimensional subspace of `ℝ^N` meets the interior of
//! `2 Σ_{i<r} C(N−1,i)` of the `2^N` orthants, so a uniform `u₀` is the unique
//! box solution of `Au = Au₀` with probability `P_{r−1,N−1}` when the rows of
//! `A` are in general position.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::certificate::{certify_unique_with_basis, max_sign_margin, RealBasis, STRICT_TOL};
use crate::error::{invalid, Error, Result};
use crate::fourier::FrequencyMask;
use crate::math::{exp, ln_binomial, normal_cdf, sqrt};
use crate::rng::{derive_seed, seeded, Gaussian};
use crate::signal::GridGeometry;

/// `numerator / 2^exponent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub numerator: BigUint,
    pub exponent: u32,
}

impl Dyadic {
    pub fn to_f64(&self) -> f64 {
        // Shift both parts down so the conversion stays in range for large N.
        let bits = self.numerator.bits() as i64;
        let shift = (bits - 60).max(0) as u32;
        let top = (&self.numerator >> shift).to_f64().expect("fits in f64");
        top * libm::exp2(shift as f64 - self.exponent as f64)
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// Exact `P_{r,N}`.
pub fn p_rn_exact(r: u64, n: u64) -> Result<Dyadic> {
    if r > n {
        return Err(invalid(alloc::format!("P_{{r,N}} needs 0 ≤ r ≤ N, got r={r}, N={n}")));
    }
    let mut sum = BigUint::zero();
    let mut c = BigUint::one();
    for i in 0..=r {
        sum += &c;
        c = c * (n - i) / (i + 1);
    }
    Ok(Dyadic { numerator: sum, exponent: n as u32 })
}

pub fn p_rn(r: u64, n: u64) -> Result<f64> {
    Ok(p_rn_exact(r, n)?.to_f64())
}

/// Normal approximation `Φ((2r − N)/√N)`, without continuity correction.
pub fn p_rn_gauss(r: f64, n: u64) -> f64 {
    normal_cdf((2.0 * r - n as f64) / sqrt(n as f64))
}

/// `(lower, upper)` bounds on `P_{r,N}` from the tail `½·exp(−(2r−N)²/(2N))`:
/// an upper bound for `r < N/2`, one minus it a lower bound for `r > N/2`,
/// and `(0, 1)` at `r = N/2`.
///
/// With the factor ½ the upper bound fails at a few small or central cases
/// (e.g. `P_{0,2} = 1/4 > ½e^{−1}`); [`hoeffding_tail_unhalved`] is the
/// always-valid form.
pub fn hoeffding_tail(r: u64, n: u64) -> (f64, f64) {
    tail_with_factor(r, n, 0.5)
}

/// The same bounds without the factor ½, as given by Hoeffding's inequality.
pub fn hoeffding_tail_unhalved(r: u64, n: u64) -> (f64, f64) {
    tail_with_factor(r, n, 1.0)
}

fn tail_with_factor(r: u64, n: u64, factor: f64) -> (f64, f64) {
    let gap = 2.0 * r as f64 - n as f64;
    if gap == 0.0 || n == 0 {
        return (0.0, 1.0);
    }
    let tail = (factor * exp(-gap * gap / (2.0 * n as f64))).min(1.0);
    if gap < 0.0 {
        (0.0, tail)
    } else {
        (1.0 - tail, 1.0)
    }
}

/// `2 Σ_{i<r} C(N−1, i)`, for `1 ≤ r ≤ N ≤ 127`.
pub fn orthant_count_formula(r: u64, n: u64) -> Result<u128> {
    if r < 1 || r > n || n > 127 {
        return Err(invalid(alloc::format!("orthant count needs 1 ≤ r ≤ N ≤ 127, got r={r}, N={n}")));
    }
    let total: BigUint = (0..r).map(|i| binomial(n - 1, i)).sum::<BigUint>() * 2u32;
    Ok(total.to_u128().expect("below 2^127"))
}

/// `|det|` of a square row-major matrix relative to the product of its row
/// norms (1 for orthogonal rows, 0 when singular).
fn relative_det(mut m: Vec<f64>, k: usize) -> f64 {
    let mut scale = 1.0;
    for i in 0..k {
        let norm = sqrt(m[i * k..(i + 1) * k].iter().map(|x| x * x).sum());
        if norm == 0.0 {
            return 0.0;
        }
        scale *= norm;
    }
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k).max_by(|&a, &b| m[a * k + col].abs().partial_cmp(&m[b * k + col].abs()).expect("finite"));
        let p = pivot.expect("nonempty range");
        if m[p * k + col] == 0.0 {
            return 0.0;
        }
        if p != col {
            for j in 0..k {
                m.swap(p * k + j, col * k + j);
            }
        }
        let d = m[col * k + col];
        det *= d;
        for row in col + 1..k {
            let f = m[row * k + col] / d;
            for j in col..k {
                m[row * k + j] -= f * m[col * k + j];
            }
        }
    }
    det.abs() / scale
}

/// Tolerance on [`relative_det`] below which an `r × r` minor counts as singular.
pub const GENERAL_POSITION_TOL: f64 = 1e-9;

/// Whether every choice of `r = basis.cols()` rows of `basis` is linearly
/// independent, i.e. the spanned subspace projects onto any `r` coordinates.
pub fn in_general_position(basis: &RealBasis) -> bool {
    let (n, r) = (basis.rows(), basis.cols());
    if r > n {
        return false;
    }
    let mut pick: Vec<usize> = (0..r).collect();
    loop {
        let m: Vec<f64> = pick.iter().flat_map(|&i| basis.row(i).iter().copied()).collect();
        if relative_det(m, r) <= GENERAL_POSITION_TOL {
            return false;
        }
        // Next r-subset in lexicographic order.
        let mut i = r;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            if pick[i] < n - r + i {
                break;
            }
            if i == 0 {
                return true;
            }
        }
        pick[i] += 1;
        for j in i + 1..r {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrthantCount {
    pub count: u64,
    pub lp_solves: usize,
}

/// Number of open orthants of `ℝ^N` met by the column span of `basis`
/// (`N` rows, `r` columns), by depth-first search over sign prefixes with one
/// margin LP per prefix longer than `r`. Exhaustive over all `2^N` patterns.
pub fn orthant_count_oracle(basis: &RealBasis) -> Result<OrthantCount> {
    let (n, r) = (basis.rows(), basis.cols());
    if n == 0 || n > 12 || r == 0 {
        return Err(invalid("orthant oracle needs 1 ≤ r and N ≤ 12"));
    }
    if !in_general_position(basis) {
        return Err(invalid("basis is not in general position"));
    }
    let mut lp_solves = 0;
    let mut sigma = vec![1.0; n];
    // σ and −σ are met together; fix the first sign.
    let half = dfs(basis, &mut sigma, 1, &mut lp_solves)?;
    Ok(OrthantCount { count: 2 * half, lp_solves })
}

fn dfs(basis: &RealBasis, sigma: &mut Vec<f64>, depth: usize, lp_solves: &mut usize) -> Result<u64> {
    let (n, r) = (basis.rows(), basis.cols());
    if depth > r {
        // Any prefix of length ≤ r is reachable in general position.
        let rows: Vec<f64> = (0..depth).flat_map(|i| basis.row(i).iter().copied()).collect();
        let sub = RealBasis::from_rows(depth, r, rows)?;
        *lp_solves += 1;
        if max_sign_margin(&sub, &sigma[..depth])?.optimum <= STRICT_TOL {
            return Ok(0);
        }
    }
    if depth == n {
        return Ok(1);
    }
    let mut total = 0;
    for s in [1.0, -1.0] {
        sigma[depth] = s;
        total += dfs(basis, sigma, depth + 1, lp_solves)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// i.i.d. standard normal `r × N` matrix.
    Gaussian,
    /// Rows of the unitary DFT on a uniformly random conjugate-closed
    /// frequency set of real rank `r`.
    PartialFourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialOutcome {
    Unique,
    NotUnique,
    /// The LP engine failed (pivot limit); counted apart from both outcomes.
    LpFailure,
}

/// Always `[lo, hi]` with `0 ≤ lo ≤ hi ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryExperiment {
    pub n: usize,
    pub r: usize,
    pub trials: usize,
    pub seed: u64,
    pub kind: MatrixKind,
    pub outcomes: Vec<TrialOutcome>,
    pub successes: usize,
    pub lp_failures: usize,
    /// Successes over trials that did not fail.
    pub empirical: f64,
    /// `P_{r−1, N−1}`.
    pub predicted: f64,
    /// Central 99% range of the empirical rate under the prediction.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RecoveryExperiment {
    pub fn within_interval(&self) -> bool {
        self.ci_low <= self.empirical && self.empirical <= self.ci_high
    }
}

/// `(q_lo/n, q_hi/n)` where `q_lo` and `q_hi` are the `(1−level)/2` and
/// `(1+level)/2` quantiles of Binomial(`n`, `p`): the range an empirical rate
/// falls in with probability at least `level`.
pub fn binomial_interval(trials: usize, p: f64, level: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as u64;
    if p <= 0.0 {
        return (0.0, 0.0);
    }
    if p >= 1.0 {
        return (1.0, 1.0);
    }
    let (lp, lq) = (libm::log(p), libm::log1p(-p));
    let pmf: Vec<f64> = (0..=n).map(|k| exp(ln_binomial(n, k) + k as f64 * lp + (n - k) as f64 * lq)).collect();
    let alpha = (1.0 - level) / 2.0;
    let mut acc = 0.0;
    let mut lo = 0;
    for (k, &m) in pmf.iter().enumerate() {
        acc += m;
        if acc >= alpha {
            lo = k;
            break;
        }
    }
    let mut acc = 0.0;
    let mut hi = n as usize;
    for k in (0..=n as usize).rev() {
        acc += pmf[k];
        if acc >= alpha {
            hi = k;
            break;
        }
    }
    (lo as f64 / trials as f64, hi as f64 / trials as f64)
}

/// One trial: `u₀` uniform on `{0,1}^N`, then `A`, then the certificate LP on
/// the rows of `Aᵀ`.
pub fn recovery_trial(n: usize, r: usize, seed: u64, kind: MatrixKind) -> Result<TrialOutcome> {
    let mut rng = seeded(seed);
    let sigma: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    let basis = match kind {
        MatrixKind::Gaussian => {
            let mut gauss = Gaussian::new();
            let a: Vec<f64> = (0..r * n).map(|_| gauss.sample(&mut rng)).collect();
            // Row x of Aᵀ is column x of A.
            let data = (0..n).flat_map(|x| (0..r).map(move |i| (i, x))).map(|(i, x)| a[i * n + x]).collect();
            RealBasis::from_rows(n, r, data)?
        }
        MatrixKind::PartialFourier => {
            let mask = FrequencyMask::random(GridGeometry::line(n)?, r, rng.gen(), false)?;
            RealBasis::fourier(&mask)
        }
    };
    match certify_unique_with_basis(&basis, &sigma) {
        Ok((true, _)) => Ok(TrialOutcome::Unique),
        Ok((false, _)) => Ok(TrialOutcome::NotUnique),
        Err(Error::Lp(_)) => Ok(TrialOutcome::LpFailure),
        Err(e) => Err(e),
    }
}

/// Empirical rate of unique recovery over `trials` independent draws, trial
/// `i` seeded by `derive_seed(seed, i)`.
pub fn montecarlo_recovery(n: usize, r: usize, trials: usize, seed: u64, kind: MatrixKind) -> Result<RecoveryExperiment> {
    if r < 1 || r > n {
        return Err(invalid(alloc::format!("need 1 ≤ r ≤ N, got r={r}, N={n}")));
    }
    if trials == 0 {
        return Err(invalid("at least one trial is needed"));
    }
    if kind == MatrixKind::PartialFourier && !n.is_multiple_of(2) {
        return Err(Error::InvalidGeometry { h: 1, n });
    }
    let outcomes = (0..trials)
        .map(|i| recovery_trial(n, r, derive_seed(seed, i as u64), kind))
        .collect::<Result<Vec<_>>>()?;
    let successes = outcomes.iter().filter(|&&o| o == TrialOutcome::Unique).count();
    let lp_failures = outcomes.iter().filter(|&&o| o == TrialOutcome::LpFailure).count();
    let decided = trials - lp_failures;
    let predicted = p_rn(r as u64 - 1, n as u64 - 1)?;
    let (ci_low, ci_high) = binomial_interval(decided, predicted, 0.99);
    Ok(RecoveryExperiment {
        n,
        r,
        trials,
        seed,
        kind,
        outcomes,
        successes,
        lp_failures,
        empirical: if decided == 0 { 0.0 } else { successes as f64 / decided as f64 },
        predicted,
        ci_low,
        ci_high,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_values() {
        assert_eq!(p_rn(2, 4).unwrap(), 11.0 / 16.0);
        assert_eq!(p_rn(0, 10).unwrap(), 1.0 / 1024.0);
        assert_eq!(p_rn(7, 7).unwrap(), 1.0);
        assert_eq!(p_rn(128, 128).unwrap(), 1.0);
        assert_eq!(p_rn(0, 128).unwrap(), libm::exp2(-128.0));
        assert!((p_rn(11, 15).unwrap() - (1.0 - 576.0 / 32768.0)).abs() < 1e-15);
        assert!(p_rn(5, 4).is_err());
        let d = p_rn_exact(2, 4).unwrap();
        assert_eq!((d.numerator, d.exponent), (BigUint::from(11u32), 4));
    }

    #[test]
    fn gauss_approximation() {
        assert_eq!(p_rn_gauss(32.0, 64), 0.5);
        assert!(p_rn_gauss(100.0, 100) > 0.999_999);
        assert!((p_rn_gauss(40.0, 64) - p_rn(40, 64).unwrap()).abs() < 0.03);
    }

    #[test]
    fn tail_branches() {
        let (lo, hi) = hoeffding_tail(30, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.5 * (-8.0f64).exp()).abs() < 1e-18);
        assert!(p_rn(30, 100).unwrap() <= hi);
        let (lo, hi) = hoeffding_tail(70, 100);
        assert_eq!(hi, 1.0);
        assert!((lo - (1.0 - 0.5 * (-8.0f64).exp())).abs() < 1e-15);
        assert_eq!(hoeffding_tail(50, 100), (0.0, 1.0));
        assert_eq!(hoeffding_tail_unhalved(0, 2).1, (-1.0f64).exp());
    }

    #[test]
    fn orthant_formula() {
        assert_eq!(orthant_count_formula(1, 2).unwrap(), 2);
        assert_eq!(orthant_count_formula(2, 3).unwrap(), 6);
        for n in 1..=20 {
            assert_eq!(orthant_count_formula(n, n).unwrap(), 1u128 << n);
        }
        assert!(orthant_count_formula(0, 3).is_err());
    }

    #[test]
    fn general_position_check() {
        let line = RealBasis::from_rows(2, 1, vec![1.0, 1.0]).unwrap();
        assert!(in_general_position(&line));
        let axis = RealBasis::from_rows(2, 1, vec![1.0, 0.0]).unwrap();
        assert!(!in_general_position(&axis));
        assert!(orthant_count_oracle(&axis).is_err());
        assert_eq!(orthant_count_oracle(&line).unwrap().count, 2);
        let plane = RealBasis::from_rows(3, 2, vec![1.0, 0.3, -0.4, 1.0, 0.7, 0.9]).unwrap();
        assert_eq!(orthant_count_oracle(&plane).unwrap().count, 6);
    }

    #[test]
    fn interval_shape() {
        let (lo, hi) = binomial_interval(2000, 0.5, 0.99);
        assert!(lo < 0.5 && hi > 0.5 && hi - lo < 0.06);
        assert_eq!(binomial_interval(10, 1.0, 0.99), (1.0, 1.0));
    }

    #[test]
    fn full_rank_always_recovers() {
        for kind in [MatrixKind::Gaussian, MatrixKind::PartialFourier] {
            let e = montecarlo_recovery(8, 8, 20, 3, kind).unwrap();
            assert_eq!(e.successes, 20);
            assert_eq!(e.empirical, 1.0);
        }
    }
}
