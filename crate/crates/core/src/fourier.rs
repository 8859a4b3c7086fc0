//! Discrete Fourier conventions and the partial-Fourier measurement operator.
//!
//! Forward transform over `x ∈ {1,…,N}^h`:
//! `a_k = Σ_x u(x) e^{-2πi⟨k, x/N⟩}`, inverse
//! `u(x) = N^{-h} Σ_k a_k e^{2πi⟨k, x/N⟩}`, hence `Fᵀ = N^h F⁻¹` under the real
//! inner product `⟨a, b⟩ = Re Σ a_k conj(b_k)`.
//!
//! The measurement operator is `A = S·F` for a conjugate-closed mask `S`.
//! Filtered data uses `Â = K·F` for a Hermitian gain `K`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::fft::GridFft;
use crate::math::{ceil, exp, ln_binomial, norm};
use crate::rng::seeded;
use crate::signal::{GridGeometry, RealSignal};

/// Relative tolerance on `|a_{-k} - conj(a_k)|` before a spectrum counts as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Complex coefficients on the full frequency grid, natural FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    geometry: GridGeometry,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(geometry: GridGeometry, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != geometry.len() {
            return Err(invalid("coefficient count does not match geometry"));
        }
        Ok(Spectrum { geometry, coeffs })
    }

    /// Spectrum from `(k, a_k)` pairs in symmetric indexing, zero elsewhere.
    pub fn from_entries(geometry: GridGeometry, entries: &[([i64; 2], Complex64)]) -> Result<Self> {
        let mut coeffs = vec![ZERO; geometry.len()];
        for (k, a) in entries {
            coeffs[geometry.freq_index(&k[..geometry.h()])?] += *a;
        }
        Ok(Spectrum { geometry, coeffs })
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    /// Natural FFT order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn get(&self, k: &[i64]) -> Result<Complex64> {
        Ok(self.coeffs[self.geometry.freq_index(k)?])
    }

    /// Coefficients listed over `[-N/2, N/2-1]^h` in lexicographic order.
    pub fn symmetric_entries(&self) -> Vec<([i64; 2], Complex64)> {
        let g = self.geometry;
        let n = g.n() as i64;
        let mut out = Vec::with_capacity(g.len());
        match g.h() {
            1 => {
                for k in -n / 2..n / 2 {
                    out.push(([k, 0], self.coeffs[g.freq_slot(k)]));
                }
            }
            _ => {
                for k0 in -n / 2..n / 2 {
                    for k1 in -n / 2..n / 2 {
                        out.push(([k0, k1], self.coeffs[g.freq_slot(k0) * g.n() + g.freq_slot(k1)]));
                    }
                }
            }
        }
        out
    }

    /// `max_k |a_{-k} - conj(a_k)|`, relative to `max(1, max_k |a_k|)`.
    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(self.geometry, &self.coeffs, None)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= HERMITIAN_TOL
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn hermitian_deviation(g: GridGeometry, coeffs: &[Complex64], support: Option<&[usize]>) -> f64 {
    let scale = coeffs.iter().map(|&z| norm(z)).fold(1.0, f64::max);
    let check = |idx: usize| norm(coeffs[g.conj_index(idx)] - coeffs[idx].conj());
    let worst = match support {
        Some(s) => s.iter().map(|&i| check(i)).fold(0.0, f64::max),
        None => (0..coeffs.len()).map(check).fold(0.0, f64::max),
    };
    worst / scale
}

/// Copies user-order values into an FFT buffer, placing `x` at slot `x mod N`.
pub(crate) fn load_spatial(g: GridGeometry, values: &[f64], buf: &mut [Complex64]) {
    let n = g.n();
    match g.h() {
        1 => {
            for (i, &v) in values.iter().enumerate() {
                buf[(i + 1) % n] = Complex64::new(v, 0.0);
            }
        }
        _ => {
            for r in 0..n {
                let rr = (r + 1) % n;
                for c in 0..n {
                    buf[rr * n + (c + 1) % n] = Complex64::new(values[r * n + c], 0.0);
                }
            }
        }
    }
}

/// Inverse of [`load_spatial`], keeping real parts.
pub(crate) fn store_spatial(g: GridGeometry, buf: &[Complex64], values: &mut [f64], scale: f64) {
    let n = g.n();
    match g.h() {
        1 => {
            for (i, v) in values.iter_mut().enumerate() {
                *v = buf[(i + 1) % n].re * scale;
            }
        }
        _ => {
            for r in 0..n {
                let rr = (r + 1) % n;
                for c in 0..n {
                    values[r * n + c] = buf[rr * n + (c + 1) % n].re * scale;
                }
            }
        }
    }
}

/// Reusable transform for one geometry, used by the solver's inner loop.
#[derive(Debug, Clone)]
pub struct Transform {
    geometry: GridGeometry,
    fft: GridFft,
}

impl Transform {
    pub fn new(geometry: GridGeometry) -> Self {
        Transform { geometry, fft: GridFft::new(geometry.h(), geometry.n()) }
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    /// `F u` into `out` (natural order).
    pub fn forward_into(&self, values: &[f64], out: &mut [Complex64]) {
        load_spatial(self.geometry, values, out);
        self.fft.forward_real(out);
    }

    /// `F⁻¹ a` into `out`; destroys `buf`. Imaginary parts are dropped.
    pub fn inverse_into(&self, buf: &mut [Complex64], out: &mut [f64]) {
        self.fft.backward_real(buf);
        store_spatial(self.geometry, buf, out, 1.0 / self.geometry.len() as f64);
    }

    pub fn forward(&self, u: &RealSignal) -> Spectrum {
        let mut coeffs = vec![ZERO; self.geometry.len()];
        self.forward_into(u.values(), &mut coeffs);
        Spectrum { geometry: self.geometry, coeffs }
    }

    pub fn inverse_unchecked(&self, coeffs: &[Complex64]) -> RealSignal {
        let mut buf = coeffs.to_vec();
        let mut out = vec![0.0; self.geometry.len()];
        self.inverse_into(&mut buf, &mut out);
        RealSignal::from_raw(self.geometry, out)
    }
}

/// `a_k = Σ_x u(x) e^{-2πi⟨k, x/N⟩}`.
pub fn dft_forward(u: &RealSignal) -> Spectrum {
    Transform::new(u.geometry()).forward(u)
}

/// `u(x) = N^{-h} Σ_k a_k e^{2πi⟨k, x/N⟩}`; rejects non-Hermitian input.
pub fn dft_inverse(a: &Spectrum) -> Result<RealSignal> {
    let deviation = a.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(Transform::new(a.geometry).inverse_unchecked(&a.coeffs))
}

/// How a mask was specified.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskKind {
    /// `|k_i| ≤ d` on every axis.
    LowPass(usize),
    /// `‖k‖₂ ≤ d`.
    Disk(f64),
    /// Symmetrized closure of an explicit list.
    Explicit,
    /// Uniformly random conjugate-closed set of real rank `r`.
    Random { r: usize, seed: u64, include_dc: bool },
    Full,
}

/// Conjugate-closed set of observed frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMask {
    geometry: GridGeometry,
    /// Sorted natural linear indices.
    indices: Vec<usize>,
    kind: MaskKind,
    clipped: bool,
}

impl FrequencyMask {
    fn from_set(geometry: GridGeometry, set: BTreeSet<usize>, kind: MaskKind, clipped: bool) -> Self {
        FrequencyMask { geometry, indices: set.into_iter().collect(), kind, clipped }
    }

    pub fn lowpass(geometry: GridGeometry, d: usize) -> Self {
        let n = geometry.n();
        if 2 * d >= n {
            let mut m = Self::full(geometry);
            m.kind = MaskKind::LowPass(d);
            m.clipped = true;
            return m;
        }
        let set = (0..geometry.len())
            .filter(|&i| {
                let [a, b] = geometry.index_freq(i);
                a.unsigned_abs() as usize <= d && b.unsigned_abs() as usize <= d
            })
            .collect();
        Self::from_set(geometry, set, MaskKind::LowPass(d), false)
    }

    pub fn disk(geometry: GridGeometry, d: f64) -> Result<Self> {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(invalid("disk radius must be a finite nonnegative number"));
        }
        let set = (0..geometry.len()).filter(|&i| geometry.freq_norm(i) <= d).collect();
        let clipped = d >= (geometry.n() / 2) as f64;
        Ok(Self::from_set(geometry, set, MaskKind::Disk(d), clipped))
    }

    pub fn full(geometry: GridGeometry) -> Self {
        FrequencyMask { geometry, indices: (0..geometry.len()).collect(), kind: MaskKind::Full, clipped: false }
    }

    pub fn empty(geometry: GridGeometry) -> Self {
        FrequencyMask { geometry, indices: Vec::new(), kind: MaskKind::Explicit, clipped: false }
    }

    /// Symmetrized closure of the listed frequencies (symmetric indexing).
    pub fn explicit(geometry: GridGeometry, ks: &[[i64; 2]]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for k in ks {
            let idx = geometry.freq_index(&k[..geometry.h()])?;
            set.insert(idx);
            set.insert(geometry.conj_index(idx));
        }
        Ok(Self::from_set(geometry, set, MaskKind::Explicit, false))
    }

    /// Uniformly random conjugate-closed mask with real rank exactly `r`.
    pub fn random(geometry: GridGeometry, r: usize, seed: u64, include_dc: bool) -> Result<Self> {
        let total = geometry.len();
        if r > total {
            return Err(invalid(alloc::format!("rank {r} exceeds N^h = {total}")));
        }
        if r == 0 && include_dc {
            return Err(invalid("rank 0 cannot include the DC coefficient"));
        }
        let mut singles = Vec::new();
        let mut pairs = Vec::new();
        for i in 0..total {
            let c = geometry.conj_index(i);
            if c == i {
                if !(include_dc && i == 0) {
                    singles.push(i);
                }
            } else if i < c {
                pairs.push(i);
            }
        }
        let need = r - usize::from(include_dc);
        // Pick how many self-conjugate singletons to use with weight C(s)·C(p) so
        // the final set is uniform over all admissible sets.
        let choices: Vec<(usize, usize, f64)> = (0..=singles.len().min(need))
            .filter(|s| (need - s).is_multiple_of(2) && (need - s) / 2 <= pairs.len())
            .map(|s| {
                let p = (need - s) / 2;
                (s, p, ln_binomial(singles.len() as u64, s as u64) + ln_binomial(pairs.len() as u64, p as u64))
            })
            .collect();
        if choices.is_empty() {
            return Err(invalid(alloc::format!("no conjugate-closed set has real rank {r}")));
        }
        let mut rng = seeded(seed);
        let top = choices.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = choices.iter().map(|c| exp(c.2 - top)).collect();
        let mut pick = rng.gen::<f64>() * weights.iter().sum::<f64>();
        let mut chosen = choices[choices.len() - 1];
        for (c, w) in choices.iter().zip(&weights) {
            if pick < *w {
                chosen = *c;
                break;
            }
            pick -= w;
        }
        let mut set = BTreeSet::new();
        if include_dc {
            set.insert(0);
        }
        singles.shuffle(&mut rng);
        pairs.shuffle(&mut rng);
        set.extend(singles.iter().take(chosen.0).copied());
        for &p in pairs.iter().take(chosen.1) {
            set.insert(p);
            set.insert(geometry.conj_index(p));
        }
        Ok(Self::from_set(geometry, set, MaskKind::Random { r, seed, include_dc }, false))
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn kind(&self) -> &MaskKind {
        &self.kind
    }

    /// True when the requested band exceeded the grid and was cut to it.
    pub fn clipped(&self) -> bool {
        self.clipped
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.indices.binary_search(&idx).is_ok()
    }

    pub fn contains_freq(&self, k: &[i64]) -> bool {
        self.geometry.freq_index(k).map(|i| self.contains(i)).unwrap_or(false)
    }

    /// Symmetric frequencies in the mask.
    pub fn frequencies(&self) -> Vec<[i64; 2]> {
        self.indices.iter().map(|&i| self.geometry.index_freq(i)).collect()
    }

    /// Real dimension of the observed data: one per self-conjugate index, two
    /// per `±k` pair. Equals the number of complex indices.
    pub fn real_rank(&self) -> usize {
        self.indices.len()
    }

    pub fn is_conjugate_closed(&self) -> bool {
        self.indices.iter().all(|&i| self.contains(self.geometry.conj_index(i)))
    }

    /// One representative per conjugate orbit: `(index, self_conjugate)`.
    pub fn representatives(&self) -> Vec<(usize, bool)> {
        self.indices
            .iter()
            .filter_map(|&i| {
                let c = self.geometry.conj_index(i);
                match i.cmp(&c) {
                    core::cmp::Ordering::Equal => Some((i, true)),
                    core::cmp::Ordering::Less => Some((i, false)),
                    core::cmp::Ordering::Greater => None,
                }
            })
            .collect()
    }

    /// 0/1 selector over the full natural-order grid.
    pub fn selector(&self) -> Vec<bool> {
        let mut sel = vec![false; self.geometry.len()];
        for &i in &self.indices {
            sel[i] = true;
        }
        sel
    }

    /// Frequencies absent from the mask.
    pub fn complement(&self) -> FrequencyMask {
        let sel = self.selector();
        let indices = (0..self.geometry.len()).filter(|&i| !sel[i]).collect();
        FrequencyMask { geometry: self.geometry, indices, kind: MaskKind::Explicit, clipped: false }
    }
}

/// Observed coefficients `b_k = (F u)_k`, `k ∈ S`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    mask: FrequencyMask,
    /// Aligned with `mask.indices()`.
    values: Vec<Complex64>,
}

impl MeasurementSet {
    pub fn new(mask: FrequencyMask, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != mask.len() {
            return Err(invalid("measurement count does not match mask"));
        }
        let set = MeasurementSet { mask, values };
        let deviation = set.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(set)
    }

    pub fn mask(&self) -> &FrequencyMask {
        &self.mask
    }

    pub fn geometry(&self) -> GridGeometry {
        self.mask.geometry
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, k: &[i64]) -> Option<Complex64> {
        let idx = self.mask.geometry.freq_index(k).ok()?;
        self.mask.indices.binary_search(&idx).ok().map(|p| self.values[p])
    }

    /// Zero-padded full spectrum.
    pub fn to_full(&self) -> Vec<Complex64> {
        let mut full = vec![ZERO; self.mask.geometry.len()];
        for (&i, &v) in self.mask.indices.iter().zip(&self.values) {
            full[i] = v;
        }
        full
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(self.mask.geometry, &self.to_full(), Some(&self.mask.indices))
    }

    /// `‖b‖²`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Real inner product `Re Σ_{k∈S} b_k conj(c_k)`.
    pub fn dot(&self, other: &MeasurementSet) -> Result<f64> {
        if self.mask != other.mask {
            return Err(Error::GeometryMismatch);
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a * b.conj()).re).sum())
    }

    /// Elementwise sum on the same mask.
    pub fn add(&self, other: &MeasurementSet) -> Result<MeasurementSet> {
        if self.mask.indices != other.mask.indices || self.geometry() != other.geometry() {
            return Err(Error::GeometryMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(MeasurementSet { mask: self.mask.clone(), values })
    }

    pub fn scale(&self, s: f64) -> MeasurementSet {
        MeasurementSet { mask: self.mask.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }
}

/// `b = S F u`.
pub fn measure(u: &RealSignal, mask: &FrequencyMask) -> Result<MeasurementSet> {
    u.geometry().check_same(&mask.geometry)?;
    let spectrum = dft_forward(u);
    let values = mask.indices.iter().map(|&i| spectrum.coeffs[i]).collect();
    Ok(MeasurementSet { mask: mask.clone(), values })
}

/// `Aᵀ b = N^h F⁻¹(zero-padded b)`.
pub fn adjoint_measure(b: &MeasurementSet) -> Result<RealSignal> {
    let deviation = b.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let g = b.geometry();
    let mut buf = b.to_full();
    let mut out = vec![0.0; g.len()];
    let t = Transform::new(g);
    t.inverse_into(&mut buf, &mut out);
    let scale = g.len() as f64;
    for v in &mut out {
        *v *= scale;
    }
    Ok(RealSignal::from_raw(g, out))
}

/// Frequency-domain gain `K_k` (filters) or weight `M_k` (preconditioners).
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpectrum {
    geometry: GridGeometry,
    gains: Vec<Complex64>,
}

impl FilterSpectrum {
    pub fn new(geometry: GridGeometry, gains: Vec<Complex64>) -> Result<Self> {
        if gains.len() != geometry.len() {
            return Err(invalid("gain count does not match geometry"));
        }
        let deviation = hermitian_deviation(geometry, &gains, None);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(FilterSpectrum { geometry, gains })
    }

    pub fn all_pass(geometry: GridGeometry) -> Self {
        FilterSpectrum { geometry, gains: vec![Complex64::new(1.0, 0.0); geometry.len()] }
    }

    /// Nonnegative real weights, as required for a preconditioner.
    pub fn weights(geometry: GridGeometry, weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(invalid("preconditioner weights must be finite and nonnegative"));
        }
        Self::new(geometry, weights.iter().map(|&w| Complex64::new(w, 0.0)).collect())
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    /// Natural FFT order.
    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn get(&self, k: &[i64]) -> Result<Complex64> {
        Ok(self.gains[self.geometry.freq_index(k)?])
    }

    /// The weights `|K_k|²`, which damp frequencies the filter attenuates.
    pub fn power(&self) -> FilterSpectrum {
        let gains = self.gains.iter().map(|g| Complex64::new(g.norm_sqr(), 0.0)).collect();
        FilterSpectrum { geometry: self.geometry, gains }
    }

    pub fn is_nonneg_real(&self) -> bool {
        self.gains.iter().all(|g| g.im == 0.0 && g.re >= 0.0)
    }
}

/// Default Gaussian window, `2·ceil(3σ)+1`.
pub fn default_hsize(sigma: f64) -> usize {
    2 * ceil(3.0 * sigma) as usize + 1
}

/// Truncated, normalized Gaussian kernel embedded periodically and transformed.
/// In 2D the window is `hsize × hsize`.
pub fn gaussian_filter(sigma: f64, hsize: usize, geometry: GridGeometry) -> Result<FilterSpectrum> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(invalid("sigma must be positive"));
    }
    if hsize.is_multiple_of(2) || hsize > geometry.n() {
        return Err(invalid(alloc::format!("hsize must be odd and at most N, got {hsize}")));
    }
    let half = (hsize / 2) as i64;
    let taps: Vec<f64> = (-half..=half).map(|i| exp(-((i * i) as f64) / (2.0 * sigma * sigma))).collect();
    let n = geometry.n();
    let mut buf = vec![ZERO; geometry.len()];
    let mut total = 0.0;
    for (a, &ta) in taps.iter().enumerate() {
        let ia = (a as i64 - half).rem_euclid(n as i64) as usize;
        if geometry.h() == 1 {
            buf[ia].re += ta;
            total += ta;
            continue;
        }
        for (b, &tb) in taps.iter().enumerate() {
            let ib = (b as i64 - half).rem_euclid(n as i64) as usize;
            buf[ia * n + ib].re += ta * tb;
            total += ta * tb;
        }
    }
    for z in &mut buf {
        *z /= total;
    }
    GridFft::new(geometry.h(), n).forward(&mut buf);
    // Symmetric real kernel: the gains are real up to rounding.
    for z in &mut buf {
        z.im = 0.0;
    }
    buf[0] = Complex64::new(1.0, 0.0);
    Ok(FilterSpectrum { geometry, gains: buf })
}

fn apply_gain(u: &RealSignal, k: &FilterSpectrum, scale: f64) -> Result<RealSignal> {
    u.geometry().check_same(&k.geometry)?;
    let t = Transform::new(u.geometry());
    let mut buf = vec![ZERO; u.geometry().len()];
    t.forward_into(u.values(), &mut buf);
    for (z, g) in buf.iter_mut().zip(&k.gains) {
        *z *= g;
    }
    let mut out = vec![0.0; u.geometry().len()];
    t.inverse_into(&mut buf, &mut out);
    if scale != 1.0 {
        for v in &mut out {
            *v *= scale;
        }
    }
    Ok(RealSignal::from_raw(u.geometry(), out))
}

/// Periodic convolution `F⁻¹(K·F u)`: the blurred signal.
pub fn blur(u: &RealSignal, k: &FilterSpectrum) -> Result<RealSignal> {
    apply_gain(u, k, 1.0)
}

/// The filtered-measurement operator `Fᵀ K F u = N^h F⁻¹(K·F u)`.
///
/// With `K ≡ 1` this returns `N^h·u`. The solver never sees this factor: it
/// transforms blurred data with [`dft_forward`] and works with `K·F`.
pub fn filter_apply(u: &RealSignal, k: &FilterSpectrum) -> Result<RealSignal> {
    apply_gain(u, k, u.geometry().len() as f64)
}

/// Cosine-transform data: the DFT of the length-`2N` even extension
/// `(u(1),…,u(N),u(N),…,u(1))`, restricted to `|k| ≤ 2d`.
///
/// The returned set lives on the extended geometry; [`MeasurementSet::get`]
/// with `k = 0..=2d` yields the `2d+1` distinct coefficients.
pub fn dct_measure(u: &RealSignal, d: usize) -> Result<MeasurementSet> {
    let g = u.geometry();
    if g.h() != 1 {
        return Err(Error::WrongDimension { expected: 1, found: g.h() });
    }
    let n = g.n();
    if 2 * d >= n {
        return Err(invalid(alloc::format!("2d = {} must be below N = {n}", 2 * d)));
    }
    let ext = even_extension(u)?;
    measure(&ext, &FrequencyMask::lowpass(ext.geometry(), 2 * d))
}

/// `(u(1),…,u(N),u(N),…,u(1))` on a grid of length `2N`.
pub fn even_extension(u: &RealSignal) -> Result<RealSignal> {
    let g = u.geometry();
    if g.h() != 1 {
        return Err(Error::WrongDimension { expected: 1, found: g.h() });
    }
    let mut values = u.values().to_vec();
    values.extend(u.values().iter().rev());
    RealSignal::new(GridGeometry::line(2 * g.n())?, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::cis_turns;

    fn line(vals: &[f64]) -> RealSignal {
        RealSignal::new(GridGeometry::line(vals.len()).unwrap(), vals.to_vec()).unwrap()
    }

    /// Summation oracle straight from the convention.
    fn direct(u: &RealSignal, k: i64) -> Complex64 {
        let n = u.geometry().n() as i64;
        u.values()
            .iter()
            .enumerate()
            .map(|(i, &v)| v * cis_turns(-((k * (i as i64 + 1)).rem_euclid(n)) as f64 / n as f64))
            .sum()
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn forward_constant() {
        let s = dft_forward(&line(&[1.0; 4]));
        assert!(close(s.get(&[0]).unwrap(), Complex64::new(4.0, 0.0)));
        for k in [-2, -1, 1] {
            assert!(close(s.get(&[k]).unwrap(), ZERO));
        }
    }

    #[test]
    fn forward_delta_at_one() {
        let u = line(&[1.0, 0.0, 0.0, 0.0]);
        let s = dft_forward(&u);
        assert!(close(s.get(&[0]).unwrap(), Complex64::new(1.0, 0.0)));
        assert!(close(s.get(&[1]).unwrap(), Complex64::new(0.0, -1.0)));
        assert!(close(s.get(&[-1]).unwrap(), Complex64::new(0.0, 1.0)));
        assert!(close(s.get(&[-2]).unwrap(), Complex64::new(-1.0, 0.0)));
        for k in -2..2 {
            assert!(close(s.get(&[k]).unwrap(), direct(&u, k)));
        }
    }

    #[test]
    fn forward_two_ones() {
        let s = dft_forward(&line(&[1.0, 1.0, 0.0, 0.0]));
        assert!(close(s.get(&[0]).unwrap(), Complex64::new(2.0, 0.0)));
        assert!(close(s.get(&[1]).unwrap(), Complex64::new(-1.0, -1.0)));
    }

    #[test]
    fn symmetric_entries_order() {
        let s = dft_forward(&line(&[1.0, 1.0, 0.0, 0.0]));
        let ks: Vec<i64> = s.symmetric_entries().iter().map(|e| e.0[0]).collect();
        assert_eq!(ks, vec![-2, -1, 0, 1]);
    }

    #[test]
    fn inverse_examples() {
        let g = GridGeometry::line(4).unwrap();
        let dc = Spectrum::from_entries(g, &[([0, 0], Complex64::new(4.0, 0.0))]).unwrap();
        assert_eq!(dft_inverse(&dc).unwrap().values(), &[1.0; 4]);
        let delta = line(&[1.0, 0.0, 0.0, 0.0]);
        let back = dft_inverse(&dft_forward(&delta)).unwrap();
        for (a, b) in back.values().iter().zip(delta.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        let bad = Spectrum::from_entries(g, &[([1, 0], Complex64::new(1.0, 0.0))]).unwrap();
        assert!(matches!(dft_inverse(&bad), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn measure_lowpass() {
        let u = line(&[1.0, 1.0, 0.0, 0.0]);
        let b = measure(&u, &FrequencyMask::lowpass(u.geometry(), 1)).unwrap();
        assert_eq!(b.values().len(), 3);
        assert!(close(b.get(&[0]).unwrap(), Complex64::new(2.0, 0.0)));
        assert!(close(b.get(&[1]).unwrap(), Complex64::new(-1.0, -1.0)));
        assert!(close(b.get(&[-1]).unwrap(), Complex64::new(-1.0, 1.0)));
        let empty = measure(&u, &FrequencyMask::empty(u.geometry())).unwrap();
        assert!(empty.values().is_empty());
        assert_eq!(adjoint_measure(&empty).unwrap().values(), &[0.0; 4]);
        let full = measure(&u, &FrequencyMask::full(u.geometry())).unwrap();
        assert_eq!(full.to_full(), dft_forward(&u).coeffs().to_vec());
    }

    #[test]
    fn measure_rejects_geometry_mismatch() {
        let u = line(&[1.0, 0.0]);
        let mask = FrequencyMask::full(GridGeometry::line(4).unwrap());
        assert_eq!(measure(&u, &mask), Err(Error::GeometryMismatch));
    }

    #[test]
    fn adjoint_of_dc() {
        let g = GridGeometry::line(4).unwrap();
        let mask = FrequencyMask::lowpass(g, 0);
        let b = MeasurementSet::new(mask, vec![Complex64::new(1.0, 0.0)]).unwrap();
        let v = adjoint_measure(&b).unwrap();
        for x in v.values() {
            assert!((x - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn measurement_set_rejects_non_hermitian() {
        let g = GridGeometry::line(4).unwrap();
        let mask = FrequencyMask::lowpass(g, 1);
        let vals = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.0)];
        assert!(matches!(MeasurementSet::new(mask, vals), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn masks() {
        let g8 = GridGeometry::line(8).unwrap();
        assert_eq!(FrequencyMask::lowpass(g8, 1).frequencies(), vec![[0, 0], [1, 0], [-1, 0]]);
        let clipped = FrequencyMask::lowpass(g8, 4);
        assert!(clipped.clipped());
        assert_eq!(clipped.len(), 8);
        let g2 = GridGeometry::square(8).unwrap();
        assert_eq!(FrequencyMask::disk(g2, 0.0).unwrap().frequencies(), vec![[0, 0]]);
        assert_eq!(FrequencyMask::disk(g2, 1.0).unwrap().len(), 5);
        let full = FrequencyMask::random(g2, 64, 3, true).unwrap();
        assert_eq!(full.len(), 64);
        assert!(FrequencyMask::random(g2, 65, 3, true).is_err());
        let explicit = FrequencyMask::explicit(g8, &[[2, 0], [-4, 0]]).unwrap();
        assert_eq!(explicit.len(), 3);
        assert!(explicit.is_conjugate_closed());
    }

    #[test]
    fn random_mask_rank_and_dc() {
        let g = GridGeometry::line(16).unwrap();
        for r in 1..=16 {
            for seed in 0..5 {
                let m = FrequencyMask::random(g, r, seed, true).unwrap();
                assert_eq!(m.real_rank(), r);
                assert!(m.contains(0));
                assert!(m.is_conjugate_closed());
            }
        }
        let no_dc = FrequencyMask::random(g, 4, 1, false).unwrap();
        assert_eq!(no_dc.real_rank(), 4);
    }

    #[test]
    fn gaussian_filter_properties() {
        let g = GridGeometry::line(16).unwrap();
        let allpass = gaussian_filter(1e-6, 1, g).unwrap();
        assert!(allpass.gains().iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let k = gaussian_filter(1.5, 7, g).unwrap();
        assert_eq!(k.gains()[0], Complex64::new(1.0, 0.0));
        assert!(k.is_nonneg_real() || k.gains().iter().all(|z| z.im == 0.0));
        assert!(gaussian_filter(0.0, 3, g).is_err());
        assert!(gaussian_filter(1.0, 4, g).is_err());
        assert!(gaussian_filter(1.0, 17, g).is_err());
        assert_eq!(default_hsize(5.0), 31);
    }

    #[test]
    fn gaussian_filter_nyquist_values() {
        // Direct evaluation of the truncated kernel's DFT at k = N/2:
        // Σ_i g(i)(-1)^i / Σ_i g(i), i ∈ [-15, 15] (hsize 31) or [-30, 30] (hsize 61).
        let g = GridGeometry::line(400).unwrap();
        let oracle = |half: i64| {
            let w = |i: i64| libm::exp(-((i * i) as f64) / 50.0);
            let tot: f64 = (-half..=half).map(w).sum();
            (-half..=half).map(|i| if i % 2 == 0 { w(i) } else { -w(i) }).sum::<f64>() / tot
        };
        let k31 = gaussian_filter(5.0, 31, g).unwrap().get(&[-200]).unwrap();
        assert!((k31.re - oracle(15)).abs() < 1e-13);
        assert!((k31.re.abs() - 6.2695e-4).abs() < 1e-7);
        let k61 = gaussian_filter(5.0, 61, g).unwrap().get(&[-200]).unwrap();
        assert!(k61.re.abs() < 1e-8);
    }

    #[test]
    fn blur_and_filter_apply() {
        let g = GridGeometry::line(8).unwrap();
        let mut d = [0.0; 8];
        d[0] = 1.0;
        let delta = RealSignal::new(g, d.to_vec()).unwrap();
        let k = gaussian_filter(1.0, 5, g).unwrap();
        // Direct convolution oracle: the blurred delta at x=1 is the kernel
        // centered at x=1, wrapped periodically.
        let w = |i: i64| libm::exp(-((i * i) as f64) / 2.0);
        let tot: f64 = (-2..=2).map(w).sum();
        let blurred = blur(&delta, &k).unwrap();
        for (i, v) in blurred.values().iter().enumerate() {
            let off = ((i as i64 + 8 + 4) % 8) - 4;
            let want = if off.abs() <= 2 { w(off) / tot } else { 0.0 };
            assert!((v - want).abs() < 1e-14, "i={i}");
        }
        let scaled = filter_apply(&delta, &k).unwrap();
        for (a, b) in scaled.values().iter().zip(blurred.values()) {
            assert!((a - 8.0 * b).abs() < 1e-12);
        }
        let one = FilterSpectrum::all_pass(g);
        let u = RealSignal::new(g, (0..8).map(|i| i as f64).collect()).unwrap();
        for (a, b) in filter_apply(&u, &one).unwrap().values().iter().zip(u.values()) {
            assert!((a - 8.0 * b).abs() < 1e-12);
        }
        let c = RealSignal::new(g, vec![0.3; 8]).unwrap();
        for v in blur(&c, &k).unwrap().values() {
            assert!((v - 0.3).abs() < 1e-14);
        }
    }

    #[test]
    fn dct_measure_properties() {
        let u = line(&[0.7; 8]);
        let b = dct_measure(&u, 1).unwrap();
        assert!((b.get(&[0]).unwrap().re - 11.2).abs() < 1e-12);
        for k in 1..=2 {
            assert!(b.get(&[k]).unwrap().norm() < 1e-12);
        }
        let w = line(&[1.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        let b = dct_measure(&w, 2).unwrap();
        let ext = even_extension(&w).unwrap();
        assert_eq!(ext.values(), &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
        for k in 0..=4 {
            assert!((b.get(&[k]).unwrap() - direct(&ext, k)).norm() < 1e-12);
        }
        assert!(dct_measure(&w, 3).is_err());
    }
}
