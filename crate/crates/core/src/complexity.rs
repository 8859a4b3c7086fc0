//! Directional zero-crossing counts of 2D shapes on the torus.
//!
//! A grating of rational slope `p/q` is the family of unit segments
//! `L_s(t) = (t, s + t·p/q)` (horizontal family, `θ ∈ (−π/4, π/4]`) or
//! `L_s(t) = (s + t·p/q, t)` (vertical family, `θ ∈ (π/4, 3π/4]`), `t ∈ [0,1]`.
//! Running `t` over `[0, q)` closes the line into a flow that visits the `q`
//! segments with offsets `s + j/q`. `K_θ` is the mean crossing count per
//! segment times `q/√(p²+q²)`, i.e. crossings per unit of perpendicular
//! offset, and half its integral over a period of angles is the perimeter.
//!
//! Points are `(x, y)` with `x` horizontal (column) and `y` vertical (row).
//! Binary images are read through an extension to the torus
//! ([`ImageSampling`]); their values estimate the continuous quantity.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fft::FftPlan;
use crate::fourier::{FrequencyMask, Spectrum};
use crate::math::{atan2, cis_turns, gcd, sqrt};
use crate::rng::{seeded, Gaussian};
use crate::signal::BinarySignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `(t, s + t·p/q)`.
    Horizontal,
    /// `(s + t·p/q, t)`.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GratingSpec {
    pub p: i64,
    pub q: i64,
    pub family: Family,
}

impl GratingSpec {
    /// `gcd(p, q) = 1`, `q ≥ 1`; horizontal slopes lie in `(−1, 1]`, vertical
    /// ones in `[−1, 1)`.
    pub fn new(p: i64, q: i64, family: Family) -> Result<Self> {
        if q < 1 || gcd(p, q) != 1 {
            return Err(invalid("grating slope must be p/q in lowest terms with q ≥ 1"));
        }
        let ok = match family {
            Family::Horizontal => -q < p && p <= q,
            Family::Vertical => -q <= p && p < q,
        };
        if !ok {
            return Err(invalid("grating slope outside its family's range"));
        }
        Ok(GratingSpec { p, q, family })
    }

    pub fn theta(&self) -> f64 {
        match self.family {
            Family::Horizontal => atan2(self.p as f64, self.q as f64),
            Family::Vertical => atan2(self.q as f64, self.p as f64),
        }
    }

    /// `cos θ` (horizontal) or `sin θ` (vertical): `q/√(p²+q²)`.
    pub fn weight(&self) -> f64 {
        self.q as f64 / sqrt((self.p * self.p + self.q * self.q) as f64)
    }

    /// Closest rational direction to `theta` (taken mod `π`) with `q ≤ q_max`.
    pub fn nearest(theta: f64, q_max: i64) -> Self {
        let target = crate::math::rem_euclid(theta + PI / 4.0, PI) - PI / 4.0;
        let mut best: Option<(f64, GratingSpec)> = None;
        for q in 1..=q_max.max(1) {
            for p in -q..=q {
                for family in [Family::Horizontal, Family::Vertical] {
                    if let Ok(g) = GratingSpec::new(p, q, family) {
                        let diff = (g.theta() - target).abs();
                        if best.is_none_or(|(d, _)| diff < d - 1e-15) {
                            best = Some((diff, g));
                        }
                    }
                }
            }
        }
        best.expect("q = 1 always yields a grating").1
    }

    /// `count` equally spaced targets over `(−π/4, 3π/4]`, each replaced by its
    /// nearest rational direction; duplicates removed, sorted by angle.
    pub fn angle_set(count: usize, q_max: i64) -> Vec<Self> {
        let mut out: Vec<GratingSpec> = Vec::new();
        for j in 0..count {
            let theta = -PI / 4.0 + PI * (j + 1) as f64 / count as f64;
            let g = Self::nearest(theta, q_max);
            if !out.contains(&g) {
                out.push(g);
            }
        }
        out.sort_by(|a, b| a.theta().partial_cmp(&b.theta()).expect("finite"));
        out
    }

    /// Point on the segment with offset `s` at parameter `t`.
    pub fn point(&self, s: f64, t: f64) -> [f64; 2] {
        let slope = self.p as f64 / self.q as f64;
        match self.family {
            Family::Horizontal => [t, s + t * slope],
            Family::Vertical => [s + t * slope, t],
        }
    }

    /// Flows per angle for base resolution `n`: a multiple of `n` with at
    /// least `4n` segment offsets in total.
    pub fn flow_count(&self, n: usize) -> usize {
        n * 4_usize.div_ceil(self.q as usize)
    }
}

/// A real function on the torus; crossings are strict sign changes.
pub trait SignField {
    fn level(&self, p: [f64; 2]) -> f64;
}

/// How a binary image is extended to the torus. Pixel `(r, c)`, 1-based, sits
/// at `(c/N, r/N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImageSampling {
    /// Bilinear interpolant of `2u − 1` after a Gaussian blur of `sigma`
    /// pixels (`0` for none). The zero set follows the shape boundary; the
    /// blur smooths out the pixel staircase.
    Bilinear { sigma: f64 },
    /// Value of the nearest pixel. Lines graze the pixel staircase, which
    /// measures the city-block perimeter (`8R` for a disk of radius `R`).
    NearestPixel,
}

impl Default for ImageSampling {
    fn default() -> Self {
        ImageSampling::Bilinear { sigma: DEFAULT_SIGMA }
    }
}

/// Default blur, in pixels.
pub const DEFAULT_SIGMA: f64 = 1.0;

fn gaussian_taps(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let half = crate::math::ceil(4.0 * sigma) as i64;
    (-half..=half).map(|j| crate::math::exp(-((j * j) as f64) / (2.0 * sigma * sigma))).collect()
}

/// A binary image extended to the torus per an [`ImageSampling`].
///
/// Levels are sums of `±w` terms in a fixed order, so the complement yields
/// exactly negated levels and a pixel shift exactly shifted ones.
#[derive(Debug, Clone)]
pub struct ImageField {
    n: usize,
    nearest: bool,
    /// `(n+1)²` levels; entry `(r, c)` is the 0-based pixel
    /// `((r−1) mod n, (c−1) mod n)`, i.e. the point `(c/N, r/N)`.
    levels: Vec<f64>,
}

impl ImageField {
    pub fn new(u: &BinarySignal, sampling: ImageSampling) -> Result<Self> {
        let geo = u.geometry();
        if geo.h() != 2 {
            return Err(Error::WrongDimension { expected: 2, found: geo.h() });
        }
        let n = geo.n();
        let signed: Vec<f64> = u.bits().map(|b| if b { 1.0 } else { -1.0 }).collect();
        let (grid, nearest) = match sampling {
            ImageSampling::NearestPixel => (signed, true),
            ImageSampling::Bilinear { sigma } => {
                if !(sigma >= 0.0) || !sigma.is_finite() {
                    return Err(invalid("blur sigma must be finite and nonnegative"));
                }
                let taps = gaussian_taps(sigma);
                let half = (taps.len() / 2) as i64;
                let wrap = |i: usize, o: i64| (i as i64 + o).rem_euclid(n as i64) as usize;
                let pass = |src: &[f64], rows: bool| -> Vec<f64> {
                    let mut out = vec![0.0; n * n];
                    for r in 0..n {
                        for c in 0..n {
                            let mut acc = 0.0;
                            for (t, w) in taps.iter().enumerate() {
                                let o = t as i64 - half;
                                let idx = if rows { r * n + wrap(c, o) } else { wrap(r, o) * n + c };
                                acc += w * src[idx];
                            }
                            out[r * n + c] = acc;
                        }
                    }
                    out
                };
                (pass(&pass(&signed, true), false), false)
            }
        };
        let mut levels = vec![0.0; (n + 1) * (n + 1)];
        for r in 0..=n {
            for c in 0..=n {
                levels[r * (n + 1) + c] = grid[((r + n - 1) % n) * n + (c + n - 1) % n];
            }
        }
        Ok(ImageField { n, nearest, levels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Level (up to a positive factor) at pixel coordinates
    /// `(x0 + fx/den, y0 + fy/den)`, `x0, y0 ∈ [0, n)`, `fx, fy ∈ [0, den)`.
    #[inline]
    fn level_at(&self, x0: usize, fx: i64, y0: usize, fy: i64, den: i64) -> f64 {
        let w = self.n + 1;
        if self.nearest {
            let c = x0 + (2 * fx >= den) as usize;
            let r = y0 + (2 * fy >= den) as usize;
            return self.levels[r * w + c];
        }
        let (fx, fy, gx, gy) = (fx as f64, fy as f64, (den - fx) as f64, (den - fy) as f64);
        let base = y0 * w + x0;
        self.levels[base] * gx * gy
            + self.levels[base + 1] * fx * gy
            + self.levels[base + w] * gx * fy
            + self.levels[base + w + 1] * fx * fy
    }
}

impl SignField for ImageField {
    fn level(&self, p: [f64; 2]) -> f64 {
        const DEN: i64 = 1 << 20;
        let n = self.n as f64;
        let split = |v: f64| {
            let scaled = crate::math::round(crate::math::rem_euclid(v, 1.0) * n * DEN as f64) as i64;
            let whole = scaled.div_euclid(DEN);
            ((whole as usize) % self.n, scaled - whole * DEN)
        };
        let (x0, fx) = split(p[0]);
        let (y0, fy) = split(p[1]);
        self.level_at(x0, fx, y0, fy, DEN)
    }
}

/// Real band-limited function `Re Σ a_k e^{2πi(k_x x + k_y y)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandLimitedField {
    /// `([k_x, k_y], a_k)`, closed under `k ↦ −k` with conjugate values.
    terms: Vec<([i64; 2], Complex64)>,
}

impl BandLimitedField {
    pub fn new(terms: Vec<([i64; 2], Complex64)>) -> Self {
        BandLimitedField { terms }
    }

    /// Continuous extension of a 2D grid spectrum. Nyquist coefficients have
    /// no real extension and are rejected.
    pub fn from_spectrum(a: &Spectrum) -> Result<Self> {
        let g = a.geometry();
        if g.h() != 2 {
            return Err(Error::WrongDimension { expected: 2, found: g.h() });
        }
        let nyq = -((g.n() / 2) as i64);
        let mut terms = Vec::new();
        for (k, z) in a.symmetric_entries() {
            if z.norm() == 0.0 {
                continue;
            }
            if k[0] == nyq || k[1] == nyq {
                return Err(invalid("spectrum has Nyquist content"));
            }
            terms.push(([k[1], k[0]], z));
        }
        Ok(BandLimitedField { terms })
    }

    /// Random real field with Gaussian coefficients on `‖k‖ ≤ d`.
    pub fn random_disk(d: f64, seed: u64) -> Self {
        let mut rng = seeded(seed);
        let mut gauss = Gaussian::new();
        let r = d as i64;
        let mut terms = Vec::new();
        for ky in -r..=r {
            for kx in -r..=r {
                if ((kx * kx + ky * ky) as f64) > d * d {
                    continue;
                }
                // One draw per ±k orbit; (ky, kx) > 0 lexicographically.
                if (ky, kx) > (0, 0) {
                    let z = Complex64::new(gauss.sample(&mut rng), gauss.sample(&mut rng));
                    terms.push(([kx, ky], z));
                    terms.push(([-kx, -ky], z.conj()));
                } else if (ky, kx) == (0, 0) {
                    terms.push(([0, 0], Complex64::new(gauss.sample(&mut rng), 0.0)));
                }
            }
        }
        BandLimitedField { terms }
    }

    pub fn terms(&self) -> &[([i64; 2], Complex64)] {
        &self.terms
    }

    /// `max ‖k‖` over the terms.
    pub fn radius(&self) -> f64 {
        self.terms.iter().map(|(k, _)| sqrt((k[0] * k[0] + k[1] * k[1]) as f64)).fold(0.0, f64::max)
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|(k, a)| (a * cis_turns(k[0] as f64 * p[0] + k[1] as f64 * p[1])).re)
            .sum()
    }
}

impl SignField for BandLimitedField {
    fn level(&self, p: [f64; 2]) -> f64 {
        self.eval(p)
    }
}

/// Strict sign changes along the segment `L_s(t)`, `t = i/samples` for
/// `i = 0..=samples` (both ends included, not wrapped, zeros skipped).
pub fn line_crossings(field: &impl SignField, g: &GratingSpec, s: f64, samples: usize) -> usize {
    let mut prev = 0i8;
    let mut count = 0;
    for i in 0..=samples {
        let cur = sign(field.level(g.point(s, i as f64 / samples as f64)));
        if cur != 0 {
            if prev != 0 && cur != prev {
                count += 1;
            }
            prev = cur;
        }
    }
    count
}

fn sign<T: PartialOrd + Default>(x: T) -> i8 {
    let zero = T::default();
    if x > zero {
        1
    } else if x < zero {
        -1
    } else {
        0
    }
}

/// `K_θ` from segments: offsets `s_i = i/s_samples`, each segment sampled at
/// `t_samples + 1` points. The cross-check path.
pub fn k_theta_direct(field: &impl SignField, g: &GratingSpec, s_samples: usize, t_samples: usize) -> f64 {
    let total: usize = (0..s_samples).map(|i| line_crossings(field, g, i as f64 / s_samples as f64, t_samples)).sum();
    g.weight() * total as f64 / s_samples as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KTheta {
    pub grating: GratingSpec,
    pub theta: f64,
    pub k: f64,
    /// Number of segment offsets averaged.
    pub s_samples: usize,
    /// True when halving the step changed a count and the finer value was used.
    pub refined: bool,
}

/// Strict sign changes of a periodic sequence, zeros skipped.
fn cyclic_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut first = 0i8;
    let mut prev = 0i8;
    let mut count = 0;
    for x in signs.filter(|&x| x != 0) {
        if first == 0 {
            first = x;
        } else if x != prev {
            count += 1;
        }
        prev = x;
    }
    if first != 0 && first != prev {
        count + 1
    } else {
        count
    }
}

/// `K_θ` of a binary image from closed flows sampled at `t`-step `1/(sub·N)`,
/// starting at `sub = 4` and doubling while the count changes. Sample
/// positions are exact rationals, so integer-pixel translations and
/// complements leave the result exactly unchanged.
pub fn k_theta_image(u: &BinarySignal, g: &GratingSpec, sampling: ImageSampling) -> Result<KTheta> {
    Ok(k_theta_image_field(&ImageField::new(u, sampling)?, g))
}

pub fn k_theta_image_field(f: &ImageField, g: &GratingSpec) -> KTheta {
    let n = f.n;
    let flows = g.flow_count(n);
    let c = (flows / n) as i64;
    let (p, q) = (g.p, g.q);
    let count_at = |sub: i64| -> usize {
        // Pixel coordinates over the common denominator `sub·q·c`: along
        // `j·q·c`, across `sub·i + j·p·c`, stepped incrementally.
        let den = sub * q * c;
        let (d_along, d_across) = (q * c, p * c);
        let mut total = 0;
        for i in 0..flows as i64 {
            let (mut a0, mut fa) = (0usize, 0i64);
            let (mut c0, mut fc) = ((sub * i).div_euclid(den) as usize % n, (sub * i).rem_euclid(den));
            let samples = (0..sub * n as i64 * q).map(|_| {
                let v = match g.family {
                    Family::Horizontal => f.level_at(a0, fa, c0, fc, den),
                    Family::Vertical => f.level_at(c0, fc, a0, fa, den),
                };
                fa += d_along;
                while fa >= den {
                    fa -= den;
                    a0 = if a0 + 1 == n { 0 } else { a0 + 1 };
                }
                fc += d_across;
                while fc >= den {
                    fc -= den;
                    c0 = if c0 + 1 == n { 0 } else { c0 + 1 };
                }
                while fc < 0 {
                    fc += den;
                    c0 = if c0 == 0 { n - 1 } else { c0 - 1 };
                }
                sign(v)
            });
            total += cyclic_changes(samples);
        }
        total
    };
    let mut sub = 4;
    let mut count = count_at(sub);
    let mut refined = false;
    while sub < 64 {
        let finer = count_at(2 * sub);
        if finer == count {
            break;
        }
        refined = true;
        sub *= 2;
        count = finer;
    }
    let s_samples = flows * q as usize;
    KTheta { grating: *g, theta: g.theta(), k: g.weight() * count as f64 / s_samples as f64, s_samples, refined }
}

/// `K_θ` of a band-limited field. Along a closed flow the field is a
/// trigonometric polynomial in the flow parameter with frequencies
/// `k_x q + k_y p` (horizontal) or `k_x p + k_y q` (vertical); it is sampled
/// by one inverse FFT per flow, well above its degree. `n` sets the offset
/// resolution as for images.
pub fn k_theta_field(v: &BandLimitedField, g: &GratingSpec, n: usize) -> KTheta {
    let (p, q) = (g.p, g.q);
    let freq = |k: &[i64; 2]| match g.family {
        Family::Horizontal => k[0] * q + k[1] * p,
        Family::Vertical => k[0] * p + k[1] * q,
    };
    let across = |k: &[i64; 2]| match g.family {
        Family::Horizontal => k[1],
        Family::Vertical => k[0],
    };
    let degree = v.terms.iter().map(|(k, _)| freq(k).unsigned_abs() as usize).max().unwrap_or(0);
    let m = (16 * (degree + 1)).max(64).next_power_of_two();
    let plan = FftPlan::new(m);
    let flows = g.flow_count(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    let mut total = 0;
    for i in 0..flows {
        let s = i as f64 / (q as usize * flows) as f64;
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (k, a) in &v.terms {
            let slot = freq(k).rem_euclid(m as i64) as usize;
            buf[slot] += a * cis_turns(across(k) as f64 * s);
        }
        plan.backward(&mut buf);
        total += cyclic_changes(buf.iter().map(|z| sign(z.re)));
    }
    let s_samples = flows * q as usize;
    KTheta { grating: *g, theta: g.theta(), k: g.weight() * total as f64 / s_samples as f64, s_samples, refined: false }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub k_theta: Vec<KTheta>,
    pub max_k_theta: f64,
    pub perimeter: f64,
    /// `½ max_θ K_θ`: disk-band data of smaller radius cannot determine the shape.
    pub d_lower_bound: f64,
}

fn report(k_theta: Vec<KTheta>) -> ComplexityReport {
    let max_k_theta = k_theta.iter().map(|k| k.k).fold(0.0, f64::max);
    let perimeter = 0.5 * periodic_trapezoid(&k_theta);
    ComplexityReport { k_theta, max_k_theta, perimeter, d_lower_bound: 0.5 * max_k_theta }
}

/// `∫ K_θ dθ` over one period `π` by the trapezoid rule on sorted angles.
fn periodic_trapezoid(ks: &[KTheta]) -> f64 {
    match ks.len() {
        0 => 0.0,
        1 => ks[0].k * PI,
        len => (0..len)
            .map(|i| {
                let a = &ks[i];
                let b = &ks[(i + 1) % len];
                let mut width = b.theta - a.theta;
                if i + 1 == len {
                    width += PI;
                }
                0.5 * (a.k + b.k) * width
            })
            .sum(),
    }
}

/// Default directions: 32 targets, slopes with `q ≤ 8`.
pub fn default_angles() -> Vec<GratingSpec> {
    GratingSpec::angle_set(32, 8)
}

pub fn complexity_image(u: &BinarySignal, angles: &[GratingSpec]) -> Result<ComplexityReport> {
    complexity_image_with(u, angles, ImageSampling::default())
}

pub fn complexity_image_with(u: &BinarySignal, angles: &[GratingSpec], sampling: ImageSampling) -> Result<ComplexityReport> {
    let f = ImageField::new(u, sampling)?;
    Ok(report(angles.iter().map(|g| k_theta_image_field(&f, g)).collect()))
}

pub fn complexity_field(v: &BandLimitedField, angles: &[GratingSpec], n: usize) -> ComplexityReport {
    report(angles.iter().map(|g| k_theta_field(v, g, n)).collect())
}

/// Cauchy–Crofton perimeter estimate `½ ∫ K_θ dθ`.
pub fn crofton_perimeter(u: &BinarySignal, angles: &[GratingSpec]) -> Result<f64> {
    Ok(complexity_image(u, angles)?.perimeter)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NecessaryCheck {
    /// `d ≥ ½ max_θ K_θ`.
    pub holds: bool,
    pub max_k_theta: f64,
}

/// Necessary condition for `u` to be determined by its coefficients on the
/// disk `‖k‖ ≤ d`. Passing it does not imply recovery.
pub fn check_necessary_d(u: &BinarySignal, d: f64, angles: &[GratingSpec]) -> Result<NecessaryCheck> {
    let r = complexity_image(u, angles)?;
    Ok(NecessaryCheck { holds: d >= r.d_lower_bound, max_k_theta: r.max_k_theta })
}

/// `Σ_{k∈S, k≠0} 1/(4‖k‖)`, both members of each `±k` pair counted. Every
/// closed ball of this diameter meets the zero set of any nonzero real
/// function with spectrum in `S \ {0}`. DC is skipped.
pub fn zero_free_ball_bound(mask: &FrequencyMask) -> Result<f64> {
    let g = mask.geometry();
    let terms: Vec<f64> = mask.indices().iter().filter(|&&i| i != 0).map(|&i| 0.25 / g.freq_norm(i)).collect();
    if terms.is_empty() {
        return Err(invalid("mask has no nonzero frequency"));
    }
    Ok(terms.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::gen_disk;
    use crate::signal::GridGeometry;

    #[test]
    fn grating_specs() {
        assert!(GratingSpec::new(2, 4, Family::Horizontal).is_err());
        assert!(GratingSpec::new(-1, 1, Family::Horizontal).is_err());
        assert!(GratingSpec::new(-1, 1, Family::Vertical).is_ok());
        let g = GratingSpec::nearest(0.0, 8);
        assert_eq!((g.p, g.q, g.family), (0, 1, Family::Horizontal));
        let g = GratingSpec::nearest(PI / 2.0, 8);
        assert_eq!((g.p, g.q, g.family), (0, 1, Family::Vertical));
        let set = GratingSpec::angle_set(32, 8);
        assert!(set.len() >= 30);
        assert!(set.windows(2).all(|w| w[0].theta() < w[1].theta()));
    }

    #[test]
    fn empty_and_full_images() {
        let g = GridGeometry::square(16).unwrap();
        let h = GratingSpec::new(1, 3, Family::Horizontal).unwrap();
        for one in [false, true] {
            let u = BinarySignal::constant(g, one);
            assert_eq!(k_theta_image(&u, &h, ImageSampling::default()).unwrap().k, 0.0);
            assert_eq!(crofton_perimeter(&u, &default_angles()).unwrap(), 0.0);
        }
    }

    #[test]
    fn band_to_vertical_grating() {
        // One horizontal band: every vertical line enters and leaves it once.
        let g = GridGeometry::square(32).unwrap();
        let u = BinarySignal::from_fn(g, |i| (10..20).contains(&(i / 32)));
        let v = GratingSpec::new(0, 1, Family::Vertical).unwrap();
        let f = ImageField::new(&u, ImageSampling::default()).unwrap();
        for i in 0..10 {
            assert_eq!(line_crossings(&f, &v, i as f64 / 10.0, 128), 2);
        }
        assert!((k_theta_image(&u, &v, ImageSampling::default()).unwrap().k - 2.0).abs() < 1e-12);
    }

    #[test]
    fn disk_through_centre() {
        let u = gen_disk(128, [0.5, 0.5], 0.2).unwrap();
        let h = GratingSpec::new(0, 1, Family::Horizontal).unwrap();
        let f = ImageField::new(&u, ImageSampling::default()).unwrap();
        assert_eq!(line_crossings(&f, &h, 0.5, 512), 2);
        let k = k_theta_image(&u, &h, ImageSampling::default()).unwrap().k;
        assert!((k - 0.8).abs() < 0.02, "K_0 = {k}");
    }

    #[test]
    fn field_flow_matches_direct_segments() {
        let v = BandLimitedField::random_disk(3.0, 11);
        for g in [GratingSpec::new(0, 1, Family::Horizontal).unwrap(), GratingSpec::new(1, 2, Family::Vertical).unwrap()] {
            let flow = k_theta_field(&v, &g, 16);
            let direct = k_theta_direct(&v, &g, flow.s_samples, 2048);
            assert!((flow.k - direct).abs() < 0.1, "{:?}: flow {} direct {}", g, flow.k, direct);
            assert!(flow.k <= 6.0 + 1e-12);
        }
    }

    #[test]
    fn sine_has_k_at_most_two() {
        let v = BandLimitedField::new(vec![([1, 0], Complex64::new(0.0, -0.5)), ([-1, 0], Complex64::new(0.0, 0.5))]);
        for g in default_angles().iter().filter(|g| g.q == 1) {
            assert!(k_theta_field(&v, g, 16).k <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn ball_bound_formula() {
        let g = GridGeometry::line(16).unwrap();
        let one = FrequencyMask::explicit(g, &[[1, 0]]).unwrap();
        assert!((zero_free_ball_bound(&one).unwrap() - 0.5).abs() < 1e-15);
        let two = FrequencyMask::explicit(g, &[[1, 0], [2, 0]]).unwrap();
        assert!((zero_free_ball_bound(&two).unwrap() - 0.75).abs() < 1e-15);
        let with_dc = FrequencyMask::lowpass(g, 1);
        assert!((zero_free_ball_bound(&with_dc).unwrap() - 0.5).abs() < 1e-15);
        assert!(zero_free_ball_bound(&FrequencyMask::lowpass(g, 0)).is_err());
    }
}
