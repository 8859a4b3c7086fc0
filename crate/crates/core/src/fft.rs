//! Complex FFT plans and separable multi-dimensional transforms.
//!
//! Lengths whose prime factors are all small use a mixed-radix Stockham
//! transform (radices 4, 2, 3, 5, 7 and other small primes). Remaining
//! lengths use Bluestein's chirp-z algorithm on top of a power-of-two
//! transform, so every length runs in `O(N log N)`. Plans hold immutable
//! twiddle tables and can be shared across threads.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math::cis_turns;

/// Largest prime handled by a direct butterfly inside the mixed-radix plan.
const MAX_DIRECT_RADIX: usize = 13;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    kind: PlanKind,
}

#[derive(Debug, Clone)]
enum PlanKind {
    Mixed(MixedRadix),
    Bluestein(Bluestein),
}

#[derive(Debug, Clone)]
struct Stage {
    radix: usize,
    /// Sub-transform length before this stage.
    span: usize,
    /// `e^{-2πi·r·k/(span·radix)}` at `k·radix + r`.
    twiddles: Vec<Complex64>,
    /// `e^{-2πi·j/radix}` for the generic butterfly.
    roots: Vec<Complex64>,
}

#[derive(Debug, Clone)]
struct MixedRadix {
    n: usize,
    stages: Vec<Stage>,
}

#[derive(Debug, Clone)]
struct Bluestein {
    /// `e^{-πij²/n}` for `j < n`.
    chirp: Vec<Complex64>,
    /// FFT of the conjugate chirp filter, length `inner.n`, pre-scaled by `1/inner.n`.
    filter: Vec<Complex64>,
    inner: MixedRadix,
}

/// Radix sequence for `n`, or `None` if a prime factor is too large.
fn radices(mut n: usize) -> Option<Vec<usize>> {
    let mut out = Vec::new();
    while n.is_multiple_of(4) {
        out.push(4);
        n /= 4;
    }
    let mut p = 2;
    while n > 1 {
        if p > MAX_DIRECT_RADIX {
            return None;
        }
        while n.is_multiple_of(p) {
            out.push(p);
            n /= p;
        }
        p += 1;
    }
    Some(out)
}

impl MixedRadix {
    fn new(n: usize, radices: &[usize]) -> Self {
        let mut span = 1;
        let stages = radices
            .iter()
            .map(|&radix| {
                let len = span * radix;
                let mut twiddles = Vec::with_capacity(len);
                for k in 0..span {
                    for r in 0..radix {
                        twiddles.push(cis_turns(-(((r * k) % len) as f64) / len as f64));
                    }
                }
                let roots = (0..radix).map(|j| cis_turns(-(j as f64) / radix as f64)).collect();
                let st = Stage { radix, span, twiddles, roots };
                span = len;
                st
            })
            .collect();
        MixedRadix { n, stages }
    }

    fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = self.n;
        let mut src_is_buf = true;
        for st in &self.stages {
            let (src, dst): (&[Complex64], &mut [Complex64]) =
                if src_is_buf { (&*buf, &mut *scratch) } else { (&*scratch, &mut *buf) };
            stage(st, n, src, dst);
            src_is_buf = !src_is_buf;
        }
        if !src_is_buf {
            buf.copy_from_slice(&scratch[..n]);
        }
    }
}

/// One Stockham pass: butterflies of size `radix` over stride `n/radix`.
fn stage(st: &Stage, n: usize, src: &[Complex64], dst: &mut [Complex64]) {
    let r = st.radix;
    let stride = n / r;
    let span = st.span;
    let mut v = [ZERO; MAX_DIRECT_RADIX];
    for j in 0..stride {
        let k = j % span;
        let tw = &st.twiddles[k * r..(k + 1) * r];
        for q in 0..r {
            v[q] = src[j + q * stride] * tw[q];
        }
        let out = (j / span) * span * r + k;
        match r {
            2 => {
                dst[out] = v[0] + v[1];
                dst[out + span] = v[0] - v[1];
            }
            3 => {
                const H: f64 = 0.866_025_403_784_438_6;
                let s = v[1] + v[2];
                let t = v[1] - v[2];
                let m = v[0] - s * 0.5;
                let rot = Complex64::new(t.im * H, -t.re * H);
                dst[out] = v[0] + s;
                dst[out + span] = m + rot;
                dst[out + 2 * span] = m - rot;
            }
            4 => {
                let t0 = v[0] + v[2];
                let t1 = v[0] - v[2];
                let t2 = v[1] + v[3];
                let d = v[1] - v[3];
                let t3 = Complex64::new(d.im, -d.re);
                dst[out] = t0 + t2;
                dst[out + span] = t1 + t3;
                dst[out + 2 * span] = t0 - t2;
                dst[out + 3 * span] = t1 - t3;
            }
            5 => {
                const C1: f64 = 0.309_016_994_374_947_45;
                const C2: f64 = -0.809_016_994_374_947_5;
                const S1: f64 = 0.951_056_516_295_153_5;
                const S2: f64 = 0.587_785_252_292_473_1;
                let a1 = v[1] + v[4];
                let b1 = v[1] - v[4];
                let a2 = v[2] + v[3];
                let b2 = v[2] - v[3];
                let p1 = v[0] + a1 * C1 + a2 * C2;
                let p2 = v[0] + a1 * C2 + a2 * C1;
                let q1 = b1 * S1 + b2 * S2;
                let q2 = b1 * S2 - b2 * S1;
                // -i·q
                let m1 = Complex64::new(q1.im, -q1.re);
                let m2 = Complex64::new(q2.im, -q2.re);
                dst[out] = v[0] + a1 + a2;
                dst[out + span] = p1 + m1;
                dst[out + 2 * span] = p2 + m2;
                dst[out + 3 * span] = p2 - m2;
                dst[out + 4 * span] = p1 - m1;
            }
            _ => {
                for x in 0..r {
                    let mut acc = ZERO;
                    for q in 0..r {
                        acc += v[q] * st.roots[(q * x) % r];
                    }
                    dst[out + x * span] = acc;
                }
            }
        }
    }
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = MixedRadix::new(m, &radices(m).expect("powers of two factor"));
        let two_n = 2 * n as u64;
        // j² mod 2n keeps the chirp angle small and exact in integers.
        let chirp: Vec<Complex64> = (0..n as u64)
            .map(|j| cis_turns(-(((j * j) % two_n) as f64) / two_n as f64))
            .collect();
        let mut filter = vec![ZERO; m];
        filter[0] = chirp[0].conj();
        for j in 1..n {
            filter[j] = chirp[j].conj();
            filter[m - j] = chirp[j].conj();
        }
        let mut scratch = vec![ZERO; m];
        inner.forward(&mut filter, &mut scratch);
        let scale = 1.0 / m as f64;
        for f in &mut filter {
            *f *= scale;
        }
        Bluestein { chirp, filter, inner }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        let n = self.chirp.len();
        let m = self.inner.n;
        let mut work = vec![ZERO; m];
        let mut scratch = vec![ZERO; m];
        for j in 0..n {
            work[j] = buf[j] * self.chirp[j];
        }
        self.inner.forward(&mut work, &mut scratch);
        for (w, f) in work.iter_mut().zip(&self.filter) {
            // Inverse transform through conjugation: conj(FFT(conj(x))).
            *w = (*w * f).conj();
        }
        self.inner.forward(&mut work, &mut scratch);
        for k in 0..n {
            buf[k] = work[k].conj() * self.chirp[k];
        }
    }
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "FFT length must be positive");
        let kind = match radices(n) {
            Some(r) => PlanKind::Mixed(MixedRadix::new(n, &r)),
            None => PlanKind::Bluestein(Bluestein::new(n)),
        };
        FftPlan { n, kind }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when the length factors into small primes (no chirp-z detour).
    pub fn is_mixed_radix(&self) -> bool {
        matches!(self.kind, PlanKind::Mixed(_))
    }

    /// In place `X_k = Σ_j x_j e^{-2πijk/n}`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n);
        match &self.kind {
            PlanKind::Mixed(p) => p.forward(buf, &mut vec![ZERO; self.n]),
            PlanKind::Bluestein(p) => p.forward(buf),
        }
    }

    /// In place `x_j = Σ_k X_k e^{+2πijk/n}` (no `1/n`).
    pub fn backward(&self, buf: &mut [Complex64]) {
        for z in buf.iter_mut() {
            *z = z.conj();
        }
        self.forward(buf);
        for z in buf.iter_mut() {
            *z = z.conj();
        }
    }
}

/// Separable transform over an `h`-dimensional grid of side `n` stored row-major.
#[derive(Debug, Clone)]
pub struct GridFft {
    h: usize,
    plan: FftPlan,
}

impl GridFft {
    pub fn new(h: usize, n: usize) -> Self {
        GridFft { h, plan: FftPlan::new(n) }
    }

    pub fn n(&self) -> usize {
        self.plan.len()
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        match self.h {
            1 => self.plan.forward(buf),
            _ => {
                self.rows(buf, false);
                self.columns(buf, false);
            }
        }
    }

    /// Unnormalized inverse.
    pub fn backward(&self, buf: &mut [Complex64]) {
        match self.h {
            1 => self.plan.backward(buf),
            _ => {
                self.columns(buf, true);
                self.rows(buf, true);
            }
        }
    }

    /// Forward transform of purely real data (imaginary parts must be zero).
    /// In 2D two real rows share one complex transform.
    pub fn forward_real(&self, buf: &mut [Complex64]) {
        let n = self.n();
        if self.h == 1 || n % 2 == 1 {
            return self.forward(buf);
        }
        let mut z = vec![ZERO; n];
        for pair in buf.chunks_exact_mut(2 * n) {
            let (a, b) = pair.split_at_mut(n);
            for j in 0..n {
                z[j] = Complex64::new(a[j].re, b[j].re);
            }
            self.plan.forward(&mut z);
            for k in 0..n {
                let zk = z[k];
                let zc = z[(n - k) % n].conj();
                a[k] = (zk + zc) * 0.5;
                let d = zk - zc;
                b[k] = Complex64::new(d.im * 0.5, -d.re * 0.5);
            }
        }
        self.columns(buf, false);
    }

    /// Unnormalized inverse of a Hermitian spectrum; the real result is left
    /// in the real parts and the imaginary parts are zeroed.
    pub fn backward_real(&self, buf: &mut [Complex64]) {
        let n = self.n();
        if self.h == 1 || n % 2 == 1 {
            self.backward(buf);
            for z in buf.iter_mut() {
                z.im = 0.0;
            }
            return;
        }
        self.columns(buf, true);
        let mut z = vec![ZERO; n];
        for pair in buf.chunks_exact_mut(2 * n) {
            let (a, b) = pair.split_at_mut(n);
            for j in 0..n {
                z[j] = a[j] + Complex64::new(-b[j].im, b[j].re);
            }
            self.plan.backward(&mut z);
            for j in 0..n {
                a[j] = Complex64::new(z[j].re, 0.0);
                b[j] = Complex64::new(z[j].im, 0.0);
            }
        }
    }

    fn run(&self, row: &mut [Complex64], backward: bool) {
        if backward {
            self.plan.backward(row)
        } else {
            self.plan.forward(row)
        }
    }

    fn rows(&self, buf: &mut [Complex64], backward: bool) {
        for row in buf.chunks_exact_mut(self.n()) {
            self.run(row, backward);
        }
    }

    fn columns(&self, buf: &mut [Complex64], backward: bool) {
        let n = self.n();
        let mut col = vec![ZERO; n];
        for c in 0..n {
            for r in 0..n {
                col[r] = buf[r * n + c];
            }
            self.run(&mut col, backward);
            for r in 0..n {
                buf[r * n + c] = col[r];
            }
        }
    }
}
