#![allow(dead_code)]

use binrec_core::{Complex64, GridGeometry, RealSignal};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `F[k][x] = e^{−2πi⟨k, x⟩/N}` with `k` in natural order and `x` 1-based.
pub fn dft_matrix(g: GridGeometry) -> DMatrix<Complex64> {
    let n = g.n() as i64;
    DMatrix::from_fn(g.len(), g.len(), |k, x| {
        let f = g.index_freq(k);
        let p = g.position(x);
        let phase = (f[0] * p[0] as i64 + f[1] * p[1] as i64).rem_euclid(n);
        let a = -2.0 * std::f64::consts::PI * phase as f64 / n as f64;
        Complex64::new(a.cos(), a.sin())
    })
}

pub fn random_signal(g: GridGeometry, r: &mut ChaCha8Rng) -> RealSignal {
    RealSignal::new(g, (0..g.len()).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap()
}

pub fn complex_vec(v: &[f64]) -> DVector<Complex64> {
    DVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0)))
}

/// Every even N up to `max` in 1D and 2D.
pub fn small_geometries(max: usize) -> Vec<GridGeometry> {
    let mut out = Vec::new();
    for n in (2..=max).step_by(2) {
        out.push(GridGeometry::line(n).unwrap());
        out.push(GridGeometry::square(n).unwrap());
    }
    out
}
