//! Test signal generators and additive Gaussian noise.
//!
//! Pixel `x ∈ {1,…,N}^h` sits at the torus point `x/N`. In 2D the first
//! coordinate of a point is the column (horizontal) and the second the row.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::fourier::MeasurementSet;
use crate::math::sqrt;
use crate::rng::{seeded, Gaussian};
use crate::signal::{BinarySignal, GridGeometry, RealSignal};

/// A periodic 1D signal with exactly `2d` alternating runs (constant when
/// `d = 0`). Run lengths are uniform weights rescaled to sum to `N`, each at
/// least 1; the start value and a cyclic offset are random too.
pub fn gen_random_intervals(n: usize, d: usize, seed: u64) -> Result<BinarySignal> {
    let g = GridGeometry::line(n)?;
    if 2 * d > n {
        return Err(invalid(alloc::format!("2d = {} runs do not fit in N = {n}", 2 * d)));
    }
    let mut rng = seeded(seed);
    let first: bool = rng.gen();
    if d == 0 {
        return Ok(BinarySignal::constant(g, first));
    }
    let runs = 2 * d;
    let weights: Vec<f64> = (0..runs).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let extra = n - runs;
    let shares: Vec<f64> = weights.iter().map(|w| extra as f64 * w / total).collect();
    let mut lens: Vec<usize> = shares.iter().map(|s| 1 + *s as usize).collect();
    let mut left = n - lens.iter().sum::<usize>();
    // Largest fractional parts take the rounding remainder.
    let mut order: Vec<usize> = (0..runs).collect();
    order.sort_by(|&a, &b| {
        let fa = shares[a] - (shares[a] as usize) as f64;
        let fb = shares[b] - (shares[b] as usize) as f64;
        fb.partial_cmp(&fa).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &j in order.iter().cycle() {
        if left == 0 {
            break;
        }
        lens[j] += 1;
        left -= 1;
    }
    let offset = rng.gen_range(0..n);
    let mut bits = vec![false; n];
    let (mut pos, mut value) = (offset, first);
    for len in lens {
        for _ in 0..len {
            bits[pos % n] = value;
            pos += 1;
        }
        value = !value;
    }
    BinarySignal::from_bits(g, &bits)
}

/// Shortest distance between two points of the unit circle.
fn circle_dist(a: f64, b: f64) -> f64 {
    let t = crate::math::rem_euclid(a - b, 1.0);
    t.min(1.0 - t)
}

/// Filled disk on the `N×N` torus: `u = 1` where the torus distance from the
/// pixel to `center` is strictly below `radius`, so radius 0 is empty.
pub fn gen_disk(n: usize, center: [f64; 2], radius: f64) -> Result<BinarySignal> {
    let g = GridGeometry::square(n)?;
    if !(0.0..0.5).contains(&radius) {
        return Err(invalid("disk radius must lie in [0, 1/2)"));
    }
    Ok(BinarySignal::from_fn(g, |i| {
        let [row, col] = g.position(i);
        let dx = circle_dist(col as f64 / n as f64, center[0]);
        let dy = circle_dist(row as f64 / n as f64, center[1]);
        sqrt(dx * dx + dy * dy) < radius
    }))
}

/// Axis-aligned filled square of side `side` centred at `center`.
pub fn gen_square(n: usize, center: [f64; 2], side: f64) -> Result<BinarySignal> {
    let g = GridGeometry::square(n)?;
    if !(0.0..1.0).contains(&side) {
        return Err(invalid("square side must lie in [0, 1)"));
    }
    Ok(BinarySignal::from_fn(g, |i| {
        let [row, col] = g.position(i);
        let dx = circle_dist(col as f64 / n as f64, center[0]);
        let dy = circle_dist(row as f64 / n as f64, center[1]);
        dx < side / 2.0 && dy < side / 2.0
    }))
}

/// 1D bars: sample `c` takes the pattern bit `⌊c·len/n⌋`, so each bit spans
/// an equal share of the line.
pub fn barcode_profile(pattern: &str, n: usize) -> Result<BinarySignal> {
    let bits = pattern
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(invalid(alloc::format!("barcode pattern holds '{other}', expected 0 or 1"))),
        })
        .collect::<Result<Vec<bool>>>()?;
    if bits.is_empty() {
        return Err(invalid("barcode pattern is empty"));
    }
    if bits.len() > n {
        return Err(invalid("barcode pattern is longer than the signal"));
    }
    let profile: Vec<bool> = (0..n).map(|c| bits[c * bits.len() / n]).collect();
    BinarySignal::from_bits(GridGeometry::line(n)?, &profile)
}

/// Vertical bars: the profile `barcode_profile(pattern, width)` down every
/// row. Grids are square, so `width` must equal `height`.
pub fn gen_barcode(pattern: &str, width: usize, height: usize) -> Result<BinarySignal> {
    if width != height {
        return Err(invalid("only square images are supported"));
    }
    extrude_columns(&barcode_profile(pattern, width)?)
}

/// Repeats a 1D profile down every row of a square image.
pub fn extrude_columns(profile: &BinarySignal) -> Result<BinarySignal> {
    let g1 = profile.geometry();
    if g1.h() != 1 {
        return Err(crate::Error::WrongDimension { expected: 1, found: g1.h() });
    }
    let g = GridGeometry::square(g1.n())?;
    Ok(BinarySignal::from_fn(g, |i| profile.bit(g.position(i)[1] - 1)))
}

/// Adds i.i.d. `N(0, std²)` noise to every sample.
pub fn add_noise(u: &RealSignal, std: f64, seed: u64) -> Result<RealSignal> {
    check_std(std)?;
    let mut rng = seeded(seed);
    let mut gauss = Gaussian::new();
    let values = u.values().iter().map(|&v| v + std * gauss.sample(&mut rng)).collect();
    RealSignal::new(u.geometry(), values)
}

/// Adds noise of standard deviation `std` to the real and imaginary part of
/// each `±k` pair (conjugated on `−k`) and to the real part of
/// self-conjugate coefficients, keeping the set Hermitian.
pub fn add_measurement_noise(b: &MeasurementSet, std: f64, seed: u64) -> Result<MeasurementSet> {
    check_std(std)?;
    let mask = b.mask();
    let g = mask.geometry();
    let mut rng = seeded(seed);
    let mut gauss = Gaussian::new();
    let mut values = b.values().to_vec();
    let pos = |idx: usize| mask.indices().binary_search(&idx).expect("mask is conjugate-closed");
    for (idx, self_conj) in mask.representatives() {
        let p = pos(idx);
        if self_conj {
            values[p].re += std * gauss.sample(&mut rng);
        } else {
            let e = Complex64::new(std * gauss.sample(&mut rng), std * gauss.sample(&mut rng));
            values[p] += e;
            values[pos(g.conj_index(idx))] += e.conj();
        }
    }
    MeasurementSet::new(mask.clone(), values)
}

fn check_std(std: f64) -> Result<()> {
    if !(std >= 0.0) || !std.is_finite() {
        return Err(invalid("noise standard deviation must be finite and nonnegative"));
    }
    Ok(())
}
