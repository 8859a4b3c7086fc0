//! Grid geometry, binary and real signals, and 1D run structure.
//!
//! Spatial indices run over `{1,…,N}^h` with periodic wrap-around. Values are
//! stored row-major in user order: linear index `(x0-1)*N + (x1-1)` in 2D,
//! `x-1` in 1D. Frequency indices run over `[-N/2, N/2-1]^h` and are stored in
//! natural FFT order (`k mod N` per axis).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridGeometry {
    h: usize,
    n: usize,
}

impl GridGeometry {
    pub fn new(h: usize, n: usize) -> Result<Self> {
        if !(h == 1 || h == 2) || n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGeometry { h, n });
        }
        Ok(GridGeometry { h, n })
    }

    pub fn line(n: usize) -> Result<Self> {
        Self::new(1, n)
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(2, n)
    }

    /// Dimension (1 or 2).
    pub fn h(&self) -> usize {
        self.h
    }

    /// Side length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points, `N^h`.
    pub fn len(&self) -> usize {
        if self.h == 1 {
            self.n
        } else {
            self.n * self.n
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis frequency `k` to its natural FFT slot `k mod N`.
    pub fn freq_slot(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Natural FFT slot to the symmetric frequency in `[-N/2, N/2-1]`.
    pub fn slot_freq(&self, slot: usize) -> i64 {
        let n = self.n as i64;
        let j = slot as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Linear natural index of frequency `k` (length `h`).
    pub fn freq_index(&self, k: &[i64]) -> Result<usize> {
        if k.len() != self.h {
            return Err(Error::WrongDimension { expected: self.h, found: k.len() });
        }
        Ok(match self.h {
            1 => self.freq_slot(k[0]),
            _ => self.freq_slot(k[0]) * self.n + self.freq_slot(k[1]),
        })
    }

    /// Symmetric frequency of a linear natural index; unused axes are 0.
    pub fn index_freq(&self, idx: usize) -> [i64; 2] {
        match self.h {
            1 => [self.slot_freq(idx), 0],
            _ => [self.slot_freq(idx / self.n), self.slot_freq(idx % self.n)],
        }
    }

    /// Linear natural index of `-k` for the frequency stored at `idx`.
    pub fn conj_index(&self, idx: usize) -> usize {
        let n = self.n;
        let neg = |s: usize| (n - s) % n;
        match self.h {
            1 => neg(idx),
            _ => neg(idx / n) * n + neg(idx % n),
        }
    }

    /// Euclidean length of the symmetric frequency stored at `idx`.
    pub fn freq_norm(&self, idx: usize) -> f64 {
        let [a, b] = self.index_freq(idx);
        crate::math::sqrt((a * a + b * b) as f64)
    }

    /// 1-based spatial coordinates of a linear user-order index.
    pub fn position(&self, idx: usize) -> [usize; 2] {
        match self.h {
            1 => [idx + 1, 0],
            _ => [idx / self.n + 1, idx % self.n + 1],
        }
    }

    pub(crate) fn check_same(&self, other: &GridGeometry) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GeometryMismatch)
        }
    }
}

/// Real-valued signal on a grid; solver iterates and certificates live here.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSignal {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl RealSignal {
    pub fn new(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(invalid("value count does not match geometry"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(alloc::format!("non-finite value at index {i}")));
        }
        Ok(RealSignal { geometry, values })
    }

    pub(crate) fn from_raw(geometry: GridGeometry, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), geometry.len());
        RealSignal { geometry, values }
    }

    pub fn zeros(geometry: GridGeometry) -> Self {
        RealSignal { geometry, values: vec![0.0; geometry.len()] }
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealSignal {
        RealSignal::from_raw(self.geometry, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Real inner product.
    pub fn dot(&self, other: &RealSignal) -> Result<f64> {
        self.geometry.check_same(&other.geometry)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    pub fn norm(&self) -> f64 {
        crate::math::l2(&self.values)
    }
}

/// `{0,1}`-valued signal, stored as exact `0.0`/`1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySignal {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl BinarySignal {
    pub fn new(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(invalid("value count does not match geometry"));
        }
        if let Some((index, &value)) =
            values.iter().enumerate().find(|(_, &v)| v != 0.0 && v != 1.0)
        {
            return Err(Error::NotBinary { index, value });
        }
        Ok(BinarySignal { geometry, values })
    }

    pub fn from_bits(geometry: GridGeometry, bits: &[bool]) -> Result<Self> {
        let values = bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self::new(geometry, values)
    }

    /// Builds a signal from a predicate over linear user-order indices.
    pub fn from_fn(geometry: GridGeometry, f: impl Fn(usize) -> bool) -> Self {
        let values = (0..geometry.len()).map(|i| if f(i) { 1.0 } else { 0.0 }).collect();
        BinarySignal { geometry, values }
    }

    pub fn constant(geometry: GridGeometry, one: bool) -> Self {
        Self::from_fn(geometry, |_| one)
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bit(&self, idx: usize) -> bool {
        self.values[idx] == 1.0
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        self.values.iter().map(|&v| v == 1.0)
    }

    pub fn ones(&self) -> usize {
        self.bits().filter(|&b| b).count()
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    /// `1 - u`.
    pub fn complement(&self) -> BinarySignal {
        BinarySignal::from_raw(self.geometry, self.values.iter().map(|v| 1.0 - v).collect())
    }

    pub fn to_real(&self) -> RealSignal {
        RealSignal::from_raw(self.geometry, self.values.clone())
    }

    pub(crate) fn from_raw(geometry: GridGeometry, values: Vec<f64>) -> Self {
        BinarySignal { geometry, values }
    }
}

/// One constant run of a periodic 1D binary signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    /// 1-based start index.
    pub start: usize,
    pub len: usize,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalDecomposition {
    pub n: usize,
    /// First entry is the run containing index 1.
    pub intervals: Vec<Interval>,
    /// Half the interval count; 0 for a constant signal.
    pub d: usize,
}

impl IntervalDecomposition {
    /// Rebuilds the signal the decomposition describes.
    pub fn rebuild(&self) -> Result<BinarySignal> {
        let geometry = GridGeometry::line(self.n)?;
        let mut values = vec![0.0; self.n];
        for iv in &self.intervals {
            for off in 0..iv.len {
                values[(iv.start - 1 + off) % self.n] = if iv.value { 1.0 } else { 0.0 };
            }
        }
        BinarySignal::new(geometry, values)
    }

    /// 1-based start indices of all runs, in canonical order.
    pub fn starts(&self) -> Vec<usize> {
        self.intervals.iter().map(|iv| iv.start).collect()
    }
}

/// Splits a periodic 1D binary signal into maximal constant runs, merging the
/// first and last run across the boundary when they share a value.
pub fn interval_decomposition(u: &BinarySignal) -> Result<IntervalDecomposition> {
    let g = u.geometry();
    if g.h() != 1 {
        return Err(Error::WrongDimension { expected: 1, found: g.h() });
    }
    let n = g.n();
    let bits: Vec<bool> = u.bits().collect();
    if u.is_constant() {
        return Ok(IntervalDecomposition {
            n,
            intervals: vec![Interval { start: 1, len: n, value: bits[0] }],
            d: 0,
        });
    }
    let mut runs: Vec<Interval> = Vec::new();
    for (i, &b) in bits.iter().enumerate() {
        match runs.last_mut() {
            Some(last) if last.value == b => last.len += 1,
            _ => runs.push(Interval { start: i + 1, len: 1, value: b }),
        }
    }
    if runs.len() > 1 && runs[0].value == runs[runs.len() - 1].value {
        let tail = runs.pop().expect("at least two runs");
        runs[0].start = tail.start;
        runs[0].len += tail.len;
    }
    let d = runs.len() / 2;
    Ok(IntervalDecomposition { n, intervals: runs, d })
}

/// Rounds each value at 1/2: the closest binary signal.
pub fn threshold(u: &RealSignal) -> BinarySignal {
    BinarySignal::from_raw(
        u.geometry(),
        u.values().iter().map(|&v| if v >= 0.5 { 1.0 } else { 0.0 }).collect(),
    )
}

/// Number of positions where the two signals differ.
pub fn hamming(u: &BinarySignal, w: &BinarySignal) -> Result<usize> {
    u.geometry().check_same(&w.geometry())?;
    Ok(u.values().iter().zip(w.values()).filter(|(a, b)| a != b).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(bits: &[u8]) -> BinarySignal {
        let g = GridGeometry::line(bits.len()).unwrap();
        BinarySignal::new(g, bits.iter().map(|&b| b as f64).collect()).unwrap()
    }

    #[test]
    fn geometry_rejects_odd_and_bad_dimension() {
        assert!(GridGeometry::line(5).is_err());
        assert!(GridGeometry::line(0).is_err());
        assert!(GridGeometry::new(3, 4).is_err());
        assert_eq!(GridGeometry::square(6).unwrap().len(), 36);
    }

    #[test]
    fn slot_freq_bijection() {
        let g = GridGeometry::square(8).unwrap();
        for idx in 0..g.len() {
            let [a, b] = g.index_freq(idx);
            assert!((-4..4).contains(&a) && (-4..4).contains(&b));
            assert_eq!(g.freq_index(&[a, b]).unwrap(), idx);
            let c = g.conj_index(idx);
            let [ca, cb] = g.index_freq(c);
            assert_eq!(g.freq_slot(-a), g.freq_slot(ca));
            assert_eq!(g.freq_slot(-b), g.freq_slot(cb));
        }
        // Nyquist folds onto itself.
        let l = GridGeometry::line(8).unwrap();
        assert_eq!(l.conj_index(l.freq_index(&[-4]).unwrap()), 4);
        assert_eq!(l.freq_index(&[4]).unwrap(), l.freq_index(&[-4]).unwrap());
    }

    #[test]
    fn decomposition_two_runs() {
        let dec = interval_decomposition(&line(&[1, 1, 0, 0])).unwrap();
        assert_eq!(
            dec.intervals,
            vec![
                Interval { start: 1, len: 2, value: true },
                Interval { start: 3, len: 2, value: false }
            ]
        );
        assert_eq!(dec.d, 1);
    }

    #[test]
    fn decomposition_wrap_merge() {
        let dec = interval_decomposition(&line(&[1, 0, 0, 1])).unwrap();
        assert_eq!(
            dec.intervals,
            vec![
                Interval { start: 4, len: 2, value: true },
                Interval { start: 2, len: 2, value: false }
            ]
        );
        assert_eq!(dec.d, 1);
    }

    #[test]
    fn decomposition_constant() {
        let dec = interval_decomposition(&line(&[0, 0, 0, 0])).unwrap();
        assert_eq!(dec.d, 0);
        assert_eq!(dec.intervals.len(), 1);
        assert_eq!(dec.rebuild().unwrap(), line(&[0, 0, 0, 0]));
    }

    #[test]
    fn decomposition_rejects_2d() {
        let g = GridGeometry::square(4).unwrap();
        assert!(interval_decomposition(&BinarySignal::constant(g, true)).is_err());
    }

    #[test]
    fn threshold_boundary() {
        let g = GridGeometry::line(4).unwrap();
        let u = RealSignal::new(g, vec![0.5, 0.499, 1.2, -3.0]).unwrap();
        assert_eq!(threshold(&u).values(), &[1.0, 0.0, 1.0, 0.0]);
        let b = line(&[1, 0, 0, 1]);
        assert_eq!(threshold(&b.to_real()), b);
    }

    #[test]
    fn hamming_examples() {
        let u = line(&[1, 1, 0, 0]);
        assert_eq!(hamming(&u, &u).unwrap(), 0);
        assert_eq!(hamming(&line(&[0, 0, 0, 0]), &line(&[1, 1, 1, 1])).unwrap(), 4);
        assert_eq!(hamming(&u, &line(&[1, 0, 0, 0])).unwrap(), 1);
        assert_eq!(hamming(&u, &line(&[1, 1, 0, 0, 1, 1])), Err(Error::GeometryMismatch));
    }

    #[test]
    fn binary_rejects_non_binary() {
        let g = GridGeometry::line(2).unwrap();
        assert!(matches!(BinarySignal::new(g, vec![0.0, 0.5]), Err(Error::NotBinary { .. })));
        assert!(RealSignal::new(g, vec![0.0, f64::NAN]).is_err());
    }
}
