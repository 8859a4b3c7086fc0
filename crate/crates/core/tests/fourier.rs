mod support;

use binrec_core::fourier::{
    adjoint_measure, blur, dft_forward, dft_inverse, filter_apply, gaussian_filter, measure, FrequencyMask, MeasurementSet,
    Spectrum,
};
use binrec_core::{Complex64, GridGeometry, RealSignal};
use proptest::prelude::*;
use rand::Rng;
use support::{complex_vec, dft_matrix, random_signal, rng, small_geometries};

fn inner(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x * y.conj()).re).sum()
}

fn random_hermitian(g: GridGeometry, r: &mut impl Rng) -> Spectrum {
    dft_forward(&RealSignal::new(g, (0..g.len()).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap())
}

#[test]
fn matches_dense_matrix() {
    for g in small_geometries(8).into_iter().chain([GridGeometry::line(30).unwrap(), GridGeometry::square(10).unwrap()]) {
        let f = dft_matrix(g);
        let mut r = rng(g.len() as u64);
        let u = random_signal(g, &mut r);
        let dense = &f * complex_vec(u.values());
        let fast = dft_forward(&u);
        for (a, b) in dense.iter().zip(fast.coeffs()) {
            assert!((a - b).norm() < 1e-10 * g.len() as f64, "{g:?}");
        }
    }
}

#[test]
fn adjoint_and_parseval_on_powers_of_two() {
    let mut r = rng(1);
    let sizes = [4usize, 8, 16, 32, 64, 128, 256];
    for trial in 0..1000 {
        let n = sizes[trial % sizes.len()];
        let g = if trial % 2 == 0 { GridGeometry::line(n).unwrap() } else { GridGeometry::square(n.min(32)).unwrap() };
        let u = random_signal(g, &mut r);
        let eta = random_hermitian(g, &mut r);
        let fu = dft_forward(&u);
        // N^h F⁻¹ η.
        let back = dft_inverse(&eta).unwrap();
        let lhs = inner(fu.coeffs(), eta.coeffs());
        let rhs = g.len() as f64 * u.dot(&back).unwrap();
        let scale = fu.energy().sqrt() * eta.energy().sqrt();
        assert!((lhs - rhs).abs() < 1e-9 * scale, "adjoint, {g:?}");
        let energy = g.len() as f64 * u.values().iter().map(|x| x * x).sum::<f64>();
        assert!((fu.energy() - energy).abs() < 1e-9 * energy, "Parseval, {g:?}");
    }
}

#[test]
fn measure_adjoint_pair() {
    let mut r = rng(2);
    for g in small_geometries(16) {
        let mask = FrequencyMask::random(g, g.len() / 2, r.gen(), false).unwrap();
        let u = random_signal(g, &mut r);
        let b = measure(&u, &mask).unwrap();
        let c = measure(&random_signal(g, &mut r), &mask).unwrap();
        let lhs = b.dot(&c).unwrap();
        let rhs = u.dot(&adjoint_measure(&c).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()), "{g:?}");
    }
}

#[test]
fn measure_inverts_mask_supported_spectra() {
    let mut r = rng(3);
    for g in small_geometries(12) {
        let mask = FrequencyMask::lowpass(g, g.n() / 4);
        let full = random_hermitian(g, &mut r);
        let keep = mask.selector();
        let coeffs: Vec<Complex64> =
            full.coeffs().iter().zip(&keep).map(|(&z, &k)| if k { z } else { Complex64::new(0.0, 0.0) }).collect();
        let a = Spectrum::new(g, coeffs).unwrap();
        let b = measure(&dft_inverse(&a).unwrap(), &mask).unwrap();
        let direct: Vec<Complex64> = mask.indices().iter().map(|&i| a.coeffs()[i]).collect();
        let expected = MeasurementSet::new(mask.clone(), direct).unwrap();
        for (x, y) in b.values().iter().zip(expected.values()) {
            assert!((x - y).norm() < 1e-9 * (1.0 + y.norm()));
        }
    }
}

#[test]
fn blur_preserves_mass_and_is_symmetric() {
    let g = GridGeometry::line(64).unwrap();
    let k = gaussian_filter(2.0, 13, g).unwrap();
    let mut r = rng(4);
    let u = random_signal(g, &mut r);
    let w = random_signal(g, &mut r);
    let sum: f64 = u.values().iter().sum();
    assert!((blur(&u, &k).unwrap().values().iter().sum::<f64>() - sum).abs() < 1e-9);
    let ku = filter_apply(&u, &k).unwrap();
    let a = ku.dot(&w).unwrap();
    let b = u.dot(&filter_apply(&w, &k).unwrap()).unwrap();
    assert!((a - b).abs() < 1e-9);
}

proptest! {
    #[test]
    fn masks_are_conjugate_closed(n in 1usize..=24, two_d in any::<bool>(), d in 0usize..12, r_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let g = if two_d { GridGeometry::square(2 * n.min(8)).unwrap() } else { GridGeometry::line(2 * n).unwrap() };
        let low = FrequencyMask::lowpass(g, d);
        prop_assert!(low.is_conjugate_closed());
        let disk = FrequencyMask::disk(g, d as f64 * 0.7).unwrap();
        prop_assert!(disk.is_conjugate_closed());
        let r = ((g.len() as f64) * r_frac) as usize;
        if let Ok(m) = FrequencyMask::random(g, r, seed, false) {
            prop_assert!(m.is_conjugate_closed());
            prop_assert_eq!(m.real_rank(), r);
        }
        prop_assert!(low.complement().is_conjugate_closed());
    }

    #[test]
    fn inverse_round_trip(n in 1usize..=40, seed in any::<u64>()) {
        let g = GridGeometry::line(2 * n).unwrap();
        let u = random_signal(g, &mut rng(seed));
        let back = dft_inverse(&dft_forward(&u)).unwrap();
        for (a, b) in back.values().iter().zip(u.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
