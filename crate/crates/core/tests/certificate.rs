mod support;

use binrec_core::certificate::{
    certify_unique, kernel_witness, lowfreq_certificate, robustness_margin, trig_interpolant, Certification,
};
use binrec_core::fourier::{measure, FrequencyMask};
use binrec_core::generate::{add_measurement_noise, gen_random_intervals};
use binrec_core::signal::hamming;
use binrec_core::solver::{reconstruct, SolverConfig};
use binrec_core::{BinarySignal, GridGeometry};
use proptest::prelude::*;
use rand::Rng;
use support::rng;

fn random_bits(g: GridGeometry, r: &mut impl Rng, p: f64) -> BinarySignal {
    let bits: Vec<bool> = (0..g.len()).map(|_| r.gen_bool(p)).collect();
    BinarySignal::from_bits(g, &bits).unwrap()
}

#[test]
fn exactly_one_alternative_holds() {
    let mut r = rng(21);
    let mut both_sides = [0usize; 2];
    for trial in 0..500 {
        let g = match trial % 4 {
            0 => GridGeometry::line(8).unwrap(),
            1 => GridGeometry::line(16).unwrap(),
            2 => GridGeometry::line(32).unwrap(),
            _ => GridGeometry::square(4).unwrap(),
        };
        let p = r.gen_range(0.2..0.8);
        let u0 = random_bits(g, &mut r, p);
        let rank = r.gen_range(1..=g.len());
        let mask = FrequencyMask::random(g, rank, r.gen(), false).unwrap();
        let cert = certify_unique(&u0, &mask).unwrap();
        let witness = kernel_witness(&u0, &mask).unwrap();
        if cert.optimum().abs() <= 1e-7 && cert.is_certified() == witness.is_some() {
            // Inside the tolerance band the two LPs may both be inconclusive.
            eprintln!("trial {trial}: margin {} within the tolerance band", cert.optimum());
            continue;
        }
        assert_ne!(cert.is_certified(), witness.is_some(), "trial {trial}: margin {}", cert.optimum());
        both_sides[cert.is_certified() as usize] += 1;
    }
    assert!(both_sides[0] > 50 && both_sides[1] > 50, "{both_sides:?}");
}

#[test]
fn low_frequency_tightness() {
    let mut r = rng(22);
    for trial in 0..120u64 {
        let n = [16usize, 32, 64][trial as usize % 3];
        let d = r.gen_range(1..=8.min(n / 2));
        let u0 = gen_random_intervals(n, d, trial).unwrap();
        let g = u0.geometry();
        assert!(certify_unique(&u0, &FrequencyMask::lowpass(g, d)).unwrap().is_certified(), "N={n} d={d}");
        let below = certify_unique(&u0, &FrequencyMask::lowpass(g, d - 1)).unwrap();
        assert!(matches!(below, Certification::NotCertifiable { .. }), "N={n} d={d}");
        assert!(kernel_witness(&u0, &FrequencyMask::lowpass(g, d - 1)).unwrap().is_some(), "N={n} d={d} margin {}", below.optimum());
    }
}

#[test]
fn constructed_certificate_margin_positive() {
    for trial in 0..300u64 {
        let n = 8 + 2 * (trial as usize % 29);
        let d = 1 + trial as usize % (n / 4);
        let u0 = gen_random_intervals(n, d, trial).unwrap();
        let c = lowfreq_certificate(&u0).unwrap();
        assert!(c.margin > 0.0, "N={n} d={d}");
        assert_eq!(c.eta.mask(), &FrequencyMask::lowpass(u0.geometry(), d));
    }
}

#[test]
fn noise_below_half_margin_is_harmless() {
    let mut r = rng(23);
    for trial in 0..20u64 {
        let n = 32;
        let d = r.gen_range(1..=4);
        let u0 = gen_random_intervals(n, d, 100 + trial).unwrap();
        let c = lowfreq_certificate(&u0).unwrap();
        let h = robustness_margin(&c).unwrap();
        let mask = FrequencyMask::lowpass(u0.geometry(), d);
        let b = measure(&u0.to_real(), &mask).unwrap();
        let raw = add_measurement_noise(&b, 1.0, trial).unwrap().add(&b.scale(-1.0)).unwrap();
        let eps = raw.scale(0.9 * h / raw.energy().sqrt());
        let noisy = b.add(&eps).unwrap();
        // Run to the least-squares minimizer; no discrepancy stop.
        let cfg = SolverConfig { tol: Some(1e-300), max_iters: 100_000, ..SolverConfig::default() };
        let rec = reconstruct(&noisy, &cfg).unwrap();
        assert_eq!(hamming(&rec.binary, &u0).unwrap(), 0, "trial {trial}, d={d}, h={h}");
    }
}

proptest! {
    #[test]
    fn interpolant_is_hermitian_of_exact_degree(mut pts in prop::collection::vec(0.0f64..1.0, 1..10)) {
        if pts.len() % 2 == 1 {
            pts.pop();
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        prop_assume!(pts.len() % 2 == 0 && !pts.is_empty());
        prop_assume!(pts.windows(2).all(|w| w[1] - w[0] > 1e-6));
        let p = trig_interpolant(&pts).unwrap();
        let n = p.degree() as i64;
        prop_assert_eq!(p.coeffs().len() as i64, 2 * n + 1);
        prop_assert!(p.coeff(n).norm() > 0.0);
        for m in -n..=n {
            prop_assert!((p.coeff(-m) - p.coeff(m).conj()).norm() < 1e-12);
        }
        for &t in &pts {
            prop_assert!(p.eval(t).norm() < 1e-9);
        }
    }
}
