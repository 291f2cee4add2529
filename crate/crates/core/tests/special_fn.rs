use multipoint::special_fn::*;
use num_complex::Complex64;
use proptest::prelude::*;

// Reference values from 30-digit arbitrary-precision evaluation.
const K01: [(f64, f64, f64); 8] = [
    (0.001, 7.023_688_800_562_382, 999.996_238_156_085_6),
    (0.1, 2.427_069_024_702_017, 9.853_844_780_870_606),
    (1.0, 0.421_024_438_240_708_33, 0.601_907_230_197_234_6),
    (2.0, 0.113_893_872_749_533_44, 0.139_865_881_816_522_43),
    (2.5, 0.062_347_553_200_366_19, 0.073_890_816_347_747_06),
    (5.0, 0.003_691_098_334_042_594, 0.004_044_613_445_452_164),
    (10.0, 1.778_006_231_616_765_2e-5, 1.864_877_345_382_558_5e-5),
    (30.0, 2.132_477_496_463_056_4e-14, 2.167_732_001_891_549_4e-14),
];

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn bessel_k_reference_values() {
    for &(x, k0, k1) in &K01 {
        let (a, b) = bessel_k01(x).unwrap();
        assert!(rel(a, k0) < 1e-13, "K0({x}) = {a}");
        assert!(rel(b, k1) < 1e-13, "K1({x}) = {b}");
    }
    assert!(rel(bessel_k(3, 1.5).unwrap(), 1.833_803_702_474_579_3) < 1e-13);
}

#[test]
fn bessel_i_reference_values() {
    let a = bessel_i(2, Complex64::new(3.0, 1.0));
    assert!((a - Complex64::new(1.125_394_076_139_128_1, 2.083_138_226_706_609)).norm() < 1e-12);
    let b = bessel_i(5, Complex64::new(12.0, -3.0));
    assert!((b - Complex64::new(-6_810.959_093_757_945, -77.878_278_740_884_13)).norm() / b.norm() < 1e-12);
}

#[test]
fn elliptic_reference_values() {
    let k = |re: f64, im: f64| elliptic_k(Complex64::new(re, im)).unwrap();
    assert!((k(0.5, 0.0).re - 1.854_074_677_301_372).abs() < 1e-14);
    assert!((k(0.3, 0.4) - Complex64::new(1.650_241_925_641_94, 0.209_510_704_123_986_77)).norm() < 1e-13);
    assert!((k(-2.0, 0.0).re - 1.171_420_084_146_77).abs() < 1e-14);
    assert!(elliptic_k(Complex64::new(1.5, 0.0)).is_err());
}

#[test]
fn reciprocal_gamma_reference_values() {
    let a = recip_gamma(Complex64::new(0.3, 0.7));
    assert!((a - Complex64::new(0.373_120_093_742_487_65, 1.032_285_804_528_420_2)).norm() < 1e-13);
    let b = recip_gamma(Complex64::new(-2.5, 0.0));
    assert!((b.re + 1.057_855_469_152_043).abs() < 1e-13);
    assert!(recip_gamma(Complex64::new(-3.0, 0.0)).norm() < 1e-12);
}

#[test]
fn digamma_cancellations() {
    // γ^{(1)}_1 = −ψ(1) = γ and γ^{(2)}_1 = −ψ(2) = γ − 1
    assert!((recip_gamma_coeffs(1, 3).unwrap().get(1) - EULER_GAMMA).abs() < 1e-15);
    assert!((recip_gamma_coeffs(2, 3).unwrap().get(1) - (EULER_GAMMA - 1.0)).abs() < 1e-15);
}

proptest! {
    #[test]
    fn wronskian(x in 0.01f64..40.0) {
        // I0 K1 + I1 K0 = 1/x
        let (k0, k1) = bessel_k01(x).unwrap();
        let z = Complex64::new(x, 0.0);
        let w = bessel_i(0, z).re * k1 + bessel_i(1, z).re * k0;
        prop_assert!((w * x - 1.0).abs() < 1e-11);
    }

    #[test]
    fn k_recurrence(x in 0.05f64..30.0, n in 1u32..6) {
        let kn1 = bessel_k(n + 1, x).unwrap();
        let expect = bessel_k(n - 1, x).unwrap() + 2.0 * n as f64 / x * bessel_k(n, x).unwrap();
        prop_assert!(rel(kn1, expect) < 1e-12);
    }

    #[test]
    fn recip_gamma_coeffs_match_pointwise(m in 0u32..6, tau in -0.5f64..0.5) {
        let c = recip_gamma_coeffs(m, 40).unwrap();
        let series: f64 = (0..=40).rev().fold(0.0, |acc, i| acc * tau + c.get(i));
        let direct = recip_gamma(Complex64::new(m as f64 + tau, 0.0)).re;
        let direct = if m == 0 { tau * recip_gamma(Complex64::new(1.0 + tau, 0.0)).re } else { direct };
        prop_assert!((series - direct).abs() < 1e-13);
    }

    #[test]
    fn vertex_function_taylor_agrees(m in 1u32..5, k in 1u32..5, y in -0.2f64..0.05) {
        let c = c_closed();
        let t = vertex_taylor(m, k, y, c, 3);
        prop_assert!(rel(t.coeff(0), vertex_f(m, k, y, c).unwrap()) < 1e-12);
    }
}
