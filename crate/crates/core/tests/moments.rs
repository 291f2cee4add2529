use multipoint::moments::*;

// Coefficient of ϖ^n in (1−ϖ)^{−m}·ln(1−ϖ)^{−j}, by direct series arithmetic.
fn exact_coeff(m: u32, j: u32, n: usize) -> f64 {
    let len = n + j as usize + 1;
    // ln(1−ϖ) = −ϖ·S(ϖ), S = Σ ϖ^i/(i+1)
    let s: Vec<f64> = (0..len).map(|i| 1.0 / (i + 1) as f64).collect();
    let mut inv = vec![0.0; len];
    inv[0] = 1.0;
    for k in 1..len {
        let mut acc = 0.0;
        for i in 1..=k {
            acc += s[i] * inv[k - i];
        }
        inv[k] = -acc;
    }
    let mut p = vec![0.0; len];
    p[0] = 1.0;
    for _ in 0..j {
        let mut q = vec![0.0; len];
        for (a, &pa) in p.iter().enumerate() {
            if pa != 0.0 {
                for b in 0..len - a {
                    q[a + b] += pa * inv[b];
                }
            }
        }
        p = q;
    }
    for _ in 0..m {
        for k in 1..len {
            p[k] += p[k - 1];
        }
    }
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * p[n + j as usize]
}

fn power_g(j: u32) -> Vec<f64> {
    let mut g = vec![0.0; j as usize + 1];
    g[j as usize] = 1.0;
    g
}

#[test]
fn coeff_asym_tracks_exact_coefficients() {
    for m in 1..=3u32 {
        for j in 1..=3u32 {
            let g = power_g(j);
            // at n = 10⁴ the error falls strictly with each added order
            let n = 10_000;
            let e = exact_coeff(m, j, n);
            let errs: Vec<f64> = (1..=3).map(|mm| ((coeff_asym(&g, m, n as f64, mm).unwrap() - e) / e).abs()).collect();
            assert!(errs[0] > errs[1] && errs[1] > errs[2], "m={m} j={j}: {errs:?}");
            for (i, e) in errs.iter().enumerate() {
                let mm = i as i32 + 1;
                assert!(*e <= 5.0 / (n as f64).ln().powi(mm + 1 - j as i32), "m={m} j={j} M={mm}: {e}");
            }
            // at n = 10³ the O(1/n) terms outside the expansion show up at the
            // 10⁻³ level, so only overall improvement is required
            let n = 1000;
            let e = exact_coeff(m, j, n);
            let e1 = ((coeff_asym(&g, m, n as f64, 1).unwrap() - e) / e).abs();
            let e3 = ((coeff_asym(&g, m, n as f64, 3).unwrap() - e) / e).abs();
            assert!(e3 < e1 && e3 < 0.05, "m={m} j={j}: {e1} {e3}");
        }
    }
}

use multipoint::feynman::{h3, h4, GraphSumRecord, GraphSums, IntegralTable};
use multipoint::graph_enum::enumerate_balanced;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn synthetic_sums(r_max: usize) -> GraphSums {
    let mut s = GraphSums::quadrature_only();
    for r in 3..=r_max {
        s.insert(GraphSumRecord {
            r,
            count: 0,
            sum_i: 1.3 * r as f64,
            sum_i_stderr: 0.01 * r as f64,
            sum_script_i: 2.7 * (r * r) as f64,
            sum_script_i_stderr: 0.02,
            seed: 0,
            budget: 0,
        });
    }
    s
}

// Taylor coefficients of f on a circle of radius ρ by the trapezoid rule.
fn contour_coeffs(f: impl Fn(Complex64) -> Complex64, order: usize, rho: f64) -> Vec<Complex64> {
    let n = 64;
    let vals: Vec<Complex64> = (0..n).map(|k| f(Complex64::from_polar(rho, 2.0 * PI * k as f64 / n as f64))).collect();
    (0..=order)
        .map(|j| {
            let s: Complex64 = vals
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64))
                .sum();
            s / n as f64 / rho.powi(j as i32)
        })
        .collect()
}

#[test]
fn char_series_match_pointwise_contours() {
    let sums = synthetic_sums(5);
    let s = char_closed_series(1.7, 6, 5, &sums).unwrap();
    let c = contour_coeffs(|t| char_closed_value(1.7, t, 5, &sums).unwrap(), 6, 1.0);
    for j in 0..=6 {
        assert!((s.coeffs[j] - c[j]).norm() < 1e-10, "closed {j}: {} vs {}", s.coeffs[j], c[j]);
    }
    let s = char_brownian_series(6, 5, &sums).unwrap();
    let c = contour_coeffs(|t| char_brownian_value(t, 5, &sums).unwrap(), 6, 1.0);
    for j in 0..=6 {
        assert!((s.coeffs[j] - c[j]).norm() < 1e-10, "brownian {j}: {} vs {}", s.coeffs[j], c[j]);
    }
}

#[test]
fn char_coefficients_are_scaled_central_moments() {
    let sums = synthetic_sums(6);
    let closed = char_closed_series(1.0, 6, 6, &sums).unwrap();
    let brown = char_brownian_series(6, 6, &sums).unwrap();
    let fact = |m: usize| (1..=m).map(|i| i as f64).product::<f64>();
    for m in 2..=6 {
        let ks = vec![1; m];
        let cc = central_moment_leading(WalkClass::Closed, &ks, &sums).unwrap().coefficient;
        let cu = central_moment_leading(WalkClass::Unrestricted, &ks, &sums).unwrap().coefficient;
        let scale = fact(m) * (4.0 * PI).powi(m as i32);
        let im = Complex64::i().powi(m as i32);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let ec = im * cc / scale;
        let eu = im * sign * cu / scale;
        assert!((closed.coeffs[m] - ec).norm() < 1e-10 * (1.0 + ec.norm()), "closed m={m}: {} vs {ec}", closed.coeffs[m]);
        assert!((brown.coeffs[m] - eu).norm() < 1e-10 * (1.0 + eu.norm()), "brownian m={m}: {} vs {eu}", brown.coeffs[m]);
    }
}

#[test]
fn char_coefficients_depend_only_on_lower_orders() {
    let a = synthetic_sums(5);
    let mut b = a.clone();
    let mut rec = b.get(4).unwrap().clone();
    rec.sum_i += 1.0;
    rec.sum_script_i -= 2.0;
    b.insert(rec);
    for (x, y) in [
        (char_closed_series(1.0, 6, 5, &a).unwrap(), char_closed_series(1.0, 6, 5, &b).unwrap()),
        (char_brownian_series(6, 5, &a).unwrap(), char_brownian_series(6, 5, &b).unwrap()),
    ] {
        for j in 0..4 {
            assert_eq!(x.coeffs[j], y.coeffs[j]);
        }
        assert_ne!(x.coeffs[5], y.coeffs[5]);
    }
    // raising r_max leaves coefficients below the new order untouched
    let lo = char_closed_series(1.0, 6, 4, &a).unwrap();
    let hi = char_closed_series(1.0, 6, 5, &a).unwrap();
    for j in 0..5 {
        assert_eq!(lo.coeffs[j], hi.coeffs[j]);
    }
}

#[test]
fn char_series_json_round_trip() {
    let s = char_brownian_series(4, 3, &synthetic_sums(3)).unwrap();
    let back = CharSeries::from_json(&s.to_json()).unwrap();
    assert_eq!(back, s);
    assert!(s.to_json().contains("\"r_max\""));
}

#[test]
fn stderr_grows_with_graph_order() {
    let s = char_closed_series(1.0, 5, 4, &synthetic_sums(4)).unwrap();
    assert_eq!(s.stderr[0], 0.0);
    assert_eq!(s.stderr[1], 0.0);
    assert_eq!(s.stderr[2], 0.0);
    assert!(s.stderr[3] > 0.0);
}

#[test]
fn order_two_central_constants() {
    let sums = GraphSums::quadrature_only();
    for class in [WalkClass::Closed, WalkClass::Unrestricted] {
        let a = central_moment_leading(class, &[1, 2], &sums).unwrap().coefficient;
        let b = second_moment_central(class, 1, 2, h3(), h4()).leading;
        assert!((a - b).abs() < 1e-10, "{class:?}: {a} vs {b}");
        assert!(central_moment_leading(class, &[3], &sums).unwrap().coefficient.abs() < 1e-15);
    }
}

#[test]
fn moment_full_symmetric_in_k() {
    let mut table = IntegralTable::default();
    for h in [[1u32, 1, 1], [1, 1, 2], [1, 2, 1], [2, 1, 1]] {
        for (n, f) in enumerate_balanced(3, &h).unwrap().into_iter().enumerate() {
            table.insert_value(f, 0.7 + 0.1 * n as f64, 2.0 + 0.3 * n as f64);
        }
    }
    for class in [WalkClass::Closed, WalkClass::Unrestricted] {
        let a = moment_full(class, &[1, 2, 3], 7, &table).unwrap();
        let b = moment_full(class, &[3, 1, 2], 7, &table).unwrap();
        for j in 0..=7 {
            assert!((a.coeffs[j] - b.coeffs[j]).abs() < 1e-9 * (1.0 + a.coeffs[j].abs()));
        }
        assert!(a.coeffs[6].abs() > 0.0);
    }
}

#[test]
fn moment_full_reports_missing_integrals() {
    let e = moment_full(WalkClass::Closed, &[1, 1, 1], 6, &IntegralTable::default());
    assert!(matches!(e, Err(multipoint::Error::MissingCache(v)) if v.len() == 2));
}

#[test]
fn expansion_csv_row() {
    let e = first_moment_expansion(WalkClass::Closed, 1, 3).unwrap();
    let row = e.csv_row(1000.0);
    assert!(row.starts_with("1000,1,3,"), "{row}");
}

fn direct_central3(raw: &dyn Fn(usize) -> f64) -> f64 {
    // E[(X0−m0)(X1−m1)(X2−m2)] expanded by hand
    let m = [raw(1), raw(2), raw(4)];
    raw(7) - m[0] * raw(6) - m[1] * raw(5) - m[2] * raw(3) + 2.0 * m[0] * m[1] * m[2]
}

proptest! {
    #[test]
    fn centralize_three_variables(v in proptest::collection::vec(-3.0f64..3.0, 8)) {
        let mut raw = v.clone();
        raw[0] = 1.0;
        let direct = direct_central3(&|m| raw[m]);
        prop_assert!((centralize(&raw).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn centralize_first_order_vanishes(x in -10.0f64..10.0) {
        prop_assert_eq!(centralize(&[1.0, x]).unwrap(), 0.0);
    }

    #[test]
    fn centralize_power_matches_binomial(xs in proptest::collection::vec(-2.0f64..2.0, 5..20)) {
        let n = xs.len() as f64;
        let raw: Vec<f64> = (0..5).map(|p| xs.iter().map(|x| x.powi(p)).sum::<f64>() / n).collect();
        let mean = raw[1];
        for q in 2..=4 {
            let direct = xs.iter().map(|x| (x - mean).powi(q as i32)).sum::<f64>() / n;
            prop_assert!((centralize_power(&raw, q).unwrap() - direct).abs() < 1e-10);
        }
    }
}
