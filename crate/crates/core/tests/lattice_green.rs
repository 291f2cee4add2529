use multipoint::lattice_green::*;
use multipoint::walk_oracle::enumerate_closed;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// Walks of length m from 0 whose first arrival at x is the last step.
fn first_hit_counts(x: (i64, i64), m_max: usize) -> Vec<u64> {
    fn go(p: (i64, i64), x: (i64, i64), depth: usize, m_max: usize, out: &mut Vec<u64>) {
        if depth > 0 && p == x {
            out[depth] += 1;
            return;
        }
        if depth == m_max {
            return;
        }
        for d in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let q = (p.0 + d.0, p.1 + d.1);
            if (((q.0 - x.0).abs() + (q.1 - x.1).abs()) as usize) < m_max - depth {
                go(q, x, depth + 1, m_max, out);
            }
        }
    }
    let mut out = vec![0; m_max + 1];
    go((0, 0), x, 0, m_max, &mut out);
    out
}

#[test]
fn walk_counts_small_orders() {
    let s = walk_count_series(&[1, 0], 2, 5).unwrap();
    assert_eq!(s.int_coeff(1), Some(BigInt::from(1)));
    assert_eq!(s.int_coeff(3), Some(BigInt::from(9)));
    let o = walk_count_series(&[0, 0], 2, 4).unwrap();
    assert_eq!(o.int_coeff(2), Some(BigInt::from(4)));
    assert_eq!(o.int_coeff(4), Some(BigInt::from(36)));
}

#[test]
fn walk_counts_bounded_by_all_walks() {
    for d in [2, 3] {
        let s = walk_count_series(&[0, 0, 0][..d], d, 12).unwrap();
        for m in 0..=12 {
            let bound = BigInt::from(2 * d as u64).pow(m as u32);
            assert!(s.coeff(m).to_integer() <= bound);
        }
    }
}

#[test]
fn first_hit_series_counts_first_hit_walks() {
    let s = first_hit_series([1, 0], 12).unwrap();
    let oracle = first_hit_counts((1, 0), 12);
    for m in 0..=12 {
        assert_eq!(s.int_coeff(m).unwrap().to_u64().unwrap(), oracle[m], "order {m}");
    }
}

#[test]
fn green_function_vanishes_at_zero() {
    for x in [[0i64, 0], [1, 0], [2, 3]] {
        assert_eq!(h_eval(&x, 2, c(0.0, 0.0), 1e-14).unwrap().value, c(0.0, 0.0));
    }
    assert_eq!(h_eval(&[0, 0, 0], 3, c(0.0, 0.0), 1e-14).unwrap().value, c(0.0, 0.0));
}

#[test]
fn series_and_elliptic_routes_agree() {
    for z in [c(0.2, 0.0), c(0.1, 0.12), c(-0.15, 0.05)] {
        let a = h_eval(&[0, 0], 2, z, 1e-13).unwrap().value;
        let b = h0_elliptic(z).unwrap();
        assert!((a - b).norm() < 1e-10, "{z}: {a} vs {b}");
    }
}

#[test]
fn near_singularity_is_refused() {
    assert!(h_eval(&[1, 0], 2, c(0.2499999, 0.0), 1e-13).is_err());
}

#[test]
fn multiplicity_fixed_matches_enumeration() {
    let probes = [[-1i64, 0], [-1, -1]];
    let e = enumerate_closed(10, &[], &probes).unwrap();
    for (p, y) in [[1i64, 0], [1, 1]].iter().enumerate() {
        for k in 1..=3u32 {
            let s = multiplicity_fixed_gf(*y, k, 10).unwrap();
            for len in 0..=10 {
                let expect = e.probe_counts[p].get(k as usize).map_or(0, |v| v[len]);
                assert_eq!(s.int_coeff(len).unwrap().to_u64().unwrap(), expect, "y={y:?} k={k} L={len}");
            }
        }
    }
}

#[test]
fn distinct_pair_identity_low_orders() {
    let e = enumerate_closed(10, &[vec![1, 1], vec![1]], &[]).unwrap();
    let s = distinct_pair_gf(10).unwrap();
    for len in 0..=10 {
        // Σ C(N₂,2) = (Σ N₂² − Σ N₂)/2
        let expect = (e.monomial_sums[0][len] - e.monomial_sums[1][len]) / 2;
        assert_eq!(s.int_coeff(len).unwrap().to_u128().unwrap(), expect, "L={len}");
    }
}

proptest! {
    #[test]
    fn green_function_even_in_x(a in -4i64..5, b in -4i64..5, re in -0.2f64..0.2, im in -0.1f64..0.1) {
        let z = c(re, im);
        let p = h_eval(&[a, b], 2, z, 1e-13).unwrap().value;
        let q = h_eval(&[-a, -b], 2, z, 1e-13).unwrap().value;
        prop_assert!((p - q).norm() < 1e-12);
    }

    #[test]
    fn two_point_determinant(a in -3i64..4, b in 1i64..4, re in -0.2f64..0.2, im in -0.1f64..0.1) {
        let z = c(re, im);
        let y = PointConfig::new(vec![[0, 0], [a, b]]).unwrap();
        let u = h2([a, b], z).unwrap() / (1.0 + h2([0, 0], z).unwrap());
        prop_assert!((delta_r(&y, z).unwrap() - (1.0 - u * u)).norm() < 1e-12);
    }
}
