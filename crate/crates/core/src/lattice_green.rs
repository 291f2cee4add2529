//! Lattice Green's function `h(x,d,z) = −δ_{x,0} + Σ_m c_m(x) z^m` of the
//! nearest-neighbour walk (`c_m(x)` = number of length-`m` walks from 0 to
//! `x`), first-hit matrices and first-hit determinants, and the exact walk
//! generating functions built from them.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use rustc_hash::FxHashMap;
use std::f64::consts::PI;

use crate::error::{arg, Error, Result};
use crate::series::PowerSeries;
use crate::special_fn::elliptic_k;

/// Default absolute accuracy for [`h_eval`] callers that do not choose one.
pub const DEFAULT_TOL: f64 = 1e-13;
const MAX_TERMS_2D: usize = 4_000_000;
const MAX_TERMS_3D: usize = 160;

/// Distinct lattice points `Y_1 = 0, Y_2, …, Y_r` in `Z²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointConfig {
    points: Vec<[i64; 2]>,
}

impl PointConfig {
    pub fn new(points: Vec<[i64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return arg("point configuration is empty");
        }
        if points[0] != [0, 0] {
            return arg("first point must be the origin");
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return arg(format!("points {j} and {i} coincide"));
                }
            }
        }
        Ok(PointConfig { points })
    }

    pub fn r(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[[i64; 2]] {
        &self.points
    }

    /// Configuration of the first `k` points.
    pub fn prefix(&self, k: usize) -> Self {
        PointConfig { points: self.points[..k].to_vec() }
    }
}

/// Exact counts of nearest-neighbour walks of length `0..=n` from the origin
/// to `x` in `Z^d`.
pub fn walk_count_series(x: &[i64], d: usize, n: usize) -> Result<PowerSeries> {
    if x.len() != d {
        return arg(format!("point has {} coordinates but d = {d}", x.len()));
    }
    if n > 60 {
        return arg(format!("order {n} exceeds 60"));
    }
    match d {
        2 => Ok(walk_counts_2d(x, n)),
        3 => Ok(walk_counts_3d(x, n)),
        _ => arg(format!("dimension {d} not supported")),
    }
}

// Dense DP on the box of radius n; 4^60 < 2^128 so u128 never overflows.
fn walk_counts_2d(x: &[i64], n: usize) -> PowerSeries {
    let w = 2 * n + 1;
    let idx = |a: i64, b: i64| ((a + n as i64) as usize) * w + (b + n as i64) as usize;
    let mut cur = vec![0u128; w * w];
    cur[idx(0, 0)] = 1;
    let inside = |a: i64, b: i64| a.abs() <= n as i64 && b.abs() <= n as i64;
    let target = (x[0], x[1]);
    let mut out: Vec<BigInt> = Vec::with_capacity(n + 1);
    let read = |v: &[u128]| if inside(target.0, target.1) { v[idx(target.0, target.1)] } else { 0 };
    out.push(read(&cur).into());
    for s in 1..=n {
        let mut next = vec![0u128; w * w];
        let rad = s as i64;
        for a in -rad..=rad {
            for b in -(rad - a.abs())..=(rad - a.abs()) {
                let mut v = 0u128;
                for (da, db) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let (pa, pb) = (a + da, b + db);
                    if inside(pa, pb) {
                        v += cur[idx(pa, pb)];
                    }
                }
                next[idx(a, b)] = v;
            }
        }
        cur = next;
        out.push(read(&cur).into());
    }
    PowerSeries::from_integers(out)
}

// Sparse DP restricted to cells that can still reach x.
fn walk_counts_3d(x: &[i64], n: usize) -> PowerSeries {
    let t = [x[0], x[1], x[2]];
    let dist = |p: &[i64; 3]| (p[0] - t[0]).abs() + (p[1] - t[1]).abs() + (p[2] - t[2]).abs();
    let mut cur: FxHashMap<[i64; 3], BigUint> = FxHashMap::default();
    cur.insert([0, 0, 0], BigUint::from(1u8));
    let mut out: Vec<BigInt> = vec![cur.get(&t).cloned().unwrap_or_default().into()];
    for s in 1..=n {
        let left = (n - s) as i64;
        let mut next: FxHashMap<[i64; 3], BigUint> = FxHashMap::default();
        for (p, v) in &cur {
            for k in 0..3 {
                for sgn in [-1, 1] {
                    let mut q = *p;
                    q[k] += sgn;
                    if dist(&q) <= left {
                        *next.entry(q).or_default() += v;
                    }
                }
            }
        }
        cur = next;
        out.push(cur.get(&t).cloned().unwrap_or_default().into());
    }
    PowerSeries::from_integers(out)
}

/// Series of `h(x,d,z)`: walk counts with the constant 1 removed at `x = 0`.
pub fn h_series(x: &[i64], d: usize, n: usize) -> Result<PowerSeries> {
    let mut s = walk_count_series(x, d, n)?;
    if x.iter().all(|&c| c == 0) {
        s = s.sub(&PowerSeries::one(n + 1));
    }
    Ok(s)
}

/// Value of `h` together with a rigorous bound on the discarded tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// `h(x,d,z)` for `|z| < 1/(2d)` by the truncated walk-count series. The
/// truncation order is the smallest one whose geometric tail bound is below
/// `tol`; if that order is out of reach the call fails with a precision
/// error instead of returning an unreliable value.
pub fn h_eval(x: &[i64], d: usize, z: Complex64, tol: f64) -> Result<HValue> {
    if x.len() != d {
        return arg(format!("point has {} coordinates but d = {d}", x.len()));
    }
    let rho = 2.0 * d as f64 * z.norm();
    if rho >= 1.0 {
        return Err(Error::Precision(format!("|z| = {} is outside the disk of convergence", z.norm())));
    }
    match d {
        2 => h_eval_2d(x, z, rho, tol),
        3 => h_eval_3d(x, z, rho, tol),
        _ => arg(format!("dimension {d} not supported")),
    }
}

// Tail bound for d = 2 from c_m(x) ≤ C(m,⌊m/2⌋)² ≤ 4^m·2/(πm).
fn tail_2d(n: usize, rho: f64) -> f64 {
    let m = (n + 1) as f64;
    2.0 / (PI * m) * rho.powf(m) / (1.0 - rho)
}

fn h_eval_2d(x: &[i64], z: Complex64, rho: f64, tol: f64) -> Result<HValue> {
    let mut n = 1usize;
    while tail_2d(n, rho) > tol {
        n = if n < 64 { n + 1 } else { n + n / 8 };
        if n > MAX_TERMS_2D {
            return Err(Error::Precision(format!(
                "|z| = {} too close to 1/4 for accuracy {tol:e}",
                z.norm()
            )));
        }
    }
    // c_m(x) = C(m,(m+u)/2)·C(m,(m+v)/2) with u = x1+x2, v = x1−x2.
    let (u, v) = (x[0] + x[1], x[0] - x[1]);
    let mut m = u.unsigned_abs().max(v.unsigned_abs()) as usize;
    let origin = u == 0 && v == 0;
    if origin {
        m = 2;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    if m <= n {
        let a = ((m as i64 + u) / 2) as u64;
        let b = ((m as i64 + v) / 2) as u64;
        let mut t = z.powu(m as u32) * binom_f(m as u64, a) * binom_f(m as u64, b);
        let (mut a, mut b) = (a as f64, b as f64);
        let z2 = z * z;
        while m <= n {
            sum += t;
            let mf = m as f64;
            let f = (mf + 2.0) * (mf + 1.0);
            t *= z2 * (f / ((a + 1.0) * (mf - a + 1.0))) * (f / ((b + 1.0) * (mf - b + 1.0)));
            a += 1.0;
            b += 1.0;
            m += 2;
        }
    }
    Ok(HValue { value: sum, tail_bound: tail_2d(n, rho), terms: n })
}

fn binom_f(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn h_eval_3d(x: &[i64], z: Complex64, rho: f64, tol: f64) -> Result<HValue> {
    let bound = |n: usize| rho.powi(n as i32 + 1) / (1.0 - rho);
    let mut n = 1usize;
    while bound(n) > tol {
        n += 1;
        if n > MAX_TERMS_3D {
            return Err(Error::Precision(format!(
                "|z| = {} too close to 1/6 for accuracy {tol:e}",
                z.norm()
            )));
        }
    }
    let t = [x[0], x[1], x[2]];
    let dist = |p: &[i64; 3]| (p[0] - t[0]).abs() + (p[1] - t[1]).abs() + (p[2] - t[2]).abs();
    let mut cur: FxHashMap<[i64; 3], f64> = FxHashMap::default();
    cur.insert([0, 0, 0], 1.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut zp = Complex64::new(1.0, 0.0);
    for s in 1..=n {
        zp *= z;
        let left = (n - s) as i64;
        let mut next: FxHashMap<[i64; 3], f64> = FxHashMap::default();
        for (p, v) in &cur {
            for k in 0..3 {
                for sgn in [-1, 1] {
                    let mut q = *p;
                    q[k] += sgn;
                    if dist(&q) <= left {
                        *next.entry(q).or_default() += v;
                    }
                }
            }
        }
        cur = next;
        sum += zp * cur.get(&t).copied().unwrap_or(0.0);
    }
    Ok(HValue { value: sum, tail_bound: bound(n), terms: n })
}

/// `h(0,2,z) = (2/π)·K(16z²) − 1` through the elliptic integral.
pub fn h0_elliptic(z: Complex64) -> Result<Complex64> {
    Ok(elliptic_k(16.0 * z * z)? * (2.0 / PI) - 1.0)
}

/// `h(x,2,z)` to accuracy [`DEFAULT_TOL`]; at `x = 0` the elliptic form is
/// used, which stays accurate up to the boundary of the disk.
pub fn h2(x: [i64; 2], z: Complex64) -> Result<Complex64> {
    if x == [0, 0] {
        if z.norm() > 0.25 {
            return Err(Error::Precision(format!("|z| = {} outside the closed disk", z.norm())));
        }
        return h0_elliptic(z);
    }
    Ok(h_eval(&x, 2, z, DEFAULT_TOL)?.value)
}

/// First-hit matrix `U_{ij} = h(Y_i − Y_j, 2, z)/(1 + h(0,2,z))`, including
/// its diagonal `h(0)/(1+h(0))`.
pub fn first_hit_matrix(y: &PointConfig, z: Complex64) -> Result<Vec<Vec<Complex64>>> {
    let h0 = h2([0, 0], z)?;
    let den = 1.0 + h0;
    if den.norm() == 0.0 {
        return Err(Error::Numeric("1 + h(0) vanishes".into()));
    }
    let p = y.points();
    let r = p.len();
    let mut cache: FxHashMap<[i64; 2], Complex64> = FxHashMap::default();
    let mut u = vec![vec![Complex64::new(0.0, 0.0); r]; r];
    for i in 0..r {
        for j in 0..r {
            if i == j {
                u[i][j] = h0 / den;
                continue;
            }
            // h is symmetric under x → −x
            let mut d = [p[i][0] - p[j][0], p[i][1] - p[j][1]];
            if (d[0], d[1]) < (0, 0) {
                d = [-d[0], -d[1]];
            }
            let v = match cache.get(&d) {
                Some(&v) => v,
                None => {
                    let v = h2(d, z)?;
                    cache.insert(d, v);
                    v
                }
            };
            u[i][j] = v / den;
        }
    }
    Ok(u)
}

/// First-hit determinant `Δ_r(Y,z) = det(1 + U)` where the diagonal of `U`
/// does not enter (a walk does not "hit" the point it starts from), so
/// `Δ_1 ≡ 1` and `Δ_2 = 1 − U_{12}²`.
pub fn delta_r(y: &PointConfig, z: Complex64) -> Result<Complex64> {
    if y.r() == 1 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut m = first_hit_matrix(y, z)?;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    Ok(det_complex(m))
}

/// Determinant by LU decomposition with partial pivoting.
pub fn det_complex(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm())).unwrap();
        if a[p][k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
        }
    }
    det
}

/// Cholesky factorization of a real symmetric matrix; `None` unless it is
/// positive definite.
pub fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

fn h0_over_one_plus(n: usize) -> (PowerSeries, PowerSeries) {
    let h0 = h_series(&[0, 0], 2, n).expect("valid order");
    let inv = h0.add(&PowerSeries::one(n + 1)).inverse().expect("unit constant term");
    (h0.mul(&inv), inv)
}

/// Exact series of `h(x,2,z)/(1+h(0,2,z))`, the generating function of walks
/// from the origin that hit `x ≠ 0` for the first time at their last step.
pub fn first_hit_series(x: [i64; 2], n: usize) -> Result<PowerSeries> {
    if x == [0, 0] {
        return arg("first-hit series needs x != 0");
    }
    let (_, inv) = h0_over_one_plus(n);
    Ok(h_series(&x, 2, n)?.mul(&inv))
}

/// `z·d/dz (1/k)·(h₀/(1+h₀))^k`: the generating function of
/// `Σ_w N_{2k}(w)` over closed walks `w`, by length.
pub fn first_moment_gf(k: u32, n: usize) -> Result<PowerSeries> {
    if k == 0 {
        return arg("k must be at least 1");
    }
    if n > 40 {
        return arg(format!("order {n} exceeds 40"));
    }
    let (q, _) = h0_over_one_plus(n);
    Ok(q.pow(k).z_d_dz().scale(&BigRational::new(1.into(), (k as i64).into())))
}

/// `h(y)²/(1+h₀)²·(h₀/(1+h₀))^{k−1}`: closed walks visiting `−y` exactly
/// `k` times, by length.
pub fn multiplicity_fixed_gf(y: [i64; 2], k: u32, n: usize) -> Result<PowerSeries> {
    if y == [0, 0] {
        return arg("y must be nonzero");
    }
    if k == 0 {
        return arg("k must be at least 1");
    }
    let (q, inv) = h0_over_one_plus(n);
    let hy = h_series(&y, 2, n)?.mul(&inv);
    Ok(hy.mul(&hy).mul(&q.pow(k - 1)))
}

/// Generating function of `Σ_w C(N₂(w), 2)` over closed walks: pairs of
/// distinct points each visited once. Evaluated as
/// `½·z·d/dz Σ_{x≠0} φ_x/((1+h₀)²(1−φ_x)²)` with `φ_x = (h(x)/(1+h₀))²`;
/// points with `2|x|₁ > n` do not contribute below order `n+1`.
pub fn distinct_pair_gf(n: usize) -> Result<PowerSeries> {
    let (_, inv) = h0_over_one_plus(n);
    let inv2 = inv.mul(&inv);
    let mut acc = PowerSeries::zero(n + 1);
    let rad = (n / 2) as i64;
    for a in -rad..=rad {
        for b in -(rad - a.abs())..=(rad - a.abs()) {
            if a == 0 && b == 0 {
                continue;
            }
            let u = h_series(&[a, b], 2, n)?.mul(&inv);
            let phi = u.mul(&u);
            let one_minus = PowerSeries::one(n + 1).sub(&phi);
            let den = one_minus.mul(&one_minus).inverse().expect("unit constant term");
            acc = acc.add(&phi.mul(&inv2).mul(&den));
        }
    }
    Ok(acc.z_d_dz().scale(&BigRational::new(1.into(), 2.into())))
}
