//! Special functions: modified Bessel functions, the complete elliptic
//! integral of the first kind, reciprocal Gamma (pointwise and its Taylor
//! coefficients), zeta values, and the vertex functions `f̄_{m,k}(y, C)`.

use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};

use crate::error::{arg, Error, Result};
use crate::taylor::RealTaylor;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Vertex constant for closed walks, `4 ln 2/π − 1`.
pub fn c_closed() -> f64 {
    4.0 * LN_2 / PI - 1.0
}

/// Vertex constant for walks with free endpoints, `3 ln 2/π − 1`.
pub fn c_unrestricted() -> f64 {
    3.0 * LN_2 / PI - 1.0
}

// B_2 … B_18
const BERNOULLI: [f64; 9] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
];

/// Riemann zeta at an integer `s ≥ 2` by Euler–Maclaurin summation.
pub fn zeta(s: u32) -> f64 {
    assert!(s >= 2, "zeta needs s >= 2");
    let n = 12.0f64;
    let sf = s as f64;
    let mut head = 0.0;
    for k in (1..12).rev() {
        head += (k as f64).powf(-sf);
    }
    let mut tail = n.powf(1.0 - sf) / (sf - 1.0) + 0.5 * n.powf(-sf);
    // rising factorial s(s+1)…(s+2j-2) / (2j)!
    let mut rising = sf;
    let mut fact = 2.0;
    for (j, b) in BERNOULLI.iter().enumerate() {
        let jj = (j + 1) as f64;
        tail += b / fact * rising * n.powf(-sf - 2.0 * jj + 1.0);
        rising *= (sf + 2.0 * jj - 1.0) * (sf + 2.0 * jj);
        fact *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
    }
    head + tail
}

// ---------------------------------------------------------------- Bessel K

/// `K₀(x)` and `K₁(x)` for `x > 0`.
pub fn bessel_k01(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return arg(format!("bessel K needs a finite positive argument, got {x}"));
    }
    Ok(if x <= 2.0 { k01_series(x) } else { k01_continued_fraction(x) })
}

/// `K₀(x)` for `x > 0`.
pub fn bessel_k0(x: f64) -> f64 {
    bessel_k01(x).map(|p| p.0).unwrap_or(f64::NAN)
}

/// `K_n(x)` for integer `n ≥ 0`, `x > 0`, by upward recurrence from K₀, K₁.
pub fn bessel_k(n: u32, x: f64) -> Result<f64> {
    let (k0, k1) = bessel_k01(x)?;
    if n == 0 {
        return Ok(k0);
    }
    let (mut a, mut b) = (k0, k1);
    for j in 1..n {
        let c = a + 2.0 * j as f64 / x * b;
        a = b;
        b = c;
    }
    Ok(b)
}

fn k01_series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let l = (0.5 * x).ln();
    // term_k = t^k / (k!)^2 and t^k / (k!(k+1)!)
    let mut a = 1.0;
    let mut b = 1.0;
    let mut psi1 = -EULER_GAMMA; // ψ(k+1)
    let mut psi2 = 1.0 - EULER_GAMMA; // ψ(k+2)
    let (mut i0, mut i1s, mut s0, mut s1) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..60 {
        i0 += a;
        i1s += b;
        s0 += a * psi1;
        s1 += b * (psi1 + psi2);
        let kf = k as f64;
        a *= t / ((kf + 1.0) * (kf + 1.0));
        b *= t / ((kf + 1.0) * (kf + 2.0));
        psi1 += 1.0 / (kf + 1.0);
        psi2 += 1.0 / (kf + 2.0);
        if a < 1e-18 * i0.abs() && b < 1e-18 {
            break;
        }
    }
    let k0 = -l * i0 + s0;
    let i1 = 0.5 * x * i1s;
    let k1 = 1.0 / x + l * i1 - 0.25 * x * s1;
    (k0, k1)
}

// Steed's continued fraction for K_ν, ν = 0 (Temme's normalization).
fn k01_continued_fraction(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        a -= 2.0 * (i - 1) as f64;
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

// ---------------------------------------------------------------- Bessel I

/// `I_n(z)` for integer `n` and complex `z`.
pub fn bessel_i(n: i32, z: Complex64) -> Complex64 {
    let n = n.unsigned_abs();
    let az = z.norm();
    if az <= 8.0 || (n as f64) > az {
        bessel_i_series(n, z)
    } else {
        bessel_i_trapezoid(n, z)
    }
}

fn bessel_i_series(n: u32, z: Complex64) -> Complex64 {
    let half = z * 0.5;
    let t = half * half;
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..400u32 {
        sum += term;
        term *= t / ((k + 1) as f64 * (k + 1 + n) as f64);
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

// I_n(z) = (1/π)∫₀^π e^{z cos θ} cos(nθ) dθ; the trapezoid rule on the full
// period converges geometrically.
fn bessel_i_trapezoid(n: u32, z: Complex64) -> Complex64 {
    let m = 2 * (z.norm().ceil() as usize + n as usize) + 64;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let th = 2.0 * PI * j as f64 / m as f64;
        sum += (z * th.cos()).exp() * (n as f64 * th).cos();
    }
    sum / m as f64
}

// ---------------------------------------------------------------- elliptic K

/// Complete elliptic integral of the first kind `K(m) = ∫₀^{π/2} dθ/√(1 − m sin²θ)`
/// (parameter convention) for complex `m` off the cut `[1, ∞)`, by the
/// arithmetic–geometric mean.
pub fn elliptic_k(m: Complex64) -> Result<Complex64> {
    if m.im == 0.0 && m.re >= 1.0 {
        return arg(format!("elliptic K parameter {m} lies on the branch cut"));
    }
    let mut a = Complex64::new(1.0, 0.0);
    let mut b = (Complex64::new(1.0, 0.0) - m).sqrt();
    for _ in 0..100 {
        let an = (a + b) * 0.5;
        let mut bn = (a * b).sqrt();
        if (an - bn).norm() > (an + bn).norm() {
            bn = -bn;
        }
        a = an;
        b = bn;
        if (a - b).norm() <= 1e-16 * a.norm() {
            break;
        }
    }
    Ok(Complex64::new(PI / 2.0, 0.0) / a)
}

// ---------------------------------------------------------------- Gamma

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `1/Γ(z)` for complex `z` (Lanczos with reflection). Entire; vanishes at
/// the nonpositive integers.
pub fn recip_gamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re == z.re.round() && z.re <= 171.0 {
        if z.re <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let f: f64 = (1..z.re as u32).map(f64::from).product();
        return Complex64::new(1.0 / f, 0.0);
    }
    if z.re < 0.5 {
        // 1/Γ(z) = sin(πz) Γ(1−z) / π
        let s = (z * PI).sin();
        return s / (recip_gamma(Complex64::new(1.0, 0.0) - z) * PI);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    let ln_gamma = 0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln();
    (-ln_gamma).exp()
}

/// Taylor coefficients of `1/Γ(m + τ)` around `τ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecipGammaCoeffs {
    pub m: u32,
    pub coeffs: Vec<f64>,
}

impl RecipGammaCoeffs {
    pub fn get(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }
}

/// Coefficients `γ^{(m)}_0 … γ^{(m)}_M` of `1/Γ(m+τ)`. Built from
/// `ln Γ(1+τ) = −γτ + Σ_{k≥2} (−1)^k ζ(k) τ^k / k`, exponentiated, then
/// divided by `(1+τ)…(m−1+τ)`. `m = 0` is accepted and gives `τ/Γ(1+τ)`.
pub fn recip_gamma_coeffs(m: u32, order: usize) -> Result<RecipGammaCoeffs> {
    if order > 60 {
        return arg(format!("order {order} too large for reciprocal Gamma coefficients"));
    }
    let n = order + 2;
    let mut lg = vec![0.0; n];
    if n > 1 {
        lg[1] = EULER_GAMMA;
    }
    for (k, c) in lg.iter_mut().enumerate().skip(2) {
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        *c = sign * zeta(k as u32) / k as f64;
    }
    let mut c = RealTaylor::from_coeffs(lg).exp(f64::exp).coeffs().to_vec();
    if m == 0 {
        c.insert(0, 0.0);
    }
    for j in 1..m.max(1) {
        // divide by (j + τ)
        let jf = j as f64;
        let mut prev = 0.0;
        for ci in c.iter_mut() {
            let v = (*ci - prev) / jf;
            prev = v;
            *ci = v;
        }
    }
    c.truncate(order + 1);
    Ok(RecipGammaCoeffs { m, coeffs: c })
}

// ---------------------------------------------------------------- vertex functions

/// Binomial coefficient as f64 (zero when `k > n`).
pub fn binom(n: i64, k: i64) -> f64 {
    if k < 0 || n < 0 || k > n {
        return 0.0;
    }
    let mut out = 1.0;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// `Ḡ_{m,k}(y, C) = 1 + (1/m) Σ_{j=1}^{m−1} (πy)^j C(k−1,j) C(m,j+1) / (1−Cπy)^j`.
pub fn vertex_g_bar(m: u32, k: u32, y: f64, c: f64) -> f64 {
    let u = PI * y / (1.0 - c * PI * y);
    let mut s = 0.0;
    for j in 1..m as i64 {
        s += u.powi(j as i32) * binom(k as i64 - 1, j) * binom(m as i64, j + 1);
    }
    1.0 + s / m as f64
}

/// Vertex function `f̄_{m,k}(y, C) = m!(πy)^{m+1}(1−Cπy)^{k−1}/(1−(C+1)πy)^{k+m}·Ḡ_{m,k}`
/// for `m ≥ 1`, `k ≥ 1`.
pub fn vertex_f(m: u32, k: u32, y: f64, c: f64) -> Result<f64> {
    if m == 0 || k == 0 {
        return arg("vertex function needs m >= 1 and k >= 1");
    }
    let den = 1.0 - (c + 1.0) * PI * y;
    let den2 = 1.0 - c * PI * y;
    if den.abs() < 1e-300 || den2.abs() < 1e-300 {
        return Err(Error::Numeric(format!("vertex function pole at y = {y}")));
    }
    let mf: f64 = (1..=m).map(|i| i as f64).product();
    let v = mf * (PI * y).powi(m as i32 + 1) * den2.powi(k as i32 - 1) / den.powi((k + m) as i32)
        * vertex_g_bar(m, k, y, c);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("vertex function overflow at y = {y}")))
    }
}

/// Taylor expansion of `f̄_{m,k}(y0 + δ, C)` in `δ` to length `n`. For
/// `m = 0` this is the single-vertex weight `(1/k)((1−Cπy)/(1−(C+1)πy))^k`,
/// the generating function whose `y`-derivative times `πy²` is `f̄_{1,k}`.
pub fn vertex_taylor(m: u32, k: u32, y0: f64, c: f64, n: usize) -> RealTaylor {
    let lin = |a: f64, b: f64, p: i64| RealTaylor::linear_pow(a, b, p, n);
    let one_c = lin(1.0 - c * PI * y0, -c * PI, 1);
    let kk = k as i64;
    if m == 0 {
        let ratio = &one_c * &lin(1.0 - (c + 1.0) * PI * y0, -(c + 1.0) * PI, -1);
        return ratio.powi(k as i32).scale(1.0 / k as f64);
    }
    let mm = m as i64;
    let mf: f64 = (1..=m).map(|i| i as f64).product();
    let py = lin(PI * y0, PI, mm + 1);
    let a = lin(1.0 - c * PI * y0, -c * PI, kk - 1);
    let b = lin(1.0 - (c + 1.0) * PI * y0, -(c + 1.0) * PI, -(kk + mm));
    // Ḡ with u = πy/(1−Cπy)
    let u = &lin(PI * y0, PI, 1) * &lin(1.0 - c * PI * y0, -c * PI, -1);
    let mut g = RealTaylor::constant(1.0, n);
    let mut upow = RealTaylor::constant(1.0, n);
    for j in 1..mm {
        upow = &upow * &u;
        let w = binom(kk - 1, j) * binom(mm, j + 1) / mm as f64;
        if w != 0.0 {
            g = &g + &upow.scale(w);
        }
    }
    (&(&(&py * &a) * &b) * &g).scale(mf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_values() {
        assert!((zeta(2) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(4) - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(3) - 1.202_056_903_159_594_3).abs() < 1e-15);
        assert!((zeta(40) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k0_small_argument() {
        let x = 1e-6;
        let approx = -(x / 2.0f64).ln() - EULER_GAMMA;
        assert!((bessel_k0(x) - approx).abs() < 1e-10);
        assert!(bessel_k0(1e-300).is_finite());
        assert!(bessel_k01(0.0).is_err());
    }

    #[test]
    fn special_values() {
        assert_eq!(bessel_i(0, Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        let k = elliptic_k(Complex64::new(0.0, 0.0)).unwrap();
        assert!((k.re - PI / 2.0).abs() < 1e-15 && k.im == 0.0);
        assert!(elliptic_k(Complex64::new(1.5, 0.0)).is_err());
    }

    #[test]
    fn recip_gamma_low_orders() {
        let g1 = recip_gamma_coeffs(1, 5).unwrap();
        assert!((g1.get(0) - 1.0).abs() < 1e-16);
        assert!((g1.get(1) - EULER_GAMMA).abs() < 1e-15);
        let expect2 = EULER_GAMMA * EULER_GAMMA / 2.0 - PI * PI / 12.0;
        assert!((g1.get(2) - expect2).abs() < 1e-15);
        let g2 = recip_gamma_coeffs(2, 5).unwrap();
        assert!((g2.get(0) - 1.0).abs() < 1e-16);
        assert!((g2.get(1) - (EULER_GAMMA - 1.0)).abs() < 1e-15);
        let g4 = recip_gamma_coeffs(4, 3).unwrap();
        assert!((g4.get(0) - 1.0 / 6.0).abs() < 1e-16);
        let g0 = recip_gamma_coeffs(0, 4).unwrap();
        assert_eq!(g0.get(0), 0.0);
        assert!((g0.get(2) - EULER_GAMMA).abs() < 1e-15);
    }

    #[test]
    fn vertex_taylor_matches_pointwise() {
        let c = c_closed();
        for &(m, k) in &[(1u32, 1u32), (2, 3), (4, 2), (3, 4)] {
            let y0 = -0.2;
            let t = vertex_taylor(m, k, y0, c, 6);
            let f = vertex_f(m, k, y0, c).unwrap();
            assert!((t.coeff(0) - f).abs() < 1e-13 * f.abs());
            // first Taylor coefficient = derivative = f_{m+1,k}/(π y²)
            let d = vertex_f(m + 1, k, y0, c).unwrap() / (PI * y0 * y0);
            assert!((t.coeff(1) - d).abs() < 1e-12 * d.abs());
        }
        assert_eq!(vertex_f(2, 2, 0.0, c).unwrap(), 0.0);
        assert!((vertex_g_bar(5, 1, -0.3, c) - 1.0).abs() < 1e-16);
    }
}
