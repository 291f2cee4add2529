//! Truncated Taylor series with floating coefficients (real or complex).
//!
//! A `Taylor` of length `n` holds `c_0 … c_{n-1}` of `Σ c_i δ^i` around some
//! expansion point that the caller keeps track of. Products truncate to the
//! shorter operand, so derivatives up to order `n-1` at the expansion point
//! are exact up to rounding.

use num_complex::Complex64;
use num_traits::{Num, NumAssign};
use std::ops::{Add, Mul, Neg, Sub};

/// Scalar types usable as coefficients.
pub trait Coef: Copy + Num + NumAssign + Neg<Output = Self> + From<f64> + std::fmt::Debug {}
impl Coef for f64 {}
impl Coef for Complex64 {}

#[derive(Clone, Debug, PartialEq)]
pub struct Taylor<T: Coef> {
    c: Vec<T>,
}

pub type RealTaylor = Taylor<f64>;
pub type ComplexTaylor = Taylor<Complex64>;

impl<T: Coef> Taylor<T> {
    pub fn from_coeffs(c: Vec<T>) -> Self {
        assert!(!c.is_empty(), "series needs at least one coefficient");
        Taylor { c }
    }

    pub fn zero(n: usize) -> Self {
        Taylor { c: vec![T::zero(); n] }
    }

    pub fn constant(v: T, n: usize) -> Self {
        let mut s = Self::zero(n);
        s.c[0] = v;
        s
    }

    /// `a + b·δ`.
    pub fn linear(a: T, b: T, n: usize) -> Self {
        let mut s = Self::constant(a, n);
        if n > 1 {
            s.c[1] = b;
        }
        s
    }

    /// `δ^k` truncated to length `n`.
    pub fn monomial(k: usize, n: usize) -> Self {
        let mut s = Self::zero(n);
        if k < n {
            s.c[k] = T::one();
        }
        s
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeff(&self, i: usize) -> T {
        self.c.get(i).copied().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.c
    }

    pub fn truncate(mut self, n: usize) -> Self {
        self.c.resize(n, T::zero());
        self
    }

    pub fn scale(&self, s: T) -> Self {
        Taylor { c: self.c.iter().map(|&x| x * s).collect() }
    }

    /// Reciprocal; the constant term must be nonzero.
    pub fn recip(&self) -> Self {
        let n = self.len();
        let a0 = self.c[0];
        let mut b = vec![T::zero(); n];
        b[0] = T::one() / a0;
        for k in 1..n {
            let mut s = T::zero();
            for j in 1..=k {
                s += self.c[j] * b[k - j];
            }
            b[k] = -s / a0;
        }
        Taylor { c: b }
    }

    /// Exponential via `e' = e·a'`.
    pub fn exp(&self, exp0: impl Fn(T) -> T) -> Self {
        let n = self.len();
        let mut e = vec![T::zero(); n];
        e[0] = exp0(self.c[0]);
        for k in 1..n {
            let mut s = T::zero();
            for j in 1..=k {
                s += T::from(j as f64) * self.c[j] * e[k - j];
            }
            e[k] = s / T::from(k as f64);
        }
        Taylor { c: e }
    }

    /// Integer power by repeated multiplication (negative via reciprocal).
    pub fn powi(&self, p: i32) -> Self {
        let base = if p < 0 { self.recip() } else { self.clone() };
        let mut out = Self::constant(T::one(), self.len());
        for _ in 0..p.unsigned_abs() {
            out = &out * &base;
        }
        out
    }

    /// `(a + b·δ)^p` for integer `p`, by the binomial series. `a ≠ 0` when
    /// `p < 0`.
    pub fn linear_pow(a: T, b: T, p: i64, n: usize) -> Self {
        let mut c = vec![T::zero(); n];
        if p >= 0 {
            // exact polynomial
            let mut binom = 1.0f64;
            for (i, ci) in c.iter_mut().enumerate().take((p as usize).min(n - 1) + 1) {
                *ci = T::from(binom) * pow_t(a, p - i as i64) * pow_t(b, i as i64);
                binom = binom * (p - i as i64) as f64 / (i + 1) as f64;
            }
        } else {
            let ratio = b / a;
            let mut term = pow_t(a, p);
            for (i, ci) in c.iter_mut().enumerate() {
                *ci = term;
                term = term * ratio * T::from((p - i as i64) as f64 / (i + 1) as f64);
            }
        }
        Taylor { c }
    }

    pub fn derivative(&self) -> Self {
        let n = self.len();
        let mut c = vec![T::zero(); n];
        for i in 1..n {
            c[i - 1] = self.c[i] * T::from(i as f64);
        }
        Taylor { c }
    }

    /// Multiplies by `δ^k`, keeping the length.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.len();
        let mut c = vec![T::zero(); n];
        for i in k..n {
            c[i] = self.c[i - k];
        }
        Taylor { c }
    }

    /// Horner evaluation at `x`.
    pub fn eval(&self, x: T) -> T {
        self.c.iter().rev().fold(T::zero(), |acc, &ci| acc * x + ci)
    }
}

/// `a^p` for integer `p` (negative allowed).
pub fn pow_t<T: Coef>(a: T, p: i64) -> T {
    let mut out = T::one();
    for _ in 0..p.unsigned_abs() {
        out *= a;
    }
    if p < 0 {
        T::one() / out
    } else {
        out
    }
}

impl<T: Coef> Add for &Taylor<T> {
    type Output = Taylor<T>;
    fn add(self, o: &Taylor<T>) -> Taylor<T> {
        let n = self.len().min(o.len());
        Taylor { c: (0..n).map(|i| self.c[i] + o.c[i]).collect() }
    }
}

impl<T: Coef> Sub for &Taylor<T> {
    type Output = Taylor<T>;
    fn sub(self, o: &Taylor<T>) -> Taylor<T> {
        let n = self.len().min(o.len());
        Taylor { c: (0..n).map(|i| self.c[i] - o.c[i]).collect() }
    }
}

impl<T: Coef> Mul for &Taylor<T> {
    type Output = Taylor<T>;
    fn mul(self, o: &Taylor<T>) -> Taylor<T> {
        let n = self.len().min(o.len());
        let mut c = vec![T::zero(); n];
        for i in 0..n {
            if self.c[i] == T::zero() {
                continue;
            }
            for j in 0..n - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Taylor { c }
    }
}

impl<T: Coef> Neg for &Taylor<T> {
    type Output = Taylor<T>;
    fn neg(self) -> Taylor<T> {
        Taylor { c: self.c.iter().map(|&x| -x).collect() }
    }
}
