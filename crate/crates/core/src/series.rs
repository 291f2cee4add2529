//! Exact power series in `z` with rational coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Truncated power series `Σ_{m<len} c_m z^m` with exact rational
/// coefficients. Binary operations truncate to the shorter operand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<BigRational>,
}

impl PowerSeries {
    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least one coefficient");
        PowerSeries { coeffs }
    }

    pub fn from_integers<I: Into<BigInt>>(c: impl IntoIterator<Item = I>) -> Self {
        Self::from_coeffs(c.into_iter().map(|x| BigRational::from_integer(x.into())).collect())
    }

    pub fn zero(len: usize) -> Self {
        PowerSeries { coeffs: vec![BigRational::zero(); len] }
    }

    pub fn one(len: usize) -> Self {
        let mut s = Self::zero(len);
        s.coeffs[0] = BigRational::one();
        s
    }

    /// Number of stored coefficients (truncation order + 1).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeff(&self, m: usize) -> BigRational {
        self.coeffs.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient `m` as an integer, if it is one.
    pub fn int_coeff(&self, m: usize) -> Option<BigInt> {
        let c = self.coeff(m);
        c.is_integer().then(|| c.to_integer())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn truncate(mut self, len: usize) -> Self {
        self.coeffs.resize(len, BigRational::zero());
        self
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.len().min(o.len());
        Self::from_coeffs((0..n).map(|i| &self.coeffs[i] + &o.coeffs[i]).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.len().min(o.len());
        Self::from_coeffs((0..n).map(|i| &self.coeffs[i] - &o.coeffs[i]).collect())
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.len().min(o.len());
        let mut out = vec![BigRational::zero(); n];
        for i in 0..n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                if !o.coeffs[j].is_zero() {
                    out[i + j] += &self.coeffs[i] * &o.coeffs[j];
                }
            }
        }
        Self::from_coeffs(out)
    }

    /// Multiplicative inverse; `None` when the constant term vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return None;
        }
        let n = self.len();
        let mut b: Vec<BigRational> = Vec::with_capacity(n);
        b.push(a0.recip());
        for k in 1..n {
            let mut s = BigRational::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    s += &self.coeffs[j] * &b[k - j];
                }
            }
            b.push(-s / a0);
        }
        Some(Self::from_coeffs(b))
    }

    /// `self / o`; `None` when `o` has vanishing constant term.
    pub fn div(&self, o: &Self) -> Option<Self> {
        Some(self.mul(&o.inverse()?))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.len());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// `z·d/dz`.
    pub fn z_d_dz(&self) -> Self {
        Self::from_coeffs(
            self.coeffs.iter().enumerate().map(|(m, c)| c * BigRational::from_integer(m.into())).collect(),
        )
    }

    /// Largest `|c_m|` as f64, useful for bounds checks.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    }

    /// CSV rows `power,numerator,denominator` with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("power,numerator,denominator\n");
        for (m, c) in self.coeffs.iter().enumerate() {
            s.push_str(&format!("{m},{},{}\n", c.numer(), c.denom()));
        }
        s
    }
}
