//! Asymptotic expansions of multiple-point moments and the characteristic
//! functions assembled from graph sums.
//!
//! Everything is expressed through the transform
//!
//! ```text
//! T_γ[g](y) = Σ_i γ_i · y^{i+1} (d/dy)^i (y^{i−1} g(y)),   y = −1/ln n,
//! ```
//!
//! where `γ_i` are Taylor coefficients of a reciprocal Gamma function. On a
//! power series `g = Σ b_J y^J` the transform acts coefficientwise:
//! `y^J ↦ γ_0 b_J + Σ_{1≤i<J} γ_i b_{J−i} (J−1)!/(J−i−1)!`, so expansions are
//! carried as exact Taylor jets in `y` around 0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{arg, Error, Result};
use crate::feynman::{GraphSums, IntegralTable};
use crate::graph_enum::{enumerate_balanced, GraphWeights, IntMatrix};
use crate::special_fn::{
    c_closed, c_unrestricted, recip_gamma, recip_gamma_coeffs, vertex_taylor, zeta, RecipGammaCoeffs,
    EULER_GAMMA,
};
use crate::taylor::{ComplexTaylor, RealTaylor};

pub use crate::walk_oracle::WalkClass;

/// Largest truncation order accepted by the expansions.
pub const MAX_ORDER: usize = 20;

fn vertex_constant(class: WalkClass) -> f64 {
    match class {
        WalkClass::Closed => c_closed(),
        WalkClass::Unrestricted => c_unrestricted(),
    }
}

fn gammas(m: u32, len: usize) -> RecipGammaCoeffs {
    recip_gamma_coeffs(m, len).expect("order within range")
}

/// Applies `T_γ` to a Taylor jet in `y` around 0.
pub fn log_transform(gamma: &RecipGammaCoeffs, g: &RealTaylor) -> RealTaylor {
    let n = g.len();
    let mut out = vec![0.0; n];
    for (j, o) in out.iter_mut().enumerate() {
        let mut s = gamma.get(0) * g.coeff(j);
        // (j−1)!/(j−i−1)! built incrementally
        let mut ff = 1.0;
        for i in 1..j {
            ff *= (j - i) as f64;
            s += gamma.get(i) * g.coeff(j - i) * ff;
        }
        *o = s;
    }
    RealTaylor::from_coeffs(out)
}

/// Asymptotic `n`-th Laurent coefficient of `g(1/ln(1−ϖ))/(1−ϖ)^m` for a
/// polynomial `g(x) = Σ b_j x^j`, truncated after `γ_M`. Polynomials of
/// degree above `M` are accepted.
pub fn coeff_asym(g: &[f64], m: u32, n: f64, order: usize) -> Result<f64> {
    if m == 0 || order > MAX_ORDER || n <= 1.0 {
        return arg("coeff_asym needs m >= 1, M <= 20 and n > 1");
    }
    let gam = gammas(m, order);
    let y = -1.0 / n.ln();
    let mut s = 0.0;
    for (jj, &b) in g.iter().enumerate() {
        s += gam.get(0) * b * y.powi(jj as i32);
        if jj == 0 {
            continue;
        }
        let mut ff = 1.0;
        for i in 1..=order {
            // (j+i−1)!/(j−1)!
            ff *= (jj + i - 1) as f64;
            s += gam.get(i) * b * ff * y.powi((jj + i) as i32);
        }
    }
    Ok(n.powi(m as i32 - 1) * s)
}

/// `Σ_j a_j y^j` with `y = −1/ln n`, multiplied by `n^r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentExpansion {
    pub class: WalkClass,
    pub r: usize,
    pub ks: Vec<u32>,
    /// Coefficients `a_0 … a_M` of `y^j`.
    pub coeffs: Vec<f64>,
}

impl MomentExpansion {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `n^r/ln(n)^j`.
    pub fn log_coeff(&self, j: usize) -> f64 {
        let a = self.coeffs.get(j).copied().unwrap_or(0.0);
        if j.is_multiple_of(2) {
            a
        } else {
            -a
        }
    }

    /// Value at walk length parameter `n`.
    pub fn eval(&self, n: f64) -> f64 {
        let y = -1.0 / n.ln();
        let s = self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * y + a);
        n.powi(self.r as i32) * s
    }

    /// One CSV row `n,k-vector,M,value` (k-vector joined by `;`).
    pub fn csv_row(&self, n: f64) -> String {
        let ks: Vec<String> = self.ks.iter().map(|k| k.to_string()).collect();
        format!("{n},{},{},{:.17e}", ks.join(";"), self.order(), self.eval(n))
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return arg(format!("truncation order {order} exceeds {MAX_ORDER}"));
    }
    Ok(())
}

/// Expansion of `E(N_{2k})`: closed walks of length `2n` use
/// `2n·T_{γ^{(1)}}[f_{1,k}]`, walks with free endpoints of length `n` use
/// `n·T_{γ^{(2)}}[f^{(u)}_{1,k}]`.
pub fn first_moment_expansion(class: WalkClass, k: u32, order: usize) -> Result<MomentExpansion> {
    check_order(order)?;
    if k == 0 {
        return arg("multiplicity index k must be >= 1");
    }
    let len = order + 1;
    let f = vertex_taylor(1, k, 0.0, vertex_constant(class), len);
    let (m, pre) = match class {
        WalkClass::Closed => (1, 2.0),
        WalkClass::Unrestricted => (2, 1.0),
    };
    let t = log_transform(&gammas(m, len), &f).scale(pre);
    Ok(MomentExpansion { class, r: 1, ks: vec![k], coeffs: t.coeffs().to_vec() })
}

/// `E(N_{2k})` including terms through `1/ln(n)^M`.
pub fn first_moment(class: WalkClass, n: f64, k: u32, order: usize) -> Result<f64> {
    if n < 3.0 || order > 10 {
        return arg("first_moment needs n >= 3 and M <= 10");
    }
    Ok(first_moment_expansion(class, k, order)?.eval(n))
}

/// Leading constant and first correction of the second central moment, as
/// closed expressions in `H₃`, `H₄`, `ζ(2)`, `ζ(3)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondCentral {
    /// Constant multiplying `(c·n/ln³n)²` with `c = 2π²` (closed) or `π²`.
    pub leading: f64,
    /// Constant multiplying the extra `1/ln n` inside the bracket.
    pub correction: f64,
}

impl SecondCentral {
    pub fn eval(&self, class: WalkClass, n: f64) -> f64 {
        let c = match class {
            WalkClass::Closed => 2.0 * PI * PI,
            WalkClass::Unrestricted => PI * PI,
        };
        let l = n.ln();
        (c * n / l.powi(3)).powi(2) * (self.leading + self.correction / l)
    }
}

/// Second central moment `E(N_{2k₁}N_{2k₂}) − E(N_{2k₁})E(N_{2k₂})`;
/// `h3`, `h4` are `𝓘(F₂)/4` and `I(F₂)`.
pub fn second_moment_central(class: WalkClass, k1: u32, k2: u32, h3: f64, h4: f64) -> SecondCentral {
    let kk = (k1 + k2) as f64 * PI / 2.0;
    match class {
        WalkClass::Closed => {
            let a = h4 * PI.powi(3) / 2.0 - 4.0 * zeta(2);
            let b = kk + 2.0 * EULER_GAMMA + PI * (1.0 + 2.0 * c_closed());
            SecondCentral { leading: a, correction: -3.0 * (a * b + 8.0 * zeta(3)) }
        }
        WalkClass::Unrestricted => {
            let a = h3 * PI * PI / 8.0 + 0.5 - PI * PI / 12.0;
            let b = kk + 2.0 * EULER_GAMMA + PI * (1.0 + 2.0 * c_unrestricted()) - 4.0;
            let extra = zeta(3) - zeta(2) + h3 * PI * PI / 8.0 + h4 * PI.powi(3) / 24.0;
            SecondCentral { leading: 8.0 * a, correction: -24.0 * (a * b + extra) }
        }
    }
}

/// Degree vectors `h` with `h_j ≥ 1` and `Σh ≤ budget`.
fn degree_vectors(r: usize, budget: usize) -> Vec<Vec<u32>> {
    fn rec(r: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        let rest = r - cur.len() - 1;
        for h in 1..=left.saturating_sub(rest) {
            cur.push(h as u32);
            rec(r, left - h, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if budget >= r {
        rec(r, budget, &mut Vec::new(), &mut out);
    }
    out
}

/// Graphs entering an `r`-th moment at truncation `M`: all strongly
/// connected balanced matrices with `Σ h_j ≤ M − r`.
pub fn moment_graphs(r: usize, order: usize) -> Result<Vec<IntMatrix>> {
    let mut out = Vec::new();
    if r < 2 || order < r {
        return Ok(out);
    }
    for h in degree_vectors(r, order - r) {
        out.extend(enumerate_balanced(r, &h)?);
    }
    Ok(out)
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; r], &mut out);
    out
}

struct VertexCache {
    c: f64,
    len: usize,
    map: std::collections::HashMap<(u32, u32), RealTaylor>,
}

impl VertexCache {
    fn new(class: WalkClass, len: usize) -> Self {
        VertexCache { c: vertex_constant(class), len, map: Default::default() }
    }

    fn get(&mut self, m: u32, k: u32) -> RealTaylor {
        let (c, len) = (self.c, self.len);
        self.map.entry((m, k)).or_insert_with(|| vertex_taylor(m, k, 0.0, c, len)).clone()
    }
}

/// Full asymptotic expansion of `E(N_{2k₁}⋯N_{2k_r})` through `y^M`.
/// Graph integrals for three or more vertices come from `table`.
pub fn moment_full(class: WalkClass, ks: &[u32], order: usize, table: &IntegralTable) -> Result<MomentExpansion> {
    check_order(order)?;
    let r = ks.len();
    if r == 0 || ks.contains(&0) {
        return arg("moment_full needs a nonempty k-vector with entries >= 1");
    }
    let len = order + 1;
    let mut vc = VertexCache::new(class, len);
    let mut total = RealTaylor::zero(len);
    if r == 1 {
        // the point graph: cof = M = I = 1, 𝓘 = 0
        let t = match class {
            WalkClass::Closed => log_transform(&gammas(0, len), &vc.get(0, ks[0])).scale(2.0 * PI),
            WalkClass::Unrestricted => log_transform(&gammas(2, len), &vc.get(1, ks[0])),
        };
        return Ok(MomentExpansion { class, r, ks: ks.to_vec(), coeffs: t.coeffs().to_vec() });
    }
    let graphs = moment_graphs(r, order)?;
    let ints = table.lookup_all(&graphs)?;
    let perms = permutations(r);
    let rf: f64 = (1..=r).map(|i| i as f64).product();
    for (f, &(i_val, s_val)) in graphs.iter().zip(&ints) {
        let h = f.out_degrees();
        let weight = GraphWeights::of(f).weight();
        let mut sym = RealTaylor::zero(len);
        for p in &perms {
            let fs: Vec<RealTaylor> = (0..r).map(|j| vc.get(h[j], ks[p[j]])).collect();
            let prod = fs.iter().skip(1).fold(fs[0].clone(), |a, b| &a * b);
            match class {
                WalkClass::Closed => sym = &sym + &prod,
                WalkClass::Unrestricted => {
                    sym = &sym + &prod.scale(s_val);
                    for q in 0..r {
                        let mut t = vc.get(h[q] + 1, ks[p[q]]);
                        for (j, fj) in fs.iter().enumerate() {
                            if j != q {
                                t = &t * fj;
                            }
                        }
                        sym = &sym + &t.scale(i_val);
                    }
                }
            }
        }
        let sym = sym.scale(1.0 / rf);
        let term = match class {
            WalkClass::Closed => log_transform(&gammas(r as u32 - 1, len), &sym)
                .scale(2.0 * PI * weight * i_val / 2f64.powi(r as i32 - 1)),
            WalkClass::Unrestricted => {
                log_transform(&gammas(r as u32 + 1, len), &sym).scale(weight / 4f64.powi(r as i32 - 1))
            }
        };
        total = &total + &term;
    }
    Ok(MomentExpansion { class, r, ks: ks.to_vec(), coeffs: total.coeffs().to_vec() })
}

/// `E(∏(X_i − E X_i))` from joint raw moments. `raw[mask]` is
/// `E(∏_{i∈mask} X_i)` for every subset of `p` variables, `raw[0] = 1`.
pub fn centralize(raw: &[f64]) -> Result<f64> {
    let n = raw.len();
    if n == 0 || !n.is_power_of_two() {
        return arg("centralize needs 2^p joint moments indexed by subset mask");
    }
    let p = n.trailing_zeros();
    let full = n - 1;
    let mut s = 0.0;
    for b in 0..n {
        let mut prod = 1.0;
        for i in 0..p {
            if b >> i & 1 == 1 {
                prod *= raw[1 << i];
            }
        }
        let sign = if b.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * prod * raw[full & !b];
    }
    Ok(s)
}

/// Central moments of one variable from its raw moments `E X^j`,
/// `j = 0..`, via [`centralize`] with all variables equal.
pub fn centralize_power(raw: &[f64], order: usize) -> Result<f64> {
    if raw.len() <= order {
        return arg("not enough raw moments");
    }
    let joint: Vec<f64> = (0..1usize << order).map(|m| raw[m.count_ones() as usize]).collect();
    centralize(&joint)
}

/// Leading constant `C_m` of the `m`-th central moment: the moment is
/// `C_m·(c·n/ln³n)^m` with `c = 2π²` (closed) or `π²` (free endpoints).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingCentral {
    pub order: usize,
    pub coefficient: f64,
    pub stderr: f64,
}

impl LeadingCentral {
    pub fn eval(&self, class: WalkClass, n: f64) -> f64 {
        let c = match class {
            WalkClass::Closed => 2.0 * PI * PI,
            WalkClass::Unrestricted => PI * PI,
        };
        self.coefficient * (c * n / n.ln().powi(3)).powi(self.order as i32)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

// Σ_{ν≤p} γ^{(m)}_{p−ν} (−g1)^ν/ν!
fn gamma_conv(m: u32, p: usize, g1: f64) -> f64 {
    let g = gammas(m, p);
    (0..=p).map(|nu| g.get(p - nu) * (-g1).powi(nu as i32) / factorial(nu)).sum()
}

/// Leading behaviour of the central moment of `N_{2k₁},…,N_{2k_m}`; at this
/// order it depends on the k-vector only through its length.
pub fn central_moment_leading(class: WalkClass, ks: &[u32], sums: &GraphSums) -> Result<LeadingCentral> {
    let m = ks.len();
    if m == 0 || m > 20 {
        return arg("central moments need 1 <= order <= 20");
    }
    sums.require(m)?;
    let sgn = |p: usize| if p.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mf = factorial(m);
    let (mut c, mut var) = (0.0, 0.0);
    match class {
        WalkClass::Closed => {
            let g1 = EULER_GAMMA;
            c += mf * 2f64.powi(m as i32) * sgn(m) * gamma_conv(1, m, g1);
            for r in 2..=m {
                let p = m - r;
                let rec = sums.get(r).expect("checked");
                let q = mf * 4.0 * PI * (r - 1) as f64 / factorial(r) * (-PI / 2.0).powi(r as i32)
                    * 2f64.powi(p as i32)
                    * sgn(p)
                    * gamma_conv(r as u32, p, g1);
                c += q * rec.sum_i;
                var += (q * rec.sum_i_stderr).powi(2);
            }
        }
        WalkClass::Unrestricted => {
            let g1 = EULER_GAMMA - 1.0;
            c += mf * 2f64.powi(m as i32) * sgn(m) * gamma_conv(2, m, g1);
            for r in 2..=m {
                let p = m - r;
                let rec = sums.get(r).expect("checked");
                let q = mf * 4.0 / factorial(r) * (-PI / 2.0).powi(r as i32) * 2f64.powi(p as i32) * sgn(p);
                let a = q * gamma_conv(r as u32 + 1, p, g1);
                let b = if p > 0 { q * gamma_conv(r as u32 + 2, p - 1, g1) } else { 0.0 };
                let cs = a - b;
                let ci = PI * (r - 1) as f64 * b;
                c += cs * rec.sum_script_i + ci * rec.sum_i;
                var += (cs * rec.sum_script_i_stderr).powi(2) + (ci * rec.sum_i_stderr).powi(2);
            }
        }
    }
    Ok(LeadingCentral { order: m, coefficient: c, stderr: var.sqrt() })
}

/// Taylor coefficients in `t` of a characteristic function with propagated
/// standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct CharSeries {
    pub coeffs: Vec<Complex64>,
    pub stderr: Vec<f64>,
    pub r_max: usize,
}

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    re: f64,
    im: f64,
    stderr: f64,
}

#[derive(Serialize, Deserialize)]
struct CharSeriesJson {
    coeffs: Vec<CoeffJson>,
    r_max: usize,
}

impl CharSeries {
    pub fn to_json(&self) -> String {
        let j = CharSeriesJson {
            coeffs: self
                .coeffs
                .iter()
                .zip(&self.stderr)
                .map(|(c, &s)| CoeffJson { re: c.re, im: c.im, stderr: s })
                .collect(),
            r_max: self.r_max,
        };
        serde_json::to_string_pretty(&j).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: CharSeriesJson = serde_json::from_str(s).map_err(|e| Error::Argument(e.to_string()))?;
        Ok(CharSeries {
            coeffs: j.coeffs.iter().map(|c| Complex64::new(c.re, c.im)).collect(),
            stderr: j.coeffs.iter().map(|c| c.stderr).collect(),
            r_max: j.r_max,
        })
    }

    /// Partial sum at `t`.
    pub fn eval(&self, t: f64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }
}

fn ct(c: Vec<Complex64>) -> ComplexTaylor {
    ComplexTaylor::from_coeffs(c)
}

// 1/Γ(m + a·t) as a series in t
fn recip_gamma_series(m: u32, a: Complex64, len: usize) -> ComplexTaylor {
    let g = gammas(m, len);
    let mut c = Vec::with_capacity(len);
    let mut p = Complex64::new(1.0, 0.0);
    for i in 0..len {
        c.push(p * g.get(i));
        p *= a;
    }
    ct(c)
}

fn exp_linear(a: Complex64, len: usize) -> ComplexTaylor {
    let mut c = Vec::with_capacity(len);
    let mut p = Complex64::new(1.0, 0.0);
    for i in 0..len {
        c.push(p / factorial(i));
        p *= a;
    }
    ct(c)
}

fn monomial(coef: Complex64, k: usize, len: usize) -> ComplexTaylor {
    let mut c = vec![Complex64::new(0.0, 0.0); len];
    if k < len {
        c[k] = coef;
    }
    ct(c)
}

fn check_r_max(sums: &GraphSums, r_max: usize, order: usize) -> Result<()> {
    if order > 60 {
        return arg("series order must be <= 60");
    }
    sums.require(r_max)
}

fn accumulate(base: ComplexTaylor, parts: Vec<(ComplexTaylor, f64)>, r_max: usize) -> CharSeries {
    let len = base.len();
    let mut total = base;
    let mut var = vec![0.0; len];
    for (t, se) in parts {
        for (j, v) in var.iter_mut().enumerate() {
            *v += (t.coeff(j).norm() * se).powi(2);
        }
        total = &total + &t;
    }
    CharSeries { coeffs: total.coeffs().to_vec(), stderr: var.into_iter().map(f64::sqrt).collect(), r_max }
}

/// Characteristic function of the centred, rescaled multiple-point count of
/// closed walks: Taylor coefficients in `t` through `order`, with
/// `τ = t·ΣΛ` and graph sums up to `r_max`.
pub fn char_closed_series(lambda_sum: f64, order: usize, r_max: usize, sums: &GraphSums) -> Result<CharSeries> {
    check_r_max(sums, r_max, order)?;
    let len = order + 1;
    let i = Complex64::i();
    // s = iτ/2π = a·t
    let a = i * lambda_sum / (2.0 * PI);
    let pre = exp_linear(a * EULER_GAMMA, len);
    let base = &pre * &recip_gamma_series(1, -a, len);
    let mut parts = Vec::new();
    for r in 2..=r_max {
        let rec = sums.get(r).expect("checked");
        let c = (-i * lambda_sum / 8.0).powi(r as i32) * (4.0 * PI * (r - 1) as f64 / factorial(r));
        let unit = &(&pre * &recip_gamma_series(r as u32, -a, len)) * &monomial(c, r, len);
        parts.push((unit.scale(Complex64::new(rec.sum_i, 0.0)), rec.sum_i_stderr));
    }
    Ok(accumulate(base, parts, r_max))
}

/// Pointwise value of the closed-walk characteristic function; complex `t`
/// is accepted for contour evaluation.
pub fn char_closed_value(lambda_sum: f64, t: Complex64, r_max: usize, sums: &GraphSums) -> Result<Complex64> {
    sums.require(r_max)?;
    let i = Complex64::i();
    let tau = t * lambda_sum;
    let s = i * tau / (2.0 * PI);
    let mut v = recip_gamma(1.0 - s);
    for r in 2..=r_max {
        let rec = sums.get(r).expect("checked");
        v += 4.0 * PI * (-i * tau / 8.0).powi(r as i32) * ((r - 1) as f64 / factorial(r)) * recip_gamma(r as f64 - s)
            * rec.sum_i;
    }
    Ok((EULER_GAMMA * s).exp() * v)
}

/// Characteristic function of the renormalized intersection local time of
/// planar Brownian motion: Taylor coefficients in `t` through `order`.
pub fn char_brownian_series(order: usize, r_max: usize, sums: &GraphSums) -> Result<CharSeries> {
    check_r_max(sums, r_max, order)?;
    let len = order + 1;
    let i = Complex64::i();
    let a = i / (2.0 * PI);
    let pre = exp_linear(a * (1.0 - EULER_GAMMA), len);
    let base = &pre * &recip_gamma_series(2, a, len);
    let mut parts = Vec::new();
    for r in 2..=r_max {
        let rec = sums.get(r).expect("checked");
        let g = &pre * &recip_gamma_series(r as u32 + 2, a, len);
        let c = i.powi(r as i32) * (4.0 / (8f64.powi(r as i32) * factorial(r)));
        let us = &g * &monomial(c * (r + 1) as f64, r, len);
        let ui = &g * &monomial(c * i * 0.5 * (r - 1) as f64, r + 1, len);
        parts.push((us.scale(Complex64::new(rec.sum_script_i, 0.0)), rec.sum_script_i_stderr));
        parts.push((ui.scale(Complex64::new(rec.sum_i, 0.0)), rec.sum_i_stderr));
    }
    Ok(accumulate(base, parts, r_max))
}

/// Pointwise value of the Brownian characteristic function (complex `t`
/// allowed).
pub fn char_brownian_value(t: Complex64, r_max: usize, sums: &GraphSums) -> Result<Complex64> {
    sums.require(r_max)?;
    let i = Complex64::i();
    let s = i * t / (2.0 * PI);
    let mut v = recip_gamma(2.0 + s);
    for r in 2..=r_max {
        let rec = sums.get(r).expect("checked");
        let it = i * t;
        v += 4.0 * it.powi(r as i32) / (8f64.powi(r as i32) * factorial(r))
            * recip_gamma(r as f64 + 2.0 + s)
            * ((r + 1) as f64 * rec.sum_script_i + it * 0.5 * (r - 1) as f64 * rec.sum_i);
    }
    Ok(((1.0 - EULER_GAMMA) * s).exp() * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feynman::{h3, h4};

    #[test]
    fn first_moment_leading_terms() {
        let c = c_closed();
        for k in 1..4 {
            let e = first_moment_expansion(WalkClass::Closed, k, 4).unwrap();
            assert!((e.log_coeff(2) - 2.0 * PI * PI).abs() < 1e-12);
            let next = -2.0 * PI * PI * (k as f64 * PI + 2.0 * EULER_GAMMA + PI * (1.0 + 2.0 * c));
            assert!((e.log_coeff(3) - next).abs() < 1e-10);
            assert_eq!(e.log_coeff(0), 0.0);
            let u = first_moment_expansion(WalkClass::Unrestricted, k, 4).unwrap();
            assert!((u.log_coeff(2) - PI * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn point_graph_reduces_to_first_moment() {
        let t = IntegralTable::default();
        for class in [WalkClass::Closed, WalkClass::Unrestricted] {
            for k in 1..4 {
                let a = moment_full(class, &[k], 8, &t).unwrap();
                let b = first_moment_expansion(class, k, 8).unwrap();
                for j in 0..=8 {
                    assert!((a.coeffs[j] - b.coeffs[j]).abs() < 1e-9 * (1.0 + b.coeffs[j].abs()), "{class:?} {k} {j}");
                }
            }
        }
    }

    #[test]
    fn second_moment_consistency() {
        let t = IntegralTable::default();
        for class in [WalkClass::Closed, WalkClass::Unrestricted] {
            let full = moment_full(class, &[1, 2], 6, &t).unwrap();
            let a = first_moment_expansion(class, 1, 6).unwrap();
            let b = first_moment_expansion(class, 2, 6).unwrap();
            let sq: f64 = (0..=6).map(|i| a.coeffs[i] * b.coeffs[6 - i]).sum();
            let (c, pre) = match class {
                WalkClass::Closed => (2.0 * PI * PI, 1.0),
                WalkClass::Unrestricted => (PI * PI, 1.0),
            };
            let lead = second_moment_central(class, 1, 2, h3(), h4()).leading;
            assert!(((full.coeffs[6] - pre * sq) / c.powi(2) - lead).abs() < 1e-10, "{class:?}");
            for j in 0..6 {
                let sqj: f64 = (0..=j).map(|i| a.coeffs[i] * b.coeffs[j - i]).sum();
                assert!((full.coeffs[j] - sqj).abs() < 1e-8 * (1.0 + sqj.abs()), "{class:?} {j}");
            }
        }
    }

    #[test]
    fn centralize_small() {
        assert_eq!(centralize(&[1.0, 3.0]).unwrap(), 0.0);
        let raw = [1.0, 2.0, 5.0, 13.0];
        assert!((centralize(&raw).unwrap() - (13.0 - 10.0)).abs() < 1e-15);
    }

    #[test]
    fn coeff_asym_constant() {
        let v = coeff_asym(&[1.0], 1, 1e4, 3).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }
}
