//! Graph integrals with Bessel-K₀ kernels.
//!
//! For a balanced matrix `F` on `r` vertices
//!
//! ```text
//! I(F) = ∫ ∏_{m≥2} d²y_m ∏_{k≠l} H(|y_k − y_l|)^{F_kl},   H = (2/π)·K₀,  y_1 = 0,
//! ```
//!
//! and `𝓘(F)` integrates `Σ_{i≠j} ∂/∂H_ij` of the same monomial. Two vertices
//! reduce to a radial integral; larger graphs are integrated by importance
//! sampling along a spanning tree.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{arg, Error, Result};
use crate::graph_enum::{enumerate_balanced_with, is_strongly_connected, BalancedMatrix, GraphWeights, IntMatrix};
use crate::par::{map_range, map_slice, Exec};
use crate::special_fn::bessel_k0;
use crate::walk_oracle::{batch_rng, mix64};

/// Default Monte Carlo sample count per graph.
pub const DEFAULT_BUDGET: u64 = 1 << 20;
/// Default root seed.
pub const DEFAULT_SEED: u64 = 20_240_601;
/// Samples per Monte Carlo batch (one generator stream each).
pub const MC_BATCH: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RadialQuadrature,
    TensorQuadrature,
    MonteCarlo,
    Exact,
}

/// Estimate of a graph integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphIntegral {
    pub value: f64,
    /// Standard error (0 for deterministic quadrature).
    pub stderr: f64,
    pub method: Method,
    pub samples: u64,
}

impl GraphIntegral {
    fn exact(value: f64, method: Method) -> Self {
        GraphIntegral { value, stderr: 0.0, method, samples: 0 }
    }
}

/// The kernel `(2/π)·K₀(t)`.
pub fn kernel(t: f64) -> f64 {
    2.0 / PI * bessel_k0(t)
}

/// `∫₀^∞ g(t) dt` for `g` with at most logarithmic singularity at 0 and
/// negligible mass beyond `t_max`, by the trapezoid rule in `u = ln t`.
pub fn radial_integral(g: impl Fn(f64) -> f64, t_max: f64) -> f64 {
    let h = 1.0 / 32.0;
    let (u0, u1) = (-45.0f64, t_max.ln());
    let n = ((u1 - u0) / h).ceil() as usize;
    let mut s = 0.0;
    for i in 0..=n {
        let t = (u1 - i as f64 * h).exp();
        s += g(t) * t;
    }
    s * h
}

/// `∫₀^∞ t·K₀(t)^p dt` for real `p > 0`.
pub fn radial_k0_moment(p: f64) -> f64 {
    radial_integral(|t| t * bessel_k0(t).powf(p), (100.0 / p).min(700.0))
}

/// `H₃ = (2/π)³·2π·∫ t K₀(t)³ dt = 𝓘(F₂)/4`.
pub fn h3() -> f64 {
    (2.0 / PI).powi(3) * 2.0 * PI * radial_k0_moment(3.0)
}

/// `H₄ = (2/π)⁴·2π·∫ t K₀(t)⁴ dt = I(F₂)`.
pub fn h4() -> f64 {
    (2.0 / PI).powi(4) * 2.0 * PI * radial_k0_moment(4.0)
}

/// `∫ t K₀(t)³ dt` from the lattice sum `(3/4)·Σ_p [1/(1+3p)² − 1/(2+3p)²]`.
pub fn k0_cube_moment_series(terms: usize) -> f64 {
    let mut s = 0.0;
    for p in (0..terms).rev() {
        let p = p as f64;
        s += 1.0 / (1.0 + 3.0 * p).powi(2) - 1.0 / (2.0 + 3.0 * p).powi(2);
    }
    0.75 * s
}

fn check_integrable(f: &BalancedMatrix) -> Result<()> {
    if f.r() < 1 || f.has_loops() || !f.is_balanced() {
        return arg("graph integrals need a balanced zero-diagonal matrix");
    }
    if f.r() >= 2 && !is_strongly_connected(f) {
        return arg("graph integrals need a strongly connected graph");
    }
    Ok(())
}

/// Seed used for graph `f` at a given budget.
pub fn graph_seed(root: u64, f: &IntMatrix, budget: u64) -> u64 {
    let mut h = mix64(root ^ mix64(budget));
    h = mix64(h ^ f.r() as u64);
    for &e in f.entries() {
        h = mix64(h ^ e as u64);
    }
    h
}

/// `(I(F), 𝓘(F))`. One vertex gives `(1, 0)`, two vertices are integrated
/// radially, larger graphs by Monte Carlo with `budget` samples.
pub fn integrals(f: &BalancedMatrix, budget: u64, seed: u64, exec: Exec) -> Result<(GraphIntegral, GraphIntegral)> {
    check_integrable(f)?;
    match f.r() {
        1 => Ok((GraphIntegral::exact(1.0, Method::Exact), GraphIntegral::exact(0.0, Method::Exact))),
        2 => {
            let p = f.get(0, 1) as f64;
            let c = 2.0 * PI;
            let i = c * (2.0 / PI).powf(2.0 * p) * radial_k0_moment(2.0 * p);
            let s = 2.0 * p * c * (2.0 / PI).powf(2.0 * p - 1.0) * radial_k0_moment(2.0 * p - 1.0);
            Ok((GraphIntegral::exact(i, Method::RadialQuadrature), GraphIntegral::exact(s, Method::RadialQuadrature)))
        }
        _ => {
            if budget < 2 {
                return arg("Monte Carlo budget must be at least 2 samples");
            }
            Ok(mc_integrals(f, budget, graph_seed(seed, f, budget), exec))
        }
    }
}

/// `I(F)`; see [`integrals`].
pub fn integral_i(f: &BalancedMatrix, budget: u64, seed: u64) -> Result<GraphIntegral> {
    Ok(integrals(f, budget, seed, Exec::default())?.0)
}

/// `𝓘(F)`; see [`integrals`].
pub fn integral_script_i(f: &BalancedMatrix, budget: u64, seed: u64) -> Result<GraphIntegral> {
    Ok(integrals(f, budget, seed, Exec::default())?.1)
}

/// Piecewise-constant density in `u = ln ρ` approximating
/// `ρ²·K₀(ρ)^a`, sampled exactly; the importance weight uses this density,
/// not the target, so the estimator stays unbiased.
#[derive(Clone, Debug)]
pub struct RadialSampler {
    a: f64,
    u0: f64,
    du: f64,
    cdf: Vec<f64>,
    pdf_u: Vec<f64>,
}

impl RadialSampler {
    const CELLS: usize = 4096;

    pub fn new(a: f64) -> Self {
        let u0 = -32.0;
        let u1 = (160.0 / a).ln();
        let du = (u1 - u0) / Self::CELLS as f64;
        let mass: Vec<f64> = (0..Self::CELLS)
            .map(|i| {
                let t = (u0 + (i as f64 + 0.5) * du).exp();
                (t * t * bessel_k0(t).powf(a)).max(1e-300) * du
            })
            .collect();
        let total: f64 = mass.iter().sum();
        let mut cdf = Vec::with_capacity(Self::CELLS + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for m in &mass {
            acc += m / total;
            cdf.push(acc);
        }
        let pdf_u = mass.iter().map(|m| m / total / du).collect();
        RadialSampler { a, u0, du, cdf, pdf_u }
    }

    pub fn exponent(&self) -> f64 {
        self.a
    }

    /// Draws a planar displacement; returns it with its density in `R²`.
    pub fn sample(&self, rng: &mut impl Rng) -> ([f64; 2], f64) {
        let x: f64 = rng.gen::<f64>() * self.cdf[Self::CELLS];
        let cell = (self.cdf.partition_point(|&c| c <= x).max(1) - 1).min(Self::CELLS - 1);
        let u = self.u0 + (cell as f64 + rng.gen::<f64>()) * self.du;
        let rho = u.exp();
        let th = 2.0 * PI * rng.gen::<f64>();
        let pdf = self.pdf_u[cell] / (2.0 * PI * rho * rho);
        ([rho * th.cos(), rho * th.sin()], pdf)
    }
}

struct TreePlan {
    r: usize,
    // (parent, child, sampler index) in an order where parents come first
    edges: Vec<(usize, usize, usize)>,
    samplers: Vec<RadialSampler>,
    // undirected pairs (k<l) with weight w_kl = F_kl + F_lk > 0
    pairs: Vec<(usize, usize, i32)>,
    // directed terms of 𝓘: (pair index, F_ij)
    terms: Vec<(usize, f64)>,
}

fn plan(f: &BalancedMatrix) -> TreePlan {
    let r = f.r();
    let mut pairs = Vec::new();
    for k in 0..r {
        for l in k + 1..r {
            let w = (f.get(k, l) + f.get(l, k)) as i32;
            if w > 0 {
                pairs.push((k, l, w));
            }
        }
    }
    let mut terms = Vec::new();
    for (p, &(k, l, _)) in pairs.iter().enumerate() {
        for (i, j) in [(k, l), (l, k)] {
            if f.get(i, j) > 0 {
                terms.push((p, f.get(i, j) as f64));
            }
        }
    }
    // maximum-weight spanning tree (Kruskal, ties by index)
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by_key(|&p| (-pairs[p].2, pairs[p].0, pairs[p].1));
    let mut comp: Vec<usize> = (0..r).collect();
    fn find(c: &mut Vec<usize>, x: usize) -> usize {
        if c[x] != x {
            let root = find(c, c[x]);
            c[x] = root;
        }
        c[x]
    }
    let mut adj: Vec<Vec<(usize, i32)>> = vec![Vec::new(); r];
    for p in order {
        let (k, l, w) = pairs[p];
        let (a, b) = (find(&mut comp, k), find(&mut comp, l));
        if a != b {
            comp[a] = b;
            adj[k].push((l, w));
            adj[l].push((k, w));
        }
    }
    let mut samplers: Vec<RadialSampler> = Vec::new();
    let mut edges = Vec::new();
    let mut seen = vec![false; r];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for &(c, w) in &adj[v] {
            if seen[c] {
                continue;
            }
            seen[c] = true;
            let a = w as f64 / 2.0;
            let s = match samplers.iter().position(|s| s.exponent() == a) {
                Some(i) => i,
                None => {
                    samplers.push(RadialSampler::new(a));
                    samplers.len() - 1
                }
            };
            edges.push((v, c, s));
            queue.push_back(c);
        }
    }
    TreePlan { r, edges, samplers, pairs, terms }
}

#[derive(Clone, Copy, Default)]
struct Moments2 {
    n: u64,
    s1: f64,
    s2: f64,
    t1: f64,
    t2: f64,
    far: f64,
}

fn mc_batch(plan: &TreePlan, rng: &mut ChaCha8Rng, count: u64) -> Moments2 {
    let mut acc = Moments2 { n: count, ..Default::default() };
    let mut y = vec![[0.0f64; 2]; plan.r];
    let np = plan.pairs.len();
    let mut kw = vec![0.0; np];
    let mut kw1 = vec![0.0; np];
    let mut prefix = vec![1.0; np + 1];
    let mut suffix = vec![1.0; np + 1];
    for _ in 0..count {
        let mut pdf = 1.0;
        for &(p, c, s) in &plan.edges {
            let (d, q) = plan.samplers[s].sample(rng);
            y[c] = [y[p][0] + d[0], y[p][1] + d[1]];
            pdf *= q;
        }
        for (i, &(k, l, w)) in plan.pairs.iter().enumerate() {
            let d = ((y[k][0] - y[l][0]).powi(2) + (y[k][1] - y[l][1]).powi(2)).sqrt().max(1e-300);
            let h = kernel(d);
            kw1[i] = h.powi(w - 1);
            kw[i] = kw1[i] * h;
        }
        for i in 0..np {
            prefix[i + 1] = prefix[i] * kw[i];
        }
        for i in (0..np).rev() {
            suffix[i] = suffix[i + 1] * kw[i];
        }
        let wi = prefix[np] / pdf;
        let mut ws = 0.0;
        for &(p, m) in &plan.terms {
            ws += m * prefix[p] * kw1[p] * suffix[p + 1];
        }
        ws /= pdf;
        acc.s1 += wi;
        acc.s2 += wi * wi;
        acc.t1 += ws;
        acc.t2 += ws * ws;
        if y.iter().any(|p| p[0].hypot(p[1]) > 40.0) {
            acc.far += wi;
        }
    }
    acc
}

/// Monte Carlo estimates together with the share of the `I` estimate coming
/// from samples with a point beyond radius 40.
pub fn mc_integrals_detailed(f: &BalancedMatrix, budget: u64, seed: u64, exec: Exec) -> (GraphIntegral, GraphIntegral, f64) {
    let plan = plan(f);
    let nb = budget.div_ceil(MC_BATCH);
    let parts = map_range(exec, nb as usize, |b| {
        let b = b as u64;
        let count = MC_BATCH.min(budget - b * MC_BATCH);
        let mut rng = batch_rng(seed, 0, b);
        mc_batch(&plan, &mut rng, count)
    });
    let mut t = Moments2::default();
    for p in &parts {
        t.n += p.n;
        t.s1 += p.s1;
        t.s2 += p.s2;
        t.t1 += p.t1;
        t.t2 += p.t2;
        t.far += p.far;
    }
    let n = t.n as f64;
    let est = |s1: f64, s2: f64| {
        let m = s1 / n;
        let var = (s2 / n - m * m).max(0.0) * n / (n - 1.0);
        (m, (var / n).sqrt())
    };
    let (i, ie) = est(t.s1, t.s2);
    let (s, se) = est(t.t1, t.t2);
    let far = if t.s1 > 0.0 { t.far / t.s1 } else { 0.0 };
    (
        GraphIntegral { value: i, stderr: ie, method: Method::MonteCarlo, samples: t.n },
        GraphIntegral { value: s, stderr: se, method: Method::MonteCarlo, samples: t.n },
        far,
    )
}

fn mc_integrals(f: &BalancedMatrix, budget: u64, seed: u64, exec: Exec) -> (GraphIntegral, GraphIntegral) {
    let (a, b, _) = mc_integrals_detailed(f, budget, seed, exec);
    (a, b)
}

/// Weighted sums over `H̃_r(2,…,2)`, the inputs of the characteristic
/// functions. Serialized field names are the cache file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSumRecord {
    pub r: usize,
    pub count: usize,
    #[serde(rename = "sum_I")]
    pub sum_i: f64,
    #[serde(rename = "sum_I_stderr")]
    pub sum_i_stderr: f64,
    #[serde(rename = "sum_scriptI")]
    pub sum_script_i: f64,
    #[serde(rename = "sum_scriptI_stderr")]
    pub sum_script_i_stderr: f64,
    pub seed: u64,
    pub budget: u64,
}

/// One graph with its weights and integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralEntry {
    pub r: usize,
    pub rows: Vec<Vec<u32>>,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "I_stderr")]
    pub i_stderr: f64,
    #[serde(rename = "scriptI")]
    pub script_i: f64,
    #[serde(rename = "scriptI_stderr")]
    pub script_i_stderr: f64,
    pub method: Method,
    pub samples: u64,
    pub seed: u64,
    pub budget: u64,
}

impl IntegralEntry {
    pub fn matrix(&self) -> Result<IntMatrix> {
        IntMatrix::from_rows(&self.rows)
    }
}

/// Integrals of every graph in `graphs`, in order.
pub fn integral_entries(graphs: &[BalancedMatrix], budget: u64, seed: u64, exec: Exec) -> Result<Vec<IntegralEntry>> {
    let res = map_slice(exec, graphs, |f| integrals(f, budget, seed, exec));
    graphs
        .iter()
        .zip(res)
        .map(|(f, r)| {
            let (i, s) = r?;
            Ok(IntegralEntry {
                r: f.r(),
                rows: f.rows(),
                i: i.value,
                i_stderr: i.stderr,
                script_i: s.value,
                script_i_stderr: s.stderr,
                method: i.method,
                samples: i.samples,
                seed,
                budget,
            })
        })
        .collect()
}

/// `Σ_F I(F)·M(F)·cof(A−F)` and the same with `𝓘` over `H̃_r(2,…,2)`.
pub fn graph_sum(r: usize, budget: u64, seed: u64, exec: Exec) -> Result<GraphSumRecord> {
    if !(2..=6).contains(&r) {
        return arg(format!("graph sums are supported for 2 <= r <= 6, got {r}"));
    }
    let graphs = enumerate_balanced_with(r, &vec![2; r], exec)?;
    let entries = integral_entries(&graphs, budget, seed, exec)?;
    let mut rec = GraphSumRecord {
        r,
        count: graphs.len(),
        sum_i: 0.0,
        sum_i_stderr: 0.0,
        sum_script_i: 0.0,
        sum_script_i_stderr: 0.0,
        seed,
        budget,
    };
    let (mut vi, mut vs) = (0.0, 0.0);
    for (f, e) in graphs.iter().zip(&entries) {
        let w = GraphWeights::of(f).weight();
        rec.sum_i += w * e.i;
        rec.sum_script_i += w * e.script_i;
        vi += (w * e.i_stderr).powi(2);
        vs += (w * e.script_i_stderr).powi(2);
    }
    rec.sum_i_stderr = vi.sqrt();
    rec.sum_script_i_stderr = vs.sqrt();
    if !rec.sum_i.is_finite() || !rec.sum_script_i.is_finite() {
        return Err(Error::Numeric(format!("non-finite graph sum at r = {r}")));
    }
    Ok(rec)
}

/// Graph sums for `r = 2..=r_max` keyed by `r`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GraphSums {
    pub records: BTreeMap<usize, GraphSumRecord>,
}

impl GraphSums {
    /// Sums with only the deterministic `r = 2` record.
    pub fn quadrature_only() -> Self {
        let mut s = GraphSums::default();
        s.insert(graph_sum(2, 0, 0, Exec::Sequential).expect("r = 2 sums"));
        s
    }

    pub fn insert(&mut self, rec: GraphSumRecord) {
        self.records.insert(rec.r, rec);
    }

    pub fn get(&self, r: usize) -> Option<&GraphSumRecord> {
        self.records.get(&r)
    }

    /// Fails with the list of missing orders in `2..=r_max`.
    pub fn require(&self, r_max: usize) -> Result<()> {
        let missing: Vec<String> = (2..=r_max).filter(|r| !self.records.contains_key(r)).map(|r| format!("r={r}")).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingCache(missing))
        }
    }
}

/// Integrals keyed by matrix, as consumed by the moment expansions. Graphs
/// on one or two vertices are computed on demand.
#[derive(Clone, Debug, Default)]
pub struct IntegralTable {
    map: BTreeMap<IntMatrix, (f64, f64)>,
}

impl IntegralTable {
    pub fn insert(&mut self, e: &IntegralEntry) -> Result<()> {
        self.map.insert(e.matrix()?, (e.i, e.script_i));
        Ok(())
    }

    pub fn insert_value(&mut self, f: IntMatrix, i: f64, script_i: f64) {
        self.map.insert(f, (i, script_i));
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// `(I(F), 𝓘(F))` or `None` when a graph on three or more vertices is
    /// not in the table.
    pub fn lookup(&self, f: &IntMatrix) -> Option<(f64, f64)> {
        if let Some(&v) = self.map.get(f) {
            return Some(v);
        }
        if f.r() <= 2 {
            let (i, s) = integrals(f, 0, 0, Exec::Sequential).ok()?;
            return Some((i.value, s.value));
        }
        None
    }

    /// Looks up every graph, reporting all misses at once.
    pub fn lookup_all(&self, graphs: &[IntMatrix]) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(graphs.len());
        let mut missing = Vec::new();
        for f in graphs {
            match self.lookup(f) {
                Some(v) => out.push(v),
                None => missing.push(f.to_json()),
            }
        }
        if missing.is_empty() {
            Ok(out)
        } else {
            Err(Error::MissingCache(missing))
        }
    }
}
