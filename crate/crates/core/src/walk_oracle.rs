//! Ground truth for the generating-function identities: exhaustive
//! enumeration of short planar walks and seeded Monte Carlo sampling of long
//! ones, with multiple-point-range statistics.
//!
//! Multiplicity conventions. For a closed walk of length `L` the multiplicity
//! of a point is twice its number of visits at times `0..L` (the two
//! endpoints are identified). For a walk with free endpoints every interior
//! visit counts 2 and each endpoint counts 1 (edge incidences). `N_{2k}(w)`
//! is the number of points of multiplicity exactly `2k`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::par::{map_range, Exec};

const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
/// Largest closed-walk length accepted by [`enumerate_closed`].
pub const MAX_ENUM_LEN: usize = 14;

/// Exact aggregates over all closed walks of each even length `≤ l_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedEnumeration {
    pub l_max: usize,
    /// Number of closed walks by length.
    pub walks: Vec<u64>,
    /// The k-vectors whose products were aggregated.
    pub monomials: Vec<Vec<u32>>,
    /// `monomial_sums[i][L] = Σ_w ∏_j N_{2 k_j}(w)` for `monomials[i]`.
    pub monomial_sums: Vec<Vec<u128>>,
    pub probes: Vec<[i64; 2]>,
    /// `probe_counts[p][k][L]`: walks of length `L` visiting `probes[p]`
    /// exactly `k` times (multiplicity `2k`).
    pub probe_counts: Vec<Vec<Vec<u64>>>,
}

struct Dfs<'a> {
    l_max: usize,
    rad: i64,
    width: usize,
    counts: Vec<u32>,
    hist: Vec<u32>,
    monomials: &'a [Vec<u32>],
    probes: Vec<usize>,
    out: ClosedEnumeration,
}

impl Dfs<'_> {
    fn cell(&self, p: (i64, i64)) -> usize {
        ((p.0 + self.rad) as usize) * self.width + (p.1 + self.rad) as usize
    }

    fn record(&mut self, len: usize) {
        self.out.walks[len] += 1;
        for (i, m) in self.monomials.iter().enumerate() {
            let v: u128 = m.iter().map(|&k| self.hist[k as usize] as u128).product();
            self.out.monomial_sums[i][len] += v;
        }
        for (p, &c) in self.probes.iter().enumerate() {
            let k = self.counts[c] as usize;
            self.out.probe_counts[p][k][len] += 1;
        }
    }

    fn visit(&mut self, p: (i64, i64), depth: usize) {
        if depth > 0 && p == (0, 0) {
            self.record(depth);
        }
        if depth == self.l_max {
            return;
        }
        let c = self.cell(p);
        let old = self.counts[c] as usize;
        self.hist[old] -= u32::from(old > 0);
        self.counts[c] += 1;
        self.hist[old + 1] += 1;
        let left = (self.l_max - depth - 1) as i64;
        for (dx, dy) in DIRS {
            let q = (p.0 + dx, p.1 + dy);
            if q.0.abs() + q.1.abs() <= left {
                self.visit(q, depth + 1);
            }
        }
        self.hist[old + 1] -= 1;
        self.counts[c] -= 1;
        self.hist[old] += u32::from(old > 0);
    }
}

/// Exhaustive enumeration of closed walks of even length `2..=l_max`
/// (`l_max ≤ 14`), aggregating `Σ_w ∏ N_{2k_j}(w)` for every k-vector in
/// `monomials` and per-point visit counts for every point in `probes`.
pub fn enumerate_closed(l_max: usize, monomials: &[Vec<u32>], probes: &[[i64; 2]]) -> Result<ClosedEnumeration> {
    enumerate_closed_with(l_max, monomials, probes, Exec::default())
}

pub fn enumerate_closed_with(
    l_max: usize,
    monomials: &[Vec<u32>],
    probes: &[[i64; 2]],
    exec: Exec,
) -> Result<ClosedEnumeration> {
    if l_max > MAX_ENUM_LEN {
        let h = l_max / 2;
        let walks = crate::special_fn::binom(l_max as i64, h as i64).powi(2);
        return arg(format!(
            "closed-walk enumeration limited to L <= {MAX_ENUM_LEN}; L = {l_max} has {walks:.3e} walks and ~4^{h} = {:.3e} search nodes per walk length",
            4f64.powi(h as i32)
        ));
    }
    if monomials.iter().flatten().any(|&k| k == 0) {
        return arg("multiplicity index k must be at least 1");
    }
    let rad = (l_max / 2) as i64;
    let width = 2 * rad as usize + 1;
    let kmax = l_max + 1;
    let empty = || ClosedEnumeration {
        l_max,
        walks: vec![0; l_max + 1],
        monomials: monomials.to_vec(),
        monomial_sums: vec![vec![0; l_max + 1]; monomials.len()],
        probes: probes.to_vec(),
        probe_counts: vec![vec![vec![0; l_max + 1]; kmax + 1]; probes.len()],
    };
    // Split by the first step; each branch owns its occupancy state.
    let parts = map_range(exec, if l_max == 0 { 0 } else { 4 }, |d| {
        let mut s = Dfs {
            l_max,
            rad,
            width,
            counts: vec![0; width * width],
            hist: vec![0; kmax + 2],
            monomials,
            probes: Vec::new(),
            out: empty(),
        };
        s.probes = probes
            .iter()
            .map(|p| if p[0].abs() + p[1].abs() <= rad { s.cell((p[0], p[1])) } else { usize::MAX })
            .collect();
        // out-of-range probes are never visited; point them at a dead cell
        s.counts.push(0);
        let dead = s.counts.len() - 1;
        for c in s.probes.iter_mut() {
            if *c == usize::MAX {
                *c = dead;
            }
        }
        let origin = s.cell((0, 0));
        s.counts[origin] = 1;
        s.hist[1] = 1;
        let (dx, dy) = DIRS[d];
        s.visit((dx, dy), 1);
        s.out
    });
    let mut out = empty();
    for part in parts {
        for l in 0..=l_max {
            out.walks[l] += part.walks[l];
            for i in 0..monomials.len() {
                out.monomial_sums[i][l] += part.monomial_sums[i][l];
            }
            for p in 0..probes.len() {
                for k in 0..=kmax {
                    out.probe_counts[p][k][l] += part.probe_counts[p][k][l];
                }
            }
        }
    }
    Ok(out)
}

/// Exact aggregates over all `4^n` walks of length `n` with free endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct UnrestrictedEnumeration {
    pub n: usize,
    pub walks: u64,
    pub ks: Vec<u32>,
    /// `power_sums[i][p-1] = Σ_w N_{2k_i}(w)^p` for `p = 1..=4`.
    pub power_sums: Vec<[u128; 4]>,
}

impl UnrestrictedEnumeration {
    pub fn mean(&self, i: usize) -> f64 {
        self.power_sums[i][0] as f64 / self.walks as f64
    }
}

/// Enumerates all walks of length `n ≤ 10` with free endpoints.
pub fn enumerate_unrestricted(n: usize, ks: &[u32]) -> Result<UnrestrictedEnumeration> {
    if n > 10 {
        return arg(format!("unrestricted enumeration limited to n <= 10 (4^{n} walks requested)"));
    }
    let total = 4u64.pow(n as u32);
    let mut power_sums = vec![[0u128; 4]; ks.len()];
    let mut path = Vec::with_capacity(n + 1);
    for code in 0..total {
        path.clear();
        let (mut x, mut y) = (0i64, 0i64);
        path.push((x, y));
        let mut c = code;
        for _ in 0..n {
            let (dx, dy) = DIRS[(c & 3) as usize];
            c >>= 2;
            x += dx;
            y += dy;
            path.push((x, y));
        }
        let counts = multiplicity_histogram(&path, false);
        for (i, &k) in ks.iter().enumerate() {
            let v = counts.get(2 * k as usize).copied().unwrap_or(0) as u128;
            let mut pw = 1u128;
            for p in 0..4 {
                pw *= v;
                power_sums[i][p] += pw;
            }
        }
    }
    Ok(UnrestrictedEnumeration { n, walks: total, ks: ks.to_vec(), power_sums })
}

// hist[mu] = number of points of multiplicity mu.
fn multiplicity_histogram(path: &[(i64, i64)], closed: bool) -> Vec<u32> {
    let mut mu: FxHashMap<(i64, i64), u32> = FxHashMap::default();
    fill_multiplicities(path, closed, &mut mu);
    let mut hist = vec![0u32; 2 * path.len() + 2];
    for &m in mu.values() {
        hist[m as usize] += 1;
    }
    hist
}

fn fill_multiplicities(path: &[(i64, i64)], closed: bool, mu: &mut FxHashMap<(i64, i64), u32>) {
    let n = path.len() - 1;
    if closed {
        for &p in &path[..n] {
            *mu.entry(p).or_insert(0) += 2;
        }
    } else {
        for (t, &p) in path.iter().enumerate() {
            *mu.entry(p).or_insert(0) += if t == 0 || t == n { 1 } else { 2 };
        }
    }
}

/// Root seed, stream id and sample count of a Monte Carlo run. Equal specs
/// give identical results regardless of the execution strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub root: u64,
    pub stream: u64,
    pub samples: u64,
}

/// SplitMix64 finalizer, used to derive independent seeds.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generator for batch `batch` of a seed spec.
pub fn batch_rng(root: u64, stream: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(root ^ mix64(stream)));
    rng.set_stream(batch);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WalkClass {
    Closed,
    Unrestricted,
}

/// Sample statistics of `N_{2k}` for one `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KStats {
    pub k: u32,
    pub mean: f64,
    /// Batch-means standard error of the mean.
    pub stderr: f64,
    /// Raw moments `E(N^p)`, `p = 1..=4`.
    pub raw: [f64; 4],
    /// Central moments of orders 2, 3, 4.
    pub central: [f64; 3],
}

/// Monte Carlo statistics of the multiple-point range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkStats {
    pub class: WalkClass,
    /// Number of steps of each sampled walk.
    pub length: usize,
    pub samples: u64,
    pub stats: Vec<KStats>,
}

impl WalkStats {
    /// CSV `n,samples,k,mean,stderr,m2,m3,m4` with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,samples,k,mean,stderr,m2,m3,m4\n");
        for k in &self.stats {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                self.length, self.samples, k.k, k.mean, k.stderr, k.central[0], k.central[1], k.central[2]
            ));
        }
        s
    }
}

/// Samples per batch; each batch has its own generator stream.
pub const BATCH: u64 = 256;

struct BatchSums {
    n: u64,
    sums: Vec<[f64; 4]>,
}

fn sample_batches(
    spec: SeedSpec,
    ks: &[u32],
    exec: Exec,
    draw: impl Fn(&mut ChaCha8Rng, &mut Vec<(i64, i64)>) + Sync + Send,
    closed: bool,
) -> Vec<BatchSums> {
    let nb = spec.samples.div_ceil(BATCH);
    map_range(exec, nb as usize, |b| {
        let b = b as u64;
        let count = BATCH.min(spec.samples - b * BATCH);
        let mut rng = batch_rng(spec.root, spec.stream, b);
        let mut path = Vec::new();
        let mut mu: FxHashMap<(i64, i64), u32> = FxHashMap::default();
        let mut hist: Vec<u32> = Vec::new();
        let mut sums = vec![[0.0; 4]; ks.len()];
        for _ in 0..count {
            draw(&mut rng, &mut path);
            mu.clear();
            fill_multiplicities(&path, closed, &mut mu);
            hist.clear();
            hist.resize(2 * path.len() + 2, 0);
            for &m in mu.values() {
                hist[m as usize] += 1;
            }
            for (i, &k) in ks.iter().enumerate() {
                let v = hist.get(2 * k as usize).copied().unwrap_or(0) as f64;
                let mut pw = 1.0;
                for p in 0..4 {
                    pw *= v;
                    sums[i][p] += pw;
                }
            }
        }
        BatchSums { n: count, sums }
    })
}

fn summarize(class: WalkClass, length: usize, spec: SeedSpec, ks: &[u32], batches: &[BatchSums]) -> WalkStats {
    let total: u64 = batches.iter().map(|b| b.n).sum();
    let stats = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let mut raw = [0.0; 4];
            for b in batches {
                for p in 0..4 {
                    raw[p] += b.sums[i][p];
                }
            }
            for r in raw.iter_mut() {
                *r /= total as f64;
            }
            let mean = raw[0];
            let stderr = if batches.len() >= 2 {
                let ss: f64 = batches
                    .iter()
                    .map(|b| {
                        let m = b.sums[i][0] / b.n as f64;
                        b.n as f64 * (m - mean) * (m - mean)
                    })
                    .sum();
                (ss / ((batches.len() - 1) as f64 * total as f64)).sqrt()
            } else {
                ((raw[1] - mean * mean).max(0.0) / total.max(1) as f64).sqrt()
            };
            KStats { k, mean, stderr, raw, central: central_from_raw(&raw) }
        })
        .collect();
    WalkStats { class, length, samples: spec.samples, stats }
}

/// Central moments of orders 2..4 from raw moments `E(X^p)`, `p = 1..=4`.
pub fn central_from_raw(raw: &[f64; 4]) -> [f64; 3] {
    let m = raw[0];
    [
        raw[1] - m * m,
        raw[2] - 3.0 * m * raw[1] + 2.0 * m.powi(3),
        raw[3] - 4.0 * m * raw[2] + 6.0 * m * m * raw[1] - 3.0 * m.powi(4),
    ]
}

/// Uniform closed walk of `2n` steps: `x+y` and `x−y` are independent
/// ±1 bridges, each a uniform shuffle of `n` up- and `n` down-steps.
pub fn sample_closed_walk(n: usize, rng: &mut impl Rng, path: &mut Vec<(i64, i64)>) {
    let mut u: Vec<i8> = (0..2 * n).map(|i| if i < n { 1 } else { -1 }).collect();
    let mut v = u.clone();
    u.shuffle(rng);
    v.shuffle(rng);
    path.clear();
    let (mut x, mut y) = (0i64, 0i64);
    path.push((x, y));
    for t in 0..2 * n {
        let (du, dv) = (u[t] as i64, v[t] as i64);
        x += (du + dv) / 2;
        y += (du - dv) / 2;
        path.push((x, y));
    }
}

/// Uniform walk of `n` steps from the origin.
pub fn sample_free_walk(n: usize, rng: &mut impl Rng, path: &mut Vec<(i64, i64)>) {
    path.clear();
    let (mut x, mut y) = (0i64, 0i64);
    path.push((x, y));
    for _ in 0..n {
        let (dx, dy) = DIRS[rng.gen_range(0..4)];
        x += dx;
        y += dy;
        path.push((x, y));
    }
}

/// Monte Carlo statistics of `N_{2k}` over uniform closed walks of `2n` steps.
pub fn mc_closed(n: usize, ks: &[u32], spec: SeedSpec, exec: Exec) -> Result<WalkStats> {
    check_mc(n, ks)?;
    let batches = sample_batches(spec, ks, exec, |rng, path| sample_closed_walk(n, rng, path), true);
    Ok(summarize(WalkClass::Closed, 2 * n, spec, ks, &batches))
}

/// Monte Carlo statistics of `N_{2k}` over uniform `n`-step walks.
pub fn mc_unrestricted(n: usize, ks: &[u32], spec: SeedSpec, exec: Exec) -> Result<WalkStats> {
    check_mc(n, ks)?;
    let batches = sample_batches(spec, ks, exec, |rng, path| sample_free_walk(n, rng, path), false);
    Ok(summarize(WalkClass::Unrestricted, n, spec, ks, &batches))
}

fn check_mc(n: usize, ks: &[u32]) -> Result<()> {
    if n == 0 || n > 1 << 20 {
        return arg(format!("walk size {n} outside 1..=2^20"));
    }
    if ks.contains(&0) {
        return arg("multiplicity index k must be at least 1");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_closed_walks() {
        let e = enumerate_closed(4, &[vec![1], vec![2]], &[[1, 0]]).unwrap();
        assert_eq!(e.walks[2], 4);
        assert_eq!(e.walks[4], 36);
        assert_eq!(e.monomial_sums[0][2], 8);
        assert_eq!(e.monomial_sums[0][4], 80);
        assert_eq!(e.monomial_sums[1][4], 32);
        assert_eq!(e.probe_counts[0][1][2], 1);
        assert!(enumerate_closed(16, &[], &[]).is_err());
    }

    #[test]
    fn one_step_walks_have_no_even_points() {
        let e = enumerate_unrestricted(1, &[1, 2]).unwrap();
        assert_eq!(e.power_sums[0][0], 0);
        assert_eq!(e.power_sums[1][0], 0);
    }

    #[test]
    fn closed_samples_return() {
        let mut rng = batch_rng(1, 2, 3);
        let mut path = Vec::new();
        for _ in 0..50 {
            sample_closed_walk(37, &mut rng, &mut path);
            assert_eq!(path.len(), 75);
            assert_eq!(*path.last().unwrap(), (0, 0));
            assert!(path.windows(2).all(|w| (w[0].0 - w[1].0).abs() + (w[0].1 - w[1].1).abs() == 1));
        }
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let spec = SeedSpec { root: 7, stream: 0, samples: 1000 };
        let a = mc_closed(10, &[1, 2], spec, Exec::Parallel).unwrap();
        let b = mc_closed(10, &[1, 2], spec, Exec::Sequential).unwrap();
        assert_eq!(a, b);
    }
}
