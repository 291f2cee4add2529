//! Balanced zero-diagonal integer matrices (adjacency matrices of Eulerian
//! multidigraphs), their enumeration by degree vector, and the combinatorial
//! weights attached to them: the Laplacian cofactor, the multiplicity weight
//! `∏ 1/F_ij!`, Euler circuit counts and the dam reduction.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::par::{map_range, Exec};

/// Square matrix of nonnegative integers stored row-major.
///
/// Used both for balanced zero-diagonal matrices and for the loopy matrices
/// produced by [`reduce_dam`]. Degrees always count off-diagonal entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    r: usize,
    entries: Vec<u32>,
}

/// Adjacency matrix of an Eulerian multidigraph: zero diagonal, row sum i
/// equal to column sum i.
pub type BalancedMatrix = IntMatrix;
/// Like [`BalancedMatrix`] but with loops allowed on the diagonal.
pub type LoopyMatrix = IntMatrix;

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    r: usize,
    rows: Vec<Vec<u32>>,
}

impl IntMatrix {
    /// Builds a matrix from its rows. Rows must all have length `rows.len()`.
    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return arg("matrix must have at least one row");
        }
        let mut entries = Vec::with_capacity(r * r);
        for row in rows {
            if row.len() != r {
                return arg(format!("row of length {} in a {r}x{r} matrix", row.len()));
            }
            entries.extend_from_slice(row);
        }
        Ok(IntMatrix { r, entries })
    }

    /// Builds an `r`×`r` matrix from row-major entries.
    pub fn from_entries(r: usize, entries: Vec<u32>) -> Result<Self> {
        if entries.len() != r * r {
            return arg(format!("{} entries for a {r}x{r} matrix", entries.len()));
        }
        Ok(IntMatrix { r, entries })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.r + j]
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.entries.chunks(self.r).map(|c| c.to_vec()).collect()
    }

    /// Off-diagonal row sums.
    pub fn out_degrees(&self) -> Vec<u32> {
        (0..self.r)
            .map(|i| (0..self.r).filter(|&j| j != i).map(|j| self.get(i, j)).sum())
            .collect()
    }

    /// Off-diagonal column sums.
    pub fn in_degrees(&self) -> Vec<u32> {
        (0..self.r)
            .map(|j| (0..self.r).filter(|&i| i != j).map(|i| self.get(i, j)).sum())
            .collect()
    }

    /// Off-diagonal degree vector; panics-free even when unbalanced (then it
    /// is just the out-degree vector).
    pub fn degrees(&self) -> Vec<u32> {
        self.out_degrees()
    }

    pub fn is_balanced(&self) -> bool {
        self.out_degrees() == self.in_degrees()
    }

    pub fn has_loops(&self) -> bool {
        (0..self.r).any(|i| self.get(i, i) != 0)
    }

    /// Total number of off-diagonal edges.
    pub fn edge_count(&self) -> u32 {
        self.out_degrees().iter().sum()
    }

    pub fn transpose(&self) -> Self {
        let r = self.r;
        let mut entries = vec![0; r * r];
        for i in 0..r {
            for j in 0..r {
                entries[j * r + i] = self.get(i, j);
            }
        }
        IntMatrix { r, entries }
    }

    /// Returns `P F Pᵀ`, i.e. vertex `i` becomes vertex `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let r = self.r;
        let mut entries = vec![0; r * r];
        for i in 0..r {
            for j in 0..r {
                entries[perm[i] * r + perm[j]] = self.get(i, j);
            }
        }
        IntMatrix { r, entries }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixJson { r: self.r, rows: self.rows() })
            .expect("matrix serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: MatrixJson =
            serde_json::from_str(s).map_err(|e| Error::Argument(format!("matrix json: {e}")))?;
        let out = Self::from_rows(&m.rows)?;
        if out.r != m.r {
            return arg(format!("declared r={} but {} rows", m.r, out.r));
        }
        Ok(out)
    }
}

/// Combinatorial weights of a balanced matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphWeights {
    pub cof: i64,
    pub mult: BigRational,
    pub trails: BigInt,
}

impl GraphWeights {
    pub fn of(f: &BalancedMatrix) -> Self {
        let cof = cofactor(f);
        let mut trails = BigInt::from(cof);
        for h in f.degrees() {
            trails *= factorial(h.saturating_sub(1));
        }
        GraphWeights { cof, mult: mult_weight(f), trails }
    }

    /// `M(F)·cof(A−F)` as a float.
    pub fn weight(&self) -> f64 {
        self.mult.to_f64().unwrap_or(f64::NAN) * self.cof as f64
    }
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Strong connectivity of the multidigraph on all `r` vertices, via Tarjan's
/// algorithm. Loops are ignored.
pub fn is_strongly_connected(f: &IntMatrix) -> bool {
    let r = f.r();
    struct State {
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        components: usize,
    }
    fn visit(v: usize, f: &IntMatrix, s: &mut State) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for w in 0..f.r() {
            if w == v || f.get(v, w) == 0 {
                continue;
            }
            match s.index[w] {
                None => {
                    visit(w, f, s);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            s.components += 1;
            while let Some(w) = s.stack.pop() {
                s.on_stack[w] = false;
                if w == v {
                    break;
                }
            }
        }
    }
    let mut s = State {
        index: vec![None; r],
        low: vec![0; r],
        on_stack: vec![false; r],
        stack: Vec::new(),
        next: 0,
        components: 0,
    };
    for v in 0..r {
        if s.index[v].is_none() {
            visit(v, f, &mut s);
        }
    }
    s.components == 1
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn det_bareiss(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(p) => {
                    a.swap(k, p);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j] * a[k][k] - a[i][k] * a[k][j];
                a[i][j] = num / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Cofactor of the Laplacian `A − F` obtained by deleting the last row and
/// column. `A` holds the off-diagonal degrees and loops are ignored, so the
/// value is the number of arborescences rooted at the last vertex; for
/// balanced matrices all cofactors coincide.
pub fn cofactor(f: &IntMatrix) -> i64 {
    cofactor_at(f, f.r() - 1)
}

/// Cofactor with row and column `k` deleted.
pub fn cofactor_at(f: &IntMatrix, k: usize) -> i64 {
    let r = f.r();
    let deg = f.out_degrees();
    let idx: Vec<usize> = (0..r).filter(|&i| i != k).collect();
    let m: Vec<Vec<i128>> = idx
        .iter()
        .map(|&i| {
            idx.iter()
                .map(|&j| if i == j { deg[i] as i128 } else { -(f.get(i, j) as i128) })
                .collect()
        })
        .collect();
    det_bareiss(m) as i64
}

/// `M(F) = ∏_{i≠j} 1/F_ij!` as an exact rational.
pub fn mult_weight(f: &IntMatrix) -> BigRational {
    let mut den = BigInt::one();
    for i in 0..f.r() {
        for j in 0..f.r() {
            if i != j {
                den *= factorial(f.get(i, j));
            }
        }
    }
    BigRational::new(BigInt::one(), den)
}

/// All balanced zero-diagonal matrices with degree vector `h` whose
/// multidigraph is strongly connected, in lexicographic row-major order.
pub fn enumerate_balanced(r: usize, h: &[u32]) -> Result<Vec<BalancedMatrix>> {
    enumerate_balanced_with(r, h, Exec::default())
}

/// [`enumerate_balanced`] with an explicit execution strategy. The search is
/// split by the choice of the first row and merged in order.
pub fn enumerate_balanced_with(r: usize, h: &[u32], exec: Exec) -> Result<Vec<BalancedMatrix>> {
    if h.len() != r {
        return arg(format!("degree vector has length {} but r = {r}", h.len()));
    }
    if r < 2 {
        return arg("r must be at least 2");
    }
    if h.contains(&0) {
        return arg("all degrees must be at least 1");
    }
    let mut first_rows = Vec::new();
    let mut row = vec![0u32; r];
    let col: Vec<u32> = h.to_vec();
    fill_from(0, 0, h[0], &mut row, &col, &mut |row| first_rows.push(row.to_vec()));

    let parts = map_range(exec, first_rows.len(), |t| {
        let mut e = vec![0u32; r * r];
        e[..r].copy_from_slice(&first_rows[t]);
        let mut col = h.to_vec();
        for j in 0..r {
            col[j] -= first_rows[t][j];
        }
        let mut out = Vec::new();
        if feasible(1, r, h, &col) {
            search(1, r, h, &mut e, &mut col, &mut out);
        }
        out
    });
    let mut out: Vec<BalancedMatrix> = parts.into_iter().flatten().collect();
    out.retain(|m| {
        let sc = is_strongly_connected(m);
        debug_assert_eq!(sc, cofactor(m) != 0, "connectivity and cofactor disagree");
        sc
    });
    Ok(out)
}

// Distributes `left` units over row `i`, columns `j..r` (skipping the
// diagonal), bounded by the column residuals; calls `emit` for each filling.
fn fill_from(i: usize, j: usize, left: u32, row: &mut [u32], col: &[u32], emit: &mut dyn FnMut(&[u32])) {
    let r = row.len();
    if j == r {
        if left == 0 {
            emit(row);
        }
        return;
    }
    if j == i {
        row[j] = 0;
        fill_from(i, j + 1, left, row, col, emit);
        return;
    }
    let last = (j + 1..r).all(|jj| jj == i);
    let hi = left.min(col[j]);
    let lo = if last { left } else { 0 };
    if lo > hi {
        return;
    }
    for v in lo..=hi {
        row[j] = v;
        fill_from(i, j + 1, left - v, row, col, emit);
    }
    row[j] = 0;
}

// Column j residual must be coverable by the rows still to be filled, none
// of which may use its own diagonal.
fn feasible(next_row: usize, r: usize, h: &[u32], col: &[u32]) -> bool {
    (0..r).all(|j| {
        let avail: u32 = (next_row..r).filter(|&i| i != j).map(|i| h[i]).sum();
        col[j] <= avail
    })
}

fn search(i: usize, r: usize, h: &[u32], e: &mut Vec<u32>, col: &mut Vec<u32>, out: &mut Vec<BalancedMatrix>) {
    if i == r {
        if col.iter().all(|&c| c == 0) {
            out.push(IntMatrix { r, entries: e.clone() });
        }
        return;
    }
    let mut rows = Vec::new();
    let mut row = vec![0u32; r];
    fill_from(i, 0, h[i], &mut row, col, &mut |row| rows.push(row.to_vec()));
    for row in rows {
        for j in 0..r {
            col[j] -= row[j];
        }
        if feasible(i + 1, r, h, col) {
            e[i * r..(i + 1) * r].copy_from_slice(&row);
            search(i + 1, r, h, e, col, out);
        }
        for j in 0..r {
            col[j] += row[j];
        }
    }
    e[i * r..(i + 1) * r].iter_mut().for_each(|x| *x = 0);
}

/// Smallest vertex with off-diagonal out-degree 1 and in-degree 1.
pub fn find_dam(f: &IntMatrix) -> Option<usize> {
    let (o, n) = (f.out_degrees(), f.in_degrees());
    (0..f.r()).find(|&i| o[i] == 1 && n[i] == 1)
}

/// Removes the smallest dam `i₀` by lifting its in- and out-edge into one
/// edge: `(F_ld)_{i,j} = F_{i',j'} + F_{i',i₀}·F_{i₀,j'}` where `i'` skips
/// over `i₀`. Diagonal entries created this way are kept as loops.
pub fn reduce_dam(f: &IntMatrix) -> Result<LoopyMatrix> {
    let i0 = match find_dam(f) {
        Some(i) => i,
        None => return arg("matrix has no dam (vertex of in- and out-degree 1)"),
    };
    let r = f.r();
    if r < 2 {
        return arg("cannot reduce a single vertex");
    }
    let shift = |i: usize| if i >= i0 { i + 1 } else { i };
    let mut entries = Vec::with_capacity((r - 1) * (r - 1));
    for i in 0..r - 1 {
        for j in 0..r - 1 {
            let (a, b) = (shift(i), shift(j));
            entries.push(f.get(a, b) + f.get(a, i0) * f.get(i0, b));
        }
    }
    Ok(IntMatrix { r: r - 1, entries })
}

/// Euler circuit count of a strongly connected balanced multidigraph with
/// distinguishable parallel edges and a fixed first edge, by the BEST
/// theorem: `cof(A−F)·∏(h_i − 1)!`.
pub fn euler_circuit_count(f: &BalancedMatrix, start_edge: (usize, usize)) -> Result<BigInt> {
    check_circuit_input(f, start_edge)?;
    Ok(GraphWeights::of(f).trails)
}

/// Same count as [`euler_circuit_count`] by exhaustive search over trails.
/// Exponential; meant for small graphs.
pub fn euler_circuits_exhaustive(f: &BalancedMatrix, start_edge: (usize, usize)) -> Result<u64> {
    check_circuit_input(f, start_edge)?;
    let r = f.r();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..r {
        for j in 0..r {
            if i != j {
                for _ in 0..f.get(i, j) {
                    edges.push((i, j));
                }
            }
        }
    }
    let first = edges.iter().position(|&e| e == start_edge).expect("checked above");
    let mut used = vec![false; edges.len()];
    used[first] = true;
    fn walk(at: usize, home: usize, left: usize, edges: &[(usize, usize)], used: &mut [bool]) -> u64 {
        if left == 0 {
            return u64::from(at == home);
        }
        let mut total = 0;
        for e in 0..edges.len() {
            if !used[e] && edges[e].0 == at {
                used[e] = true;
                total += walk(edges[e].1, home, left - 1, edges, used);
                used[e] = false;
            }
        }
        total
    }
    Ok(walk(start_edge.1, start_edge.0, edges.len() - 1, &edges, &mut used))
}

fn check_circuit_input(f: &BalancedMatrix, (a, b): (usize, usize)) -> Result<()> {
    if !f.is_balanced() || f.has_loops() {
        return arg("euler circuits need a balanced zero-diagonal matrix");
    }
    if !is_strongly_connected(f) {
        return arg("graph is not strongly connected");
    }
    if a >= f.r() || b >= f.r() || a == b || f.get(a, b) == 0 {
        return arg(format!("start edge ({a},{b}) is not an edge"));
    }
    Ok(())
}
