//! On-disk caches: one JSON graph-sum record per `(r, budget, seed)` and an
//! append-only JSON-lines file of per-graph integrals.

use multipoint::error::Error;
use multipoint::feynman::{self, GraphSumRecord, GraphSums, IntegralEntry, IntegralTable};
use multipoint::graph_enum::IntMatrix;
use multipoint::par::Exec;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::Failure;

pub const INTEGRALS_FILE: &str = "integrals.jsonl";

pub fn graph_sum_path(dir: &Path, r: usize, budget: u64, seed: u64) -> PathBuf {
    dir.join(format!("graph_sum_r{r}_b{budget}_s{seed}.json"))
}

fn corrupt(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))
}

/// Reads the cached record for `r`, computing and storing it when `compute`
/// is set. The two-vertex sum is deterministic and never needs the cache.
pub fn ensure_graph_sum(dir: &Path, r: usize, budget: u64, seed: u64, compute: bool, exec: Exec) -> Result<GraphSumRecord, Failure> {
    if r == 2 {
        return Ok(feynman::graph_sum(2, budget, seed, exec)?);
    }
    let path = graph_sum_path(dir, r, budget, seed);
    if path.exists() {
        let text = fs::read_to_string(&path)?;
        return serde_json::from_str(&text).map_err(|e| corrupt(&path, e));
    }
    if !compute {
        return Err(Error::MissingCache(vec![format!("r={r} ({})", path.display())]).into());
    }
    let rec = feynman::graph_sum(r, budget, seed, exec)?;
    fs::create_dir_all(dir)?;
    fs::write(&path, serde_json::to_string_pretty(&rec).expect("record serializes") + "\n")?;
    Ok(rec)
}

/// Graph sums for `r = 2..=r_max`; every missing order is reported at once.
pub fn load_graph_sums(dir: &Path, r_max: usize, budget: u64, seed: u64, compute: bool, exec: Exec) -> Result<GraphSums, Failure> {
    let mut sums = GraphSums::quadrature_only();
    let mut missing = Vec::new();
    for r in 3..=r_max {
        match ensure_graph_sum(dir, r, budget, seed, compute, exec) {
            Ok(rec) => sums.insert(rec),
            Err(Failure::Lib(Error::MissingCache(m))) => missing.extend(m),
            Err(e) => return Err(e),
        }
    }
    if missing.is_empty() {
        Ok(sums)
    } else {
        Err(Error::MissingCache(missing).into())
    }
}

fn read_entries(dir: &Path, budget: u64, seed: u64) -> Result<BTreeMap<IntMatrix, IntegralEntry>, Failure> {
    let path = dir.join(INTEGRALS_FILE);
    let mut map = BTreeMap::new();
    if !path.exists() {
        return Ok(map);
    }
    for line in fs::read_to_string(&path)?.lines().filter(|l| !l.trim().is_empty()) {
        let e: IntegralEntry = serde_json::from_str(line).map_err(|err| corrupt(&path, err))?;
        if e.budget == budget && e.seed == seed {
            map.insert(e.matrix()?, e);
        }
    }
    Ok(map)
}

pub fn load_integrals(dir: &Path, budget: u64, seed: u64) -> Result<IntegralTable, Failure> {
    let mut table = IntegralTable::default();
    for e in read_entries(dir, budget, seed)?.values() {
        table.insert(e)?;
    }
    Ok(table)
}

/// Integrals for `graphs` in order; entries not yet cached for this
/// `(budget, seed)` are computed and appended.
pub fn ensure_integrals(dir: &Path, graphs: &[IntMatrix], budget: u64, seed: u64, exec: Exec) -> Result<Vec<IntegralEntry>, Failure> {
    let mut known = read_entries(dir, budget, seed)?;
    let mut todo: Vec<IntMatrix> = graphs.iter().filter(|f| !known.contains_key(*f)).cloned().collect();
    todo.sort();
    todo.dedup();
    if !todo.is_empty() {
        let fresh = feynman::integral_entries(&todo, budget, seed, exec)?;
        fs::create_dir_all(dir)?;
        let mut file = fs::OpenOptions::new().create(true).append(true).open(dir.join(INTEGRALS_FILE))?;
        for (f, e) in todo.into_iter().zip(fresh) {
            writeln!(file, "{}", serde_json::to_string(&e).expect("entry serializes"))?;
            known.insert(f, e);
        }
    }
    Ok(graphs.iter().map(|f| known[f].clone()).collect())
}
