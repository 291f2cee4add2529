//! Identity checks against exhaustive oracles.

use multipoint::error::Error;
use multipoint::feynman;
use multipoint::graph_enum::{cofactor, enumerate_balanced, euler_circuit_count, euler_circuits_exhaustive, find_dam, reduce_dam};
use multipoint::lattice_green::{first_moment_gf, h_series, multiplicity_fixed_gf};
use multipoint::special_fn::binom;
use multipoint::walk_oracle::{enumerate_closed, MAX_ENUM_LEN};
use num_bigint::BigInt;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write;

use crate::{Failure, Format, Suite};

#[derive(Debug, Serialize)]
pub struct Row {
    pub suite: &'static str,
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

fn row(suite: &'static str, check: impl Into<String>, pass: bool, detail: impl Into<String>) -> Row {
    Row { suite, check: check.into(), pass, detail: detail.into() }
}

pub fn run(suite: Suite, l_max: usize) -> Result<Vec<Row>, Failure> {
    if l_max > MAX_ENUM_LEN {
        return Err(Error::Argument(format!("--Lmax is limited to {MAX_ENUM_LEN} by exhaustive enumeration")).into());
    }
    let mut rows = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Gf {
        gf(l_max, &mut rows)?;
    }
    if all || suite == Suite::Best {
        best(&mut rows)?;
    }
    if all || suite == Suite::Dam {
        dam(&mut rows)?;
    }
    if all || suite == Suite::Green {
        green(&mut rows)?;
    }
    if all || suite == Suite::Constants {
        constants(&mut rows)?;
    }
    Ok(rows)
}

const PROBES: [[i64; 2]; 3] = [[1, 0], [1, 1], [2, 0]];

fn gf(l_max: usize, rows: &mut Vec<Row>) -> Result<(), Failure> {
    let mono: Vec<Vec<u32>> = (1..=3).map(|k| vec![k]).collect();
    let probes: Vec<[i64; 2]> = PROBES.iter().map(|p| [-p[0], -p[1]]).collect();
    let e = enumerate_closed(l_max, &mono, &probes)?;
    for k in 1..=3u32 {
        let s = first_moment_gf(k, l_max)?;
        let bad: Vec<usize> =
            (0..=l_max).filter(|&l| s.int_coeff(l)!= Some(BigInt::from(e.monomial_sums[k as usize - 1][l]))).collect();
        rows.push(row("gf", format!("first_moment_gf k={k} L<={l_max}"), bad.is_empty(), format!("mismatched lengths {bad:?}")));
    }
    for (p, y) in PROBES.iter().enumerate() {
        for k in 1..=3u32 {
            let s = multiplicity_fixed_gf(*y, k, l_max)?;
            let bad: Vec<usize> = (0..=l_max)
                .filter(|&l| {
                    let expect = e.probe_counts[p].get(k as usize).map_or(0, |v| v[l]);
                    s.int_coeff(l)!= Some(BigInt::from(expect))
                })
                .collect();
            rows.push(row(
                "gf",
                format!("multiplicity_fixed_gf y={y:?} k={k} L<={l_max}"),
                bad.is_empty(),
                format!("mismatched lengths {bad:?}"),
            ));
        }
    }
    Ok(())
}

fn degree_vectors(r: usize, max_total: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                let used: u32 = v.iter().sum();
                (1..=max_total.saturating_sub(used)).map(move |h| {
                    let mut w = v.clone();
                    w.push(h);
                    w
                })
            })
            .collect();
    }
    out
}

fn best(rows: &mut Vec<Row>) -> Result<(), Failure> {
    let (mut graphs, mut starts, mut bad) = (0, 0, 0);
    for r in 2..=6 {
        for h in degree_vectors(r, 6) {
            for f in enumerate_balanced(r, &h)? {
                graphs += 1;
                for a in 0..r {
                    for b in 0..r {
                        if f.get(a, b) > 0 {
                            starts += 1;
                            if euler_circuit_count(&f, (a, b))? != BigInt::from(euler_circuits_exhaustive(&f, (a, b))?) {
                                bad += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    rows.push(row("best", "Euler circuits, <= 6 edges", bad == 0, format!("{graphs} graphs, {starts} start edges, {bad} mismatches")));
    Ok(())
}

fn dam(rows: &mut Vec<Row>) -> Result<(), Failure> {
    let (mut checked, mut looped, mut bad) = (0, 0, 0);
    for r in 3..=5 {
        for h in degree_vectors(r, 9) {
            if !h.contains(&1) {
                continue;
            }
            for f in enumerate_balanced(r, &h)? {
                if find_dam(&f).is_none() {
                    continue;
                }
                let ld = reduce_dam(&f)?;
                checked += 1;
                looped += usize::from(ld.has_loops());
                if cofactor(&f) != cofactor(&ld) {
                    bad += 1;
                }
            }
        }
    }
    rows.push(row(
        "dam",
        "cofactor invariance under dam reduction",
        bad == 0 && looped > 0 && looped < checked,
        format!("{checked} graphs ({looped} reduce to loops), {bad} mismatches"),
    ));
    Ok(())
}

fn green(rows: &mut Vec<Row>) -> Result<(), Failure> {
    let s = h_series(&[0, 0], 2, 20)?;
    let bad: Vec<usize> = (1..=10usize)
        .filter(|&n| s.int_coeff(2 * n)!= Some(BigInt::from(binom(2 * n as i64, n as i64).powi(2) as u64)))
        .collect();
    rows.push(row("green", "h(0,2) coefficients = C(2n,n)^2, n<=10", bad.is_empty(), format!("mismatched n {bad:?}")));
    Ok(())
}

fn constants(rows: &mut Vec<Row>) -> Result<(), Failure> {
    let f1 = multipoint::graph_enum::IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]])?;
    let i1 = feynman::integral_i(&f1, 0, 0)?.value;
    rows.push(row("constants", "I(F1) = 4/pi", (i1 - 4.0 / PI).abs() < 1e-8, format!("{i1:.15}")));
    let series = (2.0 / PI).powi(3) * 2.0 * PI * feynman::k0_cube_moment_series(200_000);
    let h3 = feynman::h3();
    rows.push(row("constants", "H3 quadrature = series", (h3 - series).abs() < 1e-6, format!("{h3:.15} vs {series:.15}")));
    let f2 = multipoint::graph_enum::IntMatrix::from_rows(&[vec![0, 2], vec![2, 0]])?;
    let (i2, s2) = feynman::integrals(&f2, 0, 0, multipoint::par::Exec::Sequential)?;
    let ok = (i2.value - feynman::h4()).abs() < 1e-12 && (s2.value / 4.0 - h3).abs() < 1e-12;
    rows.push(row("constants", "H4 = I(F2), H3 = scriptI(F2)/4", ok, format!("{:.15}, {:.15}", i2.value, s2.value / 4.0)));
    Ok(())
}

pub fn render(rows: &[Row], format: Format) -> String {
    let mut s = String::new();
    match format {
        Format::Json => {
            for r in rows {
                writeln!(s, "{}", serde_json::to_string(r).expect("row serializes")).expect("write to string");
            }
        }
        Format::Csv => {
            s.push_str("suite,check,status,detail\n");
            for r in rows {
                writeln!(s, "{},\"{}\",{},\"{}\"", r.suite, r.check, if r.pass { "PASS" } else { "FAIL" }, r.detail).expect("write to string");
            }
        }
    }
    s
}
