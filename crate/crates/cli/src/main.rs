mod cache;
mod crosscheck;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multipoint::error::Error;
use multipoint::feynman::{self, DEFAULT_BUDGET, DEFAULT_SEED};
use multipoint::graph_enum::{enumerate_balanced_with, GraphWeights, IntMatrix};
use multipoint::moments::{self, WalkClass};
use multipoint::par::{self, Exec};
use multipoint::walk_oracle::{self, SeedSpec};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug, Serialize)]
#[command(name = "multipoint", version, about = "Moments and characteristic functions of the multiple-point range of planar walks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct Common {
    /// Monte Carlo sample budget per graph integral.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "MULTIPOINT_THREADS")]
    threads: Option<usize>,
    /// Directory holding graph-sum and integral caches.
    #[arg(long, global = true, default_value = "multipoint-cache")]
    cache_dir: PathBuf,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Omit the timestamp header line so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ClassArg {
    Closed,
    Unrestricted,
}

impl From<ClassArg> for WalkClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Closed => WalkClass::Closed,
            ClassArg::Unrestricted => WalkClass::Unrestricted,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Which {
    Brownian,
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Gf,
    Best,
    Dam,
    Green,
    Constants,
    All,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Cmd {
    /// List the balanced strongly connected matrices with degree vector h.
    Enumerate {
        #[arg(long)]
        r: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        h: Vec<u32>,
    },
    /// Print cofactor, multiplicity weight and Euler-trail count per matrix.
    Weights {
        #[arg(long)]
        r: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        h: Vec<u32>,
    },
    /// Evaluate graph integrals and append them to the integral cache.
    Integrals {
        #[arg(long)]
        r: usize,
        /// Degree vector; without it every graph needed up to order M is used.
        #[arg(long, value_delimiter = ',')]
        h: Option<Vec<u32>>,
        #[arg(long = "M", default_value_t = 4)]
        order: usize,
    },
    /// Compute weighted graph sums for each r and store them in the cache.
    GraphSums {
        #[arg(long, value_delimiter = ',')]
        r: Vec<usize>,
        #[arg(long)]
        rmax: Option<usize>,
    },
    /// Asymptotic expansion of a mixed moment E(N_{2k1}...N_{2kr}).
    Moments {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u32>,
        #[arg(long = "M", default_value_t = 4)]
        order: usize,
        /// Walk lengths at which to evaluate the expansion.
        #[arg(long, value_delimiter = ',')]
        n: Vec<f64>,
        #[arg(long)]
        compute_missing: bool,
    },
    /// Leading central moments; second order also reports the correction.
    Central {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        n: Vec<f64>,
        #[arg(long)]
        compute_missing: bool,
    },
    /// Characteristic-function Taylor coefficients or values.
    Charfn {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long, default_value_t = 2)]
        rmax: usize,
        #[arg(long = "M", default_value_t = 4)]
        order: usize,
        /// Real arguments at which to evaluate instead of listing coefficients.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t: Vec<f64>,
        /// Sum of the λ parameters for the closed-walk limit.
        #[arg(long, default_value_t = 1.0)]
        lambda_sum: f64,
        #[arg(long)]
        compute_missing: bool,
    },
    /// Monte Carlo (or exhaustive) statistics of N_2k for sampled walks.
    Oracle {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u32>,
        #[arg(long, default_value_t = 1 << 14)]
        samples: u64,
        /// Enumerate every walk instead of sampling.
        #[arg(long)]
        exact: bool,
    },
    /// Run identity checks against exhaustive oracles and emit a pass/fail table.
    Crosscheck {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long = "Lmax", default_value_t = 10)]
        l_max: usize,
    },
}

enum Failure {
    Lib(Error),
    Io(std::io::Error),
    Checks(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Out = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.common.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        eprintln!("error: --threads must be positive");
        return ExitCode::from(2);
    }
    par::init_threads(threads);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(Error::Argument(m))) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(Error::MissingCache(list))) => {
            eprintln!("error: missing cache entries ({}):", list.len());
            for item in list {
                eprintln!("  {item}");
            }
            eprintln!("rerun with --compute-missing or fill the cache with `graph-sums` / `integrals`");
            ExitCode::from(3)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(4)
        }
        Err(Failure::Checks(n)) => {
            eprintln!("{n} check(s) failed");
            ExitCode::from(4)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let c = &cli.common;
    let (body, failed) = match &cli.cmd {
        Cmd::Crosscheck { suite, l_max } => {
            let rows = crosscheck::run(*suite, *l_max)?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            (crosscheck::render(&rows, c.format), failed)
        }
        cmd => (dispatch(cmd, c)?, 0),
    };
    let mut text = header(cli);
    text.push_str(&body);
    match &c.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}

fn header(cli: &Cli) -> String {
    let mut config = serde_json::to_value(&cli.cmd).expect("config serializes");
    let common = serde_json::to_value(&cli.common).expect("config serializes");
    if let (Some(a), Some(b)) = (config.as_object_mut(), common.as_object()) {
        for (k, v) in b {
            // thread count never changes results, so it stays out of the header
            if k != "threads" && k != "no_timestamp" {
                a.insert(k.clone(), v.clone());
            }
        }
    }
    let mut s = format!("# multipoint {} config={}\n", env!("CARGO_PKG_VERSION"), config);
    if !cli.common.no_timestamp {
        let _ = writeln!(s, "# generated {}", chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    }
    s
}

fn check_h(r: usize, h: &[u32]) -> Result<(), Failure> {
    if h.len() != r {
        return Err(Error::Argument(format!("--h has {} entries but --r is {r}", h.len())).into());
    }
    Ok(())
}

fn matrix_cell(f: &IntMatrix) -> String {
    f.rows().iter().map(|row| row.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")).collect::<Vec<_>>().join(";")
}

fn dispatch(cmd: &Cmd, c: &Common) -> Out {
    let exec = Exec::Parallel;
    let mut s = String::new();
    match cmd {
        Cmd::Enumerate { r, h } => {
            check_h(*r, h)?;
            let graphs = enumerate_balanced_with(*r, h, exec)?;
            if c.format == Format::Csv {
                s.push_str("index,matrix\n");
            }
            for (i, f) in graphs.iter().enumerate() {
                match c.format {
                    Format::Json => writeln!(s, "{}", f.to_json()),
                    Format::Csv => writeln!(s, "{i},{}", matrix_cell(f)),
                }
                .expect("write to string");
            }
        }
        Cmd::Weights { r, h } => {
            check_h(*r, h)?;
            let graphs = enumerate_balanced_with(*r, h, exec)?;
            if c.format == Format::Csv {
                s.push_str("matrix,cof,mult,trails,weight\n");
            }
            for f in &graphs {
                let w = GraphWeights::of(f);
                match c.format {
                    Format::Json => writeln!(
                        s,
                        "{}",
                        json!({"matrix": f.rows(), "cof": w.cof, "mult": w.mult.to_string(),
                               "trails": w.trails.to_string(), "weight": w.weight()})
                    ),
                    Format::Csv => writeln!(s, "{},{},{},{},{}", matrix_cell(f), w.cof, w.mult, w.trails, w.weight()),
                }
                .expect("write to string");
            }
        }
        Cmd::Integrals { r, h, order } => {
            let graphs = match h {
                Some(h) => {
                    check_h(*r, h)?;
                    enumerate_balanced_with(*r, h, exec)?
                }
                None => moments::moment_graphs(*r, *order)?,
            };
            let entries = cache::ensure_integrals(&c.cache_dir, &graphs, c.budget, c.seed, exec)?;
            if c.format == Format::Csv {
                s.push_str("matrix,I,I_stderr,scriptI,scriptI_stderr,method,samples\n");
            }
            for e in entries {
                match c.format {
                    Format::Json => writeln!(s, "{}", serde_json::to_string(&e).expect("entry serializes")),
                    Format::Csv => writeln!(
                        s,
                        "{},{},{},{},{},{},{}",
                        matrix_cell(&e.matrix()?),
                        e.i,
                        e.i_stderr,
                        e.script_i,
                        e.script_i_stderr,
                        serde_json::to_value(e.method).expect("method serializes").as_str().unwrap_or_default(),
                        e.samples
                    ),
                }
                .expect("write to string");
            }
        }
        Cmd::GraphSums { r, rmax } => {
            let mut rs = r.clone();
            if let Some(m) = rmax {
                rs.extend(2..=*m);
            }
            rs.sort_unstable();
            rs.dedup();
            if rs.is_empty() {
                return Err(Error::Argument("give --r or --rmax".into()).into());
            }
            if c.format == Format::Csv {
                s.push_str("r,count,sum_I,sum_I_stderr,sum_scriptI,sum_scriptI_stderr\n");
            }
            for r in rs {
                let rec = cache::ensure_graph_sum(&c.cache_dir, r, c.budget, c.seed, true, exec)?;
                match c.format {
                    Format::Json => writeln!(s, "{}", serde_json::to_string(&rec).expect("record serializes")),
                    Format::Csv => writeln!(
                        s,
                        "{},{},{},{},{},{}",
                        rec.r, rec.count, rec.sum_i, rec.sum_i_stderr, rec.sum_script_i, rec.sum_script_i_stderr
                    ),
                }
                .expect("write to string");
            }
        }
        Cmd::Moments { class, k, order, n, compute_missing } => {
            if *compute_missing && k.len() >= 3 {
                let graphs = moments::moment_graphs(k.len(), *order)?;
                cache::ensure_integrals(&c.cache_dir, &graphs, c.budget, c.seed, exec)?;
            }
            let table = cache::load_integrals(&c.cache_dir, c.budget, c.seed)?;
            let e = moments::moment_full((*class).into(), k, *order, &table)?;
            match c.format {
                Format::Json => {
                    let values: Vec<_> = n.iter().map(|&x| json!({"n": x, "value": e.eval(x)})).collect();
                    writeln!(s, "{}", json!({"expansion": e, "values": values})).expect("write to string");
                }
                Format::Csv => {
                    s.push_str("n,k,M,value\n");
                    for &x in n {
                        writeln!(s, "{}", e.csv_row(x)).expect("write to string");
                    }
                }
            }
        }
        Cmd::Central { class, k, n, compute_missing } => {
            let class: WalkClass = (*class).into();
            let sums = cache::load_graph_sums(&c.cache_dir, k.len(), c.budget, c.seed, *compute_missing, exec)?;
            let lead = moments::central_moment_leading(class, k, &sums)?;
            let second = (k.len() == 2).then(|| moments::second_moment_central(class, k[0], k[1], feynman::h3(), feynman::h4()));
            match c.format {
                Format::Json => {
                    let values: Vec<_> = n
                        .iter()
                        .map(|&x| json!({"n": x, "leading": lead.eval(class, x), "with_correction": second.map(|q| q.eval(class, x))}))
                        .collect();
                    writeln!(s, "{}", json!({"leading": lead, "second_order": second, "values": values})).expect("write to string");
                }
                Format::Csv => {
                    s.push_str("n,order,leading,with_correction\n");
                    for &x in n {
                        let corr = second.map_or(String::new(), |q| q.eval(class, x).to_string());
                        writeln!(s, "{x},{},{},{corr}", lead.order, lead.eval(class, x)).expect("write to string");
                    }
                }
            }
        }
        Cmd::Charfn { which, rmax, order, t, lambda_sum, compute_missing } => {
            let sums = cache::load_graph_sums(&c.cache_dir, *rmax, c.budget, c.seed, *compute_missing, exec)?;
            if t.is_empty() {
                let series = match which {
                    Which::Brownian => moments::char_brownian_series(*order, *rmax, &sums)?,
                    Which::Closed => moments::char_closed_series(*lambda_sum, *order, *rmax, &sums)?,
                };
                match c.format {
                    Format::Json => writeln!(s, "{}", series.to_json()).expect("write to string"),
                    Format::Csv => {
                        s.push_str("j,re,im,stderr\n");
                        for (j, (a, e)) in series.coeffs.iter().zip(&series.stderr).enumerate() {
                            writeln!(s, "{j},{},{},{e}", a.re, a.im).expect("write to string");
                        }
                    }
                }
            } else {
                if c.format == Format::Csv {
                    s.push_str("t,re,im\n");
                }
                for &x in t {
                    let z = Complex64::new(x, 0.0);
                    let v = match which {
                        Which::Brownian => moments::char_brownian_value(z, *rmax, &sums)?,
                        Which::Closed => moments::char_closed_value(*lambda_sum, z, *rmax, &sums)?,
                    };
                    match c.format {
                        Format::Json => writeln!(s, "{}", json!({"t": x, "re": v.re, "im": v.im})),
                        Format::Csv => writeln!(s, "{x},{},{}", v.re, v.im),
                    }
                    .expect("write to string");
                }
            }
        }
        Cmd::Oracle { class, n, k, samples, exact } => {
            let class: WalkClass = (*class).into();
            if *exact {
                s.push_str(&exact_oracle(class, *n, k, c.format)?);
            } else {
                let spec = SeedSpec { root: c.seed, stream: 0, samples: *samples };
                let stats = match class {
                    WalkClass::Closed => walk_oracle::mc_closed(*n, k, spec, exec)?,
                    WalkClass::Unrestricted => walk_oracle::mc_unrestricted(*n, k, spec, exec)?,
                };
                match c.format {
                    Format::Json => writeln!(s, "{}", serde_json::to_string(&stats).expect("stats serialize")).expect("write to string"),
                    Format::Csv => s.push_str(&stats.to_csv()),
                }
            }
        }
        Cmd::Crosscheck { .. } => unreachable!("handled by run"),
    }
    Ok(s)
}

fn exact_oracle(class: WalkClass, n: usize, k: &[u32], format: Format) -> Out {
    let mut s = String::new();
    let means: Vec<(u32, f64, u64)> = match class {
        WalkClass::Unrestricted => {
            let e = walk_oracle::enumerate_unrestricted(n, k)?;
            k.iter().enumerate().map(|(i, &kk)| (kk, e.mean(i), e.walks)).collect()
        }
        WalkClass::Closed => {
            let mono: Vec<Vec<u32>> = k.iter().map(|&kk| vec![kk]).collect();
            let e = walk_oracle::enumerate_closed(n, &mono, &[])?;
            let walks = e.walks[n];
            if walks == 0 {
                return Err(Error::Argument(format!("no closed walks of length {n}")).into());
            }
            k.iter()
                .enumerate()
                .map(|(i, &kk)| (kk, e.monomial_sums[i][n] as f64 / walks as f64, walks as u64))
                .collect()
        }
    };
    if format == Format::Csv {
        s.push_str("n,walks,k,mean\n");
    }
    for (kk, mean, walks) in means {
        match format {
            Format::Json => writeln!(s, "{}", json!({"n": n, "walks": walks, "k": kk, "mean": mean})),
            Format::Csv => writeln!(s, "{n},{walks},{kk},{mean}"),
        }
        .expect("write to string");
    }
    Ok(s)
}
