use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use treecipher::analytics::{a_n, a_pq, delta_f, f_variadic, state_bound, optimal_order, TupleSeq};
use treecipher::dag::{compress, dag_from_json, dag_stats, dag_to_dot, dag_to_json, decompress};
use treecipher::dag_rw::{compress_rw, decompress_rw, rw_from_json, rw_stats, rw_to_dot, rw_to_json};
use treecipher::miner::{mine, summarize};
use treecipher::solver::{decide, IsoRelation, IsoResult, SolveOptions, Verdict};
use treecipher::synthgen::{derive_seed, gen_iso_pair, gen_noniso_pair, gen_tree, GenSpec, PairKind};
use treecipher::text::{tree_from_json, write_dataset};
use treecipher::{compute_stats, parse_dataset, parse_tree, serialize_tree, LabeledTree, Relation};

const EXIT_OK: u8 = 0;
const EXIT_NOT_ISO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;

/// Tree ciphering isomorphism, DAG compression up to label renaming, and
/// frequent subtree mining.
#[derive(Debug, Parser)]
#[command(name = "treecipher", version, about)]
struct Cli {
    /// Output format where a command supports more than one.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rel {
    Topo,
    Label,
    Cipher,
}

impl From<Rel> for IsoRelation {
    fn from(r: Rel) -> Self {
        match r {
            Rel::Topo => IsoRelation::Topo,
            Rel::Label => IsoRelation::Label,
            Rel::Cipher => IsoRelation::Cipher,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Pair {
    Iso,
    Noniso,
    Single,
}

impl From<Pair> for PairKind {
    fn from(p: Pair) -> Self {
        match p {
            Pair::Iso => PairKind::Iso,
            Pair::Noniso => PairKind::NonIso,
            Pair::Single => PairKind::Single,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether two trees are isomorphic.
    ///
    /// Exits 0 when they are, 1 when they are not and 3 when the step limit
    /// was hit first.
    Iso {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Rel::Cipher)]
        relation: Rel,
        /// Maximum number of backtracking states.
        #[arg(long)]
        step_limit: Option<u64>,
        /// Write the search-space snapshots to this file.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
    },
    /// Compress a tree into a DAG (topo, label) or a DAG-RW (cipher).
    Compress {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Rel::Cipher)]
        relation: Rel,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a Graphviz rendering.
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
        /// Step limit for each equivalence test (cipher only).
        #[arg(long)]
        step_limit: Option<u64>,
    },
    /// Rebuild a tree from a compressed JSON file.
    Decompress {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mine frequent patterns from a file with one tree per line.
    Mine {
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = Rel::Cipher)]
        relation: Rel,
        #[arg(long, default_value_t = 0.05)]
        min_support: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        step_limit: Option<u64>,
        /// Emit `pattern,size,frequency,origin_count` rows.
        #[arg(long)]
        csv: bool,
        /// Emit pattern and frequent-pattern counts for all relations instead.
        #[arg(long, conflicts_with = "csv")]
        summary: bool,
    },
    /// Generate random trees.
    Gen {
        #[arg(long)]
        nodes: usize,
        /// Proportion of distinct labels.
        #[arg(long)]
        label_prop: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Pair::Single)]
        pair: Pair,
        /// Output prefix; writes PREFIX.1.tree and, for pairs, PREFIX.2.tree.
        #[arg(long)]
        out: String,
        #[arg(long, default_value_t = 100)]
        max_retries: usize,
    },
    /// Time the solver on generated pairs over a grid of sizes and label
    /// proportions.
    Bench {
        /// START:END:STEP or a single value.
        #[arg(long, default_value = "50:500:50")]
        sizes: String,
        /// START:END:STEP or a single value.
        #[arg(long, default_value = "0.1:0.9:0.1")]
        props: String,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Pair::Iso)]
        pair: Pair,
        /// CSV file with one row per solved pair.
        #[arg(long)]
        out: PathBuf,
        /// JSON file with per-(n, p) quantiles.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        step_limit: Option<u64>,
        #[arg(long, default_value_t = 100)]
        max_retries: usize,
    },
    /// Evaluate the backtracking-size model.
    #[command(group(ArgGroup::new("query").required(true).multiple(true)))]
    Model {
        #[arg(long, value_name = "N", group = "query")]
        a_n: Option<u64>,
        #[arg(long, num_args = 2, value_names = ["P", "Q"], group = "query")]
        a_pq: Option<Vec<u64>>,
        /// Tuple sequence "n:alpha,n:alpha,...".
        #[arg(long, value_name = "TUPLES", group = "query")]
        f: Option<String>,
        /// Also print the optimal order of the --f tuples and its value.
        #[arg(long, requires = "f")]
        order: bool,
        #[arg(long, num_args = 4, value_names = ["M", "N", "ALPHA", "BETA"], group = "query", allow_negative_numbers = false)]
        delta: Option<Vec<u64>>,
        /// Bound on backtracking states for a search space of this size.
        #[arg(long, value_name = "N", group = "query")]
        bound: Option<String>,
    },
    /// Compression statistics of a tree.
    Stats {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Rel::Cipher)]
        relation: Rel,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

/// Tree text, or a JSON tree when the file starts with `{`.
fn load_tree(path: &Path) -> Result<LabeledTree> {
    let src = read(path)?;
    let src = src.trim();
    let t = if src.starts_with('{') {
        tree_from_json(src)?
    } else {
        parse_tree(src)?
    };
    Ok(t)
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Isomorphic => "isomorphic",
        Verdict::NotIsomorphic => "not_isomorphic",
        Verdict::Unknown => "unknown",
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Iso { a, b, relation, step_limit, trace } => {
            let (t1, t2) = (load_tree(&a)?, load_tree(&b)?);
            let opts = SolveOptions { step_limit, trace: trace.is_some() };
            let r = decide(&t1, &t2, relation.into(), opts);
            let out = iso_json(&r, relation);
            if let (Some(path), Some(tr)) = (&trace, &r.trace) {
                emit(Some(path), &serde_json::to_string_pretty(&tr.snapshots)?)?;
            }
            if cli.format == Format::Csv {
                emit(None, &iso_csv(&r, relation)?)?;
            } else {
                println!("{}", serde_json::to_string_pretty(&out)?);
            }
            Ok(match r.verdict {
                Verdict::Isomorphic => EXIT_OK,
                Verdict::NotIsomorphic => EXIT_NOT_ISO,
                Verdict::Unknown => EXIT_UNKNOWN,
            })
        }
        Command::Compress { input, relation, out, dot, step_limit } => {
            let t = load_tree(&input)?;
            let (json, graph) = match relation {
                Rel::Cipher => {
                    let d = compress_rw(&t, step_limit);
                    (rw_to_json(&d), rw_to_dot(&d))
                }
                Rel::Topo | Rel::Label => {
                    let rel = if relation == Rel::Topo { Relation::Topo } else { Relation::Label };
                    let d = compress(&t, rel);
                    (dag_to_json(&d), dag_to_dot(&d))
                }
            };
            emit(out.as_deref(), &(json + "\n"))?;
            if let Some(p) = dot {
                emit(Some(&p), &graph)?;
            }
            Ok(EXIT_OK)
        }
        Command::Decompress { input, out } => {
            let src = read(&input)?;
            let v: Value = serde_json::from_str(&src).context("parsing compressed file")?;
            // plain DAGs carry their relation, DAG-RW files do not
            let t = if v.get("relation").is_some() {
                decompress(&dag_from_json(&src)?)?
            } else {
                decompress_rw(&rw_from_json(&src)?)?
            };
            emit(out.as_deref(), &(serialize_tree(&t) + "\n"))?;
            Ok(EXIT_OK)
        }
        Command::Mine { dataset, relation, min_support, out, step_limit, csv, summary } => {
            let trees = parse_dataset(&read(&dataset)?)?;
            if summary {
                let s = summarize(&trees, min_support, step_limit)?;
                let text = if cli.format == Format::Csv {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["relation", "patterns", "frequent_patterns"])?;
                    for r in &s.rows {
                        w.serialize((rel_name(r.relation), r.patterns, r.frequent_patterns))?;
                    }
                    String::from_utf8(w.into_inner()?)?
                } else {
                    serde_json::to_string_pretty(&s)? + "\n"
                };
                emit(out.as_deref(), &text)?;
                return Ok(EXIT_OK);
            }
            let report = mine(&trees, relation.into(), min_support, step_limit)?;
            let text = if csv || cli.format == Format::Csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["pattern", "size", "frequency", "origin_count"])?;
                for e in &report.entries {
                    w.serialize((&e.pattern, e.size, e.frequency, e.origin.len()))?;
                }
                String::from_utf8(w.into_inner()?)?
            } else {
                serde_json::to_string_pretty(&report)? + "\n"
            };
            emit(out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Gen { nodes, label_prop, seed, pair, out, max_retries } => {
            let spec = GenSpec::new(nodes, label_prop, seed, pair.into())?;
            let trees = match pair {
                Pair::Single => vec![gen_tree(&spec)?],
                Pair::Iso => {
                    let (a, b) = gen_iso_pair(&spec)?;
                    vec![a, b]
                }
                Pair::Noniso => {
                    let (a, b) = gen_noniso_pair(&spec, max_retries)?;
                    vec![a, b]
                }
            };
            for (i, t) in trees.iter().enumerate() {
                let path = PathBuf::from(format!("{out}.{}.tree", i + 1));
                emit(Some(&path), &write_dataset(std::slice::from_ref(t)))?;
            }
            Ok(EXIT_OK)
        }
        Command::Bench { sizes, props, reps, seed, pair, out, summary, step_limit, max_retries } => {
            if pair == Pair::Single {
                bail!("bench needs --pair iso or --pair noniso");
            }
            let sizes = parse_int_range(&sizes)?;
            let props = parse_float_range(&props)?;
            bench(&sizes, &props, reps, seed, pair.into(), &out, summary.as_deref(), step_limit, max_retries)?;
            Ok(EXIT_OK)
        }
        Command::Model { a_n: n, a_pq: pq, f, order, delta, bound } => {
            let mut lines: Vec<String> = Vec::new();
            if let Some(n) = n {
                if n == 0 {
                    bail!("a_n needs n >= 1");
                }
                lines.push(a_n(n).to_string());
            }
            if let Some(v) = pq {
                if v.contains(&0) {
                    bail!("a_pq needs p, q >= 1");
                }
                lines.push(a_pq(v[0], v[1]).to_string());
            }
            if let Some(f) = f {
                let seq = TupleSeq::parse(&f)?;
                lines.push(f_variadic(&seq).to_string());
                if order {
                    let best = optimal_order(&seq);
                    let text: Vec<String> = best.tuples().iter().map(|(n, a)| format!("{n}:{a}")).collect();
                    lines.push(text.join(","));
                    lines.push(f_variadic(&best).to_string());
                }
            }
            if let Some(d) = delta {
                if d[0] < 2 || d[1] < 2 || d[2] < 1 || d[3] < 1 {
                    bail!("delta needs m, n >= 2 and alpha, beta >= 1");
                }
                lines.push(delta_f(d[0], d[1], d[2], d[3]).to_string());
            }
            if let Some(b) = bound {
                let n: treecipher::BigUint = b.parse().context("--bound expects a non-negative integer")?;
                lines.push(state_bound(&n).to_string());
            }
            for l in lines {
                println!("{l}");
            }
            Ok(EXIT_OK)
        }
        Command::Stats { input, relation } => {
            let t = load_tree(&input)?;
            let ts = compute_stats(&t);
            let (vertex_count, edge_count, extra): (usize, usize, Value) = match relation {
                Rel::Cipher => {
                    let s = rw_stats(&compress_rw(&t, None));
                    (
                        s.vertex_count,
                        s.edge_count,
                        json!({"cipher_payload": s.cipher_payload, "identity_edge_count": s.identity_edge_count}),
                    )
                }
                Rel::Topo | Rel::Label => {
                    let rel = if relation == Rel::Topo { Relation::Topo } else { Relation::Label };
                    let s = dag_stats(&compress(&t, rel));
                    (s.vertex_count, s.edge_count, json!({"compaction_ratio": s.compaction_ratio}))
                }
            };
            if cli.format == Format::Csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["relation", "size", "height", "degree", "vertex_count", "edge_count"])?;
                w.serialize((rel_name(relation.into()), ts.size, ts.height, ts.degree, vertex_count, edge_count))?;
                emit(None, &String::from_utf8(w.into_inner()?)?)?;
            } else {
                let mut v = json!({
                    "relation": rel_name(relation.into()),
                    "size": ts.size,
                    "height": ts.height,
                    "degree": ts.degree,
                    "vertex_count": vertex_count,
                    "edge_count": edge_count,
                });
                if let (Value::Object(m), Value::Object(x)) = (&mut v, extra) {
                    m.extend(x);
                }
                println!("{}", serde_json::to_string_pretty(&v)?);
            }
            Ok(EXIT_OK)
        }
    }
}

fn rel_name(r: IsoRelation) -> &'static str {
    match r {
        IsoRelation::Topo => "topo",
        IsoRelation::Label => "label",
        IsoRelation::Cipher => "cipher",
    }
}

fn iso_json(r: &IsoResult, relation: Rel) -> Value {
    let mut out = json!({ "verdict": verdict_str(r.verdict), "relation": rel_name(relation.into()) });
    let m = out.as_object_mut().expect("object");
    if let Some(map) = &r.mapping {
        let pairs: Vec<(usize, usize)> = map.iter().enumerate().map(|(u, v)| (u, v.0)).collect();
        m.insert("mapping".into(), json!(pairs));
    }
    if let Some(c) = &r.cipher {
        m.insert("cipher".into(), json!(c));
    }
    if relation == Rel::Cipher {
        m.insert("states_visited".into(), json!(r.stats.states_visited));
        if let Some(n) = &r.stats.n_after_deductions {
            m.insert("n_after_deductions".into(), json!(n.to_string()));
        }
    }
    if let Some(t) = &r.trace {
        m.insert("snapshots".into(), serde_json::to_value(&t.snapshots).expect("snapshots serialize"));
    }
    out
}

/// One row: verdict, relation, states, search-space size and the cipher as
/// `a>x;b>y`.
fn iso_csv(r: &IsoResult, relation: Rel) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["verdict", "relation", "states_visited", "n_after_deductions", "cipher"])?;
    let cipher = r
        .cipher
        .as_ref()
        .map(|c| c.iter().map(|(a, b)| format!("{a}>{b}")).collect::<Vec<_>>().join(";"))
        .unwrap_or_default();
    let n = r.stats.n_after_deductions.as_ref().map(|n| n.to_string()).unwrap_or_default();
    w.write_record([
        verdict_str(r.verdict),
        rel_name(relation.into()),
        &r.stats.states_visited.to_string(),
        &n,
        &cipher,
    ])?;
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn parse_int_range(s: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |x: &str| x.parse::<usize>().with_context(|| format!("bad integer {x:?} in range {s:?}"));
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step == 0 || a > b {
                bail!("invalid range {s:?}");
            }
            Ok((a..=b).step_by(step).collect())
        }
        _ => bail!("expected START:END:STEP or a single value, got {s:?}"),
    }
}

fn parse_float_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |x: &str| x.parse::<f64>().with_context(|| format!("bad number {x:?} in range {s:?}"));
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step.is_nan() || step <= 0.0 || a > b || !a.is_finite() || !b.is_finite() {
                bail!("invalid range {s:?}");
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            // rounding keeps 0.1 + 2 * 0.1 printing as 0.3
            Ok((0..count).map(|i| ((a + i as f64 * step) * 1e6).round() / 1e6).collect())
        }
        _ => bail!("expected START:END:STEP or a single value, got {s:?}"),
    }
}

#[derive(Debug, Clone, Serialize)]
struct BenchRow {
    n: usize,
    p: f64,
    rep: usize,
    pair_kind: &'static str,
    verdict: &'static str,
    states_visited: u64,
    #[serde(rename = "deduction_N_final")]
    deduction_n_final: Option<String>,
    wall_time_ns: u128,
}

const BENCH_HEADER: [&str; 8] = [
    "n",
    "p",
    "rep",
    "pair_kind",
    "verdict",
    "states_visited",
    "deduction_N_final",
    "wall_time_ns",
];

fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var("TREECIPHER_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .with_context(|| format!("TREECIPHER_THREADS must be an integer, got {v:?}"))?,
        Err(_) => 0,
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn bench_pair(spec: &GenSpec, max_retries: usize) -> Result<(LabeledTree, LabeledTree)> {
    match spec.pair_kind {
        PairKind::Iso => Ok(gen_iso_pair(spec)?),
        _ => {
            // a first tree that resists reshuffling is replaced by a fresh one
            let mut last = None;
            for attempt in 0..16u64 {
                let s = GenSpec { seed: derive_seed(spec.seed, attempt), ..*spec };
                match gen_noniso_pair(&s, max_retries) {
                    Ok(pair) => return Ok(pair),
                    Err(e @ treecipher::Error::RetriesExhausted(_)) => last = Some(e),
                    Err(e) => return Err(e.into()),
                }
            }
            Err(last.expect("at least one attempt").into())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn bench(
    sizes: &[usize],
    props: &[f64],
    reps: usize,
    seed: u64,
    kind: PairKind,
    out: &Path,
    summary: Option<&Path>,
    step_limit: Option<u64>,
    max_retries: usize,
) -> Result<()> {
    let pool = thread_pool()?;
    let file = fs::File::create(out).with_context(|| format!("writing {}", out.display()))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(BENCH_HEADER)?;
    let pair_name = if kind == PairKind::Iso { "iso" } else { "noniso" };
    let mut groups: Vec<Value> = Vec::new();
    let mut index = 0u64;
    for &n in sizes {
        for &p in props {
            let base = index;
            index += reps as u64;
            let specs: Vec<GenSpec> = (0..reps)
                .map(|rep| GenSpec::new(n, p, derive_seed(seed, base + rep as u64), kind))
                .collect::<Result<_, _>>()
                .with_context(|| format!("n = {n}, p = {p}"))?;
            let rows: Vec<BenchRow> = pool.install(|| {
                specs
                    .par_iter()
                    .enumerate()
                    .map(|(rep, spec)| -> Result<BenchRow> {
                        let (t1, t2) = bench_pair(spec, max_retries)?;
                        let opts = SolveOptions { step_limit, trace: false };
                        let start = Instant::now();
                        let r = decide(&t1, &t2, IsoRelation::Cipher, opts);
                        let wall_time_ns = start.elapsed().as_nanos();
                        Ok(BenchRow {
                            n,
                            p,
                            rep,
                            pair_kind: pair_name,
                            verdict: verdict_str(r.verdict),
                            states_visited: r.stats.states_visited,
                            deduction_n_final: r.stats.n_after_deductions.map(|x| x.to_string()),
                            wall_time_ns,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
            if !rows.is_empty() {
                groups.push(group_summary(n, p, &rows));
            }
        }
    }
    w.flush()?;
    if let Some(path) = summary {
        let doc = json!({
            "pair_kind": pair_name,
            "seed": seed,
            "reps": reps,
            "quantiles": [0.05, 0.5, 0.95],
            "outlier_factor": OUTLIER_FACTOR,
            "groups": groups,
        });
        emit(Some(path), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    }
    Ok(())
}

/// Times above this multiple of the group median count as outliers.
const OUTLIER_FACTOR: f64 = 50.0;

/// Linear interpolation between closest ranks.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn group_summary(n: usize, p: f64, rows: &[BenchRow]) -> Value {
    let mut times: Vec<f64> = rows.iter().map(|r| r.wall_time_ns as f64).collect();
    let mut states: Vec<f64> = rows.iter().map(|r| r.states_visited as f64).collect();
    times.sort_by(f64::total_cmp);
    states.sort_by(f64::total_cmp);
    let median = quantile(&times, 0.5);
    let outliers = times.iter().filter(|&&t| t > OUTLIER_FACTOR * median).count();
    let count = |v: &str| rows.iter().filter(|r| r.verdict == v).count();
    json!({
        "n": n,
        "p": p,
        "count": rows.len(),
        "wall_time_ns": {"q05": quantile(&times, 0.05), "q50": median, "q95": quantile(&times, 0.95)},
        "states_visited": {"q05": quantile(&states, 0.05), "q50": quantile(&states, 0.5), "q95": quantile(&states, 0.95)},
        "outlier_fraction": outliers as f64 / rows.len() as f64,
        "verdicts": {
            "isomorphic": count("isomorphic"),
            "not_isomorphic": count("not_isomorphic"),
            "unknown": count("unknown"),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_int_range("50:500:50").unwrap().len(), 10);
        assert_eq!(parse_int_range("7").unwrap(), vec![7]);
        assert!(parse_int_range("5:1:1").is_err());
        assert!(parse_int_range("1:5:0").is_err());
        let p = parse_float_range("0.1:0.9:0.1").unwrap();
        assert_eq!(p.len(), 9);
        assert_eq!(p[2], 0.3);
        assert_eq!(p[8], 0.9);
        assert!(parse_float_range("a").is_err());
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 5.0);
        assert_eq!(quantile(&v, 0.25), 2.0);
        assert_eq!(quantile(&[9.0], 0.95), 9.0);
    }
}
