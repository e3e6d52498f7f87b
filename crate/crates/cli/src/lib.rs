//! Workbench commands behind the `vrheap` binary: trace replay, fuzz
//! campaigns, benchmarks and metrics emission.

use anyhow::{bail, Context};
use serde_json::{Map, Number, Value};
use std::io::{self, Write};
use std::time::Instant;
use vrheap::trace::{parse_trace, run_ops, TraceError};
use vrheap::verify::{fuzz_run, FuzzConfig, FuzzFailure, FuzzSummary};
use vrheap::workload::{
    checksum, churn, dijkstra, heapsort, random_graph, random_keys, reference_dijkstra,
};
use vrheap::{Method, OpCounters, Policy, ReductionCase, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
}

/// One run's metrics. Column order is fixed by [`MetricsRow::columns`].
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub run_id: String,
    pub variant: Variant,
    pub policy: Policy,
    pub seed: Option<u64>,
    pub counters: OpCounters,
    pub wall_secs: f64,
    pub n_end: u64,
    pub checksum: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
enum Cell {
    Int(u64),
    Float(f64),
    Str(String),
    Null,
}

impl MetricsRow {
    pub fn columns() -> Vec<String> {
        let mut c: Vec<String> = ["run_id", "variant", "policy", "seed"].map(String::from).to_vec();
        c.extend(Method::ALL.iter().map(|m| format!("calls_{}", m.name())));
        c.extend(
            [
                "comparisons",
                "links",
                "reduction_steps",
                "degree_reduction_steps",
                "conversions",
                "nontree_writes",
            ]
            .map(String::from),
        );
        c.extend(ReductionCase::all().iter().map(|k| format!("case_{}", k.name())));
        c.extend(["wall_secs", "n_end", "checksum"].map(String::from));
        c
    }

    fn cells(&self) -> Vec<Cell> {
        let k = &self.counters;
        let opt = |v: Option<u64>| v.map(Cell::Int).unwrap_or(Cell::Null);
        let mut v = vec![
            Cell::Str(self.run_id.clone()),
            Cell::Str(self.variant.name().into()),
            Cell::Str(self.policy.name().into()),
            opt(self.seed),
        ];
        v.extend(k.calls.iter().map(|&n| Cell::Int(n)));
        v.extend(
            [
                k.comparisons,
                k.links,
                k.reduction_steps,
                k.degree_reduction_steps,
                k.conversions,
                k.nontree_writes,
            ]
            .map(Cell::Int),
        );
        v.extend(ReductionCase::all().iter().map(|&c| Cell::Int(k.case(c))));
        v.extend([Cell::Float(self.wall_secs), Cell::Int(self.n_end), opt(self.checksum)]);
        v
    }
}

/// Formats `x` with 6 significant digits, trailing zeros trimmed.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&mag) {
        return format!("{x:.5e}");
    }
    let s = format!("{:.*}", (5 - mag).max(0) as usize, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes `rows`. CSV always starts with the header; JSON lines write one
/// object per row and nothing for an empty set.
pub fn emit_metrics<W: Write>(rows: &[MetricsRow], format: Format, mut out: W) -> io::Result<()> {
    let cols = MetricsRow::columns();
    match format {
        Format::Csv => {
            writeln!(out, "{}", cols.join(","))?;
            for r in rows {
                let line: Vec<String> = r
                    .cells()
                    .into_iter()
                    .map(|c| match c {
                        Cell::Int(n) => n.to_string(),
                        Cell::Float(x) => sig6(x),
                        Cell::Str(s) => csv_field(&s),
                        Cell::Null => String::new(),
                    })
                    .collect();
                writeln!(out, "{}", line.join(","))?;
            }
        }
        Format::JsonLines => {
            for r in rows {
                let mut m = Map::new();
                for (name, c) in cols.iter().zip(r.cells()) {
                    let v = match c {
                        Cell::Int(n) => Value::from(n),
                        Cell::Float(x) => sig6(x)
                            .parse::<f64>()
                            .ok()
                            .and_then(Number::from_f64)
                            .map(Value::Number)
                            .unwrap_or(Value::Null),
                        Cell::Str(s) => Value::String(s),
                        Cell::Null => Value::Null,
                    };
                    m.insert(name.clone(), v);
                }
                writeln!(out, "{}", Value::Object(m))?;
            }
        }
    }
    out.flush()
}

/// Output lines and metrics of an executed trace.
#[derive(Clone, Debug)]
pub struct TraceRun {
    pub output: Vec<String>,
    pub metrics: MetricsRow,
}

pub fn run_trace(run_id: &str, text: &str, variant: Variant, policy: Policy) -> Result<TraceRun, TraceError> {
    let t = Instant::now();
    let ops = parse_trace(text)?;
    let (output, runner) = run_ops(&ops, variant, policy)?;
    let n_end = runner
        .live_refs()
        .iter()
        .map(|&r| runner.pool.len(runner.resolve(r).unwrap()).unwrap_or(0) as u64)
        .sum();
    Ok(TraceRun {
        output,
        metrics: MetricsRow {
            run_id: run_id.into(),
            variant,
            policy,
            seed: None,
            counters: runner.pool.counters().clone(),
            wall_secs: t.elapsed().as_secs_f64(),
            n_end,
            checksum: None,
        },
    })
}

pub fn run_fuzz(cfg: &FuzzConfig) -> Result<(FuzzSummary, MetricsRow), FuzzFailure> {
    let t = Instant::now();
    let s = fuzz_run(cfg)?;
    let row = MetricsRow {
        run_id: format!("fuzz-{}", cfg.seed),
        variant: cfg.variant,
        policy: cfg.policy,
        seed: Some(cfg.seed),
        counters: s.counters.clone(),
        wall_secs: t.elapsed().as_secs_f64(),
        n_end: 0,
        checksum: None,
    };
    Ok((s, row))
}

/// Dijkstra on a random connected graph; a checksum mismatch against the
/// quadratic reference is an error.
pub fn bench_dijkstra(n: usize, m: usize, seed: u64, variant: Variant, policy: Policy) -> anyhow::Result<MetricsRow> {
    if n == 0 {
        bail!("graph needs at least one vertex");
    }
    let g = random_graph(n, m, seed);
    let t = Instant::now();
    let run = dijkstra(&g, variant, policy);
    let wall = t.elapsed().as_secs_f64();
    let want = checksum(&reference_dijkstra(&g));
    if run.checksum != want {
        bail!("checksum {} differs from reference {want}", run.checksum);
    }
    Ok(MetricsRow {
        run_id: format!("dijkstra-{n}-{m}-{seed}"),
        variant,
        policy,
        seed: Some(seed),
        counters: run.pool.counters().clone(),
        wall_secs: wall,
        n_end: 0,
        checksum: Some(run.checksum),
    })
}

/// Sorts `n` random keys; the output is verified against `sort`.
pub fn bench_heapsort(n: usize, seed: u64, variant: Variant, policy: Policy) -> anyhow::Result<MetricsRow> {
    let ks = random_keys(n, seed);
    let t = Instant::now();
    let (out, pool) = heapsort(&ks, variant, policy);
    let wall = t.elapsed().as_secs_f64();
    let mut want = ks;
    want.sort_unstable();
    if out != want {
        bail!("heapsort output is not the sorted input");
    }
    Ok(MetricsRow {
        run_id: format!("heapsort-{n}-{seed}"),
        variant,
        policy,
        seed: Some(seed),
        counters: pool.counters().clone(),
        wall_secs: wall,
        n_end: 0,
        checksum: Some(out.iter().fold(0u64, |a, &k| a.wrapping_add(k as u64))),
    })
}

pub fn bench_churn(ops: u64, size: usize, seed: u64, variant: Variant, policy: Policy) -> anyhow::Result<MetricsRow> {
    let t = Instant::now();
    let run = churn(ops, size, seed, variant, policy);
    let wall = t.elapsed().as_secs_f64();
    Ok(MetricsRow {
        run_id: format!("churn-{ops}-{size}-{seed}"),
        variant,
        policy,
        seed: Some(seed),
        counters: run.pool.counters().clone(),
        wall_secs: wall,
        n_end: run.pool.len(run.heap).unwrap_or(0) as u64,
        checksum: Some(run.sum as u64),
    })
}

/// Writes a failing fuzz run's trace prefix so `trace` can replay it.
pub fn write_failure_trace(path: &std::path::Path, f: &FuzzFailure) -> anyhow::Result<()> {
    let body = format!(
        "# seed {} failed at op {}: {}\n{}",
        f.seed,
        f.op_index,
        f.message.replace('\n', " "),
        vrheap::trace::format_trace(&f.trace)
    );
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}
