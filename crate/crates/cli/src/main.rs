use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;
use vrheap::verify::FuzzConfig;
use vrheap::{Policy, Variant};
use vrheap_cli::{
    bench_churn, bench_dijkstra, bench_heapsort, emit_metrics, run_fuzz, run_trace,
    write_failure_trace, Format, MetricsRow,
};

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Nomeld,
    Meld,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Amortized,
    Worstcase,
    Simple,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Parser)]
#[command(name = "vrheap", version, about = "Violation-reduction heap workbench")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "nomeld", global = true)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "amortized", global = true)]
    policy: PolicyArg,
    /// Metrics format.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    format: FormatArg,
    /// Metrics destination; stdout when omitted (except for `trace`,
    /// whose stdout carries op results).
    #[arg(long, global = true)]
    metrics: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a trace file, printing delete-min and find-min results.
    Trace { path: PathBuf },
    /// Differential fuzzing against the sorted-multiset oracle.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds starting at --seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 100_000)]
        ops: u64,
        /// Full structure check period in ops (0 = off).
        #[arg(long, default_value_t = 0)]
        check_every: u64,
        /// Check every private block against its table row.
        #[arg(long)]
        check_blocks: bool,
        /// Where to write the trace of a failing run.
        #[arg(long)]
        failure_trace: Option<PathBuf>,
    },
    /// Timed workloads; metrics carry a result checksum
    #[command(subcommand)]
    Bench(Bench),
}

#[derive(Subcommand)]
enum Bench {
    /// Dijkstra with decrease-key on a random connected graph.
    Dijkstra {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Insert n random keys, then delete them all.
    Heapsort {
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random insert / decrease-key / delete-min mix.
    Churn {
        #[arg(long, default_value_t = 100_000)]
        ops: u64,
        #[arg(long, default_value_t = 1000)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Check(anyhow::Error),
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn emit(common: &Common, rows: &[MetricsRow], to_stdout: bool) -> anyhow::Result<()> {
    let format = match common.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Jsonl => Format::JsonLines,
    };
    match &common.metrics {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            emit_metrics(rows, format, BufWriter::new(f)).with_context(|| format!("writing {}", p.display()))
        }
        None if to_stdout => emit_metrics(rows, format, io::stdout().lock()).context("writing metrics"),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let c = &cli.common;
    let variant = match c.variant {
        VariantArg::Nomeld => Variant::NoMeld,
        VariantArg::Meld => Variant::Meld,
    };
    let policy = match c.policy {
        PolicyArg::Amortized => Policy::Amortized,
        PolicyArg::Worstcase => Policy::WorstCaseLedger,
        PolicyArg::Simple => Policy::WorstCaseSimple,
    };
    match cli.cmd {
        Cmd::Trace { path } => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let run = run_trace(&path.display().to_string(), &text, variant, policy)
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            for line in &run.output {
                println!("{line}");
            }
            emit(c, &[run.metrics], false)?;
        }
        Cmd::Fuzz { seed, seeds, ops, check_every, check_blocks, failure_trace } => {
            let mut rows = Vec::new();
            let mut bound_failure = None;
            for s in seed..seed + seeds {
                let mut cfg = FuzzConfig::new(s, ops, variant, policy);
                cfg.check_every = check_every;
                cfg.check_blocks = check_blocks;
                match run_fuzz(&cfg) {
                    Ok((sum, row)) => {
                        if sum.write_warnings > 0 {
                            eprintln!("seed {s}: {} soft write-count warnings {:?}", sum.write_warnings, sum.write_warning_rows);
                        }
                        rows.push(row);
                        if let Some(v) = &sum.first_bound_violation {
                            eprintln!("seed {s}: potential bound violations {:?}", sum.bound_violations);
                            bound_failure.get_or_insert(format!("seed {s} {v}"));
                        }
                    }
                    Err(f) => {
                        if let Some(p) = &failure_trace {
                            write_failure_trace(p, &f)?;
                            eprintln!("failing trace written to {}", p.display());
                        }
                        return Err(Failure::Check(anyhow::anyhow!("{f}")));
                    }
                }
            }
            emit(c, &rows, true)?;
            if let Some(v) = bound_failure {
                return Err(Failure::Check(anyhow::anyhow!("{v}")));
            }
        }
        Cmd::Bench(b) => {
            let row = match b {
                Bench::Dijkstra { n, m, seed } => bench_dijkstra(n, m, seed, variant, policy),
                Bench::Heapsort { n, seed } => bench_heapsort(n, seed, variant, policy),
                Bench::Churn { ops, size, seed } => bench_churn(ops, size, seed, variant, policy),
            }
            .map_err(Failure::Check)?;
            emit(c, &[row], true)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(e)) => {
            eprintln!("check failed: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
