use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lre_core::bench::{run_synthetic, Algorithm, BenchConfig};
use lre_core::discovery::{baseline, estimate_change_sets, lre, BaselineOptions, LreOptions, SkeletonOptions};
use lre_core::{EnvironmentData, Error, MixedGraph, VarSet};

mod simulate;

/// Causal structure learning from regression invariance across environments.
#[derive(Parser)]
#[command(name = "lre", version)]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "LRE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a mixed graph from one CSV per environment.
    Discover(DiscoverArgs),
    /// Sample environments from a linear SEM and write them as CSV.
    Simulate(simulate::SimulateArgs),
    /// Run the synthetic benchmark and write a report.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Lre,
    Baseline,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Args)]
struct DiscoverArgs {
    /// Environment CSVs with identical headers, at least two.
    #[arg(required = true, num_args = 2..)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "lre")]
    algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 0.01, value_parser = parse_alpha)]
    alpha: f64,
    /// Cap on regressor and auxiliary set sizes.
    #[arg(long)]
    max_degree: Option<usize>,
    /// Graph destination; printed after the summary when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dot")]
    format: Format,
    /// Subtract each environment's column means first. Recommended for
    /// real data; simulated data are already zero-mean.
    #[arg(long)]
    center: bool,
    /// Fail on conflicting orientations instead of keeping the first.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Full,
    Ci,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "ci")]
    preset: Preset,
    #[arg(long)]
    n_models: Option<usize>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    edge_prob: Option<f64>,
    /// Comma-separated |I| values.
    #[arg(long, value_delimiter = ',')]
    i_sizes: Option<Vec<usize>>,
    /// Comma-separated subset of pc_only, lre, baseline.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    #[arg(long, value_parser = parse_alpha)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON report path.
    #[arg(long, short, default_value = "bench_report.json")]
    output: PathBuf,
    /// Per-(algorithm, |I|) summary CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Directory for DOT files of every truth and estimate.
    #[arg(long)]
    dot_dir: Option<PathBuf>,
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err("alpha must lie in (0, 1)".into())
    }
}

/// Exit codes: 2 usage, 3 data validation, 4 numerical failure.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidRequest(_) => 2,
        e if e.is_numerical() => 4,
        Error::OrientationConflict(..) | Error::EnumerationTooLarge { .. } => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Discover(a) => discover(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn write_output(path: &Path, contents: &str) -> lre_core::Result<()> {
    fs::write(path, contents).map_err(|e| Error::Data {
        path: path.display().to_string(),
        message: format!("cannot write: {e}"),
    })
}

fn render(g: &MixedGraph, format: Format) -> String {
    match format {
        Format::Dot => g.to_dot(),
        Format::Json => g.to_json() + "\n",
    }
}

fn edge_list(g: &MixedGraph, edges: &[(usize, usize)], sep: &str) -> String {
    if edges.is_empty() {
        return "(none)".into();
    }
    edges
        .iter()
        .map(|&(a, b)| format!("{} {sep} {}", g.name(a), g.name(b)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn var_list(g: &MixedGraph, vars: VarSet) -> String {
    if vars.is_empty() {
        return "(none)".into();
    }
    vars.iter().map(|v| g.name(v)).collect::<Vec<_>>().join(", ")
}

fn discover(a: DiscoverArgs) -> lre_core::Result<()> {
    let mut envs = Vec::with_capacity(a.inputs.len());
    for path in &a.inputs {
        let e = EnvironmentData::read_csv(path)?;
        envs.push(if a.center { e.centered() } else { e });
    }
    let skeleton = SkeletonOptions {
        alpha: a.alpha,
        max_cond: None,
    };
    let (graph, essential, conflicts, change_sets) = match a.algorithm {
        AlgorithmArg::Lre => {
            let opts = LreOptions {
                alpha: a.alpha,
                skeleton,
                max_fixing_size: a.max_degree,
                strict: a.strict,
            };
            let out = lre(&envs, &opts)?;
            let changes = estimate_change_sets(&envs, &out.essential, a.alpha, a.max_degree)?;
            (out.graph, out.essential, out.conflicts.len(), changes)
        }
        AlgorithmArg::Baseline => {
            let opts = BaselineOptions {
                alpha: a.alpha,
                skeleton,
                max_set_size: a.max_degree,
                ..Default::default()
            };
            let out = baseline(&envs, &opts)?;
            let changes = out.pairs.iter().map(|p| p.change_set).collect();
            (out.graph, out.essential, 0, changes)
        }
    };

    let directed = graph.directed_edges();
    let newly = directed.iter().filter(|&&(x, y)| !essential.has_directed(x, y)).count();
    println!("variables: {}, environments: {}", graph.p(), envs.len());
    println!(
        "directed ({}, {} beyond the essential graph): {}",
        directed.len(),
        newly,
        edge_list(&graph, &directed, "->")
    );
    println!(
        "undirected ({}): {}",
        graph.undirected_edges().len(),
        edge_list(&graph, &graph.undirected_edges(), "--")
    );
    for c in &change_sets {
        let (i, j) = c.env_pair;
        println!(
            "changed between {} and {}: {}",
            envs[i].env_id(),
            envs[j].env_id(),
            var_list(&graph, c.vars)
        );
    }
    if conflicts > 0 {
        println!("conflicting decisions skipped: {conflicts}");
    }
    let text = render(&graph, a.format);
    match &a.output {
        Some(path) => write_output(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn bench(a: BenchArgs) -> lre_core::Result<()> {
    let mut cfg = match a.preset {
        Preset::Full => BenchConfig::full(),
        Preset::Ci => BenchConfig::ci(),
    };
    if let Some(v) = a.n_models {
        cfg.n_models = v;
    }
    if let Some(v) = a.n_samples {
        cfg.n_samples = v;
    }
    if let Some(v) = a.p {
        cfg.p = v;
    }
    if let Some(v) = a.edge_prob {
        cfg.edge_prob = v;
    }
    if let Some(v) = a.i_sizes {
        cfg.i_sizes = v;
    }
    if let Some(v) = a.algorithms {
        cfg.algorithms = v
            .iter()
            .map(|s| s.trim().parse())
            .collect::<lre_core::Result<Vec<Algorithm>>>()?;
    }
    if let Some(v) = a.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    cfg.keep_graphs = a.dot_dir.is_some();

    let report = run_synthetic(&cfg)?;
    write_output(&a.output, &(report.to_json() + "\n"))?;
    if let Some(path) = &a.csv {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write_output(path, &String::from_utf8_lossy(&buf))?;
    }
    if let Some(dir) = &a.dot_dir {
        report.write_dot_dump(dir)?;
    }

    let failed: usize = report.runs.iter().filter(|r| r.error.is_some()).count();
    println!(
        "models: {}, runs failed: {failed}, seconds: {:.1}",
        cfg.n_models, report.total_seconds
    );
    let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
    if report.ud_gaps.is_empty() {
        for s in &report.summaries {
            println!(
                "{:<9} |I|={:<2} error {}  UD {}",
                s.algorithm.name(),
                s.i_size,
                fmt(s.mean_error_ratio),
                fmt(s.mean_ud_ratio)
            );
        }
    } else {
        println!("|I|  UD pc_only  UD lre   gap (abs ± se)     gap rel   error diff");
        for g in &report.ud_gaps {
            let pc = report
                .summary(Algorithm::PcOnly, g.i_size)
                .and_then(|s| s.mean_ud_ratio);
            let l = report.summary(Algorithm::Lre, g.i_size).and_then(|s| s.mean_ud_ratio);
            println!(
                "{:<4} {:<11} {:<8} {} ± {:<9} {:<9} {}",
                g.i_size,
                fmt(pc),
                fmt(l),
                fmt(g.absolute),
                fmt(g.se_absolute),
                fmt(g.relative),
                fmt(g.error_ratio_diff)
            );
        }
    }
    println!("report: {}", a.output.display());
    Ok(())
}
