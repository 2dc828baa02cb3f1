use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crosscat::estimate::{infer_sizes, read_jsonl, write_jsonl, EmOptions, FittedModel, Observation};
use crosscat::harness::{
    fit_model, report_metrics, run_case_study, run_synthetic_sweep, write_sweep_outputs, CaseStudyConfig,
    ExperimentConfig, ModelKind,
};
use crosscat::metrics::{cm_score, evaluate_model, scs, CoCount};
use crosscat::optimize::{optimize_dag, optimize_root_constrained, read_prices_csv};
use crosscat::sampling::child_rng;
use crosscat::synth::{gen_ground_truth, simulate_dataset, GroundTruthSpec};
use crosscat::{CrossCatModel, Error, Result};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "crosscat", version, about = "Cross-category choice modeling toolkit")]
struct Cli {
    /// Master random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a ground truth and simulate transactions (JSONL to --out).
    Simulate(SimulateArgs),
    /// Fit a model to JSONL observations (parameters JSON to --out).
    Estimate(EstimateArgs),
    /// Optimize assortments for a model and a price table (solution JSON to --out).
    Optimize(OptimizeArgs),
    /// Score fitted models on JSONL observations (CSV to --out).
    Evaluate(EvaluateArgs),
    /// Complementarity metrics of observations and, optionally, a fitted model.
    Cm(CmArgs),
    /// Run a synthetic sweep described by --config into the --out directory.
    Sweep,
    /// Run a case study on transaction CSV data.
    CaseStudy(CaseStudyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, default_value_t = 12_000)]
    transactions: usize,
    #[arg(long, default_value_t = 10)]
    n_a: usize,
    #[arg(long, default_value_t = 8)]
    n_b: usize,
    #[arg(long, default_value_t = 0.2)]
    p_del: f64,
    /// Where to write the ground truth JSON.
    #[arg(long)]
    gt_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Markov,
    Ind,
    Multi,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Markov => ModelKind::Markov,
            ModelArg::Ind => ModelKind::Ind,
            ModelArg::Multi => ModelKind::Multi,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Observations JSONL.
    data: PathBuf,
    #[arg(long, value_enum, default_value = "markov")]
    model: ModelArg,
    #[arg(long)]
    tol_ll: Option<f64>,
    #[arg(long)]
    tol_param: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Number of EM starts.
    #[arg(long, default_value_t = 1)]
    multistart: usize,
    #[arg(long)]
    n_a: Option<usize>,
    #[arg(long)]
    n_b: Option<usize>,
    /// Where to write the log-likelihood trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Model JSON: a category graph or a fitted two-category model.
    #[arg(long)]
    model: PathBuf,
    /// CSV with `category,product_id,price`.
    #[arg(long)]
    prices: PathBuf,
    /// Cardinality limit on a root category, as `ID=K`; repeatable.
    #[arg(long = "limit", value_parser = parse_limit)]
    limits: Vec<(String, usize)>,
}

fn parse_limit(s: &str) -> std::result::Result<(String, usize), String> {
    let (id, k) = s.split_once('=').ok_or("expected ID=K")?;
    Ok((id.to_string(), k.parse().map_err(|e| format!("bad limit '{k}': {e}"))?))
}

#[derive(Args)]
struct EvaluateArgs {
    /// Observations JSONL.
    data: PathBuf,
    /// Fitted model JSON files; repeatable.
    #[arg(long = "fit", required = true)]
    fits: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    top_k: Vec<usize>,
}

#[derive(Args)]
struct CmArgs {
    /// Observations JSONL.
    data: PathBuf,
    /// A fitted Markov model whose complementarity scores are also written.
    #[arg(long)]
    fit: Option<PathBuf>,
    #[arg(long)]
    n_a: Option<usize>,
    #[arg(long)]
    n_b: Option<usize>,
}

#[derive(Args)]
struct CaseStudyArgs {
    #[arg(long)]
    transactions: Option<PathBuf>,
    #[arg(long)]
    category_a: Option<String>,
    #[arg(long)]
    category_b: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
}

fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(io::BufReader::new(File::open(path)?))?)
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn write_csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn sizes(data: &[Observation], n_a: Option<usize>, n_b: Option<usize>) -> (usize, usize) {
    let (a, b) = infer_sizes(data);
    (n_a.unwrap_or(a), n_b.unwrap_or(b))
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let spec = GroundTruthSpec {
        n_a: args.n_a,
        n_b: args.n_b,
        theta: args.theta,
        p_del: args.p_del,
        ..GroundTruthSpec::default()
    };
    let seed = cli.seed.unwrap_or(0);
    let gt = gen_ground_truth(&spec, &mut child_rng(seed, "gt", &[0]))?;
    let data = simulate_dataset(&gt, args.transactions, &mut child_rng(seed, "data", &[0]));
    match &cli.out {
        Some(p) => write_jsonl(p, &data)?,
        None => {
            let mut out = io::stdout().lock();
            for o in &data {
                serde_json::to_writer(&mut out, o)?;
                writeln!(out)?;
            }
        }
    }
    if let Some(p) = &args.gt_out {
        write_json(Some(p), &gt)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    loglik: f64,
}

fn estimate(cli: &Cli, args: &EstimateArgs) -> Result<()> {
    let data: Vec<Observation> = read_jsonl(&args.data)?;
    let (n_a, n_b) = sizes(&data, args.n_a, args.n_b);
    let mut em: EmOptions = match &cli.config {
        Some(p) => load_config(p)?,
        None => EmOptions::default(),
    };
    em.tol_ll = args.tol_ll.unwrap_or(em.tol_ll);
    em.tol_param = args.tol_param.unwrap_or(em.tol_param);
    em.max_iter = args.max_iter.unwrap_or(em.max_iter);
    let fit = fit_model(args.model.into(), &data, n_a, n_b, &em, args.multistart, cli.seed.unwrap_or(0))?;
    write_json(cli.out.as_deref(), &fit.model)?;
    if let Some(p) = &args.trace {
        let rows: Vec<TraceRow> = fit
            .ll_trace
            .iter()
            .enumerate()
            .map(|(iteration, &loglik)| TraceRow { iteration, loglik })
            .collect();
        write_csv(Some(p), &rows)?;
    }
    if !fit.converged {
        return Err(Error::Convergence {
            what: "EM stopping rule".into(),
            iterations: fit.ll_trace.len().saturating_sub(1),
        });
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<CrossCatModel> {
    let text = fs::read_to_string(path)?;
    match serde_json::from_str::<CrossCatModel>(&text) {
        Ok(m) => Ok(m),
        Err(graph_err) => match serde_json::from_str::<FittedModel>(&text) {
            Ok(f) => f.to_cross_cat(),
            Err(_) => Err(Error::Json(graph_err)),
        },
    }
}

fn optimize(cli: &Cli, args: &OptimizeArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let prices = read_prices_csv(File::open(&args.prices)?, &model)?;
    let solution = if args.limits.is_empty() {
        optimize_dag(&model, &prices)?
    } else {
        let limits: Vec<(&str, usize)> = args.limits.iter().map(|(id, k)| (id.as_str(), *k)).collect();
        optimize_root_constrained(&model, &prices, &limits)?
    };
    write_json(cli.out.as_deref(), &solution)
}

#[derive(Serialize)]
struct MetricRow {
    model: String,
    metric: String,
    value: f64,
    delta_vs_ind: Option<f64>,
}

fn evaluate(cli: &Cli, args: &EvaluateArgs) -> Result<()> {
    let data: Vec<Observation> = read_jsonl(&args.data)?;
    let mut rows = Vec::new();
    for path in &args.fits {
        let model: FittedModel = read_json(path)?;
        let report = evaluate_model(&model, &data, &args.top_k)?;
        rows.extend(report_metrics(&report).into_iter().map(|(metric, value)| MetricRow {
            model: report.model.clone(),
            metric,
            value,
            delta_vs_ind: None,
        }));
    }
    let base: Vec<(String, f64)> = rows
        .iter()
        .filter(|r| r.model == "ind")
        .map(|r| (r.metric.clone(), r.value))
        .collect();
    for r in rows.iter_mut().filter(|r| r.model != "ind") {
        r.delta_vs_ind = base.iter().find(|(m, _)| *m == r.metric).map(|&(_, b)| {
            if r.metric.ends_with("_ll") || r.metric == "rank_acc" {
                (r.value - b) / b.abs()
            } else {
                r.value - b
            }
        });
    }
    write_csv(cli.out.as_deref(), &rows)
}

fn cm(cli: &Cli, args: &CmArgs) -> Result<()> {
    let data: Vec<Observation> = read_jsonl(&args.data)?;
    let fitted: Option<FittedModel> = args.fit.as_deref().map(read_json).transpose()?;
    let (n_a, n_b) = match &fitted {
        Some(f) => (f.v_a().n(), f.n_b()),
        None => sizes(&data, args.n_a, args.n_b),
    };
    let mut w = csv::Writer::from_writer(sink(cli.out.as_deref())?);
    w.write_record(["row", "column", "value"])?;
    let score = cm_score(&CoCount::from_observations(&data, n_a, n_b)?)?;
    w.write_record(["cm", "", &score.to_string()])?;
    match fitted {
        Some(FittedModel::Markov(p)) => {
            for (i, row) in scs(&p).iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    w.write_record([format!("scs:{i}"), j.to_string(), x.to_string()])?;
                }
            }
        }
        Some(_) => return Err(Error::Config("complementarity scores need a markov fit".into())),
        None => {}
    }
    w.flush()?;
    Ok(())
}

fn sweep(cli: &Cli) -> Result<()> {
    let mut config: ExperimentConfig = match &cli.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        config.master_seed = s;
    }
    if let Some(o) = &cli.out {
        config.out_dir = Some(o.clone());
    }
    config.jobs = cli.jobs.or(config.jobs);
    let out = config.out_dir.clone().unwrap_or_else(|| PathBuf::from("sweep-out"));
    let result = run_synthetic_sweep(&config)?;
    write_sweep_outputs(&result, &config, &out)?;
    eprintln!(
        "{} records, {} failures, written to {}",
        result.records.len(),
        result.failures.len(),
        out.display()
    );
    Ok(())
}

fn case_study(cli: &Cli, args: &CaseStudyArgs) -> Result<()> {
    let mut config: CaseStudyConfig = match (&cli.config, &args.transactions, &args.category_a, &args.category_b) {
        (Some(p), ..) => load_config(p)?,
        (None, Some(t), Some(a), Some(b)) => CaseStudyConfig::new(t, a, b),
        _ => {
            return Err(Error::Config(
                "case-study needs --config or --transactions, --category-a and --category-b".into(),
            ))
        }
    };
    if let Some(t) = &args.transactions {
        config.transactions = t.clone();
    }
    if let Some(th) = args.threshold {
        config.pipeline.threshold = th;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(o) = &cli.out {
        config.out_dir = Some(o.clone());
    }
    let (_, result) = run_case_study(&config)?;
    if config.out_dir.is_none() {
        write_csv(None, &result.table)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Error::Config(format!("--jobs: {e}")))?;
    }
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a),
        Command::Estimate(a) => estimate(cli, a),
        Command::Optimize(a) => optimize(cli, a),
        Command::Evaluate(a) => evaluate(cli, a),
        Command::Cm(a) => cm(cli, a),
        Command::Sweep => sweep(cli),
        Command::CaseStudy(a) => case_study(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
