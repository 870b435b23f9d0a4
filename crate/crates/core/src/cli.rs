//! Command-line front end: `generate`, `fit`, `predict`, `evaluate` and
//! `reproduce-synthetic`.
//!
//! Options can also come from a `key=value` file passed with `--config`;
//! keys are long option names without the dashes. Flags on the command line
//! win over the file. Failures print one `error: ...` line on stderr and
//! exit nonzero (2 for usage errors, 1 otherwise).

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::cascade::{ActivationLog, ItemId};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate, score_pairs, split_items, EvalConfig, EvalReport, Pooling, Scorer, SplitMode, SplitPlan,
};
use crate::generator::{generate_dataset, GenConfig, GraphSpec};
use crate::graph::DirectedGraph;
use crate::io::{self, IdMap};
use crate::model::{EmbeddingTable, ItemTopics};
use crate::scalar::Scalar;
use crate::trainer::{fit_items, TrainConfig};

const GRAPH_FILE: &str = "graph.tsv";
const ITEMS_FILE: &str = "items.tsv";
const ACTIVATIONS_FILE: &str = "activations.tsv";
const TRUTH_FILE: &str = "truth.tsv";

/// Config keys that are boolean switches rather than valued options.
const SWITCHES: &[&str] = &["verbose", "per-item"];
/// Config keys that belong to the top-level command.
const GLOBAL_KEYS: &[&str] = &["seed", "threads", "verbose"];
const SUBCOMMANDS: &[&str] = &["generate", "fit", "predict", "evaluate", "reproduce-synthetic"];

#[derive(Debug, Parser)]
#[command(name = "ideocascade", version, about = "Topic-aware ideological cascades", args_override_self = true)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads. Results do not depend on this value.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,

    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,

    /// Print the effective configuration as key=value lines and exit.
    #[arg(long, global = true)]
    print_config: bool,

    /// key=value file with default option values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a synthetic dataset.
    #[command(args_override_self = true)]
    Generate(GenerateArgs),
    /// Infer node embeddings from cascades.
    #[command(args_override_self = true)]
    Fit(FitArgs),
    /// Score (item, v, u) triples with fitted embeddings.
    #[command(args_override_self = true)]
    Predict(PredictArgs),
    /// Split items, fit on the training part and score the rest.
    #[command(args_override_self = true)]
    Evaluate(EvaluateArgs),
    /// Run the synthetic accuracy grid and print a summary table.
    #[command(args_override_self = true)]
    ReproduceSynthetic(SyntheticArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// `complete:N` or `ba:N:M`.
    #[arg(long, default_value = "complete:100", value_parser = parse_graph_spec)]
    graph: GraphSpec,

    /// Polarities are drawn from Beta(1/p, 1/p).
    #[arg(long, default_value_t = 4.0)]
    polarization: f64,

    #[command(flatten)]
    model: ModelArgs,

    /// Number of items to simulate.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    items: u64,

    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    topics: u64,

    /// Interest prior Beta(alpha, beta).
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,

    #[arg(long, default_value_t = 0.1)]
    beta: f64,

    /// Dirichlet concentration of item topics; one value or one per topic.
    #[arg(long, value_delimiter = ',', default_value = "0.125")]
    q: Vec<f64>,
}

impl ModelArgs {
    fn gen_config(&self, graph: GraphSpec, polarization: f64, n_items: usize, seed: u64) -> Result<GenConfig> {
        let topics = self.topics as usize;
        let q = match self.q.as_slice() {
            [one] => vec![*one; topics],
            many => many.to_vec(),
        };
        let cfg = GenConfig {
            topics,
            polarization,
            alpha: self.alpha,
            beta: self.beta,
            q,
            n_items,
            graph,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn describe(&self, out: &mut Vec<(String, String)>) {
        push(out, "topics", self.topics);
        push(out, "alpha", self.alpha);
        push(out, "beta", self.beta);
        push(out, "q", join(&self.q));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    epochs: u64,

    #[arg(long, default_value_t = 0.1)]
    lr_init: f64,

    #[arg(long, default_value_t = 0.01)]
    lr_floor: f64,

    /// Activators sampled per item and epoch.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    seed_sample_size: u64,

    /// Negatives per positive.
    #[arg(long, default_value_t = 2.0)]
    negative_ratio: f64,

    /// Parameters are kept in [eps, 1 - eps].
    #[arg(long, default_value_t = 1e-4)]
    clamp_eps: f64,

    /// Independent restarts; the most likely one is kept.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    restarts: u64,

    #[arg(long, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
}

impl TrainArgs {
    fn train_config(&self, seed: u64) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            epochs: self.epochs as usize,
            lr_init: self.lr_init,
            lr_floor: self.lr_floor,
            seed_sample_size: self.seed_sample_size as usize,
            negative_ratio: self.negative_ratio,
            clamp_eps: self.clamp_eps,
            n_restarts: self.restarts as usize,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn describe(&self, out: &mut Vec<(String, String)>) {
        push(out, "epochs", self.epochs);
        push(out, "lr-init", self.lr_init);
        push(out, "lr-floor", self.lr_floor);
        push(out, "seed-sample-size", self.seed_sample_size);
        push(out, "negative-ratio", self.negative_ratio);
        push(out, "clamp-eps", self.clamp_eps);
        push(out, "restarts", self.restarts);
        let p = match self.precision {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        };
        push(out, "precision", p);
    }
}

/// Input files. `--data DIR` supplies the default file names.
#[derive(Debug, Args)]
struct DataArgs {
    /// Directory holding graph.tsv, items.tsv and activations.tsv.
    #[arg(long)]
    data: Option<PathBuf>,

    #[arg(long)]
    graph_file: Option<PathBuf>,

    #[arg(long)]
    items_file: Option<PathBuf>,

    #[arg(long)]
    activations_file: Option<PathBuf>,
}

impl DataArgs {
    fn resolve(&self, explicit: &Option<PathBuf>, flag: &str, default: &str) -> Result<PathBuf> {
        match (explicit, &self.data) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(dir)) => Ok(dir.join(default)),
            (None, None) => Err(Error::Validation(format!("missing --{flag} (or --data DIR)"))),
        }
    }

    fn graph_path(&self) -> Result<PathBuf> {
        self.resolve(&self.graph_file, "graph-file", GRAPH_FILE)
    }

    fn items_path(&self) -> Result<PathBuf> {
        self.resolve(&self.items_file, "items-file", ITEMS_FILE)
    }

    fn activations_path(&self) -> Result<PathBuf> {
        self.resolve(&self.activations_file, "activations-file", ACTIVATIONS_FILE)
    }

    fn describe(&self, out: &mut Vec<(String, String)>) {
        for (key, value) in [
            ("data", &self.data),
            ("graph-file", &self.graph_file),
            ("items-file", &self.items_file),
            ("activations-file", &self.activations_file),
        ] {
            if let Some(p) = value {
                push(out, key, p.display());
            }
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,

    #[command(flatten)]
    train: TrainArgs,

    /// Train only on this fraction of items, split like `evaluate`.
    #[arg(long)]
    holdout: Option<f64>,

    /// Seed of the item split; defaults to `--seed`.
    #[arg(long)]
    split_seed: Option<u64>,

    /// Output directory for embeddings.tsv, trace.tsv and restarts.tsv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[command(flatten)]
    data: DataArgs,

    #[arg(long)]
    embeddings: PathBuf,

    /// `item<TAB>v<TAB>u` rows to score.
    #[arg(long)]
    triples: PathBuf,

    /// Output scores file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,

    #[command(flatten)]
    train: TrainArgs,

    /// Fraction of items used for training in a single holdout split.
    #[arg(long, default_value_t = 0.9, conflicts_with = "folds")]
    holdout: f64,

    /// Use k-fold cross-validation instead of a holdout split.
    #[arg(long)]
    folds: Option<usize>,

    /// Score with these embeddings instead of fitting.
    #[arg(long)]
    embeddings: Option<PathBuf>,

    /// Average metrics over items instead of pooling all pairs.
    #[arg(long)]
    per_item: bool,

    /// Activators sampled per test item; all of them when absent.
    #[arg(long)]
    eval_activators: Option<usize>,

    /// Negatives per positive among test pairs.
    #[arg(long, default_value_t = 2.0)]
    eval_negative_ratio: f64,

    /// Output directory for report.tsv, roc.tsv and timing.tsv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SyntheticArgs {
    #[arg(long, value_delimiter = ',', default_value = "complete:100,ba:100:10", value_parser = parse_graph_spec)]
    graphs: Vec<GraphSpec>,

    #[arg(long, value_delimiter = ',', default_value = "1,4,16")]
    polarizations: Vec<f64>,

    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    item_counts: Vec<usize>,

    /// Replicates per cell, using seeds `seed, seed+1, ...`.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    replicates: u64,

    #[command(flatten)]
    model: ModelArgs,

    #[command(flatten)]
    train: TrainArgs,

    #[arg(long, default_value_t = 0.9)]
    holdout: f64,

    /// Also write the table as TSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_graph_spec(s: &str) -> std::result::Result<GraphSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn push(out: &mut Vec<(String, String)>, key: &str, value: impl Display) {
    out.push((key.to_string(), value.to_string()));
}

fn join<T: Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Settings of one run of the synthetic pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticRun {
    pub gen: GenConfig,
    pub train: TrainConfig,
    pub train_frac: f64,
    pub eval: EvalConfig,
}

impl SyntheticRun {
    /// Default training and evaluation settings with every seed set to `seed`.
    pub fn new(graph: GraphSpec, polarization: f64, n_items: usize, seed: u64) -> Self {
        SyntheticRun {
            gen: GenConfig { graph, polarization, n_items, seed, ..GenConfig::default() },
            train: TrainConfig { seed, ..TrainConfig::default() },
            train_frac: 0.9,
            eval: EvalConfig { seed, ..EvalConfig::default() },
        }
    }

    /// Generates, splits, fits on the training items and scores the rest.
    /// Produces the same report as `generate` followed by `evaluate` with
    /// the same seed.
    pub fn run(&self) -> Result<EvalReport> {
        let data = generate_dataset(&self.gen)?;
        let plan = SplitPlan { mode: SplitMode::Holdout { train_frac: self.train_frac }, seed: self.gen.seed };
        let folds = split_items(data.items.len(), &plan)?;
        evaluate(&data.graph, &data.items, &data.log, &folds, Scorer::Fit(&self.train), &self.eval)
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run_with_args(args: Vec<String>) -> i32 {
    let args = match inject_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", first.trim_start_matches("error: "));
            return 2;
        }
    };
    let level = if cli.global.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}

pub fn run() -> i32 {
    run_with_args(std::env::args_os().map(|a| a.to_string_lossy().into_owned()).collect())
}

/// Splices `key=value` lines from the `--config` file into `args`: global
/// keys right after the program name, the rest right after the subcommand,
/// so explicit flags (which come later) take precedence.
fn inject_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| Error::io(Path::new(&path), e))?;
    let mut global = Vec::new();
    let mut local = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(&path, n + 1, "expected key=value"))?;
        let (key, value) = (key.trim(), value.trim());
        let target = if GLOBAL_KEYS.contains(&key) { &mut global } else { &mut local };
        if SWITCHES.contains(&key) {
            match value {
                "true" => target.push(format!("--{key}")),
                "false" => {}
                _ => return Err(Error::parse(&path, n + 1, format!("{key} must be true or false"))),
            }
        } else {
            target.push(format!("--{key}={value}"));
        }
    }
    let mut out = Vec::with_capacity(args.len() + global.len() + local.len());
    let sub = args.iter().position(|a| SUBCOMMANDS.contains(&a.as_str()));
    for (i, a) in args.into_iter().enumerate() {
        out.push(a);
        if i == 0 {
            out.append(&mut global);
        }
        if Some(i) == sub {
            out.append(&mut local);
        }
    }
    Ok(out)
}

fn dispatch(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    if g.print_config {
        let mut lines = Vec::new();
        push(&mut lines, "seed", g.seed);
        push(&mut lines, "threads", g.threads);
        push(&mut lines, "verbose", g.verbose);
        describe(&cli.command, &mut lines);
        for (k, v) in lines {
            println!("{k}={v}");
        }
        return Ok(());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(g.threads as usize)
        .build()
        .map_err(|e| Error::Validation(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Generate(a) => cmd_generate(a, g.seed),
        Command::Fit(a) => match a.train.precision {
            Precision::F32 => cmd_fit::<f32>(a, g.seed),
            Precision::F64 => cmd_fit::<f64>(a, g.seed),
        },
        Command::Predict(a) => cmd_predict(a),
        Command::Evaluate(a) => match a.train.precision {
            Precision::F32 => cmd_evaluate::<f32>(a, g.seed),
            Precision::F64 => cmd_evaluate::<f64>(a, g.seed),
        },
        Command::ReproduceSynthetic(a) => cmd_synthetic(a, g.seed),
    })
}

fn describe(cmd: &Command, out: &mut Vec<(String, String)>) {
    match cmd {
        Command::Generate(a) => {
            push(out, "graph", a.graph);
            push(out, "polarization", a.polarization);
            a.model.describe(out);
            push(out, "items", a.items);
            push(out, "out", a.out.display());
        }
        Command::Fit(a) => {
            a.data.describe(out);
            a.train.describe(out);
            if let Some(h) = a.holdout {
                push(out, "holdout", h);
            }
            if let Some(s) = a.split_seed {
                push(out, "split-seed", s);
            }
            push(out, "out", a.out.display());
        }
        Command::Predict(a) => {
            a.data.describe(out);
            push(out, "embeddings", a.embeddings.display());
            push(out, "triples", a.triples.display());
            push(out, "out", a.out.display());
        }
        Command::Evaluate(a) => {
            a.data.describe(out);
            a.train.describe(out);
            match a.folds {
                Some(k) => push(out, "folds", k),
                None => push(out, "holdout", a.holdout),
            }
            if let Some(e) = &a.embeddings {
                push(out, "embeddings", e.display());
            }
            push(out, "per-item", a.per_item);
            if let Some(n) = a.eval_activators {
                push(out, "eval-activators", n);
            }
            push(out, "eval-negative-ratio", a.eval_negative_ratio);
            push(out, "out", a.out.display());
        }
        Command::ReproduceSynthetic(a) => {
            push(out, "graphs", join(&a.graphs));
            push(out, "polarizations", join(&a.polarizations));
            push(out, "item-counts", join(&a.item_counts));
            push(out, "replicates", a.replicates);
            a.model.describe(out);
            a.train.describe(out);
            push(out, "holdout", a.holdout);
            if let Some(o) = &a.out {
                push(out, "out", o.display());
            }
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn cmd_generate(a: &GenerateArgs, seed: u64) -> Result<()> {
    let cfg = a.model.gen_config(a.graph, a.polarization, a.items as usize, seed)?;
    let data = generate_dataset(&cfg)?;
    create_dir(&a.out)?;
    let nodes = IdMap::identity(data.graph.node_count());
    let items = IdMap::identity(data.items.len());
    io::write_graph(&a.out.join(GRAPH_FILE), &data.graph, &nodes)?;
    io::write_items(&a.out.join(ITEMS_FILE), &data.items, &items)?;
    io::write_activations(&a.out.join(ACTIVATIONS_FILE), &data.log, &items, &nodes)?;
    io::write_embeddings(&a.out.join(TRUTH_FILE), &data.truth, &nodes)?;
    println!(
        "nodes={} edges={} items={} activations={} out={}",
        data.graph.node_count(),
        data.graph.edge_count(),
        data.items.len(),
        data.log.len(),
        a.out.display()
    );
    Ok(())
}

struct Loaded<T> {
    graph: DirectedGraph,
    nodes: IdMap,
    items: Vec<ItemTopics<T>>,
    item_ids: IdMap,
    log: ActivationLog,
}

fn load<T: Scalar>(data: &DataArgs, with_log: bool) -> Result<Loaded<T>> {
    let (graph, nodes) = io::read_graph(&data.graph_path()?)?;
    let (items, item_ids) = io::read_items::<T>(&data.items_path()?, None)?;
    let log = if with_log {
        io::read_activations(&data.activations_path()?, &item_ids, &nodes)?
    } else {
        ActivationLog::new(Vec::new(), items.len())?
    };
    info!("loaded {} nodes, {} items, {} activations", graph.node_count(), items.len(), log.len());
    Ok(Loaded { graph, nodes, items, item_ids, log })
}

fn cmd_fit<T: Scalar>(a: &FitArgs, seed: u64) -> Result<()> {
    let cfg = a.train.train_config(seed)?;
    let d = load::<T>(&a.data, true)?;
    let train: Vec<ItemId> = match a.holdout {
        Some(frac) => {
            let plan = SplitPlan { mode: SplitMode::Holdout { train_frac: frac }, seed: a.split_seed.unwrap_or(seed) };
            split_items(d.items.len(), &plan)?.rounds().swap_remove(0).0
        }
        None => (0..d.items.len()).map(ItemId::from).collect(),
    };
    let (emb, trace) = fit_items(&d.graph, &d.items, &d.log, &train, &cfg)?;
    create_dir(&a.out)?;
    io::write_embeddings(&a.out.join("embeddings.tsv"), &emb, &d.nodes)?;
    io::write_trace(&a.out.join("trace.tsv"), &trace)?;
    io::write_restarts(&a.out.join("restarts.tsv"), &trace)?;
    let best = &trace.restarts[trace.best_restart];
    println!(
        "nodes={} train_items={} restarts={} best_restart={} final_mean_loglik={}",
        emb.node_count(),
        train.len(),
        trace.restarts.len(),
        trace.best_restart,
        io::fmt_sig9(best.final_mean_loglik)
    );
    Ok(())
}

fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let d = load::<f64>(&a.data, false)?;
    let emb: EmbeddingTable = io::read_embeddings(&a.embeddings, Some(d.items[0].k()), &d.nodes)?;
    let triples = io::read_triples(&a.triples, &d.item_ids, &d.nodes)?;
    let scored = score_pairs(&triples, &d.items, &emb);
    if let Some(dir) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    io::write_scores(&a.out, &scored, &d.item_ids, &d.nodes)?;
    println!("scored={} out={}", scored.len(), a.out.display());
    Ok(())
}

fn cmd_evaluate<T: Scalar>(a: &EvaluateArgs, seed: u64) -> Result<()> {
    let train_cfg = a.train.train_config(seed)?;
    let d = load::<T>(&a.data, true)?;
    let mode = match a.folds {
        Some(k) => SplitMode::KFold { folds: k },
        None => SplitMode::Holdout { train_frac: a.holdout },
    };
    let folds = split_items(d.items.len(), &SplitPlan { mode, seed })?;
    let eval_cfg = EvalConfig {
        pooling: if a.per_item { Pooling::PerItem } else { Pooling::Pooled },
        activators: a.eval_activators,
        negative_ratio: a.eval_negative_ratio,
        seed,
    };
    let fixed;
    let scorer = match &a.embeddings {
        Some(p) => {
            fixed = io::read_embeddings::<T>(p, Some(d.items[0].k()), &d.nodes)?;
            Scorer::Fixed(&fixed)
        }
        None => Scorer::Fit(&train_cfg),
    };
    let report = evaluate(&d.graph, &d.items, &d.log, &folds, scorer, &eval_cfg)?;
    create_dir(&a.out)?;
    io::write_report(&a.out.join("report.tsv"), &report)?;
    io::write_roc(&a.out.join("roc.tsv"), &report.roc)?;
    io::write_timing(&a.out.join("timing.tsv"), &report)?;
    let (auc, _) = report.auc_mean_std();
    let (ap, _) = report.ap_mean_std();
    println!("auc_roc={} avg_precision={}", io::fmt_sig9(auc), io::fmt_sig9(ap));
    Ok(())
}

fn cmd_synthetic(a: &SyntheticArgs, seed: u64) -> Result<()> {
    let mut rows = Vec::new();
    println!("graph\tpolarization\titems\tauc_mean\tauc_std\tap_mean\tap_std");
    for &graph in &a.graphs {
        for &p in &a.polarizations {
            for &n in &a.item_counts {
                let mut aucs = Vec::new();
                let mut aps = Vec::new();
                for r in 0..a.replicates {
                    let s = seed + r;
                    let run = SyntheticRun {
                        gen: a.model.gen_config(graph, p, n, s)?,
                        train: a.train.train_config(s)?,
                        train_frac: a.holdout,
                        eval: EvalConfig { seed: s, ..EvalConfig::default() },
                    };
                    let report = run.run()?;
                    aucs.push(report.auc_mean_std().0);
                    aps.push(report.ap_mean_std().0);
                    info!("{graph} p={p} items={n} seed={s}: auc {:.4}", aucs[aucs.len() - 1]);
                }
                let (am, asd) = mean_std(&aucs);
                let (pm, psd) = mean_std(&aps);
                let row = format!("{graph}\t{p}\t{n}\t{am:.3}\t{asd:.3}\t{pm:.3}\t{psd:.3}");
                println!("{row}");
                rows.push(row);
            }
        }
    }
    if let Some(path) = &a.out {
        let mut text = String::from("graph\tpolarization\titems\tauc_mean\tauc_std\tap_mean\tap_std\n");
        for r in rows {
            text.push_str(&r);
            text.push('\n');
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
