use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use cluster_lab::density::{self, DbscanConfig};
use cluster_lab::evalgen::{self, AlgoConfig, BenchRecord, DatasetSpec, Preset};
use cluster_lab::hierarchical::{self, Linkage};
use cluster_lab::medoids::{self, ClaraConfig};
use cluster_lab::mixture::{self, CovType, GmmConfig};
use cluster_lab::partitional::{self, Init, KMeansConfig};
use cluster_lab::{parallel, Clustering, Dataset, Metric};

const THREADS_ENV: &str = "CLUSTER_LAB_THREADS";

#[derive(Parser)]
#[command(name = "cluster-lab", version, about = "Classical clustering algorithms and benchmark reproduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic dataset.
    Gen(GenArgs),
    /// Cluster a CSV dataset and print the assignment as JSON.
    Cluster(ClusterArgs),
    /// Export a diagnostic curve (elbow, k-distance, reachability, BIC, dendrogram).
    Curves(CurvesArgs),
    /// Run a benchmark suite and print the accuracy/runtime table.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Built-in class parameters.
    #[arg(long, value_enum, conflicts_with = "spec")]
    preset: Option<GenPreset>,
    /// JSON dataset specification with explicit class parameters.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Number of points (defaults to 1000, or the spec file's value).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenPreset {
    Mixed4,
    Gauss5,
    Poisson4,
}

impl From<GenPreset> for Preset {
    fn from(p: GenPreset) -> Self {
        match p {
            GenPreset::Mixed4 => Preset::Mixed4,
            GenPreset::Gauss5 => Preset::Gauss5,
            GenPreset::Poisson4 => Preset::Poisson4,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Kmeans,
    #[value(name = "kmeans++")]
    KmeansPp,
    Pam,
    Clara,
    Dbscan,
    Optics,
    Hierarchical,
    Gmm,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Kmeans => "kmeans",
            Algo::KmeansPp => "kmeans++",
            Algo::Pam => "pam",
            Algo::Clara => "clara",
            Algo::Dbscan => "dbscan",
            Algo::Optics => "optics",
            Algo::Hierarchical => "hierarchical",
            Algo::Gmm => "gmm",
        }
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    /// Input CSV (`x0,...,x{d-1}[,label]`).
    input: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    min_pts: Option<usize>,
    /// OPTICS extraction threshold.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, default_value = "upgma")]
    linkage: Linkage,
    /// Defaults to squared_euclidean for Ward and euclidean otherwise.
    #[arg(long)]
    metric: Option<Metric>,
    #[arg(long, default_value = "full")]
    cov_type: CovType,
    /// CLARA sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// CLARA sample size.
    #[arg(long)]
    sample_size: Option<usize>,
    /// Independent K-means starts; the lowest WCSS is kept.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveKind {
    Wcss,
    Kdist,
    Reachability,
    Bic,
    Dendrogram,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long, value_enum)]
    kind: CurveKind,
    input: PathBuf,
    /// Neighbour rank for the k-distance curve.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Largest k for the elbow and BIC curves.
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Elbow curve starts per k.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value = "kmeans++")]
    init: Init,
    #[arg(long, default_value_t = DbscanConfig::DEFAULT_MIN_PTS)]
    min_pts: usize,
    /// OPTICS radius; unbounded when omitted.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value = "upgma")]
    linkage: Linkage,
    #[arg(long)]
    metric: Option<Metric>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark dataset 1, 2 or 3.
    #[arg(long, required_unless_present = "data", conflicts_with = "data")]
    preset: Option<usize>,
    /// Labeled dataset CSV; needs --suite.
    #[arg(long, requires = "suite")]
    data: Option<PathBuf>,
    /// JSON array of algorithm configurations.
    #[arg(long)]
    suite: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// CSV table output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON output with full configuration maps.
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Bad or missing flags; exits with status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn require<T>(value: Option<T>, flag: &str, algo: &str) -> Result<T> {
    value.ok_or_else(|| usage(format!("--{flag} is required for {algo}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Curves(args) => cmd_curves(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn configure_threads() -> Result<()> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| usage(format!("{THREADS_ENV} must be a nonnegative integer, got {v:?}")))?;
            parallel::set_threads(n);
        }
        Err(_) => parallel::set_threads(0),
    }
    Ok(())
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Dataset::read_csv(BufReader::new(file)).with_context(|| format!("cannot read {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// Runs `f` against the file at `out`, or stdout.
fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Six significant digits for console output.
fn sig6(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.5e}").parse().unwrap_or(v);
    rounded.to_string()
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let mut spec = match (&args.preset, &args.spec) {
        (Some(p), None) => DatasetSpec::preset((*p).into(), args.n.unwrap_or(1000), args.seed.unwrap_or(0))
            .map_err(|e| usage(e.to_string()))?,
        (None, Some(path)) => {
            let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            serde_json::from_reader(BufReader::new(file)).map_err(|e| usage(format!("bad spec file: {e}")))?
        }
        _ => return Err(usage("exactly one of --preset or --spec is required")),
    };
    if let Some(n) = args.n {
        spec.n = n;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let ds = evalgen::generate(&spec).map_err(|e| usage(e.to_string()))?;
    let mut w = create(&args.out)?;
    ds.write_csv(&mut w)?;
    w.flush()?;
    let counts: Vec<String> = spec.class_counts().iter().map(ToString::to_string).collect();
    println!("wrote {} ({} rows)", args.out.display(), ds.len());
    println!("class counts: {}", counts.join(" "));
    Ok(())
}

fn cmd_cluster(args: ClusterArgs) -> Result<()> {
    let ds = read_dataset(&args.input)?;
    let algo = args.algo.name();
    let metric = args.metric.unwrap_or(match (args.algo, args.linkage) {
        (Algo::Hierarchical, Linkage::Ward) => Metric::SquaredEuclidean,
        _ => Metric::Euclidean,
    });
    let mut config = Map::new();
    let mut extra = Map::new();
    let clustering: Clustering = match args.algo {
        Algo::Kmeans | Algo::KmeansPp => {
            let k = require(args.k, "k", algo)?;
            let init = if args.algo == Algo::Kmeans { Init::Forgy } else { Init::PlusPlus };
            let cfg = KMeansConfig::new(k, init, args.seed);
            let res = partitional::kmeans_restarts(&ds, &cfg, args.restarts)?;
            config.insert("k".into(), json!(k));
            config.insert("init".into(), json!(init));
            config.insert("seed".into(), json!(args.seed));
            config.insert("restarts".into(), json!(args.restarts));
            extra.insert("wcss".into(), json!(res.wcss));
            extra.insert("iterations".into(), json!(res.iterations));
            extra.insert("centers".into(), json!(res.centers));
            res.clustering
        }
        Algo::Pam => {
            let k = require(args.k, "k", algo)?;
            let res = medoids::pam(&ds, k, metric)?;
            config.insert("k".into(), json!(k));
            config.insert("metric".into(), json!(metric));
            extra.insert("total_cost".into(), json!(res.total_cost));
            extra.insert("medoids".into(), json!(res.medoids));
            res.clustering
        }
        Algo::Clara => {
            let k = require(args.k, "k", algo)?;
            let mut cfg = ClaraConfig::new(k, args.seed);
            if let Some(s) = args.samples {
                cfg.num_samples = s;
            }
            if let Some(s) = args.sample_size {
                cfg.sample_size = s;
            }
            let res = medoids::clara(&ds, &cfg, metric)?;
            config.insert("k".into(), json!(k));
            config.insert("num_samples".into(), json!(cfg.num_samples));
            config.insert("sample_size".into(), json!(cfg.sample_size));
            config.insert("seed".into(), json!(args.seed));
            config.insert("metric".into(), json!(metric));
            extra.insert("total_cost".into(), json!(res.result.total_cost));
            extra.insert("medoids".into(), json!(res.result.medoids));
            extra.insert("best_sample".into(), json!(res.best_sample));
            res.result.clustering
        }
        Algo::Dbscan => {
            let eps = require(args.eps, "eps", algo)?;
            let min_pts = require(args.min_pts, "min-pts", algo)?;
            let cfg = DbscanConfig::new(eps, min_pts).map_err(|e| usage(e.to_string()))?;
            config.insert("eps".into(), json!(eps));
            config.insert("min_pts".into(), json!(min_pts));
            config.insert("metric".into(), json!(metric));
            density::dbscan(&ds, &cfg, metric)?
        }
        Algo::Optics => {
            let min_pts = require(args.min_pts, "min-pts", algo)?;
            let threshold = require(args.threshold, "threshold", algo)?;
            let eps = args.eps.unwrap_or(f64::INFINITY);
            let ord = density::optics(&ds, min_pts, eps, metric)?;
            config.insert("min_pts".into(), json!(min_pts));
            config.insert("eps".into(), if eps.is_finite() { json!(eps) } else { json!("inf") });
            config.insert("threshold".into(), json!(threshold));
            config.insert("metric".into(), json!(metric));
            density::extract_clusters(&ord, threshold)?
        }
        Algo::Hierarchical => {
            let k = require(args.k, "k", algo)?;
            let dendro = hierarchical::agglomerate(&ds, args.linkage, metric)?;
            config.insert("k".into(), json!(k));
            config.insert("linkage".into(), json!(args.linkage));
            config.insert("metric".into(), json!(metric));
            hierarchical::cut(&dendro, k)?
        }
        Algo::Gmm => {
            let k = require(args.k, "k", algo)?;
            let fit = mixture::fit_gmm(&ds, &GmmConfig::new(k, args.cov_type, args.seed))?;
            config.insert("k".into(), json!(k));
            config.insert("cov_type".into(), json!(args.cov_type));
            config.insert("seed".into(), json!(args.seed));
            extra.insert("log_likelihood".into(), json!(fit.log_likelihood));
            extra.insert(
                "bic".into(),
                json!(mixture::bic(
                    fit.log_likelihood,
                    mixture::param_count(args.cov_type, k, ds.dim()),
                    ds.len()
                )),
            );
            extra.insert("iterations".into(), json!(fit.iterations));
            extra.insert("converged".into(), json!(fit.converged));
            fit.clustering
        }
    };
    let mut out = Map::new();
    out.insert("algorithm".into(), json!(algo));
    out.insert("config".into(), Value::Object(config));
    out.insert("k".into(), json!(clustering.k()));
    out.insert("noise".into(), json!(clustering.noise_count()));
    out.insert("assignment".into(), json!(clustering.to_options()));
    if let Some(truth) = ds.labels() {
        out.insert("accuracy".into(), json!(evalgen::accuracy(&clustering, truth)?));
    }
    out.extend(extra);
    with_output(args.out.as_deref(), |w| {
        serde_json::to_writer(&mut *w, &Value::Object(out))?;
        writeln!(w)?;
        Ok(())
    })
}

fn cmd_curves(args: CurvesArgs) -> Result<()> {
    let ds = read_dataset(&args.input)?;
    let out = args.out.as_deref();
    match args.kind {
        CurveKind::Wcss => {
            if args.k_max == 0 {
                return Err(usage("--k-max must be at least 1"));
            }
            let template = KMeansConfig::new(1, args.init, args.seed);
            let rows = partitional::wcss_curve(&ds, 1..=args.k_max, &template, args.restarts)?;
            with_output(out, |w| Ok(partitional::write_wcss_csv(&rows, w)?))
        }
        CurveKind::Kdist => {
            let metric = args.metric.unwrap_or(Metric::Euclidean);
            let curve = density::kdist_curve(&ds, args.k, metric)?;
            with_output(out, |w| Ok(density::write_kdist_csv(&curve, w)?))
        }
        CurveKind::Reachability => {
            let metric = args.metric.unwrap_or(Metric::Euclidean);
            let ord = density::optics(&ds, args.min_pts, args.eps.unwrap_or(f64::INFINITY), metric)?;
            with_output(out, |w| Ok(ord.write_csv(w)?))
        }
        CurveKind::Bic => {
            if args.k_max == 0 {
                return Err(usage("--k-max must be at least 1"));
            }
            let scan = mixture::bic_scan(&ds, 1..=args.k_max, &CovType::ALL, args.seed)?;
            if let Some(best) = scan.best_cell() {
                eprintln!("best model: k={} {}", best.k, best.cov_type.name());
            }
            with_output(out, |w| Ok(scan.write_csv(w)?))
        }
        CurveKind::Dendrogram => {
            let metric = args.metric.unwrap_or(match args.linkage {
                Linkage::Ward => Metric::SquaredEuclidean,
                _ => Metric::Euclidean,
            });
            let dendro = hierarchical::agglomerate(&ds, args.linkage, metric)?;
            with_output(out, |w| Ok(dendro.write_csv(w)?))
        }
    }
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let read_suite = |path: &Path| -> Result<Vec<AlgoConfig>> {
        let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| usage(format!("bad suite file: {e}")))
    };
    let (ds, suite, title) = match (args.preset, &args.data) {
        (Some(number), None) => {
            let preset = Preset::from_number(number).map_err(|e| usage(e.to_string()))?;
            let spec = DatasetSpec::preset(preset, args.n, args.seed)?;
            let ds = evalgen::generate(&spec).map_err(|e| usage(e.to_string()))?;
            let suite = match &args.suite {
                Some(path) => read_suite(path)?,
                None => evalgen::preset_suite(preset, spec.classes.len(), args.seed)?,
            };
            (ds, suite, format!("dataset {number} ({}, n={}, seed={})", preset.name(), args.n, args.seed))
        }
        (None, Some(path)) => {
            let suite = read_suite(args.suite.as_deref().expect("clap enforces --suite"))?;
            (read_dataset(path)?, suite, path.display().to_string())
        }
        _ => return Err(usage("exactly one of --preset or --data is required")),
    };
    if args.repeats == 0 {
        return Err(usage("--repeats must be at least 1"));
    }
    let records = evalgen::benchmark(&ds, &suite, args.repeats)?;
    print_table(&title, &records);
    if let Some(path) = &args.out {
        let mut w = create(path)?;
        evalgen::write_bench_csv(&records, &mut w)?;
        w.flush()?;
    }
    if let Some(path) = &args.json {
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &records)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}

fn print_table(title: &str, records: &[BenchRecord]) {
    println!("{title}");
    println!("{:<10} {:<48} {:>12} {:>10}", "algorithm", "config", "runtime_ms", "accuracy");
    for r in records {
        let config = r.config_string();
        match &r.error {
            None => println!(
                "{:<10} {:<48} {:>12} {:>10}",
                r.algorithm,
                config,
                r.runtime_ms.map_or_else(String::new, sig6),
                r.accuracy.map_or_else(String::new, sig6)
            ),
            Some(e) => println!("{:<10} {:<48} failed: {e}", r.algorithm, config),
        }
    }
}
