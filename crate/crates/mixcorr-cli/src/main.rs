//! Command line front end for latent correlation estimation on mixed data.
//!
//! Subcommands cover the full pipeline: simulate data from a correlation
//! recipe, estimate the latent correlation matrix from a CSV dataset,
//! benchmark accuracy against a known truth, compare against classical
//! coefficients, and threshold an estimated matrix into an association
//! network.
//!
//! Every run is reproducible: randomness is driven by a seed that defaults
//! to a fixed constant, and all numeric outputs are byte-identical across
//! runs and thread counts. Output files are written atomically (temp file
//! plus rename) with UTF-8 text and LF line endings, and each invocation
//! writes a manifest JSON naming the exact command line next to its outputs.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 on a data or numeric
//! failure.

use clap::{Parser, Subcommand, ValueEnum};
use mixcorr::coeffs::{compare_matrix, comparison_csv};
use mixcorr::data::{load_csv, load_schema, schema_to_json};
use mixcorr::estimator::{
    estimate_matrix, CorrelationMatrix, MatrixEstimate, OptimizerOpts, PairDiagnostic, PsdReport,
};
use mixcorr::metrics::{bench_run, derive_seed, reps_csv, summary_csv, BenchOpts, BenchResult};
use mixcorr::network::{build_network, Network};
use mixcorr::oracle::SmallModel;
use mixcorr::sim::{
    margins_thirds, parse_margins, permute_margins, sample_dataset, MarginalSpec, SigmaRecipe,
};
use mixcorr::MarginalKind;
use serde::Serialize;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Seed used when --seed is not given; fixed so that default runs are
/// reproducible rather than entropy-driven.
const DEFAULT_SEED: u64 = 1729;

#[derive(Parser)]
#[command(
    name = "mixcorr",
    version,
    about = "Latent correlation estimation for mixed continuous/discrete data",
    long_about = "Estimates the latent Gaussian correlation matrix of mixed \
                  continuous/discrete data by pairwise maximum likelihood on \
                  empirical-CDF pseudo-observations, with simulation, \
                  benchmarking, coefficient comparison, and network export."
)]
struct Cli {
    /// Worker threads (default: MIXCORR_THREADS, then all logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the latent correlation matrix from a CSV dataset.
    Estimate {
        /// Input data CSV: header row, numeric fields, empty field = missing.
        #[arg(long)]
        input: PathBuf,

        /// Schema JSON: array of {"name", "kind": "continuous"|"discrete"}.
        #[arg(long)]
        schema: PathBuf,

        /// Output matrix CSV; a diagnostics JSON sidecar is written next to it.
        #[arg(long)]
        out: PathBuf,

        /// Coarse grid size for the per-pair likelihood scan.
        #[arg(long, default_value_t = 21)]
        grid_points: usize,

        /// Bracket width at which the per-pair refinement stops.
        #[arg(long, default_value_t = 1e-6)]
        bracket_tol: f64,
    },

    /// Draw a dataset from a correlation recipe and margin list.
    Simulate {
        /// Correlation recipe: "blocks:7x0.8,10x0.6,...", "sparse:0.91:30",
        /// or "file:PATH" to load a matrix CSV.
        #[arg(long)]
        recipe: String,

        /// Margins: "thirds:D" or a comma list like
        /// "normal(0,1),poisson(3),bernoulli(0.5)*2" (default: thirds of the
        /// recipe dimension).
        #[arg(long)]
        margins: Option<String>,

        /// Shuffle which margin sits on which variable (seeded).
        #[arg(long)]
        shuffle_margins: bool,

        /// Number of rows to draw.
        #[arg(long)]
        n: usize,

        /// Random seed.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,

        /// Output data CSV.
        #[arg(long)]
        out: PathBuf,

        /// Output schema JSON (default: data path with a .schema.json suffix).
        #[arg(long)]
        schema_out: Option<PathBuf>,
    },

    /// Generate a correlation matrix from a recipe and write it as CSV.
    Gensigma {
        /// Correlation recipe, as for simulate.
        #[arg(long)]
        recipe: String,

        /// Random seed; with the same seed, simulate and bench use this
        /// exact matrix as their truth.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,

        /// Output matrix CSV.
        #[arg(long)]
        out: PathBuf,
    },

    /// Benchmark estimation accuracy against a known generating matrix.
    Bench {
        /// Correlation recipe, as for simulate.
        #[arg(long)]
        recipe: String,

        /// Margins, as for simulate (default: thirds of the recipe dimension).
        #[arg(long)]
        margins: Option<String>,

        /// Shuffle which margin sits on which variable (seeded).
        #[arg(long)]
        shuffle_margins: bool,

        /// Sample size per replication; repeat the flag for several sizes.
        #[arg(long, default_values_t = vec![100])]
        n: Vec<usize>,

        /// Replications per sample size.
        #[arg(long, default_value_t = 50)]
        reps: usize,

        /// Random seed.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,

        /// |estimate| at or above this counts as a detected link.
        #[arg(long, default_value_t = 0.25)]
        threshold: f64,

        /// Output directory for summary.csv and per-replication CSVs.
        #[arg(long)]
        out: PathBuf,
    },

    /// Tabulate classical coefficients against the copula estimate per pair.
    Compare {
        /// Input data CSV.
        #[arg(long)]
        input: PathBuf,

        /// Schema JSON.
        #[arg(long)]
        schema: PathBuf,

        /// Output comparison CSV.
        #[arg(long)]
        out: PathBuf,
    },

    /// Threshold an estimated matrix into an association network.
    Network {
        /// Estimated (or generated) correlation matrix CSV.
        #[arg(long)]
        corr: PathBuf,

        /// Optional schema JSON; when given, nodes carry their column kind
        /// as a type tag.
        #[arg(long)]
        schema: Option<PathBuf>,

        /// Edge threshold on |correlation|, in [0, 1]; repeat the flag to
        /// write one network per threshold.
        #[arg(long, required = true)]
        threshold: Vec<f64>,

        /// Output format.
        #[arg(long, value_enum, default_value_t = NetFormat::Graphml)]
        format: NetFormat,

        /// Also write a hub table of nodes with at least this degree.
        #[arg(long)]
        min_degree: Option<usize>,

        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },

    /// Evaluate the small-model joint density (debugging aid).
    #[command(hide = true)]
    Oracle {
        /// Correlation matrix CSV (up to 3 variables).
        #[arg(long)]
        corr: PathBuf,

        /// Margin list, one per variable.
        #[arg(long)]
        margins: String,

        /// Point to evaluate, as a comma list of coordinates.
        #[arg(long)]
        point: Option<String>,

        /// Integrate the density over the whole space instead.
        #[arg(long)]
        total_mass: bool,

        /// Quadrature tolerance for --total-mass.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NetFormat {
    Graphml,
    Dot,
    EdgeCsv,
    Json,
}

impl NetFormat {
    fn extension(self) -> &'static str {
        match self {
            NetFormat::Graphml => "graphml",
            NetFormat::Dot => "dot",
            NetFormat::EdgeCsv => "csv",
            NetFormat::Json => "json",
        }
    }

    fn render(self, net: &Network) -> Result<String, CliError> {
        Ok(match self {
            NetFormat::Graphml => net.to_graphml(),
            NetFormat::Dot => net.to_dot(),
            NetFormat::EdgeCsv => net.edge_csv(),
            NetFormat::Json => net.to_json()?,
        })
    }
}

/// Usage errors exit with code 1, everything else (I/O, parsing, numeric
/// failures) with code 2.
enum CliError {
    Usage(String),
    Failure(String),
}

impl From<mixcorr::Error> for CliError {
    fn from(e: mixcorr::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

fn usage(e: impl Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            1
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = resolve_threads(cli.threads)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Failure(e.to_string()))?;
    let start = Instant::now();
    match cli.command {
        Command::Estimate {
            input,
            schema,
            out,
            grid_points,
            bracket_tol,
        } => cmd_estimate(
            &input,
            &schema,
            &out,
            grid_points,
            bracket_tol,
            threads,
            start,
        ),
        Command::Simulate {
            recipe,
            margins,
            shuffle_margins,
            n,
            seed,
            out,
            schema_out,
        } => cmd_simulate(
            &recipe,
            margins.as_deref(),
            shuffle_margins,
            n,
            seed,
            &out,
            schema_out.as_deref(),
            threads,
            start,
        ),
        Command::Gensigma { recipe, seed, out } => {
            cmd_gensigma(&recipe, seed, &out, threads, start)
        }
        Command::Bench {
            recipe,
            margins,
            shuffle_margins,
            n,
            reps,
            seed,
            threshold,
            out,
        } => cmd_bench(
            &recipe,
            margins.as_deref(),
            shuffle_margins,
            &n,
            reps,
            seed,
            threshold,
            &out,
            threads,
            start,
        ),
        Command::Compare { input, schema, out } => {
            cmd_compare(&input, &schema, &out, threads, start)
        }
        Command::Network {
            corr,
            schema,
            threshold,
            format,
            min_degree,
            out,
        } => cmd_network(
            &corr,
            schema.as_deref(),
            &threshold,
            format,
            min_degree,
            &out,
            threads,
            start,
        ),
        Command::Oracle {
            corr,
            margins,
            point,
            total_mass,
            tol,
        } => cmd_oracle(&corr, &margins, point.as_deref(), total_mass, tol),
    }
}

/// Thread count: the flag wins, then MIXCORR_THREADS, then logical cores.
fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    match flag {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => Ok(t),
        None => match std::env::var("MIXCORR_THREADS") {
            Ok(s) => s
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&t| t >= 1)
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "MIXCORR_THREADS must be a positive integer, got {s:?}"
                    ))
                }),
            Err(_) => Ok(std::thread::available_parallelism().map_or(1, usize::from)),
        },
    }
}

/// Writes `content` to `path` atomically: a temp file in the same directory
/// is written in full and then renamed over the target.
fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.persist(path).map_err(|e| CliError::from(e.error))?;
    Ok(())
}

/// Manifest written beside every invocation's outputs, naming the exact
/// command line and run parameters. Timing lives here and only here, so the
/// data outputs themselves stay byte-identical across runs.
#[derive(Serialize)]
struct RunManifest {
    command: Vec<String>,
    version: String,
    seed: Option<u64>,
    threads: usize,
    elapsed_seconds: f64,
    outputs: Vec<String>,
}

/// Writes the manifest next to the primary output: `<dir>/manifest.json`
/// when the outputs share a directory target, `<file>.manifest.json`
/// otherwise.
fn write_manifest(
    primary: &Path,
    primary_is_dir: bool,
    seed: Option<u64>,
    threads: usize,
    start: Instant,
    outputs: &[&Path],
) -> Result<(), CliError> {
    let manifest = RunManifest {
        command: std::env::args().collect(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        threads,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = if primary_is_dir {
        primary.join("manifest.json")
    } else {
        manifest_sibling(primary)
    };
    let mut text =
        serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Failure(e.to_string()))?;
    text.push('\n');
    write_atomic(&path, &text)
}

fn manifest_sibling(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}

fn kind_tag(kind: MarginalKind) -> &'static str {
    match kind {
        MarginalKind::Continuous => "continuous",
        MarginalKind::Discrete => "discrete",
    }
}

/// Column-level portion of the estimate diagnostics sidecar.
#[derive(Serialize)]
struct ColumnReport {
    name: String,
    kind: &'static str,
    missing: usize,
}

#[derive(Serialize)]
struct EstimateDiagnostics<'a> {
    n_rows: usize,
    columns: Vec<ColumnReport>,
    psd: &'a PsdReport,
    pairs: &'a [PairDiagnostic],
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    input: &Path,
    schema_path: &Path,
    out: &Path,
    grid_points: usize,
    bracket_tol: f64,
    threads: usize,
    start: Instant,
) -> Result<(), CliError> {
    if grid_points < 2 {
        return Err(CliError::Usage("--grid-points must be at least 2".into()));
    }
    if !(bracket_tol.is_finite() && bracket_tol > 0.0) {
        return Err(CliError::Usage("--bracket-tol must be positive".into()));
    }
    let schema = load_schema(schema_path)?;
    let data = load_csv(input, schema)?;
    let columns: Vec<ColumnReport> = (0..data.n_cols())
        .map(|j| ColumnReport {
            name: data.name(j).to_string(),
            kind: kind_tag(data.kind(j)),
            missing: data.missing_count(j),
        })
        .collect();
    let total_missing: usize = columns.iter().map(|c| c.missing).sum();
    println!(
        "loaded {} rows x {} columns ({} missing entries)",
        data.n_rows(),
        data.n_cols(),
        total_missing
    );
    for c in columns.iter().filter(|c| c.missing > 0) {
        println!("  column {}: {} missing", c.name, c.missing);
    }
    let opts = OptimizerOpts {
        grid_points,
        bracket_tol,
        ..OptimizerOpts::default()
    };
    let est: MatrixEstimate = estimate_matrix(&data, &opts)?;
    let failed = est
        .diagnostics
        .iter()
        .filter(|d| d.failure.is_some())
        .count();
    println!(
        "estimated {} pairs ({} failed); smallest eigenvalue {:.6}",
        est.diagnostics.len(),
        failed,
        est.psd.smallest_eigenvalue
    );
    let diag_path = {
        let mut name = out
            .file_stem()
            .map(|s| s.to_os_string())
            .unwrap_or_default();
        name.push(".diagnostics.json");
        out.with_file_name(name)
    };
    let diagnostics = EstimateDiagnostics {
        n_rows: data.n_rows(),
        columns,
        psd: &est.psd,
        pairs: &est.diagnostics,
    };
    let mut diag_text =
        serde_json::to_string_pretty(&diagnostics).map_err(|e| CliError::Failure(e.to_string()))?;
    diag_text.push('\n');
    write_atomic(out, &est.matrix.to_csv_string())?;
    write_atomic(&diag_path, &diag_text)?;
    write_manifest(out, false, None, threads, start, &[out, &diag_path])
}

fn parse_recipe(s: &str) -> Result<SigmaRecipe, CliError> {
    if let Some(path) = s.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)?;
        let matrix = CorrelationMatrix::from_csv_str(&text)?;
        return Ok(SigmaRecipe::Fixed(Box::new(matrix)));
    }
    SigmaRecipe::parse(s).map_err(usage)
}

fn resolve_margins(spec: Option<&str>, dim: usize) -> Result<Vec<MarginalSpec>, CliError> {
    let margins = match spec {
        Some(s) => parse_margins(s).map_err(usage)?,
        None => margins_thirds(dim),
    };
    if margins.len() != dim {
        return Err(CliError::Usage(format!(
            "{} margins given for {dim} variables",
            margins.len()
        )));
    }
    Ok(margins)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    recipe: &str,
    margins: Option<&str>,
    shuffle_margins: bool,
    n: usize,
    seed: u64,
    out: &Path,
    schema_out: Option<&Path>,
    threads: usize,
    start: Instant,
) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let recipe = parse_recipe(recipe)?;
    let mut margins = resolve_margins(margins, recipe.dim())?;
    let (sigma, _) = recipe.generate(derive_seed(seed, 0))?;
    if shuffle_margins {
        margins = permute_margins(&margins, derive_seed(seed, u64::MAX));
    }
    let data = sample_dataset(&sigma, &margins, n, derive_seed(seed, 1))?;
    let schema_path = schema_out.map(Path::to_path_buf).unwrap_or_else(|| {
        let mut name = out
            .file_stem()
            .map(|s| s.to_os_string())
            .unwrap_or_default();
        name.push(".schema.json");
        out.with_file_name(name)
    });
    let mut schema_text = schema_to_json(data.schema())?;
    schema_text.push('\n');
    write_atomic(out, &data.to_csv_string())?;
    write_atomic(&schema_path, &schema_text)?;
    println!(
        "wrote {} rows x {} columns to {}",
        data.n_rows(),
        data.n_cols(),
        out.display()
    );
    write_manifest(out, false, Some(seed), threads, start, &[out, &schema_path])
}

fn cmd_gensigma(
    recipe: &str,
    seed: u64,
    out: &Path,
    threads: usize,
    start: Instant,
) -> Result<(), CliError> {
    let recipe = parse_recipe(recipe)?;
    let (sigma, gamma_f) = recipe.generate(derive_seed(seed, 0))?;
    write_atomic(out, &sigma.to_csv_string())?;
    match gamma_f {
        Some(g) => println!(
            "wrote {}x{} matrix to {} (zero fraction {:.4})",
            sigma.dim(),
            sigma.dim(),
            out.display(),
            g
        ),
        None => println!(
            "wrote {}x{} matrix to {}",
            sigma.dim(),
            sigma.dim(),
            out.display()
        ),
    }
    write_manifest(out, false, Some(seed), threads, start, &[out])
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    recipe: &str,
    margins: Option<&str>,
    shuffle_margins: bool,
    sizes: &[usize],
    reps: usize,
    seed: u64,
    threshold: f64,
    out_dir: &Path,
    threads: usize,
    start: Instant,
) -> Result<(), CliError> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(CliError::Usage(format!(
            "--threshold must be positive, got {threshold}"
        )));
    }
    let recipe = parse_recipe(recipe)?;
    let margins = resolve_margins(margins, recipe.dim())?;
    let mut results: Vec<BenchResult> = Vec::new();
    let mut outputs: Vec<PathBuf> = Vec::new();
    for &n in sizes {
        let opts = BenchOpts {
            recipe: recipe.clone(),
            margins: margins.clone(),
            shuffle_margins,
            n,
            reps,
            seed,
            threshold,
            optimizer: OptimizerOpts::default(),
        };
        let result = bench_run(&opts)?;
        let reps_path = out_dir.join(format!("reps_n{n}.csv"));
        write_atomic(&reps_path, &reps_csv(&result))?;
        println!(
            "n={n}: rmse {:.4} (ci {:.4}), mae {:.4}, auc {}",
            result.rmse.mean,
            result.rmse.ci95_half,
            result.mae.mean,
            result
                .auc
                .as_ref()
                .map_or("n/a".to_string(), |a| format!("{:.4}", a.mean))
        );
        outputs.push(reps_path);
        results.push(result);
    }
    let summary_path = out_dir.join("summary.csv");
    write_atomic(&summary_path, &summary_csv(&results))?;
    outputs.push(summary_path);
    let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    write_manifest(out_dir, true, Some(seed), threads, start, &refs)
}

fn cmd_compare(
    input: &Path,
    schema_path: &Path,
    out: &Path,
    threads: usize,
    start: Instant,
) -> Result<(), CliError> {
    let schema = load_schema(schema_path)?;
    let data = load_csv(input, schema)?;
    let rows = compare_matrix(&data, &OptimizerOpts::default())?;
    write_atomic(out, &comparison_csv(&rows))?;
    println!("wrote {} pair comparisons to {}", rows.len(), out.display());
    write_manifest(out, false, None, threads, start, &[out])
}

#[allow(clippy::too_many_arguments)]
fn cmd_network(
    corr: &Path,
    schema_path: Option<&Path>,
    thresholds: &[f64],
    format: NetFormat,
    min_degree: Option<usize>,
    out_dir: &Path,
    threads: usize,
    start: Instant,
) -> Result<(), CliError> {
    for &t in thresholds {
        if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
            return Err(CliError::Usage(format!(
                "--threshold must be in [0, 1], got {t}"
            )));
        }
    }
    let text = std::fs::read_to_string(corr)?;
    let matrix = CorrelationMatrix::from_csv_str(&text)?;
    let tags: Option<Vec<String>> = match schema_path {
        Some(p) => {
            let schema = load_schema(p)?;
            let names: Vec<&str> = schema.iter().map(|c| c.name.as_str()).collect();
            let have: Vec<&str> = matrix.names().iter().map(String::as_str).collect();
            if names != have {
                return Err(CliError::Failure(
                    "schema names do not match the matrix header".into(),
                ));
            }
            Some(
                schema
                    .iter()
                    .map(|c| kind_tag(c.kind).to_string())
                    .collect(),
            )
        }
        None => None,
    };
    let n_missing = matrix.missing_pairs();
    let mut outputs: Vec<PathBuf> = Vec::new();
    for &t in thresholds {
        let mut net = build_network(&matrix, t)?;
        if let Some(tags) = &tags {
            net.set_tags(tags)?;
        }
        let path = out_dir.join(format!("network_t{t}.{}", format.extension()));
        write_atomic(&path, &format.render(&net)?)?;
        println!(
            "threshold {t}: {} nodes, {} edges ({} missing pairs never linked)",
            net.nodes.len(),
            net.n_edges(),
            n_missing
        );
        outputs.push(path);
        if let Some(min_degree) = min_degree {
            let hub_path = out_dir.join(format!("hubs_t{t}.csv"));
            let mut table = String::from("node,degree\n");
            for (name, degree) in net.hubs(min_degree) {
                table.push_str(&format!("{name},{degree}\n"));
            }
            write_atomic(&hub_path, &table)?;
            outputs.push(hub_path);
        }
    }
    let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    write_manifest(out_dir, true, None, threads, start, &refs)
}

fn cmd_oracle(
    corr: &Path,
    margins: &str,
    point: Option<&str>,
    total_mass: bool,
    tol: f64,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(corr)?;
    let matrix = CorrelationMatrix::from_csv_str(&text)?;
    let margins = parse_margins(margins).map_err(usage)?;
    let model = SmallModel::new(matrix, margins)?;
    match (point, total_mass) {
        (Some(point), false) => {
            let coords: Vec<f64> = point
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Usage(format!("bad --point: {e}")))?;
            let density = model.joint_density(&coords)?;
            println!("{density:e}");
        }
        (None, true) => {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Usage("--tol must be positive".into()));
            }
            let mass = model.total_mass(tol)?;
            println!("{mass:.12}");
        }
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --point or --total-mass".into(),
            ))
        }
    }
    Ok(())
}
