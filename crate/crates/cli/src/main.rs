//! Command-line front end: materializes orbits, computes distance matrices,
//! estimates sample covering numbers and evaluates the bound formulas,
//! emitting diff-friendly CSV artifacts.
//!
//! Exit codes: 0 success, 2 usage error, 1 data or computation error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use orbitcover::bounds;
use orbitcover::complexity::{self, DescentOptions, LinearTransform};
use orbitcover::cover::{self, CoverCheck, Schedule, ScnAlgorithm};
use orbitcover::data::{self, DistanceMatrix, Sample};
use orbitcover::metric::{self, OrbitDistanceMatrix, PseudometricMatrix};
use orbitcover::transforms::TransformSpec;

const MAX_SAMPLE: usize = 5000;

#[derive(Parser)]
#[command(name = "orbitcover", version, about = "Quantify data-transformation suitability via sample covering numbers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute direct orbit distances and the induced pseudometric for a dataset
    Distances(DistancesArgs),
    /// Shortest-path closure of an existing direct-distance matrix file
    Metric(MetricArgs),
    /// Estimate sample covering numbers over an epsilon grid
    Scn(ScnArgs),
    /// Check whether a proposed center set covers the sample at a resolution
    VerifyCover(VerifyCoverArgs),
    /// Covering numbers at a resolution rescaled by the inter-class distance ratio
    Normalize(NormalizeArgs),
    /// Monte-Carlo Rademacher complexity of norm-bounded linear classes
    Rademacher(RademacherArgs),
    /// Evaluate the closed-form bound expressions
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Run the pipeline for several transform presets and join the curves
    Report(ReportArgs),
}

#[derive(Args)]
struct DatasetArgs {
    /// Dataset: a JSON manifest, a CIFAR-10 .bin batch, or a directory of
    /// data_batch_*.bin files
    #[arg(long)]
    dataset: PathBuf,
    /// Subset size drawn from the dataset (default: all)
    #[arg(long)]
    subset: Option<usize>,
    /// Balance the subset across classes
    #[arg(long)]
    balanced: bool,
}

#[derive(Args)]
struct DistancesArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Transform: preset name (base, flip, rotate, crop, cutout, colorjitter,
    /// 3dview), inline JSON, or @file.json
    #[arg(long)]
    transform: String,
    /// Orbit manifest for the 3dview preset
    #[arg(long)]
    orbits: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for d_orbit.bin, rho.bin and provenance.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MetricArgs {
    /// Direct orbit distance matrix file
    #[arg(long)]
    input: PathBuf,
    /// Output pseudometric matrix file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScnArgs {
    /// Pseudometric matrix file (rho.bin from `distances`)
    #[arg(long)]
    metric: PathBuf,
    /// Ascending comma-separated resolutions
    #[arg(long)]
    epsilons: String,
    #[arg(long, default_value = "kmedoids")]
    algo: String,
    /// Scan every k from n down to 1 instead of the coarse-to-fine schedule
    #[arg(long)]
    faithful: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Transform tag for the CSV (default: read from provenance.json next to
    /// the matrix)
    #[arg(long)]
    tag: Option<String>,
    /// Output CSV path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyCoverArgs {
    #[arg(long)]
    metric: PathBuf,
    #[arg(long)]
    epsilon: f64,
    /// Comma-separated center indices
    #[arg(long)]
    centers: String,
}

#[derive(Args)]
struct NormalizeArgs {
    /// Run directory holding rho.bin and provenance.json for the transform
    #[arg(long)]
    run: PathBuf,
    /// Run directory for the base (identity) preset on the same subset
    #[arg(long)]
    base_run: PathBuf,
    /// Dataset the runs were computed from (labels source)
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    epsilons: String,
    #[arg(long, default_value = "kmedoids")]
    algo: String,
    #[arg(long)]
    faithful: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RademacherArgs {
    /// general, invariant-l2, invariant-inf or report
    #[arg(long)]
    mode: String,
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    /// Dual exponent (inf accepted for the max norm)
    #[arg(long, default_value = "2")]
    q: String,
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gaussian data scale
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Data dimension
    #[arg(long)]
    d: usize,
    /// Sample size
    #[arg(long)]
    n: usize,
    /// d x d transform matrix as CSV (required for the invariant modes)
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Gradient-norm tolerance for invariant-inf
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// 24 B sqrt(m/n): complexity of bounded invariant classes from a cover
    Covering {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Refined entropy-integral bound for Lipschitz invariant classes
    Dudley {
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 0.0)]
        kappa: f64,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
    },
    /// Generalization bound under transform-set selection
    Selection {
        #[arg(long)]
        adv_mean: f64,
        #[arg(long)]
        rademacher: f64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: f64,
    },
    /// Row-wise worst-case loss of an n x K loss table CSV
    Adversarial {
        #[arg(long)]
        table: PathBuf,
    },
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Comma-separated preset names
    #[arg(long, default_value = "base,flip,rotate,crop")]
    presets: String,
    #[arg(long)]
    orbits: Option<PathBuf>,
    #[arg(long)]
    epsilons: String,
    #[arg(long, default_value = "kmedoids")]
    algo: String,
    #[arg(long)]
    faithful: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for report.csv and per-preset matrices
    #[arg(long)]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.into())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Distances(args) => cmd_distances(args),
        Command::Metric(args) => cmd_metric(args),
        Command::Scn(args) => cmd_scn(args),
        Command::VerifyCover(args) => cmd_verify_cover(args),
        Command::Normalize(args) => cmd_normalize(args),
        Command::Rademacher(args) => cmd_rademacher(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Report(args) => cmd_report(args),
    }
}

/// Nine significant digits, the artifact float format.
fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn parse_f64_list(s: &str, what: &str) -> CliResult<Vec<f64>> {
    let values: Vec<f64> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("{what} must be a comma-separated list of numbers: {s:?}")))?;
    if values.is_empty() {
        return Err(usage(format!("{what} list is empty")));
    }
    Ok(values)
}

fn parse_epsilons(s: &str) -> CliResult<Vec<f64>> {
    let eps = parse_f64_list(s, "--epsilons")?;
    if eps.windows(2).any(|w| w[0] > w[1]) {
        return Err(usage("--epsilons must be ascending"));
    }
    Ok(eps)
}

fn parse_algo(s: &str) -> CliResult<ScnAlgorithm> {
    s.parse::<ScnAlgorithm>().map_err(|e| usage(e.to_string()))
}

fn load_dataset(path: &Path) -> CliResult<Sample> {
    if path.is_dir() {
        let mut batches: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| CliError::Data(anyhow::Error::new(e).context(path.display().to_string())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("data_batch") && n.ends_with(".bin"))
            })
            .collect();
        batches.sort();
        if batches.is_empty() {
            return Err(usage(format!(
                "{}: no data_batch_*.bin files found",
                path.display()
            )));
        }
        Ok(data::load_cifar10_batches(&batches)?)
    } else if path.extension().is_some_and(|e| e == "json") {
        Ok(data::load_manifest(path)?)
    } else {
        Ok(data::load_cifar10_batch(path)?)
    }
}

/// Seeded subset selection: a shuffled prefix, optionally balanced per class.
/// Returned indices are ascending.
fn choose_subset(sample: &Sample, args: &DatasetArgs, seed: u64) -> CliResult<Vec<usize>> {
    let n = sample.len();
    let size = args.subset.unwrap_or(n);
    if size == 0 || size > n {
        return Err(usage(format!(
            "--subset {size} out of range for dataset of size {n}"
        )));
    }
    if size > MAX_SAMPLE {
        return Err(usage(format!("--subset {size} exceeds the limit of {MAX_SAMPLE}")));
    }
    let mut indices: Vec<usize> = if args.balanced {
        let mut by_class: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
        for i in 0..n {
            by_class.entry(sample.label(i)).or_default().push(i);
        }
        let classes = by_class.len();
        let per_class = size / classes;
        let mut remainder = size % classes;
        let mut chosen = Vec::with_capacity(size);
        for (label, mut members) in by_class {
            let take = per_class + usize::from(remainder > 0);
            remainder = remainder.saturating_sub(1);
            if members.len() < take {
                return Err(usage(format!(
                    "class {label} has {} members, need {take} for a balanced subset",
                    members.len()
                )));
            }
            shuffle(&mut members, seed ^ u64::from(label).wrapping_mul(0x9E3779B97F4A7C15));
            chosen.extend(members.into_iter().take(take));
        }
        chosen
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        shuffle(&mut all, seed);
        all.into_iter().take(size).collect()
    };
    indices.sort_unstable();
    Ok(indices)
}

/// Fisher-Yates with a splitmix-style keyed generator, independent of the
/// orbit draw streams.
fn shuffle(items: &mut [usize], seed: u64) {
    let mut state = seed ^ 0x5851_F42D_4C95_7F2D;
    let mut next = move || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    for i in (1..items.len()).rev() {
        let j = (next() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

fn resolve_transform(spec: &str, orbits: Option<&Path>) -> CliResult<TransformSpec> {
    let spec = spec.trim();
    let parsed = if spec == "3dview" {
        let manifest = orbits
            .ok_or_else(|| usage("the 3dview preset requires --orbits <manifest>"))?
            .to_path_buf();
        TransformSpec::PrecomputedOrbit { manifest }
    } else if let Some(preset) = TransformSpec::preset(spec) {
        preset
    } else if let Some(path) = spec.strip_prefix('@') {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Data(anyhow::Error::new(e).context(path.to_string())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("{path}: invalid transform JSON: {e}")))?
    } else if spec.starts_with('{') {
        serde_json::from_str(spec).map_err(|e| usage(format!("invalid transform JSON: {e}")))?
    } else {
        return Err(usage(format!(
            "unknown transform {spec:?}: expected a preset (base, flip, rotate, crop, cutout, colorjitter, 3dview), inline JSON, or @file.json"
        )));
    };
    parsed.validate().map_err(|e| usage(e.to_string()))?;
    Ok(parsed)
}

fn write_provenance(
    dir: &Path,
    dataset: &Path,
    seed: u64,
    indices: &[usize],
    transforms: &[(String, &TransformSpec)],
) -> CliResult<()> {
    let spec_map: serde_json::Map<String, serde_json::Value> = transforms
        .iter()
        .map(|(tag, spec)| Ok((tag.clone(), serde_json::to_value(spec)?)))
        .collect::<Result<_, serde_json::Error>>()?;
    let doc = serde_json::json!({
        "dataset": dataset.display().to_string(),
        "seed": seed,
        "n": indices.len(),
        "subset_indices": indices,
        "transforms": spec_map,
    });
    let path = dir.join("provenance.json");
    fs::write(&path, format!("{}\n", serde_json::to_string_pretty(&doc)?))
        .map_err(|e| CliError::Data(anyhow::Error::new(e).context(path.display().to_string())))?;
    Ok(())
}

fn read_provenance(dir: &Path) -> Option<serde_json::Value> {
    let text = fs::read_to_string(dir.join("provenance.json")).ok()?;
    serde_json::from_str(&text).ok()
}

fn write_output(out: Option<&Path>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            fs::write(path, content).map_err(|e| {
                CliError::Data(anyhow::Error::new(e).context(path.display().to_string()))
            })?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_distances(args: DistancesArgs) -> CliResult<()> {
    let spec = resolve_transform(&args.transform, args.orbits.as_deref())?;
    let full = load_dataset(&args.dataset.dataset)?;
    let indices = choose_subset(&full, &args.dataset, args.seed)?;
    let sample = full.subset(&indices)?;

    let d = metric::direct_orbit_distances_indexed(&sample, &spec, args.seed, Some(&indices))?;
    let rho = metric::shortest_path_metric(&d);

    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Data(anyhow::Error::new(e).context(args.out.display().to_string())))?;
    d.as_matrix().save(args.out.join("d_orbit.bin"))?;
    rho.as_matrix().save(args.out.join("rho.bin"))?;
    write_provenance(
        &args.out,
        &args.dataset.dataset,
        args.seed,
        &indices,
        &[(spec.kind_name().to_string(), &spec)],
    )?;
    eprintln!(
        "wrote {} and {} for n = {}",
        args.out.join("d_orbit.bin").display(),
        args.out.join("rho.bin").display(),
        sample.len()
    );
    Ok(())
}

fn cmd_metric(args: MetricArgs) -> CliResult<()> {
    let d = OrbitDistanceMatrix::from_matrix(DistanceMatrix::load(&args.input)?)?;
    let rho = metric::shortest_path_metric(&d);
    rho.as_matrix().save(&args.out)?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn scn_csv_header() -> &'static str {
    "epsilon,count,algorithm,seed,transform\n"
}

fn cmd_scn(args: ScnArgs) -> CliResult<()> {
    let epsilons = parse_epsilons(&args.epsilons)?;
    let algorithm = parse_algo(&args.algo)?;
    let rho = PseudometricMatrix::from_matrix(DistanceMatrix::load(&args.metric)?)?;
    let tag = args.tag.clone().unwrap_or_else(|| {
        args.metric
            .parent()
            .and_then(read_provenance)
            .and_then(|p| {
                p.get("transforms")?
                    .as_object()?
                    .keys()
                    .next()
                    .map(String::from)
            })
            .unwrap_or_else(|| "unknown".to_string())
    });
    let schedule = Schedule::default_for(rho.n(), args.faithful);
    let curve = cover::scn_curve(&rho, &epsilons, algorithm, args.seed, Some(&schedule))?;

    let mut csv = String::from(scn_csv_header());
    for r in &curve.records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            sig9(r.epsilon),
            r.count,
            r.algorithm.as_str(),
            r.seed,
            tag
        );
    }
    write_output(args.out.as_deref(), &csv)
}

fn cmd_verify_cover(args: VerifyCoverArgs) -> CliResult<()> {
    let rho = PseudometricMatrix::from_matrix(DistanceMatrix::load(&args.metric)?)?;
    let centers: Vec<usize> = args
        .centers
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("--centers must be comma-separated indices: {:?}", args.centers)))?;
    match cover::verify_cover(&rho, args.epsilon, &centers)? {
        CoverCheck::Valid(c) => {
            println!("valid,{},{}", c.center_indices.len(), sig9(args.epsilon));
            for (i, center) in c.assignment.iter().enumerate() {
                println!("assign,{i},{center}");
            }
        }
        CoverCheck::Invalid(f) => {
            println!("invalid,{},{}", f.uncovered.len(), sig9(args.epsilon));
            for u in &f.uncovered {
                println!("uncovered,{},{},{}", u.index, u.nearest_center, sig9(u.distance));
            }
        }
    }
    Ok(())
}

fn cmd_normalize(args: NormalizeArgs) -> CliResult<()> {
    let epsilons = parse_epsilons(&args.epsilons)?;
    let algorithm = parse_algo(&args.algo)?;
    let rho = PseudometricMatrix::from_matrix(DistanceMatrix::load(args.run.join("rho.bin"))?)?;
    let base = DistanceMatrix::load(args.base_run.join("rho.bin"))?;

    let provenance = read_provenance(&args.run)
        .ok_or_else(|| usage(format!("{}: missing provenance.json", args.run.display())))?;
    let indices: Vec<usize> = provenance
        .get("subset_indices")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .ok_or_else(|| usage("provenance.json lacks subset_indices"))?;
    let tag = provenance
        .get("transforms")
        .and_then(|t| t.as_object())
        .and_then(|o| o.keys().next().cloned())
        .unwrap_or_else(|| "unknown".to_string());
    let full = load_dataset(&args.dataset)?;
    let sample = full.subset(&indices)?;
    let labels = sample.labels();

    let schedule = Schedule::default_for(rho.n(), args.faithful);
    let mut csv = String::from("transform,epsilon,raw_count,normalized_count,ratio,reliable,algorithm,seed\n");
    for &epsilon in &epsilons {
        let raw = cover::estimate_scn(&rho, epsilon, algorithm, args.seed, Some(&schedule))?;
        let norm = cover::normalized_scn(
            &rho,
            &base,
            labels,
            epsilon,
            algorithm,
            args.seed,
            Some(&schedule),
        )?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            tag,
            sig9(epsilon),
            raw.count,
            norm.count,
            sig9(norm.ratio),
            norm.reliable,
            algorithm.as_str(),
            args.seed
        );
    }
    write_output(args.out.as_deref(), &csv)
}

fn parse_q(s: &str) -> CliResult<f64> {
    match s.trim() {
        "inf" | "Inf" | "INF" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|_| usage(format!("--q must be a number or inf: {other:?}"))),
    }
}

fn load_square_csv(path: &Path) -> CliResult<LinearTransform> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(anyhow::Error::new(e).context(path.display().to_string())))?;
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| usage(format!("{}: matrix CSV cell is not a number", path.display())))?;
        rows.push(row);
    }
    Ok(LinearTransform::from_rows(&rows)?)
}

fn cmd_rademacher(args: RademacherArgs) -> CliResult<()> {
    let q = parse_q(&args.q)?;
    let points = complexity::gaussian_sample(args.d, args.n, args.sigma, args.seed);
    let need_matrix = || -> CliResult<LinearTransform> {
        let path = args
            .matrix
            .as_ref()
            .ok_or_else(|| usage(format!("--mode {} requires --matrix <csv>", args.mode)))?;
        load_square_csv(path)
    };
    match args.mode.as_str() {
        "general" => {
            let est = complexity::rademacher_general(&points, args.w, q, args.draws, args.seed)?;
            println!("mode,value,std_error,draws");
            println!("general,{},{},{}", sig9(est.value), sig9(est.std_error), est.draws);
        }
        "invariant-l2" => {
            let a = need_matrix()?;
            let est =
                complexity::rademacher_invariant_l2(&points, &a, args.w, args.draws, args.seed)?;
            println!("mode,value,std_error,draws");
            println!("invariant-l2,{},{},{}", sig9(est.value), sig9(est.std_error), est.draws);
        }
        "invariant-inf" => {
            let a = need_matrix()?;
            let opts = DescentOptions {
                tol: args.tol,
                ..DescentOptions::default()
            };
            let est = complexity::rademacher_invariant_inf(
                &points, &a, args.w, q, args.draws, args.seed, opts,
            )?;
            println!("mode,value,std_error,draws");
            println!("invariant-inf,{},{},{}", sig9(est.value), sig9(est.std_error), est.draws);
        }
        "report" => {
            let report = complexity::gaussian_comparison_report(
                args.d, args.n, args.sigma, args.w, args.draws, args.seed,
            )?;
            println!("class,estimate,std_error,reference_bound");
            println!(
                "general,{},{},{}",
                sig9(report.general.value),
                sig9(report.general.std_error),
                sig9(report.general_reference)
            );
            println!(
                "reversal-invariant,{},{},{}",
                sig9(report.reversal_invariant.value),
                sig9(report.reversal_invariant.std_error),
                sig9(report.reversal_reference)
            );
            println!(
                "shift-invariant,{},{},{}",
                sig9(report.shift_invariant.value),
                sig9(report.shift_invariant.std_error),
                sig9(report.shift_reference)
            );
        }
        other => {
            return Err(usage(format!(
                "unknown mode {other:?}: expected general, invariant-l2, invariant-inf or report"
            )))
        }
    }
    Ok(())
}

fn cmd_bounds(cmd: BoundsCommand) -> CliResult<()> {
    match cmd {
        BoundsCommand::Covering { b, m, n } => {
            println!("{}", sig9(bounds::covering_complexity_bound(b, m, n)?));
        }
        BoundsCommand::Dudley {
            b,
            kappa,
            epsilon,
            m,
            n,
            alpha,
        } => {
            println!("{}", sig9(bounds::refined_dudley_bound(b, kappa, epsilon, m, n, alpha)?));
        }
        BoundsCommand::Selection {
            adv_mean,
            rademacher,
            k,
            n,
            delta,
        } => {
            println!("{}", sig9(bounds::model_selection_bound(adv_mean, rademacher, k, n, delta)?));
        }
        BoundsCommand::Adversarial { table } => {
            let table = bounds::OrbitLossTable::from_csv(&table)?;
            let adv = bounds::adversarial_loss(&table);
            println!("example,max_loss");
            for (i, v) in adv.per_example_max.iter().enumerate() {
                println!("{i},{}", sig9(*v));
            }
            println!("mean,{}", sig9(adv.mean));
        }
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> CliResult<()> {
    let epsilons = parse_epsilons(&args.epsilons)?;
    let algorithm = parse_algo(&args.algo)?;
    let presets: Vec<String> = args
        .presets
        .split(',')
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect();
    if presets.is_empty() {
        return Err(usage("--presets list is empty"));
    }
    let specs: Vec<(String, TransformSpec)> = presets
        .iter()
        .map(|p| Ok((p.clone(), resolve_transform(p, args.orbits.as_deref())?)))
        .collect::<CliResult<_>>()?;

    let full = load_dataset(&args.dataset.dataset)?;
    let indices = choose_subset(&full, &args.dataset, args.seed)?;
    let sample = full.subset(&indices)?;
    let labels = sample.labels();

    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Data(anyhow::Error::new(e).context(args.out.display().to_string())))?;

    // base Euclidean distances anchor the normalization ratio
    let base_euclid =
        metric::direct_orbit_distances_indexed(&sample, &TransformSpec::Identity, args.seed, Some(&indices))?
            .into_matrix();

    let schedule = Schedule::default_for(sample.len(), args.faithful);
    let mut csv = String::from("transform,epsilon,count,normalized_count,ratio,reliable,algorithm,seed\n");
    for (name, spec) in &specs {
        let d = metric::direct_orbit_distances_indexed(&sample, spec, args.seed, Some(&indices))?;
        let rho = metric::shortest_path_metric(&d);
        d.as_matrix().save(args.out.join(format!("{name}.d.bin")))?;
        rho.as_matrix().save(args.out.join(format!("{name}.rho.bin")))?;
        for &epsilon in &epsilons {
            let raw = cover::estimate_scn(&rho, epsilon, algorithm, args.seed, Some(&schedule))?;
            let norm = cover::normalized_scn(
                &rho,
                &base_euclid,
                labels,
                epsilon,
                algorithm,
                args.seed,
                Some(&schedule),
            )?;
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                name,
                sig9(epsilon),
                raw.count,
                norm.count,
                sig9(norm.ratio),
                norm.reliable,
                algorithm.as_str(),
                args.seed
            );
        }
        eprintln!("finished preset {name}");
    }
    let spec_refs: Vec<(String, &TransformSpec)> =
        specs.iter().map(|(n, s)| (n.clone(), s)).collect();
    write_provenance(&args.out, &args.dataset.dataset, args.seed, &indices, &spec_refs)?;
    let report_path = args.out.join("report.csv");
    fs::write(&report_path, &csv)
        .map_err(|e| CliError::Data(anyhow::Error::new(e).context(report_path.display().to_string())))?;
    eprintln!("wrote {}", report_path.display());
    Ok(())
}
