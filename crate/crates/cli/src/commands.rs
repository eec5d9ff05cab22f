//! Command implementations. Every file-producing command also writes a
//! manifest embedding the resolved configuration, so each artifact can be
//! regenerated bit-for-bit.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use movrptw::analysis;
use movrptw::gasolve::{self, GoalSpec, Method};
use movrptw::goalprog::derive_weight_vector;
use movrptw::instance::{generate_instance, read_instance, write_instance, GeneratorSpec, TwProfile};
use movrptw::pilot::{
    read_approximation_set, run_pilot, select_targets, write_approximation_set, ApproximationSet,
};
use movrptw::{Instance, ObjectiveVector};

use crate::config::ToolConfig;
use crate::CliError;

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut body = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Run(format!("serialize {}: {e}", path.display())))?;
    body.push('\n');
    std::fs::write(path, body)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Customer count (grid: 50, 150, 250).
    #[arg(long)]
    n: usize,
    /// Time-window profile: tw0..tw4.
    #[arg(long)]
    tw: String,
    /// Capacity slack percentage (grid: 60, 20, 5).
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Allow values outside the benchmark grid.
    #[arg(long)]
    custom: bool,
    #[arg(long)]
    out: PathBuf,
}

pub fn generate(args: GenerateArgs, _config: &ToolConfig) -> Result<(), CliError> {
    let tw: TwProfile = args.tw.parse().map_err(CliError::from)?;
    let mut spec = GeneratorSpec::new(args.n, tw, args.delta, args.seed);
    if args.custom {
        spec = spec.custom();
    }
    let instance = generate_instance(&spec)?;
    write_instance(&instance, &args.out)?;
    println!(
        "wrote {}: n = {}, tw = {}, capacity = {}",
        args.out.display(),
        instance.n,
        tw,
        instance.capacity
    );
    Ok(())
}

#[derive(Args)]
pub struct PilotArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Budget preset: desk or paper (overrides the config file).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct PilotOutputManifest<'a> {
    command: &'a str,
    instance: String,
    pilot: &'a movrptw::pilot::PilotManifest,
    config: &'a ToolConfig,
}

pub fn pilot(args: PilotArgs, config: &ToolConfig) -> Result<(), CliError> {
    let mut config = config.clone();
    if let Some(preset) = args.preset {
        config.pilot.preset = preset;
    }
    let budget = config.pilot_budget()?;
    let instance = read_instance(&args.instance)?;
    let engine_config = config.moea_config();
    let (set, manifest) = run_pilot(&instance, &budget, &engine_config, args.seed)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", args.out_dir.display())))?;
    write_approximation_set(&set, &args.out_dir)?;
    write_json(
        &args.out_dir.join("manifest.json"),
        &PilotOutputManifest {
            command: "pilot",
            instance: args.instance.display().to_string(),
            pilot: &manifest,
            config: &config,
        },
    )?;
    println!(
        "pilot finished: {} non-dominated entries from {} jobs -> {}",
        set.len(),
        manifest.jobs.len(),
        args.out_dir.display()
    );
    Ok(())
}

#[derive(Args)]
pub struct SelectTargetArgs {
    /// Archive directory or its archive.csv.
    #[arg(long)]
    archive: PathBuf,
    /// Pick one entry by index.
    #[arg(long, conflicts_with_all = ["random", "seed"])]
    index: Option<usize>,
    /// Sample this many distinct targets uniformly.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scalarizer recorded in the goal files: CV, WV or ED.
    #[arg(long, default_value = "CV")]
    method: String,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct SelectManifest<'a> {
    command: &'a str,
    archive: String,
    selection: String,
    method: String,
    targets: Vec<String>,
    config: &'a ToolConfig,
}

fn print_archive_table(set: &ApproximationSet) -> Result<(), CliError> {
    let objectives = set.objectives();
    let (ranges, normalized) = analysis::objective_ranges(&objectives)?;
    println!("index    Z1        Z2        Z3        Z4        Z5      normalized");
    for (i, (z, norm)) in objectives.iter().zip(&normalized).enumerate() {
        println!(
            "{:>5} {:>5} {:>9.2} {:>9.2} {:>9.2} {:>9.2}   [{:.2} {:.2} {:.2} {:.2} {:.2}]",
            i, z.0[0], z.0[1], z.0[2], z.0[3], z.0[4], norm[0], norm[1], norm[2], norm[3], norm[4]
        );
    }
    println!(
        "ranges: Z1 [{}, {}], Z2 [{:.2}, {:.2}], Z3 [{:.2}, {:.2}], Z4 [{:.2}, {:.2}], Z5 [{:.2}, {:.2}]",
        ranges.min[0], ranges.max[0], ranges.min[1], ranges.max[1], ranges.min[2], ranges.max[2],
        ranges.min[3], ranges.max[3], ranges.min[4], ranges.max[4]
    );
    Ok(())
}

pub fn select_target(args: SelectTargetArgs, config: &ToolConfig) -> Result<(), CliError> {
    let method: Method = args.method.parse().map_err(CliError::from)?;
    let set = read_approximation_set(&args.archive)?;
    print_archive_table(&set)?;
    let (targets, selection) = match (args.index, args.random) {
        (Some(idx), None) => {
            if idx >= set.len() {
                return Err(CliError::Usage(format!(
                    "--index {idx} out of range: archive has {} entries",
                    set.len()
                )));
            }
            let t = movrptw::goalprog::TargetVector::from_objectives(&set.entries[idx].objectives);
            (vec![t], format!("index {idx}"))
        }
        (None, Some(k)) => (
            select_targets(&set, k, args.seed)?,
            format!("random {k} (seed {})", args.seed),
        ),
        _ => {
            return Err(CliError::Usage(
                "choose exactly one of --index or --random".into(),
            ))
        }
    };
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let mut files = Vec::new();
    for (i, target) in targets.iter().enumerate() {
        let mut goal = GoalSpec::new(*target, method);
        if method == Method::Ed {
            goal.epsilon = config.epsilon;
        }
        let path = args.out_dir.join(format!("target_{i:02}.json"));
        goal.write(&path)?;
        files.push(path.display().to_string());
    }
    write_json(
        &args.out_dir.join("manifest.json"),
        &SelectManifest {
            command: "select-target",
            archive: args.archive.display().to_string(),
            selection,
            method: method.to_string(),
            targets: files.clone(),
            config,
        },
    )?;
    println!("wrote {} goal file(s) to {}", files.len(), args.out_dir.display());
    Ok(())
}

#[derive(Args)]
pub struct DeriveWeightsArgs {
    #[arg(long)]
    archive: PathBuf,
    /// WV goal file; updated in place with the derived weights.
    #[arg(long)]
    goal: PathBuf,
    /// Effectiveness report path (default: <goal>_weights_report.json).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize)]
struct WeightsReport<'a> {
    goal: String,
    archive: String,
    k: usize,
    satisfied_count: usize,
    effectiveness: f64,
    weights: [f64; 5],
    satisfied: &'a [bool],
    solver: movrptw::goalprog::WeightSolverConfig,
    config: &'a ToolConfig,
}

pub fn derive_weights(args: DeriveWeightsArgs, config: &ToolConfig) -> Result<(), CliError> {
    let mut goal = GoalSpec::read(&args.goal)?;
    if goal.method != Method::Wv {
        return Err(CliError::Usage(format!(
            "goal {} has method {}, weight derivation needs WV",
            args.goal.display(),
            goal.method
        )));
    }
    let set = read_approximation_set(&args.archive)?;
    let solver = config.weight_solver_config();
    let derivation = derive_weight_vector(&set.objectives(), &goal.target, &solver)?;
    goal.weights = Some(derivation.weights);
    goal.write(&args.goal)?;
    let report_path = args.report.unwrap_or_else(|| {
        let stem = file_stem(&args.goal);
        args.goal
            .with_file_name(format!("{stem}_weights_report.json"))
    });
    write_json(
        &report_path,
        &WeightsReport {
            goal: args.goal.display().to_string(),
            archive: args.archive.display().to_string(),
            k: set.len(),
            satisfied_count: derivation.satisfied_count,
            effectiveness: derivation.effectiveness,
            weights: derivation.weights.0,
            satisfied: &derivation.satisfied,
            solver,
            config,
        },
    )?;
    println!(
        "weights {:?} satisfy {}/{} inequalities (effectiveness {:.4}); goal updated, report at {}",
        derivation.weights.0,
        derivation.satisfied_count,
        set.len(),
        derivation.effectiveness,
        report_path.display()
    );
    Ok(())
}

#[derive(Args)]
pub struct SolveArgs {
    /// Instance file; repeat for several.
    #[arg(long = "instance", required = true)]
    instances: Vec<PathBuf>,
    /// Goal file; repeat for several.
    #[arg(long = "goal", required = true)]
    goals: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Override the method recorded in every goal file (CV, WV or ED).
    #[arg(long)]
    method: Option<String>,
    /// Override the GA population from the config.
    #[arg(long)]
    population: Option<usize>,
    /// Override the GA evaluation budget from the config.
    #[arg(long)]
    budget: Option<u64>,
    /// Override the GA master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct SolveManifest<'a> {
    command: &'a str,
    instances: Vec<String>,
    goals: Vec<String>,
    reps: usize,
    method_override: Option<String>,
    ga: &'a movrptw::moea::EvolutionConfig,
    failures: usize,
    config: &'a ToolConfig,
}

pub fn solve(args: SolveArgs, config: &ToolConfig) -> Result<(), CliError> {
    let method_override: Option<Method> = match &args.method {
        Some(m) => Some(m.parse().map_err(CliError::from)?),
        None => None,
    };
    let mut instances: Vec<(String, Instance)> = Vec::new();
    for path in &args.instances {
        instances.push((file_stem(path), read_instance(path)?));
    }
    let mut goals: Vec<(String, GoalSpec)> = Vec::new();
    for path in &args.goals {
        let mut goal = GoalSpec::read(path)?;
        if let Some(m) = method_override {
            goal.method = m;
        }
        if goal.method == Method::Ed && goal.epsilon.is_none() {
            goal.epsilon = config.epsilon;
        }
        goal.ed_normalize = config.ed_normalize;
        goal.validate()?;
        goals.push((file_stem(path), goal));
    }
    let mut ga = config.ga_config();
    if let Some(p) = args.population {
        ga.population = p;
    }
    if let Some(b) = args.budget {
        ga.budget = b;
    }
    if let Some(s) = args.seed {
        ga.seed = s;
    }
    ga.validate()?;
    let table = gasolve::batch_solve(&instances, &goals, &ga, args.reps)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", args.out_dir.display())))?;
    gasolve::write_run_table(&table, &args.out_dir)?;
    write_json(
        &args.out_dir.join("manifest.json"),
        &SolveManifest {
            command: "solve",
            instances: args.instances.iter().map(|p| p.display().to_string()).collect(),
            goals: args.goals.iter().map(|p| p.display().to_string()).collect(),
            reps: args.reps,
            method_override: method_override.map(|m| m.to_string()),
            ga: &ga,
            failures: table.failures.len(),
            config,
        },
    )?;
    println!(
        "solved {} runs ({} failures) -> {}",
        table.rows.len(),
        table.failures.len(),
        args.out_dir.display()
    );
    if !table.failures.is_empty() {
        for f in &table.failures {
            eprintln!(
                "run failed: instance {} goal {} method {} rep {}: {}",
                f.instance_id, f.target_id, f.method, f.rep, f.error
            );
        }
        return Err(CliError::Run(format!(
            "{} of {} runs failed",
            table.failures.len(),
            table.failures.len() + table.rows.len()
        )));
    }
    Ok(())
}

#[derive(Args)]
pub struct ReportArgs {
    /// run_table.csv produced by solve.
    #[arg(long)]
    runs: PathBuf,
    #[arg(long)]
    goal: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct GroupReport {
    instance_id: String,
    method: String,
    #[serde(flatten)]
    metrics: analysis::MethodReport,
}

#[derive(Serialize)]
struct MetricDefinitions {
    achievement: &'static str,
    gap: &'static str,
    overall: &'static str,
}

const METRIC_DEFINITIONS: MetricDefinitions = MetricDefinitions {
    achievement: "fraction of runs with Z_i <= target_i, per objective",
    gap: "mean of (Z_i - target_i) / max(target_i, 1) over runs that missed target_i; 0 if none missed",
    overall: "mean of (target_i - Z_i) / max(target_i, 1) over all runs; positive = better than target",
};

#[derive(Serialize)]
struct ReportDocument<'a> {
    command: &'a str,
    runs: String,
    goal: String,
    target: [f64; 5],
    definitions: MetricDefinitions,
    groups: Vec<GroupReport>,
    config: &'a ToolConfig,
}

pub fn report(args: ReportArgs, config: &ToolConfig) -> Result<(), CliError> {
    let goal = GoalSpec::read(&args.goal)?;
    let rows = gasolve::read_run_table(&args.runs)?;
    if rows.is_empty() {
        return Err(CliError::Run(format!(
            "run table {} is empty",
            args.runs.display()
        )));
    }
    // a table may hold several goals; keep the rows solved for this one
    let goal_id = file_stem(&args.goal);
    let matching: Vec<_> = rows.iter().filter(|r| r.target_id == goal_id).collect();
    let selected: Vec<_> = if matching.is_empty() {
        rows.iter().collect()
    } else {
        matching
    };
    let mut keys: Vec<(String, Method)> = selected
        .iter()
        .map(|r| (r.instance_id.clone(), r.method))
        .collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.to_string().cmp(&b.1.to_string())));
    keys.dedup();
    let mut groups = Vec::new();
    for (instance_id, method) in keys {
        let zs: Vec<ObjectiveVector> = selected
            .iter()
            .filter(|r| r.instance_id == instance_id && r.method == method)
            .map(|r| r.objectives)
            .collect();
        let metrics = analysis::method_report(&zs, &goal.target)?;
        groups.push(GroupReport {
            instance_id,
            method: method.to_string(),
            metrics,
        });
    }
    write_json(
        &args.out,
        &ReportDocument {
            command: "report",
            runs: args.runs.display().to_string(),
            goal: args.goal.display().to_string(),
            target: goal.target.0,
            definitions: METRIC_DEFINITIONS,
            groups,
            config,
        },
    )?;
    println!("report written to {}", args.out.display());
    Ok(())
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Archive directory or its archive.csv.
    #[arg(long)]
    archive: PathBuf,
    /// Scatter layout: wide (one file) or pairs (ten files).
    #[arg(long)]
    scatter: Option<String>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct AnalyzeManifest<'a> {
    command: &'a str,
    archive: String,
    entries: usize,
    ranges: analysis::ObjectiveRanges,
    scatter_files: Vec<String>,
    config: &'a ToolConfig,
}

pub fn analyze(args: AnalyzeArgs, config: &ToolConfig) -> Result<(), CliError> {
    let mut config = config.clone();
    if args.scatter.is_some() {
        config.scatter = args.scatter.clone();
    }
    let mode = config.scatter_mode()?;
    let set = read_approximation_set(&args.archive)?;
    let objectives = set.objectives();
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let matrix = analysis::pairwise_correlation_matrix(&objectives)?;
    let tau_path = args.out_dir.join("tau_matrix.csv");
    let mut writer = csv_writer(&tau_path)?;
    writer
        .write_record(["", "Z1", "Z2", "Z3", "Z4", "Z5"])
        .map_err(|e| CliError::Io(format!("write {}: {e}", tau_path.display())))?;
    for (i, row) in matrix.iter().enumerate() {
        let mut record = vec![format!("Z{}", i + 1)];
        record.extend(row.iter().map(|v| format!("{v}")));
        writer
            .write_record(&record)
            .map_err(|e| CliError::Io(format!("write {}: {e}", tau_path.display())))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::Io(format!("write {}: {e}", tau_path.display())))?;
    let (ranges, _) = analysis::objective_ranges(&objectives)?;
    let scatter_files = analysis::export_scatter(&objectives, &args.out_dir, mode)?;
    write_json(
        &args.out_dir.join("manifest.json"),
        &AnalyzeManifest {
            command: "analyze",
            archive: args.archive.display().to_string(),
            entries: set.len(),
            ranges,
            scatter_files: scatter_files
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            config: &config,
        },
    )?;
    println!("tau matrix:");
    for (i, row) in matrix.iter().enumerate() {
        println!(
            "  Z{}: [{:+.3} {:+.3} {:+.3} {:+.3} {:+.3}]",
            i + 1,
            row[0],
            row[1],
            row[2],
            row[3],
            row[4]
        );
    }
    println!(
        "analysis for {} entries -> {}",
        set.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
