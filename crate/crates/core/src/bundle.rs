//! Result bundles: every command writes its tables, figures and a manifest
//! into one output directory. The manifest holds the resolved
//! configuration and every trial seed, which is enough to rerun the
//! command and regenerate the bundle.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig, TimingMode};
use crate::environment::{ArrangementKind, Environment};
use crate::experiments::{
    compare, run_trial, saturate, sweep, ExperimentError, SweepParameter, Summary, TrialOutcome, TrialRecord,
    TrialSpec, TrialStatus,
};
use crate::export::{moves, moves_to_json, moves_to_text, ToolpathDocument};
use crate::metrics::{LegMetrics, MetricMeans};
use crate::pgf::{leg_config, PgfOutcome, StructureSpec, HEXAGON_DEFAULT, OPEN_DEFAULT};
use crate::planners::PlannerKind;
use crate::seed::RNG_ALGORITHM;
use crate::svg::{grouped_bars, toolpath_svg, LineChart, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PLANNING: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("environment: {0}")]
    Environment(String),
    #[error("manifest {path}: {message}")]
    Manifest { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl BundleError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BundleError::Io { .. } => EXIT_IO,
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Plan,
    Sweep,
    Saturate,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Plan => "plan",
            Command::Sweep => "sweep",
            Command::Saturate => "saturate",
            Command::Compare => "compare",
        }
    }
}

/// Seeds of one trial. `arrangement_seed` is present for random fields only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub group: usize,
    pub trial: usize,
    pub planner: PlannerKind,
    pub trial_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrangement_seed: Option<u64>,
    pub planner_seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub leg_seeds: Vec<u64>,
}

impl SeedEntry {
    fn new(group: usize, trial: usize, spec: &TrialSpec, with_legs: bool) -> Self {
        let arrangement_seed = spec.environment_seed();
        let planner = spec.planner_config();
        SeedEntry {
            group,
            trial,
            planner: planner.kind,
            trial_seed: spec.trial_seed,
            arrangement_seed,
            planner_seed: planner.seed,
            leg_seeds: if with_legs {
                (0..spec.structure.leg_count()).map(|k| leg_config(&planner, k).seed).collect()
            } else {
                Vec::new()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub rng: String,
    pub command: Command,
    pub config: RunConfig,
    pub config_digest: String,
    pub files: Vec<String>,
    pub seeds: Vec<SeedEntry>,
}

impl Manifest {
    pub fn load(path: &FsPath) -> Result<Self, BundleError> {
        let text = fs::read_to_string(path).map_err(|source| BundleError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let bad = |message: String| BundleError::Manifest {
            path: path.display().to_string(),
            message,
        };
        let m: Manifest = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if m.config_digest != config_digest(&m.config) {
            return Err(bad("config digest does not match the recorded configuration".into()));
        }
        Ok(m)
    }
}

/// SHA-256 of the compact JSON form of the resolved configuration.
pub fn config_digest(cfg: &RunConfig) -> String {
    let json = serde_json::to_string(cfg).expect("configs always serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("bundle documents always serialize");
    s.push('\n');
    s
}

/// The files of a bundle, in memory, in write order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bundle {
    pub files: Vec<(String, String)>,
    /// Set by `plan` when some leg could not be planned.
    pub planning_failed: bool,
}

impl Bundle {
    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn write(&self, dir: &FsPath) -> Result<Vec<PathBuf>, BundleError> {
        let io = |path: &FsPath| {
            let path = path.display().to_string();
            move |source| BundleError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let p = dir.join(name);
            fs::write(&p, contents).map_err(io(&p))?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Runs `command` and assembles its bundle without touching the disk.
pub fn build(command: Command, cfg: &RunConfig) -> Result<Bundle, BundleError> {
    cfg.validate()?;
    let digest = config_digest(cfg);
    let (mut bundle, seeds) = match command {
        Command::Plan => plan_bundle(cfg, &digest)?,
        Command::Sweep => sweep_bundle(cfg)?,
        Command::Saturate => saturate_bundle(cfg)?,
        Command::Compare => compare_bundle(cfg)?,
    };
    let mut files: Vec<String> = bundle.files.iter().map(|(n, _)| n.clone()).collect();
    files.push(MANIFEST.to_string());
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng: RNG_ALGORITHM.to_string(),
        command,
        config: cfg.clone(),
        config_digest: digest,
        files,
        seeds,
    };
    bundle.add(MANIFEST, to_json(&manifest));
    Ok(bundle)
}

/// Runs `command` and writes the bundle into `dir`.
pub fn run(command: Command, cfg: &RunConfig, dir: &FsPath) -> Result<Bundle, BundleError> {
    let bundle = build(command, cfg)?;
    bundle.write(dir)?;
    Ok(bundle)
}

/// Reruns the command recorded in a manifest, writing into `dir`.
pub fn replay(manifest: &FsPath, dir: &FsPath) -> Result<Bundle, BundleError> {
    let m = Manifest::load(manifest)?;
    run(m.command, &m.config, dir)
}

pub fn structure_label(s: &StructureSpec) -> String {
    if *s == StructureSpec::open_default() {
        OPEN_DEFAULT.into()
    } else if *s == StructureSpec::hexagon_default() {
        HEXAGON_DEFAULT.into()
    } else if s.is_closed() {
        "custom-closed".into()
    } else {
        "custom-open".into()
    }
}

fn arrangement_label(t: &TrialSpec) -> (String, usize) {
    match &t.arrangement {
        None => ("none".into(), 0),
        Some(a) => (a.kind.to_string(), a.count),
    }
}

/// Shortest decimal that reads back to the same `f64`.
fn cell(v: f64) -> String {
    format!("{v}")
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(cell).unwrap_or_default()
}

fn timed(v: Option<f64>, timing: TimingMode) -> String {
    match timing {
        TimingMode::Wall => opt_cell(v),
        TimingMode::Omit => String::new(),
    }
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Table { writer }
    }

    fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(cells).expect("in-memory write");
    }

    fn finish(self) -> String {
        String::from_utf8(self.writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }
}

const METRIC_COLUMNS: [&str; 7] = [
    "roughness_deg",
    "num_turns",
    "offset_mm",
    "rmse_mm",
    "path_deviation",
    "mean_run_time_s",
    "total_run_time_s",
];

fn metric_cells(means: Option<MetricMeans>, total: Option<f64>, timing: TimingMode) -> Vec<String> {
    vec![
        opt_cell(means.map(|m| m.roughness_deg)),
        opt_cell(means.map(|m| m.num_turns)),
        opt_cell(means.map(|m| m.offset_mm)),
        opt_cell(means.map(|m| m.rmse_mm)),
        opt_cell(means.map(|m| m.path_deviation)),
        timed(means.map(|m| m.run_time_s), timing),
        timed(total, timing),
    ]
}

fn summary_cells(s: &Summary, timing: TimingMode) -> Vec<String> {
    let mut v = vec![s.trials.to_string(), s.successes.to_string(), cell(s.success_rate)];
    v.extend(metric_cells(s.means, s.mean_total_run_time_s, timing));
    v
}

/// Per-trial ledger. `values[group]` labels each trial's group.
fn ledger_csv(records: &[TrialRecord], values: &[f64], timing: TimingMode) -> String {
    let mut header = vec![
        "group", "value", "trial", "seed", "planner", "status", "failed_pair", "reason",
    ];
    header.extend(METRIC_COLUMNS);
    let mut t = Table::new(&header);
    for r in records {
        let (status, pair, reason) = match &r.status {
            TrialStatus::Success => ("success", String::new(), String::new()),
            TrialStatus::Failed { failed_pair, reason } => {
                ("failed", failed_pair.to_string(), reason.name().to_string())
            }
            TrialStatus::Error { message } => ("error", String::new(), message.clone()),
        };
        let mut row = vec![
            r.group.to_string(),
            opt_cell(values.get(r.group).copied()),
            r.trial.to_string(),
            r.seed.to_string(),
            r.planner.name().to_string(),
            status.to_string(),
            pair,
            reason,
        ];
        row.extend(metric_cells(
            r.report.as_ref().map(|rep| rep.mean),
            r.report.as_ref().map(|rep| rep.total_run_time_s),
            timing,
        ));
        t.row(row);
    }
    t.finish()
}

fn batch_seeds(records: &[TrialRecord], spec_of: impl Fn(&TrialRecord) -> TrialSpec) -> Vec<SeedEntry> {
    records
        .iter()
        .map(|r| SeedEntry::new(r.group, r.trial, &spec_of(r), false))
        .collect()
}

fn plan_bundle(cfg: &RunConfig, digest: &str) -> Result<(Bundle, Vec<SeedEntry>), BundleError> {
    let spec = cfg.plan_trial();
    let run = run_trial(&spec);
    let env = match (&run.environment, &run.outcome) {
        (Some(env), _) => env.clone(),
        (None, TrialOutcome::Error(msg)) => return Err(BundleError::Environment(msg.clone())),
        (None, _) => unreachable!("trials without an environment always carry an error"),
    };
    let outcome = match run.outcome {
        TrialOutcome::Complete { toolpath, .. } => PgfOutcome::Complete(toolpath),
        TrialOutcome::PlanningFailed {
            completed,
            failed_pair,
            reason,
        } => PgfOutcome::PartialFailure {
            completed,
            failed_pair,
            reason,
        },
        TrialOutcome::Error(msg) => return Err(BundleError::Environment(msg)),
    };
    let mut b = plan_files(cfg, &spec, &env, &outcome, digest)?;
    b.planning_failed = outcome.toolpath().is_none();
    Ok((b, vec![SeedEntry::new(0, 0, &spec, true)]))
}

fn plan_files(
    cfg: &RunConfig,
    spec: &TrialSpec,
    env: &Environment,
    outcome: &PgfOutcome,
    digest: &str,
) -> Result<Bundle, BundleError> {
    let mut b = Bundle::default();
    let doc = ToolpathDocument::from_outcome(outcome, &spec.structure, spec.planner.kind, digest, cfg.timing);
    b.add("toolpath.json", doc.to_json());

    let mut header = vec!["leg", "from", "to"];
    header.extend(["roughness_deg", "num_turns", "offset_mm", "rmse_mm", "path_deviation", "run_time_s"]);
    let mut t = Table::new(&header);
    let mut per_leg = Vec::new();
    for leg in outcome.legs() {
        let m = LegMetrics::compute(&leg.path.waypoints, leg.path.elapsed, &spec.metrics)
            .map_err(|e| BundleError::Environment(format!("metrics for leg {}: {e}", leg.pair)))?;
        per_leg.push(MetricMeans::from(&m));
        let n = spec.structure.vertices().len();
        t.row([
            leg.pair.to_string(),
            format!("V{}", leg.pair + 1),
            format!("V{}", (leg.pair + 1) % n + 1),
            cell(m.roughness_deg),
            m.num_turns.to_string(),
            cell(m.offset_mm),
            cell(m.rmse_mm),
            cell(m.path_deviation),
            timed(Some(m.run_time_s), cfg.timing),
        ]);
    }
    if let Some(mean) = MetricMeans::mean_of(&per_leg) {
        t.row([
            "mean".to_string(),
            String::new(),
            String::new(),
            cell(mean.roughness_deg),
            cell(mean.num_turns),
            cell(mean.offset_mm),
            cell(mean.rmse_mm),
            cell(mean.path_deviation),
            timed(Some(mean.run_time_s), cfg.timing),
        ]);
    }
    b.add("metrics.csv", t.finish());

    let mut obstacles = Table::new(&["x", "y"]);
    for o in env.obstacles() {
        obstacles.row([cell(o.x), cell(o.y)]);
    }
    b.add("obstacles.csv", obstacles.finish());

    let (arr, count) = arrangement_label(spec);
    let title = format!(
        "{} | {} | {arr}:{count} | seed {}",
        structure_label(&spec.structure),
        spec.planner.kind,
        spec.trial_seed
    );
    let failed = match outcome {
        PgfOutcome::PartialFailure { failed_pair, .. } => Some(*failed_pair),
        PgfOutcome::Complete(_) => None,
    };
    b.add("toolpath.svg", toolpath_svg(env, &spec.structure, outcome.legs(), failed, &title));
    if let Some(tp) = outcome.toolpath() {
        let m = moves(tp);
        b.add("moves.txt", moves_to_text(&m));
        b.add("moves.json", moves_to_json(&m));
    }
    Ok(b)
}

fn sweep_bundle(cfg: &RunConfig) -> Result<(Bundle, Vec<SeedEntry>), BundleError> {
    let spec = cfg.sweep_spec();
    let r = sweep(&spec)?;
    let timing = cfg.timing;
    let (arr, count) = arrangement_label(&spec.trial(0, 0)?);
    let structure = structure_label(&spec.base.structure);
    let mut header = vec![
        "parameter", "value", "planner", "structure", "arrangement", "density", "trials", "successes",
        "success_rate",
    ];
    header.extend(METRIC_COLUMNS);
    let mut t = Table::new(&header);
    for p in &r.points {
        let density = if r.parameter == SweepParameter::NumObstacles {
            p.value as usize
        } else {
            count
        };
        let mut row = vec![
            r.parameter.name().to_string(),
            cell(p.value),
            r.planner.name().to_string(),
            structure.clone(),
            arr.clone(),
            density.to_string(),
        ];
        row.extend(summary_cells(&p.summary, timing));
        t.row(row);
    }
    let mut b = Bundle::default();
    b.add("sweep.csv", t.finish());
    b.add("ledger.csv", ledger_csv(&r.ledger, &spec.values, timing));

    let log_x = r.parameter == SweepParameter::NumObstacles;
    let chart = |title: &str, y_label: &str, y_range| LineChart {
        title: title.to_string(),
        x_label: r.parameter.name().to_string(),
        y_label: y_label.to_string(),
        log_x,
        y_range,
    };
    let rate = Series {
        name: r.planner.name().to_string(),
        points: r.points.iter().map(|p| (p.value, Some(p.summary.success_rate))).collect(),
    };
    b.add(
        "success_rate.svg",
        chart(&format!("{structure}: success rate vs {}", r.parameter), "success rate", Some((0.0, 1.0)))
            .render(&[rate]),
    );
    if timing == TimingMode::Wall {
        let time = Series {
            name: r.planner.name().to_string(),
            points: r.points.iter().map(|p| (p.value, p.summary.mean_total_run_time_s)).collect(),
        };
        b.add(
            "run_time.svg",
            chart(&format!("{structure}: run time vs {}", r.parameter), "mean run time (s)", None).render(&[time]),
        );
    }
    let seeds = batch_seeds(&r.ledger, |rec| spec.trial(rec.group, rec.trial).expect("validated sweep"));
    Ok((b, seeds))
}

#[derive(Serialize)]
struct SaturationSummary<'a> {
    structure: String,
    arrangement: ArrangementKind,
    densities: &'a [usize],
    planners: &'a [PlannerKind],
    saturation_density: Option<usize>,
}

fn saturate_bundle(cfg: &RunConfig) -> Result<(Bundle, Vec<SeedEntry>), BundleError> {
    let spec = cfg.saturation_spec();
    let r = saturate(&spec)?;
    let timing = cfg.timing;
    let structure = structure_label(&spec.base.structure);
    let mut header = vec!["density", "planner", "structure", "arrangement", "trials", "successes", "success_rate"];
    header.extend(METRIC_COLUMNS);
    let mut t = Table::new(&header);
    for (d, row) in r.densities.iter().zip(&r.cells) {
        for (p, s) in r.planners.iter().zip(row) {
            let mut cells = vec![
                d.to_string(),
                p.name().to_string(),
                structure.clone(),
                spec.kind.to_string(),
            ];
            cells.extend(summary_cells(s, timing));
            t.row(cells);
        }
    }
    let mut b = Bundle::default();
    b.add("saturation.csv", t.finish());
    b.add(
        "saturation.json",
        to_json(&SaturationSummary {
            structure: structure.clone(),
            arrangement: spec.kind,
            densities: &r.densities,
            planners: &r.planners,
            saturation_density: r.saturation_density,
        }),
    );
    let values: Vec<f64> = spec.ladder.iter().map(|&d| d as f64).collect();
    b.add("ledger.csv", ledger_csv(&r.ledger, &values, timing));
    let series: Vec<Series> = r
        .planners
        .iter()
        .enumerate()
        .map(|(i, p)| Series {
            name: p.name().to_string(),
            points: r
                .densities
                .iter()
                .zip(&r.cells)
                .map(|(&d, row)| (d as f64, Some(row[i].success_rate)))
                .collect(),
        })
        .collect();
    let chart = LineChart {
        title: format!("{structure}, {}: success rate vs obstacles", spec.kind),
        x_label: "number of obstacles".into(),
        y_label: "success rate".into(),
        log_x: true,
        y_range: Some((0.0, 1.0)),
    };
    b.add("success_rate.svg", chart.render(&series));
    let planners = spec.planners.clone();
    let seeds = batch_seeds(&r.ledger, |rec| {
        let p = planners.iter().find(|p| p.kind == rec.planner).expect("ledger planner is configured");
        spec.trial(rec.group, rec.trial, p)
    });
    Ok((b, seeds))
}

fn compare_bundle(cfg: &RunConfig) -> Result<(Bundle, Vec<SeedEntry>), BundleError> {
    let spec = cfg.comparison_spec();
    let table = compare(&spec)?;
    let timing = cfg.timing;
    let (arr, count) = arrangement_label(&spec.base);
    let structure = structure_label(&spec.base.structure);
    let mut header = vec!["planner", "structure", "arrangement", "density", "trials", "success_rate"];
    header.extend(METRIC_COLUMNS);
    let mut t = Table::new(&header);
    for row in &table.rows {
        let s = &row.summary;
        let mut cells = vec![
            row.planner.name().to_string(),
            structure.clone(),
            arr.clone(),
            count.to_string(),
            s.trials.to_string(),
            cell(s.success_rate),
        ];
        cells.extend(metric_cells(s.means, s.mean_total_run_time_s, timing));
        t.row(cells);
    }
    let mut b = Bundle::default();
    b.add("comparison.csv", t.finish());
    b.add("ledger.csv", ledger_csv(&table.ledger, &[count as f64], timing));

    let mut names = vec!["success rate", "roughness (deg)", "turns", "offset (mm)", "RMSE (mm)", "path deviation"];
    if timing == TimingMode::Wall {
        names.push("run time (s)");
    }
    let values: Vec<Vec<Option<f64>>> = (0..names.len())
        .map(|m| {
            table
                .rows
                .iter()
                .map(|row| {
                    let s = &row.summary;
                    match m {
                        0 => Some(s.success_rate),
                        1 => s.means.map(|x| x.roughness_deg),
                        2 => s.means.map(|x| x.num_turns),
                        3 => s.means.map(|x| x.offset_mm),
                        4 => s.means.map(|x| x.rmse_mm),
                        5 => s.means.map(|x| x.path_deviation),
                        _ => s.means.map(|x| x.run_time_s),
                    }
                })
                .collect()
        })
        .collect();
    let members: Vec<String> = table.rows.iter().map(|r| r.planner.name().to_string()).collect();
    let metric_names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    b.add(
        "metrics.svg",
        grouped_bars(
            &format!("{structure}, {arr}:{count}: planner comparison"),
            &metric_names,
            &members,
            &values,
        ),
    );
    let planners = spec.planners.clone();
    let seeds = batch_seeds(&table.ledger, |rec| {
        let p = planners.iter().find(|p| p.kind == rec.planner).expect("ledger planner is configured");
        spec.trial(rec.trial, p)
    });
    Ok((b, seeds))
}
