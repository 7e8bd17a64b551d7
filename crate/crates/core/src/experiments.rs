//! Seeded experiment protocols: single trials, parameter sweeps, density
//! saturation and planner comparison.
//!
//! Every trial is a pure function of its [`TrialSpec`]; batch trial seeds
//! are derived from the batch seed and the trial's position, and recorded
//! in the ledger, so any point of any curve can be replayed on its own.
//! Trials run in parallel, but results are always collected in trial order.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{ArrangementKind, ArrangementSpec, Environment, Workspace, DEFAULT_MARGIN};
use crate::metrics::{assess, MetricMeans, MetricOptions, MetricsReport};
use crate::pgf::{generate_toolpath, Leg, PgfOutcome, StructureSpec, Toolpath};
use crate::planners::{FailureReason, PlannerConfig, PlannerKind};
use crate::seed::{derive_seed, derive_seed_path, ARRANGEMENT_STREAM, PLANNER_STREAM};

pub const DEFAULT_TRIALS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("ladder exhausted: success rate never dropped to 50% or below")]
    LadderExhausted,
}

fn config_err(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

/// Everything needed to replay one toolpath run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    pub workspace: Workspace,
    pub clearance: f64,
    pub structure: StructureSpec,
    /// `None` plans in an obstacle-free workspace.
    pub arrangement: Option<ArrangementSpec>,
    pub planner: PlannerConfig,
    pub metrics: MetricOptions,
    pub trial_seed: u64,
}

impl TrialSpec {
    pub fn new(structure: StructureSpec, arrangement: Option<ArrangementSpec>, planner: PlannerConfig) -> Self {
        TrialSpec {
            workspace: Workspace::default(),
            clearance: crate::environment::DEFAULT_CLEARANCE,
            structure,
            arrangement,
            planner,
            metrics: MetricOptions::default(),
            trial_seed: 0,
        }
    }

    pub fn with_seed(&self, trial_seed: u64) -> TrialSpec {
        TrialSpec {
            trial_seed,
            ..self.clone()
        }
    }

    pub fn with_planner(&self, planner: PlannerConfig) -> TrialSpec {
        TrialSpec {
            planner,
            ..self.clone()
        }
    }

    pub fn with_count(&self, kind: ArrangementKind, count: usize) -> TrialSpec {
        let margin = self.arrangement.map_or(DEFAULT_MARGIN, |a| a.margin);
        TrialSpec {
            arrangement: Some(ArrangementSpec {
                kind,
                count,
                seed: 0,
                margin,
            }),
            ..self.clone()
        }
    }

    /// The obstacle field for this trial. Random arrangements draw from a
    /// stream derived from the trial seed.
    pub fn environment(&self) -> Result<Environment, String> {
        self.structure
            .check_inside(&self.workspace)
            .map_err(|e| e.to_string())?;
        match &self.arrangement {
            None => Environment::empty(self.workspace, self.clearance),
            Some(a) => {
                let spec = ArrangementSpec {
                    seed: derive_seed(self.trial_seed, ARRANGEMENT_STREAM),
                    ..*a
                };
                Environment::arranged(self.workspace, &spec, self.structure.vertices(), self.clearance)
            }
        }
        .map_err(|e| e.to_string())
    }

    /// Seed of the random obstacle draw; `None` when the field has no randomness.
    pub fn environment_seed(&self) -> Option<u64> {
        match self.arrangement {
            Some(a) if a.kind == ArrangementKind::Random => Some(derive_seed(self.trial_seed, ARRANGEMENT_STREAM)),
            _ => None,
        }
    }

    pub fn planner_config(&self) -> PlannerConfig {
        PlannerConfig {
            seed: derive_seed(self.trial_seed, PLANNER_STREAM),
            ..self.planner
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    Complete {
        toolpath: Toolpath,
        report: MetricsReport,
    },
    PlanningFailed {
        completed: Vec<Leg>,
        failed_pair: usize,
        reason: FailureReason,
    },
    /// The environment could not be built or the metrics failed.
    Error(String),
}

#[derive(Debug, Clone)]
pub struct TrialRun {
    pub environment: Option<Environment>,
    pub outcome: TrialOutcome,
}

/// Builds the environment, generates the toolpath and assesses it. Errors
/// are recorded in the outcome rather than returned.
pub fn run_trial(t: &TrialSpec) -> TrialRun {
    let env = match t.environment() {
        Ok(env) => env,
        Err(msg) => {
            return TrialRun {
                environment: None,
                outcome: TrialOutcome::Error(msg),
            }
        }
    };
    let outcome = match generate_toolpath(&t.structure, &env, &t.planner_config()) {
        PgfOutcome::Complete(toolpath) => match assess(&toolpath, &t.metrics) {
            Ok(report) => TrialOutcome::Complete { toolpath, report },
            Err(e) => TrialOutcome::Error(format!("metrics: {e}")),
        },
        PgfOutcome::PartialFailure {
            completed,
            failed_pair,
            reason,
        } => TrialOutcome::PlanningFailed {
            completed,
            failed_pair,
            reason,
        },
    };
    TrialRun {
        environment: Some(env),
        outcome,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrialStatus {
    Success,
    Failed { failed_pair: usize, reason: FailureReason },
    Error { message: String },
}

/// One ledger line: where the trial sits in its batch, its seed and what
/// happened.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// Sweep value index, ladder density index, or 0 for comparisons.
    pub group: usize,
    pub trial: usize,
    pub seed: u64,
    pub planner: PlannerKind,
    pub status: TrialStatus,
    pub report: Option<MetricsReport>,
}

impl TrialRecord {
    pub fn from_run(group: usize, trial: usize, spec: &TrialSpec, run: &TrialRun) -> Self {
        let (status, report) = match &run.outcome {
            TrialOutcome::Complete { report, .. } => (TrialStatus::Success, Some(report.clone())),
            TrialOutcome::PlanningFailed {
                failed_pair, reason, ..
            } => (
                TrialStatus::Failed {
                    failed_pair: *failed_pair,
                    reason: *reason,
                },
                None,
            ),
            TrialOutcome::Error(message) => (
                TrialStatus::Error {
                    message: message.clone(),
                },
                None,
            ),
        };
        TrialRecord {
            group,
            trial,
            seed: spec.trial_seed,
            planner: spec.planner.kind,
            status,
            report,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.status == TrialStatus::Success
    }
}

/// Success rate and means over the successful trials of one batch cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean of the per-trial leg means.
    pub means: Option<MetricMeans>,
    /// Mean toolpath run time (sum over legs) of successful trials.
    pub mean_total_run_time_s: Option<f64>,
}

impl Summary {
    pub fn from_records<'a, I>(records: I) -> Summary
    where
        I: IntoIterator<Item = &'a TrialRecord>,
    {
        let mut trials = 0;
        let mut means = Vec::new();
        let mut totals = Vec::new();
        for r in records {
            trials += 1;
            if let (TrialStatus::Success, Some(rep)) = (&r.status, &r.report) {
                means.push(rep.mean);
                totals.push(rep.total_run_time_s);
            }
        }
        let successes = means.len();
        Summary {
            trials,
            successes,
            success_rate: if trials == 0 {
                0.0
            } else {
                successes as f64 / trials as f64
            },
            means: MetricMeans::mean_of(&means),
            mean_total_run_time_s: if successes == 0 {
                None
            } else {
                Some(totals.iter().sum::<f64>() / successes as f64)
            },
        }
    }
}

fn run_jobs(jobs: Vec<(usize, usize, TrialSpec)>) -> Vec<TrialRecord> {
    jobs.par_iter()
        .map(|(group, trial, spec)| TrialRecord::from_run(*group, *trial, spec, &run_trial(spec)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    NumObstacles,
    GridSize,
    ExpansionLength,
    NumNeighbors,
    MaxEdgeLength,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::NumObstacles => "num-obstacles",
            SweepParameter::GridSize => "grid-size",
            SweepParameter::ExpansionLength => "expansion-length",
            SweepParameter::NumNeighbors => "num-neighbors",
            SweepParameter::MaxEdgeLength => "max-edge-length",
        }
    }

    pub fn applies_to(self, kind: PlannerKind) -> bool {
        match self {
            SweepParameter::NumObstacles => true,
            SweepParameter::GridSize => kind.is_grid(),
            SweepParameter::ExpansionLength => kind == PlannerKind::Rrt,
            SweepParameter::NumNeighbors | SweepParameter::MaxEdgeLength => kind == PlannerKind::Prm,
        }
    }

    fn is_integral(self) -> bool {
        matches!(self, SweepParameter::NumObstacles | SweepParameter::NumNeighbors)
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &TrialSpec, value: f64) -> Result<TrialSpec, ExperimentError> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(config_err(format!("{} value must be positive, got {value}", self.name())));
        }
        if self.is_integral() && value.fract() != 0.0 {
            return Err(config_err(format!("{} takes integer values, got {value}", self.name())));
        }
        let mut t = base.clone();
        match self {
            SweepParameter::NumObstacles => {
                // without an arrangement the obstacle count is swept over random fields
                let kind = base.arrangement.map_or(ArrangementKind::Random, |a| a.kind);
                t = base.with_count(kind, value as usize);
            }
            SweepParameter::GridSize => t.planner.grid_size = value,
            SweepParameter::ExpansionLength => t.planner.expansion_length = value,
            SweepParameter::NumNeighbors => t.planner.num_neighbors = value as usize,
            SweepParameter::MaxEdgeLength => t.planner.max_edge_length = value,
        }
        Ok(t)
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "num-obstacles" | "obstacles" => Ok(SweepParameter::NumObstacles),
            "grid-size" => Ok(SweepParameter::GridSize),
            "expansion-length" => Ok(SweepParameter::ExpansionLength),
            "num-neighbors" => Ok(SweepParameter::NumNeighbors),
            "max-edge-length" => Ok(SweepParameter::MaxEdgeLength),
            other => Err(config_err(format!("unknown sweep parameter `{other}`"))),
        }
    }
}

/// How trial seeds relate across sweep values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedPairing {
    /// `seed = hash(batch, value index, trial index)`: independent draws per value.
    #[default]
    PerValue,
    /// `seed = hash(batch, trial index)`: trial `t` sees the same obstacles at every value.
    Paired,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub trials_per_value: usize,
    pub base: TrialSpec,
    pub batch_seed: u64,
    pub pairing: SeedPairing,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.values.is_empty() {
            return Err(config_err("sweep needs at least one value"));
        }
        let increasing = self.values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(config_err("sweep values must be strictly monotone"));
        }
        if self.trials_per_value == 0 {
            return Err(config_err("trials per value must be at least 1"));
        }
        if !self.parameter.applies_to(self.base.planner.kind) {
            return Err(config_err(format!(
                "parameter {} does not apply to planner {}",
                self.parameter, self.base.planner.kind
            )));
        }
        Ok(())
    }

    pub fn trial_seed(&self, value_index: usize, trial: usize) -> u64 {
        match self.pairing {
            SeedPairing::PerValue => derive_seed_path(self.batch_seed, &[value_index as u64, trial as u64]),
            SeedPairing::Paired => derive_seed_path(self.batch_seed, &[trial as u64]),
        }
    }

    /// The fully resolved trial at one point of the sweep.
    pub fn trial(&self, value_index: usize, trial: usize) -> Result<TrialSpec, ExperimentError> {
        let v = *self
            .values
            .get(value_index)
            .ok_or_else(|| config_err("value index out of range"))?;
        Ok(self.parameter.apply(&self.base, v)?.with_seed(self.trial_seed(value_index, trial)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub planner: PlannerKind,
    pub points: Vec<SweepPoint>,
    pub ledger: Vec<TrialRecord>,
}

pub fn sweep(s: &SweepSpec) -> Result<SweepResult, ExperimentError> {
    s.validate()?;
    let mut jobs = Vec::new();
    for vi in 0..s.values.len() {
        for t in 0..s.trials_per_value {
            jobs.push((vi, t, s.trial(vi, t)?));
        }
    }
    let ledger = run_jobs(jobs);
    let points = s
        .values
        .iter()
        .enumerate()
        .map(|(vi, &value)| SweepPoint {
            value,
            summary: Summary::from_records(ledger.iter().filter(|r| r.group == vi)),
        })
        .collect();
    Ok(SweepResult {
        parameter: s.parameter,
        planner: s.base.planner.kind,
        points,
        ledger,
    })
}

/// `start, 2*start, 4*start, ...` up to and including `end`.
pub fn doubling_ladder(start: usize, end: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = start.max(1);
    while d <= end {
        out.push(d);
        d *= 2;
    }
    out
}

fn check_ladder(ladder: &[usize]) -> Result<(), ExperimentError> {
    if ladder.is_empty() || ladder[0] == 0 || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(config_err("density ladder must be non-empty, positive and strictly increasing"));
    }
    Ok(())
}

/// Smallest ladder density at which `base.planner` succeeds in at most
/// half of `trials` trials. Densities are probed in order and the search
/// stops at the first hit.
pub fn find_half_success_density(
    base: &TrialSpec,
    kind: ArrangementKind,
    ladder: &[usize],
    trials: usize,
    batch_seed: u64,
) -> Result<usize, ExperimentError> {
    check_ladder(ladder)?;
    for (di, &density) in ladder.iter().enumerate() {
        let spec = base.with_count(kind, density);
        let jobs = (0..trials)
            .map(|t| (di, t, spec.with_seed(derive_seed_path(batch_seed, &[di as u64, t as u64]))))
            .collect();
        let rate = Summary::from_records(&run_jobs(jobs)).success_rate;
        if rate <= 0.5 {
            return Ok(density);
        }
    }
    Err(ExperimentError::LadderExhausted)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationSpec {
    /// Structure, workspace and metric settings; its planner is ignored.
    pub base: TrialSpec,
    pub kind: ArrangementKind,
    pub planners: Vec<PlannerConfig>,
    pub ladder: Vec<usize>,
    pub trials: usize,
    pub batch_seed: u64,
}

impl SaturationSpec {
    /// Seed of trial `t` at ladder step `di`; shared by all planners so they
    /// face identical obstacle fields.
    pub fn trial_seed(&self, density_index: usize, trial: usize) -> u64 {
        derive_seed_path(self.batch_seed, &[density_index as u64, trial as u64])
    }

    pub fn trial(&self, density_index: usize, trial: usize, planner: &PlannerConfig) -> TrialSpec {
        self.base
            .with_count(self.kind, self.ladder[density_index])
            .with_planner(*planner)
            .with_seed(self.trial_seed(density_index, trial))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationResult {
    /// Densities actually tested, ascending.
    pub densities: Vec<usize>,
    pub planners: Vec<PlannerKind>,
    /// `cells[d][p]`: planner `p` at density `d`.
    pub cells: Vec<Vec<Summary>>,
    /// Highest tested density where some planner succeeded at least once.
    pub saturation_density: Option<usize>,
    pub ledger: Vec<TrialRecord>,
}

/// Climbs the ladder until no planner succeeds in any trial.
pub fn saturate(s: &SaturationSpec) -> Result<SaturationResult, ExperimentError> {
    check_ladder(&s.ladder)?;
    if s.planners.is_empty() {
        return Err(config_err("saturation needs at least one planner"));
    }
    if s.trials == 0 {
        return Err(config_err("trials must be at least 1"));
    }
    let mut result = SaturationResult {
        densities: Vec::new(),
        planners: s.planners.iter().map(|p| p.kind).collect(),
        cells: Vec::new(),
        saturation_density: None,
        ledger: Vec::new(),
    };
    for (di, &density) in s.ladder.iter().enumerate() {
        let mut jobs = Vec::new();
        for p in &s.planners {
            for t in 0..s.trials {
                jobs.push((di, t, s.trial(di, t, p)));
            }
        }
        let records = run_jobs(jobs);
        let row: Vec<Summary> = s
            .planners
            .iter()
            .map(|p| Summary::from_records(records.iter().filter(|r| r.planner == p.kind)))
            .collect();
        let any = row.iter().any(|c| c.successes > 0);
        result.densities.push(density);
        result.cells.push(row);
        result.ledger.extend(records);
        if !any {
            break;
        }
        result.saturation_density = Some(density);
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSpec {
    /// Structure, arrangement (with the density as its count) and settings.
    pub base: TrialSpec,
    pub planners: Vec<PlannerConfig>,
    pub trials: usize,
    pub batch_seed: u64,
}

impl ComparisonSpec {
    pub fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed_path(self.batch_seed, &[trial as u64])
    }

    pub fn trial(&self, trial: usize, planner: &PlannerConfig) -> TrialSpec {
        self.base.with_planner(*planner).with_seed(self.trial_seed(trial))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub planner: PlannerKind,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub ledger: Vec<TrialRecord>,
}

/// Runs every planner on the same seeded environments.
pub fn compare(s: &ComparisonSpec) -> Result<ComparisonTable, ExperimentError> {
    if s.planners.is_empty() {
        return Err(config_err("comparison needs at least one planner"));
    }
    if s.trials == 0 {
        return Err(config_err("trials must be at least 1"));
    }
    let jobs = s
        .planners
        .iter()
        .flat_map(|p| (0..s.trials).map(move |t| (0, t, s.trial(t, p))))
        .collect();
    let ledger = run_jobs(jobs);
    let rows = s
        .planners
        .iter()
        .map(|p| ComparisonRow {
            planner: p.kind,
            summary: Summary::from_records(ledger.iter().filter(|r| r.planner == p.kind)),
        })
        .collect();
    Ok(ComparisonTable { rows, ledger })
}
