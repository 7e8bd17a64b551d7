//! Run configuration: one TOML file drives every command. See
//! `docs/config.md` for the full key reference.

use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::environment::{ArrangementKind, ArrangementSpec, Workspace, DEFAULT_CLEARANCE, DEFAULT_MARGIN};
use crate::experiments::{
    doubling_ladder, ComparisonSpec, SaturationSpec, SeedPairing, SweepParameter, SweepSpec, TrialSpec,
    DEFAULT_TRIALS,
};
use crate::geometry::Point2;
use crate::metrics::MetricOptions;
use crate::pgf::StructureSpec;
use crate::planners::{PlannerConfig, PlannerKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// Whether measured wall-clock run times are written to result files.
/// `Omit` leaves them blank so a replay reproduces every file byte for byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimingMode {
    #[default]
    Wall,
    Omit,
}

impl FromStr for TimingMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wall" => Ok(TimingMode::Wall),
            "omit" => Ok(TimingMode::Omit),
            _ => Err(invalid(format!("timing must be `wall` or `omit`, got `{s}`"))),
        }
    }
}

/// `[structure]`: either `preset = "..."` or explicit `vertices` and `closed`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureTable {
    preset: Option<String>,
    vertices: Option<Vec<Point2>>,
    closed: Option<bool>,
}

fn structure_from_table<'de, D: Deserializer<'de>>(d: D) -> Result<StructureSpec, D::Error> {
    use serde::de::Error;
    let t = StructureTable::deserialize(d)?;
    match (t.preset, t.vertices) {
        (Some(_), Some(_)) => Err(D::Error::custom("give either `preset` or `vertices`, not both")),
        (Some(name), None) => {
            let s = StructureSpec::preset(&name).map_err(D::Error::custom)?;
            match t.closed {
                Some(c) if c != s.is_closed() => Err(D::Error::custom(format!(
                    "preset `{name}` has closed = {}",
                    s.is_closed()
                ))),
                _ => Ok(s),
            }
        }
        (None, Some(v)) => StructureSpec::new(v, t.closed.unwrap_or(false)).map_err(D::Error::custom),
        (None, None) => Err(D::Error::custom("missing `preset` or `vertices`")),
    }
}

/// `[obstacles]`. The arrangement seed is never configured directly: it
/// is derived from each trial seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawObstacles")]
pub struct ObstacleConfig {
    pub kind: ArrangementKind,
    pub count: usize,
    pub margin: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObstacles {
    kind: ArrangementKind,
    count: usize,
    #[serde(default = "default_margin")]
    margin: f64,
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

impl TryFrom<RawObstacles> for ObstacleConfig {
    type Error = String;

    fn try_from(r: RawObstacles) -> Result<Self, String> {
        if r.count == 0 {
            return Err("obstacle count must be at least 1; omit [obstacles] for an empty workspace".into());
        }
        if !(r.margin >= 0.0) || !r.margin.is_finite() {
            return Err(format!("margin must be a finite non-negative length, got {}", r.margin));
        }
        Ok(ObstacleConfig {
            kind: r.kind,
            count: r.count,
            margin: r.margin,
        })
    }
}

impl ObstacleConfig {
    pub fn arrangement(&self) -> ArrangementSpec {
        ArrangementSpec {
            kind: self.kind,
            count: self.count,
            seed: 0,
            margin: self.margin,
        }
    }
}

/// Parses `none`, `random:256` or `periodic:128`.
pub fn parse_obstacles(s: &str) -> Result<Option<ObstacleConfig>, ConfigError> {
    if s == "none" {
        return Ok(None);
    }
    let (kind, count) = s
        .split_once(':')
        .ok_or_else(|| invalid(format!("obstacles must look like `random:256`, got `{s}`")))?;
    let kind = match kind {
        "random" => ArrangementKind::Random,
        "periodic" => ArrangementKind::Periodic,
        other => return Err(invalid(format!("unknown arrangement `{other}`"))),
    };
    let count: usize = count
        .parse()
        .map_err(|_| invalid(format!("bad obstacle count `{count}`")))?;
    ObstacleConfig::try_from(RawObstacles {
        kind,
        count,
        margin: DEFAULT_MARGIN,
    })
    .map(Some)
    .map_err(ConfigError::Invalid)
}

/// Per-planner parameters under `[planners.<kind>]`. A table's `kind` and
/// `seed` keys are ignored: the kind comes from the table name and seeds
/// are derived per trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPlanners")]
pub struct PlannerTable {
    pub dijkstra: PlannerConfig,
    pub astar: PlannerConfig,
    pub rrt: PlannerConfig,
    pub prm: PlannerConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlanners {
    dijkstra: Option<PlannerConfig>,
    astar: Option<PlannerConfig>,
    rrt: Option<PlannerConfig>,
    prm: Option<PlannerConfig>,
}

impl TryFrom<RawPlanners> for PlannerTable {
    type Error = String;

    fn try_from(r: RawPlanners) -> Result<Self, String> {
        let fix = |c: Option<PlannerConfig>, kind: PlannerKind| -> Result<PlannerConfig, String> {
            let c = PlannerConfig {
                kind,
                seed: 0,
                ..c.unwrap_or_else(|| PlannerConfig::for_kind(kind))
            };
            c.validate().map_err(|e| format!("[planners.{}] {e}", kind.name()))?;
            Ok(c)
        };
        Ok(PlannerTable {
            dijkstra: fix(r.dijkstra, PlannerKind::Dijkstra)?,
            astar: fix(r.astar, PlannerKind::AStar)?,
            rrt: fix(r.rrt, PlannerKind::Rrt)?,
            prm: fix(r.prm, PlannerKind::Prm)?,
        })
    }
}

impl Default for PlannerTable {
    fn default() -> Self {
        PlannerTable {
            dijkstra: PlannerConfig::for_kind(PlannerKind::Dijkstra),
            astar: PlannerConfig::for_kind(PlannerKind::AStar),
            rrt: PlannerConfig::for_kind(PlannerKind::Rrt),
            prm: PlannerConfig::for_kind(PlannerKind::Prm),
        }
    }
}

impl PlannerTable {
    pub fn get(&self, kind: PlannerKind) -> PlannerConfig {
        match kind {
            PlannerKind::Dijkstra => self.dijkstra,
            PlannerKind::AStar => self.astar,
            PlannerKind::Rrt => self.rrt,
            PlannerKind::Prm => self.prm,
        }
    }

    pub fn get_mut(&mut self, kind: PlannerKind) -> &mut PlannerConfig {
        match kind {
            PlannerKind::Dijkstra => &mut self.dijkstra,
            PlannerKind::AStar => &mut self.astar,
            PlannerKind::Rrt => &mut self.rrt,
            PlannerKind::Prm => &mut self.prm,
        }
    }
}

/// A list of numbers, written either as a TOML array or as an inclusive
/// `"start:end:step"` range.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValueList(pub Vec<f64>);

impl<'de> Deserialize<'de> for ValueList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Either {
            List(Vec<f64>),
            Range(String),
        }
        match Either::deserialize(d)? {
            Either::List(v) => Ok(ValueList(v)),
            Either::Range(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl FromStr for ValueList {
    type Err = String;

    /// `2:20:2` is an inclusive range; `2,4,8` is an explicit list.
    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}` in `{s}`"));
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [a, b, step] = parts[..] else {
                return Err(format!("range must be start:end:step, got `{s}`"));
            };
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
                return Err(format!("range `{s}` must have start <= end and a positive step"));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok(ValueList((0..n).map(|i| a + i as f64 * step).collect()))
        } else {
            s.split(',').map(num).collect::<Result<_, _>>().map(ValueList)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: ValueList,
    pub pairing: SeedPairing,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            parameter: SweepParameter::NumObstacles,
            values: ValueList(doubling_ladder(2, 1024).into_iter().map(|d| d as f64).collect()),
            pairing: SeedPairing::PerValue,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaturateConfig {
    pub arrangement: ArrangementKind,
    pub ladder: Vec<usize>,
    pub planners: Vec<PlannerKind>,
}

impl Default for SaturateConfig {
    fn default() -> Self {
        SaturateConfig {
            arrangement: ArrangementKind::Random,
            ladder: doubling_ladder(2, 1024),
            planners: PlannerKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub planners: Vec<PlannerKind>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            planners: PlannerKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub sweep: SweepConfig,
    pub saturate: SaturateConfig,
    pub compare: CompareConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trials: DEFAULT_TRIALS,
            sweep: SweepConfig::default(),
            saturate: SaturateConfig::default(),
            compare: CompareConfig::default(),
        }
    }
}

fn default_clearance() -> f64 {
    DEFAULT_CLEARANCE
}

fn default_structure() -> StructureSpec {
    StructureSpec::open_default()
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Batch seed; `plan` uses it directly as the trial seed.
    #[serde(default)]
    pub seed: u64,
    /// Not part of the recorded configuration: it never affects results.
    #[serde(default = "default_output", skip_serializing)]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub timing: TimingMode,
    #[serde(default)]
    pub workspace: Workspace,
    #[serde(default = "default_clearance")]
    pub clearance: f64,
    #[serde(default = "default_structure", deserialize_with = "structure_from_table")]
    pub structure: StructureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacles: Option<ObstacleConfig>,
    /// Planner used by `plan` and `sweep`.
    #[serde(default)]
    pub planner: PlannerKind,
    #[serde(default)]
    pub planners: PlannerTable,
    #[serde(default)]
    pub metrics: MetricOptions,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &FsPath) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// Cross-field checks that individual tables cannot make.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.clearance > 0.0) || !self.clearance.is_finite() {
            return Err(invalid(format!("clearance must be positive, got {}", self.clearance)));
        }
        self.structure
            .check_inside(&self.workspace)
            .map_err(|e| invalid(e.to_string()))?;
        if let Some(o) = &self.obstacles {
            self.workspace
                .shrink(o.margin)
                .map_err(|e| invalid(format!("[obstacles] {e}")))?;
        }
        let e = &self.experiment;
        if e.trials == 0 {
            return Err(invalid("experiment.trials must be at least 1"));
        }
        if e.saturate.planners.is_empty() || e.compare.planners.is_empty() {
            return Err(invalid("planner lists must not be empty"));
        }
        let ladder = &e.saturate.ladder;
        if ladder.is_empty() || ladder[0] == 0 || ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("experiment.saturate.ladder must be positive and strictly increasing"));
        }
        Ok(())
    }

    pub fn planner_config(&self, kind: PlannerKind) -> PlannerConfig {
        self.planners.get(kind)
    }

    fn base_trial(&self, planner: PlannerKind) -> TrialSpec {
        TrialSpec {
            workspace: self.workspace,
            clearance: self.clearance,
            structure: self.structure.clone(),
            arrangement: self.obstacles.map(|o| o.arrangement()),
            planner: self.planner_config(planner),
            metrics: self.metrics,
            trial_seed: 0,
        }
    }

    /// The single trial run by `plan`.
    pub fn plan_trial(&self) -> TrialSpec {
        self.base_trial(self.planner).with_seed(self.seed)
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        let s = &self.experiment.sweep;
        SweepSpec {
            parameter: s.parameter,
            values: s.values.0.clone(),
            trials_per_value: self.experiment.trials,
            base: self.base_trial(self.planner),
            batch_seed: self.seed,
            pairing: s.pairing,
        }
    }

    pub fn saturation_spec(&self) -> SaturationSpec {
        let s = &self.experiment.saturate;
        let mut base = self.base_trial(self.planner);
        base.arrangement = Some(ArrangementSpec {
            kind: s.arrangement,
            count: 1,
            seed: 0,
            margin: self.obstacles.map_or(DEFAULT_MARGIN, |o| o.margin),
        });
        SaturationSpec {
            base,
            kind: s.arrangement,
            planners: s.planners.iter().map(|&k| self.planner_config(k)).collect(),
            ladder: s.ladder.clone(),
            trials: self.experiment.trials,
            batch_seed: self.seed,
        }
    }

    pub fn comparison_spec(&self) -> ComparisonSpec {
        ComparisonSpec {
            base: self.base_trial(self.planner),
            planners: self
                .experiment
                .compare
                .planners
                .iter()
                .map(|&k| self.planner_config(k))
                .collect(),
            trials: self.experiment.trials,
            batch_seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::from_toml_str("", "t").unwrap();
        assert_eq!(c.clearance, DEFAULT_CLEARANCE);
        assert_eq!(c.structure, StructureSpec::open_default());
        assert_eq!(c.obstacles, None);
        assert_eq!(c.planners.rrt.kind, PlannerKind::Rrt);
        assert_eq!(c.planners.dijkstra.grid_size, 12.0);
        assert_eq!(c.experiment.trials, 20);
        assert_eq!(c.experiment.saturate.ladder.last(), Some(&1024));
    }

    #[test]
    fn full_file() {
        let text = r#"
            seed = 7
            clearance = 15
            planner = "astar"
            [structure]
            preset = "hexagon-default"
            [obstacles]
            kind = "periodic"
            count = 128
            [planners.rrt]
            max_iterations = 900
            [metrics]
            deviation_sample = "endpoint"
            [experiment]
            trials = 3
            [experiment.sweep]
            parameter = "grid-size"
            values = "2:20:2"
            pairing = "paired"
        "#;
        let c = RunConfig::from_toml_str(text, "t").unwrap();
        assert_eq!(c.structure.leg_count(), 6);
        assert_eq!(c.obstacles.unwrap().count, 128);
        assert_eq!(c.planners.rrt.max_iterations, 900);
        assert_eq!(c.planners.rrt.kind, PlannerKind::Rrt);
        assert_eq!(c.planners.rrt.expansion_length, 20.0);
        assert_eq!(c.experiment.sweep.values.0, vec![2., 4., 6., 8., 10., 12., 14., 16., 18., 20.]);
        let sw = c.sweep_spec();
        assert_eq!(sw.base.planner.kind, PlannerKind::AStar);
        assert_eq!(sw.trials_per_value, 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "seed = 1\n[planners.prm]\nnum_neighbors = 0\n";
        let err = RunConfig::from_toml_str(text, "bad.toml").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(err.contains("num_neighbors"), "{err}");

        let err = RunConfig::from_toml_str("seed = 1\nclearence = 3\n", "bad.toml")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2") && err.contains("clearence"), "{err}");

        let err = RunConfig::from_toml_str("[structure]\nvertices = [[1, 1]]\n", "bad.toml")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn cross_field_checks() {
        assert!(RunConfig::from_toml_str("clearance = 0", "t").is_err());
        assert!(RunConfig::from_toml_str("[structure]\nvertices = [[1, 1], [900, 900]]", "t").is_err());
        assert!(RunConfig::from_toml_str("[experiment.saturate]\nladder = [4, 2]", "t").is_err());
        assert!(RunConfig::from_toml_str("[obstacles]\nkind = \"random\"\ncount = 0", "t").is_err());
    }

    #[test]
    fn value_lists() {
        assert_eq!("1,2.5,4".parse::<ValueList>().unwrap().0, vec![1.0, 2.5, 4.0]);
        assert_eq!("5:5:1".parse::<ValueList>().unwrap().0, vec![5.0]);
        assert_eq!("50:800:250".parse::<ValueList>().unwrap().0, vec![50.0, 300.0, 550.0, 800.0]);
        assert!("5:1:1".parse::<ValueList>().is_err());
        assert!("1:2".parse::<ValueList>().is_err());
        assert!("1:2:0".parse::<ValueList>().is_err());
    }

    #[test]
    fn obstacle_flags() {
        assert_eq!(parse_obstacles("none").unwrap(), None);
        let o = parse_obstacles("random:256").unwrap().unwrap();
        assert_eq!((o.kind, o.count, o.margin), (ArrangementKind::Random, 256, DEFAULT_MARGIN));
        assert!(parse_obstacles("grid:3").is_err());
        assert!(parse_obstacles("random:0").is_err());
        assert!(parse_obstacles("random").is_err());
    }

    #[test]
    fn resolved_config_reloads_from_json() {
        let c = RunConfig::from_toml_str(
            "[structure]\npreset = \"hexagon-default\"\n[obstacles]\nkind = \"random\"\ncount = 64",
            "t",
        )
        .unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }
}
