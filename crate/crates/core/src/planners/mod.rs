//! The four planners behind one interface: 8-connected grid Dijkstra and
//! A*, RRT and PRM. Each returns a collision-free polyline between two
//! query points or a failure reason.

mod grid;
mod prm;
mod rrt;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::Environment;
use crate::geometry::{polyline_length, Point2, Segment};

pub use grid::{plan_astar, plan_dijkstra, GridSpec};
pub use prm::plan_prm;
pub use rrt::plan_rrt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    #[default]
    Dijkstra,
    #[serde(rename = "astar")]
    AStar,
    Rrt,
    Prm,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 4] = [
        PlannerKind::Dijkstra,
        PlannerKind::AStar,
        PlannerKind::Rrt,
        PlannerKind::Prm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Dijkstra => "dijkstra",
            PlannerKind::AStar => "astar",
            PlannerKind::Rrt => "rrt",
            PlannerKind::Prm => "prm",
        }
    }

    pub fn is_grid(self) -> bool {
        matches!(self, PlannerKind::Dijkstra | PlannerKind::AStar)
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown planner `{0}` (expected dijkstra, astar, rrt or prm)")]
pub struct UnknownPlanner(pub String);

impl FromStr for PlannerKind {
    type Err = UnknownPlanner;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_', '*'], "").as_str() {
            "dijkstra" => Ok(PlannerKind::Dijkstra),
            "astar" | "a" => Ok(PlannerKind::AStar),
            "rrt" => Ok(PlannerKind::Rrt),
            "prm" => Ok(PlannerKind::Prm),
            _ => Err(UnknownPlanner(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("goal_sample_rate must lie in [0, 1], got {0}")]
    GoalRate(f64),
    #[error("{0} must be at least 1")]
    Zero(&'static str),
}

/// Per-planner parameters. Defaults are the tuned values for the 800 mm
/// workspace: 20 mm path resolution (one filament width), 12 mm grid,
/// 20 mm RRT expansion, and a 500-sample PRM visiting 10 neighbours over
/// edges of at most 410 mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub kind: PlannerKind,
    pub path_resolution: f64,
    pub grid_size: f64,
    pub expansion_length: f64,
    pub goal_sample_rate: f64,
    pub max_iterations: usize,
    pub num_samples: usize,
    pub num_neighbors: usize,
    pub max_edge_length: f64,
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            kind: PlannerKind::Dijkstra,
            path_resolution: 20.0,
            grid_size: 12.0,
            expansion_length: 20.0,
            goal_sample_rate: 0.05,
            max_iterations: 500,
            num_samples: 500,
            num_neighbors: 10,
            max_edge_length: 410.0,
            seed: 0,
        }
    }
}

impl PlannerConfig {
    pub fn for_kind(kind: PlannerKind) -> Self {
        PlannerConfig {
            kind,
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in [
            ("path_resolution", self.path_resolution),
            ("grid_size", self.grid_size),
            ("expansion_length", self.expansion_length),
            ("max_edge_length", self.max_edge_length),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ConfigError::NonPositive { name, value });
            }
        }
        if !(0.0..=1.0).contains(&self.goal_sample_rate) {
            return Err(ConfigError::GoalRate(self.goal_sample_rate));
        }
        for (name, value) in [
            ("max_iterations", self.max_iterations),
            ("num_samples", self.num_samples),
            ("num_neighbors", self.num_neighbors),
        ] {
            if value == 0 {
                return Err(ConfigError::Zero(name));
            }
        }
        Ok(())
    }
}

/// A successful plan. Endpoints are the exact query points.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub waypoints: Vec<Point2>,
    pub planner: PlannerKind,
    /// Wall-clock seconds spent inside the plan call.
    pub elapsed: f64,
}

impl Path {
    pub fn length(&self) -> f64 {
        polyline_length(&self.waypoints)
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.waypoints.windows(2).map(|w| Segment::new(w[0], w[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// The search space holds no connection between start and goal.
    NoRoute,
    /// The sampling budget ran out first.
    IterationCap,
    /// Start or goal is not a free point.
    InvalidQuery,
}

impl FailureReason {
    pub fn name(self) -> &'static str {
        match self {
            FailureReason::NoRoute => "no_route",
            FailureReason::IterationCap => "iteration_cap",
            FailureReason::InvalidQuery => "invalid_query",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome {
    Found(Path),
    Failed(FailureReason),
}

impl PlanOutcome {
    pub fn path(&self) -> Option<&Path> {
        match self {
            PlanOutcome::Found(p) => Some(p),
            PlanOutcome::Failed(_) => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, PlanOutcome::Found(_))
    }
}

/// Runs the planner selected by `cfg.kind`.
pub fn plan(start: Point2, goal: Point2, env: &Environment, cfg: &PlannerConfig) -> PlanOutcome {
    match cfg.kind {
        PlannerKind::Dijkstra => plan_dijkstra(start, goal, env, cfg),
        PlannerKind::AStar => plan_astar(start, goal, env, cfg),
        PlannerKind::Rrt => plan_rrt(start, goal, env, cfg),
        PlannerKind::Prm => plan_prm(start, goal, env, cfg),
    }
}

fn valid_query(start: &Point2, goal: &Point2, env: &Environment) -> bool {
    start.is_finite() && goal.is_finite() && start != goal && env.is_free(start) && env.is_free(goal)
}

fn seg_free(env: &Environment, a: Point2, b: Point2, resolution: f64) -> bool {
    env.segment_free(&Segment::new(a, b), resolution)
        .unwrap_or(false)
}

fn found(waypoints: Vec<Point2>, planner: PlannerKind, started: Instant) -> PlanOutcome {
    PlanOutcome::Found(Path {
        waypoints,
        planner,
        elapsed: started.elapsed().as_secs_f64(),
    })
}

/// Min-heap entry ordered by `(key, tiebreak, node)`; the float keys use
/// `total_cmp` so ordering is total and deterministic.
#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    key: f64,
    tiebreak: f64,
    node: usize,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.tiebreak.total_cmp(&self.tiebreak))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
