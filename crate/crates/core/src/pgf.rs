//! Toolpath generation: plans every consecutive vertex pair of a structure
//! in order and strings the legs together.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{Environment, Workspace};
use crate::geometry::{Point2, LENGTH_EPS};
use crate::planners::{plan, FailureReason, Path, PlanOutcome, PlannerConfig};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructureError {
    #[error("a structure needs at least two vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("vertex {index} ({x}, {y}) lies outside the workspace")]
    OutsideWorkspace { index: usize, x: f64, y: f64 },
    #[error("vertex {0} is not a finite point")]
    NonFinite(usize),
    #[error("unknown structure preset `{0}` (expected open-default or hexagon-default)")]
    UnknownPreset(String),
}

/// Fixed vertices of a printed structure. An open structure (a wall) has
/// legs `v[i] -> v[i+1]`; a closed one also returns from the last vertex
/// to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStructure")]
pub struct StructureSpec {
    vertices: Vec<Point2>,
    closed: bool,
}

#[derive(Deserialize)]
struct RawStructure {
    vertices: Vec<Point2>,
    closed: bool,
}

impl TryFrom<RawStructure> for StructureSpec {
    type Error = StructureError;

    fn try_from(r: RawStructure) -> Result<Self, Self::Error> {
        StructureSpec::new(r.vertices, r.closed)
    }
}

pub const OPEN_DEFAULT: &str = "open-default";
pub const HEXAGON_DEFAULT: &str = "hexagon-default";

impl StructureSpec {
    pub fn new(vertices: Vec<Point2>, closed: bool) -> Result<Self, StructureError> {
        if vertices.len() < 2 {
            return Err(StructureError::TooFewVertices(vertices.len()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(StructureError::NonFinite(i));
            }
            if let Some(j) = vertices[..i].iter().position(|u| u.distance(v) < LENGTH_EPS) {
                return Err(StructureError::DuplicateVertex(j, i));
            }
        }
        Ok(StructureSpec { vertices, closed })
    }

    /// Straight wall from (100, 100) to (700, 700).
    pub fn open_default() -> Self {
        StructureSpec {
            vertices: vec![Point2::new(100., 100.), Point2::new(700., 700.)],
            closed: false,
        }
    }

    /// Closed hexagon in the 800 mm workspace.
    pub fn hexagon_default() -> Self {
        StructureSpec {
            vertices: vec![
                Point2::new(700., 480.),
                Point2::new(480., 700.),
                Point2::new(180., 619.),
                Point2::new(100., 319.),
                Point2::new(319., 100.),
                Point2::new(619., 180.),
            ],
            closed: true,
        }
    }

    pub fn preset(name: &str) -> Result<Self, StructureError> {
        match name {
            OPEN_DEFAULT => Ok(Self::open_default()),
            HEXAGON_DEFAULT => Ok(Self::hexagon_default()),
            other => Err(StructureError::UnknownPreset(other.to_string())),
        }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn leg_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    /// Endpoints of leg `k`.
    pub fn pair(&self, k: usize) -> (Point2, Point2) {
        let n = self.vertices.len();
        (self.vertices[k % n], self.vertices[(k + 1) % n])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, Point2, Point2)> + '_ {
        (0..self.leg_count()).map(move |k| {
            let (a, b) = self.pair(k);
            (k, a, b)
        })
    }

    pub fn check_inside(&self, ws: &Workspace) -> Result<(), StructureError> {
        match self.vertices.iter().position(|v| !ws.contains(v)) {
            Some(index) => Err(StructureError::OutsideWorkspace {
                index,
                x: self.vertices[index].x,
                y: self.vertices[index].y,
            }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    /// Index of the vertex pair this leg connects.
    pub pair: usize,
    pub path: Path,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Toolpath {
    pub legs: Vec<Leg>,
    pub structure: StructureSpec,
}

impl Toolpath {
    /// The printed polyline: all legs concatenated, junction vertices once.
    pub fn waypoints(&self) -> Vec<Point2> {
        let mut out: Vec<Point2> = Vec::new();
        for leg in &self.legs {
            let skip = usize::from(out.last() == leg.path.waypoints.first());
            out.extend_from_slice(&leg.path.waypoints[skip..]);
        }
        out
    }

    pub fn total_elapsed(&self) -> f64 {
        self.legs.iter().map(|l| l.path.elapsed).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PgfOutcome {
    Complete(Toolpath),
    PartialFailure {
        completed: Vec<Leg>,
        failed_pair: usize,
        reason: FailureReason,
    },
}

impl PgfOutcome {
    pub fn toolpath(&self) -> Option<&Toolpath> {
        match self {
            PgfOutcome::Complete(t) => Some(t),
            PgfOutcome::PartialFailure { .. } => None,
        }
    }

    pub fn legs(&self) -> &[Leg] {
        match self {
            PgfOutcome::Complete(t) => &t.legs,
            PgfOutcome::PartialFailure { completed, .. } => completed,
        }
    }
}

/// Planner configuration for leg `k`: the same parameters with a seed
/// derived from the run seed and the leg position.
pub fn leg_config(cfg: &PlannerConfig, leg: usize) -> PlannerConfig {
    PlannerConfig {
        seed: derive_seed(cfg.seed, leg as u64),
        ..*cfg
    }
}

/// Plans each vertex pair in order and stops at the first failing pair.
pub fn generate_toolpath(structure: &StructureSpec, env: &Environment, cfg: &PlannerConfig) -> PgfOutcome {
    let mut legs = Vec::with_capacity(structure.leg_count());
    for (k, a, b) in structure.pairs() {
        match plan(a, b, env, &leg_config(cfg, k)) {
            PlanOutcome::Found(path) => legs.push(Leg {
                pair: k,
                path: normalize(&path),
            }),
            PlanOutcome::Failed(reason) => {
                return PgfOutcome::PartialFailure {
                    completed: legs,
                    failed_pair: k,
                    reason,
                }
            }
        }
    }
    PgfOutcome::Complete(Toolpath {
        legs,
        structure: structure.clone(),
    })
}

/// Drops waypoints closer than 1e-9 mm to their predecessor. Both endpoints
/// are kept exactly.
pub fn normalize(path: &Path) -> Path {
    let pts = &path.waypoints;
    let mut out: Vec<Point2> = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        let last = i + 1 == pts.len();
        match out.last() {
            Some(prev) if prev.distance(p) < LENGTH_EPS => {
                if last && out.len() > 1 {
                    // keep the exact goal in place of its near-duplicate
                    *out.last_mut().unwrap() = *p;
                }
            }
            _ => out.push(*p),
        }
    }
    Path {
        waypoints: out,
        planner: path.planner,
        elapsed: path.elapsed,
    }
}
