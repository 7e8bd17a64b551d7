//! Toolpath serialization and the linear-move export.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::TimingMode;
use crate::geometry::Point2;
use crate::pgf::{Leg, PgfOutcome, StructureSpec, Toolpath};
use crate::planners::{FailureReason, Path, PlannerKind};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("toolpath is incomplete: pair {pair} failed ({reason})")]
    Partial { pair: usize, reason: &'static str },
    #[error("malformed toolpath document: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegDocument {
    pub pair: usize,
    pub waypoints: Vec<Point2>,
    /// `null` when run times are omitted.
    pub elapsed_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureDocument {
    pub pair: usize,
    pub reason: FailureReason,
}

/// On-disk form of a (possibly partial) toolpath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolpathDocument {
    pub structure: StructureSpec,
    pub planner: PlannerKind,
    pub legs: Vec<LegDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureDocument>,
    pub config_digest: String,
}

fn leg_document(leg: &Leg, timing: TimingMode) -> LegDocument {
    LegDocument {
        pair: leg.pair,
        waypoints: leg.path.waypoints.clone(),
        elapsed_s: match timing {
            TimingMode::Wall => Some(leg.path.elapsed),
            TimingMode::Omit => None,
        },
    }
}

impl ToolpathDocument {
    pub fn from_outcome(
        outcome: &PgfOutcome,
        structure: &StructureSpec,
        planner: PlannerKind,
        config_digest: &str,
        timing: TimingMode,
    ) -> Self {
        let failure = match outcome {
            PgfOutcome::Complete(_) => None,
            PgfOutcome::PartialFailure {
                failed_pair, reason, ..
            } => Some(FailureDocument {
                pair: *failed_pair,
                reason: *reason,
            }),
        };
        ToolpathDocument {
            structure: structure.clone(),
            planner,
            legs: outcome.legs().iter().map(|l| leg_document(l, timing)).collect(),
            failure,
            config_digest: config_digest.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("toolpath documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ExportError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Rebuilds the toolpath, checking that legs cover every vertex pair in
    /// order and end exactly on the vertices. Omitted run times become 0.
    pub fn to_toolpath(&self) -> Result<Toolpath, ExportError> {
        if let Some(f) = self.failure {
            return Err(ExportError::Partial {
                pair: f.pair,
                reason: f.reason.name(),
            });
        }
        if self.legs.len() != self.structure.leg_count() {
            return Err(ExportError::Malformed(format!(
                "{} legs for a structure with {} vertex pairs",
                self.legs.len(),
                self.structure.leg_count()
            )));
        }
        let mut legs = Vec::with_capacity(self.legs.len());
        for (k, leg) in self.legs.iter().enumerate() {
            let (a, b) = self.structure.pair(k);
            if leg.pair != k {
                return Err(ExportError::Malformed(format!("leg {k} is labelled pair {}", leg.pair)));
            }
            if leg.waypoints.len() < 2 || leg.waypoints[0] != a || *leg.waypoints.last().unwrap() != b {
                return Err(ExportError::Malformed(format!("leg {k} does not run from {a:?} to {b:?}")));
            }
            legs.push(Leg {
                pair: k,
                path: Path {
                    waypoints: leg.waypoints.clone(),
                    planner: self.planner,
                    elapsed: leg.elapsed_s.unwrap_or(0.0),
                },
            });
        }
        Ok(Toolpath {
            legs,
            structure: self.structure.clone(),
        })
    }
}

/// One linear move. The first move of a toolpath is a travel move (`G0`)
/// to the start; every later one is a printing move (`G1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub command: MoveCommand,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoveCommand {
    G0,
    G1,
}

/// One move per toolpath waypoint, junction vertices counted once.
pub fn moves(toolpath: &Toolpath) -> Vec<Move> {
    toolpath
        .waypoints()
        .into_iter()
        .enumerate()
        .map(|(i, p)| Move {
            command: if i == 0 { MoveCommand::G0 } else { MoveCommand::G1 },
            x: p.x,
            y: p.y,
        })
        .collect()
}

/// Plain text, one `G1 X.. Y..` line per move, millimetres to three decimals.
pub fn moves_to_text(moves: &[Move]) -> String {
    let mut out = String::new();
    for m in moves {
        let cmd = match m.command {
            MoveCommand::G0 => "G0",
            MoveCommand::G1 => "G1",
        };
        out.push_str(&format!("{cmd} X{:.3} Y{:.3}\n", m.x, m.y));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct MoveDocument {
    units: String,
    moves: Vec<Move>,
}

pub fn moves_to_json(moves: &[Move]) -> String {
    let doc = MoveDocument {
        units: "mm".into(),
        moves: moves.to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("move lists always serialize");
    s.push('\n');
    s
}

pub fn moves_from_json(text: &str) -> Result<Vec<Move>, ExportError> {
    let doc: MoveDocument = serde_json::from_str(text)?;
    Ok(doc.moves)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveFormat {
    Text,
    Json,
}

/// Renders a complete toolpath; partial documents are rejected.
pub fn export_toolpath(doc: &ToolpathDocument, format: MoveFormat) -> Result<String, ExportError> {
    let m = moves(&doc.to_toolpath()?);
    Ok(match format {
        MoveFormat::Text => moves_to_text(&m),
        MoveFormat::Json => moves_to_json(&m),
    })
}
