//! How the collision clearance moves the saturation density of the open
//! wall with random obstacles.
//!
//!     cargo run --release --example clearance_scan

use pathgen::environment::{ArrangementKind, ArrangementSpec};
use pathgen::experiments::{doubling_ladder, saturate, SaturationSpec, TrialSpec};
use pathgen::pgf::StructureSpec;
use pathgen::planners::{PlannerConfig, PlannerKind};

fn main() {
    for clearance in [10.0, 15.0, 20.0, 25.0, 30.0] {
        let base = TrialSpec {
            clearance,
            ..TrialSpec::new(StructureSpec::open_default(), Some(ArrangementSpec::random(1, 0)), PlannerConfig::default())
        };
        let spec = SaturationSpec {
            base,
            kind: ArrangementKind::Random,
            planners: PlannerKind::ALL.iter().map(|&k| PlannerConfig::for_kind(k)).collect(),
            ladder: doubling_ladder(2, 2048),
            trials: 20,
            batch_seed: 0,
        };
        let r = saturate(&spec).unwrap();
        let at = |d: usize| {
            r.densities
                .iter()
                .position(|&x| x == d)
                .map(|i| r.cells[i].iter().map(|c| format!("{:.2}", c.success_rate)).collect::<Vec<_>>().join("/"))
                .unwrap_or_else(|| "-".into())
        };
        println!(
            "clearance {clearance:>4} mm: saturation {:?}, at 256 (dijkstra/astar/rrt/prm) {}",
            r.saturation_density,
            at(256)
        );
    }
}
