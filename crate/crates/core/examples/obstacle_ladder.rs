//! Dijkstra success rate over the doubling obstacle ladder 2..1024, and the
//! first density where it drops to one half.
//!
//!     cargo run --release --example obstacle_ladder

use pathgen::environment::{ArrangementKind, ArrangementSpec};
use pathgen::experiments::{doubling_ladder, find_half_success_density, sweep, SeedPairing, SweepParameter, SweepSpec, TrialSpec};
use pathgen::pgf::StructureSpec;
use pathgen::planners::{PlannerConfig, PlannerKind};

fn main() {
    let ladder = doubling_ladder(2, 1024);
    for kind in [PlannerKind::Dijkstra, PlannerKind::AStar] {
        let base = TrialSpec::new(
            StructureSpec::open_default(),
            Some(ArrangementSpec::random(1, 0)),
            PlannerConfig::for_kind(kind),
        );
        let curve = sweep(&SweepSpec {
            parameter: SweepParameter::NumObstacles,
            values: ladder.iter().map(|&d| d as f64).collect(),
            trials_per_value: 20,
            base: base.clone(),
            batch_seed: 11,
            pairing: SeedPairing::PerValue,
        })
        .unwrap();
        let rates: Vec<String> = curve
            .points
            .iter()
            .map(|p| format!("{}:{:.2}", p.value, p.summary.success_rate))
            .collect();
        println!("{kind}: {}", rates.join(" "));
        match find_half_success_density(&base, ArrangementKind::Random, &ladder, 20, 11) {
            Ok(d) => println!("{kind}: success <= 50% from {d} obstacles"),
            Err(e) => println!("{kind}: {e}"),
        }
    }
}
