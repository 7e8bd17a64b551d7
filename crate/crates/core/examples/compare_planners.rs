//! Planner comparison on the closed hexagon with 64 random obstacles:
//! success rate and mean metrics over successful trials.
//!
//!     cargo run --release --example compare_planners

use pathgen::environment::ArrangementSpec;
use pathgen::experiments::{compare, ComparisonSpec, TrialSpec};
use pathgen::pgf::StructureSpec;
use pathgen::planners::{PlannerConfig, PlannerKind};

fn main() {
    let spec = ComparisonSpec {
        base: TrialSpec::new(
            StructureSpec::hexagon_default(),
            Some(ArrangementSpec::random(64, 0)),
            PlannerConfig::default(),
        ),
        planners: PlannerKind::ALL.iter().map(|&k| PlannerConfig::for_kind(k)).collect(),
        trials: 20,
        batch_seed: 5,
    };
    let table = compare(&spec).unwrap();
    println!("planner   success  rough deg  turns  offset mm  rmse mm  deviation  run s");
    for row in &table.rows {
        let s = &row.summary;
        match s.means {
            Some(m) => println!(
                "{:<9} {:7.2} {:10.2} {:6.1} {:10.2} {:8.2} {:10.4} {:6.4}",
                row.planner.name(),
                s.success_rate,
                m.roughness_deg,
                m.num_turns,
                m.offset_mm,
                m.rmse_mm,
                m.path_deviation,
                s.mean_total_run_time_s.unwrap_or(0.0)
            ),
            None => println!("{:<9} {:7.2}  (no successful trials)", row.planner.name(), s.success_rate),
        }
    }
}
