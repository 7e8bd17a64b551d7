//! Plans the straight wall (100,100) -> (700,700) through 256 random
//! obstacles with grid Dijkstra and prints the leg metrics.
//!
//!     cargo run --release --example plan_open_wall [seed]

use pathgen::environment::{ArrangementSpec, Environment, Workspace, DEFAULT_CLEARANCE};
use pathgen::metrics::{assess, MetricOptions};
use pathgen::pgf::{generate_toolpath, PgfOutcome, StructureSpec};
use pathgen::planners::{PlannerConfig, PlannerKind};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let wall = StructureSpec::open_default();
    let env = Environment::arranged(
        Workspace::default(),
        &ArrangementSpec::random(256, seed),
        wall.vertices(),
        DEFAULT_CLEARANCE,
    )
    .expect("256 obstacles fit the default workspace");

    let cfg = PlannerConfig::for_kind(PlannerKind::Dijkstra).with_seed(seed);
    match generate_toolpath(&wall, &env, &cfg) {
        PgfOutcome::Complete(toolpath) => {
            let report = assess(&toolpath, &MetricOptions::default()).unwrap();
            let leg = &report.per_leg[0];
            println!("waypoints      {}", toolpath.waypoints().len());
            println!("roughness      {:.2} deg", leg.roughness_deg);
            println!("turns          {}", leg.num_turns);
            println!("offset         {:.2} mm", leg.offset_mm);
            println!("rmse           {:.2} mm", leg.rmse_mm);
            println!("path deviation {:.4}", leg.path_deviation);
            println!("run time       {:.4} s", leg.run_time_s);
        }
        PgfOutcome::PartialFailure { failed_pair, reason, .. } => {
            println!("pair {failed_pair} failed: {}", reason.name());
        }
    }
}
