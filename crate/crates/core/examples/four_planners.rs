//! Runs all four planners on one start-goal query and compares the raw
//! paths they return.
//!
//!     cargo run --release --example four_planners

use pathgen::environment::{ArrangementSpec, Environment, Workspace};
use pathgen::geometry::Point2;
use pathgen::planners::{plan, PlanOutcome, PlannerConfig, PlannerKind};

fn main() {
    let (start, goal) = (Point2::new(100.0, 100.0), Point2::new(700.0, 700.0));
    let env = Environment::arranged(Workspace::default(), &ArrangementSpec::random(150, 42), &[start, goal], 20.0)
        .unwrap();

    println!("{:<9} {:>9} {:>10} {:>10}", "planner", "waypoints", "length mm", "time ms");
    for kind in PlannerKind::ALL {
        let cfg = PlannerConfig::for_kind(kind).with_seed(7);
        match plan(start, goal, &env, &cfg) {
            PlanOutcome::Found(path) => println!(
                "{:<9} {:>9} {:>10.1} {:>10.3}",
                kind.name(),
                path.waypoints.len(),
                path.length(),
                path.elapsed * 1e3
            ),
            PlanOutcome::Failed(reason) => println!("{:<9} failed: {}", kind.name(), reason.name()),
        }
    }
    println!("straight line: {:.1} mm", start.distance(&goal));
}
