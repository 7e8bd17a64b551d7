//! A user-defined closed square with an inner obstacle cluster, planned
//! with PRM.
//!
//!     cargo run --release --example custom_structure

use pathgen::environment::{Environment, Workspace};
use pathgen::geometry::Point2;
use pathgen::metrics::{assess, MetricOptions};
use pathgen::pgf::{generate_toolpath, PgfOutcome, StructureSpec};
use pathgen::planners::{PlannerConfig, PlannerKind};

fn main() {
    let square = StructureSpec::new(
        vec![
            Point2::new(150.0, 150.0),
            Point2::new(650.0, 150.0),
            Point2::new(650.0, 650.0),
            Point2::new(150.0, 650.0),
        ],
        true,
    )
    .unwrap();
    // a row of obstacles across each side of the square
    let mut obstacles = Vec::new();
    for k in 0..5 {
        let t = 250.0 + 75.0 * k as f64;
        obstacles.extend([
            Point2::new(t, 150.0),
            Point2::new(650.0, t),
            Point2::new(t, 650.0),
            Point2::new(150.0, t),
        ]);
    }
    let env = Environment::new(Workspace::default(), obstacles, 15.0).unwrap();

    let cfg = PlannerConfig::for_kind(PlannerKind::Prm).with_seed(9);
    match generate_toolpath(&square, &env, &cfg) {
        PgfOutcome::Complete(tp) => {
            let r = assess(&tp, &MetricOptions::default()).unwrap();
            for (k, m) in r.per_leg.iter().enumerate() {
                println!("side {k}: deviation {:.3}, offset {:.1} mm, {} turns", m.path_deviation, m.offset_mm, m.num_turns);
            }
        }
        PgfOutcome::PartialFailure { failed_pair, reason, .. } => {
            println!("side {failed_pair} failed: {}", reason.name())
        }
    }
}
