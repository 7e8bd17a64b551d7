//! Success rate and run time of grid Dijkstra as the grid pitch grows,
//! 128 random obstacles, paired seeds.
//!
//!     cargo run --release --example grid_size_sweep [trials]

use pathgen::environment::ArrangementSpec;
use pathgen::experiments::{sweep, SeedPairing, SweepParameter, SweepSpec, TrialSpec};
use pathgen::pgf::StructureSpec;
use pathgen::planners::{PlannerConfig, PlannerKind};

fn main() {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let spec = SweepSpec {
        parameter: SweepParameter::GridSize,
        values: (1..=10).map(|i| 2.0 * i as f64).collect(),
        trials_per_value: trials,
        base: TrialSpec::new(
            StructureSpec::open_default(),
            Some(ArrangementSpec::random(128, 0)),
            PlannerConfig::for_kind(PlannerKind::Dijkstra),
        ),
        batch_seed: 2024,
        pairing: SeedPairing::Paired,
    };
    let result = sweep(&spec).unwrap();
    println!("grid mm  success  mean run time s  mean turns");
    for p in &result.points {
        let s = &p.summary;
        println!(
            "{:7} {:8.2} {:16.5} {:11.1}",
            p.value,
            s.success_rate,
            s.mean_total_run_time_s.unwrap_or(f64::NAN),
            s.means.map_or(f64::NAN, |m| m.num_turns)
        );
    }
}
