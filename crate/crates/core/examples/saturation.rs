//! Climbs the obstacle ladder for all four planners until none succeeds.
//!
//!     cargo run --release --example saturation [open|closed] [random|periodic]

use pathgen::environment::{ArrangementKind, ArrangementSpec};
use pathgen::experiments::{doubling_ladder, saturate, SaturationSpec, TrialSpec};
use pathgen::pgf::StructureSpec;
use pathgen::planners::{PlannerConfig, PlannerKind};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let structure = match args.get(1).map(String::as_str) {
        Some("closed") => StructureSpec::hexagon_default(),
        _ => StructureSpec::open_default(),
    };
    let kind = match args.get(2).map(String::as_str) {
        Some("periodic") => ArrangementKind::Periodic,
        _ => ArrangementKind::Random,
    };
    let spec = SaturationSpec {
        base: TrialSpec::new(structure, Some(ArrangementSpec::random(1, 0)), PlannerConfig::default()),
        kind,
        planners: PlannerKind::ALL.iter().map(|&k| PlannerConfig::for_kind(k)).collect(),
        ladder: doubling_ladder(2, 1024),
        trials: 20,
        batch_seed: 0,
    };
    let r = saturate(&spec).unwrap();
    print!("{:>8}", "density");
    for p in &r.planners {
        print!("{:>10}", p.name());
    }
    println!();
    for (d, row) in r.densities.iter().zip(&r.cells) {
        print!("{d:>8}");
        for c in row {
            print!("{:>10.2}", c.success_rate);
        }
        println!();
    }
    match r.saturation_density {
        Some(d) => println!("saturation density: {d}"),
        None => println!("no planner succeeded at any density"),
    }
}
