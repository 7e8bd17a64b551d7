//! Plans a closed hexagon through a periodic 128-obstacle lattice with A*
//! and writes the toolpath figure.
//!
//!     cargo run --release --example plan_hexagon [out.svg]

use pathgen::environment::{ArrangementSpec, Environment, Workspace, DEFAULT_CLEARANCE};
use pathgen::metrics::{assess, MetricOptions};
use pathgen::pgf::{generate_toolpath, StructureSpec};
use pathgen::planners::{PlannerConfig, PlannerKind};
use pathgen::svg::toolpath_svg;

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "hexagon.svg".into());
    let hexagon = StructureSpec::hexagon_default();
    let env = Environment::arranged(
        Workspace::default(),
        &ArrangementSpec::periodic(128),
        hexagon.vertices(),
        DEFAULT_CLEARANCE,
    )
    .unwrap();
    println!("{} lattice obstacles after vertex keepout", env.obstacles().len());

    let outcome = generate_toolpath(&hexagon, &env, &PlannerConfig::for_kind(PlannerKind::AStar));
    let toolpath = outcome.toolpath().expect("the periodic 128 hexagon is feasible for A*");
    let report = assess(toolpath, &MetricOptions::default()).unwrap();
    println!("leg  roughness  turns  offset   rmse  deviation");
    for (leg, m) in toolpath.legs.iter().zip(&report.per_leg) {
        println!(
            "V{}-V{} {:9.2} {:6} {:7.2} {:6.2} {:10.4}",
            leg.pair + 1,
            (leg.pair + 1) % 6 + 1,
            m.roughness_deg,
            m.num_turns,
            m.offset_mm,
            m.rmse_mm,
            m.path_deviation
        );
    }
    println!("mean roughness {:.2} deg over {} legs", report.mean.roughness_deg, report.per_leg.len());

    let svg = toolpath_svg(&env, &hexagon, &toolpath.legs, None, "hexagon, periodic:128, astar");
    std::fs::write(&out, svg).unwrap();
    println!("wrote {out}");
}
