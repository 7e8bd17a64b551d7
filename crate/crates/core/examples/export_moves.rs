//! Turns a planned hexagon into a linear-move program, as text and JSON.
//!
//!     cargo run --release --example export_moves

use pathgen::config::TimingMode;
use pathgen::environment::{ArrangementSpec, Environment, Workspace, DEFAULT_CLEARANCE};
use pathgen::export::{export_toolpath, MoveFormat, ToolpathDocument};
use pathgen::pgf::{generate_toolpath, StructureSpec};
use pathgen::planners::{PlannerConfig, PlannerKind};

fn main() {
    let hexagon = StructureSpec::hexagon_default();
    let env = Environment::arranged(
        Workspace::default(),
        &ArrangementSpec::random(64, 3),
        hexagon.vertices(),
        DEFAULT_CLEARANCE,
    )
    .unwrap();
    let cfg = PlannerConfig::for_kind(PlannerKind::Dijkstra);
    let outcome = generate_toolpath(&hexagon, &env, &cfg);
    let doc = ToolpathDocument::from_outcome(&outcome, &hexagon, cfg.kind, "example", TimingMode::Omit);

    match export_toolpath(&doc, MoveFormat::Text) {
        Ok(text) => {
            let lines: Vec<&str> = text.lines().collect();
            println!("{} moves", lines.len());
            for l in lines.iter().take(5) {
                println!("{l}");
            }
            println!("...");
            println!("{}", lines.last().unwrap());
            let json = export_toolpath(&doc, MoveFormat::Json).unwrap();
            println!("json variant: {} bytes", json.len());
        }
        Err(e) => println!("cannot export: {e}"),
    }
}
