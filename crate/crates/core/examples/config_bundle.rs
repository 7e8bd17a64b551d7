//! Runs a command from a TOML configuration, writes the result bundle and
//! replays it from its manifest.
//!
//!     cargo run --release --example config_bundle [out-dir]

use std::path::PathBuf;

use pathgen::bundle::{replay, run, Command, MANIFEST};
use pathgen::config::RunConfig;

const CONFIG: &str = r#"
seed = 3
timing = "omit"

[structure]
preset = "hexagon-default"

[obstacles]
kind = "random"
count = 64

[experiment]
trials = 5

[experiment.compare]
planners = ["dijkstra", "astar", "prm"]
"#;

fn main() {
    let out: PathBuf = std::env::args().nth(1).map(Into::into).unwrap_or_else(|| "bundle-example".into());
    let cfg = RunConfig::from_toml_str(CONFIG, "inline").unwrap();
    let bundle = run(Command::Compare, &cfg, &out.join("first")).unwrap();
    for (name, contents) in &bundle.files {
        println!("{name:<16} {:>7} bytes", contents.len());
    }
    println!("{}", bundle.get("comparison.csv").unwrap());

    let again = replay(&out.join("first").join(MANIFEST), &out.join("replay")).unwrap();
    let identical = again.files == bundle.files;
    println!("replay identical: {identical}");
}
