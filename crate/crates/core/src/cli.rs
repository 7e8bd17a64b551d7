//! Command-line front end. Flags override values from `--config`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bundle::{self, BundleError, Command, EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_PLANNING};
use crate::config::{parse_obstacles, ConfigError, RunConfig, TimingMode, ValueList};
use crate::environment::ArrangementKind;
use crate::experiments::{SeedPairing, SweepParameter};
use crate::export::{export_toolpath, MoveFormat, ToolpathDocument};
use crate::pgf::StructureSpec;
use crate::planners::PlannerKind;

#[derive(Parser, Debug)]
#[command(name = "pathgen", version, about = "Obstacle-aware toolpath generation and planner benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Plan one toolpath and write its bundle.
    Plan(Common),
    /// Sweep one parameter over a list of values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// num-obstacles, grid-size, expansion-length, num-neighbors or max-edge-length.
        #[arg(long)]
        param: Option<String>,
        /// `start:end:step` or `a,b,c`.
        #[arg(long)]
        values: Option<String>,
        #[arg(long, value_enum)]
        pairing: Option<Pairing>,
    },
    /// Climb an obstacle-density ladder until no planner succeeds.
    Saturate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        arrangement: Option<Arrangement>,
        /// Comma-separated ascending densities.
        #[arg(long)]
        ladder: Option<String>,
        /// Comma-separated planner names.
        #[arg(long)]
        planners: Option<String>,
    },
    /// Run several planners on the same seeded environments.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        planners: Option<String>,
    },
    /// Write the linear-move list of a toolpath JSON file.
    Export {
        toolpath: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun the command recorded in a bundle manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Structure preset: open-default or hexagon-default.
    #[arg(long, alias = "structure")]
    pub preset: Option<String>,
    /// dijkstra, astar, rrt or prm.
    #[arg(long)]
    pub planner: Option<PlannerKind>,
    /// `none`, `random:N` or `periodic:N`.
    #[arg(long)]
    pub obstacles: Option<String>,
    /// Batch seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Obstacle clearance in mm.
    #[arg(long)]
    pub clearance: Option<f64>,
    /// Trials per experiment cell.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub timing: Option<Timing>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Pairing {
    PerValue,
    Paired,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Arrangement {
    Random,
    Periodic,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Timing {
    Wall,
    Omit,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Format {
    Text,
    Json,
}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn planner_list(s: &str) -> Result<Vec<PlannerKind>, ConfigError> {
    s.split(',')
        .map(|p| p.trim().parse::<PlannerKind>().map_err(|e| bad(e.to_string())))
        .collect()
}

impl Common {
    /// Loads `--config` (or the defaults) and applies the flags on top.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.preset {
            cfg.structure = StructureSpec::preset(p).map_err(|e| bad(e.to_string()))?;
        }
        if let Some(k) = self.planner {
            cfg.planner = k;
        }
        if let Some(o) = &self.obstacles {
            cfg.obstacles = parse_obstacles(o)?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(c) = self.clearance {
            cfg.clearance = c;
        }
        if let Some(t) = self.trials {
            cfg.experiment.trials = t;
        }
        if let Some(t) = self.timing {
            cfg.timing = match t {
                Timing::Wall => TimingMode::Wall,
                Timing::Omit => TimingMode::Omit,
            };
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        Ok(cfg)
    }
}

/// Resolves a batch command's configuration from its flags.
pub fn resolve(cmd: &Cmd) -> Result<(Command, RunConfig), ConfigError> {
    let (command, cfg) = match cmd {
        Cmd::Plan(c) => (Command::Plan, c.resolve()?),
        Cmd::Sweep {
            common,
            param,
            values,
            pairing,
        } => {
            let mut cfg = common.resolve()?;
            let s = &mut cfg.experiment.sweep;
            if let Some(p) = param {
                s.parameter = p.parse::<SweepParameter>().map_err(|e| bad(e.to_string()))?;
            }
            if let Some(v) = values {
                s.values = v.parse::<ValueList>().map_err(bad)?;
            }
            if let Some(p) = pairing {
                s.pairing = match p {
                    Pairing::PerValue => SeedPairing::PerValue,
                    Pairing::Paired => SeedPairing::Paired,
                };
            }
            (Command::Sweep, cfg)
        }
        Cmd::Saturate {
            common,
            arrangement,
            ladder,
            planners,
        } => {
            let mut cfg = common.resolve()?;
            let s = &mut cfg.experiment.saturate;
            if let Some(a) = arrangement {
                s.arrangement = match a {
                    Arrangement::Random => ArrangementKind::Random,
                    Arrangement::Periodic => ArrangementKind::Periodic,
                };
            }
            if let Some(l) = ladder {
                s.ladder = l
                    .split(',')
                    .map(|d| d.trim().parse::<usize>().map_err(|_| bad(format!("bad ladder density `{d}`"))))
                    .collect::<Result<_, _>>()?;
            }
            if let Some(p) = planners {
                s.planners = planner_list(p)?;
            }
            (Command::Saturate, cfg)
        }
        Cmd::Compare { common, planners } => {
            let mut cfg = common.resolve()?;
            if let Some(p) = planners {
                cfg.experiment.compare.planners = planner_list(p)?;
            }
            (Command::Compare, cfg)
        }
        Cmd::Export { .. } | Cmd::Replay { .. } => unreachable!("not a batch command"),
    };
    cfg.validate()?;
    Ok((command, cfg))
}

fn report(err: &dyn std::fmt::Display) {
    eprintln!("error: {err}");
}

fn finish(result: Result<bundle::Bundle, BundleError>, dir: &std::path::Path) -> i32 {
    match result {
        Ok(b) if b.planning_failed => {
            eprintln!("planning failed; partial results in {}", dir.display());
            EXIT_PLANNING
        }
        Ok(b) => {
            println!("wrote {} files to {}", b.files.len(), dir.display());
            EXIT_OK
        }
        Err(e) => {
            report(&e);
            e.exit_code()
        }
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match &cli.command {
        Cmd::Export { toolpath, format, out } => {
            let text = match std::fs::read_to_string(toolpath) {
                Ok(t) => t,
                Err(e) => {
                    report(&format!("{}: {e}", toolpath.display()));
                    return EXIT_IO;
                }
            };
            let fmt = match format {
                Format::Text => MoveFormat::Text,
                Format::Json => MoveFormat::Json,
            };
            let rendered = match ToolpathDocument::from_json(&text).and_then(|d| export_toolpath(&d, fmt)) {
                Ok(r) => r,
                Err(e) => {
                    report(&e);
                    return EXIT_CONFIG;
                }
            };
            let written = match out {
                Some(p) => std::fs::write(p, rendered),
                None => std::io::stdout().write_all(rendered.as_bytes()),
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    report(&e);
                    EXIT_IO
                }
            }
        }
        Cmd::Replay { manifest, out } => finish(bundle::replay(manifest, out), out),
        cmd => match resolve(cmd) {
            Ok((command, cfg)) => finish(bundle::run(command, &cfg, &cfg.output_dir), &cfg.output_dir),
            Err(e) => {
                report(&e);
                EXIT_CONFIG
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> (Command, RunConfig) {
        let cli = Cli::try_parse_from(std::iter::once("pathgen").chain(args.iter().copied())).unwrap();
        resolve(&cli.command).unwrap()
    }

    #[test]
    fn plan_flags() {
        let (c, cfg) = parse(&["plan", "--preset", "hexagon-default", "--planner", "astar", "--obstacles", "periodic:128"]);
        assert_eq!(c, Command::Plan);
        assert_eq!(cfg.structure, StructureSpec::hexagon_default());
        assert_eq!(cfg.planner, PlannerKind::AStar);
        assert_eq!(cfg.obstacles.unwrap().count, 128);
    }

    #[test]
    fn sweep_and_saturate_flags() {
        let (_, cfg) = parse(&["sweep", "--param", "grid-size", "--values", "2:20:2", "--pairing", "paired"]);
        assert_eq!(cfg.experiment.sweep.values.0.len(), 10);
        assert_eq!(cfg.experiment.sweep.pairing, SeedPairing::Paired);
        let (_, cfg) = parse(&["saturate", "--structure", "hexagon-default", "--arrangement", "periodic", "--ladder", "2,4,8", "--planners", "rrt,prm"]);
        assert_eq!(cfg.experiment.saturate.ladder, vec![2, 4, 8]);
        assert_eq!(cfg.experiment.saturate.planners, vec![PlannerKind::Rrt, PlannerKind::Prm]);
        assert_eq!(cfg.experiment.saturate.arrangement, ArrangementKind::Periodic);
    }

    #[test]
    fn bad_flags_are_config_errors() {
        assert_eq!(run(["pathgen", "plan", "--obstacles", "lattice:3"]), EXIT_CONFIG);
        assert_eq!(run(["pathgen", "plan", "--preset", "triangle"]), EXIT_CONFIG);
        assert_eq!(run(["pathgen", "frobnicate"]), EXIT_CONFIG);
        assert_eq!(run(["pathgen", "compare", "--planners", "dijkstra,bogus"]), EXIT_CONFIG);
    }
}
