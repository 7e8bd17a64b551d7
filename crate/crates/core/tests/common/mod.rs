//! Helpers shared by the integration tests and the acceptance harness.
//! Everything here is written against plain geometry, not the crate's
//! search code, so it can serve as an oracle.

#![allow(dead_code)]

use std::f64::consts::SQRT_2;

use pathgen::environment::{ArrangementSpec, Environment, EnvironmentError, Workspace};
use pathgen::geometry::Point2;
use pathgen::metrics::{LegMetrics, MetricOptions};
use pathgen::pgf::{generate_toolpath, PgfOutcome, StructureSpec};
use pathgen::planners::{PlannerConfig, PlannerKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small grid-search query.
#[derive(Debug, Clone)]
pub struct GridInstance {
    pub workspace: Workspace,
    pub obstacles: Vec<Point2>,
    pub clearance: f64,
    pub pitch: f64,
    pub resolution: f64,
    pub start: Point2,
    pub goal: Point2,
}

impl GridInstance {
    pub fn environment(&self) -> Environment {
        Environment::new(self.workspace, self.obstacles.clone(), self.clearance).unwrap()
    }

    pub fn config(&self, kind: PlannerKind) -> PlannerConfig {
        PlannerConfig {
            grid_size: self.pitch,
            path_resolution: self.resolution,
            ..PlannerConfig::for_kind(kind)
        }
    }

    pub fn node_counts(&self) -> (usize, usize) {
        let count = |lo: f64, hi: f64| {
            let mut n = 0;
            while lo + n as f64 * self.pitch <= hi + 1e-9 {
                n += 1;
            }
            n
        };
        (
            count(self.workspace.min_x, self.workspace.max_x),
            count(self.workspace.min_y, self.workspace.max_y),
        )
    }
}

fn brute_free(obstacles: &[Point2], clearance: f64, ws: &Workspace, p: Point2) -> bool {
    p.x >= ws.min_x
        && p.x <= ws.max_x
        && p.y >= ws.min_y
        && p.y <= ws.max_y
        && obstacles.iter().all(|o| ((o.x - p.x).powi(2) + (o.y - p.y).powi(2)) > clearance * clearance)
}

/// Samples `a -> b` with `ceil(len / res)` equal gaps, starting from the
/// lexicographically smaller endpoint.
fn samples(a: Point2, b: Point2, res: f64) -> Vec<Point2> {
    let (a, b) = if (b.x, b.y) < (a.x, a.y) { (b, a) } else { (a, b) };
    let len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
    if len == 0.0 {
        return vec![a];
    }
    let k = ((len / res).ceil() as usize).max(1);
    let mut out: Vec<Point2> = (0..k)
        .map(|i| {
            let t = i as f64 / k as f64;
            Point2::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
        })
        .collect();
    out.push(b);
    out
}

fn brute_segment_free(obstacles: &[Point2], clearance: f64, ws: &Workspace, a: Point2, b: Point2, res: f64) -> bool {
    samples(a, b, res)
        .into_iter()
        .all(|p| brute_free(obstacles, clearance, ws, p))
}

fn dist(a: Point2, b: Point2) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// Shortest start-to-goal cost on the 8-connected lattice, computed with
/// Bellman-Ford over an explicit edge list. Includes the two straight stubs
/// joining the query points to their nearest reachable free node (ties to
/// the lower node index). `None` when either stub or the route is missing.
pub fn brute_force_cost(inst: &GridInstance) -> Option<f64> {
    let (cols, rows) = inst.node_counts();
    let ws = &inst.workspace;
    let pos = |i: usize| {
        Point2::new(
            ws.min_x + (i % cols) as f64 * inst.pitch,
            ws.min_y + (i / cols) as f64 * inst.pitch,
        )
    };
    let n = cols * rows;
    let free: Vec<bool> = (0..n)
        .map(|i| brute_free(&inst.obstacles, inst.clearance, ws, pos(i)))
        .collect();
    let free_at = |c: i64, r: i64| c >= 0 && r >= 0 && c < cols as i64 && r < rows as i64 && free[r as usize * cols + c as usize];

    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for r in 0..rows as i64 {
        for c in 0..cols as i64 {
            if !free_at(c, r) {
                continue;
            }
            let i = r as usize * cols + c as usize;
            for dc in -1..=1i64 {
                for dr in -1..=1i64 {
                    if (dc, dr) == (0, 0) || !free_at(c + dc, r + dr) {
                        continue;
                    }
                    let diagonal = dc != 0 && dr != 0;
                    if diagonal && !(free_at(c + dc, r) && free_at(c, r + dr)) {
                        continue;
                    }
                    let j = (r + dr) as usize * cols + (c + dc) as usize;
                    if !brute_segment_free(&inst.obstacles, inst.clearance, ws, pos(i), pos(j), inst.resolution) {
                        continue;
                    }
                    let w = if diagonal { inst.pitch * SQRT_2 } else { inst.pitch };
                    edges.push((i, j, w));
                }
            }
        }
    }

    let snap = |p: Point2| -> Option<(usize, f64)> {
        let mut best: Option<(f64, usize)> = None;
        for i in 0..n {
            if !free[i] {
                continue;
            }
            let d = dist(p, pos(i));
            if d > inst.pitch * SQRT_2 + 1e-9 {
                continue;
            }
            if !brute_segment_free(&inst.obstacles, inst.clearance, ws, p, pos(i), inst.resolution) {
                continue;
            }
            if best.map_or(true, |(bd, bi)| d < bd || (d == bd && i < bi)) {
                best = Some((d, i));
            }
        }
        best.map(|(d, i)| (i, d))
    };
    let (s, ds) = snap(inst.start)?;
    let (g, dg) = snap(inst.goal)?;

    let mut cost = vec![f64::INFINITY; n];
    cost[s] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for &(a, b, w) in &edges {
            if cost[a] + w < cost[b] {
                cost[b] = cost[a] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    cost[g].is_finite().then(|| ds + cost[g] + dg)
}

fn random_free_point(rng: &mut ChaCha8Rng, inst: &GridInstance) -> Option<Point2> {
    let ws = &inst.workspace;
    for _ in 0..1000 {
        let p = Point2::new(rng.gen_range(ws.min_x..=ws.max_x), rng.gen_range(ws.min_y..=ws.max_y));
        if brute_free(&inst.obstacles, inst.clearance, ws, p) {
            return Some(p);
        }
    }
    None
}

/// Seeded instances with at most 20 x 20 nodes and 40 obstacles. Pitch,
/// resolution and clearance vary so that some lattice steps need
/// intermediate collision samples and some do not.
pub fn grid_instances(count: usize, seed: u64) -> Vec<GridInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let pitch = [5.0, 8.0, 10.0, 12.0, 20.0][rng.gen_range(0..5)];
        let cols = rng.gen_range(4..=20usize);
        let rows = rng.gen_range(4..=20usize);
        let (ox, oy) = (rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let w = (cols - 1) as f64 * pitch + rng.gen_range(0.0..0.9) * pitch;
        let h = (rows - 1) as f64 * pitch + rng.gen_range(0.0..0.9) * pitch;
        let workspace = Workspace::new(ox, oy, ox + w, oy + h).unwrap();
        let n_obs = rng.gen_range(0..=40usize);
        let obstacles = (0..n_obs)
            .map(|_| Point2::new(rng.gen_range(ox..=ox + w), rng.gen_range(oy..=oy + h)))
            .collect();
        let mut inst = GridInstance {
            workspace,
            obstacles,
            clearance: pitch * rng.gen_range(0.2..1.2),
            pitch,
            resolution: pitch * [0.4, 1.0, 1.3, 2.5][rng.gen_range(0..4)],
            start: Point2::new(0.0, 0.0),
            goal: Point2::new(0.0, 0.0),
        };
        let (Some(s), Some(g)) = (random_free_point(&mut rng, &inst), random_free_point(&mut rng, &inst)) else {
            continue;
        };
        if s == g {
            continue;
        }
        inst.start = s;
        inst.goal = g;
        out.push(inst);
    }
    out
}

/// One randomized end-to-end run: a planner, an arrangement and a short
/// structure, all drawn from `seed`.
#[derive(Debug, Clone)]
pub struct FuzzCase {
    pub structure: StructureSpec,
    pub arrangement: ArrangementSpec,
    pub clearance: f64,
    pub config: PlannerConfig,
}

pub fn fuzz_case(seed: u64) -> FuzzCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = PlannerKind::ALL[rng.gen_range(0..4)];
    let count = rng.gen_range(1..=400usize);
    let arrangement = if rng.gen_bool(0.5) {
        ArrangementSpec::random(count, rng.gen())
    } else {
        ArrangementSpec::periodic(count)
    };
    let n = rng.gen_range(2..=4usize);
    let mut vertices: Vec<Point2> = Vec::with_capacity(n);
    while vertices.len() < n {
        let p = Point2::new(rng.gen_range(60.0..740.0), rng.gen_range(60.0..740.0));
        if vertices.iter().all(|v| dist(*v, p) > 50.0) {
            vertices.push(p);
        }
    }
    let closed = n >= 3 && rng.gen_bool(0.5);
    let mut config = PlannerConfig::for_kind(kind).with_seed(rng.gen());
    config.path_resolution = [10.0, 20.0][rng.gen_range(0..2)];
    FuzzCase {
        structure: StructureSpec::new(vertices, closed).unwrap(),
        arrangement,
        clearance: rng.gen_range(5.0..20.0),
        config,
    }
}

/// The case's environment, or `None` when the arrangement cannot be packed
/// at this clearance.
pub fn fuzz_environment(case: &FuzzCase) -> Option<Environment> {
    match Environment::arranged(Workspace::default(), &case.arrangement, case.structure.vertices(), case.clearance) {
        Ok(env) => Some(env),
        Err(EnvironmentError::Saturated { .. }) => None,
        Err(e) => panic!("{case:?}: {e}"),
    }
}

/// Runs a fuzz case and checks every planned leg. Returns how many legs
/// were checked (`None` for an unpackable arrangement), or a description of
/// the first violation.
pub fn check_fuzz_case(case: &FuzzCase) -> Result<Option<usize>, String> {
    let Some(env) = fuzz_environment(case) else {
        return Ok(None);
    };
    let outcome = generate_toolpath(&case.structure, &env, &case.config);
    let legs = match &outcome {
        PgfOutcome::Complete(t) => &t.legs,
        PgfOutcome::PartialFailure { completed, .. } => completed,
    };
    for leg in legs {
        let (a, b) = case.structure.pair(leg.pair);
        check_leg(&env, &leg.path.waypoints, a, b, case.config.path_resolution)
            .map_err(|e| format!("{} leg {}: {e}", case.config.kind, leg.pair))?;
    }
    Ok(Some(legs.len()))
}

/// Collision-free at `res`, endpoint-exact, and metric invariants.
pub fn check_leg(env: &Environment, pts: &[Point2], a: Point2, b: Point2, res: f64) -> Result<(), String> {
    if pts.len() < 2 {
        return Err(format!("{} waypoints", pts.len()));
    }
    if pts[0] != a || pts[pts.len() - 1] != b {
        return Err(format!("endpoints {:?} .. {:?}, expected {a:?} .. {b:?}", pts[0], pts[pts.len() - 1]));
    }
    for w in pts.windows(2) {
        if !brute_segment_free(env.obstacles(), env.clearance(), env.workspace(), w[0], w[1], res) {
            return Err(format!("segment {:?} -> {:?} collides", w[0], w[1]));
        }
    }
    let m = LegMetrics::compute(pts, 0.0, &MetricOptions::default()).map_err(|e| e.to_string())?;
    if !(m.roughness_deg >= 0.0 && m.offset_mm >= 0.0 && m.rmse_mm >= 0.0) {
        return Err(format!("negative metric {m:?}"));
    }
    let bound = deviation_bound(pts);
    if m.rmse_mm > bound + 1e-9 {
        return Err(format!("rmse {} above max sampled deviation {bound}", m.rmse_mm));
    }
    if m.path_deviation < 1.0 - 1e-12 {
        return Err(format!("path deviation {} below 1", m.path_deviation));
    }
    Ok(())
}

/// Largest distance to the chord over waypoints and segment midpoints.
pub fn deviation_bound(pts: &[Point2]) -> f64 {
    let (a, b) = (pts[0], pts[pts.len() - 1]);
    let to_chord = |p: Point2| {
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let l2 = dx * dx + dy * dy;
        let t = if l2 == 0.0 { 0.0 } else { (((p.x - a.x) * dx + (p.y - a.y) * dy) / l2).clamp(0.0, 1.0) };
        dist(p, Point2::new(a.x + t * dx, a.y + t * dy))
    };
    let mids = pts.windows(2).map(|w| Point2::new((w[0].x + w[1].x) / 2.0, (w[0].y + w[1].y) / 2.0));
    pts.iter().copied().chain(mids).map(to_chord).fold(0.0, f64::max)
}
