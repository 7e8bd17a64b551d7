//! Dijkstra and A* over an 8-connected lattice anchored at the workspace
//! minimum corner. Axis moves cost one pitch, diagonals `pitch * sqrt(2)`.
//! A diagonal is only allowed when both axis neighbours it passes between
//! are free, so paths never cut a corner through an obstacle's clearance.

use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;
use std::time::Instant;

use super::{found, seg_free, valid_query, FailureReason, PlanOutcome, PlannerConfig, PlannerKind, QueueEntry};
use crate::environment::{Environment, Workspace};
use crate::geometry::Point2;

/// Lattice geometry: node `(c, r)` sits at `(min_x + c * pitch, min_y + r * pitch)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: Point2,
    pub pitch: f64,
    pub cols: usize,
    pub rows: usize,
}

impl GridSpec {
    pub fn new(ws: &Workspace, pitch: f64) -> Self {
        let count = |extent: f64| (extent / pitch + 1e-9).floor() as usize + 1;
        GridSpec {
            origin: Point2::new(ws.min_x, ws.min_y),
            pitch,
            cols: count(ws.width()),
            rows: count(ws.height()),
        }
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.cols + col
    }

    pub fn position(&self, idx: usize) -> Point2 {
        let (c, r) = (idx % self.cols, idx / self.cols);
        Point2::new(
            self.origin.x + c as f64 * self.pitch,
            self.origin.y + r as f64 * self.pitch,
        )
    }
}

// Fixed expansion order keeps equal-cost searches reproducible.
const MOVES: [(i64, i64); 8] = [
    (1, 0),
    (0, 1),
    (-1, 0),
    (0, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
    (1, -1),
];

struct SearchGraph<'a> {
    spec: GridSpec,
    env: &'a Environment,
    resolution: f64,
    free: Vec<bool>,
}

impl<'a> SearchGraph<'a> {
    fn new(env: &'a Environment, cfg: &PlannerConfig) -> Self {
        let spec = GridSpec::new(env.workspace(), cfg.grid_size);
        let free = (0..spec.len())
            .map(|i| env.is_free(&spec.position(i)))
            .collect();
        SearchGraph {
            spec,
            env,
            resolution: cfg.path_resolution,
            free,
        }
    }

    fn free_at(&self, c: i64, r: i64) -> bool {
        c >= 0
            && r >= 0
            && (c as usize) < self.spec.cols
            && (r as usize) < self.spec.rows
            && self.free[self.spec.index(c as usize, r as usize)]
    }

    fn neighbors(&self, idx: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let (c, r) = ((idx % self.spec.cols) as i64, (idx / self.spec.cols) as i64);
        let p = self.spec.position(idx);
        for (dc, dr) in MOVES {
            let (nc, nr) = (c + dc, r + dr);
            if !self.free_at(nc, nr) {
                continue;
            }
            let diagonal = dc != 0 && dr != 0;
            if diagonal && !(self.free_at(c + dc, r) && self.free_at(c, r + dr)) {
                continue;
            }
            let step = if diagonal {
                self.spec.pitch * SQRT_2
            } else {
                self.spec.pitch
            };
            let n = self.spec.index(nc as usize, nr as usize);
            // a step no longer than the resolution is sampled at its two
            // (already free) endpoints only
            if step > self.resolution && !seg_free(self.env, p, self.spec.position(n), self.resolution) {
                continue;
            }
            out.push((n, step));
        }
    }

    /// Nearest free node reachable from `p` by a free straight stub, looking
    /// only at nodes within one cell diagonal.
    fn snap(&self, p: &Point2) -> Option<usize> {
        let pitch = self.spec.pitch;
        let c0 = ((p.x - self.spec.origin.x) / pitch).floor() as i64;
        let r0 = ((p.y - self.spec.origin.y) / pitch).floor() as i64;
        let reach = pitch * SQRT_2 + 1e-9;
        let mut candidates: Vec<(f64, usize)> = Vec::new();
        for r in r0 - 1..=r0 + 2 {
            for c in c0 - 1..=c0 + 2 {
                if !self.free_at(c, r) {
                    continue;
                }
                let idx = self.spec.index(c as usize, r as usize);
                let d = self.spec.position(idx).distance(p);
                if d <= reach {
                    candidates.push((d, idx));
                }
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        candidates
            .into_iter()
            .find(|&(_, idx)| seg_free(self.env, *p, self.spec.position(idx), self.resolution))
            .map(|(_, idx)| idx)
    }

    /// Best-first search; `heuristic = None` is plain Dijkstra.
    fn search(&self, source: usize, target: usize, heuristic: Option<&dyn Fn(usize) -> f64>) -> Option<Vec<usize>> {
        let n = self.spec.len();
        let mut cost = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut closed = vec![false; n];
        let mut heap = BinaryHeap::new();
        let h = |i: usize| heuristic.map_or(0.0, |f| f(i));
        let entry = |g: f64, i: usize| match heuristic {
            None => QueueEntry { key: g, tiebreak: 0.0, node: i },
            Some(_) => {
                let hi = h(i);
                QueueEntry { key: g + hi, tiebreak: hi, node: i }
            }
        };

        cost[source] = 0.0;
        heap.push(entry(0.0, source));
        let mut buf = Vec::with_capacity(8);
        while let Some(QueueEntry { node, .. }) = heap.pop() {
            if closed[node] {
                continue;
            }
            closed[node] = true;
            if node == target {
                break;
            }
            self.neighbors(node, &mut buf);
            for &(next, step) in &buf {
                if closed[next] {
                    continue;
                }
                let g = cost[node] + step;
                if g < cost[next] {
                    cost[next] = g;
                    parent[next] = node;
                    heap.push(entry(g, next));
                }
            }
        }
        if !closed[target] {
            return None;
        }
        let mut route = vec![target];
        let mut cur = target;
        while cur != source {
            cur = parent[cur];
            route.push(cur);
        }
        route.reverse();
        Some(route)
    }
}

fn plan_on_grid(
    start: Point2,
    goal: Point2,
    env: &Environment,
    cfg: &PlannerConfig,
    kind: PlannerKind,
) -> PlanOutcome {
    let started = Instant::now();
    if !valid_query(&start, &goal, env) {
        return PlanOutcome::Failed(FailureReason::InvalidQuery);
    }
    let graph = SearchGraph::new(env, cfg);
    let (Some(s), Some(g)) = (graph.snap(&start), graph.snap(&goal)) else {
        return PlanOutcome::Failed(FailureReason::NoRoute);
    };
    let goal_pos = graph.spec.position(g);
    let heuristic = move |i: usize| graph.spec.position(i).distance(&goal_pos);
    let route = match kind {
        PlannerKind::AStar => graph.search(s, g, Some(&heuristic)),
        _ => graph.search(s, g, None),
    };
    let Some(route) = route else {
        return PlanOutcome::Failed(FailureReason::NoRoute);
    };

    let mut waypoints = Vec::with_capacity(route.len() + 2);
    waypoints.push(start);
    for idx in route {
        let p = graph.spec.position(idx);
        if *waypoints.last().unwrap() != p {
            waypoints.push(p);
        }
    }
    if *waypoints.last().unwrap() != goal {
        waypoints.push(goal);
    }
    found(waypoints, kind, started)
}

/// Minimum-cost path on the 8-connected grid of pitch `cfg.grid_size`, with
/// the exact query points joined to their snapped grid nodes.
pub fn plan_dijkstra(start: Point2, goal: Point2, env: &Environment, cfg: &PlannerConfig) -> PlanOutcome {
    plan_on_grid(start, goal, env, cfg, PlannerKind::Dijkstra)
}

/// Same graph and cost as [`plan_dijkstra`], searched with the Euclidean
/// distance to the goal node as heuristic. Ties break on `(f, h, node)`.
pub fn plan_astar(start: Point2, goal: Point2, env: &Environment, cfg: &PlannerConfig) -> PlanOutcome {
    plan_on_grid(start, goal, env, cfg, PlannerKind::AStar)
}
