use std::collections::{BTreeSet, BinaryHeap};
use std::time::Instant;

use rand::Rng;

use super::{found, seg_free, valid_query, FailureReason, PlanOutcome, PlannerConfig, PlannerKind, QueueEntry};
use crate::environment::{Environment, DRAWS_PER_OBSTACLE};
use crate::geometry::Point2;
use crate::seed::rng_from_seed;

/// Candidate neighbours of every node: its `k` nearest other nodes,
/// ordered by `(distance, index)`.
pub(crate) fn knn_candidates(nodes: &[Point2], k: usize) -> Vec<Vec<usize>> {
    let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(nodes.len());
    nodes
        .iter()
        .enumerate()
        .map(|(i, p)| {
            scratch.clear();
            scratch.extend(
                nodes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(j, q)| (p.distance_squared(q), j)),
            );
            let take = k.min(scratch.len());
            let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if take < scratch.len() {
                scratch.select_nth_unstable_by(take, by_dist);
                scratch.truncate(take);
            }
            scratch.sort_by(by_dist);
            scratch.iter().map(|&(_, j)| j).collect()
        })
        .collect()
}

/// Probabilistic roadmap: `num_samples` free points drawn uniformly by
/// rejection, plus start and goal, each linked to its `num_neighbors`
/// nearest nodes over free edges no longer than `max_edge_length`. The
/// roadmap is undirected and searched with Dijkstra.
pub fn plan_prm(start: Point2, goal: Point2, env: &Environment, cfg: &PlannerConfig) -> PlanOutcome {
    let started = Instant::now();
    if !valid_query(&start, &goal, env) {
        return PlanOutcome::Failed(FailureReason::InvalidQuery);
    }
    let ws = *env.workspace();
    let mut rng = rng_from_seed(cfg.seed);
    let mut nodes = Vec::with_capacity(cfg.num_samples + 2);
    let budget = DRAWS_PER_OBSTACLE.saturating_mul(cfg.num_samples);
    let mut draws = 0usize;
    while nodes.len() < cfg.num_samples {
        if draws >= budget {
            return PlanOutcome::Failed(FailureReason::IterationCap);
        }
        draws += 1;
        let p = Point2::new(
            rng.gen_range(ws.min_x..ws.max_x),
            rng.gen_range(ws.min_y..ws.max_y),
        );
        if env.is_free(&p) {
            nodes.push(p);
        }
    }
    let start_idx = nodes.len();
    nodes.push(start);
    let goal_idx = nodes.len();
    nodes.push(goal);

    let candidates = knn_candidates(&nodes, cfg.num_neighbors);
    let pairs: BTreeSet<(usize, usize)> = candidates
        .iter()
        .enumerate()
        .flat_map(|(i, nbrs)| nbrs.iter().map(move |&j| (i.min(j), i.max(j))))
        .collect();
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes.len()];
    for (i, j) in pairs {
        let len = nodes[i].distance(&nodes[j]);
        if len <= cfg.max_edge_length && seg_free(env, nodes[i], nodes[j], cfg.path_resolution) {
            adjacency[i].push((j, len));
            adjacency[j].push((i, len));
        }
    }

    let Some(route) = dijkstra(&adjacency, start_idx, goal_idx) else {
        return PlanOutcome::Failed(FailureReason::NoRoute);
    };
    found(route.into_iter().map(|i| nodes[i]).collect(), PlannerKind::Prm, started)
}

fn dijkstra(adjacency: &[Vec<(usize, f64)>], source: usize, target: usize) -> Option<Vec<usize>> {
    let n = adjacency.len();
    let mut cost = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    cost[source] = 0.0;
    heap.push(QueueEntry { key: 0.0, tiebreak: 0.0, node: source });
    while let Some(QueueEntry { node, .. }) = heap.pop() {
        if closed[node] {
            continue;
        }
        closed[node] = true;
        if node == target {
            break;
        }
        for &(next, w) in &adjacency[node] {
            let g = cost[node] + w;
            if !closed[next] && g < cost[next] {
                cost[next] = g;
                parent[next] = node;
                heap.push(QueueEntry { key: g, tiebreak: 0.0, node: next });
            }
        }
    }
    if !closed[target] {
        return None;
    }
    let mut route = vec![target];
    while *route.last().unwrap() != source {
        route.push(parent[*route.last().unwrap()]);
    }
    route.reverse();
    Some(route)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{ArrangementSpec, Workspace};

    fn cfg(seed: u64) -> PlannerConfig {
        PlannerConfig::for_kind(PlannerKind::Prm).with_seed(seed)
    }

    #[test]
    fn free_workspace_with_defaults() {
        let env = Environment::empty(Workspace::default(), 10.0).unwrap();
        let (s, g) = (Point2::new(100., 100.), Point2::new(700., 700.));
        let path = plan_prm(s, g, &env, &cfg(1)).path().cloned().expect("prm failed in free space");
        assert_eq!(path.waypoints[0], s);
        assert_eq!(*path.waypoints.last().unwrap(), g);
        for w in path.waypoints.windows(2) {
            assert!(w[0].distance(&w[1]) <= 410.0);
        }
    }

    #[test]
    fn empty_roadmap_with_long_gap_has_no_route() {
        let env = Environment::empty(Workspace::default(), 10.0).unwrap();
        let mut c = cfg(1);
        c.num_samples = 0;
        assert_eq!(
            plan_prm(Point2::new(100., 100.), Point2::new(700., 700.), &env, &c),
            PlanOutcome::Failed(FailureReason::NoRoute)
        );
        // within edge length the direct link is enough
        let direct = plan_prm(Point2::new(100., 100.), Point2::new(300., 300.), &env, &c);
        assert_eq!(direct.path().unwrap().waypoints.len(), 2);
    }

    #[test]
    fn replayable() {
        let ws = Workspace::default();
        let keep = [Point2::new(100., 100.), Point2::new(700., 700.)];
        let env = Environment::arranged(ws, &ArrangementSpec::random(150, 4), &keep, 10.0).unwrap();
        let a = plan_prm(keep[0], keep[1], &env, &cfg(8));
        let b = plan_prm(keep[0], keep[1], &env, &cfg(8));
        assert_eq!(a.path().map(|p| &p.waypoints), b.path().map(|p| &p.waypoints));
    }

    #[test]
    fn knn_degree_is_bounded() {
        let mut rng = rng_from_seed(5);
        let pts: Vec<Point2> = (0..200)
            .map(|_| Point2::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
            .collect();
        for k in [1, 5, 10, 250] {
            let cand = knn_candidates(&pts, k);
            for (i, c) in cand.iter().enumerate() {
                assert_eq!(c.len(), k.min(199));
                assert!(!c.contains(&i));
                // brute-force check: no excluded node is strictly closer than the farthest kept one
                let far = c.iter().map(|&j| pts[i].distance_squared(&pts[j])).fold(0.0, f64::max);
                let closer = (0..pts.len())
                    .filter(|&j| j != i && !c.contains(&j))
                    .filter(|&j| pts[i].distance_squared(&pts[j]) < far)
                    .count();
                assert_eq!(closer, 0);
            }
        }
    }
}
