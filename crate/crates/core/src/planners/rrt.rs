use std::time::Instant;

use rand::Rng;

use super::{found, seg_free, valid_query, FailureReason, PlanOutcome, PlannerConfig, PlannerKind};
use crate::environment::Environment;
use crate::geometry::Point2;
use crate::seed::rng_from_seed;

struct TreeNode {
    point: Point2,
    parent: Option<usize>,
}

fn nearest(tree: &[TreeNode], q: &Point2) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, n) in tree.iter().enumerate() {
        let d = n.point.distance_squared(q);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Single-tree RRT grown from `start`.
///
/// Each iteration samples the goal with probability `goal_sample_rate`,
/// otherwise a uniform workspace point, and extends the nearest tree node
/// by at most `expansion_length` toward it when that step is collision
/// free. The search ends once a new node sees the goal through a free
/// segment no longer than `expansion_length`.
pub fn plan_rrt(start: Point2, goal: Point2, env: &Environment, cfg: &PlannerConfig) -> PlanOutcome {
    let started = Instant::now();
    if !valid_query(&start, &goal, env) {
        return PlanOutcome::Failed(FailureReason::InvalidQuery);
    }
    let step = cfg.expansion_length;
    let res = cfg.path_resolution;
    if start.distance(&goal) <= step && seg_free(env, start, goal, res) {
        return found(vec![start, goal], PlannerKind::Rrt, started);
    }

    let ws = *env.workspace();
    let mut rng = rng_from_seed(cfg.seed);
    let mut tree = vec![TreeNode {
        point: start,
        parent: None,
    }];

    for _ in 0..cfg.max_iterations {
        let target = if rng.gen::<f64>() < cfg.goal_sample_rate {
            goal
        } else {
            Point2::new(
                rng.gen_range(ws.min_x..ws.max_x),
                rng.gen_range(ws.min_y..ws.max_y),
            )
        };
        let near = nearest(&tree, &target);
        let from = tree[near].point;
        let d = from.distance(&target);
        if d == 0.0 {
            continue;
        }
        let new = if d <= step {
            target
        } else {
            from.lerp(&target, step / d)
        };
        if !seg_free(env, from, new, res) {
            continue;
        }
        tree.push(TreeNode {
            point: new,
            parent: Some(near),
        });
        if new.distance(&goal) <= step && seg_free(env, new, goal, res) {
            let mut waypoints = Vec::new();
            if new != goal {
                waypoints.push(goal);
            }
            let mut cur = Some(tree.len() - 1);
            while let Some(i) = cur {
                waypoints.push(tree[i].point);
                cur = tree[i].parent;
            }
            waypoints.reverse();
            return found(waypoints, PlannerKind::Rrt, started);
        }
    }
    PlanOutcome::Failed(FailureReason::IterationCap)
}
