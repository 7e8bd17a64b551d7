//! Path-quality metrics on small hand-made legs.
//!
//!     cargo run --example metrics_walkthrough

use pathgen::geometry::Point2;
use pathgen::metrics::{DeviationSample, LegMetrics, MetricOptions};

fn show(name: &str, pts: &[(f64, f64)], opts: &MetricOptions) {
    let leg: Vec<Point2> = pts.iter().map(|&p| p.into()).collect();
    let m = LegMetrics::compute(&leg, 0.0, opts).unwrap();
    println!(
        "{name:<10} roughness {:6.2} deg  turns {}  offset {:6.3}  rmse {:6.3}  deviation {:.4}",
        m.roughness_deg, m.num_turns, m.offset_mm, m.rmse_mm, m.path_deviation
    );
}

fn main() {
    let mid = MetricOptions::default();
    show("straight", &[(0.0, 0.0), (10.0, 0.0)], &mid);
    show("L-turn", &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)], &mid);
    show("box", &[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)], &mid);
    show("zigzag", &[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 0.0)], &mid);
    show("staircase", &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (3.0, 2.0), (3.0, 3.0)], &mid);

    // RMSE sampled at segment end points instead of midpoints
    let end = MetricOptions {
        deviation_sample: DeviationSample::Endpoint,
        ..mid
    };
    show("box (end)", &[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)], &end);
}
