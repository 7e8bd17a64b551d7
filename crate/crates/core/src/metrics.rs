//! Path-quality metrics for one leg and their aggregation over a toolpath.
//!
//! A leg is a normalized polyline `p_0 .. p_m` with segments
//! `s_i = p_i -> p_{i+1}`; its chord is the straight segment from `p_0`
//! to `p_m`, i.e. the ideal wall between the two fixed vertices.
//!
//! | metric          | definition                                               |
//! |-----------------|----------------------------------------------------------|
//! | roughness (deg) | mean of `|turn(heading(s_i), heading(s_i+1))|`           |
//! | turns           | number of those turns larger than a tolerance            |
//! | offset (mm)     | largest waypoint distance to the chord                   |
//! | RMSE (mm)       | root mean square of per-segment distance to the chord    |
//! | path deviation  | polyline length over chord length                        |
//! | run time (s)    | planner wall-clock time for the leg                      |

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{heading, point_segment_distance, polyline_length, turn_angle, GeometryError, Point2, Segment};
use crate::pgf::Toolpath;

pub const DEFAULT_TURN_TOLERANCE_DEG: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("leg has no segments")]
    EmptyLeg,
    #[error("leg contains a zero-length segment; normalize it first")]
    DegenerateSegment,
    #[error("leg endpoints coincide, path deviation is undefined")]
    ZeroChord,
}

impl From<GeometryError> for MetricError {
    fn from(_: GeometryError) -> Self {
        MetricError::DegenerateSegment
    }
}

/// Where the per-segment deviation `y_i` used by the RMSE is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviationSample {
    /// Segment midpoint.
    #[default]
    Midpoint,
    /// Segment end point `p_{i+1}`.
    Endpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricOptions {
    pub turn_tolerance_deg: f64,
    pub deviation_sample: DeviationSample,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            turn_tolerance_deg: DEFAULT_TURN_TOLERANCE_DEG,
            deviation_sample: DeviationSample::Midpoint,
        }
    }
}

fn chord(leg: &[Point2]) -> Result<Segment, MetricError> {
    if leg.len() < 2 {
        return Err(MetricError::EmptyLeg);
    }
    Ok(Segment::new(leg[0], leg[leg.len() - 1]))
}

/// Absolute heading changes between consecutive segments.
fn turns(leg: &[Point2]) -> Result<Vec<f64>, MetricError> {
    chord(leg)?;
    let headings = leg
        .windows(2)
        .map(|w| heading(&Segment::new(w[0], w[1])))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(headings
        .windows(2)
        .map(|h| turn_angle(h[0], h[1]).degrees().abs())
        .collect())
}

pub fn roughness(leg: &[Point2]) -> Result<f64, MetricError> {
    let t = turns(leg)?;
    if t.is_empty() {
        return Ok(0.0);
    }
    Ok(t.iter().sum::<f64>() / t.len() as f64)
}

pub fn num_turns(leg: &[Point2], tolerance_deg: f64) -> Result<usize, MetricError> {
    Ok(turns(leg)?.into_iter().filter(|&a| a > tolerance_deg).count())
}

pub fn offset(leg: &[Point2]) -> Result<f64, MetricError> {
    let c = chord(leg)?;
    Ok(leg
        .iter()
        .map(|p| point_segment_distance(p, &c))
        .fold(0.0, f64::max))
}

pub fn rmse(leg: &[Point2], sample: DeviationSample) -> Result<f64, MetricError> {
    let c = chord(leg)?;
    let n = leg.len() - 1;
    let sum: f64 = leg
        .windows(2)
        .map(|w| {
            let p = match sample {
                DeviationSample::Midpoint => w[0].midpoint(&w[1]),
                DeviationSample::Endpoint => w[1],
            };
            let y = point_segment_distance(&p, &c);
            y * y
        })
        .sum();
    Ok((sum / n as f64).sqrt())
}

pub fn path_deviation(leg: &[Point2]) -> Result<f64, MetricError> {
    let c = chord(leg)?;
    let l = c.length();
    if l == 0.0 {
        return Err(MetricError::ZeroChord);
    }
    Ok(polyline_length(leg) / l)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegMetrics {
    pub roughness_deg: f64,
    pub num_turns: usize,
    pub offset_mm: f64,
    pub rmse_mm: f64,
    pub path_deviation: f64,
    pub run_time_s: f64,
}

impl LegMetrics {
    pub fn compute(leg: &[Point2], run_time_s: f64, opts: &MetricOptions) -> Result<Self, MetricError> {
        Ok(LegMetrics {
            roughness_deg: roughness(leg)?,
            num_turns: num_turns(leg, opts.turn_tolerance_deg)?,
            offset_mm: offset(leg)?,
            rmse_mm: rmse(leg, opts.deviation_sample)?,
            path_deviation: path_deviation(leg)?,
            run_time_s,
        })
    }
}

/// Component-wise means; `num_turns` becomes fractional.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricMeans {
    pub roughness_deg: f64,
    pub num_turns: f64,
    pub offset_mm: f64,
    pub rmse_mm: f64,
    pub path_deviation: f64,
    pub run_time_s: f64,
}

impl MetricMeans {
    /// Plain arithmetic mean in iteration order; `None` for no items.
    pub fn mean_of<'a, I>(items: I) -> Option<MetricMeans>
    where
        I: IntoIterator<Item = &'a MetricMeans>,
    {
        let mut acc = MetricMeans::default();
        let mut n = 0usize;
        for m in items {
            acc.roughness_deg += m.roughness_deg;
            acc.num_turns += m.num_turns;
            acc.offset_mm += m.offset_mm;
            acc.rmse_mm += m.rmse_mm;
            acc.path_deviation += m.path_deviation;
            acc.run_time_s += m.run_time_s;
            n += 1;
        }
        if n == 0 {
            return None;
        }
        let k = n as f64;
        Some(MetricMeans {
            roughness_deg: acc.roughness_deg / k,
            num_turns: acc.num_turns / k,
            offset_mm: acc.offset_mm / k,
            rmse_mm: acc.rmse_mm / k,
            path_deviation: acc.path_deviation / k,
            run_time_s: acc.run_time_s / k,
        })
    }
}

impl From<&LegMetrics> for MetricMeans {
    fn from(m: &LegMetrics) -> Self {
        MetricMeans {
            roughness_deg: m.roughness_deg,
            num_turns: m.num_turns as f64,
            offset_mm: m.offset_mm,
            rmse_mm: m.rmse_mm,
            path_deviation: m.path_deviation,
            run_time_s: m.run_time_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_leg: Vec<LegMetrics>,
    pub mean: MetricMeans,
    pub total_run_time_s: f64,
}

/// Metrics for every leg of a complete toolpath plus their means.
pub fn assess(toolpath: &Toolpath, opts: &MetricOptions) -> Result<MetricsReport, MetricError> {
    let per_leg = toolpath
        .legs
        .iter()
        .map(|leg| LegMetrics::compute(&leg.path.waypoints, leg.path.elapsed, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let as_means: Vec<MetricMeans> = per_leg.iter().map(MetricMeans::from).collect();
    let mean = MetricMeans::mean_of(&as_means).ok_or(MetricError::EmptyLeg)?;
    let total_run_time_s = per_leg.iter().map(|m| m.run_time_s).sum();
    Ok(MetricsReport {
        per_leg,
        mean,
        total_run_time_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgf::{Leg, StructureSpec};
    use crate::planners::{Path, PlannerKind};
    use proptest::prelude::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point2> {
        v.iter().map(|&p| p.into()).collect()
    }

    #[test]
    fn roughness_examples() {
        assert_eq!(roughness(&pts(&[(0., 0.), (1., 0.), (2., 0.)])).unwrap(), 0.0);
        assert_eq!(roughness(&pts(&[(0., 0.), (1., 0.), (1., 1.)])).unwrap(), 90.0);
        assert_eq!(roughness(&pts(&[(0., 0.), (1., 0.), (1., 1.), (2., 1.)])).unwrap(), 90.0);
        assert_eq!(roughness(&pts(&[(0., 0.), (5., 5.)])).unwrap(), 0.0);
        assert_eq!(roughness(&pts(&[(0., 0.)])), Err(MetricError::EmptyLeg));
        assert_eq!(
            roughness(&pts(&[(0., 0.), (0., 0.), (1., 0.)])),
            Err(MetricError::DegenerateSegment)
        );
    }

    #[test]
    fn turn_examples() {
        assert_eq!(num_turns(&pts(&[(0., 0.), (1., 0.), (2., 0.)]), 1e-6).unwrap(), 0);
        assert_eq!(num_turns(&pts(&[(0., 0.), (1., 0.), (1., 1.)]), 1e-6).unwrap(), 1);
        // staircase: six segments, five right-angle turns
        let stairs = pts(&[(0., 0.), (1., 0.), (1., 1.), (2., 1.), (2., 2.), (3., 2.), (3., 3.)]);
        let brute = stairs
            .windows(3)
            .filter(|w| {
                let (ax, ay) = (w[1].x - w[0].x, w[1].y - w[0].y);
                let (bx, by) = (w[2].x - w[1].x, w[2].y - w[1].y);
                ax * by - ay * bx != 0.0 || ax * bx + ay * by < 0.0
            })
            .count();
        assert_eq!(brute, 5);
        assert_eq!(num_turns(&stairs, 1e-6).unwrap(), brute);
    }

    #[test]
    fn offset_examples() {
        assert_eq!(offset(&pts(&[(0., 0.), (1., 1.), (2., 2.)])).unwrap(), 0.0);
        assert_eq!(offset(&pts(&[(0., 0.), (1., 1.), (2., 0.)])).unwrap(), 1.0);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&pts(&[(0., 0.), (3., 0.)]), DeviationSample::Midpoint).unwrap(), 0.0);
        let box_leg = pts(&[(0., 0.), (0., 1.), (2., 1.), (2., 0.)]);
        let r = rmse(&box_leg, DeviationSample::Midpoint).unwrap();
        assert!((r - 0.5f64.sqrt()).abs() < 1e-12);
        // endpoint samples (0,1), (2,1), (2,0): sqrt((1 + 1 + 0) / 3)
        let r = rmse(&box_leg, DeviationSample::Endpoint).unwrap();
        assert!((r - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn path_deviation_examples() {
        assert_eq!(path_deviation(&pts(&[(0., 0.), (4., 3.)])).unwrap(), 1.0);
        let l = path_deviation(&pts(&[(0., 0.), (1., 0.), (1., 1.)])).unwrap();
        assert!((l - 2.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(
            path_deviation(&pts(&[(0., 0.), (1., 0.), (0., 0.)])),
            Err(MetricError::ZeroChord)
        );
    }

    fn leg(points: &[(f64, f64)], pair: usize, elapsed: f64) -> Leg {
        Leg {
            pair,
            path: Path {
                waypoints: pts(points),
                planner: PlannerKind::Prm,
                elapsed,
            },
        }
    }

    #[test]
    fn assess_single_straight_leg() {
        let tp = Toolpath {
            legs: vec![leg(&[(100., 100.), (700., 700.)], 0, 0.1)],
            structure: StructureSpec::open_default(),
        };
        let r = assess(&tp, &MetricOptions::default()).unwrap();
        let expected = LegMetrics {
            roughness_deg: 0.0,
            num_turns: 0,
            offset_mm: 0.0,
            rmse_mm: 0.0,
            path_deviation: 1.0,
            run_time_s: 0.1,
        };
        assert_eq!(r.per_leg, vec![expected]);
        assert_eq!(r.mean, MetricMeans::from(&expected));
        assert_eq!(r.total_run_time_s, 0.1);
    }

    #[test]
    fn assess_straight_hexagon() {
        let hex = StructureSpec::hexagon_default();
        let legs = hex
            .pairs()
            .map(|(k, a, b)| leg(&[(a.x, a.y), (b.x, b.y)], k, 0.0))
            .collect();
        let r = assess(&Toolpath { legs, structure: hex }, &MetricOptions::default()).unwrap();
        assert_eq!(r.mean.roughness_deg, 0.0);
        assert_eq!(r.mean.path_deviation, 1.0);
    }

    #[test]
    fn assess_means_match_recomputation() {
        let shapes: [&[(f64, f64)]; 6] = [
            &[(0., 0.), (1., 0.), (1., 1.)],
            &[(0., 0.), (0., 1.), (2., 1.), (2., 0.)],
            &[(0., 0.), (1., 1.), (2., 0.)],
            &[(0., 0.), (3., 0.)],
            &[(0., 0.), (1., 0.), (1., 1.), (2., 1.), (2., 2.)],
            &[(0., 0.), (1., 1.), (2., 0.), (3., 1.), (4., 0.)],
        ];
        let legs: Vec<Leg> = shapes
            .iter()
            .enumerate()
            .map(|(k, s)| leg(s, k, 0.25 * (k + 1) as f64))
            .collect();
        let tp = Toolpath {
            legs,
            structure: StructureSpec::hexagon_default(),
        };
        let r = assess(&tp, &MetricOptions::default()).unwrap();
        // hand values per leg: (roughness, turns, offset, rmse^2, deviation)
        let s2 = 2f64.sqrt();
        let hand = [
            (90.0, 1, 1.0 / s2, 0.125, 2.0 / s2),
            (90.0, 2, 1.0, 0.5, 2.0),
            (90.0, 1, 1.0, 0.25, s2),
            (0.0, 0, 0.0, 0.0, 1.0),
            (90.0, 3, 1.0 / s2, 0.125, s2),
            (90.0, 3, 1.0, 0.25, s2),
        ];
        for (i, h) in hand.iter().enumerate() {
            let m = r.per_leg[i];
            assert!((m.roughness_deg - h.0).abs() < 1e-9, "leg {i}");
            assert_eq!(m.num_turns, h.1, "leg {i}");
            assert!((m.offset_mm - h.2).abs() < 1e-9, "leg {i}");
            assert!((m.rmse_mm - f64::sqrt(h.3)).abs() < 1e-9, "leg {i}");
            assert!((m.path_deviation - h.4).abs() < 1e-9, "leg {i}");
        }
        let hand_mean_roughness = hand.iter().map(|h| h.0).sum::<f64>() / 6.0;
        let hand_mean_turns = hand.iter().map(|h| h.1 as f64).sum::<f64>() / 6.0;
        assert!((r.mean.roughness_deg - hand_mean_roughness).abs() < 1e-9);
        assert!((r.mean.num_turns - hand_mean_turns).abs() < 1e-12);
        let mean = |f: &dyn Fn(&LegMetrics) -> f64| r.per_leg.iter().map(f).sum::<f64>() / 6.0;
        assert!((r.mean.roughness_deg - mean(&|m| m.roughness_deg)).abs() < 1e-12);
        assert!((r.mean.num_turns - mean(&|m| m.num_turns as f64)).abs() < 1e-12);
        assert!((r.mean.rmse_mm - mean(&|m| m.rmse_mm)).abs() < 1e-12);
        assert!((r.mean.run_time_s - 0.875).abs() < 1e-12);
        assert!((r.total_run_time_s - 5.25).abs() < 1e-12);
    }

    fn leg_strategy() -> impl Strategy<Value = Vec<Point2>> {
        prop::collection::vec((-500.0..500.0f64, -500.0..500.0f64), 2..12).prop_map(|v| {
            let mut out: Vec<Point2> = Vec::new();
            for p in v.into_iter().map(Point2::from) {
                if out.last().map_or(true, |q| q.distance(&p) > 1e-6) {
                    out.push(p);
                }
            }
            out
        })
    }

    proptest! {
        #[test]
        fn invariants_hold(leg in leg_strategy()) {
            prop_assume!(leg.len() >= 2 && leg[0].distance(leg.last().unwrap()) > 1e-6);
            let m = LegMetrics::compute(&leg, 0.0, &MetricOptions::default()).unwrap();
            prop_assert!(m.roughness_deg >= 0.0 && m.roughness_deg <= 180.0);
            prop_assert!(m.offset_mm >= 0.0 && m.rmse_mm >= 0.0);
            prop_assert!(m.path_deviation >= 1.0 - 1e-12);
            // offset over waypoints and midpoints bounds the midpoint RMSE
            let c = Segment::new(leg[0], *leg.last().unwrap());
            let union_max = leg.iter().copied()
                .chain(leg.windows(2).map(|w| w[0].midpoint(&w[1])))
                .map(|p| point_segment_distance(&p, &c))
                .fold(0.0, f64::max);
            prop_assert!(m.rmse_mm <= union_max + 1e-9);
            if m.roughness_deg == 0.0 {
                prop_assert_eq!(m.num_turns, 0);
            }
            if m.num_turns == 0 {
                prop_assert!(m.roughness_deg <= DEFAULT_TURN_TOLERANCE_DEG);
            }
        }

        #[test]
        fn invariant_under_rigid_motion(leg in leg_strategy(), theta in 0.0..std::f64::consts::TAU,
                                        tx in -100.0..100.0f64, ty in -100.0..100.0f64) {
            prop_assume!(leg.len() >= 2 && leg[0].distance(leg.last().unwrap()) > 1e-3);
            let (s, c) = theta.sin_cos();
            let moved: Vec<Point2> = leg.iter()
                .map(|p| Point2::new(c * p.x - s * p.y + tx, s * p.x + c * p.y + ty))
                .collect();
            let a = LegMetrics::compute(&leg, 0.0, &MetricOptions::default()).unwrap();
            let b = LegMetrics::compute(&moved, 0.0, &MetricOptions::default()).unwrap();
            prop_assert!((a.roughness_deg - b.roughness_deg).abs() < 1e-6);
            prop_assert!((a.offset_mm - b.offset_mm).abs() < 1e-6);
            prop_assert!((a.rmse_mm - b.rmse_mm).abs() < 1e-6);
            prop_assert!((a.path_deviation - b.path_deviation).abs() < 1e-9);
        }
    }
}
