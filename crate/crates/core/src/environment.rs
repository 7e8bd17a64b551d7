//! Workspace, point obstacles and collision queries, plus the random and
//! periodic obstacle arrangements used by the experiments.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{densify, GeometryError, Point2, Segment};
use crate::seed::rng_from_seed;

/// Default collision clearance around every point obstacle (mm).
pub const DEFAULT_CLEARANCE: f64 = 20.0;
/// Default distance kept between generated obstacles and the workspace edge (mm).
pub const DEFAULT_MARGIN: f64 = 50.0;
/// Rejection-sampling budget per requested obstacle.
pub const DRAWS_PER_OBSTACLE: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvironmentError {
    #[error("invalid workspace: need max_x > min_x and max_y > min_y, got x {min_x}..{max_x}, y {min_y}..{max_y}")]
    InvalidWorkspace {
        min_x: f64,
        min_y: f64,
        max_x: f64,
        max_y: f64,
    },
    #[error("clearance must be positive, got {0}")]
    InvalidClearance(f64),
    #[error("obstacle ({x}, {y}) lies outside the workspace")]
    ObstacleOutside { x: f64, y: f64 },
    #[error("margin {margin} leaves no room for obstacles in the workspace")]
    MarginTooLarge { margin: f64 },
    #[error("arrangement count must be at least 1")]
    EmptyArrangement,
    #[error("workspace saturated: cannot place {count} obstacles")]
    Saturated { count: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWorkspace")]
pub struct Workspace {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

#[derive(Deserialize)]
struct RawWorkspace {
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
}

impl TryFrom<RawWorkspace> for Workspace {
    type Error = EnvironmentError;

    fn try_from(r: RawWorkspace) -> Result<Self, Self::Error> {
        Workspace::new(r.min_x, r.min_y, r.max_x, r.max_y)
    }
}

impl Default for Workspace {
    /// The 800 mm x 800 mm print bed.
    fn default() -> Self {
        Workspace {
            min_x: 0.0,
            min_y: 0.0,
            max_x: 800.0,
            max_y: 800.0,
        }
    }
}

impl Workspace {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self, EnvironmentError> {
        let ok = [min_x, min_y, max_x, max_y].iter().all(|v| v.is_finite())
            && max_x > min_x
            && max_y > min_y;
        if !ok {
            return Err(EnvironmentError::InvalidWorkspace {
                min_x,
                min_y,
                max_x,
                max_y,
            });
        }
        Ok(Workspace {
            min_x,
            min_y,
            max_x,
            max_y,
        })
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn center(&self) -> Point2 {
        Point2::new(
            (self.min_x + self.max_x) * 0.5,
            (self.min_y + self.max_y) * 0.5,
        )
    }

    pub fn contains(&self, p: &Point2) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    /// The workspace shrunk by `margin` on all sides. A zero-width result is
    /// allowed (a line or a point); a negative one is an error.
    pub fn shrink(&self, margin: f64) -> Result<Workspace, EnvironmentError> {
        let shrunk = Workspace {
            min_x: self.min_x + margin,
            min_y: self.min_y + margin,
            max_x: self.max_x - margin,
            max_y: self.max_y - margin,
        };
        if !(margin >= 0.0) || shrunk.max_x < shrunk.min_x || shrunk.max_y < shrunk.min_y {
            return Err(EnvironmentError::MarginTooLarge { margin });
        }
        Ok(shrunk)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrangementKind {
    Random,
    Periodic,
}

impl std::fmt::Display for ArrangementKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ArrangementKind::Random => "random",
            ArrangementKind::Periodic => "periodic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrangementSpec {
    pub kind: ArrangementKind,
    pub count: usize,
    /// Only used by random arrangements.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

impl ArrangementSpec {
    pub fn random(count: usize, seed: u64) -> Self {
        ArrangementSpec {
            kind: ArrangementKind::Random,
            count,
            seed,
            margin: DEFAULT_MARGIN,
        }
    }

    pub fn periodic(count: usize) -> Self {
        ArrangementSpec {
            kind: ArrangementKind::Periodic,
            count,
            seed: 0,
            margin: DEFAULT_MARGIN,
        }
    }

    /// Generates the obstacle points for this spec, keeping every obstacle
    /// more than `clearance` away from the `keepout` vertices. Random
    /// arrangements redraw offending points; periodic lattices drop those
    /// cells, so they may hold fewer than `count` obstacles.
    pub fn generate(
        &self,
        ws: &Workspace,
        keepout: &[Point2],
        clearance: f64,
    ) -> Result<Vec<Point2>, EnvironmentError> {
        match self.kind {
            ArrangementKind::Random => random_arrangement(self, ws, keepout, clearance),
            ArrangementKind::Periodic => {
                let mut cells = periodic_arrangement(self, ws)?;
                cells.retain(|p| keepout.iter().all(|k| k.distance(p) > clearance));
                Ok(cells)
            }
        }
    }
}

/// Draws `spec.count` obstacles uniformly inside the workspace shrunk by
/// `spec.margin`, redrawing any point within `clearance` of a keepout vertex.
///
/// Fails with [`EnvironmentError::Saturated`] when the clearance discs of
/// the requested obstacles would have a total area larger than the
/// placement region, or when rejection sampling runs out of draws.
pub fn random_arrangement(
    spec: &ArrangementSpec,
    ws: &Workspace,
    keepout: &[Point2],
    clearance: f64,
) -> Result<Vec<Point2>, EnvironmentError> {
    if spec.count == 0 {
        return Err(EnvironmentError::EmptyArrangement);
    }
    if !(clearance > 0.0) {
        return Err(EnvironmentError::InvalidClearance(clearance));
    }
    let region = ws.shrink(spec.margin)?;
    let region_area = region.width() * region.height();
    if spec.count as f64 * PI * clearance * clearance > region_area {
        return Err(EnvironmentError::Saturated { count: spec.count });
    }

    let mut rng = rng_from_seed(spec.seed);
    let mut draw = |lo: f64, hi: f64| {
        if hi > lo {
            rng.gen_range(lo..hi)
        } else {
            lo
        }
    };
    let budget = DRAWS_PER_OBSTACLE.saturating_mul(spec.count);
    let mut points = Vec::with_capacity(spec.count);
    let mut draws = 0usize;
    while points.len() < spec.count {
        if draws >= budget {
            return Err(EnvironmentError::Saturated { count: spec.count });
        }
        draws += 1;
        let x = draw(region.min_x, region.max_x);
        let y = draw(region.min_y, region.max_y);
        let p = Point2::new(x, y);
        if keepout.iter().all(|k| k.distance(&p) > clearance) {
            points.push(p);
        }
    }
    Ok(points)
}

/// Lattice geometry used by [`periodic_arrangement`]: `(columns, rows)`.
pub fn lattice_shape(count: usize) -> (usize, usize) {
    if count == 0 {
        return (0, 0);
    }
    let mut cols = (count as f64).sqrt().ceil() as usize;
    // guard against sqrt rounding for perfect squares
    while cols > 1 && (cols - 1) * (cols - 1) >= count {
        cols -= 1;
    }
    while cols * cols < count {
        cols += 1;
    }
    let rows = count.div_ceil(cols);
    (cols, rows)
}

/// Places `spec.count` obstacles row-major on a near-square lattice that
/// spans the workspace minus the margin. Rows and columns with a single
/// entry sit on the workspace centre line.
pub fn periodic_arrangement(
    spec: &ArrangementSpec,
    ws: &Workspace,
) -> Result<Vec<Point2>, EnvironmentError> {
    if spec.count == 0 {
        return Err(EnvironmentError::EmptyArrangement);
    }
    let region = ws.shrink(spec.margin)?;
    let (cols, rows) = lattice_shape(spec.count);
    let center = region.center();
    let coord = |lo: f64, extent: f64, n: usize, i: usize, mid: f64| {
        if n == 1 {
            mid
        } else {
            lo + extent * i as f64 / (n - 1) as f64
        }
    };
    let points = (0..spec.count)
        .map(|k| {
            let (r, c) = (k / cols, k % cols);
            Point2::new(
                coord(region.min_x, region.width(), cols, c, center.x),
                coord(region.min_y, region.height(), rows, r, center.y),
            )
        })
        .collect();
    Ok(points)
}

/// Uniform bucket grid over the obstacles for clearance queries.
#[derive(Debug, Clone)]
struct ObstacleIndex {
    origin: Point2,
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<u32>>,
}

impl ObstacleIndex {
    fn build(ws: &Workspace, obstacles: &[Point2], clearance: f64) -> Self {
        let cell = clearance.max(ws.width().max(ws.height()) / 512.0);
        let cols = ((ws.width() / cell).floor() as usize + 1).max(1);
        let rows = ((ws.height() / cell).floor() as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); cols * rows];
        let origin = Point2::new(ws.min_x, ws.min_y);
        let mut index = ObstacleIndex {
            origin,
            cell,
            cols,
            rows,
            buckets: Vec::new(),
        };
        for (i, o) in obstacles.iter().enumerate() {
            let (c, r) = index.cell_of(o);
            buckets[r * cols + c].push(i as u32);
        }
        index.buckets = buckets;
        index
    }

    fn cell_of(&self, p: &Point2) -> (usize, usize) {
        let c = ((p.x - self.origin.x) / self.cell).floor();
        let r = ((p.y - self.origin.y) / self.cell).floor();
        (
            (c.max(0.0) as usize).min(self.cols - 1),
            (r.max(0.0) as usize).min(self.rows - 1),
        )
    }

    /// Calls `f` with every obstacle index in buckets overlapping the square
    /// of half-width `radius` around `p`; stops early when `f` returns false.
    fn any_within<F: FnMut(u32) -> bool>(&self, p: &Point2, radius: f64, mut f: F) -> bool {
        let lo = self.cell_of(&Point2::new(p.x - radius, p.y - radius));
        let hi = self.cell_of(&Point2::new(p.x + radius, p.y + radius));
        for r in lo.1..=hi.1 {
            for c in lo.0..=hi.0 {
                for &i in &self.buckets[r * self.cols + c] {
                    if f(i) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// The world a planner queries: workspace bounds, point obstacles and the
/// clearance every path point must keep from them. Immutable once built.
#[derive(Debug, Clone)]
pub struct Environment {
    workspace: Workspace,
    obstacles: Vec<Point2>,
    clearance: f64,
    index: ObstacleIndex,
}

impl Environment {
    pub fn new(
        workspace: Workspace,
        obstacles: Vec<Point2>,
        clearance: f64,
    ) -> Result<Self, EnvironmentError> {
        if !(clearance > 0.0) || !clearance.is_finite() {
            return Err(EnvironmentError::InvalidClearance(clearance));
        }
        if let Some(o) = obstacles.iter().find(|o| !workspace.contains(o)) {
            return Err(EnvironmentError::ObstacleOutside { x: o.x, y: o.y });
        }
        let index = ObstacleIndex::build(&workspace, &obstacles, clearance);
        Ok(Environment {
            workspace,
            obstacles,
            clearance,
            index,
        })
    }

    pub fn empty(workspace: Workspace, clearance: f64) -> Result<Self, EnvironmentError> {
        Environment::new(workspace, Vec::new(), clearance)
    }

    /// Builds an environment from an arrangement, keeping obstacles away
    /// from the structure vertices (see [`ArrangementSpec::generate`]).
    pub fn arranged(
        workspace: Workspace,
        spec: &ArrangementSpec,
        keepout: &[Point2],
        clearance: f64,
    ) -> Result<Self, EnvironmentError> {
        let obstacles = spec.generate(&workspace, keepout, clearance)?;
        Environment::new(workspace, obstacles, clearance)
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    pub fn obstacles(&self) -> &[Point2] {
        &self.obstacles
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    /// Inside the workspace and strictly farther than the clearance from
    /// every obstacle.
    pub fn is_free(&self, p: &Point2) -> bool {
        if !self.workspace.contains(p) {
            return false;
        }
        let c2 = self.clearance * self.clearance;
        !self.index.any_within(p, self.clearance, |i| {
            self.obstacles[i as usize].distance_squared(p) <= c2
        })
    }

    /// Every densified sample of `s` at `resolution` is free.
    pub fn segment_free(&self, s: &Segment, resolution: f64) -> Result<bool, GeometryError> {
        // sample from the lexicographically smaller endpoint so both
        // directions test bit-identical points
        let canonical = if (s.b.x, s.b.y) < (s.a.x, s.a.y) {
            s.reversed()
        } else {
            *s
        };
        Ok(densify(&canonical, resolution)?
            .iter()
            .all(|p| self.is_free(p)))
    }

    /// Distance from `p` to the nearest obstacle (infinite when there are none).
    pub fn nearest_obstacle_distance(&self, p: &Point2) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.distance(p))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ws() -> Workspace {
        Workspace::default()
    }

    fn brute_is_free(env: &Environment, p: &Point2) -> bool {
        env.workspace().contains(p)
            && env.obstacles().iter().all(|o| o.distance(p) > env.clearance())
    }

    #[test]
    fn workspace_validation() {
        assert!(Workspace::new(0., 0., 0., 10.).is_err());
        assert!(Workspace::new(0., 0., 10., -1.).is_err());
        assert!(Workspace::new(0., 0., f64::NAN, 10.).is_err());
        assert!(ws().shrink(400.0).is_ok());
        assert!(ws().shrink(401.0).is_err());
    }

    #[test]
    fn random_arrangement_is_deterministic() {
        let spec = ArrangementSpec::random(1, 7);
        let a = random_arrangement(&spec, &ws(), &[], 10.0).unwrap();
        let b = random_arrangement(&spec, &ws(), &[], 10.0).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a, b);
        assert!(ws().contains(&a[0]));
    }

    #[test]
    fn random_arrangement_respects_keepout() {
        let keepout = [Point2::new(100., 100.), Point2::new(700., 700.)];
        for seed in 0..20 {
            let pts = random_arrangement(&ArrangementSpec::random(256, seed), &ws(), &keepout, 10.0)
                .unwrap();
            assert_eq!(pts.len(), 256);
            for p in &pts {
                assert!(keepout.iter().all(|k| k.distance(p) > 10.0));
                assert!(p.x >= 50.0 && p.x <= 750.0 && p.y >= 50.0 && p.y <= 750.0);
            }
        }
    }

    #[test]
    fn random_arrangement_saturates() {
        let err = random_arrangement(&ArrangementSpec::random(1_000_000, 1), &ws(), &[], 10.0)
            .unwrap_err();
        assert_eq!(err, EnvironmentError::Saturated { count: 1_000_000 });

        // a keepout that covers the whole placement region exhausts the draw budget
        let mut spec = ArrangementSpec::random(3, 1);
        spec.margin = 395.0;
        let err = random_arrangement(&spec, &ws(), &[Point2::new(400., 400.)], 10.0).unwrap_err();
        assert_eq!(err, EnvironmentError::Saturated { count: 3 });
    }

    #[test]
    fn different_seeds_give_different_arrangements() {
        for s in 0..100u64 {
            let a = random_arrangement(&ArrangementSpec::random(8, 2 * s), &ws(), &[], 10.0).unwrap();
            let b = random_arrangement(&ArrangementSpec::random(8, 2 * s + 1), &ws(), &[], 10.0)
                .unwrap();
            assert_ne!(a, b);
        }
    }

    #[test]
    fn periodic_examples() {
        let mut spec = ArrangementSpec::periodic(4);
        spec.margin = 100.0;
        let pts = periodic_arrangement(&spec, &ws()).unwrap();
        assert_eq!(
            pts,
            vec![
                Point2::new(100., 100.),
                Point2::new(700., 100.),
                Point2::new(100., 700.),
                Point2::new(700., 700.)
            ]
        );

        let one = periodic_arrangement(&ArrangementSpec::periodic(1), &ws()).unwrap();
        assert_eq!(one, vec![Point2::new(400., 400.)]);

        assert_eq!(lattice_shape(128), (12, 11));
        assert_eq!(lattice_shape(64), (8, 8));
        assert_eq!(lattice_shape(2), (2, 1));
        let p128 = periodic_arrangement(&ArrangementSpec::periodic(128), &ws()).unwrap();
        let p64 = periodic_arrangement(&ArrangementSpec::periodic(64), &ws()).unwrap();
        assert_eq!(p128.len(), 128);
        assert!(p128[1].x - p128[0].x < p64[1].x - p64[0].x);
        assert!(p128[12].y - p128[0].y < p64[8].y - p64[0].y);
        for p in p128.iter().chain(&p64) {
            assert!(ws().contains(p));
        }
    }

    #[test]
    fn periodic_cells_on_a_vertex_are_dropped() {
        // (180, 619) lies about 9.4 mm from a cell of the 128 lattice
        let v = Point2::new(180., 619.);
        let spec = ArrangementSpec::periodic(128);
        let full = periodic_arrangement(&spec, &ws()).unwrap();
        let near = full.iter().filter(|p| p.distance(&v) <= 20.0).count();
        assert_eq!(near, 1);
        let kept = spec.generate(&ws(), &[v], 20.0).unwrap();
        assert_eq!(kept.len(), 127);
        assert!(kept.iter().all(|p| p.distance(&v) > 20.0));
        let env = Environment::arranged(ws(), &spec, &[v], 20.0).unwrap();
        assert!(env.is_free(&v));
    }

    #[test]
    fn lattice_spacing_shrinks_with_count() {
        let spacing = |n: usize| {
            let pts = periodic_arrangement(&ArrangementSpec::periodic(n), &ws()).unwrap();
            let (c, _) = lattice_shape(n);
            if c > 1 {
                pts[1].x - pts[0].x
            } else {
                f64::INFINITY
            }
        };
        let mut prev = f64::INFINITY;
        for n in 1..400 {
            let s = spacing(n);
            assert!(s <= prev + 1e-9, "spacing grew at {n}");
            prev = s;
        }
    }

    #[test]
    fn is_free_examples() {
        let env = Environment::new(ws(), vec![Point2::new(0., 0.)], 10.0).unwrap();
        assert!(env.is_free(&Point2::new(400., 400.)));
        let env = Environment::new(ws(), vec![Point2::new(400., 400.)], 10.0).unwrap();
        assert!(!env.is_free(&Point2::new(405., 400.)));
        assert!(!env.is_free(&Point2::new(410., 400.)));
        assert!(env.is_free(&Point2::new(410.001, 400.)));
        assert!(!env.is_free(&Point2::new(900., 400.)));
    }

    #[test]
    fn segment_free_examples() {
        let env = Environment::empty(ws(), 10.0).unwrap();
        let s = Segment::new(Point2::new(0., 0.), Point2::new(100., 0.));
        assert!(env.segment_free(&s, 20.0).unwrap());

        let env = Environment::new(ws(), vec![Point2::new(50., 0.)], 10.0).unwrap();
        // exhaustive: samples at 0,20,40,60,80,100; the ones at 40 and 60 are within 10 of 50
        let blocked: Vec<_> = densify(&s, 20.0)
            .unwrap()
            .into_iter()
            .filter(|p| p.distance(&Point2::new(50., 0.)) <= 10.0)
            .collect();
        assert_eq!(blocked, vec![Point2::new(40., 0.), Point2::new(60., 0.)]);
        assert!(!env.segment_free(&s, 20.0).unwrap());

        let p = Point2::new(300., 300.);
        assert!(env.segment_free(&Segment::new(p, p), 20.0).unwrap());
        assert!(env.segment_free(&s, 0.0).is_err());
    }

    #[test]
    fn environment_rejects_bad_inputs() {
        assert!(Environment::new(ws(), vec![], 0.0).is_err());
        assert!(Environment::new(ws(), vec![Point2::new(-1., 5.)], 10.0).is_err());
    }

    proptest! {
        #[test]
        fn index_matches_brute_force(seed in any::<u64>(), n in 1usize..300, clearance in 1.0..60.0f64,
                                     px in -20.0..820.0f64, py in -20.0..820.0f64) {
            let pts = random_arrangement(&ArrangementSpec::random(n, seed), &ws(), &[], clearance);
            prop_assume!(pts.is_ok());
            let env = Environment::new(ws(), pts.unwrap(), clearance).unwrap();
            let p = Point2::new(px, py);
            prop_assert_eq!(env.is_free(&p), brute_is_free(&env, &p));
            for o in env.obstacles().iter().take(5) {
                prop_assert!(!env.is_free(o));
            }
        }

        #[test]
        fn segment_free_is_symmetric(seed in any::<u64>(), ax in 0.0..800.0f64, ay in 0.0..800.0f64,
                                     bx in 0.0..800.0f64, by in 0.0..800.0f64) {
            let pts = random_arrangement(&ArrangementSpec::random(100, seed), &ws(), &[], 10.0).unwrap();
            let env = Environment::new(ws(), pts, 10.0).unwrap();
            let s = Segment::new(Point2::new(ax, ay), Point2::new(bx, by));
            prop_assert_eq!(env.segment_free(&s, 20.0).unwrap(), env.segment_free(&s.reversed(), 20.0).unwrap());
        }
    }
}
