//! Passive particles advected through a sequence of velocity frames.
//!
//! Positions are integrated in box coordinates of the frame moving at
//! `frame_speed`, so `dx/dt = u(x, t) - V e1`, and logged in lab
//! coordinates `x + V t e1`. Space is interpolated with periodic Catmull-Rom
//! bicubics and time linearly between frames.

use crate::error::{Error, Result};
use crate::dipole::Point;
use crate::grid::{Grid, VectorField};

/// Substeps of the RK4 integrator per frame interval.
pub const SUBSTEPS: usize = 8;

/// What to do when a particle leaves the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    #[default]
    Abort,
    /// Unwrap in `x1`: the position keeps growing, the velocity is sampled at
    /// the periodic image. Leaving through `x2` still aborts.
    Unwrap,
}

impl std::str::FromStr for BoundaryPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abort" => Ok(BoundaryPolicy::Abort),
            "unwrap" => Ok(BoundaryPolicy::Unwrap),
            _ => Err(Error::Config(format!("unknown boundary policy '{s}' (abort | unwrap)"))),
        }
    }
}

/// Labeled particles released at `origin_time`, positions in lab coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TracerSet {
    pub labels: Vec<String>,
    pub positions: Vec<Point>,
    pub origin_time: f64,
}

impl TracerSet {
    pub fn new(origin_time: f64) -> Self {
        TracerSet {
            origin_time,
            ..Default::default()
        }
    }

    pub fn push(&mut self, label: impl Into<String>, x: Point) {
        self.labels.push(label.into());
        self.positions.push(x);
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Lab-frame positions of every tracer at every logged time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryLog {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    /// `positions[k][p]` is tracer `p` at `times[k]`.
    pub positions: Vec<Vec<Point>>,
}

impl TrajectoryLog {
    /// Trajectory of one tracer as `(t, x)` pairs.
    pub fn track(&self, label: &str) -> Option<Vec<(f64, Point)>> {
        let p = self.labels.iter().position(|l| l == label)?;
        Some(self.times.iter().zip(&self.positions).map(|(&t, row)| (t, row[p])).collect())
    }

    pub fn last(&self) -> Option<&[Point]> {
        self.positions.last().map(|v| v.as_slice())
    }
}

/// Lab-frame velocity as a function of box position and time.
pub trait VelocitySource {
    fn velocity(&self, x: Point, t: f64) -> Point;
    /// Speed of the frame the box coordinates move with.
    fn frame_speed(&self) -> f64 {
        0.0
    }
    /// Box in which positions must stay, `None` for unbounded.
    fn grid(&self) -> Option<Grid> {
        None
    }
}

/// Closed-form velocity `f(x, t)` in the lab frame.
pub struct Analytic<F>(pub F);

impl<F: Fn(Point, f64) -> Point> VelocitySource for Analytic<F> {
    fn velocity(&self, x: Point, t: f64) -> Point {
        (self.0)(x, t)
    }
}

/// Time-ordered gridded velocity frames.
#[derive(Debug, Clone)]
pub struct FrameSeries {
    pub times: Vec<f64>,
    pub frames: Vec<VectorField>,
    pub frame_speed: f64,
}

impl FrameSeries {
    pub fn new(frame_speed: f64) -> Self {
        FrameSeries {
            times: Vec::new(),
            frames: Vec::new(),
            frame_speed,
        }
    }

    pub fn push(&mut self, t: f64, u: VectorField) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::Domain(format!("frame times must increase ({t} after {last})")));
            }
            if u.grid != self.frames[0].grid {
                return Err(Error::Domain("frames on different grids".into()));
            }
        }
        self.times.push(t);
        self.frames.push(u);
        Ok(())
    }

    fn bracket(&self, t: f64) -> (usize, f64) {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return (0, 0.0);
        }
        if t >= self.times[n - 1] {
            return (n - 2, 1.0);
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        (k, w)
    }
}

impl VelocitySource for FrameSeries {
    fn velocity(&self, x: Point, t: f64) -> Point {
        let (k, w) = self.bracket(t);
        let a = bicubic(&self.frames[k], x);
        if w == 0.0 || self.frames.len() == 1 {
            return a;
        }
        let b = bicubic(&self.frames[k + 1], x);
        [(1.0 - w) * a[0] + w * b[0], (1.0 - w) * a[1] + w * b[1]]
    }

    fn frame_speed(&self) -> f64 {
        self.frame_speed
    }

    fn grid(&self) -> Option<Grid> {
        self.frames.first().map(|f| f.grid)
    }
}

fn catmull_rom(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        0.5 * (-s3 + 2.0 * s2 - s),
        0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
        0.5 * (-3.0 * s3 + 4.0 * s2 + s),
        0.5 * (s3 - s2),
    ]
}

/// Periodic Catmull-Rom interpolation of both components at `x`.
pub fn bicubic(u: &VectorField, x: Point) -> Point {
    let g = u.grid;
    let n = g.n as i64;
    let fx = (x[0] + g.half_extent) / g.h;
    let fy = (x[1] + g.half_extent) / g.h;
    let (ix, iy) = (fx.floor(), fy.floor());
    let (wx, wy) = (catmull_rom(fx - ix), catmull_rom(fy - iy));
    let (ix, iy) = (ix as i64, iy as i64);
    let mut out = [0.0; 2];
    for (b, wyb) in wy.iter().enumerate() {
        let j = (iy - 1 + b as i64).rem_euclid(n) as usize;
        let mut row = [0.0; 2];
        for (a, wxa) in wx.iter().enumerate() {
            let i = (ix - 1 + a as i64).rem_euclid(n) as usize;
            let k = g.index(i, j);
            row[0] += wxa * u.u1[k];
            row[1] += wxa * u.u2[k];
        }
        out[0] += wyb * row[0];
        out[1] += wyb * row[1];
    }
    out
}

struct Stepper<'a> {
    src: &'a dyn VelocitySource,
    v: f64,
    grid: Option<Grid>,
    policy: BoundaryPolicy,
}

impl Stepper<'_> {
    fn sample(&self, x: Point) -> Point {
        match (self.grid, self.policy) {
            (Some(g), BoundaryPolicy::Unwrap) => {
                let l = g.half_extent;
                [(x[0] + l).rem_euclid(2.0 * l) - l, x[1]]
            }
            _ => x,
        }
    }

    fn rate(&self, x: Point, t: f64) -> Point {
        let u = self.src.velocity(self.sample(x), t);
        [u[0] - self.v, u[1]]
    }

    fn rk4(&self, x: Point, t: f64, dt: f64) -> Point {
        let k1 = self.rate(x, t);
        let k2 = self.rate([x[0] + 0.5 * dt * k1[0], x[1] + 0.5 * dt * k1[1]], t + 0.5 * dt);
        let k3 = self.rate([x[0] + 0.5 * dt * k2[0], x[1] + 0.5 * dt * k2[1]], t + 0.5 * dt);
        let k4 = self.rate([x[0] + dt * k3[0], x[1] + dt * k3[1]], t + dt);
        [
            x[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }

    fn inside(&self, x: Point) -> bool {
        let Some(g) = self.grid else {
            return x[0].is_finite() && x[1].is_finite();
        };
        let l = g.half_extent;
        let in_x2 = x[1] >= -l && x[1] < l;
        match self.policy {
            BoundaryPolicy::Abort => in_x2 && x[0] >= -l && x[0] < l,
            BoundaryPolicy::Unwrap => in_x2 && x[0].is_finite(),
        }
    }
}

/// Advects `tracers` through `src`, logging at each of `log_times` (which
/// must start at the origin time and increase). Each interval between log
/// times is split into `substeps` RK4 steps.
pub fn advect(
    tracers: &TracerSet,
    src: &dyn VelocitySource,
    log_times: &[f64],
    substeps: usize,
    policy: BoundaryPolicy,
) -> Result<TrajectoryLog> {
    if log_times.is_empty() || (log_times[0] - tracers.origin_time).abs() > 1e-12 {
        return Err(Error::Domain("log times must start at the tracers' origin time".into()));
    }
    if log_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("log times must increase".into()));
    }
    if substeps == 0 {
        return Err(Error::Domain("substeps must be positive".into()));
    }
    let st = Stepper {
        src,
        v: src.frame_speed(),
        grid: src.grid(),
        policy,
    };
    let t0 = log_times[0];
    let mut pos: Vec<Point> = tracers.positions.iter().map(|x| [x[0] - st.v * t0, x[1]]).collect();
    let mut log = TrajectoryLog {
        labels: tracers.labels.clone(),
        ..Default::default()
    };
    let lab = |p: &[Point], t: f64| p.iter().map(|x| [x[0] + st.v * t, x[1]]).collect::<Vec<_>>();
    for (p, x) in pos.iter().enumerate() {
        if !st.inside(*x) {
            return Err(exit(&tracers.labels[p], t0, log));
        }
    }
    log.times.push(t0);
    log.positions.push(lab(&pos, t0));
    for w in log_times.windows(2) {
        let dt = (w[1] - w[0]) / substeps as f64;
        for s in 0..substeps {
            let t = w[0] + s as f64 * dt;
            for (p, x) in pos.iter_mut().enumerate() {
                let next = st.rk4(*x, t, dt);
                if !st.inside(next) {
                    return Err(exit(&tracers.labels[p], t + dt, log));
                }
                *x = next;
            }
        }
        log.times.push(w[1]);
        log.positions.push(lab(&pos, w[1]));
    }
    Ok(log)
}

fn exit(label: &str, t: f64, partial: TrajectoryLog) -> Error {
    Error::TracerExit {
        label: label.to_string(),
        t,
        partial: Box::new(partial),
    }
}

/// [`advect`] over the frame times of `frames` from `tracers.origin_time` to
/// `t_end`, with [`SUBSTEPS`] steps per frame interval.
pub fn advect_frames(
    tracers: &TracerSet,
    frames: &FrameSeries,
    t_end: f64,
    policy: BoundaryPolicy,
) -> Result<TrajectoryLog> {
    let t0 = tracers.origin_time;
    let (first, last) = match (frames.times.first(), frames.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::Domain("no velocity frames".into())),
    };
    let tol = 1e-9 * (1.0 + last.abs());
    if t0 < first - tol || t_end > last + tol || t_end < t0 {
        return Err(Error::Domain(format!(
            "frames cover [{first}, {last}], requested [{t0}, {t_end}]"
        )));
    }
    let mut times = vec![t0];
    times.extend(frames.times.iter().copied().filter(|&t| t > t0 + tol && t < t_end - tol));
    if t_end > t0 + tol {
        times.push(t_end);
    }
    advect(tracers, frames, &times, SUBSTEPS, policy)
}

/// Per-time geometry of an advected closed polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSample {
    pub t: f64,
    pub x1_min: f64,
    pub x1_max: f64,
    pub area: f64,
    /// Smallest total length of `{x1 = c}` inside the polygon over the
    /// sampled columns `c` strictly inside the x1-extent.
    pub min_column_width: f64,
}

/// Image of a closed polyline under the flow map.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionLog {
    pub log: TrajectoryLog,
    pub samples: Vec<RegionSample>,
}

/// Advects each vertex of a closed polyline and measures the image.
/// `column_spacing` sets where column widths are sampled.
pub fn advect_region(
    boundary: &[Point],
    origin_time: f64,
    src: &dyn VelocitySource,
    log_times: &[f64],
    substeps: usize,
    policy: BoundaryPolicy,
    column_spacing: f64,
) -> Result<RegionLog> {
    if boundary.len() < 3 {
        return Err(Error::Domain("a region boundary needs at least 3 vertices".into()));
    }
    let mut set = TracerSet::new(origin_time);
    for (k, x) in boundary.iter().enumerate() {
        set.push(format!("v{k}"), *x);
    }
    let log = advect(&set, src, log_times, substeps, policy)?;
    let samples = log
        .times
        .iter()
        .zip(&log.positions)
        .map(|(&t, poly)| {
            let (lo, hi) = poly
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x[0]), b.max(x[0])));
            RegionSample {
                t,
                x1_min: lo,
                x1_max: hi,
                area: shoelace_area(poly),
                min_column_width: min_column_width(poly, lo, hi, column_spacing),
            }
        })
        .collect();
    Ok(RegionLog { log, samples })
}

/// Signed area of a closed polygon, positive when counter-clockwise.
pub fn shoelace_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|k| {
            let (a, b) = (poly[k], poly[(k + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

/// Length of `{x1 = c}` inside a closed polygon (even-odd rule).
pub fn column_width(poly: &[Point], c: f64) -> f64 {
    let n = poly.len();
    let mut ys: Vec<f64> = (0..n)
        .filter_map(|k| {
            let (a, b) = (poly[k], poly[(k + 1) % n]);
            if (a[0] <= c) != (b[0] <= c) {
                Some(a[1] + (c - a[0]) / (b[0] - a[0]) * (b[1] - a[1]))
            } else {
                None
            }
        })
        .collect();
    ys.sort_by(f64::total_cmp);
    ys.chunks_exact(2).map(|p| p[1] - p[0]).sum()
}

fn min_column_width(poly: &[Point], lo: f64, hi: f64, spacing: f64) -> f64 {
    if !(spacing > 0.0) || hi - lo <= 2.0 * spacing {
        return column_width(poly, 0.5 * (lo + hi));
    }
    let mut c = lo + spacing;
    let mut best = f64::INFINITY;
    while c < hi - spacing * 0.5 {
        best = best.min(column_width(poly, c));
        c += spacing;
    }
    best
}

fn point_segment(p: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let s = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    (p[0] - a[0] - s * d[0]).hypot(p[1] - a[1] - s * d[1])
}

fn directed(a: &[Point], b: &[Point]) -> f64 {
    let n = b.len();
    a.iter()
        .map(|&p| {
            (0..n)
                .map(|k| point_segment(p, b[k], b[(k + 1) % n]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Hausdorff distance between two closed polylines, vertices against edges.
pub fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dipole::DipoleSpec;
    use std::f64::consts::PI;

    fn uniform(g: Grid, c: Point) -> VectorField {
        VectorField::from_fn(g, |_| c)
    }

    #[test]
    fn constant_flow_is_exact() {
        let g = Grid::new(32, 4.0).unwrap();
        let mut fr = FrameSeries::new(0.0);
        for k in 0..5 {
            fr.push(k as f64 * 0.5, uniform(g, [1.0, 0.0])).unwrap();
        }
        let mut set = TracerSet::new(0.0);
        set.push("a", [-2.0, 0.3]);
        let log = advect_frames(&set, &fr, 2.0, BoundaryPolicy::Abort).unwrap();
        for (t, x) in log.track("a").unwrap() {
            assert!((x[0] - (-2.0 + t)).abs() < 1e-13 && (x[1] - 0.3).abs() < 1e-13);
        }
    }

    #[test]
    fn bicubic_interpolates_nodes_exactly() {
        let g = Grid::new(32, 4.0).unwrap();
        let u = VectorField::from_fn(g, |x| [x[0].sin(), (0.5 * x[1]).cos()]);
        let p = g.point(5, 7);
        let v = bicubic(&u, p);
        assert!((v[0] - p[0].sin()).abs() < 1e-14);
        let q: Point = [0.123, -0.456];
        let v = bicubic(&u, q);
        assert!((v[0] - q[0].sin()).abs() < 2e-3);
    }

    #[test]
    fn exit_aborts_with_partial_log() {
        let g = Grid::new(32, 2.0).unwrap();
        let mut fr = FrameSeries::new(0.0);
        for k in 0..5 {
            fr.push(k as f64, uniform(g, [1.0, 0.0])).unwrap();
        }
        let mut set = TracerSet::new(0.0);
        set.push("z", [0.0, 0.0]);
        match advect_frames(&set, &fr, 4.0, BoundaryPolicy::Abort) {
            Err(Error::TracerExit { label, t, partial }) => {
                assert_eq!(label, "z");
                assert!(t > 1.9 && t <= 2.0 + 1e-12);
                assert_eq!(partial.times.len(), 2);
            }
            other => panic!("expected exit, got {other:?}"),
        }
        let log = advect_frames(&set, &fr, 4.0, BoundaryPolicy::Unwrap).unwrap();
        assert!((log.last().unwrap()[0][0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn co_moving_frame_logs_lab_positions() {
        let g = Grid::new(32, 4.0).unwrap();
        let mut fr = FrameSeries::new(1.0);
        fr.push(0.0, uniform(g, [1.0, 0.0])).unwrap();
        fr.push(1.0, uniform(g, [1.0, 0.0])).unwrap();
        let mut set = TracerSet::new(0.0);
        set.push("p", [0.5, 0.5]);
        let log = advect_frames(&set, &fr, 1.0, BoundaryPolicy::Abort).unwrap();
        assert!((log.last().unwrap()[0][0] - 1.5).abs() < 1e-14);
    }

    fn lamb_lab() -> Analytic<impl Fn(Point, f64) -> Point> {
        let d = DipoleSpec::lamb();
        Analytic(move |x: Point, t: f64| d.velocity_at([x[0] - t, x[1]]))
    }

    #[test]
    fn dipole_core_particle_travels_with_it() {
        let src = lamb_lab();
        let mut set = TracerSet::new(0.0);
        set.push("core", [0.0, 0.5]);
        let times: Vec<f64> = (0..=50).map(|k| 0.1 * k as f64).collect();
        let log = advect(&set, &src, &times, 8, BoundaryPolicy::Abort).unwrap();
        for (t, x) in log.track("core").unwrap() {
            assert!((x[0] - t).abs() < 1.0, "t = {t}: {x:?}");
        }
    }

    #[test]
    fn fourth_order_in_time() {
        let src = lamb_lab();
        let mut set = TracerSet::new(0.0);
        set.push("p", [0.2, 0.45]);
        let run = |sub: usize| {
            let times = [0.0, 0.5, 1.0, 1.5, 2.0];
            advect(&set, &src, &times, sub, BoundaryPolicy::Abort).unwrap().last().unwrap()[0]
        };
        let (a, b, c) = (run(4), run(8), run(128));
        let e1 = (a[0] - c[0]).hypot(a[1] - c[1]);
        let e2 = (b[0] - c[0]).hypot(b[1] - c[1]);
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn axis_particle_stays_on_axis() {
        let src = lamb_lab();
        let mut set = TracerSet::new(0.0);
        set.push("axis", [-0.5, 0.0]);
        let times: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
        let log = advect(&set, &src, &times, 8, BoundaryPolicy::Abort).unwrap();
        assert!(log.track("axis").unwrap().iter().all(|(_, x)| x[1].abs() < 1e-10));
    }

    #[test]
    fn polygon_helpers() {
        let sq = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]];
        assert!((shoelace_area(&sq) - 2.0).abs() < 1e-15);
        assert!((column_width(&sq, 0.7) - 1.0).abs() < 1e-15);
        let moved: Vec<Point> = sq.iter().map(|x| [x[0] + 0.1, x[1]]).collect();
        assert!((hausdorff(&sq, &moved) - 0.1).abs() < 1e-12);
        assert_eq!(hausdorff(&sq, &sq), 0.0);
    }

    #[test]
    fn identity_region_at_origin_time() {
        let circle: Vec<Point> = (0..64)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 64.0;
                [a.cos(), a.sin()]
            })
            .collect();
        let src = lamb_lab();
        let r = advect_region(&circle, 0.0, &src, &[0.0], 8, BoundaryPolicy::Abort, 0.1).unwrap();
        assert_eq!(r.log.positions[0], circle);
        assert!((r.samples[0].area - shoelace_area(&circle)).abs() < 1e-15);
    }
}
