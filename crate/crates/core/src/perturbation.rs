//! Admissible initial data near the dipole: mollified copies, odd bump
//! perturbations, and the arm construction joining the dipole core to a far
//! point `z` behind it.
//!
//! Every generator builds the upper half of the grid and mirrors it, so odd
//! symmetry holds exactly on nodes.

use std::f64::consts::PI;

use crate::diagnostics::{component, stability_distance};
use crate::dipole::{DipoleSpec, Point};
use crate::error::{domain, Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::quadrature::adaptive;

/// Parameters of the generated initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    /// Radius of the mollifier; 0 samples the dipole directly.
    pub mollify_scale: f64,
    pub bump_amplitude: f64,
    pub bump_center: Point,
    pub bump_radius: f64,
    pub arm_enabled: bool,
    pub arm_target: Point,
    /// Half-width of the arm's support; the plateau has half-width `w / 2`.
    pub arm_width: f64,
    /// Plateau value of the arm, in `(m/2, 7m/8)`.
    pub arm_amplitude: f64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec {
            mollify_scale: 0.05,
            bump_amplitude: 0.0,
            bump_center: [0.0, 0.5],
            bump_radius: 0.3,
            arm_enabled: false,
            arm_target: [-2.5, 0.5],
            arm_width: 0.05,
            arm_amplitude: 0.8 * DipoleSpec::lamb().max_vorticity(),
        }
    }
}

/// Measured properties of generated data.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerturbationReport {
    pub l1_dist: f64,
    pub l2_dist: f64,
    pub impulse_dist: f64,
    pub measured_m: f64,
    /// Area of `{w0 > m/2}` in the upper half plane.
    pub a1_area: f64,
    /// Area of `{w_L >= 3m/4}`.
    pub a0_area: f64,
}

impl PerturbationReport {
    pub fn distance(&self) -> f64 {
        self.l1_dist + self.l2_dist + self.impulse_dist
    }

    pub fn measure(field: &ScalarField) -> Result<Self> {
        let d = stability_distance(field, 0.0)?;
        let dip = DipoleSpec::lamb();
        let m = dip.max_vorticity();
        let g = field.grid;
        let mut a1 = 0usize;
        let mut a0 = 0usize;
        let mut mm = f64::NEG_INFINITY;
        for j in g.upper_rows() {
            for i in 0..g.n {
                let v = field.at(i, j);
                mm = mm.max(v);
                if v > 0.5 * m {
                    a1 += 1;
                }
                if dip.vorticity_at(g.point(i, j)) >= 0.75 * m {
                    a0 += 1;
                }
            }
        }
        Ok(PerturbationReport {
            l1_dist: d.l1,
            l2_dist: d.l2,
            impulse_dist: d.impulse,
            measured_m: mm,
            a1_area: a1 as f64 * g.cell_area(),
            a0_area: a0 as f64 * g.cell_area(),
        })
    }
}

/// `exp(1 - 1/(1 - s^2))` on `|s| < 1`, zero outside; peak value 1.
pub fn bump_profile(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// `int_{|x| < 1} bump_profile(|x|) dx`.
pub fn bump_mass_constant() -> f64 {
    2.0 * PI * adaptive(|s| bump_profile(s) * s, 0.0, 1.0, 1e-14)
}

/// Smooth monotone step: 0 for `t <= 0`, 1 for `t >= 1`.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Fills the upper half from `f` and mirrors it oddly.
fn odd_field(grid: Grid, f: impl Fn(Point) -> f64) -> ScalarField {
    let mut out = ScalarField::zeros(grid);
    let n = grid.n;
    for j in grid.upper_rows() {
        let jm = grid.mirror_row(j);
        for i in 0..n {
            let v = f(grid.point(i, j));
            out.values[j * n + i] = v;
            out.values[jm * n + i] = -v;
        }
    }
    out
}

fn check_support(field: &ScalarField) -> Result<()> {
    let g = field.grid;
    let inner = g.half_extent - 1.0;
    for j in 0..g.n {
        for i in 0..g.n {
            if field.at(i, j) != 0.0 {
                let x = g.point(i, j);
                if x[0].abs() > inner || x[1].abs() > inner {
                    return domain(format!(
                        "generated support reaches ({:.3}, {:.3}), outside [-L+1, L-1]^2",
                        x[0], x[1]
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Samples per mollifier radius in the convolution quadrature.
const KERNEL_SAMPLES: i64 = 10;

/// The dipole convolved with a normalised radial bump of radius
/// `mollify_scale`, by midpoint quadrature of the kernel at spacing
/// `mollify_scale / 10` with the dipole evaluated analytically.
pub fn mollified_lamb(spec: &PerturbationSpec, grid: Grid) -> Result<ScalarField> {
    let eps = spec.mollify_scale;
    if !(0.0..0.1).contains(&eps) {
        return domain(format!("mollify_scale = {eps} outside [0, 0.1)"));
    }
    if grid.half_extent < 2.0 + eps {
        return domain(format!("box half extent {} too small for the mollified dipole", grid.half_extent));
    }
    let d = DipoleSpec::lamb();
    let mut kernel = vec![(0.0, 0.0, 1.0)];
    if eps > 0.0 {
        kernel.clear();
        let hk = eps / KERNEL_SAMPLES as f64;
        for q in -KERNEL_SAMPLES..KERNEL_SAMPLES {
            for p in -KERNEL_SAMPLES..KERNEL_SAMPLES {
                let y = [(p as f64 + 0.5) * hk, (q as f64 + 0.5) * hk];
                let w = bump_profile(y[0].hypot(y[1]) / eps);
                if w > 0.0 {
                    kernel.push((y[0], y[1], w));
                }
            }
        }
    }
    let total: f64 = kernel.iter().map(|k| k.2).sum();
    let reach = 1.0 + eps;
    let field = odd_field(grid, |x| {
        if x[0].hypot(x[1]) > reach {
            return 0.0;
        }
        let mut acc = 0.0;
        for &(y1, y2, w) in &kernel {
            acc += w * d.vorticity_at([x[0] - y1, x[1] - y2]);
        }
        acc / total
    });
    check_support(&field)?;
    Ok(field)
}

/// `base` plus `A bump(|x - c| / rho)` and its odd mirror image.
pub fn add_bump(base: &ScalarField, spec: &PerturbationSpec) -> Result<ScalarField> {
    let c = spec.bump_center;
    let rho = spec.bump_radius;
    if !(rho > 0.0) {
        return domain(format!("bump_radius = {rho} must be positive"));
    }
    if c[1] - rho <= 0.0 {
        return domain("bump support must lie inside the upper half plane");
    }
    let a = spec.bump_amplitude;
    if a == 0.0 {
        return Ok(base.clone());
    }
    let g = base.grid;
    let mut out = base.clone();
    let n = g.n;
    for j in g.upper_rows() {
        let jm = g.mirror_row(j);
        for i in 0..n {
            let x = g.point(i, j);
            let b = a * bump_profile((x[0] - c[0]).hypot(x[1] - c[1]) / rho);
            if b != 0.0 {
                let v = out.values[j * n + i] + b;
                if v < -1e-14 {
                    return domain(format!("bump makes the field negative at ({:.3}, {:.3})", x[0], x[1]));
                }
                out.values[j * n + i] = v;
                out.values[jm * n + i] = -v;
            }
        }
    }
    check_support(&out)?;
    Ok(out)
}

/// Centroid of `A0 = {w_L >= 3m/4}` in the upper half plane.
pub fn a0_centroid() -> Point {
    let d = DipoleSpec::lamb();
    let level = 0.75 * d.max_vorticity();
    let hq = 2e-3;
    let (mut sx, mut sy, mut count) = (0.0, 0.0, 0.0);
    let k = (1.0 / hq) as i64;
    for jy in 0..k {
        let y = (jy as f64 + 0.5) * hq;
        for ix in -k..k {
            let x = (ix as f64 + 0.5) * hq;
            if d.vorticity_at([x, y]) >= level {
                sx += x;
                sy += y;
                count += 1.0;
            }
        }
    }
    [sx / count, sy / count]
}

/// Distance from `x` to the segment `[a, b]`.
fn segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = (((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    (x[0] - a[0] - t * dx).hypot(x[1] - a[1] - t * dy)
}

/// The arm indicator `S` in `[0, 1]`: 1 within `w/2` of the segment from the
/// `A0` centroid to `z`, 0 beyond `w`, smooth in between.
pub fn arm_profile(spec: &PerturbationSpec) -> impl Fn(Point) -> f64 {
    let a = a0_centroid();
    let z = spec.arm_target;
    let w = spec.arm_width;
    move |x| smooth_step(2.0 - 2.0 * segment_distance(x, a, z) / w)
}

/// Initial data with a tube of height `arm_amplitude` from the dipole core to
/// `arm_target`, blended into the mollified dipole, plus the optional bump.
pub fn theorem2_data(spec: &PerturbationSpec, grid: Grid) -> Result<(ScalarField, PerturbationReport)> {
    let base = mollified_lamb(spec, grid)?;
    if !spec.arm_enabled {
        let f = add_bump(&base, spec)?;
        let rep = PerturbationReport::measure(&f)?;
        return Ok((f, rep));
    }
    let m = DipoleSpec::lamb().max_vorticity();
    let amp = spec.arm_amplitude;
    if !(amp > 0.5 * m && amp < 0.875 * m) {
        return domain(format!("arm_amplitude = {amp} outside (m/2, 7m/8) with m = {m:.6}"));
    }
    let z = spec.arm_target;
    if !(z[0] < -2.0 && z[1] > 0.0) {
        return domain(format!("arm target ({}, {}) needs z1 < -2 and z2 > 0", z[0], z[1]));
    }
    let w = spec.arm_width;
    if !(w > 0.0 && w < z[1]) {
        return domain(format!("arm_width = {w} must lie in (0, z2)"));
    }
    let s = arm_profile(spec);
    let n = grid.n;
    let mut f = base.clone();
    for j in grid.upper_rows() {
        let jm = grid.mirror_row(j);
        for i in 0..n {
            let k = s(grid.point(i, j));
            if k > 0.0 {
                let v = (1.0 - k) * base.values[j * n + i] + k * amp;
                f.values[j * n + i] = v;
                f.values[jm * n + i] = -v;
            }
        }
    }
    let f = add_bump(&f, spec)?;
    check_support(&f)?;
    check_arm_connected(&f, z, m)?;
    let rep = PerturbationReport::measure(&f)?;
    Ok((f, rep))
}

/// `{w > 3m/4}` must connect the maximum to the node nearest `z` under both
/// 4- and 8-neighbour adjacency.
fn check_arm_connected(f: &ScalarField, z: Point, m: f64) -> Result<()> {
    let g = f.grid;
    let level = 0.75 * m;
    let zi = (g.nearest(z[0]), g.nearest(z[1]));
    if f.at(zi.0, zi.1) <= level {
        return Err(Error::Construction(format!(
            "value {:.4} at the target node is not above 3m/4 = {level:.4}",
            f.at(zi.0, zi.1)
        )));
    }
    let mut start = (0, 0);
    let mut best = f64::NEG_INFINITY;
    for j in g.upper_rows() {
        for i in 0..g.n {
            if f.at(i, j) > best {
                best = f.at(i, j);
                start = (i, j);
            }
        }
    }
    for diagonal in [false, true] {
        let c = component(f, start, level, diagonal);
        if !c.contains(&g, zi.0, zi.1) {
            return Err(Error::Construction(format!(
                "{{w > 3m/4}} does not connect the core to z under {}-neighbour fill",
                if diagonal { 8 } else { 4 }
            )));
        }
    }
    Ok(())
}
