//! Measurements on snapshots: the shift `tau` and the stability distance to
//! the translated dipole, gradient and Holder quotients, level-set geometry,
//! the velocity defect, and the profile distance curve `f(tau)`, `F(s)`.
//!
//! Integrals over the upper half plane use the midpoint rule on nodes with
//! `x2 > 0`; the axis row carries zero weight.

use std::collections::VecDeque;

use crate::dipole::DipoleSpec;
use crate::error::{domain, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::spectral::Spectral;

const GOLDEN: f64 = 0.618_033_988_749_894_8;
/// Golden-section tolerance on `tau`.
pub const SHIFT_TOL: f64 = 1e-4;

/// The three components of the stability distance on the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Distances {
    pub l1: f64,
    pub l2: f64,
    pub impulse: f64,
}

impl Distances {
    pub fn total(&self) -> f64 {
        self.l1 + self.l2 + self.impulse
    }
}

/// `(l1, l2, impulse)` distances between `field` and `omega_L(. - tau e1)`,
/// with the dipole evaluated analytically at the nodes.
pub fn stability_distance(field: &ScalarField, tau: f64) -> Result<Distances> {
    ShiftObjective::new(field)?.distances(tau)
}

/// Distance evaluations against translates of the dipole, reusing the sums
/// over nodes the dipole does not reach.
struct ShiftObjective<'a> {
    field: &'a ScalarField,
    dipole: DipoleSpec,
    rows: std::ops::Range<usize>,
    /// Sums of `|w|`, `w^2`, `x2 |w|` over the upper half.
    total: [f64; 3],
}

impl<'a> ShiftObjective<'a> {
    fn new(field: &'a ScalarField) -> Result<Self> {
        let g = field.grid;
        let mut total = [0.0; 3];
        for j in g.upper_rows() {
            let x2 = g.coord(j);
            let mut s = [0.0; 3];
            for i in 0..g.n {
                let v = field.at(i, j).abs();
                s[0] += v;
                s[1] += v * v;
                s[2] += x2 * v;
            }
            for k in 0..3 {
                total[k] += s[k];
            }
        }
        // rows with 0 < x2 <= 1 meet the dipole
        let last = (g.axis_row() + (1.0 / g.h).floor() as usize + 1).min(g.n);
        Ok(ShiftObjective {
            field,
            dipole: DipoleSpec::lamb(),
            rows: g.axis_row() + 1..last,
            total,
        })
    }

    fn distances(&self, tau: f64) -> Result<Distances> {
        let g = self.field.grid;
        if !g.contains_disc([tau, 0.0], 1.0) {
            return domain(format!("dipole disc at tau = {tau} is clipped by the box"));
        }
        let d = self.dipole.shifted(tau);
        let mut acc = self.total;
        let lo = ((tau - 1.0 + g.half_extent) / g.h).ceil().max(0.0) as usize;
        let hi = (((tau + 1.0 + g.half_extent) / g.h).floor() as usize).min(g.n - 1);
        for j in self.rows.clone() {
            let x2 = g.coord(j);
            let row = &self.field.values[j * g.n..(j + 1) * g.n];
            for (i, &w) in row.iter().enumerate().take(hi + 1).skip(lo) {
                let x1 = g.coord(i);
                let l = d.vorticity_at([x1, x2]);
                if l == 0.0 {
                    continue;
                }
                let a = w.abs();
                let e = (w - l).abs();
                acc[0] += e - a;
                acc[1] += e * e - a * a;
                acc[2] += x2 * (e - a);
            }
        }
        let h2 = g.cell_area();
        Ok(Distances {
            l1: (acc[0] * h2).max(0.0),
            l2: (acc[1] * h2).max(0.0).sqrt(),
            impulse: (acc[2] * h2).max(0.0),
        })
    }

    fn objective(&self, tau: f64) -> Result<f64> {
        Ok(self.distances(tau)?.total())
    }
}

/// Result of the shift search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftEstimate {
    pub tau: f64,
    pub distances: Distances,
    /// Set when the scan found separated local minima.
    pub multimodal: bool,
}

/// Minimiser of the summed stability distance over `[hint - 1, hint + 1]`:
/// a scan at spacing `h/2` followed by golden-section refinement of the best
/// bracket to [`SHIFT_TOL`]. Shifts are in box coordinates.
pub fn estimate_shift(field: &ScalarField, tau_hint: f64) -> Result<ShiftEstimate> {
    let obj = ShiftObjective::new(field)?;
    let g = field.grid;
    let step = 0.5 * g.h;
    let count = (2.0 / step).round() as usize;
    let mut samples = Vec::with_capacity(count + 1);
    for k in 0..=count {
        let tau = tau_hint - 1.0 + k as f64 * step;
        if g.contains_disc([tau, 0.0], 1.0) {
            samples.push((tau, obj.objective(tau)?));
        }
    }
    if samples.is_empty() {
        return domain(format!("no admissible shift within 1 of {tau_hint}"));
    }
    let best = (0..samples.len())
        .min_by(|&a, &b| samples[a].1.total_cmp(&samples[b].1))
        .unwrap_or(0);
    let minima: Vec<usize> = (0..samples.len())
        .filter(|&k| {
            let v = samples[k].1;
            (k == 0 || samples[k - 1].1 > v) && (k + 1 == samples.len() || samples[k + 1].1 >= v)
        })
        .collect();
    let best_tau = samples[best].0;
    let multimodal = minima.iter().any(|&k| (samples[k].0 - best_tau).abs() > g.h);

    let mut a = samples[best.saturating_sub(1)].0;
    let mut b = samples[(best + 1).min(samples.len() - 1)].0;
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = obj.objective(c)?;
    let mut fd = obj.objective(d)?;
    while b - a > SHIFT_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = obj.objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = obj.objective(d)?;
        }
    }
    let mut tau = 0.5 * (a + b);
    let mut distances = obj.distances(tau)?;
    if samples[best].1 < distances.total() {
        tau = best_tau;
        distances = obj.distances(tau)?;
    }
    Ok(ShiftEstimate {
        tau,
        distances,
        multimodal,
    })
}

/// `(||grad w||_1, ||grad w||_2, max |grad w|)` over the whole box.
pub fn gradient_norms(sp: &mut Spectral, field: &ScalarField) -> (f64, f64, f64) {
    let gr = sp.gradient(field);
    let h2 = field.grid.cell_area();
    let (mut l1, mut l2, mut linf) = (0.0, 0.0, 0.0f64);
    for (a, b) in gr.u1.iter().zip(&gr.u2) {
        let m2 = a * a + b * b;
        let m = m2.sqrt();
        l1 += m;
        l2 += m2;
        linf = linf.max(m);
    }
    (l1 * h2, (l2 * h2).sqrt(), linf)
}

/// Largest `|w(x) - w(y)| / h^alpha` over horizontally or vertically adjacent
/// nodes: a lower bound for the `C^alpha` seminorm at the grid scale.
pub fn holder_quotient(field: &ScalarField, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("holder exponent {alpha} outside (0, 1]"));
    }
    let g = field.grid;
    let n = g.n;
    let mut best: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let v = field.at(i, j);
            if i + 1 < n {
                best = best.max((field.at(i + 1, j) - v).abs());
            }
            if j + 1 < n {
                best = best.max((field.at(i, j + 1) - v).abs());
            }
        }
    }
    Ok(best / g.h.powf(alpha))
}

/// Level-set thresholds for [`support_and_filament`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub supp_eps: f64,
    pub half_m: f64,
    pub three_quarter_m: f64,
}

impl Thresholds {
    pub fn from_max(m: f64) -> Self {
        Thresholds {
            supp_eps: 1e-3 * m,
            half_m: 0.5 * m,
            three_quarter_m: 0.75 * m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FilamentMeasures {
    /// `x1`-extent of `{w > supp_eps, x2 > 0}`, measured around the periodic circle.
    pub supp_diam: f64,
    /// `x1`-extent of the largest component of `{w > 3m/4}`.
    pub filament_xdiam: f64,
    /// Smallest column length of `{w > m/2}` over columns meeting that component.
    pub thin_column_min: f64,
    /// Set when either level set is empty.
    pub empty: bool,
}

pub fn support_and_filament(field: &ScalarField, th: Thresholds) -> Result<FilamentMeasures> {
    if !(th.supp_eps > 0.0 && th.half_m > 0.0 && th.three_quarter_m > 0.0) {
        return domain("level-set thresholds must be positive");
    }
    let g = field.grid;
    let n = g.n;
    let mut occupied = vec![false; n];
    for j in g.upper_rows() {
        for (i, o) in occupied.iter_mut().enumerate() {
            if field.at(i, j) > th.supp_eps {
                *o = true;
            }
        }
    }
    let supp_diam = circular_extent(&occupied) as f64 * g.h;

    let mut seen = vec![false; g.len()];
    let mut comp: Option<Component> = None;
    for j in g.upper_rows() {
        for i in 0..n {
            let k = g.index(i, j);
            if seen[k] || field.values[k] <= th.three_quarter_m {
                continue;
            }
            let c = component(field, (i, j), th.three_quarter_m, true);
            for (s, &m) in seen.iter_mut().zip(&c.members) {
                *s |= m;
            }
            if comp.as_ref().is_none_or(|b| c.nodes > b.nodes) {
                comp = Some(c);
            }
        }
    }
    let Some(comp) = comp else {
        return Ok(FilamentMeasures {
            supp_diam,
            empty: true,
            ..Default::default()
        });
    };
    let filament_xdiam = (comp.max_x - comp.min_x) as f64 * g.h;
    let mut thin = f64::INFINITY;
    for (i, &hit) in comp.columns.iter().enumerate() {
        if hit {
            let count = g.upper_rows().filter(|&j| field.at(i, j) > th.half_m).count();
            thin = thin.min(count as f64 * g.h);
        }
    }
    Ok(FilamentMeasures {
        supp_diam,
        filament_xdiam,
        thin_column_min: thin,
        empty: false,
    })
}

/// Length (in nodes) of the shortest periodic arc covering all set entries.
fn circular_extent(occupied: &[bool]) -> usize {
    let n = occupied.len();
    let count = occupied.iter().filter(|&&o| o).count();
    if count == 0 {
        return 0;
    }
    if count == n {
        return n;
    }
    let first = occupied.iter().position(|&o| o).unwrap_or(0);
    let mut gap = 0;
    let mut largest = 0;
    for k in 1..=n {
        if occupied[(first + k) % n] {
            largest = largest.max(gap);
            gap = 0;
        } else {
            gap += 1;
        }
    }
    n - 1 - largest
}

/// Connected component of `{w > level}` in the upper half plane.
#[derive(Debug, Clone)]
pub struct Component {
    pub nodes: usize,
    /// Unwrapped column range reached by the fill.
    pub min_x: i64,
    pub max_x: i64,
    pub columns: Vec<bool>,
    pub members: Vec<bool>,
}

impl Component {
    pub fn contains(&self, grid: &Grid, i: usize, j: usize) -> bool {
        self.members[grid.index(i, j)]
    }
}

/// Flood fill from `start` over upper-half nodes with `w > level`, periodic
/// in `x1`; `diagonal` selects 8-neighbour rather than 4-neighbour adjacency.
pub fn component(field: &ScalarField, start: (usize, usize), level: f64, diagonal: bool) -> Component {
    let g = field.grid;
    let n = g.n;
    let upper = g.upper_rows();
    let mut members = vec![false; g.len()];
    let mut columns = vec![false; n];
    let mut queue = VecDeque::new();
    let mut comp = Component {
        nodes: 0,
        min_x: start.0 as i64,
        max_x: start.0 as i64,
        columns: Vec::new(),
        members: Vec::new(),
    };
    if upper.contains(&start.1) && field.at(start.0, start.1) > level {
        members[g.index(start.0, start.1)] = true;
        queue.push_back((start.0 as i64, start.1));
    }
    let offsets: &[(i64, i64)] = if diagonal {
        &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    } else {
        &[(1, 0), (-1, 0), (0, 1), (0, -1)]
    };
    while let Some((x, j)) = queue.pop_front() {
        comp.nodes += 1;
        comp.min_x = comp.min_x.min(x);
        comp.max_x = comp.max_x.max(x);
        columns[x.rem_euclid(n as i64) as usize] = true;
        for &(dx, dj) in offsets {
            let jj = j as i64 + dj;
            if jj < upper.start as i64 || jj >= upper.end as i64 {
                continue;
            }
            let jj = jj as usize;
            let xx = x + dx;
            let ii = xx.rem_euclid(n as i64) as usize;
            let k = g.index(ii, jj);
            if !members[k] && field.values[k] > level {
                members[k] = true;
                queue.push_back((xx, jj));
            }
        }
    }
    comp.max_x = comp.max_x.min(comp.min_x + n as i64);
    comp.columns = columns;
    comp.members = members;
    comp
}

/// `max |u - u_L(. - tau e1)|` over the nodes.
pub fn velocity_difference(u: &VectorField, tau: f64) -> f64 {
    let g = u.grid;
    let d = DipoleSpec::lamb().shifted(tau);
    let mut best: f64 = 0.0;
    for j in 0..g.n {
        for i in 0..g.n {
            let k = g.index(i, j);
            let ul = d.velocity_at(g.point(i, j));
            best = best.max((u.u1[k] - ul[0]).hypot(u.u2[k] - ul[1]));
        }
    }
    best
}

/// `int_{x2 > 0} x1 w` and `int_{x2 > 0} u1 w`; the second is the time
/// derivative of the first.
pub fn center_of_mass_flux(field: &ScalarField, u: &VectorField) -> (f64, f64) {
    let g = field.grid;
    let (mut m, mut f) = (0.0, 0.0);
    for j in g.upper_rows() {
        for i in 0..g.n {
            let k = g.index(i, j);
            m += g.coord(i) * field.values[k];
            f += u.u1[k] * field.values[k];
        }
    }
    (m * g.cell_area(), f * g.cell_area())
}

/// Tabulated `f(tau) = ||w_L - w_L(. - tau e1)||_{L1(R2+)}` and
/// `F(s) = inf_{|tau| >= s} f(tau)`, stored at `|tau|` for each entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileDistanceCurve {
    pub taus: Vec<f64>,
    pub f_values: Vec<f64>,
    pub f_inf_values: Vec<f64>,
}

impl ProfileDistanceCurve {
    /// `c_f = 2 ||w_L||_{L1(R2+)}` on the same quadrature.
    pub fn plateau(&self) -> f64 {
        self.f_values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Midpoint quadrature on a fine grid whose spacing divides `step`, so every
/// tabulated shift is an exact index offset.
pub fn profile_distance_curve(tau_max: f64, step: f64) -> Result<ProfileDistanceCurve> {
    if !(step > 0.0 && step.is_finite()) {
        return domain(format!("step = {step} must be positive"));
    }
    if !(tau_max >= 0.0 && tau_max.is_finite()) {
        return domain(format!("tau_max = {tau_max} must be nonnegative"));
    }
    let sub = (step / 2.5e-3).ceil().max(1.0) as usize;
    let hq = step / sub as f64;
    let nk = (tau_max / step).floor() as usize;
    let ny = (1.0 / hq).ceil() as usize;
    let nx = 2 * ny;
    let d = DipoleSpec::lamb();
    let mut w = vec![0.0; nx * ny];
    for jy in 0..ny {
        let x2 = (jy as f64 + 0.5) * hq;
        for ix in 0..nx {
            let x1 = -1.0 + (ix as f64 + 0.5) * hq;
            w[jy * nx + ix] = d.vorticity_at([x1, x2]);
        }
    }
    let l1: f64 = w.iter().sum::<f64>() * hq * hq;
    let mut half = Vec::with_capacity(nk + 1);
    for k in 0..=nk {
        let off = k * sub;
        if off >= nx {
            half.push(2.0 * l1);
            continue;
        }
        let mut acc = 0.0;
        for jy in 0..ny {
            let row = &w[jy * nx..(jy + 1) * nx];
            for ix in 0..nx + off {
                let a = if ix < nx { row[ix] } else { 0.0 };
                let b = if ix >= off { row[ix - off] } else { 0.0 };
                acc += (a - b).abs();
            }
        }
        half.push(acc * hq * hq);
    }
    let mut suffix_min = half.clone();
    for k in (0..nk).rev() {
        suffix_min[k] = suffix_min[k].min(suffix_min[k + 1]);
    }
    let mut taus = Vec::with_capacity(2 * nk + 1);
    let mut f_values = Vec::with_capacity(2 * nk + 1);
    let mut f_inf_values = Vec::with_capacity(2 * nk + 1);
    for s in -(nk as i64)..=nk as i64 {
        let k = s.unsigned_abs() as usize;
        taus.push(s as f64 * step);
        f_values.push(half[k]);
        f_inf_values.push(suffix_min[k]);
    }
    Ok(ProfileDistanceCurve {
        taus,
        f_values,
        f_inf_values,
    })
}

/// One row of the diagnostics time series.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub tau: f64,
    pub tau_minus_wt: f64,
    pub dist_l1: f64,
    pub dist_l2: f64,
    pub dist_impulse: f64,
    pub grad_l1: f64,
    pub grad_l2: f64,
    pub grad_linf: f64,
    pub holder_alpha_quotient: f64,
    pub supp_diam: f64,
    pub filament_xdiam: f64,
    pub thin_column_min: f64,
    pub udiff_linf: f64,
    pub mass_plus: f64,
    pub impulse: f64,
    pub l2_norm: f64,
}

impl DiagnosticsRecord {
    pub const COLUMNS: [&'static str; 17] = [
        "t",
        "tau",
        "tau_minus_Wt",
        "dist_l1",
        "dist_l2",
        "dist_impulse",
        "grad_l1",
        "grad_l2",
        "grad_linf",
        "holder_alpha_quotient",
        "supp_diam",
        "filament_xdiam",
        "thin_column_min",
        "udiff_linf",
        "mass_plus",
        "impulse",
        "l2_norm",
    ];

    pub fn values(&self) -> [f64; 17] {
        [
            self.t,
            self.tau,
            self.tau_minus_wt,
            self.dist_l1,
            self.dist_l2,
            self.dist_impulse,
            self.grad_l1,
            self.grad_l2,
            self.grad_linf,
            self.holder_alpha_quotient,
            self.supp_diam,
            self.filament_xdiam,
            self.thin_column_min,
            self.udiff_linf,
            self.mass_plus,
            self.impulse,
            self.l2_norm,
        ]
    }

    pub fn from_values(v: &[f64; 17]) -> Self {
        DiagnosticsRecord {
            t: v[0],
            tau: v[1],
            tau_minus_wt: v[2],
            dist_l1: v[3],
            dist_l2: v[4],
            dist_impulse: v[5],
            grad_l1: v[6],
            grad_l2: v[7],
            grad_linf: v[8],
            holder_alpha_quotient: v[9],
            supp_diam: v[10],
            filament_xdiam: v[11],
            thin_column_min: v[12],
            udiff_linf: v[13],
            mass_plus: v[14],
            impulse: v[15],
            l2_norm: v[16],
        }
    }
}

/// Flags raised while measuring one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DiagnosticsFlags {
    pub multimodal_shift: bool,
    pub empty_level_set: bool,
}

/// Everything [`Diagnostics::measure`] needs beyond the snapshot itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsConfig {
    /// Maximum `m` used for the level sets.
    pub m: f64,
    pub holder_alpha: f64,
    pub frame_speed: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            m: DipoleSpec::lamb().max_vorticity(),
            holder_alpha: 0.5,
            frame_speed: 0.0,
        }
    }
}

/// Stateful measurer for a time series of snapshots: the previous shift
/// warm-starts the next search.
#[derive(Debug)]
pub struct Diagnostics {
    pub cfg: DiagnosticsConfig,
    prev: Option<(f64, f64)>,
}

impl Diagnostics {
    pub fn new(cfg: DiagnosticsConfig) -> Self {
        Diagnostics { cfg, prev: None }
    }

    /// Measures a snapshot at time `t` held in box coordinates of a frame
    /// moving at `cfg.frame_speed`; `u` is the lab-frame velocity.
    pub fn measure(
        &mut self,
        sp: &mut Spectral,
        field: &ScalarField,
        u: &VectorField,
        t: f64,
    ) -> Result<(DiagnosticsRecord, DiagnosticsFlags)> {
        let v = self.cfg.frame_speed;
        let hint = match self.prev {
            Some((tp, tau_box)) => tau_box + (1.0 - v) * (t - tp),
            None => 0.0,
        };
        let hint = wrap_into(hint, field.grid);
        let est = estimate_shift(field, hint)?;
        self.prev = Some((t, est.tau));
        let tau = est.tau + v * t;
        let (grad_l1, grad_l2, grad_linf) = gradient_norms(sp, field);
        let fil = support_and_filament(field, Thresholds::from_max(self.cfg.m))?;
        let rec = DiagnosticsRecord {
            t,
            tau,
            tau_minus_wt: tau - t,
            dist_l1: est.distances.l1,
            dist_l2: est.distances.l2,
            dist_impulse: est.distances.impulse,
            grad_l1,
            grad_l2,
            grad_linf,
            holder_alpha_quotient: holder_quotient(field, self.cfg.holder_alpha)?,
            supp_diam: fil.supp_diam,
            filament_xdiam: fil.filament_xdiam,
            thin_column_min: fil.thin_column_min,
            udiff_linf: velocity_difference(u, est.tau),
            mass_plus: field.upper_sum(|_, w| w),
            impulse: field.upper_sum(|x2, w| x2 * w),
            l2_norm: field.l2_norm(),
        };
        Ok((
            rec,
            DiagnosticsFlags {
                multimodal_shift: est.multimodal,
                empty_level_set: fil.empty,
            },
        ))
    }
}

/// Keeps a shift hint where the dipole disc fits in the box.
fn wrap_into(tau: f64, g: Grid) -> f64 {
    let l = g.half_extent;
    let t = (tau + l).rem_euclid(2.0 * l) - l;
    t.clamp(-l + 1.0 + 2.0 * g.h, l - 1.0 - 2.0 * g.h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lamb(n: usize, l: f64, c: f64) -> ScalarField {
        let d = DipoleSpec::lamb().shifted(c);
        ScalarField::from_fn(Grid::new(n, l).unwrap(), |x| d.vorticity_at(x))
    }

    #[test]
    fn self_distance_vanishes() {
        let w = lamb(128, 4.0, 0.0);
        let d = stability_distance(&w, 0.0).unwrap();
        assert!(d.total() < 1e-12);
    }

    #[test]
    fn incremental_distance_matches_direct_sum() {
        let w = lamb(128, 4.0, 0.2);
        let tau = 0.37;
        let dl = DipoleSpec::lamb().shifted(tau);
        let g = w.grid;
        let (mut l1, mut l2, mut im) = (0.0, 0.0, 0.0);
        for j in g.upper_rows() {
            for i in 0..g.n {
                let x = g.point(i, j);
                let e = (w.at(i, j) - dl.vorticity_at(x)).abs();
                l1 += e;
                l2 += e * e;
                im += x[1] * e;
            }
        }
        let h2 = g.cell_area();
        let d = stability_distance(&w, tau).unwrap();
        assert!((d.l1 - l1 * h2).abs() < 1e-12);
        assert!((d.l2 - (l2 * h2).sqrt()).abs() < 1e-12);
        assert!((d.impulse - im * h2).abs() < 1e-12);
    }

    #[test]
    fn clipped_disc_is_an_error() {
        let w = lamb(64, 2.0, 0.0);
        assert!(stability_distance(&w, 1.5).is_err());
    }

    #[test]
    fn shift_recovers_center() {
        let w = lamb(256, 4.0, 1.25);
        let e = estimate_shift(&w, 1.0).unwrap();
        assert!((e.tau - 1.25).abs() < 1e-3, "{}", e.tau);
        assert!(!e.multimodal);
    }

    #[test]
    fn zero_field_geometry_is_flagged() {
        let g = Grid::new(32, 4.0).unwrap();
        let f = support_and_filament(&ScalarField::zeros(g), Thresholds::from_max(1.0)).unwrap();
        assert!(f.empty);
        assert_eq!((f.supp_diam, f.filament_xdiam, f.thin_column_min), (0.0, 0.0, 0.0));
    }

    #[test]
    fn component_wraps_periodically() {
        let g = Grid::new(32, 4.0).unwrap();
        // a band at x2 = 1 spanning the seam from x1 = 3 to x1 = -3
        let f = ScalarField::from_fn(g, |x| {
            if (x[1] - 1.0).abs() < 0.2 && x[0].abs() >= 3.0 {
                1.0
            } else {
                0.0
            }
        });
        let j = g.nearest(1.0);
        let c = component(&f, (g.nearest(3.0), j), 0.5, true);
        assert_eq!(c.max_x - c.min_x, 8);
        let mut occ = vec![false; 8];
        occ[0] = true;
        occ[7] = true;
        assert_eq!(circular_extent(&occ), 1);
    }

    #[test]
    fn four_and_eight_neighbour_differ_on_diagonals() {
        let g = Grid::new(16, 2.0).unwrap();
        let mut f = ScalarField::zeros(g);
        f.values[g.index(4, 10)] = 1.0;
        f.values[g.index(5, 11)] = 1.0;
        assert_eq!(component(&f, (4, 10), 0.5, true).nodes, 2);
        assert_eq!(component(&f, (4, 10), 0.5, false).nodes, 1);
    }

    #[test]
    fn holder_of_constant_is_zero() {
        let g = Grid::new(16, 2.0).unwrap();
        let f = ScalarField::from_fn(g, |_| 3.0);
        assert_eq!(holder_quotient(&f, 0.5).unwrap(), 0.0);
        assert!(holder_quotient(&f, 0.0).is_err());
    }

    #[test]
    fn profile_curve_basics() {
        let c = profile_distance_curve(3.0, 0.05).unwrap();
        let mid = c.taus.len() / 2;
        assert_eq!(c.taus[mid], 0.0);
        assert_eq!(c.f_values[mid], 0.0);
        let cf = 2.0 * DipoleSpec::lamb().l1_upper();
        for (t, f) in c.taus.iter().zip(&c.f_values) {
            if t.abs() >= 2.0 - 1e-12 {
                assert!((f - cf).abs() < 1e-3 * cf, "f({t}) = {f}");
            }
        }
        for k in mid..c.taus.len() - 1 {
            assert!(c.f_inf_values[k] <= c.f_inf_values[k + 1]);
        }
    }
}
