//! Fits and pass/fail summaries computed from the files of a run directory.

use std::fmt::Write as _;

use crate::diagnostics::DiagnosticsRecord;
use crate::tracer::TrajectoryLog;

/// Least-squares line `y = slope x + intercept`; `None` with fewer than two
/// distinct abscissae.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for k in 0..n {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Exponent `p` of the least-squares fit `y = c x^p` over positive pairs.
pub fn power_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    linear_fit(&lx, &ly).map(|(p, b)| (p, b.exp()))
}

/// Smallest `C` with `y <= C x` for all pairs with `x > 0`.
pub fn bound_constant(xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .filter(|(x, _)| **x > 0.0)
        .map(|(x, y)| y / x)
        .fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

/// Aggregates of a diagnostics series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSummary {
    pub rows: usize,
    pub t_first: f64,
    pub t_last: f64,
    pub max_abs_tau_minus_wt: f64,
    pub tau_slope: f64,
    pub max_distance: f64,
    pub drift_mass_plus: f64,
    pub drift_impulse: f64,
    pub drift_l2: f64,
    pub max_udiff: f64,
    /// Fits over the filament window.
    pub window: (f64, f64),
    pub filament_slope: f64,
    pub grad_linf_slope: f64,
    pub max_thin_column_t: f64,
}

impl SeriesSummary {
    /// `window` selects the rows used by the filament fits.
    pub fn new(rows: &[DiagnosticsRecord], window: (f64, f64)) -> Option<Self> {
        let first = rows.first()?;
        let last = rows.last()?;
        let col = |f: fn(&DiagnosticsRecord) -> f64| rows.iter().map(f).collect::<Vec<_>>();
        let t = col(|r| r.t);
        let tau = col(|r| r.tau);
        let max_of = |f: fn(&DiagnosticsRecord) -> f64| rows.iter().map(f).fold(0.0, f64::max);
        let drift = |f: fn(&DiagnosticsRecord) -> f64| rows.iter().map(|r| rel(f(r), f(first))).fold(0.0, f64::max);
        let win: Vec<&DiagnosticsRecord> = rows
            .iter()
            .filter(|r| r.t >= window.0 - 1e-9 && r.t <= window.1 + 1e-9)
            .collect();
        let wt: Vec<f64> = win.iter().map(|r| r.t).collect();
        let wcol = |f: fn(&DiagnosticsRecord) -> f64| win.iter().map(|r| f(r)).collect::<Vec<_>>();
        let slope = |ys: Vec<f64>| linear_fit(&wt, &ys).map_or(f64::NAN, |f| f.0);
        Some(SeriesSummary {
            rows: rows.len(),
            t_first: first.t,
            t_last: last.t,
            max_abs_tau_minus_wt: rows.iter().map(|r| r.tau_minus_wt.abs()).fold(0.0, f64::max),
            tau_slope: linear_fit(&t, &tau).map_or(f64::NAN, |f| f.0),
            max_distance: max_of(|r| r.dist_l1 + r.dist_l2 + r.dist_impulse),
            drift_mass_plus: drift(|r| r.mass_plus),
            drift_impulse: drift(|r| r.impulse),
            drift_l2: drift(|r| r.l2_norm),
            max_udiff: max_of(|r| r.udiff_linf),
            window,
            filament_slope: slope(wcol(|r| r.filament_xdiam)),
            grad_linf_slope: slope(wcol(|r| r.grad_linf)),
            max_thin_column_t: win
                .iter()
                .map(|r| r.thin_column_min * r.t)
                .filter(|v| v.is_finite())
                .fold(0.0, f64::max),
        })
    }
}

/// Smallest `tau(t) - x1(t)` minus `t/3` over logged times in `[t_min, t_max]`,
/// matching series rows by time.
pub fn lag_margin(rows: &[DiagnosticsRecord], log: &TrajectoryLog, label: &str, t_min: f64, t_max: f64) -> Option<f64> {
    let track = log.track(label)?;
    let mut best: Option<f64> = None;
    for (t, x) in track {
        if t < t_min - 1e-9 || t > t_max + 1e-9 {
            continue;
        }
        if let Some(r) = rows.iter().find(|r| (r.t - t).abs() < 1e-9) {
            let m = r.tau - x[0] - t / 3.0;
            best = Some(best.map_or(m, |b: f64| b.min(m)));
        }
    }
    best
}

/// One line of the acceptance table.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, limit: &str, pass: bool) -> Self {
        Check {
            name: name.into(),
            value,
            limit: limit.into(),
            pass,
        }
    }
}

/// The checks that can be evaluated from one run directory.
pub fn checks(s: &SeriesSummary, drift_l1: Option<f64>, lag: Option<f64>) -> Vec<Check> {
    let mut out = vec![
        Check::new("tau_slope", s.tau_slope, "~1", (s.tau_slope - 1.0).abs() < 0.05),
        Check::new("max_abs_tau_minus_Wt", s.max_abs_tau_minus_wt, "<= 0.03", s.max_abs_tau_minus_wt <= 0.03),
        Check::new("drift_mass_plus", s.drift_mass_plus, "< 1e-3", s.drift_mass_plus < 1e-3),
        Check::new("drift_impulse", s.drift_impulse, "< 1e-3", s.drift_impulse < 1e-3),
        Check::new("drift_l2", s.drift_l2, "< 1e-3", s.drift_l2 < 1e-3),
    ];
    if let Some(d) = drift_l1 {
        out.push(Check::new("drift_l1", d, "< 1e-3", d < 1e-3));
    }
    out.push(Check::new("max_distance", s.max_distance, "(reported)", true));
    out.push(Check::new("max_udiff_linf", s.max_udiff, "(reported)", true));
    if s.t_last >= s.window.1 - 1e-9 {
        out.push(Check::new("filament_xdiam_slope", s.filament_slope, ">= 0.25", s.filament_slope >= 0.25));
        out.push(Check::new("grad_linf_slope", s.grad_linf_slope, "> 0", s.grad_linf_slope > 0.0));
        out.push(Check::new("max_thin_column_t", s.max_thin_column_t, "<= 80", s.max_thin_column_t <= 80.0));
    }
    if let Some(m) = lag {
        out.push(Check::new("lag_margin", m, "> 0", m > 0.0));
    }
    out
}

pub fn render(checks: &[Check]) -> String {
    let mut s = String::from("check,value,limit,status\n");
    for c in checks {
        let _ = writeln!(
            s,
            "{},{:.6e},{},{}",
            c.name,
            c.value,
            c.limit,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    s
}
