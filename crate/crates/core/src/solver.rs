//! Pseudo-spectral time integration of the active-scalar transport equation
//! `d_t w + (u - V e1) . grad w = 0` with `u = -grad_perp (-Lap)^{-alpha} w`.
//!
//! The state is advanced in Fourier space with classical RK4. Products are
//! formed on the grid and dealiased with the two-thirds rule; the odd-symmetry
//! projector acts on the spectrum as `s(k1, k2) <- (s(k1, k2) - s(k1, -k2)) / 2`,
//! which is the nodal reflection `x2 -> -x2` exactly.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::spectral::{check_alpha, Spectral, Spectrum};

/// Largest admissible `dt max|u - V e1| / h`.
pub const CFL_LIMIT: f64 = 0.8;
/// Courant number targeted by [`auto_dt`].
pub const CFL_TARGET: f64 = 0.4;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: Grid,
    pub alpha: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Speed `V` of the co-moving frame along `x1`.
    pub frame_speed: f64,
    /// Project onto odd data every this many steps; 0 disables.
    pub symmetrize_every: u32,
    pub snapshot_interval: f64,
    pub hyperviscosity_coeff: f64,
    pub hyperviscosity_order: u32,
    /// Hyperviscosity acts only for `t >= hyperviscosity_start`.
    pub hyperviscosity_start: f64,
    pub mean_flow: MeanFlow,
}

/// Choice of the uniform (zero-mode) part of the velocity, which the periodic
/// Biot-Savart law leaves undetermined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanFlow {
    /// Zero box average.
    Zero,
    /// Box average of the free-space velocity of the same vorticity,
    /// `(1 / 2|box|) int (x2 w, -x1 w)`; Euler only, zero for `alpha < 1`.
    #[default]
    FreeSpace,
}

impl std::str::FromStr for MeanFlow {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(MeanFlow::Zero),
            "free-space" | "free_space" => Ok(MeanFlow::FreeSpace),
            _ => Err(Error::Config(format!("mean_flow = {s}: expected zero or free-space"))),
        }
    }
}

impl std::fmt::Display for MeanFlow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MeanFlow::Zero => "zero",
            MeanFlow::FreeSpace => "free-space",
        })
    }
}

impl SolverConfig {
    pub fn new(grid: Grid, dt: f64, t_end: f64) -> Self {
        SolverConfig {
            grid,
            alpha: 1.0,
            dt,
            t_end,
            frame_speed: 0.0,
            symmetrize_every: 1,
            snapshot_interval: 1.0,
            hyperviscosity_coeff: 0.0,
            hyperviscosity_order: 4,
            hyperviscosity_start: 0.0,
            mean_flow: MeanFlow::FreeSpace,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        let bad = |m: String| Err(Error::Config(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end = {} must be nonnegative", self.t_end));
        }
        if !self.frame_speed.is_finite() {
            return bad("frame_speed must be finite".into());
        }
        if !(self.snapshot_interval.is_finite() && self.snapshot_interval > 0.0) {
            return bad(format!("snapshot_interval = {} must be positive", self.snapshot_interval));
        }
        if !(self.hyperviscosity_coeff.is_finite() && self.hyperviscosity_coeff >= 0.0) {
            return bad("hyperviscosity_coeff must be nonnegative".into());
        }
        if self.hyperviscosity_order == 0 {
            return bad("hyperviscosity_order must be at least 1".into());
        }
        Ok(())
    }

    /// Time step actually used: `dt` shrunk so that a whole number of steps
    /// fits in each snapshot interval.
    pub fn effective_dt(&self) -> f64 {
        self.snapshot_interval / self.steps_per_snapshot() as f64
    }

    pub fn steps_per_snapshot(&self) -> u64 {
        ((self.snapshot_interval / self.dt) - 1e-9).ceil().max(1.0) as u64
    }

    pub fn total_steps(&self) -> u64 {
        let k = self.t_end / self.effective_dt();
        if (k - k.round()).abs() < 1e-6 {
            k.round() as u64
        } else {
            k.ceil() as u64
        }
    }
}

/// Conserved and monitored integrals of one state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Ledger {
    /// `int_{x2 > 0} w`.
    pub mass_plus: f64,
    /// `int_{x2 > 0} |w|`.
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// `int_{x2 > 0} x2 w`.
    pub impulse: f64,
    /// `(1/2) int w (-Lap)^{-alpha} w`.
    pub energy: f64,
}

impl Ledger {
    pub fn is_finite(&self) -> bool {
        [self.mass_plus, self.l1, self.l2, self.linf, self.impulse, self.energy]
            .iter()
            .all(|v| v.is_finite())
    }

    /// Largest relative change of each entry against a reference, in the
    /// order mass+, L1, L2, impulse, energy; Linf is reported as growth.
    pub fn drift_from(&self, r: &Ledger) -> LedgerDrift {
        let rel = |a: f64, b: f64| if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() };
        LedgerDrift {
            mass_plus: rel(self.mass_plus, r.mass_plus),
            l1: rel(self.l1, r.l1),
            l2: rel(self.l2, r.l2),
            impulse: rel(self.impulse, r.impulse),
            energy: rel(self.energy, r.energy),
            linf_growth: if r.linf == 0.0 { self.linf } else { self.linf / r.linf - 1.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LedgerDrift {
    pub mass_plus: f64,
    pub l1: f64,
    pub l2: f64,
    pub impulse: f64,
    pub energy: f64,
    pub linf_growth: f64,
}

impl LedgerDrift {
    pub fn max(&self, other: &LedgerDrift) -> LedgerDrift {
        LedgerDrift {
            mass_plus: self.mass_plus.max(other.mass_plus),
            l1: self.l1.max(other.l1),
            l2: self.l2.max(other.l2),
            impulse: self.impulse.max(other.impulse),
            energy: self.energy.max(other.energy),
            linf_growth: self.linf_growth.max(other.linf_growth),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub field: ScalarField,
    pub time: f64,
    pub step_count: u64,
    pub ledger: Ledger,
}

/// Receives the state at every snapshot time of a run.
pub trait Sink {
    fn snapshot(&mut self, state: &SimState, solver: &mut Solver) -> Result<()>;
}

/// Sink that keeps every snapshot in memory.
#[derive(Debug, Default)]
pub struct Collect {
    pub states: Vec<SimState>,
}

impl Sink for Collect {
    fn snapshot(&mut self, state: &SimState, _: &mut Solver) -> Result<()> {
        self.states.push(state.clone());
        Ok(())
    }
}

impl<F: FnMut(&SimState, &mut Solver) -> Result<()>> Sink for F {
    fn snapshot(&mut self, state: &SimState, solver: &mut Solver) -> Result<()> {
        self(state, solver)
    }
}

/// `dt = 0.4 h / max|u0 - V e1|` for the given initial field, with `u0` the
/// velocity the solver would use.
pub fn auto_dt(initial: &ScalarField, cfg: &SolverConfig) -> Result<f64> {
    let mut probe = cfg.clone();
    probe.dt = 1.0;
    probe.hyperviscosity_coeff = 0.0;
    let mut solver = Solver::new(probe)?;
    let u = solver.velocity(initial);
    let speed = u.max_relative_speed(cfg.frame_speed);
    if speed == 0.0 {
        return Err(Error::Config("cannot choose dt automatically for a motionless field".into()));
    }
    Ok(CFL_TARGET * initial.grid.h / speed)
}

/// Stepper owning the transform plans and work buffers for one configuration.
pub struct Solver {
    cfg: SolverConfig,
    dt: f64,
    sp: Spectral,
    mult: Arc<Vec<f64>>,
    damp: Vec<f64>,
    background: [f64; 2],
    w: [Vec<f64>; 4],
    prod: Vec<f64>,
    hat: [Spectrum; 4],
    stage: Spectrum,
    k: [Spectrum; 4],
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver").field("cfg", &self.cfg).field("dt", &self.dt).finish()
    }
}

impl Solver {
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let mut sp = Spectral::new(cfg.grid);
        let mult = sp.fractional_multiplier(cfg.alpha)?;
        let p = cfg.hyperviscosity_order as i32;
        let damp: Vec<f64> = sp.k2().iter().map(|&kk| cfg.hyperviscosity_coeff * kk.powi(p)).collect();
        let dt = cfg.effective_dt();
        let kmax = (0..damp.len()).filter(|&i| sp.is_kept(i)).map(|i| damp[i]).fold(0.0, f64::max);
        if kmax * dt > 2.5 {
            return Err(Error::Config(format!(
                "hyperviscosity {} of order {} is explicitly unstable at dt = {dt:.3e}",
                cfg.hyperviscosity_coeff, cfg.hyperviscosity_order
            )));
        }
        let len = cfg.grid.len();
        let sl = sp.spectrum_len();
        let z = || vec![Complex64::default(); sl];
        Ok(Solver {
            background: [0.0; 2],
            dt,
            sp,
            mult,
            damp,
            w: [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            prod: vec![0.0; len],
            hat: [z(), z(), z(), z()],
            stage: z(),
            k: [z(), z(), z(), z()],
            cfg,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn spectral(&mut self) -> &mut Spectral {
        &mut self.sp
    }

    /// Lab-frame velocity of a field under this configuration's law.
    pub fn velocity(&mut self, field: &ScalarField) -> VectorField {
        let mut s = self.sp.forward(&field.values);
        for (v, m) in s.iter_mut().zip(self.mult.iter()) {
            *v *= *m;
        }
        let n = self.cfg.grid.n;
        let nk = n / 2 + 1;
        let (a, b) = self.hat.split_at_mut(1);
        for c in 0..nk {
            let kx = self.sp.kx_d()[c];
            for r in 0..n {
                let idx = c * n + r;
                let ky = self.sp.ky_d()[r];
                a[0][idx] = Complex64::new(-ky * s[idx].im, ky * s[idx].re);
                b[0][idx] = Complex64::new(kx * s[idx].im, -kx * s[idx].re);
            }
        }
        let mut u = VectorField::zeros(self.cfg.grid);
        self.sp.inverse_into(&self.hat[0], &mut u.u1);
        self.sp.inverse_into(&self.hat[1], &mut u.u2);
        let bg = self.background_flow(field);
        if bg != [0.0; 2] {
            u.u1.iter_mut().for_each(|v| *v += bg[0]);
            u.u2.iter_mut().for_each(|v| *v += bg[1]);
        }
        u
    }

    /// Uniform velocity added to the periodic Biot-Savart velocity.
    pub fn background_flow(&self, field: &ScalarField) -> [f64; 2] {
        if self.cfg.mean_flow == MeanFlow::Zero || self.cfg.alpha != 1.0 {
            return [0.0; 2];
        }
        let g = field.grid;
        let (mut p1, mut p2) = (0.0, 0.0);
        for j in 0..g.n {
            let x2 = g.coord(j);
            for i in 0..g.n {
                let w = field.values[g.index(i, j)];
                p1 += x2 * w;
                p2 -= g.coord(i) * w;
            }
        }
        let c = g.cell_area() / (2.0 * g.area());
        [p1 * c, p2 * c]
    }

    pub fn ledger(&mut self, field: &ScalarField) -> Ledger {
        let s = self.sp.forward(&field.values);
        self.ledger_with(field, &s)
    }

    fn ledger_with(&self, field: &ScalarField, s: &[Complex64]) -> Ledger {
        Ledger {
            mass_plus: field.upper_sum(|_, v| v),
            l1: field.l1_upper(),
            l2: field.l2_norm(),
            linf: field.max_abs(),
            impulse: field.upper_sum(|x2, v| x2 * v),
            energy: self.sp.weighted_l2_sq(s, &self.mult),
        }
    }

    pub fn initial_state(&mut self, field: ScalarField) -> Result<SimState> {
        if field.grid != self.cfg.grid {
            return Err(Error::Config("initial field grid does not match the configuration".into()));
        }
        if !field.is_finite() {
            return Err(Error::NonFinite { step: 0, t: 0.0 });
        }
        let ledger = self.ledger(&field);
        Ok(SimState {
            field,
            time: 0.0,
            step_count: 0,
            ledger,
        })
    }

    /// `-(u - V e1) . grad w`, dealiased, minus hyperviscosity when active.
    pub fn rhs(&mut self, state: &SimState) -> Result<ScalarField> {
        let mut s = self.sp.forward(&state.field.values);
        self.sp.dealias(&mut s);
        let mut out = self.sp.zero_spectrum();
        self.rhs_hat(&s, &mut out, state.time, true)?;
        let mut values = vec![0.0; self.cfg.grid.len()];
        self.sp.inverse_into(&out, &mut values);
        Ok(ScalarField {
            grid: self.cfg.grid,
            values,
        })
    }

    /// Spectral right-hand side of `s` into `out`. With `check` set the
    /// Courant number of the stage velocity is checked against [`CFL_LIMIT`].
    fn rhs_hat(&mut self, s: &[Complex64], out: &mut [Complex64], t: f64, check: bool) -> Result<()> {
        let n = self.cfg.grid.n;
        let nk = n / 2 + 1;
        let kx = self.sp.kx_d();
        let ky = self.sp.ky_d();
        let mult = &self.mult;
        let [h0, h1, h2, h3] = &mut self.hat;
        for c in 0..nk {
            let kxc = kx[c];
            for r in 0..n {
                let idx = c * n + r;
                let v = s[idx];
                let p = v * mult[idx];
                let kyr = ky[r];
                // i k z = (-k z.im, k z.re)
                h0[idx] = Complex64::new(-kyr * p.im, kyr * p.re);
                h1[idx] = Complex64::new(kxc * p.im, -kxc * p.re);
                h2[idx] = Complex64::new(-kxc * v.im, kxc * v.re);
                h3[idx] = Complex64::new(-kyr * v.im, kyr * v.re);
            }
        }
        for i in 0..4 {
            self.sp.inverse_into(&self.hat[i], &mut self.w[i]);
        }
        let vf = self.cfg.frame_speed - self.background[0];
        let vb = self.background[1];
        let [u1, u2, wx, wy] = &self.w;
        if check {
            let mut vmax2: f64 = 0.0;
            for k in 0..u1.len() {
                let a = u1[k] - vf;
                let b = u2[k] + vb;
                vmax2 = vmax2.max(a * a + b * b);
            }
            let courant = self.dt * vmax2.sqrt() / self.cfg.grid.h;
            if !courant.is_finite() || courant > CFL_LIMIT {
                return Err(Error::Cfl {
                    t,
                    courant,
                    limit: CFL_LIMIT,
                });
            }
        }
        for k in 0..u1.len() {
            self.prod[k] = (u1[k] - vf) * wx[k] + (u2[k] + vb) * wy[k];
        }
        self.sp.forward_into(&self.prod, out);
        let hyper = self.cfg.hyperviscosity_coeff > 0.0 && t >= self.cfg.hyperviscosity_start;
        for (idx, o) in out.iter_mut().enumerate() {
            if self.sp.is_kept(idx) {
                *o = -*o;
                if hyper {
                    *o -= s[idx] * self.damp[idx];
                }
            } else {
                *o = Complex64::default();
            }
        }
        Ok(())
    }

    /// One classical RK4 step of size [`Solver::dt`].
    pub fn step_rk4(&mut self, state: &SimState) -> Result<SimState> {
        self.background = self.background_flow(&state.field);
        let mut s = self.sp.forward(&state.field.values);
        self.sp.dealias(&mut s);
        let s = self.advance(s, state.time, state.step_count)?;
        self.finish(s, state.time + self.dt, state.step_count + 1)
    }

    fn advance(&mut self, s: Spectrum, t: f64, step: u64) -> Result<Spectrum> {
        let dt = self.dt;
        let mut k = std::mem::take(&mut self.k);
        let mut stage = std::mem::take(&mut self.stage);
        let res = (|| -> Result<Spectrum> {
            self.rhs_hat(&s, &mut k[0], t, true)?;
            for (i, a) in [(1, 0.5), (2, 0.5), (3, 1.0)] {
                for ((st, &v), &kk) in stage.iter_mut().zip(&s).zip(&k[i - 1]) {
                    *st = v + kk * (a * dt);
                }
                let (_, rest) = k.split_at_mut(i);
                self.rhs_hat(&stage, &mut rest[0], t + a * dt, false)?;
            }
            let mut next = s.clone();
            let c = dt / 6.0;
            for (idx, v) in next.iter_mut().enumerate() {
                *v += (k[0][idx] + (k[1][idx] + k[2][idx]) * 2.0 + k[3][idx]) * c;
            }
            Ok(next)
        })();
        self.k = k;
        self.stage = stage;
        let mut next = res?;
        let every = self.cfg.symmetrize_every as u64;
        if every > 0 && (step + 1).is_multiple_of(every) {
            self.project_odd(&mut next);
        }
        Ok(next)
    }

    fn project_odd(&self, s: &mut [Complex64]) {
        let n = self.cfg.grid.n;
        let nk = n / 2 + 1;
        for c in 0..nk {
            let col = &mut s[c * n..(c + 1) * n];
            col[0] = Complex64::default();
            col[n / 2] = Complex64::default();
            for r in 1..n / 2 {
                let v = 0.5 * (col[r] - col[n - r]);
                col[r] = v;
                col[n - r] = -v;
            }
        }
    }

    fn finish(&mut self, s: Spectrum, time: f64, step_count: u64) -> Result<SimState> {
        let mut values = vec![0.0; self.cfg.grid.len()];
        self.sp.inverse_into(&s, &mut values);
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: step_count, t: time });
        }
        let field = ScalarField {
            grid: self.cfg.grid,
            values,
        };
        if self.cfg.symmetrize_every == 1 {
            debug_assert!(field.odd_symmetry_residual() <= 1e-10 * field.max_abs().max(1.0));
        }
        let ledger = self.ledger_with(&field, &s);
        if !ledger.is_finite() {
            return Err(Error::NonFinite { step: step_count, t: time });
        }
        Ok(SimState {
            field,
            time,
            step_count,
            ledger,
        })
    }

    /// Integrates to `t_end`, handing the state to `sink` at `t = 0` and at
    /// every snapshot interval (and at `t_end` if it is not a snapshot time).
    pub fn run(&mut self, initial: ScalarField, sink: &mut dyn Sink) -> Result<SimState> {
        if self.cfg.symmetrize_every > 0 {
            let res = initial.odd_symmetry_residual();
            if res > 1e-10 * initial.max_abs().max(1.0) {
                return Err(Error::Domain(format!("initial field is not odd in x2 (residual {res:.3e})")));
            }
        }
        let mut state = self.initial_state(initial)?;
        self.background = self.background_flow(&state.field);
        sink.snapshot(&state, self)?;
        let total = self.cfg.total_steps();
        let per = self.cfg.steps_per_snapshot();
        if total == 0 {
            return Ok(state);
        }
        let mut s = self.sp.forward(&state.field.values);
        self.sp.dealias(&mut s);
        for step in 0..total {
            let t = step as f64 * self.dt;
            s = self.advance(s, t, step)?;
            let done = step + 1;
            if done % per == 0 || done == total {
                state = self.finish(s.clone(), done as f64 * self.dt, done)?;
                sink.snapshot(&state, self)?;
            } else if s.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::NonFinite {
                    step: done,
                    t: done as f64 * self.dt,
                });
            }
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dipole::DipoleSpec;

    fn lamb_field(n: usize, l: f64) -> ScalarField {
        let d = DipoleSpec::lamb();
        ScalarField::from_fn(Grid::new(n, l).unwrap(), |x| d.vorticity_at(x))
    }

    #[test]
    fn zero_field_stays_zero() {
        let g = Grid::new(32, 4.0).unwrap();
        let mut s = Solver::new(SolverConfig::new(g, 0.01, 0.1)).unwrap();
        let st = s.initial_state(ScalarField::zeros(g)).unwrap();
        assert!(s.rhs(&st).unwrap().values.iter().all(|&v| v == 0.0));
        let next = s.step_rk4(&st).unwrap();
        assert!(next.field.values.iter().all(|&v| v == 0.0));
        assert!((next.time - 0.01).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let g = Grid::new(32, 4.0).unwrap();
        let mut c = SolverConfig::new(g, 0.01, 1.0);
        c.alpha = 0.4;
        assert!(matches!(c.validate(), Err(Error::Domain(_))));
        c.alpha = 1.0;
        c.dt = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn step_bookkeeping() {
        let g = Grid::new(32, 4.0).unwrap();
        let mut c = SolverConfig::new(g, 0.3, 1.0);
        c.snapshot_interval = 0.5;
        assert_eq!(c.steps_per_snapshot(), 2);
        assert!((c.effective_dt() - 0.25).abs() < 1e-15);
        assert_eq!(c.total_steps(), 4);
        c.t_end = 0.0;
        assert_eq!(c.total_steps(), 0);
    }

    #[test]
    fn zero_duration_run_returns_initial() {
        let w = lamb_field(64, 4.0);
        let mut s = Solver::new(SolverConfig::new(w.grid, 0.01, 0.0)).unwrap();
        let mut sink = Collect::default();
        let out = s.run(w.clone(), &mut sink).unwrap();
        assert_eq!(out.field, w);
        assert_eq!(sink.states.len(), 1);
    }

    #[test]
    fn cfl_violation_aborts() {
        let w = lamb_field(64, 4.0);
        let mut s = Solver::new(SolverConfig::new(w.grid, 1.0, 1.0)).unwrap();
        let st = s.initial_state(w).unwrap();
        assert!(matches!(s.step_rk4(&st), Err(Error::Cfl { .. })));
    }

    #[test]
    fn rejects_even_initial_data() {
        let g = Grid::new(32, 4.0).unwrap();
        let f = ScalarField::from_fn(g, |x| (-x[0] * x[0] - x[1] * x[1]).exp());
        let mut s = Solver::new(SolverConfig::new(g, 0.01, 0.1)).unwrap();
        assert!(s.run(f, &mut Collect::default()).is_err());
    }

    #[test]
    fn symmetry_kept_exact() {
        let w = lamb_field(64, 4.0);
        let mut c = SolverConfig::new(w.grid, 1.0, 1.0);
        c.frame_speed = 1.0;
        let dt = auto_dt(&w, &c).unwrap();
        c.dt = dt;
        c.t_end = 5.0 * dt;
        c.snapshot_interval = 5.0 * dt;
        let mut s = Solver::new(c).unwrap();
        let out = s.run(w, &mut Collect::default()).unwrap();
        assert!(out.field.odd_symmetry_residual() < 1e-12);
        assert_eq!(out.step_count, 5);
    }

    #[test]
    fn velocity_matches_spectral_core() {
        let w = lamb_field(64, 4.0);
        let mut c = SolverConfig::new(w.grid, 0.01, 0.1);
        c.mean_flow = MeanFlow::Zero;
        let mut s = Solver::new(c).unwrap();
        let a = s.velocity(&w);
        let b = Spectral::new(w.grid).euler_velocity(&w);
        assert_eq!(a, b);
    }

    #[test]
    fn free_space_mean_flow_of_dipole() {
        // box average of the free-space dipole velocity is impulse / |box|
        let w = lamb_field(128, 4.0);
        let s = Solver::new(SolverConfig::new(w.grid, 0.01, 0.1)).unwrap();
        let bg = s.background_flow(&w);
        assert!((bg[0] - std::f64::consts::PI / 64.0).abs() < 1e-3 * bg[0]);
        assert!(bg[1].abs() < 1e-12);
    }
}
