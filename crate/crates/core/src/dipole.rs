//! Closed-form Lamb dipole: vorticity, stream function and velocity on the
//! plane, plus integrals over the upper half plane.
//!
//! The dipole is supported on the unit disc around `center`, travels in `+x1`
//! with unit speed, and has vorticity `g(r) sin(theta)` inside the disc with
//! `g(r) = a J1(c_L r)`, `a = -2 c_L / J0(c_L)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{domain, Result};
use crate::quadrature::{adaptive, adaptive_2d};
use crate::special::{first_max_j1, first_zero_j1, j1, j1_over_x, j1_prime};

pub type Point = [f64; 2];

const QUAD_TOL: f64 = 1e-13;

/// The analytic Lamb dipole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleSpec {
    pub c_l: f64,
    /// `-2 c_L / J0(c_L)`, positive.
    pub amplitude_coeff: f64,
    /// Traveling speed `W_L`, always 1.
    pub speed: f64,
    pub center: Point,
}

/// Every analytic quantity at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub position: Point,
    pub vorticity: f64,
    pub stream: f64,
    pub velocity: Point,
}

impl Default for DipoleSpec {
    fn default() -> Self {
        Self::lamb()
    }
}

impl DipoleSpec {
    /// The unit-radius, unit-speed dipole centred at the origin.
    pub fn lamb() -> Self {
        static SPEC: OnceLock<DipoleSpec> = OnceLock::new();
        *SPEC.get_or_init(|| {
            let lc = first_zero_j1();
            DipoleSpec {
                c_l: lc.c_l,
                amplitude_coeff: -2.0 * lc.c_l / lc.j0_at_cl,
                speed: 1.0,
                center: [0.0, 0.0],
            }
        })
    }

    /// Copy translated by `dx` along `x1`.
    pub fn shifted(&self, dx: f64) -> Self {
        let mut s = *self;
        s.center[0] += dx;
        s
    }

    pub fn g(&self, r: f64) -> f64 {
        self.amplitude_coeff * j1(self.c_l * r)
    }

    pub fn g_prime(&self, r: f64) -> f64 {
        self.amplitude_coeff * self.c_l * j1_prime(self.c_l * r)
    }

    /// `g(r) / r`, with its limit `g'(0)` at the origin.
    fn g_over_r(&self, r: f64) -> f64 {
        self.amplitude_coeff * self.c_l * j1_over_x(self.c_l * r)
    }

    /// `m = max omega_L`, attained on the `x2` axis where `J1(c_L r)` peaks.
    pub fn max_vorticity(&self) -> f64 {
        self.amplitude_coeff * j1(first_max_j1())
    }

    fn local(&self, x: Point) -> (f64, f64, f64) {
        let x1 = x[0] - self.center[0];
        let x2 = x[1] - self.center[1];
        (x1, x2, x1.hypot(x2))
    }

    pub fn vorticity_at(&self, x: Point) -> f64 {
        let (_, x2, r) = self.local(x);
        if r > 1.0 {
            0.0
        } else {
            self.g_over_r(r) * x2
        }
    }

    /// Analytic gradient of the vorticity; zero outside the disc, the interior
    /// one-sided limit on the circle.
    pub fn vorticity_gradient_at(&self, x: Point) -> Point {
        let (x1, x2, r) = self.local(x);
        if r > 1.0 {
            return [0.0, 0.0];
        }
        let gr = self.g_over_r(r);
        if r == 0.0 {
            return [0.0, gr];
        }
        // d/dr (g/r) = (g' - g/r) / r
        let d = (self.g_prime(r) - gr) / r;
        [x2 * d * x1 / r, x2 * d * x2 / r + gr]
    }

    /// Stream function, continuous everywhere; the inner branch is used at the centre.
    pub fn stream_at(&self, x: Point) -> f64 {
        let (_, x2, r) = self.local(x);
        if r > 1.0 {
            x2 / (r * r)
        } else {
            let c2 = self.c_l * self.c_l;
            self.g_over_r(r) * x2 / c2 + x2
        }
    }

    /// Velocity `-grad_perp psi = (d2 psi, -d1 psi)`.
    pub fn velocity_at(&self, x: Point) -> Point {
        let (x1, x2, r) = self.local(x);
        if r > 1.0 {
            let r4 = r * r * r * r;
            return [(x1 * x1 - x2 * x2) / r4, 2.0 * x1 * x2 / r4];
        }
        let c2 = self.c_l * self.c_l;
        let gr = self.g_over_r(r);
        if r == 0.0 {
            return [self.speed + gr / c2, 0.0];
        }
        let s = x2 / r;
        let co = x1 / r;
        // (r g' - g) / r
        let bracket = self.g_prime(r) - gr;
        [
            self.speed + gr / c2 + s * s * bracket / c2,
            -s * co * bracket / c2,
        ]
    }

    pub fn sample(&self, x: Point) -> FieldSample {
        FieldSample {
            position: x,
            vorticity: self.vorticity_at(x),
            stream: self.stream_at(x),
            velocity: self.velocity_at(x),
        }
    }

    /// `S(kappa)`: vorticity on the upper half plane in the slab `x1 >= 1 - kappa`
    /// (relative to the centre), by nested adaptive Gauss quadrature in polar
    /// coordinates with the slab expressed as an angular limit.
    pub fn shell_mass(&self, kappa: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&kappa) {
            return domain(format!("shell_mass: kappa = {kappa} outside [0, 1]"));
        }
        if kappa == 0.0 {
            return Ok(0.0);
        }
        let edge = 1.0 - kappa;
        let v = adaptive_2d(
            |r, th| self.g(r) * th.sin() * r,
            edge,
            1.0,
            |_| 0.0,
            |r| if r <= edge { 0.0 } else { (edge / r).clamp(-1.0, 1.0).acos() },
            QUAD_TOL,
        );
        Ok(v)
    }

    /// `(nu_L, impulse)`: integrals of `omega_L` and `x2 omega_L` over the upper half plane.
    pub fn mass_and_impulse(&self) -> (f64, f64) {
        let mass = adaptive_2d(|r, th| self.g(r) * th.sin() * r, 0.0, 1.0, |_| 0.0, |_| PI, QUAD_TOL);
        let impulse = adaptive_2d(
            |r, th| self.g(r) * th.sin() * th.sin() * r * r,
            0.0,
            1.0,
            |_| 0.0,
            |_| PI,
            QUAD_TOL,
        );
        (mass, impulse)
    }

    /// `L^1` norm of the vorticity over the upper half plane; equals the mass
    /// since the dipole is nonnegative there.
    pub fn l1_upper(&self) -> f64 {
        2.0 * adaptive(|r| self.g(r) * r, 0.0, 1.0, QUAD_TOL)
    }

    /// `|(-Lap_h psi)(x) - omega(x)|` with the 5-point stencil of width `h`.
    pub fn laplacian_consistency(&self, x: Point, h: f64) -> f64 {
        let p = |dx: f64, dy: f64| self.stream_at([x[0] + dx, x[1] + dy]);
        let lap = (p(h, 0.0) + p(-h, 0.0) + p(0.0, h) + p(0.0, -h) - 4.0 * p(0.0, 0.0)) / (h * h);
        (-lap - self.vorticity_at(x)).abs()
    }
}

/// One row of the shell-lemma table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellRow {
    pub kappa: f64,
    pub mass: f64,
    pub ratio: f64,
}

/// `S(kappa)` and `S(kappa) / kappa^3` for `kappa = step, 2 step, ...` up to `kappa_max`.
pub fn shell_table(spec: &DipoleSpec, kappa_max: f64, step: f64) -> Result<Vec<ShellRow>> {
    if !(kappa_max > 0.0 && kappa_max <= 1.0) {
        return domain(format!("kappa_max = {kappa_max} outside (0, 1]"));
    }
    if !(step > 0.0 && step <= kappa_max) {
        return domain(format!("step = {step} outside (0, kappa_max]"));
    }
    let count = (kappa_max / step + 1e-9).floor() as usize;
    (1..=count)
        .map(|j| {
            let kappa = (j as f64 * step).min(1.0);
            let mass = spec.shell_mass(kappa)?;
            Ok(ShellRow {
                kappa,
                mass,
                ratio: mass / kappa.powi(3),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> DipoleSpec {
        DipoleSpec::lamb()
    }

    #[test]
    fn shell_table_rows() {
        let t = shell_table(&spec(), 0.25, 0.01).unwrap();
        assert_eq!(t.len(), 25);
        assert!((t[24].kappa - 0.25).abs() < 1e-15);
        assert!(t.windows(2).all(|w| w[1].mass >= w[0].mass));
        assert!(t.iter().all(|r| r.ratio > 0.0));
        assert!(shell_table(&spec(), 1.5, 0.1).is_err());
        assert!(shell_table(&spec(), 0.25, 0.0).is_err());
    }

    #[test]
    fn constants() {
        let s = spec();
        assert!(s.amplitude_coeff > 0.0);
        assert_eq!(s.speed, 1.0);
        assert!(s.g(0.0).abs() < 1e-15);
        assert!(s.g(1.0).abs() < 1e-13);
        assert!(s.g_prime(1.0) < 0.0);
        // g'(1) = -2 c_L^2 because J1'(c_L) = J0(c_L)
        assert!((s.g_prime(1.0) + 2.0 * s.c_l * s.c_l).abs() < 1e-11);
        for i in 1..100 {
            assert!(s.g(i as f64 / 100.0) > 0.0);
        }
    }

    #[test]
    fn vorticity_examples() {
        let s = spec();
        assert_eq!(s.vorticity_at([0.5, 0.0]), 0.0);
        assert_eq!(s.vorticity_at([1.5, 0.2]), 0.0);
        let want = s.amplitude_coeff * crate::special::series(1, s.c_l * 0.5);
        assert!((s.vorticity_at([0.0, 0.5]) - want).abs() < 1e-13);
    }

    #[test]
    fn odd_symmetry_exact() {
        let s = spec();
        for i in 0..50 {
            let x = [-1.2 + 0.05 * i as f64, 0.013 * i as f64];
            assert_eq!(s.vorticity_at([x[0], -x[1]]), -s.vorticity_at(x));
            let u = s.velocity_at(x);
            let v = s.velocity_at([x[0], -x[1]]);
            assert_eq!(u[0], v[0]);
            assert_eq!(u[1], -v[1]);
        }
    }

    #[test]
    fn stream_examples() {
        let s = spec();
        assert!((s.stream_at([0.0, 1.0]) - 1.0).abs() < 1e-13);
        assert!((s.stream_at([0.0, 2.0]) - 0.5).abs() < 1e-15);
        let c2 = s.c_l * s.c_l;
        let want = (s.g(0.5) / c2 + 0.5) * 0.8;
        assert!((s.stream_at([0.3, 0.4]) - want).abs() < 1e-13);
        assert_eq!(s.stream_at([0.0, 0.0]), 0.0);
    }

    #[test]
    fn velocity_examples() {
        let s = spec();
        let u = s.velocity_at([2.0, 0.0]);
        assert!((u[0] - 0.25).abs() < 1e-15 && u[1] == 0.0);
        let a = s.velocity_at([0.0, 1.0 + 1e-12]);
        let b = s.velocity_at([0.0, 1.0 - 1e-12]);
        assert!((a[0] - b[0]).abs() < 1e-10 && (a[1] - b[1]).abs() < 1e-10);
        for x1 in [-0.9, -0.3, 0.0, 0.4, 3.0] {
            assert_eq!(s.velocity_at([x1, 0.0])[1], 0.0);
        }
        // centre limit
        let c = s.velocity_at([0.0, 0.0]);
        let near = s.velocity_at([1e-7, 1e-7]);
        assert!((c[0] - near[0]).abs() < 1e-9 && near[1].abs() < 1e-9);
    }

    #[test]
    fn velocity_matches_stream_derivatives() {
        let s = spec();
        let h = 1e-5;
        for x in [[0.3, 0.4], [-0.5, 0.2], [1.5, 0.7], [-2.0, -1.0]] {
            let u = s.velocity_at(x);
            let d2 = (s.stream_at([x[0], x[1] + h]) - s.stream_at([x[0], x[1] - h])) / (2.0 * h);
            let d1 = (s.stream_at([x[0] + h, x[1]]) - s.stream_at([x[0] - h, x[1]])) / (2.0 * h);
            assert!((u[0] - d2).abs() < 1e-7, "{x:?}");
            assert!((u[1] + d1).abs() < 1e-7, "{x:?}");
        }
    }

    #[test]
    fn functional_relation() {
        let s = spec();
        let c2 = s.c_l * s.c_l;
        for i in 1..40 {
            for j in 1..20 {
                let x = [-1.0 + i as f64 / 20.0, j as f64 / 20.0];
                if x[0].hypot(x[1]) >= 1.0 {
                    continue;
                }
                let rel = c2 * (s.stream_at(x) - x[1]).max(0.0);
                assert!((s.vorticity_at(x) - rel).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn laplacian_examples() {
        let s = spec();
        assert!(s.laplacian_consistency([0.3, 0.4], 1e-3) < 1e-5);
        assert!(s.laplacian_consistency([2.0, 1.0], 1e-3) < 1e-6);
        // near the circle psi is only C^{2,alpha}; residual is larger but bounded
        let near = s.laplacian_consistency([0.99, 0.1], 1e-3);
        assert!(near < 1e-2, "{near}");
    }

    #[test]
    fn shell_mass_examples() {
        let s = spec();
        assert_eq!(s.shell_mass(0.0).unwrap(), 0.0);
        assert!(s.shell_mass(-0.1).is_err());
        assert!(s.shell_mass(1.1).is_err());
        // kappa = 1 is the slab x1 >= 0, half of the upper-half-plane mass
        let (mass, _) = s.mass_and_impulse();
        assert!((s.shell_mass(1.0).unwrap() - 0.5 * mass).abs() < 1e-10);
        let s01 = s.shell_mass(0.1).unwrap();
        assert!(s01 / 1e-3 > 0.0);
    }

    // S(kappa) reduces to a 1D integral: the angular integral of sin(theta)
    // up to acos((1-kappa)/r) is 1 - (1-kappa)/r.
    fn shell_mass_1d(s: &DipoleSpec, kappa: f64) -> f64 {
        adaptive(|r| s.g(r) * (r - (1.0 - kappa)), 1.0 - kappa, 1.0, 1e-15)
    }

    #[test]
    fn shell_mass_matches_1d_reduction() {
        let s = spec();
        for k in [0.01, 0.05, 0.1, 0.25, 0.5, 0.9] {
            let a = s.shell_mass(k).unwrap();
            let b = shell_mass_1d(&s, k);
            assert!((a - b).abs() < 1e-10, "kappa {k}: {a} vs {b}");
        }
    }

    #[test]
    fn shell_mass_small_kappa_asymptote() {
        // g ~ 2 c^2 (1 - r) near the rim, so S(kappa) ~ c^2 kappa^3 / 3
        let s = spec();
        let k = 1e-3;
        let ratio = s.shell_mass(k).unwrap() / (k * k * k);
        assert!((ratio - s.c_l * s.c_l / 3.0).abs() / ratio < 1e-2);
    }

    #[test]
    fn mass_and_impulse_vs_polar_reduction() {
        let s = spec();
        let (mass, impulse) = s.mass_and_impulse();
        let mass_1d = 2.0 * adaptive(|r| s.g(r) * r, 0.0, 1.0, 1e-15);
        let impulse_1d = 0.5 * PI * adaptive(|r| s.g(r) * r * r, 0.0, 1.0, 1e-15);
        assert!(mass > 0.0 && impulse > 0.0);
        assert!((mass - mass_1d).abs() < 1e-10);
        assert!((impulse - impulse_1d).abs() < 1e-10);
        // the far field psi = x2 / r^2 fixes the impulse at pi
        assert!((impulse - PI).abs() < 1e-10);
    }

    #[test]
    fn max_vorticity_is_the_max() {
        let s = spec();
        let m = s.max_vorticity();
        let mut best: f64 = 0.0;
        for i in 0..=2000 {
            best = best.max(s.vorticity_at([0.0, i as f64 / 2000.0]));
        }
        assert!(best <= m + 1e-12 && m - best < 1e-5);
    }
}
