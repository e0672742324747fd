//! Pseudo-spectral operators on the periodic grid.
//!
//! Spectra use the real-to-complex half layout: `n/2 + 1` columns in `k1`
//! (nonnegative) by `n` rows in `k2`, stored column-major so that index
//! `c * n + r` holds mode `(c, r)` with signed `k2` index `r` or `r - n`.
//! Wavenumbers are `pi m / L`. Transforms are unnormalised forward and
//! scaled by `1/n^2` on the way back.

use std::collections::HashMap;
use std::sync::Arc;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Result};
use crate::grid::{Grid, ScalarField, VectorField};

pub type Spectrum = Vec<Complex64>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Validates an active-scalar exponent: `1/2 < alpha <= 1`.
pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.5 && alpha <= 1.0 {
        Ok(())
    } else {
        domain(format!("alpha = {alpha} outside (1/2, 1]"))
    }
}

/// FFT plans, wavenumber tables and cached multipliers for one grid.
pub struct Spectral {
    grid: Grid,
    nk: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Derivative wavenumbers with the Nyquist mode zeroed.
    kx_d: Vec<f64>,
    ky_d: Vec<f64>,
    /// Full `|k|^2` per mode.
    k2: Vec<f64>,
    keep: Vec<bool>,
    inv_lap: Vec<f64>,
    fractional: HashMap<u64, Arc<Vec<f64>>>,
    row_in: Vec<f64>,
    row_buf: Vec<Complex64>,
    col_buf: Vec<Complex64>,
    r_scratch: Vec<Complex64>,
    c_scratch: Vec<Complex64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let n = grid.n;
        let nk = n / 2 + 1;
        let mut rp = RealFftPlanner::<f64>::new();
        let r2c = rp.plan_fft_forward(n);
        let c2r = rp.plan_fft_inverse(n);
        let mut cp = FftPlanner::<f64>::new();
        let fwd = cp.plan_fft_forward(n);
        let inv = cp.plan_fft_inverse(n);
        let unit = std::f64::consts::PI / grid.half_extent;

        let kx_d: Vec<f64> = (0..nk).map(|c| if c == n / 2 { 0.0 } else { c as f64 * unit }).collect();
        let ky_d: Vec<f64> = (0..n)
            .map(|r| if r == n / 2 { 0.0 } else { signed(r, n) as f64 * unit })
            .collect();
        let cutoff = (n / 3) as i64;
        let mut k2 = vec![0.0; nk * n];
        let mut keep = vec![false; nk * n];
        let mut inv_lap = vec![0.0; nk * n];
        for c in 0..nk {
            for r in 0..n {
                let mx = c as i64;
                let my = signed(r, n);
                let kk = ((mx * mx + my * my) as f64) * unit * unit;
                let idx = c * n + r;
                k2[idx] = kk;
                keep[idx] = mx <= cutoff && my.abs() <= cutoff;
                inv_lap[idx] = if idx == 0 { 0.0 } else { 1.0 / kk };
            }
        }
        let r_len = r2c.get_scratch_len().max(c2r.get_scratch_len());
        let c_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Spectral {
            grid,
            nk,
            r2c,
            c2r,
            fwd,
            inv,
            kx_d,
            ky_d,
            k2,
            keep,
            inv_lap,
            fractional: HashMap::new(),
            row_in: vec![0.0; n],
            row_buf: vec![Complex64::default(); n * nk],
            col_buf: vec![Complex64::default(); n * nk],
            r_scratch: vec![Complex64::default(); r_len],
            c_scratch: vec![Complex64::default(); c_len],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn spectrum_len(&self) -> usize {
        self.nk * self.grid.n
    }

    pub fn zero_spectrum(&self) -> Spectrum {
        vec![Complex64::default(); self.spectrum_len()]
    }

    pub(crate) fn kx_d(&self) -> &[f64] {
        &self.kx_d
    }

    pub(crate) fn ky_d(&self) -> &[f64] {
        &self.ky_d
    }

    pub(crate) fn k2(&self) -> &[f64] {
        &self.k2
    }

    /// Signed mode indices `(m1, m2)` of spectrum slot `idx`.
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        let n = self.grid.n;
        ((idx / n) as i64, signed(idx % n, n))
    }

    pub fn forward(&mut self, values: &[f64]) -> Spectrum {
        let mut out = self.zero_spectrum();
        self.forward_into(values, &mut out);
        out
    }

    pub fn forward_into(&mut self, values: &[f64], out: &mut [Complex64]) {
        let n = self.grid.n;
        let nk = self.nk;
        debug_assert_eq!(values.len(), n * n);
        for j in 0..n {
            self.row_in.copy_from_slice(&values[j * n..(j + 1) * n]);
            self.r2c
                .process_with_scratch(&mut self.row_in, &mut self.row_buf[j * nk..(j + 1) * nk], &mut self.r_scratch)
                .expect("real forward FFT length");
        }
        transpose(&self.row_buf, out, n, nk);
        self.fwd.process_with_scratch(out, &mut self.c_scratch);
    }

    pub fn inverse(&mut self, spec: &[Complex64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        self.inverse_into(spec, &mut out);
        out
    }

    pub fn inverse_into(&mut self, spec: &[Complex64], out: &mut [f64]) {
        let n = self.grid.n;
        let nk = self.nk;
        self.col_buf.copy_from_slice(spec);
        self.inv.process_with_scratch(&mut self.col_buf, &mut self.c_scratch);
        transpose(&self.col_buf, &mut self.row_buf, nk, n);
        let scale = 1.0 / (n * n) as f64;
        for j in 0..n {
            let row = &mut self.row_buf[j * nk..(j + 1) * nk];
            row[0].im = 0.0;
            row[nk - 1].im = 0.0;
            let dst = &mut out[j * n..(j + 1) * n];
            self.c2r
                .process_with_scratch(row, dst, &mut self.r_scratch)
                .expect("real inverse FFT length");
            for v in dst.iter_mut() {
                *v *= scale;
            }
        }
    }

    /// Zeroes modes with `|m1| > n/3` or `|m2| > n/3`.
    pub fn dealias(&self, spec: &mut [Complex64]) {
        for (s, &k) in spec.iter_mut().zip(&self.keep) {
            if !k {
                *s = Complex64::default();
            }
        }
    }

    /// Whether slot `idx` survives the two-thirds rule.
    pub fn is_kept(&self, idx: usize) -> bool {
        self.keep[idx]
    }

    /// Band-limits a nodal field with the two-thirds rule.
    pub fn dealias_field(&mut self, field: &ScalarField) -> ScalarField {
        let mut s = self.forward(&field.values);
        self.dealias(&mut s);
        ScalarField {
            grid: self.grid,
            values: self.inverse(&s),
        }
    }

    /// `|k|^{-2 alpha}` per mode, zero at `k = 0`. Cached per `alpha`; the
    /// Euler case `alpha = 1` is evaluated as `1 / |k|^2`.
    pub fn fractional_multiplier(&mut self, alpha: f64) -> Result<Arc<Vec<f64>>> {
        check_alpha(alpha)?;
        let k2 = &self.k2;
        let m = self.fractional.entry(alpha.to_bits()).or_insert_with(|| {
            Arc::new(
                k2.iter()
                    .enumerate()
                    .map(|(idx, &kk)| {
                        if idx == 0 {
                            0.0
                        } else if alpha == 1.0 {
                            1.0 / kk
                        } else {
                            kk.powf(-alpha)
                        }
                    })
                    .collect(),
            )
        });
        Ok(Arc::clone(m))
    }

    /// Stream function `psi` with `-Lap psi = omega` and zero mean.
    pub fn inverse_laplacian(&mut self, field: &ScalarField) -> ScalarField {
        let mut s = self.forward(&field.values);
        for (v, m) in s.iter_mut().zip(&self.inv_lap) {
            *v *= *m;
        }
        ScalarField {
            grid: self.grid,
            values: self.inverse(&s),
        }
    }

    /// `u = -grad_perp psi = (d2 psi, -d1 psi)`.
    pub fn velocity_from_stream(&mut self, psi: &ScalarField) -> VectorField {
        let s = self.forward(&psi.values);
        self.perp_gradient_of_spectrum(&s)
    }

    /// `u = -grad_perp (-Lap)^{-alpha} theta` for `1/2 < alpha <= 1`.
    pub fn velocity_from_scalar(&mut self, field: &ScalarField, alpha: f64) -> Result<VectorField> {
        let mult = self.fractional_multiplier(alpha)?;
        let mut s = self.forward(&field.values);
        for (v, m) in s.iter_mut().zip(mult.iter()) {
            *v *= *m;
        }
        Ok(self.perp_gradient_of_spectrum(&s))
    }

    /// Euler velocity through the dedicated inverse-Laplacian path.
    pub fn euler_velocity(&mut self, omega: &ScalarField) -> VectorField {
        let psi_hat = {
            let mut s = self.forward(&omega.values);
            for (v, m) in s.iter_mut().zip(&self.inv_lap) {
                *v *= *m;
            }
            s
        };
        self.perp_gradient_of_spectrum(&psi_hat)
    }

    fn perp_gradient_of_spectrum(&mut self, psi_hat: &[Complex64]) -> VectorField {
        let n = self.grid.n;
        let mut a = self.zero_spectrum();
        let mut b = self.zero_spectrum();
        for c in 0..self.nk {
            let kx = self.kx_d[c];
            for r in 0..n {
                let idx = c * n + r;
                let p = psi_hat[idx];
                a[idx] = I * self.ky_d[r] * p;
                b[idx] = -I * kx * p;
            }
        }
        VectorField {
            grid: self.grid,
            u1: self.inverse(&a),
            u2: self.inverse(&b),
        }
    }

    /// Exact gradient of the trigonometric interpolant.
    pub fn gradient(&mut self, field: &ScalarField) -> VectorField {
        let s = self.forward(&field.values);
        self.gradient_of_spectrum(&s)
    }

    pub(crate) fn gradient_of_spectrum(&mut self, s: &[Complex64]) -> VectorField {
        let n = self.grid.n;
        let mut a = self.zero_spectrum();
        let mut b = self.zero_spectrum();
        for c in 0..self.nk {
            let kx = self.kx_d[c];
            for r in 0..n {
                let idx = c * n + r;
                a[idx] = I * kx * s[idx];
                b[idx] = I * self.ky_d[r] * s[idx];
            }
        }
        VectorField {
            grid: self.grid,
            u1: self.inverse(&a),
            u2: self.inverse(&b),
        }
    }

    /// Spectral divergence `d1 u1 + d2 u2`.
    pub fn divergence(&mut self, v: &VectorField) -> ScalarField {
        let n = self.grid.n;
        let a = self.forward(&v.u1);
        let b = self.forward(&v.u2);
        let mut d = self.zero_spectrum();
        for c in 0..self.nk {
            for r in 0..n {
                let idx = c * n + r;
                d[idx] = I * (self.kx_d[c] * a[idx] + self.ky_d[r] * b[idx]);
            }
        }
        ScalarField {
            grid: self.grid,
            values: self.inverse(&d),
        }
    }

    /// `f(x1 - shift, x2)` through the Fourier shift theorem.
    pub fn translate(&mut self, field: &ScalarField, shift: f64) -> ScalarField {
        let n = self.grid.n;
        let unit = std::f64::consts::PI / self.grid.half_extent;
        let mut s = self.forward(&field.values);
        for c in 0..self.nk {
            let phase = c as f64 * unit * shift;
            let m = if c == n / 2 {
                Complex64::new(phase.cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, -phase)
            };
            for v in &mut s[c * n..(c + 1) * n] {
                *v *= m;
            }
        }
        ScalarField {
            grid: self.grid,
            values: self.inverse(&s),
        }
    }

    /// `sum |f|^2 h^2` evaluated from a spectrum (Parseval).
    pub fn spectral_l2_sq(&self, s: &[Complex64]) -> f64 {
        let n = self.grid.n;
        let mut acc = 0.0;
        for c in 0..self.nk {
            let w = if c == 0 || c == n / 2 { 1.0 } else { 2.0 };
            acc += w * s[c * n..(c + 1) * n].iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        acc * self.grid.cell_area() / (n * n) as f64
    }

    /// `(1/2) sum M |s|^2 h^2`, the quadratic form of a real multiplier.
    pub(crate) fn weighted_l2_sq(&self, s: &[Complex64], m: &[f64]) -> f64 {
        let n = self.grid.n;
        let mut acc = 0.0;
        for c in 0..self.nk {
            let w = if c == 0 || c == n / 2 { 1.0 } else { 2.0 };
            let col = c * n..(c + 1) * n;
            acc += w * s[col.clone()].iter().zip(&m[col]).map(|(z, k)| k * z.norm_sqr()).sum::<f64>();
        }
        0.5 * acc * self.grid.cell_area() / (n * n) as f64
    }
}

#[inline]
fn signed(r: usize, n: usize) -> i64 {
    if r < n / 2 {
        r as i64
    } else {
        r as i64 - n as i64
    }
}

/// Transposes a `rows x cols` row-major block into `cols x rows`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 16;
    for rb in (0..rows).step_by(B) {
        for cb in (0..cols).step_by(B) {
            for r in rb..(rb + B).min(rows) {
                for c in cb..(cb + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize, l: f64) -> Grid {
        Grid::new(n, l).unwrap()
    }

    #[test]
    fn round_trip() {
        let g = grid(64, 3.0);
        let mut sp = Spectral::new(g);
        let f = ScalarField::from_fn(g, |x| (x[0] * 1.3).sin() * (-x[1] * x[1]).exp() + 0.2 * x[0] * x[1]);
        let s = sp.forward(&f.values);
        let back = sp.inverse(&s);
        let scale = f.max_abs();
        for (a, b) in f.values.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn parseval() {
        let g = grid(32, 2.0);
        let mut sp = Spectral::new(g);
        let f = ScalarField::from_fn(g, |x| (x[0] - 0.3 * x[1]).cos() + x[1] * (-x[0] * x[0]).exp());
        let s = sp.forward(&f.values);
        let grid_l2 = f.l2_norm().powi(2);
        assert!((sp.spectral_l2_sq(&s) - grid_l2).abs() <= 1e-10 * grid_l2);
    }

    #[test]
    fn single_mode_velocity() {
        let l = 8.0;
        let g = grid(64, l);
        let mut sp = Spectral::new(g);
        let theta = ScalarField::from_fn(g, |x| (PI * x[0] / l).sin());
        let u = sp.velocity_from_scalar(&theta, 1.0).unwrap();
        for j in 0..g.n {
            for i in 0..g.n {
                let k = g.index(i, j);
                let want = -(l / PI) * (PI * g.coord(i) / l).cos();
                assert!(u.u1[k].abs() < 1e-12);
                assert!((u.u2[k] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fractional_single_mode() {
        let l = 4.0;
        let g = grid(32, l);
        let mut sp = Spectral::new(g);
        let (m1, m2): (f64, f64) = (3.0, -2.0);
        let k = PI / l * (m1 * m1 + m2 * m2).sqrt();
        let theta = ScalarField::from_fn(g, |x| (PI / l * (m1 * x[0] + m2 * x[1])).cos());
        for alpha in [0.6, 0.75, 0.9] {
            let u = sp.velocity_from_scalar(&theta, alpha).unwrap();
            let amp = k.powf(-2.0 * alpha);
            for j in 0..g.n {
                for i in 0..g.n {
                    let x = g.point(i, j);
                    let s = -(PI / l * (m1 * x[0] + m2 * x[1])).sin() * amp;
                    let idx = g.index(i, j);
                    assert!((u.u1[idx] - PI / l * m2 * s).abs() < 1e-12);
                    assert!((u.u2[idx] + PI / l * m1 * s).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn alpha_one_matches_euler_bitwise() {
        let g = grid(64, 4.0);
        let mut sp = Spectral::new(g);
        let f = ScalarField::from_fn(g, |x| x[1] * (-(x[0] * x[0] + x[1] * x[1])).exp());
        let a = sp.velocity_from_scalar(&f, 1.0).unwrap();
        let b = sp.euler_velocity(&f);
        assert_eq!(a, b);
        let psi = sp.inverse_laplacian(&f);
        assert_eq!(sp.velocity_from_stream(&psi).u1.len(), a.u1.len());
    }

    #[test]
    fn alpha_domain() {
        let g = grid(16, 1.0);
        let mut sp = Spectral::new(g);
        let f = ScalarField::zeros(g);
        assert!(sp.velocity_from_scalar(&f, 0.5).is_err());
        assert!(sp.velocity_from_scalar(&f, 1.01).is_err());
        assert!(sp.velocity_from_scalar(&f, 0.4).is_err());
    }

    #[test]
    fn gradient_examples() {
        let l = 2.0;
        let g = grid(32, l);
        let mut sp = Spectral::new(g);
        let c = ScalarField::from_fn(g, |_| 3.5);
        let gc = sp.gradient(&c);
        assert!(gc.max_magnitude() < 1e-13);
        let f = ScalarField::from_fn(g, |x| (PI * x[0] / l).sin());
        let gf = sp.gradient(&f);
        for j in 0..g.n {
            for i in 0..g.n {
                let k = g.index(i, j);
                assert!((gf.u1[k] - PI / l * (PI * g.coord(i) / l).cos()).abs() < 1e-12);
                assert!(gf.u2[k].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dealias_examples() {
        let l = 1.0;
        let g = grid(64, l);
        let mut sp = Spectral::new(g);
        let n = g.n;
        let low = ScalarField::from_fn(g, |x| (PI * 3.0 * x[0] / l).cos() * (PI * 5.0 * x[1] / l).sin());
        let out = sp.dealias_field(&low);
        for (a, b) in low.values.iter().zip(&out.values) {
            assert!((a - b).abs() < 1e-12);
        }
        let m = (n / 3 + 1) as f64;
        let high = ScalarField::from_fn(g, |x| (PI * m * x[0] / l).cos());
        assert!(sp.dealias_field(&high).max_abs() < 1e-12);
    }

    #[test]
    fn translate_single_mode() {
        let l = 2.0;
        let g = grid(32, l);
        let mut sp = Spectral::new(g);
        let f = ScalarField::from_fn(g, |x| (PI * 2.0 * x[0] / l).sin() * x[1].cos());
        let t = sp.translate(&f, 0.37);
        for j in 0..g.n {
            for i in 0..g.n {
                let x = g.point(i, j);
                let want = (PI * 2.0 * (x[0] - 0.37) / l).sin() * x[1].cos();
                assert!((t.at(i, j) - want).abs() < 1e-12);
            }
        }
    }
}
