//! Gauss–Legendre rules and a recursive adaptive integrator built on them.

use std::sync::OnceLock;

const ORDER: usize = 15;
const MAX_DEPTH: u32 = 40;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn fixed<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    x.iter().zip(w).map(|(xi, wi)| wi * f(mid + half * xi)).sum::<f64>() * half
}

/// Integrates `f` over `[a, b]` by bisecting until the 15-point rule on an
/// interval agrees with the sum over its halves to within `tol`.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let whole = fixed(&mut f, a, b);
    recurse(&mut f, a, b, whole, tol, 0)
}

fn recurse<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let left = fixed(f, a, mid);
    let right = fixed(f, mid, b);
    if (left + right - whole).abs() <= tol || depth >= MAX_DEPTH {
        return left + right;
    }
    recurse(f, a, mid, left, 0.5 * tol, depth + 1) + recurse(f, mid, b, right, 0.5 * tol, depth + 1)
}

/// Nested adaptive integration over `{a <= r <= b, lo(r) <= s <= hi(r)}`.
pub fn adaptive_2d<F, L, H>(f: F, a: f64, b: f64, lo: L, hi: H, tol: f64) -> f64
where
    F: Fn(f64, f64) -> f64,
    L: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    let inner_tol = 0.1 * tol / (b - a).abs().max(1e-300);
    adaptive(|r| adaptive(|s| f(r, s), lo(r), hi(r), inner_tol), a, b, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(ORDER);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 28 monomial
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(28)).sum();
        assert!((s - 2.0 / 29.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let v = adaptive(|x: f64| (x - 0.3).abs(), -1.0, 1.0, 1e-13);
        assert!((v - 1.09).abs() < 1e-12);
        let v = adaptive(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-14);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn quarter_disc_area() {
        let v = adaptive_2d(|_, _| 1.0, 0.0, 1.0, |_| 0.0, |x: f64| (1.0 - x * x).max(0.0).sqrt(), 1e-12);
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-10);
    }
}
