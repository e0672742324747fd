//! Bessel functions of the first kind of orders zero and one, and the first
//! positive zero of `J1`.
//!
//! Three representations are used depending on `|x|`:
//!
//! * `|x| <= 8`: the power series, summed until terms drop below an ulp.
//! * `8 < |x| <= 25`: Miller's backward recurrence normalised with
//!   `J0 + 2 (J2 + J4 + ...) = 1`.
//! * `|x| > 25`: the Hankel asymptotic expansion, truncated at its smallest term.
//!
//! All three agree with each other to about `1e-14` absolute on their overlaps.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// Bracket known to contain exactly one zero of `J1`, the first positive one.
const ZERO_BRACKET: (f64, f64) = (3.5, 4.2);

/// Value of a Bessel function of the first kind at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub order: u32,
    pub argument: f64,
    pub value: f64,
}

/// The first positive zero `c_L` of `J1` together with `J0(c_L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambConstant {
    pub c_l: f64,
    pub j0_at_cl: f64,
}

/// `J_order(x)` for `order` in `{0, 1}`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("bessel_j: non-finite argument {x}"));
    }
    match order {
        0 => Ok(j0(x)),
        1 => Ok(j1(x)),
        _ => domain(format!("bessel_j: order {order} not supported (0 or 1)")),
    }
}

/// Checked evaluation returning the full record.
pub fn eval(order: u32, x: f64) -> Result<BesselEval> {
    Ok(BesselEval {
        order,
        argument: x,
        value: bessel_j(order, x)?,
    })
}

/// `J0(x)` for finite `x`. Even in `x`.
pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(0, ax)
    } else if ax <= ASYMPTOTIC_LIMIT {
        miller(ax).0
    } else {
        asymptotic(0, ax)
    }
}

/// `J1(x)` for finite `x`. Odd in `x`.
pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        series(1, ax)
    } else if ax <= ASYMPTOTIC_LIMIT {
        miller(ax).1
    } else {
        asymptotic(1, ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// `J1'(x) = J0(x) - J1(x)/x`, with the limit `1/2` at the origin.
pub fn j1_prime(x: f64) -> f64 {
    if x == 0.0 {
        0.5
    } else {
        j0(x) - j1(x) / x
    }
}

/// `J1(x)/x`, finite at the origin where it equals `1/2`.
pub fn j1_over_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // two series terms are exact to well below an ulp here
        let q = 0.25 * x * x;
        0.5 * (1.0 - 0.5 * q + q * q / 12.0)
    } else {
        j1(x) / x
    }
}

pub(crate) fn series(order: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let n = order as f64;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + n));
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-2 * sum.abs().max(1e-300) && k > x {
            break;
        }
        k += 1.0;
        if k > 200.0 {
            break;
        }
    }
    sum
}

/// Miller backward recurrence returning `(J0(x), J1(x))` for `x > 0`.
pub(crate) fn miller(x: f64) -> (f64, f64) {
    let mut start = (2.0 * x + 30.0).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let two_over_x = 2.0 / x;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0;
    let mut j1_raw = 0.0;
    for k in (1..=start).rev() {
        let prev = k as f64 * two_over_x * cur - next; // J_{k-1}
        next = cur;
        cur = prev;
        if cur.abs() > 1e200 {
            cur *= 1e-200;
            next *= 1e-200;
            norm *= 1e-200;
            j1_raw *= 1e-200;
        }
        let km1 = k - 1;
        if km1 == 1 {
            j1_raw = cur;
        }
        if km1 > 0 && km1 % 2 == 0 {
            norm += 2.0 * cur;
        }
    }
    norm += cur;
    (cur / norm, j1_raw / norm)
}

pub(crate) fn asymptotic(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let chi = x - (0.5 * order as f64 + 0.25) * PI;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0; // a_k / x^k
    let mut prev_abs = f64::INFINITY;
    for k in 0..60u32 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if a.abs() > prev_abs {
            break;
        }
        prev_abs = a.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// First positive zero of `J1` and the value of `J0` there.
///
/// Bisection on the bracket `[3.5, 4.2]` down to width `1e-3`, then Newton
/// steps using `J1' = J0 - J1/x`.
pub fn first_zero_j1() -> LambConstant {
    let (mut lo, mut hi) = ZERO_BRACKET;
    let mut f_lo = j1(lo);
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        let f_mid = j1(mid);
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let mut c = 0.5 * (lo + hi);
    for _ in 0..50 {
        let step = j1(c) / j1_prime(c);
        c -= step;
        if step.abs() <= 1e-16 * c {
            break;
        }
    }
    LambConstant {
        c_l: c,
        j0_at_cl: j0(c),
    }
}

/// First positive zero of `J1'`, i.e. where `J1` attains its maximum on `(0, c_L)`.
pub fn first_max_j1() -> f64 {
    // J1'' = -J1' / x - (1 - 1/x^2) J1
    let mut s = 1.84;
    for _ in 0..50 {
        let d1 = j1_prime(s);
        let d2 = -d1 / s - (1.0 - 1.0 / (s * s)) * j1(s);
        let step = d1 / d2;
        s -= step;
        if step.abs() < 1e-16 * s {
            break;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_second(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        // 6th-order central stencil
        (2.0 * f(x - 3.0 * h) - 27.0 * f(x - 2.0 * h) + 270.0 * f(x - h) - 490.0 * f(x)
            + 270.0 * f(x + h)
            - 27.0 * f(x + 2.0 * h)
            + 2.0 * f(x + 3.0 * h))
            / (180.0 * h * h)
    }

    fn fd_first(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (-f(x - 3.0 * h) + 9.0 * f(x - 2.0 * h) - 45.0 * f(x - h) + 45.0 * f(x + h)
            - 9.0 * f(x + 2.0 * h)
            + f(x + 3.0 * h))
            / (60.0 * h)
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_non_finite_and_bad_order() {
        assert!(bessel_j(0, f64::NAN).is_err());
        assert!(bessel_j(1, f64::INFINITY).is_err());
        assert!(bessel_j(2, 1.0).is_err());
    }

    #[test]
    fn reference_values() {
        // tabulated to 16 digits
        let cases = [
            (0, 1.0, 0.765_197_686_557_966_6),
            (1, 1.0, 0.440_050_585_744_933_5),
            (0, 10.0, -0.245_935_764_451_348_3),
            (1, 10.0, 0.043_472_746_168_861_44),
            (0, 30.0, -0.086_367_983_581_040_2),
            (1, 30.0, -0.118_751_062_616_622_94),
            (0, 50.0, 0.055_812_327_669_251_86),
            (1, 50.0, -0.097_511_828_125_175_5),
        ];
        for (n, x, v) in cases {
            let got = bessel_j(n, x).unwrap();
            assert!((got - v).abs() < 2e-14, "J{n}({x}) = {got}, want {v}");
        }
    }

    #[test]
    fn representations_agree_on_overlaps() {
        let mut x = 5.0;
        while x <= 8.0 {
            assert!((series(0, x) - miller(x).0).abs() < 3e-14, "J0 at {x}");
            assert!((series(1, x) - miller(x).1).abs() < 3e-14, "J1 at {x}");
            x += 0.173;
        }
        let mut x = 20.0;
        while x <= 50.0 {
            let (a0, a1) = miller(x);
            assert!((asymptotic(0, x) - a0).abs() < 1e-13, "J0 at {x}");
            assert!((asymptotic(1, x) - a1).abs() < 1e-13, "J1 at {x}");
            x += 0.731;
        }
    }

    #[test]
    fn bounded_by_one() {
        let mut x = -50.0;
        while x <= 50.0 {
            assert!(j0(x).abs() <= 1.0 && j1(x).abs() <= 1.0);
            x += 0.0917;
        }
    }

    #[test]
    fn ode_residual_small() {
        let h = 1e-3;
        let mut x = 0.5;
        while x < 20.0 {
            for (order, f) in [(0.0, j0 as fn(f64) -> f64), (1.0, j1 as fn(f64) -> f64)] {
                let r = x * x * fd_second(f, x, h) + x * fd_first(f, x, h) + (x * x - order * order) * f(x);
                assert!(r.abs() < 1e-6, "order {order} at {x}: residual {r}");
            }
            x += 0.37;
        }
    }

    #[test]
    fn derivative_recurrence() {
        let mut x = 0.1;
        while x <= 20.0 {
            let fd = fd_first(j1, x, 1e-3);
            assert!((fd - j1_prime(x)).abs() < 1e-9, "at {x}");
            x += 0.1;
        }
    }

    #[test]
    fn lamb_constant() {
        let lc = first_zero_j1();
        assert!(lc.c_l > 3.8 && lc.c_l < 3.9);
        assert!(j1(lc.c_l).abs() <= 1e-12);
        assert!((lc.c_l - 3.8317).abs() < 1e-4);
        assert!(lc.j0_at_cl < 0.0);
        // J1 keeps one sign on (0, c_L)
        let mut x = 0.01;
        while x < lc.c_l - 1e-3 {
            assert!(j1(x) > 0.0);
            x += 0.01;
        }
    }

    #[test]
    fn max_of_j1() {
        let s = first_max_j1();
        assert!((s - 1.841_183_781_340_659_3).abs() < 1e-12);
    }

    #[test]
    fn j1_over_x_continuous() {
        for x in [1e-6, 5e-5, 9.99e-5, 1.0001e-4, 1e-3] {
            assert!((j1_over_x(x) - j1(x) / x).abs() < 1e-15);
        }
        assert_eq!(j1_over_x(0.0), 0.5);
    }
}
