//! Bessel functions of the first kind, orders 1 and 3, plus the two ratios
//! `J1(x)/(2x)` and `36*J3(x)/x^3` that appear in the satellite antenna
//! pattern.
//!
//! The ascending power series is used for |x| <= 14 and the Hankel
//! asymptotic expansion beyond. The split point keeps the worst-case
//! cancellation of the series below ~1e-12 while the asymptotic truncation
//! error at x = 14 is ~1e-12 as well; both branches are checked against an
//! arbitrary-precision reference table in the test suite (absolute target
//! 1e-10).

use std::f64::consts::PI;

const SERIES_SPLIT: f64 = 14.0;
const SERIES_MAX_TERMS: usize = 80;

/// Bessel function of the first kind, order 1.
pub fn j1(x: f64) -> f64 {
    // J1 is odd.
    if x < 0.0 {
        return -j1(-x);
    }
    if x <= SERIES_SPLIT {
        // J1(x) = (x/2) * sum_k (-1)^k (x/2)^{2k} / (k!(k+1)!)
        0.5 * x * ratio_series(x, 1)
    } else {
        asymptotic(1, x)
    }
}

/// Bessel function of the first kind, order 3.
pub fn j3(x: f64) -> f64 {
    // J3 is odd.
    if x < 0.0 {
        return -j3(-x);
    }
    if x <= SERIES_SPLIT {
        // J3(x) = (x/2)^3 * sum_k (-1)^k (x/2)^{2k} / (k!(k+3)!)
        //       = (x/2)^3 / 3! * ratio_series(x, 3)
        let h = 0.5 * x;
        h * h * h * ratio_series(x, 3) / 6.0
    } else {
        asymptotic(3, x)
    }
}

/// `J1(x)/(2x)`, continuous at x = 0 where it equals 1/4.
pub fn j1_over_2x(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_SPLIT {
        0.25 * ratio_series(ax, 1)
    } else {
        j1(ax) / (2.0 * ax)
    }
}

/// `36*J3(x)/x^3`, continuous at x = 0 where it equals 3/4.
pub fn j3_36_over_x3(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_SPLIT {
        // 36 * (x/2)^3 / (3! x^3) = 3/4.
        0.75 * ratio_series(ax, 3)
    } else {
        36.0 * j3(ax) / (ax * ax * ax)
    }
}

/// sum_k (-1)^k (x/2)^{2k} * nu! / (k!(k+nu)!) -- i.e. J_nu(x) / ((x/2)^nu / nu!).
/// Starts at 1 for x = 0, so callers can divide out the leading power
/// analytically and keep removable singularities exact.
fn ratio_series(x: f64, nu: usize) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=SERIES_MAX_TERMS {
        term *= -q / ((k * (k + nu)) as f64);
        sum += term;
        if term.abs() < 1e-18 * (1.0 + sum.abs()) {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion for J_nu(x), x large:
/// J_nu(x) = sqrt(2/(pi x)) [ P(nu,x) cos(chi) - Q(nu,x) sin(chi) ],
/// chi = x - (nu/2 + 1/4) pi, with
/// P = sum_m (-1)^m a_{2m}, Q = sum_m (-1)^m a_{2m+1},
/// a_k = prod_{j=1..k} (4 nu^2 - (2j-1)^2) / (k! (8x)^k).
fn asymptotic(nu: usize, x: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut a = 1.0; // a_0
    let mut p = 1.0;
    let mut q = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..=40usize {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        // Divergent series: stop at the smallest term.
        if a.abs() >= prev {
            break;
        }
        prev = a.abs();
        let signed = if (k / 2) % 2 == 0 { a } else { -a };
        if k % 2 == 1 {
            q += signed;
        } else {
            p += signed;
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    let chi = x - (0.5 * nu as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
