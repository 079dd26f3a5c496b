//! Bessel function of the first kind, order zero.

use std::f64::consts::{FRAC_PI_4, PI};

const ASYMPTOTIC_THRESHOLD: f64 = 25.0;

/// `J0(x)` to near machine precision for all real `x`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-8 {
        1.0 - 0.25 * x * x
    } else if x < ASYMPTOTIC_THRESHOLD {
        j0_miller(x)
    } else {
        j0_hankel(x)
    }
}

/// Backward recurrence from a high starting order, normalized with
/// `J0 + 2 (J2 + J4 + ...) = 1`.
fn j0_miller(x: f64) -> f64 {
    let start = 2 * ((x + 20.0 + 6.0 * x.sqrt()) as usize / 2 + 1);
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // cur now holds J_{k-1}
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += cur;
    cur / norm
}

/// Hankel asymptotic expansion, summed until terms stop shrinking.
fn j0_hankel(x: f64) -> f64 {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let eight_x = 8.0 * x;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd / (k as f64 * eight_x);
        if next.abs() >= term.abs() || next.abs() < 1e-17 {
            break;
        }
        term = next;
        // a_k / x^k with alternating signs split into P (even k) and Q (odd k)
        match k % 4 {
            1 => q -= term,
            2 => p -= term,
            3 => q += term,
            _ => p += term,
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Trapezoid rule on the periodic integral `(1/pi) int_0^pi cos(x sin t) dt`,
    /// exact to rounding once the node count exceeds `x` comfortably.
    fn j0_by_integral(x: f64) -> f64 {
        let n = (2.0 * x) as usize + 64;
        let h = 2.0 * PI / n as f64;
        (0..n).map(|j| (x * (j as f64 * h).sin()).cos()).sum::<f64>() / n as f64
    }

    #[test]
    fn tabulated_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert_relative_eq!(bessel_j0(1.0), 0.765_197_686_557_966_6, epsilon = 1e-15);
        assert_relative_eq!(bessel_j0(2.404_825_557_695_773), 0.0, epsilon = 1e-15);
        assert_relative_eq!(bessel_j0(10.0), -0.245_935_764_451_348_3, epsilon = 1e-15);
        assert_relative_eq!(bessel_j0(-10.0), bessel_j0(10.0));
    }

    #[test]
    fn matches_integral_representation() {
        let mut x = 0.01;
        while x < 2000.0 {
            let a = bessel_j0(x);
            let b = j0_by_integral(x);
            assert!((a - b).abs() < 2e-14, "x = {x}: {a} vs {b}");
            x *= 1.13;
        }
        for &x in &[24.999, 25.0, 25.001] {
            assert!((bessel_j0(x) - j0_by_integral(x)).abs() < 2e-15);
        }
    }
}
