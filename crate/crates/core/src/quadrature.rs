//! Gauss–Legendre rules and a product rule on the Bloch sphere.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `(P_n(x), P_n'(x))`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Normalized product rule on the unit sphere: Gauss–Legendre in `cos θ` with
/// `n` nodes times the `2n`-point trapezoid in `φ`. Weights sum to one.
/// Yields `(θ, φ, w)`.
pub(crate) fn sphere_rule(n: usize) -> Vec<(f64, f64, f64)> {
    let gl = gauss_legendre(n);
    let m = 2 * n;
    let mut out = Vec::with_capacity(n * m);
    for &(x, w) in &gl {
        let theta = x.clamp(-1.0, 1.0).acos();
        for j in 0..m {
            let phi = 2.0 * PI * j as f64 / m as f64;
            out.push((theta, phi, w / (2.0 * m as f64)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = gauss_legendre(5);
        let wsum: f64 = rule.iter().map(|(_, w)| w).sum();
        assert_abs_diff_eq!(wsum, 2.0, epsilon = 1e-14);
        // ∫ x^8 = 2/9 needs degree 9 ≤ 2·5−1.
        let i: f64 = rule.iter().map(|(x, w)| w * x.powi(8)).sum();
        assert_abs_diff_eq!(i, 2.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn three_point_nodes() {
        let mut rule = gauss_legendre(3);
        rule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert_abs_diff_eq!(rule[0].0, -(0.6f64).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(rule[1].1, 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn sphere_average_of_cos_squared() {
        let avg: f64 = sphere_rule(4).iter().map(|(t, _, w)| w * t.cos().powi(2)).sum();
        assert_abs_diff_eq!(avg, 1.0 / 3.0, epsilon = 1e-14);
        let avg: f64 = sphere_rule(4)
            .iter()
            .map(|(t, p, w)| w * (t.sin() * p.cos()).powi(2))
            .sum();
        assert_abs_diff_eq!(avg, 1.0 / 3.0, epsilon = 1e-14);
    }
}
