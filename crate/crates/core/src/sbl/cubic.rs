//! Real roots of polynomials up to degree three.
//!
//! Closed forms (trigonometric / Cardano for the cubic, the cancellation-free
//! quadratic formula below it) followed by Newton polishing on the original
//! coefficients.

use std::f64::consts::PI;

/// Real roots of `a x^3 + b x^2 + c x + d`, ascending. Leading coefficients
/// that are exactly zero reduce the degree. Repeated roots appear once per
/// multiplicity found by the closed form.
pub fn real_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let mut roots = if a != 0.0 {
        if d == 0.0 {
            let mut r = quadratic(a, b, c);
            r.push(0.0);
            r
        } else {
            cubic_monic(b / a, c / a, d / a)
        }
    } else if b != 0.0 {
        quadratic(b, c, d)
    } else if c != 0.0 {
        vec![-d / c]
    } else {
        Vec::new()
    };
    for r in roots.iter_mut() {
        *r = polish(a, b, c, d, *r);
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    if c == 0.0 {
        return vec![-b / a, 0.0];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0, 0.0];
    }
    vec![q / a, c / q]
}

fn cubic_monic(b: f64, c: f64, d: f64) -> Vec<f64> {
    let q = (b * b - 3.0 * c) / 9.0;
    let r = (2.0 * b * b * b - 9.0 * b * c + 27.0 * d) / 54.0;
    let q3 = q * q * q;
    let shift = b / 3.0;
    if r * r < q3 {
        let theta = (r / q3.sqrt()).clamp(-1.0, 1.0).acos();
        let m = -2.0 * q.sqrt();
        let x1 = (0..3)
            .map(|k| m * ((theta + 2.0 * PI * k as f64) / 3.0).cos() - shift)
            .max_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap_or(0.0);
        deflate(b, c, d, polish(1.0, b, c, d, x1))
    } else {
        let big_a = -r.signum() * (r.abs() + (r * r - q3).sqrt()).cbrt();
        let big_b = if big_a != 0.0 { q / big_a } else { 0.0 };
        vec![big_a + big_b - shift]
    }
}

// Remaining pair from the dominant root via Vieta, avoiding b + x1 cancellation.
fn deflate(b: f64, c: f64, d: f64, x1: f64) -> Vec<f64> {
    if x1 == 0.0 {
        let mut r = quadratic(1.0, b, c);
        r.push(0.0);
        return r;
    }
    let prod = -d / x1;
    let sum = (c - prod) / x1;
    let mut r = quadratic(1.0, -sum, prod);
    if r.len() < 2 {
        // tangency lost to rounding: keep the double root
        r = vec![0.5 * sum, 0.5 * sum];
    }
    r.push(x1);
    r
}

fn polish(a: f64, b: f64, c: f64, d: f64, mut x: f64) -> f64 {
    let p = |x: f64| ((a * x + b) * x + c) * x + d;
    let dp = |x: f64| (3.0 * a * x + 2.0 * b) * x + c;
    for _ in 0..6 {
        let slope = dp(x);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = x - p(x) / slope;
        if !next.is_finite() || p(next).abs() > p(x).abs() {
            break;
        }
        x = next;
    }
    x
}
