#![allow(dead_code)]
//! Independent reference quadrature for the integration tests.

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

fn gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(m + r * x))
        .sum::<f64>()
        * r
}

/// Adaptive bisection comparing 10- and 20-point Gauss-Legendre panels.
/// Handles integrable endpoint log singularities and sharp interior peaks.
pub fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let lo = gauss_legendre(10);
    let hi = gauss_legendre(20);
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0usize)];
    while let Some((a0, b0, depth)) = stack.pop() {
        let c = gl(&f, a0, b0, &lo);
        let d = gl(&f, a0, b0, &hi);
        let magnitude = gl(&|t| f(t).abs(), a0, b0, &hi);
        let floor = 1e-15 * magnitude;
        if (c - d).abs() <= (tol * (b0 - a0) / (b - a)).max(floor) || depth > 40 {
            total += d;
        } else {
            let m = 0.5 * (a0 + b0);
            stack.push((a0, m, depth + 1));
            stack.push((m, b0, depth + 1));
        }
    }
    total
}

/// Least-squares slope of log(err) against log(n).
pub fn ls_slope(ns: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}
