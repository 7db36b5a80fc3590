//! FFT-based operations on samples of smooth 2π-periodic functions taken at
//! `N` equispaced parameter values `θ_j = 2πj/N` (`N` even).

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward DFT of real samples.
pub fn fft(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf, false);
    buf
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    if buf.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    plan.process(buf);
}

/// Real part of the unnormalized inverse DFT, scaled by `scale`.
fn inverse_real(mut coeffs: Vec<Complex64>, scale: f64) -> Vec<f64> {
    fft_in_place(&mut coeffs, true);
    coeffs.into_iter().map(|c| c.re * scale).collect()
}

/// Signed wavenumber of DFT slot `k` for length `n`; the Nyquist slot maps to `n/2`.
#[inline]
pub fn wavenumber(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

fn check_even(n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "spectral operations need an even, positive sample count (got {n})"
        )));
    }
    Ok(())
}

/// `order`-th derivative with respect to the parameter θ ∈ [0, 2π).
///
/// The Nyquist mode is dropped for odd orders so the result stays real.
pub fn spectral_derivative(values: &[f64], order: usize) -> Result<Vec<f64>> {
    if order < 1 {
        return Err(Error::InvalidArgument(
            "derivative order must be at least 1".into(),
        ));
    }
    check_even(values.len())?;
    Ok(derivative(values, order))
}

pub(crate) fn derivative(values: &[f64], order: usize) -> Vec<f64> {
    let n = values.len();
    let mut c = fft(values);
    let i_pow = match order % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    for (k, ck) in c.iter_mut().enumerate() {
        let kk = wavenumber(k, n);
        if order % 2 == 1 && k == n / 2 {
            *ck = Complex64::new(0.0, 0.0);
        } else {
            *ck *= i_pow * kk.powi(order as i32);
        }
    }
    inverse_real(c, 1.0 / n as f64)
}

/// Periodic band-limited interpolation kernel for `n` equispaced samples:
/// `L(t) = sin(n t / 2) cot(t / 2) / n`, with `L(0) = 1`.
pub fn interpolation_kernel(n: usize, t: f64) -> f64 {
    let t = t.rem_euclid(2.0 * PI);
    let half = 0.5 * t;
    let s = half.sin();
    if s.abs() < 1e-14 {
        return 1.0;
    }
    let nf = n as f64;
    ((nf * half).sin() * half.cos() / s) / nf
}

/// Weights `w_j` such that the interpolant at parameter `theta` equals `Σ w_j v_j`.
pub fn interpolation_weights(n: usize, theta: f64) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    (0..n)
        .map(|j| interpolation_kernel(n, theta - j as f64 * h))
        .collect()
}

/// Samples of the interpolant at `θ_j + delta`.
pub fn shift(values: &[f64], delta: f64) -> Vec<f64> {
    let n = values.len();
    let mut c = fft(values);
    for (k, ck) in c.iter_mut().enumerate() {
        if k == n / 2 && n.is_multiple_of(2) {
            *ck *= (0.5 * n as f64 * delta).cos();
        } else {
            let kk = wavenumber(k, n);
            *ck *= Complex64::from_polar(1.0, kk * delta);
        }
    }
    inverse_real(c, 1.0 / n as f64)
}

/// Zero-padding resample from `n` to `m >= n` points.
pub fn resample(values: &[f64], m: usize) -> Vec<f64> {
    let n = values.len();
    if m == n {
        return values.to_vec();
    }
    assert!(
        m > n && n.is_multiple_of(2),
        "resample only refines even grids"
    );
    let c = fft(values);
    let mut fine = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..n / 2 {
        fine[k] = c[k];
        if k > 0 {
            fine[m - k] = c[n - k];
        }
    }
    let nyq = c[n / 2] * 0.5;
    fine[n / 2] = nyq;
    fine[m - n / 2] = nyq;
    inverse_real(fine, 1.0 / n as f64)
}

/// Transpose of [`resample`]: given a row `g` acting on fine samples, returns
/// the row acting on the coarse samples, i.e. `Σ_i g_i (U v)_i = Σ_j w_j v_j`.
pub fn resample_adjoint(fine_row: &[f64], n: usize) -> Vec<f64> {
    let m = fine_row.len();
    if m == n {
        return fine_row.to_vec();
    }
    let f = fft(fine_row);
    let mut coarse = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..n / 2 {
        coarse[k] = f[k];
        coarse[n - k] = f[m - k];
    }
    coarse[0] = f[0];
    coarse[n / 2] = (f[n / 2] + f[m - n / 2]) * 0.5;
    inverse_real(coarse, 1.0 / n as f64)
}

/// Normalized Fourier coefficients `c_k` (slot order) used for evaluation at
/// arbitrary parameters.
pub(crate) fn coefficients(values: &[f64]) -> Vec<Complex64> {
    let n = values.len() as f64;
    fft(values).into_iter().map(|c| c / n).collect()
}

/// Evaluates the interpolant and its first two θ-derivatives at `theta`.
pub(crate) fn evaluate_with_derivatives(coeffs: &[Complex64], theta: f64) -> [f64; 3] {
    let n = coeffs.len();
    let mut out = [0.0; 3];
    for (k, ck) in coeffs.iter().enumerate() {
        if k == n / 2 {
            // symmetric split of the Nyquist mode: c cos(nθ/2)
            let kk = 0.5 * n as f64;
            let (s, c) = (kk * theta).sin_cos();
            out[0] += ck.re * c;
            out[1] -= ck.re * kk * s;
            out[2] -= ck.re * kk * kk * c;
            continue;
        }
        let kk = wavenumber(k, n);
        let e = Complex64::from_polar(1.0, kk * theta);
        let v = ck * e;
        out[0] += v.re;
        out[1] += (v * Complex64::new(0.0, kk)).re;
        out[2] -= kk * kk * v.re;
    }
    out
}
