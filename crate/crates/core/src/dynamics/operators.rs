//! Interfacial operators with the arclength frozen at a reference geometry.
//! Vector fields are stacked `[f_x; f_y]`.

use std::cell::RefCell;
use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::curve::CurveGeometry;
use crate::spectral;

fn arc_d(geom: &CurveGeometry, f: &[f64]) -> Vec<f64> {
    geom.arc_derivative(f)
}

/// Fourth arclength derivative `d⁴f/ds⁴`.
pub fn bending(geom: &CurveGeometry, f: &[f64]) -> Vec<f64> {
    let n = geom.n();
    let mut out = Vec::with_capacity(2 * n);
    for c in 0..2 {
        let mut v = f[c * n..(c + 1) * n].to_vec();
        for _ in 0..4 {
            v = arc_d(geom, &v);
        }
        out.extend(v);
    }
    out
}

/// Tension force `d/ds(σ t)` with the frozen unit tangent.
pub fn tension_op(geom: &CurveGeometry, sigma: &[f64]) -> Vec<f64> {
    let sx: Vec<f64> = sigma
        .iter()
        .zip(&geom.tangent_x)
        .map(|(s, t)| s * t)
        .collect();
    let sy: Vec<f64> = sigma
        .iter()
        .zip(&geom.tangent_y)
        .map(|(s, t)| s * t)
        .collect();
    let mut out = arc_d(geom, &sx);
    out.extend(arc_d(geom, &sy));
    out
}

/// Surface divergence `t · df/ds`.
pub fn surface_div(geom: &CurveGeometry, f: &[f64]) -> Vec<f64> {
    let n = geom.n();
    let dx = arc_d(geom, &f[..n]);
    let dy = arc_d(geom, &f[n..]);
    (0..n)
        .map(|i| geom.tangent_x[i] * dx[i] + geom.tangent_y[i] * dy[i])
        .collect()
}

thread_local! {
    static DTHETA: RefCell<HashMap<usize, DMatrix<f64>>> = RefCell::new(HashMap::new());
}

/// Dense Fourier differentiation matrix in the parameter θ.
pub fn theta_derivative_matrix(n: usize) -> DMatrix<f64> {
    DTHETA.with(|cache| {
        cache
            .borrow_mut()
            .entry(n)
            .or_insert_with(|| {
                let mut m = DMatrix::zeros(n, n);
                let mut e = vec![0.0; n];
                for j in 0..n {
                    e[j] = 1.0;
                    let col = spectral::derivative(&e, 1);
                    e[j] = 0.0;
                    for i in 0..n {
                        m[(i, j)] = col[i];
                    }
                }
                m
            })
            .clone()
    })
}

/// Dense `d/ds = diag(1/J) d/dθ`.
pub fn arc_derivative_matrix(geom: &CurveGeometry) -> DMatrix<f64> {
    let mut m = theta_derivative_matrix(geom.n());
    for (i, j) in geom.jacobian.iter().enumerate() {
        m.row_mut(i).scale_mut(1.0 / j);
    }
    m
}

/// Dense `2N × 2N` bending, `2N × N` tension and `N × 2N` divergence matrices.
pub fn operator_matrices(geom: &CurveGeometry) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = geom.n();
    let ds = arc_derivative_matrix(geom);
    let d4 = {
        let d2 = &ds * &ds;
        &d2 * &d2
    };
    let mut b = DMatrix::zeros(2 * n, 2 * n);
    b.view_mut((0, 0), (n, n)).copy_from(&d4);
    b.view_mut((n, n), (n, n)).copy_from(&d4);
    let mut t = DMatrix::zeros(2 * n, n);
    let mut dv = DMatrix::zeros(n, 2 * n);
    for j in 0..n {
        for i in 0..n {
            t[(i, j)] = ds[(i, j)] * geom.tangent_x[j];
            t[(n + i, j)] = ds[(i, j)] * geom.tangent_y[j];
            dv[(i, j)] = geom.tangent_x[i] * ds[(i, j)];
            dv[(i, n + j)] = geom.tangent_y[i] * ds[(i, j)];
        }
    }
    (b, t, dv)
}
