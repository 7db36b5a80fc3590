use crate::error::{Error, Result};

/// Converged GMRES iterate.
#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `‖b − A x‖ / ‖b‖` as tracked by the Arnoldi
    /// recurrence.
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Right-preconditioned GMRES without restarts, started from zero.
///
/// Solves `A M⁻¹ y = b` and returns `x = M⁻¹ y`. Fails with
/// [`Error::GmresNotConverged`] carrying the best iterate when `max_iter`
/// Arnoldi steps do not reach `tol`.
pub fn gmres(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    mut precond: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<GmresOutcome> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "GMRES tolerance must be positive, got {tol}"
        )));
    }
    let n = rhs.len();
    let beta = norm(rhs);
    if beta == 0.0 {
        return Ok(GmresOutcome {
            solution: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut basis: Vec<Vec<f64>> = vec![rhs.iter().map(|x| x / beta).collect()];
    // Columns of the rotated Hessenberg matrix.
    let mut h: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![beta];
    let mut residual = 1.0;
    let mut k = 0;
    while k < max_iter {
        let z = precond(&basis[k])?;
        let mut w = apply(&z);
        let mut col = Vec::with_capacity(k + 2);
        // Modified Gram-Schmidt, applied twice for stability.
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(a, b)| *a -= hij * b);
                if col.len() <= i {
                    col.push(hij);
                } else {
                    col[i] += hij;
                }
            }
        }
        let hnext = norm(&w);
        col.push(hnext);
        for i in 0..k {
            let (a, b) = (col[i], col[i + 1]);
            col[i] = cs[i] * a + sn[i] * b;
            col[i + 1] = -sn[i] * a + cs[i] * b;
        }
        let r = col[k].hypot(col[k + 1]);
        let (c, s) = if r == 0.0 {
            (1.0, 0.0)
        } else {
            (col[k] / r, col[k + 1] / r)
        };
        col[k] = r;
        col[k + 1] = 0.0;
        cs.push(c);
        sn.push(s);
        let gk = g[k];
        g[k] = c * gk;
        g.push(-s * gk);
        h.push(col);
        k += 1;
        residual = g[k].abs() / beta;
        if residual <= tol || hnext == 0.0 {
            break;
        }
        basis.push(w.iter().map(|x| x / hnext).collect());
    }
    // Back substitution for the Krylov coefficients.
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= h[j][i] * y[j];
        }
        y[i] = s / h[i][i];
    }
    let mut v = vec![0.0; n];
    for (j, yj) in y.iter().enumerate() {
        v.iter_mut().zip(&basis[j]).for_each(|(a, b)| *a += yj * b);
    }
    let solution = precond(&v)?;
    if residual <= tol {
        Ok(GmresOutcome {
            solution,
            iterations: k,
            residual,
        })
    } else {
        Err(Error::GmresNotConverged {
            iterations: k,
            residual,
            best: solution,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_in_one_iteration() {
        let b = vec![1.0, -2.0, 3.0];
        let out = gmres(|x| x.to_vec(), |x| Ok(x.to_vec()), &b, 1e-12, 10).unwrap();
        assert_eq!(out.iterations, 1);
        for (x, y) in out.solution.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_rhs() {
        let out = gmres(|x| x.to_vec(), |x| Ok(x.to_vec()), &[0.0; 4], 1e-10, 10).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.solution.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn reports_best_iterate() {
        let d: Vec<f64> = (1..=50).map(f64::from).collect();
        let b = vec![1.0; 50];
        let err = gmres(
            |x| x.iter().zip(&d).map(|(a, b)| a * b).collect(),
            |x| Ok(x.to_vec()),
            &b,
            1e-14,
            3,
        )
        .unwrap_err();
        match err {
            Error::GmresNotConverged {
                iterations, best, ..
            } => {
                assert_eq!(iterations, 3);
                assert_eq!(best.len(), 50);
            }
            e => panic!("unexpected {e}"),
        }
    }
}
