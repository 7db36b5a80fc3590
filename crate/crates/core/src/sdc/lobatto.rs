use crate::error::{Error, Result};

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (x.abs() - 1.0).abs() < 1e-300 {
        0.5 * (n * (n + 1)) as f64 * x.powi(n as i32 + 1)
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Gauss-Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Gauss-Lobatto nodes and weights on `[−1, 1]`: the endpoints and the roots
/// of `P'_{p−1}`, with weights `2 / (p (p−1) P_{p−1}(x)²)`.
pub fn lobatto_nodes(p: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!(
            "Lobatto grid needs p >= 2, got {p}"
        )));
    }
    let n = p - 1;
    let mut nodes = vec![-1.0; p];
    nodes[p - 1] = 1.0;
    for i in 1..p - 1 {
        // Chebyshev-Gauss-Lobatto initial guess, then Newton on P'_n using
        // (1 − x²) P''_n = 2x P'_n − n(n+1) P_n.
        let mut x = -(std::f64::consts::PI * i as f64 / n as f64).cos();
        for _ in 0..100 {
            let (pn, dpn) = legendre(n, x);
            let d2 = (2.0 * x * dpn - (n * (n + 1)) as f64 * pn) / (1.0 - x * x);
            let dx = dpn / d2;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
    }
    let scale = 2.0 / (p * (p - 1)) as f64;
    let weights = nodes
        .iter()
        .map(|&x| {
            let (pn, _) = legendre(n, x);
            scale / (pn * pn)
        })
        .collect();
    Ok((nodes, weights))
}

/// Gauss-Lobatto nodes on `[0, Δt]` with interpolatory integration weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LobattoGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `cumulative[n][i] = ∫_0^{t_n} ℓ_i`, with `ℓ_i` the Lagrange basis.
    pub cumulative: Vec<Vec<f64>>,
}

impl LobattoGrid {
    /// Grid of `p` nodes on `[0, dt]`.
    pub fn new(p: usize, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "interval length must be positive, got {dt}"
            )));
        }
        let (x, w) = lobatto_nodes(p)?;
        let nodes: Vec<f64> = x.iter().map(|x| 0.5 * dt * (x + 1.0)).collect();
        let weights = w.iter().map(|w| 0.5 * dt * w).collect();
        // Interpolant has degree p − 1, so p Gauss points integrate it exactly.
        let (gx, gw) = gauss_legendre(p);
        let mut cumulative = vec![vec![0.0; p]; p];
        for n in 1..p {
            let (a, b) = (nodes[n - 1], nodes[n]);
            let mut row = cumulative[n - 1].clone();
            for (xi, wi) in gx.iter().zip(&gw) {
                let t = 0.5 * (b - a) * (xi + 1.0) + a;
                for (i, r) in row.iter_mut().enumerate() {
                    *r += 0.5 * (b - a) * wi * lagrange(&nodes, i, t);
                }
            }
            cumulative[n] = row;
        }
        Ok(Self {
            nodes,
            weights,
            cumulative,
        })
    }

    pub fn p(&self) -> usize {
        self.nodes.len()
    }

    /// Substep lengths `t_{n+1} − t_n`.
    pub fn substeps(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `(p−1) × p` rows with `rows[n][i] = ∫_{t_n}^{t_{n+1}} ℓ_i`.
    pub fn integration_rows(&self) -> Vec<Vec<f64>> {
        self.cumulative
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| b - a).collect())
            .collect()
    }
}

fn lagrange(nodes: &[f64], i: usize, t: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, &xk)| (t - xk) / (nodes[i] - xk))
        .product()
}
