//! Free-space Stokes kernels. `r` is always target minus source.

use std::f64::consts::PI;

pub type Mat2 = [[f64; 2]; 2];

/// Single-layer kernel `(1/4π)(−log ρ I + r⊗r/ρ²)`.
#[inline]
pub fn stokeslet(r: [f64; 2]) -> Mat2 {
    let r2 = r[0] * r[0] + r[1] * r[1];
    let c = 1.0 / (4.0 * PI);
    let l = -0.5 * r2.ln();
    [
        [c * (l + r[0] * r[0] / r2), c * r[0] * r[1] / r2],
        [c * r[0] * r[1] / r2, c * (l + r[1] * r[1] / r2)],
    ]
}

/// Double-layer kernel `(1/π)(r·n) r⊗r/ρ⁴` for source normal `n`.
#[inline]
pub fn stresslet(r: [f64; 2], n: [f64; 2]) -> Mat2 {
    let r2 = r[0] * r[0] + r[1] * r[1];
    let s = (r[0] * n[0] + r[1] * n[1]) / (PI * r2 * r2);
    [
        [s * r[0] * r[0], s * r[0] * r[1]],
        [s * r[0] * r[1], s * r[1] * r[1]],
    ]
}

/// Rotlet `r^⊥/ρ²` with `r^⊥ = (r_y, −r_x)`.
#[inline]
pub fn rotlet(r: [f64; 2]) -> [f64; 2] {
    let r2 = r[0] * r[0] + r[1] * r[1];
    [r[1] / r2, -r[0] / r2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_even() {
        let r = [0.3, -1.2];
        let a = stokeslet(r);
        let b = stokeslet([-r[0], -r[1]]);
        assert_eq!(a, b);
        assert_eq!(a[0][1], a[1][0]);
        let n = [0.6, 0.8];
        let d = stresslet(r, n);
        let e = stresslet([-r[0], -r[1]], n);
        for i in 0..2 {
            for j in 0..2 {
                assert!((d[i][j] + e[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rotlet_is_rigid_rotation_at_unit_radius() {
        let v = rotlet([0.0, 1.0]);
        assert_eq!(v, [1.0, 0.0]);
    }
}
