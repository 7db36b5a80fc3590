use std::f64::consts::PI;

use proptest::prelude::*;
use vesicle_core::VesicleCurve;

fn shape(n: usize, a: f64, b: f64, eps: f64) -> VesicleCurve {
    VesicleCurve::polar(n, [0.0, 0.0], |t| {
        let r = a * b / ((b * t.cos()).powi(2) + (a * t.sin()).powi(2)).sqrt();
        r * (1.0 + eps * (3.0 * t).cos())
    })
    .unwrap()
}

fn rigid(c: &VesicleCurve, angle: f64, shift: [f64; 2]) -> VesicleCurve {
    let (s, co) = angle.sin_cos();
    c.map_points(|p| {
        [
            co * p[0] - s * p[1] + shift[0],
            s * p[0] + co * p[1] + shift[1],
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn geometry_is_invariant_under_rigid_motion(
        a in 0.6f64..2.0, b in 0.6f64..2.0, eps in 0.0f64..0.15,
        angle in -PI..PI, dx in -5.0f64..5.0, dy in -5.0f64..5.0,
    ) {
        let c = shape(64, a, b, eps);
        let g = c.geometry().unwrap();
        let h = rigid(&c, angle, [dx, dy]).geometry().unwrap();
        prop_assert!((g.area - h.area).abs() < 1e-11 * g.area);
        prop_assert!((g.length - h.length).abs() < 1e-11 * g.length);
        for (k0, k1) in g.curvature.iter().zip(&h.curvature) {
            prop_assert!((k0 - k1).abs() < 1e-8 * (1.0 + k0.abs()));
        }
    }

    #[test]
    fn geometry_scales_with_dilation(a in 0.6f64..2.0, b in 0.6f64..2.0, s in 0.2f64..5.0) {
        let c = shape(48, a, b, 0.05);
        let g = c.geometry().unwrap();
        let h = c.map_points(|p| [s * p[0], s * p[1]]).geometry().unwrap();
        prop_assert!((h.area - s * s * g.area).abs() < 1e-11 * h.area);
        prop_assert!((h.length - s * g.length).abs() < 1e-11 * h.length);
        prop_assert!((h.curvature[5] * s - g.curvature[5]).abs() < 1e-8 * g.curvature[5].abs().max(1.0));
    }

    #[test]
    fn stacked_and_text_round_trip(a in 0.6f64..2.0, b in 0.6f64..2.0, eps in 0.0f64..0.15) {
        let c = shape(32, a, b, eps);
        prop_assert_eq!(&VesicleCurve::from_stacked(&c.stacked()).unwrap(), &c);
        prop_assert_eq!(&VesicleCurve::from_text(&c.to_text()).unwrap(), &c);
    }

    #[test]
    fn upsampling_keeps_band_limited_geometry(a in 0.8f64..1.6, b in 0.8f64..1.6) {
        let c = VesicleCurve::ellipse(64, a, b, [0.3, -0.1], 0.4).unwrap();
        let g = c.geometry().unwrap();
        let f = c.upsample(4).unwrap().geometry().unwrap();
        prop_assert!((g.area - f.area).abs() < 1e-12 * g.area);
        prop_assert!((g.length - f.length).abs() < 1e-10 * g.length);
    }
}

#[test]
fn ellipse_area_is_exact() {
    let c = VesicleCurve::ellipse(32, 3.0, 1.0, [1.0, 2.0], 0.7).unwrap();
    let g = c.geometry().unwrap();
    assert!((g.area - 3.0 * PI).abs() < 1e-12);
    // a point-symmetric region has its centroid at the center
    let m = c.centroid();
    assert!((m[0] - 1.0).abs() < 1e-12 && (m[1] - 2.0).abs() < 1e-12);
}

#[test]
fn clockwise_curve_is_rejected() {
    let c = VesicleCurve::ellipse(32, 2.0, 1.0, [0.0, 0.0], 0.0).unwrap();
    let r = c.reversed();
    assert!(VesicleCurve::new(r.x().to_vec(), r.y().to_vec()).is_err());
}
