use std::f64::consts::PI;

use abflow::critical::{self, CriticalKind};
use abflow::field::{self, PhysicalConstants};
use abflow::{ComplexValue, FlowParams, Vec2};
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = FlowParams> {
    (0.2f64..5.0, 0.2f64..5.0, 0.0f64..4.0, 0.0f64..=0.5)
        .prop_map(|(hbar, mass, k, delta)| FlowParams::new(hbar, mass, k, delta).unwrap())
}

/// Regular points in the annulus 0.05 <= r <= 20.
fn point_strategy() -> impl Strategy<Value = Vec2> {
    (0.05f64..20.0, -PI..PI).prop_map(|(r, t)| Vec2::new(r * t.cos(), r * t.sin()))
}

proptest! {
    #[test]
    fn derivative_is_conjugate_current(params in params_strategy(), p in point_strategy()) {
        let d = field::complex_derivative(&params, p.to_complex()).unwrap();
        let j = field::current(&params, p).unwrap();
        let scale = params.a() + params.b() / p.norm() + f64::MIN_POSITIVE;
        prop_assert!((d.re - j.x).abs() <= 4.0 * f64::EPSILON * scale);
        prop_assert!((d.im + j.y).abs() <= 4.0 * f64::EPSILON * scale);
    }

    #[test]
    fn stream_function_is_even_in_x(params in params_strategy(), p in point_strategy()) {
        let a = field::stream_function(&params, p).unwrap();
        let b = field::stream_function(&params, p.mirror_x()).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn hamiltonian_is_stream_function(params in params_strategy(), p in point_strategy()) {
        let h = field::hamiltonian(&params, p).unwrap();
        let psi = field::stream_function(&params, p).unwrap();
        prop_assert_eq!(h.to_bits(), psi.to_bits());
    }

    #[test]
    fn potential_is_sum_of_parts(params in params_strategy(), p in point_strategy()) {
        let z = p.to_complex();
        let f = field::complex_potential(&params, z).unwrap().value;
        let (f1, f2) = field::decompose_potential(&params, z).unwrap();
        let err = (f - (f1 + f2)).norm();
        prop_assert!(err <= 1e-14 * f.norm().max(f1.norm()).max(f2.norm()));
    }

    #[test]
    fn far_field_deviation_is_exact(params in params_strategy(), theta in -PI..PI) {
        for radius in [10.0, 100.0, 1000.0] {
            let z = ComplexValue::from_polar(radius, theta);
            let d = field::complex_derivative(&params, z).unwrap();
            let deviation = (d + params.a()).norm();
            let expected = params.b() / radius;
            if expected > 0.0 {
                // F' + a cancels down from magnitude a, so roundoff of order
                // eps * a is unavoidable once b/|z| is tiny compared to a
                let tol = (1e-12 * expected).max(4.0 * f64::EPSILON * params.a());
                prop_assert!((deviation - expected).abs() <= tol,
                    "r = {radius}: {deviation} vs {expected}");
            } else {
                prop_assert_eq!(deviation, 0.0);
            }
        }
    }

    #[test]
    fn flux_round_trip(charge in 0.1f64..10.0, c in 0.1f64..10.0, hbar in 0.1f64..10.0, flux in 0.0f64..10.0) {
        let consts = PhysicalConstants::new(charge, c).unwrap();
        let delta = field::flux_to_delta(&consts, hbar, flux).unwrap();
        let back = field::delta_to_flux(&consts, hbar, delta).unwrap();
        prop_assert!((back - flux).abs() <= 1e-14 * flux.max(1.0));
    }

    #[test]
    fn vector_potential_is_azimuthal(flux in 0.01f64..10.0, p in point_strategy()) {
        let a = field::vector_potential(&PhysicalConstants::unit(), flux, p).unwrap();
        let r = p.norm();
        prop_assert!(a.dot(p).abs() <= 1e-14 * a.norm() * r);
        prop_assert!((a.norm() - flux / (2.0 * PI * r)).abs() <= 1e-14 * a.norm());
        // counter-clockwise for positive flux
        prop_assert!(p.cross(a) > 0.0);
    }

    #[test]
    fn saddle_is_a_genuine_saddle(hbar in 0.2f64..5.0, mass in 0.2f64..5.0, k in 0.1f64..4.0, delta in 0.01f64..=0.5) {
        let params = FlowParams::new(hbar, mass, k, delta).unwrap();
        let sp = critical::stagnation_point(&params).unwrap();
        prop_assert_eq!(sp.kind, CriticalKind::SaddleStagnation);
        let j = field::current(&params, sp.location).unwrap();
        prop_assert!(j.norm() <= 1e-13 * params.a());
        let rate = hbar * k * k / (delta * mass);
        let [l1, l2] = critical::jacobian(&params, sp.location).unwrap().real_eigenvalues().unwrap();
        prop_assert!((l1 - rate).abs() <= 1e-12 * rate);
        prop_assert!((l2 + rate).abs() <= 1e-12 * rate);
        let level = critical::separatrix_level(&params).unwrap();
        let h = field::hamiltonian(&params, sp.location).unwrap();
        prop_assert!((level - h).abs() <= 1e-13 * level.abs().max(params.b()));
    }
}

/// Splitmix-style generator so the point set is fixed without extra deps.
fn fixed_points(n: usize) -> Vec<Vec2> {
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..n)
        .map(|_| {
            let r = 0.1 + 4.9 * next();
            let t = -PI + 2.0 * PI * next();
            Vec2::new(r * t.cos(), r * t.sin())
        })
        .collect()
}

#[test]
fn jacobian_matches_central_differences() {
    let params = FlowParams::natural(1.0, 0.5).unwrap();
    let h = 1e-5;
    for p in fixed_points(100) {
        let jac = critical::jacobian(&params, p).unwrap();
        let ex = Vec2::new(h, 0.0);
        let ey = Vec2::new(0.0, h);
        let dx = (field::current(&params, p + ex).unwrap()
            - field::current(&params, p - ex).unwrap())
            * (0.5 / h);
        let dy = (field::current(&params, p + ey).unwrap()
            - field::current(&params, p - ey).unwrap())
            * (0.5 / h);
        let err = [
            jac.du_dx - dx.x,
            jac.du_dy - dy.x,
            jac.dv_dx - dx.y,
            jac.dv_dy - dy.y,
        ]
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()));
        assert!(err <= 1e-5, "at {p:?}: {err}");
    }
}

#[test]
fn quadratic_model_remainder_vanishes_faster_than_square() {
    let params = FlowParams::natural(1.0, 0.5).unwrap();
    let z0 = critical::stagnation_point(&params)
        .unwrap()
        .location
        .to_complex();
    let f0 = field::complex_potential(&params, z0).unwrap().value;
    let mut previous = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3] {
        let mut worst = 0.0f64;
        for j in 0..8 {
            let w = ComplexValue::from_polar(eps, j as f64 * PI / 4.0);
            let f = field::complex_potential(&params, z0 + w).unwrap().value;
            let f3 = critical::local_quadratic_potential(&params, z0 + w).unwrap();
            worst = worst.max((f - f0 - f3).norm() / (eps * eps));
        }
        assert!(worst < 0.2 * previous, "eps {eps}: {worst} vs {previous}");
        previous = worst;
    }
    assert!(previous < 1e-2);
}

#[test]
fn vortex_is_a_singularity_not_an_equilibrium() {
    let params = FlowParams::natural(1.0, 0.5).unwrap();
    let v = critical::vortex(&params).unwrap();
    assert_eq!(v.kind, CriticalKind::VortexSingularity);
    assert!(field::current(&params, Vec2::ZERO).is_err());
    assert!(critical::vortex(&FlowParams::natural(1.0, 0.0).unwrap()).is_none());
}
