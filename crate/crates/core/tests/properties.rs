use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use quasispin::gcs::{build_gcs, GcsContext, GcsSpec, Orbit, Sign};
use quasispin::geomphase::{geometric_phase_orbit, pancharatnam_sum, SpherePath};
use quasispin::polarization::variance_profile;
use quasispin::squeezing::uncertainty_triples;
use quasispin::{FockBasis, HalfInt, QuantumState, Tolerances};

fn ctx(m: usize, n_max: usize) -> GcsContext {
    GcsContext::new(&FockBasis::build(m, n_max).unwrap()).unwrap()
}

fn small() -> &'static GcsContext {
    static C: OnceLock<GcsContext> = OnceLock::new();
    C.get_or_init(|| ctx(1, 5))
}

fn glauber_ctx() -> &'static GcsContext {
    static C: OnceLock<GcsContext> = OnceLock::new();
    C.get_or_init(|| ctx(1, 24))
}

fn amps(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
}

fn state_from(parts: &[(f64, f64)], cx: &GcsContext) -> Option<QuantumState> {
    let v = DVector::from_iterator(parts.len(), parts.iter().map(|&(a, b)| C64::new(a, b)));
    let n = v.norm();
    (n > 1e-3).then(|| QuantumState::pure(cx.basis(), v / C64::new(n, 0.0)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn heisenberg_never_violated(parts in amps(21)) {
        let cx = small();
        if let Some(s) = state_from(&parts, cx) {
            for t in uncertainty_triples(&s, cx.ops()).unwrap() {
                prop_assert!(t.lhs >= t.rhs - 1e-10, "{t:?}");
            }
        }
    }

    #[test]
    fn delta_p2_is_rotation_invariant(parts in amps(21), theta in 0.0..PI, phi in 0.0..2.0 * PI) {
        let cx = small();
        if let Some(s) = state_from(&parts, cx) {
            let rotated = s.transform(&cx.rotator().displacement(theta, phi)).unwrap();
            let a = variance_profile(&s, cx.ops()).unwrap();
            let b = variance_profile(&rotated, cx.ops()).unwrap();
            prop_assert!((a.delta_p2 - b.delta_p2).abs() < 1e-10);
            prop_assert!((a.casimir - b.casimir).abs() < 1e-10);
        }
    }

    #[test]
    fn max_classical_minimizes_delta_p2(twice_p in 0i32..=5, theta in 0.0..PI, phi in 0.0..2.0 * PI, minus in any::<bool>()) {
        let cx = small();
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let s = build_gcs(&GcsSpec::max_classical(HalfInt::from_twice(twice_p), sign, theta, phi), cx).unwrap();
        let prof = variance_profile(&s, cx.ops()).unwrap();
        prop_assert!((prof.delta_p2 - twice_p as f64 / 2.0).abs() < 1e-10);
    }

    #[test]
    fn glauber_noise_is_flat(a in (-0.7..0.7f64, -0.7..0.7f64), b in (-0.7..0.7f64, -0.7..0.7f64), theta in 0.0..PI, phi in 0.0..2.0 * PI) {
        let cx = glauber_ctx();
        let spec = GcsSpec::glauber(&[C64::new(a.0, a.1)], &[C64::new(b.0, b.1)]).with_angles(theta, phi);
        let prof = variance_profile(&build_gcs(&spec, cx).unwrap(), cx.ops()).unwrap();
        for s in prof.sigma {
            prop_assert!((s - prof.mean_n / 4.0).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn phase_ignores_start_point_and_flips_on_reversal(theta in 0.2..2.9f64, shift in 1usize..31, twice_mu in -3i32..=3) {
        let twice_p = twice_mu.abs().max(if twice_mu % 2 == 0 { 2 } else { 1 });
        let cx = ctx(1, twice_p as usize);
        let spec = GcsSpec::semi_coherent(HalfInt::from_twice(twice_p), HalfInt::from_twice(twice_mu), 0.0, 0.0);
        let orbit = Orbit::of_spec(&spec, &cx).unwrap();
        let path = SpherePath::circle(theta, 32).unwrap();
        let base = pancharatnam_sum(&orbit, &path);
        prop_assert!((pancharatnam_sum(&orbit, &path.rotated(shift)) - base).abs() < 1e-12);
        prop_assert!((pancharatnam_sum(&orbit, &path.reversed()) + base).abs() < 1e-12);
        let r = geometric_phase_orbit(&orbit, &path, &Tolerances::default());
        let want = -(twice_mu as f64) * 2.0 * PI * (theta / 2.0).sin().powi(2);
        prop_assert!(r.converged && (r.gamma_total - want).abs() < 1e-5);
    }
}
