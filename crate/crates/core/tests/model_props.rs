use adqfi_core::model::C64;
use adqfi_core::{build_hamiltonian, d_hamiltonian_d_phi, ModelParams};
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

fn params() -> impl Strategy<Value = ModelParams> {
    (-5.0..5.0, -5.0..5.0, -5.0..5.0, -10.0..10.0, 0.0..=PI, 0.0..TAU)
        .prop_map(|(j, d, b1, b2, t, p)| ModelParams::new(j, d, b1, b2, t, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn hamiltonian_is_exactly_hermitian(q in params()) {
        let h = build_hamiltonian(&q);
        for r in 0..4 {
            for c in 0..4 {
                prop_assert_eq!(h.entry(r, c), h.entry(c, r).conj());
            }
        }
    }

    #[test]
    fn hamiltonian_is_traceless(q in params()) {
        prop_assert!(build_hamiltonian(&q).trace().norm() <= 1e-12 * q.scale());
    }

    #[test]
    fn phi_derivative_matches_central_difference(q in params()) {
        let delta = 1e-4;
        let hp = build_hamiltonian(&q.with_phi(q.phi() + delta).unwrap());
        let hm = build_hamiltonian(&q.with_phi(q.phi() - delta).unwrap());
        let fd = (hp.matrix() - hm.matrix()) / C64::new(2.0 * delta, 0.0);
        let exact = d_hamiltonian_d_phi(&q);
        let worst = (fd - exact.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        // Truncation error of the central difference of B₂ sinθ e^{-iφ} is exactly
        // |B₂ sinθ| (1 − sin δ / δ) ≈ |B₂ sinθ| δ²/6, so 1e-8 is reachable only up to |B₂ sinθ| ≈ 6.
        let transverse = (q.b2() * q.theta().sin()).abs();
        // φ ± δ is rounded at the magnitude of φ, which perturbs the effective step.
        let step_rounding = transverse * 4.0 * f64::EPSILON * TAU / delta;
        let sharp = transverse * (1.0 - delta.sin() / delta) + step_rounding;
        prop_assert!(worst <= sharp, "worst = {worst:e}");
        if sharp <= 1e-8 {
            prop_assert!(worst <= 1e-8, "worst = {worst:e}");
        }
    }

    #[test]
    fn diagonal_split_of_middle_states(q in params()) {
        let h = build_hamiltonian(&q.with_phi(0.0).unwrap());
        let split = (h.entry(1, 1) - h.entry(2, 2)).re;
        let expected = 2.0 * (q.b1() - q.b2() * q.theta().cos());
        prop_assert!((split - expected).abs() <= 1e-12 * q.scale());
    }
}
