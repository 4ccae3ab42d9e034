use nalgebra::DVector;
use proptest::prelude::*;
use unruh_core::frames::{transform_observable, transform_state, Direction, FramePair};
use unruh_core::gaussian::{
    apply_symplectic, displace, measure_commuting_quadratures, observable_moments, omega, purity,
    thermal_state, two_mode_squeezed, uncertainty_min_eigenvalue, Outcomes, SymplecticOp,
};
use unruh_core::teleport::{alice_observables, rindler_preparation, BOB_RESOURCE};
use unruh_core::Complex64;

fn composite(ops: &[(f64, f64, f64)]) -> SymplecticOp {
    let mut m = SymplecticOp::identity(2).matrix().clone();
    for &(r, t1, t2) in ops {
        let sq = SymplecticOp::two_mode_squeeze(r);
        let rot1 = SymplecticOp::phase_rotation(t1);
        let rot2 = SymplecticOp::phase_rotation(t2);
        let mut rot = m.clone() * 0.0;
        rot.view_mut((0, 0), (2, 2)).copy_from(rot1.matrix());
        rot.view_mut((2, 2), (2, 2)).copy_from(rot2.matrix());
        m = rot * sq.matrix() * m;
    }
    SymplecticOp::linear(m).expect("products of symplectic maps are symplectic")
}

fn op_strategy() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-0.8f64..0.8, -3.2f64..3.2, -3.2f64..3.2), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symplectic_closure_and_physicality(ops in op_strategy(), nbar in 0.0f64..3.0, mu in 0.0f64..0.95) {
        let s = composite(&ops);
        let om = omega(2);
        let dev = s.matrix() * &om * s.matrix().transpose() - &om;
        prop_assert!(dev.amax() < 1e-9 * s.matrix().amax().powi(2).max(1.0));

        let inv = s.inverse();
        let id = s.matrix() * inv.matrix();
        prop_assert!((id - nalgebra::DMatrix::identity(4, 4)).amax() < 1e-9 * s.matrix().amax().powi(2).max(1.0));

        let st = thermal_state("A", nbar).unwrap().tensor(&thermal_state("B", nbar).unwrap()).unwrap();
        let out = apply_symplectic(&st, &s, &["A", "B"]).unwrap();
        prop_assert!(uncertainty_min_eigenvalue(out.covariance()) > -1e-9 * out.covariance().amax().max(1.0));
        prop_assert!((purity(&out) - purity(&st)).abs() < 1e-8);
        let t = two_mode_squeezed(mu, 1.0, ["A", "B"]).unwrap();
        prop_assert!(purity(&t) <= 1.0 + 1e-9);
        prop_assert!(purity(&st) <= 1.0 + 1e-12);
    }

    #[test]
    fn frame_change_preserves_expectations(
        mu in 0.0f64..0.95,
        coeffs in prop::collection::vec(-2.0f64..2.0, 4),
        a in (-1.0f64..1.0, -1.0f64..1.0),
        nbar in 0.0f64..2.0,
    ) {
        let pair = FramePair::new("R", "R~", ("M", "M~"), mu).unwrap();
        let rindler = displace(
            &thermal_state("R", nbar).unwrap().tensor(&thermal_state("R~", 0.0).unwrap()).unwrap(),
            "R",
            Complex64::new(a.0, a.1),
        )
        .unwrap();
        let labels: Vec<String> = rindler.labels().to_vec();
        let mink = transform_state(&rindler, std::slice::from_ref(&pair), Direction::ToMinkowski).unwrap();
        let (c2, l2) = transform_observable(&coeffs, &labels, std::slice::from_ref(&pair), Direction::ToMinkowski).unwrap();
        prop_assert_eq!(l2, mink.labels().to_vec());
        let (m1, v1) = observable_moments(&rindler, std::slice::from_ref(&coeffs)).unwrap();
        let (m2, v2) = observable_moments(&mink, &[c2]).unwrap();
        prop_assert!((m1[0] - m2[0]).abs() < 1e-9 * (1.0 + m1[0].abs()));
        prop_assert!((v1[(0, 0)] - v2[(0, 0)]).abs() < 1e-9 * (1.0 + v1[(0, 0)]));

        let back = transform_state(&mink, &[pair], Direction::ToRindler).unwrap();
        prop_assert!((back.covariance() - rindler.covariance()).amax() < 1e-9);
        prop_assert!((back.mean() - rindler.mean()).amax() < 1e-9);
    }

    #[test]
    fn conditional_state_is_a_coherent_state(
        mu in 0.0f64..0.99,
        x in -3.0f64..3.0,
        p in -3.0f64..3.0,
        a in (-1.5f64..1.5, -1.5f64..1.5),
    ) {
        let prep = rindler_preparation(mu, Complex64::new(a.0, a.1), true).unwrap();
        let m = measure_commuting_quadratures(&prep, &alice_observables(), Outcomes::Given(&[x, p])).unwrap();
        let bob = unruh_core::gaussian::partial_trace(&m.posterior, &[BOB_RESOURCE]).unwrap();
        let cov = bob.covariance();
        prop_assert!((cov - nalgebra::DMatrix::identity(2, 2) * 0.25).amax() < 1e-10);
        let expect = DVector::from_column_slice(&[mu * (x - a.0), -mu * (p + a.1)]);
        prop_assert!((bob.mean() - expect).amax() < 1e-10);
    }
}
