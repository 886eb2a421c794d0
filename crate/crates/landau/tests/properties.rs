use landau::evolution::{step_drift_diffusion, LinearLandau, StepperConfig};
use landau::geometry::{group_inverse_compose, kinetic_distance, Point};
use landau::kernel::Background;
use landau::norms;
use landau::operators::{OperatorContext, VelocityForm};
use landau::phase_space::PhaseGrid;
use landau::projection::Projection;
use landau::random::{rng, smooth_field};
use proptest::prelude::*;

fn grid() -> PhaseGrid {
    PhaseGrid::new(4, 8, 5.5, 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn projection_is_idempotent(seed in any::<u64>()) {
        let g = grid();
        let p = Projection::new(&g).unwrap();
        let f = smooth_field(&g, &mut rng(seed), 0.5, 1, 1.0);
        let pf = p.apply_P(&f).unwrap();
        let ppf = p.apply_P(&pf).unwrap();
        prop_assert!(ppf.sub(&pf).max_abs() <= 1e-12 * (1.0 + pf.max_abs()));
        let micro = p.apply_IminusP(&f).unwrap();
        prop_assert!(p.moments(&micro).unwrap().iter().all(|m| m.abs() < 1e-12));
    }

    #[test]
    fn linear_step_keeps_global_moments(seed in any::<u64>()) {
        let g = grid();
        let bg = Background::new(&g);
        let st = LinearLandau::new(bg.clone(), &g, &StepperConfig { dt: 0.1, t_end: 0.1, ..Default::default() }).unwrap();
        let ctx = OperatorContext::linearized(bg, &g, 0.0, VelocityForm::Conservative).unwrap();
        let f = smooth_field(&g, &mut rng(seed), 0.5, 1, 1e-2);
        let m0 = st.projection().moments(&f).unwrap();
        let m1 = st.projection().moments(&st.step(&ctx, &f).unwrap()).unwrap();
        let scale = norms::norm_l2_weighted(&f, 0.0);
        for k in 0..5 {
            prop_assert!((m1[k] - m0[k]).abs() <= 1e-10 * scale, "moment {} drifted", k);
        }
    }

    #[test]
    fn drift_diffusion_does_not_raise_the_sup(seed in any::<u64>(), theta in 0u32..3) {
        let g = grid();
        let bg = Background::new(&g);
        let mut r = rng(seed);
        let coef = smooth_field(&g, &mut r, 0.5, 1, 0.05);
        let h = smooth_field(&g, &mut r, 0.3, 1, 1.0);
        let ctx = OperatorContext::new(bg, &coef, theta as f64, VelocityForm::Conservative).unwrap();
        let h1 = step_drift_diffusion(&h, &ctx, 0.1).unwrap();
        prop_assert!(h1.max_abs() <= h.max_abs() * (1.0 + 1e-10));
    }

    #[test]
    fn group_law_is_left_invariant(
        t in -2.0..2.0f64, x in prop::array::uniform3(-2.0..2.0f64), v in prop::array::uniform3(-2.0..2.0f64),
        s in -2.0..2.0f64, y in prop::array::uniform3(-2.0..2.0f64), w in prop::array::uniform3(-2.0..2.0f64),
    ) {
        let (z, zeta) = (Point::new(t, x, v), Point::new(s, y, w));
        prop_assert_eq!(kinetic_distance(&group_inverse_compose(&z, &z)), 0.0);
        let d = kinetic_distance(&group_inverse_compose(&zeta, &z));
        prop_assert!(d.is_finite() && d >= 0.0);
    }
}
