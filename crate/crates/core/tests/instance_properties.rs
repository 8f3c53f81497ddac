use bwk::instance::{
    build_arm_removal_lp, build_binding_penalty_lp, build_primal_lp, diagnostics, generate_random_instance,
    ProblemInstance,
};
use bwk::lp::{solve_lp, DEFAULT_FEAS_TOL, DEFAULT_PIVOT_TOL};
use bwk::Error;
use proptest::prelude::*;

fn generated() -> impl Strategy<Value = Option<ProblemInstance>> {
    (1usize..=4, 1usize..=3, 0.2f64..0.8, any::<u64>()).prop_map(|(m, d, b, seed)| {
        match generate_random_instance(m, d, b, seed) {
            Ok(inst) => Some(inst),
            Err(Error::GenerationFailure { .. }) => None,
            Err(e) => panic!("{e}"),
        }
    })
}

fn value(lp: &bwk::lp::LinearProgram) -> f64 {
    solve_lp(lp, DEFAULT_PIVOT_TOL).unwrap().objective_value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn removal_values_characterise_the_optimal_sets(inst in generated(), horizon in 10usize..5000) {
        let Some(inst) = inst else { return Ok(()) };
        let diag = diagnostics(&inst, horizon, DEFAULT_FEAS_TOL).unwrap();
        prop_assert!(diag.nondegenerate);
        let opt = value(&build_primal_lp(&inst, horizon).unwrap());
        let margin = DEFAULT_FEAS_TOL * horizon as f64;
        for i in 0..inst.m {
            let gap = opt - value(&build_arm_removal_lp(&inst, horizon, i).unwrap());
            prop_assert!(gap > -margin);
            prop_assert_eq!(gap > margin, diag.sets.i_star.contains(&i));
        }
        for j in 0..inst.d {
            let gap = opt - value(&build_binding_penalty_lp(&inst, horizon, j).unwrap());
            prop_assert!(gap > -margin);
            prop_assert_eq!(gap > margin, diag.sets.j_prime.contains(&j));
        }
        let s = &diag.sets;
        prop_assert_eq!(s.i_star.len() + s.j_prime.len(), inst.d);
        prop_assert_eq!(s.i_prime.len() + s.j_star.len(), inst.m);
    }

    #[test]
    fn diagnostics_are_scale_free(inst in generated(), horizon in 10usize..5000) {
        let Some(inst) = inst else { return Ok(()) };
        let a = diagnostics(&inst, 1, DEFAULT_FEAS_TOL).unwrap();
        let b = diagnostics(&inst, horizon, DEFAULT_FEAS_TOL).unwrap();
        prop_assert!((a.opt_lp_per_t - b.opt_lp_per_t).abs() < 1e-9);
        prop_assert_eq!(&a.sets, &b.sets);
        let (da, db) = (a.delta.unwrap(), b.delta.unwrap());
        prop_assert!((da - db).abs() < 1e-9);
    }

    #[test]
    fn diagnostic_quantities_are_consistent(inst in generated()) {
        let Some(inst) = inst else { return Ok(()) };
        let diag = diagnostics(&inst, 100, DEFAULT_FEAS_TOL).unwrap();
        let delta = diag.delta.unwrap();
        prop_assert!(delta >= 0.02 - 1e-12);
        let theta = diag.theta.unwrap();
        prop_assert!(theta > 0.0 && theta <= delta / 5.0);
        prop_assert!(diag.sigma > 0.0);
        let chi = diag.chi.unwrap();
        prop_assert!(chi > 0.0 && chi <= 1.0 + 1e-9);
        // Complementary slackness between x* and the reduced costs.
        for (x, d) in diag.x_star_per_t.iter().zip(&diag.delta_i) {
            prop_assert!(*d >= -1e-9);
            prop_assert!((x * d).abs() < 1e-9);
        }
        // Strong duality per unit time.
        let dual: f64 = diag.y_star.iter().map(|y| y * inst.b).sum();
        prop_assert!((dual - diag.opt_lp_per_t).abs() < 1e-9);
    }

    #[test]
    fn instance_json_round_trips(inst in generated()) {
        let Some(inst) = inst else { return Ok(()) };
        let back = ProblemInstance::from_json(&inst.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, inst);
    }
}

#[test]
fn fixture_files_match_built_in_fixtures() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    assert_eq!(ProblemInstance::load(dir.join("f1.json")).unwrap(), bwk::instance::fixtures::f1());
    assert_eq!(ProblemInstance::load(dir.join("f2.json")).unwrap(), bwk::instance::fixtures::f2());
}

#[test]
fn generator_is_seed_deterministic() {
    let a = generate_random_instance(3, 2, 0.5, 11).unwrap();
    let b = generate_random_instance(3, 2, 0.5, 11).unwrap();
    assert_eq!(a, b);
    assert_eq!((a.m, a.d), (4, 3));
    assert!(matches!(generate_random_instance(3, 2, 0.0, 1), Err(Error::Validation(_))));
}
