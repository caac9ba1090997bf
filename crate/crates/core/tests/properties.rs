use proptest::prelude::*;

use genmoments::bounds::{
    compare_power_vs_chi2, highprob_bound_chi2, moment_bound_chi2, moment_bound_power,
    moment_bound_ratio, second_moment_bound_mi, ValidityMode,
};
use genmoments::distributions::{make_discrete, DiscreteDistribution, DEFAULT_ENUMERATION_CAP};
use genmoments::divergences::{
    chi_square_divergence, kl_divergence, power_divergence, renyi_divergence,
};
use genmoments::experiments::{verify_models, BatteryModel, VerifyOptions};
use genmoments::information::{
    build_joint, chi_square_information, max_density_ratio, mutual_information,
    power_information, JointDistribution, KernelSpec, DEFAULT_W_ROUND_DIGITS,
};
use genmoments::risk::{gen_moments_exact, LearningModel, LossKind, LossSpec, ModelSpec};

fn weights(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, k)
}

fn pair() -> impl Strategy<Value = (DiscreteDistribution, DiscreteDistribution)> {
    (2usize..7).prop_flat_map(|k| (weights(k), weights(k))).prop_map(|(p, q)| {
        let atoms: Vec<f64> = (0..p.len()).map(|i| i as f64 * 0.5).collect();
        (make_discrete(&atoms, &p).unwrap(), make_discrete(&atoms, &q).unwrap())
    })
}

fn kernel() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (-1.0f64..1.0).prop_map(|w| KernelSpec::Constant { w: (w * 100.0).round() / 100.0 }),
        Just(KernelSpec::SampleMean),
        (0.1f64..0.9).prop_map(|a| KernelSpec::NoisySampleMean {
            noise: make_discrete(&[-0.25, 0.25], &[a, 1.0 - a]).unwrap(),
        }),
        (0.2f64..3.0).prop_map(|g| KernelSpec::Gibbs {
            grid: vec![-0.5, 0.0, 0.5, 1.0],
            inverse_temperature: g,
            c: 1.0,
        }),
    ]
}

fn model() -> impl Strategy<Value = ModelSpec> {
    (2usize..5, 1usize..4, kernel(), 0.4f64..2.0, any::<bool>())
        .prop_flat_map(|(k, n, kernel, c, square)| {
            (weights(k), Just((n, kernel, c, square)))
        })
        .prop_map(|(w, (n, kernel, c, square))| {
            let atoms: Vec<f64> = (0..w.len()).map(|i| -1.0 + i as f64 * 0.75).collect();
            let loss = if square {
                LossKind::TruncatedSquare { c }
            } else {
                LossKind::ClippedAbsolute { c }
            };
            ModelSpec {
                data: make_discrete(&atoms, &w).unwrap().into(),
                n,
                kernel,
                loss: LossSpec::new(loss).unwrap(),
            }
        })
}

fn joint_of(spec: &ModelSpec) -> JointDistribution {
    build_joint(
        spec.data.as_discrete().unwrap(),
        spec.n,
        &spec.kernel,
        DEFAULT_W_ROUND_DIGITS,
        DEFAULT_ENUMERATION_CAP,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn divergences_are_nonnegative_and_ordered((p, q) in pair()) {
        let kl = kl_divergence(&p, &q).unwrap().value;
        let chi = chi_square_divergence(&p, &q).unwrap().value;
        prop_assert!(kl >= -1e-15);
        prop_assert!(chi >= -1e-15);
        prop_assert!((chi - power_divergence(&p, &q, 2.0).unwrap().value).abs() <= 1e-12);
        // Rényi is nondecreasing in its order and reaches KL at 1
        let mut prev = kl;
        for a in [1.5, 2.0, 3.0, 4.0] {
            let r = renyi_divergence(&p, &q, a).unwrap().value;
            prop_assert!(r >= prev - 1e-12, "order {a}: {r} < {prev}");
            prev = r;
        }
        prop_assert!(kl <= chi.ln_1p() + 1e-12);
    }

    #[test]
    fn divergence_of_a_law_with_itself_is_zero((p, _q) in pair()) {
        prop_assert!(kl_divergence(&p, &p).unwrap().value.abs() < 1e-14);
        for t in [1.5, 2.0, 3.0] {
            prop_assert!(power_divergence(&p, &p, t).unwrap().value.abs() < 1e-12);
        }
    }

    #[test]
    fn every_verifier_check_holds(spec in model()) {
        let entry = BatteryModel { label: "prop".into(), spec };
        let report = verify_models(&[entry], &VerifyOptions::default()).unwrap();
        prop_assert!(report.passed, "{:?}", report.violations);
    }

    #[test]
    fn information_measures_are_ordered(spec in model()) {
        let j = joint_of(&spec);
        let mi = mutual_information(&j).value;
        let chi = chi_square_information(&j).value;
        let r = max_density_ratio(&j);
        prop_assert!(mi >= -1e-14);
        prop_assert!(mi <= chi.ln_1p() + 1e-12);
        prop_assert!(chi <= r * r - 1.0 + 1e-12 * r * r);
        for t in [3.0, 4.0] {
            let pt = power_information(&j, t).unwrap().value;
            prop_assert!((chi + 1.0).sqrt() <= (pt + 1.0).powf(1.0 / (2.0 * (t - 1.0))) + 1e-12);
        }
    }

    #[test]
    fn joint_json_round_trip(spec in model()) {
        let j = joint_of(&spec);
        let back = JointDistribution::from_json(j.to_json()).unwrap();
        prop_assert!((mutual_information(&j).value - mutual_information(&back).value).abs() < 1e-12);
        prop_assert!(
            (chi_square_information(&j).value - chi_square_information(&back).value).abs() < 1e-12
        );
    }

    #[test]
    fn exact_moments_obey_the_bounds(spec in model()) {
        let model = LearningModel::from_spec(&spec).unwrap();
        let j = joint_of(&spec);
        let chi = chi_square_information(&j).value;
        let r = max_density_ratio(&j);
        let ests = gen_moments_exact(&model, &[1, 2, 3, 4], DEFAULT_ENUMERATION_CAP).unwrap();
        for e in ests {
            let b = moment_bound_chi2(model.sigma(), model.n, e.order, chi, ValidityMode::Relaxed).unwrap();
            if b.valid_relaxed {
                prop_assert!(e.value.abs() <= b.value + 1e-9);
            }
            let b = moment_bound_ratio(model.sigma(), model.n, e.order, r, ValidityMode::Relaxed).unwrap();
            if b.valid_relaxed {
                prop_assert!(e.value.abs() <= b.value + 1e-9);
            }
            if e.order == 2 {
                let mi = mutual_information(&j).value;
                prop_assert!(e.value <= second_moment_bound_mi(model.sigma(), model.n, mi).unwrap().value + 1e-9);
            }
        }
    }

    #[test]
    fn moment_bounds_are_monotone(
        sigma in 0.1f64..2.0,
        n in 1usize..50,
        m in 1u32..6,
        info in 0.0f64..100.0,
        extra in 0.0f64..10.0,
    ) {
        let lo = moment_bound_chi2(sigma, n, m, info, ValidityMode::Relaxed).unwrap().value;
        let hi = moment_bound_chi2(sigma, n, m, info + extra, ValidityMode::Relaxed).unwrap().value;
        let more = moment_bound_chi2(sigma, n + 1, m, info, ValidityMode::Relaxed).unwrap().value;
        prop_assert!(lo <= hi);
        prop_assert!(more <= lo);
    }

    #[test]
    fn single_draw_bound_shrinks_as_delta_grows(
        sigma in 0.1f64..2.0,
        n in 1usize..50,
        info in 0.0f64..100.0,
        d in 0.01f64..0.5,
    ) {
        let tight = highprob_bound_chi2(sigma, n, d, info, ValidityMode::Relaxed).unwrap().value;
        let loose = highprob_bound_chi2(sigma, n, d / 2.0, info, ValidityMode::Relaxed).unwrap().value;
        prop_assert!(tight <= loose * (1.0 + 1e-12));
    }

    #[test]
    fn chi2_bound_wins_past_the_threshold(
        m in 1u32..5,
        t in prop::sample::select(vec![3.0, 4.0, 5.0]),
        sigma in 0.1f64..2.0,
        n in 1usize..20,
        scale in 1.0f64..50.0,
    ) {
        let threshold = compare_power_vs_chi2(m, t, 0.0).unwrap().threshold;
        let pt = threshold * scale;
        prop_assert!(compare_power_vs_chi2(m, t, pt).unwrap().holds);
        // largest chi-square information compatible with this power information
        let chi = (pt + 1.0).powf(1.0 / (t - 1.0)) - 1.0;
        let c = moment_bound_chi2(sigma, n, m, chi, ValidityMode::Relaxed).unwrap().value;
        let p = moment_bound_power(sigma, n, m, t, pt, ValidityMode::Relaxed).unwrap().value;
        prop_assert!(c <= p * (1.0 + 1e-12), "{c} > {p}");
    }

    #[test]
    fn invalid_parameter_sets_report_rather_than_fail(
        sigma in 0.1f64..2.0,
        n in 1usize..20,
        info in 0.0f64..10.0,
    ) {
        // m·q = 2 for m = 1 with q = 2: strict rejects, relaxed accepts
        let r = moment_bound_chi2(sigma, n, 1, info, ValidityMode::Strict).unwrap();
        prop_assert!(!r.valid && !r.valid_strict && r.valid_relaxed);
        prop_assert!(r.value.is_finite() && r.value > 0.0);
    }
}

proptest! {
    #[test]
    fn chi2_bound_decays_as_n_to_minus_half_m(
        sigma in 0.1f64..2.0,
        m in 1u32..6,
        info in 0.0f64..100.0,
    ) {
        use genmoments::experiments::{loglog_slope, ExperimentRow};
        let rows: Vec<ExperimentRow> = (1..=8)
            .map(|n| ExperimentRow {
                n,
                m,
                true_moment: 0.0,
                true_stderr: 0.0,
                exact_moment: None,
                info_chi2: Some(info),
                info_mi: None,
                bound_chi2: Some(moment_bound_chi2(sigma, n, m, info, ValidityMode::Relaxed).unwrap().value),
                bound_mi: None,
                bound_expected: None,
                valid_strict: true,
                valid_relaxed: true,
            })
            .collect();
        let slope = loglog_slope(&rows, m, |r| r.bound_chi2).unwrap();
        prop_assert!((slope + m as f64 / 2.0).abs() < 1e-9, "slope {slope}");
    }
}
