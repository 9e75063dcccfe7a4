use super::*;
use crate::estimators::empirical_survival_copula;
use crate::margins::{default_hill_k, hill_estimate};

fn pareto(a: f64) -> Margin {
    Margin::pareto(a).unwrap()
}

fn comonotone(alpha: f64, alpha_star: f64, alpha0: f64) -> BivariateModel {
    BivariateModel::Additive(
        AdditiveModel::new(
            pareto(alpha),
            Some(pareto(alpha_star)),
            pareto(alpha0),
            VKind::Comonotone,
        )
        .unwrap(),
    )
}

fn mixture(q: f64) -> BivariateModel {
    BivariateModel::Mixture(BernoulliMixtureModel::new(q, 1.5, 2.0, 3.0, RLaw::UNIT).unwrap())
}

fn two_sample_ks(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn validation_examples() {
    let r = validate_model(&comonotone(2.0, 2.0, 2.5));
    assert!(r.ok(), "{r:?}");
    assert!(r.qualifies(results::MME_LIMIT));
    assert!(r.qualifies(results::MES_LIMIT));
    assert!(r.qualifies(results::HIDDEN_REGULAR_VARIATION));

    let r = validate_model(&comonotone(2.0, 2.0, 4.0));
    assert!(!r.ok());
    let names: Vec<_> = r.violations().iter().map(|c| c.name).collect();
    assert_eq!(names, vec!["Y2 tail light enough"]);

    assert!(validate_model(&mixture(0.5)).ok());
}

#[test]
fn validation_flags_each_condition() {
    let r = validate_model(&comonotone(2.0, 2.0, 2.0));
    assert!(!r.check("V lighter than Y").unwrap().holds);
    let r = validate_model(&mixture(1.0));
    assert!(!r.check("mixing probability inside (0, 1)").unwrap().holds);
    let m = BernoulliMixtureModel::new(0.5, 2.5, 2.0, 3.0, RLaw::UNIT).unwrap();
    assert!(
        !validate_model(&BivariateModel::Mixture(m))
            .check("index chain")
            .unwrap()
            .holds
    );
    // alpha + gamma > alpha0 cannot fail under the chain, so probe it on its own
    let m = BernoulliMixtureModel::new(0.5, 0.5, 4.0, 3.0, RLaw::UNIT).unwrap();
    assert!(validate_model(&BivariateModel::Mixture(m))
        .check("independent branch lighter jointly")
        .is_some_and(|c| !c.holds));
    // MES/MME premises: alpha0 < 1 + alpha*
    let r = validate_model(&comonotone(2.0, 1.4, 2.5));
    assert!(r.ok());
    assert!(!r.qualifies(results::MES_LIMIT));
}

#[test]
fn transform_qualifications() {
    let with_y2 = validate_model(&comonotone(2.0, 2.0, 2.5));
    assert!(!with_y2.qualifies(&results::transform_limit(Transform::SumWithSecond)));
    assert!(with_y2.qualifies(&results::transform_limit(Transform::MinSecond)));
    let heavier_y2 = validate_model(&comonotone(2.0, 1.8, 2.5));
    assert!(!heavier_y2.qualifies(&results::transform_limit(Transform::MinSecond)));
    let no_y2 =
        BivariateModel::Additive(AdditiveModel::new(pareto(2.0), None, pareto(2.5), VKind::Comonotone).unwrap());
    let r = validate_model(&no_y2);
    assert!(r.ok());
    assert!(r.qualifies(&results::transform_limit(Transform::SumWithSecond)));
    assert!(r.qualifies(&results::transform_limit(Transform::MaxFirst)));
    assert!(!r.qualifies(&results::transform_limit(Transform::SumWithFirst)));
}

#[test]
fn copula_model_checks() {
    let m = CopulaCoupledModel::new(SurvivalCopulaFamily::gaussian(0.5).unwrap(), pareto(2.0), pareto(2.0)).unwrap();
    assert_eq!(m.tau(), 1.0);
    assert_eq!(m.eta(), 1.0);
    let r = validate_model(&BivariateModel::CopulaCoupled(m));
    assert!(r.ok());
    assert!(r.qualifies(results::MME_LIMIT));
    assert!(!r.qualifies(results::MES_LIMIT));

    let m = CopulaCoupledModel::new(
        SurvivalCopulaFamily::Independence,
        Margin::scaled_pareto(2.0, 2.0).unwrap(),
        Margin::scaled_pareto(4.0, 8.0).unwrap(),
    )
    .unwrap();
    assert_eq!(m.tau(), 2.0);
    assert!((m.eta() - 2.0).abs() < 1e-15);
    assert!(CopulaCoupledModel::new(SurvivalCopulaFamily::Independence, pareto(3.0), pareto(2.0)).is_err());
}

#[test]
fn construction_errors() {
    assert!(BernoulliMixtureModel::new(1.2, 1.5, 2.0, 3.0, RLaw::UNIT).is_err());
    assert!(BernoulliMixtureModel::new(0.5, 1.5, 2.0, 3.0, RLaw::Deterministic { r1: 0.5, r2: 1.0 }).is_err());
    let bad = RLaw::Discrete {
        atoms: vec![RAtom {
            r1: 1.0,
            r2: 2.0,
            prob: 0.4,
        }],
    };
    assert!(bad.validate().is_err());
    let m = mixture(0.5);
    assert!(sample_model(&m, 0, 1).is_err());
}

#[test]
fn transform_examples() {
    assert_eq!(Transform::SumWithFirst.apply(3.0, 1.0), (4.0, 3.0));
    assert_eq!(Transform::SumWithSecond.apply(3.0, 1.0), (4.0, 1.0));
    assert_eq!(Transform::FirstWithSum.apply(3.0, 1.0), (3.0, 4.0));
    assert_eq!(Transform::MinSecond.apply(1.0, 3.0), (1.0, 1.0));
    assert_eq!(Transform::MaxFirst.apply(1.0, 3.0), (3.0, 3.0));
    assert_eq!(Transform::Swap.apply(1.0, 3.0), (3.0, 1.0));
    assert_eq!(
        apply_transform(&[(1.0, 3.0), (5.0, 2.0)], Transform::Identity),
        vec![(1.0, 3.0), (5.0, 2.0)]
    );
}

#[test]
fn discrete_law_frequencies() {
    let law = RLaw::Discrete {
        atoms: vec![
            RAtom {
                r1: 1.0,
                r2: 2.0,
                prob: 0.25,
            },
            RAtom {
                r1: 3.0,
                r2: 1.0,
                prob: 0.75,
            },
        ],
    };
    law.validate().unwrap();
    let mut rng = crate::rng::stream(4);
    let n = 100_000;
    let hits = (0..n).filter(|_| law.draw(&mut rng) == (1.0, 2.0)).count() as f64 / n as f64;
    let se = (0.25f64 * 0.75 / n as f64).sqrt();
    assert!((hits - 0.25).abs() < 3.0 * se);
    assert!((law.expect(|a, b| a + b) - (0.25 * 3.0 + 0.75 * 4.0)).abs() < 1e-15);
}

#[test]
fn additive_marginal_tail() {
    let model = comonotone(2.0, 2.0, 2.5);
    let n = 1_000_000;
    let z = sample_model(&model, n, 11).unwrap();
    let p_hat = z.iter().filter(|p| p.0 > 100.0).count() as f64 / n as f64;
    // Exact P(Y1 + W > 100) * 100^2 from an independent high-precision quadrature.
    let exact = 1.140_174_097_607_112_8;
    let q = model.joint_survival(100.0, f64::NEG_INFINITY).unwrap() * 1e4;
    assert!((q - exact).abs() < 1e-8 * exact, "{q}");
    let se = (exact * 1e-4 / n as f64).sqrt() * 1e4;
    assert!((p_hat * 1e4 - exact).abs() < 3.0 * se, "{} vs {exact}", p_hat * 1e4);
    // Y1 dominates: t^2 P(Z1 > t) -> 1.
    let far = model.joint_survival(1e4, f64::NEG_INFINITY).unwrap() * 1e8;
    assert!((far - 1.0).abs() < 0.1, "{far}");
}

#[test]
fn additive_joint_survival_matches_sampling() {
    let law = RLaw::Discrete {
        atoms: vec![
            RAtom {
                r1: 1.0,
                r2: 2.0,
                prob: 0.5,
            },
            RAtom {
                r1: 1.5,
                r2: 1.0,
                prob: 0.5,
            },
        ],
    };
    let model = BivariateModel::Additive(
        AdditiveModel::new(pareto(2.0), Some(pareto(2.2)), pareto(2.5), VKind::Multiplicative(law)).unwrap(),
    );
    let n = 1_000_000;
    let z = sample_model(&model, n, 12).unwrap();
    for (a, b) in [(3.0, 3.0), (5.0, 2.0), (2.5, 8.0)] {
        let exact = model.joint_survival(a, b).unwrap();
        let hat = z.iter().filter(|p| p.0 > a && p.1 > b).count() as f64 / n as f64;
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((hat - exact).abs() < 3.5 * se, "({a},{b}): {hat} vs {exact}");
    }
}

#[test]
fn mixture_q_one_is_independent_branch() {
    let z = sample_model(&mixture(1.0), 1_000_000, 13).unwrap();
    let t: f64 = 2.0;
    let exact = t.powf(-4.5);
    let hat = z.iter().filter(|p| p.0 > t && p.1 > t).count() as f64 / z.len() as f64;
    let se = (exact / z.len() as f64).sqrt();
    assert!((hat * t.powf(4.5) - 1.0).abs() < 3.0 * se * t.powf(4.5));
    assert!((mixture(1.0).joint_survival(t, t).unwrap() * t.powf(4.5) - 1.0).abs() < 1e-14);
}

#[test]
fn mixture_marginal_tail() {
    let model = mixture(0.5);
    let z = sample_model(&model, 10_000_000, 14).unwrap();
    let z1: Vec<f64> = z.iter().map(|p| p.0).collect();
    let t = crate::estimators::empirical_var(&z1, 1e-3).unwrap();
    let tail = z1.iter().filter(|&&x| x > t).count() as f64 / z1.len() as f64;
    // P(Z1 > t) = 0.5 t^-1.5 + 0.5 t^-2, so the scaled tail carries a factor 1 + t^-1/2.
    let exact = t.powf(1.5) * model.joint_survival(t, f64::NEG_INFINITY).unwrap();
    assert!((exact - 0.5 * (1.0 + t.powf(-0.5))).abs() < 1e-12);
    let se = t.powf(1.5) * (tail / z1.len() as f64).sqrt();
    assert!(
        (t.powf(1.5) * tail - exact).abs() < 3.0 * se,
        "{} vs {exact}",
        t.powf(1.5) * tail
    );
    let far = 1e6f64;
    let limit = far.powf(1.5) * model.joint_survival(far, f64::NEG_INFINITY).unwrap();
    assert!((limit - 0.5).abs() < 0.05 * 0.5, "{limit}");
}

#[test]
fn independence_copula_model_corner() {
    let model = BivariateModel::independent_pareto(pareto(2.0), pareto(2.0)).unwrap();
    let z = sample_model(&model, 1_000_000, 15).unwrap();
    let c = empirical_survival_copula(&z, 0.1, 0.1).unwrap();
    assert!((c - 0.01).abs() < 0.002, "{c}");
}

#[test]
fn min_of_independent_pareto_has_summed_index() {
    let model = BivariateModel::independent_pareto(pareto(2.0), pareto(3.0)).unwrap();
    let z = sample_model(&model, 1_000_000, 16).unwrap();
    let mins: Vec<f64> = z.iter().map(|p| p.0.min(p.1)).collect();
    let est = hill_estimate(&mins, default_hill_k(mins.len())).unwrap();
    assert!((est.xi_hat - 0.2).abs() < 0.15 * 0.2, "{}", est.xi_hat);
}

#[test]
fn tail_independent_models_shrink_along_diagonal() {
    let models = [
        comonotone(2.0, 2.0, 2.5),
        mixture(0.5),
        BivariateModel::CopulaCoupled(
            CopulaCoupledModel::new(SurvivalCopulaFamily::gaussian(0.5).unwrap(), pareto(2.0), pareto(2.0)).unwrap(),
        ),
        BivariateModel::independent_pareto(pareto(2.0), pareto(2.0)).unwrap(),
    ];
    for (i, model) in models.iter().enumerate() {
        let z = sample_model(model, 10_000_000, 100 + i as u64).unwrap();
        let sample = crate::estimators::RankedSample::new(&z).unwrap();
        let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&p| sample.survival_copula(p, p).unwrap() / p)
            .collect();
        assert!(ratios[0] > ratios[1] && ratios[1] > ratios[2], "{model}: {ratios:?}");
    }
}

#[test]
fn transforming_samples_matches_transformed_sampling() {
    let law = RLaw::Deterministic { r1: 1.0, r2: 2.0 };
    let model = BivariateModel::Additive(
        AdditiveModel::new(pareto(2.0), None, pareto(2.5), VKind::Multiplicative(law)).unwrap(),
    );
    let n = 100_000;
    // c(alpha) for alpha = 0.05 / 6 (Sidak over six coordinate checks), m = n
    let crit = (-(0.05f64 / 12.0).ln() / 2.0).sqrt() * (2.0 / n as f64).sqrt();
    for t in [Transform::SumWithSecond, Transform::MinSecond, Transform::MaxFirst] {
        let direct = apply_transform(&sample_model(&model, n, 21).unwrap(), t);
        let other = sample_transformed(&model, t, n, 22).unwrap();
        for coord in 0..2 {
            let pick = |v: &[(f64, f64)]| v.iter().map(|p| if coord == 0 { p.0 } else { p.1 }).collect::<Vec<_>>();
            let d = two_sample_ks(&mut pick(&direct), &mut pick(&other));
            assert!(d < crit, "{t:?} coord {coord}: {d} >= {crit}");
        }
    }
}

#[test]
fn sampling_is_deterministic() {
    let m = mixture(0.5);
    assert_eq!(
        sample_model(&m, 70_000, 5).unwrap(),
        sample_model(&m, 70_000, 5).unwrap()
    );
    assert_ne!(sample_model(&m, 10, 5).unwrap(), sample_model(&m, 10, 6).unwrap());
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn transforms_are_coordinatewise_maps(a in 0.0f64..1e6, b in 0.0f64..1e6) {
            let (s, t) = Transform::MinSecond.apply(a, b);
            prop_assert!(s == a && t <= a && t <= b);
            let (s, t) = Transform::MaxFirst.apply(a, b);
            prop_assert!(s >= a && s >= b && t == b);
            prop_assert_eq!(Transform::Swap.apply(b, a), (a, b));
        }

        #[test]
        fn mixture_survival_is_monotone(a in 1.0f64..100.0, b in 1.0f64..100.0, da in 0.0f64..10.0) {
            let m = BernoulliMixtureModel::new(0.3, 1.5, 2.0, 3.0, RLaw::UNIT).unwrap();
            prop_assert!(m.joint_survival(a + da, b) <= m.joint_survival(a, b));
        }
    }
}

#[test]
fn exact_conditional_means_of_independent_pairs() {
    let indep = BivariateModel::independent_pareto(pareto(2.0), pareto(2.0)).unwrap();
    for p in [1e-1, 1e-2, 1e-3] {
        let var = indep.exact_var_second(p).unwrap();
        assert!((var - p.powf(-0.5)).abs() < 1e-9 * var, "{var}");
        assert!((indep.exact_mes(p).unwrap() - 2.0).abs() < 1e-8);
        assert!((indep.exact_mme(p).unwrap() - p.sqrt()).abs() < 1e-8 * p.sqrt());
    }
    // q = 1: Z1 = X1 independent of Z2, so MES is the Pareto(1.5) mean.
    assert!((mixture(1.0).exact_mes(1e-3).unwrap() - 3.0).abs() < 1e-8);
}

#[test]
fn exact_conditional_means_match_sampling() {
    let n = 4_000_000;
    let p = 1e-2;
    for (name, model) in [("additive", comonotone(2.0, 2.0, 2.5)), ("mixture", mixture(0.5))] {
        let z = sample_model(&model, n, 21).unwrap();
        let mes = crate::estimators::empirical_mes(&z, p).unwrap();
        let exact = model.exact_mes(p).unwrap();
        assert!(
            (mes.value - exact).abs() < 3.0 * mes.standard_error,
            "{name}: {} vs {exact}",
            mes.value
        );
    }
}
