use abatement::analytic::{sigma_start, AnalyticScenario};
use abatement::cost_models::{
    average_cost, damage_fraction, damage_fraction_dm, marginal_cost, AbatementCostCurve,
    DamageModel, DamageVariant, LearningModel, DEFAULT_ALPHA,
};
use abatement::economy::{bau_cumulative, integrated_rate, Baseline, GrowthSchedule};
use abatement::pathway_solver::{carbon_tax_path, solve_bvp, ModelSet, SolverConfig};
use proptest::prelude::*;

fn curve() -> impl Strategy<Value = AbatementCostCurve> {
    (0.0..0.05f64, 0.2..1.0f64, 1.1..3.0f64)
        .prop_map(|(c0, mac, c2)| AbatementCostCurve::from_max_marginal(c0, mac, c2))
}

fn schedule() -> impl Strategy<Value = GrowthSchedule> {
    prop_oneof![
        (-0.02..0.06f64).prop_map(GrowthSchedule::constant),
        (0.0..0.06f64, 5.0..100.0f64)
            .prop_map(|(r, tau)| GrowthSchedule::exponential_decay(r, tau)),
    ]
}

proptest! {
    #[test]
    fn additive_learning_shifts_cost(
        curve in curve(),
        sigma in 0.0..1.5f64,
        m in 0.0..8000.0f64,
        c_f in 0.0..1e-4f64,
    ) {
        let m_max = 40.0;
        let base = average_cost(&curve, &LearningModel::None, sigma * m_max, m_max, m).unwrap();
        let shifted =
            average_cost(&curve, &LearningModel::Additive { c_f }, sigma * m_max, m_max, m).unwrap();
        prop_assert!((base - c_f * m - shifted).abs() <= 1e-12 * (1.0 + base.abs()));
    }

    #[test]
    fn multiplicative_learning_scales_cost(
        curve in curve(),
        sigma in 0.0..1.5f64,
        m in 1.0..8000.0f64,
        m_h in 100.0..10000.0f64,
        b in 0.05..0.6f64,
    ) {
        let m_max = 40.0;
        let v = sigma * m_max;
        let base = marginal_cost(&curve, &LearningModel::None, v, m_max, m).unwrap();
        let exp = marginal_cost(&curve, &LearningModel::Exponential { m_h }, v, m_max, m).unwrap();
        let pow = marginal_cost(&curve, &LearningModel::PowerLaw { b, m0: 1.0 }, v, m_max, m).unwrap();
        prop_assert!((exp - base * (-m / m_h).exp()).abs() <= 1e-12 * base.abs().max(1e-300));
        prop_assert!((pow - base * m.powf(-b)).abs() <= 1e-12 * base.abs().max(1e-300));
    }

    #[test]
    fn marginal_cost_is_derivative_of_total(
        curve in curve(),
        sigma in 0.05..1.5f64,
        m in 1.0..5000.0f64,
        learn_ix in 0usize..4,
    ) {
        let learn = [
            LearningModel::None,
            LearningModel::Additive { c_f: 1e-5 },
            LearningModel::Exponential { m_h: 2000.0 },
            LearningModel::PowerLaw { b: 0.322, m0: 1.0 },
        ][learn_ix];
        let m_max = 40.0;
        let v = sigma * m_max;
        let total = |x: f64| average_cost(&curve, &learn, x, m_max, m).unwrap() * x;
        let h = 1e-4 * v;
        let fd = (-total(v + 2.0 * h) + 8.0 * total(v + h) - 8.0 * total(v - h) + total(v - 2.0 * h))
            / (12.0 * h);
        let mac = marginal_cost(&curve, &learn, v, m_max, m).unwrap();
        prop_assert!((fd - mac).abs() <= 1e-7 * mac.abs().max(1e-6));
    }

    #[test]
    fn integrated_rate_differentiates_to_rate(g in schedule(), t in 0.01..150.0f64) {
        let h = 1e-3 * t.min(1.0);
        let fd = (integrated_rate(&g, t + h).unwrap() - integrated_rate(&g, t - h).unwrap()) / (2.0 * h);
        prop_assert!((fd - g.rate(t)).abs() < 1e-8);
        prop_assert_eq!(integrated_rate(&g, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn damage_derivative_matches_difference(
        warming in 0.5..6.0f64,
        d0 in 0.1..2.0f64,
        d1 in 1.0..3.0f64,
        d2 in 1e-3..0.1f64,
        e_d in 500.0..5000.0f64,
    ) {
        let e = warming / DEFAULT_ALPHA;
        for (variant, scale) in [
            (DamageVariant::PowerLaw { d0, d1, t0: 10.0 }, e),
            (DamageVariant::Logistic { d2, e_d }, e_d),
        ] {
            let dm = DamageModel { variant, alpha: DEFAULT_ALPHA };
            let h = 1e-4 * scale;
            let fd = (damage_fraction(&dm, e + h).unwrap() - damage_fraction(&dm, e - h).unwrap())
                / (2.0 * h);
            let d_m = damage_fraction_dm(&dm, e).unwrap();
            prop_assert!(d_m <= 0.0);
            prop_assert!((d_m + fd).abs() <= 1e-6 * fd.abs() + 1e-13);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solved_pathways_keep_their_books(
        m_tot in 200.0..5000.0f64,
        start in 0.0..30.0f64,
        learn_ix in 0usize..3,
        interest in 0.01..0.05f64,
    ) {
        let learning = [
            LearningModel::None,
            LearningModel::Additive { c_f: 1e-5 },
            LearningModel::Exponential { m_h: 2000.0 },
        ][learn_ix];
        let models = ModelSet {
            learning,
            interest: GrowthSchedule::constant(interest),
            ..ModelSet::default()
        };
        let cfg = SolverConfig::default();
        let path = solve_bvp(m_tot, start, &models, &cfg).unwrap();
        let alpha = models.damage.alpha;
        prop_assert!((path.terminal_abatement() - m_tot).abs() <= cfg.shoot_tol);
        for k in 0..path.len() {
            let t = path.grid[k];
            prop_assert_eq!(path.emissions[k], path.bau_rate[k] - path.abatement_rate[k]);
            prop_assert!((path.warming[k] - alpha * path.cum_emissions[k]).abs() <= 1e-12 * path.warming[k].abs());
            let bau = bau_cumulative(&models.econ, &models.growth, t, Baseline::FromPreindustrial).unwrap();
            let e = bau - path.cum_abatement[k];
            prop_assert!((path.cum_emissions[k] - e).abs() <= 1e-8 * e.abs());
            prop_assert!(path.abatement_rate[k] >= 0.0);
            if k < path.start_index {
                prop_assert_eq!(path.cum_abatement[k], 0.0);
                prop_assert_eq!(path.tax[k], 0.0);
            }
        }
        // Trapezoid of the rate reproduces cumulative abatement to O(dt^2).
        let act = path.active();
        let h = path.active_step();
        let mut m = path.cum_abatement[act.start];
        for k in act.start + 1..act.end {
            m += 0.5 * h * (path.abatement_rate[k - 1] + path.abatement_rate[k]);
            prop_assert!((m - path.cum_abatement[k]).abs() <= 1e-4 * m_tot);
        }
        let tax = carbon_tax_path(&path, &models).unwrap();
        prop_assert!(tax.consistent(1e-3));
    }

    #[test]
    fn solver_matches_closed_form_sigma(
        m_tot in 300.0..6000.0f64,
        start in 0.0..40.0f64,
        g in schedule(),
        interest in 0.005..0.06f64,
    ) {
        let models = ModelSet {
            growth: g,
            interest: GrowthSchedule::constant(interest),
            ..ModelSet::default()
        };
        let path = solve_bvp(m_tot, start, &models, &SolverConfig::default()).unwrap();
        let s = AnalyticScenario::from_models(&models, m_tot, start).unwrap();
        let exact = sigma_start(&s).unwrap();
        prop_assert!((path.initial_sigma() - exact).abs() <= 1e-4 * exact);
        // sigma grows at i / c2 along the whole path.
        let act = path.active();
        let c2 = models.curve.c2;
        for k in act.clone() {
            let t = path.grid[k];
            let expect = exact * (interest * (t - start) / c2).exp();
            prop_assert!((path.sigma[k] - expect).abs() <= 1e-4 * expect);
        }
    }
}
