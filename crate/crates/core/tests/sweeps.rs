use abatement::analytic::{delay_cost_growth, AnalyticScenario};
use abatement::scenario::{render_sweep, SweepParam, SweepSpec};

fn grid(text: &str) -> Vec<(f64, f64, f64)> {
    let spec = SweepSpec::from_toml(text).unwrap();
    let (_, cells) = render_sweep(&spec).unwrap();
    cells
        .into_iter()
        .map(|c| (c.axis1, c.axis2.unwrap(), *c.value.as_ref().unwrap()))
        .collect()
}

fn at(g: &[(f64, f64, f64)], a: f64, b: f64) -> f64 {
    g.iter().find(|c| c.0 == a && c.1 == b).unwrap().2
}

#[test]
fn delay_cost_growth_rises_with_delay_and_falls_with_interest() {
    let g = grid(
        r#"
response = "delay_cost_growth"
axis1 = { param = "start_year", start = 0.0, stop = 60.0, step = 10.0 }
axis2 = { param = "interest_rate", start = 0.01, stop = 0.05, step = 0.01 }
fixed = { m_tot = 3000.0 }

[growth]
kind = "constant"
base_rate = 0.02
"#,
    );
    let ns: Vec<f64> = (0..=6).map(|k| 10.0 * k as f64).collect();
    let is = [0.01, 0.02, 0.03, 0.04, 0.05];
    for &i in &is {
        for w in ns.windows(2) {
            assert!(at(&g, w[1], i) > at(&g, w[0], i), "N {} i {i}", w[1]);
        }
    }
    for &n in &ns {
        for w in is.windows(2) {
            assert!(at(&g, n, w[0]) > at(&g, n, w[1]), "N {n} i {}", w[0]);
        }
    }
}

#[test]
fn overshoot_threshold_rises_with_delay_and_growth() {
    for (i, label) in [(0.01, "low"), (0.03, "high")] {
        let g = grid(&format!(
            r#"
response = "overshoot_threshold"
axis1 = {{ param = "start_year", start = 0.0, stop = 40.0, step = 5.0 }}
axis2 = {{ param = "growth_rate", start = 0.01, stop = 0.04, step = 0.01 }}
fixed = {{ interest_rate = {i} }}

[growth]
kind = "constant"
base_rate = 0.02
"#
        ));
        let ns: Vec<f64> = (0..=8).map(|k| 5.0 * k as f64).collect();
        let rs = [0.01, 0.02, 0.03, 0.04];
        for &r in &rs {
            for w in ns.windows(3) {
                let (a, b, c) = (at(&g, w[0], r), at(&g, w[1], r), at(&g, w[2], r));
                assert!(b > a && c - b > b - a, "{label}: N {} r {r}", w[1]);
            }
        }
        for &n in &ns {
            for w in rs.windows(2) {
                assert!(
                    at(&g, n, w[1]) > at(&g, n, w[0]),
                    "{label}: N {n} r {}",
                    w[1]
                );
            }
        }
    }
    let lower = |i: f64| {
        grid(&format!(
            r#"
response = "overshoot_threshold"
axis1 = {{ param = "start_year", start = 20.0, stop = 20.0, step = 0.0 }}
axis2 = {{ param = "growth_rate", start = 0.02, stop = 0.02, step = 0.0 }}
fixed = {{ interest_rate = {i} }}
"#
        ))[0]
            .2
    };
    assert!(lower(0.01) < lower(0.03));
}

#[test]
fn single_cell_sweep_equals_direct_call() {
    let spec = SweepSpec::from_toml(
        r#"
response = "delay_cost_growth"
axis1 = { param = "start_year", start = 15.0, stop = 15.0, step = 0.0 }
fixed = { m_tot = 2500.0 }
"#,
    )
    .unwrap();
    let (csv, cells) = render_sweep(&spec).unwrap();
    assert_eq!(cells.len(), 1);
    let models = spec.models_at(&[(SweepParam::StartYear, 15.0)]).unwrap();
    let s = AnalyticScenario::from_models(&models, 2500.0, 15.0).unwrap();
    let direct = delay_cost_growth(&s).unwrap();
    assert_eq!(cells[0].value.as_ref().unwrap().to_bits(), direct.to_bits());
    assert!(csv.contains("start_year,delay_cost_growth,status\n"));
    assert_eq!(
        csv.lines().filter(|l| !l.starts_with('#')).count(),
        2,
        "{csv}"
    );
}

#[test]
fn tax_growth_sweep_solves_each_cell() {
    let spec = SweepSpec::from_toml(
        r#"
response = "tax_growth"
axis1 = { param = "m_h", start = 1000.0, stop = 3000.0, step = 1000.0 }
fixed = { m_tot = 3000.0 }
learning = { variant = "exponential", m_h = 2000.0 }
"#,
    )
    .unwrap();
    let (_, cells) = render_sweep(&spec).unwrap();
    let g: Vec<f64> = cells.iter().map(|c| *c.value.as_ref().unwrap()).collect();
    // Faster learning (smaller M_h) slows tax growth further below i.
    assert!(g[0] < g[1] && g[1] < g[2] && g[2] < 0.03, "{g:?}");
}

#[test]
fn tax_growth_falls_with_damages_and_learning() {
    let spec = SweepSpec::from_toml(
        r#"
response = "tax_growth"
axis1 = { param = "damage_at_2p5k", start = 0.0, stop = 0.03, step = 0.01 }
axis2 = { param = "m_h", start = 3000.0, stop = 7000.0, step = 2000.0 }
fixed = { m_tot = 3000.0 }
learning = { variant = "exponential", m_h = 2000.0 }
damage = { variant = "power-law", d0 = 0.8, d1 = 2.0 }
"#,
    )
    .unwrap();
    let (csv, cells) = render_sweep(&spec).unwrap();
    let g: Vec<(f64, f64, f64)> = cells
        .iter()
        .map(|c| (c.axis1, c.axis2.unwrap(), *c.value.as_ref().unwrap()))
        .collect();
    assert!(g.iter().all(|c| c.2 < 0.03));
    let ds = [0.0, 0.01, 0.02, 0.03];
    let mhs = [3000.0, 5000.0, 7000.0];
    for &m_h in &mhs {
        for w in ds.windows(2) {
            assert!(
                at(&g, w[1], m_h) < at(&g, w[0], m_h),
                "d {} M_h {m_h}",
                w[1]
            );
        }
    }
    for &d in &ds {
        for w in mhs.windows(2) {
            assert!(at(&g, d, w[0]) < at(&g, d, w[1]), "d {d} M_h {}", w[0]);
        }
    }
    assert!(csv.contains("damage_at_2p5k,m_h,tax_growth,status\n"));

    let models = spec.models_at(&[(SweepParam::DamageAt2p5K, 0.05)]).unwrap();
    let d =
        abatement::cost_models::damage_fraction(&models.damage, 2.5 / models.damage.alpha).unwrap();
    assert!((d - 0.05).abs() < 1e-12);
    let off = spec.models_at(&[(SweepParam::DamageAt2p5K, 0.0)]).unwrap();
    assert!(!off.damage.is_active());
}

#[test]
fn cells_without_an_interior_pathway_are_reported() {
    // Fast learning plus strong damages: every surviving trajectory overshoots.
    let spec = SweepSpec::from_toml(
        r#"
response = "tax_growth"
axis1 = { param = "m_h", start = 1000.0, stop = 3000.0, step = 2000.0 }
fixed = { m_tot = 3000.0, damage_at_2p5k = 0.03 }
learning = { variant = "exponential", m_h = 2000.0 }
damage = { variant = "power-law", d0 = 0.8, d1 = 2.0 }
"#,
    )
    .unwrap();
    let (csv, cells) = render_sweep(&spec).unwrap();
    let err = cells[0].value.as_ref().unwrap_err().to_string();
    assert!(
        err.contains("infeasible") && err.contains("overshoots"),
        "{err}"
    );
    assert!(cells[1].value.is_ok());
    assert!(csv.contains("1000,,error: infeasible"), "{csv}");
}
