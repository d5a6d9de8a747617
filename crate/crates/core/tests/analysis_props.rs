use std::f64::consts::PI;

use proptest::prelude::*;
use wavelab_core::analysis::{
    discrete_c2_norms, extinction_time, fit_decay_series, fit_growth_bound, fit_growth_series, gronwall_constant,
    smoothing_report, stability_index, FitKind, StabilityEstimate,
};
use wavelab_core::data::{DataFamily, DataSource};
use wavelab_core::{solver, CoefficientField, Exec, GridState, InitialData, ProblemSpec};

fn spec(p: f64, c: CoefficientField, horizon: f64) -> ProblemSpec {
    ProblemSpec::new(1.0, p, c, horizon).unwrap()
}

fn ensemble(n: usize, count: u64) -> Vec<InitialData> {
    (0..count).map(|s| DataSource::random(100 + s).initial_data(n, 1.0).unwrap()).collect()
}

#[test]
fn growth_envelope_for_unit_coefficient() {
    let s = spec(0.5, CoefficientField::Constant(1.0), 10.0);
    let d = DataSource::random(4).initial_data(64, 1.0).unwrap();
    let traj = solver::solve(&s, &d, 64, usize::MAX).unwrap();
    let fit = fit_growth_bound(&traj, d.wave_normalizer()).unwrap();
    let FitKind::Growth { a, m3 } = fit.kind else { panic!() };
    assert!(a.is_finite() && m3.is_finite() && m3 > 0.0);
    assert!(fit.envelope_holds(&traj.times(), &traj.w_l2(), d.wave_normalizer()));
}

#[test]
fn unperturbed_ensemble_is_superstable() {
    let est = stability_index(&spec(0.3, CoefficientField::Zero, 3.0), &ensemble(40, 5), &[1.0, 2.5, 3.0], 1e-13, Exec::Parallel)
        .unwrap();
    assert!(matches!(est[0].1, StabilityEstimate::Finite(_)));
    assert_eq!(est[1].1, StabilityEstimate::Extinct);
    assert_eq!(est[2].1, StabilityEstimate::Extinct);
    assert_eq!(est[2].1.value(), f64::NEG_INFINITY);
}

#[test]
fn small_perturbation_index_keeps_falling() {
    let c = CoefficientField::SeparableTrig { amplitude: 1e-2, x_freq: PI, t_freq: 1.0 };
    let ts = [3.0, 6.0, 10.0, 15.0, 20.0, 30.0];
    let est = stability_index(&spec(0.5, c, 30.0), &ensemble(50, 10), &ts, 1e-13, Exec::Parallel).unwrap();
    for w in est.windows(2) {
        assert!(w[1].1.value() < w[0].1.value() || w[1].1 == StabilityEstimate::Extinct, "{est:?}");
    }
}

#[test]
fn gronwall_constant_is_finite_under_perturbation() {
    let s = spec(0.5, CoefficientField::Constant(0.2), 12.0);
    let d = DataSource::random(6).initial_data(50, 1.0).unwrap();
    let traj = solver::solve(&s, &d, 50, usize::MAX).unwrap();
    let k = gronwall_constant(&traj, 0.2, 1.0).unwrap();
    assert!(k.is_finite() && k > 0.0, "K = {k}");
    assert_eq!(gronwall_constant(&traj, 0.0, 1.0), None);
}

#[test]
fn smoothing_report_validates_its_grid_list() {
    let s = spec(0.5, CoefficientField::Zero, 1.0);
    let src = DataSource::new(DataFamily::hat(0.5), DataFamily::Zero);
    assert!(smoothing_report(&s, &src, &[40, 60], &[0.5], Exec::Sequential).is_err());
    assert!(smoothing_report(&s, &src, &[40, 20], &[0.5], Exec::Sequential).is_err());
    assert!(smoothing_report(&s, &src, &[20, 40], &[1.5], Exec::Sequential).is_err());
}

#[test]
fn smoothing_report_detects_transported_kink() {
    let s = spec(0.5, CoefficientField::Zero, 3.0);
    let src = DataSource::new(DataFamily::hat(0.5), DataFamily::Zero);
    let r = smoothing_report(&s, &src, &[100, 200], &[0.2, 2.5], Exec::Parallel).unwrap();
    let kink = r.ratios[0][0][3].unwrap();
    assert!((kink - 0.5).abs() < 0.05, "ratio {kink}");
    // after extinction every norm is zero and no ratio is defined
    assert!(r.norms.iter().all(|per_t| per_t[1].0.iter().all(|v| *v == 0.0)));
    assert!(r.ratios[0][1].iter().all(Option::is_none));
}

fn polynomial_levels(n: usize, k: [f64; 6]) -> Vec<GridState> {
    let dt = 1.0 / n as f64;
    (7..12)
        .map(|s| {
            let t = s as f64 * dt;
            let w = (0..=n)
                .map(|j| {
                    let x = j as f64 / n as f64;
                    k[0] + k[1] * x + k[2] * t + k[3] * x * x + k[4] * x * t + k[5] * t * t
                })
                .collect();
            GridState::new(1.0, s, w, vec![0.0; n + 1]).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn c2_norms_exact_on_quadratics(k in prop::array::uniform6(-3.0f64..3.0)) {
        let n = 20;
        let levels = polynomial_levels(n, k);
        let got = discrete_c2_norms(&levels).unwrap();
        let mid = &levels[2];
        let t = mid.t();
        let interior = 1..n;
        let sup = |f: &dyn Fn(f64) -> f64| interior.clone().map(|j| f(j as f64 / n as f64).abs()).fold(0.0, f64::max);
        let expect = [
            sup(&|x| k[0] + k[1] * x + k[2] * t + k[3] * x * x + k[4] * x * t + k[5] * t * t),
            sup(&|x| k[1] + 2.0 * k[3] * x + k[4] * t),
            sup(&|x| k[2] + k[4] * x + 2.0 * k[5] * t),
            2.0 * k[3].abs(),
            k[4].abs(),
            2.0 * k[5].abs(),
        ];
        for (d, (g, e)) in got.0.iter().zip(expect).enumerate() {
            prop_assert!((g - e).abs() < 1e-9 * (1.0 + e), "order {d}: {g} vs {e}");
        }
    }

    #[test]
    fn decay_fit_recovers_exact_exponentials(gamma in -1.0f64..5.0, m in 0.01f64..100.0, norm in 0.1f64..10.0) {
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let v: Vec<f64> = t.iter().map(|t| m * norm * (-gamma * t).exp()).collect();
        let fit = fit_decay_series(&t, &v, (0.0, 10.0), 1e-300, norm).unwrap();
        let FitKind::Decay { gamma: g, m: mm } = fit.kind else { unreachable!() };
        prop_assert!((g - gamma).abs() < 1e-12 * (1.0 + gamma.abs()));
        prop_assert!((mm - m).abs() < 1e-10 * m);
    }

    #[test]
    fn growth_envelope_covers_every_sample(v in prop::collection::vec(0.0f64..10.0, 2..60), norm in 0.1f64..5.0) {
        let t: Vec<f64> = (0..v.len()).map(|i| i as f64 * 0.1).collect();
        let fit = fit_growth_series(&t, &v, norm).unwrap();
        prop_assert!(fit.envelope_holds(&t, &v, norm));
    }

    #[test]
    fn non_increasing_series_has_zero_rate(mut v in prop::collection::vec(0.01f64..10.0, 2..60)) {
        v.sort_by(|a, b| b.total_cmp(a));
        let t: Vec<f64> = (0..v.len()).map(|i| i as f64 * 0.1).collect();
        let fit = fit_growth_series(&t, &v, 2.0).unwrap();
        let FitKind::Growth { a, m3 } = fit.kind else { unreachable!() };
        prop_assert!((0.0..1e-12).contains(&a), "A = {a}");
        prop_assert!((m3 - v[0] / 2.0).abs() < 1e-12 * m3);
    }

    #[test]
    fn extinction_time_is_monotone_in_tolerance(seed in 0u64..200, e1 in -14.0f64..0.0, e2 in -14.0f64..0.0) {
        let s = spec(0.4, CoefficientField::Zero, 2.5);
        let traj = solver::solve(&s, &DataSource::random(seed).initial_data(32, 1.0).unwrap(), 32, usize::MAX).unwrap();
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let t_lo = extinction_time(&traj, 10f64.powf(lo)).unwrap();
        let t_hi = extinction_time(&traj, 10f64.powf(hi)).unwrap();
        prop_assert!(t_hi <= t_lo);
        prop_assert!(t_lo <= 2.0 + 1e-12);
    }
}
