use proptest::prelude::*;
use wavelab_core::data::DataFamily;
use wavelab_core::mollify::{generalized_solution_check, mollify, MollifierParams};
use wavelab_core::{CoefficientField, Exec, ProblemSpec};

const N: usize = 600;

fn sample(f: &DataFamily, n: usize) -> Vec<f64> {
    f.sample(n)
}

fn l2(v: &[f64]) -> f64 {
    let dx = 1.0 / (v.len() - 1) as f64;
    (v.iter().map(|x| x * x).sum::<f64>() * dx).sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn level() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 4, 8, 16])
}

#[test]
fn distance_to_data_shrinks_with_level() {
    let families = [DataFamily::Step { edge: 0.5 }, DataFamily::hat(0.4), DataFamily::Sine { k: 1 }];
    let n = 2400;
    for f in &families {
        let v = sample(f, n);
        let d: Vec<f64> =
            [2, 4, 8, 16, 32].iter().map(|&l| l2(&diff(&mollify(&v, MollifierParams::new(l).unwrap()).unwrap(), &v))).collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{f:?}: {d:?}");
    }
}

#[test]
fn step_distance_decays_like_inverse_root_level() {
    let n = 4000;
    let v = sample(&DataFamily::Step { edge: 0.5 }, n);
    let scaled: Vec<f64> = [2u32, 4, 8, 16, 32, 64]
        .iter()
        .map(|&l| l2(&diff(&mollify(&v, MollifierParams::new(l).unwrap()).unwrap(), &v)) * (l as f64).sqrt())
        .collect();
    let c = scaled[0];
    assert!(scaled.iter().all(|s| *s <= 1.1 * c), "{scaled:?}");
}

#[test]
fn under_resolved_level_is_rejected() {
    let v = vec![1.0; 129];
    assert!(mollify(&v, MollifierParams::new(8).unwrap()).is_err());
    assert!(mollify(&v, MollifierParams::new(4).unwrap()).is_ok());
    assert!(MollifierParams::new(1).is_err());
}

fn table_spec() -> ProblemSpec {
    ProblemSpec::new(1.0, 0.5, CoefficientField::Constant(0.05), 3.0).unwrap()
}

#[test]
fn zero_data_has_zero_distances() {
    let zero = vec![0.0; 257];
    let t = generalized_solution_check(&table_spec(), &zero, &zero, &[2, 4, 8], Exec::Parallel).unwrap();
    for r in &t.rows {
        assert_eq!((r.sup_w_distance, r.sup_u_distance, r.data_l2_distance, r.w0_h1_distance), (0.0, 0.0, 0.0, 0.0));
    }
}

#[test]
fn distances_scale_with_the_data() {
    let w0 = sample(&DataFamily::hat(0.5), 256);
    let w1 = sample(&DataFamily::Step { edge: 0.3 }, 256);
    let twice = |v: &[f64]| v.iter().map(|x| 2.0 * x).collect::<Vec<_>>();
    let s = table_spec();
    let one = generalized_solution_check(&s, &w0, &w1, &[2, 4, 8], Exec::Parallel).unwrap();
    let two = generalized_solution_check(&s, &twice(&w0), &twice(&w1), &[2, 4, 8], Exec::Sequential).unwrap();
    for (a, b) in one.rows.iter().zip(&two.rows) {
        assert_eq!(b.sup_w_distance, 2.0 * a.sup_w_distance);
        assert_eq!(b.sup_u_distance, 2.0 * a.sup_u_distance);
        assert_eq!(b.data_l2_distance, 2.0 * a.data_l2_distance);
    }
    assert!(one.strictly_decreasing() && one.all_within_bound(), "{one:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn output_vanishes_near_the_ends(v in prop::collection::vec(-5.0f64..5.0, N + 1), l in level()) {
        let p = MollifierParams::new(l).unwrap();
        let out = mollify(&v, p).unwrap();
        let edge = p.cutoff_margin() - p.kernel_width();
        for (j, y) in out.iter().enumerate() {
            let x = j as f64 / N as f64;
            if x <= edge - 1e-12 || x >= 1.0 - edge + 1e-12 {
                prop_assert_eq!(*y, 0.0, "x = {}", x);
            }
        }
    }

    #[test]
    fn mollifier_is_linear(
        f in prop::collection::vec(-5.0f64..5.0, N + 1),
        g in prop::collection::vec(-5.0f64..5.0, N + 1),
        alpha in -3.0f64..3.0,
        l in level(),
    ) {
        let p = MollifierParams::new(l).unwrap();
        let mix: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + alpha * b).collect();
        let (mf, mg, mm) = (mollify(&f, p).unwrap(), mollify(&g, p).unwrap(), mollify(&mix, p).unwrap());
        for j in 0..=N {
            prop_assert!((mm[j] - mf[j] - alpha * mg[j]).abs() < 1e-12 * (1.0 + mm[j].abs()));
        }
    }

    #[test]
    fn mollifier_does_not_expand(v in prop::collection::vec(-5.0f64..5.0, N + 1), l in level()) {
        let out = mollify(&v, MollifierParams::new(l).unwrap()).unwrap();
        let sup = |x: &[f64]| x.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
        prop_assert!(sup(&out) <= sup(&v) * (1.0 + 1e-6));
        prop_assert!(l2(&out) <= l2(&v) * (1.0 + 1e-6));
    }
}
