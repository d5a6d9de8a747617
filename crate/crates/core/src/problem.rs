//! Problem description, first-order reduction of the initial data and the
//! `x -> 1 - x` mirror map between the two boundary orientations.

use crate::error::{check_finite, Error, Result};
use crate::field::CoefficientField;
use crate::norms;

/// Which end carries the reflecting condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `w(0,t) = p (w_t + a w_x)(0,t)`, `(w_t + a w_x)(1,t) = 0`.
    LeftSmoothing,
    /// `w(1,t) = q (w_t - a w_x)(1,t)`, `(w_t - a w_x)(0,t) = 0`; `p` holds `q`.
    RightSmoothing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub a: f64,
    pub p: f64,
    pub orientation: Orientation,
    /// Zero-order perturbation.
    pub c: CoefficientField,
    /// First-order coefficient acting on `u`; usually zero.
    pub a1: CoefficientField,
    pub horizon: f64,
}

impl ProblemSpec {
    /// Left-smoothing problem with `a1 = 0`.
    pub fn new(a: f64, p: f64, c: CoefficientField, horizon: f64) -> Result<Self> {
        let spec = ProblemSpec {
            a,
            p,
            orientation: Orientation::LeftSmoothing,
            c,
            a1: CoefficientField::Zero,
            horizon,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_a1(mut self, a1: CoefficientField) -> Result<Self> {
        self.a1 = a1;
        self.validate()?;
        Ok(self)
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::Spec(format!("wave speed a must be positive, got {}", self.a)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Spec(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !self.p.is_finite() {
            return Err(Error::Spec(format!("boundary parameter must be finite, got {}", self.p)));
        }
        self.c.validate()?;
        self.a1.validate()
    }

    /// Extinction time of the unperturbed problem.
    pub fn extinction_time(&self) -> f64 {
        2.0 / self.a
    }
}

/// Initial data in both forms: `(w0, w1)` for the wave equation and
/// `(phi1, phi2) = (w0, w1 + a w0')` for the first-order system.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    w0: Vec<f64>,
    w1: Vec<f64>,
    phi2: Vec<f64>,
    dx: f64,
}

/// Builds `phi2 = w1 + a D(w0)` with the second-order stencil of
/// [`norms::derivative`]. Samples live on `N+1` uniform nodes of `[0,1]`.
pub fn reduce_to_first_order(w0: &[f64], w1: &[f64], a: f64) -> Result<InitialData> {
    if w0.len() != w1.len() {
        return Err(Error::Spec(format!(
            "w0 has {} samples but w1 has {}",
            w0.len(),
            w1.len()
        )));
    }
    if w0.len() < 2 {
        return Err(Error::Spec("initial data needs at least 2 samples".into()));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Spec(format!("wave speed a must be positive, got {a}")));
    }
    check_finite(w0, "w0")?;
    check_finite(w1, "w1")?;
    let dx = 1.0 / (w0.len() - 1) as f64;
    let phi2 = norms::derivative(w0, dx)
        .iter()
        .zip(w1)
        .map(|(d, v)| v + a * d)
        .collect();
    Ok(InitialData { w0: w0.to_vec(), w1: w1.to_vec(), phi2, dx })
}

impl InitialData {
    pub fn w0(&self) -> &[f64] {
        &self.w0
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    /// Identical to `w0`.
    pub fn phi1(&self) -> &[f64] {
        &self.w0
    }

    pub fn phi2(&self) -> &[f64] {
        &self.phi2
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn n_cells(&self) -> usize {
        self.w0.len() - 1
    }

    /// `max(|w0|_{H^1}, |w1|_{L^2})`, the normalizer of the decay bound.
    pub fn wave_normalizer(&self) -> f64 {
        let h1 = norms::h1_norm(&self.w0, self.dx).expect("validated at construction");
        let l2 = norms::l2_norm(&self.w1, self.dx).expect("validated at construction");
        h1.max(l2)
    }

    /// `max(|phi1|_{L^2}, |phi2|_{L^2})`, the normalizer of the first-order
    /// growth bound.
    pub fn system_normalizer(&self) -> f64 {
        let a = norms::l2_norm(&self.w0, self.dx).expect("validated at construction");
        let b = norms::l2_norm(&self.phi2, self.dx).expect("validated at construction");
        a.max(b)
    }

    /// Data of the problem reflected by `x -> 1 - x`. The reduction is
    /// recomputed from the reflected `(w0, w1)` since `w0'` changes sign.
    pub fn reflected(&self, a: f64) -> Result<InitialData> {
        reduce_to_first_order(&reflect_samples(&self.w0), &reflect_samples(&self.w1), a)
    }

    /// `alpha * self + beta * other`, recomputing `phi2` through the reduction.
    pub fn combine(&self, alpha: f64, other: &InitialData, beta: f64, a: f64) -> Result<InitialData> {
        let mix = |x: &[f64], y: &[f64]| -> Vec<f64> {
            x.iter().zip(y).map(|(u, v)| alpha * u + beta * v).collect()
        };
        reduce_to_first_order(&mix(&self.w0, &other.w0), &mix(&self.w1, &other.w1), a)
    }
}

pub fn reflect_samples(f: &[f64]) -> Vec<f64> {
    f.iter().rev().copied().collect()
}

/// Maps a right-smoothing problem to the equivalent left-smoothing one by
/// `x -> 1 - x`: `p` takes the value of `q` and both coefficients are
/// reflected. Initial data must be reflected with [`InitialData::reflected`].
pub fn mirror_problem(spec: &ProblemSpec) -> Result<ProblemSpec> {
    if spec.orientation != Orientation::RightSmoothing {
        return Err(Error::Spec("mirror_problem expects a right-smoothing problem".into()));
    }
    Ok(ProblemSpec {
        orientation: Orientation::LeftSmoothing,
        c: spec.c.reflect(),
        a1: spec.a1.reflect(),
        ..spec.clone()
    })
}

/// Inverse of [`mirror_problem`].
pub fn unmirror_problem(spec: &ProblemSpec) -> Result<ProblemSpec> {
    if spec.orientation != Orientation::LeftSmoothing {
        return Err(Error::Spec("unmirror_problem expects a left-smoothing problem".into()));
    }
    Ok(ProblemSpec {
        orientation: Orientation::RightSmoothing,
        c: spec.c.reflect(),
        a1: spec.a1.reflect(),
        ..spec.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SampledGrid;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..=n).map(|j| f(j as f64 / n as f64)).collect()
    }

    #[test]
    fn zero_data_reduces_to_zero() {
        let d = reduce_to_first_order(&[0.0; 11], &[0.0; 11], 1.0).unwrap();
        assert!(d.phi1().iter().chain(d.phi2()).all(|v| *v == 0.0));
    }

    #[test]
    fn sine_reduction_matches_derivative() {
        let n = 200;
        let d = reduce_to_first_order(&grid(n, |x| (PI * x).sin()), &vec![0.0; n + 1], 1.0).unwrap();
        for (j, v) in d.phi2().iter().enumerate() {
            let x = j as f64 / n as f64;
            assert!((v - PI * (PI * x).cos()).abs() < 1e-3);
        }
        assert_eq!(d.phi1(), d.w0());
    }

    #[test]
    fn quadratic_reduction_is_exact() {
        let n = 100;
        let d = reduce_to_first_order(&grid(n, |x| x * (1.0 - x)), &vec![1.0; n + 1], 2.0).unwrap();
        for (j, v) in d.phi2().iter().enumerate() {
            let x = j as f64 / n as f64;
            assert!((v - (1.0 + 2.0 * (1.0 - 2.0 * x))).abs() < 1e-6);
        }
    }

    #[test]
    fn reduction_errors() {
        assert!(matches!(reduce_to_first_order(&[0.0; 3], &[0.0; 4], 1.0), Err(Error::Spec(_))));
        assert!(matches!(
            reduce_to_first_order(&[0.0, f64::NAN, 0.0], &[0.0; 3], 1.0),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn mirror_examples() {
        let right = ProblemSpec::new(1.0, 0.5, CoefficientField::Zero, 1.0)
            .unwrap()
            .with_orientation(Orientation::RightSmoothing);
        let left = mirror_problem(&right).unwrap();
        assert_eq!(left.orientation, Orientation::LeftSmoothing);
        assert_eq!(left.p, 0.5);
        assert_eq!(left.c, CoefficientField::Zero);
        assert!(matches!(mirror_problem(&left), Err(Error::Spec(_))));

        // c(x,t) = x as a two-node grid becomes 1 - x
        let cx = CoefficientField::SampledGrid(SampledGrid::new(1.0, vec![vec![0.0, 1.0]]).unwrap());
        let right = ProblemSpec { p: 1.0, c: cx.clone(), ..right };
        let left = mirror_problem(&right).unwrap();
        assert_eq!(left.p, 1.0);
        for x in [0.0, 0.25, 0.8, 1.0] {
            assert_eq!(left.c.eval(x, 0.3), 1.0 - x);
        }
        assert_eq!(unmirror_problem(&left).unwrap(), right);
    }

    #[test]
    fn mirror_round_trip_keeps_parameters() {
        let right = ProblemSpec::new(
            2.0,
            -0.3,
            CoefficientField::SeparableTrig { amplitude: 0.1, x_freq: PI, t_freq: 1.0 },
            3.0,
        )
        .unwrap()
        .with_a1(CoefficientField::GaussianBump { amplitude: 0.4, center: 0.3, width: 0.1, t_freq: 0.0 })
        .unwrap()
        .with_orientation(Orientation::RightSmoothing);
        let back = unmirror_problem(&mirror_problem(&right).unwrap()).unwrap();
        assert_eq!(back, right);
    }

    proptest! {
        #[test]
        fn reduction_is_linear(
            w0 in prop::collection::vec(-5.0f64..5.0, 12),
            w1 in prop::collection::vec(-5.0f64..5.0, 12),
            v0 in prop::collection::vec(-5.0f64..5.0, 12),
            v1 in prop::collection::vec(-5.0f64..5.0, 12),
        ) {
            // dyadic-valued samples keep every operation exact
            let q = |v: &Vec<f64>| -> Vec<f64> { v.iter().map(|x| (x * 64.0).round() / 64.0).collect() };
            let (w0, w1, v0, v1) = (q(&w0), q(&w1), q(&v0), q(&v1));
            let s0: Vec<f64> = w0.iter().zip(&v0).map(|(a, b)| a + b).collect();
            let s1: Vec<f64> = w1.iter().zip(&v1).map(|(a, b)| a + b).collect();
            let a = reduce_to_first_order(&w0, &w1, 1.0).unwrap();
            let b = reduce_to_first_order(&v0, &v1, 1.0).unwrap();
            let s = reduce_to_first_order(&s0, &s1, 1.0).unwrap();
            for j in 0..12 {
                prop_assert!((s.phi2()[j] - (a.phi2()[j] + b.phi2()[j])).abs() <= 1e-12 * (1.0 + s.phi2()[j].abs()));
            }
        }
    }
}
