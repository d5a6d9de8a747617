//! Manufactured solution `w = e^{-t} sin(pi x)` with `u = w_t + a w_x`.
//!
//! The pair violates the homogeneous boundary conditions, so the forcing
//! carries boundary inhomogeneities as well as interior sources.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result;
use crate::grid::GridState;
use crate::norms;
use crate::problem::{reduce_to_first_order, InitialData, ProblemSpec};
use crate::solver::Forcing;

#[derive(Clone, Copy, Debug)]
pub struct DecayingSine {
    pub a: f64,
}

impl DecayingSine {
    pub fn w(&self, x: f64, t: f64) -> f64 {
        (-t).exp() * (PI * x).sin()
    }

    pub fn u(&self, x: f64, t: f64) -> f64 {
        (-t).exp() * (-(PI * x).sin() + self.a * PI * (PI * x).cos())
    }

    fn u_x(&self, x: f64, t: f64) -> f64 {
        (-t).exp() * (-PI * (PI * x).cos() - self.a * PI * PI * (PI * x).sin())
    }

    /// Sources and boundary data that make `(w, u)` an exact solution of the
    /// forced system for the given coefficients.
    pub fn forcing(&self, spec: &ProblemSpec) -> Forcing {
        let me = *self;
        let c = spec.c.clone();
        let a1 = spec.a1.clone();
        let a = spec.a;
        let p = spec.p;
        Forcing {
            // u is exactly w_t + a w_x
            f_w: Arc::new(|_, _| 0.0),
            f_u: Arc::new(move |x, t| {
                let u = me.u(x, t);
                -u - a * me.u_x(x, t) + a1.eval(x, t) * u + c.eval(x, t) * me.w(x, t)
            }),
            left: Arc::new(move |t| me.w(0.0, t) - p * me.u(0.0, t)),
            right: Arc::new(move |t| me.u(1.0, t)),
        }
    }

    /// `w0 = sin(pi x)`, `w1 = -sin(pi x)`.
    pub fn initial_data(&self, n: usize) -> Result<InitialData> {
        let w0: Vec<f64> = (0..=n).map(|j| self.w(j as f64 / n as f64, 0.0)).collect();
        let w1: Vec<f64> = w0.iter().map(|v| -v).collect();
        reduce_to_first_order(&w0, &w1, self.a)
    }

    /// `|w_h(., t) - w(., t)|_{L^2}` for a computed state.
    pub fn w_error(&self, state: &GridState) -> f64 {
        let t = state.t();
        let e: Vec<f64> = state
            .w()
            .iter()
            .enumerate()
            .map(|(j, v)| v - self.w(state.x(j), t))
            .collect();
        norms::l2_unchecked(&e, state.dx())
    }
}
