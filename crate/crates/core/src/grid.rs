//! Discrete state of the characteristic pair and recorded trajectories.

use crate::error::{Error, Result};
use crate::norms;

/// One time level of `(w, u)` on `N + 1` nodes with `dt = dx / a`.
///
/// Time is stored as a step index so that recorded times are exact
/// multiples of `dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    pub(crate) a: f64,
    pub(crate) step: usize,
    pub(crate) w: Vec<f64>,
    pub(crate) u: Vec<f64>,
}

impl GridState {
    pub fn new(a: f64, step: usize, w: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if w.len() != u.len() || w.len() < 5 {
            return Err(Error::Spec(format!(
                "grid state needs N >= 4 cells and matching w/u lengths, got {} and {}",
                w.len(),
                u.len()
            )));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Spec(format!("wave speed a must be positive, got {a}")));
        }
        crate::error::check_finite(&w, "w")?;
        crate::error::check_finite(&u, "u")?;
        Ok(GridState { a, step, w, u })
    }

    pub fn n_cells(&self) -> usize {
        self.w.len() - 1
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n_cells() as f64
    }

    pub fn dt(&self) -> f64 {
        self.dx() / self.a
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn t(&self) -> f64 {
        self.step as f64 * self.dt()
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.n_cells() as f64
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn norms(&self) -> NormRecord {
        let dx = self.dx();
        NormRecord {
            step: self.step,
            t: self.t(),
            w_l2: norms::l2_unchecked(&self.w, dx),
            u_l2: norms::l2_unchecked(&self.u, dx),
            w_sup: norms::sup_unchecked(&self.w),
            u_sup: norms::sup_unchecked(&self.u),
        }
    }

    /// The state mirrored by `x -> 1 - x`.
    pub fn reflected(&self) -> GridState {
        GridState {
            a: self.a,
            step: self.step,
            w: self.w.iter().rev().copied().collect(),
            u: self.u.iter().rev().copied().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormRecord {
    pub step: usize,
    pub t: f64,
    pub w_l2: f64,
    pub u_l2: f64,
    pub w_sup: f64,
    pub u_sup: f64,
}

impl NormRecord {
    /// Largest of the four recorded norms.
    pub fn max_norm(&self) -> f64 {
        self.w_l2.max(self.u_l2).max(self.w_sup).max(self.u_sup)
    }
}

/// Norms at every step plus a (possibly thinned) set of full states.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub(crate) dt: f64,
    pub(crate) states: Vec<GridState>,
    pub(crate) norms: Vec<NormRecord>,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn states(&self) -> &[GridState] {
        &self.states
    }

    pub fn norms(&self) -> &[NormRecord] {
        &self.norms
    }

    pub fn final_state(&self) -> &GridState {
        self.states.last().expect("trajectory always keeps its final state")
    }

    pub fn state_at_step(&self, step: usize) -> Option<&GridState> {
        self.states
            .binary_search_by_key(&step, |s| s.step)
            .ok()
            .map(|i| &self.states[i])
    }

    /// Recorded state whose time is closest to `t`.
    pub fn state_near(&self, t: f64) -> Option<&GridState> {
        self.states.iter().min_by(|a, b| {
            (a.t() - t).abs().total_cmp(&(b.t() - t).abs())
        })
    }

    pub fn times(&self) -> Vec<f64> {
        self.norms.iter().map(|r| r.t).collect()
    }

    /// `W(t) = |w(., t)|_{L^2}` at every step.
    pub fn w_l2(&self) -> Vec<f64> {
        self.norms.iter().map(|r| r.w_l2).collect()
    }

    /// `max(W(t), U(t))` at every step.
    pub fn wu_l2(&self) -> Vec<f64> {
        self.norms.iter().map(|r| r.w_l2.max(r.u_l2)).collect()
    }

    /// Trajectory of the mirrored problem mapped back to original coordinates.
    pub fn reflected(&self) -> Trajectory {
        Trajectory {
            dt: self.dt,
            states: self.states.iter().map(GridState::reflected).collect(),
            norms: self.norms.clone(),
        }
    }
}
