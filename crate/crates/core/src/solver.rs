//! Characteristic-aligned marching of
//!
//! ```text
//! w_t + a w_x = u,      u_t - a u_x + a1 u + c w = 0,
//! w(0,t) = p u(0,t),    u(1,t) = 0.
//! ```
//!
//! With `dt = dx / a` the node `x_j` at `t + dt` is reached from `x_{j-1}`
//! along the `w`-characteristic and from `x_{j+1}` along the
//! `u`-characteristic, so transport is exact and only the right-hand sides
//! need quadrature. The trapezoidal rule couples `w_j` and `u_j` at the new
//! level through a 2x2 system that is solved in closed form node by node.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{GridState, Trajectory};
use crate::problem::{InitialData, Orientation, ProblemSpec};

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Smallest admissible nodal determinant.
pub const MIN_DETERMINANT: f64 = 1e-12;

/// Source terms and boundary inhomogeneities for manufactured-solution
/// runs. Production problems have none.
#[derive(Clone)]
pub struct Forcing {
    /// Added to the right-hand side of the `w` equation.
    pub f_w: SpaceTimeFn,
    /// Added to the right-hand side of the `u` equation.
    pub f_u: SpaceTimeFn,
    /// `w(0,t) = p u(0,t) + left(t)`.
    pub left: TimeFn,
    /// `u(1,t) = right(t)`.
    pub right: TimeFn,
}

impl Forcing {
    pub fn interior(f_w: SpaceTimeFn, f_u: SpaceTimeFn) -> Self {
        Forcing { f_w, f_u, left: Arc::new(|_| 0.0), right: Arc::new(|_| 0.0) }
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Forcing { .. }")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Trapezoidal rule along each characteristic; second order.
    #[default]
    TrapezoidalCharacteristic,
    /// Left-endpoint rule; first order, kept for convergence comparisons.
    ExplicitEuler,
}

#[derive(Clone, Debug, Default)]
pub struct StepScheme {
    pub rule: QuadratureRule,
    pub forcing: Option<Forcing>,
}

impl StepScheme {
    pub fn euler() -> Self {
        StepScheme { rule: QuadratureRule::ExplicitEuler, forcing: None }
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }
}

fn require_left(spec: &ProblemSpec) -> Result<()> {
    if spec.orientation != Orientation::LeftSmoothing {
        return Err(Error::Spec(
            "right-smoothing problems are solved through problem::mirror_problem".into(),
        ));
    }
    Ok(())
}

/// Endpoint values that [`init_state`] overwrites to make the data
/// consistent with the boundary conditions: `(old w_0, new w_0, old u_N)`.
pub fn boundary_adjustment(spec: &ProblemSpec, data: &InitialData) -> (f64, f64, f64) {
    let n = data.n_cells();
    (data.phi1()[0], spec.p * data.phi2()[0], data.phi2()[n])
}

pub fn init_state(spec: &ProblemSpec, data: &InitialData, n: usize) -> Result<GridState> {
    init_state_with(spec, data, n, &StepScheme::default())
}

/// State at `t = 0` with `u_N := right(0)` and `w_0 := p u_0 + left(0)`
/// overwriting the supplied endpoint values.
pub fn init_state_with(
    spec: &ProblemSpec,
    data: &InitialData,
    n: usize,
    scheme: &StepScheme,
) -> Result<GridState> {
    spec.validate()?;
    require_left(spec)?;
    if data.n_cells() != n {
        return Err(Error::Spec(format!(
            "initial data has {} cells but the grid has {n}",
            data.n_cells()
        )));
    }
    let mut w = data.phi1().to_vec();
    let mut u = data.phi2().to_vec();
    let (left, right) = match &scheme.forcing {
        Some(f) => ((f.left)(0.0), (f.right)(0.0)),
        None => (0.0, 0.0),
    };
    u[n] = right;
    w[0] = spec.p * u[0] + left;
    GridState::new(spec.a, 0, w, u)
}

/// Advances one level. See the module docs for the scheme.
pub fn step(state: &GridState, spec: &ProblemSpec, scheme: &StepScheme) -> Result<GridState> {
    require_left(spec)?;
    if (state.a - spec.a).abs() > 1e-15 * spec.a {
        return Err(Error::Spec(format!(
            "state was built for a = {} but the problem has a = {}",
            state.a, spec.a
        )));
    }
    let dt = state.dt();
    let t0 = state.t();
    if t0 > spec.horizon + 0.5 * dt {
        return Err(Error::Spec(format!(
            "step from t = {t0} would pass the horizon {}",
            spec.horizon
        )));
    }
    let n = state.n_cells();
    let t1 = (state.step + 1) as f64 * dt;
    let h = 0.5 * dt;
    let x = |j: usize| j as f64 / n as f64;
    let (w, u) = (&state.w, &state.u);
    let has_a1 = !spec.a1.is_zero();
    let a1 = |j: usize, t: f64| if has_a1 { spec.a1.eval(x(j), t) } else { 0.0 };
    let p = spec.p;

    let mut w_new = vec![0.0; n + 1];
    let mut u_new = vec![0.0; n + 1];

    let (left, right) = match &scheme.forcing {
        Some(f) => ((f.left)(t1), (f.right)(t1)),
        None => (0.0, 0.0),
    };

    match scheme.rule {
        QuadratureRule::TrapezoidalCharacteristic => {
            let fw = |j: usize| match &scheme.forcing {
                Some(f) => h * ((f.f_w)(x(j - 1), t0) + (f.f_w)(x(j), t1)),
                None => 0.0,
            };
            let fu = |j: usize| match &scheme.forcing {
                Some(f) => h * ((f.f_u)(x(j + 1), t0) + (f.f_u)(x(j), t1)),
                None => 0.0,
            };
            // explicit parts of the two characteristic integrals
            let from_left = |j: usize| w[j - 1] + h * u[j - 1] + fw(j);
            let from_right = |j: usize| {
                let src = spec.c.eval(x(j + 1), t0) * w[j + 1] + a1(j + 1, t0) * u[j + 1];
                u[j + 1] - h * src + fu(j)
            };

            // x = 0: w = p u + left
            {
                let c = spec.c.eval(0.0, t1);
                let det = 1.0 + h * (a1(0, t1) + c * p);
                check_det(det, c, dt, t1)?;
                let uu = (from_right(0) - h * c * left) / det;
                u_new[0] = uu;
                w_new[0] = p * uu + left;
            }
            for j in 1..n {
                let c = spec.c.eval(x(j), t1);
                let det = 1.0 + h * a1(j, t1) + h * h * c;
                check_det(det, c, dt, t1)?;
                let aa = from_left(j);
                let uu = (from_right(j) - h * c * aa) / det;
                u_new[j] = uu;
                w_new[j] = aa + h * uu;
            }
            u_new[n] = right;
            w_new[n] = from_left(n) + h * right;
        }
        QuadratureRule::ExplicitEuler => {
            let forcing = scheme.forcing.as_ref();
            for j in 0..n {
                let src = spec.c.eval(x(j + 1), t0) * w[j + 1] + a1(j + 1, t0) * u[j + 1];
                let f = forcing.map_or(0.0, |f| dt * (f.f_u)(x(j + 1), t0));
                u_new[j] = u[j + 1] - dt * src + f;
            }
            u_new[n] = right;
            w_new[0] = p * u_new[0] + left;
            for j in 1..=n {
                let f = forcing.map_or(0.0, |f| dt * (f.f_w)(x(j - 1), t0));
                w_new[j] = w[j - 1] + dt * u[j - 1] + f;
            }
        }
    }

    if w_new.iter().chain(&u_new).any(|v| !v.is_finite()) {
        return Err(Error::Overflow { t: t1 });
    }
    Ok(GridState { a: state.a, step: state.step + 1, w: w_new, u: u_new })
}

fn check_det(det: f64, c: f64, dt: f64, t: f64) -> Result<()> {
    if det.abs() < MIN_DETERMINANT {
        return Err(Error::Stability { t, det, c, dt });
    }
    Ok(())
}

/// Number of steps until the first level at or past the horizon.
pub fn step_count(horizon: f64, dt: f64) -> usize {
    ((horizon / dt) - 1e-9).ceil().max(0.0) as usize
}

/// Solves up to the horizon, keeping every `record_every`-th state and the
/// final one. Norms are recorded at every step.
pub fn solve(spec: &ProblemSpec, data: &InitialData, n: usize, record_every: usize) -> Result<Trajectory> {
    if record_every == 0 {
        return Err(Error::Spec("record_every must be at least 1".into()));
    }
    solve_with(spec, data, n, &StepScheme::default(), |s| s % record_every == 0)
}

/// General driver: `keep(step)` selects the full states to retain.
pub fn solve_with(
    spec: &ProblemSpec,
    data: &InitialData,
    n: usize,
    scheme: &StepScheme,
    keep: impl Fn(usize) -> bool,
) -> Result<Trajectory> {
    if n < 4 {
        return Err(Error::Spec(format!("need at least 4 cells, got {n}")));
    }
    let mut state = init_state_with(spec, data, n, scheme)?;
    let dt = state.dt();
    let steps = step_count(spec.horizon, dt);
    let mut norms = Vec::with_capacity(steps + 1);
    let mut states = Vec::new();
    norms.push(state.norms());
    if keep(0) || steps == 0 {
        states.push(state.clone());
    }
    for k in 1..=steps {
        state = step(&state, spec, scheme).map_err(|e| Error::Step { step: k, source: Box::new(e) })?;
        norms.push(state.norms());
        if keep(k) || k == steps {
            states.push(state.clone());
        }
    }
    Ok(Trajectory { dt, states, norms })
}

/// [`solve`] for either orientation. A right-smoothing problem is solved in
/// mirrored coordinates and mapped back, so `u` of the result is
/// `w_t - a w_x`.
pub fn solve_oriented(spec: &ProblemSpec, data: &InitialData, n: usize, record_every: usize) -> Result<Trajectory> {
    match spec.orientation {
        Orientation::LeftSmoothing => solve(spec, data, n, record_every),
        Orientation::RightSmoothing => {
            let mirrored = crate::problem::mirror_problem(spec)?;
            let traj = solve(&mirrored, &data.reflected(spec.a)?, n, record_every)?;
            Ok(traj.reflected())
        }
    }
}
