//! Reference solutions that do not go through the time stepper.
//!
//! * [`decoupled_exact`] evaluates the closed-form solution of the
//!   unperturbed system (`c = a1 = 0`).
//! * [`picard_u`] and [`picard_w_equation`] evaluate the right-hand sides
//!   of the integral form of the system at a single point by composite
//!   trapezoid quadrature along characteristics.
//! * [`picard_solve`] runs successive substitution on the integral form
//!   over a lattice, window by window, seeded with a history segment.
//!
//! With `c = 0` the integral form is
//!
//! ```text
//! w(x,t) = int_{t-x/a}^t u(x + a(tau-t), tau) dtau + p u(0, t - x/a)
//! u(x,t) = -int_{t+(x-1)/a}^t [c w](x + a(t-tau), tau) dtau
//! ```
//!
//! and substituting the second line into the first gives a closed
//! equation for `w` with memory `[t - 2/a, t]`.

use crate::data::DataSource;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::Trajectory;
use crate::problem::{InitialData, ProblemSpec};
use crate::solver::{self, StepScheme};

/// Relative tolerance for snapping a coordinate onto a lattice node.
const SNAP: f64 = 1e-7;

/// Values of one field on the uniform `(x, t)` lattice of a grid with
/// `N` cells and `dt = dx / a`. Level `k` sits at `t = (first_step + k) dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    n_cells: usize,
    a: f64,
    first_step: usize,
    levels: Vec<Vec<f64>>,
}

impl Lattice {
    pub fn new(n_cells: usize, a: f64, first_step: usize, levels: Vec<Vec<f64>>) -> Result<Self> {
        if n_cells < 4 || levels.is_empty() || levels.iter().any(|l| l.len() != n_cells + 1) {
            return Err(Error::Spec("lattice needs N >= 4 and N + 1 values per level".into()));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Spec(format!("wave speed a must be positive, got {a}")));
        }
        Ok(Lattice { n_cells, a, first_step, levels })
    }

    /// Constant field over the given steps; handy for quadrature checks.
    pub fn constant(n_cells: usize, a: f64, first_step: usize, last_step: usize, value: f64) -> Result<Self> {
        let levels = vec![vec![value; n_cells + 1]; last_step - first_step + 1];
        Lattice::new(n_cells, a, first_step, levels)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn dt(&self) -> f64 {
        self.dx() / self.a
    }

    pub fn first_step(&self) -> usize {
        self.first_step
    }

    pub fn last_step(&self) -> usize {
        self.first_step + self.levels.len() - 1
    }

    pub fn t_start(&self) -> f64 {
        self.first_step as f64 * self.dt()
    }

    pub fn t_end(&self) -> f64 {
        self.last_step() as f64 * self.dt()
    }

    /// Values at the given global step.
    pub fn level(&self, step: usize) -> Option<&[f64]> {
        step.checked_sub(self.first_step)
            .and_then(|k| self.levels.get(k))
            .map(Vec::as_slice)
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Node value when `(x, t)` is a lattice node, bilinear interpolation
    /// otherwise.
    pub fn value_at(&self, x: f64, t: f64) -> Result<f64> {
        let n = self.n_cells as f64;
        let px = x * n;
        let pt = t / self.dt() - self.first_step as f64;
        let last = (self.levels.len() - 1) as f64;
        if px < -SNAP || px > n + SNAP || pt < -SNAP || pt > last + SNAP {
            return Err(Error::Coverage(format!(
                "point (x={x}, t={t}) outside lattice [0,1] x [{}, {}]",
                self.t_start(),
                self.t_end()
            )));
        }
        let (j, fx) = split(px, self.n_cells);
        let (k, ft) = split(pt, self.levels.len() - 1);
        let row = |k: usize| {
            let l = &self.levels[k];
            if fx == 0.0 {
                l[j]
            } else {
                l[j] + (l[j + 1] - l[j]) * fx
            }
        };
        Ok(if ft == 0.0 { row(k) } else { row(k) + (row(k + 1) - row(k)) * ft })
    }
}

/// Node index and fraction with snapping; `max` is the last node. A zero
/// fraction means the node itself, so `max` is only returned that way.
fn split(pos: f64, max: usize) -> (usize, f64) {
    let r = pos.round();
    if (pos - r).abs() < SNAP {
        return ((r.max(0.0) as usize).min(max), 0.0);
    }
    let i = (pos.floor().max(0.0) as usize).min(max.saturating_sub(1));
    (i, pos - i as f64)
}

/// Solution history on `[t0 - 4/a, t0]`, the memory needed by the closed
/// `w` equation.
#[derive(Clone, Debug, PartialEq)]
pub struct HistorySegment {
    pub w: Lattice,
    pub u: Lattice,
}

impl HistorySegment {
    /// Cuts the segment ending at step `t0_step` out of a trajectory that kept
    /// every state in that range.
    pub fn from_trajectory(traj: &Trajectory, t0_step: usize) -> Result<Self> {
        let first = traj
            .states()
            .first()
            .ok_or_else(|| Error::InsufficientData("empty trajectory".into()))?;
        let n = first.n_cells();
        let depth = 4 * n;
        let start = t0_step.checked_sub(depth).ok_or_else(|| {
            Error::Coverage(format!("history needs t0 >= 4/a; t0 step {t0_step} < {depth}"))
        })?;
        let mut w = Vec::with_capacity(depth + 1);
        let mut u = Vec::with_capacity(depth + 1);
        for s in start..=t0_step {
            let g = traj.state_at_step(s).ok_or_else(|| {
                Error::Coverage(format!("trajectory did not keep the state at step {s}"))
            })?;
            w.push(g.w().to_vec());
            u.push(g.u().to_vec());
        }
        let a = first.a();
        Ok(HistorySegment { w: Lattice::new(n, a, start, w)?, u: Lattice::new(n, a, start, u)? })
    }

    pub fn t0(&self) -> f64 {
        self.w.t_end()
    }

    /// Always `4/a` up to rounding.
    pub fn duration(&self) -> f64 {
        self.w.t_end() - self.w.t_start()
    }
}

/// Number of equal panels for an interval of length `len` with nominal
/// step `h`: exact when `len` is a multiple of `h`, rounded up otherwise.
fn panels(len: f64, h: f64) -> usize {
    let r = len / h;
    let k = if (r - r.round()).abs() < 1e-6 { r.round() } else { r.ceil() };
    (k as usize).max(1)
}

/// Composite trapezoid of `f` over `[lo, hi]` with `m` panels.
fn trapezoid(lo: f64, hi: f64, m: usize, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let h = (hi - lo) / m as f64;
    let mut s = 0.5 * (f(lo)? + f(hi)?);
    for k in 1..m {
        s += f(lo + k as f64 * h)?;
    }
    Ok(s * h)
}

/// Linear interpolation of node samples on `[0,1]` with snapping.
fn interp(f: &[f64], s: f64) -> f64 {
    let n = f.len() - 1;
    let (j, fr) = split((s * n as f64).clamp(0.0, n as f64), n);
    if fr == 0.0 {
        f[j]
    } else {
        f[j] + (f[j + 1] - f[j]) * fr
    }
}

/// Closed-form solution `(w, u)` of the unperturbed system at `(x, t)`.
///
/// `u` is `phi2` shifted left by `a t` and vanishes once the shift leaves
/// `[0,1)`; `w` is `phi1` shifted right (or the reflected boundary value
/// `p u(0, t - x/a)`) plus the integral of `u` along the `w`-characteristic,
/// taken by the trapezoid rule with step `dx / a`. The data are first made
/// boundary-consistent exactly as the stepper does (`phi2(1) = 0`,
/// `phi1(0) = p phi2(0)`).
pub fn decoupled_exact(data: &InitialData, spec: &ProblemSpec, x: f64, t: f64) -> Result<(f64, f64)> {
    if !spec.c.is_zero() || !spec.a1.is_zero() {
        return Err(Error::Spec("decoupled_exact needs c = 0 and a1 = 0".into()));
    }
    let a = spec.a;
    let n = data.n_cells();
    let mut phi1 = data.phi1().to_vec();
    let mut phi2 = data.phi2().to_vec();
    phi2[n] = 0.0;
    phi1[0] = spec.p * phi2[0];

    let snap_tol = SNAP / n as f64;
    let u_at = |x: f64, tau: f64| -> f64 {
        let s = x + a * tau;
        if s >= 1.0 - snap_tol {
            0.0
        } else {
            interp(&phi2, s)
        }
    };
    let h = data.dx() / a;
    let along = |lo: f64| {
        trapezoid(lo, t, panels(t - lo, h), |tau| Ok(u_at(x - a * (t - tau), tau)))
    };
    let u = u_at(x, t);
    let foot = x - a * t;
    let w = if foot > snap_tol {
        interp(&phi1, foot) + along(0.0)?
    } else {
        let tau0 = t - x / a;
        spec.p * u_at(0.0, tau0) + along(tau0)?
    };
    Ok((w, u))
}

fn integrating_exponent(spec: &ProblemSpec, eta: f64, tau: f64, h: f64) -> Result<f64> {
    // E(eta, tau) = int_eta^1 a1(xi, tau + (eta - xi)/a) / a dxi
    let a = spec.a;
    let len = 1.0 - eta;
    if len <= 0.0 {
        return Ok(0.0);
    }
    trapezoid(eta, 1.0, panels(len, h), |xi| Ok(spec.a1.eval(xi, tau + (eta - xi) / a) / a))
}

/// `u(x,t)` from the integral form, given `w` on a lattice. With `a1 != 0`
/// both exponential integrating factors are taken by the trapezoid rule
/// at the lattice resolution.
pub fn picard_u(x: f64, t: f64, w: &Lattice, spec: &ProblemSpec) -> Result<f64> {
    let a = spec.a;
    let start = t + (x - 1.0) / a;
    if start < -SNAP * w.dt() {
        return Err(Error::Spec(format!(
            "u-characteristic through (x={x}, t={t}) starts before t = 0"
        )));
    }
    let len = (1.0 - x) / a;
    if len <= 0.0 {
        return Ok(0.0);
    }
    let m = panels(len, w.dt());
    let cw = |tau: f64| -> Result<f64> {
        let eta = x + a * (t - tau);
        Ok(spec.c.eval(eta, tau) * w.value_at(eta, tau)?)
    };
    if spec.a1.is_zero() {
        return Ok(-trapezoid(start, t, m, cw)?);
    }
    let hx = w.dx();
    let inner = trapezoid(start, t, m, |tau| {
        let eta = x + a * (t - tau);
        Ok(cw(tau)? * integrating_exponent(spec, eta, tau, hx)?.exp())
    })?;
    Ok(-(-integrating_exponent(spec, x, t, hx)?).exp() * inner)
}

/// Right-hand side of the closed equation for `w` at `(x, t)`, `t > 4/a`:
///
/// ```text
/// -int_{t-x/a}^t int_{2 tau - t + (x-1)/a}^tau [c w](x + a(2 tau - t - xi), xi) dxi dtau
///   - p int_{t-(x+1)/a}^{t-x/a} [c w](a(t - tau) - x, tau) dtau
/// ```
///
/// The inner integrand runs along the `u`-characteristic that ends at the
/// point `(x + a(tau - t), tau)` of the outer `w`-characteristic.
pub fn picard_w_equation(x: f64, t: f64, w: &Lattice, spec: &ProblemSpec) -> Result<f64> {
    if !spec.a1.is_zero() {
        return Err(Error::Spec("the closed w equation assumes a1 = 0".into()));
    }
    let a = spec.a;
    if t <= 4.0 / a {
        return Err(Error::Spec(format!("closed w equation needs t > 4/a, got t = {t}")));
    }
    let h = w.dt();
    if w.t_start() > t - 4.0 / a + SNAP * h || w.t_end() < t - SNAP * h {
        return Err(Error::Coverage(format!(
            "history [{}, {}] does not cover [{}, {t}]",
            w.t_start(),
            w.t_end(),
            t - 4.0 / a
        )));
    }
    let cw = |y: f64, s: f64| -> Result<f64> { Ok(spec.c.eval(y, s) * w.value_at(y, s)?) };

    let outer_lo = t - x / a;
    let double = trapezoid(outer_lo, t, panels(x / a, h), |tau| {
        let lo = 2.0 * tau - t + (x - 1.0) / a;
        trapezoid(lo, tau, panels(tau - lo, h), |xi| cw(x + a * (2.0 * tau - t - xi), xi))
    })?;
    let bound_hi = t - x / a;
    let boundary = trapezoid(bound_hi - 1.0 / a, bound_hi, panels(1.0 / a, h), |tau| {
        cw(a * (t - tau) - x, tau)
    })?;
    Ok(-double - spec.p * boundary)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub exec: Exec,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: 1e-13, max_iter: 200, exec: Exec::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowReport {
    pub t_start: f64,
    pub t_end: f64,
    pub iterations: usize,
    /// Sup-norm change of the iterate at each iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl WindowReport {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }

    /// Geometric mean ratio between successive residuals.
    pub fn mean_contraction(&self) -> Option<f64> {
        let r = &self.residuals;
        let (first, last) = (*r.first()?, *r.last()?);
        if r.len() < 2 || first <= 0.0 || last <= 0.0 {
            return None;
        }
        Some((last / first).powf(1.0 / (r.len() - 1) as f64))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PicardSolution {
    /// `w` on `[t0, t_end]`; the first level is the seed's last level.
    pub w: Lattice,
    /// `u` recomputed from the integral form on the same levels.
    pub u: Lattice,
    pub windows: Vec<WindowReport>,
}

impl PicardSolution {
    pub fn converged(&self) -> bool {
        self.windows.iter().all(|w| w.converged)
    }

    pub fn iterations(&self) -> usize {
        self.windows.iter().map(|w| w.iterations).sum()
    }

    pub fn final_residual(&self) -> f64 {
        self.windows.iter().map(WindowReport::final_residual).fold(0.0, f64::max)
    }
}

/// Successive substitution `w <- RHS(w)` on the lattice of `seed`, advanced
/// in windows of length `4/a` from `t0` to `t_end`. Each window starts
/// from the zero iterate and stops when the sup-norm change drops to `tol`
/// or after `max_iter` sweeps. A window that fails to converge is reported
/// and ends the sweep; it is not an error.
///
/// One sweep evaluates the double integral of the closed `w` equation at
/// every lattice point by accumulating the inner `u`-characteristic
/// integrals diagonal by diagonal, then the outer `w`-characteristic
/// integrals the same way. With `a1 != 0` the inner integrals carry the
/// integrating factor.
pub fn picard_solve(
    seed: &HistorySegment,
    spec: &ProblemSpec,
    t_end: f64,
    opts: &PicardOptions,
) -> Result<PicardSolution> {
    let a = spec.a;
    let n = seed.w.n_cells();
    if (seed.w.a - a).abs() > 1e-15 * a {
        return Err(Error::Spec("history lattice was built for a different wave speed".into()));
    }
    if seed.w.levels.len() != 4 * n + 1 {
        return Err(Error::Coverage(format!(
            "history must span exactly 4/a ({} levels), got {}",
            4 * n + 1,
            seed.w.levels.len()
        )));
    }
    let dt = seed.w.dt();
    let dx = seed.w.dx();
    let t0 = seed.t0();
    if t_end <= t0 {
        return Err(Error::Spec(format!("t_end = {t_end} must exceed t0 = {t0}")));
    }
    let total = solver::step_count(t_end - t0, dt);
    let base = seed.w.first_step;
    let h = 0.5 * dt;
    let p = spec.p;
    let has_a1 = !spec.a1.is_zero();

    // level index k in the buffers is global step base + k
    let mut w_all: Vec<Vec<f64>> = seed.w.levels.clone();
    let mut windows = Vec::new();
    let window_len = 4 * n;

    let coeff_level = |field: &crate::field::CoefficientField, k: usize| -> Vec<f64> {
        let t = (base + k) as f64 * dt;
        (0..=n).map(|j| field.eval(j as f64 * dx, t)).collect()
    };

    let mut done = 0;
    while done < total {
        let ws = w_all.len() - 1; // last known level
        let len = window_len.min(total - done);
        let c_all: Vec<Vec<f64>> = (0..=ws + len).map(|k| coeff_level(&spec.c, k)).collect();
        let a1_all: Vec<Vec<f64>> = if has_a1 {
            (0..=ws + len).map(|k| coeff_level(&spec.a1, k)).collect()
        } else {
            Vec::new()
        };
        w_all.extend(std::iter::repeat_n(vec![0.0; n + 1], len));

        let u_lo = ws + 1 - n; // first level where u is needed
        let mut report = WindowReport {
            t_start: (base + ws) as f64 * dt,
            t_end: (base + ws + len) as f64 * dt,
            iterations: 0,
            residuals: Vec::new(),
            converged: false,
        };
        let mut u_all = vec![vec![0.0; n + 1]; ws + len + 1];
        loop {
            sweep_u(&w_all, &c_all, &a1_all, &mut u_all, n, u_lo, ws + len, h, dx / a, opts.exec);
            let new_levels = sweep_w(&u_all, n, ws, len, h, p, opts.exec);
            let mut residual = 0.0_f64;
            for (k, level) in new_levels.into_iter().enumerate() {
                let old = &mut w_all[ws + 1 + k];
                for (o, v) in old.iter_mut().zip(level) {
                    residual = residual.max((v - *o).abs());
                    *o = v;
                }
            }
            report.iterations += 1;
            report.residuals.push(residual);
            if !residual.is_finite() {
                break;
            }
            if residual <= opts.tol {
                report.converged = true;
                break;
            }
            if report.iterations >= opts.max_iter {
                break;
            }
        }
        let converged = report.converged;
        windows.push(report);
        done += len;
        if !converged {
            w_all.truncate(ws + len + 1);
            break;
        }
    }

    // u on the output levels from the final iterate
    let first_out = 4 * n;
    let last = w_all.len() - 1;
    let c_all: Vec<Vec<f64>> = (0..=last).map(|k| coeff_level(&spec.c, k)).collect();
    let a1_all: Vec<Vec<f64>> = if has_a1 {
        (0..=last).map(|k| coeff_level(&spec.a1, k)).collect()
    } else {
        Vec::new()
    };
    let mut u_all = vec![vec![0.0; n + 1]; last + 1];
    sweep_u(&w_all, &c_all, &a1_all, &mut u_all, n, first_out, last, h, dx / a, opts.exec);

    let first_step = base + first_out;
    Ok(PicardSolution {
        w: Lattice::new(n, a, first_step, w_all[first_out..].to_vec())?,
        u: Lattice::new(n, a, first_step, u_all[first_out..].to_vec())?,
        windows,
    })
}

/// Fills `u` on levels `lo..=hi` by trapezoid sums of `-c w` (times the
/// integrating factor when `a1 != 0`) along each `u`-characteristic,
/// starting from `u = 0` at `x = 1`. Characteristic `e` holds the nodes
/// with `level + j = e`.
#[allow(clippy::too_many_arguments)]
fn sweep_u(
    w: &[Vec<f64>],
    c: &[Vec<f64>],
    a1: &[Vec<f64>],
    u: &mut [Vec<f64>],
    n: usize,
    lo: usize,
    hi: usize,
    h: f64,
    hx_over_a: f64,
    exec: Exec,
) {
    let has_a1 = !a1.is_empty();
    let diags = exec.map_range(lo..hi + n + 1, |e| {
        // starts at (j = n, level e - n); needs e - n >= 0, guaranteed by the history depth
        let mut out = Vec::with_capacity(n + 1);
        let mut sum = 0.0;
        let mut expo = 0.0;
        let mut prev_g = 0.0;
        let mut prev_a1 = 0.0;
        for j in (0..=n).rev() {
            let k = e - j;
            if k > hi {
                break;
            }
            let mut g = c[k][j] * w[k][j];
            if has_a1 {
                if j < n {
                    expo += 0.5 * hx_over_a * (prev_a1 + a1[k][j]);
                }
                prev_a1 = a1[k][j];
                g *= expo.exp();
            }
            if j < n {
                sum += h * (prev_g + g);
            }
            prev_g = g;
            if (lo..=hi).contains(&k) {
                let v = if has_a1 { -(-expo).exp() * sum } else { -sum };
                out.push((k, j, v));
            }
        }
        out
    });
    for (k, j, v) in diags.into_iter().flatten() {
        u[k][j] = v;
    }
}

/// New `w` on levels `ws+1 ..= ws+len` from trapezoid sums of `u` along each
/// `w`-characteristic, starting from `p u(0, .)` at `x = 0`.
fn sweep_w(u: &[Vec<f64>], n: usize, ws: usize, len: usize, h: f64, p: f64, exec: Exec) -> Vec<Vec<f64>> {
    let lo = ws + 1;
    let hi = ws + len;
    let diags = exec.map_range(lo - n..hi + 1, |d| {
        let mut out = Vec::with_capacity(n + 1);
        let mut sum = p * u[d][0];
        if (lo..=hi).contains(&d) {
            out.push((d, 0, sum));
        }
        for j in 1..=n {
            let k = d + j;
            if k > hi {
                break;
            }
            sum += h * (u[k - 1][j - 1] + u[k][j]);
            if k >= lo {
                out.push((k, j, sum));
            }
        }
        out
    });
    let mut levels = vec![vec![0.0; n + 1]; len];
    for (k, j, v) in diags.into_iter().flatten() {
        levels[k - lo][j] = v;
    }
    levels
}

/// How the Picard reference is compared against the stepper.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub n_list: Vec<usize>,
    /// Seed time; needs `t0 >= 4/a` and must be a lattice time for every grid.
    pub t0: f64,
    pub t_end: f64,
    /// The reference runs on a lattice `refine` times finer than the stepper
    /// it is compared with. With `refine = 1` both compute the same
    /// discrete fixed point and agree to rounding.
    pub refine: usize,
    pub picard: PicardOptions,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyRow {
    pub n: usize,
    pub sup_discrepancy: f64,
    /// `log2`-type order against the previous row; `None` for the first row.
    pub observed_order: Option<f64>,
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
}

/// Runs the stepper at each `N` and the Picard reference at `refine * N`
/// (seeded from the stepper on `[t0 - 4/a, t0]`), and reports the sup-norm
/// difference of `w` over `[t0, t_end]` on the common nodes.
pub fn verify_against_solver(spec: &ProblemSpec, source: &DataSource, opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    if opts.n_list.is_empty() || opts.refine == 0 {
        return Err(Error::Spec("verify needs a nonempty N list and refine >= 1".into()));
    }
    if opts.t0 < 4.0 / spec.a - 1e-12 {
        return Err(Error::Spec(format!("seed time t0 = {} is below 4/a", opts.t0)));
    }
    let inner = PicardOptions { exec: Exec::Sequential, ..opts.picard };
    let rows = opts.picard.exec.try_map(&opts.n_list, |&n| -> Result<VerifyRow> {
        let coarse_dt = 1.0 / (n as f64 * spec.a);
        let t0_step = lattice_step(opts.t0, coarse_dt)?;
        let run_spec = ProblemSpec { horizon: opts.t_end, ..spec.clone() };
        let data = source.initial_data(n, spec.a)?;
        let coarse = solver::solve_with(&run_spec, &data, n, &StepScheme::default(), |s| s >= t0_step)?;

        let m = opts.refine * n;
        let fine_t0 = t0_step * opts.refine;
        let seed_spec = ProblemSpec { horizon: opts.t0, ..spec.clone() };
        let fine_data = source.initial_data(m, spec.a)?;
        let fine = solver::solve_with(&seed_spec, &fine_data, m, &StepScheme::default(), |s| s + 4 * m >= fine_t0)?;
        let seed = HistorySegment::from_trajectory(&fine, fine_t0)?;
        let sol = picard_solve(&seed, spec, opts.t_end, &inner)?;

        let mut disc = 0.0_f64;
        for g in coarse.states().iter().filter(|g| g.step() >= t0_step) {
            let Some(level) = sol.w.level(g.step() * opts.refine) else { continue };
            for (j, v) in g.w().iter().enumerate() {
                disc = disc.max((v - level[j * opts.refine]).abs());
            }
        }
        Ok(VerifyRow {
            n,
            sup_discrepancy: disc,
            observed_order: None,
            iterations: sol.iterations(),
            final_residual: sol.final_residual(),
            converged: sol.converged(),
        })
    })?;
    let mut rows = rows;
    for i in 1..rows.len() {
        let (prev, cur) = (&rows[i - 1], &rows[i]);
        let order = (prev.sup_discrepancy / cur.sup_discrepancy).ln() / (cur.n as f64 / prev.n as f64).ln();
        rows[i].observed_order = order.is_finite().then_some(order);
    }
    Ok(rows)
}

fn lattice_step(t: f64, dt: f64) -> Result<usize> {
    let r = t / dt;
    if (r - r.round()).abs() > 1e-6 {
        return Err(Error::Spec(format!("time {t} is not a multiple of dt = {dt}")));
    }
    Ok(r.round() as usize)
}
