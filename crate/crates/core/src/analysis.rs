//! Quantities extracted from trajectories: extinction times, decay and
//! growth fits, discrete `C^2` norms and refinement studies, stability
//! index estimates.

use crate::data::DataSource;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::{GridState, NormRecord, Trajectory};
use crate::problem::{InitialData, ProblemSpec};
use crate::solver::{self, StepScheme};

/// Values at or below this are treated as roundoff after extinction.
pub const DEFAULT_FLOOR: f64 = 1e-13;

/// Relative slack allowed by the growth envelope.
pub const ENVELOPE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitKind {
    /// `W(t) ~ M e^{-gamma t} * normalizer`
    Decay { gamma: f64, m: f64 },
    /// `W(t) <= M3 e^{A t} * normalizer`
    Growth { a: f64, m3: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitReport {
    pub kind: FitKind,
    pub window: (f64, f64),
    pub rms_residual: f64,
    pub sample_count: usize,
    /// Samples in the window dropped for being at or below the floor.
    pub excluded: usize,
}

impl FitReport {
    pub fn gamma(&self) -> Option<f64> {
        match self.kind {
            FitKind::Decay { gamma, .. } => Some(gamma),
            FitKind::Growth { .. } => None,
        }
    }

    /// `M3 e^{A t}` for growth fits.
    pub fn envelope(&self, t: f64) -> Option<f64> {
        match self.kind {
            FitKind::Growth { a, m3 } => Some(m3 * (a * t).exp()),
            FitKind::Decay { .. } => None,
        }
    }

    /// Checks `v <= M3 e^{A t} normalizer (1 + 1e-9)` at every sample.
    pub fn envelope_holds(&self, times: &[f64], values: &[f64], normalizer: f64) -> bool {
        let Some(_) = self.envelope(0.0) else { return false };
        times.iter().zip(values).all(|(&t, &v)| {
            v <= self.envelope(t).unwrap() * normalizer * (1.0 + ENVELOPE_SLACK)
        })
    }
}

/// Least-squares line through `(t_i, y_i)`: `(slope, intercept, rms residual)`.
pub fn least_squares_line(t: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sty, mut stt) = (0.0, 0.0);
    for (ti, yi) in t.iter().zip(y) {
        sty += (ti - tm) * (yi - ym);
        stt += (ti - tm) * (ti - tm);
    }
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let intercept = ym - slope * tm;
    let ss: f64 = t
        .iter()
        .zip(y)
        .map(|(ti, yi)| (yi - (intercept + slope * ti)).powi(2))
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

/// Earliest recorded time after which every recorded norm stays at or
/// below `tol`; `None` if the last record is still above it.
pub fn extinction_time(traj: &Trajectory, tol: f64) -> Option<f64> {
    extinction_time_of(traj.norms(), tol)
}

pub fn extinction_time_of(records: &[NormRecord], tol: f64) -> Option<f64> {
    match records.iter().rposition(|r| r.max_norm() > tol) {
        None => records.first().map(|r| r.t),
        Some(i) => records.get(i + 1).map(|r| r.t),
    }
}

/// Log-linear least-squares fit of `W(t)` over `window`; samples at or
/// below `floor` are excluded and counted.
pub fn fit_decay_rate(traj: &Trajectory, window: (f64, f64), floor: f64, normalizer: f64) -> Result<FitReport> {
    fit_decay_series(&traj.times(), &traj.w_l2(), window, floor, normalizer)
}

pub fn fit_decay_series(
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
    floor: f64,
    normalizer: f64,
) -> Result<FitReport> {
    if !(normalizer > 0.0) {
        return Err(Error::Spec(format!("normalizer must be positive, got {normalizer}")));
    }
    let eps = 1e-9 * (window.1 - window.0).abs().max(1.0);
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0;
    for (&t, &v) in times.iter().zip(values) {
        if t < window.0 - eps || t > window.1 + eps {
            continue;
        }
        if v > floor {
            ts.push(t);
            ys.push(v.ln());
        } else {
            excluded += 1;
        }
    }
    if ts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} samples above the floor {floor:e} in [{}, {}] (excluded {excluded})",
            ts.len(),
            window.0,
            window.1
        )));
    }
    let (slope, intercept, rms) = least_squares_line(&ts, &ys);
    Ok(FitReport {
        kind: FitKind::Decay { gamma: -slope, m: intercept.exp() / normalizer },
        window,
        rms_residual: rms,
        sample_count: ts.len(),
        excluded,
    })
}

/// Growth envelope of `W(t)`: see [`fit_growth_series`].
pub fn fit_growth_bound(traj: &Trajectory, normalizer: f64) -> Result<FitReport> {
    fit_growth_series(&traj.times(), &traj.w_l2(), normalizer)
}

/// `A = max(0, slope)` of a least-squares line through the log of the
/// running maximum, then the smallest `M3` with `v <= M3 e^{A t} normalizer`
/// at every sample. An all-zero series gives `A = M3 = 0`.
pub fn fit_growth_series(times: &[f64], values: &[f64], normalizer: f64) -> Result<FitReport> {
    fit_growth_pooled(&[(times, values, normalizer)])
}

/// One `(A, M3)` pair for several series at once: `A` is the largest
/// per-series slope and `M3` covers every sample of every series.
pub fn fit_growth_pooled(series: &[(&[f64], &[f64], f64)]) -> Result<FitReport> {
    if series.is_empty() || series.iter().all(|(t, _, _)| t.is_empty()) {
        return Err(Error::InsufficientData("growth fit needs at least one sample".into()));
    }
    let mut a = 0.0_f64;
    let mut rms = 0.0_f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut count = 0;
    for &(times, values, normalizer) in series {
        if times.len() != values.len() {
            return Err(Error::Spec("times and values differ in length".into()));
        }
        if values.iter().any(|v| *v != 0.0) && !(normalizer > 0.0) {
            return Err(Error::Spec(format!("normalizer must be positive, got {normalizer}")));
        }
        let mut running = 0.0_f64;
        let mut ts = Vec::new();
        let mut ys = Vec::new();
        for (&t, &v) in times.iter().zip(values) {
            running = running.max(v);
            if running > 0.0 {
                ts.push(t);
                ys.push(running.ln());
            }
            lo = lo.min(t);
            hi = hi.max(t);
        }
        count += times.len();
        if ts.len() >= 2 {
            let (slope, _, r) = least_squares_line(&ts, &ys);
            a = a.max(slope);
            rms = rms.max(r);
        }
    }
    let mut m3 = 0.0_f64;
    for &(times, values, normalizer) in series {
        for (&t, &v) in times.iter().zip(values) {
            if v > 0.0 {
                m3 = m3.max(v * (-a * t).exp() / normalizer);
            }
        }
    }
    if m3 == 0.0 {
        a = 0.0;
    }
    Ok(FitReport {
        kind: FitKind::Growth { a, m3 },
        window: (lo, hi),
        rms_residual: rms,
        sample_count: count,
        excluded: 0,
    })
}

/// Derivative orders `(alpha, beta)` in x and t, in the order used by [`C2Norms`].
pub const DERIVATIVE_ORDERS: [(u8, u8); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

/// Sup over interior nodes of each discrete derivative of `w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C2Norms(pub [f64; 6]);

impl C2Norms {
    pub fn get(&self, alpha: u8, beta: u8) -> f64 {
        let i = DERIVATIVE_ORDERS
            .iter()
            .position(|&o| o == (alpha, beta))
            .expect("order with alpha + beta <= 2");
        self.0[i]
    }
}

/// Centered second-order differences of `w` around the middle of five
/// consecutive levels: within a level for x, across levels for t, and the
/// mixed derivative as the t-difference of x-differences.
///
/// With `dt = dx / a` both characteristic families preserve the parity of
/// `step + j`, so the lattice splits into two classes that never exchange
/// information. Every stencil here stays inside one class; the pure second
/// derivatives therefore use spacing `2 dx` and `2 dt`.
pub fn discrete_c2_norms(states: &[GridState]) -> Result<C2Norms> {
    if states.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "discrete C2 norms need 5 consecutive levels, got {}",
            states.len()
        )));
    }
    for w in states.windows(2) {
        if w[1].step() != w[0].step() + 1 || w[1].n_cells() != w[0].n_cells() {
            return Err(Error::Spec("levels must be consecutive steps of one grid".into()));
        }
    }
    let mid = states.len() / 2;
    let lvl = |o: isize| states[(mid as isize + o) as usize].w();
    let (wmm, wm, w0, wp, wpp) = (lvl(-2), lvl(-1), lvl(0), lvl(1), lvl(2));
    let cur = &states[mid];
    let n = cur.n_cells();
    let dx = cur.dx();
    let dt = cur.dt();
    let mut out = [0.0_f64; 6];
    let mut bump = |d: usize, v: f64| out[d] = out[d].max(v.abs());
    for j in 1..n {
        let dx1 = |w: &[f64]| (w[j + 1] - w[j - 1]) / (2.0 * dx);
        bump(0, w0[j]);
        bump(1, dx1(w0));
        bump(2, (wp[j] - wm[j]) / (2.0 * dt));
        if j >= 2 && j + 2 <= n {
            bump(3, (w0[j + 2] - 2.0 * w0[j] + w0[j - 2]) / (4.0 * dx * dx));
        }
        bump(4, (dx1(wp) - dx1(wm)) / (2.0 * dt));
        bump(5, (wpp[j] - 2.0 * w0[j] + wmm[j]) / (4.0 * dt * dt));
    }
    Ok(C2Norms(out))
}

/// Norms this small are not compared in refinement ratios.
pub const RATIO_FLOOR: f64 = 1e-12;

/// Discrete `C^2` norms at several resolutions and query times.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingReport {
    pub times: Vec<f64>,
    pub n_list: Vec<usize>,
    /// `norms[i][k]`: resolution `n_list[i]`, time `times[k]`.
    pub norms: Vec<Vec<C2Norms>>,
    /// `ratios[i][k][d] = norms[i][k][d] / norms[i+1][k][d]`, `None` when both
    /// sit below [`RATIO_FLOOR`].
    pub ratios: Vec<Vec<[Option<f64>; 6]>>,
    /// Closed-form `C^2` norm of `c`; `None` marks a field outside the
    /// smoothness hypothesis.
    pub coefficient_c2: Option<f64>,
}

impl SmoothingReport {
    /// Every defined ratio at time index `k` lies in `[lo, hi]`.
    pub fn grid_independent_at(&self, k: usize, lo: f64, hi: f64) -> bool {
        self.ratios
            .iter()
            .flat_map(|r| r[k].iter().flatten())
            .all(|v| (lo..=hi).contains(v))
    }
}

/// Solves at each resolution and measures discrete `C^2` norms at the query
/// times. The run extends two steps past the last query time so the
/// centered time differences are available.
pub fn smoothing_report(
    spec: &ProblemSpec,
    source: &DataSource,
    n_list: &[usize],
    query_times: &[f64],
    exec: Exec,
) -> Result<SmoothingReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Spec("N list must be nonempty and strictly increasing".into()));
    }
    if n_list.iter().any(|n| n % n_list[0] != 0) {
        return Err(Error::Spec("every N must be a multiple of the smallest".into()));
    }
    if query_times.iter().any(|&t| t < 0.0 || t > spec.horizon + 1e-12) {
        return Err(Error::Spec("query times must lie within [0, horizon]".into()));
    }
    let t_max = query_times.iter().copied().fold(0.0, f64::max);
    let norms = exec.try_map(n_list, |&n| -> Result<Vec<C2Norms>> {
        let dt = 1.0 / (n as f64 * spec.a);
        let run = ProblemSpec { horizon: t_max + 2.0 * dt, ..spec.clone() };
        let centers: Vec<usize> = query_times.iter().map(|t| (t / dt).round() as usize).collect();
        let data = source.initial_data(n, spec.a)?;
        let keep = |s: usize| centers.iter().any(|&c| s + 2 >= c && s <= c + 2);
        let traj = solver::solve_with(&run, &data, n, &StepScheme::default(), keep)?;
        centers
            .iter()
            .map(|&c| {
                let levels: Vec<GridState> = (c.saturating_sub(2)..=c + 2)
                    .filter_map(|s| traj.state_at_step(s).cloned())
                    .collect();
                discrete_c2_norms(&levels)
            })
            .collect()
    })?;
    let ratios = norms
        .windows(2)
        .map(|pair| {
            pair[0]
                .iter()
                .zip(&pair[1])
                .map(|(a, b)| {
                    let mut r = [None; 6];
                    for (slot, (&x, &y)) in r.iter_mut().zip(a.0.iter().zip(&b.0)) {
                        if x.max(y) > RATIO_FLOOR && y > 0.0 {
                            *slot = Some(x / y);
                        }
                    }
                    r
                })
                .collect()
        })
        .collect();
    Ok(SmoothingReport {
        times: query_times.to_vec(),
        n_list: n_list.to_vec(),
        norms,
        ratios,
        coefficient_c2: spec.c.c2_norm(spec.horizon),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StabilityEstimate {
    Finite(f64),
    /// `W(t)` fell to the floor: the estimate is `-inf`.
    Extinct,
}

impl StabilityEstimate {
    pub fn value(&self) -> f64 {
        match self {
            StabilityEstimate::Finite(v) => *v,
            StabilityEstimate::Extinct => f64::NEG_INFINITY,
        }
    }
}

/// Ensemble maximum of `log(W(t) / W(0)) / t` at each requested time.
pub fn stability_index(
    spec: &ProblemSpec,
    ensemble: &[InitialData],
    t_list: &[f64],
    floor: f64,
    exec: Exec,
) -> Result<Vec<(f64, StabilityEstimate)>> {
    if ensemble.is_empty() {
        return Err(Error::Spec("stability index needs a nonempty ensemble".into()));
    }
    let t_max = t_list.iter().copied().fold(0.0, f64::max);
    let run = ProblemSpec { horizon: t_max.max(spec.horizon), ..spec.clone() };
    let series = exec.try_map(ensemble, |data| -> Result<Vec<f64>> {
        let n = data.n_cells();
        let traj = solver::solve(&run, data, n, usize::MAX)?;
        Ok(traj.w_l2())
    })?;
    let mut out = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let mut best = StabilityEstimate::Extinct;
        for (data, w) in ensemble.iter().zip(&series) {
            let w0 = w[0];
            if !(w0 > 0.0) {
                return Err(Error::Spec("stability index needs W(0) > 0 for every member".into()));
            }
            let dt_m = 1.0 / (data.n_cells() as f64 * spec.a);
            let k = ((t / dt_m).round() as usize).min(w.len() - 1);
            let wt = w[k];
            if wt > floor {
                let v = (wt / w0).ln() / t;
                best = match best {
                    StabilityEstimate::Finite(b) if b >= v => best,
                    _ => StabilityEstimate::Finite(v),
                };
            }
        }
        out.push((t, best));
    }
    Ok(out)
}

/// Smallest `K` with `W(t) <= K sup|c| int_{t-4/a}^t W` at every recorded
/// `t > 4/a` (trapezoid integral over the records). `None` when `c = 0`
/// or the trajectory is shorter than `4/a`.
pub fn gronwall_constant(traj: &Trajectory, sup_c: f64, a: f64) -> Option<f64> {
    if !(sup_c > 0.0) {
        return None;
    }
    let w = traj.w_l2();
    let dt = traj.dt();
    let lag = (4.0 / (a * dt)).round() as usize;
    if w.len() <= lag + 1 {
        return None;
    }
    // prefix trapezoid sums
    let mut cum = vec![0.0; w.len()];
    for i in 1..w.len() {
        cum[i] = cum[i - 1] + 0.5 * dt * (w[i - 1] + w[i]);
    }
    let mut k = 0.0_f64;
    for i in lag + 1..w.len() {
        let integral = cum[i] - cum[i - lag];
        if integral > 0.0 {
            k = k.max(w[i] / (sup_c * integral));
        } else if w[i] > 0.0 {
            return Some(f64::INFINITY);
        }
    }
    Some(k)
}
