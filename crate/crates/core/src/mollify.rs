//! Smooth compactly supported approximants of rough initial data and the
//! convergence study of the solutions they generate.

use crate::analysis::{self, FitReport};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::norms;
use crate::problem::{reduce_to_first_order, InitialData, ProblemSpec};
use crate::solver::{self, StepScheme};

/// Level `l` of the approximating sequence. Requires `l >= 2` so that
/// `kernel_width < cutoff_margin < 1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MollifierParams {
    level: u32,
}

impl MollifierParams {
    pub fn new(level: u32) -> Result<Self> {
        if level < 2 {
            return Err(Error::Spec(format!(
                "mollifier level must be at least 2 so the support stays inside (0,1), got {level}"
            )));
        }
        Ok(MollifierParams { level })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `1 / (4 l)`
    pub fn kernel_width(&self) -> f64 {
        0.25 / self.level as f64
    }

    /// `1 / (2 l)`
    pub fn cutoff_margin(&self) -> f64 {
        0.5 / self.level as f64
    }
}

/// `C^inf` step from 0 at `s <= 0` to 1 at `s >= 1`.
fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
}

/// Zero on `[0, m]` and `[1 - m, 1]`, one on `[2m, 1 - 2m]`, smooth ramps between.
pub fn cutoff(x: f64, params: MollifierParams) -> f64 {
    let m = params.cutoff_margin();
    smoothstep((x - m) / m) * smoothstep((1.0 - x - m) / m)
}

/// Unit-mass samples of `exp(-1/(1-s^2))` on the nodes strictly inside the
/// kernel radius.
fn kernel(dx: f64, width: f64) -> Vec<f64> {
    let r = (width / dx).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * r)
        .map(|i| {
            let s = (i as f64 - r as f64) * dx / width;
            if s.abs() < 1.0 {
                (-1.0 / (1.0 - s * s)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let mass: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= mass);
    k
}

/// Cutoff, then discrete convolution with the normalized bump. The result
/// vanishes on `[0, margin - width]` and `[1 - margin + width, 1]`.
pub fn mollify(f: &[f64], params: MollifierParams) -> Result<Vec<f64>> {
    if f.len() < 2 {
        return Err(Error::Spec("mollify needs at least 2 samples".into()));
    }
    crate::error::check_finite(f, "mollifier input")?;
    let n = f.len() - 1;
    let dx = 1.0 / n as f64;
    let width = params.kernel_width();
    if !(dx < width / 4.0) {
        return Err(Error::Resolution { dx, width });
    }
    let cut: Vec<f64> = f
        .iter()
        .enumerate()
        .map(|(j, v)| v * cutoff(j as f64 * dx, params))
        .collect();
    let k = kernel(dx, width);
    let r = (k.len() - 1) / 2;
    Ok((0..=n)
        .map(|j| {
            k.iter()
                .enumerate()
                .filter_map(|(i, kv)| {
                    let idx = (j + i).checked_sub(r)?;
                    cut.get(idx).map(|v| kv * v)
                })
                .sum()
        })
        .collect())
}

/// Mollifies `w0` and `w1` separately, then reduces to first-order data.
pub fn mollified_data(w0: &[f64], w1: &[f64], a: f64, params: MollifierParams) -> Result<InitialData> {
    reduce_to_first_order(&mollify(w0, params)?, &mollify(w1, params)?, a)
}

/// One line of the convergence table, comparing levels `l` and `l_next`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneralizedRow {
    pub l: u32,
    pub l_next: u32,
    /// Sup over recorded times of `|w^l - w^l'|_{L^2}`.
    pub sup_w_distance: f64,
    /// Sup over recorded times of `|u^l - u^l'|_{L^2}`.
    pub sup_u_distance: f64,
    /// `max_i |phi_i^l - phi_i^l'|_{L^2}`
    pub data_l2_distance: f64,
    /// `|w0^l - w0^l'|_{H^1}`
    pub w0_h1_distance: f64,
    /// `M3 e^{A horizon} * data_l2_distance`
    pub bound: f64,
}

impl GeneralizedRow {
    pub fn distance(&self) -> f64 {
        self.sup_w_distance.max(self.sup_u_distance)
    }

    pub fn within_bound(&self) -> bool {
        self.distance() <= self.bound * (1.0 + analysis::ENVELOPE_SLACK)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedTable {
    pub rows: Vec<GeneralizedRow>,
    /// Growth envelope of `max(W, U)` pooled over the individual runs,
    /// normalized by each run's `max_i |phi_i|_{L^2}`.
    pub growth: FitReport,
    pub horizon: f64,
}

impl GeneralizedTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].distance() < w[0].distance())
    }

    pub fn all_within_bound(&self) -> bool {
        self.rows.iter().all(GeneralizedRow::within_bound)
    }
}

/// Solves with mollified data at every level of `l_list` and tabulates the
/// distances between consecutive levels, sup over all steps up to the
/// horizon. Grid size is taken from `w0`.
pub fn generalized_solution_check(
    spec: &ProblemSpec,
    w0: &[f64],
    w1: &[f64],
    l_list: &[u32],
    exec: Exec,
) -> Result<GeneralizedTable> {
    spec.validate()?;
    if l_list.len() < 2 || l_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Spec("l list needs at least two strictly increasing levels".into()));
    }
    let params: Vec<MollifierParams> = l_list.iter().map(|&l| MollifierParams::new(l)).collect::<Result<_>>()?;
    let data: Vec<InitialData> = params
        .iter()
        .map(|&p| mollified_data(w0, w1, spec.a, p))
        .collect::<Result<_>>()?;
    let n = data[0].n_cells();
    let dx = data[0].dx();

    let runs = exec.try_map(&data, |d| {
        solver::solve(spec, d, n, usize::MAX).map(|traj| (traj.times(), traj.wu_l2(), d.system_normalizer()))
    })?;
    let series: Vec<(&[f64], &[f64], f64)> =
        runs.iter().map(|(t, v, s)| (t.as_slice(), v.as_slice(), *s)).collect();
    let growth = analysis::fit_growth_pooled(&series)?;
    let analysis::FitKind::Growth { a, m3 } = growth.kind else { unreachable!() };
    let amplification = m3 * (a * spec.horizon).exp();

    let pairs: Vec<usize> = (0..data.len() - 1).collect();
    let rows = exec.try_map(&pairs, |&i| -> Result<GeneralizedRow> {
        let (d1, d2) = (&data[i], &data[i + 1]);
        let scheme = StepScheme::default();
        let mut s1 = solver::init_state(spec, d1, n)?;
        let mut s2 = solver::init_state(spec, d2, n)?;
        let dist = |x: &[f64], y: &[f64]| {
            let e: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            norms::l2_unchecked(&e, dx)
        };
        let mut sup_w = dist(s1.w(), s2.w());
        let mut sup_u = dist(s1.u(), s2.u());
        for _ in 0..solver::step_count(spec.horizon, s1.dt()) {
            s1 = solver::step(&s1, spec, &scheme)?;
            s2 = solver::step(&s2, spec, &scheme)?;
            sup_w = sup_w.max(dist(s1.w(), s2.w()));
            sup_u = sup_u.max(dist(s1.u(), s2.u()));
        }
        let data_l2 = dist(d1.phi1(), d2.phi1()).max(dist(d1.phi2(), d2.phi2()));
        let dw0: Vec<f64> = d1.w0().iter().zip(d2.w0()).map(|(a, b)| a - b).collect();
        Ok(GeneralizedRow {
            l: l_list[i],
            l_next: l_list[i + 1],
            sup_w_distance: sup_w,
            sup_u_distance: sup_u,
            data_l2_distance: data_l2,
            w0_h1_distance: norms::h1_norm(&dw0, dx)?,
            bound: amplification * data_l2,
        })
    })?;
    Ok(GeneralizedTable { rows, growth, horizon: spec.horizon })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_follow_the_level() {
        let p = MollifierParams::new(4).unwrap();
        assert_eq!(p.kernel_width(), 1.0 / 16.0);
        assert_eq!(p.cutoff_margin(), 1.0 / 8.0);
        assert!(MollifierParams::new(1).is_err());
        assert!(MollifierParams::new(0).is_err());
    }

    #[test]
    fn constant_has_unit_plateau_and_vanishes_near_ends() {
        let p = MollifierParams::new(4).unwrap();
        let n = 400;
        let g = mollify(&vec![1.0; n + 1], p).unwrap();
        for (j, v) in g.iter().enumerate() {
            let x = j as f64 / n as f64;
            if x <= p.cutoff_margin() - p.kernel_width() || x >= 1.0 - p.cutoff_margin() + p.kernel_width() {
                assert_eq!(*v, 0.0, "x = {x}");
            }
            if x >= 0.25 + p.kernel_width() + 1e-12 && x <= 0.75 - p.kernel_width() - 1e-12 {
                assert!((v - 1.0).abs() < 1e-14, "x = {x}, v = {v}");
            }
        }
    }

    #[test]
    fn zero_maps_to_zero_and_coarse_grids_fail() {
        let p = MollifierParams::new(2).unwrap();
        assert!(mollify(&vec![0.0; 101], p).unwrap().iter().all(|v| *v == 0.0));
        // width/4 = 1/32 needs dx < 1/32
        assert!(matches!(mollify(&vec![1.0; 33], p), Err(Error::Resolution { .. })));
        assert!(mollify(&vec![1.0; 34], p).is_ok());
    }

    #[test]
    fn smoothstep_is_symmetric() {
        for s in [0.1, 0.25, 0.4, 0.5] {
            assert!((smoothstep(s) + smoothstep(1.0 - s) - 1.0).abs() < 1e-15);
        }
        assert_eq!(smoothstep(0.5), 0.5);
    }
}
