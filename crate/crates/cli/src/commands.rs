//! One function per subcommand. Each validates its inputs, runs the
//! computation and writes its CSV files into `out`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use wavelab_core::analysis::{self, FitKind, DERIVATIVE_ORDERS};
use wavelab_core::manufactured::DecayingSine;
use wavelab_core::mollify::generalized_solution_check;
use wavelab_core::oracle::{verify_against_solver, PicardOptions, VerifyOptions};
use wavelab_core::problem::mirror_problem;
use wavelab_core::{solver, Error, Exec, InitialData, Orientation, ProblemSpec, StepScheme, Trajectory};

use crate::config::ScenarioConfig;
use crate::output::{emit_plot_script, num, num_or_none, Table, EXTINCT, NONE};

/// What a command produced, for the summary printed by `main`.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

impl Report {
    fn write(&mut self, table: &Table, path: PathBuf) -> anyhow::Result<()> {
        table.write(&path)?;
        self.files.push(path);
        Ok(())
    }

    fn plot(&mut self, cfg: &ScenarioConfig, csv: &Path, columns: &[&str]) -> anyhow::Result<()> {
        if cfg.emit_plots {
            self.files.push(emit_plot_script(csv, columns)?);
        }
        Ok(())
    }
}

fn norms_table(traj: &Trajectory) -> anyhow::Result<Table> {
    let mut t = Table::new(&["t", "W", "U", "sup_w", "sup_u"]);
    for r in traj.norms() {
        t.push(vec![num(r.t)?, num(r.w_l2)?, num(r.u_l2)?, num(r.w_sup)?, num(r.u_sup)?]);
    }
    Ok(t)
}

/// Describes the endpoint overwrite applied at `t = 0`, if it changed anything.
fn boundary_note(spec: &ProblemSpec, data: &InitialData) -> anyhow::Result<Option<String>> {
    let (old_w, new_w, old_u) = match spec.orientation {
        Orientation::LeftSmoothing => solver::boundary_adjustment(spec, data),
        Orientation::RightSmoothing => solver::boundary_adjustment(&mirror_problem(spec)?, &data.reflected(spec.a)?),
    };
    Ok((old_w != new_w || old_u != 0.0).then(|| {
        format!("data incompatible with the boundary conditions: reflecting end w {old_w:e} -> {new_w:e}, absorbing end u {old_u:e} -> 0")
    }))
}

fn trajectory(cfg: &ScenarioConfig, rep: &mut Report) -> anyhow::Result<(Trajectory, Option<DecayingSine>)> {
    let spec = cfg.spec()?;
    let n = cfg.grid_n()?;
    if cfg.manufactured {
        if spec.orientation != Orientation::LeftSmoothing {
            bail!("forcing.manufactured supports problem.orientation = left only");
        }
        let m = DecayingSine { a: spec.a };
        let scheme = StepScheme::default().with_forcing(m.forcing(&spec));
        let every = cfg.record_every;
        let traj = solver::solve_with(&spec, &m.initial_data(n)?, n, &scheme, |s| s % every == 0)?;
        return Ok((traj, Some(m)));
    }
    let data = cfg.data_source()?.initial_data(n, spec.a)?;
    rep.warnings.extend(boundary_note(&spec, &data)?);
    Ok((solver::solve_oriented(&spec, &data, n, cfg.record_every)?, None))
}

/// `norms.csv`, optional `state_<step>.csv` snapshots and, for the
/// manufactured solution, `mms_error.csv`.
pub fn solve(cfg: &ScenarioConfig, out: &Path) -> anyhow::Result<Report> {
    let mut rep = Report::default();
    let (traj, mms) = trajectory(cfg, &mut rep)?;
    let norms = out.join("norms.csv");
    rep.write(&norms_table(&traj)?, norms.clone())?;
    rep.plot(cfg, &norms, &["W", "U"])?;
    if cfg.snapshots {
        for s in traj.states() {
            let mut t = Table::new(&["x", "w", "u"]);
            for j in 0..=s.n_cells() {
                t.push(vec![num(s.x(j))?, num(s.w()[j])?, num(s.u()[j])?]);
            }
            rep.write(&t, out.join(format!("state_{}.csv", s.step())))?;
        }
    }
    if let Some(m) = mms {
        let mut t = Table::new(&["t", "w_error"]);
        for s in traj.states() {
            t.push(vec![num(s.t())?, num(m.w_error(s))?]);
        }
        rep.write(&t, out.join("mms_error.csv"))?;
    }
    Ok(rep)
}

/// `extinction.csv`: observed extinction time for each tolerance next to `2/a`.
pub fn extinction(cfg: &ScenarioConfig, out: &Path) -> anyhow::Result<Report> {
    let mut rep = Report::default();
    let (traj, _) = trajectory(cfg, &mut rep)?;
    let a = cfg.spec()?.a;
    let mut t = Table::new(&["tol", "t_star", "two_over_a"]);
    for &tol in &cfg.tols {
        t.push(vec![num(tol)?, num_or_none(analysis::extinction_time(&traj, tol)), num(2.0 / a)?]);
    }
    rep.write(&t, out.join("extinction.csv"))?;
    Ok(rep)
}

/// `decay.csv`: one decay fit per epsilon with `c = epsilon * problem.c`,
/// rows ordered by epsilon descending. An extinct trajectory gets the
/// `extinct` marker in place of gamma.
pub fn decay_sweep(cfg: &ScenarioConfig, out: &Path, exec: Exec) -> anyhow::Result<Report> {
    let spec = cfg.spec()?;
    let n = cfg.grid_n()?;
    let window = cfg.require_window()?;
    let mut eps = cfg.require_epsilons()?.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    if cfg.c.is_zero() && eps.iter().any(|e| *e > 0.0) {
        bail!("decay-sweep scales problem.c by each epsilon; set problem.c to a nonzero shape");
    }
    let data = cfg.data_source()?.initial_data(n, spec.a)?;
    let fits = exec.try_map(&eps, |&e| -> anyhow::Result<Option<analysis::FitReport>> {
        let s = wavelab_core::ProblemSpec { c: spec.c.scaled(e), ..spec.clone() };
        let traj = solver::solve_oriented(&s, &data, n, usize::MAX)?;
        match analysis::fit_decay_rate(&traj, window, cfg.floor, data.wave_normalizer()) {
            Ok(f) => Ok(Some(f)),
            Err(Error::InsufficientData(_)) if traj.norms().last().is_some_and(|r| r.w_l2 <= cfg.floor) => Ok(None),
            Err(e) => Err(e.into()),
        }
    })?;
    let mut t = Table::new(&["epsilon", "gamma", "M", "rms", "window_lo", "window_hi"]);
    for (e, fit) in eps.iter().zip(fits) {
        let row = match fit {
            Some(f) => {
                let FitKind::Decay { gamma, m } = f.kind else { unreachable!() };
                vec![num(*e)?, num(gamma)?, num(m)?, num(f.rms_residual)?]
            }
            None => vec![num(*e)?, EXTINCT.into(), NONE.into(), NONE.into()],
        };
        let mut row = row;
        row.extend([num(window.0)?, num(window.1)?]);
        t.push(row);
    }
    let mut rep = Report::default();
    let path = out.join("decay.csv");
    rep.write(&t, path.clone())?;
    rep.plot(cfg, &path, &["gamma"])?;
    Ok(rep)
}

const NORM_COLS: [&str; 6] = ["d00", "d10", "d01", "d20", "d11", "d02"];
const RATIO_COLS: [&str; 6] = ["r00", "r10", "r01", "r20", "r11", "r02"];

/// `smoothing.csv` (discrete `C^2` norms) and `smoothing_ratios.csv`
/// (refinement ratios between consecutive resolutions).
pub fn smoothing(cfg: &ScenarioConfig, out: &Path, exec: Exec) -> anyhow::Result<Report> {
    let spec = cfg.spec()?;
    if spec.orientation != Orientation::LeftSmoothing {
        bail!("smoothing supports problem.orientation = left only");
    }
    let r = analysis::smoothing_report(&spec, &cfg.data_source()?, cfg.require_n_list()?, cfg.require_query_times()?, exec)?;
    let mut rep = Report::default();
    if r.coefficient_c2.is_none() {
        rep.warnings.push("problem.c is a sampled grid: outside the smoothness hypothesis".into());
    }
    let mut header = vec!["N", "t"];
    header.extend(NORM_COLS);
    let mut norms = Table::new(&header);
    for (n, per_t) in r.n_list.iter().zip(&r.norms) {
        for (t, c) in r.times.iter().zip(per_t) {
            let mut row = vec![n.to_string(), num(*t)?];
            for v in c.0 {
                row.push(num(v)?);
            }
            norms.push(row);
        }
    }
    let mut header = vec!["N", "N_next", "t"];
    header.extend(RATIO_COLS);
    let mut ratios = Table::new(&header);
    for (i, per_t) in r.ratios.iter().enumerate() {
        for (t, rs) in r.times.iter().zip(per_t) {
            let mut row = vec![r.n_list[i].to_string(), r.n_list[i + 1].to_string(), num(*t)?];
            row.extend(rs.iter().map(|v| num_or_none(*v)));
            ratios.push(row);
        }
    }
    debug_assert_eq!(DERIVATIVE_ORDERS.len(), NORM_COLS.len());
    rep.write(&norms, out.join("smoothing.csv"))?;
    rep.write(&ratios, out.join("smoothing_ratios.csv"))?;
    Ok(rep)
}

/// `verify.csv`: stepper against the Picard reference at each `N`.
/// Non-converged rows are flagged, not fatal.
pub fn verify(cfg: &ScenarioConfig, out: &Path, exec: Exec) -> anyhow::Result<Report> {
    let spec = cfg.spec()?;
    if spec.orientation != Orientation::LeftSmoothing {
        bail!("verify supports problem.orientation = left only");
    }
    if !spec.a1.is_zero() {
        bail!("verify needs problem.a1 = 0");
    }
    let opts = VerifyOptions {
        n_list: cfg.require_n_list()?.to_vec(),
        t0: cfg.t0.unwrap_or(4.0 / spec.a),
        t_end: cfg.t_end.unwrap_or(spec.horizon),
        refine: cfg.refine,
        picard: PicardOptions { tol: cfg.picard_tol, max_iter: cfg.picard_max_iter, exec },
    };
    if opts.t_end <= opts.t0 {
        bail!("run.t_end ({}) must exceed run.t0 ({})", opts.t_end, opts.t0);
    }
    let rows = verify_against_solver(&spec, &cfg.data_source()?, &opts)?;
    let mut t = Table::new(&["N", "sup_discrepancy", "observed_order", "iterations", "final_residual", "converged"]);
    let mut rep = Report::default();
    for r in &rows {
        if !r.converged {
            rep.warnings.push(format!("Picard iteration did not converge at N = {}", r.n));
        }
        t.push(vec![
            r.n.to_string(),
            num_or_none(Some(r.sup_discrepancy)),
            num_or_none(r.observed_order),
            r.iterations.to_string(),
            num_or_none(Some(r.final_residual)),
            r.converged.to_string(),
        ]);
    }
    let path = out.join("verify.csv");
    rep.write(&t, path.clone())?;
    rep.plot(cfg, &path, &["sup_discrepancy"])?;
    Ok(rep)
}

/// `mollify.csv` (distances between consecutive levels) and
/// `mollify_growth.csv` (the pooled growth envelope).
pub fn mollify_study(cfg: &ScenarioConfig, out: &Path, exec: Exec) -> anyhow::Result<Report> {
    let spec = cfg.spec()?;
    if spec.orientation != Orientation::LeftSmoothing {
        bail!("mollify-study supports problem.orientation = left only");
    }
    let n = cfg.grid_n()?;
    let src = cfg.data_source()?;
    let table = generalized_solution_check(&spec, &src.w0.sample(n), &src.w1.sample(n), cfg.require_l_list()?, exec)
        .context("mollify-study failed")?;
    let mut t = Table::new(&[
        "l",
        "l_next",
        "sup_w_distance",
        "sup_u_distance",
        "data_l2_distance",
        "w0_h1_distance",
        "bound",
        "within_bound",
    ]);
    for r in &table.rows {
        t.push(vec![
            r.l.to_string(),
            r.l_next.to_string(),
            num(r.sup_w_distance)?,
            num(r.sup_u_distance)?,
            num(r.data_l2_distance)?,
            num(r.w0_h1_distance)?,
            num(r.bound)?,
            r.within_bound().to_string(),
        ]);
    }
    let FitKind::Growth { a, m3 } = table.growth.kind else { unreachable!() };
    let mut g = Table::new(&["A", "M3", "horizon"]);
    g.push(vec![num(a)?, num(m3)?, num(table.horizon)?]);
    let mut rep = Report::default();
    if !table.strictly_decreasing() {
        rep.warnings.push("distances are not strictly decreasing down the l list".into());
    }
    rep.write(&t, out.join("mollify.csv"))?;
    rep.write(&g, out.join("mollify_growth.csv"))?;
    Ok(rep)
}
