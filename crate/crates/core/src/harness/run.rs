use std::time::Instant;

use crate::error::{HsError, Result};
use crate::euler_data::{EnergyMeasure, EulerianSolution, InitialDatum, PiecewiseLinear, Side};
use crate::evolution::{events, evolve};
use crate::lagrangian::{to_lagrangian, LagrangianState};
use crate::metrics::{dbl_upper, w1};
use crate::projection::{project, projection_error, ProjectedDatum, ProjectionConfig};
use crate::pushforward::to_eulerian;
use crate::reference::{ReferenceSolution, Snapshot};

use super::config::{dx_for_k, ExperimentConfig};
use super::report::EocReport;

/// Projected datum and its Lagrangian state at time 0, for one grid.
pub struct Pipeline {
    pub datum: InitialDatum,
    pub projection: ProjectionConfig,
    pub projected: ProjectedDatum,
    pub state: LagrangianState,
}

impl Pipeline {
    pub fn new(cfg: &ExperimentConfig, dx: f64) -> Result<Self> {
        let datum = cfg.example.datum()?;
        let projection = ProjectionConfig::for_datum(&datum, dx)?.with_sign_rule(cfg.sign_rule.into());
        let projected = project(&datum, &projection)?;
        let state = to_lagrangian(&projected, cfg.alpha);
        Ok(Self {
            datum,
            projection,
            projected,
            state,
        })
    }

    pub fn solution(&self, t: f64) -> Result<EulerianSolution> {
        to_eulerian(&evolve(&self.state, t)?)
    }

    /// Breaking times of the numerical solution in `(0, t_end]`.
    pub fn event_times(&self, t_end: f64) -> Vec<f64> {
        events(&self.state, t_end).times
    }
}

/// `samples` uniform times in `[0, t_end]` merged with `extra` times inside.
pub fn time_grid(t_end: f64, samples: usize, extra: &[f64]) -> Vec<f64> {
    let n = samples.max(2);
    let mut ts: Vec<f64> = (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect();
    ts.extend(extra.iter().copied().filter(|&t| t > 0.0 && t <= t_end));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

pub struct SolveOutput {
    /// Requested times merged with the event times up to their maximum.
    pub times: Vec<f64>,
    /// Whether `times[i]` was requested (as opposed to an appended event).
    pub requested: Vec<bool>,
    pub solutions: Vec<EulerianSolution>,
    pub event_times: Vec<f64>,
}

/// Runs projection, evolution and reconstruction at each requested time and
/// at every breaking time up to the last one.
pub fn run_solve(cfg: &ExperimentConfig, dx: f64, t_list: &[f64]) -> Result<SolveOutput> {
    if let Some(t) = t_list.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(HsError::Config(format!("output times must be finite and nonnegative (got {t})")));
    }
    let pipe = Pipeline::new(cfg, dx)?;
    let t_max = t_list.iter().copied().fold(0.0, f64::max);
    let event_times = pipe.event_times(t_max);
    let mut times: Vec<f64> = t_list.iter().copied().chain(event_times.iter().copied()).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let requested = times.iter().map(|t| t_list.contains(t)).collect();
    let solutions = times.iter().map(|&t| pipe.solution(t)).collect::<Result<Vec<_>>>()?;
    Ok(SolveOutput {
        times,
        requested,
        solutions,
        event_times,
    })
}

/// Sample points for the sup-norm: nodes of the numerical solution, segment
/// midpoints, reference kinks, and one point beyond each end.
fn sample_points(sol: &EulerianSolution, kinks: &[f64]) -> Vec<f64> {
    let nodes = sol.u.nodes();
    let mut xs = Vec::with_capacity(2 * nodes.len() + kinks.len() + 2);
    xs.push(nodes[0] - 1.0);
    for w in nodes.windows(2) {
        xs.push(w[0]);
        xs.push(0.5 * (w[0] + w[1]));
    }
    xs.push(nodes[nodes.len() - 1]);
    xs.push(nodes[nodes.len() - 1] + 1.0);
    xs.extend(kinks.iter().copied().filter(|x| x.is_finite()));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Relative sup error at one time, plus whether the absolute error had to be
/// used because the reference vanishes.
pub fn relative_sup_error(sol: &EulerianSolution, snap: &Snapshot<'_>) -> Result<(f64, bool)> {
    let xs = sample_points(sol, &snap.kinks());
    let exact = snap.u_many(&xs)?;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (x, ue) in xs.iter().zip(&exact) {
        num = num.max((ue - sol.u.eval(*x)).abs());
        den = den.max(ue.abs());
    }
    if den == 0.0 {
        Ok((num, true))
    } else {
        Ok((num / den, false))
    }
}

/// `sup_t ||u(t) - u_dx(t)||_inf / ||u(t)||_inf` over the time grid.
pub fn sup_error(pipe: &Pipeline, reference: &ReferenceSolution, t_end: f64, time_samples: usize) -> Result<(f64, bool)> {
    let grid = time_grid(t_end, time_samples, &pipe.event_times(t_end));
    let mut worst = 0.0f64;
    let mut absolute = false;
    for t in grid {
        let sol = pipe.solution(t)?;
        let snap = reference.snapshot(t)?;
        let (e, abs) = relative_sup_error(&sol, &snap)?;
        worst = worst.max(e);
        absolute |= abs;
    }
    Ok((worst, absolute))
}

/// `Err_k(T)` and `EOC_k(T)` over the configured ladder.
pub fn run_eoc(cfg: &ExperimentConfig) -> Result<EocReport> {
    cfg.validate()?;
    let start = Instant::now();
    let reference = cfg.example.reference(cfg.alpha, &cfg.tolerances)?;
    let mut report = EocReport::new(cfg.example.id(), "linf_u".into(), cfg.alpha, cfg.t_end, cfg.time_samples);
    for k in cfg.ks() {
        let dx = dx_for_k(k);
        let pipe = Pipeline::new(cfg, dx)?;
        let (err, absolute) = sup_error(&pipe, &reference, cfg.t_end, cfg.time_samples)?;
        if absolute {
            report.flags.push(format!("k={k}: reference vanished at some time; absolute error used there"));
        }
        report.push(k, dx, err);
    }
    report.flags.push(format!(
        "time grid: {} uniform samples in [0, T] plus every numerical breaking time",
        cfg.time_samples
    ));
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// `||u_x - (P u)_x||_2` of the initial projection over the ladder.
pub fn run_projection_rates(cfg: &ExperimentConfig) -> Result<EocReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut report = EocReport::new(cfg.example.id(), "l2_ux".into(), cfg.alpha, 0.0, 1);
    for k in cfg.ks() {
        let dx = dx_for_k(k);
        let pipe = Pipeline::new(cfg, dx)?;
        let e = projection_error(&pipe.datum, &pipe.projected)?;
        report.push(k, dx, e.l2_ux);
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Reference energy measure at one time, sampled as a piecewise-linear
/// cumulative function on `n` uniform points plus `extra` abscissae.
pub fn sampled_reference_measure(snap: &Snapshot<'_>, extra: &[f64], n: usize) -> Result<EnergyMeasure> {
    let kinks = snap.kinks();
    let lo = kinks.iter().chain(extra).copied().fold(f64::INFINITY, f64::min) - 1.0;
    let hi = kinks.iter().chain(extra).copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let mut xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    xs.extend(kinks.iter().copied().chain(extra.iter().copied()));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut fs = Vec::with_capacity(xs.len());
    let mut prev = 0.0f64;
    for &x in &xs {
        let f = snap.eval_f(x, Side::Left)?.max(prev);
        fs.push(f);
        prev = f;
    }
    fs[0] = 0.0;
    EnergyMeasure::new(PiecewiseLinear::new(xs, fs)?, Vec::new())
}

/// W1 and bounded-Lipschitz upper bound between reference and numerical
/// energy measures at each probe time. Conservative runs only.
pub fn run_measure_rates(cfg: &ExperimentConfig) -> Result<Vec<EocReport>> {
    cfg.validate()?;
    if cfg.alpha != 0.0 {
        return Err(HsError::UnsupportedMode(format!(
            "measure rates need alpha = 0 (got {}); total energies differ otherwise",
            cfg.alpha
        )));
    }
    const REFERENCE_POINTS: usize = 1 << 15;
    let start = Instant::now();
    let reference = cfg.example.reference(cfg.alpha, &cfg.tolerances)?;
    let probes = if cfg.probe_times.is_empty() {
        vec![cfg.t_end]
    } else {
        cfg.probe_times.clone()
    };
    let id = cfg.example.id();
    let mut out = Vec::new();
    for &t in &probes {
        let mut rep_w1 = EocReport::new(id.clone(), format!("w1@t={t}"), cfg.alpha, t, 1);
        let mut rep_dbl = EocReport::new(id.clone(), format!("dbl_upper@t={t}"), cfg.alpha, t, 1);
        rep_dbl.flags.push("UPPER_BOUND: d_BL <= W1".into());
        let snap = reference.snapshot(t)?;
        for k in cfg.ks() {
            let dx = dx_for_k(k);
            let pipe = Pipeline::new(cfg, dx)?;
            let sol = pipe.solution(t)?;
            let mut extra: Vec<f64> = sol.u.nodes().to_vec();
            extra.extend(sol.mu.atoms().iter().map(|a| a.position));
            let mu_ref = sampled_reference_measure(&snap, &extra, REFERENCE_POINTS)?;
            let d = w1(&mu_ref, &sol.mu)?;
            let b = dbl_upper(&mu_ref, &sol.mu)?;
            if d == 0.0 {
                rep_w1.flags.push(format!("k={k}: zero distance"));
                rep_dbl.flags.push(format!("k={k}: zero distance"));
            }
            rep_w1.push(k, dx, d);
            rep_dbl.push(k, dx, b);
        }
        let elapsed = start.elapsed().as_secs_f64();
        rep_w1.wall_time_s = elapsed;
        rep_dbl.wall_time_s = elapsed;
        out.push(rep_w1);
        out.push(rep_dbl);
    }
    Ok(out)
}
