//! Exact solution operator of the Lagrangian system
//!
//! ```text
//! y_t = U,   U_t = V/2 - V_inf/4,
//! V(t, xi) = int_{-inf}^{xi} (1 - alpha chi{t >= tau > 0}) V̄_xi d eta.
//! ```
//!
//! `V` is piecewise constant in time, so `U` is piecewise linear and `y`
//! piecewise quadratic. Both are evaluated in closed form from the data at
//! time 0: a cell `c` breaking at `tau_c` removes `D_c = alpha E_c` from every
//! node to its right, which contributes `D_c (t - tau_c)` to the time integral
//! of `V` and `D_c (t - tau_c)^2 / 2` to the double integral.

use std::collections::BTreeMap;

use crate::error::{HsError, Result};
use crate::euler_data::neumaier_sum;
use crate::lagrangian::LagrangianState;

/// Breaking times in `(0, T]` and the cells breaking at each.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct EventSchedule {
    pub times: Vec<f64>,
    pub cells_at: BTreeMap<usize, Vec<usize>>,
}

impl EventSchedule {
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Cells breaking at `times[i]`.
    pub fn cells(&self, i: usize) -> &[usize] {
        self.cells_at.get(&i).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Events of `s` in `(s.time, t_end]`. Breaking times are already clustered at
/// construction, so equal times are exactly equal here.
pub fn events(s: &LagrangianState, t_end: f64) -> EventSchedule {
    let tau = s.tau();
    let mut cells: Vec<usize> = (0..tau.len())
        .filter(|&c| tau[c] > 0.0 && tau[c] <= t_end && !s.broken[c])
        .collect();
    cells.sort_by(|&a, &b| tau[a].total_cmp(&tau[b]).then(a.cmp(&b)));
    let mut out = EventSchedule::default();
    for c in cells {
        if out.times.last() != Some(&tau[c]) {
            out.times.push(tau[c]);
        }
        out.cells_at.entry(out.times.len() - 1).or_default().push(c);
    }
    out
}

/// Current total energy `V_inf`.
pub fn total_energy(s: &LagrangianState) -> f64 {
    s.v_inf
}

/// State at time `t >= s.time`, with every event at `tau <= t` applied.
pub fn evolve(s: &LagrangianState, t: f64) -> Result<LagrangianState> {
    evolve_impl(s, t, true)
}

/// Left limit at `t`: events at exactly `t` are not yet applied. The nodal
/// positions and velocities coincide with [`evolve`]; only `V` differs.
pub fn evolve_before(s: &LagrangianState, t: f64) -> Result<LagrangianState> {
    evolve_impl(s, t, false)
}

fn evolve_impl(s: &LagrangianState, t: f64, inclusive: bool) -> Result<LagrangianState> {
    if !t.is_finite() || t < s.time {
        return Err(HsError::InvalidTime {
            requested: t,
            current: s.time,
        });
    }
    if t == s.time && inclusive {
        return Ok(s.clone());
    }
    let init = &s.init;
    let alpha = s.alpha;
    let n_cells = init.tau.len();
    let is_broken = |c: usize| {
        let tau = init.tau[c];
        tau > 0.0 && (tau < t || (inclusive && tau == t))
    };

    // Prefix sums over broken cells to the left of each node.
    let n_nodes = n_cells + 1;
    let mut dp = Vec::with_capacity(n_nodes);
    let mut a = Vec::with_capacity(n_nodes);
    let mut b = Vec::with_capacity(n_nodes);
    let (mut sd, mut sa, mut sb) = (Kahan::default(), Kahan::default(), Kahan::default());
    let mut broken = vec![false; n_cells];
    dp.push(0.0);
    a.push(0.0);
    b.push(0.0);
    for c in 0..n_cells {
        if is_broken(c) {
            broken[c] = true;
            let d = alpha * init.energy[c];
            let since = t - init.tau[c];
            sd.add(d);
            sa.add(d * since);
            sb.add(0.5 * d * since * since);
        }
        dp.push(sd.value());
        a.push(sa.value());
        b.push(sb.value());
    }
    let v_inf0 = init.v[n_nodes - 1];
    let (dp_inf, a_inf, b_inf) = (dp[n_nodes - 1], a[n_nodes - 1], b[n_nodes - 1]);
    let half_t2 = 0.5 * t * t;
    let drift_u = 0.25 * (v_inf0 * t - a_inf);
    let drift_y = 0.25 * (v_inf0 * half_t2 - b_inf);

    let mut y = Vec::with_capacity(n_nodes);
    let mut u = Vec::with_capacity(n_nodes);
    let mut v = Vec::with_capacity(n_nodes);
    for j in 0..n_nodes {
        let v0 = init.v[j];
        v.push(v0 - dp[j]);
        u.push(init.u[j] + 0.5 * (v0 * t - a[j]) - drift_u);
        y.push(init.y[j] + init.u[j] * t + 0.5 * (v0 * half_t2 - b[j]) - drift_y);
    }

    let mut d_y = Vec::with_capacity(n_cells);
    let mut d_u = Vec::with_capacity(n_cells);
    let mut d_v = Vec::with_capacity(n_cells);
    for c in 0..n_cells {
        let (y0, u0, v0) = (init.d_y[c], init.d_u[c], init.d_v[c]);
        if broken[c] {
            let since = t - init.tau[c];
            let kept = (1.0 - alpha) * v0;
            d_y.push(0.25 * kept * since * since);
            d_u.push(0.5 * kept * since);
            d_v.push(kept);
        } else if y0 > 0.0 {
            let r = 1.0 + t * u0 / (2.0 * y0);
            d_y.push(y0 * r * r);
            d_u.push(u0 * r);
            d_v.push(v0);
        } else {
            d_y.push(0.25 * v0 * t * t);
            d_u.push(0.5 * v0 * t);
            d_v.push(v0);
        }
    }

    Ok(LagrangianState {
        init: s.init.clone(),
        time: t,
        alpha,
        y,
        u,
        v,
        d_y,
        d_u,
        d_v,
        broken,
        v_inf: v_inf0 - dp_inf,
    })
}

#[derive(Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Classical RK4 integration of the nodal system from `s.time` to `t` with
/// `n_steps` equal steps. A step containing a breaking time is split there, so
/// dissipation is applied at `tau` itself. Test oracle for [`evolve`].
pub fn brute_force_oracle(s: &LagrangianState, t: f64, n_steps: usize) -> Result<LagrangianState> {
    if n_steps == 0 {
        return Err(HsError::InvalidInput("brute-force oracle needs at least one step".into()));
    }
    if !t.is_finite() || t < s.time {
        return Err(HsError::InvalidTime {
            requested: t,
            current: s.time,
        });
    }
    let n_nodes = s.y.len();
    let n_cells = n_nodes - 1;
    let alpha = s.alpha;
    let tau = s.tau().to_vec();
    let mut broken = s.broken.clone();
    let mut inc: Vec<f64> = s.v.windows(2).map(|w| w[1] - w[0]).collect();
    let v_left = s.v[0];
    let mut y = s.y.clone();
    let mut u = s.u.clone();
    let mut v = s.v.clone();

    let rebuild = |inc: &[f64], v: &mut Vec<f64>| {
        v[0] = v_left;
        for c in 0..inc.len() {
            v[c + 1] = v[c] + inc[c];
        }
    };

    let mut pending: Vec<usize> = (0..n_cells).filter(|&c| tau[c] > 0.0 && tau[c] <= t && !broken[c]).collect();
    pending.sort_by(|&a, &b| tau[a].total_cmp(&tau[b]));
    let mut next = 0usize;

    // Force is piecewise constant in time, but we integrate the general
    // first-order system (y, U)' = (U, V/2 - V_inf/4) regardless.
    let rk4 = |y: &mut [f64], u: &mut [f64], v: &[f64], h: f64| {
        let v_inf = v[v.len() - 1];
        for j in 0..y.len() {
            let acc = 0.5 * v[j] - 0.25 * v_inf;
            let (y0, u0) = (y[j], u[j]);
            let k1y = u0;
            let k1u = acc;
            let k2y = u0 + 0.5 * h * k1u;
            let k2u = acc;
            let k3y = u0 + 0.5 * h * k2u;
            let k3u = acc;
            let k4y = u0 + h * k3u;
            let k4u = acc;
            y[j] = y0 + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            u[j] = u0 + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        }
    };

    let t0 = s.time;
    let h = (t - t0) / n_steps as f64;
    let mut now = t0;
    for step in 1..=n_steps {
        let target = if step == n_steps { t } else { t0 + h * step as f64 };
        while next < pending.len() && tau[pending[next]] <= target {
            let te = tau[pending[next]];
            if te > now {
                rk4(&mut y, &mut u, &v, te - now);
                now = te;
            }
            while next < pending.len() && tau[pending[next]] == te {
                let c = pending[next];
                inc[c] *= 1.0 - alpha;
                broken[c] = true;
                next += 1;
            }
            rebuild(&inc, &mut v);
        }
        if target > now {
            rk4(&mut y, &mut u, &v, target - now);
            now = target;
        }
    }

    let xi = s.xi();
    let width = |c: usize| xi[c + 1] - xi[c];
    let d_y = (0..n_cells).map(|c| (y[c + 1] - y[c]) / width(c)).collect();
    let d_u = (0..n_cells).map(|c| (u[c + 1] - u[c]) / width(c)).collect();
    let d_v = (0..n_cells).map(|c| inc[c] / width(c)).collect();
    let v_inf = v_left + neumaier_sum(inc.iter().copied());
    Ok(LagrangianState {
        init: s.init.clone(),
        time: t,
        alpha,
        y,
        u,
        v,
        d_y,
        d_u,
        d_v,
        broken,
        v_inf,
    })
}

/// Largest nodal difference in `y`, `U` and `V` between two states.
pub fn nodal_max_diff(a: &LagrangianState, b: &LagrangianState) -> f64 {
    let diff = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    diff(&a.y, &b.y).max(diff(&a.u, &b.u)).max(diff(&a.v, &b.v))
}
