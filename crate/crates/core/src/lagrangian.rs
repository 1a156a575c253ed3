//! Lagrangian coordinates `(y, U, V)` of a projected datum.
//!
//! Every even Eulerian cell maps to at most three Lagrangian cells: the atom
//! carried at `x_{2j}` and the two half-cells. Each cell has constant
//! derivatives, so its breaking time is a single number.

use std::sync::Arc;

use crate::euler_data::Side;
use crate::projection::ProjectedDatum;

/// Breaking times closer than this are one event.
pub const TAU_TIE_TOL: f64 = 1e-12;

/// Time at which a cell with derivatives `(d_y, d_U)` at time 0 collapses.
pub fn breaking_time(d_y: f64, d_u: f64) -> f64 {
    if d_u == 0.0 && d_y == 0.0 {
        0.0
    } else if d_u < 0.0 {
        -2.0 * d_y / d_u
    } else {
        f64::INFINITY
    }
}

/// Data at time 0, shared by every state evolved from it.
#[derive(Debug)]
pub(crate) struct Initial {
    pub xi: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub d_y: Vec<f64>,
    pub d_u: Vec<f64>,
    pub d_v: Vec<f64>,
    /// Nodal energy increment `V_{c+1} - V_c` of each cell.
    pub energy: Vec<f64>,
    pub tau: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LagrangianState {
    pub(crate) init: Arc<Initial>,
    pub(crate) time: f64,
    pub(crate) alpha: f64,
    pub(crate) y: Vec<f64>,
    pub(crate) u: Vec<f64>,
    pub(crate) v: Vec<f64>,
    pub(crate) d_y: Vec<f64>,
    pub(crate) d_u: Vec<f64>,
    pub(crate) d_v: Vec<f64>,
    pub(crate) broken: Vec<bool>,
    pub(crate) v_inf: f64,
}

impl LagrangianState {
    pub fn xi(&self) -> &[f64] {
        &self.init.xi
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn d_y(&self) -> &[f64] {
        &self.d_y
    }

    pub fn d_u(&self) -> &[f64] {
        &self.d_u
    }

    pub fn d_v(&self) -> &[f64] {
        &self.d_v
    }

    /// Energy density `V̄_ξ` of each cell at time 0.
    pub fn d_v_initial(&self) -> &[f64] {
        &self.init.d_v
    }

    pub fn y_initial(&self) -> &[f64] {
        &self.init.y
    }

    pub fn u_initial(&self) -> &[f64] {
        &self.init.u
    }

    pub fn v_initial(&self) -> &[f64] {
        &self.init.v
    }

    pub fn tau(&self) -> &[f64] {
        &self.init.tau
    }

    pub fn broken(&self) -> &[bool] {
        &self.broken
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn v_inf(&self) -> f64 {
        self.v_inf
    }

    pub fn n_cells(&self) -> usize {
        self.init.tau.len()
    }

    pub fn cell_width(&self, c: usize) -> f64 {
        self.init.xi[c + 1] - self.init.xi[c]
    }

    /// `min_c (d_y + V̄_ξ)`; equals 1 for projected data.
    pub fn coercivity(&self) -> f64 {
        self.init
            .d_y
            .iter()
            .zip(&self.init.d_v)
            .map(|(a, b)| a + b)
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn from_initial(init: Initial, alpha: f64) -> Self {
        let n = init.tau.len();
        let v_inf = *init.v.last().expect("at least one node");
        Self {
            time: 0.0,
            alpha,
            y: init.y.clone(),
            u: init.u.clone(),
            v: init.v.clone(),
            d_y: init.d_y.clone(),
            d_u: init.d_u.clone(),
            d_v: init.d_v.clone(),
            broken: vec![false; n],
            v_inf,
            init: Arc::new(init),
        }
    }
}

/// Snaps breaking times that agree within [`TAU_TIE_TOL`] to the smallest
/// member of their cluster.
fn canonicalize_ties(tau: &mut [f64]) {
    let mut order: Vec<usize> = (0..tau.len()).filter(|&c| tau[c] > 0.0 && tau[c].is_finite()).collect();
    order.sort_by(|&a, &b| tau[a].total_cmp(&tau[b]));
    let mut start = 0;
    while start < order.len() {
        let base = tau[order[start]];
        let mut end = start + 1;
        while end < order.len() && tau[order[end]] - tau[order[end - 1]] < TAU_TIE_TOL {
            end += 1;
        }
        for &c in &order[start..end] {
            tau[c] = base;
        }
        start = end;
    }
}

/// Lagrangian state of a projected datum at time 0.
pub fn to_lagrangian(p: &ProjectedDatum, alpha: f64) -> LagrangianState {
    let dx = p.dx;
    let n_est = 3 * p.cells.len() + 1;
    let mut xi = Vec::with_capacity(n_est);
    let mut y = Vec::with_capacity(n_est);
    let mut u = Vec::with_capacity(n_est);
    let mut v = Vec::with_capacity(n_est);
    let mut d_y = Vec::with_capacity(n_est);
    let mut d_u = Vec::with_capacity(n_est);
    let mut d_v = Vec::with_capacity(n_est);

    let mut push_node = |x: f64, uu: f64, f: f64| {
        xi.push(x + f);
        y.push(x);
        u.push(uu);
        v.push(f);
    };

    let first = &p.cells[0];
    let x0 = first.j as f64 * 2.0 * dx;
    push_node(x0, p.u.eval(x0), p.mu.eval_cumulative(x0, Side::Left));

    for c in &p.cells {
        let x_left = c.j as f64 * 2.0 * dx;
        let x_mid = (2 * c.j + 1) as f64 * dx;
        let x_right = (2 * c.j + 2) as f64 * dx;
        let u_left = p.u.eval(x_left);
        if c.atom_mass > 0.0 {
            push_node(x_left, u_left, p.mu.eval_cumulative(x_left, Side::Right));
            d_y.push(0.0);
            d_u.push(0.0);
            d_v.push(1.0);
        }
        push_node(x_mid, p.u.eval(x_mid), p.mu.eval_cumulative(x_mid, Side::Left));
        push_node(x_right, p.u.eval(x_right), p.mu.eval_cumulative(x_right, Side::Left));
        for s in [c.first_slope, c.second_slope] {
            let w = 1.0 / (1.0 + s * s);
            d_y.push(w);
            d_u.push(s * w);
            d_v.push(s * s * w);
        }
    }

    let energy: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let mut tau: Vec<f64> = d_y.iter().zip(&d_u).map(|(&a, &b)| breaking_time(a, b)).collect();
    canonicalize_ties(&mut tau);
    LagrangianState::from_initial(
        Initial {
            xi,
            y,
            u,
            v,
            d_y,
            d_u,
            d_v,
            energy,
            tau,
        },
        alpha,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler_data::{appendix_a_datum, make_multipeakon, Atom, InitialDatum};
    use crate::projection::{project, ProjectionConfig};
    use approx::assert_abs_diff_eq;

    fn lag(d: &InitialDatum, dx: f64) -> LagrangianState {
        let p = project(d, &ProjectionConfig::for_datum(d, dx).unwrap()).unwrap();
        to_lagrangian(&p, 0.5)
    }

    #[test]
    fn breaking_time_cases() {
        assert_eq!(breaking_time(0.5, -0.5), 2.0);
        assert_eq!(breaking_time(0.3, 1.0), f64::INFINITY);
        assert_eq!(breaking_time(0.0, 0.0), 0.0);
        assert_eq!(breaking_time(1.0, 0.0), f64::INFINITY);
    }

    #[test]
    fn appendix_a_lagrangian_fields() {
        let s = lag(&appendix_a_datum(), 0.25);
        for (k, &xi) in s.xi().iter().enumerate() {
            if (0.0..=1.0).contains(&xi) {
                assert_abs_diff_eq!(s.y()[k], xi / 2.0, epsilon = 1e-15);
                assert_abs_diff_eq!(s.u()[k], (1.0 - xi) / 2.0, epsilon = 1e-15);
                assert_abs_diff_eq!(s.v()[k], xi / 2.0, epsilon = 1e-15);
            }
        }
        for c in 0..s.n_cells() {
            let mid = 0.5 * (s.xi()[c] + s.xi()[c + 1]);
            if (0.0..1.0).contains(&mid) {
                assert_eq!(s.tau()[c], 2.0);
            } else {
                assert_eq!(s.tau()[c], f64::INFINITY);
            }
        }
    }

    #[test]
    fn constant_datum_is_identity_transport() {
        let s = lag(&make_multipeakon(&[(0.0, 0.7)]).unwrap(), 0.5);
        for k in 0..s.xi().len() {
            assert_eq!(s.xi()[k], s.y()[k]);
            assert_eq!(s.u()[k], 0.7);
            assert_eq!(s.v()[k], 0.0);
        }
    }

    #[test]
    fn pure_atom_cell() {
        let d = make_multipeakon(&[(0.0, 0.0), (0.5, 0.0)])
            .unwrap()
            .with_atoms(vec![Atom::new(0.0, 1.0)])
            .unwrap();
        let s = lag(&d, 0.25);
        let c = s.xi().iter().position(|&x| x == 0.0).unwrap();
        assert_eq!(s.xi()[c + 1], 1.0);
        assert_eq!(s.y()[c], 0.0);
        assert_eq!(s.y()[c + 1], 0.0);
        assert_eq!(s.d_v()[c], 1.0);
        assert_eq!(s.d_y()[c], 0.0);
        assert_eq!(s.tau()[c], 0.0);
    }

    #[test]
    fn nodes_strictly_increasing_and_coercive() {
        let d = appendix_a_datum().with_atoms(vec![Atom::new(0.25, 0.1)]).unwrap();
        let s = lag(&d, 0.125);
        assert!(s.xi().windows(2).all(|w| w[1] > w[0]));
        assert_abs_diff_eq!(s.coercivity(), 1.0, epsilon = 1e-15);
        for k in 0..s.xi().len() {
            assert_abs_diff_eq!(s.y()[k] + s.v()[k], s.xi()[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn ties_are_merged() {
        let mut tau = vec![1.0, 1.0 + 5e-13, 2.0, 0.0, f64::INFINITY, 1.0 + 2e-12];
        canonicalize_ties(&mut tau);
        assert_eq!(tau, vec![1.0, 1.0, 2.0, 0.0, f64::INFINITY, 1.0 + 2e-12]);
    }
}
