//! Eulerian reconstruction `u(y(xi)) = U(xi)`, `mu = y_#(V_xi dxi)`.

use crate::error::{HsError, Result};
use crate::euler_data::{Atom, EnergyMeasure, EulerianSolution, PiecewiseLinear, Side};
use crate::lagrangian::LagrangianState;

/// Cells with `d_y` at or below this are plateaus of `y`.
pub const PLATEAU_TOL: f64 = 1e-14;
/// Allowed decrease of `y` between consecutive nodes before the state is
/// declared corrupt.
pub const MONOTONE_TOL: f64 = 1e-12;

pub fn to_eulerian(s: &LagrangianState) -> Result<EulerianSolution> {
    let y = s.y();
    let u = s.u();
    let v = s.v();
    let d_y = s.d_y();
    let d_v = s.d_v();

    let mut xs = vec![y[0]];
    let mut us = vec![u[0]];
    let mut fs = vec![v[0]];
    let mut atoms: Vec<Atom> = Vec::new();
    let mut singular = 0.0;
    let add_atom = |atoms: &mut Vec<Atom>, x: f64, mass: f64| {
        if mass <= 0.0 {
            return 0.0;
        }
        match atoms.last_mut() {
            Some(last) if last.position == x => last.mass += mass,
            _ => atoms.push(Atom::new(x, mass)),
        }
        mass
    };

    for c in 0..s.n_cells() {
        let drop = y[c + 1] - y[c];
        if drop < -MONOTONE_TOL {
            return Err(HsError::CorruptState(format!(
                "y decreases by {:e} across cell {c} at t = {}",
                -drop,
                s.time()
            )));
        }
        let mass = v[c + 1] - v[c];
        let x_last = *xs.last().unwrap();
        if d_y[c] <= PLATEAU_TOL {
            if d_v[c] > PLATEAU_TOL {
                singular += add_atom(&mut atoms, x_last, mass);
            }
            continue;
        }
        let x = y[c + 1];
        if x <= x_last {
            singular += add_atom(&mut atoms, x_last, mass);
            continue;
        }
        let f_prev = *fs.last().unwrap();
        xs.push(x);
        us.push(u[c + 1]);
        fs.push((v[c + 1] - singular).max(f_prev));
    }
    let f_left = fs[0];
    for f in &mut fs {
        *f -= f_left;
    }

    let u = PiecewiseLinear::new(xs.clone(), us)?;
    let f_ac = PiecewiseLinear::new(xs, fs)?;
    Ok(EulerianSolution {
        u,
        mu: EnergyMeasure::new(f_ac, atoms)?,
        time: s.time(),
        alpha: s.alpha(),
    })
}

pub fn eval_u(sol: &EulerianSolution, x: f64) -> f64 {
    sol.u.eval(x)
}

/// Cumulative energy `F(t, x)`; `Side::Left` gives the left-continuous version.
pub fn eval_f(sol: &EulerianSolution, x: f64, side: Side) -> f64 {
    sol.mu.eval_cumulative(x, side)
}
