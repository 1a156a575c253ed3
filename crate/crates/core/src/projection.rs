//! Energy-preserving piecewise-linear projection onto the grid `x_j = j dx`.
//!
//! Each even cell `[x_{2j}, x_{2j+2}]` is split into two half-cells whose
//! slopes `Du -+ q` reproduce both the increment of `u` and the increment of
//! `F_ac` across the cell, where `q = sqrt(DF - Du^2)`.

use crate::error::{HsError, Result};
use crate::euler_data::{Atom, EnergyMeasure, InitialDatum, PiecewiseLinear, Side};
use crate::quadrature;

/// Radicands in `[-RADICAND_TOL * max(1, DF), 0)` are clamped to zero. The
/// bound is widened to the rounding level of the inputs on fine grids.
pub const RADICAND_TOL: f64 = 1e-12;

/// Which half-cell receives the smaller slope `Du - q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SignRule {
    /// First half gets `Du - q`.
    MinusFirst,
    /// First half gets `Du + q`.
    PlusFirst,
    /// Pick the order whose first slope is closest to the slope arriving from
    /// the left neighbour.
    #[default]
    MinimizeKink,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionConfig {
    pub dx: f64,
    /// Even-cell index range `[j_min, j_max)`, covering `[x_{2 j_min}, x_{2 j_max}]`.
    pub window: (i64, i64),
    pub sign_rule: SignRule,
}

impl ProjectionConfig {
    /// Window covering the support hint and all atoms plus one even cell on
    /// each side.
    pub fn for_datum(d: &InitialDatum, dx: f64) -> Result<Self> {
        check_dx(dx)?;
        let (lo, hi) = d.support();
        let h = 2.0 * dx;
        let j_min = (lo / h).floor() as i64 - 1;
        let j_max = (hi / h).ceil() as i64 + 1;
        Ok(Self {
            dx,
            window: (j_min, j_max),
            sign_rule: SignRule::default(),
        })
    }

    pub fn with_sign_rule(mut self, rule: SignRule) -> Self {
        self.sign_rule = rule;
        self
    }

    pub fn x(&self, j: i64) -> f64 {
        j as f64 * self.dx
    }

    pub fn left(&self) -> f64 {
        self.x(2 * self.window.0)
    }

    pub fn right(&self) -> f64 {
        self.x(2 * self.window.1)
    }
}

fn check_dx(dx: f64) -> Result<()> {
    if !(dx > 0.0 && dx <= 1.0) {
        return Err(HsError::InvalidInput(format!("grid spacing must lie in (0, 1] (got {dx})")));
    }
    Ok(())
}

/// Per even cell data of the projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvenCell {
    /// Even-cell index: the cell is `[x_{2j}, x_{2j+2}]`.
    pub j: i64,
    pub du: f64,
    pub df: f64,
    pub q: f64,
    /// Slope on `[x_{2j}, x_{2j+1}]`.
    pub first_slope: f64,
    /// Slope on `[x_{2j+1}, x_{2j+2}]`.
    pub second_slope: f64,
    /// Numerical atom carried at `x_{2j}`.
    pub atom_mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedDatum {
    pub u: PiecewiseLinear,
    pub mu: EnergyMeasure,
    pub dx: f64,
    pub window: (i64, i64),
    pub cells: Vec<EvenCell>,
}

impl ProjectedDatum {
    pub fn total_energy(&self) -> f64 {
        self.mu.total_mass()
    }

    /// `F(x_{2j})` (left) and `F(x_{2j}+)`.
    pub fn cumulative(&self, x: f64, side: Side) -> f64 {
        self.mu.eval_cumulative(x, side)
    }
}

pub fn project(d: &InitialDatum, cfg: &ProjectionConfig) -> Result<ProjectedDatum> {
    check_dx(cfg.dx)?;
    let (j_min, j_max) = cfg.window;
    if j_max <= j_min {
        return Err(HsError::InvalidInput(format!("empty projection window {:?}", cfg.window)));
    }
    let (lo, hi) = d.support();
    if cfg.left() > lo || cfg.right() < hi {
        return Err(HsError::InvalidInput(format!(
            "projection window [{}, {}] does not cover the support [{lo}, {hi}]",
            cfg.left(),
            cfg.right()
        )));
    }
    let dx = cfg.dx;
    let n_cells = (j_max - j_min) as usize;
    let mut xs = Vec::with_capacity(2 * n_cells + 1);
    let mut us = Vec::with_capacity(2 * n_cells + 1);
    let mut fs = Vec::with_capacity(2 * n_cells + 1);
    let mut cells = Vec::with_capacity(n_cells);
    let mut atoms = Vec::new();
    let source_atoms = d.atoms();
    let mut next_atom = 0usize;

    let mut x_left = cfg.x(2 * j_min);
    let mut u_left = d.u(x_left);
    let mut f_left = d.f_ac(x_left);
    xs.push(x_left);
    us.push(u_left);
    fs.push(f_left);
    let mut prev_slope = 0.0;

    for j in j_min..j_max {
        let x_mid = cfg.x(2 * j + 1);
        let x_right = cfg.x(2 * j + 2);
        let u_right = d.u(x_right);
        let f_right = d.f_ac(x_right);
        let du = (u_right - u_left) / (2.0 * dx);
        let df = (f_right - f_left) / (2.0 * dx);
        let radicand = df - du * du;
        // Rounding level of `radicand`, from the errors in `F` and `u` at the
        // cell ends.
        let noise = f64::EPSILON
            * ((f_left.abs() + f_right.abs() + 2.0 * du.abs() * (u_left.abs() + u_right.abs())) / (2.0 * dx) + du * du);
        if radicand < -(RADICAND_TOL * df.abs().max(1.0)).max(512.0 * noise) {
            return Err(HsError::Consistency { cell: j, radicand });
        }
        // A radicand at that level is cancellation noise from a linear cell;
        // `sqrt` would inflate it to a slope error of order sqrt(eps).
        let q = if radicand <= 8.0 * noise { 0.0 } else { radicand.sqrt() };
        let (lo_first, hi_first) = ((du - q, du + q), (du + q, du - q));
        let (first, second) = match cfg.sign_rule {
            SignRule::MinusFirst => lo_first,
            SignRule::PlusFirst => hi_first,
            SignRule::MinimizeKink => {
                if (lo_first.0 - prev_slope).abs() <= (hi_first.0 - prev_slope).abs() {
                    lo_first
                } else {
                    hi_first
                }
            }
        };
        prev_slope = second;

        let mut mass = 0.0;
        while next_atom < source_atoms.len() && source_atoms[next_atom].position < x_right {
            mass += source_atoms[next_atom].mass;
            next_atom += 1;
        }
        if mass > 0.0 {
            atoms.push(Atom::new(x_left, mass));
        }

        let u_mid = u_left + first * dx;
        let f_mid = (f_left + first * first * dx).min(f_right);
        xs.extend([x_mid, x_right]);
        us.extend([u_mid, u_right]);
        fs.extend([f_mid, f_right]);
        cells.push(EvenCell {
            j,
            du,
            df,
            q,
            first_slope: first,
            second_slope: second,
            atom_mass: mass,
        });
        x_left = x_right;
        u_left = u_right;
        f_left = f_right;
    }

    let u = PiecewiseLinear::new(xs.clone(), us)?;
    let f_ac = PiecewiseLinear::new(xs, fs)?;
    let mu = EnergyMeasure::new(f_ac, atoms)?;
    Ok(ProjectedDatum {
        u,
        mu,
        dx,
        window: cfg.window,
        cells,
    })
}

/// Distances between a datum and its projection.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ProjectionError {
    pub linf_u: f64,
    pub l2_u: f64,
    pub l2_ux: f64,
    pub l1_f: f64,
    pub l2_f: f64,
}

/// Discrepancies over the projection window, by adaptive quadrature on each
/// half-cell (split at the datum's breakpoints). `linf_u` is a sampled lower
/// bound: nodes plus 16 interior points per half-cell.
pub fn projection_error(d: &InitialDatum, p: &ProjectedDatum) -> Result<ProjectionError> {
    const SAMPLES: usize = 16;
    const TOL: f64 = 1e-13;
    let nodes = p.u.nodes();
    let slopes = p.u.slopes();
    let breaks = d.breakpoints();
    let mut out = ProjectionError::default();
    let (mut s_u, mut s_ux, mut s_f1, mut s_f2) = (0.0, 0.0, 0.0, 0.0);
    for (k, w) in nodes.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        for i in 0..=SAMPLES {
            let x = a + (b - a) * i as f64 / SAMPLES as f64;
            out.linf_u = out.linf_u.max((d.u(x) - p.u.eval(x)).abs());
        }
        let s = slopes[k];
        s_u += quadrature::integrate_split(|x| (d.u(x) - p.u.eval(x)).powi(2), a, b, breaks, TOL)?;
        s_ux += quadrature::integrate_split(|x| (d.u_x(x) - s).powi(2), a, b, breaks, TOL)?;
        let df = |x: f64| d.cumulative(x, Side::Left) - p.mu.eval_cumulative(x, Side::Left);
        s_f1 += quadrature::integrate_split(|x| df(x).abs(), a, b, breaks, TOL)?;
        s_f2 += quadrature::integrate_split(|x| df(x).powi(2), a, b, breaks, TOL)?;
    }
    out.l2_u = s_u.sqrt();
    out.l2_ux = s_ux.sqrt();
    out.l1_f = s_f1;
    out.l2_f = s_f2.sqrt();
    Ok(out)
}
