//! Distances between solutions and between energy measures, and a sampled
//! estimator of the translate seminorm `sup_h h^{-beta} ||f(. + h) - f||_2`.

use crate::error::{HsError, Result};
use crate::euler_data::{EnergyMeasure, PiecewiseConstant, PiecewiseLinear, Side};
use crate::quadrature;

fn merged(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// Exact `sup |a - b|`; the difference is piecewise linear, so the sup is
/// attained at a merged node (or on the constant extensions).
pub fn linf_diff(a: &PiecewiseLinear, b: &PiecewiseLinear) -> f64 {
    merged(a.nodes(), b.nodes())
        .into_iter()
        .map(|x| (a.eval(x) - b.eval(x)).abs())
        .fold(0.0, f64::max)
}

/// `max |exact - b|` over the nodes of `b` and `n_samples` uniform points per
/// segment. A lower bound of the true sup.
pub fn linf_diff_sampled<F: Fn(f64) -> f64>(exact: F, b: &PiecewiseLinear, n_samples: usize) -> f64 {
    let n = n_samples.max(2);
    let nodes = b.nodes();
    let mut worst = (exact(nodes[0]) - b.eval(nodes[0])).abs();
    for w in nodes.windows(2) {
        for i in 1..=n {
            let x = w[0] + (w[1] - w[0]) * i as f64 / n as f64;
            worst = worst.max((exact(x) - b.eval(x)).abs());
        }
    }
    worst
}

/// Exact L2 distance. Infinite if the constant extensions differ.
pub fn l2_diff(a: &PiecewiseLinear, b: &PiecewiseLinear) -> f64 {
    if a.left_value() != b.left_value() || a.right_value() != b.right_value() {
        return f64::INFINITY;
    }
    let xs = merged(a.nodes(), b.nodes());
    let mut sum = 0.0;
    for w in xs.windows(2) {
        let d0 = a.eval(w[0]) - b.eval(w[0]);
        let d1 = a.eval(w[1]) - b.eval(w[1]);
        sum += (w[1] - w[0]) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
    }
    sum.sqrt()
}

/// Exact L2 distance between piecewise-constant profiles (e.g. slopes).
pub fn l2_diff_constant(a: &PiecewiseConstant, b: &PiecewiseConstant) -> f64 {
    let xs = merged(a.breaks(), b.breaks());
    let mut sum = 0.0;
    for w in xs.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let d = a.eval(mid) - b.eval(mid);
        sum += (w[1] - w[0]) * d * d;
    }
    sum.sqrt()
}

fn breakpoints(m: &EnergyMeasure) -> impl Iterator<Item = f64> + '_ {
    m.f_ac().nodes().iter().copied().chain(m.atoms().iter().map(|a| a.position))
}

/// `int |l(x)| dx` over `[0, h]` for `l` linear with end values `d0`, `d1`.
fn abs_linear(d0: f64, d1: f64, h: f64) -> f64 {
    if d0 * d1 >= 0.0 {
        0.5 * h * (d0.abs() + d1.abs())
    } else {
        0.5 * h * (d0 * d0 + d1 * d1) / (d0.abs() + d1.abs())
    }
}

/// Wasserstein-1 distance `int |F_1 - F_2| dx` of equal-mass measures.
pub fn w1(m1: &EnergyMeasure, m2: &EnergyMeasure) -> Result<f64> {
    let (a, b) = (m1.total_mass(), m2.total_mass());
    if (a - b).abs() > 1e-12 * a.max(b).max(1.0) {
        return Err(HsError::MassMismatch { left: a, right: b });
    }
    let mut xs: Vec<f64> = breakpoints(m1).chain(breakpoints(m2)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut sum = 0.0;
    for w in xs.windows(2) {
        let d0 = m1.eval_cumulative(w[0], Side::Right) - m2.eval_cumulative(w[0], Side::Right);
        let d1 = m1.eval_cumulative(w[1], Side::Left) - m2.eval_cumulative(w[1], Side::Left);
        sum += abs_linear(d0, d1, w[1] - w[0]);
    }
    Ok(sum)
}

/// Upper bound of the bounded-Lipschitz distance: the unit BL ball lies in
/// the unit Lipschitz ball, so `d_BL <= W_1`.
pub fn dbl_upper(m1: &EnergyMeasure, m2: &EnergyMeasure) -> Result<f64> {
    w1(m1, m2)
}

/// `int psi dmu` with the absolutely continuous part integrated by quadrature
/// on each linear piece of `F_ac`.
pub fn pair_with<F: Fn(f64) -> f64>(m: &EnergyMeasure, psi: F) -> Result<f64> {
    let nodes = m.f_ac().nodes();
    let vals = m.f_ac().values();
    let mut sum: f64 = m.atoms().iter().map(|a| a.mass * psi(a.position)).sum();
    for k in 0..nodes.len().saturating_sub(1) {
        let (a, b) = (nodes[k], nodes[k + 1]);
        let density = (vals[k + 1] - vals[k]) / (b - a);
        if density != 0.0 {
            sum += density * quadrature::integrate(&psi, a, b, 1e-13 * (b - a))?;
        }
    }
    Ok(sum)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BesovEstimate {
    pub beta: f64,
    /// `max_h h^{-beta} ||delta_h f||_2` over the sampled `h`; a lower bound of
    /// the seminorm.
    pub seminorm: f64,
    pub h_grid: Vec<f64>,
    /// `||f(. + h) - f||_2` for each entry of `h_grid`.
    pub translate_norms: Vec<f64>,
}

/// `n` logarithmically spaced translates in `[h_min, h_max]`.
pub fn log_h_grid(n: usize, h_min: f64, h_max: f64) -> Vec<f64> {
    if n == 1 {
        return vec![h_max];
    }
    let (a, b) = (h_min.ln(), h_max.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// 40 points in `[1e-4, 2]`.
pub fn default_h_grid() -> Vec<f64> {
    log_h_grid(40, 1e-4, 2.0)
}

/// Estimates the translate seminorm of `f`, supported in `support`, with
/// singularities or jumps at `breaks`.
pub fn besov_seminorm<F: Fn(f64) -> f64>(
    f: F,
    support: (f64, f64),
    breaks: &[f64],
    beta: f64,
    h_grid: &[f64],
    tol: f64,
) -> Result<BesovEstimate> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(HsError::InvalidInput(format!("beta must lie in (0, 1] (got {beta})")));
    }
    if let Some(h) = h_grid.iter().find(|&&h| !(h > 0.0 && h <= 2.0)) {
        return Err(HsError::InvalidInput(format!("translates must lie in (0, 2] (got {h})")));
    }
    let mut norms = Vec::with_capacity(h_grid.len());
    let mut best = 0.0f64;
    for &h in h_grid {
        let lo = support.0 - h;
        let hi = support.1;
        let mut cuts: Vec<f64> = breaks.iter().flat_map(|&p| [p, p - h]).collect();
        cuts.extend([support.0, support.1 - h]);
        let sq = quadrature::integrate_split(|x| (f(x + h) - f(x)).powi(2), lo, hi, &cuts, tol)?;
        let norm = sq.max(0.0).sqrt();
        best = best.max(norm / h.powf(beta));
        norms.push(norm);
    }
    Ok(BesovEstimate {
        beta,
        seminorm: best,
        h_grid: h_grid.to_vec(),
        translate_norms: norms,
    })
}

/// `ln(e_prev / e) / ln(dx_prev / dx)`.
pub fn eoc(e_prev: f64, e: f64, dx_prev: f64, dx: f64) -> f64 {
    (e_prev / e).ln() / (dx_prev / dx).ln()
}

/// Least-squares slope of `ln err` against `ln dx`.
pub fn fitted_order(dx: &[f64], err: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = dx
        .iter()
        .zip(err)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&h, &e)| (h.ln(), e.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler_data::{cusp_datum, make_multipeakon, Atom};
    use approx::assert_abs_diff_eq;

    fn pl(x: &[f64], v: &[f64]) -> PiecewiseLinear {
        PiecewiseLinear::new(x.to_vec(), v.to_vec()).unwrap()
    }

    fn atom(p: f64) -> EnergyMeasure {
        EnergyMeasure::new(PiecewiseLinear::constant(0.0), vec![Atom::new(p, 1.0)]).unwrap()
    }

    #[test]
    fn sup_norm() {
        let a = pl(&[0.0, 1.0], &[0.0, 1.0]);
        assert_eq!(linf_diff(&a, &a), 0.0);
        assert_eq!(linf_diff(&PiecewiseLinear::constant(0.0), &PiecewiseLinear::constant(2.5)), 2.5);
        assert_eq!(linf_diff_sampled(|x| a.eval(x), &a, 8), 0.0);
        let chord = pl(&[0.0, 1.0], &[0.0, 1.0]);
        assert_abs_diff_eq!(linf_diff_sampled(|x| x * x, &chord, 2), 0.25, epsilon = 1e-16);
    }

    #[test]
    fn l2_norms() {
        let a = pl(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0]);
        assert_eq!(l2_diff(&a, &a), 0.0);
        assert_abs_diff_eq!(l2_diff(&a, &PiecewiseLinear::constant(0.0)), (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        let one = PiecewiseConstant::new(vec![0.0, 1.0], vec![1.0]).unwrap();
        assert_eq!(l2_diff_constant(&one, &PiecewiseConstant::zero()), 1.0);
    }

    #[test]
    fn wasserstein() {
        let m = atom(0.0);
        assert_eq!(w1(&m, &m).unwrap(), 0.0);
        assert_eq!(w1(&atom(0.0), &atom(1.0)).unwrap(), 1.0);
        assert_eq!(dbl_upper(&atom(0.0), &atom(1.0)).unwrap(), 1.0);
        let spread = EnergyMeasure::new(pl(&[0.0, 1.0], &[0.0, 1.0]), vec![]).unwrap();
        assert_abs_diff_eq!(w1(&atom(0.5), &spread).unwrap(), 0.25, epsilon = 1e-16);
        let heavy = EnergyMeasure::new(PiecewiseLinear::constant(0.0), vec![Atom::new(0.0, 2.0)]).unwrap();
        assert!(matches!(w1(&heavy, &m), Err(HsError::MassMismatch { .. })));
    }

    #[test]
    fn pairing() {
        let spread = EnergyMeasure::new(pl(&[0.0, 1.0], &[0.0, 2.0]), vec![Atom::new(3.0, 0.5)]).unwrap();
        assert_abs_diff_eq!(pair_with(&spread, |x| x).unwrap(), 1.0 + 1.5, epsilon = 1e-14);
    }

    #[test]
    fn besov_of_zero() {
        let e = besov_seminorm(|_| 0.0, (0.0, 1.0), &[], 0.5, &default_h_grid(), 1e-12).unwrap();
        assert_eq!(e.seminorm, 0.0);
    }

    #[test]
    fn besov_of_cusp_derivative() {
        let d = cusp_datum(-1.0, 1.0).unwrap();
        let grid = log_h_grid(12, 1e-4, 2.0);
        let e = besov_seminorm(|x| d.u_x(x), d.support(), d.breakpoints(), 1.0 / 6.0, &grid, 1e-9).unwrap();
        assert!(e.seminorm > 0.0 && e.seminorm <= 40.0 / 3.0);
    }

    #[test]
    fn besov_of_step_profile() {
        let d = make_multipeakon(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        let grid = log_h_grid(10, 1e-3, 0.5);
        let e = besov_seminorm(|x| d.u_x(x), d.support(), d.breakpoints(), 0.5, &grid, 1e-12).unwrap();
        // Jumps 1, -2, 1: ||delta_h f||_2^2 = 6h for h below 1.
        assert_abs_diff_eq!(e.seminorm, 6f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn orders() {
        assert_abs_diff_eq!(eoc(1.0, 0.25, 0.1, 0.05), 2.0, epsilon = 1e-15);
        let dx = [1.0, 0.5, 0.25, 0.125];
        let err: Vec<f64> = dx.iter().map(|h: &f64| 3.0 * h.powf(0.75)).collect();
        assert_abs_diff_eq!(fitted_order(&dx, &err), 0.75, epsilon = 1e-12);
    }
}
