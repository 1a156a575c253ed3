//! Reference solutions for the verification harness.
//!
//! The wave-breaking multipeakon has a closed form. For smooth or cusped data
//! the solution is known in Lagrangian form, parametrised by the initial
//! position `z` of a characteristic. The characteristic breaks at
//! `tau(z) = -2 / u_x(z)`, so for `B(t) = {z : u_x(z) <= -2/t}`
//!
//! ```text
//! V(t, z) = F(z) - alpha G2(z)
//! U(t, z) = u(z) + (F(z) t - A(z)) / 2 - (F_inf t - A_inf) / 4
//! y(t, z) = z + u(z) t + (F(z) t^2/2 - B(z)) / 2 - (F_inf t^2/2 - B_inf) / 4
//! ```
//!
//! with `A = alpha (t G2 + 2 G1)`, `B = alpha (t^2 G2 / 2 + 2 t G1 + 2 L)` and
//! `G2`, `G1`, `L` the integrals of `u_x^2`, `u_x` and `1` over
//! `B(t) ∩ (-inf, z)`. The Eulerian profile follows by inverting `y(t, .)`.

use crate::error::{HsError, Result};
use crate::euler_data::{appendix_a_datum, cosine_datum, cusp_datum, InitialDatum, Side};
use crate::quadrature;

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const DEFAULT_INV_TOL: f64 = 1e-12;
const TABLE_POINTS: usize = 2048;

/// How the breaking-set integrals are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralMode {
    /// Differences of `u` and `F_ac` at the ends of each breaking interval.
    #[default]
    Analytic,
    /// Adaptive quadrature of `u_x` and `u_x^2`; slow, used as a cross-check.
    Adaptive,
}

#[derive(Clone, Debug)]
pub enum Family {
    AppendixA,
    SemiAnalytic(InitialDatum),
}

#[derive(Clone, Debug)]
pub struct ReferenceSolution {
    pub family: Family,
    pub alpha: f64,
    pub quad_tol: f64,
    pub inv_tol: f64,
    pub mode: IntegralMode,
}

impl ReferenceSolution {
    pub fn appendix_a(alpha: f64) -> Self {
        Self::new(Family::AppendixA, alpha)
    }

    pub fn cosine(alpha: f64) -> Self {
        Self::new(Family::SemiAnalytic(cosine_datum()), alpha)
    }

    pub fn cusp(alpha: f64, a: f64, b: f64) -> Result<Self> {
        Ok(Self::new(Family::SemiAnalytic(cusp_datum(a, b)?), alpha))
    }

    /// Semi-analytic reference for a datum without atoms whose `u_x` is
    /// continuous and monotone on each of its monotone pieces.
    pub fn from_datum(d: InitialDatum, alpha: f64) -> Result<Self> {
        if !d.atoms().is_empty() {
            return Err(HsError::UnsupportedMode("reference solutions need data without atoms".into()));
        }
        Ok(Self::new(Family::SemiAnalytic(d), alpha))
    }

    fn new(family: Family, alpha: f64) -> Self {
        Self {
            family,
            alpha,
            quad_tol: DEFAULT_QUAD_TOL,
            inv_tol: DEFAULT_INV_TOL,
            mode: IntegralMode::Analytic,
        }
    }

    pub fn with_tolerances(mut self, quad_tol: f64, inv_tol: f64) -> Self {
        self.quad_tol = quad_tol;
        self.inv_tol = inv_tol;
        self
    }

    pub fn with_mode(mut self, mode: IntegralMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn datum(&self) -> InitialDatum {
        match &self.family {
            Family::AppendixA => appendix_a_datum(),
            Family::SemiAnalytic(d) => d.clone(),
        }
    }

    /// Solution at time `t`, events at `t` included.
    pub fn snapshot(&self, t: f64) -> Result<Snapshot<'_>> {
        self.snapshot_impl(t, false)
    }

    /// Left limit in time at `t`. Only differs from [`Self::snapshot`] in the
    /// energy at breaking instants.
    pub fn snapshot_before(&self, t: f64) -> Result<Snapshot<'_>> {
        self.snapshot_impl(t, true)
    }

    fn snapshot_impl(&self, t: f64, before: bool) -> Result<Snapshot<'_>> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(HsError::InvalidInput(format!("reference time must be finite and nonnegative (got {t})")));
        }
        let inner = match &self.family {
            Family::AppendixA => Inner::Closed { before },
            Family::SemiAnalytic(d) => Inner::Semi(Box::new(SemiSnapshot::new(self, d, t, before)?)),
        };
        Ok(Snapshot {
            reference: self,
            t,
            inner,
        })
    }

    pub fn eval_u(&self, t: f64, x: f64) -> Result<f64> {
        self.snapshot(t)?.eval_u(x)
    }

    pub fn eval_f(&self, t: f64, x: f64, side: Side) -> Result<f64> {
        self.snapshot(t)?.eval_f(x, side)
    }

    /// `F(t, +inf)`.
    pub fn total_energy(&self, t: f64) -> Result<f64> {
        Ok(self.snapshot(t)?.total_energy())
    }
}

enum Inner {
    Closed { before: bool },
    Semi(Box<SemiSnapshot>),
}

/// Reference solution frozen at one time.
pub struct Snapshot<'a> {
    reference: &'a ReferenceSolution,
    t: f64,
    inner: Inner,
}

impl Snapshot<'_> {
    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn eval_u(&self, x: f64) -> Result<f64> {
        match &self.inner {
            Inner::Closed { .. } => Ok(appendix_a_u(self.reference.alpha, self.t, x)),
            Inner::Semi(s) => s.eval_u(self.reference, x),
        }
    }

    pub fn eval_f(&self, x: f64, side: Side) -> Result<f64> {
        match &self.inner {
            Inner::Closed { before } => Ok(appendix_a_f(self.reference.alpha, self.t, x, side, *before)),
            Inner::Semi(s) => s.eval_f(self.reference, x, side),
        }
    }

    /// `u` at each `x`, most efficient for sorted input.
    pub fn u_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        match &self.inner {
            Inner::Closed { .. } => Ok(xs.iter().map(|&x| appendix_a_u(self.reference.alpha, self.t, x)).collect()),
            Inner::Semi(s) => {
                let mut hint = 0usize;
                xs.iter().map(|&x| s.eval_u_hinted(self.reference, x, &mut hint)).collect()
            }
        }
    }

    pub fn total_energy(&self) -> f64 {
        match &self.inner {
            Inner::Closed { before } => appendix_a_f(self.reference.alpha, self.t, f64::INFINITY, Side::Left, *before),
            Inner::Semi(s) => s.f_inf - self.reference.alpha * s.g2_inf,
        }
    }

    /// Eulerian positions where `u(t, .)` may have kinks.
    pub fn kinks(&self) -> Vec<f64> {
        match &self.inner {
            Inner::Closed { .. } => {
                let (a, b) = appendix_a_breaks(self.reference.alpha, self.t);
                vec![a, b]
            }
            Inner::Semi(s) => s.kinks(self.reference),
        }
    }
}

/// Closed-form `(u, F)` of the multipeakon `u = 1/2, 1/2 - x, 0` at time `t`,
/// with `F` left-continuous and at `t = 2` the post-event energy.
pub fn multipeakon_exact(alpha: f64, t: f64, x: f64) -> (f64, f64) {
    (appendix_a_u(alpha, t, x), appendix_a_f(alpha, t, x, Side::Left, false))
}

/// As [`multipeakon_exact`], but the left limit in time.
pub fn multipeakon_exact_before(alpha: f64, t: f64, x: f64, side: Side) -> (f64, f64) {
    (appendix_a_u(alpha, t, x), appendix_a_f(alpha, t, x, side, true))
}

pub fn cosine_exact(alpha: f64, t: f64, x: f64, quad_tol: f64, inv_tol: f64) -> Result<(f64, f64)> {
    let r = ReferenceSolution::cosine(alpha).with_tolerances(quad_tol, inv_tol);
    let s = r.snapshot(t)?;
    Ok((s.eval_u(x)?, s.eval_f(x, Side::Left)?))
}

pub fn cusp_exact(alpha: f64, a: f64, b: f64, t: f64, x: f64, quad_tol: f64, inv_tol: f64) -> Result<(f64, f64)> {
    let r = ReferenceSolution::cusp(alpha, a, b)?.with_tolerances(quad_tol, inv_tol);
    let s = r.snapshot(t)?;
    Ok((s.eval_u(x)?, s.eval_f(x, Side::Left)?))
}

/// Support of the middle segment at time `t`.
fn appendix_a_breaks(alpha: f64, t: f64) -> (f64, f64) {
    if t == 2.0 {
        (0.75, 0.75)
    } else if t < 2.0 {
        ((8.0 - t) * t / 16.0, (t * t + 8.0) / 16.0)
    } else {
        let x1 = -(1.0 - alpha) * t * t / 16.0 + (2.0 - alpha) * t / 4.0 + alpha / 4.0;
        let x2 = (1.0 - alpha) * t * t / 16.0 + alpha * t / 4.0 + (2.0 - alpha) / 4.0;
        (x1, x2)
    }
}

fn appendix_a_u(alpha: f64, t: f64, x: f64) -> f64 {
    let (x1, x2) = appendix_a_breaks(alpha, t);
    if t < 2.0 {
        if x < x1 {
            -t / 8.0 + 0.5
        } else if x <= x2 {
            (8.0 * x - (t + 4.0)) / (4.0 * (t - 2.0))
        } else {
            t / 8.0
        }
    } else if x < x1 {
        -(1.0 - alpha) * t / 8.0 + (2.0 - alpha) / 4.0
    } else if x <= x2 && x2 > x1 {
        2.0 / (t - 2.0) * (x - (t + 4.0) / 8.0)
    } else if x <= x2 {
        // Degenerate middle segment: both plateaus meet.
        -(1.0 - alpha) * t / 8.0 + (2.0 - alpha) / 4.0
    } else {
        (1.0 - alpha) * t / 8.0 + alpha / 4.0
    }
}

fn appendix_a_f(alpha: f64, t: f64, x: f64, side: Side, before: bool) -> f64 {
    let (x1, x2) = appendix_a_breaks(alpha, t);
    if t < 2.0 {
        if x < x1 {
            0.0
        } else if x <= x2 {
            (16.0 * x + t * t - 8.0 * t) / (4.0 * (t - 2.0) * (t - 2.0))
        } else {
            0.5
        }
    } else if x1 == x2 {
        // At the instant of concentration, all remaining energy sits at x1.
        let mass = if t == 2.0 && before { 0.5 } else { 0.5 * (1.0 - alpha) };
        match side {
            Side::Left if x <= x1 => 0.0,
            Side::Right if x < x1 => 0.0,
            _ => mass,
        }
    } else if x < x1 {
        0.0
    } else if x <= x2 {
        4.0 / ((t - 2.0) * (t - 2.0)) * (x - x1)
    } else {
        0.5 * (1.0 - alpha)
    }
}

/// Frozen Lagrangian representation at one time.
struct SemiSnapshot {
    datum: InitialDatum,
    alpha: f64,
    t: f64,
    /// Disjoint breaking intervals, sorted.
    intervals: Vec<(f64, f64)>,
    g2_inf: f64,
    g1_inf: f64,
    len_inf: f64,
    f_inf: f64,
    mode: IntegralMode,
    quad_tol: f64,
    table_z: Vec<f64>,
    table_y: Vec<f64>,
    /// `y(z) - z` to the left and right of the support.
    shift_left: f64,
    shift_right: f64,
}

struct Lagr {
    y: f64,
    u: f64,
    v: f64,
}

impl SemiSnapshot {
    fn new(r: &ReferenceSolution, d: &InitialDatum, t: f64, before: bool) -> Result<Self> {
        let intervals = breaking_set(d, t, before);
        let (lo, hi) = d.support();
        let mut s = Self {
            datum: d.clone(),
            alpha: r.alpha,
            t,
            intervals,
            g2_inf: 0.0,
            g1_inf: 0.0,
            len_inf: 0.0,
            f_inf: d.f_ac(hi),
            mode: r.mode,
            quad_tol: r.quad_tol,
            table_z: Vec::new(),
            table_y: Vec::new(),
            shift_left: 0.0,
            shift_right: 0.0,
        };
        let (g2, g1, len) = s.integrals(f64::INFINITY)?;
        s.g2_inf = g2;
        s.g1_inf = g1;
        s.len_inf = len;

        let mut zs: Vec<f64> = (0..=TABLE_POINTS)
            .map(|i| lo + (hi - lo) * i as f64 / TABLE_POINTS as f64)
            .collect();
        zs.extend(d.breakpoints().iter().copied().filter(|&p| p >= lo && p <= hi));
        for &(a, b) in &s.intervals {
            zs.extend([a, b]);
        }
        zs.sort_by(f64::total_cmp);
        zs.dedup();
        let mut ys = Vec::with_capacity(zs.len());
        for &z in &zs {
            ys.push(s.lagrangian(z)?.y);
        }
        // Enforce monotonicity against round-off so binary search is valid.
        for i in 1..ys.len() {
            if ys[i] < ys[i - 1] {
                ys[i] = ys[i - 1];
            }
        }
        s.shift_left = ys[0] - zs[0];
        s.shift_right = ys[ys.len() - 1] - zs[zs.len() - 1];
        s.table_z = zs;
        s.table_y = ys;
        Ok(s)
    }

    /// `(G2, G1, L)` over `B(t) ∩ (-inf, z)`.
    fn integrals(&self, z: f64) -> Result<(f64, f64, f64)> {
        let (mut g2, mut g1, mut len) = (0.0, 0.0, 0.0);
        for &(a, b) in &self.intervals {
            if a >= z {
                break;
            }
            let e = b.min(z);
            match self.mode {
                IntegralMode::Analytic => {
                    g2 += self.datum.f_ac(e) - self.datum.f_ac(a);
                    g1 += self.datum.u(e) - self.datum.u(a);
                }
                IntegralMode::Adaptive => {
                    let ux = self.datum.u_x_evaluator();
                    let br = self.datum.breakpoints();
                    g2 += quadrature::integrate_split(|x| ux(x).powi(2), a, e, br, self.quad_tol)?;
                    g1 += quadrature::integrate_split(|x| ux(x), a, e, br, self.quad_tol)?;
                }
            }
            len += e - a;
        }
        Ok((g2, g1, len))
    }

    fn lagrangian(&self, z: f64) -> Result<Lagr> {
        let (g2, g1, len) = self.integrals(z)?;
        let (t, al) = (self.t, self.alpha);
        let f = self.datum.f_ac(z);
        let u0 = self.datum.u(z);
        let a = al * (t * g2 + 2.0 * g1);
        let b = al * (0.5 * t * t * g2 + 2.0 * t * g1 + 2.0 * len);
        let a_inf = al * (t * self.g2_inf + 2.0 * self.g1_inf);
        let b_inf = al * (0.5 * t * t * self.g2_inf + 2.0 * t * self.g1_inf + 2.0 * self.len_inf);
        let half_t2 = 0.5 * t * t;
        Ok(Lagr {
            y: z + u0 * t + 0.5 * (f * half_t2 - b) - 0.25 * (self.f_inf * half_t2 - b_inf),
            u: u0 + 0.5 * (f * t - a) - 0.25 * (self.f_inf * t - a_inf),
            v: f - al * g2,
        })
    }

    fn y(&self, z: f64) -> Result<f64> {
        Ok(self.lagrangian(z)?.y)
    }

    /// Bracket `[z_i, z_{i+1}]` of the table containing a root of `y = x`,
    /// or `None` if `x` lies on an affine extension.
    fn bracket(&self, x: f64, hint: &mut usize) -> Option<usize> {
        let ys = &self.table_y;
        if x <= ys[0] || x >= ys[ys.len() - 1] {
            return None;
        }
        let mut i = (*hint).min(ys.len() - 2);
        if !(ys[i] <= x && x <= ys[i + 1]) {
            if ys[i] <= x && i + 2 < ys.len() && x <= ys[i + 2] {
                i += 1;
            } else {
                i = ys.partition_point(|&v| v < x).saturating_sub(1).min(ys.len() - 2);
            }
        }
        *hint = i;
        Some(i)
    }

    fn outside(&self, x: f64) -> f64 {
        if x <= self.table_y[0] {
            x - self.shift_left
        } else {
            x - self.shift_right
        }
    }

    /// Any root of `y(t, z) = x`, by the Illinois variant of regula falsi.
    fn invert(&self, r: &ReferenceSolution, x: f64, hint: &mut usize) -> Result<f64> {
        let Some(i) = self.bracket(x, hint) else {
            return Ok(self.outside(x));
        };
        let (mut a, mut b) = (self.table_z[i], self.table_z[i + 1]);
        let (mut fa, mut fb) = (self.table_y[i] - x, self.table_y[i + 1] - x);
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        let x_tol = 4.0 * f64::EPSILON * x.abs().max(1.0);
        let mut side = 0i8;
        for _ in 0..200 {
            if b - a <= r.inv_tol {
                break;
            }
            let c = if fb != fa { (a * fb - b * fa) / (fb - fa) } else { 0.5 * (a + b) };
            let c = if c > a && c < b { c } else { 0.5 * (a + b) };
            let fc = self.y(c)? - x;
            if fc.abs() <= x_tol {
                return Ok(c);
            }
            if fc < 0.0 {
                a = c;
                fa = fc;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = c;
                fb = fc;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// `inf {z : y(z) >= x}` or `sup {z : y(z) <= x}`, by bisection.
    fn invert_extreme(&self, r: &ReferenceSolution, x: f64, side: Side) -> Result<f64> {
        let mut hint = 0;
        let Some(i) = self.bracket(x, &mut hint) else {
            return Ok(self.outside(x));
        };
        let ys = &self.table_y;
        let (mut a, mut b) = match side {
            Side::Left => {
                let k = ys.partition_point(|&v| v < x);
                (self.table_z[k.saturating_sub(1)], self.table_z[k.min(ys.len() - 1)])
            }
            Side::Right => {
                let k = ys.partition_point(|&v| v <= x);
                (self.table_z[k.saturating_sub(1)], self.table_z[k.min(ys.len() - 1)])
            }
        };
        if a > b {
            (a, b) = (self.table_z[i], self.table_z[i + 1]);
        }
        for _ in 0..200 {
            if b - a <= r.inv_tol.min(1e-14 * a.abs().max(1.0)).max(f64::EPSILON * a.abs().max(1.0)) {
                break;
            }
            let c = 0.5 * (a + b);
            if c <= a || c >= b {
                break;
            }
            let yc = self.y(c)?;
            let go_left = match side {
                Side::Left => yc >= x,
                Side::Right => yc > x,
            };
            if go_left {
                b = c;
            } else {
                a = c;
            }
        }
        Ok(match side {
            Side::Left => b,
            Side::Right => a,
        })
    }

    fn eval_u(&self, r: &ReferenceSolution, x: f64) -> Result<f64> {
        let mut hint = 0;
        self.eval_u_hinted(r, x, &mut hint)
    }

    fn eval_u_hinted(&self, r: &ReferenceSolution, x: f64, hint: &mut usize) -> Result<f64> {
        let z = self.invert(r, x, hint)?;
        Ok(self.lagrangian(z)?.u)
    }

    fn eval_f(&self, r: &ReferenceSolution, x: f64, side: Side) -> Result<f64> {
        if x == f64::INFINITY {
            return Ok(self.f_inf - self.alpha * self.g2_inf);
        }
        if x == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        let z = self.invert_extreme(r, x, side)?;
        Ok(self.lagrangian(z)?.v)
    }

    fn kinks(&self, _r: &ReferenceSolution) -> Vec<f64> {
        let mut zs: Vec<f64> = self.datum.breakpoints().to_vec();
        for &(a, b) in &self.intervals {
            zs.extend([a, b]);
        }
        let mut out: Vec<f64> = zs.into_iter().filter_map(|z| self.y(z).ok()).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// `{z : u_x(z) <= -2/t}` (strict inequality for the left limit in time) as
/// a sorted union of disjoint intervals.
fn breaking_set(d: &InitialDatum, t: f64, before: bool) -> Vec<(f64, f64)> {
    if t <= 0.0 {
        return Vec::new();
    }
    let c = -2.0 / t;
    let hit = |v: f64| if before { v < c } else { v <= c };
    let mut out: Vec<(f64, f64)> = Vec::new();
    for &(p, q) in d.monotone_pieces() {
        if !(q > p) {
            continue;
        }
        let nudge = 1e-15 * (q - p).max(p.abs().max(q.abs()) * 1e-1);
        let ux = |z: f64| d.u_x(z.clamp(p + nudge, q - nudge));
        let (hp, hq) = (hit(ux(p)), hit(ux(q)));
        let piece = match (hp, hq) {
            (false, false) => None,
            (true, true) => Some((p, q)),
            (true, false) => Some((p, bisect(&ux, &hit, p, q, true))),
            (false, true) => Some((bisect(&ux, &hit, p, q, false), q)),
        };
        if let Some((a, b)) = piece {
            if b > a {
                match out.last_mut() {
                    Some(last) if last.1 >= a => last.1 = last.1.max(b),
                    _ => out.push((a, b)),
                }
            }
        }
    }
    out
}

/// Boundary of `{hit(ux)}` inside `[p, q]`, where `hit` holds at the left end
/// (`left_hit`) or the right end only.
fn bisect(ux: &dyn Fn(f64) -> f64, hit: &dyn Fn(f64) -> bool, p: f64, q: f64, left_hit: bool) -> f64 {
    let (mut a, mut b) = (p, q);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if hit(ux(m)) == left_hit {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
