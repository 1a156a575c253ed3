//! Eulerian states: piecewise-linear profiles, energy measures with atoms and
//! initial data given by evaluators.

use std::fmt;
use std::sync::Arc;

use crate::error::{HsError, Result};
use crate::quadrature;

/// Which one-sided value of a cumulative distribution to read at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `mu((-inf, x))`
    Left,
    /// `mu((-inf, x])`
    Right,
}

/// Continuous piecewise-linear function with constant extension outside the
/// node range.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(HsError::InvalidInput(format!(
                "piecewise-linear function needs matching non-empty node/value arrays (got {} and {})",
                nodes.len(),
                values.len()
            )));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(HsError::InvalidInput(format!(
                "nodes must be strictly increasing (nodes[{}] = {}, nodes[{}] = {})",
                i,
                nodes[i],
                i + 1,
                nodes[i + 1]
            )));
        }
        if nodes.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(HsError::InvalidInput("non-finite node or value".into()));
        }
        Ok(Self { nodes, values })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            nodes: vec![0.0],
            values: vec![value],
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn left_value(&self) -> f64 {
        self.values[0]
    }

    pub fn right_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return self.values[0];
        }
        if x >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        // First node strictly greater than x; guaranteed in 1..n.
        let k = self.nodes.partition_point(|&p| p <= x);
        let (x0, x1) = (self.nodes[k - 1], self.nodes[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * ((x - x0) / (x1 - x0))
    }

    /// Slope of each of the `len() - 1` segments.
    pub fn slopes(&self) -> Vec<f64> {
        self.nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| (v[1] - v[0]) / (x[1] - x[0]))
            .collect()
    }

    /// Derivative as a piecewise-constant profile, zero outside the nodes.
    pub fn derivative(&self) -> PiecewiseConstant {
        if self.nodes.len() < 2 {
            return PiecewiseConstant::zero();
        }
        PiecewiseConstant {
            breaks: self.nodes.clone(),
            values: self.slopes(),
        }
    }
}

/// Piecewise-constant profile: `values[i]` on `[breaks[i], breaks[i + 1])`,
/// zero outside.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstant {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 && !(breaks.is_empty() && values.is_empty()) {
            return Err(HsError::InvalidInput("piecewise-constant profile needs breaks.len() == values.len() + 1".into()));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HsError::InvalidInput("breaks must be strictly increasing".into()));
        }
        Ok(Self { breaks, values })
    }

    pub fn zero() -> Self {
        Self {
            breaks: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.values.is_empty() || x < self.breaks[0] || x >= self.breaks[self.breaks.len() - 1] {
            return 0.0;
        }
        let k = self.breaks.partition_point(|&p| p <= x);
        self.values[k - 1]
    }
}

/// Point mass of an energy measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub mass: f64,
}

impl Atom {
    pub fn new(position: f64, mass: f64) -> Self {
        Self { position, mass }
    }
}

/// Finite nonnegative measure: an absolutely continuous part given through its
/// cumulative function plus finitely many atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyMeasure {
    f_ac: PiecewiseLinear,
    atoms: Vec<Atom>,
}

impl EnergyMeasure {
    pub fn new(f_ac: PiecewiseLinear, atoms: Vec<Atom>) -> Result<Self> {
        if f_ac.left_value() != 0.0 {
            return Err(HsError::InvalidInput(format!(
                "cumulative absolutely continuous part must start at 0 (got {})",
                f_ac.left_value()
            )));
        }
        if f_ac.values().windows(2).any(|w| w[1] < w[0]) {
            return Err(HsError::InvalidInput("cumulative absolutely continuous part must be nondecreasing".into()));
        }
        if let Some(a) = atoms.iter().find(|a| !(a.mass > 0.0) || !a.mass.is_finite() || !a.position.is_finite()) {
            return Err(HsError::InvalidInput(format!("atom masses must be finite and positive (got {a:?})")));
        }
        if atoms.windows(2).any(|w| !(w[1].position > w[0].position)) {
            return Err(HsError::InvalidInput("atom positions must be strictly increasing".into()));
        }
        Ok(Self { f_ac, atoms })
    }

    pub fn zero() -> Self {
        Self {
            f_ac: PiecewiseLinear::constant(0.0),
            atoms: Vec::new(),
        }
    }

    pub fn f_ac(&self) -> &PiecewiseLinear {
        &self.f_ac
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn singular_mass(&self) -> f64 {
        neumaier_sum(self.atoms.iter().map(|a| a.mass))
    }

    pub fn total_mass(&self) -> f64 {
        self.f_ac.right_value() + self.singular_mass()
    }

    /// Cumulative distribution `F(x)`; see [`Side`].
    pub fn eval_cumulative(&self, x: f64, side: Side) -> f64 {
        let count = match side {
            Side::Left => self.atoms.partition_point(|a| a.position < x),
            Side::Right => self.atoms.partition_point(|a| a.position <= x),
        };
        self.f_ac.eval(x) + neumaier_sum(self.atoms[..count].iter().map(|a| a.mass))
    }
}

/// Compensated summation, used wherever total energies are accumulated.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Scalar function of one variable shared between threads.
pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Admissible initial datum `(u, mu)`: `u` and `u_x` as evaluators, the
/// cumulative absolutely continuous energy `F_ac`, and explicit atoms.
/// Outside `support` the derivative vanishes and `u` is constant.
#[derive(Clone)]
pub struct InitialDatum {
    name: String,
    u: Evaluator,
    u_x: Evaluator,
    f_ac: Evaluator,
    atoms: Vec<Atom>,
    support: (f64, f64),
    breakpoints: Vec<f64>,
    monotone_pieces: Vec<(f64, f64)>,
}

impl fmt::Debug for InitialDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialDatum")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("atoms", &self.atoms)
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

impl InitialDatum {
    pub fn new(name: impl Into<String>, u: Evaluator, u_x: Evaluator, f_ac: Evaluator, support: (f64, f64)) -> Result<Self> {
        if !(support.0 <= support.1) || !support.0.is_finite() || !support.1.is_finite() {
            return Err(HsError::InvalidInput(format!("support hint must be a finite interval (got {support:?})")));
        }
        Ok(Self {
            name: name.into(),
            u,
            u_x,
            f_ac,
            atoms: Vec::new(),
            support,
            breakpoints: Vec::new(),
            monotone_pieces: vec![support],
        })
    }

    /// Adds point masses. Atoms must lie inside the support hint.
    pub fn with_atoms(mut self, mut atoms: Vec<Atom>) -> Result<Self> {
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        if let Some(a) = atoms.iter().find(|a| a.position < self.support.0 || a.position > self.support.1) {
            return Err(HsError::InvalidInput(format!("atom at {} lies outside the support hint", a.position)));
        }
        self.atoms = atoms;
        Ok(self)
    }

    /// Kinks or integrable singularities of `u_x`, used to split quadratures.
    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.sort_by(f64::total_cmp);
        points.dedup();
        self.breakpoints = points;
        self
    }

    /// Intervals on which `u_x` is continuous and monotone.
    pub fn with_monotone_pieces(mut self, pieces: Vec<(f64, f64)>) -> Self {
        self.monotone_pieces = pieces;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn u(&self, x: f64) -> f64 {
        (self.u)(x)
    }

    pub fn u_x(&self, x: f64) -> f64 {
        (self.u_x)(x)
    }

    pub fn f_ac(&self, x: f64) -> f64 {
        (self.f_ac)(x)
    }

    pub fn u_evaluator(&self) -> &Evaluator {
        &self.u
    }

    pub fn u_x_evaluator(&self) -> &Evaluator {
        &self.u_x
    }

    pub fn f_ac_evaluator(&self) -> &Evaluator {
        &self.f_ac
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn monotone_pieces(&self) -> &[(f64, f64)] {
        &self.monotone_pieces
    }

    /// Total energy `mu(R)`.
    pub fn total_energy(&self) -> f64 {
        self.f_ac(self.support.1) + neumaier_sum(self.atoms.iter().map(|a| a.mass))
    }

    /// Cumulative energy `F(x) = F_ac(x) + mu_sing((-inf, x))` (or `]` for `Side::Right`).
    pub fn cumulative(&self, x: f64, side: Side) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| match side {
                Side::Left => a.position < x,
                Side::Right => a.position <= x,
            })
            .map(|a| a.mass)
            .sum();
        self.f_ac(x) + atoms
    }

    pub fn u_minus(&self) -> f64 {
        self.u(self.support.0)
    }

    pub fn u_plus(&self) -> f64 {
        self.u(self.support.1)
    }
}

/// Continuous piecewise-linear datum through `points` with constant extension.
/// `u_x` is piecewise constant and `F_ac` is its exact cumulative square.
pub fn make_multipeakon(points: &[(f64, f64)]) -> Result<InitialDatum> {
    if points.is_empty() {
        return Err(HsError::InvalidInput("multipeakon needs at least one breakpoint".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let us: Vec<f64> = points.iter().map(|p| p.1).collect();
    let profile = PiecewiseLinear::new(xs.clone(), us)?;
    let slopes = profile.slopes();
    let mut cum = vec![0.0];
    for (w, s) in xs.windows(2).zip(&slopes) {
        let last = *cum.last().unwrap();
        cum.push(last + s * s * (w[1] - w[0]));
    }
    let energy = PiecewiseLinear::new(xs.clone(), cum)?;
    let derivative = profile.derivative();
    let support = (xs[0], xs[xs.len() - 1]);
    let pieces: Vec<(f64, f64)> = xs.windows(2).map(|w| (w[0], w[1])).collect();
    let u: Evaluator = Arc::new(move |x| profile.eval(x));
    let u_x: Evaluator = Arc::new(move |x| derivative.eval(x));
    let f_ac: Evaluator = Arc::new(move |x| energy.eval(x));
    Ok(InitialDatum::new("multipeakon", u, u_x, f_ac, support)?
        .with_breakpoints(xs)
        .with_monotone_pieces(pieces))
}

/// Datum of the worked wave-breaking example: `u = 1/2` left of 0, slope `-1`
/// on `[0, 1/2]`, zero to the right.
pub fn appendix_a_datum() -> InitialDatum {
    let mut d = make_multipeakon(&[(0.0, 0.5), (0.5, 0.0)]).expect("valid breakpoints");
    d.name = "appendixA".into();
    d
}

/// `u = cos(pi x)` on `[0, 4]`, equal to 1 elsewhere; `dmu = u_x^2 dx`.
pub fn cosine_datum() -> InitialDatum {
    use std::f64::consts::PI;
    let u: Evaluator = Arc::new(|x| if (0.0..=4.0).contains(&x) { (PI * x).cos() } else { 1.0 });
    let u_x: Evaluator = Arc::new(|x| if (0.0..=4.0).contains(&x) { -PI * (PI * x).sin() } else { 0.0 });
    let f_ac: Evaluator = Arc::new(|x: f64| {
        let x = x.clamp(0.0, 4.0);
        0.5 * PI * PI * x - 0.25 * PI * (2.0 * PI * x).sin()
    });
    InitialDatum::new("cosine", u, u_x, f_ac, (0.0, 4.0))
        .expect("valid support")
        .with_breakpoints(vec![0.0, 4.0])
        .with_monotone_pieces(vec![(0.0, 0.5), (0.5, 1.5), (1.5, 2.5), (2.5, 3.5), (3.5, 4.0)])
}

/// Cusped datum `u = |x|^{2/3}` on `[a, b]`, constant outside; `dmu = u_x^2 dx`.
pub fn cusp_datum(a: f64, b: f64) -> Result<InitialDatum> {
    if !(a <= b) {
        return Err(HsError::InvalidInput(format!("cusp datum needs a <= b (got a = {a}, b = {b})")));
    }
    let u: Evaluator = Arc::new(move |x: f64| x.clamp(a, b).cbrt().powi(2));
    let u_x: Evaluator = Arc::new(move |x: f64| {
        if x < a || x > b || x == 0.0 {
            0.0
        } else {
            (2.0 / 3.0) / x.cbrt()
        }
    });
    let f_ac: Evaluator = Arc::new(move |x: f64| (4.0 / 3.0) * (x.clamp(a, b).cbrt() - a.cbrt()));
    let mut breaks = vec![a, b];
    let mut pieces = Vec::new();
    if a < 0.0 && b > 0.0 {
        breaks.push(0.0);
        pieces.push((a, 0.0));
        pieces.push((0.0, b));
    } else {
        pieces.push((a, b));
    }
    Ok(InitialDatum::new(format!("cusp({a},{b})"), u, u_x, f_ac, (a, b))?
        .with_breakpoints(breaks)
        .with_monotone_pieces(pieces))
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub passed: bool,
    /// Largest violation found: decrease of `F_ac`, negative atom mass, or the
    /// mean density mismatch `|dF_ac - int u_x^2| / len` on a sample interval.
    pub worst_violation: f64,
    pub failures: Vec<String>,
}

/// Checks monotonicity of `F_ac`, positivity of atoms and the sampled
/// consistency `F_ac(b) - F_ac(a) = int_a^b u_x^2`.
pub fn validate(d: &InitialDatum, tol: f64) -> ValidationReport {
    const SAMPLES: usize = 64;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let (lo, hi) = d.support;

    for a in &d.atoms {
        if !(a.mass > 0.0) {
            worst = worst.max(a.mass.abs().max(f64::MIN_POSITIVE));
            failures.push(format!("atom at {} has nonpositive mass {}", a.position, a.mass));
        }
    }

    let left = d.f_ac(lo);
    if left.abs() > tol {
        worst = worst.max(left.abs());
        failures.push(format!("F_ac does not vanish at the left end of the support ({left:e})"));
    }

    let mut grid: Vec<f64> = (0..=SAMPLES).map(|i| lo + (hi - lo) * i as f64 / SAMPLES as f64).collect();
    grid.extend(d.breakpoints.iter().copied().filter(|p| *p > lo && *p < hi));
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut prev = d.f_ac(grid[0]);
    for &x in &grid[1..] {
        let cur = d.f_ac(x);
        if cur < prev - tol {
            worst = worst.max(prev - cur);
            failures.push(format!("F_ac decreases near x = {x}"));
        }
        prev = cur;
    }

    let u_x = d.u_x.clone();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        if len <= 0.0 {
            continue;
        }
        let integral = match quadrature::integrate(|x| u_x(x).powi(2), a, b, tol * len) {
            Ok(v) => v,
            Err(e) => {
                failures.push(format!("quadrature failed on [{a}, {b}]: {e}"));
                worst = worst.max(f64::INFINITY);
                continue;
            }
        };
        let mismatch = (d.f_ac(b) - d.f_ac(a) - integral).abs();
        if mismatch > tol * len.max(1.0) {
            worst = worst.max(mismatch / len);
            failures.push(format!("dmu_ac != u_x^2 dx on [{a}, {b}] (mismatch {mismatch:e})"));
        }
    }

    ValidationReport {
        passed: failures.is_empty(),
        worst_violation: worst,
        failures,
    }
}

/// Eulerian state `(u, mu)` at a given time.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerianSolution {
    pub u: PiecewiseLinear,
    pub mu: EnergyMeasure,
    pub time: f64,
    pub alpha: f64,
}

impl EulerianSolution {
    pub fn eval_u(&self, x: f64) -> f64 {
        self.u.eval(x)
    }

    pub fn eval_f(&self, x: f64, side: Side) -> f64 {
        self.mu.eval_cumulative(x, side)
    }

    pub fn total_energy(&self) -> f64 {
        self.mu.total_mass()
    }

    /// Largest relative violation of `slope^2 * length = F_ac increment` over
    /// the linear pieces of `u` (relative to `max(increment, 1e-300)` plus the
    /// absolute floor `floor`).
    pub fn slope_identity_defect(&self, floor: f64) -> f64 {
        let nodes = self.u.nodes();
        let vals = self.u.values();
        let mut worst = 0.0f64;
        for k in 0..nodes.len().saturating_sub(1) {
            let (a, b) = (nodes[k], nodes[k + 1]);
            let slope = (vals[k + 1] - vals[k]) / (b - a);
            let lhs = slope * slope * (b - a);
            let rhs = self.mu.f_ac().eval(b) - self.mu.f_ac().eval(a);
            let defect = (lhs - rhs).abs() / (rhs.abs() + floor);
            worst = worst.max(defect);
        }
        worst
    }
}
