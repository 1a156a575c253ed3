#![allow(dead_code)]

use hunter_saxton::{make_multipeakon, project, to_lagrangian, Atom, EnergyMeasure, InitialDatum, LagrangianState, PiecewiseLinear, ProjectionConfig};
use proptest::prelude::*;

/// Nodes `x0 + i h` with the given values.
pub fn uniform_multipeakon(x0: f64, h: f64, values: &[f64]) -> InitialDatum {
    let pts: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &u)| (x0 + h * i as f64, u)).collect();
    make_multipeakon(&pts).unwrap()
}

pub fn lagrangian(d: &InitialDatum, dx: f64, alpha: f64) -> LagrangianState {
    let cfg = ProjectionConfig::for_datum(d, dx).unwrap();
    to_lagrangian(&project(d, &cfg).unwrap(), alpha)
}

/// Piecewise-linear data with 2..=12 nodes on a grid of spacing 1/2 (so every
/// datum node is an even grid node for `dx = 1/4`), values in `[-2, 2]`.
pub fn grid_datum() -> impl Strategy<Value = InitialDatum> {
    (-4i32..4, prop::collection::vec(-2.0f64..2.0, 2..=12))
        .prop_map(|(start, vals)| uniform_multipeakon(0.5 * start as f64, 0.5, &vals))
}

/// Irregular data: random node gaps, optionally with atoms.
pub fn irregular_datum() -> impl Strategy<Value = InitialDatum> {
    (
        prop::collection::vec((0.05f64..1.0, -2.0f64..2.0), 2..=10),
        prop::collection::vec((0.0f64..1.0, 0.01f64..1.0), 0..=2),
    )
        .prop_map(|(steps, atoms)| {
            let mut x = -1.0;
            let mut pts = Vec::new();
            for (gap, u) in steps {
                pts.push((x, u));
                x += gap;
            }
            let d = make_multipeakon(&pts).unwrap();
            let (lo, hi) = d.support();
            let mut atoms: Vec<Atom> = atoms.iter().map(|&(s, m)| Atom::new(lo + s * (hi - lo), m)).collect();
            atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
            atoms.dedup_by(|a, b| a.position == b.position);
            d.with_atoms(atoms).unwrap()
        })
}

/// Measure of total mass `mass` with a random absolutely continuous part on
/// `[-2, 2]` and up to two atoms.
pub fn measure(mass: f64) -> impl Strategy<Value = EnergyMeasure> {
    (
        prop::collection::vec((0.05f64..0.5, 0.0f64..1.0), 1..=8),
        prop::collection::vec((-2.0f64..2.0, 0.05f64..1.0), 0..=2),
    )
        .prop_map(move |(cells, atoms)| {
            let mut xs = vec![-2.0];
            let mut fs = vec![0.0];
            for (gap, inc) in &cells {
                xs.push(xs.last().unwrap() + gap);
                fs.push(fs.last().unwrap() + inc);
            }
            let mut atoms: Vec<Atom> = atoms.iter().map(|&(p, m)| Atom::new(p, m)).collect();
            atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
            atoms.dedup_by(|a, b| a.position == b.position);
            let total = fs.last().unwrap() + atoms.iter().map(|a| a.mass).sum::<f64>();
            let scale = if total > 0.0 { mass / total } else { 0.0 };
            for f in &mut fs {
                *f *= scale;
            }
            for a in &mut atoms {
                a.mass *= scale;
            }
            atoms.retain(|a| a.mass > 0.0);
            EnergyMeasure::new(PiecewiseLinear::new(xs, fs).unwrap(), atoms).unwrap()
        })
}
