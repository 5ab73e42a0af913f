//! Brute-force reference computations, written directly from the
//! definitions and independent of the library's step-function machinery.

#![allow(dead_code)]

use proptest::prelude::*;
use weakbmo::{build_space, Atom, MetricMeasureSpace, MetricSpec};

/// Points on a small lattice (so distances tie), masses from a short list,
/// values from integers or a continuous range.
pub fn sample(max_atoms: usize) -> impl Strategy<Value = (MetricMeasureSpace, Vec<f64>)> {
    let atom = (0i32..6, 0i32..6, prop::sample::select(vec![0.25, 0.5, 1.0, 2.0, 3.0]));
    let values = prop_oneof![(-4i32..=4).prop_map(f64::from), -10.0f64..10.0];
    prop::collection::vec((atom, values), 1..=max_atoms).prop_map(|rows| {
        let mut seen = Vec::new();
        let mut atoms = Vec::new();
        let mut coords = Vec::new();
        let mut vals = Vec::new();
        for ((x, y, m), v) in rows {
            if seen.contains(&(x, y)) {
                continue;
            }
            seen.push((x, y));
            atoms.push(Atom { id: atoms.len() as u64 * 3 + 1, mass: m });
            coords.push(vec![f64::from(x), f64::from(y)]);
            vals.push(v);
        }
        (build_space(atoms, MetricSpec::Euclidean(coords)).unwrap(), vals)
    })
}

pub fn mass_above(masses: &[f64], values: &[f64], lambda: f64) -> f64 {
    masses.iter().zip(values).filter(|(_, v)| v.abs() > lambda).map(|(m, _)| m).sum()
}

pub fn integral_above(masses: &[f64], values: &[f64], lambda: f64) -> f64 {
    masses.iter().zip(values).filter(|(_, v)| v.abs() > lambda).map(|(m, v)| m * v.abs()).sum()
}

/// `|f|` sorted decreasingly with the masses laid end to end on `[0, ∞)`.
pub fn layout(masses: &[f64], values: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = values.iter().map(|v| v.abs()).zip(masses.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut start = 0.0;
    pairs
        .into_iter()
        .map(|(v, m)| {
            let piece = (start, start + m, v);
            start += m;
            piece
        })
        .collect()
}

pub fn rearrangement_at(masses: &[f64], values: &[f64], t: f64) -> f64 {
    layout(masses, values).into_iter().find(|&(_, end, _)| t < end).map_or(0.0, |p| p.2)
}

pub fn maximal_average_at(masses: &[f64], values: &[f64], t: f64) -> f64 {
    let integral: f64 = layout(masses, values)
        .into_iter()
        .map(|(start, end, v)| v * (end.min(t) - start).max(0.0))
        .sum();
    integral / t
}

/// `sup_{λ>=0} ∫_{|g|>λ}|g| / μ(|g|>λ) - λ`, maximized over `λ ∈ {0} ∪ {|g_i|}`
/// and a handful of points just to the right of them.
pub fn tail_constant(masses: &[f64], values: &[f64]) -> f64 {
    let mut lambdas = vec![0.0];
    for v in values {
        lambdas.push(v.abs());
        lambdas.push(v.abs() * (1.0 + 1e-9) + 1e-12);
    }
    lambdas
        .into_iter()
        .filter_map(|l| {
            let d = mass_above(masses, values, l);
            (d > 0.0).then(|| integral_above(masses, values, l) / d - l)
        })
        .fold(0.0, f64::max)
}

/// Members of the open ball, from raw distances.
pub fn open_ball(space: &MetricMeasureSpace, center: usize, radius: f64) -> Vec<usize> {
    (0..space.len()).filter(|&y| space.distance(center, y) < radius).collect()
}

/// All distinct open-ball member sets per center, from radii just below and
/// above every distance.
pub fn brute_member_sets(space: &MetricMeasureSpace) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for x in 0..space.len() {
        let mut sets: Vec<Vec<usize>> = Vec::new();
        for y in 0..space.len() {
            let d = space.distance(x, y);
            for r in [d * (1.0 - 1e-9), d * (1.0 + 1e-9) + 1e-12] {
                let s = open_ball(space, x, r);
                if !s.is_empty() && !sets.contains(&s) {
                    sets.push(s);
                }
            }
        }
        sets.sort_by_key(Vec::len);
        out.extend(sets.into_iter().map(|s| (x, s)));
    }
    out
}

pub fn mass_of(space: &MetricMeasureSpace, atoms: &[usize]) -> f64 {
    atoms.iter().map(|&a| space.mass(a)).sum()
}

/// `max μ(B(x, 2r)) / μ(B(x, r))` over radii just to either side of every
/// distance and every half distance.
pub fn brute_doubling(space: &MetricMeasureSpace) -> f64 {
    let mut best = 1.0f64;
    for x in 0..space.len() {
        for y in 0..space.len() {
            let d = space.distance(x, y);
            if d == 0.0 {
                continue;
            }
            for base in [d, d / 2.0] {
                for r in [base * (1.0 - 1e-9), base * (1.0 + 1e-9)] {
                    let small = mass_of(space, &open_ball(space, x, r));
                    let big = mass_of(space, &open_ball(space, x, 2.0 * r));
                    best = best.max(big / small);
                }
            }
        }
    }
    best
}

pub fn mean(space: &MetricMeasureSpace, values: &[f64], members: &[usize]) -> f64 {
    members.iter().map(|&a| space.mass(a) * values[a]).sum::<f64>() / mass_of(space, members)
}

pub fn mean_oscillation(space: &MetricMeasureSpace, values: &[f64], members: &[usize]) -> f64 {
    let c = mean(space, values, members);
    members.iter().map(|&a| space.mass(a) * (values[a] - c).abs()).sum::<f64>() / mass_of(space, members)
}

/// Values and masses of `f - f_B` on the members of `B`.
pub fn centered(space: &MetricMeasureSpace, values: &[f64], members: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let c = mean(space, values, members);
    let masses = members.iter().map(|&a| space.mass(a)).collect();
    let vals = members.iter().map(|&a| values[a] - c).collect();
    (masses, vals)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
