//! Finite weighted metric measure spaces.
//!
//! A space is a list of atoms with positive masses together with a metric,
//! given either by Euclidean coordinates or by an explicit distance matrix.
//! Balls are open: `B(x, r) = { y : d(y, x) < r }`. Since a finite space only
//! realizes finitely many member sets per center, every "for all balls"
//! statement is checked over the canonical family produced by
//! [`enumerate_canonical_balls`].

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rearrangement::SampleFunction;

/// Absolute slack (scaled by the largest distance) for metric-axiom checks.
pub const METRIC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub id: u64,
    pub mass: f64,
}

/// How distances are specified when building a space.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    /// One coordinate vector per atom, Euclidean distance.
    Euclidean(Vec<Vec<f64>>),
    /// Explicit symmetric distance matrix, row `i` belongs to atom `i`.
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
enum Metric {
    Euclidean { dim: usize, coords: Vec<f64> },
    Matrix { n: usize, entries: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricMeasureSpace {
    ids: Vec<u64>,
    masses: Vec<f64>,
    index: HashMap<u64, usize>,
    metric: Metric,
    total_mass: f64,
}

/// Validates atoms and metric and builds the space.
pub fn build_space(atoms: Vec<Atom>, metric: MetricSpec) -> Result<MetricMeasureSpace> {
    if atoms.is_empty() {
        return Err(Error::EmptySpace);
    }
    let mut index = HashMap::with_capacity(atoms.len());
    for (i, atom) in atoms.iter().enumerate() {
        if !atom.mass.is_finite() {
            return Err(Error::NonFinite(format!("mass of atom {}", atom.id)));
        }
        if atom.mass <= 0.0 {
            return Err(Error::NonPositiveMass { id: atom.id, mass: atom.mass });
        }
        if index.insert(atom.id, i).is_some() {
            return Err(Error::DuplicateAtomId(atom.id));
        }
    }
    let ids: Vec<u64> = atoms.iter().map(|a| a.id).collect();
    let masses: Vec<f64> = atoms.iter().map(|a| a.mass).collect();

    let metric = match metric {
        MetricSpec::Euclidean(coords) => euclidean_metric(&ids, coords)?,
        MetricSpec::Matrix(rows) => matrix_metric(&ids, rows)?,
    };
    let total_mass = masses.iter().sum();
    Ok(MetricMeasureSpace { ids, masses, index, metric, total_mass })
}

fn euclidean_metric(ids: &[u64], coords: Vec<Vec<f64>>) -> Result<Metric> {
    if coords.len() != ids.len() {
        return Err(Error::BadParams(format!(
            "{} coordinate vectors for {} atoms",
            coords.len(),
            ids.len()
        )));
    }
    let dim = coords[0].len();
    let mut flat = Vec::with_capacity(dim * ids.len());
    for (id, point) in ids.iter().zip(&coords) {
        if point.len() != dim {
            return Err(Error::DimensionMismatch { id: *id, expected: dim, found: point.len() });
        }
        if point.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("coordinates of atom {id}")));
        }
        flat.extend_from_slice(point);
    }
    // Distinct atoms must sit at distinct points.
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| {
        coords[a]
            .iter()
            .zip(&coords[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for w in order.windows(2) {
        if coords[w[0]] == coords[w[1]] {
            return Err(Error::MetricAxiomViolation {
                a: ids[w[0]],
                b: ids[w[1]],
                c: ids[w[1]],
                reason: "distinct atoms at distance 0".into(),
            });
        }
    }
    Ok(Metric::Euclidean { dim, coords: flat })
}

fn matrix_metric(ids: &[u64], rows: Vec<Vec<f64>>) -> Result<Metric> {
    let n = ids.len();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::BadParams(format!("distance matrix must be {n} x {n}")));
    }
    let entries: Vec<f64> = rows.into_iter().flatten().collect();
    let at = |i: usize, j: usize| entries[i * n + j];
    if entries.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("distance matrix".into()));
    }
    let scale = entries.iter().fold(1.0_f64, |m, &d| m.max(d.abs()));
    let tol = METRIC_TOLERANCE * scale;
    let violation = |a: usize, b: usize, c: usize, reason: &str| Error::MetricAxiomViolation {
        a: ids[a],
        b: ids[b],
        c: ids[c],
        reason: reason.to_string(),
    };
    for i in 0..n {
        if at(i, i).abs() > tol {
            return Err(violation(i, i, i, "d(x, x) != 0"));
        }
        for j in 0..n {
            if at(i, j) < 0.0 {
                return Err(violation(i, j, j, "negative distance"));
            }
            if (at(i, j) - at(j, i)).abs() > tol {
                return Err(violation(i, j, i, "d(a, b) != d(b, a)"));
            }
            if i != j && at(i, j) <= tol {
                return Err(violation(i, j, j, "distinct atoms at distance 0"));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if at(i, k) > at(i, j) + at(j, k) + tol {
                    return Err(violation(i, j, k, "triangle inequality d(a, c) > d(a, b) + d(b, c)"));
                }
            }
        }
    }
    Ok(Metric::Matrix { n, entries })
}

impl MetricMeasureSpace {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn id(&self, atom: usize) -> u64 {
        self.ids[atom]
    }

    pub fn index_of(&self, id: u64) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownAtom(id))
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, atom: usize) -> f64 {
        self.masses[atom]
    }

    /// `μ(X)`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Sum of the masses of `atoms`.
    pub fn mass_of(&self, atoms: &[usize]) -> f64 {
        atoms.iter().map(|&a| self.masses[a]).sum()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        match &self.metric {
            Metric::Euclidean { dim, coords } => {
                let (p, q) = (&coords[a * dim..(a + 1) * dim], &coords[b * dim..(b + 1) * dim]);
                p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
            }
            Metric::Matrix { n, entries } => entries[a * n + b],
        }
    }

    pub fn distances_from(&self, center: usize) -> Vec<f64> {
        (0..self.len()).map(|y| self.distance(center, y)).collect()
    }

    /// Coordinates of an atom, for Euclidean spaces.
    pub fn coords(&self, atom: usize) -> Option<&[f64]> {
        match &self.metric {
            Metric::Euclidean { dim, coords } => Some(&coords[atom * dim..(atom + 1) * dim]),
            Metric::Matrix { .. } => None,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.metric, Metric::Euclidean { .. })
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut diam = 0.0_f64;
        for a in 0..n {
            for b in a + 1..n {
                diam = diam.max(self.distance(a, b));
            }
        }
        diam
    }

    /// Smallest distance from `atom` to any other atom, `None` for a one-point space.
    pub fn separation(&self, atom: usize) -> Option<f64> {
        (0..self.len())
            .filter(|&y| y != atom)
            .map(|y| self.distance(atom, y))
            .min_by(f64::total_cmp)
    }

    /// Atoms and metric as a [`MetricSpec`]; Euclidean spaces keep coordinates.
    pub fn metric_spec(&self) -> MetricSpec {
        match &self.metric {
            Metric::Euclidean { dim, coords } => {
                MetricSpec::Euclidean(coords.chunks(*dim.max(&1)).map(<[f64]>::to_vec).collect())
            }
            Metric::Matrix { n, entries } => {
                MetricSpec::Matrix(entries.chunks(*n).map(<[f64]>::to_vec).collect())
            }
        }
    }

    pub fn atoms(&self) -> Vec<Atom> {
        self.ids.iter().zip(&self.masses).map(|(&id, &mass)| Atom { id, mass }).collect()
    }

    /// Same metric, every mass multiplied by `factor`.
    pub fn with_scaled_masses(&self, factor: f64) -> Result<Self> {
        let atoms = self.atoms().into_iter().map(|a| Atom { mass: a.mass * factor, ..a }).collect();
        build_space(atoms, self.metric_spec())
    }

    /// Same masses, every distance multiplied by `factor`.
    pub fn with_scaled_metric(&self, factor: f64) -> Result<Self> {
        let spec = match self.metric_spec() {
            MetricSpec::Euclidean(c) => MetricSpec::Euclidean(scale_rows(c, factor)),
            MetricSpec::Matrix(m) => MetricSpec::Matrix(scale_rows(m, factor)),
        };
        build_space(self.atoms(), spec)
    }
}

fn scale_rows(rows: Vec<Vec<f64>>, factor: f64) -> Vec<Vec<f64>> {
    rows.into_iter().map(|r| r.into_iter().map(|x| x * factor).collect()).collect()
}

/// An open ball `{ y : d(y, center) < radius }`; `center` is an atom index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: usize, radius: f64) -> Self {
        Ball { center, radius }
    }

    /// Concentric ball with radius scaled by `factor`.
    pub fn dilate(&self, factor: f64) -> Ball {
        Ball { center: self.center, radius: self.radius * factor }
    }
}

/// Atoms at distance strictly less than the radius, in index order.
pub fn ball_members(space: &MetricMeasureSpace, ball: &Ball) -> Result<Vec<usize>> {
    if ball.center >= space.len() {
        return Err(Error::UnknownAtom(ball.center as u64));
    }
    Ok((0..space.len()).filter(|&y| space.distance(ball.center, y) < ball.radius).collect())
}

/// Atoms with `d(y, center) <= reach`, in index order.
pub fn closed_members(space: &MetricMeasureSpace, center: usize, reach: f64) -> Vec<usize> {
    (0..space.len()).filter(|&y| space.distance(center, y) <= reach).collect()
}

/// One representative of a realizable (center, member set) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalBall {
    pub ball: Ball,
    /// Largest distance from the center to a member.
    pub reach: f64,
    /// Number of members; the members are the first `count` atoms of the
    /// center's distance order.
    pub count: usize,
    /// Cached `μ(B)`, summed in distance order.
    pub mass: f64,
}

/// All canonical balls, ordered by center index and then by radius.
#[derive(Debug, Clone)]
pub struct BallFamily {
    orders: Vec<Vec<usize>>,
    balls: Vec<CanonicalBall>,
}

impl BallFamily {
    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn balls(&self) -> &[CanonicalBall] {
        &self.balls
    }

    pub fn get(&self, i: usize) -> &CanonicalBall {
        &self.balls[i]
    }

    /// Members of a canonical ball, sorted by distance from its center.
    pub fn members(&self, ball: &CanonicalBall) -> &[usize] {
        &self.orders[ball.ball.center][..ball.count]
    }

    /// Atoms sorted by distance from `center` (ties by index).
    pub fn distance_order(&self, center: usize) -> &[usize] {
        &self.orders[center]
    }

    pub fn iter(&self) -> impl Iterator<Item = &CanonicalBall> {
        self.balls.iter()
    }
}

/// Radius strictly between `reach` and `next`, so that the open ball picks up
/// exactly the atoms at distance `<= reach`.
fn representative_radius(reach: f64, next: Option<f64>) -> f64 {
    match next {
        Some(next) => {
            let mid = reach + (next - reach) / 2.0;
            if mid > reach && mid < next {
                mid
            } else {
                // adjacent floats: the open ball of radius `next` still excludes it
                next
            }
        }
        None if reach > 0.0 => reach * (1.0 + 2f64.powi(-20)),
        None => 1.0,
    }
}

/// Every distinct open-ball member set, once per center.
pub fn enumerate_canonical_balls(space: &MetricMeasureSpace) -> BallFamily {
    let n = space.len();
    let mut orders = Vec::with_capacity(n);
    let mut balls = Vec::new();
    for center in 0..n {
        let dist = space.distances_from(center);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));

        let mut mass = 0.0;
        let mut i = 0;
        while i < n {
            let reach = dist[order[i]];
            while i < n && dist[order[i]] == reach {
                mass += space.mass(order[i]);
                i += 1;
            }
            let next = (i < n).then(|| dist[order[i]]);
            balls.push(CanonicalBall {
                ball: Ball::new(center, representative_radius(reach, next)),
                reach,
                count: i,
                mass,
            });
        }
        orders.push(order);
    }
    BallFamily { orders, balls }
}

/// `sup μ(B(x, 2r)) / μ(B(x, r))` over all centers and all radii `r > 0`.
///
/// For a fixed center both masses are step functions of `r` that only jump at
/// distances `D` (for `B(x, r)`) and `D / 2` (for `B(x, 2r)`), so one radius
/// strictly inside each interval between consecutive jump points realizes
/// every value of the ratio.
pub fn doubling_constant(space: &MetricMeasureSpace) -> f64 {
    let n = space.len();
    let mut best = 1.0_f64;
    for center in 0..n {
        let dist = space.distances_from(center);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]));
        let sorted: Vec<f64> = order.iter().map(|&a| dist[a]).collect();
        let mut cumulative = Vec::with_capacity(n);
        let mut acc = 0.0;
        for &a in &order {
            acc += space.mass(a);
            cumulative.push(acc);
        }
        let mass_within = |r: f64| {
            let k = sorted.partition_point(|&d| d < r);
            if k == 0 {
                0.0
            } else {
                cumulative[k - 1]
            }
        };

        let mut jumps: Vec<f64> = sorted
            .iter()
            .filter(|&&d| d > 0.0)
            .flat_map(|&d| [d, d / 2.0])
            .collect();
        jumps.sort_by(f64::total_cmp);
        jumps.dedup();
        for w in jumps.windows(2) {
            let r = w[0] + (w[1] - w[0]) / 2.0;
            let ratio = mass_within(2.0 * r) / mass_within(r);
            best = best.max(ratio);
        }
    }
    best
}

/// Atoms `x_k = 2^-k`, `k = 0..=k_max`, with masses `2^-k` on the real line.
pub fn dyadic_counterexample_space(k_max: usize) -> Result<MetricMeasureSpace> {
    if k_max < 1 {
        return Err(Error::BadParams("dyadic space needs K >= 1".into()));
    }
    if k_max > 1000 {
        return Err(Error::BadParams("dyadic space needs K <= 1000".into()));
    }
    let atoms = (0..=k_max).map(|k| Atom { id: k as u64, mass: dyadic(k) }).collect();
    let coords = (0..=k_max).map(|k| vec![dyadic(k)]).collect();
    build_space(atoms, MetricSpec::Euclidean(coords))
}

fn dyadic(k: usize) -> f64 {
    2f64.powi(-(k as i32))
}

/// `f(x_k) = (-1)^k k` on a space built by [`dyadic_counterexample_space`].
pub fn counterexample_function(space: &MetricMeasureSpace) -> Result<SampleFunction<'_>> {
    let shaped = space.len() >= 2
        && space.ids().iter().enumerate().all(|(i, &id)| {
            id == i as u64
                && space.mass(i) == dyadic(i)
                && space.coords(i).is_some_and(|c| c == [dyadic(i)])
        });
    if !shaped {
        return Err(Error::WrongSpaceShape);
    }
    let values = (0..space.len())
        .map(|k| if k % 2 == 0 { k as f64 } else { -(k as f64) })
        .collect();
    SampleFunction::new(space, values)
}

/// Grid discretization of `log(|x|^-n)` on the unit ball of `R^n`.
#[derive(Debug, Clone)]
pub struct LogExample {
    pub space: MetricMeasureSpace,
    pub values: Vec<f64>,
    pub dimension: usize,
    pub cells_per_axis: usize,
}

impl LogExample {
    pub fn function(&self) -> SampleFunction<'_> {
        SampleFunction::new(&self.space, self.values.clone())
            .expect("log example values match its space")
    }
}

const SUBSAMPLES: usize = 32;

/// Uniform `m`-per-axis grid on `[-1, 1]^n` restricted to the unit ball.
///
/// Each cell becomes an atom at its center carrying the Lebesgue measure of
/// its overlap with the ball (exact in 1D, 32x32 subsampling for boundary
/// cells in 2D). The value is `-n log|center|`; a cell centered at the origin
/// is evaluated a quarter cell off-center.
pub fn log_example_space(n: usize, m: usize) -> Result<LogExample> {
    if !(1..=2).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if m < 10 {
        return Err(Error::BadParams("log example needs m >= 10 cells per axis".into()));
    }
    let h = 2.0 / m as f64;
    let center = |i: usize| -1.0 + h * (i as f64 + 0.5);
    let value = |radius: f64| {
        let r = if radius == 0.0 { h / 4.0 } else { radius };
        -(n as f64) * r.ln()
    };

    let mut atoms = Vec::new();
    let mut coords = Vec::new();
    let mut values = Vec::new();
    let mut push = |point: Vec<f64>, mass: f64, radius: f64| {
        atoms.push(Atom { id: atoms.len() as u64, mass });
        coords.push(point);
        values.push(value(radius));
    };

    match n {
        1 => {
            for i in 0..m {
                let (lo, hi) = (-1.0 + h * i as f64, -1.0 + h * (i + 1) as f64);
                let overlap = hi.min(1.0) - lo.max(-1.0);
                if overlap > 0.0 {
                    let x = center(i);
                    push(vec![x], overlap, x.abs());
                }
            }
        }
        _ => {
            let area = h * h;
            for i in 0..m {
                for j in 0..m {
                    let (x, y) = (center(i), center(j));
                    let (x0, y0) = (-1.0 + h * i as f64, -1.0 + h * j as f64);
                    let (x1, y1) = (x0 + h, y0 + h);
                    let far = x0.abs().max(x1.abs()).hypot(y0.abs().max(y1.abs()));
                    let near_x = if x0 <= 0.0 && x1 >= 0.0 { 0.0 } else { x0.abs().min(x1.abs()) };
                    let near_y = if y0 <= 0.0 && y1 >= 0.0 { 0.0 } else { y0.abs().min(y1.abs()) };
                    let mass = if far <= 1.0 {
                        area
                    } else if near_x.hypot(near_y) >= 1.0 {
                        0.0
                    } else {
                        let step = h / SUBSAMPLES as f64;
                        let mut inside = 0usize;
                        for a in 0..SUBSAMPLES {
                            for b in 0..SUBSAMPLES {
                                let px = x0 + step * (a as f64 + 0.5);
                                let py = y0 + step * (b as f64 + 0.5);
                                if px.hypot(py) < 1.0 {
                                    inside += 1;
                                }
                            }
                        }
                        area * inside as f64 / (SUBSAMPLES * SUBSAMPLES) as f64
                    };
                    if mass > 0.0 {
                        push(vec![x, y], mass, x.hypot(y));
                    }
                }
            }
        }
    }
    let space = build_space(atoms, MetricSpec::Euclidean(coords))?;
    Ok(LogExample { space, values, dimension: n, cells_per_axis: m })
}
