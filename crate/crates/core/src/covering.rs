//! Calderón–Zygmund-type covering of `E = F ∩ B0` by balls balanced between
//! `F` and its complement, built from stopping radii and a greedy Vitali
//! selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_measure::{ball_members, doubling_constant, Ball, MetricMeasureSpace};
use crate::numeric::EXACT_TOL;

/// A ball `B0`, a set `F ⊆ 3B0` with `μ(F) <= μ(B0)/2`, and `E = F ∩ B0`.
#[derive(Debug, Clone)]
pub struct CoverInstance<'s> {
    space: &'s MetricMeasureSpace,
    b0: Ball,
    in_f: Vec<bool>,
    f: Vec<usize>,
    e: Vec<usize>,
    f_mass: f64,
    b0_mass: f64,
}

impl<'s> CoverInstance<'s> {
    /// `f_ids` are atom ids; repeats are ignored.
    pub fn new(space: &'s MetricMeasureSpace, b0: Ball, f_ids: &[u64]) -> Result<Self> {
        if !(b0.radius > 0.0 && b0.radius.is_finite()) {
            return Err(Error::BadParams(format!("B0 radius must be positive, got {}", b0.radius)));
        }
        let b0_members = ball_members(space, &b0)?;
        let triple = ball_members(space, &b0.dilate(3.0))?;
        let mut in_f = vec![false; space.len()];
        for &id in f_ids {
            in_f[space.index_of(id)?] = true;
        }
        if let Some(outside) = (0..space.len()).find(|&a| in_f[a] && !triple.contains(&a)) {
            return Err(Error::HypothesisViolated(format!("atom {} of F lies outside 3B0", space.id(outside))));
        }
        let f: Vec<usize> = (0..space.len()).filter(|&a| in_f[a]).collect();
        let e: Vec<usize> = b0_members.iter().copied().filter(|&a| in_f[a]).collect();
        let f_mass = space.mass_of(&f);
        let b0_mass = space.mass_of(&b0_members);
        if 2.0 * f_mass > b0_mass {
            return Err(Error::HypothesisViolated(format!("μ(F) = {f_mass} exceeds μ(B0)/2 = {}", b0_mass / 2.0)));
        }
        Ok(CoverInstance { space, b0, in_f, f, e, f_mass, b0_mass })
    }

    pub fn space(&self) -> &'s MetricMeasureSpace {
        self.space
    }

    pub fn b0(&self) -> Ball {
        self.b0
    }

    pub fn r0(&self) -> f64 {
        self.b0.radius
    }

    pub fn f(&self) -> &[usize] {
        &self.f
    }

    pub fn e(&self) -> &[usize] {
        &self.e
    }

    pub fn contains_f(&self, atom: usize) -> bool {
        self.in_f[atom]
    }

    pub fn f_mass(&self) -> f64 {
        self.f_mass
    }

    pub fn b0_mass(&self) -> f64 {
        self.b0_mass
    }

    /// `(μ(B ∩ F), μ(B \ F))` for the open ball of `radius` around `center`.
    fn split_mass(&self, center: usize, radius: f64) -> (f64, f64) {
        let mut inside = 0.0;
        let mut outside = 0.0;
        for y in 0..self.space.len() {
            if self.space.distance(center, y) < radius {
                if self.in_f[y] {
                    inside += self.space.mass(y);
                } else {
                    outside += self.space.mass(y);
                }
            }
        }
        (inside, outside)
    }

    /// `2^{1-k} r0`, the radius of `5B_x` at scale `k`.
    pub fn scale_radius(&self, k: u32) -> f64 {
        self.b0.radius * 2f64.powi(1 - k as i32)
    }
}

/// Greatest `k >= 0` with `μ(B(x, 2^{1-k} r0) ∩ F) <= μ(B(x, 2^{1-k} r0) \ F)`.
///
/// Once the radius is at most the distance from `x` to its nearest neighbour
/// the ball is `{x} ⊆ F` and the condition fails for good, so the scan runs
/// down from that scale.
pub fn stopping_radius(instance: &CoverInstance, x: usize) -> Result<u32> {
    let space = instance.space;
    if x >= space.len() || !instance.e.contains(&x) {
        let id = if x < space.len() { space.id(x) } else { x as u64 };
        return Err(Error::NotInE(id));
    }
    if 2.0 * instance.f_mass > instance.b0_mass {
        return Err(Error::HypothesisViolated("μ(F) exceeds μ(B0)/2".into()));
    }
    let separation = space.separation(x).unwrap_or(0.0);
    let mut singleton_scale = 0u32;
    while instance.scale_radius(singleton_scale) > separation {
        singleton_scale += 1;
    }
    (0..singleton_scale)
        .rev()
        .find(|&k| {
            let (inside, outside) = instance.split_mass(x, instance.scale_radius(k));
            inside <= outside
        })
        .ok_or_else(|| Error::HypothesisViolated(format!("no balanced scale around atom {}", space.id(x))))
}

/// Greedy selection by nonincreasing radius, ties by center id: a ball is
/// kept iff its member set misses every kept ball. Returns indices into
/// `balls` in selection order.
pub fn vitali_select(space: &MetricMeasureSpace, balls: &[Ball]) -> Result<Vec<usize>> {
    let members = balls.iter().map(|b| ball_members(space, b)).collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| {
        balls[b].radius
            .total_cmp(&balls[a].radius)
            .then(space.id(balls[a].center).cmp(&space.id(balls[b].center)))
            .then(a.cmp(&b))
    });
    let mut taken = vec![false; space.len()];
    let mut kept = Vec::new();
    for i in order {
        if members[i].iter().all(|&a| !taken[a]) {
            for &a in &members[i] {
                taken[a] = true;
            }
            kept.push(i);
        }
    }
    Ok(kept)
}

/// A selected ball `B_i` with its dilate `5B_i` and the inner ball `(5/8)B_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedBall {
    pub center: u64,
    pub k: u32,
    pub radius: f64,
    pub members: Vec<u64>,
    pub dilate_radius: f64,
    pub dilate_members: Vec<u64>,
    pub dilate_mass: f64,
    pub dilate_f_mass: f64,
    pub dilate_complement_mass: f64,
    pub inner_mass: f64,
    pub inner_f_mass: f64,
    /// `μ(5B ∩ F) <= μ(5B \ F)`.
    pub balanced: bool,
    /// `μ(5B) <= c_μ³ μ((5/8)B)`.
    pub doubling_step: bool,
    /// `μ((5/8)B) <= 2 μ((5/8)B ∩ F)`.
    pub density_step: bool,
    pub dilate_in_3b0: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverResult {
    pub balls: Vec<SelectedBall>,
    pub doubling: f64,
    pub f_mass: f64,
    pub dilate_mass: f64,
    /// `Σ μ(5B_i) / μ(F)`; 0 when `F` is empty.
    pub measured_constant: f64,
    /// `2 c_μ³`.
    pub bound: f64,
    /// `μ(E \ ∪ 5B_i)`.
    pub uncovered_mass: f64,
    pub disjoint: bool,
    pub property_i: bool,
    pub property_ii: bool,
    pub property_iii: bool,
    pub chain: bool,
    pub balls_in_3b0: bool,
    pub dilates_in_3b0: bool,
    /// Pairs of selected balls whose radii overlap geometrically,
    /// `d(x_i, x_j) < r_i + r_j`, even though their member sets are disjoint.
    pub geometric_overlaps: Vec<(u64, u64)>,
}

impl CoverResult {
    pub fn holds(&self) -> bool {
        self.disjoint && self.property_i && self.property_ii && self.property_iii && self.chain
    }
}

pub fn czd_cover(instance: &CoverInstance) -> Result<CoverResult> {
    czd_cover_with(instance, doubling_constant(instance.space))
}

/// As [`czd_cover`] with a precomputed doubling constant.
pub fn czd_cover_with(instance: &CoverInstance, doubling: f64) -> Result<CoverResult> {
    let space = instance.space;
    let scales = instance
        .e
        .par_iter()
        .map(|&x| stopping_radius(instance, x))
        .collect::<Result<Vec<u32>>>()?;
    let candidates: Vec<Ball> = instance
        .e
        .iter()
        .zip(&scales)
        .map(|(&x, &k)| Ball::new(x, instance.scale_radius(k) / 5.0))
        .collect();
    let kept = vitali_select(space, &candidates)?;

    let slack = 1.0 + EXACT_TOL;
    let cube = doubling.powi(3);
    let triple = ball_members(space, &instance.b0.dilate(3.0))?;
    let mut covered = vec![false; space.len()];
    let mut taken = vec![false; space.len()];
    let mut disjoint = true;
    let mut balls = Vec::with_capacity(kept.len());
    for &i in &kept {
        let x = candidates[i].center;
        let k = scales[i];
        let members = ball_members(space, &candidates[i])?;
        for &a in &members {
            disjoint &= !taken[a];
            taken[a] = true;
        }
        let dilate = Ball::new(x, instance.scale_radius(k));
        let dilate_members = ball_members(space, &dilate)?;
        for &a in &dilate_members {
            covered[a] = true;
        }
        let (dilate_f_mass, dilate_complement_mass) = instance.split_mass(x, dilate.radius);
        let dilate_mass = space.mass_of(&dilate_members);
        // (5/8)B_x is the scale-(k + 3) ball, where balance fails
        let inner = instance.scale_radius(k + 3);
        let (inner_f_mass, inner_rest) = instance.split_mass(x, inner);
        let inner_mass = inner_f_mass + inner_rest;
        balls.push(SelectedBall {
            center: space.id(x),
            k,
            radius: candidates[i].radius,
            members: members.iter().map(|&a| space.id(a)).collect(),
            dilate_radius: dilate.radius,
            dilate_members: dilate_members.iter().map(|&a| space.id(a)).collect(),
            dilate_mass,
            dilate_f_mass,
            dilate_complement_mass,
            inner_mass,
            inner_f_mass,
            balanced: dilate_f_mass <= dilate_complement_mass,
            doubling_step: dilate_mass <= cube * inner_mass * slack,
            density_step: inner_mass <= 2.0 * inner_f_mass * slack,
            dilate_in_3b0: dilate_members.iter().all(|a| triple.contains(a)),
        });
    }

    let uncovered_mass = instance.e.iter().filter(|&&a| !covered[a]).map(|&a| space.mass(a)).sum();
    let total_dilate: f64 = balls.iter().map(|b| b.dilate_mass).sum();
    let measured_constant = if instance.f_mass > 0.0 { total_dilate / instance.f_mass } else { 0.0 };
    let bound = 2.0 * cube;
    let balls_in_3b0 = (0..space.len()).all(|a| !taken[a] || triple.contains(&a));

    let mut geometric_overlaps = Vec::new();
    for (a, &i) in kept.iter().enumerate() {
        for &j in &kept[a + 1..] {
            let (bi, bj) = (candidates[i], candidates[j]);
            if space.distance(bi.center, bj.center) < bi.radius + bj.radius {
                geometric_overlaps.push((space.id(bi.center), space.id(bj.center)));
            }
        }
    }

    Ok(CoverResult {
        property_i: balls.iter().all(|b| b.balanced),
        property_ii: uncovered_mass == 0.0,
        property_iii: measured_constant <= bound * slack,
        chain: balls.iter().all(|b| b.doubling_step && b.density_step),
        dilates_in_3b0: balls.iter().all(|b| b.dilate_in_3b0),
        balls,
        doubling,
        f_mass: instance.f_mass,
        dilate_mass: total_dilate,
        measured_constant,
        bound,
        uncovered_mass,
        disjoint,
        balls_in_3b0,
        geometric_overlaps,
    })
}

/// Dilation factor `1 + 2^{1-j}` of `B0` containing every `5B_i` when
/// `μ(F) <= μ(B0) / (2 c_μ^j)`.
pub fn refined_containment_factor(j: u32) -> f64 {
    1.0 + 2f64.powi(1 - j as i32)
}

/// Whether every dilate of `result` lies in the open ball `factor · B0`.
pub fn dilates_within(instance: &CoverInstance, result: &CoverResult, factor: f64) -> Result<bool> {
    let space = instance.space;
    let outer = ball_members(space, &instance.b0.dilate(factor))?;
    let mut inside = vec![false; space.len()];
    for a in outer {
        inside[a] = true;
    }
    for b in &result.balls {
        for &id in &b.dilate_members {
            if !inside[space.index_of(id)?] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Under `μ(F) <= μ(B0) / (2 c_μ^j)`, every stopping scale is at least `j`,
/// so each `5B_i` has radius at most `2^{1-j} r0` and lies in
/// `(1 + 2^{1-j}) B0`.
pub fn refined_containment_check(instance: &CoverInstance, j: u32) -> Result<bool> {
    let doubling = doubling_constant(instance.space);
    if 2.0 * doubling.powi(j as i32) * instance.f_mass > instance.b0_mass {
        return Err(Error::HypothesisViolated(format!(
            "μ(F) = {} exceeds μ(B0)/(2c^{j}) = {}",
            instance.f_mass,
            instance.b0_mass / (2.0 * doubling.powi(j as i32))
        )));
    }
    let result = czd_cover_with(instance, doubling)?;
    dilates_within(instance, &result, refined_containment_factor(j))
}
