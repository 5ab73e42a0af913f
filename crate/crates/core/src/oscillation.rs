//! Mean oscillation over balls: BMO norm, the tail-oscillation constant,
//! John–Nirenberg decay, and the enlarged-ball characterization of BMO.
//!
//! "For every ball" is checked over the canonical ball family. Every quantity
//! here depends on a ball only through its member set, except the enlarged
//! ball `ρB`, which is taken as the closed set `{d(y, x) <= ρ·reach}`: the
//! intersection of `B(x, ρr)` over all radii `r` realizing `B`, hence the
//! smallest (hardest) choice.
//!
//! Per-ball suprema over `λ` use the breakpoint reduction documented in
//! [`crate::weak_linf`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_measure::{
    ball_members, counterexample_function, doubling_constant, dyadic_counterexample_space,
    enumerate_canonical_balls, Ball, BallFamily, CanonicalBall,
};
use crate::numeric::EXACT_TOL;
use crate::rearrangement::{LevelSets, SampleFunction};
use crate::weak_linf::{decay_check, m_condition_ii_of, DecayWitness};

/// Mass-weighted mean of `f` over `members`; 0 for an empty or massless set.
pub fn ball_mean(f: &SampleFunction, members: &[usize]) -> f64 {
    let space = f.space();
    let mass: f64 = members.iter().map(|&a| space.mass(a)).sum();
    if mass <= 0.0 {
        return 0.0;
    }
    members.iter().map(|&a| space.mass(a) * f.value(a)).sum::<f64>() / mass
}

/// `f_B` for an arbitrary open ball.
pub fn ball_mean_of(f: &SampleFunction, ball: &Ball) -> Result<f64> {
    Ok(ball_mean(f, &ball_members(f.space(), ball)?))
}

/// `(1/μ(B)) ∫_B |f - c|`.
fn mean_deviation(f: &SampleFunction, members: &[usize], mass: f64, c: f64) -> f64 {
    let space = f.space();
    members.iter().map(|&a| space.mass(a) * (f.value(a) - c).abs()).sum::<f64>() / mass
}

/// Per-ball row of an oscillation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallOscillation {
    pub index: usize,
    pub center: u64,
    pub radius: f64,
    pub members: usize,
    pub mass: f64,
    pub mean: f64,
    pub oscillation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallWitness {
    pub value: f64,
    /// Index into the canonical family.
    pub ball: Option<usize>,
    pub lambda: Option<f64>,
}

impl BallWitness {
    const ZERO: BallWitness = BallWitness { value: 0.0, ball: None, lambda: None };

    fn offer(&mut self, value: f64, ball: usize, lambda: Option<f64>) {
        if value > self.value || (self.ball.is_none() && value >= self.value) {
            *self = BallWitness { value, ball: Some(ball), lambda };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub bmo_norm: BallWitness,
    pub bmto: BallWitness,
    pub balls: Vec<BallOscillation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JnWitness {
    pub ball: usize,
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JnCheck {
    pub holds: bool,
    /// Largest `lhs / rhs` found.
    pub worst: Option<JnWitness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEquivalence {
    pub holds: bool,
    pub witness: Option<(usize, DecayWitness)>,
    /// When the decay holds: whether the tail-oscillation constant is at most `c1 / c2`.
    pub bmto_within_c1_over_c2: Option<bool>,
}

/// Canonical balls of a function's space with per-ball means cached.
pub struct OscillationAnalysis<'a> {
    f: &'a SampleFunction<'a>,
    family: BallFamily,
    means: Vec<f64>,
}

impl<'a> OscillationAnalysis<'a> {
    pub fn new(f: &'a SampleFunction<'a>) -> Self {
        Self::with_family(f, enumerate_canonical_balls(f.space()))
    }

    pub fn with_family(f: &'a SampleFunction<'a>, family: BallFamily) -> Self {
        let means = family.iter().map(|b| ball_mean(f, family.members(b))).collect();
        OscillationAnalysis { f, family, means }
    }

    pub fn family(&self) -> &BallFamily {
        &self.family
    }

    pub fn mean(&self, ball: usize) -> f64 {
        self.means[ball]
    }

    fn centered_levels(&self, i: usize) -> LevelSets {
        let space = self.f.space();
        let mean = self.means[i];
        let members = self.family.members(self.family.get(i));
        LevelSets::from_weighted(members.iter().map(|&a| (self.f.value(a) - mean, space.mass(a))))
    }

    fn per_ball<T: Send>(&self, op: impl Fn(usize) -> T + Sync) -> Vec<T> {
        (0..self.family.len()).into_par_iter().map(&op).collect()
    }

    pub fn oscillations(&self) -> Vec<f64> {
        self.per_ball(|i| {
            let b = self.family.get(i);
            mean_deviation(self.f, self.family.members(b), b.mass, self.means[i])
        })
    }

    /// `sup_B (1/μ(B)) ∫_B |f - f_B|`.
    pub fn bmo_norm(&self) -> BallWitness {
        let mut best = BallWitness::ZERO;
        for (i, osc) in self.oscillations().into_iter().enumerate() {
            best.offer(osc, i, None);
        }
        best
    }

    /// Smallest `M` with `∫_{B∩{|f-f_B|>λ}} |f - f_B| <= (λ + M) μ(B∩{|f-f_B|>λ})`
    /// for all balls and `λ >= 0`.
    pub fn bmto_constant(&self) -> BallWitness {
        let local = self.per_ball(|i| m_condition_ii_of(&self.centered_levels(i), 0.0));
        let mut best = BallWitness::ZERO;
        for (i, sup) in local.into_iter().enumerate() {
            best.offer(sup.value, i, sup.witness);
        }
        best
    }

    /// `μ(B∩{|f-f_B|>λ}) <= 4 μ(B) 2^{-λ/M}` on every ball, checked at the
    /// left limits of all breakpoints, where the left side is largest.
    pub fn jn_check(&self, m: f64) -> JnCheck {
        let rows = self.per_ball(|i| {
            let levels = self.centered_levels(i);
            let mass = self.family.get(i).mass;
            let mut worst: Option<(f64, JnWitness)> = None;
            for (j, &a) in levels.levels().iter().enumerate() {
                let lhs = levels.mass_above_level(j);
                let rhs = if m > 0.0 { 4.0 * mass * 2f64.powf(-a / m) } else { 0.0 };
                let ratio = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
                if worst.as_ref().is_none_or(|(r, _)| ratio > *r) {
                    worst = Some((ratio, JnWitness { ball: i, lambda: a, lhs, rhs }));
                }
            }
            worst
        });
        let worst = rows
            .into_iter()
            .flatten()
            .fold(None::<(f64, JnWitness)>, |acc, x| match acc {
                Some(a) if a.0 >= x.0 => Some(a),
                _ => Some(x),
            });
        match worst {
            None => JnCheck { holds: true, worst: None },
            Some((ratio, w)) => JnCheck { holds: ratio <= 1.0 + EXACT_TOL, worst: Some(w) },
        }
    }

    /// Per-ball decay `μ(B∩{|f-f_B|>λ2}) <= c1 μ(B∩{|f-f_B|>λ1}) e^{c2(λ1-λ2)}`.
    pub fn decay_equivalence(&self, c1: f64, c2: f64) -> DecayEquivalence {
        let checks = self.per_ball(|i| decay_check(&self.centered_levels(i).distribution(), 0.0, c1, c2));
        let failure = checks
            .iter()
            .enumerate()
            .find(|(_, c)| !c.holds)
            .map(|(i, c)| (i, c.worst.expect("failing check has a witness")));
        match failure {
            Some(w) => DecayEquivalence { holds: false, witness: Some(w), bmto_within_c1_over_c2: None },
            None => {
                let bmto = self.bmto_constant().value;
                DecayEquivalence {
                    holds: true,
                    witness: None,
                    bmto_within_c1_over_c2: Some(bmto <= c1 / c2 * (1.0 + EXACT_TOL)),
                }
            }
        }
    }

    /// Smallest `M` with `∫_{B∩{|f|>λ}} |f| <= (λ + M) μ(B∩{|f|>λ})` for all
    /// balls and `λ >= 0`.
    pub fn local_linf_constant(&self) -> BallWitness {
        let space = self.f.space();
        let local = self.per_ball(|i| {
            let members = self.family.members(self.family.get(i));
            let levels = LevelSets::from_weighted(members.iter().map(|&a| (self.f.value(a), space.mass(a))));
            m_condition_ii_of(&levels, 0.0)
        });
        let mut best = BallWitness::ZERO;
        for (i, sup) in local.into_iter().enumerate() {
            best.offer(sup.value, i, sup.witness);
        }
        best
    }

    /// Members of `ρB = {y : d(y, center) <= ρ·reach}`, a prefix of the
    /// center's distance order.
    pub fn enlarged_members(&self, ball: &CanonicalBall, rho: f64) -> &[usize] {
        let space = self.f.space();
        let center = ball.ball.center;
        let order = self.family.distance_order(center);
        let limit = rho * ball.reach;
        let count = order.partition_point(|&a| space.distance(center, a) <= limit);
        &order[..count.max(ball.count)]
    }

    /// Smallest `M` with `∫_{B∩{|f-f_B|>λ}} |f - f_B| <= (λ + M) μ(ρB∩{|f-f_B|>λ})`.
    pub fn enlarged_ball_bmto_constant(&self, rho: f64) -> Result<BallWitness> {
        if rho.is_nan() || rho < 1.0 {
            return Err(Error::BadParams(format!("rho must be at least 1, got {rho}")));
        }
        let space = self.f.space();
        let local = self.per_ball(|i| {
            let ball = self.family.get(i);
            let mean = self.means[i];
            let centered = |a: usize| (self.f.value(a) - mean, space.mass(a));
            let inner = LevelSets::from_weighted(self.family.members(ball).iter().map(|&a| centered(a)));
            let outer = LevelSets::from_weighted(self.enlarged_members(ball, rho).iter().map(|&a| centered(a)));
            // objective is decreasing between values of |f - f_B| on ρB
            let mut best: (f64, Option<f64>) = (0.0, None);
            for lambda in std::iter::once(0.0).chain(outer.levels().iter().copied()) {
                let denom = outer.mass_above(lambda);
                if denom <= 0.0 {
                    continue;
                }
                let value = inner.integral_above(lambda) / denom - lambda;
                if value > best.0 || (best.1.is_none() && value >= best.0) {
                    best = (value, Some(lambda));
                }
            }
            best
        });
        let mut best = BallWitness::ZERO;
        for (i, (value, lambda)) in local.into_iter().enumerate() {
            best.offer(value, i, lambda);
        }
        Ok(best)
    }

    pub fn report(&self) -> OscillationReport {
        let space = self.f.space();
        let balls = self
            .oscillations()
            .into_iter()
            .enumerate()
            .map(|(i, oscillation)| {
                let b = self.family.get(i);
                BallOscillation {
                    index: i,
                    center: space.id(b.ball.center),
                    radius: b.ball.radius,
                    members: b.count,
                    mass: b.mass,
                    mean: self.means[i],
                    oscillation,
                }
            })
            .collect();
        OscillationReport { bmo_norm: self.bmo_norm(), bmto: self.bmto_constant(), balls }
    }
}

pub fn bmo_norm(f: &SampleFunction) -> BallWitness {
    OscillationAnalysis::new(f).bmo_norm()
}

pub fn bmto_constant(f: &SampleFunction) -> BallWitness {
    OscillationAnalysis::new(f).bmto_constant()
}

/// John–Nirenberg decay with `(c1, c2) = (4, ln 2)` in units of `λ / M`.
pub fn jn_check(f: &SampleFunction, m: f64) -> JnCheck {
    OscillationAnalysis::new(f).jn_check(m)
}

pub fn bmto_decay_equivalence(f: &SampleFunction, c1: f64, c2: f64) -> DecayEquivalence {
    OscillationAnalysis::new(f).decay_equivalence(c1, c2)
}

pub fn local_linf_constant(f: &SampleFunction) -> BallWitness {
    OscillationAnalysis::new(f).local_linf_constant()
}

pub fn enlarged_ball_bmto_constant(f: &SampleFunction, rho: f64) -> Result<BallWitness> {
    OscillationAnalysis::new(f).enlarged_ball_bmto_constant(rho)
}

/// The explicit constant from the enlarged-ball argument:
/// `(2 λ0 + c ‖f‖*)` with `λ0 = 2 c_μ² (1 + c_μ²) ‖f‖*` and covering constant
/// `c = 2 c_μ³`.
pub fn theorem44_bound(c_mu: f64, bmo: f64) -> f64 {
    let c2 = c_mu * c_mu;
    (4.0 * c2 * (1.0 + c2) + 2.0 * c2 * c_mu) * bmo
}

/// `C(c_μ) = 4 c_μ³` in `M_ii(f) <= C (‖f‖* + ∫|f| dμ / μ(X))`.
///
/// With `h = |f|`, `‖h‖* <= 2‖f‖*`. Chebyshev gives `μ(h > λ) <= μ(X)/4` for
/// `λ >= λ0 = 4 ∫h/μ(X)`, where the covering bound yields
/// `∫_{h>λ} (h - λ) <= 2c_μ³ ‖h‖* μ(h > λ)`. Below `λ0` the level integral
/// picks up at most `λ0` per unit mass. Together
/// `M_ii <= λ0 + 4 c_μ³ ‖f‖* <= 4 c_μ³ (‖f‖* + ∫|f|/μ(X))` since `c_μ >= 1`.
pub fn global_weak_constant(c_mu: f64) -> f64 {
    4.0 * c_mu.powi(3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalWeakCheck {
    pub m_ii: f64,
    pub bmo: f64,
    pub mean_abs: f64,
    pub doubling: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `M_ii(f, 0) <= C(c_μ) (‖f‖* + ∫|f| dμ / μ(X))`.
pub fn global_weak_from_bmo_check(f: &SampleFunction) -> GlobalWeakCheck {
    let analysis = OscillationAnalysis::new(f);
    global_weak_from_bmo_with(f, analysis.bmo_norm().value, doubling_constant(f.space()))
}

/// Same check with precomputed `‖f‖*` and `c_μ`.
pub fn global_weak_from_bmo_with(f: &SampleFunction, bmo: f64, doubling: f64) -> GlobalWeakCheck {
    let space = f.space();
    let m_ii = m_condition_ii_of(&f.level_sets(), 0.0).value;
    let mean_abs = f
        .values()
        .iter()
        .zip(space.masses())
        .map(|(v, m)| m * v.abs())
        .sum::<f64>()
        / space.total_mass();
    let bound = global_weak_constant(doubling) * (bmo + mean_abs);
    GlobalWeakCheck { m_ii, bmo, mean_abs, doubling, bound, holds: m_ii <= bound * (1.0 + EXACT_TOL) }
}

/// Mean oscillation of `(-1)^k k` over `B(x_{2k}, 5 · 2^{-2k-3})` on the
/// dyadic space truncated at `K`.
pub fn counterexample_oscillation(k_max: usize, k: usize) -> Result<f64> {
    if 2 * k + 1 > k_max {
        return Err(Error::IndexOutOfRange { index: k, limit: k_max.saturating_sub(1) / 2 });
    }
    let space = dyadic_counterexample_space(k_max)?;
    let f = counterexample_function(&space)?;
    let ball = Ball::new(2 * k, 5.0 * 2f64.powi(-(2 * k as i32) - 3));
    let members = ball_members(&space, &ball)?;
    let mass = space.mass_of(&members);
    let mean = ball_mean(&f, &members);
    Ok(mean_deviation(&f, &members, mass, mean))
}
