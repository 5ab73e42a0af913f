//! Distribution functions, decreasing rearrangements and the maximal average
//! `f**`, all as exact step functions.
//!
//! Every integral here is a finite sum over step-function pieces, so the
//! classical identities (Cavalieri, the level-set identity, `f** - f*` as a
//! tail integral of the distribution function) hold up to rounding only.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_measure::MetricMeasureSpace;
use crate::numeric::close;

/// A nonincreasing, right-continuous, nonnegative step function on `[0, ∞)`.
///
/// `values[0]` holds on `[0, b_0)`, `values[i + 1]` on `[b_i, b_{i+1})` and
/// the last value on `[b_last, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep")]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawStep {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawStep> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStep) -> Result<Self> {
        StepFunction::new(raw.breakpoints, raw.values)
    }
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let invalid = |msg: &str| Err(Error::InvalidStepFunction(msg.to_string()));
        if values.len() != breakpoints.len() + 1 {
            return invalid("need exactly one more value than breakpoints");
        }
        if breakpoints.iter().chain(&values).any(|x| !x.is_finite()) {
            return invalid("non-finite entry");
        }
        if breakpoints.first().is_some_and(|&b| b < 0.0) {
            return invalid("negative breakpoint");
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("breakpoints must be strictly increasing");
        }
        if values.iter().any(|&v| v < 0.0) {
            return invalid("negative value");
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return invalid("values must be nonincreasing");
        }
        Ok(StepFunction { breakpoints, values })
    }

    pub fn constant(value: f64) -> Result<Self> {
        StepFunction::new(vec![], vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value on `[b_last, ∞)`.
    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("at least one value")
    }

    /// Value at the left end, `g(0)`.
    pub fn initial_value(&self) -> f64 {
        self.values[0]
    }

    /// `g(x)`, right-continuous.
    pub fn value_at(&self, x: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|&b| b <= x)]
    }

    /// `lim_{y -> x-} g(y)`.
    pub fn left_limit(&self, x: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|&b| b < x)]
    }

    /// Pieces `(start, end, value)`; the last piece has `end = ∞`.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| {
            let start = if i == 0 { 0.0 } else { self.breakpoints[i - 1] };
            let end = self.breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
            (start, end, v)
        })
    }

    /// `∫_0^t g`.
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for (start, end, v) in self.pieces() {
            if start >= t {
                break;
            }
            total += v * (end.min(t) - start);
        }
        total
    }

    /// `∫_x^∞ g`; infinite unless the final value is 0.
    pub fn tail_from(&self, x: f64) -> f64 {
        if self.final_value() > 0.0 {
            return f64::INFINITY;
        }
        // summed from the far end so small contributions go first
        let mut total = 0.0;
        for i in (0..self.breakpoints.len()).rev() {
            let end = self.breakpoints[i];
            if end <= x {
                break;
            }
            let start = if i == 0 { 0.0 } else { self.breakpoints[i - 1] };
            total += self.values[i] * (end - start.max(x));
        }
        total
    }

    /// Same function with redundant breakpoints (no change in value) removed.
    pub fn canonical(&self) -> StepFunction {
        let mut breakpoints = Vec::with_capacity(self.breakpoints.len());
        let mut values = vec![self.values[0]];
        for (i, &b) in self.breakpoints.iter().enumerate() {
            let v = self.values[i + 1];
            if v != *values.last().unwrap() {
                breakpoints.push(b);
                values.push(v);
            }
        }
        StepFunction { breakpoints, values }
    }

    /// `x ↦ inf { y >= 0 : g(y) <= x }` as a step function in `x`.
    ///
    /// Applied to a distribution function this is the decreasing
    /// rearrangement; applied to a rearrangement it gives back the
    /// distribution function with respect to Lebesgue measure.
    pub fn generalized_inverse(&self) -> Result<StepFunction> {
        if self.final_value() != 0.0 {
            return Err(Error::NotVanishing(self.final_value()));
        }
        let g = self.canonical();
        // values v_0 > v_1 > ... > v_q = 0; for v_i <= x < v_{i-1} the
        // infimum is b_i, and for x >= v_0 it is 0.
        let q = g.breakpoints.len();
        let breakpoints: Vec<f64> = (0..q).rev().map(|i| g.values[i]).collect();
        let mut values: Vec<f64> = g.breakpoints.iter().rev().copied().collect();
        values.push(0.0);
        StepFunction::new(breakpoints, values)
    }

    /// Breakpoints plus the midpoints between them and a point past the last.
    pub fn probe_points(&self) -> Vec<f64> {
        let mut points = Vec::with_capacity(2 * self.breakpoints.len() + 2);
        let mut prev = 0.0;
        for &b in &self.breakpoints {
            points.push(prev + (b - prev) / 2.0);
            points.push(b);
            prev = b;
        }
        points.push(if prev > 0.0 { 2.0 * prev } else { 1.0 });
        points
    }
}

/// Real values on the atoms of a space.
#[derive(Debug, Clone)]
pub struct SampleFunction<'s> {
    space: &'s MetricMeasureSpace,
    values: Vec<f64>,
}

impl<'s> SampleFunction<'s> {
    pub fn new(space: &'s MetricMeasureSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::ValueCountMismatch { expected: space.len(), found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("function values".into()));
        }
        Ok(SampleFunction { space, values })
    }

    /// Values keyed by atom id; every atom needs a value.
    pub fn from_id_map(space: &'s MetricMeasureSpace, map: &HashMap<u64, f64>) -> Result<Self> {
        for id in map.keys() {
            space.index_of(*id)?;
        }
        let values = space
            .ids()
            .iter()
            .map(|id| map.get(id).copied().ok_or(Error::MissingValue(*id)))
            .collect::<Result<Vec<_>>>()?;
        SampleFunction::new(space, values)
    }

    pub fn space(&self) -> &'s MetricMeasureSpace {
        self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, atom: usize) -> f64 {
        self.values[atom]
    }

    pub fn scaled(&self, factor: f64) -> SampleFunction<'s> {
        SampleFunction { space: self.space, values: self.values.iter().map(|v| v * factor).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn level_sets(&self) -> LevelSets {
        LevelSets::from_weighted(self.values.iter().copied().zip(self.space.masses().iter().copied()))
    }
}

/// Superlevel-set masses and integrals of `|f|` for a weighted sample.
///
/// `levels` are the distinct positive values of `|f|` in increasing order.
/// Index `i` of `mass_above`/`integral_above` refers to the set
/// `{|f| > levels[i - 1]}`, with `levels[-1] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSets {
    levels: Vec<f64>,
    mass_above: Vec<f64>,
    integral_above: Vec<f64>,
    total_mass: f64,
}

impl LevelSets {
    /// From `(value, mass)` pairs; values enter through `|value|`.
    pub fn from_weighted(pairs: impl IntoIterator<Item = (f64, f64)>) -> LevelSets {
        let mut total_mass = 0.0;
        let mut pairs: Vec<(f64, f64)> = pairs
            .into_iter()
            .inspect(|&(_, m)| total_mass += m)
            .map(|(v, m)| (v.abs(), m))
            .filter(|&(v, _)| v > 0.0)
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut levels: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (v, m) in pairs {
            if levels.last() == Some(&v) {
                *weights.last_mut().unwrap() += m;
            } else {
                levels.push(v);
                weights.push(m);
            }
        }
        let q = levels.len();
        let mut mass_above = vec![0.0; q + 1];
        let mut integral_above = vec![0.0; q + 1];
        for i in (0..q).rev() {
            mass_above[i] = mass_above[i + 1] + weights[i];
            integral_above[i] = integral_above[i + 1] + weights[i] * levels[i];
        }
        LevelSets { levels, mass_above, integral_above, total_mass }
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `μ({|f| > levels[i - 1]})` for `i = 0..=q`.
    pub fn mass_above_level(&self, i: usize) -> f64 {
        self.mass_above[i]
    }

    /// `∫_{|f| > levels[i - 1]} |f|` for `i = 0..=q`.
    pub fn integral_above_level(&self, i: usize) -> f64 {
        self.integral_above[i]
    }

    fn slot(&self, lambda: f64) -> usize {
        self.levels.partition_point(|&a| a <= lambda)
    }

    /// `d(λ) = μ({|f| > λ})`.
    pub fn mass_above(&self, lambda: f64) -> f64 {
        self.mass_above[self.slot(lambda)]
    }

    /// `∫_{|f| > λ} |f| dμ`.
    pub fn integral_above(&self, lambda: f64) -> f64 {
        self.integral_above[self.slot(lambda)]
    }

    pub fn distribution(&self) -> StepFunction {
        StepFunction::new(self.levels.clone(), self.mass_above.clone())
            .expect("level sets give a valid distribution function")
    }
}

/// `λ ↦ μ({|f| > λ})`, breakpoints at the distinct positive values of `|f|`.
pub fn distribution_function(f: &SampleFunction) -> StepFunction {
    f.level_sets().distribution()
}

/// `f*(t) = inf { λ : d(λ) <= t }`, with `f*(0) = max |f|`.
pub fn decreasing_rearrangement(d: &StepFunction) -> Result<StepFunction> {
    d.generalized_inverse()
}

/// Checks `f*(d(λ)) <= λ` and `d(f*(t)) <= t` at every breakpoint and midpoint.
pub fn duality_check(f: &SampleFunction) -> bool {
    let d = distribution_function(f);
    let f_star = decreasing_rearrangement(&d).expect("finite distribution vanishes");
    let lambdas = std::iter::once(0.0).chain(d.probe_points());
    let ts = f_star.probe_points();
    lambdas.into_iter().all(|l| f_star.value_at(d.value_at(l)) <= l)
        && ts.into_iter().all(|t| d.value_at(f_star.value_at(t)) <= t)
}

/// `f**(t) = (1/t) ∫_0^t f*`.
pub fn maximal_average(f_star: &StepFunction, t: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::NonPositiveT(t));
    }
    Ok(f_star.integral_to(t) / t)
}

/// A supremum together with the point where it is attained, if any.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Supremum {
    pub value: f64,
    pub witness: Option<f64>,
}

impl Supremum {
    pub(crate) const ZERO: Supremum = Supremum { value: 0.0, witness: None };

    /// Keeps the first maximum.
    pub(crate) fn offer(&mut self, value: f64, at: f64) {
        if value > self.value || (self.witness.is_none() && value >= self.value) {
            self.value = value;
            self.witness = Some(at);
        }
    }
}

/// `sup_{t > 0} (f**(t) - f*(t))` for the rearrangement of `d`.
///
/// On a piece where `f*` is constant the difference is nonincreasing because
/// `f**` is, so only the left ends of the pieces (the breakpoints of `f*`)
/// need evaluating. Near `t = 0` the difference tends to 0.
pub fn weak_seminorm_of(d: &StepFunction) -> Result<Supremum> {
    let f_star = decreasing_rearrangement(d)?;
    let mut sup = Supremum::ZERO;
    let mut integral = 0.0;
    let mut prev = 0.0;
    for (i, &t) in f_star.breakpoints().iter().enumerate() {
        integral += f_star.values()[i] * (t - prev);
        prev = t;
        sup.offer(integral / t - f_star.values()[i + 1], t);
    }
    Ok(sup)
}

/// The weak-L∞ functional of `f`, with the `t` attaining it.
pub fn weak_seminorm(f: &SampleFunction) -> Supremum {
    weak_seminorm_of(&distribution_function(f)).expect("finite distribution vanishes")
}

/// `∫ |f|^p dμ` summed atom by atom.
pub fn power_integral(f: &SampleFunction, p: f64) -> f64 {
    f.values().iter().zip(f.space().masses()).map(|(v, m)| m * v.abs().powf(p)).sum()
}

/// `p ∫_0^∞ λ^{p-1} d(λ) dλ`, evaluated piece by piece in closed form.
pub fn cavalieri_lp(f: &SampleFunction, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::BadParams(format!("exponent must be positive, got {p}")));
    }
    let d = distribution_function(f);
    Ok(d.pieces()
        .filter(|&(_, end, v)| v > 0.0 && end.is_finite())
        .map(|(start, end, v)| v * (end.powf(p) - start.powf(p)))
        .sum())
}

/// `∫_{|f| > λ} |f| dμ` by direct summation over atoms.
pub fn level_set_integral(f: &SampleFunction, lambda: f64) -> f64 {
    f.values()
        .iter()
        .zip(f.space().masses())
        .filter(|(v, _)| v.abs() > lambda)
        .map(|(v, m)| m * v.abs())
        .sum()
}

/// `∫_λ^∞ d + λ d(λ)`, the right side of the level-set identity.
pub fn tail_level_integral(d: &StepFunction, lambda: f64) -> f64 {
    d.tail_from(lambda) + lambda * d.value_at(lambda)
}

/// Verifies `f**(t) - f*(t) = (1/t) ∫_{f*(t)}^∞ d`, to `tol` relative to the
/// size of the terms (`f**(t)` and both sides).
pub fn identity_id1_check(f: &SampleFunction, t: f64, tol: f64) -> Result<bool> {
    let d = distribution_function(f);
    let f_star = decreasing_rearrangement(&d)?;
    let avg = maximal_average(&f_star, t)?;
    let level = f_star.value_at(t);
    let lhs = avg - level;
    let rhs = d.tail_from(level) / t;
    Ok(close(lhs, rhs, tol, avg))
}
