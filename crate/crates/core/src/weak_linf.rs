//! Optimal constants for the four equivalent descriptions of weak L∞.
//!
//! For a function on a finite space the four conditions read
//!
//! * (i)   `f**(t) - f*(t) <= M` for all `t > 0`;
//! * (ii)  `∫_{|f|>λ} |f| <= (λ + M) d(λ)` for `λ > α`;
//! * (iii) `∫_λ^∞ d <= M d(λ)` for `λ > α`;
//! * (iv)  `d(λ2) <= c1 d(λ1) exp(c2 (λ1 - λ2))` for `λ2 > λ1 >= 0`.
//!
//! # Reduction to breakpoints
//!
//! Between two consecutive values of `|f|` the superlevel set `{|f| > λ}`
//! does not change, so `∫_{|f|>λ}|f|` and `d(λ)` are constant there while
//! `λ` grows. The objective `∫/d - λ` of (ii) is therefore decreasing on each
//! such piece and its supremum over the piece is the limit at the left end,
//! taken from the right. The same holds for `∫_λ^∞ d / d(λ)` in (iii). So the
//! suprema over `λ > α` are maxima over `λ = α` and the breakpoints `> α`,
//! evaluated with right-continuous values. For (iv) the ratio
//! `d(λ2) / (d(λ1) exp(c2 (λ1 - λ2)))` is largest with `λ1` at the left end
//! of its piece and `λ2` approaching the right end of its piece from the left.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::EXACT_TOL;
use crate::rearrangement::{
    distribution_function, level_set_integral, weak_seminorm, weak_seminorm_of, LevelSets,
    SampleFunction, StepFunction, Supremum,
};

/// Smallest `M` in condition (i); this is the weak-L∞ functional.
pub fn smallest_m_condition_i(f: &SampleFunction) -> Supremum {
    weak_seminorm(f)
}

/// Smallest `M` in condition (i) for a bare distribution function.
pub fn m_condition_i_of(d: &StepFunction) -> Result<Supremum> {
    weak_seminorm_of(d)
}

/// Smallest `M` in condition (ii) over `λ > α`; the witness is the breakpoint
/// (or `α`) whose right limit attains it.
pub fn smallest_m_condition_ii(f: &SampleFunction, alpha: f64) -> Supremum {
    m_condition_ii_of(&f.level_sets(), alpha)
}

/// Condition (ii) from level-set sums of `|f|`.
pub fn m_condition_ii_of(levels: &LevelSets, alpha: f64) -> Supremum {
    let mut sup = Supremum::ZERO;
    let start = levels.levels().partition_point(|&a| a <= alpha);
    let mut offer = |slot: usize, lambda: f64| {
        let mass = levels.mass_above_level(slot);
        if mass > 0.0 {
            sup.offer(levels.integral_above_level(slot) / mass - lambda, lambda);
        }
    };
    offer(start, alpha);
    for (i, &a) in levels.levels().iter().enumerate().skip(start) {
        offer(i + 1, a);
    }
    sup
}

/// Smallest `M` in condition (iii) over `λ > α`, from closed-form tail
/// integrals of the distribution function.
pub fn smallest_m_condition_iii(f: &SampleFunction, alpha: f64) -> Supremum {
    m_condition_iii_of(&distribution_function(f), alpha)
}

/// Condition (iii) for a distribution function with final value 0.
pub fn m_condition_iii_of(d: &StepFunction, alpha: f64) -> Supremum {
    let b = d.breakpoints();
    let v = d.values();
    let start = b.partition_point(|&x| x <= alpha);
    // tails[i] = ∫_{b_i}^∞ d, accumulated from the far end
    let mut tails = vec![0.0; b.len()];
    let mut acc = 0.0;
    for i in (start..b.len()).rev() {
        tails[i] = acc;
        if i > 0 {
            acc += v[i] * (b[i] - b[i - 1]);
        }
    }
    let mut sup = Supremum::ZERO;
    if v[start] > 0.0 {
        let tail_alpha = match b.get(start) {
            Some(&next) => tails[start] + v[start] * (next - alpha),
            None => 0.0,
        };
        sup.offer(tail_alpha / v[start], alpha);
    }
    for i in start..b.len() {
        if v[i + 1] > 0.0 {
            sup.offer(tails[i] / v[i + 1], b[i]);
        }
    }
    sup
}

/// The pair where `d(λ2) / (c1 d(λ1) e^{c2(λ1-λ2)})` is largest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayWitness {
    pub lambda1: f64,
    /// Approached from the left; `∞` when `d` never vanishes.
    pub lambda2: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    pub holds: bool,
    pub worst: Option<DecayWitness>,
}

/// Checks `g(λ2) <= c1 g(λ1) e^{c2(λ1 - λ2)}` for all `λ2 > λ1 >= from`.
///
/// Only corners matter: `λ1` at left ends of pieces (right limit values) and
/// `λ2` at right ends approached from the left. For each right end the best
/// `λ1` minimizes `ln g(λ1) + c2 λ1`, tracked in one pass. The comparison
/// allows a relative slack of [`EXACT_TOL`] for rounding.
pub fn decay_check(g: &StepFunction, from: f64, c1: f64, c2: f64) -> DecayCheck {
    let b = g.breakpoints();
    let v = g.values();
    let start = b.partition_point(|&x| x <= from);
    let mut best: Option<(f64, f64, f64)> = None; // (ln g + c2 λ1, λ1, g(λ1))
    let mut worst: Option<(f64, DecayWitness)> = None;
    let mut record = |log_ratio: f64, w: DecayWitness| {
        if worst.as_ref().is_none_or(|(r, _)| log_ratio > *r) {
            worst = Some((log_ratio, w));
        }
    };
    for j in start..v.len() {
        let left = if j == start { from } else { b[j - 1] };
        if v[j] > 0.0 {
            let key = v[j].ln() + c2 * left;
            if best.is_none_or(|(k, _, _)| key < k) {
                best = Some((key, left, v[j]));
            }
        }
        if v[j] <= 0.0 {
            continue;
        }
        let (key, lambda1, g1) = best.expect("positive piece seen");
        match b.get(j) {
            Some(&right) => {
                let log_ratio = v[j].ln() + c2 * right - c1.ln() - key;
                let rhs = c1 * g1 * (c2 * (lambda1 - right)).exp();
                record(log_ratio, DecayWitness { lambda1, lambda2: right, lhs: v[j], rhs });
            }
            None => record(
                f64::INFINITY,
                DecayWitness { lambda1, lambda2: f64::INFINITY, lhs: v[j], rhs: 0.0 },
            ),
        }
    }
    match worst {
        None => DecayCheck { holds: true, worst: None },
        Some((log_ratio, w)) => DecayCheck { holds: log_ratio <= EXACT_TOL, worst: Some(w) },
    }
}

/// Condition (iv) with the given constants.
pub fn check_condition_iv(f: &SampleFunction, c1: f64, c2: f64) -> DecayCheck {
    decay_check(&distribution_function(f), 0.0, c1, c2)
}

/// Least `c1` for which condition (iv) holds with the given `c2`. Reporting only.
pub fn least_c1(d: &StepFunction, c2: f64) -> f64 {
    match decay_check(d, 0.0, 1.0, c2).worst {
        None => 0.0,
        Some(w) if w.lambda2.is_infinite() => f64::INFINITY,
        Some(w) => w.lhs / w.rhs,
    }
}

/// `(4, ln 2 / M)`: the exponential envelope implied by `∫_s^∞ g <= M g(s)`.
pub fn gap_lemma_constants(m: f64) -> Result<(f64, f64)> {
    if m.is_nan() || m <= 0.0 {
        return Err(Error::NonPositiveM(m));
    }
    Ok((4.0, std::f64::consts::LN_2 / m))
}

const MAX_MULTIPLES: usize = 64;

/// Verifies `g(s + t) <= 4 · 2^{-t/M} g(s)` for `s >= α`, after checking the
/// hypothesis `∫_s^∞ g <= M g(s)` at `α` and every breakpoint past it.
pub fn gap_lemma_check(g: &StepFunction, m: f64, alpha: f64) -> Result<bool> {
    let (c1, c2) = gap_lemma_constants(m)?;
    let starts: Vec<f64> = std::iter::once(alpha)
        .chain(g.breakpoints().iter().copied().filter(|&b| b > alpha))
        .collect();
    for &s in &starts {
        let (tail, level) = (g.tail_from(s), g.value_at(s));
        if tail > m * level * (1.0 + EXACT_TOL) {
            return Err(Error::HypothesisViolated(format!(
                "tail integral {tail} exceeds M g(s) = {} at s = {s}",
                m * level
            )));
        }
    }
    if !decay_check(g, alpha, c1, c2).holds {
        return Ok(false);
    }
    let end = g.breakpoints().last().copied().unwrap_or(0.0);
    for &s in &starts {
        let level = g.value_at(s);
        for k in 1..=MAX_MULTIPLES {
            let t = k as f64 * m;
            if s + t > end {
                break;
            }
            if g.value_at(s + t) > 4.0 * 2f64.powi(-(k as i32)) * level * (1.0 + EXACT_TOL) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub ratio: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `μ(λ < |f| <= λ + γM) / μ(|f| > λ)` against `1 - 2^{2-γ}`, with `M` the
/// optimal constant of condition (ii) at `α = 0`.
pub fn concentration_check(f: &SampleFunction, lambda: f64, gamma: f64) -> Result<Concentration> {
    if gamma.is_nan() || gamma <= 1.0 {
        return Err(Error::BadParams(format!("gamma must exceed 1, got {gamma}")));
    }
    let levels = f.level_sets();
    let above = levels.mass_above(lambda);
    if above <= 0.0 {
        return Err(Error::EmptyLevelSet(lambda));
    }
    let m = m_condition_ii_of(&levels, 0.0).value;
    let ratio = (above - levels.mass_above(lambda + gamma * m)) / above;
    let bound = 1.0 - 2f64.powf(2.0 - gamma);
    Ok(Concentration { ratio, bound, holds: ratio >= bound - EXACT_TOL })
}

/// `∫_{|f|>λ} |f| / ((λ + 1) d(λ))`; equals 1 for `log(|x|^-n)` on the unit ball.
pub fn extremality_ratio(f: &SampleFunction, lambda: f64) -> Result<f64> {
    let d = f.level_sets().mass_above(lambda);
    if d <= 0.0 {
        return Err(Error::EmptyLevelSet(lambda));
    }
    Ok(level_set_integral(f, lambda) / ((lambda + 1.0) * d))
}

/// All optimal constants for one function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub m_i: Supremum,
    pub m_ii: Supremum,
    pub m_iii: Supremum,
    pub alpha: f64,
    /// `(c1, c2)` from the gap lemma applied with `M = m_iii`; absent when `M = 0`.
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    /// Least `c1` for the same `c2`.
    pub fitted_c1: Option<f64>,
    pub condition_iv_holds: bool,
}

pub fn constant_report(f: &SampleFunction, alpha: f64) -> ConstantReport {
    let d = distribution_function(f);
    let m_i = smallest_m_condition_i(f);
    let m_ii = smallest_m_condition_ii(f, alpha);
    let m_iii = m_condition_iii_of(&d, alpha);
    let (c1, c2) = match gap_lemma_constants(m_iii.value) {
        Ok((c1, c2)) => (Some(c1), Some(c2)),
        Err(_) => (None, None),
    };
    let fitted_c1 = c2.map(|c2| least_c1(&d, c2));
    let condition_iv_holds = match (c1, c2) {
        (Some(c1), Some(c2)) => decay_check(&d, 0.0, c1, c2).holds,
        _ => d.initial_value() == 0.0,
    };
    ConstantReport { m_i, m_ii, m_iii, alpha, c1, c2, fitted_c1, condition_iv_holds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_measure::{
        build_space, counterexample_function, dyadic_counterexample_space, log_example_space, Atom,
        MetricMeasureSpace, MetricSpec,
    };

    fn unit_pair() -> MetricMeasureSpace {
        let atoms = vec![Atom { id: 0, mass: 1.0 }, Atom { id: 1, mass: 1.0 }];
        build_space(atoms, MetricSpec::Euclidean(vec![vec![0.0], vec![1.0]])).unwrap()
    }

    #[test]
    fn zero_function_constants() {
        let s = unit_pair();
        let f = SampleFunction::new(&s, vec![0.0, 0.0]).unwrap();
        assert_eq!(smallest_m_condition_i(&f).value, 0.0);
        assert_eq!(smallest_m_condition_ii(&f, 0.0).value, 0.0);
        assert_eq!(smallest_m_condition_iii(&f, 0.0).value, 0.0);
        assert!(check_condition_iv(&f, 1.0, 1.0).holds);
        assert!(gap_lemma_check(&StepFunction::constant(0.0).unwrap(), 1.0, 0.0).unwrap());
    }

    #[test]
    fn indicator_constants() {
        let s = unit_pair();
        let f = SampleFunction::new(&s, vec![0.0, 1.0]).unwrap();
        assert_eq!(smallest_m_condition_i(&f).value, 1.0);
        assert_eq!(smallest_m_condition_iii(&f, 0.0), Supremum { value: 1.0, witness: Some(0.0) });
        let bad = check_condition_iv(&f, 0.1, 1000.0);
        assert!(!bad.holds);
        let w = bad.worst.unwrap();
        assert_eq!((w.lambda1, w.lambda2), (0.0, 1.0));
    }

    #[test]
    fn constant_function_m_ii() {
        let atoms = vec![Atom { id: 0, mass: 0.5 }, Atom { id: 1, mass: 0.5 }];
        let s = build_space(atoms, MetricSpec::Euclidean(vec![vec![0.0], vec![1.0]])).unwrap();
        let f = SampleFunction::new(&s, vec![2.5, -2.5]).unwrap();
        assert_eq!(smallest_m_condition_ii(&f, 0.0).value, 2.5);
    }

    #[test]
    fn gap_constants() {
        let (c1, c2) = gap_lemma_constants(1.0).unwrap();
        assert_eq!(c1, 4.0);
        assert!((c2 - 2f64.ln()).abs() < 1e-15);
        assert_eq!(gap_lemma_constants(std::f64::consts::LN_2).unwrap(), (4.0, 1.0));
        assert!((gap_lemma_constants(2.0).unwrap().1 - 0.346_573_590_279_972_65).abs() < 1e-15);
        assert_eq!(gap_lemma_constants(0.0), Err(Error::NonPositiveM(0.0)));
    }

    #[test]
    fn gap_lemma_on_box() {
        let g = StepFunction::new(vec![10.0], vec![1.0, 0.0]).unwrap();
        assert!(gap_lemma_check(&g, 20.0, 0.0).unwrap());
        assert!(matches!(gap_lemma_check(&g, 5.0, 0.0), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn dyadic_constants_and_gap_lemma() {
        let s = dyadic_counterexample_space(40).unwrap();
        let f = counterexample_function(&s).unwrap();
        let r = constant_report(&f, 0.0);
        assert!((r.m_i.value - r.m_ii.value).abs() < 1e-9);
        assert!(r.m_ii.value <= 2.0 && r.m_ii.value > 2.0 - 1e-9);
        let d = distribution_function(&f);
        assert!(gap_lemma_check(&d, r.m_iii.value, 0.0).unwrap());
        assert!(r.condition_iv_holds);
        let c = concentration_check(&f, 0.5, 3.0).unwrap();
        assert_eq!(c.bound, 0.5);
        assert!(c.holds);
    }

    #[test]
    fn concentration_edges() {
        let s = unit_pair();
        let f = SampleFunction::new(&s, vec![0.0, 1.0]).unwrap();
        assert!(concentration_check(&f, 0.0, 1.5).unwrap().holds);
        assert_eq!(concentration_check(&f, 1.0, 3.0), Err(Error::EmptyLevelSet(1.0)));
        assert!(concentration_check(&f, 0.0, 1.0).is_err());
    }

    #[test]
    fn least_c1_makes_condition_tight() {
        let s = dyadic_counterexample_space(12).unwrap();
        let f = counterexample_function(&s).unwrap();
        let d = distribution_function(&f);
        let c1 = least_c1(&d, 0.5);
        assert!(check_condition_iv(&f, c1, 0.5).holds);
        assert!(!check_condition_iv(&f, c1 * 0.999, 0.5).holds);
    }

    #[test]
    fn log_example_small_grid() {
        let ex = log_example_space(1, 20_000).unwrap();
        let f = ex.function();
        let r = extremality_ratio(&f, 0.0).unwrap();
        assert!((r - 1.0).abs() < 1e-2, "{r}");
        assert!(extremality_ratio(&f, 100.0).is_err());
    }
}
