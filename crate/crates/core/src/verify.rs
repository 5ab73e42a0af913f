//! Randomized verification of the weak-L∞, oscillation and covering
//! properties, producing a deterministic JSON report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::covering::{czd_cover_with, dilates_within, refined_containment_factor, CoverInstance};
use crate::error::Result;
use crate::io::{FunctionRecord, SpaceRecord};
use crate::metric_measure::{doubling_constant, MetricMeasureSpace};
use crate::numeric::{close, CONST_TOL, EXACT_TOL};
use crate::oscillation::{global_weak_from_bmo_with, theorem44_bound, OscillationAnalysis};
use crate::random::{instance_rng, random_cover_instance, random_instance};
use crate::rearrangement::{
    cavalieri_lp, decreasing_rearrangement, distribution_function, duality_check, identity_id1_check,
    level_set_integral, maximal_average, power_integral, tail_level_integral, SampleFunction,
};
use crate::weak_linf::{
    concentration_check, decay_check, gap_lemma_constants, least_c1, m_condition_iii_of, smallest_m_condition_i,
    smallest_m_condition_ii,
};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const WEAK_LINF_ATOMS: usize = 64;
pub const OSCILLATION_ATOMS: usize = 48;
pub const COVERING_ATOMS: usize = 48;

const OSCILLATION_STREAM: u64 = 1 << 32;
const COVERING_STREAM: u64 = 2 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub exact: f64,
    pub constant: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { exact: EXACT_TOL, constant: CONST_TOL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub weak_linf: usize,
    pub oscillation: usize,
    pub covering: usize,
    pub tolerances: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: DEFAULT_SEED, weak_linf: 500, oscillation: 300, covering: 200, tolerances: Tolerances::default() }
    }
}

impl VerifyConfig {
    /// Same number of instances in every suite.
    pub fn uniform(seed: u64, instances: usize) -> Self {
        VerifyConfig { seed, weak_linf: instances, oscillation: instances, covering: instances, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub suite: String,
    pub instance: usize,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub witness: Value,
    pub space: SpaceRecord,
    pub function: Option<FunctionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub name: String,
    pub instances: usize,
    pub checks: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub version: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub suites: Vec<SuiteSummary>,
    pub failures: Vec<Failure>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn total_checks(&self) -> usize {
        self.suites.iter().map(|s| s.checks).sum()
    }
}

/// Check results for one instance.
struct Ledger {
    checks: usize,
    failed: Vec<(String, f64, f64, Value)>,
}

impl Ledger {
    fn new() -> Self {
        Ledger { checks: 0, failed: Vec::new() }
    }

    fn check(&mut self, name: &str, ok: bool, lhs: f64, rhs: f64, witness: Value) {
        self.checks += 1;
        if !ok {
            self.failed.push((name.to_string(), lhs, rhs, witness));
        }
    }

    fn into_failures(self, suite: &str, instance: usize, f: &SampleFunction) -> (usize, Vec<Failure>) {
        let failures = self
            .failed
            .into_iter()
            .map(|(check, lhs, rhs, witness)| Failure {
                suite: suite.to_string(),
                instance,
                check,
                lhs,
                rhs,
                witness,
                space: SpaceRecord::from_space(f.space()),
                function: Some(FunctionRecord::from_function(f)),
            })
            .collect();
        (self.checks, failures)
    }
}

/// Space and function values for instance `i` of the weak-L∞ suite.
pub fn weak_linf_instance(seed: u64, i: usize) -> Result<(MetricMeasureSpace, Vec<f64>)> {
    random_instance(&mut instance_rng(seed, i as u64), WEAK_LINF_ATOMS)
}

pub fn oscillation_instance(seed: u64, i: usize) -> Result<(MetricMeasureSpace, Vec<f64>)> {
    random_instance(&mut instance_rng(seed, OSCILLATION_STREAM + i as u64), OSCILLATION_ATOMS)
}

/// Space, `B0` and `F` ids for instance `i` of the covering suite.
pub fn covering_instance(seed: u64, i: usize) -> Result<(MetricMeasureSpace, crate::metric_measure::Ball, Vec<u64>)> {
    let mut rng = instance_rng(seed, COVERING_STREAM + i as u64);
    let (space, _) = random_instance(&mut rng, COVERING_ATOMS)?;
    let (b0, f) = random_cover_instance(&mut rng, &space)?;
    Ok((space, b0, f))
}

fn weak_linf_checks(f: &SampleFunction, tol: Tolerances) -> Ledger {
    let mut ledger = Ledger::new();
    let d = distribution_function(f);
    let f_star = decreasing_rearrangement(&d).expect("finite distribution vanishes");
    let m_i = smallest_m_condition_i(f).value;
    let m_ii = smallest_m_condition_ii(f, 0.0).value;
    let m_iii = m_condition_iii_of(&d, 0.0).value;
    ledger.check("M_i = M_ii", (m_i - m_ii).abs() <= tol.constant * m_i.max(1.0), m_i, m_ii, json!({}));
    ledger.check("M_ii = M_iii", (m_ii - m_iii).abs() <= tol.exact * m_ii.max(1.0), m_ii, m_iii, json!({}));

    if let Ok((c1, c2)) = gap_lemma_constants(m_iii) {
        let iv = decay_check(&d, 0.0, c1, c2);
        let w = iv.worst.map_or(json!(null), |w| json!(w));
        ledger.check("condition (iv) from the gap lemma", iv.holds, c1, c2, w);
        for factor in [1.0, 0.5, 2.0] {
            let c2 = c2 * factor;
            let fitted = least_c1(&d, c2);
            if !fitted.is_finite() || fitted <= 0.0 {
                continue;
            }
            let c1 = fitted * (1.0 + tol.constant);
            if decay_check(&d, 0.0, c1, c2).holds {
                ledger.check("(iv) implies M_ii <= c1/c2", m_ii <= c1 / c2 + tol.constant, m_ii, c1 / c2, json!({ "c1": c1, "c2": c2 }));
            }
        }
    }

    ledger.check("duality", duality_check(f), 0.0, 0.0, json!({}));
    for t in f_star.probe_points() {
        let ok = identity_id1_check(f, t, tol.exact).unwrap_or(false);
        let avg = maximal_average(&f_star, t).unwrap_or(f64::NAN);
        ledger.check("identity f** - f* = tail / t", ok, avg, f_star.value_at(t), json!({ "t": t }));
        ledger.check("f** >= f*", avg >= f_star.value_at(t) * (1.0 - tol.exact), avg, f_star.value_at(t), json!({ "t": t }));
    }
    for p in [0.5, 1.0, 2.0, 3.0] {
        let (lhs, rhs) = (cavalieri_lp(f, p).unwrap_or(f64::NAN), power_integral(f, p));
        ledger.check("Cavalieri", close(lhs, rhs, tol.exact, 0.0), lhs, rhs, json!({ "p": p }));
    }
    let lambdas: Vec<f64> = std::iter::once(0.0).chain(d.breakpoints().iter().copied()).collect();
    for &lambda in &lambdas {
        let (lhs, rhs) = (level_set_integral(f, lambda), tail_level_integral(&d, lambda));
        ledger.check("level-set identity", close(lhs, rhs, tol.exact, 0.0), lhs, rhs, json!({ "lambda": lambda }));
    }
    for &lambda in lambdas.iter().filter(|&&l| d.value_at(l) > 0.0) {
        for gamma in [2.5, 4.0, 8.0] {
            if let Ok(c) = concentration_check(f, lambda, gamma) {
                ledger.check("concentration", c.holds, c.ratio, c.bound, json!({ "lambda": lambda, "gamma": gamma }));
            }
        }
    }
    ledger
}

fn oscillation_checks(f: &SampleFunction, tol: Tolerances) -> Ledger {
    let mut ledger = Ledger::new();
    let doubling = doubling_constant(f.space());
    let analysis = OscillationAnalysis::new(f);
    let bmo = analysis.bmo_norm();
    let bmto = analysis.bmto_constant();
    let slack = 1.0 + tol.exact;
    ledger.check("bmo <= bmto", bmo.value <= bmto.value * slack, bmo.value, bmto.value, json!({ "bmo": bmo, "bmto": bmto }));

    let jn = analysis.jn_check(bmto.value);
    let w = jn.worst.map_or(json!(null), |w| json!(w));
    let (lhs, rhs) = jn.worst.map_or((0.0, 0.0), |w| (w.lhs, w.rhs));
    ledger.check("John-Nirenberg decay", jn.holds, lhs, rhs, w);

    if let Ok((c1, c2)) = gap_lemma_constants(bmto.value) {
        let eq = analysis.decay_equivalence(c1, c2);
        ledger.check("per-ball decay", eq.holds && eq.bmto_within_c1_over_c2 == Some(true), c1, c2, json!(eq));
    }

    let three = analysis.enlarged_ball_bmto_constant(3.0).expect("rho = 3 is valid");
    let bound = theorem44_bound(doubling, bmo.value);
    let wit = json!({ "doubling": doubling, "bmo": bmo, "enlarged": three });
    ledger.check("3B constant <= explicit bound", three.value <= bound * slack, three.value, bound, wit.clone());
    ledger.check("bmo <= c^2 * 3B constant", bmo.value <= doubling * doubling * three.value * slack, bmo.value, doubling * doubling * three.value, wit);
    ledger.check("3B constant <= bmto", three.value <= bmto.value * slack, three.value, bmto.value, json!({}));

    let local = analysis.local_linf_constant();
    let max = f.max_abs();
    ledger.check("local constant <= max|f|", local.value <= max * slack, local.value, max, json!(local));
    ledger.check("max|f| <= 2 local constant", max <= 2.0 * local.value * slack, max, 2.0 * local.value, json!(local));

    let global = global_weak_from_bmo_with(f, bmo.value, doubling);
    ledger.check("global weak constant from bmo", global.holds, global.m_ii, global.bound, json!(global));
    ledger
}

fn covering_checks(space: &MetricMeasureSpace, b0: crate::metric_measure::Ball, f_ids: &[u64]) -> Ledger {
    let mut ledger = Ledger::new();
    let instance = match CoverInstance::new(space, b0, f_ids) {
        Ok(i) => i,
        Err(e) => {
            ledger.check("instance hypothesis", false, 0.0, 0.0, json!(e.to_string()));
            return ledger;
        }
    };
    let doubling = doubling_constant(space);
    let result = match czd_cover_with(&instance, doubling) {
        Ok(r) => r,
        Err(e) => {
            ledger.check("cover construction", false, 0.0, 0.0, json!(e.to_string()));
            return ledger;
        }
    };
    let wit = json!({ "b0": { "center": space.id(b0.center), "radius": b0.radius }, "f": f_ids });
    ledger.check("disjoint balls", result.disjoint, 0.0, 0.0, wit.clone());
    for b in &result.balls {
        let w = json!({ "center": b.center, "k": b.k });
        ledger.check("(i) balance", b.balanced, b.dilate_f_mass, b.dilate_complement_mass, w.clone());
        ledger.check("chain: doubling step", b.doubling_step, b.dilate_mass, doubling.powi(3) * b.inner_mass, w.clone());
        ledger.check("chain: density step", b.density_step, b.inner_mass, 2.0 * b.inner_f_mass, w);
    }
    ledger.check("(ii) uncovered mass", result.uncovered_mass == 0.0, result.uncovered_mass, 0.0, wit.clone());
    ledger.check("(iii) total dilate mass", result.property_iii, result.measured_constant, result.bound, wit.clone());

    // strongest refined hypothesis this instance satisfies
    let f_mass = instance.f_mass();
    if f_mass > 0.0 {
        let mut j = 0;
        while j < 8 && 2.0 * doubling.powi(j + 1) * f_mass <= instance.b0_mass() {
            j += 1;
        }
        let factor = refined_containment_factor(j as u32);
        let ok = dilates_within(&instance, &result, factor).unwrap_or(false);
        ledger.check("refined containment", ok, factor, f64::from(j), wit);
    }
    ledger
}

fn run_suite<T: Send>(
    name: &str,
    count: usize,
    instance: impl Fn(usize) -> T + Sync,
    checks: impl Fn(usize, T) -> (usize, Vec<Failure>) + Sync,
) -> (SuiteSummary, Vec<Failure>) {
    let rows: Vec<(usize, Vec<Failure>)> = (0..count).into_par_iter().map(|i| checks(i, instance(i))).collect();
    let total = rows.iter().map(|r| r.0).sum();
    let failures: Vec<Failure> = rows.into_iter().flat_map(|r| r.1).collect();
    let summary = SuiteSummary { name: name.to_string(), instances: count, checks: total, failures: failures.len() };
    (summary, failures)
}

fn generation_failure(suite: &str, i: usize, e: crate::error::Error) -> (usize, Vec<Failure>) {
    let failure = Failure {
        suite: suite.into(),
        instance: i,
        check: "instance generation".into(),
        lhs: 0.0,
        rhs: 0.0,
        witness: json!(e.to_string()),
        space: SpaceRecord { atoms: vec![], metric: crate::io::MetricRecord::Named("euclidean".into()) },
        function: None,
    };
    (1, vec![failure])
}

pub fn run(config: &VerifyConfig) -> VerifyReport {
    let seed = config.seed;
    let tol = config.tolerances;
    let mut suites = Vec::new();
    let mut failures = Vec::new();

    let (s, f) = run_suite("weak_linf", config.weak_linf, |i| weak_linf_instance(seed, i), |i, inst| match inst {
        Ok((space, values)) => {
            let f = SampleFunction::new(&space, values).expect("generated values fit");
            weak_linf_checks(&f, tol).into_failures("weak_linf", i, &f)
        }
        Err(e) => generation_failure("weak_linf", i, e),
    });
    suites.push(s);
    failures.extend(f);

    let (s, f) = run_suite("oscillation", config.oscillation, |i| oscillation_instance(seed, i), |i, inst| match inst {
        Ok((space, values)) => {
            let f = SampleFunction::new(&space, values).expect("generated values fit");
            oscillation_checks(&f, tol).into_failures("oscillation", i, &f)
        }
        Err(e) => generation_failure("oscillation", i, e),
    });
    suites.push(s);
    failures.extend(f);

    let (s, f) = run_suite("covering", config.covering, |i| covering_instance(seed, i), |i, inst| match inst {
        Ok((space, b0, f_ids)) => {
            let ledger = covering_checks(&space, b0, &f_ids);
            let indicator = space.ids().iter().map(|id| if f_ids.contains(id) { 1.0 } else { 0.0 }).collect();
            let f = SampleFunction::new(&space, indicator).expect("indicator fits");
            ledger.into_failures("covering", i, &f)
        }
        Err(e) => generation_failure("covering", i, e),
    });
    suites.push(s);
    failures.extend(f);

    VerifyReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        tolerances: tol,
        passed: failures.is_empty(),
        suites,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run_passes() {
        let report = run(&VerifyConfig::uniform(3, 0));
        assert!(report.passed);
        assert_eq!(report.total_checks(), 0);
        assert_eq!(report.suites.len(), 3);
    }

    #[test]
    fn small_run_passes() {
        let report = run(&VerifyConfig::uniform(5, 6));
        assert!(report.passed, "{}", report.to_json());
        assert!(report.total_checks() > 0);
        assert_eq!(report.to_json(), run(&VerifyConfig::uniform(5, 6)).to_json());
    }
}
