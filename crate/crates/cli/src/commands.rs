use std::path::Path;

use serde::{Deserialize, Serialize};
use weakbmo::covering::{czd_cover, CoverInstance, CoverResult};
use weakbmo::io::{function_to_json, parse_function, parse_id_list, parse_space, space_to_json};
use weakbmo::oscillation::{
    counterexample_oscillation, global_weak_from_bmo_with, theorem44_bound, BallOscillation, BallWitness,
    GlobalWeakCheck, JnCheck, OscillationAnalysis,
};
use weakbmo::random::{self, instance_rng, SpaceParams};
use weakbmo::rearrangement::{decreasing_rearrangement, distribution_function, maximal_average, weak_seminorm};
use weakbmo::verify::{self, Tolerances, VerifyConfig};
use weakbmo::weak_linf::{constant_report, ConstantReport};
use weakbmo::{
    counterexample_function, dyadic_counterexample_space, log_example_space, Ball, MetricMeasureSpace, SampleFunction,
    StepFunction, Supremum,
};

use crate::output::{read, write, write_json, CliError, CliResult, Csv, Header};
use crate::{AnalyzeArgs, BmoArgs, CounterexampleArgs, CoverAction, CoverArgs, GenArgs, GenKind, PlotArgs, VerifyArgs};

fn load(path: &Path) -> CliResult<MetricMeasureSpace> {
    Ok(parse_space(&read(path)?)?)
}

fn load_function<'s>(space: &'s MetricMeasureSpace, path: &Path) -> CliResult<SampleFunction<'s>> {
    Ok(parse_function(space, &read(path)?)?)
}

fn write_pair(out: &Path, f: &SampleFunction) -> CliResult {
    write(&out.join("space.json"), &(space_to_json(f.space()) + "\n"))?;
    write(&out.join("function.json"), &(function_to_json(f) + "\n"))
}

pub fn gen(args: GenArgs) -> CliResult {
    match args.kind {
        GenKind::Dyadic => {
            let space = dyadic_counterexample_space(args.k)?;
            write_pair(&args.out, &counterexample_function(&space)?)
        }
        GenKind::LogExample => {
            let example = log_example_space(args.n.unwrap_or(1), args.m)?;
            write_pair(&args.out, &example.function())
        }
        GenKind::Random => {
            let mut rng = instance_rng(args.seed, 0);
            let params = SpaceParams {
                atoms: args.n.unwrap_or(32),
                dim: args.dim,
                masses: match args.masses {
                    crate::Masses::Unit => random::MassKind::Unit,
                    crate::Masses::Dyadic => random::MassKind::Dyadic,
                },
                layout: match args.layout {
                    crate::Layout::Uniform => random::Layout::Uniform,
                    crate::Layout::Lattice => random::Layout::Lattice,
                    crate::Layout::Ultrametric => random::Layout::Ultrametric,
                },
            };
            let space = random::random_space(&mut rng, params)?;
            let template = match args.template {
                crate::Template::Gaussian => random::Template::Gaussian,
                crate::Template::LogSingular => random::Template::LogSingular,
                crate::Template::Quantized => random::Template::Quantized,
            };
            let values = random::random_function(&mut rng, &space, template);
            write_pair(&args.out, &SampleFunction::new(&space, values)?)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Analysis {
    total_mass: f64,
    /// Whether some atom has `f = 0`.
    attains_zero: bool,
    constants: ConstantReport,
    weak_seminorm: Supremum,
    distribution: StepFunction,
    rearrangement: StepFunction,
}

pub fn analyze(args: AnalyzeArgs, tolerances: Tolerances) -> CliResult {
    let space = load(&args.space)?;
    let f = load_function(&space, &args.function)?;
    if args.alpha.is_nan() || args.alpha < 0.0 {
        return Err(CliError::Input(format!("alpha must be nonnegative, got {}", args.alpha)));
    }
    let d = distribution_function(&f);
    let analysis = Analysis {
        total_mass: space.total_mass(),
        attains_zero: f.values().contains(&0.0),
        constants: constant_report(&f, args.alpha),
        weak_seminorm: weak_seminorm(&f),
        rearrangement: decreasing_rearrangement(&d)?,
        distribution: d,
    };
    let header = Header::new("analyze", &space, None, tolerances);
    write_json(&args.out.join("report.json"), &serde_json::json!({ "header": header, "analysis": analysis }))?;

    let d = &analysis.distribution;
    let mut csv = Csv::new(&["lambda", "d", "tail", "ratio"]);
    for lambda in level_rows(&analysis) {
        let (dl, tail) = (d.value_at(lambda), d.tail_from(lambda));
        csv.row(&[lambda, dl, tail, if dl > 0.0 { tail / dl } else { f64::NAN }]);
    }
    write(&args.out.join("levels.csv"), &csv.finish())
}

/// Distinct values of `|f|`.
fn level_rows(analysis: &Analysis) -> Vec<f64> {
    let zero = analysis.attains_zero.then_some(0.0);
    zero.into_iter().chain(analysis.distribution.breakpoints().iter().copied()).collect()
}

#[derive(Serialize, Deserialize)]
struct BmoReport {
    rho: f64,
    bmo_norm: BallWitness,
    bmto: BallWitness,
    enlarged: BallWitness,
    local_linf: BallWitness,
    explicit_bound: Option<f64>,
    john_nirenberg: JnCheck,
    global_weak: Option<GlobalWeakCheck>,
    balls: Vec<BallOscillation>,
}

pub fn bmo_report(args: BmoArgs, tolerances: Tolerances) -> CliResult {
    let space = load(&args.space)?;
    let f = load_function(&space, &args.function)?;
    let header = Header::new("bmo-report", &space, None, tolerances);
    let analysis = OscillationAnalysis::new(&f);
    let table = analysis.report();
    let report = BmoReport {
        rho: args.rho,
        enlarged: analysis.enlarged_ball_bmto_constant(args.rho)?,
        local_linf: analysis.local_linf_constant(),
        explicit_bound: header.doubling.map(|c| theorem44_bound(c, table.bmo_norm.value)),
        john_nirenberg: analysis.jn_check(table.bmto.value),
        global_weak: header.doubling.map(|c| global_weak_from_bmo_with(&f, table.bmo_norm.value, c)),
        bmo_norm: table.bmo_norm,
        bmto: table.bmto,
        balls: table.balls,
    };
    write_json(&args.out.join("report.json"), &serde_json::json!({ "header": header, "report": report }))?;
    write(&args.out.join("balls.csv"), &balls_csv(&report.balls))
}

fn balls_csv(balls: &[BallOscillation]) -> String {
    let mut csv = Csv::new(&["index", "center", "radius", "members", "mass", "mean", "oscillation"]);
    for b in balls {
        csv.row(&[b.index as f64, b.center as f64, b.radius, b.members as f64, b.mass, b.mean, b.oscillation]);
    }
    csv.finish()
}

fn parse_ball(space: &MetricMeasureSpace, text: &str) -> CliResult<Ball> {
    let bad = || CliError::Input(format!("--ball expects `id,radius`, got {text:?}"));
    let (id, radius) = text.split_once(',').ok_or_else(bad)?;
    let id: u64 = id.trim().parse().map_err(|_| bad())?;
    let radius: f64 = radius.trim().parse().map_err(|_| bad())?;
    Ok(Ball::new(space.index_of(id)?, radius))
}

pub fn cover(args: CoverArgs, tolerances: Tolerances) -> CliResult {
    if let Some(CoverAction::Verify(suite)) = args.action {
        let config = VerifyConfig { seed: suite.seed, weak_linf: 0, oscillation: 0, covering: suite.instances, tolerances };
        return finish_verify(&config, suite.out.as_deref());
    }
    let missing = |flag: &str| CliError::Input(format!("cover needs --{flag}"));
    let space = load(args.space.as_deref().ok_or_else(|| missing("space"))?)?;
    let b0 = parse_ball(&space, args.ball.as_deref().ok_or_else(|| missing("ball"))?)?;
    let f_ids = parse_id_list(&read(args.f.as_deref().ok_or_else(|| missing("F"))?)?)?;
    let instance = CoverInstance::new(&space, b0, &f_ids)?;
    let result: CoverResult = czd_cover(&instance)?;
    let header = Header::new("cover", &space, None, tolerances);
    let report = serde_json::json!({ "header": header, "cover": result });
    match &args.out {
        Some(path) => write_json(path, &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
    }
    if result.holds() {
        Ok(())
    } else {
        Err(CliError::Violation("covering properties fail".into()))
    }
}

pub fn counterexample(args: CounterexampleArgs) -> CliResult {
    if args.k < 1 {
        return Err(CliError::Input("--K must be at least 1".into()));
    }
    let mut csv = Csv::new(&["k", "oscillation"]);
    for k in 0..=(args.k - 1) / 2 {
        csv.row(&[k as f64, counterexample_oscillation(args.k, k)?]);
    }
    write(&args.out, &csv.finish())
}

fn finish_verify(config: &VerifyConfig, out: Option<&Path>) -> CliResult {
    let report = verify::run(config);
    for s in &report.suites {
        println!("{}: {} instances, {} checks, {} failures", s.name, s.instances, s.checks, s.failures);
    }
    for f in &report.failures {
        eprintln!("{} #{}: {} (lhs {}, rhs {}) witness {}", f.suite, f.instance, f.check, f.lhs, f.rhs, f.witness);
    }
    if let Some(path) = out {
        write(path, &(report.to_json() + "\n"))?;
    }
    println!("{}", if report.passed { "all checks passed" } else { "violations found" });
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Violation(format!("{} failed checks", report.failures.len())))
    }
}

pub fn verify(args: VerifyArgs, tolerances: Tolerances) -> CliResult {
    let mut config = match args.instances {
        Some(n) => VerifyConfig::uniform(args.seed, n),
        None => VerifyConfig { seed: args.seed, ..VerifyConfig::default() },
    };
    config.tolerances = tolerances;
    finish_verify(&config, args.out.as_deref())
}

pub fn plot_data(args: PlotArgs) -> CliResult {
    let text = read(&args.analysis)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", args.analysis.display())))?;
    let parse_err = |e: serde_json::Error| CliError::Input(format!("{}: {e}", args.analysis.display()));
    if let Some(a) = value.get("analysis") {
        let analysis: Analysis = serde_json::from_value(a.clone()).map_err(parse_err)?;
        let mut csv = Csv::new(&["lambda", "d"]);
        for lambda in level_rows(&analysis) {
            csv.row(&[lambda, analysis.distribution.value_at(lambda)]);
        }
        write(&args.out.join("distribution.csv"), &csv.finish())?;

        let f_star = &analysis.rearrangement;
        let mut csv = Csv::new(&["t", "f_star", "f_star_star", "difference"]);
        for &t in f_star.breakpoints() {
            let (fs, fss) = (f_star.value_at(t), maximal_average(f_star, t)?);
            csv.row(&[t, fs, fss, fss - fs]);
        }
        write(&args.out.join("rearrangement.csv"), &csv.finish())
    } else if let Some(r) = value.get("report") {
        let report: BmoReport = serde_json::from_value(r.clone()).map_err(parse_err)?;
        write(&args.out.join("oscillation.csv"), &balls_csv(&report.balls))
    } else {
        Err(CliError::Input(format!("{} is not an analyze or bmo-report file", args.analysis.display())))
    }
}
