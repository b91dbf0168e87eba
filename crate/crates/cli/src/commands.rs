//! One function per subcommand. Each returns the resolved configuration,
//! the report and its per-level rows; the caller writes them out.

use diskinterp::blaschke::{inner_membership_test, BlaschkeProduct};
use diskinterp::carleson::{box_constant, bps_carleson_ratio, kernel_constant, weights_from_sequence, CarlesonReport};
use diskinterp::classify::Thresholds;
use diskinterp::earl::{earl_interpolate, verify_perturbation_comparabilities, InterpolationProblem};
use diskinterp::net::{NetConfig, SamplingNet};
use diskinterp::sequences::{
    gen_bwy_candidate, gen_clustered, gen_perturbed_radial, gen_radial, gen_random_separated, gen_stolz, BwyCalibration,
    DiskSequence,
};
use diskinterp::spaces::{
    bloch_seminorm, bps_norm, fpps_net, fpps_seminorm, function_net, hinf_norm, multiplier_test, AnalyticFunction,
    QuadratureConfig, SpaceParams, Verdict,
};
use diskinterp::verify::{
    box_generations, bwy_witness, check_prop22, check_theorem21, check_theorem32, closure_test, forelli_rudin_pairs,
    log_tempered_test, sequence_net_config, validate_forelli_rudin, validate_zhu_estimate, zhu_samples, ClosureConfig,
    EquivalenceReport, Prop22Config, Theorem21Config, Theorem32Config,
};
use diskinterp::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::input::{load_function, load_sequence, load_values, parse_function};
use crate::output::{rows, LevelRow, Status};
use crate::CliError;

pub struct Outcome {
    pub resolved: Value,
    pub report: Value,
    pub rows: Vec<LevelRow>,
    pub status: Status,
    /// Written verbatim instead of a JSON envelope (text sequence files).
    pub raw: Option<String>,
}

impl Outcome {
    fn new<R: Serialize, C: Serialize>(resolved: &C, report: &R, rows: Vec<LevelRow>, status: Status) -> Result<Self, CliError> {
        Ok(Outcome {
            resolved: to_value(resolved)?,
            report: to_value(report)?,
            rows,
            status,
            raw: None,
        })
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(format!("serialization failed: {e}")))
}

fn net_config(a: &NetArgs) -> NetConfig {
    NetConfig {
        levels: a.net_levels,
        density: a.net_density,
        ring_cap: a.net_ring_cap,
        rays: true,
    }
}

fn thresholds(a: &ThresholdArgs) -> Thresholds {
    Thresholds {
        bounded: a.bounded_slope,
        divergent: a.divergent_slope,
        ..Thresholds::default()
    }
}

fn quadrature(a: &QuadArgs, base: QuadratureConfig) -> QuadratureConfig {
    QuadratureConfig {
        rel_tol: a.rel_tol.unwrap_or(base.rel_tol),
        boundary_levels: a.boundary_levels.unwrap_or(base.boundary_levels),
        ..base
    }
}

fn sequence_net(seq: &DiskSequence, a: &NetArgs) -> Result<(NetConfig, SamplingNet), CliError> {
    let config = sequence_net_config(seq, &net_config(a));
    let net = SamplingNet::build(&config, seq.points(), &[])?;
    Ok((config, net))
}

fn equivalence_status(reports: &[&EquivalenceReport]) -> Status {
    if reports.iter().any(|r| r.contradiction()) {
        Status::Contradiction
    } else if reports.iter().any(|r| !r.converged) {
        Status::NonConverged
    } else {
        Status::Ok
    }
}

fn equivalence_rows(report: &EquivalenceReport, prefix: &str) -> Vec<LevelRow> {
    report
        .conditions
        .iter()
        .flat_map(|c| rows(&format!("{prefix}{}", c.name), &c.per_level))
        .collect()
}

pub fn gen(a: &GenArgs) -> Result<Outcome, CliError> {
    let seq = match a.family {
        Family::Radial => gen_radial(a.q, a.n)?,
        Family::Clustered => gen_clustered(a.s, a.growth, a.levels)?,
        Family::Bwy => {
            let calibration = match a.calibration {
                Calibration::Default => BwyCalibration::default(),
                Calibration::FullCircle => BwyCalibration::full_circle(),
            };
            gen_bwy_candidate(a.s, a.levels, &calibration)?
        }
        Family::Stolz => gen_stolz(a.n, a.spread)?,
        Family::PerturbedRadial => gen_perturbed_radial(a.q, a.n, a.amplitude, a.seed)?,
        Family::RandomSeparated => gen_random_separated(a.n, a.min_rho, a.max_radius, a.seed)?,
    };
    let mut out = Outcome::new(&json!({ "family": a.family }), &seq, Vec::new(), Status::Ok)?;
    if a.format == SeqFormat::Text {
        out.raw = Some(seq.to_text());
    }
    Ok(out)
}

pub fn metrics(a: &InputArgs) -> Result<Outcome, CliError> {
    let seq = load_sequence(&a.input)?;
    let report = json!({
        "label": seq.label(),
        "size": seq.len(),
        "max_generation": seq.max_generation(),
        "separation": seq.separation_report(),
    });
    Outcome::new(&Value::Null, &report, Vec::new(), Status::Ok)
}

pub fn carleson(a: &CarlesonArgs) -> Result<Outcome, CliError> {
    let seq = load_sequence(&a.input.input)?;
    let th = thresholds(&a.thresholds);
    let mu = weights_from_sequence(&seq, a.s)?;
    let (resolved, report): (Value, CarlesonReport) = match a.test {
        CarlesonTest::Box => {
            let generations = a.generations.unwrap_or_else(|| box_generations(&seq));
            (json!({ "generations": generations, "thresholds": th }), box_constant(&mu, a.s, generations, &th)?)
        }
        CarlesonTest::Kernel => {
            let t = a.t.unwrap_or(a.s);
            let (net_config, net) = sequence_net(&seq, &a.net)?;
            (
                json!({ "t": t, "net": net_config, "thresholds": th }),
                kernel_constant(&mu, a.s, t, &net, &th)?,
            )
        }
        CarlesonTest::Bps => {
            let (net_config, net) = sequence_net(&seq, &a.net)?;
            (json!({ "net": net_config, "thresholds": th }), bps_carleson_ratio(&mu, a.s, &net, &th)?)
        }
    };
    let r = rows(&report.test, &report.levels);
    Outcome::new(&resolved, &report, r, Status::Ok)
}

pub fn inner(a: &InnerArgs) -> Result<Outcome, CliError> {
    let seq = load_sequence(&a.zeros)?;
    let th = thresholds(&a.thresholds);
    let (net_config, net) = sequence_net(&seq, &a.net)?;
    let report = inner_membership_test(&BlaschkeProduct::from_sequence(&seq), a.p, a.s, &net, &th)?;
    let r = rows("kernel", &report.carleson.levels);
    Outcome::new(&json!({ "net": net_config, "thresholds": th }), &report, r, Status::Ok)
}

fn function_net_config(f: &AnalyticFunction, a: &NetArgs) -> NetConfig {
    match f {
        AnalyticFunction::Blaschke { product } => match DiskSequence::new(product.zeros().to_vec(), "zeros") {
            Ok(seq) => sequence_net_config(&seq, &net_config(a)),
            Err(_) => net_config(a),
        },
        _ => net_config(a),
    }
}

pub fn seminorm(a: &SeminormArgs) -> Result<Outcome, CliError> {
    let f = load_function(a.function.function.as_deref(), a.function.zeros.as_deref())?;
    let th = thresholds(&a.thresholds);
    let params = SpaceParams::new(a.p, a.s);
    let quad = quadrature(&a.quadrature, QuadratureConfig::default());
    let net_cfg = function_net_config(&f, &a.net);
    let resolved = json!({ "function": f, "quadrature": quad, "net": net_cfg, "thresholds": th });
    match a.norm {
        NormKind::Bps => {
            let r = bps_norm(&f, &params, &quad)?;
            let status = if r.verdict == Verdict::Converged { Status::Ok } else { Status::NonConverged };
            let lr = rows("bps_integral", &r.quadrature.per_level);
            Outcome::new(&resolved, &r, lr, status)
        }
        NormKind::Fpps => {
            let net = fpps_net(&f, a.net.net_levels)?;
            let r = fpps_seminorm(&f, &params, &net, &quad, &th)?;
            let status = if r.inconclusive_points == 0 { Status::Ok } else { Status::NonConverged };
            let lr = rows("fpps", &r.per_level);
            Outcome::new(&resolved, &r, lr, status)
        }
        NormKind::Bloch => {
            let r = bloch_seminorm(&f, &function_net(&f, &net_cfg)?, &th)?;
            let lr = rows("bloch", &r.per_level);
            Outcome::new(&resolved, &r, lr, Status::Ok)
        }
        NormKind::Hinf => {
            let r = hinf_norm(&f, &function_net(&f, &net_cfg)?, &th)?;
            let lr = rows("hinf", &r.net.per_level);
            Outcome::new(&resolved, &r, lr, Status::Ok)
        }
        NormKind::Multiplier => {
            let r = multiplier_test(&f, &params, &quad, &net_cfg, &th)?;
            let mut lr = rows("carleson", &r.carleson.levels);
            lr.extend(rows("hinf", &r.hinf.net.per_level));
            Outcome::new(&resolved, &r, lr, Status::Ok)
        }
    }
}

pub fn interpolate(a: &InterpolateArgs) -> Result<Outcome, CliError> {
    let nodes = load_sequence(&a.nodes)?;
    let values = match &a.values {
        Some(path) => load_values(path)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            (0..nodes.len())
                .map(|_| Complex64::from_polar(rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>()))
                .collect()
        }
    };
    let problem = InterpolationProblem::new(nodes, values)?;
    let solution = earl_interpolate(&problem, a.tol, a.max_iter)?;
    let comparabilities = verify_perturbation_comparabilities(&problem.nodes, &solution.perturbed_zeros)?;
    let report = json!({ "problem": problem, "solution": solution, "comparabilities": comparabilities });
    Outcome::new(&json!({ "tol": a.tol, "max_iter": a.max_iter }), &report, Vec::new(), Status::Ok)
}

pub fn theorem21(a: &Theorem21Args) -> Result<Outcome, CliError> {
    let seq = load_sequence(&a.input.input)?;
    let config = Theorem21Config {
        net: net_config(&a.net),
        thresholds: thresholds(&a.thresholds),
        seed: a.seed,
        ..Theorem21Config::default()
    };
    let report = check_theorem21(&seq, a.p, a.s, a.t, a.trials, &config)?;
    let status = equivalence_status(&[&report]);
    Outcome::new(&config, &report, equivalence_rows(&report, ""), status)
}

pub fn theorem32(a: &Theorem32Args) -> Result<Outcome, CliError> {
    let seq = load_sequence(&a.zeros)?;
    let base = Theorem32Config::default();
    let config = Theorem32Config {
        net: net_config(&a.net),
        thresholds: thresholds(&a.thresholds),
        quadrature: quadrature(&a.quadrature, base.quadrature),
        ..base
    };
    let report = check_theorem32(&seq, a.p, a.s, &config)?;
    let status = equivalence_status(&[&report]);
    Outcome::new(&config, &report, equivalence_rows(&report, ""), status)
}

pub fn zhu(a: &ZhuArgs) -> Result<Outcome, CliError> {
    let quad = quadrature(&a.quadrature, QuadratureConfig::default());
    let report = validate_zhu_estimate(a.c, a.t, &zhu_samples(a.samples), &quad)?;
    let r: Vec<LevelRow> = report
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| LevelRow {
            series: "integral".to_string(),
            level: k as u32 + 1,
            value: s.value,
        })
        .collect();
    let status = if report.converged { Status::Ok } else { Status::NonConverged };
    Outcome::new(&json!({ "quadrature": quad }), &report, r, status)
}

pub fn forelli(a: &ForelliArgs) -> Result<Outcome, CliError> {
    let quad = quadrature(&a.quadrature, QuadratureConfig::default());
    let pairs = forelli_rudin_pairs(a.pairs, a.seed);
    let report = validate_forelli_rudin(a.s, a.r, a.t, &pairs, &quad)?;
    let status = if report.unconverged == 0 { Status::Ok } else { Status::NonConverged };
    Outcome::new(&json!({ "quadrature": quad, "refined": quad.refined() }), &report, Vec::new(), status)
}

pub fn closure(a: &ClosureArgs) -> Result<Outcome, CliError> {
    let f = load_function(a.function.function.as_deref(), a.function.zeros.as_deref())?;
    let base = ClosureConfig::default();
    let config = ClosureConfig {
        thresholds: thresholds(&a.thresholds),
        quadrature: quadrature(&a.quadrature, base.quadrature),
        ..base
    };
    let net_cfg = function_net_config(&f, &a.net);
    let net = function_net(&f, &net_cfg)?;
    let report = closure_test(&f, &a.eps, a.t, a.s, &net, &config)?;
    let r: Vec<LevelRow> = report
        .per_epsilon
        .iter()
        .flat_map(|e| rows(&format!("eps={}", e.epsilon), &e.per_level))
        .collect();
    let status = if report.per_epsilon.iter().all(|e| e.converged) { Status::Ok } else { Status::NonConverged };
    Outcome::new(&json!({ "closure": config, "net": net_cfg }), &report, r, status)
}

pub fn logtempered(a: &LogTemperedArgs) -> Result<Outcome, CliError> {
    let th = thresholds(&a.thresholds);
    if a.witness {
        let report = bwy_witness(a.s, a.levels, &a.t, &net_config(&a.net), &th)?;
        let r: Vec<LevelRow> = report
            .attempts
            .iter()
            .flat_map(|at| {
                let mut v = rows(&format!("{}:log_tempered", at.calibration_name), &at.log_tempered.levels);
                v.extend(rows(&format!("{}:box_s", at.calibration_name), &at.box_s.levels));
                v.extend(rows(&format!("{}:kernel_s", at.calibration_name), &at.kernel_s.levels));
                for (t, b, k) in &at.t_carleson {
                    v.extend(rows(&format!("{}:box_t={t}", at.calibration_name), &b.levels));
                    v.extend(rows(&format!("{}:kernel_t={t}", at.calibration_name), &k.levels));
                }
                v
            })
            .collect();
        return Outcome::new(&json!({ "net": net_config(&a.net), "thresholds": th }), &report, r, Status::Ok);
    }
    let path = a
        .input
        .as_ref()
        .ok_or_else(|| CliError::Input("--in is required unless --witness is given".to_string()))?;
    let seq = load_sequence(path)?;
    let (net_cfg, net) = sequence_net(&seq, &a.net)?;
    let report = log_tempered_test(&seq, a.s, &net, &th)?;
    let r = rows("log_tempered", &report.levels);
    Outcome::new(&json!({ "net": net_cfg, "thresholds": th }), &report, r, Status::Ok)
}

pub fn prop22(a: &Prop22Args) -> Result<Outcome, CliError> {
    let family = a.functions.iter().map(|s| parse_function(s)).collect::<Result<Vec<_>, _>>()?;
    let base = Prop22Config::default();
    let config = Prop22Config {
        quadrature: quadrature(&a.quadrature, base.quadrature),
        net: NetConfig {
            levels: a.net_levels,
            ..base.net
        },
        seminorm_levels: a.net_levels,
        thresholds: thresholds(&a.thresholds),
    };
    let reports = check_prop22(&family, a.p, a.s, &config)?;
    let status = equivalence_status(&reports.iter().collect::<Vec<_>>());
    let r: Vec<LevelRow> = reports
        .iter()
        .enumerate()
        .flat_map(|(k, rep)| equivalence_rows(rep, &format!("{k}:")))
        .collect();
    Outcome::new(&config, &reports, r, status)
}
