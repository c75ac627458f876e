//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a failure status if any criterion fails.
//!
//! Calibrated studies are also compared against the frozen pilot run in
//! `tests/fixtures/pilot.json` (regenerate with the `pilot_calibration`
//! example).

#[path = "support/pilot.rs"]
mod pilot;

use std::time::{Duration, Instant};

use bridgelab::gh::{correspondence_upper, diameter_lower, exact_small};
use bridgelab::harness::{run_study, Aggregate, StudyConfig, StudyKind};
use bridgelab::limits::{deterministic_consistency, sample_subordinator, wiener_bridge_metric};
use bridgelab::walks::{decomposition_check, distance_matrix_blocked};
use bridgelab::{DistanceMatrix, Family, IncrementModel, LimitMetricKind, StreamKey};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use statrs::function::erf::erfc;

/// Relative tolerance when comparing a rerun against the frozen pilot values.
const PILOT_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn pilot() -> Value {
    serde_json::from_str(include_str!("fixtures/pilot.json")).expect("pilot fixture parses")
}

fn matches_pilot(value: f64, frozen: &Value) -> bool {
    let frozen = frozen.as_f64().expect("numeric fixture");
    (value - frozen).abs() <= PILOT_TOL * frozen.abs().max(1e-300)
}

fn identity_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let families = [Family::GaussianIsotropic, Family::Rademacher, Family::ParetoSphere];
    let (mut worst_identity, mut worst_tq) = (0.0f64, 0.0f64);
    for b in 0..1000u64 {
        let family = families[(b % 3) as usize];
        let d = rng.random_range(1..=64);
        let n = rng.random_range(1..=256);
        let alpha = (family == Family::ParetoSphere).then(|| rng.random_range(0.1..0.95));
        let model = IncrementModel::new(family, d, alpha, 101).unwrap();
        let diag = decomposition_check(&model.sample_increments(n, StreamKey::new(b)));
        worst_identity = worst_identity.max(diag.identity_residual);
        worst_tq = worst_tq.max(diag.tq_residual);
    }
    Outcome::new(
        worst_identity <= 1e-8 && worst_tq <= 1e-8,
        format!("max bridge identity residual {worst_identity:.2e}, max |S|^2=T+Q residual {worst_tq:.2e}"),
    )
}

fn kernel_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=512);
        let d = rng.random_range(1..=512);
        let points = Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0));
        let block = [1, 16, 64, 100][rng.random_range(0..4)];
        let fast = distance_matrix_blocked(points.view(), 1.0, block).unwrap();
        for i in 0..n {
            let a = points.row(i);
            for j in (i + 1)..n {
                let naive = a
                    .iter()
                    .zip(points.row(j).iter())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max((fast.get(i, j) - naive).abs() / naive.max(1e-300));
            }
        }
    }
    Outcome::new(worst <= 1e-8, format!("max relative deviation {worst:.2e}"))
}

/// Draws a symmetric matrix of positive entries and replaces it with its
/// shortest-path closure, the largest metric below it.
fn repaired_metric(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.random_range(0.05..2.0);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = m[[i, k]] + m[[k, j]];
                if via < m[[i, j]] {
                    m[[i, j]] = via;
                }
            }
        }
    }
    DistanceMatrix::new(m, 1.0).unwrap()
}

fn gh_sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut violations = 0;
    for _ in 0..500 {
        let x = repaired_metric(&mut rng, 4);
        let y = repaired_metric(&mut rng, 4);
        let exact = exact_small(&x, &y).unwrap();
        let ok = diameter_lower(&x, &y) <= exact && exact <= correspondence_upper(&x, &y).unwrap();
        violations += usize::from(!ok);
    }
    let mut two_point_misses = 0;
    for _ in 0..500 {
        let (a, b): (f64, f64) = (rng.random_range(0.0..3.0), rng.random_range(0.0..3.0));
        let x = DistanceMatrix::new(ndarray::array![[0.0, a], [a, 0.0]], 1.0).unwrap();
        let y = DistanceMatrix::new(ndarray::array![[0.0, b], [b, 0.0]], 1.0).unwrap();
        two_point_misses += usize::from(exact_small(&x, &y).unwrap() != 0.5 * (a - b).abs());
    }
    Outcome::new(
        violations == 0 && two_point_misses == 0,
        format!("{violations} sandwich violations in 500 spaces, {two_point_misses} inexact two-point values in 500"),
    )
}

fn theorem1_desk_scale(fixture: &Value) -> Outcome {
    let cfg = pilot::theorem1();
    let report = run_study(&cfg, 1).unwrap();
    let medians: Vec<f64> = cfg
        .schedule
        .iter()
        .map(|&(d, n)| report.median(d, n, "sup_dev").unwrap())
        .collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let exceed = report.summary(6400, 6400, "sup_dev", &Aggregate::Exceedance(0.1)).unwrap();
    let frozen = fixture["theorem1"].as_array().unwrap();
    let reproduced = medians.iter().zip(frozen).all(|(m, f)| matches_pilot(*m, &f["median_sup_dev"]));
    Outcome::new(
        decreasing && exceed <= 0.05 && reproduced,
        format!(
            "medians {} (strictly decreasing: {decreasing}); P(sup_dev > 0.1) at d=6400 = {exceed}; matches pilot: {reproduced}",
            fmt_list(&medians)
        ),
    )
}

fn lemma1_desk_scale(fixture: &Value) -> Outcome {
    let report = run_study(&pilot::lemma1(), 1).unwrap();
    let small = report.median(100, 100, "dev_t=0.5").unwrap();
    let large = report.median(1600, 1600, "dev_t=0.5").unwrap();
    let reproduced = matches_pilot(small, &fixture["lemma1"]["median_100"])
        && matches_pilot(large, &fixture["lemma1"]["median_1600"]);
    Outcome::new(
        large < 0.5 * small && reproduced,
        format!("median at d=n=100 {small:.5}, at d=n=1600 {large:.5}; matches pilot: {reproduced}"),
    )
}

/// One-sample KS distance between `samples` and a continuous CDF.
fn ks_one_sample(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn subordinator_sampler(fixture: &Value) -> Outcome {
    let mut big = 0usize;
    let mut zeta = Vec::new();
    for k in 0..pilot::SUBORDINATOR_SAMPLES {
        let s = sample_subordinator(0.5, pilot::SUBORDINATOR_EPS, pilot::PILOT_SEED, pilot::subordinator_key(k)).unwrap();
        big += s.atoms().iter().filter(|a| a.y > 1.0).count();
        zeta.push(s.zeta1());
    }
    let mean_big = big as f64 / zeta.len() as f64;
    let levy_cdf = |x: f64| if x <= 0.0 { 0.0 } else { erfc((std::f64::consts::PI / (4.0 * x)).sqrt()) };
    let ks = ks_one_sample(zeta, levy_cdf);
    let reproduced = matches_pilot(mean_big, &fixture["subordinator"]["mean_big_atoms"]);
    Outcome::new(
        (0.9..=1.1).contains(&mean_big) && ks <= 0.06 && reproduced,
        format!("mean count of atoms above 1: {mean_big:.3}; KS to Levy CDF {ks:.4}; matches pilot: {reproduced}"),
    )
}

fn consistency_probe() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for u in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let (emb, stmt) = deterministic_consistency(u).unwrap();
        let target = (u * (1.0 - u)).sqrt();
        worst = worst.max((emb - target).abs()).max(stmt.abs());
        ok &= (emb - target).abs() <= 1e-15 && stmt.abs() <= 1e-15;
        ok &= emb == wiener_bridge_metric(0.0, u).unwrap();
    }
    Outcome::new(
        ok,
        format!("embedded value equals sqrt(u(1-u)) and the closed-form value is 0 (max error {worst:.1e}); embedded matches the Wiener bridge metric bit for bit"),
    )
}

fn theorem2_desk_scale(fixture: &Value) -> Outcome {
    let cfg = pilot::theorem2();
    let report = run_study(&cfg, 1).unwrap();
    let (d, n) = cfg.schedule[0];
    let mut emitted = 0;
    let mut emb_ok = true;
    let mut reproduced = true;
    let mut parts = Vec::new();
    for f in ["diameter", "mid", "quartile"] {
        for kind in [LimitMetricKind::SubordinatorStmt, LimitMetricKind::SubordinatorEmb] {
            let Some(ks) = report.ks_entry(d, n, f, kind) else { continue };
            emitted += 1;
            if kind == LimitMetricKind::SubordinatorEmb {
                emb_ok &= ks.statistic <= 0.15;
            }
            reproduced &= matches_pilot(ks.statistic, &fixture["theorem2"][format!("{f}/{kind}")]);
            parts.push(format!("{f}/{kind}={:.4}", ks.statistic));
        }
    }
    let summary_rows = report.summaries.iter().filter(|s| matches!(s.aggregate, Aggregate::Ks(_))).count();
    Outcome::new(
        emitted == 6 && summary_rows == 6 && emb_ok && reproduced,
        format!("{emitted} KS entries [{}]; matches pilot: {reproduced}", parts.join(", ")),
    )
}

fn truncation_desk_scale(fixture: &Value) -> Outcome {
    let cfg = pilot::truncation();
    let report = run_study(&cfg, 1).unwrap();
    let (d, n) = cfg.schedule[0];
    let medians: Vec<f64> = cfg
        .s_list
        .iter()
        .map(|s| report.median(d, n, &format!("dh_s={s}")).unwrap())
        .collect();
    let nonincreasing = medians.windows(2).all(|w| w[1] <= w[0]);
    let frozen = fixture["truncation"]["median_dh"].as_array().unwrap();
    let reproduced = medians.iter().zip(frozen).all(|(m, f)| matches_pilot(*m, f));
    Outcome::new(
        nonincreasing && reproduced,
        format!("medians over s = 1e-1, 1e-2, 1e-3: {}; matches pilot: {reproduced}", fmt_list(&medians)),
    )
}

fn angular_diagnostic(fixture: &Value) -> Outcome {
    let report = run_study(&pilot::angular(), 1).unwrap();
    let med = |d| report.median(d, 100, "abs_inner").unwrap();
    let (m100, m4000, m10000) = (med(100), med(4000), med(10000));
    let ratio = m100 / m10000;
    let reproduced = matches_pilot(m100, &fixture["angular"]["median_100"])
        && matches_pilot(m4000, &fixture["angular"]["median_4000"])
        && matches_pilot(m10000, &fixture["angular"]["median_10000"]);
    Outcome::new(
        m4000 < 0.05 && (7.0..=13.0).contains(&ratio) && reproduced,
        format!("median at d=4000 {m4000:.5}; ratio d=100/d=10000 {ratio:.3}; matches pilot: {reproduced}"),
    )
}

fn small_configs() -> Vec<StudyConfig> {
    let mut lemma1 = StudyConfig::new(StudyKind::Lemma1, Family::Rademacher, None, vec![(16, 40), (64, 40)]);
    lemma1.trials = 24;
    let mut theorem1 = StudyConfig::new(StudyKind::Theorem1, Family::GaussianIsotropic, None, vec![(32, 64), (128, 64)]);
    theorem1.trials = 24;
    let mut theorem2 = StudyConfig::new(StudyKind::Theorem2, Family::ParetoSphere, Some(0.5), vec![(64, 64)]);
    theorem2.trials = 40;
    let mut truncation = StudyConfig::new(StudyKind::Truncation, Family::ParetoSphere, Some(0.5), vec![(40, 80)]);
    truncation.trials = 12;
    let mut angular = StudyConfig::new(StudyKind::Angular, Family::ParetoSphere, Some(0.5), vec![(100, 20), (1000, 20)]);
    angular.trials = 50;
    let mut configs = vec![lemma1, theorem1, theorem2, truncation, angular];
    for (k, cfg) in configs.iter_mut().enumerate() {
        cfg.seed = 700 + k as u64;
    }
    configs
}

fn reproducibility() -> Outcome {
    let mut differing = Vec::new();
    for cfg in small_configs() {
        let bytes = |workers| {
            let r = run_study(&cfg, workers).unwrap();
            (r.to_csv(), r.summary_csv())
        };
        let first = bytes(1);
        if first != bytes(1) || first != bytes(8) {
            differing.push(cfg.study.to_string());
        }
    }
    Outcome::new(
        differing.is_empty(),
        if differing.is_empty() {
            "report and summary CSV identical across reruns and worker counts 1, 8 for all five studies".to_string()
        } else {
            format!("output differs for {}", differing.join(", "))
        },
    )
}

fn fmt_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.5}")).collect();
    format!("[{}]", parts.join(", "))
}

fn main() {
    let fixture = pilot();
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, Duration, Check)> = vec![
        ("bridge decomposition identities", Duration::from_secs(60), Box::new(identity_suite)),
        ("Gram kernel equals naive kernel", Duration::from_secs(60), Box::new(kernel_equivalence)),
        ("GH lower <= exact <= upper", Duration::from_secs(300), Box::new(gh_sandwich)),
        ("square-integrable convergence to the Wiener bridge", Duration::from_secs(900), Box::new(|| theorem1_desk_scale(&fixture))),
        ("pointwise bridge concentration", Duration::from_secs(300), Box::new(|| lemma1_desk_scale(&fixture))),
        ("subordinator sampler", Duration::from_secs(120), Box::new(|| subordinator_sampler(&fixture))),
        ("deterministic consistency probe", Duration::from_secs(1), Box::new(consistency_probe)),
        ("heavy-tailed convergence in distribution", Duration::from_secs(900), Box::new(|| theorem2_desk_scale(&fixture))),
        ("small-jump truncation", Duration::from_secs(600), Box::new(|| truncation_desk_scale(&fixture))),
        ("angular components decorrelate", Duration::from_secs(120), Box::new(|| angular_diagnostic(&fixture))),
        ("reproducibility across workers", Duration::from_secs(300), Box::new(reproducibility)),
    ];

    let mut failures = 0;
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let pass = outcome.pass && in_time;
        failures += usize::from(!pass);
        println!(
            "acceptance {:>2} {:<52} {}  ({}; {:.1?} of {:?})",
            k + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed,
            budget
        );
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failures, failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
