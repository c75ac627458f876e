//! Pilot run of the desk-scale convergence studies.
//!
//! Runs every study configuration used by the acceptance suite once and
//! prints the observed medians and KS values as JSON. The output is frozen
//! in `tests/fixtures/pilot.json`:
//!
//! ```text
//! cargo run --release --example pilot_calibration > crates/core/tests/fixtures/pilot.json
//! ```

#[path = "../tests/support/pilot.rs"]
mod pilot;

use std::time::Instant;

use bridgelab::harness::{run_study, Aggregate};
use bridgelab::limits::sample_subordinator;
use bridgelab::LimitMetricKind;
use serde_json::{json, Map, Value};

fn timed<T>(label: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    eprintln!("{label}: {:.1?}", start.elapsed());
    out
}

fn main() {
    let mut fixtures = Map::new();

    let cfg = pilot::theorem1();
    let report = timed("theorem1", || run_study(&cfg, 1).unwrap());
    let rows: Vec<Value> = cfg
        .schedule
        .iter()
        .map(|&(d, n)| {
            json!({
                "d": d,
                "median_sup_dev": report.median(d, n, "sup_dev").unwrap(),
                "exceed_0.1": report.summary(d, n, "sup_dev", &Aggregate::Exceedance(0.1)).unwrap(),
            })
        })
        .collect();
    fixtures.insert("theorem1".into(), json!(rows));

    let cfg = pilot::lemma1();
    let report = timed("lemma1", || run_study(&cfg, 1).unwrap());
    fixtures.insert(
        "lemma1".into(),
        json!({
            "median_100": report.median(100, 100, "dev_t=0.5").unwrap(),
            "median_1600": report.median(1600, 1600, "dev_t=0.5").unwrap(),
        }),
    );

    let big = timed("subordinator", || {
        (0..pilot::SUBORDINATOR_SAMPLES)
            .map(|k| {
                let s = sample_subordinator(0.5, pilot::SUBORDINATOR_EPS, pilot::PILOT_SEED, pilot::subordinator_key(k))
                    .unwrap();
                s.atoms().iter().filter(|a| a.y > 1.0).count()
            })
            .sum::<usize>()
    });
    fixtures.insert(
        "subordinator".into(),
        json!({"mean_big_atoms": big as f64 / pilot::SUBORDINATOR_SAMPLES as f64}),
    );

    let cfg = pilot::theorem2();
    let report = timed("theorem2", || run_study(&cfg, 1).unwrap());
    let (d, n) = cfg.schedule[0];
    let mut ks = Map::new();
    for f in ["diameter", "mid", "quartile"] {
        for kind in [LimitMetricKind::SubordinatorStmt, LimitMetricKind::SubordinatorEmb] {
            ks.insert(format!("{f}/{kind}"), json!(report.ks_entry(d, n, f, kind).unwrap().statistic));
        }
    }
    fixtures.insert("theorem2".into(), Value::Object(ks));

    let cfg = pilot::truncation();
    let report = timed("truncation", || run_study(&cfg, 1).unwrap());
    let (d, n) = cfg.schedule[0];
    let medians: Vec<f64> = cfg
        .s_list
        .iter()
        .map(|s| report.median(d, n, &format!("dh_s={s}")).unwrap())
        .collect();
    fixtures.insert("truncation".into(), json!({"s": cfg.s_list, "median_dh": medians}));

    let cfg = pilot::angular();
    let report = timed("angular", || run_study(&cfg, 1).unwrap());
    let med = |d| report.median(d, 100, "abs_inner").unwrap();
    fixtures.insert(
        "angular".into(),
        json!({"median_100": med(100), "median_4000": med(4000), "median_10000": med(10000)}),
    );

    fixtures.insert("seed".into(), json!(pilot::PILOT_SEED));
    println!("{}", serde_json::to_string_pretty(&Value::Object(fixtures)).unwrap());
}
