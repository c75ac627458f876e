//! Heavy-tailed regime: pareto-sphere increments with alpha = 0.5. Compares
//! grid functionals of the empirical bridge with both subordinator bridge
//! metrics by KS distance, then shows the small-jump truncation effect.
//!
//! ```text
//! cargo run --release --example heavy_tail_study
//! ```

use bridgelab::harness::{run_study, StudyConfig, StudyKind};
use bridgelab::{Family, LimitMetricKind};

fn main() -> bridgelab::Result<()> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());

    let mut cfg = StudyConfig::new(StudyKind::Theorem2, Family::ParetoSphere, Some(0.5), vec![(500, 500)]);
    cfg.trials = 150;
    cfg.seed = 5;
    let report = run_study(&cfg, workers)?;
    println!("KS distance, empirical vs limit (d = n = 500, {} trials)", cfg.trials);
    println!("  functional   closed form   embedded");
    for f in ["diameter", "mid", "quartile"] {
        let ks = |kind| report.ks_entry(500, 500, f, kind).map_or(f64::NAN, |k| k.statistic);
        println!(
            "  {f:<10}   {:>11.4}   {:>8.4}",
            ks(LimitMetricKind::SubordinatorStmt),
            ks(LimitMetricKind::SubordinatorEmb)
        );
    }

    let mut cfg = StudyConfig::new(StudyKind::Truncation, Family::ParetoSphere, Some(0.5), vec![(500, 500)]);
    cfg.trials = 20;
    cfg.seed = 6;
    let report = run_study(&cfg, workers)?;
    println!("\nscaled Hausdorff distance after dropping increments with |X|^2 <= s a(n)");
    for s in &cfg.s_list {
        println!("  s = {s:<6} median {:.5}", report.median(500, 500, &format!("dh_s={s}")).unwrap_or(f64::NAN));
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    Ok(())
}
