//! Square-integrable study: gaussian increments with n = d, tracking the
//! sup-deviation of the scaled grid distances from the Wiener bridge metric.
//!
//! ```text
//! cargo run --release --example theorem1_convergence
//! ```

use bridgelab::harness::{run_study, Aggregate, StudyConfig, StudyKind};
use bridgelab::Family;

fn main() -> bridgelab::Result<()> {
    let schedule: Vec<(usize, usize)> = [50, 200, 800, 3200].iter().map(|&k| (k, k)).collect();
    let mut cfg = StudyConfig::new(StudyKind::Theorem1, Family::GaussianIsotropic, None, schedule);
    cfg.trials = 40;
    cfg.epsilon_list = vec![0.05, 0.1];
    cfg.seed = 11;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_study(&cfg, workers)?;

    println!("   d=n   median sup_dev   P(>0.05)   P(>0.1)   median gh_upper");
    for &(d, n) in &cfg.schedule {
        println!(
            "{d:>6}   {:>14.5}   {:>8.3}   {:>7.3}   {:>15.5}",
            report.median(d, n, "sup_dev").unwrap_or(f64::NAN),
            report.summary(d, n, "sup_dev", &Aggregate::Exceedance(0.05)).unwrap_or(f64::NAN),
            report.summary(d, n, "sup_dev", &Aggregate::Exceedance(0.1)).unwrap_or(f64::NAN),
            report.median(d, n, "gh_upper").unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
