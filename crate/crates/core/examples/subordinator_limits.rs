//! Samples a stable subordinator and evaluates the candidate limit metrics
//! on a coarse grid, including the deterministic consistency probe.
//!
//! ```text
//! cargo run --release --example subordinator_limits
//! ```

use bridgelab::limits::{deterministic_consistency, limit_distance_matrix, sample_subordinator};
use bridgelab::{LimitMetricKind, StreamKey};

fn main() -> bridgelab::Result<()> {
    let sample = sample_subordinator(0.5, 1e-6, 42, StreamKey::new(0))?;
    println!("{} atoms, zeta_1 = {:.4}", sample.atoms().len(), sample.zeta1());
    let mut big: Vec<_> = sample.atoms().iter().filter(|a| a.y > 0.05).collect();
    big.sort_by(|a, b| b.y.total_cmp(&a.y));
    for a in big.iter().take(5) {
        println!("  jump {:.4} at t = {:.4}", a.y, a.x);
    }

    let m = 4;
    for kind in [
        LimitMetricKind::SubordinatorPlain,
        LimitMetricKind::SubordinatorStmt,
        LimitMetricKind::SubordinatorEmb,
    ] {
        let d = limit_distance_matrix(kind, Some(&sample), m)?;
        println!("\n{kind} on the grid i/{m}:");
        for row in d.entries().rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:7.4}")).collect();
            println!("  {}", cells.join(" "));
        }
    }

    println!("\nconsistency probe with zeta_t = t:");
    for u in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let (emb, stmt) = deterministic_consistency(u)?;
        println!("  u = {u:<4}  embedded {emb:.6}  closed form {stmt:.6}");
    }
    Ok(())
}
