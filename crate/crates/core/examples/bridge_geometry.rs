//! Builds one gaussian bridge in growing dimension and compares its scaled
//! grid distances to the Wiener bridge metric `sqrt(u(1-u))`.
//!
//! ```text
//! cargo run --release --example bridge_geometry
//! ```

use bridgelab::limits::limit_distance_matrix;
use bridgelab::walks::{bridge_of, cumulate, distance_matrix, subsample_grid};
use bridgelab::{Family, IncrementModel, LimitMetricKind, StreamKey};

fn main() -> bridgelab::Result<()> {
    let m = 8;
    let limit = limit_distance_matrix(LimitMetricKind::WienerBridge, None, m)?;
    println!("   d=n   sup |D_emp - D_lim|   diameter");
    for k in [50, 200, 800, 3200] {
        let model = IncrementModel::new(Family::GaussianIsotropic, k, None, 3)?;
        let batch = model.sample_increments(k, StreamKey::new(0));
        let bridge = bridge_of(&cumulate(&batch))?;
        let grid = subsample_grid(&bridge, m)?;
        let emp = distance_matrix(&grid, model.distance_scale(k))?;
        let dev = (emp.entries() - limit.entries()).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        println!("{k:>6}   {dev:>18.5}   {:.5}", emp.diameter());
    }
    println!("limit diameter {:.5}", limit.diameter());

    println!("\nrow 0 of the limit matrix:");
    let row: Vec<String> = limit.entries().row(0).iter().map(|v| format!("{v:.3}")).collect();
    println!("  {}", row.join("  "));
    Ok(())
}
