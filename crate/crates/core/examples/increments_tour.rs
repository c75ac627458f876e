//! Samples each increment family and prints its basic statistics.
//!
//! ```text
//! cargo run --release --example increments_tour
//! ```

use bridgelab::{Family, IncrementModel, StreamKey};

fn main() -> bridgelab::Result<()> {
    let d = 200;
    let count = 5000;
    for (family, alpha) in [
        (Family::GaussianIsotropic, None),
        (Family::Rademacher, None),
        (Family::ParetoSphere, Some(0.5)),
    ] {
        let model = IncrementModel::new(family, d, alpha, 1)?;
        let batch = model.sample_increments(count, StreamKey::new(0));
        let mut sq: Vec<f64> = batch.rows().map(|r| r.iter().map(|x| x * x).sum()).collect();
        sq.sort_by(f64::total_cmp);
        let diag = model.condition_diagnostics();
        println!("{family} (d = {d}, {count} increments)");
        println!("  median |X|^2      {:.4}", sq[count / 2]);
        println!("  largest |X|^2     {:.4e}", sq[count - 1]);
        println!("  a(n) at n = 1000  {:.4e}", model.scaling(1000));
        match diag.max_component_second_moment {
            Some(v) => println!("  max E X_k^2       {v:.4e}"),
            None => println!("  max E X_k^2       infinite"),
        }
    }

    let nu = bridgelab::LevyMeasure::new(0.5)?;
    println!("\nLevy measure alpha = 0.5");
    for s in [1e-1, 1e-2, 1e-3] {
        println!(
            "  s = {s:<6} tail {:>10.4}  truncated mean at n = 2000 {:.6}",
            nu.tail(s),
            nu.truncated_mean(s, 2000)
        );
    }
    Ok(())
}
