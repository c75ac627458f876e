//! Gromov-Hausdorff bounds between small metric spaces, with the exhaustive
//! oracle where it applies, and the Hausdorff distance between two clouds.
//!
//! ```text
//! cargo run --release --example gh_bounds
//! ```

use bridgelab::gh::{gh_bounds, hausdorff_between_clouds};
use bridgelab::limits::limit_distance_matrix;
use bridgelab::DistanceMatrix;
use bridgelab::LimitMetricKind;
use ndarray::array;

fn main() -> bridgelab::Result<()> {
    let path = DistanceMatrix::new(
        array![
            [0.0, 1.0, 2.0, 3.0],
            [1.0, 0.0, 1.0, 2.0],
            [2.0, 1.0, 0.0, 1.0],
            [3.0, 2.0, 1.0, 0.0],
        ],
        1.0,
    )?;
    let square = DistanceMatrix::new(
        array![
            [0.0, 1.0, 2f64.sqrt(), 1.0],
            [1.0, 0.0, 1.0, 2f64.sqrt()],
            [2f64.sqrt(), 1.0, 0.0, 1.0],
            [1.0, 2f64.sqrt(), 1.0, 0.0],
        ],
        1.0,
    )?;
    let report = gh_bounds(&path, &square, true)?;
    println!("path vs square: {}", serde_json::to_string(&report).expect("serialises"));

    let wiener = limit_distance_matrix(LimitMetricKind::WienerBridge, None, 4)?;
    let scaled = DistanceMatrix::new(wiener.entries() * 1.1, 1.0)?;
    let report = gh_bounds(&wiener, &scaled, false)?;
    println!("bridge grid vs 1.1x: lower {:.4}, upper {:.4}", report.lower, report.upper);

    let a = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let b = array![[0.1, 0.0], [1.0, 0.2], [0.0, 1.0], [3.0, 4.0]];
    println!("Hausdorff distance of the clouds: {:.4}", hausdorff_between_clouds(a.view(), b.view())?);
    Ok(())
}
