//! Comparison of finite (pseudo-)metric spaces.
//!
//! Gromov–Hausdorff distance equals half the smallest distortion of a
//! correspondence between the two spaces. Here we provide
//!
//! * an upper bound from the index-matching correspondence on equal-size spaces,
//! * the diameter lower bound `|diam X - diam Y| / 2`,
//! * an exhaustive oracle for spaces with at most five points,
//! * the Hausdorff distance between two point clouds in a common `R^d`, which
//!   bounds the GH distance between them from above.
//!
//! Pseudo-metrics (off-diagonal zeros) are accepted everywhere as is.

use ndarray::ArrayView2;
use serde::Serialize;

use crate::walks::{squared_distance, DistanceMatrix};
use crate::{Error, Result};

pub const EXACT_MAX_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhBoundReport {
    pub lower: f64,
    pub lower_method: &'static str,
    pub upper: f64,
    pub upper_method: &'static str,
    pub exact: Option<f64>,
    pub exact_method: Option<&'static str>,
}

/// `max_{i,j} |D1[i][j] - D2[i][j]| / 2`, the distortion of `{(i, i)}` halved.
pub fn correspondence_upper(d1: &DistanceMatrix, d2: &DistanceMatrix) -> Result<f64> {
    if d1.len() != d2.len() {
        return Err(Error::ShapeMismatch(format!(
            "identity correspondence needs equal sizes, got {} and {}",
            d1.len(),
            d2.len()
        )));
    }
    let worst = d1
        .entries()
        .iter()
        .zip(d2.entries())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(0.5 * worst)
}

pub fn diameter_lower(d1: &DistanceMatrix, d2: &DistanceMatrix) -> f64 {
    0.5 * (d1.diameter() - d2.diameter()).abs()
}

/// Every correspondence distorts by at most `max(diam X, diam Y)`.
fn trivial_upper(d1: &DistanceMatrix, d2: &DistanceMatrix) -> f64 {
    0.5 * d1.diameter().max(d2.diameter())
}

/// All maps `{0..from} -> {0..to}` in lexicographic order.
fn all_maps(from: usize, to: usize) -> Vec<Vec<usize>> {
    let total = to.pow(from as u32);
    (0..total)
        .map(|mut code| {
            (0..from)
                .map(|_| {
                    let v = code % to;
                    code /= to;
                    v
                })
                .collect()
        })
        .collect()
}

/// Distortion of the graph of `f: X -> Y`.
fn graph_distortion(dx: &DistanceMatrix, dy: &DistanceMatrix, f: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..f.len() {
        for j in (i + 1)..f.len() {
            worst = worst.max((dx.get(i, j) - dy.get(f[i], f[j])).abs());
        }
    }
    worst
}

/// Exact Gromov–Hausdorff distance for spaces of at most five points.
///
/// Minimises the distortion of `graph(f) ∪ graph(g)^T` over all pairs of maps
/// `f: X -> Y`, `g: Y -> X`. Every correspondence contains such a union and
/// removing pairs never increases distortion, so this minimum equals the
/// minimum over all correspondences.
pub fn exact_small(d1: &DistanceMatrix, d2: &DistanceMatrix) -> Result<f64> {
    let (nx, ny) = (d1.len(), d2.len());
    if nx.max(ny) > EXACT_MAX_POINTS {
        return Err(Error::ExactTooLarge(nx.max(ny)));
    }
    let mut fs: Vec<(f64, Vec<usize>)> = all_maps(nx, ny)
        .into_iter()
        .map(|f| (graph_distortion(d1, d2, &f), f))
        .collect();
    let mut gs: Vec<(f64, Vec<usize>)> = all_maps(ny, nx)
        .into_iter()
        .map(|g| (graph_distortion(d2, d1, &g), g))
        .collect();
    // Stable sorts keep the enumeration order among ties.
    fs.sort_by(|a, b| a.0.total_cmp(&b.0));
    gs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best = f64::INFINITY;
    for (df, f) in &fs {
        if *df >= best {
            break;
        }
        'g: for (dg, g) in &gs {
            let mut worst = df.max(*dg);
            if worst >= best {
                break;
            }
            // cross pairs (x, f(x)) and (g(y), y)
            for (x, &fx) in f.iter().enumerate() {
                for (y, &gy) in g.iter().enumerate() {
                    worst = worst.max((d1.get(x, gy) - d2.get(fx, y)).abs());
                    if worst >= best {
                        continue 'g;
                    }
                }
            }
            best = worst;
        }
    }
    Ok(0.5 * best)
}

/// Bounds for a pair of spaces; the identity-correspondence bound is used for
/// equal sizes and the half maximal diameter otherwise.
pub fn gh_bounds(d1: &DistanceMatrix, d2: &DistanceMatrix, exact: bool) -> Result<GhBoundReport> {
    let exact = if exact {
        Some(exact_small(d1, d2)?)
    } else {
        None
    };
    let (upper, upper_method) = if d1.len() == d2.len() {
        let c = correspondence_upper(d1, d2)?;
        let t = trivial_upper(d1, d2);
        if c <= t {
            (c, "identity-correspondence")
        } else {
            (t, "half-max-diameter")
        }
    } else {
        (trivial_upper(d1, d2), "half-max-diameter")
    };
    Ok(GhBoundReport {
        lower: diameter_lower(d1, d2),
        lower_method: "diameter",
        upper,
        upper_method,
        exact,
        exact_method: exact.map(|_| "exhaustive-map-pairs"),
    })
}

/// Squared distance with early exit: returns a value `>= bound` as soon as the
/// partial sum reaches it. When it returns a value below `bound`, the value is
/// bit-identical to [`squared_distance`].
fn squared_distance_bounded(a: &[f64], b: &[f64], bound: f64) -> f64 {
    const STRIDE: usize = 64;
    if a.len() <= STRIDE {
        return squared_distance(a, b);
    }
    let mut acc = [0.0f64; 4];
    let full = a.len() / 4 * 4;
    let mut c = 0;
    while c < full {
        let stop = (c + STRIDE).min(full);
        while c < stop {
            for l in 0..4 {
                let t = a[c + l] - b[c + l];
                acc[l] += t * t;
            }
            c += 4;
        }
        let partial = (acc[0] + acc[1]) + (acc[2] + acc[3]);
        if partial >= bound {
            return partial;
        }
    }
    let mut tail = 0.0;
    for k in full..a.len() {
        let t = a[k] - b[k];
        tail += t * t;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Indices `start, start+1, start-1, start+2, …` clipped to `0..len`.
fn outward(start: usize, len: usize) -> impl Iterator<Item = usize> {
    (1..len).flat_map(move |r| {
        let up = start.checked_add(r).filter(|&j| j < len);
        let down = start.checked_sub(r);
        up.into_iter().chain(down)
    })
}

/// `max_{a} min_{b} |a - b|^2`, exact.
///
/// Rows are visited in decreasing order of their distance to the
/// index-aligned row of `b`; each row's scan starts at that aligned row and
/// stops once the row can no longer raise the running maximum.
fn directed_sq(a: &[&[f64]], b: &[&[f64]]) -> f64 {
    let (na, nb) = (a.len(), b.len());
    let aligned = |i: usize| if na == 1 { 0 } else { i * (nb - 1) / (na - 1) };
    let paired: Vec<f64> = (0..na)
        .map(|i| squared_distance(a[i], b[aligned(i)]))
        .collect();
    let mut order: Vec<usize> = (0..na).collect();
    order.sort_by(|&i, &j| paired[j].total_cmp(&paired[i]));

    let mut cmax = 0.0f64;
    for i in order {
        if paired[i] <= cmax {
            continue;
        }
        let start = aligned(i);
        let mut cmin = paired[i];
        for j in outward(start, nb) {
            let d = squared_distance_bounded(a[i], b[j], cmin);
            if d < cmin {
                cmin = d;
                if cmin <= cmax {
                    break;
                }
            }
        }
        cmax = cmax.max(cmin);
    }
    cmax
}

/// Hausdorff distance between two finite clouds in the same `R^d`.
pub fn hausdorff_between_clouds(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<f64> {
    if a.ncols() != b.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "clouds live in R^{} and R^{}",
            a.ncols(),
            b.ncols()
        )));
    }
    if a.nrows() == 0 || b.nrows() == 0 {
        return Err(Error::InvalidArgument("empty cloud".into()));
    }
    let a = a.as_standard_layout();
    let b = b.as_standard_layout();
    let rows_a: Vec<&[f64]> = a.rows().into_iter().map(|r| r.to_slice().unwrap()).collect();
    let rows_b: Vec<&[f64]> = b.rows().into_iter().map(|r| r.to_slice().unwrap()).collect();
    Ok(directed_sq(&rows_a, &rows_b)
        .max(directed_sq(&rows_b, &rows_a))
        .sqrt())
}
