//! Paths, bridges and distance matrices built from increment batches.
//!
//! All point sets are row-major `(rows × d)` arrays. Summation is always
//! index-ascending so that results are bit-reproducible.

use ndarray::{Array2, ArrayView2};

use crate::increments::IncrementSampler;
use crate::{Error, Result};

/// `n` increments in dimension `d`; row `k` is `X_{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementBatch {
    data: Array2<f64>,
}

/// The walk `S_0, …, S_n` with `S_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrix {
    points: Array2<f64>,
}

/// The bridge `B_k = S_k - (k/n) S_n`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeCloud {
    points: Array2<f64>,
}

fn check_finite(data: &Array2<f64>) -> Result<()> {
    if data.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("non-finite entry".into()))
    }
}

fn row(a: &Array2<f64>, i: usize) -> &[f64] {
    a.row(i).to_slice().expect("standard layout")
}

impl IncrementBatch {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        check_finite(&data)?;
        Ok(IncrementBatch {
            data: data.as_standard_layout().into_owned(),
        })
    }

    pub fn from_vec(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        let data = Array2::from_shape_vec((n, d), data)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        Self::new(data)
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn as_slice(&self) -> &[f64] {
        self.data.as_slice().expect("standard layout")
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| row(&self.data, i))
    }
}

impl PathMatrix {
    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    /// Number of steps `n` (the matrix has `n + 1` rows).
    pub fn steps(&self) -> usize {
        self.points.nrows() - 1
    }
}

impl BridgeCloud {
    /// Wraps an arbitrary point array, e.g. one read from disk.
    pub fn from_points(points: Array2<f64>) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(Error::InvalidArgument("empty cloud".into()));
        }
        check_finite(&points)?;
        Ok(BridgeCloud {
            points: points.as_standard_layout().into_owned(),
        })
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn steps(&self) -> usize {
        self.points.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }
}

/// Prefix sums of the increments with a zero row prepended.
pub fn cumulate(batch: &IncrementBatch) -> PathMatrix {
    let (n, d) = batch.data.dim();
    let mut points = Array2::zeros((n + 1, d));
    for k in 0..n {
        let (prev, mut next) = points.multi_slice_mut((ndarray::s![k, ..], ndarray::s![k + 1, ..]));
        for ((s, p), x) in next.iter_mut().zip(prev.iter()).zip(batch.data.row(k)) {
            *s = p + x;
        }
    }
    PathMatrix { points }
}

#[inline]
fn bridge_coordinate(s_k: f64, frac: f64, s_n: f64) -> f64 {
    s_k - frac * s_n
}

pub fn bridge_of(path: &PathMatrix) -> Result<BridgeCloud> {
    let (rows, d) = path.points.dim();
    if rows < 2 {
        return Err(Error::InvalidArgument(
            "bridge needs a path with at least one step".into(),
        ));
    }
    let n = rows - 1;
    let end = path.points.row(n);
    let mut points = Array2::zeros((rows, d));
    for k in 1..n {
        let frac = k as f64 / n as f64;
        for ((b, s), e) in points.row_mut(k).iter_mut().zip(path.points.row(k)).zip(end) {
            *b = bridge_coordinate(*s, frac, *e);
        }
    }
    Ok(BridgeCloud { points })
}

/// Zeroes every increment with `|X_k|^2 < threshold`; the caller passes the
/// already scaled level `s · a(n)`.
pub fn truncated_batch(batch: &IncrementBatch, threshold: f64) -> IncrementBatch {
    let mut data = batch.data.clone();
    for mut r in data.rows_mut() {
        let norm_sq: f64 = r.iter().map(|x| x * x).sum();
        if norm_sq < threshold {
            r.fill(0.0);
        }
    }
    IncrementBatch { data }
}

/// Rows `⌊n i / m⌋`, `i = 0..=m`, of a bridge cloud.
pub fn subsample_grid(cloud: &BridgeCloud, m: usize) -> Result<BridgeCloud> {
    let n = cloud.steps();
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "grid size m = {m} must satisfy 1 <= m <= n = {n}"
        )));
    }
    let idx = grid_indices(n, m);
    Ok(BridgeCloud {
        points: cloud.points.select(ndarray::Axis(0), &idx),
    })
}

pub fn grid_indices(n: usize, m: usize) -> Vec<usize> {
    (0..=m).map(|i| n * i / m).collect()
}

/// Simulates a bridge of `n` steps from `sampler` and returns only the rows
/// at `indices` (nondecreasing, each `<= n`).
///
/// Memory is `O(|indices| · d)`. The numbers are bit-identical to
/// `bridge_of(&cumulate(&model.sample_increments(n, key)))` on the same rows.
pub fn streamed_bridge_rows(
    sampler: &mut IncrementSampler<'_>,
    n: usize,
    indices: &[usize],
) -> Result<BridgeCloud> {
    if n == 0 {
        return Err(Error::InvalidArgument("bridge needs n >= 1".into()));
    }
    if indices.windows(2).any(|w| w[0] > w[1]) || indices.last().is_some_and(|&k| k > n) {
        return Err(Error::InvalidArgument(
            "indices must be nondecreasing and at most n".into(),
        ));
    }
    let d = sampler.dim();
    let mut sum = vec![0.0; d];
    let mut step = vec![0.0; d];
    let mut captured = Array2::zeros((indices.len(), d));
    let mut next = 0;
    for k in 0..=n {
        if k > 0 {
            sampler.fill_row(&mut step);
            for (s, x) in sum.iter_mut().zip(&step) {
                *s += x;
            }
        }
        while next < indices.len() && indices[next] == k {
            captured.row_mut(next).assign(&ndarray::ArrayView1::from(&sum));
            next += 1;
        }
    }
    let mut points = Array2::zeros((indices.len(), d));
    for (r, &k) in indices.iter().enumerate() {
        if k == 0 || k == n {
            continue;
        }
        let frac = k as f64 / n as f64;
        for ((b, s), e) in points.row_mut(r).iter_mut().zip(captured.row(r)).zip(&sum) {
            *b = bridge_coordinate(*s, frac, *e);
        }
    }
    Ok(BridgeCloud { points })
}

/// A finite pseudo-metric space given by its distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    entries: Array2<f64>,
    scale_applied: f64,
}

impl DistanceMatrix {
    /// Validates symmetry, zero diagonal, finiteness and nonnegativity.
    /// The triangle inequality is not checked here, see [`Self::triangle_defect`].
    pub fn new(entries: Array2<f64>, scale_applied: f64) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c {
            return Err(Error::ShapeMismatch(format!("{r}×{c} matrix is not square")));
        }
        if r == 0 {
            return Err(Error::InvalidArgument("empty distance matrix".into()));
        }
        for i in 0..r {
            if entries[[i, i]] != 0.0 {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at {i}")));
            }
            for j in 0..r {
                let v = entries[[i, j]];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i},{j}) = {v} is not a finite nonnegative number"
                    )));
                }
                if v != entries[[j, i]] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(DistanceMatrix {
            entries: entries.as_standard_layout().into_owned(),
            scale_applied,
        })
    }

    pub(crate) fn from_trusted(entries: Array2<f64>, scale_applied: f64) -> Self {
        debug_assert!(Self::new(entries.clone(), scale_applied).is_ok());
        DistanceMatrix {
            entries,
            scale_applied,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[[i, j]]
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn scale_applied(&self) -> f64 {
        self.scale_applied
    }

    pub fn diameter(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// Largest violation `d(i,k) - d(i,j) - d(j,k)` over all triples (0 if none).
    pub fn triangle_defect(&self) -> f64 {
        let m = self.len();
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let v = self.get(i, k) - self.get(i, j) - self.get(j, k);
                    worst = worst.max(v);
                }
            }
        }
        worst
    }

    /// Row-major CSV, no header, 17 significant digits.
    pub fn to_csv(&self) -> String {
        crate::csv::format_matrix(&self.entries)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        Self::new(crate::csv::parse_matrix(text)?, 1.0)
    }
}

/// Fixed-order dot product with four independent accumulators.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `|a - b|^2` accumulated directly, same lane layout as [`dot`].
#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            let t = x[l] - y[l];
            acc[l] += t * t;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        let t = x - y;
        tail += t * t;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

const BLOCK: usize = 64;

/// Below this fraction of `|a|^2 + |b|^2` the Gram expansion has lost too many
/// digits, and the pair is recomputed directly.
const CANCELLATION_GUARD: f64 = 1e-4;

/// Euclidean distance matrix of the rows of `cloud`, multiplied by `scale`.
///
/// Uses the Gram expansion `|a-b|^2 = |a|^2 + |b|^2 - 2<a,b>` over square tiles,
/// clamps negative round-off to zero and recomputes pairs whose squared
/// distance is dominated by cancellation.
pub fn distance_matrix(cloud: &BridgeCloud, scale: f64) -> Result<DistanceMatrix> {
    distance_matrix_blocked(cloud.view(), scale, BLOCK)
}

/// [`distance_matrix`] with an explicit tile size. Every entry is computed
/// from its own pair of rows in a fixed order, so the output does not depend
/// on `block`.
pub fn distance_matrix_blocked(
    points: ArrayView2<'_, f64>,
    scale: f64,
    block: usize,
) -> Result<DistanceMatrix> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
    }
    if block == 0 {
        return Err(Error::InvalidArgument("block size must be positive".into()));
    }
    let points = points.as_standard_layout();
    let m = points.nrows();
    if m == 0 {
        return Err(Error::InvalidArgument("empty cloud".into()));
    }
    let rows: Vec<&[f64]> = (0..m)
        .map(|i| points.row(i).to_slice().expect("standard layout"))
        .collect();
    let norms: Vec<f64> = rows.iter().map(|r| dot(r, r)).collect();
    let mut entries = Array2::zeros((m, m));
    for bi in (0..m).step_by(block) {
        for bj in (bi..m).step_by(block) {
            for i in bi..(bi + block).min(m) {
                let lo = (i + 1).max(bj);
                for j in lo..(bj + block).min(m) {
                    let mut sq = norms[i] + norms[j] - 2.0 * dot(rows[i], rows[j]);
                    if sq < CANCELLATION_GUARD * (norms[i] + norms[j]) {
                        sq = squared_distance(rows[i], rows[j]);
                    }
                    let v = scale * sq.max(0.0).sqrt();
                    entries[[i, j]] = v;
                    entries[[j, i]] = v;
                }
            }
        }
    }
    Ok(DistanceMatrix::from_trusted(entries, scale))
}

/// Quantities from the expansion of `|S_i - (i/n) S_n|^2` used in the
/// square-integrable limit argument.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionDiagnostics {
    /// `T_i = Σ_{l<=i} |X_l|^2`, `i = 0..=n`.
    pub t: Vec<f64>,
    /// `Q_{1,i} = Σ_{l≠k<=i} <X_l, X_k>`, accumulated through its martingale
    /// form `Q_{1,i} = Q_{1,i-1} + 2 <X_i, S_{i-1}>`.
    pub q: Vec<f64>,
    /// `max_i |LHS_i - RHS_i| / (1 + |LHS_i|)` for the bridge identity
    /// `|S_i - (i/n)S_n|^2 = (1-i/n)|S_i|^2 + (i/n)|S_n-S_i|^2 - (i/n)(1-i/n)|S_n|^2`.
    pub identity_residual: f64,
    /// `max_i |(|S_i|^2) - T_i - Q_{1,i}| / (1 + T_i)`.
    pub tq_residual: f64,
}

pub fn decomposition_check(batch: &IncrementBatch) -> DecompositionDiagnostics {
    let path = cumulate(batch);
    let n = batch.len();
    let mut t = Vec::with_capacity(n + 1);
    let mut q = Vec::with_capacity(n + 1);
    t.push(0.0);
    q.push(0.0);
    for i in 1..=n {
        let x = row(&batch.data, i - 1);
        let prev = row(&path.points, i - 1);
        t.push(t[i - 1] + dot(x, x));
        q.push(q[i - 1] + 2.0 * dot(x, prev));
    }

    let mut tq_residual = 0.0f64;
    for i in 0..=n {
        let s = row(&path.points, i);
        let lhs = dot(s, s);
        tq_residual = tq_residual.max((lhs - t[i] - q[i]).abs() / (1.0 + t[i]));
    }

    let mut identity_residual = 0.0f64;
    if n > 0 {
        let end = row(&path.points, n);
        let end_sq = dot(end, end);
        let mut bridge = vec![0.0; batch.dim()];
        let mut rest = vec![0.0; batch.dim()];
        for i in 0..=n {
            let s = row(&path.points, i);
            let frac = i as f64 / n as f64;
            for c in 0..s.len() {
                bridge[c] = s[c] - frac * end[c];
                rest[c] = end[c] - s[c];
            }
            let lhs = dot(&bridge, &bridge);
            let rhs = (1.0 - frac) * dot(s, s) + frac * dot(&rest, &rest)
                - frac * (1.0 - frac) * end_sq;
            identity_residual = identity_residual.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
        }
    }

    DecompositionDiagnostics {
        t,
        q,
        identity_residual,
        tq_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::increments::{Family, IncrementModel};
    use crate::rng::StreamKey;
    use ndarray::array;

    fn batch(rows: Array2<f64>) -> IncrementBatch {
        IncrementBatch::new(rows).unwrap()
    }

    #[test]
    fn cumulate_examples() {
        let p = cumulate(&batch(array![[1.0], [-1.0]]));
        assert_eq!(p.points(), &array![[0.0], [1.0], [0.0]]);
        let p = cumulate(&batch(array![[1.0, 0.0], [0.0, 1.0]]));
        assert_eq!(p.points(), &array![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]);
        assert_eq!(p.steps(), 2);
    }

    #[test]
    fn bridge_examples() {
        let b = bridge_of(&cumulate(&batch(array![[1.0], [-1.0]]))).unwrap();
        assert_eq!(b.points(), &array![[0.0], [1.0], [0.0]]);
        let b = bridge_of(&cumulate(&batch(array![[1.0], [1.0]]))).unwrap();
        assert_eq!(b.points(), &array![[0.0], [0.0], [0.0]]);
    }

    #[test]
    fn bridge_rejects_single_row_path() {
        let empty = IncrementBatch::from_vec(0, 2, vec![]).unwrap();
        assert!(bridge_of(&cumulate(&empty)).is_err());
    }

    #[test]
    fn truncation_examples() {
        let b = batch(array![[3.0], [0.5]]);
        assert_eq!(truncated_batch(&b, 0.0), b);
        assert_eq!(truncated_batch(&b, 1.0).data(), &array![[3.0], [0.0]]);
        assert_eq!(
            truncated_batch(&b, f64::INFINITY).data(),
            &array![[0.0], [0.0]]
        );
    }

    #[test]
    fn subsample_examples() {
        let pts = Array2::from_shape_fn((11, 1), |(i, _)| i as f64);
        let cloud = BridgeCloud::from_points(pts).unwrap();
        let g = subsample_grid(&cloud, 2).unwrap();
        assert_eq!(g.points(), &array![[0.0], [5.0], [10.0]]);
        assert_eq!(subsample_grid(&cloud, 10).unwrap(), cloud);
        assert!(subsample_grid(&cloud, 11).is_err());
        assert!(subsample_grid(&cloud, 0).is_err());
        assert_eq!(grid_indices(7, 3), vec![0, 2, 4, 7]);
    }

    #[test]
    fn distance_matrix_examples() {
        let cloud = BridgeCloud::from_points(array![[0.0], [1.0], [0.0]]).unwrap();
        let d = distance_matrix(&cloud, 1.0).unwrap();
        assert_eq!(
            d.entries(),
            &array![[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]
        );
        let d3 = distance_matrix(&cloud, 3.0).unwrap();
        assert_eq!(d3.entries(), &(d.entries() * 3.0));
        assert!(distance_matrix(&cloud, 0.0).is_err());
        assert!(distance_matrix(&cloud, -1.0).is_err());
    }

    #[test]
    fn near_duplicate_points_do_not_produce_nan() {
        let cloud = BridgeCloud::from_points(array![[1e8, 1.0], [1e8, 1.0 + 1e-9]]).unwrap();
        let d = distance_matrix(&cloud, 1.0).unwrap();
        assert!((d.get(0, 1) - 1e-9).abs() < 1e-15);
    }

    #[test]
    fn distance_matrix_validation() {
        assert!(DistanceMatrix::new(array![[0.0, 1.0], [2.0, 0.0]], 1.0).is_err());
        assert!(DistanceMatrix::new(array![[1.0, 1.0], [1.0, 0.0]], 1.0).is_err());
        assert!(DistanceMatrix::new(array![[0.0, -1.0], [-1.0, 0.0]], 1.0).is_err());
        assert!(DistanceMatrix::new(array![[0.0, 1.0, 2.0]], 1.0).is_err());
        let d = DistanceMatrix::new(array![[0.0, 1.0, 3.0], [1.0, 0.0, 1.0], [3.0, 1.0, 0.0]], 1.0)
            .unwrap();
        assert_eq!(d.triangle_defect(), 1.0);
        assert_eq!(d.diameter(), 3.0);
    }

    #[test]
    fn decomposition_examples() {
        let diag = decomposition_check(&batch(array![[1.0], [-1.0]]));
        assert_eq!(diag.identity_residual, 0.0);
        assert_eq!(diag.t, vec![0.0, 1.0, 2.0]);
        assert_eq!(diag.q, vec![0.0, 0.0, -2.0]);
        let diag = decomposition_check(&batch(array![[1.0], [1.0]]));
        assert_eq!(diag.identity_residual, 0.0);
        // orthogonal increments: Q vanishes and |S_i|^2 = T_i
        let diag = decomposition_check(&batch(array![[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]]));
        assert!(diag.q.iter().all(|&q| q == 0.0));
        assert_eq!(diag.t, vec![0.0, 1.0, 5.0, 14.0]);
        assert_eq!(diag.tq_residual, 0.0);
    }

    #[test]
    fn streamed_rows_match_full_pipeline() {
        for (family, alpha) in [
            (Family::GaussianIsotropic, None),
            (Family::Rademacher, None),
            (Family::ParetoSphere, Some(0.4)),
        ] {
            let model = IncrementModel::new(family, 9, alpha, 17).unwrap();
            let key = StreamKey::new(3);
            let full = bridge_of(&cumulate(&model.sample_increments(37, key))).unwrap();
            let idx = grid_indices(37, 5);
            let grid = subsample_grid(&full, 5).unwrap();
            let streamed = streamed_bridge_rows(&mut model.sampler(key), 37, &idx).unwrap();
            assert_eq!(streamed, grid);
            let streamed = streamed_bridge_rows(&mut model.sampler(key), 37, &[0, 4, 4, 37]).unwrap();
            assert_eq!(streamed.points().row(1), full.points().row(4));
            assert_eq!(streamed.points().row(2), full.points().row(4));
        }
    }

    #[test]
    fn streamed_rows_reject_bad_indices() {
        let model = IncrementModel::new(Family::Rademacher, 2, None, 0).unwrap();
        assert!(streamed_bridge_rows(&mut model.sampler(StreamKey::new(0)), 4, &[3, 1]).is_err());
        assert!(streamed_bridge_rows(&mut model.sampler(StreamKey::new(0)), 4, &[5]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let cloud = BridgeCloud::from_points(array![[0.0, 0.3], [1.0 / 3.0, 0.0], [2.0, 7.0]]).unwrap();
        let d = distance_matrix(&cloud, 0.7).unwrap();
        let back = DistanceMatrix::from_csv(&d.to_csv()).unwrap();
        assert_eq!(back.entries(), d.entries());
    }
}
