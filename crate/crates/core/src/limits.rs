//! Limiting pseudo-metric spaces on `[0, 1]`.
//!
//! * Square-integrable increments: the bridge Wiener spiral,
//!   `d(s,t) = sqrt(u (1 - u))` with `u = |t - s|`.
//! * Heavy-tailed increments: metrics built from the subordinator
//!   `ζ_t = Σ_{x_k <= t} y_k`, where `(x_k, y_k)` are the atoms of a Poisson
//!   process with intensity `Leb × ν` and `ν(dy) = α y^{-α-1} dy`.
//!
//! Two candidate bridge metrics are offered for the subordinator and are kept
//! strictly separate: the closed form `|ζ_t - ζ_s - (t-s) ζ_1|^{1/2}`
//! ([`LimitMetricKind::SubordinatorStmt`]) and the distance induced by the
//! `ℓ²` embedding `t ↦ Σ_{x_k<=t} e_k y_k^{1/2} - t Σ_k e_k y_k^{1/2}`
//! ([`LimitMetricKind::SubordinatorEmb`]). They disagree in general.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::csv::{format_f64, parse_f64};
use crate::increments::check_alpha;
use crate::rng::{stream_rng, StreamKey};
use crate::walks::DistanceMatrix;
use crate::{Error, Result};

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {v} is outside [0,1]")))
    }
}

pub fn wiener_bridge_metric(s: f64, t: f64) -> Result<f64> {
    check_unit("s", s)?;
    check_unit("t", t)?;
    Ok(wiener_bridge_lag((t - s).abs()))
}

#[inline]
fn wiener_bridge_lag(u: f64) -> f64 {
    (u * (1.0 - u)).sqrt()
}

/// Norm of `p(t) - p(s)` for the embedded subordinator bridge, `s <= t`.
///
/// With `p(t) = Σ_{x_k<=t} e_k y_k^{1/2} - t Σ_k e_k y_k^{1/2}`, the atoms in
/// `(s, t]` contribute coordinates `(1-u) y_k^{1/2}` and all others
/// `-u y_k^{1/2}`, so with `u = t - s`, `A = ζ_t - ζ_s`, `Z = ζ_1`:
///
/// `|p(t) - p(s)|^2 = (1-u)^2 A + u^2 (Z - A)`.
#[inline]
fn embedded_lag(u: f64, inside: f64, total: f64) -> f64 {
    let outside = (total - inside).max(0.0);
    ((1.0 - u) * (1.0 - u) * inside + u * u * outside).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub y: f64,
}

/// Atoms of the Poisson process with `y > eps`, sorted by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorSample {
    alpha: f64,
    eps: f64,
    atoms: Vec<Atom>,
    /// `prefix[k] = y_0 + … + y_{k-1}` in `x` order; `prefix.last() == zeta1`.
    prefix: Vec<f64>,
}

impl SubordinatorSample {
    /// Builds a sample from explicit atoms (they are re-sorted by `x`).
    pub fn from_atoms(alpha: f64, eps: f64, mut atoms: Vec<Atom>) -> Result<Self> {
        check_alpha(alpha)?;
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        for a in &atoms {
            check_unit("atom x", a.x)?;
            if !a.y.is_finite() || a.y <= eps {
                return Err(Error::InvalidArgument(format!(
                    "atom size {} must be finite and exceed eps = {eps}",
                    a.y
                )));
            }
        }
        atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
        let mut prefix = Vec::with_capacity(atoms.len() + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for a in &atoms {
            acc += a.y;
            prefix.push(acc);
        }
        Ok(SubordinatorSample {
            alpha,
            eps,
            atoms,
            prefix,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn zeta1(&self) -> f64 {
        *self.prefix.last().expect("prefix is never empty")
    }

    /// `ζ_t = Σ_{x_k <= t} y_k`.
    pub fn zeta_at(&self, t: f64) -> Result<f64> {
        check_unit("t", t)?;
        Ok(self.zeta_unchecked(t))
    }

    fn zeta_unchecked(&self, t: f64) -> f64 {
        let idx = self.atoms.partition_point(|a| a.x <= t);
        self.prefix[idx]
    }

    /// CSV with header `x,y`, one atom per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for a in &self.atoms {
            out.push_str(&format_f64(a.x));
            out.push(',');
            out.push_str(&format_f64(a.y));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(alpha: f64, eps: f64, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some("x,y") => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected header `x,y`, found {other:?}"
                )))
            }
        }
        let mut atoms = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (x, y) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("malformed atom row `{line}`")))?;
            atoms.push(Atom {
                x: parse_f64(x)?,
                y: parse_f64(y)?,
            });
        }
        Self::from_atoms(alpha, eps, atoms)
    }
}

/// LePage-series sampler: unit-rate arrival times `Γ_1 < Γ_2 < …` (cumulative
/// sums of standard exponentials), sizes `y_k = Γ_k^{-1/α}`, stopping at the
/// first `Γ_k >= eps^{-α}`; locations `x_k` are i.i.d. uniform on `[0, 1]`.
pub fn sample_subordinator(
    alpha: f64,
    eps: f64,
    master_seed: u64,
    key: StreamKey,
) -> Result<SubordinatorSample> {
    check_alpha(alpha)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let mut rng = stream_rng(master_seed, key);
    let horizon = eps.powf(-alpha);
    let mut gamma = 0.0f64;
    let mut atoms = Vec::new();
    loop {
        let e: f64 = rng.sample(Exp1);
        gamma += e;
        if gamma >= horizon {
            break;
        }
        let y = gamma.powf(-1.0 / alpha);
        if y <= eps {
            // Γ just below the horizon can round to y == eps.
            break;
        }
        let x: f64 = rng.random();
        atoms.push(Atom { x, y });
    }
    SubordinatorSample::from_atoms(alpha, eps, atoms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitMetricKind {
    WienerBridge,
    SubordinatorPlain,
    SubordinatorStmt,
    SubordinatorEmb,
}

impl LimitMetricKind {
    pub fn name(self) -> &'static str {
        match self {
            LimitMetricKind::WienerBridge => "wiener-bridge",
            LimitMetricKind::SubordinatorPlain => "subordinator-plain",
            LimitMetricKind::SubordinatorStmt => "subordinator-stmt",
            LimitMetricKind::SubordinatorEmb => "subordinator-emb",
        }
    }

    pub fn needs_sample(self) -> bool {
        !matches!(self, LimitMetricKind::WienerBridge)
    }
}

impl fmt::Display for LimitMetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LimitMetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            LimitMetricKind::WienerBridge,
            LimitMetricKind::SubordinatorPlain,
            LimitMetricKind::SubordinatorStmt,
            LimitMetricKind::SubordinatorEmb,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown limit metric `{s}`")))
    }
}

fn require(
    kind: LimitMetricKind,
    sample: Option<&SubordinatorSample>,
) -> Result<Option<&SubordinatorSample>> {
    match (kind.needs_sample(), sample) {
        (true, None) => Err(Error::MissingSample { kind: kind.name() }),
        (true, s) => Ok(s),
        (false, _) => Ok(None),
    }
}

/// Metric value from already evaluated `ζ_s`, `ζ_t` (with `s <= t`).
fn metric_from_parts(kind: LimitMetricKind, u: f64, zs: f64, zt: f64, z1: f64) -> f64 {
    let inc = zt - zs;
    match kind {
        LimitMetricKind::WienerBridge => wiener_bridge_lag(u),
        LimitMetricKind::SubordinatorPlain => inc.abs().sqrt(),
        LimitMetricKind::SubordinatorStmt => (inc - u * z1).abs().sqrt(),
        LimitMetricKind::SubordinatorEmb => embedded_lag(u, inc, z1),
    }
}

pub fn limit_metric(
    kind: LimitMetricKind,
    sample: Option<&SubordinatorSample>,
    s: f64,
    t: f64,
) -> Result<f64> {
    check_unit("s", s)?;
    check_unit("t", t)?;
    let sample = require(kind, sample)?;
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    let (zs, zt, z1) = match sample {
        Some(p) => (p.zeta_unchecked(lo), p.zeta_unchecked(hi), p.zeta1()),
        None => (0.0, 0.0, 0.0),
    };
    Ok(metric_from_parts(kind, hi - lo, zs, zt, z1))
}

/// The limit metric on the grid `i/m`, `i = 0..=m`. Lags are taken as
/// `(j - i)/m` so grid comparisons line up exactly with empirical grids.
pub fn limit_distance_matrix(
    kind: LimitMetricKind,
    sample: Option<&SubordinatorSample>,
    m: usize,
) -> Result<DistanceMatrix> {
    if m == 0 {
        return Err(Error::InvalidArgument("grid size m must be at least 1".into()));
    }
    let sample = require(kind, sample)?;
    let mf = m as f64;
    let zeta: Vec<f64> = (0..=m)
        .map(|i| sample.map_or(0.0, |p| p.zeta_unchecked(i as f64 / mf)))
        .collect();
    let z1 = sample.map_or(0.0, SubordinatorSample::zeta1);
    let mut entries = Array2::zeros((m + 1, m + 1));
    for i in 0..=m {
        for j in (i + 1)..=m {
            let u = (j - i) as f64 / mf;
            let v = metric_from_parts(kind, u, zeta[i], zeta[j], z1);
            entries[[i, j]] = v;
            entries[[j, i]] = v;
        }
    }
    Ok(DistanceMatrix::from_trusted(entries, 1.0))
}

/// Evaluates the embedded and the closed-form subordinator bridge metrics at
/// lag `u` under the deterministic drift `ζ_t = t`. Returns
/// `(embedded, closed_form)`, which are `(sqrt(u(1-u)), 0)`.
pub fn deterministic_consistency(u: f64) -> Result<(f64, f64)> {
    check_unit("u", u)?;
    let emb = embedded_lag(u, u, 1.0);
    let stmt = (u - u * 1.0).abs().sqrt();
    Ok((emb, stmt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> SubordinatorSample {
        SubordinatorSample::from_atoms(0.5, 1e-6, vec![Atom { x: 0.3, y: 2.0 }]).unwrap()
    }

    #[test]
    fn wiener_bridge_values() {
        assert_eq!(wiener_bridge_metric(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(wiener_bridge_metric(0.0, 0.5).unwrap(), 0.5);
        assert_eq!(wiener_bridge_metric(0.3, 0.3).unwrap(), 0.0);
        assert!(wiener_bridge_metric(-0.1, 0.5).is_err());
        assert!(wiener_bridge_metric(0.1, 1.5).is_err());
    }

    #[test]
    fn zeta_step_function() {
        let p = single();
        assert_eq!(p.zeta_at(0.2).unwrap(), 0.0);
        assert_eq!(p.zeta_at(0.5).unwrap(), 2.0);
        assert_eq!(p.zeta_at(1.0).unwrap(), p.zeta1());
        let p = SubordinatorSample::from_atoms(
            0.5,
            0.1,
            vec![Atom { x: 0.7, y: 3.0 }, Atom { x: 0.2, y: 1.0 }],
        )
        .unwrap();
        assert_eq!(p.zeta_at(0.7).unwrap(), 4.0);
        assert_eq!(p.zeta_at(0.69).unwrap(), 1.0);
        let p = SubordinatorSample::from_atoms(0.5, 0.1, vec![Atom { x: 0.0, y: 1.0 }]).unwrap();
        assert_eq!(p.zeta_at(0.0).unwrap(), 1.0);
    }

    #[test]
    fn metric_examples_single_atom() {
        let p = single();
        let stmt = limit_metric(LimitMetricKind::SubordinatorStmt, Some(&p), 0.0, 0.5).unwrap();
        assert_eq!(stmt, 1.0);
        let emb = limit_metric(LimitMetricKind::SubordinatorEmb, Some(&p), 0.0, 0.5).unwrap();
        assert!((emb - 0.5f64.sqrt()).abs() < 1e-15);
        let plain = limit_metric(LimitMetricKind::SubordinatorPlain, Some(&p), 0.5, 0.0).unwrap();
        assert_eq!(plain, 2f64.sqrt());
        for kind in [
            LimitMetricKind::WienerBridge,
            LimitMetricKind::SubordinatorPlain,
            LimitMetricKind::SubordinatorStmt,
            LimitMetricKind::SubordinatorEmb,
        ] {
            assert_eq!(limit_metric(kind, Some(&p), 0.4, 0.4).unwrap(), 0.0);
            let a = limit_metric(kind, Some(&p), 0.1, 0.8).unwrap();
            let b = limit_metric(kind, Some(&p), 0.8, 0.1).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn missing_sample_is_an_error() {
        assert!(matches!(
            limit_metric(LimitMetricKind::SubordinatorEmb, None, 0.0, 0.5),
            Err(Error::MissingSample { .. })
        ));
        assert!(limit_distance_matrix(LimitMetricKind::SubordinatorStmt, None, 4).is_err());
        assert!(limit_metric(LimitMetricKind::WienerBridge, None, 0.0, 0.5).is_ok());
    }

    #[test]
    fn grid_matrices() {
        let w = limit_distance_matrix(LimitMetricKind::WienerBridge, None, 2).unwrap();
        assert_eq!(
            w.entries(),
            &ndarray::array![[0.0, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.0]]
        );
        let p = single();
        for kind in [
            LimitMetricKind::WienerBridge,
            LimitMetricKind::SubordinatorStmt,
            LimitMetricKind::SubordinatorEmb,
        ] {
            let d = limit_distance_matrix(kind, Some(&p), 1).unwrap();
            assert_eq!(d.entries(), &Array2::<f64>::zeros((2, 2)), "{kind}");
        }
        let empty = SubordinatorSample::from_atoms(0.5, 1.0, vec![]).unwrap();
        let d = limit_distance_matrix(LimitMetricKind::SubordinatorPlain, Some(&empty), 5).unwrap();
        assert_eq!(d.diameter(), 0.0);
        assert!(limit_distance_matrix(LimitMetricKind::WienerBridge, None, 0).is_err());
    }

    #[test]
    fn consistency_probe() {
        assert_eq!(deterministic_consistency(0.5).unwrap(), (0.5, 0.0));
        assert_eq!(deterministic_consistency(0.0).unwrap(), (0.0, 0.0));
        let (emb, stmt) = deterministic_consistency(0.25).unwrap();
        assert!((emb - 0.1875f64.sqrt()).abs() < 1e-15);
        assert_eq!(stmt, 0.0);
        assert!(deterministic_consistency(1.5).is_err());
    }

    #[test]
    fn sampler_basic_properties() {
        let p = sample_subordinator(0.5, 1e-4, 1, StreamKey::new(0)).unwrap();
        assert!(p.atoms().iter().all(|a| a.y > 1e-4 && (0.0..=1.0).contains(&a.x)));
        assert!(p.atoms().windows(2).all(|w| w[0].x <= w[1].x));
        assert_eq!(p.zeta_at(1.0).unwrap(), p.zeta1());
        let q = sample_subordinator(0.5, 1e-4, 1, StreamKey::new(0)).unwrap();
        assert_eq!(p, q);
        // eps above the largest possible atom size leaves nothing.
        let big = sample_subordinator(0.5, 1e12, 1, StreamKey::new(0)).unwrap();
        assert!(big.atoms().is_empty());
        assert_eq!(big.zeta1(), 0.0);
        assert!(sample_subordinator(1.2, 1e-3, 1, StreamKey::new(0)).is_err());
        assert!(sample_subordinator(0.5, 0.0, 1, StreamKey::new(0)).is_err());
    }

    #[test]
    fn sample_csv_round_trip() {
        let p = sample_subordinator(0.6, 1e-2, 4, StreamKey::new(2)).unwrap();
        let text = p.to_csv();
        assert!(text.starts_with("x,y\n"));
        assert_eq!(SubordinatorSample::from_csv(0.6, 1e-2, &text).unwrap(), p);
        assert!(SubordinatorSample::from_csv(0.6, 1e-2, "a,b\n").is_err());
    }
}
