//! Increment laws for the random walks.
//!
//! Two square-integrable families (isotropic Gaussian and Rademacher, both
//! normalised so that `E|X|^2 = 1` with coordinate variance `1/d`) and one
//! heavy-tailed family, `X = R^{1/2} Θ`, where `R` is Pareto with
//! `P(R > x) = x^{-α}` on `[1, ∞)` and `Θ` is uniform on the unit sphere.
//!
//! For the heavy-tailed family the scaling sequence is the pure power
//! `a(n) = n^{1/α}`, so that `n P(|X|^2 > x a(n)) = x^{-α}` holds exactly
//! whenever `x a(n) >= 1`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::{stream_rng, StreamKey, StreamRng};
use crate::walks::IncrementBatch;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    GaussianIsotropic,
    Rademacher,
    ParetoSphere,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::GaussianIsotropic => "gaussian-isotropic",
            Family::Rademacher => "rademacher",
            Family::ParetoSphere => "pareto-sphere",
        }
    }

    pub fn is_square_integrable(self) -> bool {
        !matches!(self, Family::ParetoSphere)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-isotropic" => Ok(Family::GaussianIsotropic),
            "rademacher" => Ok(Family::Rademacher),
            "pareto-sphere" => Ok(Family::ParetoSphere),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// The pure-power Lévy measure `ν(dx) = α x^{-α-1} dx` on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyMeasure {
    alpha: f64,
}

impl LevyMeasure {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(LevyMeasure {
            alpha: check_alpha(alpha)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.alpha * x.powf(-self.alpha - 1.0)
        }
    }

    /// `ν((s, ∞)) = s^{-α}`.
    pub fn tail(&self, s: f64) -> f64 {
        s.powf(-self.alpha)
    }

    /// The normalising sequence `a(n) = n^{1/α}`.
    pub fn scaling(&self, n: usize) -> f64 {
        (n as f64).powf(1.0 / self.alpha)
    }

    /// `∫ min(1, x) ν(dx) = α/(1-α) + 1`.
    pub fn integrability_constant(&self) -> f64 {
        self.alpha / (1.0 - self.alpha) + 1.0
    }

    /// Mean of `ν` restricted to `(0, eps]`: `∫_0^eps x ν(dx) = α/(1-α) eps^{1-α}`.
    ///
    /// This is the expected subordinator mass at time 1 that is dropped when
    /// atoms of size at most `eps` are discarded.
    pub fn small_jump_mass(&self, eps: f64) -> f64 {
        self.alpha / (1.0 - self.alpha) * eps.powf(1.0 - self.alpha)
    }

    /// Closed form of `(n/a(n)) E[|X|^2 1{|X|^2 <= s a(n)}]` for the
    /// pareto-sphere increments, namely
    /// `α/(1-α) s^{1-α} (1 - (s a(n))^{-(1-α)})^+`.
    pub fn truncated_mean(&self, s: f64, n: usize) -> f64 {
        let level = s * self.scaling(n);
        if level <= 1.0 {
            return 0.0;
        }
        let beta = 1.0 - self.alpha;
        self.alpha / beta * s.powf(beta) * (1.0 - level.powf(-beta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionDiagnostics {
    /// `max_k E X_{1,k}^2`; `None` when the second moment is infinite.
    pub max_component_second_moment: Option<f64>,
    pub is_l2: bool,
}

/// An immutable increment law in dimension `d`, plus the master seed that all
/// of its substreams derive from.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementModel {
    family: Family,
    dim: usize,
    alpha: Option<f64>,
    master_seed: u64,
}

impl IncrementModel {
    pub fn new(family: Family, dim: usize, alpha: Option<f64>, master_seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let alpha = match (family, alpha) {
            (Family::ParetoSphere, Some(a)) => Some(check_alpha(a)?),
            (Family::ParetoSphere, None) => return Err(Error::AlphaMissing),
            (_, Some(_)) => return Err(Error::AlphaNotAllowed),
            (_, None) => None,
        };
        Ok(IncrementModel {
            family,
            dim,
            alpha,
            master_seed,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn levy_measure(&self) -> Option<LevyMeasure> {
        self.alpha.map(|alpha| LevyMeasure { alpha })
    }

    /// `n` for square-integrable families, `a(n) = n^{1/α}` otherwise.
    pub fn scaling(&self, n: usize) -> f64 {
        match self.levy_measure() {
            Some(nu) => nu.scaling(n),
            None => n as f64,
        }
    }

    /// Factor applied to Euclidean distances of the bridge: `scaling(n)^{-1/2}`.
    pub fn distance_scale(&self, n: usize) -> f64 {
        if n == 1 {
            return 1.0;
        }
        self.scaling(n).sqrt().recip()
    }

    pub fn condition_diagnostics(&self) -> ConditionDiagnostics {
        if self.family.is_square_integrable() {
            ConditionDiagnostics {
                max_component_second_moment: Some(1.0 / self.dim as f64),
                is_l2: true,
            }
        } else {
            ConditionDiagnostics {
                max_component_second_moment: None,
                is_l2: false,
            }
        }
    }

    /// A row-by-row sampler over the substream `key`.
    pub fn sampler(&self, key: StreamKey) -> IncrementSampler<'_> {
        IncrementSampler {
            model: self,
            rng: stream_rng(self.master_seed, key),
            inv_sqrt_dim: (self.dim as f64).sqrt().recip(),
        }
    }

    /// Draws `count` i.i.d. increments as a `count × d` batch.
    pub fn sample_increments(&self, count: usize, key: StreamKey) -> IncrementBatch {
        let mut sampler = self.sampler(key);
        let mut data = vec![0.0; count * self.dim];
        for row in data.chunks_exact_mut(self.dim) {
            sampler.fill_row(row);
        }
        IncrementBatch::from_vec(count, self.dim, data)
            .expect("sampler produces finite rows of the right shape")
    }
}

/// Sequential access to one substream of increments.
///
/// `IncrementModel::sample_increments` is exactly `count` calls to
/// [`IncrementSampler::fill_row`], so streaming consumers see the same
/// numbers as batch consumers.
pub struct IncrementSampler<'a> {
    model: &'a IncrementModel,
    rng: StreamRng,
    inv_sqrt_dim: f64,
}

impl IncrementSampler<'_> {
    pub fn dim(&self) -> usize {
        self.model.dim
    }

    pub fn fill_row(&mut self, row: &mut [f64]) {
        debug_assert_eq!(row.len(), self.model.dim);
        match self.model.family {
            Family::GaussianIsotropic => {
                for x in row.iter_mut() {
                    let z: f64 = self.rng.sample(StandardNormal);
                    *x = z * self.inv_sqrt_dim;
                }
            }
            Family::Rademacher => {
                let h = self.inv_sqrt_dim;
                for chunk in row.chunks_mut(64) {
                    let mut bits = self.rng.next_u64();
                    for x in chunk.iter_mut() {
                        *x = if bits & 1 == 1 { h } else { -h };
                        bits >>= 1;
                    }
                }
            }
            Family::ParetoSphere => {
                let alpha = self.model.alpha.expect("validated at construction");
                let norm_sq = loop {
                    let mut acc = 0.0;
                    for x in row.iter_mut() {
                        let z: f64 = self.rng.sample(StandardNormal);
                        *x = z;
                        acc += z * z;
                    }
                    if acc > 0.0 {
                        break acc;
                    }
                };
                // U in (0, 1] so that R = U^{-1/α} is finite and >= 1.
                let u = 1.0 - self.rng.random::<f64>();
                let radius_sq = u.powf(-1.0 / alpha);
                let factor = (radius_sq / norm_sq).sqrt();
                for x in row.iter_mut() {
                    *x *= factor;
                }
            }
        }
    }
}
