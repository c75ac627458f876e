//! Monte Carlo studies and their reports.
//!
//! Every study walks a schedule of `(d, n)` points and runs `trials`
//! independent trials per point. Trial `i` at point `(d, n)` draws from the
//! substream `study.child(d).child(n).child(i)`, so the output is independent of
//! the number of workers and of the order in which trials finish. Results are
//! collected in `(schedule point, trial)` order before any aggregation.
//!
//! Convergence in probability is judged through medians, 90% quantiles and
//! exceedance fractions `P̂(stat > ε)`; convergence in distribution (heavy-tailed
//! case) through two-sample Kolmogorov–Smirnov statistics of scalar
//! functionals of the scaled grid matrix.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csv::format_f64;
use crate::gh::{correspondence_upper, hausdorff_between_clouds};
use crate::increments::{Family, IncrementModel};
use crate::limits::{limit_distance_matrix, sample_subordinator, LimitMetricKind};
use crate::rng::StreamKey;
use crate::walks::{
    bridge_of, cumulate, distance_matrix, grid_indices, streamed_bridge_rows, truncated_batch,
    DistanceMatrix,
};
use crate::{Error, Result};

pub const REPORT_HEADER: &str = "study,family,alpha,d,n,m,trial,statistic,value";
pub const SUMMARY_HEADER: &str = "study,family,alpha,d,n,m,statistic,aggregate,value";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    Lemma1,
    Theorem1,
    Theorem2,
    Truncation,
    Angular,
}

impl StudyKind {
    pub const ALL: [StudyKind; 5] = [
        StudyKind::Lemma1,
        StudyKind::Theorem1,
        StudyKind::Theorem2,
        StudyKind::Truncation,
        StudyKind::Angular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Lemma1 => "lemma1",
            StudyKind::Theorem1 => "theorem1",
            StudyKind::Theorem2 => "theorem2",
            StudyKind::Truncation => "truncation",
            StudyKind::Angular => "angular",
        }
    }

    /// Root of the substream tree of this study.
    fn stream(self) -> StreamKey {
        StreamKey::new(match self {
            StudyKind::Lemma1 => 0x4c31,
            StudyKind::Theorem1 => 0x5431,
            StudyKind::Theorem2 => 0x5432,
            StudyKind::Truncation => 0x5452,
            StudyKind::Angular => 0x414e,
        })
    }

    fn needs_square_integrable(self) -> bool {
        matches!(self, StudyKind::Lemma1 | StudyKind::Theorem1)
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StudyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown study `{s}`")))
    }
}

/// Scalar summaries of a scaled grid distance matrix, compared in law against
/// the limit in the heavy-tailed study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Functional {
    /// Largest entry.
    Diameter,
    /// Entry `(0, ⌊m/2⌋)`.
    MidEntry,
    /// Entry `(⌊m/4⌋, ⌊3m/4⌋)`.
    QuartileEntry,
    /// An arbitrary entry `(i, j)`.
    Entry(usize, usize),
}

impl Functional {
    pub const DEFAULT: [Functional; 3] = [
        Functional::Diameter,
        Functional::MidEntry,
        Functional::QuartileEntry,
    ];

    pub fn label(self) -> String {
        match self {
            Functional::Diameter => "diameter".into(),
            Functional::MidEntry => "mid".into(),
            Functional::QuartileEntry => "quartile".into(),
            Functional::Entry(i, j) => format!("entry:{i}:{j}"),
        }
    }

    fn indices(self, m: usize) -> Option<(usize, usize)> {
        match self {
            Functional::Diameter => None,
            Functional::MidEntry => Some((0, m / 2)),
            Functional::QuartileEntry => Some((m / 4, 3 * m / 4)),
            Functional::Entry(i, j) => Some((i, j)),
        }
    }

    pub fn evaluate(self, d: &DistanceMatrix) -> f64 {
        match self.indices(d.len() - 1) {
            None => d.diameter(),
            Some((i, j)) => d.get(i, j),
        }
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diameter" => Ok(Functional::Diameter),
            "mid" => Ok(Functional::MidEntry),
            "quartile" => Ok(Functional::QuartileEntry),
            other => {
                let parts: Vec<&str> = other.split(':').collect();
                match parts.as_slice() {
                    ["entry", i, j] => match (i.parse(), j.parse()) {
                        (Ok(i), Ok(j)) => Ok(Functional::Entry(i, j)),
                        _ => Err(Error::Config(format!("bad functional `{other}`"))),
                    },
                    _ => Err(Error::Config(format!("unknown functional `{other}`"))),
                }
            }
        }
    }
}

impl Serialize for Functional {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for Functional {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_m() -> usize {
    20
}
fn default_trials() -> usize {
    100
}
fn default_t_list() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}
fn default_epsilon_list() -> Vec<f64> {
    vec![0.05, 0.1]
}
fn default_s_list() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3]
}
fn default_eps_subordinator() -> f64 {
    1e-6
}
fn default_functionals() -> Vec<Functional> {
    Functional::DEFAULT.to_vec()
}

/// A fully specified study. Deserialises from the JSON config format; every
/// key except `study`, `family` and `schedule` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub study: StudyKind,
    pub family: Family,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// `(d, n)` pairs.
    pub schedule: Vec<(usize, usize)>,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_t_list")]
    pub t_list: Vec<f64>,
    #[serde(default = "default_epsilon_list")]
    pub epsilon_list: Vec<f64>,
    #[serde(default = "default_s_list")]
    pub s_list: Vec<f64>,
    #[serde(default = "default_eps_subordinator")]
    pub eps_subordinator: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_functionals")]
    pub functionals: Vec<Functional>,
}

impl StudyConfig {
    /// A config with every optional field at its default.
    pub fn new(study: StudyKind, family: Family, alpha: Option<f64>, schedule: Vec<(usize, usize)>) -> Self {
        StudyConfig {
            study,
            family,
            alpha,
            schedule,
            m: default_m(),
            trials: default_trials(),
            t_list: default_t_list(),
            epsilon_list: default_epsilon_list(),
            s_list: default_s_list(),
            eps_subordinator: default_eps_subordinator(),
            seed: 0,
            functionals: default_functionals(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if self.schedule.is_empty() {
            return cfg("schedule is empty".into());
        }
        if let Some(&(d, n)) = self.schedule.iter().find(|(d, n)| *d == 0 || *n == 0) {
            return cfg(format!("schedule entry [{d}, {n}] must be positive"));
        }
        if self.trials == 0 {
            return cfg("trials must be at least 1".into());
        }
        if self.m == 0 {
            return cfg("m must be at least 1".into());
        }
        let min_n = self.schedule.iter().map(|p| p.1).min().unwrap_or(0);
        if self.m > min_n {
            return cfg(format!("m = {} exceeds the smallest n = {min_n}", self.m));
        }
        // Surfaces alpha/family mismatches with the model's own messages.
        IncrementModel::new(self.family, 1, self.alpha, self.seed)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.study.needs_square_integrable() && !self.family.is_square_integrable() {
            return cfg(format!(
                "{} study requires a square-integrable family, got {}",
                self.study, self.family
            ));
        }
        if !self.study.needs_square_integrable() && self.family.is_square_integrable() {
            return cfg(format!(
                "{} study requires the pareto-sphere family, got {}",
                self.study, self.family
            ));
        }
        if self.study == StudyKind::Lemma1 {
            if self.t_list.is_empty() {
                return cfg("t_list is empty".into());
            }
            if let Some(t) = self.t_list.iter().find(|t| !(0.0..=1.0).contains(*t)) {
                return cfg(format!("t = {t} is outside [0,1]"));
            }
        }
        if let Some(e) = self.epsilon_list.iter().find(|e| !e.is_finite() || **e < 0.0) {
            return cfg(format!("epsilon {e} must be a nonnegative number"));
        }
        if self.study == StudyKind::Truncation {
            if self.s_list.is_empty() {
                return cfg("s_list is empty".into());
            }
            if self.s_list.iter().any(|s| !s.is_finite() || *s < 0.0) {
                return cfg("s_list entries must be nonnegative numbers".into());
            }
            if self.s_list.windows(2).any(|w| w[0] < w[1]) {
                return cfg("s_list must be descending".into());
            }
        }
        if self.study == StudyKind::Angular
            && self.s_list.iter().any(|s| !s.is_finite() || *s < 0.0)
        {
            return cfg("s_list entries must be nonnegative numbers".into());
        }
        if self.study == StudyKind::Theorem2 {
            if !(self.eps_subordinator > 0.0 && self.eps_subordinator.is_finite()) {
                return cfg("eps_subordinator must be positive".into());
            }
            if self.functionals.is_empty() {
                return cfg("functionals list is empty".into());
            }
            for f in &self.functionals {
                if let Some((i, j)) = f.indices(self.m) {
                    if i > self.m || j > self.m {
                        return cfg(format!("functional {} is outside the grid 0..={}", f.label(), self.m));
                    }
                }
            }
        }
        Ok(())
    }

    fn model(&self, d: usize) -> Result<IncrementModel> {
        IncrementModel::new(self.family, d, self.alpha, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub d: usize,
    pub n: usize,
    pub trial: usize,
    pub statistic: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Exact two-sample Kolmogorov–Smirnov statistic `sup_x |F_xs(x) - F_ys(x)|`,
/// by a merge scan over the sorted samples.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsResult> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidArgument("KS needs two nonempty samples".into()));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("KS sample contains NaN".into()));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut sup = 0.0f64;
    while i < a.len() && j < b.len() {
        let v = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsResult {
        statistic: sup,
        n1: a.len(),
        n2: b.len(),
    })
}

/// Linear-interpolation quantile of an unsorted sample (`q` in `[0,1]`).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub enum Aggregate {
    Median,
    P90,
    /// Fraction of trials with `stat > eps`.
    Exceedance(f64),
    /// KS distance of this (empirical) statistic to the same functional of
    /// the given limit metric.
    Ks(LimitMetricKind),
    /// A structural fact recorded as a number, e.g. `conditioning_vacuous = 1`.
    Flag,
}

impl Aggregate {
    pub fn label(&self) -> String {
        match self {
            Aggregate::Median => "median".into(),
            Aggregate::P90 => "p90".into(),
            Aggregate::Exceedance(e) => format!("exceed>{e}"),
            Aggregate::Ks(kind) => format!("ks:{kind}"),
            Aggregate::Flag => "flag".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub d: usize,
    pub n: usize,
    pub statistic: String,
    pub aggregate: Aggregate,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KsEntry {
    pub d: usize,
    pub n: usize,
    pub functional: String,
    pub kind: LimitMetricKind,
    pub result: KsResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub study: StudyKind,
    pub family: Family,
    pub alpha: Option<f64>,
    pub m: usize,
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<SummaryRow>,
    pub ks: Vec<KsEntry>,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    fn prefix(&self, d: usize, n: usize) -> String {
        let alpha = self.alpha.map(format_f64).unwrap_or_default();
        format!("{},{},{},{},{},{}", self.study, self.family, alpha, d, n, self.m)
    }

    /// Per-trial CSV with header [`REPORT_HEADER`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.prefix(r.d, r.n),
                r.trial,
                r.statistic,
                format_f64(r.value)
            ));
        }
        out
    }

    /// Aggregated CSV with header [`SUMMARY_HEADER`].
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(SUMMARY_HEADER);
        out.push('\n');
        for s in &self.summaries {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.prefix(s.d, s.n),
                s.statistic,
                s.aggregate.label(),
                format_f64(s.value)
            ));
        }
        out
    }

    pub fn values(&self, d: usize, n: usize, statistic: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.d == d && r.n == n && r.statistic == statistic)
            .map(|r| r.value)
            .collect()
    }

    pub fn summary(&self, d: usize, n: usize, statistic: &str, aggregate: &Aggregate) -> Option<f64> {
        self.summaries
            .iter()
            .find(|s| s.d == d && s.n == n && s.statistic == statistic && &s.aggregate == aggregate)
            .map(|s| s.value)
    }

    pub fn median(&self, d: usize, n: usize, statistic: &str) -> Option<f64> {
        self.summary(d, n, statistic, &Aggregate::Median)
    }

    pub fn ks_entry(&self, d: usize, n: usize, functional: &str, kind: LimitMetricKind) -> Option<KsResult> {
        self.ks
            .iter()
            .find(|k| k.d == d && k.n == n && k.functional == functional && k.kind == kind)
            .map(|k| k.result)
    }

    /// Distinct statistic names in first-seen order.
    pub fn statistics(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.records {
            if !names.contains(&r.statistic) {
                names.push(r.statistic.clone());
            }
        }
        names
    }
}

/// Runs trials `0..trials` on a pool of `workers` threads and returns their
/// outputs in trial order.
fn run_trials<T, F>(workers: usize, trials: usize, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if workers <= 1 {
        return (0..trials).map(trial).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..trials).into_par_iter().map(&trial).collect())
}

/// Substream of trial `trial` at schedule point `(d, n)`.
pub fn trial_key(study: StudyKind, d: usize, n: usize, trial: usize) -> StreamKey {
    study.stream().child(d as u64).child(n as u64).child(trial as u64)
}

/// The scaled grid distance matrix that `trial` of a grid-based study sees.
pub fn trial_grid_matrix(config: &StudyConfig, d: usize, n: usize, trial: usize) -> Result<DistanceMatrix> {
    config.validate()?;
    let model = config.model(d)?;
    let idx = grid_indices(n, config.m);
    let key = trial_key(config.study, d, n, trial);
    let grid = streamed_bridge_rows(&mut model.sampler(key), n, &idx)?;
    distance_matrix(&grid, model.distance_scale(n))
}

/// Collects named per-trial statistics and summarises them per schedule point.
struct Collector<'a> {
    config: &'a StudyConfig,
    records: Vec<TrialRecord>,
    summaries: Vec<SummaryRow>,
    ks: Vec<KsEntry>,
}

impl<'a> Collector<'a> {
    fn new(config: &'a StudyConfig) -> Self {
        Collector {
            config,
            records: Vec::new(),
            summaries: Vec::new(),
            ks: Vec::new(),
        }
    }

    /// `rows[trial]` holds `(statistic, value)` pairs in a fixed order.
    fn push_point(&mut self, d: usize, n: usize, rows: Vec<Vec<(String, f64)>>, exceedance: bool) {
        let mut names: Vec<String> = Vec::new();
        for (trial, stats) in rows.into_iter().enumerate() {
            for (statistic, value) in stats {
                if !names.contains(&statistic) {
                    names.push(statistic.clone());
                }
                self.records.push(TrialRecord {
                    d,
                    n,
                    trial,
                    statistic,
                    value,
                });
            }
        }
        for name in names {
            let values: Vec<f64> = self
                .records
                .iter()
                .filter(|r| r.d == d && r.n == n && r.statistic == name)
                .map(|r| r.value)
                .collect();
            let mut push = |aggregate, value| {
                self.summaries.push(SummaryRow {
                    d,
                    n,
                    statistic: name.clone(),
                    aggregate,
                    value,
                })
            };
            push(Aggregate::Median, quantile(&values, 0.5));
            push(Aggregate::P90, quantile(&values, 0.9));
            if exceedance {
                for &eps in &self.config.epsilon_list {
                    let frac = values.iter().filter(|&&v| v > eps).count() as f64 / values.len() as f64;
                    push(Aggregate::Exceedance(eps), frac);
                }
            }
        }
    }

    fn flag(&mut self, d: usize, n: usize, statistic: &str, value: f64) {
        self.summaries.push(SummaryRow {
            d,
            n,
            statistic: statistic.into(),
            aggregate: Aggregate::Flag,
            value,
        });
    }

    fn finish(self, notes: Vec<String>) -> ConvergenceReport {
        ConvergenceReport {
            study: self.config.study,
            family: self.config.family,
            alpha: self.config.alpha,
            m: self.config.m,
            records: self.records,
            summaries: self.summaries,
            ks: self.ks,
            notes,
        }
    }
}

fn t_label(t: f64) -> String {
    format!("dev_t={t}")
}

/// `|n^{-1} |S_⌊nt⌋ - (⌊nt⌋/n) S_n|^2 - (1-t) t|` for every `t` in `t_list`.
pub fn run_lemma1_check(config: &StudyConfig, workers: usize) -> Result<ConvergenceReport> {
    expect_study(config, StudyKind::Lemma1)?;
    let mut out = Collector::new(config);
    for &(d, n) in &config.schedule {
        let model = config.model(d)?;
        let mut idx: Vec<usize> = config
            .t_list
            .iter()
            .map(|&t| ((n as f64) * t).floor() as usize)
            .collect();
        idx.sort_unstable();
        let rows = run_trials(workers, config.trials, |trial| {
            let key = trial_key(config.study, d, n, trial);
            let cloud = streamed_bridge_rows(&mut model.sampler(key), n, &idx)?;
            Ok(config
                .t_list
                .iter()
                .map(|&t| {
                    let k = ((n as f64) * t).floor() as usize;
                    let r = idx.binary_search(&k).expect("index was requested");
                    let b = cloud.points().row(r);
                    let sq: f64 = b.iter().map(|x| x * x).sum();
                    (t_label(t), (sq / n as f64 - (1.0 - t) * t).abs())
                })
                .collect())
        })?;
        out.push_point(d, n, rows, true);
    }
    Ok(out.finish(vec![]))
}

/// Sup-deviation of the scaled empirical grid matrix from the bridge Wiener
/// spiral, and the identity-correspondence GH upper bound between them.
pub fn run_theorem1_study(config: &StudyConfig, workers: usize) -> Result<ConvergenceReport> {
    expect_study(config, StudyKind::Theorem1)?;
    let limit = limit_distance_matrix(LimitMetricKind::WienerBridge, None, config.m)?;
    let mut out = Collector::new(config);
    for &(d, n) in &config.schedule {
        let model = config.model(d)?;
        let idx = grid_indices(n, config.m);
        let scale = model.distance_scale(n);
        let rows = run_trials(workers, config.trials, |trial| {
            let key = trial_key(config.study, d, n, trial);
            let grid = streamed_bridge_rows(&mut model.sampler(key), n, &idx)?;
            let emp = distance_matrix(&grid, scale)?;
            let mut sup = 0.0f64;
            for i in 0..=config.m {
                for j in i..=config.m {
                    sup = sup.max((emp.get(i, j) - limit.get(i, j)).abs());
                }
            }
            let gh = correspondence_upper(&emp, &limit)?;
            Ok(vec![("sup_dev".to_string(), sup), ("gh_upper".to_string(), gh)])
        })?;
        out.push_point(d, n, rows, true);
    }
    Ok(out.finish(vec![]))
}

/// Distributional comparison of grid functionals against the two candidate
/// subordinator limits.
pub fn run_theorem2_study(config: &StudyConfig, workers: usize) -> Result<ConvergenceReport> {
    expect_study(config, StudyKind::Theorem2)?;
    let alpha = config.alpha.ok_or(Error::AlphaMissing)?;
    let kinds = [LimitMetricKind::SubordinatorStmt, LimitMetricKind::SubordinatorEmb];
    let mut out = Collector::new(config);
    for &(d, n) in &config.schedule {
        let model = config.model(d)?;
        let idx = grid_indices(n, config.m);
        let scale = model.distance_scale(n);
        let mut rows = run_trials(workers, config.trials, |trial| {
            let key = trial_key(config.study, d, n, trial);
            let grid = streamed_bridge_rows(&mut model.sampler(key), n, &idx)?;
            let emp = distance_matrix(&grid, scale)?;
            Ok(config
                .functionals
                .iter()
                .map(|f| (format!("emp_{}", f.label()), f.evaluate(&emp)))
                .collect::<Vec<_>>())
        })?;
        for kind in kinds {
            let tag = match kind {
                LimitMetricKind::SubordinatorStmt => "stmt",
                _ => "emb",
            };
            let limit_rows = run_trials(workers, config.trials, |sample| {
                let key = config
                    .study
                    .stream()
                    .child(kind as u64 + 0x100)
                    .child(d as u64)
                    .child(n as u64)
                    .child(sample as u64);
                let atoms = sample_subordinator(alpha, config.eps_subordinator, config.seed, key)?;
                let lim = limit_distance_matrix(kind, Some(&atoms), config.m)?;
                Ok(config
                    .functionals
                    .iter()
                    .map(|f| (format!("{tag}_{}", f.label()), f.evaluate(&lim)))
                    .collect::<Vec<_>>())
            })?;
            for (row, extra) in rows.iter_mut().zip(limit_rows) {
                row.extend(extra);
            }
        }
        out.push_point(d, n, rows, false);
        for f in &config.functionals {
            let emp = out.records_for(d, n, &format!("emp_{}", f.label()));
            for kind in kinds {
                let tag = if kind == LimitMetricKind::SubordinatorStmt { "stmt" } else { "emb" };
                let lim = out.records_for(d, n, &format!("{tag}_{}", f.label()));
                let result = ks_two_sample(&emp, &lim)?;
                out.summaries.push(SummaryRow {
                    d,
                    n,
                    statistic: format!("emp_{}", f.label()),
                    aggregate: Aggregate::Ks(kind),
                    value: result.statistic,
                });
                out.ks.push(KsEntry {
                    d,
                    n,
                    functional: f.label(),
                    kind,
                    result,
                });
            }
        }
    }
    Ok(out.finish(vec![
        "functionals (diameter, entry (0,m/2), entry (m/4,3m/4) by default) are a modelling choice, not part of the limit theorem".into(),
        format!(
            "limit samples truncated at eps = {}; both subordinator-stmt and subordinator-emb are reported",
            config.eps_subordinator
        ),
    ]))
}

impl Collector<'_> {
    fn records_for(&self, d: usize, n: usize, statistic: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.d == d && r.n == n && r.statistic == statistic)
            .map(|r| r.value)
            .collect()
    }
}

fn s_label(s: f64) -> String {
    format!("dh_s={s}")
}

/// `a(n)^{-1/2} d_H(bridge of truncated increments, bridge)` for each `s`.
pub fn run_truncation_study(config: &StudyConfig, workers: usize) -> Result<ConvergenceReport> {
    expect_study(config, StudyKind::Truncation)?;
    let mut out = Collector::new(config);
    for &(d, n) in &config.schedule {
        let model = config.model(d)?;
        let scaling = model.scaling(n);
        let scale = model.distance_scale(n);
        let rows = run_trials(workers, config.trials, |trial| {
            let key = trial_key(config.study, d, n, trial);
            let batch = model.sample_increments(n, key);
            let full = bridge_of(&cumulate(&batch))?;
            config
                .s_list
                .iter()
                .map(|&s| {
                    let cut = truncated_batch(&batch, s * scaling);
                    let dh = if cut == batch {
                        0.0
                    } else {
                        let trunc = bridge_of(&cumulate(&cut))?;
                        scale * hausdorff_between_clouds(trunc.view(), full.view())?
                    };
                    Ok((s_label(s), dh))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        out.push_point(d, n, rows, true);
    }
    Ok(out.finish(vec![]))
}

/// `|<Θ_1, Θ_2>|` for pairs of independent increments.
///
/// For the pareto-sphere family the direction is independent of the radius,
/// so conditioning on `|X_i|^2 >= s a(n)` does not change the law of the
/// pair; the report records this as `conditioning_vacuous = 1`.
pub fn run_angular_check(config: &StudyConfig, workers: usize) -> Result<ConvergenceReport> {
    expect_study(config, StudyKind::Angular)?;
    let mut out = Collector::new(config);
    for &(d, n) in &config.schedule {
        let model = config.model(d)?;
        let rows = run_trials(workers, config.trials, |trial| {
            let key = trial_key(config.study, d, n, trial);
            let pair = model.sample_increments(2, key);
            let mut rows = pair.rows();
            let (a, b) = (rows.next().unwrap(), rows.next().unwrap());
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            let inner: f64 = a.iter().zip(b).map(|(x, y)| (x / na) * (y / nb)).sum();
            Ok(vec![("abs_inner".to_string(), inner.abs().min(1.0))])
        })?;
        out.push_point(d, n, rows, true);
        out.flag(d, n, "conditioning_vacuous", 1.0);
    }
    Ok(out.finish(vec![
        "angular part is independent of the radius for pareto-sphere increments; conditioning on large norms is vacuous".into(),
    ]))
}

fn expect_study(config: &StudyConfig, kind: StudyKind) -> Result<()> {
    if config.study != kind {
        return Err(Error::Config(format!(
            "config describes a {} study, not {kind}",
            config.study
        )));
    }
    config.validate()
}

/// Dispatches on `config.study`.
pub fn run_study(config: &StudyConfig, workers: usize) -> Result<ConvergenceReport> {
    match config.study {
        StudyKind::Lemma1 => run_lemma1_check(config, workers),
        StudyKind::Theorem1 => run_theorem1_study(config, workers),
        StudyKind::Theorem2 => run_theorem2_study(config, workers),
        StudyKind::Truncation => run_truncation_study(config, workers),
        StudyKind::Angular => run_angular_check(config, workers),
    }
}
