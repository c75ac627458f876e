//! Study configurations shared by the pilot calibration example and the
//! acceptance suite. Changing anything here invalidates
//! `tests/fixtures/pilot.json`.

#![allow(dead_code)]

use bridgelab::harness::{StudyConfig, StudyKind};
use bridgelab::{Family, StreamKey};

pub const PILOT_SEED: u64 = 2026;
pub const SUBORDINATOR_SAMPLES: u64 = 1000;
pub const SUBORDINATOR_EPS: f64 = 1e-6;

pub fn subordinator_key(k: u64) -> StreamKey {
    StreamKey::new(0x5a).child(k)
}

pub fn theorem1() -> StudyConfig {
    let mut cfg = StudyConfig::new(
        StudyKind::Theorem1,
        Family::GaussianIsotropic,
        None,
        vec![(100, 100), (400, 400), (1600, 1600), (6400, 6400)],
    );
    cfg.m = 20;
    cfg.trials = 200;
    cfg.epsilon_list = vec![0.1];
    cfg.seed = PILOT_SEED;
    cfg
}

pub fn lemma1() -> StudyConfig {
    let mut cfg = StudyConfig::new(StudyKind::Lemma1, Family::Rademacher, None, vec![(100, 100), (1600, 1600)]);
    cfg.t_list = vec![0.5];
    cfg.trials = 200;
    cfg.seed = PILOT_SEED;
    cfg
}

pub fn theorem2() -> StudyConfig {
    let mut cfg = StudyConfig::new(StudyKind::Theorem2, Family::ParetoSphere, Some(0.5), vec![(2000, 2000)]);
    cfg.m = 20;
    cfg.trials = 300;
    cfg.eps_subordinator = SUBORDINATOR_EPS;
    cfg.seed = PILOT_SEED;
    cfg
}

pub fn truncation() -> StudyConfig {
    let mut cfg = StudyConfig::new(StudyKind::Truncation, Family::ParetoSphere, Some(0.5), vec![(2000, 2000)]);
    cfg.s_list = vec![1e-1, 1e-2, 1e-3];
    cfg.trials = 100;
    cfg.seed = PILOT_SEED;
    cfg
}

pub fn angular() -> StudyConfig {
    let mut cfg = StudyConfig::new(
        StudyKind::Angular,
        Family::ParetoSphere,
        Some(0.5),
        vec![(100, 100), (4000, 100), (10000, 100)],
    );
    cfg.trials = 1000;
    cfg.seed = PILOT_SEED;
    cfg
}
