//! Steering thresholds of isotropic and Werner states.
//!
//! The white-noise robustness α* of an assemblage is the visibility above
//! which the isotropic state can be steered with it, and the complement-noise
//! robustness β* plays the same role for the Werner state. Comparing them
//! with the thresholds reachable by all dichotomic measurements singles out
//! finite assemblages that outperform that infinite family.

use serde::Serialize;

use crate::incompat::{BoundDirection, RobustnessReport};

/// 1 − d^{−1/(d−1)}.
pub fn dichotomic_isotropic_bound(d: usize) -> f64 {
    let d = d as f64;
    1.0 - d.powf(-1.0 / (d - 1.0))
}

/// (d−1)²[1 − (1 − 1/d)^{1/(d−1)}].
pub fn dichotomic_werner_bound(d: usize) -> f64 {
    let d = d as f64;
    (d - 1.0).powi(2) * (1.0 - (1.0 - 1.0 / d).powf(1.0 / (d - 1.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DichotomicComparison {
    /// Exact threshold strictly below the dichotomic one.
    Certified,
    /// Only a heuristic bound is below the dichotomic threshold.
    Candidate,
    NotBeaten,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteeringReport {
    pub dim: usize,
    pub isotropic_threshold: f64,
    pub werner_threshold: f64,
    pub isotropic_bound: BoundDirection,
    pub werner_bound: BoundDirection,
    pub dichotomic_iso: f64,
    pub dichotomic_wer: f64,
    pub beats_dichotomic_iso: bool,
    pub beats_dichotomic_wer: bool,
    pub iso_status: DichotomicComparison,
    pub wer_status: DichotomicComparison,
}

/// (isotropic, werner) = (α*, β*).
pub fn steering_thresholds(rep: &RobustnessReport) -> (f64, f64) {
    (rep.alpha_star, rep.beta_star)
}

fn status(beats: bool, exact: bool) -> DichotomicComparison {
    match (beats, exact) {
        (false, _) => DichotomicComparison::NotBeaten,
        (true, true) => DichotomicComparison::Certified,
        (true, false) => DichotomicComparison::Candidate,
    }
}

pub fn flag_beats_dichotomic(rep: &RobustnessReport, d: usize) -> SteeringReport {
    let (iso, wer) = steering_thresholds(rep);
    let (di, dw) = (dichotomic_isotropic_bound(d), dichotomic_werner_bound(d));
    let beats_iso = iso < di;
    let beats_wer = wer < dw;
    let certified = rep.formula_certified;
    SteeringReport {
        dim: d,
        isotropic_threshold: iso,
        werner_threshold: wer,
        isotropic_bound: rep.alpha_bound,
        werner_bound: rep.beta_bound,
        dichotomic_iso: di,
        dichotomic_wer: dw,
        beats_dichotomic_iso: beats_iso,
        beats_dichotomic_wer: beats_wer,
        iso_status: status(beats_iso, certified && rep.alpha_bound == BoundDirection::Exact),
        wer_status: status(beats_wer, certified && rep.beta_bound == BoundDirection::Exact),
    }
}
