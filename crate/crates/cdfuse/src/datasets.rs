//! The migraine case study and the skewed-prior simulation scenario.

use crate::bayes::TrialData;
use crate::elicit::{MomentTargets, SurveyTable};
use crate::specfun::{BetaParams, BibetaParams};

/// Percent weights of 11 experts over 12 δ-intervals, worst to best.
pub const MIGRAINE_SURVEY: [[f64; 12]; 11] = [
    [0., 0., 5., 5., 10., 30., 30., 15., 5., 0., 0., 0.],
    [0., 0., 0., 3., 7., 20., 25., 20., 15., 7., 3., 0.],
    [0., 0., 0., 0., 10., 15., 20., 20., 20., 10., 5., 0.],
    [0., 0., 2., 3., 5., 5., 50., 20., 10., 5., 0., 0.],
    [0., 0., 0., 5., 10., 15., 15., 30., 20., 5., 0., 0.],
    [0., 0., 0., 0., 0., 10., 20., 30., 30., 10., 0., 0.],
    [0., 0., 0., 0., 5., 20., 50., 20., 5., 0., 0., 0.],
    [0., 0., 0., 0., 0., 5., 50., 40., 5., 0., 0., 0.],
    [0., 0., 0., 0., 5., 5., 20., 30., 20., 10., 10., 0.],
    [0., 0., 0., 0., 5., 15., 15., 20., 15., 15., 10., 5.],
    [0., 0., 0., 0., 0., 5., 10., 30., 25., 15., 10., 5.],
];

/// Pain relief at 2 hours: 31 of 68 on control, 33 of 59 on treatment.
pub const MIGRAINE_TRIAL: TrialData = TrialData { n0: 68, s0: 31, n1: 59, s1: 33 };

pub fn migraine_survey(bin_edges: Vec<f64>) -> SurveyTable {
    SurveyTable::new(
        (1..=MIGRAINE_SURVEY.len()).map(|i| i.to_string()).collect(),
        MIGRAINE_SURVEY.iter().map(|r| r.to_vec()).collect(),
        bin_edges,
    )
    .expect("built-in survey is valid")
}

/// Ground truth of the skewed-prior scenario.
pub const SKEWED_TRUTH: BibetaParams = BibetaParams { q0: 6.0, q1: 20.0, r: 2.0 };

/// Hyperparameters of the independent-beta prior for the skewed scenario.
pub const SKEWED_INDEP_BETA: [f64; 4] = [14.66, 4.88, 46.81, 4.68];

/// Reported hierarchical fits for the skewed scenario, kept for comparison.
pub const SKEWED_HIER_BETA: [f64; 4] = [30.19, 10.06, 96.43, 9.43];
pub const SKEWED_HIER_BIBETA: [f64; 3] = [17.88, 59.60, 5.96];

/// Moment targets of the skewed scenario: the truth's means (0.75 and
/// 10/11) with the arm variances of the independent-beta prior above.
pub fn skewed_scenario_targets() -> MomentTargets {
    let [q0, r0, q1, r1] = SKEWED_INDEP_BETA;
    let v0 = BetaParams { q: q0, r: r0 }.var();
    let v1 = BetaParams { q: q1, r: r1 }.var();
    MomentTargets {
        mu0: SKEWED_TRUTH.mean_p0(),
        sigma0: Some(v0.sqrt()),
        mu_d: SKEWED_TRUTH.delta_mean(),
        sigma_d: (v0 + v1).sqrt(),
    }
}
