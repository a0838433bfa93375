//! Synthetic expert surveys drawn from a known bivariate-beta truth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::datasets::SKEWED_TRUTH;
use crate::elicit::{validate_edges, SurveyTable, N_BINS};
use crate::error::{Error, Result};
use crate::specfun::{bibeta_sample, BibetaParams};

/// Twelve 0.05-wide bins over [−0.05, 0.55]. The survey's own range stops at
/// 0.24, which would clip about a fifth of the skewed truth.
pub const SIM_EDGES: [f64; 13] = [-0.05, 0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatientDraw {
    /// Every virtual patient is an independent (p0, p1) draw.
    #[default]
    PerPatient,
    /// One (p0, p1) per expert; the expert's patients are Bernoulli pairs and
    /// the whole row goes to the bin of the observed difference.
    PerExpert,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub truth: BibetaParams,
    pub experts: usize,
    pub patients_per_expert: u64,
    pub bin_edges: Vec<f64>,
    pub seed: u64,
    pub draw: PatientDraw,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            truth: SKEWED_TRUTH,
            experts: 11,
            patients_per_expert: 100,
            bin_edges: SIM_EDGES.to_vec(),
            seed: 1,
            draw: PatientDraw::PerPatient,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.experts == 0 || self.patients_per_expert == 0 {
            return Err(Error::Validation("experts and patients_per_expert must be >= 1".into()));
        }
        BibetaParams::new(self.truth.q0, self.truth.q1, self.truth.r)
            .map_err(|e| Error::Validation(format!("truth: {e}")))?;
        validate_edges(&self.bin_edges)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSurvey {
    pub table: SurveyTable,
    /// Draws that fell outside the edges and were put in the end bins.
    pub clamped: u64,
}

fn bin_of(edges: &[f64], x: f64) -> (usize, bool) {
    if x < edges[0] {
        return (0, true);
    }
    if x >= edges[N_BINS] {
        return (N_BINS - 1, true);
    }
    (edges.partition_point(|e| *e <= x) - 1, false)
}

/// Expert i draws from stream i of a ChaCha8 generator seeded with `cfg.seed`.
pub fn simulate_survey(cfg: &SimConfig) -> Result<SimulatedSurvey> {
    cfg.validate()?;
    let n = cfg.patients_per_expert;
    let mut rows = Vec::with_capacity(cfg.experts);
    let mut clamped = 0;
    for i in 0..cfg.experts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let mut counts = [0u64; N_BINS];
        match cfg.draw {
            PatientDraw::PerPatient => {
                for _ in 0..n {
                    let (p0, p1) = bibeta_sample(&cfg.truth, &mut rng);
                    let (k, out) = bin_of(&cfg.bin_edges, p1 - p0);
                    counts[k] += 1;
                    clamped += out as u64;
                }
            }
            PatientDraw::PerExpert => {
                let (p0, p1) = bibeta_sample(&cfg.truth, &mut rng);
                let s0 = Binomial::new(n, p0).expect("p in [0, 1]").sample(&mut rng);
                let s1 = Binomial::new(n, p1).expect("p in [0, 1]").sample(&mut rng);
                let (k, out) = bin_of(&cfg.bin_edges, (s1 as f64 - s0 as f64) / n as f64);
                counts[k] = n;
                clamped += if out { n } else { 0 };
            }
        }
        rows.push(counts.iter().map(|c| 100.0 * *c as f64 / n as f64).collect());
    }
    let ids = (1..=cfg.experts).map(|i| i.to_string()).collect();
    Ok(SimulatedSurvey { table: SurveyTable::new(ids, rows, cfg.bin_edges.clone())?, clamped })
}
