//! Run configuration: JSON file, then command-line overrides.

use std::path::{Path, PathBuf};

use cdfuse::bayes::{McmcConfig, TrialData};
use cdfuse::datasets::MIGRAINE_TRIAL;
use cdfuse::diagnostics::ModeRule;
use cdfuse::elicit::{default_edges, validate_edges, HierVarMethod, MomentTargets, SdRule};
use cdfuse::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PriorChoice {
    IndepBeta,
    HierBeta,
    Bibeta,
    HierBibeta,
    CdHist,
    CdNormal,
}

impl PriorChoice {
    pub fn name(self) -> &'static str {
        match self {
            PriorChoice::IndepBeta => "indep-beta",
            PriorChoice::HierBeta => "hier-beta",
            PriorChoice::Bibeta => "bibeta",
            PriorChoice::HierBibeta => "hier-bibeta",
            PriorChoice::CdHist => "cd-hist",
            PriorChoice::CdNormal => "cd-normal",
        }
    }

    pub fn is_cd(self) -> bool {
        matches!(self, PriorChoice::CdHist | PriorChoice::CdNormal)
    }

    pub fn is_hierarchical(self) -> bool {
        matches!(self, PriorChoice::HierBeta | PriorChoice::HierBibeta)
    }

    /// Families whose arm variances need σ0.
    pub fn needs_sigma0(self) -> bool {
        matches!(self, PriorChoice::IndepBeta | PriorChoice::HierBeta)
    }

    pub fn n_hyper(self) -> usize {
        match self {
            PriorChoice::IndepBeta | PriorChoice::HierBeta => 4,
            PriorChoice::Bibeta | PriorChoice::HierBibeta => 3,
            _ => 0,
        }
    }
}

/// How the Bayesian posterior of δ is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PosteriorMethod {
    /// Grid integration when the prior has a closed-form density, MCMC otherwise.
    #[default]
    Auto,
    Grid,
    Mcmc,
}

/// Trial CD entering a CD combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialCdKind {
    /// Wald for the normal prior (closed-form combination), profile likelihood otherwise.
    #[default]
    Auto,
    Profile,
    Wald,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Survey CSV; the built-in migraine survey when absent.
    pub survey: Option<PathBuf>,
    pub trial: TrialData,
    pub prior: PriorChoice,
    pub mu0: Option<f64>,
    pub sigma0: Option<f64>,
    /// Full moment targets, used instead of survey moments plus mu0/sigma0.
    pub targets: Option<MomentTargets>,
    /// Skip the fit and use these hyperparameters.
    pub hyperparameters: Option<Vec<f64>>,
    pub bin_edges: Vec<f64>,
    pub sd_rule: SdRule,
    pub trial_cd: TrialCdKind,
    pub posterior: PosteriorMethod,
    /// Its `seed` is replaced by the top-level one.
    pub mcmc: McmcConfig,
    pub mode_rule: ModeRule,
    pub hier_var: HierVarMethod,
    /// Odd number of δ grid points for Bayesian marginals.
    pub resolution: usize,
    /// Prior draws for the δ marginal of a hierarchical prior.
    pub prior_draws: usize,
    /// Directions in the directional scan; 0 skips it.
    pub scan_angles: usize,
    /// Joint-density contour levels to export; empty skips it.
    pub contour_levels: Vec<f64>,
    pub seed: u64,
    /// Left out of run.json so identical runs into different directories match.
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            survey: None,
            trial: MIGRAINE_TRIAL,
            prior: PriorChoice::CdNormal,
            mu0: None,
            sigma0: None,
            targets: None,
            hyperparameters: None,
            bin_edges: default_edges(),
            sd_rule: SdRule::WithinBin,
            trial_cd: TrialCdKind::Auto,
            posterior: PosteriorMethod::Auto,
            mcmc: McmcConfig::default(),
            mode_rule: ModeRule::Kde,
            hier_var: HierVarMethod::default(),
            resolution: 2001,
            prior_draws: 200_000,
            scan_angles: 0,
            contour_levels: vec![],
            seed: 1,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("config: {e}")))
    }

    /// The MCMC settings with the run seed applied.
    pub fn mcmc(&self) -> McmcConfig {
        McmcConfig { seed: self.seed, ..self.mcmc }
    }

    pub fn uses_mcmc(&self) -> bool {
        !self.prior.is_cd()
            && match self.posterior {
                PosteriorMethod::Mcmc => true,
                PosteriorMethod::Grid => false,
                PosteriorMethod::Auto => self.prior.is_hierarchical(),
            }
    }

    pub fn validate(&self) -> Result<()> {
        self.trial.validate()?;
        validate_edges(&self.bin_edges)?;
        if let Some(p) = &self.survey {
            if !p.is_file() {
                return Err(Error::Validation(format!("survey file {} does not exist", p.display())));
            }
        }
        if self.resolution < 3 || self.resolution % 2 == 0 {
            return Err(Error::Validation(format!("resolution must be odd and >= 3, got {}", self.resolution)));
        }
        if self.prior.is_cd() {
            return Ok(());
        }
        self.mcmc().validate()?;
        if self.prior_draws < 2 {
            return Err(Error::Validation("prior_draws must be at least 2".into()));
        }
        if self.prior.is_hierarchical() && self.posterior == PosteriorMethod::Grid {
            return Err(Error::Validation(format!(
                "{} prior has no closed-form joint density; use posterior \"mcmc\" or \"auto\"",
                self.prior.name()
            )));
        }
        if (self.scan_angles > 0 || !self.contour_levels.is_empty()) && self.prior.is_hierarchical() {
            return Err(Error::Validation("directional scans and contours need a non-hierarchical prior".into()));
        }
        if let Some(h) = &self.hyperparameters {
            if h.len() != self.prior.n_hyper() {
                return Err(Error::Validation(format!(
                    "{} prior takes {} hyperparameters, got {}",
                    self.prior.name(),
                    self.prior.n_hyper(),
                    h.len()
                )));
            }
            return Ok(());
        }
        if self.targets.is_none() {
            if self.mu0.is_none() {
                return Err(Error::Validation(format!("{} prior requires mu0 (--mu0)", self.prior.name())));
            }
            if self.prior.needs_sigma0() && self.sigma0.is_none() {
                return Err(Error::Validation(format!("{} prior requires sigma0 (--sigma0)", self.prior.name())));
            }
        }
        Ok(())
    }
}

/// Parses "n0,s0,n1,s1".
pub fn parse_trial(s: &str) -> Result<TrialData> {
    let v: Vec<u64> = s
        .split(',')
        .map(|t| t.trim().parse::<u64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Validation(format!("--trial expects n0,s0,n1,s1 as integers, got {s:?}")))?;
    if v.len() != 4 {
        return Err(Error::Validation(format!("--trial expects four counts, got {}", v.len())));
    }
    TrialData::new(v[0], v[1], v[2], v[3])
}
