//! The analysis behind `cdfuse analyze`: prior, likelihood and posterior (or
//! combined CD) curves for δ, their summaries, and the discrepancy verdicts.

use cdfuse::bayes::{
    marginalize_delta, mh_sample, JointDensity, LikelihoodJoint, PosteriorJoint, PriorJoint, TrialData,
};
use cdfuse::cd::{
    combine_cds, combined_normal_closed_form, prior_cd_from_histogram, prior_cd_normal, trial_cd_profile,
    trial_cd_wald, wald_se, CombinerSpec, ConfDist, CD_GRID_POINTS,
};
use cdfuse::datasets::migraine_survey;
use cdfuse::diagnostics::{
    contour_export, directional_scan, discrepancy_from_summaries, summarize, summarize_cd, summarize_draws,
    ContourSet, DiscrepancyReport, ModeRule, ScanEntry, SummaryReport,
};
use cdfuse::elicit::{
    fit_bibeta, fit_hier_beta, fit_hier_bibeta, fit_indep_beta, pool_survey, MomentTargets, PooledHistogram,
    PriorSpec, SurveyTable,
};
use cdfuse::bayes::Bandwidth;
use cdfuse::{Error, GridDensity, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{PriorChoice, RunConfig, TrialCdKind};

/// Grid size for exported joint-density contours.
pub const CONTOUR_GRID: usize = 256;

#[derive(Debug, Clone)]
pub struct Curve {
    pub name: String,
    pub cd: ConfDist,
    pub summary: SummaryReport,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub prior: PriorChoice,
    /// Prior, likelihood, then posterior or combined CD.
    pub curves: Vec<Curve>,
    pub report: DiscrepancyReport,
    pub pooled: PooledHistogram,
    pub fitted: Option<PriorSpec>,
    pub weights: Option<CombinerSpec>,
    pub mcmc_acceptance: Option<f64>,
    pub scan: Vec<ScanEntry>,
    /// (curve name, contours of its joint density)
    pub contours: Vec<(String, ContourSet)>,
}

impl Analysis {
    pub fn curve(&self, name: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.name == name)
    }
}

pub fn load_survey(cfg: &RunConfig) -> Result<SurveyTable> {
    match &cfg.survey {
        Some(p) => SurveyTable::read_csv(p, cfg.bin_edges.clone()),
        None => Ok(migraine_survey(cfg.bin_edges.clone())),
    }
}

/// Hyperparameters as given, or fitted to the moment targets.
pub fn resolve_prior(cfg: &RunConfig, h: &PooledHistogram) -> Result<PriorSpec> {
    if let Some(v) = &cfg.hyperparameters {
        return match cfg.prior {
            PriorChoice::IndepBeta => PriorSpec::indep_beta(v[0], v[1], v[2], v[3]),
            PriorChoice::HierBeta => PriorSpec::hier_beta(v[0], v[1], v[2], v[3]),
            PriorChoice::Bibeta => PriorSpec::bibeta(v[0], v[1], v[2]),
            PriorChoice::HierBibeta => PriorSpec::hier_bibeta(v[0], v[1], v[2]),
            _ => Err(Error::Usage("CD priors take no hyperparameters".into())),
        };
    }
    let t = match cfg.targets {
        Some(t) => t,
        None => MomentTargets {
            mu0: cfg.mu0.ok_or_else(|| Error::Validation(format!("{} prior requires mu0", cfg.prior.name())))?,
            sigma0: cfg.sigma0,
            mu_d: h.mean,
            sigma_d: h.sd,
        },
    };
    match cfg.prior {
        PriorChoice::IndepBeta => fit_indep_beta(&t),
        PriorChoice::HierBeta => fit_hier_beta(&t),
        PriorChoice::Bibeta => fit_bibeta(&t),
        PriorChoice::HierBibeta => fit_hier_bibeta(&t, cfg.hier_var),
        _ => Err(Error::Usage("CD priors are not fitted".into())),
    }
}

fn grid_curve(name: &str, g: GridDensity) -> Result<Curve> {
    let summary = summarize(&g)?;
    Ok(Curve { name: name.into(), cd: ConfDist::from_density(g)?, summary })
}

fn draws_curve(name: &str, deltas: &[f64], rule: ModeRule) -> Result<Curve> {
    let (summary, g) = summarize_draws(deltas, Bandwidth::Silverman, rule)?;
    Ok(Curve { name: name.into(), cd: ConfDist::from_density(g)?, summary })
}

fn cd_curve(name: &str, cd: ConfDist) -> Curve {
    let summary = summarize_cd(&cd);
    Curve { name: name.into(), cd, summary }
}

/// The normalized profile likelihood of δ, reported as the likelihood curve.
pub fn likelihood_curve(d: &TrialData) -> Result<Curve> {
    Ok(cd_curve("likelihood", trial_cd_profile(d, CD_GRID_POINTS)?))
}

pub fn analyze(cfg: &RunConfig, survey: &SurveyTable) -> Result<Analysis> {
    cfg.validate()?;
    let pooled = pool_survey(survey, cfg.sd_rule)?;
    let d = cfg.trial;
    let lik = likelihood_curve(&d)?;
    if cfg.prior.is_cd() {
        return analyze_cd(cfg, pooled, lik);
    }
    let spec = resolve_prior(cfg, &pooled)?;

    let prior = if spec.family.is_hierarchical() {
        // stream 0 of the run seed is reserved for prior draws
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(u64::MAX);
        let deltas: Vec<f64> = (0..cfg.prior_draws)
            .map(|_| {
                let (a, b) = spec.sample(&mut rng);
                b - a
            })
            .collect();
        draws_curve("prior", &deltas, cfg.mode_rule)?
    } else {
        grid_curve("prior", marginalize_delta(&PriorJoint(&spec), cfg.resolution)?)?
    };

    let mut mcmc_acceptance = None;
    let post = if cfg.uses_mcmc() {
        let s = mh_sample(&spec, &d, &cfg.mcmc())?;
        mcmc_acceptance = Some(s.acceptance_rate);
        draws_curve("posterior", &s.deltas(), cfg.mode_rule)?
    } else {
        grid_curve("posterior", marginalize_delta(&PosteriorJoint { prior: &spec, data: d }, cfg.resolution)?)?
    };

    let report = discrepancy_from_summaries(&prior.summary, &lik.summary, &post.summary);

    let mut scan = vec![];
    let mut contours = vec![];
    if cfg.scan_angles > 0 || !cfg.contour_levels.is_empty() {
        let pj = PriorJoint(&spec);
        let lj = LikelihoodJoint(d);
        let qj = PosteriorJoint { prior: &spec, data: d };
        if cfg.scan_angles > 0 {
            scan = directional_scan(&pj, &lj, &qj, cfg.scan_angles)?;
        }
        if !cfg.contour_levels.is_empty() {
            let joints: [(&str, &dyn JointDensity); 3] = [("prior", &pj), ("likelihood", &lj), ("posterior", &qj)];
            for (name, j) in joints {
                contours.push((name.to_string(), contour_export(j, &cfg.contour_levels, CONTOUR_GRID)?));
            }
        }
    }

    Ok(Analysis {
        prior: cfg.prior,
        curves: vec![prior, lik, post],
        report,
        pooled,
        fitted: Some(spec),
        weights: None,
        mcmc_acceptance,
        scan,
        contours,
    })
}

fn analyze_cd(cfg: &RunConfig, pooled: PooledHistogram, lik: Curve) -> Result<Analysis> {
    let d = cfg.trial;
    let normal = cfg.prior == PriorChoice::CdNormal;
    let prior_cd = if normal { prior_cd_normal(pooled.mean, pooled.sd)? } else { prior_cd_from_histogram(&pooled)? };
    let kind = match cfg.trial_cd {
        TrialCdKind::Auto if normal => TrialCdKind::Wald,
        TrialCdKind::Auto => TrialCdKind::Profile,
        k => k,
    };
    let weights = CombinerSpec::inverse_sd(pooled.sd, wald_se(&d)?)?;
    let combined = match kind {
        TrialCdKind::Wald if normal => combined_normal_closed_form(pooled.mean, pooled.sd, &d)?,
        TrialCdKind::Wald => combine_cds(&prior_cd, &trial_cd_wald(&d)?, weights)?,
        _ => combine_cds(&prior_cd, &lik.cd, weights)?,
    };
    let prior = cd_curve("prior_cd", prior_cd);
    let post = cd_curve("combined_cd", combined);
    let report = discrepancy_from_summaries(&prior.summary, &lik.summary, &post.summary);
    Ok(Analysis {
        prior: cfg.prior,
        curves: vec![prior, lik, post],
        report,
        pooled,
        fitted: None,
        weights: Some(weights),
        mcmc_acceptance: None,
        scan: vec![],
        contours: vec![],
    })
}
