use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{bibeta_logpdf_normalized, bibeta_sample, BetaParams, BibetaParams, GammaParams};

/// Elicited moments: control-arm mean/sd and mean/sd of δ = p1 − p0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTargets {
    pub mu0: f64,
    /// Needed only by the families with separate arm variances.
    pub sigma0: Option<f64>,
    pub mu_d: f64,
    pub sigma_d: f64,
}

impl MomentTargets {
    pub fn mu1(&self) -> f64 {
        self.mu0 + self.mu_d
    }

    pub(crate) fn check_means(&self) -> Result<()> {
        if !(self.mu0 > 0.0 && self.mu0 < 1.0) {
            return Err(Error::Validation(format!("mu0 must lie in (0, 1), got {}", self.mu0)));
        }
        if !(self.mu1() > 0.0 && self.mu1() < 1.0) {
            return Err(Error::Validation(format!("mu0 + mu_d must lie in (0, 1), got {}", self.mu1())));
        }
        if !(self.sigma_d > 0.0) {
            return Err(Error::Validation("sigma_d must be positive".into()));
        }
        Ok(())
    }

    /// σ0 and var(p1) = σ_d² − σ0² for the two-arm families.
    pub(crate) fn arm_variances(&self, family: &'static str) -> Result<(f64, f64)> {
        self.check_means()?;
        let s0 = self.sigma0.ok_or_else(|| Error::Validation(format!("{family} prior requires sigma0")))?;
        if !(s0 > 0.0) {
            return Err(Error::Validation("sigma0 must be positive".into()));
        }
        let v0 = s0 * s0;
        let v1 = self.sigma_d * self.sigma_d - v0;
        if !(v1 > 0.0) {
            return Err(Error::Fit {
                family,
                message: format!(
                    "var(p1) = sigma_d^2 - sigma0^2 = {v1:.6} must be positive (sigma_d {} <= sigma0 {s0})",
                    self.sigma_d
                ),
                residuals: vec![],
            });
        }
        Ok((v0, v1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PriorFamily {
    /// p0 ~ Beta(q0, r0), p1 ~ Beta(q1, r1), independent.
    IndepBeta { q0: f64, r0: f64, q1: f64, r1: f64 },
    /// pi ~ Beta(qi, ri) with qi ~ Gamma(alpha_i), ri ~ Gamma(beta_i).
    HierBeta { alpha0: f64, beta0: f64, alpha1: f64, beta1: f64 },
    Bibeta { q0: f64, q1: f64, r: f64 },
    /// Bibeta(q0, q1, r) with q0 ~ Gamma(alpha0), q1 ~ Gamma(alpha1), r ~ Gamma(beta).
    HierBibeta { alpha0: f64, alpha1: f64, beta: f64 },
}

impl PriorFamily {
    pub fn name(&self) -> &'static str {
        match self {
            PriorFamily::IndepBeta { .. } => "indep-beta",
            PriorFamily::HierBeta { .. } => "hier-beta",
            PriorFamily::Bibeta { .. } => "bibeta",
            PriorFamily::HierBibeta { .. } => "hier-bibeta",
        }
    }

    pub fn hyperparameters(&self) -> Vec<f64> {
        match *self {
            PriorFamily::IndepBeta { q0, r0, q1, r1 } => vec![q0, r0, q1, r1],
            PriorFamily::HierBeta { alpha0, beta0, alpha1, beta1 } => vec![alpha0, beta0, alpha1, beta1],
            PriorFamily::Bibeta { q0, q1, r } => vec![q0, q1, r],
            PriorFamily::HierBibeta { alpha0, alpha1, beta } => vec![alpha0, alpha1, beta],
        }
    }

    pub fn is_hierarchical(&self) -> bool {
        matches!(self, PriorFamily::HierBeta { .. } | PriorFamily::HierBibeta { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub family: PriorFamily,
    /// Targets the hyperparameters were fitted to, when they came from a fit.
    pub targets: Option<MomentTargets>,
}

impl PriorSpec {
    pub fn new(family: PriorFamily) -> Result<Self> {
        if family.hyperparameters().iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Validation(format!("{} hyperparameters must be positive", family.name())));
        }
        Ok(Self { family, targets: None })
    }

    pub fn indep_beta(q0: f64, r0: f64, q1: f64, r1: f64) -> Result<Self> {
        Self::new(PriorFamily::IndepBeta { q0, r0, q1, r1 })
    }

    pub fn hier_beta(alpha0: f64, beta0: f64, alpha1: f64, beta1: f64) -> Result<Self> {
        Self::new(PriorFamily::HierBeta { alpha0, beta0, alpha1, beta1 })
    }

    pub fn bibeta(q0: f64, q1: f64, r: f64) -> Result<Self> {
        Self::new(PriorFamily::Bibeta { q0, q1, r })
    }

    pub fn hier_bibeta(alpha0: f64, alpha1: f64, beta: f64) -> Result<Self> {
        Self::new(PriorFamily::HierBibeta { alpha0, alpha1, beta })
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }

    /// Prior mean of (p0, p1).
    pub fn means(&self) -> (f64, f64) {
        match self.family {
            PriorFamily::IndepBeta { q0, r0, q1, r1 } => (q0 / (q0 + r0), q1 / (q1 + r1)),
            PriorFamily::HierBeta { alpha0, beta0, alpha1, beta1 } => {
                (alpha0 / (alpha0 + beta0), alpha1 / (alpha1 + beta1))
            }
            PriorFamily::Bibeta { q0, q1, r } => (q0 / (q0 + r), q1 / (q1 + r)),
            PriorFamily::HierBibeta { alpha0, alpha1, beta } => (alpha0 / (alpha0 + beta), alpha1 / (alpha1 + beta)),
        }
    }

    pub fn delta_mean(&self) -> f64 {
        let (m0, m1) = self.means();
        m1 - m0
    }

    /// Prior variance of δ, by quadrature for the hierarchical families.
    pub fn delta_var(&self) -> Result<f64> {
        match self.family {
            PriorFamily::IndepBeta { q0, r0, q1, r1 } => {
                Ok(BetaParams::new(q0, r0)?.var() + BetaParams::new(q1, r1)?.var())
            }
            PriorFamily::HierBeta { alpha0, beta0, alpha1, beta1 } => {
                let (_, v0) = super::hier_beta_moments(alpha0, beta0)?;
                let (_, v1) = super::hier_beta_moments(alpha1, beta1)?;
                Ok(v0 + v1)
            }
            PriorFamily::Bibeta { q0, q1, r } => BibetaParams::new(q0, q1, r)?.delta_var(),
            PriorFamily::HierBibeta { alpha0, alpha1, beta } => Ok(super::hier_bibeta_moments(
                alpha0,
                alpha1,
                beta,
                super::HierVarMethod::default(),
            )?
            .var_delta),
        }
    }

    /// Closed-form joint density of (p0, p1); `None` for hierarchical families.
    pub fn joint_logpdf(&self, p0: f64, p1: f64) -> Option<f64> {
        match self.family {
            PriorFamily::IndepBeta { q0, r0, q1, r1 } => {
                Some(BetaParams { q: q0, r: r0 }.logpdf(p0) + BetaParams { q: q1, r: r1 }.logpdf(p1))
            }
            PriorFamily::Bibeta { q0, q1, r } => Some(bibeta_logpdf_normalized(p0, p1, &BibetaParams { q0, q1, r })),
            _ => None,
        }
    }

    /// One exact draw of (p0, p1) from the prior.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self.family {
            PriorFamily::IndepBeta { q0, r0, q1, r1 } => {
                (BetaParams { q: q0, r: r0 }.sample(rng), BetaParams { q: q1, r: r1 }.sample(rng))
            }
            PriorFamily::HierBeta { alpha0, beta0, alpha1, beta1 } => {
                let q0 = GammaParams { shape: alpha0 }.sample(rng);
                let r0 = GammaParams { shape: beta0 }.sample(rng);
                let q1 = GammaParams { shape: alpha1 }.sample(rng);
                let r1 = GammaParams { shape: beta1 }.sample(rng);
                (BetaParams { q: q0, r: r0 }.sample(rng), BetaParams { q: q1, r: r1 }.sample(rng))
            }
            PriorFamily::Bibeta { q0, q1, r } => bibeta_sample(&BibetaParams { q0, q1, r }, rng),
            PriorFamily::HierBibeta { alpha0, alpha1, beta } => {
                let q0 = GammaParams { shape: alpha0 }.sample(rng);
                let q1 = GammaParams { shape: alpha1 }.sample(rng);
                let r = GammaParams { shape: beta }.sample(rng);
                bibeta_sample(&BibetaParams { q0, q1, r }, rng)
            }
        }
    }
}
