//! Binomial likelihood, posteriors over (p0, p1), and the δ = p1 − p0 margin.

mod kde;
mod mcmc;

pub use kde::{kde_1d, kde_from_samples, Bandwidth};
pub use mcmc::{mh_sample, Blocking, McmcConfig, PosteriorSamples, Retention, SamplerMode};

use serde::{Deserialize, Serialize};

use crate::elicit::{PriorFamily, PriorSpec};
use crate::error::{Error, Result};
use crate::grid::{linspace, GridDensity};
use crate::par::{self, ExecMode};
use crate::quad;
use crate::specfun::{xlog1my, xlogy, BetaParams};

/// Successes s0 of n0 on control and s1 of n1 on treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialData {
    pub n0: u64,
    pub s0: u64,
    pub n1: u64,
    pub s1: u64,
}

impl TrialData {
    pub fn new(n0: u64, s0: u64, n1: u64, s1: u64) -> Result<Self> {
        let d = Self { n0, s0, n1, s1 };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 || self.n1 == 0 {
            return Err(Error::Validation("trial arms need n0, n1 >= 1".into()));
        }
        if self.s0 > self.n0 || self.s1 > self.n1 {
            return Err(Error::Validation(format!(
                "successes exceed arm size ({}/{}, {}/{})",
                self.s0, self.n0, self.s1, self.n1
            )));
        }
        Ok(())
    }

    pub fn phat0(&self) -> f64 {
        self.s0 as f64 / self.n0 as f64
    }

    pub fn phat1(&self) -> f64 {
        self.s1 as f64 / self.n1 as f64
    }

    pub fn delta_hat(&self) -> f64 {
        self.phat1() - self.phat0()
    }

    /// Arms exchanged: δ changes sign.
    pub fn swapped(&self) -> Self {
        Self { n0: self.n1, s0: self.s1, n1: self.n0, s1: self.s0 }
    }
}

/// Binomial log-likelihood without the combinatorial constant.
pub fn loglik(p0: f64, p1: f64, d: &TrialData) -> f64 {
    let (s0, f0) = (d.s0 as f64, (d.n0 - d.s0) as f64);
    let (s1, f1) = (d.s1 as f64, (d.n1 - d.s1) as f64);
    xlogy(s0, p0) + xlog1my(f0, p0) + xlogy(s1, p1) + xlog1my(f1, p1)
}

/// Maximizer over p0 of loglik(p0, p0 + δ) on the feasible interval.
pub fn profile_p0(delta: f64, d: &TrialData) -> Result<f64> {
    if !(delta > -1.0 && delta < 1.0) {
        return Err(Error::Domain(format!("profile likelihood needs delta in (-1, 1), got {delta}")));
    }
    let lo = (-delta).max(0.0);
    let hi = (1.0 - delta).min(1.0);
    let (s0, f0) = (d.s0 as f64, (d.n0 - d.s0) as f64);
    let (s1, f1) = (d.s1 as f64, (d.n1 - d.s1) as f64);
    // strictly decreasing in p0
    let score = |p: f64| {
        let mut g = 0.0;
        if s0 > 0.0 {
            g += s0 / p;
        }
        if f0 > 0.0 {
            g -= f0 / (1.0 - p);
        }
        if s1 > 0.0 {
            g += s1 / (p + delta);
        }
        if f1 > 0.0 {
            g -= f1 / (1.0 - p - delta);
        }
        g
    };
    let (mut a, mut b) = (lo, hi);
    let eps = 1e-15;
    if score(a + eps * (b - a)) <= 0.0 {
        return Ok(a);
    }
    if score(b - eps * (b - a)) >= 0.0 {
        return Ok(b);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let g = score(m);
        if g == 0.0 {
            return Ok(m);
        }
        if g > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// ℓ_prof(δ) = max over p0 of loglik(p0, p0 + δ).
pub fn profile_loglik(delta: f64, d: &TrialData) -> Result<f64> {
    let p = profile_p0(delta, d)?;
    Ok(loglik(p, p + delta, d))
}

/// Conjugate update of an independent-beta prior.
pub fn exact_indep_beta_posterior(prior: &PriorSpec, d: &TrialData) -> Result<(BetaParams, BetaParams)> {
    match prior.family {
        PriorFamily::IndepBeta { q0, r0, q1, r1 } => Ok((
            BetaParams::new(d.s0 as f64 + q0, (d.n0 - d.s0) as f64 + r0)?,
            BetaParams::new(d.s1 as f64 + q1, (d.n1 - d.s1) as f64 + r1)?,
        )),
        _ => Err(Error::Usage(format!(
            "exact posterior is available only for indep-beta priors, not {}",
            prior.name()
        ))),
    }
}

/// A (possibly unnormalized) log-density on the unit square.
pub trait JointDensity: Sync {
    fn log_density(&self, p0: f64, p1: f64) -> f64;
}

impl<F: Fn(f64, f64) -> f64 + Sync> JointDensity for F {
    fn log_density(&self, p0: f64, p1: f64) -> f64 {
        self(p0, p1)
    }
}

/// Joint prior with a closed form (independent beta or bivariate beta).
pub struct PriorJoint<'a>(pub &'a PriorSpec);

impl JointDensity for PriorJoint<'_> {
    fn log_density(&self, p0: f64, p1: f64) -> f64 {
        self.0.joint_logpdf(p0, p1).unwrap_or(f64::NAN)
    }
}

pub struct LikelihoodJoint(pub TrialData);

impl JointDensity for LikelihoodJoint {
    fn log_density(&self, p0: f64, p1: f64) -> f64 {
        loglik(p0, p1, &self.0)
    }
}

/// Prior × likelihood for a closed-form prior.
pub struct PosteriorJoint<'a> {
    pub prior: &'a PriorSpec,
    pub data: TrialData,
}

impl JointDensity for PosteriorJoint<'_> {
    fn log_density(&self, p0: f64, p1: f64) -> f64 {
        self.prior.joint_logpdf(p0, p1).unwrap_or(f64::NAN) + loglik(p0, p1, &self.data)
    }
}

/// Largest log-density over a coarse interior grid; used to scale exp().
pub(crate) fn log_scale<J: JointDensity + ?Sized>(joint: &J) -> f64 {
    let n = 200;
    let mut m = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            let v = joint.log_density((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
            if v.is_finite() && v > m {
                m = v;
            }
        }
    }
    m
}

/// Density of δ = p1 − p0 on a uniform grid over [−1, 1]:
/// f(δ) = ∫ f(p0, p0 + δ) dp0 over (max(0, −δ), min(1, 1 − δ)).
pub fn marginalize_delta<J: JointDensity + ?Sized>(joint: &J, resolution: usize) -> Result<GridDensity> {
    marginalize_delta_with(joint, resolution, ExecMode::Parallel)
}

pub fn marginalize_delta_with<J: JointDensity + ?Sized>(
    joint: &J,
    resolution: usize,
    exec: ExecMode,
) -> Result<GridDensity> {
    if resolution < 3 {
        return Err(Error::Usage("marginalize_delta needs at least 3 grid points".into()));
    }
    let m = log_scale(joint);
    if !m.is_finite() {
        return Err(Error::Numeric("joint density is not finite anywhere on the unit square".into()));
    }
    let grid = linspace(-1.0, 1.0, resolution);
    let vals = par::try_map_indexed(resolution, exec, |i| -> Result<f64> {
        let delta = grid[i];
        let lo = (-delta).max(0.0);
        let hi = (1.0 - delta).min(1.0);
        if hi - lo <= 0.0 {
            return Ok(0.0);
        }
        let q = quad::integrate(
            |p0| {
                let v = (joint.log_density(p0, p0 + delta) - m).exp();
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            lo,
            hi,
            1e-13,
            1e-9,
        )?;
        Ok(q.value.max(0.0))
    })?;
    GridDensity::new(grid, vals)?.normalize()
}
