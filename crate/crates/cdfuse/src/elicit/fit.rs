//! Method-of-moments fits for the four prior families and the two
//! smooth approximations (normal, shifted log-normal) of a pooled histogram.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::prior::{MomentTargets, PriorFamily, PriorSpec};
use super::PooledHistogram;
use crate::error::{Error, Result};
use crate::par::{self, ExecMode};
use crate::quad;
use crate::roots::{solve_positive, SolveOptions};
use crate::specfun::{ln_gamma, norm_cdf, norm_ppf, BibetaParams};

pub fn fit_indep_beta(t: &MomentTargets) -> Result<PriorSpec> {
    let (v0, v1) = t.arm_variances("indep-beta")?;
    let arm = |mu: f64, v: f64, which: &str| -> Result<(f64, f64)> {
        let cap = mu * (1.0 - mu);
        if !(v < cap) {
            return Err(Error::Fit {
                family: "indep-beta",
                message: format!("{which} variance {v:.6} must be below mu(1-mu) = {cap:.6}"),
                residuals: vec![],
            });
        }
        let s = cap / v - 1.0;
        Ok((mu * s, (1.0 - mu) * s))
    };
    let (q0, r0) = arm(t.mu0, v0, "p0")?;
    let (q1, r1) = arm(t.mu1(), v1, "p1")?;
    let mut spec = PriorSpec::indep_beta(q0, r0, q1, r1)?;
    spec.targets = Some(*t);
    Ok(spec)
}

/// E[1/(1+η)] for η ~ Gamma(n).
fn inv_one_plus_gamma(n: f64) -> Result<f64> {
    let lg = ln_gamma(n);
    let f = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        ((n - 1.0) * x.ln() - x - lg).exp() / (1.0 + x)
    };
    // the mass sits within a few dozen sd of the mode; split there so the
    // adaptive rule cannot step over a narrow peak
    let mode = (n - 1.0).max(0.0);
    let spread = 40.0 * n.sqrt() + 40.0;
    let lo = (mode - spread).max(0.0);
    let hi = mode + spread;
    let a = quad::integrate(f, lo, mode, 1e-16, 1e-13)?;
    let b = quad::integrate(f, mode, hi, 1e-16, 1e-13)?;
    Ok(a.value + b.value)
}

/// Mean and variance of p when p ~ Beta(q, r), q ~ Gamma(alpha), r ~ Gamma(beta):
/// var p = αβ/((α+β)(α+β+1)) · [E{1/(1+η)} + 1/(α+β)], η ~ Gamma(α+β).
pub fn hier_beta_moments(alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::Domain("hierarchical beta shapes must be positive".into()));
    }
    let n = alpha + beta;
    let mean = alpha / n;
    let e = inv_one_plus_gamma(n)?;
    let var = alpha * beta / (n * (n + 1.0)) * (e + 1.0 / n);
    Ok((mean, var))
}

pub fn fit_hier_beta(t: &MomentTargets) -> Result<PriorSpec> {
    let (v0, v1) = t.arm_variances("hier-beta")?;
    let arm = |mu: f64, v: f64| -> Result<(f64, f64)> {
        let cap = mu * (1.0 - mu);
        if !(v < cap) {
            return Err(Error::Fit {
                family: "hier-beta",
                message: format!("variance {v:.6} must be below mu(1-mu) = {cap:.6}"),
                residuals: vec![],
            });
        }
        let s = 2.0 * (cap / v - 1.0).max(0.1);
        let sol = solve_positive(
            "hier-beta",
            |x| {
                let (m, var) = hier_beta_moments(x[0], x[1])?;
                Ok(vec![m - mu, var - v])
            },
            &[mu * s, (1.0 - mu) * s],
            SolveOptions::default(),
        )?;
        Ok((sol.x[0], sol.x[1]))
    };
    let (a0, b0) = arm(t.mu0, v0)?;
    let (a1, b1) = arm(t.mu1(), v1)?;
    let mut spec = PriorSpec::hier_beta(a0, b0, a1, b1)?;
    spec.targets = Some(*t);
    Ok(spec)
}

pub fn fit_bibeta(t: &MomentTargets) -> Result<PriorSpec> {
    t.check_means()?;
    let (mu0, mu1) = (t.mu0, t.mu1());
    let m2 = t.sigma_d * t.sigma_d + t.mu_d * t.mu_d;
    // start from the independent-arm guess for p1's concentration
    let s = (mu1 * (1.0 - mu1) / (t.sigma_d * t.sigma_d) - 1.0).max(0.5);
    let r0 = (1.0 - mu1) * s;
    let x0 = [mu0 / (1.0 - mu0) * r0, mu1 / (1.0 - mu1) * r0, r0];
    let sol = solve_positive(
        "bibeta",
        |x| {
            let p = BibetaParams::new(x[0], x[1], x[2])?;
            Ok(vec![p.mean_p0() - mu0, p.mean_p1() - mu1, p.delta_second_moment()? - m2])
        },
        &x0,
        SolveOptions::default(),
    )?;
    let mut spec = PriorSpec::bibeta(sol.x[0], sol.x[1], sol.x[2])?;
    spec.targets = Some(*t);
    Ok(spec)
}

/// How var(δ) is integrated over the gamma hyper-variables of the
/// hierarchical bivariate beta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum HierVarMethod {
    /// Tensor Gauss–Legendre in log(q0), log(q1), log(r).
    Quadrature { nodes: usize },
    /// Fixed-seed Monte Carlo through gamma quantiles of fixed uniforms, so
    /// the estimate is smooth in the hyperparameters.
    MonteCarlo { draws: usize, seed: u64 },
}

impl Default for HierVarMethod {
    fn default() -> Self {
        HierVarMethod::Quadrature { nodes: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierBibetaMoments {
    pub mean_delta: f64,
    pub var_delta: f64,
    /// E{var(δ | q0, q1, r)}
    pub expected_conditional_var: f64,
    /// var{E(δ | q0, q1, r)}
    pub var_conditional_mean: f64,
}

/// Nodes and normalized weights for Gamma(shape) integrated on the log scale.
fn log_gamma_rule(shape: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let lg = ln_gamma(shape);
    let logd = |y: f64| shape * y - y.exp() - lg;
    let ymode = shape.ln();
    let top = logd(ymode);
    let cut = top - 32.0;
    let find = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if logd(mid) > cut {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    let mut left = ymode - 1.0;
    while logd(left) > cut {
        left -= 2.0 * (ymode - left);
    }
    let mut right = ymode + 1.0;
    while logd(right) > cut {
        right += 2.0 * (right - ymode);
    }
    let lo = find(ymode, left);
    let hi = find(ymode, right);
    let (x, w) = quad::gauss_legendre(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let ys: Vec<f64> = x.iter().map(|t| mid + half * t).collect();
    let mut ws: Vec<f64> = ys.iter().zip(&w).map(|(y, w)| w * half * logd(*y).exp()).collect();
    let tot: f64 = ws.iter().sum();
    ws.iter_mut().for_each(|v| *v /= tot);
    (ys.iter().map(|y| y.exp()).collect(), ws)
}

/// Regularized lower incomplete gamma P(a, x). The power series is used
/// below x = 1, where the library routine underflows for small x.
pub(crate) fn gamma_lr(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return statrs::function::gamma::gamma_lr(a, x);
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= x / (a + k);
        sum += term;
        k += 1.0;
    }
    (a * x.ln() - x - ln_gamma(a + 1.0)).exp() * sum
}

/// Gamma(shape) quantile by safeguarded Newton on the regularized incomplete gamma.
pub(crate) fn gamma_quantile(u: f64, shape: f64) -> f64 {
    let z = norm_ppf(u);
    let mut x = shape * (1.0 - 1.0 / (9.0 * shape) + z / (3.0 * shape.sqrt())).powi(3);
    if !(x > 0.0) || shape < 1.0 {
        x = (u * (ln_gamma(shape + 1.0)).exp()).powf(1.0 / shape).max(1e-300);
    }
    let lg = ln_gamma(shape);
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for _ in 0..100 {
        let f = gamma_lr(shape, x) - u;
        if f > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let dens = ((shape - 1.0) * x.ln() - x - lg).exp();
        let mut nx = x - f / dens;
        if !(nx > lo && nx < hi) || !nx.is_finite() {
            nx = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(lo) + 1.0 };
        }
        if (nx - x).abs() <= 1e-14 * x {
            return nx;
        }
        x = nx;
    }
    x
}

pub fn hier_bibeta_moments(alpha0: f64, alpha1: f64, beta: f64, method: HierVarMethod) -> Result<HierBibetaMoments> {
    if !(alpha0 > 0.0 && alpha1 > 0.0 && beta > 0.0) {
        return Err(Error::Domain("hierarchical bibeta shapes must be positive".into()));
    }
    let mean_delta = alpha1 / (alpha1 + beta) - alpha0 / (alpha0 + beta);
    // per point: (E δ² | q, (E δ | q)²)
    let cond = |q0: f64, q1: f64, r: f64| -> Result<(f64, f64)> {
        let p = BibetaParams { q0, q1, r };
        let m = p.delta_mean();
        Ok((p.delta_second_moment()?, m * m))
    };
    let (e2, em2) = match method {
        HierVarMethod::Quadrature { nodes } => {
            let n = nodes.max(4);
            let (x0, w0) = log_gamma_rule(alpha0, n);
            let (x1, w1) = log_gamma_rule(alpha1, n);
            let (xr, wr) = log_gamma_rule(beta, n);
            let rows = par::try_map_indexed(n, ExecMode::Parallel, |i| -> Result<(f64, f64)> {
                let (mut a, mut b) = (0.0, 0.0);
                for j in 0..n {
                    for k in 0..n {
                        let w = w0[i] * w1[j] * wr[k];
                        let (c2, cm) = cond(x0[i], x1[j], xr[k])?;
                        a += w * c2;
                        b += w * cm;
                    }
                }
                Ok((a, b))
            })?;
            rows.iter().fold((0.0, 0.0), |acc, r| (acc.0 + r.0, acc.1 + r.1))
        }
        HierVarMethod::MonteCarlo { draws, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u: Vec<[f64; 3]> = (0..draws).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
            let vals = par::try_map_indexed(draws, ExecMode::Parallel, |i| {
                let q0 = gamma_quantile(u[i][0], alpha0);
                let q1 = gamma_quantile(u[i][1], alpha1);
                let r = gamma_quantile(u[i][2], beta);
                cond(q0, q1, r)
            })?;
            let n = draws as f64;
            vals.iter().fold((0.0, 0.0), |acc, r| (acc.0 + r.0 / n, acc.1 + r.1 / n))
        }
    };
    let var_delta = e2 - mean_delta * mean_delta;
    let var_conditional_mean = em2 - mean_delta * mean_delta;
    Ok(HierBibetaMoments {
        mean_delta,
        var_delta,
        expected_conditional_var: var_delta - var_conditional_mean,
        var_conditional_mean,
    })
}

pub fn fit_hier_bibeta(t: &MomentTargets, method: HierVarMethod) -> Result<PriorSpec> {
    t.check_means()?;
    let (mu0, mu1) = (t.mu0, t.mu1());
    let v = t.sigma_d * t.sigma_d;
    let b0 = 5.0;
    let x0 = [mu0 / (1.0 - mu0) * b0, mu1 / (1.0 - mu1) * b0, b0];
    let sol = solve_positive(
        "hier-bibeta",
        |x| {
            let m = hier_bibeta_moments(x[0], x[1], x[2], method)?;
            Ok(vec![x[0] / (x[0] + x[2]) - mu0, x[1] / (x[1] + x[2]) - mu1, m.var_delta - v])
        },
        &x0,
        SolveOptions::default(),
    )?;
    let mut spec = PriorSpec::new(PriorFamily::HierBibeta { alpha0: sol.x[0], alpha1: sol.x[1], beta: sol.x[2] })?;
    spec.targets = Some(*t);
    Ok(spec)
}

/// Mean and sd of the pooled histogram, the parameters of the normal fit.
pub fn fit_normal_prior(h: &PooledHistogram) -> (f64, f64) {
    (h.mean, h.sd)
}

/// δ − shift ~ LogNormal(mu_log, sigma_log²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedLogNormal {
    pub shift: f64,
    pub mu_log: f64,
    pub sigma_log: f64,
}

impl ShiftedLogNormal {
    pub fn pdf(&self, x: f64) -> f64 {
        let y = x - self.shift;
        if y <= 0.0 {
            return 0.0;
        }
        let z = (y.ln() - self.mu_log) / self.sigma_log;
        (-0.5 * z * z).exp() / (y * self.sigma_log * (2.0 * std::f64::consts::PI).sqrt())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let y = x - self.shift;
        if y <= 0.0 {
            return 0.0;
        }
        norm_cdf((y.ln() - self.mu_log) / self.sigma_log)
    }

    pub fn mean(&self) -> f64 {
        self.shift + (self.mu_log + 0.5 * self.sigma_log.powi(2)).exp()
    }

    pub fn sd(&self) -> f64 {
        let s2 = self.sigma_log.powi(2);
        ((s2.exp() - 1.0) * (2.0 * self.mu_log + s2).exp()).sqrt()
    }
}

/// Log-normal shifted by `c` with the histogram's mean and sd.
pub fn fit_lognormal_prior(h: &PooledHistogram, c: f64) -> Result<ShiftedLogNormal> {
    let m = h.mean - c;
    if !(m > 0.0) {
        return Err(Error::Fit {
            family: "shifted-lognormal",
            message: format!("histogram mean {} must exceed the shift {c}", h.mean),
            residuals: vec![],
        });
    }
    let s2 = (1.0 + (h.sd / m).powi(2)).ln();
    Ok(ShiftedLogNormal { shift: c, mu_log: m.ln() - 0.5 * s2, sigma_log: s2.sqrt() })
}
