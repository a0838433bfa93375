//! Random-walk Metropolis–Hastings over (p0, p1) and, for the hierarchical
//! families, the beta shape parameters as well.
//!
//! Default output keeps the final state of each of many independent chains.
//! `Adaptive` works on logit/log coordinates and tunes a diagonal proposal
//! during the first half of burn-in, then freezes it. `PaperMode` uses fixed
//! uniform windows on the untransformed parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{loglik, TrialData};
use crate::elicit::{PriorFamily, PriorSpec};
use crate::error::{Error, Result};
use crate::par::{self, ExecMode};
use crate::specfun::{bibeta_logpdf, ln_gamma, log_beta_fn, xlog1my, xlogy, BetaParams, BibetaParams, GammaParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerMode {
    #[default]
    Adaptive,
    PaperMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Retention {
    /// One draw per chain: its state at the end of burn-in.
    #[default]
    PerChain,
    /// A single chain, recording every `thin`-th state after burn-in.
    Thinned { draws: usize, thin: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Blocking {
    #[default]
    Joint,
    /// Alternate (p0, p1) updates with hyperparameter updates.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub burn_in: usize,
    pub chains: usize,
    /// Multiplies the initial step (adaptive) or the window half-width (paper mode).
    pub proposal_scale: f64,
    pub mode: SamplerMode,
    pub seed: u64,
    pub retention: Retention,
    pub blocking: Blocking,
    pub exec: ExecMode,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            burn_in: 25_000,
            chains: 1000,
            proposal_scale: 1.0,
            mode: SamplerMode::Adaptive,
            seed: 1,
            retention: Retention::PerChain,
            blocking: Blocking::Joint,
            exec: ExecMode::Parallel,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in == 0 {
            return Err(Error::Usage("burn_in must be at least 1".into()));
        }
        if self.chains == 0 {
            return Err(Error::Usage("chains must be at least 1".into()));
        }
        if !(self.proposal_scale > 0.0 && self.proposal_scale.is_finite()) {
            return Err(Error::Usage(format!("proposal_scale must be positive, got {}", self.proposal_scale)));
        }
        if let Retention::Thinned { draws, thin } = self.retention {
            if draws == 0 || thin == 0 {
                return Err(Error::Usage("thinned retention needs draws >= 1 and thin >= 1".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSamples {
    /// Retained (p0, p1) draws.
    pub draws: Vec<(f64, f64)>,
    /// Accepted / proposed over every chain and iteration.
    pub acceptance_rate: f64,
    pub chain_acceptance: Vec<f64>,
}

impl PosteriorSamples {
    pub fn from_draws(draws: Vec<(f64, f64)>) -> Self {
        Self { draws, acceptance_rate: f64::NAN, chain_acceptance: vec![] }
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.draws.iter().map(|&(a, b)| b - a).collect()
    }
}

const MAXD: usize = 6;

#[derive(Debug, Clone, Copy)]
enum Target {
    Indep([f64; 4]),
    Bibeta(BibetaParams),
    /// Hyperprior shapes α0, β0, α1, β1; state [p0, p1, q0, r0, q1, r1].
    HierBeta([f64; 4]),
    /// Hyperprior shapes α0, α1, β; state [p0, p1, q0, q1, r].
    HierBibeta([f64; 3]),
}

impl Target {
    fn new(family: PriorFamily) -> Self {
        match family {
            PriorFamily::IndepBeta { q0, r0, q1, r1 } => Target::Indep([q0, r0, q1, r1]),
            PriorFamily::Bibeta { q0, q1, r } => Target::Bibeta(BibetaParams { q0, q1, r }),
            PriorFamily::HierBeta { alpha0, beta0, alpha1, beta1 } => {
                Target::HierBeta([alpha0, beta0, alpha1, beta1])
            }
            PriorFamily::HierBibeta { alpha0, alpha1, beta } => Target::HierBibeta([alpha0, alpha1, beta]),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Target::Indep(_) | Target::Bibeta(_) => 2,
            Target::HierBeta(_) => 6,
            Target::HierBibeta(_) => 5,
        }
    }

    /// Gamma shape of hyper coordinate j (j >= 2).
    fn shape(&self, j: usize) -> f64 {
        match self {
            Target::HierBeta(s) => s[j - 2],
            Target::HierBibeta(s) => s[j - 2],
            _ => unreachable!("no hyper coordinates"),
        }
    }

    fn in_support(&self, x: &[f64]) -> bool {
        x[0] > 0.0 && x[0] < 1.0 && x[1] > 0.0 && x[1] < 1.0 && x[2..self.dim()].iter().all(|v| *v > 0.0)
    }

    /// Unnormalized log prior density in natural coordinates.
    fn log_prior(&self, x: &[f64]) -> f64 {
        let (p0, p1) = (x[0], x[1]);
        match *self {
            Target::Indep([q0, r0, q1, r1]) => {
                xlogy(q0 - 1.0, p0) + xlog1my(r0 - 1.0, p0) + xlogy(q1 - 1.0, p1) + xlog1my(r1 - 1.0, p1)
            }
            Target::Bibeta(b) => bibeta_logpdf(p0, p1, &b),
            Target::HierBeta(sh) => {
                let mut lp = 0.0;
                for (i, p) in [p0, p1].into_iter().enumerate() {
                    let (q, r) = (x[2 + 2 * i], x[3 + 2 * i]);
                    let lb = log_beta_fn(q, r).unwrap_or(f64::INFINITY);
                    lp += xlogy(q - 1.0, p) + xlog1my(r - 1.0, p) - lb;
                    lp += (sh[2 * i] - 1.0) * q.ln() - q + (sh[2 * i + 1] - 1.0) * r.ln() - r;
                }
                lp
            }
            Target::HierBibeta(sh) => {
                let b = BibetaParams { q0: x[2], q1: x[3], r: x[4] };
                let ln_norm = ln_gamma(b.q0) + ln_gamma(b.q1) + ln_gamma(b.r) - ln_gamma(b.q0 + b.q1 + b.r);
                let mut lp = bibeta_logpdf(p0, p1, &b) - ln_norm;
                for k in 0..3 {
                    lp += (sh[k] - 1.0) * x[2 + k].ln() - x[2 + k];
                }
                lp
            }
        }
    }

    fn log_target(&self, x: &[f64], d: &TrialData) -> f64 {
        if !self.in_support(x) {
            return f64::NEG_INFINITY;
        }
        let v = self.log_prior(x) + loglik(x[0], x[1], d);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    /// Exact prior draw of the full state.
    fn init<R: Rng>(&self, rng: &mut R) -> [f64; MAXD] {
        let mut x = [0.0; MAXD];
        let (p0, p1) = match *self {
            Target::Indep([q0, r0, q1, r1]) => {
                (BetaParams { q: q0, r: r0 }.sample(rng), BetaParams { q: q1, r: r1 }.sample(rng))
            }
            Target::Bibeta(b) => crate::specfun::bibeta_sample(&b, rng),
            Target::HierBeta(sh) => {
                for k in 0..4 {
                    x[2 + k] = GammaParams { shape: sh[k] }.sample(rng).max(1e-300);
                }
                (
                    BetaParams { q: x[2], r: x[3] }.sample(rng),
                    BetaParams { q: x[4], r: x[5] }.sample(rng),
                )
            }
            Target::HierBibeta(sh) => {
                for k in 0..3 {
                    x[2 + k] = GammaParams { shape: sh[k] }.sample(rng).max(1e-300);
                }
                crate::specfun::bibeta_sample(&BibetaParams { q0: x[2], q1: x[3], r: x[4] }, rng)
            }
        };
        x[0] = p0.clamp(1e-12, 1.0 - 1e-12);
        x[1] = p1.clamp(1e-12, 1.0 - 1e-12);
        if x[0].is_nan() {
            x[0] = 0.5;
        }
        if x[1].is_nan() {
            x[1] = 0.5;
        }
        x
    }

    fn blocks(&self, blocking: Blocking) -> Vec<std::ops::Range<usize>> {
        let d = self.dim();
        if d == 2 || blocking == Blocking::Joint {
            vec![0..d]
        } else {
            vec![0..2, 2..d]
        }
    }
}

fn accept<R: Rng>(rng: &mut R, cur: f64, new: f64) -> bool {
    if new == f64::NEG_INFINITY {
        return false;
    }
    if cur == f64::NEG_INFINITY {
        return true;
    }
    let a = new - cur;
    a >= 0.0 || rng.random::<f64>().ln() < a
}

fn to_u(x: &[f64; MAXD], dim: usize) -> [f64; MAXD] {
    let mut u = [0.0; MAXD];
    for j in 0..dim {
        u[j] = if j < 2 { (x[j] / (1.0 - x[j])).ln() } else { x[j].ln() };
    }
    u
}

fn from_u(u: &[f64; MAXD], dim: usize) -> [f64; MAXD] {
    let mut x = [0.0; MAXD];
    for j in 0..dim {
        x[j] = if j < 2 { 1.0 / (1.0 + (-u[j]).exp()) } else { u[j].exp() };
    }
    x
}

/// log |dx/du| for the logit/log map.
fn log_jac(x: &[f64; MAXD], dim: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..dim {
        s += if j < 2 { x[j].ln() + (1.0 - x[j]).ln() } else { x[j].ln() };
    }
    s
}

struct ChainOut {
    draws: Vec<(f64, f64)>,
    accepted: u64,
    proposed: u64,
    burn_accepted: u64,
}

trait Kernel {
    fn step<R: Rng>(&mut self, rng: &mut R, adapt: Option<usize>) -> (u64, u64);
    fn state(&self) -> (f64, f64);
}

struct AdaptiveKernel<'a> {
    t: &'a Target,
    d: &'a TrialData,
    dim: usize,
    blocks: Vec<std::ops::Range<usize>>,
    u: [f64; MAXD],
    x: [f64; MAXD],
    lt: f64,
    log_s: Vec<f64>,
    sd: [f64; MAXD],
    // Welford accumulators on u
    n: f64,
    mean: [f64; MAXD],
    m2: [f64; MAXD],
}

impl<'a> AdaptiveKernel<'a> {
    fn new(t: &'a Target, d: &'a TrialData, x: [f64; MAXD], blocking: Blocking, scale: f64) -> Self {
        let dim = t.dim();
        let blocks = t.blocks(blocking);
        let u = to_u(&x, dim);
        let lt = t.log_target(&x, d) + log_jac(&x, dim);
        let mut sd = [0.0; MAXD];
        for j in 0..dim {
            sd[j] = if j < 2 { 0.3 } else { 1.0 / t.shape(j).sqrt() };
        }
        let log_s = blocks.iter().map(|b| (scale * 2.38 / (b.len() as f64).sqrt()).ln()).collect();
        Self { t, d, dim, blocks, u, x, lt, log_s, sd, n: 0.0, mean: [0.0; MAXD], m2: [0.0; MAXD] }
    }
}

impl Kernel for AdaptiveKernel<'_> {
    fn step<R: Rng>(&mut self, rng: &mut R, adapt: Option<usize>) -> (u64, u64) {
        let mut acc = 0;
        for b in 0..self.blocks.len() {
            let range = self.blocks[b].clone();
            let s = self.log_s[b].exp();
            let mut un = self.u;
            for j in range {
                let z: f64 = rng.sample(StandardNormal);
                un[j] += s * self.sd[j] * z;
            }
            let xn = from_u(&un, self.dim);
            let ltn = self.t.log_target(&xn, self.d) + log_jac(&xn, self.dim);
            let ok = accept(rng, self.lt, ltn);
            if let Some(it) = adapt {
                let alpha = if ltn == f64::NEG_INFINITY || ltn.is_nan() {
                    0.0
                } else if self.lt == f64::NEG_INFINITY {
                    1.0
                } else {
                    (ltn - self.lt).min(0.0).exp()
                };
                let gamma = 1.0 / ((it + 1) as f64).powf(0.6);
                self.log_s[b] += gamma * (alpha - 0.234);
            }
            if ok {
                self.u = un;
                self.x = xn;
                self.lt = ltn;
                acc += 1;
            }
        }
        if let Some(it) = adapt {
            self.n += 1.0;
            for j in 0..self.dim {
                let dlt = self.u[j] - self.mean[j];
                self.mean[j] += dlt / self.n;
                self.m2[j] += dlt * (self.u[j] - self.mean[j]);
            }
            if it >= 500 {
                for j in 0..self.dim {
                    let v = self.m2[j] / (self.n - 1.0);
                    if v > 1e-12 {
                        self.sd[j] = v.sqrt();
                    }
                }
            }
        }
        (acc, self.blocks.len() as u64)
    }

    fn state(&self) -> (f64, f64) {
        (self.x[0], self.x[1])
    }
}

struct WindowKernel<'a> {
    t: &'a Target,
    d: &'a TrialData,
    blocks: Vec<std::ops::Range<usize>>,
    x: [f64; MAXD],
    lt: f64,
    half: [f64; MAXD],
}

impl<'a> WindowKernel<'a> {
    fn new(t: &'a Target, d: &'a TrialData, x: [f64; MAXD], blocking: Blocking, scale: f64) -> Self {
        let mut half = [0.0; MAXD];
        for (j, h) in half.iter_mut().enumerate().take(t.dim()) {
            *h = if j < 2 { scale } else { scale * t.shape(j).sqrt() };
        }
        let lt = t.log_target(&x, d);
        Self { t, d, blocks: t.blocks(blocking), x, lt, half }
    }
}

impl Kernel for WindowKernel<'_> {
    fn step<R: Rng>(&mut self, rng: &mut R, _adapt: Option<usize>) -> (u64, u64) {
        let mut acc = 0;
        for range in &self.blocks {
            let mut xn = self.x;
            for j in range.clone() {
                xn[j] += self.half[j] * (2.0 * rng.random::<f64>() - 1.0);
            }
            let ltn = self.t.log_target(&xn, self.d);
            if accept(rng, self.lt, ltn) {
                self.x = xn;
                self.lt = ltn;
                acc += 1;
            }
        }
        (acc, self.blocks.len() as u64)
    }

    fn state(&self) -> (f64, f64) {
        (self.x[0], self.x[1])
    }
}

fn drive<K: Kernel, R: Rng>(k: &mut K, rng: &mut R, cfg: &McmcConfig, adaptive: bool) -> ChainOut {
    let (mut accepted, mut proposed) = (0, 0);
    let adapt_until = cfg.burn_in / 2;
    for it in 0..cfg.burn_in {
        let adapt = (adaptive && it < adapt_until).then_some(it);
        let (a, p) = k.step(rng, adapt);
        accepted += a;
        proposed += p;
    }
    let burn_accepted = accepted;
    let mut draws = Vec::new();
    match cfg.retention {
        Retention::PerChain => draws.push(k.state()),
        Retention::Thinned { draws: n, thin } => {
            draws.reserve(n);
            for _ in 0..n {
                for _ in 0..thin {
                    let (a, p) = k.step(rng, None);
                    accepted += a;
                    proposed += p;
                }
                draws.push(k.state());
            }
        }
    }
    ChainOut { draws, accepted, proposed, burn_accepted }
}

fn run_chain(t: &Target, d: &TrialData, cfg: &McmcConfig, chain: usize) -> ChainOut {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64);
    let x0 = t.init(&mut rng);
    match cfg.mode {
        SamplerMode::Adaptive => {
            let mut k = AdaptiveKernel::new(t, d, x0, cfg.blocking, cfg.proposal_scale);
            drive(&mut k, &mut rng, cfg, true)
        }
        SamplerMode::PaperMode => {
            let mut k = WindowKernel::new(t, d, x0, cfg.blocking, cfg.proposal_scale);
            drive(&mut k, &mut rng, cfg, false)
        }
    }
}

/// Posterior draws of (p0, p1) under `prior` given `data`.
pub fn mh_sample(prior: &PriorSpec, data: &TrialData, cfg: &McmcConfig) -> Result<PosteriorSamples> {
    cfg.validate()?;
    data.validate()?;
    let t = Target::new(prior.family);
    let n_chains = match cfg.retention {
        Retention::PerChain => cfg.chains,
        Retention::Thinned { .. } => 1,
    };
    let outs = par::map_indexed(n_chains, cfg.exec, |c| run_chain(&t, data, cfg, c));
    if let Some(c) = outs.iter().position(|o| o.burn_accepted == 0) {
        return Err(Error::Sampler(format!(
            "chain {c} accepted no proposals during {} burn-in iterations; reduce proposal_scale or lengthen burn-in",
            cfg.burn_in
        )));
    }
    let (acc, prop) = outs.iter().fold((0u64, 0u64), |(a, p), o| (a + o.accepted, p + o.proposed));
    let chain_acceptance = outs.iter().map(|o| o.accepted as f64 / o.proposed as f64).collect();
    let draws = outs.into_iter().flat_map(|o| o.draws).collect();
    Ok(PosteriorSamples { draws, acceptance_rate: acc as f64 / prop as f64, chain_acceptance })
}
