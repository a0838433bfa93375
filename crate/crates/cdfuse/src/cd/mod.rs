//! Confidence distributions for δ and their combination.
//!
//! A `ConfDist` keeps an exact CDF (closed form for normal and histogram CDs,
//! the tabulated integral otherwise) next to a normalized density grid.
//! Combination works on probits: H_c = Φ((w1·z0 + w2·zT)/√(w1² + w2²)),
//! with the probit of a non-normal CD clipped to [1e-15, 1 − 1e-15].

mod validate;

pub use validate::{cd_validate_uniformity, BinomialTrialModel, PairedTrialModel, SamplingModel};

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bayes::{profile_loglik, TrialData};
use crate::elicit::PooledHistogram;
use crate::error::{Error, Result};
use crate::grid::{linspace, GridDensity};
use crate::specfun::{norm_cdf, norm_pdf, norm_ppf};

/// Grid size used for every CD density.
pub const CD_GRID_POINTS: usize = 4001;
const MODE_CORE: f64 = 0.01;
const CLIP: f64 = 1e-15;
/// Half-width of a normal CD's tabulated range, in sd.
const NORMAL_SPAN: f64 = 10.0;
/// Offset of the extra nodes placed either side of a density jump.
const JUMP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Normal { mu: f64, sd: f64 },
    Histogram(PooledHistogram),
    Grid,
    Combined { h0: Box<ConfDist>, ht: Box<ConfDist>, w1: f64, w2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfDist {
    repr: Repr,
    density: GridDensity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinerSpec {
    pub w1: f64,
    pub w2: f64,
}

impl CombinerSpec {
    pub fn new(w1: f64, w2: f64) -> Result<Self> {
        if !(w1 > 0.0 && w2 > 0.0 && w1.is_finite() && w2.is_finite()) {
            return Err(Error::Usage(format!("combination weights must be positive (got {w1}, {w2})")));
        }
        Ok(Self { w1, w2 })
    }

    /// Inverse-sd weights w1 = 1/σ_d for the prior, w2 = 1/Ĉ_d for the trial.
    pub fn inverse_sd(sigma_d: f64, c_d: f64) -> Result<Self> {
        Self::new(1.0 / sigma_d, 1.0 / c_d)
    }
}

/// Ĉ_d² = p̂1(1 − p̂1)/n1 + p̂0(1 − p̂0)/n0.
pub fn wald_se(d: &TrialData) -> Result<f64> {
    d.validate()?;
    if d.s0 == 0 || d.s0 == d.n0 || d.s1 == 0 || d.s1 == d.n1 {
        return Err(Error::Domain(
            "Wald CD is degenerate when an arm has all or no successes; use the profile CD".into(),
        ));
    }
    let (a, b) = (d.phat0(), d.phat1());
    Ok((a * (1.0 - a) / d.n0 as f64 + b * (1.0 - b) / d.n1 as f64).sqrt())
}

/// Grid over [lo, hi] with a node pair either side of each jump point.
fn grid_with_jumps(lo: f64, hi: f64, jumps: &[f64]) -> Vec<f64> {
    let mut g = linspace(lo, hi, CD_GRID_POINTS);
    for &j in jumps {
        if j > lo && j < hi {
            g.retain(|x| (x - j).abs() > 2.0 * JUMP_EPS);
            g.push(j - JUMP_EPS);
            g.push(j + JUMP_EPS);
        }
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

impl ConfDist {
    pub fn normal(mu: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite() && mu.is_finite()) {
            return Err(Error::Domain(format!("normal CD needs finite mean and sd > 0 (got {mu}, {sd})")));
        }
        let grid = linspace(mu - NORMAL_SPAN * sd, mu + NORMAL_SPAN * sd, CD_GRID_POINTS);
        let density = GridDensity::from_fn(grid, |x| norm_pdf((x - mu) / sd) / sd)?.normalize()?;
        Ok(Self { repr: Repr::Normal { mu, sd }, density })
    }

    /// CD from a tabulated density; the CDF is its exact running integral.
    pub fn from_density(density: GridDensity) -> Result<Self> {
        let density = if density.is_normalized() { density } else { density.normalize()? };
        Ok(Self { repr: Repr::Grid, density })
    }

    pub fn kind(&self) -> &'static str {
        match self.repr {
            Repr::Normal { .. } => "normal",
            Repr::Histogram(_) => "histogram",
            Repr::Grid => "grid",
            Repr::Combined { .. } => "combined",
        }
    }

    pub fn density(&self) -> &GridDensity {
        &self.density
    }

    pub fn support(&self) -> (f64, f64) {
        (self.density.lo(), self.density.hi())
    }

    /// Density value; exact for normal and histogram CDs.
    pub fn pdf(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Normal { mu, sd } => norm_pdf((x - mu) / sd) / sd,
            Repr::Histogram(h) => h.density(x),
            Repr::Grid => self.density.eval(x),
            Repr::Combined { h0, ht, w1, w2 } => {
                let w = w1.hypot(*w2);
                let (z0, d0) = h0.probit_with_slope(x);
                let (zt, dt) = ht.probit_with_slope(x);
                norm_pdf((w1 * z0 + w2 * zt) / w) * (w1 * d0 + w2 * dt) / w
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Normal { mu, sd } => norm_cdf((x - mu) / sd),
            Repr::Histogram(h) => h.cdf(x),
            Repr::Grid => self.density.cdf(x).clamp(0.0, 1.0),
            Repr::Combined { h0, ht, w1, w2 } => {
                let (z0, _) = h0.probit_with_slope(x);
                let (zt, _) = ht.probit_with_slope(x);
                norm_cdf((w1 * z0 + w2 * zt) / w1.hypot(*w2))
            }
        }
    }

    /// Φ⁻¹(H(x)) and its derivative in x. Exact for normal CDs; clipped
    /// (with zero slope) where H leaves [1e-15, 1 − 1e-15] otherwise.
    fn probit_with_slope(&self, x: f64) -> (f64, f64) {
        if let Repr::Normal { mu, sd } = self.repr {
            return ((x - mu) / sd, 1.0 / sd);
        }
        let h = self.cdf(x);
        if h <= CLIP {
            return (norm_ppf(CLIP), 0.0);
        }
        if h >= 1.0 - CLIP {
            return (norm_ppf(1.0 - CLIP), 0.0);
        }
        let z = norm_ppf(h);
        (z, self.pdf(x) / norm_pdf(z))
    }

    /// Points where the density jumps.
    fn jumps(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Histogram(h) => h.bin_edges.clone(),
            Repr::Combined { h0, ht, .. } => {
                let mut v = h0.jumps();
                v.extend(ht.jumps());
                v
            }
            _ => vec![],
        }
    }

    /// Inverse CDF; closed form for normal CDs, bisection on the CDF otherwise.
    pub fn quantile(&self, p: f64) -> f64 {
        if let Repr::Normal { mu, sd } = self.repr {
            return mu + sd * norm_ppf(p);
        }
        let (mut lo, mut hi) = self.support();
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if self.cdf(m) < p {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    pub fn mean(&self) -> f64 {
        match &self.repr {
            Repr::Normal { mu, .. } => *mu,
            Repr::Histogram(h) => h.mean,
            Repr::Combined { .. } => self.cdf_moments().0,
            Repr::Grid => self.density.mean(),
        }
    }

    pub fn sd(&self) -> f64 {
        match &self.repr {
            Repr::Normal { sd, .. } => *sd,
            Repr::Combined { .. } => self.cdf_moments().1.sqrt(),
            _ => self.density.var().sqrt(),
        }
    }

    /// Mean and variance from the CDF: E X = b − ∫H, E X² = b² − 2∫xH.
    /// Unlike the density, H stays bounded near a support-end spike.
    fn cdf_moments(&self) -> (f64, f64) {
        let g = self.density.grid();
        let h: Vec<f64> = g.iter().map(|&x| self.cdf(x)).collect();
        let (mut i1, mut i2) = (0.0, 0.0);
        for k in 1..g.len() {
            let dx = g[k] - g[k - 1];
            i1 += 0.5 * dx * (h[k] + h[k - 1]);
            i2 += 0.5 * dx * (g[k] * h[k] + g[k - 1] * h[k - 1]);
        }
        let b = g[g.len() - 1];
        let m = b - i1;
        (m, (b * b - 2.0 * i2 - m * m).max(0.0))
    }

    /// Normal: its center. Histogram: midpoint of the highest-density bin.
    /// Otherwise the refined grid argmax.
    ///
    /// A combined CD whose input has positive density at a support end has an
    /// integrable spike there (the slope of Φ⁻¹ blows up as H → 0), so its
    /// argmax is taken where both inputs' CDFs lie in [0.01, 0.99].
    pub fn mode(&self) -> f64 {
        match &self.repr {
            Repr::Normal { mu, .. } => *mu,
            Repr::Histogram(h) => h.mode(),
            Repr::Combined { h0, ht, .. } => {
                let inside = |x: f64| {
                    let (a, b) = (h0.cdf(x), ht.cdf(x));
                    (MODE_CORE..=1.0 - MODE_CORE).contains(&a) && (MODE_CORE..=1.0 - MODE_CORE).contains(&b)
                };
                let (g, v) = (self.density.grid(), self.density.values());
                let idx: Vec<usize> = (0..g.len()).filter(|&i| inside(g[i])).collect();
                if idx.len() < 3 {
                    return self.density.mode();
                }
                let (gs, vs): (Vec<f64>, Vec<f64>) = idx.iter().map(|&i| (g[i], v[i])).unzip();
                GridDensity::new(gs, vs).map(|d| d.mode()).unwrap_or_else(|_| self.density.mode())
            }
            Repr::Grid => self.density.mode(),
        }
    }

    /// Rows of (δ, cdf, density) on the density grid.
    pub fn to_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["delta", "cdf", "density"])?;
        for (&x, &f) in self.density.grid().iter().zip(self.density.values()) {
            wr.write_record([format!("{x}"), format!("{}", self.cdf(x)), format!("{f}")])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.to_csv(std::fs::File::create(path)?)
    }

    /// Reads a CSV written by [`ConfDist::to_csv`] back as a grid CD.
    pub fn from_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let (mut grid, mut vals) = (vec![], vec![]);
        for rec in rd.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Validation(format!("bad CD row: {rec:?}")))
            };
            grid.push(parse(0)?);
            vals.push(parse(2)?);
        }
        Self::from_density(GridDensity::new(grid, vals)?)
    }
}

/// Histogram prior CD: within-bin uniform density, support [L1, L13].
pub fn prior_cd_from_histogram(h: &PooledHistogram) -> Result<ConfDist> {
    let grid = grid_with_jumps(h.lo(), h.hi(), &h.bin_edges);
    let top = h.hi();
    // the last node sits on the closed right edge
    let density = GridDensity::from_fn(grid, |x| h.density(if x >= top { top - JUMP_EPS } else { x }))?.normalize()?;
    Ok(ConfDist { repr: Repr::Histogram(h.clone()), density })
}

pub fn prior_cd_normal(mu_d: f64, sigma_d: f64) -> Result<ConfDist> {
    ConfDist::normal(mu_d, sigma_d)
}

/// H_T(δ) = Φ((δ − δ̂)/Ĉ_d).
pub fn trial_cd_wald(d: &TrialData) -> Result<ConfDist> {
    ConfDist::normal(d.delta_hat(), wald_se(d)?)
}

/// Normalized profile likelihood of δ on a uniform grid over [−1, 1].
pub fn trial_cd_profile(d: &TrialData, resolution: usize) -> Result<ConfDist> {
    d.validate()?;
    if resolution < 3 {
        return Err(Error::Usage("profile CD needs at least 3 grid points".into()));
    }
    let grid = linspace(-1.0, 1.0, resolution);
    let lp: Vec<f64> = grid
        .iter()
        .map(|&x| profile_loglik(x.clamp(-1.0 + 1e-12, 1.0 - 1e-12), d))
        .collect::<Result<_>>()?;
    let top = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let vals = lp.iter().map(|v| (v - top).exp()).collect();
    ConfDist::from_density(GridDensity::new(grid, vals)?)
}

/// H_c(δ) = Φ({w1 Φ⁻¹(H0(δ)) + w2 Φ⁻¹(H_T(δ))} / √(w1² + w2²)).
pub fn combine_cds(h0: &ConfDist, ht: &ConfDist, spec: CombinerSpec) -> Result<ConfDist> {
    let spec = CombinerSpec::new(spec.w1, spec.w2)?;
    let (a0, b0) = h0.support();
    let (at, bt) = ht.support();
    if a0.max(at) >= b0.min(bt) {
        return Err(Error::Combination(format!(
            "CD supports [{a0}, {b0}] and [{at}, {bt}] do not overlap"
        )));
    }
    let mut jumps = h0.jumps();
    jumps.extend(ht.jumps());
    let grid = grid_with_jumps(a0.min(at), b0.max(bt), &jumps);
    let mut c = ConfDist {
        repr: Repr::Combined { h0: Box::new(h0.clone()), ht: Box::new(ht.clone()), w1: spec.w1, w2: spec.w2 },
        density: GridDensity::new(vec![0.0, 1.0], vec![0.0, 0.0])?,
    };
    let vals: Vec<f64> = grid.iter().map(|&x| c.pdf(x).max(0.0)).collect();
    c.density = GridDensity::new(grid, vals)?.normalize()?;
    Ok(c)
}

/// N(δ̃, C̃²) with δ̃ the precision-weighted average of δ̂ and μ_d.
pub fn combined_normal_closed_form(mu_d: f64, sigma_d: f64, d: &TrialData) -> Result<ConfDist> {
    if !(sigma_d > 0.0) {
        return Err(Error::Domain("sigma_d must be positive".into()));
    }
    let c = wald_se(d)?;
    let (pp, pt) = (1.0 / (sigma_d * sigma_d), 1.0 / (c * c));
    let center = (d.delta_hat() * pt + mu_d * pp) / (pp + pt);
    ConfDist::normal(center, (pp + pt).sqrt().recip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{migraine_survey, MIGRAINE_TRIAL};
    use crate::elicit::{default_edges, pool_survey, SdRule, UNIFORM_EDGES};
    use proptest::prelude::*;

    fn check_cd(c: &ConfDist) {
        let g = c.density();
        assert!((g.integral() - 1.0).abs() < 1e-8);
        assert!(g.values().iter().all(|v| *v >= 0.0));
        let mut last = 0.0;
        for &x in g.grid() {
            let h = c.cdf(x);
            assert!(h >= last - 1e-12, "{} not monotone at {x}", c.kind());
            last = h;
        }
    }

    fn hist() -> PooledHistogram {
        pool_survey(&migraine_survey(default_edges()), SdRule::WithinBin).unwrap()
    }

    #[test]
    fn histogram_cd() {
        let h = hist();
        let c = prior_cd_from_histogram(&h).unwrap();
        check_cd(&c);
        assert_eq!(c.cdf(h.lo()), 0.0);
        assert_eq!(c.cdf(h.hi()), 1.0);
        for x in [-0.1, 0.01, 0.05, 0.1, 0.15] {
            assert!((c.quantile(c.cdf(x)) - x).abs() < 1e-9);
            assert!((c.density().cdf(x) - c.cdf(x)).abs() < 1e-6);
        }
        assert!((c.mean() - h.mean).abs() < 1e-15);
        assert!((c.density().mean() - h.mean).abs() < 1e-6);
        assert_eq!(c.mode(), h.mode());
    }

    #[test]
    fn histogram_median_with_uniform_edges() {
        let h = pool_survey(&migraine_survey(UNIFORM_EDGES.to_vec()), SdRule::WithinBin).unwrap();
        let c = prior_cd_from_histogram(&h).unwrap();
        // the median falls in the bin whose midpoint is 0.060
        let m = c.median();
        assert!((0.04..0.08).contains(&m), "{m}");
        assert!((c.mode() - 0.020).abs() < 1e-12);
    }

    #[test]
    fn normal_cd() {
        let c = prior_cd_normal(0.05, 0.1).unwrap();
        check_cd(&c);
        assert_eq!(c.median(), 0.05);
        assert!((c.quantile(0.975) - (0.05 + 1.959963984540054 * 0.1)).abs() < 1e-12);
        let h = hist();
        assert!((prior_cd_normal(h.mean, h.sd).unwrap().mean() - 0.048).abs() < 1e-3);
    }

    #[test]
    fn wald_cd_example() {
        let c = trial_cd_wald(&MIGRAINE_TRIAL).unwrap();
        assert!((c.mean() - 0.10344).abs() < 1e-5);
        assert!((c.sd() - 0.08846).abs() < 1e-5);
        assert!((c.quantile(0.025) + 0.070).abs() < 1e-3);
        assert!((c.quantile(0.975) - 0.277).abs() < 1e-3);
        let bad = TrialData::new(10, 0, 10, 5).unwrap();
        assert!(trial_cd_wald(&bad).is_err());
    }

    #[test]
    fn profile_cd_properties() {
        let c = trial_cd_profile(&MIGRAINE_TRIAL, CD_GRID_POINTS).unwrap();
        check_cd(&c);
        assert!((c.mode() - 0.1034).abs() < 2e-3);
        let s = trial_cd_profile(&MIGRAINE_TRIAL.swapped(), CD_GRID_POINTS).unwrap();
        assert!(c.density().sup_distance(&s.density().reflect()) < 1e-9);
        let big = TrialData::new(6800, 3100, 5900, 3300).unwrap();
        let p = trial_cd_profile(&big, CD_GRID_POINTS).unwrap();
        let w = trial_cd_wald(&big).unwrap();
        let sup = p.density().grid().iter().map(|&x| (p.cdf(x) - w.cdf(x)).abs()).fold(0.0, f64::max);
        assert!(sup < 0.01, "{sup}");
    }

    #[test]
    fn equal_normal_inputs() {
        let a = ConfDist::normal(0.1, 0.2).unwrap();
        let c = combine_cds(&a, &a, CombinerSpec::new(1.0, 1.0).unwrap()).unwrap();
        check_cd(&c);
        let want = ConfDist::normal(0.1, 0.2 / 2f64.sqrt()).unwrap();
        for &x in c.density().grid() {
            assert!((c.cdf(x) - want.cdf(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_grid_combination() {
        let h = hist();
        let p = prior_cd_normal(h.mean, h.sd).unwrap();
        let t = trial_cd_wald(&MIGRAINE_TRIAL).unwrap();
        let spec = CombinerSpec::inverse_sd(h.sd, t.sd()).unwrap();
        let c = combine_cds(&p, &t, spec).unwrap();
        let cf = combined_normal_closed_form(h.mean, h.sd, &MIGRAINE_TRIAL).unwrap();
        let sup = c.density().grid().iter().map(|&x| (c.cdf(x) - cf.cdf(x)).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-12, "{sup}");
        let dsup = c.density().grid().iter().map(|&x| (c.pdf(x) - cf.pdf(x)).abs()).fold(0.0, f64::max);
        assert!(dsup < 1e-9, "{dsup}");
        assert!((c.mean() - 0.068).abs() < 0.005 && (c.median() - 0.068).abs() < 0.005);
        assert!((c.quantile(0.025) + 0.035).abs() < 0.01 && (c.quantile(0.975) - 0.171).abs() < 0.01);
        let m = c.median();
        assert!(m > p.median().min(t.median()) && m < p.median().max(t.median()));
    }

    #[test]
    fn closed_form_limits() {
        let d = MIGRAINE_TRIAL;
        let c = wald_se(&d).unwrap();
        let mid = combined_normal_closed_form(0.0, c, &d).unwrap();
        assert!((mid.mean() - d.delta_hat() / 2.0).abs() < 1e-15);
        let flat = combined_normal_closed_form(0.0, 1e6, &d).unwrap();
        assert!((flat.mean() - d.delta_hat()).abs() < 1e-9 && (flat.sd() - c).abs() < 1e-9);
    }

    #[test]
    fn histogram_profile_combination() {
        let h = hist();
        let p = prior_cd_from_histogram(&h).unwrap();
        let t = trial_cd_profile(&MIGRAINE_TRIAL, CD_GRID_POINTS).unwrap();
        let spec = CombinerSpec::inverse_sd(h.sd, wald_se(&MIGRAINE_TRIAL).unwrap()).unwrap();
        let c = combine_cds(&p, &t, spec).unwrap();
        check_cd(&c);
        assert!((c.median() - 0.065).abs() < 0.01, "{}", c.median());
    }

    #[test]
    fn dominant_trial_weight() {
        let p = prior_cd_from_histogram(&hist()).unwrap();
        let t = trial_cd_wald(&MIGRAINE_TRIAL).unwrap();
        let c = combine_cds(&p, &t, CombinerSpec::new(1.0, 1e9).unwrap()).unwrap();
        for x in [-0.1, 0.0, 0.1, 0.2] {
            assert!((c.cdf(x) - t.cdf(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn disjoint_supports() {
        let a = prior_cd_from_histogram(&hist()).unwrap();
        let b = ConfDist::normal(5.0, 0.01).unwrap();
        assert!(matches!(combine_cds(&a, &b, CombinerSpec::new(1.0, 1.0).unwrap()), Err(Error::Combination(_))));
        assert!(CombinerSpec::new(0.0, 1.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let c = trial_cd_wald(&MIGRAINE_TRIAL).unwrap();
        let mut buf = vec![];
        c.to_csv(&mut buf).unwrap();
        let back = ConfDist::from_csv(&buf[..]).unwrap();
        assert!(back.density().sup_distance(c.density()) < 1e-12);
        assert!((back.median() - c.median()).abs() < 1e-6);
    }

    #[test]
    fn support_end_spike() {
        // empty first bin: the histogram CD starts with positive density at 0
        let w = vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.3, 0.3, 0.2, 0.1, 0.05, 0.05];
        let h = PooledHistogram::from_weights(w, UNIFORM_EDGES.to_vec(), SdRule::WithinBin).unwrap();
        let h0 = prior_cd_from_histogram(&h).unwrap();
        let ht = trial_cd_profile(&MIGRAINE_TRIAL, CD_GRID_POINTS).unwrap();
        let c = combine_cds(&h0, &ht, CombinerSpec::inverse_sd(h.sd, wald_se(&MIGRAINE_TRIAL).unwrap()).unwrap()).unwrap();
        assert!(c.pdf(1e-12) > 10.0 * c.pdf(0.04));
        assert!(c.mode() > 0.02, "{}", c.mode());
        // moments from the CDF agree with a fine quadrature of x·h(x)
        let g = linspace(0.0, 0.24, 200_001);
        let m: f64 = g.windows(2).map(|p| (c.cdf(p[1]) - c.cdf(p[0])) * 0.5 * (p[0] + p[1])).sum();
        assert!((c.mean() - m).abs() < 1e-6, "{} vs {m}", c.mean());
    }

    #[test]
    fn combined_normal_moments_from_cdf() {
        let c = combine_cds(
            &ConfDist::normal(0.0, 1.0).unwrap(),
            &ConfDist::normal(1.0, 1.0).unwrap(),
            CombinerSpec::new(1.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!((c.mean() - 0.5).abs() < 1e-6);
        assert!((c.sd() - 0.5f64.sqrt()).abs() < 1e-5, "{}", c.sd());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn combination_monotone_in_prior(shift in 0.0f64..0.1, x in -0.3f64..0.4, w1 in 0.1f64..20.0) {
            let t = trial_cd_wald(&MIGRAINE_TRIAL).unwrap();
            let lo = ConfDist::normal(0.05 + shift, 0.1).unwrap();
            let hi = ConfDist::normal(0.05, 0.1).unwrap();
            let spec = CombinerSpec::new(w1, 10.0).unwrap();
            // hi's CDF dominates lo's pointwise
            let a = combine_cds(&lo, &t, spec).unwrap().cdf(x);
            let b = combine_cds(&hi, &t, spec).unwrap().cdf(x);
            prop_assert!(b >= a - 1e-15);
        }

        #[test]
        fn normal_combination_median_between(m0 in -0.3f64..0.3, s0 in 0.02f64..0.3, w1 in 0.1f64..50.0, w2 in 0.1f64..50.0) {
            let a = ConfDist::normal(m0, s0).unwrap();
            let t = trial_cd_wald(&MIGRAINE_TRIAL).unwrap();
            let c = combine_cds(&a, &t, CombinerSpec::new(w1, w2).unwrap()).unwrap();
            let m = c.median();
            prop_assert!(m >= m0.min(t.median()) - 1e-9 && m <= m0.max(t.median()) + 1e-9);
        }
    }
}
