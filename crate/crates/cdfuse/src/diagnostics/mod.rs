//! Point and interval summaries, the discrepant-posterior check, and the
//! geometry of projecting joint densities onto linear directions.

mod geometry;

pub use geometry::{
    contour_export, directional_scan, directional_scan_with, joint_mode, project_direction, project_joint_to_delta,
    ContourLevel, ContourSet, JointGrid, ScanEntry,
};

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::bayes::{kde_1d, Bandwidth};
use crate::cd::ConfDist;
use crate::error::{Error, Result};
use crate::grid::{linspace, GridDensity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub mode: f64,
    pub median: f64,
    pub mean: f64,
    pub i80: (f64, f64),
    pub i90: (f64, f64),
    pub i95: (f64, f64),
}

impl SummaryReport {
    pub fn get(&self, s: Statistic) -> f64 {
        match s {
            Statistic::Mode => self.mode,
            Statistic::Median => self.median,
            Statistic::Mean => self.mean,
        }
    }

    fn from_quantiles<Q: Fn(f64) -> f64>(mode: f64, mean: f64, q: Q) -> Self {
        let iv = |level: f64| {
            let a = (1.0 - level) / 2.0;
            (q(a), q(1.0 - a))
        };
        Self { mode, median: q(0.5), mean, i80: iv(0.80), i90: iv(0.90), i95: iv(0.95) }
    }
}

/// Mode by refined grid argmax, quantiles by inverting the exact CDF of the
/// piecewise-linear density, mean by exact integration.
pub fn summarize(g: &GridDensity) -> Result<SummaryReport> {
    if !g.is_normalized() {
        return Err(Error::Usage("summarize needs a normalized density".into()));
    }
    Ok(SummaryReport::from_quantiles(g.mode(), g.mean(), |p| g.quantile(p)))
}

/// Summary of a CD using its own CDF and mode convention.
pub fn summarize_cd(cd: &ConfDist) -> SummaryReport {
    SummaryReport::from_quantiles(cd.mode(), cd.mean(), |p| cd.quantile(p))
}

/// How the mode of a sample is located.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeRule {
    /// Argmax of the Gaussian KDE.
    #[default]
    Kde,
    /// Midpoint of the fullest of `bins` equal-width histogram bins.
    Bin { bins: usize },
}

/// KDE-based summary of draws; the mean is the sample mean.
pub fn summarize_draws(values: &[f64], bw: Bandwidth, rule: ModeRule) -> Result<(SummaryReport, GridDensity)> {
    let h = bw.resolve(values)?;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let g = kde_1d(values, Bandwidth::Fixed { h }, linspace(lo - 4.0 * h, hi + 4.0 * h, 2001))?;
    let mut rep = summarize(&g)?;
    rep.mean = crate::stats::mean(values);
    if let ModeRule::Bin { bins } = rule {
        if bins == 0 {
            return Err(Error::Usage("bin mode rule needs at least one bin".into()));
        }
        let w = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for v in values {
            let k = if w > 0.0 { (((v - lo) / w) as usize).min(bins - 1) } else { 0 };
            counts[k] += 1;
        }
        let k = (0..bins).fold(0, |b, j| if counts[j] > counts[b] { j } else { b });
        rep.mode = lo + (k as f64 + 0.5) * w;
    }
    Ok((rep, g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Mode,
    Median,
    Mean,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::Mode, Statistic::Median, Statistic::Mean];

    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Mode => "mode",
            Statistic::Median => "median",
            Statistic::Mean => "mean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyVerdict {
    pub statistic: Statistic,
    pub prior_value: f64,
    pub likelihood_value: f64,
    pub posterior_value: f64,
    pub discrepant: bool,
    /// Projection direction (a, b) of a·p0 + b·p1 when from a directional scan.
    pub direction: Option<(f64, f64)>,
}

/// Posterior outside the closed interval spanned by prior and likelihood.
pub fn verdict(statistic: Statistic, prior: f64, likelihood: f64, posterior: f64) -> DiscrepancyVerdict {
    let (lo, hi) = (prior.min(likelihood), prior.max(likelihood));
    DiscrepancyVerdict {
        statistic,
        prior_value: prior,
        likelihood_value: likelihood,
        posterior_value: posterior,
        discrepant: !(posterior >= lo && posterior <= hi),
        direction: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub verdicts: Vec<DiscrepancyVerdict>,
    pub any_discrepant: bool,
}

impl DiscrepancyReport {
    pub fn get(&self, s: Statistic) -> &DiscrepancyVerdict {
        self.verdicts.iter().find(|v| v.statistic == s).expect("all statistics present")
    }
}

pub fn discrepancy_from_summaries(prior: &SummaryReport, lik: &SummaryReport, post: &SummaryReport) -> DiscrepancyReport {
    let verdicts: Vec<_> =
        Statistic::ALL.iter().map(|&s| verdict(s, prior.get(s), lik.get(s), post.get(s))).collect();
    let any_discrepant = verdicts.iter().any(|v| v.discrepant);
    DiscrepancyReport { verdicts, any_discrepant }
}

/// Verdicts for mode, median and mean of three normalized densities over δ.
pub fn detect_discrepancy(prior: &GridDensity, lik: &GridDensity, post: &GridDensity) -> Result<DiscrepancyReport> {
    Ok(discrepancy_from_summaries(&summarize(prior)?, &summarize(lik)?, &summarize(post)?))
}

/// Column layout of the summary tables.
pub const SUMMARY_HEADER: [&str; 10] =
    ["curve", "mode", "median", "mean", "i80_lo", "i80_hi", "i90_lo", "i90_hi", "i95_lo", "i95_hi"];

/// Writes labelled summary rows with `decimals` digits after the point.
pub fn write_summary_csv<W: Write>(w: W, rows: &[(String, SummaryReport)], decimals: usize) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SUMMARY_HEADER)?;
    for (label, r) in rows {
        let vals = [r.mode, r.median, r.mean, r.i80.0, r.i80.1, r.i90.0, r.i90.1, r.i95.0, r.i95.1];
        let mut rec = vec![label.clone()];
        // -0.0000 reads badly; normalise signed zeros after rounding
        rec.extend(vals.iter().map(|v| {
            let s = format!("{v:.decimals$}");
            if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
                s.trim_start_matches('-').to_string()
            } else {
                s
            }
        }));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_summary_csv<R: Read>(r: R) -> Result<Vec<(String, SummaryReport)>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = vec![];
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != SUMMARY_HEADER.len() {
            return Err(Error::Validation(format!("summary row has {} fields, expected 10", rec.len())));
        }
        let v: Vec<f64> = (1..10)
            .map(|i| rec[i].trim().parse::<f64>().map_err(|_| Error::Validation(format!("bad number {:?}", &rec[i]))))
            .collect::<Result<_>>()?;
        out.push((
            rec[0].to_string(),
            SummaryReport {
                mode: v[0],
                median: v[1],
                mean: v[2],
                i80: (v[3], v[4]),
                i90: (v[5], v[6]),
                i95: (v[7], v[8]),
            },
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::{exact_indep_beta_posterior, marginalize_delta, PosteriorJoint};
    use crate::cd::{trial_cd_profile, CD_GRID_POINTS};
    use crate::datasets::MIGRAINE_TRIAL;
    use crate::elicit::PriorSpec;
    use proptest::prelude::*;

    fn triangle() -> GridDensity {
        GridDensity::from_fn(linspace(-1.0, 1.0, 2001), |x| 1.0 - x.abs()).unwrap().normalize().unwrap()
    }

    #[test]
    fn triangle_summary() {
        let s = summarize(&triangle()).unwrap();
        assert!(s.mode.abs() < 1e-12 && s.median.abs() < 1e-12 && s.mean.abs() < 1e-12);
        assert!(s.i95.0 <= s.i90.0 && s.i90.0 <= s.i80.0 && s.i80.0 <= s.median);
        assert!(s.median <= s.i80.1 && s.i80.1 <= s.i90.1 && s.i90.1 <= s.i95.1);
        // F(x) = 1 − (1 − x)²/2 on the right half
        assert!((s.i95.1 - (1.0 - 0.05f64.sqrt())).abs() < 1e-6);
    }

    #[test]
    fn unnormalized_is_rejected() {
        let g = GridDensity::from_fn(linspace(0.0, 1.0, 11), |_| 1.0).unwrap();
        assert!(matches!(summarize(&g), Err(Error::Usage(_))));
    }

    #[test]
    fn quantile_inversion() {
        let g = trial_cd_profile(&MIGRAINE_TRIAL, CD_GRID_POINTS).unwrap().density().clone();
        let s = summarize(&g).unwrap();
        for (p, x) in [(0.025, s.i95.0), (0.05, s.i90.0), (0.1, s.i80.0), (0.5, s.median), (0.9, s.i80.1)] {
            assert!((g.cdf(x) - p).abs() < 1e-9);
        }
        assert!((s.mode - 0.104).abs() < 2e-3 && (s.median - 0.104).abs() < 2e-3 && (s.mean - 0.103).abs() < 2e-3);
    }

    #[test]
    fn conjugate_posterior_mean() {
        let prior = PriorSpec::indep_beta(14.66, 4.88, 46.81, 4.68).unwrap();
        let g = marginalize_delta(&PosteriorJoint { prior: &prior, data: MIGRAINE_TRIAL }, 2001).unwrap();
        let (a, b) = exact_indep_beta_posterior(&prior, &MIGRAINE_TRIAL).unwrap();
        assert!((summarize(&g).unwrap().mean - (b.mean() - a.mean())).abs() < 5e-3);
    }

    #[test]
    fn verdict_examples() {
        assert!(verdict(Statistic::Mean, 0.159, 0.103, 0.2007).discrepant);
        assert!(!verdict(Statistic::Mean, 0.048, 0.103, 0.071).discrepant);
        assert!(!verdict(Statistic::Mean, 0.1, 0.1, 0.1).discrepant);
        let t = triangle();
        let r = detect_discrepancy(&t, &t, &t).unwrap();
        assert!(!r.any_discrepant);
        assert_eq!(r.verdicts.len(), 3);
    }

    #[test]
    fn draws_summary_and_bin_mode() {
        let v: Vec<f64> = (0..1000).map(|i| ((i as f64 + 0.5) / 1000.0).powi(2)).collect();
        let (r, g) = summarize_draws(&v, Bandwidth::Silverman, ModeRule::Bin { bins: 10 }).unwrap();
        // bins span the sample range, the first one holds the most draws
        assert!((r.mode - (v[0] + 0.05 * (v[999] - v[0]))).abs() < 1e-12);
        assert!((r.mean - crate::stats::mean(&v)).abs() < 1e-15);
        assert!(g.is_normalized());
    }

    #[test]
    fn csv_round_trip() {
        let s = summarize(&triangle()).unwrap();
        let rows = vec![("prior".to_string(), s), ("posterior".to_string(), s)];
        let mut buf = vec![];
        write_summary_csv(&mut buf, &rows, 4).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("curve,mode,median,mean,i80_lo"));
        assert!(!text.contains("-0.0000"));
        let back = read_summary_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert!((back[0].1.i95.1 - s.i95.1).abs() < 5e-5);
    }

    proptest! {
        #[test]
        fn verdict_symmetric(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
            prop_assert_eq!(verdict(Statistic::Mode, a, b, c).discrepant, verdict(Statistic::Mode, b, a, c).discrepant);
        }
    }
}
