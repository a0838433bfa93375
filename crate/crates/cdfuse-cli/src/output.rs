//! Artifact files for an analysis run.

use std::fs;
use std::path::{Path, PathBuf};

use cdfuse::diagnostics::write_summary_csv;
use cdfuse::{Error, Result};
use serde::Serialize;

use crate::config::RunConfig;
use crate::pipeline::Analysis;

/// Digits after the point in table CSVs.
pub const TABLE_DECIMALS: usize = 4;

#[derive(Serialize)]
struct RunRecord<'a> {
    prior: &'a str,
    fitted_family: Option<&'a str>,
    hyperparameters: Option<Vec<f64>>,
    pooled_mean: f64,
    pooled_sd: f64,
    pooled_weights: &'a [f64],
    combination_weights: Option<(f64, f64)>,
    mcmc_acceptance: Option<f64>,
    config: &'a RunConfig,
}

pub fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    s.push('\n');
    Ok(s)
}

fn write(dir: &Path, name: &str, bytes: &[u8], out: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, bytes)?;
    out.push(p);
    Ok(())
}

pub fn summary_csv(a: &Analysis) -> Result<Vec<u8>> {
    let rows: Vec<_> = a.curves.iter().map(|c| (c.name.clone(), c.summary)).collect();
    let mut buf = vec![];
    write_summary_csv(&mut buf, &rows, TABLE_DECIMALS)?;
    Ok(buf)
}

/// Writes every artifact into `dir` and returns their paths in write order.
pub fn write_artifacts(a: &Analysis, cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = vec![];
    for c in &a.curves {
        let mut buf = vec![];
        c.cd.to_csv(&mut buf)?;
        write(dir, &format!("{}.csv", c.name), &buf, &mut out)?;
    }
    write(dir, "summary.csv", &summary_csv(a)?, &mut out)?;
    write(dir, "verdict.json", to_json(&a.report)?.as_bytes(), &mut out)?;

    let rec = RunRecord {
        prior: cfg.prior.name(),
        fitted_family: a.fitted.as_ref().map(|s| s.name()),
        hyperparameters: a.fitted.as_ref().map(|s| s.family.hyperparameters()),
        pooled_mean: a.pooled.mean,
        pooled_sd: a.pooled.sd,
        pooled_weights: &a.pooled.weights,
        combination_weights: a.weights.map(|w| (w.w1, w.w2)),
        mcmc_acceptance: a.mcmc_acceptance,
        config: cfg,
    };
    write(dir, "run.json", to_json(&rec)?.as_bytes(), &mut out)?;

    if !a.scan.is_empty() {
        let mut wr = csv::Writer::from_writer(vec![]);
        wr.write_record(["angle_deg", "a", "b", "prior_mode", "likelihood_mode", "posterior_mode", "discrepant"])?;
        for e in &a.scan {
            let v = &e.verdict;
            let (x, y) = v.direction.unwrap_or((f64::NAN, f64::NAN));
            wr.write_record([
                format!("{}", e.angle_deg),
                format!("{x}"),
                format!("{y}"),
                format!("{}", v.prior_value),
                format!("{}", v.likelihood_value),
                format!("{}", v.posterior_value),
                v.discrepant.to_string(),
            ])?;
        }
        let buf = wr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        write(dir, "scan.csv", &buf, &mut out)?;
    }
    for (name, set) in &a.contours {
        let mut buf = vec![];
        set.to_csv(&mut buf)?;
        write(dir, &format!("contours_{name}.csv"), &buf, &mut out)?;
    }
    Ok(out)
}
