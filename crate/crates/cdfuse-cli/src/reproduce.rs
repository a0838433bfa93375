//! Side-by-side comparison of computed summaries with the reference tables.

use std::collections::BTreeMap;
use std::path::Path;

use cdfuse::bayes::{marginalize_delta, PriorJoint};
use cdfuse::cd::{combine_cds, trial_cd_profile, wald_se, CombinerSpec, ConfDist, CD_GRID_POINTS};
use cdfuse::datasets::{
    skewed_scenario_targets, MIGRAINE_TRIAL, SKEWED_HIER_BETA, SKEWED_HIER_BIBETA, SKEWED_INDEP_BETA, SKEWED_TRUTH,
};
use cdfuse::diagnostics::{summarize_cd, SummaryReport};
use cdfuse::elicit::{fit_bibeta, fit_hier_beta, fit_hier_bibeta, fit_indep_beta, PriorSpec, SurveyTable};
use cdfuse::sim::{simulate_survey, SimConfig, SIM_EDGES};
use cdfuse::{Error, Result};
use serde::Deserialize;

use crate::config::{PriorChoice, RunConfig};
use crate::pipeline::{analyze, load_survey};

const MANIFEST: &str = include_str!("../../../data/reference_tables.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Table {
    Table2,
    Table3,
}

impl Table {
    pub fn name(self) -> &'static str {
        match self {
            Table::Table2 => "table2",
            Table::Table3 => "table3",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefRow {
    pub block: String,
    pub curve: String,
    #[serde(default)]
    pub statistics: Option<Vec<String>>,
    pub values: Vec<f64>,
    /// Absolute (or relative, see `relative`) tolerance per cell; null means reported only.
    pub tolerance: Vec<Option<f64>>,
    #[serde(default)]
    pub relative: bool,
    /// Inputs the row cannot be computed without.
    #[serde(default)]
    pub needs: Vec<String>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
struct Manifest {
    summary_statistics: Vec<String>,
    table2: Vec<RefRow>,
    table3: Vec<RefRow>,
}

fn manifest() -> Manifest {
    serde_json::from_str(MANIFEST).expect("checked-in manifest parses")
}

pub fn reference_rows(t: Table) -> Vec<RefRow> {
    let m = manifest();
    match t {
        Table::Table2 => m.table2,
        Table::Table3 => m.table3,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Pass,
    Fail,
    Info,
    Skipped,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Info => "info",
            Status::Skipped => "skipped: missing input",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub block: String,
    pub curve: String,
    pub statistic: String,
    pub computed: Option<f64>,
    pub reference: f64,
    pub tolerance: Option<f64>,
    pub relative: bool,
    pub status: Status,
}

impl Cell {
    pub fn delta(&self) -> Option<f64> {
        self.computed.map(|c| c - self.reference)
    }
}

fn summary_values(s: &SummaryReport) -> Vec<f64> {
    vec![s.mode, s.median, s.mean, s.i80.0, s.i80.1, s.i90.0, s.i90.1, s.i95.0, s.i95.1]
}

type Computed = BTreeMap<(String, String), Vec<f64>>;

fn put(m: &mut Computed, block: &str, curve: &str, v: Vec<f64>) {
    m.insert((block.to_string(), curve.to_string()), v);
}

const BAYES: [PriorChoice; 4] =
    [PriorChoice::IndepBeta, PriorChoice::HierBeta, PriorChoice::Bibeta, PriorChoice::HierBibeta];

/// Settings carried over from the user's config; data and prior come from the table.
fn base_config(cfg: &RunConfig, prior: PriorChoice) -> RunConfig {
    RunConfig {
        prior,
        survey: None,
        trial: MIGRAINE_TRIAL,
        targets: None,
        hyperparameters: None,
        scan_angles: 0,
        contour_levels: vec![],
        ..cfg.clone()
    }
}

fn has_inputs(cfg: &RunConfig, needs: &[String]) -> bool {
    needs.iter().all(|n| match n.as_str() {
        "mu0" => cfg.mu0.is_some(),
        "sigma0" => cfg.sigma0.is_some(),
        _ => false,
    })
}

fn table2(cfg: &RunConfig, rows: &[RefRow]) -> Result<Computed> {
    let mut m = Computed::new();
    let base = base_config(cfg, PriorChoice::CdNormal);
    let survey = load_survey(&base)?;
    for p in [PriorChoice::CdNormal, PriorChoice::CdHist] {
        let a = analyze(&base_config(cfg, p), &survey)?;
        for c in &a.curves {
            let block = if c.name == "likelihood" { "likelihood" } else { p.name() };
            put(&mut m, block, &c.name, summary_values(&c.summary));
        }
    }
    for p in BAYES {
        let needs: Vec<String> =
            rows.iter().filter(|r| r.block == p.name()).flat_map(|r| r.needs.clone()).collect();
        if !has_inputs(cfg, &needs) {
            continue;
        }
        let a = analyze(&base_config(cfg, p), &survey)?;
        for c in a.curves.iter().filter(|c| c.name != "likelihood") {
            put(&mut m, p.name(), &c.name, summary_values(&c.summary));
        }
    }
    Ok(m)
}

/// The simulated skewed-scenario survey used by Table 3.
pub fn table3_survey(seed: u64) -> Result<SurveyTable> {
    Ok(simulate_survey(&SimConfig { seed, ..SimConfig::default() })?.table)
}

fn reference_hyper(p: PriorChoice) -> Vec<f64> {
    match p {
        PriorChoice::IndepBeta => SKEWED_INDEP_BETA.to_vec(),
        PriorChoice::HierBeta => SKEWED_HIER_BETA.to_vec(),
        PriorChoice::Bibeta => vec![SKEWED_TRUTH.q0, SKEWED_TRUTH.q1, SKEWED_TRUTH.r],
        _ => SKEWED_HIER_BIBETA.to_vec(),
    }
}

/// Moment-solver fit of each family to the skewed-scenario targets.
pub fn table3_fit(p: PriorChoice, cfg: &RunConfig) -> Result<PriorSpec> {
    let t = skewed_scenario_targets();
    match p {
        PriorChoice::IndepBeta => fit_indep_beta(&t),
        PriorChoice::HierBeta => fit_hier_beta(&t),
        PriorChoice::Bibeta => fit_bibeta(&t),
        PriorChoice::HierBibeta => fit_hier_bibeta(&t, cfg.hier_var),
        _ => Err(Error::Usage("CD priors are not fitted".into())),
    }
}

/// Prior CD equal to the δ marginal of the true BIBETA, combined with the profile CD.
pub fn bibeta_marginal_cd(cfg: &RunConfig) -> Result<(ConfDist, ConfDist)> {
    let truth = PriorSpec::bibeta(SKEWED_TRUTH.q0, SKEWED_TRUTH.q1, SKEWED_TRUTH.r)?;
    let prior = ConfDist::from_density(marginalize_delta(&PriorJoint(&truth), cfg.resolution)?)?;
    let lik = trial_cd_profile(&MIGRAINE_TRIAL, CD_GRID_POINTS)?;
    let w = CombinerSpec::inverse_sd(prior.sd(), wald_se(&MIGRAINE_TRIAL)?)?;
    let combined = combine_cds(&prior, &lik, w)?;
    Ok((prior, combined))
}

fn table3(cfg: &RunConfig) -> Result<Computed> {
    let mut m = Computed::new();
    let survey = table3_survey(cfg.seed)?;
    let cd = analyze(&RunConfig { bin_edges: SIM_EDGES.to_vec(), ..base_config(cfg, PriorChoice::CdHist) }, &survey)?;
    for c in &cd.curves {
        let block = if c.name == "likelihood" { "likelihood" } else { "cd-hist" };
        put(&mut m, block, &c.name, summary_values(&c.summary));
    }
    let (prior, combined) = bibeta_marginal_cd(cfg)?;
    put(&mut m, "cd-bibeta-marginal", "prior_cd", summary_values(&summarize_cd(&prior)));
    put(&mut m, "cd-bibeta-marginal", "combined_cd", summary_values(&summarize_cd(&combined)));
    for p in BAYES {
        put(&mut m, p.name(), "fit", table3_fit(p, cfg)?.family.hyperparameters());
        let run = RunConfig { hyperparameters: Some(reference_hyper(p)), ..base_config(cfg, p) };
        let a = analyze(&run, &survey)?;
        for c in a.curves.iter().filter(|c| c.name != "likelihood") {
            put(&mut m, p.name(), &c.name, summary_values(&c.summary));
        }
    }
    Ok(m)
}

pub fn reproduce(t: Table, cfg: &RunConfig) -> Result<Vec<Cell>> {
    let m = manifest();
    let rows = reference_rows(t);
    let computed = match t {
        Table::Table2 => table2(cfg, &rows)?,
        Table::Table3 => table3(cfg)?,
    };
    let mut cells = vec![];
    for r in &rows {
        let names = r.statistics.clone().unwrap_or_else(|| m.summary_statistics.clone());
        if names.len() != r.values.len() || r.tolerance.len() != r.values.len() {
            return Err(Error::Validation(format!("manifest row {}/{} is malformed", r.block, r.curve)));
        }
        let got = computed.get(&(r.block.clone(), r.curve.clone()));
        for (k, name) in names.iter().enumerate() {
            let reference = r.values[k];
            let tol = r.tolerance[k];
            let computed = got.map(|v| v[k]);
            let status = match (computed, tol) {
                (None, _) => Status::Skipped,
                (Some(_), None) => Status::Info,
                (Some(c), Some(tol)) => {
                    let err = if r.relative { ((c - reference) / reference).abs() } else { (c - reference).abs() };
                    if err <= tol + 1e-12 {
                        Status::Pass
                    } else {
                        Status::Fail
                    }
                }
            };
            cells.push(Cell {
                block: r.block.clone(),
                curve: r.curve.clone(),
                statistic: name.clone(),
                computed,
                reference,
                tolerance: tol,
                relative: r.relative,
                status,
            });
        }
    }
    Ok(cells)
}

pub const REPRODUCE_HEADER: [&str; 8] =
    ["block", "curve", "statistic", "computed", "reference", "delta", "tolerance", "status"];

pub fn cells_csv(cells: &[Cell]) -> Result<Vec<u8>> {
    let mut wr = csv::Writer::from_writer(vec![]);
    wr.write_record(REPRODUCE_HEADER)?;
    let f4 = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
    for c in cells {
        let tol = match c.tolerance {
            Some(t) if c.relative => format!("rel {t}"),
            Some(t) => format!("{t}"),
            None => String::new(),
        };
        wr.write_record([
            c.block.clone(),
            c.curve.clone(),
            c.statistic.clone(),
            f4(c.computed),
            format!("{}", c.reference),
            f4(c.delta()),
            tol,
            c.status.label().to_string(),
        ])?;
    }
    wr.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn write_report(t: Table, cells: &[Cell], dir: &Path) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let p = dir.join(format!("reproduce_{}.csv", t.name()));
    std::fs::write(&p, cells_csv(cells)?)?;
    Ok(p)
}

/// (pass, fail, info, skipped)
pub fn tally(cells: &[Cell]) -> (usize, usize, usize, usize) {
    let n = |s: Status| cells.iter().filter(|c| c.status == s).count();
    (n(Status::Pass), n(Status::Fail), n(Status::Info), n(Status::Skipped))
}
