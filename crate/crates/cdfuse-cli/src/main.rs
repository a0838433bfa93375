use std::path::PathBuf;
use std::process::ExitCode;

use cdfuse::bayes::SamplerMode;
use cdfuse::sim::{PatientDraw, SimConfig};
use cdfuse::{Error, Result};
use cdfuse_cli::config::{parse_trial, PriorChoice, RunConfig};
use cdfuse_cli::output::{summary_csv, write_artifacts};
use cdfuse_cli::pipeline::{analyze, load_survey};
use cdfuse_cli::reproduce::{reproduce, tally, write_report, Table};
use cdfuse_cli::simulate::run_simulate;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cdfuse", version, about = "Fuse expert opinion with trial data for a difference of proportions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Prior, likelihood and posterior (or combined CD) for one prior family.
    Analyze(RunArgs),
    /// Draw a synthetic survey from a bivariate-beta truth.
    Simulate(SimArgs),
    /// Compare computed summaries with a reference table.
    Reproduce {
        #[arg(value_enum)]
        table: Table,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampler {
    Adaptive,
    PaperMode,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    survey: Option<PathBuf>,
    /// Trial counts n0,s0,n1,s1.
    #[arg(long)]
    trial: Option<String>,
    #[arg(long, value_enum)]
    prior: Option<PriorChoice>,
    #[arg(long, allow_negative_numbers = true)]
    mu0: Option<f64>,
    #[arg(long)]
    sigma0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// MCMC chains.
    #[arg(long)]
    chains: Option<usize>,
    /// MCMC burn-in iterations per chain.
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long, value_enum)]
    sampler: Option<Sampler>,
    /// Directions for the directional discrepancy scan.
    #[arg(long)]
    scan_angles: Option<usize>,
    /// Comma-separated joint-density levels to contour.
    #[arg(long, value_delimiter = ',')]
    contour_levels: Option<Vec<f64>>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_json_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = &self.survey {
            c.survey = Some(s.clone());
        }
        if let Some(t) = &self.trial {
            c.trial = parse_trial(t)?;
        }
        if let Some(p) = self.prior {
            c.prior = p;
        }
        c.mu0 = self.mu0.or(c.mu0);
        c.sigma0 = self.sigma0.or(c.sigma0);
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        if let Some(n) = self.chains {
            c.mcmc.chains = n;
        }
        if let Some(n) = self.burn_in {
            c.mcmc.burn_in = n;
        }
        if let Some(s) = self.sampler {
            c.mcmc.mode = match s {
                Sampler::Adaptive => SamplerMode::Adaptive,
                Sampler::PaperMode => SamplerMode::PaperMode,
            };
        }
        if let Some(n) = self.scan_angles {
            c.scan_angles = n;
        }
        if let Some(l) = &self.contour_levels {
            c.contour_levels = l.clone();
        }
        Ok(c)
    }
}

#[derive(Args)]
struct SimArgs {
    /// JSON simulation config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experts: Option<usize>,
    /// Virtual patients per expert.
    #[arg(long)]
    patients: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// One (p0, p1) draw per expert with binomial patient outcomes.
    #[arg(long)]
    per_expert: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl SimArgs {
    fn resolve(&self) -> Result<SimConfig> {
        let mut c = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Validation(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Validation(format!("config: {e}")))?
            }
            None => SimConfig::default(),
        };
        if let Some(n) = self.experts {
            c.experts = n;
        }
        if let Some(n) = self.patients {
            c.patients_per_expert = n;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if self.per_expert {
            c.draw = PatientDraw::PerExpert;
        }
        Ok(c)
    }
}

fn set_threads() -> Result<()> {
    let Ok(v) = std::env::var("CDFUSE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Validation(format!("CDFUSE_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Validation(format!("cannot set thread count: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    set_threads()?;
    match cli.cmd {
        Cmd::Analyze(args) => {
            let cfg = args.resolve()?;
            cfg.validate()?;
            let survey = load_survey(&cfg)?;
            let a = analyze(&cfg, &survey)?;
            write_artifacts(&a, &cfg, &cfg.out)?;
            print!("{}", String::from_utf8_lossy(&summary_csv(&a)?));
            for v in &a.report.verdicts {
                println!("{}: discrepant={}", v.statistic.name(), v.discrepant);
            }
        }
        Cmd::Simulate(args) => {
            let cfg = args.resolve()?;
            let (s, _) = run_simulate(&cfg, &args.out)?;
            println!(
                "wrote {} experts to {} ({} draws clamped)",
                s.table.rows.len(),
                args.out.join("survey.csv").display(),
                s.clamped
            );
        }
        Cmd::Reproduce { table, run } => {
            let cfg = run.resolve()?;
            let cells = reproduce(table, &cfg)?;
            let p = write_report(table, &cells, &cfg.out)?;
            let (pass, fail, info, skipped) = tally(&cells);
            println!("{}: {pass} pass, {fail} fail, {info} info, {skipped} skipped", p.display());
            for c in cells.iter().filter(|c| c.status.label() == "fail") {
                println!(
                    "  fail {}/{}/{}: computed {:.4}, reference {}",
                    c.block,
                    c.curve,
                    c.statistic,
                    c.computed.unwrap_or(f64::NAN),
                    c.reference
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cdfuse: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
