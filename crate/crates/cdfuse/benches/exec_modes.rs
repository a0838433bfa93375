//! Sequential against rayon execution for the data-parallel kernels.
//! Without the `parallel` feature both arms run sequentially.

use cdfuse::bayes::{mh_sample, LikelihoodJoint, McmcConfig, PosteriorJoint, PriorJoint};
use cdfuse::cd::{cd_validate_uniformity, trial_cd_wald, BinomialTrialModel};
use cdfuse::datasets::{MIGRAINE_TRIAL, SKEWED_INDEP_BETA};
use cdfuse::diagnostics::directional_scan_with;
use cdfuse::elicit::PriorSpec;
use cdfuse::ExecMode;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [ExecMode; 2] = [ExecMode::Sequential, ExecMode::Parallel];

fn prior() -> PriorSpec {
    let [q0, r0, q1, r1] = SKEWED_INDEP_BETA;
    PriorSpec::indep_beta(q0, r0, q1, r1).unwrap()
}

fn mh_chains(c: &mut Criterion) {
    let p = prior();
    let mut g = c.benchmark_group("mh_chains");
    g.sample_size(10);
    for exec in MODES {
        let cfg = McmcConfig { chains: 64, burn_in: 5_000, exec, ..McmcConfig::default() };
        g.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| mh_sample(&p, &MIGRAINE_TRIAL, &cfg).unwrap())
        });
    }
    g.finish();
}

fn directional_scan(c: &mut Criterion) {
    let p = prior();
    let (pj, lj, qj) = (PriorJoint(&p), LikelihoodJoint(MIGRAINE_TRIAL), PosteriorJoint { prior: &p, data: MIGRAINE_TRIAL });
    let mut g = c.benchmark_group("directional_scan");
    g.sample_size(10);
    for exec in MODES {
        g.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| directional_scan_with(&pj, &lj, &qj, 90, 256, 256, exec).unwrap())
        });
    }
    g.finish();
}

fn uniformity(c: &mut Criterion) {
    let m = BinomialTrialModel::new(680, 590, 0.46, 0.56).unwrap();
    let mut g = c.benchmark_group("cd_uniformity");
    g.sample_size(10);
    for exec in MODES {
        g.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| cd_validate_uniformity(&m, trial_cd_wald, 2000, 1, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, mh_chains, directional_scan, uniformity);
criterion_main!(benches);
