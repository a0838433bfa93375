use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::ConfDist;
use crate::bayes::TrialData;
use crate::error::{Error, Result};
use crate::par::{self, ExecMode};
use crate::stats::{ks_uniform, KsResult};

/// Data-generating model with a known true δ.
pub trait SamplingModel: Sync {
    type Data;
    fn draw(&self, rng: &mut ChaCha8Rng) -> Self::Data;
    fn true_delta(&self) -> f64;
}

/// Two independent binomial arms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialTrialModel {
    pub n0: u64,
    pub n1: u64,
    pub p0: f64,
    pub p1: f64,
}

impl BinomialTrialModel {
    pub fn new(n0: u64, n1: u64, p0: f64, p1: f64) -> Result<Self> {
        if n0 == 0 || n1 == 0 || !(0.0..=1.0).contains(&p0) || !(0.0..=1.0).contains(&p1) {
            return Err(Error::Usage("binomial model needs n >= 1 and p in [0, 1]".into()));
        }
        Ok(Self { n0, n1, p0, p1 })
    }
}

impl SamplingModel for BinomialTrialModel {
    type Data = TrialData;

    fn draw(&self, rng: &mut ChaCha8Rng) -> TrialData {
        let s0 = Binomial::new(self.n0, self.p0).expect("validated").sample(rng);
        let s1 = Binomial::new(self.n1, self.p1).expect("validated").sample(rng);
        TrialData { n0: self.n0, s0, n1: self.n1, s1 }
    }

    fn true_delta(&self) -> f64 {
        self.p1 - self.p0
    }
}

/// Two independent studies of the same δ, e.g. for checking a combined CD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTrialModel {
    pub first: BinomialTrialModel,
    pub second: BinomialTrialModel,
}

impl PairedTrialModel {
    pub fn new(first: BinomialTrialModel, second: BinomialTrialModel) -> Result<Self> {
        if (first.true_delta() - second.true_delta()).abs() > 1e-12 {
            return Err(Error::Usage("paired studies must share the true delta".into()));
        }
        Ok(Self { first, second })
    }
}

impl SamplingModel for PairedTrialModel {
    type Data = (TrialData, TrialData);

    fn draw(&self, rng: &mut ChaCha8Rng) -> Self::Data {
        (self.first.draw(rng), self.second.draw(rng))
    }

    fn true_delta(&self) -> f64 {
        self.first.true_delta()
    }
}

/// KS test that H(δ0) is uniform over `trials` replications. Replication i
/// uses stream i of a ChaCha8 generator seeded with `seed`.
pub fn cd_validate_uniformity<M, C>(model: &M, construct: C, trials: usize, seed: u64, exec: ExecMode) -> Result<KsResult>
where
    M: SamplingModel,
    C: Fn(&M::Data) -> Result<ConfDist> + Sync,
{
    if trials < 2 {
        return Err(Error::Usage("uniformity check needs at least 2 replications".into()));
    }
    let theta = model.true_delta();
    let u = par::try_map_indexed(trials, exec, |i| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let data = model.draw(&mut rng);
        Ok(construct(&data)?.cdf(theta))
    })?;
    ks_uniform(&u)
}
