//! Goodness-of-fit tests and small sample-moment helpers.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Asymptotic Kolmogorov survival function with Stephens' small-sample
/// correction applied to the statistic.
pub fn kolmogorov_sf(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test of `samples` against a continuous `cdf`.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::Validation("KS test needs at least one sample".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
    }
    Ok(KsResult { statistic: d, p_value: kolmogorov_sf(d, n), n })
}

pub fn ks_uniform(u: &[f64]) -> Result<KsResult> {
    ks_test(u, |x| x.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit. Cells are pooled in order until each pooled
/// cell has at least `min_expected` expected counts.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], min_expected: f64) -> Result<ChiSquareResult> {
    if observed.len() != expected.len() {
        return Err(Error::Validation("observed/expected length mismatch".into()));
    }
    let tot_o: f64 = observed.iter().map(|&o| o as f64).sum();
    let tot_e: f64 = expected.iter().sum();
    let scale = tot_o / tot_e;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o as f64;
        e_acc += e * scale;
        if e_acc >= min_expected {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => cells.push((o_acc, e_acc)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::Validation("too few cells for a chi-square test".into()));
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(ChiSquareResult { statistic: stat, dof, p_value: dist.sf(stat) })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ks_accepts_uniform_rejects_shifted() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_uniform(&u).unwrap().p_value > 0.01);
        let v: Vec<f64> = u.iter().map(|x| x.powf(1.3)).collect();
        assert!(ks_uniform(&v).unwrap().p_value < 0.01);
    }

    #[test]
    fn kolmogorov_reference_points() {
        // large-n limit: P(K > 1.358) ≈ 0.05, P(K > 1.628) ≈ 0.01
        let n = 1_000_000;
        let s = (n as f64).sqrt();
        assert!((kolmogorov_sf(1.3581 / s, n) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.6276 / s, n) - 0.01).abs() < 5e-4);
    }

    #[test]
    fn chi_square_pools_small_cells() {
        let obs = [10, 12, 0, 1, 9];
        let exp = [10.0, 11.0, 0.5, 0.5, 10.0];
        let r = chi_square_gof(&obs, &exp, 5.0).unwrap();
        assert_eq!(r.dof, 2);
        assert!(r.p_value > 0.5);
    }
}
