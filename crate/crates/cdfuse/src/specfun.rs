//! Special functions and the beta-family kernels.
//!
//! `hyp3f2_unit` sums the unit-argument series after a Thomae transformation
//! that moves the largest numerator parameter into the convergence margin;
//! what remains of a slowly converging tail is removed by Richardson
//! extrapolation on the partial sums.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::erf;
use statrs::function::gamma as sgamma;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn ln_gamma(x: f64) -> f64 {
    sgamma::ln_gamma(x)
}

/// Stirling remainder ln Γ(x) − [(x − ½) ln x − x + ln √(2π)], valid for x ≥ 10.
fn lgammacor(x: f64) -> f64 {
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let x2 = 1.0 / (x * x);
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * x2 + c;
    }
    acc / x
}

/// ln B(a, b).
pub fn log_beta_fn(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("log_beta_fn needs a, b > 0 (got {a}, {b})")));
    }
    let p = a.min(b);
    let q = a.max(b);
    let pq = p + q;
    let v = if p >= 10.0 {
        let corr = lgammacor(p) + lgammacor(q) - lgammacor(pq);
        -0.5 * q.ln() + LN_SQRT_2PI + corr + (p - 0.5) * (p / pq).ln() + q * (-p / pq).ln_1p()
    } else if q >= 10.0 {
        let corr = lgammacor(q) - lgammacor(pq);
        ln_gamma(p) + corr + p - p * pq.ln() + (q - 0.5) * (-p / pq).ln_1p()
    } else {
        ln_gamma(p) + ln_gamma(q) - ln_gamma(pq)
    };
    Ok(v)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Φ⁻¹(p) for p in (0, 1); ±∞ at the ends.
pub fn norm_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p)
}

/// `k * ln(x)` with 0·ln 0 = 0; otherwise ln 0 gives a signed infinity.
pub(crate) fn xlogy(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * x.ln()
    }
}

/// `k * ln(1 - x)` with the same convention.
pub(crate) fn xlog1my(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * (-x).ln_1p()
    }
}

// ---------------------------------------------------------------------------
// 3F2 at unit argument

fn is_nonpos_int(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Partial sum of the first `n` terms of ₃F₂(a,b,c;d,e;1), no acceleration.
pub fn hyp3f2_partial_sum(a: f64, b: f64, c: f64, d: f64, e: f64, n: usize) -> f64 {
    let mut t = 1.0;
    let mut s = 0.0;
    for k in 0..n {
        s += t;
        let kf = k as f64;
        t *= (a + kf) * (b + kf) * (c + kf) / ((d + kf) * (e + kf) * (kf + 1.0));
    }
    s
}

/// ₃F₂(a, b, c; d, e; 1) to about 1e-12 relative accuracy.
pub fn hyp3f2_unit(a: f64, b: f64, c: f64, d: f64, e: f64) -> Result<f64> {
    if [a, b, c, d, e].iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("3F2 parameters must be finite".into()));
    }
    if a == 0.0 || b == 0.0 || c == 0.0 {
        return Ok(1.0);
    }
    if is_nonpos_int(d) || is_nonpos_int(e) {
        return Err(Error::Domain(format!(
            "3F2 denominator parameter is a non-positive integer ({d}, {e})"
        )));
    }
    let terminates = [a, b, c].iter().any(|&x| is_nonpos_int(x));
    let s = d + e - a - b - c;
    if !terminates && s <= 0.0 {
        return Err(Error::Domain(format!(
            "3F2 at unit argument diverges: d+e-a-b-c = {s} <= 0"
        )));
    }
    if terminates {
        return Ok(sum_series(a, b, c, d, e, f64::INFINITY)?);
    }

    let mut num = [a, b, c];
    num.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let [a, b, c] = num;
    // Thomae: 3F2(a,b,c;d,e) = Γ(d)Γ(e)Γ(s)/(Γ(a)Γ(s+b)Γ(s+c)) 3F2(d-a,e-a,s;s+b,s+c),
    // whose series has convergence margin a instead of s.
    let all_pos = a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0 && e > 0.0;
    if all_pos && a > s && !is_nonpos_int(s + b) && !is_nonpos_int(s + c) {
        let ln_pre = ln_gamma(d) + ln_gamma(e) + ln_gamma(s)
            - ln_gamma(a)
            - ln_gamma(s + b)
            - ln_gamma(s + c);
        let inner = sum_series(d - a, e - a, s, s + b, s + c, a)?;
        return Ok(ln_pre.exp() * inner);
    }
    sum_series(a, b, c, d, e, s)
}

/// Kahan-summed series; when the raw tail is too slow, Richardson
/// extrapolation over partial sums at N0·2^j with tail exponents margin+k.
fn sum_series(a: f64, b: f64, c: f64, d: f64, e: f64, margin: f64) -> Result<f64> {
    const CAP: u64 = 10_000_000;
    const TOL: f64 = 1e-13;
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs()).max(e.abs());
    let mut next_mark = (4.0 * scale).max(32.0) as u64;
    let mut marks: Vec<f64> = Vec::new();
    let mut table: Vec<Vec<f64>> = Vec::new();

    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut t = 1.0f64;
    let mut k: u64 = 0;
    loop {
        // Kahan step
        let y = t - comp;
        let tmp = sum + y;
        comp = (tmp - sum) - y;
        sum = tmp;
        k += 1;
        let kf = (k - 1) as f64;
        t *= (a + kf) * (b + kf) * (c + kf) / ((d + kf) * (e + kf) * (kf + 1.0));
        if t == 0.0 {
            return Ok(sum);
        }
        // crude tail bound for a term decaying like k^-(margin+1)
        if margin.is_finite() && k > 2 * scale as u64 + 8 {
            let tail = t.abs() * (k as f64 + 1.0) / margin;
            if tail <= 1e-17 * sum.abs() {
                return Ok(sum);
            }
        }
        if k == next_mark {
            marks.push(sum);
            let j = marks.len() - 1;
            let mut row = vec![sum];
            if j > 0 && margin.is_finite() {
                for m in 1..=j {
                    let p = margin + (m - 1) as f64;
                    let f = 2f64.powf(p);
                    let v = (f * row[m - 1] - table[j - 1][m - 1]) / (f - 1.0);
                    row.push(v);
                }
            }
            table.push(row);
            if j >= 3 {
                let cur = table[j][j];
                let prev = table[j - 1][j - 1];
                if (cur - prev).abs() <= TOL * cur.abs() {
                    return Ok(cur);
                }
            }
            next_mark *= 2;
        }
        if k >= CAP {
            return Err(Error::Convergence {
                what: "3F2 series",
                iterations: k,
                partial: sum,
                last_term: t,
            });
        }
    }
}

// ---------------------------------------------------------------------------
// Parameter types

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
}

impl GammaParams {
    pub fn new(shape: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::Domain(format!("gamma shape must be > 0 (got {shape})")));
        }
        Ok(Self { shape })
    }

    /// Log-density of the unit-scale gamma.
    pub fn logpdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (self.shape - 1.0) * x.ln() - x - ln_gamma(self.shape)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Gamma::new(self.shape, 1.0).expect("validated shape").sample(rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub q: f64,
    pub r: f64,
}

impl BetaParams {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        if !(q > 0.0 && r > 0.0 && q.is_finite() && r.is_finite()) {
            return Err(Error::Domain(format!("beta shapes must be > 0 (got {q}, {r})")));
        }
        Ok(Self { q, r })
    }

    pub fn mean(&self) -> f64 {
        self.q / (self.q + self.r)
    }

    pub fn var(&self) -> f64 {
        let s = self.q + self.r;
        self.q * self.r / (s * s * (s + 1.0))
    }

    pub fn logpdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return f64::NEG_INFINITY;
        }
        let lb = log_beta_fn(self.q, self.r).expect("validated shapes");
        xlogy(self.q - 1.0, x) + xlog1my(self.r - 1.0, x) - lb
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.logpdf(x).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = Gamma::new(self.q, 1.0).expect("validated").sample(rng);
        let w = Gamma::new(self.r, 1.0).expect("validated").sample(rng);
        u / (u + w)
    }
}

/// Olkin–Liu bivariate beta: p0 = U/(U+W), p1 = V/(V+W) with U, V, W
/// independent unit gammas of shapes q0, q1, r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BibetaParams {
    pub q0: f64,
    pub q1: f64,
    pub r: f64,
}

impl BibetaParams {
    pub fn new(q0: f64, q1: f64, r: f64) -> Result<Self> {
        for (name, v) in [("q0", q0), ("q1", q1), ("r", r)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("bibeta {name} must be > 0 (got {v})")));
            }
        }
        Ok(Self { q0, q1, r })
    }

    /// ln of Γ(q0)Γ(q1)Γ(r)/Γ(q0+q1+r), the normalizer of the kernel below.
    pub fn log_normalizer(&self) -> f64 {
        ln_gamma(self.q0) + ln_gamma(self.q1) + ln_gamma(self.r)
            - ln_gamma(self.q0 + self.q1 + self.r)
    }

    pub fn mean_p0(&self) -> f64 {
        self.q0 / (self.q0 + self.r)
    }

    pub fn mean_p1(&self) -> f64 {
        self.q1 / (self.q1 + self.r)
    }

    pub fn marginal_p0(&self) -> BetaParams {
        BetaParams { q: self.q0, r: self.r }
    }

    pub fn marginal_p1(&self) -> BetaParams {
        BetaParams { q: self.q1, r: self.r }
    }

    /// E(p0 p1) = q0 q1 Γ(q0+r) Γ(q1+r) / (Γ(r) S Γ(S+1)) · ₃F₂(q0+1, q1+1, S; S+1, S+1; 1),
    /// S = q0 + q1 + r.
    pub fn cross_moment(&self) -> Result<f64> {
        let (q0, q1, r) = (self.q0, self.q1, self.r);
        let s = q0 + q1 + r;
        let ln_pre = q0.ln() + q1.ln() + ln_gamma(q0 + r) + ln_gamma(q1 + r)
            - ln_gamma(r)
            - s.ln()
            - ln_gamma(s + 1.0);
        let f = hyp3f2_unit(q0 + 1.0, q1 + 1.0, s, s + 1.0, s + 1.0)?;
        Ok(ln_pre.exp() * f)
    }

    /// E(p1 − p0)².
    pub fn delta_second_moment(&self) -> Result<f64> {
        let b0 = self.marginal_p0();
        let b1 = self.marginal_p1();
        let e00 = b0.var() + b0.mean().powi(2);
        let e11 = b1.var() + b1.mean().powi(2);
        Ok(e00 + e11 - 2.0 * self.cross_moment()?)
    }

    pub fn delta_mean(&self) -> f64 {
        self.mean_p1() - self.mean_p0()
    }

    pub fn delta_var(&self) -> Result<f64> {
        Ok(self.delta_second_moment()? - self.delta_mean().powi(2))
    }
}

/// Unnormalized log-density
/// (q0−1)ln p0 + (q1−1)ln p1 + (q1+r−1)ln(1−p0) + (q0+r−1)ln(1−p1) − S ln(1−p0 p1).
///
/// At exact 0/1 inputs a term with positive exponent gives −∞, a negative
/// exponent +∞, and a zero exponent contributes nothing.
pub fn bibeta_logpdf(p0: f64, p1: f64, params: &BibetaParams) -> f64 {
    let BibetaParams { q0, q1, r } = *params;
    let s = q0 + q1 + r;
    xlogy(q0 - 1.0, p0) + xlogy(q1 - 1.0, p1) + xlog1my(q1 + r - 1.0, p0)
        + xlog1my(q0 + r - 1.0, p1)
        - xlog1my(s, p0 * p1)
}

/// Normalized log-density.
pub fn bibeta_logpdf_normalized(p0: f64, p1: f64, params: &BibetaParams) -> f64 {
    bibeta_logpdf(p0, p1, params) - params.log_normalizer()
}

pub fn bibeta_sample<R: Rng + ?Sized>(params: &BibetaParams, rng: &mut R) -> (f64, f64) {
    let u = Gamma::new(params.q0, 1.0).expect("validated").sample(rng);
    let v = Gamma::new(params.q1, 1.0).expect("validated").sample(rng);
    let w = Gamma::new(params.r, 1.0).expect("validated").sample(rng);
    (u / (u + w), v / (v + w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_beta_trivial() {
        assert!(log_beta_fn(1.0, 1.0).unwrap().abs() < 1e-15);
        assert!(rel(log_beta_fn(2.0, 2.0).unwrap(), (1.0f64 / 6.0).ln()) < 1e-14);
        assert!(log_beta_fn(0.0, 1.0).is_err());
        assert!(log_beta_fn(-1.0, 1.0).is_err());
    }

    #[test]
    fn log_beta_against_high_precision() {
        // 40-digit reference values
        let cases = [
            (14.66, 4.88, -10.694023837212961927),
            (1e-3, 1e-3, 7.6009008170083473785),
            (1e-3, 1e6, 6.8933633753253894704),
            (1e6, 1e6, -1386300.0033629211163),
            (0.5, 12.5, -0.68050204080074036081),
            (46.81, 4.68, -15.470743125691273483),
            (250.5, 3.25, -17.029982239551988579),
            (3.7, 9.99, -7.5414568618063770307),
            (1e3, 1e-3, 6.900271629687954933),
            (9.5, 10.5, -13.70992554699846192),
        ];
        for (a, b, want) in cases {
            let got = log_beta_fn(a, b).unwrap();
            assert!(rel(got, want) < 1e-12, "lbeta({a},{b}) = {got}, want {want}");
        }
    }

    #[test]
    fn hyp3f2_known_values() {
        assert_eq!(hyp3f2_unit(0.0, 3.0, 4.0, 1.0, 1.0).unwrap(), 1.0);
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!(rel(hyp3f2_unit(1.0, 1.0, 1.0, 2.0, 2.0).unwrap(), z2) < 1e-10);
        let cases = [
            ((7.0, 21.0, 28.0, 29.0, 29.0), 190237.6249481121439406885),
            ((0.5, 1.5, 2.25, 3.0, 1.75), 2.55960358166489497203012),
            ((1.2, 3.4, 0.3, 2.0, 3.0), 3.535492730484260725663032),
            ((10.0, 10.0, 10.0, 15.0, 15.5), 129237.969805029845431981),
            ((1.0, 1.0, 2.0, 9.0, 23.0), 1.009914662356596825081958),
            ((-3.0, 2.5, 1.0, 4.0, 0.5), -0.3),
        ];
        for ((a, b, c, d, e), want) in cases {
            let got = hyp3f2_unit(a, b, c, d, e).unwrap();
            assert!(rel(got, want) < 1e-10, "3F2({a},{b},{c};{d},{e}) = {got}, want {want}");
        }
    }

    #[test]
    fn hyp3f2_domain_errors() {
        assert!(matches!(hyp3f2_unit(1.0, 1.0, 1.0, 1.5, 1.5), Err(Error::Domain(_))));
        assert!(matches!(hyp3f2_unit(1.0, 1.0, 1.0, -2.0, 5.0), Err(Error::Domain(_))));
    }

    #[test]
    fn bibeta_cross_moment_reference() {
        let p = BibetaParams::new(6.0, 20.0, 2.0).unwrap();
        assert!(rel(p.cross_moment().unwrap(), 0.6885781788794978) < 1e-10);
        assert!((p.delta_mean() - (10.0 / 11.0 - 0.75)).abs() < 1e-15);
        assert!(rel(p.delta_var().unwrap(), 0.010906583910672) < 1e-9);
    }

    #[test]
    fn bibeta_logpdf_examples() {
        let p = BibetaParams::new(1.0, 1.0, 1.0).unwrap();
        // exponents q1+r−1 = q0+r−1 = 1 survive alongside the (1 − p0 p1) term
        let want = 2.0 * 0.5f64.ln() - 3.0 * 0.75f64.ln();
        assert!((bibeta_logpdf(0.5, 0.5, &p) - want).abs() < 1e-12);
        // boundary conventions
        let q = BibetaParams::new(2.0, 0.5, 1.0).unwrap();
        assert_eq!(bibeta_logpdf(0.0, 0.5, &q), f64::NEG_INFINITY);
        assert_eq!(bibeta_logpdf(0.5, 0.0, &q), f64::INFINITY);
        assert!(bibeta_logpdf(0.5, 0.5, &p).is_finite());
    }

    #[test]
    fn bibeta_normalizer_matches_quadrature() {
        for &(q0, q1, r) in &[(6.0, 20.0, 2.0), (1.0, 1.0, 1.0), (2.5, 0.8, 3.0), (0.7, 1.3, 0.9)] {
            let p = BibetaParams::new(q0, q1, r).unwrap();
            let z = quad::integrate_2d_unit(|a, b| bibeta_logpdf(a, b, &p).exp(), 1e-11).unwrap();
            assert!(rel(z.ln(), p.log_normalizer()).abs() < 1e-7 || (z.ln() - p.log_normalizer()).abs() < 1e-7,
                "({q0},{q1},{r}): quad {} closed {}", z.ln(), p.log_normalizer());
        }
    }

    #[test]
    fn bibeta_marginals_are_beta() {
        let p = BibetaParams::new(6.0, 20.0, 2.0).unwrap();
        let b0 = p.marginal_p0();
        let b1 = p.marginal_p1();
        for i in 1..100 {
            let x = i as f64 / 100.0;
            let m0 = quad::integrate(|y| bibeta_logpdf_normalized(x, y, &p).exp(), 0.0, 1.0, 1e-12, 1e-10)
                .unwrap()
                .value;
            let m1 = quad::integrate(|y| bibeta_logpdf_normalized(y, x, &p).exp(), 0.0, 1.0, 1e-12, 1e-10)
                .unwrap()
                .value;
            assert!((m0 - b0.pdf(x)).abs() < 1e-6, "p0 marginal at {x}");
            assert!((m1 - b1.pdf(x)).abs() < 1e-6, "p1 marginal at {x}");
        }
    }

    #[test]
    fn bibeta_sample_means() {
        let p = BibetaParams::new(6.0, 20.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let draws: Vec<(f64, f64)> = (0..n).map(|_| bibeta_sample(&p, &mut rng)).collect();
        let m0 = draws.iter().map(|d| d.0).sum::<f64>() / n as f64;
        let m1 = draws.iter().map(|d| d.1).sum::<f64>() / n as f64;
        let se0 = (p.marginal_p0().var() / n as f64).sqrt();
        let se1 = (p.marginal_p1().var() / n as f64).sqrt();
        assert!((m0 - 0.75).abs() < 3.0 * se0);
        assert!((m1 - 20.0 / 22.0).abs() < 3.0 * se1);
    }

    #[test]
    fn bibeta_correlation_vanishes_for_large_r() {
        let p = BibetaParams::new(0.5, 0.5, 400.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 50_000;
        let d: Vec<(f64, f64)> = (0..n).map(|_| bibeta_sample(&p, &mut rng)).collect();
        let (m0, m1) = d.iter().fold((0.0, 0.0), |a, x| (a.0 + x.0, a.1 + x.1));
        let (m0, m1) = (m0 / n as f64, m1 / n as f64);
        let (mut c, mut v0, mut v1) = (0.0, 0.0, 0.0);
        for &(a, b) in &d {
            c += (a - m0) * (b - m1);
            v0 += (a - m0).powi(2);
            v1 += (b - m1).powi(2);
        }
        let rho = c / (v0 * v1).sqrt();
        assert!(rho.abs() < 0.03, "rho = {rho}");
    }

    #[test]
    fn bibeta_sample_chi_square_against_density() {
        let p = BibetaParams::new(2.0, 3.0, 1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let k = 20;
        let mut counts = vec![0u64; k * k];
        for _ in 0..n {
            let (a, b) = bibeta_sample(&p, &mut rng);
            let i = ((a * k as f64) as usize).min(k - 1);
            let j = ((b * k as f64) as usize).min(k - 1);
            counts[i * k + j] += 1;
        }
        let h = 1.0 / k as f64;
        let mut expected = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                let (x0, y0) = (i as f64 * h, j as f64 * h);
                expected[i * k + j] = n as f64
                    * quad::integrate_2d(
                        |a, b| bibeta_logpdf_normalized(a, b, &p).exp(),
                        (x0, x0 + h),
                        (y0, y0 + h),
                        1e-10,
                    )
                    .unwrap();
            }
        }
        let pval = crate::stats::chi_square_gof(&counts, &expected, 5.0).unwrap().p_value;
        assert!(pval > 0.001, "p = {pval}");
    }

    proptest! {
        #[test]
        fn beta_density_integrates_to_one(q in 0.5f64..60.0, r in 1.0f64..60.0) {
            let b = BetaParams::new(q, r).unwrap();
            let z = quad::integrate(|x| b.pdf(x), 0.0, 1.0, 1e-13, 1e-11).unwrap().value;
            prop_assert!((z - 1.0).abs() < 1e-9, "integral {}", z);
        }

        #[test]
        fn hyp3f2_partial_sums_monotone_and_at_least_one(
            a in 0.1f64..5.0, b in 0.1f64..5.0, c in 0.1f64..5.0, extra in 0.5f64..4.0, split in 0.1f64..0.9
        ) {
            let tot = a + b + c + extra;
            let d = tot * split;
            let e = tot - d;
            let mut last = 0.0;
            for n in [1usize, 2, 5, 10, 50, 200] {
                let s = hyp3f2_partial_sum(a, b, c, d, e, n);
                prop_assert!(s >= last);
                last = s;
            }
            let full = hyp3f2_unit(a, b, c, d, e).unwrap();
            prop_assert!(full >= 1.0);
            prop_assert!(full >= last * (1.0 - 1e-12));
        }

        #[test]
        fn log_beta_symmetric(a in 1e-3f64..1e4, b in 1e-3f64..1e4) {
            let x = log_beta_fn(a, b).unwrap();
            let y = log_beta_fn(b, a).unwrap();
            prop_assert!((x - y).abs() <= 1e-14 * x.abs().max(1.0));
        }

        #[test]
        fn log_beta_recurrence(a in 0.01f64..500.0, b in 0.01f64..500.0) {
            // B(a+1, b) = B(a, b) · a / (a + b)
            let lhs = log_beta_fn(a + 1.0, b).unwrap();
            let rhs = log_beta_fn(a, b).unwrap() + (a / (a + b)).ln();
            prop_assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs().max(1.0));
        }
    }
}
