//! Expert surveys: ingest, arithmetic pooling, and moment-matched priors.

mod fit;
mod prior;

pub use fit::{
    fit_bibeta, fit_hier_beta, fit_hier_bibeta, fit_indep_beta, fit_lognormal_prior, fit_normal_prior,
    hier_beta_moments, hier_bibeta_moments, HierBibetaMoments, HierVarMethod, ShiftedLogNormal,
};
pub use prior::{MomentTargets, PriorFamily, PriorSpec};

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_BINS: usize = 12;

/// Equal 0.04-wide bins over [−0.24, 0.24].
pub const UNIFORM_EDGES: [f64; 13] =
    [-0.24, -0.20, -0.16, -0.12, -0.08, -0.04, 0.0, 0.04, 0.08, 0.12, 0.16, 0.20, 0.24];

/// Bins read off the survey column labels in percentage points ("0~4",
/// "5~8", …, "20+"), split halfway between adjacent integer labels and
/// closed at ±0.24. This is the default.
pub const LABEL_EDGES: [f64; 13] = [
    -0.24, -0.205, -0.165, -0.125, -0.085, -0.045, 0.0, 0.045, 0.085, 0.125, 0.165, 0.205, 0.24,
];

pub fn default_edges() -> Vec<f64> {
    LABEL_EDGES.to_vec()
}

pub fn validate_edges(edges: &[f64]) -> Result<()> {
    if edges.len() != N_BINS + 1 {
        return Err(Error::Validation(format!("bin_edges needs {} values, got {}", N_BINS + 1, edges.len())));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Validation("bin_edges must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// How the pooled histogram's standard deviation is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdRule {
    /// Midpoint variance plus the uniform within-bin spread Σ w·width²/12.
    #[default]
    WithinBin,
    MidpointOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyTable {
    pub expert_ids: Vec<String>,
    /// Percent weights per expert, 12 per row.
    pub rows: Vec<Vec<f64>>,
    pub bin_edges: Vec<f64>,
}

impl SurveyTable {
    pub fn new(expert_ids: Vec<String>, rows: Vec<Vec<f64>>, bin_edges: Vec<f64>) -> Result<Self> {
        let t = Self { expert_ids, rows, bin_edges };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        validate_edges(&self.bin_edges)?;
        if self.rows.is_empty() {
            return Err(Error::Validation("survey has no expert rows".into()));
        }
        if self.expert_ids.len() != self.rows.len() {
            return Err(Error::Validation("expert id count does not match row count".into()));
        }
        for (id, row) in self.expert_ids.iter().zip(&self.rows) {
            if row.len() != N_BINS {
                return Err(Error::Validation(format!("expert {id}: expected {N_BINS} weights, got {}", row.len())));
            }
            if row.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::Validation(format!("expert {id}: weights must be non-negative")));
            }
            let s: f64 = row.iter().sum();
            if (s - 100.0).abs() > 1e-9 {
                return Err(Error::Validation(format!("expert {id}: weights sum to {s}, not 100")));
            }
        }
        Ok(())
    }

    /// Header row, then one row per expert: 12 percent weights, optionally
    /// preceded by an expert id. Blank cells read as 0.
    pub fn from_csv<R: Read>(reader: R, bin_edges: Vec<f64>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).trim(csv::Trim::All).from_reader(reader);
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let cells: Vec<&str> = rec.iter().collect();
            let (id, vals) = match cells.len() {
                n if n == N_BINS => ((i + 1).to_string(), &cells[..]),
                n if n == N_BINS + 1 => (cells[0].to_string(), &cells[1..]),
                n => {
                    return Err(Error::Validation(format!(
                        "survey row {}: expected {} or {} columns, got {n}",
                        i + 1,
                        N_BINS,
                        N_BINS + 1
                    )))
                }
            };
            let row = vals
                .iter()
                .map(|s| {
                    if s.is_empty() {
                        Ok(0.0)
                    } else {
                        s.parse::<f64>()
                            .map_err(|_| Error::Validation(format!("expert {id}: cannot parse weight {s:?}")))
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            ids.push(id);
            rows.push(row);
        }
        Self::new(ids, rows, bin_edges)
    }

    pub fn read_csv(path: &Path, bin_edges: Vec<f64>) -> Result<Self> {
        let f = std::fs::File::open(path)
            .map_err(|e| Error::Validation(format!("cannot open survey {}: {e}", path.display())))?;
        Self::from_csv(f, bin_edges)
    }

    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["expert".to_string()];
        header.extend((1..=N_BINS).map(|k| format!("bin{k:02}")));
        w.write_record(&header)?;
        for (id, row) in self.expert_ids.iter().zip(&self.rows) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| fmt_weight(*v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.to_csv(f)
    }
}

fn fmt_weight(v: f64) -> String {
    if v == v.round() {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledHistogram {
    pub weights: Vec<f64>,
    pub bin_edges: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
}

impl PooledHistogram {
    pub fn from_weights(weights: Vec<f64>, bin_edges: Vec<f64>, rule: SdRule) -> Result<Self> {
        validate_edges(&bin_edges)?;
        if weights.len() != N_BINS || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Validation("histogram needs 12 non-negative weights".into()));
        }
        let tot: f64 = weights.iter().sum();
        if !(tot > 0.0) {
            return Err(Error::Validation("histogram weights sum to zero".into()));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / tot).collect();
        let mids: Vec<f64> = bin_edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect();
        let mean: f64 = weights.iter().zip(&mids).map(|(w, m)| w * m).sum();
        let mut var: f64 = weights.iter().zip(&mids).map(|(w, m)| w * (m - mean).powi(2)).sum();
        if rule == SdRule::WithinBin {
            var += weights
                .iter()
                .zip(bin_edges.windows(2))
                .map(|(w, e)| w * (e[1] - e[0]).powi(2) / 12.0)
                .sum::<f64>();
        }
        if !(var > 0.0) {
            return Err(Error::Validation("histogram has zero spread".into()));
        }
        Ok(Self { weights, bin_edges, mean, sd: var.sqrt() })
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    pub fn lo(&self) -> f64 {
        self.bin_edges[0]
    }

    pub fn hi(&self) -> f64 {
        self.bin_edges[N_BINS]
    }

    fn bin_of(&self, x: f64) -> Option<usize> {
        if x < self.lo() || x >= self.hi() {
            return None;
        }
        Some(self.bin_edges.partition_point(|e| *e <= x) - 1)
    }

    /// Piecewise-constant density, 0 outside [L1, L13).
    pub fn density(&self, x: f64) -> f64 {
        match self.bin_of(x) {
            Some(k) => self.weights[k] / (self.bin_edges[k + 1] - self.bin_edges[k]),
            None => 0.0,
        }
    }

    /// Integral of the density, linear within each bin.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo() {
            return 0.0;
        }
        if x >= self.hi() {
            return 1.0;
        }
        let k = self.bin_of(x).expect("inside support");
        let below: f64 = self.weights[..k].iter().sum();
        let frac = (x - self.bin_edges[k]) / (self.bin_edges[k + 1] - self.bin_edges[k]);
        (below + self.weights[k] * frac).min(1.0)
    }

    /// Midpoint of the highest-density bin.
    pub fn mode(&self) -> f64 {
        let dens: Vec<f64> = (0..N_BINS)
            .map(|k| self.weights[k] / (self.bin_edges[k + 1] - self.bin_edges[k]))
            .collect();
        let k = (0..N_BINS).fold(0, |b, j| if dens[j] > dens[b] { j } else { b });
        0.5 * (self.bin_edges[k] + self.bin_edges[k + 1])
    }
}

/// Column means of the expert rows, as probabilities.
pub fn pool_survey(table: &SurveyTable, rule: SdRule) -> Result<PooledHistogram> {
    table.validate()?;
    let n = table.rows.len() as f64;
    let weights: Vec<f64> = (0..N_BINS)
        .map(|k| table.rows.iter().map(|r| r[k]).sum::<f64>() / n / 100.0)
        .collect();
    PooledHistogram::from_weights(weights, table.bin_edges.clone(), rule)
}

/// Alias with the usual argument order for point evaluation.
pub fn histogram_density(h: &PooledHistogram, delta: f64) -> f64 {
    h.density(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn table_group_means() {
        let t = datasets::migraine_survey(default_edges());
        let h = pool_survey(&t, SdRule::WithinBin).unwrap();
        let want = [0.0, 0.0, 0.0064, 0.0145, 0.0518, 0.1318, 0.2773, 0.25, 0.1546, 0.07, 0.0345, 0.0091];
        for (g, w) in h.weights.iter().zip(want) {
            // reference group means are rounded
            assert!((g - w).abs() < 1e-4, "{g} vs {w}");
        }
        assert!((h.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(h.mean > 0.046 && h.mean < 0.049, "mean {}", h.mean);
    }

    #[test]
    fn uniform_edges_density_example() {
        let t = datasets::migraine_survey(UNIFORM_EDGES.to_vec());
        let h = pool_survey(&t, SdRule::WithinBin).unwrap();
        let want = datasets::MIGRAINE_SURVEY.iter().map(|r| r[6]).sum::<f64>() / 11.0 / 100.0 / 0.04;
        assert!((h.density(0.02) - want).abs() < 1e-12);
        assert!((h.density(0.02) - 6.9325).abs() < 5e-3);
        assert_eq!(h.density(-0.3), 0.0);
        assert_eq!(h.density(0.24), 0.0);
        assert!((h.mode() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn single_bin_expert() {
        let mut row = vec![0.0; 12];
        row[7] = 100.0;
        let t = SurveyTable::new(vec!["a".into()], vec![row], UNIFORM_EDGES.to_vec()).unwrap();
        let h = pool_survey(&t, SdRule::WithinBin).unwrap();
        assert!((h.mean - 0.06).abs() < 1e-15);
        assert!((h.sd - 0.04 / 12f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bad_row_names_expert() {
        let mut row = vec![0.0; 12];
        row[3] = 99.0;
        let err = SurveyTable::new(vec!["7".into()], vec![row], default_edges()).unwrap_err();
        assert!(err.to_string().contains("expert 7"), "{err}");
    }

    #[test]
    fn csv_round_trip_and_blanks() {
        let src = "id,a,b,c,d,e,f,g,h,i,j,k,l\nx,,,,,,50,50,,,,,\ny,10,10,10,10,10,10,10,10,10,10,,\n";
        let t = SurveyTable::from_csv(src.as_bytes(), default_edges()).unwrap();
        assert_eq!(t.expert_ids, vec!["x", "y"]);
        let mut buf = Vec::new();
        t.to_csv(&mut buf).unwrap();
        let back = SurveyTable::from_csv(buf.as_slice(), default_edges()).unwrap();
        assert_eq!(back, t);
        let no_ids = "a,b,c,d,e,f,g,h,i,j,k,l\n0,0,0,0,0,100,0,0,0,0,0,0\n";
        let t2 = SurveyTable::from_csv(no_ids.as_bytes(), default_edges()).unwrap();
        assert_eq!(t2.expert_ids, vec!["1"]);
    }

    #[test]
    fn density_integrates_to_one() {
        // 10^4 cells aligned with the bin edges, so each midpoint sits inside one bin
        for edges in [default_edges(), UNIFORM_EDGES.to_vec()] {
            let h = pool_survey(&datasets::migraine_survey(edges), SdRule::WithinBin).unwrap();
            let n = 10_000;
            let (a, b) = (-0.25, 0.25);
            let dx = (b - a) / n as f64;
            let s: f64 = (0..n).map(|i| h.density(a + (i as f64 + 0.5) * dx) * dx).sum();
            assert!((s - 1.0).abs() < 1e-9, "{s}");
        }
    }

    #[test]
    fn sd_matches_resampling() {
        let h = pool_survey(&datasets::migraine_survey(default_edges()), SdRule::WithinBin).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 400_000;
        let mut xs = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.random();
            let mut k = 0;
            let mut c = h.weights[0];
            while u > c && k < N_BINS - 1 {
                k += 1;
                c += h.weights[k];
            }
            let v: f64 = rng.random();
            xs.push(h.bin_edges[k] + v * (h.bin_edges[k + 1] - h.bin_edges[k]));
        }
        let sd = crate::stats::var(&xs).sqrt();
        assert!((sd - h.sd).abs() < 3.0 * h.sd / (2.0 * n as f64).sqrt() * 1.5, "{sd} vs {}", h.sd);
    }

    proptest! {
        #[test]
        fn pooling_is_permutation_invariant(seed in 0u64..1000) {
            let t = datasets::migraine_survey(default_edges());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx: Vec<usize> = (0..t.rows.len()).collect();
            for i in (1..idx.len()).rev() {
                let j = rng.random_range(0..=i);
                idx.swap(i, j);
            }
            let p = SurveyTable::new(
                idx.iter().map(|&i| t.expert_ids[i].clone()).collect(),
                idx.iter().map(|&i| t.rows[i].clone()).collect(),
                t.bin_edges.clone(),
            ).unwrap();
            let a = pool_survey(&t, SdRule::WithinBin).unwrap();
            let b = pool_survey(&p, SdRule::WithinBin).unwrap();
            for (x, y) in a.weights.iter().zip(&b.weights) {
                prop_assert!((x - y).abs() < 1e-15);
            }
            prop_assert!((a.mean - b.mean).abs() < 1e-15);
        }

        #[test]
        fn cdf_monotone_and_bounded(x in -0.5f64..0.5, y in -0.5f64..0.5) {
            let h = pool_survey(&datasets::migraine_survey(default_edges()), SdRule::WithinBin).unwrap();
            let (lo, hi) = if x < y { (x, y) } else { (y, x) };
            prop_assert!(h.cdf(lo) <= h.cdf(hi) + 1e-15);
            prop_assert!((0.0..=1.0).contains(&h.cdf(x)));
        }
    }
}
