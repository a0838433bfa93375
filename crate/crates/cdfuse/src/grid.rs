//! Densities tabulated on an increasing grid and treated as piecewise linear
//! between nodes. Integrals, CDF values and quantiles are exact for that
//! interpolant, so they agree with the trapezoid rule on the nodes.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    grid: Vec<f64>,
    values: Vec<f64>,
    normalized: bool,
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let h = (hi - lo) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
    v[n - 1] = hi;
    v
}

impl GridDensity {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::Validation("grid density needs >= 2 matching nodes".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation("grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Validation("density values must be finite and >= 0".into()));
        }
        Ok(Self { grid, values, normalized: false })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Vec<f64>, f: F) -> Result<Self> {
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    /// Rescales to unit integral.
    pub fn normalize(mut self) -> Result<Self> {
        let z = self.integral();
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Numeric(format!("cannot normalize density with integral {z}")));
        }
        for v in &mut self.values {
            *v /= z;
        }
        self.normalized = true;
        Ok(self)
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lo(&self) -> f64 {
        self.grid[0]
    }

    pub fn hi(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1]))
            .sum()
    }

    /// Cumulative integral at every node.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.grid.len());
        let mut acc = 0.0;
        out.push(0.0);
        for i in 1..self.grid.len() {
            acc += 0.5 * (self.grid[i] - self.grid[i - 1]) * (self.values[i] + self.values[i - 1]);
            out.push(acc);
        }
        out
    }

    fn cell(&self, x: f64) -> usize {
        match self.grid.binary_search_by(|g| g.total_cmp(&x)) {
            Ok(i) => i.min(self.grid.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.grid.len() - 2),
        }
    }

    /// Linear interpolation; zero outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lo() || x > self.hi() {
            return 0.0;
        }
        let i = self.cell(x);
        let t = (x - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// ∫_lo^x of the interpolant (not renormalized).
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo() {
            return 0.0;
        }
        let cum = self.cumulative();
        if x >= self.hi() {
            return *cum.last().unwrap();
        }
        let i = self.cell(x);
        let h = self.grid[i + 1] - self.grid[i];
        let t = x - self.grid[i];
        let (f0, f1) = (self.values[i], self.values[i + 1]);
        cum[i] + f0 * t + (f1 - f0) * t * t / (2.0 * h)
    }

    /// Inverse of the interpolant's CDF at level `p` of the total mass.
    pub fn quantile(&self, p: f64) -> f64 {
        let cum = self.cumulative();
        self.quantile_with(&cum, p)
    }

    pub fn quantiles(&self, ps: &[f64]) -> Vec<f64> {
        let cum = self.cumulative();
        ps.iter().map(|&p| self.quantile_with(&cum, p)).collect()
    }

    fn quantile_with(&self, cum: &[f64], p: f64) -> f64 {
        let total = *cum.last().unwrap();
        let target = p.clamp(0.0, 1.0) * total;
        if target <= 0.0 {
            // first node with mass to its right
            let i = cum.iter().rposition(|&c| c <= 0.0).unwrap_or(0);
            return self.grid[i];
        }
        let i = match cum.iter().position(|&c| c >= target) {
            Some(0) => return self.grid[0],
            Some(i) => i - 1,
            None => return self.hi(),
        };
        let h = self.grid[i + 1] - self.grid[i];
        let (f0, f1) = (self.values[i], self.values[i + 1]);
        let need = target - cum[i];
        // solve f0 t + (f1 − f0) t² / (2h) = need for t in [0, h]
        let a = (f1 - f0) / (2.0 * h);
        let t = if a.abs() < 1e-14 * (f0 + f1).max(1e-300) / h {
            if f0 > 0.0 {
                need / f0
            } else {
                0.0
            }
        } else {
            let disc = (f0 * f0 + 4.0 * a * need).max(0.0);
            2.0 * need / (f0 + disc.sqrt())
        };
        self.grid[i] + t.clamp(0.0, h)
    }

    pub fn mean(&self) -> f64 {
        let mut m = 0.0;
        for i in 0..self.grid.len() - 1 {
            let (x0, x1) = (self.grid[i], self.grid[i + 1]);
            let h = x1 - x0;
            m += h / 6.0 * (self.values[i] * (2.0 * x0 + x1) + self.values[i + 1] * (x0 + 2.0 * x1));
        }
        m / self.integral()
    }

    pub fn var(&self) -> f64 {
        let mu = self.mean();
        let mut v = 0.0;
        for i in 0..self.grid.len() - 1 {
            let (x0, x1) = (self.grid[i] - mu, self.grid[i + 1] - mu);
            let h = x1 - x0;
            let (f0, f1) = (self.values[i], self.values[i + 1]);
            // ∫ (x-μ)² f over a linear cell
            v += h / 12.0
                * (f0 * (3.0 * x0 * x0 + 2.0 * x0 * x1 + x1 * x1)
                    + f1 * (x0 * x0 + 2.0 * x0 * x1 + 3.0 * x1 * x1));
        }
        v / self.integral()
    }

    /// Grid argmax refined by the parabola through it and its neighbours.
    pub fn mode(&self) -> f64 {
        let i = self
            .values
            .iter()
            .enumerate()
            .fold(0, |best, (j, v)| if *v > self.values[best] { j } else { best });
        if i == 0 || i + 1 == self.grid.len() {
            return self.grid[i];
        }
        let (x0, x1, x2) = (self.grid[i - 1], self.grid[i], self.grid[i + 1]);
        let (y0, y1, y2) = (self.values[i - 1], self.values[i], self.values[i + 1]);
        let d1 = (y1 - y0) / (x1 - x0);
        let d2 = (y2 - y1) / (x2 - x1);
        let curv = (d2 - d1) / (x2 - x0);
        if curv >= 0.0 {
            return x1;
        }
        let v = 0.5 * (x0 + x1) - d1 / (2.0 * curv);
        v.clamp(x0, x2)
    }

    /// Largest pointwise difference evaluated on this grid.
    pub fn sup_distance(&self, other: &GridDensity) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| (v - other.eval(x)).abs())
            .fold(0.0, f64::max)
    }

    /// Reflection x → −x.
    pub fn reflect(&self) -> GridDensity {
        let grid: Vec<f64> = self.grid.iter().rev().map(|x| -x).collect();
        let values: Vec<f64> = self.values.iter().rev().copied().collect();
        GridDensity { grid, values, normalized: self.normalized }
    }
}
