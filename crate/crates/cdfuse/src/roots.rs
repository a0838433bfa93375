//! Small nonlinear solvers for the moment-matching fits.
//!
//! Unknowns are positive and solved on the log scale: damped Newton with a
//! forward-difference Jacobian first, Nelder–Mead on the squared residuals
//! if Newton stalls, then one more Newton polish from the simplex optimum.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Convergence when every |residual| is below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest allowed change of any log-parameter in one Newton step.
    pub max_log_step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 500, max_log_step: 1.5 }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub used_simplex: bool,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Residual evaluation that maps failures and non-finite output to `None`.
fn eval<F>(f: &F, z: &[f64]) -> Option<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let x: Vec<f64> = z.iter().map(|v| v.exp()).collect();
    match f(&x) {
        Ok(r) if r.iter().all(|v| v.is_finite()) => Some(r),
        _ => None,
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub(crate) fn lin_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

struct NewtonOutcome {
    z: Vec<f64>,
    r: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn newton<F>(f: &F, z0: Vec<f64>, r0: Vec<f64>, opts: &SolveOptions, budget: usize) -> NewtonOutcome
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = z0.len();
    let mut z = z0;
    let mut r = r0;
    let mut it = 0;
    while it < budget {
        if max_abs(&r) < opts.tol {
            return NewtonOutcome { z, r, iterations: it, converged: true };
        }
        it += 1;
        // forward-difference Jacobian in log coordinates
        let mut jac = vec![vec![0.0; n]; n];
        let mut ok = true;
        for j in 0..n {
            let h = 1e-7 * z[j].abs().max(1.0);
            let mut zp = z.clone();
            zp[j] += h;
            match eval(f, &zp) {
                Some(rp) => {
                    for i in 0..n {
                        jac[i][j] = (rp[i] - r[i]) / h;
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let Some(mut dz) = lin_solve(jac, neg) else { break };
        let big = max_abs(&dz);
        if big > opts.max_log_step {
            let s = opts.max_log_step / big;
            dz.iter_mut().for_each(|d| *d *= s);
        }
        // backtracking: shrink the step (trust region) on failure or no progress
        let cur = max_abs(&r);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let zt: Vec<f64> = z.iter().zip(&dz).map(|(a, d)| a + lambda * d).collect();
            if let Some(rt) = eval(f, &zt) {
                if max_abs(&rt) < cur {
                    accepted = Some((zt, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((zt, rt)) => {
                z = zt;
                r = rt;
            }
            None => break,
        }
    }
    let converged = max_abs(&r) < opts.tol;
    NewtonOutcome { z, r, iterations: it, converged }
}

fn nelder_mead<F>(f: &F, z0: &[f64], max_iter: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let obj = |z: &[f64]| -> f64 {
        match eval(f, z) {
            Some(r) => r.iter().map(|v| v * v).sum(),
            None => f64::INFINITY,
        }
    };
    let n = z0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((z0.to_vec(), obj(z0)));
    for j in 0..n {
        let mut z = z0.to_vec();
        z[j] += 0.25;
        let v = obj(&z);
        simplex.push((z, v));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 <= 1e-30 + 1e-14 * simplex[0].1 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|p| p.0[k]).sum::<f64>() / n as f64)
            .collect();
        let at = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (w - c)).collect()
        };
        let xr = at(-1.0);
        let fr = obj(&xr);
        if fr < simplex[0].1 {
            let xe = at(-2.0);
            let fe = obj(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = if fr < simplex[n].1 { at(-0.5) } else { at(0.5) };
            let fc = obj(&xc);
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    p.0 = best.iter().zip(&p.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    p.1 = obj(&p.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Solves f(x) = 0 for positive x starting at `x0`.
pub fn solve_positive<F>(family: &'static str, f: F, x0: &[f64], opts: SolveOptions) -> Result<Solution>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if x0.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Fit { family, message: "starting point must be positive".into(), residuals: vec![] });
    }
    let z0: Vec<f64> = x0.iter().map(|v| v.ln()).collect();
    let r0 = eval(&f, &z0).ok_or_else(|| Error::Fit {
        family,
        message: "residuals not computable at the starting point".into(),
        residuals: vec![],
    })?;
    let first = newton(&f, z0, r0, &opts, opts.max_iter);
    if first.converged {
        return Ok(Solution {
            x: first.z.iter().map(|v| v.exp()).collect(),
            residuals: first.r,
            iterations: first.iterations,
            used_simplex: false,
        });
    }
    let (zs, _) = nelder_mead(&f, &first.z, opts.max_iter * 10);
    let mut iterations = first.iterations;
    let (z, r) = match eval(&f, &zs) {
        Some(rs) => {
            let polish = newton(&f, zs, rs, &opts, opts.max_iter);
            iterations += polish.iterations;
            (polish.z, polish.r)
        }
        None => (first.z, first.r),
    };
    if max_abs(&r) < opts.tol {
        Ok(Solution { x: z.iter().map(|v| v.exp()).collect(), residuals: r, iterations, used_simplex: true })
    } else {
        Err(Error::Fit {
            family,
            message: format!("no root found (max residual {:.3e})", max_abs(&r)),
            residuals: r,
        })
    }
}
