use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{verdict, DiscrepancyVerdict, Statistic};
use crate::bayes::{log_scale, JointDensity};
use crate::error::{Error, Result};
use crate::grid::{linspace, GridDensity};
use crate::par::{self, ExecMode};
use crate::quad::gauss_legendre;

/// Default joint grid for scans and contours.
pub const SCAN_GRID: usize = 512;
/// Nodes on the projected axis t = a·p0 + b·p1.
pub const SCAN_BINS: usize = 512;

/// A joint density tabulated at the cell centers of an n × n grid on the
/// unit square and normalized there. Index [i * n + j] holds p0 = (i + ½)/n,
/// p1 = (j + ½)/n.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGrid {
    n: usize,
    values: Vec<f64>,
}

impl JointGrid {
    pub fn new<J: JointDensity + ?Sized>(joint: &J, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Usage("joint grid needs n >= 2".into()));
        }
        let h = 1.0 / n as f64;
        let logs: Vec<f64> = (0..n * n)
            .map(|k| joint.log_density(((k / n) as f64 + 0.5) * h, ((k % n) as f64 + 0.5) * h))
            .collect();
        let top = logs.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::Numeric("joint density is not finite anywhere on the grid".into()));
        }
        let mut values: Vec<f64> = logs.iter().map(|v| if v.is_nan() { 0.0 } else { (v - top).exp() }).collect();
        let z: f64 = values.iter().sum::<f64>() * h * h;
        values.iter_mut().for_each(|v| *v /= z);
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.n as f64
    }
}

/// Density of t = a·p0 + b·p1 by linear deposition of the grid mass onto
/// `bins` nodes spanning [−(|a| + |b|), |a| + |b|].
pub fn project_direction(g: &JointGrid, a: f64, b: f64, bins: usize) -> Result<GridDensity> {
    if bins < 3 {
        return Err(Error::Usage("projection needs at least 3 nodes".into()));
    }
    let r = a.abs() + b.abs();
    if !(r > 0.0) {
        return Err(Error::Usage("projection direction must be non-zero".into()));
    }
    let t = linspace(-r, r, bins);
    let dt = t[1] - t[0];
    let mut mass = vec![0.0; bins];
    for i in 0..g.n {
        let x = g.center(i);
        for j in 0..g.n {
            let v = g.at(i, j);
            if v == 0.0 {
                continue;
            }
            let u = ((a * x + b * g.center(j)) + r) / dt;
            let k = (u.floor() as usize).min(bins - 2);
            let f = u - k as f64;
            mass[k] += v * (1.0 - f);
            mass[k + 1] += v * f;
        }
    }
    GridDensity::new(t, mass)?.normalize()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub angle_deg: f64,
    pub verdict: DiscrepancyVerdict,
}

/// Mode verdicts along `angles` equally spaced directions (cos φ, sin φ).
pub fn directional_scan<A, B, C>(prior: &A, lik: &B, post: &C, angles: usize) -> Result<Vec<ScanEntry>>
where
    A: JointDensity + ?Sized,
    B: JointDensity + ?Sized,
    C: JointDensity + ?Sized,
{
    directional_scan_with(prior, lik, post, angles, SCAN_GRID, SCAN_BINS, ExecMode::Parallel)
}

pub fn directional_scan_with<A, B, C>(
    prior: &A,
    lik: &B,
    post: &C,
    angles: usize,
    grid: usize,
    bins: usize,
    exec: ExecMode,
) -> Result<Vec<ScanEntry>>
where
    A: JointDensity + ?Sized,
    B: JointDensity + ?Sized,
    C: JointDensity + ?Sized,
{
    if angles == 0 {
        return Err(Error::Usage("directional scan needs at least one angle".into()));
    }
    let grids = [JointGrid::new(prior, grid)?, JointGrid::new(lik, grid)?, JointGrid::new(post, grid)?];
    par::try_map_indexed(angles, exec, |k| -> Result<ScanEntry> {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / angles as f64;
        let (a, b) = (phi.cos(), phi.sin());
        let m: Vec<f64> =
            grids.iter().map(|g| project_direction(g, a, b, bins).map(|d| d.mode())).collect::<Result<_>>()?;
        let mut v = verdict(Statistic::Mode, m[0], m[1], m[2]);
        v.direction = Some((a, b));
        Ok(ScanEntry { angle_deg: 360.0 * k as f64 / angles as f64, verdict: v })
    })
}

/// Density of δ = p1 − p0 on `resolution` (odd) points over [−1, 1], by
/// integrating along each anti-diagonal with 4-point Gauss–Legendre on
/// every cell it crosses.
pub fn project_joint_to_delta<J: JointDensity + ?Sized>(joint: &J, resolution: usize) -> Result<GridDensity> {
    if resolution < 3 || resolution % 2 == 0 {
        return Err(Error::Usage("projection onto delta needs an odd resolution >= 3".into()));
    }
    let n = (resolution - 1) / 2;
    let h = 1.0 / n as f64;
    let top = log_scale(joint);
    if !top.is_finite() {
        return Err(Error::Numeric("joint density is not finite anywhere on the unit square".into()));
    }
    let (x, w) = gauss_legendre(4);
    let grid = linspace(-1.0, 1.0, resolution);
    let vals = par::map_indexed(resolution, ExecMode::Parallel, |k| {
        let m = k as i64 - n as i64;
        let delta = m as f64 * h;
        let first = (-m).max(0) as usize;
        let last = (n as i64).min(n as i64 - m).max(0) as usize;
        let mut acc = 0.0;
        for i in first..last {
            let mid = (i as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                let p0 = mid + 0.5 * h * xi;
                let v = (joint.log_density(p0, p0 + delta) - top).exp();
                if v.is_finite() {
                    acc += 0.5 * h * wi * v;
                }
            }
        }
        acc
    });
    GridDensity::new(grid, vals)?.normalize()
}

/// Maximizer of the joint density: grid argmax, then repeated zooming.
pub fn joint_mode<J: JointDensity + ?Sized>(joint: &J, resolution: usize) -> (f64, f64) {
    let n = resolution.max(4);
    let mut best = (0.5, 0.5, f64::NEG_INFINITY);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
            let v = joint.log_density(x, y);
            if v > best.2 {
                best = (x, y, v);
            }
        }
    }
    let mut half = 1.0 / n as f64;
    for _ in 0..40 {
        let (cx, cy) = (best.0, best.1);
        for i in -10..=10 {
            for j in -10..=10 {
                let x = (cx + half * i as f64 / 10.0).clamp(1e-12, 1.0 - 1e-12);
                let y = (cy + half * j as f64 / 10.0).clamp(1e-12, 1.0 - 1e-12);
                let v = joint.log_density(x, y);
                if v > best.2 {
                    best = (x, y, v);
                }
            }
        }
        half *= 0.3;
    }
    (best.0, best.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourLevel {
    pub level: f64,
    pub polylines: Vec<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    pub levels: Vec<ContourLevel>,
    pub warnings: Vec<String>,
}

impl ContourSet {
    /// Rows of (level, polyline, point, p0, p1).
    pub fn to_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["level", "polyline", "point", "p0", "p1"])?;
        for l in &self.levels {
            for (pi, line) in l.polylines.iter().enumerate() {
                for (k, (x, y)) in line.iter().enumerate() {
                    wr.write_record([
                        format!("{}", l.level),
                        pi.to_string(),
                        k.to_string(),
                        format!("{x}"),
                        format!("{y}"),
                    ])?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }
}

// Edge keys: horizontal edge (i, j)–(i+1, j) and vertical edge (i, j)–(i, j+1).
fn edge_key(vertical: bool, i: usize, j: usize) -> u64 {
    ((vertical as u64) << 62) | ((i as u64) << 31) | j as u64
}

fn edge_point(g: &JointGrid, key: u64, level: f64) -> (f64, f64) {
    let vertical = key >> 62 == 1;
    let i = ((key >> 31) & 0x7fff_ffff) as usize;
    let j = (key & 0x7fff_ffff) as usize;
    let (i2, j2) = if vertical { (i, j + 1) } else { (i + 1, j) };
    let (a, b) = (g.at(i, j), g.at(i2, j2));
    let t = if b != a { ((level - a) / (b - a)).clamp(0.0, 1.0) } else { 0.5 };
    let (x0, y0) = (g.center(i), g.center(j));
    let (x1, y1) = (g.center(i2), g.center(j2));
    (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
}

fn link(segments: &[(u64, u64)]) -> Vec<Vec<u64>> {
    let mut adj: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        adj.entry(a).or_default().push(s);
        adj.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = vec![];
    // open lines start at degree-1 keys; closed loops afterwards
    let starts: Vec<u64> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).collect();
    let walk = |start: u64, used: &mut [bool]| -> Option<Vec<u64>> {
        let first = *adj[&start].iter().find(|s| !used[**s])?;
        let mut line = vec![start];
        let mut cur = start;
        let mut seg = first;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == cur { b } else { a };
            line.push(next);
            cur = next;
            match adj[&cur].iter().find(|s| !used[**s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        Some(line)
    };
    for s in starts {
        if let Some(l) = walk(s, &mut used) {
            out.push(l);
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            if let Some(l) = walk(segments[s].0, &mut used) {
                out.push(l);
            }
        }
    }
    out
}

/// Marching-squares contours of the normalized joint density at each level.
pub fn contour_export<J: JointDensity + ?Sized>(joint: &J, levels: &[f64], resolution: usize) -> Result<ContourSet> {
    let g = JointGrid::new(joint, resolution)?;
    let n = g.n;
    let mut out = ContourSet { levels: vec![], warnings: vec![] };
    for &level in levels {
        let mut segs = vec![];
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let c = [g.at(i, j), g.at(i + 1, j), g.at(i + 1, j + 1), g.at(i, j + 1)];
                let above: Vec<bool> = c.iter().map(|v| *v > level).collect();
                // edges: bottom, right, top, left
                let edges = [
                    (edge_key(false, i, j), above[0] != above[1]),
                    (edge_key(true, i + 1, j), above[1] != above[2]),
                    (edge_key(false, i, j + 1), above[3] != above[2]),
                    (edge_key(true, i, j), above[0] != above[3]),
                ];
                let crossed: Vec<u64> = edges.iter().filter(|e| e.1).map(|e| e.0).collect();
                match crossed.len() {
                    2 => segs.push((crossed[0], crossed[1])),
                    4 => {
                        // saddle: isolate the corners on the side the center is not on
                        let center_above = c.iter().sum::<f64>() / 4.0 > level;
                        let corner_edges = [(0, 3), (0, 1), (1, 2), (2, 3)];
                        for (k, &(e1, e2)) in corner_edges.iter().enumerate() {
                            if above[k] != center_above {
                                segs.push((edges[e1].0, edges[e2].0));
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        if segs.is_empty() {
            out.warnings.push(format!("level {level} does not intersect the density"));
        }
        let polylines = link(&segs)
            .into_iter()
            .map(|keys| keys.into_iter().map(|k| edge_point(&g, k, level)).collect())
            .collect();
        out.levels.push(ContourLevel { level, polylines });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::{exact_indep_beta_posterior, loglik, marginalize_delta, LikelihoodJoint, PosteriorJoint, PriorJoint};
    use crate::datasets::MIGRAINE_TRIAL;
    use crate::diagnostics::summarize;
    use crate::elicit::PriorSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bump(x: f64, y: f64) -> f64 {
        -((x - 0.5).powi(2) + (y - 0.5).powi(2)) / (2.0 * 0.01)
    }

    #[test]
    fn uniform_projects_to_triangle() {
        let g = project_joint_to_delta(&|_: f64, _: f64| 0.0, 2001).unwrap();
        for (&x, &v) in g.grid().iter().zip(g.values()) {
            assert!((v - (1.0 - x.abs())).abs() < 1e-9);
        }
        assert!(project_joint_to_delta(&|_: f64, _: f64| 0.0, 2000).is_err());
    }

    #[test]
    fn projection_matches_marginalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let p: Vec<f64> = (0..4).map(|_| rng.random_range(1.0..30.0)).collect();
            let prior = PriorSpec::indep_beta(p[0], p[1], p[2], p[3]).unwrap();
            let joint = PosteriorJoint { prior: &prior, data: MIGRAINE_TRIAL };
            let a = project_joint_to_delta(&joint, 2001).unwrap();
            let b = marginalize_delta(&joint, 2001).unwrap();
            let sup = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(sup < 1e-6, "{p:?}: {sup}");
        }
    }

    #[test]
    fn conjugate_projection_mean() {
        let prior = PriorSpec::indep_beta(14.66, 4.88, 46.81, 4.68).unwrap();
        let g = project_joint_to_delta(&PosteriorJoint { prior: &prior, data: MIGRAINE_TRIAL }, 2001).unwrap();
        let (a, b) = exact_indep_beta_posterior(&prior, &MIGRAINE_TRIAL).unwrap();
        assert!((summarize(&g).unwrap().mean - (b.mean() - a.mean())).abs() < 2e-3);
    }

    #[test]
    fn scan_on_identical_joints() {
        let s = directional_scan_with(&bump, &bump, &bump, 36, 128, 256, ExecMode::Parallel).unwrap();
        assert_eq!(s.len(), 36);
        assert!(s.iter().all(|e| !e.verdict.discrepant));
    }

    #[test]
    fn conjugate_scan_finds_discrepant_direction() {
        let prior = PriorSpec::indep_beta(14.66, 4.88, 46.81, 4.68).unwrap();
        let pj = PriorJoint(&prior);
        let lj = LikelihoodJoint(MIGRAINE_TRIAL);
        let post = PosteriorJoint { prior: &prior, data: MIGRAINE_TRIAL };
        let s = directional_scan(&pj, &lj, &post, 360).unwrap();
        assert!(s.iter().any(|e| e.verdict.discrepant));
        // reflection (a, b) → (−a, −b) keeps the verdict
        for k in 0..180 {
            assert_eq!(s[k].verdict.discrepant, s[k + 180].verdict.discrepant, "angle {}", s[k].angle_deg);
        }
        // the δ direction at 135°
        assert!(s[135].verdict.discrepant);
    }

    #[test]
    fn posterior_mode_between_in_the_plane() {
        let prior = PriorSpec::indep_beta(14.66, 4.88, 46.81, 4.68).unwrap();
        let mp = joint_mode(&PriorJoint(&prior), 256);
        let ml = joint_mode(&LikelihoodJoint(MIGRAINE_TRIAL), 256);
        let mq = joint_mode(&PosteriorJoint { prior: &prior, data: MIGRAINE_TRIAL }, 256);
        assert!((ml.0 - 31.0 / 68.0).abs() < 1e-6 && (ml.1 - 33.0 / 59.0).abs() < 1e-6);
        let between = |a: f64, b: f64, c: f64| c >= a.min(b) && c <= a.max(b);
        assert!(between(mp.0, ml.0, mq.0) && between(mp.1, ml.1, mq.1));
        // yet the δ-projection is discrepant
        assert!(mq.1 - mq.0 > (mp.1 - mp.0).max(ml.1 - ml.0) || mq.1 - mq.0 < (mp.1 - mp.0).min(ml.1 - ml.0));
        let _ = loglik;
    }

    #[test]
    fn circular_contours() {
        let peak = 1.0 / (2.0 * std::f64::consts::PI * 0.01);
        let c = contour_export(&bump, &[0.5 * peak, 1e9], 200).unwrap();
        assert_eq!(c.levels[0].polylines.len(), 1);
        let line = &c.levels[0].polylines[0];
        assert_eq!(line.first(), line.last());
        let want = 0.1 * (2.0 * 2f64.ln()).sqrt();
        for (x, y) in line {
            let r = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt();
            assert!((r - want).abs() < 2e-3, "{r} vs {want}");
        }
        assert!(c.levels[1].polylines.is_empty());
        assert_eq!(c.warnings.len(), 1);
        let mut buf = vec![];
        c.to_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("level,polyline,point,p0,p1"));
    }

    #[test]
    fn contours_enclose_the_mode() {
        let prior = PriorSpec::indep_beta(14.66, 4.88, 46.81, 4.68).unwrap();
        let post = PosteriorJoint { prior: &prior, data: MIGRAINE_TRIAL };
        let g = JointGrid::new(&post, 200).unwrap();
        let top = (0..200 * 200).map(|k| g.at(k / 200, k % 200)).fold(0.0, f64::max);
        let c = contour_export(&post, &[0.1 * top, 0.5 * top, 0.9 * top], 200).unwrap();
        let (mx, my) = joint_mode(&post, 200);
        for l in &c.levels {
            assert_eq!(l.polylines.len(), 1);
            let line = &l.polylines[0];
            // winding number about the mode is ±1
            let mut ang = 0.0;
            for w in line.windows(2) {
                let a = (w[0].1 - my).atan2(w[0].0 - mx);
                let b = (w[1].1 - my).atan2(w[1].0 - mx);
                let mut d = b - a;
                if d > std::f64::consts::PI {
                    d -= 2.0 * std::f64::consts::PI;
                }
                if d < -std::f64::consts::PI {
                    d += 2.0 * std::f64::consts::PI;
                }
                ang += d;
            }
            assert!((ang.abs() - 2.0 * std::f64::consts::PI).abs() < 1e-6);
        }
    }
}
