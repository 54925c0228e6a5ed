//! Brute-force references: simplex grids, finite differences, line searches and a
//! small on-disk cache for their results.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::capacity::{approx_oracle, CapacityProblem};
use crate::divergences::{classical_objective, ClassicalAugustinProblem, ExtendedReal};
use crate::error::{invalid, Error, Result};
use crate::fisher::{potential, FisherMarket};

pub const MAX_GRID_DIM: usize = 4;

/// Points `k / resolution` with `k` a composition of `resolution` into `dimension` parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: usize,
    pub dimension: usize,
}

impl GridSpec {
    pub fn new(resolution: usize, dimension: usize) -> Result<Self> {
        if resolution < 3 {
            return Err(invalid(format!("grid resolution {resolution} is below 3")));
        }
        if dimension == 0 {
            return Err(invalid("grid dimension must be positive"));
        }
        Ok(Self { resolution, dimension })
    }

    /// All grid points in lexicographic order of their integer coordinates.
    pub fn points(&self) -> Vec<Vec<usize>> {
        fn rec(left: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if slots == 1 {
                prefix.push(left);
                out.push(prefix.clone());
                prefix.pop();
                return;
            }
            for k in 0..=left {
                prefix.push(k);
                rec(left - k, slots - 1, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(self.resolution, self.dimension, &mut Vec::new(), &mut out);
        out
    }
}

/// Exhaustive minimum of the classical objective over the simplex grid; ties go
/// to the lexicographically smallest point.
pub fn grid_min_classical_augustin(p: &ClassicalAugustinProblem, g: &GridSpec) -> Result<(Vec<f64>, f64)> {
    if g.dimension != p.dim() {
        return Err(invalid(format!("grid dimension {} for a {}-dimensional problem", g.dimension, p.dim())));
    }
    if g.dimension > MAX_GRID_DIM {
        return Err(Error::Unsupported(format!("grid search in dimension {} > {MAX_GRID_DIM}", g.dimension)));
    }
    let r = g.resolution as f64;
    let points = g.points();
    let values: Vec<ExtendedReal> = points
        .par_iter()
        .map(|k| {
            let q: Vec<f64> = k.iter().map(|&x| x as f64 / r).collect();
            classical_objective(p, &q)
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    let value = values[best]
        .finite()
        .ok_or_else(|| Error::NonFinite("objective is infinite on the whole grid".into()))?;
    Ok((points[best].iter().map(|&x| x as f64 / r).collect(), value))
}

fn check_step(h: f64) -> Result<()> {
    if !(1e-6..=1e-4).contains(&h) {
        return Err(invalid(format!("finite-difference step {h} outside [1e-6, 1e-4]")));
    }
    Ok(())
}

fn check_interior(w: &[f64], h: f64) -> Result<()> {
    if let Some(x) = w.iter().find(|x| !(**x >= 10.0 * h)) {
        return Err(invalid(format!("coordinate {x} is within 10h of the boundary")));
    }
    Ok(())
}

/// Central differences along `e_j - 1/n`, i.e. the gradient projected onto the
/// tangent space `{z : sum z = 0}` of the simplex.
pub fn finite_diff_gradient(f: impl Fn(&[f64]) -> Result<f64>, w: &[f64], h: f64) -> Result<Vec<f64>> {
    check_step(h)?;
    check_interior(w, h)?;
    let n = w.len() as f64;
    let mut out = Vec::with_capacity(w.len());
    for j in 0..w.len() {
        let shifted = |s: f64| -> Vec<f64> {
            w.iter()
                .enumerate()
                .map(|(i, x)| x + s * (if i == j { 1.0 } else { 0.0 } - 1.0 / n))
                .collect()
        };
        out.push((f(&shifted(h))? - f(&shifted(-h))?) / (2.0 * h));
    }
    Ok(out)
}

/// Second difference `(f(w + hz) - 2 f(w) + f(w - hz)) / h^2` for a tangent direction `z`.
pub fn finite_diff_curvature(f: impl Fn(&[f64]) -> Result<f64>, w: &[f64], z: &[f64], h: f64) -> Result<f64> {
    check_step(h)?;
    if z.len() != w.len() {
        return Err(invalid("direction and point lengths differ"));
    }
    let zs: f64 = z.iter().sum();
    let zn = z.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if zs.abs() > 1e-12 * zn.max(1.0) {
        return Err(invalid("direction does not sum to zero"));
    }
    let scaled: Vec<f64> = w.iter().zip(z).map(|(x, d)| x - h * d.abs()).collect();
    check_interior(&scaled, h)?;
    let at = |s: f64| -> Vec<f64> { w.iter().zip(z).map(|(x, d)| x + s * d).collect() };
    Ok((f(&at(h))? - 2.0 * f(w)? + f(&at(-h))?) / (h * h))
}

pub const CAPACITY_GRID_EPS: f64 = 1e-10;

/// Scans `w = (s, 1 - s)` for `s = k / resolution`, `0 < k < resolution`.
pub fn grid_min_capacity_2(p: &CapacityProblem, resolution: usize) -> Result<(Vec<f64>, f64)> {
    if p.n() != 2 {
        return Err(Error::Unsupported(format!("capacity line search needs n = 2, got {}", p.n())));
    }
    if resolution < 3 {
        return Err(invalid(format!("grid resolution {resolution} is below 3")));
    }
    let values: Vec<(usize, f64)> = (1..resolution)
        .into_par_iter()
        .map(|k| {
            let s = k as f64 / resolution as f64;
            approx_oracle(p, &[s, 1.0 - s], CAPACITY_GRID_EPS).map(|o| (k, o.g_hat))
        })
        .collect::<Result<_>>()?;
    let (k, g) = values
        .into_iter()
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let s = k as f64 / resolution as f64;
    Ok((vec![s, 1.0 - s], g))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Minimizes the market potential by golden-section sweeps over `log p[i]`,
/// where the potential is convex; independent of any price dynamic.
pub fn potential_descent_equilibrium(m: &FisherMarket, sweeps: usize) -> Result<Vec<f64>> {
    let d = m.d_goods();
    if d > MAX_GRID_DIM {
        return Err(Error::Unsupported(format!("coordinate descent in dimension {d} > {MAX_GRID_DIM}")));
    }
    let mut y = vec![-(d as f64).ln(); d];
    for _ in 0..sweeps {
        let before = y.clone();
        for i in 0..d {
            let phi_i = |t: f64| {
                let mut p: Vec<f64> = y.iter().map(|v| v.exp()).collect();
                p[i] = t.exp();
                potential(m, &p).unwrap_or(f64::INFINITY)
            };
            y[i] = golden_section(phi_i, y[i] - 3.0, y[i] + 3.0, 1e-12);
        }
        let moved = y.iter().zip(&before).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if moved < 1e-11 {
            break;
        }
    }
    Ok(y.into_iter().map(f64::exp).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CachedOracle {
    pub value: f64,
    pub argmin: Vec<f64>,
    pub resolution: usize,
}

/// `oracle_cache.json`: SHA-256 of (problem JSON, resolution) mapped to the oracle result.
#[derive(Debug)]
pub struct OracleCache {
    path: PathBuf,
    entries: BTreeMap<String, CachedOracle>,
}

impl OracleCache {
    pub const FILE_NAME: &'static str = "oracle_cache.json";

    /// Opens the cache in `dir`; a missing file is an empty cache.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(Self::FILE_NAME);
        let entries = match std::fs::read_to_string(&path) {
            Ok(s) => serde_json::from_str(&s)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e.into()),
        };
        Ok(Self { path, entries })
    }

    pub fn save(&self) -> Result<()> {
        if let Some(dir) = self.path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&self.path, serde_json::to_string_pretty(&self.entries)?)?;
        Ok(())
    }

    pub fn key<T: Serialize>(problem: &T, resolution: usize) -> Result<String> {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(problem)?);
        h.update(resolution.to_le_bytes());
        Ok(hex::encode(h.finalize()))
    }

    pub fn get(&self, key: &str) -> Option<&CachedOracle> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<String, CachedOracle> {
        &self.entries
    }

    pub fn get_or_compute<T: Serialize>(
        &mut self,
        problem: &T,
        resolution: usize,
        compute: impl FnOnce() -> Result<(Vec<f64>, f64)>,
    ) -> Result<CachedOracle> {
        let key = Self::key(problem, resolution)?;
        if let Some(hit) = self.entries.get(&key) {
            return Ok(hit.clone());
        }
        let (argmin, value) = compute()?;
        let entry = CachedOracle {
            value,
            argmin,
            resolution,
        };
        self.entries.insert(key, entry.clone());
        Ok(entry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DensityMatrix;

    #[test]
    fn grid_points() {
        let g = GridSpec::new(3, 3).unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 10);
        assert_eq!(pts[0], vec![0, 0, 3]);
        assert_eq!(pts[9], vec![3, 0, 0]);
        assert!(GridSpec::new(2, 3).is_err());
    }

    #[test]
    fn grid_single_point_argmin() {
        let a = vec![0.2, 0.3, 0.5];
        let p = ClassicalAugustinProblem::new(vec![a.clone()], vec![1.0], 1.5).unwrap();
        let (q, f) = grid_min_classical_augustin(&p, &GridSpec::new(10, 3).unwrap()).unwrap();
        assert_eq!(q, a.iter().map(|x| (x * 10.0f64).round() / 10.0).collect::<Vec<_>>());
        assert!(f.abs() < 1e-12);
    }

    #[test]
    fn grid_symmetric_pair() {
        let p = ClassicalAugustinProblem::new(vec![vec![0.8, 0.2], vec![0.2, 0.8]], vec![0.5, 0.5], 2.0).unwrap();
        let (q, _) = grid_min_classical_augustin(&p, &GridSpec::new(20, 2).unwrap()).unwrap();
        assert!((q[0] - q[1]).abs() <= 0.05 + 1e-12);
    }

    #[test]
    fn grid_rejects_large_dimension() {
        let p = ClassicalAugustinProblem::new(vec![vec![0.2; 5]], vec![1.0], 2.0).unwrap();
        assert!(matches!(
            grid_min_classical_augustin(&p, &GridSpec::new(4, 5).unwrap()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn finite_differences_on_polynomials() {
        let c = [1.0, -2.0, 0.5];
        let lin = |w: &[f64]| Ok(w.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>());
        let g = finite_diff_gradient(lin, &[0.2, 0.3, 0.5], 1e-5).unwrap();
        let mean = c.iter().sum::<f64>() / 3.0;
        for (x, y) in g.iter().zip(&c) {
            assert!((x - (y - mean)).abs() < 1e-10);
        }
        let quad = |w: &[f64]| Ok(w.iter().map(|x| x * x).sum::<f64>());
        let g = finite_diff_gradient(quad, &[0.2, 0.3, 0.5], 1e-4).unwrap();
        let grad = [0.4, 0.6, 1.0];
        let gm = 2.0 / 3.0;
        for (x, y) in g.iter().zip(&grad) {
            assert!((x - (y - gm)).abs() < 1e-8);
        }
        let curv = finite_diff_curvature(quad, &[0.2, 0.3, 0.5], &[1.0, -1.0, 0.0], 1e-4).unwrap();
        assert!((curv - 4.0).abs() < 1e-4);
        assert!(finite_diff_gradient(quad, &[0.0001, 0.5, 0.4999], 1e-4).is_err());
        assert!(finite_diff_gradient(quad, &[0.2, 0.3, 0.5], 1e-3).is_err());
    }

    #[test]
    fn capacity_grid_examples() {
        let a = DensityMatrix::diag(&[0.7, 0.3]).unwrap();
        let same = CapacityProblem::new(vec![a.clone(), a], 0.8).unwrap();
        let (_, g) = grid_min_capacity_2(&same, 10).unwrap();
        assert!(g.abs() < 1e-10);
        let sym = CapacityProblem::new(
            vec![DensityMatrix::diag(&[0.9, 0.1]).unwrap(), DensityMatrix::diag(&[0.1, 0.9]).unwrap()],
            0.75,
        )
        .unwrap();
        let (w, _) = grid_min_capacity_2(&sym, 20).unwrap();
        assert!((w[0] - 0.5).abs() <= 0.05 + 1e-12);
    }

    #[test]
    fn golden_section_finds_scalar_minimum() {
        let m = FisherMarket::new(vec![vec![1.0]], vec![1.0], vec![0.5], vec![0.5]).unwrap();
        let p = potential_descent_equilibrium(&m, 10).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("oracle-cache-test-{}", std::process::id()));
        let mut cache = OracleCache::load(&dir).unwrap();
        assert!(cache.is_empty());
        let problem = vec![1.0, 2.0];
        let mut calls = 0;
        let a = cache.get_or_compute(&problem, 5, || { calls += 1; Ok((vec![0.5], 1.5)) }).unwrap();
        let b = cache.get_or_compute(&problem, 5, || unreachable!()).unwrap();
        assert_eq!(a, b);
        assert_eq!(calls, 1);
        cache.save().unwrap();
        let reloaded = OracleCache::load(&dir).unwrap();
        assert_eq!(reloaded.len(), 1);
        assert_ne!(OracleCache::key(&problem, 5).unwrap(), OracleCache::key(&problem, 6).unwrap());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
