//! Hermitian matrix primitives.
//!
//! Everything downstream is a spectral function of a Hermitian matrix, so the
//! central object here is [`Spectrum`]: one eigendecomposition, reused for
//! powers, logarithms and Thompson distances.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues below `EIG_FLOOR_REL * lambda_max` are treated as zero.
pub const EIG_FLOOR_REL: f64 = 1e-12;

/// Tolerance for the PSD and unit-trace checks on density matrices.
pub const STATE_TOL: f64 = 1e-10;

/// Complex Hermitian matrix. Construction symmetrizes the input as `(Q + Q*)/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(invalid(format!(
                "matrix is not square: {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(invalid("empty matrix"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("non-finite matrix entry"));
        }
        Ok(Self::hermitize(m))
    }

    /// Symmetrizes without validation; entries may be non-finite.
    pub(crate) fn hermitize(m: CMatrix) -> Self {
        let adj = m.adjoint();
        Self {
            m: (m + adj).scale(0.5),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(invalid("rows must form a square matrix"));
        }
        Self::new(CMatrix::from_fn(d, d, |i, j| {
            Complex64::new(rows[i][j], 0.0)
        }))
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m: CMatrix::identity(d, d),
        }
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let d = values.len();
        Self::new(CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            m: self.m.scale(c),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(Self {
            m: &self.m + &other.m,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(Self {
            m: &self.m - &other.m,
        })
    }

    /// `B A B` for Hermitian `B`, which stays Hermitian.
    pub fn congruence(&self, b: &Self) -> Result<Self> {
        check_same_dim(self, b)?;
        Ok(Self::hermitize(&b.m * &self.m * &b.m))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.m[(i, j)].norm() <= tol))
    }

    pub fn eig(&self) -> Result<Spectrum> {
        hermitian_eig(self)
    }

    pub fn power(&self, r: f64) -> Result<Self> {
        matrix_power(self, r)
    }
}

fn check_same_dim(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(invalid(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// JSON layout `{"dim": d, "re": [[..]], "im": [[..]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<HermitianMatrix> for MatrixJson {
    fn from(h: HermitianMatrix) -> Self {
        let d = h.dim();
        let re = (0..d)
            .map(|i| (0..d).map(|j| h.m[(i, j)].re).collect())
            .collect();
        let im = (0..d)
            .map(|i| (0..d).map(|j| h.m[(i, j)].im).collect())
            .collect();
        Self { dim: d, re, im }
    }
}

impl TryFrom<MatrixJson> for HermitianMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let d = j.dim;
        let shape_ok = j.re.len() == d
            && j.im.len() == d
            && j.re.iter().all(|r| r.len() == d)
            && j.im.iter().all(|r| r.len() == d);
        if !shape_ok {
            return Err(invalid(format!("matrix JSON does not match dim {d}")));
        }
        let m = CMatrix::from_fn(d, d, |r, c| Complex64::new(j.re[r][c], j.im[r][c]));
        let adj_gap = (0..d)
            .flat_map(|r| (0..d).map(move |c| (r, c)))
            .map(|(r, c)| (m[(r, c)] - m[(c, r)].conj()).norm())
            .fold(0.0, f64::max);
        let scale = 1.0 + m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if adj_gap > 1e-12 * scale {
            return Err(invalid(format!(
                "matrix is not Hermitian (asymmetry {adj_gap:e})"
            )));
        }
        HermitianMatrix::new(m)
    }
}

/// Eigendecomposition `Q = sum_i lambda_i u_i u_i*` with eigenvalues sorted non-increasing.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// Absolute threshold below which an eigenvalue counts as zero.
    pub fn floor(&self) -> f64 {
        EIG_FLOOR_REL * self.max().abs()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.max() > 0.0 && self.min() >= self.floor()
    }

    /// `sum_i values[i] u_i u_i*`.
    pub fn reconstruct(&self, values: &[f64]) -> HermitianMatrix {
        let d = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (k, &v) in values.iter().enumerate() {
            let mut col = scaled.column_mut(k);
            col *= Complex64::new(v, 0.0);
        }
        debug_assert_eq!(values.len(), d);
        HermitianMatrix::hermitize(scaled * self.eigenvectors.adjoint())
    }

    /// Applies a scalar function to the eigenvalues.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        self.reconstruct(&values)
    }

    /// Spectrum of `f(Q)`, re-sorted non-increasing.
    pub fn mapped(&self, f: impl Fn(f64) -> f64) -> Spectrum {
        let d = self.dim();
        let values: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        Spectrum {
            eigenvalues: order.iter().map(|&k| values[k]).collect(),
            eigenvectors: CMatrix::from_fn(d, d, |i, c| self.eigenvectors[(i, order[c])]),
        }
    }

    /// `Q^r` for a positive-definite `Q`. Integer `r >= 0` is allowed on any spectrum.
    pub fn power(&self, r: f64) -> Result<HermitianMatrix> {
        if !r.is_finite() {
            return Err(invalid(format!("non-finite exponent {r}")));
        }
        if r == 0.0 {
            return Ok(HermitianMatrix::identity(self.dim()));
        }
        let integral = r.fract() == 0.0 && r > 0.0;
        if !integral && !self.is_positive_definite() {
            return Err(Error::SingularMatrix(format!(
                "power {r} of a matrix with eigenvalue {:e} below floor {:e}",
                self.min(),
                self.floor()
            )));
        }
        if integral {
            let k = r as i32;
            return Ok(self.map(|x| x.powi(k)));
        }
        Ok(self.map(|x| x.powf(r)))
    }

    /// `Q^r` for `r > 0` on a PSD matrix, with eigenvalues below the floor set to zero.
    pub fn psd_power(&self, r: f64) -> Result<HermitianMatrix> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(invalid(format!("psd_power needs a positive exponent, got {r}")));
        }
        if self.max() <= 0.0 {
            return Err(Error::SingularMatrix("zero matrix".into()));
        }
        let floor = self.floor();
        Ok(self.map(|x| if x < floor { 0.0 } else { x.powf(r) }))
    }
}

pub fn hermitian_eig(q: &HermitianMatrix) -> Result<Spectrum> {
    if !q.is_finite() {
        return Err(invalid("non-finite entries in eigendecomposition input"));
    }
    let eig = q.m.clone().symmetric_eigen();
    let d = q.dim();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(d, d, |i, c| eig.eigenvectors[(i, order[c])]);
    if eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("eigensolver produced non-finite eigenvalues".into()));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

pub fn matrix_power(q: &HermitianMatrix, r: f64) -> Result<HermitianMatrix> {
    hermitian_eig(q)?.power(r)
}

/// `Re Tr[A B]`.
pub fn trace_product(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    Ok(trace_product_unchecked(a, b))
}

pub(crate) fn trace_product_unchecked(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    // Tr[AB] = sum_ij A_ij B_ji and B_ji = conj(B_ij).
    a.m.iter()
        .zip(b.m.iter())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

/// Thompson distance from the generalized spectrum of `V^{-1/2} U V^{-1/2}`.
pub fn thompson_metric_psd(u: &HermitianMatrix, v: &HermitianMatrix) -> Result<f64> {
    check_same_dim(u, v)?;
    let su = hermitian_eig(u)?;
    if !su.is_positive_definite() {
        return Err(Error::SingularMatrix(format!(
            "first argument is not positive definite (min eigenvalue {:e})",
            su.min()
        )));
    }
    thompson_metric_spectral(u, &hermitian_eig(v)?)
}

/// Thompson distance between `u` and the matrix whose spectrum is `v`.
pub fn thompson_metric_spectral(u: &HermitianMatrix, v: &Spectrum) -> Result<f64> {
    if !v.is_positive_definite() {
        return Err(Error::SingularMatrix(format!(
            "second argument is not positive definite (min eigenvalue {:e})",
            v.min()
        )));
    }
    let inv_sqrt = v.map(|x| 1.0 / x.sqrt());
    let w = u.congruence(&inv_sqrt)?;
    let sw = hermitian_eig(&w)?;
    if sw.min() <= 0.0 {
        return Err(Error::SingularMatrix(
            "argument is not positive definite".into(),
        ));
    }
    Ok(sw.max().ln().max(-sw.min().ln()).max(0.0))
}

/// `max_i |log(u[i]/v[i])|`.
pub fn thompson_metric_vec(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(invalid(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let mut best = 0.0f64;
    for (&a, &b) in u.iter().zip(v) {
        if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(invalid(format!("non-positive entry in ({a}, {b})")));
        }
        best = best.max((a / b).ln().abs());
    }
    Ok(best)
}

/// Strictly positive real vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PositiveVector(Vec<f64>);

impl PositiveVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("empty vector"));
        }
        if let Some(x) = entries.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
            return Err(invalid(format!("entry {x} is not strictly positive")));
        }
        Ok(Self(entries))
    }

    pub fn uniform(d: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; d])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn thompson(&self, other: &Self) -> Result<f64> {
        thompson_metric_vec(&self.0, &other.0)
    }
}

impl TryFrom<Vec<f64>> for PositiveVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PositiveVector> for Vec<f64> {
    fn from(v: PositiveVector) -> Self {
        v.0
    }
}

impl std::ops::Deref for PositiveVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Hermitian PSD matrix with unit trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct DensityMatrix {
    base: HermitianMatrix,
}

impl DensityMatrix {
    pub fn new(base: HermitianMatrix) -> Result<Self> {
        let tr = base.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(invalid(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eig(&base)?.min();
        if min < -STATE_TOL {
            return Err(invalid(format!(
                "not positive semi-definite (min eigenvalue {min:e})"
            )));
        }
        Ok(Self { base })
    }

    /// Divides by the trace, then validates.
    pub fn normalized(h: &HermitianMatrix) -> Result<Self> {
        let tr = h.trace();
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(invalid(format!("cannot normalize matrix with trace {tr}")));
        }
        Self::new(h.scale(1.0 / tr))
    }

    /// Caller guarantees PSD with unit trace.
    pub(crate) fn new_unchecked(base: HermitianMatrix) -> Self {
        Self { base }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            base: HermitianMatrix::identity(d).scale(1.0 / d as f64),
        }
    }

    pub fn diag(probabilities: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::diag(probabilities)?)
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }
}

impl std::ops::Deref for DensityMatrix {
    type Target = HermitianMatrix;
    fn deref(&self) -> &HermitianMatrix {
        &self.base
    }
}

impl From<DensityMatrix> for MatrixJson {
    fn from(d: DensityMatrix) -> Self {
        d.base.into()
    }
}

impl TryFrom<MatrixJson> for DensityMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        DensityMatrix::new(HermitianMatrix::try_from(j)?)
    }
}

/// Ginibre-ensemble state `G G* / Tr[G G*]` with `G` drawn from a ChaCha8 stream
/// seeded by `seed`; real and imaginary parts are independent standard normals.
pub fn random_density_matrix(seed: u64, d: usize) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_matrix_from_rng(&mut rng, d)
}

pub fn random_density_matrix_from_rng<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    assert!(d >= 1, "dimension must be positive");
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let ggh = HermitianMatrix::hermitize(&g * g.adjoint());
    let tr = ggh.trace();
    DensityMatrix {
        base: ggh.scale(1.0 / tr),
    }
}
