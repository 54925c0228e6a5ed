//! Petz-Rényi divergence and the weighted objectives whose minimizers are the
//! Petz-Augustin mean (quantum) and the Augustin mean (classical).

use std::cmp::Ordering;
use std::ops::Add;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    hermitian_eig, random_density_matrix_from_rng, trace_product_unchecked, DensityMatrix, HermitianMatrix,
    MatrixJson, Spectrum, EIG_FLOOR_REL,
};

/// Tolerance on `sum(w) = 1` and on probability vectors summing to one.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Entries drawn uniformly from `[0.05, 1)` and normalized to sum to one.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Real number or `+inf`. Sums and non-negative scalings absorb `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            ExtendedReal::PosInfinity => None,
        }
    }

    /// As an `f64`, with `+inf` mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn scale(self, w: f64) -> Self {
        debug_assert!(w >= 0.0);
        match self {
            ExtendedReal::Finite(x) => ExtendedReal::Finite(w * x),
            ExtendedReal::PosInfinity if w == 0.0 => ExtendedReal::Finite(0.0),
            ExtendedReal::PosInfinity => ExtendedReal::PosInfinity,
        }
    }
}

impl Add for ExtendedReal {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::PosInfinity,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a.partial_cmp(b),
            (ExtendedReal::Finite(_), ExtendedReal::PosInfinity) => Some(Ordering::Less),
            (ExtendedReal::PosInfinity, ExtendedReal::Finite(_)) => Some(Ordering::Greater),
            (ExtendedReal::PosInfinity, ExtendedReal::PosInfinity) => Some(Ordering::Equal),
        }
    }
}

impl std::iter::Sum for ExtendedReal {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ExtendedReal::Finite(0.0), |a, b| a + b)
    }
}

impl std::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::PosInfinity => write!(f, "inf"),
        }
    }
}

/// Divergence value plus a flag set when the trace argument had to be clamped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: ExtendedReal,
    pub degenerate: bool,
}

pub fn check_order(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha == 1.0 {
        return Err(Error::InvalidOrder(alpha));
    }
    Ok(alpha)
}

fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(invalid(format!("{} weights for {n} states", weights.len())));
    }
    if n == 0 {
        return Err(invalid("at least one state is required"));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(invalid(format!("weight {w} is not strictly positive")));
    }
    let s: f64 = weights.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(invalid(format!("weights sum to {s}, not 1")));
    }
    Ok(())
}

/// Pre-processed second argument of `D_alpha(. || Q)`.
///
/// Holds `Q^{1-alpha}` restricted to the support of `Q` and, when `Q` is
/// singular, the projector onto its kernel.
pub struct DivergenceKernel {
    alpha: f64,
    q_power: HermitianMatrix,
    kernel: Option<HermitianMatrix>,
    floor: f64,
}

impl DivergenceKernel {
    pub fn new(q: &HermitianMatrix, alpha: f64) -> Result<Self> {
        check_order(alpha)?;
        Self::from_spectrum(&hermitian_eig(q)?, alpha)
    }

    pub fn from_spectrum(spec: &Spectrum, alpha: f64) -> Result<Self> {
        check_order(alpha)?;
        if spec.max() <= 0.0 {
            return Err(invalid("second argument must be a nonzero PSD matrix"));
        }
        let floor = spec.floor();
        if spec.min() < -1e-10 * spec.max() {
            return Err(invalid(format!(
                "second argument is not PSD (min eigenvalue {:e})",
                spec.min()
            )));
        }
        let on_support = |x: f64| x >= floor;
        let q_power = spec.map(|x| if on_support(x) { x.powf(1.0 - alpha) } else { 0.0 });
        let kernel = if spec.eigenvalues.iter().all(|&x| on_support(x)) {
            None
        } else {
            Some(spec.map(|x| if on_support(x) { 0.0 } else { 1.0 }))
        };
        Ok(Self {
            alpha,
            q_power,
            kernel,
            floor,
        })
    }

    /// `D_alpha(A || Q)` given `A` and its power `A^alpha`.
    pub fn evaluate(&self, a: &HermitianMatrix, a_power: &HermitianMatrix) -> Evaluation {
        let alpha = self.alpha;
        if let Some(ker) = &self.kernel {
            let leak = trace_product_unchecked(a, ker);
            if alpha > 1.0 && leak > 1e-10 * a.trace().abs().max(f64::MIN_POSITIVE) {
                return Evaluation {
                    value: ExtendedReal::PosInfinity,
                    degenerate: false,
                };
            }
        }
        let mut tr = trace_product_unchecked(a_power, &self.q_power);
        let mut degenerate = false;
        if self.kernel.is_some() && alpha < 1.0 && tr <= 1e-14 * a_power.trace().abs() {
            return Evaluation {
                value: ExtendedReal::PosInfinity,
                degenerate: false,
            };
        }
        if !(tr > 0.0) {
            tr = self.floor.max(f64::MIN_POSITIVE);
            degenerate = true;
        }
        Evaluation {
            value: ExtendedReal::Finite(tr.ln() / (alpha - 1.0)),
            degenerate,
        }
    }
}

/// `D_alpha(A || Q) = log(Tr[A^alpha Q^{1-alpha}]) / (alpha - 1)`, `+inf` when undefined.
pub fn petz_renyi_divergence(a: &DensityMatrix, q: &HermitianMatrix, alpha: f64) -> Result<ExtendedReal> {
    check_order(alpha)?;
    if a.dim() != q.dim() {
        return Err(invalid("dimension mismatch"));
    }
    let a_power = hermitian_eig(a)?.psd_power(alpha)?;
    Ok(DivergenceKernel::new(q, alpha)?.evaluate(a, &a_power).value)
}

/// Problem data for the Petz-Augustin mean: states `A_j`, weights `w`, order `alpha`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ProblemJson", into = "ProblemJson")]
pub struct AugustinProblem {
    states: Vec<HermitianMatrix>,
    weights: Vec<f64>,
    alpha: f64,
    powered: Vec<HermitianMatrix>,
}

#[derive(Serialize, Deserialize)]
struct ProblemJson {
    alpha: f64,
    weights: Vec<f64>,
    states: Vec<MatrixJson>,
}

impl AugustinProblem {
    pub fn new(states: Vec<DensityMatrix>, weights: Vec<f64>, alpha: f64) -> Result<Self> {
        let states = states.into_iter().map(DensityMatrix::into_hermitian).collect();
        Self::build(states, weights, alpha)
    }

    /// Like [`AugustinProblem::new`] but accepts PSD states of any positive trace.
    pub fn from_psd_states(states: Vec<HermitianMatrix>, weights: Vec<f64>, alpha: f64) -> Result<Self> {
        for s in &states {
            let min = hermitian_eig(s)?.min();
            if min < -1e-10 * s.max_abs().max(1.0) {
                return Err(invalid(format!("state is not PSD (min eigenvalue {min:e})")));
            }
        }
        Self::build(states, weights, alpha)
    }

    /// `n` Ginibre states of dimension `d` with random weights, all drawn from one seeded stream.
    pub fn random(seed: u64, n: usize, d: usize, alpha: f64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid("n and d must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states = (0..n).map(|_| random_density_matrix_from_rng(&mut rng, d)).collect();
        let weights = random_simplex(&mut rng, n);
        Self::new(states, weights, alpha)
    }

    /// Uniform weights.
    pub fn uniform(states: Vec<DensityMatrix>, alpha: f64) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(invalid("at least one state is required"));
        }
        Self::new(states, vec![1.0 / n as f64; n], alpha)
    }

    fn build(states: Vec<HermitianMatrix>, weights: Vec<f64>, alpha: f64) -> Result<Self> {
        check_order(alpha)?;
        check_weights(&weights, states.len())?;
        let d = states[0].dim();
        if states.iter().any(|s| s.dim() != d) {
            return Err(invalid("states have different dimensions"));
        }
        let mut sum = states[0].clone();
        for s in &states[1..] {
            sum = sum.add(s)?;
        }
        let spec = hermitian_eig(&sum)?;
        if spec.min() <= EIG_FLOOR_REL * spec.max() {
            return Err(Error::SingularMatrix(format!(
                "sum of states is not full rank (min eigenvalue {:e})",
                spec.min()
            )));
        }
        let powered = states
            .iter()
            .map(|s| hermitian_eig(s)?.psd_power(alpha))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            states,
            weights,
            alpha,
            powered,
        })
    }

    /// Same states and order with new weights; the cached powers are reused.
    pub fn reweighted(&self, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, self.states.len())?;
        Ok(Self {
            weights,
            ..self.clone()
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[HermitianMatrix] {
        &self.states
    }

    /// Cached `A_j^alpha`.
    pub fn powered_states(&self) -> &[HermitianMatrix] {
        &self.powered
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }
}

impl From<AugustinProblem> for ProblemJson {
    fn from(p: AugustinProblem) -> Self {
        ProblemJson {
            alpha: p.alpha,
            weights: p.weights,
            states: p.states.into_iter().map(MatrixJson::from).collect(),
        }
    }
}

impl TryFrom<ProblemJson> for AugustinProblem {
    type Error = Error;
    fn try_from(j: ProblemJson) -> Result<Self> {
        let states = j
            .states
            .into_iter()
            .map(DensityMatrix::try_from)
            .collect::<Result<Vec<_>>>()?;
        AugustinProblem::new(states, j.weights, j.alpha)
    }
}

/// `F(Q) = sum_j w[j] D_alpha(A_j || Q)`, reduced in ascending `j`.
pub fn quantum_objective(p: &AugustinProblem, q: &HermitianMatrix) -> Result<ExtendedReal> {
    Ok(quantum_objective_detailed(p, q)?.value)
}

pub fn quantum_objective_detailed(p: &AugustinProblem, q: &HermitianMatrix) -> Result<Evaluation> {
    if q.dim() != p.dim() {
        return Err(invalid("dimension mismatch"));
    }
    let kernel = DivergenceKernel::new(q, p.alpha)?;
    Ok(weighted_sum(p.weights.iter().enumerate().map(|(j, &w)| {
        (w, kernel.evaluate(&p.states[j], &p.powered[j]))
    })))
}

fn weighted_sum(terms: impl Iterator<Item = (f64, Evaluation)>) -> Evaluation {
    let mut value = ExtendedReal::Finite(0.0);
    let mut degenerate = false;
    for (w, e) in terms {
        value = value + e.value.scale(w);
        degenerate |= e.degenerate;
    }
    Evaluation { value, degenerate }
}

/// Classical data: probability vectors `a_j`, weights `w`, order `alpha`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ClassicalJson", into = "ClassicalJson")]
pub struct ClassicalAugustinProblem {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    alpha: f64,
    powered: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ClassicalJson {
    alpha: f64,
    weights: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl ClassicalAugustinProblem {
    /// `n` random points of the open simplex in `R^d` with random weights.
    pub fn random(seed: u64, n: usize, d: usize, alpha: f64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid("n and d must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n).map(|_| random_simplex(&mut rng, d)).collect();
        let weights = random_simplex(&mut rng, n);
        Self::new(points, weights, alpha)
    }

    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>, alpha: f64) -> Result<Self> {
        for a in &points {
            check_probability(a)?;
        }
        Self::build(points, weights, alpha)
    }

    /// Accepts nonnegative points of any positive mass.
    pub fn from_nonnegative_points(points: Vec<Vec<f64>>, weights: Vec<f64>, alpha: f64) -> Result<Self> {
        for a in &points {
            if a.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) || a.iter().sum::<f64>() <= 0.0 {
                return Err(invalid("points must be nonnegative and nonzero"));
            }
        }
        Self::build(points, weights, alpha)
    }

    fn build(points: Vec<Vec<f64>>, weights: Vec<f64>, alpha: f64) -> Result<Self> {
        check_order(alpha)?;
        check_weights(&weights, points.len())?;
        let d = points[0].len();
        if d == 0 || points.iter().any(|a| a.len() != d) {
            return Err(invalid("points have different or zero dimensions"));
        }
        for i in 0..d {
            if points.iter().all(|a| a[i] <= 0.0) {
                return Err(invalid(format!("coordinate {i} vanishes in every point")));
            }
        }
        let powered = points
            .iter()
            .map(|a| a.iter().map(|&x| if x > 0.0 { x.powf(alpha) } else { 0.0 }).collect())
            .collect();
        Ok(Self {
            points,
            weights,
            alpha,
            powered,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn powered_points(&self) -> &[Vec<f64>] {
        &self.powered
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// The same problem with every vector viewed as a diagonal matrix.
    pub fn embed(&self) -> Result<AugustinProblem> {
        let states = self
            .points
            .iter()
            .map(|a| HermitianMatrix::diag(a))
            .collect::<Result<Vec<_>>>()?;
        AugustinProblem::from_psd_states(states, self.weights.clone(), self.alpha)
    }
}

impl From<ClassicalAugustinProblem> for ClassicalJson {
    fn from(p: ClassicalAugustinProblem) -> Self {
        ClassicalJson {
            alpha: p.alpha,
            weights: p.weights,
            points: p.points,
        }
    }
}

impl TryFrom<ClassicalJson> for ClassicalAugustinProblem {
    type Error = Error;
    fn try_from(j: ClassicalJson) -> Result<Self> {
        ClassicalAugustinProblem::new(j.points, j.weights, j.alpha)
    }
}

pub fn check_probability(a: &[f64]) -> Result<()> {
    if a.is_empty() {
        return Err(invalid("empty probability vector"));
    }
    if a.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(invalid("probability vector has a negative or non-finite entry"));
    }
    let s: f64 = a.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(invalid(format!("probability vector sums to {s}")));
    }
    Ok(())
}

/// Classical Rényi divergence `log(<a^alpha, q^{1-alpha}>) / (alpha - 1)` from `a^alpha`.
pub fn classical_divergence(a_power: &[f64], q: &[f64], alpha: f64) -> Evaluation {
    let mut s = 0.0;
    for (&ap, &qi) in a_power.iter().zip(q) {
        if ap == 0.0 {
            continue;
        }
        if qi <= 0.0 {
            if alpha > 1.0 {
                return Evaluation {
                    value: ExtendedReal::PosInfinity,
                    degenerate: false,
                };
            }
            continue;
        }
        s += ap * qi.powf(1.0 - alpha);
    }
    if s <= 0.0 {
        return Evaluation {
            value: ExtendedReal::PosInfinity,
            degenerate: false,
        };
    }
    Evaluation {
        value: ExtendedReal::Finite(s.ln() / (alpha - 1.0)),
        degenerate: false,
    }
}

/// `f(q) = sum_j w[j] log(<a_j^alpha, q^{1-alpha}>) / (alpha - 1)`.
pub fn classical_objective(p: &ClassicalAugustinProblem, q: &[f64]) -> Result<ExtendedReal> {
    if q.len() != p.dim() {
        return Err(invalid("dimension mismatch"));
    }
    if q.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(invalid("q must be nonnegative"));
    }
    Ok(weighted_sum(
        p.weights
            .iter()
            .zip(&p.powered)
            .map(|(&w, ap)| (w, classical_divergence(ap, q, p.alpha))),
    )
    .value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_density_matrix;

    #[test]
    fn extended_real_is_absorbing() {
        let inf = ExtendedReal::PosInfinity;
        let one = ExtendedReal::Finite(1.0);
        assert_eq!(one + inf, inf);
        assert!(one < inf);
        assert_eq!(inf.scale(0.3), inf);
        assert_eq!(vec![one, one].into_iter().sum::<ExtendedReal>(), ExtendedReal::Finite(2.0));
    }

    #[test]
    fn divergence_of_state_with_itself_is_zero() {
        for seed in 0..5 {
            let a = random_density_matrix(seed, 6);
            for alpha in [0.3, 0.8, 1.5, 3.0] {
                let d = petz_renyi_divergence(&a, &a, alpha).unwrap().finite().unwrap();
                assert!(d.abs() < 1e-10, "{d}");
            }
        }
    }

    #[test]
    fn diagonal_divergence_value() {
        let a = DensityMatrix::diag(&[0.5, 0.5]).unwrap();
        let q = HermitianMatrix::diag(&[0.25, 0.75]).unwrap();
        // 0.25*4 + 0.25*(4/3) = 4/3
        let d = petz_renyi_divergence(&a, &q, 2.0).unwrap().finite().unwrap();
        assert!((d - (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert!((d - 0.287682).abs() < 1e-6);
    }

    #[test]
    fn kernel_cases_are_infinite() {
        let a = DensityMatrix::diag(&[0.5, 0.5]).unwrap();
        let q = HermitianMatrix::diag(&[1.0, 0.0]).unwrap();
        assert_eq!(petz_renyi_divergence(&a, &q, 2.0).unwrap(), ExtendedReal::PosInfinity);
        // alpha < 1 is finite on overlapping supports
        assert!(petz_renyi_divergence(&a, &q, 0.5).unwrap().is_finite());
        let b = DensityMatrix::diag(&[0.0, 1.0]).unwrap();
        assert_eq!(petz_renyi_divergence(&b, &q, 0.5).unwrap(), ExtendedReal::PosInfinity);
        // support of A inside support of Q keeps alpha > 1 finite
        let c = DensityMatrix::diag(&[1.0, 0.0]).unwrap();
        let v = petz_renyi_divergence(&c, &q, 2.0).unwrap().finite().unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn invalid_orders() {
        let a = DensityMatrix::maximally_mixed(2);
        for alpha in [0.0, 1.0, -1.0, f64::NAN] {
            assert!(matches!(
                petz_renyi_divergence(&a, &a, alpha),
                Err(Error::InvalidOrder(_))
            ));
        }
    }

    #[test]
    fn objective_with_one_state_is_the_divergence() {
        let a = random_density_matrix(1, 4);
        let q = random_density_matrix(2, 4);
        let p = AugustinProblem::new(vec![a.clone()], vec![1.0], 1.7).unwrap();
        let f = quantum_objective(&p, &q).unwrap();
        let d = petz_renyi_divergence(&a, &q, 1.7).unwrap();
        assert!((f.to_f64() - d.to_f64()).abs() < 1e-14);
        let same = AugustinProblem::uniform(vec![a.clone(), a.clone(), a.clone()], 0.6).unwrap();
        assert!(quantum_objective(&same, &a).unwrap().to_f64().abs() < 1e-12);
    }

    #[test]
    fn problem_validation() {
        let a = DensityMatrix::diag(&[1.0, 0.0]).unwrap();
        let b = DensityMatrix::diag(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            AugustinProblem::new(vec![a.clone()], vec![1.0], 2.0),
            Err(Error::SingularMatrix(_))
        ));
        assert!(AugustinProblem::new(vec![a.clone(), b.clone()], vec![0.5, 0.4], 2.0).is_err());
        assert!(AugustinProblem::new(vec![a.clone(), b.clone()], vec![1.0, 0.0], 2.0).is_err());
        assert!(AugustinProblem::new(vec![a.clone(), b.clone()], vec![0.5, 0.5], 1.0).is_err());
        let p = AugustinProblem::new(vec![a, b], vec![0.5, 0.5], 0.7).unwrap();
        for (s, sp) in p.states().iter().zip(p.powered_states()) {
            let direct = s.eig().unwrap().psd_power(0.7).unwrap();
            assert!(direct.sub(sp).unwrap().max_abs() < 1e-10);
        }
    }

    #[test]
    fn classical_examples() {
        let p = ClassicalAugustinProblem::new(vec![vec![0.5, 0.5]], vec![1.0], 2.0).unwrap();
        let v = classical_objective(&p, &[0.25, 0.75]).unwrap().to_f64();
        assert!((v - (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert!(classical_objective(&p, &[0.5, 0.5]).unwrap().to_f64().abs() < 1e-15);
        assert_eq!(classical_objective(&p, &[1.0, 0.0]).unwrap(), ExtendedReal::PosInfinity);
        assert!(ClassicalAugustinProblem::new(vec![vec![0.5, 0.6]], vec![1.0], 2.0).is_err());
        assert!(ClassicalAugustinProblem::new(vec![vec![1.0, 0.0]], vec![1.0], 2.0).is_err());
    }

    #[test]
    fn problem_json_round_trip() {
        let p = AugustinProblem::uniform(
            vec![random_density_matrix(1, 3), random_density_matrix(2, 3)],
            1.5,
        )
        .unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"alpha\":1.5"));
        let back: AugustinProblem = serde_json::from_str(&text).unwrap();
        assert_eq!(back.weights(), p.weights());
        let bad = text.replace("\"alpha\":1.5", "\"alpha\":1.0");
        assert!(serde_json::from_str::<AugustinProblem>(&bad).is_err());
    }
}
