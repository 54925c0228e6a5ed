//! Fixed-point iteration for the Petz-Augustin mean and its baselines.
//!
//! The iteration is `Q_{t+1} = (sum_j w[j] A_j^alpha / Tr[A_j^alpha Q_t^{1-alpha}])^{1/alpha}`,
//! equivalently `Q_{t+1}^{1-alpha} = T_F(Q_t^{1-alpha})` with
//! `T_F(U) = (sum_j w[j] A_j^alpha / Tr[A_j^alpha U])^{(1-alpha)/alpha}`.
//! For `alpha` in `(1/2, 1) ∪ (1, inf)` the map `T_F` contracts the Thompson
//! metric by `|1 - 1/alpha|`, so the powered iterates converge linearly.
//!
//! Also here: the classical (commuting) specialization, the dual iteration on
//! `v ∈ R^n`, the classical Augustin iteration, and entropic mirror descent
//! with a Polyak step size used as a reference solver when `alpha <= 1/2`.

use std::time::Instant;

use rayon::prelude::*;

use crate::divergences::{
    check_order, classical_objective, quantum_objective, AugustinProblem,
    ClassicalAugustinProblem, DivergenceKernel, ExtendedReal,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::{
    hermitian_eig, thompson_metric_spectral, thompson_metric_vec, trace_product_unchecked,
    CMatrix, DensityMatrix, HermitianMatrix, Spectrum, EIG_FLOOR_REL,
};
use crate::trace::{IterationTrace, TraceRecord};

/// `|1 - 1/alpha|`.
pub fn contraction_factor(alpha: f64) -> f64 {
    (1.0 - 1.0 / alpha).abs()
}

/// Whether the linear-rate guarantee covers `alpha`.
pub fn has_convergence_guarantee(alpha: f64) -> bool {
    alpha > 0.5 && alpha != 1.0
}

/// How the carried iterate is scaled between steps.
///
/// Both choices give the same trace-normalized sequence. `Unnormalized` keeps
/// `Q_t` exactly as the iteration defines it; for `alpha <= 1/2` its trace
/// over- or underflows within a few steps, so `Normalized` is the default there.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IterateScaling {
    Unnormalized,
    Normalized,
}

impl IterateScaling {
    pub fn default_for(alpha: f64) -> Self {
        if alpha > 0.5 {
            IterateScaling::Unnormalized
        } else {
            IterateScaling::Normalized
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    MaxIter,
    FixedPointResidual,
    NonFinite,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub residual_tol: f64,
    /// `None` picks [`IterateScaling::default_for`].
    pub scaling: Option<IterateScaling>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            residual_tol: 1e-10,
            scaling: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport<S> {
    /// One record per iterate, including the starting point.
    pub trace: IterationTrace,
    pub final_state: S,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// False when `alpha <= 1/2`, where no convergence guarantee exists.
    pub guaranteed: bool,
}

fn check_trace_argument(index: usize, value: f64, threshold: f64) -> Result<f64> {
    if !value.is_finite() || value <= threshold {
        return Err(Error::DegenerateTrace { index, value });
    }
    Ok(value)
}

/// `Tr[A_j^alpha U]` for every `j`, in index order.
fn state_traces(p: &AugustinProblem, u: &HermitianMatrix) -> Vec<f64> {
    p.powered_states()
        .par_iter()
        .map(|ap| trace_product_unchecked(ap, u))
        .collect()
}

/// `sum_j w[j] A_j^alpha / traces[j]`, summed in ascending `j`.
fn weighted_mixture(p: &AugustinProblem, traces: &[f64], threshold: impl Fn(usize) -> f64) -> Result<HermitianMatrix> {
    let d = p.dim();
    let mut acc = CMatrix::zeros(d, d);
    for (j, ((ap, &w), &t)) in p.powered_states().iter().zip(p.weights()).zip(traces).enumerate() {
        let t = check_trace_argument(j, t, threshold(j))?;
        acc += ap.as_matrix().scale(w / t);
    }
    HermitianMatrix::new(acc).map_err(|e| Error::NonFinite(e.to_string()))
}

fn positive_spectrum(m: &HermitianMatrix, what: &str) -> Result<Spectrum> {
    let spec = hermitian_eig(m)?;
    if !spec.is_positive_definite() {
        return Err(Error::SingularMatrix(format!(
            "{what} is not positive definite (min eigenvalue {:e})",
            spec.min()
        )));
    }
    Ok(spec)
}

/// `T_F(U) = (sum_j w[j] A_j^alpha / Tr[A_j^alpha U])^{(1-alpha)/alpha}` for positive-definite `U`.
pub fn apply_operator(p: &AugustinProblem, u: &HermitianMatrix) -> Result<HermitianMatrix> {
    if u.dim() != p.dim() {
        return Err(invalid("dimension mismatch"));
    }
    let alpha = p.alpha();
    let traces = state_traces(p, u);
    let scale = u.trace().abs();
    let m = weighted_mixture(p, &traces, |j| {
        EIG_FLOOR_REL * p.powered_states()[j].trace().abs() * scale
    })?;
    positive_spectrum(&m, "operator mixture")?.power((1.0 - alpha) / alpha)
}

/// `(sum_j w[j] A_j^alpha / Tr[A_j^alpha Q^{1-alpha}])^{1/alpha}`, the un-powered form of one step.
pub fn apply_naive_operator(p: &AugustinProblem, q: &HermitianMatrix) -> Result<HermitianMatrix> {
    let alpha = p.alpha();
    let qp = positive_spectrum(q, "iterate")?.power(1.0 - alpha)?;
    let traces = state_traces(p, &qp);
    let scale = qp.trace().abs();
    let m = weighted_mixture(p, &traces, |j| {
        EIG_FLOOR_REL * p.powered_states()[j].trace().abs() * scale
    })?;
    positive_spectrum(&m, "operator mixture")?.power(1.0 / alpha)
}

/// State of the quantum iteration at step `t`.
#[derive(Clone, Debug)]
pub struct IterateState {
    pub step: usize,
    spectrum: Spectrum,
    iterate: HermitianMatrix,
    powered: HermitianMatrix,
    normalized: DensityMatrix,
    pub(crate) traces: Vec<f64>,
    /// Objective at the trace-normalized iterate.
    pub f_value: ExtendedReal,
    /// Trace of the carried iterate.
    pub trace: f64,
    /// Set when a trace argument in the objective had to be clamped.
    pub degenerate: bool,
}

impl IterateState {
    /// Starting state `Q_1`; must be positive definite.
    pub fn new(p: &AugustinProblem, q1: &HermitianMatrix) -> Result<Self> {
        if q1.dim() != p.dim() {
            return Err(invalid("dimension mismatch"));
        }
        Self::from_spectrum(p, 1, positive_spectrum(q1, "initial iterate")?)
    }

    /// Starts from the maximally mixed state `I/d`.
    pub fn maximally_mixed(p: &AugustinProblem) -> Result<Self> {
        Self::new(p, &DensityMatrix::maximally_mixed(p.dim()))
    }

    fn from_spectrum(p: &AugustinProblem, step: usize, spectrum: Spectrum) -> Result<Self> {
        let alpha = p.alpha();
        let lambda = &spectrum.eigenvalues;
        if lambda.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::NonFinite(format!(
                "iterate at step {step} has eigenvalues outside (0, inf)"
            )));
        }
        let trace: f64 = lambda.iter().sum();
        if !trace.is_finite() {
            return Err(Error::NonFinite(format!("iterate trace overflowed at step {step}")));
        }
        let iterate = spectrum.reconstruct(lambda);
        let powered_values: Vec<f64> = lambda.iter().map(|x| x.powf(1.0 - alpha)).collect();
        if powered_values.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::NonFinite(format!("powered iterate overflowed at step {step}")));
        }
        let powered = spectrum.reconstruct(&powered_values);
        let normalized_values: Vec<f64> = lambda.iter().map(|x| x / trace).collect();
        let normalized = DensityMatrix::new_unchecked(spectrum.reconstruct(&normalized_values));
        let traces = state_traces(p, &powered);
        // F(Q / Tr Q) = sum_j w[j] log(t_j) / (alpha - 1) + log Tr Q
        let mut degenerate = false;
        let mut f = 0.0;
        for (&w, &t) in p.weights().iter().zip(&traces) {
            let t = if t > 0.0 {
                t
            } else {
                degenerate = true;
                EIG_FLOOR_REL * spectrum.max().powf(1.0 - alpha).max(f64::MIN_POSITIVE)
            };
            f += w * t.ln() / (alpha - 1.0);
        }
        f += trace.ln();
        let f_value = if f.is_finite() {
            ExtendedReal::Finite(f)
        } else {
            return Err(Error::NonFinite(format!("objective is {f} at step {step}")));
        };
        Ok(Self {
            step,
            spectrum,
            iterate,
            powered,
            normalized,
            traces,
            f_value,
            trace,
            degenerate,
        })
    }

    /// The carried iterate `Q_t`.
    pub fn iterate(&self) -> &HermitianMatrix {
        &self.iterate
    }

    /// `Q_t^{1-alpha}`.
    pub fn powered(&self) -> &HermitianMatrix {
        &self.powered
    }

    /// `Q_t / Tr[Q_t]`.
    pub fn normalized(&self) -> &DensityMatrix {
        &self.normalized
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Spectrum of `Q_t^{1-alpha}`.
    pub fn powered_spectrum(&self, alpha: f64) -> Spectrum {
        self.spectrum.mapped(|x| x.powf(1.0 - alpha))
    }

    /// `(Q_t / Tr[Q_t])^{1-alpha}`.
    pub fn normalized_powered(&self, alpha: f64) -> HermitianMatrix {
        self.powered.scale(self.trace.powf(alpha - 1.0))
    }
}

/// One step of the iteration on the un-normalized iterate.
pub fn petz_augustin_step(p: &AugustinProblem, s: &IterateState) -> Result<IterateState> {
    petz_augustin_step_scaled(p, s, IterateScaling::Unnormalized)
}

pub fn petz_augustin_step_scaled(
    p: &AugustinProblem,
    s: &IterateState,
    scaling: IterateScaling,
) -> Result<IterateState> {
    let alpha = p.alpha();
    let scale = s.powered.trace().abs();
    let m = weighted_mixture(p, &s.traces, |j| {
        EIG_FLOOR_REL * p.powered_states()[j].trace().abs() * scale
    })?;
    let mixture = positive_spectrum(&m, "operator mixture")?;
    let mut next = mixture.mapped(|x| x.powf(1.0 / alpha));
    if scaling == IterateScaling::Normalized {
        let tr: f64 = next.eigenvalues.iter().sum();
        next.eigenvalues.iter_mut().for_each(|x| *x /= tr);
    }
    IterateState::from_spectrum(p, s.step + 1, next)
}

/// Runs the iteration from `q1` until the fixed-point residual
/// `d_T(Q_{t+1}^{1-alpha}, Q_t^{1-alpha})` drops below `opts.residual_tol`.
pub fn solve_petz_augustin(
    p: &AugustinProblem,
    q1: &DensityMatrix,
    opts: &SolveOptions,
) -> Result<SolveReport<IterateState>> {
    solve_petz_augustin_with_reference(p, q1, opts, None)
}

/// As [`solve_petz_augustin`], also recording `d_T(ref^{1-alpha}, (Q_t/Tr Q_t)^{1-alpha})`.
pub fn solve_petz_augustin_with_reference(
    p: &AugustinProblem,
    q1: &DensityMatrix,
    opts: &SolveOptions,
    reference: Option<&DensityMatrix>,
) -> Result<SolveReport<IterateState>> {
    if opts.max_iter == 0 {
        return Err(invalid("max_iter must be at least 1"));
    }
    let alpha = p.alpha();
    let scaling = opts.scaling.unwrap_or_else(|| IterateScaling::default_for(alpha));
    let reference_powered = reference
        .map(|r| positive_spectrum(r, "reference").map(|s| s.mapped(|x| x.powf(1.0 - alpha))))
        .transpose()?;
    let start = Instant::now();
    let mut state = IterateState::new(p, q1)?;
    let mut trace = IterationTrace::default();
    let dist = |s: &IterateState| -> Option<f64> {
        reference_powered
            .as_ref()
            .and_then(|r| thompson_metric_spectral(&s.normalized_powered(alpha), r).ok())
    };
    trace.push(TraceRecord {
        step: state.step,
        f_value: state.f_value.to_f64(),
        trace: state.trace,
        residual_thompson: None,
        dist_to_reference: dist(&state),
        wall_time_ms: elapsed_ms(start),
        degenerate: state.degenerate,
    });
    let mut stop_reason = StopReason::MaxIter;
    for _ in 0..opts.max_iter {
        let next = match petz_augustin_step_scaled(p, &state, scaling) {
            Ok(next) => next,
            Err(Error::NonFinite(_) | Error::DegenerateTrace { .. } | Error::SingularMatrix(_)) => {
                stop_reason = StopReason::NonFinite;
                break;
            }
            Err(e) => return Err(e),
        };
        let residual = match thompson_metric_spectral(&next.powered, &state.powered_spectrum(alpha)) {
            Ok(r) if r.is_finite() => r,
            _ => {
                stop_reason = StopReason::NonFinite;
                break;
            }
        };
        state = next;
        trace.push(TraceRecord {
            step: state.step,
            f_value: state.f_value.to_f64(),
            trace: state.trace,
            residual_thompson: Some(residual),
            dist_to_reference: dist(&state),
            wall_time_ms: elapsed_ms(start),
            degenerate: state.degenerate,
        });
        if residual <= opts.residual_tol {
            stop_reason = StopReason::FixedPointResidual;
            break;
        }
    }
    Ok(SolveReport {
        trace,
        final_state: state,
        converged: stop_reason == StopReason::FixedPointResidual,
        stop_reason,
        guaranteed: has_convergence_guarantee(alpha),
    })
}

pub(crate) fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

// ---------------------------------------------------------------------------
// Classical (commuting) specialization.

fn check_positive(u: &[f64], what: &str) -> Result<()> {
    if let Some(x) = u.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(invalid(format!("{what} has a non-positive entry {x}")));
    }
    Ok(())
}

fn inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `sum_j w[j] a_j^alpha / <a_j^alpha, u>`.
fn classical_mixture(p: &ClassicalAugustinProblem, u: &[f64]) -> Result<Vec<f64>> {
    let d = p.dim();
    let scale: f64 = u.iter().sum();
    let mut acc = vec![0.0; d];
    for (j, (ap, &w)) in p.powered_points().iter().zip(p.weights()).enumerate() {
        let norm: f64 = ap.iter().sum();
        let t = check_trace_argument(j, inner(ap, u), EIG_FLOOR_REL * norm * scale)?;
        for (a, x) in acc.iter_mut().zip(ap) {
            *a += w * x / t;
        }
    }
    Ok(acc)
}

/// `T_f(u) = (sum_j w[j] a_j^alpha / <a_j^alpha, u>)^{(1-alpha)/alpha}`.
pub fn apply_classical_operator(p: &ClassicalAugustinProblem, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != p.dim() {
        return Err(invalid("dimension mismatch"));
    }
    check_positive(u, "u")?;
    let alpha = p.alpha();
    Ok(classical_mixture(p, u)?
        .into_iter()
        .map(|x| x.powf((1.0 - alpha) / alpha))
        .collect())
}

#[derive(Clone, Debug)]
pub struct ClassicalIterate {
    pub step: usize,
    pub iterate: Vec<f64>,
    pub normalized: Vec<f64>,
    pub f_value: ExtendedReal,
    pub trace: f64,
}

impl ClassicalIterate {
    pub fn new(p: &ClassicalAugustinProblem, q1: &[f64]) -> Result<Self> {
        if q1.len() != p.dim() {
            return Err(invalid("dimension mismatch"));
        }
        check_positive(q1, "initial iterate")?;
        Self::at(p, 1, q1.to_vec())
    }

    pub fn uniform(p: &ClassicalAugustinProblem) -> Result<Self> {
        let d = p.dim();
        Self::new(p, &vec![1.0 / d as f64; d])
    }

    fn at(p: &ClassicalAugustinProblem, step: usize, iterate: Vec<f64>) -> Result<Self> {
        let trace: f64 = iterate.iter().sum();
        if !trace.is_finite() || iterate.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(Error::NonFinite(format!("iterate left (0, inf)^d at step {step}")));
        }
        let normalized: Vec<f64> = iterate.iter().map(|x| x / trace).collect();
        let f_value = classical_objective(p, &normalized)?;
        Ok(Self {
            step,
            iterate,
            normalized,
            f_value,
            trace,
        })
    }

    pub fn powered(&self, alpha: f64) -> Vec<f64> {
        self.iterate.iter().map(|x| x.powf(1.0 - alpha)).collect()
    }
}

/// `q_{t+1} = T_f(q_t^{1-alpha})^{1/(1-alpha)}`.
pub fn classical_augustin_step(p: &ClassicalAugustinProblem, s: &ClassicalIterate) -> Result<ClassicalIterate> {
    classical_augustin_step_scaled(p, s, IterateScaling::Unnormalized)
}

pub fn classical_augustin_step_scaled(
    p: &ClassicalAugustinProblem,
    s: &ClassicalIterate,
    scaling: IterateScaling,
) -> Result<ClassicalIterate> {
    let alpha = p.alpha();
    let mut next: Vec<f64> = classical_mixture(p, &s.powered(alpha))?
        .into_iter()
        .map(|x| x.powf(1.0 / alpha))
        .collect();
    if scaling == IterateScaling::Normalized {
        let tr: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= tr);
    }
    ClassicalIterate::at(p, s.step + 1, next)
}

pub fn solve_classical_augustin(
    p: &ClassicalAugustinProblem,
    q1: &[f64],
    opts: &SolveOptions,
) -> Result<SolveReport<ClassicalIterate>> {
    if opts.max_iter == 0 {
        return Err(invalid("max_iter must be at least 1"));
    }
    let alpha = p.alpha();
    let scaling = opts.scaling.unwrap_or_else(|| IterateScaling::default_for(alpha));
    let start = Instant::now();
    let mut state = ClassicalIterate::new(p, q1)?;
    let mut trace = IterationTrace::default();
    trace.push(TraceRecord {
        step: state.step,
        f_value: state.f_value.to_f64(),
        trace: state.trace,
        residual_thompson: None,
        dist_to_reference: None,
        wall_time_ms: elapsed_ms(start),
        degenerate: false,
    });
    let mut stop_reason = StopReason::MaxIter;
    for _ in 0..opts.max_iter {
        let next = match classical_augustin_step_scaled(p, &state, scaling) {
            Ok(n) => n,
            Err(Error::NonFinite(_) | Error::DegenerateTrace { .. }) => {
                stop_reason = StopReason::NonFinite;
                break;
            }
            Err(e) => return Err(e),
        };
        let residual = thompson_metric_vec(&next.powered(alpha), &state.powered(alpha))?;
        state = next;
        trace.push(TraceRecord {
            step: state.step,
            f_value: state.f_value.to_f64(),
            trace: state.trace,
            residual_thompson: Some(residual),
            dist_to_reference: None,
            wall_time_ms: elapsed_ms(start),
            degenerate: false,
        });
        if residual <= opts.residual_tol {
            stop_reason = StopReason::FixedPointResidual;
            break;
        }
    }
    Ok(SolveReport {
        trace,
        final_state: state,
        converged: stop_reason == StopReason::FixedPointResidual,
        stop_reason,
        guaranteed: has_convergence_guarantee(alpha),
    })
}

/// Gradient of the classical objective at a strictly positive `q`:
/// `grad f(q)[i] = -sum_j w[j] a_j^alpha[i] q[i]^{-alpha} / <a_j^alpha, q^{1-alpha}>`.
pub fn classical_gradient(p: &ClassicalAugustinProblem, q: &[f64]) -> Result<Vec<f64>> {
    if q.len() != p.dim() {
        return Err(invalid("dimension mismatch"));
    }
    check_positive(q, "q")?;
    let alpha = p.alpha();
    let qp: Vec<f64> = q.iter().map(|x| x.powf(1.0 - alpha)).collect();
    let mix = classical_mixture(p, &qp)?;
    Ok(mix
        .iter()
        .zip(q)
        .map(|(m, x)| -m * x.powf(-alpha))
        .collect())
}

/// Classical Augustin iteration `q_{t+1}[i] = q_t[i] * (-grad f(q_t)[i])`.
pub fn augustin_classical_baseline_step(p: &ClassicalAugustinProblem, q: &[f64]) -> Result<Vec<f64>> {
    let g = classical_gradient(p, q)?;
    Ok(q.iter().zip(&g).map(|(x, gi)| -x * gi).collect())
}

// ---------------------------------------------------------------------------
// Dual iteration on v.

/// `mu(v) = (sum_j w[j] exp((1-alpha) v[j]) A_j^alpha)^{1/alpha}`.
pub fn dual_mean(p: &AugustinProblem, v: &[f64]) -> Result<HermitianMatrix> {
    dual_mixture_spectrum(p, v)?.power(1.0 / p.alpha())
}

fn dual_mixture_spectrum(p: &AugustinProblem, v: &[f64]) -> Result<Spectrum> {
    if v.len() != p.n() {
        return Err(invalid(format!("dual vector has length {}, expected {}", v.len(), p.n())));
    }
    let alpha = p.alpha();
    let d = p.dim();
    let mut acc = CMatrix::zeros(d, d);
    for ((ap, &w), &vj) in p.powered_states().iter().zip(p.weights()).zip(v) {
        acc += ap.as_matrix().scale(w * ((1.0 - alpha) * vj).exp());
    }
    let m = HermitianMatrix::new(acc).map_err(|e| Error::NonFinite(e.to_string()))?;
    positive_spectrum(&m, "dual mixture")
}

#[derive(Clone, Debug)]
pub struct DualState {
    pub v: Vec<f64>,
    pub mu: HermitianMatrix,
}

impl DualState {
    pub fn new(p: &AugustinProblem, v: Vec<f64>) -> Result<Self> {
        let mu = dual_mean(p, &v)?;
        Ok(Self { v, mu })
    }
}

/// `v_{t+1}[j] = D_alpha(A_j || mu(v_t))`.
pub fn cheng_dual_step(p: &AugustinProblem, s: &DualState) -> Result<DualState> {
    let kernel = DivergenceKernel::new(&s.mu, p.alpha())?;
    let v = p
        .states()
        .iter()
        .zip(p.powered_states())
        .map(|(a, ap)| {
            kernel
                .evaluate(a, ap)
                .value
                .finite()
                .ok_or_else(|| Error::NonFinite("infinite divergence in dual step".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    DualState::new(p, v)
}

/// `H(v) = ((1-alpha)/alpha) sum_j w[j] v[j] - log Tr[mu(v)]`.
pub fn dual_objective(p: &AugustinProblem, v: &[f64]) -> Result<f64> {
    let alpha = p.alpha();
    let spec = dual_mixture_spectrum(p, v)?;
    let tr: f64 = spec.eigenvalues.iter().map(|x| x.powf(1.0 / alpha)).sum();
    let lin: f64 = p.weights().iter().zip(v).map(|(w, x)| w * x).sum();
    Ok((1.0 - alpha) / alpha * lin - tr.ln())
}

// ---------------------------------------------------------------------------
// Entropic mirror descent with Polyak step size.

/// Centered sup-norm `min_c max_i |g[i] - c|`, the dual norm relevant to the
/// simplex since the entropic update ignores constant shifts of the gradient.
fn centered_sup(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = values.fold(f64::INFINITY, f64::min);
    ((max - min) / 2.0, min)
}

/// `q' ∝ q ⊙ exp(-eta (g - min g))` with `eta = (f(q) - f_target) / ||g||_*^2`.
pub fn emd_polyak_step_classical(p: &ClassicalAugustinProblem, q: &[f64], f_target: f64) -> Result<Vec<f64>> {
    let g = classical_gradient(p, q)?;
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("gradient is not finite".into()));
    }
    let f = classical_objective(p, q)?
        .finite()
        .ok_or_else(|| Error::NonFinite("objective is infinite".into()))?;
    let (gn, gmin) = centered_sup(g.iter().copied());
    if gn == 0.0 || f <= f_target {
        return Ok(q.to_vec());
    }
    let eta = (f - f_target) / (gn * gn);
    let mut next: Vec<f64> = q
        .iter()
        .zip(&g)
        .map(|(x, gi)| x * (-eta * (gi - gmin)).exp())
        .collect();
    let s: f64 = next.iter().sum();
    next.iter_mut().for_each(|x| *x /= s);
    if next.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::NonFinite("mirror step underflowed".into()));
    }
    Ok(next)
}

/// Gradient of `F` at a positive-definite `Q` via divided differences of `x^{1-alpha}`.
pub fn quantum_gradient(p: &AugustinProblem, q: &HermitianMatrix) -> Result<HermitianMatrix> {
    let alpha = p.alpha();
    let spec = positive_spectrum(q, "iterate")?;
    let qp = spec.power(1.0 - alpha)?;
    let traces = state_traces(p, &qp);
    let d = p.dim();
    let mut b = CMatrix::zeros(d, d);
    for (j, ((ap, &w), &t)) in p.powered_states().iter().zip(p.weights()).zip(&traces).enumerate() {
        let t = check_trace_argument(j, t, 0.0)?;
        b += ap.as_matrix().scale(w / ((alpha - 1.0) * t));
    }
    let u = &spec.eigenvectors;
    let mut local = u.adjoint() * b * u;
    let lam = &spec.eigenvalues;
    let f = |x: f64| x.powf(1.0 - alpha);
    for i in 0..d {
        for k in 0..d {
            let (x, y) = (lam[i], lam[k]);
            let dd = if (x - y).abs() <= 1e-12 * x.max(y) {
                (1.0 - alpha) * (0.5 * (x + y)).powf(-alpha)
            } else {
                (f(x) - f(y)) / (x - y)
            };
            local[(i, k)] *= dd;
        }
    }
    HermitianMatrix::new(u * local * u.adjoint()).map_err(|e| Error::NonFinite(e.to_string()))
}

/// Matrix entropic mirror step `Q' ∝ exp(log Q - eta grad F(Q))` with Polyak `eta`.
pub fn emd_polyak_step_quantum(p: &AugustinProblem, q: &DensityMatrix, f_target: f64) -> Result<DensityMatrix> {
    let g = quantum_gradient(p, q)?;
    let gs = hermitian_eig(&g)?;
    let f = quantum_objective(p, q)?
        .finite()
        .ok_or_else(|| Error::NonFinite("objective is infinite".into()))?;
    let (gn, _) = centered_sup(gs.eigenvalues.iter().copied());
    if gn == 0.0 || f <= f_target {
        return Ok(q.clone());
    }
    let eta = (f - f_target) / (gn * gn);
    let log_q = positive_spectrum(q, "iterate")?.map(f64::ln);
    let exponent = log_q.sub(&g.scale(eta))?;
    let es = hermitian_eig(&exponent)?;
    let top = es.max();
    let values: Vec<f64> = es.eigenvalues.iter().map(|x| (x - top).exp()).collect();
    let s: f64 = values.iter().sum();
    let normalized: Vec<f64> = values.iter().map(|x| x / s).collect();
    if normalized.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::NonFinite("mirror step produced a singular iterate".into()));
    }
    Ok(DensityMatrix::new_unchecked(es.reconstruct(&normalized)))
}

#[derive(Clone, Debug)]
pub struct PolyakReport<S> {
    pub best: S,
    pub best_value: f64,
    /// Objective at every iterate, starting point included.
    pub values: Vec<f64>,
}

/// Polyak steps toward the moving target `best - delta`, halving `delta` when a step fails to decrease.
fn polyak_driver<S: Clone>(
    x1: S,
    iters: usize,
    value: impl Fn(&S) -> Result<f64>,
    step: impl Fn(&S, f64) -> Result<S>,
) -> Result<PolyakReport<S>> {
    let mut x = x1;
    let mut fx = value(&x)?;
    let mut best = (x.clone(), fx);
    let mut delta = if fx != 0.0 { 0.5 * fx.abs() } else { 1.0 };
    let mut values = vec![fx];
    for _ in 0..iters {
        let next = step(&x, best.1 - delta)?;
        let f_next = value(&next)?;
        if !(f_next < fx) {
            delta *= 0.5;
        }
        x = next;
        fx = f_next;
        if fx < best.1 {
            best = (x.clone(), fx);
        }
        values.push(fx);
    }
    Ok(PolyakReport {
        best: best.0,
        best_value: best.1,
        values,
    })
}

pub fn solve_emd_polyak_classical(
    p: &ClassicalAugustinProblem,
    q1: &[f64],
    iters: usize,
) -> Result<PolyakReport<Vec<f64>>> {
    polyak_driver(
        q1.to_vec(),
        iters,
        |q| {
            classical_objective(p, q)?
                .finite()
                .ok_or_else(|| Error::NonFinite("objective is infinite".into()))
        },
        |q, target| emd_polyak_step_classical(p, q, target),
    )
}

pub fn solve_emd_polyak_quantum(
    p: &AugustinProblem,
    q1: &DensityMatrix,
    iters: usize,
) -> Result<PolyakReport<DensityMatrix>> {
    polyak_driver(
        q1.clone(),
        iters,
        |q| {
            quantum_objective(p, q)?
                .finite()
                .ok_or_else(|| Error::NonFinite("objective is infinite".into()))
        },
        |q, target| emd_polyak_step_quantum(p, q, target),
    )
}

// ---------------------------------------------------------------------------
// Fixed instances.

/// Thompson distances for the single-state, `alpha = 3` instance on which the
/// un-powered step map fails to contract by `|1 - 1/alpha|`.
#[derive(Clone, Debug)]
pub struct CounterexampleReport {
    /// `d_T(S(V), S(U))` for the step map `S`.
    pub image_distance: f64,
    /// `|1 - 1/alpha| d_T(V, U)`.
    pub contraction_bound: f64,
    pub violated: bool,
}

pub fn naive_contraction_counterexample() -> Result<CounterexampleReport> {
    let alpha = 3.0;
    let a = HermitianMatrix::from_real_rows(&[vec![19.5364, 4.42], vec![4.42, 1.1]])?;
    let u = HermitianMatrix::from_real_rows(&[vec![2.0 / 3.0, 1.0 / 3.0], vec![1.0 / 3.0, 1.0 / 3.0]])?;
    let v = HermitianMatrix::from_real_rows(&[
        vec![1.0 / 2.1, 1.0 / 2.1],
        vec![1.0 / 2.1, 1.1 / 2.1],
    ])?;
    let p = AugustinProblem::from_psd_states(vec![a], vec![1.0], alpha)?;
    let tv = apply_naive_operator(&p, &v)?;
    let tu = apply_naive_operator(&p, &u)?;
    let image_distance = crate::linalg::thompson_metric_psd(&tv, &tu)?;
    let contraction_bound = contraction_factor(alpha) * crate::linalg::thompson_metric_psd(&v, &u)?;
    Ok(CounterexampleReport {
        image_distance,
        contraction_bound,
        violated: image_distance > contraction_bound,
    })
}

/// Diagonal entries of the three-state instance used to exhibit divergence for `alpha <= 1/2`.
pub const DIVERGENCE_DEMO_POINTS: [[f64; 3]; 3] = [
    [0.9, 0.09, 0.01],
    [0.009, 0.99, 0.001],
    [0.0001, 0.0009, 0.999],
];

pub fn divergence_demo_classical(alpha: f64) -> Result<ClassicalAugustinProblem> {
    check_order(alpha)?;
    ClassicalAugustinProblem::new(
        DIVERGENCE_DEMO_POINTS.iter().map(|r| r.to_vec()).collect(),
        vec![1.0 / 3.0; 3],
        alpha,
    )
}

pub fn divergence_demo_problem(alpha: f64) -> Result<AugustinProblem> {
    let states = DIVERGENCE_DEMO_POINTS
        .iter()
        .map(|r| DensityMatrix::diag(r))
        .collect::<Result<Vec<_>>>()?;
    AugustinProblem::new(states, vec![1.0 / 3.0; 3], alpha)
}
