//! Petz capacity by entropic mirror descent over input weights.
//!
//! `g(w) = -min_Q sum_j w[j] D_alpha(A_j || Q)` is convex on the simplex,
//! `C_alpha = -min_w g(w)`, and `grad g(w)[j] = -D_alpha(A_j || Q*(w))` where
//! `Q*(w)` is the Petz-Augustin mean for weights `w`. Each outer step calls
//! the fixed-point solver as an inexact oracle.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::augustin::{contraction_factor, elapsed_ms, petz_augustin_step, IterateState};
use crate::divergences::{AugustinProblem, SIMPLEX_TOL};
use crate::error::{invalid, Error, Result};
use crate::linalg::{thompson_metric_spectral, DensityMatrix};
use crate::trace::fmt_f64;

pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct CapacityProblem {
    base: AugustinProblem,
}

impl CapacityProblem {
    /// Requires `alpha` in `(1/2, 1)` and a full-rank sum of states.
    pub fn new(states: Vec<DensityMatrix>, alpha: f64) -> Result<Self> {
        if !(alpha > 0.5 && alpha < 1.0) {
            return Err(invalid(format!("capacity requires alpha in (1/2, 1), got {alpha}")));
        }
        Ok(Self {
            base: AugustinProblem::uniform(states, alpha)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.base.alpha()
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// The Augustin problem with weights `w`.
    pub fn at(&self, w: &[f64]) -> Result<AugustinProblem> {
        check_simplex_interior(w, self.n())?;
        self.base.reweighted(w.to_vec())
    }
}

fn check_simplex_interior(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(invalid(format!("{} weights for {n} states", w.len())));
    }
    if let Some(x) = w.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(invalid(format!("weight {x} is not strictly positive")));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(invalid(format!("weights sum to {s}, not 1")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct OracleOutput {
    pub g_hat: f64,
    pub grad_hat: Vec<f64>,
    pub inner_iters: usize,
    /// Normalized inner iterate at which the divergences were evaluated.
    pub q: DensityMatrix,
}

/// Inner step budget that guarantees gradient accuracy `eps` from a start whose
/// first residual is `r1`: each gradient entry is off by at most
/// `2 d / (1 - alpha)` when the powered iterate is `d` away from the optimum.
pub fn inner_iteration_bound(alpha: f64, r1: f64, eps: f64) -> usize {
    let kappa = contraction_factor(alpha);
    let d0 = r1 / (1.0 - kappa);
    let target = (1.0 - alpha) * eps / 2.0;
    if d0 <= target {
        return 1;
    }
    ((d0 / target).ln() / (1.0 / kappa).ln()).ceil().max(1.0) as usize
}

/// `(g_hat, grad_hat)` with every gradient entry within `eps` of `grad g(w)`.
pub fn approx_oracle(p: &CapacityProblem, w: &[f64], eps: f64) -> Result<OracleOutput> {
    approx_oracle_from(p, w, eps, None)
}

/// As [`approx_oracle`], starting the inner iteration at `start` (default `I/d`).
pub fn approx_oracle_from(
    p: &CapacityProblem,
    w: &[f64],
    eps: f64,
    start: Option<&DensityMatrix>,
) -> Result<OracleOutput> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(invalid(format!("oracle accuracy must be positive, got {eps}")));
    }
    let problem = p.at(w)?;
    let alpha = problem.alpha();
    let kappa = contraction_factor(alpha);
    let q1 = match start {
        Some(q) => q.clone(),
        None => DensityMatrix::maximally_mixed(problem.dim()),
    };
    let mut state = IterateState::new(&problem, &q1)?;
    let mut budget = None;
    let mut iters = 0;
    loop {
        let next = petz_augustin_step(&problem, &state)?;
        iters += 1;
        let r = thompson_metric_spectral(next.powered(), &state.powered_spectrum(alpha))?;
        state = next;
        let budget = *budget.get_or_insert_with(|| inner_iteration_bound(alpha, r, eps));
        // a posteriori: d_T(Q_{t+1}, Q*) <= kappa / (1 - kappa) * r
        let certified = 2.0 * kappa / ((1.0 - kappa) * (1.0 - alpha)) * r <= eps;
        if certified || iters >= budget {
            break;
        }
    }
    let log_trace = state.trace.ln();
    let grad_hat: Vec<f64> = state
        .traces
        .iter()
        .map(|t| -(t.ln() / (alpha - 1.0) + log_trace))
        .collect();
    if grad_hat.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("oracle gradient is not finite".into()));
    }
    let g_hat = w.iter().zip(&grad_hat).map(|(a, b)| a * b).sum();
    Ok(OracleOutput {
        g_hat,
        grad_hat,
        inner_iters: iters,
        q: state.normalized().clone(),
    })
}

/// `w' = w ⊙ exp(-grad) / <w, exp(-grad)>`, evaluated after shifting `grad` by its minimum.
pub fn entropic_update(w: &[f64], grad: &[f64]) -> Result<Vec<f64>> {
    if w.len() != grad.len() {
        return Err(invalid("weight and gradient lengths differ"));
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient is not finite".into()));
    }
    let m = grad.iter().copied().fold(f64::INFINITY, f64::min);
    let mut next: Vec<f64> = w.iter().zip(grad).map(|(x, g)| x * (-(g - m)).exp()).collect();
    let s: f64 = next.iter().sum();
    next.iter_mut().for_each(|x| *x /= s);
    if next.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::NonFinite("weight underflowed to zero".into()));
    }
    Ok(next)
}

#[derive(Clone, Debug)]
pub struct CapacityState {
    pub step: usize,
    pub w: Vec<f64>,
    pub g_hat: f64,
    pub grad_hat: Vec<f64>,
    pub inner_eps: f64,
    pub inner_iters: usize,
    q: DensityMatrix,
}

impl CapacityState {
    /// `w_1 = 1/n` with the oracle evaluated there.
    pub fn initial(p: &CapacityProblem, eps: f64) -> Result<Self> {
        let n = p.n();
        Self::at(p, 1, vec![1.0 / n as f64; n], eps, None)
    }

    fn at(p: &CapacityProblem, step: usize, w: Vec<f64>, eps: f64, start: Option<&DensityMatrix>) -> Result<Self> {
        let o = approx_oracle_from(p, &w, eps, start)?;
        Ok(Self {
            step,
            w,
            g_hat: o.g_hat,
            grad_hat: o.grad_hat,
            inner_eps: eps,
            inner_iters: o.inner_iters,
            q: o.q,
        })
    }

    /// Inner solution at `w`.
    pub fn augustin_mean(&self) -> &DensityMatrix {
        &self.q
    }
}

/// One mirror-descent step; the oracle at the new weights keeps the accuracy of `s`.
pub fn emd_capacity_step(p: &CapacityProblem, s: &CapacityState) -> Result<CapacityState> {
    emd_capacity_step_with(p, s, s.inner_eps)
}

pub fn emd_capacity_step_with(p: &CapacityProblem, s: &CapacityState, eps: f64) -> Result<CapacityState> {
    let w = entropic_update(&s.w, &s.grad_hat)?;
    CapacityState::at(p, s.step + 1, w, eps, Some(&s.q))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsSchedule {
    Constant { eps: f64 },
    /// `max(eps0 * factor^(t-1), floor)`.
    Geometric { eps0: f64, factor: f64, floor: f64 },
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule::Constant { eps: DEFAULT_EPS }
    }
}

impl EpsSchedule {
    pub fn eps(&self, step: usize) -> f64 {
        match *self {
            EpsSchedule::Constant { eps } => eps,
            EpsSchedule::Geometric { eps0, factor, floor } => {
                (eps0 * factor.powi(step.saturating_sub(1) as i32)).max(floor)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityRecord {
    pub step: usize,
    pub g_hat: f64,
    /// `log(n) / (step - 1)`; absent at the starting point.
    pub gap_certificate: Option<f64>,
    pub inner_iters: usize,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug)]
pub struct CapacityReport {
    /// `-g_hat(w_{T+1})`.
    pub c_hat: f64,
    pub w_final: Vec<f64>,
    pub final_state: CapacityState,
    pub records: Vec<CapacityRecord>,
    /// `2 * sum_t eps_t`, the total oracle error the certificate does not cover.
    pub inexactness_budget: f64,
}

pub const CAPACITY_CSV_HEADER: &str = "step,g_hat,gap_certificate,inner_iters,wall_time_ms";

impl CapacityReport {
    pub fn write_csv<W: Write>(&self, mut out: W, with_timing: bool) -> Result<()> {
        writeln!(out, "{CAPACITY_CSV_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.step,
                fmt_f64(r.g_hat),
                r.gap_certificate.map(fmt_f64).unwrap_or_default(),
                r.inner_iters,
                if with_timing { fmt_f64(r.wall_time_ms) } else { "0".into() },
            )?;
        }
        Ok(())
    }

    pub fn g_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.g_hat).collect()
    }
}

/// `T` mirror-descent steps from the uniform weights.
pub fn solve_capacity(p: &CapacityProblem, t: usize, schedule: EpsSchedule) -> Result<CapacityReport> {
    if t == 0 {
        return Err(invalid("T must be at least 1"));
    }
    let start = Instant::now();
    let log_n = (p.n() as f64).ln();
    let mut state = CapacityState::initial(p, schedule.eps(1))?;
    let mut budget = 2.0 * state.inner_eps;
    let record = |s: &CapacityState, start: Instant| CapacityRecord {
        step: s.step,
        g_hat: s.g_hat,
        gap_certificate: (s.step > 1).then(|| log_n / (s.step - 1) as f64),
        inner_iters: s.inner_iters,
        wall_time_ms: elapsed_ms(start),
    };
    let mut records = vec![record(&state, start)];
    for step in 2..=t + 1 {
        state = emd_capacity_step_with(p, &state, schedule.eps(step))?;
        budget += 2.0 * state.inner_eps;
        records.push(record(&state, start));
    }
    Ok(CapacityReport {
        c_hat: -state.g_hat,
        w_final: state.w.clone(),
        final_state: state,
        records,
        inexactness_budget: budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::petz_renyi_divergence;
    use crate::linalg::random_density_matrix;

    fn symmetric_pair() -> CapacityProblem {
        let a = DensityMatrix::diag(&[0.9, 0.1]).unwrap();
        let b = DensityMatrix::diag(&[0.1, 0.9]).unwrap();
        CapacityProblem::new(vec![a, b], 0.75).unwrap()
    }

    #[test]
    fn rejects_orders_outside_range() {
        let a = DensityMatrix::maximally_mixed(2);
        for alpha in [0.3, 0.5, 1.0, 1.5] {
            assert!(CapacityProblem::new(vec![a.clone()], alpha).is_err());
        }
    }

    #[test]
    fn single_state_has_zero_capacity() {
        let p = CapacityProblem::new(vec![random_density_matrix(1, 3)], 0.7).unwrap();
        let o = approx_oracle(&p, &[1.0], 1e-9).unwrap();
        assert!(o.g_hat.abs() < 1e-9);
        assert!(o.grad_hat[0].abs() < 1e-9);
        let r = solve_capacity(&p, 3, EpsSchedule::default()).unwrap();
        assert!(r.c_hat.abs() < 1e-9);
    }

    #[test]
    fn identical_states_zero_gradient() {
        let a = random_density_matrix(4, 3);
        let p = CapacityProblem::new(vec![a.clone(), a.clone(), a], 0.8).unwrap();
        let o = approx_oracle(&p, &[0.2, 0.3, 0.5], 1e-9).unwrap();
        assert!(o.grad_hat.iter().all(|g| g.abs() < 1e-9));
    }

    #[test]
    fn symmetric_pair_gradient() {
        let p = symmetric_pair();
        let o = approx_oracle(&p, &[0.5, 0.5], 1e-10).unwrap();
        assert!((o.grad_hat[0] - o.grad_hat[1]).abs() < 1e-8);
        // by symmetry Q* = I/2, so D(A_1 || I/2) is the exact value
        let exact = petz_renyi_divergence(
            &DensityMatrix::diag(&[0.9, 0.1]).unwrap(),
            &DensityMatrix::maximally_mixed(2),
            0.75,
        )
        .unwrap()
        .to_f64();
        assert!((o.g_hat + exact).abs() < 1e-9);
    }

    #[test]
    fn gradient_accuracy_against_reference() {
        let states: Vec<_> = (0..4).map(|k| random_density_matrix(40 + k, 2)).collect();
        let p = CapacityProblem::new(states, 0.6).unwrap();
        let w = [0.1, 0.2, 0.3, 0.4];
        let rough = approx_oracle(&p, &w, 1e-5).unwrap();
        let fine = approx_oracle(&p, &w, 1e-13).unwrap();
        for (a, b) in rough.grad_hat.iter().zip(&fine.grad_hat) {
            assert!((a - b).abs() <= 1e-5);
        }
        assert!(rough.inner_iters < fine.inner_iters);
    }

    #[test]
    fn entropic_update_examples() {
        let w = [0.5, 0.5];
        assert_eq!(entropic_update(&w, &[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        let u = entropic_update(&w, &[2f64.ln(), 0.0]).unwrap();
        assert!((u[0] - 1.0 / 3.0).abs() < 1e-15 && (u[1] - 2.0 / 3.0).abs() < 1e-15);
        let big = entropic_update(&[0.25, 0.75], &[1000.0, 1001.0]).unwrap();
        let small = entropic_update(&[0.25, 0.75], &[0.0, 1.0]).unwrap();
        for (a, b) in big.iter().zip(&small) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_pair_stays_uniform() {
        let r = solve_capacity(&symmetric_pair(), 5, EpsSchedule::default()).unwrap();
        assert!((r.w_final[0] - 0.5).abs() < 1e-12);
        assert_eq!(r.records.len(), 6);
        assert!(r.records[0].gap_certificate.is_none());
        assert!((r.records[5].gap_certificate.unwrap() - 2f64.ln() / 5.0).abs() < 1e-15);
    }

    #[test]
    fn outer_values_nonincreasing() {
        let states: Vec<_> = (0..4).map(|k| random_density_matrix(90 + k, 2)).collect();
        let p = CapacityProblem::new(states, 0.8).unwrap();
        let r = solve_capacity(&p, 30, EpsSchedule::default()).unwrap();
        for w in r.records.windows(2) {
            assert!(w[1].g_hat <= w[0].g_hat + 2.0 * DEFAULT_EPS, "{} > {}", w[1].g_hat, w[0].g_hat);
        }
        assert!((r.inexactness_budget - 2.0 * 31.0 * DEFAULT_EPS).abs() < 1e-15);
    }

    #[test]
    fn geometric_schedule() {
        let s = EpsSchedule::Geometric { eps0: 1e-3, factor: 0.1, floor: 1e-9 };
        assert_eq!(s.eps(1), 1e-3);
        assert!((s.eps(3) - 1e-5).abs() < 1e-20);
        assert_eq!(s.eps(20), 1e-9);
    }

    #[test]
    fn csv_layout() {
        let r = solve_capacity(&symmetric_pair(), 1, EpsSchedule::default()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf, false).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], CAPACITY_CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,") && lines[1].ends_with(",0"));
    }
}
