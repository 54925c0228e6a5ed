//! CES Fisher markets and price-adjustment dynamics.
//!
//! Buyer `j` has budget `w[j]`, valuations `a_j` on the simplex and
//! elasticity `rho_j ∈ (0, 1)`. Seller `i` updates with
//! `p[i] <- p[i] x(p)[i]^{1 - rho_hat[i]}` whenever it is scheduled, where
//! `rho_hat[i] >= max_j rho_j`. Every `N(t)` rounds all goods have moved at
//! least `t` times and the Thompson distance to equilibrium shrinks by
//! `max_i rho_hat[i]` per such epoch.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergences::{check_probability, ClassicalAugustinProblem, SIMPLEX_TOL};
use crate::error::{invalid, Error, Result};
use crate::linalg::{thompson_metric_vec, PositiveVector};
use crate::trace::fmt_f64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarketJson", into = "MarketJson")]
pub struct FisherMarket {
    valuations: Vec<Vec<f64>>,
    budgets: Vec<f64>,
    rho: Vec<f64>,
    rho_hat: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarketJson {
    pub valuations: Vec<Vec<f64>>,
    pub budgets: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_hat: Vec<f64>,
}

impl TryFrom<MarketJson> for FisherMarket {
    type Error = Error;

    fn try_from(j: MarketJson) -> Result<Self> {
        FisherMarket::new(j.valuations, j.budgets, j.rho, j.rho_hat)
    }
}

impl From<FisherMarket> for MarketJson {
    fn from(m: FisherMarket) -> Self {
        MarketJson {
            valuations: m.valuations,
            budgets: m.budgets,
            rho: m.rho,
            rho_hat: m.rho_hat,
        }
    }
}

impl FisherMarket {
    pub fn new(valuations: Vec<Vec<f64>>, budgets: Vec<f64>, rho: Vec<f64>, rho_hat: Vec<f64>) -> Result<Self> {
        let n = valuations.len();
        if n == 0 {
            return Err(invalid("market needs at least one buyer"));
        }
        let d = valuations[0].len();
        if d == 0 {
            return Err(invalid("market needs at least one good"));
        }
        for (j, a) in valuations.iter().enumerate() {
            if a.len() != d {
                return Err(invalid(format!("buyer {j} values {} goods, expected {d}", a.len())));
            }
            check_probability(a).map_err(|e| invalid(format!("valuations of buyer {j}: {e}")))?;
        }
        for i in 0..d {
            if !valuations.iter().any(|a| a[i] > 0.0) {
                return Err(invalid(format!("no buyer values good {i}")));
            }
        }
        if budgets.len() != n || rho.len() != n {
            return Err(invalid("budgets and rho need one entry per buyer"));
        }
        if budgets.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
            return Err(invalid("budgets must be strictly positive"));
        }
        let total: f64 = budgets.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(invalid(format!("budgets sum to {total}, not 1")));
        }
        if let Some(r) = rho.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(invalid(format!("rho = {r} is outside (0, 1)")));
        }
        if rho_hat.len() != d {
            return Err(invalid("rho_hat needs one entry per good"));
        }
        let rho_max = rho.iter().copied().fold(0.0, f64::max);
        if let Some(r) = rho_hat.iter().find(|r| !(**r >= rho_max && **r < 1.0)) {
            return Err(invalid(format!("rho_hat = {r} is outside [{rho_max}, 1)")));
        }
        Ok(Self {
            valuations,
            budgets,
            rho,
            rho_hat,
        })
    }

    /// Every buyer has elasticity `rho`, every seller uses `rho_hat = rho`.
    pub fn homogeneous(valuations: Vec<Vec<f64>>, budgets: Vec<f64>, rho: f64) -> Result<Self> {
        let n = valuations.len();
        let d = valuations.first().map_or(0, Vec::len);
        Self::new(valuations, budgets, vec![rho; n], vec![rho; d])
    }

    /// Random valuations and budgets; `rho_j` uniform in `rho_range`.
    pub fn random(seed: u64, n: usize, d: usize, rho_range: (f64, f64), rho_hat: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut simplex = |len: usize| -> Vec<f64> {
            let v: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        };
        let valuations: Vec<Vec<f64>> = (0..n).map(|_| simplex(d)).collect();
        let budgets = simplex(n);
        let rho = (0..n).map(|_| rng.random_range(rho_range.0..rho_range.1)).collect();
        Self::new(valuations, budgets, rho, vec![rho_hat; d])
    }

    pub fn n_buyers(&self) -> usize {
        self.valuations.len()
    }

    pub fn d_goods(&self) -> usize {
        self.valuations[0].len()
    }

    pub fn valuations(&self) -> &[Vec<f64>] {
        &self.valuations
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn rho_hat(&self) -> &[f64] {
        &self.rho_hat
    }

    /// `max_i rho_hat[i]`, the per-epoch contraction factor.
    pub fn contraction_factor(&self) -> f64 {
        self.rho_hat.iter().copied().fold(0.0, f64::max)
    }

    /// The shared elasticity, if all buyers have the same one.
    pub fn common_rho(&self) -> Option<f64> {
        let r = self.rho[0];
        self.rho.iter().all(|x| *x == r).then_some(r)
    }

    /// The classical Augustin problem with points `a_j`, weights `w` and
    /// `alpha = 1 / (1 - rho)`, whose iterations coincide with the price updates.
    pub fn as_augustin_problem(&self) -> Result<ClassicalAugustinProblem> {
        let rho = self
            .common_rho()
            .ok_or_else(|| invalid("buyers have different elasticities"))?;
        ClassicalAugustinProblem::new(self.valuations.clone(), self.budgets.clone(), 1.0 / (1.0 - rho))
    }

    fn check_prices(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.d_goods() {
            return Err(invalid(format!("{} prices for {} goods", p.len(), self.d_goods())));
        }
        if let Some(x) = p.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
            return Err(invalid(format!("price {x} is not strictly positive")));
        }
        Ok(())
    }
}

fn buyer_demand_unchecked(m: &FisherMarket, j: usize, p: &[f64]) -> Vec<f64> {
    let e = 1.0 / (1.0 - m.rho[j]);
    let num: Vec<f64> = m.valuations[j]
        .iter()
        .zip(p)
        .map(|(a, x)| if *a > 0.0 { a.powf(e) * x.powf(-e) } else { 0.0 })
        .collect();
    // <a^e, p^{1-e}> = <a^e ⊙ p^{-e}, p>
    let denom: f64 = num.iter().zip(p).map(|(u, x)| u * x).sum();
    num.into_iter().map(|u| m.budgets[j] * u / denom).collect()
}

/// `x_j(p) = w[j] a_j^e ⊙ p^{-e} / <a_j^e, p^{1-e}>` with `e = 1 / (1 - rho_j)`.
pub fn buyer_demand(m: &FisherMarket, j: usize, p: &[f64]) -> Result<Vec<f64>> {
    if j >= m.n_buyers() {
        return Err(invalid(format!("no buyer {j}")));
    }
    m.check_prices(p)?;
    Ok(buyer_demand_unchecked(m, j, p))
}

/// `x(p) = sum_j x_j(p)`, summed in buyer order.
pub fn total_demand(m: &FisherMarket, p: &[f64]) -> Result<Vec<f64>> {
    m.check_prices(p)?;
    let parts: Vec<Vec<f64>> = (0..m.n_buyers())
        .into_par_iter()
        .map(|j| buyer_demand_unchecked(m, j, p))
        .collect();
    let mut x = vec![0.0; m.d_goods()];
    for part in parts {
        for (a, b) in x.iter_mut().zip(part) {
            *a += b;
        }
    }
    Ok(x)
}

/// `phi(p) = sum_j w[j] ((1 - rho_j) / rho_j) log <a_j^e, p^{1-e}> + sum_i p[i]`.
///
/// Convex, with `grad phi(p) = 1 - x(p)`; its minimizer is the equilibrium.
pub fn potential(m: &FisherMarket, p: &[f64]) -> Result<f64> {
    m.check_prices(p)?;
    let mut phi: f64 = p.iter().sum();
    for j in 0..m.n_buyers() {
        let rho = m.rho[j];
        let e = 1.0 / (1.0 - rho);
        let s: f64 = m.valuations[j]
            .iter()
            .zip(p)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, x)| a.powf(e) * x.powf(1.0 - e))
            .sum();
        phi += m.budgets[j] * (1.0 - rho) / rho * s.ln();
    }
    Ok(phi)
}

/// `max_i |x(p)[i] - 1|`.
pub fn excess_demand(m: &FisherMarket, p: &[f64]) -> Result<f64> {
    Ok(total_demand(m, p)?
        .iter()
        .map(|x| (x - 1.0).abs())
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PriceState {
    pub step: usize,
    pub p: PositiveVector,
    pub epoch_count_per_good: Vec<usize>,
}

impl PriceState {
    pub fn new(m: &FisherMarket, p: Vec<f64>) -> Result<Self> {
        m.check_prices(&p)?;
        Ok(Self {
            step: 1,
            p: PositiveVector::new(p)?,
            epoch_count_per_good: vec![0; m.d_goods()],
        })
    }

    /// `p_1 = 1/d`.
    pub fn uniform(m: &FisherMarket) -> Result<Self> {
        let d = m.d_goods();
        Self::new(m, vec![1.0 / d as f64; d])
    }
}

fn check_subset(subset: &[usize], d: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(invalid("update set is empty"));
    }
    let mut seen = vec![false; d];
    for &i in subset {
        if i >= d {
            return Err(invalid(format!("good {i} out of range for {d} goods")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(invalid(format!("good {i} listed twice")));
        }
    }
    Ok(())
}

/// Sellers in `subset` move `p[i] <- p[i] x(p)[i]^{1 - rho_hat[i]}`; the rest keep their price.
pub fn tatonnement_step(m: &FisherMarket, s: &PriceState, subset: &[usize]) -> Result<PriceState> {
    check_subset(subset, m.d_goods())?;
    let x = total_demand(m, &s.p)?;
    let mut p = s.p.as_slice().to_vec();
    let mut counts = s.epoch_count_per_good.clone();
    for &i in subset {
        p[i] *= x[i].powf(1.0 - m.rho_hat[i]);
        counts[i] += 1;
    }
    if let Some(i) = p.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::NonFinite(format!("price of good {i} left (0, inf) at step {}", s.step)));
    }
    Ok(PriceState {
        step: s.step + 1,
        p: PositiveVector::new(p)?,
        epoch_count_per_good: counts,
    })
}

/// Sequence of seller sets `I_1, I_2, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateSchedule {
    pub rounds: Vec<Vec<usize>>,
}

impl UpdateSchedule {
    pub fn new(rounds: Vec<Vec<usize>>, d: usize) -> Result<Self> {
        let s = Self { rounds };
        s.validate(d)?;
        Ok(s)
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        for (t, r) in self.rounds.iter().enumerate() {
            check_subset(r, d).map_err(|e| invalid(format!("round {}: {e}", t + 1)))?;
        }
        Ok(())
    }

    pub fn synchronous(d: usize, rounds: usize) -> Self {
        Self {
            rounds: vec![(0..d).collect(); rounds],
        }
    }

    /// Goods `0, 1, ..., d-1, 0, 1, ...`, one per round.
    pub fn round_robin(d: usize, rounds: usize) -> Self {
        Self {
            rounds: (0..rounds).map(|t| vec![t % d]).collect(),
        }
    }

    /// Each good joins a round independently with probability `prob`; empty draws get one random good.
    pub fn random_coverage(d: usize, rounds: usize, prob: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rounds = (0..rounds)
            .map(|_| {
                let mut r: Vec<usize> = (0..d).filter(|_| rng.random_bool(prob)).collect();
                if r.is_empty() {
                    r.push(rng.random_range(0..d));
                }
                r
            })
            .collect();
        Self { rounds }
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// `[N(0), N(1), ...]` with `N(0) = 0` and `N(t)` the first round by which
    /// every good has been updated `t` times; `None` if some good never moves.
    pub fn epochs(&self, d: usize) -> Option<Vec<usize>> {
        let mut counts = vec![0usize; d];
        let mut out = vec![0];
        for (r, set) in self.rounds.iter().enumerate() {
            for &i in set {
                counts[i] += 1;
            }
            while counts.iter().min().copied().unwrap_or(0) >= out.len() {
                out.push(r + 1);
            }
        }
        (out.len() > 1).then_some(out)
    }
}

#[derive(Clone, Debug)]
pub struct ScheduleRun {
    /// `states[k]` holds `p_{k+1}`.
    pub states: Vec<PriceState>,
    /// `[N(0), ..., N(T)]`; only `N(0)` when `unbounded`.
    pub epochs: Vec<usize>,
    /// Some good was never updated, so no epoch completes.
    pub unbounded: bool,
}

impl ScheduleRun {
    /// `p_{N(t)+1}`.
    pub fn at_epoch(&self, t: usize) -> Option<&PriceState> {
        self.epochs.get(t).map(|&n| &self.states[n])
    }

    /// Number of completed epochs before round `round` (1-based).
    pub fn epoch_index(&self, round: usize) -> usize {
        self.epochs.iter().skip(1).take_while(|&&n| n < round).count()
    }

    pub const CSV_HEADER: &'static str = "round,d_T_to_eq,max_excess_demand,epoch_index";

    pub fn write_csv<W: Write>(&self, m: &FisherMarket, p_star: &[f64], mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for s in &self.states {
            writeln!(
                out,
                "{},{},{},{}",
                s.step,
                fmt_f64(thompson_metric_vec(p_star, &s.p)?),
                fmt_f64(excess_demand(m, &s.p)?),
                self.epoch_index(s.step),
            )?;
        }
        Ok(())
    }
}

pub fn run_schedule(m: &FisherMarket, p1: &[f64], sched: &UpdateSchedule) -> Result<ScheduleRun> {
    sched.validate(m.d_goods())?;
    let mut states = vec![PriceState::new(m, p1.to_vec())?];
    for set in &sched.rounds {
        let next = tatonnement_step(m, states.last().expect("non-empty"), set)?;
        states.push(next);
    }
    let (epochs, unbounded) = match sched.epochs(m.d_goods()) {
        Some(e) => (e, false),
        None => (vec![0], true),
    };
    Ok(ScheduleRun {
        states,
        epochs,
        unbounded,
    })
}

pub const EQUILIBRIUM_MAX_STEPS: usize = 2000;
pub const EQUILIBRIUM_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Equilibrium {
    pub p: Vec<f64>,
    /// `max_i |x(p)[i] - 1|`.
    pub residual: f64,
    pub steps: usize,
}

/// Synchronous updates from `1/d` until prices stop moving or the step cap is hit;
/// fails unless the excess demand is at most `1e-10`.
pub fn equilibrium_prices(m: &FisherMarket) -> Result<Equilibrium> {
    let d = m.d_goods();
    let all: Vec<usize> = (0..d).collect();
    let mut s = PriceState::uniform(m)?;
    let mut steps = 0;
    while steps < EQUILIBRIUM_MAX_STEPS {
        let next = tatonnement_step(m, &s, &all)?;
        steps += 1;
        let moved = thompson_metric_vec(&next.p, &s.p)?;
        s = next;
        if moved <= 1e-15 {
            break;
        }
    }
    let residual = excess_demand(m, &s.p)?;
    if residual > EQUILIBRIUM_TOL {
        return Err(Error::NoConvergence(format!(
            "excess demand {residual:e} after {steps} synchronous steps"
        )));
    }
    Ok(Equilibrium {
        p: s.p.into_inner(),
        residual,
        steps,
    })
}

/// `p' = p ⊙ x(p)`; defined only when all buyers share one elasticity.
pub fn cheung_baseline_step(m: &FisherMarket, p: &[f64]) -> Result<Vec<f64>> {
    if m.common_rho().is_none() {
        return Err(invalid("baseline requires a common rho"));
    }
    let x = total_demand(m, p)?;
    Ok(p.iter().zip(&x).map(|(a, b)| a * b).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparability {
    pub d_t: f64,
    /// `max_i |1 - u[i] / v[i]|`.
    pub linf_ratio: f64,
    /// `d_t < log 3`.
    pub precondition: bool,
    /// `linf_ratio / 3 <= d_t <= 3 linf_ratio`, or the precondition fails.
    pub holds: bool,
}

/// Compares the Thompson distance with the relative sup-distance.
pub fn metric_comparability_check(u: &[f64], v: &[f64]) -> Result<Comparability> {
    let d_t = thompson_metric_vec(u, v)?;
    let linf_ratio = u
        .iter()
        .zip(v)
        .map(|(a, b)| (1.0 - a / b).abs())
        .fold(0.0, f64::max);
    let precondition = d_t < 3f64.ln();
    let holds = !precondition || (linf_ratio / 3.0 <= d_t && d_t <= 3.0 * linf_ratio);
    Ok(Comparability {
        d_t,
        linf_ratio,
        precondition,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augustin::{augustin_classical_baseline_step, classical_augustin_step, ClassicalIterate};

    fn market(seed: u64) -> FisherMarket {
        FisherMarket::random(seed, 5, 6, (0.1, 0.7), 0.75).unwrap()
    }

    #[test]
    fn validation() {
        let a = vec![vec![0.5, 0.5]];
        assert!(FisherMarket::new(a.clone(), vec![1.0], vec![0.5], vec![0.4, 0.5]).is_err());
        assert!(FisherMarket::new(a.clone(), vec![1.0], vec![0.0], vec![0.5, 0.5]).is_err());
        assert!(FisherMarket::new(a.clone(), vec![0.9], vec![0.5], vec![0.5, 0.5]).is_err());
        assert!(FisherMarket::new(vec![vec![1.0, 0.0]], vec![1.0], vec![0.5], vec![0.5, 0.5]).is_err());
        assert!(FisherMarket::new(a, vec![1.0], vec![0.5], vec![0.5, 0.99]).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let m = market(1);
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"rho_hat\""));
        let back: FisherMarket = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"valuations":[[1.0]],"budgets":[1.0],"rho":[0.8],"rho_hat":[0.5]}"#;
        assert!(serde_json::from_str::<FisherMarket>(bad).is_err());
    }

    #[test]
    fn demand_examples() {
        let m = FisherMarket::new(vec![vec![1.0]], vec![1.0], vec![0.3], vec![0.5]).unwrap();
        assert!((buyer_demand(&m, 0, &[2.5]).unwrap()[0] - 0.4).abs() < 1e-15);
        let m = FisherMarket::homogeneous(vec![vec![0.25; 4]; 2], vec![0.3, 0.7], 0.4).unwrap();
        let x = buyer_demand(&m, 1, &[2.0; 4]).unwrap();
        assert!(x.iter().all(|v| (v - 0.7 / 8.0).abs() < 1e-15));
        assert!(total_demand(&m, &[0.25; 4]).unwrap().iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert!(buyer_demand(&m, 0, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn single_buyer_equilibrium_is_valuation() {
        let a = vec![0.2, 0.5, 0.3];
        let m = FisherMarket::new(vec![a.clone()], vec![1.0], vec![0.6], vec![0.6; 3]).unwrap();
        assert!(total_demand(&m, &a).unwrap().iter().all(|v| (v - 1.0).abs() < 1e-14));
        let run = run_schedule(&m, &[0.6, 0.3, 0.1], &UpdateSchedule::synchronous(3, 80)).unwrap();
        assert!(thompson_metric_vec(&a, &run.states.last().unwrap().p).unwrap() < 1e-10);
    }

    #[test]
    fn budgets_are_exhausted() {
        let m = market(2);
        let p = [0.3, 1.7, 0.02, 5.0, 0.9, 0.11];
        for j in 0..m.n_buyers() {
            let x = buyer_demand(&m, j, &p).unwrap();
            let spent: f64 = x.iter().zip(&p).map(|(a, b)| a * b).sum();
            assert!((spent - m.budgets()[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn potential_scalar_case() {
        let m = FisherMarket::new(vec![vec![1.0]], vec![1.0], vec![0.5], vec![0.5]).unwrap();
        for p in [0.5, 1.0, 3.0] {
            assert!((potential(&m, &[p]).unwrap() - (p - p.ln())).abs() < 1e-14);
        }
    }

    #[test]
    fn potential_gradient_is_one_minus_demand() {
        let m = market(3);
        let p = [0.2, 0.1, 0.3, 0.15, 0.12, 0.13];
        let x = total_demand(&m, &p).unwrap();
        let h = 1e-6;
        for i in 0..6 {
            let mut pp = p;
            let mut pm = p;
            pp[i] += h;
            pm[i] -= h;
            let fd = (potential(&m, &pp).unwrap() - potential(&m, &pm).unwrap()) / (2.0 * h);
            assert!((fd - (1.0 - x[i])).abs() < 1e-5);
        }
    }

    #[test]
    fn equilibrium_fixed_and_minimizes_potential() {
        let m = market(4);
        let eq = equilibrium_prices(&m).unwrap();
        assert!(eq.residual <= 1e-10);
        let s = PriceState::new(&m, eq.p.clone()).unwrap();
        let next = tatonnement_step(&m, &s, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert!(thompson_metric_vec(&next.p, &eq.p).unwrap() < 1e-12);
        assert!((eq.p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let phi = potential(&m, &eq.p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let q: Vec<f64> = eq.p.iter().map(|x| x * rng.random_range(0.9..1.1)).collect();
            assert!(phi <= potential(&m, &q).unwrap() + 1e-15);
        }
    }

    #[test]
    fn step_touches_only_scheduled_goods() {
        let m = market(5);
        let s = PriceState::uniform(&m).unwrap();
        let next = tatonnement_step(&m, &s, &[1, 4]).unwrap();
        for i in [0, 2, 3, 5] {
            assert_eq!(next.p[i], s.p[i]);
        }
        assert_eq!(next.epoch_count_per_good, vec![0, 1, 0, 0, 1, 0]);
        assert!(tatonnement_step(&m, &s, &[]).is_err());
        assert!(tatonnement_step(&m, &s, &[6]).is_err());
    }

    #[test]
    fn epoch_counting() {
        assert_eq!(UpdateSchedule::synchronous(3, 4).epochs(3).unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(UpdateSchedule::round_robin(3, 7).epochs(3).unwrap(), vec![0, 3, 6]);
        let s = UpdateSchedule::new(vec![vec![0, 1], vec![0], vec![2, 1], vec![2]], 3).unwrap();
        assert_eq!(s.epochs(3).unwrap(), vec![0, 3, 4]);
        assert!(UpdateSchedule::new(vec![vec![0], vec![0]], 2).unwrap().epochs(2).is_none());
        let r = UpdateSchedule::random_coverage(6, 50, 0.3, 1);
        assert!(r.rounds.iter().all(|x| !x.is_empty()));
        assert_eq!(r, UpdateSchedule::random_coverage(6, 50, 0.3, 1));
    }

    #[test]
    fn never_updated_good_is_unbounded() {
        let m = market(6);
        let sched = UpdateSchedule::new(vec![vec![0, 1, 2, 3, 4]; 5], 6).unwrap();
        let run = run_schedule(&m, &[1.0 / 6.0; 6], &sched).unwrap();
        assert!(run.unbounded);
        assert_eq!(run.epochs, vec![0]);
    }

    #[test]
    fn homogeneous_market_is_augustin_iteration() {
        let m0 = market(7);
        let m = FisherMarket::homogeneous(m0.valuations().to_vec(), m0.budgets().to_vec(), 0.4).unwrap();
        let p = m.as_augustin_problem().unwrap();
        let run = run_schedule(&m, &[1.0 / 6.0; 6], &UpdateSchedule::synchronous(6, 30)).unwrap();
        let mut q = ClassicalIterate::uniform(&p).unwrap();
        for s in &run.states[1..] {
            q = classical_augustin_step(&p, &q).unwrap();
            for (a, b) in q.iterate.iter().zip(s.p.iter()) {
                assert!((a - b).abs() <= 1e-10 * b);
            }
        }
    }

    #[test]
    fn cheung_matches_augustin_baseline() {
        let m0 = market(8);
        let m = FisherMarket::homogeneous(m0.valuations().to_vec(), m0.budgets().to_vec(), 0.5).unwrap();
        let p = m.as_augustin_problem().unwrap();
        let start = vec![0.3, 0.1, 0.2, 0.1, 0.2, 0.1];
        let a = cheung_baseline_step(&m, &start).unwrap();
        let b = augustin_classical_baseline_step(&p, &start).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12);
        }
        assert!(cheung_baseline_step(&market(8), &start).is_err());
    }

    #[test]
    fn uniform_market_baseline_converges_to_uniform() {
        let m = FisherMarket::homogeneous(vec![vec![0.25; 4]; 3], vec![0.2, 0.3, 0.5], 0.3).unwrap();
        let mut p = vec![0.1, 0.4, 0.2, 0.3];
        for _ in 0..200 {
            p = cheung_baseline_step(&m, &p).unwrap();
        }
        assert!(p.iter().all(|x| (x - 0.25).abs() < 1e-10));
    }

    #[test]
    fn comparability_examples() {
        let c = metric_comparability_check(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!((c.d_t, c.linf_ratio, c.holds), (0.0, 0.0, true));
        let c = metric_comparability_check(&[2.0, 4.0], &[1.0, 2.0]).unwrap();
        assert!((c.d_t - 2f64.ln()).abs() < 1e-15);
        assert!((c.linf_ratio - 1.0).abs() < 1e-15);
        assert!(c.precondition && c.holds);
    }

    #[test]
    fn csv_layout() {
        let m = market(10);
        let eq = equilibrium_prices(&m).unwrap();
        let run = run_schedule(&m, &[1.0 / 6.0; 6], &UpdateSchedule::round_robin(6, 12)).unwrap();
        let mut buf = Vec::new();
        run.write_csv(&m, &eq.p, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], ScheduleRun::CSV_HEADER);
        assert_eq!(lines.len(), 14);
        assert!(lines[6].ends_with(",0") && lines[7].ends_with(",1") && lines[13].ends_with(",2"));
    }
}
