use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use augustin_core::augustin::{
    classical_augustin_step_scaled, divergence_demo_problem, naive_contraction_counterexample,
    solve_classical_augustin, solve_emd_polyak_quantum, solve_petz_augustin, solve_petz_augustin_with_reference,
    ClassicalIterate, IterateScaling, StopReason,
};
use augustin_core::capacity::{emd_capacity_step_with, CapacityState, CAPACITY_CSV_HEADER};
use augustin_core::fisher::{equilibrium_prices, run_schedule};
use augustin_core::linalg::{random_density_matrix, thompson_metric_vec};
use augustin_core::oracles::{grid_min_classical_augustin, GridSpec, OracleCache, MAX_GRID_DIM};
use augustin_core::trace::{fmt_f64, IterationTrace, TraceRecord};
use augustin_core::{
    AugustinProblem, CapacityProblem, ClassicalAugustinProblem, DensityMatrix, Error, FisherMarket, SolveOptions,
    UpdateSchedule,
};
use serde_json::{json, Map, Value};

use crate::config::{validate_config, ExperimentConfig, ScheduleKind, Task};
use crate::manifest::{content_hash, FileEntry, Manifest, MANIFEST_FILE};

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// When false every wall-time column and manifest entry is written as 0.
    pub with_timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { with_timing: true }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    /// Human-readable lines for stdout.
    pub report: Vec<String>,
}

#[derive(Debug)]
pub enum RunError {
    Config(Vec<String>),
    /// Files written before the failure stay on disk and are listed in the manifest.
    Numerical(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(v) => write!(f, "invalid config: {}", v.join("; ")),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(m) => RunError::Config(vec![m]),
            Error::InvalidOrder(a) => RunError::Config(vec![format!("invalid order alpha = {a}")]),
            Error::Io(e) => RunError::Io(e.to_string()),
            Error::Json(e) => RunError::Io(e.to_string()),
            other => RunError::Numerical(other.to_string()),
        }
    }
}

struct Artifacts {
    dir: PathBuf,
    with_timing: bool,
    files: Vec<FileEntry>,
    wall: BTreeMap<String, f64>,
    summary: Map<String, Value>,
    report: Vec<String>,
}

impl Artifacts {
    fn new(dir: &Path, with_timing: bool) -> Result<Self, RunError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            with_timing,
            files: Vec::new(),
            wall: BTreeMap::new(),
            summary: Map::new(),
            report: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        fs::write(self.dir.join(name), bytes)?;
        self.register(name, bytes);
        Ok(())
    }

    fn register(&mut self, name: &str, bytes: &[u8]) {
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: content_hash(bytes),
        });
    }

    fn write_json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    fn time(&mut self, label: &str, start: Instant) {
        let ms = if self.with_timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        self.wall.insert(label.to_string(), ms);
    }

    fn finish(self, cfg: &ExperimentConfig, error: Option<String>) -> Result<RunOutcome, RunError> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            status: if error.is_some() { "numerical_failure" } else { "ok" }.to_string(),
            error,
            files: self.files,
            wall_time_ms: self.wall,
            summary: Value::Object(self.summary),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(self.dir.join(MANIFEST_FILE), bytes)?;
        Ok(RunOutcome {
            out_dir: self.dir,
            manifest,
            report: self.report,
        })
    }
}

/// Validates `cfg`, runs its task and writes the artifacts plus `manifest.json`.
///
/// On a numerical failure the manifest is still written, with status
/// `numerical_failure` and every file produced up to that point.
pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunOutcome, RunError> {
    let violations = validate_config(cfg);
    if !violations.is_empty() {
        return Err(RunError::Config(violations));
    }
    let mut art = Artifacts::new(&cfg.out, opts.with_timing)?;
    let result = match cfg.task {
        Task::Augustin => augustin(cfg, &mut art),
        Task::Classical => classical(cfg, &mut art),
        Task::Capacity => capacity(cfg, &mut art),
        Task::Fisher => fisher(cfg, &mut art),
        Task::Counterexample => counterexample(&mut art),
        Task::DivergenceDemo => divergence_demo(cfg, &mut art),
    };
    finish(cfg, art, result)
}

fn finish(cfg: &ExperimentConfig, art: Artifacts, result: Result<(), RunError>) -> Result<RunOutcome, RunError> {
    match result {
        Ok(()) => art.finish(cfg, None),
        Err(RunError::Numerical(msg)) => {
            art.finish(cfg, Some(msg.clone()))?;
            Err(RunError::Numerical(msg))
        }
        Err(e) => Err(e),
    }
}

/// Fills `oracle_cache.json` in the output directory with grid minima of the
/// classical instances `cfg` describes, computing only the missing entries.
pub fn run_oracle_cache(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunOutcome, RunError> {
    let mut cfg = cfg.clone();
    cfg.task = Task::Classical;
    let mut violations = validate_config(&cfg);
    if cfg.d > MAX_GRID_DIM {
        violations.push(format!("grid oracle supports d <= {MAX_GRID_DIM}, got {}", cfg.d));
    }
    if cfg.grid_resolution == 0 {
        violations.push("grid_resolution must be at least 1".into());
    }
    if !violations.is_empty() {
        return Err(RunError::Config(violations));
    }
    let mut art = Artifacts::new(&cfg.out, opts.with_timing)?;
    let mut cache = OracleCache::load(&cfg.out)?;
    for alpha in cfg.effective_alphas() {
        let start = Instant::now();
        let p = ClassicalAugustinProblem::random(cfg.seed, cfg.n, cfg.d, alpha)?;
        let key = OracleCache::key(&p, cfg.grid_resolution)?;
        let hit = cache.get(&key).is_some();
        let entry = cache.get_or_compute(&p, cfg.grid_resolution, || {
            grid_min_classical_augustin(&p, &GridSpec::new(cfg.grid_resolution, cfg.d)?)
        })?;
        let label = alpha_label(alpha);
        art.time(&label, start);
        art.report.push(format!(
            "alpha {alpha}: {} grid minimum {} (key {})",
            if hit { "cached" } else { "computed" },
            fmt_f64(entry.value),
            &key[..12]
        ));
        art.summary.insert(label, json!({ "key": key, "value": entry.value, "argmin": entry.argmin }));
    }
    cache.save()?;
    let bytes = fs::read(cfg.out.join(OracleCache::FILE_NAME))?;
    art.register(OracleCache::FILE_NAME, &bytes);
    art.report.push(format!("{} entries in {}", cache.len(), OracleCache::FILE_NAME));
    art.finish(&cfg, None)
}

fn alpha_label(alpha: f64) -> String {
    format!("alpha_{alpha}")
}

fn trace_csv(trace: &IterationTrace, with_timing: bool) -> Vec<u8> {
    trace.to_csv_string(with_timing).into_bytes()
}

/// `step,opt_error,iterate_error`: `F(Q_t / Tr Q_t) - F(reference)` and the Thompson
/// distance between the `(1 - alpha)` powers of the normalized iterate and the reference.
fn error_csv(trace: &IterationTrace, f_reference: f64) -> Vec<u8> {
    let mut s = String::from("step,opt_error,iterate_error\n");
    for r in &trace.records {
        s.push_str(&format!(
            "{},{},{}\n",
            r.step,
            fmt_f64(r.f_value - f_reference),
            r.dist_to_reference.map(fmt_f64).unwrap_or_default()
        ));
    }
    s.into_bytes()
}

fn last_errors(trace: &IterationTrace, f_reference: f64) -> (Option<f64>, Option<f64>) {
    trace
        .last()
        .map(|r| (Some(r.f_value - f_reference), r.dist_to_reference))
        .unwrap_or((None, None))
}

fn augustin(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let q1 = DensityMatrix::maximally_mixed(cfg.d);
    for alpha in cfg.effective_alphas() {
        let label = alpha_label(alpha);
        let start = Instant::now();
        let p = AugustinProblem::random(cfg.seed, cfg.n, cfg.d, alpha)?;
        let reference = solve_petz_augustin(
            &p,
            &q1,
            &SolveOptions {
                max_iter: cfg.reference_iters,
                residual_tol: cfg.reference_tol,
                scaling: None,
            },
        )?;
        if reference.stop_reason == StopReason::NonFinite {
            return Err(RunError::Numerical(format!("alpha {alpha}: reference run became non-finite")));
        }
        let f_ref = reference.final_state.f_value.to_f64();
        let run = solve_petz_augustin_with_reference(
            &p,
            &q1,
            &SolveOptions {
                max_iter: cfg.iters,
                residual_tol: 0.0,
                scaling: None,
            },
            Some(reference.final_state.normalized()),
        )?;
        art.write(&format!("augustin_{label}_trace.csv"), &trace_csv(&run.trace, art.with_timing))?;
        art.write(&format!("augustin_{label}_errors.csv"), &error_csv(&run.trace, f_ref))?;
        art.time(&label, start);
        let (opt, iterate) = last_errors(&run.trace, f_ref);
        art.report.push(format!(
            "alpha {alpha}: {} steps, optimization error {}, iterate error {}",
            run.trace.len() - 1,
            opt.map(fmt_f64).unwrap_or_default(),
            iterate.map(fmt_f64).unwrap_or_default()
        ));
        art.summary.insert(
            label,
            json!({
                "alpha": alpha,
                "guaranteed": run.guaranteed,
                "reference_converged": reference.converged,
                "reference_steps": reference.trace.len() - 1,
                "f_reference": f_ref,
                "stop_reason": format!("{:?}", run.stop_reason),
                "final_opt_error": opt,
                "final_iterate_error": iterate,
            }),
        );
        if run.stop_reason == StopReason::NonFinite {
            return Err(RunError::Numerical(format!(
                "alpha {alpha}: iterate became non-finite after step {}",
                run.trace.len()
            )));
        }
    }
    Ok(())
}

fn classical(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let q1 = vec![1.0 / cfg.d as f64; cfg.d];
    for alpha in cfg.effective_alphas() {
        let label = alpha_label(alpha);
        let start = Instant::now();
        let p = ClassicalAugustinProblem::random(cfg.seed, cfg.n, cfg.d, alpha)?;
        let reference = solve_classical_augustin(
            &p,
            &q1,
            &SolveOptions {
                max_iter: cfg.reference_iters,
                residual_tol: cfg.reference_tol,
                scaling: None,
            },
        )?;
        if reference.stop_reason == StopReason::NonFinite {
            return Err(RunError::Numerical(format!("alpha {alpha}: reference run became non-finite")));
        }
        let f_ref = reference.final_state.f_value.to_f64();
        let power = |q: &[f64]| q.iter().map(|x| x.powf(1.0 - alpha)).collect::<Vec<f64>>();
        let ref_powered = power(&reference.final_state.normalized);

        let scaling = IterateScaling::default_for(alpha);
        let mut trace = IterationTrace::default();
        let mut state = ClassicalIterate::new(&p, &q1)?;
        let mut residual = None;
        let mut failure = None;
        loop {
            trace.push(TraceRecord {
                step: state.step,
                f_value: state.f_value.to_f64(),
                trace: state.trace,
                residual_thompson: residual,
                dist_to_reference: Some(thompson_metric_vec(&power(&state.normalized), &ref_powered)?),
                wall_time_ms: if art.with_timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
                degenerate: false,
            });
            if state.step > cfg.iters {
                break;
            }
            match classical_augustin_step_scaled(&p, &state, scaling) {
                Ok(next) => {
                    residual = Some(thompson_metric_vec(&next.powered(alpha), &state.powered(alpha))?);
                    state = next;
                }
                Err(e) => {
                    failure = Some(format!("alpha {alpha}: {e}"));
                    break;
                }
            }
        }
        art.write(&format!("classical_{label}_trace.csv"), &trace_csv(&trace, art.with_timing))?;
        art.write(&format!("classical_{label}_errors.csv"), &error_csv(&trace, f_ref))?;
        art.time(&label, start);
        let (opt, iterate) = last_errors(&trace, f_ref);
        art.report.push(format!(
            "alpha {alpha}: {} steps, optimization error {}, iterate error {}",
            trace.len() - 1,
            opt.map(fmt_f64).unwrap_or_default(),
            iterate.map(fmt_f64).unwrap_or_default()
        ));
        art.summary.insert(
            label,
            json!({
                "alpha": alpha,
                "reference_converged": reference.converged,
                "f_reference": f_ref,
                "final_opt_error": opt,
                "final_iterate_error": iterate,
                "final_iterate": state.normalized,
            }),
        );
        if let Some(msg) = failure {
            return Err(RunError::Numerical(msg));
        }
    }
    Ok(())
}

fn capacity(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let eps = cfg.capacity_eps;
    for alpha in cfg.effective_alphas() {
        let label = alpha_label(alpha);
        let start = Instant::now();
        let states = (0..cfg.n)
            .map(|j| random_density_matrix(cfg.seed.wrapping_mul(1_000_003).wrapping_add(j as u64), cfg.d))
            .collect();
        let p = CapacityProblem::new(states, alpha)?;
        let log_n = (cfg.n as f64).ln();
        let mut csv = format!("{CAPACITY_CSV_HEADER}\n");
        let mut state = CapacityState::initial(&p, eps)?;
        let mut failure = None;
        loop {
            let certificate = (state.step > 1).then(|| log_n / (state.step - 1) as f64);
            let ms = if art.with_timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                state.step,
                fmt_f64(state.g_hat),
                certificate.map(fmt_f64).unwrap_or_default(),
                state.inner_iters,
                if art.with_timing { fmt_f64(ms) } else { "0".into() },
            ));
            if state.step > cfg.iters {
                break;
            }
            match emd_capacity_step_with(&p, &state, eps) {
                Ok(next) => state = next,
                Err(e) => {
                    failure = Some(format!("alpha {alpha}: {e}"));
                    break;
                }
            }
        }
        art.write(&format!("capacity_{label}.csv"), csv.as_bytes())?;
        art.time(&label, start);
        art.report.push(format!(
            "alpha {alpha}: capacity estimate {} after {} steps",
            fmt_f64(-state.g_hat),
            state.step - 1
        ));
        art.summary.insert(
            label,
            json!({
                "alpha": alpha,
                "c_hat": -state.g_hat,
                "w_final": state.w,
                "inexactness_budget": 2.0 * eps * state.step as f64,
            }),
        );
        if let Some(msg) = failure {
            return Err(RunError::Numerical(msg));
        }
    }
    Ok(())
}

fn fisher(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let start = Instant::now();
    let [lo, hi] = cfg.rho_range;
    let m = FisherMarket::random(cfg.seed, cfg.n, cfg.d, (lo, hi), cfg.rho_hat)?;
    art.write_json("market.json", &m)?;
    let eq = equilibrium_prices(&m)?;
    let sched = match cfg.schedule {
        ScheduleKind::Synchronous => UpdateSchedule::synchronous(cfg.d, cfg.iters),
        ScheduleKind::RoundRobin => UpdateSchedule::round_robin(cfg.d, cfg.iters),
        ScheduleKind::RandomCoverage => UpdateSchedule::random_coverage(cfg.d, cfg.iters, cfg.coverage_prob, cfg.seed),
    };
    art.write_json("schedule.json", &sched)?;
    let p1 = vec![1.0 / cfg.d as f64; cfg.d];
    let run = run_schedule(&m, &p1, &sched)?;
    let mut csv = Vec::new();
    run.write_csv(&m, &eq.p, &mut csv)?;
    art.write("fisher_trace.csv", &csv)?;
    art.time("fisher", start);
    let last = run.states.last().expect("run holds the starting prices");
    let dist = thompson_metric_vec(&eq.p, &last.p)?;
    let epochs = run.epochs.len() - 1;
    art.report.push(format!(
        "{} rounds, {epochs} epochs, d_T to equilibrium {} (rate bound {})",
        sched.len(),
        fmt_f64(dist),
        fmt_f64(m.contraction_factor())
    ));
    art.summary.insert(
        "fisher".into(),
        json!({
            "equilibrium": eq.p,
            "equilibrium_residual": eq.residual,
            "rounds": sched.len(),
            "epochs": epochs,
            "final_distance": dist,
            "contraction_factor": m.contraction_factor(),
        }),
    );
    Ok(())
}

fn counterexample(art: &mut Artifacts) -> Result<(), RunError> {
    let start = Instant::now();
    let r = naive_contraction_counterexample()?;
    art.write_json(
        "counterexample.json",
        &json!({
            "image_distance": r.image_distance,
            "contraction_bound": r.contraction_bound,
            "violated": r.violated,
        }),
    )?;
    art.time("counterexample", start);
    art.report.push(format!(
        "d_T(T(V), T(U)) = {:.4} > |1 - 1/alpha| d_T(V, U) = {:.4}: {}",
        r.image_distance,
        r.contraction_bound,
        if r.violated { "PASS" } else { "FAIL" }
    ));
    if !r.violated {
        return Err(RunError::Numerical("the naive map contracted on the counterexample".into()));
    }
    Ok(())
}

fn divergence_demo(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let q1 = DensityMatrix::maximally_mixed(3);
    for alpha in cfg.effective_alphas() {
        let label = alpha_label(alpha);
        let start = Instant::now();
        let p = divergence_demo_problem(alpha)?;
        let polyak = solve_emd_polyak_quantum(&p, &q1, cfg.polyak_iters)?;
        let mut csv = String::from("step,f_value\n");
        for (k, f) in polyak.values.iter().enumerate() {
            csv.push_str(&format!("{},{}\n", k + 1, fmt_f64(*f)));
        }
        art.write(&format!("divergence_demo_{label}_polyak.csv"), csv.as_bytes())?;
        let run = solve_petz_augustin_with_reference(
            &p,
            &q1,
            &SolveOptions {
                max_iter: cfg.iters,
                residual_tol: 0.0,
                scaling: None,
            },
            Some(&polyak.best),
        )?;
        art.write(&format!("divergence_demo_{label}_trace.csv"), &trace_csv(&run.trace, art.with_timing))?;
        art.write(&format!("divergence_demo_{label}_errors.csv"), &error_csv(&run.trace, polyak.best_value))?;
        art.time(&label, start);
        let best = run.trace.f_values().into_iter().fold(f64::INFINITY, f64::min);
        let (_, iterate) = last_errors(&run.trace, polyak.best_value);
        art.report.push(format!(
            "alpha {alpha}: fixed-point best {} vs mirror-descent best {}, final iterate error {}",
            fmt_f64(best),
            fmt_f64(polyak.best_value),
            iterate.map(fmt_f64).unwrap_or_default()
        ));
        art.summary.insert(
            label,
            json!({
                "alpha": alpha,
                "fixed_point_best": best,
                "mirror_descent_best": polyak.best_value,
                "final_iterate_error": iterate,
                "stop_reason": format!("{:?}", run.stop_reason),
            }),
        );
        if run.stop_reason == StopReason::NonFinite {
            return Err(RunError::Numerical(format!("alpha {alpha}: iterate became non-finite")));
        }
    }
    Ok(())
}
