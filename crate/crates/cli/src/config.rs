use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Augustin,
    Classical,
    Capacity,
    Fisher,
    Counterexample,
    DivergenceDemo,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Augustin => "augustin",
            Task::Classical => "classical",
            Task::Capacity => "capacity",
            Task::Fisher => "fisher",
            Task::Counterexample => "counterexample",
            Task::DivergenceDemo => "divergence_demo",
        }
    }

    fn default_alphas(self) -> Vec<f64> {
        match self {
            Task::Augustin | Task::Classical => vec![0.2, 0.4, 0.8, 1.5, 3.0, 5.0],
            Task::Capacity => vec![0.6, 0.75, 0.9],
            Task::DivergenceDemo => vec![0.2, 0.4],
            Task::Counterexample => vec![3.0],
            Task::Fisher => Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Synchronous,
    RoundRobin,
    RandomCoverage,
}

/// One experiment. Every field has a default, so `{}` is a valid config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub seed: u64,
    /// Number of states, points or buyers.
    pub n: usize,
    /// Matrix dimension, alphabet size or number of goods.
    pub d: usize,
    /// Orders to sweep; `None` uses the task's defaults.
    pub alphas: Option<Vec<f64>>,
    pub iters: usize,
    pub out: PathBuf,
    /// Budget for the long reference run that stands in for the exact mean.
    pub reference_iters: usize,
    pub reference_tol: f64,
    pub capacity_eps: f64,
    pub rho_range: [f64; 2],
    pub rho_hat: f64,
    pub schedule: ScheduleKind,
    pub coverage_prob: f64,
    pub polyak_iters: usize,
    pub grid_resolution: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: Task::Augustin,
            seed: 0,
            n: 8,
            d: 16,
            alphas: None,
            iters: 60,
            out: PathBuf::from("out"),
            reference_iters: 200,
            reference_tol: 1e-12,
            capacity_eps: 1e-9,
            rho_range: [0.1, 0.7],
            rho_hat: 0.75,
            schedule: ScheduleKind::Synchronous,
            coverage_prob: 0.5,
            polyak_iters: 1000,
            grid_resolution: 100,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub task: Option<Task>,
    pub seed: Option<u64>,
    pub alphas: Option<Vec<f64>>,
    pub iters: Option<usize>,
    pub out: Option<PathBuf>,
    pub n: Option<usize>,
    pub d: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("invalid config: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(t) = o.task {
            self.task = t;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(a) = &o.alphas {
            self.alphas = Some(a.clone());
        }
        if let Some(i) = o.iters {
            self.iters = i;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(n) = o.n {
            self.n = n;
        }
        if let Some(d) = o.d {
            self.d = d;
        }
    }

    pub fn effective_alphas(&self) -> Vec<f64> {
        self.alphas.clone().unwrap_or_else(|| self.task.default_alphas())
    }
}

/// Every reason `cfg` cannot run; empty iff it is runnable.
pub fn validate_config(cfg: &ExperimentConfig) -> Vec<String> {
    let mut v = Vec::new();
    if cfg.out.as_os_str().is_empty() {
        v.push("out must not be empty".to_string());
    }
    let uses_dims = matches!(cfg.task, Task::Augustin | Task::Classical | Task::Capacity | Task::Fisher);
    if uses_dims {
        if cfg.n == 0 {
            v.push("n must be at least 1".into());
        }
        if cfg.d == 0 {
            v.push("d must be at least 1".into());
        }
    }
    if cfg.task != Task::Counterexample && cfg.iters == 0 {
        v.push("iters must be at least 1".into());
    }

    let alphas = cfg.effective_alphas();
    if cfg.task != Task::Fisher {
        if alphas.is_empty() {
            v.push("alphas must not be empty".into());
        }
        for &a in &alphas {
            if !(a.is_finite() && a > 0.0 && a != 1.0) {
                v.push(format!("alpha = {a} is not in (0,1) or (1,inf)"));
            } else if cfg.task == Task::Capacity && !(a > 0.5 && a < 1.0) {
                v.push(format!("capacity requires alpha in (1/2, 1), got {a}"));
            }
        }
    }

    match cfg.task {
        Task::Augustin | Task::Classical => {
            if cfg.reference_iters == 0 {
                v.push("reference_iters must be at least 1".into());
            }
            if !(cfg.reference_tol >= 0.0) {
                v.push("reference_tol must be nonnegative".into());
            }
        }
        Task::Capacity => {
            if !(cfg.capacity_eps > 0.0 && cfg.capacity_eps.is_finite()) {
                v.push("capacity_eps must be positive".into());
            }
        }
        Task::Fisher => {
            let [lo, hi] = cfg.rho_range;
            if !(lo > 0.0 && lo < hi && hi < 1.0) {
                v.push(format!("rho_range [{lo}, {hi}] must satisfy 0 < lo < hi < 1"));
            }
            if !(cfg.rho_hat < 1.0) {
                v.push(format!("rho_hat = {} must be below 1", cfg.rho_hat));
            }
            if cfg.rho_hat < hi {
                v.push(format!("rho_hat = {} is below the largest buyer rho {hi}", cfg.rho_hat));
            }
            if cfg.schedule == ScheduleKind::RandomCoverage && !(cfg.coverage_prob > 0.0 && cfg.coverage_prob <= 1.0) {
                v.push("coverage_prob must lie in (0, 1]".into());
            }
        }
        Task::DivergenceDemo => {
            if cfg.polyak_iters == 0 {
                v.push("polyak_iters must be at least 1".into());
            }
        }
        Task::Counterexample => {}
    }
    v
}
