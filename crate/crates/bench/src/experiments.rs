//! Accuracy, Σ-orthogonality and runtime sweeps over generated instances.
//!
//! CSV schemas (header row always present, column order fixed):
//!
//! | experiment | columns |
//! |------------|---------|
//! | accuracy   | `method,n,kappa,rel_err_min_eig,runtime_s,seed,status` |
//! | sigma      | `method,n,kappa,sigma_dev,seed,status` |
//! | runtime    | `method,n,median_runtime_s,repeats,status` |
//!
//! Floats are written with 17 significant digits; a failed cell carries
//! `nan` in its numeric columns and the error kind in `status`.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use bse_core::gen::{self, GeneratorSpec};
use bse_core::matrix::{BseMatrixI, Method, SpectralResult};
use bse_core::{solve, verify};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{core_kind, BenchError};

/// Shift margin for the random definite instances of the runtime sweep.
pub const RUNTIME_SHIFT_MARGIN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Accuracy,
    Sigma,
    Runtime,
}

impl std::str::FromStr for Experiment {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "accuracy" => Ok(Experiment::Accuracy),
            "sigma" => Ok(Experiment::Sigma),
            "runtime" => Ok(Experiment::Runtime),
            other => Err(BenchError::Config(format!("unknown experiment {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Table2,
    Fig3,
    Fig2,
}

impl std::str::FromStr for Preset {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table2" => Ok(Preset::Table2),
            "fig3" => Ok(Preset::Fig3),
            "fig2" => Ok(Preset::Fig2),
            other => Err(BenchError::Config(format!("unknown preset {other:?}"))),
        }
    }
}

impl Preset {
    pub fn experiment(self) -> Experiment {
        match self {
            Preset::Table2 => Experiment::Accuracy,
            Preset::Fig3 => Experiment::Sigma,
            Preset::Fig2 => Experiment::Runtime,
        }
    }

    pub fn config(self) -> BenchConfig {
        let base = BenchConfig::default();
        match self {
            Preset::Table2 => BenchConfig {
                sizes: vec![200],
                kappas: vec![10.0, 1e3, 1e6, 1e9],
                methods: Method::ALL.to_vec(),
                ..base
            },
            Preset::Fig3 => BenchConfig {
                sizes: vec![200],
                // the conditioned family starts at κ = 3, standing in for 10⁰
                kappas: std::iter::once(3.0)
                    .chain((1..=10).map(|e| 10f64.powi(e)))
                    .collect(),
                methods: Method::ALL.to_vec(),
                ..base
            },
            Preset::Fig2 => BenchConfig {
                sizes: vec![10, 50, 100, 200, 500, 1000, 1500, 2000],
                kappas: vec![],
                methods: Method::STRUCTURED.to_vec(),
                repeats: 3,
                ..base
            },
        }
    }
}

/// Parameters of one sweep. `kappas` is ignored by the runtime experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub kappas: Vec<f64>,
    pub methods: Vec<Method>,
    /// Instances per cell (accuracy, sigma) or timed solves per cell (runtime).
    pub repeats: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Run accuracy/sigma cells on the rayon pool.
    pub parallel: bool,
    /// Also run runtime cells concurrently. Timings then interfere.
    pub parallel_timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![200],
            kappas: vec![10.0],
            methods: Method::ALL.to_vec(),
            repeats: 1,
            seed: 0,
            output: None,
            parallel: true,
            parallel_timing: false,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self, experiment: Experiment) -> Result<(), BenchError> {
        if self.sizes.is_empty() {
            return Err(BenchError::Config("sizes must not be empty".into()));
        }
        if self.sizes.contains(&0) {
            return Err(BenchError::Config("sizes must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(BenchError::Config("methods must not be empty".into()));
        }
        if experiment != Experiment::Runtime && self.kappas.is_empty() {
            return Err(BenchError::Config("kappas must not be empty".into()));
        }
        if self.repeats == 0 {
            return Err(BenchError::Config("repeats must be at least 1".into()));
        }
        Ok(())
    }

    /// Seed of the `r`-th instance of every cell.
    pub fn instance_seed(&self, r: usize) -> u64 {
        self.seed.wrapping_add(r as u64)
    }

    /// Overlays the fields present in a TOML document.
    pub fn apply_toml(&mut self, text: &str) -> Result<Option<Experiment>, BenchError> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        if let Some(v) = file.sizes {
            self.sizes = v;
        }
        if let Some(v) = file.kappas {
            self.kappas = v;
        }
        if let Some(v) = file.methods {
            self.methods = v
                .iter()
                .map(|m| m.parse().map_err(BenchError::Config))
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = file.repeats {
            self.repeats = v;
        }
        if let Some(v) = file.seed {
            self.seed = v;
        }
        if let Some(v) = file.output {
            self.output = Some(v);
        }
        if let Some(v) = file.parallel {
            self.parallel = v;
        }
        if let Some(v) = file.parallel_timing {
            self.parallel_timing = v;
        }
        Ok(file.experiment)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: Option<Experiment>,
    sizes: Option<Vec<usize>>,
    kappas: Option<Vec<f64>>,
    methods: Option<Vec<String>>,
    repeats: Option<usize>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    parallel: Option<bool>,
    parallel_timing: Option<bool>,
}

/// Outcome of one cell: `Ok` or the kind of the error that stopped it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    Failed(&'static str),
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Failed(kind) => kind,
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, CellStatus::Ok)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRecord {
    pub method: Method,
    pub n: usize,
    pub kappa: f64,
    pub rel_err_min_eig: f64,
    pub runtime_s: f64,
    pub seed: u64,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaRecord {
    pub method: Method,
    pub n: usize,
    pub kappa: f64,
    pub sigma_dev: f64,
    pub seed: u64,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeRecord {
    pub method: Method,
    pub n: usize,
    pub median_runtime_s: f64,
    pub repeats: usize,
    /// Every timed solve, in execution order.
    pub samples: Vec<f64>,
    pub status: CellStatus,
}

fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

fn timed_solve(h: &BseMatrixI, method: Method) -> (bse_core::Result<SpectralResult>, f64) {
    let start = Instant::now();
    let r = solve(h, method);
    (r, start.elapsed().as_secs_f64())
}

/// One generated instance of the conditioned family, solved by every method.
struct Instance {
    n: usize,
    kappa: f64,
    seed: u64,
}

impl Instance {
    fn grid(cfg: &BenchConfig) -> Vec<Instance> {
        let mut cells = Vec::new();
        for &n in &cfg.sizes {
            for &kappa in &cfg.kappas {
                for r in 0..cfg.repeats {
                    cells.push(Instance {
                        n,
                        kappa,
                        seed: cfg.instance_seed(r),
                    });
                }
            }
        }
        cells
    }

    fn run<T, F>(&self, methods: &[Method], per_method: F) -> Vec<T>
    where
        F: Fn(&Instance, Method, Result<(&GeneratorSpec, &BseMatrixI), &'static str>) -> T,
    {
        let generated = GeneratorSpec::new(self.n, self.kappa, self.seed)
            .and_then(|spec| gen::generate_conditioned(&spec).map(|h| (spec, h)));
        methods
            .iter()
            .map(|&m| match &generated {
                Ok((spec, h)) => per_method(self, m, Ok((spec, h))),
                Err(e) => per_method(self, m, Err(core_kind(e))),
            })
            .collect()
    }
}

fn map_cells<T: Send>(cfg: &BenchConfig, f: impl Fn(&Instance) -> Vec<T> + Sync) -> Vec<T> {
    let cells = Instance::grid(cfg);
    let nested: Vec<Vec<T>> = if cfg.parallel {
        cells.par_iter().map(&f).collect()
    } else {
        cells.iter().map(&f).collect()
    };
    nested.into_iter().flatten().collect()
}

fn method_rank(methods: &[Method], m: Method) -> usize {
    methods.iter().position(|&x| x == m).unwrap_or(usize::MAX)
}

/// Relative error of the smallest computed eigenvalue against `(√3/2)·d₁`.
pub fn run_accuracy_experiment(cfg: &BenchConfig) -> Result<Vec<AccuracyRecord>, BenchError> {
    cfg.validate(Experiment::Accuracy)?;
    let mut rows = map_cells(cfg, |cell| {
        cell.run(&cfg.methods, |cell, method, generated| {
            let (rel_err, runtime, status) = match generated {
                Err(kind) => (f64::NAN, f64::NAN, CellStatus::Failed(kind)),
                Ok((spec, h)) => {
                    let exact = spec.exact_spectrum()[0];
                    match timed_solve(h, method) {
                        (Ok(r), t) => ((r.lambda[0] - exact).abs() / exact, t, CellStatus::Ok),
                        (Err(e), t) => (f64::NAN, t, CellStatus::Failed(core_kind(&e))),
                    }
                }
            };
            AccuracyRecord {
                method,
                n: cell.n,
                kappa: cell.kappa,
                rel_err_min_eig: rel_err,
                runtime_s: runtime,
                seed: cell.seed,
                status,
            }
        })
    });
    // grid order is (n, κ, seed); present as (n, κ, method, seed)
    rows.sort_by_key(|r| (method_rank(&cfg.methods, r.method), r.seed));
    rows.sort_by(|a, b| a.n.cmp(&b.n).then(a.kappa.total_cmp(&b.kappa)));
    Ok(rows)
}

/// `‖VᴴΣV − I‖_F` of the computed eigenvectors.
pub fn run_sigma_experiment(cfg: &BenchConfig) -> Result<Vec<SigmaRecord>, BenchError> {
    cfg.validate(Experiment::Sigma)?;
    let mut rows = map_cells(cfg, |cell| {
        cell.run(&cfg.methods, |cell, method, generated| {
            let (sigma_dev, status) = match generated {
                Err(kind) => (f64::NAN, CellStatus::Failed(kind)),
                Ok((_, h)) => match solve(h, method)
                    .and_then(|r| verify::sigma_orthogonality_error(r.v.as_ref()))
                {
                    Ok(dev) => (dev, CellStatus::Ok),
                    Err(e) => (f64::NAN, CellStatus::Failed(core_kind(&e))),
                },
            };
            SigmaRecord {
                method,
                n: cell.n,
                kappa: cell.kappa,
                sigma_dev,
                seed: cell.seed,
                status,
            }
        })
    });
    rows.sort_by_key(|r| (method_rank(&cfg.methods, r.method), r.seed));
    rows.sort_by(|a, b| a.n.cmp(&b.n).then(a.kappa.total_cmp(&b.kappa)));
    Ok(rows)
}

fn median(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

fn runtime_cell(cfg: &BenchConfig, n: usize, method: Method) -> RuntimeRecord {
    let mut samples = Vec::with_capacity(cfg.repeats);
    let mut status = CellStatus::Ok;
    for r in 0..cfg.repeats {
        let h = match gen::generate_random_definite(n, cfg.instance_seed(r), RUNTIME_SHIFT_MARGIN) {
            Ok(h) => h,
            Err(e) => {
                status = CellStatus::Failed(core_kind(&e));
                break;
            }
        };
        let (result, t) = timed_solve(&h, method);
        if let Err(e) = result {
            status = CellStatus::Failed(core_kind(&e));
            break;
        }
        samples.push(t);
    }
    RuntimeRecord {
        method,
        n,
        median_runtime_s: if status.is_ok() { median(&samples) } else { f64::NAN },
        repeats: cfg.repeats,
        samples,
        status,
    }
}

/// Median wall time of the solver call over `repeats` random definite instances.
///
/// Instance generation is excluded from the timing. Cells run one after the
/// other unless `parallel_timing` is set.
pub fn run_runtime_experiment(cfg: &BenchConfig) -> Result<Vec<RuntimeRecord>, BenchError> {
    cfg.validate(Experiment::Runtime)?;
    let cells: Vec<(usize, Method)> = cfg
        .sizes
        .iter()
        .flat_map(|&n| cfg.methods.iter().map(move |&m| (n, m)))
        .collect();
    let rows = if cfg.parallel_timing {
        cells.par_iter().map(|&(n, m)| runtime_cell(cfg, n, m)).collect()
    } else {
        cells.iter().map(|&(n, m)| runtime_cell(cfg, n, m)).collect()
    };
    Ok(rows)
}

pub fn accuracy_csv(rows: &[AccuracyRecord]) -> String {
    let mut out = String::from("method,n,kappa,rel_err_min_eig,runtime_s,seed,status\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.method,
            r.n,
            fmt_f64(r.kappa),
            fmt_f64(r.rel_err_min_eig),
            fmt_f64(r.runtime_s),
            r.seed,
            r.status.as_str()
        );
    }
    out
}

pub fn sigma_csv(rows: &[SigmaRecord]) -> String {
    let mut out = String::from("method,n,kappa,sigma_dev,seed,status\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.method,
            r.n,
            fmt_f64(r.kappa),
            fmt_f64(r.sigma_dev),
            r.seed,
            r.status.as_str()
        );
    }
    out
}

pub fn runtime_csv(rows: &[RuntimeRecord]) -> String {
    let mut out = String::from("method,n,median_runtime_s,repeats,status\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.method,
            r.n,
            fmt_f64(r.median_runtime_s),
            r.repeats,
            r.status.as_str()
        );
    }
    out
}

/// Runs `experiment` and renders its CSV.
pub fn run_to_csv(experiment: Experiment, cfg: &BenchConfig) -> Result<String, BenchError> {
    Ok(match experiment {
        Experiment::Accuracy => accuracy_csv(&run_accuracy_experiment(cfg)?),
        Experiment::Sigma => sigma_csv(&run_sigma_experiment(cfg)?),
        Experiment::Runtime => runtime_csv(&run_runtime_experiment(cfg)?),
    })
}
