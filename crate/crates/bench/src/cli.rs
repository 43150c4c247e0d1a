use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use bse_core::gen::{self, GeneratorSpec};
use bse_core::matrix::{Diagnostic, Method, SpectralResult};
use bse_core::{negative_spectrum, solve, verify, BseMatrixI};
use clap::{Args, Parser, Subcommand};
use faer::{c64, Mat};

use crate::error::{BenchError, EXIT_CODES};
use crate::experiments::{self, BenchConfig, Experiment, Preset};
use crate::mmio;

/// Environment variable consulted for `--seed` when the flag is absent.
pub const SEED_ENV: &str = "BSE_SEED";

fn exit_code_help() -> String {
    let mut s = String::from("Exit codes:\n  0  success\n");
    for (code, kind, what) in EXIT_CODES {
        let _ = writeln!(s, "  {code:<2} {kind}: {what}");
    }
    s.push_str("\nOn failure one line `error: code=<n> kind=<kind> message=<text>` is written to stderr.");
    s
}

#[derive(Debug, Parser)]
#[command(
    name = "bse-bench",
    version,
    about = "Structured eigensolvers for form-I Bethe-Salpeter matrices",
    after_help = exit_code_help()
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write A and B of a generated instance as Matrix Market files.
    Generate(GenerateArgs),
    /// Solve for the positive (or negative) spectrum of H = [[A, B], [-B, -A]].
    Solve(SolveArgs),
    /// Check structure of A/B and, optionally, a computed eigensystem.
    Verify(VerifyArgs),
    /// Run an accuracy, Σ-orthogonality or runtime sweep and emit CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    /// Target condition number of H (conditioned family, must be >= 3).
    #[arg(long, default_value_t = 10.0, conflicts_with = "random_definite")]
    pub kappa: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Random Hermitian blocks with A shifted to make A±B definite.
    #[arg(long)]
    pub random_definite: bool,
    #[arg(long, default_value_t = 1.0, requires = "random_definite")]
    pub shift_margin: f64,
    #[arg(long)]
    pub out_a: PathBuf,
    #[arg(long)]
    pub out_b: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// sqrt, chol, chol-svd or reference.
    #[arg(long, default_value = "chol-svd")]
    pub method: Method,
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Report the mirrored eigenpairs (-λ) instead.
    #[arg(long)]
    pub negative: bool,
    /// Eigenvalues, one per line.
    #[arg(long)]
    pub out_values: Option<PathBuf>,
    /// Eigenvectors as a 2n×n Matrix Market file.
    #[arg(long)]
    pub out_vectors: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Eigenvalue file written by `solve --out-values`.
    #[arg(long, requires = "vectors")]
    pub values: Option<PathBuf>,
    /// Eigenvector file written by `solve --out-vectors`.
    #[arg(long, requires = "values")]
    pub vectors: Option<PathBuf>,
    /// Relative tolerance for the form-I predicate.
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// table2 (accuracy), fig3 (sigma) or fig2 (runtime).
    #[arg(long)]
    pub preset: Option<String>,
    /// accuracy, sigma or runtime; defaults to the preset's experiment.
    #[arg(long)]
    pub experiment: Option<String>,
    /// TOML file with any of: experiment, sizes, kappas, methods, repeats,
    /// seed, output, parallel, parallel_timing.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub kappas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run accuracy/sigma cells on one thread.
    #[arg(long)]
    pub serial: bool,
    /// Let runtime cells run concurrently (timings will interfere).
    #[arg(long)]
    pub parallel_timing: bool,
}

/// Parses `argv` (including the program name) and runs the command.
///
/// Returns the process exit code. Usage errors print clap's message and
/// return 2; domain errors print one machine-readable line to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            let _ = writeln!(
                err,
                "error: code={} kind={} message={message}",
                e.exit_code(),
                e.kind()
            );
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn cli_main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), BenchError> {
    match command {
        Command::Generate(args) => generate(args, out),
        Command::Solve(args) => solve_cmd(args, out),
        Command::Verify(args) => verify_cmd(args, out),
        Command::Bench(args) => bench(args, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), BenchError> {
    out.write_all(text.as_bytes())
        .map_err(|e| BenchError::io(Path::new("<stdout>"), e))
}

fn generate(args: GenerateArgs, out: &mut dyn Write) -> Result<(), BenchError> {
    let h = if args.random_definite {
        gen::generate_random_definite(args.n, args.seed, args.shift_margin)?
    } else {
        gen::generate_conditioned(&GeneratorSpec::new(args.n, args.kappa, args.seed)?)?
    };
    mmio::save_matrix_pair(&h, &args.out_a, &args.out_b)?;
    emit(
        out,
        &format!(
            "wrote {} and {} (n={})\n",
            args.out_a.display(),
            args.out_b.display(),
            h.n()
        ),
    )
}

/// Eigenvalue file: one `{:.16e}` value per line.
pub fn format_values(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.16e}\n")).collect()
}

pub fn parse_values(text: &str) -> Result<Vec<f64>, BenchError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| BenchError::Parse {
                line: i + 1,
                message: format!("cannot parse eigenvalue from {:?}", l.trim()),
                file: None,
            })
        })
        .collect()
}

fn report(h: &BseMatrixI, r: &SpectralResult, out: &mut dyn Write) -> Result<(), BenchError> {
    let mut text = String::new();
    for (j, l) in r.lambda.iter().enumerate() {
        let _ = writeln!(text, "lambda[{j}] = {l}");
    }
    let res = verify::residual(h, r)?;
    let max_res = res.iter().fold(0.0f64, |m, &x| m.max(x));
    let _ = writeln!(text, "max_residual = {max_res:.6e}");
    if let Ok(dev) = verify::sigma_orthogonality_error(r.v.as_ref()) {
        let _ = writeln!(text, "sigma_dev = {dev:.6e}");
    }
    for d in &r.diagnostics {
        match d {
            Diagnostic::NearSingularEigenvalue {
                index,
                raw,
                threshold,
            } => {
                let _ = writeln!(
                    text,
                    "warning: near-singular eigenvalue at index {index} (raw {raw:.6e}, threshold {threshold:.6e})"
                );
            }
        }
    }
    emit(out, &text)
}

fn solve_cmd(args: SolveArgs, out: &mut dyn Write) -> Result<(), BenchError> {
    let h = mmio::load_matrix_pair(&args.a, &args.b)?;
    let mut r = solve(&h, args.method)?;
    if args.negative {
        r = negative_spectrum(&h, &r);
    }
    if let Some(path) = &args.out_values {
        std::fs::write(path, format_values(&r.lambda)).map_err(|e| BenchError::io(path, e))?;
    }
    if let Some(path) = &args.out_vectors {
        mmio::write_matrix(path, r.v.as_ref())?;
    }
    emit(out, &format!("method = {}\n", r.method))?;
    report(&h, &r, out)
}

fn verify_cmd(args: VerifyArgs, out: &mut dyn Write) -> Result<(), BenchError> {
    let h = mmio::load_matrix_pair(&args.a, &args.b)?;
    let full = h.realize_full();
    let mut text = String::new();
    let _ = writeln!(text, "n = {}", h.n());
    let _ = writeln!(text, "form1 = {}", verify::check_form1(full.as_ref(), args.tol)?);
    let _ = writeln!(text, "form2 = {}", verify::check_form2(full.as_ref(), args.tol)?);
    let definite = match h.product_pair() {
        Ok(_) => "true".to_string(),
        Err(e) => format!("false ({e})"),
    };
    let _ = writeln!(text, "definite = {definite}");
    emit(out, &text)?;

    if let (Some(values_path), Some(vectors_path)) = (&args.values, &args.vectors) {
        let text = std::fs::read_to_string(values_path).map_err(|e| BenchError::io(values_path, e))?;
        let lambda = parse_values(&text).map_err(|e| e.in_file(values_path))?;
        let v: Mat<c64> = mmio::read_matrix(vectors_path)?;
        let r = SpectralResult {
            lambda,
            v,
            method: Method::Reference,
            diagnostics: vec![],
        };
        report_loaded(&h, &r, out)?;
    }
    Ok(())
}

fn report_loaded(h: &BseMatrixI, r: &SpectralResult, out: &mut dyn Write) -> Result<(), BenchError> {
    let res = verify::residual(h, r)?;
    let max_res = res.iter().fold(0.0f64, |m, &x| m.max(x));
    let dev = verify::sigma_orthogonality_error(r.v.as_ref())?;
    let neg: Vec<f64> = r.lambda.iter().map(|l| -l).collect();
    let mut text = String::new();
    let _ = writeln!(text, "max_residual = {max_res:.6e}");
    let _ = writeln!(text, "sigma_dev = {dev:.6e}");
    let _ = writeln!(
        text,
        "all_positive = {}",
        r.lambda.iter().all(|&l| l > 0.0)
    );
    let _ = writeln!(
        text,
        "pairing = {}",
        verify::check_pairing(&r.lambda, &neg, 1e-12)?
    );
    emit(out, &text)
}

/// Resolves preset, config file and flags (in that order of precedence,
/// later wins) into an experiment and its configuration.
pub fn resolve_bench(args: &BenchArgs) -> Result<(Experiment, BenchConfig), BenchError> {
    let preset: Option<Preset> = args.preset.as_deref().map(str::parse).transpose()?;
    let mut cfg = preset.map(Preset::config).unwrap_or_default();
    let mut experiment = preset.map(Preset::experiment);
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        if let Some(e) = cfg.apply_toml(&text)? {
            experiment = Some(e);
        }
    }
    if let Some(e) = &args.experiment {
        experiment = Some(e.parse()?);
    }
    if let Some(v) = &args.sizes {
        cfg.sizes = v.clone();
    }
    if let Some(v) = &args.kappas {
        cfg.kappas = v.clone();
    }
    if let Some(v) = &args.methods {
        cfg.methods = v.clone();
    }
    if let Some(v) = args.repeats {
        cfg.repeats = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = &args.out {
        cfg.output = Some(v.clone());
    }
    if args.serial {
        cfg.parallel = false;
    }
    if args.parallel_timing {
        cfg.parallel_timing = true;
    }
    let experiment = experiment.ok_or_else(|| {
        BenchError::Config("choose an experiment with --preset, --experiment or the config file".into())
    })?;
    cfg.validate(experiment)?;
    Ok((experiment, cfg))
}

fn bench(args: BenchArgs, out: &mut dyn Write) -> Result<(), BenchError> {
    let (experiment, cfg) = resolve_bench(&args)?;
    let csv = experiments::run_to_csv(experiment, &cfg)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, csv).map_err(|e| BenchError::io(path, e)),
        None => emit(out, &csv),
    }
}
