//! Command-line front end: argument and config-file handling, dispatch to the
//! verifiers, and JSON report output.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use lens_ehg::identities::{self, base_params, cjson, DetKind};
use lens_ehg::lattice::verify_star_star;
use lens_ehg::quadrature::ValueWithError;
use lens_ehg::report::FailureKind;
use lens_ehg::susy_index::{check_seiberg_duality, Baryon, GaugeTheorySpec, Group};
use lens_ehg::{Complex64, Error, Kernel, ModularParams, NumericsConfig, VerificationReport};
use serde_json::json;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const DEFAULT_SIGMA: Complex64 = Complex64::new(0.11, 0.23);
pub const DEFAULT_TAU: Complex64 = Complex64::new(0.05, 0.31);
pub const DEFAULT_OUTPUT: &str = "lens-ehg-report.json";

/// "a+bi" with decimal doubles.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    s.trim()
        .parse::<Complex64>()
        .map_err(|_| format!("malformed complex literal {s:?} (expected a+bi, e.g. 0.1+0.3i)"))
        .and_then(|z| {
            if z.is_finite() {
                Ok(z)
            } else {
                Err(format!("complex literal {s:?} is not finite"))
            }
        })
}

fn parse_r(s: &str) -> Result<u32, String> {
    let r: u32 = s.parse().map_err(|_| format!("r must be a positive integer, got {s:?}"))?;
    if r < 1 {
        return Err("r must be at least 1".into());
    }
    Ok(r)
}

#[derive(Parser, Debug)]
#[command(name = "lens-ehg", version, about = "Lens elliptic gamma function and elliptic hypergeometric sum/integral checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

/// Options shared by every command.
#[derive(Args, Debug, Clone)]
struct Common {
    /// key=value file; explicit flags take precedence over it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    sigma: Option<Complex64>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    tau: Option<Complex64>,
    #[arg(long, value_parser = parse_r)]
    r: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// append one JSON document per line instead of overwriting
    #[arg(long)]
    append: bool,
    #[arg(long)]
    product_tol: Option<f64>,
    #[arg(long)]
    product_max_index: Option<usize>,
    #[arg(long)]
    quad_tol: Option<f64>,
    #[arg(long)]
    quad_start_nodes: Option<usize>,
    #[arg(long)]
    quad_max_nodes: Option<usize>,
    #[arg(long)]
    pole_guard: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GammaFn {
    Gamma,
    Theta1,
    Theta2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AnCheck {
    Transform,
    Involution,
    Evaluation,
    Limit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BcnCheck {
    Transform,
    Evaluation,
    Bc1,
    Limit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DetChoice {
    Frobenius,
    Cauchy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GroupChoice {
    Su,
    Sp,
}

#[derive(Subcommand, Debug)]
// later occurrences of a flag (explicit ones after config-file ones) win
#[command(args_override_self = true)]
enum Cmd {
    /// Evaluate Γ(z, m), θ1 or θ2
    EvalGamma {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Option<Complex64>,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i64>,
        #[arg(long, value_enum)]
        function: Option<GammaFn>,
        #[command(flatten)]
        common: Common,
    },
    /// Kernel identity suite
    VerifyKernel {
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Elliptic beta sum/integral
    VerifyBeta {
        #[command(flatten)]
        common: Common,
    },
    /// A_n sum/integral identities
    VerifyAn {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        check: Option<AnCheck>,
        #[command(flatten)]
        common: Common,
    },
    /// BC_n sum/integral identities
    VerifyBcn {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        check: Option<BcnCheck>,
        #[command(flatten)]
        common: Common,
    },
    /// Theta-function determinant evaluations
    VerifyDet {
        #[arg(long, value_enum)]
        kind: Option<DetChoice>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        flavor: Option<u8>,
        #[command(flatten)]
        common: Common,
    },
    /// Seiberg duality of lens indices
    Susy {
        #[arg(long, value_enum)]
        group: Option<GroupChoice>,
        #[arg(long)]
        nc: Option<usize>,
        #[arg(long)]
        nf: Option<usize>,
        /// U(1)_B fugacity (SU only)
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        baryon: Option<Complex64>,
        /// discrete U(1)_B holonomy; must be a multiple of N_f − N_c
        #[arg(long, allow_hyphen_values = true)]
        n_b: Option<i64>,
        #[command(flatten)]
        common: Common,
    },
    /// Star-star relation of the lattice model
    StarStar {
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

/// The task of a run with every parameter resolved.
#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    EvalGamma { z: Complex64, m: i64, function: GammaFn },
    VerifyKernel { samples: usize },
    VerifyBeta,
    VerifyAn { m: usize, n: usize, check: AnCheck },
    VerifyBcn { m: usize, n: usize, check: BcnCheck },
    VerifyDet { kind: DetChoice, n: usize, flavor: u8 },
    Susy { group: GroupChoice, nc: usize, nf: usize, baryon: Baryon },
    StarStar { n: usize },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::EvalGamma { .. } => "eval-gamma",
            Command::VerifyKernel { .. } => "verify-kernel",
            Command::VerifyBeta => "verify-beta",
            Command::VerifyAn { .. } => "verify-an",
            Command::VerifyBcn { .. } => "verify-bcn",
            Command::VerifyDet { .. } => "verify-det",
            Command::Susy { .. } => "susy",
            Command::StarStar { .. } => "star-star",
        }
    }

    fn default_tol(&self) -> f64 {
        match self {
            Command::EvalGamma { .. } => 0.0,
            Command::VerifyKernel { .. } | Command::VerifyDet { .. } => 1e-10,
            Command::VerifyBeta => 1e-8,
            Command::VerifyAn { check: AnCheck::Limit, .. } | Command::VerifyBcn { check: BcnCheck::Limit, .. } => {
                identities::LIMIT_TOL
            }
            Command::VerifyAn { check: AnCheck::Involution, .. } => 1e-8,
            Command::VerifyAn { check: AnCheck::Evaluation, n, .. } => {
                if *n <= 1 {
                    1e-8
                } else {
                    1e-6
                }
            }
            Command::VerifyBcn { check: BcnCheck::Evaluation, n, .. } => {
                if *n <= 1 {
                    1e-8
                } else {
                    1e-5
                }
            }
            Command::VerifyBcn { check: BcnCheck::Bc1, .. } => 1e-10,
            Command::VerifyAn { .. } | Command::VerifyBcn { .. } | Command::Susy { .. } => 1e-6,
            Command::StarStar { .. } => 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub numerics: NumericsConfig,
    pub sigma: Complex64,
    pub tau: Complex64,
    pub r: u32,
    pub seed: u64,
    pub tol: f64,
    pub output: PathBuf,
    pub append: bool,
}

/// Usage or configuration error; maps to exit code 2.
#[derive(Debug)]
pub enum UsageError {
    /// from the argument parser, including --help and --version requests
    Clap(clap::Error),
    Message(String),
}

impl UsageError {
    /// True for --help / --version, which are not failures.
    pub fn is_informational(&self) -> bool {
        matches!(self, UsageError::Clap(e) if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ))
    }
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UsageError::Clap(e) => write!(f, "{e}"),
            UsageError::Message(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for UsageError {}

/// Value of `--config` if present (either `--config path` or `--config=path`).
fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// key=value lines ('#' comments, blank lines ignored) as `--key=value`
/// tokens, checked against the flags of `sub`.
fn config_tokens(path: &Path, sub: &str) -> Result<Vec<String>, UsageError> {
    let text = fs::read_to_string(path)
        .map_err(|e| UsageError::Message(format!("cannot read config file {}: {e}", path.display())))?;
    let cmd = Cli::command();
    let sc = cmd
        .find_subcommand(sub)
        .ok_or_else(|| UsageError::Message(format!("unknown command {sub:?}")))?;
    let known: Vec<String> = sc.get_arguments().filter_map(|a| a.get_long().map(str::to_string)).collect();
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            UsageError::Message(format!("{}:{}: expected key=value, got {line:?}", path.display(), lineno + 1))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" || !known.contains(&key) {
            return Err(UsageError::Message(format!(
                "{}:{}: unknown config key {key:?} for {sub}",
                path.display(),
                lineno + 1
            )));
        }
        if key == "append" {
            match value {
                "true" => out.push("--append".into()),
                "false" => {}
                _ => return Err(UsageError::Message(format!("config key append must be true or false, got {value:?}"))),
            }
        } else {
            out.push(format!("--{key}={value}"));
        }
    }
    Ok(out)
}

/// Flags > config file > defaults. `argv[0]` is the program name.
pub fn parse_args(argv: &[String]) -> Result<RunConfig, UsageError> {
    let mut argv = argv.to_vec();
    if let Some(path) = config_path(&argv) {
        // config values go right after the subcommand; later (explicit)
        // occurrences of the same flag override them
        let sub = argv.get(1).cloned().unwrap_or_default();
        let tokens = config_tokens(Path::new(&path), &sub)?;
        argv.splice(2..2, tokens);
    }
    let cli = Cli::try_parse_from(&argv).map_err(UsageError::Clap)?;
    let (command, common) = match cli.command {
        Cmd::EvalGamma { z, m, function, common } => (
            Command::EvalGamma {
                z: z.unwrap_or(Complex64::new(0.2, 0.05)),
                m: m.unwrap_or(0),
                function: function.unwrap_or(GammaFn::Gamma),
            },
            common,
        ),
        Cmd::VerifyKernel { samples, common } => (
            Command::VerifyKernel {
                samples: samples.unwrap_or(200),
            },
            common,
        ),
        Cmd::VerifyBeta { common } => (Command::VerifyBeta, common),
        Cmd::VerifyAn { m, n, check, common } => (
            Command::VerifyAn {
                m: m.unwrap_or(0),
                n: n.unwrap_or(1),
                check: check.unwrap_or(AnCheck::Transform),
            },
            common,
        ),
        Cmd::VerifyBcn { m, n, check, common } => (
            Command::VerifyBcn {
                m: m.unwrap_or(0),
                n: n.unwrap_or(1),
                check: check.unwrap_or(BcnCheck::Transform),
            },
            common,
        ),
        Cmd::VerifyDet { kind, n, flavor, common } => (
            Command::VerifyDet {
                kind: kind.unwrap_or(DetChoice::Frobenius),
                n: n.unwrap_or(2),
                flavor: flavor.unwrap_or(1),
            },
            common,
        ),
        Cmd::Susy { group, nc, nf, baryon, n_b, common } => {
            let d = Baryon::default();
            let baryon = Baryon {
                b: baryon.unwrap_or(d.b),
                n_b: n_b.unwrap_or(d.n_b),
            };
            let group = group.unwrap_or(GroupChoice::Su);
            let nc = nc.unwrap_or(match group {
                GroupChoice::Su => 2,
                GroupChoice::Sp => 1,
            });
            (
                Command::Susy {
                    group,
                    nc,
                    nf: nf.unwrap_or(3),
                    baryon,
                },
                common,
            )
        }
        Cmd::StarStar { n, common } => (Command::StarStar { n: n.unwrap_or(2) }, common),
    };
    let d = NumericsConfig::default();
    let numerics = NumericsConfig {
        product_tol: common.product_tol.unwrap_or(d.product_tol),
        product_max_index: common.product_max_index.unwrap_or(d.product_max_index),
        quad_tol: common.quad_tol.unwrap_or(d.quad_tol),
        quad_start_nodes: common.quad_start_nodes.unwrap_or(d.quad_start_nodes),
        quad_max_nodes: common.quad_max_nodes.unwrap_or(d.quad_max_nodes),
        pole_guard: common.pole_guard.unwrap_or(d.pole_guard),
    };
    numerics.validate().map_err(|e| UsageError::Message(e.to_string()))?;
    let tol = common.tol.unwrap_or_else(|| command.default_tol());
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(UsageError::Message(format!("--tol must be a non-negative number, got {tol}")));
    }
    Ok(RunConfig {
        numerics,
        sigma: common.sigma.unwrap_or(DEFAULT_SIGMA),
        tau: common.tau.unwrap_or(DEFAULT_TAU),
        r: common.r.unwrap_or(1),
        seed: common.seed.unwrap_or(1),
        tol,
        output: common.output.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT)),
        append: common.append,
        command,
    })
}

/// One compact JSON document followed by a newline; appended in batch mode.
pub fn write_report(report: &VerificationReport, path: &Path, append: bool) -> std::io::Result<()> {
    let mut line = serde_json::to_string(report).map_err(std::io::Error::other)?;
    line.push('\n');
    let mut f = OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)?;
    f.write_all(line.as_bytes())
}

fn eval_report(cfg: &RunConfig, k: &Kernel, z: Complex64, m: i64, function: GammaFn) -> VerificationReport {
    let start = Instant::now();
    let name = match function {
        GammaFn::Gamma => "eval_gamma",
        GammaFn::Theta1 => "eval_theta1",
        GammaFn::Theta2 => "eval_theta2",
    };
    let mut params = base_params(k, cfg.seed);
    params.insert("z".into(), cjson(z));
    params.insert("m".into(), json!(m));
    let rep = VerificationReport::new(name, serde_json::Value::Object(params), cfg.tol, cfg.seed);
    let v = match function {
        GammaFn::Gamma => k.gamma(z, m),
        GammaFn::Theta1 => k.theta1(z, m),
        GammaFn::Theta2 => k.theta2(z, m),
    };
    match v {
        Ok(v) => rep.with_sides(ValueWithError::exact(v), ValueWithError::exact(v)).timed(start),
        Err(e) => rep.fail_with(&e).timed(start),
    }
}

/// Runs the configured task and returns its report (failures included).
pub fn execute(cfg: &RunConfig) -> Result<VerificationReport, Error> {
    let k = Kernel::new(ModularParams::new(cfg.sigma, cfg.tau, cfg.r)?, cfg.numerics)?;
    let (seed, tol) = (cfg.seed, cfg.tol);
    Ok(match cfg.command {
        Command::EvalGamma { z, m, function } => eval_report(cfg, &k, z, m, function),
        Command::VerifyKernel { samples } => identities::verify_kernel_suite(samples, seed, tol, &k),
        Command::VerifyBeta => identities::verify_elliptic_beta(seed, tol, &k),
        Command::VerifyAn { m, n, check } => match check {
            AnCheck::Transform => identities::verify_an_transform(m, n, seed, tol, &k),
            AnCheck::Involution => identities::verify_an_involution(m, n, seed, tol, &k),
            AnCheck::Evaluation => identities::verify_an_evaluation(n, seed, tol, &k),
            AnCheck::Limit => identities::verify_an_limit(m, n, seed, tol, &k),
        },
        Command::VerifyBcn { m, n, check } => match check {
            BcnCheck::Transform => identities::verify_bcn_transform(m, n, seed, tol, &k),
            BcnCheck::Evaluation => identities::verify_bcn_evaluation(n, seed, tol, &k),
            BcnCheck::Bc1 => identities::verify_bc1_a1(m, seed, tol, &k),
            BcnCheck::Limit => identities::verify_bcn_limit(m, n, seed, tol, &k),
        },
        Command::VerifyDet { kind, n, flavor } => {
            let kind = match kind {
                DetChoice::Frobenius => DetKind::Frobenius,
                DetChoice::Cauchy => DetKind::Cauchy,
            };
            identities::verify_det(kind, n, flavor, seed, tol, &k)
        }
        Command::Susy { group, nc, nf, baryon } => {
            let g = match group {
                GroupChoice::Su => Group::SU,
                GroupChoice::Sp => Group::Sp,
            };
            let mut spec = GaugeTheorySpec::sample(g, nc, nf, cfg.r, cfg.sigma, cfg.tau, seed);
            spec.baryon = baryon;
            check_seiberg_duality(&spec, seed, tol, &cfg.numerics)
        }
        Command::StarStar { n } => verify_star_star(n, seed, tol, &k),
    })
}

pub fn exit_code(report: &VerificationReport) -> i32 {
    match &report.failure {
        Some(f) if f.kind == FailureKind::Config => EXIT_CONFIG,
        Some(_) => EXIT_NUMERICAL,
        None if report.pass => EXIT_PASS,
        None => EXIT_FAIL,
    }
}

/// Executes, writes the report and returns the exit code. Diagnostics go to
/// standard error, a one-line summary to standard output.
pub fn run(cfg: &RunConfig) -> i32 {
    let report = match execute(cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("lens-ehg: {e}");
            return if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_CONFIG };
        }
    };
    if let Err(e) = write_report(&report, &cfg.output, cfg.append) {
        eprintln!("lens-ehg: cannot write report to {}: {e}", cfg.output.display());
        return EXIT_CONFIG;
    }
    if let Some(f) = &report.failure {
        eprintln!("lens-ehg: {}: {}", cfg.command.name(), f.message);
    }
    let _ = writeln!(
        std::io::stdout(),
        "{} {} rel_err={:.3e} tol={:.1e} -> {}",
        report.identity_name,
        if report.pass { "PASS" } else { "FAIL" },
        report.rel_err,
        report.tol,
        cfg.output.display()
    );
    exit_code(&report)
}

/// Caps rayon's pool at LENS_EHG_THREADS (0 or unset: automatic).
pub fn init_threads() -> Result<(), UsageError> {
    let Ok(v) = std::env::var("LENS_EHG_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| UsageError::Message(format!("LENS_EHG_THREADS must be a non-negative integer, got {v:?}")))?;
    if n > 0 {
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
