use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use genmoments::bounds::{
    compare_chi2_vs_mi, expected_gen_bound, highprob_bound_chi2, highprob_bound_power,
    highprob_bound_renyi, moment_bound_chi2, moment_bound_power, moment_bound_ratio,
    second_moment_bound_mi, BoundReport, ValidityMode,
};
use genmoments::distributions::{DiscreteDistribution, DEFAULT_ENUMERATION_CAP};
use genmoments::divergences::{divergence, DivergenceKind};
use genmoments::experiments::output::{CSV_FILE_NAME, PlotMeta};
use genmoments::experiments::{
    check_rows, emit_csv, emit_svg_plots, run_gaussian_mean_experiment, run_verification_suite,
    ExperimentConfig, VerifyOptions,
};
use genmoments::information::{
    build_joint, chi_square_information, max_density_ratio, mutual_information,
    power_information, JointDistribution, DEFAULT_W_ROUND_DIGITS,
};
use genmoments::risk::ModelSpec;
use genmoments::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "genmoments", version, about = "Bounds on moments of the generalization error")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Divergence between two discrete distributions given as JSON files.
    Divergence(DivergenceArgs),
    /// Information measures of a joint or of an enumerable model.
    Info(InfoArgs),
    /// Evaluate one bound.
    Bounds(BoundsArgs),
    /// Run an experiment.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Run the verification battery.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Write JSON here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Kl,
    Renyi,
    Power,
    Chi2,
}

#[derive(Args, Debug)]
struct DivergenceArgs {
    #[arg(long)]
    p: PathBuf,
    #[arg(long)]
    q: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Order t (power) or α (Rényi).
    #[arg(long)]
    order: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
#[group(id = "source", required = true, multiple = false, args = ["joint", "model"])]
struct InfoArgs {
    /// Joint distribution JSON.
    #[arg(long)]
    joint: Option<PathBuf>,
    /// Model JSON, enumerated into its joint.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Also report power information of this order.
    #[arg(long)]
    t: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TheoremArg {
    Thm2,
    Cor1,
    Cor2,
    Eq9,
    Thm3,
    Thm4,
    Eq12,
    Cor3,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Strict,
    Relaxed,
}

impl From<ModeArg> for ValidityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strict => ValidityMode::Strict,
            ModeArg::Relaxed => ValidityMode::Relaxed,
        }
    }
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    theorem: TheoremArg,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    n: usize,
    /// Moment order.
    #[arg(long)]
    m: Option<u32>,
    /// Order of the power information.
    #[arg(long)]
    t: Option<f64>,
    /// Hölder exponent for cor2.
    #[arg(long)]
    q: Option<u32>,
    /// Rényi order for eq12.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Information value: I_P, I_chi2, I(W;S) or D_alpha depending on the theorem.
    #[arg(long, visible_aliases = ["mi", "chi2", "info-pt", "d-alpha"])]
    info: Option<f64>,
    /// Maximal density ratio for eq9.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, value_enum, default_value = "relaxed")]
    mode: ModeArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand, Debug)]
enum ExperimentCommand {
    /// Gaussian mean estimation with truncated squared loss.
    GaussianMean(GaussianArgs),
}

#[derive(Args, Debug)]
struct GaussianArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

enum Outcome {
    Ok,
    VerificationFailed,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn require<T>(v: Option<T>, flag: &str, theorem: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParameter(format!("--{flag} is required for {theorem}")))
}

fn run_divergence(a: &DivergenceArgs) -> Result<Outcome> {
    let p: DiscreteDistribution = read_json(&a.p)?;
    let q: DiscreteDistribution = read_json(&a.q)?;
    let kind = match a.kind {
        KindArg::Kl => DivergenceKind::Kl,
        KindArg::Renyi => DivergenceKind::Renyi,
        KindArg::Power => DivergenceKind::Power,
        KindArg::Chi2 => DivergenceKind::ChiSquare,
    };
    let v = divergence(&p, &q, kind, a.order)?;
    emit(&v, a.output.out.as_deref())?;
    Ok(Outcome::Ok)
}

fn run_info(a: &InfoArgs) -> Result<Outcome> {
    let joint = match (&a.joint, &a.model) {
        (Some(path), _) => JointDistribution::from_json(read_json(path)?)?,
        (None, Some(path)) => {
            let spec: ModelSpec = read_json(path)?;
            let data = spec.data.as_discrete().ok_or_else(|| {
                Error::NoExactEvaluator("model data must be discrete to enumerate the joint".into())
            })?;
            build_joint(data, spec.n, &spec.kernel, DEFAULT_W_ROUND_DIGITS, DEFAULT_ENUMERATION_CAP)?
        }
        (None, None) => unreachable!("clap enforces one source"),
    };
    let power = a.t.map(|t| power_information(&joint, t)).transpose()?;
    let value = json!({
        "mutual_information": mutual_information(&joint),
        "chi_square_information": chi_square_information(&joint),
        "power_information": power,
        "max_density_ratio": max_density_ratio(&joint),
        "entropy_w": joint.entropy_w(),
        "w_atoms": joint.w_atoms().len(),
        "s_count": joint.s_count(),
    });
    emit(&value, a.output.out.as_deref())?;
    Ok(Outcome::Ok)
}

fn bound_report(a: &BoundsArgs) -> Result<BoundReport> {
    let mode = ValidityMode::from(a.mode);
    let (sigma, n) = (a.sigma, a.n);
    match a.theorem {
        TheoremArg::Thm2 => moment_bound_power(
            sigma,
            n,
            require(a.m, "m", "thm2")?,
            require(a.t, "t", "thm2")?,
            require(a.info, "info", "thm2")?,
            mode,
        ),
        TheoremArg::Cor1 => moment_bound_chi2(
            sigma,
            n,
            require(a.m, "m", "cor1")?,
            require(a.info, "info", "cor1")?,
            mode,
        ),
        TheoremArg::Cor2 => expected_gen_bound(
            sigma,
            n,
            require(a.q, "q", "cor2")?,
            require(a.info, "info", "cor2")?,
            mode,
        ),
        TheoremArg::Eq9 => moment_bound_ratio(
            sigma,
            n,
            require(a.m, "m", "eq9")?,
            require(a.r, "r", "eq9")?,
            mode,
        ),
        TheoremArg::Thm3 => second_moment_bound_mi(sigma, n, require(a.info, "info", "thm3")?),
        TheoremArg::Thm4 => highprob_bound_power(
            sigma,
            n,
            require(a.t, "t", "thm4")?,
            require(a.delta, "delta", "thm4")?,
            require(a.info, "info", "thm4")?,
            mode,
        ),
        TheoremArg::Eq12 => highprob_bound_renyi(
            sigma,
            n,
            require(a.alpha, "alpha", "eq12")?,
            require(a.delta, "delta", "eq12")?,
            require(a.info, "info", "eq12")?,
            mode,
        ),
        TheoremArg::Cor3 => highprob_bound_chi2(
            sigma,
            n,
            require(a.delta, "delta", "cor3")?,
            require(a.info, "info", "cor3")?,
            mode,
        ),
    }
}

fn run_bounds(a: &BoundsArgs) -> Result<Outcome> {
    emit(&bound_report(a)?, a.output.out.as_deref())?;
    Ok(Outcome::Ok)
}

fn run_gaussian(a: &GaussianArgs) -> Result<Outcome> {
    let config = ExperimentConfig::from_json_file(&a.config)?;
    let rows = run_gaussian_mean_experiment(&config)?;
    let csv_path = config.out_dir.join(CSV_FILE_NAME);
    emit_csv(&rows, &csv_path)?;
    let plots = emit_svg_plots(
        &rows,
        &config.out_dir,
        PlotMeta {
            quant_bins: config.quant_bins,
            mc_replicates: config.mc_replicates,
        },
    )?;
    let violations = check_rows(&rows, 4.0);
    let cmp = compare_chi2_vs_mi(0.0)?;
    let value = json!({
        "csv": csv_path,
        "plots": plots,
        "quant_bins": config.quant_bins,
        "mc_replicates": config.mc_replicates,
        "chi2_vs_mi_crossover": cmp.crossover,
        "chi2_vs_mi_stated_threshold": cmp.stated_threshold,
        "chi2_vs_mi_margin_at_stated_threshold": cmp.margin_at_stated_threshold,
        "violations": violations,
        "rows": rows,
    });
    emit(&value, a.output.out.as_deref())?;
    Ok(if violations.is_empty() {
        Outcome::Ok
    } else {
        Outcome::VerificationFailed
    })
}

fn run_verify(a: &VerifyArgs) -> Result<Outcome> {
    let options: VerifyOptions = match &a.config {
        Some(path) => read_json(path)?,
        None => VerifyOptions::default(),
    };
    let report = run_verification_suite(&options)?;
    emit(&report, a.output.out.as_deref())?;
    if !report.passed {
        for v in &report.violations {
            eprintln!(
                "violation: {} [{}] {}: {} > {}",
                v.check, v.model, v.parameters, v.lhs, v.rhs
            );
        }
        return Ok(Outcome::VerificationFailed);
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Divergence(a) => run_divergence(a),
        Command::Info(a) => run_info(a),
        Command::Bounds(a) => run_bounds(a),
        Command::Experiment(ExperimentCommand::GaussianMean(a)) => run_gaussian(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
