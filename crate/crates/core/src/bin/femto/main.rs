use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tempfile::NamedTempFile;

use femto_hbt::estimation::{
    fit_with, initial_guess, synthesize_curve, FitModel, FitOptions, NoiseSpec,
};
use femto_hbt::fock::{
    charge_resolved_probs, correlation_scan, first_order_state, fully_entangled_configuration,
    minimal_two_source_configuration, single_source_configuration, ChargeProbabilities,
    HamiltonianConfig, Window,
};
use femto_hbt::linalg::{tensor_product, DensityOperator, StateVector};
use femto_hbt::optics::{
    coherence_double_source, coherence_single_tophat, normalized_four_path_intensity,
    vcz_numeric_coherence, write_columns, CoherenceCurve, DetectorPair, OpticalContext,
    SourceProfile,
};
use femto_hbt::witness::{
    bell_state, density_from_parts, detected_basis_expansion, werner_state, witness_verdict,
    BellKind, PairingScheme,
};
use femto_hbt::Error;

#[derive(Parser)]
#[command(
    name = "femto",
    version = concat!(env!("CARGO_PKG_VERSION"), " (rng: ChaCha8)"),
    about = "Intensity interferometry and pion-pair entanglement experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form and numerically integrated coherence curves side by side.
    Coherence(CoherenceArgs),
    /// Purity-comparison entanglement witness for a two-qubit state.
    Witness(WitnessArgs),
    /// Two-pair coincidence scan and charge-pattern probabilities.
    Fock(FockArgs),
    /// Recover source parameters from a `b,C` curve.
    Fit(FitArgs),
    /// Re-expand a product of two Bell pairs in the detected-pair basis.
    Expansion(ExpansionArgs),
    /// Write a synthetic, optionally noisy, `b,C` curve.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Tophat,
    Double,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Wavenumber in 1/m.
    #[arg(long)]
    k: f64,
    /// Angular width in rad.
    #[arg(long)]
    alpha: f64,
    /// Angular separation scale in rad (double model only).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    b_min: f64,
    #[arg(long)]
    b_max: f64,
    #[arg(long, default_value_t = 200)]
    n_baselines: usize,
}

#[derive(Args)]
struct CoherenceArgs {
    #[command(flatten)]
    curve: CurveArgs,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct WitnessArgs {
    /// psi-plus, product, werner:<p> or file.
    #[arg(long)]
    state: String,
    /// JSON with `dims`, `re`, `im` when the state is `file`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FockArgs {
    #[arg(long, default_value_t = 8)]
    n_modes: usize,
    #[arg(long, default_value_t = 0.1)]
    g: f64,
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    #[arg(long, default_value_t = 2)]
    sources: u8,
    /// Momentum grid spacing.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Distance between the two sources.
    #[arg(long, default_value_t = 1.0)]
    source_separation: f64,
    #[arg(long, default_value_t = 10.0)]
    b_max: f64,
    #[arg(long, default_value_t = 100)]
    n_baselines: usize,
    /// Scan CSV with columns `b,g4`.
    #[arg(long)]
    output: PathBuf,
    /// Summary JSON; printed to stdout when absent.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    k: f64,
    /// Seed the data were generated with; recorded in the result.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BellArg {
    PsiPlus,
    PsiMinus,
}

#[derive(Args)]
struct ExpansionArgs {
    #[arg(long, value_enum, default_value = "psi-plus")]
    input: BellArg,
    #[arg(long, default_value = "13,24")]
    pairing: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    curve: CurveArgs,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, fill: impl FnOnce(&mut File) -> Result<(), Failure>) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut().flush()?;
    tmp.persist(path).map_err(|e| Failure::from(e.error))?;
    Ok(())
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| input(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => write_atomic(p, |f| Ok(f.write_all(text.as_bytes())?)),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

fn baselines(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, Failure> {
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
        return Err(input(format!("need 0 <= b-min < b-max, got {lo} and {hi}")));
    }
    if n < 2 {
        return Err(input(format!("need at least 2 baselines, got {n}")));
    }
    Ok(linspace(lo, hi, n))
}

fn fit_model(model: ModelArg, k: f64) -> Result<FitModel, Failure> {
    let ctx = OpticalContext::new(k)?;
    Ok(match model {
        ModelArg::Tophat => FitModel::single_top_hat(ctx),
        ModelArg::Double => FitModel::double_source(ctx),
    })
}

fn curve_params(a: &CurveArgs) -> Result<Vec<f64>, Failure> {
    match (a.model, a.beta) {
        (ModelArg::Tophat, None) => Ok(vec![a.alpha]),
        (ModelArg::Tophat, Some(_)) => Err(input("--beta only applies to the double model")),
        (ModelArg::Double, Some(beta)) => Ok(vec![a.alpha, beta]),
        (ModelArg::Double, None) => Err(input("the double model needs --beta")),
    }
}

fn cmd_coherence(a: CoherenceArgs) -> CmdResult {
    let c = &a.curve;
    let params = curve_params(c)?;
    let ctx = OpticalContext::new(c.k)?;
    let bs = baselines(c.b_min, c.b_max, c.n_baselines)?;
    let (analytic, profile): (Vec<f64>, SourceProfile) = match c.model {
        ModelArg::Tophat => (
            bs.iter().map(|&b| coherence_single_tophat(&ctx, params[0], b)).collect(),
            SourceProfile::top_hat(params[0])?,
        ),
        // sinc²(kαb)cos²(kβb) is the transform of two top-hats of width 2α
        // whose centres are 2β apart
        ModelArg::Double => (
            bs.iter()
                .map(|&b| coherence_double_source(&ctx, params[0], params[1], b))
                .collect(),
            SourceProfile::double_top_hat(2.0 * params[1], 2.0 * params[0])?,
        ),
    };
    let numeric = vcz_numeric_coherence(&profile, &ctx, &bs)?;
    let max_dev = analytic
        .iter()
        .zip(numeric.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    write_atomic(&a.output, |f| {
        Ok(write_columns(f, &["b", "C_analytic", "C_numeric"], &[&bs, &analytic, numeric.values()])?)
    })?;
    println!("max |C_analytic - C_numeric| = {max_dev:.3e}");
    Ok(ExitCode::SUCCESS)
}

#[derive(serde::Deserialize)]
struct DensityFile {
    dims: Vec<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn witness_state(spec: &str, path: Option<&Path>) -> Result<DensityOperator, Failure> {
    match spec {
        "psi-plus" => Ok(bell_state(BellKind::PsiPlus).projector()?),
        "product" => Ok(StateVector::product_basis(vec![2, 2], &[0, 1])?.projector()?),
        "file" => {
            let path = path.ok_or_else(|| input("--state file needs --input"))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| input(format!("{}: {e}", path.display())))?;
            let d: DensityFile = serde_json::from_str(&text)
                .map_err(|e| input(format!("{}: {e}", path.display())))?;
            Ok(density_from_parts(d.dims, &d.re, &d.im)?)
        }
        other => match other.strip_prefix("werner:") {
            Some(p) => {
                let p: f64 = p.parse().map_err(|_| input(format!("bad Werner weight {p:?}")))?;
                Ok(werner_state(p)?)
            }
            None => Err(input(format!(
                "unknown state {other:?}; expected psi-plus, product, werner:<p> or file"
            ))),
        },
    }
}

fn cmd_witness(a: WitnessArgs) -> CmdResult {
    if a.input.is_some() && a.state != "file" {
        return Err(input("--input only applies to --state file"));
    }
    let rho = witness_state(&a.state, a.input.as_deref())?;
    emit_json(&witness_verdict(&rho)?, a.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct FockSummary {
    sources: u8,
    n_modes: usize,
    abs_c1: f64,
    perturbative: bool,
    probabilities: ChargeProbabilities,
    max_deviation_from_four_path: Option<f64>,
}

fn cmd_fock(a: FockArgs) -> CmdResult {
    let seps = baselines(0.0, a.b_max, a.n_baselines)?;
    let cfg = match a.sources {
        1 => single_source_configuration(a.n_modes, a.k)?,
        2 => minimal_two_source_configuration(a.n_modes, a.k, a.source_separation)?,
        n => return Err(input(format!("--sources must be 1 or 2, got {n}"))),
    };
    let first = first_order_state(&HamiltonianConfig::new(a.g, a.dt)?, &cfg.sources[0], &cfg.space)?;
    let scan = correlation_scan(&cfg.state, &cfg.space, &cfg.d1, &cfg.d2, 0.0, Window::FullPeriod, &seps)?;
    let deviation = match cfg.momenta {
        Some(k) => {
            let mut worst = 0.0_f64;
            for (b, g) in seps.iter().zip(&scan) {
                let x1 = cfg.d1.position;
                let optics = normalized_four_path_intensity(k, &DetectorPair::new(x1, x1 + b))?;
                worst = worst.max((g - optics).abs());
            }
            Some(worst)
        }
        None => None,
    };
    let ent = fully_entangled_configuration(a.n_modes, a.k)?;
    let probabilities = charge_resolved_probs(&ent.state, &ent.space, &ent.d1, &ent.d2, 0.0, Window::FullPeriod)?;
    write_atomic(&a.output, |f| Ok(write_columns(f, &["b", "g4"], &[&seps, &scan])?))?;
    if let Some(d) = deviation {
        eprintln!("max |g4 - four-path| = {d:.3e}");
    }
    let summary = FockSummary {
        sources: a.sources,
        n_modes: a.n_modes,
        abs_c1: first.c1.norm(),
        perturbative: first.perturbative,
        probabilities,
        max_deviation_from_four_path: deviation,
    };
    emit_json(&summary, a.json.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_fit(a: FitArgs) -> CmdResult {
    let model = fit_model(a.model, a.k)?;
    let file = File::open(&a.input).map_err(|e| input(format!("{}: {e}", a.input.display())))?;
    let curve = CoherenceCurve::read_csv(file)?;
    let guess = initial_guess(&curve, &model)?;
    if guess.fallback {
        eprintln!("warning: no zero found in the data; starting from the default guess");
    }
    let options = FitOptions {
        max_iter: a.max_iter,
        seed: a.seed,
    };
    let (result, _) = fit_with(&curve, &model, &guess.params, &options)?;
    emit_json(&result, a.output.as_deref())?;
    if result.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("fit did not converge after {} iterations", result.iterations);
        Ok(ExitCode::from(2))
    }
}

#[derive(Serialize)]
struct ExpansionTable {
    pairing: String,
    a00_b11: [f64; 2],
    a11_b00: [f64; 2],
    psi_plus_psi_plus: [f64; 2],
    psi_minus_psi_minus: [f64; 2],
    residual_norm: f64,
}

fn cmd_expansion(a: ExpansionArgs) -> CmdResult {
    let pairing: PairingScheme = a.pairing.parse()?;
    let kind = match a.input {
        BellArg::PsiPlus => BellKind::PsiPlus,
        BellArg::PsiMinus => BellKind::PsiMinus,
    };
    let bell = bell_state(kind);
    let e = detected_basis_expansion(&tensor_product(&bell, &bell)?, &pairing)?;
    let c = |z: femto_hbt::linalg::C64| [z.re, z.im];
    let table = ExpansionTable {
        pairing: a.pairing.clone(),
        a00_b11: c(e.a00_b11),
        a11_b00: c(e.a11_b00),
        psi_plus_psi_plus: c(e.psi_plus),
        psi_minus_psi_minus: c(e.psi_minus),
        residual_norm: e.residual_norm(),
    };
    emit_json(&table, a.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(a: SynthArgs) -> CmdResult {
    let c = &a.curve;
    let params = curve_params(c)?;
    let model = fit_model(c.model, c.k)?;
    let bs = baselines(c.b_min, c.b_max, c.n_baselines)?;
    let curve = synthesize_curve(&model, &params, &bs, &NoiseSpec::new(a.sigma, a.seed)?)?;
    write_atomic(&a.output, |f| Ok(curve.write_csv(f)?))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Coherence(a) => cmd_coherence(a),
        Command::Witness(a) => cmd_witness(a),
        Command::Fock(a) => cmd_fock(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Expansion(a) => cmd_expansion(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
