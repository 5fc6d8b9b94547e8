//! `matrix-blowup`: predict, evaluate, integrate, compare, and sweep the
//! quadratic matrix ODE lab from the command line.
//!
//! Exit codes are a stable contract: 0 for success (including an "eternal"
//! verdict), 2 for a blowup verdict from `predict`, 1 for any error.

mod formats;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use matrix_blowup::closedform::{self, BlowupReport, Direction, Verdict};
use matrix_blowup::harness::{
    self, BPolicy, EnsembleKind, EnsembleTag, SweepConfig, SweepRun,
};
use matrix_blowup::integrator::{
    self, IntegrationOptions, NormChoice, RhsKind, TrajectoryStatus,
};
use matrix_blowup::Matrix;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "matrix-blowup",
    version,
    about = "Finite-time blowup lab for quadratic matrix ODEs dX/dt = B·X·X"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for randomized subcommands (sweeps).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output path (trajectory CSV, sweep file stem, matrix file, ...).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for reports printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Error tolerance for `compare` (relative, per time point).
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Forward,
    Backward,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Backward => Direction::Backward,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    /// dX/dt = X·X
    Xx,
    /// dX/dt = B·X·X
    Bxx,
    /// dX/dt = X·B·X
    Xbx,
    /// dX/dt = X·X·B
    Xxb,
    /// dX/dt = [B,X]·X
    Commutator,
    /// dX/dt = |X|·X
    Norm,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Operator2,
    Frobenius,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    Ginibre,
    Goe,
    Skew,
    CommutingPair,
    DiagonalPair,
}

impl From<EnsembleArg> for EnsembleTag {
    fn from(e: EnsembleArg) -> Self {
        match e {
            EnsembleArg::Ginibre => EnsembleTag::Ginibre,
            EnsembleArg::Goe => EnsembleTag::Goe,
            EnsembleArg::Skew => EnsembleTag::SkewSymmetric,
            EnsembleArg::CommutingPair => EnsembleTag::CommutingSymmetricPair,
            EnsembleArg::DiagonalPair => EnsembleTag::DiagonalPair,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BPolicyArg {
    Identity,
    SampledPair,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepMode {
    Probability,
    Agreement,
}

#[derive(Subcommand)]
enum Command {
    /// Predict blowup/eternity and the blowup time from the spectrum of AB.
    Predict(PredictArgs),
    /// Evaluate the closed-form solution X(t) = A·(Id − t·AB)⁻¹.
    Exact(ExactArgs),
    /// Integrate an ODE variant adaptively and report the outcome.
    Integrate(IntegrateArgs),
    /// Monte Carlo sweep over a random-matrix ensemble.
    Sweep(SweepArgs),
    /// Compare the integrator against the closed form at given times.
    Compare(CompareArgs),
}

#[derive(Args)]
struct PredictArgs {
    /// Matrix file for the initial condition A.
    a: PathBuf,
    /// Matrix file for B (identity when omitted).
    #[arg(long)]
    b: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
    direction: DirectionArg,
    /// Predict from the real spectrum of A·B even when the pair does not
    /// commute (the closed form then carries no guarantee).
    #[arg(long)]
    force_general: bool,
}

#[derive(Args)]
struct ExactArgs {
    a: PathBuf,
    #[arg(long)]
    b: Option<PathBuf>,
    /// Evaluation time.
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
}

#[derive(Args)]
struct IntegrateArgs {
    a: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    b: Option<PathBuf>,
    /// Signed integration horizon (negative integrates backward).
    #[arg(long, allow_hyphen_values = true)]
    horizon: f64,
    #[arg(long, default_value_t = 1e-9)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
    /// Norm for the |X|·X right-hand side.
    #[arg(long, value_enum, default_value_t = NormArg::Operator2)]
    norm_choice: NormArg,
    /// Add an operator2_norm column at snapshot rows of the CSV.
    #[arg(long)]
    operator2: bool,
    /// Write the final state as a matrix file.
    #[arg(long)]
    final_out: Option<PathBuf>,
    /// Write subsampled state snapshots into this directory.
    #[arg(long)]
    snapshots_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    ensemble: EnsembleArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    trials: u64,
    /// Entry standard deviation of the ensemble.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, value_enum, default_value_t = BPolicyArg::Identity)]
    b_policy: BPolicyArg,
    #[arg(long, value_enum, default_value_t = SweepMode::Probability)]
    mode: SweepMode,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    #[arg(long)]
    b: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = KindArg::Bxx)]
    kind: KindArg,
    /// Comma-separated evaluation times.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    times: Vec<f64>,
    #[arg(long, default_value_t = 1e-9)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit with its own code 2, which is reserved for
            // the blowup verdict; keep 0 for --help/--version, 1 otherwise
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Predict(args) => cmd_predict(&cli, args),
        Command::Exact(args) => cmd_exact(&cli, args),
        Command::Integrate(args) => cmd_integrate(&cli, args),
        Command::Sweep(args) => cmd_sweep(&cli, args),
        Command::Compare(args) => cmd_compare(&cli, args),
    }
}

fn load_pair(a: &Path, b: Option<&PathBuf>) -> Result<(Matrix, Matrix)> {
    let a = formats::read_matrix(a)?;
    let b = match b {
        Some(path) => {
            let b = formats::read_matrix(path)?;
            if b.n() != a.n() {
                bail!("A is {0}×{0} but B is {1}×{1}", a.n(), b.n());
            }
            b
        }
        None => Matrix::identity(a.n()),
    };
    Ok((a, b))
}

fn build_kind(kind: KindArg, b: Matrix, norm: NormArg) -> RhsKind {
    match kind {
        KindArg::Xx => RhsKind::SquareXX,
        KindArg::Bxx => RhsKind::BXX { b },
        KindArg::Xbx => RhsKind::XBX { b },
        KindArg::Xxb => RhsKind::XXB { b },
        KindArg::Commutator => RhsKind::CommutatorBXX { b },
        KindArg::Norm => RhsKind::NormXX {
            norm: match norm {
                NormArg::Operator2 => NormChoice::Operator2,
                NormArg::Frobenius => NormChoice::Frobenius,
            },
        },
    }
}

fn render_report(report: &BlowupReport, format: Format) -> String {
    match format {
        Format::Json => {
            serde_json::to_string_pretty(report).expect("report serializes") + "\n"
        }
        _ => {
            let mut text = String::new();
            match report.verdict {
                Verdict::Blowup => {
                    text.push_str(&format!(
                        "Blowup ({:?}, {:?}): T = {:.12}, eigenvalue = {:.12}\n",
                        report.direction,
                        report.method,
                        report.blowup_time.unwrap(),
                        report.eigenvalue.unwrap(),
                    ));
                    if let Some(w) = &report.witness {
                        let entries: Vec<String> =
                            w.iter().map(|x| format!("{x:.6}")).collect();
                        text.push_str(&format!("witness w = [{}]\n", entries.join(", ")));
                    }
                }
                Verdict::Eternal => {
                    text.push_str(&format!(
                        "Eternal ({:?}, {:?}): no finite-time blowup in this direction\n",
                        report.direction, report.method,
                    ));
                }
            }
            text
        }
    }
}

fn cmd_predict(cli: &Cli, args: &PredictArgs) -> Result<ExitCode> {
    let (a, b) = load_pair(&args.a, args.b.as_ref())?;
    let direction: Direction = args.direction.into();
    let report = if args.force_general {
        let product = a.matmul(&b)?;
        let report = closedform::predict_blowup_product(&product, direction)?;
        println!("note: --force-general, verdict is a candidate pole of (Id − t·AB)⁻¹");
        report
    } else {
        match closedform::predict_blowup(&a, &b, direction) {
            Ok(report) => report,
            Err(closedform::ClosedFormError::NotCommuting { residual, relative }) => {
                bail!(
                    "A and B do not commute: ‖AB−BA‖_F = {residual:.6e} \
                     (relative {relative:.6e}); rerun with --force-general \
                     to predict from the product spectrum anyway"
                );
            }
            Err(e) => return Err(e.into()),
        }
    };
    let rendered = render_report(&report, cli.format);
    print!("{rendered}");
    if let Some(out) = &cli.out {
        fs::write(out, &rendered)?;
    }
    Ok(match report.verdict {
        Verdict::Blowup => ExitCode::from(2),
        Verdict::Eternal => ExitCode::SUCCESS,
    })
}

fn cmd_exact(cli: &Cli, args: &ExactArgs) -> Result<ExitCode> {
    let (a, b) = load_pair(&args.a, args.b.as_ref())?;
    let x = match closedform::exact_solution(&a, &b, args.t) {
        Ok(x) => x,
        Err(closedform::ClosedFormError::SingularResolvent { t }) => {
            let nearest = nearest_pole(&a, &b, t);
            let hint = nearest
                .map(|p| format!(" (nearest predicted pole: T = {p:.12})"))
                .unwrap_or_default();
            bail!("resolvent is singular at t = {t}{hint}");
        }
        Err(e) => return Err(e.into()),
    };
    match cli.format {
        Format::Text => {
            for i in 0..x.n() {
                let row: Vec<String> = x.row(i).iter().map(|v| format!("{v:.12}")).collect();
                println!("{}", row.join("  "));
            }
        }
        _ => print!("{}", formats::format_matrix_json(&x)),
    }
    if let Some(out) = &cli.out {
        formats::write_matrix(out, &x)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn nearest_pole(a: &Matrix, b: &Matrix, t: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for direction in [Direction::Forward, Direction::Backward] {
        if let Ok(report) = closedform::predict_blowup(a, b, direction) {
            if let Some(time) = report.blowup_time {
                let signed = direction.sign() * time;
                if best.is_none_or(|cur| (signed - t).abs() < (cur - t).abs()) {
                    best = Some(signed);
                }
            }
        }
    }
    best
}

fn cmd_integrate(cli: &Cli, args: &IntegrateArgs) -> Result<ExitCode> {
    let (a, b) = load_pair(&args.a, args.b.as_ref())?;
    let kind = build_kind(args.kind, b, args.norm_choice);
    let opts = IntegrationOptions {
        rtol: args.rtol,
        atol: args.atol,
        keep_snapshots: args.operator2 || args.snapshots_dir.is_some(),
        ..IntegrationOptions::default()
    };
    let traj = integrator::integrate(&kind, &a, args.horizon, &opts)?;

    let summary = match traj.status {
        TrajectoryStatus::Completed => format!(
            "Completed: t = {:.6}, ‖X‖_F = {:.6e}",
            traj.final_time(),
            traj.frob_norms.last().unwrap()
        ),
        TrajectoryStatus::BlowupDetected { non_finite } => {
            let estimate = integrator::estimate_blowup_time(&traj)
                .map(|e| format!(", extrapolated blowup time t ≈ {:.6}", e.estimated_time))
                .unwrap_or_default();
            let flag = if non_finite { " (non-finite state)" } else { "" };
            format!(
                "BlowupDetected{flag}: last accepted t = {:.6}, ‖X‖_F = {:.3e}{estimate}",
                traj.final_time(),
                traj.frob_norms.last().unwrap()
            )
        }
        TrajectoryStatus::StepUnderflow => format!(
            "StepUnderflow: integration stalled at t = {:.6}",
            traj.final_time()
        ),
    };
    println!("{summary}");

    if let Some(out) = &cli.out {
        let file = fs::File::create(out)
            .with_context(|| format!("creating {}", out.display()))?;
        integrator::write_trajectory_csv(&traj, args.operator2, file)?;
    }
    if let Some(path) = &args.final_out {
        formats::write_matrix(path, &traj.final_state)?;
    }
    if let Some(dir) = &args.snapshots_dir {
        fs::create_dir_all(dir)?;
        for (i, snap) in traj.snapshots.as_deref().unwrap_or(&[]).iter().enumerate() {
            formats::write_matrix(&dir.join(format!("snapshot_{i:04}.json")), &snap.state)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<ExitCode> {
    let kind = EnsembleKind {
        tag: args.ensemble.into(),
        n: args.n,
        scale: args.scale,
    };
    let b_policy = match args.b_policy {
        BPolicyArg::Identity => BPolicy::Identity,
        BPolicyArg::SampledPair => BPolicy::SampledPair,
    };
    let (mode, run): (&'static str, SweepRun) = match args.mode {
        SweepMode::Probability => (
            "probability",
            harness::probability_sweep_run(&kind, b_policy, args.trials, cli.seed)?,
        ),
        SweepMode::Agreement => {
            if kind.tag != EnsembleTag::CommutingSymmetricPair {
                bail!("agreement sweeps sample the commuting-pair ensemble; pass --ensemble commuting-pair");
            }
            (
                "agreement",
                harness::agreement_sweep_run(args.trials, args.n, cli.seed)?,
            )
        }
    };
    let config = SweepConfig {
        mode,
        ensemble: kind.tag,
        n: kind.n,
        scale: kind.scale,
        b_policy: matches!(args.mode, SweepMode::Probability).then_some(b_policy),
        trials: args.trials,
        seed: cli.seed,
    };
    let json = harness::sweep_json(&config, &run.stats);

    println!(
        "trials = {}, blowup fraction forward = {:.6}, either direction = {:.6}",
        run.stats.trials, run.stats.blowup_fraction_forward, run.stats.blowup_fraction_either
    );
    if matches!(args.mode, SweepMode::Agreement) {
        println!(
            "prediction/integration agreements: {}/{}",
            run.stats.prediction_integration_agreements, run.stats.trials
        );
    }
    if run.stats.solver_failures > 0 {
        println!("eigensolver failures: {}", run.stats.solver_failures);
    }

    if let Some(out) = &cli.out {
        let json_path = out.with_extension("json");
        let csv_path = out.with_extension("csv");
        fs::write(&json_path, &json)
            .with_context(|| format!("writing {}", json_path.display()))?;
        let csv = fs::File::create(&csv_path)
            .with_context(|| format!("creating {}", csv_path.display()))?;
        harness::write_trials_csv(&run.records, csv)?;
        println!("wrote {} and {}", json_path.display(), csv_path.display());
    } else if cli.format == Format::Json {
        print!("{json}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(cli: &Cli, args: &CompareArgs) -> Result<ExitCode> {
    if args.times.is_empty() {
        bail!("pass at least one evaluation time via --times");
    }
    let (a, b) = load_pair(&args.a, args.b.as_ref())?;
    let kind = build_kind(args.kind, b.clone(), NormArg::Operator2);
    let opts = IntegrationOptions {
        rtol: args.rtol,
        atol: args.atol,
        ..IntegrationOptions::default()
    };
    let errors = integrator::compare_exact_numeric(&a, &b, &kind, &args.times, &opts)?;
    println!("{:>14}  {:>14}", "t", "rel_error");
    let mut worst = 0.0_f64;
    for (t, err) in args.times.iter().zip(errors.iter()) {
        println!("{t:>14.6}  {err:>14.6e}");
        worst = worst.max(*err);
    }
    if let Some(out) = &cli.out {
        let mut text = String::from("t,rel_error\n");
        for (t, err) in args.times.iter().zip(errors.iter()) {
            text.push_str(&format!("{t:.16e},{err:.16e}\n"));
        }
        fs::write(out, text)?;
    }
    if worst > cli.tol {
        eprintln!("worst error {worst:.6e} exceeds tolerance {:.6e}", cli.tol);
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}
