//! Command-line front end: every library module as a subcommand with JSON
//! I/O, a single seed controlling all randomness, and deterministic output.
//!
//! Exit codes: 0 success, 1 usage error, 2 input validation failure,
//! 3 mathematical-property violation (a certified channel breaking a
//! theorem-level invariant).

use std::collections::BTreeMap;
use std::io::Read as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qds_core::channels::{self, Channel};
use qds_core::entropy;
use qds_core::error::QdsError;
use qds_core::majorization;
use qds_core::matcore::{ComplexMatrix, DensityMatrix};
use qds_core::norms::{self, AscentOptions};
use qds_core::perturbation::{self, PerturbationFamily};
use qds_core::rng;
use qds_core::truncation;
use qds_core::Tolerances;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_PROPERTY: u8 = 3;

#[derive(Parser)]
#[command(name = "qds", version, about = "Quantum doubly stochastic map toolkit")]
struct Cli {
    /// Seed for all randomness (falls back to QDS_SEED, then 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol_overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the QDS axioms of a channel.
    Certify(CertifyArgs),
    /// Induced p→p norm of a channel (optionally restricted to traceless inputs).
    Norm(NormArgs),
    /// Interpolation sweep of norm bounds over a p-grid.
    Sweep(SweepArgs),
    /// Majorization certificate for a pair of density matrices.
    Majorize(MajorizeArgs),
    /// Birkhoff decomposition of a doubly stochastic matrix.
    Birkhoff(BirkhoffArgs),
    /// Entropy monotonicity report for a channel and state.
    Entropy(EntropyArgs),
    /// Perturbation sweep over a family of near-QDS maps.
    Perturb(PerturbArgs),
    /// Finite-rank tail-norm scan of a zoo example.
    Tailscan(TailscanArgs),
    /// Emit a zoo channel as JSON.
    Zoo(ZooArgs),
    /// Run the built-in property suite.
    Selftest,
}

#[derive(Args)]
struct CertifyArgs {
    /// Channel JSON path ("-" for stdin).
    #[arg(long)]
    channel: String,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long)]
    channel: String,
    #[arg(long, default_value = "2", value_parser = parse_p)]
    p: f64,
    /// Restrict to the traceless subspace.
    #[arg(long)]
    traceless: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    channel: String,
    /// Comma-separated exponents ("inf" allowed).
    #[arg(long, default_value = "1,1.5,2,3,inf")]
    p_grid: String,
}

#[derive(Args)]
struct MajorizeArgs {
    #[arg(long)]
    rho: String,
    #[arg(long)]
    sigma: String,
    /// Also build the realizing channel when the relation holds.
    #[arg(long)]
    realize: bool,
}

#[derive(Args)]
struct BirkhoffArgs {
    /// Doubly stochastic matrix JSON `{"dim":n,"rows":[[...]]}` ("-" for stdin).
    #[arg(long)]
    matrix: String,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long)]
    channel: String,
    #[arg(long)]
    rho: String,
    /// Report entropies in bits instead of nats.
    #[arg(long)]
    bits: bool,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    phi: String,
    #[arg(long, value_parser = ["additive", "mixture"])]
    family: String,
    /// Comma-separated epsilon grid.
    #[arg(long, default_value = "1e-1,1e-2,1e-3,1e-4")]
    eps_grid: String,
    #[arg(long, default_value = "2", value_parser = parse_p)]
    p: f64,
    /// Perturbation direction for the additive family (default `E_00`).
    #[arg(long)]
    a: Option<String>,
    /// Unitary for the mixture family (default seeded random).
    #[arg(long)]
    u: Option<String>,
}

#[derive(Args)]
struct TailscanArgs {
    #[arg(long)]
    example: String,
    #[arg(long, default_value_t = truncation::DEFAULT_AMBIENT_DIM, value_name = "N")]
    n: usize,
    #[arg(long, default_value = "2", value_parser = parse_p)]
    p: f64,
    /// Comma-separated strictly increasing ranks.
    #[arg(long, default_value = "4,8,16,32")]
    ranks: String,
    /// Emit `rank,tail` CSV rows instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ZooArgs {
    /// identity | depolarizing | pinching | shift_average | damped_pinching |
    /// random_mixed_unitary
    name: String,
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Depolarizing parameter.
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    /// Unitary count for random_mixed_unitary.
    #[arg(long, default_value_t = 3)]
    count: usize,
}

fn parse_p(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "infinity" | "oo" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|e| e.to_string()),
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>, QdsError> {
    s.split(',')
        .map(|t| {
            parse_p(t.trim()).map_err(|e| QdsError::BadParameter(format!("bad grid entry {t:?}: {e}")))
        })
        .collect()
}

fn parse_ranks(s: &str) -> Result<Vec<usize>, QdsError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| QdsError::BadParameter(format!("bad rank {t:?}: {e}")))
        })
        .collect()
}

/// Effective run configuration echoed in every report.
#[derive(Serialize)]
struct RunConfig {
    seed: u64,
    tolerance_overrides: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    tool_version: &'static str,
    config: RunConfig,
    report: T,
}

struct Ctx {
    seed: u64,
    tol: Tolerances,
    overrides: BTreeMap<String, f64>,
}

impl Ctx {
    fn emit<T: Serialize>(&self, report: T) -> Result<(), QdsError> {
        let wrapped = Report {
            tool_version: qds_core::TOOL_VERSION,
            config: RunConfig {
                seed: self.seed,
                tolerance_overrides: self.overrides.clone(),
            },
            report,
        };
        println!("{}", serde_json::to_string_pretty(&wrapped)?);
        Ok(())
    }

    fn ascent_opts(&self) -> AscentOptions {
        AscentOptions {
            seed: self.seed,
            ..AscentOptions::default()
        }
    }
}

fn read_input(path: &str) -> Result<String, QdsError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| QdsError::InvalidMatrix(format!("stdin read failed: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| QdsError::InvalidMatrix(format!("cannot read {path}: {e}")))
    }
}

fn load_channel(path: &str) -> Result<Channel, QdsError> {
    Ok(serde_json::from_str(&read_input(path)?)?)
}

fn load_matrix(path: &str) -> Result<ComplexMatrix, QdsError> {
    Ok(serde_json::from_str(&read_input(path)?)?)
}

fn load_density(path: &str, tol: &Tolerances) -> Result<DensityMatrix, QdsError> {
    DensityMatrix::from_matrix(load_matrix(path)?, tol)
}

fn run(cli: Cli) -> Result<u8, QdsError> {
    let seed = cli
        .seed
        .or_else(|| {
            std::env::var("QDS_SEED")
                .ok()
                .and_then(|s| s.parse::<u64>().ok())
        })
        .unwrap_or(0);
    let mut tol = Tolerances::default();
    let mut overrides = BTreeMap::new();
    for spec in &cli.tol_overrides {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| QdsError::BadParameter(format!("expected NAME=VALUE, got {spec:?}")))?;
        let value: f64 = value
            .parse()
            .map_err(|e| QdsError::BadParameter(format!("bad tolerance value {value:?}: {e}")))?;
        if !tol.set(name, value) {
            return Err(QdsError::BadParameter(format!("unknown tolerance {name:?}")));
        }
        overrides.insert(name.to_string(), value);
    }
    let ctx = Ctx {
        seed,
        tol,
        overrides,
    };

    match cli.command {
        Command::Certify(args) => {
            let channel = load_channel(&args.channel)?;
            let report = channel.certify(&ctx.tol);
            ctx.emit(report)?;
            Ok(0)
        }
        Command::Norm(args) => {
            let channel = load_channel(&args.channel)?;
            if args.traceless {
                let result =
                    norms::traceless_norm(&channel, args.p, &ctx.tol, &ctx.ascent_opts())?;
                ctx.emit(&result)?;
                Ok(0)
            } else {
                let result = norms::induced_norm(&channel, args.p, &ctx.tol, &ctx.ascent_opts())?;
                let qds = channel.certify(&ctx.tol).is_qds;
                let violated = qds && result.lower_bound > 1.0 + 1e-6;
                ctx.emit(&result)?;
                Ok(if violated { EXIT_PROPERTY } else { 0 })
            }
        }
        Command::Sweep(args) => {
            let channel = load_channel(&args.channel)?;
            let grid = parse_grid(&args.p_grid)?;
            let sweep =
                norms::interpolation_sweep(&channel, &grid, &ctx.tol, &ctx.ascent_opts())?;
            let violated = !sweep.violations.is_empty();
            ctx.emit(&sweep)?;
            Ok(if violated { EXIT_PROPERTY } else { 0 })
        }
        Command::Majorize(args) => {
            let rho = load_density(&args.rho, &ctx.tol)?;
            let sigma = load_density(&args.sigma, &ctx.tol)?;
            let cert = majorization::check_majorization(&rho, &sigma, &ctx.tol)?;
            if args.realize && cert.holds {
                let full = majorization::realize_channel(&rho, &sigma, &ctx.tol)?;
                ctx.emit(&full)?;
            } else {
                ctx.emit(&cert)?;
            }
            Ok(0)
        }
        Command::Birkhoff(args) => {
            let raw: serde_json::Value = serde_json::from_str(&read_input(&args.matrix)?)?;
            let rows: Vec<Vec<f64>> = serde_json::from_value(
                raw.get("rows")
                    .cloned()
                    .ok_or_else(|| QdsError::InvalidMatrix("missing \"rows\"".into()))?,
            )?;
            let d = majorization::DoublyStochasticMatrix::new(rows, &ctx.tol)?;
            let decomposition = majorization::birkhoff_decompose(&d, &ctx.tol)?;
            ctx.emit(&decomposition)?;
            Ok(0)
        }
        Command::Entropy(args) => {
            let channel = load_channel(&args.channel)?;
            let rho = load_density(&args.rho, &ctx.tol)?;
            let mut report = entropy::entropy_monotonicity_check(&channel, &rho, &ctx.tol)?;
            if args.bits {
                let scale = 1.0 / std::f64::consts::LN_2;
                report.s_in *= scale;
                report.s_out *= scale;
                report.delta *= scale;
                report.bound_log_d *= scale;
            }
            let violated = report.delta < -ctx.tol.mono_tol;
            ctx.emit(&report)?;
            Ok(if violated { EXIT_PROPERTY } else { 0 })
        }
        Command::Perturb(args) => {
            let phi = load_channel(&args.phi)?;
            let family = match args.family.as_str() {
                "additive" => {
                    let a = match &args.a {
                        Some(path) => load_matrix(path)?,
                        None => {
                            let mut d = vec![0.0; phi.dim()];
                            d[0] = 1.0;
                            qds_core::matcore::HermitianMatrix::from_diagonal(&d).into_base()
                        }
                    };
                    PerturbationFamily::Additive { a }
                }
                _ => {
                    let u = match &args.u {
                        Some(path) => load_matrix(path)?,
                        None => {
                            let mut r = rng::rng_from_seed(seed);
                            rng::random_unitary(phi.dim(), &mut r)
                        }
                    };
                    PerturbationFamily::Mixture { u }
                }
            };
            let grid = parse_grid(&args.eps_grid)?;
            let reports = perturbation::perturbation_sweep(
                &phi,
                &family,
                &grid,
                args.p,
                &ctx.tol,
                &ctx.ascent_opts(),
            )?;
            ctx.emit(&reports)?;
            Ok(0)
        }
        Command::Tailscan(args) => {
            let ranks = parse_ranks(&args.ranks)?;
            let scan = truncation::scan(
                &args.example,
                args.p,
                &ranks,
                args.n,
                &ctx.tol,
                &ctx.ascent_opts(),
            )?;
            if args.csv {
                println!("rank,tail_norm");
                for pt in &scan.points {
                    println!("{},{:.16e}", pt.rank, pt.tail_norm);
                }
            } else {
                ctx.emit(&scan)?;
            }
            Ok(0)
        }
        Command::Zoo(args) => {
            let channel = match args.name.as_str() {
                "identity" => channels::identity_channel(args.n),
                "depolarizing" => channels::depolarizing(args.t, args.n)?,
                "pinching" => channels::pinching(args.n),
                "shift_average" => channels::shift_average(args.n)?,
                "damped_pinching" => channels::damped_pinching_geometric(args.n)?,
                "random_mixed_unitary" => {
                    let mut r = rng::rng_from_seed(seed);
                    channels::random_mixed_unitary(args.n, args.count, &mut r, &ctx.tol)
                }
                other => return Err(QdsError::UnknownExample(other.to_string())),
            };
            println!("{}", serde_json::to_string_pretty(&channel)?);
            Ok(0)
        }
        Command::Selftest => selftest(&ctx),
    }
}

/// Exercise every module once; print one PASS/FAIL line per check.
fn selftest(ctx: &Ctx) -> Result<u8, QdsError> {
    let tol = &ctx.tol;
    let opts = ctx.ascent_opts();
    let mut failures = 0usize;
    let mut total = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("{} {}", if ok { "PASS" } else { "FAIL" }, name);
        total += 1;
        if !ok {
            failures += 1;
        }
    };

    // matcore: hand-computed eigenvalues.
    let h = qds_core::matcore::HermitianMatrix::new(
        ComplexMatrix::from_real_rows(2, &[0.5, 0.3, 0.3, 0.5])?,
        tol,
    )?;
    let spec = qds_core::matcore::eig_hermitian(&h)?;
    check(
        "matcore.eig_2x2",
        (spec.eigenvalues[0] - 0.8).abs() < 1e-12 && (spec.eigenvalues[1] - 0.2).abs() < 1e-12,
    );

    // channels: certification of the zoo.
    let dep = channels::depolarizing(0.5, 3)?;
    check("channels.certify_depolarizing", dep.certify(tol).is_qds);
    let mut r = rng::rng_from_seed(ctx.seed);
    let rmu = channels::random_mixed_unitary(4, 3, &mut r, tol);
    check("channels.certify_random_mixed_unitary", rmu.certify(tol).is_qds);
    let kraus = dep.to_kraus(tol)?;
    check(
        "channels.kraus_round_trip",
        kraus.tp_residual() < 1e-9 && kraus.unital_residual() < 1e-9,
    );

    // norms: theorem values.
    let norm2 = norms::induced_norm(&rmu, 2.0, tol, &opts)?;
    check("norms.qds_p2_norm_is_one", (norm2.lower_bound - 1.0).abs() < 1e-8);
    let tl = norms::traceless_norm(&dep, 2.0, tol, &opts)?;
    check("norms.traceless_depolarizing", (tl.lower_bound - 0.5).abs() < 1e-10);
    let sweep = norms::interpolation_sweep(&rmu, &[1.0, 2.0, f64::INFINITY], tol, &opts)?;
    check("norms.interpolation_sweep", sweep.violations.is_empty());

    // majorization: round trip through a realizing channel.
    let sigma = rng::random_density(4, &mut r, tol);
    let rho_m = rmu.apply(sigma.matrix())?;
    let rho = DensityMatrix::from_matrix(
        qds_core::matcore::HermitianMatrix::symmetrized(&rho_m, tol)?.into_base(),
        tol,
    )?;
    let cert = majorization::realize_channel(&rho, &sigma, tol)?;
    let residual = majorization::realization_residual(&cert, &rho, &sigma)?;
    check("majorization.realize_round_trip", cert.holds && residual < 1e-8);
    let ds = cert.ds_matrix.as_ref().expect("holds");
    let dec = majorization::birkhoff_decompose(ds, tol)?;
    let recon = dec.reconstruct(ds.dim);
    let recon_err = recon
        .iter()
        .flatten()
        .zip(ds.rows.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check("majorization.birkhoff_reconstruction", recon_err < 1e-10);
    let convex = majorization::convex_function_test(&rho, &sigma, &[0.0, 0.1, 0.3], &[2.0, 3.0])?;
    check("majorization.convex_surrogates", convex.violations.is_empty());

    // entropy.
    let ent = entropy::entropy_monotonicity_check(&rmu, &rho, tol)?;
    check("entropy.monotone", ent.delta >= -tol.mono_tol);
    check(
        "entropy.unitarity_probe",
        !entropy::unitarity_probe(&rmu, tol)? || rmu.to_choi().eigenvalues(tol).len() == 1,
    );

    // perturbation.
    let (dt, du) = perturbation::deviation_metrics(&rmu)?;
    check("perturbation.qds_deviation_zero", dt < 1e-12 && du < 1e-12);
    let a = {
        let mut d = vec![0.0; 4];
        d[0] = 1.0;
        qds_core::matcore::HermitianMatrix::from_diagonal(&d).into_base()
    };
    let reports = perturbation::perturbation_sweep(
        &rmu,
        &PerturbationFamily::Additive { a },
        &[1e-1, 1e-2, 1e-3],
        2.0,
        tol,
        &opts,
    )?;
    let sampled = perturbation::sampled_delta_tr(
        &perturbation::additive_perturbation(&rmu, &{
            let mut d = vec![0.0; 4];
            d[0] = 1.0;
            qds_core::matcore::HermitianMatrix::from_diagonal(&d).into_base()
        }, 0.05)?,
        200,
        ctx.seed,
    )?;
    check(
        "perturbation.sweep_distance_decreases",
        reports.windows(2).all(|w| w[1].distance_p2 < w[0].distance_p2),
    );
    check("perturbation.sampled_oracle_bounded", sampled <= 0.05 + 1e-9);

    // truncation.
    let tail = truncation::tail_norm(
        &channels::damped_pinching_geometric(16)?,
        4,
        2.0,
        &opts,
    )?;
    check("truncation.damped_pinching_tail", (tail - 2f64.powi(-5)).abs() < 1e-10);
    let scan = truncation::scan("shift_average", 2.0, &[2, 4, 8], 16, tol, &opts)?;
    check(
        "truncation.shift_average_non_compact",
        scan.classification == "non-compact-like",
    );

    drop(check);
    println!("selftest: {total} checks, {failures} failed");
    Ok(if failures == 0 { 0 } else { EXIT_PROPERTY })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are success; everything else is usage.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
