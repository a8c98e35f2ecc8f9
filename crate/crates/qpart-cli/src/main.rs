//! The `qpart` binary.
//!
//! Subcommands answer one question each over valuations given as JSON files
//! and print a report to stdout or `--out`. Exit codes are uniform: 0 on
//! success, 1 when a verified claim fails (the report then carries a
//! replayable witness), 2 for invalid input naming the offending field.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qpart_cli::io::{self, InputError};
use qpart_cli::mc;
use qpart_cli::verify;

use qpart_core::classify::{
    audit_closeness_to_subadditive, partition_level, q_partitioning_witness,
    ClassificationWitness, ClassifyError, Partition,
};
use qpart_core::concentration::{
    solve_t, solve_t_min, solve_tau, solve_xi, solve_z, verify_isoperimetric,
    ConcentrationError, IsoVariant, ItemMarginals, RootParams,
};
use qpart_core::costshare::{
    citycore_prices, coalition_violation, gamma_citycore_prices, greedy_prices, CostShareError,
};
use qpart_core::mph::{mph_witness, verify_mph, MphError};
use qpart_core::posted::{
    brute_opt_welfare, simulate_mechanism, verify_minimax_step, worst_order_welfare, PostedError,
};

#[derive(Parser)]
#[command(name = "qpart", version, about = "Exact toolkit for q-partitioning valuations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a valuation: exact partition level, or membership at one q.
    Classify(ClassifyArgs),
    /// Measure how close a valuation is to the level-q cover inequalities.
    Closeness(ClosenessArgs),
    /// Compute cost-sharing prices for a partition of the ground set.
    Prices(PricesArgs),
    /// Build and verify a bounded-hyperedge representation.
    Mph(MphArgs),
    /// Solve one of the concentration root equations.
    Roots(RootsArgs),
    /// Exhaustively check the isoperimetric inequality on a product space.
    Iso(IsoArgs),
    /// Sample a valuation and tabulate survival against the tail bounds.
    Tails(TailsArgs),
    /// Verify the min-max pricing step inequality at a buying cap.
    Minimax(MinimaxArgs),
    /// Run the sequential posted-price mechanism on a market.
    Simulate(SimulateArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Pretty JSON with sorted keys.
    Json,
    /// Line-oriented plain text.
    Text,
}

enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Outcome, InputError> {
    match command {
        Command::Classify(args) => run_classify(args),
        Command::Closeness(args) => run_closeness(args),
        Command::Prices(args) => run_prices(args),
        Command::Mph(args) => run_mph(args),
        Command::Roots(args) => run_roots(args),
        Command::Iso(args) => run_iso(args),
        Command::Tails(args) => run_tails(args),
        Command::Minimax(args) => run_minimax(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Verify(args) => run_verify(args),
    }
}

fn emit(out: Option<&Path>, format: Format, value: Value, text: String) -> Result<(), InputError> {
    let content = match format {
        Format::Json => serde_json::to_string_pretty(&value).expect("reports serialize"),
        Format::Text => text,
    };
    io::write_output(out, &content)
}

fn classify_field(e: &ClassifyError) -> &'static str {
    match e {
        ClassifyError::QOutOfRange { .. } => "q",
        ClassifyError::TooLarge { .. } => "in",
        _ => "blocks",
    }
}

fn costshare_field(e: &CostShareError) -> &'static str {
    match e {
        CostShareError::Classify(inner) => classify_field(inner),
        CostShareError::GammaOutOfRange => "gamma",
        CostShareError::TooFewCities { .. } => "blocks",
        CostShareError::NotSubadditive { .. } | CostShareError::TooLarge(_) => "in",
    }
}

fn concentration_field(e: &ConcentrationError) -> &'static str {
    match e {
        ConcentrationError::AlphaBelowFloor { .. }
        | ConcentrationError::AlphaNotPositive { .. } => "alpha",
        ConcentrationError::SRange { .. } => "s",
        ConcentrationError::QRange { .. } | ConcentrationError::TailParams { .. } => "q",
        ConcentrationError::XiDomain { .. } => "psi",
        ConcentrationError::DeltaRange { .. } => "delta",
        ConcentrationError::SpaceTooLarge { .. }
        | ConcentrationError::ProbOutOfRange { .. }
        | ConcentrationError::ProbSum { .. } => "space",
        _ => "sets",
    }
}

fn posted_field(e: &PostedError) -> &'static str {
    match e {
        PostedError::CapRange { .. } | PostedError::CapAboveStep { .. } => "p",
        PostedError::QNotPowerOfTwo { .. } => "q",
        _ => "in",
    }
}

fn witness_json(w: &ClassificationWitness) -> Value {
    json!({
        "subset": w.subset,
        "blocks": w.partition.blocks(),
        "cover": w.cover.weights.iter()
            .map(|(t, weight)| json!([t, weight.to_string()]))
            .collect::<Vec<_>>(),
        "lhs": w.lhs.to_string(),
        "rhs": w.rhs.to_string(),
    })
}

#[derive(Args)]
struct ClassifyArgs {
    /// Valuation file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Test membership at this level instead of reporting the exact level.
    #[arg(long, conflicts_with = "level")]
    q: Option<u32>,
    /// Report the exact partition level (the default).
    #[arg(long)]
    level: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn run_classify(args: ClassifyArgs) -> Result<Outcome, InputError> {
    let v = io::load_valuation(&args.input)?;
    let (value, text) = match args.q {
        Some(q) => {
            let witness = q_partitioning_witness(&v, q)
                .map_err(|e| InputError::new(classify_field(&e), e.to_string()))?;
            match witness {
                None => (
                    json!({ "m": v.m(), "q": q, "member": true }),
                    "true".to_string(),
                ),
                Some(w) => {
                    let text = format!(
                        "false (subset {} covered at {} below its value {})",
                        w.subset, w.lhs, w.rhs
                    );
                    (
                        json!({ "m": v.m(), "q": q, "member": false, "witness": witness_json(&w) }),
                        text,
                    )
                }
            }
        }
        None => {
            let level = partition_level(&v)
                .map_err(|e| InputError::new(classify_field(&e), e.to_string()))?;
            (json!({ "m": v.m(), "level": level }), level.to_string())
        }
    };
    emit(args.out.as_deref(), args.format, value, text)?;
    Ok(Outcome::Pass)
}

#[derive(Args)]
struct ClosenessArgs {
    /// Valuation file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Level whose cover inequalities are measured.
    #[arg(long)]
    q: u32,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn run_closeness(args: ClosenessArgs) -> Result<Outcome, InputError> {
    let v = io::load_valuation(&args.input)?;
    let audit = audit_closeness_to_subadditive(&v, args.q)
        .map_err(|e| InputError::new(classify_field(&e), e.to_string()))?;
    let value = json!({
        "q": args.q,
        "subadditive": audit.subadditive,
        "gamma": audit.gamma.to_string(),
        "bound": audit.bound.to_string(),
        "holds": audit.holds,
    });
    let text = format!(
        "gamma = {} (bound {}, subadditive = {}, holds = {})",
        audit.gamma, audit.bound, audit.subadditive, audit.holds
    );
    emit(args.out.as_deref(), args.format, value, text)?;
    Ok(if audit.subadditive && !audit.holds { Outcome::Fail } else { Outcome::Pass })
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PriceMode {
    /// Exact core prices: full cost recovery when the core is nonempty.
    Core,
    /// Core prices recovering a `gamma` fraction of the cost.
    Gamma,
    /// Greedy prices with the harmonic recovery guarantee.
    Greedy,
}

#[derive(Args)]
struct PricesArgs {
    /// Cost function file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// City blocks as comma-separated item bitmasks.
    #[arg(long, value_delimiter = ',', required = true)]
    blocks: Vec<u32>,
    /// Price construction.
    #[arg(long, value_enum, default_value_t = PriceMode::Core)]
    mode: PriceMode,
    /// Recovery fraction in (0, 1], required for --mode gamma.
    #[arg(long)]
    gamma: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn run_prices(args: PricesArgs) -> Result<Outcome, InputError> {
    let v = io::load_valuation(&args.input)?;
    let part = Partition::new(args.blocks.clone())
        .map_err(|e| InputError::new("blocks", e.to_string()))?;
    let pv = match args.mode {
        PriceMode::Core => citycore_prices(&v, &part),
        PriceMode::Gamma => {
            let text = args
                .gamma
                .as_deref()
                .ok_or_else(|| InputError::new("gamma", "required for --mode gamma"))?;
            let gamma = io::parse_rat(text, "gamma")?;
            gamma_citycore_prices(&v, &part, &gamma)
        }
        PriceMode::Greedy => greedy_prices(&v, &part),
    }
    .map_err(|e| InputError::new(costshare_field(&e), e.to_string()))?;
    let violation = coalition_violation(&v, &part, &pv.prices);
    let value = json!({
        "mode": match args.mode {
            PriceMode::Core => "core",
            PriceMode::Gamma => "gamma",
            PriceMode::Greedy => "greedy",
        },
        "blocks": part.blocks(),
        "prices": pv.prices.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "total": pv.total.to_string(),
        "feasible": pv.feasible,
        "violation": violation.as_ref().map(|(t, charged, cost)| json!({
            "coalition": t,
            "charged": charged.to_string(),
            "cost": cost.to_string(),
        })),
    });
    let prices_text = pv
        .prices
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    let text = format!(
        "prices = [{prices_text}], total = {}, feasible = {}, violation = {}",
        pv.total,
        pv.feasible,
        violation.is_some(),
    );
    emit(args.out.as_deref(), args.format, value, text)?;
    Ok(if violation.is_some() { Outcome::Fail } else { Outcome::Pass })
}

#[derive(Args)]
struct MphArgs {
    /// Valuation file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Partitioning level supplying the hyperedge size cap `ceil(m/q)`.
    #[arg(long)]
    q: u32,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn run_mph(args: MphArgs) -> Result<Outcome, InputError> {
    let v = io::load_valuation(&args.input)?;
    let rep = match mph_witness(&v, args.q) {
        Ok(rep) => rep,
        Err(MphError::NotQPartitioning { subset, covered, target }) => {
            let value = json!({
                "q": args.q,
                "represented": false,
                "witness": {
                    "reason": "not_q_partitioning",
                    "subset": subset,
                    "covered": covered.to_string(),
                    "target": target.to_string(),
                },
            });
            let text = format!(
                "no representation: subset {subset} covered at {covered} below its value {target}"
            );
            emit(args.out.as_deref(), args.format, value, text)?;
            return Ok(Outcome::Fail);
        }
        Err(MphError::Classify(e)) => {
            return Err(InputError::new(classify_field(&e), e.to_string()));
        }
        Err(e) => return Err(InputError::new("in", e.to_string())),
    };
    let clauses: Vec<Value> = rep
        .clauses()
        .iter()
        .map(|clause| {
            json!({
                "edges": clause.weights().iter()
                    .map(|(mask, w)| json!([mask, w.to_string()]))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    match verify_mph(&rep, &v) {
        Ok(()) => {
            let value = json!({
                "q": args.q,
                "k": rep.k(),
                "clauses": clauses,
                "verified": true,
            });
            let text = format!(
                "k = {}, clauses = {}, verified = true",
                rep.k(),
                rep.clauses().len()
            );
            emit(args.out.as_deref(), args.format, value, text)?;
            Ok(Outcome::Pass)
        }
        Err(cex) => {
            let value = json!({
                "q": args.q,
                "k": rep.k(),
                "clauses": clauses,
                "verified": false,
                "counterexample": {
                    "subset": cex.subset,
                    "represented": cex.represented.to_string(),
                    "expected": cex.expected.to_string(),
                },
            });
            let text = format!(
                "representation disagrees at subset {}: {} != {}",
                cex.subset, cex.represented, cex.expected
            );
            emit(args.out.as_deref(), args.format, value, text)?;
            Ok(Outcome::Fail)
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RootKind {
    /// Root of `t + alpha*q*t^(-1/(alpha*s)) = alpha*q + 1`.
    T,
    /// Smallest candidate root over the reduced equations.
    Tmin,
    /// The `s = 1` base, valid for every positive alpha.
    Z,
    /// Root of `e^(tau/2) + e^(-tau) = 2`.
    Tau,
    /// Root of `xi + psi*xi^(-(1+delta)/psi) = psi + 1`.
    Xi,
}

#[derive(Args)]
struct RootsArgs {
    /// Which root equation to solve.
    #[arg(long, value_enum, default_value_t = RootKind::T)]
    kind: RootKind,
    /// Shorthand for `--kind tmin`.
    #[arg(long)]
    tmin: bool,
    /// Exponent weight.
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of reference points.
    #[arg(long)]
    q: Option<u32>,
    /// Cover multiplicity.
    #[arg(long)]
    s: Option<u32>,
    /// Weight parameter of the xi equation.
    #[arg(long)]
    psi: Option<f64>,
    /// Exponent offset of the xi equation.
    #[arg(long)]
    delta: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn need<T: Copy>(opt: Option<T>, name: &'static str) -> Result<T, InputError> {
    opt.ok_or_else(|| InputError::new(name, "required for this root kind"))
}

fn t_residual(t: f64, alpha: f64, q: f64, s: f64) -> f64 {
    (t + alpha * q * t.powf(-1.0 / (alpha * s)) - alpha * q - 1.0).abs()
}

fn run_roots(args: RootsArgs) -> Result<Outcome, InputError> {
    let kind = if args.tmin { RootKind::Tmin } else { args.kind };
    let conc = |e: ConcentrationError| InputError::new(concentration_field(&e), e.to_string());
    let (name, value, residual) = match kind {
        RootKind::T => {
            let params = RootParams {
                alpha: need(args.alpha, "alpha")?,
                q: need(args.q, "q")?,
                s: need(args.s, "s")?,
            };
            let t = solve_t(&params).map_err(conc)?;
            let residual =
                t_residual(t, params.alpha, f64::from(params.q), f64::from(params.s));
            ("t", t, residual)
        }
        RootKind::Tmin => {
            let params = RootParams {
                alpha: need(args.alpha, "alpha")?,
                q: need(args.q, "q")?,
                s: need(args.s, "s")?,
            };
            let t = solve_t_min(&params).map_err(conc)?;
            let residual = (0..params.s)
                .map(|r| {
                    t_residual(
                        t,
                        params.alpha,
                        f64::from(params.q - r),
                        f64::from(params.s - r),
                    )
                })
                .fold(f64::INFINITY, f64::min);
            ("tmin", t, residual)
        }
        RootKind::Z => {
            let alpha = need(args.alpha, "alpha")?;
            let q = need(args.q, "q")?;
            let z = solve_z(q, alpha).map_err(conc)?;
            ("z", z, t_residual(z, alpha, f64::from(q), 1.0))
        }
        RootKind::Tau => {
            let tau = solve_tau();
            let residual = ((0.5 * tau).exp() + (-tau).exp() - 2.0).abs();
            ("tau", tau, residual)
        }
        RootKind::Xi => {
            let psi = need(args.psi, "psi")?;
            let delta = need(args.delta, "delta")?;
            let xi = solve_xi(psi, delta).map_err(conc)?;
            let residual = (xi + psi * xi.powf(-(1.0 + delta) / psi) - psi - 1.0).abs();
            ("xi", xi, residual)
        }
    };
    let report = json!({ "kind": name, "value": value, "residual": residual });
    emit(args.out.as_deref(), args.format, report, value.to_string())?;
    Ok(Outcome::Pass)
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IsoKind {
    /// Base `t(alpha, q, s)`; requires `alpha >= 1/s`.
    General,
    /// Base `t_min(alpha, q, s)`; any positive alpha.
    Tmin,
    /// Base `z(q, alpha)` with `s = 1`.
    S1,
    /// Base `e^(tau/q)` with `s = q - 1`; alpha is ignored.
    Tau,
}

#[derive(Args)]
struct IsoArgs {
    /// Product space file.
    #[arg(long, value_name = "FILE")]
    space: PathBuf,
    /// Reference sets file.
    #[arg(long, value_name = "FILE")]
    sets: PathBuf,
    /// Exponent weight.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Cover multiplicity.
    #[arg(long)]
    s: u32,
    /// Which base to verify with.
    #[arg(long, value_enum, default_value_t = IsoKind::General)]
    variant: IsoKind,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn run_iso(args: IsoArgs) -> Result<Outcome, InputError> {
    let space = io::load_space(&args.space)?;
    let sets = io::load_sets(&args.sets)?;
    let (variant, name) = match args.variant {
        IsoKind::General => (IsoVariant::General, "general"),
        IsoKind::Tmin => (IsoVariant::TMin, "tmin"),
        IsoKind::S1 => (IsoVariant::S1, "s1"),
        IsoKind::Tau => (IsoVariant::Tau, "tau"),
    };
    let report = verify_isoperimetric(&space, &sets, args.alpha, args.s, variant)
        .map_err(|e| InputError::new(concentration_field(&e), e.to_string()))?;
    let value = json!({
        "variant": name,
        "alpha": args.alpha,
        "s": args.s,
        "q": sets.len(),
        "base": report.base,
        "lhs": report.lhs,
        "rhs": report.rhs,
        "holds": report.holds,
    });
    let text = format!(
        "lhs = {}, rhs = {}, base = {}, holds = {}",
        report.lhs, report.rhs, report.base, report.holds
    );
    emit(args.out.as_deref(), args.format, value, text)?;
    Ok(if report.holds { Outcome::Pass } else { Outcome::Fail })
}

#[derive(Args)]
struct TailsArgs {
    /// Valuation file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Level the sampled valuation belongs to.
    #[arg(long)]
    q: u64,
    /// Tail exponent, defaulting to `floor(log2 q)`.
    #[arg(long)]
    r: Option<u32>,
    /// Cover multiplicity of the tail bound.
    #[arg(long, default_value_t = 1)]
    s: u32,
    /// Independent inclusion probability shared by every item.
    #[arg(long, default_value_t = 0.5)]
    pi: f64,
    /// Number of samples.
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    /// Sampling seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Worker threads; the output does not depend on this.
    #[arg(long, env = "QPART_THREADS", default_value_t = 1)]
    threads: u32,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run_tails(args: TailsArgs) -> Result<Outcome, InputError> {
    if args.q < 4 {
        return Err(InputError::new("q", format!("q = {} below 4, so no r >= 2 exists", args.q)));
    }
    let r = args.r.unwrap_or(63 - args.q.leading_zeros());
    if r >= 64 || (1u64 << r) > args.q {
        return Err(InputError::new("r", format!("r = {r} needs 2^r <= q = {}", args.q)));
    }
    if args.s < 1 || args.s >= r {
        return Err(InputError::new("s", format!("s = {} outside 1..{r}", args.s)));
    }
    if !(0.0..=1.0).contains(&args.pi) {
        return Err(InputError::new("pi", format!("probability {} outside [0, 1]", args.pi)));
    }
    if args.n == 0 {
        return Err(InputError::new("n", "need at least one sample"));
    }
    if args.threads == 0 {
        return Err(InputError::new("threads", "need at least one worker"));
    }
    let v = io::load_valuation(&args.input)?;
    let pi = ItemMarginals::uniform(v.m(), args.pi)
        .map_err(|e| InputError::new("pi", e.to_string()))?;
    let dist = mc::parallel_mc(&v, &pi, args.seed, args.n, args.threads)
        .map_err(|e| InputError::new("n", e.to_string()))?;
    let rows = mc::tail_curve(&dist, r, args.s, args.q)
        .map_err(|e| InputError::new(concentration_field(&e), e.to_string()))?;
    io::write_output(args.out.as_deref(), &mc::curve_csv(&rows))?;
    Ok(Outcome::Pass)
}

#[derive(Args)]
struct MinimaxArgs {
    /// Valuation file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Per-item buying cap, at most 1/16.
    #[arg(long)]
    p: String,
    /// Partitioning level; must be a power of two.
    #[arg(long)]
    q: u32,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn run_minimax(args: MinimaxArgs) -> Result<Outcome, InputError> {
    let v = io::load_valuation(&args.input)?;
    let p = io::parse_rat(&args.p, "p")?;
    let report = verify_minimax_step(&v, &p, args.q)
        .map_err(|e| InputError::new(posted_field(&e), e.to_string()))?;
    let value = json!({
        "p": p.to_string(),
        "q": args.q,
        "g_p": report.g_p.to_string(),
        "f_p": report.f_p.to_string(),
        "f_shrunk": report.f_shrunk.to_string(),
        "cap_shrunk": report.cap_shrunk.to_string(),
        "step_rhs": report.step_rhs.to_string(),
        "step_holds": report.step_holds,
        "telescope_steps": report.telescope_steps,
        "telescope_lhs": report.telescope_lhs.to_string(),
        "telescope_rhs": report.telescope_rhs.to_string(),
        "telescope_holds": report.telescope_holds,
    });
    let text = format!(
        "g(p) = {}, step rhs = {}, step holds = {}, telescope holds = {}",
        report.g_p, report.step_rhs, report.step_holds, report.telescope_holds
    );
    let ok = report.step_holds && report.telescope_holds;
    emit(args.out.as_deref(), args.format, value, text)?;
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

#[derive(Args)]
struct SimulateArgs {
    /// Market file.
    #[arg(long, value_name = "FILE")]
    market: PathBuf,
    /// Also minimize welfare over every arrival order.
    #[arg(long = "worst-order")]
    worst_order: bool,
    /// Also compute the welfare optimum over all allocations.
    #[arg(long)]
    opt: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn run_simulate(args: SimulateArgs) -> Result<Outcome, InputError> {
    let market = io::load_market(&args.market)?;
    let outcome = simulate_mechanism(&market);
    let mut value = json!({
        "allocation": outcome.allocation,
        "welfare": outcome.welfare.to_string(),
        "revenue": outcome.revenue.to_string(),
        "utilities": outcome.utilities.iter().map(|u| u.to_string()).collect::<Vec<_>>(),
        "unsold": outcome.unsold,
    });
    let mut text = format!(
        "welfare = {}, revenue = {}, unsold mask = {}",
        outcome.welfare, outcome.revenue, outcome.unsold
    );
    let fields = value.as_object_mut().expect("report is an object");
    if args.opt {
        let opt = brute_opt_welfare(market.buyers())
            .map_err(|e| InputError::new("market", e.to_string()))?;
        fields.insert("opt_bundles".into(), json!(opt.bundles));
        fields.insert("opt_welfare".into(), json!(opt.value.to_string()));
        text.push_str(&format!(", optimum = {}", opt.value));
    }
    if args.worst_order {
        let worst = worst_order_welfare(market.buyers(), market.prices())
            .map_err(|e| InputError::new("market", e.to_string()))?;
        fields.insert("worst_order".into(), json!(worst.order));
        fields.insert("worst_welfare".into(), json!(worst.welfare.to_string()));
        text.push_str(&format!(", worst-order welfare = {}", worst.welfare));
    }
    emit(args.out.as_deref(), args.format, value, text)?;
    Ok(Outcome::Pass)
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteKind {
    /// Closeness stays within `(q-1)/q` one level up the chain.
    Smoothness,
    /// Primal and dual cover LP solutions agree exactly.
    Duality,
    /// Greedy cost shares are feasible and recover the harmonic fraction.
    Greedy,
    /// Self-bounding certificates accept members and reject the threshold
    /// instance below `m/q`.
    Selfbounding,
    /// Exhaustive isoperimetric checks on random product spaces.
    Iso,
    /// Sampled survival stays under the tail bounds.
    Tails,
    /// Min-max price LP matches the vertex oracle and the step inequality.
    Minimax,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run.
    #[arg(long, value_enum)]
    suite: SuiteKind,
    /// Ground set size.
    #[arg(long)]
    m: Option<u32>,
    /// Partitioning level.
    #[arg(long)]
    q: Option<u32>,
    /// Sample count for the tails suite.
    #[arg(long)]
    n: Option<u64>,
    /// Seed for randomized suites.
    #[arg(long)]
    seed: Option<u64>,
    /// Trial count for randomized suites.
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads; the output does not depend on this.
    #[arg(long, env = "QPART_THREADS", default_value_t = 1)]
    threads: u32,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn run_verify(args: VerifyArgs) -> Result<Outcome, InputError> {
    if args.threads == 0 {
        return Err(InputError::new("threads", "need at least one worker"));
    }
    let seed = args.seed.unwrap_or(7);
    let report = match args.suite {
        SuiteKind::Smoothness => {
            verify::smoothness(args.m.unwrap_or(5), args.q.unwrap_or(4))?
        }
        SuiteKind::Duality => verify::duality(
            args.m.unwrap_or(5),
            args.q.unwrap_or(3),
            args.trials.unwrap_or(100),
            seed,
        )?,
        SuiteKind::Greedy => verify::greedy(
            args.m.unwrap_or(6),
            args.q.unwrap_or(4),
            args.trials.unwrap_or(60),
            seed,
        )?,
        SuiteKind::Selfbounding => {
            verify::selfbounding(args.m.unwrap_or(6), args.q.unwrap_or(3))?
        }
        SuiteKind::Iso => verify::iso(args.trials.unwrap_or(100), seed)?,
        SuiteKind::Tails => verify::tails(
            args.m.unwrap_or(8),
            args.q.unwrap_or(4),
            args.n.unwrap_or(20_000),
            seed,
            args.threads,
        )?,
        SuiteKind::Minimax => verify::minimax()?,
    };
    emit(args.out.as_deref(), args.format, report.to_json(), report.to_text())?;
    Ok(if report.passed() { Outcome::Pass } else { Outcome::Fail })
}
