use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cos_core::cos::{cos_price, CosParameters, Payoff, Source};
use cos_core::tuning::{minimize_j, tune, HSource, Tuned, TuningRequest};
use cos_core::{centralized_cf, MarketContext, ModelSpec};
use cos_harness::config::Settings;
use cos_harness::experiments::{experiment_table, IDS};
use cos_harness::timing::Timing;
use cos_harness::{HarnessError, Result};

#[derive(Parser)]
#[command(name = "cosprice", version, about = "COS option pricing with automatic truncation range and series length")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price a contract; tuned from --eps or with explicit --L/--M/--N.
    Price(PriceArgs),
    /// Print the tuned (M, L, N) and where each came from.
    Tune(PriceArgs),
    /// Run a study and write its CSV.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// key = value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// bs, nig, vg, fmls, stable or cauchy.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    scale: Option<String>,
    #[arg(long = "S0", allow_hyphen_values = true)]
    s0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long = "T", allow_hyphen_values = true)]
    t: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PayoffKind {
    Put,
    Call,
    Digital,
}

#[derive(Clone, Copy, ValueEnum)]
enum HKind {
    Auto,
    Closed,
    Numeric,
}

#[derive(Args)]
struct PriceArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "K")]
    strike: Option<f64>,
    #[arg(long, value_enum, default_value = "put")]
    payoff: PayoffKind,
    /// Digital threshold on the centralized log-return.
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long = "M")]
    m: Option<f64>,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Moment order for the truncation range.
    #[arg(long = "n", default_value_t = 8)]
    moments: u32,
    /// Derivative order.
    #[arg(long, default_value_t = 40)]
    j: u32,
    #[arg(long, value_enum, default_value = "auto")]
    h: HKind,
    /// Use the order with the fewest terms instead of --j.
    #[arg(long)]
    minimize_j: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(IDS))]
    id: String,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest N is 2^max-log2 in the convergence sweeps.
    #[arg(long, default_value_t = 16)]
    max_log2: u32,
}

fn settings(args: &ModelArgs) -> Result<Settings> {
    let mut s = match &args.config {
        Some(path) => Settings::parse(&fs::read_to_string(path)?)?,
        None => Settings::default(),
    };
    let flags = [
        ("model", &args.model),
        ("sigma", &args.sigma),
        ("alpha", &args.alpha),
        ("beta", &args.beta),
        ("delta", &args.delta),
        ("nu", &args.nu),
        ("theta", &args.theta),
        ("scale", &args.scale),
        ("S0", &args.s0),
        ("r", &args.r),
        ("T", &args.t),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            s.set(key, v.clone());
        }
    }
    Ok(s)
}

struct Setup {
    model: ModelSpec,
    ctx: MarketContext,
    payoff: Payoff,
    bound: f64,
}

fn setup(args: &PriceArgs) -> Result<Setup> {
    let s = settings(&args.model)?;
    let model = s.model()?;
    let ctx = s.market()?;
    let need_strike = || args.strike.ok_or_else(|| HarnessError::Usage("--K is required for puts and calls".into()));
    let (payoff, bound) = match args.payoff {
        PayoffKind::Put => (Payoff::Put { strike: need_strike()? }, need_strike()?),
        PayoffKind::Call => (Payoff::Call { strike: need_strike()? }, need_strike()?),
        PayoffKind::Digital => {
            let threshold = args
                .threshold
                .ok_or_else(|| HarnessError::Usage("--threshold is required for digitals".into()))?;
            (Payoff::DigitalBelow { threshold }, 1.0)
        }
    };
    Ok(Setup {
        model,
        ctx,
        payoff,
        bound,
    })
}

fn tuned(args: &PriceArgs, s: &Setup) -> Result<Tuned> {
    let eps = args.eps.ok_or_else(|| HarnessError::Usage("give --eps, or all of --L, --M and --N".into()))?;
    let h = match args.h {
        HKind::Auto => HSource::Auto,
        HKind::Closed => HSource::ClosedForm,
        HKind::Numeric => HSource::Numeric,
    };
    let mut req = TuningRequest::new(s.model, s.ctx, s.bound, eps)?
        .with_moments(args.moments)?
        .with_order(args.j)
        .with_h_source(h);
    if args.minimize_j {
        req = req.with_order(minimize_j(&req)?.0);
    }
    Ok(tune(&req)?)
}

fn describe(source: Source) -> String {
    match source {
        Source::Manual => "manual".into(),
        Source::MomentBound { moments } => format!("moment bound, n = {moments}"),
        Source::TailMass => "tail mass".into(),
        Source::SameAsM => "same as M".into(),
        Source::AliasingBound => "aliasing bound".into(),
        Source::SeriesTruncation { order, h } => format!("series truncation, j = {order}, H from {h:?}"),
        Source::LowerClamp => "lower clamp 4L/pi".into(),
    }
}

fn print_params(out: &mut impl Write, p: &CosParameters) -> Result<()> {
    writeln!(out, "M = {:.6} ({})", p.m, describe(p.provenance.m))?;
    writeln!(out, "L = {:.6} ({})", p.l, describe(p.provenance.l))?;
    writeln!(out, "N = {} ({})", p.n, describe(p.provenance.n))?;
    Ok(())
}

fn price(args: &PriceArgs) -> Result<()> {
    let s = setup(args)?;
    let manual = (args.l, args.m, args.n);
    let (params, eps) = match manual {
        (Some(l), Some(m), Some(n)) => (CosParameters::new(m, l, n)?, None),
        (None, None, None) => {
            let t = tuned(args, &s)?;
            (t.params, Some(t.eps))
        }
        _ => return Err(HarnessError::Usage("--L, --M and --N go together".into())),
    };
    let cf = centralized_cf(&s.model, &s.ctx)?;
    let result = cos_price(&cf, &s.payoff, &s.ctx, &params)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "price = {:.13}", result.price)?;
    print_params(&mut out, &params)?;
    match eps {
        Some(e) => writeln!(out, "certified eps = {e:e}")?,
        None => writeln!(out, "certified eps = none (manual parameters)")?,
    }
    writeln!(out, "elapsed_ms = {:.4}", result.elapsed.as_secs_f64() * 1e3)?;
    Ok(())
}

fn tune_only(args: &PriceArgs) -> Result<()> {
    let s = setup(args)?;
    let t = tuned(args, &s)?;
    let mut out = std::io::stdout().lock();
    print_params(&mut out, &t.params)?;
    writeln!(out, "xi = {:.6}", t.xi)?;
    writeln!(out, "H_{} = {:.6e} ({:?})", t.h.order, t.h.value, t.h.source)?;
    writeln!(out, "N bound = {:.6e}", t.n_bound)?;
    Ok(())
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    let table = experiment_table(&args.id, args.max_log2, &Timing::default())?;
    match &args.out {
        Some(path) => table.write(fs::File::create(path)?)?,
        None => table.write(std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { cos_harness::exit::USAGE } else { cos_harness::exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let outcome = match &cli.command {
        Command::Price(a) => price(a),
        Command::Tune(a) => tune_only(a),
        Command::Experiment(a) => experiment(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
