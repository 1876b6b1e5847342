use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use equitopo_core::arrangement::{betti_report, complement_betti, k_equal_arrangement, v1_arrangement};
use equitopo_core::cover_check::cover_check;
use equitopo_core::scalar::ScalarKind;
use equitopo_core::selftest::{selftest, Injection, SelftestOptions};
use equitopo_core::solver::{knaster_scan_1d, run_starts, LocalMethod, Scenario, SolverResult, Target};
use equitopo_core::{Error, Result};

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "equitopo", version, about = "Covers, arrangement homology and coincidence search for finite group actions")]
struct Cli {
    /// Print only the JSON report; no logging on stderr.
    #[arg(long, global = true)]
    json_only: bool,
    /// Add wall-clock timings to the report (makes it non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduced F_p Betti numbers of an arrangement complement.
    Homology(HomologyArgs),
    /// Sample the cover of W(q,k) by the pieces V_m and check it exactly.
    CoverCheck(CoverArgs),
    /// Search a sphere for a coincidence point.
    Coincide(SolveArgs),
    /// Search rotations for a Knaster-type configuration.
    Knaster(SolveArgs),
    /// Run the full acceptance matrix.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    KEqual,
    V1,
}

#[derive(Args)]
struct HomologyArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    q: usize,
    #[arg(long)]
    k: usize,
    /// Dimension of the target space, v1 family only.
    #[arg(long)]
    m: Option<usize>,
    /// Primes for the coefficients, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    p: Vec<u32>,
    /// Fail (exit 1) when the claimed vanishing band does not hold.
    #[arg(long)]
    assert_connectivity: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalarArg {
    Rational,
    Float,
}

#[derive(Args)]
struct CoverArgs {
    #[arg(long)]
    q: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "rational")]
    scalar: ScalarArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Simplex,
    Gradient,
}

#[derive(Args)]
struct SolveArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    starts: Option<usize>,
    /// Residual accepted as a solution.
    #[arg(long)]
    eps_solve: Option<f64>,
    /// Tolerance for re-verifying the returned witness.
    #[arg(long)]
    verify_tol: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Use the multi-start search even where the circle scan applies.
    #[arg(long)]
    multistart: bool,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    cover_samples: usize,
    #[arg(long, default_value_t = 10_000)]
    exact_points: usize,
    #[arg(long, value_enum, hide = true)]
    inject: Option<InjectArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InjectArg {
    CorruptGroupTable,
    ZeroTolerance,
}

struct Outcome {
    report: Value,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.json_only { "off" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();

    let name = match &cli.command {
        Command::Homology(_) => "homology",
        Command::CoverCheck(_) => "cover-check",
        Command::Coincide(_) => "coincide",
        Command::Knaster(_) => "knaster",
        Command::Selftest(_) => "selftest",
    };
    let start = Instant::now();
    let result = match &cli.command {
        Command::Homology(a) => homology(a),
        Command::CoverCheck(a) => cover(a),
        Command::Coincide(a) => solve(a, false),
        Command::Knaster(a) => solve(a, true),
        Command::Selftest(a) => run_selftest(a, cli.timing),
    };
    let (mut report, code) = match result {
        Ok(o) => {
            let code = if o.pass { 0 } else { EXIT_FAIL };
            (o.report, code)
        }
        Err(e) => {
            log::error!("{e}");
            let code = if e.is_input_error() { EXIT_INPUT } else { EXIT_FAIL };
            (json!({"subcommand": name, "error": e.to_string(), "pass": false}), code)
        }
    };
    if cli.timing {
        report["wall_time_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
    }
    println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    ExitCode::from(code)
}

fn homology(a: &HomologyArgs) -> Result<Outcome> {
    let arrangement = match a.family {
        Family::KEqual => {
            if a.m.is_some() {
                return Err(Error::InvalidParameter("--m only applies to the v1 family".into()));
            }
            k_equal_arrangement(a.q, a.k)?
        }
        Family::V1 => {
            let m = a.m.ok_or_else(|| Error::InvalidParameter("the v1 family needs --m".into()))?;
            v1_arrangement(m, a.q, a.k)?
        }
    };
    let mut reports = Vec::new();
    let mut pass = true;
    for &p in &a.p {
        let r = if a.assert_connectivity {
            complement_betti(&arrangement, p)?
        } else {
            betti_report(&arrangement, p)?
        };
        let cross_checks_ok = r.euler_consistent && r.cell_model_betti.as_ref().is_none_or(|c| *c == r.betti);
        pass &= if a.assert_connectivity { r.pass } else { cross_checks_ok };
        log::info!("p = {p}: betti {:?}, {}", r.betti, r.connectivity);
        reports.push(r);
    }
    Ok(Outcome {
        report: json!({
            "subcommand": "homology",
            "seed": 0,
            "parameters": {"family": family_name(a.family), "q": a.q, "k": a.k, "m": a.m, "p": a.p,
                           "assert_connectivity": a.assert_connectivity},
            "reports": reports,
            "pass": pass,
        }),
        pass,
    })
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::KEqual => "k-equal",
        Family::V1 => "v1",
    }
}

fn cover(a: &CoverArgs) -> Result<Outcome> {
    let scalar = match a.scalar {
        ScalarArg::Rational => ScalarKind::Rational,
        ScalarArg::Float => ScalarKind::Float,
    };
    let r = cover_check(a.q, a.k, a.samples, a.seed, scalar)?;
    log::info!("{} samples, {} classified, {} failures", r.samples, r.classified, r.failure_count);
    let pass = r.pass;
    let mut report = serde_json::to_value(&r).expect("report serializes");
    report["subcommand"] = json!("cover-check");
    Ok(Outcome { report, pass })
}

fn load_scenario(a: &SolveArgs) -> Result<Scenario> {
    let src = std::fs::read_to_string(&a.scenario)
        .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", a.scenario.display())))?;
    let mut s = Scenario::from_json(&src)?;
    let o = &mut s.options;
    if let Some(seed) = a.seed {
        o.seed = seed;
    }
    if let Some(starts) = a.starts {
        if starts == 0 {
            return Err(Error::InvalidParameter("--starts must be positive".into()));
        }
        o.starts = starts;
    }
    if let Some(eps) = a.eps_solve {
        o.eps_solve = eps;
    }
    if let Some(tol) = a.verify_tol {
        o.verify_tol = tol;
    }
    if let Some(m) = a.method {
        o.method = match m {
            MethodArg::Simplex => LocalMethod::Simplex,
            MethodArg::Gradient => LocalMethod::Gradient,
        };
    }
    Ok(s)
}

fn solve(a: &SolveArgs, knaster: bool) -> Result<Outcome> {
    let s = load_scenario(a)?;
    let name = if knaster { "knaster" } else { "coincide" };
    if knaster != (s.target == Target::Knaster) {
        return Err(Error::Scenario(format!(
            "{name} does not handle the {:?} target",
            s.target
        )));
    }
    let use_scan = knaster && !a.multistart && s.q() == 3 && s.action.dim() == 2;
    let result: SolverResult = if use_scan {
        match knaster_scan_1d(&s) {
            Ok(r) => r,
            Err(Error::BudgetExhausted { best_residual, starts }) => {
                log::warn!("scan found {starts} roots, none satisfies the max condition (best {best_residual:e})");
                return Err(Error::BudgetExhausted { best_residual, starts });
            }
            Err(e) => return Err(e),
        }
    } else {
        run_starts(&s)?.best
    };
    let verified = result.reverify(&s).is_ok();
    if !result.success {
        log::warn!(
            "no start reached {:e}; best residual {:e}, existence {}",
            s.options.eps_solve,
            result.residual,
            result.existence.describe()
        );
    }
    let pass = result.success && verified;
    Ok(Outcome {
        report: json!({
            "subcommand": name,
            "seed": s.options.seed,
            "parameters": {
                "scenario": a.scenario.display().to_string(),
                "target": s.target,
                "q": s.q(),
                "k": s.k,
                "m": s.m(),
                "starts": s.options.starts,
                "eps_solve": s.options.eps_solve,
                "verify_tol": s.options.verify_tol,
                "method": if use_scan { "scan" } else { method_name(s.options.method) },
            },
            "existence": result.existence.describe(),
            "verified": verified,
            "result": result,
            "pass": pass,
        }),
        pass,
    })
}

fn method_name(m: LocalMethod) -> &'static str {
    match m {
        LocalMethod::Simplex => "simplex",
        LocalMethod::Gradient => "gradient",
    }
}

fn run_selftest(a: &SelftestArgs, timing: bool) -> Result<Outcome> {
    let opts = SelftestOptions {
        seed: a.seed,
        cover_samples: a.cover_samples,
        exact_points: a.exact_points,
        inject: a.inject.map(|i| match i {
            InjectArg::CorruptGroupTable => Injection::CorruptGroupTable,
            InjectArg::ZeroTolerance => Injection::ZeroTolerance,
        }),
        timing,
    };
    let r = selftest(&opts);
    if let Some(row) = r.first_failure() {
        log::error!("first failure: {} ({})", row.id, row.anchor);
    }
    let pass = r.pass;
    Ok(Outcome {
        report: serde_json::to_value(&r).expect("report serializes"),
        pass,
    })
}
