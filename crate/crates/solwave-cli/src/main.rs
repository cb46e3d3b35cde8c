//! Command-line front end for the solwave pipeline.
//!
//! Subcommands: `reduce`, `solve`, `verify`, `corpus`. Exit codes:
//! 0 success, 2 parse error, 3 method not applicable, 4 verification
//! failure, 5 internal error.

use clap::{Args, Parser, Subcommand};
use solwave::builtin::DrpConfig;
use solwave::report::{
    build_env, build_report, run_solve, solve_to_report, EquationSource, SolveReport,
    SolveRequest,
};
use solwave::symbol::{parse_rational, rat_to_f64, Symbol, SymbolKind};
use solwave::verify::{
    default_pde_grid, verify_ode, verify_pde, write_profile_csv, GridSpec, DEFAULT_TOLERANCE,
};
use solwave::{
    integrate_once, parse_equation, parse_profile, specialize_constant_zero,
    traveling_wave_reduce, Error,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "solwave",
    about = "Solitary traveling-wave solutions of polynomial wave equations via the tanh/sech ansatz",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reduce a PDE to its traveling-wave ODE and integrate once
    Reduce(ReduceArgs),
    /// Run the full pipeline and report every solution branch as JSON
    Solve(SolveArgs),
    /// Check a claimed profile against an equation's residual
    Verify(VerifyArgs),
    /// Run the builtin corpus end to end and print one line per case
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct EquationArgs {
    /// Equation file in the input DSL
    equation: Option<PathBuf>,
    /// Builtin equation name (burgers | drp)
    #[arg(long)]
    builtin: Option<String>,
    /// Stencil width m for the drp builtin
    #[arg(long)]
    m: Option<u32>,
    /// Comma-separated stencil weights gamma_1..gamma_m (rationals)
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<String>,
    /// CFL coefficient sigma (rational)
    #[arg(long)]
    sigma: Option<String>,
    /// Viscosity mu (rational)
    #[arg(long)]
    mu: Option<String>,
    /// Mesh Reynolds number (rational)
    #[arg(long)]
    reh: Option<String>,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    eq: EquationArgs,
    /// Also print the form with the integration constant pinned to zero
    #[arg(long = "no-constant")]
    no_constant: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    eq: EquationArgs,
    /// Override the balanced ansatz order
    #[arg(long)]
    order: Option<u32>,
    /// Pin the integration constant to zero and report the lost families
    #[arg(long = "no-constant")]
    no_constant: bool,
    /// Residual tolerance for branch verification
    #[arg(long)]
    tol: Option<f64>,
    /// Verification samples per branch
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Write verified profiles as CSV, one file per branch
    #[arg(long = "emit-csv")]
    emit_csv: Option<PathBuf>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    eq: EquationArgs,
    /// Claimed profile expression in xi
    #[arg(long, conflicts_with = "from_json")]
    profile: Option<String>,
    /// File containing the claimed profile expression
    #[arg(long, conflicts_with = "profile")]
    profile_file: Option<PathBuf>,
    /// Re-verify a previous `solve --json` report and compare verdicts
    #[arg(long = "from-json")]
    from_json: Option<PathBuf>,
    /// Numeric bindings k=v for every free symbol (floats or rationals)
    #[arg(long, value_delimiter = ',')]
    params: Vec<String>,
    /// Residual tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Verification grid a:b:n
    #[arg(long)]
    grid: Option<String>,
    /// Also check the profile against the original PDE
    #[arg(long)]
    pde: bool,
    /// Write the sampled profile as CSV
    #[arg(long = "emit-csv")]
    emit_csv: Option<PathBuf>,
}

#[derive(Args)]
struct CorpusArgs {
    /// Also print the JSON report per case
    #[arg(long)]
    verbose: bool,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Syntax { .. } | Error::UndeclaredSymbol { .. } | Error::NonPolynomialInput(_) => 2,
        Error::AnsatzOrderUndetermined(_)
        | Error::NotExactlyIntegrable(_)
        | Error::NotIntegrated
        | Error::MixedScales(_)
        | Error::EmptySystem => 3,
        Error::ConstraintUnsatisfiable(_) | Error::NonFiniteResult | Error::UnboundSymbol(_) => 4,
        _ => 5,
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
    fn usage(message: impl Into<String>) -> Self {
        CliError::new(2, message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError { code: exit_code_for(&e), message: e.to_string() }
    }
}

fn rational_arg(s: &str) -> Result<solwave::symbol::Rational, CliError> {
    parse_rational(s).ok_or_else(|| CliError::usage(format!("bad rational `{s}`")))
}

fn drp_config_from(eq: &EquationArgs) -> Result<Option<DrpConfig>, CliError> {
    let touched = eq.m.is_some()
        || !eq.gamma.is_empty()
        || eq.sigma.is_some()
        || eq.mu.is_some()
        || eq.reh.is_some();
    if !touched {
        return Ok(None);
    }
    let mut config = DrpConfig::default();
    if let Some(m) = eq.m {
        config.m = m;
    }
    if !eq.gamma.is_empty() {
        config.gamma = eq
            .gamma
            .iter()
            .map(|g| rational_arg(g))
            .collect::<Result<Vec<_>, _>>()?;
        if eq.m.is_none() {
            config.m = config.gamma.len() as u32;
        }
    }
    if let Some(s) = &eq.sigma {
        config.sigma = rational_arg(s)?;
    }
    if let Some(s) = &eq.mu {
        config.mu = rational_arg(s)?;
    }
    if let Some(s) = &eq.reh {
        config.re_h = rational_arg(s)?;
    }
    config.validate()?;
    Ok(Some(config))
}

fn equation_source(eq: &EquationArgs) -> Result<EquationSource, CliError> {
    match (&eq.builtin, &eq.equation) {
        (Some(name), None) => Ok(EquationSource::Builtin {
            name: name.clone(),
            drp: drp_config_from(eq)?,
        }),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::new(2, format!("cannot read {}: {e}", path.display())))?;
            Ok(EquationSource::Text(text))
        }
        (None, None) => Err(CliError::usage("give an equation file or --builtin <name>")),
        (Some(_), Some(_)) => Err(CliError::usage("give either a file or --builtin, not both")),
    }
}

fn load_pde(source: &EquationSource) -> Result<solwave::parser::PdeEquation, CliError> {
    Ok(match source {
        EquationSource::Builtin { name, drp } => {
            solwave::builtin::builtin_equation(name, drp.as_ref())?
        }
        EquationSource::Text(text) => parse_equation(text)?,
    })
}

fn parse_param_overrides(params: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    let mut out = Vec::new();
    for p in params {
        let Some((k, v)) = p.split_once('=') else {
            return Err(CliError::usage(format!("bad --params entry `{p}`, expected k=v")));
        };
        let v = v.trim();
        let value = if let Ok(f) = v.parse::<f64>() {
            f
        } else {
            rat_to_f64(&rational_arg(v)?)
        };
        out.push((k.trim().to_string(), value));
    }
    Ok(out)
}

fn parse_grid(spec: &str) -> Result<GridSpec, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!("bad --grid `{spec}`, expected a:b:n")));
    }
    let a: f64 = parts[0].parse().map_err(|_| CliError::usage("bad grid start"))?;
    let b: f64 = parts[1].parse().map_err(|_| CliError::usage("bad grid end"))?;
    let n: usize = parts[2].parse().map_err(|_| CliError::usage("bad grid count"))?;
    if n < 2 || b <= a {
        return Err(CliError::usage("grid needs a < b and n >= 2"));
    }
    Ok(GridSpec::new(a, b, n))
}

fn cmd_reduce(args: &ReduceArgs) -> Result<(), CliError> {
    let source = equation_source(&args.eq)?;
    let pde = load_pde(&source)?;
    println!("equation:           {pde}");
    let v = solwave::reduce::wave_speed_symbol();
    let c = solwave::reduce::integration_constant_symbol();
    let ode = traveling_wave_reduce(&pde, &v);
    println!("traveling-wave ODE: {ode}   (xi = x - v*t)");
    let int = integrate_once(&ode, &c)?;
    println!("integrated once:    {int}   (constant C moved to the left-hand side)");
    if args.no_constant {
        let zeroed = specialize_constant_zero(&int)?;
        println!("with C = 0:         {zeroed}");
    }
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let source = equation_source(&args.eq)?;
    let req = SolveRequest {
        source,
        order_override: args.order,
        keep_constant: !args.no_constant,
        tolerance: args.tol.unwrap_or(DEFAULT_TOLERANCE),
        samples: args.samples.max(1),
        depth_limit: 12,
    };
    let art = run_solve(&req)?;
    let report = build_report(&req, &art);

    if let Some(prefix) = &args.emit_csv {
        for (i, ver) in art.verifications.iter().enumerate() {
            let Some(reports) = ver else { continue };
            let Some(first) = reports.first() else { continue };
            let path = branch_csv_path(prefix, i);
            let file = std::fs::File::create(&path)
                .map_err(|e| CliError::new(5, format!("cannot write {}: {e}", path.display())))?;
            write_profile_csv(first, file)
                .map_err(|e| CliError::new(5, format!("cannot write {}: {e}", path.display())))?;
        }
    }

    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::new(5, format!("serialization failed: {e}")))?;
    match &args.json {
        Some(path) => std::fs::write(path, json.as_bytes())
            .map_err(|e| CliError::new(5, format!("cannot write {}: {e}", path.display())))?,
        None => println!("{json}"),
    }

    if !report.all_verified {
        return Err(CliError::new(4, "verification failed for at least one branch"));
    }
    Ok(())
}

fn branch_csv_path(prefix: &Path, index: usize) -> PathBuf {
    let stem = prefix
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "profile".to_string());
    let name = match prefix.extension() {
        Some(ext) => format!("{stem}_branch{index}.{}", ext.to_string_lossy()),
        None => format!("{stem}_branch{index}.csv"),
    };
    prefix.with_file_name(name)
}

fn profile_symbols(pde: &solwave::parser::PdeEquation) -> Vec<Symbol> {
    let mut known: Vec<Symbol> = pde.parameters.clone();
    known.push(solwave::reduce::wave_speed_symbol());
    known.push(solwave::reduce::integration_constant_symbol());
    for name in ["U1", "U2", "V1", "V2", "C1", "V0"] {
        known.push(Symbol::new(name, SymbolKind::AnsatzUnknown));
    }
    known
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    if let Some(path) = &args.from_json {
        return verify_from_json(path);
    }
    let source = equation_source(&args.eq)?;
    let pde = load_pde(&source)?;
    let profile_text = match (&args.profile, &args.profile_file) {
        (Some(p), None) => p.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| CliError::new(2, format!("cannot read {}: {e}", path.display())))?,
        _ => return Err(CliError::usage("give --profile <expr> or --profile-file <path>")),
    };
    let known = profile_symbols(&pde);
    let (profile, used) = parse_profile(&profile_text, &known)?;

    let v = solwave::reduce::wave_speed_symbol();
    let c = solwave::reduce::integration_constant_symbol();
    let ode = traveling_wave_reduce(&pde, &v);
    let int = integrate_once(&ode, &c)?;

    let overrides = parse_param_overrides(&args.params)?;
    let mut extra: Vec<Symbol> = known.clone();
    extra.extend(used.iter().cloned());
    let env = build_env(&pde, &overrides, &extra);

    let tol = args.tol.unwrap_or(1e-6);
    let grid = match &args.grid {
        Some(g) => parse_grid(g)?,
        None => GridSpec::default(),
    };

    let report = verify_ode(&profile, &int, &env, &grid, tol)?;
    println!(
        "ODE residual:  max |r| = {:.6e} over xi in [{}, {}] ({} points)  -> {}",
        report.max_abs_residual,
        grid.start,
        grid.end,
        grid.points,
        if report.passed { "PASS" } else { "FAIL" }
    );

    let mut pde_failed = false;
    if args.pde {
        let (xg, tg) = default_pde_grid();
        let pde_report = verify_pde(&profile, &pde, &env, &int.xi, &v, &xg, &tg, tol)?;
        println!(
            "PDE residual:  max |r| = {:.6e} over the (x, t) grid  -> {}",
            pde_report.max_abs_residual,
            if pde_report.passed { "PASS" } else { "FAIL" }
        );
        pde_failed = !pde_report.passed;
    }

    if let Some(path) = &args.emit_csv {
        let file = std::fs::File::create(path)
            .map_err(|e| CliError::new(5, format!("cannot write {}: {e}", path.display())))?;
        write_profile_csv(&report, file)
            .map_err(|e| CliError::new(5, format!("cannot write {}: {e}", path.display())))?;
        println!("profile samples written to {}", path.display());
    }

    if !report.passed || pde_failed {
        return Err(CliError::new(4, "claimed profile fails residual verification"));
    }
    Ok(())
}

fn verify_from_json(path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(2, format!("cannot read {}: {e}", path.display())))?;
    let stored: SolveReport = serde_json::from_str(&text)
        .map_err(|e| CliError::new(2, format!("bad report JSON: {e}")))?;
    // reconstruct the equation and re-run the pipeline
    let mut src = String::new();
    for p in &stored.parameters {
        src.push_str(&format!("param {p};\n"));
    }
    src.push_str(&stored.equation);
    let req = SolveRequest {
        source: EquationSource::Text(src),
        order_override: Some(stored.ansatz_order),
        keep_constant: stored.integration_constant.is_some(),
        tolerance: stored
            .branches
            .iter()
            .find_map(|b| b.residual.as_ref().map(|r| r.tolerance))
            .unwrap_or(DEFAULT_TOLERANCE),
        samples: stored
            .branches
            .iter()
            .find_map(|b| b.residual.as_ref().map(|r| r.samples))
            .unwrap_or(20),
        depth_limit: 12,
    };
    let fresh = solve_to_report(&req)?;
    let verdicts = |r: &SolveReport| -> Vec<(String, Option<bool>)> {
        r.branches
            .iter()
            .map(|b| (b.class.clone(), b.residual.as_ref().map(|x| x.passed)))
            .collect()
    };
    let stored_verdicts = verdicts(&stored);
    let fresh_verdicts = verdicts(&fresh);
    if stored_verdicts == fresh_verdicts {
        println!("round trip ok: {} branch verdicts reproduced", stored_verdicts.len());
        Ok(())
    } else {
        Err(CliError::new(
            4,
            format!("verdicts differ: stored {stored_verdicts:?}, fresh {fresh_verdicts:?}"),
        ))
    }
}

fn cmd_corpus(args: &CorpusArgs) -> Result<(), CliError> {
    let mut failed = false;
    for name in solwave::builtin::builtin_names() {
        let req = SolveRequest::builtin(name);
        match solve_to_report(&req) {
            Ok(report) => {
                let kinds: Vec<String> =
                    report.branches.iter().map(|b| b.class.clone()).collect();
                let audit = report
                    .claimed_branch_audit
                    .as_ref()
                    .map(|a| {
                        if a.passed {
                            "claimed-branch PASS (unexpected)"
                        } else {
                            "claimed-branch rejected"
                        }
                    })
                    .unwrap_or("no claimed branch");
                let ok = report.all_verified;
                failed |= !ok;
                println!(
                    "corpus {name}: branches={} [{}] verified={} {}",
                    report.branches.len(),
                    kinds.join(","),
                    if ok { "yes" } else { "NO" },
                    audit
                );
                if args.verbose {
                    println!("{}", serde_json::to_string_pretty(&report).unwrap());
                }
            }
            Err(e) => {
                failed = true;
                println!("corpus {name}: ERROR {e}");
            }
        }
    }
    // the central comparison: pinning C to zero must flag a loss for burgers
    let mut req = SolveRequest::builtin("burgers");
    req.keep_constant = false;
    match solve_to_report(&req) {
        Ok(report) => {
            let lost = report.loss_report.as_ref().map(|l| l.lost_count).unwrap_or(0);
            failed |= lost == 0;
            println!(
                "corpus burgers --no-constant: lost_families={lost} {}",
                if lost > 0 { "(families collapse at C = 0)" } else { "(NO LOSS DETECTED)" }
            );
        }
        Err(e) => {
            failed = true;
            println!("corpus burgers --no-constant: ERROR {e}");
        }
    }
    if failed {
        Err(CliError::new(4, "corpus checks failed"))
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Reduce(args) => cmd_reduce(args),
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Corpus(args) => cmd_corpus(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
