//! Command-line front-end.
//!
//! Exit codes partition the error classes: 1 = configuration (bad file,
//! bad expression, bad flags), 2 = mathematical domain (alpha with no
//! singular part, evaluation outside f's domain, solver divergence),
//! 3 = internal inconsistency (the two coefficient routes disagree, or a
//! smoothness cross-check fails). All numeric output is printed to 15
//! significant digits and reruns are byte-identical for a fixed config.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, ModeChoice, ProblemConfig};
use crate::expansion::{
    check_smoothness, coefficients_by_recursion, coefficients_by_series_match, h_star,
    route_discrepancy, ExpansionError, SingularExpansion,
};
use crate::expr::{derivative_table, estimate_bound_m, DerivTable, ExprError};
use crate::lattice::{build_lattice, LatticeError, LatticeSummary};
use crate::series::GenSeries;
use crate::volterra::{
    estimate_order, result_to_csv, solve, Reference, SolveConfig, SolveMode, VolterraError,
};

#[derive(Parser)]
#[command(name = "fracexpand", version, about = "Singular expansions and regularized solvers for Caputo fractional ODEs")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// problem description file (TOML)
    #[arg(long)]
    config: PathBuf,
    /// output directory (overrides [output].dir)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// direct | regularized | both (overrides [solver].mode)
    #[arg(long)]
    mode: Option<String>,
    /// step count N (overrides [solver].steps)
    #[arg(long)]
    steps: Option<usize>,
    /// integration endpoint (overrides [solver].t_end)
    #[arg(long = "t-end")]
    t_end: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the singular expansion S(x) by both routes
    Expand(CommonArgs),
    /// Decide the C^m smoothness criterion
    Check(CommonArgs),
    /// Solve the direct and/or regularized Volterra equation
    Solve(SolveArgs),
    /// Empirical convergence orders at N, 2N, 4N
    Order(SolveArgs),
    /// Print the guaranteed existence interval h* and the estimated M
    Hstar(CommonArgs),
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    MathDomain(String),
    Inconsistency(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::MathDomain(_) => 2,
            CliError::Inconsistency(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "error: {m}"),
            CliError::MathDomain(m) => write!(f, "error: {m}"),
            CliError::Inconsistency(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn map_expr(e: ExprError) -> CliError {
    match e {
        ExprError::Domain { .. } => CliError::MathDomain(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn map_lattice(e: LatticeError) -> CliError {
    match e {
        LatticeError::NoSingularPart { .. } => CliError::MathDomain(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn map_expansion(e: ExpansionError) -> CliError {
    match e {
        ExpansionError::InternalInconsistency { .. } => CliError::Inconsistency(e.to_string()),
        ExpansionError::IncompleteTable { .. } | ExpansionError::AlphaMismatch => {
            CliError::Inconsistency(e.to_string())
        }
        other => CliError::MathDomain(other.to_string()),
    }
}

fn map_volterra(e: VolterraError) -> CliError {
    match e {
        VolterraError::InvalidConfig { .. } | VolterraError::MissingExpansion => {
            CliError::Config(e.to_string())
        }
        VolterraError::Expr(inner) => map_expr(inner),
        other => CliError::MathDomain(other.to_string()),
    }
}

/// 15 significant digits; fixed notation in a human range, scientific
/// otherwise.
pub fn sig15(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.14e}")
    }
}

struct Prepared {
    cfg: ProblemConfig,
    table: DerivTable,
    lattice: LatticeSummary,
}

fn prepare(common: &CommonArgs) -> Result<Prepared, CliError> {
    let cfg = load_config(&common.config)?;
    let table = derivative_table(&cfg.f, cfg.n, cfg.c0).map_err(map_expr)?;
    let lattice = build_lattice(&cfg.alpha, cfg.n).map_err(map_lattice)?;
    Ok(Prepared { cfg, table, lattice })
}

fn output_dir(common: &CommonArgs, cfg: &ProblemConfig) -> Option<PathBuf> {
    common.output.clone().or_else(|| cfg.output_dir.clone())
}

fn write_output(dir: &Path, name: &str, body: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create output dir: {e}")))?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| CliError::Config(format!("cannot write {name}: {e}")))?;
    Ok(path)
}

/// Both coefficient routes, cross-checked against the configured
/// route-agreement tolerance.
fn expansion_both_routes(
    p: &Prepared,
) -> Result<(SingularExpansion, SingularExpansion, GenSeries, f64), CliError> {
    let mut rec = coefficients_by_recursion(&p.table, &p.lattice, p.cfg.n).map_err(map_expansion)?;
    let (mut ser, q) =
        coefficients_by_series_match(&p.table, &p.lattice, p.cfg.n).map_err(map_expansion)?;
    rec.c0 = p.cfg.c0;
    ser.c0 = p.cfg.c0;
    let disc = route_discrepancy(&rec, &ser);
    if disc > p.cfg.tolerances.route_agreement {
        return Err(CliError::Inconsistency(format!(
            "coefficient routes disagree by {} (tolerance {})",
            sig15(disc),
            sig15(p.cfg.tolerances.route_agreement)
        )));
    }
    Ok((rec, ser, q, disc))
}

fn alpha_echo(cfg: &ProblemConfig) -> String {
    format!(
        "alpha = {}/{} (input {:?})",
        cfg.alpha.p(),
        cfg.alpha.q(),
        cfg.alpha_input
    )
}

fn expansion_json(
    cfg: &ProblemConfig,
    exp: &SingularExpansion,
    q: &GenSeries,
    discrepancy: f64,
) -> String {
    let terms: Vec<serde_json::Value> = exp
        .gammas
        .iter()
        .zip(&exp.coeffs)
        .enumerate()
        .map(|(idx, (g, c))| {
            serde_json::json!({
                "i": g.i(),
                "j": g.j(),
                "exponent": g.value(),
                "coefficient": c,
                "singular": exp.theta.contains(&idx),
            })
        })
        .collect();
    let q_terms: Vec<serde_json::Value> = q
        .terms()
        .map(|(e, c)| {
            serde_json::json!({
                "i": e.i(),
                "j": e.j(),
                "exponent_value": e.value(),
                "coefficient": c,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "alpha": { "p": cfg.alpha.p(), "q": cfg.alpha.q() },
        "c0": exp.c0,
        "m": exp.m,
        "J": exp.gammas.len(),
        "terms": terms,
        "q_series": { "truncated": q.truncated(), "terms": q_terms },
        "route_discrepancy": discrepancy,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json serialization");
    s.push('\n');
    s
}

fn cmd_expand(args: &CommonArgs) -> Result<(), CliError> {
    let p = prepare(args)?;
    let (rec, ser, q, disc) = expansion_both_routes(&p)?;

    println!("{}", alpha_echo(&p.cfg));
    println!("m = {}, J = {}", rec.m, rec.gammas.len());
    println!("{:>4} {:>6} {:>22} {:>22} {:>22} {:>9}", "idx", "(i,j)", "gamma", "c (recursion)", "c (series)", "singular");
    for (idx, (g, c)) in rec.gammas.iter().zip(&rec.coeffs).enumerate() {
        println!(
            "{:>4} {:>6} {:>22} {:>22} {:>22} {:>9}",
            idx + 1,
            format!("({},{})", g.i(), g.j()),
            sig15(g.value()),
            sig15(*c),
            sig15(ser.coeffs[idx]),
            if rec.theta.contains(&idx) { "yes" } else { "no" }
        );
    }
    println!("max route discrepancy = {}", sig15(disc));
    println!(
        "Q series ({} terms to cutoff{}):",
        q.terms().count(),
        if q.truncated() { ", truncated" } else { "" }
    );
    for (e, c) in q.terms() {
        println!("  x^{:<20} {}", sig15(e.value()), sig15(*c));
    }

    if let Some(dir) = output_dir(args, &p.cfg) {
        let path = write_output(&dir, "expansion.json", &expansion_json(&p.cfg, &rec, &q, disc))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_check(args: &CommonArgs) -> Result<(), CliError> {
    let p = prepare(args)?;
    let (rec, _, _, _) = expansion_both_routes(&p)?;
    let report = check_smoothness(&p.table, &rec).map_err(map_expansion)?;

    println!("{}", alpha_echo(&p.cfg));
    println!("criterion: d^i/dx^i f(0, c0) = 0 for all 0 <= i < m = {}", rec.m);
    if report.condition_holds {
        println!("verdict: holds -> y is C^{} near 0", rec.m);
        println!("all expansion coefficients vanish: {}", report.all_coeffs_zero);
    } else {
        let i = report.first_violating_i.unwrap();
        println!("verdict: fails at i = {i} (d^{i}f/dx^{i}(0, c0) = {})", sig15(p.table.entry(i, 0)));
        println!("surviving singular terms:");
        for (g, c) in &report.singular_coeffs {
            println!("  c = {} at x^{}", sig15(*c), sig15(g.value()));
        }
    }
    Ok(())
}

/// The expansion needed by regularized runs, or None when the lattice has
/// no singular part and the run is purely direct.
fn expansion_if_possible(p: &Prepared) -> Result<Option<SingularExpansion>, CliError> {
    let (rec, _, _, _) = expansion_both_routes(p)?;
    Ok(Some(rec))
}

fn solver_config(p: &Prepared, args: &SolveArgs, mode: SolveMode) -> Result<SolveConfig, CliError> {
    let mut cfg = SolveConfig::new(
        p.cfg.alpha,
        p.cfg.c0,
        args.t_end.unwrap_or(p.cfg.solver.t_end),
        args.steps.unwrap_or(p.cfg.solver.steps),
        mode,
    );
    cfg.corrector_iterations = p.cfg.solver.corrector_iterations;
    cfg.b = Some(p.cfg.b);
    Ok(cfg)
}

fn modes_for(p: &Prepared, args: &SolveArgs) -> Result<Vec<SolveMode>, CliError> {
    let choice: ModeChoice = match &args.mode {
        Some(m) => m.parse::<ModeChoice>()?,
        None => p.cfg.solver.mode,
    };
    Ok(choice.modes())
}

fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let p = prepare(&args.common)?;
    let modes = modes_for(&p, args)?;
    let expansion = expansion_if_possible(&p)?;

    println!("{}", alpha_echo(&p.cfg));
    for mode in modes {
        let mut cfg = solver_config(&p, args, mode)?;
        if mode == SolveMode::Regularized {
            cfg.expansion = expansion.clone();
        }
        let result = solve(&cfg, &p.cfg.f).map_err(map_volterra)?;
        let last = *result.y.last().unwrap();
        println!(
            "{} mode: N = {}, t_end = {}, y(t_end) = {}",
            mode,
            cfg.steps,
            sig15(cfg.t_end),
            sig15(last)
        );
        let csv = result_to_csv(&result, expansion.as_ref(), None);
        if let Some(dir) = output_dir(&args.common, &p.cfg) {
            let path = write_output(&dir, &format!("solve_{mode}.csv"), &csv)?;
            println!("wrote {}", path.display());
        } else {
            print!("{csv}");
        }
    }
    Ok(())
}

fn cmd_order(args: &SolveArgs) -> Result<(), CliError> {
    let p = prepare(&args.common)?;
    let modes = modes_for(&p, args)?;
    let expansion = expansion_if_possible(&p)?;

    println!("{}", alpha_echo(&p.cfg));
    let mut csv = String::from("mode,steps,error_at_t_end,empirical_order\n");
    for mode in modes {
        let mut cfg = solver_config(&p, args, mode)?;
        if mode == SolveMode::Regularized {
            cfg.expansion = expansion.clone();
        }
        let report =
            estimate_order(&p.cfg.f, &cfg, &Reference::FineGrid { factor: 8 }).map_err(map_volterra)?;
        println!("{} mode (reference: fine grid x32):", mode);
        for (k, (&n, &e)) in report.steps.iter().zip(&report.errors).enumerate() {
            let order = if k == 0 {
                String::new()
            } else {
                sig15(report.orders[k - 1])
            };
            println!("  N = {:>6}  error = {:<22}  order = {}", n, sig15(e), order);
            csv.push_str(&format!("{mode},{n},{},{order}\n", sig15(e)));
        }
    }
    if let Some(dir) = output_dir(&args.common, &p.cfg) {
        let path = write_output(&dir, "order.csv", &csv)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_hstar(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    // M bounds |f| itself on [0,a] x [c0-b, c0+b]; sampled estimate
    let m_bound =
        estimate_bound_m(&cfg.f, 0, cfg.a, cfg.c0, cfg.b, 101).map_err(map_expr)?;
    if m_bound == 0.0 {
        // f identically zero on the rectangle: y = c0 exists everywhere
        println!("{}", alpha_echo(&cfg));
        println!("M = 0 (f vanishes on the sampled rectangle); h* = a = {}", sig15(cfg.a));
        return Ok(());
    }
    let h = h_star(&cfg.alpha, cfg.a, cfg.b, m_bound).map_err(map_expansion)?;
    println!("{}", alpha_echo(&cfg));
    println!("M = {}", sig15(m_bound));
    println!("h* = {}", sig15(h));
    Ok(())
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Expand(a) => cmd_expand(a),
        Command::Check(a) => cmd_check(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Order(a) => cmd_order(a),
        Command::Hstar(a) => cmd_hstar(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
