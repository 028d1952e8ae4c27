//! Problem configuration: a single TOML file.
//!
//! ```toml
//! f = "x*y - y^2 + 1"     # right-hand side, variables x and y
//! alpha = "1/2"           # or a decimal such as 0.5
//! c0 = 0.5                # initial value y(0)
//! a = 1.0                 # f is defined on [0, a] x [c0-b, c0+b]
//! b = 1.0
//! n = 5                   # expansion depth (f is C^n)
//!
//! [solver]
//! t_end = 0.5
//! steps = 160
//! mode = "direct"         # direct | regularized | both
//! corrector_iterations = 1
//!
//! [output]
//! dir = "out"
//!
//! [tolerances]
//! coeff_zero = 1e-12
//! route_agreement = 1e-10
//! ```
//!
//! A decimal `alpha` is converted to a rational with denominator at most
//! 10^6 via continued fractions; the chosen p/q is echoed in all outputs.

use std::fmt;
use std::path::PathBuf;

use serde::Deserialize;

use crate::expr::{parse, Expr, ExprError};
use crate::lattice::{Alpha, LatticeError};
use crate::volterra::SolveMode;

pub const ALPHA_MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Toml(toml::de::Error),
    Expr(ExprError),
    Alpha(LatticeError),
    Invalid { message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Toml(e) => write!(f, "config syntax: {e}"),
            ConfigError::Expr(e) => write!(f, "invalid expression for f: {e}"),
            ConfigError::Alpha(e) => write!(f, "{e}"),
            ConfigError::Invalid { message } => write!(f, "{message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AlphaSpec {
    Text(String),
    Number(f64),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    t_end: Option<f64>,
    steps: Option<usize>,
    mode: Option<String>,
    corrector_iterations: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    coeff_zero: Option<f64>,
    route_agreement: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    f: String,
    alpha: AlphaSpec,
    c0: f64,
    a: Option<f64>,
    b: Option<f64>,
    n: u32,
    solver: Option<RawSolver>,
    output: Option<RawOutput>,
    tolerances: Option<RawTolerances>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeChoice {
    Direct,
    Regularized,
    Both,
}

impl ModeChoice {
    pub fn modes(self) -> Vec<SolveMode> {
        match self {
            ModeChoice::Direct => vec![SolveMode::Direct],
            ModeChoice::Regularized => vec![SolveMode::Regularized],
            ModeChoice::Both => vec![SolveMode::Direct, SolveMode::Regularized],
        }
    }
}

impl std::str::FromStr for ModeChoice {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "direct" => Ok(ModeChoice::Direct),
            "regularized" => Ok(ModeChoice::Regularized),
            "both" => Ok(ModeChoice::Both),
            other => Err(ConfigError::Invalid {
                message: format!("mode must be direct, regularized, or both; got {other:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub coeff_zero: f64,
    pub route_agreement: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            coeff_zero: crate::expansion::COEFF_ZERO_TOL,
            route_agreement: crate::expansion::ROUTE_AGREEMENT_TOL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverSettings {
    pub t_end: f64,
    pub steps: usize,
    pub mode: ModeChoice,
    pub corrector_iterations: u32,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            t_end: 0.5,
            steps: 64,
            mode: ModeChoice::Direct,
            corrector_iterations: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub f_source: String,
    pub f: Expr,
    pub alpha: Alpha,
    /// the alpha text as given, for echoing
    pub alpha_input: String,
    pub c0: f64,
    pub a: f64,
    pub b: f64,
    pub n: u32,
    pub solver: SolverSettings,
    pub output_dir: Option<PathBuf>,
    pub tolerances: Tolerances,
}

pub fn parse_alpha(text: &str) -> Result<Alpha, ConfigError> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: u64 = p.trim().parse().map_err(|_| ConfigError::Invalid {
            message: format!("cannot parse alpha numerator {p:?}"),
        })?;
        let q: u64 = q.trim().parse().map_err(|_| ConfigError::Invalid {
            message: format!("cannot parse alpha denominator {q:?}"),
        })?;
        return Alpha::new(p, q).map_err(ConfigError::Alpha);
    }
    let v: f64 = t.parse().map_err(|_| ConfigError::Invalid {
        message: format!("cannot parse alpha {t:?}"),
    })?;
    Alpha::from_f64(v, ALPHA_MAX_DENOMINATOR).map_err(ConfigError::Alpha)
}

pub fn parse_config(text: &str) -> Result<ProblemConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(ConfigError::Toml)?;
    let f = parse(&raw.f).map_err(ConfigError::Expr)?;
    let (alpha, alpha_input) = match &raw.alpha {
        AlphaSpec::Text(t) => (parse_alpha(t)?, t.clone()),
        AlphaSpec::Number(v) => (
            Alpha::from_f64(*v, ALPHA_MAX_DENOMINATOR).map_err(ConfigError::Alpha)?,
            format!("{v}"),
        ),
    };
    let a = raw.a.unwrap_or(1.0);
    let b = raw.b.unwrap_or(1.0);
    if !(a > 0.0) || !(b > 0.0) {
        return Err(ConfigError::Invalid {
            message: format!("a and b must be positive; got a = {a}, b = {b}"),
        });
    }
    if raw.n == 0 {
        return Err(ConfigError::Invalid {
            message: "n must be positive".into(),
        });
    }
    if !raw.c0.is_finite() {
        return Err(ConfigError::Invalid {
            message: format!("c0 must be finite; got {}", raw.c0),
        });
    }

    let mut solver = SolverSettings::default();
    if let Some(s) = raw.solver {
        if let Some(t) = s.t_end {
            if !(t > 0.0) {
                return Err(ConfigError::Invalid {
                    message: format!("t_end must be positive; got {t}"),
                });
            }
            solver.t_end = t;
        }
        if let Some(n) = s.steps {
            if n < 2 {
                return Err(ConfigError::Invalid {
                    message: format!("steps must be at least 2; got {n}"),
                });
            }
            solver.steps = n;
        }
        if let Some(m) = s.mode {
            solver.mode = m.parse()?;
        }
        if let Some(c) = s.corrector_iterations {
            if c == 0 {
                return Err(ConfigError::Invalid {
                    message: "corrector_iterations must be positive".into(),
                });
            }
            solver.corrector_iterations = c;
        }
    }

    let mut tolerances = Tolerances::default();
    if let Some(t) = raw.tolerances {
        if let Some(v) = t.coeff_zero {
            tolerances.coeff_zero = v;
        }
        if let Some(v) = t.route_agreement {
            tolerances.route_agreement = v;
        }
    }

    Ok(ProblemConfig {
        f_source: raw.f,
        f,
        alpha,
        alpha_input,
        c0: raw.c0,
        a,
        b,
        n: raw.n,
        solver,
        output_dir: raw.output.and_then(|o| o.dir),
        tolerances,
    })
}

pub fn load_config(path: &std::path::Path) -> Result<ProblemConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
    parse_config(&text)
}
