//! Fractional Adams-Bashforth-Moulton solver for the Volterra form
//! `y(x) = c0 + (1/Gamma(a)) int_0^x (x-t)^{a-1} f(t, y(t)) dt`
//! and for the regularized equation in the unknown `z = y - S`:
//! `z(x) = -sum_j c_j x^{gamma_j} + J^a f(t, z(t) + S(t))`.
//!
//! The scheme is the standard product-rectangle predictor /
//! product-trapezoid corrector. In regularized mode the leading singular
//! component of the integrand, `f_y(0, c0) * (S(t) - c0)`, is integrated
//! analytically (its J^a image is a power sum) and the product-quadrature
//! value of that same component is subtracted back out. Without this
//! exchange the quadrature error of the singular component re-enters the
//! iteration and the regularized scheme degenerates to the direct one.

use std::fmt;
use std::time::{Duration, Instant};

use crate::expansion::SingularExpansion;
use crate::expr::{mixed_partial, Expr, ExprError};
use crate::lattice::Alpha;
use crate::series::{gamma_fn, ln_gamma, SeriesError};

/// Default cap on step counts (history convolution is O(N^2)).
pub const MAX_STEPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Direct,
    Regularized,
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveMode::Direct => write!(f, "direct"),
            SolveMode::Regularized => write!(f, "regularized"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub alpha: Alpha,
    pub c0: f64,
    pub t_end: f64,
    pub steps: usize,
    pub mode: SolveMode,
    pub expansion: Option<SingularExpansion>,
    pub corrector_iterations: u32,
    /// half-width of the strip [c0-b, c0+b] the iterate must stay in;
    /// None disables the domain-exit guard
    pub b: Option<f64>,
}

impl SolveConfig {
    pub fn new(alpha: Alpha, c0: f64, t_end: f64, steps: usize, mode: SolveMode) -> Self {
        SolveConfig {
            alpha,
            c0,
            t_end,
            steps,
            mode,
            expansion: None,
            corrector_iterations: 1,
            b: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub grid: Vec<f64>,
    /// reconstructed y at each node (z + S in regularized mode)
    pub y: Vec<f64>,
    /// the regularized unknown; None in direct mode
    pub z: Option<Vec<f64>>,
    pub mode: SolveMode,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct OrderReport {
    pub mode: SolveMode,
    pub steps: [usize; 3],
    pub errors: [f64; 3],
    /// log2(e_N / e_2N); f64::INFINITY when the coarser error is already
    /// at the exactness floor
    pub orders: [f64; 2],
}

#[derive(Debug)]
pub enum VolterraError {
    InvalidConfig { message: String },
    MissingExpansion,
    DomainExit { step: usize, value: f64 },
    NonFinite { step: usize },
    OutOfRegime { x: f64 },
    NonConvergent { x: f64 },
    Expr(ExprError),
    Series(SeriesError),
}

impl fmt::Display for VolterraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VolterraError::InvalidConfig { message } => write!(f, "invalid solve config: {message}"),
            VolterraError::MissingExpansion => {
                write!(f, "regularized mode requires a singular expansion")
            }
            VolterraError::DomainExit { step, value } => {
                write!(f, "iterate left the strip [c0-b, c0+b] at step {step} (value {value})")
            }
            VolterraError::NonFinite { step } => {
                write!(f, "iterate became non-finite at step {step}")
            }
            VolterraError::OutOfRegime { x } => {
                write!(f, "Mittag-Leffler argument {x} outside series regime |x| <= 5")
            }
            VolterraError::NonConvergent { x } => {
                write!(f, "Mittag-Leffler series did not converge at x = {x}")
            }
            VolterraError::Expr(e) => write!(f, "{e}"),
            VolterraError::Series(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for VolterraError {}

impl From<ExprError> for VolterraError {
    fn from(e: ExprError) -> Self {
        VolterraError::Expr(e)
    }
}

impl From<SeriesError> for VolterraError {
    fn from(e: SeriesError) -> Self {
        VolterraError::Series(e)
    }
}

fn validate(cfg: &SolveConfig) -> Result<(), VolterraError> {
    if !(cfg.t_end > 0.0) {
        return Err(VolterraError::InvalidConfig {
            message: format!("t_end must be positive; got {}", cfg.t_end),
        });
    }
    if cfg.steps < 2 {
        return Err(VolterraError::InvalidConfig {
            message: format!("steps must be at least 2; got {}", cfg.steps),
        });
    }
    if cfg.steps > MAX_STEPS {
        return Err(VolterraError::InvalidConfig {
            message: format!("steps {} exceeds cap {MAX_STEPS}", cfg.steps),
        });
    }
    if cfg.corrector_iterations == 0 {
        return Err(VolterraError::InvalidConfig {
            message: "corrector_iterations must be positive".into(),
        });
    }
    if cfg.mode == SolveMode::Regularized {
        match &cfg.expansion {
            None => return Err(VolterraError::MissingExpansion),
            Some(e) => {
                if e.alpha != cfg.alpha {
                    return Err(VolterraError::InvalidConfig {
                        message: "expansion alpha differs from solver alpha".into(),
                    });
                }
                if e.c0 != cfg.c0 {
                    return Err(VolterraError::InvalidConfig {
                        message: "expansion c0 differs from solver c0".into(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// J^a applied to S - c0: sum_j c_j Gamma(g+1)/Gamma(g+1+a) x^{g+a}.
fn frac_integral_sbar(exp: &SingularExpansion, a: f64, x: f64) -> f64 {
    exp.gammas
        .iter()
        .zip(&exp.coeffs)
        .map(|(g, c)| {
            if *c == 0.0 {
                return 0.0;
            }
            let gv = g.value();
            let ratio = (ln_gamma(gv + 1.0).unwrap() - ln_gamma(gv + 1.0 + a).unwrap()).exp();
            c * ratio * x.powf(gv + a)
        })
        .sum()
}

pub fn solve(cfg: &SolveConfig, f: &Expr) -> Result<SolveResult, VolterraError> {
    validate(cfg)?;
    let start = Instant::now();
    let a = cfg.alpha.value();
    let n = cfg.steps;
    let h = cfg.t_end / n as f64;
    let ha_p = h.powf(a) / gamma_fn(a + 1.0)?; // predictor weight factor
    let ha_c = h.powf(a) / gamma_fn(a + 2.0)?; // corrector weight factor

    let grid: Vec<f64> = (0..=n).map(|k| h * k as f64).collect();

    let regularized = cfg.mode == SolveMode::Regularized;
    let exp = cfg.expansion.as_ref();

    // node values of S and S - c0, and the slope f_y(0, c0) that scales
    // the analytic singular correction
    let (s_nodes, sbar_nodes, fy0) = if regularized {
        let e = exp.unwrap();
        let s: Vec<f64> = grid.iter().map(|&x| e.eval(x)).collect();
        let sbar: Vec<f64> = s.iter().map(|v| v - e.c0).collect();
        let fy0 = mixed_partial(f, 0, 1, 0.0, cfg.c0)?;
        (s, sbar, fy0)
    } else {
        (Vec::new(), Vec::new(), 0.0)
    };

    // u is the iterated unknown: y in direct mode, z in regularized mode
    let mut u = vec![0.0f64; n + 1];
    u[0] = if regularized { 0.0 } else { cfg.c0 };
    // integrand values g_k = f(x_k, y_k) resp. f(x_k, z_k + S(x_k))
    let mut gv = vec![0.0f64; n + 1];
    gv[0] = f.eval(0.0, cfg.c0)?;

    let check = |step: usize, y_val: f64| -> Result<(), VolterraError> {
        if !y_val.is_finite() {
            return Err(VolterraError::NonFinite { step });
        }
        if let Some(b) = cfg.b {
            if (y_val - cfg.c0).abs() > b {
                return Err(VolterraError::DomainExit { step, value: y_val });
            }
        }
        Ok(())
    };

    for k in 0..n {
        let x_next = grid[k + 1];
        // inhomogeneous term: c0 for y, -(S - c0) for z
        let base = if regularized { -sbar_nodes[k + 1] } else { cfg.c0 };

        // predictor: product-rectangle weights (k+1-j)^a - (k-j)^a
        let mut pred_sum = 0.0;
        let mut pred_sbar = 0.0;
        for j in 0..=k {
            let w = ((k + 1 - j) as f64).powf(a) - ((k - j) as f64).powf(a);
            pred_sum += w * gv[j];
            if regularized {
                pred_sbar += w * sbar_nodes[j];
            }
        }
        let mut corr_term = 0.0;
        if regularized && fy0 != 0.0 {
            corr_term = fy0 * (frac_integral_sbar(exp.unwrap(), a, x_next) - ha_p * pred_sbar);
        }
        let u_pred = base + ha_p * pred_sum + corr_term;
        let y_pred = if regularized { u_pred + s_nodes[k + 1] } else { u_pred };
        check(k + 1, y_pred)?;

        // corrector: product-trapezoid weights
        let mut hist = 0.0;
        let mut hist_sbar = 0.0;
        for j in 0..=k {
            let w = if j == 0 {
                let kf = k as f64;
                kf.powf(a + 1.0) - (kf - a) * (kf + 1.0).powf(a)
            } else {
                let d = (k - j) as f64;
                (d + 2.0).powf(a + 1.0) + d.powf(a + 1.0) - 2.0 * (d + 1.0).powf(a + 1.0)
            };
            hist += w * gv[j];
            if regularized {
                hist_sbar += w * sbar_nodes[j];
            }
        }
        let mut corr_corr = 0.0;
        if regularized && fy0 != 0.0 {
            // corrector weight of the new node is 1
            corr_corr = fy0
                * (frac_integral_sbar(exp.unwrap(), a, x_next)
                    - ha_c * (hist_sbar + sbar_nodes[k + 1]));
        }

        let mut y_new = y_pred;
        let mut u_new = u_pred;
        for _ in 0..cfg.corrector_iterations {
            let g_new = f.eval(x_next, y_new)?;
            u_new = base + ha_c * (hist + g_new) + corr_corr;
            y_new = if regularized { u_new + s_nodes[k + 1] } else { u_new };
            check(k + 1, y_new)?;
        }
        u[k + 1] = u_new;
        gv[k + 1] = f.eval(x_next, y_new)?;
    }

    let (y, z) = if regularized {
        let y: Vec<f64> = u.iter().zip(&s_nodes).map(|(z, s)| z + s).collect();
        (y, Some(u))
    } else {
        (u, None)
    };

    Ok(SolveResult {
        grid,
        y,
        z,
        mode: cfg.mode,
        wall_time: start.elapsed(),
    })
}

/// E_a(x) = sum_k x^k / Gamma(a k + 1), summed until the term drops
/// below `tol` and stays there for 5 further terms.
pub fn mittag_leffler(alpha: &Alpha, x: f64, tol: f64) -> Result<f64, VolterraError> {
    if !(tol > 0.0) {
        return Err(VolterraError::InvalidConfig {
            message: format!("tol must be positive; got {tol}"),
        });
    }
    if x.abs() > 5.0 {
        return Err(VolterraError::OutOfRegime { x });
    }
    let a = alpha.value();
    let mut sum = 0.0;
    let mut below = 0u32;
    for k in 0..2000u32 {
        let term = if x == 0.0 && k == 0 {
            1.0
        } else {
            (k as f64 * x.abs().max(f64::MIN_POSITIVE).ln() - ln_gamma(a * k as f64 + 1.0)?).exp()
                * if x < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 }
        };
        sum += term;
        if term.abs() < tol {
            below += 1;
            if below > 5 {
                return Ok(sum);
            }
        } else {
            below = 0;
        }
        if x == 0.0 {
            return Ok(1.0);
        }
    }
    Err(VolterraError::NonConvergent { x })
}

/// Reference for error measurement at t_end.
pub enum Reference {
    Value(f64),
    /// solve on a grid with `factor` times the finest step count
    FineGrid { factor: usize },
}

/// Errors below this are treated as exact (order reported as infinity).
pub const EXACTNESS_FLOOR: f64 = 1e-12;

pub fn estimate_order(
    f: &Expr,
    cfg: &SolveConfig,
    reference: &Reference,
) -> Result<OrderReport, VolterraError> {
    validate(cfg)?;
    let n = cfg.steps;
    let reference_value = match reference {
        Reference::Value(v) => *v,
        Reference::FineGrid { factor } => {
            if *factor < 8 {
                return Err(VolterraError::InvalidConfig {
                    message: format!("fine-grid factor must be >= 8; got {factor}"),
                });
            }
            let mut fine = cfg.clone();
            fine.steps = 4 * n * factor;
            let r = solve(&fine, f)?;
            *r.y.last().unwrap()
        }
    };

    let steps = [n, 2 * n, 4 * n];
    let mut errors = [0.0f64; 3];
    for (slot, &nk) in errors.iter_mut().zip(&steps) {
        let mut c = cfg.clone();
        c.steps = nk;
        let r = solve(&c, f)?;
        *slot = (r.y.last().unwrap() - reference_value).abs();
    }
    let order = |e_coarse: f64, e_fine: f64| {
        if e_coarse <= EXACTNESS_FLOOR {
            f64::INFINITY
        } else if e_fine <= EXACTNESS_FLOOR {
            f64::INFINITY
        } else {
            (e_coarse / e_fine).log2()
        }
    };
    Ok(OrderReport {
        mode: cfg.mode,
        steps,
        errors,
        orders: [order(errors[0], errors[1]), order(errors[1], errors[2])],
    })
}

/// CSV per the external-interface contract: step_index, x, y, z
/// (empty in direct mode), S_of_x, abs_err_vs_reference (empty without
/// a reference).
pub fn result_to_csv(
    result: &SolveResult,
    expansion: Option<&SingularExpansion>,
    reference: Option<&dyn Fn(f64) -> f64>,
) -> String {
    let mut out = String::from("step_index,x,y,z,S_of_x,abs_err_vs_reference\n");
    for (k, (&x, &y)) in result.grid.iter().zip(&result.y).enumerate() {
        let z = match &result.z {
            Some(z) => format!("{:.15e}", z[k]),
            None => String::new(),
        };
        let s = match expansion {
            Some(e) => format!("{:.15e}", e.eval(x)),
            None => String::new(),
        };
        let err = match reference {
            Some(r) => format!("{:.15e}", (y - r(x)).abs()),
            None => String::new(),
        };
        out.push_str(&format!("{k},{x:.15e},{y:.15e},{z},{s},{err}\n"));
    }
    out
}
