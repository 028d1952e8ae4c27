//! Singular expansions for Caputo-type fractional ODEs.
//!
//! For the initial value problem `D*^a y = f(x, y)`, `y(0) = c0` with
//! `0 < a < 1`, the solution generically behaves like
//! `y(x) = c0 + sum_j c_j x^{gamma_j} + (smooth part)` near the origin,
//! where the exponents `gamma_j` live on the lattice `{i + j*a}`. This
//! crate computes that singular expansion `S(x)` symbolically from the
//! derivatives of `f` at `(0, c0)`, decides whether the solution is
//! already `C^m` smooth, and solves both the original and the
//! S-regularized Volterra equations with a fractional
//! Adams-Bashforth-Moulton scheme so the smoothness gain can be measured
//! as a convergence order.

pub mod cli;
pub mod config;
pub mod expansion;
pub mod expr;
pub mod lattice;
pub mod series;
pub mod volterra;

pub use expansion::SingularExpansion;
pub use expr::Expr;
pub use lattice::{Alpha, Exponent, LatticeSummary};
pub use series::GenSeries;
pub use volterra::{SolveConfig, SolveMode, SolveResult};
