//! Singular expansion coefficients, the smoothness criterion, and the
//! existence/budget formulas.
//!
//! Two independent routes compute the same coefficients c_1..c_J:
//!
//! * [`coefficients_by_recursion`] sums closed-form Beta-function
//!   contributions over canonical (s, k, multiset) triples. A triple with
//!   `k` y-derivatives taken at `s` nesting levels and weight indices
//!   given by an unordered multiset contributes
//!   `B(alpha, 1+s-k+sum(gamma)) * d_x^{s-k} d_y^k f(0,c0) * prod(c)
//!    / (Gamma(alpha) * (s-k)! * prod(multiplicity!))`.
//!   The symmetry factor `(s-k)! * prod(mult!)` accounts for the
//!   orderings of the nesting word and of the weight indices, whose
//!   individual integral values differ but whose sum telescopes to the
//!   single Beta closed form.
//! * [`coefficients_by_series_match`] expands Q term by term and reads
//!   each c_j off as the coefficient of x^{gamma_j}, feeding computed
//!   coefficients back into the singular weight (c_j depends only on
//!   c_1..c_{j-1}, so one increasing pass suffices).
//!
//! Their agreement is the artifact's core fidelity check.

use std::fmt;

use crate::expr::DerivTable;
use crate::lattice::{Alpha, Exponent, LatticeSummary};
use crate::series::{expand_q, ln_gamma, GenSeries, QMode, SeriesError};

/// Zero threshold for individual coefficients.
pub const COEFF_ZERO_TOL: f64 = 1e-12;
/// Agreement threshold between the two coefficient routes.
pub const ROUTE_AGREEMENT_TOL: f64 = 1e-10;
/// Structural-zero threshold for derivative-table entries.
pub const DERIV_ZERO_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Recursion,
    SeriesMatch,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Recursion => write!(f, "recursion"),
            Provenance::SeriesMatch => write!(f, "series-match"),
        }
    }
}

/// The singular expansion S(x) = c0 + sum_j c_j x^{gamma_j}.
#[derive(Debug, Clone)]
pub struct SingularExpansion {
    pub c0: f64,
    pub alpha: Alpha,
    pub m: u32,
    pub gammas: Vec<Exponent>,
    pub coeffs: Vec<f64>,
    /// 0-based indices of non-integer exponents
    pub theta: Vec<usize>,
    pub provenance: Provenance,
}

#[derive(Debug)]
pub enum ExpansionError {
    IncompleteTable { have: u32, need: u32 },
    AlphaMismatch,
    /// a sub-m residual of Q - S exceeded tolerance, or the two sides of
    /// the smoothness iff disagreed
    InternalInconsistency { message: String },
    UnboundedDerivative { gamma: f64 },
    NonPositiveInput { name: &'static str, value: f64 },
    Series(SeriesError),
}

impl fmt::Display for ExpansionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpansionError::IncompleteTable { have, need } => {
                write!(f, "derivative table of order {have} but order {need} required")
            }
            ExpansionError::AlphaMismatch => write!(f, "alpha mismatch between inputs"),
            ExpansionError::InternalInconsistency { message } => {
                write!(f, "internal inconsistency: {message}")
            }
            ExpansionError::UnboundedDerivative { gamma } => {
                write!(f, "S'(0) is unbounded: nonzero coefficient at gamma = {gamma} < 1")
            }
            ExpansionError::NonPositiveInput { name, value } => {
                write!(f, "{name} must be positive; got {value}")
            }
            ExpansionError::Series(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ExpansionError {}

impl From<SeriesError> for ExpansionError {
    fn from(e: SeriesError) -> Self {
        ExpansionError::Series(e)
    }
}

impl SingularExpansion {
    pub fn j_count(&self) -> usize {
        self.gammas.len()
    }

    /// The (gamma_j, c_j) pairs, i.e. the data of the singular weight S'.
    pub fn weight_pairs(&self) -> Vec<(Exponent, f64)> {
        self.gammas
            .iter()
            .cloned()
            .zip(self.coeffs.iter().copied())
            .collect()
    }

    /// S(x) = c0 + sum c_j x^{gamma_j}, for x >= 0.
    pub fn eval(&self, x: f64) -> f64 {
        if x == 0.0 {
            return self.c0;
        }
        self.c0
            + self
                .gammas
                .iter()
                .zip(&self.coeffs)
                .map(|(g, c)| c * x.powf(g.value()))
                .sum::<f64>()
    }

    /// S'(x) = sum c_j gamma_j x^{gamma_j - 1}, for x > 0 (and x = 0 only
    /// when every singular coefficient below gamma = 1 vanishes).
    pub fn eval_prime(&self, x: f64) -> Result<f64, ExpansionError> {
        if x == 0.0 {
            for (g, c) in self.gammas.iter().zip(&self.coeffs) {
                if g.value() < 1.0 && *c != 0.0 {
                    return Err(ExpansionError::UnboundedDerivative { gamma: g.value() });
                }
            }
        }
        Ok(self
            .gammas
            .iter()
            .zip(&self.coeffs)
            .map(|(g, c)| {
                let gv = g.value();
                if *c == 0.0 {
                    0.0
                } else {
                    c * gv * x.powf(gv - 1.0)
                }
            })
            .sum())
    }
}

fn check_inputs(table: &DerivTable, lattice: &LatticeSummary, n: u32) -> Result<(), ExpansionError> {
    if table.n < n {
        return Err(ExpansionError::IncompleteTable {
            have: table.n,
            need: n,
        });
    }
    if lattice.n != n {
        return Err(ExpansionError::AlphaMismatch);
    }
    Ok(())
}

/// gamma-ratio Gamma(x)/Gamma(x+alpha) = B(alpha, x)/Gamma(alpha).
fn beta_over_gamma(alpha: f64, x: f64) -> f64 {
    (ln_gamma(x).unwrap() - ln_gamma(x + alpha).unwrap()).exp()
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Enumerate nondecreasing index multisets of size k over `prev` whose
/// gamma values sum exactly (in rational arithmetic) to `target`.
fn sum_multisets(
    gammas: &[Exponent],
    alpha: &Alpha,
    j: usize,
    k: u32,
    target: &Exponent,
    start: usize,
    current: &mut Vec<usize>,
    acc: &Exponent,
    out: &mut Vec<Vec<usize>>,
) {
    if k == 0 {
        if acc == target {
            out.push(current.clone());
        }
        return;
    }
    for idx in start..j {
        let next = acc.add(&gammas[idx], alpha);
        if next.ratio() > target.ratio() {
            break; // gammas ascending, so later indices only overshoot
        }
        current.push(idx);
        sum_multisets(gammas, alpha, j, k - 1, target, idx, current, &next, out);
        current.pop();
    }
}

/// Closed-form recursion for c_1..c_J in increasing gamma order.
pub fn coefficients_by_recursion(
    table: &DerivTable,
    lattice: &LatticeSummary,
    n: u32,
) -> Result<SingularExpansion, ExpansionError> {
    check_inputs(table, lattice, n)?;
    let alpha = lattice.alpha;
    let a = alpha.value();
    let j_count = lattice.gammas.len();
    let mut coeffs: Vec<f64> = Vec::with_capacity(j_count);

    for j in 0..j_count {
        let gamma_j = &lattice.gammas[j];
        let mut c = 0.0;

        // pure-x contributions: s + alpha = gamma_j, s >= 0
        for s in 0..n {
            let cand = Exponent::from_int(s as i64, &alpha).add_alpha(&alpha);
            if &cand == gamma_j {
                c += beta_over_gamma(a, 1.0 + s as f64) * table.entry(s, 0) / factorial(s);
            }
        }

        // mixed contributions: alpha + (s-k) + sum(gamma_multiset) = gamma_j
        for s in 1..n {
            for k in 1..=s {
                let d = table.entry(s - k, k);
                if d == 0.0 {
                    continue;
                }
                // target for the multiset sum
                let base = Exponent::from_int((s - k) as i64, &alpha).add_alpha(&alpha);
                if base.ratio() > gamma_j.ratio() {
                    continue;
                }
                let target = match exponent_difference(gamma_j, &base, &alpha) {
                    Some(t) => t,
                    None => continue,
                };
                let mut sets = Vec::new();
                sum_multisets(
                    &lattice.gammas,
                    &alpha,
                    j,
                    k,
                    &target,
                    0,
                    &mut Vec::new(),
                    &Exponent::zero(&alpha),
                    &mut sets,
                );
                for set in sets {
                    let mut prod_c = 1.0;
                    for &idx in &set {
                        prod_c *= coeffs[idx];
                    }
                    if prod_c == 0.0 {
                        continue;
                    }
                    let sum_gamma: f64 = set.iter().map(|&idx| lattice.gammas[idx].value()).sum();
                    // multiplicity factorials of the multiset
                    let mut sym = factorial(s - k);
                    let mut run = 1u32;
                    for w in 1..set.len() {
                        if set[w] == set[w - 1] {
                            run += 1;
                        } else {
                            sym *= factorial(run);
                            run = 1;
                        }
                    }
                    sym *= factorial(run);
                    c += beta_over_gamma(a, 1.0 + (s - k) as f64 + sum_gamma) * d * prod_c / sym;
                }
            }
        }
        coeffs.push(c);
    }

    Ok(SingularExpansion {
        // the table is taken at (0, c0) but does not carry c0; callers
        // that need eval() must fill it in
        c0: 0.0,
        alpha,
        m: lattice.m,
        gammas: lattice.gammas.clone(),
        coeffs,
        theta: lattice.theta.clone(),
        provenance: Provenance::Recursion,
    })
}

/// a - b on the lattice, if representable with nonnegative parts.
fn exponent_difference(a: &Exponent, b: &Exponent, alpha: &Alpha) -> Option<Exponent> {
    let diff = a.ratio() - b.ratio();
    if diff < num_rational::BigRational::from_integer(0.into()) {
        return None;
    }
    // diff = i + j*p/q with 0 <= j < q: j is determined by diff mod 1
    // against multiples of p/q; search the canonical j directly
    let q = alpha.q();
    for j in 0..q {
        let e = Exponent::new(0, j, alpha);
        let rem = &diff - e.ratio();
        if rem.is_integer() && rem >= num_rational::BigRational::from_integer(0.into()) {
            use num_traits::ToPrimitive;
            let i = rem.to_integer().to_i64()?;
            return Some(Exponent::new(i, j, alpha));
        }
    }
    None
}

/// Series-match route: read c_j off the expansion of Q (Q - S must have
/// no mass below exponent m). Returns the expansion and the final Q
/// (truncated at m + 1).
pub fn coefficients_by_series_match(
    table: &DerivTable,
    lattice: &LatticeSummary,
    n: u32,
) -> Result<(SingularExpansion, GenSeries), ExpansionError> {
    check_inputs(table, lattice, n)?;
    let alpha = lattice.alpha;
    let mut pairs: Vec<(Exponent, f64)> = Vec::new();
    for gamma_j in &lattice.gammas {
        let q = expand_q(table, &pairs, &alpha, n, gamma_j, QMode::Dp)?;
        pairs.push((gamma_j.clone(), q.coeff(gamma_j)));
    }
    let cutoff = Exponent::from_int(lattice.m as i64 + 1, &alpha);
    let q = expand_q(table, &pairs, &alpha, n, &cutoff, QMode::Dp)?;

    // matching condition: below m, Q and S must agree
    let m_exp = Exponent::from_int(lattice.m as i64, &alpha);
    for (e, coeff) in q.terms() {
        if *e >= m_exp {
            continue;
        }
        let s_coeff = pairs
            .iter()
            .find(|(g, _)| g == e)
            .map(|(_, c)| *c)
            .unwrap_or(0.0);
        if (coeff - s_coeff).abs() > ROUTE_AGREEMENT_TOL {
            return Err(ExpansionError::InternalInconsistency {
                message: format!(
                    "Q - S residual {} at exponent {} exceeds {ROUTE_AGREEMENT_TOL}",
                    coeff - s_coeff,
                    e
                ),
            });
        }
    }

    let coeffs = pairs.iter().map(|(_, c)| *c).collect();
    Ok((
        SingularExpansion {
            c0: 0.0,
            alpha,
            m: lattice.m,
            gammas: lattice.gammas.clone(),
            coeffs,
            theta: lattice.theta.clone(),
            provenance: Provenance::SeriesMatch,
        },
        q,
    ))
}

/// The Q - S series (exponents below m removed up to tolerance).
pub fn q_minus_s(q: &GenSeries, expansion: &SingularExpansion) -> GenSeries {
    let mut out = q.clone();
    for (g, c) in expansion.gammas.iter().zip(&expansion.coeffs) {
        out.add_term(g.clone(), -c);
    }
    out
}

/// Report of the C^m smoothness criterion: the solution is C^m near 0
/// iff d^i/dx^i f(0, c0) = 0 for all 0 <= i < m.
#[derive(Debug, Clone)]
pub struct SmoothnessReport {
    pub condition_holds: bool,
    pub first_violating_i: Option<u32>,
    /// non-integer-exponent terms with coefficient above threshold
    pub singular_coeffs: Vec<(Exponent, f64)>,
    pub all_coeffs_zero: bool,
}

pub fn check_smoothness(
    table: &DerivTable,
    expansion: &SingularExpansion,
) -> Result<SmoothnessReport, ExpansionError> {
    let mut condition_holds = true;
    let mut first_violating_i = None;
    for i in 0..expansion.m {
        if table.entry(i, 0).abs() > DERIV_ZERO_TOL {
            condition_holds = false;
            first_violating_i = Some(i);
            break;
        }
    }
    let singular_coeffs: Vec<(Exponent, f64)> = expansion
        .theta
        .iter()
        .filter(|&&j| expansion.coeffs[j].abs() > COEFF_ZERO_TOL)
        .map(|&j| (expansion.gammas[j].clone(), expansion.coeffs[j]))
        .collect();
    let max_theta = expansion
        .theta
        .iter()
        .map(|&j| expansion.coeffs[j].abs())
        .fold(0.0f64, f64::max);
    let max_all = expansion
        .coeffs
        .iter()
        .map(|c| c.abs())
        .fold(0.0f64, f64::max);
    let all_coeffs_zero = max_all <= ROUTE_AGREEMENT_TOL;

    // iff-consistency of the criterion, both directions; and when it
    // holds, every coefficient (not only the singular ones) vanishes
    let theta_zero = max_theta <= ROUTE_AGREEMENT_TOL;
    if condition_holds != theta_zero {
        return Err(ExpansionError::InternalInconsistency {
            message: format!(
                "smoothness condition is {condition_holds} but max singular |c_j| = {max_theta:e}"
            ),
        });
    }
    if condition_holds && !all_coeffs_zero {
        return Err(ExpansionError::InternalInconsistency {
            message: format!(
                "condition holds but some coefficient survives: max |c_j| = {max_all:e}"
            ),
        });
    }

    Ok(SmoothnessReport {
        condition_holds,
        first_violating_i,
        singular_coeffs,
        all_coeffs_zero,
    })
}

/// Guaranteed existence interval h* = min{a, (b Gamma(1+alpha)/M)^(1/alpha)}.
pub fn h_star(alpha: &Alpha, a: f64, b: f64, m_bound: f64) -> Result<f64, ExpansionError> {
    for (name, v) in [("a", a), ("b", b), ("M", m_bound)] {
        if !(v > 0.0) {
            return Err(ExpansionError::NonPositiveInput { name, value: v });
        }
    }
    let av = alpha.value();
    let g = crate::series::gamma_fn(1.0 + av)?;
    Ok(a.min((b * g / m_bound).powf(1.0 / av)))
}

/// Inputs of the a-priori budget inequality
/// `||(Q-S)'||_{C^{m-1}[0,h]} + C1 h^a + C0 h^a sum_{j=1}^m K^j <= K`.
#[derive(Debug, Clone)]
pub struct TheoremBudget {
    pub c0_const: f64,
    pub c1_const: f64,
    pub k: f64,
    pub h: f64,
    pub norm_qs_prime: f64,
    pub m: u32,
    pub alpha: Alpha,
}

pub fn theorem_budget_holds(t: &TheoremBudget) -> bool {
    let ha = t.h.powf(t.alpha.value());
    let mut k_sum = 0.0;
    let mut k_pow = 1.0;
    for _ in 0..t.m {
        k_pow *= t.k;
        k_sum += k_pow;
    }
    t.norm_qs_prime + t.c1_const * ha + t.c0_const * ha * k_sum <= t.k
}

/// Sampled sup of |(Q-S)^(i)| for 1 <= i <= m over (0, h].
pub fn sampled_qs_prime_norm(qs: &GenSeries, m: u32, h: f64, samples: u32) -> f64 {
    let mut sup = 0.0f64;
    for k in 1..=samples {
        let x = h * k as f64 / samples as f64;
        for i in 1..=m {
            sup = sup.max(qs.eval_derivative(i, x).abs());
        }
    }
    sup
}

/// Largest h on a bisection grid for which the budget holds at fixed K.
/// `norm_fn(h)` supplies the (h-dependent) sampled norm of (Q-S)'.
pub fn largest_budget_h<F: Fn(f64) -> f64>(
    k: f64,
    c0_const: f64,
    c1_const: f64,
    m: u32,
    alpha: &Alpha,
    h_max: f64,
    norm_fn: F,
) -> Option<f64> {
    let holds = |h: f64| {
        theorem_budget_holds(&TheoremBudget {
            c0_const,
            c1_const,
            k,
            h,
            norm_qs_prime: norm_fn(h),
            m,
            alpha: *alpha,
        })
    };
    if !holds(h_max / 1024.0) {
        return None;
    }
    if holds(h_max) {
        return Some(h_max);
    }
    let (mut lo, mut hi) = (h_max / 1024.0, h_max);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Max |c_j^{route1} - c_j^{route2}|.
pub fn route_discrepancy(a: &SingularExpansion, b: &SingularExpansion) -> f64 {
    a.coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // expected values land near 2/sqrt(pi)
mod tests {
    use super::*;
    use crate::expr::{derivative_table, parse};
    use crate::lattice::build_lattice;
    use crate::series::gamma_fn;

    fn half() -> Alpha {
        Alpha::new(1, 2).unwrap()
    }

    fn expand(src: &str, c0: f64, alpha: &Alpha, n: u32) -> SingularExpansion {
        let f = parse(src).unwrap();
        let table = derivative_table(&f, n, c0).unwrap();
        let lattice = build_lattice(alpha, n).unwrap();
        let mut e = coefficients_by_recursion(&table, &lattice, n).unwrap();
        e.c0 = c0;
        e
    }

    #[test]
    fn constant_f_closed_form() {
        // f = 1: y = c0 + x^a / Gamma(1+a)
        let e = expand("1", 0.0, &half(), 5);
        assert_eq!(e.m, 2);
        let expected = [1.128379167095513, 0.0, 0.0];
        for (c, want) in e.coeffs.iter().zip(expected) {
            assert!((c - want).abs() < 1e-12, "{c} vs {want}");
        }
    }

    #[test]
    fn linear_f_mittag_leffler() {
        // f = y, c0 = 1: c_j = 1/Gamma(1 + j*a)
        let e = expand("y", 1.0, &half(), 5);
        let expected = [
            1.0 / gamma_fn(1.5).unwrap(),
            1.0,
            1.0 / gamma_fn(2.5).unwrap(),
        ];
        for (c, want) in e.coeffs.iter().zip(expected) {
            assert!((c - want).abs() < 1e-12, "{c} vs {want}");
        }
    }

    #[test]
    fn f_equals_x_closed_form() {
        // f = x: y = x^{1+a} / Gamma(2+a)
        let e = expand("x", 0.0, &half(), 5);
        let expected = [0.0, 0.0, 1.0 / gamma_fn(2.5).unwrap()];
        for (c, want) in e.coeffs.iter().zip(expected) {
            assert!((c - want).abs() < 1e-12, "{c} vs {want}");
        }
    }

    #[test]
    fn series_match_agrees() {
        let alpha = half();
        for (src, c0) in [("1", 0.0), ("y", 1.0), ("x", 0.0), ("y^2", 1.0), ("x*y - y^2 + 1", 0.5)]
        {
            let f = parse(src).unwrap();
            let n = 5;
            let table = derivative_table(&f, n, c0).unwrap();
            let lattice = build_lattice(&alpha, n).unwrap();
            let rec = coefficients_by_recursion(&table, &lattice, n).unwrap();
            let (ser, _q) = coefficients_by_series_match(&table, &lattice, n).unwrap();
            assert!(
                route_discrepancy(&rec, &ser) < 1e-10,
                "routes disagree for {src}: {:?} vs {:?}",
                rec.coeffs,
                ser.coeffs
            );
        }
    }

    #[test]
    fn eval_s_values() {
        let alpha = half();
        let lattice = build_lattice(&alpha, 5).unwrap();
        let mut e = SingularExpansion {
            c0: 0.0,
            alpha,
            m: 2,
            gammas: vec![lattice.gammas[0].clone()],
            coeffs: vec![1.128379167095513],
            theta: vec![0],
            provenance: Provenance::Recursion,
        };
        assert!((e.eval(0.25) - 0.564189583547756).abs() < 1e-14);
        assert_eq!(e.eval(0.0), 0.0);
        assert!(matches!(
            e.eval_prime(0.0),
            Err(ExpansionError::UnboundedDerivative { .. })
        ));
        e.coeffs[0] = 0.0;
        assert_eq!(e.eval(0.7), 0.0);
        assert_eq!(e.eval_prime(0.0).unwrap(), 0.0);
    }

    #[test]
    fn smoothness_reports() {
        let alpha = half();
        let n = 5;
        let lattice = build_lattice(&alpha, n).unwrap();

        // f = x: condition fails at i = 1, singular coefficient at 3/2
        let f = parse("x").unwrap();
        let table = derivative_table(&f, n, 0.0).unwrap();
        let e = coefficients_by_recursion(&table, &lattice, n).unwrap();
        let r = check_smoothness(&table, &e).unwrap();
        assert!(!r.condition_holds);
        assert_eq!(r.first_violating_i, Some(1));
        assert_eq!(r.singular_coeffs.len(), 1);
        assert!((r.singular_coeffs[0].1 - 0.752252778063675).abs() < 1e-12);

        // f = (y - c0) * x: f(0,c0) = 0 and d/dx f(0,c0) = 0
        let f = parse("(y - 2)*x").unwrap();
        let table = derivative_table(&f, n, 2.0).unwrap();
        let e = coefficients_by_recursion(&table, &lattice, n).unwrap();
        let r = check_smoothness(&table, &e).unwrap();
        assert!(r.condition_holds);
        assert!(r.all_coeffs_zero);
        assert!(r.singular_coeffs.is_empty());

        // f = 1: fails at i = 0
        let f = parse("1").unwrap();
        let table = derivative_table(&f, n, 0.0).unwrap();
        let e = coefficients_by_recursion(&table, &lattice, n).unwrap();
        let r = check_smoothness(&table, &e).unwrap();
        assert!(!r.condition_holds);
        assert_eq!(r.first_violating_i, Some(0));
    }

    #[test]
    fn h_star_values() {
        let alpha = half();
        let g32 = gamma_fn(1.5).unwrap();
        let v = h_star(&alpha, 1.0, 1.0, 1.0).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
        let v = h_star(&alpha, 1.0, 1.0, 1e9).unwrap();
        assert!((v - (g32 / 1e9).powi(2)).abs() < 1e-24);
        let v = h_star(&alpha, 10.0, 3.0, 3.0).unwrap();
        assert!((v - g32 * g32).abs() < 1e-14);
        assert!(h_star(&alpha, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn budget_boundary() {
        let alpha = half();
        let mk = |h: f64| TheoremBudget {
            c0_const: 1.0,
            c1_const: 1.0,
            k: 1.0,
            h,
            norm_qs_prime: 0.0,
            m: 1,
            alpha,
        };
        assert!(theorem_budget_holds(&mk(0.25)));
        assert!(!theorem_budget_holds(&mk(0.3)));
        // without the K-sum term the same h fits inside the budget
        let mut loose = mk(0.3);
        loose.c0_const = 0.0;
        assert!(theorem_budget_holds(&loose));
        // a nonzero (Q-S)' norm consumes budget
        let mut tight = mk(0.25);
        tight.norm_qs_prime = 0.1;
        assert!(!theorem_budget_holds(&tight));
    }

    #[test]
    fn largest_h_matches_boundary() {
        let alpha = half();
        let h = largest_budget_h(1.0, 1.0, 1.0, 1, &alpha, 1.0, |_| 0.0).unwrap();
        assert!((h - 0.25).abs() < 1e-9, "got {h}");
    }
}
