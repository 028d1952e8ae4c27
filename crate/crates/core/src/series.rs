//! Finite generalized power series over lattice exponents, plus the
//! Gamma/Beta special functions the expansion machinery needs.
//!
//! The central operation is [`expand_q`], which expands the nested
//! integral sum
//!
//! ```text
//! Q(x) = sum_{s=0}^{n-1} sum_{words in {1,2}^s} d_word f(0,c0) / Gamma(a)
//!        * (fractional kernel integral) * (s nested integrals)
//! ```
//!
//! symbolically: a `1` at nesting level k integrates, a `2` multiplies by
//! the singular weight `S'(t) = sum gamma_j c_j t^{gamma_j - 1}` and then
//! integrates. Since the derivative value collapses to (#1s, #2s) by
//! symmetry of mixed partials, the default evaluation runs a dynamic
//! program keyed by the count of 2s instead of enumerating all 2^s words;
//! the exhaustive enumeration is kept as a fidelity oracle because the
//! nested denominators do depend on the order within a word.

use std::collections::BTreeMap;
use std::fmt;

use crate::expr::DerivTable;
use crate::lattice::{Alpha, Exponent};

#[derive(Debug, Clone, PartialEq)]
pub enum SeriesError {
    /// gamma/beta argument <= 0
    NonPositiveArgument { value: f64 },
    /// integration of x^e with e <= -1 diverges at 0
    NonIntegrableExponent { value: f64 },
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesError::NonPositiveArgument { value } => {
                write!(f, "special function argument must be positive; got {value}")
            }
            SeriesError::NonIntegrableExponent { value } => {
                write!(f, "exponent {value} <= -1 is not integrable at 0")
            }
        }
    }
}

impl std::error::Error for SeriesError {}

// Lanczos coefficients, g = 607/128, n = 15 (Godfrey); a few ulps over
// the range we use.
const LANCZOS_G: f64 = 4.7421875;
const LANCZOS: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    3.3994649984811888699e-5,
    4.6523628927048575665e-5,
    -9.8374475304879564677e-5,
    1.5808870322491248884e-4,
    -2.1026444172410488319e-4,
    2.1743961811521264320e-4,
    -1.6431810653676389022e-4,
    8.4418223983852743293e-5,
    -2.6190838401581408670e-5,
    3.6899182659531622704e-6,
];

fn lanczos_sum(x: f64) -> f64 {
    // x >= 0.5 assumed; series in 1/(x-1+i)
    let z = x - 1.0;
    let mut t = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        t += c / (z + i as f64);
    }
    t
}

/// Gamma function for positive arguments (Lanczos approximation).
pub fn gamma_fn(x: f64) -> Result<f64, SeriesError> {
    if !(x > 0.0) {
        return Err(SeriesError::NonPositiveArgument { value: x });
    }
    if x < 0.5 {
        // reflection keeps the Lanczos series in its accurate range
        return Ok(std::f64::consts::PI
            / ((std::f64::consts::PI * x).sin() * gamma_fn(1.0 - x)?));
    }
    let t = lanczos_sum(x);
    let w = x - 1.0 + LANCZOS_G + 0.5;
    Ok((2.0 * std::f64::consts::PI).sqrt() * w.powf(x - 0.5) * (-w).exp() * t)
}

/// log Gamma for positive arguments.
pub fn ln_gamma(x: f64) -> Result<f64, SeriesError> {
    if !(x > 0.0) {
        return Err(SeriesError::NonPositiveArgument { value: x });
    }
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x)?);
    }
    let t = lanczos_sum(x);
    let w = x - 1.0 + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (x - 0.5) * w.ln() - w + t.ln())
}

/// Beta function B(a, b) = Gamma(a)Gamma(b)/Gamma(a+b), in log space.
pub fn beta_fn(a: f64, b: f64) -> Result<f64, SeriesError> {
    Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
}

/// A finite generalized power series `sum a_e x^e` over lattice exponents,
/// truncated at `cutoff`.
#[derive(Debug, Clone)]
pub struct GenSeries {
    alpha: Alpha,
    terms: BTreeMap<Exponent, f64>,
    cutoff: Exponent,
    truncated: bool,
}

impl GenSeries {
    pub fn new(alpha: Alpha, cutoff: Exponent) -> Self {
        GenSeries {
            alpha,
            terms: BTreeMap::new(),
            cutoff,
            truncated: false,
        }
    }

    /// The series `1 = x^0`.
    pub fn one(alpha: Alpha, cutoff: Exponent) -> Self {
        let mut s = GenSeries::new(alpha, cutoff);
        s.add_term(Exponent::zero(&alpha), 1.0);
        s
    }

    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    pub fn cutoff(&self) -> &Exponent {
        &self.cutoff
    }

    /// Whether any term beyond the cutoff was dropped.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &Exponent) -> f64 {
        *self.terms.get(e).unwrap_or(&0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &f64)> {
        self.terms.iter()
    }

    /// Accumulate a term; exact structural zeros are pruned, terms beyond
    /// the cutoff are dropped and recorded.
    pub fn add_term(&mut self, e: Exponent, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        if e > self.cutoff {
            self.truncated = true;
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert(0.0);
        *slot += coeff;
        if *slot == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn add_series(&mut self, other: &GenSeries) {
        self.truncated |= other.truncated;
        for (e, c) in &other.terms {
            self.add_term(e.clone(), *c);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        if factor == 0.0 {
            self.terms.clear();
            return;
        }
        for v in self.terms.values_mut() {
            *v *= factor;
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * x.powf(e.value()))
            .sum()
    }

    /// Formal i-th derivative evaluated at x > 0.
    pub fn eval_derivative(&self, order: u32, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let v = e.value();
                let mut factor = *c;
                for l in 0..order {
                    factor *= v - l as f64;
                }
                if factor == 0.0 {
                    0.0
                } else {
                    factor * x.powf(v - order as f64)
                }
            })
            .sum()
    }
}

/// The singular weight `S'(x) = sum gamma_j c_j x^{gamma_j - 1}`,
/// stored as the (gamma_j, c_j) pairs.
#[derive(Debug, Clone)]
pub struct SingularWeight {
    pairs: Vec<(Exponent, f64)>,
}

impl SingularWeight {
    pub fn new(pairs: Vec<(Exponent, f64)>) -> Self {
        SingularWeight { pairs }
    }

    pub fn pairs(&self) -> &[(Exponent, f64)] {
        &self.pairs
    }
}

/// Term-wise integration: a x^e -> a/(e+1) x^{e+1}.
pub fn integrate(s: &GenSeries) -> Result<GenSeries, SeriesError> {
    let alpha = s.alpha;
    let mut out = GenSeries::new(alpha, s.cutoff.clone());
    out.truncated = s.truncated;
    for (e, c) in &s.terms {
        let v = e.value();
        if v <= -1.0 {
            return Err(SeriesError::NonIntegrableExponent { value: v });
        }
        out.add_term(e.add_int(1, &alpha), c / (v + 1.0));
    }
    Ok(out)
}

/// Multiply by the singular weight: exponents add in lattice arithmetic.
pub fn mul_weight(s: &GenSeries, w: &SingularWeight) -> GenSeries {
    let alpha = s.alpha;
    let mut out = GenSeries::new(alpha, s.cutoff.clone());
    out.truncated = s.truncated;
    for (e, c) in &s.terms {
        for (g, cj) in &w.pairs {
            if *cj == 0.0 {
                continue;
            }
            let ge = g.value();
            out.add_term(e.add(g, &alpha).add_int(-1, &alpha), c * ge * cj);
        }
    }
    out
}

/// Fractional integration combined with 1/Gamma(alpha):
/// a x^e -> a Gamma(e+1)/Gamma(e+1+alpha) x^{e+alpha}.
pub fn frac_integrate(s: &GenSeries, alpha: &Alpha) -> Result<GenSeries, SeriesError> {
    let mut out = GenSeries::new(s.alpha, s.cutoff.clone());
    out.truncated = s.truncated;
    let a = alpha.value();
    for (e, c) in &s.terms {
        let v = e.value();
        if v <= -1.0 {
            return Err(SeriesError::NonIntegrableExponent { value: v });
        }
        let factor = (ln_gamma(v + 1.0)? - ln_gamma(v + 1.0 + a)?).exp();
        out.add_term(e.add_alpha(alpha), c * factor);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QMode {
    /// dynamic program over (#levels processed, #2s so far)
    Dp,
    /// exhaustive enumeration of all 2^s words; testing reference
    Exhaustive,
}

/// Truncated series of Q(x) given the derivative table at (0, c0) and the
/// singular coefficients known so far.
pub fn expand_q(
    table: &DerivTable,
    coeffs: &[(Exponent, f64)],
    alpha: &Alpha,
    n: u32,
    cutoff: &Exponent,
    mode: QMode,
) -> Result<GenSeries, SeriesError> {
    let weight = SingularWeight::new(coeffs.to_vec());
    let mut q = GenSeries::new(*alpha, cutoff.clone());
    match mode {
        QMode::Dp => {
            // states[c] = sum over all length-s words with c twos of the
            // nested-integral series, built one level at a time
            let mut states: Vec<GenSeries> = vec![GenSeries::one(*alpha, cutoff.clone())];
            for s in 0..n {
                for (c, state) in states.iter().enumerate() {
                    let d = table.entry(s - c as u32, c as u32);
                    if d == 0.0 || state.is_empty() {
                        continue;
                    }
                    let mut contrib = frac_integrate(state, alpha)?;
                    contrib.scale(d);
                    q.add_series(&contrib);
                }
                if s + 1 == n {
                    break;
                }
                let mut next: Vec<GenSeries> =
                    vec![GenSeries::new(*alpha, cutoff.clone()); states.len() + 1];
                for (c, state) in states.iter().enumerate() {
                    next[c].add_series(&integrate(state)?);
                    next[c + 1].add_series(&integrate(&mul_weight(state, &weight))?);
                }
                states = next;
            }
        }
        QMode::Exhaustive => {
            for s in 0..n {
                for word in 0u32..(1 << s) {
                    let twos = word.count_ones();
                    let d = table.entry(s - twos, twos);
                    if d == 0.0 {
                        continue;
                    }
                    let mut g = GenSeries::one(*alpha, cutoff.clone());
                    // bit k of `word` encodes level k+1; process innermost
                    // (level s) outwards
                    for level in (0..s).rev() {
                        if (word >> level) & 1 == 1 {
                            g = mul_weight(&g, &weight);
                        }
                        g = integrate(&g)?;
                    }
                    let mut contrib = frac_integrate(&g, alpha)?;
                    contrib.scale(d);
                    q.add_series(&contrib);
                }
            }
        }
    }
    Ok(q)
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // expected values land near 2/sqrt(pi)
mod tests {
    use super::*;
    use crate::expr::{derivative_table, parse};

    const SQRT_PI: f64 = 1.7724538509055160273;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn gamma_values() {
        assert!(rel(gamma_fn(1.0).unwrap(), 1.0) < 1e-13);
        assert!(rel(gamma_fn(0.5).unwrap(), SQRT_PI) < 1e-13);
        assert!(rel(gamma_fn(2.5).unwrap(), 1.329340388179137) < 1e-13);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
    }

    #[test]
    fn beta_values() {
        assert!(rel(beta_fn(1.0, 1.0).unwrap(), 1.0) < 1e-13);
        assert!(rel(beta_fn(0.5, 1.5).unwrap(), std::f64::consts::FRAC_PI_2) < 1e-13);
        assert!(rel(beta_fn(0.5, 2.0).unwrap(), 4.0 / 3.0) < 1e-13);
    }

    fn half() -> Alpha {
        Alpha::new(1, 2).unwrap()
    }

    #[test]
    fn integrate_power_rule() {
        let alpha = half();
        let cutoff = Exponent::from_int(4, &alpha);
        let mut s = GenSeries::new(alpha, cutoff.clone());
        s.add_term(Exponent::new(0, 1, &alpha), 1.0); // x^{1/2}
        let r = integrate(&s).unwrap();
        let e32 = Exponent::new(1, 1, &alpha);
        assert!((r.coeff(&e32) - 2.0 / 3.0).abs() < 1e-15);

        let mut s = GenSeries::one(alpha, cutoff.clone());
        let r = integrate(&s).unwrap();
        assert_eq!(r.coeff(&Exponent::from_int(1, &alpha)), 1.0);

        s = GenSeries::new(alpha, cutoff);
        assert!(integrate(&s).unwrap().is_empty());
    }

    #[test]
    fn mul_weight_products() {
        let alpha = half();
        let cutoff = Exponent::from_int(4, &alpha);
        let g_half = Exponent::new(0, 1, &alpha);

        let s = GenSeries::one(alpha, cutoff.clone());
        let w = SingularWeight::new(vec![(g_half.clone(), 1.0)]);
        let r = mul_weight(&s, &w);
        // single product, coefficient gamma*c = 1/2 at x^{-1/2}
        let minus_half = Exponent::new(-1, 1, &alpha);
        assert_eq!(r.coeff(&minus_half), 0.5);

        let mut s = GenSeries::new(alpha, cutoff.clone());
        s.add_term(g_half.clone(), 2.0);
        let w = SingularWeight::new(vec![(g_half, 3.0)]);
        let r = mul_weight(&s, &w);
        assert_eq!(r.coeff(&Exponent::zero(&alpha)), 3.0);

        let s = GenSeries::new(alpha, cutoff);
        assert!(mul_weight(&s, &w).is_empty());
    }

    #[test]
    fn frac_integrate_gamma_ratios() {
        let alpha = half();
        let cutoff = Exponent::from_int(4, &alpha);
        let s = GenSeries::one(alpha, cutoff.clone());
        let r = frac_integrate(&s, &alpha).unwrap();
        let g_half = Exponent::new(0, 1, &alpha);
        assert!(rel(r.coeff(&g_half), 1.128379167095513) < 1e-13);

        let mut s = GenSeries::new(alpha, cutoff.clone());
        s.add_term(g_half, 1.0);
        let r = frac_integrate(&s, &alpha).unwrap();
        assert!(rel(r.coeff(&Exponent::from_int(1, &alpha)), 0.886226925452758) < 1e-13);

        let s = GenSeries::new(alpha, cutoff);
        assert!(frac_integrate(&s, &alpha).unwrap().is_empty());
    }

    #[test]
    fn expand_q_constant_f() {
        // f = 1: only the s = 0 term survives, Q = x^alpha / Gamma(1+alpha)
        let alpha = half();
        let f = parse("1").unwrap();
        let table = derivative_table(&f, 4, 0.0).unwrap();
        let cutoff = Exponent::from_int(3, &alpha);
        let q = expand_q(&table, &[], &alpha, 5, &cutoff, QMode::Dp).unwrap();
        assert_eq!(q.len(), 1);
        let g_half = Exponent::new(0, 1, &alpha);
        assert!(rel(q.coeff(&g_half), 1.128379167095513) < 1e-13);
    }

    #[test]
    fn expand_q_linear_f() {
        // f = y, c0 = 1: with c at 1/2 fed in, Q picks up x^1 with the
        // Mittag-Leffler coefficient 1/Gamma(2) = 1
        let alpha = half();
        let f = parse("y").unwrap();
        let table = derivative_table(&f, 4, 1.0).unwrap();
        let g_half = Exponent::new(0, 1, &alpha);
        let c1 = 1.0 / gamma_fn(1.5).unwrap();
        let cutoff = Exponent::from_int(1, &alpha);
        let q = expand_q(
            &table,
            &[(g_half.clone(), c1)],
            &alpha,
            5,
            &cutoff,
            QMode::Dp,
        )
        .unwrap();
        assert!(rel(q.coeff(&g_half), c1) < 1e-13);
        assert!(rel(q.coeff(&Exponent::from_int(1, &alpha)), 1.0) < 1e-13);
    }

    #[test]
    fn expand_q_zero_table() {
        let alpha = half();
        let f = parse("x*y*0").unwrap();
        let table = derivative_table(&f, 4, 1.0).unwrap();
        let cutoff = Exponent::from_int(3, &alpha);
        let q = expand_q(&table, &[], &alpha, 5, &cutoff, QMode::Dp).unwrap();
        assert!(q.is_empty());
    }

    #[test]
    fn dp_matches_exhaustive() {
        let alpha = Alpha::new(2, 5).unwrap();
        let f = parse("1 + x*y - y^2 + x^2").unwrap();
        let table = derivative_table(&f, 6, 0.7).unwrap();
        let g1 = Exponent::new(0, 1, &alpha);
        let g2 = Exponent::new(0, 2, &alpha);
        let coeffs = vec![(g1, 0.83), (g2, -0.41)];
        let cutoff = Exponent::from_int(3, &alpha);
        let qd = expand_q(&table, &coeffs, &alpha, 6, &cutoff, QMode::Dp).unwrap();
        let qe = expand_q(&table, &coeffs, &alpha, 6, &cutoff, QMode::Exhaustive).unwrap();
        assert_eq!(qd.len(), qe.len());
        for (e, c) in qd.terms() {
            assert!(
                (c - qe.coeff(e)).abs() <= 1e-12 * c.abs().max(1.0),
                "mismatch at {e}: {c} vs {}",
                qe.coeff(e)
            );
        }
    }
}
