//! Exact arithmetic on the exponent lattice `{i + j*alpha : i, j in N}`.
//!
//! The fractional order `alpha` is kept as a reduced rational `p/q` so
//! that exponent equality is exact. Two pairs `(i, j)` can name the same
//! exponent (for alpha = 1/2, `1 + 0*alpha = 0 + 2*alpha`); the canonical
//! representative is the one with `j < q`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// The fractional order `alpha = p/q`, reduced, with `0 < p/q < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alpha {
    p: u64,
    q: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LatticeError {
    /// alpha outside the open interval (0, 1)
    AlphaOutOfRange { p: u64, q: u64 },
    ZeroDenominator,
    /// n*alpha <= 1, so m = 0 and there is no singular expansion to build
    NoSingularPart { n: u32 },
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::AlphaOutOfRange { p, q } => {
                write!(f, "alpha must lie in (0,1); got {p}/{q}")
            }
            LatticeError::ZeroDenominator => write!(f, "alpha denominator must be nonzero"),
            LatticeError::NoSingularPart { n } => write!(
                f,
                "m = 0 for n = {n}: no singular expansion needed below C^0"
            ),
        }
    }
}

impl std::error::Error for LatticeError {}

impl Alpha {
    pub fn new(p: u64, q: u64) -> Result<Self, LatticeError> {
        if q == 0 {
            return Err(LatticeError::ZeroDenominator);
        }
        if p == 0 || p >= q {
            return Err(LatticeError::AlphaOutOfRange { p, q });
        }
        let g = gcd(p, q);
        Ok(Alpha { p: p / g, q: q / g })
    }

    /// Best rational approximation of a decimal alpha by continued
    /// fractions, with denominator bounded by `max_den`.
    pub fn from_f64(value: f64, max_den: u64) -> Result<Self, LatticeError> {
        if !(value > 0.0 && value < 1.0) {
            return Err(LatticeError::AlphaOutOfRange { p: 0, q: 1 });
        }
        // continued fraction convergents of `value`
        let (mut h0, mut h1): (u64, u64) = (0, 1);
        let (mut k0, mut k1): (u64, u64) = (1, 0);
        let mut x = value;
        for _ in 0..64 {
            let a = x.floor() as u64;
            let h2 = a.checked_mul(h1).and_then(|v| v.checked_add(h0));
            let k2 = a.checked_mul(k1).and_then(|v| v.checked_add(k0));
            let (h2, k2) = match (h2, k2) {
                (Some(h), Some(k)) if k <= max_den => (h, k),
                _ => break,
            };
            h0 = h1;
            h1 = h2;
            k0 = k1;
            k1 = k2;
            let frac = x - a as f64;
            if frac.abs() < 1e-15 || (h1 as f64 / k1 as f64 - value).abs() < 1e-15 {
                break;
            }
            x = 1.0 / frac;
        }
        Alpha::new(h1, k1)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.p), BigInt::from(self.q))
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// A lattice exponent `i + j*alpha`, stored canonically (`0 <= j < q`).
///
/// The integer part may be negative (down to values > -1) so that the
/// weight factors `x^{gamma - 1}` of the series machinery fit in the
/// same type; lattice construction itself only emits values >= 0.
#[derive(Debug, Clone)]
pub struct Exponent {
    i: i64,
    j: u64,
    ratio: BigRational,
}

impl Exponent {
    pub fn new(i: i64, j: u64, alpha: &Alpha) -> Self {
        // canonical representative: j reduced mod q, integer part absorbs
        // whole multiples of alpha's denominator
        let carry = (j / alpha.q) as i64;
        let j = j % alpha.q;
        let i = i + carry * alpha.p as i64;
        let ratio = BigRational::new(
            BigInt::from(i) * BigInt::from(alpha.q) + BigInt::from(j) * BigInt::from(alpha.p),
            BigInt::from(alpha.q),
        );
        Exponent { i, j, ratio }
    }

    pub fn zero(alpha: &Alpha) -> Self {
        Exponent::new(0, 0, alpha)
    }

    pub fn from_int(i: i64, alpha: &Alpha) -> Self {
        Exponent::new(i, 0, alpha)
    }

    pub fn i(&self) -> i64 {
        self.i
    }

    pub fn j(&self) -> u64 {
        self.j
    }

    pub fn ratio(&self) -> &BigRational {
        &self.ratio
    }

    pub fn value(&self) -> f64 {
        self.ratio.numer().to_f64().unwrap_or(f64::NAN) / self.ratio.denom().to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_integer(&self) -> bool {
        self.ratio.denom().is_one()
    }

    pub fn add(&self, other: &Exponent, alpha: &Alpha) -> Exponent {
        Exponent::new(self.i + other.i, self.j + other.j, alpha)
    }

    pub fn add_int(&self, k: i64, alpha: &Alpha) -> Exponent {
        Exponent::new(self.i + k, self.j, alpha)
    }

    pub fn add_alpha(&self, alpha: &Alpha) -> Exponent {
        Exponent::new(self.i, self.j + 1, alpha)
    }
}

impl PartialEq for Exponent {
    fn eq(&self, other: &Self) -> bool {
        self.ratio == other.ratio
    }
}

impl Eq for Exponent {}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ratio.cmp(&other.ratio)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ratio.denom().is_one() {
            write!(f, "{}", self.ratio.numer())
        } else {
            write!(f, "{}/{}", self.ratio.numer(), self.ratio.denom())
        }
    }
}

/// The regularity data derived from `(alpha, n)`: the order `m`, the
/// singular exponents `gamma_1 < ... < gamma_J` in `(0, m)`, and the
/// indices `theta` of the non-integer ones.
#[derive(Debug, Clone)]
pub struct LatticeSummary {
    pub alpha: Alpha,
    pub n: u32,
    pub m: u32,
    pub gammas: Vec<Exponent>,
    /// 0-based indices into `gammas` with non-integer exponent
    pub theta: Vec<usize>,
}

impl LatticeSummary {
    pub fn j_count(&self) -> usize {
        self.gammas.len()
    }
}

/// m = max{k in N : k < n*alpha}, and the exponent set `{i + j*alpha} ∩ (0, m)`.
pub fn build_lattice(alpha: &Alpha, n: u32) -> Result<LatticeSummary, LatticeError> {
    let np = n as u64 * alpha.p;
    // largest integer strictly below n*p/q
    let m = ((np - 1) / alpha.q) as u32;
    if m == 0 {
        return Err(LatticeError::NoSingularPart { n });
    }
    let mut set = std::collections::BTreeSet::new();
    let j_max = (m as u64 * alpha.q) / alpha.p;
    for i in 0..m as i64 {
        for j in 0..=j_max {
            let e = Exponent::new(i, j, alpha);
            let v = e.ratio();
            if v > &BigRational::zero() && v < &BigRational::from(BigInt::from(m)) {
                set.insert(e);
            }
        }
    }
    let gammas: Vec<Exponent> = set.into_iter().collect();
    let theta = gammas
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_integer())
        .map(|(k, _)| k)
        .collect();
    Ok(LatticeSummary {
        alpha: *alpha,
        n,
        m,
        gammas,
        theta,
    })
}

/// All exponents `i + j*alpha` with `i <= n-1`, `j >= 1`, value <= cutoff,
/// together with the gammas of the lattice. This is the support on which
/// the truncated series of Q lives.
pub fn extended_lattice(alpha: &Alpha, n: u32, cutoff: &Exponent) -> Vec<Exponent> {
    assert!(cutoff.ratio() > &BigRational::zero(), "cutoff must be positive");
    let mut set = std::collections::BTreeSet::new();
    if let Ok(summary) = build_lattice(alpha, n) {
        for g in summary.gammas {
            if g.ratio() <= cutoff.ratio() {
                set.insert(g);
            }
        }
    }
    let cutoff_f = cutoff.value();
    let j_max = (cutoff_f / alpha.value()).floor() as u64 + 1;
    for i in 0..n as i64 {
        for j in 1..=j_max {
            let e = Exponent::new(i, j, alpha);
            if e.ratio() <= cutoff.ratio() {
                set.insert(e);
            }
        }
    }
    set.into_iter().collect()
}

/// Floating value of `i + j * p/q`.
pub fn exponent_value(e: &Exponent, _alpha: &Alpha) -> f64 {
    e.value()
}
