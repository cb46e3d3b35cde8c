//! Symbols and exact rational scalars.
//!
//! Every coefficient in the symbolic stages is a [`Rational`]
//! (arbitrary-precision, always reduced, positive denominator); floats only
//! appear in the numeric verifier.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Exact rational scalar used for all symbolic coefficients.
pub type Rational = num_rational::BigRational;

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational `n/d`. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Renders a rational as `p` or `p/q`.
pub fn rat_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Lossy conversion to `f64` for the verifier.
pub fn rat_to_f64(r: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Parses `p` or `p/q` into a rational. Returns None on malformed input
/// or a zero denominator.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

/// If `r` is a perfect square in Q, returns its nonnegative square root.
pub fn rat_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let num = r.numer().sqrt();
    let den = r.denom().sqrt();
    if &(&num * &num) == r.numer() && &(&den * &den) == r.denom() {
        Some(Rational::new(num, den))
    } else {
        None
    }
}

/// What role a symbol plays in a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    /// Named physical or scheme parameter (`nu`, `sigma`, `K`, ...).
    Parameter,
    /// Phase shift `x0` of the sech component.
    PhaseShift,
    /// Wave speed `v`.
    WaveSpeed,
    /// The integration constant `C` from the once-integrated ODE.
    IntegrationConstant,
    /// Ansatz unknown (`U1`, `V1`, `C1`, `V0`).
    AnsatzUnknown,
    /// The dependent field `u`.
    Field,
    /// Independent variable (`x`, `t`, `xi`).
    IndependentVar,
}

impl SymbolKind {
    fn rank(self) -> u8 {
        match self {
            SymbolKind::Parameter => 0,
            SymbolKind::PhaseShift => 1,
            SymbolKind::WaveSpeed => 2,
            SymbolKind::IntegrationConstant => 3,
            SymbolKind::AnsatzUnknown => 4,
            SymbolKind::Field => 5,
            SymbolKind::IndependentVar => 6,
        }
    }
}

/// A named symbol with a fixed kind.
///
/// Ordering is by kind rank first (parameters < wave speed < integration
/// constant < ansatz unknowns < field < independent vars), then by name;
/// this is the total order behind every canonical form in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    name: String,
    kind: SymbolKind,
}

impl Symbol {
    pub fn new(name: impl Into<String>, kind: SymbolKind) -> Self {
        Symbol { name: name.into(), kind }
    }

    pub fn param(name: impl Into<String>) -> Self {
        Symbol::new(name, SymbolKind::Parameter)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.kind
            .rank()
            .cmp(&other.kind.rank())
            .then_with(|| self.name.cmp(&other.name))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Checks a rational is in lowest terms with positive denominator.
/// `num_rational` maintains this; the helper exists for property tests.
pub fn is_canonical(r: &Rational) -> bool {
    if r.is_zero() {
        return r.numer().is_zero() && r.denom().is_one();
    }
    r.denom().is_positive() && &r.reduced() == r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_reduce() {
        assert_eq!(rat(2, 4), rat(1, 2));
        assert_eq!(rat(3, -6), rat(-1, 2));
        assert_eq!(rat_to_string(&rat(-1, 2)), "-1/2");
        assert!(is_canonical(&rat(6, 4)));
    }

    #[test]
    fn sqrt_detects_squares() {
        assert_eq!(rat_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(rat_sqrt(&rat(2, 1)), None);
        assert_eq!(rat_sqrt(&rat(-4, 1)), None);
    }

    #[test]
    fn symbol_order_by_kind_then_name() {
        let nu = Symbol::param("nu");
        let v = Symbol::new("v", SymbolKind::WaveSpeed);
        let c = Symbol::new("C", SymbolKind::IntegrationConstant);
        let u1 = Symbol::new("U1", SymbolKind::AnsatzUnknown);
        let xi = Symbol::new("xi", SymbolKind::IndependentVar);
        assert!(nu < v && v < c && c < u1 && u1 < xi);
        assert!(Symbol::param("a") < Symbol::param("b"));
    }
}
