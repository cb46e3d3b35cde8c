//! Sparse multivariate polynomials over exact rationals.
//!
//! Coefficient polynomials of the exponential collection and the algebraic
//! system live here. Factoring is deliberately limited: rational and monomial
//! content, quotient-by-coefficient splits for degree one, and discriminant
//! factoring for degree two per variable. That is enough for every system
//! the tanh ansatz produces on the builtin corpus; no Groebner machinery.

use crate::expr::{nf_to_expr, to_nf, Expr};
use crate::symbol::{rat_int, rat_sqrt, Rational, Symbol};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Monomial: symbol -> positive exponent.
pub type PMono = BTreeMap<Symbol, u32>;

fn mono_total_degree(m: &PMono) -> u32 {
    m.values().sum()
}

/// Graded lexicographic order; compatible with multiplication, which the
/// greedy division and square-root loops rely on.
fn mono_cmp(a: &PMono, b: &PMono) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match mono_total_degree(a).cmp(&mono_total_degree(b)) {
        Ordering::Equal => {}
        o => return o,
    }
    let keys: BTreeSet<&Symbol> = a.keys().chain(b.keys()).collect();
    for s in keys {
        let ea = a.get(s).copied().unwrap_or(0);
        let eb = b.get(s).copied().unwrap_or(0);
        match ea.cmp(&eb) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}

fn mono_mul(a: &PMono, b: &PMono) -> PMono {
    let mut out = a.clone();
    for (s, e) in b {
        *out.entry(s.clone()).or_insert(0) += e;
    }
    out
}

/// a / b if every exponent of b fits inside a.
fn mono_div(a: &PMono, b: &PMono) -> Option<PMono> {
    let mut out = a.clone();
    for (s, e) in b {
        match out.get_mut(s) {
            Some(ea) if *ea >= *e => {
                *ea -= e;
                if *ea == 0 {
                    out.remove(s);
                }
            }
            _ => return None,
        }
    }
    Some(out)
}

/// Sparse multivariate polynomial with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiPoly {
    terms: BTreeMap<PMono, Rational>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(PMono::new(), c);
        }
        MultiPoly { terms }
    }

    pub fn one() -> Self {
        MultiPoly::constant(rat_int(1))
    }

    pub fn from_symbol(s: &Symbol) -> Self {
        let mut m = PMono::new();
        m.insert(s.clone(), 1);
        let mut terms = BTreeMap::new();
        terms.insert(m, rat_int(1));
        MultiPoly { terms }
    }

    pub fn monomial(m: PMono, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MultiPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PMono, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Some(c) if the polynomial has no symbols.
    pub fn as_constant(&self) -> Option<Rational> {
        if self.terms.is_empty() {
            return Some(Rational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&PMono::new()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            out.extend(m.keys().cloned());
        }
        out
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(mono_total_degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, s: &Symbol) -> u32 {
        self.terms
            .keys()
            .map(|m| m.get(s).copied().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let e = terms.entry(m.clone()).or_insert_with(Rational::zero);
            *e += c;
        }
        terms.retain(|_, c| !c.is_zero());
        MultiPoly { terms }
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), -c.clone()))
            .collect();
        MultiPoly { terms }
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, k)| (m.clone(), k * c))
            .collect();
        MultiPoly { terms }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut terms: BTreeMap<PMono, Rational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = mono_mul(ma, mb);
                let e = terms.entry(m).or_insert_with(Rational::zero);
                *e += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        MultiPoly { terms }
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut out = MultiPoly::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Leading term under the graded order.
    pub fn leading(&self) -> Option<(&PMono, &Rational)> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| mono_cmp(a, b))
    }

    /// Coefficients as a univariate polynomial in `s` (index = power).
    pub fn as_univariate(&self, s: &Symbol) -> Vec<MultiPoly> {
        let d = self.degree_in(s) as usize;
        let mut out = vec![MultiPoly::zero(); d + 1];
        for (m, c) in &self.terms {
            let k = m.get(s).copied().unwrap_or(0) as usize;
            let mut rest = m.clone();
            rest.remove(s);
            out[k] = out[k].add(&MultiPoly::monomial(rest, c.clone()));
        }
        out
    }

    /// Rational content: positive gcd of all coefficients, with the sign of
    /// the leading coefficient folded in so `self = content * primitive` and
    /// the primitive part has positive leading coefficient.
    pub fn rational_content(&self) -> Rational {
        let mut num = num_bigint::BigInt::zero();
        let mut den = num_bigint::BigInt::one();
        for c in self.terms.values() {
            num = num_integer_gcd(&num, c.numer());
            den = num_integer_lcm(&den, c.denom());
        }
        if num.is_zero() {
            return Rational::one();
        }
        let mut content = Rational::new(num, den);
        if let Some((_, lc)) = self.leading() {
            if lc.is_negative() {
                content = -content;
            }
        }
        content
    }

    /// Minimal exponent of each symbol across all terms.
    pub fn monomial_content(&self) -> PMono {
        let mut iter = self.terms.keys();
        let mut out = match iter.next() {
            Some(first) => first.clone(),
            None => return PMono::new(),
        };
        for m in iter {
            out = out
                .into_iter()
                .filter_map(|(s, e)| {
                    let other = m.get(&s).copied().unwrap_or(0);
                    let min = e.min(other);
                    (min > 0).then_some((s, min))
                })
                .collect();
            if out.is_empty() {
                break;
            }
        }
        out
    }

    /// `self / divisor` when the division is exact.
    pub fn exact_div(&self, divisor: &MultiPoly) -> Option<MultiPoly> {
        if divisor.is_zero() {
            return None;
        }
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&(Rational::one() / c)));
        }
        let (ld_m, ld_c) = divisor.leading().unwrap();
        let ld_m = ld_m.clone();
        let ld_c = ld_c.clone();
        let mut rem = self.clone();
        let mut quot = MultiPoly::zero();
        let mut guard = self.num_terms() * divisor.num_terms() + self.num_terms() + 16;
        while !rem.is_zero() {
            if guard == 0 {
                return None;
            }
            guard -= 1;
            let (lr_m, lr_c) = rem.leading().unwrap();
            let q_mono = mono_div(lr_m, &ld_m)?;
            let q_coeff = lr_c / &ld_c;
            let t = MultiPoly::monomial(q_mono, q_coeff);
            quot = quot.add(&t);
            rem = rem.sub(&t.mul(divisor));
        }
        Some(quot)
    }

    /// Polynomial square root, if the polynomial is a perfect square.
    pub fn sqrt(&self) -> Option<MultiPoly> {
        if self.is_zero() {
            return Some(MultiPoly::zero());
        }
        let (lm, lc) = self.leading()?;
        let root_c = rat_sqrt(lc)?;
        let mut root_m = PMono::new();
        for (s, e) in lm {
            if e % 2 != 0 {
                return None;
            }
            root_m.insert(s.clone(), e / 2);
        }
        let s_lt = MultiPoly::monomial(root_m.clone(), root_c.clone());
        let mut s = s_lt.clone();
        let two_lc = rat_int(2) * root_c;
        let mut guard = self.num_terms() * 4 + 16;
        loop {
            let r = self.sub(&s.mul(&s));
            if r.is_zero() {
                return Some(s);
            }
            if guard == 0 {
                return None;
            }
            guard -= 1;
            let (rm, rc) = r.leading().unwrap();
            let t_mono = mono_div(rm, &root_m)?;
            let t = MultiPoly::monomial(t_mono, rc / &two_lc);
            if t.is_zero() {
                return None;
            }
            s = s.add(&t);
        }
    }

    /// Substitutes a polynomial for a symbol.
    pub fn substitute(&self, s: &Symbol, value: &MultiPoly) -> MultiPoly {
        let coeffs = self.as_univariate(s);
        let mut out = MultiPoly::zero();
        let mut power = MultiPoly::one();
        for c in coeffs {
            out = out.add(&c.mul(&power));
            power = power.mul(value);
        }
        out
    }

    /// Substitutes `s := num/den` and clears the denominator:
    /// returns `self(s -> num/den) * den^deg_s(self)`, a polynomial.
    pub fn substitute_cleared(&self, s: &Symbol, num: &MultiPoly, den: &MultiPoly) -> MultiPoly {
        let coeffs = self.as_univariate(s);
        let d = coeffs.len() - 1;
        let mut out = MultiPoly::zero();
        for (k, c) in coeffs.into_iter().enumerate() {
            // c * num^k * den^(d-k)
            let t = c.mul(&num.pow(k as u32)).mul(&den.pow((d - k) as u32));
            out = out.add(&t);
        }
        out
    }

    pub fn eval(&self, env: &BTreeMap<Symbol, f64>) -> crate::error::Result<f64> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (s, e) in m {
                let v = env
                    .get(s)
                    .copied()
                    .ok_or_else(|| crate::error::Error::UnboundSymbol(s.name().to_string()))?;
                t *= v.powi(*e as i32);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Exact evaluation over rationals.
    pub fn eval_exact(&self, env: &BTreeMap<Symbol, Rational>) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (s, e) in m {
                let v = env.get(s)?;
                for _ in 0..*e {
                    t *= v;
                }
            }
            acc += t;
        }
        Some(acc)
    }

    /// Primitive part: content (rational and monomial) removed, leading
    /// coefficient positive. Returns (rational content, monomial content,
    /// primitive polynomial).
    pub fn primitive(&self) -> (Rational, PMono, MultiPoly) {
        if self.is_zero() {
            return (Rational::one(), PMono::new(), MultiPoly::zero());
        }
        let rc = self.rational_content();
        let mc = self.monomial_content();
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let m2 = mono_div(m, &mc).expect("monomial content divides");
            terms.insert(m2, c / &rc);
        }
        (rc, mc, MultiPoly { terms })
    }

    /// Content-free irreducible-for-our-purposes factors with multiplicity.
    /// The rational content is dropped; monomial content appears as
    /// single-symbol factors.
    pub fn factor(&self) -> Vec<(MultiPoly, u32)> {
        let mut out: Vec<(MultiPoly, u32)> = Vec::new();
        if self.is_zero() {
            return out;
        }
        let (_, mc, prim) = self.primitive();
        for (s, e) in &mc {
            push_factor(&mut out, MultiPoly::from_symbol(s), *e);
        }
        if prim.as_constant().is_some() {
            return out;
        }
        for f in split_factors(&prim) {
            push_factor(&mut out, f, 1);
        }
        out
    }
}

fn push_factor(out: &mut Vec<(MultiPoly, u32)>, f: MultiPoly, mult: u32) {
    for (g, m) in out.iter_mut() {
        if *g == f {
            *m += mult;
            return;
        }
    }
    out.push((f, mult));
}

/// Recursive splitting of a primitive polynomial.
fn split_factors(p: &MultiPoly) -> Vec<MultiPoly> {
    for s in p.symbols() {
        match p.degree_in(&s) {
            1 => {
                let coeffs = p.as_univariate(&s);
                let a = &coeffs[1];
                let b = &coeffs[0];
                if a.as_constant().is_some() {
                    continue;
                }
                // p = a*s + b = a*(s + b/a) when a | b
                if let Some(q) = b.exact_div(a) {
                    let linear = MultiPoly::from_symbol(&s).add(&q);
                    let mut fs = split_recurse(a);
                    fs.extend(split_recurse(&linear));
                    return fs;
                }
            }
            2 => {
                let coeffs = p.as_univariate(&s);
                let a = coeffs[2].clone();
                let b = coeffs[1].clone();
                let c = coeffs[0].clone();
                let disc = b.mul(&b).sub(&a.mul(&c).scale(&rat_int(4)));
                if let Some(d) = disc.sqrt() {
                    // 4a*p = (2a*s + b - d)(2a*s + b + d)
                    let two_a_s = MultiPoly::from_symbol(&s).mul(&a).scale(&rat_int(2));
                    let f1 = two_a_s.add(&b).sub(&d);
                    let (_, _, f1p) = f1.primitive();
                    if f1p.as_constant().is_none() {
                        if let Some(q) = p.exact_div(&f1p) {
                            let mut fs = split_recurse(&f1p);
                            fs.extend(split_recurse(&q));
                            return fs;
                        }
                    }
                }
            }
            _ => {}
        }
    }
    vec![p.clone()]
}

fn split_recurse(p: &MultiPoly) -> Vec<MultiPoly> {
    let (_, mc, prim) = p.primitive();
    let mut out: Vec<MultiPoly> = mc.keys().map(MultiPoly::from_symbol).collect();
    // multiplicity flattened: repeated symbols re-merged by the caller
    for (s, e) in &mc {
        for _ in 1..*e {
            out.push(MultiPoly::from_symbol(s));
        }
    }
    if prim.as_constant().is_none() {
        out.extend(split_factors(&prim));
    }
    out
}

fn num_integer_gcd(a: &num_bigint::BigInt, b: &num_bigint::BigInt) -> num_bigint::BigInt {
    use num_bigint::BigInt;
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = std::mem::replace(&mut b, r);
    }
    let _: &BigInt = &a;
    a
}

fn num_integer_lcm(a: &num_bigint::BigInt, b: &num_bigint::BigInt) -> num_bigint::BigInt {
    if a.is_zero() || b.is_zero() {
        return num_bigint::BigInt::zero();
    }
    let g = num_integer_gcd(a, b);
    (a / &g * b).abs()
}

// ---------------------------------------------------------------------------
// Row reduction over the monomial basis
// ---------------------------------------------------------------------------

/// Gaussian elimination treating each distinct monomial as a column.
/// Row operations preserve the common zero set; they routinely turn the
/// collected coefficient systems into factorable equations.
pub fn row_reduce(eqs: &[MultiPoly]) -> Vec<MultiPoly> {
    let mut columns: BTreeSet<PMono> = BTreeSet::new();
    for e in eqs {
        columns.extend(e.terms.keys().cloned());
    }
    let mut cols: Vec<PMono> = columns.into_iter().collect();
    // eliminate high-degree monomials first
    cols.sort_by(|a, b| mono_cmp(b, a));
    let col_index: BTreeMap<&PMono, usize> = cols.iter().enumerate().map(|(i, m)| (m, i)).collect();

    let mut rows: Vec<Vec<Rational>> = eqs
        .iter()
        .map(|e| {
            let mut row = vec![Rational::zero(); cols.len()];
            for (m, c) in &e.terms {
                row[col_index[m]] = c.clone();
            }
            row
        })
        .collect();

    let mut pivot_row = 0;
    for col in 0..cols.len() {
        let Some(r) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, r);
        let inv = Rational::one() / rows[pivot_row][col].clone();
        for v in rows[pivot_row].iter_mut() {
            *v *= &inv;
        }
        for r2 in 0..rows.len() {
            if r2 != pivot_row && !rows[r2][col].is_zero() {
                let factor = rows[r2][col].clone();
                for c2 in 0..cols.len() {
                    let delta = &rows[pivot_row][c2] * &factor;
                    rows[r2][c2] -= delta;
                }
            }
        }
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }

    let mut out = Vec::new();
    for row in rows {
        let mut terms = BTreeMap::new();
        for (i, c) in row.into_iter().enumerate() {
            if !c.is_zero() {
                terms.insert(cols[i].clone(), c);
            }
        }
        let p = MultiPoly { terms };
        if !p.is_zero() {
            // scale by rational content only; monomial content carries zeros
            // of the equation and must stay
            let rc = p.rational_content();
            out.push(p.scale(&(Rational::one() / rc)));
        }
    }
    out.sort();
    out.dedup();
    out
}

// ---------------------------------------------------------------------------
// Expr conversions
// ---------------------------------------------------------------------------

impl MultiPoly {
    /// Converts an expression that is a pure polynomial in symbols
    /// (no functions, derivatives or reciprocals).
    pub fn from_expr(e: &Expr) -> Option<MultiPoly> {
        let nf = to_nf(e);
        let mut terms = BTreeMap::new();
        for (mono, coeff) in nf {
            let mut m = PMono::new();
            for (atom, exp) in mono {
                match atom {
                    Expr::Sym(s) if exp > 0 => {
                        m.insert(s, exp as u32);
                    }
                    _ => return None,
                }
            }
            terms.insert(m, coeff);
        }
        Some(MultiPoly { terms })
    }

    pub fn to_expr(&self) -> Expr {
        let mut nf = crate::expr::nf_zero();
        for (m, c) in &self.terms {
            let mut mono = BTreeMap::new();
            for (s, e) in m {
                mono.insert(Expr::Sym(s.clone()), *e as i32);
            }
            nf.insert(mono, c.clone());
        }
        nf_to_expr(nf)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

// ---------------------------------------------------------------------------
// Rational functions
// ---------------------------------------------------------------------------

/// Quotient of polynomials. Branch assignments are values of this type:
/// rational functions of the parameters and the branch's free symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFn {
    pub num: MultiPoly,
    pub den: MultiPoly,
}

impl RationalFn {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut num = num;
        let mut den = den;
        if let Some(c) = den.as_constant() {
            num = num.scale(&(Rational::one() / c));
            den = MultiPoly::one();
        } else {
            // light cleanup: pull out shared content
            let (rc_n, mc_n, _) = num.primitive();
            let (rc_d, mc_d, _) = den.primitive();
            let mut shared = PMono::new();
            for (s, e) in &mc_n {
                if let Some(e2) = mc_d.get(s) {
                    shared.insert(s.clone(), *(e.min(e2)));
                }
            }
            if !shared.is_empty() {
                let div = MultiPoly::monomial(shared, rat_int(1));
                num = num.exact_div(&div).unwrap();
                den = den.exact_div(&div).unwrap();
            }
            let scale = rc_d.clone();
            let _ = rc_n;
            num = num.scale(&(Rational::one() / scale.clone()));
            den = den.scale(&(Rational::one() / scale));
            if let Some(q) = num.exact_div(&den) {
                num = q;
                den = MultiPoly::one();
            }
        }
        RationalFn { num, den }
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        RationalFn { num: p, den: MultiPoly::one() }
    }

    pub fn from_rational(c: Rational) -> Self {
        Self::from_poly(MultiPoly::constant(c))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut s = self.num.symbols();
        s.extend(self.den.symbols());
        s
    }

    pub fn add(&self, other: &RationalFn) -> RationalFn {
        RationalFn::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn mul(&self, other: &RationalFn) -> RationalFn {
        RationalFn::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn div(&self, other: &RationalFn) -> RationalFn {
        assert!(!other.num.is_zero(), "division by the zero rational function");
        RationalFn::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn eval(&self, env: &BTreeMap<Symbol, f64>) -> crate::error::Result<f64> {
        let n = self.num.eval(env)?;
        let d = self.den.eval(env)?;
        let v = n / d;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(crate::error::Error::NonFiniteResult)
        }
    }

    pub fn to_expr(&self) -> Expr {
        if self.is_polynomial() {
            self.num.to_expr()
        } else {
            Expr::product(vec![
                self.num.to_expr(),
                Expr::pow(self.den.to_expr(), -1),
            ])
        }
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// Substitutes rational-function values into a polynomial, returning a
/// rational function.
pub fn poly_subst_ratfns(p: &MultiPoly, map: &BTreeMap<Symbol, RationalFn>) -> RationalFn {
    let mut acc = RationalFn::from_rational(Rational::zero());
    for (m, c) in p.terms() {
        let mut t = RationalFn::from_rational(c.clone());
        for (s, e) in m {
            let v = map
                .get(s)
                .cloned()
                .unwrap_or_else(|| RationalFn::from_poly(MultiPoly::from_symbol(s)));
            for _ in 0..*e {
                t = t.mul(&v);
            }
        }
        acc = acc.add(&t);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{rat, SymbolKind};

    fn s(name: &str) -> Symbol {
        Symbol::new(name, SymbolKind::AnsatzUnknown)
    }
    fn p(name: &str) -> Symbol {
        Symbol::param(name)
    }

    #[test]
    fn arithmetic_basics() {
        let x = MultiPoly::from_symbol(&s("x"));
        let y = MultiPoly::from_symbol(&s("y"));
        let sum = x.add(&y);
        let prod = sum.mul(&x.sub(&y));
        let expect = x.mul(&x).sub(&y.mul(&y));
        assert_eq!(prod, expect);
        assert_eq!(prod.total_degree(), 2);
        assert_eq!(prod.degree_in(&s("x")), 2);
    }

    #[test]
    fn exact_division() {
        let x = MultiPoly::from_symbol(&s("x"));
        let y = MultiPoly::from_symbol(&s("y"));
        let p = x.add(&y).mul(&x.sub(&y));
        assert_eq!(p.exact_div(&x.add(&y)), Some(x.sub(&y)));
        assert_eq!(p.exact_div(&x), None);
    }

    #[test]
    fn sqrt_of_perfect_square() {
        let x = MultiPoly::from_symbol(&s("x"));
        let y = MultiPoly::from_symbol(&s("y"));
        let b = x.add(&y.scale(&rat(2, 1)));
        assert_eq!(b.mul(&b).sqrt(), Some(b.clone()));
        assert_eq!(x.mul(&y).sqrt(), None);
    }

    #[test]
    fn factor_monomial_content() {
        // U1*V0 - U1*v  ->  U1 * (V0 - v)
        let u1 = s("U1");
        let v0 = s("V0");
        let v = Symbol::new("v", SymbolKind::WaveSpeed);
        let poly = MultiPoly::from_symbol(&u1)
            .mul(&MultiPoly::from_symbol(&v0).sub(&MultiPoly::from_symbol(&v)));
        let f = poly.factor();
        assert_eq!(f.len(), 2);
        assert!(f.iter().any(|(g, m)| *m == 1 && *g == MultiPoly::from_symbol(&u1)));
    }

    #[test]
    fn factor_difference_of_squares() {
        let x = MultiPoly::from_symbol(&s("x"));
        let y = MultiPoly::from_symbol(&s("y"));
        let poly = x.mul(&x).sub(&y.mul(&y));
        let f = poly.factor();
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn factor_quadratic_with_zero_root() {
        // x^2 + 2*a*x = x*(x + 2a)
        let x = MultiPoly::from_symbol(&s("x"));
        let a = MultiPoly::from_symbol(&p("a"));
        let poly = x.mul(&x).add(&a.mul(&x).scale(&rat(2, 1)));
        let f = poly.factor();
        assert_eq!(f.len(), 2);
        assert!(f.iter().any(|(g, _)| *g == x));
    }

    #[test]
    fn irreducible_stays_whole() {
        // x^2 + y^2 has no rational factorization
        let x = MultiPoly::from_symbol(&s("x"));
        let y = MultiPoly::from_symbol(&s("y"));
        let poly = x.mul(&x).add(&y.mul(&y));
        let f = poly.factor();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].1, 1);
    }

    #[test]
    fn row_reduce_combines_rows() {
        // {2K V1 - 2v V1 - s V1, 2K V1 - 2v V1 + s V1} reduces to
        // equations containing {K V1 - v V1, s V1} up to scaling
        let k = MultiPoly::from_symbol(&p("K"));
        let v = MultiPoly::from_symbol(&Symbol::new("v", SymbolKind::WaveSpeed));
        let v1 = MultiPoly::from_symbol(&s("V1"));
        let sig = MultiPoly::from_symbol(&p("sigma"));
        let a = k.sub(&v).mul(&v1).scale(&rat(2, 1));
        let b = sig.mul(&v1);
        let e1 = a.sub(&b);
        let e2 = a.add(&b);
        let red = row_reduce(&[e1, e2]);
        assert_eq!(red.len(), 2);
        // each reduced row factors with V1 as a monomial factor
        for r in &red {
            assert!(r.factor().iter().any(|(g, _)| *g == v1));
        }
    }

    #[test]
    fn ratfn_simplifies_constants() {
        let x = MultiPoly::from_symbol(&s("x"));
        let r = RationalFn::new(x.scale(&rat(2, 1)), MultiPoly::constant(rat(2, 1)));
        assert!(r.is_polynomial());
        assert_eq!(r.num, x);
    }

    #[test]
    fn expr_round_trip() {
        let u1 = s("U1");
        let nu = p("nu");
        let poly = MultiPoly::from_symbol(&u1)
            .mul(&MultiPoly::from_symbol(&nu))
            .add(&MultiPoly::constant(rat(1, 2)));
        let e = poly.to_expr();
        assert_eq!(MultiPoly::from_expr(&e), Some(poly));
    }
}
