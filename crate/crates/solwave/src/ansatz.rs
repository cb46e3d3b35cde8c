//! The hyperbolic ansatz: order balancing, ansatz construction, rewriting in
//! powers of `E = e^(C1*xi)` and collection of the coefficient system.
//!
//! After substituting the ansatz into the integrated ODE, tanh/sech/sinh/
//! cosh become rational functions of `E`. Multiplying by the minimal
//! `(1+E^2)^d * E^q` clears every denominator; since `E > 0` and `1+E^2 > 0`
//! for real `xi`, the cleared polynomial vanishes identically iff the
//! original equation does, so each coefficient of `E^k` must be zero.

use crate::error::{Error, Result};
use crate::expr::{normalize, substitute, to_nf, Expr, FuncKind};
use crate::poly::{MultiPoly, PMono};
use crate::reduce::TravelingOde;
use crate::symbol::{rat_int, Rational, Symbol, SymbolKind};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// The tanh/sech ansatz of a given order with a single scale `C1`:
/// `u(xi) = sum_i U_i tanh^i(C1 xi) + V_i sech^i(C1 (xi + x0)) + V0`.
#[derive(Debug, Clone)]
pub struct AnsatzSpec {
    pub order: u32,
    pub tanh_amps: Vec<Symbol>,
    pub sech_amps: Vec<Symbol>,
    pub scale: Symbol,
    pub offset: Symbol,
    pub wave_speed: Symbol,
    pub xi: Symbol,
    pub phase: Rational,
}

impl AnsatzSpec {
    pub fn new(order: u32, xi: &Symbol, wave_speed: &Symbol) -> Self {
        assert!(order >= 1, "ansatz order must be at least 1");
        let unknown = |name: String| Symbol::new(name, SymbolKind::AnsatzUnknown);
        AnsatzSpec {
            order,
            tanh_amps: (1..=order).map(|i| unknown(format!("U{i}"))).collect(),
            sech_amps: (1..=order).map(|i| unknown(format!("V{i}"))).collect(),
            scale: unknown("C1".to_string()),
            offset: unknown("V0".to_string()),
            wave_speed: wave_speed.clone(),
            xi: xi.clone(),
            phase: Rational::zero(),
        }
    }

    pub fn with_phase(mut self, x0: Rational) -> Self {
        self.phase = x0;
        self
    }

    /// Ansatz unknowns in solve-priority order: amplitudes first, then wave
    /// speed, offset and integration constant, the scale last.
    pub fn unknowns_with(&self, constant: Option<&Symbol>) -> Vec<Symbol> {
        let mut out = Vec::new();
        out.extend(self.tanh_amps.iter().cloned());
        out.extend(self.sech_amps.iter().cloned());
        out.push(self.wave_speed.clone());
        out.push(self.offset.clone());
        if let Some(c) = constant {
            out.push(c.clone());
        }
        out.push(self.scale.clone());
        out
    }
}

/// Fixes the ansatz order by power counting in tanh-degree: a factor `u`
/// contributes `n`, each xi-derivative adds 1. The highest-derivative term
/// is balanced against the leading nonlinear term; linear equations take
/// `n = 1`.
pub fn balance_order(ode: &TravelingOde) -> Result<u32> {
    struct TermDegrees {
        field_factors: u32,
        deriv_order: u32,
    }
    let nf = to_nf(&ode.lhs);
    let mut terms = Vec::new();
    for mono in nf.keys() {
        let mut f = 0u32;
        let mut d = 0u32;
        for (atom, exp) in mono {
            match atom {
                Expr::Sym(s) if s.kind() == SymbolKind::Field => f += *exp as u32,
                Expr::Deriv { .. } => {
                    if let Some((_, orders)) = crate::expr::flatten_field_deriv(atom) {
                        let order: u32 = orders.values().sum();
                        f += *exp as u32;
                        d += order * (*exp as u32);
                    }
                }
                _ => {}
            }
        }
        terms.push(TermDegrees { field_factors: f, deriv_order: d });
    }
    let nonlinear = terms
        .iter()
        .filter(|t| t.field_factors >= 2)
        .max_by_key(|t| (t.field_factors, t.deriv_order));
    let Some(nl) = nonlinear else {
        return Ok(1); // linear equation: take the smallest order
    };
    let highest = terms
        .iter()
        .filter(|t| t.deriv_order >= 1)
        .max_by_key(|t| (t.deriv_order, t.field_factors));
    let Some(h) = highest else {
        return Err(Error::AnsatzOrderUndetermined(
            "no derivative term to balance against".into(),
        ));
    };
    // n*f_h + d_h = n*f_nl + d_nl
    if h.field_factors == nl.field_factors {
        return Err(Error::AnsatzOrderUndetermined(
            "highest-derivative and leading nonlinear terms have equal field degree".into(),
        ));
    }
    let df = nl.field_factors as i64 - h.field_factors as i64;
    let dd = h.deriv_order as i64 - nl.deriv_order as i64;
    if dd % df != 0 || dd / df <= 0 {
        return Err(Error::AnsatzOrderUndetermined(format!(
            "balancing gives n = {dd}/{df}, not a positive integer"
        )));
    }
    Ok((dd / df) as u32)
}

/// Builds the ansatz profile for a spec.
pub fn build_ansatz(spec: &AnsatzSpec) -> Expr {
    let scale_xi = Expr::product(vec![Expr::sym(&spec.scale), Expr::sym(&spec.xi)]);
    let sech_arg = if spec.phase.is_zero() {
        scale_xi.clone()
    } else {
        Expr::product(vec![
            Expr::sym(&spec.scale),
            Expr::sum(vec![Expr::sym(&spec.xi), Expr::Const(spec.phase.clone())]),
        ])
    };
    let mut terms = Vec::new();
    for (i, u_i) in spec.tanh_amps.iter().enumerate() {
        let p = i as i32 + 1;
        terms.push(Expr::product(vec![
            Expr::sym(u_i),
            Expr::pow(Expr::func(FuncKind::Tanh, scale_xi.clone()), p),
        ]));
    }
    for (i, v_i) in spec.sech_amps.iter().enumerate() {
        let p = i as i32 + 1;
        terms.push(Expr::product(vec![
            Expr::sym(v_i),
            Expr::pow(Expr::func(FuncKind::Sech, sech_arg.clone()), p),
        ]));
    }
    terms.push(Expr::sym(&spec.offset));
    normalize(&Expr::sum(terms))
}

/// Substitutes the ansatz into the ODE left-hand side.
pub fn substitute_ansatz(ode: &TravelingOde, spec: &AnsatzSpec) -> Result<Expr> {
    let mut bindings = BTreeMap::new();
    bindings.insert(ode.field.clone(), build_ansatz(spec));
    substitute(&ode.lhs, &bindings)
}

/// The denominator-clearing multiplier `(1+E^2)^d * E^q`, with an extra
/// `(1 + E0^2 E^2)^phase_d` when the sech phase is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    pub d: u32,
    pub q: u32,
    pub phase_d: u32,
    pub poly: MultiPoly,
}

/// Phase bookkeeping: `symbol` stands for `e^(C1*x0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseInfo {
    pub symbol: Symbol,
    pub x0: Rational,
}

/// Laurent polynomial in `E = e^(C1*xi)` with coefficient polynomials in
/// the ansatz unknowns and parameters, equal to (input) x (multiplier).
#[derive(Debug, Clone)]
pub struct ExpPolynomial {
    pub terms: BTreeMap<i64, MultiPoly>,
    pub scale: Symbol,
    pub multiplier: Multiplier,
    pub phase: Option<PhaseInfo>,
}

impl ExpPolynomial {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluates the E-polynomial at a point, binding `E = e^(C1*xi)`.
    pub fn eval(&self, env: &BTreeMap<Symbol, f64>, xi_value: f64) -> Result<f64> {
        let env2 = self.extend_env(env, xi_value)?;
        let scale = env[&self.scale];
        let e_val = (scale * xi_value).exp();
        let mut acc = 0.0;
        for (k, coeff) in &self.terms {
            acc += coeff.eval(&env2)? * e_val.powi(*k as i32);
        }
        Ok(acc)
    }

    /// Evaluates the recorded multiplier at a point.
    pub fn eval_multiplier(&self, env: &BTreeMap<Symbol, f64>, xi_value: f64) -> Result<f64> {
        let env2 = self.extend_env(env, xi_value)?;
        self.multiplier.poly.eval(&env2)
    }

    fn extend_env(
        &self,
        env: &BTreeMap<Symbol, f64>,
        xi_value: f64,
    ) -> Result<BTreeMap<Symbol, f64>> {
        let scale = *env
            .get(&self.scale)
            .ok_or_else(|| Error::UnboundSymbol(self.scale.name().to_string()))?;
        let mut env2 = env.clone();
        env2.insert(exp_symbol(), (scale * xi_value).exp());
        if let Some(p) = &self.phase {
            let x0 = crate::symbol::rat_to_f64(&p.x0);
            env2.insert(p.symbol.clone(), (scale * x0).exp());
        }
        Ok(env2)
    }
}

impl fmt::Display for ExpPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, coeff) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({coeff})*E^{k}")?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Internal symbol standing for `e^(C1*xi)` during collection.
pub fn exp_symbol() -> Symbol {
    Symbol::new("E", SymbolKind::IndependentVar)
}

fn phase_symbol() -> Symbol {
    Symbol::param("E0")
}

/// Numerator over a denominator kept in factored form. Every denominator
/// factor that mentions E comes from the closed set {E, 1+E^2, 1+E0^2 E^2};
/// E-free factors (parameter monomials) are also allowed.
#[derive(Clone)]
struct Frac {
    num: MultiPoly,
    den: BTreeMap<MultiPoly, u32>,
}

impl Frac {
    fn from_poly(p: MultiPoly) -> Self {
        Frac { num: p, den: BTreeMap::new() }
    }
    fn with_den(num: MultiPoly, den_factor: MultiPoly) -> Self {
        let mut den = BTreeMap::new();
        den.insert(den_factor, 1);
        Frac { num, den }
    }
    fn mul(&self, other: &Frac) -> Frac {
        let mut den = self.den.clone();
        for (f, m) in &other.den {
            *den.entry(f.clone()).or_insert(0) += m;
        }
        Frac { num: self.num.mul(&other.num), den }
    }
    fn add(&self, other: &Frac) -> Frac {
        // common denominator: per-factor maximum multiplicity
        let mut common = self.den.clone();
        for (f, m) in &other.den {
            let e = common.entry(f.clone()).or_insert(0);
            *e = (*e).max(*m);
        }
        let complement = |own: &BTreeMap<MultiPoly, u32>| {
            let mut p = MultiPoly::one();
            for (f, m) in &common {
                let have = own.get(f).copied().unwrap_or(0);
                for _ in have..*m {
                    p = p.mul(f);
                }
            }
            p
        };
        let num = self
            .num
            .mul(&complement(&self.den))
            .add(&other.num.mul(&complement(&other.den)));
        Frac { num, den: common }
    }
    fn inv(&self) -> Result<Frac> {
        if self.num.is_zero() {
            return Err(Error::Internal(
                "division by zero while clearing denominators".into(),
            ));
        }
        // only leaf-level fractions are inverted, so the numerator is small
        let mut num = MultiPoly::one();
        for (f, m) in &self.den {
            for _ in 0..*m {
                num = num.mul(f);
            }
        }
        let rc = self.num.rational_content();
        num = num.scale(&(Rational::one() / rc.clone()));
        let prim = self.num.scale(&(Rational::one() / rc));
        let mut den = BTreeMap::new();
        for (f, m) in prim.factor() {
            if f.as_constant().is_none() {
                *den.entry(f).or_insert(0) += m;
            }
        }
        Ok(Frac { num, den })
    }
    fn pow(&self, k: i32) -> Result<Frac> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut out = Frac::from_poly(MultiPoly::one());
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }
}

/// Decomposes a hyperbolic argument as `scale * xi (+ scale * offset)`.
fn decompose_argument(
    arg: &Expr,
    xi: &Symbol,
) -> std::result::Result<(Symbol, Rational), String> {
    let nf = to_nf(arg);
    let mut scale: Option<Symbol> = None;
    let mut offset = Rational::zero();
    for (mono, coeff) in &nf {
        let syms: Vec<(&Expr, i32)> = mono.iter().map(|(a, e)| (a, *e)).collect();
        let as_sym = |e: &Expr| match e {
            Expr::Sym(s) => Some(s.clone()),
            _ => None,
        };
        match syms.as_slice() {
            [(a, 1), (b, 1)] => {
                // scale * xi term
                let (sa, sb) = (as_sym(a), as_sym(b));
                let pair = match (sa, sb) {
                    (Some(sa), Some(sb)) if &sb == xi => Some(sa),
                    (Some(sa), Some(sb)) if &sa == xi => Some(sb),
                    _ => None,
                };
                let Some(s) = pair else {
                    return Err(format!("argument `{arg}` is not scale*xi shaped"));
                };
                if !coeff.is_one() {
                    return Err(format!(
                        "argument `{arg}` scales xi by {coeff}; only a bare symbol scale is supported"
                    ));
                }
                if let Some(prev) = &scale {
                    if prev != &s {
                        return Err(format!("two scales `{prev}` and `{s}` in one argument"));
                    }
                } else {
                    scale = Some(s);
                }
            }
            [(a, 1)] => {
                // scale * x0 phase term
                let Some(s) = as_sym(a) else {
                    return Err(format!("argument `{arg}` has an unsupported constant part"));
                };
                if &s == xi {
                    return Err(format!("argument `{arg}` contains a bare xi term"));
                }
                if let Some(prev) = &scale {
                    if prev != &s {
                        return Err(format!("two scales `{prev}` and `{s}` in one argument"));
                    }
                } else {
                    scale = Some(s);
                }
                offset = coeff.clone();
            }
            _ => return Err(format!("argument `{arg}` is not scale*(xi + x0) shaped")),
        }
    }
    match scale {
        Some(s) => Ok((s, offset)),
        None => Err(format!("argument `{arg}` does not involve a scale symbol")),
    }
}

/// Rewrites hyperbolics as exponentials in `E = e^(C1*xi)`, clears
/// denominators by the minimal `(1+E^2)^d * E^q` (times the phase factor
/// when present) and returns the collected Laurent polynomial.
pub fn to_exponential(e: &Expr, xi: &Symbol) -> Result<ExpPolynomial> {
    let nf = to_nf(&normalize(e));
    let e_sym = exp_symbol();
    let e_poly = MultiPoly::from_symbol(&e_sym);

    // discover the common scale and phase
    let mut scale: Option<Symbol> = None;
    let mut phase_offset: Option<Rational> = None;
    for mono in nf.keys() {
        for atom in mono.keys() {
            if let Expr::Func(_, arg) = atom {
                let (s, off) = decompose_argument(arg, xi).map_err(Error::MixedScales)?;
                match &scale {
                    Some(prev) if prev != &s => {
                        return Err(Error::MixedScales(format!(
                            "distinct scales `{prev}` and `{s}`"
                        )));
                    }
                    None => scale = Some(s),
                    _ => {}
                }
                if !off.is_zero() {
                    match &phase_offset {
                        Some(prev) if prev != &off => {
                            return Err(Error::MixedScales("two distinct phase offsets".into()));
                        }
                        None => phase_offset = Some(off),
                        _ => {}
                    }
                }
            }
        }
    }
    let scale = scale.unwrap_or_else(|| Symbol::new("C1", SymbolKind::AnsatzUnknown));
    let phase = phase_offset.map(|x0| PhaseInfo { symbol: phase_symbol(), x0 });

    // per-atom rewrite
    let rewrite_func = |kind: FuncKind, arg: &Expr| -> Result<Frac> {
        let (_, off) = decompose_argument(arg, xi).map_err(Error::MixedScales)?;
        let phased = !off.is_zero();
        let base = if phased {
            let p = phase.as_ref().expect("phase discovered above");
            e_poly.mul(&MultiPoly::from_symbol(&p.symbol))
        } else {
            e_poly.clone()
        };
        let b2 = base.mul(&base);
        let one = MultiPoly::one();
        let half = crate::symbol::rat(1, 2);
        // denominators stay factored: {E} (+ {E0}) for sinh/cosh, 1+B^2 else
        let exp_den = |num: MultiPoly| -> Frac {
            let mut den = BTreeMap::new();
            den.insert(e_poly.clone(), 1);
            if phased {
                let p = phase.as_ref().expect("phase discovered above");
                den.insert(MultiPoly::from_symbol(&p.symbol), 1);
            }
            Frac { num, den }
        };
        Ok(match kind {
            FuncKind::Tanh => Frac::with_den(b2.sub(&one), b2.add(&one)),
            FuncKind::Sech => Frac::with_den(base.scale(&rat_int(2)), b2.add(&one)),
            FuncKind::Sinh => exp_den(b2.sub(&one).scale(&half)),
            FuncKind::Cosh => exp_den(b2.add(&one).scale(&half)),
            FuncKind::Exp => Frac::from_poly(base),
        })
    };

    let mut acc = Frac::from_poly(MultiPoly::zero());
    for (mono, coeff) in &nf {
        let mut term = Frac::from_poly(MultiPoly::constant(coeff.clone()));
        for (atom, exp) in mono {
            let factor = match atom {
                Expr::Sym(s) => Frac::from_poly(MultiPoly::from_symbol(s)),
                Expr::Func(kind, arg) => rewrite_func(*kind, arg)?,
                Expr::IntPow(base, _) => {
                    // opaque reciprocal of a parameter-only sum
                    match MultiPoly::from_expr(base) {
                        Some(p) if !base.contains_field() => Frac::from_poly(p),
                        _ => {
                            return Err(Error::MixedScales(format!(
                                "unsupported atom `{atom}` in exponential rewrite"
                            )))
                        }
                    }
                }
                Expr::Deriv { .. } => {
                    return Err(Error::Internal(
                        "substitute the profile before the exponential rewrite".into(),
                    ))
                }
                other => {
                    return Err(Error::MixedScales(format!(
                        "unsupported atom `{other}` in exponential rewrite"
                    )))
                }
            };
            term = term.mul(&factor.pow(*exp)?);
        }
        acc = acc.add(&term);
    }

    // cancel denominator factors shared with the numerator, so the recorded
    // multiplier is minimal
    let mut num = acc.num;
    let mut den_factors = acc.den;
    for (factor, mult) in den_factors.iter_mut() {
        while *mult > 0 {
            match num.exact_div(factor) {
                Some(n2) => {
                    num = n2;
                    *mult -= 1;
                }
                None => break,
            }
        }
    }
    den_factors.retain(|_, m| *m > 0);

    // classify the multiplier
    let mut d = 0u32;
    let mut q = 0u32;
    let mut phase_d = 0u32;
    let mut den = MultiPoly::one();
    let one_plus_e2 = MultiPoly::one().add(&e_poly.mul(&e_poly));
    let phase_base = phase.as_ref().map(|p| {
        let pe = e_poly.mul(&MultiPoly::from_symbol(&p.symbol));
        MultiPoly::one().add(&pe.mul(&pe))
    });
    for (factor, mult) in &den_factors {
        for _ in 0..*mult {
            den = den.mul(factor);
        }
        if *factor == MultiPoly::from_symbol(&e_sym) {
            q += mult;
        } else if *factor == one_plus_e2 {
            d += mult;
        } else if Some(factor) == phase_base.as_ref() {
            phase_d += mult;
        } else if factor.symbols().contains(&e_sym) {
            return Err(Error::Internal(format!(
                "unexpected denominator factor `{factor}` in exponential rewrite"
            )));
        }
        // E-free factors are parameter denominators; they fold into the
        // multiplier polynomial without affecting d or q
    }

    // split the numerator by E-exponent
    let mut terms: BTreeMap<i64, MultiPoly> = BTreeMap::new();
    for (mono, coeff) in num.terms() {
        let k = mono.get(&e_sym).copied().unwrap_or(0) as i64;
        let mut rest: PMono = mono.clone();
        rest.remove(&e_sym);
        let entry = terms.entry(k).or_insert_with(MultiPoly::zero);
        *entry = entry.add(&MultiPoly::monomial(rest, coeff.clone()));
    }
    terms.retain(|_, p| !p.is_zero());

    Ok(ExpPolynomial {
        terms,
        scale,
        multiplier: Multiplier { d, q, phase_d, poly: den },
        phase,
    })
}

/// One collected equation with its provenance.
#[derive(Debug, Clone)]
pub struct SystemEquation {
    /// The exponent k of `e^(k C1 xi)` this coefficient came from.
    pub exponent: i64,
    pub poly: MultiPoly,
    /// Index of an earlier proportional equation, when deduplicated.
    pub duplicate_of: Option<usize>,
}

/// The over-determined polynomial system `P_k = 0`.
#[derive(Debug, Clone)]
pub struct AlgebraicSystem {
    /// Distinct equations after deduplication, rational content removed.
    pub equations: Vec<MultiPoly>,
    pub unknowns: Vec<Symbol>,
    pub parameters: Vec<Symbol>,
    /// Every collected coefficient, in exponent order.
    pub provenance: Vec<SystemEquation>,
}

impl fmt::Display for AlgebraicSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, eq) in self.equations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{eq} = 0")?;
        }
        Ok(())
    }
}

/// Requires each coefficient of `e^(k C1 xi)` to vanish; proportional
/// duplicates are folded with provenance retained.
pub fn collect_system(ep: &ExpPolynomial, unknowns: &[Symbol]) -> Result<AlgebraicSystem> {
    if ep.is_zero() {
        return Err(Error::EmptySystem);
    }
    let mut equations: Vec<MultiPoly> = Vec::new();
    let mut provenance = Vec::new();
    for (k, poly) in &ep.terms {
        let rc = poly.rational_content();
        let scaled = poly.scale(&(Rational::one() / rc));
        let duplicate_of = equations.iter().position(|e| *e == scaled);
        if duplicate_of.is_none() {
            equations.push(scaled.clone());
        }
        provenance.push(SystemEquation { exponent: *k, poly: poly.clone(), duplicate_of });
    }
    let unknown_set: BTreeSet<&Symbol> = unknowns.iter().collect();
    let mut parameters: BTreeSet<Symbol> = BTreeSet::new();
    for eq in &equations {
        for s in eq.symbols() {
            if !unknown_set.contains(&s) {
                parameters.insert(s);
            }
        }
    }
    Ok(AlgebraicSystem {
        equations,
        unknowns: unknowns.to_vec(),
        parameters: parameters.into_iter().collect(),
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_equation;
    use crate::reduce::{
        integrate_once, integration_constant_symbol, traveling_wave_reduce, wave_speed_symbol,
        xi_symbol,
    };
    use crate::symbol::rat;

    fn burgers_integrated() -> TravelingOde {
        let pde = parse_equation("param nu; dt(u) + u*dx(u) - nu*dx(dx(u)) = 0").unwrap();
        let ode = traveling_wave_reduce(&pde, &wave_speed_symbol());
        integrate_once(&ode, &integration_constant_symbol()).unwrap()
    }

    fn drp_integrated() -> TravelingOde {
        let pde = parse_equation(
            "param sigma; param K; dt(u) - (sigma/2)*dt(dt(u)) + K*dx(u) = 0",
        )
        .unwrap();
        let ode = traveling_wave_reduce(&pde, &wave_speed_symbol());
        integrate_once(&ode, &integration_constant_symbol()).unwrap()
    }

    #[test]
    fn balance_burgers_is_one() {
        assert_eq!(balance_order(&burgers_integrated()).unwrap(), 1);
    }

    #[test]
    fn balance_linear_is_one() {
        assert_eq!(balance_order(&drp_integrated()).unwrap(), 1);
    }

    #[test]
    fn balance_fourth_order() {
        // -u'''' + u^2 balances at n + 4 = 2n  =>  n = 4
        let u = Symbol::new("u", SymbolKind::Field);
        let xi = xi_symbol();
        let lhs = normalize(&Expr::sum(vec![
            Expr::deriv(Expr::sym(&u), &xi, 4).neg(),
            Expr::pow(Expr::sym(&u), 2),
        ]));
        let ode = TravelingOde {
            lhs,
            field: u,
            xi,
            wave_speed: wave_speed_symbol(),
            parameters: vec![],
            integrated: true,
            integration_constant: Some(integration_constant_symbol()),
        };
        assert_eq!(balance_order(&ode).unwrap(), 4);
    }

    #[test]
    fn ansatz_order_one_shape() {
        let spec = AnsatzSpec::new(1, &xi_symbol(), &wave_speed_symbol());
        let a = build_ansatz(&spec);
        let s = a.to_string();
        assert!(s.contains("tanh"), "{s}");
        assert!(s.contains("sech"), "{s}");
        assert!(s.contains("V0"), "{s}");
    }

    #[test]
    fn ansatz_order_two_shape() {
        let spec = AnsatzSpec::new(2, &xi_symbol(), &wave_speed_symbol());
        let a = build_ansatz(&spec);
        let s = a.to_string();
        assert!(s.contains("U2") && s.contains("V2"), "{s}");
        assert!(s.contains("^2"), "{s}");
    }

    #[test]
    fn tanh_rewrites_minimally() {
        let spec = AnsatzSpec::new(1, &xi_symbol(), &wave_speed_symbol());
        let arg = Expr::product(vec![Expr::sym(&spec.scale), Expr::sym(&spec.xi)]);
        let ep = to_exponential(&Expr::func(FuncKind::Tanh, arg), &spec.xi).unwrap();
        // tanh = (E^2 - 1)/(E^2 + 1): minimal multiplier has d = 1, q = 0
        assert_eq!(ep.multiplier.d, 1);
        assert_eq!(ep.multiplier.q, 0);
        let keys: Vec<i64> = ep.terms.keys().copied().collect();
        assert_eq!(keys, vec![0, 2]);
        assert_eq!(ep.terms[&0], MultiPoly::constant(rat(-1, 1)));
        assert_eq!(ep.terms[&2], MultiPoly::one());
    }

    #[test]
    fn sinh_times_cosh_cancels() {
        // sinh*cosh = (E^4-1)/(4E^2): minimal q = 2, d = 0
        let spec = AnsatzSpec::new(1, &xi_symbol(), &wave_speed_symbol());
        let arg = Expr::product(vec![Expr::sym(&spec.scale), Expr::sym(&spec.xi)]);
        let e = Expr::product(vec![
            Expr::func(FuncKind::Sinh, arg.clone()),
            Expr::func(FuncKind::Cosh, arg),
        ]);
        let ep = to_exponential(&e, &spec.xi).unwrap();
        assert_eq!(ep.multiplier.d, 0);
        assert_eq!(ep.multiplier.q, 2);
    }

    #[test]
    fn constant_needs_no_multiplier() {
        let spec = AnsatzSpec::new(1, &xi_symbol(), &wave_speed_symbol());
        let ep = to_exponential(&Expr::sym(&spec.offset), &spec.xi).unwrap();
        assert_eq!(ep.multiplier.d, 0);
        assert_eq!(ep.multiplier.q, 0);
        assert_eq!(ep.terms[&0], MultiPoly::from_symbol(&spec.offset));
    }

    #[test]
    fn mixed_scales_rejected() {
        let xi = xi_symbol();
        let c1 = Symbol::new("C1", SymbolKind::AnsatzUnknown);
        let c2 = Symbol::new("C2", SymbolKind::AnsatzUnknown);
        let e = Expr::sum(vec![
            Expr::func(FuncKind::Tanh, Expr::product(vec![Expr::sym(&c1), Expr::sym(&xi)])),
            Expr::func(FuncKind::Tanh, Expr::product(vec![Expr::sym(&c2), Expr::sym(&xi)])),
        ]);
        let err = to_exponential(&e, &xi).unwrap_err();
        assert!(matches!(err, Error::MixedScales(_)), "{err:?}");
    }

    /// The corrected coefficient system for the builtin scheme family:
    /// with A = K - v the five coefficients are
    ///   P0 = A(V0 - U1) - C
    ///   P1 = 2A V1 - sigma v^2 C1 V1
    ///   P2 = 2A V0 - 2 sigma v^2 C1 U1 - 2C
    ///   P3 = 2A V1 + sigma v^2 C1 V1
    ///   P4 = A(V0 + U1) - C
    #[test]
    fn drp_coefficients_match_hand_derivation() {
        let ode = drp_integrated();
        let spec = AnsatzSpec::new(1, &ode.xi, &ode.wave_speed);
        let substituted = substitute_ansatz(&ode, &spec).unwrap();
        let ep = to_exponential(&substituted, &ode.xi).unwrap();
        assert_eq!(ep.multiplier.d, 2);
        assert_eq!(ep.multiplier.q, 0);
        assert_eq!(ep.terms.len(), 5);

        let p = MultiPoly::from_symbol;
        let k = Symbol::param("K");
        let sigma = Symbol::param("sigma");
        let v = ode.wave_speed.clone();
        let c = integration_constant_symbol();
        let u1 = spec.tanh_amps[0].clone();
        let v1 = spec.sech_amps[0].clone();
        let v0 = spec.offset.clone();
        let c1 = spec.scale.clone();

        let a = p(&k).sub(&p(&v));
        let sv2c1 = p(&sigma).mul(&p(&v)).mul(&p(&v)).mul(&p(&c1));

        let p0 = a.mul(&p(&v0).sub(&p(&u1))).sub(&p(&c));
        let p1 = a.mul(&p(&v1)).scale(&rat(2, 1)).sub(&sv2c1.mul(&p(&v1)));
        let p2 = a
            .mul(&p(&v0))
            .scale(&rat(2, 1))
            .sub(&sv2c1.mul(&p(&u1)).scale(&rat(2, 1)))
            .sub(&p(&c).scale(&rat(2, 1)));
        let p3 = a.mul(&p(&v1)).scale(&rat(2, 1)).add(&sv2c1.mul(&p(&v1)));
        let p4 = a.mul(&p(&v0).add(&p(&u1))).sub(&p(&c));

        assert_eq!(ep.terms[&0], p0, "P0 mismatch: {}", ep.terms[&0]);
        assert_eq!(ep.terms[&1], p1, "P1 mismatch: {}", ep.terms[&1]);
        assert_eq!(ep.terms[&2], p2, "P2 mismatch: {}", ep.terms[&2]);
        assert_eq!(ep.terms[&3], p3, "P3 mismatch: {}", ep.terms[&3]);
        assert_eq!(ep.terms[&4], p4, "P4 mismatch: {}", ep.terms[&4]);
    }

    #[test]
    fn pointwise_equivalence_smoke() {
        use crate::expr::eval_numeric;
        let ode = burgers_integrated();
        let spec = AnsatzSpec::new(1, &ode.xi, &ode.wave_speed);
        let substituted = substitute_ansatz(&ode, &spec).unwrap();
        let ep = to_exponential(&substituted, &ode.xi).unwrap();

        let mut env = BTreeMap::new();
        env.insert(Symbol::param("nu"), 0.7);
        env.insert(spec.tanh_amps[0].clone(), -1.3);
        env.insert(spec.sech_amps[0].clone(), 0.4);
        env.insert(spec.offset.clone(), 0.9);
        env.insert(spec.scale.clone(), 0.6);
        env.insert(ode.wave_speed.clone(), 1.1);
        env.insert(integration_constant_symbol(), 0.25);

        for i in 0..20 {
            let xi_val = -5.0 + i as f64 * 0.5;
            let mut env_pt = env.clone();
            env_pt.insert(ode.xi.clone(), xi_val);
            let lhs = eval_numeric(&substituted, &env_pt).unwrap();
            let rhs = ep.eval(&env, xi_val).unwrap();
            let mult = ep.eval_multiplier(&env, xi_val).unwrap();
            let expect = lhs * mult;
            assert!(
                (rhs - expect).abs() <= 1e-10 * (1.0 + expect.abs()),
                "mismatch at xi={xi_val}: {rhs} vs {expect}"
            );
        }
    }

    #[test]
    fn multiplier_is_minimal_for_burgers() {
        let ode = burgers_integrated();
        let spec = AnsatzSpec::new(1, &ode.xi, &ode.wave_speed);
        let substituted = substitute_ansatz(&ode, &spec).unwrap();
        let ep = to_exponential(&substituted, &ode.xi).unwrap();
        assert_eq!(ep.multiplier.d, 2);
        assert_eq!(ep.multiplier.q, 0);
        // structurally minimal: the collected polynomial is not divisible by
        // (1+E^2), and it has a nonzero E^0 coefficient
        let e_sym = exp_symbol();
        let e_poly = MultiPoly::from_symbol(&e_sym);
        let mut whole = MultiPoly::zero();
        for (k, coeff) in &ep.terms {
            whole = whole.add(&coeff.mul(&e_poly.pow(*k as u32)));
        }
        let one_plus_e2 = MultiPoly::one().add(&e_poly.mul(&e_poly));
        assert!(whole.exact_div(&one_plus_e2).is_none());
        assert!(ep.terms.contains_key(&0));
    }

    #[test]
    fn collect_system_counts_and_empty() {
        let ode = drp_integrated();
        let spec = AnsatzSpec::new(1, &ode.xi, &ode.wave_speed);
        let substituted = substitute_ansatz(&ode, &spec).unwrap();
        let ep = to_exponential(&substituted, &ode.xi).unwrap();
        let c = integration_constant_symbol();
        let sys = collect_system(&ep, &spec.unknowns_with(Some(&c))).unwrap();
        assert_eq!(ep.terms.len(), 5);
        assert_eq!(sys.provenance.len(), 5);
        assert!(sys.equations.len() <= 5);

        let empty = ExpPolynomial {
            terms: BTreeMap::new(),
            scale: spec.scale.clone(),
            multiplier: Multiplier { d: 0, q: 0, phase_d: 0, poly: MultiPoly::one() },
            phase: None,
        };
        assert!(matches!(
            collect_system(&empty, &spec.unknowns_with(Some(&c))),
            Err(Error::EmptySystem)
        ));
    }

    #[test]
    fn phase_folds_into_exponential() {
        let spec = AnsatzSpec::new(1, &xi_symbol(), &wave_speed_symbol()).with_phase(rat(1, 2));
        let a = build_ansatz(&spec);
        let ep = to_exponential(&a, &spec.xi).unwrap();
        let phase = ep.phase.clone().expect("phase recorded");
        assert_eq!(phase.x0, rat(1, 2));

        // pointwise check including the phase factor
        let mut env = BTreeMap::new();
        env.insert(spec.tanh_amps[0].clone(), 0.8);
        env.insert(spec.sech_amps[0].clone(), -0.5);
        env.insert(spec.offset.clone(), 0.2);
        env.insert(spec.scale.clone(), 0.9);
        for i in 0..10 {
            let xi_val = -3.0 + i as f64 * 0.7;
            let mut env_pt = env.clone();
            env_pt.insert(spec.xi.clone(), xi_val);
            let lhs = crate::expr::eval_numeric(&a, &env_pt).unwrap();
            let rhs = ep.eval(&env, xi_val).unwrap();
            let mult = ep.eval_multiplier(&env, xi_val).unwrap();
            assert!(
                (rhs - lhs * mult).abs() <= 1e-10 * (1.0 + (lhs * mult).abs()),
                "phase mismatch at xi={xi_val}"
            );
        }
    }
}
