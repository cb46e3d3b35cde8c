//! Traveling-wave reduction `xi = x - v*t` and exact once-integration with
//! an explicit symbolic integration constant.

use crate::error::{Error, Result};
use crate::expr::{field_deriv_atom, flatten_field_deriv, normalize, to_nf, Expr};
use crate::parser::PdeEquation;
use crate::symbol::{Rational, Symbol, SymbolKind};
use num_traits::One;
use std::collections::BTreeMap;
use std::fmt;

/// The reduced ODE in `xi`, optionally once-integrated.
///
/// When `integrated` is true the equation is stored with the constant moved
/// left: `lhs = (antiderivative) - C = 0`.
#[derive(Debug, Clone)]
pub struct TravelingOde {
    pub lhs: Expr,
    pub field: Symbol,
    pub xi: Symbol,
    pub wave_speed: Symbol,
    pub parameters: Vec<Symbol>,
    pub integrated: bool,
    /// Present iff integrated and the constant is still free.
    pub integration_constant: Option<Symbol>,
}

impl fmt::Display for TravelingOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = 0", self.lhs)
    }
}

/// Standard symbol for `xi`.
pub fn xi_symbol() -> Symbol {
    Symbol::new("xi", SymbolKind::IndependentVar)
}

/// Standard symbol for the wave speed.
pub fn wave_speed_symbol() -> Symbol {
    Symbol::new("v", SymbolKind::WaveSpeed)
}

/// Standard symbol for the integration constant.
pub fn integration_constant_symbol() -> Symbol {
    Symbol::new("C", SymbolKind::IntegrationConstant)
}

fn reduce_expr(e: &Expr, pde: &PdeEquation, v: &Symbol, xi: &Symbol) -> Expr {
    match e {
        Expr::Deriv { .. } => {
            if let Some((field, orders)) = flatten_field_deriv(e) {
                let a = orders.get(&pde.space_var).copied().unwrap_or(0);
                let b = orders.get(&pde.time_var).copied().unwrap_or(0);
                let mut xi_orders = BTreeMap::new();
                xi_orders.insert(xi.clone(), a + b);
                let deriv = field_deriv_atom(&field, &xi_orders);
                // each t-derivative contributes a factor (-v)
                let mut parts = Vec::new();
                if b % 2 == 1 {
                    parts.push(Expr::int(-1));
                }
                if b > 0 {
                    parts.push(Expr::pow(Expr::Sym(v.clone()), b as i32));
                }
                parts.push(deriv);
                Expr::product(parts)
            } else {
                e.clone()
            }
        }
        Expr::Sum(parts) => Expr::sum(parts.iter().map(|p| reduce_expr(p, pde, v, xi)).collect()),
        Expr::Product(parts) => {
            Expr::product(parts.iter().map(|p| reduce_expr(p, pde, v, xi)).collect())
        }
        Expr::IntPow(b, k) => Expr::pow(reduce_expr(b, pde, v, xi), *k),
        Expr::Func(kind, a) => Expr::func(*kind, reduce_expr(a, pde, v, xi)),
        _ => e.clone(),
    }
}

/// Substitutes `u(x,t) = u(xi)`, `xi = x - v*t`: every d/dt becomes
/// `(-v) d/dxi` (order s contributing `(-v)^s`) and every d/dx becomes
/// `d/dxi`.
pub fn traveling_wave_reduce(pde: &PdeEquation, v: &Symbol) -> TravelingOde {
    let xi = xi_symbol();
    let lhs = normalize(&reduce_expr(&pde.lhs, pde, v, &xi));
    TravelingOde {
        lhs,
        field: pde.field.clone(),
        xi,
        wave_speed: v.clone(),
        parameters: pde.parameters.clone(),
        integrated: false,
        integration_constant: None,
    }
}

/// Integrates the reduced ODE once, term by term. Every additive term must
/// be an exact xi-derivative: `c * u^(j)` with `j >= 1` or `c * u^k * u'`.
/// The result is stored as `antiderivative - C = 0`.
pub fn integrate_once(ode: &TravelingOde, constant: &Symbol) -> Result<TravelingOde> {
    if ode.integrated {
        return Err(Error::Internal("the ODE is already integrated".into()));
    }
    let nf = to_nf(&ode.lhs);
    let mut result = crate::expr::nf_zero();
    for (mono, coeff) in &nf {
        let mut bare_u: u32 = 0;
        let mut deriv: Option<(u32, i32)> = None; // (order, exponent)
        let mut rest: Vec<(Expr, i32)> = Vec::new();
        let mut bad = false;
        for (atom, exp) in mono {
            match atom {
                Expr::Sym(s) if s.kind() == SymbolKind::Field => {
                    if *exp < 0 {
                        bad = true;
                    }
                    bare_u = *exp as u32;
                }
                Expr::Deriv { .. } => {
                    let Some((_, orders)) = flatten_field_deriv(atom) else {
                        bad = true;
                        continue;
                    };
                    let order: u32 = orders.values().sum();
                    if deriv.is_some() {
                        bad = true;
                    }
                    deriv = Some((order, *exp));
                }
                other => {
                    if other.contains_field() {
                        bad = true;
                    }
                    rest.push((other.clone(), *exp));
                }
            }
        }
        let term_str = || {
            let mut m = crate::expr::nf_zero();
            m.insert(mono.clone(), coeff.clone());
            crate::expr::nf_to_expr(m).to_string()
        };
        if bad {
            return Err(Error::NotExactlyIntegrable(term_str()));
        }
        let mut new_mono: BTreeMap<Expr, i32> =
            rest.into_iter().collect();
        let mut new_coeff = coeff.clone();
        match (bare_u, deriv) {
            // c * u^(j), j >= 1 -> c * u^(j-1)
            (0, Some((order, 1))) if order >= 1 => {
                if order == 1 {
                    new_mono.insert(Expr::Sym(ode.field.clone()), 1);
                } else {
                    let mut orders = BTreeMap::new();
                    orders.insert(ode.xi.clone(), order - 1);
                    new_mono.insert(field_deriv_atom(&ode.field, &orders), 1);
                }
            }
            // c * u^k * u' -> c * u^(k+1) / (k+1)
            (k, Some((1, 1))) if k >= 1 => {
                new_mono.insert(Expr::Sym(ode.field.clone()), k as i32 + 1);
                new_coeff /= Rational::from_integer((k + 1).into());
            }
            _ => return Err(Error::NotExactlyIntegrable(term_str())),
        }
        let entry = result.entry(new_mono).or_insert_with(num_traits::Zero::zero);
        *entry += new_coeff;
    }
    result.retain(|_, c| !num_traits::Zero::is_zero(c));
    // move the constant to the left-hand side
    let mut c_mono = BTreeMap::new();
    c_mono.insert(Expr::Sym(constant.clone()), 1);
    let entry = result.entry(c_mono).or_insert_with(num_traits::Zero::zero);
    *entry -= Rational::one();
    result.retain(|_, c| !num_traits::Zero::is_zero(c));

    Ok(TravelingOde {
        lhs: crate::expr::nf_to_expr(result),
        field: ode.field.clone(),
        xi: ode.xi.clone(),
        wave_speed: ode.wave_speed.clone(),
        parameters: ode.parameters.clone(),
        integrated: true,
        integration_constant: Some(constant.clone()),
    })
}

/// Pins the integration constant to zero, for the loss-of-solutions
/// comparison. The returned ODE stays integrated but carries no constant.
pub fn specialize_constant_zero(ode: &TravelingOde) -> Result<TravelingOde> {
    if !ode.integrated {
        return Err(Error::NotIntegrated);
    }
    let Some(c) = &ode.integration_constant else {
        return Ok(ode.clone());
    };
    let mut bindings = BTreeMap::new();
    bindings.insert(c.clone(), Expr::int(0));
    let lhs = crate::expr::substitute(&ode.lhs, &bindings)
        .expect("constant substitution cannot cycle");
    Ok(TravelingOde {
        lhs,
        field: ode.field.clone(),
        xi: ode.xi.clone(),
        wave_speed: ode.wave_speed.clone(),
        parameters: ode.parameters.clone(),
        integrated: true,
        integration_constant: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::differentiate;
    use crate::parser::parse_equation;
    use crate::symbol::rat;

    fn burgers() -> PdeEquation {
        parse_equation("param nu; dt(u) + u*dx(u) - nu*dx(dx(u)) = 0").unwrap()
    }

    fn drp_like() -> PdeEquation {
        parse_equation("param sigma; param K; dt(u) - (sigma/2)*dt(dt(u)) + K*dx(u) = 0").unwrap()
    }

    #[test]
    fn burgers_reduces() {
        let pde = burgers();
        let v = wave_speed_symbol();
        let ode = traveling_wave_reduce(&pde, &v);
        let u = pde.field.clone();
        let xi = ode.xi.clone();
        let nu = Symbol::param("nu");
        let up = Expr::deriv(Expr::sym(&u), &xi, 1);
        let upp = Expr::deriv(Expr::sym(&u), &xi, 2);
        let expect = normalize(&Expr::sum(vec![
            Expr::product(vec![Expr::sym(&v), up.clone()]).neg(),
            Expr::product(vec![Expr::sym(&u), up]),
            Expr::product(vec![Expr::sym(&nu), upp]).neg(),
        ]));
        assert_eq!(ode.lhs, expect);
        assert!(!ode.integrated);
    }

    #[test]
    fn trivial_space_derivative() {
        let pde = parse_equation("dx(u) = 0").unwrap();
        let ode = traveling_wave_reduce(&pde, &wave_speed_symbol());
        let expect = Expr::deriv(Expr::sym(&pde.field), &ode.xi, 1);
        assert_eq!(ode.lhs, normalize(&expect));
    }

    #[test]
    fn burgers_integrates() {
        let pde = burgers();
        let v = wave_speed_symbol();
        let c = integration_constant_symbol();
        let ode = traveling_wave_reduce(&pde, &v);
        let int = integrate_once(&ode, &c).unwrap();

        let u = pde.field.clone();
        let xi = int.xi.clone();
        let nu = Symbol::param("nu");
        let up = Expr::deriv(Expr::sym(&u), &xi, 1);
        let expect = normalize(&Expr::sum(vec![
            Expr::product(vec![Expr::sym(&v), Expr::sym(&u)]).neg(),
            Expr::product(vec![Expr::Const(rat(1, 2)), Expr::pow(Expr::sym(&u), 2)]),
            Expr::product(vec![Expr::sym(&nu), up]).neg(),
            Expr::sym(&c).neg(),
        ]));
        assert_eq!(int.lhs, expect);
        assert!(int.integrated);
        assert_eq!(int.integration_constant, Some(c));
    }

    #[test]
    fn integrate_differentiate_round_trip() {
        for pde in [burgers(), drp_like()] {
            let v = wave_speed_symbol();
            let c = integration_constant_symbol();
            let ode = traveling_wave_reduce(&pde, &v);
            let int = integrate_once(&ode, &c).unwrap();
            // d/dxi (lhs + C) must reproduce the unintegrated lhs
            let restored = differentiate(
                &Expr::sum(vec![int.lhs.clone(), Expr::sym(&c)]),
                &int.xi,
            );
            assert_eq!(restored, ode.lhs, "round trip failed for {pde}");
        }
    }

    #[test]
    fn drp_integrated_shape() {
        let pde = drp_like();
        let v = wave_speed_symbol();
        let c = integration_constant_symbol();
        let int = integrate_once(&traveling_wave_reduce(&pde, &v), &c).unwrap();
        // (K - v) u - (sigma v^2 / 2) u' - C = 0
        let u = pde.field.clone();
        let xi = int.xi.clone();
        let k = Symbol::param("K");
        let sigma = Symbol::param("sigma");
        let up = Expr::deriv(Expr::sym(&u), &xi, 1);
        let expect = normalize(&Expr::sum(vec![
            Expr::product(vec![Expr::sym(&k), Expr::sym(&u)]),
            Expr::product(vec![Expr::sym(&v), Expr::sym(&u)]).neg(),
            Expr::product(vec![
                Expr::Const(rat(1, 2)),
                Expr::sym(&sigma),
                Expr::pow(Expr::sym(&v), 2),
                up,
            ])
            .neg(),
            Expr::sym(&c).neg(),
        ]));
        assert_eq!(int.lhs, expect);
    }

    #[test]
    fn rejects_non_exact_terms() {
        // u * u'' alone is not an exact derivative
        let pde = parse_equation("u*dx(dx(u)) = 0").unwrap();
        let ode = traveling_wave_reduce(&pde, &wave_speed_symbol());
        let err = integrate_once(&ode, &integration_constant_symbol()).unwrap_err();
        assert!(matches!(err, Error::NotExactlyIntegrable(_)), "{err:?}");
    }

    #[test]
    fn rejects_underived_terms() {
        // a bare u term has antiderivative u*xi, which leaves the class
        let pde = parse_equation("u + dx(u) = 0").unwrap();
        let ode = traveling_wave_reduce(&pde, &wave_speed_symbol());
        let err = integrate_once(&ode, &integration_constant_symbol()).unwrap_err();
        assert!(matches!(err, Error::NotExactlyIntegrable(_)));
    }

    #[test]
    fn mixed_derivatives_reduce() {
        let pde = parse_equation("dx(dt(u)) = 0").unwrap();
        let v = wave_speed_symbol();
        let ode = traveling_wave_reduce(&pde, &v);
        let expect = normalize(
            &Expr::product(vec![
                Expr::int(-1),
                Expr::sym(&v),
                Expr::deriv(Expr::sym(&pde.field), &ode.xi, 2),
            ]),
        );
        assert_eq!(ode.lhs, expect);
    }

    #[test]
    fn constant_zero_specialization() {
        let pde = burgers();
        let v = wave_speed_symbol();
        let c = integration_constant_symbol();
        let ode = traveling_wave_reduce(&pde, &v);
        let int = integrate_once(&ode, &c).unwrap();
        let zeroed = specialize_constant_zero(&int).unwrap();
        assert!(zeroed.integration_constant.is_none());
        assert!(!zeroed.lhs.free_symbols().contains(&c));

        let err = specialize_constant_zero(&ode).unwrap_err();
        assert!(matches!(err, Error::NotIntegrated));
    }

    #[test]
    fn reduction_is_linear() {
        let p1 = parse_equation("param a; a*dt(u) = 0").unwrap();
        let p2 = parse_equation("param b; b*dx(dx(u)) = 0").unwrap();
        let combined = parse_equation("param a; param b; a*dt(u) + b*dx(dx(u)) = 0").unwrap();
        let v = wave_speed_symbol();
        let r1 = traveling_wave_reduce(&p1, &v);
        let r2 = traveling_wave_reduce(&p2, &v);
        let rc = traveling_wave_reduce(&combined, &v);
        let sum = normalize(&Expr::sum(vec![r1.lhs, r2.lhs]));
        assert_eq!(rc.lhs, sum);
    }
}
