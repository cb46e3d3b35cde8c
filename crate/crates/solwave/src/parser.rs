//! Text DSL for input equations and profile expressions.
//!
//! Equation files: `param <name> [= <rational>];` declarations followed by a
//! single equation `<expr> = 0`. Operators `+ - * / ^`, derivative calls
//! `dt(...)` / `dx(...)` (nestable), field literal `u`, `#` comments,
//! whitespace-insensitive. The name `c` is reserved and reads as the
//! constant 1. Profile expressions additionally allow `tanh/sech/sinh/cosh/
//! exp` and the variable `xi`, but no derivatives and no field.

use crate::error::{Error, Result};
use crate::expr::{normalize, Expr, FuncKind};
use crate::symbol::{Rational, Symbol, SymbolKind};
use num_bigint::BigInt;
use num_traits::One;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A parsed input equation `lhs = 0`, polynomial in the field and its
/// partial derivatives.
#[derive(Debug, Clone)]
pub struct PdeEquation {
    pub lhs: Expr,
    pub field: Symbol,
    pub space_var: Symbol,
    pub time_var: Symbol,
    pub parameters: Vec<Symbol>,
    /// Default numeric values from `param name = value;` declarations.
    pub param_values: BTreeMap<Symbol, Rational>,
}

impl fmt::Display for PdeEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = 0", self.lhs)
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Semi,
    Equals,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&ch) = chars.peek() {
        let (l, c) = (line, col);
        let mut push = |tok: Tok| out.push(Spanned { tok, line: l, col: c });
        match ch {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c2) = chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '+' => { chars.next(); col += 1; push(Tok::Plus); }
            '-' => { chars.next(); col += 1; push(Tok::Minus); }
            '*' => { chars.next(); col += 1; push(Tok::Star); }
            '/' => { chars.next(); col += 1; push(Tok::Slash); }
            '^' => { chars.next(); col += 1; push(Tok::Caret); }
            '(' => { chars.next(); col += 1; push(Tok::LParen); }
            ')' => { chars.next(); col += 1; push(Tok::RParen); }
            ';' => { chars.next(); col += 1; push(Tok::Semi); }
            '=' => { chars.next(); col += 1; push(Tok::Equals); }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_digit() {
                        s.push(c2);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                if chars.peek() == Some(&'.') {
                    return Err(Error::Syntax {
                        line: l,
                        col: c,
                        msg: "floating-point literals are not allowed; use rationals like 1/2".into(),
                    });
                }
                let n = BigInt::parse_bytes(s.as_bytes(), 10).unwrap();
                push(Tok::Int(n));
            }
            c2 if c2.is_ascii_alphabetic() || c2 == '_' => {
                let mut s = String::new();
                while let Some(&c3) = chars.peek() {
                    if c3.is_ascii_alphanumeric() || c3 == '_' {
                        s.push(c3);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push(Tok::Ident(s));
            }
            other => {
                return Err(Error::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Pde,
    Profile,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    mode: Mode,
    field: Symbol,
    space_var: Symbol,
    time_var: Symbol,
    xi: Symbol,
    params: BTreeMap<String, Symbol>,
    declared_values: BTreeMap<Symbol, Rational>,
    /// Pre-registered symbols for profile mode (ansatz unknowns, v, C, ...).
    known: BTreeMap<String, Symbol>,
    /// Symbols used while parsing a profile.
    used: BTreeSet<Symbol>,
}

const RESERVED: &[&str] = &["u", "x", "t", "xi", "c", "v", "C", "x0", "param"];

fn is_reserved_name(name: &str) -> bool {
    if RESERVED.contains(&name) {
        return true;
    }
    // ansatz unknown shapes: U1, V2, C1, V0, ...
    let mut chars = name.chars();
    match chars.next() {
        Some('U') | Some('V') | Some('C') => {
            let rest: String = chars.collect();
            !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
        }
        _ => false,
    }
}

impl Parser {
    fn new(text: &str, mode: Mode, known: &[Symbol]) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            mode,
            field: Symbol::new("u", SymbolKind::Field),
            space_var: Symbol::new("x", SymbolKind::IndependentVar),
            time_var: Symbol::new("t", SymbolKind::IndependentVar),
            xi: Symbol::new("xi", SymbolKind::IndependentVar),
            params: BTreeMap::new(),
            declared_values: BTreeMap::new(),
            known: known.iter().map(|s| (s.name().to_string(), s.clone())).collect(),
            used: BTreeSet::new(),
        })
    }

    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, at: &Spanned, msg: impl Into<String>) -> Error {
        Error::Syntax { line: at.line, col: at.col, msg: msg.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Spanned> {
        let t = self.next();
        if t.tok == tok {
            Ok(t)
        } else {
            Err(self.err(&t, format!("expected {what}")))
        }
    }

    fn parse_param_decls(&mut self) -> Result<()> {
        loop {
            match &self.peek().tok {
                Tok::Ident(name) if name == "param" => {
                    self.next();
                    let t = self.next();
                    let name = match &t.tok {
                        Tok::Ident(n) => n.clone(),
                        _ => return Err(self.err(&t, "expected parameter name")),
                    };
                    if is_reserved_name(&name) {
                        return Err(self.err(&t, format!("`{name}` is a reserved name")));
                    }
                    if self.params.contains_key(&name) {
                        return Err(self.err(&t, format!("parameter `{name}` declared twice")));
                    }
                    let sym = Symbol::param(&name);
                    self.params.insert(name, sym.clone());
                    if self.peek().tok == Tok::Equals {
                        self.next();
                        let value = self.parse_rational()?;
                        self.declared_values.insert(sym, value);
                    }
                    self.expect(Tok::Semi, "`;` after parameter declaration")?;
                }
                _ => return Ok(()),
            }
        }
    }

    fn parse_rational(&mut self) -> Result<Rational> {
        let mut neg = false;
        if self.peek().tok == Tok::Minus {
            self.next();
            neg = true;
        }
        let t = self.next();
        let num = match &t.tok {
            Tok::Int(n) => n.clone(),
            _ => return Err(self.err(&t, "expected a rational literal")),
        };
        let mut den = BigInt::one();
        if self.peek().tok == Tok::Slash {
            self.next();
            let t2 = self.next();
            den = match &t2.tok {
                Tok::Int(n) if !num_traits::Zero::is_zero(n) => n.clone(),
                Tok::Int(_) => return Err(self.err(&t2, "division by zero")),
                _ => return Err(self.err(&t2, "expected denominator")),
            };
        }
        let r = Rational::new(num, den);
        Ok(if neg { -r } else { r })
    }

    // expr := term { (+|-) term }
    fn parse_expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.parse_term()?];
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    terms.push(self.parse_term()?);
                }
                Tok::Minus => {
                    self.next();
                    terms.push(self.parse_term()?.neg());
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    // term := factor { (*|/) factor }
    fn parse_term(&mut self) -> Result<Expr> {
        let mut parts = vec![self.parse_factor()?];
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    parts.push(self.parse_factor()?);
                }
                Tok::Slash => {
                    let at = self.next();
                    let rhs = self.parse_factor()?;
                    if rhs.is_zero() {
                        return Err(self.err(&at, "division by zero"));
                    }
                    parts.push(Expr::pow(rhs, -1));
                }
                _ => break,
            }
        }
        Ok(Expr::product(parts))
    }

    // factor := (+|-) factor | primary
    fn parse_factor(&mut self) -> Result<Expr> {
        match self.peek().tok {
            Tok::Minus => {
                self.next();
                Ok(self.parse_factor()?.neg())
            }
            Tok::Plus => {
                self.next();
                self.parse_factor()
            }
            _ => self.parse_primary(),
        }
    }

    // primary := atom [ ^ exponent ]
    fn parse_primary(&mut self) -> Result<Expr> {
        let base = self.parse_atom()?;
        if self.peek().tok == Tok::Caret {
            self.next();
            let exp = self.parse_exponent()?;
            return Ok(Expr::pow(base, exp));
        }
        Ok(base)
    }

    fn parse_exponent(&mut self) -> Result<i32> {
        let parenthesized = if self.peek().tok == Tok::LParen {
            self.next();
            true
        } else {
            false
        };
        let mut neg = false;
        if self.peek().tok == Tok::Minus {
            self.next();
            neg = true;
        }
        let t = self.next();
        let n = match &t.tok {
            Tok::Int(n) => n.clone(),
            _ => return Err(self.err(&t, "expected integer exponent")),
        };
        let v: i32 = n
            .to_string()
            .parse()
            .map_err(|_| self.err(&t, "exponent out of range"))?;
        if parenthesized {
            self.expect(Tok::RParen, "`)` after exponent")?;
        }
        Ok(if neg { -v } else { v })
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        let t = self.next();
        match &t.tok {
            Tok::Int(n) => Ok(Expr::Const(Rational::from_integer(n.clone()))),
            Tok::LParen => {
                let e = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let name = name.clone();
                if self.peek().tok == Tok::LParen {
                    self.next();
                    let call = self.parse_call(&name, &t)?;
                    self.expect(Tok::RParen, "`)` after call argument")?;
                    Ok(call)
                } else {
                    self.resolve_ident(&name, &t)
                }
            }
            _ => Err(self.err(&t, "expected a number, symbol or `(`")),
        }
    }

    fn parse_call(&mut self, name: &str, at: &Spanned) -> Result<Expr> {
        match name {
            "dt" | "dx" => {
                if self.mode == Mode::Profile {
                    return Err(self.err(at, "derivative calls are not allowed in profile expressions"));
                }
                let arg = self.parse_expr()?;
                // the equation class takes derivatives of the field only
                let ok = matches!(&arg, Expr::Sym(s) if s.kind() == SymbolKind::Field)
                    || matches!(&arg, Expr::Deriv { .. });
                if !ok {
                    return Err(Error::NonPolynomialInput(format!(
                        "{name}(...) must apply to the field or a nested derivative (at {}:{})",
                        at.line, at.col
                    )));
                }
                let var = if name == "dt" { self.time_var.clone() } else { self.space_var.clone() };
                Ok(Expr::deriv(arg, &var, 1))
            }
            "tanh" | "sech" | "sinh" | "cosh" | "exp" => {
                let arg = self.parse_expr()?;
                if self.mode == Mode::Pde {
                    return Err(Error::NonPolynomialInput(format!(
                        "`{name}(...)` is not polynomial in the field (at {}:{})",
                        at.line, at.col
                    )));
                }
                let kind = match name {
                    "tanh" => FuncKind::Tanh,
                    "sech" => FuncKind::Sech,
                    "sinh" => FuncKind::Sinh,
                    "cosh" => FuncKind::Cosh,
                    _ => FuncKind::Exp,
                };
                Ok(Expr::func(kind, arg))
            }
            _ => Err(self.err(at, format!("unknown function `{name}`"))),
        }
    }

    fn resolve_ident(&mut self, name: &str, at: &Spanned) -> Result<Expr> {
        match name {
            "c" => return Ok(Expr::int(1)), // fixed to 1; never survives parsing
            "u" => {
                if self.mode == Mode::Profile {
                    return Err(self.err(at, "the field `u` cannot appear in a profile expression"));
                }
                return Ok(Expr::Sym(self.field.clone()));
            }
            "x" | "t" => {
                if self.mode == Mode::Pde {
                    return Err(self.err(
                        at,
                        format!("explicit `{name}` is not allowed; derivatives enter via dt(...)/dx(...)"),
                    ));
                }
            }
            "xi" => {
                if self.mode == Mode::Profile {
                    self.used.insert(self.xi.clone());
                    return Ok(Expr::Sym(self.xi.clone()));
                }
                return Err(self.err(at, "`xi` only appears after the traveling-wave reduction"));
            }
            _ => {}
        }
        if let Some(s) = self.params.get(name) {
            return Ok(Expr::Sym(s.clone()));
        }
        match self.mode {
            Mode::Pde => Err(Error::UndeclaredSymbol {
                name: name.to_string(),
                line: at.line,
                col: at.col,
            }),
            Mode::Profile => {
                if let Some(s) = self.known.get(name) {
                    self.used.insert(s.clone());
                    return Ok(Expr::Sym(s.clone()));
                }
                let s = Symbol::param(name);
                self.used.insert(s.clone());
                self.known.insert(name.to_string(), s.clone());
                Ok(Expr::Sym(s))
            }
        }
    }
}

/// Validates the normalized lhs of an input equation: polynomial in the
/// field and its derivatives, rational in the parameters.
fn validate_polynomial(lhs: &Expr) -> Result<()> {
    fn check_atom(atom: &Expr, exp: i32) -> Result<()> {
        match atom {
            Expr::Sym(s) => {
                if s.kind() == SymbolKind::Field && exp < 0 {
                    return Err(Error::NonPolynomialInput(
                        "the field appears in a denominator".into(),
                    ));
                }
                Ok(())
            }
            Expr::Deriv { .. } => {
                if exp < 0 {
                    return Err(Error::NonPolynomialInput(
                        "a derivative of the field appears in a denominator".into(),
                    ));
                }
                Ok(())
            }
            Expr::Func(kind, _) => Err(Error::NonPolynomialInput(format!(
                "`{}(...)` is not polynomial in the field",
                kind.name()
            ))),
            Expr::IntPow(base, _) => {
                if base.contains_field() {
                    Err(Error::NonPolynomialInput(
                        "the field appears in a denominator".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            other => Err(Error::NonPolynomialInput(format!(
                "unsupported atom `{other}` in input equation"
            ))),
        }
    }
    match lhs {
        Expr::Sum(parts) => {
            for p in parts {
                validate_polynomial(p)?;
            }
            Ok(())
        }
        Expr::Product(parts) => {
            for p in parts {
                match p {
                    Expr::Const(_) => {}
                    Expr::IntPow(b, k) => check_atom(b, *k)?,
                    other => check_atom(other, 1)?,
                }
            }
            Ok(())
        }
        Expr::Const(_) => Ok(()),
        Expr::IntPow(b, k) => check_atom(b, *k),
        other => check_atom(other, 1),
    }
}

/// Parses an equation file into a [`PdeEquation`].
pub fn parse_equation(text: &str) -> Result<PdeEquation> {
    let mut p = Parser::new(text, Mode::Pde, &[])?;
    p.parse_param_decls()?;
    let lhs = p.parse_expr()?;
    let eq_tok = p.next();
    if eq_tok.tok != Tok::Equals {
        return Err(p.err(&eq_tok, "expected `= 0` to end the equation"));
    }
    let zero = p.next();
    match &zero.tok {
        Tok::Int(n) if num_traits::Zero::is_zero(n) => {}
        _ => return Err(p.err(&zero, "the right-hand side must be literal 0")),
    }
    if p.peek().tok == Tok::Semi {
        p.next();
    }
    let end = p.next();
    if end.tok != Tok::Eof {
        return Err(p.err(&end, "expected end of input after the equation"));
    }

    let lhs = normalize(&lhs);
    validate_polynomial(&lhs)?;
    if !lhs.contains_field() {
        return Err(Error::NonPolynomialInput(
            "the equation does not involve the field `u`".into(),
        ));
    }
    Ok(PdeEquation {
        lhs,
        field: p.field.clone(),
        space_var: p.space_var.clone(),
        time_var: p.time_var.clone(),
        parameters: p.params.values().cloned().collect(),
        param_values: p.declared_values.clone(),
    })
}

/// Parses a closed-form profile expression in `xi`.
///
/// `known` supplies symbols resolvable by name (ansatz unknowns, `v`, `C`,
/// equation parameters); unknown names are auto-registered as parameters.
/// Returns the expression and every symbol it uses.
pub fn parse_profile(text: &str, known: &[Symbol]) -> Result<(Expr, BTreeSet<Symbol>)> {
    let mut p = Parser::new(text, Mode::Profile, known)?;
    let e = p.parse_expr()?;
    let end = p.next();
    if end.tok != Tok::Eof {
        return Err(p.err(&end, "expected end of input"));
    }
    let e = normalize(&e);
    Ok((e, p.used.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::differentiate;
    use crate::symbol::rat;

    #[test]
    fn parses_burgers() {
        let eq = parse_equation("param nu; dt(u) + u*dx(u) - nu*dx(dx(u)) = 0").unwrap();
        let u = eq.field.clone();
        let nu = Symbol::param("nu");
        let ut = Expr::deriv(Expr::sym(&u), &eq.time_var, 1);
        let ux = Expr::deriv(Expr::sym(&u), &eq.space_var, 1);
        let uxx = Expr::deriv(Expr::sym(&u), &eq.space_var, 2);
        let expect = normalize(&Expr::sum(vec![
            ut,
            Expr::product(vec![Expr::sym(&u), ux]),
            Expr::product(vec![Expr::sym(&nu), uxx]).neg(),
        ]));
        assert_eq!(eq.lhs, expect);
        assert_eq!(eq.parameters, vec![nu]);
    }

    #[test]
    fn parses_drp_shape() {
        let eq = parse_equation(
            "param sigma; param K;\n-dt(u) - (sigma/2)*dt(dt(u)) + K*dx(u) = 0",
        )
        .unwrap();
        assert_eq!(eq.parameters.len(), 2);
        let s = eq.lhs.to_string();
        assert!(s.contains("dt(dt(u))"), "got {s}");
    }

    #[test]
    fn rejects_non_polynomial() {
        let err = parse_equation("dt(u) + exp(u) = 0").unwrap_err();
        assert!(matches!(err, Error::NonPolynomialInput(_)), "{err:?}");
    }

    #[test]
    fn rejects_field_in_denominator() {
        let err = parse_equation("dt(u) + 1/u = 0").unwrap_err();
        assert!(matches!(err, Error::NonPolynomialInput(_)), "{err:?}");
    }

    #[test]
    fn rejects_undeclared() {
        let err = parse_equation("dt(u) + nu*u = 0").unwrap_err();
        assert!(matches!(err, Error::UndeclaredSymbol { .. }), "{err:?}");
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_equation("param nu; dt(u) + = 0").unwrap_err();
        match err {
            Error::Syntax { line, col, .. } => {
                assert_eq!(line, 1);
                assert!(col > 10);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn c_reads_as_one() {
        let eq = parse_equation("param a; dt(u) + c*a*u = 0").unwrap();
        let s = eq.lhs.to_string();
        assert!(!s.contains('c'), "got {s}");
    }

    #[test]
    fn param_defaults_parse() {
        let eq = parse_equation("param nu = 1/2; dt(u) - nu*dx(dx(u)) = 0").unwrap();
        assert_eq!(eq.param_values[&Symbol::param("nu")], rat(1, 2));
    }

    #[test]
    fn comments_and_whitespace_ignored() {
        let eq = parse_equation(
            "# viscous example\nparam nu;   # viscosity\n  dt(u)\n  - nu*dx(dx(u)) = 0",
        )
        .unwrap();
        assert_eq!(eq.parameters.len(), 1);
    }

    #[test]
    fn print_parse_round_trip() {
        let src = "param nu; param K; dt(u) + K*u*dx(u) - nu*dx(dx(u)) + u^3/3 = 0";
        let eq = parse_equation(src).unwrap();
        let printed = format!("param nu; param K; {} = 0", eq.lhs);
        let eq2 = parse_equation(&printed).unwrap();
        assert_eq!(eq.lhs, eq2.lhs);
    }

    #[test]
    fn profile_parses_hyperbolics() {
        let v0 = Symbol::new("V0", SymbolKind::AnsatzUnknown);
        let c1 = Symbol::new("C1", SymbolKind::AnsatzUnknown);
        let (e, used) = parse_profile("V0 - 2*nu*C1*tanh(C1*xi)", &[v0.clone(), c1.clone()]).unwrap();
        assert!(used.contains(&v0) && used.contains(&c1));
        let xi = Symbol::new("xi", SymbolKind::IndependentVar);
        let d = differentiate(&e, &xi);
        assert!(d.to_string().contains("sech"));
    }

    #[test]
    fn profile_rejects_field_and_derivs() {
        assert!(parse_profile("u + 1", &[]).is_err());
        assert!(parse_profile("dx(u)", &[]).is_err());
    }
}
