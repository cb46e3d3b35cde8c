//! Independent numeric ground truth: residuals of candidate profiles in the
//! integrated ODE and in the original PDE.
//!
//! Derivatives are always taken symbolically before evaluation; finite
//! differences never enter a residual. The PDE check is the final authority:
//! it catches integration-constant bookkeeping errors that the ODE check
//! cannot see.

use crate::error::{Error, Result};
use crate::expr::{eval_numeric, substitute, Expr};
use crate::parser::PdeEquation;
use crate::poly::MultiPoly;
use crate::reduce::TravelingOde;
use crate::solve::SolutionBranch;
use crate::symbol::Symbol;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::io::Write;

/// Uniform 1D sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(start: f64, end: f64, points: usize) -> Self {
        assert!(points >= 2 && end > start);
        GridSpec { start, end, points }
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.end - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.start + step * i as f64).collect()
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::new(-10.0, 10.0, 401)
    }
}

/// Default (x, t) grid for the PDE check.
pub fn default_pde_grid() -> (GridSpec, GridSpec) {
    (GridSpec::new(-10.0, 10.0, 101), GridSpec::new(0.0, 5.0, 51))
}

/// Default absolute residual tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyTarget {
    IntegratedOde,
    OriginalPde,
}

/// Outcome of one residual evaluation.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub max_abs_residual: f64,
    pub grid: Vec<f64>,
    pub time_grid: Option<Vec<f64>>,
    pub parameter_instantiation: BTreeMap<Symbol, f64>,
    pub target: VerifyTarget,
    pub tolerance: f64,
    pub passed: bool,
    /// (xi, u) samples of the verified profile, for CSV emission.
    pub profile_samples: Vec<(f64, f64)>,
}

/// Substitutes the profile into the integrated ODE and reports the maximum
/// absolute residual over the grid. `env` must bind every free symbol,
/// including the integration constant.
pub fn verify_ode(
    profile: &Expr,
    ode: &TravelingOde,
    env: &BTreeMap<Symbol, f64>,
    grid: &GridSpec,
    tolerance: f64,
) -> Result<ResidualReport> {
    let mut bindings = BTreeMap::new();
    bindings.insert(ode.field.clone(), profile.clone());
    let residual = substitute(&ode.lhs, &bindings)?;
    let xs = grid.values();
    let mut max_abs: f64 = 0.0;
    let mut samples = Vec::with_capacity(xs.len());
    for &x in &xs {
        let mut env_pt = env.clone();
        env_pt.insert(ode.xi.clone(), x);
        let r = eval_numeric(&residual, &env_pt)?;
        max_abs = max_abs.max(r.abs());
        samples.push((x, eval_numeric(profile, &env_pt)?));
    }
    Ok(ResidualReport {
        max_abs_residual: max_abs,
        grid: xs,
        time_grid: None,
        parameter_instantiation: env.clone(),
        target: VerifyTarget::IntegratedOde,
        tolerance,
        passed: max_abs <= tolerance,
        profile_samples: samples,
    })
}

/// Evaluates the PDE residual at `u(x,t) = profile(x - v t)` with symbolic
/// derivatives. `env` must bind the wave speed.
pub fn verify_pde(
    profile: &Expr,
    pde: &PdeEquation,
    env: &BTreeMap<Symbol, f64>,
    xi: &Symbol,
    wave_speed: &Symbol,
    x_grid: &GridSpec,
    t_grid: &GridSpec,
    tolerance: f64,
) -> Result<ResidualReport> {
    // xi -> x - v*t inside the profile
    let moving = {
        let mut b = BTreeMap::new();
        b.insert(
            xi.clone(),
            Expr::sum(vec![
                Expr::sym(&pde.space_var),
                Expr::product(vec![Expr::int(-1), Expr::sym(wave_speed), Expr::sym(&pde.time_var)]),
            ]),
        );
        substitute(profile, &b)?
    };
    let residual = {
        let mut b = BTreeMap::new();
        b.insert(pde.field.clone(), moving);
        substitute(&pde.lhs, &b)?
    };
    let xs = x_grid.values();
    let ts = t_grid.values();
    let mut max_abs: f64 = 0.0;
    for &t in &ts {
        for &x in &xs {
            let mut env_pt = env.clone();
            env_pt.insert(pde.space_var.clone(), x);
            env_pt.insert(pde.time_var.clone(), t);
            let r = eval_numeric(&residual, &env_pt)?;
            max_abs = max_abs.max(r.abs());
        }
    }
    Ok(ResidualReport {
        max_abs_residual: max_abs,
        grid: xs,
        time_grid: Some(ts),
        parameter_instantiation: env.clone(),
        target: VerifyTarget::OriginalPde,
        tolerance,
        passed: max_abs <= tolerance,
        profile_samples: Vec::new(),
    })
}

/// Samples the free symbols of a branch log-uniformly in `[1e-2, 1e2]` with
/// random signs, honoring the nonzero constraints with margin `1e-6`, and
/// runs the ODE check per sample. Deterministic for a fixed seed.
pub fn scan_parameters(
    branch: &SolutionBranch,
    spec: &crate::ansatz::AnsatzSpec,
    ode: &TravelingOde,
    n_samples: usize,
    tolerance: f64,
    seed: u64,
) -> Result<Vec<ResidualReport>> {
    assert!(n_samples >= 1);
    if branch.is_stuck() {
        return Err(Error::ConstraintUnsatisfiable(
            "the branch is stuck; it claims no closed-form profile".into(),
        ));
    }
    let profile = crate::solve::apply_branch(branch, spec);

    // symbols needing numeric values: free symbols of the profile, the ODE,
    // the constraints and the assignment right-hand sides, minus the field,
    // xi, and the assigned unknowns themselves
    let mut seen = std::collections::BTreeSet::new();
    for s in profile.free_symbols().into_iter().chain(ode.lhs.free_symbols()) {
        seen.insert(s);
    }
    for c in &branch.nonzero_constraints {
        seen.extend(c.symbols());
    }
    for rf in branch.assignments.values() {
        seen.extend(rf.symbols());
    }
    let needed: Vec<Symbol> = seen
        .into_iter()
        .filter(|s| *s != ode.field && *s != ode.xi && !branch.assignments.contains_key(s))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_samples);
    const MARGIN: f64 = 1e-6;
    const MAX_TRIES: usize = 500;
    for _ in 0..n_samples {
        let mut env: Option<BTreeMap<Symbol, f64>> = None;
        for _ in 0..MAX_TRIES {
            let mut candidate = BTreeMap::new();
            for s in &needed {
                let magnitude = 10f64.powf(rng.gen_range(-2.0..2.0));
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                candidate.insert(s.clone(), sign * magnitude);
            }
            let ok = branch
                .nonzero_constraints
                .iter()
                .map(|c| constraint_magnitude(c, &candidate))
                .all(|m| m.map(|v| v >= MARGIN).unwrap_or(false));
            if ok {
                env = Some(candidate);
                break;
            }
        }
        let Some(mut env) = env else {
            return Err(Error::ConstraintUnsatisfiable(format!(
                "no sample satisfied {} constraints with margin {MARGIN}",
                branch.nonzero_constraints.len()
            )));
        };
        // derived values for assigned unknowns (including C when assigned)
        for (s, rf) in &branch.assignments {
            let v = rf.eval(&env)?;
            env.insert(s.clone(), v);
        }
        out.push(verify_ode(&profile, ode, &env, &GridSpec::default(), tolerance)?);
    }
    Ok(out)
}

fn constraint_magnitude(c: &MultiPoly, env: &BTreeMap<Symbol, f64>) -> Option<f64> {
    c.eval(env).ok().map(f64::abs)
}

/// Emits `xi,u` samples with 16 significant digits.
pub fn write_profile_csv<W: Write>(report: &ResidualReport, mut w: W) -> std::io::Result<()> {
    writeln!(w, "xi,u")?;
    for (xi, u) in &report.profile_samples {
        writeln!(w, "{xi:.15e},{u:.15e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{balance_order, substitute_ansatz, to_exponential, AnsatzSpec};
    use crate::parser::{parse_equation, parse_profile};
    use crate::reduce::{
        integrate_once, integration_constant_symbol, traveling_wave_reduce, wave_speed_symbol,
    };
    use crate::solve::{collect_system, solve_by_cases, BranchClass};
    use crate::symbol::SymbolKind;

    fn burgers() -> (PdeEquation, TravelingOde) {
        let pde = parse_equation("param nu; dt(u) + u*dx(u) - nu*dx(dx(u)) = 0").unwrap();
        let ode = traveling_wave_reduce(&pde, &wave_speed_symbol());
        let int = integrate_once(&ode, &integration_constant_symbol()).unwrap();
        (pde, int)
    }

    fn kink_profile() -> Expr {
        let (e, _) = parse_profile("V0 - 2*nu*C1*tanh(C1*xi)", &ansatz_symbols()).unwrap();
        e
    }

    fn ansatz_symbols() -> Vec<Symbol> {
        vec![
            Symbol::new("V0", SymbolKind::AnsatzUnknown),
            Symbol::new("C1", SymbolKind::AnsatzUnknown),
            Symbol::new("U1", SymbolKind::AnsatzUnknown),
            wave_speed_symbol(),
            integration_constant_symbol(),
        ]
    }

    fn kink_env() -> BTreeMap<Symbol, f64> {
        let mut env = BTreeMap::new();
        env.insert(Symbol::param("nu"), 1.0);
        env.insert(Symbol::new("C1", SymbolKind::AnsatzUnknown), 0.5);
        env.insert(Symbol::new("V0", SymbolKind::AnsatzUnknown), 0.3);
        env.insert(wave_speed_symbol(), 0.3);
        // C = 2 nu^2 C1^2 - V0^2 / 2
        env.insert(integration_constant_symbol(), 2.0 * 0.25 - 0.045);
        env
    }

    #[test]
    fn burgers_kink_satisfies_ode() {
        let (_, ode) = burgers();
        let report = verify_ode(
            &kink_profile(),
            &ode,
            &kink_env(),
            &GridSpec::default(),
            1e-12,
        )
        .unwrap();
        assert!(report.passed, "max residual {}", report.max_abs_residual);
    }

    #[test]
    fn burgers_kink_satisfies_pde() {
        let (pde, ode) = burgers();
        let (xg, tg) = default_pde_grid();
        let report = verify_pde(
            &kink_profile(),
            &pde,
            &kink_env(),
            &ode.xi,
            &ode.wave_speed,
            &xg,
            &tg,
            1e-11,
        )
        .unwrap();
        assert!(report.passed, "max residual {}", report.max_abs_residual);
    }

    #[test]
    fn perturbed_amplitude_fails() {
        let (_, ode) = burgers();
        // the same kink with the tanh amplitude off by 1%
        let (profile, _) =
            parse_profile("V0 - 2*nu*C1*tanh(C1*xi)*101/100", &ansatz_symbols()).unwrap();
        let report =
            verify_ode(&profile, &ode, &kink_env(), &GridSpec::default(), 1e-6).unwrap();
        assert!(!report.passed);
        assert!(report.max_abs_residual > 1e-4);
    }

    #[test]
    fn zero_profile_in_trivial_ode() {
        // u' = 0 with C = 0: the zero profile is exact
        let pde = parse_equation("dx(dx(u)) = 0").unwrap();
        let ode = traveling_wave_reduce(&pde, &wave_speed_symbol());
        let int = integrate_once(&ode, &integration_constant_symbol()).unwrap();
        let (profile, _) = parse_profile("0", &[]).unwrap();
        let mut env = BTreeMap::new();
        env.insert(integration_constant_symbol(), 0.0);
        let report = verify_ode(&profile, &int, &env, &GridSpec::default(), 1e-12).unwrap();
        assert_eq!(report.max_abs_residual, 0.0);
    }

    #[test]
    fn unbound_symbol_reported() {
        let (_, ode) = burgers();
        let err = verify_ode(
            &kink_profile(),
            &ode,
            &BTreeMap::new(),
            &GridSpec::default(),
            1e-9,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnboundSymbol(_)));
    }

    #[test]
    fn hyperbolics_stay_finite_across_wide_arguments() {
        let (_, ode) = burgers();
        let mut env = kink_env();
        env.insert(Symbol::new("C1", SymbolKind::AnsatzUnknown), 70.0);
        // |C1 * xi| reaches 700 on the default grid
        let report =
            verify_ode(&kink_profile(), &ode, &env, &GridSpec::default(), 1e30).unwrap();
        assert!(report.max_abs_residual.is_finite());
    }

    #[test]
    fn scan_parameters_on_solved_kink() {
        let (_, ode) = burgers();
        let n = balance_order(&ode).unwrap();
        let spec = AnsatzSpec::new(n, &ode.xi, &ode.wave_speed);
        let substituted = substitute_ansatz(&ode, &spec).unwrap();
        let ep = to_exponential(&substituted, &ode.xi).unwrap();
        let c = integration_constant_symbol();
        let sys = collect_system(&ep, &spec.unknowns_with(Some(&c))).unwrap();
        let out = solve_by_cases(&sys, 12).unwrap();
        let kink = out
            .branches
            .iter()
            .find(|b| b.classification == BranchClass::Kink)
            .unwrap();
        let reports = scan_parameters(kink, &spec, &ode, 20, 1e-9, 42).unwrap();
        assert_eq!(reports.len(), 20);
        for r in &reports {
            assert!(r.passed, "residual {} at {:?}", r.max_abs_residual, r.parameter_instantiation);
        }
    }

    #[test]
    fn csv_has_sixteen_significant_digits() {
        let (_, ode) = burgers();
        let report = verify_ode(
            &kink_profile(),
            &ode,
            &kink_env(),
            &GridSpec::new(-1.0, 1.0, 3),
            1e-9,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("xi,u"));
        let first = lines.next().unwrap();
        // mantissa with 15 decimal places -> 16 significant digits
        assert!(first.contains('.'), "{first}");
        let mantissa = first.split(',').next().unwrap();
        let decimals = mantissa.split('.').nth(1).unwrap();
        assert!(decimals.len() >= 15, "{first}");
    }
}
