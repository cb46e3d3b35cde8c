//! End-to-end solve pipeline and its JSON report.
//!
//! `run_solve` drives parse -> reduce -> integrate -> balance -> substitute
//! -> collect -> solve -> verify and returns all intermediate artifacts;
//! `build_report` flattens them into the stable JSON schema shared by the
//! CLI and the browser demo.

use crate::ansatz::{
    balance_order, build_ansatz, collect_system, substitute_ansatz, to_exponential, AlgebraicSystem,
    AnsatzSpec, ExpPolynomial,
};
use crate::builtin::{builtin_equation, drp_claimed_audit_env, DrpConfig, DRP_CLAIMED_PROFILE};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::parser::{parse_equation, parse_profile, PdeEquation};
use crate::reduce::{
    integrate_once, integration_constant_symbol, specialize_constant_zero, traveling_wave_reduce,
    wave_speed_symbol, TravelingOde,
};
use crate::solve::{
    apply_branch, compare_constant_zero, solve_by_cases, LossReport, LossStatus, SolveOutcome,
};
use crate::symbol::{rat_to_f64, Symbol};
use crate::verify::{scan_parameters, verify_ode, GridSpec, ResidualReport, DEFAULT_TOLERANCE};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Where the equation comes from.
#[derive(Debug, Clone)]
pub enum EquationSource {
    Builtin { name: String, drp: Option<DrpConfig> },
    Text(String),
}

/// One solve invocation.
#[derive(Debug, Clone)]
pub struct SolveRequest {
    pub source: EquationSource,
    pub order_override: Option<u32>,
    /// Keep the integration constant symbolic (default). When false the
    /// constant is pinned to zero and the result is compared against the
    /// full solve.
    pub keep_constant: bool,
    pub tolerance: f64,
    pub samples: usize,
    pub depth_limit: usize,
}

impl SolveRequest {
    pub fn builtin(name: &str) -> Self {
        SolveRequest {
            source: EquationSource::Builtin { name: name.to_string(), drp: None },
            order_override: None,
            keep_constant: true,
            tolerance: DEFAULT_TOLERANCE,
            samples: 20,
            depth_limit: 12,
        }
    }

    pub fn text(src: &str) -> Self {
        SolveRequest {
            source: EquationSource::Text(src.to_string()),
            ..SolveRequest::builtin("burgers")
        }
    }
}

/// Everything the pipeline produced, pre-serialization.
pub struct PipelineArtifacts {
    pub pde: PdeEquation,
    pub reduced: TravelingOde,
    /// Always carries the symbolic constant.
    pub integrated_full: TravelingOde,
    /// The ODE actually solved (C pinned to zero when requested).
    pub integrated: TravelingOde,
    pub spec: AnsatzSpec,
    pub exp_poly: ExpPolynomial,
    pub system: AlgebraicSystem,
    pub outcome: SolveOutcome,
    /// Per-branch verification scans; None for stuck branches.
    pub verifications: Vec<Option<Vec<ResidualReport>>>,
    /// Present when the constant was pinned: the full solve it is compared
    /// against, and the pairing report.
    pub comparison: Option<(SolveOutcome, LossReport)>,
    pub claimed_audit: Option<ClaimedAudit>,
}

impl PipelineArtifacts {
    /// True when every non-stuck branch passed its scan.
    pub fn all_verified(&self) -> bool {
        self.outcome
            .branches
            .iter()
            .zip(&self.verifications)
            .all(|(b, v)| match v {
                Some(reports) => reports.iter().all(|r| r.passed),
                None => b.is_stuck(),
            })
    }
}

/// Residual audit of the claimed closed-form branch shipped with a builtin.
pub struct ClaimedAudit {
    pub description: String,
    pub profile: Expr,
    pub env: BTreeMap<Symbol, f64>,
    pub report: ResidualReport,
}

fn load_equation(source: &EquationSource) -> Result<PdeEquation> {
    match source {
        EquationSource::Builtin { name, drp } => builtin_equation(name, drp.as_ref()),
        EquationSource::Text(src) => parse_equation(src),
    }
}

fn solve_path(
    ode: &TravelingOde,
    constant: Option<&Symbol>,
    order_override: Option<u32>,
    depth_limit: usize,
) -> Result<(AnsatzSpec, ExpPolynomial, AlgebraicSystem, SolveOutcome)> {
    let order = match order_override {
        Some(n) => n,
        None => balance_order(ode)?,
    };
    let spec = AnsatzSpec::new(order, &ode.xi, &ode.wave_speed);
    let substituted = substitute_ansatz(ode, &spec)?;
    let ep = to_exponential(&substituted, &ode.xi)?;
    let system = collect_system(&ep, &spec.unknowns_with(constant))?;
    let outcome = solve_by_cases(&system, depth_limit)?;
    Ok((spec, ep, system, outcome))
}

/// Runs the full pipeline for a request.
pub fn run_solve(req: &SolveRequest) -> Result<PipelineArtifacts> {
    let pde = load_equation(&req.source)?;
    let v = wave_speed_symbol();
    let c = integration_constant_symbol();
    let reduced = traveling_wave_reduce(&pde, &v);
    let integrated_full = integrate_once(&reduced, &c)?;

    let (integrated, constant) = if req.keep_constant {
        (integrated_full.clone(), Some(&c))
    } else {
        (specialize_constant_zero(&integrated_full)?, None)
    };

    let (spec, exp_poly, system, outcome) =
        solve_path(&integrated, constant, req.order_override, req.depth_limit)?;

    // verification scans, one deterministic seed per branch
    let mut verifications = Vec::with_capacity(outcome.branches.len());
    for (i, branch) in outcome.branches.iter().enumerate() {
        if branch.is_stuck() {
            verifications.push(None);
            continue;
        }
        let reports = scan_parameters(
            branch,
            &spec,
            &integrated,
            req.samples,
            req.tolerance,
            0x50_1A_E0 + i as u64,
        )?;
        verifications.push(Some(reports));
    }

    // when the constant is pinned, run the full solve and pair the branches
    let comparison = if req.keep_constant {
        None
    } else {
        let (_, _, _, full_outcome) =
            solve_path(&integrated_full, Some(&c), req.order_override, req.depth_limit)?;
        let unknowns = spec.unknowns_with(Some(&c));
        let report = compare_constant_zero(&full_outcome, &outcome, &c, &unknowns);
        Some((full_outcome, report))
    };

    let claimed_audit = match &req.source {
        EquationSource::Builtin { name, drp } if name == "drp" => {
            Some(audit_claimed_branch(&integrated_full, drp.clone().unwrap_or_default())?)
        }
        _ => None,
    };

    Ok(PipelineArtifacts {
        pde,
        reduced,
        integrated_full,
        integrated,
        spec,
        exp_poly,
        system,
        outcome,
        verifications,
        comparison,
        claimed_audit,
    })
}

/// Verifies the shipped claimed branch against the integrated ODE at the
/// reference instantiation (tolerance 1e-6; the audit is expected to fail
/// with a xi-dependent residual of the order of |C|).
pub fn audit_claimed_branch(
    integrated: &TravelingOde,
    config: DrpConfig,
) -> Result<ClaimedAudit> {
    let known: Vec<Symbol> = vec![
        Symbol::new("V0", crate::symbol::SymbolKind::AnsatzUnknown),
        Symbol::new("C1", crate::symbol::SymbolKind::AnsatzUnknown),
        integrated.wave_speed.clone(),
        integration_constant_symbol(),
    ];
    let (profile, _) = parse_profile(DRP_CLAIMED_PROFILE, &known)?;
    let mut env = BTreeMap::new();
    for (name, value) in drp_claimed_audit_env(&config) {
        let sym = known
            .iter()
            .find(|s| s.name() == name)
            .cloned()
            .unwrap_or_else(|| Symbol::param(&name));
        env.insert(sym, value);
    }
    let report = verify_ode(&profile, integrated, &env, &GridSpec::default(), 1e-6)?;
    Ok(ClaimedAudit {
        description: format!(
            "claimed kink branch v = K, U1 = -C/(2 C1 v^2 sigma) audited at {}",
            config.expanded_k()
        ),
        profile,
        env,
        report,
    })
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub equation: String,
    pub parameters: Vec<String>,
    pub reduced: String,
    pub integrated: String,
    pub integration_constant: Option<String>,
    pub ansatz_order: u32,
    pub ansatz: String,
    pub multiplier: MultiplierReport,
    pub system: Vec<String>,
    pub system_coefficients: Vec<CoefficientReport>,
    pub branches: Vec<BranchReport>,
    pub case_log: Vec<String>,
    pub pruned: Vec<PrunedReport>,
    pub loss_report: Option<LossReportJson>,
    pub drp: Option<DrpReport>,
    pub claimed_branch_audit: Option<AuditReport>,
    pub all_verified: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub d: u32,
    pub q: u32,
    #[serde(default, skip_serializing_if = "is_zero_u32")]
    pub phase_d: u32,
}

fn is_zero_u32(v: &u32) -> bool {
    *v == 0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub exponent: i64,
    pub poly: String,
    pub duplicate_of: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchReport {
    pub assignments: BTreeMap<String, String>,
    pub free: Vec<String>,
    pub constraints: Vec<String>,
    pub class: String,
    pub residual: Option<ResidualSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stuck_equations: Vec<String>,
    pub profile: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub samples: usize,
    pub max_abs_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrunedReport {
    pub assignments: BTreeMap<String, String>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossReportJson {
    pub entries: Vec<LossEntryJson>,
    pub gained: Vec<usize>,
    pub lost_count: usize,
    pub empty: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossEntryJson {
    /// Index into the *full* solve's branch list.
    pub full_branch: usize,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binding: Option<String>,
    pub counterparts: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DrpReport {
    pub m: u32,
    pub gamma: Vec<String>,
    pub sigma: String,
    pub mu: String,
    pub re_h: String,
    pub k_collapsed: String,
    pub k_expanded: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub description: String,
    pub profile: String,
    pub env: BTreeMap<String, f64>,
    pub max_abs_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn loss_status_json(status: &LossStatus) -> (String, Option<String>) {
    match status {
        LossStatus::Unchanged => ("unchanged".into(), None),
        LossStatus::ForcedZero => ("constant_forced_to_zero".into(), None),
        LossStatus::LostFreeSymbol { binding } => {
            ("lost_at_c0_free_symbol_bound".into(), Some(binding.to_string()))
        }
        LossStatus::LostEntirely => ("lost_at_c0_no_member".into(), None),
        LossStatus::Collapses { from, to } => {
            (format!("lost_at_c0_collapses_{from}_to_{to}"), None)
        }
    }
}

/// Flattens pipeline artifacts into the JSON report.
pub fn build_report(req: &SolveRequest, art: &PipelineArtifacts) -> SolveReport {
    let branches = art
        .outcome
        .branches
        .iter()
        .zip(&art.verifications)
        .map(|(b, ver)| {
            let residual = ver.as_ref().map(|reports| {
                let max = reports
                    .iter()
                    .map(|r| r.max_abs_residual)
                    .fold(0.0f64, f64::max);
                ResidualSummary {
                    samples: reports.len(),
                    max_abs_residual: max,
                    tolerance: req.tolerance,
                    passed: reports.iter().all(|r| r.passed),
                }
            });
            BranchReport {
                assignments: b
                    .assignments
                    .iter()
                    .map(|(s, rf)| (s.name().to_string(), rf.to_string()))
                    .collect(),
                free: b.free_symbols.iter().map(|s| s.name().to_string()).collect(),
                constraints: b.nonzero_constraints.iter().map(|c| c.to_string()).collect(),
                class: b.classification.to_string(),
                residual,
                stuck_equations: b.residual_equations.iter().map(|r| r.to_string()).collect(),
                profile: apply_branch(b, &art.spec).to_string(),
            }
        })
        .collect();

    let loss_report = art.comparison.as_ref().map(|(_, loss)| LossReportJson {
        entries: loss
            .entries
            .iter()
            .map(|e| {
                let (status, binding) = loss_status_json(&e.status);
                LossEntryJson {
                    full_branch: e.branch_index,
                    status,
                    binding,
                    counterparts: e.counterparts.clone(),
                }
            })
            .collect(),
        gained: loss.gained.clone(),
        lost_count: loss.lost_count(),
        empty: loss.is_empty(),
    });

    let drp = match &req.source {
        EquationSource::Builtin { name, drp } if name == "drp" => {
            let config = drp.clone().unwrap_or_default();
            Some(DrpReport {
                m: config.m,
                gamma: config.gamma.iter().map(crate::symbol::rat_to_string).collect(),
                sigma: crate::symbol::rat_to_string(&config.sigma),
                mu: crate::symbol::rat_to_string(&config.mu),
                re_h: crate::symbol::rat_to_string(&config.re_h),
                k_collapsed: crate::symbol::rat_to_string(&config.k_value()),
                k_expanded: config.expanded_k(),
            })
        }
        _ => None,
    };

    let claimed_branch_audit = art.claimed_audit.as_ref().map(|audit| AuditReport {
        description: audit.description.clone(),
        profile: audit.profile.to_string(),
        env: audit
            .env
            .iter()
            .map(|(s, v)| (s.name().to_string(), *v))
            .collect(),
        max_abs_residual: audit.report.max_abs_residual,
        tolerance: audit.report.tolerance,
        passed: audit.report.passed,
    });

    SolveReport {
        equation: format!("{}", art.pde),
        parameters: art.pde.parameters.iter().map(|s| s.name().to_string()).collect(),
        reduced: format!("{}", art.reduced),
        integrated: format!("{}", art.integrated),
        integration_constant: art
            .integrated
            .integration_constant
            .as_ref()
            .map(|s| s.name().to_string()),
        ansatz_order: art.spec.order,
        ansatz: build_ansatz(&art.spec).to_string(),
        multiplier: MultiplierReport {
            d: art.exp_poly.multiplier.d,
            q: art.exp_poly.multiplier.q,
            phase_d: art.exp_poly.multiplier.phase_d,
        },
        system: art.system.equations.iter().map(|e| format!("{e} = 0")).collect(),
        system_coefficients: art
            .system
            .provenance
            .iter()
            .map(|p| CoefficientReport {
                exponent: p.exponent,
                poly: p.poly.to_string(),
                duplicate_of: p.duplicate_of,
            })
            .collect(),
        branches,
        case_log: art
            .outcome
            .splits
            .iter()
            .map(|s| format!("depth {}: {} = 0 | branch on {}", s.depth, s.equation, s.factor))
            .collect(),
        pruned: art
            .outcome
            .pruned
            .iter()
            .map(|p| PrunedReport {
                assignments: p
                    .assignments
                    .iter()
                    .map(|(s, rf)| (s.name().to_string(), rf.to_string()))
                    .collect(),
                reason: p.reason.clone(),
            })
            .collect(),
        loss_report,
        drp,
        claimed_branch_audit,
        all_verified: art.all_verified(),
    }
}

/// Convenience wrapper: request in, JSON report out.
pub fn solve_to_report(req: &SolveRequest) -> Result<SolveReport> {
    let art = run_solve(req)?;
    Ok(build_report(req, &art))
}

/// Resolved numeric bindings for a verification env: declared parameter
/// defaults first, then explicit overrides.
pub fn build_env(
    pde: &PdeEquation,
    overrides: &[(String, f64)],
    extra_symbols: &[Symbol],
) -> BTreeMap<Symbol, f64> {
    let mut env = BTreeMap::new();
    for (sym, value) in &pde.param_values {
        env.insert(sym.clone(), rat_to_f64(value));
    }
    for (name, value) in overrides {
        let sym = pde
            .parameters
            .iter()
            .chain(extra_symbols.iter())
            .find(|s| s.name() == name)
            .cloned()
            .unwrap_or_else(|| Symbol::param(name));
        env.insert(sym, *value);
    }
    env
}

impl std::fmt::Display for ClaimedAudit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}", self.description)?;
        writeln!(f, "  profile: {}", self.profile)?;
        write!(
            f,
            "  max |residual| = {:.6e} (tolerance {:.0e}): {}",
            self.report.max_abs_residual,
            self.report.tolerance,
            if self.report.passed { "PASS" } else { "FAIL" }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burgers_report_shape() {
        let req = SolveRequest::builtin("burgers");
        let report = solve_to_report(&req).unwrap();
        assert_eq!(report.ansatz_order, 1);
        assert_eq!(report.multiplier.d, 2);
        assert!(report.branches.iter().any(|b| b.class == "kink"));
        assert!(report.all_verified);
        assert!(report.loss_report.is_none());
        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: SolveReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.branches.len(), report.branches.len());
    }

    #[test]
    fn burgers_no_constant_includes_loss() {
        let mut req = SolveRequest::builtin("burgers");
        req.keep_constant = false;
        let report = solve_to_report(&req).unwrap();
        let loss = report.loss_report.expect("loss report present");
        assert!(!loss.empty);
        assert!(loss.lost_count >= 1);
        assert!(report.integration_constant.is_none());
    }

    #[test]
    fn drp_report_audits_claimed_branch() {
        let req = SolveRequest::builtin("drp");
        let report = solve_to_report(&req).unwrap();
        let audit = report.claimed_branch_audit.expect("audit present");
        assert!(!audit.passed, "the claimed branch must fail the audit");
        assert!(audit.max_abs_residual > 0.5 && audit.max_abs_residual < 2.0);
        assert!(report.drp.is_some());
        assert!(report.branches.iter().all(|b| b.class == "trivial"));
    }

    #[test]
    fn reports_are_deterministic() {
        let req = SolveRequest::builtin("burgers");
        let a = serde_json::to_string(&solve_to_report(&req).unwrap()).unwrap();
        let b = serde_json::to_string(&solve_to_report(&req).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
