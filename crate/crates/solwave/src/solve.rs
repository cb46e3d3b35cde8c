//! Case-split solving of the over-determined coefficient system.
//!
//! The search keeps a set of active equations, row-reduces them over the
//! monomial basis (row operations preserve the zero set and routinely expose
//! factorable combinations), factors every equation, and branches on the
//! factors of the most tractable one. Linear factors are solved for an
//! unknown, case-splitting on the leading coefficient when it involves other
//! unknowns. Parameters are treated as generic: a branch that forces a
//! parameter-only polynomial to vanish is pruned, with the reason recorded.
//! Branches whose remaining equations are nonlinear in every unknown are
//! returned explicitly as stuck, never dropped.

pub use crate::ansatz::AlgebraicSystem;
use crate::error::{Error, Result};
use crate::expr::{substitute, Expr};
use crate::poly::{poly_subst_ratfns, row_reduce, MultiPoly, RationalFn};
use crate::symbol::{Rational, Symbol, SymbolKind};
use num_traits::One;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use crate::ansatz::collect_system;

/// Profile shape of a solution branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchClass {
    /// Constant profile: no wave content.
    Trivial,
    /// tanh-dominated monotone front.
    Kink,
    /// sech-dominated localized pulse.
    Bell,
    /// Both tanh and sech amplitudes present.
    Mixed,
    /// Unresolved equations remain; not a claimed solution.
    Stuck,
}

impl BranchClass {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchClass::Trivial => "trivial",
            BranchClass::Kink => "kink",
            BranchClass::Bell => "bell",
            BranchClass::Mixed => "mixed",
            BranchClass::Stuck => "stuck",
        }
    }
}

impl fmt::Display for BranchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One solution branch: triangular assignments resolved to rational
/// functions of the parameters and the branch's free symbols.
#[derive(Debug, Clone)]
pub struct SolutionBranch {
    pub assignments: BTreeMap<Symbol, RationalFn>,
    pub free_symbols: Vec<Symbol>,
    pub nonzero_constraints: Vec<MultiPoly>,
    /// Equations the case analysis could not resolve (stuck branches only).
    pub residual_equations: Vec<MultiPoly>,
    pub classification: BranchClass,
}

impl SolutionBranch {
    pub fn is_stuck(&self) -> bool {
        !self.residual_equations.is_empty()
    }

    /// The assignment as a polynomial relation `sym*den - num`.
    pub fn assignment_poly(&self, sym: &Symbol) -> Option<MultiPoly> {
        let rf = self.assignments.get(sym)?;
        Some(MultiPoly::from_symbol(sym).mul(&rf.den).sub(&rf.num))
    }

    /// Checks that a polynomial relation holds identically on this branch.
    pub fn satisfies(&self, relation: &MultiPoly) -> bool {
        poly_subst_ratfns(relation, &self.assignments).is_zero()
    }
}

impl fmt::Display for SolutionBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.classification)?;
        for (s, rf) in &self.assignments {
            write!(f, " {s} = {rf};")?;
        }
        if !self.free_symbols.is_empty() {
            write!(f, " free:")?;
            for s in &self.free_symbols {
                write!(f, " {s}")?;
            }
        }
        for c in &self.nonzero_constraints {
            write!(f, " [{c} != 0]")?;
        }
        for r in &self.residual_equations {
            write!(f, " [stuck: {r} = 0]")?;
        }
        Ok(())
    }
}

/// A pruned case, kept for the audit trail.
#[derive(Debug, Clone)]
pub struct PrunedBranch {
    pub assignments: BTreeMap<Symbol, RationalFn>,
    pub reason: String,
}

/// One branching decision in the case analysis.
#[derive(Debug, Clone)]
pub struct SplitEvent {
    pub depth: usize,
    pub equation: String,
    pub factor: String,
}

/// Everything the case analysis produced.
#[derive(Debug, Clone, Default)]
pub struct SolveOutcome {
    pub branches: Vec<SolutionBranch>,
    pub pruned: Vec<PrunedBranch>,
    pub splits: Vec<SplitEvent>,
    /// Branches dropped because another branch contains them.
    pub subsumed: Vec<String>,
    /// Leaves created by the search; equals emitted + pruned.
    pub leaves: usize,
}

impl SolveOutcome {
    /// True when some branch carries wave content.
    pub fn has_nontrivial(&self) -> bool {
        self.branches
            .iter()
            .any(|b| matches!(b.classification, BranchClass::Kink | BranchClass::Bell | BranchClass::Mixed))
    }
}

// ---------------------------------------------------------------------------
// Search implementation
// ---------------------------------------------------------------------------

struct Ctx<'a> {
    unknowns: &'a [Symbol],
    unknown_set: BTreeSet<Symbol>,
    depth_limit: usize,
    out: SolveOutcome,
    emitted_raw: Vec<SolutionBranch>,
}

#[derive(Clone)]
struct State {
    active: Vec<MultiPoly>,
    stuck: Vec<MultiPoly>,
    assignments: Vec<(Symbol, RationalFn)>,
    constraints: Vec<MultiPoly>,
    depth: usize,
}

fn primitive_form(p: &MultiPoly) -> MultiPoly {
    let rc = p.rational_content();
    p.scale(&(Rational::one() / rc))
}

fn is_param_only(p: &MultiPoly, unknown_set: &BTreeSet<Symbol>) -> bool {
    p.symbols().iter().all(|s| !unknown_set.contains(s))
}

/// Content-free factors that can vanish for generic parameters: parameter-
/// only factors are split off and reported separately.
fn live_factors(
    eq: &MultiPoly,
    unknown_set: &BTreeSet<Symbol>,
) -> (Vec<MultiPoly>, Vec<MultiPoly>) {
    let mut live = Vec::new();
    let mut generic = Vec::new();
    for (f, _) in eq.factor() {
        if is_param_only(&f, unknown_set) {
            generic.push(f);
        } else {
            live.push(f);
        }
    }
    live.sort_by(|a, b| {
        (a.total_degree(), a.to_string()).cmp(&(b.total_degree(), b.to_string()))
    });
    (live, generic)
}

/// Unknowns in which the factor is linear, split into targets whose leading
/// coefficient is free of unknowns (solvable without a case split) and the
/// rest.
fn linear_targets(
    f: &MultiPoly,
    unknowns: &[Symbol],
    unknown_set: &BTreeSet<Symbol>,
) -> (Vec<Symbol>, Vec<Symbol>) {
    let mut direct = Vec::new();
    let mut split = Vec::new();
    for x in unknowns {
        if f.degree_in(x) == 1 {
            let coeff = f.as_univariate(x).remove(1);
            if is_param_only(&coeff, unknown_set) {
                direct.push(x.clone());
            } else {
                split.push(x.clone());
            }
        }
    }
    (direct, split)
}

fn factor_score(f: &MultiPoly, unknowns: &[Symbol], unknown_set: &BTreeSet<Symbol>) -> u8 {
    let (direct, split) = linear_targets(f, unknowns, unknown_set);
    if !direct.is_empty() {
        0
    } else if !split.is_empty() {
        1
    } else {
        2
    }
}

fn resolve_assignments(
    assignments: &[(Symbol, RationalFn)],
) -> BTreeMap<Symbol, RationalFn> {
    // assignment RHSes only mention unknowns assigned later, so resolving
    // back-to-front closes the chain
    let mut resolved: BTreeMap<Symbol, RationalFn> = BTreeMap::new();
    for (sym, rf) in assignments.iter().rev() {
        let num = poly_subst_ratfns(&rf.num, &resolved);
        let den = poly_subst_ratfns(&rf.den, &resolved);
        resolved.insert(sym.clone(), num.div(&den));
    }
    resolved
}

fn classify(
    assignments: &BTreeMap<Symbol, RationalFn>,
    residuals: &[MultiPoly],
    unknowns: &[Symbol],
) -> BranchClass {
    if !residuals.is_empty() {
        return BranchClass::Stuck;
    }
    let is_zero = |s: &Symbol| assignments.get(s).map(|rf| rf.is_zero()).unwrap_or(false);
    let mut tanh_present = false;
    let mut sech_present = false;
    let mut scale_zero = false;
    for s in unknowns {
        if s.kind() != SymbolKind::AnsatzUnknown {
            continue;
        }
        let name = s.name();
        if name.starts_with('U') {
            tanh_present |= !is_zero(s);
        } else if name.starts_with('V') && name != "V0" {
            sech_present |= !is_zero(s);
        } else if name.starts_with('C') {
            scale_zero |= is_zero(s);
        }
    }
    match (scale_zero, tanh_present, sech_present) {
        (true, _, _) | (false, false, false) => BranchClass::Trivial,
        (false, true, false) => BranchClass::Kink,
        (false, false, true) => BranchClass::Bell,
        (false, true, true) => BranchClass::Mixed,
    }
}

impl Ctx<'_> {
    fn emit(&mut self, state: &State) {
        self.out.leaves += 1;
        let assignments = resolve_assignments(&state.assignments);
        let assigned: BTreeSet<&Symbol> = assignments.keys().collect();
        let free_symbols: Vec<Symbol> = self
            .unknowns
            .iter()
            .filter(|s| !assigned.contains(s))
            .cloned()
            .collect();
        let mut constraints: Vec<MultiPoly> = Vec::new();
        for c in &state.constraints {
            let rf = poly_subst_ratfns(c, &assignments);
            if rf.num.as_constant().is_some() {
                continue;
            }
            let p = primitive_form(&rf.num);
            if !constraints.contains(&p) {
                constraints.push(p);
            }
        }
        let mut residuals: Vec<MultiPoly> = Vec::new();
        for r in &state.stuck {
            let rf = poly_subst_ratfns(r, &assignments);
            if !rf.num.is_zero() {
                residuals.push(primitive_form(&rf.num));
            }
        }
        let classification = classify(&assignments, &residuals, self.unknowns);
        self.emitted_raw.push(SolutionBranch {
            assignments,
            free_symbols,
            nonzero_constraints: constraints,
            residual_equations: residuals,
            classification,
        });
    }

    fn prune(&mut self, state: &State, reason: String) {
        self.out.leaves += 1;
        self.out.pruned.push(PrunedBranch {
            assignments: resolve_assignments(&state.assignments),
            reason,
        });
    }
}

/// Simplification outcome for one node iteration.
enum Simplified {
    Ok,
    Contradiction(String),
}

fn simplify(state: &mut State, unknown_set: &BTreeSet<Symbol>) -> Simplified {
    let mut next = Vec::new();
    for eq in state.active.drain(..) {
        if eq.is_zero() {
            continue;
        }
        if let Some(c) = eq.as_constant() {
            return Simplified::Contradiction(format!(
                "an equation reduces to the nonzero constant {c}"
            ));
        }
        if is_param_only(&eq, unknown_set) {
            return Simplified::Contradiction(format!(
                "the branch forces the parameter relation {eq} = 0"
            ));
        }
        next.push(primitive_form(&eq));
    }
    next.sort();
    next.dedup();
    state.active = next;
    Simplified::Ok
}

fn substitute_into_state(state: &mut State, sym: &Symbol, num: &MultiPoly, den: &MultiPoly) {
    let subst = |p: &MultiPoly| p.substitute_cleared(sym, num, den);
    state.active = state.active.iter().map(subst).collect();
    // a new assignment can unstick residual equations
    let stuck = std::mem::take(&mut state.stuck);
    for p in stuck {
        state.active.push(subst(&p));
    }
}

fn is_constrained_nonzero(f: &MultiPoly, constraints: &[MultiPoly]) -> bool {
    let fp = primitive_form(f);
    constraints.iter().any(|c| primitive_form(c) == fp)
}

fn solve_rec(mut state: State, ctx: &mut Ctx<'_>) -> Result<()> {
    if state.depth > ctx.depth_limit {
        return Err(Error::DepthLimitExceeded(ctx.depth_limit));
    }
    loop {
        match simplify(&mut state, &ctx.unknown_set) {
            Simplified::Contradiction(reason) => {
                ctx.prune(&state, reason);
                return Ok(());
            }
            Simplified::Ok => {}
        }
        if state.active.len() > 1 {
            state.active = row_reduce(&state.active);
        }

        // rank equations: prefer progress without coefficient case splits,
        // then fewest factors, lowest degree, lexicographic
        let mut best: Option<(u8, usize, u32, String, usize)> = None;
        let mut inert: Vec<usize> = Vec::new();
        for (i, eq) in state.active.iter().enumerate() {
            let (live, _) = live_factors(eq, &ctx.unknown_set);
            if live.is_empty() {
                // all factors parameter-only: contradiction
                ctx.prune(
                    &state,
                    format!("the branch forces the parameter relation {eq} = 0"),
                );
                return Ok(());
            }
            let score = live
                .iter()
                .map(|f| factor_score(f, ctx.unknowns, &ctx.unknown_set))
                .min()
                .unwrap();
            let every_factor_live_is_self = live.len() == 1 && live[0] == *eq;
            if score == 2 && every_factor_live_is_self {
                inert.push(i);
                continue;
            }
            let key = (score, live.len(), eq.total_degree(), eq.to_string(), i);
            if best.as_ref().map(|b| key < *b).unwrap_or(true) {
                best = Some(key);
            }
        }

        let Some((_, _, _, _, idx)) = best else {
            // nothing tractable: move inert equations to the stuck set
            for i in inert.into_iter().rev() {
                let eq = state.active.remove(i);
                state.stuck.push(eq);
            }
            if state.active.is_empty() {
                ctx.emit(&state);
                return Ok(());
            }
            continue;
        };

        let eq = state.active.remove(idx);
        let (live, generic) = live_factors(&eq, &ctx.unknown_set);
        for g in generic {
            if !state.constraints.contains(&g) {
                state.constraints.push(g);
            }
        }

        if live.len() == 1 {
            let f = &live[0];
            if is_constrained_nonzero(f, &state.constraints) {
                ctx.prune(
                    &state,
                    format!("`{f}` must vanish but is constrained nonzero"),
                );
                return Ok(());
            }
            let (direct, split) = linear_targets(f, ctx.unknowns, &ctx.unknown_set);
            if let Some(x) = direct.first() {
                // solve in place, no branching
                let coeffs = f.as_univariate(x);
                let a = coeffs[1].clone();
                let b = coeffs[0].clone();
                if !a.as_constant().is_some() && !state.constraints.contains(&a) {
                    state.constraints.push(a.clone());
                }
                let rf = RationalFn::new(b.neg(), a.clone());
                substitute_into_state(&mut state, x, &rf.num, &rf.den);
                state.assignments.push((x.clone(), rf));
                continue;
            }
            if let Some(x) = split.first() {
                branch_on_linear_split(&state, ctx, f, x)?;
                return Ok(());
            }
            // no linear unknown anywhere: park it
            state.stuck.push(f.clone());
            continue;
        }

        // several factors: one child per factor, earlier factors assumed
        // nonzero in later children
        let mut assumed: Vec<MultiPoly> = Vec::new();
        for f in &live {
            ctx.out.splits.push(SplitEvent {
                depth: state.depth,
                equation: eq.to_string(),
                factor: f.to_string(),
            });
            let mut child = state.clone();
            child.depth = state.depth + 1;
            child.constraints.extend(assumed.iter().cloned());
            if is_constrained_nonzero(f, &child.constraints) {
                ctx.prune(
                    &child,
                    format!("factor `{f}` is constrained nonzero on this branch"),
                );
            } else {
                child.active.push(f.clone());
                solve_rec(child, ctx)?;
            }
            assumed.push(f.clone());
        }
        return Ok(());
    }
}

fn branch_on_linear_split(
    state: &State,
    ctx: &mut Ctx<'_>,
    f: &MultiPoly,
    x: &Symbol,
) -> Result<()> {
    let coeffs = f.as_univariate(x);
    let a = coeffs[1].clone();
    let b = coeffs[0].clone();
    ctx.out.splits.push(SplitEvent {
        depth: state.depth,
        equation: f.to_string(),
        factor: format!("leading coefficient {a} of {x}"),
    });

    // case a != 0: solve for x
    {
        let mut child = state.clone();
        child.depth = state.depth + 1;
        child.constraints.push(a.clone());
        let rf = RationalFn::new(b.neg(), a.clone());
        substitute_into_state(&mut child, x, &rf.num, &rf.den);
        child.assignments.push((x.clone(), rf));
        solve_rec(child, ctx)?;
    }
    // case a = 0: the factor degenerates to b = 0
    {
        let mut child = state.clone();
        child.depth = state.depth + 1;
        child.active.push(a);
        child.active.push(b);
        solve_rec(child, ctx)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Subsumption
// ---------------------------------------------------------------------------

/// True when every point of `x` lies in `y` (up to the measure-zero loci
/// excluded by y's constraints, which always live in sibling branches).
fn subsumed_by(x: &SolutionBranch, y: &SolutionBranch) -> bool {
    if x.is_stuck() || y.is_stuck() {
        return false;
    }
    for sym in y.assignments.keys() {
        let Some(rel) = y.assignment_poly(sym) else { continue };
        if !x.satisfies(&rel) {
            return false;
        }
    }
    // x must not sit inside y's excluded locus
    for c in &y.nonzero_constraints {
        if poly_subst_ratfns(c, &x.assignments).is_zero() {
            return false;
        }
    }
    true
}

fn priority_key(b: &SolutionBranch, unknowns: &[Symbol]) -> (Vec<usize>, usize, String) {
    let idx: Vec<usize> = unknowns
        .iter()
        .enumerate()
        .filter(|(_, s)| b.assignments.contains_key(s))
        .map(|(i, _)| i)
        .collect();
    (idx, b.nonzero_constraints.len(), format!("{b}"))
}

fn deduplicate(ctx: &mut Ctx<'_>) {
    let raw = std::mem::take(&mut ctx.emitted_raw);
    let n = raw.len();
    let mut keep = vec![true; n];
    for i in 0..n {
        if !keep[i] {
            continue;
        }
        for j in 0..n {
            if i == j || !keep[j] || !keep[i] {
                continue;
            }
            let i_in_j = subsumed_by(&raw[i], &raw[j]);
            let j_in_i = subsumed_by(&raw[j], &raw[i]);
            if i_in_j && j_in_i {
                // identical varieties: keep the chart assigning the
                // higher-priority unknowns
                let ki = priority_key(&raw[i], ctx.unknowns);
                let kj = priority_key(&raw[j], ctx.unknowns);
                if ki <= kj {
                    keep[j] = false;
                    ctx.out.subsumed.push(format!("{} == {}", raw[j], raw[i]));
                } else {
                    keep[i] = false;
                    ctx.out.subsumed.push(format!("{} == {}", raw[i], raw[j]));
                }
            } else if i_in_j {
                keep[i] = false;
                ctx.out.subsumed.push(format!("{} in {}", raw[i], raw[j]));
            } else if j_in_i {
                keep[j] = false;
                ctx.out.subsumed.push(format!("{} in {}", raw[j], raw[i]));
            }
        }
    }
    ctx.out.branches = raw
        .into_iter()
        .zip(keep)
        .filter_map(|(b, k)| k.then_some(b))
        .collect();
}

/// Solves `P_k = 0` by factor-and-branch case analysis.
pub fn solve_by_cases(sys: &AlgebraicSystem, depth_limit: usize) -> Result<SolveOutcome> {
    let mut ctx = Ctx {
        unknowns: &sys.unknowns,
        unknown_set: sys.unknowns.iter().cloned().collect(),
        depth_limit,
        out: SolveOutcome::default(),
        emitted_raw: Vec::new(),
    };
    let state = State {
        active: sys.equations.clone(),
        stuck: Vec::new(),
        assignments: Vec::new(),
        constraints: Vec::new(),
        depth: 0,
    };
    solve_rec(state, &mut ctx)?;
    deduplicate(&mut ctx);
    // canonical output order
    ctx.out.branches.sort_by_key(|b| format!("{b}"));
    Ok(ctx.out)
}

/// Instantiates the ansatz profile for a branch, leaving its free symbols
/// symbolic.
pub fn apply_branch(branch: &SolutionBranch, spec: &crate::ansatz::AnsatzSpec) -> Expr {
    let profile = crate::ansatz::build_ansatz(spec);
    let mut bindings = BTreeMap::new();
    for (s, rf) in &branch.assignments {
        bindings.insert(s.clone(), rf.to_expr());
    }
    substitute(&profile, &bindings).expect("resolved assignments cannot cycle")
}

// ---------------------------------------------------------------------------
// C = 0 comparison
// ---------------------------------------------------------------------------

/// Why a branch of the full system degenerates at `C = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum LossStatus {
    /// Setting C = 0 changes nothing structural.
    Unchanged,
    /// The system itself forces C = 0; nothing exists for C != 0.
    ForcedZero,
    /// C = 0 cuts the family by one dimension: the binding below must
    /// vanish among the branch's free symbols.
    LostFreeSymbol { binding: MultiPoly },
    /// The C = 0 slice has no members at all.
    LostEntirely,
    /// The profile collapses (e.g. a kink family becomes constant).
    Collapses { from: BranchClass, to: BranchClass },
}

/// One full-system branch paired with its C = 0 counterparts.
#[derive(Debug, Clone)]
pub struct LossEntry {
    pub branch_index: usize,
    pub status: LossStatus,
    pub counterparts: Vec<usize>,
}

/// Pairing of the full solve against the C = 0 solve.
#[derive(Debug, Clone)]
pub struct LossReport {
    pub entries: Vec<LossEntry>,
    /// C = 0 branches not reached by specializing any full branch.
    pub gained: Vec<usize>,
}

impl LossReport {
    pub fn is_empty(&self) -> bool {
        self.entries
            .iter()
            .all(|e| matches!(e.status, LossStatus::Unchanged))
            && self.gained.is_empty()
    }

    pub fn lost_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| {
                matches!(
                    e.status,
                    LossStatus::LostFreeSymbol { .. }
                        | LossStatus::LostEntirely
                        | LossStatus::Collapses { .. }
                )
            })
            .count()
    }
}

fn specialize_at_zero(b: &SolutionBranch, c: &Symbol) -> SolutionBranch {
    let mut zero = BTreeMap::new();
    zero.insert(c.clone(), RationalFn::from_rational(Rational::from_integer(0.into())));
    let assignments: BTreeMap<Symbol, RationalFn> = b
        .assignments
        .iter()
        .map(|(s, rf)| {
            let num = poly_subst_ratfns(&rf.num, &zero);
            let den = poly_subst_ratfns(&rf.den, &zero);
            (s.clone(), num.div(&den))
        })
        .collect();
    SolutionBranch {
        assignments,
        free_symbols: b.free_symbols.iter().filter(|s| *s != c).cloned().collect(),
        nonzero_constraints: b.nonzero_constraints.clone(),
        residual_equations: b.residual_equations.clone(),
        classification: b.classification,
    }
}

/// Pairs the branches of the full solve against the `C = 0` solve and flags
/// every family that degenerates when the integration constant is dropped.
pub fn compare_constant_zero(
    full: &SolveOutcome,
    c0: &SolveOutcome,
    constant: &Symbol,
    unknowns: &[Symbol],
) -> LossReport {
    let mut entries = Vec::new();
    let mut paired: BTreeSet<usize> = BTreeSet::new();
    for (i, b) in full.branches.iter().enumerate() {
        if b.is_stuck() {
            continue;
        }
        let status = match b.assignments.get(constant) {
            Some(rf) if rf.num.is_zero() => LossStatus::ForcedZero,
            Some(rf) => {
                let unknown_set: BTreeSet<Symbol> = unknowns.iter().cloned().collect();
                if rf.num.as_constant().is_some() || is_param_only(&rf.num, &unknown_set) {
                    // C equals a generically nonzero expression: the family
                    // simply has no C = 0 member
                    LossStatus::LostEntirely
                } else {
                    LossStatus::LostFreeSymbol { binding: primitive_form(&rf.num) }
                }
            }
            None => {
                if b.free_symbols.contains(constant) {
                    let spec = specialize_at_zero(b, constant);
                    let new_class =
                        classify(&spec.assignments, &spec.residual_equations, unknowns);
                    if new_class != b.classification {
                        LossStatus::Collapses { from: b.classification, to: new_class }
                    } else {
                        LossStatus::Unchanged
                    }
                } else {
                    LossStatus::Unchanged
                }
            }
        };
        // counterparts: c0 branches lying in this branch's C = 0 slice
        let slice = match &status {
            LossStatus::LostEntirely => None,
            _ => Some(specialize_at_zero(b, constant)),
        };
        let mut counterparts = Vec::new();
        if let Some(slice) = slice {
            for (j, z) in c0.branches.iter().enumerate() {
                if z.is_stuck() {
                    continue;
                }
                let mut contained = true;
                for sym in slice.assignments.keys() {
                    if sym == constant {
                        continue;
                    }
                    let Some(rel) = slice.assignment_poly(sym) else { continue };
                    if !z.satisfies(&rel) {
                        contained = false;
                        break;
                    }
                }
                if contained {
                    counterparts.push(j);
                    paired.insert(j);
                }
            }
        }
        entries.push(LossEntry { branch_index: i, status, counterparts });
    }
    let gained = c0
        .branches
        .iter()
        .enumerate()
        .filter(|(j, z)| !paired.contains(j) && !z.is_stuck())
        .map(|(j, _)| j)
        .collect();
    LossReport { entries, gained }
}
