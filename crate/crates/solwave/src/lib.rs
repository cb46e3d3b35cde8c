//! Solitary traveling-wave solutions of polynomial wave equations via the
//! hyperbolic (tanh/sech) ansatz.
//!
//! The pipeline: parse a PDE from a small text DSL, reduce it to an ODE in
//! `xi = x - v*t`, integrate once keeping the integration constant `C`
//! symbolic, substitute the tanh/sech ansatz, rewrite hyperbolics as
//! exponentials and collect a polynomial system, solve it by factor-and-branch
//! case analysis, and verify every branch numerically against both the ODE
//! and the original PDE. Setting `C = 0` up front loses solution families;
//! [`solve::compare_constant_zero`] makes that loss explicit.

pub mod ansatz;
pub mod builtin;
pub mod error;
pub mod expr;
pub mod parser;
pub mod poly;
pub mod reduce;
pub mod report;
pub mod solve;
pub mod symbol;
pub mod verify;

pub use ansatz::{balance_order, build_ansatz, collect_system, to_exponential, AnsatzSpec, ExpPolynomial};
pub use error::{Error, Result};
pub use expr::{differentiate, eval_numeric, normalize, substitute, Expr, FuncKind};
pub use parser::{parse_equation, parse_profile, PdeEquation};
pub use poly::{MultiPoly, RationalFn};
pub use reduce::{integrate_once, specialize_constant_zero, traveling_wave_reduce, TravelingOde};
pub use solve::{
    apply_branch, compare_constant_zero, solve_by_cases, AlgebraicSystem, BranchClass,
    LossReport, SolutionBranch, SolveOutcome,
};
pub use symbol::{Rational, Symbol, SymbolKind};
pub use verify::{scan_parameters, verify_ode, verify_pde, GridSpec, ResidualReport};
