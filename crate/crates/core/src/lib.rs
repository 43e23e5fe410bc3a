//! Exact Poisson and Dirac brackets for finite-dimensional constrained
//! Hamiltonian systems, together with the analyses that decide whether a
//! second-class system can be quantized on a finite-dimensional Hilbert space.

pub mod bracket;
pub mod closure;
pub mod constraints;
pub mod error;
pub mod expr;

pub use bracket::{
    bracket_table, delta_matrix, dirac_bracket, invert_matrix, make_context, poisson_bracket,
    Bracket, BracketMode, DiracContext, ExprMatrix,
};
pub use closure::{
    closure_analysis, decompose_linear, finite_dim_obstruction, lemma_verdict, AlgebraReport,
    Decomposition, Partner, PrimarySet, Verdict, VerdictKind, Witness,
};
pub use constraints::{
    classify_constraints, dof_count, reduction_check, sample_on_shell, trace_identity,
    Classification, ConstraintKind, SamplerConfig, TraceIdentity,
};
pub use error::{Error, Result};
pub use expr::{
    parse_expression, print_expression, Monomial, PhaseSpace, Polynomial, Rational, RationalExpr,
    Var,
};
