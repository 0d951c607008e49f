//! Type checking for a calculus of constructions extended with rewrite rules
//! and size-annotated inductive type constructors.
//!
//! The pipeline: terms are typed against a signature of symbol declarations
//! and rewrite rules; wherever typing compares two types it emits size
//! constraints instead of requiring syntactic agreement; the constraint
//! solver either refutes the set or produces its most general solution,
//! which instantiates the inferred type.

pub mod constraint;
pub mod pretty;
pub mod rewrite;
pub mod size;
pub mod solver;
pub mod typing;
pub mod subtype;
pub mod term;

pub use constraint::{gen_sub, ConstraintProblem};
pub use pretty::{pretty_size, pretty_term};
pub use subtype::{subtype, subtype_nf};
pub use rewrite::{convertible, normalize_term, RewriteError, RewriteRule};
pub use size::{normalize, size_leq, SizeExpr, SizeSubst, SizeVar};
pub use solver::{brute_force_solve, solve, solve_with_report, Solution, SolveReport};
pub use typing::{
    annotate_symbol, check_rule_annotations, validate_rules, validate_signature, AnnotateOutcome,
    Checker, InferSession, TypeError, TypeErrorKind,
};
pub use term::{alpha_eq, subst_term, Env, Signature, Sort, Term, TermSubst};
