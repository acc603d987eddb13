//! Exact symbolic prover for linear information inequalities and identities
//! over Shannon entropy measures.

pub mod algebra;
pub mod atoms;
pub mod certificate;
pub mod lp;
pub mod parser;
pub mod prover;
pub mod simplify;

pub use algebra::{gauss_jordan, rat, ratio, JordanForm, JordanRow, LinPoly, Rational, VarId};
pub use atoms::{svar_sequence, MeasureTerm, SVar, SVarSequence, VarSet, MAX_VARS};
pub use lp::{
    cone_positive, direct_lp_prove, feasible, AffineConstraint, ConeOutcome, Feasibility,
};
pub use parser::{parse_document, parse_expression, parse_query, Expr, ParseError, Query};
pub use prover::{
    prove_identity, prove_inequality, reduce_constraints, verify_certificate, CertificateError,
    ConstraintReduction, GoalKind, NotProvable, ProblemStats, ProofCertificate, ProofRun, Verdict,
};
pub use simplify::{
    implied_equalities, minimal_characterization, reduced_minimal_characterization,
};
