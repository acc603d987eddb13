//! End-to-end proving of information inequalities and identities.
//!
//! Pipeline for `F >= 0` under `eqs = 0`, `ineqs >= 0` over s-variables:
//!
//! 1. pool the user inequalities with the elemental inequalities;
//! 2. reduce the pool by the Jordan form `B` of the equalities;
//! 3. split the remainder into its implied equalities `E~` and the minimal
//!    pure remainder `S_r'` (the inequalities `C_1..C_t`);
//! 4. merge `B` and `E~` into one Jordan form and reduce `F` to `F_1`;
//! 5. solve `F_1 == sum p_i C_i` for the `p_i`, and look for a choice with
//!    every `p_i >= 0` (an LP over the free `p`s only).
//!
//! Identities stop after step 4: `F = 0` holds iff `F_1` is identically 0.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::algebra::{
    self, dimension_reduce, gauss_jordan, DimensionReduction, JordanForm, LinPoly, Rational, VarId,
};
use crate::atoms::{self, AtomError, SVarSequence};
use crate::lp::{self, AffineConstraint, FarkasCertificate, Feasibility};
use crate::simplify::{self, ReducedCharacterization};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GoalKind {
    Inequality,
    Identity,
}

/// An inequality of the final reduced set, with the pooled inequality it was
/// derived from (user inequalities first, then elemental ones).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedInequality {
    pub source: usize,
    pub poly: LinPoly,
}

/// Machine-checkable proof.
///
/// Soundness rests on three facts a checker can confirm with exact
/// arithmetic alone: `equality_witness` is a nonnegative combination of
/// pooled inequalities lying in the span of the equality constraints (so each
/// inequality it uses is tight), every row of `jordan` lies in the span of the
/// equalities plus those tight inequalities, and reducing the goal by
/// `jordan` gives `sum conic_i * inequalities_i` with `conic_i >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofCertificate {
    pub kind: GoalKind,
    pub n: usize,
    pub variables: Vec<String>,
    /// `(pooled index, multiplier > 0)`
    pub equality_witness: Vec<(usize, Rational)>,
    pub jordan: JordanForm,
    pub inequalities: Vec<CertifiedInequality>,
    pub conic: Vec<Rational>,
    pub reduced_goal: LinPoly,
}

impl ProofCertificate {
    /// Labels `C<i>` (1-based) with a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        self.conic
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotProvable {
    /// `F_1` is not in the span of the reduced inequalities.
    OutsideSpan,
    /// Some `p_i` is forced to a negative constant.
    NegativeCoefficient { index: usize, value: Rational },
    /// The `p` system has no nonnegative solution.
    NoConicCombination(FarkasCertificate),
    /// `F_1` is not identically zero; `assignment` of the free variables
    /// makes it evaluate to `value != 0`.
    NonzeroRemainder {
        assignment: Vec<(VarId, Rational)>,
        value: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Proved(ProofCertificate),
    NotProvable(NotProvable),
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved(_))
    }

    pub fn certificate(&self) -> Option<&ProofCertificate> {
        match self {
            Verdict::Proved(c) => Some(c),
            Verdict::NotProvable(_) => None,
        }
    }
}

/// Size of one of the three LPs: variables, equality and inequality
/// constraints.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProblemSize {
    pub variables: usize,
    pub equalities: usize,
    pub inequalities: usize,
}

impl ProblemSize {
    pub fn constraints(&self) -> usize {
        self.equalities + self.inequalities
    }
}

/// Sizes of the original problem, the reduced problem over the free
/// s-variables, and the final LP over the free conic coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProblemStats {
    pub p1: ProblemSize,
    pub p2: ProblemSize,
    /// `None` when the run stopped before the coefficient system was solved.
    pub p3: Option<ProblemSize>,
}

impl ProblemStats {
    /// `N_v(P1) >= N_v(P2) >= N_v(P3)` and the same for constraint counts.
    pub fn is_monotone(&self) -> bool {
        let vars_ok = self.p1.variables >= self.p2.variables
            && self.p3.is_none_or(|p3| self.p2.variables >= p3.variables);
        let cons_ok = self.p1.constraints() >= self.p2.constraints()
            && self
                .p3
                .is_none_or(|p3| self.p2.constraints() >= p3.constraints());
        vars_ok && cons_ok
    }
}

/// Everything computed by one run, for inspection and rendering.
#[derive(Clone, Debug)]
pub struct ProofRun {
    pub kind: GoalKind,
    pub seq: SVarSequence,
    pub objective: LinPoly,
    pub equalities: Vec<LinPoly>,
    pub user_inequalities: usize,
    /// User inequalities followed by the elemental inequalities.
    pub pooled: Vec<LinPoly>,
    /// `B` and the remainder set; sources index `pooled`.
    pub reduction: DimensionReduction,
    /// Reduced minimal characterization of the remainder; sources index
    /// `reduction.remainder`.
    pub characterization: ReducedCharacterization,
    /// `S_r'` in canonical order; sources index `pooled`.
    pub minimal: Vec<CertifiedInequality>,
    /// Merged Jordan form of `B` and the implied equalities.
    pub jordan: JordanForm,
    /// `F_1`
    pub reduced_goal: LinPoly,
    /// `p_i = P_i` over the free `p` variables, when solvable.
    pub coefficients: Option<Vec<LinPoly>>,
    /// Non-constant `P_i`, deduplicated.
    pub residual_lp: Vec<LinPoly>,
    pub verdict: Verdict,
}

impl ProofRun {
    pub fn stats(&self) -> ProblemStats {
        stats(self)
    }

    pub fn elemental_count(&self) -> usize {
        self.pooled.len() - self.user_inequalities
    }
}

fn canonical_key(p: &LinPoly, seq: &SVarSequence) -> (usize, Vec<Vec<usize>>) {
    let mut subs: Vec<Vec<usize>> = p.vars().map(|v| seq.get(v).subscripts()).collect();
    subs.sort();
    (p.num_terms(), subs)
}

/// The constraint side of a problem after reduction: the equalities merged
/// with every implied equality, and the minimal pure remainder.
#[derive(Clone, Debug)]
pub struct ConstraintReduction {
    pub seq: SVarSequence,
    pub user_inequalities: usize,
    /// User inequalities followed by the elemental inequalities.
    pub pooled: Vec<LinPoly>,
    /// `B` and the remainder set; sources index `pooled`.
    pub reduction: DimensionReduction,
    /// Reduced minimal characterization of the remainder; sources index
    /// `reduction.remainder`.
    pub characterization: ReducedCharacterization,
    /// `S_r'` in canonical order; sources index `pooled`.
    pub minimal: Vec<CertifiedInequality>,
    /// Merged Jordan form of `B` and the implied equalities.
    pub jordan: JordanForm,
}

impl ConstraintReduction {
    /// Pooled indices of the implied equalities found in the remainder.
    pub fn implied_sources(&self) -> Vec<usize> {
        self.characterization
            .implied
            .members
            .iter()
            .map(|&i| self.reduction.sources[i])
            .collect()
    }
}

/// Reduces `eqs = 0`, `ineqs >= 0` plus the elemental inequalities for `n`
/// random variables.
pub fn reduce_constraints(
    eqs: &[LinPoly],
    ineqs: &[LinPoly],
    n: usize,
) -> Result<ConstraintReduction, AtomError> {
    let seq = atoms::svar_sequence(n)?;
    let mut pooled: Vec<LinPoly> = ineqs.to_vec();
    pooled.extend(atoms::elemental_inequalities(&seq)?);

    let reduction = dimension_reduce(&pooled, eqs);
    let characterization = simplify::reduced_minimal_characterization(&reduction.remainder);

    let mut minimal: Vec<CertifiedInequality> = characterization
        .minimal
        .members
        .iter()
        .zip(&characterization.minimal.sources)
        .map(|(p, &src)| CertifiedInequality {
            source: reduction.sources[src],
            poly: p.clone(),
        })
        .collect();
    minimal.sort_by_cached_key(|c| canonical_key(&c.poly, &seq));

    let mut merged = reduction.jordan.polys();
    merged.extend(characterization.jordan.polys());
    let jordan = gauss_jordan(&merged);
    Ok(ConstraintReduction {
        seq,
        user_inequalities: ineqs.len(),
        pooled,
        reduction,
        characterization,
        minimal,
        jordan,
    })
}

fn equality_witness(
    reduction: &DimensionReduction,
    rc: &ReducedCharacterization,
) -> Vec<(usize, Rational)> {
    let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
    for (i, w) in rc.implied.witness.iter().enumerate() {
        if w.is_positive() {
            *out.entry(reduction.sources[i])
                .or_insert_with(Rational::zero) += w;
        }
    }
    out.into_iter().collect()
}

/// Proves `objective >= 0` given `eqs = 0` and `ineqs >= 0`, all over
/// s-variable coordinates for `n` random variables.
pub fn prove_inequality(
    objective: &LinPoly,
    eqs: &[LinPoly],
    ineqs: &[LinPoly],
    n: usize,
) -> Result<ProofRun, AtomError> {
    let ConstraintReduction {
        seq,
        user_inequalities,
        pooled,
        reduction,
        characterization,
        minimal,
        jordan,
    } = reduce_constraints(eqs, ineqs, n)?;
    let reduced_goal = jordan.reduce(objective);

    // F_1 - sum p_i C_i == 0, one equation per s-variable.
    let mut by_var: BTreeMap<VarId, LinPoly> = BTreeMap::new();
    for (x, c) in reduced_goal.terms() {
        by_var.entry(x).or_default().add_constant(c);
    }
    for (i, ci) in minimal.iter().enumerate() {
        for (x, c) in ci.poly.terms() {
            by_var.entry(x).or_default().add_term(VarId(i), -c.clone());
        }
    }
    let system: Vec<LinPoly> = by_var.into_values().collect();

    let mut run = ProofRun {
        kind: GoalKind::Inequality,
        seq,
        objective: objective.clone(),
        equalities: eqs.to_vec(),
        user_inequalities,
        pooled,
        reduction,
        characterization,
        minimal,
        jordan,
        reduced_goal,
        coefficients: None,
        residual_lp: Vec::new(),
        verdict: Verdict::NotProvable(NotProvable::OutsideSpan),
    };

    let Ok(p_form) = algebra::solve_affine(&system) else {
        return Ok(run);
    };
    let coefficients: Vec<LinPoly> = (0..run.minimal.len())
        .map(|i| {
            p_form
                .tail_of(VarId(i))
                .cloned()
                .unwrap_or_else(|| LinPoly::var(VarId(i)))
        })
        .collect();
    run.coefficients = Some(coefficients.clone());

    if let Some((index, value)) = coefficients
        .iter()
        .enumerate()
        .find(|(_, p)| p.is_constant() && p.constant_term().is_negative())
        .map(|(i, p)| (i, p.constant_term().clone()))
    {
        run.verdict = Verdict::NotProvable(NotProvable::NegativeCoefficient { index, value });
        return Ok(run);
    }

    let mut residual: Vec<LinPoly> = Vec::new();
    for p in &coefficients {
        if !p.is_constant() && !residual.contains(p) {
            residual.push(p.clone());
        }
    }
    run.residual_lp = residual.clone();

    let point = if residual.is_empty() {
        lp::Witness::default()
    } else {
        let cs: Vec<AffineConstraint> = residual.into_iter().map(AffineConstraint::new).collect();
        match lp::feasible(&cs) {
            Feasibility::Feasible(w) => w,
            Feasibility::Infeasible(farkas) => {
                run.verdict = Verdict::NotProvable(NotProvable::NoConicCombination(farkas));
                return Ok(run);
            }
        }
    };
    let conic: Vec<Rational> = coefficients.iter().map(|p| point.eval(p)).collect();
    debug_assert!(conic.iter().all(|c| !c.is_negative()));

    run.verdict = Verdict::Proved(ProofCertificate {
        kind: GoalKind::Inequality,
        n,
        variables: atoms::default_names(n),
        equality_witness: equality_witness(&run.reduction, &run.characterization),
        jordan: run.jordan.clone(),
        inequalities: run.minimal.clone(),
        conic,
        reduced_goal: run.reduced_goal.clone(),
    });
    Ok(run)
}

/// Proves `objective = 0` given `eqs = 0` and `ineqs >= 0`.
pub fn prove_identity(
    objective: &LinPoly,
    eqs: &[LinPoly],
    ineqs: &[LinPoly],
    n: usize,
) -> Result<ProofRun, AtomError> {
    let ConstraintReduction {
        seq,
        user_inequalities,
        pooled,
        reduction,
        characterization,
        minimal,
        jordan,
    } = reduce_constraints(eqs, ineqs, n)?;
    let reduced_goal = jordan.reduce(objective);
    let verdict = match reduced_goal.leading() {
        None => Verdict::Proved(ProofCertificate {
            kind: GoalKind::Identity,
            n,
            variables: atoms::default_names(n),
            equality_witness: equality_witness(&reduction, &characterization),
            jordan: jordan.clone(),
            inequalities: Vec::new(),
            conic: Vec::new(),
            reduced_goal: reduced_goal.clone(),
        }),
        Some((v, c)) => Verdict::NotProvable(NotProvable::NonzeroRemainder {
            assignment: vec![(v, Rational::one())],
            value: c.clone(),
        }),
    };
    Ok(ProofRun {
        kind: GoalKind::Identity,
        seq,
        objective: objective.clone(),
        equalities: eqs.to_vec(),
        user_inequalities,
        pooled,
        reduction,
        characterization,
        minimal,
        jordan,
        reduced_goal,
        coefficients: None,
        residual_lp: Vec::new(),
        verdict,
    })
}

/// Problem sizes of a completed run.
pub fn stats(run: &ProofRun) -> ProblemStats {
    let universe = run.seq.len();
    let p1 = ProblemSize {
        variables: universe,
        equalities: run.equalities.len(),
        inequalities: run.pooled.len(),
    };
    let p2 = ProblemSize {
        variables: universe - run.jordan.rank(),
        equalities: 0,
        inequalities: run.minimal.len(),
    };
    let p3 = run.coefficients.as_ref().map(|coeffs| ProblemSize {
        variables: coeffs
            .iter()
            .enumerate()
            .filter(|(i, p)| **p == LinPoly::var(VarId(*i)))
            .count(),
        equalities: 0,
        inequalities: run.residual_lp.len(),
    });
    ProblemStats { p1, p2, p3 }
}

/// Why a certificate was rejected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("certificate is for {found} random variables, problem has {expected}")]
    UniverseMismatch { expected: usize, found: usize },
    #[error("certificate is malformed: {0}")]
    Malformed(String),
    #[error("conic coefficient of C{} is negative", .0 + 1)]
    NegativeCoefficient(usize),
    #[error("recorded reduced goal differs from the goal reduced by the recorded Jordan form")]
    GoalMismatch,
    #[error("verification identity fails: reduced goal is not the stated combination")]
    IdentityFails,
    #[error("C{} is not the reduction of its source inequality", .0 + 1)]
    NotDerivable(usize),
    #[error("equality witness is invalid: {0}")]
    BadWitness(String),
    #[error("Jordan row for pivot {0} is not implied by the equalities and tight inequalities")]
    UnjustifiedEquality(VarId),
}

impl CertificateError {
    /// Stable short code for diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            CertificateError::UniverseMismatch { .. } => "universe-mismatch",
            CertificateError::Malformed(_) => "malformed",
            CertificateError::NegativeCoefficient(_) => "negative-coefficient",
            CertificateError::GoalMismatch => "goal-mismatch",
            CertificateError::IdentityFails => "identity-fails",
            CertificateError::NotDerivable(_) => "not-derivable",
            CertificateError::BadWitness(_) => "bad-witness",
            CertificateError::UnjustifiedEquality(_) => "unjustified-equality",
        }
    }
}

fn positive_multiple(a: &LinPoly, b: &LinPoly) -> bool {
    !a.is_zero() && a.normalized() == b.normalized()
}

/// Checks a certificate against the problem using exact linear algebra only
/// (no LP).
pub fn verify_certificate(
    objective: &LinPoly,
    eqs: &[LinPoly],
    ineqs: &[LinPoly],
    cert: &ProofCertificate,
    n: usize,
) -> Result<(), CertificateError> {
    if cert.n != n {
        return Err(CertificateError::UniverseMismatch {
            expected: n,
            found: cert.n,
        });
    }
    let seq = atoms::svar_sequence(n).map_err(|e| CertificateError::Malformed(e.to_string()))?;
    let universe = seq.len();
    let in_universe = |p: &LinPoly| p.vars().all(|v| v.0 < universe) && p.is_homogeneous();
    let all_polys = cert
        .inequalities
        .iter()
        .map(|c| &c.poly)
        .chain(std::iter::once(&cert.reduced_goal));
    for p in all_polys {
        if !in_universe(p) {
            return Err(CertificateError::Malformed(
                "polynomial outside the s-variable universe".into(),
            ));
        }
    }
    for row in cert.jordan.rows() {
        if row.pivot.0 >= universe || !in_universe(&row.tail) {
            return Err(CertificateError::Malformed(
                "Jordan row outside the s-variable universe".into(),
            ));
        }
    }
    match cert.kind {
        GoalKind::Inequality if cert.conic.len() != cert.inequalities.len() => {
            return Err(CertificateError::Malformed(
                "one conic coefficient per inequality required".into(),
            ));
        }
        GoalKind::Identity if !cert.conic.is_empty() || !cert.inequalities.is_empty() => {
            return Err(CertificateError::Malformed(
                "identity certificates carry no inequalities".into(),
            ));
        }
        _ => {}
    }

    if let Some(i) = cert.conic.iter().position(Signed::is_negative) {
        return Err(CertificateError::NegativeCoefficient(i));
    }

    if cert.jordan.reduce(objective) != cert.reduced_goal {
        return Err(CertificateError::GoalMismatch);
    }

    let mut combo = LinPoly::zero();
    for (p, c) in cert.conic.iter().zip(&cert.inequalities) {
        combo.add_scaled(p, &c.poly);
    }
    if combo != cert.reduced_goal {
        return Err(CertificateError::IdentityFails);
    }

    let mut pooled: Vec<LinPoly> = ineqs.to_vec();
    pooled.extend(
        atoms::elemental_inequalities(&seq)
            .map_err(|e| CertificateError::Malformed(e.to_string()))?,
    );
    for (i, c) in cert.inequalities.iter().enumerate() {
        let Some(src) = pooled.get(c.source) else {
            return Err(CertificateError::NotDerivable(i));
        };
        if !positive_multiple(&cert.jordan.reduce(src), &c.poly) {
            return Err(CertificateError::NotDerivable(i));
        }
    }

    let base = gauss_jordan(eqs);
    let mut sum = LinPoly::zero();
    let mut tight = eqs.to_vec();
    for (src, w) in &cert.equality_witness {
        if !w.is_positive() {
            return Err(CertificateError::BadWitness(
                "multipliers must be positive".into(),
            ));
        }
        let Some(p) = pooled.get(*src) else {
            return Err(CertificateError::BadWitness(format!(
                "source {src} out of range"
            )));
        };
        sum.add_scaled(w, p);
        tight.push(p.clone());
    }
    if !base.reduce(&sum).is_zero() {
        return Err(CertificateError::BadWitness(
            "combination is not in the span of the equalities".into(),
        ));
    }
    let justified = gauss_jordan(&tight);
    for row in cert.jordan.rows() {
        if !justified.reduce(&row.as_poly()).is_zero() {
            return Err(CertificateError::UnjustifiedEquality(row.pivot));
        }
    }
    Ok(())
}
