//! Simplification of homogeneous inequality sets `{f_i >= 0}`: detection of
//! implied equalities, removal of redundant members, and the reduced minimal
//! characterization (implied equalities in Jordan form plus a redundancy-free
//! pure remainder).

use num_traits::{Signed, Zero};

use crate::algebra::{self, gauss_jordan, JordanForm, LinPoly, Rational, VarId};
use crate::lp::{self, AffineConstraint, ConeOutcome, Feasibility};

/// Members of `S` that vanish on the whole solution set of `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImpliedEqualities {
    /// Indices into the input, increasing.
    pub members: Vec<usize>,
    /// Nonnegative multipliers with `sum(witness_i * f_i) == 0` identically,
    /// positive exactly on `members`.
    pub witness: Vec<Rational>,
}

/// Coefficient system `{sum_i v_i f_i == 0}` in the multipliers `v_i`
/// (multiplier `i` is `VarId(i)`), one equation per variable of the `f_i`.
fn multiplier_system(polys: &[LinPoly]) -> Vec<LinPoly> {
    let mut by_var: std::collections::BTreeMap<VarId, LinPoly> = Default::default();
    for (i, f) in polys.iter().enumerate() {
        for (x, c) in f.terms() {
            by_var.entry(x).or_default().add_term(VarId(i), c.clone());
        }
    }
    by_var.into_values().collect()
}

/// Finds every implied equality of `{f_i >= 0}`.
///
/// Solves `sum v_i f_i == 0` for the multipliers, writing each `v_i` as a
/// linear function `V_i` of the free multipliers, then `f_k` is implied iff
/// `V_k` is positive somewhere on the cone `{V_i >= 0}`.
pub fn implied_equalities(polys: &[LinPoly]) -> ImpliedEqualities {
    let m = polys.len();
    let jordan = gauss_jordan(&multiplier_system(polys));
    let v: Vec<LinPoly> = (0..m)
        .map(|i| {
            jordan
                .tail_of(VarId(i))
                .cloned()
                .unwrap_or_else(|| LinPoly::var(VarId(i)))
        })
        .collect();
    let cone: Vec<AffineConstraint> = v.iter().cloned().map(AffineConstraint::new).collect();

    let mut implied = vec![false; m];
    let mut witness = vec![Rational::zero(); m];
    for k in 0..m {
        if implied[k] || v[k].is_zero() {
            continue;
        }
        let outcome = lp::cone_positive(&v[k], &cone).expect("multiplier cone is homogeneous");
        if let ConeOutcome::Positive(ray) = outcome {
            // Every multiplier positive on this ray marks an implied member.
            for i in 0..m {
                let val = ray.eval(&v[i]);
                if val.is_positive() {
                    implied[i] = true;
                    witness[i] += val;
                }
            }
            debug_assert!(implied[k]);
        }
    }
    ImpliedEqualities {
        members: (0..m).filter(|&i| implied[i]).collect(),
        witness,
    }
}

/// An inequality set with provenance back to the input it was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Characterization {
    pub members: Vec<LinPoly>,
    /// Index of the input each member came from.
    pub sources: Vec<usize>,
}

impl Characterization {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Normalizes members (leading coefficient ±1), drops zeros and keeps the
/// first of each group of positive multiples.
fn collapse(polys: &[LinPoly]) -> (Vec<LinPoly>, Vec<usize>) {
    let mut seen = std::collections::HashSet::new();
    let mut members = Vec::new();
    let mut sources = Vec::new();
    for (i, p) in polys.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let q = p.normalized();
        if seen.insert(q.clone()) {
            members.push(q);
            sources.push(i);
        }
    }
    (members, sources)
}

/// Tries to write `target` as `sum q_i gens_i` with `q_i >= 0`: solve the
/// coefficient equations, then ask for a nonnegative point of the affine
/// solution set.
fn is_conic_combination(target: &LinPoly, gens: &[(usize, &LinPoly)]) -> bool {
    // target - sum q_i g_i == 0, one equation per variable.
    let mut by_var: std::collections::BTreeMap<VarId, LinPoly> = Default::default();
    for (x, c) in target.terms() {
        by_var.entry(x).or_default().add_constant(c);
    }
    for &(i, g) in gens {
        for (x, c) in g.terms() {
            by_var.entry(x).or_default().add_term(VarId(i), -c.clone());
        }
    }
    let eqs: Vec<LinPoly> = by_var.into_values().collect();
    let Ok(jordan) = algebra::solve_affine(&eqs) else {
        return false;
    };
    let cs: Vec<AffineConstraint> = gens
        .iter()
        .map(|&(i, _)| {
            let q = VarId(i);
            AffineConstraint::new(
                jordan
                    .tail_of(q)
                    .cloned()
                    .unwrap_or_else(|| LinPoly::var(q)),
            )
        })
        .collect();
    matches!(lp::feasible(&cs), Feasibility::Feasible(_))
}

/// Removes redundant members: each `h_k`, in input order, is deleted when it
/// is a conic combination of the members still present.
///
/// Members are normalized and positive multiples collapsed first. For a pure
/// input the result is unique up to order.
pub fn minimal_characterization(polys: &[LinPoly]) -> Characterization {
    let (members, sources) = collapse(polys);
    let mut alive = vec![true; members.len()];
    for k in 0..members.len() {
        let others: Vec<(usize, &LinPoly)> = members
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k && alive[i])
            .collect();
        if is_conic_combination(&members[k], &others) {
            alive[k] = false;
        }
    }
    let keep = |i: &usize| alive[*i];
    Characterization {
        members: (0..members.len())
            .filter(keep)
            .map(|i| members[i].clone())
            .collect(),
        sources: (0..members.len())
            .filter(keep)
            .map(|i| sources[i])
            .collect(),
    }
}

/// Implied equalities in Jordan form together with the minimal
/// characterization of the reduced remainder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedCharacterization {
    pub jordan: JordanForm,
    /// Pure, redundancy-free remainder; sources index the input.
    pub minimal: Characterization,
    pub implied: ImpliedEqualities,
}

pub fn reduced_minimal_characterization(polys: &[LinPoly]) -> ReducedCharacterization {
    let implied = implied_equalities(polys);
    let eqs: Vec<LinPoly> = implied.members.iter().map(|&i| polys[i].clone()).collect();
    let jordan = gauss_jordan(&eqs);
    let mut rest = Vec::new();
    let mut rest_src = Vec::new();
    let mut is_implied = vec![false; polys.len()];
    for &i in &implied.members {
        is_implied[i] = true;
    }
    for (i, p) in polys.iter().enumerate() {
        if is_implied[i] {
            continue;
        }
        let r = jordan.reduce(p);
        if !r.is_zero() {
            rest.push(r);
            rest_src.push(i);
        }
    }
    let mut minimal = minimal_characterization(&rest);
    for s in minimal.sources.iter_mut() {
        *s = rest_src[*s];
    }
    ReducedCharacterization {
        jordan,
        minimal,
        implied,
    }
}
