//! Exact rational simplex (dense tableau, Bland's rule) and the three LP
//! queries the prover needs: affine feasibility, cone positivity and the
//! direct LP over joint-entropy coordinates.
//!
//! Every problem is stated over free variables with constraints
//! `poly >= 0`. Free variables are split as `x = u - w` with `u, w >= 0`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::algebra::{LinPoly, Rational, VarId};
use crate::atoms::{self, AtomError};

/// `poly >= 0`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineConstraint {
    pub poly: LinPoly,
}

impl AffineConstraint {
    pub fn new(poly: LinPoly) -> Self {
        Self { poly }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.poly.is_homogeneous()
    }
}

impl From<LinPoly> for AffineConstraint {
    fn from(poly: LinPoly) -> Self {
        Self { poly }
    }
}

/// Sparse point: variables not listed are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witness {
    values: BTreeMap<VarId, Rational>,
}

impl Witness {
    pub fn value(&self, v: VarId) -> Rational {
        self.values.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn values(&self) -> &BTreeMap<VarId, Rational> {
        &self.values
    }

    pub fn eval(&self, p: &LinPoly) -> Rational {
        p.eval_with(|v| self.value(v))
    }

    pub fn satisfies(&self, cs: &[AffineConstraint]) -> bool {
        cs.iter().all(|c| !self.eval(&c.poly).is_negative())
    }
}

/// Nonnegative multipliers, one per constraint, whose combination of the
/// constraint polynomials is a negative constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rational>,
}

impl FarkasCertificate {
    /// Checks the certificate against `cs` with exact arithmetic.
    pub fn verify(&self, cs: &[AffineConstraint]) -> bool {
        if self.multipliers.len() != cs.len() || self.multipliers.iter().any(Signed::is_negative) {
            return false;
        }
        let mut combo = LinPoly::zero();
        for (y, c) in self.multipliers.iter().zip(cs) {
            combo.add_scaled(y, &c.poly);
        }
        combo.is_constant() && combo.constant_term().is_negative()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Witness),
    Infeasible(FarkasCertificate),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConeOutcome {
    /// A ray of the cone on which the objective is strictly positive.
    Positive(Witness),
    /// The objective is `<= 0` on the whole cone.
    ZeroOnly,
}

impl ConeOutcome {
    pub fn is_positive(&self) -> bool {
        matches!(self, ConeOutcome::Positive(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("cone query needs homogeneous constraints and objective")]
    NotHomogeneous,
}

/// Dense simplex tableau for `A z = b, z >= 0, b >= 0`.
struct Tableau {
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    basis: Vec<usize>,
    pivots: usize,
}

struct Unbounded;

impl Tableau {
    fn value_of_basis(&self, cost: &[Rational]) -> Rational {
        let mut v = Rational::zero();
        for (k, &j) in self.basis.iter().enumerate() {
            if !cost[j].is_zero() {
                v += &cost[j] * &self.b[k];
            }
        }
        v
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.a[row][col].recip();
        for x in self.a[row].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        self.b[row] *= &inv;
        let pivot_row = self.a[row].clone();
        let pivot_rhs = self.b[row].clone();
        for k in 0..self.a.len() {
            if k == row {
                continue;
            }
            let f = self.a[k][col].clone();
            if f.is_zero() {
                continue;
            }
            for (x, p) in self.a[k].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
            self.b[k] -= &f * &pivot_rhs;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Minimizes `cost . z` with Bland's rule, only letting `allowed`
    /// columns enter.
    fn minimize(&mut self, cost: &[Rational], allowed: &[bool]) -> Result<(), Unbounded> {
        let ncols = cost.len();
        loop {
            let in_basis: BTreeSet<usize> = self.basis.iter().copied().collect();
            let mut entering = None;
            for j in 0..ncols {
                if !allowed[j] || in_basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j].clone();
                for (k, &bj) in self.basis.iter().enumerate() {
                    if !cost[bj].is_zero() && !self.a[k][j].is_zero() {
                        rc -= &cost[bj] * &self.a[k][j];
                    }
                }
                if rc.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, Rational)> = None;
            for k in 0..self.a.len() {
                let coef = &self.a[k][col];
                if !coef.is_positive() {
                    continue;
                }
                let ratio = &self.b[k] / coef;
                let better = match &leave {
                    None => true,
                    Some((lk, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[k] < self.basis[*lk])
                    }
                };
                if better {
                    leave = Some((k, ratio));
                }
            }
            let Some((row, _)) = leave else {
                return Err(Unbounded);
            };
            self.pivot(row, col);
        }
    }

    fn column_values(&self, ncols: usize) -> Vec<Rational> {
        let mut z = vec![Rational::zero(); ncols];
        for (k, &j) in self.basis.iter().enumerate() {
            z[j] = self.b[k].clone();
        }
        z
    }
}

/// Standard-form encoding of `{poly_i >= 0}` over free variables.
struct StandardForm {
    vars: Vec<VarId>,
    tableau: Tableau,
    /// +1 if the row was kept as `a.x - s = -b`, -1 if negated.
    sign: Vec<i8>,
    /// Column that started as the unit vector of each row.
    unit_col: Vec<usize>,
    first_artificial: usize,
    ncols: usize,
}

impl StandardForm {
    fn new(cs: &[AffineConstraint], extra_vars: &[VarId]) -> Self {
        let vars: Vec<VarId> = cs
            .iter()
            .flat_map(|c| c.poly.vars())
            .chain(extra_vars.iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<VarId, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let d = vars.len();
        let m = cs.len();
        let n_art = cs
            .iter()
            .filter(|c| c.poly.constant_term().is_negative())
            .count();
        let first_artificial = 2 * d + m;
        let ncols = first_artificial + n_art;

        let mut a = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut sign = Vec::with_capacity(m);
        let mut unit_col = Vec::with_capacity(m);
        let mut next_art = first_artificial;
        for (i, c) in cs.iter().enumerate() {
            let mut row = vec![Rational::zero(); ncols];
            let k = c.poly.constant_term();
            // a.x - s = -k; negate when -k <= 0 so the slack can start basic.
            let s: i8 = if k.is_negative() { 1 } else { -1 };
            let sr = Rational::from_integer(s.into());
            for (v, coef) in c.poly.terms() {
                let j = index[&v];
                row[j] = &sr * coef;
                row[d + j] = -(&sr * coef);
            }
            row[2 * d + i] = -sr.clone();
            let rhs = -(&sr * k);
            if s == 1 {
                row[next_art] = Rational::one();
                basis.push(next_art);
                unit_col.push(next_art);
                next_art += 1;
            } else {
                basis.push(2 * d + i);
                unit_col.push(2 * d + i);
            }
            a.push(row);
            b.push(rhs);
            sign.push(s);
        }
        Self {
            vars,
            tableau: Tableau {
                a,
                b,
                basis,
                pivots: 0,
            },
            sign,
            unit_col,
            first_artificial,
            ncols,
        }
    }

    fn d(&self) -> usize {
        self.vars.len()
    }

    /// Phase 1. `Err` carries the Farkas multipliers.
    fn phase_one(&mut self) -> Result<(), Vec<Rational>> {
        if self.first_artificial == self.ncols {
            return Ok(());
        }
        let mut cost = vec![Rational::zero(); self.ncols];
        for c in cost.iter_mut().skip(self.first_artificial) {
            *c = Rational::one();
        }
        let allowed = vec![true; self.ncols];
        if self.tableau.minimize(&cost, &allowed).is_err() {
            unreachable!("phase one objective is bounded below by zero");
        }
        if self.tableau.value_of_basis(&cost).is_positive() {
            let t = &self.tableau;
            let multipliers = (0..t.a.len())
                .map(|i| {
                    let mut y = Rational::zero();
                    for (k, &bj) in t.basis.iter().enumerate() {
                        if !cost[bj].is_zero() {
                            y += &cost[bj] * &t.a[k][self.unit_col[i]];
                        }
                    }
                    if self.sign[i] < 0 {
                        -y
                    } else {
                        y
                    }
                })
                .collect();
            return Err(multipliers);
        }
        self.drive_out_artificials();
        Ok(())
    }

    fn drive_out_artificials(&mut self) {
        let mut k = 0;
        while k < self.tableau.a.len() {
            if self.tableau.basis[k] < self.first_artificial {
                k += 1;
                continue;
            }
            let col = (0..self.first_artificial).find(|&j| !self.tableau.a[k][j].is_zero());
            match col {
                Some(j) => {
                    self.tableau.pivot(k, j);
                    k += 1;
                }
                None => {
                    // Redundant row.
                    self.tableau.a.remove(k);
                    self.tableau.b.remove(k);
                    self.tableau.basis.remove(k);
                }
            }
        }
    }

    fn witness(&self) -> Witness {
        let z = self.tableau.column_values(self.ncols);
        let d = self.d();
        let values = self
            .vars
            .iter()
            .enumerate()
            .filter_map(|(i, v)| {
                let x = &z[i] - &z[d + i];
                (!x.is_zero()).then_some((*v, x))
            })
            .collect();
        Witness { values }
    }
}

/// Decides whether `{c >= 0 : c in cs}` has a solution.
pub fn feasible(cs: &[AffineConstraint]) -> Feasibility {
    feasible_counted(cs).0
}

/// Like [`feasible`], also returning the number of simplex pivots.
pub fn feasible_counted(cs: &[AffineConstraint]) -> (Feasibility, usize) {
    let mut sf = StandardForm::new(cs, &[]);
    let out = match sf.phase_one() {
        Ok(()) => {
            let w = sf.witness();
            debug_assert!(w.satisfies(cs));
            Feasibility::Feasible(w)
        }
        Err(multipliers) => {
            let cert = FarkasCertificate { multipliers };
            assert!(
                cert.verify(cs),
                "simplex produced an invalid Farkas certificate"
            );
            Feasibility::Infeasible(cert)
        }
    };
    (out, sf.tableau.pivots)
}

/// Decides whether `objective` takes a positive value somewhere on the cone
/// `{c >= 0 : c in cs}`. Solved as `max objective` under the extra bound
/// `objective <= 1`, so the optimum is exactly 0 or exactly 1.
pub fn cone_positive(objective: &LinPoly, cs: &[AffineConstraint]) -> Result<ConeOutcome, LpError> {
    cone_positive_counted(objective, cs).map(|(o, _)| o)
}

pub fn cone_positive_counted(
    objective: &LinPoly,
    cs: &[AffineConstraint],
) -> Result<(ConeOutcome, usize), LpError> {
    if !objective.is_homogeneous() || !cs.iter().all(AffineConstraint::is_homogeneous) {
        return Err(LpError::NotHomogeneous);
    }
    if objective.is_zero() {
        return Ok((ConeOutcome::ZeroOnly, 0));
    }
    let mut bounded: Vec<AffineConstraint> = cs.to_vec();
    let mut cap = -objective;
    cap.add_constant(&Rational::one());
    bounded.push(AffineConstraint::new(cap));

    let mut sf = StandardForm::new(&bounded, &[]);
    debug_assert_eq!(sf.first_artificial, sf.ncols);
    let d = sf.d();
    let mut cost = vec![Rational::zero(); sf.ncols];
    for (i, v) in sf.vars.iter().enumerate() {
        let c = objective.coeff(*v);
        cost[d + i] = c.clone();
        cost[i] = -c;
    }
    let allowed = vec![true; sf.ncols];
    if sf.tableau.minimize(&cost, &allowed).is_err() {
        unreachable!("objective is capped at 1");
    }
    let w = sf.witness();
    let value = w.eval(objective);
    let outcome = if value.is_positive() {
        debug_assert!(value.is_one());
        debug_assert!(w.satisfies(cs));
        ConeOutcome::Positive(w)
    } else {
        ConeOutcome::ZeroOnly
    };
    Ok((outcome, sf.tableau.pivots))
}

/// Direct LP over joint-entropy coordinates: `objective >= 0` is implied by
/// the elemental inequalities, `eqs = 0` and `ineqs >= 0` iff the objective
/// cannot be made negative on that cone.
///
/// All polynomials are over joint-entropy coordinates
/// (see [`atoms::entropy_coord`]).
pub fn direct_lp_prove(
    objective: &LinPoly,
    eqs: &[LinPoly],
    ineqs: &[LinPoly],
    n: usize,
) -> Result<bool, AtomError> {
    let mut cs: Vec<AffineConstraint> = atoms::elemental_measures(n)?
        .iter()
        .map(|m| AffineConstraint::new(atoms::measure_joint_entropy(m)))
        .collect();
    cs.extend(ineqs.iter().cloned().map(AffineConstraint::new));
    for e in eqs {
        cs.push(AffineConstraint::new(e.clone()));
        cs.push(AffineConstraint::new(-e));
    }
    let outcome = cone_positive(&-objective, &cs).expect("entropy constraints are homogeneous");
    Ok(!outcome.is_positive())
}
