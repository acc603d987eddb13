//! Exact rational linear algebra: sparse linear polynomials, Gauss-Jordan
//! elimination to the reduced (Jordan) form of an equality system, and
//! reduction of polynomials by such a form.
//!
//! Variables are identified by [`VarId`]; the numeric index *is* the active
//! variable order, so a smaller index is an earlier (preferred) pivot.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Exact arbitrary-precision rational. Always kept in lowest terms with a
/// positive denominator by `num-rational`.
pub type Rational = num_rational::BigRational;

/// Shorthand for an integer-valued [`Rational`].
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `num / den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Position of a variable in the active variable order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Sparse linear polynomial `sum(c_v * v) + constant`.
///
/// Zero coefficients are never stored, so structural equality is polynomial
/// equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinPoly {
    terms: BTreeMap<VarId, Rational>,
    constant: Rational,
}

impl LinPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn var(v: VarId) -> Self {
        Self::term(v, Rational::one())
    }

    pub fn term(v: VarId, coef: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(v, coef);
        p
    }

    pub fn constant(c: Rational) -> Self {
        Self {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    /// Builds a polynomial from `(variable, coefficient)` pairs, summing
    /// repeated variables.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (VarId, Rational)>,
    {
        let mut p = Self::zero();
        for (v, c) in terms {
            p.add_term(v, c);
        }
        p
    }

    /// Integer-coefficient convenience constructor, mostly for tests.
    pub fn from_ints(terms: &[(usize, i64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(v, c)| (VarId(v), rat(c))))
    }

    pub fn add_term(&mut self, v: VarId, coef: Rational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(v) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coef;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_constant(&mut self, c: &Rational) {
        self.constant += c;
    }

    /// `self += factor * other`
    pub fn add_scaled(&mut self, factor: &Rational, other: &LinPoly) {
        if factor.is_zero() {
            return;
        }
        for (v, c) in &other.terms {
            self.add_term(*v, factor * c);
        }
        self.constant += factor * &other.constant;
    }

    pub fn scaled(&self, factor: &Rational) -> LinPoly {
        let mut out = LinPoly::zero();
        out.add_scaled(factor, self);
        out
    }

    pub fn coeff(&self, v: VarId) -> Rational {
        self.terms.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> &Rational {
        &self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, &Rational)> + '_ {
        self.terms.iter().map(|(v, c)| (*v, c))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.terms.keys().copied()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    /// True when the polynomial has no variable terms.
    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.constant.is_zero()
    }

    /// Smallest variable with a nonzero coefficient.
    pub fn leading(&self) -> Option<(VarId, &Rational)> {
        self.terms.iter().next().map(|(v, c)| (*v, c))
    }

    pub fn without_constant(&self) -> LinPoly {
        LinPoly {
            terms: self.terms.clone(),
            constant: Rational::zero(),
        }
    }

    /// Scales so the leading coefficient is `+1` or `-1` (sign preserved).
    /// Two polynomials are positive multiples of each other iff their
    /// normalized forms are equal.
    pub fn normalized(&self) -> LinPoly {
        match self.leading() {
            Some((_, c)) => {
                let factor = c.abs().recip();
                self.scaled(&factor)
            }
            None => self.clone(),
        }
    }

    /// Evaluates with `value(v)` for each variable.
    pub fn eval_with<F>(&self, mut value: F) -> Rational
    where
        F: FnMut(VarId) -> Rational,
    {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            acc += c * value(*v);
        }
        acc
    }

    /// Evaluates against a dense assignment; variables past the end count as 0.
    pub fn eval(&self, point: &[Rational]) -> Rational {
        self.eval_with(|v| point.get(v.0).cloned().unwrap_or_else(Rational::zero))
    }

    /// Replaces every variable `v` by `subst(v)` (or keeps it when `None`).
    pub fn substitute<F>(&self, mut subst: F) -> LinPoly
    where
        F: FnMut(VarId) -> Option<LinPoly>,
    {
        let mut out = LinPoly::constant(self.constant.clone());
        for (v, c) in &self.terms {
            match subst(*v) {
                Some(p) => out.add_scaled(c, &p),
                None => out.add_term(*v, c.clone()),
            }
        }
        out
    }

    /// Renders using `name(v)` for variables.
    pub fn display_with<'a, F>(&'a self, name: F) -> impl fmt::Display + 'a
    where
        F: Fn(VarId) -> String + 'a,
    {
        PolyDisplay { poly: self, name }
    }
}

struct PolyDisplay<'a, F> {
    poly: &'a LinPoly,
    name: F,
}

impl<F: Fn(VarId) -> String> fmt::Display for PolyDisplay<'_, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in self.poly.terms() {
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if !mag.is_one() {
                write!(f, "{}*", mag)?;
            }
            f.write_str(&(self.name)(v))?;
            first = false;
        }
        let k = self.poly.constant_term();
        if first {
            write!(f, "{}", k)?;
        } else if !k.is_zero() {
            if k.is_negative() {
                write!(f, " - {}", k.abs())?;
            } else {
                write!(f, " + {}", k)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for LinPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(|v| v.to_string()))
    }
}

impl AddAssign<&LinPoly> for LinPoly {
    fn add_assign(&mut self, rhs: &LinPoly) {
        self.add_scaled(&Rational::one(), rhs);
    }
}

impl SubAssign<&LinPoly> for LinPoly {
    fn sub_assign(&mut self, rhs: &LinPoly) {
        self.add_scaled(&-Rational::one(), rhs);
    }
}

impl Add<&LinPoly> for &LinPoly {
    type Output = LinPoly;
    fn add(self, rhs: &LinPoly) -> LinPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&LinPoly> for &LinPoly {
    type Output = LinPoly;
    fn sub(self, rhs: &LinPoly) -> LinPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &LinPoly {
    type Output = LinPoly;
    fn neg(self) -> LinPoly {
        self.scaled(&-Rational::one())
    }
}

impl Mul<&LinPoly> for &Rational {
    type Output = LinPoly;
    fn mul(self, rhs: &LinPoly) -> LinPoly {
        rhs.scaled(self)
    }
}

/// One row `pivot - tail = 0` of a Jordan form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JordanRow {
    pub pivot: VarId,
    /// Expression the pivot equals. Never mentions any pivot of the form.
    pub tail: LinPoly,
}

impl JordanRow {
    /// The row as the polynomial `pivot - tail`.
    pub fn as_poly(&self) -> LinPoly {
        let mut p = -&self.tail;
        p.add_term(self.pivot, Rational::one());
        p
    }
}

/// Reduced row-echelon form `{x_k - U_k = 0}` of a linear equality system,
/// with pivots strictly increasing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct JordanForm {
    rows: Vec<JordanRow>,
}

impl JordanForm {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[JordanRow] {
        &self.rows
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn pivots(&self) -> impl Iterator<Item = VarId> + '_ {
        self.rows.iter().map(|r| r.pivot)
    }

    pub fn is_pivot(&self, v: VarId) -> bool {
        self.rows.binary_search_by(|r| r.pivot.cmp(&v)).is_ok()
    }

    pub fn tail_of(&self, v: VarId) -> Option<&LinPoly> {
        self.rows
            .binary_search_by(|r| r.pivot.cmp(&v))
            .ok()
            .map(|i| &self.rows[i].tail)
    }

    /// Rows as polynomials `pivot - tail`.
    pub fn polys(&self) -> Vec<LinPoly> {
        self.rows.iter().map(JordanRow::as_poly).collect()
    }

    /// Builds a form from rows, checking every invariant. Used when reading
    /// forms back from serialized certificates.
    pub fn from_rows(rows: Vec<JordanRow>) -> Result<Self, JordanFormError> {
        for w in rows.windows(2) {
            if w[0].pivot >= w[1].pivot {
                return Err(JordanFormError::PivotOrder);
            }
        }
        let form = Self { rows };
        for row in &form.rows {
            if row.tail.vars().any(|v| form.is_pivot(v)) {
                return Err(JordanFormError::PivotInTail(row.pivot));
            }
        }
        Ok(form)
    }

    /// Substitutes every pivot by its tail. The result mentions no pivot.
    pub fn reduce(&self, p: &LinPoly) -> LinPoly {
        if self.rows.is_empty() {
            return p.clone();
        }
        p.substitute(|v| self.tail_of(v).cloned())
    }

    /// Variables of `0..universe` that are not pivots.
    pub fn free_vars(&self, universe: usize) -> Vec<VarId> {
        (0..universe)
            .map(VarId)
            .filter(|v| !self.is_pivot(*v))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JordanFormError {
    #[error("pivots are not strictly increasing")]
    PivotOrder,
    #[error("tail of pivot {0} mentions another pivot")]
    PivotInTail(VarId),
}

/// The system has no solution: it implies `0 = c` for some `c != 0`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("linear system is inconsistent")]
pub struct Inconsistent;

/// Incremental reduced row-echelon builder. Rows are kept normalized with
/// pivot coefficient 1 and fully back-substituted after every insertion.
#[derive(Default)]
struct Echelon {
    // pivot -> polynomial `pivot + rest (+ constant)` equal to zero
    rows: BTreeMap<VarId, LinPoly>,
}

impl Echelon {
    fn insert(&mut self, eq: &LinPoly) -> Result<(), Inconsistent> {
        let reduced = eq.substitute(|v| {
            self.rows.get(&v).map(|row| {
                // v = v - row
                let mut t = row.clone();
                t.add_term(v, -Rational::one());
                -&t
            })
        });
        let Some((pivot, lead)) = reduced.leading() else {
            return if reduced.constant_term().is_zero() {
                Ok(())
            } else {
                Err(Inconsistent)
            };
        };
        let row = reduced.scaled(&lead.recip());
        for other in self.rows.values_mut() {
            let c = other.coeff(pivot);
            if !c.is_zero() {
                other.add_scaled(&-c, &row);
            }
        }
        self.rows.insert(pivot, row);
        Ok(())
    }

    fn finish(self) -> JordanForm {
        let rows = self
            .rows
            .into_iter()
            .map(|(pivot, mut row)| {
                row.add_term(pivot, -Rational::one());
                JordanRow { pivot, tail: -&row }
            })
            .collect();
        JordanForm { rows }
    }
}

/// Gauss-Jordan elimination of a homogeneous equality system. The pivot of
/// each row is its smallest variable; the result is unique for the span of
/// `eqs`.
pub fn gauss_jordan(eqs: &[LinPoly]) -> JordanForm {
    debug_assert!(eqs.iter().all(LinPoly::is_homogeneous));
    let mut ech = Echelon::default();
    for eq in eqs {
        // Homogeneous systems are always consistent.
        let _ = ech.insert(eq);
    }
    ech.finish()
}

/// Solves an affine system `{eq = 0}`. Tails of the returned form may carry
/// constants; a solution exists iff `Ok`.
pub fn solve_affine(eqs: &[LinPoly]) -> Result<JordanForm, Inconsistent> {
    let mut ech = Echelon::default();
    for eq in eqs {
        ech.insert(eq)?;
    }
    Ok(ech.finish())
}

/// Substitutes the pivots of `jordan` in `p`.
pub fn reduce_poly(p: &LinPoly, jordan: &JordanForm) -> LinPoly {
    jordan.reduce(p)
}

/// Result of reducing an inequality set by an equality set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionReduction {
    pub jordan: JordanForm,
    /// Nonzero remainders, in input order.
    pub remainder: Vec<LinPoly>,
    /// For each remainder, the index of the input polynomial it came from.
    pub sources: Vec<usize>,
}

/// Reduces every member of `ineqs` by the Jordan form of `eqs` and drops the
/// members that vanish identically. Repeated remainders are kept only once
/// (first occurrence), since the remainder is a set.
pub fn dimension_reduce(ineqs: &[LinPoly], eqs: &[LinPoly]) -> DimensionReduction {
    let jordan = gauss_jordan(eqs);
    let mut remainder = Vec::new();
    let mut sources = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, f) in ineqs.iter().enumerate() {
        let r = jordan.reduce(f);
        if r.is_zero() || !seen.insert(r.clone()) {
            continue;
        }
        remainder.push(r);
        sources.push(i);
    }
    DimensionReduction {
        jordan,
        remainder,
        sources,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> VarId {
        VarId(i)
    }

    #[test]
    fn gauss_jordan_small_example() {
        // x1+x2+x3, x1+x2, x3 with x1 < x2 < x3
        let eqs = vec![
            LinPoly::from_ints(&[(0, 1), (1, 1), (2, 1)]),
            LinPoly::from_ints(&[(0, 1), (1, 1)]),
            LinPoly::from_ints(&[(2, 1)]),
        ];
        let j = gauss_jordan(&eqs);
        assert_eq!(j.rank(), 2);
        assert_eq!(j.rows()[0].pivot, x(0));
        assert_eq!(j.rows()[0].tail, LinPoly::from_ints(&[(1, -1)]));
        assert_eq!(j.rows()[1].pivot, x(2));
        assert!(j.rows()[1].tail.is_zero());
    }

    #[test]
    fn empty_system() {
        let j = gauss_jordan(&[]);
        assert_eq!(j.rank(), 0);
        let p = LinPoly::from_ints(&[(3, 2), (1, -1)]);
        assert_eq!(reduce_poly(&p, &j), p);
    }

    #[test]
    fn reduce_examples() {
        let j = gauss_jordan(&[
            LinPoly::from_ints(&[(0, 1), (1, 1), (2, 1)]),
            LinPoly::from_ints(&[(0, 1), (1, 1)]),
            LinPoly::from_ints(&[(2, 1)]),
        ]);
        let f1 = LinPoly::from_ints(&[(0, 1), (1, 1), (2, -1)]);
        let f2 = LinPoly::from_ints(&[(1, 1), (2, 1)]);
        assert!(reduce_poly(&f1, &j).is_zero());
        assert_eq!(reduce_poly(&f2, &j), LinPoly::var(x(1)));

        let red = dimension_reduce(
            &[f1, f2],
            &[
                LinPoly::from_ints(&[(0, 1), (1, 1), (2, 1)]),
                LinPoly::from_ints(&[(0, 1), (1, 1)]),
                LinPoly::from_ints(&[(2, 1)]),
            ],
        );
        assert_eq!(red.remainder, vec![LinPoly::var(x(1))]);
        assert_eq!(red.sources, vec![1]);
    }

    #[test]
    fn dimension_reduce_without_equalities_drops_zero() {
        let s = vec![
            LinPoly::from_ints(&[(0, 1)]),
            LinPoly::zero(),
            LinPoly::from_ints(&[(1, 2)]),
        ];
        let red = dimension_reduce(&s, &[]);
        assert!(red.jordan.is_empty());
        assert_eq!(red.remainder, vec![s[0].clone(), s[2].clone()]);
    }

    #[test]
    fn affine_inconsistent() {
        // x = 1, x = 2
        let mut a = LinPoly::var(x(0));
        a.add_constant(&rat(-1));
        let mut b = LinPoly::var(x(0));
        b.add_constant(&rat(-2));
        assert_eq!(solve_affine(&[a.clone(), b]), Err(Inconsistent));
        let j = solve_affine(&[a]).unwrap();
        assert_eq!(j.rows()[0].tail, LinPoly::constant(rat(1)));
    }

    #[test]
    fn from_rows_rejects_bad_forms() {
        let bad = vec![
            JordanRow {
                pivot: x(2),
                tail: LinPoly::zero(),
            },
            JordanRow {
                pivot: x(1),
                tail: LinPoly::zero(),
            },
        ];
        assert_eq!(JordanForm::from_rows(bad), Err(JordanFormError::PivotOrder));
        let bad = vec![
            JordanRow {
                pivot: x(0),
                tail: LinPoly::var(x(1)),
            },
            JordanRow {
                pivot: x(1),
                tail: LinPoly::zero(),
            },
        ];
        assert_eq!(
            JordanForm::from_rows(bad),
            Err(JordanFormError::PivotInTail(x(0)))
        );
    }

    #[test]
    fn normalized_detects_positive_multiples() {
        let a = LinPoly::from_ints(&[(1, 3), (2, -6)]);
        let b = LinPoly::from_ints(&[(1, 1), (2, -2)]);
        let c = LinPoly::from_ints(&[(1, -1), (2, 2)]);
        assert_eq!(a.normalized(), b.normalized());
        assert_ne!(a.normalized(), c.normalized());
    }

    #[test]
    fn display() {
        let p = LinPoly::from_ints(&[(0, 1), (2, -2)]);
        assert_eq!(p.to_string(), "x0 - 2*x2");
        assert_eq!(LinPoly::zero().to_string(), "0");
    }
}
