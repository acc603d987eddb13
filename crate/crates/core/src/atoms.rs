//! I-measure atoms and their s-variable names.
//!
//! For `n` random variables there is one atom per nonempty subset `S` of
//! `{1..n}` (the intersection of the set variables in `S` with the
//! complements of the rest). The s-variable of an atom is the sequence
//! `[i_1..i_n]` where position `j` holds `j` when `j` is in `S` and `min(S)`
//! otherwise.
//!
//! Information measures expand into sums of s-variables; the ordered list of
//! all s-variables (the s-variable sequence) fixes the coordinate order used
//! by the algebra module.

use std::fmt;

use num_traits::{One, Zero};

use crate::algebra::{LinPoly, Rational, VarId};

/// Largest supported number of random variables.
pub const MAX_VARS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AtomError {
    #[error("the empty atom has no s-variable")]
    EmptyAtom,
    #[error("number of random variables {0} is outside 1..={MAX_VARS}")]
    VarCount(usize),
    #[error("subscript sequence {0:?} is not a canonical s-variable")]
    NonCanonical(Vec<usize>),
    #[error("subset {0:?} mentions a variable outside 1..={1}")]
    OutOfRange(VarSet, usize),
}

/// A set of random-variable indices, stored as a bitmask (bit `i - 1` for
/// variable `i`).
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarSet(u32);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn from_bits(bits: u32) -> Self {
        VarSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// `{1..n}`
    pub fn full(n: usize) -> Self {
        if n >= 32 {
            VarSet(u32::MAX)
        } else {
            VarSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        VarSet(1 << (i - 1))
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        it.into_iter().fold(VarSet::EMPTY, |s, i| s.with(i))
    }

    pub fn with(self, i: usize) -> Self {
        VarSet(self.0 | (1 << (i - 1)))
    }

    pub fn contains(self, i: usize) -> bool {
        (1..=32).contains(&i) && self.0 & (1 << (i - 1)) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize + 1)
    }

    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 32 - self.0.leading_zeros() as usize)
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VarSet) -> VarSet {
        VarSet(self.0 & other.0)
    }

    pub fn difference(self, other: VarSet) -> VarSet {
        VarSet(self.0 & !other.0)
    }

    pub fn intersects(self, other: VarSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (1..=32).filter(move |&i| self.contains(i))
    }

    /// All subsets of `self`, including the empty set and `self`, in
    /// increasing bitmask order.
    pub fn subsets(self) -> impl Iterator<Item = VarSet> {
        let full = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(VarSet(cur))
        })
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

fn check_n(n: usize) -> Result<(), AtomError> {
    if (1..=MAX_VARS).contains(&n) {
        Ok(())
    } else {
        Err(AtomError::VarCount(n))
    }
}

/// The s-variable of one atom.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SVar {
    n: usize,
    atom: VarSet,
}

impl SVar {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn atom(&self) -> VarSet {
        self.atom
    }

    /// The subscript sequence `[i_1..i_n]`.
    pub fn subscripts(&self) -> Vec<usize> {
        let m = self.atom.min().expect("atom is nonempty");
        (1..=self.n)
            .map(|j| if self.atom.contains(j) { j } else { m })
            .collect()
    }

    /// Number of distinct subscripts, which is also the atom's cardinality.
    pub fn subscript_set_len(&self) -> usize {
        self.atom.len()
    }

    /// Reads an s-variable back from its subscript sequence.
    pub fn from_subscripts(subscripts: &[usize]) -> Result<SVar, AtomError> {
        let n = subscripts.len();
        check_n(n)?;
        if subscripts.iter().any(|&i| i == 0 || i > n) {
            return Err(AtomError::NonCanonical(subscripts.to_vec()));
        }
        let atom = VarSet::from_indices(subscripts.iter().copied());
        let t = SVar { n, atom };
        if t.subscripts() != subscripts {
            return Err(AtomError::NonCanonical(subscripts.to_vec()));
        }
        Ok(t)
    }

    /// Compares by the s-variable order: `Greater` means `self` precedes
    /// `other` in the s-variable sequence.
    pub fn order_cmp(&self, other: &SVar) -> std::cmp::Ordering {
        self.atom
            .len()
            .cmp(&other.atom.len())
            .then_with(|| other.subscripts().cmp(&self.subscripts()))
    }
}

impl fmt::Display for SVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("s_")?;
        let subs = self.subscripts();
        if subs.iter().all(|&i| i < 10) {
            for i in subs {
                write!(f, "{i}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = subs.iter().map(|i| i.to_string()).collect();
            write!(f, "{{{}}}", parts.join(","))
        }
    }
}

impl fmt::Debug for SVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for SVar {
    type Err = AtomError;

    /// Accepts `s_1131`, `s_{1,1,3,1}` and `s{1,1,3,1}`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AtomError::NonCanonical(Vec::new());
        let body = s
            .strip_prefix("s_")
            .or_else(|| s.strip_prefix('s'))
            .ok_or_else(bad)?;
        let subs: Vec<usize> = if let Some(inner) = body.strip_prefix('{') {
            let inner = inner.strip_suffix('}').ok_or_else(bad)?;
            inner
                .split(',')
                .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<_, _>>()?
        } else {
            body.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad))
                .collect::<Result<_, _>>()?
        };
        SVar::from_subscripts(&subs)
    }
}

/// s-variable of the atom `S`.
pub fn svar_from_atom(atom: VarSet, n: usize) -> Result<SVar, AtomError> {
    check_n(n)?;
    if atom.is_empty() {
        return Err(AtomError::EmptyAtom);
    }
    if !atom.is_subset(VarSet::full(n)) {
        return Err(AtomError::OutOfRange(atom, n));
    }
    Ok(SVar { n, atom })
}

/// Atom named by an s-variable.
pub fn atom_from_svar(t: &SVar) -> VarSet {
    t.atom
}

/// All `2^n - 1` s-variables, in s-variable order. Position in this list is
/// the [`VarId`] of the s-variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SVarSequence {
    n: usize,
    vars: Vec<SVar>,
    // atom bitmask -> position
    position: Vec<usize>,
}

impl SVarSequence {
    pub fn new(n: usize) -> Result<Self, AtomError> {
        check_n(n)?;
        let mut vars: Vec<SVar> = (1..1u32 << n)
            .map(|bits| SVar {
                n,
                atom: VarSet(bits),
            })
            .collect();
        vars.sort_by(|a, b| b.order_cmp(a));
        Ok(Self::from_sorted(n, vars))
    }

    fn from_sorted(n: usize, vars: Vec<SVar>) -> Self {
        let mut position = vec![usize::MAX; 1 << n];
        for (i, t) in vars.iter().enumerate() {
            position[t.atom.0 as usize] = i;
        }
        Self { n, vars, position }
    }

    /// Builds the sequence by repeated splitting from `[s_1]`: every
    /// `s_{i_1..i_k}` splits into `s_{i_1..i_k,i_1}` and `s_{i_1..i_k,k+1}`,
    /// and `s_{k+1,..,k+1}` is added; the result is then sorted.
    pub fn by_splitting(n: usize) -> Result<Self, AtomError> {
        check_n(n)?;
        let mut seqs: Vec<Vec<usize>> = vec![vec![1]];
        for k in 1..n {
            let mut next = Vec::with_capacity(2 * seqs.len() + 1);
            for s in &seqs {
                let mut a = s.clone();
                a.push(s[0]);
                let mut b = s.clone();
                b.push(k + 1);
                next.push(a);
                next.push(b);
            }
            next.push(vec![k + 1; k + 1]);
            seqs = next;
        }
        let mut vars = seqs
            .iter()
            .map(|s| SVar::from_subscripts(s))
            .collect::<Result<Vec<_>, _>>()?;
        vars.sort_by(|a, b| b.order_cmp(a));
        Ok(Self::from_sorted(n, vars))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[SVar] {
        &self.vars
    }

    pub fn get(&self, v: VarId) -> SVar {
        self.vars[v.0]
    }

    pub fn id_of_atom(&self, atom: VarSet) -> VarId {
        VarId(self.position[atom.0 as usize])
    }

    pub fn id_of(&self, t: &SVar) -> Option<VarId> {
        (t.n == self.n).then(|| self.id_of_atom(t.atom))
    }

    /// Display name of a coordinate.
    pub fn name(&self, v: VarId) -> String {
        self.vars[v.0].to_string()
    }

    /// Sums the s-variables of every atom satisfying `pred`.
    pub fn sum_where<F: Fn(VarSet) -> bool>(&self, pred: F) -> LinPoly {
        LinPoly::from_terms(
            self.vars
                .iter()
                .enumerate()
                .filter(|(_, t)| pred(t.atom))
                .map(|(i, _)| (VarId(i), Rational::one())),
        )
    }
}

/// `svar_sequence(n)`
pub fn svar_sequence(n: usize) -> Result<SVarSequence, AtomError> {
    SVarSequence::new(n)
}

/// Conditional mutual information `I(X_G; X_G' | X_G'')`. An entropy
/// `H(X_G | X_G'')` is the case `G' = G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasureTerm {
    pub first: VarSet,
    pub second: VarSet,
    pub given: VarSet,
}

impl MeasureTerm {
    /// `H(X_G | X_cond)`
    pub fn entropy(g: VarSet, cond: VarSet) -> Option<Self> {
        Self::mutual_information(g, g, cond)
    }

    /// `I(X_a; X_b | X_cond)`, with indices already in the conditioning set
    /// dropped from `a` and `b`. `None` when the measure vanishes identically.
    pub fn mutual_information(a: VarSet, b: VarSet, cond: VarSet) -> Option<Self> {
        let first = a.difference(cond);
        let second = b.difference(cond);
        if first.is_empty() || second.is_empty() {
            return None;
        }
        Some(Self {
            first,
            second,
            given: cond,
        })
    }

    pub fn is_entropy(&self) -> bool {
        self.first == self.second
    }

    /// Every variable the measure mentions.
    pub fn support(&self) -> VarSet {
        self.first.union(self.second).union(self.given)
    }

    /// Whether the atom `s` lies in `X_G ∩ X_G' − X_G''`.
    pub fn contains_atom(&self, s: VarSet) -> bool {
        s.intersects(self.first) && s.intersects(self.second) && !s.intersects(self.given)
    }

    /// Renders with the given variable names (1-based index into `names`).
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        MeasureDisplay { m: self, names }
    }
}

struct MeasureDisplay<'a> {
    m: &'a MeasureTerm,
    names: &'a [String],
}

impl fmt::Display for MeasureDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |s: VarSet| -> String {
            s.iter()
                .map(|i| {
                    self.names
                        .get(i - 1)
                        .cloned()
                        .unwrap_or_else(|| format!("X{i}"))
                })
                .collect::<Vec<_>>()
                .join(",")
        };
        if self.m.is_entropy() {
            write!(f, "H({}", list(self.m.first))?;
        } else {
            write!(f, "I({};{}", list(self.m.first), list(self.m.second))?;
        }
        if !self.m.given.is_empty() {
            write!(f, "|{}", list(self.m.given))?;
        }
        f.write_str(")")
    }
}

/// Default names `X1..Xn`.
pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("X{i}")).collect()
}

/// Expands a measure into the sum of the s-variables of the atoms it covers.
pub fn expand_measure(m: &MeasureTerm, seq: &SVarSequence) -> LinPoly {
    seq.sum_where(|s| m.contains_atom(s))
}

/// Expands a linear combination of measures over s-variable coordinates.
pub fn expand_expr(terms: &[(Rational, MeasureTerm)], seq: &SVarSequence) -> LinPoly {
    let mut out = LinPoly::zero();
    for (c, m) in terms {
        out.add_scaled(c, &expand_measure(m, seq));
    }
    out
}

/// Elemental inequalities as measures: `H(X_i | X_rest)` for each `i`, then
/// `I(X_i; X_j | X_K)` for `i < j` and `K` ranging over subsets of the other
/// variables, grouped by `|K|`.
pub fn elemental_measures(n: usize) -> Result<Vec<MeasureTerm>, AtomError> {
    check_n(n)?;
    let full = VarSet::full(n);
    let mut out = Vec::with_capacity(elemental_count(n));
    for i in 1..=n {
        let single = VarSet::singleton(i);
        out.extend(MeasureTerm::entropy(single, full.difference(single)));
    }
    for k in 0..n.saturating_sub(1) {
        for i in 1..=n {
            for j in i + 1..=n {
                let rest = full.difference(VarSet::singleton(i).with(j));
                for cond in rest.subsets().filter(|s| s.len() == k) {
                    out.extend(MeasureTerm::mutual_information(
                        VarSet::singleton(i),
                        VarSet::singleton(j),
                        cond,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// `n + C(n,2) 2^(n-2)`
pub fn elemental_count(n: usize) -> usize {
    if n < 2 {
        return n;
    }
    n + n * (n - 1) / 2 * (1usize << (n - 2))
}

/// Elemental inequalities `p >= 0` over s-variable coordinates.
pub fn elemental_inequalities(seq: &SVarSequence) -> Result<Vec<LinPoly>, AtomError> {
    Ok(elemental_measures(seq.n())?
        .iter()
        .map(|m| expand_measure(m, seq))
        .collect())
}

/// Coordinate of the joint entropy `H(X_G)` in the joint-entropy vector.
pub fn entropy_coord(g: VarSet) -> VarId {
    VarId(g.bits() as usize - 1)
}

/// Subset named by a joint-entropy coordinate.
pub fn entropy_coord_set(v: VarId) -> VarSet {
    VarSet::from_bits(v.0 as u32 + 1)
}

fn add_joint_entropy(out: &mut LinPoly, g: VarSet, c: Rational) {
    if !g.is_empty() {
        out.add_term(entropy_coord(g), c);
    }
}

/// Rewrites a combination of measures over joint-entropy coordinates using
/// `I(G;G'|G'') = H(G∪G'') + H(G'∪G'') − H(G∪G'∪G'') − H(G'')`.
pub fn joint_entropy_vector(terms: &[(Rational, MeasureTerm)]) -> LinPoly {
    let mut out = LinPoly::zero();
    for (c, m) in terms {
        let minus = -c.clone();
        add_joint_entropy(&mut out, m.first.union(m.given), c.clone());
        add_joint_entropy(&mut out, m.second.union(m.given), c.clone());
        add_joint_entropy(&mut out, m.support(), minus.clone());
        add_joint_entropy(&mut out, m.given, minus);
    }
    out
}

/// Joint-entropy form of a single measure.
pub fn measure_joint_entropy(m: &MeasureTerm) -> LinPoly {
    joint_entropy_vector(&[(Rational::one(), *m)])
}

/// Value of `H(X_G)` implied by atom values: the sum over atoms meeting `G`.
pub fn joint_entropy_from_atoms(g: VarSet, seq: &SVarSequence, atoms: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (i, t) in seq.vars().iter().enumerate() {
        if t.atom().intersects(g) {
            acc += &atoms[i];
        }
    }
    acc
}
