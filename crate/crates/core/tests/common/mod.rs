#![allow(dead_code)]

use std::collections::BTreeSet;

use entroproof_core::algebra::{rat, LinPoly, Rational, VarId};
use entroproof_core::atoms::{self, MeasureTerm, SVarSequence, VarSet};
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

/// Fourier-Motzkin decision of `{p >= 0 : p in cs}` (affine allowed).
/// Independent of the simplex; only for small systems.
pub fn fm_feasible(cs: &[LinPoly]) -> bool {
    let mut rows: BTreeSet<LinPoly> = cs.iter().map(scale_free).collect();
    loop {
        if let Some(bad) = rows.iter().find(|r| r.is_constant()) {
            if bad.constant_term().is_negative() {
                return false;
            }
        }
        rows.retain(|r| !r.is_constant());
        let Some(x) = rows.iter().flat_map(|r| r.vars()).min() else {
            return true;
        };
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            let c = r.coeff(x);
            if c.is_positive() {
                pos.push(r);
            } else if c.is_negative() {
                neg.push(r);
            } else {
                rest.push(r);
            }
        }
        let mut next: BTreeSet<LinPoly> = rest.into_iter().collect();
        for p in &pos {
            for q in &neg {
                // p has +a x, q has -b x: b*p + a*q eliminates x.
                let a = p.coeff(x);
                let b = -q.coeff(x);
                let mut r = p.scaled(&b);
                r.add_scaled(&a, q);
                next.insert(scale_free(&r));
            }
        }
        rows = next;
    }
}

/// Positive rescaling so that the largest absolute value among the
/// coefficients and constant is 1.
fn scale_free(p: &LinPoly) -> LinPoly {
    let m = p
        .terms()
        .map(|(_, c)| c.abs())
        .chain(std::iter::once(p.constant_term().abs()))
        .max()
        .unwrap_or_else(Rational::zero);
    if m.is_zero() {
        p.clone()
    } else {
        p.scaled(&(Rational::from_integer(1.into()) / m))
    }
}

/// Is `target >= 0` implied by `{c >= 0}` (homogeneous)? FM on `{c >= 0,
/// -target - 1 >= 0}`.
pub fn fm_implies(cs: &[LinPoly], target: &LinPoly) -> bool {
    let mut sys = cs.to_vec();
    let mut t = -target;
    t.add_constant(&rat(-1));
    sys.push(t);
    !fm_feasible(&sys)
}

pub fn random_subset<R: Rng>(rng: &mut R, from: VarSet) -> VarSet {
    VarSet::from_indices(from.iter().filter(|_| rng.gen_bool(0.5)))
}

/// A random nonzero measure over `n` variables.
pub fn random_measure<R: Rng>(rng: &mut R, n: usize) -> MeasureTerm {
    let full = VarSet::full(n);
    loop {
        let a = random_subset(rng, full);
        if a.is_empty() {
            continue;
        }
        let cond = random_subset(rng, full.difference(a));
        let m = if rng.gen_bool(0.4) {
            MeasureTerm::entropy(a, cond)
        } else {
            let b = random_subset(rng, full.difference(cond));
            if b.is_empty() {
                continue;
            }
            MeasureTerm::mutual_information(a, b, cond)
        };
        if let Some(m) = m {
            return m;
        }
    }
}

/// `I(A;B|C)` with `A`, `B`, `C` pairwise disjoint and `A`, `B` nonempty.
pub fn random_vanishing_mi<R: Rng>(rng: &mut R, n: usize) -> MeasureTerm {
    let mut idx: Vec<usize> = (1..=n).collect();
    loop {
        idx.shuffle(rng);
        let mut a = VarSet::EMPTY;
        let mut b = VarSet::EMPTY;
        let mut c = VarSet::EMPTY;
        for &i in &idx {
            match rng.gen_range(0..4) {
                0 => a = a.with(i),
                1 => b = b.with(i),
                2 => c = c.with(i),
                _ => {}
            }
        }
        if let Some(m) = MeasureTerm::mutual_information(a, b, c) {
            if !a.is_empty() && !b.is_empty() {
                return m;
            }
        }
    }
}

pub type Combo = Vec<(Rational, MeasureTerm)>;

pub fn scale(c: &Combo, k: &Rational) -> Combo {
    c.iter().map(|(x, m)| (x * k, *m)).collect()
}

/// A random query and its lowerings in both coordinate systems.
#[derive(Clone, Debug)]
pub struct RandomQuery {
    pub n: usize,
    pub identity: bool,
    pub objective: Combo,
    pub equalities: Vec<Combo>,
    pub inequalities: Vec<Combo>,
    /// Whether the generator built the goal as a derivation.
    pub constructed_true: bool,
}

pub struct Lowered {
    pub objective: LinPoly,
    pub equalities: Vec<LinPoly>,
    pub inequalities: Vec<LinPoly>,
}

impl RandomQuery {
    pub fn lower(&self, seq: &SVarSequence) -> Lowered {
        Lowered {
            objective: atoms::expand_expr(&self.objective, seq),
            equalities: self
                .equalities
                .iter()
                .map(|c| atoms::expand_expr(c, seq))
                .collect(),
            inequalities: self
                .inequalities
                .iter()
                .map(|c| atoms::expand_expr(c, seq))
                .collect(),
        }
    }

    pub fn lower_joint_entropy(&self) -> Lowered {
        Lowered {
            objective: atoms::joint_entropy_vector(&self.objective),
            equalities: self
                .equalities
                .iter()
                .map(|c| atoms::joint_entropy_vector(c))
                .collect(),
            inequalities: self
                .inequalities
                .iter()
                .map(|c| atoms::joint_entropy_vector(c))
                .collect(),
        }
    }
}

fn small_positive<R: Rng>(rng: &mut R) -> Rational {
    Rational::new(rng.gen_range(1..=4).into(), rng.gen_range(1..=2).into())
}

fn small_signed<R: Rng>(rng: &mut R) -> Rational {
    let v = small_positive(rng);
    if rng.gen_bool(0.5) {
        -v
    } else {
        v
    }
}

/// Random query over `n` variables: equalities are vanishing conditional
/// mutual informations, goals are either derived (conic combination of
/// elemental measures and user inequalities plus any combination of the
/// equalities) or adversarial (mixed-sign combinations, or a derived goal
/// minus a random measure).
pub fn random_query<R: Rng>(rng: &mut R, n: usize) -> RandomQuery {
    let elemental = atoms::elemental_measures(n).unwrap();
    let equalities: Vec<Combo> = (0..rng.gen_range(0..=3))
        .map(|_| vec![(rat(1), random_vanishing_mi(rng, n))])
        .collect();
    let inequalities: Vec<Combo> = if rng.gen_bool(0.2) {
        // A user inequality that need not be Shannon-type.
        vec![vec![
            (rat(1), random_measure(rng, n)),
            (rat(-1), random_measure(rng, n)),
        ]]
    } else {
        Vec::new()
    };

    let mut derived: Combo = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        derived.push((small_positive(rng), *elemental.choose(rng).unwrap()));
    }
    for e in &equalities {
        if rng.gen_bool(0.7) {
            derived.extend(scale(e, &small_signed(rng)));
        }
    }
    for g in &inequalities {
        if rng.gen_bool(0.7) {
            derived.extend(scale(g, &small_positive(rng)));
        }
    }

    let kind = rng.gen_range(0..10);
    let (identity, objective, constructed_true) = match kind {
        0..=3 => (false, derived, true),
        4..=5 => {
            let mut o = derived;
            o.push((-small_positive(rng), random_measure(rng, n)));
            (false, o, false)
        }
        6..=7 => {
            let o: Combo = (0..rng.gen_range(1..=3))
                .map(|_| (small_signed(rng), random_measure(rng, n)))
                .collect();
            (false, o, false)
        }
        8 => {
            let mut o: Combo = Vec::new();
            for e in &equalities {
                o.extend(scale(e, &small_signed(rng)));
            }
            if o.is_empty() {
                o.push((rat(1), random_measure(rng, n)));
                o.push((rat(-1), o[0].1));
            }
            (true, o, true)
        }
        _ => {
            let mut o: Combo = vec![(small_signed(rng), random_measure(rng, n))];
            for e in &equalities {
                o.extend(scale(e, &small_signed(rng)));
            }
            (true, o, false)
        }
    };
    RandomQuery {
        n,
        identity,
        objective,
        equalities,
        inequalities,
        constructed_true,
    }
}

/// Uniform random rational with small numerator and denominator.
pub fn random_rational<R: Rng>(rng: &mut R, span: i64) -> Rational {
    Rational::new(
        rng.gen_range(-span..=span).into(),
        rng.gen_range(1..=6).into(),
    )
}

pub fn random_point<R: Rng>(rng: &mut R, dim: usize, span: i64) -> Vec<Rational> {
    (0..dim).map(|_| random_rational(rng, span)).collect()
}

/// Random integer polynomial over `vars` variables.
pub fn random_poly<R: Rng>(rng: &mut R, vars: usize, span: i64) -> LinPoly {
    let mut p = LinPoly::zero();
    for v in 0..vars {
        if rng.gen_bool(0.6) {
            p.add_term(VarId(v), rat(rng.gen_range(-span..=span)));
        }
    }
    p
}
