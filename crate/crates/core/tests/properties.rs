mod common;

use common::{fm_feasible, fm_implies};
use entroproof_core::algebra::{gauss_jordan, rat, solve_affine, LinPoly, Rational, VarId};
use entroproof_core::atoms::{
    self, atom_from_svar, entropy_coord, svar_from_atom, svar_sequence, MeasureTerm, SVar, VarSet,
};
use entroproof_core::lp::{self, AffineConstraint, ConeOutcome, Feasibility};
use entroproof_core::parser::{parse_expression, Expr};
use entroproof_core::simplify::{implied_equalities, minimal_characterization};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn poly_strategy(vars: usize, span: i64) -> impl Strategy<Value = LinPoly> {
    proptest::collection::vec((0..vars, -span..=span), 0..=vars)
        .prop_map(|ts| LinPoly::from_ints(&ts))
}

fn affine_strategy(vars: usize, span: i64) -> impl Strategy<Value = LinPoly> {
    (poly_strategy(vars, span), -span..=span).prop_map(|(mut p, c)| {
        p.add_constant(&rat(c));
        p
    })
}

fn system(vars: usize, max: usize) -> impl Strategy<Value = Vec<LinPoly>> {
    proptest::collection::vec(poly_strategy(vars, 3), 0..=max)
}

fn measure_strategy(n: usize) -> impl Strategy<Value = MeasureTerm> {
    let full = (1u32 << n) - 1;
    (1..=full, 0..=full, 0..=full, any::<bool>()).prop_filter_map(
        "zero measure",
        |(a, b, c, ent)| {
            let (a, b, c) = (
                VarSet::from_bits(a),
                VarSet::from_bits(b),
                VarSet::from_bits(c),
            );
            if ent {
                MeasureTerm::entropy(a, c)
            } else {
                MeasureTerm::mutual_information(a, b, c)
            }
        },
    )
}

fn span_contains(eqs: &[LinPoly], p: &LinPoly) -> bool {
    gauss_jordan(eqs).reduce(p).is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn jordan_form_is_unique(eqs in system(5, 5), mix in proptest::collection::vec(-2i64..=2, 25)) {
        let j = gauss_jordan(&eqs);
        // Reversed order plus extra linear combinations span the same space.
        let mut other: Vec<LinPoly> = eqs.iter().rev().cloned().collect();
        for (i, e) in eqs.iter().enumerate() {
            let mut combo = e.clone();
            for (k, f) in eqs.iter().enumerate() {
                combo.add_scaled(&rat(mix[(i * 5 + k) % mix.len()]), f);
            }
            other.push(combo);
        }
        prop_assert_eq!(gauss_jordan(&other), j);
    }

    #[test]
    fn jordan_rows_are_reduced(eqs in system(6, 6)) {
        let j = gauss_jordan(&eqs);
        let pivots: Vec<VarId> = j.pivots().collect();
        for w in pivots.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        for r in j.rows() {
            prop_assert!(r.tail.vars().all(|v| !j.is_pivot(v) && v > r.pivot));
            prop_assert!(span_contains(&eqs, &r.as_poly()));
        }
        for e in &eqs {
            prop_assert!(j.reduce(e).is_zero());
        }
    }

    #[test]
    fn reduction_is_sound_and_idempotent(eqs in system(6, 4), p in poly_strategy(6, 5)) {
        let j = gauss_jordan(&eqs);
        let r = j.reduce(&p);
        prop_assert!(r.vars().all(|v| !j.is_pivot(v)));
        prop_assert_eq!(j.reduce(&r), r.clone());
        prop_assert!(span_contains(&eqs, &(&p - &r)));
    }

    #[test]
    fn affine_solutions_satisfy_system(
        eqs in proptest::collection::vec(affine_strategy(4, 3), 0..=4),
        free in proptest::collection::vec(-5i64..=5, 4),
    ) {
        match solve_affine(&eqs) {
            Ok(j) => {
                let mut point: Vec<Rational> = free.iter().map(|&x| rat(x)).collect();
                for r in j.rows() {
                    point[r.pivot.index()] = Rational::zero();
                }
                for r in j.rows() {
                    point[r.pivot.index()] = r.tail.eval(&point);
                }
                for e in &eqs {
                    prop_assert!(e.eval(&point).is_zero());
                }
            }
            Err(_) => {
                let mut both = Vec::new();
                for e in &eqs {
                    both.push(e.clone());
                    both.push(-e);
                }
                prop_assert!(!fm_feasible(&both));
            }
        }
    }

    #[test]
    fn svar_atom_round_trip(n in 1usize..=8, bits in 1u32..=255) {
        let atom = VarSet::from_bits(bits & ((1u32 << n) - 1));
        prop_assume!(!atom.is_empty());
        let s = svar_from_atom(atom, n).unwrap();
        prop_assert_eq!(atom_from_svar(&s), atom);
        let parsed: SVar = s.to_string().parse().unwrap();
        prop_assert_eq!(parsed, s);
        let seq = svar_sequence(n).unwrap();
        prop_assert_eq!(seq.get(seq.id_of_atom(atom)), s);
    }

    #[test]
    fn expansion_matches_joint_entropies(
        (n, m) in (2usize..=4).prop_flat_map(|n| (Just(n), measure_strategy(n))),
        values in proptest::collection::vec(-6i64..=6, 15),
    ) {
        let seq = svar_sequence(n).unwrap();
        let mu: Vec<Rational> = values.iter().take(seq.len()).map(|&v| rat(v)).collect();
        let by_atoms = atoms::expand_measure(&m, &seq).eval(&mu);
        // Joint-entropy vector h_G = mu(union of X_i, i in G).
        let dim = (1usize << n) - 1;
        let h: Vec<Rational> = (1..=dim as u32)
            .map(|bits| atoms::joint_entropy_from_atoms(VarSet::from_bits(bits), &seq, &mu))
            .collect();
        let by_entropies = atoms::measure_joint_entropy(&m).eval(&h);
        prop_assert_eq!(by_atoms, by_entropies);
        prop_assert_eq!(entropy_coord(VarSet::full(n)).index(), dim - 1);
    }

    #[test]
    fn lowering_is_linear(
        a in -4i64..=4,
        b in -4i64..=4,
        m1 in measure_strategy(3),
        m2 in measure_strategy(3),
    ) {
        let names = atoms::default_names(3);
        let seq = svar_sequence(3).unwrap();
        let e1 = Expr::from_terms([(rat(1), m1)]);
        let e2 = Expr::from_terms([(rat(1), m2)]);
        let sign = if b < 0 { "-" } else { "+" };
        let text = format!(
            "{a}*{} {sign} {}*{}",
            e1.display_with(&names),
            b.abs(),
            e2.display_with(&names)
        );
        let parsed = parse_expression(&text, &names).unwrap();
        let mut expect = e1.lower(&seq).scaled(&rat(a));
        expect.add_scaled(&rat(b), &e2.lower(&seq));
        prop_assert_eq!(parsed.lower(&seq), expect);
    }

    #[test]
    fn expression_display_round_trip(terms in proptest::collection::vec((1i64..=5, any::<bool>(), 1i64..=3, measure_strategy(3)), 1..4)) {
        let names = atoms::default_names(3);
        let e = Expr::from_terms(terms.into_iter().map(|(p, neg, q, m)| {
            let p = if neg { -p } else { p };
            (Rational::new(p.into(), q.into()), m)
        }));
        prop_assume!(!e.is_empty());
        let shown = e.display_with(&names).to_string();
        prop_assert_eq!(parse_expression(&shown, &names).unwrap(), e);
    }

    #[test]
    fn parser_never_panics(s in "[HI()XYZ123;,|=<>+*/ .-]{0,40}") {
        let names = vec!["X".to_string(), "Y".to_string(), "Z".to_string()];
        let _ = parse_expression(&s, &names);
        let _ = entroproof_core::parser::parse_document(&format!("vars X, Y, Z\nprove {s}"));
    }

    #[test]
    fn feasibility_agrees_with_fourier_motzkin(cs in proptest::collection::vec(affine_strategy(3, 4), 0..=6)) {
        let constraints: Vec<AffineConstraint> = cs.iter().cloned().map(AffineConstraint::new).collect();
        let (out, pivots) = lp::feasible_counted(&constraints);
        prop_assert_eq!(out.is_feasible(), fm_feasible(&cs));
        match out {
            Feasibility::Feasible(w) => prop_assert!(w.satisfies(&constraints)),
            Feasibility::Infeasible(f) => prop_assert!(f.verify(&constraints)),
        }
        // Bland's rule never revisits a basis: pivots are bounded by the
        // number of bases of the standard form.
        let cols = 2 * 3 + 2 * cs.len();
        let bound = binomial(cols, cs.len());
        prop_assert!(pivots <= bound, "{pivots} > {bound}");
    }

    #[test]
    fn cone_positive_agrees_with_fourier_motzkin(obj in poly_strategy(3, 3), cs in system(3, 5)) {
        let constraints: Vec<AffineConstraint> = cs.iter().cloned().map(AffineConstraint::new).collect();
        let out = lp::cone_positive(&obj, &constraints).unwrap();
        let mut sys = cs.clone();
        let mut bound = obj.clone();
        bound.add_constant(&rat(-1));
        sys.push(bound);
        prop_assert_eq!(out.is_positive(), !obj.is_zero() && fm_feasible(&sys));
        if let ConeOutcome::Positive(w) = out {
            prop_assert!(w.satisfies(&constraints));
            prop_assert!(w.eval(&obj).is_positive());
        }
    }

    #[test]
    fn implied_equalities_agree_with_oracle(s in system(3, 6)) {
        let imp = implied_equalities(&s);
        for (k, f) in s.iter().enumerate() {
            let oracle = fm_implies(&s, &-f);
            prop_assert_eq!(imp.members.contains(&k), oracle, "member {}", k);
        }
        let mut combo = LinPoly::zero();
        for (w, f) in imp.witness.iter().zip(&s) {
            prop_assert!(!w.is_negative());
            combo.add_scaled(w, f);
        }
        prop_assert!(combo.is_zero());
        for (k, w) in imp.witness.iter().enumerate() {
            prop_assert_eq!(w.is_positive(), imp.members.contains(&k));
        }
    }

    #[test]
    fn minimal_characterization_is_equivalent(s in system(3, 6)) {
        let mc = minimal_characterization(&s);
        for f in &s {
            prop_assert!(f.is_zero() || fm_implies(&mc.members, f));
        }
        for (m, &src) in mc.members.iter().zip(&mc.sources) {
            prop_assert_eq!(m, &s[src].normalized());
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn elemental_measures_are_listed_once_each() {
    for n in 1..=5 {
        let ms = atoms::elemental_measures(n).unwrap();
        let mut sorted = ms.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ms.len());
    }
}
