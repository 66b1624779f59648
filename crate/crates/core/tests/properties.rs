use mlex::algebra::{commutator, ideal_generated, is_homomorphism, quotient, Algebra, Ideal, Signature};
use mlex::cli::format::{load_str, AlgebraDef, Workspace};
use mlex::cocycle::{
    coboundary, equivalent, extract_cocycle, is_compatible, psi, realizes, semidirect, twist, Action, Cocycle, Datum,
    DEFAULT_BUDGET,
};
use mlex::cohomology::derivations;
use mlex::expander::{random_term, soundness_failure};
use mlex::modcore::ZmModule;
use mlex::termlang::Variety;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sig() -> Signature {
    Signature::new(&[("f", 2), ("g", 1)]).unwrap()
}

/// A random algebra over `Z/m` with signature `f/2, g/1`, of rank at most two
/// over `Z/2` and rank one otherwise.
fn algebra(m: u64) -> impl Strategy<Value = Algebra> {
    (1usize..=if m == 2 { 2 } else { 1 }).prop_flat_map(move |k| {
        let n = (m as usize).pow(k as u32);
        (prop::collection::vec(0..n, k * k), prop::collection::vec(0..n, k)).prop_map(move |(f, g)| {
            Algebra::new(ZmModule::new(m, vec![m; k]).unwrap(), sig(), vec![f, g]).unwrap()
        })
    })
}

fn datum() -> impl Strategy<Value = Datum> {
    prop_oneof![Just(2u64), Just(3u64)].prop_flat_map(|m| (algebra(m), algebra(m)).prop_map(|(q, i)| Datum::new(q, i).unwrap()))
}

/// A datum with a map `h: Q -> I` fixing zero.
fn datum_and_map() -> impl Strategy<Value = (Datum, Vec<usize>)> {
    datum().prop_flat_map(with_map)
}

/// As `datum_and_map` with the operations of `I` forced to zero.
fn abelian_datum_and_map() -> impl Strategy<Value = (Datum, Vec<usize>)> {
    datum()
        .prop_map(|d| {
            let i = Algebra::with_zero_ops(d.i.module().clone(), d.sig().clone());
            Datum::new(d.q, i).unwrap()
        })
        .prop_flat_map(with_map)
}

fn with_map(d: Datum) -> impl Strategy<Value = (Datum, Vec<usize>)> {
    let (nq, ni) = (d.nq(), d.ni());
    (Just(d), prop::collection::vec(0..ni, nq - 1)).prop_map(|(d, tail)| {
        let mut h = vec![0];
        h.extend(tail);
        (d, h)
    })
}

fn mlf(d: &Datum) -> Variety {
    Variety::mlf(d.sig().clone(), d.modulus())
}

fn subset(a: &Algebra, picks: &[usize]) -> Vec<usize> {
    picks.iter().map(|&p| p % a.size()).collect()
}

fn is_ideal(a: &Algebra, i: &Ideal) -> bool {
    let els = i.elements();
    let closed = els.iter().all(|&x| els.iter().all(|&y| i.contains(a.add(x, y))))
        && (0..a.modulus()).all(|r| els.iter().all(|&x| i.contains(a.scale(r, x))));
    let absorbs = els.iter().all(|&x| {
        (0..a.size()).all(|y| i.contains(a.op(0, &[x, y])) && i.contains(a.op(0, &[y, x]))) && i.contains(a.op(1, &[x]))
    });
    closed && absorbs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn coboundaries_are_compatible_and_trivial((d, h) in abelian_datum_and_map()) {
        let action = Action::trivial(&d);
        let g = coboundary(&d, &h, &action);
        prop_assert!(g.validate(&d).is_ok());
        prop_assert!(is_compatible(&d, &g, &mlf(&d)).unwrap());
        let zero = Cocycle::zero(&d);
        prop_assert!(equivalent(&d, &g, &zero, DEFAULT_BUDGET).unwrap().is_some());
        let sd = semidirect(&d, &g).unwrap();
        prop_assert!(sd.is_valid());
        let (e, _) = sd.extension(&d).unwrap();
        prop_assert!(realizes(&e, &g));
    }

    #[test]
    fn twisting_preserves_the_class((d, h) in datum_and_map()) {
        let zero = Cocycle::zero(&d);
        let t = twist(&d, &zero, &h);
        prop_assert!(is_compatible(&d, &t, &mlf(&d)).unwrap());
        prop_assert!(equivalent(&d, &t, &zero, DEFAULT_BUDGET).unwrap().is_some());
    }

    #[test]
    fn direct_product_round_trips(d in datum()) {
        let zero = Cocycle::zero(&d);
        let (e, _) = semidirect(&d, &zero).unwrap().extension(&d).unwrap();
        prop_assert_eq!(extract_cocycle(&e), zero);
        prop_assert!(psi(&e).unwrap().1);
    }

    #[test]
    fn derivations_form_a_group(d in datum()) {
        let ders = derivations(&d, &Action::trivial(&d)).unwrap();
        prop_assert!(ders.contains(&vec![0; d.nq()]));
        for a in &ders {
            for b in &ders {
                let s: Vec<usize> = a.iter().zip(b).map(|(&x, &y)| d.i.add(x, y)).collect();
                prop_assert!(ders.contains(&s));
            }
        }
    }

    #[test]
    fn generated_ideals_and_commutators(
        a in prop_oneof![algebra(2), algebra(3)],
        s in prop::collection::vec(0usize..81, 0..3),
        t in prop::collection::vec(0usize..81, 0..3),
    ) {
        let i = ideal_generated(&a, &subset(&a, &s));
        let j = ideal_generated(&a, &subset(&a, &t));
        prop_assert!(is_ideal(&a, &i) && is_ideal(&a, &j));
        prop_assert!(subset(&a, &s).iter().all(|&x| i.contains(x)));
        let c = commutator(&a, &i, &j).unwrap();
        prop_assert!(is_ideal(&a, &c));
        prop_assert!(c.elements().iter().all(|&x| i.contains(x) && j.contains(x)));
    }

    #[test]
    fn quotient_map_is_a_surjective_homomorphism(
        a in prop_oneof![algebra(2), algebra(3)],
        s in prop::collection::vec(0usize..81, 0..3),
    ) {
        let i = ideal_generated(&a, &subset(&a, &s));
        let (q, map) = quotient(&a, &i).unwrap();
        prop_assert!(is_homomorphism(&a, &q, &map));
        prop_assert_eq!(q.size() * i.len(), a.size());
        prop_assert!((0..a.size()).all(|x| (map[x] == 0) == i.contains(x)));
    }

    #[test]
    fn saved_workspaces_reload_identically(a in prop_oneof![algebra(2), algebra(3)]) {
        let mut ws = Workspace::new(a.modulus());
        ws.modules.insert("V".into(), a.module().clone());
        ws.algebras.insert("A".into(), AlgebraDef { module: "V".into(), algebra: a.clone() });
        let text = ws.save();
        let back = load_str("<prop>", &text).unwrap();
        prop_assert_eq!(back.save(), text);
        prop_assert_eq!(back.algebra("A").unwrap(), &a);
    }

    #[test]
    fn expansion_is_sound((d, h) in datum_and_map(), seed in any::<u64>()) {
        let t = twist(&d, &Cocycle::zero(&d), &h);
        let vars: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let term = random_term(&mut rng, d.sig(), &vars, 2, d.modulus());
        prop_assert_eq!(soundness_failure(&d, &t, &term, &vars, &[]).unwrap(), None);
    }
}
