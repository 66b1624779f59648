use super::*;
use crate::algebra::fixtures::f2;
use crate::algebra::{quotient, Ideal};
use crate::cocycle::fixtures::{f1, f2_cocycle};
use crate::cocycle::DEFAULT_BUDGET;
use crate::cohomology::fixtures::{right_action, zf};

fn f2_extension() -> ExtensionRecord {
    let m = f2();
    let e1 = m.module().generator(0);
    let k = Ideal::from_set(&m, &[e1]).unwrap();
    let (q, pi) = quotient(&m, &k).unwrap();
    let i = zf(2, vec![2]);
    ExtensionRecord::new(m, q, i, pi, vec![0, e1]).unwrap()
}

#[test]
fn derivations_form_a_lie_algebra() {
    let m = f2();
    let der = derivations_of(&m).unwrap();
    assert!(der.elements.iter().all(|h| is_derivation(&m, h)));
    assert!(der.is_lie(&m));
    let all = hom_enumerate(m.module(), m.module()).into_iter().filter(|h| is_derivation(&m, &h.table())).count();
    assert_eq!(der.len(), all);
}

#[test]
fn identity_pair_is_obstructed_on_f2() {
    let d = f1();
    let t = f2_cocycle();
    let id = vec![0, 1];
    assert!(compatible_pairs(&d, &t.action).unwrap().contains(&(id.clone(), id.clone())));
    let msg = lift_pair(&d, &t, &id, &id).unwrap().unwrap_err();
    assert!(msg.starts_with("C3"), "{msg}");
    let w = wells_map(&d, &t, &id, &id, DEFAULT_BUDGET).unwrap();
    assert!(!w.is_zero());
    assert_eq!(w.cocycle.tf(0, &[1, 1]), 1);
}

#[test]
fn psi_of_nilpotent_derivation_vanishes() {
    let e = f2_extension();
    let (e1, e2) = (e.m.module().generator(0), e.m.module().generator(1));
    let mut phi = vec![0; 4];
    phi[e2] = e1;
    phi[e.m.add(e1, e2)] = e1;
    assert!(is_derivation(&e.m, &phi));
    let (alpha, beta) = psi_pair(&phi, &e).unwrap();
    assert_eq!(alpha, vec![0, 0]);
    assert_eq!(beta, vec![0, 0]);
}

#[test]
fn lifted_pairs_are_derivations() {
    let (d, a) = right_action();
    let t = Cocycle::with_action(&d, a);
    let sd = semidirect(&d, &t).unwrap();
    let (e, map) = sd.extension(&d).unwrap();
    for (alpha, beta) in compatible_pairs(&d, &t.action).unwrap() {
        if let Ok(phi) = lift_pair(&d, &t, &alpha, &beta).unwrap() {
            let mut on_m = vec![0; e.m.size()];
            for p in 0..phi.len() {
                on_m[map[p]] = map[phi[p]];
            }
            assert!(is_derivation(&e.m, &on_m));
        }
    }
}

#[test]
fn lift_requires_group_trivial() {
    let d = crate::cocycle::Datum::new(zf(4, vec![2]), zf(4, vec![2])).unwrap();
    let mut t = Cocycle::zero(&d);
    t.plus[3] = 1;
    t.derive_scalar(&d);
    assert!(matches!(lift_pair(&d, &t, &[0, 1], &[0, 1]), Err(Error::NotGroupTrivial)));
    let (t0, h) = group_trivialize(&d, &Cocycle::zero(&d), DEFAULT_BUDGET).unwrap();
    assert!(t0.plus_vanishes() && h == vec![0, 0]);
}

#[test]
fn wells_sequence_on_f2() {
    let rep = verify_wells(&f2_extension(), DEFAULT_BUDGET).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert_eq!(rep.compatible_pairs, 4);
    assert_eq!(rep.kernel_of_wells, 2);
}

#[test]
fn wells_sequence_with_action() {
    let (d, a) = right_action();
    let t = Cocycle::with_action(&d, a);
    let (e, _) = semidirect(&d, &t).unwrap().extension(&d).unwrap();
    let rep = verify_wells(&e, DEFAULT_BUDGET).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert_eq!(rep.kernel_of_wells, rep.compatible_pairs);
}

#[test]
fn pair_twist_respects_brackets() {
    let d = crate::cocycle::Datum::new(zf(2, vec![2, 2]), zf(2, vec![2])).unwrap();
    let mut t = Cocycle::zero(&d);
    let qm = d.q.module().clone();
    for x in 0..4 {
        for y in 0..4 {
            t.ops[0][tuple_index_of(&d, &[x, y])] = (qm.coords(x)[0] * qm.coords(y)[1] % 2) as usize;
        }
    }
    let pairs = compatible_pairs(&d, &t.action).unwrap();
    for p in &pairs {
        for q in &pairs {
            let br = (bracket_maps(&d.i, &p.0, &q.0), bracket_maps(&d.q, &p.1, &q.1));
            let lhs = pair_twist(&d, &t, &br.0, &br.1);
            let pq = pair_twist(&d, &pair_twist(&d, &t, &q.0, &q.1), &p.0, &p.1);
            let qp = pair_twist(&d, &pair_twist(&d, &t, &p.0, &p.1), &q.0, &q.1);
            assert_eq!(lhs.factor_key(), pq.sub(&qp, &d.i).factor_key());
        }
    }
}

fn tuple_index_of(d: &crate::cocycle::Datum, xs: &[usize]) -> usize {
    crate::modcore::tuple_index(d.nq(), xs)
}
