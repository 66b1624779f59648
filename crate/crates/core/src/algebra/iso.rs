//! Homomorphism checks and brute-force isomorphism search.

use super::{commutator, Algebra, Ideal, Tables};
use crate::modcore::{LinMap, TupleIter};

/// Checks additivity, scalar compatibility and every operation exhaustively.
pub fn is_homomorphism(a: &Algebra, b: &Algebra, map: &[usize]) -> bool {
    a.signature() == b.signature() && tables_homomorphism(a.tables(), b.tables(), map)
}

/// Homomorphism test on raw tables sharing a signature.
pub fn tables_homomorphism(a: &Tables, b: &Tables, map: &[usize]) -> bool {
    if map.len() != a.n || a.arities != b.arities || map.iter().any(|&x| x >= b.n) {
        return false;
    }
    if a.n > 0 && map[0] != 0 {
        return false;
    }
    for x in 0..a.n {
        for y in 0..a.n {
            if map[a.add(x, y)] != b.add(map[x], map[y]) {
                return false;
            }
        }
        for r in 0..a.modulus {
            if map[a.scale(r, x)] != b.scale(r, map[x]) {
                return false;
            }
        }
    }
    for (f, &ar) in a.arities.iter().enumerate() {
        for args in TupleIter::new(a.n, ar) {
            let imgs: Vec<usize> = args.iter().map(|&x| map[x]).collect();
            if map[a.apply(f, &args)] != b.apply(f, &imgs) {
                return false;
            }
        }
    }
    true
}

pub fn is_homomorphism_linmap(a: &Algebra, b: &Algebra, phi: &LinMap) -> bool {
    phi.source == *a.module() && phi.target == *b.module() && is_homomorphism(a, b, &phi.table())
}

/// Per-element invariants preserved by isomorphisms.
fn profiles(a: &Algebra) -> Vec<Vec<u64>> {
    let whole = Ideal::whole(a);
    let derived = commutator(a, &whole, &whole).expect("same parent");
    (0..a.size())
        .map(|x| {
            let mut p = vec![a.module().order_of(x), derived.contains(x) as u64];
            for (f, op) in a.signature().ops.iter().enumerate() {
                for slot in 0..op.arity {
                    let mut zeros = 0;
                    for mut rest in TupleIter::new(a.size(), op.arity - 1) {
                        rest.insert(slot, x);
                        if a.op(f, &rest) == 0 {
                            zeros += 1;
                        }
                    }
                    p.push(zeros);
                }
            }
            p
        })
        .collect()
}

/// Searches generator images for an isomorphism `A -> B`; the first hit in
/// lexicographic order of image tuples is returned as an index map.
pub fn find_isomorphism(a: &Algebra, b: &Algebra) -> Option<Vec<usize>> {
    if a.size() != b.size() || a.signature() != b.signature() || a.modulus() != b.modulus() {
        return None;
    }
    let pa = profiles(a);
    let pb = profiles(b);
    let mut sa = pa.clone();
    let mut sb = pb.clone();
    sa.sort();
    sb.sort();
    if sa != sb {
        return None;
    }
    let ma = a.module();
    let gens: Vec<usize> = (0..ma.rank()).map(|i| ma.generator(i)).collect();
    let candidates: Vec<Vec<usize>> =
        gens.iter().map(|&g| (0..b.size()).filter(|&y| pb[y] == pa[g]).collect()).collect();
    let mut chosen = Vec::with_capacity(gens.len());
    search(a, b, &candidates, &mut chosen)
}

fn span_size(b: &Algebra, imgs: &[usize]) -> usize {
    let mut seen = vec![false; b.size()];
    seen[0] = true;
    let mut list = vec![0];
    for &g in imgs {
        let mut next = Vec::new();
        for &s in &list {
            let mut acc = s;
            loop {
                next.push(acc);
                acc = b.add(acc, g);
                if acc == s {
                    break;
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        for &e in &next {
            seen[e] = true;
        }
        list = next;
    }
    list.len()
}

fn search(a: &Algebra, b: &Algebra, cands: &[Vec<usize>], chosen: &mut Vec<usize>) -> Option<Vec<usize>> {
    let ma = a.module();
    let depth = chosen.len();
    if depth == cands.len() {
        let phi = LinMap { source: ma.clone(), target: ma.clone(), images: chosen.clone() };
        let map: Vec<usize> = (0..a.size())
            .map(|x| {
                let mut acc = 0;
                for (c, &img) in ma.coords(x).iter().zip(&phi.images) {
                    acc = b.add(acc, b.scale(*c, img));
                }
                acc
            })
            .collect();
        let mut hit = vec![false; b.size()];
        for &y in &map {
            if hit[y] {
                return None;
            }
            hit[y] = true;
        }
        return is_homomorphism(a, b, &map).then_some(map);
    }
    let expected: usize = ma.factors()[..=depth].iter().map(|&d| d as usize).product();
    for &y in &cands[depth] {
        chosen.push(y);
        if span_size(b, chosen) == expected {
            if let Some(m) = search(a, b, cands, chosen) {
                return Some(m);
            }
        }
        chosen.pop();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::f2;
    use super::super::Signature;
    use super::*;
    use crate::modcore::ZmModule;

    #[test]
    fn identity_and_swap() {
        let a = f2();
        let id: Vec<usize> = (0..4).collect();
        assert!(is_homomorphism(&a, &a, &id));
        let m = a.module();
        let swap = LinMap::new(m.clone(), m.clone(), vec![m.generator(1), m.generator(0)]).unwrap();
        assert!(!is_homomorphism_linmap(&a, &a, &swap));
    }

    #[test]
    fn z4_vs_klein() {
        let sig = Signature::default();
        let z4 = Algebra::with_zero_ops(ZmModule::new(4, vec![4]).unwrap(), sig.clone());
        let v4 = Algebra::with_zero_ops(ZmModule::new(4, vec![2, 2]).unwrap(), sig);
        assert!(find_isomorphism(&z4, &v4).is_none());
        assert!(find_isomorphism(&v4, &v4).is_some());
    }

    #[test]
    fn f2_not_isomorphic_to_zero_product() {
        let a = f2();
        let z = Algebra::with_zero_ops(a.module().clone(), a.signature().clone());
        assert!(find_isomorphism(&a, &z).is_none());
        assert!(find_isomorphism(&a, &a).is_some());
    }
}
