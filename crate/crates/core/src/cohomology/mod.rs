//! Second cohomology by enumeration and, for affine data, by linear algebra;
//! derivations, stabilizing automorphisms, principal derivations and `H^1`.

mod affine;
mod enumerate;

pub use affine::{h2_affine, AffineH2};
pub use enumerate::{all_actions, enumerate_h2, ActionScope, CohomologyClass};

use std::collections::BTreeSet;

use crate::algebra::{is_homomorphism, Algebra};
use crate::cocycle::{maps_vanishing_at_zero, semidirect, twist, Action, Cocycle, Datum, ExtensionRecord};
use crate::error::{Error, Result};
use crate::modcore::{gcd, hom_enumerate, smith_form, solve_mod};

/// Default nesting bound for the principal derivation search.
pub const DEFAULT_DEPTH: usize = 3;

/// Every derivation `h: Q -> I`: the maps whose coboundary relative to
/// `action` vanishes, in lexicographic order.
pub fn derivations(d: &Datum, action: &Action) -> Result<Vec<Vec<usize>>> {
    let base = Cocycle::with_action(d, action.clone());
    base.validate(d)?;
    let mut out: Vec<Vec<usize>> = hom_enumerate(d.q.module(), d.i.module())
        .into_iter()
        .map(|h| h.table())
        .filter(|h| twist(d, &base, h) == base)
        .collect();
    out.sort();
    let set: BTreeSet<&Vec<usize>> = out.iter().collect();
    for a in &out {
        for b in &out {
            let s: Vec<usize> = a.iter().zip(b).map(|(&x, &y)| d.i.add(x, y)).collect();
            if !set.contains(&s) {
                return Err(Error::Inconsistency("derivations are not closed under addition".into()));
            }
        }
    }
    Ok(out)
}

/// Stabilizing automorphisms of an extension paired with their derivations
/// `gamma(m) = m - iota(d(pi(m)))`.
#[derive(Clone, Debug)]
pub struct Stabilizer {
    pub automorphisms: Vec<Vec<usize>>,
    pub derivations: Vec<Vec<usize>>,
}

impl Stabilizer {
    pub fn len(&self) -> usize {
        self.automorphisms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.automorphisms.is_empty()
    }
}

pub fn stab_automorphisms(e: &ExtensionRecord, budget: u128) -> Result<Stabilizer> {
    let m = &e.m;
    let d = e.datum();
    let mut automorphisms = Vec::new();
    let mut ders = Vec::new();
    for h in maps_vanishing_at_zero(d.nq(), d.ni(), budget)? {
        let gamma: Vec<usize> = (0..m.size()).map(|y| m.sub(y, e.iota[h[e.pi[y]]])).collect();
        if is_homomorphism(m, m, &gamma) {
            automorphisms.push(gamma);
            ders.push(h);
        }
    }
    let action = crate::cocycle::extract_cocycle(e).action;
    if derivations(&d, &action)? != ders {
        return Err(Error::Inconsistency("stabilizing automorphisms do not match the derivations".into()));
    }
    let index: std::collections::HashMap<&Vec<usize>, usize> = ders.iter().enumerate().map(|(k, h)| (h, k)).collect();
    for (g1, d1) in automorphisms.iter().zip(&ders) {
        for (g2, d2) in automorphisms.iter().zip(&ders) {
            let comp: Vec<usize> = g2.iter().map(|&y| g1[y]).collect();
            let swapped: Vec<usize> = g1.iter().map(|&y| g2[y]).collect();
            let sum: Vec<usize> = d1.iter().zip(d2).map(|(&a, &b)| d.i.add(a, b)).collect();
            let ok = comp == swapped && index.get(&sum).is_some_and(|&k| automorphisms[k] == comp);
            if !ok {
                return Err(Error::Inconsistency("composition of stabilizing automorphisms is not addition of derivations".into()));
            }
        }
    }
    Ok(Stabilizer { automorphisms, derivations: ders })
}

/// Principal derivations with a flag telling whether the polynomial closure
/// stabilized within the nesting bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrincipalDerivations {
    pub elements: Vec<Vec<usize>>,
    pub complete: bool,
}

/// Vectors over `Z/m` encoding pairs of unary polynomial functions on a
/// finite algebra; each coordinate of order `e` is embedded by `m/e`.
struct PolyPairs<'a> {
    alg: &'a Algebra,
    m: u64,
    weights: Vec<u64>,
}

impl PolyPairs<'_> {
    fn width(&self) -> usize {
        2 * self.alg.size() * self.weights.len()
    }

    fn encode(&self, p: &[usize], q: &[usize]) -> Vec<u64> {
        let module = self.alg.module();
        let mut out = Vec::with_capacity(self.width());
        for &y in p.iter().chain(q) {
            for (c, w) in module.coords(y).into_iter().zip(&self.weights) {
                out.push(c * w % self.m);
            }
        }
        out
    }

    fn decode(&self, v: &[u64]) -> (Vec<usize>, Vec<usize>) {
        let r = self.weights.len();
        let n = self.alg.size();
        let vals: Vec<usize> = v
            .chunks(r.max(1))
            .take(2 * n)
            .map(|c| {
                let coords: Vec<u64> = c.iter().zip(&self.weights).map(|(&z, &w)| z / w).collect();
                self.alg.module().index(&coords)
            })
            .collect();
        if r == 0 {
            return (vec![0; n], vec![0; n]);
        }
        (vals[..n].to_vec(), vals[n..].to_vec())
    }

    /// A basis of the row span together with the order of the span.
    fn reduce(&self, rows: &[Vec<u64>]) -> (Vec<Vec<u64>>, u128) {
        let cols = self.width();
        if rows.is_empty() || cols == 0 {
            return (Vec::new(), 1);
        }
        let s = smith_form(rows, cols, self.m);
        let mut basis = Vec::new();
        let mut order = 1u128;
        for (i, &di) in s.d.iter().enumerate() {
            let g = gcd(di % self.m, self.m);
            if g == self.m {
                continue;
            }
            order *= (self.m / g) as u128;
            basis.push(s.v_inv[i].iter().map(|&x| x * (di % self.m) % self.m).collect());
        }
        (basis, order)
    }

    fn contains(&self, basis: &[Vec<u64>], v: &[u64]) -> Result<bool> {
        if v.iter().all(|&x| x == 0) {
            return Ok(true);
        }
        if basis.is_empty() {
            return Ok(false);
        }
        let a: Vec<Vec<u64>> = (0..v.len()).map(|row| basis.iter().map(|b| b[row]).collect()).collect();
        Ok(solve_mod(&a, basis.len(), v, self.m)?.is_some())
    }
}

/// Principal derivations of `(Q, I, action)`: derivations whose stabilizing
/// automorphism of `I x Q` is a polynomial `t(x, c)` with constants from `I`
/// and `t(x, d) = x` for some other constants `d` from `I`.
pub fn principal_derivations(d: &Datum, action: &Action, depth: usize, budget: u128) -> Result<PrincipalDerivations> {
    let zero = vec![vec![0; d.nq()]];
    if action.is_trivial() {
        return Ok(PrincipalDerivations { elements: zero, complete: true });
    }
    let ders = derivations(d, action)?;
    let sd = semidirect(d, &Cocycle::with_action(d, action.clone()))?;
    let (alg, to_alg) = sd.extension(d).map(|(e, map)| (e.m, map))?;
    let mut from_alg = vec![0; alg.size()];
    for (p, &y) in to_alg.iter().enumerate() {
        from_alg[y] = p;
    }
    let m = alg.modulus();
    let weights = alg.module().factors().iter().map(|&e| m / e).collect();
    let pp = PolyPairs { alg: &alg, m, weights };
    let n = alg.size();
    let id: Vec<usize> = (0..n).collect();
    let mut rows = vec![pp.encode(&id, &id)];
    for j in 0..d.i.module().rank() {
        let c = to_alg[sd.pair(d.i.module().generator(j), 0)];
        rows.push(pp.encode(&vec![c; n], &vec![0; n]));
        rows.push(pp.encode(&vec![0; n], &vec![c; n]));
    }
    let (mut basis, mut order) = pp.reduce(&rows);
    let mut complete = false;
    for _ in 0..depth {
        let funcs: Vec<(Vec<usize>, Vec<usize>)> = basis.iter().map(|b| pp.decode(b)).collect();
        let mut next = basis.clone();
        for (f, o) in d.sig().ops.iter().enumerate() {
            let count = (funcs.len() as u128).saturating_pow(o.arity as u32);
            if count > budget {
                return Err(Error::BudgetExceeded { bound: count, budget });
            }
            for tuple in crate::modcore::TupleIter::new(funcs.len(), o.arity) {
                let apply = |side: usize| -> Vec<usize> {
                    (0..n)
                        .map(|z| {
                            let args: Vec<usize> =
                                tuple.iter().map(|&k| if side == 0 { funcs[k].0[z] } else { funcs[k].1[z] }).collect();
                            alg.op(f, &args)
                        })
                        .collect()
                };
                next.push(pp.encode(&apply(0), &apply(1)));
            }
        }
        let (b2, o2) = pp.reduce(&next);
        basis = b2;
        if o2 == order {
            complete = true;
            break;
        }
        order = o2;
    }
    let mut elements = Vec::new();
    for h in ders {
        let u: Vec<usize> = (0..n)
            .map(|z| {
                let (_, x) = sd.unpair(from_alg[z]);
                to_alg[sd.pair(d.i.neg(h[x]), 0)]
            })
            .collect();
        if pp.contains(&basis, &pp.encode(&u, &vec![0; n]))? {
            elements.push(h);
        }
    }
    Ok(PrincipalDerivations { elements, complete })
}

/// `Der / PDer` with lexicographically least coset representatives.
#[derive(Clone, Debug)]
pub struct FirstCohomology {
    pub derivations: Vec<Vec<usize>>,
    pub principal: PrincipalDerivations,
    pub representatives: Vec<Vec<usize>>,
}

impl FirstCohomology {
    pub fn order(&self) -> usize {
        self.representatives.len()
    }
}

pub fn h1(d: &Datum, action: &Action, depth: usize, budget: u128) -> Result<FirstCohomology> {
    let ders = derivations(d, action)?;
    let principal = principal_derivations(d, action, depth, budget)?;
    let mut covered = BTreeSet::new();
    let mut representatives = Vec::new();
    for h in &ders {
        if covered.contains(h) {
            continue;
        }
        representatives.push(h.clone());
        for p in &principal.elements {
            covered.insert(h.iter().zip(p).map(|(&a, &b)| d.i.add(a, b)).collect::<Vec<_>>());
        }
    }
    Ok(FirstCohomology { derivations: ders, principal, representatives })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::algebra::{commutator, Ideal};
    use crate::cocycle::DEFAULT_BUDGET;

    #[test]
    fn central_derivations() {
        let d = Datum::new(zf(2, vec![2]), zf(2, vec![2])).unwrap();
        assert_eq!(derivations(&d, &Action::trivial(&d)).unwrap(), vec![vec![0, 0], vec![0, 1]]);
        let d = Datum::new(z2_square(), zf(2, vec![2])).unwrap();
        assert_eq!(derivations(&d, &Action::trivial(&d)).unwrap(), vec![vec![0, 0]]);
    }

    #[test]
    fn central_derivations_kill_commutator() {
        let q = zf(4, vec![4, 2]);
        let i = zf(4, vec![2]);
        let d = Datum::new(q.clone(), i.clone()).unwrap();
        let whole = Ideal::whole(&q);
        let qq = commutator(&q, &whole, &whole).unwrap();
        let mut expected: Vec<Vec<usize>> = hom_enumerate(q.module(), i.module())
            .into_iter()
            .map(|h| h.table())
            .filter(|h| qq.elements().iter().all(|&x| h[x] == 0))
            .collect();
        expected.sort();
        assert_eq!(derivations(&d, &Action::trivial(&d)).unwrap(), expected);
    }

    #[test]
    fn stabilizers_match_derivations() {
        let d = Datum::new(zf(2, vec![2]), zf(2, vec![2])).unwrap();
        let t = crate::cocycle::Cocycle::zero(&d);
        let (e, _) = semidirect(&d, &t).unwrap().extension(&d).unwrap();
        assert_eq!(stab_automorphisms(&e, DEFAULT_BUDGET).unwrap().len(), 2);
        let mut t = t;
        t.ops[0][3] = 1;
        let (e, _) = semidirect(&d, &t).unwrap().extension(&d).unwrap();
        let s = stab_automorphisms(&e, DEFAULT_BUDGET).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.automorphisms.contains(&(0..4).collect()));
    }

    #[test]
    fn principal_central_is_zero() {
        let d = Datum::new(zf(2, vec![2]), zf(2, vec![2])).unwrap();
        let h = h1(&d, &Action::trivial(&d), DEFAULT_DEPTH, DEFAULT_BUDGET).unwrap();
        assert_eq!(h.principal.elements, vec![vec![0, 0]]);
        assert_eq!(h.order(), 2);
        let d = Datum::new(z2_square(), zf(2, vec![2])).unwrap();
        assert_eq!(h1(&d, &Action::trivial(&d), DEFAULT_DEPTH, DEFAULT_BUDGET).unwrap().order(), 1);
    }

    #[test]
    fn principal_with_action() {
        let (d, a) = right_action();
        let ders = derivations(&d, &a).unwrap();
        let p = principal_derivations(&d, &a, DEFAULT_DEPTH, DEFAULT_BUDGET).unwrap();
        assert!(p.complete);
        // d(x) = x * c with c = 1 is the identity map Z_2 -> Z_2
        assert!(p.elements.iter().all(|h| ders.contains(h)));
        let h = h1(&d, &a, DEFAULT_DEPTH, DEFAULT_BUDGET).unwrap();
        assert_eq!(h.order() * h.principal.elements.len(), h.derivations.len());
    }

    #[test]
    fn two_sided_action_is_principal() {
        let (d, mut a) = right_action();
        a.set_parts(0, 1, &[1], &[1], 1);
        assert_eq!(derivations(&d, &a).unwrap(), vec![vec![0, 0], vec![0, 1]]);
        let p = principal_derivations(&d, &a, DEFAULT_DEPTH, DEFAULT_BUDGET).unwrap();
        assert_eq!(p.elements, vec![vec![0, 0], vec![0, 1]]);
        assert_eq!(h1(&d, &a, DEFAULT_DEPTH, DEFAULT_BUDGET).unwrap().order(), 1);
    }
}
