//! Coboundaries, the change-of-lifting twist, equivalence of cocycles and the
//! morphism predicate between cocycles of different data.

use super::{proper_subsets, semidirect, split_mask, Action, Cocycle, Datum};
use crate::algebra::{is_homomorphism, tables_homomorphism};
use crate::error::{Error, Result};
use crate::modcore::TupleIter;

fn signed(i: &crate::algebra::Algebra, exponent: usize, v: usize) -> usize {
    if exponent.is_multiple_of(2) {
        v
    } else {
        i.neg(v)
    }
}

/// The 2-coboundary witnessed by `h: Q -> I` (with `h(0) = 0`) relative to `action`.
pub fn coboundary(d: &Datum, h: &[usize], action: &Action) -> Cocycle {
    let (q, i) = (&d.q, &d.i);
    let nq = d.nq();
    let mut g = Cocycle::zero(d);
    for x in 0..nq {
        for y in 0..nq {
            g.plus[x * nq + y] = i.sub(i.add(h[x], h[y]), h[q.add(x, y)]);
        }
    }
    for r in 0..d.modulus() {
        for x in 0..nq {
            g.scalar[r as usize * nq + x] = i.sub(i.scale(r, h[x]), h[q.scale(r, x)]);
        }
    }
    for (f, o) in d.sig().ops.iter().enumerate() {
        let n = o.arity;
        for (k, xs) in TupleIter::new(nq, n).enumerate() {
            let hx: Vec<usize> = xs.iter().map(|&x| h[x]).collect();
            let mut acc = 0;
            for mask in proper_subsets(n) {
                acc = i.add(acc, signed(i, 1 + mask.count_ones() as usize, action.get(f, mask, &xs, &hx)));
            }
            acc = i.add(acc, signed(i, 1 + n, i.op(f, &hx)));
            g.ops[f][k] = i.sub(acc, h[q.op(f, &xs)]);
        }
    }
    for (f, mask) in action.symbols() {
        *g.action.table_mut(f, mask) = coboundary_action_table(d, h, action, f, mask);
    }
    g
}

/// The action part `g(f,s)` of the coboundary of `h`.
fn coboundary_action_table(d: &Datum, h: &[usize], action: &Action, f: usize, mask: u32) -> Vec<usize> {
    let i = &d.i;
    let n = d.sig().arity(f);
    let (inside, outside) = split_mask(mask, n);
    let ks = inside.len();
    let mut out = Vec::with_capacity(action.table(f, mask).len());
    for cq in TupleIter::new(d.nq(), outside.len()) {
        let mut xs = vec![0; n];
        for (k, &slot) in outside.iter().enumerate() {
            xs[slot] = cq[k];
        }
        for sa in TupleIter::new(d.ni(), ks) {
            let mut b: Vec<usize> = xs.iter().map(|&x| h[x]).collect();
            for (k, &slot) in inside.iter().enumerate() {
                b[slot] = sa[k];
            }
            let mut acc = 0;
            for r in proper_subsets(n) {
                if r != mask && r & mask == mask {
                    let e = 1 + r.count_ones() as usize - ks;
                    acc = i.add(acc, signed(i, e, action.get(f, r, &xs, &b)));
                }
            }
            acc = i.add(acc, signed(i, 1 + n - ks, i.op(f, &b)));
            out.push(acc);
        }
    }
    out
}

/// The cocycle `T'` for which `<a,x> -> <a - h(x), x>` is an isomorphism
/// `I x_T Q -> I x_T' Q`. Its action is solved from the largest subsets down.
pub fn twist(d: &Datum, t: &Cocycle, h: &[usize]) -> Cocycle {
    let mut action = t.action.clone();
    let mut symbols = t.action.symbols();
    symbols.sort_by_key(|&(f, mask)| (std::cmp::Reverse(mask.count_ones()), f, mask));
    for (f, mask) in symbols {
        let g = coboundary_action_table(d, h, &action, f, mask);
        let base = t.action.table(f, mask);
        *action.table_mut(f, mask) = base.iter().zip(&g).map(|(&a, &b)| d.i.add(a, b)).collect();
    }
    let g = coboundary(d, h, &action);
    let mut out = t.add_factor_sets(&g, &d.i);
    out.action = action;
    out
}

/// Every `h: Q -> I` with `h(0) = 0`, the image of `1` most significant.
pub fn maps_vanishing_at_zero(nq: usize, ni: usize, budget: u128) -> Result<impl Iterator<Item = Vec<usize>>> {
    let bound = (ni as u128).checked_pow(nq.saturating_sub(1) as u32).unwrap_or(u128::MAX);
    if bound > budget {
        return Err(Error::BudgetExceeded { bound, budget });
    }
    let len = nq.saturating_sub(1);
    Ok(TupleIter::new(ni, len).map(move |rest| {
        let mut h = Vec::with_capacity(rest.len() + 1);
        if nq > 0 {
            h.push(0);
        }
        h.extend(rest);
        h
    }))
}

/// Searches for `h` making `<a,x> -> <a - h(x), x>` an isomorphism
/// `I x_T Q -> I x_T' Q`; returns the first witness.
pub fn equivalent(d: &Datum, t: &Cocycle, t2: &Cocycle, budget: u128) -> Result<Option<Vec<usize>>> {
    let s1 = semidirect(d, t)?;
    let s2 = semidirect(d, t2)?;
    for h in maps_vanishing_at_zero(d.nq(), d.ni(), budget)? {
        let map: Vec<usize> = (0..s1.raw.size())
            .map(|p| {
                let (a, x) = s1.unpair(p);
                s2.pair(d.i.sub(a, h[x]), x)
            })
            .collect();
        if tables_homomorphism(s1.tables(), s2.tables(), &map) {
            return Ok(Some(h));
        }
    }
    Ok(None)
}

/// Equivalence decided by comparing `T'` with every twist of `T`.
pub fn equivalent_by_iso(d: &Datum, t: &Cocycle, t2: &Cocycle, budget: u128) -> Result<Option<Vec<usize>>> {
    for h in maps_vanishing_at_zero(d.nq(), d.ni(), budget)? {
        if twist(d, t, &h) == *t2 {
            return Ok(Some(h));
        }
    }
    Ok(None)
}

/// Which reading of the action clause of the morphism conditions to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MorphismReading {
    /// `alpha` applied to the `Q`-arguments by coordinates; needs `Q`, `I` and
    /// `P`, `J` to share their modules.
    Printed,
    /// `beta` applied to the `Q`-arguments.
    Emended,
}

/// Checks the morphism conditions for `(alpha, h, beta): T -> T'` where `T` is
/// a cocycle of `(Q, I)` and `T'` of `(P, J)`. Returns the first failing clause.
pub fn is_h2_morphism(
    src: &Datum,
    t: &Cocycle,
    dst: &Datum,
    t2: &Cocycle,
    alpha: &[usize],
    h: &[usize],
    beta: &[usize],
    reading: MorphismReading,
) -> Result<Option<String>> {
    let (q, i, p, j) = (&src.q, &src.i, &dst.q, &dst.i);
    if !is_homomorphism(i, j, alpha) {
        return Err(Error::Validation("alpha is not a homomorphism I -> J".into()));
    }
    if !is_homomorphism(q, p, beta) {
        return Err(Error::Validation("beta is not a homomorphism Q -> P".into()));
    }
    if h.len() != q.size() || h.iter().any(|&v| v >= j.size()) || (q.size() > 0 && h[0] != 0) {
        return Err(Error::Validation("h must map Q to J and fix zero".into()));
    }
    if reading == MorphismReading::Printed && (q.module() != i.module() || p.module() != j.module()) {
        return Err(Error::Unsupported(
            "the printed reading applies alpha to Q-arguments and needs Q, I and P, J to share modules".into(),
        ));
    }
    let nq = q.size();
    for x in 0..nq {
        for y in 0..nq {
            let rhs = j.add(t2.tplus(beta[x], beta[y]), j.sub(j.add(h[x], h[y]), h[q.add(x, y)]));
            if alpha[t.tplus(x, y)] != rhs {
                return Ok(Some(format!("E1 at ({x},{y})")));
            }
        }
    }
    for r in 0..q.modulus() {
        for x in 0..nq {
            let rhs = j.add(t2.tr(r, beta[x]), j.sub(j.scale(r, h[x]), h[q.scale(r, x)]));
            if alpha[t.tr(r, x)] != rhs {
                return Ok(Some(format!("E2 at r={r}, x={x}")));
            }
        }
    }
    for (f, mask) in t.action.symbols() {
        let n = src.sig().arity(f);
        for xs in TupleIter::new(nq, n) {
            let bx: Vec<usize> = xs.iter().map(|&x| beta[x]).collect();
            let qx: Vec<usize> = match reading {
                MorphismReading::Emended => bx.clone(),
                MorphismReading::Printed => xs.iter().map(|&x| alpha[x]).collect(),
            };
            let hx: Vec<usize> = xs.iter().map(|&x| h[x]).collect();
            let (inside, _) = split_mask(mask, n);
            for sa in TupleIter::new(i.size(), inside.len()) {
                let mut a = vec![0; n];
                let mut aa = vec![0; n];
                for (k, &slot) in inside.iter().enumerate() {
                    a[slot] = sa[k];
                    aa[slot] = alpha[sa[k]];
                }
                let lhs = alpha[t.action.get(f, mask, &xs, &a)];
                let mut rhs = t2.action.get(f, mask, &qx, &aa);
                let mut b = hx.clone();
                for &slot in &inside {
                    b[slot] = aa[slot];
                }
                for r in proper_subsets(n) {
                    if r != mask && r & mask == mask {
                        rhs = j.add(rhs, t2.action.get(f, r, &bx, &b));
                    }
                }
                rhs = j.add(rhs, j.op(f, &b));
                if lhs != rhs {
                    return Ok(Some(format!("E3 at a({},{})", src.sig().name(f), super::fmt_mask(mask, n))));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{extract_cocycle, DEFAULT_BUDGET};
    use super::*;

    #[test]
    fn zero_witness_gives_null_coboundary() {
        let d = f1();
        let g = coboundary(&d, &[0, 0], &Action::trivial(&d));
        assert_eq!(g, Cocycle::zero(&d));
    }

    #[test]
    fn f1_witness_example() {
        let d = f1();
        let g = coboundary(&d, &[0, 1], &Action::trivial(&d));
        assert_eq!(g.tf(0, &[1, 1]), 0);
        assert!(g.plus_vanishes());
    }

    #[test]
    fn f2_cocycle_not_equivalent_to_zero() {
        let d = f1();
        let t = f2_cocycle();
        assert_eq!(equivalent(&d, &t, &Cocycle::zero(&d), DEFAULT_BUDGET).unwrap(), None);
        assert_eq!(equivalent(&d, &t, &t, DEFAULT_BUDGET).unwrap(), Some(vec![0, 0]));
    }

    #[test]
    fn twist_matches_changed_lifting() {
        let d = f1();
        let mut t = f2_cocycle();
        t.action.set_parts(0, 1, &[1], &[1], 1);
        let sd = semidirect(&d, &t).unwrap();
        let (e, map) = sd.extension(&d).unwrap();
        for h in maps_vanishing_at_zero(2, 2, DEFAULT_BUDGET).unwrap() {
            let lift: Vec<usize> = (0..2).map(|x| map[sd.pair(h[x], x)]).collect();
            let e2 = e.clone().with_lift(lift).unwrap();
            let t2 = extract_cocycle(&e2);
            assert_eq!(twist(&d, &t, &h), t2);
            assert_eq!(equivalent(&d, &t, &t2, DEFAULT_BUDGET).unwrap(), Some(h.clone()));
            assert_eq!(equivalent_by_iso(&d, &t, &t2, DEFAULT_BUDGET).unwrap(), Some(h));
        }
    }

    #[test]
    fn identity_morphism() {
        let d = f1();
        let t = f2_cocycle();
        let id = vec![0, 1];
        for reading in [MorphismReading::Printed, MorphismReading::Emended] {
            assert_eq!(is_h2_morphism(&d, &t, &d, &t, &id, &[0, 0], &id, reading).unwrap(), None);
        }
        let z = Cocycle::zero(&d);
        assert!(is_h2_morphism(&d, &t, &d, &z, &id, &[0, 0], &id, MorphismReading::Emended).unwrap().is_none());
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(maps_vanishing_at_zero(30, 2, 1 << 20), Err(Error::BudgetExceeded { .. })));
    }
}
