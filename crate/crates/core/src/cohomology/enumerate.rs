//! Exhaustive enumeration of `H^2_V(Q, I)` as twist orbits of compatible cocycles.

use std::collections::HashSet;

use crate::cocycle::{is_compatible, maps_vanishing_at_zero, split_mask, twist, Action, Cocycle, Datum};
use crate::error::{Error, Result};
use crate::modcore::{cartesian, gcd, TupleIter};
use crate::termlang::{in_variety, Variety};

/// Which actions the enumeration ranges over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ActionScope {
    All,
    Fixed(Action),
}

impl ActionScope {
    fn admits(&self, a: &Action) -> bool {
        match self {
            ActionScope::All => true,
            ActionScope::Fixed(b) => a == b,
        }
    }
}

/// An equivalence class of compatible cocycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyClass {
    /// The lexicographically least member within the scope.
    pub representative: Cocycle,
    pub datum: Datum,
    pub variety: String,
    /// Number of members within the scope.
    pub size: usize,
}

fn mul_bound(a: u128, b: u128) -> u128 {
    a.saturating_mul(b)
}

/// Free cells of one action table: for each complementary `Q`-tuple without
/// zeros and each tuple of generators of `I`, the admissible values.
fn action_cells(d: &Datum, f: usize, mask: u32) -> Vec<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let n = d.sig().arity(f);
    let (inside, outside) = split_mask(mask, n);
    let im = d.i.module();
    let mut cells = Vec::new();
    for cq in TupleIter::new(d.nq(), outside.len()) {
        if cq.contains(&0) {
            continue;
        }
        for gens in TupleIter::new(im.rank(), inside.len()) {
            let g = gens.iter().fold(0, |acc, &j| gcd(acc, im.factors()[j]));
            cells.push((cq.clone(), gens, im.annihilated_by(g)));
        }
    }
    cells
}

fn action_bound(d: &Datum) -> u128 {
    let a = Action::trivial(d);
    a.symbols()
        .into_iter()
        .flat_map(|(f, mask)| action_cells(d, f, mask))
        .fold(1u128, |acc, (_, _, vals)| mul_bound(acc, vals.len() as u128))
}

/// Every action of `Q` on `I`, determined by its values on generator tuples.
pub fn all_actions(d: &Datum, budget: u128) -> Result<Vec<Action>> {
    let bound = action_bound(d);
    if bound > budget {
        return Err(Error::BudgetExceeded { bound, budget });
    }
    let base = Action::trivial(d);
    let symbols = base.symbols();
    let cells: Vec<Vec<(Vec<usize>, Vec<usize>, Vec<usize>)>> =
        symbols.iter().map(|&(f, mask)| action_cells(d, f, mask)).collect();
    let choices: Vec<Vec<usize>> = cells.iter().flatten().map(|(_, _, vals)| vals.clone()).collect();
    let im = d.i.module();
    let m = d.modulus();
    let mut out = Vec::new();
    for pick in cartesian(&choices) {
        let mut a = base.clone();
        let mut k = 0;
        for (&(f, mask), cs) in symbols.iter().zip(&cells) {
            let ks = mask.count_ones() as usize;
            for (cq, gens, _) in cs {
                let v = pick[k];
                k += 1;
                for sa in TupleIter::new(d.ni(), ks) {
                    let coeff = sa.iter().zip(gens).fold(1u64, |acc, (&x, &j)| acc * im.coords(x)[j] % m);
                    let old = a.get_parts(f, mask, cq, &sa);
                    a.set_parts(f, mask, cq, &sa, d.i.add(old, d.i.scale(coeff, v)));
                }
            }
        }
        out.push(a);
    }
    Ok(out)
}

/// Enumerates the classes of `V`-compatible cocycles. `T_+` is taken
/// symmetric and `T_r` is derived from `T_+`; other candidates never give a
/// module reduct.
pub fn enumerate_h2(d: &Datum, v: &Variety, scope: &ActionScope, budget: u128) -> Result<Vec<CohomologyClass>> {
    if !in_variety(&d.q, v)? || !in_variety(&d.i, v)? {
        return Err(Error::DatumNotInVariety(format!("Q or I is not in `{}`", v.name)));
    }
    let (nq, ni) = (d.nq(), d.ni());
    let actions = match scope {
        ActionScope::All => {
            let bound = action_bound(d);
            if bound > budget {
                return Err(Error::BudgetExceeded { bound, budget });
            }
            all_actions(d, budget)?
        }
        ActionScope::Fixed(a) => vec![a.clone()],
    };
    let plus_cells: Vec<(usize, usize)> = (1..nq).flat_map(|x| (x..nq).map(move |y| (x, y))).collect();
    let mut op_cells: Vec<(usize, usize)> = Vec::new();
    for (f, o) in d.sig().ops.iter().enumerate() {
        for (k, xs) in TupleIter::new(nq, o.arity).enumerate() {
            if !xs.contains(&0) {
                op_cells.push((f, k));
            }
        }
    }
    let free = plus_cells.len() + op_cells.len();
    let bound = mul_bound((ni as u128).checked_pow(free as u32).unwrap_or(u128::MAX), actions.len() as u128);
    if bound > budget {
        return Err(Error::BudgetExceeded { bound, budget });
    }
    let mut compatible = Vec::new();
    for a in &actions {
        let base = Cocycle::with_action(d, a.clone());
        if base.validate(d).is_err() {
            continue;
        }
        for vals in TupleIter::new(ni, free) {
            let mut t = base.clone();
            for (&(x, y), &val) in plus_cells.iter().zip(&vals) {
                t.plus[x * nq + y] = val;
                t.plus[y * nq + x] = val;
            }
            for (&(f, k), &val) in op_cells.iter().zip(&vals[plus_cells.len()..]) {
                t.ops[f][k] = val;
            }
            t.derive_scalar(d);
            if is_compatible(d, &t, v)? {
                compatible.push(t);
            }
        }
    }
    compatible.sort_by_key(|a| a.key());
    let witnesses: Vec<Vec<usize>> = maps_vanishing_at_zero(nq, ni, budget)?.collect();
    let mut seen: HashSet<Cocycle> = HashSet::new();
    let mut classes = Vec::new();
    for t in compatible {
        if seen.contains(&t) {
            continue;
        }
        let mut members: Vec<Cocycle> = Vec::new();
        for h in &witnesses {
            let t2 = twist(d, &t, h);
            if scope.admits(&t2.action) && seen.insert(t2.clone()) {
                members.push(t2);
            }
        }
        let representative = members.iter().min_by(|a, b| a.key().cmp(&b.key())).cloned().unwrap_or(t);
        classes.push(CohomologyClass { representative, datum: d.clone(), variety: v.name.clone(), size: members.len() });
    }
    classes.sort_by_key(|a| a.representative.key());
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::algebra::{Algebra, Signature};
    use crate::cocycle::{equivalent, DEFAULT_BUDGET};
    use crate::modcore::ZmModule;

    fn pure(m: u64, factors: Vec<u64>) -> Algebra {
        Algebra::with_zero_ops(ZmModule::new(m, factors).unwrap(), Signature::default())
    }

    #[test]
    fn z2_by_z2_over_z4() {
        let q = pure(4, vec![2]);
        let d = Datum::new(q.clone(), q).unwrap();
        let v = Variety::mlf(Signature::default(), 4);
        let classes = enumerate_h2(&d, &v, &ActionScope::All, DEFAULT_BUDGET).unwrap();
        assert_eq!(classes.len(), 2);
        assert_eq!(classes[1].representative.tplus(1, 1), 1);
    }

    #[test]
    fn central_f_datum() {
        let d = Datum::new(zf(2, vec![2]), zf(2, vec![2])).unwrap();
        let v = Variety::mlf(Signature::new(&[("f", 2)]).unwrap(), 2);
        let fixed = ActionScope::Fixed(Action::trivial(&d));
        let classes = enumerate_h2(&d, &v, &fixed, DEFAULT_BUDGET).unwrap();
        assert_eq!(classes.len(), 2);
        assert!(classes.iter().all(|c| c.representative.plus_vanishes()));
    }

    #[test]
    fn datum_outside_variety() {
        let q = z2_square();
        let d = Datum::new(q.clone(), q).unwrap();
        let mut v = Variety::mlf(Signature::new(&[("f", 2)]).unwrap(), 2);
        v.add_identity("f(x, y) = 0").unwrap();
        assert!(matches!(enumerate_h2(&d, &v, &ActionScope::All, DEFAULT_BUDGET), Err(Error::DatumNotInVariety(_))));
    }

    #[test]
    fn actions_are_multi_additive() {
        let d = Datum::new(zf(4, vec![2]), zf(4, vec![4])).unwrap();
        let acts = all_actions(&d, DEFAULT_BUDGET).unwrap();
        // a(f,{1})(1 | -) and a(f,{2})(1 | -) are each one of the four endomorphisms of Z_4
        assert_eq!(acts.len(), 16);
        assert!(acts.iter().all(|a| crate::cocycle::Cocycle::with_action(&d, a.clone()).validate(&d).is_ok()));
    }

    #[test]
    fn orbits_agree_with_isomorphism_criterion() {
        let d = Datum::new(zf(2, vec![2]), zf(2, vec![2])).unwrap();
        let v = Variety::mlf(Signature::new(&[("f", 2)]).unwrap(), 2);
        let classes = enumerate_h2(&d, &v, &ActionScope::All, DEFAULT_BUDGET).unwrap();
        let total: usize = classes.iter().map(|c| c.size).sum();
        assert!(total >= classes.len());
        for (i, a) in classes.iter().enumerate() {
            for (j, b) in classes.iter().enumerate() {
                let eq = equivalent(&d, &a.representative, &b.representative, DEFAULT_BUDGET).unwrap().is_some();
                assert_eq!(eq, i == j);
            }
        }
    }
}
