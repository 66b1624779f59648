//! Ideals, commutators, quotients and the derived and lower central series.

use super::{Algebra, RawAlgebra, Tables};
use crate::error::{Error, Result};
use crate::modcore::TupleIter;

/// An ideal stored as its closed element set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ideal {
    parent_size: usize,
    members: Vec<bool>,
    elements: Vec<usize>,
    generators: Vec<usize>,
}

impl Ideal {
    pub fn zero(parent: &Algebra) -> Ideal {
        ideal_generated(parent, &[])
    }

    pub fn whole(parent: &Algebra) -> Ideal {
        let all: Vec<usize> = (0..parent.size()).collect();
        Ideal {
            parent_size: parent.size(),
            members: vec![true; parent.size()],
            elements: all.clone(),
            generators: all,
        }
    }

    /// Wraps a set after checking that it is an ideal of `parent`.
    pub fn from_set(parent: &Algebra, set: &[usize]) -> Result<Ideal> {
        let closed = ideal_generated(parent, set);
        if closed.len() != {
            let mut s = set.to_vec();
            s.push(0);
            s.sort_unstable();
            s.dedup();
            s.len()
        } {
            return Err(Error::NotAnIdeal(format!(
                "closure adds {} elements",
                closed.len() - set.len().min(closed.len())
            )));
        }
        Ok(closed)
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members[x]
    }

    /// Members in increasing index order.
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn parent_size(&self) -> usize {
        self.parent_size
    }

    pub fn is_subset(&self, other: &Ideal) -> bool {
        self.elements.iter().all(|&x| other.contains(x))
    }
}

/// Least submodule containing `s` that absorbs every operation.
pub fn ideal_generated(a: &Algebra, s: &[usize]) -> Ideal {
    let n = a.size();
    let rank = a.module().rank();
    let gens: Vec<usize> = (0..rank).map(|i| a.module().generator(i)).collect();
    let mut members = vec![false; n];
    let mut list: Vec<usize> = Vec::new();
    let mut queue: Vec<usize> = Vec::new();
    let push = |x: usize, members: &mut Vec<bool>, list: &mut Vec<usize>, queue: &mut Vec<usize>| {
        if !members[x] {
            members[x] = true;
            list.push(x);
            queue.push(x);
        }
    };
    push(0, &mut members, &mut list, &mut queue);
    for &x in s {
        push(x, &mut members, &mut list, &mut queue);
    }
    while let Some(x) = queue.pop() {
        let snapshot = list.clone();
        for y in snapshot {
            push(a.add(x, y), &mut members, &mut list, &mut queue);
        }
        for (f, op) in a.signature().ops.iter().enumerate() {
            for slot in 0..op.arity {
                for others in TupleIter::new(gens.len(), op.arity - 1) {
                    let mut args = Vec::with_capacity(op.arity);
                    let mut it = others.iter();
                    for p in 0..op.arity {
                        if p == slot {
                            args.push(x);
                        } else {
                            args.push(gens[*it.next().unwrap()]);
                        }
                    }
                    push(a.op(f, &args), &mut members, &mut list, &mut queue);
                }
            }
        }
    }
    let mut elements = list;
    elements.sort_unstable();
    let mut generators: Vec<usize> = s.iter().copied().filter(|&x| x != 0).collect();
    generators.sort_unstable();
    generators.dedup();
    Ideal { parent_size: n, members, elements, generators }
}

/// The commutator ideal `[I, J]`.
///
/// Generators are `f(a)` with an entry from `I` and a different entry from `J`
/// (remaining entries arbitrary) for arity at least two, and `f(a)` with
/// `a` in both ideals for unary `f`.
pub fn commutator(a: &Algebra, i: &Ideal, j: &Ideal) -> Result<Ideal> {
    if i.parent_size != a.size() || j.parent_size != a.size() {
        return Err(Error::ParentMismatch);
    }
    let rank = a.module().rank();
    let gens: Vec<usize> = (0..rank).map(|k| a.module().generator(k)).collect();
    let mut out: Vec<usize> = Vec::new();
    for (f, op) in a.signature().ops.iter().enumerate() {
        let n = op.arity;
        if n == 1 {
            for &x in i.elements() {
                if j.contains(x) {
                    out.push(a.op(f, &[x]));
                }
            }
            continue;
        }
        for pi in 0..n {
            for pj in 0..n {
                if pi == pj {
                    continue;
                }
                for &x in i.elements() {
                    for &y in j.elements() {
                        for others in TupleIter::new(gens.len(), n - 2) {
                            let mut it = others.iter();
                            let args: Vec<usize> = (0..n)
                                .map(|p| {
                                    if p == pi {
                                        x
                                    } else if p == pj {
                                        y
                                    } else {
                                        gens[*it.next().unwrap()]
                                    }
                                })
                                .collect();
                            out.push(a.op(f, &args));
                        }
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(ideal_generated(a, &out))
}

fn check_ideal(a: &Algebra, i: &Ideal) -> Result<()> {
    if i.parent_size != a.size() {
        return Err(Error::ParentMismatch);
    }
    let closed = ideal_generated(a, i.elements());
    if closed.len() != i.len() {
        return Err(Error::NotAnIdeal("set is not closed under the module operations and absorption".into()));
    }
    Ok(())
}

/// The quotient `A / I` with the canonical surjection (algebra index map).
pub fn quotient(a: &Algebra, i: &Ideal) -> Result<(Algebra, Vec<usize>)> {
    check_ideal(a, i)?;
    let n = a.size();
    let mut coset = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for x in 0..n {
        if coset[x] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(x);
        for &y in i.elements() {
            coset[a.add(x, y)] = id;
        }
    }
    let qn = reps.len();
    let m = a.modulus();
    let mut add = vec![0; qn * qn];
    for p in 0..qn {
        for q in 0..qn {
            add[p * qn + q] = coset[a.add(reps[p], reps[q])];
        }
    }
    let neg = (0..qn).map(|p| coset[a.neg(reps[p])]).collect();
    let mut scale = vec![0; m as usize * qn];
    for r in 0..m {
        for p in 0..qn {
            scale[r as usize * qn + p] = coset[a.scale(r, reps[p])];
        }
    }
    let mut ops = Vec::new();
    for (f, op) in a.signature().ops.iter().enumerate() {
        let mut t = vec![0; qn.pow(op.arity as u32)];
        for (k, args) in TupleIter::new(qn, op.arity).enumerate() {
            let lifted: Vec<usize> = args.iter().map(|&p| reps[p]).collect();
            t[k] = coset[a.op(f, &lifted)];
        }
        ops.push(t);
    }
    let raw = RawAlgebra {
        sig: a.signature().clone(),
        tables: Tables {
            n: qn,
            modulus: m,
            add,
            neg,
            scale,
            arities: a.tables().arities.clone(),
            ops,
        },
    };
    let (q, map) = Algebra::from_raw(&raw)?;
    let pi = (0..n).map(|x| map[coset[x]]).collect();
    Ok((q, pi))
}

/// The ideal `I` as an algebra in its own right, with its embedding into `A`.
pub fn subalgebra(a: &Algebra, i: &Ideal) -> Result<(Algebra, Vec<usize>)> {
    check_ideal(a, i)?;
    let els = i.elements();
    let k = els.len();
    let mut local = vec![usize::MAX; a.size()];
    for (p, &x) in els.iter().enumerate() {
        local[x] = p;
    }
    let m = a.modulus();
    let mut add = vec![0; k * k];
    for p in 0..k {
        for q in 0..k {
            add[p * k + q] = local[a.add(els[p], els[q])];
        }
    }
    let neg = (0..k).map(|p| local[a.neg(els[p])]).collect();
    let mut scale = vec![0; m as usize * k];
    for r in 0..m {
        for p in 0..k {
            scale[r as usize * k + p] = local[a.scale(r, els[p])];
        }
    }
    let mut ops = Vec::new();
    for (f, op) in a.signature().ops.iter().enumerate() {
        let mut t = vec![0; k.pow(op.arity as u32)];
        for (idx, args) in TupleIter::new(k, op.arity).enumerate() {
            let g: Vec<usize> = args.iter().map(|&p| els[p]).collect();
            t[idx] = local[a.op(f, &g)];
        }
        ops.push(t);
    }
    let raw = RawAlgebra {
        sig: a.signature().clone(),
        tables: Tables { n: k, modulus: m, add, neg, scale, arities: a.tables().arities.clone(), ops },
    };
    let (sub, map) = Algebra::from_raw(&raw)?;
    let mut embed = vec![0; k];
    for p in 0..k {
        embed[map[p]] = els[p];
    }
    Ok((sub, embed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    Derived,
    LowerCentral,
}

/// A descending chain of ideals computed until it stabilizes.
#[derive(Clone, Debug)]
pub struct Series {
    pub kind: SeriesKind,
    /// `terms[0]` is the whole algebra.
    pub terms: Vec<Ideal>,
    /// The least `n` with `terms[n] = 0`, if the chain reaches zero.
    pub steps: Option<usize>,
}

pub fn series(a: &Algebra, kind: SeriesKind) -> Series {
    let whole = Ideal::whole(a);
    let mut terms = vec![whole.clone()];
    loop {
        let last = terms.last().unwrap();
        if last.is_zero() {
            break;
        }
        let next = match kind {
            SeriesKind::Derived => commutator(a, last, last),
            SeriesKind::LowerCentral => commutator(a, &whole, last),
        }
        .expect("same parent");
        if next == *last {
            break;
        }
        terms.push(next);
    }
    let steps = terms.iter().position(|t| t.is_zero());
    Series { kind, terms, steps }
}
