//! Derivations of algebras, compatible pairs of derivations of an affine
//! datum, and the Wells sequence of a group-trivial extension.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::algebra::{Algebra, Ideal};
use crate::cocycle::{coboundary, extract_cocycle, maps_vanishing_at_zero, semidirect, twist, Action, Cocycle, Datum, ExtensionRecord};
use crate::cohomology::derivations;
use crate::error::{Error, Result};
use crate::modcore::{hom_enumerate, TupleIter};

/// A finite Lie algebra of maps `M -> M` under `[a,b] = a.b - b.a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebra {
    /// All elements, sorted.
    pub elements: Vec<Vec<usize>>,
    /// `bracket[i * n + j]` is the index of `[elements[i], elements[j]]`.
    pub bracket: Vec<usize>,
}

impl LieAlgebra {
    fn from_maps(a: &Algebra, mut elements: Vec<Vec<usize>>) -> Result<LieAlgebra> {
        elements.sort();
        let index: HashMap<&Vec<usize>, usize> = elements.iter().enumerate().map(|(k, e)| (e, k)).collect();
        let n = elements.len();
        let mut bracket = Vec::with_capacity(n * n);
        for x in &elements {
            for y in &elements {
                let b = bracket_maps(a, x, y);
                let k = index.get(&b).ok_or_else(|| Error::Inconsistency("derivations are not closed under the bracket".into()))?;
                bracket.push(*k);
            }
        }
        Ok(LieAlgebra { elements, bracket })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn bracket_of(&self, i: usize, j: usize) -> usize {
        self.bracket[i * self.len() + j]
    }

    pub fn index_of(&self, x: &[usize]) -> Option<usize> {
        self.elements.binary_search_by(|e| e.as_slice().cmp(x)).ok()
    }

    /// Checks antisymmetry and the Jacobi identity on every triple.
    pub fn is_lie(&self, a: &Algebra) -> bool {
        let n = self.len();
        let add = |i: usize, j: usize| self.index_of(&add_maps(a, &self.elements[i], &self.elements[j]));
        let zero = self.index_of(&vec![0; a.size()]);
        for i in 0..n {
            if Some(self.bracket_of(i, i)) != zero {
                return false;
            }
            for j in 0..n {
                for k in 0..n {
                    let t1 = self.bracket_of(i, self.bracket_of(j, k));
                    let t2 = self.bracket_of(j, self.bracket_of(k, i));
                    let t3 = self.bracket_of(k, self.bracket_of(i, j));
                    let s = add(t1, t2).and_then(|s| add(s, t3));
                    if s != zero {
                        return false;
                    }
                }
            }
        }
        true
    }
}

pub fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&x| a[x]).collect()
}

pub fn add_maps(m: &Algebra, a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().zip(b).map(|(&x, &y)| m.add(x, y)).collect()
}

pub fn sub_maps(m: &Algebra, a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().zip(b).map(|(&x, &y)| m.sub(x, y)).collect()
}

pub fn bracket_maps(m: &Algebra, a: &[usize], b: &[usize]) -> Vec<usize> {
    sub_maps(m, &compose(a, b), &compose(b, a))
}

/// Leibniz rule on generator tuples; `h` must already be a module endomorphism.
fn leibniz_holds(m: &Algebra, h: &[usize]) -> bool {
    let gens: Vec<usize> = (0..m.module().rank()).map(|j| m.module().generator(j)).collect();
    m.signature().ops.iter().enumerate().all(|(f, o)| {
        TupleIter::new(gens.len(), o.arity).all(|t| {
            let xs: Vec<usize> = t.iter().map(|&j| gens[j]).collect();
            let mut rhs = 0;
            for i in 0..xs.len() {
                let mut ys = xs.clone();
                ys[i] = h[xs[i]];
                rhs = m.add(rhs, m.op(f, &ys));
            }
            h[m.op(f, &xs)] == rhs
        })
    })
}

/// Whether `h` is a derivation of `m`.
pub fn is_derivation(m: &Algebra, h: &[usize]) -> bool {
    h.len() == m.size()
        && (0..m.size()).all(|x| (0..m.size()).all(|y| h[m.add(x, y)] == m.add(h[x], h[y])))
        && (0..m.modulus()).all(|r| (0..m.size()).all(|x| h[m.scale(r, x)] == m.scale(r, h[x])))
        && leibniz_holds(m, h)
}

/// `Der M` with its bracket table.
pub fn derivations_of(m: &Algebra) -> Result<LieAlgebra> {
    let maps = hom_enumerate(m.module(), m.module()).into_iter().map(|h| h.table()).filter(|h| leibniz_holds(m, h)).collect();
    LieAlgebra::from_maps(m, maps)
}

/// The derivations mapping the ideal into itself.
pub fn ideal_preserving(m: &Algebra, ideal: &Ideal) -> Result<LieAlgebra> {
    let all = derivations_of(m)?;
    let maps = all.elements.into_iter().filter(|h| ideal.elements().iter().all(|&x| ideal.contains(h[x]))).collect();
    LieAlgebra::from_maps(m, maps)
}

/// A pair `(alpha, beta)` of derivations of `I` and `Q`.
pub type DerPair = (Vec<usize>, Vec<usize>);

fn require_affine(d: &Datum, action: &Action) -> Result<()> {
    if !d.kernel_abelian() {
        return Err(Error::NotAffine("I is not abelian".into()));
    }
    if !action.is_unary() {
        return Err(Error::NotAffine("the action is not unary in I".into()));
    }
    Ok(())
}

/// The first instance of condition C2 that fails for `(alpha, beta)`.
pub fn c2_failure(d: &Datum, action: &Action, alpha: &[usize], beta: &[usize]) -> Option<String> {
    let i = &d.i;
    for (f, o) in d.sig().ops.iter().enumerate() {
        let n = o.arity;
        if n < 2 {
            continue;
        }
        for k in 0..n {
            let mask = 1u32 << k;
            for xs in TupleIter::new(d.nq(), n) {
                if xs[k] != 0 {
                    continue;
                }
                for a in 0..d.ni() {
                    let mut av = vec![0; n];
                    av[k] = a;
                    let lhs = alpha[action.get(f, mask, &xs, &av)];
                    let mut rhs = 0;
                    for slot in 0..n {
                        let mut ys = xs.clone();
                        let mut bs = av.clone();
                        ys[slot] = beta[xs[slot]];
                        bs[slot] = alpha[av[slot]];
                        rhs = i.add(rhs, action.get(f, mask, &ys, &bs));
                    }
                    if lhs != rhs {
                        return Some(format!("C2 at a({},{})", o.name, k + 1));
                    }
                }
            }
        }
    }
    None
}

/// The compatible pairs `c(I, Q, *)`, lexicographic.
pub fn compatible_pairs(d: &Datum, action: &Action) -> Result<Vec<DerPair>> {
    require_affine(d, action)?;
    let di = derivations_of(&d.i)?;
    let dq = derivations_of(&d.q)?;
    let mut out = Vec::new();
    for a in &di.elements {
        for b in &dq.elements {
            if c2_failure(d, action, a, b).is_none() {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    let set: HashSet<&DerPair> = out.iter().collect();
    for (a1, b1) in &out {
        for (a2, b2) in &out {
            let br = (bracket_maps(&d.i, a1, a2), bracket_maps(&d.q, b1, b2));
            if !set.contains(&br) {
                return Err(Error::Inconsistency("compatible pairs are not closed under the bracket".into()));
            }
        }
    }
    Ok(out)
}

/// `phi(a,x) = <alpha(a), beta(x)>` on `I x_T Q` when C1-C3 hold, otherwise
/// the first failing condition.
pub fn lift_pair(d: &Datum, t: &Cocycle, alpha: &[usize], beta: &[usize]) -> Result<std::result::Result<Vec<usize>, String>> {
    require_affine(d, &t.action)?;
    if !t.plus_vanishes() {
        return Err(Error::NotGroupTrivial);
    }
    let (q, i) = (&d.q, &d.i);
    for r in 0..d.modulus() {
        for x in 0..d.nq() {
            if alpha[t.tr(r, x)] != t.tr(r, beta[x]) {
                return Ok(Err(format!("C1 at r={r}, x={x}")));
            }
        }
    }
    if let Some(msg) = c2_failure(d, &t.action, alpha, beta) {
        return Ok(Err(msg));
    }
    for (f, o) in d.sig().ops.iter().enumerate() {
        for xs in TupleIter::new(d.nq(), o.arity) {
            let mut rhs = 0;
            for slot in 0..xs.len() {
                let mut ys = xs.clone();
                ys[slot] = beta[xs[slot]];
                rhs = i.add(rhs, t.tf(f, &ys));
            }
            if alpha[t.tf(f, &xs)] != rhs {
                return Ok(Err(format!("C3 at T{}{}", o.name, crate::cocycle::show_args(q.module(), &xs))));
            }
        }
    }
    let nq = d.nq();
    Ok(Ok((0..d.ni() * nq).map(|p| alpha[p / nq] * nq + beta[p % nq]).collect()))
}

/// `psi(phi) = (phi|_I, pi . phi . l)`.
pub fn psi_pair(phi: &[usize], e: &ExtensionRecord) -> Result<DerPair> {
    let inv = e.iota_inv();
    let mut alpha = Vec::with_capacity(e.i.size());
    for &y in &e.iota {
        let v = inv[phi[y]];
        if v == usize::MAX {
            return Err(Error::Validation("derivation does not preserve the kernel".into()));
        }
        alpha.push(v);
    }
    let beta = e.lift.iter().map(|&y| e.pi[phi[y]]).collect();
    Ok((alpha, beta))
}

/// An equivalent cocycle with `T_+ = 0` and the witness used.
pub fn group_trivialize(d: &Datum, t: &Cocycle, budget: u128) -> Result<(Cocycle, Vec<usize>)> {
    if t.plus_vanishes() {
        return Ok((t.clone(), vec![0; d.nq()]));
    }
    for h in maps_vanishing_at_zero(d.nq(), d.ni(), budget)? {
        let t2 = twist(d, t, &h);
        if t2.plus_vanishes() {
            return Ok((t2, h));
        }
    }
    Err(Error::NotGroupTrivial)
}

/// `T^(alpha,beta)`: every factor set twisted by the pair, action unchanged.
pub fn pair_twist(d: &Datum, t: &Cocycle, alpha: &[usize], beta: &[usize]) -> Cocycle {
    let (i, nq) = (&d.i, d.nq());
    let mut out = t.clone();
    for x in 0..nq {
        for y in 0..nq {
            let v = i.sub(i.sub(alpha[t.tplus(x, y)], t.tplus(beta[x], y)), t.tplus(x, beta[y]));
            out.plus[x * nq + y] = v;
        }
    }
    for r in 0..d.modulus() {
        for x in 0..nq {
            out.scalar[r as usize * nq + x] = i.sub(alpha[t.tr(r, x)], t.tr(r, beta[x]));
        }
    }
    for (f, o) in d.sig().ops.iter().enumerate() {
        for (k, xs) in TupleIter::new(nq, o.arity).enumerate() {
            let mut v = alpha[t.tf(f, &xs)];
            for slot in 0..xs.len() {
                let mut ys = xs.clone();
                ys[slot] = beta[xs[slot]];
                v = i.sub(v, t.tf(f, &ys));
            }
            out.ops[f][k] = v;
        }
    }
    out
}

/// A witness `h` whose coboundary has the factor sets of `t`, if one exists.
pub fn coboundary_witness(d: &Datum, t: &Cocycle, budget: u128) -> Result<Option<Vec<usize>>> {
    let key = t.factor_key();
    for h in maps_vanishing_at_zero(d.nq(), d.ni(), budget)? {
        if coboundary(d, &h, &t.action).factor_key() == key {
            return Ok(Some(h));
        }
    }
    Ok(None)
}

/// The value of the Wells map at a pair: the twisted cocycle and, when its
/// class is zero, a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WellsValue {
    pub cocycle: Cocycle,
    pub witness: Option<Vec<usize>>,
}

impl WellsValue {
    pub fn is_zero(&self) -> bool {
        self.witness.is_some()
    }
}

pub fn wells_map(d: &Datum, t: &Cocycle, alpha: &[usize], beta: &[usize], budget: u128) -> Result<WellsValue> {
    require_affine(d, &t.action)?;
    let (t0, _) = group_trivialize(d, t, budget)?;
    let cocycle = pair_twist(d, &t0, alpha, beta);
    let witness = coboundary_witness(d, &cocycle, budget)?;
    Ok(WellsValue { cocycle, witness })
}

/// Outcome of checking the Wells sequence on an extension.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WellsReport {
    pub datum_derivations: usize,
    pub ideal_preserving: usize,
    pub compatible_pairs: usize,
    pub kernel_of_wells: usize,
    /// `Der(Q,I,*) -> Der_I M` is injective.
    pub first_injective: bool,
    /// `ker psi` is carried bijectively onto `Der(Q,I,*)` by `phi -> phi . l`.
    pub kernel_matches: bool,
    /// `im psi = ker W_T` as sets.
    pub image_is_kernel: bool,
    /// The section built from coboundary witnesses lands in `Der_I M` and splits `psi`.
    pub section_ok: bool,
    /// A Lie subalgebra complementing `ker psi` was found; `None` if the search exceeded the budget.
    pub split: Option<bool>,
    pub failures: Vec<String>,
}

impl WellsReport {
    pub fn passed(&self) -> bool {
        self.first_injective && self.kernel_matches && self.image_is_kernel && self.section_ok && self.split != Some(false)
    }
}

/// Verifies `0 -> Der(Q,I,*) -> Der_I M -> c(I,Q,*) -> H^2(Q,I)` on `e`.
pub fn verify_wells(e: &ExtensionRecord, budget: u128) -> Result<WellsReport> {
    let d = e.datum();
    let t = extract_cocycle(e);
    require_affine(&d, &t.action)?;
    let (t0, _) = group_trivialize(&d, &t, budget)?;
    let m = &e.m;
    let kernel = e.kernel();
    let der_datum = derivations(&d, &t.action)?;
    let der_i = ideal_preserving(m, &kernel)?;
    let pairs = compatible_pairs(&d, &t.action)?;
    let mut rep = WellsReport {
        datum_derivations: der_datum.len(),
        ideal_preserving: der_i.len(),
        compatible_pairs: pairs.len(),
        ..Default::default()
    };
    let inv = e.iota_inv();
    // first arrow: sigma -> (m -> iota(sigma(pi(m))))
    let embedded: Vec<Vec<usize>> =
        der_datum.iter().map(|s| (0..m.size()).map(|y| e.iota[s[e.pi[y]]]).collect()).collect();
    let distinct: HashSet<&Vec<usize>> = embedded.iter().collect();
    rep.first_injective = distinct.len() == embedded.len() && embedded.iter().all(|g| der_i.index_of(g).is_some());
    if !rep.first_injective {
        rep.failures.push("Der(Q,I,*) does not embed in Der_I M".into());
    }
    let psis: Vec<DerPair> = der_i.elements.iter().map(|phi| psi_pair(phi, e)).collect::<Result<_>>()?;
    let pair_set: HashSet<&DerPair> = pairs.iter().collect();
    if let Some(k) = psis.iter().position(|p| !pair_set.contains(p)) {
        rep.failures.push(format!("psi of derivation #{k} is not a compatible pair"));
    }
    let zero_pair: DerPair = (vec![0; d.ni()], vec![0; d.nq()]);
    let ker_psi: Vec<&Vec<usize>> = der_i.elements.iter().zip(&psis).filter(|(_, p)| **p == zero_pair).map(|(phi, _)| phi).collect();
    let delta: BTreeSet<Vec<usize>> = ker_psi.iter().map(|phi| e.lift.iter().map(|&y| inv[phi[y]]).collect()).collect();
    rep.kernel_matches = delta.len() == ker_psi.len() && delta.iter().eq(der_datum.iter());
    if !rep.kernel_matches {
        rep.failures.push("ker psi does not match Der(Q,I,*)".into());
    }
    let mut ker_w = Vec::new();
    let mut witnesses = HashMap::new();
    for p in &pairs {
        let tw = pair_twist(&d, &t0, &p.0, &p.1);
        if let Some(h) = coboundary_witness(&d, &tw, budget)? {
            witnesses.insert(p.clone(), h);
            ker_w.push(p.clone());
        }
    }
    rep.kernel_of_wells = ker_w.len();
    let image: BTreeSet<&DerPair> = psis.iter().collect();
    let kernel_set: BTreeSet<&DerPair> = ker_w.iter().collect();
    rep.image_is_kernel = image == kernel_set;
    if !rep.image_is_kernel {
        rep.failures.push("im psi differs from ker W_T".into());
    }
    // section l_T(s,k)<a,x> = <s(a) + h(x), k(x)> on I x_T0 Q, compared through psi
    let sd = semidirect(&d, &t0)?;
    let (e0, to_alg) = sd.extension(&d)?;
    let mut from_alg = vec![0; to_alg.len()];
    for (p, &y) in to_alg.iter().enumerate() {
        from_alg[y] = p;
    }
    let der_i0 = ideal_preserving(&e0.m, &e0.kernel())?;
    rep.section_ok = ker_w.iter().all(|p| {
        let h = &witnesses[p];
        let phi: Vec<usize> = (0..e0.m.size())
            .map(|y| {
                let (a, x) = sd.unpair(from_alg[y]);
                to_alg[sd.pair(d.i.add(p.0[a], h[x]), p.1[x])]
            })
            .collect();
        der_i0.index_of(&phi).is_some() && psi_pair(&phi, &e0).map(|q| q == *p).unwrap_or(false)
    });
    if !rep.section_ok {
        rep.failures.push("the witness section is not a section of psi".into());
    }
    rep.split = split_search(&d, m, &der_i, &psis, &ker_w, budget);
    if rep.split == Some(false) {
        rep.failures.push("no Lie subalgebra complements ker psi".into());
    }
    Ok(rep)
}

/// Lie subalgebra of maps generated by `gens`, or `None` past `limit` elements.
fn lie_closure(m: &Algebra, gens: &[Vec<usize>], limit: usize) -> Option<BTreeSet<Vec<usize>>> {
    let mut set: BTreeSet<Vec<usize>> = BTreeSet::from([vec![0; m.size()]]);
    let mut queue: Vec<Vec<usize>> = gens.to_vec();
    while let Some(x) = queue.pop() {
        if !set.insert(x.clone()) {
            continue;
        }
        if set.len() > limit {
            return None;
        }
        let current: Vec<Vec<usize>> = set.iter().cloned().collect();
        for y in current {
            for z in [add_maps(m, &x, &y), bracket_maps(m, &x, &y)] {
                if !set.contains(&z) {
                    queue.push(z);
                }
            }
        }
    }
    Some(set)
}

/// Searches for lifts of module generators of `ker W` that generate a Lie
/// subalgebra mapped bijectively onto `ker W` by `psi`.
fn split_search(d: &Datum, m: &Algebra, der_i: &LieAlgebra, psis: &[DerPair], ker_w: &[DerPair], budget: u128) -> Option<bool> {
    let add = |p: &DerPair, q: &DerPair| -> DerPair { (add_maps(&d.i, &p.0, &q.0), add_maps(&d.q, &p.1, &q.1)) };
    let zero: DerPair = (vec![0; d.ni()], vec![0; d.nq()]);
    let mut span: HashSet<DerPair> = HashSet::from([zero]);
    let mut gens: Vec<&DerPair> = Vec::new();
    for p in ker_w {
        if span.contains(p) {
            continue;
        }
        gens.push(p);
        loop {
            let next: HashSet<DerPair> = span.iter().map(|s| add(s, p)).filter(|s| !span.contains(s)).collect();
            if next.is_empty() {
                break;
            }
            span.extend(next);
        }
    }
    let fibres: Vec<Vec<usize>> = gens
        .iter()
        .map(|g| psis.iter().enumerate().filter(|(_, q)| q == g).map(|(k, _)| k).collect())
        .collect();
    let count = fibres.iter().fold(1u128, |acc, f| acc.saturating_mul(f.len() as u128));
    if count > budget {
        return None;
    }
    for pick in crate::modcore::cartesian(&fibres) {
        let lifts: Vec<Vec<usize>> = pick.iter().map(|&k| der_i.elements[k].clone()).collect();
        if let Some(l) = lie_closure(m, &lifts, ker_w.len()) {
            if l.len() == ker_w.len() {
                return Some(true);
            }
        }
    }
    Some(false)
}

#[cfg(test)]
mod tests;
