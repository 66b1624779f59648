//! The low-dimensional Hochschild-Serre sequence of an extension
//! `I -> M -> Q` with coefficients in an affine datum `(M, A, *)`.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{quotient, subalgebra, Algebra, Ideal};
use crate::cocycle::{coboundary, extract_cocycle, is_compatible, maps_vanishing_at_zero, split_mask, Action, Cocycle, Datum, ExtensionRecord};
use crate::cohomology::{derivations, h1, h2_affine, AffineH2, FirstCohomology};
use crate::error::{Error, Result};
use crate::modcore::TupleIter;
use crate::termlang::Variety;

/// Budget of the `h`-search in the general square condition.
pub const SQUARE_BUDGET: u128 = 1 << 12;

/// An extension `I -> M -> Q` together with an affine action of `M` on `A`.
#[derive(Clone, Debug)]
pub struct HsDatum {
    pub m: Algebra,
    pub ideal: Ideal,
    pub a: Algebra,
    /// Action of `M` on `A`, unary in `A`.
    pub action: Action,
    pub variety: Variety,
    /// `M -> Q = M/I` with its kernel and cocycle `T`.
    pub extension: ExtensionRecord,
    pub t: Cocycle,
    /// Elements of `A^I`, as indices of `A`.
    pub null: Vec<usize>,
    /// `A^I` as an algebra, embedded in `A` by `null`.
    pub a_null: Algebra,
    /// `(Q, A^I)` with the induced action.
    pub q_datum: Datum,
    pub induced: Action,
    /// `(M, A^I)` with the restricted action.
    pub m_datum: Datum,
    pub m_action: Action,
    /// `(I, A^I)` with the restricted action.
    pub i_datum: Datum,
    pub i_action: Action,
}

fn require_unary(d: &Datum, action: &Action) -> Result<()> {
    if !d.kernel_abelian() {
        return Err(Error::NotAffine("A is not abelian".into()));
    }
    if !action.is_unary() {
        return Err(Error::NotAffine("the action is not unary in A".into()));
    }
    action.validate(d)
}

/// The greatest set `N` of elements all of whose images under the action
/// terms lie in `N`, inside the elements killed by every action term with an
/// entry from the ideal.
pub fn null_submodule(d: &Datum, action: &Action, ideal: &Ideal) -> Result<Vec<usize>> {
    require_unary(d, action)?;
    let na = d.ni();
    let mut keep: Vec<bool> = (0..na).map(|a| images_with_ideal_entry(d, action, ideal, a).iter().all(|&v| v == 0)).collect();
    loop {
        let next: Vec<bool> =
            (0..na).map(|a| keep[a] && all_images(d, action, a).iter().all(|&v| keep[v])).collect();
        if next == keep {
            break;
        }
        keep = next;
    }
    Ok((0..na).filter(|&a| keep[a]).collect())
}

/// Every `a(f,k)(m, a)`.
fn all_images(d: &Datum, action: &Action, a: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for (f, mask) in action.symbols() {
        if mask.count_ones() != 1 {
            continue;
        }
        let n = d.sig().arity(f);
        for comp in TupleIter::new(d.nq(), n - 1) {
            out.push(action.get_parts(f, mask, &comp, &[a]));
        }
    }
    out
}

/// Every `a(f,k)(m, a)` with some entry of `m` in the ideal.
fn images_with_ideal_entry(d: &Datum, action: &Action, ideal: &Ideal, a: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for (f, mask) in action.symbols() {
        if mask.count_ones() != 1 {
            continue;
        }
        let n = d.sig().arity(f);
        for comp in TupleIter::new(d.nq(), n - 1) {
            if comp.iter().any(|&m| ideal.contains(m)) {
                out.push(action.get_parts(f, mask, &comp, &[a]));
            }
        }
    }
    out
}

/// Transports a unary action along `x_map: X' -> X` and onto a submodule
/// `emb: A' -> A`.
fn transport_action(src: &Datum, action: &Action, dst: &Datum, x_map: &[usize], emb: &[usize]) -> Result<Action> {
    let mut inv = vec![usize::MAX; src.ni()];
    for (k, &a) in emb.iter().enumerate() {
        inv[a] = k;
    }
    let mut out = Action::trivial(dst);
    for (f, mask) in out.symbols() {
        if mask.count_ones() != 1 {
            continue;
        }
        let n = dst.sig().arity(f);
        for comp in TupleIter::new(dst.nq(), n - 1) {
            let mapped: Vec<usize> = comp.iter().map(|&x| x_map[x]).collect();
            for a in 0..dst.ni() {
                let v = inv[action.get_parts(f, mask, &mapped, &[emb[a]])];
                if v == usize::MAX {
                    return Err(Error::Inconsistency("the submodule is not closed under the action".into()));
                }
                out.set_parts(f, mask, &comp, &[a], v);
            }
        }
    }
    Ok(out)
}

impl HsDatum {
    pub fn new(m: Algebra, ideal: Ideal, a: Algebra, action: Action, variety: Variety) -> Result<HsDatum> {
        let full = Datum::new(m.clone(), a.clone())?;
        require_unary(&full, &action)?;
        let (q, pi) = quotient(&m, &ideal)?;
        let (i_alg, iota) = subalgebra(&m, &ideal)?;
        let extension = ExtensionRecord::new(m.clone(), q.clone(), i_alg.clone(), pi, iota)?;
        let t = extract_cocycle(&extension);
        let null = null_submodule(&full, &action, &ideal)?;
        let (a_null, emb) = subalgebra(&a, &Ideal::from_set(&a, &null)?)?;
        let q_datum = Datum::new(q, a_null.clone())?;
        let m_datum = Datum::new(m.clone(), a_null.clone())?;
        let i_datum = Datum::new(i_alg, a_null.clone())?;
        let identity: Vec<usize> = (0..m.size()).collect();
        let m_action = transport_action(&full, &action, &m_datum, &identity, &emb)?;
        let i_action = transport_action(&full, &action, &i_datum, &extension.iota, &emb)?;
        let induced = transport_action(&full, &action, &q_datum, &extension.lift, &emb)?;
        let hs = HsDatum {
            m,
            ideal,
            a,
            action,
            variety,
            extension,
            t,
            null: emb,
            a_null,
            q_datum,
            induced,
            m_datum,
            m_action,
            i_datum,
            i_action,
        };
        if let Some(msg) = hs.induced_failure() {
            return Err(Error::Inconsistency(msg));
        }
        Ok(hs)
    }

    /// First input at which the induced action depends on coset representatives.
    pub fn induced_failure(&self) -> Option<String> {
        let d = &self.m_datum;
        let pi = &self.extension.pi;
        for (f, mask) in self.m_action.symbols() {
            if mask.count_ones() != 1 {
                continue;
            }
            let n = d.sig().arity(f);
            for comp in TupleIter::new(d.nq(), n - 1) {
                let xs: Vec<usize> = comp.iter().map(|&m| pi[m]).collect();
                for a in 0..d.ni() {
                    if self.m_action.get_parts(f, mask, &comp, &[a]) != self.induced.get_parts(f, mask, &xs, &[a]) {
                        return Some(format!("induced action depends on representatives at {comp:?}"));
                    }
                }
            }
        }
        None
    }

    /// `d . pi` for a derivation `d: Q -> A^I`.
    pub fn inflation1(&self, d: &[usize]) -> Vec<usize> {
        self.extension.pi.iter().map(|&x| d[x]).collect()
    }

    /// `T' . pi` for a cocycle over `(Q, A^I)`, with the restricted action.
    pub fn inflation2(&self, t: &Cocycle) -> Cocycle {
        let (pi, nm) = (&self.extension.pi, self.m.size());
        let mut out = Cocycle::with_action(&self.m_datum, self.m_action.clone());
        for x in 0..nm {
            for y in 0..nm {
                out.plus[x * nm + y] = t.tplus(pi[x], pi[y]);
            }
        }
        for r in 0..self.m.modulus() {
            for x in 0..nm {
                out.scalar[r as usize * nm + x] = t.tr(r, pi[x]);
            }
        }
        for (f, o) in self.m.signature().ops.iter().enumerate() {
            for (k, xs) in TupleIter::new(nm, o.arity).enumerate() {
                let ys: Vec<usize> = xs.iter().map(|&x| pi[x]).collect();
                out.ops[f][k] = t.tf(f, &ys);
            }
        }
        out
    }

    /// `d . iota` for a derivation `d: M -> A^I`.
    pub fn restriction1(&self, d: &[usize]) -> Vec<usize> {
        self.extension.iota.iter().map(|&m| d[m]).collect()
    }

    /// The first failure of the square condition on `A^I` for `d: I -> A^I`.
    pub fn square_failure(&self, d: &[usize]) -> Option<String> {
        let b = &self.t.action;
        let qd = &self.q_datum;
        for (f, mask) in b.symbols() {
            let n = qd.sig().arity(f);
            let (inside, _) = split_mask(mask, n);
            for xs in TupleIter::new(qd.nq(), n) {
                if inside.iter().any(|&k| xs[k] != 0) {
                    continue;
                }
                for bs in TupleIter::new(self.i_datum.q.size(), n) {
                    if (0..n).any(|k| !inside.contains(&k) && bs[k] != 0) {
                        continue;
                    }
                    let lhs = d[b.get(f, mask, &xs, &bs)];
                    let rhs = if inside.len() == 1 {
                        let k = inside[0];
                        let mut av = vec![0; n];
                        av[k] = d[bs[k]];
                        self.induced.get(f, mask, &xs, &av)
                    } else {
                        0
                    };
                    if lhs != rhs {
                        return Some(format!("square condition fails for {} at {:?} | {:?}", qd.sig().name(f), xs, bs));
                    }
                }
            }
        }
        None
    }

    pub fn satisfies_square(&self, d: &[usize]) -> bool {
        self.square_failure(d).is_none()
    }

    /// The square condition for `d: I -> A` with coefficients in all of `A`:
    /// searches for `h: Q -> A` and returns it when found.
    pub fn square_general(&self, d: &[usize], budget: u128) -> Result<Option<Vec<usize>>> {
        let (nq, na) = (self.q_datum.nq(), self.a.size());
        let budget = budget.min(SQUARE_BUDGET);
        let e = &self.extension;
        let b = &self.t.action;
        for h in maps_vanishing_at_zero(nq, na, budget)? {
            let ok = b.symbols().into_iter().all(|(f, mask)| {
                let n = self.m.signature().arity(f);
                let (inside, _) = split_mask(mask, n);
                TupleIter::new(nq, n).all(|xs| {
                    if inside.iter().any(|&k| xs[k] != 0) {
                        return true;
                    }
                    TupleIter::new(e.i.size(), n).all(|bs| {
                        if (0..n).any(|k| !inside.contains(&k) && bs[k] != 0) {
                            return true;
                        }
                        // <0,x>_s<b,0> as elements of M
                        let ms: Vec<usize> =
                            (0..n).map(|k| if inside.contains(&k) { e.iota[bs[k]] } else { e.lift[xs[k]] }).collect();
                        let mut rhs = 0;
                        for i in 0..n {
                            let v = if inside.contains(&i) { d[bs[i]] } else { h[xs[i]] };
                            let mut av = vec![0; n];
                            av[i] = v;
                            rhs = self.a.add(rhs, self.action.get(f, 1 << i, &ms, &av));
                        }
                        d[b.get(f, mask, &xs, &bs)] == rhs
                    })
                })
            });
            if ok {
                return Ok(Some(h));
            }
        }
        Ok(None)
    }

    /// `d . T'` with the induced action, for any cocycle `T'` of `(Q, I)`.
    pub fn transgression_with(&self, d: &[usize], t: &Cocycle) -> Result<Cocycle> {
        if let Some(msg) = self.square_failure(d) {
            return Err(Error::SquareFails(msg));
        }
        let mut out = Cocycle::with_action(&self.q_datum, self.induced.clone());
        out.plus = t.plus.iter().map(|&v| d[v]).collect();
        out.scalar = t.scalar.iter().map(|&v| d[v]).collect();
        out.ops = t.ops.iter().map(|tab| tab.iter().map(|&v| d[v]).collect()).collect();
        Ok(out)
    }

    /// `delta_T(d) = d . T` for the cocycle of the extension.
    pub fn transgression(&self, d: &[usize]) -> Result<Cocycle> {
        self.transgression_with(d, &self.t)
    }

    /// `m -> d(l(pi m) - m)`, whose coboundary is the inflation of `d . T`.
    pub fn inflation_witness(&self, d: &[usize]) -> Vec<usize> {
        let e = &self.extension;
        let inv = e.iota_inv();
        (0..self.m.size()).map(|m| d[inv[self.m.sub(e.lift[e.pi[m]], m)]]).collect()
    }
}

/// Outcome of checking the five-term sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HsReport {
    /// Orders of `H^1(Q)`, `H^1(M)`, `H^1(I)^square`, `H^2(Q)`, `H^2(M)`.
    pub orders: [u128; 5],
    pub first_injective: bool,
    pub exact_at_h1m: bool,
    pub exact_at_square: bool,
    pub exact_at_h2q: bool,
    /// The transgressed cocycles are compatible and inflate to coboundaries.
    pub transgression_ok: bool,
    /// Principal derivations were closed within the depth bound.
    pub complete: bool,
    pub failures: Vec<String>,
}

impl HsReport {
    pub fn passed(&self) -> bool {
        self.first_injective && self.exact_at_h1m && self.exact_at_square && self.exact_at_h2q && self.transgression_ok
    }
}

/// Index of the class of `d` among the representatives.
fn h1_class(fc: &FirstCohomology, a: &Algebra, d: &[usize]) -> Option<usize> {
    fc.representatives.iter().position(|r| {
        let diff: Vec<usize> = d.iter().zip(r).map(|(&x, &y)| a.sub(x, y)).collect();
        fc.principal.elements.contains(&diff)
    })
}

fn is_zero(coords: &[u64]) -> bool {
    coords.iter().all(|&c| c == 0)
}

/// Computes the five groups and checks exactness at every node.
pub fn verify_hs(h: &HsDatum, depth: usize, budget: u128) -> Result<HsReport> {
    let an = &h.a_null;
    let v = &h.variety;
    let h1q = h1(&h.q_datum, &h.induced, depth, budget)?;
    let h1m = h1(&h.m_datum, &h.m_action, depth, budget)?;
    let square: Vec<Vec<usize>> =
        derivations(&h.i_datum, &h.i_action)?.into_iter().filter(|d| h.satisfies_square(d)).collect();
    let h2q: AffineH2 = h2_affine(&h.q_datum, &h.induced, v, budget)?;
    let h2m: AffineH2 = h2_affine(&h.m_datum, &h.m_action, v, budget)?;
    let mut rep = HsReport {
        orders: [h1q.order() as u128, h1m.order() as u128, square.len() as u128, h2q.order(), h2m.order()],
        complete: h1q.principal.complete && h1m.principal.complete,
        ..Default::default()
    };
    let fail = |rep: &mut HsReport, msg: String| rep.failures.push(msg);

    // sigma on H^1: well defined and injective
    let mut sigma1: BTreeMap<usize, usize> = BTreeMap::new();
    let mut ok = true;
    for d in &h1q.derivations {
        let cq = h1_class(&h1q, an, d);
        let cm = h1_class(&h1m, an, &h.inflation1(d));
        match (cq, cm) {
            (Some(cq), Some(cm)) => {
                if *sigma1.entry(cq).or_insert(cm) != cm {
                    ok = false;
                    fail(&mut rep, format!("inflation is not well defined on the class of {d:?}"));
                }
            }
            _ => {
                ok = false;
                fail(&mut rep, format!("inflation of {d:?} is not a derivation of M"));
            }
        }
    }
    let image1: BTreeSet<usize> = sigma1.values().copied().collect();
    rep.first_injective = ok && image1.len() == sigma1.len();
    if image1.len() != sigma1.len() {
        fail(&mut rep, "inflation on H^1 is not injective".into());
    }

    // r: well defined, lands in the square derivations; ker r = im sigma
    let zero_i = vec![0; h.i_datum.nq()];
    let mut restr: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut ok = true;
    for d in &h1m.derivations {
        let r = h.restriction1(d);
        if !square.contains(&r) {
            ok = false;
            fail(&mut rep, format!("restriction of {d:?} fails the square condition"));
        }
        if let Some(c) = h1_class(&h1m, an, d) {
            if *restr.entry(c).or_insert_with(|| r.clone()) != r {
                ok = false;
                fail(&mut rep, "restriction is not well defined on classes".into());
            }
        }
    }
    let ker_r: BTreeSet<usize> = restr.iter().filter(|(_, r)| **r == zero_i).map(|(c, _)| *c).collect();
    rep.exact_at_h1m = ok && ker_r == image1;
    if ker_r != image1 {
        fail(&mut rep, format!("ker r = {ker_r:?} but im sigma = {image1:?}"));
    }

    // delta: im r = ker delta
    let image_r: BTreeSet<&Vec<usize>> = restr.values().collect();
    let mut ker_delta = BTreeSet::new();
    let mut image_delta: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut trans_ok = true;
    for d in &square {
        let dt = h.transgression(d)?;
        if !is_compatible(&h.q_datum, &dt, v)? {
            trans_ok = false;
            fail(&mut rep, format!("d . T is not compatible for d = {d:?}"));
            continue;
        }
        let w = h.inflation_witness(d);
        if coboundary(&h.m_datum, &w, &h.m_action).factor_key() != h.inflation2(&dt).factor_key() {
            trans_ok = false;
            fail(&mut rep, format!("inflation of d . T is not the coboundary of d . s for d = {d:?}"));
        }
        let c = h2q.class_of(&dt)?;
        if is_zero(&c) {
            ker_delta.insert(d);
        }
        image_delta.insert(c);
    }
    rep.transgression_ok = trans_ok;
    rep.exact_at_square = image_r == ker_delta;
    if !rep.exact_at_square {
        fail(&mut rep, format!("im r has {} elements, ker delta has {}", image_r.len(), ker_delta.len()));
    }

    // sigma on H^2: im delta = ker sigma
    let mut ker_sigma2 = BTreeSet::new();
    for (coords, t) in &h2q.representatives {
        let c = h2m.class_of(&h.inflation2(t))?;
        if is_zero(&c) {
            ker_sigma2.insert(coords.clone());
        }
    }
    rep.exact_at_h2q = image_delta == ker_sigma2;
    if !rep.exact_at_h2q {
        fail(&mut rep, format!("im delta = {image_delta:?} but ker sigma = {ker_sigma2:?}"));
    }
    Ok(rep)
}
