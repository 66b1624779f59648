//! Semidirect products, extension records, realization and cocycle extraction.

use super::{proper_subsets, semidirect_op_first, show_args, split_mask, Cocycle, Datum};
use crate::algebra::{ideal_generated, is_homomorphism, tables_homomorphism, Algebra, Ideal, RawAlgebra, Tables};
use crate::error::{Error, Result};
use crate::modcore::TupleIter;

/// The raw operation tables of `I x_T Q` on pairs `<a,x>` stored at `a * |Q| + x`.
#[derive(Clone, Debug)]
pub struct Semidirect {
    pub raw: RawAlgebra,
    pub nq: usize,
    /// `Ok` when the tables form a legal algebra.
    pub validity: Result<()>,
}

impl Semidirect {
    pub fn pair(&self, a: usize, x: usize) -> usize {
        a * self.nq + x
    }

    pub fn unpair(&self, p: usize) -> (usize, usize) {
        (p / self.nq, p % self.nq)
    }

    pub fn is_valid(&self) -> bool {
        self.validity.is_ok()
    }

    pub fn tables(&self) -> &Tables {
        &self.raw.tables
    }

    /// The canonical extension `I -> I x_T Q -> Q` with lifting `x -> <0,x>`.
    /// The returned map sends pair indices to indices of the extension algebra.
    pub fn extension(&self, d: &Datum) -> Result<(ExtensionRecord, Vec<usize>)> {
        self.validity.clone()?;
        let (m, map) = Algebra::from_raw(&self.raw)?;
        let mut pi = vec![0; m.size()];
        for p in 0..self.raw.size() {
            pi[map[p]] = self.unpair(p).1;
        }
        let iota = (0..d.ni()).map(|a| map[self.pair(a, 0)]).collect();
        let lift = (0..d.nq()).map(|x| map[self.pair(0, x)]).collect();
        let e = ExtensionRecord { m, q: d.q.clone(), i: d.i.clone(), pi, iota, lift };
        e.validate()?;
        Ok((e, map))
    }
}

/// Builds `I x_T Q` from the three defining formulas.
pub fn semidirect(d: &Datum, t: &Cocycle) -> Result<Semidirect> {
    t.validate(d)?;
    let (nq, ni) = (d.nq(), d.ni());
    let n = nq * ni;
    let m = d.modulus();
    let (q, i) = (&d.q, &d.i);
    let unpair = |p: usize| (p / nq, p % nq);
    let pair = |a: usize, x: usize| a * nq + x;
    let mut add = vec![0; n * n];
    for p in 0..n {
        let (a, x) = unpair(p);
        for r in 0..n {
            let (b, y) = unpair(r);
            add[p * n + r] = pair(i.add(i.add(a, b), t.tplus(x, y)), q.add(x, y));
        }
    }
    let neg = (0..n)
        .map(|p| {
            let (a, x) = unpair(p);
            let nx = q.neg(x);
            pair(i.sub(i.neg(a), t.tplus(x, nx)), nx)
        })
        .collect();
    let mut scale = vec![0; m as usize * n];
    for r in 0..m {
        for p in 0..n {
            let (a, x) = unpair(p);
            scale[r as usize * n + p] = pair(i.add(i.scale(r, a), t.tr(r, x)), q.scale(r, x));
        }
    }
    let mut ops = Vec::new();
    for (f, o) in d.sig().ops.iter().enumerate() {
        let mut table = vec![0; n.pow(o.arity as u32)];
        for (k, ps) in TupleIter::new(n, o.arity).enumerate() {
            let (a, x): (Vec<usize>, Vec<usize>) = ps.iter().map(|&p| unpair(p)).unzip();
            table[k] = pair(semidirect_op_first(d, t, f, &x, &a), q.op(f, &x));
        }
        ops.push(table);
    }
    let raw = RawAlgebra {
        sig: d.sig().clone(),
        tables: Tables { n, modulus: m, add, neg, scale, arities: d.sig().ops.iter().map(|o| o.arity).collect(), ops },
    };
    let validity = raw.validity();
    Ok(Semidirect { raw, nq, validity })
}

/// An extension `0 -> I -> M -> Q -> 0` with a chosen lifting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionRecord {
    pub m: Algebra,
    pub q: Algebra,
    pub i: Algebra,
    /// The surjection `M -> Q`.
    pub pi: Vec<usize>,
    /// The embedding `I -> M`.
    pub iota: Vec<usize>,
    /// A set map `Q -> M` with `pi . lift = id` and `lift(0) = 0`.
    pub lift: Vec<usize>,
}

impl ExtensionRecord {
    /// Uses the minimal-index representative of each fiber as the lifting.
    pub fn new(m: Algebra, q: Algebra, i: Algebra, pi: Vec<usize>, iota: Vec<usize>) -> Result<Self> {
        let lift = Self::default_lift(&pi, q.size());
        let e = ExtensionRecord { m, q, i, pi, iota, lift };
        e.validate()?;
        Ok(e)
    }

    pub fn default_lift(pi: &[usize], nq: usize) -> Vec<usize> {
        let mut lift = vec![usize::MAX; nq];
        for (mm, &x) in pi.iter().enumerate() {
            if x < nq && lift[x] == usize::MAX {
                lift[x] = mm;
            }
        }
        lift
    }

    pub fn with_lift(mut self, lift: Vec<usize>) -> Result<Self> {
        self.lift = lift;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let (m, q, i) = (&self.m, &self.q, &self.i);
        if self.pi.len() != m.size() || self.iota.len() != i.size() || self.lift.len() != q.size() {
            return Err(Error::DimensionMismatch("extension maps have the wrong length".into()));
        }
        if !is_homomorphism(m, q, &self.pi) {
            return Err(Error::Validation("projection is not a homomorphism".into()));
        }
        let mut hit = vec![false; q.size()];
        self.pi.iter().for_each(|&x| hit[x] = true);
        if hit.iter().any(|h| !h) {
            return Err(Error::Validation("projection is not surjective".into()));
        }
        if !is_homomorphism(i, m, &self.iota) {
            return Err(Error::Validation("embedding is not a homomorphism".into()));
        }
        let mut seen = vec![false; m.size()];
        for &y in &self.iota {
            if seen[y] {
                return Err(Error::Validation("embedding is not injective".into()));
            }
            seen[y] = true;
        }
        let kernel: Vec<usize> = (0..m.size()).filter(|&y| self.pi[y] == 0).collect();
        if kernel.len() != i.size() || kernel.iter().any(|&y| !seen[y]) {
            return Err(Error::Validation("image of the embedding is not the kernel of the projection".into()));
        }
        if self.lift.iter().enumerate().any(|(x, &y)| y >= m.size() || self.pi[y] != x) {
            return Err(Error::Validation("lifting is not a section of the projection".into()));
        }
        if q.size() > 0 && self.lift[0] != 0 {
            return Err(Error::Validation("lifting does not fix zero".into()));
        }
        Ok(())
    }

    pub fn datum(&self) -> Datum {
        Datum { q: self.q.clone(), i: self.i.clone() }
    }

    /// Inverse of the embedding on its image, `usize::MAX` elsewhere.
    pub fn iota_inv(&self) -> Vec<usize> {
        let mut inv = vec![usize::MAX; self.m.size()];
        for (a, &y) in self.iota.iter().enumerate() {
            inv[y] = a;
        }
        inv
    }

    /// The kernel `iota(I)` as an ideal of `M`.
    pub fn kernel(&self) -> Ideal {
        ideal_generated(&self.m, &self.iota)
    }

    /// All liftings, the first fiber coordinate most significant.
    pub fn liftings(&self) -> Vec<Vec<usize>> {
        let nq = self.q.size();
        let fibers: Vec<Vec<usize>> =
            (0..nq).map(|x| if x == 0 { vec![0] } else { (0..self.m.size()).filter(|&y| self.pi[y] == x).collect() }).collect();
        crate::modcore::cartesian(&fibers)
    }
}

/// The cocycle defined by the lifting of `e`.
pub fn extract_cocycle(e: &ExtensionRecord) -> Cocycle {
    let d = e.datum();
    let inv = e.iota_inv();
    let (m, q) = (&e.m, &e.q);
    let l = &e.lift;
    let nq = q.size();
    let mut t = Cocycle::zero(&d);
    for x in 0..nq {
        for y in 0..nq {
            t.plus[x * nq + y] = inv[m.sub(m.add(l[x], l[y]), l[q.add(x, y)])];
        }
    }
    for r in 0..d.modulus() {
        for x in 0..nq {
            t.scalar[r as usize * nq + x] = inv[m.sub(m.scale(r, l[x]), l[q.scale(r, x)])];
        }
    }
    for (f, o) in d.sig().ops.iter().enumerate() {
        for (k, xs) in TupleIter::new(nq, o.arity).enumerate() {
            let lx: Vec<usize> = xs.iter().map(|&x| l[x]).collect();
            t.ops[f][k] = inv[m.sub(m.op(f, &lx), l[q.op(f, &xs)])];
        }
    }
    for (f, mask) in t.action.symbols() {
        let n = d.sig().arity(f);
        let (inside, outside) = split_mask(mask, n);
        for cq in TupleIter::new(nq, outside.len()) {
            for sa in TupleIter::new(d.ni(), inside.len()) {
                let mut args = vec![0; n];
                for (k, &slot) in outside.iter().enumerate() {
                    args[slot] = l[cq[k]];
                }
                for (k, &slot) in inside.iter().enumerate() {
                    args[slot] = e.iota[sa[k]];
                }
                let v = inv[m.op(f, &args)];
                t.action.set_parts(f, mask, &cq, &sa, v);
            }
        }
    }
    t
}

/// The first realization clause that fails for `t` on `e`, if any.
pub fn realization_failure(e: &ExtensionRecord, t: &Cocycle) -> Option<String> {
    let (m, q) = (&e.m, &e.q);
    let qm = q.module();
    let l = &e.lift;
    let io = &e.iota;
    let nq = q.size();
    for x in 0..nq {
        for y in 0..nq {
            if io[t.tplus(x, y)] != m.sub(m.add(l[x], l[y]), l[q.add(x, y)]) {
                return Some(format!("R1 at {}", show_args(qm, &[x, y])));
            }
        }
    }
    for r in 0..q.modulus() {
        for x in 0..nq {
            if io[t.tr(r, x)] != m.sub(m.scale(r, l[x]), l[q.scale(r, x)]) {
                return Some(format!("R2 at r={r}, {}", show_args(qm, &[x])));
            }
        }
    }
    for (f, o) in q.signature().ops.iter().enumerate() {
        for xs in TupleIter::new(nq, o.arity) {
            let lx: Vec<usize> = xs.iter().map(|&x| l[x]).collect();
            if io[t.tf(f, &xs)] != m.sub(m.op(f, &lx), l[q.op(f, &xs)]) {
                return Some(format!("R3 at T{}{}", o.name, show_args(qm, &xs)));
            }
        }
        for mask in proper_subsets(o.arity) {
            for xs in TupleIter::new(nq, o.arity) {
                for a in TupleIter::new(e.i.size(), o.arity) {
                    let args: Vec<usize> =
                        (0..o.arity).map(|k| if mask & (1 << k) != 0 { io[a[k]] } else { l[xs[k]] }).collect();
                    if io[t.action.get(f, mask, &xs, &a)] != m.op(f, &args) {
                        return Some(format!("R4 at a({},{})", o.name, super::fmt_mask(mask, o.arity)));
                    }
                }
            }
        }
    }
    None
}

pub fn realizes(e: &ExtensionRecord, t: &Cocycle) -> bool {
    realization_failure(e, t).is_none()
}

/// The standard map `a -> <a - l(pi(a)), pi(a)>` into pair indices, and whether
/// it is an isomorphism onto `I x_T Q` for the extracted cocycle.
pub fn psi(e: &ExtensionRecord) -> Result<(Vec<usize>, bool)> {
    let d = e.datum();
    let t = extract_cocycle(e);
    let sd = semidirect(&d, &t)?;
    let inv = e.iota_inv();
    let m = &e.m;
    let map: Vec<usize> = (0..m.size())
        .map(|y| {
            let x = e.pi[y];
            sd.pair(inv[m.sub(y, e.lift[x])], x)
        })
        .collect();
    let mut seen = vec![false; sd.raw.size()];
    let mut bijective = map.len() == sd.raw.size();
    for &p in &map {
        if seen[p] {
            bijective = false;
        }
        seen[p] = true;
    }
    let ok = bijective && tables_homomorphism(m.tables(), sd.tables(), &map);
    Ok((map, ok))
}
