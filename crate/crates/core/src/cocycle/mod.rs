//! Actions and 2-cocycles of a datum `(Q, I)`, the semidirect product,
//! extensions, coboundaries and equivalence, and the structural
//! characterizations of abelian and central kernels.

mod coboundary;
mod extension;
mod structure;

pub use coboundary::{coboundary, equivalent, equivalent_by_iso, is_h2_morphism, maps_vanishing_at_zero, twist, MorphismReading};
pub use extension::{extract_cocycle, psi, realization_failure, realizes, semidirect, ExtensionRecord, Semidirect};
pub use structure::{compatibility, decompose, is_compatible, kernel_kind, Compatibility, Decomposition, KernelKind};

use crate::algebra::{Algebra, Signature};
use crate::error::{Error, Result};
use crate::modcore::{tuple_index, TupleIter, ZmModule};

/// Budget for exhaustive searches over maps and candidate cocycles.
pub const DEFAULT_BUDGET: u128 = 1 << 20;

/// Prints an element compactly: a bare residue for cyclic modules.
pub fn show_elem(m: &ZmModule, x: usize) -> String {
    if m.rank() == 1 {
        m.coords(x)[0].to_string()
    } else {
        m.element(x).to_string()
    }
}

pub fn show_args(m: &ZmModule, xs: &[usize]) -> String {
    format!("({})", xs.iter().map(|&x| show_elem(m, x)).collect::<Vec<_>>().join(","))
}

/// The datum: quotient `Q` and kernel `I` over one signature and modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Datum {
    pub q: Algebra,
    pub i: Algebra,
}

impl Datum {
    pub fn new(q: Algebra, i: Algebra) -> Result<Datum> {
        if q.signature() != i.signature() {
            return Err(Error::Validation("Q and I have different signatures".into()));
        }
        if q.modulus() != i.modulus() {
            return Err(Error::Validation("Q and I are modules over different rings".into()));
        }
        Ok(Datum { q, i })
    }

    pub fn modulus(&self) -> u64 {
        self.q.modulus()
    }

    pub fn nq(&self) -> usize {
        self.q.size()
    }

    pub fn ni(&self) -> usize {
        self.i.size()
    }

    pub fn sig(&self) -> &Signature {
        self.q.signature()
    }

    /// `I` is abelian: every operation vanishes on it.
    pub fn kernel_abelian(&self) -> bool {
        self.i.ops_vanish()
    }
}

/// Nonempty proper subsets of `[n]` as bitmasks, ascending.
pub fn proper_subsets(n: usize) -> Vec<u32> {
    if n < 2 {
        return Vec::new();
    }
    (1..(1u32 << n) - 1).collect()
}

/// Slots inside and outside `mask`, ascending.
pub fn split_mask(mask: u32, n: usize) -> (Vec<usize>, Vec<usize>) {
    (0..n).partition(|&k| mask & (1 << k) != 0)
}

pub fn fmt_mask(mask: u32, n: usize) -> String {
    let (inside, _) = split_mask(mask, n);
    format!("{{{}}}", inside.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join(","))
}

/// An action `Q * I`: for each operation `f` and nonempty proper subset `s`,
/// a table of `a(f,s)` indexed by the `Q`-arguments outside `s` followed by
/// the `I`-arguments inside `s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Action {
    nq: usize,
    ni: usize,
    arities: Vec<usize>,
    tables: Vec<Vec<Vec<usize>>>,
}

impl Action {
    pub fn trivial(d: &Datum) -> Action {
        let (nq, ni) = (d.nq(), d.ni());
        let arities: Vec<usize> = d.sig().ops.iter().map(|o| o.arity).collect();
        let tables = arities
            .iter()
            .map(|&n| {
                (0..(1u32 << n))
                    .map(|mask| {
                        if mask == 0 || mask == (1 << n) - 1 {
                            Vec::new()
                        } else {
                            let k = mask.count_ones() as usize;
                            vec![0; nq.pow((n - k) as u32) * ni.pow(k as u32)]
                        }
                    })
                    .collect()
            })
            .collect();
        Action { nq, ni, arities, tables }
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn table(&self, f: usize, mask: u32) -> &[usize] {
        &self.tables[f][mask as usize]
    }

    pub fn table_mut(&mut self, f: usize, mask: u32) -> &mut Vec<usize> {
        &mut self.tables[f][mask as usize]
    }

    fn parts_index(&self, mask: u32, comp_q: &[usize], s_a: &[usize]) -> usize {
        let k = mask.count_ones();
        tuple_index(self.nq, comp_q) * self.ni.pow(k) + tuple_index(self.ni, s_a)
    }

    /// `a(f,s)(q, a)` for full tuples `q` and `a`.
    pub fn get(&self, f: usize, mask: u32, q: &[usize], a: &[usize]) -> usize {
        let n = self.arities[f];
        let mut iq = 0;
        let mut ia = 0;
        for k in 0..n {
            if mask & (1 << k) != 0 {
                ia = ia * self.ni + a[k];
            } else {
                iq = iq * self.nq + q[k];
            }
        }
        self.tables[f][mask as usize][iq * self.ni.pow(mask.count_ones()) + ia]
    }

    pub fn get_parts(&self, f: usize, mask: u32, comp_q: &[usize], s_a: &[usize]) -> usize {
        self.tables[f][mask as usize][self.parts_index(mask, comp_q, s_a)]
    }

    pub fn set_parts(&mut self, f: usize, mask: u32, comp_q: &[usize], s_a: &[usize], v: usize) {
        let idx = self.parts_index(mask, comp_q, s_a);
        self.tables[f][mask as usize][idx] = v;
    }

    /// Iterates `(f, mask)` over every action symbol.
    pub fn symbols(&self) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        for (f, &n) in self.arities.iter().enumerate() {
            for mask in proper_subsets(n) {
                out.push((f, mask));
            }
        }
        out
    }

    pub fn is_trivial(&self) -> bool {
        self.tables.iter().flatten().flatten().all(|&v| v == 0)
    }

    /// Only the terms `a(f,s)` with `|s| = 1` may be nonzero.
    pub fn is_unary(&self) -> bool {
        self.symbols()
            .into_iter()
            .filter(|&(_, mask)| mask.count_ones() > 1)
            .all(|(f, mask)| self.table(f, mask).iter().all(|&v| v == 0))
    }

    /// Checks the action clause of the cocycle definition.
    pub fn validate(&self, d: &Datum) -> Result<()> {
        let i = &d.i;
        let qm = d.q.module();
        for (f, mask) in self.symbols() {
            let n = self.arities[f];
            let (inside, outside) = split_mask(mask, n);
            let table = self.table(f, mask);
            if table.iter().any(|&v| v >= self.ni) {
                return Err(Error::Validation(format!("a({},{}) has an out-of-range value", d.sig().name(f), fmt_mask(mask, n))));
            }
            let label = |cq: &[usize], sa: &[usize]| {
                format!("a({},{})({} | {})", d.sig().name(f), fmt_mask(mask, n), show_args(qm, cq), show_args(i.module(), sa))
            };
            for cq in TupleIter::new(self.nq, outside.len()) {
                let zero_arg = cq.contains(&0);
                for sa in TupleIter::new(self.ni, inside.len()) {
                    let v = self.get_parts(f, mask, &cq, &sa);
                    if zero_arg && v != 0 {
                        return Err(Error::clause("T4", label(&cq, &sa)));
                    }
                    for slot in 0..inside.len() {
                        for b in 0..self.ni {
                            let mut t = sa.clone();
                            t[slot] = b;
                            let vb = self.get_parts(f, mask, &cq, &t);
                            t[slot] = i.add(sa[slot], b);
                            if self.get_parts(f, mask, &cq, &t) != i.add(v, vb) {
                                return Err(Error::clause("T4", format!("{} (additivity in slot {})", label(&cq, &sa), inside[slot] + 1)));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn zip(&self, other: &Action, op: impl Fn(usize, usize) -> usize) -> Action {
        let mut out = self.clone();
        for (tf, of) in out.tables.iter_mut().zip(&other.tables) {
            for (t, o) in tf.iter_mut().zip(of) {
                for (v, &w) in t.iter_mut().zip(o) {
                    *v = op(*v, w);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Action, i: &Algebra) -> Action {
        self.zip(other, |a, b| i.add(a, b))
    }

    pub fn sub(&self, other: &Action, i: &Algebra) -> Action {
        self.zip(other, |a, b| i.sub(a, b))
    }

    pub fn key(&self) -> Vec<usize> {
        self.tables.iter().flatten().flatten().copied().collect()
    }

    /// Applies `map: I -> J` to every value; `map` must be a homomorphism
    /// for the result to be an action again.
    pub fn map_values(&self, map: &[usize], nj: usize) -> Action {
        let mut out = self.clone();
        out.ni = nj;
        for tf in out.tables.iter_mut() {
            for t in tf.iter_mut() {
                for v in t.iter_mut() {
                    *v = map[*v];
                }
            }
        }
        out
    }
}

/// A 2-cocycle: factor sets `T_+`, `T_r`, `T_f` and an action.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cocycle {
    pub action: Action,
    /// `T_+(x,y)` at `x * |Q| + y`.
    pub plus: Vec<usize>,
    /// `T_r(x)` at `r * |Q| + x`.
    pub scalar: Vec<usize>,
    /// `T_f` indexed by `tuple_index(|Q|, x)`.
    pub ops: Vec<Vec<usize>>,
}

impl Cocycle {
    pub fn zero(d: &Datum) -> Cocycle {
        Cocycle::with_action(d, Action::trivial(d))
    }

    /// The cocycle whose only nonzero terms are the given action.
    pub fn with_action(d: &Datum, action: Action) -> Cocycle {
        let nq = d.nq();
        Cocycle {
            action,
            plus: vec![0; nq * nq],
            scalar: vec![0; d.modulus() as usize * nq],
            ops: d.sig().ops.iter().map(|o| vec![0; nq.pow(o.arity as u32)]).collect(),
        }
    }

    fn nq(&self) -> usize {
        self.action.nq
    }

    pub fn tplus(&self, x: usize, y: usize) -> usize {
        self.plus[x * self.nq() + y]
    }

    pub fn tr(&self, r: u64, x: usize) -> usize {
        let m = (self.scalar.len() / self.nq().max(1)) as u64;
        self.scalar[(r % m) as usize * self.nq() + x]
    }

    pub fn tf(&self, f: usize, xs: &[usize]) -> usize {
        self.ops[f][tuple_index(self.nq(), xs)]
    }

    /// Checks the normalization clauses T1-T3 and the action clause T4.
    pub fn validate(&self, d: &Datum) -> Result<()> {
        let nq = d.nq();
        let ni = d.ni();
        let qm = d.q.module();
        if self.plus.len() != nq * nq
            || self.scalar.len() != d.modulus() as usize * nq
            || self.ops.len() != d.sig().len()
            || self.action.nq != nq
            || self.action.ni != ni
        {
            return Err(Error::DimensionMismatch("cocycle tables do not match the datum".into()));
        }
        let all = self.plus.iter().chain(&self.scalar).chain(self.ops.iter().flatten());
        if all.copied().any(|v| v >= ni) {
            return Err(Error::Validation("cocycle value out of range".into()));
        }
        for x in 0..nq {
            if self.tplus(x, 0) != 0 {
                return Err(Error::clause("T1", show_args(qm, &[x, 0])));
            }
            if self.tplus(0, x) != 0 {
                return Err(Error::clause("T1", show_args(qm, &[0, x])));
            }
        }
        for r in 0..d.modulus() {
            if self.tr(r, 0) != 0 {
                return Err(Error::clause("T2", format!("r={r}, {}", show_args(qm, &[0]))));
            }
        }
        for (f, o) in d.sig().ops.iter().enumerate() {
            if self.ops[f].len() != nq.pow(o.arity as u32) {
                return Err(Error::DimensionMismatch(format!("T{} table has the wrong size", o.name)));
            }
            for xs in TupleIter::new(nq, o.arity) {
                if xs.contains(&0) && self.tf(f, &xs) != 0 {
                    return Err(Error::clause("T3", format!("T{}{}", o.name, show_args(qm, &xs))));
                }
            }
        }
        self.action.validate(d)
    }

    pub fn plus_vanishes(&self) -> bool {
        self.plus.iter().all(|&v| v == 0)
    }

    pub fn is_action_trivial(&self) -> bool {
        self.action.is_trivial()
    }

    /// Linear: every action term is unary in `I`.
    pub fn is_linear(&self) -> bool {
        self.action.is_unary()
    }

    fn zip(&self, other: &Cocycle, op: impl Fn(usize, usize) -> usize + Copy) -> (Vec<usize>, Vec<usize>, Vec<Vec<usize>>) {
        let z = |a: &[usize], b: &[usize]| a.iter().zip(b).map(|(&x, &y)| op(x, y)).collect::<Vec<_>>();
        (
            z(&self.plus, &other.plus),
            z(&self.scalar, &other.scalar),
            self.ops.iter().zip(&other.ops).map(|(a, b)| z(a, b)).collect(),
        )
    }

    /// Pointwise sum of every component, action included.
    pub fn add(&self, other: &Cocycle, i: &Algebra) -> Cocycle {
        let (plus, scalar, ops) = self.zip(other, |a, b| i.add(a, b));
        Cocycle { action: self.action.add(&other.action, i), plus, scalar, ops }
    }

    pub fn sub(&self, other: &Cocycle, i: &Algebra) -> Cocycle {
        let (plus, scalar, ops) = self.zip(other, |a, b| i.sub(a, b));
        Cocycle { action: self.action.sub(&other.action, i), plus, scalar, ops }
    }

    /// Sum of factor sets keeping the action of `self`.
    pub fn add_factor_sets(&self, other: &Cocycle, i: &Algebra) -> Cocycle {
        let (plus, scalar, ops) = self.zip(other, |a, b| i.add(a, b));
        Cocycle { action: self.action.clone(), plus, scalar, ops }
    }

    /// Ordering key: `T_+`, then `T_r`, then each `T_f`, then the action.
    pub fn key(&self) -> Vec<usize> {
        let mut k = self.factor_key();
        k.extend(self.action.key());
        k
    }

    pub fn factor_key(&self) -> Vec<usize> {
        let mut k = self.plus.clone();
        k.extend(&self.scalar);
        for t in &self.ops {
            k.extend(t);
        }
        k
    }

    /// Whether `T_r(x)` equals the telescoping sum of `T_+(jx, x)` for `j < r`.
    pub fn scalar_matches_plus(&self, d: &Datum) -> bool {
        (0..d.modulus()).all(|r| {
            (0..d.nq()).all(|x| {
                let mut acc = 0;
                for j in 1..r {
                    acc = d.i.add(acc, self.tplus(d.q.scale(j, x), x));
                }
                self.tr(r, x) == acc
            })
        })
    }

    /// Fills `T_r` from `T_+` by the telescoping formula.
    pub fn derive_scalar(&mut self, d: &Datum) {
        let nq = d.nq();
        for r in 0..d.modulus() {
            for x in 0..nq {
                let mut acc = 0;
                for j in 1..r {
                    acc = d.i.add(acc, self.tplus(d.q.scale(j, x), x));
                }
                self.scalar[r as usize * nq + x] = acc;
            }
        }
    }

    /// Precomposition with `beta: P -> Q` in every `Q`-argument; the result is a
    /// cocycle of `(P, I)` when `beta` is a homomorphism.
    pub fn pullback(&self, target: &Datum, beta: &[usize]) -> Cocycle {
        let np = target.nq();
        let mut out = Cocycle::zero(target);
        for x in 0..np {
            for y in 0..np {
                out.plus[x * np + y] = self.tplus(beta[x], beta[y]);
            }
        }
        for r in 0..target.modulus() {
            for x in 0..np {
                out.scalar[r as usize * np + x] = self.tr(r, beta[x]);
            }
        }
        for (f, o) in target.sig().ops.iter().enumerate() {
            for (k, xs) in TupleIter::new(np, o.arity).enumerate() {
                let ys: Vec<usize> = xs.iter().map(|&x| beta[x]).collect();
                out.ops[f][k] = self.tf(f, &ys);
            }
        }
        for (f, mask) in out.action.symbols() {
            let n = target.sig().arity(f);
            let (inside, outside) = split_mask(mask, n);
            for cq in TupleIter::new(np, outside.len()) {
                let mapped: Vec<usize> = cq.iter().map(|&x| beta[x]).collect();
                for sa in TupleIter::new(target.ni(), inside.len()) {
                    let v = self.action.get_parts(f, mask, &mapped, &sa);
                    out.action.set_parts(f, mask, &cq, &sa, v);
                }
            }
        }
        out
    }
}

/// Evaluates `f^I(a) + sum_s a(f,s)(x, a) + T_f(x)`, the first coordinate of
/// `F_f` in the semidirect product.
pub fn semidirect_op_first(d: &Datum, t: &Cocycle, f: usize, x: &[usize], a: &[usize]) -> usize {
    let i = &d.i;
    let mut acc = i.add(i.op(f, a), t.tf(f, x));
    for mask in proper_subsets(x.len()) {
        acc = i.add(acc, t.action.get(f, mask, x, a));
    }
    acc
}
