//! Algebras: a finite `Z/m`-module with multilinear operations given by
//! structure constants on generator tuples.

mod ideal;
mod iso;

pub use ideal::{commutator, ideal_generated, quotient, series, subalgebra, Ideal, Series, SeriesKind};
pub use iso::{find_isomorphism, is_homomorphism, is_homomorphism_linmap, tables_homomorphism};

use crate::error::{Error, Result};
use crate::modcore::{decompose_group, tuple_index, Element, TupleIter, ZmModule};

/// An operation symbol of arity at least one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpSymbol {
    pub name: String,
    pub arity: usize,
}

/// The ordered list of operation symbols `F`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Signature {
    pub ops: Vec<OpSymbol>,
}

impl Signature {
    pub fn new(ops: &[(&str, usize)]) -> Result<Self> {
        let mut out = Signature::default();
        for &(name, arity) in ops {
            out.push(name, arity)?;
        }
        Ok(out)
    }

    pub fn push(&mut self, name: &str, arity: usize) -> Result<()> {
        if arity == 0 {
            return Err(Error::Validation(format!("operation `{name}` must have arity at least 1")));
        }
        if self.index_of(name).is_some() {
            return Err(Error::Validation(format!("operation `{name}` declared twice")));
        }
        self.ops.push(OpSymbol { name: name.to_string(), arity });
        Ok(())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name == name)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn arity(&self, i: usize) -> usize {
        self.ops[i].arity
    }

    pub fn name(&self, i: usize) -> &str {
        &self.ops[i].name
    }
}

/// Dense operation tables over element indices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tables {
    pub n: usize,
    pub modulus: u64,
    pub add: Vec<usize>,
    pub neg: Vec<usize>,
    /// `scale[r * n + x] = r . x`.
    pub scale: Vec<usize>,
    pub arities: Vec<usize>,
    /// `ops[f][tuple_index(n, args)]`.
    pub ops: Vec<Vec<usize>>,
}

impl Tables {
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.n + b]
    }

    pub fn neg(&self, a: usize) -> usize {
        self.neg[a]
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn scale(&self, r: u64, a: usize) -> usize {
        self.scale[(r % self.modulus) as usize * self.n + a]
    }

    pub fn apply(&self, f: usize, args: &[usize]) -> usize {
        self.ops[f][tuple_index(self.n, args)]
    }

    /// Checks the abelian group laws, the scalar action and multilinearity.
    /// The error names the first violated clause.
    pub fn validate(&self, sig: &Signature) -> Result<()> {
        let n = self.n;
        let show = |t: &[usize]| {
            format!("({})", t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        };
        for a in 0..n {
            if self.add(a, 0) != a || self.add(0, a) != a {
                return Err(Error::clause("additive identity", show(&[a])));
            }
            if self.add(a, self.neg(a)) != 0 {
                return Err(Error::clause("additive inverse", show(&[a])));
            }
            for b in 0..n {
                if self.add(a, b) != self.add(b, a) {
                    return Err(Error::clause("commutativity of +", show(&[a, b])));
                }
                for c in 0..n {
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                        return Err(Error::clause("associativity of +", show(&[a, b, c])));
                    }
                }
            }
            let mut acc = 0;
            for r in 0..self.modulus {
                if self.scale(r, a) != acc {
                    return Err(Error::clause("scalar action", format!("r={r}, x={a}")));
                }
                acc = self.add(acc, a);
            }
            if acc != 0 {
                return Err(Error::clause("exponent divides modulus", show(&[a])));
            }
        }
        for (f, op) in sig.ops.iter().enumerate() {
            let ar = op.arity;
            for slot in 0..ar {
                for mut t in TupleIter::new(n, ar) {
                    let y = t[slot];
                    for z in 0..n {
                        t[slot] = y;
                        let v1 = self.apply(f, &t);
                        t[slot] = z;
                        let v2 = self.apply(f, &t);
                        t[slot] = self.add(y, z);
                        let v3 = self.apply(f, &t);
                        if v3 != self.add(v1, v2) {
                            t[slot] = y;
                            return Err(Error::clause(
                                &format!("additivity of {} in slot {}", op.name, slot + 1),
                                format!("{} + {z}", show(&t)),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// A multilinear operation stored by its values on generator tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearOp {
    pub name: String,
    pub arity: usize,
    /// Element indices indexed by `tuple_index(rank, generator tuple)`.
    pub constants: Vec<usize>,
}

/// A finite module with multilinear operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algebra {
    module: ZmModule,
    sig: Signature,
    ops: Vec<MultilinearOp>,
    tables: Tables,
}

/// An operation table on a finite set, not necessarily a legal algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawAlgebra {
    pub sig: Signature,
    pub tables: Tables,
}

fn module_tables(module: &ZmModule) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let n = module.size();
    let m = module.modulus();
    let mut add = vec![0; n * n];
    for a in 0..n {
        for b in 0..n {
            add[a * n + b] = module.add(a, b);
        }
    }
    let neg = (0..n).map(|a| module.neg(a)).collect();
    let mut scale = vec![0; m as usize * n];
    for r in 0..m {
        for a in 0..n {
            scale[r as usize * n + a] = module.scale(r, a);
        }
    }
    (add, neg, scale)
}

impl Algebra {
    /// Builds an algebra from structure constants, one vector per symbol of `sig`.
    pub fn new(module: ZmModule, sig: Signature, constants: Vec<Vec<usize>>) -> Result<Self> {
        if constants.len() != sig.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} constant tables for {} operations",
                constants.len(),
                sig.len()
            )));
        }
        let k = module.rank();
        let n = module.size();
        let mut ops = Vec::new();
        let mut op_tables = Vec::new();
        for (f, c) in constants.into_iter().enumerate() {
            let ar = sig.arity(f);
            let name = sig.name(f).to_string();
            if c.len() != k.pow(ar as u32) {
                return Err(Error::DimensionMismatch(format!(
                    "operation `{name}` needs {} structure constants, got {}",
                    k.pow(ar as u32),
                    c.len()
                )));
            }
            for gens in TupleIter::new(k, ar) {
                let v = c[tuple_index(k, &gens)];
                if v >= n {
                    return Err(Error::DimensionMismatch(format!("value index {v} out of range")));
                }
                for &g in &gens {
                    if module.scale(module.factors()[g], v) != 0 {
                        return Err(Error::Validation(format!(
                            "{name}{} = {} is not annihilated by the order {} of generator e{}",
                            fmt_gens(&gens),
                            module.element(v),
                            module.factors()[g],
                            g + 1
                        )));
                    }
                }
            }
            op_tables.push(expand_table(&module, ar, &c));
            ops.push(MultilinearOp { name, arity: ar, constants: c });
        }
        let (add, neg, scale) = module_tables(&module);
        let tables = Tables {
            n,
            modulus: module.modulus(),
            add,
            neg,
            scale,
            arities: sig.ops.iter().map(|o| o.arity).collect(),
            ops: op_tables,
        };
        Ok(Algebra { module, sig, ops, tables })
    }

    /// The algebra with every operation identically zero.
    pub fn with_zero_ops(module: ZmModule, sig: Signature) -> Self {
        let k = module.rank();
        let constants = sig.ops.iter().map(|o| vec![0; k.pow(o.arity as u32)]).collect();
        Algebra::new(module, sig, constants).expect("zero operations are well defined")
    }

    /// Converts a validated raw table into an algebra on a cyclic basis.
    /// Returns the algebra and the map from raw indices to algebra indices.
    pub fn from_raw(raw: &RawAlgebra) -> Result<(Algebra, Vec<usize>)> {
        raw.tables.validate(&raw.sig)?;
        let t = &raw.tables;
        let dec = decompose_group(t.n, t.modulus, &|a, b| t.add(a, b))?;
        let k = dec.module.rank();
        let mut constants = Vec::new();
        for (f, op) in raw.sig.ops.iter().enumerate() {
            let mut c = vec![0; k.pow(op.arity as u32)];
            for gens in TupleIter::new(k, op.arity) {
                let args: Vec<usize> = gens.iter().map(|&g| dec.generators[g]).collect();
                c[tuple_index(k, &gens)] = dec.from_raw[t.apply(f, &args)];
            }
            constants.push(c);
        }
        let alg = Algebra::new(dec.module.clone(), raw.sig.clone(), constants)?;
        let map = dec.from_raw.clone();
        for (f, op) in raw.sig.ops.iter().enumerate() {
            for args in TupleIter::new(t.n, op.arity) {
                let mapped: Vec<usize> = args.iter().map(|&x| map[x]).collect();
                if alg.op(f, &mapped) != map[t.apply(f, &args)] {
                    return Err(Error::Inconsistency(
                        "canonical form disagrees with the raw table".into(),
                    ));
                }
            }
        }
        Ok((alg, map))
    }

    pub fn module(&self) -> &ZmModule {
        &self.module
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn tables(&self) -> &Tables {
        &self.tables
    }

    pub fn ops(&self) -> &[MultilinearOp] {
        &self.ops
    }

    pub fn size(&self) -> usize {
        self.tables.n
    }

    pub fn modulus(&self) -> u64 {
        self.module.modulus()
    }

    pub fn op(&self, f: usize, args: &[usize]) -> usize {
        self.tables.apply(f, args)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.tables.add(a, b)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.tables.sub(a, b)
    }

    pub fn neg(&self, a: usize) -> usize {
        self.tables.neg(a)
    }

    pub fn scale(&self, r: u64, a: usize) -> usize {
        self.tables.scale(r, a)
    }

    /// Evaluates an operation on elements by name.
    pub fn eval_op(&self, f: &str, args: &[Element]) -> Result<Element> {
        let i = self.sig.index_of(f).ok_or_else(|| Error::UnknownSymbol(f.to_string()))?;
        if args.len() != self.sig.arity(i) {
            return Err(Error::ArityMismatch {
                symbol: f.to_string(),
                expected: self.sig.arity(i),
                found: args.len(),
            });
        }
        let idx = args.iter().map(|e| self.module.index_of(e)).collect::<Result<Vec<_>>>()?;
        Ok(self.module.element(self.op(i, &idx)))
    }

    /// True when every operation is identically zero.
    pub fn ops_vanish(&self) -> bool {
        self.tables.ops.iter().all(|t| t.iter().all(|&v| v == 0))
    }

    pub fn raw(&self) -> RawAlgebra {
        RawAlgebra { sig: self.sig.clone(), tables: self.tables.clone() }
    }
}

fn fmt_gens(gens: &[usize]) -> String {
    format!("({})", gens.iter().map(|g| format!("e{}", g + 1)).collect::<Vec<_>>().join(","))
}

/// Multilinear extension of structure constants to a dense table.
pub fn expand_table(module: &ZmModule, arity: usize, constants: &[usize]) -> Vec<usize> {
    let n = module.size();
    let k = module.rank();
    let coords: Vec<Vec<u64>> = (0..n).map(|x| module.coords(x)).collect();
    let mut table = vec![0; n.pow(arity as u32)];
    for args in TupleIter::new(n, arity) {
        let mut acc = 0;
        for gens in TupleIter::new(k, arity) {
            let v = constants[tuple_index(k, &gens)];
            if v == 0 {
                continue;
            }
            let mut coef: u64 = 1;
            for (slot, &g) in gens.iter().enumerate() {
                coef = coef * coords[args[slot]][g] % module.modulus();
                if coef == 0 {
                    break;
                }
            }
            if coef != 0 {
                acc = module.add(acc, module.scale(coef, v));
            }
        }
        table[tuple_index(n, &args)] = acc;
    }
    table
}

impl RawAlgebra {
    pub fn size(&self) -> usize {
        self.tables.n
    }

    /// Returns the first violated module or multilinearity clause, if any.
    pub fn validity(&self) -> Result<()> {
        self.tables.validate(&self.sig)
    }

    pub fn is_valid(&self) -> bool {
        self.validity().is_ok()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn f2() -> Algebra {
        let module = ZmModule::new(2, vec![2, 2]).unwrap();
        let sig = Signature::new(&[("f", 2)]).unwrap();
        let e1 = module.generator(0);
        // constants indexed by (i,j) in base 2: only f(e2,e2) = e1
        Algebra::new(module, sig, vec![vec![0, 0, 0, e1]]).unwrap()
    }
}
