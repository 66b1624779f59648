//! Finite modules over `Z/m`, elements, linear maps and exact linear algebra.
//!
//! Elements are addressed by their index in the lexicographic enumeration of
//! coordinate tuples (first coordinate most significant, zero first). All
//! higher layers store tables indexed this way.

mod group;
mod smith;

pub use group::{decompose_group, GroupDecomposition};
pub use smith::{smith_form, solve_linear, solve_mod, LinearSystem, Smith, Solution};

use crate::error::{Error, Result};
use std::fmt;

/// Greatest common divisor with `gcd(0, b) = b`.
pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A finite module `Z_{d1} x ... x Z_{dk}` over `Z/m` with every `d_i | m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZmModule {
    modulus: u64,
    factors: Vec<u64>,
}

/// Coordinates of an element; `coords[i]` is reduced modulo the i-th factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    pub coords: Vec<u64>,
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl ZmModule {
    pub fn new(modulus: u64, factors: Vec<u64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::Validation("modulus must be positive".into()));
        }
        for &d in &factors {
            if d == 0 || !modulus.is_multiple_of(d) {
                return Err(Error::Validation(format!(
                    "factor {d} does not divide modulus {modulus}"
                )));
            }
        }
        Ok(ZmModule { modulus, factors })
    }

    pub fn zero(modulus: u64) -> Self {
        ZmModule { modulus, factors: Vec::new() }
    }

    pub fn cyclic(modulus: u64, d: u64) -> Result<Self> {
        Self::new(modulus, vec![d])
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn size(&self) -> usize {
        self.factors.iter().map(|&d| d as usize).product()
    }

    pub fn coords(&self, idx: usize) -> Vec<u64> {
        let mut out = vec![0; self.factors.len()];
        let mut rest = idx;
        for (i, &d) in self.factors.iter().enumerate().rev() {
            out[i] = (rest % d as usize) as u64;
            rest /= d as usize;
        }
        out
    }

    /// Index of a coordinate tuple; coordinates are reduced modulo their factor.
    pub fn index(&self, coords: &[u64]) -> usize {
        debug_assert_eq!(coords.len(), self.factors.len());
        let mut idx = 0usize;
        for (c, &d) in coords.iter().zip(&self.factors) {
            idx = idx * d as usize + (c % d) as usize;
        }
        idx
    }

    pub fn element(&self, idx: usize) -> Element {
        Element { coords: self.coords(idx) }
    }

    pub fn index_of(&self, e: &Element) -> Result<usize> {
        if e.coords.len() != self.factors.len() {
            return Err(Error::DimensionMismatch(format!(
                "element {e} has {} coordinates, module has {} factors",
                e.coords.len(),
                self.factors.len()
            )));
        }
        for (c, d) in e.coords.iter().zip(&self.factors) {
            if c >= d {
                return Err(Error::Validation(format!("coordinate {c} not reduced modulo {d}")));
            }
        }
        Ok(self.index(&e.coords))
    }

    /// Index of the i-th canonical generator.
    pub fn generator(&self, i: usize) -> usize {
        let mut c = vec![0; self.factors.len()];
        c[i] = 1;
        self.index(&c)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.coords(a), self.coords(b));
        let z: Vec<u64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
        self.index(&z)
    }

    pub fn neg(&self, a: usize) -> usize {
        let z: Vec<u64> =
            self.coords(a).iter().zip(&self.factors).map(|(p, d)| (d - p) % d).collect();
        self.index(&z)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn scale(&self, r: u64, a: usize) -> usize {
        let z: Vec<u64> = self
            .coords(a)
            .iter()
            .zip(&self.factors)
            .map(|(p, d)| (p * (r % d)) % d)
            .collect();
        self.index(&z)
    }

    /// Additive order of an element.
    pub fn order_of(&self, a: usize) -> u64 {
        self.coords(a)
            .iter()
            .zip(&self.factors)
            .map(|(&c, &d)| d / gcd(c, d))
            .fold(1, |acc, o| acc / gcd(acc, o) * o)
    }

    /// Elements annihilated by `d`.
    pub fn annihilated_by(&self, d: u64) -> Vec<usize> {
        (0..self.size()).filter(|&x| self.scale(d, x) == 0).collect()
    }

    /// Direct product, coordinates of `self` first.
    pub fn product(&self, other: &ZmModule) -> ZmModule {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        ZmModule { modulus: self.modulus, factors }
    }
}

/// Lexicographic listing of all elements, zero first.
pub fn mod_elements(m: &ZmModule) -> Vec<Element> {
    (0..m.size()).map(|i| m.element(i)).collect()
}

/// A module homomorphism given by images of the canonical generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinMap {
    pub source: ZmModule,
    pub target: ZmModule,
    /// Target element indices, one per source generator.
    pub images: Vec<usize>,
}

impl LinMap {
    pub fn new(source: ZmModule, target: ZmModule, images: Vec<usize>) -> Result<Self> {
        if images.len() != source.rank() {
            return Err(Error::DimensionMismatch(format!(
                "{} images for {} generators",
                images.len(),
                source.rank()
            )));
        }
        for (i, &img) in images.iter().enumerate() {
            if img >= target.size() {
                return Err(Error::DimensionMismatch(format!("image index {img} out of range")));
            }
            if target.scale(source.factors()[i], img) != 0 {
                return Err(Error::Validation(format!(
                    "image of generator {} is not annihilated by its order {}",
                    i + 1,
                    source.factors()[i]
                )));
            }
        }
        Ok(LinMap { source, target, images })
    }

    pub fn apply(&self, x: usize) -> usize {
        let mut acc = 0;
        for (c, &img) in self.source.coords(x).iter().zip(&self.images) {
            acc = self.target.add(acc, self.target.scale(*c, img));
        }
        acc
    }

    /// Full value table indexed by source element.
    pub fn table(&self) -> Vec<usize> {
        (0..self.source.size()).map(|x| self.apply(x)).collect()
    }
}

/// All homomorphisms `M -> N` in lexicographic order of image tuples.
pub fn hom_enumerate(m: &ZmModule, n: &ZmModule) -> Vec<LinMap> {
    let choices: Vec<Vec<usize>> = m.factors().iter().map(|&d| n.annihilated_by(d)).collect();
    let mut out = Vec::new();
    for combo in cartesian(&choices) {
        out.push(LinMap { source: m.clone(), target: n.clone(), images: combo });
    }
    out
}

/// Cartesian product of index lists, last position varying fastest.
pub fn cartesian(choices: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for prefix in &out {
            for &v in c {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Iterator over all tuples in `[0, base)^len` in lexicographic order.
pub struct TupleIter {
    base: usize,
    cur: Vec<usize>,
    done: bool,
}

impl TupleIter {
    pub fn new(base: usize, len: usize) -> Self {
        TupleIter { base, cur: vec![0; len], done: base == 0 && len > 0 }
    }
}

impl Iterator for TupleIter {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut i = self.cur.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.cur[i] += 1;
            if self.cur[i] < self.base {
                break;
            }
            self.cur[i] = 0;
        }
        Some(out)
    }
}

/// Mixed-radix index of a tuple over a common base.
pub fn tuple_index(base: usize, t: &[usize]) -> usize {
    t.iter().fold(0, |acc, &x| acc * base + x)
}
