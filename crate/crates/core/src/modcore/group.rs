//! Cyclic decomposition of a finite abelian group given by an addition table.

use super::{smith_form, ZmModule};
use crate::error::{Error, Result};

/// A basis of a finite abelian group of exponent dividing `m`.
#[derive(Clone, Debug)]
pub struct GroupDecomposition {
    pub module: ZmModule,
    /// Raw indices of the chosen generators, one per factor.
    pub generators: Vec<usize>,
    /// `to_raw[k]` is the raw element with coordinate index `k` in `module`.
    pub to_raw: Vec<usize>,
    /// Inverse of `to_raw`.
    pub from_raw: Vec<usize>,
}

/// Decomposes the group `({0..n}, add)` with zero `0`.
///
/// Greedy generators are collected, their relation lattice is reduced to
/// Smith form, and the rows of `V^-1` give a basis of cyclic factors of
/// orders `gcd(d_j, m)`.
pub fn decompose_group(
    n: usize,
    modulus: u64,
    add: &dyn Fn(usize, usize) -> usize,
) -> Result<GroupDecomposition> {
    let times = |k: u64, x: usize| -> usize {
        let mut acc = 0;
        for _ in 0..k {
            acc = add(acc, x);
        }
        acc
    };
    for x in 0..n {
        if times(modulus, x) != 0 {
            return Err(Error::Validation(format!(
                "element {x} is not annihilated by the modulus {modulus}"
            )));
        }
    }
    let order = |x: usize| -> Result<u64> {
        let mut k = 1;
        let mut acc = x;
        while acc != 0 {
            acc = add(acc, x);
            k += 1;
            if k > n as u64 + 1 {
                return Err(Error::Validation("addition table is not a group".into()));
            }
        }
        Ok(k)
    };
    let mut gens: Vec<usize> = Vec::new();
    let mut in_span = vec![false; n];
    in_span[0] = true;
    let mut span = vec![0usize];
    for x in 0..n {
        if in_span[x] {
            continue;
        }
        gens.push(x);
        let mut next = Vec::new();
        for &s in &span {
            let mut acc = s;
            let mut steps = 0;
            loop {
                next.push(acc);
                acc = add(acc, x);
                steps += 1;
                if acc == s {
                    break;
                }
                if steps > n {
                    return Err(Error::Validation("addition table is not a group".into()));
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        for &e in &next {
            in_span[e] = true;
        }
        span = next;
    }
    if span.len() != n {
        return Err(Error::Validation("addition table is not a group".into()));
    }
    let orders: Vec<u64> = gens.iter().map(|&g| order(g)).collect::<Result<_>>()?;
    let k = gens.len();
    let mut seen: Vec<Option<Vec<u64>>> = vec![None; n];
    let mut relations: Vec<Vec<u64>> = Vec::new();
    for (i, &o) in orders.iter().enumerate() {
        let mut r = vec![0; k];
        r[i] = o % modulus;
        relations.push(r);
    }
    let mut c = vec![0u64; k];
    loop {
        let mut e = 0;
        for (i, &ci) in c.iter().enumerate() {
            e = add(e, times(ci, gens[i]));
        }
        match &seen[e] {
            Some(prev) => relations.push(
                c.iter().zip(prev).map(|(a, b)| (a + modulus - b) % modulus).collect(),
            ),
            None => seen[e] = Some(c.clone()),
        }
        let mut i = k;
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            c[i] += 1;
            if c[i] < orders[i] {
                break;
            }
            c[i] = 0;
        }
        if c.iter().all(|&x| x == 0) {
            break;
        }
    }
    let smith = smith_form(&relations, k, modulus);
    let mut factors = Vec::new();
    let mut generators = Vec::new();
    for j in 0..k {
        let ord = if j < smith.d.len() { super::gcd(smith.d[j], modulus) } else { modulus };
        if ord == 1 {
            continue;
        }
        let mut h = 0;
        for (i, &g) in gens.iter().enumerate() {
            h = add(h, times(smith.v_inv[j][i], g));
        }
        factors.push(ord);
        generators.push(h);
    }
    let module = ZmModule::new(modulus, factors)?;
    let mut to_raw = Vec::with_capacity(module.size());
    let mut from_raw = vec![usize::MAX; n];
    for idx in 0..module.size() {
        let mut e = 0;
        for (w, &g) in module.coords(idx).iter().zip(&generators) {
            e = add(e, times(*w, g));
        }
        if from_raw[e] != usize::MAX {
            return Err(Error::Inconsistency("cyclic decomposition is not injective".into()));
        }
        from_raw[e] = idx;
        to_raw.push(e);
    }
    if to_raw.len() != n {
        return Err(Error::Inconsistency("cyclic decomposition is not surjective".into()));
    }
    Ok(GroupDecomposition { module, generators, to_raw, from_raw })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn klein_and_cyclic() {
        let z4 = |a: usize, b: usize| (a + b) % 4;
        let d = decompose_group(4, 4, &z4).unwrap();
        assert_eq!(d.module.factors(), &[4]);
        let v4 = |a: usize, b: usize| a ^ b;
        let d = decompose_group(4, 4, &v4).unwrap();
        assert_eq!(d.module.factors(), &[2, 2]);
        let z2z4 = |a: usize, b: usize| {
            let (a1, a2) = (a / 4, a % 4);
            let (b1, b2) = (b / 4, b % 4);
            ((a1 + b1) % 2) * 4 + (a2 + b2) % 4
        };
        let d = decompose_group(8, 4, &z2z4).unwrap();
        let mut f = d.module.factors().to_vec();
        f.sort();
        assert_eq!(f, vec![2, 4]);
        for x in 0..8 {
            assert_eq!(d.to_raw[d.from_raw[x]], x);
        }
    }

    #[test]
    fn exponent_must_divide_modulus() {
        let z4 = |a: usize, b: usize| (a + b) % 4;
        assert!(decompose_group(4, 2, &z4).is_err());
    }

    #[test]
    fn trivial_group() {
        let d = decompose_group(1, 3, &|_, _| 0).unwrap();
        assert_eq!(d.module.size(), 1);
    }
}
