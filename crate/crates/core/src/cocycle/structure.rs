//! Compatibility with a variety, the abelian and central kernel
//! characterizations, and decomposition of solvable and nilpotent algebras.

use super::{extract_cocycle, semidirect, show_elem, Cocycle, Datum, ExtensionRecord};
use crate::algebra::{commutator, find_isomorphism, is_homomorphism, quotient, series, subalgebra, Algebra, Ideal, SeriesKind};
use crate::error::{Error, Result};
use crate::termlang::{first_violation, in_variety, Variety};

/// Outcome of building `I x_T Q` and testing it against a variety.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Compatibility {
    Compatible,
    /// The tables are not even a module with multilinear operations.
    NotAlgebra(String),
    /// An identity of the variety fails; the assignment lists `<a,x>` pairs.
    Violates { identity: String, assignment: Vec<(String, (usize, usize))> },
}

impl Compatibility {
    pub fn is_compatible(&self) -> bool {
        matches!(self, Compatibility::Compatible)
    }

    /// A human-readable counterexample.
    pub fn describe(&self, d: &Datum) -> String {
        match self {
            Compatibility::Compatible => "compatible".into(),
            Compatibility::NotAlgebra(msg) => format!("not an algebra: {msg}"),
            Compatibility::Violates { identity, assignment } => {
                let env: Vec<String> = assignment
                    .iter()
                    .map(|(v, (a, x))| format!("{v}=<{},{}>", show_elem(d.i.module(), *a), show_elem(d.q.module(), *x)))
                    .collect();
                format!("{identity} fails at {}", env.join(", "))
            }
        }
    }
}

pub fn compatibility(d: &Datum, t: &Cocycle, v: &Variety) -> Result<Compatibility> {
    if !in_variety(&d.q, v)? {
        return Err(Error::DatumNotInVariety(format!("Q is not in `{}`", v.name)));
    }
    if !in_variety(&d.i, v)? {
        return Err(Error::DatumNotInVariety(format!("I is not in `{}`", v.name)));
    }
    let sd = semidirect(d, t)?;
    if let Err(e) = &sd.validity {
        return Ok(Compatibility::NotAlgebra(e.to_string()));
    }
    Ok(match first_violation(sd.tables(), &v.identities, &v.param_values)? {
        None => Compatibility::Compatible,
        Some((k, env)) => Compatibility::Violates {
            identity: v.identities[k].display(&v.syntax),
            assignment: env.into_iter().map(|(name, p)| (name, sd.unpair(p))).collect(),
        },
    })
}

pub fn is_compatible(d: &Datum, t: &Cocycle, v: &Variety) -> Result<bool> {
    Ok(compatibility(d, t, v)?.is_compatible())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelKind {
    pub abelian: bool,
    pub central: bool,
}

/// Classifies the embedded kernel of `I x_T Q`. The syntactic test (abelian `I`
/// with linear, resp. trivial, action) is checked against commutators computed
/// in the semidirect product.
pub fn kernel_kind(d: &Datum, t: &Cocycle) -> Result<KernelKind> {
    let sd = semidirect(d, t)?;
    let (e, _) = sd.extension(d)?;
    let syntactic = KernelKind {
        abelian: d.kernel_abelian() && t.is_linear(),
        central: d.kernel_abelian() && t.is_action_trivial(),
    };
    let k = e.kernel();
    let oracle = KernelKind {
        abelian: commutator(&e.m, &k, &k)?.is_zero(),
        central: commutator(&e.m, &Ideal::whole(&e.m), &k)?.is_zero(),
    };
    if syntactic != oracle {
        return Err(Error::Inconsistency(format!(
            "syntactic kernel test {syntactic:?} disagrees with the commutator test {oracle:?}"
        )));
    }
    Ok(syntactic)
}

/// `M` as an iterated semidirect product of abelian factors.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub kind: SeriesKind,
    /// `factors[0] = M / C_1`, and `factors[k]` is the image of `C_k` in `M / C_{k+1}`.
    pub factors: Vec<Algebra>,
    /// `extensions[k]` is `factors[k+1] -> M / C_{k+2} -> M / C_{k+1}`.
    pub extensions: Vec<ExtensionRecord>,
    /// The cocycle extracted from `extensions[k]`.
    pub cocycles: Vec<Cocycle>,
    /// The right-associated product rebuilt from the factors.
    pub rebuilt: Algebra,
    /// An isomorphism `rebuilt -> M`.
    pub iso: Vec<usize>,
}

/// Splits `M` along its derived or lower central series.
pub fn decompose(m: &Algebra, kind: SeriesKind) -> Result<Decomposition> {
    let s = series(m, kind);
    let Some(n) = s.steps else {
        let what = match kind {
            SeriesKind::Derived => "solvable",
            SeriesKind::LowerCentral => "nilpotent",
        };
        return Err(Error::Validation(format!("algebra is not {what}")));
    };
    // quotients[k] = M / C_{k+1} with its surjection
    let quotients: Vec<(Algebra, Vec<usize>)> = (1..=n).map(|k| quotient(m, &s.terms[k])).collect::<Result<_>>()?;
    let mut factors = Vec::new();
    let mut extensions = Vec::new();
    let mut cocycles = Vec::new();
    if n == 0 {
        let iso = (0..m.size()).collect();
        return Ok(Decomposition { kind, factors, extensions, cocycles, rebuilt: m.clone(), iso });
    }
    factors.push(quotients[0].0.clone());
    // rebuilt algebra and its isomorphism onto quotients[k]
    let mut rebuilt = quotients[0].0.clone();
    let mut phi: Vec<usize> = (0..rebuilt.size()).collect();
    for k in 1..n {
        let (a, sa) = &quotients[k];
        let (b, sb) = &quotients[k - 1];
        let mut pi = vec![usize::MAX; a.size()];
        for x in 0..m.size() {
            pi[sa[x]] = sb[x];
        }
        let image: Vec<usize> = s.terms[k].elements().iter().map(|&x| sa[x]).collect();
        let kernel = Ideal::from_set(a, &image)?;
        let (qk, iota) = subalgebra(a, &kernel)?;
        let e = ExtensionRecord::new(a.clone(), b.clone(), qk.clone(), pi, iota)?;
        let t = extract_cocycle(&e);
        let ok = match kind {
            SeriesKind::Derived => qk.ops_vanish() && t.is_linear(),
            SeriesKind::LowerCentral => qk.ops_vanish() && t.is_action_trivial(),
        };
        if !ok {
            return Err(Error::Inconsistency(format!("factor {} has the wrong kernel type", k + 1)));
        }
        let local = Datum::new(rebuilt.clone(), qk.clone())?;
        let pulled = t.pullback(&local, &phi);
        let sd = semidirect(&local, &pulled)?;
        sd.validity.clone()?;
        let (next, pair_to_idx) = Algebra::from_raw(&sd.raw)?;
        let mut next_phi = vec![usize::MAX; next.size()];
        for p in 0..sd.raw.size() {
            let (u, x) = sd.unpair(p);
            next_phi[pair_to_idx[p]] = a.add(e.iota[u], e.lift[phi[x]]);
        }
        if !is_homomorphism(&next, a, &next_phi) {
            return Err(Error::Inconsistency(format!("reassembly fails at factor {}", k + 1)));
        }
        factors.push(qk);
        extensions.push(e);
        cocycles.push(t);
        rebuilt = next;
        phi = next_phi;
    }
    let iso = find_isomorphism(&rebuilt, m)
        .ok_or_else(|| Error::Inconsistency("rebuilt algebra is not isomorphic to the input".into()))?;
    Ok(Decomposition { kind, factors, extensions, cocycles, rebuilt, iso })
}
