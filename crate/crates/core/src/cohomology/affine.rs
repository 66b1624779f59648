//! `H^2_V(Q, I, *)` for affine data by linear algebra over `Z/m`.
//!
//! With `I` abelian and unary actions, the `I`-coordinate of every term in
//! `I x_T Q` is affine in the factor sets, so the identities of `V` cut out
//! a subgroup `Z^2` that is found by evaluating them on unit cocycles.

use std::collections::{HashSet, VecDeque};

use crate::cocycle::{coboundary, semidirect, Action, Cocycle, Datum};
use crate::error::{Error, Result};
use crate::modcore::{gcd, smith_form, solve_linear, LinearSystem, TupleIter};
use crate::termlang::{evaluations, in_variety, Variety};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cell {
    Plus(usize, usize),
    Scalar(u64, usize),
    Op(usize, usize),
}

/// The affine second cohomology group with one representative per class.
#[derive(Clone, Debug)]
pub struct AffineH2 {
    pub datum: Datum,
    pub action: Action,
    /// Orders of the cyclic factors, each greater than one.
    pub invariant_factors: Vec<u64>,
    /// A cocycle generating each cyclic factor.
    pub generators: Vec<Cocycle>,
    /// `(class coordinates, least member of the class)`, coordinates ascending.
    pub representatives: Vec<(Vec<u64>, Cocycle)>,
    cells: Vec<Cell>,
    orders: Vec<u64>,
    z_basis: Vec<Vec<u64>>,
    /// Columns of the change of basis to class coordinates, one per kept factor.
    to_class: Vec<Vec<u64>>,
}

impl AffineH2 {
    pub fn order(&self) -> u128 {
        self.invariant_factors.iter().map(|&g| g as u128).product()
    }

    fn to_vector(&self, t: &Cocycle) -> Vec<u64> {
        cocycle_vector(&self.datum, &self.cells, t)
    }

    fn from_vector(&self, v: &[u64]) -> Cocycle {
        vector_cocycle(&self.datum, &self.action, &self.cells, v)
    }

    /// Coordinates of the class of `t`; errors if `t` is not a compatible
    /// cocycle with this action.
    pub fn class_of(&self, t: &Cocycle) -> Result<Vec<u64>> {
        if t.action != self.action {
            return Err(Error::Validation("cocycle has a different action".into()));
        }
        let v = self.to_vector(t);
        let m = self.datum.modulus();
        let p = self.z_basis.len();
        let mut sys = LinearSystem::new(m, vec![m; p]);
        for (k, &e) in self.orders.iter().enumerate() {
            sys.push(self.z_basis.iter().map(|z| z[k]).collect(), v[k], e);
        }
        let Some(sol) = solve_linear(&sys)? else {
            return Err(Error::Validation("cocycle is not V-compatible".into()));
        };
        let lambda = sol.particular;
        Ok(self
            .to_class
            .iter()
            .zip(&self.invariant_factors)
            .map(|(col, &g)| {
                let acc: u128 = lambda.iter().zip(col).map(|(&a, &b)| a as u128 * b as u128).sum();
                (acc % g as u128) as u64
            })
            .collect())
    }

    /// Index of `coords` in `representatives`.
    pub fn class_index(&self, coords: &[u64]) -> Option<usize> {
        self.representatives.iter().position(|(c, _)| c == coords)
    }
}

fn cells_of(d: &Datum) -> Vec<Cell> {
    let nq = d.nq();
    let mut cells = Vec::new();
    for x in 1..nq {
        for y in 1..nq {
            cells.push(Cell::Plus(x, y));
        }
    }
    for r in 0..d.modulus() {
        for x in 1..nq {
            cells.push(Cell::Scalar(r, x));
        }
    }
    for (f, o) in d.sig().ops.iter().enumerate() {
        for (k, xs) in TupleIter::new(nq, o.arity).enumerate() {
            if !xs.contains(&0) {
                cells.push(Cell::Op(f, k));
            }
        }
    }
    cells
}

fn cell_value(d: &Datum, t: &Cocycle, c: Cell) -> usize {
    match c {
        Cell::Plus(x, y) => t.plus[x * d.nq() + y],
        Cell::Scalar(r, x) => t.scalar[r as usize * d.nq() + x],
        Cell::Op(f, k) => t.ops[f][k],
    }
}

fn set_cell(d: &Datum, t: &mut Cocycle, c: Cell, v: usize) {
    match c {
        Cell::Plus(x, y) => t.plus[x * d.nq() + y] = v,
        Cell::Scalar(r, x) => t.scalar[r as usize * d.nq() + x] = v,
        Cell::Op(f, k) => t.ops[f][k] = v,
    }
}

fn cocycle_vector(d: &Datum, cells: &[Cell], t: &Cocycle) -> Vec<u64> {
    cells.iter().flat_map(|&c| d.i.module().coords(cell_value(d, t, c))).collect()
}

fn vector_cocycle(d: &Datum, action: &Action, cells: &[Cell], v: &[u64]) -> Cocycle {
    let r = d.i.module().rank();
    let mut t = Cocycle::with_action(d, action.clone());
    if r == 0 {
        return t;
    }
    for (c, coords) in cells.iter().zip(v.chunks(r)) {
        set_cell(d, &mut t, *c, d.i.module().index(coords));
    }
    t
}

/// Differences of the two sides of every identity, `I`-coordinate only.
fn identity_defects(d: &Datum, t: &Cocycle, v: &Variety) -> Result<Vec<usize>> {
    let sd = semidirect(d, t)?;
    let mut out = Vec::new();
    for id in v.with_axioms() {
        for (l, r) in evaluations(sd.tables(), &id, &v.param_values)? {
            let (a, x) = sd.unpair(l);
            let (b, y) = sd.unpair(r);
            if x != y {
                return Err(Error::DatumNotInVariety(format!("Q fails `{}`", id.display(&v.syntax))));
            }
            out.push(d.i.sub(a, b));
        }
    }
    Ok(out)
}

/// Computes `H^2_V(Q, I, *)` for an affine datum.
pub fn h2_affine(d: &Datum, action: &Action, v: &Variety, budget: u128) -> Result<AffineH2> {
    if !d.kernel_abelian() {
        return Err(Error::NotAffine("I is not abelian".into()));
    }
    if !action.is_unary() {
        return Err(Error::NotAffine("the action is not unary in I".into()));
    }
    if !in_variety(&d.q, v)? || !in_variety(&d.i, v)? {
        return Err(Error::DatumNotInVariety(format!("Q or I is not in `{}`", v.name)));
    }
    let base = Cocycle::with_action(d, action.clone());
    base.validate(d)?;
    let m = d.modulus();
    let im = d.i.module();
    let rank = im.rank();
    let cells = cells_of(d);
    let orders: Vec<u64> = cells.iter().flat_map(|_| im.factors().iter().copied()).collect();
    let nvars = orders.len();
    let zero_defects = identity_defects(d, &base, v)?;
    if zero_defects.iter().any(|&x| x != 0) {
        return Err(Error::Validation(format!("the action is not compatible with `{}`", v.name)));
    }
    // column k holds the defects of the unit cocycle for variable k
    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(nvars);
    for cell in &cells {
        for j in 0..rank {
            let mut t = base.clone();
            set_cell(d, &mut t, *cell, im.generator(j));
            columns.push(identity_defects(d, &t, v)?);
        }
    }
    let mut sys = LinearSystem::new(m, orders.clone());
    let mut seen = HashSet::new();
    for row in 0..zero_defects.len() {
        let values: Vec<Vec<u64>> = columns.iter().map(|col| im.coords(col[row])).collect();
        for (k, &e) in im.factors().iter().enumerate() {
            let coeffs: Vec<u64> = values.iter().map(|c| c[k]).collect();
            if coeffs.iter().all(|&x| x == 0) || !seen.insert((coeffs.clone(), e)) {
                continue;
            }
            sys.push(coeffs, 0, e);
        }
    }
    let z_basis: Vec<Vec<u64>> = if nvars == 0 {
        Vec::new()
    } else {
        match solve_linear(&sys)? {
            Some(sol) => sol.kernel,
            None => return Err(Error::Inconsistency("homogeneous system has no solution".into())),
        }
    };
    // coboundaries of unit witnesses
    let mut b_gens = Vec::new();
    for x in 1..d.nq() {
        for j in 0..rank {
            let mut h = vec![0; d.nq()];
            h[x] = im.generator(j);
            let g = coboundary(d, &h, action);
            if !g.action.is_trivial() {
                return Err(Error::Inconsistency("coboundary of an affine datum has action terms".into()));
            }
            b_gens.push(cocycle_vector(d, &cells, &g));
        }
    }
    // relations among the cocycle generators modulo coboundaries
    let p = z_basis.len();
    let mut rel_sys = LinearSystem::new(m, vec![m; p + b_gens.len()]);
    for (k, &e) in orders.iter().enumerate() {
        let mut coeffs: Vec<u64> = z_basis.iter().map(|z| z[k]).collect();
        coeffs.extend(b_gens.iter().map(|b| (e - b[k] % e) % e));
        rel_sys.push(coeffs, 0, e);
    }
    let relations: Vec<Vec<u64>> = if p == 0 {
        Vec::new()
    } else {
        let sol = solve_linear(&rel_sys)?.ok_or_else(|| Error::Inconsistency("relation system is inconsistent".into()))?;
        sol.kernel.into_iter().map(|k| k[..p].to_vec()).filter(|k| k.iter().any(|&x| x != 0)).collect()
    };
    let mut factors_gens: Vec<(u64, Vec<u64>, Vec<u64>)> = Vec::new();
    if p > 0 {
        let (d_diag, v, v_inv) = if relations.is_empty() {
            let ident: Vec<Vec<u64>> = (0..p).map(|i| (0..p).map(|j| u64::from(i == j)).collect()).collect();
            (Vec::new(), ident.clone(), ident)
        } else {
            let s = smith_form(&relations, p, m);
            (s.d, s.v, s.v_inv)
        };
        for i in 0..p {
            let di = d_diag.get(i).copied().unwrap_or(0) % m;
            let g = gcd(di, m);
            if g > 1 {
                let column: Vec<u64> = (0..p).map(|j| v[j][i]).collect();
                let lambda = &v_inv[i];
                let mut vec = vec![0u64; nvars];
                for (l, z) in lambda.iter().zip(&z_basis) {
                    for k in 0..nvars {
                        vec[k] = (vec[k] + l * z[k]) % orders[k];
                    }
                }
                factors_gens.push((g, column, vec));
            }
        }
    }
    factors_gens.sort_by_key(|(g, _, _)| *g);
    let invariant_factors: Vec<u64> = factors_gens.iter().map(|(g, _, _)| *g).collect();
    let order: u128 = invariant_factors.iter().map(|&g| g as u128).product();
    if order > budget {
        return Err(Error::BudgetExceeded { bound: order, budget });
    }
    let coboundaries = span(&b_gens, &orders, budget)?;
    let mut out = AffineH2 {
        datum: d.clone(),
        action: action.clone(),
        invariant_factors: invariant_factors.clone(),
        generators: Vec::new(),
        representatives: Vec::new(),
        cells,
        orders: orders.clone(),
        z_basis,
        to_class: factors_gens.iter().map(|(_, c, _)| c.clone()).collect(),
    };
    out.generators = factors_gens.iter().map(|(_, _, v)| out.from_vector(v)).collect();
    let mut reps = Vec::new();
    for coords in mixed_tuples(&invariant_factors) {
        let mut vec = vec![0u64; nvars];
        for (c, (_, _, g)) in coords.iter().zip(&factors_gens) {
            for k in 0..nvars {
                vec[k] = (vec[k] + c * g[k]) % orders[k];
            }
        }
        let best = coboundaries
            .iter()
            .map(|b| out.from_vector(&vec.iter().zip(b).zip(&orders).map(|((x, y), e)| (x + y) % e).collect::<Vec<_>>()))
            .min_by(|a, b| a.key().cmp(&b.key()))
            .expect("the zero coboundary is present");
        reps.push((coords, best));
    }
    out.representatives = reps;
    spot_check(&out)?;
    Ok(out)
}

/// All tuples with `t[i] < bounds[i]`, the first entry most significant.
fn mixed_tuples(bounds: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &b in bounds {
        out = out.into_iter().flat_map(|t| (0..b).map(move |x| [t.clone(), vec![x]].concat())).collect();
    }
    out
}

fn span(gens: &[Vec<u64>], orders: &[u64], budget: u128) -> Result<Vec<Vec<u64>>> {
    let zero = vec![0u64; orders.len()];
    let mut seen: HashSet<Vec<u64>> = HashSet::from([zero.clone()]);
    let mut queue = VecDeque::from([zero]);
    let mut out = Vec::new();
    while let Some(v) = queue.pop_front() {
        out.push(v.clone());
        for g in gens {
            let w: Vec<u64> = v.iter().zip(g).zip(orders).map(|((a, b), e)| (a + b) % e).collect();
            if seen.insert(w.clone()) {
                if seen.len() as u128 > budget {
                    return Err(Error::BudgetExceeded { bound: seen.len() as u128, budget });
                }
                queue.push_back(w);
            }
        }
    }
    Ok(out)
}

/// Checks `[T] + [T'] = [T + T']` on pairs of representatives.
fn spot_check(h: &AffineH2) -> Result<()> {
    let i = &h.datum.i;
    for (ca, ta) in h.representatives.iter().take(16) {
        for (cb, tb) in h.representatives.iter().take(16) {
            let sum = ta.add_factor_sets(tb, i);
            let expected: Vec<u64> = ca.iter().zip(cb).zip(&h.invariant_factors).map(|((a, b), g)| (a + b) % g).collect();
            if h.class_of(&sum)? != expected {
                return Err(Error::Inconsistency("class addition is not well defined".into()));
            }
        }
    }
    Ok(())
}
