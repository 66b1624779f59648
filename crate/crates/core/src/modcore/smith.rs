//! Smith normal form over `Z/m` and linear system solving.

use super::gcd;
use crate::error::{Error, Result};

/// `u * a * v = diag(d)` modulo `m`, with `v_inv * v = 1`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub rows: usize,
    pub cols: usize,
    pub modulus: u64,
    pub d: Vec<u64>,
    pub u: Vec<Vec<u64>>,
    pub v: Vec<Vec<u64>>,
    pub v_inv: Vec<Vec<u64>>,
}

/// Extended gcd on non-negative integers: `s*x + t*y = g`.
/// Returns `(x, 1, 0)` whenever `x` divides `y` and `x > 0`.
fn egcd(x: i128, y: i128) -> (i128, i128, i128) {
    if x != 0 && y % x == 0 {
        return (x, 1, 0);
    }
    let (mut r0, mut r1) = (x, y);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0, s0, t0)
}

fn md(x: i128, m: u64) -> u64 {
    x.rem_euclid(m as i128) as u64
}

fn identity(n: usize) -> Vec<Vec<u64>> {
    (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect()
}

/// Combine two rows: `p <- a*p + b*q`, `q <- c*p + d*q`.
fn mix_rows(mat: &mut [Vec<u64>], p: usize, q: usize, k: [i128; 4], m: u64) {
    for col in 0..mat[p].len() {
        let (x, y) = (mat[p][col] as i128, mat[q][col] as i128);
        mat[p][col] = md(k[0] * x + k[1] * y, m);
        mat[q][col] = md(k[2] * x + k[3] * y, m);
    }
}

/// Combine two columns: `p <- a*p + b*q`, `q <- c*p + d*q`.
fn mix_cols(mat: &mut [Vec<u64>], p: usize, q: usize, k: [i128; 4], m: u64) {
    for row in mat.iter_mut() {
        let (x, y) = (row[p] as i128, row[q] as i128);
        row[p] = md(k[0] * x + k[1] * y, m);
        row[q] = md(k[2] * x + k[3] * y, m);
    }
}

pub fn smith_form(a: &[Vec<u64>], cols: usize, m: u64) -> Smith {
    let rows = a.len();
    let mut w: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|&x| x % m).collect()).collect();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut v_inv = identity(cols);
    let steps = rows.min(cols);
    for t in 0..steps {
        let mut best: Option<(u64, u64, usize, usize)> = None;
        for (i, row) in w.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x != 0 {
                    let key = (gcd(x, m), x, i, j);
                    if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                        best = Some(key);
                    }
                }
            }
        }
        let Some((_, _, pi, pj)) = best else { break };
        if pi != t {
            w.swap(pi, t);
            u.swap(pi, t);
        }
        if pj != t {
            for row in w.iter_mut() {
                row.swap(pj, t);
            }
            for row in v.iter_mut() {
                row.swap(pj, t);
            }
            v_inv.swap(pj, t);
        }
        loop {
            for i in t + 1..rows {
                if w[i][t] != 0 {
                    let (x, y) = (w[t][t] as i128, w[i][t] as i128);
                    let (g, s, k) = egcd(x, y);
                    let coef = [s, k, -y / g, x / g];
                    mix_rows(&mut w, t, i, coef, m);
                    mix_rows(&mut u, t, i, coef, m);
                }
            }
            for j in t + 1..cols {
                if w[t][j] != 0 {
                    let (x, y) = (w[t][t] as i128, w[t][j] as i128);
                    let (g, s, k) = egcd(x, y);
                    mix_cols(&mut w, t, j, [s, k, -y / g, x / g], m);
                    mix_cols(&mut v, t, j, [s, k, -y / g, x / g], m);
                    mix_rows(&mut v_inv, t, j, [x / g, y / g, -k, s], m);
                }
            }
            if (t + 1..rows).all(|i| w[i][t] == 0) && (t + 1..cols).all(|j| w[t][j] == 0) {
                break;
            }
        }
    }
    let d = (0..steps).map(|i| w[i][i]).collect();
    let s = Smith { rows, cols, modulus: m, d, u, v, v_inv };
    debug_assert!(s.verify(a));
    s
}

fn matmul(a: &[Vec<u64>], b: &[Vec<u64>], inner: usize, cols: usize, m: u64) -> Vec<Vec<u64>> {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc: u128 = 0;
                    for k in 0..inner {
                        acc += row[k] as u128 * b[k][j] as u128;
                    }
                    (acc % m as u128) as u64
                })
                .collect()
        })
        .collect()
}

impl Smith {
    /// Recomposes `u * a * v` and `v * v_inv` and compares with the claimed forms.
    pub fn verify(&self, a: &[Vec<u64>]) -> bool {
        let m = self.modulus;
        let ua = matmul(&self.u, a, self.rows, self.cols, m);
        let uav = matmul(&ua, &self.v, self.cols, self.cols, m);
        for (i, row) in uav.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                let want = if i == j { self.d[i] % m } else { 0 };
                if x != want {
                    return false;
                }
            }
        }
        let vv = matmul(&self.v, &self.v_inv, self.cols, self.cols, m);
        let id: Vec<Vec<u64>> =
            identity(self.cols).into_iter().map(|r| r.into_iter().map(|x| x % m).collect()).collect();
        vv == id
    }
}

/// Full solution coset of a linear system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub particular: Vec<u64>,
    pub kernel: Vec<Vec<u64>>,
}

fn inverse_mod(a: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let (_, s, _) = egcd(a as i128 % n as i128, n as i128);
    md(s, n)
}

/// Solves `a x = b` over `Z/m`; `None` if inconsistent.
pub fn solve_mod(a: &[Vec<u64>], cols: usize, b: &[u64], m: u64) -> Result<Option<Solution>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} equations but {} right-hand sides",
            a.len(),
            b.len()
        )));
    }
    if let Some(r) = a.iter().find(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch(format!(
            "row of length {} in a system with {cols} unknowns",
            r.len()
        )));
    }
    let s = smith_form(a, cols, m);
    let c: Vec<u64> = s
        .u
        .iter()
        .map(|row| {
            let acc: u128 = row.iter().zip(b).map(|(&x, &y)| x as u128 * (y % m) as u128).sum();
            (acc % m as u128) as u64
        })
        .collect();
    let mut y = vec![0u64; cols];
    let mut gens: Vec<Vec<u64>> = Vec::new();
    for i in 0..a.len() {
        if i < s.d.len() {
            let g = gcd(s.d[i] % m, m);
            if !c[i].is_multiple_of(g) {
                return Ok(None);
            }
            let n = m / g;
            y[i] = ((c[i] / g) % n.max(1)) * inverse_mod((s.d[i] / g) % n.max(1), n) % n.max(1);
            if n != m {
                let mut e = vec![0; cols];
                e[i] = n % m;
                gens.push(e);
            }
        } else if !c[i].is_multiple_of(m) {
            return Ok(None);
        }
    }
    for j in s.d.len()..cols {
        let mut e = vec![0; cols];
        e[j] = 1;
        gens.push(e);
    }
    let apply_v = |vec: &[u64]| -> Vec<u64> {
        (0..cols)
            .map(|i| {
                let acc: u128 = (0..cols).map(|k| s.v[i][k] as u128 * vec[k] as u128).sum();
                (acc % m as u128) as u64
            })
            .collect()
    };
    let particular = apply_v(&y);
    let kernel = gens.iter().map(|g| apply_v(g)).filter(|k| k.iter().any(|&x| x != 0)).collect();
    Ok(Some(Solution { particular, kernel }))
}

/// A system with unknowns in `Z_{d_j}` and each equation taken modulo its own `e_i`.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    pub modulus: u64,
    pub unknown_orders: Vec<u64>,
    /// `(coefficients, right-hand side, equation modulus)`.
    pub rows: Vec<(Vec<u64>, u64, u64)>,
}

impl LinearSystem {
    pub fn new(modulus: u64, unknown_orders: Vec<u64>) -> Self {
        LinearSystem { modulus, unknown_orders, rows: Vec::new() }
    }

    pub fn push(&mut self, coeffs: Vec<u64>, rhs: u64, eq_modulus: u64) {
        self.rows.push((coeffs, rhs, eq_modulus));
    }
}

/// Solves a mixed-order system by scaling each equation into `Z/m`.
/// The returned vectors are reduced modulo the unknown orders.
pub fn solve_linear(sys: &LinearSystem) -> Result<Option<Solution>> {
    let m = sys.modulus;
    let n = sys.unknown_orders.len();
    let mut a = Vec::with_capacity(sys.rows.len());
    let mut b = Vec::with_capacity(sys.rows.len());
    for (coeffs, rhs, e) in &sys.rows {
        if coeffs.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "equation with {} coefficients for {n} unknowns",
                coeffs.len()
            )));
        }
        if *e == 0 || !m.is_multiple_of(*e) {
            return Err(Error::Validation(format!("equation modulus {e} does not divide {m}")));
        }
        for (j, &c) in coeffs.iter().enumerate() {
            if !(c as u128 * sys.unknown_orders[j] as u128).is_multiple_of(*e as u128) {
                return Err(Error::Validation(format!(
                    "equation modulo {e} is not well defined on unknown {j} of order {}",
                    sys.unknown_orders[j]
                )));
            }
        }
        let scale = m / e;
        a.push(coeffs.iter().map(|&c| (c % e) * scale % m).collect::<Vec<_>>());
        b.push((rhs % e) * scale % m);
    }
    let Some(sol) = solve_mod(&a, n, &b, m)? else { return Ok(None) };
    let reduce = |v: &[u64]| -> Vec<u64> {
        v.iter().zip(&sys.unknown_orders).map(|(&x, &d)| x % d).collect()
    };
    let particular = reduce(&sol.particular);
    let kernel =
        sol.kernel.iter().map(|k| reduce(k)).filter(|k| k.iter().any(|&x| x != 0)).collect();
    Ok(Some(Solution { particular, kernel }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(gens: &[Vec<u64>], orders: &[u64]) -> std::collections::BTreeSet<Vec<u64>> {
        let mut set = std::collections::BTreeSet::new();
        set.insert(vec![0; orders.len()]);
        for g in gens {
            let current: Vec<_> = set.iter().cloned().collect();
            for v in current {
                let mut w = v.clone();
                loop {
                    w = w.iter().zip(g).zip(orders).map(|((a, b), d)| (a + b) % d).collect();
                    if !set.insert(w.clone()) {
                        break;
                    }
                }
            }
        }
        set
    }

    #[test]
    fn spec_examples() {
        let s = solve_mod(&[vec![2]], 1, &[0], 4).unwrap().unwrap();
        assert_eq!(s.particular, vec![0]);
        assert_eq!(s.kernel, vec![vec![2]]);
        let s = solve_mod(&[vec![1]], 1, &[1], 2).unwrap().unwrap();
        assert_eq!(s.particular, vec![1]);
        assert!(s.kernel.is_empty());
        assert!(solve_mod(&[vec![0]], 1, &[1], 2).unwrap().is_none());
        assert!(solve_mod(&[vec![1, 2]], 3, &[1], 2).is_err());
    }

    #[test]
    fn smith_recomposes() {
        let a = vec![vec![2, 4, 4], vec![6, 6, 12], vec![10, 4, 16]];
        let s = smith_form(&a, 3, 24);
        assert!(s.verify(&a));
        let a = vec![vec![3, 1], vec![0, 2], vec![1, 1]];
        assert!(smith_form(&a, 2, 4).verify(&a));
    }

    #[test]
    fn mixed_orders() {
        // x in Z_2, y in Z_4, equation x*2 + y = 3 modulo 4
        let mut sys = LinearSystem::new(4, vec![2, 4]);
        sys.push(vec![2, 1], 3, 4);
        let sol = solve_linear(&sys).unwrap().unwrap();
        let all = span(&sol.kernel, &[2, 4]);
        let found: std::collections::BTreeSet<Vec<u64>> = all
            .iter()
            .map(|k| vec![(k[0] + sol.particular[0]) % 2, (k[1] + sol.particular[1]) % 4])
            .collect();
        let brute: std::collections::BTreeSet<Vec<u64>> = (0..2)
            .flat_map(|x| (0..4).map(move |y| vec![x, y]))
            .filter(|v| (2 * v[0] + v[1]) % 4 == 3)
            .collect();
        assert_eq!(found, brute);
    }

    #[test]
    fn ill_defined_equation_rejected() {
        let mut sys = LinearSystem::new(4, vec![2]);
        sys.push(vec![1], 0, 4);
        assert!(solve_linear(&sys).is_err());
    }
}
