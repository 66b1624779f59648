//! Symbolic expansion of terms evaluated in `I x_T Q`.
//!
//! A term `t` over the variety's signature, evaluated at `<a_i, x_i>`, has
//! first coordinate `t^I + t^* + t^d`: the pure `I` part, the part built from
//! action symbols without factor sets, and the part containing a factor set.
//! Identities of a variety become the general, action and strict cocycle
//! identities by comparing these parts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cocycle::{proper_subsets, Cocycle, Datum};
use crate::error::{Error, Result};
use crate::termlang::{eval_tables, Coef, Identity, Syntax, Term};

/// A tree of sort `I`. Arguments of sort `Q` are plain terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MsTree {
    /// The `I`-coordinate of the variable with this index.
    Var(usize),
    /// `f^I` applied to `I`-trees.
    Op(usize, Vec<MsTree>),
    /// `a(f,s)`; slots in `s` hold `I`-trees, the rest `Q`-terms.
    Act(usize, u32, Vec<Slot>),
    /// `T_+(x, y)`.
    Plus(Term, Term),
    /// `T_r(x)`.
    Scalar(Coef, Term),
    /// `T_f(x_1, ..., x_n)`.
    Factor(usize, Vec<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Q(Term),
    I(MsTree),
}

impl MsTree {
    pub fn has_factor_set(&self) -> bool {
        match self {
            MsTree::Var(_) => false,
            MsTree::Op(_, args) => args.iter().any(MsTree::has_factor_set),
            MsTree::Act(_, _, slots) => slots.iter().any(|s| matches!(s, Slot::I(t) if t.has_factor_set())),
            MsTree::Plus(..) | MsTree::Scalar(..) | MsTree::Factor(..) => true,
        }
    }

    pub fn has_action(&self) -> bool {
        match self {
            MsTree::Var(_) | MsTree::Plus(..) | MsTree::Scalar(..) | MsTree::Factor(..) => false,
            MsTree::Op(_, args) => args.iter().any(MsTree::has_action),
            MsTree::Act(..) => true,
        }
    }

    /// Number of factor-set symbols.
    pub fn factor_sets(&self) -> usize {
        match self {
            MsTree::Var(_) => 0,
            MsTree::Op(_, args) => args.iter().map(MsTree::factor_sets).sum(),
            MsTree::Act(_, _, slots) => {
                slots.iter().map(|s| if let Slot::I(t) = s { t.factor_sets() } else { 0 }).sum()
            }
            MsTree::Plus(..) | MsTree::Scalar(..) | MsTree::Factor(..) => 1,
        }
    }

    /// Whether the tree survives on an affine datum: no operations of `I`
    /// and only unary action symbols.
    pub fn survives_affine(&self) -> bool {
        match self {
            MsTree::Var(_) | MsTree::Plus(..) | MsTree::Scalar(..) | MsTree::Factor(..) => true,
            MsTree::Op(..) => false,
            MsTree::Act(_, mask, slots) => {
                mask.count_ones() == 1 && slots.iter().all(|s| !matches!(s, Slot::I(t) if !t.survives_affine()))
            }
        }
    }

    /// Operation, action and factor-set symbols, those inside `Q`-terms included.
    pub fn symbol_count(&self) -> usize {
        match self {
            MsTree::Var(_) => 0,
            MsTree::Op(_, args) => 1 + args.iter().map(MsTree::symbol_count).sum::<usize>(),
            MsTree::Act(_, _, slots) => {
                1 + slots
                    .iter()
                    .map(|s| match s {
                        Slot::Q(q) => term_symbols(q),
                        Slot::I(t) => t.symbol_count(),
                    })
                    .sum::<usize>()
            }
            MsTree::Plus(x, y) => 1 + term_symbols(x) + term_symbols(y),
            MsTree::Scalar(_, x) => 1 + term_symbols(x),
            MsTree::Factor(_, xs) => 1 + xs.iter().map(term_symbols).sum::<usize>(),
        }
    }
}

fn term_symbols(t: &Term) -> usize {
    match t {
        Term::Var(_) | Term::Zero => 0,
        Term::Neg(a) | Term::Scalar(_, a) => term_symbols(a),
        Term::Plus(a, b) => term_symbols(a) + term_symbols(b),
        Term::Apply(_, args) => 1 + args.iter().map(term_symbols).sum::<usize>(),
    }
}

/// `coef * params * tree`; parameters kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub coef: i64,
    pub params: Vec<usize>,
    pub tree: MsTree,
}

impl Monomial {
    fn unit(tree: MsTree) -> Monomial {
        Monomial { coef: 1, params: Vec::new(), tree }
    }

    fn scaled(&self, c: &Coef) -> Monomial {
        let mut m = self.clone();
        match c {
            Coef::Int(r) => m.coef *= *r as i64,
            Coef::Param(p) => {
                m.params.push(*p);
                m.params.sort_unstable();
            }
        }
        m
    }

    fn negated(&self) -> Monomial {
        Monomial { coef: -self.coef, ..self.clone() }
    }
}

/// A sum of monomials.
pub type MsSum = Vec<Monomial>;

/// The three parts of a term's first coordinate and its second coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitResult {
    pub t_i: MsSum,
    pub t_star: MsSum,
    pub t_del: MsSum,
    pub t_q: Term,
}

/// Expands `t` with variables indexed by position in `vars`.
pub fn split(t: &Term, vars: &[String]) -> Result<SplitResult> {
    let (sum, t_q) = expand(t, vars)?;
    let mut out = SplitResult { t_i: Vec::new(), t_star: Vec::new(), t_del: Vec::new(), t_q };
    for m in sum {
        if m.tree.has_factor_set() {
            out.t_del.push(m);
        } else if m.tree.has_action() {
            out.t_star.push(m);
        } else {
            out.t_i.push(m);
        }
    }
    Ok(out)
}

fn expand(t: &Term, vars: &[String]) -> Result<(MsSum, Term)> {
    Ok(match t {
        Term::Var(v) => {
            let k = vars.iter().position(|w| w == v).ok_or_else(|| Error::UnboundVariable(v.clone()))?;
            (vec![Monomial::unit(MsTree::Var(k))], t.clone())
        }
        Term::Zero => (Vec::new(), Term::Zero),
        Term::Plus(a, b) => {
            let (mut sa, qa) = expand(a, vars)?;
            let (sb, qb) = expand(b, vars)?;
            sa.extend(sb);
            sa.push(Monomial::unit(MsTree::Plus(qa.clone(), qb.clone())));
            (sa, Term::plus(qa, qb))
        }
        Term::Neg(a) => {
            // -<a,x> = <-a - T_+(x,-x), -x>
            let (sa, qa) = expand(a, vars)?;
            let mut out: MsSum = sa.iter().map(Monomial::negated).collect();
            out.push(Monomial::unit(MsTree::Plus(qa.clone(), Term::neg(qa.clone()))).negated());
            (out, Term::neg(qa))
        }
        Term::Scalar(c, a) => {
            let (sa, qa) = expand(a, vars)?;
            let mut out: MsSum = sa.iter().map(|m| m.scaled(c)).collect();
            out.push(Monomial::unit(MsTree::Scalar(c.clone(), qa.clone())));
            (out, Term::Scalar(c.clone(), Box::new(qa)))
        }
        Term::Apply(f, args) => {
            let parts: Vec<(MsSum, Term)> = args.iter().map(|a| expand(a, vars)).collect::<Result<_>>()?;
            let qs: Vec<Term> = parts.iter().map(|p| p.1.clone()).collect();
            let n = args.len();
            let mut out = Vec::new();
            // f^I, multilinear in every slot
            for pick in choices(&parts, (1u32 << n) - 1) {
                let (coef, params, trees) = combine(&pick);
                out.push(Monomial { coef, params, tree: MsTree::Op(*f, trees) });
            }
            for mask in proper_subsets(n) {
                for pick in choices(&parts, mask) {
                    let (coef, params, trees) = combine(&pick);
                    let mut it = trees.into_iter();
                    let slots = (0..n)
                        .map(|k| if mask & (1 << k) != 0 { Slot::I(it.next().unwrap()) } else { Slot::Q(qs[k].clone()) })
                        .collect();
                    out.push(Monomial { coef, params, tree: MsTree::Act(*f, mask, slots) });
                }
            }
            out.push(Monomial::unit(MsTree::Factor(*f, qs.clone())));
            (out, Term::Apply(*f, qs))
        }
    })
}

/// Every choice of one monomial from each slot in `mask`.
fn choices(parts: &[(MsSum, Term)], mask: u32) -> Vec<Vec<Monomial>> {
    let mut acc: Vec<Vec<Monomial>> = vec![Vec::new()];
    for (k, (sum, _)) in parts.iter().enumerate() {
        if mask & (1 << k) == 0 {
            continue;
        }
        acc = acc.into_iter().flat_map(|p| sum.iter().map(move |m| [p.clone(), vec![m.clone()]].concat())).collect();
    }
    acc
}

fn combine(pick: &[Monomial]) -> (i64, Vec<usize>, Vec<MsTree>) {
    let coef = pick.iter().map(|m| m.coef).product();
    let mut params: Vec<usize> = pick.iter().flat_map(|m| m.params.iter().copied()).collect();
    params.sort_unstable();
    (coef, params, pick.iter().map(|m| m.tree.clone()).collect())
}

/// Which cocycle identity to emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Emit {
    General,
    Action,
    Strict,
}

/// An identity between two sums of multisorted monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MsIdentity {
    pub lhs: MsSum,
    pub rhs: MsSum,
    /// Variables of the source identity; `I`-coordinates share the indices.
    pub vars: Vec<String>,
}

/// The cocycle identity of `id`. With `cancel`, like monomials are collected
/// and matching summands removed from both sides.
pub fn cocycle_identity(id: &Identity, emit: Emit, cancel: bool) -> Result<MsIdentity> {
    let l = split(&id.lhs, &id.vars)?;
    let r = split(&id.rhs, &id.vars)?;
    let pick = |s: SplitResult| -> MsSum {
        match emit {
            Emit::General => [s.t_star, s.t_del].concat(),
            Emit::Action => s.t_star,
            Emit::Strict => s.t_del,
        }
    };
    let (mut lhs, mut rhs) = (pick(l), pick(r));
    if cancel {
        lhs = collect(lhs);
        rhs = collect(rhs);
        cancel_across(&mut lhs, &mut rhs);
    }
    Ok(MsIdentity { lhs, rhs, vars: id.vars.clone() })
}

pub fn general_identity(id: &Identity) -> Result<MsIdentity> {
    cocycle_identity(id, Emit::General, true)
}

pub fn action_identity(id: &Identity) -> Result<MsIdentity> {
    cocycle_identity(id, Emit::Action, true)
}

pub fn strict_identity(id: &Identity) -> Result<MsIdentity> {
    cocycle_identity(id, Emit::Strict, true)
}

fn collect(sum: MsSum) -> MsSum {
    let mut acc: BTreeMap<(Vec<usize>, MsTree), i64> = BTreeMap::new();
    for m in sum {
        *acc.entry((m.params, m.tree)).or_insert(0) += m.coef;
    }
    acc.into_iter().filter(|(_, c)| *c != 0).map(|((params, tree), coef)| Monomial { coef, params, tree }).collect()
}

fn cancel_across(lhs: &mut MsSum, rhs: &mut MsSum) {
    for l in lhs.iter_mut() {
        if let Some(r) = rhs.iter_mut().find(|r| r.params == l.params && r.tree == l.tree) {
            if l.coef.signum() == r.coef.signum() {
                let common = l.coef.abs().min(r.coef.abs()) * l.coef.signum();
                l.coef -= common;
                r.coef -= common;
            }
        }
    }
    lhs.retain(|m| m.coef != 0);
    rhs.retain(|m| m.coef != 0);
}

impl MsIdentity {
    /// Drops the monomials that vanish on an affine datum.
    pub fn affine(&self) -> MsIdentity {
        let keep = |s: &MsSum| s.iter().filter(|m| m.tree.survives_affine()).cloned().collect();
        MsIdentity { lhs: keep(&self.lhs), rhs: keep(&self.rhs), vars: self.vars.clone() }
    }

    pub fn display(&self, n: &Notation) -> String {
        format!("{} = {}", n.sum(&self.lhs, &self.vars), n.sum(&self.rhs, &self.vars))
    }

    pub fn sexpr(&self, n: &Notation) -> String {
        format!("(= {} {})", n.sum_sexpr(&self.lhs, &self.vars), n.sum_sexpr(&self.rhs, &self.vars))
    }

    /// Whether both sides agree on the datum and cocycle for every assignment.
    pub fn holds(&self, d: &Datum, t: &Cocycle, params: &[u64]) -> Result<bool> {
        let k = self.vars.len();
        for iv in crate::modcore::TupleIter::new(d.ni(), k) {
            for qv in crate::modcore::TupleIter::new(d.nq(), k) {
                let env = MsEnv { vars: &self.vars, i: &iv, q: &qv, params };
                if eval_sum(d, t, &self.lhs, &env)? != eval_sum(d, t, &self.rhs, &env)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Printing conventions for multisorted monomials.
#[derive(Clone, Debug)]
pub struct Notation {
    pub syntax: Syntax,
    /// With a single operation of arity two or more which is binary, its
    /// actions print as `a ∘ y` and `x ∗ b`.
    pub infix: Option<usize>,
}

impl Notation {
    pub fn new(syntax: Syntax) -> Notation {
        let multi: Vec<usize> = (0..syntax.sig.len()).filter(|&f| syntax.sig.arity(f) >= 2).collect();
        let infix = if multi.len() == 1 && syntax.sig.arity(multi[0]) == 2 { Some(multi[0]) } else { None };
        Notation { syntax, infix }
    }

    /// Names of the `I`-coordinates: `a, b, c, ...` avoiding the variables.
    pub fn i_names(&self, vars: &[String]) -> Vec<String> {
        let mut pool = ('a'..='w').map(String::from).filter(|c| !vars.contains(c));
        vars.iter().map(|v| pool.next().unwrap_or_else(|| format!("{v}'"))).collect()
    }

    fn q(&self, t: &Term) -> String {
        t.display(&self.syntax)
    }

    fn q_operand(&self, t: &Term) -> String {
        match t {
            Term::Plus(..) | Term::Neg(_) | Term::Scalar(..) => format!("({})", self.q(t)),
            _ => self.q(t),
        }
    }

    fn factor_name(&self, f: usize) -> String {
        if self.syntax.sig.len() == 1 {
            "T".into()
        } else {
            format!("T_{}", self.syntax.sig.name(f))
        }
    }

    fn coef(&self, c: &Coef) -> String {
        match c {
            Coef::Int(r) => r.to_string(),
            Coef::Param(p) => self.syntax.params[*p].clone(),
        }
    }

    pub fn tree(&self, t: &MsTree, names: &[String]) -> String {
        match t {
            MsTree::Var(k) => names[*k].clone(),
            MsTree::Op(f, args) => {
                let parts: Vec<String> = args.iter().map(|a| self.tree(a, names)).collect();
                if Some(*f) == self.syntax.bracket && args.len() == 2 {
                    format!("[{}, {}]", parts[0], parts[1])
                } else {
                    format!("{}({})", self.syntax.sig.name(*f), parts.join(", "))
                }
            }
            MsTree::Act(f, mask, slots) if Some(*f) == self.infix => {
                let operand = |s: &Slot| match s {
                    Slot::Q(q) => self.q_operand(q),
                    Slot::I(t @ MsTree::Act(..)) => format!("({})", self.tree(t, names)),
                    Slot::I(t) => self.tree(t, names),
                };
                let op = if *mask == 1 { "∘" } else { "∗" };
                format!("{} {op} {}", operand(&slots[0]), operand(&slots[1]))
            }
            MsTree::Act(f, mask, slots) => {
                let s: Vec<String> = (0..slots.len()).filter(|k| mask & (1 << k) != 0).map(|k| (k + 1).to_string()).collect();
                let args: Vec<String> = slots
                    .iter()
                    .map(|sl| match sl {
                        Slot::Q(q) => self.q(q),
                        Slot::I(t) => self.tree(t, names),
                    })
                    .collect();
                format!("a({},{{{}}})({})", self.syntax.sig.name(*f), s.join(","), args.join(", "))
            }
            MsTree::Plus(x, y) => format!("T_+({}, {})", self.q(x), self.q(y)),
            MsTree::Scalar(c, x) => format!("T_{}({})", self.coef(c), self.q(x)),
            MsTree::Factor(f, xs) => {
                let args: Vec<String> = xs.iter().map(|x| self.q(x)).collect();
                format!("{}({})", self.factor_name(*f), args.join(", "))
            }
        }
    }

    fn monomial(&self, m: &Monomial, names: &[String]) -> (bool, String) {
        let mut s = String::new();
        let mag = m.coef.unsigned_abs();
        if mag != 1 {
            write!(s, "{mag} ").unwrap();
        }
        for p in &m.params {
            write!(s, "{} ", self.syntax.params[*p]).unwrap();
        }
        s.push_str(&self.tree(&m.tree, names));
        (m.coef < 0, s)
    }

    /// Summands sorted by symbol count, then by their printed form.
    pub fn sum(&self, sum: &MsSum, vars: &[String]) -> String {
        if sum.is_empty() {
            return "0".into();
        }
        let names = self.i_names(vars);
        let mut items: Vec<(usize, String, bool)> = sum
            .iter()
            .map(|m| {
                let (neg, s) = self.monomial(m, &names);
                (m.tree.symbol_count(), s, neg)
            })
            .collect();
        items.sort();
        let mut out = String::new();
        for (k, (_, s, neg)) in items.iter().enumerate() {
            match (k, neg) {
                (0, false) => {}
                (0, true) => out.push_str("- "),
                (_, false) => out.push_str(" + "),
                (_, true) => out.push_str(" - "),
            }
            out.push_str(s);
        }
        out
    }

    fn q_sexpr(&self, t: &Term) -> String {
        match t {
            Term::Var(v) => v.clone(),
            Term::Zero => "0".into(),
            Term::Neg(a) => format!("(neg {})", self.q_sexpr(a)),
            Term::Plus(a, b) => format!("(+ {} {})", self.q_sexpr(a), self.q_sexpr(b)),
            Term::Scalar(c, a) => format!("(scale {} {})", self.coef(c), self.q_sexpr(a)),
            Term::Apply(f, args) => {
                let a: Vec<String> = args.iter().map(|x| self.q_sexpr(x)).collect();
                format!("({} {})", self.syntax.sig.name(*f), a.join(" "))
            }
        }
    }

    pub fn tree_sexpr(&self, t: &MsTree, names: &[String]) -> String {
        match t {
            MsTree::Var(k) => names[*k].clone(),
            MsTree::Op(f, args) => {
                let a: Vec<String> = args.iter().map(|x| self.tree_sexpr(x, names)).collect();
                format!("({} {})", self.syntax.sig.name(*f), a.join(" "))
            }
            MsTree::Act(f, mask, slots) => {
                let s: Vec<String> = (0..slots.len()).filter(|k| mask & (1 << k) != 0).map(|k| (k + 1).to_string()).collect();
                let a: Vec<String> = slots
                    .iter()
                    .map(|sl| match sl {
                        Slot::Q(q) => format!("(q {})", self.q_sexpr(q)),
                        Slot::I(t) => format!("(i {})", self.tree_sexpr(t, names)),
                    })
                    .collect();
                format!("(act {} ({}) {})", self.syntax.sig.name(*f), s.join(" "), a.join(" "))
            }
            MsTree::Plus(x, y) => format!("(T+ {} {})", self.q_sexpr(x), self.q_sexpr(y)),
            MsTree::Scalar(c, x) => format!("(Tr {} {})", self.coef(c), self.q_sexpr(x)),
            MsTree::Factor(f, xs) => {
                let a: Vec<String> = xs.iter().map(|x| self.q_sexpr(x)).collect();
                format!("(T {} {})", self.syntax.sig.name(*f), a.join(" "))
            }
        }
    }

    pub fn sum_sexpr(&self, sum: &MsSum, vars: &[String]) -> String {
        let names = self.i_names(vars);
        let items: Vec<String> = sum
            .iter()
            .map(|m| {
                let params: Vec<&str> = m.params.iter().map(|p| self.syntax.params[*p].as_str()).collect();
                format!("(* {} ({}) {})", m.coef, params.join(" "), self.tree_sexpr(&m.tree, &names))
            })
            .collect();
        format!("(+ {})", items.join(" ")).replace("(+ )", "(+)")
    }
}

/// An assignment `<i[k], q[k]>` to each variable, and parameter values.
#[derive(Clone, Copy, Debug)]
pub struct MsEnv<'a> {
    pub vars: &'a [String],
    pub i: &'a [usize],
    pub q: &'a [usize],
    pub params: &'a [u64],
}

fn eval_q(d: &Datum, t: &Term, env: &MsEnv) -> Result<usize> {
    let map: BTreeMap<String, usize> = env.vars.iter().cloned().zip(env.q.iter().copied()).collect();
    eval_tables(d.q.tables(), t, &map, env.params)
}

fn coef_value(c: &Coef, params: &[u64], m: u64) -> Result<u64> {
    Ok(match c {
        Coef::Int(r) => r % m,
        Coef::Param(p) => *params.get(*p).ok_or_else(|| Error::UnknownSymbol(format!("parameter #{p}")))? % m,
    })
}

/// Evaluates a multisorted tree in the datum with the cocycle.
pub fn eval_ms(d: &Datum, t: &Cocycle, tree: &MsTree, env: &MsEnv) -> Result<usize> {
    let i = &d.i;
    Ok(match tree {
        MsTree::Var(k) => *env.i.get(*k).ok_or_else(|| Error::UnboundVariable(format!("#{k}")))?,
        MsTree::Op(f, args) => {
            let vals: Vec<usize> = args.iter().map(|a| eval_ms(d, t, a, env)).collect::<Result<_>>()?;
            i.op(*f, &vals)
        }
        MsTree::Act(f, mask, slots) => {
            let n = slots.len();
            let (mut qs, mut is) = (vec![0; n], vec![0; n]);
            for (k, s) in slots.iter().enumerate() {
                match s {
                    Slot::Q(q) => qs[k] = eval_q(d, q, env)?,
                    Slot::I(a) => is[k] = eval_ms(d, t, a, env)?,
                }
            }
            t.action.get(*f, *mask, &qs, &is)
        }
        MsTree::Plus(x, y) => t.tplus(eval_q(d, x, env)?, eval_q(d, y, env)?),
        MsTree::Scalar(c, x) => t.tr(coef_value(c, env.params, d.modulus())?, eval_q(d, x, env)?),
        MsTree::Factor(f, xs) => {
            let vals: Vec<usize> = xs.iter().map(|x| eval_q(d, x, env)).collect::<Result<_>>()?;
            t.tf(*f, &vals)
        }
    })
}

pub fn eval_sum(d: &Datum, t: &Cocycle, sum: &MsSum, env: &MsEnv) -> Result<usize> {
    let (i, m) = (&d.i, d.modulus());
    let mut acc = 0;
    for mono in sum {
        let mut v = eval_ms(d, t, &mono.tree, env)?;
        for p in &mono.params {
            v = i.scale(coef_value(&Coef::Param(*p), env.params, m)?, v);
        }
        let c = mono.coef.rem_euclid(m as i64) as u64;
        acc = i.add(acc, i.scale(c, v));
    }
    Ok(acc)
}

/// Removes whitespace and sorts the summands of each side, for comparing
/// printed identities.
pub fn normalize(text: &str) -> String {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let sides: Vec<String> = compact
        .splitn(2, '=')
        .map(|side| {
            let mut parts = top_level_summands(side);
            parts.sort();
            parts.join("+")
        })
        .collect();
    sides.join("=")
}

fn top_level_summands(side: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in side.chars() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if depth == 0 && (c == '+' || c == '-') && !cur.is_empty() && !cur.ends_with('_') {
            parts.push(std::mem::take(&mut cur));
        }
        if !(depth == 0 && c == '+' && !cur.ends_with('_')) {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        parts.push(cur);
    }
    parts
}

/// A random term over `sig` in the given variables, at most `depth` deep.
pub fn random_term<R: rand::Rng>(rng: &mut R, sig: &crate::algebra::Signature, vars: &[String], depth: u32, modulus: u64) -> Term {
    let leaf = |rng: &mut R| Term::Var(vars[rng.gen_range(0..vars.len())].clone());
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..6 + sig.len()) {
        0 => leaf(rng),
        1 => Term::Zero,
        2 => Term::plus(random_term(rng, sig, vars, depth - 1, modulus), random_term(rng, sig, vars, depth - 1, modulus)),
        3 => Term::neg(random_term(rng, sig, vars, depth - 1, modulus)),
        4 => Term::scalar(rng.gen_range(0..modulus.max(1)), random_term(rng, sig, vars, depth - 1, modulus)),
        k => {
            let f = (k - 5) % sig.len().max(1);
            if sig.is_empty() {
                return leaf(rng);
            }
            let args = (0..sig.arity(f)).map(|_| random_term(rng, sig, vars, depth - 1, modulus)).collect();
            Term::Apply(f, args)
        }
    }
}

/// Compares the expansion of `term` with its value in the semidirect tables
/// at every assignment; returns the first disagreement.
pub fn soundness_failure(d: &Datum, t: &Cocycle, term: &Term, vars: &[String], params: &[u64]) -> Result<Option<String>> {
    let sd = crate::cocycle::semidirect(d, t)?;
    let s = split(term, vars)?;
    let all: MsSum = [s.t_i, s.t_star, s.t_del].concat();
    let k = vars.len();
    for iv in crate::modcore::TupleIter::new(d.ni(), k) {
        for qv in crate::modcore::TupleIter::new(d.nq(), k) {
            let env: BTreeMap<String, usize> = (0..k).map(|j| (vars[j].clone(), sd.pair(iv[j], qv[j]))).collect();
            let (a, x) = sd.unpair(eval_tables(sd.tables(), term, &env, params)?);
            let ms = MsEnv { vars, i: &iv, q: &qv, params };
            if eval_sum(d, t, &all, &ms)? != a || eval_q(d, &s.t_q, &ms)? != x {
                return Ok(Some(format!("I = {iv:?}, Q = {qv:?}")));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests;
