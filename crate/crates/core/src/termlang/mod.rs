//! Terms over the signature of module operations plus `F`, identities,
//! varieties, and exhaustive satisfaction on finite algebras.

mod parse;

pub use parse::{parse_identity, parse_term};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::algebra::{Algebra, Signature, Tables};
use crate::error::{Error, Result};
use crate::modcore::TupleIter;

/// A scalar: a residue of `Z/m` or a named ring parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coef {
    Int(u64),
    Param(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Zero,
    Neg(Box<Term>),
    Plus(Box<Term>, Box<Term>),
    Scalar(Coef, Box<Term>),
    Apply(usize, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn plus(a: Term, b: Term) -> Term {
        Term::Plus(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Term) -> Term {
        Term::Neg(Box::new(a))
    }

    pub fn scalar(r: u64, a: Term) -> Term {
        Term::Scalar(Coef::Int(r), Box::new(a))
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Zero => {}
            Term::Neg(a) | Term::Scalar(_, a) => a.collect_vars(out),
            Term::Plus(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::Apply(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Replaces variables by terms.
    pub fn substitute(&self, map: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Zero => Term::Zero,
            Term::Neg(a) => Term::neg(a.substitute(map)),
            Term::Plus(a, b) => Term::plus(a.substitute(map), b.substitute(map)),
            Term::Scalar(c, a) => Term::Scalar(c.clone(), Box::new(a.substitute(map))),
            Term::Apply(f, args) => Term::Apply(*f, args.iter().map(|a| a.substitute(map)).collect()),
        }
    }

    pub fn display(&self, syn: &Syntax) -> String {
        let mut s = String::new();
        fmt_sum(self, syn, &mut s);
        s
    }
}

fn fmt_sum(t: &Term, syn: &Syntax, out: &mut String) {
    match t {
        Term::Plus(a, b) => {
            fmt_sum(a, syn, out);
            match &**b {
                Term::Neg(c) => {
                    out.push_str(" - ");
                    fmt_prod(c, syn, out);
                }
                _ => {
                    out.push_str(" + ");
                    fmt_prod(b, syn, out);
                }
            }
        }
        _ => fmt_prod(t, syn, out),
    }
}

fn fmt_prod(t: &Term, syn: &Syntax, out: &mut String) {
    match t {
        Term::Scalar(c, a) => {
            match c {
                Coef::Int(r) => write!(out, "{r}").unwrap(),
                Coef::Param(p) => out.push_str(&syn.params[*p]),
            }
            out.push('*');
            fmt_prod(a, syn, out);
        }
        _ => fmt_atom(t, syn, out),
    }
}

fn fmt_atom(t: &Term, syn: &Syntax, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(v),
        Term::Zero => out.push('0'),
        Term::Neg(a) => {
            out.push('-');
            fmt_atom(a, syn, out);
        }
        Term::Apply(f, args) if Some(*f) == syn.bracket && args.len() == 2 => {
            out.push('[');
            fmt_sum(&args[0], syn, out);
            out.push_str(", ");
            fmt_sum(&args[1], syn, out);
            out.push(']');
        }
        Term::Apply(f, args) => {
            out.push_str(syn.sig.name(*f));
            out.push('(');
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                fmt_sum(a, syn, out);
            }
            out.push(')');
        }
        Term::Plus(..) | Term::Scalar(..) => {
            out.push('(');
            fmt_sum(t, syn, out);
            out.push(')');
        }
    }
}

/// Everything needed to read and print terms: the operation symbols, the
/// ring modulus, declared scalar parameters and the optional bracket symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syntax {
    pub sig: Signature,
    pub modulus: u64,
    pub params: Vec<String>,
    pub bracket: Option<usize>,
}

impl Syntax {
    /// The bracket defaults to the only binary operation, if there is exactly one.
    pub fn new(sig: Signature, modulus: u64) -> Syntax {
        let binary: Vec<usize> = (0..sig.len()).filter(|&i| sig.arity(i) == 2).collect();
        let bracket = if binary.len() == 1 { Some(binary[0]) } else { None };
        Syntax { sig, modulus, params: Vec::new(), bracket }
    }

    pub fn with_params(mut self, params: &[&str]) -> Syntax {
        self.params = params.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_bracket(mut self, bracket: Option<usize>) -> Syntax {
        self.bracket = bracket;
        self
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Identity {
    pub lhs: Term,
    pub rhs: Term,
    pub vars: Vec<String>,
}

impl Identity {
    pub fn new(lhs: Term, rhs: Term) -> Identity {
        let mut vars = lhs.vars();
        for v in rhs.vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        Identity { lhs, rhs, vars }
    }

    pub fn display(&self, syn: &Syntax) -> String {
        format!("{} = {}", self.lhs.display(syn), self.rhs.display(syn))
    }
}

/// A finite set of identities over a syntax, with values for the parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variety {
    pub name: String,
    pub syntax: Syntax,
    pub param_values: Vec<u64>,
    pub identities: Vec<Identity>,
}

impl Variety {
    pub fn new(name: &str, syntax: Syntax) -> Variety {
        let k = syntax.params.len();
        Variety { name: name.to_string(), syntax, param_values: vec![0; k], identities: Vec::new() }
    }

    /// Modules expanded by multilinear operations with no further identities.
    pub fn mlf(sig: Signature, modulus: u64) -> Variety {
        Variety::new("mlf", Syntax::new(sig, modulus))
    }

    pub fn add_identity(&mut self, text: &str) -> Result<()> {
        let id = parse_identity(text, &self.syntax)?;
        self.identities.push(id);
        Ok(())
    }

    pub fn set_param(&mut self, name: &str, value: u64) -> Result<()> {
        let p = self.syntax.param_index(name).ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        self.param_values[p] = value % self.syntax.modulus;
        Ok(())
    }

    /// The stated identities together with the module and multilinearity axioms.
    pub fn with_axioms(&self) -> Vec<Identity> {
        let mut out = module_axioms(&self.syntax);
        out.extend(self.identities.iter().cloned());
        out
    }
}

/// Module axioms over `Z/m` and additivity and homogeneity of every operation in every slot.
pub fn module_axioms(syn: &Syntax) -> Vec<Identity> {
    let m = syn.modulus;
    let (x, y, z) = (Term::var("x"), Term::var("y"), Term::var("z"));
    let mut out = vec![
        Identity::new(Term::plus(x.clone(), Term::plus(y.clone(), z.clone())), Term::plus(Term::plus(x.clone(), y.clone()), z.clone())),
        Identity::new(Term::plus(x.clone(), Term::Zero), x.clone()),
        Identity::new(Term::plus(x.clone(), Term::neg(x.clone())), Term::Zero),
        Identity::new(Term::plus(x.clone(), y.clone()), Term::plus(y.clone(), x.clone())),
        Identity::new(Term::scalar(1 % m, x.clone()), x.clone()),
    ];
    for r in 0..m {
        out.push(Identity::new(
            Term::scalar(r, Term::plus(x.clone(), y.clone())),
            Term::plus(Term::scalar(r, x.clone()), Term::scalar(r, y.clone())),
        ));
        for s in 0..m {
            out.push(Identity::new(
                Term::scalar((r + s) % m, x.clone()),
                Term::plus(Term::scalar(r, x.clone()), Term::scalar(s, x.clone())),
            ));
            out.push(Identity::new(Term::scalar(r * s % m, x.clone()), Term::scalar(r, Term::scalar(s, x.clone()))));
        }
    }
    for f in 0..syn.sig.len() {
        let n = syn.sig.arity(f);
        let base: Vec<Term> = (0..n).map(|i| Term::var(&format!("u{}", i + 1))).collect();
        for slot in 0..n {
            let with = |t: Term| {
                let mut args = base.clone();
                args[slot] = t;
                Term::Apply(f, args)
            };
            out.push(Identity::new(
                with(Term::plus(x.clone(), y.clone())),
                Term::plus(with(x.clone()), with(y.clone())),
            ));
            for r in 0..m {
                out.push(Identity::new(with(Term::scalar(r, x.clone())), Term::scalar(r, with(x.clone()))));
            }
        }
    }
    out
}

/// A term with variables resolved to slots and parameters to residues.
#[derive(Clone, Debug)]
enum Node {
    Var(usize),
    Zero,
    Neg(Box<Node>),
    Plus(Box<Node>, Box<Node>),
    Scalar(u64, Box<Node>),
    Apply(usize, Vec<Node>),
}

fn compile(t: &Term, vars: &[String], params: &[u64], m: u64) -> Result<Node> {
    Ok(match t {
        Term::Var(v) => Node::Var(vars.iter().position(|w| w == v).ok_or_else(|| Error::UnboundVariable(v.clone()))?),
        Term::Zero => Node::Zero,
        Term::Neg(a) => Node::Neg(Box::new(compile(a, vars, params, m)?)),
        Term::Plus(a, b) => Node::Plus(Box::new(compile(a, vars, params, m)?), Box::new(compile(b, vars, params, m)?)),
        Term::Scalar(c, a) => {
            let r = match c {
                Coef::Int(r) => *r % m,
                Coef::Param(p) => {
                    *params.get(*p).ok_or_else(|| Error::UnknownSymbol(format!("parameter #{p}")))? % m
                }
            };
            Node::Scalar(r, Box::new(compile(a, vars, params, m)?))
        }
        Term::Apply(f, args) => Node::Apply(*f, args.iter().map(|a| compile(a, vars, params, m)).collect::<Result<_>>()?),
    })
}

fn run(n: &Node, t: &Tables, env: &[usize]) -> usize {
    match n {
        Node::Var(i) => env[*i],
        Node::Zero => 0,
        Node::Neg(a) => t.neg(run(a, t, env)),
        Node::Plus(a, b) => t.add(run(a, t, env), run(b, t, env)),
        Node::Scalar(r, a) => t.scale(*r, run(a, t, env)),
        Node::Apply(f, args) => {
            let vals: Vec<usize> = args.iter().map(|a| run(a, t, env)).collect();
            t.apply(*f, &vals)
        }
    }
}

fn check_arities(t: &Term, tables: &Tables) -> Result<()> {
    match t {
        Term::Apply(f, args) => {
            let expected = *tables.arities.get(*f).ok_or_else(|| Error::UnknownSymbol(format!("operation #{f}")))?;
            if expected != args.len() {
                return Err(Error::ArityMismatch { symbol: format!("#{f}"), expected, found: args.len() });
            }
            args.iter().try_for_each(|a| check_arities(a, tables))
        }
        Term::Neg(a) | Term::Scalar(_, a) => check_arities(a, tables),
        Term::Plus(a, b) => {
            check_arities(a, tables)?;
            check_arities(b, tables)
        }
        _ => Ok(()),
    }
}

/// Evaluates `t` on operation tables with variables bound by name.
pub fn eval_tables(tables: &Tables, t: &Term, env: &BTreeMap<String, usize>, params: &[u64]) -> Result<usize> {
    check_arities(t, tables)?;
    let vars: Vec<String> = env.keys().cloned().collect();
    let vals: Vec<usize> = env.values().copied().collect();
    if let Some(&bad) = vals.iter().find(|&&v| v >= tables.n) {
        return Err(Error::Validation(format!("element index {bad} out of range")));
    }
    let node = compile(t, &vars, params, tables.modulus)?;
    Ok(run(&node, tables, &vals))
}

pub fn eval_term(a: &Algebra, t: &Term, env: &BTreeMap<String, usize>, params: &[u64]) -> Result<usize> {
    eval_tables(a.tables(), t, env, params)
}

/// Outcome of an exhaustive satisfaction check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Satisfaction {
    Holds,
    /// The lexicographically first failing assignment, in variable order.
    Counterexample(Vec<(String, usize)>),
}

impl Satisfaction {
    pub fn holds(&self) -> bool {
        matches!(self, Satisfaction::Holds)
    }
}

/// Checks an identity on all assignments, first variable most significant.
pub fn holds_tables(tables: &Tables, id: &Identity, params: &[u64]) -> Result<Satisfaction> {
    check_arities(&id.lhs, tables)?;
    check_arities(&id.rhs, tables)?;
    let l = compile(&id.lhs, &id.vars, params, tables.modulus)?;
    let r = compile(&id.rhs, &id.vars, params, tables.modulus)?;
    for env in TupleIter::new(tables.n, id.vars.len()) {
        if run(&l, tables, &env) != run(&r, tables, &env) {
            return Ok(Satisfaction::Counterexample(id.vars.iter().cloned().zip(env).collect()));
        }
    }
    Ok(Satisfaction::Holds)
}

/// Both sides of an identity on every assignment, first variable most significant.
pub fn evaluations(tables: &Tables, id: &Identity, params: &[u64]) -> Result<Vec<(usize, usize)>> {
    check_arities(&id.lhs, tables)?;
    check_arities(&id.rhs, tables)?;
    let l = compile(&id.lhs, &id.vars, params, tables.modulus)?;
    let r = compile(&id.rhs, &id.vars, params, tables.modulus)?;
    Ok(TupleIter::new(tables.n, id.vars.len()).map(|env| (run(&l, tables, &env), run(&r, tables, &env))).collect())
}

pub fn holds(a: &Algebra, id: &Identity, params: &[u64]) -> Result<Satisfaction> {
    holds_tables(a.tables(), id, params)
}

/// The first identity of `ids` that fails, with its counterexample.
pub fn first_violation(tables: &Tables, ids: &[Identity], params: &[u64]) -> Result<Option<(usize, Vec<(String, usize)>)>> {
    for (k, id) in ids.iter().enumerate() {
        if let Satisfaction::Counterexample(env) = holds_tables(tables, id, params)? {
            return Ok(Some((k, env)));
        }
    }
    Ok(None)
}

pub fn in_variety(a: &Algebra, v: &Variety) -> Result<bool> {
    if *a.signature() != v.syntax.sig {
        return Err(Error::Validation(format!("algebra signature does not match variety `{}`", v.name)));
    }
    Ok(first_violation(a.tables(), &v.identities, &v.param_values)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fixtures::f2;
    use crate::modcore::ZmModule;

    fn syn2() -> Syntax {
        Syntax::new(Signature::new(&[("f", 2), ("g", 2)]).unwrap(), 4)
    }

    #[test]
    fn parse_examples() {
        let s = syn2();
        let t = parse_term("f(x, g(y, z))", &s).unwrap();
        assert_eq!(
            t,
            Term::Apply(0, vec![Term::var("x"), Term::Apply(1, vec![Term::var("y"), Term::var("z")])])
        );
        let t = parse_term("2*x + -y", &s).unwrap();
        assert_eq!(t, Term::plus(Term::scalar(2, Term::var("x")), Term::neg(Term::var("y"))));
        let s1 = Syntax::new(Signature::new(&[("f", 2)]).unwrap(), 4);
        assert!(matches!(parse_term("f(x)", &s1), Err(Error::ArityMismatch { expected: 2, found: 1, .. })));
        assert!(matches!(parse_term("h(x)", &s1), Err(Error::UnknownSymbol(_))));
        assert!(matches!(parse_term("x + ", &s1), Err(Error::Parse { col: 5, .. })));
    }

    #[test]
    fn bracket_and_params() {
        let s = Syntax::new(Signature::new(&[("b", 2), ("P", 1)]).unwrap(), 4).with_params(&["λ"]);
        let t = parse_term("[x, [y, z]] - λ*P(x)", &s).unwrap();
        assert_eq!(t.display(&s), "[x, [y, z]] - λ*P(x)");
        assert_eq!(parse_term(&t.display(&s), &s).unwrap(), t);
        assert!(parse_term("[x, y]", &syn2()).is_err());
    }

    #[test]
    fn print_normalizes() {
        let s = syn2();
        for (src, norm) in [
            ("x + (y + z)", "x + (y + z)"),
            ("(x + y) + z", "x + y + z"),
            ("x - 2*(y + z)", "x - 2*(y + z)"),
            ("-(x + y)", "-(x + y)"),
            ("--x", "--x"),
            ("6*x", "2*x"),
        ] {
            let t = parse_term(src, &s).unwrap();
            assert_eq!(t.display(&s), norm);
            assert_eq!(parse_term(norm, &s).unwrap(), t);
        }
    }

    #[test]
    fn eval_examples() {
        let z2 = Algebra::with_zero_ops(ZmModule::new(2, vec![2]).unwrap(), Signature::default());
        let s = Syntax::new(Signature::default(), 2);
        let env: BTreeMap<String, usize> = [("x".to_string(), 1)].into();
        assert_eq!(eval_term(&z2, &parse_term("x + x", &s).unwrap(), &env, &[]).unwrap(), 0);
        assert_eq!(eval_term(&z2, &Term::Zero, &BTreeMap::new(), &[]).unwrap(), 0);
        let a = f2();
        let s = Syntax::new(a.signature().clone(), 2);
        let e2 = a.module().generator(1);
        let env: BTreeMap<String, usize> = [("x".to_string(), e2)].into();
        let v = eval_term(&a, &parse_term("f(x, x)", &s).unwrap(), &env, &[]).unwrap();
        assert_eq!(v, a.module().generator(0));
        assert!(matches!(
            eval_term(&a, &parse_term("f(x, y)", &s).unwrap(), &env, &[]),
            Err(Error::UnboundVariable(_))
        ));
    }

    #[test]
    fn holds_examples() {
        let a = f2();
        let s = Syntax::new(a.signature().clone(), 2);
        let leib = parse_identity("[x, [y, z]] = [[x, y], z] + [y, [x, z]]", &s).unwrap();
        assert!(holds(&a, &leib, &[]).unwrap().holds());
        let e2 = a.module().generator(1);
        let zero = parse_identity("f(x, y) = 0", &s).unwrap();
        assert_eq!(
            holds(&a, &zero, &[]).unwrap(),
            Satisfaction::Counterexample(vec![("x".into(), e2), ("y".into(), e2)])
        );
        let triv = Algebra::with_zero_ops(ZmModule::zero(2), a.signature().clone());
        assert!(holds(&triv, &zero, &[]).unwrap().holds());
    }

    #[test]
    fn variety_examples() {
        let a = f2();
        let mut v = Variety::mlf(a.signature().clone(), 2);
        v.add_identity("[x, [y, z]] = [[x, y], z] + [y, [x, z]]").unwrap();
        assert!(in_variety(&a, &v).unwrap());
        let mut c = Variety::mlf(a.signature().clone(), 2);
        c.add_identity("f(x, y) = f(y, x)").unwrap();
        c.add_identity("f(x, f(y, z)) = f(f(x, y), z)").unwrap();
        assert!(in_variety(&a, &c).unwrap());
        let m = ZmModule::new(2, vec![2]).unwrap();
        let idem = Algebra::new(m, a.signature().clone(), vec![vec![1]]).unwrap();
        let mut n = Variety::mlf(a.signature().clone(), 2);
        n.add_identity("f(x, x) = 0").unwrap();
        assert!(!in_variety(&idem, &n).unwrap());
        let other = Variety::mlf(Signature::new(&[("g", 1)]).unwrap(), 2);
        assert!(in_variety(&a, &other).is_err());
    }

    #[test]
    fn axioms_hold_on_valid_algebras() {
        let a = f2();
        let s = Syntax::new(a.signature().clone(), 2);
        assert!(first_violation(a.tables(), &module_axioms(&s), &[]).unwrap().is_none());
        let mut raw = a.raw();
        raw.tables.ops[0][1] = 1;
        assert!(first_violation(&raw.tables, &module_axioms(&s), &[]).unwrap().is_some());
    }
}
