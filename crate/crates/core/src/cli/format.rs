//! The sectioned text format for workspaces.
//!
//! ```text
//! [ring]
//! modulus = 2
//!
//! [module Z2]
//! factors = 2
//!
//! [algebra F1]
//! module = Z2
//! op f/2: (1,1) -> (0)
//! ```
//!
//! Rows of an algebra take generator indices (from 1); every other table row
//! takes elements, written as parenthesized residue lists. Missing rows are
//! zero. `#` starts a comment and `;` separates entries on one line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::algebra::{ideal_generated, quotient, subalgebra, Algebra, Ideal, Signature};
use crate::cocycle::{proper_subsets, split_mask, Action, Cocycle, Datum, ExtensionRecord};
use crate::error::Error;
use crate::hs::HsDatum;
use crate::modcore::{tuple_index, TupleIter, ZmModule};
use crate::termlang::{Syntax, Variety};

/// A load failure with its position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}:{line}:{col}: {source}")]
pub struct LoadError {
    pub path: String,
    pub line: usize,
    pub col: usize,
    pub source: Error,
}

#[derive(Clone, Debug)]
pub struct AlgebraDef {
    pub module: String,
    pub algebra: Algebra,
}

#[derive(Clone, Debug)]
pub struct IdealDef {
    pub algebra: String,
    pub ideal: Ideal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatumDef {
    pub q: String,
    pub i: String,
}

#[derive(Clone, Debug)]
pub struct ActionDef {
    pub q: String,
    pub i: String,
    pub action: Action,
}

/// Where a cocycle takes its datum and action from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CocycleSource {
    Action(String),
    /// A datum section; the action is trivial.
    Datum(String),
}

#[derive(Clone, Debug)]
pub struct CocycleDef {
    pub source: CocycleSource,
    pub cocycle: Cocycle,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionDef {
    pub m: String,
    pub ideal: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HsDef {
    pub m: String,
    pub ideal: String,
    pub a: String,
    pub action: String,
    pub variety: String,
}

/// Every named object of a session.
#[derive(Clone, Debug)]
pub struct Workspace {
    pub modulus: u64,
    pub modules: BTreeMap<String, ZmModule>,
    pub algebras: BTreeMap<String, AlgebraDef>,
    pub ideals: BTreeMap<String, IdealDef>,
    pub varieties: BTreeMap<String, Variety>,
    pub data: BTreeMap<String, DatumDef>,
    pub actions: BTreeMap<String, ActionDef>,
    pub cocycles: BTreeMap<String, CocycleDef>,
    pub extensions: BTreeMap<String, ExtensionDef>,
    pub hs: BTreeMap<String, HsDef>,
}

impl Default for Workspace {
    fn default() -> Self {
        Workspace::new(2)
    }
}

pub fn fmt_elem(m: &ZmModule, x: usize) -> String {
    let c: Vec<String> = m.coords(x).iter().map(|v| v.to_string()).collect();
    format!("({})", c.join(","))
}

fn fmt_elems(m: &ZmModule, xs: &[usize]) -> String {
    xs.iter().map(|&x| fmt_elem(m, x)).collect::<Vec<_>>().join(",")
}

/// `X/n` list of a signature.
pub fn fmt_signature(sig: &Signature) -> String {
    sig.ops.iter().map(|o| format!("{}/{}", o.name, o.arity)).collect::<Vec<_>>().join(",")
}

fn fmt_mask(mask: u32, n: usize) -> String {
    let s: Vec<String> = (0..n).filter(|k| mask & (1 << k) != 0).map(|k| (k + 1).to_string()).collect();
    format!("{{{}}}", s.join(","))
}

impl Workspace {
    pub fn new(modulus: u64) -> Workspace {
        Workspace {
            modulus,
            modules: BTreeMap::new(),
            algebras: BTreeMap::new(),
            ideals: BTreeMap::new(),
            varieties: BTreeMap::new(),
            data: BTreeMap::new(),
            actions: BTreeMap::new(),
            cocycles: BTreeMap::new(),
            extensions: BTreeMap::new(),
            hs: BTreeMap::new(),
        }
    }

    pub fn algebra(&self, name: &str) -> Result<&Algebra, Error> {
        self.algebras.get(name).map(|a| &a.algebra).ok_or_else(|| Error::UnknownSymbol(format!("algebra {name}")))
    }

    pub fn datum_of(&self, q: &str, i: &str) -> Result<Datum, Error> {
        Datum::new(self.algebra(q)?.clone(), self.algebra(i)?.clone())
    }

    /// The datum named by a cocycle source.
    pub fn source_datum(&self, src: &CocycleSource) -> Result<Datum, Error> {
        match src {
            CocycleSource::Action(a) => {
                let def = self.actions.get(a).ok_or_else(|| Error::UnknownSymbol(format!("action {a}")))?;
                self.datum_of(&def.q, &def.i)
            }
            CocycleSource::Datum(d) => {
                let def = self.data.get(d).ok_or_else(|| Error::UnknownSymbol(format!("datum {d}")))?;
                self.datum_of(&def.q, &def.i)
            }
        }
    }

    pub fn cocycle_datum(&self, name: &str) -> Result<(Datum, Cocycle), Error> {
        let def = self.cocycles.get(name).ok_or_else(|| Error::UnknownSymbol(format!("cocycle {name}")))?;
        Ok((self.source_datum(&def.source)?, def.cocycle.clone()))
    }

    pub fn ideal(&self, name: &str) -> Result<&IdealDef, Error> {
        self.ideals.get(name).ok_or_else(|| Error::UnknownSymbol(format!("ideal {name}")))
    }

    /// A variety by name; `mlf` falls back to the bare multilinear theory over `sig`.
    pub fn variety(&self, name: &str, sig: &Signature) -> Result<Variety, Error> {
        if let Some(v) = self.varieties.get(name) {
            return Ok(v.clone());
        }
        if name == "mlf" {
            return Ok(Variety::mlf(sig.clone(), self.modulus));
        }
        Err(Error::UnknownSymbol(format!("variety {name}")))
    }

    pub fn extension(&self, name: &str) -> Result<ExtensionRecord, Error> {
        let def = self.extensions.get(name).ok_or_else(|| Error::UnknownSymbol(format!("extension {name}")))?;
        let m = self.algebra(&def.m)?;
        let k = &self.ideal(&def.ideal)?.ideal;
        extension_from(m, k)
    }

    pub fn hs_datum(&self, name: &str) -> Result<HsDatum, Error> {
        let def = self.hs.get(name).ok_or_else(|| Error::UnknownSymbol(format!("hs {name}")))?;
        let m = self.algebra(&def.m)?.clone();
        let k = self.ideal(&def.ideal)?.ideal.clone();
        let a = self.algebra(&def.a)?.clone();
        let act = self.actions.get(&def.action).ok_or_else(|| Error::UnknownSymbol(format!("action {}", def.action)))?;
        let v = self.variety(&def.variety, m.signature())?;
        HsDatum::new(m, k, a, act.action.clone(), v)
    }

    /// Copies `other` into `self`; clashing names must carry identical definitions.
    pub fn merge(&mut self, other: &Workspace) -> Result<(), Error> {
        if self.modulus != other.modulus {
            return Err(Error::Validation(format!("modulus {} differs from {}", other.modulus, self.modulus)));
        }
        fn join<T: Clone>(
            a: &mut BTreeMap<String, T>,
            b: &BTreeMap<String, T>,
            kind: &str,
            same: impl Fn(&T, &T) -> bool,
        ) -> Result<(), Error> {
            for (k, v) in b {
                match a.get(k) {
                    Some(w) if !same(w, v) => return Err(Error::Validation(format!("{kind} {k} defined twice"))),
                    Some(_) => {}
                    None => {
                        a.insert(k.clone(), v.clone());
                    }
                }
            }
            Ok(())
        }
        join(&mut self.modules, &other.modules, "module", |a, b| a == b)?;
        join(&mut self.algebras, &other.algebras, "algebra", |a, b| a.algebra == b.algebra)?;
        join(&mut self.ideals, &other.ideals, "ideal", |a, b| a.algebra == b.algebra && a.ideal == b.ideal)?;
        join(&mut self.varieties, &other.varieties, "variety", |a, b| a == b)?;
        join(&mut self.data, &other.data, "datum", |a, b| a == b)?;
        join(&mut self.actions, &other.actions, "action", |a, b| a.action == b.action && a.q == b.q && a.i == b.i)?;
        join(&mut self.cocycles, &other.cocycles, "cocycle", |a, b| a.cocycle == b.cocycle && a.source == b.source)?;
        join(&mut self.extensions, &other.extensions, "extension", |a, b| a == b)?;
        join(&mut self.hs, &other.hs, "hs", |a, b| a == b)?;
        Ok(())
    }

    /// The objects needed to define `kind name`, dependencies included.
    pub fn closure(&self, kind: &str, name: &str) -> Result<Workspace, Error> {
        let mut out = Workspace::new(self.modulus);
        self.copy_into(&mut out, kind, name)?;
        Ok(out)
    }

    fn copy_into(&self, out: &mut Workspace, kind: &str, name: &str) -> Result<(), Error> {
        let missing = || Error::UnknownSymbol(format!("{kind} {name}"));
        match kind {
            "module" => {
                out.modules.insert(name.into(), self.modules.get(name).ok_or_else(missing)?.clone());
            }
            "algebra" => {
                let def = self.algebras.get(name).ok_or_else(missing)?;
                self.copy_into(out, "module", &def.module)?;
                out.algebras.insert(name.into(), def.clone());
            }
            "ideal" => {
                let def = self.ideals.get(name).ok_or_else(missing)?;
                self.copy_into(out, "algebra", &def.algebra)?;
                out.ideals.insert(name.into(), def.clone());
            }
            "variety" => {
                if let Some(v) = self.varieties.get(name) {
                    out.varieties.insert(name.into(), v.clone());
                } else if name != "mlf" {
                    return Err(missing());
                }
            }
            "datum" => {
                let def = self.data.get(name).ok_or_else(missing)?;
                self.copy_into(out, "algebra", &def.q)?;
                self.copy_into(out, "algebra", &def.i)?;
                out.data.insert(name.into(), def.clone());
            }
            "action" => {
                let def = self.actions.get(name).ok_or_else(missing)?;
                self.copy_into(out, "algebra", &def.q)?;
                self.copy_into(out, "algebra", &def.i)?;
                out.actions.insert(name.into(), def.clone());
            }
            "cocycle" => {
                let def = self.cocycles.get(name).ok_or_else(missing)?;
                match &def.source {
                    CocycleSource::Action(a) => self.copy_into(out, "action", a)?,
                    CocycleSource::Datum(d) => self.copy_into(out, "datum", d)?,
                }
                out.cocycles.insert(name.into(), def.clone());
            }
            "extension" => {
                let def = self.extensions.get(name).ok_or_else(missing)?;
                self.copy_into(out, "algebra", &def.m)?;
                self.copy_into(out, "ideal", &def.ideal)?;
                out.extensions.insert(name.into(), def.clone());
            }
            "hs" => {
                let def = self.hs.get(name).ok_or_else(missing)?;
                self.copy_into(out, "algebra", &def.m)?;
                self.copy_into(out, "ideal", &def.ideal)?;
                self.copy_into(out, "algebra", &def.a)?;
                self.copy_into(out, "action", &def.action)?;
                self.copy_into(out, "variety", &def.variety)?;
                out.hs.insert(name.into(), def.clone());
            }
            _ => return Err(Error::Usage(format!("unknown kind {kind}"))),
        }
        Ok(())
    }

    /// Canonical text: sections grouped by kind, names ascending, tables dense.
    pub fn save(&self) -> String {
        let mut s = String::new();
        writeln!(s, "[ring]\nmodulus = {}", self.modulus).unwrap();
        for (name, m) in &self.modules {
            let f: Vec<String> = m.factors().iter().map(|d| d.to_string()).collect();
            writeln!(s, "\n[module {name}]\nfactors = {}", f.join(",")).unwrap();
        }
        for (name, def) in &self.algebras {
            write_algebra(&mut s, name, def);
        }
        for (name, def) in &self.ideals {
            let m = self.algebras[&def.algebra].algebra.module();
            writeln!(s, "\n[ideal {name}]\nalgebra = {}\ngenerators = {}", def.algebra, fmt_elems(m, def.ideal.generators()))
                .unwrap();
        }
        for (name, v) in &self.varieties {
            write_variety(&mut s, name, v);
        }
        for (name, def) in &self.data {
            writeln!(s, "\n[datum {name}]\nQ = {}\nI = {}", def.q, def.i).unwrap();
        }
        for (name, def) in &self.actions {
            writeln!(s, "\n[action {name}]\nQ = {}\nI = {}", def.q, def.i).unwrap();
            let d = self.datum_of(&def.q, &def.i).expect("validated on load");
            write_action_rows(&mut s, &d, &def.action);
        }
        for (name, def) in &self.cocycles {
            let d = self.source_datum(&def.source).expect("validated on load");
            let src = match &def.source {
                CocycleSource::Action(a) => format!("action = {a}"),
                CocycleSource::Datum(x) => format!("datum = {x}"),
            };
            writeln!(s, "\n[cocycle {name}]\n{src}").unwrap();
            write_cocycle_rows(&mut s, &d, &def.cocycle);
        }
        for (name, def) in &self.extensions {
            writeln!(s, "\n[extension {name}]\nM = {}\nideal = {}", def.m, def.ideal).unwrap();
        }
        for (name, def) in &self.hs {
            writeln!(
                s,
                "\n[hs {name}]\nM = {}\nideal = {}\nA = {}\naction = {}\nvariety = {}",
                def.m, def.ideal, def.a, def.action, def.variety
            )
            .unwrap();
        }
        s
    }
}

pub fn extension_from(m: &Algebra, k: &Ideal) -> Result<ExtensionRecord, Error> {
    let (q, pi) = quotient(m, k)?;
    let (i, iota) = subalgebra(m, k)?;
    ExtensionRecord::new(m.clone(), q, i, pi, iota)
}

fn write_algebra(s: &mut String, name: &str, def: &AlgebraDef) {
    let a = &def.algebra;
    let m = a.module();
    let k = m.rank();
    writeln!(s, "\n[algebra {name}]\nmodule = {}\nsignature = {}", def.module, fmt_signature(a.signature())).unwrap();
    for (f, op) in a.ops().iter().enumerate() {
        let ar = a.signature().arity(f);
        for gens in TupleIter::new(k, ar) {
            let v = op.constants[tuple_index(k, &gens)];
            let g: Vec<String> = gens.iter().map(|g| (g + 1).to_string()).collect();
            writeln!(s, "op {}/{}: ({}) -> {}", op.name, ar, g.join(","), fmt_elem(m, v)).unwrap();
        }
    }
}

fn write_variety(s: &mut String, name: &str, v: &Variety) {
    let syn = &v.syntax;
    writeln!(s, "\n[variety {name}]\nsignature = {}", fmt_signature(&syn.sig)).unwrap();
    if !syn.params.is_empty() {
        let p: Vec<String> = syn.params.iter().zip(&v.param_values).map(|(n, x)| format!("{n}={x}")).collect();
        writeln!(s, "params = {}", p.join(",")).unwrap();
    }
    if syn.bracket != Syntax::new(syn.sig.clone(), syn.modulus).bracket {
        let b = syn.bracket.map_or("none".to_string(), |f| syn.sig.name(f).to_string());
        writeln!(s, "bracket = {b}").unwrap();
    }
    for id in &v.identities {
        writeln!(s, "identity \"{}\"", id.display(syn)).unwrap();
    }
}

fn write_action_rows(s: &mut String, d: &Datum, a: &Action) {
    let (qm, im) = (d.q.module(), d.i.module());
    for (f, mask) in a.symbols() {
        let n = d.sig().arity(f);
        let (inside, outside) = split_mask(mask, n);
        for cq in TupleIter::new(d.nq(), outside.len()) {
            for sa in TupleIter::new(d.ni(), inside.len()) {
                let v = a.get_parts(f, mask, &cq, &sa);
                writeln!(
                    s,
                    "a({},{}): ({} | {}) -> {}",
                    d.sig().name(f),
                    fmt_mask(mask, n),
                    fmt_elems(qm, &cq),
                    fmt_elems(im, &sa),
                    fmt_elem(im, v)
                )
                .unwrap();
            }
        }
    }
}

fn write_cocycle_rows(s: &mut String, d: &Datum, t: &Cocycle) {
    let (qm, im) = (d.q.module(), d.i.module());
    let nq = d.nq();
    for x in 0..nq {
        for y in 0..nq {
            writeln!(s, "Tplus: ({}) -> {}", fmt_elems(qm, &[x, y]), fmt_elem(im, t.tplus(x, y))).unwrap();
        }
    }
    let mut derived = t.clone();
    derived.derive_scalar(d);
    if derived.scalar != t.scalar {
        for r in 0..d.modulus() {
            for x in 0..nq {
                writeln!(s, "Tr {r}: ({}) -> {}", fmt_elem(qm, x), fmt_elem(im, t.tr(r, x))).unwrap();
            }
        }
    }
    for f in 0..d.sig().len() {
        for xs in TupleIter::new(nq, d.sig().arity(f)) {
            writeln!(s, "T{}: ({}) -> {}", d.sig().name(f), fmt_elems(qm, &xs), fmt_elem(im, t.tf(f, &xs))).unwrap();
        }
    }
}

// ---------------------------------------------------------------- reading

#[derive(Clone, Debug)]
enum Body {
    Kv(String, String),
    Row { head: String, args: String, value: String },
    Identity(String),
    Decl(String),
}

#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    col: usize,
    body: Body,
}

#[derive(Clone, Debug)]
struct Section {
    kind: String,
    name: String,
    line: usize,
    col: usize,
    entries: Vec<Entry>,
}

struct Ctx<'a> {
    path: &'a str,
}

impl Ctx<'_> {
    fn err(&self, line: usize, col: usize, source: Error) -> LoadError {
        LoadError { path: self.path.to_string(), line, col, source }
    }

    fn parse(&self, line: usize, col: usize, msg: impl Into<String>) -> LoadError {
        self.err(line, col, Error::Parse { line, col, msg: msg.into() })
    }
}

/// Splits on `sep` outside quotes and brackets; returns pieces with their byte offsets.
fn split_top(text: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let (mut depth, mut quoted, mut start) = (0i32, false, 0);
    for (k, c) in text.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '(' | '[' | '{' if !quoted => depth += 1,
            ')' | ']' | '}' if !quoted => depth -= 1,
            _ if c == sep && !quoted && depth == 0 => {
                out.push((start, &text[start..k]));
                start = k + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push((start, &text[start..]));
    out
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (k, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..k],
            _ => {}
        }
    }
    line
}

fn lex(ctx: &Ctx, text: &str) -> Result<Vec<Section>, LoadError> {
    let mut sections: Vec<Section> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let mut body = strip_comment(raw);
        let mut offset = 0;
        let trimmed = body.trim_start();
        if trimmed.starts_with('[') {
            let lead = body.len() - trimmed.len();
            let close = trimmed.find(']').ok_or_else(|| ctx.parse(line, lead + 1, "unterminated section header"))?;
            let head: Vec<&str> = trimmed[1..close].split_whitespace().collect();
            let (kind, name) = match head.as_slice() {
                [kind] => (kind.to_string(), String::new()),
                [kind, name] => (kind.to_string(), name.to_string()),
                _ => return Err(ctx.parse(line, lead + 1, "section header needs a kind and at most one name")),
            };
            sections.push(Section { kind, name, line, col: lead + 1, entries: Vec::new() });
            offset = lead + close + 1;
            body = &body[offset..];
        }
        for (start, piece) in split_top(body, ';') {
            let p = piece.trim();
            if p.is_empty() {
                continue;
            }
            let col = offset + start + (piece.len() - piece.trim_start().len()) + 1;
            let Some(sec) = sections.last_mut() else {
                return Err(ctx.parse(line, col, "entry before any section header"));
            };
            let body = if let Some(rest) = p.strip_prefix("identity") {
                let rest = rest.trim();
                if rest.len() < 2 || !rest.starts_with('"') || !rest.ends_with('"') {
                    return Err(ctx.parse(line, col, "identity needs a quoted equation"));
                }
                Body::Identity(rest[1..rest.len() - 1].to_string())
            } else if let Some(arrow) = p.find("->") {
                let lhs = &p[..arrow];
                let colon = split_top(lhs, ':');
                if colon.len() != 2 {
                    return Err(ctx.parse(line, col, "table row must read `head: (args) -> value`"));
                }
                Body::Row {
                    head: colon[0].1.trim().to_string(),
                    args: colon[1].1.trim().to_string(),
                    value: p[arrow + 2..].trim().to_string(),
                }
            } else if let Some(eq) = p.find('=') {
                Body::Kv(p[..eq].trim().to_string(), p[eq + 1..].trim().to_string())
            } else {
                Body::Decl(p.to_string())
            };
            sec.entries.push(Entry { line, col, body });
        }
    }
    Ok(sections)
}

fn parse_elem(m: &ZmModule, text: &str) -> Result<usize, String> {
    let t = text.trim();
    let inner = match t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        Some(r) => r,
        None if t == "0" => return Ok(0),
        None if m.rank() == 1 => t,
        None => return Err(format!("element `{t}` must be a parenthesized residue list")),
    };
    let parts: Vec<&str> = if inner.trim().is_empty() { Vec::new() } else { inner.split(',').collect() };
    if parts.len() != m.rank() {
        return Err(format!("element `{t}` has {} residues, the module has rank {}", parts.len(), m.rank()));
    }
    let mut coords = Vec::new();
    for (p, &d) in parts.iter().zip(m.factors()) {
        let v: u64 = p.trim().parse().map_err(|_| format!("bad residue `{}`", p.trim()))?;
        if v >= d {
            return Err(format!("residue {v} out of range for Z_{d}"));
        }
        coords.push(v);
    }
    Ok(m.index(&coords))
}

/// A comma-separated list of elements, optionally wrapped in one pair of parentheses.
fn parse_elem_list(m: &ZmModule, text: &str, wrapped: bool) -> Result<Vec<usize>, String> {
    let mut t = text.trim();
    if wrapped {
        t = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| format!("`{t}` must be parenthesized"))?
            .trim();
    }
    if t.is_empty() {
        return Ok(Vec::new());
    }
    split_top(t, ',').into_iter().map(|(_, p)| parse_elem(m, p)).collect()
}

fn parse_sig(text: &str) -> Result<Vec<(String, usize)>, String> {
    let mut out = Vec::new();
    for p in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        out.push(parse_op_decl(p)?);
    }
    Ok(out)
}

fn parse_op_decl(p: &str) -> Result<(String, usize), String> {
    let (n, a) = p.rsplit_once('/').ok_or_else(|| format!("operation `{p}` must read name/arity"))?;
    let ar: usize = a.trim().parse().map_err(|_| format!("bad arity in `{p}`"))?;
    Ok((n.trim().to_string(), ar))
}

struct Kvs<'a> {
    ctx: &'a Ctx<'a>,
    sec: &'a Section,
}

impl Kvs<'_> {
    fn get(&self, key: &str) -> Option<(&Entry, &str)> {
        self.sec.entries.iter().find_map(|e| match &e.body {
            Body::Kv(k, v) if k == key => Some((e, v.as_str())),
            _ => None,
        })
    }

    fn need(&self, key: &str) -> Result<(&Entry, &str), LoadError> {
        self.get(key).ok_or_else(|| {
            self.ctx.err(
                self.sec.line,
                self.sec.col,
                Error::Validation(format!("[{} {}] needs `{key} = ...`", self.sec.kind, self.sec.name)),
            )
        })
    }

    fn check_keys(&self, allowed: &[&str], rows: bool) -> Result<(), LoadError> {
        for e in &self.sec.entries {
            let bad = match &e.body {
                Body::Kv(k, _) => !allowed.contains(&k.as_str()),
                Body::Row { .. } | Body::Decl(_) => !rows,
                Body::Identity(_) => self.sec.kind != "variety",
            };
            if bad {
                return Err(self.ctx.parse(e.line, e.col, format!("unexpected entry in [{}] section", self.sec.kind)));
            }
        }
        Ok(())
    }
}

/// Loads text; `path` is used in error positions only.
pub fn load_str(path: &str, text: &str) -> Result<Workspace, LoadError> {
    let ctx = Ctx { path };
    let sections = lex(&ctx, text)?;
    const ORDER: [&str; 10] =
        ["ring", "module", "algebra", "ideal", "variety", "datum", "action", "cocycle", "extension", "hs"];
    for s in &sections {
        if !ORDER.contains(&s.kind.as_str()) {
            return Err(ctx.parse(s.line, s.col, format!("unknown section kind `{}`", s.kind)));
        }
        if s.kind != "ring" && s.name.is_empty() {
            return Err(ctx.parse(s.line, s.col, format!("[{}] needs a name", s.kind)));
        }
    }
    let mut ws = Workspace::new(2);
    for kind in ORDER {
        for sec in sections.iter().filter(|s| s.kind == kind) {
            let kv = Kvs { ctx: &ctx, sec };
            let dup = |present: bool| {
                if present {
                    Err(ctx.err(sec.line, sec.col, Error::Validation(format!("{} {} defined twice", sec.kind, sec.name))))
                } else {
                    Ok(())
                }
            };
            let at = |e: &Entry, err: Error| ctx.err(e.line, e.col, err);
            let val = |e: &Entry, msg: String| ctx.err(e.line, e.col, Error::Validation(msg));
            match kind {
                "ring" => {
                    kv.check_keys(&["modulus"], false)?;
                    let (e, v) = kv.need("modulus")?;
                    ws.modulus = v.parse().ok().filter(|&m: &u64| m >= 1).ok_or_else(|| val(e, format!("bad modulus `{v}`")))?;
                }
                "module" => {
                    kv.check_keys(&["factors"], false)?;
                    dup(ws.modules.contains_key(&sec.name))?;
                    let (e, v) = kv.need("factors")?;
                    let factors: Vec<u64> = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse().map_err(|_| val(e, format!("bad factor `{s}`"))))
                        .collect::<Result<_, _>>()?;
                    let m = ZmModule::new(ws.modulus, factors).map_err(|err| at(e, err))?;
                    ws.modules.insert(sec.name.clone(), m);
                }
                "algebra" => {
                    kv.check_keys(&["module", "signature"], true)?;
                    dup(ws.algebras.contains_key(&sec.name))?;
                    let def = load_algebra(&ctx, &ws, sec, &kv)?;
                    ws.algebras.insert(sec.name.clone(), def);
                }
                "ideal" => {
                    kv.check_keys(&["algebra", "generators"], false)?;
                    dup(ws.ideals.contains_key(&sec.name))?;
                    let (e, an) = kv.need("algebra")?;
                    let a = ws.algebra(an).map_err(|err| at(e, err))?;
                    let gens = match kv.get("generators") {
                        Some((g, text)) => parse_elem_list(a.module(), text, false).map_err(|m| val(g, m))?,
                        None => Vec::new(),
                    };
                    let ideal = ideal_generated(a, &gens);
                    ws.ideals.insert(sec.name.clone(), IdealDef { algebra: an.to_string(), ideal });
                }
                "variety" => {
                    kv.check_keys(&["signature", "params", "bracket"], false)?;
                    dup(ws.varieties.contains_key(&sec.name))?;
                    let v = load_variety(&ctx, ws.modulus, sec, &kv)?;
                    ws.varieties.insert(sec.name.clone(), v);
                }
                "datum" => {
                    kv.check_keys(&["Q", "I"], false)?;
                    dup(ws.data.contains_key(&sec.name))?;
                    let (e, q) = kv.need("Q")?;
                    let (_, i) = kv.need("I")?;
                    ws.datum_of(q, i).map_err(|err| at(e, err))?;
                    ws.data.insert(sec.name.clone(), DatumDef { q: q.into(), i: i.into() });
                }
                "action" => {
                    kv.check_keys(&["Q", "I"], true)?;
                    dup(ws.actions.contains_key(&sec.name))?;
                    let (e, q) = kv.need("Q")?;
                    let (_, i) = kv.need("I")?;
                    let d = ws.datum_of(q, i).map_err(|err| at(e, err))?;
                    let action = load_action(&ctx, &d, sec)?;
                    ws.actions.insert(sec.name.clone(), ActionDef { q: q.into(), i: i.into(), action });
                }
                "cocycle" => {
                    kv.check_keys(&["action", "datum"], true)?;
                    dup(ws.cocycles.contains_key(&sec.name))?;
                    let (e, source) = match (kv.get("action"), kv.get("datum")) {
                        (Some((e, a)), None) => (e, CocycleSource::Action(a.to_string())),
                        (None, Some((e, d))) => (e, CocycleSource::Datum(d.to_string())),
                        _ => {
                            return Err(ctx.err(
                                sec.line,
                                sec.col,
                                Error::Validation("a cocycle needs exactly one of `action` or `datum`".into()),
                            ))
                        }
                    };
                    let d = ws.source_datum(&source).map_err(|err| at(e, err))?;
                    let action = match &source {
                        CocycleSource::Action(a) => ws.actions[a].action.clone(),
                        CocycleSource::Datum(_) => Action::trivial(&d),
                    };
                    let cocycle = load_cocycle(&ctx, &d, action, sec)?;
                    ws.cocycles.insert(sec.name.clone(), CocycleDef { source, cocycle });
                }
                "extension" => {
                    kv.check_keys(&["M", "ideal"], false)?;
                    dup(ws.extensions.contains_key(&sec.name))?;
                    let (e, m) = kv.need("M")?;
                    let (_, k) = kv.need("ideal")?;
                    let def = ExtensionDef { m: m.into(), ideal: k.into() };
                    if ws.ideal(k).map_err(|err| at(e, err))?.algebra != m {
                        return Err(val(e, format!("ideal {k} is not an ideal of {m}")));
                    }
                    ws.extensions.insert(sec.name.clone(), def);
                    ws.extension(&sec.name).map_err(|err| at(e, err))?;
                }
                "hs" => {
                    kv.check_keys(&["M", "ideal", "A", "action", "variety"], false)?;
                    dup(ws.hs.contains_key(&sec.name))?;
                    let (e, m) = kv.need("M")?;
                    let def = HsDef {
                        m: m.into(),
                        ideal: kv.need("ideal")?.1.into(),
                        a: kv.need("A")?.1.into(),
                        action: kv.need("action")?.1.into(),
                        variety: kv.get("variety").map_or("mlf", |x| x.1).into(),
                    };
                    if ws.ideal(&def.ideal).map_err(|err| at(e, err))?.algebra != def.m {
                        return Err(val(e, format!("ideal {} is not an ideal of {}", def.ideal, def.m)));
                    }
                    let act = ws.actions.get(&def.action).ok_or_else(|| at(e, Error::UnknownSymbol(format!("action {}", def.action))))?;
                    if act.q != def.m || act.i != def.a {
                        return Err(val(e, format!("action {} must act on ({}, {})", def.action, def.m, def.a)));
                    }
                    ws.hs.insert(sec.name.clone(), def);
                    ws.hs_datum(&sec.name).map_err(|err| at(e, err))?;
                }
                _ => unreachable!(),
            }
        }
    }
    Ok(ws)
}

pub fn load(path: &str) -> Result<Workspace, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LoadError { path: path.to_string(), line: 0, col: 0, source: Error::Io(e.to_string()) })?;
    load_str(path, &text)
}

fn load_algebra(ctx: &Ctx, ws: &Workspace, sec: &Section, kv: &Kvs) -> Result<AlgebraDef, LoadError> {
    let (e, mname) = kv.need("module")?;
    let module = ws.modules.get(mname).ok_or_else(|| ctx.err(e.line, e.col, Error::UnknownSymbol(format!("module {mname}"))))?;
    let mut sig = Signature::default();
    let add = |sig: &mut Signature, e: &Entry, name: &str, ar: usize| -> Result<usize, LoadError> {
        match sig.index_of(name) {
            Some(f) if sig.arity(f) == ar => Ok(f),
            Some(f) => Err(ctx.err(
                e.line,
                e.col,
                Error::ArityMismatch { symbol: name.into(), expected: sig.arity(f), found: ar },
            )),
            None => {
                sig.push(name, ar).map_err(|err| ctx.err(e.line, e.col, err))?;
                Ok(sig.len() - 1)
            }
        }
    };
    if let Some((e, text)) = kv.get("signature") {
        for (n, a) in parse_sig(text).map_err(|m| ctx.parse(e.line, e.col, m))? {
            add(&mut sig, e, &n, a)?;
        }
    }
    let k = module.rank();
    let mut rows = Vec::new();
    for e in &sec.entries {
        let (head, row) = match &e.body {
            Body::Decl(h) => (h.as_str(), None),
            Body::Row { head, args, value } => (head.as_str(), Some((args, value))),
            _ => continue,
        };
        let decl = head.strip_prefix("op").filter(|r| r.starts_with(char::is_whitespace)).ok_or_else(|| {
            ctx.parse(e.line, e.col, format!("expected `op name/arity`, found `{head}`"))
        })?;
        let (n, a) = parse_op_decl(decl.trim()).map_err(|m| ctx.parse(e.line, e.col, m))?;
        let f = add(&mut sig, e, &n, a)?;
        if let Some(r) = row {
            rows.push((e, f, r));
        }
    }
    let mut constants: Vec<Vec<usize>> = sig.ops.iter().map(|o| vec![0; k.pow(o.arity as u32)]).collect();
    for (e, f, (args, value)) in rows {
        let inner = args
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| ctx.parse(e.line, e.col, "generator tuple must be parenthesized"))?;
        let gens: Vec<usize> = inner
            .split(',')
            .map(|g| g.trim().parse::<usize>().ok().filter(|&g| g >= 1 && g <= k).map(|g| g - 1))
            .collect::<Option<_>>()
            .ok_or_else(|| ctx.parse(e.line, e.col, format!("generator indices must lie in 1..={k}")))?;
        if gens.len() != sig.arity(f) {
            return Err(ctx.err(
                e.line,
                e.col,
                Error::ArityMismatch { symbol: sig.name(f).into(), expected: sig.arity(f), found: gens.len() },
            ));
        }
        let v = parse_elem(module, value).map_err(|m| ctx.parse(e.line, e.col, m))?;
        constants[f][tuple_index(k, &gens)] = v;
    }
    let algebra = Algebra::new(module.clone(), sig, constants).map_err(|err| ctx.err(sec.line, sec.col, err))?;
    Ok(AlgebraDef { module: mname.to_string(), algebra })
}

fn load_variety(ctx: &Ctx, modulus: u64, sec: &Section, kv: &Kvs) -> Result<Variety, LoadError> {
    let (e, text) = kv.need("signature")?;
    let mut sig = Signature::default();
    for (n, a) in parse_sig(text).map_err(|m| ctx.parse(e.line, e.col, m))? {
        sig.push(&n, a).map_err(|err| ctx.err(e.line, e.col, err))?;
    }
    let mut params: Vec<(String, u64)> = Vec::new();
    if let Some((e, text)) = kv.get("params") {
        for p in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (n, v) = p.split_once('=').unwrap_or((p, "0"));
            let v: u64 = v.trim().parse().map_err(|_| ctx.parse(e.line, e.col, format!("bad parameter value in `{p}`")))?;
            params.push((n.trim().to_string(), v));
        }
    }
    let names: Vec<&str> = params.iter().map(|p| p.0.as_str()).collect();
    let mut syn = Syntax::new(sig, modulus).with_params(&names);
    if let Some((e, b)) = kv.get("bracket") {
        syn.bracket = match b {
            "none" => None,
            _ => Some(syn.sig.index_of(b).ok_or_else(|| ctx.err(e.line, e.col, Error::UnknownSymbol(b.into())))?),
        };
    }
    let mut v = Variety::new(&sec.name, syn);
    for (n, x) in &params {
        v.set_param(n, *x).map_err(|err| ctx.err(sec.line, sec.col, err))?;
    }
    for e in &sec.entries {
        if let Body::Identity(text) = &e.body {
            v.add_identity(text).map_err(|err| ctx.err(e.line, e.col, err))?;
        }
    }
    Ok(v)
}

fn parse_mask(d: &Datum, head: &str) -> Result<(usize, u32), String> {
    let inner = head
        .strip_prefix("a(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| format!("expected `a(f,{{slots}})`, found `{head}`"))?;
    let (name, set) = inner.split_once(',').ok_or_else(|| format!("expected `a(f,{{slots}})`, found `{head}`"))?;
    let f = d.sig().index_of(name.trim()).ok_or_else(|| format!("unknown operation `{}`", name.trim()))?;
    let n = d.sig().arity(f);
    let set = set.trim().strip_prefix('{').and_then(|r| r.strip_suffix('}')).ok_or("slot set must be braced")?;
    let mut mask = 0u32;
    for s in set.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let k: usize = s.parse().map_err(|_| format!("bad slot `{s}`"))?;
        if k == 0 || k > n {
            return Err(format!("slot {k} out of range for arity {n}"));
        }
        mask |= 1 << (k - 1);
    }
    if !proper_subsets(n).contains(&mask) {
        return Err(format!("slot set of a({},..) must be a nonempty proper subset", d.sig().name(f)));
    }
    Ok((f, mask))
}

fn load_action(ctx: &Ctx, d: &Datum, sec: &Section) -> Result<Action, LoadError> {
    let mut a = Action::trivial(d);
    let (qm, im) = (d.q.module(), d.i.module());
    for e in &sec.entries {
        let Body::Row { head, args, value } = &e.body else { continue };
        let p = |m: String| ctx.parse(e.line, e.col, m);
        let (f, mask) = parse_mask(d, head).map_err(p)?;
        let inner = args.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(|| p("arguments must be parenthesized".into()))?;
        let halves = split_top(inner, '|');
        if halves.len() != 2 {
            return Err(p("arguments must read `(q-args | i-args)`".into()));
        }
        let cq = parse_elem_list(qm, halves[0].1, false).map_err(p)?;
        let sa = parse_elem_list(im, halves[1].1, false).map_err(p)?;
        let (inside, outside) = split_mask(mask, d.sig().arity(f));
        if cq.len() != outside.len() || sa.len() != inside.len() {
            return Err(p(format!("a({}) needs {} Q- and {} I-arguments", d.sig().name(f), outside.len(), inside.len())));
        }
        let v = parse_elem(im, value).map_err(p)?;
        a.set_parts(f, mask, &cq, &sa, v);
    }
    Ok(a)
}

fn load_cocycle(ctx: &Ctx, d: &Datum, action: Action, sec: &Section) -> Result<Cocycle, LoadError> {
    let mut t = Cocycle::with_action(d, action);
    let (qm, im) = (d.q.module(), d.i.module());
    let nq = d.nq();
    let mut scalar_given = false;
    for e in &sec.entries {
        let Body::Row { head, args, value } = &e.body else {
            if let Body::Decl(_) = &e.body {
                return Err(ctx.parse(e.line, e.col, "expected a table row"));
            }
            continue;
        };
        let p = |m: String| ctx.parse(e.line, e.col, m);
        let xs = parse_elem_list(qm, args, true).map_err(p)?;
        let v = parse_elem(im, value).map_err(p)?;
        let want = |n: usize| if xs.len() == n { Ok(()) } else { Err(p(format!("`{head}` takes {n} arguments"))) };
        if head == "Tplus" {
            want(2)?;
            t.plus[xs[0] * nq + xs[1]] = v;
        } else if let Some(r) = head.strip_prefix("Tr ") {
            want(1)?;
            let r: u64 = r.trim().parse().ok().filter(|&r| r < d.modulus()).ok_or_else(|| p(format!("bad scalar in `{head}`")))?;
            t.scalar[r as usize * nq + xs[0]] = v;
            scalar_given = true;
        } else if let Some(f) = head.strip_prefix('T').and_then(|n| d.sig().index_of(n)) {
            want(d.sig().arity(f))?;
            t.ops[f][tuple_index(nq, &xs)] = v;
        } else {
            return Err(p(format!("unknown cocycle table `{head}`")));
        }
    }
    if !scalar_given {
        t.derive_scalar(d);
    }
    t.validate(d).map_err(|err| ctx.err(sec.line, sec.col, err))?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    const F2: &str = "\
[ring]
modulus = 2
[module V]
factors = 2,2
[algebra F2]
module = V
op f/2: (2,2) -> (1,0)
[ideal K]
algebra = F2
generators = (1,0)
[extension E]
M = F2
ideal = K
";

    #[test]
    fn minimal_file() {
        let ws = load_str("t", "[ring] modulus = 2\n[module Z2]\nfactors = 2\n").unwrap();
        assert_eq!(ws.modules.len(), 1);
        assert_eq!(ws.modulus, 2);
    }

    #[test]
    fn f2_file_loads_and_round_trips() {
        let ws = load_str("f2", F2).unwrap();
        let a = ws.algebra("F2").unwrap();
        let (e1, e2) = (a.module().generator(0), a.module().generator(1));
        assert_eq!(a.op(0, &[e2, e2]), e1);
        assert_eq!(ws.ideal("K").unwrap().ideal.elements(), &[0, e1]);
        let text = ws.save();
        let again = load_str("f2", &text).unwrap().save();
        assert_eq!(text, again);
        assert!(ws.extension("E").is_ok());
    }

    #[test]
    fn clause_violations_name_the_clause() {
        let text = "[module Z2]\nfactors = 2\n[algebra A]\nmodule = Z2\nop f/2\n[datum D]\nQ = A; I = A\n[cocycle T]\ndatum = D\nTplus: ((0),(1)) -> (1)\n";
        let err = load_str("bad", text).unwrap_err();
        assert_eq!(err.source.to_string(), "T1 violated at (0,1)");
        assert_eq!((err.line, err.col), (8, 1));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = load_str("p", "[module Z2]\n  factors = 2\n[algebra A]\nmodule = Z2\nop f/2: (1,3) -> (1)\n").unwrap_err();
        assert!(matches!(err.source, Error::Parse { line: 5, col: 1, .. }), "{err}");
        let err = load_str("p", "factors = 2\n").unwrap_err();
        assert_eq!((err.line, err.col), (1, 1));
        let err = load_str("p", "[module Z2]\nfactors = 2\n[algebra A]\nmodule = Z2\nop f/2: (1,1) -> (2)\n").unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn actions_and_varieties_round_trip() {
        let text = "\
[module Z2]
factors = 2
[algebra A]
module = Z2
signature = f/2
[variety comm]
signature = f/2,P/1
params = λ=1
identity \"f(x, y) = f(y, x)\"
identity \"P(f(P(x), y)) = λ*f(x, y)\"
[action R]
Q = A; I = A
a(f,{1}): ((1) | (1)) -> (1)
[cocycle T]
action = R
Tf: ((1),(1)) -> (1)
";
        let ws = load_str("r", text).unwrap();
        assert_eq!(ws.actions["R"].action.get(0, 1, &[0, 1], &[1, 0]), 1);
        assert_eq!(ws.cocycles["T"].cocycle.tf(0, &[1, 1]), 1);
        assert_eq!(ws.varieties["comm"].param_values, vec![1]);
        let saved = ws.save();
        assert_eq!(load_str("r", &saved).unwrap().save(), saved);
        let sub = ws.closure("cocycle", "T").unwrap();
        assert!(sub.varieties.is_empty() && sub.actions.contains_key("R") && sub.algebras.contains_key("A"));
    }
}
