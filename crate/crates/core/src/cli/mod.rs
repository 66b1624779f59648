//! Command-line front end: argument parsing, object resolution and reports.

pub mod format;

use std::collections::BTreeMap;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{series, Algebra, SeriesKind};
use crate::cocycle::{
    compatibility, equivalent, extract_cocycle, is_h2_morphism, realization_failure, semidirect, Action, Cocycle, Datum,
    MorphismReading, DEFAULT_BUDGET,
};
use crate::cohomology::{derivations, enumerate_h2, h1, h2_affine, ActionScope, DEFAULT_DEPTH};
use crate::derlie::{derivations_of, ideal_preserving, verify_wells};
use crate::error::Error;
use crate::expander::{cocycle_identity, random_term, soundness_failure, Emit, Notation};
use crate::hs::verify_hs;
use crate::modcore::ZmModule;
use crate::termlang::Variety;
use format::{fmt_elem, AlgebraDef, CocycleDef, CocycleSource, ActionDef, Workspace};

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Parser, Debug)]
#[command(name = "mlex", version, about = "Extensions and cohomology of finite modules with multilinear operations")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Opts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Upper bound on the size of any brute-force candidate space.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,
    /// Nesting depth for principal derivations.
    #[arg(long, global = true, default_value_t = DEFAULT_DEPTH)]
    pub depth: usize,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Apply β instead of α to the Q-arguments in the morphism conditions.
    #[arg(long, global = true)]
    pub emend: bool,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Extra workspace files; objects in them may be referenced by name.
    #[arg(short = 'f', long = "file", global = true)]
    pub files: Vec<String>,
    /// Where to write the counterexample of a failed check.
    #[arg(long, global = true)]
    pub counterexample: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmitArg {
    General,
    Action,
    Strict,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum DecomposeKind {
    Solvable,
    Nilpotent,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SeriesArg {
    Derived,
    LowerCentral,
}

/// Object references read `FILE.mlex`, `FILE.mlex:NAME` or `NAME`.
#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Load and validate files; with a variety, check every cocycle for compatibility.
    Check {
        files: Vec<String>,
        #[arg(long)]
        variety: Option<String>,
    },
    /// Build the semidirect product of a cocycle and check that it realizes it.
    Semidirect {
        #[arg(long)]
        cocycle: String,
    },
    /// Extract the cocycle of an extension along its canonical lifting.
    Extract {
        #[arg(long)]
        extension: String,
    },
    /// Decide whether two cocycles differ by a coboundary.
    Equivalent {
        #[arg(long = "cocycle", num_args = 1, required = true)]
        cocycles: Vec<String>,
    },
    /// Enumerate the second cohomology of a datum.
    H2 {
        #[arg(long)]
        datum: String,
        #[arg(long, default_value = "mlf")]
        variety: String,
        /// Range over every action instead of the datum's own.
        #[arg(long)]
        all_actions: bool,
    },
    /// Derivations modulo principal derivations.
    H1 {
        #[arg(long)]
        datum: String,
    },
    /// Derivations of an algebra, of an algebra preserving an ideal, or of a datum.
    Derivations {
        #[arg(long, conflicts_with = "datum")]
        algebra: Option<String>,
        #[arg(long, requires = "algebra")]
        ideal: Option<String>,
        #[arg(long)]
        datum: Option<String>,
    },
    /// Check the Wells sequence on an extension.
    Wells {
        #[arg(long)]
        extension: String,
    },
    /// Check the five-term sequence on a fixture.
    Hs {
        #[arg(long)]
        fixture: String,
    },
    /// Emit the cocycle identities of a variety.
    Expand {
        #[arg(long)]
        variety: String,
        #[arg(long, value_enum, default_value_t = EmitArg::General)]
        emit: EmitArg,
        /// Keep cancelling summands.
        #[arg(long)]
        raw: bool,
        /// Drop summands that vanish on affine data.
        #[arg(long)]
        affine: bool,
        /// Include the module and multilinearity axioms.
        #[arg(long)]
        axioms: bool,
        /// Print S-expressions instead of text.
        #[arg(long)]
        sexpr: bool,
        /// Evaluate the identities on this cocycle.
        #[arg(long)]
        cocycle: Option<String>,
        /// Random terms to check against the semidirect product of the cocycle.
        #[arg(long, default_value_t = 0, requires = "cocycle")]
        samples: usize,
    },
    /// Split an algebra along its derived or lower central series and rebuild it.
    Decompose {
        #[arg(long)]
        algebra: String,
        #[arg(long, value_enum)]
        kind: DecomposeKind,
    },
    /// The derived or lower central series of an algebra.
    Series {
        #[arg(long)]
        algebra: String,
        #[arg(long, value_enum)]
        kind: SeriesArg,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// The output of one command.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub lines: Vec<String>,
    pub data: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

impl Report {
    fn new(command: &str) -> Report {
        Report { command: command.into(), status: Status::Pass, lines: Vec::new(), data: BTreeMap::new(), counterexample: None }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn put(&mut self, key: &str, v: impl Serialize) {
        self.data.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    fn fail(&mut self, ws: Workspace, reason: &str) {
        self.status = Status::Fail;
        self.counterexample = Some(format!("# {} failed: {reason}\n{}", self.command, ws.save()));
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            return serde_json::to_string_pretty(self).expect("serializable") + "\n";
        }
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        let verdict = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        };
        out.push_str(&format!("{}: {verdict}\n", self.command));
        if let Some(c) = &self.counterexample {
            out.push_str("--- counterexample ---\n");
            out.push_str(c);
        }
        out
    }
}

fn pf(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn fmt_map(src: &ZmModule, dst: &ZmModule, h: &[usize]) -> String {
    h.iter().enumerate().map(|(x, &y)| format!("{}->{}", fmt_elem(src, x), fmt_elem(dst, y))).collect::<Vec<_>>().join(" ")
}

/// Nonzero entries of a cocycle, one per line.
fn cocycle_rows(d: &Datum, t: &Cocycle) -> Vec<String> {
    let mut ws = Workspace::new(d.modulus());
    let (qn, inn) = ("Q".to_string(), "I".to_string());
    ws.modules.insert("q".into(), d.q.module().clone());
    ws.modules.insert("i".into(), d.i.module().clone());
    ws.algebras.insert(qn.clone(), AlgebraDef { module: "q".into(), algebra: d.q.clone() });
    ws.algebras.insert(inn.clone(), AlgebraDef { module: "i".into(), algebra: d.i.clone() });
    ws.actions.insert("a".into(), ActionDef { q: qn, i: inn, action: t.action.clone() });
    ws.cocycles.insert("T".into(), CocycleDef { source: CocycleSource::Action("a".into()), cocycle: t.clone() });
    let text = ws.save();
    let zero = fmt_elem(d.i.module(), 0);
    let start = text.find("[cocycle T]").unwrap_or(0);
    let action_rows = text.lines().filter(|l| l.starts_with("a(") && !l.ends_with(&format!("-> {zero}")));
    let cocycle_rows = text[start..].lines().filter(|l| l.starts_with('T') && !l.ends_with(&format!("-> {zero}")));
    action_rows.chain(cocycle_rows).map(|l| format!("  {l}")).collect()
}

/// A workspace holding a datum and a cocycle under fixed names.
fn cocycle_workspace(d: &Datum, t: &Cocycle, prefix: &str) -> Workspace {
    let mut ws = Workspace::new(d.modulus());
    let (q, i, a) = (format!("{prefix}_Q"), format!("{prefix}_I"), format!("{prefix}_a"));
    ws.modules.insert(format!("{q}_mod"), d.q.module().clone());
    ws.modules.insert(format!("{i}_mod"), d.i.module().clone());
    ws.algebras.insert(q.clone(), AlgebraDef { module: format!("{q}_mod"), algebra: d.q.clone() });
    ws.algebras.insert(i.clone(), AlgebraDef { module: format!("{i}_mod"), algebra: d.i.clone() });
    ws.actions.insert(a.clone(), ActionDef { q, i, action: t.action.clone() });
    ws.cocycles.insert(format!("{prefix}_T"), CocycleDef { source: CocycleSource::Action(a), cocycle: t.clone() });
    ws
}

/// Loaded files plus the merged workspace.
struct Session {
    ws: Workspace,
    files: BTreeMap<String, Workspace>,
}

/// A datum with its action and the section it came from.
struct DatumRef {
    d: Datum,
    action: Action,
    kind: &'static str,
    name: String,
}

const KINDS: [&str; 9] = ["module", "algebra", "ideal", "variety", "datum", "action", "cocycle", "extension", "hs"];

fn names(ws: &Workspace, kind: &str) -> Vec<String> {
    match kind {
        "module" => ws.modules.keys().cloned().collect(),
        "algebra" => ws.algebras.keys().cloned().collect(),
        "ideal" => ws.ideals.keys().cloned().collect(),
        "variety" => ws.varieties.keys().cloned().collect(),
        "datum" => ws.data.keys().cloned().collect(),
        "action" => ws.actions.keys().cloned().collect(),
        "cocycle" => ws.cocycles.keys().cloned().collect(),
        "extension" => ws.extensions.keys().cloned().collect(),
        "hs" => ws.hs.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

impl Session {
    fn new(files: &[String]) -> Result<Session, CliError> {
        let mut s = Session { ws: Workspace::default(), files: BTreeMap::new() };
        for f in files {
            s.load(f)?;
        }
        Ok(s)
    }

    fn load(&mut self, path: &str) -> Result<Workspace, CliError> {
        if let Some(w) = self.files.get(path) {
            return Ok(w.clone());
        }
        let w = format::load(path)?;
        if self.files.is_empty() {
            self.ws = w.clone();
        } else {
            self.ws.merge(&w).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
        }
        self.files.insert(path.into(), w.clone());
        Ok(w)
    }

    /// Resolves a reference to `(kind, name)`, preferring kinds in order.
    fn resolve(&mut self, r: &str, kinds: &[&'static str]) -> Result<(&'static str, String), CliError> {
        let (path, name) = match r.find(".mlex") {
            Some(k) => {
                let (p, rest) = r.split_at(k + 5);
                (Some(p.to_string()), rest.strip_prefix(':').map(str::to_string))
            }
            None => (None, Some(r.to_string())),
        };
        let scope = match &path {
            Some(p) => self.load(p)?,
            None => self.ws.clone(),
        };
        if let Some(n) = name {
            for &k in kinds {
                if names(&self.ws, k).contains(&n) {
                    return Ok((k, n));
                }
            }
            return Err(CliError::Usage(format!("no {} named `{n}`", kinds.join("/"))));
        }
        for &k in kinds {
            let ns = names(&scope, k);
            match ns.len() {
                0 => continue,
                1 => return Ok((k, ns[0].clone())),
                _ => return Err(CliError::Usage(format!("{r} has several {k} sections; use {r}:NAME"))),
            }
        }
        Err(CliError::Usage(format!("{r} has no {} section", kinds.join("/"))))
    }

    fn datum_ref(&mut self, r: &str) -> Result<DatumRef, CliError> {
        let (kind, name) = self.resolve(r, &["cocycle", "action", "datum", "extension"])?;
        let ws = &self.ws;
        Ok(match kind {
            "cocycle" => {
                let (d, t) = ws.cocycle_datum(&name)?;
                DatumRef { d, action: t.action, kind, name }
            }
            "action" => {
                let def = &ws.actions[&name];
                let d = ws.datum_of(&def.q, &def.i)?;
                DatumRef { d, action: def.action.clone(), kind, name }
            }
            "datum" => {
                let d = ws.source_datum(&CocycleSource::Datum(name.clone()))?;
                let action = Action::trivial(&d);
                DatumRef { d, action, kind, name }
            }
            _ => {
                let e = ws.extension(&name)?;
                let d = e.datum();
                let t = extract_cocycle(&e);
                DatumRef { d, action: t.action, kind, name }
            }
        })
    }

    fn variety(&mut self, r: &str, sig: &crate::algebra::Signature) -> Result<(Variety, Option<String>), CliError> {
        if r == "mlf" && !self.ws.varieties.contains_key("mlf") {
            return Ok((self.ws.variety("mlf", sig)?, None));
        }
        let (_, name) = self.resolve(r, &["variety"])?;
        let v = self.ws.varieties[&name].clone();
        if &v.syntax.sig != sig {
            return Err(CliError::Usage(format!("variety {name} has a different signature")));
        }
        Ok((v, Some(name)))
    }

    fn with_variety(&self, mut sub: Workspace, v: &Option<String>) -> Workspace {
        if let Some(n) = v {
            sub.varieties.insert(n.clone(), self.ws.varieties[n].clone());
        }
        sub
    }
}

/// Failures that end a command before a verdict; they exit with code 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] format::LoadError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("usage: {0}")]
    Usage(String),
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let o = &cli.opts;
    let mut s = Session::new(&o.files)?;
    let report = match &cli.command {
        Command::Check { files, variety } => check(&mut s, files, variety.as_deref())?,
        Command::Semidirect { cocycle } => cmd_semidirect(&mut s, cocycle)?,
        Command::Extract { extension } => cmd_extract(&mut s, extension)?,
        Command::Equivalent { cocycles } => cmd_equivalent(&mut s, cocycles, o)?,
        Command::H2 { datum, variety, all_actions } => cmd_h2(&mut s, datum, variety, *all_actions, o)?,
        Command::H1 { datum } => cmd_h1(&mut s, datum, o)?,
        Command::Derivations { algebra, ideal, datum } => cmd_derivations(&mut s, algebra, ideal, datum)?,
        Command::Wells { extension } => cmd_wells(&mut s, extension, o)?,
        Command::Hs { fixture } => cmd_hs(&mut s, fixture, o)?,
        Command::Expand { variety, emit, raw, affine, axioms, sexpr, cocycle, samples } => {
            let flags = ExpandFlags { emit: *emit, raw: *raw, affine: *affine, axioms: *axioms, sexpr: *sexpr };
            cmd_expand(&mut s, variety, flags, cocycle.as_deref(), *samples, o)?
        }
        Command::Decompose { algebra, kind } => cmd_decompose(&mut s, algebra, *kind)?,
        Command::Series { algebra, kind } => cmd_series(&mut s, algebra, *kind)?,
    };
    if let (Some(path), Some(text)) = (&o.counterexample, &report.counterexample) {
        std::fs::write(path, text).map_err(|e| CliError::Core(Error::Io(format!("{path}: {e}"))))?;
    }
    Ok(report)
}

/// Parses `args`, runs the command and returns `(stdout, stderr, exit code)`.
pub fn main_with<I, T>(args: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { (text, String::new(), 0) } else { (String::new(), text, 2) };
        }
    };
    match run(&cli) {
        Ok(r) => (r.render(cli.opts.json), String::new(), r.exit_code()),
        Err(e) => (String::new(), format!("error: {e}\n"), 2),
    }
}

fn check(s: &mut Session, files: &[String], variety: Option<&str>) -> Result<Report, CliError> {
    let mut r = Report::new("check");
    for f in files {
        s.load(f)?;
    }
    let ws = s.ws.clone();
    for k in KINDS {
        let n = names(&ws, k);
        if !n.is_empty() {
            r.line(format!("{k}: {}", n.join(", ")));
            r.put(k, n);
        }
    }
    let Some(vref) = variety else { return Ok(r) };
    let mut failures = Vec::new();
    let mut verdicts = BTreeMap::new();
    for name in names(&ws, "cocycle") {
        let (d, t) = ws.cocycle_datum(&name)?;
        let (v, vname) = s.variety(vref, d.sig())?;
        let c = compatibility(&d, &t, &v)?;
        r.line(format!("cocycle {name}: {}", c.describe(&d)));
        verdicts.insert(name.clone(), c.is_compatible());
        if !c.is_compatible() && failures.is_empty() {
            failures.push((name, vname, c.describe(&d)));
        }
    }
    r.put("compatible", verdicts);
    if let Some((name, vname, why)) = failures.pop() {
        let sub = s.with_variety(ws.closure("cocycle", &name)?, &vname);
        r.fail(sub, &format!("cocycle {name} {why}"));
    }
    Ok(r)
}

fn cmd_semidirect(s: &mut Session, cref: &str) -> Result<Report, CliError> {
    let mut r = Report::new("semidirect");
    let (_, name) = s.resolve(cref, &["cocycle"])?;
    let (d, t) = s.ws.cocycle_datum(&name)?;
    let sd = semidirect(&d, &t)?;
    if let Err(e) = &sd.validity {
        r.line(format!("operations of I x_T Q are not multilinear: {e}"));
        r.put("valid", false);
        let sub = s.ws.closure("cocycle", &name)?;
        r.fail(sub, &e.to_string());
        return Ok(r);
    }
    let (e, _) = sd.extension(&d)?;
    let failure = realization_failure(&e, &t);
    r.line(format!("|I x_T Q| = {}", e.m.size()));
    r.line(format!("realizes {name}: {}", pf(failure.is_none())));
    r.put("size", e.m.size());
    r.put("realizes", failure.is_none());
    let mut out = Workspace::new(d.modulus());
    out.modules.insert(format!("{name}_sd_mod"), e.m.module().clone());
    out.algebras.insert(format!("{name}_sd"), AlgebraDef { module: format!("{name}_sd_mod"), algebra: e.m.clone() });
    r.lines.extend(out.save().lines().map(str::to_string));
    if let Some(why) = failure {
        let sub = s.ws.closure("cocycle", &name)?;
        r.fail(sub, &why);
    }
    Ok(r)
}

fn cmd_extract(s: &mut Session, eref: &str) -> Result<Report, CliError> {
    let mut r = Report::new("extract");
    let (_, name) = s.resolve(eref, &["extension"])?;
    let e = s.ws.extension(&name)?;
    let t = extract_cocycle(&e);
    let d = e.datum();
    let ok = crate::cocycle::realizes(&e, &t);
    r.line(format!("extension {name}: |M| = {}, |Q| = {}, |I| = {}", e.m.size(), d.nq(), d.ni()));
    r.line(format!("realizes: {}", pf(ok)));
    r.put("realizes", ok);
    r.lines.extend(cocycle_workspace(&d, &t, &name).save().lines().map(str::to_string));
    if !ok {
        let sub = s.ws.closure("extension", &name)?;
        r.fail(sub, "extracted cocycle does not realize the extension");
    }
    Ok(r)
}

fn cmd_equivalent(s: &mut Session, refs: &[String], o: &Opts) -> Result<Report, CliError> {
    let mut r = Report::new("equivalent");
    if refs.len() != 2 {
        return Err(CliError::Usage("equivalent takes exactly two --cocycle references".into()));
    }
    let (_, a) = s.resolve(&refs[0], &["cocycle"])?;
    let (_, b) = s.resolve(&refs[1], &["cocycle"])?;
    let (d, t) = s.ws.cocycle_datum(&a)?;
    let (d2, t2) = s.ws.cocycle_datum(&b)?;
    if d != d2 {
        return Err(CliError::Usage(format!("{a} and {b} live on different data")));
    }
    match equivalent(&d, &t, &t2, o.budget)? {
        Some(h) => {
            r.line(format!("{a} ~ {b}"));
            r.line(format!("h: {}", fmt_map(d.q.module(), d.i.module(), &h)));
            r.put("equivalent", true);
            r.put("h", &h);
            let reading = if o.emend { MorphismReading::Emended } else { MorphismReading::Printed };
            let id_i: Vec<usize> = (0..d.ni()).collect();
            let id_q: Vec<usize> = (0..d.nq()).collect();
            let neg_h: Vec<usize> = h.iter().map(|&x| d.i.neg(x)).collect();
            let verdict = match is_h2_morphism(&d, &t, &d, &t2, &id_i, &h, &id_q, reading) {
                Ok(None) => "PASS".to_string(),
                Ok(Some(_)) => match is_h2_morphism(&d, &t, &d, &t2, &id_i, &neg_h, &id_q, reading)? {
                    None => "PASS (with -h)".to_string(),
                    Some(c) => format!("FAIL ({c})"),
                },
                Err(Error::Unsupported(m)) => format!("n/a ({m})"),
                Err(e) => return Err(e.into()),
            };
            r.line(format!("morphism (id, h, id), {} reading: {verdict}", if o.emend { "emended" } else { "printed" }));
        }
        None => {
            r.line(format!("{a} and {b} are not equivalent"));
            r.put("equivalent", false);
            let mut sub = s.ws.closure("cocycle", &a)?;
            sub.merge(&s.ws.closure("cocycle", &b)?)?;
            r.fail(sub, &format!("no coboundary relates {a} and {b}"));
        }
    }
    Ok(r)
}

fn cmd_h2(s: &mut Session, dref: &str, vref: &str, all: bool, o: &Opts) -> Result<Report, CliError> {
    let mut r = Report::new("h2");
    let dr = s.datum_ref(dref)?;
    let (v, vname) = s.variety(vref, dr.d.sig())?;
    let scope = if all { ActionScope::All } else { ActionScope::Fixed(dr.action.clone()) };
    let classes = enumerate_h2(&dr.d, &v, &scope, o.budget)?;
    r.line(format!("{} classes", classes.len()));
    r.put("classes", classes.len());
    let mut sizes = Vec::new();
    for (k, c) in classes.iter().enumerate() {
        r.line(format!("class {}: {} cocycles; representative:", k + 1, c.size));
        let rows = cocycle_rows(&dr.d, &c.representative);
        if rows.is_empty() {
            r.line("  0");
        }
        r.lines.extend(rows);
        sizes.push(c.size);
    }
    r.put("sizes", sizes);
    if !all {
        match h2_affine(&dr.d, &dr.action, &v, o.budget) {
            Ok(h) => {
                let agree = h.order() == classes.len() as u128;
                r.line(format!("linear solve: order {} {:?}: {}", h.order(), h.invariant_factors, pf(agree)));
                r.put("affine_order", h.order());
                if !agree {
                    let sub = s.with_variety(s.ws.closure(dr.kind, &dr.name)?, &vname);
                    r.fail(sub, "linear solve and enumeration disagree");
                }
            }
            Err(Error::NotAffine(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(r)
}

fn cmd_h1(s: &mut Session, dref: &str, o: &Opts) -> Result<Report, CliError> {
    let mut r = Report::new("h1");
    let dr = s.datum_ref(dref)?;
    let fc = h1(&dr.d, &dr.action, o.depth, o.budget)?;
    r.line(format!("derivations: {}", fc.derivations.len()));
    r.line(format!(
        "principal derivations: {}{}",
        fc.principal.elements.len(),
        if fc.principal.complete { "" } else { " (closure incomplete at this depth)" }
    ));
    r.line(format!("order: {}", fc.order()));
    for h in &fc.representatives {
        r.line(format!("  {}", fmt_map(dr.d.q.module(), dr.d.i.module(), h)));
    }
    r.put("derivations", fc.derivations.len());
    r.put("principal", fc.principal.elements.len());
    r.put("order", fc.order());
    r.put("complete", fc.principal.complete);
    Ok(r)
}

fn cmd_derivations(s: &mut Session, algebra: &Option<String>, ideal: &Option<String>, datum: &Option<String>) -> Result<Report, CliError> {
    let mut r = Report::new("derivations");
    if let Some(aref) = algebra {
        let (_, an) = s.resolve(aref, &["algebra"])?;
        let a = s.ws.algebra(&an)?.clone();
        let der = match ideal {
            Some(iref) => {
                let (_, kn) = s.resolve(iref, &["ideal"])?;
                let def = s.ws.ideal(&kn)?;
                if def.algebra != an {
                    return Err(CliError::Usage(format!("ideal {kn} belongs to {}", def.algebra)));
                }
                ideal_preserving(&a, &def.ideal)?
            }
            None => derivations_of(&a)?,
        };
        let lie = der.is_lie(&a);
        r.line(format!("derivations: {}", der.len()));
        r.line(format!("Lie algebra under the commutator: {}", pf(lie)));
        for h in &der.elements {
            r.line(format!("  {}", fmt_map(a.module(), a.module(), h)));
        }
        r.put("count", der.len());
        r.put("lie", lie);
        if !lie {
            let sub = s.ws.closure("algebra", &an)?;
            r.fail(sub, "derivations are not closed under the bracket");
        }
        return Ok(r);
    }
    let Some(dref) = datum else {
        return Err(CliError::Usage("derivations needs --algebra or --datum".into()));
    };
    let dr = s.datum_ref(dref)?;
    let ders = derivations(&dr.d, &dr.action)?;
    r.line(format!("derivations: {}", ders.len()));
    for h in &ders {
        r.line(format!("  {}", fmt_map(dr.d.q.module(), dr.d.i.module(), h)));
    }
    r.put("count", ders.len());
    Ok(r)
}

fn cmd_wells(s: &mut Session, eref: &str, o: &Opts) -> Result<Report, CliError> {
    let mut r = Report::new("wells");
    let (_, name) = s.resolve(eref, &["extension"])?;
    let e = s.ws.extension(&name)?;
    let w = verify_wells(&e, o.budget)?;
    r.line(format!(
        "Der(Q,I,*) = {}, Der_I M = {}, compatible pairs = {}, ker W = {}",
        w.datum_derivations, w.ideal_preserving, w.compatible_pairs, w.kernel_of_wells
    ));
    r.line(format!("0 -> Der(Q,I,*) -> Der_I M injective: {}", pf(w.first_injective)));
    r.line(format!("exact at Der_I M: {}", pf(w.kernel_matches)));
    r.line(format!("exact at compatible pairs: {}", pf(w.image_is_kernel)));
    r.line(format!("section: {}", pf(w.section_ok)));
    r.line(format!(
        "split as Lie algebras: {}",
        match w.split {
            Some(b) => pf(b),
            None => "UNDECIDED (budget)",
        }
    ));
    for f in &w.failures {
        r.line(format!("  {f}"));
    }
    r.put("report", serde_json::json!({
        "datum_derivations": w.datum_derivations, "ideal_preserving": w.ideal_preserving,
        "compatible_pairs": w.compatible_pairs, "kernel_of_wells": w.kernel_of_wells,
        "first_injective": w.first_injective, "kernel_matches": w.kernel_matches,
        "image_is_kernel": w.image_is_kernel, "section_ok": w.section_ok, "split": w.split,
    }));
    if !w.passed() {
        let sub = s.ws.closure("extension", &name)?;
        r.fail(sub, &w.failures.join("; "));
    }
    Ok(r)
}

fn cmd_hs(s: &mut Session, href: &str, o: &Opts) -> Result<Report, CliError> {
    let mut r = Report::new("hs");
    let (_, name) = s.resolve(href, &["hs"])?;
    let h = s.ws.hs_datum(&name)?;
    let rep = verify_hs(&h, o.depth, o.budget)?;
    let [q1, m1, sq, q2, m2] = rep.orders;
    r.line(format!("orders: H1(Q) = {q1}, H1(M) = {m1}, H1(I)^sq = {sq}, H2(Q) = {q2}, H2(M) = {m2}"));
    r.line(format!("|A^I| = {} of |A| = {}", h.null.len(), h.a.size()));
    r.line(format!("0 -> H1(Q) -> H1(M) injective: {}", pf(rep.first_injective)));
    r.line(format!("exact at H1(M): {}", pf(rep.exact_at_h1m)));
    r.line(format!("exact at H1(I)^sq: {}", pf(rep.exact_at_square)));
    r.line(format!("exact at H2(Q): {}", pf(rep.exact_at_h2q)));
    r.line(format!("transgression: {}", pf(rep.transgression_ok)));
    if !rep.complete {
        r.line("note: principal derivations not closed at this depth");
    }
    for f in &rep.failures {
        r.line(format!("  {f}"));
    }
    r.put("orders", rep.orders.map(|x| x.to_string()));
    r.put("passed", rep.passed());
    if !rep.passed() {
        let sub = s.ws.closure("hs", &name)?;
        r.fail(sub, &rep.failures.join("; "));
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug)]
struct ExpandFlags {
    emit: EmitArg,
    raw: bool,
    affine: bool,
    axioms: bool,
    sexpr: bool,
}

fn cmd_expand(s: &mut Session, vref: &str, fl: ExpandFlags, cref: Option<&str>, samples: usize, o: &Opts) -> Result<Report, CliError> {
    let mut r = Report::new("expand");
    let (_, vname) = s.resolve(vref, &["variety"])?;
    let v = s.ws.varieties[&vname].clone();
    let emit = match fl.emit {
        EmitArg::General => Emit::General,
        EmitArg::Action => Emit::Action,
        EmitArg::Strict => Emit::Strict,
    };
    let n = Notation::new(v.syntax.clone());
    let ids = if fl.axioms { v.with_axioms() } else { v.identities.clone() };
    let target = match cref {
        Some(c) => {
            let (_, name) = s.resolve(c, &["cocycle"])?;
            let (d, t) = s.ws.cocycle_datum(&name)?;
            if d.sig() != &v.syntax.sig {
                return Err(CliError::Usage(format!("cocycle {name} and variety {vname} have different signatures")));
            }
            Some((name, d, t))
        }
        None => None,
    };
    let mut emitted = Vec::new();
    let mut failure = None;
    for id in &ids {
        let mut ms = cocycle_identity(id, emit, !fl.raw)?;
        if fl.affine {
            ms = ms.affine();
        }
        let text = if fl.sexpr { ms.sexpr(&n) } else { ms.display(&n) };
        r.line(format!("# {}", id.display(&v.syntax)));
        r.line(text.clone());
        emitted.push(text);
        if let Some((name, d, t)) = &target {
            let ok = ms.holds(d, t, &v.param_values)?;
            r.line(format!("holds on {name}: {}", pf(ok)));
            if !ok && failure.is_none() {
                failure = Some(format!("identity `{}` fails on {name}", id.display(&v.syntax)));
            }
        }
    }
    r.put("identities", emitted);
    if let Some((name, d, t)) = &target {
        if samples > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
            let vars: Vec<String> = ["x", "y", "z"].iter().map(|x| x.to_string()).collect();
            let mut bad = 0;
            for _ in 0..samples {
                let term = random_term(&mut rng, d.sig(), &vars, 3, d.modulus());
                if let Some(at) = soundness_failure(d, t, &term, &vars, &v.param_values)? {
                    bad += 1;
                    if failure.is_none() {
                        failure = Some(format!("expansion of {} disagrees with I x_T Q at {at}", term.display(&v.syntax)));
                    }
                }
            }
            r.line(format!("expansion vs semidirect on {samples} random terms (seed {}): {}", o.seed, pf(bad == 0)));
            r.put("sample_failures", bad);
        }
        if let Some(why) = failure {
            let mut sub = s.ws.closure("cocycle", name)?;
            sub.varieties.insert(vname.clone(), v.clone());
            r.fail(sub, &why);
        }
    }
    Ok(r)
}

fn cmd_decompose(s: &mut Session, aref: &str, kind: DecomposeKind) -> Result<Report, CliError> {
    let mut r = Report::new("decompose");
    let (_, name) = s.resolve(aref, &["algebra"])?;
    let m = s.ws.algebra(&name)?.clone();
    let sk = match kind {
        DecomposeKind::Solvable => SeriesKind::Derived,
        DecomposeKind::Nilpotent => SeriesKind::LowerCentral,
    };
    let dec = match crate::cocycle::decompose(&m, sk) {
        Ok(d) => d,
        Err(e @ (Error::Validation(_) | Error::Inconsistency(_))) => {
            r.line(e.to_string());
            let sub = s.ws.closure("algebra", &name)?;
            r.fail(sub, &e.to_string());
            return Ok(r);
        }
        Err(e) => return Err(e.into()),
    };
    r.line(format!("{} factors", dec.factors.len()));
    for (k, f) in dec.factors.iter().enumerate() {
        r.line(format!("Q_{}: {}", k + 1, describe_algebra(f)));
    }
    for (k, (e, t)) in dec.extensions.iter().zip(&dec.cocycles).enumerate() {
        r.line(format!(
            "T_{}: linear {}, action-trivial {}",
            k + 1,
            t.is_linear(),
            t.action.is_trivial()
        ));
        r.lines.extend(cocycle_rows(&e.datum(), t));
    }
    let iso = crate::algebra::is_homomorphism(&dec.rebuilt, &m, &dec.iso);
    r.line(format!("rebuilt algebra isomorphic to {name}: {}", pf(iso)));
    r.put("factors", dec.factors.len());
    r.put("isomorphic", iso);
    if !iso {
        let sub = s.ws.closure("algebra", &name)?;
        r.fail(sub, "reassembly is not an isomorphism");
    }
    Ok(r)
}

fn describe_algebra(a: &Algebra) -> String {
    let f: Vec<String> = a.module().factors().iter().map(|d| format!("Z_{d}")).collect();
    let shape = if f.is_empty() { "0".to_string() } else { f.join(" x ") };
    format!("{shape}{}", if a.ops_vanish() { ", operations zero" } else { "" })
}

fn cmd_series(s: &mut Session, aref: &str, kind: SeriesArg) -> Result<Report, CliError> {
    let mut r = Report::new("series");
    let (_, name) = s.resolve(aref, &["algebra"])?;
    let m = s.ws.algebra(&name)?.clone();
    let sk = match kind {
        SeriesArg::Derived => SeriesKind::Derived,
        SeriesArg::LowerCentral => SeriesKind::LowerCentral,
    };
    let ser = series(&m, sk);
    for (k, t) in ser.terms.iter().enumerate() {
        let els: Vec<String> = t.elements().iter().map(|&x| fmt_elem(m.module(), x)).collect();
        r.line(format!("C_{k}: {} elements {{{}}}", t.len(), els.join(", ")));
    }
    match ser.steps {
        Some(n) => r.line(format!("reaches 0 after {n} steps")),
        None => r.line("does not reach 0"),
    }
    r.put("sizes", ser.terms.iter().map(|t| t.len()).collect::<Vec<_>>());
    r.put("steps", ser.steps);
    Ok(r)
}
