//! One pass/fail line per acceptance criterion. Every comparison is exact;
//! each criterion must also finish within `TIME_LIMIT`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use mlex::algebra::{commutator, find_isomorphism, is_homomorphism, Ideal, SeriesKind};
use mlex::cli::format::{self, Workspace};
use mlex::cli::main_with;
use mlex::cocycle::{
    decompose, equivalent, extract_cocycle, is_compatible, kernel_kind, maps_vanishing_at_zero, psi, realization_failure,
    semidirect, Action, Cocycle, Datum, ExtensionRecord, DEFAULT_BUDGET,
};
use mlex::cohomology::{all_actions, derivations, enumerate_h2, h2_affine, stab_automorphisms, ActionScope, DEFAULT_DEPTH};
use mlex::derlie::{coboundary_witness, verify_wells};
use mlex::expander::{action_identity, normalize, random_term, soundness_failure, strict_identity, Notation};
use mlex::hs::verify_hs;
use mlex::modcore::{TupleIter, ZmModule};
use mlex::termlang::{parse_identity, Syntax, Variety};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TIME_LIMIT: Duration = Duration::from_secs(10);
const SOUNDNESS_SAMPLES: usize = 200;
const SOUNDNESS_SEED: u64 = 20240601;
const DETERMINISM_RUNS: usize = 3;

type Outcome = Result<String, String>;

fn fixture_path(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn load(name: &str) -> Result<Workspace, String> {
    format::load(&fixture_path(name)).map_err(|e| e.to_string())
}

fn parse(text: &str) -> Result<Workspace, String> {
    format::load_str("<inline>", text).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mlf(d: &Datum) -> Variety {
    Variety::mlf(d.sig().clone(), d.modulus())
}

/// `Q = F2`, `I = Z_2` with the same signature, trivial action.
const F2_OVER_Z2: &str = "
[ring]
modulus = 2
[module V]
factors = 2,2
[module Z2]
factors = 2
[algebra F2]
module = V
op f/2: (2,2) -> (1,0)
[algebra Z]
module = Z2
signature = f/2
[algebra W]
module = V
signature = f/2
[algebra N]
module = Z2
op f/2: (1,1) -> (1)
[algebra F1]
module = Z2
signature = f/2
";

fn inline_datum(q: &str, i: &str) -> Result<Datum, String> {
    parse(F2_OVER_Z2)?.datum_of(q, i).map_err(|e| e.to_string())
}

fn f1() -> Result<Datum, String> {
    load("f1.mlex")?.datum_of("F1", "F1").map_err(|e| e.to_string())
}

/// Every cell an action table or factor set can set freely.
#[derive(Clone, Copy)]
enum Cell {
    Act(usize, u32, usize),
    Plus(usize),
    Op(usize, usize),
}

fn set(t: &mut Cocycle, c: Cell, v: usize) {
    match c {
        Cell::Act(f, mask, k) => t.action.table_mut(f, mask)[k] = v,
        Cell::Plus(k) => t.plus[k] = v,
        Cell::Op(f, k) => t.ops[f][k] = v,
    }
}

/// All cocycles of `d` passing validation, by exhaustion over every table entry.
fn all_valid_cocycles(d: &Datum) -> Vec<Cocycle> {
    let base = Cocycle::zero(d);
    let mut cells = Vec::new();
    for (f, mask) in base.action.symbols() {
        cells.extend((0..base.action.table(f, mask).len()).map(|k| Cell::Act(f, mask, k)));
    }
    cells.extend((0..base.plus.len()).map(Cell::Plus));
    for (f, tab) in base.ops.iter().enumerate() {
        cells.extend((0..tab.len()).map(|k| Cell::Op(f, k)));
    }
    let mut out = Vec::new();
    for vals in TupleIter::new(d.ni(), cells.len()) {
        let mut t = base.clone();
        for (&c, &v) in cells.iter().zip(&vals) {
            set(&mut t, c, v);
        }
        t.derive_scalar(d);
        if t.validate(d).is_ok() {
            out.push(t);
        }
    }
    out
}

/// Compatible cocycles over the given actions with symmetric `T_+`.
fn compatible_cocycles(d: &Datum, v: &Variety, actions: &[Action]) -> Result<Vec<Cocycle>, String> {
    let nq = d.nq();
    let mut cells = Vec::new();
    for x in 1..nq {
        for y in x..nq {
            cells.push((Cell::Plus(x * nq + y), Some(y * nq + x)));
        }
    }
    for (f, o) in d.sig().ops.iter().enumerate() {
        for (k, xs) in TupleIter::new(nq, o.arity).enumerate() {
            if !xs.contains(&0) {
                cells.push((Cell::Op(f, k), None));
            }
        }
    }
    let mut out = Vec::new();
    for a in actions {
        let base = Cocycle::with_action(d, a.clone());
        for vals in TupleIter::new(d.ni(), cells.len()) {
            let mut t = base.clone();
            for (&(c, mirror), &v) in cells.iter().zip(&vals) {
                set(&mut t, c, v);
                if let Some(m) = mirror {
                    t.plus[m] = v;
                }
            }
            t.derive_scalar(d);
            if t.validate(d).is_ok() && is_compatible(d, &t, v).map_err(|e| e.to_string())? {
                out.push(t);
            }
        }
    }
    Ok(out)
}

/// Compatible cocycles with `T_+ = 0` and the given action.
fn group_trivial_cocycles(d: &Datum, v: &Variety, action: &Action) -> Result<Vec<Cocycle>, String> {
    let nq = d.nq();
    let mut cells = Vec::new();
    for (f, o) in d.sig().ops.iter().enumerate() {
        for (k, xs) in TupleIter::new(nq, o.arity).enumerate() {
            if !xs.contains(&0) {
                cells.push((f, k));
            }
        }
    }
    let base = Cocycle::with_action(d, action.clone());
    let mut out = Vec::new();
    for vals in TupleIter::new(d.ni(), cells.len()) {
        let mut t = base.clone();
        for (&(f, k), &val) in cells.iter().zip(&vals) {
            t.ops[f][k] = val;
        }
        t.derive_scalar(d);
        if t.validate(d).is_ok() && is_compatible(d, &t, v).map_err(err)? {
            out.push(t);
        }
    }
    Ok(out)
}

/// The last group-trivial compatible cocycle that is not a coboundary.
fn nonsplit_group_trivial(d: &Datum, action: &Action) -> Result<Cocycle, String> {
    for t in group_trivial_cocycles(d, &mlf(d), action)?.into_iter().rev() {
        if coboundary_witness(d, &t, DEFAULT_BUDGET).map_err(err)?.is_none() {
            return Ok(t);
        }
    }
    Err("every group-trivial cocycle is a coboundary".into())
}

fn canonical_extension(d: &Datum, t: &Cocycle) -> Result<ExtensionRecord, String> {
    let sd = semidirect(d, t).map_err(|e| e.to_string())?;
    Ok(sd.extension(d).map_err(|e| e.to_string())?.0)
}

/// Brute-force search for `<a,x> -> <a + h(x), x>` as an isomorphism
/// `I x_T Q -> I x_T' Q`.
fn stabilizing_iso(d: &Datum, t: &Cocycle, t2: &Cocycle) -> Result<bool, String> {
    let s1 = semidirect(d, t).map_err(|e| e.to_string())?;
    let s2 = semidirect(d, t2).map_err(|e| e.to_string())?;
    if !s1.is_valid() || !s2.is_valid() {
        return Err("semidirect product is not an algebra".into());
    }
    for h in maps_vanishing_at_zero(d.nq(), d.ni(), DEFAULT_BUDGET).map_err(|e| e.to_string())? {
        let map: Vec<usize> = (0..s1.raw.size())
            .map(|p| {
                let (a, x) = s1.unpair(p);
                s2.pair(d.i.add(a, h[x]), x)
            })
            .collect();
        if mlex::algebra::tables_homomorphism(s1.tables(), s2.tables(), &map) {
            return Ok(true);
        }
    }
    Ok(false)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// R1-R4 read directly off the raw semidirect tables with `iota(a) = <a,0>`
/// and `l(x) = <0,x>`.
fn raw_realization_failure(d: &Datum, t: &Cocycle) -> Result<Option<String>, String> {
    let sd = semidirect(d, t).map_err(err)?;
    let tb = sd.tables();
    let (q, nq) = (&d.q, d.nq());
    let io = |a: usize| sd.pair(a, 0);
    let l = |x: usize| sd.pair(0, x);
    for x in 0..nq {
        for y in 0..nq {
            if io(t.tplus(x, y)) != tb.sub(tb.add(l(x), l(y)), l(q.add(x, y))) {
                return Ok(Some(format!("R1 at ({x},{y})")));
            }
        }
        for r in 0..d.modulus() {
            if io(t.tr(r, x)) != tb.sub(tb.scale(r, l(x)), l(q.scale(r, x))) {
                return Ok(Some(format!("R2 at r={r}, x={x}")));
            }
        }
    }
    for (f, o) in d.sig().ops.iter().enumerate() {
        for xs in TupleIter::new(nq, o.arity) {
            let lx: Vec<usize> = xs.iter().map(|&x| l(x)).collect();
            if io(t.tf(f, &xs)) != tb.sub(tb.apply(f, &lx), l(q.op(f, &xs))) {
                return Ok(Some(format!("R3 at {xs:?}")));
            }
        }
        for (g, mask) in t.action.symbols() {
            if g != f {
                continue;
            }
            for xs in TupleIter::new(nq, o.arity) {
                for a in TupleIter::new(d.ni(), o.arity) {
                    let args: Vec<usize> = (0..o.arity).map(|k| if mask & (1 << k) != 0 { io(a[k]) } else { l(xs[k]) }).collect();
                    if io(t.action.get(f, mask, &xs, &a)) != tb.apply(f, &args) {
                        return Ok(Some(format!("R4 at mask {mask}, {xs:?} | {a:?}")));
                    }
                }
            }
        }
    }
    Ok(None)
}

fn c1_realization() -> Outcome {
    let d = f1()?;
    let all = all_valid_cocycles(&d);
    ensure(!all.is_empty(), || "no valid cocycles".into())?;
    let mut legal = 0;
    for t in &all {
        if let Some(f) = raw_realization_failure(&d, t)? {
            return Err(format!("{f} for {t:?}"));
        }
        let sd = semidirect(&d, t).map_err(err)?;
        if sd.is_valid() {
            let (e, _) = sd.extension(&d).map_err(err)?;
            if let Some(f) = realization_failure(&e, t) {
                return Err(format!("{f} for {t:?}"));
            }
            legal += 1;
        }
    }
    Ok(format!("{} valid cocycles over F1 realized exactly ({legal} give legal algebras)", all.len()))
}

fn c2_round_trip() -> Outcome {
    let mut total = 0;
    let d1 = f1()?;
    let acts = all_actions(&d1, DEFAULT_BUDGET).map_err(err)?;
    let d2 = inline_datum("F2", "Z")?;
    let cases = [(d1.clone(), compatible_cocycles(&d1, &mlf(&d1), &acts)?), (d2.clone(), {
        let triv = [Action::trivial(&d2)];
        compatible_cocycles(&d2, &mlf(&d2), &triv)?
    })];
    for (d, ts) in &cases {
        for t in ts {
            let e = canonical_extension(d, t)?;
            let back = extract_cocycle(&e);
            ensure(&back == t, || format!("extracted cocycle differs from {t:?}"))?;
            let (_, ok) = psi(&e).map_err(err)?;
            ensure(ok, || format!("psi is not an isomorphism for {t:?}"))?;
            for l in e.liftings() {
                let el = e.clone().with_lift(l).map_err(err)?;
                let (_, ok) = psi(&el).map_err(err)?;
                ensure(ok, || format!("psi fails under another lifting for {t:?}"))?;
            }
            total += 1;
        }
    }
    Ok(format!("{total} extensions over F1 and F2 x Z2 reproduced via psi under every lifting"))
}

fn c3_equivalence() -> Outcome {
    let d = f1()?;
    let acts = all_actions(&d, DEFAULT_BUDGET).map_err(err)?;
    let ts = compatible_cocycles(&d, &mlf(&d), &acts)?;
    let mut lift_pairs = 0;
    for t in &ts {
        let e = canonical_extension(&d, t)?;
        let extracted: Vec<Cocycle> = e
            .liftings()
            .into_iter()
            .map(|l| e.clone().with_lift(l).map(|el| extract_cocycle(&el)))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        for a in &extracted {
            for b in &extracted {
                ensure(equivalent(&d, a, b, DEFAULT_BUDGET).map_err(err)?.is_some(), || {
                    format!("liftings of one extension give inequivalent cocycles {a:?} / {b:?}")
                })?;
                lift_pairs += 1;
            }
        }
    }
    let (mut eq, mut neq) = (0, 0);
    for a in &ts {
        for b in &ts {
            let by_cocycle = equivalent(&d, a, b, DEFAULT_BUDGET).map_err(err)?.is_some();
            let by_iso = stabilizing_iso(&d, a, b)?;
            ensure(by_cocycle == by_iso, || format!("equivalence {by_cocycle} but stabilizing iso {by_iso}: {a:?} / {b:?}"))?;
            if by_cocycle {
                eq += 1;
            } else {
                neq += 1;
            }
        }
    }
    ensure(neq > 0, || "no inequivalent pair exercised".into())?;
    Ok(format!("{lift_pairs} lifting pairs equivalent; {eq} equivalent and {neq} inequivalent cocycle pairs match the iso oracle"))
}

const RB_ACTION: &str = "P(x) ∗ P(b) + P(a) ∘ P(y) = P(P(x) ∗ b) + P(P(a) ∘ y) + P(x ∗ P(b)) + P(a ∘ P(y)) + λP(a ∘ y) + λP(x ∗ b)";
const LEIBNIZ_STRICT: &str = "[a, T(y,z)] + x ∗ T(y,z) + T(x,[y,z]) = [T(x,y),c] + T(x,y) ∘ z + T([x,y],z) + [b,T(x,z)] + y ∗ T(x,z) + T(y,[x,z]) + T_+([[x,y],z],[y,[x,z]])";

fn c4_expander() -> Outcome {
    let rb = Syntax::new(mlex::algebra::Signature::new(&[("mul", 2), ("P", 1)]).map_err(err)?, 5).with_params(&["λ"]);
    let id = parse_identity("[P(x), P(y)] = P([P(x), y]) + P([x, P(y)]) + λ*P([x, y])", &rb).map_err(err)?;
    let got = action_identity(&id).map_err(err)?.display(&Notation::new(rb));
    ensure(normalize(&got) == normalize(RB_ACTION), || format!("Rota-Baxter action identity: {got}"))?;
    let lb = Syntax::new(mlex::algebra::Signature::new(&[("br", 2)]).map_err(err)?, 2);
    let id = parse_identity("[x, [y, z]] = [[x, y], z] + [y, [x, z]]", &lb).map_err(err)?;
    let got = strict_identity(&id).map_err(err)?.display(&Notation::new(lb));
    ensure(normalize(&got) == normalize(LEIBNIZ_STRICT), || format!("left-Leibniz strict identity: {got}"))?;

    let d = f1()?;
    let pool = all_valid_cocycles(&d);
    let d2 = inline_datum("F2", "Z")?;
    let pool2: Vec<Cocycle> = all_actions(&d2, DEFAULT_BUDGET)
        .map_err(err)?
        .into_iter()
        .flat_map(|a| group_trivial_cocycles(&d2, &mlf(&d2), &a).unwrap_or_default())
        .collect();
    ensure(!pool2.is_empty(), || "empty F2 x Z2 pool".into())?;
    let vars: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SOUNDNESS_SEED);
    for n in 0..SOUNDNESS_SAMPLES {
        let (dd, t) = if rng.gen_bool(0.5) {
            (&d, &pool[rng.gen_range(0..pool.len())])
        } else {
            (&d2, &pool2[rng.gen_range(0..pool2.len())])
        };
        let term = random_term(&mut rng, dd.sig(), &vars, 3, dd.modulus());
        if let Some(f) = soundness_failure(dd, t, &term, &vars, &[]).map_err(err)? {
            return Err(format!("sample {n}: expansion of {term:?} disagrees at {f}"));
        }
    }
    Ok(format!("both goldens match; {SOUNDNESS_SAMPLES} random triples sound at every assignment"))
}

fn c5_kernel_kind() -> Outcome {
    let data = [f1()?, inline_datum("F1", "N")?, inline_datum("N", "F1")?];
    let mut checked = 0;
    let mut seen = BTreeSet::new();
    for d in &data {
        let acts = all_actions(d, DEFAULT_BUDGET).map_err(err)?;
        for t in compatible_cocycles(d, &mlf(d), &acts)? {
            let abelian = d.kernel_abelian() && t.is_linear();
            let central = d.kernel_abelian() && t.is_action_trivial();
            let e = canonical_extension(d, &t)?;
            let k = e.kernel();
            let oracle_abelian = commutator(&e.m, &k, &k).map_err(err)?.is_zero();
            let oracle_central = commutator(&e.m, &Ideal::whole(&e.m), &k).map_err(err)?.is_zero();
            ensure(abelian == oracle_abelian && central == oracle_central, || {
                format!("syntactic ({abelian}, {central}) vs commutator ({oracle_abelian}, {oracle_central}) for {t:?}")
            })?;
            let kk = kernel_kind(d, &t).map_err(err)?;
            ensure(kk.abelian == abelian && kk.central == central, || "kernel_kind disagrees".into())?;
            seen.insert((abelian, central));
            checked += 1;
        }
    }
    ensure(seen.len() >= 3, || format!("only {seen:?} kinds exercised"))?;
    Ok(format!("{checked} compatible cocycles, 0 disagreements, kinds {seen:?}"))
}

fn c6_affine() -> Outcome {
    let hs3 = load("hs3.mlex")?;
    let act = hs3.actions.get("act").ok_or("hs3 lacks `act`")?;
    let fixtures: Vec<(&str, Datum, Action)> = vec![
        ("F1", f1()?, Action::trivial(&f1()?)),
        ("pure Z4", load("pure_z4.mlex")?.datum_of("P", "P").map_err(err)?, {
            let d = load("pure_z4.mlex")?.datum_of("P", "P").map_err(err)?;
            Action::trivial(&d)
        }),
        ("F2 x Z2", inline_datum("F2", "Z")?, Action::trivial(&inline_datum("F2", "Z")?)),
        ("F2 x Z2 acted", hs3.datum_of("F2", "A").map_err(err)?, act.action.clone()),
    ];
    let mut summary = Vec::new();
    for (name, d, a) in &fixtures {
        let v = mlf(d);
        let aff = h2_affine(d, a, &v, DEFAULT_BUDGET).map_err(err)?;
        let classes = enumerate_h2(d, &v, &ActionScope::Fixed(a.clone()), DEFAULT_BUDGET).map_err(err)?;
        ensure(aff.order() == classes.len() as u128, || format!("{name}: affine order {} vs {} classes", aff.order(), classes.len()))?;
        let by_enum: BTreeSet<Vec<usize>> = classes.iter().map(|c| c.representative.key()).collect();
        let by_aff: BTreeSet<Vec<usize>> = aff.representatives.iter().map(|(_, t)| t.key()).collect();
        ensure(by_enum == by_aff, || format!("{name}: representative sets differ"))?;
        let mut coords = BTreeSet::new();
        for c in &classes {
            let k = aff.class_of(&c.representative).map_err(err)?;
            let idx = aff.class_index(&k).ok_or_else(|| format!("{name}: unknown class {k:?}"))?;
            ensure(aff.representatives[idx].1 == c.representative, || format!("{name}: class {k:?} has another representative"))?;
            coords.insert(k);
        }
        ensure(coords.len() == classes.len(), || format!("{name}: classes collide"))?;
        for x in &classes {
            for y in &classes {
                let (s, t) = (&x.representative, &y.representative);
                let sum = s.add_factor_sets(t, &d.i);
                let want: Vec<u64> = aff
                    .class_of(s)
                    .map_err(err)?
                    .iter()
                    .zip(aff.class_of(t).map_err(err)?)
                    .zip(&aff.invariant_factors)
                    .map(|((&p, q), &g)| (p + q) % g)
                    .collect();
                ensure(aff.class_of(&sum).map_err(err)? == want, || format!("{name}: group law fails"))?;
            }
        }
        summary.push(format!("{name} {}", classes.len()));
    }
    Ok(format!("class counts and representatives agree ({}); group law holds on all pairs", summary.join(", ")))
}

fn c7_pure_module() -> Outcome {
    let d = load("pure_z4.mlex")?.datum_of("P", "P").map_err(err)?;
    let classes = enumerate_h2(&d, &mlf(&d), &ActionScope::All, DEFAULT_BUDGET).map_err(err)?;
    ensure(classes.len() == 2, || format!("{} classes", classes.len()))?;
    let mut reducts = BTreeSet::new();
    for c in &classes {
        let e = canonical_extension(&d, &c.representative)?;
        let m: &ZmModule = e.m.module();
        let max_order = (0..m.size()).map(|x| m.order_of(x)).max().unwrap_or(1);
        reducts.insert((m.factors().to_vec(), max_order));
    }
    let want: BTreeSet<(Vec<u64>, u64)> = [(vec![2, 2], 2), (vec![4], 4)].into_iter().collect();
    ensure(reducts == want, || format!("group reducts {reducts:?}"))?;
    Ok("2 classes with reducts Z2 x Z2 and Z4".into())
}

fn hom_killing_commutator(d: &Datum) -> Result<BTreeSet<Vec<usize>>, String> {
    let q = &d.q;
    let whole = Ideal::whole(q);
    let qq = commutator(q, &whole, &whole).map_err(err)?;
    let mut out = BTreeSet::new();
    for h in maps_vanishing_at_zero(d.nq(), d.ni(), DEFAULT_BUDGET).map_err(err)? {
        let additive = (0..d.nq()).all(|x| (0..d.nq()).all(|y| h[q.add(x, y)] == d.i.add(h[x], h[y])));
        let scalar = (0..q.modulus()).all(|r| (0..d.nq()).all(|x| h[q.scale(r, x)] == d.i.scale(r, h[x])));
        if additive && scalar && qq.elements().iter().all(|&x| h[x] == 0) {
            out.insert(h);
        }
    }
    Ok(out)
}

fn c8_central_h1() -> Outcome {
    let data = [f1()?, inline_datum("F2", "Z")?, inline_datum("F2", "W")?, inline_datum("F2", "F1")?];
    let mut sizes = Vec::new();
    for d in &data {
        let ders: BTreeSet<Vec<usize>> = derivations(d, &Action::trivial(d)).map_err(err)?.into_iter().collect();
        let oracle = hom_killing_commutator(d)?;
        ensure(ders == oracle, || format!("derivations {} vs oracle {}", ders.len(), oracle.len()))?;
        sizes.push(ders.len());
    }
    let f1d = f1()?;
    let t = load("f1.mlex")?.cocycle_datum("T").map_err(err)?.1;
    let d2 = inline_datum("F2", "Z")?;
    let t2 = nonsplit_group_trivial(&d2, &Action::trivial(&d2))?;
    let exts = [
        load("f2.mlex")?.extension("E").map_err(err)?,
        canonical_extension(&f1d, &t)?,
        canonical_extension(&d2, &t2)?,
    ];
    let mut stabs = Vec::new();
    for e in &exts {
        let d = e.datum();
        let st = stab_automorphisms(e, DEFAULT_BUDGET).map_err(err)?;
        let ders = derivations(&d, &extract_cocycle(e).action).map_err(err)?;
        ensure(st.derivations == ders, || "stabilizer derivations differ from Der".into())?;
        for g in &st.automorphisms {
            let fixes = e.iota.iter().all(|&a| g[a] == a) && (0..e.m.size()).all(|y| e.pi[g[y]] == e.pi[y]);
            let bij = g.iter().collect::<BTreeSet<_>>().len() == g.len();
            ensure(fixes && bij && is_homomorphism(&e.m, &e.m, g), || "not a stabilizing automorphism".into())?;
        }
        stabs.push(st.len());
    }
    Ok(format!("Der = {{h : h([Q,Q]) = 0}} with sizes {sizes:?}; |Stab| = |Der| = {stabs:?} with matching group law"))
}

fn c9_wells() -> Outcome {
    let f1d = f1()?;
    let t = load("f1.mlex")?.cocycle_datum("T").map_err(err)?.1;
    let d2 = inline_datum("F2", "Z")?;
    let t2 = nonsplit_group_trivial(&d2, &Action::trivial(&d2))?;
    let hs3 = load("hs3.mlex")?;
    let d3 = hs3.datum_of("F2", "A").map_err(err)?;
    let t3 = nonsplit_group_trivial(&d3, &hs3.actions["act"].action)?;
    let exts = [
        ("F2", load("f2.mlex")?.extension("E").map_err(err)?),
        ("F1 T", canonical_extension(&f1d, &t)?),
        ("F2 x Z2", canonical_extension(&d2, &t2)?),
        ("F2 x Z2 acted", canonical_extension(&d3, &t3)?),
    ];
    let mut out = Vec::new();
    for (name, e) in &exts {
        ensure(extract_cocycle(e).plus_vanishes(), || format!("{name} is not group-trivial"))?;
        let r = verify_wells(e, DEFAULT_BUDGET).map_err(err)?;
        ensure(r.passed(), || format!("{name}: {:?}", r.failures))?;
        ensure(r.split == Some(true), || format!("{name}: split {:?}", r.split))?;
        out.push(format!("{name} {}/{}/{}/{}", r.datum_derivations, r.ideal_preserving, r.compatible_pairs, r.kernel_of_wells));
    }
    Ok(format!("exact and split on {}", out.join(", ")))
}

fn c10_hs() -> Outcome {
    let mut proper_null = false;
    let mut transgressing = false;
    let mut out = Vec::new();
    for name in ["hs1.mlex", "hs2.mlex", "hs3.mlex", "hs4.mlex"] {
        let h = load(name)?.hs_datum("H").map_err(err)?;
        let r = verify_hs(&h, DEFAULT_DEPTH, DEFAULT_BUDGET).map_err(err)?;
        ensure(r.passed(), || format!("{name}: {:?}", r.failures))?;
        proper_null |= !h.null.is_empty() && h.null.len() > 1 && h.null.len() < h.a.size();
        for d in derivations(&h.i_datum, &h.i_action).map_err(err)? {
            if h.satisfies_square(&d) {
                let tr = h.transgression(&d).map_err(err)?;
                transgressing |= coboundary_witness(&h.q_datum, &tr, DEFAULT_BUDGET).map_err(err)?.is_none();
            }
        }
        out.push(format!("{name} {:?}", r.orders));
    }
    ensure(proper_null, || "no fixture with 0 < A^I < A".into())?;
    ensure(transgressing, || "no fixture with a nonzero transgression".into())?;
    Ok(format!("exact at every node on {}", out.join(", ")))
}

fn c11_decompose() -> Outcome {
    let f2 = load("f2.mlex")?.algebra("F2").map_err(err)?.clone();
    let s = load("solvable3.mlex")?.algebra("S").map_err(err)?.clone();
    let mut out = Vec::new();
    for (name, m, kind) in [("F2", &f2, SeriesKind::LowerCentral), ("solvable3", &s, SeriesKind::Derived)] {
        let dec = decompose(m, kind).map_err(err)?;
        let bij = dec.iso.iter().collect::<BTreeSet<_>>().len() == m.size() && dec.iso.len() == m.size();
        ensure(bij && is_homomorphism(&dec.rebuilt, m, &dec.iso), || format!("{name}: iso does not verify"))?;
        ensure(find_isomorphism(&dec.rebuilt, m).is_some(), || format!("{name}: no isomorphism found"))?;
        out.push(format!("{name} {} factors", dec.factors.len()));
    }
    Ok(format!("rebuilt algebras isomorphic ({})", out.join(", ")))
}

fn c12_determinism() -> Outcome {
    let f = |n: &str| fixture_path(n);
    let (f1, f2, hs) = (f("f1.mlex"), f("f2.mlex"), f("hs1.mlex"));
    let commands: Vec<Vec<String>> = vec![
        vec!["check".into(), f1.clone()],
        vec!["check".into(), f1.clone(), "--variety".into(), f("alternating.mlex")],
        vec!["semidirect".into(), "--cocycle".into(), format!("{f1}:T")],
        vec!["extract".into(), "--extension".into(), format!("{f2}:E")],
        vec!["equivalent".into(), "--cocycle".into(), format!("{f1}:T"), "--cocycle".into(), format!("{f1}:T")],
        vec!["h2".into(), "--datum".into(), format!("{f1}:D"), "--all-actions".into()],
        vec!["h2".into(), "--datum".into(), f("pure_z4.mlex")],
        vec!["h1".into(), "--datum".into(), format!("{f1}:D")],
        vec!["derivations".into(), "--algebra".into(), format!("{f2}:F2"), "--ideal".into(), "K".into()],
        vec!["derivations".into(), "--datum".into(), format!("{f1}:D")],
        vec!["wells".into(), "--extension".into(), format!("{f2}:E")],
        vec!["hs".into(), "--fixture".into(), hs],
        vec!["expand".into(), "--variety".into(), f("leibniz.mlex"), "--emit".into(), "strict".into()],
        vec!["expand".into(), "--variety".into(), f("rota_baxter.mlex"), "--emit".into(), "action".into()],
        vec!["expand".into(), "--variety".into(), f("alternating.mlex"), "--cocycle".into(), format!("{f1}:T"), "--samples".into(), "20".into()],
        vec!["decompose".into(), "--algebra".into(), format!("{f2}:F2"), "--kind".into(), "nilpotent".into()],
        vec!["decompose".into(), "--algebra".into(), f("solvable3.mlex"), "--kind".into(), "solvable".into()],
        vec!["series".into(), "--algebra".into(), f("solvable3.mlex"), "--kind".into(), "derived".into()],
    ];
    let mut runs = 0;
    for cmd in &commands {
        for json in [false, true] {
            let mut args = vec!["mlex".to_string()];
            args.extend(cmd.iter().cloned());
            if json {
                args.push("--json".into());
            }
            let first = main_with(args.clone());
            ensure(first.2 != 2, || format!("{cmd:?} errored: {}", first.1))?;
            for _ in 1..DETERMINISM_RUNS {
                ensure(main_with(args.clone()) == first, || format!("{cmd:?} output changed between runs"))?;
                runs += 1;
            }
        }
    }
    Ok(format!("{} command lines byte-identical over {runs} repeated runs", commands.len() * 2))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("realization over F1", c1_realization),
        ("representation round trip", c2_round_trip),
        ("equivalence iff lifting change", c3_equivalence),
        ("expander goldens and soundness", c4_expander),
        ("abelian and central kernels", c5_kernel_kind),
        ("affine H2 consistency", c6_affine),
        ("pure-module sanity", c7_pure_module),
        ("central H1 and stabilizer", c8_central_h1),
        ("Wells exactness", c9_wells),
        ("Hochschild-Serre exactness", c10_hs),
        ("decompositions", c11_decompose),
        ("determinism", c12_determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed < TIME_LIMIT => (true, d),
            Ok(d) => (false, format!("{d}; took {elapsed:.2?}, limit {TIME_LIMIT:?}")),
            Err(e) => (false, e),
        };
        println!("{} {:>2} {name}: {detail} [{elapsed:.2?}]", if ok { "PASS" } else { "FAIL" }, k + 1);
        failed += usize::from(!ok);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
