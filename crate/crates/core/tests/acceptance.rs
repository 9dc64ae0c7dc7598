//! Acceptance suite: one line per criterion, each exact and timed against
//! its budget. Runs as a plain binary so the lines are always printed.

mod common;

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use biclosed::calculus::{enumerate_presheaves, nat_transformations, weighted_colimit, NatMap, Presheaf, SetPresheaf};
use biclosed::enrichment::{make_quantale, Elem, Quantale, QuantaleKind};
use biclosed::extend::{compare_with_oracle, ext_iso_check, ExtensionSetup, OracleMode};
use biclosed::fincat::{Backend, Category, CategoryData, Morphism};
use biclosed::localise::{is_local, localise_reflect, SigmaCell, SigmaLocal, SigmaSet, DEFAULT_MAX_ITER};
use biclosed::probicat::{
    biclosed_validate, conv_residual, make_probicat, monoid_laws, p_index, Convolution, ProbicatKind, Probicategory,
    Scope, Side,
};
use biclosed::reflect::{run_conditions, transfer_structure, verify_strong, ConditionSide, ReflectionSetup};
use biclosed::report::Report;
use biclosed::{Error, Result};
use common::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Outcome of one criterion: verdict plus a short summary.
struct Verdict {
    passed: bool,
    summary: String,
}

impl Verdict {
    fn new(passed: bool, summary: impl Into<String>) -> Self {
        Verdict { passed, summary: summary.into() }
    }
}

fn failed_checks(report: &Report) -> Vec<String> {
    report.checks.iter().filter(|c| !c.passed()).map(|c| c.name.clone()).collect()
}

fn quantale_backend(kind: QuantaleKind) -> Backend {
    Backend::Quantale(quantale(kind))
}

// ---------------------------------------------------------------- 1

fn quantale_laws() -> Result<Verdict> {
    let kinds = [
        QuantaleKind::Boolean,
        QuantaleKind::Chain(3),
        QuantaleKind::Chain(5),
        QuantaleKind::Tropical(3),
        QuantaleKind::Tropical(7),
    ];
    let mut triples = 0;
    for kind in kinds {
        let q = make_quantale(kind)?;
        if let Err(v) = biclosed::enrichment::check_quantale(&q.tables()) {
            return Ok(Verdict::new(false, format!("{}: {v}", q.name())));
        }
        for a in q.elements() {
            for c in q.elements() {
                // [a, c] as the join of everything a sends below c
                let oracle = q.join_all(q.elements().filter(|&x| q.leq(q.tensor(a, x), c)));
                if q.residual(a, c) != oracle {
                    return Ok(Verdict::new(false, format!("{}: [{a}, {c}]", q.name())));
                }
                for b in q.elements() {
                    triples += 1;
                    if q.leq(q.tensor(a, b), c) != q.leq(b, q.residual(a, c)) {
                        return Ok(Verdict::new(false, format!("{}: adjunction at ({a}, {b}, {c})", q.name())));
                    }
                }
            }
        }
    }
    Ok(Verdict::new(true, format!("5 quantales, {triples} residuation triples")))
}

// ---------------------------------------------------------------- 2

fn vectors(q: &Quantale, len: usize) -> Vec<Vec<Elem>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out.into_iter().flat_map(|v| q.elements().map(move |e| [v.clone(), vec![e]].concat())).collect();
    }
    out
}

// hom(F, G) on a discrete category: ⋀_x [F x, G x]
fn discrete_hom(q: &Quantale, f: &[Elem], g: &[Elem]) -> Elem {
    q.meet_all(f.iter().zip(g).map(|(&a, &b)| q.residual(a, b)))
}

/// `P(F, G, H)`, `hom(G, F\H)` and `hom(F, H/G)` over every triple of
/// presheaves on delooped Z/2. The first value comes from the group law
/// directly; the residuals come from the engine applied to `p`.
fn biclosedness(p: &Probicategory, q: &Quantale) -> Result<(usize, Option<serde_json::Value>)> {
    let vs = vectors(q, 2);
    let mut triples = 0;
    for f in &vs {
        for g in &vs {
            // (F∘G)(c) = ⋁_{a+b=c} F a ⊗ G b
            let fg: Vec<Elem> = (0..2).map(|c| q.join_all((0..2).map(|a| q.tensor(f[a], g[(c + a) % 2])))).collect();
            for h in &vs {
                triples += 1;
                let v1 = discrete_hom(q, &fg, h);
                let left = conv_residual(p, Side::Left, 0, 0, 0, &qv(h), &qv(f))?;
                let right = conv_residual(p, Side::Right, 0, 0, 0, &qv(h), &qv(g))?;
                let v2 = discrete_hom(q, g, left.as_quantale().expect("quantale"));
                let v3 = discrete_hom(q, f, right.as_quantale().expect("quantale"));
                if v1 != v2 || v2 != v3 {
                    let witness = serde_json::json!({ "F": f, "G": g, "H": h, "P(F,G,H)": v1, "hom(G,F\\H)": v2, "hom(F,H/G)": v3 });
                    return Ok((triples, Some(witness)));
                }
            }
        }
    }
    Ok((triples, None))
}

fn convolution_biclosedness() -> Result<Verdict> {
    let mut counts = Vec::new();
    for (kind, expected) in [(QuantaleKind::Boolean, 64), (QuantaleKind::Chain(3), 729)] {
        let q = quantale(kind);
        let p = cyclic(Backend::Quantale(q.clone()), 2);
        let (triples, witness) = biclosedness(&p, &q)?;
        if let Some(w) = witness {
            return Ok(Verdict::new(false, format!("{}: {w}", q.name())));
        }
        if triples != expected {
            return Ok(Verdict::new(false, format!("{}: {triples} triples, expected {expected}", q.name())));
        }
        counts.push(format!("{} {triples}", q.name()));
    }
    Ok(Verdict::new(true, format!("triples agree: {}", counts.join(", "))))
}

// ---------------------------------------------------------------- 3

fn monoid_laws_hold(p: &Probicategory, scope: &Scope) -> Result<(Report, usize)> {
    let report = monoid_laws(&Convolution::new(p), scope)?;
    let cells = scope.presheaves(p.hom(0, 0))?.len();
    Ok((report, cells))
}

fn convolution_monoid_laws() -> Result<Verdict> {
    let manifold =
        make_probicat(ProbicatKind::Manifold(vec![("x".into(), Category::walking_arrow(&Backend::FinSet))]))?;
    let cases = [
        ("Z/2 boolean", cyclic(boolean(), 2), Scope::default()),
        ("Z/2 finset", cyclic(Backend::FinSet, 2), Scope::default()),
        ("manifold over 2", manifold, Scope { up_to_iso: true, ..Scope::with_max_elements(2) }),
    ];
    let mut parts = Vec::new();
    for (name, p, scope) in cases {
        let (report, cells) = monoid_laws_hold(&p, &scope)?;
        if !report.passed() {
            return Ok(Verdict::new(false, format!("{name}: {:?} failed", failed_checks(&report))));
        }
        let assoc = report.check("associativity").expect("associativity").instances;
        if assoc != cells.pow(3) || report.checks.iter().any(|c| c.witnesses.is_empty()) {
            return Ok(Verdict::new(false, format!("{name}: {assoc} associativity instances for {cells} cells")));
        }
        parts.push(format!("{name} {assoc}"));
    }
    Ok(Verdict::new(true, format!("associativity instances: {}", parts.join(", "))))
}

// ---------------------------------------------------------------- 4

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn parallel_arrows() -> Category {
    let data = CategoryData {
        objects: labels(2),
        morphisms: vec![Morphism { src: 0, tgt: 1, label: "s".into() }, Morphism { src: 0, tgt: 1, label: "t".into() }],
        compositions: Vec::new(),
    };
    Category::from_data(&data).unwrap()
}

/// A colimit instance `W * D` over `K` with parameters in `M` and `B`.
struct ColimitCase<'c> {
    k: &'c Category,
    m: &'c Category,
    b: &'c Category,
    w: SetPresheaf,
    d: SetPresheaf,
}

impl ColimitCase<'_> {
    /// Generators `(k, w, d)` at `(m, b)` and the identifications forced by
    /// each `f: k → k′`, namely `(k′, w, D(f) d) ~ (k, W(f) w, d)`.
    fn presentation(&self, m: usize, b: usize) -> (usize, Vec<(usize, usize)>) {
        let (nk, nb) = (self.k.object_count(), self.b.object_count());
        let (mk, mb) = (self.k.morphism_count(), self.b.morphism_count());
        let mut index = HashMap::new();
        for k in 0..nk {
            for wi in 0..self.w.size(m * nk + k) {
                for di in 0..self.d.size(k * nb + b) {
                    let next = index.len();
                    index.insert((k, wi, di), next);
                }
            }
        }
        let mut pairs = Vec::new();
        for (f, arrow) in self.k.morphisms().iter().enumerate() {
            let (k, k2) = (arrow.src, arrow.tgt);
            // (id_m, f) in M × op(K) runs (m, k′) → (m, k); (f, id_b) in K × B runs (k, b) → (k′, b)
            let w_act = self.w.action(self.m.identity(m) * mk + f);
            let d_act = self.d.action(f * mb + self.b.identity(b));
            for wi in 0..self.w.size(m * nk + k2) {
                for di in 0..self.d.size(k * nb + b) {
                    pairs.push((index[&(k2, wi, d_act[di])], index[&(k, w_act[wi], di)]));
                }
            }
        }
        (index.len(), pairs)
    }

    fn generators(&self) -> usize {
        let (nm, nb) = (self.m.object_count(), self.b.object_count());
        (0..nm).flat_map(|m| (0..nb).map(move |b| (m, b))).map(|(m, b)| self.presentation(m, b).0).sum()
    }
}

/// Cocones into `{0, 1}`, counted by trying every function on generators.
/// The colimit is universal, so this is `2^|(W * D)(m, b)|`.
fn cocones_into_two(generators: usize, pairs: &[(usize, usize)]) -> u64 {
    (0u64..1 << generators).filter(|bits| pairs.iter().all(|&(x, y)| (bits >> x) & 1 == (bits >> y) & 1)).count() as u64
}

fn set_cells(p: &Presheaf) -> &SetPresheaf {
    p.as_set().expect("set presheaf")
}

/// Candidate weights and diagrams for one choice of `K`, `M`, `B`.
type Pool = (Vec<Presheaf>, Vec<Presheaf>);

fn coend_oracle() -> Result<Verdict> {
    let fs = Backend::FinSet;
    let one = Category::terminal(&fs);
    let two = Category::discrete(&fs, &labels(2));
    let arrow = Category::walking_arrow(&fs);
    let pair = parallel_arrows();
    let z2 = Category::delooping(&labels(2), &[vec![0, 1], vec![1, 0]], 0)?;
    let ks = [&one, &two, &arrow, &pair, &z2];
    let params = [&one, &two, &arrow];

    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut pools: HashMap<(usize, usize, usize), Pool> = HashMap::new();
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 50 {
        attempts += 1;
        if attempts > 100_000 {
            return Ok(Verdict::new(false, "could not draw 50 instances"));
        }
        let (ki, mi, bi) = (rng.gen_range(0..ks.len()), rng.gen_range(0..params.len()), rng.gen_range(0..params.len()));
        let (k, m, b) = (ks[ki], params[mi], params[bi]);
        let (ws, ds) = match pools.entry((ki, mi, bi)) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => {
                let ws = enumerate_presheaves(&m.product(&k.op())?, 2)?;
                let ds = enumerate_presheaves(&k.product(b)?, 2)?;
                e.insert((ws, ds))
            }
        };
        let w = set_cells(&ws[rng.gen_range(0..ws.len())]).clone();
        let d = set_cells(&ds[rng.gen_range(0..ds.len())]).clone();
        let case = ColimitCase { k, m, b, w, d };
        let total = case.generators();
        if total == 0 || total > 12 {
            continue;
        }
        checked += 1;
        let colim = weighted_colimit(k, m, b, &Presheaf::Set(case.w.clone()), &Presheaf::Set(case.d.clone()))?;
        let object = set_cells(&colim.object);
        let nb = b.object_count();
        for mm in 0..m.object_count() {
            for bb in 0..nb {
                let (n, pairs) = case.presentation(mm, bb);
                let size = object.size(mm * nb + bb);
                let cocones = cocones_into_two(n, &pairs);
                if cocones != 1 << size {
                    return Ok(Verdict::new(
                        false,
                        format!("instance {checked}: {cocones} cocones at ({mm}, {bb}), colimit has {size} elements"),
                    ));
                }
            }
        }
    }

    // subsingleton dictionary: truncating a set colimit to {0, 1} gives the
    // Boolean colimit of the truncated data
    let bl = boolean();
    let posets_set = [one.clone(), two.clone(), arrow.clone(), chain(&fs)];
    let posets_bool =
        [Category::terminal(&bl), Category::discrete(&bl, &labels(2)), Category::walking_arrow(&bl), chain(&bl)];
    let mut posetal = 0;
    for ki in 0..posets_set.len() {
        for mi in 0..3 {
            for bi in 0..3 {
                let (ks_, ms, bs) = (&posets_set[ki], &posets_set[mi], &posets_set[bi]);
                let (kb, mb, bb) = (&posets_bool[ki], &posets_bool[mi], &posets_bool[bi]);
                let ws = enumerate_presheaves(&ms.product(&ks_.op())?, 1)?;
                let ds = enumerate_presheaves(&ks_.product(bs)?, 1)?;
                for w in &ws {
                    for d in &ds {
                        posetal += 1;
                        let set = weighted_colimit(ks_, ms, bs, w, d)?;
                        let truncate = |p: &Presheaf| {
                            Presheaf::Quantale(set_cells(p).sizes().iter().map(|&s| (s > 0) as Elem).collect())
                        };
                        let (wq, dq) = (truncate(w), truncate(d));
                        wq.check(&mb.product(&kb.op())?)?;
                        dq.check(&kb.product(bb)?)?;
                        let quantale = weighted_colimit(kb, mb, bb, &wq, &dq)?;
                        if quantale.object != truncate(&set.object) {
                            return Ok(Verdict::new(false, format!("posetal instance {posetal} disagrees")));
                        }
                    }
                }
            }
        }
    }
    Ok(Verdict::new(true, format!("50 random instances by cocone count, {posetal} posetal instances by dictionary")))
}

fn chain(backend: &Backend) -> Category {
    Category::poset(backend, &labels(3), &[(0, 1), (1, 2), (0, 2)]).unwrap()
}

// ---------------------------------------------------------------- 5

fn arrow_reflection(p: &Probicategory) -> Result<ReflectionSetup<'_>> {
    ReflectionSetup::with_representables(p, Box::new(SigmaLocal::new(arrow_sigma(p))), Scope::default(), None)
}

fn reflection_theorem() -> Result<Verdict> {
    let p = min_arrow(&Backend::FinSet);
    let s = arrow_reflection(&p)?;
    let (table, verified) = run_conditions(&s, ConditionSide::Both)?;
    let Some(condition) = verified else {
        return Ok(Verdict::new(false, "no condition pair verified"));
    };
    let t = transfer_structure(&s, &table)?;
    let laws = biclosed_validate(&t, s.scope())?;
    if !laws.passed() {
        return Ok(Verdict::new(false, format!("transferred structure: {:?} failed", failed_checks(&laws))));
    }
    let strong = verify_strong(&s, &t)?;
    if !strong.passed() {
        return Ok(Verdict::new(false, format!("strong map: {:?} failed", failed_checks(&strong))));
    }
    let held: Vec<&str> = table.checks.iter().filter(|c| c.passed()).map(|c| c.name.as_str()).collect();
    Ok(Verdict::new(true, format!("condition {condition} used; held: {}", held.join(" "))))
}

// ---------------------------------------------------------------- 6

fn localisation_invariants() -> Result<Verdict> {
    let p = min_arrow(&Backend::FinSet);
    let sigma = arrow_sigma(&p);
    let cat = p.hom(0, 0);
    let all = enumerate_presheaves(cat, 2)?;
    let locals: Vec<&Presheaf> =
        all.iter().filter(|f| is_local(&p, &sigma, (0, 0), f).map(|l| l.local).unwrap_or(false)).collect();
    let mut pairs = 0;
    for f in &all {
        let r = localise_reflect(cat, &sigma, (0, 0), f, DEFAULT_MAX_ITER)?.reflection;
        let again = localise_reflect(cat, &sigma, (0, 0), &r.object, DEFAULT_MAX_ITER)?.reflection;
        if again.object != r.object || again.unit != NatMap::identity(&r.object) {
            return Ok(Verdict::new(false, "reflection is not idempotent"));
        }
        let eta = r.unit.components().expect("set unit");
        for g in &locals {
            pairs += 1;
            // − ∘ η: hom(ψF, G) → hom(F, G) must be a bijection
            let from_psi = nat_transformations(cat, set_cells(&r.object), set_cells(g))?;
            let from_f = nat_transformations(cat, set_cells(f), set_cells(g))?;
            let mut pulled: Vec<Vec<Vec<usize>>> = from_psi
                .iter()
                .map(|h| eta.iter().zip(h).map(|(e, hx)| e.iter().map(|&i| hx[i]).collect()).collect())
                .collect();
            pulled.sort();
            pulled.dedup();
            let mut expected = from_f.clone();
            expected.sort();
            if pulled.len() != from_psi.len() || pulled != expected {
                return Ok(Verdict::new(false, "universal property fails"));
            }
        }
    }

    let mut closures = 0;
    for kind in [QuantaleKind::Boolean, QuantaleKind::Chain(5), QuantaleKind::Tropical(3)] {
        let q = quantale(kind);
        let pq = min_chain3(&Backend::Quantale(q.clone()));
        let cq = pq.hom(0, 0);
        for pairs in [vec![(0, 1)], vec![(1, 2)], vec![(0, 2)], vec![(0, 1), (1, 2)]] {
            let cells = pairs.iter().map(|&(src, tgt)| SigmaCell { x: 0, y: 0, src, tgt, morphism: None }).collect();
            let sigma = SigmaSet::new(&pq, cells)?;
            for f in enumerate_presheaves(cq, 0)? {
                closures += 1;
                let r = localise_reflect(cq, &sigma, (0, 0), &f, DEFAULT_MAX_ITER)?;
                if r.iterations > q.height() * cq.object_count() {
                    return Ok(Verdict::new(false, format!("{}: {} sweeps", q.name(), r.iterations)));
                }
            }
        }
    }

    let pp = parallel_pair();
    let pc = pp.hom(0, 0);
    let sigma = SigmaSet::new(&pp, vec![SigmaCell { x: 0, y: 0, src: 0, tgt: 1, morphism: pc.find_morphism("s") }])?;
    let yb = biclosed::calculus::yoneda_embed(pc).swap_remove(1);
    let diverged = matches!(
        localise_reflect(pc, &sigma, (0, 0), &yb, DEFAULT_MAX_ITER),
        Err(Error::Divergence { max_iter: DEFAULT_MAX_ITER })
    );
    if !diverged {
        return Ok(Verdict::new(false, "divergent case returned"));
    }
    Ok(Verdict::new(
        true,
        format!(
            "{} presheaves idempotent, {pairs} universal pairs, {closures} bounded closures, divergence raised",
            all.len()
        ),
    ))
}

// ---------------------------------------------------------------- 7, 8

fn oracle_comparison(s: &ExtensionSetup<'_>, mode: OracleMode, name: &str, compose: usize) -> Result<Option<String>> {
    let report = compare_with_oracle(s, mode)?;
    if !report.passed() {
        return Ok(Some(format!("{name}: {:?} failed", failed_checks(&report))));
    }
    for check in ["compose", "identity", "right_residual", "left_residual"] {
        let c = report.check(check);
        if c.is_none_or(|c| c.instances == 0 || c.witnesses.is_empty()) {
            return Ok(Some(format!("{name}: no witnesses for {check}")));
        }
    }
    let n = report.check("compose").expect("compose").instances;
    if n != compose {
        return Ok(Some(format!("{name}: {n} composites, expected {compose}")));
    }
    Ok(None)
}

fn extension_is_convolution() -> Result<Verdict> {
    for (kind, cells) in [(QuantaleKind::Boolean, 4), (QuantaleKind::Chain(3), 9)] {
        let p = cyclic(quantale_backend(kind), 2);
        let s = ExtensionSetup::yoneda(&p, Scope::default())?;
        if let Some(why) = oracle_comparison(&s, OracleMode::Yoneda, p.backend().to_string().as_str(), cells * cells)? {
            return Ok(Verdict::new(false, why));
        }
    }
    Ok(Verdict::new(true, "∘, I, /, \\ iso to convolution: boolean 16 and chain(3) 81 composites"))
}

fn extension_is_localisation() -> Result<Verdict> {
    let p = min_arrow(&Backend::FinSet);
    let s = ExtensionSetup::localised(&p, arrow_sigma(&p), DEFAULT_MAX_ITER, Scope::default())?;
    match oracle_comparison(&s, OracleMode::Localisation, "walking arrow", 16)? {
        Some(why) => Ok(Verdict::new(false, why)),
        None => Ok(Verdict::new(true, "∘, I, /, \\ iso to the localised structure on 4 local objects")),
    }
}

// ---------------------------------------------------------------- 9

fn hypothesis_checks() -> Result<Verdict> {
    let z2 = cyclic(Backend::FinSet, 2);
    let arrow = min_arrow(&Backend::FinSet);
    let yoneda = ExtensionSetup::yoneda(&z2, Scope::default())?;
    let localised = ExtensionSetup::localised(&arrow, arrow_sigma(&arrow), DEFAULT_MAX_ITER, Scope::default())?;
    for (name, s) in [("yoneda", &yoneda), ("localisation", &localised)] {
        let report = ext_iso_check(s)?;
        if !report.passed() {
            return Ok(Verdict::new(false, format!("{name}: {:?} failed", failed_checks(&report))));
        }
    }
    // N X = y_0 for both X: not dense
    let cat = z2.hom(0, 0);
    let dom = cat.op().product(cat)?;
    let sizes = [1, 0, 1, 0];
    let constant = set(&dom, &sizes, sizes.iter().map(|&s| (0..s).collect()).collect());
    let s = ExtensionSetup::new(&z2, vec![constant], None, Scope::default(), false)?;
    let report = ext_iso_check(&s)?;
    let witness = report.checks.iter().find(|c| !c.passed()).and_then(|c| c.failures.first().cloned());
    match witness {
        Some(w) => Ok(Verdict::new(true, format!("both special cases pass; non-dense N fails at {}", w["instance"]))),
        None => Ok(Verdict::new(false, "non-dense N passed the hypotheses")),
    }
}

// ---------------------------------------------------------------- 10

/// Z/2 over the Boolean quantale with one `P` entry flipped.
fn mutated(p: &Probicategory, entry: (usize, usize, usize)) -> Result<Probicategory> {
    let mut table = p.p(0, 0, 0).as_quantale().expect("quantale").to_vec();
    let i = p_index(p, 0, 0, 0, entry.0, entry.1, entry.2);
    table[i] = 1 - table[i];
    p.with_p(0, 0, 0, Presheaf::Quantale(table))
}

/// Whether criteria 2 or 3 catch the mutation, and whether the internal
/// laws alone (adjunction, units, associativity) do.
fn detects(p: &Probicategory) -> Result<(bool, bool)> {
    let q = quantale(QuantaleKind::Boolean);
    let (_, witness) = biclosedness(p, &q)?;
    let laws = monoid_laws(&Convolution::new(p), &Scope::default())?;
    let caught_by_laws = !laws.passed() && laws.checks.iter().any(|c| !c.failures.is_empty());
    let internal = biclosed_validate(&Convolution::new(p), &Scope::default())?;
    Ok((witness.is_some() || caught_by_laws, !internal.passed()))
}

fn mutation_sensitivity() -> Result<Verdict> {
    let p = cyclic(boolean(), 2);
    let entries: Vec<(usize, usize, usize)> = (0..8).map(|i| (i >> 2, (i >> 1) & 1, i & 1)).collect();
    let mut rng = StdRng::seed_from_u64(10);
    let mut missed = Vec::new();
    for _ in 0..10 {
        let entry = entries[rng.gen_range(0..entries.len())];
        let (caught, _) = detects(&mutated(&p, entry)?)?;
        if !caught {
            missed.push(entry);
        }
    }
    // every entry, with the internal laws on their own for comparison
    let mut internal = 0;
    for &entry in &entries {
        let (caught, by_laws) = detects(&mutated(&p, entry)?)?;
        if !caught {
            missed.push(entry);
        }
        internal += by_laws as usize;
    }
    if !missed.is_empty() {
        return Ok(Verdict::new(false, format!("undetected mutations at {missed:?}")));
    }
    Ok(Verdict::new(true, format!("10 random and all 8 mutations detected; internal laws alone catch {internal} of 8")))
}

// ----------------------------------------------------------------

/// Name, runtime budget in seconds, and the check.
type Criterion = (&'static str, u64, fn() -> Result<Verdict>);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("quantale laws", 1, quantale_laws),
        ("convolution biclosedness", 5, convolution_biclosedness),
        ("convolution monoid laws", 30, convolution_monoid_laws),
        ("set coend oracle", 30, coend_oracle),
        ("reflection theorem", 30, reflection_theorem),
        ("localisation invariants", 10, localisation_invariants),
        ("extension along yoneda", 30, extension_is_convolution),
        ("extension along localisation", 60, extension_is_localisation),
        ("extension hypotheses", 10, hypothesis_checks),
        ("mutation sensitivity", 30, mutation_sensitivity),
    ];
    let mut all = true;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        let elapsed = started.elapsed();
        let within = elapsed <= Duration::from_secs(*budget);
        let (passed, summary) = match outcome {
            Ok(v) => (v.passed && within, v.summary),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= passed;
        println!(
            "criterion {:>2} {:<30} {} {:>9.3}s / {}s  {}",
            i + 1,
            name,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget,
            summary
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
