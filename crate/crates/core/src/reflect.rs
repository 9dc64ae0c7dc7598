//! Transferring a biclosed structure along a reflection `ψ ⊣ θ` onto a full
//! subcategory, under any one of six sufficient conditions, with `ψ` certified
//! strong.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;
use serde_json::json;

use crate::calculus::{
    colimit_weight_map, external_product_map, limit_weight_map, nat_transformations, presheaf_hom_value, reflect_map,
    yoneda_embed, NatMap, Presheaf, Reflection, Reflector,
};
use crate::error::{Error, Result};
use crate::fincat::{find_natural_iso, Category};
use crate::probicat::{biclosed_validate, Biclosed, Convolution, Probicategory, Scope};
use crate::report::{Check, Report};

/// A reflection given by its local objects: `ψF` is the least local object
/// above `F`. Quantale backend only; the local objects must be closed under
/// meets.
#[derive(Clone, Debug)]
pub struct ClosureReflector {
    /// Local objects per hom index `x * n + y`.
    pub local: Vec<Vec<Presheaf>>,
    pub objects: usize,
}

impl Reflector for ClosureReflector {
    fn reflect(&self, cat: &Category, hom: (usize, usize), f: &Presheaf) -> Result<Reflection> {
        let q =
            cat.quantale().ok_or_else(|| Error::Reflection("explicit reflections need the quantale backend".into()))?;
        let v =
            f.as_quantale().ok_or_else(|| Error::BackendMismatch("set presheaf in a quantale reflection".into()))?;
        let above = self.local[hom.0 * self.objects + hom.1].iter().filter_map(|c| {
            let c = c.as_quantale()?;
            v.iter().zip(c).all(|(&a, &b)| q.leq(a, b)).then_some(c)
        });
        let mut meet = vec![q.top(); v.len()];
        for c in above {
            for (m, &b) in meet.iter_mut().zip(c) {
                *m = q.meet(*m, b);
            }
        }
        let object = Presheaf::Quantale(meet);
        if !self.contains(cat, hom, &object) {
            return Err(Error::Reflection("local objects are not closed under meets".into()));
        }
        Ok(Reflection { object, unit: NatMap::Leq })
    }

    fn contains(&self, _cat: &Category, hom: (usize, usize), f: &Presheaf) -> bool {
        self.local[hom.0 * self.objects + hom.1].contains(f)
    }
}

/// `B = [A, V]` under convolution, a reflective family `C ⊂ B`, and the
/// classes of generators `A ⊂ B` and cogenerators `D ⊂ C`. Per-hom lists are
/// indexed `x * n + y`.
pub struct ReflectionSetup<'a> {
    probicat: &'a Probicategory,
    conv: Convolution<'a>,
    reflector: Box<dyn Reflector + 'a>,
    gens: Vec<Vec<Presheaf>>,
    cogens: Vec<Vec<Presheaf>>,
    scope: Scope,
    cells: Vec<Vec<Presheaf>>,
    local: Vec<Vec<Presheaf>>,
    cache: Mutex<HashMap<(usize, Presheaf), Reflection>>,
}

impl<'a> ReflectionSetup<'a> {
    pub fn new(
        probicat: &'a Probicategory,
        reflector: Box<dyn Reflector + 'a>,
        gens: Vec<Vec<Presheaf>>,
        cogens: Vec<Vec<Presheaf>>,
        scope: Scope,
    ) -> Result<Self> {
        let n = probicat.object_count();
        if gens.len() != n * n || cogens.len() != n * n {
            return Err(Error::IndexMismatch(format!("class lists need {} hom entries", n * n)));
        }
        let mut cells = Vec::with_capacity(n * n);
        let mut local = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let cat = probicat.hom(x, y);
                for g in gens[x * n + y].iter().chain(&cogens[x * n + y]) {
                    g.check(cat)?;
                }
                let all = scope.presheaves(cat)?;
                local.push(all.iter().filter(|f| reflector.contains(cat, (x, y), f)).cloned().collect());
                cells.push(all);
            }
        }
        for x in 0..n {
            for y in 0..n {
                if let Some(d) = cogens[x * n + y].iter().find(|d| !reflector.contains(probicat.hom(x, y), (x, y), d)) {
                    return Err(Error::NotInSubcategory(format!("cogenerator {} is not local", json!(d))));
                }
            }
        }
        Ok(ReflectionSetup {
            probicat,
            conv: Convolution::new(probicat),
            reflector,
            gens,
            cogens,
            scope,
            cells,
            local,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Generators are the representables; cogenerators default to every
    /// local object in scope.
    pub fn with_representables(
        probicat: &'a Probicategory,
        reflector: Box<dyn Reflector + 'a>,
        scope: Scope,
        cogens: Option<Vec<Vec<Presheaf>>>,
    ) -> Result<Self> {
        let n = probicat.object_count();
        let gens: Vec<Vec<Presheaf>> = (0..n * n).map(|i| yoneda_embed(probicat.hom(i / n, i % n))).collect();
        let cogens = match cogens {
            Some(c) => c,
            None => {
                let mut out = Vec::with_capacity(n * n);
                for x in 0..n {
                    for y in 0..n {
                        let cat = probicat.hom(x, y);
                        out.push(
                            scope.presheaves(cat)?.into_iter().filter(|f| reflector.contains(cat, (x, y), f)).collect(),
                        );
                    }
                }
                out
            }
        };
        Self::new(probicat, reflector, gens, cogens, scope)
    }

    pub fn probicategory(&self) -> &'a Probicategory {
        self.probicat
    }

    pub fn convolution(&self) -> &Convolution<'a> {
        &self.conv
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    fn n(&self) -> usize {
        self.probicat.object_count()
    }

    /// Scope objects of `B_xy`.
    pub fn cells(&self, x: usize, y: usize) -> &[Presheaf] {
        &self.cells[x * self.n() + y]
    }

    /// Scope objects of `C_xy`.
    pub fn local(&self, x: usize, y: usize) -> &[Presheaf] {
        &self.local[x * self.n() + y]
    }

    pub fn gens(&self, x: usize, y: usize) -> &[Presheaf] {
        &self.gens[x * self.n() + y]
    }

    pub fn cogens(&self, x: usize, y: usize) -> &[Presheaf] {
        &self.cogens[x * self.n() + y]
    }

    pub fn contains(&self, x: usize, y: usize, f: &Presheaf) -> bool {
        self.reflector.contains(self.probicat.hom(x, y), (x, y), f)
    }

    /// `η_F: F → ψF`.
    pub fn psi(&self, x: usize, y: usize, f: &Presheaf) -> Result<Reflection> {
        let key = (x * self.n() + y, f.clone());
        if let Some(r) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(r.clone());
        }
        let r = self.reflector.reflect(self.probicat.hom(x, y), (x, y), f)?;
        self.cache.lock().expect("cache lock").insert(key, r.clone());
        Ok(r)
    }

    /// Reflection sanity on the scope: `ψB` is local, `η` is invertible on
    /// local objects, and `hom(ψB, C) → hom(B, C)` is a bijection.
    pub fn validate(&self) -> Result<Report> {
        let n = self.n();
        let mut lands = Check::new("reflection_is_local");
        let mut unit_iso = Check::new("unit_invertible_on_local");
        let mut universal = Check::new("universal_property");
        for x in 0..n {
            for y in 0..n {
                let cat = self.probicat.hom(x, y);
                for (bi, b) in self.cells(x, y).iter().enumerate() {
                    let r = self.psi(x, y, b)?;
                    if self.contains(x, y, &r.object) && r.unit.is_natural(cat, b, &r.object) {
                        lands.pass(|| json!({ "hom": [x, y], "b": bi }));
                    } else {
                        lands.fail(|| json!({ "hom": [x, y], "b": b, "psi": r.object }));
                    }
                    if self.contains(x, y, b) {
                        if r.unit.is_iso(b, &r.object) {
                            unit_iso.pass(|| json!({ "hom": [x, y], "c": bi, "witness": r.unit }));
                        } else {
                            unit_iso.fail(|| json!({ "hom": [x, y], "c": b, "psi": r.object }));
                        }
                    }
                    for (ci, c) in self.local(x, y).iter().enumerate() {
                        if precomposition_bijective(cat, &r, b, c)? {
                            universal.pass(|| json!({ "hom": [x, y], "b": bi, "c": ci }));
                        } else {
                            universal.fail(|| json!({ "hom": [x, y], "b": b, "c": c }));
                        }
                    }
                }
            }
        }
        let mut report = Report::new();
        report.push(lands);
        report.push(unit_iso);
        report.push(universal);
        Ok(report)
    }

    /// The structure on `C` (valid once some condition pair has been verified).
    pub fn transfer(&self) -> TransferredStructure<'_, 'a> {
        TransferredStructure { setup: self }
    }

    /// Validation of the transferred structure followed by the strong-map
    /// comparisons.
    pub fn transfer_and_verify(&self) -> Result<Report> {
        let t = self.transfer();
        let mut report = biclosed_validate(&t, &self.scope)?;
        report.extend(verify_strong(self, &t)?);
        Ok(report)
    }
}

/// Whether `hom(ψB, C) → hom(B, C)`, `h ↦ h ∘ η`, is a bijection.
fn precomposition_bijective(cat: &Category, r: &Reflection, b: &Presheaf, c: &Presheaf) -> Result<bool> {
    match (b, &r.object, c, &r.unit) {
        (Presheaf::Set(bs), Presheaf::Set(ps), Presheaf::Set(cs), NatMap::Components(eta)) => {
            let from_psi = nat_transformations(cat, ps, cs)?;
            let from_b = nat_transformations(cat, bs, cs)?;
            let mut images: Vec<Vec<Vec<usize>>> = from_psi
                .iter()
                .map(|h| eta.iter().zip(h).map(|(e, hx)| e.iter().map(|&i| hx[i]).collect()).collect())
                .collect();
            images.sort();
            images.dedup();
            Ok(images.len() == from_psi.len() && images == from_b)
        }
        _ => Ok(presheaf_hom_value(cat, &r.object, c)? == presheaf_hom_value(cat, b, c)?),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorMode {
    Generating,
    Cogenerating,
}

/// Whether the class jointly reflects isomorphisms, hom by hom: for every
/// morphism `f` between scope objects, if every `hom(A, f)` (or `hom(f, D)`)
/// is invertible then so is `f`.
pub fn check_generators(s: &ReflectionSetup<'_>, mode: GeneratorMode) -> Result<Check> {
    let name = match mode {
        GeneratorMode::Generating => "generating",
        GeneratorMode::Cogenerating => "cogenerating",
    };
    let mut check = Check::new(name);
    let n = s.n();
    for x in 0..n {
        for y in 0..n {
            let cat = s.probicat.hom(x, y);
            let (objects, class) = match mode {
                GeneratorMode::Generating => (s.cells(x, y), s.gens(x, y)),
                GeneratorMode::Cogenerating => (s.local(x, y), s.cogens(x, y)),
            };
            for (fi, f) in objects.iter().enumerate() {
                for (gi, g) in objects.iter().enumerate() {
                    for map in morphisms(cat, f, g)? {
                        if map.is_iso(f, g) {
                            continue;
                        }
                        let mut seen = true;
                        for a in class {
                            let inv = match mode {
                                GeneratorMode::Generating => postcomposition_invertible(cat, a, f, g, &map)?,
                                GeneratorMode::Cogenerating => precomposition_invertible(cat, a, f, g, &map)?,
                            };
                            if !inv {
                                seen = false;
                                break;
                            }
                        }
                        if seen {
                            check.fail(|| json!({ "hom": [x, y], "source": f, "target": g, "morphism": map }));
                        } else {
                            check.pass(|| json!({ "hom": [x, y], "source": fi, "target": gi }));
                        }
                    }
                }
            }
        }
    }
    Ok(check)
}

fn morphisms(cat: &Category, f: &Presheaf, g: &Presheaf) -> Result<Vec<NatMap>> {
    match (f, g) {
        (Presheaf::Set(a), Presheaf::Set(b)) => {
            Ok(nat_transformations(cat, a, b)?.into_iter().map(NatMap::Components).collect())
        }
        _ => Ok(if NatMap::Leq.is_natural(cat, f, g) { vec![NatMap::Leq] } else { Vec::new() }),
    }
}

/// `hom(A, f): hom(A, F) → hom(A, G)` invertible.
fn postcomposition_invertible(cat: &Category, a: &Presheaf, f: &Presheaf, g: &Presheaf, map: &NatMap) -> Result<bool> {
    match (a, f, g, map) {
        (Presheaf::Set(aa), Presheaf::Set(fs), Presheaf::Set(gs), NatMap::Components(m)) => {
            let into_f = nat_transformations(cat, aa, fs)?;
            let into_g = nat_transformations(cat, aa, gs)?;
            let mut images: Vec<Vec<Vec<usize>>> = into_f
                .iter()
                .map(|h| h.iter().zip(m).map(|(hx, mx)| hx.iter().map(|&i| mx[i]).collect()).collect())
                .collect();
            images.sort();
            images.dedup();
            Ok(images.len() == into_f.len() && images == into_g)
        }
        _ => Ok(presheaf_hom_value(cat, a, f)? == presheaf_hom_value(cat, a, g)?),
    }
}

/// `hom(f, D): hom(G, D) → hom(F, D)` invertible.
fn precomposition_invertible(cat: &Category, d: &Presheaf, f: &Presheaf, g: &Presheaf, map: &NatMap) -> Result<bool> {
    match (d, f, g, map) {
        (Presheaf::Set(ds), Presheaf::Set(fs), Presheaf::Set(gs), NatMap::Components(m)) => {
            let from_g = nat_transformations(cat, gs, ds)?;
            let from_f = nat_transformations(cat, fs, ds)?;
            let mut images: Vec<Vec<Vec<usize>>> = from_g
                .iter()
                .map(|h| m.iter().zip(h).map(|(mx, hx)| mx.iter().map(|&i| hx[i]).collect()).collect())
                .collect();
            images.sort();
            images.dedup();
            Ok(images.len() == from_g.len() && images == from_f)
        }
        _ => Ok(presheaf_hom_value(cat, g, d)? == presheaf_hom_value(cat, f, d)?),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionSide {
    A,
    B,
    Both,
}

fn triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n * n * n).map(move |i| (i / (n * n), (i / n) % n, i % n))
}

fn record_iso(check: &mut Check, iso: bool, map: &NatMap, instance: impl Fn() -> serde_json::Value) {
    if iso {
        check.pass(|| json!({ "instance": instance(), "witness": map }));
    } else {
        check.fail(instance);
    }
}

/// Which composite factor gets the unit applied.
#[derive(Clone, Copy)]
enum Whisker {
    Left,
    Right,
    Both,
}

impl ReflectionSetup<'_> {
    /// `η: R → ψR` invertible, with `R = C/B` (right) or `B\C` (left).
    fn unit_on_residual(
        &self,
        check: &mut Check,
        right: bool,
        objects: &[Presheaf],
        others: &[Presheaf],
        x: usize,
        y: usize,
        z: usize,
    ) -> Result<()> {
        for (ci, c) in objects.iter().enumerate() {
            for (bi, b) in others.iter().enumerate() {
                let (r, hom) = if right {
                    (self.conv.right_residual(x, y, z, c, b)?, (y, z))
                } else {
                    (self.conv.left_residual(x, y, z, b, c)?, (x, y))
                };
                let reflected = self.psi(hom.0, hom.1, &r)?;
                let iso = reflected.unit.is_iso(&r, &reflected.object);
                record_iso(check, iso, &reflected.unit, || {
                    if iso {
                        json!({ "objects": [x, y, z], "c": ci, "b": bi })
                    } else {
                        json!({ "objects": [x, y, z], "C": c, "B": b, "residual": r, "reflected": reflected.object })
                    }
                });
            }
        }
        Ok(())
    }

    /// `η\1: ψB\C → B\C` (left) or `1/η: C/ψB → C/B` (right).
    fn residual_of_unit(&self, check: &mut Check, right: bool, x: usize, y: usize, z: usize) -> Result<()> {
        let p = self.probicat;
        let (bs, k_cat, bhom) =
            if right { (self.cells(x, y), p.hom(x, y), (x, y)) } else { (self.cells(y, z), p.hom(y, z), (y, z)) };
        for (ci, c) in self.local(x, z).iter().enumerate() {
            for (bi, b) in bs.iter().enumerate() {
                let eta = self.psi(bhom.0, bhom.1, b)?;
                let (src, tgt) = if right {
                    (
                        self.conv.right_residual_limit(x, y, z, c, &eta.object)?,
                        self.conv.right_residual_limit(x, y, z, c, b)?,
                    )
                } else {
                    (
                        self.conv.left_residual_limit(x, y, z, &eta.object, c)?,
                        self.conv.left_residual_limit(x, y, z, b, c)?,
                    )
                };
                let map = limit_weight_map(k_cat, &src, &tgt, &eta.unit);
                let iso = map.is_iso(&src.object, &tgt.object);
                record_iso(check, iso, &map, || {
                    if iso {
                        json!({ "objects": [x, y, z], "c": ci, "b": bi })
                    } else {
                        json!({ "objects": [x, y, z], "C": c, "B": b, "source": src.object, "target": tgt.object })
                    }
                });
            }
        }
        Ok(())
    }

    /// `ψ(η∘1)`, `ψ(1∘η)` or `ψ(η∘η)` on `F ∘ G` (F over `A_yz`, G over `A_xy`).
    fn reflected_whisker(
        &self,
        x: usize,
        y: usize,
        z: usize,
        f: &Presheaf,
        g: &Presheaf,
        which: Whisker,
    ) -> Result<(Presheaf, Presheaf, NatMap)> {
        let p = self.probicat;
        let (ef, eg) = (self.psi(y, z, f)?, self.psi(x, y, g)?);
        let (f2, af) = match which {
            Whisker::Left | Whisker::Both => (&ef.object, ef.unit.clone()),
            Whisker::Right => (f, NatMap::identity(f)),
        };
        let (g2, ag) = match which {
            Whisker::Right | Whisker::Both => (&eg.object, eg.unit.clone()),
            Whisker::Left => (g, NatMap::identity(g)),
        };
        let src = self.conv.compose_colimit(x, y, z, f, g)?;
        let tgt = self.conv.compose_colimit(x, y, z, f2, g2)?;
        let alpha = external_product_map(&af, &ag, g2);
        let map = colimit_weight_map(p.k(x, y, z), &src, &tgt, &alpha);
        let (rs, rt) = (self.psi(x, z, &src.object)?, self.psi(x, z, &tgt.object)?);
        let reflected = reflect_map(p.hom(x, z), &src.object, &rs, &rt, &map)?;
        Ok((rs.object, rt.object, reflected))
    }

    fn whisker_condition(
        &self,
        check: &mut Check,
        fs: &[Presheaf],
        gs: &[Presheaf],
        x: usize,
        y: usize,
        z: usize,
        which: Whisker,
    ) -> Result<()> {
        for (fi, f) in fs.iter().enumerate() {
            for (gi, g) in gs.iter().enumerate() {
                let (src, tgt, map) = self.reflected_whisker(x, y, z, f, g, which)?;
                let iso = map.is_iso(&src, &tgt);
                record_iso(check, iso, &map, || {
                    if iso {
                        json!({ "objects": [x, y, z], "left": fi, "right": gi })
                    } else {
                        json!({ "objects": [x, y, z], "left": f, "right": g, "source": src, "target": tgt })
                    }
                });
            }
        }
        Ok(())
    }

    /// One half of condition `k` (`second` selects part b); condition 6 has
    /// a single part.
    fn condition_part(&self, k: usize, second: bool) -> Result<Check> {
        let name =
            if k == 6 { "condition_6".to_string() } else { format!("condition_{k}{}", if second { "b" } else { "a" }) };
        let mut check = Check::new(name);
        if matches!(k, 2 | 5) && self.gens.iter().all(Vec::is_empty) {
            check.error("the generating class is empty");
            return Ok(check);
        }
        if k == 2 && self.cogens.iter().all(Vec::is_empty) {
            check.error("the cogenerating class is empty");
            return Ok(check);
        }
        for (x, y, z) in triples(self.n()) {
            match (k, second) {
                (1, false) => self.unit_on_residual(&mut check, true, self.local(x, z), self.cells(x, y), x, y, z)?,
                (1, true) => self.unit_on_residual(&mut check, false, self.local(x, z), self.cells(y, z), x, y, z)?,
                (2, false) => self.unit_on_residual(&mut check, true, self.cogens(x, z), self.gens(x, y), x, y, z)?,
                (2, true) => self.unit_on_residual(&mut check, false, self.cogens(x, z), self.gens(y, z), x, y, z)?,
                (3, false) => self.residual_of_unit(&mut check, false, x, y, z)?,
                (3, true) => self.residual_of_unit(&mut check, true, x, y, z)?,
                (4, false) => {
                    self.whisker_condition(&mut check, self.cells(y, z), self.cells(x, y), x, y, z, Whisker::Left)?
                }
                (4, true) => {
                    self.whisker_condition(&mut check, self.cells(y, z), self.cells(x, y), x, y, z, Whisker::Right)?
                }
                (5, false) => {
                    self.whisker_condition(&mut check, self.cells(y, z), self.gens(x, y), x, y, z, Whisker::Left)?
                }
                (5, true) => {
                    self.whisker_condition(&mut check, self.gens(y, z), self.cells(x, y), x, y, z, Whisker::Right)?
                }
                (6, _) => {
                    self.whisker_condition(&mut check, self.cells(y, z), self.cells(x, y), x, y, z, Whisker::Both)?
                }
                _ => return Err(Error::Parameter(format!("condition {k} is not one of 1 to 6"))),
            }
        }
        Ok(check)
    }
}

/// Checks condition `k` (1 to 6) over the scope, one check per requested part.
pub fn reflection_condition(s: &ReflectionSetup<'_>, k: usize, side: ConditionSide) -> Result<Report> {
    let mut report = Report::new();
    if k == 6 {
        report.push(s.condition_part(6, false)?);
        return Ok(report);
    }
    if matches!(side, ConditionSide::A | ConditionSide::Both) {
        report.push(s.condition_part(k, false)?);
    }
    if matches!(side, ConditionSide::B | ConditionSide::Both) {
        report.push(s.condition_part(k, true)?);
    }
    Ok(report)
}

/// All six conditions; returns the table and the first verified condition.
pub fn run_conditions(s: &ReflectionSetup<'_>, side: ConditionSide) -> Result<(Report, Option<String>)> {
    let mut table = Report::new();
    let mut verified = None;
    for k in 1..=6 {
        let part = reflection_condition(s, k, side)?;
        if verified.is_none() && part.passed() {
            verified = Some(k.to_string());
        }
        table.extend(part);
    }
    Ok((table, verified))
}

/// The biclosed structure on `C`: `C ∘ C′ = ψ(C ∘ C′)`, `I = ψI`, residuals
/// computed in `B` and required to be local.
pub struct TransferredStructure<'s, 'a> {
    setup: &'s ReflectionSetup<'a>,
}

impl TransferredStructure<'_, '_> {
    fn local_or_error(&self, x: usize, y: usize, r: Presheaf, what: &str) -> Result<Presheaf> {
        if self.setup.contains(x, y, &r) {
            Ok(r)
        } else {
            Err(Error::NotInSubcategory(format!("{what} {}", json!(r))))
        }
    }
}

impl Biclosed for TransferredStructure<'_, '_> {
    fn probicategory(&self) -> &Probicategory {
        self.setup.probicat
    }

    fn compose(&self, x: usize, y: usize, z: usize, f: &Presheaf, g: &Presheaf) -> Result<Presheaf> {
        let c = self.setup.conv.compose(x, y, z, f, g)?;
        Ok(self.setup.psi(x, z, &c)?.object)
    }

    fn identity(&self, x: usize) -> Result<Presheaf> {
        let i = self.setup.conv.identity(x)?;
        Ok(self.setup.psi(x, x, &i)?.object)
    }

    fn right_residual(&self, x: usize, y: usize, z: usize, h: &Presheaf, g: &Presheaf) -> Result<Presheaf> {
        let r = self.setup.conv.right_residual(x, y, z, h, g)?;
        self.local_or_error(y, z, r, "right residual")
    }

    fn left_residual(&self, x: usize, y: usize, z: usize, f: &Presheaf, h: &Presheaf) -> Result<Presheaf> {
        let r = self.setup.conv.left_residual(x, y, z, f, h)?;
        self.local_or_error(x, y, r, "left residual")
    }

    fn scope_objects(&self, x: usize, y: usize, _scope: &Scope) -> Result<Vec<Presheaf>> {
        Ok(self.setup.local(x, y).to_vec())
    }
}

/// Builds the structure on `C`; requires at least one verified condition.
pub fn transfer_structure<'s, 'a>(
    s: &'s ReflectionSetup<'a>,
    conditions: &Report,
) -> Result<TransferredStructure<'s, 'a>> {
    let verified = (1..=6).any(|k| {
        let parts: Vec<_> =
            conditions.checks.iter().filter(|c| c.name.starts_with(&format!("condition_{k}"))).collect();
        parts.len() == if k == 6 { 1 } else { 2 } && parts.iter().all(|c| c.passed())
    });
    if !verified {
        return Err(Error::Reflection("no condition pair has been verified".into()));
    }
    Ok(s.transfer())
}

/// `ψB ∘_C ψB′ ≅ ψ(B ∘ B′)` and `I_C ≅ ψI` over the scope, with witnesses,
/// plus invertibility of the canonical comparison `ψ(η∘η)`.
pub fn verify_strong(s: &ReflectionSetup<'_>, t: &dyn Biclosed) -> Result<Report> {
    let p = s.probicat;
    let mut composition = Check::new("strong_composition");
    let mut canonical = Check::new("canonical_comparison");
    let mut identity = Check::new("strong_identity");
    for (x, y, z) in triples(s.n()) {
        for (fi, f) in s.cells(y, z).iter().enumerate() {
            for (gi, g) in s.cells(x, y).iter().enumerate() {
                let lhs = t.compose(x, y, z, &s.psi(y, z, f)?.object, &s.psi(x, y, g)?.object)?;
                let rhs = s.psi(x, z, &s.conv.compose(x, y, z, f, g)?)?.object;
                match find_natural_iso(p.hom(x, z), &lhs, &rhs, s.scope.cap)? {
                    Some(w) => composition.pass(|| json!({ "objects": [x, y, z], "b": fi, "b2": gi, "witness": w })),
                    None => composition
                        .fail(|| json!({ "objects": [x, y, z], "B": f, "B2": g, "composite": lhs, "reflected": rhs })),
                }
                let (src, tgt, map) = s.reflected_whisker(x, y, z, f, g, Whisker::Both)?;
                let iso = map.is_iso(&src, &tgt);
                record_iso(&mut canonical, iso, &map, || json!({ "objects": [x, y, z], "b": fi, "b2": gi }));
            }
        }
    }
    for x in 0..s.n() {
        let lhs = t.identity(x)?;
        let rhs = s.psi(x, x, &s.conv.identity(x)?)?.object;
        match find_natural_iso(p.hom(x, x), &lhs, &rhs, s.scope.cap)? {
            Some(w) => identity.pass(|| json!({ "object": x, "witness": w })),
            None => identity.fail(|| json!({ "object": x, "identity": lhs, "reflected": rhs })),
        }
    }
    let mut report = Report::new();
    report.push(composition);
    report.push(canonical);
    report.push(identity);
    Ok(report)
}
