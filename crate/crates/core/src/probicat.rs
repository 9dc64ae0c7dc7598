//! Probicategories `(A, P, J)` and the convolution biclosed bicategory on the
//! presheaf categories `[A_xy, V]`.
//!
//! Hom families are indexed `x * n + y`, structure functors `(x * n + y) * n + z`.
//! `P_xyz` is a presheaf on `op(A_yz × A_xy) × A_xz`; the first factor is
//! the same category as `op(A_yz) × op(A_xy)`, numbered identically.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use serde_json::json;

use crate::calculus::{
    coproduct, dedup_up_to_iso, enumerate_presheaves, external_product, hom_presheaf, pointwise_product,
    presheaf_hom_value, restrict, swap, weighted_colimit, weighted_limit, yoneda_embed, Colimit, Limit, Presheaf,
    SetPresheaf,
};
use crate::enrichment::Elem;
use crate::error::{Error, Result};
use crate::fincat::{find_natural_iso, Backend, Category, FinFunctor, DEFAULT_SEARCH_CAP};
use crate::report::{Check, Report};

/// Which presheaves law checks quantify over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Scope {
    /// Largest set per object (set backend); the quantale backend always
    /// ranges over the full carrier.
    pub max_elements: usize,
    /// Keep one representative per isomorphism class.
    pub up_to_iso: bool,
    /// Cap on candidate assignments for every witness search.
    pub cap: u64,
}

impl Default for Scope {
    fn default() -> Self {
        Scope { max_elements: 2, up_to_iso: false, cap: DEFAULT_SEARCH_CAP }
    }
}

impl Scope {
    pub fn with_max_elements(max_elements: usize) -> Self {
        Scope { max_elements, ..Scope::default() }
    }

    /// All presheaves on `cat` in this scope, in canonical order.
    pub fn presheaves(&self, cat: &Category) -> Result<Vec<Presheaf>> {
        let all = enumerate_presheaves(cat, self.max_elements)?;
        if self.up_to_iso && cat.is_ordinary() {
            dedup_up_to_iso(cat, all, self.cap)
        } else {
            Ok(all)
        }
    }
}

/// Associator and unitors of a monoidal finite category, as component
/// morphism ids: `associator[(a * n + b) * n + c]: (a⊗b)⊗c → a⊗(b⊗c)`,
/// `left_unitor[a]: I⊗a → a`, `right_unitor[a]: a⊗I → a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coherence {
    pub associator: Vec<usize>,
    pub left_unitor: Vec<usize>,
    pub right_unitor: Vec<usize>,
}

/// A monoidal finite category: the tensor as a functor `A × A → A`.
#[derive(Clone, Debug)]
pub struct MonoidalData {
    pub category: Category,
    pub tensor: FinFunctor,
    pub unit: usize,
    pub coherence: Option<Coherence>,
}

impl MonoidalData {
    /// Monoidal structure on a thin category from its object table
    /// `table[a][b] = a ⊗ b`, with strict coherence.
    pub fn thin(category: Category, table: &[Vec<usize>], unit: usize) -> Result<Self> {
        let n = category.object_count();
        if table.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&v| v >= n)) {
            return Err(Error::Parameter("tensor table does not match the objects".into()));
        }
        let objects = (0..n * n).map(|i| table[i / n][i % n]).collect();
        let mut morphisms = Vec::new();
        if category.is_ordinary() {
            let ms = category.morphisms();
            for f in ms {
                for g in ms {
                    let (s, t) = (table[f.src][g.src], table[f.tgt][g.tgt]);
                    let h =
                        category.hom(s, t).first().copied().ok_or_else(|| {
                            Error::Functor(format!("tensor of {} and {} has no image", f.label, g.label))
                        })?;
                    morphisms.push(h);
                }
            }
        }
        let mut data = MonoidalData { category, tensor: FinFunctor { objects, morphisms }, unit, coherence: None };
        if data.category.is_ordinary() {
            data.coherence = Some(data.strict_coherence()?);
        }
        Ok(data)
    }

    /// Coherence data for a strict monoidal structure (identity components).
    pub fn strict_coherence(&self) -> Result<Coherence> {
        let a = &self.category;
        let n = a.object_count();
        let t = |x: usize, y: usize| self.tensor.objects[x * n + y];
        let mut associator = Vec::with_capacity(n * n * n);
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if t(t(x, y), z) != t(x, t(y, z)) {
                        return Err(Error::MissingCoherence(format!(
                            "tensor is not strictly associative at ({}, {}, {})",
                            a.object_label(x),
                            a.object_label(y),
                            a.object_label(z)
                        )));
                    }
                    associator.push(a.identity(t(t(x, y), z)));
                }
            }
        }
        let mut left_unitor = Vec::with_capacity(n);
        let mut right_unitor = Vec::with_capacity(n);
        for x in 0..n {
            if t(self.unit, x) != x || t(x, self.unit) != x {
                return Err(Error::MissingCoherence(format!("unit is not strict at {}", a.object_label(x))));
            }
            left_unitor.push(a.identity(x));
            right_unitor.push(a.identity(x));
        }
        Ok(Coherence { associator, left_unitor, right_unitor })
    }
}

/// Raw structure for the table constructor.
#[derive(Clone, Debug)]
pub struct TableData {
    pub objects: Vec<String>,
    pub homs: Vec<Category>,
    pub p: Vec<Presheaf>,
    pub j: Vec<Presheaf>,
}

pub enum ProbicatKind {
    /// `A_xy = op(A_x) × A_y`, `P = A_x(C, B) ⊗ A_y(B′, A) ⊗ A_z(A′, C′)`.
    Manifold(Vec<(String, Category)>),
    /// One object, `P(a, b, c) = A(a ⊗ b, c)`, `J = A(I, −)`.
    FromMonoidal(MonoidalData),
    /// One object, discrete `A` on the monoid elements, `P(a, b, c) = I` iff `ab = c`.
    DeloopedMonoid {
        backend: Backend,
        elements: Vec<String>,
        table: Vec<Vec<usize>>,
        unit: usize,
    },
    Table(TableData),
}

#[derive(Clone, Debug)]
pub struct Probicategory {
    objects: Vec<String>,
    backend: Backend,
    homs: Vec<Category>,
    kop: Vec<Category>,
    k: Vec<Category>,
    p: Vec<Presheaf>,
    j: Vec<Presheaf>,
    terminal: Category,
}

impl Probicategory {
    fn assemble(objects: Vec<String>, backend: Backend, homs: Vec<Category>) -> Result<(Vec<Category>, Vec<Category>)> {
        let n = objects.len();
        if homs.len() != n * n {
            return Err(Error::Structure(format!("expected {} hom categories, got {}", n * n, homs.len())));
        }
        if let Some(c) = homs.iter().find(|c| c.backend() != backend) {
            return Err(Error::BackendMismatch(format!(
                "hom category over {} in a {backend} probicategory",
                c.backend()
            )));
        }
        let mut kop = Vec::with_capacity(n * n * n);
        let mut k = Vec::with_capacity(n * n * n);
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let c = homs[y * n + z].product(&homs[x * n + y])?;
                    k.push(c.op());
                    kop.push(c);
                }
            }
        }
        Ok((kop, k))
    }

    fn from_parts(
        objects: Vec<String>,
        backend: Backend,
        homs: Vec<Category>,
        p: Vec<Presheaf>,
        j: Vec<Presheaf>,
    ) -> Result<Self> {
        let (kop, k) = Self::assemble(objects.clone(), backend.clone(), homs.clone())?;
        let terminal = Category::terminal(&backend);
        let probicat = Probicategory { objects, backend, homs, kop, k, p, j, terminal };
        probicat.check_functorial()?;
        Ok(probicat)
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// `A_xy`.
    pub fn hom(&self, x: usize, y: usize) -> &Category {
        &self.homs[x * self.objects.len() + y]
    }

    /// Index of `(x, y, z)` in per-triple lists.
    pub fn xyz(&self, x: usize, y: usize, z: usize) -> usize {
        let n = self.objects.len();
        (x * n + y) * n + z
    }

    /// `A_yz × A_xy`.
    pub fn kop(&self, x: usize, y: usize, z: usize) -> &Category {
        &self.kop[self.xyz(x, y, z)]
    }

    /// `op(A_yz × A_xy)`.
    pub fn k(&self, x: usize, y: usize, z: usize) -> &Category {
        &self.k[self.xyz(x, y, z)]
    }

    /// `P_xyz` on `op(A_yz × A_xy) × A_xz`.
    pub fn p(&self, x: usize, y: usize, z: usize) -> &Presheaf {
        &self.p[self.xyz(x, y, z)]
    }

    /// `J_x` on `A_xx`.
    pub fn j(&self, x: usize) -> &Presheaf {
        &self.j[x]
    }

    pub fn terminal(&self) -> &Category {
        &self.terminal
    }

    /// Domain category of `P_xyz`.
    pub fn p_domain(&self, x: usize, y: usize, z: usize) -> Result<Category> {
        self.k(x, y, z).product(self.hom(x, z))
    }

    fn check_functorial(&self) -> Result<()> {
        let n = self.objects.len();
        if self.p.len() != n * n * n || self.j.len() != n {
            return Err(Error::Structure("structure functor family has the wrong number of entries".into()));
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let dom = self.p_domain(x, y, z)?;
                    self.p(x, y, z).check(&dom).map_err(|e| {
                        Error::Structure(format!(
                            "P[{},{},{}] is not functorial: {e}",
                            self.objects[x], self.objects[y], self.objects[z]
                        ))
                    })?;
                }
            }
            self.j[x]
                .check(self.hom(x, x))
                .map_err(|e| Error::MissingIdentity(format!("J[{}] invalid: {e}", self.objects[x])))?;
        }
        Ok(())
    }

    /// Replaces one structure functor; the result is re-validated.
    pub fn with_p(&self, x: usize, y: usize, z: usize, p: Presheaf) -> Result<Self> {
        let mut out = self.clone();
        let i = self.xyz(x, y, z);
        out.p[i] = p;
        out.check_functorial()?;
        Ok(out)
    }
}

pub fn make_probicat(kind: ProbicatKind) -> Result<Probicategory> {
    match kind {
        ProbicatKind::Manifold(family) => manifold(family),
        ProbicatKind::FromMonoidal(data) => from_monoidal(data),
        ProbicatKind::DeloopedMonoid { backend, elements, table, unit } => {
            delooped_monoid(&backend, &elements, &table, unit)
        }
        ProbicatKind::Table(t) => {
            let backend = t.homs.first().map(|c| c.backend()).unwrap_or(Backend::FinSet);
            Probicategory::from_parts(t.objects, backend, t.homs, t.p, t.j)
        }
    }
}

fn manifold(family: Vec<(String, Category)>) -> Result<Probicategory> {
    let n = family.len();
    if n == 0 {
        return Err(Error::Parameter("manifold probicategory needs at least one object".into()));
    }
    let backend = family[0].1.backend();
    let objects: Vec<String> = family.iter().map(|(name, _)| name.clone()).collect();
    let cats: Vec<&Category> = family.iter().map(|(_, c)| c).collect();
    let ops: Vec<Category> = cats.iter().map(|c| c.op()).collect();
    let mut homs = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            homs.push(ops[x].product(cats[y])?);
        }
    }
    let hom_presheaves: Vec<Presheaf> = cats.iter().map(|c| hom_presheaf(c)).collect();
    let (_, k) = Probicategory::assemble(objects.clone(), backend.clone(), homs.clone())?;
    let mut p = Vec::with_capacity(n * n * n);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                // factors of op(A_yz × A_xy) × A_xz: A, A′, B, B′, C, C′
                let factors = [cats[y], &ops[z], cats[x], &ops[y], &ops[x], cats[z]];
                let dom = k[(x * n + y) * n + z].product(&homs[x * n + z])?;
                let hx = restrict(&hom_presheaves[x], &FinFunctor::projection(&factors, &[4, 2]));
                let hy = restrict(&hom_presheaves[y], &FinFunctor::projection(&factors, &[3, 0]));
                let hz = restrict(&hom_presheaves[z], &FinFunctor::projection(&factors, &[1, 5]));
                p.push(pointwise_product(&dom, &pointwise_product(&dom, &hx, &hy)?, &hz)?);
            }
        }
    }
    let j = hom_presheaves;
    Probicategory::from_parts(objects, backend, homs, p, j)
}

fn from_monoidal(data: MonoidalData) -> Result<Probicategory> {
    let a = &data.category;
    let n = a.object_count();
    if data.unit >= n {
        return Err(Error::Parameter("monoidal unit out of range".into()));
    }
    let aa = a.product(a)?;
    data.tensor.check(&aa, a).map_err(|e| Error::Functor(format!("tensor: {e}")))?;
    if a.is_ordinary() {
        let coherence = data
            .coherence
            .as_ref()
            .ok_or_else(|| Error::MissingCoherence("set-backend monoidal input needs associator and unitors".into()))?;
        check_coherence(&data, coherence)?;
    }
    // P = A(−, −) restricted along op(⊗) × 1
    let m = a.morphism_count();
    let mut along = FinFunctor { objects: Vec::with_capacity(n * n * n), morphisms: Vec::new() };
    for ab in 0..n * n {
        for c in 0..n {
            along.objects.push(data.tensor.objects[ab] * n + c);
        }
    }
    if a.is_ordinary() {
        for fg in 0..m * m {
            for h in 0..m {
                along.morphisms.push(data.tensor.morphisms[fg] * m + h);
            }
        }
    }
    let hom = hom_presheaf(a);
    let p = restrict(&hom, &along);
    let j = yoneda_embed(a).swap_remove(data.unit);
    let backend = a.backend();
    Probicategory::from_parts(vec!["x".into()], backend, vec![a.clone()], vec![p], vec![j])
}

fn check_coherence(data: &MonoidalData, c: &Coherence) -> Result<()> {
    let a = &data.category;
    let n = a.object_count();
    let m = a.morphism_count();
    let t = |x: usize, y: usize| data.tensor.objects[x * n + y];
    let tm = |f: usize, g: usize| data.tensor.morphisms[f * m + g];
    let is_iso = |f: usize| {
        let mf = &a.morphisms()[f];
        a.hom(mf.tgt, mf.src)
            .iter()
            .any(|&g| a.compose(g, f) == Some(a.identity(mf.src)) && a.compose(f, g) == Some(a.identity(mf.tgt)))
    };
    let typed =
        |f: usize, s: usize, d: usize| f < m && a.morphisms()[f].src == s && a.morphisms()[f].tgt == d && is_iso(f);
    if c.associator.len() != n * n * n || c.left_unitor.len() != n || c.right_unitor.len() != n {
        return Err(Error::MissingCoherence("coherence tables have the wrong size".into()));
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if !typed(c.associator[(x * n + y) * n + z], t(t(x, y), z), t(x, t(y, z))) {
                    return Err(Error::MissingCoherence(format!(
                        "associator component at ({x}, {y}, {z}) is not an iso of the right type"
                    )));
                }
            }
        }
        if !typed(c.left_unitor[x], t(data.unit, x), x) || !typed(c.right_unitor[x], t(x, data.unit), x) {
            return Err(Error::MissingCoherence(format!("unitor component at {x} is not an iso of the right type")));
        }
    }
    let ms = a.morphisms();
    for f in 0..m {
        for g in 0..m {
            for h in 0..m {
                let (fs, gs, hs) = (ms[f].src, ms[g].src, ms[h].src);
                let (ft, gt, ht) = (ms[f].tgt, ms[g].tgt, ms[h].tgt);
                let before = c.associator[(fs * n + gs) * n + hs];
                let after = c.associator[(ft * n + gt) * n + ht];
                let lhs = a.compose(after, tm(tm(f, g), h));
                let rhs = a.compose(tm(f, tm(g, h)), before);
                if lhs != rhs {
                    return Err(Error::MissingCoherence(format!(
                        "associator is not natural at ({}, {}, {})",
                        ms[f].label, ms[g].label, ms[h].label
                    )));
                }
            }
        }
        let (s, d) = (ms[f].src, ms[f].tgt);
        let id_i = a.identity(data.unit);
        if a.compose(f, c.left_unitor[s]) != a.compose(c.left_unitor[d], tm(id_i, f))
            || a.compose(f, c.right_unitor[s]) != a.compose(c.right_unitor[d], tm(f, id_i))
        {
            return Err(Error::MissingCoherence(format!("unitors are not natural at {}", ms[f].label)));
        }
    }
    Ok(())
}

fn delooped_monoid(backend: &Backend, elements: &[String], table: &[Vec<usize>], unit: usize) -> Result<Probicategory> {
    let k = elements.len();
    if unit >= k || table.len() != k || table.iter().any(|r| r.len() != k || r.iter().any(|&v| v >= k)) {
        return Err(Error::Parameter("monoid table malformed".into()));
    }
    for a in 0..k {
        if table[unit][a] != a || table[a][unit] != a {
            return Err(Error::Parameter(format!("{} is not a two-sided unit", elements[unit])));
        }
        for b in 0..k {
            for c in 0..k {
                if table[table[a][b]][c] != table[a][table[b][c]] {
                    return Err(Error::Parameter("monoid multiplication is not associative".into()));
                }
            }
        }
    }
    let a = Category::discrete(backend, elements);
    let indicator = |hit: &dyn Fn(usize) -> bool, len: usize| -> Presheaf {
        match backend {
            Backend::Quantale(q) => {
                Presheaf::Quantale((0..len).map(|i| if hit(i) { q.unit() } else { q.bottom() }).collect())
            }
            Backend::FinSet => {
                let sizes: Vec<usize> = (0..len).map(|i| usize::from(hit(i))).collect();
                let actions = sizes.iter().map(|&s| (0..s).collect()).collect();
                Presheaf::Set(SetPresheaf::from_parts(sizes, actions))
            }
        }
    };
    // P((a, b), c) at index (a * k + b) * k + c
    let p = indicator(&|i| table[i / (k * k)][(i / k) % k] == i % k, k * k * k);
    let j = indicator(&|i| i == unit, k);
    Probicategory::from_parts(vec!["x".into()], backend.clone(), vec![a], vec![p], vec![j])
}

/// A biclosed bicategory whose 1-cells `x → y` are (some) presheaves on
/// `A_xy`, with hom objects computed in `[A_xy, V]`. In `compose(x, y, z, F,
/// G)`, `F` lives over `A_yz` and `G` over `A_xy`.
pub trait Biclosed {
    fn probicategory(&self) -> &Probicategory;
    fn compose(&self, x: usize, y: usize, z: usize, f: &Presheaf, g: &Presheaf) -> Result<Presheaf>;
    fn identity(&self, x: usize) -> Result<Presheaf>;
    /// `H / G` over `A_yz`, for `H` over `A_xz` and `G` over `A_xy`.
    fn right_residual(&self, x: usize, y: usize, z: usize, h: &Presheaf, g: &Presheaf) -> Result<Presheaf>;
    /// `F \ H` over `A_xy`, for `F` over `A_yz` and `H` over `A_xz`.
    fn left_residual(&self, x: usize, y: usize, z: usize, f: &Presheaf, h: &Presheaf) -> Result<Presheaf>;
    /// The 1-cells `x → y` quantified over by law checks.
    fn scope_objects(&self, x: usize, y: usize, scope: &Scope) -> Result<Vec<Presheaf>>;
}

/// Residual side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `F \ H`.
    Left,
    /// `H / G`.
    Right,
}

/// The convolution structure on `[A, V]`.
pub struct Convolution<'a> {
    probicat: &'a Probicategory,
    inner: Mutex<HashMap<(usize, Presheaf), Arc<Limit>>>,
}

impl<'a> Convolution<'a> {
    pub fn new(probicat: &'a Probicategory) -> Self {
        Convolution { probicat, inner: Mutex::new(HashMap::new()) }
    }

    /// `F ∘ G` as a colimit weighted by `F ⊠ G`, with injections.
    pub fn compose_colimit(&self, x: usize, y: usize, z: usize, f: &Presheaf, g: &Presheaf) -> Result<Colimit> {
        let p = self.probicat;
        let weight = external_product(p.hom(y, z), p.hom(x, y), f, g)?;
        weighted_colimit(p.k(x, y, z), p.terminal(), p.hom(x, z), &weight, p.p(x, y, z))
    }

    /// `R(a, a′) = ∫_c [P(a, a′, c), H(c)]` on `A_yz × A_xy`.
    fn inner_limit(&self, x: usize, y: usize, z: usize, h: &Presheaf) -> Result<Arc<Limit>> {
        let p = self.probicat;
        let key = (p.xyz(x, y, z), h.clone());
        if let Some(r) = self.inner.lock().expect("cache lock").get(&key) {
            return Ok(r.clone());
        }
        let r = Arc::new(weighted_limit(p.hom(x, z), p.kop(x, y, z), p.terminal(), p.p(x, y, z), h)?);
        self.inner.lock().expect("cache lock").insert(key, r.clone());
        Ok(r)
    }

    /// `H / G` as a limit weighted by `G`, with explicit elements.
    pub fn right_residual_limit(&self, x: usize, y: usize, z: usize, h: &Presheaf, g: &Presheaf) -> Result<Limit> {
        let p = self.probicat;
        let r = self.inner_limit(x, y, z, h)?;
        let d = swap(p.hom(y, z), p.hom(x, y), &r.object);
        weighted_limit(p.hom(x, y), p.terminal(), p.hom(y, z), g, &d)
    }

    /// `F \ H` as a limit weighted by `F`, with explicit elements.
    pub fn left_residual_limit(&self, x: usize, y: usize, z: usize, f: &Presheaf, h: &Presheaf) -> Result<Limit> {
        let p = self.probicat;
        let r = self.inner_limit(x, y, z, h)?;
        weighted_limit(p.hom(y, z), p.terminal(), p.hom(x, y), f, &r.object)
    }
}

impl Biclosed for Convolution<'_> {
    fn probicategory(&self) -> &Probicategory {
        self.probicat
    }

    fn compose(&self, x: usize, y: usize, z: usize, f: &Presheaf, g: &Presheaf) -> Result<Presheaf> {
        Ok(self.compose_colimit(x, y, z, f, g)?.object)
    }

    fn identity(&self, x: usize) -> Result<Presheaf> {
        conv_identity(self.probicat, x)
    }

    fn right_residual(&self, x: usize, y: usize, z: usize, h: &Presheaf, g: &Presheaf) -> Result<Presheaf> {
        Ok(self.right_residual_limit(x, y, z, h, g)?.object)
    }

    fn left_residual(&self, x: usize, y: usize, z: usize, f: &Presheaf, h: &Presheaf) -> Result<Presheaf> {
        Ok(self.left_residual_limit(x, y, z, f, h)?.object)
    }

    fn scope_objects(&self, x: usize, y: usize, scope: &Scope) -> Result<Vec<Presheaf>> {
        scope.presheaves(self.probicat.hom(x, y))
    }
}

fn check_index(p: &Probicategory, idx: &[usize]) -> Result<()> {
    match idx.iter().find(|&&i| i >= p.object_count()) {
        Some(i) => Err(Error::IndexMismatch(format!("object index {i} out of range"))),
        None => Ok(()),
    }
}

fn check_on(cat: &Category, f: &Presheaf, role: &str) -> Result<()> {
    f.check(cat)
        .map_err(|e| Error::IndexMismatch(format!("{role} is not a presheaf on the expected hom category: {e}")))
}

/// `F ∘ G = ∫^{A A′} P(A, A′, −) ⊗ F A ⊗ G A′` for `F` over `A_yz`, `G` over `A_xy`.
pub fn conv_compose(p: &Probicategory, x: usize, y: usize, z: usize, f: &Presheaf, g: &Presheaf) -> Result<Presheaf> {
    check_index(p, &[x, y, z])?;
    check_on(p.hom(y, z), f, "left factor")?;
    check_on(p.hom(x, y), g, "right factor")?;
    let out = Convolution::new(p).compose(x, y, z, f, g)?;
    out.check(p.hom(x, z))?;
    Ok(out)
}

/// `I = J * I`: the `J`-weighted copower of the ground unit.
pub fn conv_identity(p: &Probicategory, x: usize) -> Result<Presheaf> {
    check_index(p, &[x])?;
    let one = p.terminal();
    let unit = match p.backend() {
        Backend::Quantale(q) => Presheaf::Quantale(vec![q.unit()]),
        Backend::FinSet => Presheaf::Set(SetPresheaf::from_parts(vec![1], vec![vec![0]])),
    };
    Ok(weighted_colimit(one, p.hom(x, x), one, p.j(x), &unit)?.object)
}

/// `H / G` (right) or `F \ H` (left); `bottom` is `G` or `F` respectively.
pub fn conv_residual(
    p: &Probicategory,
    side: Side,
    x: usize,
    y: usize,
    z: usize,
    top: &Presheaf,
    bottom: &Presheaf,
) -> Result<Presheaf> {
    check_index(p, &[x, y, z])?;
    check_on(p.hom(x, z), top, "residual numerator")?;
    let conv = Convolution::new(p);
    match side {
        Side::Right => {
            check_on(p.hom(x, y), bottom, "residual denominator")?;
            conv.right_residual(x, y, z, top, bottom)
        }
        Side::Left => {
            check_on(p.hom(y, z), bottom, "residual denominator")?;
            conv.left_residual(x, y, z, bottom, top)
        }
    }
}

fn indices(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out.into_iter().flat_map(|v| (0..n).map(move |i| [v.clone(), vec![i]].concat())).collect();
    }
    out
}

fn iso_check(
    check: &mut Check,
    cat: &Category,
    lhs: &Presheaf,
    rhs: &Presheaf,
    cap: u64,
    describe: impl Fn() -> serde_json::Value,
) -> Result<()> {
    match find_natural_iso(cat, lhs, rhs, cap)? {
        Some(w) => check.pass(|| json!({ "instance": describe(), "witness": w })),
        None => check.fail(|| json!({ "instance": describe(), "lhs": lhs, "rhs": rhs })),
    }
    Ok(())
}

/// Exhaustive law check of a biclosed structure over the scope: the
/// adjunction `hom(F∘G, H) = hom(F, H/G) = hom(G, F\H)`, both unit laws and
/// associativity, each iso backed by a witness.
pub fn biclosed_validate(s: &dyn Biclosed, scope: &Scope) -> Result<Report> {
    let cells = scope_cells(s, scope)?;
    let mut report = Report::new();
    report.push(adjunction(s, &cells)?);
    report.extend(laws_on(s, scope, &cells)?);
    Ok(report)
}

/// Both unit laws and associativity alone, each iso backed by a witness.
pub fn monoid_laws(s: &dyn Biclosed, scope: &Scope) -> Result<Report> {
    laws_on(s, scope, &scope_cells(s, scope)?)
}

type Cells = HashMap<(usize, usize), Vec<Presheaf>>;

fn scope_cells(s: &dyn Biclosed, scope: &Scope) -> Result<Cells> {
    let n = s.probicategory().object_count();
    let mut cells = HashMap::new();
    for x in 0..n {
        for y in 0..n {
            cells.insert((x, y), s.scope_objects(x, y, scope)?);
        }
    }
    Ok(cells)
}

fn adjunction(s: &dyn Biclosed, cells: &Cells) -> Result<Check> {
    let p = s.probicategory();
    let n = p.object_count();

    let mut adjunction = Check::new("adjunction");
    for ix in indices(n, 3) {
        let (x, y, z) = (ix[0], ix[1], ix[2]);
        let (fs, gs, hs) = (&cells[&(y, z)], &cells[&(x, y)], &cells[&(x, z)]);
        for (fi, f) in fs.iter().enumerate() {
            for (gi, g) in gs.iter().enumerate() {
                let fg = s.compose(x, y, z, f, g)?;
                for (hi, h) in hs.iter().enumerate() {
                    let v1 = presheaf_hom_value(p.hom(x, z), &fg, h)?;
                    let v2 = presheaf_hom_value(p.hom(y, z), f, &s.right_residual(x, y, z, h, g)?)?;
                    let v3 = presheaf_hom_value(p.hom(x, y), g, &s.left_residual(x, y, z, f, h)?)?;
                    let instance = || json!({ "objects": [x, y, z], "f": fi, "g": gi, "h": hi });
                    if v1 == v2 && v2 == v3 {
                        adjunction.pass(|| json!({ "instance": instance(), "hom": v1 }));
                    } else {
                        adjunction.fail(|| {
                            json!({ "instance": instance(), "F": f, "G": g, "H": h,
                                    "hom(F∘G,H)": v1, "hom(F,H/G)": v2, "hom(G,F\\H)": v3 })
                        });
                    }
                }
            }
        }
    }
    Ok(adjunction)
}

fn laws_on(s: &dyn Biclosed, scope: &Scope, cells: &Cells) -> Result<Report> {
    let p = s.probicategory();
    let n = p.object_count();
    let mut report = Report::new();
    let mut left_unit = Check::new("left_unit");
    let mut right_unit = Check::new("right_unit");
    let identities: Vec<Presheaf> = (0..n).map(|x| s.identity(x)).collect::<Result<_>>()?;
    for x in 0..n {
        for y in 0..n {
            for (fi, f) in cells[&(x, y)].iter().enumerate() {
                let l = s.compose(x, y, y, &identities[y], f)?;
                iso_check(&mut left_unit, p.hom(x, y), &l, f, scope.cap, || json!({ "objects": [x, y], "f": fi }))?;
                let r = s.compose(x, x, y, f, &identities[x])?;
                iso_check(&mut right_unit, p.hom(x, y), &r, f, scope.cap, || json!({ "objects": [x, y], "f": fi }))?;
            }
        }
    }
    report.push(left_unit);
    report.push(right_unit);

    let mut assoc = Check::new("associativity");
    let mut pair_cache: HashMap<(usize, usize, usize, usize, usize), Presheaf> = HashMap::new();
    for ix in indices(n, 4) {
        let (w, x, y, z) = (ix[0], ix[1], ix[2], ix[3]);
        let (fs, gs, hs) = (&cells[&(y, z)], &cells[&(x, y)], &cells[&(w, x)]);
        for (fi, f) in fs.iter().enumerate() {
            for (gi, g) in gs.iter().enumerate() {
                let fg = match pair_cache.get(&(x, y, z, fi, gi)) {
                    Some(v) => v.clone(),
                    None => {
                        let v = s.compose(x, y, z, f, g)?;
                        pair_cache.insert((x, y, z, fi, gi), v.clone());
                        v
                    }
                };
                for (hi, h) in hs.iter().enumerate() {
                    let gh = match pair_cache.get(&(w, x, y, gi, hi)) {
                        Some(v) => v.clone(),
                        None => {
                            let v = s.compose(w, x, y, g, h)?;
                            pair_cache.insert((w, x, y, gi, hi), v.clone());
                            v
                        }
                    };
                    let left = s.compose(w, x, z, &fg, h)?;
                    let right = s.compose(w, y, z, f, &gh)?;
                    iso_check(
                        &mut assoc,
                        p.hom(w, z),
                        &left,
                        &right,
                        scope.cap,
                        || json!({ "objects": [w, x, y, z], "f": fi, "g": gi, "h": hi }),
                    )?;
                }
            }
        }
    }
    report.push(assoc);
    Ok(report)
}

/// Functoriality of `P` and `J` (checked on construction), then the
/// convolution laws over the scope.
pub fn check_probicat(p: &Probicategory, scope: &Scope) -> Result<Report> {
    let mut report = Report::new();
    let mut functorial = Check::new("functoriality");
    match p.check_functorial() {
        Ok(()) => functorial.pass(|| json!({ "structure_functors": p.p.len(), "identities": p.j.len() })),
        Err(e) => functorial.fail(|| json!({ "error": e.to_string() })),
    }
    let ok = functorial.passed();
    report.push(functorial);
    if ok {
        report.extend(biclosed_validate(&Convolution::new(p), scope)?);
    }
    Ok(report)
}

/// Checks that `F ∘ −` and `− ∘ G` send binary coproducts to coproducts.
pub fn check_cocontinuity(
    p: &Probicategory,
    x: usize,
    y: usize,
    z: usize,
    fs: &[Presheaf],
    gs: &[Presheaf],
    cap: u64,
) -> Result<Check> {
    let conv = Convolution::new(p);
    let mut check = Check::new("cocontinuity");
    for (i, f1) in fs.iter().enumerate() {
        for (j, f2) in fs.iter().enumerate() {
            for (k, g) in gs.iter().enumerate() {
                let sum = coproduct(p.hom(y, z), f1, f2)?;
                let lhs = conv.compose(x, y, z, &sum, g)?;
                let rhs = coproduct(p.hom(x, z), &conv.compose(x, y, z, f1, g)?, &conv.compose(x, y, z, f2, g)?)?;
                iso_check(&mut check, p.hom(x, z), &lhs, &rhs, cap, || json!({ "left": [i, j], "right": k }))?;
                let sum = coproduct(p.hom(x, y), &gs[k], &gs[(k + 1) % gs.len()])?;
                let lhs = conv.compose(x, y, z, f1, &sum)?;
                let rhs = coproduct(
                    p.hom(x, z),
                    &conv.compose(x, y, z, f1, &gs[k])?,
                    &conv.compose(x, y, z, f1, &gs[(k + 1) % gs.len()])?,
                )?;
                iso_check(
                    &mut check,
                    p.hom(x, z),
                    &lhs,
                    &rhs,
                    cap,
                    || json!({ "left": i, "right": [k, (k + 1) % gs.len()] }),
                )?;
            }
        }
    }
    Ok(check)
}

/// Index of `((a, b), c)` in the object numbering of `P_xyz`'s domain.
pub fn p_index(p: &Probicategory, x: usize, y: usize, z: usize, a: usize, b: usize, c: usize) -> usize {
    let nb = p.hom(x, y).object_count();
    let nc = p.hom(x, z).object_count();
    (a * nb + b) * nc + c
}

/// Value of a quantale-backend `P_xyz(a, b, c)`.
pub fn p_value(p: &Probicategory, x: usize, y: usize, z: usize, a: usize, b: usize, c: usize) -> Option<Elem> {
    p.p(x, y, z).as_quantale().map(|v| v[p_index(p, x, y, z, a, b, c)])
}
