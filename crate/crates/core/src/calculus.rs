//! Presheaves `[A, V]`, hom objects, weighted colimits `W * D` and weighted
//! limits `{W, D}`, Yoneda, density, and reflections onto full reflective
//! subcategories of presheaf categories.
//!
//! Multi-variable presheaves live on product categories numbered as in
//! [`crate::fincat`]; a presheaf on `M × B` at object `(m, b)` sits at index
//! `m * |B| + b`. Products and opposites are never materialised inside the
//! (co)limit kernels: everything is computed by index arithmetic on the
//! factor categories.

use std::collections::HashMap;

use serde::Serialize;

use crate::enrichment::{Elem, Quantale, VObject};
use crate::error::{Error, Result};
use crate::fincat::{find_natural_iso, Category, FinFunctor, Witness};
use crate::search::NatProblem;

/// Cap on candidate assignments when enumerating natural transformations
/// for hom sets and weighted limits.
pub const ENUMERATION_CAP: u64 = 200_000_000;

/// A finite-set-valued functor: `sizes[x] = |F(x)|`, `actions[f]` the
/// function `F(src f) → F(tgt f)` as an image table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SetPresheaf {
    sizes: Vec<usize>,
    actions: Vec<Vec<usize>>,
}

impl SetPresheaf {
    /// Builds and validates a presheaf on `cat`.
    pub fn new(cat: &Category, sizes: Vec<usize>, actions: Vec<Vec<usize>>) -> Result<Self> {
        let p = SetPresheaf { sizes, actions };
        p.check(cat)?;
        Ok(p)
    }

    /// Assembles a presheaf whose functoriality is guaranteed by construction.
    pub(crate) fn from_parts(sizes: Vec<usize>, actions: Vec<Vec<usize>>) -> Self {
        SetPresheaf { sizes, actions }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, x: usize) -> usize {
        self.sizes[x]
    }

    pub fn action(&self, f: usize) -> &[usize] {
        &self.actions[f]
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Functoriality: every action well typed, identities act trivially,
    /// composites act as composites. Errors name the offending morphism.
    pub fn check(&self, cat: &Category) -> Result<()> {
        if self.sizes.len() != cat.object_count() || self.actions.len() != cat.morphism_count() {
            return Err(Error::Presheaf(format!(
                "shape mismatch: {} objects and {} actions for a category with {} objects and {} morphisms",
                self.sizes.len(),
                self.actions.len(),
                cat.object_count(),
                cat.morphism_count()
            )));
        }
        for (f, m) in cat.morphisms().iter().enumerate() {
            let act = &self.actions[f];
            if act.len() != self.sizes[m.src] || act.iter().any(|&v| v >= self.sizes[m.tgt]) {
                return Err(Error::Presheaf(format!(
                    "action of {} is not a function F({}) → F({})",
                    m.label, m.src, m.tgt
                )));
            }
            if cat.is_identity(f) && act.iter().enumerate().any(|(i, &v)| i != v) {
                return Err(Error::Presheaf(format!("identity {} acts non-trivially", m.label)));
            }
        }
        for g in 0..cat.morphism_count() {
            for f in 0..cat.morphism_count() {
                if let Some(h) = cat.compose(g, f) {
                    let (ag, af, ah) = (&self.actions[g], &self.actions[f], &self.actions[h]);
                    if (0..af.len()).any(|u| ag[af[u]] != ah[u]) {
                        let ms = cat.morphisms();
                        return Err(Error::Presheaf(format!(
                            "F({}) ∘ F({}) != F({})",
                            ms[g].label, ms[f].label, ms[h].label
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Isomorphism invariant used to reject non-isomorphic pairs cheaply:
    /// per morphism, the sorted fibre sizes of its action.
    pub fn signature(&self, cat: &Category) -> Vec<Vec<usize>> {
        cat.morphisms()
            .iter()
            .enumerate()
            .filter(|&(f, _)| !cat.is_identity(f))
            .map(|(f, m)| {
                let mut fibres = vec![0; self.sizes[m.tgt]];
                for &v in &self.actions[f] {
                    fibres[v] += 1;
                }
                let fixed = if m.src == m.tgt {
                    self.actions[f].iter().enumerate().filter(|&(i, &v)| i == v).count()
                } else {
                    0
                };
                fibres.sort_unstable();
                fibres.push(fixed);
                fibres
            })
            .collect()
    }
}

/// A backend-tagged object of `[A, V]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Presheaf {
    /// One carrier element per object, monotone along homs.
    Quantale(Vec<Elem>),
    Set(SetPresheaf),
}

impl Presheaf {
    pub fn check(&self, cat: &Category) -> Result<()> {
        match (self, cat.quantale()) {
            (Presheaf::Set(p), None) => p.check(cat),
            (Presheaf::Quantale(v), Some(q)) => check_quantale_presheaf(cat, q, v),
            _ => Err(Error::BackendMismatch("presheaf and base category use different backends".into())),
        }
    }

    pub fn object_count(&self) -> usize {
        match self {
            Presheaf::Quantale(v) => v.len(),
            Presheaf::Set(p) => p.sizes.len(),
        }
    }

    pub fn value(&self, x: usize) -> VObject {
        match self {
            Presheaf::Quantale(v) => VObject::Element(v[x]),
            Presheaf::Set(p) => VObject::FiniteSet(p.sizes[x]),
        }
    }

    pub fn as_set(&self) -> Option<&SetPresheaf> {
        match self {
            Presheaf::Set(p) => Some(p),
            Presheaf::Quantale(_) => None,
        }
    }

    pub fn as_quantale(&self) -> Option<&[Elem]> {
        match self {
            Presheaf::Quantale(v) => Some(v),
            Presheaf::Set(_) => None,
        }
    }
}

fn check_quantale_presheaf(cat: &Category, q: &Quantale, v: &[Elem]) -> Result<()> {
    let n = cat.object_count();
    if v.len() != n || v.iter().any(|&a| a >= q.size()) {
        return Err(Error::Presheaf("value vector does not match the base".into()));
    }
    for x in 0..n {
        for y in 0..n {
            if !q.leq(q.tensor(cat.hom_value(x, y), v[x]), v[y]) {
                return Err(Error::Presheaf(format!(
                    "hom({}, {}) ⊗ F({}) is not below F({})",
                    cat.object_label(x),
                    cat.object_label(y),
                    cat.object_label(x),
                    cat.object_label(y)
                )));
            }
        }
    }
    Ok(())
}

fn backend_error(what: &str) -> Error {
    Error::BackendMismatch(format!("{what}: presheaves use different backends"))
}

/// A natural transformation between presheaves. Between quantale presheaves a
/// transformation exists iff the source is pointwise below the target, and is
/// then unique.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NatMap {
    Leq,
    Components(Vec<Vec<usize>>),
}

impl NatMap {
    pub fn identity(f: &Presheaf) -> NatMap {
        match f {
            Presheaf::Quantale(_) => NatMap::Leq,
            Presheaf::Set(p) => NatMap::Components(p.sizes.iter().map(|&s| (0..s).collect()).collect()),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &NatMap) -> NatMap {
        match (self, next) {
            (NatMap::Components(a), NatMap::Components(b)) => {
                NatMap::Components(a.iter().zip(b).map(|(ax, bx)| ax.iter().map(|&i| bx[i]).collect()).collect())
            }
            _ => NatMap::Leq,
        }
    }

    pub fn components(&self) -> Option<&[Vec<usize>]> {
        match self {
            NatMap::Components(c) => Some(c),
            NatMap::Leq => None,
        }
    }

    /// Whether `self: src → tgt` is well typed and natural.
    pub fn is_natural(&self, cat: &Category, src: &Presheaf, tgt: &Presheaf) -> bool {
        match (self, src, tgt) {
            (NatMap::Leq, Presheaf::Quantale(a), Presheaf::Quantale(b)) => {
                let q = cat.quantale().expect("quantale base");
                a.iter().zip(b).all(|(&x, &y)| q.leq(x, y))
            }
            (NatMap::Components(c), Presheaf::Set(a), Presheaf::Set(b)) => {
                c.len() == a.sizes.len()
                    && c.iter().enumerate().all(|(x, cx)| cx.len() == a.sizes[x] && cx.iter().all(|&v| v < b.sizes[x]))
                    && cat.morphisms().iter().enumerate().all(|(f, m)| {
                        (0..a.sizes[m.src]).all(|u| c[m.tgt][a.actions[f][u]] == b.actions[f][c[m.src][u]])
                    })
            }
            _ => false,
        }
    }

    /// Whether the map is invertible (componentwise bijective; pointwise
    /// equality in the quantale backend).
    pub fn is_iso(&self, src: &Presheaf, tgt: &Presheaf) -> bool {
        match (self, src, tgt) {
            (NatMap::Leq, Presheaf::Quantale(a), Presheaf::Quantale(b)) => a == b,
            (NatMap::Components(c), Presheaf::Set(a), Presheaf::Set(b)) => {
                a.sizes == b.sizes
                    && c.iter().enumerate().all(|(x, cx)| {
                        let mut seen = vec![false; b.sizes[x]];
                        cx.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
                    })
            }
            _ => false,
        }
    }

    /// Converts an invertible map into a witness.
    pub fn into_witness(self) -> Witness {
        match self {
            NatMap::Leq => Witness::OrderEquality,
            NatMap::Components(components) => Witness::NaturalIso { components },
        }
    }
}

/// The hom object `[A, V](F, G)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HomObject {
    Element(Elem),
    /// All natural transformations, in lexicographic order of components.
    Transformations(Vec<Vec<Vec<usize>>>),
}

impl HomObject {
    pub fn to_vobject(&self) -> VObject {
        match self {
            HomObject::Element(e) => VObject::Element(*e),
            HomObject::Transformations(t) => VObject::FiniteSet(t.len()),
        }
    }
}

fn split_flat(flat: &[usize], offsets: &[usize]) -> Vec<Vec<usize>> {
    offsets.windows(2).map(|w| flat[w[0]..w[1]].to_vec()).collect()
}

/// All natural transformations `src ⇒ tgt`, lexicographically.
pub fn nat_transformations(cat: &Category, src: &SetPresheaf, tgt: &SetPresheaf) -> Result<Vec<Vec<Vec<usize>>>> {
    let offsets = NatProblem::offsets(src);
    let mut out = Vec::new();
    NatProblem { cat, src, tgt, injective: false, fixed: None, colours: None }.solve(ENUMERATION_CAP, |theta| {
        out.push(split_flat(theta, &offsets));
        true
    })?;
    out.sort_unstable();
    Ok(out)
}

/// Number of natural transformations `src ⇒ tgt`.
pub fn count_nat_transformations(cat: &Category, src: &SetPresheaf, tgt: &SetPresheaf) -> Result<usize> {
    let mut count = 0;
    NatProblem { cat, src, tgt, injective: false, fixed: None, colours: None }.solve(ENUMERATION_CAP, |_| {
        count += 1;
        true
    })?;
    Ok(count)
}

pub fn presheaf_hom(cat: &Category, f: &Presheaf, g: &Presheaf) -> Result<HomObject> {
    match (f, g) {
        (Presheaf::Quantale(a), Presheaf::Quantale(b)) => {
            let q = cat.quantale().ok_or_else(|| backend_error("hom"))?;
            Ok(HomObject::Element(q.meet_all(a.iter().zip(b).map(|(&x, &y)| q.residual(x, y)))))
        }
        (Presheaf::Set(a), Presheaf::Set(b)) => Ok(HomObject::Transformations(nat_transformations(cat, a, b)?)),
        _ => Err(backend_error("hom")),
    }
}

/// `hom(F, G)` reduced to a value of V (a carrier element or a cardinality).
pub fn presheaf_hom_value(cat: &Category, f: &Presheaf, g: &Presheaf) -> Result<VObject> {
    match (f, g) {
        (Presheaf::Set(a), Presheaf::Set(b)) => Ok(VObject::FiniteSet(count_nat_transformations(cat, a, b)?)),
        _ => presheaf_hom(cat, f, g).map(|h| h.to_vobject()),
    }
}

/// The representable-free constants: the initial presheaf.
pub fn initial_presheaf(cat: &Category) -> Presheaf {
    match cat.quantale() {
        Some(q) => Presheaf::Quantale(vec![q.bottom(); cat.object_count()]),
        None => Presheaf::Set(SetPresheaf {
            sizes: vec![0; cat.object_count()],
            actions: vec![Vec::new(); cat.morphism_count()],
        }),
    }
}

/// The terminal presheaf.
pub fn terminal_presheaf(cat: &Category) -> Presheaf {
    match cat.quantale() {
        Some(q) => Presheaf::Quantale(vec![q.top(); cat.object_count()]),
        None => Presheaf::Set(SetPresheaf {
            sizes: vec![1; cat.object_count()],
            actions: vec![vec![0]; cat.morphism_count()],
        }),
    }
}

/// The two-variable hom presheaf `A(−, −)` on `op(A) × A`.
pub fn hom_presheaf(cat: &Category) -> Presheaf {
    let n = cat.object_count();
    match cat.quantale() {
        Some(_) => Presheaf::Quantale((0..n * n).map(|i| cat.hom_value(i / n, i % n)).collect()),
        None => {
            let m = cat.morphism_count();
            let sizes = (0..n * n).map(|i| cat.hom(i / n, i % n).len()).collect();
            let position = |h: usize| {
                let mm = &cat.morphisms()[h];
                cat.hom(mm.src, mm.tgt).iter().position(|&k| k == h).expect("morphism in its hom")
            };
            let mut actions = Vec::with_capacity(m * m);
            for f in 0..m {
                // f as a morphism of op(A): tgt f → src f
                let mf = &cat.morphisms()[f];
                for g in 0..m {
                    let mg = &cat.morphisms()[g];
                    let act = cat
                        .hom(mf.tgt, mg.src)
                        .iter()
                        .map(|&h| {
                            let hf = cat.compose(h, f).expect("composable");
                            position(cat.compose(g, hf).expect("composable"))
                        })
                        .collect();
                    actions.push(act);
                }
            }
            Presheaf::Set(SetPresheaf { sizes, actions })
        }
    }
}

/// The representables `A(X, −)`, one per object `X`.
pub fn yoneda_embed(cat: &Category) -> Vec<Presheaf> {
    let hom = hom_presheaf(cat);
    (0..cat.object_count()).map(|x| slice_first(cat, cat, &hom, x)).collect()
}

/// The slice `F(m, −)` of a presheaf on `M × B`.
pub fn slice_first(m_cat: &Category, b_cat: &Category, f: &Presheaf, m: usize) -> Presheaf {
    let nb = b_cat.object_count();
    match f {
        Presheaf::Quantale(v) => Presheaf::Quantale(v[m * nb..(m + 1) * nb].to_vec()),
        Presheaf::Set(p) => {
            let mb = b_cat.morphism_count();
            let id = m_cat.identity(m);
            Presheaf::Set(SetPresheaf {
                sizes: p.sizes[m * nb..(m + 1) * nb].to_vec(),
                actions: (0..mb).map(|g| p.actions[id * mb + g].clone()).collect(),
            })
        }
    }
}

/// The slice `F(−, b)` of a presheaf on `M × B`.
pub fn slice_second(m_cat: &Category, b_cat: &Category, f: &Presheaf, b: usize) -> Presheaf {
    let nb = b_cat.object_count();
    let nm = m_cat.object_count();
    match f {
        Presheaf::Quantale(v) => Presheaf::Quantale((0..nm).map(|m| v[m * nb + b]).collect()),
        Presheaf::Set(p) => {
            let mb = b_cat.morphism_count();
            let id = b_cat.identity(b);
            Presheaf::Set(SetPresheaf {
                sizes: (0..nm).map(|m| p.sizes[m * nb + b]).collect(),
                actions: (0..m_cat.morphism_count()).map(|g| p.actions[g * mb + id].clone()).collect(),
            })
        }
    }
}

/// Reindexes a presheaf on `A × B` as one on `B × A`.
pub fn swap(a_cat: &Category, b_cat: &Category, f: &Presheaf) -> Presheaf {
    let (na, nb) = (a_cat.object_count(), b_cat.object_count());
    match f {
        Presheaf::Quantale(v) => Presheaf::Quantale((0..nb * na).map(|i| v[(i % na) * nb + i / na]).collect()),
        Presheaf::Set(p) => {
            let (ma, mb) = (a_cat.morphism_count(), b_cat.morphism_count());
            Presheaf::Set(SetPresheaf {
                sizes: (0..nb * na).map(|i| p.sizes[(i % na) * nb + i / na]).collect(),
                actions: (0..mb * ma).map(|i| p.actions[(i % ma) * mb + i / ma].clone()).collect(),
            })
        }
    }
}

/// Restriction `F ∘ G` along a functor `G: dom → base`.
pub fn restrict(f: &Presheaf, along: &FinFunctor) -> Presheaf {
    match f {
        Presheaf::Quantale(v) => Presheaf::Quantale(along.objects.iter().map(|&o| v[o]).collect()),
        Presheaf::Set(p) => Presheaf::Set(SetPresheaf {
            sizes: along.objects.iter().map(|&o| p.sizes[o]).collect(),
            actions: along.morphisms.iter().map(|&m| p.actions[m].clone()).collect(),
        }),
    }
}

/// External product `F ⊠ G` on `A × B`; element `(i, j)` is `i * |G| + j`.
pub fn external_product(a_cat: &Category, b_cat: &Category, f: &Presheaf, g: &Presheaf) -> Result<Presheaf> {
    match (f, g) {
        (Presheaf::Quantale(a), Presheaf::Quantale(b)) => {
            let q = a_cat.quantale().ok_or_else(|| backend_error("external product"))?;
            Ok(Presheaf::Quantale(a.iter().flat_map(|&x| b.iter().map(move |&y| q.tensor(x, y))).collect()))
        }
        (Presheaf::Set(a), Presheaf::Set(b)) => {
            let sizes = a.sizes.iter().flat_map(|&x| b.sizes.iter().map(move |&y| x * y)).collect();
            let mut actions = Vec::with_capacity(a.actions.len() * b.actions.len());
            for fa in &a.actions {
                for (gi, gb) in b.actions.iter().enumerate() {
                    let width = b.sizes[b_cat.morphisms()[gi].tgt];
                    actions.push(fa.iter().flat_map(|&i| gb.iter().map(move |&j| i * width + j)).collect());
                }
            }
            Ok(Presheaf::Set(SetPresheaf { sizes, actions }))
        }
        _ => Err(backend_error("external product")),
    }
}

/// `α ⊠ β: F ⊠ G → F′ ⊠ G′`.
pub fn external_product_map(alpha: &NatMap, beta: &NatMap, g_target: &Presheaf) -> NatMap {
    match (alpha, beta, g_target) {
        (NatMap::Components(a), NatMap::Components(b), Presheaf::Set(gt)) => NatMap::Components(
            a.iter()
                .flat_map(|ax| {
                    b.iter().enumerate().map(move |(y, by)| {
                        ax.iter().flat_map(|&i| by.iter().map(move |&j| i * gt.sizes[y] + j)).collect()
                    })
                })
                .collect(),
        ),
        _ => NatMap::Leq,
    }
}

/// Pointwise tensor `F ⊗ G` of two presheaves on the same category.
pub fn pointwise_product(cat: &Category, f: &Presheaf, g: &Presheaf) -> Result<Presheaf> {
    match (f, g) {
        (Presheaf::Quantale(a), Presheaf::Quantale(b)) => {
            let q = cat.quantale().ok_or_else(|| backend_error("pointwise product"))?;
            Ok(Presheaf::Quantale(a.iter().zip(b).map(|(&x, &y)| q.tensor(x, y)).collect()))
        }
        (Presheaf::Set(a), Presheaf::Set(b)) => {
            let sizes = a.sizes.iter().zip(&b.sizes).map(|(x, y)| x * y).collect();
            let actions = cat
                .morphisms()
                .iter()
                .enumerate()
                .map(|(f, m)| {
                    let width = b.sizes[m.tgt];
                    a.actions[f].iter().flat_map(|&i| b.actions[f].iter().map(move |&j| i * width + j)).collect()
                })
                .collect();
            Ok(Presheaf::Set(SetPresheaf { sizes, actions }))
        }
        _ => Err(backend_error("pointwise product")),
    }
}

/// Coproduct `F ⊔ G` (join in the quantale backend); elements of `G` follow
/// those of `F`.
pub fn coproduct(cat: &Category, f: &Presheaf, g: &Presheaf) -> Result<Presheaf> {
    match (f, g) {
        (Presheaf::Quantale(a), Presheaf::Quantale(b)) => {
            let q = cat.quantale().ok_or_else(|| backend_error("coproduct"))?;
            Ok(Presheaf::Quantale(a.iter().zip(b).map(|(&x, &y)| q.join(x, y)).collect()))
        }
        (Presheaf::Set(a), Presheaf::Set(b)) => {
            let sizes = a.sizes.iter().zip(&b.sizes).map(|(x, y)| x + y).collect();
            let actions = cat
                .morphisms()
                .iter()
                .enumerate()
                .map(|(f, m)| {
                    let shift = a.sizes[m.tgt];
                    a.actions[f].iter().copied().chain(b.actions[f].iter().map(|&j| j + shift)).collect()
                })
                .collect();
            Ok(Presheaf::Set(SetPresheaf { sizes, actions }))
        }
        _ => Err(backend_error("coproduct")),
    }
}

/// The weighted colimit `W * D` with canonical injections.
#[derive(Clone, Debug)]
pub struct Colimit {
    pub object: Presheaf,
    nb: usize,
    cells: Vec<ColimitCell>,
}

#[derive(Clone, Debug)]
struct ColimitCell {
    base: Vec<usize>,
    dsize: Vec<usize>,
    injection: Vec<usize>,
    reps: Vec<(usize, usize, usize)>,
}

impl Colimit {
    /// Class of the generating element `(k, w, d)` at `(m, b)`.
    pub fn inject(&self, m: usize, b: usize, k: usize, w: usize, d: usize) -> usize {
        let cell = &self.cells[m * self.nb + b];
        cell.injection[cell.base[k] + w * cell.dsize[k] + d]
    }

    /// Least generating element `(k, w, d)` of a class.
    pub fn representative(&self, m: usize, b: usize, class: usize) -> (usize, usize, usize) {
        self.cells[m * self.nb + b].reps[class]
    }
}

/// `(W * D)(m, b) = ∫^k W(m, k) ⊗ D(k, b)` for `W` on `M × op(K)` and `D` on
/// `K × B`; the result lives on `M × B`. Set-backend classes are numbered by
/// their least generating element `(k, w, d)` in lexicographic order.
pub fn weighted_colimit(
    k_cat: &Category,
    m_cat: &Category,
    b_cat: &Category,
    w: &Presheaf,
    d: &Presheaf,
) -> Result<Colimit> {
    let (nk, nm, nb) = (k_cat.object_count(), m_cat.object_count(), b_cat.object_count());
    if w.object_count() != nm * nk || d.object_count() != nk * nb {
        return Err(Error::IndexMismatch("weight and diagram do not share the indexing category".into()));
    }
    match (w, d) {
        (Presheaf::Quantale(wv), Presheaf::Quantale(dv)) => {
            let q = k_cat.quantale().ok_or_else(|| backend_error("weighted colimit"))?;
            let values = (0..nm * nb)
                .map(|i| {
                    let (m, b) = (i / nb, i % nb);
                    q.join_all((0..nk).map(|k| q.tensor(wv[m * nk + k], dv[k * nb + b])))
                })
                .collect();
            Ok(Colimit { object: Presheaf::Quantale(values), nb, cells: Vec::new() })
        }
        (Presheaf::Set(wp), Presheaf::Set(dp)) => Ok(set_colimit(k_cat, m_cat, b_cat, wp, dp)),
        _ => Err(backend_error("weighted colimit")),
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        // the smaller id stays the root so roots are least elements
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

fn set_colimit(k_cat: &Category, m_cat: &Category, b_cat: &Category, w: &SetPresheaf, d: &SetPresheaf) -> Colimit {
    let (nk, nm, nb) = (k_cat.object_count(), m_cat.object_count(), b_cat.object_count());
    let (mk, mb) = (k_cat.morphism_count(), b_cat.morphism_count());
    let mut cells = Vec::with_capacity(nm * nb);
    let mut parent = Vec::new();
    for m in 0..nm {
        let id_m = m_cat.identity(m);
        for b in 0..nb {
            let id_b = b_cat.identity(b);
            let mut base = Vec::with_capacity(nk + 1);
            let mut dsize = Vec::with_capacity(nk);
            let mut total = 0;
            for k in 0..nk {
                base.push(total);
                dsize.push(d.sizes[k * nb + b]);
                total += w.sizes[m * nk + k] * d.sizes[k * nb + b];
            }
            base.push(total);
            parent.clear();
            parent.extend(0..total);
            for (f, mor) in k_cat.morphisms().iter().enumerate() {
                if k_cat.identity(mor.src) == f {
                    continue;
                }
                let (s, t) = (mor.src, mor.tgt);
                let w_act = &w.actions[id_m * mk + f];
                let d_act = &d.actions[f * mb + id_b];
                for wt in 0..w.sizes[m * nk + t] {
                    let ws = w_act[wt];
                    for ds in 0..dsize[s] {
                        let left = base[s] + ws * dsize[s] + ds;
                        let right = base[t] + wt * dsize[t] + d_act[ds];
                        union(&mut parent, left, right);
                    }
                }
            }
            let mut class_of_root = vec![usize::MAX; total];
            let mut injection = vec![0; total];
            let mut reps = Vec::new();
            let mut k = 0;
            for e in 0..total {
                while base[k + 1] <= e {
                    k += 1;
                }
                let r = find(&mut parent, e);
                if class_of_root[r] == usize::MAX {
                    class_of_root[r] = reps.len();
                    let off = e - base[k];
                    reps.push((k, off / dsize[k], off % dsize[k]));
                }
                injection[e] = class_of_root[r];
            }
            cells.push(ColimitCell { base, dsize, injection, reps });
        }
    }
    let sizes: Vec<usize> = cells.iter().map(|c| c.reps.len()).collect();
    let mm = m_cat.morphism_count();
    let mut actions = Vec::with_capacity(mm * mb);
    for (mu, mmor) in m_cat.morphisms().iter().enumerate() {
        for (beta, bmor) in b_cat.morphisms().iter().enumerate() {
            let src = &cells[mmor.src * nb + bmor.src];
            let tgt = &cells[mmor.tgt * nb + bmor.tgt];
            let act = src
                .reps
                .iter()
                .map(|&(k, wi, di)| {
                    let w2 = w.actions[mu * mk + k_cat.identity(k)][wi];
                    let d2 = d.actions[k_cat.identity(k) * mb + beta][di];
                    tgt.injection[tgt.base[k] + w2 * tgt.dsize[k] + d2]
                })
                .collect();
            actions.push(act);
        }
    }
    Colimit { object: Presheaf::Set(SetPresheaf { sizes, actions }), nb, cells }
}

/// Map `W * D → W′ * D` induced by `α: W → W′` (components indexed by the
/// objects of `M × op(K)`).
pub fn colimit_weight_map(k_cat: &Category, src: &Colimit, tgt: &Colimit, alpha: &NatMap) -> NatMap {
    let nk = k_cat.object_count();
    match alpha {
        NatMap::Leq => NatMap::Leq,
        NatMap::Components(a) => NatMap::Components(
            src.cells
                .iter()
                .enumerate()
                .map(|(i, cell)| {
                    let (m, b) = (i / src.nb, i % src.nb);
                    cell.reps.iter().map(|&(k, w, d)| tgt.inject(m, b, k, a[m * nk + k][w], d)).collect()
                })
                .collect(),
        ),
    }
}

/// The weighted limit `{W, D}` with its elements (natural transformations)
/// listed explicitly.
#[derive(Clone, Debug)]
pub struct Limit {
    pub object: Presheaf,
    nb: usize,
    cells: Vec<LimitCell>,
}

#[derive(Clone, Debug)]
struct LimitCell {
    offsets: Vec<usize>,
    elements: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl Limit {
    /// Component at `k` of element `i` of `{W, D}(m, b)`.
    pub fn component(&self, m: usize, b: usize, i: usize, k: usize) -> &[usize] {
        let cell = &self.cells[m * self.nb + b];
        &cell.elements[i][cell.offsets[k]..cell.offsets[k + 1]]
    }

    /// Index of the transformation with the given flattened components.
    pub fn find(&self, m: usize, b: usize, flat: &[usize]) -> Option<usize> {
        self.cells[m * self.nb + b].lookup.get(flat).copied()
    }
}

/// `{W, D}(m, b) = ∫_k [W(m, k), D(k, b)]` for `W` on `op(M) × K` and `D` on
/// `K × B`; the result lives on `M × B`. Set-backend elements are the natural
/// transformations `W(m, −) ⇒ D(−, b)` in lexicographic order.
pub fn weighted_limit(
    k_cat: &Category,
    m_cat: &Category,
    b_cat: &Category,
    w: &Presheaf,
    d: &Presheaf,
) -> Result<Limit> {
    let (nk, nm, nb) = (k_cat.object_count(), m_cat.object_count(), b_cat.object_count());
    if w.object_count() != nm * nk || d.object_count() != nk * nb {
        return Err(Error::IndexMismatch("weight and diagram do not share the indexing category".into()));
    }
    match (w, d) {
        (Presheaf::Quantale(wv), Presheaf::Quantale(dv)) => {
            let q = k_cat.quantale().ok_or_else(|| backend_error("weighted limit"))?;
            let values = (0..nm * nb)
                .map(|i| {
                    let (m, b) = (i / nb, i % nb);
                    q.meet_all((0..nk).map(|k| q.residual(wv[m * nk + k], dv[k * nb + b])))
                })
                .collect();
            Ok(Limit { object: Presheaf::Quantale(values), nb, cells: Vec::new() })
        }
        (Presheaf::Set(wp), Presheaf::Set(dp)) => set_limit(k_cat, m_cat, b_cat, wp, dp),
        _ => Err(backend_error("weighted limit")),
    }
}

fn set_limit(k_cat: &Category, m_cat: &Category, b_cat: &Category, w: &SetPresheaf, d: &SetPresheaf) -> Result<Limit> {
    let (nk, nm, nb) = (k_cat.object_count(), m_cat.object_count(), b_cat.object_count());
    let (mk, mb) = (k_cat.morphism_count(), b_cat.morphism_count());
    let w_slices: Vec<SetPresheaf> = (0..nm)
        .map(|m| {
            let id = m_cat.identity(m);
            SetPresheaf {
                sizes: w.sizes[m * nk..(m + 1) * nk].to_vec(),
                actions: (0..mk).map(|f| w.actions[id * mk + f].clone()).collect(),
            }
        })
        .collect();
    let d_slices: Vec<SetPresheaf> = (0..nb)
        .map(|b| {
            let id = b_cat.identity(b);
            SetPresheaf {
                sizes: (0..nk).map(|k| d.sizes[k * nb + b]).collect(),
                actions: (0..mk).map(|f| d.actions[f * mb + id].clone()).collect(),
            }
        })
        .collect();
    let mut cells = Vec::with_capacity(nm * nb);
    for ws in &w_slices {
        for ds in &d_slices {
            let offsets = NatProblem::offsets(ws);
            let mut elements = Vec::new();
            NatProblem { cat: k_cat, src: ws, tgt: ds, injective: false, fixed: None, colours: None }.solve(
                ENUMERATION_CAP,
                |t| {
                    elements.push(t.to_vec());
                    true
                },
            )?;
            elements.sort_unstable();
            let lookup = elements.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
            cells.push(LimitCell { offsets, elements, lookup });
        }
    }
    let sizes: Vec<usize> = cells.iter().map(|c| c.elements.len()).collect();
    let mut actions = Vec::with_capacity(m_cat.morphism_count() * mb);
    for (mu, mmor) in m_cat.morphisms().iter().enumerate() {
        for (beta, bmor) in b_cat.morphisms().iter().enumerate() {
            let src = &cells[mmor.src * nb + bmor.src];
            let tgt = &cells[mmor.tgt * nb + bmor.tgt];
            let act = src
                .elements
                .iter()
                .map(|theta| {
                    let mut moved = Vec::with_capacity(*tgt.offsets.last().unwrap());
                    for k in 0..nk {
                        let id_k = k_cat.identity(k);
                        // μ read in op(M) runs m′ → m
                        let pull = &w.actions[mu * mk + id_k];
                        let push = &d.actions[id_k * mb + beta];
                        let comp = &theta[src.offsets[k]..src.offsets[k + 1]];
                        moved.extend(pull.iter().map(|&wi| push[comp[wi]]));
                    }
                    tgt.lookup[&moved]
                })
                .collect();
            actions.push(act);
        }
    }
    Ok(Limit { object: Presheaf::Set(SetPresheaf { sizes, actions }), nb, cells })
}

/// Map `{W′, D} → {W, D}` induced by `α: W → W′` (precomposition).
pub fn limit_weight_map(k_cat: &Category, src: &Limit, tgt: &Limit, alpha: &NatMap) -> NatMap {
    let nk = k_cat.object_count();
    match alpha {
        NatMap::Leq => NatMap::Leq,
        NatMap::Components(a) => NatMap::Components(
            src.cells
                .iter()
                .enumerate()
                .map(|(i, cell)| {
                    let (m, b) = (i / src.nb, i % src.nb);
                    cell.elements
                        .iter()
                        .map(|theta| {
                            let mut flat = Vec::with_capacity(*tgt.cells[i].offsets.last().unwrap());
                            for k in 0..nk {
                                let comp = &theta[cell.offsets[k]..cell.offsets[k + 1]];
                                flat.extend(a[m * nk + k].iter().map(|&wi| comp[wi]));
                            }
                            tgt.find(m, b, &flat).expect("precomposition stays natural")
                        })
                        .collect()
                })
                .collect(),
        ),
    }
}

/// Every presheaf on `cat` with at most `max_elements` elements per object
/// (set backend), or every monotone carrier vector (quantale backend), in
/// canonical order.
pub fn enumerate_presheaves(cat: &Category, max_elements: usize) -> Result<Vec<Presheaf>> {
    let n = cat.object_count();
    if let Some(q) = cat.quantale() {
        let mut out = Vec::new();
        let mut v = vec![0; n];
        fn go(cat: &Category, q: &Quantale, i: usize, v: &mut Vec<Elem>, out: &mut Vec<Presheaf>) {
            if i == v.len() {
                out.push(Presheaf::Quantale(v.clone()));
                return;
            }
            for a in q.elements() {
                v[i] = a;
                let ok = (0..=i).all(|j| {
                    q.leq(q.tensor(cat.hom_value(j, i), v[j]), v[i]) && q.leq(q.tensor(cat.hom_value(i, j), v[i]), v[j])
                });
                if ok {
                    go(cat, q, i + 1, v, out);
                }
            }
        }
        go(cat, q, 0, &mut v, &mut out);
        return Ok(out);
    }
    let mut out = Vec::new();
    let mut sizes = vec![0; n];
    loop {
        enumerate_actions(cat, &sizes, &mut out);
        // next size vector, last object varying fastest
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if sizes[i] < max_elements {
                sizes[i] += 1;
                for s in sizes.iter_mut().skip(i + 1) {
                    *s = 0;
                }
                break;
            }
        }
    }
}

fn enumerate_actions(cat: &Category, sizes: &[usize], out: &mut Vec<Presheaf>) {
    let m = cat.morphism_count();
    let mut actions: Vec<Option<Vec<usize>>> = vec![None; m];
    for x in 0..cat.object_count() {
        actions[cat.identity(x)] = Some((0..sizes[x]).collect());
    }
    let free: Vec<usize> = (0..m).filter(|&f| !cat.is_identity(f)).collect();
    // composition constraints checked once all three entries are assigned
    let mut checks: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); free.len()];
    let rank = |f: usize| free.iter().position(|&g| g == f);
    for g in 0..m {
        for f in 0..m {
            if let Some(h) = cat.compose(g, f) {
                let last = [g, f, h].iter().filter_map(|&x| rank(x)).max();
                if let Some(r) = last {
                    checks[r].push((g, f, h));
                }
            }
        }
    }
    fn go(
        cat: &Category,
        sizes: &[usize],
        free: &[usize],
        checks: &[Vec<(usize, usize, usize)>],
        i: usize,
        actions: &mut Vec<Option<Vec<usize>>>,
        out: &mut Vec<Presheaf>,
    ) {
        if i == free.len() {
            out.push(Presheaf::Set(SetPresheaf {
                sizes: sizes.to_vec(),
                actions: actions.iter().map(|a| a.clone().expect("assigned")).collect(),
            }));
            return;
        }
        let f = free[i];
        let mor = &cat.morphisms()[f];
        let (ls, lt) = (sizes[mor.src], sizes[mor.tgt]);
        if ls > 0 && lt == 0 {
            return;
        }
        let mut func = vec![0; ls];
        loop {
            actions[f] = Some(func.clone());
            let ok = checks[i].iter().all(|&(g, ff, h)| {
                let (ag, af, ah) =
                    (actions[g].as_ref().unwrap(), actions[ff].as_ref().unwrap(), actions[h].as_ref().unwrap());
                (0..af.len()).all(|u| ag[af[u]] == ah[u])
            });
            if ok {
                go(cat, sizes, free, checks, i + 1, actions, out);
            }
            // next function in lexicographic order
            let mut j = ls;
            loop {
                if j == 0 {
                    actions[f] = None;
                    return;
                }
                j -= 1;
                if func[j] + 1 < lt {
                    func[j] += 1;
                    for v in func.iter_mut().skip(j + 1) {
                        *v = 0;
                    }
                    break;
                }
            }
        }
    }
    go(cat, sizes, &free, &checks, 0, &mut actions, out);
}

/// Keeps the first representative of each isomorphism class.
pub fn dedup_up_to_iso(cat: &Category, list: Vec<Presheaf>, cap: u64) -> Result<Vec<Presheaf>> {
    let mut reps: Vec<Presheaf> = Vec::new();
    let mut keys: Vec<(Vec<usize>, Vec<Vec<usize>>)> = Vec::new();
    for p in list {
        let key = match &p {
            Presheaf::Set(s) => (s.sizes.clone(), s.signature(cat)),
            Presheaf::Quantale(v) => (v.clone(), Vec::new()),
        };
        let mut duplicate = false;
        for (r, k) in reps.iter().zip(&keys) {
            if *k == key && find_natural_iso(cat, r, &p, cap)?.is_some() {
                duplicate = true;
                break;
            }
        }
        if !duplicate {
            reps.push(p);
            keys.push(key);
        }
    }
    Ok(reps)
}

/// A reflection `η: F → ψF`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reflection {
    pub object: Presheaf,
    pub unit: NatMap,
}

/// A full reflective subcategory of each presheaf category `[A_xy, V]`,
/// addressed by the hom index `(x, y)`.
pub trait Reflector: Send + Sync {
    fn reflect(&self, cat: &Category, hom: (usize, usize), f: &Presheaf) -> Result<Reflection>;
    fn contains(&self, cat: &Category, hom: (usize, usize), f: &Presheaf) -> bool;
}

impl<R: Reflector + ?Sized> Reflector for &R {
    fn reflect(&self, cat: &Category, hom: (usize, usize), f: &Presheaf) -> Result<Reflection> {
        (**self).reflect(cat, hom, f)
    }

    fn contains(&self, cat: &Category, hom: (usize, usize), f: &Presheaf) -> bool {
        (**self).contains(cat, hom, f)
    }
}

/// The whole presheaf category, reflected onto itself.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityReflector;

impl Reflector for IdentityReflector {
    fn reflect(&self, _cat: &Category, _hom: (usize, usize), f: &Presheaf) -> Result<Reflection> {
        Ok(Reflection { object: f.clone(), unit: NatMap::identity(f) })
    }

    fn contains(&self, _cat: &Category, _hom: (usize, usize), _f: &Presheaf) -> bool {
        true
    }
}

/// A reflector together with the hom family it acts on.
#[derive(Clone, Copy)]
pub struct Reflective<'a> {
    pub reflector: &'a dyn Reflector,
    pub hom: (usize, usize),
}

impl Reflective<'_> {
    pub fn reflect(&self, cat: &Category, f: &Presheaf) -> Result<Reflection> {
        self.reflector.reflect(cat, self.hom, f)
    }

    pub fn contains(&self, cat: &Category, f: &Presheaf) -> bool {
        self.reflector.contains(cat, self.hom, f)
    }
}

/// The unique `h: mid → z` with `h ∘ eta = g`, where `eta: x → mid` is a
/// reflection unit and `z` lies in the reflective subcategory.
pub fn factor_through(
    cat: &Category,
    eta: &NatMap,
    x: &Presheaf,
    mid: &Presheaf,
    z: &Presheaf,
    g: &NatMap,
) -> Result<NatMap> {
    match (eta, g, x, mid, z) {
        (_, _, Presheaf::Quantale(_), Presheaf::Quantale(a), Presheaf::Quantale(b)) => {
            let q = cat.quantale().ok_or_else(|| backend_error("factorisation"))?;
            if a.iter().zip(b).all(|(&u, &v)| q.leq(u, v)) {
                Ok(NatMap::Leq)
            } else {
                Err(Error::Reflection("map does not factor through the unit".into()))
            }
        }
        (NatMap::Components(e), NatMap::Components(gc), Presheaf::Set(xs), Presheaf::Set(ms), Presheaf::Set(zs)) => {
            let offsets = NatProblem::offsets(ms);
            let mut fixed: Vec<Option<usize>> = vec![None; *offsets.last().unwrap()];
            for obj in 0..xs.sizes.len() {
                for u in 0..xs.sizes[obj] {
                    let slot = &mut fixed[offsets[obj] + e[obj][u]];
                    let want = gc[obj][u];
                    match *slot {
                        Some(v) if v != want => {
                            return Err(Error::Reflection("map does not factor through the unit".into()))
                        }
                        _ => *slot = Some(want),
                    }
                }
            }
            let mut found = None;
            NatProblem { cat, src: ms, tgt: zs, injective: false, fixed: Some(&fixed), colours: None }.solve(
                ENUMERATION_CAP,
                |t| {
                    found = Some(split_flat(t, &offsets));
                    false
                },
            )?;
            found
                .map(NatMap::Components)
                .ok_or_else(|| Error::Reflection("map does not factor through the unit".into()))
        }
        _ => Err(backend_error("factorisation")),
    }
}

/// `ψf: ψX → ψY` for `f: X → Y`, given both reflections.
pub fn reflect_map(cat: &Category, x: &Presheaf, rx: &Reflection, ry: &Reflection, f: &NatMap) -> Result<NatMap> {
    factor_through(cat, &rx.unit, x, &rx.object, &ry.object, &f.then(&ry.unit))
}

/// Reflects a family `F` on `M × B` slice by slice in `B`, with the `M`
/// action transported along the reflected slice maps.
pub fn reflect_family(target: Reflective<'_>, m_cat: &Category, b_cat: &Category, f: &Presheaf) -> Result<Reflection> {
    let (nm, nb) = (m_cat.object_count(), b_cat.object_count());
    let slices: Vec<Presheaf> = (0..nm).map(|m| slice_first(m_cat, b_cat, f, m)).collect();
    let reflections: Vec<Reflection> = slices.iter().map(|s| target.reflect(b_cat, s)).collect::<Result<_>>()?;
    match f {
        Presheaf::Quantale(_) => {
            let values = reflections
                .iter()
                .flat_map(|r| r.object.as_quantale().expect("quantale reflection").to_vec())
                .collect();
            Ok(Reflection { object: Presheaf::Quantale(values), unit: NatMap::Leq })
        }
        Presheaf::Set(p) => {
            let (mm, mb) = (m_cat.morphism_count(), b_cat.morphism_count());
            let mut slice_maps = Vec::with_capacity(mm);
            for (mu, mor) in m_cat.morphisms().iter().enumerate() {
                let comps = (0..nb).map(|b| p.actions[mu * mb + b_cat.identity(b)].clone()).collect();
                let m = NatMap::Components(comps);
                slice_maps.push(reflect_map(
                    b_cat,
                    &slices[mor.src],
                    &reflections[mor.src],
                    &reflections[mor.tgt],
                    &m,
                )?);
            }
            let objs: Vec<&SetPresheaf> =
                reflections.iter().map(|r| r.object.as_set().expect("set reflection")).collect();
            let sizes = (0..nm * nb).map(|i| objs[i / nb].sizes[i % nb]).collect();
            let mut actions = Vec::with_capacity(mm * mb);
            for (mu, mor) in m_cat.morphisms().iter().enumerate() {
                let comps = slice_maps[mu].components().expect("set map");
                for (beta, bmor) in b_cat.morphisms().iter().enumerate() {
                    let tgt_act = &objs[mor.tgt].actions[beta];
                    actions.push(comps[bmor.src].iter().map(|&i| tgt_act[i]).collect());
                }
            }
            let unit = reflections.iter().flat_map(|r| r.unit.components().expect("set unit").to_vec()).collect();
            Ok(Reflection { object: Presheaf::Set(SetPresheaf { sizes, actions }), unit: NatMap::Components(unit) })
        }
    }
}

/// `hom(N X, C)` as a presheaf in `X ∈ A`, for `N` given as a family on
/// `op(A) × A`.
pub fn hom_from_family(a_cat: &Category, n_family: &Presheaf, c: &Presheaf) -> Result<Limit> {
    let one = Category::terminal(&a_cat.backend());
    weighted_limit(a_cat, a_cat, &one, n_family, c)
}

/// One density comparison `∫^X hom(N X, C) ⊗ N X → C`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityEntry {
    pub index: usize,
    pub object: Presheaf,
    pub comparison_source: Presheaf,
    pub iso: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensityReport {
    pub entries: Vec<DensityEntry>,
}

impl DensityReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.iso)
    }

    pub fn first_failure(&self) -> Option<&DensityEntry> {
        self.entries.iter().find(|e| !e.iso)
    }
}

/// For each `C` in `tests`, builds the canonical comparison from the
/// `hom(N−, C)`-weighted colimit of `N` to `C` (reflected into the target
/// subcategory when one is given) and checks it is invertible.
pub fn density_check(
    a_cat: &Category,
    n_family: &Presheaf,
    tests: &[Presheaf],
    target: Option<Reflective<'_>>,
) -> Result<DensityReport> {
    let a_op = a_cat.op();
    let one = Category::terminal(&a_cat.backend());
    let mut entries = Vec::with_capacity(tests.len());
    for (index, c) in tests.iter().enumerate() {
        let homs = hom_from_family(a_cat, n_family, c)?;
        let colim = weighted_colimit(&a_op, &one, a_cat, &homs.object, n_family)?;
        let comparison = match (&colim.object, c) {
            (Presheaf::Quantale(_), Presheaf::Quantale(_)) => NatMap::Leq,
            (Presheaf::Set(src), Presheaf::Set(_)) => NatMap::Components(
                (0..a_cat.object_count())
                    .map(|b| {
                        (0..src.sizes[b])
                            .map(|class| {
                                let (x, phi, d) = colim.representative(0, b, class);
                                homs.component(x, 0, phi, b)[d]
                            })
                            .collect()
                    })
                    .collect(),
            ),
            _ => return Err(backend_error("density comparison")),
        };
        let (source, map) = match target {
            Some(t) => {
                let r = t.reflect(a_cat, &colim.object)?;
                let h = factor_through(a_cat, &r.unit, &colim.object, &r.object, c, &comparison)?;
                (r.object, h)
            }
            None => (colim.object.clone(), comparison),
        };
        let iso = map.is_iso(&source, c) && map.is_natural(a_cat, &source, c);
        let witness = iso.then(|| map.into_witness());
        entries.push(DensityEntry { index, object: c.clone(), comparison_source: source, iso, witness });
    }
    Ok(DensityReport { entries })
}
