//! Finite categories over either backend, functors and natural
//! transformations between them, and the witness search that backs every
//! isomorphism claim the engine makes.
//!
//! Ordinary (finite-set backend) categories store dense tables: morphism ids
//! are global, `compose[g * m + f]` holds `g ∘ f`. Quantale-enriched
//! categories store a hom matrix over the carrier. Products number objects and
//! morphisms in mixed radix, so `(a, b)` in `A × B` is `a * |B| + b`; the
//! opposite keeps every id and swaps endpoints. As a consequence
//! `op(op(A)) == A` and `op(A × B) == op(A) × op(B)` hold on the nose.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::calculus::{Presheaf, SetPresheaf};
use crate::enrichment::{Elem, Quantale};
use crate::error::{Error, Result};
use crate::search::{refine_colours, NatProblem};

/// Default cap on candidate assignments explored by any witness search.
pub const DEFAULT_SEARCH_CAP: u64 = 1_000_000;

const NONE: usize = usize::MAX;

/// Which realization of V a category is enriched in.
#[derive(Clone, Debug)]
pub enum Backend {
    FinSet,
    Quantale(Arc<Quantale>),
}

impl PartialEq for Backend {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Backend::FinSet, Backend::FinSet) => true,
            (Backend::Quantale(a), Backend::Quantale(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::FinSet => write!(f, "finset"),
            Backend::Quantale(q) => write!(f, "quantale:{}", q.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Morphism {
    pub src: usize,
    pub tgt: usize,
    pub label: String,
}

/// Reference to a morphism in raw category data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MorRef {
    /// The identity on whichever object makes the entry well typed.
    Id,
    /// Index into [`CategoryData::morphisms`].
    Gen(usize),
}

/// Unvalidated ordinary category: objects, non-identity morphisms, and the
/// composite `g ∘ f` of every composable pair of non-identity morphisms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CategoryData {
    pub objects: Vec<String>,
    pub morphisms: Vec<Morphism>,
    /// Entries `(g, f, g ∘ f)` with `g` and `f` indices into `morphisms`.
    pub compositions: Vec<(usize, usize, MorRef)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum CategoryViolation {
    DanglingObject { morphism: String, object: usize },
    DanglingMorphism { index: usize },
    NotComposable { g: String, f: String },
    MissingComposite { g: String, f: String },
    DuplicateComposite { g: String, f: String },
    WrongEndpoints { g: String, f: String, composite: String },
    NotAssociative { h: String, g: String, f: String },
    HomOutOfRange { x: usize, y: usize },
    IdentityNotBelowHom { object: usize },
    CompositionNotBelowHom { x: usize, y: usize, z: usize },
}

impl fmt::Display for CategoryViolation {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CategoryViolation::*;
        match self {
            DanglingObject { morphism, object } => {
                write!(out, "morphism {morphism} refers to missing object {object}")
            }
            DanglingMorphism { index } => write!(out, "composition refers to missing morphism {index}"),
            NotComposable { g, f } => write!(out, "{g} ∘ {f} listed but not composable"),
            MissingComposite { g, f } => write!(out, "no composite given for {g} ∘ {f}"),
            DuplicateComposite { g, f } => write!(out, "two composites given for {g} ∘ {f}"),
            WrongEndpoints { g, f, composite } => {
                write!(out, "{g} ∘ {f} = {composite} has the wrong endpoints")
            }
            NotAssociative { h, g, f } => write!(out, "({h} ∘ {g}) ∘ {f} != {h} ∘ ({g} ∘ {f})"),
            HomOutOfRange { x, y } => write!(out, "hom({x}, {y}) is not a carrier element"),
            IdentityNotBelowHom { object } => write!(out, "unit is not below hom({object}, {object})"),
            CompositionNotBelowHom { x, y, z } => {
                write!(out, "hom({y},{z}) ⊗ hom({x},{y}) is not below hom({x},{z})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Category {
    objects: Vec<String>,
    body: Body,
}

#[derive(Clone, Debug, PartialEq)]
enum Body {
    Ordinary(Ordinary),
    Enriched { quantale: Arc<Quantale>, hom: Vec<Elem> },
}

#[derive(Clone, Debug, PartialEq)]
struct Ordinary {
    morphisms: Vec<Morphism>,
    identities: Vec<usize>,
    compose: Vec<usize>,
    hom: Vec<Vec<usize>>,
}

impl Ordinary {
    fn assemble(n: usize, morphisms: Vec<Morphism>, identities: Vec<usize>, compose: Vec<usize>) -> Self {
        let mut hom = vec![Vec::new(); n * n];
        for (id, m) in morphisms.iter().enumerate() {
            hom[m.src * n + m.tgt].push(id);
        }
        Ordinary { morphisms, identities, compose, hom }
    }
}

/// Validates raw category data: endpoints, totality of the composition table,
/// and associativity. Identities are implicit and unital by construction.
pub fn check_category(data: &CategoryData) -> Result<(), CategoryViolation> {
    Category::from_data(data).map(|_| ())
}

impl Category {
    /// Builds an ordinary category. Identities receive ids `0..n` (the
    /// identity of object `x` is `x`); listed morphisms follow in order.
    pub fn from_data(data: &CategoryData) -> Result<Self, CategoryViolation> {
        let n = data.objects.len();
        let mut morphisms: Vec<Morphism> = data
            .objects
            .iter()
            .enumerate()
            .map(|(x, name)| Morphism { src: x, tgt: x, label: format!("id_{name}") })
            .collect();
        for m in &data.morphisms {
            for object in [m.src, m.tgt] {
                if object >= n {
                    return Err(CategoryViolation::DanglingObject { morphism: m.label.clone(), object });
                }
            }
            morphisms.push(m.clone());
        }
        let total = morphisms.len();
        let mut compose = vec![NONE; total * total];
        for x in 0..n {
            for f in 0..total {
                if morphisms[f].tgt == x {
                    compose[x * total + f] = f;
                }
                if morphisms[f].src == x {
                    compose[f * total + x] = f;
                }
            }
        }
        let label = |i: usize| data.morphisms[i].label.clone();
        for &(g, f, h) in &data.compositions {
            for idx in [g, f] {
                if idx >= data.morphisms.len() {
                    return Err(CategoryViolation::DanglingMorphism { index: idx });
                }
            }
            let (mg, mf) = (&data.morphisms[g], &data.morphisms[f]);
            if mf.tgt != mg.src {
                return Err(CategoryViolation::NotComposable { g: label(g), f: label(f) });
            }
            let h_id = match h {
                MorRef::Id => mf.src,
                MorRef::Gen(i) if i < data.morphisms.len() => n + i,
                MorRef::Gen(i) => return Err(CategoryViolation::DanglingMorphism { index: i }),
            };
            if morphisms[h_id].src != mf.src || morphisms[h_id].tgt != mg.tgt {
                return Err(CategoryViolation::WrongEndpoints {
                    g: label(g),
                    f: label(f),
                    composite: morphisms[h_id].label.clone(),
                });
            }
            let slot = &mut compose[(n + g) * total + (n + f)];
            if *slot != NONE {
                return Err(CategoryViolation::DuplicateComposite { g: label(g), f: label(f) });
            }
            *slot = h_id;
        }
        for g in n..total {
            for f in n..total {
                if morphisms[f].tgt == morphisms[g].src && compose[g * total + f] == NONE {
                    return Err(CategoryViolation::MissingComposite {
                        g: morphisms[g].label.clone(),
                        f: morphisms[f].label.clone(),
                    });
                }
            }
        }
        for h in 0..total {
            for g in 0..total {
                let hg = compose[h * total + g];
                if hg == NONE {
                    continue;
                }
                for f in 0..total {
                    let gf = compose[g * total + f];
                    if gf == NONE {
                        continue;
                    }
                    if compose[hg * total + f] != compose[h * total + gf] {
                        return Err(CategoryViolation::NotAssociative {
                            h: morphisms[h].label.clone(),
                            g: morphisms[g].label.clone(),
                            f: morphisms[f].label.clone(),
                        });
                    }
                }
            }
        }
        let identities = (0..n).collect();
        Ok(Category {
            objects: data.objects.clone(),
            body: Body::Ordinary(Ordinary::assemble(n, morphisms, identities, compose)),
        })
    }

    /// Builds a quantale-enriched category from its hom matrix (`hom[x * n + y]`).
    pub fn enriched(quantale: Arc<Quantale>, objects: Vec<String>, hom: Vec<Elem>) -> Result<Self, CategoryViolation> {
        let n = objects.len();
        let q = &quantale;
        if hom.len() != n * n {
            return Err(CategoryViolation::HomOutOfRange { x: n, y: n });
        }
        for x in 0..n {
            for y in 0..n {
                if hom[x * n + y] >= q.size() {
                    return Err(CategoryViolation::HomOutOfRange { x, y });
                }
            }
        }
        for x in 0..n {
            if !q.leq(q.unit(), hom[x * n + x]) {
                return Err(CategoryViolation::IdentityNotBelowHom { object: x });
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if !q.leq(q.tensor(hom[y * n + z], hom[x * n + y]), hom[x * n + z]) {
                        return Err(CategoryViolation::CompositionNotBelowHom { x, y, z });
                    }
                }
            }
        }
        Ok(Category { objects, body: Body::Enriched { quantale, hom } })
    }

    /// The one-object, one-morphism category.
    pub fn terminal(backend: &Backend) -> Self {
        Self::discrete(backend, &["*".to_string()])
    }

    pub fn discrete(backend: &Backend, labels: &[String]) -> Self {
        Self::poset(backend, labels, &[]).expect("discrete order is a poset")
    }

    /// The category of a partial order given by its strict pairs `(x, y)`,
    /// `x < y`. The relation must already be transitive.
    pub fn poset(backend: &Backend, labels: &[String], below: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        let mut le = vec![false; n * n];
        for x in 0..n {
            le[x * n + x] = true;
        }
        for &(x, y) in below {
            if x >= n || y >= n {
                return Err(Error::Parameter(format!("order pair ({x}, {y}) out of range")));
            }
            le[x * n + y] = true;
        }
        match backend {
            Backend::Quantale(q) => {
                let hom = le.iter().map(|&b| if b { q.unit() } else { q.bottom() }).collect();
                Category::enriched(q.clone(), labels.to_vec(), hom).map_err(Error::Category)
            }
            Backend::FinSet => {
                let mut morphisms = Vec::new();
                let mut data = CategoryData { objects: labels.to_vec(), ..Default::default() };
                let mut index = vec![NONE; n * n];
                for x in 0..n {
                    for y in 0..n {
                        if x != y && le[x * n + y] {
                            if le[y * n + x] {
                                return Err(Error::Parameter("order is not antisymmetric".into()));
                            }
                            index[x * n + y] = morphisms.len();
                            morphisms.push(Morphism { src: x, tgt: y, label: format!("{}<{}", labels[x], labels[y]) });
                        }
                    }
                }
                for (g, mg) in morphisms.iter().enumerate() {
                    for (f, mf) in morphisms.iter().enumerate() {
                        if mf.tgt == mg.src {
                            let h = index[mf.src * n + mg.tgt];
                            if h == NONE {
                                return Err(Error::Parameter("order is not transitive".into()));
                            }
                            data.compositions.push((g, f, MorRef::Gen(h)));
                        }
                    }
                }
                data.morphisms = morphisms;
                Category::from_data(&data).map_err(Error::Category)
            }
        }
    }

    /// The walking arrow `0 → 1`.
    pub fn walking_arrow(backend: &Backend) -> Self {
        Self::poset(backend, &["0".into(), "1".into()], &[(0, 1)]).expect("valid order")
    }

    /// One-object category whose morphisms are the elements of a monoid with
    /// multiplication `table[a][b] = a·b` (composite `a ∘ b`).
    pub fn delooping(elements: &[String], table: &[Vec<usize>], unit: usize) -> Result<Self> {
        let k = elements.len();
        if unit >= k || table.len() != k || table.iter().any(|r| r.len() != k || r.iter().any(|&v| v >= k)) {
            return Err(Error::Parameter("monoid table malformed".into()));
        }
        // generator index for every non-unit element
        let gens: Vec<usize> = (0..k).filter(|&e| e != unit).collect();
        let gen_of = |e: usize| gens.iter().position(|&g| g == e);
        let mut data = CategoryData { objects: vec!["*".into()], ..Default::default() };
        data.morphisms = gens.iter().map(|&e| Morphism { src: 0, tgt: 0, label: elements[e].clone() }).collect();
        for (gi, &g) in gens.iter().enumerate() {
            for (fi, &f) in gens.iter().enumerate() {
                let h = match gen_of(table[g][f]) {
                    Some(i) => MorRef::Gen(i),
                    None => MorRef::Id,
                };
                data.compositions.push((gi, fi, h));
            }
        }
        Category::from_data(&data).map_err(Error::Category)
    }

    pub fn backend(&self) -> Backend {
        match &self.body {
            Body::Ordinary(_) => Backend::FinSet,
            Body::Enriched { quantale, .. } => Backend::Quantale(quantale.clone()),
        }
    }

    pub fn quantale(&self) -> Option<&Arc<Quantale>> {
        match &self.body {
            Body::Ordinary(_) => None,
            Body::Enriched { quantale, .. } => Some(quantale),
        }
    }

    pub fn is_ordinary(&self) -> bool {
        matches!(self.body, Body::Ordinary(_))
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn object_label(&self, x: usize) -> &str {
        &self.objects[x]
    }

    fn ordinary(&self) -> &Ordinary {
        match &self.body {
            Body::Ordinary(o) => o,
            Body::Enriched { .. } => panic!("morphism query on a quantale-enriched category"),
        }
    }

    /// All morphisms (ordinary categories); empty for enriched categories.
    pub fn morphisms(&self) -> &[Morphism] {
        match &self.body {
            Body::Ordinary(o) => &o.morphisms,
            Body::Enriched { .. } => &[],
        }
    }

    pub fn morphism_count(&self) -> usize {
        self.morphisms().len()
    }

    pub fn identity(&self, x: usize) -> usize {
        self.ordinary().identities[x]
    }

    pub fn is_identity(&self, f: usize) -> bool {
        let o = self.ordinary();
        o.identities[o.morphisms[f].src] == f
    }

    /// `g ∘ f`, if composable.
    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        let o = self.ordinary();
        let h = o.compose[g * o.morphisms.len() + f];
        (h != NONE).then_some(h)
    }

    /// Morphisms `x → y` in id order.
    pub fn hom(&self, x: usize, y: usize) -> &[usize] {
        let o = self.ordinary();
        &o.hom[x * self.objects.len() + y]
    }

    /// Hom object of an enriched category.
    pub fn hom_value(&self, x: usize, y: usize) -> Elem {
        match &self.body {
            Body::Enriched { hom, .. } => hom[x * self.objects.len() + y],
            Body::Ordinary(_) => panic!("hom_value on an ordinary category"),
        }
    }

    /// Arrows `x → y` usable as 2-cells: every morphism of an ordinary
    /// category, and every pair with `unit <= hom(x, y)` when enriched.
    pub fn has_arrow(&self, x: usize, y: usize) -> bool {
        match &self.body {
            Body::Ordinary(_) => !self.hom(x, y).is_empty(),
            Body::Enriched { quantale, .. } => quantale.leq(quantale.unit(), self.hom_value(x, y)),
        }
    }

    pub fn find_morphism(&self, label: &str) -> Option<usize> {
        self.morphisms().iter().position(|m| m.label == label)
    }

    /// The opposite category; ids are unchanged.
    pub fn op(&self) -> Category {
        let n = self.objects.len();
        let body = match &self.body {
            Body::Ordinary(o) => {
                let m = o.morphisms.len();
                let morphisms = o
                    .morphisms
                    .iter()
                    .map(|mm| Morphism { src: mm.tgt, tgt: mm.src, label: mm.label.clone() })
                    .collect();
                let mut compose = vec![NONE; m * m];
                for g in 0..m {
                    for f in 0..m {
                        compose[g * m + f] = o.compose[f * m + g];
                    }
                }
                Body::Ordinary(Ordinary::assemble(n, morphisms, o.identities.clone(), compose))
            }
            Body::Enriched { quantale, hom } => {
                let mut h = vec![0; n * n];
                for x in 0..n {
                    for y in 0..n {
                        h[x * n + y] = hom[y * n + x];
                    }
                }
                Body::Enriched { quantale: quantale.clone(), hom: h }
            }
        };
        Category { objects: self.objects.clone(), body }
    }

    /// The tensor product `self ⊗ other` (cartesian product for ordinary
    /// categories, homs tensored for enriched ones).
    pub fn product(&self, other: &Category) -> Result<Category> {
        if self.backend() != other.backend() {
            return Err(Error::BackendMismatch(format!(
                "product of {} and {} categories",
                self.backend(),
                other.backend()
            )));
        }
        let (n1, n2) = (self.object_count(), other.object_count());
        let objects = if n1 == 1 && self.objects[0] == "*" {
            other.objects.clone()
        } else if n2 == 1 && other.objects[0] == "*" {
            self.objects.clone()
        } else {
            self.objects.iter().flat_map(|a| other.objects.iter().map(move |b| format!("({a},{b})"))).collect()
        };
        let body = match (&self.body, &other.body) {
            (Body::Ordinary(a), Body::Ordinary(b)) => {
                let (m1, m2) = (a.morphisms.len(), b.morphisms.len());
                let mut morphisms = Vec::with_capacity(m1 * m2);
                for f in &a.morphisms {
                    for g in &b.morphisms {
                        morphisms.push(Morphism {
                            src: f.src * n2 + g.src,
                            tgt: f.tgt * n2 + g.tgt,
                            label: format!("({},{})", f.label, g.label),
                        });
                    }
                }
                let m = m1 * m2;
                let mut compose = vec![NONE; m * m];
                for g1 in 0..m1 {
                    for f1 in 0..m1 {
                        let h1 = a.compose[g1 * m1 + f1];
                        if h1 == NONE {
                            continue;
                        }
                        for g2 in 0..m2 {
                            for f2 in 0..m2 {
                                let h2 = b.compose[g2 * m2 + f2];
                                if h2 != NONE {
                                    compose[(g1 * m2 + g2) * m + (f1 * m2 + f2)] = h1 * m2 + h2;
                                }
                            }
                        }
                    }
                }
                let identities = (0..n1)
                    .flat_map(|x| (0..n2).map(move |y| (x, y)))
                    .map(|(x, y)| a.identities[x] * m2 + b.identities[y])
                    .collect();
                Body::Ordinary(Ordinary::assemble(n1 * n2, morphisms, identities, compose))
            }
            (Body::Enriched { quantale, hom: h1 }, Body::Enriched { hom: h2, .. }) => {
                let n = n1 * n2;
                let mut hom = vec![0; n * n];
                for a in 0..n1 {
                    for b in 0..n2 {
                        for a2 in 0..n1 {
                            for b2 in 0..n2 {
                                hom[(a * n2 + b) * n + (a2 * n2 + b2)] =
                                    quantale.tensor(h1[a * n1 + a2], h2[b * n2 + b2]);
                            }
                        }
                    }
                }
                Body::Enriched { quantale: quantale.clone(), hom }
            }
            _ => unreachable!("backends checked above"),
        };
        Ok(Category { objects, body })
    }

    /// Left-nested product of several categories.
    pub fn product_all(factors: &[&Category]) -> Result<Category> {
        let (first, rest) = factors.split_first().ok_or_else(|| Error::Parameter("empty product".into()))?;
        rest.iter().try_fold((*first).clone(), |acc, c| acc.product(c))
    }
}

/// A functor between finite categories. For enriched categories only the
/// object map is meaningful; its certificate is the hom inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinFunctor {
    pub objects: Vec<usize>,
    pub morphisms: Vec<usize>,
}

impl FinFunctor {
    pub fn identity(c: &Category) -> Self {
        FinFunctor { objects: (0..c.object_count()).collect(), morphisms: (0..c.morphism_count()).collect() }
    }

    pub fn constant(dom: &Category, cod: &Category, object: usize) -> Self {
        let morphisms = if cod.is_ordinary() { vec![cod.identity(object); dom.morphism_count()] } else { Vec::new() };
        FinFunctor { objects: vec![object; dom.object_count()], morphisms }
    }

    /// Projection of an n-ary product onto a selection of its factors, in the
    /// order given by `pick` (factors may be reordered).
    pub fn projection(factors: &[&Category], pick: &[usize]) -> Self {
        let decode = |mut idx: usize, radix: &[usize]| {
            let mut digits = vec![0; radix.len()];
            for i in (0..radix.len()).rev() {
                digits[i] = idx % radix[i];
                idx /= radix[i];
            }
            digits
        };
        let encode = |digits: &[usize], radix: &[usize]| digits.iter().zip(radix).fold(0, |acc, (d, r)| acc * r + d);
        let obj_radix: Vec<usize> = factors.iter().map(|c| c.object_count()).collect();
        let mor_radix: Vec<usize> = factors.iter().map(|c| c.morphism_count()).collect();
        let pick_obj: Vec<usize> = pick.iter().map(|&i| obj_radix[i]).collect();
        let pick_mor: Vec<usize> = pick.iter().map(|&i| mor_radix[i]).collect();
        let total_obj: usize = obj_radix.iter().product();
        let objects = (0..total_obj)
            .map(|o| {
                let d = decode(o, &obj_radix);
                encode(&pick.iter().map(|&i| d[i]).collect::<Vec<_>>(), &pick_obj)
            })
            .collect();
        let morphisms = if factors.iter().all(|c| c.is_ordinary()) {
            let total_mor: usize = mor_radix.iter().product();
            (0..total_mor)
                .map(|m| {
                    let d = decode(m, &mor_radix);
                    encode(&pick.iter().map(|&i| d[i]).collect::<Vec<_>>(), &pick_mor)
                })
                .collect()
        } else {
            Vec::new()
        };
        FinFunctor { objects, morphisms }
    }

    pub fn check(&self, dom: &Category, cod: &Category) -> Result<(), FunctorViolation> {
        if self.objects.len() != dom.object_count() {
            return Err(FunctorViolation::UnmappedObject { object: self.objects.len().min(dom.object_count()) });
        }
        if let Some(&o) = self.objects.iter().find(|&&o| o >= cod.object_count()) {
            return Err(FunctorViolation::DanglingObject { object: o });
        }
        if !dom.is_ordinary() {
            let q = dom.quantale().unwrap();
            for x in 0..dom.object_count() {
                for y in 0..dom.object_count() {
                    if !q.leq(dom.hom_value(x, y), cod.hom_value(self.objects[x], self.objects[y])) {
                        return Err(FunctorViolation::NotMonotone { x, y });
                    }
                }
            }
            return Ok(());
        }
        if self.morphisms.len() != dom.morphism_count() {
            return Err(FunctorViolation::UnmappedMorphism {
                morphism: self.morphisms.len().min(dom.morphism_count()),
            });
        }
        for (f, m) in dom.morphisms().iter().enumerate() {
            let image = self.morphisms[f];
            if image >= cod.morphism_count() {
                return Err(FunctorViolation::UnmappedMorphism { morphism: f });
            }
            let im = &cod.morphisms()[image];
            if im.src != self.objects[m.src] || im.tgt != self.objects[m.tgt] {
                return Err(FunctorViolation::WrongEndpoints { morphism: f });
            }
        }
        for x in 0..dom.object_count() {
            if self.morphisms[dom.identity(x)] != cod.identity(self.objects[x]) {
                return Err(FunctorViolation::IdentityNotPreserved { object: x });
            }
        }
        for g in 0..dom.morphism_count() {
            for f in 0..dom.morphism_count() {
                if let Some(h) = dom.compose(g, f) {
                    if cod.compose(self.morphisms[g], self.morphisms[f]) != Some(self.morphisms[h]) {
                        return Err(FunctorViolation::CompositionNotPreserved { g, f });
                    }
                }
            }
        }
        Ok(())
    }
}

/// A natural transformation between two functors `dom → cod`: one component
/// morphism of `cod` per object of `dom` (ordinary categories only).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinNat {
    pub components: Vec<usize>,
}

impl FinNat {
    pub fn check(
        &self,
        dom: &Category,
        cod: &Category,
        source: &FinFunctor,
        target: &FinFunctor,
    ) -> Result<(), FunctorViolation> {
        if !dom.is_ordinary() {
            // enriched: the unique candidate exists iff unit <= hom(Fx, Gx)
            let q = dom.quantale().unwrap();
            for x in 0..dom.object_count() {
                if !q.leq(q.unit(), cod.hom_value(source.objects[x], target.objects[x])) {
                    return Err(FunctorViolation::MissingComponent { object: x });
                }
            }
            return Ok(());
        }
        if self.components.len() != dom.object_count() {
            return Err(FunctorViolation::MissingComponent { object: self.components.len().min(dom.object_count()) });
        }
        for x in 0..dom.object_count() {
            let c = self.components[x];
            if c >= cod.morphism_count() {
                return Err(FunctorViolation::MissingComponent { object: x });
            }
            let m = &cod.morphisms()[c];
            if m.src != source.objects[x] || m.tgt != target.objects[x] {
                return Err(FunctorViolation::MissingComponent { object: x });
            }
        }
        for (f, m) in dom.morphisms().iter().enumerate() {
            let left = cod.compose(target.morphisms[f], self.components[m.src]);
            let right = cod.compose(self.components[m.tgt], source.morphisms[f]);
            if left != right {
                return Err(FunctorViolation::NaturalityFails { morphism: f, src: m.src, tgt: m.tgt });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum FunctorViolation {
    UnmappedObject {
        object: usize,
    },
    UnmappedMorphism {
        morphism: usize,
    },
    DanglingObject {
        object: usize,
    },
    WrongEndpoints {
        morphism: usize,
    },
    IdentityNotPreserved {
        object: usize,
    },
    CompositionNotPreserved {
        g: usize,
        f: usize,
    },
    NotMonotone {
        x: usize,
        y: usize,
    },
    MissingComponent {
        object: usize,
    },
    /// The square for `morphism: src → tgt` does not commute.
    NaturalityFails {
        morphism: usize,
        src: usize,
        tgt: usize,
    },
}

impl fmt::Display for FunctorViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(self).unwrap_or_default())
    }
}

/// Certificate for an isomorphism claim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Componentwise bijections, `components[x][i]` the image of element `i`.
    NaturalIso { components: Vec<Vec<usize>> },
    /// Quantale backend: the two presheaves are equal pointwise.
    OrderEquality,
}

impl Witness {
    pub fn inverse(&self) -> Witness {
        match self {
            Witness::OrderEquality => Witness::OrderEquality,
            Witness::NaturalIso { components } => Witness::NaturalIso {
                components: components
                    .iter()
                    .map(|c| {
                        let mut inv = vec![0; c.len()];
                        for (i, &j) in c.iter().enumerate() {
                            inv[j] = i;
                        }
                        inv
                    })
                    .collect(),
            },
        }
    }
}

/// Searches for a natural isomorphism `f ≅ g` between presheaves on `cat`.
/// The search is deterministic, so equal inputs give equal witnesses. `Ok(None)` is a proof of
/// non-isomorphism; running past `cap` is an error rather than a `None`.
pub fn find_natural_iso(cat: &Category, f: &Presheaf, g: &Presheaf, cap: u64) -> Result<Option<Witness>> {
    match (f, g) {
        (Presheaf::Quantale(a), Presheaf::Quantale(b)) => Ok((a == b).then_some(Witness::OrderEquality)),
        (Presheaf::Set(a), Presheaf::Set(b)) => {
            if a.sizes() != b.sizes() {
                return Ok(None);
            }
            if a == b {
                let components = a.sizes().iter().map(|&s| (0..s).collect()).collect();
                return Ok(Some(Witness::NaturalIso { components }));
            }
            if a.signature(cat) != b.signature(cat) {
                return Ok(None);
            }
            let (ca, cb) = refine_colours(cat, a, b);
            let histogram = |p: &SetPresheaf, c: &[u32]| {
                let offsets = NatProblem::offsets(p);
                (0..p.sizes().len())
                    .map(|x| {
                        let mut v = c[offsets[x]..offsets[x + 1]].to_vec();
                        v.sort_unstable();
                        v
                    })
                    .collect::<Vec<_>>()
            };
            if histogram(a, &ca) != histogram(b, &cb) {
                return Ok(None);
            }
            let problem = NatProblem { cat, src: a, tgt: b, injective: true, fixed: None, colours: Some((&ca, &cb)) };
            let mut found = None;
            problem.solve(cap, |theta| {
                found = Some(theta.to_vec());
                false
            })?;
            Ok(found.map(|flat| {
                let offsets = NatProblem::offsets(a);
                Witness::NaturalIso {
                    components: (0..a.sizes().len()).map(|x| flat[offsets[x]..offsets[x + 1]].to_vec()).collect(),
                }
            }))
        }
        _ => Err(Error::BackendMismatch("iso search across backends".into())),
    }
}

/// Verifies a witness independently of how it was found.
pub fn verify_witness(cat: &Category, f: &Presheaf, g: &Presheaf, w: &Witness) -> bool {
    match (f, g, w) {
        (Presheaf::Quantale(a), Presheaf::Quantale(b), Witness::OrderEquality) => a == b,
        (Presheaf::Set(a), Presheaf::Set(b), Witness::NaturalIso { components }) => {
            if components.len() != a.sizes().len() {
                return false;
            }
            for (x, c) in components.iter().enumerate() {
                let mut seen = vec![false; b.size(x)];
                if c.len() != a.size(x) || c.len() != b.size(x) {
                    return false;
                }
                for &j in c {
                    if j >= seen.len() || std::mem::replace(&mut seen[j], true) {
                        return false;
                    }
                }
            }
            cat.morphisms().iter().enumerate().all(|(fm, m)| {
                (0..a.size(m.src)).all(|u| components[m.tgt][a.action(fm)[u]] == b.action(fm)[components[m.src][u]])
            })
        }
        _ => false,
    }
}
