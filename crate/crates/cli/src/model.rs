//! Model files: named quantales, categories, presheaves, probicategories,
//! Σ sets, reflections and extension setups, as one JSON document.
//!
//! Categories and probicategories are stored as recipes and built for a
//! backend on demand, so one model can be run over several backends.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::path::Path;
use std::sync::Arc;

use biclosed::calculus::{enumerate_presheaves, Presheaf, SetPresheaf};
use biclosed::enrichment::{make_quantale, Quantale, QuantaleKind, QuantaleTables};
use biclosed::fincat::{Backend, Category, CategoryData, FinFunctor, MorRef, Morphism};
use biclosed::localise::{SigmaCell, SigmaSet};
use biclosed::probicat::{make_probicat, Coherence, MonoidalData, ProbicatKind, Probicategory, TableData};
use biclosed::reflect::ClosureReflector;
use serde::de::{Deserializer, MapAccess, Visitor};
use serde::Deserialize;
use thiserror::Error;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unresolved reference: {0}")]
    Unresolved(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Engine(#[from] biclosed::Error),
}

type Result<T, E = ModelError> = std::result::Result<T, E>;

/// A JSON object whose keys must be unique.
#[derive(Clone, Debug)]
pub struct Section<T>(pub BTreeMap<String, T>);

impl<T> Default for Section<T> {
    fn default() -> Self {
        Section(BTreeMap::new())
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Section<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<T>(PhantomData<T>);
        impl<'de, T: Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = Section<T>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object of named entries")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut out = BTreeMap::new();
                while let Some(key) = map.next_key::<String>()? {
                    if out.contains_key(&key) {
                        return Err(serde::de::Error::custom(format!("duplicate id `{key}`")));
                    }
                    let value = map.next_value()?;
                    out.insert(key, value);
                }
                Ok(Section(out))
            }
        }
        d.deserialize_map(V(PhantomData))
    }
}

/// An object or element given by label or by position.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Ref {
    Index(usize),
    Label(String),
}

impl fmt::Display for Ref {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Ref::Index(i) => write!(f, "{i}"),
            Ref::Label(s) => write!(f, "`{s}`"),
        }
    }
}

impl Ref {
    fn resolve(&self, labels: &[String], what: &str) -> Result<usize> {
        match self {
            Ref::Index(i) if *i < labels.len() => Ok(*i),
            Ref::Label(s) => {
                labels.iter().position(|l| l == s).ok_or_else(|| ModelError::Unresolved(format!("{what} {self}")))
            }
            _ => Err(ModelError::Unresolved(format!("{what} {self}"))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QuantaleSpec {
    Boolean,
    Chain { n: usize },
    Tropical { cap: usize },
    Tables { carrier: Vec<String>, leq: Vec<(Ref, Ref)>, tensor: Vec<(Ref, Ref, Ref)>, unit: Ref },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismSpec {
    pub label: String,
    pub src: Ref,
    pub tgt: Ref,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CategorySpec {
    Terminal,
    Discrete {
        objects: Vec<String>,
    },
    WalkingArrow,
    Poset {
        objects: Vec<String>,
        below: Vec<(Ref, Ref)>,
    },
    /// Set backend only. Compositions are `[g, f, g∘f]` by label, `"id"` for
    /// an identity.
    Ordinary {
        objects: Vec<String>,
        morphisms: Vec<MorphismSpec>,
        #[serde(default)]
        compositions: Vec<(String, String, String)>,
    },
    /// Quantale backend only.
    Enriched {
        quantale: String,
        objects: Vec<String>,
        hom: Vec<Vec<Ref>>,
    },
    Delooping {
        elements: Vec<String>,
        table: Vec<Vec<Ref>>,
        unit: Ref,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Actions {
    /// Non-identity morphisms by label.
    ByLabel(BTreeMap<String, Vec<usize>>),
    /// Every morphism in id order, identities included.
    Dense(Vec<Vec<usize>>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PresheafSpec {
    Quantale {
        #[serde(default)]
        category: Option<String>,
        values: Vec<Ref>,
    },
    Set {
        #[serde(default)]
        category: Option<String>,
        sizes: Vec<usize>,
        #[serde(default)]
        actions: Option<Actions>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceSpec {
    pub associator: Vec<String>,
    pub left_unitor: Vec<String>,
    pub right_unitor: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    /// Object names `[x, y, z]` for `P`, `[x]` for `J`.
    pub at: Vec<Ref>,
    /// Quantale backend: the 1-cells `[a, b, c]` (`[a]` for `J`) and value.
    #[serde(default)]
    pub cell: Option<Vec<Ref>>,
    #[serde(default)]
    pub value: Option<Ref>,
    /// Set backend: the whole presheaf on the structure functor's domain.
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub actions: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbicatSpec {
    DeloopedMonoid {
        backend: String,
        elements: Vec<String>,
        table: Vec<Vec<Ref>>,
        unit: Ref,
    },
    Monoidal {
        backend: String,
        category: String,
        table: Vec<Vec<Ref>>,
        unit: Ref,
        /// Tensor on morphisms, `[f][g]` by label; derived for thin categories.
        #[serde(default)]
        tensor_morphisms: Option<Vec<Vec<String>>>,
        #[serde(default)]
        coherence: Option<CoherenceSpec>,
    },
    Manifold {
        backend: String,
        objects: Vec<String>,
        categories: Vec<String>,
    },
    Table {
        backend: String,
        ob: Vec<String>,
        /// Category names, row `x`, column `y`.
        hom: Vec<Vec<String>>,
        #[serde(rename = "P", default)]
        p: Vec<TableEntry>,
        #[serde(rename = "J", default)]
        j: Vec<TableEntry>,
    },
}

impl ProbicatSpec {
    pub fn backend(&self) -> &str {
        match self {
            ProbicatSpec::DeloopedMonoid { backend, .. }
            | ProbicatSpec::Monoidal { backend, .. }
            | ProbicatSpec::Manifold { backend, .. }
            | ProbicatSpec::Table { backend, .. } => backend,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub x: Ref,
    pub y: Ref,
    pub src: Ref,
    pub tgt: Ref,
    /// Set backend: the morphism label; defaults to the unique non-identity
    /// morphism `src → tgt`. Ignored on the quantale backend.
    #[serde(default)]
    pub morphism: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaSpec {
    pub probicategory: String,
    pub cells: Vec<CellSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomList {
    pub hom: (Ref, Ref),
    pub objects: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Derive {
    Localise,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectionSpec {
    pub probicategory: String,
    #[serde(default)]
    pub derive: Option<Derive>,
    #[serde(default)]
    pub sigma: Option<String>,
    /// Explicit local objects (quantale backend); homs not listed are
    /// reflected onto themselves.
    #[serde(default)]
    pub local: Vec<HomList>,
    #[serde(default)]
    pub cogens: Vec<HomList>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionSpec {
    pub probicategory: String,
    /// `presheaves` or the name of a reflection.
    #[serde(default = "default_target")]
    pub target: String,
    /// `yoneda`, `localised` (with a `derive: localise` target), or presheaf
    /// names for `Ñ_xy` on `op(A_xy) × A_xy`, one per hom in row order.
    pub n: NSpec,
    #[serde(default = "yes")]
    pub require_density: bool,
}

fn default_target() -> String {
    "presheaves".into()
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum NSpec {
    Named(String),
    Family(Vec<String>),
}

fn default_schema() -> u32 {
    SCHEMA
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default = "default_schema")]
    pub schema: u32,
    #[serde(default)]
    pub quantales: Section<QuantaleSpec>,
    #[serde(default)]
    pub categories: Section<CategorySpec>,
    #[serde(default)]
    pub presheaves: Section<PresheafSpec>,
    #[serde(default)]
    pub probicategories: Section<ProbicatSpec>,
    #[serde(default)]
    pub sigma_sets: Section<SigmaSpec>,
    #[serde(default)]
    pub reflections: Section<ReflectionSpec>,
    #[serde(default)]
    pub extensions: Section<ExtensionSpec>,
}

/// A validated model with its quantales built.
pub struct Model {
    pub file: ModelFile,
    pub quantales: BTreeMap<String, Arc<Quantale>>,
}

pub fn parse_model(path: &Path) -> Result<Model> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
    parse_model_str(&text)
}

pub fn parse_model_str(text: &str) -> Result<Model> {
    // syntax first, so malformed JSON reports a position rather than a path
    serde_json::from_str::<serde::de::IgnoredAny>(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    // straight from the text: a `Value` would silently merge duplicate keys
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ModelFile = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| ModelError::Schema { path: e.path().to_string(), message: e.inner().to_string() })?;
    if file.schema != SCHEMA {
        return Err(ModelError::Schema {
            path: "schema".into(),
            message: format!("unsupported version {}", file.schema),
        });
    }
    let mut quantales = BTreeMap::new();
    for (name, spec) in &file.quantales.0 {
        quantales.insert(name.clone(), Arc::new(build_quantale(name, spec)?));
    }
    let model = Model { file, quantales };
    model.check_references()?;
    Ok(model)
}

fn build_quantale(name: &str, spec: &QuantaleSpec) -> Result<Quantale> {
    let q = match spec {
        QuantaleSpec::Boolean => make_quantale(QuantaleKind::Boolean)?,
        QuantaleSpec::Chain { n } => make_quantale(QuantaleKind::Chain(*n))?,
        QuantaleSpec::Tropical { cap } => make_quantale(QuantaleKind::Tropical(*cap))?,
        QuantaleSpec::Tables { carrier, leq, tensor, unit } => {
            let r = |x: &Ref| x.resolve(carrier, &format!("element of quantale `{name}`:"));
            let tables = QuantaleTables {
                labels: carrier.clone(),
                leq: leq.iter().map(|(a, b)| Ok((r(a)?, r(b)?))).collect::<Result<_>>()?,
                tensor: tensor.iter().map(|(a, b, c)| Ok((r(a)?, r(b)?, r(c)?))).collect::<Result<_>>()?,
                unit: r(unit)?,
            };
            Quantale::new(name, &tables).map_err(|v| ModelError::Engine(biclosed::Error::Quantale(v)))?
        }
    };
    Ok(q)
}

impl Model {
    fn check_references(&self) -> Result<()> {
        let f = &self.file;
        let backend = |b: &str, owner: &str| -> Result<()> {
            match b.strip_prefix("quantale:") {
                Some(q) if !self.quantales.contains_key(q) => {
                    Err(ModelError::Unresolved(format!("quantale `{q}` (backend of {owner})")))
                }
                Some(_) => Ok(()),
                None if b == "finset" => Ok(()),
                None => {
                    Err(ModelError::Invalid(format!("backend `{b}` of {owner}: expected `finset` or `quantale:NAME`")))
                }
            }
        };
        let category = |c: &str, owner: &str| -> Result<()> {
            if f.categories.0.contains_key(c) {
                Ok(())
            } else {
                Err(ModelError::Unresolved(format!("category `{c}` (in {owner})")))
            }
        };
        let probicat = |p: &str, owner: &str| -> Result<()> {
            if f.probicategories.0.contains_key(p) {
                Ok(())
            } else {
                Err(ModelError::Unresolved(format!("probicategory `{p}` (in {owner})")))
            }
        };
        let presheaf = |p: &str, owner: &str| -> Result<()> {
            if f.presheaves.0.contains_key(p) {
                Ok(())
            } else {
                Err(ModelError::Unresolved(format!("presheaf `{p}` (in {owner})")))
            }
        };
        for (name, spec) in &f.categories.0 {
            if let CategorySpec::Enriched { quantale, .. } = spec {
                if !self.quantales.contains_key(quantale) {
                    return Err(ModelError::Unresolved(format!("quantale `{quantale}` (in category `{name}`)")));
                }
            }
        }
        for (name, spec) in &f.presheaves.0 {
            let c = match spec {
                PresheafSpec::Quantale { category, .. } | PresheafSpec::Set { category, .. } => category,
            };
            if let Some(c) = c {
                category(c, &format!("presheaf `{name}`"))?;
            }
        }
        for (name, spec) in &f.probicategories.0 {
            let owner = format!("probicategory `{name}`");
            backend(spec.backend(), &owner)?;
            match spec {
                ProbicatSpec::Monoidal { category: c, .. } => category(c, &owner)?,
                ProbicatSpec::Manifold { categories, .. } => categories.iter().try_for_each(|c| category(c, &owner))?,
                ProbicatSpec::Table { hom, .. } => hom.iter().flatten().try_for_each(|c| category(c, &owner))?,
                ProbicatSpec::DeloopedMonoid { .. } => {}
            }
        }
        for (name, spec) in &f.sigma_sets.0 {
            probicat(&spec.probicategory, &format!("sigma set `{name}`"))?;
        }
        for (name, spec) in &f.reflections.0 {
            let owner = format!("reflection `{name}`");
            probicat(&spec.probicategory, &owner)?;
            if let Some(s) = &spec.sigma {
                if !f.sigma_sets.0.contains_key(s) {
                    return Err(ModelError::Unresolved(format!("sigma set `{s}` (in {owner})")));
                }
            }
            if spec.derive.is_some() && spec.sigma.is_none() {
                return Err(ModelError::Invalid(format!("{owner}: `derive: localise` needs `sigma`")));
            }
            for list in spec.local.iter().chain(&spec.cogens) {
                list.objects.iter().try_for_each(|p| presheaf(p, &owner))?;
            }
        }
        for (name, spec) in &f.extensions.0 {
            let owner = format!("extension `{name}`");
            probicat(&spec.probicategory, &owner)?;
            if spec.target != "presheaves" && !f.reflections.0.contains_key(&spec.target) {
                return Err(ModelError::Unresolved(format!("reflection `{}` (target of {owner})", spec.target)));
            }
            match &spec.n {
                NSpec::Named(n) if n == "yoneda" || n == "localised" => {}
                NSpec::Named(n) => return Err(ModelError::Invalid(format!("{owner}: unknown N `{n}`"))),
                NSpec::Family(names) => names.iter().try_for_each(|p| presheaf(p, &owner))?,
            }
        }
        Ok(())
    }

    /// `finset` or `quantale:NAME`.
    pub fn backend(&self, name: &str) -> Result<Backend> {
        match name.strip_prefix("quantale:") {
            Some(q) => self
                .quantales
                .get(q)
                .map(|q| Backend::Quantale(q.clone()))
                .ok_or_else(|| ModelError::Unresolved(format!("quantale `{q}`"))),
            None if name == "finset" => Ok(Backend::FinSet),
            None => Err(ModelError::Invalid(format!("backend `{name}`: expected `finset` or `quantale:NAME`"))),
        }
    }

    pub fn category(&self, name: &str, backend: &Backend) -> Result<Category> {
        let spec =
            self.file.categories.0.get(name).ok_or_else(|| ModelError::Unresolved(format!("category `{name}`")))?;
        let what = format!("object of category `{name}`:");
        let cat = match spec {
            CategorySpec::Terminal => Category::terminal(backend),
            CategorySpec::Discrete { objects } => Category::discrete(backend, objects),
            CategorySpec::WalkingArrow => Category::walking_arrow(backend),
            CategorySpec::Poset { objects, below } => {
                let pairs: Vec<(usize, usize)> = below
                    .iter()
                    .map(|(a, b)| Ok((a.resolve(objects, &what)?, b.resolve(objects, &what)?)))
                    .collect::<Result<_>>()?;
                Category::poset(backend, objects, &pairs)?
            }
            CategorySpec::Ordinary { objects, morphisms, compositions } => {
                if *backend != Backend::FinSet {
                    return Err(ModelError::Invalid(format!(
                        "category `{name}` is ordinary; it needs the finset backend"
                    )));
                }
                let morphisms: Vec<Morphism> = morphisms
                    .iter()
                    .map(|m| {
                        Ok(Morphism {
                            src: m.src.resolve(objects, &what)?,
                            tgt: m.tgt.resolve(objects, &what)?,
                            label: m.label.clone(),
                        })
                    })
                    .collect::<Result<_>>()?;
                let labels: Vec<String> = morphisms.iter().map(|m| m.label.clone()).collect();
                let gen = |l: &str| {
                    labels
                        .iter()
                        .position(|x| x == l)
                        .ok_or_else(|| ModelError::Unresolved(format!("morphism `{l}` of category `{name}`")))
                };
                let compositions = compositions
                    .iter()
                    .map(|(g, f, h)| Ok((gen(g)?, gen(f)?, if h == "id" { MorRef::Id } else { MorRef::Gen(gen(h)?) })))
                    .collect::<Result<_>>()?;
                let data = CategoryData { objects: objects.clone(), morphisms, compositions };
                Category::from_data(&data).map_err(biclosed::Error::Category)?
            }
            CategorySpec::Enriched { quantale, objects, hom } => {
                let q = &self.quantales[quantale];
                if *backend != Backend::Quantale(q.clone()) {
                    return Err(ModelError::Invalid(format!(
                        "category `{name}` is enriched in `{quantale}`; backend {backend} does not match"
                    )));
                }
                let n = objects.len();
                if hom.len() != n || hom.iter().any(|r| r.len() != n) {
                    return Err(ModelError::Invalid(format!("category `{name}`: hom table must be {n} × {n}")));
                }
                let values =
                    hom.iter().flatten().map(|v| v.resolve(q.labels(), "quantale element")).collect::<Result<_>>()?;
                Category::enriched(q.clone(), objects.clone(), values).map_err(biclosed::Error::Category)?
            }
            CategorySpec::Delooping { elements, table, unit } => {
                if *backend != Backend::FinSet {
                    return Err(ModelError::Invalid(format!(
                        "category `{name}` is a delooping; it needs the finset backend"
                    )));
                }
                let table = resolve_table(table, elements, &format!("element of `{name}`:"))?;
                Category::delooping(elements, &table, unit.resolve(elements, &what)?)?
            }
        };
        Ok(cat)
    }

    /// The named presheaf on `cat`.
    pub fn presheaf(&self, name: &str, cat: &Category) -> Result<Presheaf> {
        let spec =
            self.file.presheaves.0.get(name).ok_or_else(|| ModelError::Unresolved(format!("presheaf `{name}`")))?;
        let f = match (spec, cat.quantale()) {
            (PresheafSpec::Quantale { values, .. }, Some(q)) => Presheaf::Quantale(
                values.iter().map(|v| v.resolve(q.labels(), "quantale element")).collect::<Result<_>>()?,
            ),
            (PresheafSpec::Set { sizes, actions, .. }, None) => {
                let actions = match actions {
                    Some(Actions::Dense(a)) => a.clone(),
                    by_label => {
                        let empty = BTreeMap::new();
                        let map = match by_label {
                            Some(Actions::ByLabel(m)) => m,
                            _ => &empty,
                        };
                        if let Some(l) = map.keys().find(|l| cat.find_morphism(l).is_none()) {
                            return Err(ModelError::Unresolved(format!("morphism `{l}` (in presheaf `{name}`)")));
                        }
                        cat.morphisms()
                            .iter()
                            .enumerate()
                            .map(|(i, m)| match map.get(&m.label) {
                                Some(a) => Ok(a.clone()),
                                None if cat.is_identity(i) => Ok((0..sizes.get(m.src).copied().unwrap_or(0)).collect()),
                                None => Err(ModelError::Invalid(format!(
                                    "presheaf `{name}` has no action for `{}`",
                                    m.label
                                ))),
                            })
                            .collect::<Result<_>>()?
                    }
                };
                Presheaf::Set(
                    SetPresheaf::new(cat, sizes.clone(), actions)
                        .map_err(|e| ModelError::Invalid(format!("presheaf `{name}`: {e}")))?,
                )
            }
            _ => {
                return Err(ModelError::Invalid(format!("presheaf `{name}` does not match backend {}", cat.backend())))
            }
        };
        f.check(cat).map_err(|e| ModelError::Invalid(format!("presheaf `{name}`: {e}")))?;
        Ok(f)
    }

    pub fn probicategory_names(&self) -> Vec<&str> {
        self.file.probicategories.0.keys().map(String::as_str).collect()
    }

    /// Builds the named probicategory, over `backend` when given.
    pub fn probicategory(&self, name: &str, backend: Option<&str>) -> Result<Probicategory> {
        let spec = self
            .file
            .probicategories
            .0
            .get(name)
            .ok_or_else(|| ModelError::Unresolved(format!("probicategory `{name}`")))?;
        let b = self.backend(backend.unwrap_or(spec.backend()))?;
        let kind = match spec {
            ProbicatSpec::DeloopedMonoid { elements, table, unit, .. } => ProbicatKind::DeloopedMonoid {
                backend: b,
                elements: elements.clone(),
                table: resolve_table(table, elements, "monoid element")?,
                unit: unit.resolve(elements, "monoid unit")?,
            },
            ProbicatSpec::Monoidal { category, table, unit, tensor_morphisms, coherence, .. } => {
                let cat = self.category(category, &b)?;
                let objects = cat.objects().to_vec();
                let table = resolve_table(table, &objects, &format!("object of `{category}`:"))?;
                let mut data = MonoidalData::thin(cat.clone(), &table, unit.resolve(&objects, "tensor unit")?)?;
                let mor = |l: &str| {
                    cat.find_morphism(l)
                        .ok_or_else(|| ModelError::Unresolved(format!("morphism `{l}` of category `{category}`")))
                };
                if let Some(tm) = tensor_morphisms {
                    let morphisms = tm.iter().flatten().map(|l| mor(l)).collect::<Result<Vec<_>>>()?;
                    data.tensor = FinFunctor { objects: data.tensor.objects.clone(), morphisms };
                }
                if let Some(c) = coherence {
                    let ids = |v: &[String]| v.iter().map(|l| mor(l)).collect::<Result<Vec<_>>>();
                    data.coherence = Some(Coherence {
                        associator: ids(&c.associator)?,
                        left_unitor: ids(&c.left_unitor)?,
                        right_unitor: ids(&c.right_unitor)?,
                    });
                }
                ProbicatKind::FromMonoidal(data)
            }
            ProbicatSpec::Manifold { objects, categories, .. } => {
                if objects.len() != categories.len() {
                    return Err(ModelError::Invalid(format!("probicategory `{name}`: one category per object")));
                }
                let cats = categories.iter().map(|c| self.category(c, &b)).collect::<Result<Vec<_>>>()?;
                ProbicatKind::Manifold(objects.iter().cloned().zip(cats).collect())
            }
            ProbicatSpec::Table { ob, hom, p, j, .. } => self.table_kind(name, &b, ob, hom, p, j)?,
        };
        Ok(make_probicat(kind)?)
    }

    fn table_kind(
        &self,
        name: &str,
        backend: &Backend,
        ob: &[String],
        hom: &[Vec<String>],
        p_entries: &[TableEntry],
        j_entries: &[TableEntry],
    ) -> Result<ProbicatKind> {
        let n = ob.len();
        if hom.len() != n || hom.iter().any(|r| r.len() != n) {
            return Err(ModelError::Invalid(format!("probicategory `{name}`: hom table must be {n} × {n}")));
        }
        let homs: Vec<Category> = hom.iter().flatten().map(|c| self.category(c, backend)).collect::<Result<_>>()?;
        let mut p = Vec::with_capacity(n * n * n);
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let dom = homs[y * n + z].product(&homs[x * n + y])?.op().product(&homs[x * n + z])?;
                    p.push(bottom(&dom));
                }
            }
        }
        let mut j: Vec<Presheaf> = (0..n).map(|x| bottom(&homs[x * n + x])).collect();
        let owner = format!("probicategory `{name}`");
        for e in p_entries {
            let [x, y, z] = e.at.as_slice() else {
                return Err(ModelError::Invalid(format!("{owner}: P entries need `at: [x, y, z]`")));
            };
            let (x, y, z) = (x.resolve(ob, "object")?, y.resolve(ob, "object")?, z.resolve(ob, "object")?);
            let (a_yz, a_xy, a_xz) = (&homs[y * n + z], &homs[x * n + y], &homs[x * n + z]);
            let dom = a_yz.product(a_xy)?.op().product(a_xz)?;
            let index = |cell: &[Ref]| -> Result<usize> {
                let [a, b, c] = cell else {
                    return Err(ModelError::Invalid(format!("{owner}: P cells are `[a, b, c]`")));
                };
                let (a, b, c) = (
                    a.resolve(a_yz.objects(), "1-cell")?,
                    b.resolve(a_xy.objects(), "1-cell")?,
                    c.resolve(a_xz.objects(), "1-cell")?,
                );
                Ok((a * a_xy.object_count() + b) * a_xz.object_count() + c)
            };
            fill(&mut p[(x * n + y) * n + z], &dom, e, &owner, index)?;
        }
        for e in j_entries {
            let [x] = e.at.as_slice() else {
                return Err(ModelError::Invalid(format!("{owner}: J entries need `at: [x]`")));
            };
            let x = x.resolve(ob, "object")?;
            let a = &homs[x * n + x];
            let index = |cell: &[Ref]| -> Result<usize> {
                let [c] = cell else {
                    return Err(ModelError::Invalid(format!("{owner}: J cells are `[a]`")));
                };
                c.resolve(a.objects(), "1-cell")
            };
            fill(&mut j[x], a, e, &owner, index)?;
        }
        Ok(ProbicatKind::Table(TableData { objects: ob.to_vec(), homs, p, j }))
    }

    pub fn sigma(&self, name: &str, p: &Probicategory) -> Result<SigmaSet> {
        let spec =
            self.file.sigma_sets.0.get(name).ok_or_else(|| ModelError::Unresolved(format!("sigma set `{name}`")))?;
        let mut cells = Vec::with_capacity(spec.cells.len());
        for c in &spec.cells {
            let (x, y) = (c.x.resolve(p.objects(), "object")?, c.y.resolve(p.objects(), "object")?);
            let cat = p.hom(x, y);
            let (src, tgt) = (c.src.resolve(cat.objects(), "1-cell")?, c.tgt.resolve(cat.objects(), "1-cell")?);
            let morphism = if cat.is_ordinary() {
                Some(match &c.morphism {
                    Some(l) => cat
                        .find_morphism(l)
                        .ok_or_else(|| ModelError::Unresolved(format!("morphism `{l}` (in sigma set `{name}`)")))?,
                    None => {
                        let candidates: Vec<usize> =
                            cat.hom(src, tgt).iter().copied().filter(|&m| !cat.is_identity(m)).collect();
                        match candidates.as_slice() {
                            [m] => *m,
                            _ => {
                                return Err(ModelError::Invalid(format!(
                                    "sigma set `{name}`: name the morphism {src} → {tgt}"
                                )))
                            }
                        }
                    }
                })
            } else {
                None
            };
            cells.push(SigmaCell { x, y, src, tgt, morphism });
        }
        Ok(SigmaSet::new(p, cells)?)
    }

    /// Per-hom presheaf lists, indexed `x * n + y`.
    pub fn hom_lists(&self, lists: &[HomList], p: &Probicategory) -> Result<Vec<Vec<Presheaf>>> {
        let n = p.object_count();
        let mut out = vec![Vec::new(); n * n];
        for l in lists {
            let (x, y) = (l.hom.0.resolve(p.objects(), "object")?, l.hom.1.resolve(p.objects(), "object")?);
            for name in &l.objects {
                out[x * n + y].push(self.presheaf(name, p.hom(x, y))?);
            }
        }
        Ok(out)
    }

    /// Explicit reflection: local objects per hom, every presheaf on homs
    /// not listed.
    pub fn closure_reflector(&self, spec: &ReflectionSpec, p: &Probicategory) -> Result<ClosureReflector> {
        let n = p.object_count();
        let listed = self.hom_lists(&spec.local, p)?;
        let mut local = Vec::with_capacity(n * n);
        for (i, l) in listed.into_iter().enumerate() {
            let mentioned = spec.local.iter().any(|h| {
                matches!((h.hom.0.resolve(p.objects(), ""), h.hom.1.resolve(p.objects(), "")), (Ok(x), Ok(y)) if x * n + y == i)
            });
            local.push(if mentioned { l } else { enumerate_presheaves(p.hom(i / n, i % n), 0)? });
        }
        Ok(ClosureReflector { local, objects: n })
    }
}

fn resolve_table(table: &[Vec<Ref>], labels: &[String], what: &str) -> Result<Vec<Vec<usize>>> {
    table.iter().map(|row| row.iter().map(|v| v.resolve(labels, what)).collect()).collect()
}

fn bottom(cat: &Category) -> Presheaf {
    biclosed::calculus::initial_presheaf(cat)
}

fn fill(
    target: &mut Presheaf,
    dom: &Category,
    e: &TableEntry,
    owner: &str,
    index: impl Fn(&[Ref]) -> Result<usize>,
) -> Result<()> {
    match (target, dom.quantale()) {
        (Presheaf::Quantale(v), Some(q)) => {
            let (Some(cell), Some(value)) = (&e.cell, &e.value) else {
                return Err(ModelError::Invalid(format!("{owner}: quantale entries need `cell` and `value`")));
            };
            v[index(cell)?] = value.resolve(q.labels(), "quantale element")?;
        }
        (t @ Presheaf::Set(_), None) => {
            let (Some(sizes), Some(actions)) = (&e.sizes, &e.actions) else {
                return Err(ModelError::Invalid(format!("{owner}: set entries need `sizes` and `actions`")));
            };
            let f = SetPresheaf::new(dom, sizes.clone(), actions.clone())
                .map_err(|err| ModelError::Invalid(format!("{owner}: {err}")))?;
            *t = Presheaf::Set(f);
        }
        _ => return Err(ModelError::Invalid(format!("{owner}: entry does not match the backend"))),
    }
    Ok(())
}
