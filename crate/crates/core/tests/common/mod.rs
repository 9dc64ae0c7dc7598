#![allow(dead_code)]

use std::sync::Arc;

use biclosed::calculus::{initial_presheaf, Presheaf, SetPresheaf};
use biclosed::enrichment::{make_quantale, Elem, Quantale, QuantaleKind};
use biclosed::fincat::{Backend, Category, CategoryData, Morphism};
use biclosed::localise::{SigmaCell, SigmaSet};
use biclosed::probicat::{make_probicat, MonoidalData, ProbicatKind, Probicategory, TableData};

pub fn quantale(kind: QuantaleKind) -> Arc<Quantale> {
    Arc::new(make_quantale(kind).unwrap())
}

pub fn boolean() -> Backend {
    Backend::Quantale(quantale(QuantaleKind::Boolean))
}

pub fn cyclic(backend: Backend, k: usize) -> Probicategory {
    make_probicat(ProbicatKind::DeloopedMonoid {
        backend,
        elements: (0..k).map(|i| i.to_string()).collect(),
        table: (0..k).map(|a| (0..k).map(|b| (a + b) % k).collect()).collect(),
        unit: 0,
    })
    .unwrap()
}

/// The walking arrow `0 → 1` under `min`, unit 1.
pub fn min_arrow(backend: &Backend) -> Probicategory {
    let arrow = Category::walking_arrow(backend);
    let data = MonoidalData::thin(arrow, &[vec![0, 0], vec![0, 1]], 1).unwrap();
    make_probicat(ProbicatKind::FromMonoidal(data)).unwrap()
}

/// The 3-chain `0 → 1 → 2` under `min`, unit 2.
pub fn min_chain3(backend: &Backend) -> Probicategory {
    let labels: Vec<String> = (0..3).map(|i| i.to_string()).collect();
    let chain = Category::poset(backend, &labels, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let table: Vec<Vec<usize>> = (0..3).map(|a| (0..3).map(|b| a.min(b)).collect()).collect();
    make_probicat(ProbicatKind::FromMonoidal(MonoidalData::thin(chain, &table, 2).unwrap())).unwrap()
}

/// `Σ = {0 → 1}` on the single hom of a one-object probicategory.
pub fn arrow_sigma(p: &Probicategory) -> SigmaSet {
    let morphism = p.hom(0, 0).is_ordinary().then(|| p.hom(0, 0).find_morphism("0<1").unwrap());
    SigmaSet::new(p, vec![SigmaCell { x: 0, y: 0, src: 0, tgt: 1, morphism }]).unwrap()
}

/// Parallel pair `σ, τ: a ⇉ b` as the single hom of a structure with empty
/// `P` and `J`.
pub fn parallel_pair() -> Probicategory {
    let data = CategoryData {
        objects: vec!["a".into(), "b".into()],
        morphisms: vec![Morphism { src: 0, tgt: 1, label: "s".into() }, Morphism { src: 0, tgt: 1, label: "t".into() }],
        compositions: Vec::new(),
    };
    let cat = Category::from_data(&data).unwrap();
    let p_dom = cat.product(&cat).unwrap().op().product(&cat).unwrap();
    make_probicat(ProbicatKind::Table(TableData {
        objects: vec!["x".into()],
        p: vec![initial_presheaf(&p_dom)],
        j: vec![initial_presheaf(&cat)],
        homs: vec![cat],
    }))
    .unwrap()
}

pub fn qv(v: &[Elem]) -> Presheaf {
    Presheaf::Quantale(v.to_vec())
}

pub fn set(cat: &Category, sizes: &[usize], actions: Vec<Vec<usize>>) -> Presheaf {
    Presheaf::Set(SetPresheaf::new(cat, sizes.to_vec(), actions).unwrap())
}

pub fn sizes(f: &Presheaf) -> Vec<usize> {
    f.as_set().unwrap().sizes().to_vec()
}
