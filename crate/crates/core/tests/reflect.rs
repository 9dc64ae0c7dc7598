mod common;

use biclosed::calculus::{enumerate_presheaves, yoneda_embed, IdentityReflector, Presheaf};
use biclosed::fincat::{find_natural_iso, Backend, DEFAULT_SEARCH_CAP};
use biclosed::localise::{SigmaLocal, DEFAULT_MAX_ITER};
use biclosed::probicat::{biclosed_validate, Biclosed, Convolution, Probicategory, Scope};
use biclosed::reflect::{
    check_generators, reflection_condition, run_conditions, transfer_structure, verify_strong, ClosureReflector,
    ConditionSide, GeneratorMode, ReflectionSetup,
};
use biclosed::report::Report;
use biclosed::{Error, Result};
use common::*;

fn identity_setup(p: &Probicategory) -> ReflectionSetup<'_> {
    ReflectionSetup::with_representables(p, Box::new(IdentityReflector), Scope::default(), None).unwrap()
}

fn all_ran(report: &Report) {
    for c in &report.checks {
        assert!(c.instances > 0, "{} ran no instances", c.name);
    }
}

#[test]
fn identity_reflection_passes_everything() {
    for p in [cyclic(boolean(), 2), cyclic(Backend::FinSet, 2), min_arrow(&Backend::FinSet)] {
        let s = identity_setup(&p);
        let (table, verified) = run_conditions(&s, ConditionSide::Both).unwrap();
        assert!(table.passed(), "{}", table.to_value());
        assert_eq!(table.checks.len(), 11);
        all_ran(&table);
        assert_eq!(verified.as_deref(), Some("1"));
        assert!(s.validate().unwrap().passed());
        let report = s.transfer_and_verify().unwrap();
        assert!(report.passed(), "{}", report.to_value());
        let t = transfer_structure(&s, &table).unwrap();
        let conv = Convolution::new(&p);
        for f in s.cells(0, 0) {
            for g in s.cells(0, 0) {
                assert_eq!(t.compose(0, 0, 0, f, g).unwrap(), conv.compose(0, 0, 0, f, g).unwrap());
                assert_eq!(t.right_residual(0, 0, 0, f, g).unwrap(), conv.right_residual(0, 0, 0, f, g).unwrap());
            }
        }
    }
}

#[test]
fn walking_arrow_sigma_local_conditions() {
    let p = min_arrow(&Backend::FinSet);
    let s =
        ReflectionSetup::with_representables(&p, Box::new(SigmaLocal::new(arrow_sigma(&p))), Scope::default(), None)
            .unwrap();
    assert_eq!(s.cells(0, 0).len(), 11);
    assert_eq!(s.local(0, 0).len(), 4);
    let one = reflection_condition(&s, 1, ConditionSide::Both).unwrap();
    assert!(one.passed(), "{}", one.to_value());
    // 1a quantifies over local C (4) and all B (11)
    assert_eq!(one.checks[0].instances, 44);
    let validation = s.validate().unwrap();
    assert!(validation.passed());
    all_ran(&validation);
    let t = s.transfer();
    let report = biclosed_validate(&t, s.scope()).unwrap();
    assert!(report.passed(), "{}", report.to_value());
    let strong = verify_strong(&s, &t).unwrap();
    assert!(strong.passed(), "{}", strong.to_value());
    assert_eq!(strong.check("strong_composition").unwrap().instances, 121);
}

#[test]
fn chain_reflection_onto_constant_vectors() {
    let b = boolean();
    let p = min_chain3(&b);
    let local = vec![vec![qv(&[0, 0, 0]), qv(&[1, 1, 1])]];
    let reflector = ClosureReflector { local, objects: 1 };
    let s = ReflectionSetup::with_representables(&p, Box::new(reflector), Scope::default(), None).unwrap();
    assert_eq!(s.cells(0, 0).len(), 4);
    assert_eq!(s.psi(0, 0, &qv(&[0, 0, 1])).unwrap().object, qv(&[1, 1, 1]));
    let (table, verified) = run_conditions(&s, ConditionSide::Both).unwrap();
    assert!(verified.is_some(), "{}", table.to_value());
    let report = s.transfer_and_verify().unwrap();
    assert!(report.passed(), "{}", report.to_value());
}

/// Meet-closed families of vectors containing top on delooped Z/2.
fn meet_closed_families() -> Vec<Vec<Presheaf>> {
    let vectors = [[0, 0], [0, 1], [1, 0], [1, 1]];
    let mut out = Vec::new();
    for mask in 0..16u32 {
        if mask & 8 == 0 {
            continue;
        }
        let chosen: Vec<[usize; 2]> = (0..4).filter(|i| mask >> i & 1 == 1).map(|i| vectors[i]).collect();
        let closed = chosen.iter().all(|a| chosen.iter().all(|b| chosen.contains(&[a[0] & b[0], a[1] & b[1]])));
        if closed {
            out.push(chosen.iter().map(|v| qv(v)).collect());
        }
    }
    out
}

#[test]
fn a_non_exponential_ideal_fails_condition_1a() {
    let p = cyclic(boolean(), 2);
    let conv = Convolution::new(&p);
    let mut found = false;
    for local in meet_closed_families() {
        // oracle: some C/B leaves the family
        let leaves = local.iter().any(|c| {
            enumerate_presheaves(p.hom(0, 0), 0)
                .unwrap()
                .iter()
                .any(|b| !local.contains(&conv.right_residual(0, 0, 0, c, b).unwrap()))
        });
        let s = ReflectionSetup::with_representables(
            &p,
            Box::new(ClosureReflector { local: vec![local.clone()], objects: 1 }),
            Scope::default(),
            None,
        )
        .unwrap();
        let report = reflection_condition(&s, 1, ConditionSide::A).unwrap();
        assert_eq!(report.passed(), !leaves);
        if leaves {
            found = true;
            let failure = &report.checks[0].failures[0];
            assert!(failure.get("C").is_some() && failure.get("B").is_some());
            let t = s.transfer();
            let errors = s
                .local(0, 0)
                .iter()
                .flat_map(|c| s.cells(0, 0).iter().map(move |b| (c, b)))
                .filter(|(c, b)| matches!(t.right_residual(0, 0, 0, c, b), Err(Error::NotInSubcategory(_))))
                .count();
            assert!(errors > 0);
        }
    }
    assert!(found);
}

#[test]
fn generators() {
    let p = min_arrow(&Backend::FinSet);
    let s = identity_setup(&p);
    assert!(check_generators(&s, GeneratorMode::Generating).unwrap().passed());
    assert!(check_generators(&s, GeneratorMode::Cogenerating).unwrap().passed());

    let empty =
        ReflectionSetup::new(&p, Box::new(IdentityReflector), vec![vec![]], vec![vec![]], Scope::default()).unwrap();
    let check = check_generators(&empty, GeneratorMode::Generating).unwrap();
    assert!(!check.passed());

    let y0 = yoneda_embed(p.hom(0, 0)).swap_remove(0);
    let one =
        ReflectionSetup::new(&p, Box::new(IdentityReflector), vec![vec![y0]], vec![vec![]], Scope::default()).unwrap();
    let check = check_generators(&one, GeneratorMode::Generating).unwrap();
    assert!(!check.passed());
    // the reported morphism is bijective at 0 and not at 1
    let failure = &check.failures[0];
    let comps = failure["morphism"]["components"].as_array().unwrap();
    let source = &failure["source"]["set"]["sizes"];
    let target = &failure["target"]["set"]["sizes"];
    assert_eq!(source[0], target[0]);
    let at0: Vec<u64> = comps[0].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    let mut sorted = at0.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), at0.len());
}

#[test]
fn generator_classes_need_content_for_conditions_2_and_5() {
    let p = cyclic(boolean(), 2);
    let s =
        ReflectionSetup::new(&p, Box::new(IdentityReflector), vec![vec![]], vec![vec![]], Scope::default()).unwrap();
    let two = reflection_condition(&s, 2, ConditionSide::Both).unwrap();
    assert!(two.has_error());
    let five = reflection_condition(&s, 5, ConditionSide::A).unwrap();
    assert!(five.has_error());
}

struct Corrupted<'s, 'a> {
    inner: biclosed::reflect::TransferredStructure<'s, 'a>,
    target: Presheaf,
}

impl Biclosed for Corrupted<'_, '_> {
    fn probicategory(&self) -> &Probicategory {
        self.inner.probicategory()
    }
    fn compose(&self, x: usize, y: usize, z: usize, f: &Presheaf, g: &Presheaf) -> Result<Presheaf> {
        let out = self.inner.compose(x, y, z, f, g)?;
        if f == &self.target && g == &self.target {
            // one table entry moved
            let mut v = out.as_quantale().unwrap().to_vec();
            v[0] = 1 - v[0];
            return Ok(Presheaf::Quantale(v));
        }
        Ok(out)
    }
    fn identity(&self, x: usize) -> Result<Presheaf> {
        self.inner.identity(x)
    }
    fn right_residual(&self, x: usize, y: usize, z: usize, h: &Presheaf, g: &Presheaf) -> Result<Presheaf> {
        self.inner.right_residual(x, y, z, h, g)
    }
    fn left_residual(&self, x: usize, y: usize, z: usize, f: &Presheaf, h: &Presheaf) -> Result<Presheaf> {
        self.inner.left_residual(x, y, z, f, h)
    }
    fn scope_objects(&self, x: usize, y: usize, scope: &Scope) -> Result<Vec<Presheaf>> {
        self.inner.scope_objects(x, y, scope)
    }
}

#[test]
fn corrupted_composition_is_not_strong() {
    let p = cyclic(boolean(), 2);
    let s = identity_setup(&p);
    let bad = Corrupted { inner: s.transfer(), target: qv(&[0, 1]) };
    let report = verify_strong(&s, &bad).unwrap();
    assert!(!report.check("strong_composition").unwrap().passed());
    assert!(report.check("strong_identity").unwrap().passed());
}

#[test]
fn transfer_requires_a_verified_condition() {
    let p = cyclic(boolean(), 2);
    let s = identity_setup(&p);
    assert!(matches!(transfer_structure(&s, &Report::new()), Err(Error::Reflection(_))));
}

#[test]
fn walking_arrow_transfer_agrees_across_conditions() {
    let p = min_arrow(&Backend::FinSet);
    let s = ReflectionSetup::with_representables(
        &p,
        Box::new(SigmaLocal { sigma: arrow_sigma(&p), max_iter: DEFAULT_MAX_ITER }),
        Scope::default(),
        None,
    )
    .unwrap();
    let (table, _) = run_conditions(&s, ConditionSide::Both).unwrap();
    let held: Vec<&str> = table.checks.iter().filter(|c| c.passed()).map(|c| c.name.as_str()).collect();
    assert!(held.contains(&"condition_1a") && held.contains(&"condition_1b"));
    let t = transfer_structure(&s, &table).unwrap();
    let cat = p.hom(0, 0);
    for c in s.local(0, 0) {
        for d in s.local(0, 0) {
            let via = s.psi(0, 0, &s.convolution().compose(0, 0, 0, c, d).unwrap()).unwrap().object;
            let got = t.compose(0, 0, 0, c, d).unwrap();
            assert!(find_natural_iso(cat, &got, &via, DEFAULT_SEARCH_CAP).unwrap().is_some());
        }
    }
}
