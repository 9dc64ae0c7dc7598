//! Localisation at a set Σ of 2-cells, through the reflective subcategory of
//! Σ-local presheaves. `A(Σ⁻¹)` itself is never built.

use serde::{Deserialize, Serialize};

use crate::calculus::{NatMap, Presheaf, Reflection, Reflector, SetPresheaf};
use crate::error::{Error, Result};
use crate::fincat::Category;
use crate::probicat::{Probicategory, Scope};
use crate::reflect::{run_conditions, ConditionSide, ReflectionSetup};
use crate::report::Report;

/// Default bound on reflection sweeps.
pub const DEFAULT_MAX_ITER: usize = 64;

/// One 2-cell `σ: src → tgt` of `A_xy`. The quantale backend has no
/// morphism ids; there `σ` is the pair itself and needs `I ≤ A_xy(src, tgt)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SigmaCell {
    pub x: usize,
    pub y: usize,
    pub src: usize,
    pub tgt: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morphism: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SigmaSet {
    cells: Vec<SigmaCell>,
}

impl SigmaSet {
    pub fn empty() -> Self {
        SigmaSet::default()
    }

    /// Validates every cell against its hom category; cells are kept in
    /// canonical order (hom index, then morphism or pair).
    pub fn new(p: &Probicategory, mut cells: Vec<SigmaCell>) -> Result<Self> {
        let n = p.object_count();
        for c in &cells {
            if c.x >= n || c.y >= n {
                return Err(Error::IndexMismatch(format!("2-cell on hom ({}, {}) out of range", c.x, c.y)));
            }
            let cat = p.hom(c.x, c.y);
            if c.src >= cat.object_count() || c.tgt >= cat.object_count() {
                return Err(Error::IndexMismatch(format!("2-cell endpoints ({}, {}) out of range", c.src, c.tgt)));
            }
            match (cat.quantale(), c.morphism) {
                (Some(q), None) => {
                    if !q.leq(q.unit(), cat.hom_value(c.src, c.tgt)) {
                        return Err(Error::Parameter(format!(
                            "no 2-cell {} → {}: the unit is not below the hom value",
                            cat.object_label(c.src),
                            cat.object_label(c.tgt)
                        )));
                    }
                }
                (None, Some(m)) => {
                    let ok = cat.morphisms().get(m).is_some_and(|mm| mm.src == c.src && mm.tgt == c.tgt);
                    if !ok {
                        return Err(Error::Parameter(format!("morphism {m} is not a 2-cell {} → {}", c.src, c.tgt)));
                    }
                }
                (Some(_), Some(_)) => {
                    return Err(Error::BackendMismatch("quantale 2-cells carry no morphism id".into()))
                }
                (None, None) => return Err(Error::Parameter("set-backend 2-cells need a morphism id".into())),
            }
        }
        cells.sort_by_key(|c| (c.x, c.y, c.morphism, c.src, c.tgt));
        cells.dedup();
        Ok(SigmaSet { cells })
    }

    pub fn cells(&self) -> &[SigmaCell] {
        &self.cells
    }

    pub fn on(&self, hom: (usize, usize)) -> impl Iterator<Item = &SigmaCell> {
        self.cells.iter().filter(move |c| (c.x, c.y) == hom)
    }
}

/// Locality verdict; `failing` is the first 2-cell not sent to an iso.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Locality {
    pub local: bool,
    pub failing: Option<SigmaCell>,
}

fn inverts(cell: &SigmaCell, f: &Presheaf) -> bool {
    match f {
        Presheaf::Quantale(v) => v[cell.src] == v[cell.tgt],
        Presheaf::Set(s) => {
            let act = s.action(cell.morphism.expect("validated set 2-cell"));
            let mut seen = vec![false; s.size(cell.tgt)];
            s.size(cell.src) == s.size(cell.tgt) && act.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
        }
    }
}

pub fn is_local(p: &Probicategory, sigma: &SigmaSet, hom: (usize, usize), f: &Presheaf) -> Result<Locality> {
    if hom.0 >= p.object_count() || hom.1 >= p.object_count() {
        return Err(Error::IndexMismatch(format!("hom ({}, {}) out of range", hom.0, hom.1)));
    }
    f.check(p.hom(hom.0, hom.1))?;
    let failing = sigma.on(hom).find(|c| !inverts(c, f)).cloned();
    Ok(Locality { local: failing.is_none(), failing })
}

/// A reflection together with the number of sweeps it took.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalReflection {
    pub reflection: Reflection,
    pub iterations: usize,
}

/// `η_F: F → ψF` onto the Σ-local presheaves on `A_xy`.
pub fn localise_reflect(
    cat: &Category,
    sigma: &SigmaSet,
    hom: (usize, usize),
    f: &Presheaf,
    max_iter: usize,
) -> Result<LocalReflection> {
    let cells: Vec<&SigmaCell> = sigma.on(hom).collect();
    match f {
        Presheaf::Quantale(v) => Ok(quantale_closure(cat, &cells, v)),
        Presheaf::Set(s) => set_reflect(cat, &cells, s, max_iter),
    }
}

fn quantale_closure(cat: &Category, cells: &[&SigmaCell], v: &[usize]) -> LocalReflection {
    let q = cat.quantale().expect("quantale base");
    let n = cat.object_count();
    let mut g = v.to_vec();
    let mut iterations = 0;
    loop {
        let mut next = g.clone();
        for c in cells {
            let j = q.join(next[c.src], next[c.tgt]);
            next[c.src] = j;
            next[c.tgt] = j;
        }
        let spread: Vec<usize> =
            (0..n).map(|y| q.join_all((0..n).map(|x| q.tensor(cat.hom_value(x, y), next[x])))).collect();
        if spread == g {
            break;
        }
        g = spread;
        iterations += 1;
    }
    LocalReflection { reflection: Reflection { object: Presheaf::Quantale(g), unit: NatMap::Leq }, iterations }
}

/// Presheaf being reflected, with the unit accumulated so far.
struct Stage {
    sizes: Vec<usize>,
    actions: Vec<Vec<usize>>,
    unit: Vec<Vec<usize>>,
}

impl Stage {
    fn offsets(&self) -> Vec<usize> {
        let mut out = vec![0];
        for s in &self.sizes {
            out.push(out.last().unwrap() + s);
        }
        out
    }

    fn injective(&self, m: usize, src: usize) -> bool {
        let mut seen = std::collections::HashSet::new();
        (0..self.sizes[src]).all(|u| seen.insert(self.actions[m][u]))
    }

    fn missing(&self, m: usize, src: usize, tgt: usize) -> Vec<usize> {
        let mut hit = vec![false; self.sizes[tgt]];
        for u in 0..self.sizes[src] {
            hit[self.actions[m][u]] = true;
        }
        (0..self.sizes[tgt]).filter(|&v| !hit[v]).collect()
    }

    /// Coequalises elements of `src` with equal `m`-images, closed under
    /// the action.
    fn quotient(&mut self, cat: &Category, m: usize, src: usize) {
        let offsets = self.offsets();
        let mut uf = UnionFind::new(*offsets.last().unwrap());
        let mut first_at: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
        for u in 0..self.sizes[src] {
            let img = self.actions[m][u];
            match first_at.get(&img) {
                Some(&w) => {
                    uf.union(offsets[src] + w, offsets[src] + u);
                }
                None => {
                    first_at.insert(img, u);
                }
            }
        }
        close_congruence(cat, &self.sizes, &self.actions, &offsets, &mut uf);
        self.collapse(cat, &offsets, &mut uf);
    }

    /// Freely adjoins a preimage along `m: src → tgt` for every element of
    /// `tgt` outside the image: the pushout of `missing × A(src, −)`.
    fn adjoin(&mut self, cat: &Category, m: usize, src: usize, tgt: usize) {
        let missing = self.missing(m, src, tgt);
        let n = cat.object_count();
        // new elements at c: pairs (i, h) with h ∈ A(src, c), i-major
        let fresh: Vec<usize> = (0..n).map(|c| missing.len() * cat.hom(src, c).len()).collect();
        let mut sizes = self.sizes.clone();
        for c in 0..n {
            sizes[c] += fresh[c];
        }
        let old = self.sizes.clone();
        let new_index = |i: usize, h: usize| -> usize {
            let c = cat.morphisms()[h].tgt;
            let pos = cat.hom(src, c).iter().position(|&k| k == h).expect("morphism in its hom");
            old[c] + i * cat.hom(src, c).len() + pos
        };
        let mut actions = Vec::with_capacity(cat.morphism_count());
        for (g, mg) in cat.morphisms().iter().enumerate() {
            let mut act = self.actions[g].clone();
            for i in 0..missing.len() {
                for &h in cat.hom(src, mg.src) {
                    act.push(new_index(i, cat.compose(g, h).expect("composable")));
                }
            }
            actions.push(act);
        }
        let mut offsets = vec![0];
        for s in &sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        let mut uf = UnionFind::new(*offsets.last().unwrap());
        for (i, &yv) in missing.iter().enumerate() {
            for (g, mg) in cat.morphisms().iter().enumerate().filter(|(_, mg)| mg.src == tgt) {
                let c = mg.tgt;
                let lhs = offsets[c] + self.actions[g][yv];
                let rhs = offsets[c] + new_index(i, cat.compose(g, m).expect("composable"));
                uf.union(lhs, rhs);
            }
        }
        close_congruence(cat, &sizes, &actions, &offsets, &mut uf);
        self.sizes = sizes;
        self.actions = actions;
        self.collapse(cat, &offsets, &mut uf);
    }

    /// Replaces the presheaf by its quotient under `uf`, numbering classes by
    /// least element per object and updating the unit.
    fn collapse(&mut self, cat: &Category, offsets: &[usize], uf: &mut UnionFind) {
        let n = self.sizes.len();
        let mut class = vec![0; *offsets.last().unwrap()];
        let mut sizes = vec![0; n];
        for x in 0..n {
            let mut index_of_root = std::collections::HashMap::new();
            for u in 0..self.sizes[x] {
                let r = uf.find(offsets[x] + u);
                let next = index_of_root.len();
                class[offsets[x] + u] = *index_of_root.entry(r).or_insert(next);
            }
            sizes[x] = index_of_root.len();
        }
        let mut actions = vec![Vec::new(); cat.morphism_count()];
        for (g, mg) in cat.morphisms().iter().enumerate() {
            let mut act = vec![0; sizes[mg.src]];
            for u in 0..self.sizes[mg.src] {
                act[class[offsets[mg.src] + u]] = class[offsets[mg.tgt] + self.actions[g][u]];
            }
            actions[g] = act;
        }
        for (x, comp) in self.unit.iter_mut().enumerate() {
            for v in comp.iter_mut() {
                *v = class[offsets[x] + *v];
            }
        }
        self.sizes = sizes;
        self.actions = actions;
    }
}

/// Merges `u ~ v ⇒ g(u) ~ g(v)` to a fixed point.
fn close_congruence(cat: &Category, sizes: &[usize], actions: &[Vec<usize>], offsets: &[usize], uf: &mut UnionFind) {
    loop {
        let mut changed = false;
        for (g, mg) in cat.morphisms().iter().enumerate() {
            for u in 0..sizes[mg.src] {
                let r = uf.find(offsets[mg.src] + u) - offsets[mg.src];
                let (a, b) = (offsets[mg.tgt] + actions[g][u], offsets[mg.tgt] + actions[g][r]);
                changed |= uf.union(a, b);
            }
        }
        if !changed {
            break;
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

fn set_reflect(cat: &Category, cells: &[&SigmaCell], f: &SetPresheaf, max_iter: usize) -> Result<LocalReflection> {
    let mut stage = Stage {
        sizes: f.sizes().to_vec(),
        actions: (0..cat.morphism_count()).map(|g| f.action(g).to_vec()).collect(),
        unit: f.sizes().iter().map(|&s| (0..s).collect()).collect(),
    };
    let mut iterations = 0;
    loop {
        let settled = cells.iter().all(|c| {
            let m = c.morphism.expect("validated set 2-cell");
            stage.injective(m, c.src) && stage.missing(m, c.src, c.tgt).is_empty()
        });
        if settled {
            break;
        }
        if iterations == max_iter {
            return Err(Error::Divergence { max_iter });
        }
        for c in cells {
            let m = c.morphism.expect("validated set 2-cell");
            if !stage.injective(m, c.src) {
                stage.quotient(cat, m, c.src);
            }
            if !stage.missing(m, c.src, c.tgt).is_empty() {
                stage.adjoin(cat, m, c.src, c.tgt);
            }
        }
        iterations += 1;
    }
    let object = Presheaf::Set(SetPresheaf::new(cat, stage.sizes, stage.actions)?);
    Ok(LocalReflection { reflection: Reflection { object, unit: NatMap::Components(stage.unit) }, iterations })
}

/// The reflector onto Σ-local presheaves, for use wherever a [`Reflector`]
/// is expected.
#[derive(Clone, Debug)]
pub struct SigmaLocal {
    pub sigma: SigmaSet,
    pub max_iter: usize,
}

impl SigmaLocal {
    pub fn new(sigma: SigmaSet) -> Self {
        SigmaLocal { sigma, max_iter: DEFAULT_MAX_ITER }
    }
}

impl Reflector for SigmaLocal {
    fn reflect(&self, cat: &Category, hom: (usize, usize), f: &Presheaf) -> Result<Reflection> {
        Ok(localise_reflect(cat, &self.sigma, hom, f, self.max_iter)?.reflection)
    }

    fn contains(&self, _cat: &Category, hom: (usize, usize), f: &Presheaf) -> bool {
        self.sigma.on(hom).all(|c| inverts(c, f))
    }
}

/// Outcome of [`localise_probicat`]: the reflection setup, the table of
/// conditions, and the checks on the transferred structure.
pub struct Localised<'a> {
    pub setup: ReflectionSetup<'a>,
    pub conditions: Report,
    pub verified: Option<String>,
    pub report: Report,
}

impl Localised<'_> {
    pub fn passed(&self) -> bool {
        self.verified.is_some() && self.report.passed()
    }
}

/// Localises `p` at Σ: runs conditions 1 to 6 on the Σ-local reflection and,
/// on the first that holds, transfers the structure and certifies `ψ` strong.
/// `cogens` defaults to every local object in scope.
pub fn localise_probicat<'a>(
    p: &'a Probicategory,
    sigma: SigmaSet,
    scope: Scope,
    cogens: Option<Vec<Vec<Presheaf>>>,
    max_iter: usize,
) -> Result<Localised<'a>> {
    let reflector = SigmaLocal { sigma, max_iter };
    let setup = ReflectionSetup::with_representables(p, Box::new(reflector), scope, cogens)?;
    let (conditions, verified) = run_conditions(&setup, ConditionSide::Both)?;
    let mut report = setup.validate()?;
    if verified.is_some() {
        report.extend(setup.transfer_and_verify()?);
    }
    Ok(Localised { setup, conditions, verified, report })
}
