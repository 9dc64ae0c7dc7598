//! Extension of a probicategory `A` along a dense family `N_xy: op(A_xy) →
//! C_xy` to a biclosed bicategory on the targets `C_xy ⊂ [A_xy, V]`.
//!
//! `N_xy` is given as a family `Ñ` on `op(A_xy) × A_xy` with `N X = Ñ(X, −)`.
//! A target is either the whole presheaf category or a reflective
//! subcategory of it; colimits in a reflective target are reflected.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use serde_json::json;

use crate::calculus::{
    count_nat_transformations, density_check, external_product, hom_from_family, hom_presheaf, presheaf_hom_value,
    reflect_family, slice_first, swap, weighted_colimit, weighted_limit, Colimit, DensityReport, Limit, NatMap,
    Presheaf, Reflection, Reflective, Reflector,
};
use crate::error::{Error, Result};
use crate::fincat::{find_natural_iso, Category};
use crate::localise::{localise_probicat, SigmaLocal, SigmaSet};
use crate::probicat::{biclosed_validate, Biclosed, Convolution, Probicategory, Scope, Side};
use crate::report::{Check, Report};

/// Where the dense family came from; decides which oracle applies.
#[derive(Clone, Debug)]
pub enum Origin {
    Yoneda,
    Localisation { sigma: SigmaSet, max_iter: usize },
    Custom,
}

/// `H_yz(A, C)` for `A ∈ A_xy`, or `K_xy(A, C)` for `A ∈ A_yz`; `C ∈ C_xz`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Which {
    H,
    K,
}

/// Oracle for [`compare_with_oracle`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    Yoneda,
    Localisation,
}

/// The `H` or `K` family of one `C`, with the pieces the comparison maps need.
struct HkFamily {
    /// `C_xz(Q(−, −), C)` on `A_yz × A_xy`.
    homs: Arc<Limit>,
    colimit: Colimit,
    reflection: Option<Reflection>,
    object: Presheaf,
}

/// `A`, the dense family `N`, and the targets `C`. Per-hom lists are indexed
/// `x * n + y`, per-triple lists `(x * n + y) * n + z`.
pub struct ExtensionSetup<'a> {
    probicat: &'a Probicategory,
    family: Vec<Presheaf>,
    ops: Vec<Category>,
    reflector: Option<Box<dyn Reflector + 'a>>,
    origin: Origin,
    scope: Scope,
    objects: Vec<Vec<Presheaf>>,
    density: Vec<DensityReport>,
    q: Vec<Presheaf>,
    homs: Mutex<HashMap<(usize, Presheaf), Arc<Limit>>>,
    q_homs: Mutex<HashMap<(usize, Presheaf), Arc<Limit>>>,
    hk: Mutex<HashMap<(Which, usize, Presheaf), Arc<HkFamily>>>,
}

impl<'a> ExtensionSetup<'a> {
    /// Validates `N`, runs the density check on every target object in scope
    /// (failing with [`Error::NotDense`] when `require_density` is set), and
    /// computes `Q`.
    pub fn new(
        probicat: &'a Probicategory,
        family: Vec<Presheaf>,
        reflector: Option<Box<dyn Reflector + 'a>>,
        scope: Scope,
        require_density: bool,
    ) -> Result<Self> {
        Self::build(probicat, family, reflector, Origin::Custom, scope, require_density)
    }

    /// `N` the Yoneda embedding, `C = [A, V]`.
    pub fn yoneda(probicat: &'a Probicategory, scope: Scope) -> Result<Self> {
        let n = probicat.object_count();
        let family = (0..n * n).map(|i| hom_presheaf(probicat.hom(i / n, i % n))).collect();
        Self::build(probicat, family, None, Origin::Yoneda, scope, true)
    }

    /// `N` the Yoneda embedding followed by the reflection onto Σ-local
    /// presheaves, `C` the Σ-local presheaves.
    pub fn localised(probicat: &'a Probicategory, sigma: SigmaSet, max_iter: usize, scope: Scope) -> Result<Self> {
        let n = probicat.object_count();
        let reflector = SigmaLocal { sigma: sigma.clone(), max_iter };
        let mut family = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let cat = probicat.hom(x, y);
                let target = Reflective { reflector: &reflector, hom: (x, y) };
                family.push(reflect_family(target, &cat.op(), cat, &hom_presheaf(cat))?.object);
            }
        }
        Self::build(probicat, family, Some(Box::new(reflector)), Origin::Localisation { sigma, max_iter }, scope, true)
    }

    fn build(
        probicat: &'a Probicategory,
        family: Vec<Presheaf>,
        reflector: Option<Box<dyn Reflector + 'a>>,
        origin: Origin,
        scope: Scope,
        require_density: bool,
    ) -> Result<Self> {
        let n = probicat.object_count();
        if family.len() != n * n {
            return Err(Error::IndexMismatch(format!("dense family needs {} hom entries", n * n)));
        }
        let ops: Vec<Category> = (0..n * n).map(|i| probicat.hom(i / n, i % n).op()).collect();
        let mut objects = Vec::with_capacity(n * n);
        let mut density = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let i = x * n + y;
                let cat = probicat.hom(x, y);
                family[i]
                    .check(&ops[i].product(cat)?)
                    .map_err(|e| Error::Functor(format!("N on hom ({x}, {y}): {e}")))?;
                let target = reflector.as_deref().map(|r| Reflective { reflector: r, hom: (x, y) });
                if let Some(t) = target {
                    for a in 0..cat.object_count() {
                        let na = slice_first(&ops[i], cat, &family[i], a);
                        if !t.contains(cat, &na) {
                            return Err(Error::NotInSubcategory(format!("N {a} on hom ({x}, {y})")));
                        }
                    }
                }
                let local: Vec<Presheaf> =
                    scope.presheaves(cat)?.into_iter().filter(|f| target.is_none_or(|t| t.contains(cat, f))).collect();
                let report = density_check(cat, &family[i], &local, target)?;
                if require_density {
                    if let Some(bad) = report.first_failure() {
                        return Err(Error::NotDense(format!(
                            "hom ({x}, {y}): the comparison onto {} is not invertible",
                            json!(bad.object)
                        )));
                    }
                }
                objects.push(local);
                density.push(report);
            }
        }
        let mut setup = ExtensionSetup {
            probicat,
            family,
            ops,
            reflector,
            origin,
            scope,
            objects,
            density,
            q: Vec::new(),
            homs: Mutex::new(HashMap::new()),
            q_homs: Mutex::new(HashMap::new()),
            hk: Mutex::new(HashMap::new()),
        };
        let mut q = Vec::with_capacity(n * n * n);
        for i in 0..n * n * n {
            let (x, y, z) = (i / (n * n), (i / n) % n, i % n);
            let colim = weighted_colimit(
                setup.op(x, z),
                probicat.k(x, y, z),
                probicat.hom(x, z),
                probicat.p(x, y, z),
                setup.family(x, z),
            )?;
            q.push(setup.reflect_family(x, z, probicat.k(x, y, z), colim.object)?.0);
        }
        setup.q = q;
        Ok(setup)
    }

    pub fn probicategory(&self) -> &'a Probicategory {
        self.probicat
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    fn n(&self) -> usize {
        self.probicat.object_count()
    }

    fn op(&self, x: usize, y: usize) -> &Category {
        &self.ops[x * self.n() + y]
    }

    /// `Ñ_xy` on `op(A_xy) × A_xy`.
    pub fn family(&self, x: usize, y: usize) -> &Presheaf {
        &self.family[x * self.n() + y]
    }

    /// `N_xy a`.
    pub fn n_at(&self, x: usize, y: usize, a: usize) -> Presheaf {
        slice_first(self.op(x, y), self.probicat.hom(x, y), self.family(x, y), a)
    }

    /// Target objects of `C_xy` in scope.
    pub fn objects(&self, x: usize, y: usize) -> &[Presheaf] {
        &self.objects[x * self.n() + y]
    }

    pub fn density(&self, x: usize, y: usize) -> &DensityReport {
        &self.density[x * self.n() + y]
    }

    fn target(&self, x: usize, y: usize) -> Option<Reflective<'_>> {
        self.reflector.as_deref().map(|r| Reflective { reflector: r, hom: (x, y) })
    }

    /// Reflects a family on `M × A_xy` into `C_xy`, slice by slice.
    fn reflect_family(
        &self,
        x: usize,
        y: usize,
        m_cat: &Category,
        f: Presheaf,
    ) -> Result<(Presheaf, Option<Reflection>)> {
        match self.target(x, y) {
            Some(t) => {
                let r = reflect_family(t, m_cat, self.probicat.hom(x, y), &f)?;
                Ok((r.object.clone(), Some(r)))
            }
            None => Ok((f, None)),
        }
    }

    fn check_object(&self, x: usize, y: usize, c: &Presheaf, role: &str) -> Result<()> {
        let cat = self.probicat.hom(x, y);
        c.check(cat).map_err(|e| Error::IndexMismatch(format!("{role} is not a presheaf on hom ({x}, {y}): {e}")))?;
        match self.target(x, y) {
            Some(t) if !t.contains(cat, c) => Err(Error::NotInSubcategory(format!("{role} {}", json!(c)))),
            _ => Ok(()),
        }
    }

    fn check_indices(&self, idx: &[usize]) -> Result<()> {
        match idx.iter().find(|&&i| i >= self.n()) {
            Some(i) => Err(Error::IndexMismatch(format!("object index {i} out of range"))),
            None => Ok(()),
        }
    }

    /// `C_xy(N −, C)` on `A_xy`.
    fn hom_n(&self, x: usize, y: usize, c: &Presheaf) -> Result<Arc<Limit>> {
        let key = (x * self.n() + y, c.clone());
        if let Some(l) = self.homs.lock().expect("cache lock").get(&key) {
            return Ok(l.clone());
        }
        let l = Arc::new(hom_from_family(self.probicat.hom(x, y), self.family(x, y), c)?);
        self.homs.lock().expect("cache lock").insert(key, l.clone());
        Ok(l)
    }

    /// `C_xz(Q_xyz(−, −), C)` on `A_yz × A_xy`.
    fn q_hom(&self, x: usize, y: usize, z: usize, c: &Presheaf) -> Result<Arc<Limit>> {
        let p = self.probicat;
        let key = (p.xyz(x, y, z), c.clone());
        if let Some(l) = self.q_homs.lock().expect("cache lock").get(&key) {
            return Ok(l.clone());
        }
        let l = Arc::new(weighted_limit(p.hom(x, z), p.kop(x, y, z), p.terminal(), &self.q[key.0], c)?);
        self.q_homs.lock().expect("cache lock").insert(key, l.clone());
        Ok(l)
    }

    fn hk_family(&self, which: Which, x: usize, y: usize, z: usize, c: &Presheaf) -> Result<Arc<HkFamily>> {
        let p = self.probicat;
        let key = (which, p.xyz(x, y, z), c.clone());
        if let Some(f) = self.hk.lock().expect("cache lock").get(&key) {
            return Ok(f.clone());
        }
        let homs = self.q_hom(x, y, z, c)?;
        let (colimit, (object, reflection)) = match which {
            Which::H => {
                let w = swap(p.hom(y, z), p.hom(x, y), &homs.object);
                let colim = weighted_colimit(self.op(y, z), p.hom(x, y), p.hom(y, z), &w, self.family(y, z))?;
                let reflected = self.reflect_family(y, z, p.hom(x, y), colim.object.clone())?;
                (colim, reflected)
            }
            Which::K => {
                let colim = weighted_colimit(self.op(x, y), p.hom(y, z), p.hom(x, y), &homs.object, self.family(x, y))?;
                let reflected = self.reflect_family(x, y, p.hom(y, z), colim.object.clone())?;
                (colim, reflected)
            }
        };
        let f = Arc::new(HkFamily { homs, colimit, reflection, object });
        self.hk.lock().expect("cache lock").insert(key, f.clone());
        Ok(f)
    }

    fn compose(&self, x: usize, y: usize, z: usize, c: &Presheaf, c2: &Presheaf) -> Result<Presheaf> {
        let p = self.probicat;
        let left = self.hom_n(y, z, c)?;
        let right = self.hom_n(x, y, c2)?;
        let weight = external_product(p.hom(y, z), p.hom(x, y), &left.object, &right.object)?;
        let colim = weighted_colimit(p.k(x, y, z), p.terminal(), p.hom(x, z), &weight, &self.q[p.xyz(x, y, z)])?;
        Ok(self.reflect_family(x, z, p.terminal(), colim.object)?.0)
    }

    fn identity(&self, x: usize) -> Result<Presheaf> {
        let p = self.probicat;
        let colim = weighted_colimit(self.op(x, x), p.terminal(), p.hom(x, x), p.j(x), self.family(x, x))?;
        Ok(self.reflect_family(x, x, p.terminal(), colim.object)?.0)
    }

    /// `C / C′ = {C_xy(N −, C′), H_yz(−, C)}` for `C ∈ C_xz`, `C′ ∈ C_xy`.
    fn right_residual(&self, x: usize, y: usize, z: usize, c: &Presheaf, c2: &Presheaf) -> Result<Presheaf> {
        let p = self.probicat;
        let weight = self.hom_n(x, y, c2)?;
        let h = self.hk_family(Which::H, x, y, z, c)?;
        Ok(weighted_limit(p.hom(x, y), p.terminal(), p.hom(y, z), &weight.object, &h.object)?.object)
    }

    /// `C \ C′ = {C_yz(N −, C), K_xy(−, C′)}` for `C ∈ C_yz`, `C′ ∈ C_xz`.
    fn left_residual(&self, x: usize, y: usize, z: usize, c: &Presheaf, c2: &Presheaf) -> Result<Presheaf> {
        let p = self.probicat;
        let weight = self.hom_n(y, z, c)?;
        let k = self.hk_family(Which::K, x, y, z, c2)?;
        Ok(weighted_limit(p.hom(y, z), p.terminal(), p.hom(x, y), &weight.object, &k.object)?.object)
    }

    /// Whether the induced map `C_xz(Q(a, a′), C) → C(N a′, H(a, C))` (or
    /// the `K` analogue) is invertible. Returns the map's images on success.
    fn comparison(
        &self,
        which: Which,
        x: usize,
        y: usize,
        z: usize,
        c: &Presheaf,
        a: usize,
        a2: usize,
    ) -> Result<Option<serde_json::Value>> {
        let p = self.probicat;
        let fam = self.hk_family(which, x, y, z, c)?;
        let n_xy = p.hom(x, y).object_count();
        // (m, k, entry of the Q-hom family, hom carrying N a′)
        let (m, k, entry, (bx, by), m_cat) = match which {
            Which::H => (a, a2, a2 * n_xy + a, (y, z), p.hom(x, y)),
            Which::K => (a, a2, a * n_xy + a2, (x, y), p.hom(y, z)),
        };
        let b_cat = p.hom(bx, by);
        let nb = b_cat.object_count();
        let source = self.n_at(bx, by, k);
        let target = slice_first(m_cat, b_cat, &fam.object, m);
        match (&fam.homs.object, &source, &target) {
            (Presheaf::Set(homs), Presheaf::Set(src), Presheaf::Set(tgt)) => {
                let unit = fam.reflection.as_ref().map(|r| r.unit.components().expect("set unit"));
                let mut images: Vec<Vec<Vec<usize>>> = (0..homs.size(entry))
                    .map(|phi| {
                        (0..nb)
                            .map(|b| {
                                (0..src.size(b))
                                    .map(|d| {
                                        let class = fam.colimit.inject(m, b, k, phi, d);
                                        unit.map_or(class, |u| u[m * nb + b][class])
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect();
                let natural =
                    images.iter().all(|img| NatMap::Components(img.clone()).is_natural(b_cat, &source, &target));
                let total = images.len();
                let witness = json!(images);
                images.sort();
                images.dedup();
                let bijective = images.len() == total && total == count_nat_transformations(b_cat, src, tgt)?;
                Ok((natural && bijective).then_some(witness))
            }
            (Presheaf::Quantale(_), Presheaf::Quantale(_), Presheaf::Quantale(_)) => {
                let lhs = fam.homs.object.value(entry);
                let rhs = presheaf_hom_value(b_cat, &source, &target)?;
                Ok((lhs == rhs).then(|| json!({ "hom": lhs })))
            }
            _ => Err(Error::BackendMismatch("comparison map".into())),
        }
    }
}

fn triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n * n * n).map(move |i| (i / (n * n), (i / n) % n, i % n))
}

/// `Q_xyz(a, a′) = P_xyz(a, a′, X) * N_xz X` for `a ∈ A_yz`, `a′ ∈ A_xy`.
pub fn ext_q(s: &ExtensionSetup<'_>, x: usize, y: usize, z: usize, a: usize, a2: usize) -> Result<Presheaf> {
    s.check_indices(&[x, y, z])?;
    let p = s.probicat;
    let n_xy = p.hom(x, y).object_count();
    if a >= p.hom(y, z).object_count() || a2 >= n_xy {
        return Err(Error::IndexMismatch(format!("1-cells ({a}, {a2}) out of range")));
    }
    Ok(slice_first(p.k(x, y, z), p.hom(x, z), &s.q[p.xyz(x, y, z)], a * n_xy + a2))
}

/// `I_x = J_x X * N_xx X`.
pub fn ext_identity(s: &ExtensionSetup<'_>, x: usize) -> Result<Presheaf> {
    s.check_indices(&[x])?;
    s.identity(x)
}

/// `C ∘ C′ = (C_yz(N X, C) ⊗ C_xy(N X′, C′)) * Q_xyz(X, X′)` for `C ∈ C_yz`,
/// `C′ ∈ C_xy`.
pub fn ext_compose(
    s: &ExtensionSetup<'_>,
    x: usize,
    y: usize,
    z: usize,
    c: &Presheaf,
    c2: &Presheaf,
) -> Result<Presheaf> {
    s.check_indices(&[x, y, z])?;
    s.check_object(y, z, c, "left factor")?;
    s.check_object(x, y, c2, "right factor")?;
    s.compose(x, y, z, c, c2)
}

/// `H_yz(a, C) = C_xz(Q(X, a), C) * N_yz X` for `a ∈ A_xy`, or
/// `K_xy(a, C) = C_xz(Q(a, X), C) * N_xy X` for `a ∈ A_yz`; `C ∈ C_xz`.
pub fn ext_hk(
    s: &ExtensionSetup<'_>,
    which: Which,
    x: usize,
    y: usize,
    z: usize,
    a: usize,
    c: &Presheaf,
) -> Result<Presheaf> {
    s.check_indices(&[x, y, z])?;
    s.check_object(x, z, c, "object")?;
    let p = s.probicat;
    let (m_cat, b_cat) = match which {
        Which::H => (p.hom(x, y), p.hom(y, z)),
        Which::K => (p.hom(y, z), p.hom(x, y)),
    };
    if a >= m_cat.object_count() {
        return Err(Error::IndexMismatch(format!("1-cell {a} out of range")));
    }
    Ok(slice_first(m_cat, b_cat, &s.hk_family(which, x, y, z, c)?.object, a))
}

/// `top / bottom` (right: `top ∈ C_xz`, `bottom ∈ C_xy`) or `bottom \ top`
/// (left: `bottom ∈ C_yz`, `top ∈ C_xz`).
pub fn ext_residual(
    s: &ExtensionSetup<'_>,
    side: Side,
    x: usize,
    y: usize,
    z: usize,
    top: &Presheaf,
    bottom: &Presheaf,
) -> Result<Presheaf> {
    s.check_indices(&[x, y, z])?;
    s.check_object(x, z, top, "residual numerator")?;
    match side {
        Side::Right => {
            s.check_object(x, y, bottom, "residual denominator")?;
            s.right_residual(x, y, z, top, bottom)
        }
        Side::Left => {
            s.check_object(y, z, bottom, "residual denominator")?;
            s.left_residual(x, y, z, bottom, top)
        }
    }
}

/// The two hypotheses: `C_xz(Q(a′, a), C) ≅ C_yz(N a′, H(a, C))` and
/// `C_xz(Q(a, a′), C) ≅ C_xy(N a′, K(a, C))`, for every pair of 1-cells and
/// every `C` in scope, each via the induced comparison.
pub fn ext_iso_check(s: &ExtensionSetup<'_>) -> Result<Report> {
    let p = s.probicat;
    let mut report = Report::new();
    for (which, name) in [(Which::H, "hypothesis_h"), (Which::K, "hypothesis_k")] {
        let mut check = Check::new(name);
        for (x, y, z) in triples(s.n()) {
            let (n_a, n_a2) = match which {
                Which::H => (p.hom(x, y).object_count(), p.hom(y, z).object_count()),
                Which::K => (p.hom(y, z).object_count(), p.hom(x, y).object_count()),
            };
            for (ci, c) in s.objects(x, z).iter().enumerate() {
                for a in 0..n_a {
                    for a2 in 0..n_a2 {
                        let instance = json!({ "objects": [x, y, z], "A": a, "A2": a2, "C": ci });
                        match s.comparison(which, x, y, z, c, a, a2)? {
                            Some(w) => check.pass(|| json!({ "instance": instance, "witness": w })),
                            None => check.fail(|| json!({ "instance": instance, "object": c })),
                        }
                    }
                }
            }
        }
        report.push(check);
    }
    Ok(report)
}

/// The extended structure on `C`.
pub struct ExtendedStructure<'s, 'a> {
    setup: &'s ExtensionSetup<'a>,
}

impl ExtendedStructure<'_, '_> {
    pub fn setup(&self) -> &ExtensionSetup<'_> {
        self.setup
    }
}

impl Biclosed for ExtendedStructure<'_, '_> {
    fn probicategory(&self) -> &Probicategory {
        self.setup.probicat
    }

    fn compose(&self, x: usize, y: usize, z: usize, f: &Presheaf, g: &Presheaf) -> Result<Presheaf> {
        self.setup.compose(x, y, z, f, g)
    }

    fn identity(&self, x: usize) -> Result<Presheaf> {
        self.setup.identity(x)
    }

    fn right_residual(&self, x: usize, y: usize, z: usize, h: &Presheaf, g: &Presheaf) -> Result<Presheaf> {
        self.setup.right_residual(x, y, z, h, g)
    }

    fn left_residual(&self, x: usize, y: usize, z: usize, f: &Presheaf, h: &Presheaf) -> Result<Presheaf> {
        self.setup.left_residual(x, y, z, f, h)
    }

    fn scope_objects(&self, x: usize, y: usize, _scope: &Scope) -> Result<Vec<Presheaf>> {
        Ok(self.setup.objects(x, y).to_vec())
    }
}

/// Outcome of [`extend_structure`]; `structure` is present only when every
/// check passed.
pub struct Extension<'s, 'a> {
    pub structure: Option<ExtendedStructure<'s, 'a>>,
    pub report: Report,
}

fn density_checks(s: &ExtensionSetup<'_>) -> Check {
    let mut check = Check::new("density");
    let n = s.n();
    for x in 0..n {
        for y in 0..n {
            for e in &s.density(x, y).entries {
                match &e.witness {
                    Some(w) => check.pass(|| json!({ "hom": [x, y], "c": e.index, "witness": w })),
                    None => check.fail(|| json!({ "hom": [x, y], "C": e.object, "colimit": e.comparison_source })),
                }
            }
        }
    }
    check
}

/// `N a ∘ N a′ ≅ Q(a, a′)` for all 1-cells, with witnesses.
fn extends_check(s: &ExtensionSetup<'_>) -> Result<Check> {
    let p = s.probicat;
    let mut check = Check::new("extends");
    for (x, y, z) in triples(s.n()) {
        for a in 0..p.hom(y, z).object_count() {
            for a2 in 0..p.hom(x, y).object_count() {
                let composite = s.compose(x, y, z, &s.n_at(y, z, a), &s.n_at(x, y, a2))?;
                let q = ext_q(s, x, y, z, a, a2)?;
                match find_natural_iso(p.hom(x, z), &composite, &q, s.scope.cap)? {
                    Some(w) => check.pass(|| json!({ "objects": [x, y, z], "A": a, "A2": a2, "witness": w })),
                    None => {
                        check.fail(|| json!({ "objects": [x, y, z], "A": a, "A2": a2, "composite": composite, "Q": q }))
                    }
                }
            }
        }
    }
    Ok(check)
}

/// Density, both hypotheses, the biclosed laws on `C`, and the restriction
/// `N a ∘ N a′ ≅ Q(a, a′)`. Stops at the first failing stage.
pub fn extend_structure<'s, 'a>(s: &'s ExtensionSetup<'a>) -> Result<Extension<'s, 'a>> {
    let mut report = Report::new();
    report.push(density_checks(s));
    if report.passed() {
        report.extend(ext_iso_check(s)?);
    }
    if report.passed() {
        let t = ExtendedStructure { setup: s };
        report.extend(biclosed_validate(&t, &s.scope)?);
        report.push(extends_check(s)?);
    }
    let structure = report.passed().then_some(ExtendedStructure { setup: s });
    Ok(Extension { structure, report })
}

fn iso_entry(
    check: &mut Check,
    cat: &Category,
    got: Result<Presheaf>,
    want: Result<Presheaf>,
    cap: u64,
    instance: serde_json::Value,
) -> Result<()> {
    match (got, want) {
        (Ok(g), Ok(w)) => match find_natural_iso(cat, &g, &w, cap)? {
            Some(wit) => check.pass(|| json!({ "instance": instance, "witness": wit })),
            None => check.fail(|| json!({ "instance": instance, "extension": g, "oracle": w })),
        },
        (Err(e @ (Error::NotInSubcategory(_) | Error::Reflection(_))), _)
        | (_, Err(e @ (Error::NotInSubcategory(_) | Error::Reflection(_)))) => {
            check.fail(|| json!({ "instance": instance, "error": e.to_string() }))
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    }
    Ok(())
}

/// Componentwise comparison of two structures on the extension's scope
/// objects: `∘`, `I`, `/` and `\`, each with a witness.
pub fn compare_structures(s: &ExtensionSetup<'_>, oracle: &dyn Biclosed) -> Result<Report> {
    let p = s.probicat;
    let ext = ExtendedStructure { setup: s };
    let cap = s.scope.cap;
    let mut compose = Check::new("compose");
    let mut identity = Check::new("identity");
    let mut right = Check::new("right_residual");
    let mut left = Check::new("left_residual");
    for (x, y, z) in triples(s.n()) {
        for (fi, f) in s.objects(y, z).iter().enumerate() {
            for (gi, g) in s.objects(x, y).iter().enumerate() {
                let instance = json!({ "objects": [x, y, z], "f": fi, "g": gi });
                iso_entry(
                    &mut compose,
                    p.hom(x, z),
                    ext.compose(x, y, z, f, g),
                    oracle.compose(x, y, z, f, g),
                    cap,
                    instance,
                )?;
            }
        }
        for (hi, h) in s.objects(x, z).iter().enumerate() {
            for (gi, g) in s.objects(x, y).iter().enumerate() {
                let instance = json!({ "objects": [x, y, z], "h": hi, "g": gi });
                let got = ext.right_residual(x, y, z, h, g);
                iso_entry(&mut right, p.hom(y, z), got, oracle.right_residual(x, y, z, h, g), cap, instance)?;
            }
            for (fi, f) in s.objects(y, z).iter().enumerate() {
                let instance = json!({ "objects": [x, y, z], "f": fi, "h": hi });
                let got = ext.left_residual(x, y, z, f, h);
                iso_entry(&mut left, p.hom(x, y), got, oracle.left_residual(x, y, z, f, h), cap, instance)?;
            }
        }
    }
    for x in 0..s.n() {
        iso_entry(&mut identity, p.hom(x, x), ext.identity(x), oracle.identity(x), cap, json!({ "object": x }))?;
    }
    let mut report = Report::new();
    report.push(compose);
    report.push(identity);
    report.push(right);
    report.push(left);
    Ok(report)
}

/// Compares the extension with convolution (`N` Yoneda) or with the
/// structure [`localise_probicat`] transfers (`N` Yoneda then Σ-localisation).
pub fn compare_with_oracle(s: &ExtensionSetup<'_>, mode: OracleMode) -> Result<Report> {
    match (mode, &s.origin) {
        (OracleMode::Yoneda, Origin::Yoneda) => compare_structures(s, &Convolution::new(s.probicat)),
        (OracleMode::Localisation, Origin::Localisation { sigma, max_iter }) => {
            let localised = localise_probicat(s.probicat, sigma.clone(), s.scope, None, *max_iter)?;
            if localised.verified.is_none() {
                let mut report = Report::new();
                let mut check = Check::new("oracle");
                check.error("localisation verified none of conditions 1 to 6; no transferred structure to compare");
                report.push(check);
                return Ok(report);
            }
            compare_structures(s, &localised.setup.transfer())
        }
        (mode, _) => Err(Error::Parameter(format!("the {mode:?} oracle needs a family built for it"))),
    }
}
