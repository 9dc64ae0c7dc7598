//! The ground category V, realized exactly as either a finite commutative
//! quantale or the category of finite sets.
//!
//! Quantale elements are canonical integer ids `0..n`. The order is supplied
//! as a relation table; joins, meets, bottom, top and the residual (internal
//! hom) are all derived from it by exhaustive scan.

use std::fmt;

use serde::Serialize;

use crate::error::Error;

/// Element id inside a quantale carrier.
pub type Elem = usize;

/// Unvalidated quantale data, as read from a model file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantaleTables {
    pub labels: Vec<String>,
    /// Pairs `(a, b)` meaning `a <= b`. Reflexive pairs are implied.
    pub leq: Vec<(Elem, Elem)>,
    /// Triples `(a, b, a ⊗ b)`; must cover every ordered pair exactly once.
    pub tensor: Vec<(Elem, Elem, Elem)>,
    pub unit: Elem,
}

/// The first quantale law found to fail, with the elements that witness it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum QuantaleViolation {
    EmptyCarrier,
    OutOfRange {
        value: Elem,
    },
    TensorNotTotal {
        a: Elem,
        b: Elem,
    },
    TensorDuplicate {
        a: Elem,
        b: Elem,
    },
    NotAntisymmetric {
        a: Elem,
        b: Elem,
    },
    NotTransitive {
        a: Elem,
        b: Elem,
        c: Elem,
    },
    NoBottom,
    NoJoin {
        a: Elem,
        b: Elem,
    },
    NotCommutative {
        a: Elem,
        b: Elem,
    },
    NotAssociative {
        a: Elem,
        b: Elem,
        c: Elem,
    },
    NotUnital {
        a: Elem,
    },
    /// `a ⊗ (b ∨ c) != (a ⊗ b) ∨ (a ⊗ c)`
    NotDistributive {
        a: Elem,
        b: Elem,
        c: Elem,
    },
    /// `a ⊗ ⊥ != ⊥`, i.e. the tensor fails to preserve the empty join.
    NotStrict {
        a: Elem,
    },
}

impl fmt::Display for QuantaleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use QuantaleViolation::*;
        match self {
            EmptyCarrier => write!(f, "carrier is empty"),
            OutOfRange { value } => write!(f, "element id {value} is outside the carrier"),
            TensorNotTotal { a, b } => write!(f, "tensor table has no entry for ({a}, {b})"),
            TensorDuplicate { a, b } => write!(f, "tensor table has two entries for ({a}, {b})"),
            NotAntisymmetric { a, b } => write!(f, "order not antisymmetric: {a} <= {b} <= {a}"),
            NotTransitive { a, b, c } => {
                write!(f, "order not transitive: {a} <= {b} <= {c} but not {a} <= {c}")
            }
            NoBottom => write!(f, "order has no least element"),
            NoJoin { a, b } => write!(f, "elements {a} and {b} have no least upper bound"),
            NotCommutative { a, b } => write!(f, "{a} ⊗ {b} != {b} ⊗ {a}"),
            NotAssociative { a, b, c } => write!(f, "({a} ⊗ {b}) ⊗ {c} != {a} ⊗ ({b} ⊗ {c})"),
            NotUnital { a } => write!(f, "unit ⊗ {a} != {a}"),
            NotDistributive { a, b, c } => {
                write!(f, "{a} ⊗ ({b} ∨ {c}) != ({a} ⊗ {b}) ∨ ({a} ⊗ {c})")
            }
            NotStrict { a } => write!(f, "{a} ⊗ bottom != bottom"),
        }
    }
}

/// A validated finite commutative unital quantale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quantale {
    name: String,
    labels: Vec<String>,
    n: usize,
    leq: Vec<bool>,
    tensor: Vec<Elem>,
    unit: Elem,
    join: Vec<Elem>,
    meet: Vec<Elem>,
    residual: Vec<Elem>,
    bottom: Elem,
    top: Elem,
}

/// Built-in quantale families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuantaleKind {
    Boolean,
    /// `0 < 1 < … < n-1` with tensor = meet and unit = top.
    Chain(usize),
    /// Carrier `0..=cap`, order reversed numerically, tensor = capped addition, unit 0.
    Tropical(usize),
}

struct Dense {
    n: usize,
    leq: Vec<bool>,
    tensor: Vec<Elem>,
}

/// Checks every quantale law on the raw tables, returning the first failure.
pub fn check_quantale(tables: &QuantaleTables) -> Result<(), QuantaleViolation> {
    let dense = densify(tables)?;
    let (join, bottom) = lattice(&dense)?;
    monoid_laws(&dense, tables.unit)?;
    distributivity(&dense, &join, bottom)
}

fn densify(t: &QuantaleTables) -> Result<Dense, QuantaleViolation> {
    let n = t.labels.len();
    if n == 0 {
        return Err(QuantaleViolation::EmptyCarrier);
    }
    let in_range = |v: Elem| if v < n { Ok(v) } else { Err(QuantaleViolation::OutOfRange { value: v }) };
    in_range(t.unit)?;
    let mut leq = vec![false; n * n];
    for a in 0..n {
        leq[a * n + a] = true;
    }
    for &(a, b) in &t.leq {
        leq[in_range(a)? * n + in_range(b)?] = true;
    }
    let mut tensor = vec![usize::MAX; n * n];
    for &(a, b, c) in &t.tensor {
        let slot = &mut tensor[in_range(a)? * n + in_range(b)?];
        if *slot != usize::MAX {
            return Err(QuantaleViolation::TensorDuplicate { a, b });
        }
        *slot = in_range(c)?;
    }
    for a in 0..n {
        for b in 0..n {
            if tensor[a * n + b] == usize::MAX {
                return Err(QuantaleViolation::TensorNotTotal { a, b });
            }
        }
    }
    Ok(Dense { n, leq, tensor })
}

fn lattice(d: &Dense) -> Result<(Vec<Elem>, Elem), QuantaleViolation> {
    let n = d.n;
    let le = |a: Elem, b: Elem| d.leq[a * n + b];
    for a in 0..n {
        for b in 0..n {
            if a != b && le(a, b) && le(b, a) {
                return Err(QuantaleViolation::NotAntisymmetric { a, b });
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if le(a, b) && le(b, c) && !le(a, c) {
                    return Err(QuantaleViolation::NotTransitive { a, b, c });
                }
            }
        }
    }
    let bottom = (0..n).find(|&b| (0..n).all(|x| le(b, x))).ok_or(QuantaleViolation::NoBottom)?;
    let mut join = vec![0; n * n];
    for a in 0..n {
        for b in 0..n {
            let upper: Vec<Elem> = (0..n).filter(|&u| le(a, u) && le(b, u)).collect();
            let least = upper
                .iter()
                .copied()
                .find(|&u| upper.iter().all(|&v| le(u, v)))
                .ok_or(QuantaleViolation::NoJoin { a, b })?;
            join[a * n + b] = least;
        }
    }
    Ok((join, bottom))
}

fn monoid_laws(d: &Dense, unit: Elem) -> Result<(), QuantaleViolation> {
    let n = d.n;
    let t = |a: Elem, b: Elem| d.tensor[a * n + b];
    for a in 0..n {
        for b in 0..n {
            if t(a, b) != t(b, a) {
                return Err(QuantaleViolation::NotCommutative { a, b });
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if t(t(a, b), c) != t(a, t(b, c)) {
                    return Err(QuantaleViolation::NotAssociative { a, b, c });
                }
            }
        }
    }
    for a in 0..n {
        if t(unit, a) != a {
            return Err(QuantaleViolation::NotUnital { a });
        }
    }
    Ok(())
}

// Binary joins plus the empty join generate every finite join, so these two
// checks cover distributivity over arbitrary subsets of a finite carrier.
fn distributivity(d: &Dense, join: &[Elem], bottom: Elem) -> Result<(), QuantaleViolation> {
    let n = d.n;
    let t = |a: Elem, b: Elem| d.tensor[a * n + b];
    let j = |a: Elem, b: Elem| join[a * n + b];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if t(a, j(b, c)) != j(t(a, b), t(a, c)) {
                    return Err(QuantaleViolation::NotDistributive { a, b, c });
                }
            }
        }
    }
    for a in 0..n {
        if t(a, bottom) != bottom {
            return Err(QuantaleViolation::NotStrict { a });
        }
    }
    Ok(())
}

impl Quantale {
    pub fn new(name: impl Into<String>, tables: &QuantaleTables) -> Result<Self, QuantaleViolation> {
        let dense = densify(tables)?;
        let (join, bottom) = lattice(&dense)?;
        monoid_laws(&dense, tables.unit)?;
        distributivity(&dense, &join, bottom)?;
        let n = dense.n;
        let le = |a: Elem, b: Elem| dense.leq[a * n + b];
        let top = (0..n).find(|&t| (0..n).all(|x| le(x, t))).expect("finite lattice has a top");
        let mut meet = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                let lower: Vec<Elem> = (0..n).filter(|&l| le(l, a) && le(l, b)).collect();
                meet[a * n + b] = lower
                    .iter()
                    .copied()
                    .find(|&l| lower.iter().all(|&m| le(m, l)))
                    .expect("finite lattice with joins has meets");
            }
        }
        let mut residual = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                residual[a * n + b] =
                    (0..n).filter(|&x| le(dense.tensor[a * n + x], b)).fold(bottom, |acc, x| join[acc * n + x]);
            }
        }
        Ok(Quantale {
            name: name.into(),
            labels: tables.labels.clone(),
            n,
            leq: dense.leq,
            tensor: dense.tensor,
            unit: tables.unit,
            join,
            meet,
            residual,
            bottom,
            top,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn label(&self, a: Elem) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.n
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.leq[a * self.n + b]
    }

    pub fn tensor(&self, a: Elem, b: Elem) -> Elem {
        self.tensor[a * self.n + b]
    }

    pub fn unit(&self) -> Elem {
        self.unit
    }

    pub fn bottom(&self) -> Elem {
        self.bottom
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    pub fn join(&self, a: Elem, b: Elem) -> Elem {
        self.join[a * self.n + b]
    }

    pub fn meet(&self, a: Elem, b: Elem) -> Elem {
        self.meet[a * self.n + b]
    }

    pub fn join_all(&self, items: impl IntoIterator<Item = Elem>) -> Elem {
        items.into_iter().fold(self.bottom, |acc, x| self.join(acc, x))
    }

    pub fn meet_all(&self, items: impl IntoIterator<Item = Elem>) -> Elem {
        items.into_iter().fold(self.top, |acc, x| self.meet(acc, x))
    }

    /// The internal hom `[a, b] = ⋁{x : a ⊗ x <= b}`.
    pub fn residual(&self, a: Elem, b: Elem) -> Elem {
        self.residual[a * self.n + b]
    }

    /// Length of the longest strict chain, counted in steps.
    pub fn height(&self) -> usize {
        // longest path in the strict order, memoised over elements sorted by down-set size
        let mut order: Vec<Elem> = self.elements().collect();
        order.sort_by_key(|&a| self.elements().filter(|&x| self.leq(x, a)).count());
        let mut depth = vec![0usize; self.n];
        for &a in &order {
            depth[a] = self.elements().filter(|&x| x != a && self.leq(x, a)).map(|x| depth[x] + 1).max().unwrap_or(0);
        }
        depth.into_iter().max().unwrap_or(0)
    }

    /// The tables this quantale was built from, in canonical form.
    pub fn tables(&self) -> QuantaleTables {
        let mut leq = Vec::new();
        let mut tensor = Vec::new();
        for a in self.elements() {
            for b in self.elements() {
                if a != b && self.leq(a, b) {
                    leq.push((a, b));
                }
                tensor.push((a, b, self.tensor(a, b)));
            }
        }
        QuantaleTables { labels: self.labels.clone(), leq, tensor, unit: self.unit }
    }
}

/// Builds one of the shipped quantale instances.
pub fn make_quantale(kind: QuantaleKind) -> Result<Quantale, Error> {
    let (name, tables) = match kind {
        QuantaleKind::Boolean => ("boolean".to_string(), chain_tables(2)),
        QuantaleKind::Chain(n) => {
            if n < 2 {
                return Err(Error::Parameter(format!("chain length must be at least 2, got {n}")));
            }
            (format!("chain({n})"), chain_tables(n))
        }
        QuantaleKind::Tropical(cap) => {
            if cap < 1 {
                return Err(Error::Parameter("tropical cap must be at least 1".into()));
            }
            let labels = (0..=cap).map(|i| i.to_string()).collect();
            let mut leq = Vec::new();
            let mut tensor = Vec::new();
            for a in 0..=cap {
                for b in 0..=cap {
                    if a > b {
                        leq.push((a, b));
                    }
                    tensor.push((a, b, (a + b).min(cap)));
                }
            }
            (format!("tropical({cap})"), QuantaleTables { labels, leq, tensor, unit: 0 })
        }
    };
    Quantale::new(name, &tables).map_err(Error::Quantale)
}

fn chain_tables(n: usize) -> QuantaleTables {
    let labels = (0..n).map(|i| i.to_string()).collect();
    let mut leq = Vec::new();
    let mut tensor = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a < b {
                leq.push((a, b));
            }
            tensor.push((a, b, a.min(b)));
        }
    }
    QuantaleTables { labels, leq, tensor, unit: n - 1 }
}

/// A concrete value of V.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VObject {
    /// An element of the quantale carrier.
    Element(Elem),
    /// The finite set `{0, …, n-1}`.
    FiniteSet(usize),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_subsets(n: usize) -> impl Iterator<Item = Vec<Elem>> {
        (0u32..(1 << n)).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
    }

    #[test]
    fn shipped_instances_pass_laws() {
        for kind in [
            QuantaleKind::Boolean,
            QuantaleKind::Chain(3),
            QuantaleKind::Chain(5),
            QuantaleKind::Tropical(3),
            QuantaleKind::Tropical(7),
        ] {
            let q = make_quantale(kind).unwrap();
            assert_eq!(check_quantale(&q.tables()), Ok(()), "{kind:?}");
        }
    }

    #[test]
    fn boolean_and_chain_shapes() {
        let b = make_quantale(QuantaleKind::Boolean).unwrap();
        assert_eq!(b.size(), 2);
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(b.tensor(x, y), x & y);
            }
        }
        let c = make_quantale(QuantaleKind::Chain(3)).unwrap();
        assert_eq!(c.unit(), 2);
        assert_eq!(c.top(), 2);
        assert_eq!(c.tensor(1, 2), 1);
    }

    #[test]
    fn boolean_residuals() {
        let b = make_quantale(QuantaleKind::Boolean).unwrap();
        assert_eq!(b.residual(1, 0), 0);
        assert_eq!(b.residual(0, 0), 1);
    }

    #[test]
    fn tropical_residual_matches_brute_force() {
        let t = make_quantale(QuantaleKind::Tropical(3)).unwrap();
        // oracle: join (numeric min) over x with min(1 + x, 3) >= 3 numerically
        let oracle = (0..=3usize).filter(|&x| (1 + x).min(3) >= 3).min().unwrap();
        assert_eq!(oracle, 2);
        assert_eq!(t.residual(1, 3), oracle);
        assert_eq!(t.join(1, 2), 1);
        assert_eq!(t.bottom(), 3);
        assert_eq!(t.top(), 0);
    }

    #[test]
    fn parameters_out_of_range() {
        assert!(make_quantale(QuantaleKind::Chain(1)).is_err());
        assert!(make_quantale(QuantaleKind::Tropical(0)).is_err());
    }

    #[test]
    fn max_tensor_on_a_permuted_chain_fails_with_genuine_witness() {
        // Exhaustive search over the six chain orders of {0,1,2}: tensor is the
        // numeric max (unital at 0), the lattice order is the permuted chain.
        let mut failures = 0;
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let mut leq = Vec::new();
            for i in 0..3 {
                for j in i + 1..3 {
                    leq.push((perm[i], perm[j]));
                }
            }
            let mut tensor = Vec::new();
            for a in 0..3 {
                for b in 0..3 {
                    tensor.push((a, b, a.max(b)));
                }
            }
            let tables = QuantaleTables { labels: vec!["0".into(), "1".into(), "2".into()], leq, tensor, unit: 0 };
            let rank = |x: usize| perm.iter().position(|&p| p == x).unwrap();
            let join = |a: usize, b: usize| if rank(a) >= rank(b) { a } else { b };
            match check_quantale(&tables) {
                Ok(()) => {
                    // independent confirmation of distributivity on this order
                    for a in 0..3 {
                        for b in 0..3 {
                            for c in 0..3 {
                                assert_eq!(a.max(join(b, c)), join(a.max(b), a.max(c)));
                            }
                        }
                        assert_eq!(a.max(perm[0]), perm[0]);
                    }
                }
                Err(QuantaleViolation::NotDistributive { a, b, c }) => {
                    failures += 1;
                    assert_ne!(a.max(join(b, c)), join(a.max(b), a.max(c)));
                }
                Err(QuantaleViolation::NotStrict { a }) => {
                    failures += 1;
                    assert_ne!(a.max(perm[0]), perm[0]);
                }
                Err(other) => panic!("unexpected violation {other:?}"),
            }
        }
        assert!(failures > 0);
    }

    #[test]
    fn malformed_tables_are_reported() {
        let mut t = chain_tables(3);
        t.tensor.pop();
        assert_eq!(check_quantale(&t), Err(QuantaleViolation::TensorNotTotal { a: 2, b: 2 }));
        let mut t = chain_tables(3);
        t.leq.push((2, 0));
        assert!(matches!(check_quantale(&t), Err(QuantaleViolation::NotAntisymmetric { .. })));
        let mut t = chain_tables(3);
        t.leq.retain(|&p| p != (0, 2));
        assert_eq!(check_quantale(&t), Err(QuantaleViolation::NotTransitive { a: 0, b: 1, c: 2 }));
        let mut t = chain_tables(3);
        t.unit = 1;
        assert_eq!(check_quantale(&t), Err(QuantaleViolation::NotUnital { a: 2 }));
    }

    #[test]
    fn residual_laws_exhaustive_on_small_instances() {
        for kind in [QuantaleKind::Boolean, QuantaleKind::Chain(4), QuantaleKind::Tropical(5)] {
            let q = make_quantale(kind).unwrap();
            for b in q.elements() {
                assert_eq!(q.residual(q.unit(), b), b);
            }
            for a in q.elements() {
                for s in all_subsets(q.size()) {
                    let lhs = q.tensor(a, q.join_all(s.iter().copied()));
                    let rhs = q.join_all(s.iter().map(|&x| q.tensor(a, x)));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn height_of_chain() {
        assert_eq!(make_quantale(QuantaleKind::Chain(5)).unwrap().height(), 4);
        assert_eq!(make_quantale(QuantaleKind::Tropical(3)).unwrap().height(), 3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn residuation_adjunction(kind in prop_oneof![
                Just(QuantaleKind::Boolean),
                (2usize..6).prop_map(QuantaleKind::Chain),
                (1usize..8).prop_map(QuantaleKind::Tropical),
            ]) {
                let q = make_quantale(kind).unwrap();
                for a in q.elements() {
                    for x in q.elements() {
                        for b in q.elements() {
                            prop_assert_eq!(q.leq(q.tensor(a, x), b), q.leq(x, q.residual(a, b)));
                        }
                    }
                }
            }
        }
    }
}
