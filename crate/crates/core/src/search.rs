//! Backtracking search for natural transformations between finite-set-valued
//! functors. Shared by witness search, hom enumeration and factorisation.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::calculus::SetPresheaf;
use crate::error::{Error, Result};
use crate::fincat::Category;

/// Search problem: natural transformations `src ⇒ tgt` over `cat`, optionally
/// componentwise injective (with equal sizes this means bijective) and with
/// some components pinned in advance.
pub(crate) struct NatProblem<'a> {
    pub cat: &'a Category,
    pub src: &'a SetPresheaf,
    pub tgt: &'a SetPresheaf,
    pub injective: bool,
    /// Pinned values, indexed by flattened source element.
    pub fixed: Option<&'a [Option<usize>]>,
    /// Colour classes of flattened source and target elements; a source
    /// element may only map to a target element of its own colour.
    pub colours: Option<(&'a [u32], &'a [u32])>,
}

/// A constraint `θ(v) == tgt(f)(θ(u))`, checked once both sides are assigned.
#[derive(Clone, Copy)]
struct Square {
    u: usize,
    f: usize,
    v: usize,
}

impl NatProblem<'_> {
    /// Flattened offsets of the source elements, one per object.
    pub fn offsets(src: &SetPresheaf) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(src.sizes().len() + 1);
        let mut acc = 0;
        for &s in src.sizes() {
            offsets.push(acc);
            acc += s;
        }
        offsets.push(acc);
        offsets
    }

    /// Calls `visit` on each solution (a flattened assignment), stopping when
    /// it returns `false`. Objects are filled codomains first so that every
    /// square is checked as soon as its source element is placed. Every value
    /// tried counts against `cap`.
    pub fn solve(&self, cap: u64, mut visit: impl FnMut(&[usize]) -> bool) -> Result<()> {
        let offsets = Self::offsets(self.src);
        let total = *offsets.last().unwrap();
        let n = self.src.sizes().len();
        let mut object_of = Vec::with_capacity(total);
        for x in 0..n {
            object_of.extend(std::iter::repeat_n(x, self.src.size(x)));
        }
        // objects with fewer strictly-later objects come first
        let above = |x: usize| (0..n).filter(|&y| self.cat.has_arrow(x, y) && !self.cat.has_arrow(y, x)).count();
        let mut objects: Vec<usize> = (0..n).collect();
        objects.sort_by_key(|&x| (above(x), x));
        let sequence: Vec<usize> = objects.iter().flat_map(|&x| offsets[x]..offsets[x + 1]).collect();
        let mut position = vec![0; total];
        for (i, &e) in sequence.iter().enumerate() {
            position[e] = i;
        }
        let mut checks: Vec<Vec<Square>> = vec![Vec::new(); total];
        for (f, m) in self.cat.morphisms().iter().enumerate() {
            if self.cat.identity(m.src) == f {
                continue;
            }
            let act = self.src.action(f);
            for uu in 0..self.src.size(m.src) {
                let u = offsets[m.src] + uu;
                let v = offsets[m.tgt] + act[uu];
                checks[position[u].max(position[v])].push(Square { u, f, v });
            }
        }
        if let Some(fixed) = self.fixed {
            // pinned values are checked against each other up front
            for i in 0..total {
                if let Some(val) = fixed[i] {
                    if val >= self.tgt.size(object_of[i]) {
                        return Ok(());
                    }
                }
            }
        }
        let tgt_offsets = Self::offsets(self.tgt);
        let mut theta = vec![usize::MAX; total];
        let mut used: Vec<Vec<bool>> =
            (0..n).map(|x| vec![false; if self.injective { self.tgt.size(x) } else { 0 }]).collect();
        let mut budget = cap;
        let mut state = State {
            problem: self,
            object_of: &object_of,
            tgt_offsets: &tgt_offsets,
            sequence: &sequence,
            checks: &checks,
            theta: &mut theta,
            used: &mut used,
            budget: &mut budget,
            cap,
        };
        state.descend(0, &mut visit).map(|_| ())
    }
}

struct State<'s, 'a> {
    problem: &'s NatProblem<'a>,
    object_of: &'s [usize],
    tgt_offsets: &'s [usize],
    sequence: &'s [usize],
    checks: &'s [Vec<Square>],
    theta: &'s mut Vec<usize>,
    used: &'s mut Vec<Vec<bool>>,
    budget: &'s mut u64,
    cap: u64,
}

impl State<'_, '_> {
    // Returns Ok(false) once the visitor asks to stop.
    fn descend(&mut self, i: usize, visit: &mut impl FnMut(&[usize]) -> bool) -> Result<bool> {
        if i == self.theta.len() {
            return Ok(visit(self.theta));
        }
        let e = self.sequence[i];
        let x = self.object_of[e];
        let pinned = self.problem.fixed.and_then(|f| f[e]);
        let range = match pinned {
            Some(v) => v..v + 1,
            None => 0..self.problem.tgt.size(x),
        };
        for cand in range {
            if self.problem.injective && self.used[x][cand] {
                continue;
            }
            if let Some((src, tgt)) = self.problem.colours {
                if src[e] != tgt[self.tgt_offsets[x] + cand] {
                    continue;
                }
            }
            if *self.budget == 0 {
                return Err(Error::SearchCap { cap: self.cap, context: "natural transformation search".into() });
            }
            *self.budget -= 1;
            self.theta[e] = cand;
            let ok = self.checks[i].iter().all(|sq| {
                let img = self.problem.tgt.action(sq.f)[self.theta[sq.u]];
                self.theta[sq.v] == img
            });
            if !ok {
                continue;
            }
            if self.problem.injective {
                self.used[x][cand] = true;
            }
            let cont = self.descend(i + 1, visit)?;
            if self.problem.injective {
                self.used[x][cand] = false;
            }
            if !cont {
                return Ok(false);
            }
        }
        self.theta[e] = usize::MAX;
        Ok(true)
    }
}

/// Colour refinement on the elements of two presheaves at once: start from
/// the object, then split by the colours of images and of preimages under
/// every non-identity morphism until stable. Isomorphisms preserve colours,
/// so differing colour counts at any object rule an iso out.
pub(crate) fn refine_colours(cat: &Category, a: &SetPresheaf, b: &SetPresheaf) -> (Vec<u32>, Vec<u32>) {
    let moving: Vec<usize> = (0..cat.morphism_count()).filter(|&f| !cat.is_identity(f)).collect();
    let shapes = [a, b].map(|p| {
        let offsets = NatProblem::offsets(p);
        let mut object_of = Vec::new();
        for x in 0..p.sizes().len() {
            object_of.extend(std::iter::repeat_n(x as u32, p.size(x)));
        }
        // images[u] = (f, image) and preimages[v] = (f, source), flattened
        let mut images = vec![Vec::new(); object_of.len()];
        let mut preimages = vec![Vec::new(); object_of.len()];
        for &f in &moving {
            let m = &cat.morphisms()[f];
            for (uu, &vv) in p.action(f).iter().enumerate() {
                let (u, v) = (offsets[m.src] + uu, offsets[m.tgt] + vv);
                images[u].push((f, v));
                preimages[v].push((f, u));
            }
        }
        (object_of, images, preimages)
    });
    let mut colours: [Vec<u32>; 2] = [shapes[0].0.clone(), shapes[1].0.clone()];
    let mut classes = usize::MAX;
    let mut inward = Vec::new();
    loop {
        // signatures are hashed; a collision only merges classes, which
        // keeps the partition invariant under isomorphism
        let signatures: [Vec<u64>; 2] = [0, 1].map(|side| {
            let (_, images, preimages) = &shapes[side];
            let c = &colours[side];
            (0..c.len())
                .map(|u| {
                    let mut h = DefaultHasher::new();
                    c[u].hash(&mut h);
                    for &(f, v) in &images[u] {
                        (f, c[v]).hash(&mut h);
                    }
                    inward.clear();
                    inward.extend(preimages[u].iter().map(|&(f, w)| (f, c[w])));
                    inward.sort_unstable();
                    inward.hash(&mut h);
                    h.finish()
                })
                .collect()
        });
        let mut distinct: Vec<u64> = signatures.iter().flatten().copied().collect();
        distinct.sort_unstable();
        distinct.dedup();
        colours = [0, 1].map(|side| {
            signatures[side].iter().map(|sig| distinct.binary_search(sig).expect("present") as u32).collect()
        });
        if distinct.len() == classes {
            let [a, b] = colours;
            return (a, b);
        }
        classes = distinct.len();
    }
}
