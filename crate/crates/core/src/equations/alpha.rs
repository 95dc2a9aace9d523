//! Recovering the coefficients `α_C` from the linear system they satisfy.
//!
//! For every `(k+t)`-subset `E` and `(k-2)`-subset `A ⊆ E`,
//! `Σ_{C ⊇ A} α_C Π_{z ∈ E \ C} det(z, C)^{-1} = 0`, the sum over the
//! `(k-1)`-subsets `C` of `E`. The unknowns are the `α_C`; a solution with no
//! zero coordinate is recovered from the nullspace.

use std::collections::HashMap;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{deficiency, difference, is_subset, random_subset, union, EqError};
use crate::exactla::GfMatrix;
use crate::gf::{Field, FieldElement};
use crate::projgeom::{det_uc, Arc};

/// Seed for the generic combination drawn when the nullspace is not a line.
const COMBINATION_SEED: u64 = 0x00a1_fa5e_ed00;
const COMBINATION_ATTEMPTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphaEntry {
    #[serde(rename = "C")]
    pub subset: Vec<usize>,
    pub alpha: FieldElement,
}

/// Nonzero `α_C` for every `(k-1)`-subset `C` of the scope, normalized so the
/// lexicographically first subset has value 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphaSystem {
    pub scope: Vec<usize>,
    pub entries: Vec<AlphaEntry>,
    pub nullspace_dim: usize,
    pub equations_used: usize,
    pub combination_attempts: usize,
}

impl AlphaSystem {
    /// Value for an ascending `(k-1)`-tuple.
    pub fn get(&self, c: &[usize]) -> Option<FieldElement> {
        self.entries.binary_search_by(|e| e.subset.as_slice().cmp(c)).ok().map(|i| self.entries[i].alpha)
    }

    pub fn try_get(&self, c: &[usize]) -> Result<FieldElement, EqError> {
        self.get(c).ok_or_else(|| EqError::MissingAlpha(c.to_vec()))
    }

    /// All values multiplied by `s`, keeping the bookkeeping fields.
    pub fn scaled(&self, f: &Field, s: FieldElement) -> AlphaSystem {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.alpha = f.mul(e.alpha, s);
        }
        out
    }

    /// An alpha system with given values, for experiments (no solving).
    pub fn from_values(scope: Vec<usize>, k: usize, value: impl Fn(&[usize]) -> FieldElement) -> AlphaSystem {
        let entries = scope
            .iter()
            .copied()
            .combinations(k - 1)
            .map(|c| AlphaEntry { alpha: value(&c), subset: c })
            .collect();
        AlphaSystem { scope, entries, nullspace_dim: 0, equations_used: 0, combination_attempts: 0 }
    }
}

/// Row space kept in echelon form by insertion order; each stored row has
/// zeros at the pivots of all earlier rows.
struct Echelon {
    field: Field,
    rows: Vec<(usize, Vec<FieldElement>)>,
}

impl Echelon {
    fn insert(&mut self, mut row: Vec<FieldElement>) -> bool {
        let f = &self.field;
        for (p, basis) in &self.rows {
            let c = row[*p];
            if c.is_zero() {
                continue;
            }
            for (x, &b) in row.iter_mut().zip(basis) {
                if !b.is_zero() {
                    *x = f.sub(*x, f.mul(c, b));
                }
            }
        }
        let Some(p) = row.iter().position(|x| !x.is_zero()) else { return false };
        let inv = f.inv(row[p]).expect("nonzero");
        for x in &mut row {
            *x = f.mul(*x, inv);
        }
        self.rows.push((p, row));
        true
    }
}

/// Equation rows of the system restricted to a scope, in streaming order:
/// `E` over `(k+t)`-subsets of the scope lexicographically, then `A` over
/// `(k-2)`-subsets of `E`.
fn equation_stream(scope: &[usize], k: usize, t: usize) -> impl Iterator<Item = (Vec<usize>, Vec<usize>)> + '_ {
    scope
        .iter()
        .copied()
        .combinations(k + t)
        .flat_map(move |e| e.clone().into_iter().combinations(k - 2).map(move |a| (e.clone(), a)))
}

/// Solves for `α` on the `(k-1)`-subsets of `scope` (default: all of `S`).
///
/// Equations are streamed until the nullspace is one-dimensional or the
/// stream is exhausted. A one-dimensional nullspace yields the solution
/// directly; otherwise seeded random combinations of the basis, each pushed
/// towards fewer zero coordinates by local descent, are tried until one has
/// no zero coordinate.
pub fn solve_alpha(arc: &Arc, scope: Option<&[usize]>) -> Result<AlphaSystem, EqError> {
    let f = arc.field();
    let k = arc.k();
    let t = deficiency(arc)?;
    let scope: Vec<usize> = match scope {
        Some(w) => {
            arc.check_indices(w)?;
            w.iter().copied().sorted().dedup().collect()
        }
        None => (0..arc.len()).collect(),
    };
    if k < 2 || scope.len() < k + t {
        return Err(EqError::Context(format!("scope of {} points has no equation (needs k + t = {})", scope.len(), k + t)));
    }
    let unknowns: Vec<Vec<usize>> = scope.iter().copied().combinations(k - 1).collect();
    let position: HashMap<&[usize], usize> = unknowns.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();
    let duals: Vec<Vec<FieldElement>> = unknowns.iter().map(|c| arc.dual(c).0).collect();

    let mut ech = Echelon { field: f.clone(), rows: Vec::new() };
    let mut used = 0;
    for (e, a) in equation_stream(&scope, k, t) {
        used += 1;
        let mut row = vec![FieldElement::ZERO; unknowns.len()];
        for b in difference(&e, &a) {
            let c = union(&a, &[b]);
            let i = position[c.as_slice()];
            let mut coef = FieldElement::ONE;
            for &z in e.iter().filter(|z| !c.contains(z)) {
                coef = f.mul(coef, f.dot(arc.point(z), &duals[i]));
            }
            row[i] = f.inv(coef)?;
        }
        ech.insert(row);
        if ech.rows.len() + 1 == unknowns.len() {
            break;
        }
    }
    let rank = ech.rows.len();
    if rank == unknowns.len() {
        return Err(EqError::NoSolution);
    }
    let basis = if rank == 0 {
        let id = GfMatrix::identity(f, unknowns.len());
        (0..id.rows()).map(|r| id.row(r).to_vec()).collect()
    } else {
        GfMatrix::from_rows(f, &ech.rows.into_iter().map(|(_, r)| r).collect_vec())?.nullspace()
    };
    let dimension = basis.len();

    let (vector, attempts) = if dimension == 1 {
        (basis[0].clone(), 1)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(COMBINATION_SEED);
        let mut found = None;
        for attempt in 1..=COMBINATION_ATTEMPTS {
            let mut v = vec![FieldElement::ZERO; unknowns.len()];
            for b in &basis {
                let c = FieldElement(rng.gen_range(0..f.q()));
                for (x, &y) in v.iter_mut().zip(b) {
                    *x = f.add(*x, f.mul(c, y));
                }
            }
            descend_zeros(f, &mut v, &basis);
            if v.iter().all(|x| !x.is_zero()) {
                found = Some((v, attempt));
                break;
            }
        }
        found.ok_or(EqError::NoNonzeroSolution { dimension })?
    };
    if vector.iter().any(|x| x.is_zero()) {
        return Err(EqError::NoNonzeroSolution { dimension });
    }
    let norm = f.inv(vector[0])?;
    let entries = unknowns
        .into_iter()
        .zip(vector)
        .map(|(subset, v)| AlphaEntry { subset, alpha: f.mul(v, norm) })
        .collect();
    Ok(AlphaSystem { scope, entries, nullspace_dim: dimension, equations_used: used, combination_attempts: attempts })
}

/// Adds multiples of basis vectors to `v` while that lowers the number of
/// zero coordinates. Small fields with many unknowns make a purely random
/// combination almost never all-nonzero.
fn descend_zeros(f: &Field, v: &mut [FieldElement], basis: &[Vec<FieldElement>]) {
    let zeros = |v: &[FieldElement]| v.iter().filter(|x| x.is_zero()).count();
    let mut current = zeros(v);
    let mut improved = true;
    while current > 0 && improved {
        improved = false;
        for b in basis {
            for c in 1..f.q() {
                let c = FieldElement(c);
                let cand: Vec<FieldElement> = v.iter().zip(b).map(|(&x, &y)| f.add(x, f.mul(c, y))).collect();
                let z = zeros(&cand);
                if z < current {
                    v.copy_from_slice(&cand);
                    current = z;
                    improved = true;
                }
            }
        }
    }
}

fn inv_det(arc: &Arc, z: usize, c: &[usize]) -> Result<FieldElement, EqError> {
    let f = arc.field();
    Ok(f.inv(det_uc(f, arc.point(z), &arc.rows(c)))?)
}

/// `Σ_C α_C Π_{z ∈ E \ C} det(z, C)^{-1}` over `(k-1)`-subsets `C ⊇ A` of `E`.
pub fn lemma4_lhs(arc: &Arc, alpha: &AlphaSystem, e_set: &[usize], a: &[usize]) -> Result<FieldElement, EqError> {
    let k = arc.k();
    let t = deficiency(arc)?;
    arc.check_indices(e_set)?;
    if e_set.len() != k + t || a.len() != k - 2 || !is_subset(a, e_set) {
        return Err(EqError::Context(format!("need |E| = k + t = {}, A ⊆ E with |A| = k - 2", k + t)));
    }
    let f = arc.field();
    let e_set = e_set.iter().copied().sorted().collect_vec();
    let mut sum = FieldElement::ZERO;
    for b in difference(&e_set, a) {
        let c = union(a, &[b]);
        let mut term = alpha.try_get(&c)?;
        for &z in e_set.iter().filter(|z| !c.contains(z)) {
            term = f.mul(term, inv_det(arc, z, &c)?);
        }
        sum = f.add(sum, term);
    }
    Ok(sum)
}

/// `Σ_C α_C Π_{z ∈ (E ∪ {e}) \ C} det(z, C)^{-1}` over `(k-1)`-subsets
/// `C ⊇ D` of `E`, for `|E| = k + t - 1` and `e ∉ E`. Odd `q` only.
pub fn lemma5_lhs(
    arc: &Arc,
    alpha: &AlphaSystem,
    e_set: &[usize],
    e: usize,
    d: &[usize],
) -> Result<FieldElement, EqError> {
    let f = arc.field();
    if !f.is_odd() {
        return Err(EqError::EvenCharacteristic);
    }
    let k = arc.k();
    let t = deficiency(arc)?;
    arc.check_indices(e_set)?;
    arc.check_indices(&[e])?;
    if e_set.len() != k + t - 1 || e_set.contains(&e) || d.len() != k - 3 || !is_subset(d, e_set) {
        return Err(EqError::Context(format!(
            "need |E| = k + t - 1 = {}, e outside E, D ⊆ E with |D| = k - 3",
            k + t - 1
        )));
    }
    let extended = union(e_set, &[e]);
    let mut sum = FieldElement::ZERO;
    for l in difference(e_set, d).into_iter().combinations(2) {
        let c = union(d, &l);
        let mut term = alpha.try_get(&c)?;
        for &z in extended.iter().filter(|z| !c.contains(z)) {
            term = f.mul(term, inv_det(arc, z, &c)?);
        }
        sum = f.add(sum, term);
    }
    Ok(sum)
}

/// `(-eq(D ∪ {e}) + Σ_{a ∈ E \ D} eq(D ∪ {a})) / 2`, each `eq` evaluated by
/// [`lemma4_lhs`] on `E ∪ {e}`. Equal to [`lemma5_lhs`] for any `α`.
pub fn lemma5_via_lemma4(
    arc: &Arc,
    alpha: &AlphaSystem,
    e_set: &[usize],
    e: usize,
    d: &[usize],
) -> Result<FieldElement, EqError> {
    let f = arc.field();
    if !f.is_odd() {
        return Err(EqError::EvenCharacteristic);
    }
    let extended = union(e_set, &[e]);
    let mut acc = f.neg(lemma4_lhs(arc, alpha, &extended, &union(d, &[e]))?);
    for a in difference(e_set, d) {
        acc = f.add(acc, lemma4_lhs(arc, alpha, &extended, &union(d, &[a]))?);
    }
    Ok(f.mul(acc, f.inv(f.from_int(2))?))
}

/// How to pick equations for verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Sampling {
    Exhaustive,
    Random { seed: u64, count: usize },
    /// Equations after the ones consumed by [`solve_alpha`], in stream order.
    Holdout { count: usize },
}

impl Sampling {
    /// Exhaustive for arcs of at most 8 points, otherwise `count` random samples.
    pub fn auto(arc_len: usize, seed: u64, count: usize) -> Sampling {
        if arc_len <= 8 {
            Sampling::Exhaustive
        } else {
            Sampling::Random { seed, count }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidualReport {
    pub sampling: Sampling,
    pub checked: usize,
    /// Index tuples of equations with nonzero left-hand side.
    pub nonzero: Vec<Vec<Vec<usize>>>,
    /// Lemma-5 samples where the direct and recombined values differ.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub identity_mismatch: Vec<Vec<Vec<usize>>>,
}

impl ResidualReport {
    pub fn all_zero(&self) -> bool {
        self.nonzero.is_empty() && self.identity_mismatch.is_empty()
    }
}

/// Evaluates the `(E, A)` equations selected by `sampling` against `alpha`.
pub fn verify_lemma4(arc: &Arc, alpha: &AlphaSystem, sampling: Sampling) -> Result<ResidualReport, EqError> {
    let k = arc.k();
    let t = deficiency(arc)?;
    let scope = &alpha.scope;
    let pairs: Vec<(Vec<usize>, Vec<usize>)> = match sampling {
        Sampling::Exhaustive => equation_stream(scope, k, t).collect(),
        Sampling::Holdout { count } => equation_stream(scope, k, t).skip(alpha.equations_used).take(count).collect(),
        Sampling::Random { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let e = random_subset(&mut rng, scope, k + t);
                    let a = random_subset(&mut rng, &e, k - 2);
                    (e, a)
                })
                .collect()
        }
    };
    let mut nonzero = Vec::new();
    for (e, a) in &pairs {
        if !lemma4_lhs(arc, alpha, e, a)?.is_zero() {
            nonzero.push(vec![e.clone(), a.clone()]);
        }
    }
    Ok(ResidualReport { sampling, checked: pairs.len(), nonzero, identity_mismatch: Vec::new() })
}

/// Evaluates `(E, e, D)` instances of the odd-`q` system and the identity
/// relating it to the `(E, A)` system.
pub fn verify_lemma5(arc: &Arc, alpha: &AlphaSystem, sampling: Sampling) -> Result<ResidualReport, EqError> {
    let k = arc.k();
    let t = deficiency(arc)?;
    let scope = &alpha.scope;
    if scope.len() < k + t {
        return Err(EqError::Context("scope too small".into()));
    }
    let triples: Vec<(Vec<usize>, usize, Vec<usize>)> = match sampling {
        Sampling::Exhaustive | Sampling::Holdout { .. } => scope
            .iter()
            .copied()
            .combinations(k + t - 1)
            .flat_map(|e_set| {
                let outside = difference(scope, &e_set);
                let ds: Vec<Vec<usize>> = e_set.iter().copied().combinations(k - 3).collect();
                outside
                    .into_iter()
                    .flat_map(move |e| ds.clone().into_iter().map(move |d| (e, d)))
                    .map(move |(e, d)| (e_set.clone(), e, d))
                    .collect_vec()
            })
            .collect(),
        Sampling::Random { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let e_set = random_subset(&mut rng, scope, k + t - 1);
                    let outside = difference(scope, &e_set);
                    let e = outside[rng.gen_range(0..outside.len())];
                    let d = random_subset(&mut rng, &e_set, k - 3);
                    (e_set, e, d)
                })
                .collect()
        }
    };
    let mut nonzero = Vec::new();
    let mut identity_mismatch = Vec::new();
    for (e_set, e, d) in &triples {
        let direct = lemma5_lhs(arc, alpha, e_set, *e, d)?;
        let via = lemma5_via_lemma4(arc, alpha, e_set, *e, d)?;
        let label = vec![e_set.clone(), vec![*e], d.clone()];
        if !direct.is_zero() {
            nonzero.push(label.clone());
        }
        if direct != via {
            identity_mismatch.push(label);
        }
    }
    Ok(ResidualReport { sampling, checked: triples.len(), nonzero, identity_mismatch })
}
