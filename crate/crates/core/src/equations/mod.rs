//! The determinant equation system of an arc and the matrices built from it.
//!
//! Throughout, `S` is an ordered arc of size `q + k - 1 - t`, `G ⊆ S` has size
//! `k + t + n`, `E ⊆ G` has size `k + t - 1`, `U = G \ E`, `A ⊆ E` has size
//! `k - 2` and `e ∈ E \ A`. All of these are ascending index tuples into `S`.
//! Determinants `det(u, C)` put `u` first and the rows of `C` in ascending
//! index order.

mod alpha;
mod matrices;
mod pipeline;
mod psi;

pub use alpha::{
    lemma4_lhs, lemma5_lhs, lemma5_via_lemma4, solve_alpha, verify_lemma4, verify_lemma5, AlphaEntry,
    AlphaSystem, ResidualReport, Sampling,
};
pub use matrices::{
    build_md, build_pn, build_qt, dual_certificate_vector, md_minor_checks, padded_qt_column, pn_row_subsets,
    MinorCheck, QtBuild,
};
pub use pipeline::{conic_projection_failures, pipeline_report, LemmaBlock, PipelineReport, Status};
pub use psi::{eval_psi, eval_psi_at, line_vanishing_lambdas, psi_from_md, restrict_to_line, PsiPoly};

use itertools::Itertools;
use rand::seq::index;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exactla::LaError;
use crate::gf::{FieldElement, GfError};
use crate::projgeom::{Arc, GeomError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EqError {
    #[error("invalid context: {0}")]
    Context(String),
    #[error("no alpha value for subset {0:?}")]
    MissingAlpha(Vec<usize>),
    #[error("the equation system has only the zero solution")]
    NoSolution,
    #[error("no solution with all coordinates nonzero found (nullspace dimension {dimension})")]
    NoNonzeroSolution { dimension: usize },
    #[error("this operation divides by 2 and needs odd q")]
    EvenCharacteristic,
    #[error("certificate vector has a zero coordinate at {0:?}")]
    ZeroCertificate(Vec<usize>),
    #[error("M_D has trivial nullspace for D = {0:?}")]
    MissingPsi(Vec<usize>),
    #[error("requires n >= t (n = {n}, t = {t})")]
    NTooSmall { n: usize, t: usize },
    #[error("requires n = t (n = {n}, t = {t})")]
    NNotT { n: usize, t: usize },
    #[error("line basepoints are degenerate")]
    DegenerateLine,
    #[error("field too small to interpolate a form of degree {0}")]
    FieldTooSmall(usize),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Linear(#[from] LaError),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// `{a,b,c}` rendering of an index tuple, used as matrix labels.
pub fn subset_label(idx: &[usize]) -> String {
    format!("{{{}}}", idx.iter().join(","))
}

/// Sorted union of an index tuple and extra indices.
pub fn union(base: &[usize], extra: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = base.iter().chain(extra).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn difference(base: &[usize], remove: &[usize]) -> Vec<usize> {
    base.iter().copied().filter(|i| !remove.contains(i)).collect()
}

pub fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|i| big.contains(i))
}

/// Uniformly random `size`-subset of `pool`, ascending.
pub fn random_subset<R: Rng>(rng: &mut R, pool: &[usize], size: usize) -> Vec<usize> {
    let mut v: Vec<usize> = index::sample(rng, pool.len(), size).into_iter().map(|i| pool[i]).collect();
    v.sort_unstable();
    v
}

/// Deficiency of an arc as an unsigned count, rejecting oversized sets.
pub(crate) fn deficiency(arc: &Arc) -> Result<usize, EqError> {
    usize::try_from(arc.deficiency())
        .map_err(|_| EqError::Context(format!("{} vectors exceed q + k - 1", arc.len())))
}

fn check_tuple(arc: &Arc, name: &str, idx: &[usize]) -> Result<(), EqError> {
    arc.check_indices(idx)?;
    if !idx.windows(2).all(|w| w[0] < w[1]) {
        return Err(EqError::Context(format!("{name} must be strictly ascending: {idx:?}")));
    }
    Ok(())
}

/// Nested subsets `A ⊆ E ⊆ G ⊆ S` with the derived `U = G \ E`, `t` and `n`.
#[derive(Debug, Clone, Serialize)]
pub struct EqContext {
    #[serde(skip)]
    arc: Arc,
    pub t: usize,
    pub n: usize,
    #[serde(rename = "G")]
    pub g: Vec<usize>,
    #[serde(rename = "E")]
    pub e_set: Vec<usize>,
    #[serde(rename = "U")]
    pub u: Vec<usize>,
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    pub e: usize,
}

impl EqContext {
    pub fn new(arc: &Arc, g: Vec<usize>, e_set: Vec<usize>, a: Vec<usize>, e: usize) -> Result<EqContext, EqError> {
        let k = arc.k();
        if k < 3 {
            return Err(EqError::Context("k must be at least 3".into()));
        }
        let t = deficiency(arc)?;
        for (name, idx) in [("G", &g), ("E", &e_set), ("A", &a)] {
            check_tuple(arc, name, idx)?;
        }
        if g.len() < k + t {
            return Err(EqError::Context(format!("|G| = {} < k + t = {}", g.len(), k + t)));
        }
        let n = g.len() - k - t;
        if e_set.len() != k + t - 1 || !is_subset(&e_set, &g) {
            return Err(EqError::Context(format!("E must be a subset of G of size k + t - 1 = {}", k + t - 1)));
        }
        if a.len() != k - 2 || !is_subset(&a, &e_set) {
            return Err(EqError::Context(format!("A must be a subset of E of size k - 2 = {}", k - 2)));
        }
        if !e_set.contains(&e) || a.contains(&e) {
            return Err(EqError::Context(format!("e = {e} must lie in E \\ A")));
        }
        let u = difference(&g, &e_set);
        Ok(EqContext { arc: arc.clone(), t, n, g, e_set, u, a, e })
    }

    /// `G = E ∪ (first n + 1 indices of S \ E)`.
    pub fn with_n(arc: &Arc, e_set: Vec<usize>, a: Vec<usize>, e: usize, n: usize) -> Result<EqContext, EqError> {
        let outside = difference(&(0..arc.len()).collect_vec(), &e_set);
        if outside.len() < n + 1 {
            let bound = arc.len() as i64 - arc.k() as i64 - arc.deficiency();
            return Err(EqError::Context(format!("n = {n} exceeds |S| - k - t = {bound}")));
        }
        let g = union(&e_set, &outside[..n + 1]);
        EqContext::new(arc, g, e_set, a, e)
    }

    pub fn arc(&self) -> &Arc {
        &self.arc
    }

    pub fn k(&self) -> usize {
        self.arc.k()
    }

    /// `E \ A`, of size `t + 1`.
    pub fn outside_a(&self) -> Vec<usize> {
        difference(&self.e_set, &self.a)
    }

    /// `(k-3)`-subsets of `A`, lexicographic.
    pub fn d_subsets(&self) -> Vec<Vec<usize>> {
        self.a.iter().copied().combinations(self.k() - 3).collect()
    }

    /// `Π_{u ∈ U \ {w}} det(u, C)` for each `w ∈ U`, given the dual of `C`.
    pub(crate) fn u_products(&self, dual: &[FieldElement]) -> Vec<FieldElement> {
        let f = self.arc.field();
        let dets: Vec<FieldElement> = self.u.iter().map(|&u| f.dot(self.arc.point(u), dual)).collect();
        (0..self.u.len())
            .map(|skip| {
                dets.iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .fold(FieldElement::ONE, |acc, (_, &d)| f.mul(acc, d))
            })
            .collect()
    }
}
