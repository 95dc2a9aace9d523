//! The forms `ψ(X) = Σ_{w ∈ U} λ_w Π_{u ∈ U \ {w}} (u · X)` on the dual space.

use serde::Serialize;

use super::{union, EqContext, EqError};
use crate::exactla::GfMatrix;
use crate::gf::FieldElement;
use crate::projgeom::{det_uc, Arc};

/// Coefficients `λ_w` over an ordered `U`; not all zero. Degree `|U| - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PsiPoly {
    pub u: Vec<usize>,
    pub lambda: Vec<FieldElement>,
}

impl PsiPoly {
    pub fn new(u: Vec<usize>, lambda: Vec<FieldElement>) -> Result<PsiPoly, EqError> {
        if u.len() != lambda.len() || u.is_empty() {
            return Err(EqError::Context("one coefficient per element of U".into()));
        }
        if lambda.iter().all(|x| x.is_zero()) {
            return Err(EqError::Context("ψ needs a nonzero coefficient".into()));
        }
        Ok(PsiPoly { u, lambda })
    }

    pub fn degree(&self) -> usize {
        self.u.len() - 1
    }
}

/// First vector of the canonical nullspace basis of `M_D`, or `None` when
/// the nullspace is trivial.
pub fn psi_from_md(md: &GfMatrix, ctx: &EqContext) -> Result<Option<PsiPoly>, EqError> {
    if ctx.n < ctx.t {
        return Err(EqError::NTooSmall { n: ctx.n, t: ctx.t });
    }
    if md.cols() != ctx.u.len() {
        return Err(EqError::Context("M_D must have one column per element of U".into()));
    }
    let ns = md.nullspace();
    Ok(ns.into_iter().next().map(|lambda| PsiPoly { u: ctx.u.clone(), lambda }))
}

/// `ψ(C) = Σ_w λ_w Π_{u ≠ w} det(u, C)`, with `C` in ascending order.
pub fn eval_psi(arc: &Arc, psi: &PsiPoly, c: &[usize]) -> FieldElement {
    let f = arc.field();
    let rows = arc.rows(c);
    let dets: Vec<FieldElement> = psi.u.iter().map(|&u| det_uc(f, arc.point(u), &rows)).collect();
    combine(arc, psi, &dets)
}

/// `ψ` at an arbitrary dual vector `X`.
pub fn eval_psi_at(arc: &Arc, psi: &PsiPoly, x: &[FieldElement]) -> FieldElement {
    let f = arc.field();
    let dots: Vec<FieldElement> = psi.u.iter().map(|&u| f.dot(arc.point(u), x)).collect();
    combine(arc, psi, &dots)
}

fn combine(arc: &Arc, psi: &PsiPoly, values: &[FieldElement]) -> FieldElement {
    let f = arc.field();
    let mut sum = FieldElement::ZERO;
    for (wi, &l) in psi.lambda.iter().enumerate() {
        if l.is_zero() {
            continue;
        }
        let prod = values
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != wi)
            .fold(FieldElement::ONE, |acc, (_, &v)| f.mul(acc, v));
        sum = f.add(sum, f.mul(l, prod));
    }
    sum
}

/// Coefficients `c_0..c_n` of the binary form `(s, r) ↦ ψ(s X₁ + r X₂) =
/// Σ c_i s^(n-i) r^i`, where `X₁, X₂` are the duals of `A ∪ {b₁}` and
/// `A ∪ {b₂}`. Found by evaluating on pencil members and interpolating.
pub fn restrict_to_line(arc: &Arc, psi: &PsiPoly, a: &[usize], b1: usize, b2: usize) -> Result<Vec<FieldElement>, EqError> {
    let f = arc.field();
    let x1 = arc.dual(&union(a, &[b1]));
    let x2 = arc.dual(&union(a, &[b2]));
    let span = GfMatrix::from_rows(f, &[x1.0.clone(), x2.0.clone()])?;
    if span.rank() < 2 {
        return Err(EqError::DegenerateLine);
    }
    let n = psi.degree();
    let q = f.q() as usize;
    if n > q {
        return Err(EqError::FieldTooSmall(n));
    }
    let member = |s: FieldElement, r: FieldElement| -> FieldElement {
        let x = x1.scale(f, s).add(f, &x2.scale(f, r));
        eval_psi_at(arc, psi, &x)
    };
    // With n = q the affine points do not suffice; (0, 1) gives c_n directly.
    let (top, affine) = if n == q { (Some(member(FieldElement::ZERO, FieldElement::ONE)), n) } else { (None, n + 1) };
    let rs: Vec<FieldElement> = f.elements().take(affine).collect();
    let vander: Vec<Vec<FieldElement>> = rs.iter().map(|&r| (0..affine).map(|i| f.pow(r, i as u64)).collect()).collect();
    let values: Vec<FieldElement> = rs
        .iter()
        .map(|&r| {
            let v = member(FieldElement::ONE, r);
            match top {
                Some(cn) => f.sub(v, f.mul(cn, f.pow(r, n as u64))),
                None => v,
            }
        })
        .collect();
    let mut coeffs = GfMatrix::from_rows(f, &vander)?.solve(&values)?.expect("Vandermonde system is regular");
    if let Some(cn) = top {
        coeffs.push(cn);
    }
    Ok(coeffs)
}

/// All `λ` (basis of the solution space) for which `ψ` over `U` vanishes at
/// each `A ∪ {b}`, `b` in `points`.
pub fn line_vanishing_lambdas(arc: &Arc, u: &[usize], a: &[usize], points: &[usize]) -> Result<Vec<Vec<FieldElement>>, EqError> {
    let f = arc.field();
    let rows: Vec<Vec<FieldElement>> = points
        .iter()
        .map(|&b| {
            let c = union(a, &[b]);
            let rows = arc.rows(&c);
            let dets: Vec<FieldElement> = u.iter().map(|&x| det_uc(f, arc.point(x), &rows)).collect();
            (0..u.len())
                .map(|skip| {
                    dets.iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .fold(FieldElement::ONE, |acc, (_, &d)| f.mul(acc, d))
                })
                .collect()
        })
        .collect();
    if rows.is_empty() {
        return Ok(GfMatrix::zeros(f, 0, u.len()).nullspace());
    }
    Ok(GfMatrix::from_rows(f, &rows)?.nullspace())
}

/// Binary-form coefficients by multiplying out the linear factors, used as an
/// oracle for [`restrict_to_line`].
#[cfg(test)]
pub(crate) fn restrict_by_expansion(arc: &Arc, psi: &PsiPoly, x1: &crate::projgeom::VectorK, x2: &crate::projgeom::VectorK) -> Vec<FieldElement> {
    let f = arc.field();
    let n = psi.degree();
    let mut total = vec![FieldElement::ZERO; n + 1];
    for (wi, &l) in psi.lambda.iter().enumerate() {
        // polynomial in r (s = 1 homogenized), coefficient i of r^i
        let mut poly = vec![l];
        for (ui, &u) in psi.u.iter().enumerate() {
            if ui == wi {
                continue;
            }
            let lin = [f.dot(arc.point(u), x1), f.dot(arc.point(u), x2)];
            let mut next = vec![FieldElement::ZERO; poly.len() + 1];
            for (i, &p) in poly.iter().enumerate() {
                next[i] = f.add(next[i], f.mul(p, lin[0]));
                next[i + 1] = f.add(next[i + 1], f.mul(p, lin[1]));
            }
            poly = next;
        }
        for (i, p) in poly.into_iter().enumerate() {
            total[i] = f.add(total[i], p);
        }
    }
    total
}
