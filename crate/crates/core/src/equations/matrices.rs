//! The matrices `P_n`, `M_D` and `Q_t` and the certificate vector orthogonal
//! to the columns of `P_n`.

use itertools::Itertools;
use serde::Serialize;

use super::{difference, is_subset, psi_from_md, subset_label, union, AlphaSystem, EqContext, EqError, PsiPoly};
use super::psi::eval_psi;
use crate::exactla::{det_rows, GfMatrix};
use crate::gf::FieldElement;

/// Row subsets of `P_n`: `(k-1)`-subsets `C` of `E` with `|C ∩ A| >= k - 3`,
/// lexicographic.
pub fn pn_row_subsets(ctx: &EqContext) -> Vec<Vec<usize>> {
    let k = ctx.k();
    ctx.e_set
        .iter()
        .copied()
        .combinations(k - 1)
        .filter(|c| c.iter().filter(|i| ctx.a.contains(i)).count() + 3 >= k)
        .collect()
}

fn pn_columns(ctx: &EqContext) -> Vec<(Vec<usize>, usize)> {
    ctx.d_subsets().into_iter().flat_map(|d| ctx.u.iter().map(move |&w| (d.clone(), w))).collect()
}

/// `P_n`: entry `(C, (D, w))` is `Π_{u ∈ U \ {w}} det(u, C)` when `D ⊆ C`,
/// zero otherwise. Columns are `D`-major, `w` ascending.
pub fn build_pn(ctx: &EqContext) -> GfMatrix {
    let rows = pn_row_subsets(ctx);
    let cols = pn_columns(ctx);
    let f = ctx.arc().field();
    let mut m = GfMatrix::zeros(f, rows.len(), cols.len());
    for (r, c) in rows.iter().enumerate() {
        let prods = ctx.u_products(&ctx.arc().dual(c));
        for (j, (d, w)) in cols.iter().enumerate() {
            if is_subset(d, c) {
                let wi = ctx.u.iter().position(|u| u == w).expect("w in U");
                m.set(r, j, prods[wi]);
            }
        }
    }
    m.with_labels(
        Some(rows.iter().map(|c| format!("C={}", subset_label(c))).collect()),
        Some(cols.iter().map(|(d, w)| format!("D={},w={w}", subset_label(d))).collect()),
    )
}

/// `M_D`: rows `C = D ∪ L` for 2-subsets `L` of `E \ A`, columns `w ∈ U`.
pub fn build_md(ctx: &EqContext, d: &[usize]) -> Result<GfMatrix, EqError> {
    if d.len() != ctx.k() - 3 || !is_subset(d, &ctx.a) {
        return Err(EqError::Context(format!("D must be a (k-3)-subset of A, got {d:?}")));
    }
    let rows: Vec<Vec<usize>> = ctx.outside_a().into_iter().combinations(2).map(|l| union(d, &l)).collect();
    let f = ctx.arc().field();
    let mut m = GfMatrix::zeros(f, rows.len(), ctx.u.len());
    for (r, c) in rows.iter().enumerate() {
        for (j, x) in ctx.u_products(&ctx.arc().dual(c)).into_iter().enumerate() {
            m.set(r, j, x);
        }
    }
    Ok(m.with_labels(
        Some(rows.iter().map(|c| format!("C={}", subset_label(c))).collect()),
        Some(ctx.u.iter().map(|w| format!("w={w}")).collect()),
    ))
}

/// `v_C = α_C Π_{z ∈ G \ C} det(z, C)^{-1}` over the rows of `P_n`.
pub fn dual_certificate_vector(ctx: &EqContext, alpha: &AlphaSystem) -> Result<Vec<FieldElement>, EqError> {
    let f = ctx.arc().field();
    pn_row_subsets(ctx)
        .into_iter()
        .map(|c| {
            let dual = ctx.arc().dual(&c);
            let mut v = alpha.try_get(&c)?;
            for z in difference(&ctx.g, &c) {
                v = f.mul(v, f.inv(f.dot(ctx.arc().point(z), &dual))?);
            }
            if v.is_zero() {
                return Err(EqError::ZeroCertificate(c));
            }
            Ok(v)
        })
        .collect()
}

/// One `3×3` minor of `M_D` on rows `D∪{e,a}, D∪{e,b}, D∪{a,b}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinorCheck {
    pub pair: [usize; 2],
    pub columns: Vec<usize>,
    pub det: FieldElement,
}

/// Every minor of `M_D` on the row triples `D∪{e,a}, D∪{e,b}, D∪{a,b}`
/// (`a < b` in `E \ (A ∪ {e})`) and all column triples of `U`.
pub fn md_minor_checks(ctx: &EqContext, md: &GfMatrix) -> Vec<MinorCheck> {
    let f = ctx.arc().field();
    let rows = ctx.outside_a().into_iter().combinations(2).collect_vec();
    let pos = |l: [usize; 2]| rows.iter().position(|r| r[..] == l[..]).expect("2-subset of E \\ A");
    let ordered = |x: usize, y: usize| if x < y { [x, y] } else { [y, x] };
    let mut out = Vec::new();
    let others = difference(&ctx.outside_a(), &[ctx.e]);
    for pair in others.iter().copied().combinations(2) {
        let (a, b) = (pair[0], pair[1]);
        let triple = [pos(ordered(ctx.e, a)), pos(ordered(ctx.e, b)), pos([a, b])];
        for cols in (0..md.cols()).combinations(3) {
            let sub: Vec<Vec<FieldElement>> =
                triple.iter().map(|&r| cols.iter().map(|&c| md.get(r, c)).collect()).collect();
            let refs: Vec<&[FieldElement]> = sub.iter().map(|r| &r[..]).collect();
            out.push(MinorCheck { pair: [a, b], columns: cols.iter().map(|&c| ctx.u[c]).collect(), det: det_rows(f, &refs) });
        }
    }
    out
}

/// `Q_t` together with the `ψ_D` used to build it.
#[derive(Debug, Clone)]
pub struct QtBuild {
    pub matrix: GfMatrix,
    pub psis: Vec<(Vec<usize>, PsiPoly)>,
}

/// `Q_t`: rows `A ∪ {b}` for `b ∈ E \ A`, columns the `(k-3)`-subsets `D`
/// of `A`, entry `ψ_D(A ∪ {b})`. Requires `n = t`.
pub fn build_qt(ctx: &EqContext) -> Result<QtBuild, EqError> {
    if ctx.n != ctx.t {
        return Err(EqError::NNotT { n: ctx.n, t: ctx.t });
    }
    let ds = ctx.d_subsets();
    let mut psis = Vec::with_capacity(ds.len());
    for d in &ds {
        let md = build_md(ctx, d)?;
        let psi = psi_from_md(&md, ctx)?.ok_or_else(|| EqError::MissingPsi(d.clone()))?;
        psis.push((d.clone(), psi));
    }
    let rows: Vec<Vec<usize>> = ctx.outside_a().into_iter().map(|b| union(&ctx.a, &[b])).collect();
    let f = ctx.arc().field();
    let mut m = GfMatrix::zeros(f, rows.len(), ds.len());
    for (r, c) in rows.iter().enumerate() {
        for (j, (_, psi)) in psis.iter().enumerate() {
            m.set(r, j, eval_psi(ctx.arc(), psi, c));
        }
    }
    let matrix = m.with_labels(
        Some(rows.iter().map(|c| format!("C={}", subset_label(c))).collect()),
        Some(ds.iter().map(|d| format!("D={}", subset_label(d))).collect()),
    );
    Ok(QtBuild { matrix, psis })
}

/// `v_D = Σ_w λ_w v_{D,w}`, the combination of `P_n` columns for one `D`,
/// computed as `P_n` times the embedded coefficient vector.
pub fn padded_qt_column(ctx: &EqContext, pn: &GfMatrix, d: &[usize], psi: &PsiPoly) -> Result<Vec<FieldElement>, EqError> {
    let ds = ctx.d_subsets();
    let di = ds.iter().position(|x| x == d).ok_or_else(|| EqError::Context(format!("{d:?} is not a (k-3)-subset of A")))?;
    let mut x = vec![FieldElement::ZERO; pn.cols()];
    let nu = ctx.u.len();
    x[di * nu..(di + 1) * nu].copy_from_slice(&psi.lambda);
    Ok(pn.mul_vec(&x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::solve_alpha;
    use crate::gf::Field;
    use crate::projgeom::nrc;

    fn ctx74() -> EqContext {
        let f = Field::with_order(7).unwrap();
        let s = nrc(&f, 4).unwrap();
        EqContext::new(&s, (0..8).collect(), (0..5).collect(), vec![0, 1], 2).unwrap()
    }

    #[test]
    fn pn_shape_and_zero_pattern() {
        let ctx = ctx74();
        let pn = build_pn(&ctx);
        assert_eq!(pn.shape(), (9, 6));
        let rows = pn_row_subsets(&ctx);
        let ds = ctx.d_subsets();
        for (r, c) in rows.iter().enumerate() {
            for (di, d) in ds.iter().enumerate() {
                for wi in 0..ctx.u.len() {
                    let x = pn.get(r, di * ctx.u.len() + wi);
                    assert_eq!(x.is_zero(), !is_subset(d, c), "row {c:?} col {d:?}");
                }
            }
        }
        assert!(pn.weight_one_in_colspace().is_empty());
    }

    #[test]
    fn certificate_orthogonal_to_pn() {
        let ctx = ctx74();
        let alpha = solve_alpha(ctx.arc(), None).unwrap();
        let pn = build_pn(&ctx);
        let v = dual_certificate_vector(&ctx, &alpha).unwrap();
        assert!(v.iter().all(|x| !x.is_zero()));
        assert!(pn.vec_mul(&v).unwrap().iter().all(|x| x.is_zero()));
        assert_eq!(pn.transpose().push_row(&v).unwrap().rank(), pn.rank() + 1);
    }

    #[test]
    fn md_is_labelled_submatrix_of_pn() {
        let ctx = ctx74();
        let pn = build_pn(&ctx);
        let rl = pn.row_labels.clone().unwrap();
        let cl = pn.col_labels.clone().unwrap();
        for d in ctx.d_subsets() {
            let md = build_md(&ctx, &d).unwrap();
            assert_eq!(md.shape(), (3, 3));
            for (r, rlab) in md.row_labels.clone().unwrap().iter().enumerate() {
                let pr = rl.iter().position(|x| x == rlab).unwrap();
                for (j, &w) in ctx.u.iter().enumerate() {
                    let pc = cl.iter().position(|x| *x == format!("D={},w={w}", subset_label(&d))).unwrap();
                    assert_eq!(md.get(r, j), pn.get(pr, pc));
                }
            }
        }
    }

    #[test]
    fn qt_columns_live_in_pn_colspace() {
        let ctx = ctx74();
        let pn = build_pn(&ctx);
        let qt = build_qt(&ctx).unwrap();
        assert_eq!(qt.matrix.shape(), (3, 2));
        let rows = pn_row_subsets(&ctx);
        for (j, (d, psi)) in qt.psis.iter().enumerate() {
            let col = padded_qt_column(&ctx, &pn, d, psi).unwrap();
            assert!(pn.in_column_space(&col).unwrap());
            for (r, c) in rows.iter().enumerate() {
                if is_subset(&ctx.a, c) {
                    let b = difference(c, &ctx.a)[0];
                    let qi = ctx.outside_a().iter().position(|&x| x == b).unwrap();
                    assert_eq!(col[r], qt.matrix.get(qi, j));
                } else if is_subset(d, c) {
                    assert!(col[r].is_zero(), "D∪L row {c:?} should vanish");
                } else {
                    assert!(col[r].is_zero());
                }
            }
        }
    }

    #[test]
    fn qt_requires_n_equal_t() {
        let f = Field::with_order(7).unwrap();
        let s = nrc(&f, 4).unwrap();
        let ctx = EqContext::with_n(&s, (0..5).collect(), vec![0, 1], 2, 1).unwrap();
        assert!(matches!(build_qt(&ctx), Err(EqError::NNotT { n: 1, t: 2 })));
    }
}
