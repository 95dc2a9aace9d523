//! One report bundling every structural check on a context, each reported
//! as holding, failing, or not instantiable at the given parameters.

use itertools::Itertools;
use serde::Serialize;
use serde_json::{json, Value};

use super::{
    build_md, build_pn, build_qt, difference, dual_certificate_vector, eval_psi, is_subset, md_minor_checks,
    pn_row_subsets, psi_from_md, subset_label, union, AlphaSystem, EqContext, EqError, PsiPoly,
};
use crate::exactla::GfMatrix;
use crate::gf::FieldElement;
use crate::projgeom::{conic_fit, project, VectorK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Holds,
    Fails,
    NotInstantiable,
}

impl Status {
    fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Holds
        } else {
            Status::Fails
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaBlock {
    pub lemma: String,
    pub parameters: Value,
    pub status: Status,
    pub witness: Value,
}

impl LemmaBlock {
    fn new(lemma: &str, parameters: Value, status: Status, witness: Value) -> LemmaBlock {
        LemmaBlock { lemma: lemma.to_string(), parameters, status, witness }
    }

    fn not_instantiable(lemma: &str, parameters: Value, reason: &str) -> LemmaBlock {
        LemmaBlock::new(lemma, parameters, Status::NotInstantiable, json!({ "reason": reason }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub q: u32,
    pub k: usize,
    pub context: Value,
    pub blocks: Vec<LemmaBlock>,
}

impl PipelineReport {
    pub fn block(&self, lemma: &str) -> Option<&LemmaBlock> {
        self.blocks.iter().find(|b| b.lemma == lemma)
    }

    /// No block reports a failure.
    pub fn no_failures(&self) -> bool {
        self.blocks.iter().all(|b| b.status != Status::Fails)
    }
}

fn labels(sets: &[Vec<usize>]) -> Vec<String> {
    sets.iter().map(|s| subset_label(s)).collect()
}

/// The `(k-3)`-subsets `D` of `E` for which the projection of `G \ D` from
/// `D` lies on no conic.
pub fn conic_projection_failures(ctx: &EqContext) -> Result<Vec<Vec<usize>>, EqError> {
    let arc = ctx.arc();
    let f = arc.field();
    let mut failing = Vec::new();
    for d in ctx.e_set.iter().copied().combinations(ctx.k() - 3) {
        let rest: Vec<VectorK> = difference(&ctx.g, &d).into_iter().map(|i| arc.point(i).clone()).collect();
        let from: Vec<VectorK> = d.iter().map(|&i| arc.point(i).clone()).collect();
        if !conic_fit(f, &project(f, &rest, &from)?)?.exists() {
            failing.push(d);
        }
    }
    Ok(failing)
}

fn conic_block(ctx: &EqContext) -> Result<(LemmaBlock, bool), EqError> {
    let failing = conic_projection_failures(ctx)?;
    let checked = ctx.e_set.iter().combinations(ctx.k() - 3).count();
    let ok = failing.is_empty();
    let block = LemmaBlock::new(
        "projecttoplane",
        json!({ "D_range": "(k-3)-subsets of E", "projected": "G \\ D", "checked": checked }),
        Status::from_bool(ok),
        json!({ "no_conic": labels(&failing) }),
    );
    Ok((block, ok))
}

fn nowone_block(ctx: &EqContext, pn: &GfMatrix, alpha: &AlphaSystem) -> Result<LemmaBlock, EqError> {
    let params = json!({ "rows": pn.rows(), "cols": pn.cols(), "rank": pn.rank() });
    if !ctx.arc().field().is_odd() {
        return Ok(LemmaBlock::not_instantiable("nowone", params, "the certificate needs odd q"));
    }
    let weight_one = pn.weight_one_in_colspace();
    let rows = pn_row_subsets(ctx);
    let (zero_coords, residual_cols) = match dual_certificate_vector(ctx, alpha) {
        Ok(v) => {
            let res = pn.vec_mul(&v)?;
            let bad: Vec<usize> = res.iter().positions(|x| !x.is_zero()).collect();
            (Vec::new(), bad)
        }
        Err(EqError::ZeroCertificate(c)) => (vec![c], Vec::new()),
        Err(e) => return Err(e),
    };
    let col_labels = pn.col_labels.clone().unwrap_or_default();
    let ok = weight_one.is_empty() && zero_coords.is_empty() && residual_cols.is_empty();
    Ok(LemmaBlock::new(
        "nowone",
        params,
        Status::from_bool(ok),
        json!({
            "weight_one_rows": weight_one.iter().map(|&r| subset_label(&rows[r])).collect_vec(),
            "certificate_zero_at": labels(&zero_coords),
            "nonzero_residual_columns": residual_cols.iter().map(|&c| col_labels.get(c).cloned().unwrap_or_default()).collect_vec(),
        }),
    ))
}

/// Rank of `M_D` equals the rank of its rows `D ∪ {e, b}`, and the minors on
/// `D∪{e,a}, D∪{e,b}, D∪{a,b}` are singular.
fn matrixmd_block(ctx: &EqContext, conic_ok: bool) -> Result<LemmaBlock, EqError> {
    let pairs: Vec<Vec<usize>> = ctx.outside_a().into_iter().combinations(2).collect();
    let e_rows: Vec<usize> = pairs.iter().positions(|l| l.contains(&ctx.e)).collect();
    let mut per_d = Vec::new();
    let mut ok = true;
    for d in ctx.d_subsets() {
        let md = build_md(ctx, &d)?;
        let rank = md.rank();
        let span = md.select(&e_rows, &(0..md.cols()).collect_vec()).rank();
        let minors = md_minor_checks(ctx, &md);
        let nonsingular: Vec<Value> = minors
            .iter()
            .filter(|m| !m.det.is_zero())
            .map(|m| json!({ "pair": m.pair, "columns": m.columns }))
            .collect();
        ok &= rank == span && nonsingular.is_empty();
        per_d.push(json!({
            "D": subset_label(&d),
            "rank": rank,
            "e_rows_rank": span,
            "minors_checked": minors.len(),
            "nonsingular_minors": nonsingular,
        }));
    }
    Ok(LemmaBlock::new(
        "matrixmd",
        json!({ "conic_hypothesis": conic_ok, "t": ctx.t }),
        Status::from_bool(ok),
        Value::Array(per_d),
    ))
}

/// `ψ_D` from the nullspace of each `M_D`; reports existence and vanishing.
fn psis(ctx: &EqContext) -> Result<Vec<(Vec<usize>, Option<PsiPoly>)>, EqError> {
    ctx.d_subsets()
        .into_iter()
        .map(|d| {
            let md = build_md(ctx, &d)?;
            Ok((d, psi_from_md(&md, ctx)?))
        })
        .collect()
}

fn thepsis_block(ctx: &EqContext, found: &[(Vec<usize>, Option<PsiPoly>)]) -> LemmaBlock {
    let params = json!({ "n": ctx.n, "t": ctx.t });
    let mut ok = true;
    let mut per_d = Vec::new();
    for (d, psi) in found {
        let rows: Vec<Vec<usize>> = ctx.outside_a().into_iter().combinations(2).map(|l| union(d, &l)).collect();
        match psi {
            None => {
                ok = false;
                per_d.push(json!({ "D": subset_label(d), "psi": Value::Null }));
            }
            Some(psi) => {
                let missed: Vec<Vec<usize>> =
                    rows.into_iter().filter(|c| !eval_psi(ctx.arc(), psi, c).is_zero()).collect();
                ok &= missed.is_empty();
                per_d.push(json!({ "D": subset_label(d), "lambda": psi.lambda, "nonvanishing_rows": labels(&missed) }));
            }
        }
    }
    LemmaBlock::new("thepsis", params, Status::from_bool(ok), Value::Array(per_d))
}

/// `ψ_D(C) = 0` for every `(k-1)`-subset `C` of `E \ (A \ D)`.
fn projpsi_vanishing_block(ctx: &EqContext, found: &[(Vec<usize>, Option<PsiPoly>)]) -> LemmaBlock {
    let params = json!({
        "n": ctx.n,
        "t": ctx.t,
        "reading": "C ranges over the (k-1)-subsets of E \\ (A \\ D)",
    });
    if ctx.n != ctx.t {
        return LemmaBlock::not_instantiable("projpsi-vanishing", params, "requires n = t");
    }
    let mut ok = true;
    let mut per_d = Vec::new();
    for (d, psi) in found {
        let Some(psi) = psi else {
            ok = false;
            per_d.push(json!({ "D": subset_label(d), "psi": Value::Null }));
            continue;
        };
        let pool = difference(&ctx.e_set, &difference(&ctx.a, d));
        let cs: Vec<Vec<usize>> = pool.into_iter().combinations(ctx.k() - 1).collect();
        let missed: Vec<Vec<usize>> = cs.iter().filter(|c| !eval_psi(ctx.arc(), psi, c).is_zero()).cloned().collect();
        ok &= missed.is_empty();
        per_d.push(json!({ "D": subset_label(d), "checked": cs.len(), "nonvanishing": labels(&missed) }));
    }
    LemmaBlock::new("projpsi-vanishing", params, Status::from_bool(ok), Value::Array(per_d))
}

/// `ψ_D(E \ D) ≠ 0`, meaningful only when `|E \ D| = k - 1`, i.e. `t = k - 3`.
fn projpsi_nonvanishing_block(ctx: &EqContext, found: &[(Vec<usize>, Option<PsiPoly>)]) -> LemmaBlock {
    let params = json!({ "t": ctx.t, "k": ctx.k(), "E_minus_D_size": ctx.t + 2 });
    if ctx.t + 3 != ctx.k() || ctx.n != ctx.t {
        return LemmaBlock::not_instantiable(
            "projpsi-nonvanishing",
            params,
            "needs n = t = k - 3, which requires an arc of size q + 2",
        );
    }
    let mut zero_at = Vec::new();
    for (d, psi) in found {
        let c = difference(&ctx.e_set, d);
        if psi.as_ref().map_or(true, |p| eval_psi(ctx.arc(), p, &c).is_zero()) {
            zero_at.push(d.clone());
        }
    }
    LemmaBlock::new("projpsi-nonvanishing", params, Status::from_bool(zero_at.is_empty()), json!({ "zero_for_D": labels(&zero_at) }))
}

/// Each column of `Q_t`, placed on the rows `A ∪ {b}` of `P_n` and zero
/// elsewhere, lies in the column space of `P_n`; a weight-one vector in the
/// column space of `Q_t` therefore gives one for `P_n`.
fn weightone_q_block(ctx: &EqContext, pn: &GfMatrix) -> Result<(LemmaBlock, Option<GfMatrix>), EqError> {
    let params = json!({ "n": ctx.n, "t": ctx.t });
    if ctx.n != ctx.t {
        return Ok((LemmaBlock::not_instantiable("weightoneQ", params, "requires n = t"), None));
    }
    let qt = match build_qt(ctx) {
        Ok(q) => q,
        Err(EqError::MissingPsi(d)) => {
            return Ok((LemmaBlock::new("weightoneQ", params, Status::Fails, json!({ "missing_psi": subset_label(&d) })), None))
        }
        Err(e) => return Err(e),
    };
    let q = qt.matrix;
    let rows = pn_row_subsets(ctx);
    let outside = ctx.outside_a();
    let mut outside_colspace = Vec::new();
    for (j, (d, _)) in qt.psis.iter().enumerate() {
        let padded: Vec<FieldElement> = rows
            .iter()
            .map(|c| {
                if is_subset(&ctx.a, c) {
                    let b = difference(c, &ctx.a)[0];
                    q.get(outside.iter().position(|&x| x == b).expect("b in E \\ A"), j)
                } else {
                    FieldElement::ZERO
                }
            })
            .collect();
        if !pn.in_column_space(&padded)? {
            outside_colspace.push(d.clone());
        }
    }
    let q_weight_one = q.weight_one_in_colspace();
    let pn_weight_one = pn.weight_one_in_colspace();
    let implication = q_weight_one.is_empty() || !pn_weight_one.is_empty();
    let ok = outside_colspace.is_empty() && implication;
    let block = LemmaBlock::new(
        "weightoneQ",
        params,
        Status::from_bool(ok),
        json!({
            "q_shape": [q.rows(), q.cols()],
            "q_rank": q.rank(),
            "q_weight_one_rows": q_weight_one.iter().map(|&r| subset_label(&union(&ctx.a, &[outside[r]]))).collect_vec(),
            "padded_columns_outside_colspace": labels(&outside_colspace),
        }),
    );
    Ok((block, Some(q)))
}

fn woneq_block(ctx: &EqContext, q: Option<&GfMatrix>) -> LemmaBlock {
    let params = json!({ "t": ctx.t, "k": ctx.k() });
    match q {
        Some(q) if ctx.t + 3 == ctx.k() => {
            let w = q.weight_one_in_colspace();
            LemmaBlock::new(
                "woneQ",
                params,
                Status::from_bool(!w.is_empty()),
                json!({ "square": q.rows() == q.cols(), "rank": q.rank(), "weight_one_rows": w }),
            )
        }
        _ => LemmaBlock::not_instantiable("woneQ", params, "needs n = t = k - 3, which requires an arc of size q + 2"),
    }
}

fn main_block(ctx: &EqContext) -> LemmaBlock {
    let arc = ctx.arc();
    let q = arc.field().q();
    let params = json!({ "q": q, "k": ctx.k(), "arc_size": arc.len() });
    if !arc.field().is_odd() {
        return LemmaBlock::not_instantiable("main", params, "stated for odd q");
    }
    if ctx.t + 3 == ctx.k() {
        // The arc itself contradicts the statement.
        return LemmaBlock::new("main", params, Status::Fails, json!({ "arc_of_size": arc.len() }));
    }
    LemmaBlock::not_instantiable("main", params, "the contradiction argument needs an arc of size q + 2")
}

/// Runs every check on `ctx`. `alpha` must cover the rows of `P_n`.
pub fn pipeline_report(ctx: &EqContext, alpha: &AlphaSystem) -> Result<PipelineReport, EqError> {
    let arc = ctx.arc();
    let pn = build_pn(ctx);
    let (conic, conic_ok) = conic_block(ctx)?;
    let mut blocks = vec![conic, nowone_block(ctx, &pn, alpha)?, matrixmd_block(ctx, conic_ok)?];
    if ctx.n < ctx.t {
        let params = json!({ "n": ctx.n, "t": ctx.t });
        for name in ["thepsis", "projpsi-vanishing", "projpsi-nonvanishing"] {
            blocks.push(LemmaBlock::not_instantiable(name, params.clone(), "requires n >= t"));
        }
    } else {
        let found = psis(ctx)?;
        blocks.push(thepsis_block(ctx, &found));
        blocks.push(projpsi_vanishing_block(ctx, &found));
        blocks.push(projpsi_nonvanishing_block(ctx, &found));
    }
    let (wq, q) = weightone_q_block(ctx, &pn)?;
    blocks.push(wq);
    blocks.push(woneq_block(ctx, q.as_ref()));
    blocks.push(main_block(ctx));
    Ok(PipelineReport {
        q: arc.field().q(),
        k: arc.k(),
        context: serde_json::to_value(ctx).expect("context serializes"),
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::solve_alpha;
    use crate::gf::Field;
    use crate::projgeom::nrc;

    #[test]
    fn nrc_7_4_full_context() {
        let f = Field::with_order(7).unwrap();
        let s = nrc(&f, 4).unwrap();
        let alpha = solve_alpha(&s, None).unwrap();
        let ctx = EqContext::new(&s, (0..8).collect(), (0..5).collect(), vec![0, 1], 2).unwrap();
        let r = pipeline_report(&ctx, &alpha).unwrap();
        for name in ["projecttoplane", "nowone", "matrixmd", "thepsis", "projpsi-vanishing", "weightoneQ"] {
            assert_eq!(r.block(name).unwrap().status, Status::Holds, "{name}: {:?}", r.block(name));
        }
        for name in ["projpsi-nonvanishing", "woneQ", "main"] {
            assert_eq!(r.block(name).unwrap().status, Status::NotInstantiable, "{name}");
        }
        assert!(r.no_failures());
    }

    #[test]
    fn statuses_serialize_kebab() {
        assert_eq!(serde_json::to_string(&Status::NotInstantiable).unwrap(), "\"not-instantiable\"");
        assert_eq!(serde_json::to_string(&Status::Holds).unwrap(), "\"holds\"");
    }
}
