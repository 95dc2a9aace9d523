//! Points, arcs and normal rational curves in PG(k-1, q).
//!
//! Vectors are kept exactly as constructed or loaded. Only
//! [`ProjPoint`] normalizes (first nonzero coordinate 1), because the
//! coefficient system of the equations module depends on the chosen vectors
//! and not only on the points they span.
//!
//! Subsets of an arc are always named by ascending index tuples into the
//! arc's stored order.

use std::ops::Deref;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactla::{det_rows, GfMatrix, LaError};
use crate::gf::{Field, FieldElement, FieldSpec, FieldSpecJson, GfError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("not an arc: points {0:?} are linearly dependent")]
    NotAnArc(Vec<usize>),
    #[error("vectors must all have length {expected}, vector {index} has length {found}")]
    Ragged { index: usize, expected: usize, found: usize },
    #[error("dimension k = {0} must be at least 2")]
    SmallDimension(usize),
    #[error("a normal rational curve in dimension k = {k} needs k <= q + 1 = {}", q + 1)]
    CurveTooLong { k: usize, q: u32 },
    #[error("vectors projected from are linearly dependent")]
    DependentCenter,
    #[error("point {0} lies in the subspace it is projected from")]
    DegenerateProjection(usize),
    #[error("a*d - b*c must be nonzero")]
    SingularMobius,
    #[error("index {index} out of range for an arc of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("expected {expected} indices, got {found}")]
    SubsetSize { expected: usize, found: usize },
    #[error("arc file: {0}")]
    File(String),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Linear(#[from] LaError),
}

/// A coordinate vector of V_k(q).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorK(pub Vec<FieldElement>);

impl Deref for VectorK {
    type Target = [FieldElement];
    fn deref(&self) -> &[FieldElement] {
        &self.0
    }
}

impl VectorK {
    pub fn from_codes(codes: &[u32]) -> VectorK {
        VectorK(codes.iter().map(|&c| FieldElement(c)).collect())
    }

    pub fn codes(&self) -> Vec<u32> {
        self.0.iter().map(|x| x.code()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn scale(&self, f: &Field, s: FieldElement) -> VectorK {
        VectorK(self.0.iter().map(|&x| f.mul(x, s)).collect())
    }

    pub fn add(&self, f: &Field, other: &VectorK) -> VectorK {
        VectorK(self.0.iter().zip(&other.0).map(|(&a, &b)| f.add(a, b)).collect())
    }

    /// The scalar multiple with first nonzero coordinate 1 (zero stays zero).
    pub fn normalized(&self, f: &Field) -> VectorK {
        match self.0.iter().find(|x| !x.is_zero()) {
            Some(&lead) => self.scale(f, f.inv(lead).expect("nonzero")),
            None => self.clone(),
        }
    }
}

/// Canonical representative of a 1-dimensional subspace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjPoint(VectorK);

impl ProjPoint {
    /// `None` for the zero vector.
    pub fn new(f: &Field, v: &VectorK) -> Option<ProjPoint> {
        (!v.is_zero()).then(|| ProjPoint(v.normalized(f)))
    }

    pub fn vector(&self) -> &VectorK {
        &self.0
    }

    pub fn into_vector(self) -> VectorK {
        self.0
    }
}

impl Deref for ProjPoint {
    type Target = [FieldElement];
    fn deref(&self) -> &[FieldElement] {
        &self.0
    }
}

/// Outcome of an arc test: on failure, the first dependent index tuple in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArcCheck {
    pub is_arc: bool,
    pub witness: Option<Vec<usize>>,
}

/// Every `k` of the points (or all of them, when fewer than `k`) are
/// linearly independent.
pub fn is_arc(field: &Field, k: usize, points: &[VectorK]) -> Result<ArcCheck, GeomError> {
    check_lengths(k, points)?;
    if points.len() < k {
        let m = GfMatrix::from_rows(field, &points.iter().map(|p| p.0.clone()).collect_vec())?;
        let ok = m.rank() == points.len();
        return Ok(ArcCheck { is_arc: ok, witness: (!ok).then(|| (0..points.len()).collect()) });
    }
    for subset in (0..points.len()).combinations(k) {
        let rows: Vec<&[FieldElement]> = subset.iter().map(|&i| &points[i][..]).collect();
        if det_rows(field, &rows).is_zero() {
            return Ok(ArcCheck { is_arc: false, witness: Some(subset) });
        }
    }
    Ok(ArcCheck { is_arc: true, witness: None })
}

fn check_lengths(k: usize, points: &[VectorK]) -> Result<(), GeomError> {
    if k < 2 {
        return Err(GeomError::SmallDimension(k));
    }
    for (index, p) in points.iter().enumerate() {
        if p.len() != k {
            return Err(GeomError::Ragged { index, expected: k, found: p.len() });
        }
    }
    Ok(())
}

/// `det(u, c_1, ..., c_{k-1})` with `u` as first row.
pub fn det_uc(field: &Field, u: &[FieldElement], c: &[&[FieldElement]]) -> FieldElement {
    let mut rows = Vec::with_capacity(c.len() + 1);
    rows.push(u);
    rows.extend_from_slice(c);
    det_rows(field, &rows)
}

/// The dual vector `x` of an ordered `(k-1)`-tuple `C`, with
/// `u · x = det(u, C)` for every `u`; `x_j = (-1)^(j+1) det(C without column j)`
/// (1-based `j`). A dependent `C` yields the zero vector.
pub fn dual_coords(field: &Field, c: &[&[FieldElement]]) -> VectorK {
    let k = c.len() + 1;
    let mut minor = vec![vec![FieldElement::ZERO; k - 1]; k - 1];
    let coords = (0..k)
        .map(|j| {
            for (r, row) in c.iter().enumerate() {
                let mut col = 0;
                for (i, &x) in row.iter().enumerate() {
                    if i != j {
                        minor[r][col] = x;
                        col += 1;
                    }
                }
            }
            let rows: Vec<&[FieldElement]> = minor.iter().map(|r| &r[..]).collect();
            let d = det_rows(field, &rows);
            if j % 2 == 0 { d } else { field.neg(d) }
        })
        .collect();
    VectorK(coords)
}

/// Basis of V_k formed by `from` followed by standard basis vectors,
/// each appended only if it increases the rank.
fn completed_basis(field: &Field, k: usize, from: &[VectorK]) -> Result<GfMatrix, GeomError> {
    let mut rows: Vec<Vec<FieldElement>> = from.iter().map(|v| v.0.clone()).collect();
    if !rows.is_empty() && GfMatrix::from_rows(field, &rows)?.rank() < rows.len() {
        return Err(GeomError::DependentCenter);
    }
    for j in 0..k {
        if rows.len() == k {
            break;
        }
        let mut e = vec![FieldElement::ZERO; k];
        e[j] = FieldElement::ONE;
        rows.push(e);
        if GfMatrix::from_rows(field, &rows)?.rank() < rows.len() {
            rows.pop();
        }
    }
    Ok(GfMatrix::from_rows(field, &rows)?)
}

/// Quotient representatives of `points` in V_k / <from>: coordinates in the
/// completed basis with the `from` coordinates dropped.
pub fn project(field: &Field, points: &[VectorK], from: &[VectorK]) -> Result<Vec<VectorK>, GeomError> {
    let k = match (points.first(), from.first()) {
        (Some(p), _) => p.len(),
        (None, Some(d)) => d.len(),
        (None, None) => return Ok(Vec::new()),
    };
    check_lengths(k, points)?;
    check_lengths(k, from)?;
    let basis = completed_basis(field, k, from)?;
    let inv = basis.inverse()?.expect("completed basis is invertible");
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let coords = inv.vec_mul(p)?;
            let v = VectorK(coords[from.len()..].to_vec());
            if v.is_zero() {
                Err(GeomError::DegenerateProjection(i))
            } else {
                Ok(v)
            }
        })
        .collect()
}

/// Homogeneous quadratic `c00 x0² + c11 x1² + c22 x2² + c01 x0x1 + c02 x0x2 + c12 x1x2`,
/// scaled so its first nonzero coefficient is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConicForm {
    pub coeffs: [FieldElement; 6],
}

impl ConicForm {
    pub fn eval(&self, f: &Field, x: &[FieldElement]) -> FieldElement {
        let m = conic_monomials(f, x);
        f.dot(&self.coeffs, &m)
    }
}

fn conic_monomials(f: &Field, x: &[FieldElement]) -> [FieldElement; 6] {
    [
        f.mul(x[0], x[0]),
        f.mul(x[1], x[1]),
        f.mul(x[2], x[2]),
        f.mul(x[0], x[1]),
        f.mul(x[0], x[2]),
        f.mul(x[1], x[2]),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConicFit {
    Unique { form: ConicForm },
    NotUnique { dimension: usize },
    None,
}

impl ConicFit {
    /// At least one conic passes through all the points.
    pub fn exists(&self) -> bool {
        !matches!(self, ConicFit::None)
    }
}

/// Conics through a set of points of PG(2, q), via the nullspace of the
/// evaluation matrix.
pub fn conic_fit(field: &Field, points: &[VectorK]) -> Result<ConicFit, GeomError> {
    check_lengths(3, points)?;
    let rows: Vec<Vec<FieldElement>> = points.iter().map(|p| conic_monomials(field, p).to_vec()).collect();
    let m = if rows.is_empty() { GfMatrix::zeros(field, 0, 6) } else { GfMatrix::from_rows(field, &rows)? };
    let ns = m.nullspace();
    Ok(match ns.len() {
        0 => ConicFit::None,
        1 => {
            let v = VectorK(ns[0].clone()).normalized(field);
            ConicFit::Unique { form: ConicForm { coeffs: v.0.try_into().expect("six coefficients") } }
        }
        dimension => ConicFit::NotUnique { dimension },
    })
}

/// An ordered set of vectors of V_k(q) with the arc property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    field: Field,
    k: usize,
    points: Vec<VectorK>,
}

impl Arc {
    pub fn new(field: &Field, k: usize, points: Vec<VectorK>) -> Result<Arc, GeomError> {
        let check = is_arc(field, k, &points)?;
        if !check.is_arc {
            return Err(GeomError::NotAnArc(check.witness.unwrap_or_default()));
        }
        Ok(Arc { field: field.clone(), k, points })
    }

    /// Skips the arc test; lengths are still checked.
    pub fn new_unchecked(field: &Field, k: usize, points: Vec<VectorK>) -> Result<Arc, GeomError> {
        check_lengths(k, &points)?;
        Ok(Arc { field: field.clone(), k, points })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[VectorK] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &VectorK {
        &self.points[i]
    }

    /// `q + k - 1 - |S|`, the number of tangent hyperplanes through each
    /// `(k-2)`-subset.
    pub fn deficiency(&self) -> i64 {
        self.field.q() as i64 + self.k as i64 - 1 - self.points.len() as i64
    }

    pub fn check_indices(&self, idx: &[usize]) -> Result<(), GeomError> {
        match idx.iter().find(|&&i| i >= self.len()) {
            Some(&index) => Err(GeomError::IndexOutOfRange { index, len: self.len() }),
            None => Ok(()),
        }
    }

    pub fn rows(&self, idx: &[usize]) -> Vec<&[FieldElement]> {
        idx.iter().map(|&i| &self.points[i][..]).collect()
    }

    /// The sub-arc on the given indices, in the given order.
    pub fn subset(&self, idx: &[usize]) -> Result<Arc, GeomError> {
        self.check_indices(idx)?;
        Ok(Arc { field: self.field.clone(), k: self.k, points: idx.iter().map(|&i| self.points[i].clone()).collect() })
    }

    /// `det(u, C)` with the rows of `C` in the given order.
    pub fn det_with(&self, u: &[FieldElement], c: &[usize]) -> FieldElement {
        det_uc(&self.field, u, &self.rows(c))
    }

    pub fn dual(&self, c: &[usize]) -> VectorK {
        dual_coords(&self.field, &self.rows(c))
    }

    /// Projections of the points outside `from` (in arc order) from the
    /// points indexed by `from`.
    pub fn project_from(&self, from: &[usize]) -> Result<Vec<VectorK>, GeomError> {
        self.check_indices(from)?;
        let rest: Vec<VectorK> =
            (0..self.len()).filter(|i| !from.contains(i)).map(|i| self.points[i].clone()).collect();
        let center: Vec<VectorK> = from.iter().map(|&i| self.points[i].clone()).collect();
        project(&self.field, &rest, &center)
    }

    pub fn to_file(&self) -> ArcFile {
        ArcFile {
            field: self.field.spec().to_json(),
            k: self.k,
            vectors: self.points.iter().map(|v| v.codes()).collect(),
        }
    }
}

/// `(1, t, ..., t^(k-1))` for `t` in code order, then `(0, ..., 0, 1)`.
pub fn nrc(field: &Field, k: usize) -> Result<Arc, GeomError> {
    if k < 2 {
        return Err(GeomError::SmallDimension(k));
    }
    if k > field.q() as usize + 1 {
        return Err(GeomError::CurveTooLong { k, q: field.q() });
    }
    let mut points: Vec<VectorK> =
        field.elements().map(|t| VectorK((0..k).map(|i| field.pow(t, i as u64)).collect())).collect();
    let mut last = vec![FieldElement::ZERO; k];
    last[k - 1] = FieldElement::ONE;
    points.push(VectorK(last));
    Ok(Arc { field: field.clone(), k, points })
}

/// Duals of the hyperplanes through `<A>` that contain no point of `S`
/// outside `A`, in pencil order `s·y1 + y2` (`s` by code) then `y1`.
pub fn tangent_hyperplanes(arc: &Arc, a: &[usize]) -> Result<Vec<VectorK>, GeomError> {
    let k = arc.k();
    if a.len() != k - 2 {
        return Err(GeomError::SubsetSize { expected: k - 2, found: a.len() });
    }
    arc.check_indices(a)?;
    let f = arc.field();
    let pencil = hyperplane_pencil(f, k, &a.iter().map(|&i| arc.point(i).clone()).collect_vec())?;
    let others: Vec<&VectorK> = (0..arc.len()).filter(|i| !a.contains(i)).map(|i| arc.point(i)).collect();
    Ok(pencil
        .into_iter()
        .filter(|h| others.iter().all(|p| !f.dot(p, h).is_zero()))
        .collect())
}

/// The q + 1 normalized duals of hyperplanes containing a (k-2)-dimensional
/// subspace.
pub fn hyperplane_pencil(f: &Field, k: usize, span: &[VectorK]) -> Result<Vec<VectorK>, GeomError> {
    let rows: Vec<Vec<FieldElement>> = span.iter().map(|v| v.0.clone()).collect();
    let m = if rows.is_empty() { GfMatrix::zeros(f, 0, k) } else { GfMatrix::from_rows(f, &rows)? };
    let ns = m.nullspace();
    if ns.len() != 2 {
        return Err(GeomError::DependentCenter);
    }
    let (y1, y2) = (VectorK(ns[0].clone()), VectorK(ns[1].clone()));
    let mut out: Vec<VectorK> = f.elements().map(|s| y1.scale(f, s).add(f, &y2).normalized(f)).collect();
    out.push(y1.normalized(f));
    Ok(out)
}

fn poly_mul(f: &Field, a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
    let mut out = vec![FieldElement::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    out
}

/// The k×k matrix `M` with `(1, t, ..., t^(k-1)) · M =
/// ((ct+d)^(k-1), (ct+d)^(k-2)(at+b), ..., (at+b)^(k-1))`.
///
/// Entry `(i, j)` is the coefficient of `t^i` in `(ct+d)^(k-1-j) (at+b)^j`.
pub fn mobius_nrc_matrix(
    f: &Field,
    k: usize,
    a: FieldElement,
    b: FieldElement,
    c: FieldElement,
    d: FieldElement,
) -> Result<GfMatrix, GeomError> {
    if f.mul(a, d) == f.mul(b, c) {
        return Err(GeomError::SingularMobius);
    }
    let lin_num = [b, a];
    let lin_den = [d, c];
    let mut m = GfMatrix::zeros(f, k, k);
    for j in 0..k {
        let mut poly = vec![FieldElement::ONE];
        for _ in 0..k - 1 - j {
            poly = poly_mul(f, &poly, &lin_den);
        }
        for _ in 0..j {
            poly = poly_mul(f, &poly, &lin_num);
        }
        for (i, &coef) in poly.iter().enumerate() {
            m.set(i, j, coef);
        }
    }
    Ok(m)
}

/// Generator matrix of the MDS code of an arc: column `j` is point `j`.
pub fn arc_to_generator_matrix(arc: &Arc) -> GfMatrix {
    let cols: Vec<Vec<FieldElement>> = arc.points().iter().map(|v| v.0.clone()).collect();
    if cols.is_empty() {
        return GfMatrix::zeros(arc.field(), arc.k(), 0);
    }
    GfMatrix::from_columns(arc.field(), &cols).expect("uniform lengths")
}

/// Every `k`-subset of columns (or all columns, when fewer) is independent.
pub fn is_mds(g: &GfMatrix) -> bool {
    let k = g.rows();
    let n = g.cols();
    let f = g.field();
    let cols: Vec<Vec<FieldElement>> = (0..n).map(|c| g.column(c)).collect();
    if n < k {
        return GfMatrix::from_columns(f, &cols).map_or(true, |m| m.rank() == n);
    }
    (0..n).combinations(k).all(|s| {
        let rows: Vec<&[FieldElement]> = s.iter().map(|&i| &cols[i][..]).collect();
        !det_rows(f, &rows).is_zero()
    })
}

/// All points of PG(k-1, q), lexicographic by coordinate codes.
pub fn enumerate_points(f: &Field, k: usize) -> Vec<ProjPoint> {
    let q = f.q();
    let mut out = Vec::new();
    for lead in (0..k).rev() {
        let tail = k - 1 - lead;
        let count = (q as u64).pow(tail as u32);
        for code in 0..count {
            let mut v = vec![FieldElement::ZERO; k];
            v[lead] = FieldElement::ONE;
            let mut c = code;
            for pos in (lead + 1..k).rev() {
                v[pos] = FieldElement((c % q as u64) as u32);
                c /= q as u64;
            }
            out.push(ProjPoint(VectorK(v)));
        }
    }
    out
}

/// Arc file: field, dimension and vectors in arc order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcFile {
    pub field: FieldSpecJson,
    pub k: usize,
    pub vectors: Vec<Vec<u32>>,
}

impl ArcFile {
    /// Builds the arc, re-checking the arc property when `validate` is set.
    pub fn into_arc(self, validate: bool) -> Result<Arc, GeomError> {
        let spec = FieldSpec::from_json(&self.field)?;
        let field = Field::new(spec);
        let mut points = Vec::with_capacity(self.vectors.len());
        for v in &self.vectors {
            for &c in v {
                field.element(c as u64)?;
            }
            points.push(VectorK::from_codes(v));
        }
        if validate {
            Arc::new(&field, self.k, points)
        } else {
            Arc::new_unchecked(&field, self.k, points)
        }
    }

    pub fn parse(text: &str) -> Result<ArcFile, GeomError> {
        serde_json::from_str(text).map_err(|e| GeomError::File(e.to_string()))
    }
}
