//! Dense exact linear algebra over GF(q).
//!
//! Pivoting is deterministic: columns are scanned left to right and the first
//! row (top to bottom) with a nonzero entry is taken as pivot. Nullspace bases
//! follow the reduced-echelon convention, one vector per free column in
//! ascending order, with a 1 in that free column.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Field, FieldElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("entry code {0} is not an element of the field")]
    BadEntry(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GfMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
    pub row_labels: Option<Vec<String>>,
    pub col_labels: Option<Vec<String>>,
}

/// On-disk and in-report shape of a matrix; entries are element codes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub col_labels: Option<Vec<String>>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Debug, Clone)]
pub struct Rref {
    pub matrix: GfMatrix,
    pub pivots: Vec<usize>,
}

impl GfMatrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> GfMatrix {
        GfMatrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
            row_labels: None,
            col_labels: None,
        }
    }

    pub fn identity(field: &Field, n: usize) -> GfMatrix {
        let mut m = GfMatrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, FieldElement::ONE);
        }
        m
    }

    pub fn from_rows(field: &Field, rows: &[Vec<FieldElement>]) -> Result<GfMatrix, LaError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LaError::Dimension("ragged rows".into()));
            }
            for &x in r {
                if !field.contains(x) {
                    return Err(LaError::BadEntry(x.code()));
                }
                data.push(x);
            }
        }
        Ok(GfMatrix { field: field.clone(), rows: rows.len(), cols, data, row_labels: None, col_labels: None })
    }

    /// Convenience constructor from raw codes, for tests and fixtures.
    pub fn from_codes(field: &Field, rows: &[&[u32]]) -> Result<GfMatrix, LaError> {
        let rows: Vec<Vec<FieldElement>> =
            rows.iter().map(|r| r.iter().map(|&c| FieldElement(c)).collect()).collect();
        GfMatrix::from_rows(field, &rows)
    }

    pub fn from_columns(field: &Field, cols: &[Vec<FieldElement>]) -> Result<GfMatrix, LaError> {
        Ok(GfMatrix::from_rows(field, cols)?.transpose())
    }

    pub fn with_labels(mut self, rows: Option<Vec<String>>, cols: Option<Vec<String>>) -> GfMatrix {
        self.row_labels = rows;
        self.col_labels = cols;
        self
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> GfMatrix {
        let mut t = GfMatrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t.row_labels = self.col_labels.clone();
        t.col_labels = self.row_labels.clone();
        t
    }

    /// Submatrix on the given row and column positions, labels carried over.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> GfMatrix {
        let mut m = GfMatrix::zeros(&self.field, rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                m.set(i, j, self.get(r, c));
            }
        }
        m.row_labels = self.row_labels.as_ref().map(|l| rows.iter().map(|&r| l[r].clone()).collect());
        m.col_labels = self.col_labels.as_ref().map(|l| cols.iter().map(|&c| l[c].clone()).collect());
        m
    }

    /// Appends a column. Column labels are dropped.
    pub fn push_column(&self, col: &[FieldElement]) -> Result<GfMatrix, LaError> {
        if col.len() != self.rows {
            return Err(LaError::Dimension(format!("column of length {} for {} rows", col.len(), self.rows)));
        }
        let mut m = GfMatrix::zeros(&self.field, self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c));
            }
            m.set(r, self.cols, col[r]);
        }
        m.row_labels = self.row_labels.clone();
        Ok(m)
    }

    pub fn push_row(&self, row: &[FieldElement]) -> Result<GfMatrix, LaError> {
        Ok(self.transpose().push_column(row)?.transpose())
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>, LaError> {
        if v.len() != self.cols {
            return Err(LaError::Dimension(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows).map(|r| self.field.dot(self.row(r), v)).collect())
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>, LaError> {
        self.transpose().mul_vec(v)
    }

    pub fn mul(&self, other: &GfMatrix) -> Result<GfMatrix, LaError> {
        if self.cols != other.rows {
            return Err(LaError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut m = GfMatrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = FieldElement::ZERO;
                for i in 0..self.cols {
                    acc = f.add(acc, f.mul(self.get(r, i), other.get(i, c)));
                }
                m.set(r, c, acc);
            }
        }
        Ok(m)
    }

    pub fn scale(&self, s: FieldElement) -> GfMatrix {
        let mut m = self.clone();
        for x in &mut m.data {
            *x = self.field.mul(*x, s);
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn det(&self) -> Result<FieldElement, LaError> {
        if self.rows != self.cols {
            return Err(LaError::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(det_in_place(&self.field, self.data.clone(), self.rows))
    }

    pub fn rref(&self) -> Rref {
        let f = &self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else { continue };
            m.swap_rows(p, row);
            let inv = f.inv(m.get(row, col)).expect("pivot is nonzero");
            for c in col..m.cols {
                m.set(row, c, f.mul(m.get(row, c), inv));
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col);
                if factor.is_zero() {
                    continue;
                }
                for c in col..m.cols {
                    let v = f.sub(m.get(r, c), f.mul(factor, m.get(row, c)));
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Rref { matrix: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
        if let Some(l) = &mut self.row_labels {
            l.swap(a, b);
        }
    }

    pub fn inverse(&self) -> Result<Option<GfMatrix>, LaError> {
        if self.rows != self.cols {
            return Err(LaError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut aug = GfMatrix::zeros(&self.field, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, n + r, FieldElement::ONE);
        }
        let Rref { matrix, pivots } = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Ok(None);
        }
        let idx: Vec<usize> = (0..n).collect();
        let right: Vec<usize> = (n..2 * n).collect();
        Ok(Some(matrix.select(&idx, &right)))
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis of `{v : M v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<FieldElement>> {
        let f = &self.field;
        let Rref { matrix: r, pivots } = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![FieldElement::ZERO; self.cols];
                v[free] = FieldElement::ONE;
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = f.neg(r.get(i, free));
                }
                v
            })
            .collect()
    }

    /// Basis of `{y : yᵀ M = 0}`.
    pub fn left_nullspace(&self) -> Vec<Vec<FieldElement>> {
        self.transpose().nullspace()
    }

    /// A solution of `M x = b` with every free variable zero, or `None` if the
    /// system is inconsistent.
    pub fn solve(&self, b: &[FieldElement]) -> Result<Option<Vec<FieldElement>>, LaError> {
        let aug = self.push_column(b)?;
        let Rref { matrix: r, pivots } = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![FieldElement::ZERO; self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r.get(i, self.cols);
        }
        Ok(Some(x))
    }

    /// Whether `v` lies in the column space.
    pub fn in_column_space(&self, v: &[FieldElement]) -> Result<bool, LaError> {
        Ok(self.solve(v)?.is_some())
    }

    /// Row positions `i` for which the unit vector `e_i` lies in the column
    /// space, ascending.
    ///
    /// `e_i` is in the column space iff every vector of the left nullspace
    /// has a zero `i`-th coordinate.
    pub fn weight_one_in_colspace(&self) -> Vec<usize> {
        let left = self.left_nullspace();
        (0..self.rows).filter(|&i| left.iter().all(|y| y[i].is_zero())).collect()
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: (0..self.rows).map(|r| self.row(r).iter().map(|x| x.code()).collect()).collect(),
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
        }
    }

    pub fn from_json(field: &Field, json: &MatrixJson) -> Result<GfMatrix, LaError> {
        if json.entries.len() != json.rows || json.entries.iter().any(|r| r.len() != json.cols) {
            return Err(LaError::Dimension("entries do not match rows/cols".into()));
        }
        let mut m = GfMatrix::zeros(field, json.rows, json.cols);
        for (r, row) in json.entries.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                if x >= field.q() {
                    return Err(LaError::BadEntry(x));
                }
                m.set(r, c, FieldElement(x));
            }
        }
        for (labels, n) in [(&json.row_labels, json.rows), (&json.col_labels, json.cols)] {
            if labels.as_ref().is_some_and(|l| l.len() != n) {
                return Err(LaError::Dimension("label count".into()));
            }
        }
        m.row_labels = json.row_labels.clone();
        m.col_labels = json.col_labels.clone();
        Ok(m)
    }
}

/// Determinant of the square matrix whose rows are given.
pub fn det_rows(field: &Field, rows: &[&[FieldElement]]) -> FieldElement {
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for r in rows {
        assert_eq!(r.len(), n, "det_rows needs a square matrix");
        data.extend_from_slice(r);
    }
    det_in_place(field, data, n)
}

fn det_in_place(f: &Field, mut a: Vec<FieldElement>, n: usize) -> FieldElement {
    let mut det = FieldElement::ONE;
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
            return FieldElement::ZERO;
        };
        if p != col {
            for c in 0..n {
                a.swap(p * n + c, col * n + c);
            }
            det = f.neg(det);
        }
        let pivot = a[col * n + col];
        det = f.mul(det, pivot);
        let inv = f.inv(pivot).expect("pivot is nonzero");
        for r in col + 1..n {
            let factor = f.mul(a[r * n + col], inv);
            if factor.is_zero() {
                continue;
            }
            for c in col..n {
                a[r * n + c] = f.sub(a[r * n + c], f.mul(factor, a[col * n + c]));
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(v: &[u32]) -> Vec<FieldElement> {
        v.iter().map(|&c| FieldElement(c)).collect()
    }

    #[test]
    fn det_examples() {
        let f5 = Field::with_order(5).unwrap();
        let v = GfMatrix::from_codes(&f5, &[&[1, 0, 0], &[1, 1, 1], &[1, 2, 4]]).unwrap();
        assert_eq!(v.det().unwrap(), FieldElement(2));
        assert_eq!(GfMatrix::identity(&f5, 4).det().unwrap(), FieldElement::ONE);
        let rep = GfMatrix::from_codes(&f5, &[&[1, 2, 3], &[4, 0, 1], &[1, 2, 3]]).unwrap();
        assert_eq!(rep.det().unwrap(), FieldElement::ZERO);
        let rect = GfMatrix::zeros(&f5, 2, 3);
        assert_eq!(rect.det(), Err(LaError::NotSquare { rows: 2, cols: 3 }));
    }

    #[test]
    fn nullspace_of_zero_row() {
        let f3 = Field::with_order(3).unwrap();
        let z = GfMatrix::zeros(&f3, 1, 3);
        let ns = z.nullspace();
        assert_eq!(ns.len(), 3);
        assert_eq!(ns[0], fe(&[1, 0, 0]));
        let one = GfMatrix::from_codes(&f3, &[&[1, 1, 0]]).unwrap();
        assert_eq!(one.nullspace(), vec![fe(&[2, 1, 0]), fe(&[0, 0, 1])]);
    }

    #[test]
    fn solve_examples() {
        let f7 = Field::with_order(7).unwrap();
        let b = fe(&[3, 0, 6]);
        assert_eq!(GfMatrix::identity(&f7, 3).solve(&b).unwrap(), Some(b.clone()));
        let m = GfMatrix::from_codes(&f7, &[&[1, 1], &[1, 1]]).unwrap();
        assert_eq!(m.solve(&fe(&[1, 2])).unwrap(), None);
        assert_eq!(m.solve(&fe(&[2, 2])).unwrap(), Some(fe(&[2, 0])));
        assert!(matches!(m.solve(&fe(&[1])), Err(LaError::Dimension(_))));
    }

    #[test]
    fn weight_one_examples() {
        let f5 = Field::with_order(5).unwrap();
        assert_eq!(GfMatrix::identity(&f5, 3).weight_one_in_colspace(), vec![0, 1, 2]);
        let ones = GfMatrix::from_codes(&f5, &[&[1], &[1], &[1]]).unwrap();
        assert!(ones.weight_one_in_colspace().is_empty());
        let m = GfMatrix::from_codes(&f5, &[&[1, 1], &[0, 1], &[0, 1]]).unwrap();
        assert_eq!(m.weight_one_in_colspace(), vec![0]);
    }

    #[test]
    fn json_roundtrip_with_labels() {
        let f9 = Field::with_order(9).unwrap();
        let m = GfMatrix::from_codes(&f9, &[&[1, 8], &[3, 0]])
            .unwrap()
            .with_labels(Some(vec!["a".into(), "b".into()]), None);
        let back = GfMatrix::from_json(&f9, &m.to_json()).unwrap();
        assert_eq!(back, m);
        let mut bad = m.to_json();
        bad.entries[0][0] = 9;
        assert_eq!(GfMatrix::from_json(&f9, &bad), Err(LaError::BadEntry(9)));
    }

    #[test]
    fn rank_via_rref_pivots() {
        let f7 = Field::with_order(7).unwrap();
        let m = GfMatrix::from_codes(&f7, &[&[0, 2, 4], &[0, 1, 2], &[1, 0, 3]]).unwrap();
        let r = m.rref();
        assert_eq!(r.pivots, vec![0, 1]);
        assert_eq!(m.rank(), 2);
    }
}
