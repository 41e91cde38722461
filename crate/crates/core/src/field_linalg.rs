//! Exact linear algebra over a prime field GF(p) with p < 2^16.
//!
//! Dense matrices carry the maps of grid modules; sparse columns with a pivot-indexed
//! reducer carry the cochain computations.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("modulus {0} is not a prime below 65536")]
    BadModulus(u32),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("target vector is not in the span")]
    NotInSpan,
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The prime field GF(p); all residues are `u32` values in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    pub p: u32,
}

impl Default for Field {
    fn default() -> Self {
        Field { p: 2 }
    }
}

impl Field {
    pub fn new(p: u32) -> Result<Field, LinalgError> {
        if p >= 1 << 16 || !is_prime(p) {
            return Err(LinalgError::BadModulus(p));
        }
        Ok(Field { p })
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        a * b % self.p
    }

    /// Multiplicative inverse by Fermat's little theorem; panics on zero.
    pub fn inv(&self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero in GF({})", self.p);
        let mut base = a % self.p;
        let mut e = self.p - 2;
        let mut r = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        r
    }

    /// Reduces a signed integer into the field.
    pub fn from_i64(&self, a: i64) -> u32 {
        a.rem_euclid(self.p as i64) as u32
    }
}

/// A field element bundled with its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    pub residue: u32,
    pub modulus: u32,
}

impl FieldElem {
    pub fn new(residue: i64, modulus: u32) -> FieldElem {
        FieldElem { residue: residue.rem_euclid(modulus as i64) as u32, modulus }
    }

    fn field(&self) -> Field {
        Field { p: self.modulus }
    }

    pub fn inv(&self) -> Option<FieldElem> {
        if self.residue == 0 {
            None
        } else {
            Some(FieldElem { residue: self.field().inv(self.residue), modulus: self.modulus })
        }
    }
}

impl Add for FieldElem {
    type Output = FieldElem;
    fn add(self, o: FieldElem) -> FieldElem {
        assert_eq!(self.modulus, o.modulus);
        FieldElem { residue: self.field().add(self.residue, o.residue), modulus: self.modulus }
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    fn sub(self, o: FieldElem) -> FieldElem {
        assert_eq!(self.modulus, o.modulus);
        FieldElem { residue: self.field().sub(self.residue, o.residue), modulus: self.modulus }
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    fn mul(self, o: FieldElem) -> FieldElem {
        assert_eq!(self.modulus, o.modulus);
        FieldElem { residue: self.field().mul(self.residue, o.residue), modulus: self.modulus }
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem { residue: self.field().neg(self.residue), modulus: self.modulus }
    }
}

/// A dense row-major matrix over GF(p).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub field: Field,
    pub data: Vec<u32>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{}x{}{:?}", self.rows, self.cols, self.to_rows())
    }
}

impl Mat {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, field, data: vec![0; rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Mat {
        let mut m = Mat::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from rows of signed integers reduced mod p.
    pub fn from_rows(field: Field, rows: &[Vec<i64>]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Mat::zeros(field, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, field.from_i64(v));
            }
        }
        m
    }

    /// Builds a matrix whose columns are the given dense vectors.
    pub fn from_cols(field: Field, rows: usize, cols: &[Vec<u32>]) -> Mat {
        let mut m = Mat::zeros(field, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for (i, &v) in c.iter().enumerate() {
                m.set(i, j, v % field.p);
            }
        }
        m
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = Mat::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b != 0 {
                        let v = f.add(out.get(i, j), f.mul(a, b));
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix product; panics on a dimension mismatch, which always signals a bug.
    pub fn compose(&self, other: &Mat) -> Mat {
        self.mul(other).expect("matrix dimensions must agree")
    }

    pub fn add(&self, other: &Mat) -> Result<Mat, LinalgError> {
        self.zip(other, |f, a, b| f.add(a, b))
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat, LinalgError> {
        self.zip(other, |f, a, b| f.sub(a, b))
    }

    fn zip(&self, other: &Mat, op: impl Fn(&Field, u32, u32) -> u32) -> Result<Mat, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(other.data.iter()) {
            *o = op(&self.field, *o, b);
        }
        Ok(out)
    }

    pub fn scale(&self, c: u32) -> Mat {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v = self.field.mul(*v, c);
        }
        out
    }

    pub fn hstack(mats: &[&Mat]) -> Result<Mat, LinalgError> {
        let first = mats.first().ok_or_else(|| LinalgError::Dimension("empty hstack".into()))?;
        let rows = first.rows;
        if mats.iter().any(|m| m.rows != rows) {
            return Err(LinalgError::Dimension("hstack with mismatched row counts".into()));
        }
        let cols = mats.iter().map(|m| m.cols).sum();
        let mut out = Mat::zeros(first.field, rows, cols);
        let mut off = 0;
        for m in mats {
            for i in 0..rows {
                for j in 0..m.cols {
                    out.set(i, off + j, m.get(i, j));
                }
            }
            off += m.cols;
        }
        Ok(out)
    }

    pub fn vstack(mats: &[&Mat]) -> Result<Mat, LinalgError> {
        let first = mats.first().ok_or_else(|| LinalgError::Dimension("empty vstack".into()))?;
        let cols = first.cols;
        if mats.iter().any(|m| m.cols != cols) {
            return Err(LinalgError::Dimension("vstack with mismatched column counts".into()));
        }
        let rows = mats.iter().map(|m| m.rows).sum();
        let mut out = Mat::zeros(first.field, rows, cols);
        let mut off = 0;
        for m in mats {
            for i in 0..m.rows {
                for j in 0..cols {
                    out.set(off + i, j, m.get(i, j));
                }
            }
            off += m.rows;
        }
        Ok(out)
    }

    /// Reduced row echelon form and the list of pivot columns.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = vec![];
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c) != 0) else { continue };
            if pr != r {
                for j in 0..m.cols {
                    let t = m.get(r, j);
                    m.set(r, j, m.get(pr, j));
                    m.set(pr, j, t);
                }
            }
            let inv = f.inv(m.get(r, c));
            for j in 0..m.cols {
                let v = f.mul(m.get(r, j), inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i != r {
                    let factor = m.get(i, c);
                    if factor != 0 {
                        for j in 0..m.cols {
                            let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                            m.set(i, j, v);
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space, as the columns of the returned matrix.
    pub fn kernel(&self) -> Mat {
        let f = self.field;
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Mat::zeros(f, self.cols, free.len());
        for (t, &fc) in free.iter().enumerate() {
            k.set(fc, t, 1);
            for (row, &pc) in pivots.iter().enumerate() {
                k.set(pc, t, f.neg(r.get(row, fc)));
            }
        }
        k
    }
}

pub fn rank(m: &Mat) -> usize {
    m.rank()
}

/// Dimension of the sum of the column spaces of matrices sharing a row count.
pub fn column_space_sum_dim(ms: &[&Mat]) -> Result<usize, LinalgError> {
    if ms.is_empty() {
        return Ok(0);
    }
    Ok(Mat::hstack(ms)?.rank())
}

/// Some `c` with `B c = target`, or `NotInSpan`.
pub fn solve_in_span(b: &Mat, target: &[u32]) -> Result<Vec<u32>, LinalgError> {
    if target.len() != b.rows {
        return Err(LinalgError::Dimension(format!("target length {} vs {} rows", target.len(), b.rows)));
    }
    let f = b.field;
    let t = Mat::from_cols(f, b.rows, &[target.to_vec()]);
    let aug = Mat::hstack(&[b, &t])?;
    let (r, pivots) = aug.rref();
    if pivots.contains(&b.cols) {
        return Err(LinalgError::NotInSpan);
    }
    let mut c = vec![0u32; b.cols];
    for (row, &pc) in pivots.iter().enumerate() {
        c[pc] = r.get(row, b.cols);
    }
    Ok(c)
}

/// A sparse vector: entries sorted by index, all values nonzero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    pub entries: Vec<(usize, u32)>,
}

impl SparseVec {
    pub fn new() -> SparseVec {
        SparseVec { entries: vec![] }
    }

    /// Builds a vector from arbitrary (index, value) pairs, summing duplicates.
    pub fn from_pairs(field: Field, mut pairs: Vec<(usize, u32)>) -> SparseVec {
        pairs.sort_by_key(|e| e.0);
        let mut entries: Vec<(usize, u32)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            let v = v % field.p;
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 = field.add(last.1, v),
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|e| e.1 != 0);
        SparseVec { entries }
    }

    pub fn unit(i: usize) -> SparseVec {
        SparseVec { entries: vec![(i, 1)] }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// The largest index with a nonzero entry.
    pub fn pivot(&self) -> Option<(usize, u32)> {
        self.entries.last().copied()
    }

    pub fn get(&self, i: usize) -> u32 {
        match self.entries.binary_search_by_key(&i, |e| e.0) {
            Ok(k) => self.entries[k].1,
            Err(_) => 0,
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, field: Field, c: u32, other: &SparseVec) -> SparseVec {
        if c == 0 {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, field.mul(c, b[j].1)));
                j += 1;
            } else {
                let v = field.add(a[i].1, field.mul(c, b[j].1));
                if v != 0 {
                    out.push((a[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        SparseVec { entries: out }
    }

    pub fn scale(&self, field: Field, c: u32) -> SparseVec {
        if c.is_multiple_of(field.p) {
            return SparseVec::new();
        }
        SparseVec { entries: self.entries.iter().map(|&(i, v)| (i, field.mul(v, c))).collect() }
    }

    /// Keeps only the entries whose index satisfies the predicate.
    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> SparseVec {
        SparseVec { entries: self.entries.iter().copied().filter(|e| keep(e.0)).collect() }
    }

    pub fn to_dense(&self, len: usize) -> Vec<u32> {
        let mut d = vec![0; len];
        for &(i, v) in &self.entries {
            d[i] = v;
        }
        d
    }
}

/// A set of sparse columns in echelon form, one per pivot index, each tagged with a label.
///
/// Reducing a vector against the set subtracts multiples of the stored columns until the
/// pivot is not present, and reports the coefficients used per label.
#[derive(Clone, Debug)]
pub struct SparseReducer<L: Clone> {
    pub field: Field,
    cols: HashMap<usize, (SparseVec, L)>,
}

impl<L: Clone> SparseReducer<L> {
    pub fn new(field: Field) -> Self {
        SparseReducer { field, cols: HashMap::new() }
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    /// Reduces `v`; returns the residual and the list of `(label, coefficient)` subtracted,
    /// so that `v = residual + sum coefficient * column(label)`.
    pub fn reduce(&self, v: &SparseVec) -> (SparseVec, Vec<(L, u32)>) {
        let f = self.field;
        let mut cur = v.clone();
        let mut used = vec![];
        while let Some((piv, val)) = cur.pivot() {
            let Some((col, label)) = self.cols.get(&piv) else { break };
            let (_, cval) = col.pivot().expect("stored columns are nonzero");
            let c = f.mul(val, f.inv(cval));
            cur = cur.axpy(f, f.neg(c), col);
            used.push((label.clone(), c));
        }
        (cur, used)
    }

    /// Reduces fully, continuing past pivots not in the set, and returns the residual.
    pub fn reduce_full(&self, v: &SparseVec) -> (SparseVec, Vec<(L, u32)>) {
        let f = self.field;
        let mut cur = v.clone();
        let mut used = vec![];
        let mut bound = usize::MAX;
        loop {
            let next = cur.entries.iter().rev().find(|e| e.0 < bound).copied();
            let Some((piv, val)) = next else { break };
            if let Some((col, label)) = self.cols.get(&piv) {
                let (_, cval) = col.pivot().expect("stored columns are nonzero");
                let c = f.mul(val, f.inv(cval));
                cur = cur.axpy(f, f.neg(c), col);
                used.push((label.clone(), c));
            } else {
                bound = piv;
            }
        }
        (cur, used)
    }

    /// Inserts a column whose pivot must not already be present.
    pub fn insert(&mut self, v: SparseVec, label: L) {
        let (piv, _) = v.pivot().expect("cannot insert the zero column");
        let prev = self.cols.insert(piv, (v, label));
        assert!(prev.is_none(), "pivot {piv} already present");
    }

    /// Reduces `v` and inserts the residual when nonzero; returns whether it was inserted.
    pub fn add(&mut self, v: &SparseVec, label: L) -> bool {
        let (r, _) = self.reduce(v);
        if r.is_zero() {
            false
        } else {
            self.insert(r, label);
            true
        }
    }
}

/// Null space of a family of labelled sparse columns, as sparse vectors over the labels.
///
/// Column `(label, c)` contributes `c` at coordinate `label`; the result spans all
/// combinations of the columns that vanish.
pub fn sparse_kernel(field: Field, cols: &[(usize, SparseVec)]) -> Vec<SparseVec> {
    let f = field;
    let mut stored: HashMap<usize, (SparseVec, SparseVec)> = HashMap::new();
    let mut kernel = vec![];
    for (label, c) in cols {
        let mut col = c.clone();
        let mut track = SparseVec::unit(*label);
        while let Some((piv, val)) = col.pivot() {
            let Some((sc, st)) = stored.get(&piv) else { break };
            let (_, sval) = sc.pivot().expect("stored columns are nonzero");
            let m = f.neg(f.mul(val, f.inv(sval)));
            col = col.axpy(f, m, sc);
            track = track.axpy(f, m, st);
        }
        match col.pivot() {
            None => kernel.push(track),
            Some((piv, _)) => {
                stored.insert(piv, (col, track));
            }
        }
    }
    kernel
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const F2: Field = Field { p: 2 };

    fn mat(f: Field, rows: &[Vec<i64>]) -> Mat {
        Mat::from_rows(f, rows)
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Mat::zeros(F2, 3, 4).rank(), 0);
        assert_eq!(Mat::identity(F2, 5).rank(), 5);
        assert_eq!(mat(F2, &[vec![1, 1], vec![1, 1]]).rank(), 1);
        let f3 = Field::new(3).unwrap();
        assert_eq!(mat(f3, &[vec![1, 1], vec![1, 2]]).rank(), 2);
    }

    #[test]
    fn column_sum_examples() {
        let i = Mat::identity(F2, 3);
        assert_eq!(column_space_sum_dim(&[&i, &i]).unwrap(), 3);
        let e1 = mat(F2, &[vec![1], vec![0]]);
        let e2 = mat(F2, &[vec![0], vec![1]]);
        assert_eq!(column_space_sum_dim(&[&e1, &e2]).unwrap(), 2);
        let a = mat(F2, &[vec![1], vec![1]]);
        assert_eq!(column_space_sum_dim(&[&a, &e1]).unwrap(), 2);
        let bad = Mat::zeros(F2, 3, 1);
        assert!(column_space_sum_dim(&[&a, &bad]).is_err());
    }

    #[test]
    fn solve_examples() {
        let i = Mat::identity(F2, 3);
        assert_eq!(solve_in_span(&i, &[1, 0, 1]).unwrap(), vec![1, 0, 1]);
        let z = Mat::zeros(F2, 2, 2);
        assert_eq!(solve_in_span(&z, &[1, 0]), Err(LinalgError::NotInSpan));
        let b = mat(F2, &[vec![1], vec![1]]);
        assert_eq!(solve_in_span(&b, &[1, 1]).unwrap(), vec![1]);
    }

    #[test]
    fn field_checks() {
        assert!(Field::new(4).is_err());
        assert!(Field::new(65537).is_err());
        let f = Field::new(65521).unwrap();
        for a in [1u32, 2, 12345, 65520] {
            assert_eq!(f.mul(a, f.inv(a)), 1);
        }
        let a = FieldElem::new(3, 7);
        let b = FieldElem::new(-2, 7);
        assert_eq!((a + b).residue, 1);
        assert_eq!((a * a.inv().unwrap()).residue, 1);
        assert_eq!((-a).residue, 4);
        assert!(FieldElem::new(0, 7).inv().is_none());
    }

    #[test]
    fn reducer_expresses_vectors() {
        let f = Field::new(5).unwrap();
        let mut r = SparseReducer::new(f);
        let a = SparseVec::from_pairs(f, vec![(0, 1), (3, 2)]);
        let b = SparseVec::from_pairs(f, vec![(1, 4), (3, 1)]);
        assert!(r.add(&a, 0usize));
        assert!(r.add(&b, 1usize));
        let target = a.scale(f, 3).axpy(f, 2, &b);
        let (res, used) = r.reduce(&target);
        assert!(res.is_zero());
        // Rebuild the target from the reported coefficients of the stored columns.
        assert_eq!(used.len(), 2);
        let c = SparseVec::from_pairs(f, vec![(2, 1)]);
        let (res, _) = r.reduce_full(&c.axpy(f, 1, &a));
        assert_eq!(res, c);
    }

    #[test]
    fn sparse_kernel_matches_dense() {
        let f = Field::new(3).unwrap();
        let m = mat(f, &[vec![1, 2, 0, 1], vec![0, 1, 1, 1], vec![1, 0, 1, 0]]);
        let cols: Vec<(usize, SparseVec)> = (0..4)
            .map(|j| (j, SparseVec::from_pairs(f, m.col(j).into_iter().enumerate().collect())))
            .collect();
        let k = sparse_kernel(f, &cols);
        assert_eq!(k.len(), m.kernel().cols);
        for v in k {
            let vm = Mat::from_cols(f, 4, &[v.to_dense(4)]);
            assert!(m.compose(&vm).is_zero());
        }
    }

    fn arb_mat(p: u32) -> impl Strategy<Value = Mat> {
        (1usize..6, 1usize..6).prop_flat_map(move |(r, c)| {
            proptest::collection::vec(0..p, r * c).prop_map(move |data| Mat { rows: r, cols: c, field: Field { p }, data })
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in arb_mat(3)) {
            let k = m.kernel();
            prop_assert_eq!(m.rank() + k.cols, m.cols);
            prop_assert!(m.compose(&k).is_zero());
        }

        #[test]
        fn rank_invariant_under_permutation(m in arb_mat(2), seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut rp: Vec<usize> = (0..m.rows).collect();
            let mut cp: Vec<usize> = (0..m.cols).collect();
            rp.shuffle(&mut rng);
            cp.shuffle(&mut rng);
            let mut q = Mat::zeros(m.field, m.rows, m.cols);
            for i in 0..m.rows { for j in 0..m.cols { q.set(i, j, m.get(rp[i], cp[j])); } }
            prop_assert_eq!(q.rank(), m.rank());
            prop_assert_eq!(m.transpose().rank(), m.rank());
        }

        #[test]
        fn solve_reproduces_images(m in arb_mat(7), seed in proptest::collection::vec(0u32..7, 6)) {
            let x: Vec<u32> = seed.into_iter().take(m.cols).chain(std::iter::repeat(0)).take(m.cols).collect();
            let xm = Mat::from_cols(m.field, m.cols, &[x]);
            let t = m.compose(&xm).col(0);
            let c = solve_in_span(&m, &t).unwrap();
            let cm = Mat::from_cols(m.field, m.cols, &[c]);
            prop_assert_eq!(m.compose(&cm).col(0), t);
        }
    }
}
