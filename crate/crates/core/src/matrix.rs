//! Sparse matrices over a semiring, indexed by the dependent products of two
//! all-Finite typed finite sets.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::semiring::Semiring;
use crate::tfs::{decode, encode, tfs_sum, Interface, TypedFiniteSet};
use crate::wiring::{feedback_diagram, WiringDiagram};

pub const DEFAULT_CAP: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<R: Semiring> {
    rows: TypedFiniteSet,
    cols: TypedFiniteSet,
    nrows: usize,
    ncols: usize,
    entries: BTreeMap<(usize, usize), R>,
}

fn check_cap(size: u128, cap: u128) -> Result<()> {
    if size > cap {
        return Err(Error::SizeCapExceeded { size, cap });
    }
    Ok(())
}

impl<R: Semiring> Matrix<R> {
    pub fn zeros(rows: TypedFiniteSet, cols: TypedFiniteSet) -> Result<Self> {
        Self::zeros_capped(rows, cols, DEFAULT_CAP)
    }

    pub fn zeros_capped(rows: TypedFiniteSet, cols: TypedFiniteSet, cap: u128) -> Result<Self> {
        let nrows = rows.size()?;
        let ncols = cols.size()?;
        check_cap(nrows as u128 * ncols as u128, cap)?;
        Ok(Self { rows, cols, nrows, ncols, entries: BTreeMap::new() })
    }

    pub fn from_dense(rows: TypedFiniteSet, cols: TypedFiniteSet, data: Vec<Vec<R>>) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        if data.len() != m.nrows || data.iter().any(|r| r.len() != m.ncols) {
            return Err(Error::ShapeMismatch(format!(
                "dense data is not {}x{}",
                m.nrows, m.ncols
            )));
        }
        for (i, row) in data.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> &TypedFiniteSet {
        &self.rows
    }

    pub fn cols(&self) -> &TypedFiniteSet {
        &self.cols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Row space as box inputs, column space as box outputs.
    pub fn interface(&self) -> Interface {
        Interface::new(self.rows.clone(), self.cols.clone())
    }

    pub fn get(&self, i: usize, j: usize) -> R {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(R::zero)
    }

    /// Store `v`, dropping it if zero. Panics on out-of-range indices.
    pub fn set(&mut self, i: usize, j: usize, v: R) {
        assert!(i < self.nrows && j < self.ncols, "index ({i},{j}) out of range");
        if v.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: &R) -> Result<()> {
        if v.is_zero() {
            return Ok(());
        }
        let cur = self.get(i, j);
        self.set(i, j, cur.add(v)?);
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &R)> {
        self.entries.iter()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<R>> {
        let mut d = vec![vec![R::zero(); self.ncols]; self.nrows];
        for (&(i, j), v) in &self.entries {
            d[i][j] = v.clone();
        }
        d
    }

    /// Same entries on renamed but equally shaped index spaces.
    pub fn relabel(&self, rows: TypedFiniteSet, cols: TypedFiniteSet) -> Result<Self> {
        if !rows.same_shape(&self.rows) || !cols.same_shape(&self.cols) {
            return Err(Error::ShapeMismatch("relabel changes index types".into()));
        }
        Ok(Self { rows, cols, ..self.clone() })
    }

    pub fn map<S: Semiring, F: Fn(&R) -> S>(&self, f: F) -> Matrix<S> {
        let mut out = Matrix::<S> {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            nrows: self.nrows,
            ncols: self.ncols,
            entries: BTreeMap::new(),
        };
        for (&(i, j), v) in &self.entries {
            out.set(i, j, f(v));
        }
        out
    }

    /// True if no stored entry is zero and all indices are in range.
    pub fn is_normalized(&self) -> bool {
        self.entries.iter().all(|(&(i, j), v)| !v.is_zero() && i < self.nrows && j < self.ncols)
    }
}

/// Parallel composition: entry ((i1,i2),(j1,j2)) = M1[i1,j1]·M2[i2,j2].
pub fn kronecker<R: Semiring>(m1: &Matrix<R>, m2: &Matrix<R>) -> Result<Matrix<R>> {
    kronecker_capped(m1, m2, DEFAULT_CAP)
}

pub fn kronecker_capped<R: Semiring>(m1: &Matrix<R>, m2: &Matrix<R>, cap: u128) -> Result<Matrix<R>> {
    let rows = tfs_sum(&m1.rows, &m2.rows)?;
    let cols = tfs_sum(&m1.cols, &m2.cols)?;
    let size = (m1.nrows as u128 * m2.nrows as u128) * (m1.ncols as u128 * m2.ncols as u128);
    check_cap(size, cap)?;
    let mut out = Matrix::zeros_capped(rows, cols, cap)?;
    for (&(i1, j1), a) in &m1.entries {
        for (&(i2, j2), b) in &m2.entries {
            let v = a.mul(b)?;
            if !v.is_zero() {
                out.entries.insert((i1 * m2.nrows + i2, j1 * m2.ncols + j2), v);
            }
        }
    }
    Ok(out)
}

/// Wiring application: N[i,j] = Σ over inner outputs k with out_eval(k) = j of
/// M[in_eval(i,k), k]. Only columns with stored entries are visited.
pub fn apply<R: Semiring>(w: &WiringDiagram, m: &Matrix<R>) -> Result<Matrix<R>> {
    apply_capped(w, m, DEFAULT_CAP)
}

pub fn apply_capped<R: Semiring>(w: &WiringDiagram, m: &Matrix<R>, cap: u128) -> Result<Matrix<R>> {
    apply_with(w, m, cap, |_, v| v.clone())
}

/// Application with a hook that may rewrite each summand given its column k.
pub(crate) fn apply_with<R: Semiring, F: Fn(usize, &R) -> R>(
    w: &WiringDiagram,
    m: &Matrix<R>,
    cap: u128,
    summand: F,
) -> Result<Matrix<R>> {
    check_shape(w, &m.interface())?;
    let out_rows = w.outer().inputs.clone();
    let out_cols = w.outer().outputs.clone();
    let mut out = Matrix::zeros_capped(out_rows, out_cols, cap)?;
    let ev = w.flat_evaluator()?;
    let mut cols: Vec<usize> = m.entries.keys().map(|&(_, k)| k).collect();
    cols.sort_unstable();
    cols.dedup();
    let ydigits: Vec<Vec<usize>> = (0..ev.y_size).map(|y| ev.y_digits(y)).collect();
    for k in cols {
        let xd = ev.x_digits(k);
        let j = ev.out_eval_digits(&xd);
        for (i, yd) in ydigits.iter().enumerate() {
            let row = ev.in_eval_digits(yd, &xd);
            if let Some(v) = m.entries.get(&(row, k)) {
                out.add_at(i, j, &summand(k, v))?;
            }
        }
    }
    Ok(out)
}

pub(crate) fn check_shape(w: &WiringDiagram, x: &Interface) -> Result<()> {
    if !w.inner().same_shape(x) {
        return Err(Error::ShapeMismatch(format!(
            "matrix indexed by {} but diagram expects {}",
            x,
            w.inner()
        )));
    }
    if !w.inner().is_finite() || !w.outer().is_finite() {
        return Err(Error::WrongInterpretation("matrices need Finite ports".into()));
    }
    Ok(())
}

/// Ordinary semiring matrix product.
pub fn multiply<R: Semiring>(m1: &Matrix<R>, m2: &Matrix<R>) -> Result<Matrix<R>> {
    if !m1.cols.same_shape(&m2.rows) {
        return Err(Error::ShapeMismatch(format!(
            "columns {} vs rows {}",
            m1.cols, m2.rows
        )));
    }
    let mut by_row: BTreeMap<usize, Vec<(usize, &R)>> = BTreeMap::new();
    for (&(k, j), v) in &m2.entries {
        by_row.entry(k).or_default().push((j, v));
    }
    let mut out = Matrix::zeros(m1.rows.clone(), m2.cols.clone())?;
    for (&(i, k), a) in &m1.entries {
        if let Some(row) = by_row.get(&k) {
            for &(j, b) in row {
                out.add_at(i, j, &a.mul(b)?)?;
            }
        }
    }
    Ok(out)
}

/// Sum of diagonal K-blocks: for each `(row_port, col_port)` pair the two
/// coordinates are identified and summed out.
pub fn partial_trace<R: Semiring>(m: &Matrix<R>, pairs: &[(usize, usize)]) -> Result<Matrix<R>> {
    // builds the outer index spaces and checks types
    let fb = feedback_diagram(&m.interface(), pairs)?;
    let rrad = m.rows.radices();
    let crad = m.cols.radices();
    let keep_r: Vec<usize> = (0..m.rows.len()).filter(|r| !pairs.iter().any(|p| p.0 == *r)).collect();
    let keep_c: Vec<usize> = (0..m.cols.len()).filter(|c| !pairs.iter().any(|p| p.1 == *c)).collect();
    let out_rrad: Vec<usize> = keep_r.iter().map(|&r| rrad[r]).collect();
    let out_crad: Vec<usize> = keep_c.iter().map(|&c| crad[c]).collect();
    let mut out = Matrix::zeros(fb.outer().inputs.clone(), fb.outer().outputs.clone())?;
    for (&(i, j), v) in &m.entries {
        let rd = decode(&rrad, i);
        let cd = decode(&crad, j);
        if pairs.iter().all(|&(r, c)| rd[r] == cd[c]) {
            let ri: Vec<usize> = keep_r.iter().map(|&r| rd[r]).collect();
            let ci: Vec<usize> = keep_c.iter().map(|&c| cd[c]).collect();
            out.add_at(encode(&out_rrad, &ri), encode(&out_crad, &ci), v)?;
        }
    }
    Ok(out)
}

impl<R: Semiring> fmt::Display for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_dense() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}
