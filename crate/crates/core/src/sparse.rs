//! Sparse matrices over the supported coefficient rings.
//!
//! Storage is column-major: each column is a row-sorted list of
//! `(row, value)` pairs with no explicit zeros. All construction paths
//! canonicalize, so equality is structural.

use crate::error::{Error, Result};
use crate::ring::{Elem, Ring};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SparseMatrix {
    pub ring: Ring,
    pub rows: usize,
    pub cols: usize,
    col_data: Vec<Vec<(u32, Elem)>>,
}

impl SparseMatrix {
    pub fn zero(ring: Ring, rows: usize, cols: usize) -> Self {
        SparseMatrix {
            ring,
            rows,
            cols,
            col_data: vec![Vec::new(); cols],
        }
    }

    pub fn identity(ring: Ring, n: usize) -> Self {
        let mut m = Self::zero(ring, n, n);
        for j in 0..n {
            m.col_data[j].push((j as u32, ring.one()));
        }
        m
    }

    /// Build from `(row, col, value)` triples. Repeated positions are an error.
    pub fn from_triples(
        ring: Ring,
        rows: usize,
        cols: usize,
        triples: impl IntoIterator<Item = (usize, usize, Elem)>,
    ) -> Result<Self> {
        let mut m = Self::zero(ring, rows, cols);
        for (r, c, v) in triples {
            if r >= rows || c >= cols {
                return Err(Error::input(format!(
                    "entry ({r},{c}) outside {rows}x{cols} matrix"
                )));
            }
            if ring.is_zero(&v) {
                continue;
            }
            m.col_data[c].push((r as u32, v));
        }
        for col in &mut m.col_data {
            col.sort_by_key(|(r, _)| *r);
            for w in col.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::input(format!(
                        "duplicate entry at row {} of some column",
                        w[0].0
                    )));
                }
            }
        }
        Ok(m)
    }

    /// Accumulating builder: repeated positions are summed.
    pub fn from_triples_accum(
        ring: Ring,
        rows: usize,
        cols: usize,
        triples: impl IntoIterator<Item = (usize, usize, Elem)>,
    ) -> Self {
        let mut per_col: Vec<Vec<(u32, Elem)>> = vec![Vec::new(); cols];
        for (r, c, v) in triples {
            debug_assert!(r < rows && c < cols);
            per_col[c].push((r as u32, v));
        }
        let col_data = per_col
            .into_iter()
            .map(|mut col| {
                col.sort_by_key(|(r, _)| *r);
                let mut out: Vec<(u32, Elem)> = Vec::with_capacity(col.len());
                for (r, v) in col {
                    match out.last_mut() {
                        Some((lr, lv)) if *lr == r => *lv = ring.add(lv, &v),
                        _ => out.push((r, v)),
                    }
                }
                out.retain(|(_, v)| !ring.is_zero(v));
                out
            })
            .collect();
        SparseMatrix {
            ring,
            rows,
            cols,
            col_data,
        }
    }

    pub fn col(&self, j: usize) -> &[(u32, Elem)] {
        &self.col_data[j]
    }

    pub fn set_col(&mut self, j: usize, col: Vec<(u32, Elem)>) {
        debug_assert!(col.windows(2).all(|w| w[0].0 < w[1].0));
        self.col_data[j] = col;
    }

    pub fn get(&self, r: usize, c: usize) -> Elem {
        match self.col_data[c].binary_search_by_key(&(r as u32), |(row, _)| *row) {
            Ok(i) => self.col_data[c][i].1.clone(),
            Err(_) => self.ring.zero(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.col_data.iter().map(|c| c.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.col_data.iter().all(|c| c.is_empty())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Elem)> + '_ {
        self.col_data
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |(r, v)| (*r as usize, j, v)))
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = SparseMatrix::zero(self.ring, self.cols, self.rows);
        for (r, c, v) in self.entries() {
            t.col_data[r].push((c as u32, v.clone()));
        }
        for col in &mut t.col_data {
            col.sort_by_key(|(r, _)| *r);
        }
        t
    }

    pub fn scale(&self, s: &Elem) -> SparseMatrix {
        let ring = self.ring;
        let col_data = self
            .col_data
            .iter()
            .map(|col| {
                col.iter()
                    .map(|(r, v)| (*r, ring.mul(v, s)))
                    .filter(|(_, v)| !ring.is_zero(v))
                    .collect()
            })
            .collect();
        SparseMatrix {
            ring,
            rows: self.rows,
            cols: self.cols,
            col_data,
        }
    }

    pub fn neg(&self) -> SparseMatrix {
        self.scale(&self.ring.from_i64(-1))
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let ring = self.ring;
        let col_data = (0..self.cols)
            .map(|j| add_cols(&ring, &self.col_data[j], &other.col_data[j], false))
            .collect();
        SparseMatrix {
            ring,
            rows: self.rows,
            cols: self.cols,
            col_data,
        }
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let ring = self.ring;
        let col_data = (0..self.cols)
            .map(|j| add_cols(&ring, &self.col_data[j], &other.col_data[j], true))
            .collect();
        SparseMatrix {
            ring,
            rows: self.rows,
            cols: self.cols,
            col_data,
        }
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let ring = self.ring;
        let col_data: Vec<Vec<(u32, Elem)>> = other
            .col_data
            .iter()
            .map(|col| {
                let mut acc: Vec<(u32, Elem)> = Vec::new();
                for (k, v) in col {
                    for (r, w) in &self.col_data[*k as usize] {
                        acc.push((*r, ring.mul(w, v)));
                    }
                }
                combine(&ring, acc)
            })
            .collect();
        SparseMatrix {
            ring,
            rows: self.rows,
            cols: other.cols,
            col_data,
        }
    }

    /// Apply to a sparse column vector.
    pub fn mul_vec(&self, v: &[(u32, Elem)]) -> Vec<(u32, Elem)> {
        let ring = self.ring;
        let mut acc: Vec<(u32, Elem)> = Vec::new();
        for (k, x) in v {
            for (r, w) in &self.col_data[*k as usize] {
                acc.push((*r, ring.mul(w, x)));
            }
        }
        combine(&ring, acc)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.rows, other.rows);
        let mut col_data = self.col_data.clone();
        col_data.extend(other.col_data.iter().cloned());
        SparseMatrix {
            ring: self.ring,
            rows: self.rows,
            cols: self.cols + other.cols,
            col_data,
        }
    }

    /// Keep the given columns, in the given order.
    pub fn select_cols(&self, idx: &[usize]) -> SparseMatrix {
        let col_data = idx.iter().map(|&j| self.col_data[j].clone()).collect();
        SparseMatrix {
            ring: self.ring,
            rows: self.rows,
            cols: idx.len(),
            col_data,
        }
    }

    /// Keep the given rows, renumbering them `0..idx.len()`.
    pub fn select_rows(&self, idx: &[usize]) -> SparseMatrix {
        let mut map = vec![u32::MAX; self.rows];
        for (new, &old) in idx.iter().enumerate() {
            map[old] = new as u32;
        }
        let col_data = self
            .col_data
            .iter()
            .map(|col| {
                let mut out: Vec<(u32, Elem)> = col
                    .iter()
                    .filter(|(r, _)| map[*r as usize] != u32::MAX)
                    .map(|(r, v)| (map[*r as usize], v.clone()))
                    .collect();
                out.sort_by_key(|(r, _)| *r);
                out
            })
            .collect();
        SparseMatrix {
            ring: self.ring,
            rows: idx.len(),
            cols: self.cols,
            col_data,
        }
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut out = SparseMatrix::zero(self.ring, self.rows + other.rows, self.cols + other.cols);
        for j in 0..self.cols {
            out.col_data[j] = self.col_data[j].clone();
        }
        for j in 0..other.cols {
            out.col_data[self.cols + j] = other.col_data[j]
                .iter()
                .map(|(r, v)| (*r + self.rows as u32, v.clone()))
                .collect();
        }
        out
    }

    /// Convert entries into another ring by reducing integer representatives.
    /// Only integral source entries are supported.
    pub fn map_ring(&self, target: Ring) -> Result<SparseMatrix> {
        let col_data: Result<Vec<Vec<(u32, Elem)>>> = self
            .col_data
            .iter()
            .map(|col| {
                col.iter()
                    .map(|(r, v)| {
                        let big = match v {
                            Elem::F(x) => num_bigint::BigInt::from(*x),
                            Elem::Z(x) => x.clone(),
                            Elem::Q(x) => {
                                if num_traits::One::is_one(x.denom()) {
                                    x.numer().clone()
                                } else {
                                    return Err(Error::input(
                                        "cannot reduce a non-integral rational",
                                    ));
                                }
                            }
                        };
                        Ok((*r, target.from_bigint(&big)))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(|mut col| {
                        col.retain(|(_, v)| !target.is_zero(v));
                        col
                    })
            })
            .collect();
        Ok(SparseMatrix {
            ring: target,
            rows: self.rows,
            cols: self.cols,
            col_data: col_data?,
        })
    }
}

fn add_cols(
    ring: &Ring,
    a: &[(u32, Elem)],
    b: &[(u32, Elem)],
    negate_b: bool,
) -> Vec<(u32, Elem)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let bv = |v: &Elem| if negate_b { ring.neg(v) } else { v.clone() };
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, bv(&b[j].1)));
            j += 1;
        } else {
            let s = ring.add(&a[i].1, &bv(&b[j].1));
            if !ring.is_zero(&s) {
                out.push((a[i].0, s));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Sort by row, merge duplicates, drop zeros.
pub fn combine(ring: &Ring, mut acc: Vec<(u32, Elem)>) -> Vec<(u32, Elem)> {
    acc.sort_by_key(|(r, _)| *r);
    let mut out: Vec<(u32, Elem)> = Vec::with_capacity(acc.len());
    for (r, v) in acc {
        match out.last_mut() {
            Some((lr, lv)) if *lr == r => *lv = ring.add(lv, &v),
            _ => out.push((r, v)),
        }
    }
    out.retain(|(_, v)| !ring.is_zero(v));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(ring: Ring, rows: usize, cols: usize, vals: &[(usize, usize, i64)]) -> SparseMatrix {
        SparseMatrix::from_triples(
            ring,
            rows,
            cols,
            vals.iter().map(|&(r, c, v)| (r, c, ring.from_i64(v))),
        )
        .unwrap()
    }

    #[test]
    fn mul_identity() {
        let r = Ring::PrimeField(5);
        let a = m(r, 2, 3, &[(0, 0, 1), (1, 2, 4), (0, 1, 2)]);
        let i2 = SparseMatrix::identity(r, 2);
        let i3 = SparseMatrix::identity(r, 3);
        assert_eq!(i2.mul(&a), a);
        assert_eq!(a.mul(&i3), a);
    }

    #[test]
    fn add_cancel() {
        let r = Ring::Integers;
        let a = m(r, 2, 2, &[(0, 0, 3), (1, 1, -2)]);
        let b = a.neg();
        assert!(a.add(&b).is_zero());
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn transpose_involution() {
        let r = Ring::Rationals;
        let a = m(r, 3, 2, &[(0, 0, 1), (2, 1, 7), (1, 0, -4)]);
        assert_eq!(a.transpose().transpose(), a);
    }
}
