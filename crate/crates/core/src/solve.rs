//! Exact Gaussian elimination over field coefficients.
//!
//! The eliminator is left-looking and sparse. Pivot choice is
//! deterministic: columns are processed left to right and the pivot of a
//! reduced column is its smallest remaining row index, so repeated runs
//! (and runs with different thread counts) produce identical bases.

use crate::error::{Error, Result};
use crate::ring::{Elem, Ring};
use crate::sparse::{combine, SparseMatrix};

/// Result of echelonizing a matrix over a field.
pub struct Echelon {
    pub ring: Ring,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    /// `(pivot_row, source_column)` in elimination order.
    pub pivots: Vec<(u32, usize)>,
    /// Reduced nonzero columns, unit pivot entries; a basis of the image.
    pub image: Vec<Vec<(u32, Elem)>>,
    /// For each image basis vector, its expression in source columns.
    pub image_expr: Vec<Vec<(u32, Elem)>>,
    /// Kernel basis; vector `v` satisfies `M v = 0`, coefficient 1 on its
    /// trailing source column.
    pub kernel: Vec<Vec<(u32, Elem)>>,
}

struct Eliminator<'a> {
    ring: Ring,
    /// stored reduced columns with unit pivot
    stored: Vec<Vec<(u32, Elem)>>,
    /// expression of stored columns in source columns (when tracking)
    exprs: Vec<Vec<(u32, Elem)>>,
    /// row -> index into `stored`, or usize::MAX
    pivot_of_row: Vec<usize>,
    pivots: Vec<(u32, usize)>,
    track: bool,
    source: &'a SparseMatrix,
}

impl<'a> Eliminator<'a> {
    fn new(m: &'a SparseMatrix, track: bool) -> Result<Self> {
        if !m.ring.is_field() {
            return Err(Error::UnsupportedRing(format!(
                "elimination needs a field, got {}",
                m.ring
            )));
        }
        Ok(Eliminator {
            ring: m.ring,
            stored: Vec::new(),
            exprs: Vec::new(),
            pivot_of_row: vec![usize::MAX; m.rows],
            pivots: Vec::new(),
            track,
            source: m,
        })
    }

    /// Reduce `v` against all stored columns; `expr` accumulates the
    /// combination of source columns used (when tracking).
    fn reduce(&self, v: &mut Vec<(u32, Elem)>, expr: &mut Vec<(u32, Elem)>) {
        loop {
            // earliest-created pivot hit in v
            let mut hit: Option<(usize, Elem)> = None;
            for (r, x) in v.iter() {
                let k = self.pivot_of_row[*r as usize];
                if k != usize::MAX {
                    match &hit {
                        Some((bk, _)) if *bk <= k => {}
                        _ => hit = Some((k, x.clone())),
                    }
                }
            }
            let Some((k, coeff)) = hit else { break };
            let scaled: Vec<(u32, Elem)> = self.stored[k]
                .iter()
                .map(|(r, w)| (*r, self.ring.neg(&self.ring.mul(w, &coeff))))
                .collect();
            *v = merge(&self.ring, v, &scaled);
            if self.track {
                let scaled_e: Vec<(u32, Elem)> = self.exprs[k]
                    .iter()
                    .map(|(r, w)| (*r, self.ring.neg(&self.ring.mul(w, &coeff))))
                    .collect();
                *expr = merge(&self.ring, expr, &scaled_e);
            }
        }
    }

    /// Feed one column; returns the kernel vector when it reduces to zero.
    fn feed(&mut self, j: usize) -> Option<Vec<(u32, Elem)>> {
        let mut v = self.source.col(j).to_vec();
        let mut expr = if self.track {
            vec![(j as u32, self.ring.one())]
        } else {
            Vec::new()
        };
        self.reduce(&mut v, &mut expr);
        if v.is_empty() {
            return Some(expr);
        }
        // lexicographic pivot: smallest remaining row
        let (prow, pval) = v[0].clone();
        let inv = self.ring.inv(&pval).expect("field element invertible");
        let vnorm: Vec<(u32, Elem)> = v.iter().map(|(r, x)| (*r, self.ring.mul(x, &inv))).collect();
        let enorm: Vec<(u32, Elem)> = expr
            .iter()
            .map(|(r, x)| (*r, self.ring.mul(x, &inv)))
            .collect();
        self.pivot_of_row[prow as usize] = self.stored.len();
        self.pivots.push((prow, j));
        self.stored.push(vnorm);
        self.exprs.push(enorm);
        None
    }

    /// Back-substitute so each stored column vanishes at the other pivot rows.
    fn back_reduce(&mut self) {
        for k in (0..self.stored.len()).rev() {
            let mut v = std::mem::take(&mut self.stored[k]);
            let mut e = std::mem::take(&mut self.exprs[k]);
            let own = self.pivots[k].0;
            loop {
                let mut hit: Option<(usize, Elem)> = None;
                for (r, x) in v.iter() {
                    if *r == own {
                        continue;
                    }
                    let kk = self.pivot_of_row[*r as usize];
                    if kk != usize::MAX && kk != k {
                        hit = Some((kk, x.clone()));
                        break;
                    }
                }
                let Some((kk, coeff)) = hit else { break };
                let scaled: Vec<(u32, Elem)> = self.stored[kk]
                    .iter()
                    .map(|(r, w)| (*r, self.ring.neg(&self.ring.mul(w, &coeff))))
                    .collect();
                v = merge(&self.ring, &v, &scaled);
                if self.track {
                    let scaled_e: Vec<(u32, Elem)> = self.exprs[kk]
                        .iter()
                        .map(|(r, w)| (*r, self.ring.neg(&self.ring.mul(w, &coeff))))
                        .collect();
                    e = merge(&self.ring, &e, &scaled_e);
                }
            }
            self.stored[k] = v;
            self.exprs[k] = e;
        }
    }
}

fn merge(ring: &Ring, a: &[(u32, Elem)], b: &[(u32, Elem)]) -> Vec<(u32, Elem)> {
    let mut acc = Vec::with_capacity(a.len() + b.len());
    acc.extend_from_slice(a);
    acc.extend_from_slice(b);
    combine(ring, acc)
}

/// Rank of a matrix over a field.
pub fn rank(m: &SparseMatrix) -> Result<usize> {
    let mut el = Eliminator::new(m, false)?;
    for j in 0..m.cols {
        el.feed(j);
    }
    Ok(el.pivots.len())
}

/// Full echelon data: rank with deterministic kernel and image bases.
pub fn rank_kernel_image(m: &SparseMatrix) -> Result<Echelon> {
    let mut el = Eliminator::new(m, true)?;
    let mut kernel = Vec::new();
    for j in 0..m.cols {
        if let Some(kv) = el.feed(j) {
            kernel.push(kv);
        }
    }
    el.back_reduce();
    Ok(Echelon {
        ring: m.ring,
        rows: m.rows,
        cols: m.cols,
        rank: el.pivots.len(),
        pivots: el.pivots,
        image: el.stored,
        image_expr: el.exprs,
        kernel,
    })
}

/// Solve `M X = B` column by column; `None` where inconsistent.
pub fn solve_cols(m: &SparseMatrix, b: &SparseMatrix) -> Result<Vec<Option<Vec<(u32, Elem)>>>> {
    assert_eq!(m.rows, b.rows, "solve dimension mismatch");
    let mut el = Eliminator::new(m, true)?;
    for j in 0..m.cols {
        el.feed(j);
    }
    let ring = m.ring;
    let mut out = Vec::with_capacity(b.cols);
    for j in 0..b.cols {
        let mut v = b.col(j).to_vec();
        let mut coeffs: Vec<(u32, Elem)> = Vec::new();
        loop {
            let mut hit: Option<(usize, Elem)> = None;
            for (r, x) in v.iter() {
                let k = el.pivot_of_row[*r as usize];
                if k != usize::MAX {
                    match &hit {
                        Some((bk, _)) if *bk <= k => {}
                        _ => hit = Some((k, x.clone())),
                    }
                }
            }
            let Some((k, coeff)) = hit else { break };
            let scaled: Vec<(u32, Elem)> = el.stored[k]
                .iter()
                .map(|(r, w)| (*r, ring.neg(&ring.mul(w, &coeff))))
                .collect();
            v = merge(&ring, &v, &scaled);
            let scaled_e: Vec<(u32, Elem)> = el.exprs[k]
                .iter()
                .map(|(r, w)| (*r, ring.mul(w, &coeff)))
                .collect();
            coeffs = merge(&ring, &coeffs, &scaled_e);
        }
        out.push(if v.is_empty() { Some(coeffs) } else { None });
    }
    Ok(out)
}

/// Does the column space of `sub` lie inside the column space of `ambient`?
pub fn subspace_contained(sub: &SparseMatrix, ambient: &SparseMatrix) -> Result<bool> {
    Ok(solve_cols(ambient, sub)?.iter().all(|s| s.is_some()))
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
    fn identity_full_rank() {
        let r = Ring::PrimeField(5);
        let id = SparseMatrix::identity(r, 2);
        let e = rank_kernel_image(&id).unwrap();
        assert_eq!(e.rank, 2);
        assert!(e.kernel.is_empty());
    }

    #[test]
    fn zero_matrix() {
        let r = Ring::Rationals;
        let z = SparseMatrix::zero(r, 3, 4);
        let e = rank_kernel_image(&z).unwrap();
        assert_eq!(e.rank, 0);
        assert_eq!(e.kernel.len(), 4);
    }

    #[test]
    fn rank_one_hand_oracle() {
        // [[1,2],[2,4]] over F_7 has rank 1 by hand row reduction
        let r = Ring::PrimeField(7);
        let a = m(r, 2, 2, &[(0, 0, 1), (0, 1, 2), (1, 0, 2), (1, 1, 4)]);
        let e = rank_kernel_image(&a).unwrap();
        assert_eq!(e.rank, 1);
        assert_eq!(e.kernel.len(), 1);
        // kernel vector (-2, 1) up to scale; M v = 0
        let v = &e.kernel[0];
        let prod = a.mul_vec(v);
        assert!(prod.is_empty());
    }

    #[test]
    fn rank_nullity_random_shapes() {
        let r = Ring::PrimeField(3);
        let a = m(
            r,
            3,
            5,
            &[
                (0, 0, 1),
                (1, 0, 2),
                (0, 1, 1),
                (2, 2, 1),
                (1, 3, 1),
                (2, 3, 2),
                (0, 4, 1),
                (1, 4, 2),
                (2, 4, 1),
            ],
        );
        let e = rank_kernel_image(&a).unwrap();
        assert_eq!(e.rank + e.kernel.len(), a.cols);
        for v in &e.kernel {
            assert!(a.mul_vec(v).is_empty());
        }
    }

    #[test]
    fn non_field_rejected() {
        let a = SparseMatrix::identity(Ring::Integers, 2);
        assert!(rank(&a).is_err());
    }

    #[test]
    fn solve_consistent_and_not() {
        let r = Ring::Rationals;
        let a = m(r, 2, 2, &[(0, 0, 1), (1, 0, 2)]); // column (1,2), second col zero
        let b = m(r, 2, 2, &[(0, 0, 3), (1, 0, 6), (0, 1, 1)]);
        let sols = solve_cols(&a, &b).unwrap();
        let s0 = sols[0].as_ref().unwrap();
        assert_eq!(a.mul_vec(s0), b.col(0).to_vec());
        assert!(sols[1].is_none());
    }
}
