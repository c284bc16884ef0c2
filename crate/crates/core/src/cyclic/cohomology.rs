//! Hochschild cohomology via the normalized bar cochain complex
//! `C^q = Hom(Abar^{(x)q}, A)`.

use std::collections::BTreeMap;

use crate::algebra::Algebra;
use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::ring::Elem;
use crate::sparse::SparseMatrix;

use super::chains::Chains;
use super::HomologyTable;

/// Basis of `C^q`: pairs (argument tuple in reduced indices, output basis
/// index); index = tuple_code * dim + output.
struct Cochains<'a> {
    ch: Chains<'a>,
    dim: usize,
    red: usize,
}

impl<'a> Cochains<'a> {
    fn space_dim(&self, q: usize) -> usize {
        self.red.pow(q as u32) * self.dim
    }

    fn decode_args(&self, q: usize, mut code: usize) -> Vec<u32> {
        let mut t = vec![0u32; q];
        for i in (0..q).rev() {
            t[i] = (code % self.red) as u32;
            code /= self.red;
        }
        t
    }

    fn encode(&self, args: &[u32], out: usize) -> usize {
        let mut x = 0usize;
        for a in args {
            x = x * self.red + *a as usize;
        }
        x * self.dim + out
    }
}

/// The cochain complex, stored as a `ChainComplex` in degrees `-q`.
pub fn cochain_complex(alg: &Algebra, n_max: usize) -> Result<ChainComplex> {
    if alg.weight_truncated_at.is_some() {
        return Err(Error::UnsupportedRing(
            "Hochschild cohomology needs a finite-dimensional algebra".into(),
        ));
    }
    if alg.dg {
        return Err(Error::UnsupportedRing(
            "Hochschild cohomology is implemented for ordinary algebras".into(),
        ));
    }
    let ring = alg.ring;
    let ch = Chains::new(alg, true)?;
    let red = ch.red_dim();
    let co = Cochains {
        ch,
        dim: alg.dim,
        red,
    };
    let mut dims = BTreeMap::new();
    for q in 0..=n_max {
        crate::algebra::check_cell("cochain cells", co.space_dim(q))?;
        dims.insert(-(q as i64), co.space_dim(q));
    }
    let mut diffs = BTreeMap::new();
    for q in 0..n_max {
        let rows = co.space_dim(q + 1);
        let cols = co.space_dim(q);
        let mut triples: Vec<(usize, usize, Elem)> = Vec::new();
        let s_count = red.pow((q + 1) as u32);
        for s_code in 0..s_count {
            let s = co.decode_args(q + 1, s_code);
            let s_full: Vec<usize> = s.iter().map(|r| co.ch.full_index_of_reduced(*r)).collect();
            // (delta f)(a_1..a_{q+1}) = a_1 f(a_2..)
            //   + sum_i (-1)^i f(.. a_i a_{i+1} ..) + (-1)^{q+1} f(a_1..a_q) a_{q+1}
            for k in 0..co.dim {
                for (l, v) in alg.mul_basis(s_full[0], k) {
                    triples.push((co.encode(&s, *l as usize), co.encode(&s[1..], k), v.clone()));
                }
            }
            for i in 0..q {
                let prod = alg.mul_basis(s_full[i], s_full[i + 1]);
                let projected = co.ch.project_public(prod);
                let neg = i % 2 == 0; // sign (-1)^{i+1}, i here 0-based
                for (rr, c) in projected {
                    let mut t_args: Vec<u32> = Vec::with_capacity(q);
                    t_args.extend_from_slice(&s[..i]);
                    t_args.push(rr);
                    t_args.extend_from_slice(&s[i + 2..]);
                    let vv = if neg { ring.neg(&c) } else { c.clone() };
                    for k in 0..co.dim {
                        triples.push((co.encode(&s, k), co.encode(&t_args, k), vv.clone()));
                    }
                }
            }
            {
                let neg = (q + 1) % 2 == 1;
                for k in 0..co.dim {
                    for (l, v) in alg.mul_basis(k, s_full[q]) {
                        let vv = if neg { ring.neg(v) } else { v.clone() };
                        triples.push((co.encode(&s, *l as usize), co.encode(&s[..q], k), vv));
                    }
                }
            }
        }
        diffs.insert(
            -(q as i64),
            SparseMatrix::from_triples_accum(ring, rows, cols, triples),
        );
    }
    ChainComplex::new(ring, -(n_max as i64), 0, dims, diffs, false, true)
}

/// Hochschild cohomology table `HH^q` for `q <= n_max`.
pub fn hochschild_cohomology(alg: &Algebra, n_max: usize) -> Result<HomologyTable> {
    let c = cochain_complex(alg, n_max + 1)?;
    let mut table = HomologyTable::new("HH^");
    let h = c.homology_all()?;
    for (n, (m, _)) in h {
        let q = -n;
        if !(0..=n_max as i64).contains(&q) {
            continue;
        }
        table.push(q, None, m, true);
    }
    Ok(table)
}
