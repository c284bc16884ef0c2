//! The literal cyclic bicomplex: unnormalized chains `A^{(x)(q+1)}` in
//! rows, columns alternating the differentials `b` and `-b'`, horizontal
//! maps alternating `1 - tau` and the norm `N = 1 + tau + ... + tau^q`.
//!
//! Columns are indexed so that the Hochschild column is `c = 0` and `c`
//! grows to the left; the periodic variant also extends to negative `c`
//! (to the right). The total degree of a cell in column `c`, row `q` is
//! `c + q`, and the periodicity map is the two-column shift.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::Algebra;
use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::ring::Elem;
use crate::sparse::SparseMatrix;

use super::chains::{self, CellSpace, Chains};
use super::Variant;

pub struct CyclicBicomplex<'a> {
    pub alg: &'a Algebra,
    pub variant: Variant,
    /// row bound: rows `q = 0 ..= n_max`
    pub n_max: usize,
    /// column bound: `CC` uses `0..=c_max`, `CC^-` uses `-c_max..=0`,
    /// `CP` uses `-c_max..=c_max`
    pub c_max: usize,
    ch: Chains<'a>,
    spaces: Vec<CellSpace>,
    pub b: Vec<SparseMatrix>,
    pub bprime: Vec<SparseMatrix>,
    pub tau: Vec<SparseMatrix>,
    pub norm: Vec<SparseMatrix>,
    /// internal DG differential per row; `None` for ordinary algebras
    pub delta: Vec<Option<SparseMatrix>>,
}

/// Outcome of the structural identity checks.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub b_squared: bool,
    pub bprime_squared: bool,
    pub one_minus_tau_intertwines: bool,
    pub norm_intertwines: bool,
    pub tau_order: bool,
    pub squares_anticommute: bool,
}

impl IdentityReport {
    pub fn all_hold(&self) -> bool {
        self.b_squared
            && self.bprime_squared
            && self.one_minus_tau_intertwines
            && self.norm_intertwines
            && self.tau_order
            && self.squares_anticommute
    }
}

impl<'a> CyclicBicomplex<'a> {
    pub fn build(
        alg: &'a Algebra,
        variant: Variant,
        n_max: usize,
        c_max: usize,
        weight: Option<i64>,
    ) -> Result<Self> {
        let ch = Chains::new(alg, false)?;
        if alg.is_graded() && !alg.dg && weight.is_none() {
            return Err(Error::validation(
                "graded algebras are processed per internal degree; pass a weight",
            ));
        }
        let mut spaces = Vec::with_capacity(n_max + 1);
        for q in 0..=n_max {
            let sp = match weight {
                Some(w) => CellSpace::listed(&ch, q, w),
                None => {
                    ch.check_cells("cyclic bicomplex cells", q)?;
                    CellSpace::coded(&ch, q)
                }
            };
            spaces.push(sp);
        }
        let mut b = Vec::new();
        let mut bprime = Vec::new();
        let mut tau = Vec::new();
        let mut norm = Vec::new();
        let mut delta = Vec::new();
        for q in 0..=n_max {
            let (bq, bpq) = if q == 0 {
                let z = SparseMatrix::zero(ch.ring(), 0, spaces[0].dim());
                (z.clone(), z)
            } else {
                (
                    chains::operator_matrix(&ch, &spaces[q], &spaces[q - 1], |t, out| {
                        ch.b_op(t, out)
                    }),
                    chains::operator_matrix(&ch, &spaces[q], &spaces[q - 1], |t, out| {
                        ch.bprime_op(t, out)
                    }),
                )
            };
            b.push(bq);
            bprime.push(bpq);
            let tq = chains::operator_matrix(&ch, &spaces[q], &spaces[q], |t, out| {
                ch.tau_op(t, out)
            });
            // N = 1 + tau + ... + tau^q
            let mut acc = SparseMatrix::identity(ch.ring(), spaces[q].dim());
            let mut pow = SparseMatrix::identity(ch.ring(), spaces[q].dim());
            for _ in 0..q {
                pow = tq.mul(&pow);
                acc = acc.add(&pow);
            }
            tau.push(tq);
            norm.push(acc);
            delta.push(if alg.dg {
                Some(chains::operator_matrix(
                    &ch,
                    &spaces[q],
                    &spaces[q],
                    |t, out| ch.delta_op(t, out),
                ))
            } else {
                None
            });
        }
        let bc = CyclicBicomplex {
            alg,
            variant,
            n_max,
            c_max,
            ch,
            spaces,
            b,
            bprime,
            tau,
            norm,
            delta,
        };
        let report = bc.identity_report();
        if !report.all_hold() {
            return Err(Error::invariant(format!(
                "cyclic bicomplex identities failed: {report:?}"
            )));
        }
        Ok(bc)
    }

    pub fn row_dim(&self, q: usize) -> usize {
        self.spaces[q].dim()
    }

    /// Exhaustive check of the structural identities on the window.
    pub fn identity_report(&self) -> IdentityReport {
        let mut b2 = true;
        let mut bp2 = true;
        let mut inter1 = true;
        let mut inter2 = true;
        let mut tord = true;
        for q in 1..=self.n_max {
            if q >= 2 {
                b2 &= self.b[q - 1].mul(&self.b[q]).is_zero();
                bp2 &= self.bprime[q - 1].mul(&self.bprime[q]).is_zero();
            }
            // (1 - tau) b' = b (1 - tau)
            let id_t = SparseMatrix::identity(self.ch.ring(), self.spaces[q - 1].dim());
            let id_s = SparseMatrix::identity(self.ch.ring(), self.spaces[q].dim());
            let lhs = id_t.sub(&self.tau[q - 1]).mul(&self.bprime[q]);
            let rhs = self.b[q].mul(&id_s.sub(&self.tau[q]));
            inter1 &= lhs == rhs;
            // b' N = N b
            let lhs2 = self.bprime[q].mul(&self.norm[q]);
            let rhs2 = self.norm[q - 1].mul(&self.b[q]);
            inter2 &= lhs2 == rhs2;
        }
        for q in 0..=self.n_max {
            let mut pow = SparseMatrix::identity(self.ch.ring(), self.spaces[q].dim());
            for _ in 0..=q {
                pow = self.tau[q].mul(&pow);
            }
            tord &= pow == SparseMatrix::identity(self.ch.ring(), self.spaces[q].dim());
        }
        // anticommutation of one representative square per parity
        let mut anti = true;
        for q in 1..=self.n_max {
            // square between an odd column (vertical -b') and the even
            // column to its right (vertical b), horizontal 1 - tau
            let id_s = SparseMatrix::identity(self.ch.ring(), self.spaces[q].dim());
            let h = id_s.sub(&self.tau[q]);
            let id_t = SparseMatrix::identity(self.ch.ring(), self.spaces[q - 1].dim());
            let h_t = id_t.sub(&self.tau[q - 1]);
            let down_then_right = h_t.mul(&self.bprime[q].neg());
            let right_then_down = self.b[q].mul(&h);
            anti &= down_then_right.add(&right_then_down).is_zero();
            // square with horizontal N between even (b) and odd (-b')
            let down_right = self.norm[q - 1].mul(&self.b[q]);
            let right_down = self.bprime[q].neg().mul(&self.norm[q]);
            anti &= down_right.add(&right_down).is_zero();
        }
        IdentityReport {
            b_squared: b2,
            bprime_squared: bp2,
            one_minus_tau_intertwines: inter1,
            norm_intertwines: inter2,
            tau_order: tord,
            squares_anticommute: anti,
        }
    }

    fn columns(&self) -> Vec<i64> {
        let c = self.c_max as i64;
        match self.variant {
            Variant::Cyclic => (0..=c).collect(),
            Variant::Periodic => (-c..=c).collect(),
            Variant::Negative => (-c..=0).collect(),
        }
    }

    /// Totalize on the window; cell degree is `column + row`. DG input is
    /// rejected here (the normalized engine handles DG homology).
    pub fn totalize(&self) -> Result<ChainComplex> {
        if self.alg.dg {
            return Err(Error::UnsupportedRing(
                "unnormalized totalization is not provided for DG algebras".into(),
            ));
        }
        let ring = self.ch.ring();
        let cols = self.columns();
        // layout per degree: (c, q, offset)
        let mut layout: BTreeMap<i64, Vec<(i64, usize, usize)>> = BTreeMap::new();
        let mut dims: BTreeMap<i64, usize> = BTreeMap::new();
        for &c in &cols {
            for q in 0..=self.n_max {
                let n = c + q as i64;
                let e = layout.entry(n).or_default();
                let off = dims.entry(n).or_insert(0);
                e.push((c, q, *off));
                *off += self.spaces[q].dim();
            }
        }
        for v in layout.values_mut() {
            v.sort_by_key(|(c, q, _)| (*c, *q));
        }
        let find = |n: i64, c: i64, q: usize| -> Option<usize> {
            layout
                .get(&n)?
                .iter()
                .find(|(cc, qq, _)| *cc == c && *qq == q)
                .map(|(_, _, off)| *off)
        };
        let lo = *dims.keys().next().unwrap_or(&0);
        let hi = *dims.keys().last().unwrap_or(&0);
        let mut diffs = BTreeMap::new();
        for (n, pieces) in &layout {
            let tgt = dims.get(&(n - 1)).copied().unwrap_or(0);
            if tgt == 0 {
                continue;
            }
            let mut triples: Vec<(usize, usize, Elem)> = Vec::new();
            for (c, q, off) in pieces {
                // vertical: even column b, odd column -b'
                if *q >= 1 {
                    if let Some(toff) = find(n - 1, *c, q - 1) {
                        let even = c.rem_euclid(2) == 0;
                        let m = if even { &self.b[*q] } else { &self.bprime[*q] };
                        for (r, col, v) in m.entries() {
                            let vv = if even { v.clone() } else { ring.neg(v) };
                            triples.push((toff + r, off + col, vv));
                        }
                    }
                }
                // horizontal into column c-1: odd c: 1 - tau; even c: N
                if cols.contains(&(c - 1)) {
                    if let Some(toff) = find(n - 1, c - 1, *q) {
                        let odd = c.rem_euclid(2) == 1;
                        if odd {
                            let id = SparseMatrix::identity(ring, self.spaces[*q].dim());
                            let h = id.sub(&self.tau[*q]);
                            for (r, col, v) in h.entries() {
                                triples.push((toff + r, off + col, v.clone()));
                            }
                        } else {
                            for (r, col, v) in self.norm[*q].entries() {
                                triples.push((toff + r, off + col, v.clone()));
                            }
                        }
                    }
                }
            }
            diffs.insert(
                *n,
                SparseMatrix::from_triples_accum(ring, tgt, dims[n], triples),
            );
        }
        ChainComplex::new(ring, lo, hi, dims, diffs, false, false)
    }

    /// Degrees of the totalization unaffected by the window truncation.
    pub fn reliable_degree(&self, n: i64) -> bool {
        match self.variant {
            Variant::Cyclic => n >= 0 && n + 1 <= self.n_max.min(self.c_max) as i64,
            // the row truncation always cuts nonzero cells of the half- and
            // full-plane variants (unnormalized chains never vanish)
            _ => false,
        }
    }
}
