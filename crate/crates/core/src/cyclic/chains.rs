//! Tensor-tuple cell spaces of the Hochschild and cyclic complexes, and
//! the elementary operators b, b', tau, N, B and the internal
//! differential on them.
//!
//! A chain in simplicial degree `q` is a combination of `(q+1)`-tuples of
//! basis elements. In the normalized picture slot 0 runs over the full
//! basis while slots >= 1 run over a basis of `A/R.1`, obtained by
//! dropping one basis element with invertible unit coordinate.
//!
//! Signs follow the standard cyclic-homology conventions: `tau` on
//! `A^{(x)(q+1)}` is the cyclic permutation times `(-1)^q`, `b` and `b'`
//! are alternating sums of face maps, and `B` on normalized chains is
//! `sum_i (-1)^{qi} (1, a_i, ..., a_{i-1})`. DG algebras contribute the
//! Koszul signs of their homological grading on top of these.

use crate::algebra::{check_cell, Algebra, Vector};
use crate::error::Result;
use crate::ring::{Elem, Ring};
use crate::sparse::{combine, SparseMatrix};

/// Cell machinery for one algebra, normalized or not.
pub struct Chains<'a> {
    pub alg: &'a Algebra,
    pub normalized: bool,
    ring: Ring,
    /// reduced basis: original indices except the dropped pivot
    red2full: Vec<u32>,
    #[allow(dead_code)]
    full2red: Vec<Option<u32>>,
    /// projection A -> A/R.1 of each full basis vector, in reduced coords
    proj: Vec<Vec<(u32, Elem)>>,
    /// d on slot-0 elements (full coords), zero when not DG
    diff_full: Option<SparseMatrix>,
}

/// A tuple of slot indices: slot 0 is a full-basis index; slots >= 1 are
/// reduced indices in the normalized picture and full indices otherwise.
pub type Slots = Vec<u32>;

impl<'a> Chains<'a> {
    pub fn new(alg: &'a Algebra, normalized: bool) -> Result<Self> {
        let ring = alg.ring;
        let (red2full, full2red, proj) = if normalized {
            let pivot = alg.unit_pivot()?;
            let red2full: Vec<u32> = (0..alg.dim as u32)
                .filter(|i| *i as usize != pivot)
                .collect();
            let mut full2red = vec![None; alg.dim];
            for (r, f) in red2full.iter().enumerate() {
                full2red[*f as usize] = Some(r as u32);
            }
            // unit = sum u_j e_j; e_pivot = (1 - sum_{j != pivot} u_j e_j)/u_pivot
            let upiv = alg
                .unit
                .iter()
                .find(|(i, _)| *i as usize == pivot)
                .map(|(_, v)| v.clone())
                .expect("pivot has a unit coordinate");
            let upiv_inv = ring.inv(&upiv).expect("pivot coordinate is a unit");
            let mut proj = Vec::with_capacity(alg.dim);
            for f in 0..alg.dim {
                if f == pivot {
                    let mut v: Vec<(u32, Elem)> = Vec::new();
                    for (j, u) in &alg.unit {
                        if *j as usize == pivot {
                            continue;
                        }
                        let c = ring.neg(&ring.mul(u, &upiv_inv));
                        v.push((full2red[*j as usize].unwrap(), c));
                    }
                    proj.push(combine(&ring, v));
                } else {
                    proj.push(vec![(full2red[f].unwrap(), ring.one())]);
                }
            }
            (red2full, full2red, proj)
        } else {
            let red2full: Vec<u32> = (0..alg.dim as u32).collect();
            let full2red: Vec<Option<u32>> = (0..alg.dim as u32).map(Some).collect();
            let proj = (0..alg.dim as u32)
                .map(|f| vec![(f, ring.one())])
                .collect();
            (red2full, full2red, proj)
        };
        Ok(Chains {
            alg,
            normalized,
            ring,
            red2full,
            full2red,
            proj,
            diff_full: alg.differential.clone(),
        })
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn red_dim(&self) -> usize {
        self.red2full.len()
    }

    /// Number of `(q+1)`-tuples.
    pub fn cell_dim(&self, q: usize) -> usize {
        let m = self.alg.dim;
        let mr = self.red_dim();
        let mut n = m;
        for _ in 0..q {
            n = n.saturating_mul(mr);
        }
        n
    }

    pub fn check_cells(&self, what: &str, q: usize) -> Result<()> {
        check_cell(what, self.cell_dim(q))
    }

    pub fn decode(&self, q: usize, code: usize) -> Slots {
        let mr = self.red_dim();
        let mut slots = vec![0u32; q + 1];
        let mut x = code;
        for i in (1..=q).rev() {
            slots[i] = (x % mr) as u32;
            x /= mr;
        }
        slots[0] = x as u32;
        debug_assert!((slots[0] as usize) < self.alg.dim);
        slots
    }

    pub fn encode(&self, slots: &[u32]) -> usize {
        let mr = self.red_dim();
        let mut x = slots[0] as usize;
        for s in &slots[1..] {
            x = x * mr + *s as usize;
        }
        x
    }

    /// Full-basis index of the element in `slot`.
    fn full_of(&self, slots: &[u32], slot: usize) -> usize {
        if slot == 0 {
            slots[0] as usize
        } else {
            self.red2full[slots[slot] as usize] as usize
        }
    }

    /// Internal degree of the element in `slot` (weight or homological).
    pub fn slot_degree(&self, slots: &[u32], slot: usize) -> i64 {
        self.alg.grading[self.full_of(slots, slot)]
    }

    /// Full-basis index behind a reduced index.
    pub fn full_index_of_reduced(&self, r: u32) -> usize {
        self.red2full[r as usize] as usize
    }

    /// Public projection of a full-basis expansion to reduced coordinates.
    pub fn project_public(&self, v: &[(u32, Elem)]) -> Vec<(u32, Elem)> {
        self.project(&v.to_vec())
    }

    /// Total internal degree of a tuple.
    pub fn tuple_weight(&self, slots: &[u32]) -> i64 {
        (0..slots.len()).map(|i| self.slot_degree(slots, i)).sum()
    }

    /// Enumerate all tuples of simplicial degree `q` with one fixed total
    /// weight (for weight-graded algebras with truncated bases).
    pub fn tuples_of_weight(&self, q: usize, w: i64) -> Vec<Slots> {
        let mut out = Vec::new();
        let mut cur: Slots = vec![0; q + 1];
        self.enum_rec(q, w, 0, &mut cur, &mut out);
        out
    }

    fn enum_rec(&self, q: usize, remaining: i64, slot: usize, cur: &mut Slots, out: &mut Vec<Slots>) {
        if slot > q {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let count = if slot == 0 {
            self.alg.dim
        } else {
            self.red_dim()
        };
        for i in 0..count {
            cur[slot] = i as u32;
            let d = self.slot_degree(cur, slot);
            if d <= remaining {
                self.enum_rec(q, remaining - d, slot + 1, cur, out);
            }
        }
    }

    /// Multiply the full elements at `slots[i]` and `slots[i+1 mod]`,
    /// returning the expansion in the full basis.
    fn mul_slots(&self, a_full: usize, b_full: usize) -> &Vector {
        self.alg.mul_basis(a_full, b_full)
    }

    /// Express a full-basis expansion in reduced coordinates.
    fn project(&self, v: &Vector) -> Vec<(u32, Elem)> {
        let mut acc = Vec::new();
        for (f, c) in v {
            for (r, p) in &self.proj[*f as usize] {
                acc.push((*r, self.ring.mul(c, p)));
            }
        }
        combine(&self.ring, acc)
    }

    /// Homological degree of a slot for Koszul signs; zero unless DG.
    fn hdeg(&self, slots: &[u32], slot: usize) -> i64 {
        if self.alg.dg {
            self.slot_degree(slots, slot)
        } else {
            0
        }
    }

    /// Face map `d_i` applied to one tuple; emits `(tuple, coefficient)`.
    /// `0 <= i <= q`; `d_q` is the wrap-around face.
    pub fn face(&self, slots: &Slots, i: usize, out: &mut Vec<(Slots, Elem)>) {
        let q = slots.len() - 1;
        let ring = self.ring;
        if i < q {
            let a = self.full_of(slots, i);
            let b = self.full_of(slots, i + 1);
            let prod = self.mul_slots(a, b);
            if i == 0 {
                // result stays in slot 0, full coordinates
                for (k, c) in prod {
                    let mut t = Vec::with_capacity(q);
                    t.push(*k);
                    t.extend_from_slice(&slots[2..]);
                    out.push((t, c.clone()));
                }
            } else {
                let red = self.project(prod);
                for (k, c) in red {
                    let mut t = Vec::with_capacity(q);
                    t.extend_from_slice(&slots[..i]);
                    t.push(k);
                    t.extend_from_slice(&slots[i + 2..]);
                    out.push((t, c));
                }
            }
        } else {
            // wrap-around: (a_q a_0, a_1, ..., a_{q-1})
            let a = self.full_of(slots, q);
            let b = self.full_of(slots, 0);
            let prod = self.mul_slots(a, b);
            let mut sign = 1i64;
            if self.alg.dg {
                let hq = self.hdeg(slots, q);
                let rest: i64 = (0..q).map(|s| self.hdeg(slots, s)).sum();
                if (hq * rest) % 2 != 0 {
                    sign = -1;
                }
            }
            for (k, c) in prod {
                let mut t = Vec::with_capacity(q);
                t.push(*k);
                t.extend_from_slice(&slots[1..q]);
                let cc = if sign < 0 { ring.neg(c) } else { c.clone() };
                out.push((t, cc));
            }
        }
    }

    /// Hochschild boundary `b = sum_{i=0..q} (-1)^i d_i`.
    pub fn b_op(&self, slots: &Slots, out: &mut Vec<(Slots, Elem)>) {
        let q = slots.len() - 1;
        for i in 0..=q {
            let mut tmp = Vec::new();
            self.face(slots, i, &mut tmp);
            let neg = i % 2 == 1;
            for (t, c) in tmp {
                out.push((t, if neg { self.ring.neg(&c) } else { c }));
            }
        }
    }

    /// Bar boundary `b' = sum_{i=0..q-1} (-1)^i d_i`.
    pub fn bprime_op(&self, slots: &Slots, out: &mut Vec<(Slots, Elem)>) {
        let q = slots.len() - 1;
        for i in 0..q {
            let mut tmp = Vec::new();
            self.face(slots, i, &mut tmp);
            let neg = i % 2 == 1;
            for (t, c) in tmp {
                out.push((t, if neg { self.ring.neg(&c) } else { c }));
            }
        }
    }

    /// Cyclic operator `tau` (unnormalized chains only):
    /// `(-1)^q (a_q, a_0, ..., a_{q-1})` with the DG Koszul correction.
    pub fn tau_op(&self, slots: &Slots, out: &mut Vec<(Slots, Elem)>) {
        assert!(!self.normalized, "tau acts on unnormalized chains");
        let q = slots.len() - 1;
        let mut sign = if q % 2 == 1 { -1i64 } else { 1 };
        if self.alg.dg {
            let hq = self.hdeg(slots, q);
            let rest: i64 = (0..q).map(|s| self.hdeg(slots, s)).sum();
            if (hq * rest) % 2 != 0 {
                sign = -sign;
            }
        }
        let mut t = Vec::with_capacity(q + 1);
        t.push(slots[q]);
        t.extend_from_slice(&slots[..q]);
        out.push((t, self.ring.from_i64(sign)));
    }

    /// Connes operator `B` on normalized chains:
    /// `sum_{i=0..q} (-1)^{qi} (1, a_i, ..., a_q, a_0, ..., a_{i-1})`.
    pub fn b_connes_op(&self, slots: &Slots, out: &mut Vec<(Slots, Elem)>) {
        assert!(self.normalized, "B is defined on normalized chains");
        let q = slots.len() - 1;
        let ring = self.ring;
        let hdegs: Vec<i64> = (0..=q).map(|s| self.hdeg(slots, s)).collect();
        let total_h: i64 = hdegs.iter().sum();
        for i in 0..=q {
            let mut sign = if (q * i) % 2 == 1 { -1i64 } else { 1 };
            if self.alg.dg {
                // rotate by i: move a_0..a_{i-1} past a_i..a_q
                let front: i64 = hdegs[..i].iter().sum();
                let back = total_h - front;
                if (front * back) % 2 != 0 {
                    sign = -sign;
                }
            }
            // rotated tuple (a_i, ..., a_q, a_0, ..., a_{i-1}); every entry
            // lands in a slot >= 1 of the target, so project the full one
            let mut rotated: Vec<Vec<(u32, Elem)>> = Vec::with_capacity(q + 1);
            for off in 0..=q {
                let s = (i + off) % (q + 1);
                if s == 0 {
                    rotated.push(self.proj[slots[0] as usize].clone());
                } else {
                    rotated.push(vec![(slots[s], ring.one())]);
                }
            }
            // expand over the unit coordinates and the projected slot
            for (u_idx, u_c) in &self.alg.unit {
                let base_c = ring.mul(u_c, &ring.from_i64(sign));
                // expand product of choices in `rotated`; only the single
                // projected slot has more than one branch
                let mut partial: Vec<(Slots, Elem)> = vec![(vec![*u_idx], base_c)];
                for choices in &rotated {
                    let mut next = Vec::with_capacity(partial.len() * choices.len());
                    for (t, c) in &partial {
                        for (r, cc) in choices {
                            let mut t2 = t.clone();
                            t2.push(*r);
                            next.push((t2, ring.mul(c, cc)));
                        }
                    }
                    partial = next;
                }
                out.extend(partial);
            }
        }
    }

    /// Internal differential on a tuple (DG algebras):
    /// `sum_s (-1)^{h_0+...+h_{s-1}} (..., d a_s, ...)`.
    pub fn delta_op(&self, slots: &Slots, out: &mut Vec<(Slots, Elem)>) {
        let Some(d) = &self.diff_full else { return };
        let q = slots.len() - 1;
        let ring = self.ring;
        let mut prefix = 0i64;
        for s in 0..=q {
            let f = self.full_of(slots, s);
            let dv = d.col(f);
            if !dv.is_empty() {
                let sign = if prefix % 2 == 1 { -1i64 } else { 1 };
                let dv_target: Vec<(u32, Elem)> = if s == 0 {
                    dv.to_vec()
                } else {
                    self.project(&dv.to_vec())
                };
                for (k, c) in dv_target {
                    let mut t = slots.clone();
                    t[s] = k;
                    let c = ring.mul(&c, &ring.from_i64(sign));
                    out.push((t, c));
                }
            }
            prefix += self.hdeg(slots, s);
        }
    }
}

/// A concrete cell space: one simplicial degree, possibly one weight.
pub enum CellSpace {
    /// all tuples, indexed by mixed-radix code
    Coded { q: usize, dim: usize },
    /// explicit tuples of one total weight, sorted
    Listed {
        q: usize,
        tuples: Vec<Slots>,
        index: std::collections::BTreeMap<Slots, u32>,
    },
}

impl CellSpace {
    pub fn coded(ch: &Chains, q: usize) -> CellSpace {
        CellSpace::Coded {
            q,
            dim: ch.cell_dim(q),
        }
    }

    pub fn listed(ch: &Chains, q: usize, w: i64) -> CellSpace {
        let tuples = ch.tuples_of_weight(q, w);
        let index = tuples
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        CellSpace::Listed { q, tuples, index }
    }

    pub fn q(&self) -> usize {
        match self {
            CellSpace::Coded { q, .. } | CellSpace::Listed { q, .. } => *q,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CellSpace::Coded { dim, .. } => *dim,
            CellSpace::Listed { tuples, .. } => tuples.len(),
        }
    }

    pub fn tuple(&self, ch: &Chains, i: usize) -> Slots {
        match self {
            CellSpace::Coded { q, .. } => ch.decode(*q, i),
            CellSpace::Listed { tuples, .. } => tuples[i].clone(),
        }
    }

    pub fn find(&self, ch: &Chains, t: &Slots) -> Option<usize> {
        match self {
            CellSpace::Coded { .. } => Some(ch.encode(t)),
            CellSpace::Listed { index, .. } => index.get(t).map(|i| *i as usize),
        }
    }
}

/// Assemble the matrix of an operator between two cell spaces.
///
/// `op` emits `(tuple, coeff)` pairs for one source tuple. Targets that
/// fall outside the target space are an error except when
/// `allow_missing` is set (used for weight windows where a target weight
/// is out of range, which cannot happen for weight-preserving operators).
pub fn operator_matrix(
    ch: &Chains,
    src: &CellSpace,
    tgt: &CellSpace,
    op: impl Fn(&Slots, &mut Vec<(Slots, Elem)>) + Sync,
) -> SparseMatrix {
    use rayon::prelude::*;
    let ring = ch.ring();
    let cols: Vec<Vec<(u32, Elem)>> = (0..src.dim())
        .into_par_iter()
        .map(|j| {
            let t = src.tuple(ch, j);
            let mut emitted = Vec::new();
            op(&t, &mut emitted);
            let mut col: Vec<(u32, Elem)> = Vec::with_capacity(emitted.len());
            for (tt, c) in emitted {
                let k = tgt
                    .find(ch, &tt)
                    .expect("operator target outside the cell space");
                col.push((k as u32, c));
            }
            combine(&ring, col)
        })
        .collect();
    let mut m = SparseMatrix::zero(ring, tgt.dim(), src.dim());
    for (j, col) in cols.into_iter().enumerate() {
        m.set_col(j, col);
    }
    m
}
