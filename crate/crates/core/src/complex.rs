//! Chain complexes of finitely generated modules and their homology.
//!
//! Complexes live on a finite degree window. Windows arise by truncating
//! infinite complexes, so each end carries an exactness flag: when the
//! flag is false, homology at that end is still reported but marked
//! unreliable rather than silently trusted.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::descriptor::ModuleDescriptor;
use crate::error::{Error, Result};
use crate::ring::{Elem, Ring};
use crate::snf;
use crate::solve;
use crate::sparse::SparseMatrix;

#[derive(Clone, Debug)]
pub struct ChainComplex {
    pub ring: Ring,
    pub lo: i64,
    pub hi: i64,
    dims: BTreeMap<i64, usize>,
    /// `d[n]: C_n -> C_{n-1}`
    diffs: BTreeMap<i64, SparseMatrix>,
    /// complex is genuinely zero below `lo` / above `hi`
    pub exact_lo: bool,
    pub exact_hi: bool,
    /// optional internal degree of each basis vector, per degree
    pub weights: Option<BTreeMap<i64, Vec<i64>>>,
}

impl ChainComplex {
    pub fn new(
        ring: Ring,
        lo: i64,
        hi: i64,
        dims: BTreeMap<i64, usize>,
        diffs: BTreeMap<i64, SparseMatrix>,
        exact_lo: bool,
        exact_hi: bool,
    ) -> Result<Self> {
        let c = ChainComplex {
            ring,
            lo,
            hi,
            dims,
            diffs,
            exact_lo,
            exact_hi,
            weights: None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_weights(mut self, weights: BTreeMap<i64, Vec<i64>>) -> Result<Self> {
        for (n, w) in &weights {
            if w.len() != self.dim(*n) {
                return Err(Error::validation(format!(
                    "weight vector length mismatch in degree {n}"
                )));
            }
        }
        // differentials must preserve internal degree
        for (n, d) in &self.diffs {
            let (Some(ws), Some(wt)) = (weights.get(n), weights.get(&(n - 1))) else {
                continue;
            };
            for (r, c, _) in d.entries() {
                if wt[r] != ws[c] {
                    return Err(Error::validation(format!(
                        "differential in degree {n} does not preserve internal degree: \
                         basis {c} (weight {}) hits basis {r} (weight {})",
                        ws[c], wt[r]
                    )));
                }
            }
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn dim(&self, n: i64) -> usize {
        self.dims.get(&n).copied().unwrap_or(0)
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        self.lo..=self.hi
    }

    /// `d_n`, materializing a zero matrix of the right shape if absent.
    pub fn diff(&self, n: i64) -> SparseMatrix {
        match self.diffs.get(&n) {
            Some(m) => m.clone(),
            None => SparseMatrix::zero(self.ring, self.dim(n - 1), self.dim(n)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (n, d) in &self.diffs {
            if d.rows != self.dim(n - 1) || d.cols != self.dim(*n) {
                return Err(Error::validation(format!(
                    "differential shape mismatch in degree {n}: {}x{} for C_{n}={} -> C_{}={}",
                    d.rows,
                    d.cols,
                    self.dim(*n),
                    n - 1,
                    self.dim(n - 1)
                )));
            }
        }
        for n in self.lo..=self.hi {
            let dn = self.diff(n);
            let dn1 = self.diff(n + 1);
            if dn1.cols == 0 || dn.rows == 0 {
                continue;
            }
            if !dn.mul(&dn1).is_zero() {
                return Err(Error::invariant(format!(
                    "d.d != 0 between degrees {} and {}",
                    n + 1,
                    n - 1
                )));
            }
        }
        Ok(())
    }

    /// Is homology at degree `n` unaffected by the window truncation?
    pub fn degree_reliable(&self, n: i64) -> bool {
        let above_ok = n < self.hi || self.exact_hi;
        let below_ok = n > self.lo || self.exact_lo;
        above_ok && below_ok
    }

    pub fn homology(&self, n: i64) -> Result<ModuleDescriptor> {
        let dn = self.diff(n);
        let dn1 = self.diff(n + 1);
        match self.ring {
            Ring::PrimeField(_) | Ring::Rationals => {
                let r1 = solve::rank(&dn)?;
                let r2 = solve::rank(&dn1)?;
                Ok(ModuleDescriptor::free(self.ring, self.dim(n) - r1 - r2))
            }
            Ring::Integers => homology_over_z(&dn, &dn1),
            Ring::CyclicRing(p, k) => homology_over_zpk(&dn, &dn1, p, k),
        }
    }

    /// Homology in every window degree, in parallel, with reliability flags.
    pub fn homology_all(&self) -> Result<BTreeMap<i64, (ModuleDescriptor, bool)>> {
        let degs: Vec<i64> = self.degrees().collect();
        let computed: Result<Vec<_>> = degs
            .par_iter()
            .map(|&n| Ok((n, (self.homology(n)?, self.degree_reliable(n)))))
            .collect();
        Ok(computed?.into_iter().collect())
    }

    /// Restrict to the sub complex of one internal degree. Requires weights.
    pub fn weight_piece(&self, w: i64) -> Result<ChainComplex> {
        let weights = self
            .weights
            .as_ref()
            .ok_or_else(|| Error::validation("complex has no internal grading"))?;
        let mut dims = BTreeMap::new();
        let mut index: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for n in self.lo..=self.hi {
            let idx: Vec<usize> = weights
                .get(&n)
                .map(|ws| {
                    ws.iter()
                        .enumerate()
                        .filter(|(_, x)| **x == w)
                        .map(|(i, _)| i)
                        .collect()
                })
                .unwrap_or_default();
            dims.insert(n, idx.len());
            index.insert(n, idx);
        }
        let mut diffs = BTreeMap::new();
        for (n, d) in &self.diffs {
            let (Some(src), Some(tgt)) = (index.get(n), index.get(&(n - 1))) else {
                continue;
            };
            diffs.insert(*n, d.select_cols(src).select_rows(tgt));
        }
        ChainComplex::new(
            self.ring,
            self.lo,
            self.hi,
            dims,
            diffs,
            self.exact_lo,
            self.exact_hi,
        )
    }

    /// Distinct internal degrees present in the window.
    pub fn weight_values(&self) -> Vec<i64> {
        let mut vals: Vec<i64> = self
            .weights
            .iter()
            .flat_map(|m| m.values().flatten().copied())
            .collect();
        vals.sort();
        vals.dedup();
        vals
    }

    /// Shift degrees by `s` (no sign changes; used for aligning windows).
    pub fn shift(&self, s: i64) -> ChainComplex {
        ChainComplex {
            ring: self.ring,
            lo: self.lo + s,
            hi: self.hi + s,
            dims: self.dims.iter().map(|(n, d)| (n + s, *d)).collect(),
            diffs: self.diffs.iter().map(|(n, m)| (n + s, m.clone())).collect(),
            exact_lo: self.exact_lo,
            exact_hi: self.exact_hi,
            weights: self
                .weights
                .as_ref()
                .map(|ws| ws.iter().map(|(n, v)| (n + s, v.clone())).collect()),
        }
    }
}

fn homology_over_z(dn: &SparseMatrix, dn1: &SparseMatrix) -> Result<ModuleDescriptor> {
    let ring = Ring::Integers;
    let s = snf::smith_normal_form(dn)?;
    // kernel slots of D: zero diagonal plus columns beyond the diagonal
    let mut slots = Vec::new();
    for j in 0..dn.cols {
        let zero = j >= s.diag.len() || ring.is_zero(&s.diag[j]);
        if zero {
            slots.push(j);
        }
    }
    // image of d_{n+1} in V-coordinates
    let y = s.v_inv.mul(dn1);
    // rows off the kernel slots must vanish (d.d = 0)
    let pres = y.select_rows(&slots);
    debug_assert!({
        let mut on: Vec<bool> = vec![false; dn.cols];
        for &j in &slots {
            on[j] = true;
        }
        y.entries().all(|(r, _, _)| on[r])
    });
    let psnf = snf::smith_normal_form(&pres)?;
    snf::descriptor_from_presentation(ring, slots.len(), &psnf.diag)
}

fn homology_over_zpk(
    dn: &SparseMatrix,
    dn1: &SparseMatrix,
    p: u64,
    k: u32,
) -> Result<ModuleDescriptor> {
    let ring = Ring::CyclicRing(p, k);
    let s = snf::smith_normal_form(dn)?;
    // generator exponents: diag p^a contributes a cyclic factor of order p^a
    // (a = k for zero diagonal and for columns beyond the diagonal)
    let mut gens: Vec<(usize, u32)> = Vec::new(); // (slot, exponent a)
    for j in 0..dn.cols {
        let a = if j >= s.diag.len() || ring.is_zero(&s.diag[j]) {
            k
        } else {
            ring.valuation(&s.diag[j]).expect("nonzero")
        };
        if a > 0 {
            gens.push((j, a));
        }
    }
    let y = s.v_inv.mul(dn1);
    // generator g_t = p^{k-a_t} e_{slot}; coordinates of the image columns
    // with respect to the generators, computed by exact division
    let mut triples = Vec::new();
    for (col, colv) in (0..y.cols).map(|j| (j, y.col(j))) {
        for (r, v) in colv {
            let t = gens.iter().position(|(slot, _)| *slot == *r as usize);
            let Some(t) = t else {
                // entry on a unit slot: must vanish since image lies in kernel
                return Err(Error::invariant(
                    "image of d_{n+1} escapes the kernel of d_n",
                ));
            };
            let a = gens[t].1;
            let pk_minus_a = Ring::CyclicRing(p, k)
                .modulus()
                .map(|_| p.pow(k - a))
                .unwrap();
            let c = ring
                .div_exact(v, &Elem::F(pk_minus_a % ring.modulus().unwrap()))
                .ok_or_else(|| {
                    Error::invariant("image coordinate not divisible as required")
                })?;
            let Elem::F(cv) = c else { unreachable!() };
            // reduce modulo p^a, the order of the generator
            let cv = cv % p.pow(a);
            if cv != 0 {
                triples.push((t, col, Elem::Z(num_bigint::BigInt::from(cv))));
            }
        }
    }
    // presentation over Z: [coords | diag(p^{a_t})]
    let zr = Ring::Integers;
    let ncols = y.cols + gens.len();
    let mut all = triples;
    for (t, (_, a)) in gens.iter().enumerate() {
        all.push((t, y.cols + t, Elem::Z(num_bigint::BigInt::from(p).pow(*a))));
    }
    let pres = SparseMatrix::from_triples_accum(zr, gens.len(), ncols, all);
    let psnf = snf::smith_normal_form(&pres)?;
    // translate: divisors are p-powers; p^k counts as a full-precision summand
    let mut free = 0usize;
    let mut torsion = Vec::new();
    let full = num_bigint::BigInt::from(p).pow(k);
    let mut nonzero = 0usize;
    for e in &psnf.diag {
        let Elem::Z(x) = e else { unreachable!() };
        if x == &num_bigint::BigInt::from(0) {
            continue;
        }
        nonzero += 1;
        if x == &full {
            free += 1;
        } else if x != &num_bigint::BigInt::from(1) {
            torsion.push(x.clone());
        }
    }
    // zero diagonal entries of a presentation of a torsion group cannot occur:
    // every generator has a p-power relation, so rank(pres) = #gens
    debug_assert_eq!(nonzero, gens.len());
    torsion.sort();
    Ok(ModuleDescriptor {
        ring,
        free_rank: free,
        torsion,
    })
}

/// A degree-0 chain map between complexes over the same ring.
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub mats: BTreeMap<i64, SparseMatrix>,
}

impl ChainMap {
    pub fn mat<'a>(&'a self, n: i64, src: &ChainComplex, tgt: &ChainComplex) -> SparseMatrix {
        match self.mats.get(&n) {
            Some(m) => m.clone(),
            None => SparseMatrix::zero(src.ring, tgt.dim(n), src.dim(n)),
        }
    }

    pub fn validate(&self, src: &ChainComplex, tgt: &ChainComplex) -> Result<()> {
        for n in src.lo.max(tgt.lo)..=src.hi.min(tgt.hi) {
            let left = tgt.diff(n).mul(&self.mat(n, src, tgt));
            let right = self.mat(n - 1, src, tgt).mul(&src.diff(n));
            if left != right {
                return Err(Error::invariant(format!(
                    "chain map does not commute with differentials in degree {n}"
                )));
            }
        }
        Ok(())
    }

    /// Mapping cone; `cone_n = src_{n-1} + tgt_n`.
    pub fn cone(&self, src: &ChainComplex, tgt: &ChainComplex) -> Result<ChainComplex> {
        let ring = src.ring;
        let lo = tgt.lo.min(src.lo + 1);
        let hi = tgt.hi.max(src.hi + 1);
        let mut dims = BTreeMap::new();
        for n in lo..=hi {
            dims.insert(n, src.dim(n - 1) + tgt.dim(n));
        }
        let mut diffs = BTreeMap::new();
        for n in lo..=hi {
            let sx = src.dim(n - 1);
            let sy = tgt.dim(n);
            let tx = src.dim(n - 2);
            let ty = tgt.dim(n - 1);
            if sx + sy == 0 || tx + ty == 0 {
                continue;
            }
            let dx = src.diff(n - 1);
            let dy = tgt.diff(n);
            let f = self.mat(n - 1, src, tgt);
            let mut triples: Vec<(usize, usize, Elem)> = Vec::new();
            for (r, c, v) in dx.entries() {
                triples.push((r, c, ring.neg(v)));
            }
            for (r, c, v) in f.entries() {
                triples.push((tx + r, c, v.clone()));
            }
            for (r, c, v) in dy.entries() {
                triples.push((tx + r, sx + c, v.clone()));
            }
            diffs.insert(
                n,
                SparseMatrix::from_triples_accum(ring, tx + ty, sx + sy, triples),
            );
        }
        ChainComplex::new(
            ring,
            lo,
            hi,
            dims,
            diffs,
            src.exact_lo && tgt.exact_lo,
            src.exact_hi && tgt.exact_hi,
        )
    }
}

/// Representative data for homology of a field-coefficient complex at one
/// degree: cycle representatives spanning the quotient, plus an echelon of
/// the boundary space so that arbitrary cycles can be expressed in it.
pub struct HomologyBasis {
    pub n: i64,
    pub reps: Vec<Vec<(u32, Elem)>>,
}

impl ChainComplex {
    /// Homology representatives at degree `n` (field coefficients only).
    pub fn homology_basis(&self, n: i64) -> Result<HomologyBasis> {
        if !self.ring.is_field() {
            return Err(Error::UnsupportedRing(
                "homology representatives need field coefficients".into(),
            ));
        }
        let dn = self.diff(n);
        let dn1 = self.diff(n + 1);
        let kernel = solve::rank_kernel_image(&dn)?.kernel;
        // feed boundaries first, then kernel vectors; the survivors of the
        // second stage represent homology classes
        let dim = self.dim(n);
        let stacked = {
            let mut m = SparseMatrix::zero(self.ring, dim, dn1.cols + kernel.len());
            for j in 0..dn1.cols {
                m.set_col(j, dn1.col(j).to_vec());
            }
            for (i, v) in kernel.iter().enumerate() {
                m.set_col(dn1.cols + i, v.clone());
            }
            m
        };
        let ech = solve::rank_kernel_image(&stacked)?;
        let reps: Vec<Vec<(u32, Elem)>> = ech
            .pivots
            .iter()
            .filter(|(_, col)| *col >= dn1.cols)
            .map(|(_, col)| kernel[col - dn1.cols].clone())
            .collect();
        Ok(HomologyBasis { n, reps })
    }

    /// Matrix of the map induced on degree-`n` homology by a chain map
    /// `f: self -> tgt`, with respect to the given representative bases.
    pub fn induced_on_homology(
        &self,
        tgt: &ChainComplex,
        f: &ChainMap,
        n: i64,
        src_basis: &HomologyBasis,
        tgt_basis: &HomologyBasis,
    ) -> Result<SparseMatrix> {
        let ring = self.ring;
        let fm = f.mat(n, self, tgt);
        // images of source representatives
        let mut img = SparseMatrix::zero(ring, tgt.dim(n), src_basis.reps.len());
        for (j, v) in src_basis.reps.iter().enumerate() {
            img.set_col(j, fm.mul_vec(v));
        }
        // solve [reps | boundaries] x = img, read off rep coordinates
        let dn1 = tgt.diff(n + 1);
        let mut ambient = SparseMatrix::zero(ring, tgt.dim(n), tgt_basis.reps.len() + dn1.cols);
        for (j, v) in tgt_basis.reps.iter().enumerate() {
            ambient.set_col(j, v.clone());
        }
        for j in 0..dn1.cols {
            ambient.set_col(tgt_basis.reps.len() + j, dn1.col(j).to_vec());
        }
        let sols = solve::solve_cols(&ambient, &img)?;
        let mut triples = Vec::new();
        for (j, s) in sols.iter().enumerate() {
            let s = s.as_ref().ok_or_else(|| {
                Error::invariant("image of a cycle is not a cycle modulo boundaries")
            })?;
            for (r, v) in s {
                if (*r as usize) < tgt_basis.reps.len() {
                    triples.push((*r as usize, j, v.clone()));
                }
            }
        }
        Ok(SparseMatrix::from_triples_accum(
            ring,
            tgt_basis.reps.len(),
            src_basis.reps.len(),
            triples,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complex_z_times2() -> ChainComplex {
        // 0 -> Z --x2--> Z -> 0 in degrees 1, 0
        let ring = Ring::Integers;
        let mut dims = BTreeMap::new();
        dims.insert(0, 1);
        dims.insert(1, 1);
        let mut diffs = BTreeMap::new();
        diffs.insert(
            1,
            SparseMatrix::from_triples(ring, 1, 1, vec![(0, 0, ring.from_i64(2))]).unwrap(),
        );
        ChainComplex::new(ring, 0, 1, dims, diffs, true, true).unwrap()
    }

    #[test]
    fn torsion_homology() {
        let c = complex_z_times2();
        assert_eq!(c.homology(0).unwrap().to_string(), "Z/2");
        assert!(c.homology(1).unwrap().is_zero());
    }

    #[test]
    fn acyclic_identity() {
        let ring = Ring::Rationals;
        let mut dims = BTreeMap::new();
        dims.insert(0, 1);
        dims.insert(1, 1);
        let mut diffs = BTreeMap::new();
        diffs.insert(1, SparseMatrix::identity(ring, 1));
        let c = ChainComplex::new(ring, 0, 1, dims, diffs, true, true).unwrap();
        assert!(c.homology(0).unwrap().is_zero());
        assert!(c.homology(1).unwrap().is_zero());
    }

    #[test]
    fn dd_violation_detected() {
        let ring = Ring::Integers;
        let mut dims = BTreeMap::new();
        dims.insert(0, 1);
        dims.insert(1, 1);
        dims.insert(2, 1);
        let mut diffs = BTreeMap::new();
        let one = SparseMatrix::identity(ring, 1);
        diffs.insert(1, one.clone());
        diffs.insert(2, one);
        assert!(ChainComplex::new(ring, 0, 2, dims, diffs, true, true).is_err());
    }

    #[test]
    fn zpk_homology() {
        // 0 -> Z/9 --x3--> Z/9 -> 0: H_0 = Z/3, H_1 = Z/3
        let ring = Ring::CyclicRing(3, 2);
        let mut dims = BTreeMap::new();
        dims.insert(0, 1);
        dims.insert(1, 1);
        let mut diffs = BTreeMap::new();
        diffs.insert(
            1,
            SparseMatrix::from_triples(ring, 1, 1, vec![(0, 0, ring.from_i64(3))]).unwrap(),
        );
        let c = ChainComplex::new(ring, 0, 1, dims, diffs, true, true).unwrap();
        assert_eq!(c.homology(0).unwrap().to_string(), "Z/3");
        assert_eq!(c.homology(1).unwrap().to_string(), "Z/3");
    }

    #[test]
    fn homology_basis_and_induced_map() {
        // identity map on 0 -> Q^2 --0--> Q^2 -> 0
        let ring = Ring::Rationals;
        let mut dims = BTreeMap::new();
        dims.insert(0, 2);
        let c = ChainComplex::new(ring, 0, 0, dims, BTreeMap::new(), true, true).unwrap();
        let hb = c.homology_basis(0).unwrap();
        assert_eq!(hb.reps.len(), 2);
        let f = ChainMap {
            mats: [(0, SparseMatrix::identity(ring, 2))].into_iter().collect(),
        };
        let m = c.induced_on_homology(&c, &f, 0, &hb, &hb).unwrap();
        assert_eq!(m, SparseMatrix::identity(ring, 2));
    }
}
