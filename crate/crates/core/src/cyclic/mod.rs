//! Hochschild and cyclic homology engines.
//!
//! Two models are implemented. The default engine works on normalized
//! (reduced) chains with the Connes operator `B`: the cyclic, periodic
//! and negative complexes are totalizations of the `(b, B)`-bicomplex,
//! with the `u`-power index playing the role of the column pair of the
//! classical picture. The `unnormalized` engine builds the literal
//! `(b, b', 1-tau, N)` bicomplex; it is slower and is used for the
//! structural identity checks and as an independent route in tests.
//!
//! The periodicity map `S` is the shift by one `u`-power (two columns of
//! the classical bicomplex); Connes' exact sequence is realized by the
//! short exact sequence of complexes `0 -> CH -> CC -> CC[2] -> 0` whose
//! kernel is literally the Hochschild column.

pub mod bicomplex;
pub mod chains;
pub mod cohomology;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::Algebra;
use crate::complex::{ChainComplex, ChainMap, HomologyBasis};
use crate::descriptor::ModuleDescriptor;
use crate::error::{Error, Result};
use crate::ring::Elem;
use crate::solve;
use crate::sparse::SparseMatrix;
use chains::{CellSpace, Chains, Slots};

/// Which totalization of the cyclic bicomplex to build.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Variant {
    /// `CC`: u-powers `j >= 0` (columns to the left)
    Cyclic,
    /// `CP`: all u-powers
    Periodic,
    /// `CC^-`: u-powers `j <= 0` (columns to the right)
    Negative,
}

impl Variant {
    fn j_in_range(&self, j: i64) -> bool {
        match self {
            Variant::Cyclic => j >= 0,
            Variant::Periodic => true,
            Variant::Negative => j <= 0,
        }
    }
}

/// One entry of a homology table.
#[derive(Clone, Debug, Serialize)]
pub struct HEntry {
    pub degree: i64,
    pub weight: Option<i64>,
    pub module: ModuleDescriptor,
    pub reliable: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomologyTable {
    pub theory: String,
    pub entries: Vec<HEntry>,
}

impl HomologyTable {
    pub fn new(theory: &str) -> Self {
        HomologyTable {
            theory: theory.into(),
            entries: Vec::new(),
        }
    }

    pub fn push(
        &mut self,
        degree: i64,
        weight: Option<i64>,
        module: ModuleDescriptor,
        reliable: bool,
    ) {
        self.entries.push(HEntry {
            degree,
            weight,
            module,
            reliable,
        });
        self.entries.sort_by_key(|e| (e.degree, e.weight));
    }

    pub fn get(&self, degree: i64, weight: Option<i64>) -> Option<&HEntry> {
        self.entries
            .iter()
            .find(|e| e.degree == degree && e.weight == weight)
    }

    /// Number of generators at a degree (0 when absent), summed over weights.
    pub fn dim(&self, degree: i64) -> usize {
        self.entries
            .iter()
            .filter(|e| e.degree == degree)
            .map(|e| e.module.generators())
            .sum()
    }

    pub fn dims_from_zero(&self, up_to: i64) -> Vec<usize> {
        (0..=up_to).map(|n| self.dim(n)).collect()
    }
}

/// The total complex of one cyclic variant on a finite window, with the
/// `(u-power, simplicial degree)` layout of every total degree.
pub struct CyclicWindow<'a> {
    pub alg: &'a Algebra,
    pub normalized: bool,
    pub variant: Variant,
    pub n_max: usize,
    pub weight: Option<i64>,
    pub complex: ChainComplex,
    /// per total degree: `(j, q, offset, dim)`, ascending `(j, q)`
    pub layout: BTreeMap<i64, Vec<(i64, usize, usize, usize)>>,
    /// degrees whose homology the window truncation cannot affect
    pub reliable: BTreeMap<i64, bool>,
}

/// Shared per-`q` data for building the complexes of one algebra.
pub struct Engine<'a> {
    pub ch: Chains<'a>,
    pub n_max: usize,
    pub weight: Option<i64>,
    spaces: Vec<CellSpace>,
    /// Hochschild boundary per q: `b_q: C_q -> C_{q-1}`
    b_mats: Vec<SparseMatrix>,
    /// internal DG differential per q (empty matrices when not DG)
    delta_mats: Vec<Option<SparseMatrix>>,
    /// Connes operator per q (normalized engine), `B_q: C_q -> C_{q+1}`
    connes_mats: Vec<Option<SparseMatrix>>,
}

impl<'a> Engine<'a> {
    pub fn new(
        alg: &'a Algebra,
        n_max: usize,
        normalized: bool,
        weight: Option<i64>,
        filter: Option<&(dyn Fn(&Chains, &Slots) -> bool + Sync)>,
    ) -> Result<Self> {
        let ch = Chains::new(alg, normalized)?;
        if alg.is_graded() && !alg.dg && weight.is_none() && filter.is_none() {
            return Err(Error::validation(
                "graded algebras are processed per internal degree; pass a weight",
            ));
        }
        let mut spaces = Vec::with_capacity(n_max + 1);
        for q in 0..=n_max {
            let sp = match (weight, filter) {
                (Some(w), None) => CellSpace::listed(&ch, q, w),
                (None, None) => {
                    ch.check_cells("cyclic engine cells", q)?;
                    CellSpace::coded(&ch, q)
                }
                (w, Some(f)) => {
                    let all: Vec<Slots> = match w {
                        Some(w) => ch.tuples_of_weight(q, w),
                        None => {
                            ch.check_cells("cyclic engine cells", q)?;
                            (0..ch.cell_dim(q)).map(|c| ch.decode(q, c)).collect()
                        }
                    };
                    let tuples: Vec<Slots> = all.into_iter().filter(|t| f(&ch, t)).collect();
                    let index = tuples
                        .iter()
                        .enumerate()
                        .map(|(i, t)| (t.clone(), i as u32))
                        .collect();
                    CellSpace::Listed { q, tuples, index }
                }
            };
            spaces.push(sp);
        }
        let mut b_mats = Vec::with_capacity(n_max + 1);
        let mut delta_mats = Vec::with_capacity(n_max + 1);
        let mut connes_mats = Vec::with_capacity(n_max + 1);
        for q in 0..=n_max {
            let b = if q == 0 {
                SparseMatrix::zero(ch.ring(), 0, spaces[0].dim())
            } else {
                chains::operator_matrix(&ch, &spaces[q], &spaces[q - 1], |t, out| ch.b_op(t, out))
            };
            b_mats.push(b);
            delta_mats.push(if alg.dg {
                Some(chains::operator_matrix(
                    &ch,
                    &spaces[q],
                    &spaces[q],
                    |t, out| ch.delta_op(t, out),
                ))
            } else {
                None
            });
            connes_mats.push(if normalized && q < n_max {
                Some(chains::operator_matrix(
                    &ch,
                    &spaces[q],
                    &spaces[q + 1],
                    |t, out| ch.b_connes_op(t, out),
                ))
            } else {
                None
            });
        }
        Ok(Engine {
            ch,
            n_max,
            weight,
            spaces,
            b_mats,
            delta_mats,
            connes_mats,
        })
    }

    pub fn space(&self, q: usize) -> &CellSpace {
        &self.spaces[q]
    }

    pub fn b_mat(&self, q: usize) -> &SparseMatrix {
        &self.b_mats[q]
    }

    pub fn b_connes_mat(&self, q: usize) -> Option<&SparseMatrix> {
        self.connes_mats[q].as_ref()
    }

    /// Chain degree (`q + hdeg`) of every cell in simplicial degree `q`.
    fn cell_degrees(&self, q: usize) -> Vec<i64> {
        let sp = &self.spaces[q];
        if !self.ch.alg.dg {
            return vec![q as i64; sp.dim()];
        }
        (0..sp.dim())
            .map(|i| {
                let t = sp.tuple(&self.ch, i);
                q as i64 + self.ch.tuple_weight(&t)
            })
            .collect()
    }

    /// Would the untruncated complex have nonzero chains in simplicial
    /// degrees beyond the window?
    fn chains_unbounded_beyond_window(&self) -> bool {
        match self.weight {
            None => self.ch.red_dim() > 0,
            Some(_) => {
                // a weight layer is bounded when all reduced basis elements
                // have positive weight and the top window spaces are empty
                let min_red_weight: Option<i64> = (0..self.ch.red_dim())
                    .map(|r| {
                        let t: Slots = vec![0, r as u32];
                        self.ch.slot_degree(&t, 1)
                    })
                    .min();
                match min_red_weight {
                    None => false,
                    Some(w) if w >= 1 => self
                        .spaces
                        .last()
                        .map(|sp| sp.dim() > 0)
                        .unwrap_or(false),
                    Some(_) => true,
                }
            }
        }
    }

    /// The Hochschild chain complex `(C, b (+ delta))` on the window.
    pub fn hochschild_complex(&self) -> Result<ChainComplex> {
        Ok(self.window(Variant::Cyclic, Some(0))?.complex)
    }

    /// Build the total complex of a variant. `j_clamp` bounds `|u-power|`;
    /// `None` lets the row bound decide.
    pub fn window(&self, variant: Variant, j_clamp: Option<i64>) -> Result<CyclicWindow<'a>> {
        let ring = self.ch.ring();
        let n_max = self.n_max as i64;
        let dg = self.ch.alg.dg;
        let max_cell_deg: i64 = if dg {
            (0..=self.n_max)
                .flat_map(|q| self.cell_degrees(q))
                .max()
                .unwrap_or(0)
        } else {
            n_max
        };
        let default_clamp = (max_cell_deg + 1) / 2 + 1;
        let jmax: i64 = match variant {
            Variant::Cyclic | Variant::Periodic => j_clamp.unwrap_or(default_clamp),
            Variant::Negative => 0,
        };
        let jmin: i64 = match variant {
            Variant::Cyclic => 0,
            Variant::Periodic | Variant::Negative => -j_clamp.unwrap_or(default_clamp),
        };
        #[derive(Clone)]
        struct Piece {
            j: i64,
            q: usize,
            offset: usize,
            dim: usize,
            /// DG only: cells of this (j, q) in this degree; empty = all
            select: Vec<usize>,
        }
        let mut per_degree: BTreeMap<i64, Vec<Piece>> = BTreeMap::new();
        for j in jmin..=jmax {
            if !variant.j_in_range(j) {
                continue;
            }
            for q in 0..=self.n_max {
                if self.spaces[q].dim() == 0 {
                    continue;
                }
                if !dg {
                    let n = q as i64 + 2 * j;
                    per_degree.entry(n).or_default().push(Piece {
                        j,
                        q,
                        offset: 0,
                        dim: self.spaces[q].dim(),
                        select: Vec::new(),
                    });
                } else {
                    let degs = self.cell_degrees(q);
                    let mut by_deg: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
                    for (i, d) in degs.iter().enumerate() {
                        by_deg.entry(d + 2 * j).or_default().push(i);
                    }
                    for (n, sel) in by_deg {
                        per_degree.entry(n).or_default().push(Piece {
                            j,
                            q,
                            offset: 0,
                            dim: sel.len(),
                            select: sel,
                        });
                    }
                }
            }
        }
        let mut dims = BTreeMap::new();
        for (n, pieces) in per_degree.iter_mut() {
            pieces.sort_by_key(|p| (p.j, p.q));
            let mut off = 0;
            for p in pieces.iter_mut() {
                p.offset = off;
                off += p.dim;
            }
            dims.insert(*n, off);
        }
        let lo = *dims.keys().next().unwrap_or(&0);
        let hi = *dims.keys().last().unwrap_or(&0);
        let find_piece = |n: i64, j: i64, q: usize| -> Option<&Piece> {
            per_degree.get(&n)?.iter().find(|p| p.j == j && p.q == q)
        };
        let cell_pos = |p: &Piece, cell: usize| -> Option<usize> {
            if p.select.is_empty() {
                Some(p.offset + cell)
            } else {
                p.select.binary_search(&cell).ok().map(|i| p.offset + i)
            }
        };
        let mut diffs: BTreeMap<i64, SparseMatrix> = BTreeMap::new();
        for (n, pieces) in &per_degree {
            let tgt_dim = dims.get(&(n - 1)).copied().unwrap_or(0);
            if tgt_dim == 0 {
                continue;
            }
            let mut triples: Vec<(usize, usize, Elem)> = Vec::new();
            for p in pieces {
                let src_list: Vec<(usize, usize)> = if p.select.is_empty() {
                    (0..p.dim).map(|i| (i, i)).collect()
                } else {
                    p.select.iter().copied().enumerate().collect()
                };
                if p.q > 0 {
                    if let Some(tp) = find_piece(n - 1, p.j, p.q - 1) {
                        let b = &self.b_mats[p.q];
                        for (loc, g) in &src_list {
                            for (r, v) in b.col(*g) {
                                if let Some(rp) = cell_pos(tp, *r as usize) {
                                    triples.push((rp, p.offset + loc, v.clone()));
                                }
                            }
                        }
                    }
                }
                if let Some(delta) = &self.delta_mats[p.q] {
                    if let Some(tp) = find_piece(n - 1, p.j, p.q) {
                        let neg = p.q % 2 == 1;
                        for (loc, g) in &src_list {
                            for (r, v) in delta.col(*g) {
                                if let Some(rp) = cell_pos(tp, *r as usize) {
                                    let vv = if neg { ring.neg(v) } else { v.clone() };
                                    triples.push((rp, p.offset + loc, vv));
                                }
                            }
                        }
                    }
                }
                if variant.j_in_range(p.j - 1) && p.j - 1 >= jmin && p.q < self.n_max {
                    if let Some(bq) = &self.connes_mats[p.q] {
                        if let Some(tp) = find_piece(n - 1, p.j - 1, p.q + 1) {
                            for (loc, g) in &src_list {
                                for (r, v) in bq.col(*g) {
                                    if let Some(rp) = cell_pos(tp, *r as usize) {
                                        triples.push((rp, p.offset + loc, v.clone()));
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let src_dim = dims[n];
            diffs.insert(
                *n,
                SparseMatrix::from_triples_accum(ring, tgt_dim, src_dim, triples),
            );
        }
        let complex = ChainComplex::new(ring, lo, hi, dims, diffs, false, false)?;
        // reliability: degree n is trustworthy when every chain group the
        // untruncated complex has in degrees n-1, n, n+1 lies in the window
        let unbounded = self.chains_unbounded_beyond_window();
        let mut reliable = BTreeMap::new();
        for n in lo..=hi {
            let mut ok = true;
            'deg: for m in [n - 1, n, n + 1] {
                let j_reach = (m.abs() + max_cell_deg) / 2 + 2;
                for j in -j_reach..=j_reach {
                    if !variant.j_in_range(j) {
                        continue;
                    }
                    let d = m - 2 * j;
                    if d < 0 {
                        continue;
                    }
                    let nonzero_possible = d == 0 || d <= max_cell_deg || unbounded;
                    if !nonzero_possible {
                        continue;
                    }
                    // within-window pieces have d <= n_max and jmin <= j <= jmax;
                    // for DG also d <= max_cell_deg by construction
                    let present = d <= n_max && j >= jmin && j <= jmax;
                    if !present {
                        // zero groups are fine to omit
                        let zero = if d == 0 {
                            false
                        } else if d <= max_cell_deg {
                            (d as usize) <= self.n_max && self.spaces[d as usize].dim() == 0 && !dg
                        } else {
                            !unbounded
                        };
                        if !zero {
                            ok = false;
                            break 'deg;
                        }
                    }
                }
            }
            reliable.insert(n, ok);
        }
        Ok(CyclicWindow {
            alg: self.ch.alg,
            normalized: self.ch.normalized,
            variant,
            n_max: self.n_max,
            weight: self.weight,
            complex,
            layout: per_degree
                .iter()
                .map(|(n, ps)| (*n, ps.iter().map(|p| (p.j, p.q, p.offset, p.dim)).collect()))
                .collect(),
            reliable,
        })
    }
}

/// Report produced by `cyclic_homology`: tables, S-map data on homology
/// and the exactness audit of Connes' sequence.
#[derive(Serialize)]
pub struct CyclicReport {
    pub hh: HomologyTable,
    pub hc: HomologyTable,
    /// per degree `q`: rank data of `S: HC_q -> HC_{q-2}` (audit mode)
    pub s_maps: Vec<SMapInfo>,
    pub connes: Vec<ConnesNode>,
    /// exactness maps need field coefficients; set when they were skipped
    pub ring_limited: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SMapInfo {
    pub degree: i64,
    pub weight: Option<i64>,
    pub rank: usize,
    pub src_dim: usize,
    pub tgt_dim: usize,
    pub injective: bool,
    pub surjective: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnesNode {
    pub at: String,
    pub degree: i64,
    pub weight: Option<i64>,
    pub exact: bool,
}

/// HP stabilization certificate.
#[derive(Clone, Debug, Serialize)]
pub struct HpCertificate {
    pub parity: u8,
    pub weight: Option<i64>,
    pub stabilized: bool,
    /// degree whose HC value is reported as HP
    pub at_degree: i64,
    pub how: String,
}

#[derive(Serialize)]
pub struct HpReport {
    pub hp: HomologyTable,
    pub certificates: Vec<HpCertificate>,
}

pub fn weights_to_run(alg: &Algebra, window: Option<(i64, i64)>) -> Vec<Option<i64>> {
    if alg.is_graded() && !alg.dg {
        let (lo, hi) = window.unwrap_or((0, alg.grading.iter().copied().max().unwrap_or(0)));
        (lo..=hi).map(Some).collect()
    } else {
        vec![None]
    }
}

/// Hochschild homology table, per internal weight for graded algebras.
pub fn hochschild_homology(
    alg: &Algebra,
    n_max: usize,
    normalized: bool,
    window: Option<(i64, i64)>,
) -> Result<HomologyTable> {
    let mut table = HomologyTable::new("HH");
    for w in weights_to_run(alg, window) {
        let eng = Engine::new(alg, n_max + 1, normalized, w, None)?;
        let win = eng.window(Variant::Cyclic, Some(0))?;
        let h = win.complex.homology_all()?;
        for (n, (m, _)) in h {
            if n > n_max as i64 {
                continue;
            }
            table.push(n, w, m, true);
        }
        // degrees with no cells at all are genuinely zero
        for n in 0..=n_max as i64 {
            if table.get(n, w).is_none() {
                table.push(n, w, ModuleDescriptor::zero(alg.ring), true);
            }
        }
    }
    Ok(table)
}

/// Cyclic homology with S-maps and the Connes exactness audit.
///
/// `audit` controls whether homology-level maps are computed; tables are
/// produced either way.
pub fn cyclic_homology(
    alg: &Algebra,
    n_max: usize,
    normalized: bool,
    window: Option<(i64, i64)>,
    audit: bool,
) -> Result<CyclicReport> {
    let run_audit = audit && alg.ring.is_field();
    let mut hh = HomologyTable::new("HH");
    let mut hc = HomologyTable::new("HC");
    let mut s_maps = Vec::new();
    let mut connes = Vec::new();
    for w in weights_to_run(alg, window) {
        let eng = Engine::new(alg, n_max, normalized, w, None)?;
        let cc = eng.window(Variant::Cyclic, None)?;
        let hcw = cc.complex.homology_all()?;
        let hh_win = eng.window(Variant::Cyclic, Some(0))?;
        let hhw = hh_win.complex.homology_all()?;
        for (n, (m, _)) in &hhw {
            hh.push(*n, w, m.clone(), *n < eng.n_max as i64);
        }
        for n in 0..n_max as i64 {
            if hh.get(n, w).is_none() {
                hh.push(n, w, ModuleDescriptor::zero(alg.ring), true);
            }
        }
        for (n, (m, _)) in &hcw {
            if *n < 0 {
                continue;
            }
            let rel = *cc.reliable.get(n).unwrap_or(&false);
            hc.push(*n, w, m.clone(), rel);
        }
        for n in 0..n_max as i64 {
            if hc.get(n, w).is_none() {
                hc.push(n, w, ModuleDescriptor::zero(alg.ring), n + 1 < n_max as i64);
            }
        }
        if run_audit {
            let (s, c) = connes_audit(&eng, &cc, &hh_win.complex, w)?;
            s_maps.extend(s);
            connes.extend(c);
        }
    }
    Ok(CyclicReport {
        hh,
        hc,
        s_maps,
        connes,
        ring_limited: !alg.ring.is_field(),
    })
}

/// The S chain map `CC -> CC[2]` (drop the `j = 0` component, shift `j`).
fn s_chain_map(cc: &CyclicWindow) -> (ChainComplex, ChainMap) {
    let ring = cc.complex.ring;
    let target = cc.complex.shift(2);
    let mut mats = BTreeMap::new();
    for (n, pieces) in &cc.layout {
        let tgt_pieces = cc.layout.get(&(n - 2));
        let mut triples: Vec<(usize, usize, Elem)> = Vec::new();
        if let Some(tps) = tgt_pieces {
            for (j, q, off, dim) in pieces {
                if *j < 1 {
                    continue;
                }
                if let Some(tp) = tps.iter().find(|t| t.0 == j - 1 && t.1 == *q) {
                    for i in 0..*dim {
                        triples.push((tp.2 + i, off + i, ring.one()));
                    }
                }
            }
        }
        let rows = cc.complex.dim(n - 2);
        let cols = cc.complex.dim(*n);
        mats.insert(*n, SparseMatrix::from_triples_accum(ring, rows, cols, triples));
    }
    (target, ChainMap { mats })
}

/// Exactness audit of `HH_q -> HC_q -> HC_{q-2} -> HH_{q-1}`.
fn connes_audit(
    eng: &Engine,
    cc: &CyclicWindow,
    hh_cplx: &ChainComplex,
    w: Option<i64>,
) -> Result<(Vec<SMapInfo>, Vec<ConnesNode>)> {
    let ring = cc.complex.ring;
    let (t2, smap) = s_chain_map(cc);
    smap.validate(&cc.complex, &t2)?;
    let mut imats = BTreeMap::new();
    for (n, pieces) in &cc.layout {
        let mut triples = Vec::new();
        if let Some(p) = pieces.iter().find(|p| p.0 == 0) {
            for i in 0..p.3.min(hh_cplx.dim(*n)) {
                triples.push((p.2 + i, i, ring.one()));
            }
        }
        imats.insert(
            *n,
            SparseMatrix::from_triples_accum(ring, cc.complex.dim(*n), hh_cplx.dim(*n), triples),
        );
    }
    let imap = ChainMap { mats: imats };
    imap.validate(hh_cplx, &cc.complex)?;

    let top = eng.n_max as i64 - 2;
    let mut bases: BTreeMap<i64, (HomologyBasis, HomologyBasis, HomologyBasis)> = BTreeMap::new();
    for n in 0..=top {
        bases.insert(
            n,
            (
                hh_cplx.homology_basis(n)?,
                cc.complex.homology_basis(n)?,
                t2.homology_basis(n)?,
            ),
        );
    }
    let mut smaps = Vec::new();
    let mut nodes = Vec::new();
    for n in 0..=top {
        let (hb, cb, tb) = &bases[&n];
        let i_star = hh_cplx.induced_on_homology(&cc.complex, &imap, n, hb, cb)?;
        let s_star = cc.complex.induced_on_homology(&t2, &smap, n, cb, tb)?;
        let s_rank = solve::rank(&s_star)?;
        smaps.push(SMapInfo {
            degree: n,
            weight: w,
            rank: s_rank,
            src_dim: cb.reps.len(),
            tgt_dim: tb.reps.len(),
            injective: s_rank == cb.reps.len(),
            surjective: s_rank == tb.reps.len(),
        });
        let comp = s_star.mul(&i_star);
        let exact_mid = comp.is_zero() && solve::rank(&i_star)? + s_rank == cb.reps.len();
        nodes.push(ConnesNode {
            at: "HC".into(),
            degree: n,
            weight: w,
            exact: exact_mid,
        });
        if n >= 1 {
            let hb_prev = &bases[&(n - 1)].0;
            let boundary = connecting_map(cc, hh_cplx, n, tb, hb_prev)?;
            let brank = solve::rank(&boundary)?;
            let comp2 = boundary.mul(&s_star);
            let exact = comp2.is_zero() && s_rank + brank == tb.reps.len();
            nodes.push(ConnesNode {
                at: "HC->HH".into(),
                degree: n,
                weight: w,
                exact,
            });
            let (hb1, cb1, _) = &bases[&(n - 1)];
            let i1 = hh_cplx.induced_on_homology(&cc.complex, &imap, n - 1, hb1, cb1)?;
            let comp3 = i1.mul(&boundary);
            let exact3 = comp3.is_zero() && brank + solve::rank(&i1)? == hb1.reps.len();
            nodes.push(ConnesNode {
                at: "HH".into(),
                degree: n - 1,
                weight: w,
                exact: exact3,
            });
        }
    }
    Ok((smaps, nodes))
}

/// Connecting map of `0 -> CH -> CC -> CC[2] -> 0` on homology:
/// `HC_{n-2} -> HH_{n-1}`, computed by lifting cycles along the section
/// `(j, q) -> (j+1, q)` and applying the total differential.
fn connecting_map(
    cc: &CyclicWindow,
    hh_cplx: &ChainComplex,
    n: i64,
    tb: &HomologyBasis,
    hb_prev: &HomologyBasis,
) -> Result<SparseMatrix> {
    let ring = cc.complex.ring;
    let tgt_pieces = &cc.layout[&n];
    let src_pieces = &cc.layout[&(n - 2)];
    let lift = |v: &[(u32, Elem)]| -> Vec<(u32, Elem)> {
        let mut out = Vec::new();
        for (r, c) in v {
            let r = *r as usize;
            let (j, q, off, _) = src_pieces
                .iter()
                .find(|(_, _, off, dim)| r >= *off && r < off + dim)
                .expect("cycle coordinate inside the layout");
            let loc = r - off;
            let tp = tgt_pieces
                .iter()
                .find(|t| t.0 == j + 1 && t.1 == *q)
                .expect("lifted piece exists");
            out.push(((tp.2 + loc) as u32, c.clone()));
        }
        out.sort_by_key(|(r, _)| *r);
        out
    };
    let d_n = cc.complex.diff(n);
    let ch_piece = cc.layout[&(n - 1)]
        .iter()
        .find(|p| p.0 == 0)
        .copied();
    let ch_dim = hh_cplx.dim(n - 1);
    let ch_off = ch_piece.map(|p| p.2).unwrap_or(0);
    let mut img = SparseMatrix::zero(ring, ch_dim, tb.reps.len());
    for (j, rep) in tb.reps.iter().enumerate() {
        let lifted = lift(rep);
        let dv = d_n.mul_vec(&lifted);
        let mut col = Vec::new();
        for (r, c) in dv {
            let r = r as usize;
            if r < ch_off || r >= ch_off + ch_dim {
                return Err(Error::invariant(
                    "connecting map escapes the Hochschild component",
                ));
            }
            col.push(((r - ch_off) as u32, c));
        }
        img.set_col(j, col);
    }
    let dch = hh_cplx.diff(n);
    let mut ambient = SparseMatrix::zero(ring, ch_dim, hb_prev.reps.len() + dch.cols);
    for (j, v) in hb_prev.reps.iter().enumerate() {
        ambient.set_col(j, v.clone());
    }
    for j in 0..dch.cols {
        ambient.set_col(hb_prev.reps.len() + j, dch.col(j).to_vec());
    }
    let sols = solve::solve_cols(&ambient, &img)?;
    let mut triples = Vec::new();
    for (j, s) in sols.iter().enumerate() {
        let s = s
            .as_ref()
            .ok_or_else(|| Error::invariant("connecting image is not a CH cycle class"))?;
        for (r, v) in s {
            if (*r as usize) < hb_prev.reps.len() {
                triples.push((*r as usize, j, v.clone()));
            }
        }
    }
    Ok(SparseMatrix::from_triples_accum(
        ring,
        hb_prev.reps.len(),
        tb.reps.len(),
        triples,
    ))
}

/// Periodic cyclic homology by S-stabilization, with certificates.
///
/// `audit` enables the direct S-isomorphism route; without it only the
/// Connes-forced route (vanishing HH tail) can certify stabilization.
pub fn periodic_cyclic(
    alg: &Algebra,
    n_max: usize,
    normalized: bool,
    window: Option<(i64, i64)>,
    audit: bool,
) -> Result<HpReport> {
    let report = cyclic_homology(alg, n_max, normalized, window, audit)?;
    Ok(hp_from_report(alg, &report, n_max, window))
}

pub fn hp_from_report(
    alg: &Algebra,
    report: &CyclicReport,
    n_max: usize,
    window: Option<(i64, i64)>,
) -> HpReport {
    let mut hp = HomologyTable::new("HP");
    let mut certs = Vec::new();
    for w in weights_to_run(alg, window) {
        for parity in [0u8, 1u8] {
            let cert = stabilization_certificate(report, parity, w, n_max as i64);
            if cert.stabilized {
                let m = report
                    .hc
                    .get(cert.at_degree, w)
                    .map(|e| e.module.clone())
                    .unwrap_or_else(|| ModuleDescriptor::zero(alg.ring));
                hp.push(parity as i64, w, m, true);
            }
            certs.push(cert);
        }
    }
    HpReport {
        hp,
        certificates: certs,
    }
}

/// Certify the stable HC value for one parity: either two consecutive
/// observed S-isomorphisms, or the Connes-forced tail when HH vanishes in
/// all higher reliable degrees.
pub fn stabilization_certificate(
    report: &CyclicReport,
    parity: u8,
    w: Option<i64>,
    n_max: i64,
) -> HpCertificate {
    let top = n_max - 2;
    let iso = |q: i64| -> bool {
        report
            .s_maps
            .iter()
            .any(|s| s.degree == q && s.weight == w && s.injective && s.surjective)
    };
    let mut qq = top;
    while qq >= 0 && (qq % 2) as u8 != parity % 2 {
        qq -= 1;
    }
    if qq >= 4 && iso(qq) && iso(qq - 2) {
        return HpCertificate {
            parity,
            weight: w,
            stabilized: true,
            at_degree: qq - 4,
            how: format!("S is an isomorphism at degrees {} and {}", qq, qq - 2),
        };
    }
    // vanishing-tail route: HH_m = 0 reliably for m in [t, n_max - 1]
    let mut t = n_max;
    let mut m = n_max - 1;
    while m >= 1 {
        let z = report
            .hh
            .get(m, w)
            .map(|e| e.module.is_zero() && e.reliable)
            .unwrap_or(false);
        if z {
            t = m;
            m -= 1;
        } else {
            break;
        }
    }
    // S: HC_q -> HC_{q-2} is forced iso when HH_q = HH_{q-1} = 0, so for
    // q >= t + 1; HC_d is stable for d >= t - 1
    if t + 1 <= top {
        let mut d = top;
        while d >= 0 && ((d % 2) as u8 != parity % 2 || d > top - 0) {
            d -= 1;
        }
        while d >= 0 && (d % 2) as u8 != parity % 2 {
            d -= 1;
        }
        if d >= t - 1 && d >= 0 {
            return HpCertificate {
                parity,
                weight: w,
                stabilized: true,
                at_degree: d,
                how: format!(
                    "HH vanishes in reliable degrees {} .. {}, forcing S-isomorphisms",
                    t,
                    n_max - 1
                ),
            };
        }
    }
    HpCertificate {
        parity,
        weight: w,
        stabilized: false,
        at_degree: -1,
        how: "no stabilization inside the window".into(),
    }
}

/// Negative cyclic homology table with the window SES check.
#[derive(Serialize)]
pub struct NegativeReport {
    pub hc_minus: HomologyTable,
    /// per total degree: the periodic window splits cell-wise as
    /// `CC^-_n (+) (shifted CC)_n`
    pub ses_cellwise: Vec<(i64, bool)>,
}

pub fn negative_cyclic(
    alg: &Algebra,
    n_max: usize,
    c_max: usize,
    normalized: bool,
    window: Option<(i64, i64)>,
) -> Result<NegativeReport> {
    let mut table = HomologyTable::new("HC-");
    let mut ses = Vec::new();
    for w in weights_to_run(alg, window) {
        let eng = Engine::new(alg, n_max, normalized, w, None)?;
        let neg = eng.window(Variant::Negative, Some(c_max as i64))?;
        let h = neg.complex.homology_all()?;
        for (n, (m, _)) in h {
            let rel = *neg.reliable.get(&n).unwrap_or(&false);
            table.push(n, w, m, rel);
        }
        let cp = eng.window(Variant::Periodic, Some(c_max as i64))?;
        for (n, pieces) in &cp.layout {
            let neg_dim: usize = pieces.iter().filter(|p| p.0 <= 0).map(|p| p.3).sum();
            let pos_dim: usize = pieces.iter().filter(|p| p.0 > 0).map(|p| p.3).sum();
            let ok = neg_dim + pos_dim == cp.complex.dim(*n) && neg_dim == neg.complex.dim(*n);
            ses.push((*n, ok));
        }
    }
    Ok(NegativeReport {
        hc_minus: table,
        ses_cellwise: ses,
    })
}

/// Periodic window homology (raw, window-qualified); both sides of the
/// sector comparisons are computed through this.
pub fn periodic_window<'a>(
    alg: &'a Algebra,
    n_max: usize,
    normalized: bool,
    weight: Option<i64>,
) -> Result<CyclicWindow<'a>> {
    let eng = Engine::new(alg, n_max, normalized, weight, None)?;
    eng.window(Variant::Periodic, None)
}
