//! Smith normal form over `Z` and over `Z/p^k`.
//!
//! `Z/p^k` is not a domain, but it is a quotient of the DVR `Z_p`, so
//! the usual algorithm works once pivots are chosen by minimal
//! p-valuation: every other entry is then exactly divisible by the
//! pivot and a single clearing pass suffices.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::descriptor::ModuleDescriptor;
use crate::error::{Error, Result};
use crate::ring::{Elem, Ring};
use crate::sparse::SparseMatrix;

pub struct SmithNormalForm {
    pub ring: Ring,
    /// Diagonal entries of `D`, in the divisibility chain order. Includes
    /// trailing zeros up to `min(rows, cols)`.
    pub diag: Vec<Elem>,
    pub u: SparseMatrix,
    pub v: SparseMatrix,
    pub u_inv: SparseMatrix,
    pub v_inv: SparseMatrix,
    pub rows: usize,
    pub cols: usize,
}

impl SmithNormalForm {
    pub fn d_matrix(&self) -> SparseMatrix {
        let ring = self.ring;
        SparseMatrix::from_triples_accum(
            ring,
            self.rows,
            self.cols,
            self.diag
                .iter()
                .enumerate()
                .filter(|(_, e)| !ring.is_zero(e))
                .map(|(i, e)| (i, i, e.clone())),
        )
    }

    /// Number of nonzero diagonal entries.
    pub fn rank_nonzero(&self) -> usize {
        self.diag.iter().filter(|e| !self.ring.is_zero(e)).count()
    }
}

/// Dense working form with unimodular transforms on both sides.
struct Work {
    #[allow(dead_code)]
    ring: Ring,
    r: usize,
    c: usize,
    a: Vec<BigInt>,    // row-major r x c
    u: Vec<BigInt>,    // r x r
    ui: Vec<BigInt>,   // r x r
    v: Vec<BigInt>,    // c x c
    vi: Vec<BigInt>,   // c x c
    modulus: Option<BigInt>,
}

impl Work {
    fn reduce(&mut self, x: BigInt) -> BigInt {
        match &self.modulus {
            Some(m) => ((x % m) + m) % m,
            None => x,
        }
    }

    fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.a[i * self.c + j]
    }

    fn row_swap(&mut self, i1: usize, i2: usize) {
        if i1 == i2 {
            return;
        }
        for j in 0..self.c {
            self.a.swap(i1 * self.c + j, i2 * self.c + j);
        }
        for j in 0..self.r {
            self.u.swap(i1 * self.r + j, i2 * self.r + j);
            // column swap on the inverse
            self.ui.swap(j * self.r + i1, j * self.r + i2);
        }
    }

    fn col_swap(&mut self, j1: usize, j2: usize) {
        if j1 == j2 {
            return;
        }
        for i in 0..self.r {
            self.a.swap(i * self.c + j1, i * self.c + j2);
        }
        for i in 0..self.c {
            self.v.swap(i * self.c + j1, i * self.c + j2);
            self.vi.swap(j1 * self.c + i, j2 * self.c + i);
        }
    }

    /// row i1 += q * row i2
    fn row_add(&mut self, i1: usize, i2: usize, q: &BigInt) {
        for j in 0..self.c {
            let x = &self.a[i1 * self.c + j] + q * &self.a[i2 * self.c + j];
            self.a[i1 * self.c + j] = self.reduce(x);
        }
        for j in 0..self.r {
            let x = &self.u[i1 * self.r + j] + q * &self.u[i2 * self.r + j];
            self.u[i1 * self.r + j] = self.reduce(x);
            // inverse: col i2 -= q * col i1
            let y = &self.ui[j * self.r + i2] - q * &self.ui[j * self.r + i1];
            self.ui[j * self.r + i2] = self.reduce(y);
        }
    }

    /// col j1 += q * col j2
    fn col_add(&mut self, j1: usize, j2: usize, q: &BigInt) {
        for i in 0..self.r {
            let x = &self.a[i * self.c + j1] + q * &self.a[i * self.c + j2];
            self.a[i * self.c + j1] = self.reduce(x);
        }
        for i in 0..self.c {
            let x = &self.v[i * self.c + j1] + q * &self.v[i * self.c + j2];
            self.v[i * self.c + j1] = self.reduce(x);
            let y = &self.vi[j2 * self.c + i] - q * &self.vi[j1 * self.c + i];
            self.vi[j2 * self.c + i] = self.reduce(y);
        }
    }

    /// row i *= unit (unit invertible in the ring)
    fn row_scale(&mut self, i: usize, unit: &BigInt, unit_inv: &BigInt) {
        for j in 0..self.c {
            let x = unit * &self.a[i * self.c + j];
            self.a[i * self.c + j] = self.reduce(x);
        }
        for j in 0..self.r {
            let x = unit * &self.u[i * self.r + j];
            self.u[i * self.r + j] = self.reduce(x);
            let y = unit_inv * &self.ui[j * self.r + i];
            self.ui[j * self.r + i] = self.reduce(y);
        }
    }
}

fn valuation(x: &BigInt, p: u64) -> u32 {
    debug_assert!(!x.is_zero());
    let p = BigInt::from(p);
    let mut v = 0;
    let mut x = x.clone();
    while (&x % &p).is_zero() {
        x /= &p;
        v += 1;
    }
    v
}

/// Pivot quality: smaller is better. Over `Z` the absolute value, over
/// `Z/p^k` the p-valuation.
fn pivot_weight(ring: &Ring, x: &BigInt) -> BigInt {
    match ring {
        Ring::Integers => x.abs(),
        Ring::CyclicRing(p, _) | Ring::PrimeField(p) => BigInt::from(valuation(x, *p)),
        Ring::Rationals => unreachable!("SNF over a field is not used"),
    }
}

pub fn smith_normal_form(m: &SparseMatrix) -> Result<SmithNormalForm> {
    let ring = m.ring;
    match ring {
        Ring::Integers | Ring::CyclicRing(..) | Ring::PrimeField(_) => {}
        Ring::Rationals => {
            return Err(Error::UnsupportedRing(
                "Smith normal form needs Integers or a cyclic ring".into(),
            ))
        }
    }
    let (r, c) = (m.rows, m.cols);
    let modulus = ring.modulus().map(BigInt::from);
    let mut w = Work {
        ring,
        r,
        c,
        a: vec![BigInt::zero(); r * c],
        u: vec![BigInt::zero(); r * r],
        ui: vec![BigInt::zero(); r * r],
        v: vec![BigInt::zero(); c * c],
        vi: vec![BigInt::zero(); c * c],
        modulus,
    };
    for i in 0..r {
        w.u[i * r + i] = BigInt::from(1);
        w.ui[i * r + i] = BigInt::from(1);
    }
    for j in 0..c {
        w.v[j * c + j] = BigInt::from(1);
        w.vi[j * c + j] = BigInt::from(1);
    }
    for (i, j, e) in m.entries() {
        w.a[i * c + j] = match e {
            Elem::F(x) => BigInt::from(*x),
            Elem::Z(x) => x.clone(),
            Elem::Q(_) => unreachable!(),
        };
    }

    let n = r.min(c);
    for k in 0..n {
        loop {
            // deterministic pivot: minimal weight, ties broken by (row, col)
            let mut best: Option<(BigInt, usize, usize)> = None;
            for i in k..r {
                for j in k..c {
                    let x = w.at(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    let weight = pivot_weight(&ring, x);
                    match &best {
                        Some((bw, _, _)) if *bw <= weight => {}
                        _ => best = Some((weight, i, j)),
                    }
                }
            }
            let Some((_, pi, pj)) = best else {
                // submatrix is zero; done
                break;
            };
            w.row_swap(k, pi);
            w.col_swap(k, pj);

            // clear column k
            let mut dirty = false;
            for i in k + 1..r {
                if w.at(i, k).is_zero() {
                    continue;
                }
                let (q, rem) = num_integer::Integer::div_rem(w.at(i, k), w.at(k, k));
                w.row_add(i, k, &(-q));
                if !rem.is_zero() && w.modulus.is_none() {
                    dirty = true;
                }
                if w.modulus.is_some() && !w.at(i, k).is_zero() {
                    dirty = true;
                }
            }
            // clear row k
            for j in k + 1..c {
                if w.at(k, j).is_zero() {
                    continue;
                }
                let (q, rem) = num_integer::Integer::div_rem(w.at(k, j), w.at(k, k));
                w.col_add(j, k, &(-q));
                if !rem.is_zero() && w.modulus.is_none() {
                    dirty = true;
                }
                if w.modulus.is_some() && !w.at(k, j).is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // row k and column k clear; enforce divisibility of the rest
            let mut offender = None;
            'scan: for i in k + 1..r {
                for j in k + 1..c {
                    if !w.at(i, j).is_zero() {
                        let rem = w.at(i, j) % w.at(k, k);
                        if !rem.is_zero() {
                            offender = Some(i);
                            break 'scan;
                        }
                    }
                }
            }
            if let Some(i) = offender {
                w.row_add(k, i, &BigInt::from(1));
                continue;
            }
            break;
        }
    }

    // normalize pivots: positive over Z, exact p-power over Z/p^k
    for k in 0..n {
        let x = w.at(k, k).clone();
        if x.is_zero() {
            continue;
        }
        match ring {
            Ring::Integers => {
                if x.is_negative() {
                    let m1 = BigInt::from(-1);
                    w.row_scale(k, &m1.clone(), &m1);
                }
            }
            Ring::CyclicRing(p, _) | Ring::PrimeField(p) => {
                let e = valuation(&x, p);
                let pe = BigInt::from(p).pow(e);
                let unit = &x / &pe;
                // invert the unit mod p^k
                let md = w.modulus.clone().expect("finite ring");
                let uinv = modinv_big(&unit, &md);
                w.row_scale(k, &uinv, &unit);
            }
            _ => unreachable!(),
        }
    }

    let diag: Vec<Elem> = (0..n).map(|k| ring.from_bigint(w.at(k, k))).collect();
    let to_sparse = |data: &[BigInt], rows: usize, cols: usize| {
        SparseMatrix::from_triples_accum(
            ring,
            rows,
            cols,
            (0..rows).flat_map(|i| {
                (0..cols).filter_map(move |j| {
                    let x = &data[i * cols + j];
                    if x.is_zero() {
                        None
                    } else {
                        Some((i, j, ring.from_bigint(x)))
                    }
                })
            }),
        )
    };
    Ok(SmithNormalForm {
        ring,
        diag,
        u: to_sparse(&w.u, r, r),
        v: to_sparse(&w.v, c, c),
        u_inv: to_sparse(&w.ui, r, r),
        v_inv: to_sparse(&w.vi, c, c),
        rows: r,
        cols: c,
    })
}

fn modinv_big(a: &BigInt, m: &BigInt) -> BigInt {
    let e = num_integer::Integer::extended_gcd(&a.mod_floor_ref(m), m);
    assert!(e.gcd == BigInt::from(1), "unit expected");
    ((e.x % m) + m) % m
}

trait ModFloorRef {
    fn mod_floor_ref(&self, m: &BigInt) -> BigInt;
}
impl ModFloorRef for BigInt {
    fn mod_floor_ref(&self, m: &BigInt) -> BigInt {
        ((self % m) + m) % m
    }
}

/// Cokernel of a matrix as a module descriptor.
pub fn cokernel(m: &SparseMatrix) -> Result<ModuleDescriptor> {
    let ring = m.ring;
    let snf = smith_normal_form(m)?;
    descriptor_from_presentation(ring, m.rows, &snf.diag)
}

/// Descriptor of `R^rows / <diagonal relations>`.
pub fn descriptor_from_presentation(
    #[allow(dead_code)]
    ring: Ring,
    rows: usize,
    diag: &[Elem],
) -> Result<ModuleDescriptor> {
    let mut free = rows - diag.len();
    let mut torsion = Vec::new();
    match ring {
        Ring::Integers => {
            for e in diag {
                let x = match e {
                    Elem::Z(x) => x.clone(),
                    _ => unreachable!(),
                };
                if x.is_zero() {
                    free += 1;
                } else if x.abs() != BigInt::from(1) {
                    torsion.push(x.abs());
                }
            }
        }
        Ring::CyclicRing(p, k) => {
            for e in diag {
                let Elem::F(x) = e else { unreachable!() };
                if *x == 0 {
                    free += 1; // a full-precision cyclic summand survives
                } else {
                    let v = Ring::CyclicRing(p, k).valuation(e).expect("nonzero");
                    if v > 0 {
                        // quotient Z/p^k by p^v gives Z/p^v
                        torsion.push(BigInt::from(p).pow(v));
                    }
                }
            }
        }
        Ring::PrimeField(_) | Ring::Rationals => {
            for e in diag {
                if ring.is_zero(e) {
                    free += 1;
                }
            }
        }
    }
    torsion.sort();
    Ok(ModuleDescriptor {
        ring,
        free_rank: free,
        torsion,
    })
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

    fn check_umv(m0: &SparseMatrix, snf: &SmithNormalForm) {
        let umv = snf.u.mul(m0).mul(&snf.v);
        assert_eq!(umv, snf.d_matrix(), "U M V != D");
        let id_r = SparseMatrix::identity(m0.ring, m0.rows);
        let id_c = SparseMatrix::identity(m0.ring, m0.cols);
        assert_eq!(snf.u.mul(&snf.u_inv), id_r);
        assert_eq!(snf.v.mul(&snf.v_inv), id_c);
    }

    #[test]
    fn already_diagonal() {
        let a = m(Ring::Integers, 2, 2, &[(0, 0, 3), (1, 1, 6)]);
        let snf = smith_normal_form(&a).unwrap();
        assert_eq!(
            snf.diag,
            vec![Ring::Integers.from_i64(3), Ring::Integers.from_i64(6)]
        );
        check_umv(&a, &snf);
    }

    #[test]
    fn derived_two_by_two() {
        // [[2,4],[6,8]]: gcd 2, |det| = 8, so D = diag(2, 4)
        let a = m(
            Ring::Integers,
            2,
            2,
            &[(0, 0, 2), (0, 1, 4), (1, 0, 6), (1, 1, 8)],
        );
        let snf = smith_normal_form(&a).unwrap();
        assert_eq!(
            snf.diag,
            vec![Ring::Integers.from_i64(2), Ring::Integers.from_i64(4)]
        );
        check_umv(&a, &snf);
    }

    #[test]
    fn cyclic_ring_p() {
        // [[p]] over Z/p^2 stays [[p]]
        let r = Ring::CyclicRing(5, 2);
        let a = m(r, 1, 1, &[(0, 0, 5)]);
        let snf = smith_normal_form(&a).unwrap();
        assert_eq!(snf.diag, vec![Elem::F(5)]);
        check_umv(&a, &snf);
    }

    #[test]
    fn cyclic_ring_mixed_valuations() {
        let r = Ring::CyclicRing(2, 3); // Z/8
        let a = m(r, 2, 2, &[(0, 0, 4), (0, 1, 2), (1, 0, 6), (1, 1, 3)]);
        let snf = smith_normal_form(&a).unwrap();
        check_umv(&a, &snf);
        // first divisor must be a unit (entry 3 has valuation 0)
        assert!(r.is_unit(&snf.diag[0]));
    }

    #[test]
    fn divisibility_chain_over_z() {
        let a = m(
            Ring::Integers,
            4,
            4,
            &[
                (0, 0, -6),
                (0, 1, 111),
                (0, 2, -36),
                (0, 3, 6),
                (1, 0, 5),
                (1, 1, -672),
                (1, 2, 210),
                (1, 3, 74),
                (2, 1, -255),
                (2, 2, 81),
                (2, 3, 24),
                (3, 0, -7),
                (3, 1, 255),
                (3, 2, -81),
                (3, 3, -10),
            ],
        );
        let snf = smith_normal_form(&a).unwrap();
        check_umv(&a, &snf);
        let d: Vec<String> = snf
            .diag
            .iter()
            .map(|e| Ring::Integers.elem_to_string(e))
            .collect();
        assert_eq!(d, vec!["1", "3", "21", "0"]);
    }

    #[test]
    fn cokernel_descriptor() {
        // coker(x2 on Z) = Z/2
        let a = m(Ring::Integers, 1, 1, &[(0, 0, 2)]);
        let d = cokernel(&a).unwrap();
        assert_eq!(d.to_string(), "Z/2");
    }
}
