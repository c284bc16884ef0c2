//! Coefficient rings and exact ring elements.
//!
//! Four rings are supported: the prime fields `F_p`, the cyclic rings
//! `Z/p^k` (the Witt vectors of `F_p` at finite precision), the integers
//! and the rationals. All arithmetic is exact; there is no floating
//! point anywhere in the crate.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A supported coefficient ring.
///
/// `PrimeField(p)` and `CyclicRing(p, 1)` are the same arithmetic; the
/// distinction is kept because several operations require a field.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Ring {
    PrimeField(u64),
    /// `Z/p^k`, the ring of Witt vectors of `F_p` truncated at precision `k`.
    CyclicRing(u64, u32),
    Integers,
    Rationals,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Ring {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Ring::PrimeField(p) => {
                if !is_prime(p) {
                    return Err(Error::input(format!("{p} is not prime")));
                }
            }
            Ring::CyclicRing(p, k) => {
                if !is_prime(p) {
                    return Err(Error::input(format!("{p} is not prime")));
                }
                if k < 1 {
                    return Err(Error::input("precision k must be at least 1"));
                }
                let mut m = 1u64;
                for _ in 0..k {
                    m = m
                        .checked_mul(p)
                        .ok_or_else(|| Error::input(format!("p^k overflows u64 for p={p}, k={k}")))?;
                }
                let _ = m;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn is_field(&self) -> bool {
        matches!(self, Ring::PrimeField(_) | Ring::Rationals)
            || matches!(self, Ring::CyclicRing(_, 1))
    }

    /// Residue characteristic: `p` for `F_p` and `Z/p^k`, 0 otherwise.
    pub fn characteristic(&self) -> u64 {
        match *self {
            Ring::PrimeField(p) | Ring::CyclicRing(p, _) => p,
            _ => 0,
        }
    }

    /// Modulus `p^k` when the ring is finite cyclic.
    pub fn modulus(&self) -> Option<u64> {
        match *self {
            Ring::PrimeField(p) => Some(p),
            Ring::CyclicRing(p, k) => {
                let mut m = 1u64;
                for _ in 0..k {
                    m *= p;
                }
                Some(m)
            }
            _ => None,
        }
    }

    pub fn zero(&self) -> Elem {
        match self {
            Ring::Integers => Elem::Z(BigInt::zero()),
            Ring::Rationals => Elem::Q(BigRational::zero()),
            _ => Elem::F(0),
        }
    }

    pub fn one(&self) -> Elem {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Elem {
        match self {
            Ring::Integers => Elem::Z(BigInt::from(v)),
            Ring::Rationals => Elem::Q(BigRational::from_integer(BigInt::from(v))),
            _ => {
                let m = self.modulus().expect("finite ring") as i128;
                Elem::F((((v as i128) % m + m) % m) as u64)
            }
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> Elem {
        match self {
            Ring::Integers => Elem::Z(v.clone()),
            Ring::Rationals => Elem::Q(BigRational::from_integer(v.clone())),
            _ => {
                let m = BigInt::from(self.modulus().expect("finite ring"));
                let r = v.mod_floor(&m);
                Elem::F(r.try_into().expect("reduced residue fits u64"))
            }
        }
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        match (self, a, b) {
            (Ring::Integers, Elem::Z(x), Elem::Z(y)) => Elem::Z(x + y),
            (Ring::Rationals, Elem::Q(x), Elem::Q(y)) => Elem::Q(x + y),
            (_, Elem::F(x), Elem::F(y)) => {
                let m = self.modulus().expect("finite ring") as u128;
                Elem::F(((*x as u128 + *y as u128) % m) as u64)
            }
            _ => panic!("ring/element mismatch in add"),
        }
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        match (self, a) {
            (Ring::Integers, Elem::Z(x)) => Elem::Z(-x),
            (Ring::Rationals, Elem::Q(x)) => Elem::Q(-x),
            (_, Elem::F(x)) => {
                let m = self.modulus().expect("finite ring");
                Elem::F(if *x == 0 { 0 } else { m - *x })
            }
            _ => panic!("ring/element mismatch in neg"),
        }
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        match (self, a, b) {
            (Ring::Integers, Elem::Z(x), Elem::Z(y)) => Elem::Z(x * y),
            (Ring::Rationals, Elem::Q(x), Elem::Q(y)) => Elem::Q(x * y),
            (_, Elem::F(x), Elem::F(y)) => {
                let m = self.modulus().expect("finite ring") as u128;
                Elem::F(((*x as u128 * *y as u128) % m) as u64)
            }
            _ => panic!("ring/element mismatch in mul"),
        }
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        match a {
            Elem::F(x) => *x == 0,
            Elem::Z(x) => x.is_zero(),
            Elem::Q(x) => x.is_zero(),
        }
    }

    pub fn is_unit(&self, a: &Elem) -> bool {
        match (self, a) {
            (Ring::Integers, Elem::Z(x)) => x.abs().is_one(),
            (Ring::Rationals, Elem::Q(x)) => !x.is_zero(),
            (Ring::PrimeField(_), Elem::F(x)) => *x != 0,
            (Ring::CyclicRing(p, _), Elem::F(x)) => *x % p != 0,
            _ => panic!("ring/element mismatch in is_unit"),
        }
    }

    /// Multiplicative inverse, when `a` is a unit.
    pub fn inv(&self, a: &Elem) -> Option<Elem> {
        if !self.is_unit(a) {
            return None;
        }
        match (self, a) {
            (Ring::Integers, Elem::Z(x)) => Some(Elem::Z(x.clone())),
            (Ring::Rationals, Elem::Q(x)) => Some(Elem::Q(x.recip())),
            (_, Elem::F(x)) => {
                let m = self.modulus().expect("finite ring");
                Some(Elem::F(mod_inv(*x, m)))
            }
            _ => panic!("ring/element mismatch in inv"),
        }
    }

    /// `p`-adic valuation of `a` in `Z/p^k`; `None` for zero (valuation >= k).
    pub fn valuation(&self, a: &Elem) -> Option<u32> {
        match (self, a) {
            (Ring::PrimeField(_), Elem::F(x)) => {
                if *x == 0 {
                    None
                } else {
                    Some(0)
                }
            }
            (Ring::CyclicRing(p, _), Elem::F(x)) => {
                if *x == 0 {
                    return None;
                }
                let mut v = 0;
                let mut x = *x;
                while x % p == 0 {
                    x /= p;
                    v += 1;
                }
                Some(v)
            }
            _ => panic!("valuation needs a p-power ring"),
        }
    }

    /// Exact division `a / b`; `None` when `b` does not divide `a`.
    pub fn div_exact(&self, a: &Elem, b: &Elem) -> Option<Elem> {
        if self.is_zero(b) {
            return None;
        }
        match (self, a, b) {
            (Ring::Integers, Elem::Z(x), Elem::Z(y)) => {
                let (q, r) = x.div_rem(y);
                if r.is_zero() {
                    Some(Elem::Z(q))
                } else {
                    None
                }
            }
            (Ring::Rationals, Elem::Q(x), Elem::Q(y)) => Some(Elem::Q(x / y)),
            (Ring::PrimeField(_), _, _) => Some(self.mul(a, &self.inv(b)?)),
            (Ring::CyclicRing(p, _), Elem::F(x), Elem::F(y)) => {
                // b = unit * p^e divides a iff val(a) >= e.
                let e = self.valuation(b).expect("b nonzero");
                if *x == 0 {
                    return Some(Elem::F(0));
                }
                let va = self.valuation(a)?;
                if va < e {
                    return None;
                }
                let pe = p.pow(e);
                let u = Elem::F(*y / pe);
                let q = *x / pe;
                // divide the unit part
                let m = self.modulus().expect("finite ring");
                let uinv = match self.inv(&u) {
                    Some(Elem::F(v)) => v,
                    _ => unreachable!(),
                };
                Some(Elem::F(((q as u128 * uinv as u128) % m as u128) as u64))
            }
            _ => panic!("ring/element mismatch in div_exact"),
        }
    }

    pub fn elem_to_string(&self, a: &Elem) -> String {
        match a {
            Elem::F(x) => x.to_string(),
            Elem::Z(x) => x.to_string(),
            Elem::Q(x) => {
                if x.denom().is_one() {
                    x.numer().to_string()
                } else {
                    format!("{}/{}", x.numer(), x.denom())
                }
            }
        }
    }

    /// Parse an element from a decimal string, `a/b` allowed over the rationals.
    pub fn elem_from_str(&self, s: &str) -> Result<Elem> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<BigInt> {
            t.parse::<BigInt>()
                .map_err(|_| Error::input(format!("cannot parse integer `{t}`")))
        };
        match self {
            Ring::Rationals => {
                if let Some((n, d)) = s.split_once('/') {
                    let n = parse_int(n)?;
                    let d = parse_int(d)?;
                    if d.is_zero() {
                        return Err(Error::input("zero denominator"));
                    }
                    Ok(Elem::Q(BigRational::new(n, d)))
                } else {
                    Ok(Elem::Q(BigRational::from_integer(parse_int(s)?)))
                }
            }
            _ => Ok(self.from_bigint(&parse_int(s)?)),
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::PrimeField(p) => write!(f, "F_{p}"),
            Ring::CyclicRing(p, k) => write!(f, "Z/{p}^{k}"),
            Ring::Integers => write!(f, "Z"),
            Ring::Rationals => write!(f, "Q"),
        }
    }
}

fn mod_inv(a: u64, m: u64) -> u64 {
    // extended Euclid; a must be a unit mod m
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert!(r == 1, "not a unit: {a} mod {m}");
    (((t % m as i128) + m as i128) % m as i128) as u64
}

/// An element of one of the supported rings. The variant must match the
/// ring it is used with; mixing is a programming error, not a user error.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Elem {
    /// Canonical residue in `0..p^k` for the finite rings.
    F(u64),
    Z(BigInt),
    Q(BigRational),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_small() {
        let r = Ring::PrimeField(7);
        for a in 0..7 {
            for b in 0..7 {
                let x = Elem::F(a);
                let y = Elem::F(b);
                assert_eq!(r.add(&x, &y), r.add(&y, &x));
                assert_eq!(r.mul(&x, &y), r.mul(&y, &x));
            }
            if a != 0 {
                let x = Elem::F(a);
                let i = r.inv(&x).unwrap();
                assert_eq!(r.mul(&x, &i), r.one());
            }
        }
    }

    #[test]
    fn cyclic_ring_units_and_valuation() {
        let r = Ring::CyclicRing(3, 2); // Z/9
        assert!(r.is_unit(&Elem::F(2)));
        assert!(!r.is_unit(&Elem::F(3)));
        assert_eq!(r.valuation(&Elem::F(6)), Some(1));
        assert_eq!(r.valuation(&Elem::F(0)), None);
        assert_eq!(r.div_exact(&Elem::F(6), &Elem::F(3)), Some(Elem::F(2)));
        assert_eq!(r.div_exact(&Elem::F(1), &Elem::F(3)), None);
        // 1 - p is a unit in Z/p^2
        let one_minus_p = r.sub(&r.one(), &Elem::F(3));
        assert!(r.is_unit(&one_minus_p));
    }

    #[test]
    fn rational_parse() {
        let r = Ring::Rationals;
        let x = r.elem_from_str("-3/6").unwrap();
        assert_eq!(r.elem_to_string(&x), "-1/2");
    }

    #[test]
    fn primality_check() {
        assert!(Ring::PrimeField(2).validate().is_ok());
        assert!(Ring::PrimeField(97).validate().is_ok());
        assert!(Ring::PrimeField(1).validate().is_err());
        assert!(Ring::PrimeField(6).validate().is_err());
    }
}
