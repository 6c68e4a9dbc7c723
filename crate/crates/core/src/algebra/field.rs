//! Small finite fields F_q, q = p^m, with exact arithmetic.
//!
//! Fields are kept deliberately small (q <= 2^16): everything downstream is
//! verified by exhaustive enumeration, so there is no reason to support more.
//! Extension fields take a caller-supplied monic irreducible modulus; no
//! Conway polynomial table is bundled.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use arrayvec::ArrayVec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on q = p^m.
pub const MAX_FIELD_SIZE: u64 = 1 << 16;
/// Largest supported extension degree (implied by MAX_FIELD_SIZE and p >= 3).
pub const MAX_EXT_DEGREE: usize = 16;

/// The field F_q with q = p^m, p an odd prime.
///
/// `modulus` is a monic polynomial of degree m over F_p stored little-endian
/// (length m+1). For m = 1 the canonical modulus is `x` and never used.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqField {
    p: u32,
    m: u32,
    modulus: Vec<u32>,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FqField {
    /// The prime field F_p, p an odd prime.
    pub fn prime(p: u32) -> Result<Arc<Self>> {
        Self::new(p, 1, &[0, 1])
    }

    /// F_{p^m} presented by a monic irreducible `modulus` (little-endian,
    /// length m+1) over F_p. For m = 1 the modulus argument is ignored.
    pub fn extension(p: u32, modulus: &[u32]) -> Result<Arc<Self>> {
        if modulus.len() < 2 {
            return Err(Error::Domain(
                "modulus must have degree >= 1 (length >= 2, little-endian)".into(),
            ));
        }
        Self::new(p, (modulus.len() - 1) as u32, modulus)
    }

    /// General constructor; `modulus` is ignored when m = 1.
    pub fn new(p: u32, m: u32, modulus: &[u32]) -> Result<Arc<Self>> {
        if !is_prime(p) {
            return Err(Error::Domain(format!("{p} is not prime")));
        }
        if p == 2 {
            return Err(Error::Domain("p must be an odd prime".into()));
        }
        if m == 0 {
            return Err(Error::Domain("extension degree must be >= 1".into()));
        }
        let q = (p as u64).checked_pow(m);
        match q {
            Some(q) if q <= MAX_FIELD_SIZE => {}
            _ => {
                return Err(Error::Resource(format!(
                    "field size p^m = {p}^{m} exceeds the limit {MAX_FIELD_SIZE}"
                )))
            }
        }
        let modulus: Vec<u32> = if m == 1 {
            vec![0, 1]
        } else {
            if modulus.len() != m as usize + 1 {
                return Err(Error::Domain(format!(
                    "modulus must have length m+1 = {}, got {}",
                    m + 1,
                    modulus.len()
                )));
            }
            let modulus: Vec<u32> = modulus.iter().map(|&c| c % p).collect();
            if modulus[m as usize] != 1 {
                return Err(Error::Domain("modulus must be monic".into()));
            }
            if !poly_is_irreducible(p, &modulus) {
                return Err(Error::Domain(
                    "modulus is reducible over F_p; an irreducible polynomial is required".into(),
                ));
            }
            modulus
        };
        Ok(Arc::new(FqField { p, m, modulus }))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Number of elements q = p^m.
    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.m)
    }

    pub fn zero(self: &Arc<Self>) -> FqElement {
        FqElement::from_raw(self, ArrayVec::from_iter((0..self.m).map(|_| 0)))
    }

    pub fn one(self: &Arc<Self>) -> FqElement {
        let mut coeffs: ArrayVec<u32, MAX_EXT_DEGREE> = ArrayVec::from_iter((0..self.m).map(|_| 0));
        coeffs[0] = 1;
        FqElement::from_raw(self, coeffs)
    }

    /// Element from a little-endian coefficient vector (entries reduced mod p).
    /// Shorter vectors are padded with zeros; longer ones are rejected.
    pub fn element(self: &Arc<Self>, coeffs: &[i64]) -> Result<FqElement> {
        if coeffs.len() > self.m as usize {
            return Err(Error::Domain(format!(
                "coefficient vector of length {} exceeds extension degree {}",
                coeffs.len(),
                self.m
            )));
        }
        let p = self.p as i64;
        let mut out: ArrayVec<u32, MAX_EXT_DEGREE> = ArrayVec::new();
        for i in 0..self.m as usize {
            let c = coeffs.get(i).copied().unwrap_or(0).rem_euclid(p);
            out.push(c as u32);
        }
        Ok(FqElement::from_raw(self, out))
    }

    /// The integer n embedded via F_p.
    pub fn from_int(self: &Arc<Self>, n: i64) -> FqElement {
        self.element(&[n]).expect("length 1 <= m")
    }

    /// All q elements, in odometer order on the coefficient vector
    /// (least-significant coefficient varies fastest).
    pub fn elements(self: &Arc<Self>) -> impl Iterator<Item = FqElement> {
        let field = Arc::clone(self);
        let m = self.m as usize;
        let p = self.p;
        let mut cur: Option<ArrayVec<u32, MAX_EXT_DEGREE>> =
            Some(ArrayVec::from_iter((0..m).map(|_| 0)));
        std::iter::from_fn(move || {
            let state = cur.take()?;
            let out = FqElement::from_raw(&field, state.clone());
            let mut next = state;
            let mut i = 0;
            loop {
                if i == m {
                    // odometer wrapped; iteration is done
                    return Some(out);
                }
                next[i] += 1;
                if next[i] < p {
                    break;
                }
                next[i] = 0;
                i += 1;
            }
            cur = Some(next);
            Some(out)
        })
    }

    /// Nonzero elements, in the same order as `elements`.
    pub fn units(self: &Arc<Self>) -> impl Iterator<Item = FqElement> {
        self.elements().filter(|e| !e.is_zero())
    }

    /// Uniformly random element.
    pub fn random<R: Rng + ?Sized>(self: &Arc<Self>, rng: &mut R) -> FqElement {
        let coeffs = ArrayVec::from_iter((0..self.m).map(|_| rng.gen_range(0..self.p)));
        FqElement::from_raw(self, coeffs)
    }
}

impl fmt::Display for FqField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "F_{{{}^{}}}", self.p, self.m)
        }
    }
}

// --- polynomial helpers over F_p (little-endian coefficient slices) ---

fn poly_degree(a: &[u32]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

/// Remainder of a mod b (b nonzero, over F_p).
fn poly_rem(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    let db = poly_degree(b).expect("divisor must be nonzero");
    let lead_inv = mod_inv(b[db], p);
    let mut r: Vec<u32> = a.to_vec();
    while let Some(dr) = poly_degree(&r) {
        if dr < db {
            break;
        }
        let c = ((r[dr] as u64 * lead_inv as u64) % p as u64) as u32;
        let shift = dr - db;
        for k in 0..=db {
            let sub = (c as u64 * b[k] as u64) % p as u64;
            let idx = shift + k;
            r[idx] = ((r[idx] as u64 + p as u64 - sub) % p as u64) as u32;
        }
    }
    r
}

/// Exhaustive trial division: no monic factor of degree 1..=deg/2.
fn poly_is_irreducible(p: u32, modulus: &[u32]) -> bool {
    let deg = poly_degree(modulus).unwrap_or(0);
    if deg == 0 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        // all monic polynomials of degree d, odometer over the low d coefficients
        let mut divisor = vec![0u32; d + 1];
        divisor[d] = 1;
        'degree: loop {
            let r = poly_rem(p, modulus, &divisor);
            if poly_degree(&r).is_none() {
                return false;
            }
            let mut i = 0;
            loop {
                if i == d {
                    break 'degree; // odometer wrapped: all divisors of degree d tried
                }
                divisor[i] += 1;
                if divisor[i] < p {
                    break;
                }
                divisor[i] = 0;
                i += 1;
            }
        }
    }
    true
}

fn mod_inv(a: u32, p: u32) -> u32 {
    // Fermat: a^(p-2) mod p
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

/// An element of F_q: a little-endian coefficient vector in the generator,
/// entries in [0, p).
#[derive(Debug, Clone)]
pub struct FqElement {
    field: Arc<FqField>,
    coeffs: ArrayVec<u32, MAX_EXT_DEGREE>,
}

impl FqElement {
    fn from_raw(field: &Arc<FqField>, coeffs: ArrayVec<u32, MAX_EXT_DEGREE>) -> Self {
        debug_assert_eq!(coeffs.len(), field.m as usize);
        FqElement {
            field: Arc::clone(field),
            coeffs,
        }
    }

    pub fn field(&self) -> &Arc<FqField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    fn assert_same_field(&self, other: &Self) {
        assert!(
            self.field == other.field,
            "elements of different fields: {} vs {}",
            self.field,
            other.field
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_field(other);
        let p = self.field.p;
        let coeffs = ArrayVec::from_iter(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| (a + b) % p),
        );
        Self::from_raw(&self.field, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same_field(other);
        let p = self.field.p;
        let coeffs = ArrayVec::from_iter(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| (a + p - b) % p),
        );
        Self::from_raw(&self.field, coeffs)
    }

    pub fn neg(&self) -> Self {
        let p = self.field.p;
        let coeffs = ArrayVec::from_iter(self.coeffs.iter().map(|&a| (p - a) % p));
        Self::from_raw(&self.field, coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_field(other);
        let p = self.field.p as u64;
        let m = self.field.m as usize;
        if m == 1 {
            let c = (self.coeffs[0] as u64 * other.coeffs[0] as u64 % p) as u32;
            let mut coeffs = ArrayVec::new();
            coeffs.push(c);
            return Self::from_raw(&self.field, coeffs);
        }
        // schoolbook product then reduction by the monic modulus
        let mut prod = [0u64; 2 * MAX_EXT_DEGREE];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a as u64 * b as u64) % p;
            }
        }
        let modulus = &self.field.modulus;
        for d in (m..2 * m - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for k in 0..m {
                let idx = d - m + k;
                prod[idx] = (prod[idx] + p * p - c * modulus[k] as u64 % p) % p;
            }
        }
        let coeffs = ArrayVec::from_iter((0..m).map(|i| prod[i] as u32));
        Self::from_raw(&self.field, coeffs)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; zero has none.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("zero has no multiplicative inverse".into()));
        }
        Ok(self.pow(self.field.order() - 2))
    }

    /// self / other.
    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }
}

impl PartialEq for FqElement {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field && self.coeffs == other.coeffs
    }
}

impl Eq for FqElement {}

impl Hash for FqElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.hash(state);
        self.coeffs.as_slice().hash(state);
    }
}

impl fmt::Display for FqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.m == 1 {
            write!(f, "{}", self.coeffs[0])
        } else {
            write!(
                f,
                "[{}]",
                self.coeffs
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            )
        }
    }
}

/// JSON shape shared by elements wherever they appear standalone.
#[derive(Serialize, Deserialize)]
pub(crate) struct ElementDto {
    pub p: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
    pub coeffs: Vec<u32>,
}

impl FqElement {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ElementDto {
            p: self.field.p,
            m: self.field.m,
            modulus: self.field.modulus.clone(),
            coeffs: self.coeffs.iter().copied().collect(),
        })
        .expect("element serialization cannot fail")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let dto: ElementDto = serde_json::from_value(v.clone())
            .map_err(|e| Error::Malformed(format!("field element: {e}")))?;
        let field = FqField::new(dto.p, dto.m, &dto.modulus)?;
        field.element(&dto.coeffs.iter().map(|&c| c as i64).collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_primes() {
        assert!(FqField::prime(4).is_err());
        assert!(FqField::prime(2).is_err());
        assert!(FqField::prime(1).is_err());
        assert!(FqField::prime(3).is_ok());
        assert!(FqField::prime(65521).is_ok());
    }

    #[test]
    fn rejects_oversized_fields() {
        // 65521^2 > 2^16
        assert!(FqField::extension(65521, &[1, 1, 1]).is_err());
        // 3^10 = 59049 fits; x^10 + 2x + 1 happens to be reducible mod 3,
        // so only check the size gate with a degree-2 field instead.
        assert!(FqField::extension(251, &[0, 0, 1]).is_err()); // x^2 reducible
    }

    #[test]
    fn irreducibility_is_checked() {
        // x^2 + 1 is irreducible mod 3 (-1 is not a square)
        assert!(FqField::extension(3, &[1, 0, 1]).is_ok());
        // x^2 - 1 = (x-1)(x+1)
        assert!(FqField::extension(3, &[2, 0, 1]).is_err());
        // x^2 + 1 is reducible mod 5 (2^2 = -1)
        assert!(FqField::extension(5, &[1, 0, 1]).is_err());
        // x^2 + 2 is irreducible mod 5
        assert!(FqField::extension(5, &[2, 0, 1]).is_ok());
        // (x^2 + 1)(x^2 + x + 2) = x^4 + x^3 + x + 2 mod 3 has no roots but
        // splits into quadratics; it must be rejected
        assert!(FqField::extension(3, &[2, 1, 0, 1, 1]).is_err());
    }

    #[test]
    fn counts_irreducible_quartics_mod_3() {
        // (3^4 - 3^2)/4 = 18 monic irreducible quartics over F_3
        let mut count = 0;
        for a0 in 0..3u32 {
            for a1 in 0..3u32 {
                for a2 in 0..3u32 {
                    for a3 in 0..3u32 {
                        if FqField::extension(3, &[a0, a1, a2, a3, 1]).is_ok() {
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count, 18);
    }

    #[test]
    fn prime_field_arithmetic() {
        let f3 = FqField::prime(3).unwrap();
        let two = f3.from_int(2);
        assert_eq!(two.mul(&two), f3.from_int(1));
        assert_eq!(two.add(&two), f3.from_int(1));
        assert_eq!(two.inv().unwrap(), two);
        assert!(f3.zero().inv().is_err());
        assert_eq!(f3.from_int(-1), two);
    }

    #[test]
    fn extension_field_arithmetic() {
        // F_9 = F_3[i], i^2 = -1
        let f9 = FqField::extension(3, &[1, 0, 1]).unwrap();
        let i = f9.element(&[0, 1]).unwrap();
        assert_eq!(i.mul(&i), f9.from_int(-1));
        // multiplicative order of the group is 8
        for e in f9.units() {
            assert!(e.pow(8).is_one());
            assert_eq!(e.mul(&e.inv().unwrap()), f9.one());
        }
        assert_eq!(f9.elements().count(), 9);
    }

    #[test]
    fn element_json_round_trip() {
        let f9 = FqField::extension(3, &[1, 0, 1]).unwrap();
        let e = f9.element(&[2, 1]).unwrap();
        let back = FqElement::from_json(&e.to_json()).unwrap();
        assert_eq!(e, back);
    }
}
