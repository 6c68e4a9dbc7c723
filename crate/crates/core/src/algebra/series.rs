//! Truncated polynomial rings F_q[u]/(u^{N+1}).
//!
//! The Frobenius substitution u -> u^p acts trivially on coefficients: in the
//! decomposed presentation used throughout this crate the coefficient field
//! is fixed pointwise, so phi is pure exponent bookkeeping.
//!
//! Truncation discipline: every binary operation requires both operands to
//! carry the same truncation N and produces a result truncated at N. An
//! operation that consumes phi(s) and needs its output exact mod u^{N+1}
//! needs s known mod u^{floor(N/p)+1}; a series stored at truncation N always
//! satisfies this, since floor(N/p) <= N.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::field::{FqElement, FqField};
use crate::error::{Error, Result};

/// u-adic valuation: infinity is a distinguished marker reserved for the
/// zero series, never a large integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UValuation {
    Finite(usize),
    Infinity,
}

impl UValuation {
    pub fn is_infinite(&self) -> bool {
        matches!(self, UValuation::Infinity)
    }

    pub fn finite(&self) -> Option<usize> {
        match self {
            UValuation::Finite(d) => Some(*d),
            UValuation::Infinity => None,
        }
    }
}

impl PartialOrd for UValuation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for UValuation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use UValuation::*;
        match (self, other) {
            (Infinity, Infinity) => std::cmp::Ordering::Equal,
            (Infinity, Finite(_)) => std::cmp::Ordering::Greater,
            (Finite(_), Infinity) => std::cmp::Ordering::Less,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for UValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UValuation::Finite(d) => write!(f, "{d}"),
            UValuation::Infinity => write!(f, "inf"),
        }
    }
}

/// An element of F_q\[u\]/(u^{N+1}): coefficients of u^0..u^N.
#[derive(Debug, Clone)]
pub struct TruncatedSeries {
    field: Arc<FqField>,
    trunc: usize,
    coeffs: Vec<FqElement>,
}

impl TruncatedSeries {
    /// Build from coefficients of u^0, u^1, ... (at most trunc+1 of them;
    /// missing high coefficients are zero).
    pub fn new(field: &Arc<FqField>, trunc: usize, coeffs: Vec<FqElement>) -> Result<Self> {
        if coeffs.len() > trunc + 1 {
            return Err(Error::Domain(format!(
                "{} coefficients exceed truncation {} (max {})",
                coeffs.len(),
                trunc,
                trunc + 1
            )));
        }
        for c in &coeffs {
            if c.field() != field {
                return Err(Error::Structural(
                    "series coefficient from a different field".into(),
                ));
            }
        }
        let mut coeffs = coeffs;
        while coeffs.len() < trunc + 1 {
            coeffs.push(field.zero());
        }
        Ok(TruncatedSeries {
            field: Arc::clone(field),
            trunc,
            coeffs,
        })
    }

    /// Convenience: coefficients given as integers via F_p.
    pub fn from_ints(field: &Arc<FqField>, trunc: usize, coeffs: &[i64]) -> Result<Self> {
        let coeffs = coeffs.iter().map(|&c| field.from_int(c)).collect();
        Self::new(field, trunc, coeffs)
    }

    pub fn zero(field: &Arc<FqField>, trunc: usize) -> Self {
        Self::new(field, trunc, Vec::new()).expect("empty coefficient list is valid")
    }

    pub fn constant(c: FqElement, trunc: usize) -> Self {
        let field = Arc::clone(c.field());
        Self::new(&field, trunc, vec![c]).expect("one coefficient is valid")
    }

    /// c * u^deg; degrees beyond the truncation give the zero series.
    pub fn monomial(c: FqElement, deg: usize, trunc: usize) -> Self {
        let field = Arc::clone(c.field());
        if deg > trunc {
            return Self::zero(&field, trunc);
        }
        let mut coeffs = vec![field.zero(); deg];
        coeffs.push(c);
        Self::new(&field, trunc, coeffs).expect("deg <= trunc")
    }

    pub fn field(&self) -> &Arc<FqField> {
        &self.field
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    /// Coefficient of u^d (d <= trunc).
    pub fn coeff(&self, d: usize) -> &FqElement {
        &self.coeffs[d]
    }

    pub fn coeffs(&self) -> &[FqElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Largest d with a nonzero coefficient, if any.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::Structural(format!(
                "series over different fields: {} vs {}",
                self.field, other.field
            )));
        }
        if self.trunc != other.trunc {
            return Err(Error::Structural(format!(
                "series with different truncations: {} vs {}",
                self.trunc, other.trunc
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect();
        Self::new(&self.field, self.trunc, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.sub(b))
            .collect();
        Self::new(&self.field, self.trunc, coeffs)
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a.neg()).collect();
        Self::new(&self.field, self.trunc, coeffs).expect("same length")
    }

    /// Convolution product, degrees above the truncation discarded.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut coeffs = vec![self.field.zero(); self.trunc + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j > self.trunc {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Self::new(&self.field, self.trunc, coeffs)
    }

    pub fn scale(&self, c: &FqElement) -> Result<Self> {
        if c.field() != &self.field {
            return Err(Error::Structural(
                "scalar from a different field than the series".into(),
            ));
        }
        let coeffs = self.coeffs.iter().map(|a| a.mul(c)).collect();
        Self::new(&self.field, self.trunc, coeffs)
    }

    /// Multiply by u^k (shift up, truncate).
    pub fn mul_u_pow(&self, k: usize) -> Self {
        let mut coeffs = vec![self.field.zero(); self.trunc + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i + k > self.trunc {
                break;
            }
            coeffs[i + k] = a.clone();
        }
        Self::new(&self.field, self.trunc, coeffs).expect("constructed in range")
    }

    /// The substitution u -> u^p, coefficients unchanged, truncated at N.
    ///
    /// Exact mod u^{N+1} whenever the input is: the coefficient of u^{pd}
    /// only needs the input coefficient of u^d, and d <= N/p <= N.
    pub fn frobenius_substitute(&self) -> Self {
        let p = self.field.p() as usize;
        let mut coeffs = vec![self.field.zero(); self.trunc + 1];
        for (d, a) in self.coeffs.iter().enumerate() {
            match d.checked_mul(p) {
                Some(e) if e <= self.trunc => coeffs[e] = a.clone(),
                _ => break,
            }
        }
        Self::new(&self.field, self.trunc, coeffs).expect("constructed in range")
    }

    /// f-fold Frobenius substitution u -> u^{p^f}.
    pub fn frobenius_power(&self, f: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..f {
            out = out.frobenius_substitute();
        }
        out
    }

    /// Least degree with a nonzero coefficient; Infinity for the zero series.
    pub fn u_valuation(&self) -> UValuation {
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            Some(d) => UValuation::Finite(d),
            None => UValuation::Infinity,
        }
    }

    /// Forget coefficients above new_trunc.
    pub fn truncate_to(&self, new_trunc: usize) -> Result<Self> {
        if new_trunc > self.trunc {
            return Err(Error::Truncation(format!(
                "cannot extend truncation {} to {}",
                self.trunc, new_trunc
            )));
        }
        Self::new(&self.field, new_trunc, self.coeffs[..=new_trunc].to_vec())
    }

    /// Multiplicative inverse of a unit (nonzero constant term).
    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.coeffs[0]
            .inv()
            .map_err(|_| Error::Domain("series with zero constant term has no inverse".into()))?;
        let mut inv = vec![self.field.zero(); self.trunc + 1];
        inv[0] = c0.clone();
        for d in 1..=self.trunc {
            // sum_{k=1..d} a_k * b_{d-k} must cancel
            let mut acc = self.field.zero();
            for k in 1..=d {
                if !self.coeffs[k].is_zero() {
                    acc = acc.add(&self.coeffs[k].mul(&inv[d - k]));
                }
            }
            inv[d] = acc.neg().mul(&c0);
        }
        Self::new(&self.field, self.trunc, inv)
    }
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.trunc == other.trunc && self.coeffs == other.coeffs
    }
}

impl Eq for TruncatedSeries {}

impl Hash for TruncatedSeries {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.trunc.hash(state);
        for c in &self.coeffs {
            c.hash(state);
        }
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = Vec::new();
        for (d, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let t = match d {
                0 => format!("{c}"),
                1 => format!("{c}*u"),
                _ => format!("{c}*u^{d}"),
            };
            terms.push(t);
        }
        if terms.is_empty() {
            write!(f, "0 (mod u^{})", self.trunc + 1)
        } else {
            write!(f, "{} (mod u^{})", terms.join(" + "), self.trunc + 1)
        }
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct SeriesDto {
    pub p: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
    pub trunc: usize,
    pub coeffs: Vec<Vec<u32>>,
}

impl TruncatedSeries {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SeriesDto {
            p: self.field.p(),
            m: self.field.m(),
            modulus: self.field.modulus().to_vec(),
            trunc: self.trunc,
            coeffs: self.coeffs.iter().map(|c| c.coeffs().to_vec()).collect(),
        })
        .expect("series serialization cannot fail")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let dto: SeriesDto = serde_json::from_value(v.clone())
            .map_err(|e| Error::Malformed(format!("series: {e}")))?;
        let field = FqField::new(dto.p, dto.m, &dto.modulus)?;
        let mut coeffs = Vec::with_capacity(dto.coeffs.len());
        for c in &dto.coeffs {
            coeffs.push(field.element(&c.iter().map(|&x| x as i64).collect::<Vec<_>>())?);
        }
        Self::new(&field, dto.trunc, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Arc<FqField> {
        FqField::prime(3).unwrap()
    }

    #[test]
    fn product_truncates() {
        let f = f3();
        // (1 + u)(1 - u) = 1 - u^2 = 1 + 2u^2 over F_3
        let a = TruncatedSeries::from_ints(&f, 4, &[1, 1]).unwrap();
        let b = TruncatedSeries::from_ints(&f, 4, &[1, -1]).unwrap();
        let expect = TruncatedSeries::from_ints(&f, 4, &[1, 0, 2]).unwrap();
        assert_eq!(a.mul(&b).unwrap(), expect);

        // zero annihilates
        let z = TruncatedSeries::zero(&f, 4);
        assert_eq!(z.mul(&a).unwrap(), z);

        // u^2 * u^3 dies at truncation 4
        let u2 = TruncatedSeries::monomial(f.one(), 2, 4);
        let u3 = TruncatedSeries::monomial(f.one(), 3, 4);
        assert!(u2.mul(&u3).unwrap().is_zero());
    }

    #[test]
    fn mismatches_are_structural_errors() {
        let f = f3();
        let f5 = FqField::prime(5).unwrap();
        let a = TruncatedSeries::from_ints(&f, 4, &[1]).unwrap();
        let b = TruncatedSeries::from_ints(&f5, 4, &[1]).unwrap();
        let c = TruncatedSeries::from_ints(&f, 5, &[1]).unwrap();
        assert!(matches!(a.mul(&b), Err(Error::Structural(_))));
        assert!(matches!(a.add(&c), Err(Error::Structural(_))));
    }

    #[test]
    fn frobenius_substitution() {
        let f = f3();
        let s = TruncatedSeries::from_ints(&f, 9, &[1, 1]).unwrap();
        let expect = TruncatedSeries::from_ints(&f, 9, &[1, 0, 0, 1]).unwrap();
        assert_eq!(s.frobenius_substitute(), expect);

        // constants are fixed
        let c = TruncatedSeries::from_ints(&f, 9, &[2]).unwrap();
        assert_eq!(c.frobenius_substitute(), c);

        // u + u^2 -> u^3 at truncation 4 (the u^6 term is discarded)
        let s = TruncatedSeries::from_ints(&f, 4, &[0, 1, 1]).unwrap();
        let expect = TruncatedSeries::from_ints(&f, 4, &[0, 0, 0, 1]).unwrap();
        assert_eq!(s.frobenius_substitute(), expect);
    }

    #[test]
    fn valuations() {
        let f = f3();
        let s = TruncatedSeries::from_ints(&f, 5, &[0, 0, 1, 1]).unwrap();
        assert_eq!(s.u_valuation(), UValuation::Finite(2));
        assert_eq!(
            TruncatedSeries::zero(&f, 5).u_valuation(),
            UValuation::Infinity
        );
        let f7 = FqField::prime(7).unwrap();
        let c = TruncatedSeries::from_ints(&f7, 3, &[5]).unwrap();
        assert_eq!(c.u_valuation(), UValuation::Finite(0));
        assert!(UValuation::Infinity > UValuation::Finite(usize::MAX));
    }

    #[test]
    fn unit_inverse() {
        let f = f3();
        let s = TruncatedSeries::from_ints(&f, 6, &[2, 1, 0, 1]).unwrap();
        let inv = s.inverse().unwrap();
        let one = TruncatedSeries::from_ints(&f, 6, &[1]).unwrap();
        assert_eq!(s.mul(&inv).unwrap(), one);
        assert!(TruncatedSeries::monomial(f.one(), 1, 6).inverse().is_err());
    }

    #[test]
    fn series_json_round_trip() {
        let f9 = FqField::extension(3, &[1, 0, 1]).unwrap();
        let s = TruncatedSeries::new(
            &f9,
            4,
            vec![f9.element(&[1, 2]).unwrap(), f9.element(&[0, 1]).unwrap()],
        )
        .unwrap();
        let back = TruncatedSeries::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
    }
}
