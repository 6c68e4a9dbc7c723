//! Descent-datum bookkeeping for rank-two extensions: the exact-rational
//! valuation attached to an off-diagonal descent coefficient, the uniqueness
//! criterion it implies, and the model-raising move that walks an extension
//! from type (r, a, b, J) to type (r, a, b, J_max) without changing the
//! attached representation.
//!
//! Nothing here represents the descent action itself; only its valuation
//! exponents appear, as exact rationals. No floating point anywhere.

use std::fmt;

use num_rational::Ratio;

use crate::combinat::{self, JSet};
use crate::error::{Error, Result};
use crate::extension::ExtensionData;

/// An exact rational valuation (reduced, positive denominator).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValuationQ(Ratio<i128>);

impl ValuationQ {
    pub fn new(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(ValuationQ(Ratio::new(num, den)))
    }

    pub fn numerator(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> i128 {
        *self.0.denom()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "num": self.numerator() as i64, "den": self.denominator() as i64 })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let num = v
            .get("num")
            .and_then(|x| x.as_i64())
            .ok_or_else(|| Error::Malformed("valuation: missing num".into()))?;
        let den = v
            .get("den")
            .and_then(|x| x.as_i64())
            .ok_or_else(|| Error::Malformed("valuation: missing den".into()))?;
        Self::new(num as i128, den as i128)
    }
}

impl fmt::Display for ValuationQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator(), self.denominator())
    }
}

fn check_type_args(p: u32, f: usize, r: &[u32], j: &JSet) -> Result<()> {
    if f == 0 || r.len() != f {
        return Err(Error::Domain(format!(
            "twist vector length {} does not match f = {f} >= 1",
            r.len()
        )));
    }
    if r.iter().any(|&ri| ri < 1 || ri > p) {
        return Err(Error::Domain(format!("entries of r must lie in [1, {p}]")));
    }
    if j.universe() != f {
        return Err(Error::Structural("subset universe does not match f".into()));
    }
    combinat::modulus(p, f)?;
    Ok(())
}

/// The valuation (1/(p^f - 1)) sum_{j=0}^{f-1} p^{f-j} (2 h_{i+j} - r_{i+j})
/// of the i-th off-diagonal descent coefficient, as an exact rational.
pub fn beta_valuation(p: u32, f: usize, r: &[u32], j: &JSet, i: usize) -> Result<ValuationQ> {
    check_type_args(p, f, r, j)?;
    if i >= f {
        return Err(Error::Domain(format!("index {i} outside 0..{f}")));
    }
    let pf1 = (p as i128).pow(f as u32) - 1;
    let mut num: i128 = 0;
    for jj in 0..f {
        let idx = (i + jj) % f;
        let h = if j.contains(idx) { r[idx] as i128 } else { 0 };
        num += (p as i128).pow((f - jj) as u32) * (2 * h - r[idx] as i128);
    }
    ValuationQ::new(num, pf1)
}

/// The bound p^2/(p-1) that every beta valuation satisfies; equality holds
/// exactly in the non-unique configuration.
pub fn beta_valuation_bound(p: u32) -> ValuationQ {
    ValuationQ::new((p as i128) * (p as i128), p as i128 - 1).expect("p >= 2")
}

/// Whether the descent datum on an extension of this type is uniquely
/// determined: it is, except when h_i = r_i = p for every i, i.e. r is the
/// all-p vector and J is everything.
pub fn ghat_unique(p: u32, f: usize, r: &[u32], j: &JSet) -> Result<bool> {
    check_type_args(p, f, r, j)?;
    Ok(!(j.is_full() && r.iter().all(|&ri| ri == p)))
}

/// One model-raising move along the string (r_i, ..., r_{i+s}) =
/// (1, p-1, ..., p-1, p) with i in J and i+1, ..., i+s outside J.
///
/// Rescaling the basis along the string replaces J by
/// J' = J u {i+1..i+s} \ {i} and leaves the attached representation
/// unchanged; the stray degree-p coefficient the rescaling creates at i+1 is
/// then disposed of according to the structure (loop, stub or path)
/// containing the pair (i+1, p). The output is in normal form for J'.
///
/// The input must be in the type shape: x zero off J and constant at the
/// raised index i.
pub fn model_raise(e: &ExtensionData, i: usize, s: usize) -> Result<ExtensionData> {
    let ty = e.ty();
    let p = ty.p();
    let f = ty.f();
    if p == 2 {
        return Err(Error::Domain("model raising requires p > 2".into()));
    }
    if i >= f || s == 0 || s >= f {
        return Err(Error::Domain(format!(
            "string (start {i}, length {s}) does not fit in 0..{f}"
        )));
    }
    // string shape
    if ty.r()[i] != 1 {
        return Err(Error::Domain(format!("r_{i} must be 1 at a string start")));
    }
    for t in 1..s {
        if ty.r()[(i + t) % f] != p - 1 {
            return Err(Error::Domain(format!(
                "r at {} must be p-1 inside the string",
                (i + t) % f
            )));
        }
    }
    if ty.r()[(i + s) % f] != p {
        return Err(Error::Domain(format!(
            "r at {} must be p at the string end",
            (i + s) % f
        )));
    }
    // membership
    if !ty.j().contains(i) {
        return Err(Error::Domain(format!("string start {i} must lie in J")));
    }
    for t in 1..=s {
        if ty.j().contains((i + t) % f) {
            return Err(Error::Domain(format!(
                "string tail index {} must lie outside J",
                (i + t) % f
            )));
        }
    }
    // input shape
    for k in 0..f {
        if !ty.j().contains(k) && !e.x()[k].is_zero() {
            return Err(Error::Domain(format!(
                "x_{k} must vanish off J before raising"
            )));
        }
    }
    if e.x()[i].degree().is_some_and(|d| d > 0) {
        return Err(Error::Domain(format!(
            "x_{i} must be constant at the raised index"
        )));
    }

    let n = e.trunc();
    let field = ty.field().clone();
    let mut j_new = *ty.j();
    j_new = j_new.without(i);
    for t in 1..=s {
        j_new = j_new.with((i + t) % f);
    }
    let ty_new = ty.with_j(j_new)?;

    // basis rescaling: the old x_i (a constant c) leaves the raised index as
    // c*u, which a change of basis converts into (b)_{i+1} c / (a)_i * u^p
    // at index i+1; all other coefficients are untouched.
    let c = e.x()[i].coeff(0).clone();
    let mut x_new: Vec<_> = e.x().to_vec();
    x_new[i] = crate::algebra::TruncatedSeries::zero(&field, n);
    if !c.is_zero() {
        let a_at_i = if i == 0 { ty.a().clone() } else { field.one() };
        let b_at_next = if (i + 1) % f == 0 {
            ty.b().clone()
        } else {
            field.one()
        };
        let coeff = b_at_next.mul(&c).mul(&a_at_i.inv().expect("a nonzero"));
        let extra = crate::algebra::TruncatedSeries::monomial(coeff, p as usize, n);
        let next = (i + 1) % f;
        x_new[next] = x_new[next].add(&extra)?;
    }
    let raised = ExtensionData::new(ty_new, x_new)?;
    let (normal, _) = raised.reduce_normal_form()?;
    Ok(normal)
}

/// Iterate model raising over every string split as (start in J, tail
/// outside) until none remains; the resulting J agrees with J_max except for
/// the split all-(p-1), J-empty case, which is returned unchanged. The input
/// is normalized first. Terminates in at most f moves.
pub fn raise_to_jmax(e: &ExtensionData) -> Result<ExtensionData> {
    let p = e.ty().p();
    if p == 2 {
        return Err(Error::Domain("model raising requires p > 2".into()));
    }
    let f = e.ty().f();
    let (mut cur, _) = e.reduce_normal_form()?;
    let r64: Vec<i64> = e.ty().r().iter().map(|&x| x as i64).collect();
    for _ in 0..=f {
        let strings = combinat::flip_strings(p, f, &r64)?;
        let next = strings.iter().find(|&&(start, s)| {
            cur.ty().j().contains(start) && (1..=s).all(|t| !cur.ty().j().contains((start + t) % f))
        });
        match next {
            Some(&(start, s)) => {
                cur = model_raise(&cur, start, s)?;
            }
            None => {
                let all_pm1 = e.ty().r().iter().all(|&x| x == p - 1);
                if !(all_pm1 && cur.ty().j().is_empty()) {
                    debug_assert_eq!(
                        *cur.ty().j(),
                        combinat::j_max(p, f, &r64, e.ty().j())?,
                        "raising did not land on J_max"
                    );
                }
                return Ok(cur);
            }
        }
    }
    Err(Error::Internal(
        "model raising failed to terminate within f moves".into(),
    ))
}
