//! Serre weights and the predicted weight sets.
//!
//! A weight is a tuple of per-embedding integer pairs (a_{i,1}, a_{i,2})
//! with 0 <= a_{i,1} - a_{i,2} <= p - 1. Inertial data is compared as an
//! unordered pair of character exponents under the generator convention of
//! the rank-one module layer (exponent of w_{nf-1}, with
//! w_s = w_{nf-1}^{p^{nf-1-s}}).
//!
//! Membership tests here are at the inertial level only; in the non-split
//! reducible case the full predicted set additionally constrains the
//! extension class, which this crate deliberately does not decide. The
//! operation names carry the `bdj_inertial` prefix for this reason.

use serde::Deserialize;

use crate::combinat::{self, JSet};
use crate::error::{Error, Result};

/// Per-embedding pairs (a_{i,1}, a_{i,2}), a_{i,1} >= a_{i,2}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SerreWeight {
    pairs: Vec<(i64, i64)>,
}

impl SerreWeight {
    pub fn new(pairs: Vec<(i64, i64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Domain(
                "a weight needs at least one embedding".into(),
            ));
        }
        for &(a1, a2) in &pairs {
            if a1 < a2 {
                return Err(Error::Domain(format!(
                    "pair ({a1}, {a2}) violates a_1 >= a_2"
                )));
            }
        }
        Ok(SerreWeight { pairs })
    }

    pub fn f(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(i64, i64)] {
        &self.pairs
    }

    /// The bound a_{i,1} - a_{i,2} <= p - 1 defining weights for this p.
    pub fn validate_for(&self, p: u32) -> Result<()> {
        for &(a1, a2) in &self.pairs {
            if a1 - a2 > p as i64 - 1 {
                return Err(Error::Domain(format!(
                    "pair ({a1}, {a2}) exceeds the width bound p - 1 = {}",
                    p - 1
                )));
            }
        }
        Ok(())
    }

    /// Per-embedding multiset {a_{i,1} + 1, a_{i,2}}.
    pub fn hodge_type(&self) -> Vec<[i64; 2]> {
        self.pairs.iter().map(|&(a1, a2)| [a1 + 1, a2]).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "pairs": self.pairs })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Dto {
            pairs: Vec<(i64, i64)>,
        }
        let dto: Dto = serde_json::from_value(v.clone())
            .map_err(|e| Error::Malformed(format!("weight: {e}")))?;
        SerreWeight::new(dto.pairs)
    }
}

/// Isomorphism of the represented weights: equal widths everywhere and the
/// twisting character trivial, i.e. sum_i p^{f-1-i} (a_{i,2} - b_{i,2})
/// congruent to 0 mod p^f - 1.
pub fn weight_equivalent(w1: &SerreWeight, w2: &SerreWeight, p: u32) -> Result<bool> {
    if w1.f() != w2.f() {
        return Err(Error::Structural("weights for different f".into()));
    }
    w1.validate_for(p)?;
    w2.validate_for(p)?;
    let f = w1.f();
    let m = combinat::modulus(p, f)? as i128;
    for i in 0..f {
        if w1.pairs[i].0 - w1.pairs[i].1 != w2.pairs[i].0 - w2.pairs[i].1 {
            return Ok(false);
        }
    }
    let mut acc: i128 = 0;
    for i in 0..f {
        let w = (p as i128).pow((f - 1 - i) as u32) % m;
        acc = (acc + w * (w1.pairs[i].1 - w2.pairs[i].1) as i128).rem_euclid(m);
    }
    Ok(acc == 0)
}

/// Residual inertial data: an unordered pair of character exponents of
/// niveau 1 (mod p^f - 1) or niveau 2 (mod p^{2f} - 1, swapped by
/// multiplication by p^f and not fixed by it), with optional unramified
/// labels riding along.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InertialType {
    p: u32,
    f: usize,
    niveau: u8,
    exponents: [u64; 2],
    unramified: Option<[crate::algebra::FqElement; 2]>,
}

impl InertialType {
    pub fn new(
        p: u32,
        f: usize,
        niveau: u8,
        exponents: [u64; 2],
        unramified: Option<[crate::algebra::FqElement; 2]>,
    ) -> Result<Self> {
        if niveau != 1 && niveau != 2 {
            return Err(Error::Domain(format!(
                "niveau must be 1 or 2, got {niveau}"
            )));
        }
        let m = combinat::modulus(p, niveau as usize * f)? as u128;
        let mut e = [
            (exponents[0] as u128 % m) as u64,
            (exponents[1] as u128 % m) as u64,
        ];
        let mut unramified = unramified;
        if e[0] > e[1] {
            e.swap(0, 1);
            if let Some(u) = &mut unramified {
                u.swap(0, 1);
            }
        }
        if niveau == 2 {
            let pf = (p as u128).pow(f as u32) % m;
            let twisted = (e[0] as u128 * pf % m) as u64;
            if twisted != e[1] {
                return Err(Error::Domain(
                    "niveau-2 exponents must be swapped by multiplication by p^f".into(),
                ));
            }
            if e[0] == e[1] {
                return Err(Error::Domain(
                    "niveau-2 exponent pair must not be fixed by the p^f twist".into(),
                ));
            }
        }
        Ok(InertialType {
            p,
            f,
            niveau,
            exponents: e,
            unramified,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn niveau(&self) -> u8 {
        self.niveau
    }

    /// Exponents in canonical (sorted) order.
    pub fn exponents(&self) -> [u64; 2] {
        self.exponents
    }

    pub fn reducible(&self) -> bool {
        self.niveau == 1
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "f": self.f,
            "niveau": self.niveau,
            "exponents": self.exponents,
            "unramified": self.unramified.as_ref().map(|u| vec![u[0].to_json(), u[1].to_json()]),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Dto {
            p: u32,
            f: usize,
            niveau: u8,
            exponents: [u64; 2],
            unramified: Option<Vec<serde_json::Value>>,
        }
        let dto: Dto = serde_json::from_value(v.clone())
            .map_err(|e| Error::Malformed(format!("inertial type: {e}")))?;
        let unramified = match dto.unramified {
            None => None,
            Some(items) => {
                if items.len() != 2 {
                    return Err(Error::Malformed("unramified must have two entries".into()));
                }
                Some([
                    crate::algebra::FqElement::from_json(&items[0])?,
                    crate::algebra::FqElement::from_json(&items[1])?,
                ])
            }
        };
        InertialType::new(dto.p, dto.f, dto.niveau, dto.exponents, unramified)
    }
}

/// A subset of the niveau-2 embedding set {0..2f-1} containing exactly one
/// of {s, s+f} for each s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BalancedSubset(JSet);

impl BalancedSubset {
    pub fn new(j: JSet) -> Result<Self> {
        let n = j.universe();
        if n % 2 != 0 || n == 0 {
            return Err(Error::Structural(
                "a balanced subset lives in an even universe 2f".into(),
            ));
        }
        let f = n / 2;
        for s in 0..f {
            if j.contains(s) == j.contains(s + f) {
                return Err(Error::Domain(format!(
                    "subset contains {} of the two extensions of {s}",
                    if j.contains(s) { "both" } else { "neither" }
                )));
            }
        }
        Ok(BalancedSubset(j))
    }

    pub fn jset(&self) -> &JSet {
        &self.0
    }

    /// All 2^f balanced subsets of {0..2f-1}.
    pub fn all(f: usize) -> impl Iterator<Item = BalancedSubset> {
        assert!(f < 32);
        (0u64..(1u64 << f)).map(move |choice| {
            let mut j = JSet::empty(2 * f);
            for s in 0..f {
                if (choice >> s) & 1 == 1 {
                    j = j.with(s + f);
                } else {
                    j = j.with(s);
                }
            }
            BalancedSubset(j)
        })
    }
}

impl std::fmt::Display for BalancedSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The unordered exponent pair cut out by J from weight w: the distinguished
/// character takes a_{i,1} + 1 on J and a_{i,2} off J, the other one the
/// complementary choice. `n` is the niveau (universe size n*f), weights
/// indexed by restriction s mod f.
fn exponent_pair(p: u32, f: usize, niveau: u8, w: &SerreWeight, j: &JSet) -> Result<[u64; 2]> {
    let nf = niveau as usize * f;
    let m = combinat::modulus(p, nf)? as i128;
    let mut e1: i128 = 0;
    let mut e2: i128 = 0;
    for s in 0..nf {
        let (a1, a2) = w.pairs[s % f];
        let weight = (p as i128).pow((nf - 1 - s) as u32) % m;
        if j.contains(s) {
            e1 = (e1 + weight * (a1 + 1) as i128).rem_euclid(m);
            e2 = (e2 + weight * a2 as i128).rem_euclid(m);
        } else {
            e1 = (e1 + weight * a2 as i128).rem_euclid(m);
            e2 = (e2 + weight * (a1 + 1) as i128).rem_euclid(m);
        }
    }
    Ok([e1 as u64, e2 as u64])
}

fn unordered(mut e: [u64; 2]) -> [u64; 2] {
    if e[0] > e[1] {
        e.swap(0, 1);
    }
    e
}

/// Niveau-1 inertial membership: all subsets J of {0..f-1} whose exponent
/// pair matches the type, and whether any exists. For split reducible data
/// this is exact; for non-split data it over-approximates (the extension
/// class is not examined).
pub fn bdj_inertial_niveau1(t: &InertialType, w: &SerreWeight) -> Result<(bool, Vec<JSet>)> {
    bdj_inertial_niveau1_bounded(t, w, combinat::MAX_ENUM_F)
}

pub fn bdj_inertial_niveau1_bounded(
    t: &InertialType,
    w: &SerreWeight,
    max_f: usize,
) -> Result<(bool, Vec<JSet>)> {
    if t.niveau != 1 {
        return Err(Error::Domain("expected a niveau-1 (reducible) type".into()));
    }
    if w.f() != t.f {
        return Err(Error::Structural("weight and type have different f".into()));
    }
    w.validate_for(t.p)?;
    if t.f > max_f {
        return Err(Error::Resource(format!(
            "f = {} exceeds the enumeration guard {max_f}",
            t.f
        )));
    }
    let mut witnesses = Vec::new();
    for j in JSet::all(t.f) {
        let pair = unordered(exponent_pair(t.p, t.f, 1, w, &j)?);
        if pair == t.exponents {
            witnesses.push(j);
        }
    }
    Ok((!witnesses.is_empty(), witnesses))
}

/// Niveau-2 inertial membership: all balanced subsets of {0..2f-1} whose
/// exponent pair matches the (irreducible) type.
pub fn bdj_inertial_niveau2(
    t: &InertialType,
    w: &SerreWeight,
) -> Result<(bool, Vec<BalancedSubset>)> {
    bdj_inertial_niveau2_bounded(t, w, combinat::MAX_ENUM_F)
}

pub fn bdj_inertial_niveau2_bounded(
    t: &InertialType,
    w: &SerreWeight,
    max_f: usize,
) -> Result<(bool, Vec<BalancedSubset>)> {
    if t.niveau != 2 {
        return Err(Error::Domain(
            "expected a niveau-2 (irreducible) type".into(),
        ));
    }
    if w.f() != t.f {
        return Err(Error::Structural("weight and type have different f".into()));
    }
    w.validate_for(t.p)?;
    if t.f > max_f {
        return Err(Error::Resource(format!(
            "f = {} exceeds the enumeration guard {max_f}",
            t.f
        )));
    }
    let mut witnesses = Vec::new();
    for j in BalancedSubset::all(t.f) {
        let pair = unordered(exponent_pair(t.p, t.f, 2, w, j.jset())?);
        if pair == t.exponents {
            witnesses.push(j);
        }
    }
    Ok((!witnesses.is_empty(), witnesses))
}

/// The exponent pair induced on the niveau-2 set by exponents b and a subset
/// J of {0..2f-1}: b_{s mod f, 1} on J, b_{s mod f, 2} off J, plus the
/// complementary character.
fn b_exponent_pair(p: u32, f: usize, b: &[(i64, i64)], j: &JSet) -> Result<[u64; 2]> {
    let m = combinat::modulus(p, 2 * f)? as i128;
    let mut e1: i128 = 0;
    let mut e2: i128 = 0;
    for s in 0..2 * f {
        let (b1, b2) = b[s % f];
        let weight = (p as i128).pow((2 * f - 1 - s) as u32) % m;
        if j.contains(s) {
            e1 = (e1 + weight * b1 as i128).rem_euclid(m);
            e2 = (e2 + weight * b2 as i128).rem_euclid(m);
        } else {
            e1 = (e1 + weight * b2 as i128).rem_euclid(m);
            e2 = (e2 + weight * b1 as i128).rem_euclid(m);
        }
    }
    Ok([e1 as u64, e2 as u64])
}

/// Rebalance a subset J of {0..2f-1} presenting an irreducible pair of
/// characters with per-embedding exponents (b_{s,1}, b_{s,2}),
/// 1 <= b_{s,1} - b_{s,2} <= p: returns a balanced subset inducing the same
/// unordered pair.
///
/// The defect sequence x_s (the width at s, signed by whether both or
/// neither extension of s lies in J) is in the carry kernel; it decomposes
/// into strings since irreducibility forces at least one x_s = 0, and
/// toggling the consecutive second-sheet lifts of each string interval
/// leaves both characters unchanged while balancing every position.
pub fn rebalance(p: u32, f: usize, b: &[(i64, i64)], j: &JSet) -> Result<BalancedSubset> {
    if p == 2 {
        return Err(Error::Domain("rebalancing requires p > 2".into()));
    }
    if f == 0 || b.len() != f {
        return Err(Error::Domain(format!(
            "expected f = {f} >= 1 exponent pairs, got {}",
            b.len()
        )));
    }
    for &(b1, b2) in b {
        let d = b1 - b2;
        if d < 1 || d > p as i64 {
            return Err(Error::Domain(format!(
                "width {d} outside [1, {p}] for pair ({b1}, {b2})"
            )));
        }
    }
    if j.universe() != 2 * f {
        return Err(Error::Structural("subset universe must be 2f".into()));
    }
    // irreducibility of the induced type: the two characters are swapped by
    // the p^f twist and distinct
    let m = combinat::modulus(p, 2 * f)? as u128;
    let pair = b_exponent_pair(p, f, b, j)?;
    let pf = (p as u128).pow(f as u32) % m;
    if (pair[0] as u128 * pf % m) as u64 != pair[1] {
        return Err(Error::Domain(
            "J does not induce a p^f-conjugate pair of characters".into(),
        ));
    }
    if pair[0] == pair[1] {
        return Err(Error::Domain(
            "J induces a character fixed by the p^f twist (not irreducible)".into(),
        ));
    }
    // defect sequence
    let mut x = vec![0i64; f];
    for s in 0..f {
        let both = j.contains(s) && j.contains(s + f);
        let neither = !j.contains(s) && !j.contains(s + f);
        if both {
            x[s] = b[s].0 - b[s].1;
        } else if neither {
            x[s] = b[s].1 - b[s].0;
        }
    }
    if x.iter().all(|&v| v == 0) {
        return BalancedSubset::new(*j);
    }
    let dec = combinat::carry_decompose(p, f, &x)?;
    let strings = match dec {
        combinat::CarryDecomposition::Strings { strings } => strings,
        _ => {
            return Err(Error::Internal(
                "irreducible defect sequence decomposed without strings".into(),
            ))
        }
    };
    let mut out = *j;
    for st in &strings {
        for t in 0..=st.len {
            out = out.toggled((st.start + f + t) % (2 * f));
        }
    }
    let balanced = BalancedSubset::new(out)
        .map_err(|_| Error::Internal("string toggling failed to balance".into()))?;
    let new_pair = b_exponent_pair(p, f, b, balanced.jset())?;
    if unordered(new_pair) != unordered(pair) {
        return Err(Error::Internal(
            "rebalancing changed the induced character pair".into(),
        ));
    }
    Ok(balanced)
}

/// Dimension of the space of residual extension classes admitting lifts with
/// the prescribed labeled weights: |J|, plus one when the two residual
/// characters coincide. A recorded formula; nothing is computed from
/// cohomology here.
pub fn crystalline_ext_dimension(j: &JSet, chars_equal: bool) -> usize {
    j.len() + usize::from(chars_equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FqField;

    #[test]
    fn weight_equivalence() {
        let w = |pairs: &[(i64, i64)]| SerreWeight::new(pairs.to_vec()).unwrap();
        assert!(weight_equivalent(&w(&[(1, 0)]), &w(&[(1, 0)]), 3).unwrap());
        // (1,0) ~ (3,2): widths agree, det twist exponent -2 = 0 mod 2
        assert!(weight_equivalent(&w(&[(1, 0)]), &w(&[(3, 2)]), 3).unwrap());
        // (1,0) vs (2,1): widths agree but the det twist has odd exponent
        assert!(!weight_equivalent(&w(&[(1, 0)]), &w(&[(2, 1)]), 3).unwrap());
        // width mismatch
        assert!(!weight_equivalent(&w(&[(1, 0)]), &w(&[(1, 1)]), 3).unwrap());
        // width bound is enforced
        assert!(weight_equivalent(&w(&[(4, 0)]), &w(&[(4, 0)]), 3).is_err());
    }

    #[test]
    fn hodge_types() {
        let w = SerreWeight::new(vec![(0, 0), (0, 0)]).unwrap();
        assert_eq!(w.hodge_type(), vec![[1, 0], [1, 0]]);
        let w = SerreWeight::new(vec![(1, 0), (2, 0)]).unwrap();
        assert_eq!(w.hodge_type(), vec![[2, 0], [3, 0]]);
        let w = SerreWeight::new(vec![(2, 0)]).unwrap();
        assert_eq!(w.hodge_type(), vec![[3, 0]]);
    }

    #[test]
    fn niveau1_witnesses() {
        // p = 3, f = 1, type {2, 0}, weight (1,0): both subsets match
        let t = InertialType::new(3, 1, 1, [2, 0], None).unwrap();
        let w = SerreWeight::new(vec![(1, 0)]).unwrap();
        let (member, wits) = bdj_inertial_niveau1(&t, &w).unwrap();
        assert!(member);
        assert_eq!(wits.len(), 2);

        // type {0, 0}, weight (p-2, 0): exponent p-1 collapses to 0
        let t = InertialType::new(3, 1, 1, [0, 0], None).unwrap();
        let w = SerreWeight::new(vec![(1, 0)]).unwrap();
        let (member, wits) = bdj_inertial_niveau1(&t, &w).unwrap();
        assert!(member);
        assert_eq!(wits.len(), 2);

        // determinant obstruction: a type whose exponent sum is wrong
        let t = InertialType::new(3, 1, 1, [1, 0], None).unwrap();
        let (member, wits) = bdj_inertial_niveau1(&t, &w).unwrap();
        assert!(!member);
        assert!(wits.is_empty());

        // niveau mismatch
        let t2 = InertialType::new(3, 1, 2, [2, 6], None).unwrap();
        assert!(bdj_inertial_niveau1(&t2, &w).is_err());
    }

    #[test]
    fn niveau2_witnesses() {
        // p = 3, f = 1, w = (1,0), type {2, 6} mod 8: both balanced subsets
        let t = InertialType::new(3, 1, 2, [2, 6], None).unwrap();
        let w = SerreWeight::new(vec![(1, 0)]).unwrap();
        let (member, wits) = bdj_inertial_niveau2(&t, &w).unwrap();
        assert!(member);
        assert_eq!(wits.len(), 2);

        // a non-conjugate pair is rejected at construction
        assert!(InertialType::new(3, 1, 2, [2, 5], None).is_err());
        // fixed by the twist: 0*3 = 0
        assert!(InertialType::new(3, 1, 2, [0, 0], None).is_err());
        // 4 * 3 = 12 = 4 mod 8 is fixed
        assert!(InertialType::new(3, 1, 2, [4, 4], None).is_err());

        // invalid weight
        let wide = SerreWeight::new(vec![(3, 0)]).unwrap();
        assert!(bdj_inertial_niveau2(&t, &wide).is_err());
    }

    #[test]
    fn membership_depends_only_on_weight_class() {
        // (1,0) and (3,2) are equivalent for p = 3, f = 1
        let w1 = SerreWeight::new(vec![(1, 0)]).unwrap();
        let w2 = SerreWeight::new(vec![(3, 2)]).unwrap();
        for e in 0..8u64 {
            let exps = [e, (e * 3) % 8];
            if let Ok(t) = InertialType::new(3, 1, 2, exps, None) {
                let m1 = bdj_inertial_niveau2(&t, &w1).unwrap().0;
                let m2 = bdj_inertial_niveau2(&t, &w2).unwrap().0;
                assert_eq!(m1, m2, "exponent {e}");
            }
        }
        for e1 in 0..2u64 {
            for e2 in 0..2u64 {
                let t = InertialType::new(3, 1, 1, [e1, e2], None).unwrap();
                let m1 = bdj_inertial_niveau1(&t, &w1).unwrap().0;
                let m2 = bdj_inertial_niveau1(&t, &w2).unwrap().0;
                assert_eq!(m1, m2);
            }
        }
    }

    #[test]
    fn rebalance_worked_example() {
        // f = 4: pairs ((1,0), (p-1,0), (p,0), (b,0)) with J = {1,2,3,5,6}
        // rebalances to {1,2,3,4}
        for p in [3u32, 5, 7] {
            for bexp in [1i64, p as i64 - 1] {
                let b = vec![(1i64, 0i64), (p as i64 - 1, 0), (p as i64, 0), (bexp, 0)];
                let j = JSet::from_indices(8, &[1, 2, 3, 5, 6]).unwrap();
                let out = rebalance(p, 4, &b, &j).unwrap();
                assert_eq!(
                    *out.jset(),
                    JSet::from_indices(8, &[1, 2, 3, 4]).unwrap(),
                    "p = {p}, b = {bexp}"
                );
            }
        }
    }

    #[test]
    fn rebalance_fixed_point_and_errors() {
        // already balanced: unchanged
        let b = vec![(2i64, 0i64), (1, 0)];
        let j = JSet::from_indices(4, &[0, 3]).unwrap();
        let out = rebalance(3, 2, &b, &j).unwrap();
        assert_eq!(*out.jset(), j);

        // a width-0 pair violates the hypothesis
        let bad = vec![(1i64, 1i64), (1, 0)];
        assert!(rebalance(3, 2, &bad, &j).is_err());

        // a J inducing a reducible (twist-fixed) pair is a domain error:
        // all widths equal and J = everything gives e1 = e2
        let b = vec![(2i64, 0i64), (2, 0)];
        let full = JSet::full(4);
        assert!(rebalance(3, 2, &b, &full).is_err());
    }

    #[test]
    fn dimension_formula() {
        let j = JSet::empty(3);
        assert_eq!(crystalline_ext_dimension(&j, false), 0);
        let j = JSet::from_indices(3, &[0, 2]).unwrap();
        assert_eq!(crystalline_ext_dimension(&j, true), 3);
        let j = JSet::full(3);
        assert_eq!(crystalline_ext_dimension(&j, false), 3);
    }

    #[test]
    fn inertial_type_json() {
        let f9 = FqField::extension(3, &[1, 0, 1]).unwrap();
        let t = InertialType::new(
            3,
            2,
            1,
            [5, 1],
            Some([f9.from_int(2), f9.element(&[0, 1]).unwrap()]),
        )
        .unwrap();
        assert_eq!(InertialType::from_json(&t.to_json()).unwrap(), t);
        let t = InertialType::new(3, 1, 2, [2, 6], None).unwrap();
        assert_eq!(InertialType::from_json(&t.to_json()).unwrap(), t);
    }
}
