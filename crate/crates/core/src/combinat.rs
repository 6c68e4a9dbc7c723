//! Base-p carrying combinatorics on cyclic integer sequences.
//!
//! The central objects: the kernel of r -> sum_i p^{f-1-i} r_i mod p^f - 1 on
//! sequences with entries in [-p, p], its decomposition into signed strings
//! (-1, p-1, ..., p-1, p), the set P of tuples over {1, p-1, p} with cyclic
//! adjacency rules, the twisted exponent h(J), and the distinguished subset
//! J_max among all J with the same h.
//!
//! Everything here is plain integer arithmetic; no field elements appear.
//! p = 2 is accepted by `carry_decompose` only (to cover the all-twos case);
//! the rest of the module requires p > 2.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on 2^f enumerations.
pub const MAX_ENUM_F: usize = 24;

/// A subset of {0, .., n-1} stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JSet {
    n: usize,
    bits: u64,
}

impl JSet {
    pub fn empty(n: usize) -> Self {
        assert!(n <= 64, "universe too large");
        JSet { n, bits: 0 }
    }

    pub fn full(n: usize) -> Self {
        assert!(n <= 64 && n > 0, "universe size out of range");
        JSet {
            n,
            bits: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
        }
    }

    pub fn from_bits(n: usize, bits: u64) -> Self {
        assert!(n <= 64);
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        JSet {
            n,
            bits: bits & mask,
        }
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut s = Self::empty(n);
        for &i in indices {
            if i >= n {
                return Err(Error::Domain(format!(
                    "index {i} outside the universe {{0..{}}}",
                    n - 1
                )));
            }
            if s.contains(i) {
                return Err(Error::Domain(format!("duplicate index {i}")));
            }
            s.bits |= 1 << i;
        }
        Ok(s)
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && (self.bits >> i) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_full(&self) -> bool {
        *self == Self::full(self.n)
    }

    pub fn complement(&self) -> Self {
        Self::from_bits(self.n, !self.bits)
    }

    pub fn with(&self, i: usize) -> Self {
        assert!(i < self.n);
        Self::from_bits(self.n, self.bits | (1 << i))
    }

    pub fn without(&self, i: usize) -> Self {
        assert!(i < self.n);
        Self::from_bits(self.n, self.bits & !(1 << i))
    }

    pub fn toggled(&self, i: usize) -> Self {
        assert!(i < self.n);
        Self::from_bits(self.n, self.bits ^ (1 << i))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.contains(i))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All 2^n subsets of the universe, in bitmask order.
    pub fn all(n: usize) -> impl Iterator<Item = JSet> {
        assert!(n < 64);
        (0u64..(1u64 << n)).map(move |bits| JSet { n, bits })
    }
}

impl fmt::Display for JSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{{}}}",
            self.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// A residue class h mod p^f - 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HClass {
    p: u32,
    f: usize,
    h: u64,
}

impl HClass {
    pub fn new(p: u32, f: usize, h: i128) -> Result<Self> {
        let m = modulus(p, f)?;
        Ok(HClass {
            p,
            f,
            h: h.rem_euclid(m as i128) as u64,
        })
    }

    pub fn value(&self) -> u64 {
        self.h
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn f(&self) -> usize {
        self.f
    }
}

impl fmt::Display for HClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{} - 1)", self.h, self.p, self.f)
    }
}

/// p^f - 1, guarded against overflow.
pub(crate) fn modulus(p: u32, f: usize) -> Result<u64> {
    if f == 0 {
        return Err(Error::Domain("f must be >= 1".into()));
    }
    let q = (p as u128).checked_pow(f as u32);
    match q {
        Some(q) if q - 1 <= u64::MAX as u128 && q > 1 => Ok((q - 1) as u64),
        _ => Err(Error::Resource(format!(
            "p^f = {p}^{f} does not fit the supported exponent range"
        ))),
    }
}

/// sum_i p^{f-1-i} r_i mod p^f - 1, for arbitrary integer entries.
pub(crate) fn weighted_sum_mod(p: u32, f: usize, r: &[i64]) -> Result<u64> {
    let m = modulus(p, f)? as i128;
    let mut acc: i128 = 0;
    for (i, &ri) in r.iter().enumerate() {
        let w = (p as i128).pow((f - 1 - i) as u32) % m;
        acc = (acc + w * ri as i128).rem_euclid(m);
    }
    Ok(acc as u64)
}

fn check_sequence(p: u32, f: usize, r: &[i64]) -> Result<()> {
    if f == 0 || r.len() != f {
        return Err(Error::Domain(format!(
            "sequence length {} does not match f = {f} >= 1",
            r.len()
        )));
    }
    for &ri in r {
        if ri.unsigned_abs() > p as u64 {
            return Err(Error::Domain(format!(
                "entry {ri} outside the range [-{p}, {p}]"
            )));
        }
    }
    Ok(())
}

/// One signed string: the cyclic interval [start, start+len] carries
/// sign * (-1, p-1, ..., p-1, p), with len >= 1 (so a minimal string is
/// (-1, p) and a string of len j occupies j+1 positions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarryString {
    pub start: usize,
    pub len: usize,
    pub sign: i8,
}

/// The trichotomy for kernel sequences with entries in [-p, p].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CarryDecomposition {
    /// sign * (p-1, ..., p-1)
    AllPMinusOne { sign: i8 },
    /// disjoint signed strings; positions outside every string carry 0.
    Strings { strings: Vec<CarryString> },
    /// p = 2 only: sign * (2, ..., 2)
    AllTwo { sign: i8 },
}

impl CarryDecomposition {
    /// Reassemble the sequence this decomposition describes.
    pub fn to_sequence(&self, p: u32, f: usize) -> Vec<i64> {
        let p = p as i64;
        match self {
            CarryDecomposition::AllPMinusOne { sign } => vec![*sign as i64 * (p - 1); f],
            CarryDecomposition::AllTwo { sign } => vec![*sign as i64 * 2; f],
            CarryDecomposition::Strings { strings } => {
                let mut r = vec![0i64; f];
                for s in strings {
                    let sg = s.sign as i64;
                    r[s.start % f] = -sg;
                    for t in 1..s.len {
                        r[(s.start + t) % f] = sg * (p - 1);
                    }
                    r[(s.start + s.len) % f] = sg * p;
                }
                r
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DecompositionDto {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    strings: Option<Vec<CarryString>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sign: Option<i8>,
}

impl CarryDecomposition {
    pub fn to_json(&self) -> serde_json::Value {
        let dto = match self {
            CarryDecomposition::AllPMinusOne { sign } => DecompositionDto {
                kind: "all-p-minus-one".into(),
                strings: None,
                sign: Some(*sign),
            },
            CarryDecomposition::Strings { strings } => DecompositionDto {
                kind: "strings".into(),
                strings: Some(strings.clone()),
                sign: None,
            },
            CarryDecomposition::AllTwo { sign } => DecompositionDto {
                kind: "all-two".into(),
                strings: None,
                sign: Some(*sign),
            },
        };
        serde_json::to_value(dto).expect("decomposition serialization cannot fail")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let dto: DecompositionDto = serde_json::from_value(v.clone())
            .map_err(|e| Error::Malformed(format!("decomposition: {e}")))?;
        match dto.kind.as_str() {
            "all-p-minus-one" => Ok(CarryDecomposition::AllPMinusOne {
                sign: dto
                    .sign
                    .ok_or_else(|| Error::Malformed("missing sign".into()))?,
            }),
            "all-two" => Ok(CarryDecomposition::AllTwo {
                sign: dto
                    .sign
                    .ok_or_else(|| Error::Malformed("missing sign".into()))?,
            }),
            "strings" => Ok(CarryDecomposition::Strings {
                strings: dto
                    .strings
                    .ok_or_else(|| Error::Malformed("missing strings".into()))?,
            }),
            k => Err(Error::Malformed(format!("unknown decomposition kind {k}"))),
        }
    }
}

/// Decompose a kernel sequence r in [-p, p]^f.
///
/// The all-(p-1) and (p = 2) all-two labels take priority over a string
/// description. String discovery anchors at each +-p entry and walks
/// backwards over the sign-matched (p-1) run to the mandatory -+1 start.
/// p = 2 is allowed here, and only here.
pub fn carry_decompose(p: u32, f: usize, r: &[i64]) -> Result<CarryDecomposition> {
    if p < 2 {
        return Err(Error::Domain("p must be a prime >= 2".into()));
    }
    check_sequence(p, f, r)?;
    if weighted_sum_mod(p, f, r)? != 0 {
        return Err(Error::NotInKernel(format!(
            "sum_i p^(f-1-i) r_i is not 0 mod {p}^{f} - 1"
        )));
    }
    let pi = p as i64;
    if r.iter().all(|&x| x == pi - 1) {
        return Ok(CarryDecomposition::AllPMinusOne { sign: 1 });
    }
    if r.iter().all(|&x| x == -(pi - 1)) {
        return Ok(CarryDecomposition::AllPMinusOne { sign: -1 });
    }
    if p == 2 {
        if r.iter().all(|&x| x == 2) {
            return Ok(CarryDecomposition::AllTwo { sign: 1 });
        }
        if r.iter().all(|&x| x == -2) {
            return Ok(CarryDecomposition::AllTwo { sign: -1 });
        }
    }
    let mut covered = vec![false; f];
    let mut strings = Vec::new();
    for end in 0..f {
        if r[end] != pi && r[end] != -pi {
            continue;
        }
        let sign: i64 = if r[end] == pi { 1 } else { -1 };
        // walk backwards over the sign * (p-1) run
        let mut len = 1usize;
        loop {
            if len >= f {
                return Err(Error::Internal(format!(
                    "string anchored at {end} wraps the whole cycle"
                )));
            }
            let idx = (end + f - len) % f;
            if r[idx] == sign * (pi - 1) {
                len += 1;
                continue;
            }
            if r[idx] == -sign {
                break;
            }
            return Err(Error::Internal(format!(
                "string anchored at {end} has no -({sign}) start"
            )));
        }
        let start = (end + f - len) % f;
        for t in 0..=len {
            let idx = (start + t) % f;
            if covered[idx] {
                return Err(Error::Internal("overlapping strings".into()));
            }
            covered[idx] = true;
        }
        strings.push(CarryString {
            start,
            len,
            sign: sign as i8,
        });
    }
    for i in 0..f {
        if !covered[i] && r[i] != 0 {
            return Err(Error::Internal(format!(
                "position {i} carries {} outside every string",
                r[i]
            )));
        }
    }
    strings.sort_by_key(|s| s.start);
    Ok(CarryDecomposition::Strings { strings })
}

/// Membership in the set P: all entries in {1, p-1, p}, every p followed by
/// a 1, and every 1 or p-1 followed by a p-1 or p (cyclically).
pub fn p_set_member(p: u32, r: &[i64]) -> bool {
    let pi = p as i64;
    let f = r.len();
    if f == 0 {
        return false;
    }
    if !r.iter().all(|&x| x == 1 || x == pi - 1 || x == pi) {
        return false;
    }
    for i in 0..f {
        let next = r[(i + 1) % f];
        if r[i] == pi && next != 1 {
            return false;
        }
        if (r[i] == 1 || r[i] == pi - 1) && !(next == pi - 1 || next == pi) {
            return false;
        }
    }
    true
}

fn check_one_to_p(p: u32, f: usize, r: &[i64]) -> Result<()> {
    if f == 0 || r.len() != f {
        return Err(Error::Domain(format!(
            "sequence length {} does not match f = {f} >= 1",
            r.len()
        )));
    }
    for &ri in r {
        if ri < 1 || ri > p as i64 {
            return Err(Error::Domain(format!(
                "entry {ri} outside the range [1, {p}]"
            )));
        }
    }
    Ok(())
}

/// h(J) = sum_i p^{f-1-i} h_i mod p^f - 1 where h_i = r_i for i in J, else 0.
pub fn h_of_j(p: u32, f: usize, r: &[i64], j: &JSet) -> Result<HClass> {
    check_one_to_p(p, f, r)?;
    if j.universe() != f {
        return Err(Error::Structural(format!(
            "subset universe {} does not match f = {f}",
            j.universe()
        )));
    }
    let masked: Vec<i64> = (0..f)
        .map(|i| if j.contains(i) { r[i] } else { 0 })
        .collect();
    let h = weighted_sum_mod(p, f, &masked)?;
    HClass::new(p, f, h as i128)
}

/// All J with h(J) equal to the given class, by enumeration over 2^f subsets.
pub fn j_sets_for_h(p: u32, f: usize, r: &[i64], h: &HClass) -> Result<Vec<JSet>> {
    j_sets_for_h_bounded(p, f, r, h, MAX_ENUM_F)
}

/// As `j_sets_for_h`, with an explicit enumeration guard.
pub fn j_sets_for_h_bounded(
    p: u32,
    f: usize,
    r: &[i64],
    h: &HClass,
    max_f: usize,
) -> Result<Vec<JSet>> {
    check_one_to_p(p, f, r)?;
    if f > max_f {
        return Err(Error::Resource(format!(
            "f = {f} exceeds the enumeration guard {max_f}"
        )));
    }
    let mut out = Vec::new();
    for j in JSet::all(f) {
        if h_of_j(p, f, r, &j)? == *h {
            out.push(j);
        }
    }
    Ok(out)
}

/// The maximal runs (1, p-1, ..., p-1, p) in r, as (start, s) with the run
/// occupying positions start..=start+s cyclically (s >= 1). Requires p > 2,
/// where the three values are distinct and runs are unambiguous.
pub fn flip_strings(p: u32, f: usize, r: &[i64]) -> Result<Vec<(usize, usize)>> {
    if p <= 2 {
        return Err(Error::Domain("flip strings require p > 2".into()));
    }
    check_one_to_p(p, f, r)?;
    let pi = p as i64;
    let mut out = Vec::new();
    for start in 0..f {
        if r[start] != 1 {
            continue;
        }
        let mut s = 1usize;
        loop {
            if s >= f {
                break; // walked the whole cycle without closing on a p
            }
            let v = r[(start + s) % f];
            if v == pi {
                out.push((start, s));
                break;
            }
            if v == pi - 1 {
                s += 1;
                continue;
            }
            break;
        }
    }
    Ok(out)
}

/// The two alternation rules on J from the kernel characterization: across a
/// (p, 1) step the indicator of J flips, across a (1, p-1) or (p-1, p-1) step
/// it is constant. (Steps keyed on (r_{i-1}, r_i), constraining i and i+1.)
pub fn j_alternation_ok(p: u32, f: usize, r: &[i64], j: &JSet) -> Result<bool> {
    check_one_to_p(p, f, r)?;
    if j.universe() != f {
        return Err(Error::Structural("subset universe mismatch".into()));
    }
    let pi = p as i64;
    for i in 0..f {
        let prev = r[(i + f - 1) % f];
        let here = r[i];
        let next_in = j.contains((i + 1) % f);
        let here_in = j.contains(i);
        if (prev, here) == (pi, 1) && next_in == here_in {
            return Ok(false);
        }
        if (prev == 1 || prev == pi - 1) && here == pi - 1 && next_in != here_in {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The unique J_max with h(J_max) = h(J): every string split by J in the
/// orientation (start in J, tail outside) is flipped to (start outside, tail
/// inside). In the all-(p-1) case with J empty or full, J_max is everything.
pub fn j_max(p: u32, f: usize, r: &[i64], j: &JSet) -> Result<JSet> {
    if p <= 2 {
        return Err(Error::Domain("J_max requires p > 2".into()));
    }
    check_one_to_p(p, f, r)?;
    if j.universe() != f {
        return Err(Error::Structural("subset universe mismatch".into()));
    }
    let pi = p as i64;
    if r.iter().all(|&x| x == pi - 1) && (j.is_empty() || j.is_full()) {
        return Ok(JSet::full(f));
    }
    let mut out = *j;
    for (start, s) in flip_strings(p, f, r)? {
        let tail_outside = (1..=s).all(|t| !j.contains((start + t) % f));
        if j.contains(start) && tail_outside {
            out = out.without(start);
            for t in 1..=s {
                out = out.with((start + t) % f);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn carry_trichotomy_examples() {
        // 3*2 + 2 = 8 = 0 mod 8
        assert_eq!(
            carry_decompose(3, 2, &[2, 2]).unwrap(),
            CarryDecomposition::AllPMinusOne { sign: 1 }
        );
        // -3 + 3 = 0
        assert_eq!(
            carry_decompose(3, 2, &[-1, 3]).unwrap(),
            CarryDecomposition::Strings {
                strings: vec![CarryString {
                    start: 0,
                    len: 1,
                    sign: 1
                }]
            }
        );
        assert_eq!(
            carry_decompose(3, 2, &[0, 0]).unwrap(),
            CarryDecomposition::Strings { strings: vec![] }
        );
        // failing the congruence is an explicit error
        assert!(matches!(
            carry_decompose(3, 2, &[1, 0]),
            Err(Error::NotInKernel(_))
        ));
        // p = 2 is allowed here, covering the all-twos case
        assert_eq!(
            carry_decompose(2, 2, &[2, 2]).unwrap(),
            CarryDecomposition::AllTwo { sign: 1 }
        );
        assert_eq!(
            carry_decompose(2, 3, &[2, 0, -1]).unwrap(),
            CarryDecomposition::Strings {
                strings: vec![CarryString {
                    start: 2,
                    len: 1,
                    sign: 1
                }]
            }
        );
    }

    #[test]
    fn carry_wrapping_string() {
        // (3, -1) for p=3, f=2: 3*3 - 1 = 8 = 0 mod 8; the string wraps
        let d = carry_decompose(3, 2, &[3, -1]).unwrap();
        assert_eq!(
            d,
            CarryDecomposition::Strings {
                strings: vec![CarryString {
                    start: 1,
                    len: 1,
                    sign: 1
                }]
            }
        );
        assert_eq!(d.to_sequence(3, 2), vec![3, -1]);
    }

    #[test]
    fn carry_reconstruction_exhaustive_small() {
        for p in [2u32, 3, 5] {
            for f in 1usize..=3 {
                let m = modulus(p, f).unwrap() as i128;
                let range: Vec<i64> = (-(p as i64)..=p as i64).collect();
                for r in crate::util::cartesian_power(&range, f) {
                    let mut acc: i128 = 0;
                    for (i, &ri) in r.iter().enumerate() {
                        acc += (p as i128).pow((f - 1 - i) as u32) * ri as i128;
                    }
                    let in_kernel = acc.rem_euclid(m) == 0;
                    match carry_decompose(p, f, &r) {
                        Ok(d) => {
                            assert!(in_kernel, "decomposed a non-kernel sequence {r:?}");
                            assert_eq!(d.to_sequence(p, f), r, "reconstruction for {r:?}");
                        }
                        Err(Error::NotInKernel(_)) => assert!(!in_kernel),
                        Err(e) => panic!("unexpected error for {r:?}: {e}"),
                    }
                }
            }
        }
    }

    #[test]
    fn p_set_examples() {
        assert!(p_set_member(3, &[3, 1]));
        assert!(p_set_member(3, &[2, 2]));
        assert!(!p_set_member(3, &[3, 2]));
        assert!(p_set_member(3, &[2]));
        assert!(!p_set_member(3, &[1])); // 1 must be followed by p-1 or p
        assert!(!p_set_member(3, &[3])); // p must be followed by 1
        assert!(p_set_member(3, &[1, 3]));
    }

    #[test]
    fn h_and_j_sets() {
        let h = h_of_j(3, 2, &[1, 3], &JSet::from_indices(2, &[0]).unwrap()).unwrap();
        assert_eq!(h.value(), 3);
        let h_empty = h_of_j(3, 2, &[1, 3], &JSet::empty(2)).unwrap();
        assert_eq!(h_empty.value(), 0);
        let h1 = h_of_j(3, 2, &[1, 3], &JSet::from_indices(2, &[1]).unwrap()).unwrap();
        assert_eq!(h1.value(), 3);

        let sets = j_sets_for_h(3, 2, &[1, 3], &h).unwrap();
        assert_eq!(
            sets,
            vec![
                JSet::from_indices(2, &[0]).unwrap(),
                JSet::from_indices(2, &[1]).unwrap()
            ]
        );

        // f = 1, r = (2): h({0}) = 2 = 0 mod 2, so both subsets hit 0
        let h0 = HClass::new(3, 1, 0).unwrap();
        let sets = j_sets_for_h(3, 1, &[2], &h0).unwrap();
        assert_eq!(sets.len(), 2);

        // unattained class
        let h_miss = HClass::new(3, 2, 1).unwrap();
        assert!(j_sets_for_h(3, 2, &[1, 3], &h_miss).unwrap().is_empty());

        assert!(matches!(
            j_sets_for_h_bounded(3, 2, &[1, 3], &h, 1),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn j_max_examples() {
        let j0 = JSet::from_indices(2, &[0]).unwrap();
        assert_eq!(
            j_max(3, 2, &[1, 3], &j0).unwrap(),
            JSet::from_indices(2, &[1]).unwrap()
        );
        // all-(p-1), empty J
        assert_eq!(
            j_max(3, 2, &[2, 2], &JSet::empty(2)).unwrap(),
            JSet::full(2)
        );
        // already maximal: fixed point
        let j1 = JSet::from_indices(2, &[1]).unwrap();
        assert_eq!(j_max(3, 2, &[1, 3], &j1).unwrap(), j1);
        assert_eq!(
            j_max(3, 2, &[1, 3], &j_max(3, 2, &[1, 3], &j0).unwrap()).unwrap(),
            j1
        );
        // p = 2 is out of scope here
        assert!(j_max(2, 2, &[1, 2], &JSet::empty(2)).is_err());
    }

    #[test]
    fn flip_strings_found() {
        assert_eq!(flip_strings(3, 2, &[1, 3]).unwrap(), vec![(0, 1)]);
        // wrapping string
        assert_eq!(flip_strings(3, 2, &[3, 1]).unwrap(), vec![(1, 1)]);
        // longer string with p-1 interior
        assert_eq!(flip_strings(3, 3, &[1, 2, 3]).unwrap(), vec![(0, 2)]);
        // no p: no string closes
        assert!(flip_strings(3, 3, &[1, 2, 2]).unwrap().is_empty());
    }

    #[test]
    fn decomposition_json_round_trip() {
        let d = carry_decompose(3, 2, &[-1, 3]).unwrap();
        let j = d.to_json();
        let expect: serde_json::Value =
            serde_json::from_str(r#"{"kind":"strings","strings":[{"start":0,"len":1,"sign":1}]}"#)
                .unwrap();
        assert_eq!(j, expect);
        assert_eq!(CarryDecomposition::from_json(&j).unwrap(), d);
    }
}
