//! Rank-two extensions of rank-one modules and their normal forms.
//!
//! An extension of type (r, a, b, J) is presented, per component i, by
//!
//!   phi(e_{i-1}) = (b)_i u^{r_i - h_i} e_i
//!   phi(f_{i-1}) = (a)_i u^{h_i} f_i + x_i e_i
//!
//! with h_i = r_i for i in J and 0 otherwise. A change of basis
//! f'_i = f_i + alpha_i e_i replaces
//!
//!   x'_i = x_i + (b)_i u^{r_i - h_i} phi(alpha_{i-1}) - (a)_i u^{h_i} alpha_i.
//!
//! Reduction tracks which coefficient degrees a change of basis can reach:
//! the pairs (i, d) with i in J, d >= r_i fall into loops, stubs and paths
//! under the "affects" relation, and the loop (at most one, all degrees p)
//! is the only obstruction - precisely when the sub- and quotient labels
//! agree one term of degree p survives.
//!
//! Equivalence of two extensions with the same type data is decided exactly,
//! by Gaussian elimination over F_q on the linearized change-of-basis
//! equation at the stored truncation.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{ElementDto, FqElement, FqField, SeriesDto, TruncatedSeries};
use crate::combinat::JSet;
use crate::error::{Error, Result};
use crate::linalg;

/// Cap on crystalline-form enumerations (q^{|J|} entries).
const MAX_FORMS: u128 = 1 << 20;

/// The type data (p, f, r, J, a, b) of a rank-two extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionType {
    p: u32,
    f: usize,
    r: Vec<u32>,
    j: JSet,
    a: FqElement,
    b: FqElement,
}

impl ExtensionType {
    pub fn new(p: u32, f: usize, r: Vec<u32>, j: JSet, a: FqElement, b: FqElement) -> Result<Self> {
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
        if a.field() != b.field() {
            return Err(Error::Structural(
                "labels a, b from different fields".into(),
            ));
        }
        if a.field().p() != p {
            return Err(Error::Structural(format!(
                "labels live in characteristic {}, type has p = {p}",
                a.field().p()
            )));
        }
        if a.is_zero() || b.is_zero() {
            return Err(Error::Degenerate("labels a, b must be nonzero".into()));
        }
        Ok(ExtensionType { p, f, r, j, a, b })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn r(&self) -> &[u32] {
        &self.r
    }

    pub fn j(&self) -> &JSet {
        &self.j
    }

    pub fn a(&self) -> &FqElement {
        &self.a
    }

    pub fn b(&self) -> &FqElement {
        &self.b
    }

    pub fn field(&self) -> &Arc<FqField> {
        self.a.field()
    }

    /// h_i = r_i [i in J].
    pub fn h(&self, i: usize) -> u32 {
        if self.j.contains(i) {
            self.r[i]
        } else {
            0
        }
    }

    /// The same type with J replaced.
    pub fn with_j(&self, j: JSet) -> Result<Self> {
        ExtensionType::new(
            self.p,
            self.f,
            self.r.clone(),
            j,
            self.a.clone(),
            self.b.clone(),
        )
    }

    /// (a)_i: a at the wrap-around index 0, 1 otherwise.
    fn label_a_at(&self, i: usize) -> FqElement {
        if i % self.f == 0 {
            self.a.clone()
        } else {
            self.field().one()
        }
    }

    fn label_b_at(&self, i: usize) -> FqElement {
        if i % self.f == 0 {
            self.b.clone()
        } else {
            self.field().one()
        }
    }

    /// (a)_S for the integer range {i+1, ..., i+len}: a iff the range
    /// contains a multiple of f. For i in [0, f) this happens iff i+len >= f.
    fn label_a_range(&self, i: usize, len: usize) -> FqElement {
        if len >= 1 && i + len >= self.f {
            self.a.clone()
        } else {
            self.field().one()
        }
    }

    fn label_b_range(&self, i: usize, len: usize) -> FqElement {
        if len >= 1 && i + len >= self.f {
            self.b.clone()
        } else {
            self.field().one()
        }
    }

    /// Least positive delta with i + delta in J (i in J required).
    fn delta(&self, i: usize) -> usize {
        debug_assert!(self.j.contains(i));
        for d in 1..=self.f {
            if self.j.contains((i + d) % self.f) {
                return d;
            }
        }
        unreachable!("J is nonempty")
    }

    /// The affects image of the pair (i, d): (i + delta_i, d') with
    /// d' = p^delta (d - r_i) + sum_{j=1..delta-1} r_{i+j} p^{delta-j}.
    fn affects(&self, i: usize, d: usize) -> (usize, u128) {
        let delta = self.delta(i);
        let p = self.p as u128;
        let mut dp: u128 = p.pow(delta as u32) * (d as u128 - self.r[i] as u128);
        for j in 1..delta {
            dp += self.r[(i + j) % self.f] as u128 * p.pow((delta - j) as u32);
        }
        ((i + delta) % self.f, dp)
    }

    /// The transfer constant along the affects step out of i:
    /// (b)_{i+1..i+delta} / (a)_{i+1..i+delta-1}.
    fn transfer_constant(&self, i: usize) -> FqElement {
        let delta = self.delta(i);
        let num = self.label_b_range(i, delta);
        let den = self.label_a_range(i, delta.saturating_sub(1));
        num.mul(&den.inv().expect("labels are nonzero"))
    }

    /// The configuration in which the degree-p loop term cannot be removed:
    /// r is in the set P, J consists of the indices with r_i in {p-1, p},
    /// and the two labels agree.
    pub fn is_exceptional(&self) -> bool {
        let r64: Vec<i64> = self.r.iter().map(|&x| x as i64).collect();
        if !crate::combinat::p_set_member(self.p, &r64) {
            return false;
        }
        let expected: Vec<usize> = (0..self.f)
            .filter(|&i| self.r[i] == self.p - 1 || self.r[i] == self.p)
            .collect();
        let expected = JSet::from_indices(self.f, &expected).expect("indices in range");
        expected == self.j && self.a == self.b
    }
}

impl fmt::Display for ExtensionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(r = {:?}, a = {}, b = {}, J = {})",
            self.r, self.a, self.b, self.j
        )
    }
}

/// A rank-two extension: type data plus the extension coefficients x_i,
/// all truncated at a common N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionData {
    ty: ExtensionType,
    x: Vec<TruncatedSeries>,
}

impl ExtensionData {
    pub fn new(ty: ExtensionType, x: Vec<TruncatedSeries>) -> Result<Self> {
        if x.len() != ty.f {
            return Err(Error::Structural(format!(
                "{} extension coefficients for f = {}",
                x.len(),
                ty.f
            )));
        }
        let trunc = x[0].trunc();
        for s in &x {
            if s.field() != ty.field() {
                return Err(Error::Structural(
                    "extension coefficient from a different field".into(),
                ));
            }
            if s.trunc() != trunc {
                return Err(Error::Structural(
                    "extension coefficients must share a truncation".into(),
                ));
            }
        }
        Ok(ExtensionData { ty, x })
    }

    /// The split extension (x = 0).
    pub fn split(ty: ExtensionType, trunc: usize) -> Self {
        let x = (0..ty.f)
            .map(|_| TruncatedSeries::zero(ty.field(), trunc))
            .collect();
        ExtensionData { ty, x }
    }

    pub fn ty(&self) -> &ExtensionType {
        &self.ty
    }

    pub fn x(&self) -> &[TruncatedSeries] {
        &self.x
    }

    pub fn trunc(&self) -> usize {
        self.x[0].trunc()
    }

    /// Scale every extension coefficient by a unit.
    pub fn scale_x(&self, lambda: &FqElement) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::Domain("scaling by zero collapses the class".into()));
        }
        let x = self
            .x
            .iter()
            .map(|s| s.scale(lambda))
            .collect::<Result<Vec<_>>>()?;
        ExtensionData::new(self.ty.clone(), x)
    }

    /// Whether x matches the type shape: zero off J, and degree below h_i on
    /// J except for the permitted degree-p term at min(J) in the exceptional
    /// configuration.
    pub fn is_normal_form(&self) -> bool {
        let n = self.trunc();
        let p = self.ty.p as usize;
        let i0 = self.ty.j.iter().next();
        for i in 0..self.ty.f {
            if !self.ty.j.contains(i) {
                if !self.x[i].is_zero() {
                    return false;
                }
                continue;
            }
            for d in self.ty.r[i] as usize..=n {
                if self.x[i].coeff(d).is_zero() {
                    continue;
                }
                let permitted = self.ty.is_exceptional() && Some(i) == i0 && d == p;
                if !permitted {
                    return false;
                }
            }
        }
        true
    }
}

/// A change of basis f'_i = f_i + alpha_i e_i.
///
/// General changes (any alpha vector) arise as equivalence witnesses. The
/// `j_supported` constructor additionally enforces the recursion
/// alpha_i = (b/a)_i u^{r_i} phi(alpha_{i-1}) at indices outside J, which is
/// exactly the class of changes preserving x_i = 0 off J.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisChange {
    alpha: Vec<TruncatedSeries>,
}

impl BasisChange {
    pub fn new(alpha: Vec<TruncatedSeries>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Domain("empty change of basis".into()));
        }
        let trunc = alpha[0].trunc();
        for s in &alpha {
            if s.field() != alpha[0].field() || s.trunc() != trunc {
                return Err(Error::Structural(
                    "change-of-basis series must share field and truncation".into(),
                ));
            }
        }
        Ok(BasisChange { alpha })
    }

    pub fn zero(ty: &ExtensionType, trunc: usize) -> Self {
        BasisChange {
            alpha: (0..ty.f)
                .map(|_| TruncatedSeries::zero(ty.field(), trunc))
                .collect(),
        }
    }

    /// Validating constructor for changes supported on J: the recursion at
    /// indices outside J is checked (when J is nonempty).
    pub fn j_supported(ty: &ExtensionType, alpha: Vec<TruncatedSeries>) -> Result<Self> {
        let bc = Self::new(alpha)?;
        if bc.alpha.len() != ty.f {
            return Err(Error::Structural("change-of-basis length != f".into()));
        }
        if !ty.j.is_empty() {
            let b_over_a = ty.b.mul(&ty.a.inv().expect("a nonzero"));
            for i in 0..ty.f {
                if ty.j.contains(i) {
                    continue;
                }
                let prev = (i + ty.f - 1) % ty.f;
                let mut expect = bc.alpha[prev]
                    .frobenius_substitute()
                    .mul_u_pow(ty.r[i] as usize);
                if i == 0 {
                    expect = expect.scale(&b_over_a)?;
                }
                if bc.alpha[i] != expect {
                    return Err(Error::Domain(format!(
                        "alpha_{i} violates the off-J recursion"
                    )));
                }
            }
        }
        Ok(bc)
    }

    /// Build the J-supported change with the given seeds at J indices (zero
    /// where omitted), deriving the off-J series from the recursion.
    pub fn from_j_seeds(
        ty: &ExtensionType,
        trunc: usize,
        seeds: &[(usize, TruncatedSeries)],
    ) -> Result<Self> {
        if ty.j.is_empty() {
            return Err(Error::Domain(
                "J is empty; there are no seed positions".into(),
            ));
        }
        let mut alpha: Vec<TruncatedSeries> = (0..ty.f)
            .map(|_| TruncatedSeries::zero(ty.field(), trunc))
            .collect();
        for (i, s) in seeds {
            if !ty.j.contains(*i) {
                return Err(Error::Domain(format!("seed index {i} is not in J")));
            }
            if s.trunc() != trunc || s.field() != ty.field() {
                return Err(Error::Structural("seed series mismatch".into()));
            }
            alpha[*i] = alpha[*i].add(s)?;
        }
        let b_over_a = ty.b.mul(&ty.a.inv().expect("a nonzero"));
        for j0 in ty.j.iter() {
            let mut i = (j0 + 1) % ty.f;
            while !ty.j.contains(i) {
                let prev = (i + ty.f - 1) % ty.f;
                let mut next = alpha[prev]
                    .frobenius_substitute()
                    .mul_u_pow(ty.r[i] as usize);
                if i == 0 {
                    next = next.scale(&b_over_a)?;
                }
                alpha[i] = next;
                i = (i + 1) % ty.f;
            }
        }
        Ok(BasisChange { alpha })
    }

    pub fn alpha(&self) -> &[TruncatedSeries] {
        &self.alpha
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.iter().all(|s| s.is_zero())
    }

    /// Pointwise sum; composing two changes adds their alphas.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.alpha.len() != other.alpha.len() {
            return Err(Error::Structural("change-of-basis length mismatch".into()));
        }
        let alpha = self
            .alpha
            .iter()
            .zip(&other.alpha)
            .map(|(x, y)| x.add(y))
            .collect::<Result<Vec<_>>>()?;
        Ok(BasisChange { alpha })
    }
}

impl ExtensionData {
    /// x'_i = x_i + (b)_i u^{r_i-h_i} phi(alpha_{i-1}) - (a)_i u^{h_i} alpha_i.
    ///
    /// alpha must be known at least to the truncation of x (which more than
    /// covers the floor(N/p) requirement on the phi input).
    pub fn apply_basis_change(&self, bc: &BasisChange) -> Result<ExtensionData> {
        let n = self.trunc();
        if bc.alpha.len() != self.ty.f {
            return Err(Error::Structural("change-of-basis length != f".into()));
        }
        if bc.alpha[0].field() != self.ty.field() {
            return Err(Error::Structural(
                "change of basis over a different field".into(),
            ));
        }
        if bc.alpha[0].trunc() < n {
            return Err(Error::Truncation(format!(
                "change of basis known mod u^{} but x requires mod u^{}",
                bc.alpha[0].trunc() + 1,
                n + 1
            )));
        }
        let f = self.ty.f;
        let mut x = Vec::with_capacity(f);
        for i in 0..f {
            let prev = (i + f - 1) % f;
            let alpha_prev = bc.alpha[prev].truncate_to(n)?;
            let alpha_i = bc.alpha[i].truncate_to(n)?;
            let h = self.ty.h(i) as usize;
            let gain = alpha_prev
                .frobenius_substitute()
                .mul_u_pow(self.ty.r[i] as usize - h)
                .scale(&self.ty.label_b_at(i))?;
            let loss = alpha_i.mul_u_pow(h).scale(&self.ty.label_a_at(i))?;
            x.push(self.x[i].add(&gain)?.sub(&loss)?);
        }
        ExtensionData::new(self.ty.clone(), x)
    }
}

/// One pair: (component index, degree).
pub type Pair = (usize, usize);

/// Partition of the pairs {(i, d) : i in J, r_i <= d <= cutoff} under the
/// affects relation. Chains are stored in affects order; paths are the
/// in-range prefixes of infinite chains. The partition is exact (chain
/// starts are genuine starts) whenever cutoff >= p^2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPartition {
    pub cutoff: usize,
    pub loops: Vec<Vec<Pair>>,
    pub stubs: Vec<Vec<Pair>>,
    pub paths: Vec<Vec<Pair>>,
}

impl ExtensionType {
    /// Classify all pairs (i, d), i in J, r_i <= d <= cutoff.
    pub fn classify_pairs(&self, cutoff: usize) -> Result<PairPartition> {
        if self.j.is_empty() {
            return Err(Error::Domain(
                "J is empty: there are no pairs to classify".into(),
            ));
        }
        let mut pairs: Vec<Pair> = Vec::new();
        for i in self.j.iter() {
            for d in self.r[i] as usize..=cutoff {
                pairs.push((i, d));
            }
        }
        let in_range =
            |q: &Pair| q.1 <= cutoff && self.j.contains(q.0) && q.1 >= self.r[q.0] as usize;
        debug_assert!(pairs.iter().all(in_range));
        // mark pairs that are affected by an in-range pair
        let index_of = |q: &Pair| -> Option<usize> { pairs.binary_search(q).ok() };
        let mut affected = vec![false; pairs.len()];
        for &(i, d) in &pairs {
            let (it, dt) = self.affects(i, d);
            if dt <= cutoff as u128 {
                let q = (it, dt as usize);
                if in_range(&q) {
                    if let Some(k) = index_of(&q) {
                        affected[k] = true;
                    }
                }
            }
        }
        let mut visited = vec![false; pairs.len()];
        let mut stubs = Vec::new();
        let mut paths = Vec::new();
        for start in 0..pairs.len() {
            if affected[start] {
                continue;
            }
            let mut chain = Vec::new();
            let mut cur = pairs[start];
            loop {
                let k = index_of(&cur).expect("walking in-range pairs");
                visited[k] = true;
                chain.push(cur);
                let (it, dt) = self.affects(cur.0, cur.1);
                if dt > cutoff as u128 {
                    paths.push(chain);
                    break;
                }
                let next = (it, dt as usize);
                if !in_range(&next) {
                    stubs.push(chain);
                    break;
                }
                cur = next;
            }
        }
        // anything left lies on cycles
        let mut loops = Vec::new();
        for start in 0..pairs.len() {
            if visited[start] {
                continue;
            }
            let mut chain = Vec::new();
            let mut cur = pairs[start];
            loop {
                let k = index_of(&cur).expect("walking in-range pairs");
                if visited[k] {
                    break;
                }
                visited[k] = true;
                chain.push(cur);
                let (it, dt) = self.affects(cur.0, cur.1);
                debug_assert!(dt <= cutoff as u128, "cycle leaves the range");
                cur = (it, dt as usize);
            }
            // rotate so the lexicographically smallest pair leads
            let min_pos = chain
                .iter()
                .enumerate()
                .min_by_key(|(_, q)| **q)
                .map(|(k, _)| k)
                .expect("cycle is nonempty");
            chain.rotate_left(min_pos);
            loops.push(chain);
        }
        Ok(PairPartition {
            cutoff,
            loops,
            stubs,
            paths,
        })
    }
}

impl ExtensionData {
    pub fn classify_pairs(&self, cutoff: usize) -> Result<PairPartition> {
        self.ty.classify_pairs(cutoff)
    }

    /// Reduce to normal form. Returns the reduced extension together with
    /// the change of basis that realizes it, so that
    /// `self.apply_basis_change(&bc) == reduced`.
    ///
    /// Shape of the result: x_i = 0 off J and deg(x_i) < h_i on J, except in
    /// the exceptional configuration where x at the smallest index of J may
    /// retain one term of degree exactly p. Requires truncation >= p^2.
    pub fn reduce_normal_form(&self) -> Result<(ExtensionData, BasisChange)> {
        let n = self.trunc();
        let p = self.ty.p as usize;
        if n < p * p {
            return Err(Error::Truncation(format!(
                "reduction requires truncation >= p^2 = {}, got {n}",
                p * p
            )));
        }
        let f = self.ty.f;
        let field = self.ty.field().clone();
        let mut total = BasisChange::zero(&self.ty, n);

        // Phase A: make x_i = 0 off J (everywhere when J is empty).
        let after_a = if self.ty.j.is_empty() {
            // first kill x_0..x_{f-2} with seed alpha_{f-1} = 0
            let mut alpha1: Vec<TruncatedSeries> =
                (0..f).map(|_| TruncatedSeries::zero(&field, n)).collect();
            for i in 0..f.saturating_sub(1) {
                let prev = (i + f - 1) % f;
                let mut t = alpha1[prev]
                    .frobenius_substitute()
                    .mul_u_pow(self.ty.r[i] as usize)
                    .scale(&self.ty.label_b_at(i))?;
                t = t.add(&self.x[i])?;
                alpha1[i] = t.scale(&self.ty.label_a_at(i).inv().expect("a nonzero"))?;
            }
            let bc1 = BasisChange::new(alpha1)?;
            let mid = self.apply_basis_change(&bc1)?;
            // now solve away x_{f-1} degree by degree:
            // alpha = (a)_{f-1}^{-1} x_{f-1} + (b/a) u^R phi^f(alpha),
            // R = sum_i p^{f-1-i} r_i >= 1
            let mut big_r: u128 = 0;
            for (i, &ri) in self.ty.r.iter().enumerate() {
                big_r += (p as u128).pow((f - 1 - i) as u32) * ri as u128;
            }
            let k_const = self.ty.b.mul(&self.ty.a.inv().expect("a nonzero"));
            let inv_a_last = self.ty.label_a_at(f - 1).inv().expect("a nonzero");
            let x_last = &mid.x[f - 1];
            let pf = (p as u128).pow(f as u32);
            let mut coeffs: Vec<FqElement> = vec![field.zero(); n + 1];
            for d in 0..=n {
                let mut v = x_last.coeff(d).mul(&inv_a_last);
                let du = d as u128;
                if du >= big_r && (du - big_r) % pf == 0 {
                    let e = ((du - big_r) / pf) as usize;
                    debug_assert!(e < d || (e == 0 && d == 0 && big_r == 0));
                    v = v.add(&k_const.mul(&coeffs[e]));
                }
                coeffs[d] = v;
            }
            let alpha_last = TruncatedSeries::new(&field, n, coeffs)?;
            let mut alpha2: Vec<TruncatedSeries> =
                (0..f).map(|_| TruncatedSeries::zero(&field, n)).collect();
            alpha2[f - 1] = alpha_last;
            let b_over_a = k_const;
            for i in 0..f.saturating_sub(1) {
                let prev = (i + f - 1) % f;
                let mut t = alpha2[prev]
                    .frobenius_substitute()
                    .mul_u_pow(self.ty.r[i] as usize);
                if i == 0 {
                    t = t.scale(&b_over_a)?;
                }
                alpha2[i] = t;
            }
            let bc2 = BasisChange::new(alpha2)?;
            total = bc1.compose(&bc2)?;
            let out = self.apply_basis_change(&total)?;
            if out.x.iter().any(|s| !s.is_zero()) {
                return Err(Error::Internal(
                    "split reduction left a nonzero coefficient".into(),
                ));
            }
            return Ok((out, total));
        } else {
            // seeds 0 at J, the kill recursion along each off-J run
            let mut alpha: Vec<TruncatedSeries> =
                (0..f).map(|_| TruncatedSeries::zero(&field, n)).collect();
            for j0 in self.ty.j.iter() {
                let mut i = (j0 + 1) % f;
                while !self.ty.j.contains(i) {
                    let prev = (i + f - 1) % f;
                    let mut t = alpha[prev]
                        .frobenius_substitute()
                        .mul_u_pow(self.ty.r[i] as usize)
                        .scale(&self.ty.label_b_at(i))?;
                    t = t.add(&self.x[i])?;
                    alpha[i] = t.scale(&self.ty.label_a_at(i).inv().expect("a nonzero"))?;
                    i = (i + 1) % f;
                }
            }
            let bc_a = BasisChange::new(alpha)?;
            total = total.compose(&bc_a)?;
            self.apply_basis_change(&bc_a)?
        };

        // Phase B: working coefficient table at J indices.
        let mut work: Vec<Vec<FqElement>> = (0..f)
            .map(|i| (0..=n).map(|d| after_a.x[i].coeff(d).clone()).collect())
            .collect();
        let mut seeds: Vec<Vec<FqElement>> = (0..f).map(|_| vec![field.zero(); n + 1]).collect();

        let partition = self.ty.classify_pairs(n)?;
        let process_chain =
            |chain: &[Pair], work: &mut Vec<Vec<FqElement>>, seeds: &mut Vec<Vec<FqElement>>| {
                for &(i, d) in chain {
                    let c = work[i][d].clone();
                    if c.is_zero() {
                        continue;
                    }
                    let c_alpha = c.mul(&self.ty.label_a_at(i).inv().expect("a nonzero"));
                    let e = d - self.ty.r[i] as usize;
                    seeds[i][e] = seeds[i][e].add(&c_alpha);
                    work[i][d] = field.zero();
                    let (it, dt) = self.ty.affects(i, d);
                    if dt <= n as u128 {
                        let gain = self.ty.transfer_constant(i).mul(&c_alpha);
                        work[it][dt as usize] = work[it][dt as usize].add(&gain);
                    }
                }
            };
        for chain in &partition.stubs {
            process_chain(chain, &mut work, &mut seeds);
        }
        for chain in &partition.paths {
            process_chain(chain, &mut work, &mut seeds);
        }
        for cycle in &partition.loops {
            let k = cycle.len();
            let xs: Vec<FqElement> = cycle.iter().map(|&(i, d)| work[i][d].clone()).collect();
            let cs: Vec<FqElement> = cycle
                .iter()
                .map(|&(i, _)| self.ty.transfer_constant(i))
                .collect();
            let a_inv: Vec<FqElement> = cycle
                .iter()
                .map(|&(i, _)| self.ty.label_a_at(i).inv().expect("a nonzero"))
                .collect();
            let a_at: Vec<FqElement> = cycle.iter().map(|&(i, _)| self.ty.label_a_at(i)).collect();
            // coefficients are affine in the free choice s at the lead pair:
            // pass 1 (s = 0, real x), pass 2 (s = 1, x = 0)
            let run = |s: &FqElement, use_x: bool| -> Vec<FqElement> {
                let mut c = vec![field.zero(); k];
                c[0] = s.clone();
                for j in 1..k {
                    let mut v = cs[j - 1].mul(&c[j - 1]);
                    if use_x {
                        v = v.add(&xs[j]);
                    }
                    c[j] = v.mul(&a_inv[j]);
                }
                c
            };
            let c0 = run(&field.zero(), true);
            let c1 = run(&field.one(), false);
            // residue at the lead pair: B + A s
            let b_val = xs[0].add(&cs[k - 1].mul(&c0[k - 1]));
            let a_val = cs[k - 1].mul(&c1[k - 1]).sub(&a_at[0]);
            let s = if a_val.is_zero() {
                field.zero()
            } else {
                b_val.neg().mul(&a_val.inv().expect("nonzero")) // kill the loop term
            };
            let c: Vec<FqElement> = (0..k).map(|j| c0[j].add(&s.mul(&c1[j]))).collect();
            for (j, &(i, d)) in cycle.iter().enumerate() {
                let e = d - self.ty.r[i] as usize;
                seeds[i][e] = seeds[i][e].add(&c[j]);
                let jprev = (j + k - 1) % k;
                let new_val = xs[j]
                    .add(&cs[jprev].mul(&c[jprev]))
                    .sub(&a_at[j].mul(&c[j]));
                work[i][d] = new_val;
            }
        }

        // materialize the J-supported change and compose
        let seed_series: Vec<(usize, TruncatedSeries)> = self
            .ty
            .j
            .iter()
            .map(|i| {
                (
                    i,
                    TruncatedSeries::new(&field, n, seeds[i].clone()).expect("n+1 coefficients"),
                )
            })
            .collect();
        let bc_b = BasisChange::from_j_seeds(&self.ty, n, &seed_series)?;
        total = total.compose(&bc_b)?;
        let out = self.apply_basis_change(&total)?;
        if !out.is_normal_form() {
            return Err(Error::Internal(format!(
                "reduction left {} outside the normal-form shape",
                out.ty
            )));
        }
        Ok((out, total))
    }
}

/// Decide extension equivalence of e1 and e2 (same type data and truncation)
/// by exact Gaussian elimination over F_q in the alpha coefficients. Returns
/// a witness change of basis with `e1.apply_basis_change(&w) == e2` when
/// equivalent.
pub fn coboundary_equivalent(
    e1: &ExtensionData,
    e2: &ExtensionData,
) -> Result<Option<BasisChange>> {
    if e1.ty != e2.ty {
        return Err(Error::Structural(
            "extensions with different type data cannot be compared".into(),
        ));
    }
    if e1.trunc() != e2.trunc() {
        return Err(Error::Structural(
            "extensions with different truncations".into(),
        ));
    }
    let ty = &e1.ty;
    let f = ty.f;
    let n = e1.trunc();
    let field = ty.field().clone();
    let p = ty.p as usize;
    let cols = f * (n + 1);
    let col = |i: usize, e: usize| i * (n + 1) + e;
    let mut mat: Vec<Vec<FqElement>> = Vec::with_capacity(cols);
    let mut rhs: Vec<FqElement> = Vec::with_capacity(cols);
    for i in 0..f {
        let prev = (i + f - 1) % f;
        let h = ty.h(i) as usize;
        let rmh = ty.r[i] as usize - h;
        let b_i = ty.label_b_at(i);
        let a_i = ty.label_a_at(i);
        for d in 0..=n {
            let mut row = vec![field.zero(); cols];
            if d >= h {
                let c = col(i, d - h);
                row[c] = row[c].sub(&a_i);
            }
            if d >= rmh && (d - rmh) % p == 0 {
                let c = col(prev, (d - rmh) / p);
                row[c] = row[c].add(&b_i);
            }
            mat.push(row);
            rhs.push(e2.x[i].coeff(d).sub(e1.x[i].coeff(d)));
        }
    }
    match linalg::solve(&field, mat, rhs) {
        None => Ok(None),
        Some(sol) => {
            let mut alpha = Vec::with_capacity(f);
            for i in 0..f {
                let coeffs = sol[col(i, 0)..=col(i, n)].to_vec();
                alpha.push(TruncatedSeries::new(&field, n, coeffs)?);
            }
            Ok(Some(BasisChange::new(alpha)?))
        }
    }
}

/// Rank of the linearized change-of-basis map at truncation n for this type;
/// the number of equivalence classes among all coefficient vectors is then
/// q^{f (n+1) - rank}.
pub fn coboundary_rank(ty: &ExtensionType, n: usize) -> Result<usize> {
    let f = ty.f;
    let field = ty.field().clone();
    let p = ty.p as usize;
    let cols = f * (n + 1);
    let col = |i: usize, e: usize| i * (n + 1) + e;
    let mut mat: Vec<Vec<FqElement>> = Vec::with_capacity(cols);
    for i in 0..f {
        let prev = (i + f - 1) % f;
        let h = ty.h(i) as usize;
        let rmh = ty.r[i] as usize - h;
        let b_i = ty.label_b_at(i);
        let a_i = ty.label_a_at(i);
        for d in 0..=n {
            let mut row = vec![field.zero(); cols];
            if d >= h {
                let c = col(i, d - h);
                row[c] = row[c].sub(&a_i);
            }
            if d >= rmh && (d - rmh) % p == 0 {
                let c = col(prev, (d - rmh) / p);
                row[c] = row[c].add(&b_i);
            }
            mat.push(row);
        }
    }
    Ok(linalg::rank(mat))
}

/// Equivalence up to simultaneous scaling of the extension class:
/// search for a unit lambda with e1 ~ lambda * e2.
pub fn coboundary_equivalent_up_to_scale(
    e1: &ExtensionData,
    e2: &ExtensionData,
) -> Result<Option<(FqElement, BasisChange)>> {
    for lambda in e1.ty.field().units() {
        let scaled = e2.scale_x(&lambda)?;
        if let Some(w) = coboundary_equivalent(e1, &scaled)? {
            return Ok(Some((lambda, w)));
        }
    }
    Ok(None)
}

/// Enumerate the crystalline shapes of the given type at the given
/// truncation: x_i an arbitrary constant for i in J and zero otherwise, plus
/// one free coefficient of degree p at min(J) in the exceptional
/// configuration. Exactly q^{|J|} (or q^{|J|+1}) entries.
pub fn crystalline_forms(ty: &ExtensionType, trunc: usize) -> Result<Vec<ExtensionData>> {
    let p = ty.p as usize;
    if trunc < p {
        return Err(Error::Truncation(format!(
            "crystalline forms carry terms up to degree p = {p}; truncation {trunc} is too small"
        )));
    }
    let field = ty.field().clone();
    let q = field.order() as u128;
    let exceptional = ty.is_exceptional();
    let slots: Vec<usize> = ty.j().iter().collect();
    let n_slots = slots.len() + usize::from(exceptional);
    if q.checked_pow(n_slots as u32).is_none_or(|c| c > MAX_FORMS) {
        return Err(Error::Resource(format!(
            "q^{n_slots} crystalline forms exceed the enumeration cap"
        )));
    }
    let elements: Vec<FqElement> = field.elements().collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n_slots];
    loop {
        let mut x: Vec<TruncatedSeries> = (0..ty.f())
            .map(|_| TruncatedSeries::zero(&field, trunc))
            .collect();
        for (k, &i) in slots.iter().enumerate() {
            x[i] = TruncatedSeries::constant(elements[idx[k]].clone(), trunc);
        }
        if exceptional {
            let i0 = slots[0];
            let extra = TruncatedSeries::monomial(elements[idx[n_slots - 1]].clone(), p, trunc);
            x[i0] = x[i0].add(&extra)?;
        }
        out.push(ExtensionData::new(ty.clone(), x)?);
        let mut k = 0;
        loop {
            if k == n_slots {
                return Ok(out);
            }
            idx[k] += 1;
            if idx[k] < elements.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

// --- JSON ---

#[derive(Serialize, Deserialize)]
struct ExtensionDto {
    p: u32,
    f: usize,
    r: Vec<u32>,
    #[serde(rename = "J")]
    j: Vec<usize>,
    a: ElementDto,
    b: ElementDto,
    trunc: usize,
    x: Vec<SeriesDto>,
}

impl ExtensionData {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.ty.p,
            "f": self.ty.f,
            "r": self.ty.r,
            "J": self.ty.j.to_vec(),
            "a": self.ty.a.to_json(),
            "b": self.ty.b.to_json(),
            "trunc": self.trunc(),
            "x": self.x.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let dto: ExtensionDto = serde_json::from_value(v.clone())
            .map_err(|e| Error::Malformed(format!("extension: {e}")))?;
        let a = FqElement::from_json(&serde_json::to_value(&dto.a).expect("dto"))?;
        let b = FqElement::from_json(&serde_json::to_value(&dto.b).expect("dto"))?;
        let j = JSet::from_indices(dto.f, &dto.j)?;
        let ty = ExtensionType::new(dto.p, dto.f, dto.r, j, a, b)?;
        let mut x = Vec::with_capacity(dto.x.len());
        for s in &dto.x {
            let s = TruncatedSeries::from_json(&serde_json::to_value(s).expect("dto"))?;
            if s.trunc() != dto.trunc {
                return Err(Error::Structural(
                    "series truncation disagrees with the stated trunc".into(),
                ));
            }
            x.push(s);
        }
        ExtensionData::new(ty, x)
    }
}

impl BasisChange {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.alpha.iter().map(|s| s.to_json()).collect())
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Malformed("change of basis must be an array".into()))?;
        let alpha = arr
            .iter()
            .map(TruncatedSeries::from_json)
            .collect::<Result<Vec<_>>>()?;
        BasisChange::new(alpha)
    }
}
