//! Rank-one modules over F_q\[\[u\]\] in decomposed presentation, their canonical
//! forms, tensor products, and the tame inertial characters they induce.
//!
//! A module is the data (p, f, (r_0..r_{f-1}), a): on the i-th component the
//! semilinear map sends the previous basis vector to (a)_i u^{r_i} e_i, where
//! (a)_i is a at the wrap-around index i = 0 and 1 otherwise.
//!
//! Character convention: a character of niveau n over degree f is stored as
//! an exponent of the generator w_{nf-1}, where w_s = w_{nf-1}^{p^{nf-1-s}}
//! and w_{s+1}^p = w_s. With this convention the exponent attached to a
//! module is literally sum_i p^{f-1-i} r_i mod p^f - 1.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{ElementDto, FqElement, FqField, SeriesDto, TruncatedSeries, UValuation};
use crate::error::{Error, Result};

/// Canonical rank-one data (p, f, r, a) with a != 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankOneModule {
    p: u32,
    f: usize,
    r: Vec<u64>,
    a: FqElement,
}

impl RankOneModule {
    pub fn new(p: u32, f: usize, r: Vec<u64>, a: FqElement) -> Result<Self> {
        if f == 0 || r.len() != f {
            return Err(Error::Domain(format!(
                "twist vector length {} does not match f = {f} >= 1",
                r.len()
            )));
        }
        if a.field().p() != p {
            return Err(Error::Structural(format!(
                "label lives in characteristic {}, module has p = {p}",
                a.field().p()
            )));
        }
        if a.is_zero() {
            return Err(Error::Degenerate("unramified label must be nonzero".into()));
        }
        // keep exponent arithmetic inside u64/u128
        crate::combinat::modulus(p, f)?;
        if r.iter().any(|&ri| ri >= 1 << 32) {
            return Err(Error::Resource("twist exponent exceeds 2^32".into()));
        }
        Ok(RankOneModule { p, f, r, a })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn r(&self) -> &[u64] {
        &self.r
    }

    pub fn label(&self) -> &FqElement {
        &self.a
    }

    pub fn field(&self) -> &Arc<FqField> {
        self.a.field()
    }

    /// sum_i p^{f-1-i} r_i mod p^f - 1.
    pub fn exponent_sum(&self) -> u64 {
        let m =
            crate::combinat::modulus(self.p, self.f).expect("validated at construction") as u128;
        let mut acc: u128 = 0;
        for (i, &ri) in self.r.iter().enumerate() {
            let w = (self.p as u128).pow((self.f - 1 - i) as u32) % m;
            acc = (acc + w * ri as u128) % m;
        }
        acc as u64
    }

    /// The inertial character of the attached representation: niveau 1,
    /// exponent sum_i p^{f-1-i} r_i mod p^f - 1, unramified label a.
    pub fn inertial_character(&self) -> InertialCharacter {
        InertialCharacter::new(
            self.p,
            1,
            self.f,
            self.exponent_sum() as u128,
            self.a.clone(),
        )
        .expect("parameters validated at module construction")
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.f != other.f || self.a.field() != other.a.field() {
            return Err(Error::Structural(
                "modules with different (p, f, field) parameters".into(),
            ));
        }
        Ok(())
    }

    /// Tensor product: twists add componentwise, labels multiply.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let r = self.r.iter().zip(&other.r).map(|(&x, &y)| x + y).collect();
        RankOneModule::new(self.p, self.f, r, self.a.mul(&other.a))
    }

    /// Isomorphism of the attached representations: equal labels and
    /// congruent exponent sums mod p^f - 1.
    pub fn isomorphic(&self, other: &Self) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(self.a == other.a && self.exponent_sum() == other.exponent_sum())
    }
}

/// A not-yet-canonical rank-one module: the structure constants c_i with
/// phi(e_{i-1}) = c_i e_i, each a nonzero truncated series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRankOne {
    p: u32,
    f: usize,
    c: Vec<TruncatedSeries>,
}

impl RawRankOne {
    pub fn new(p: u32, f: usize, c: Vec<TruncatedSeries>) -> Result<Self> {
        if f == 0 || c.len() != f {
            return Err(Error::Domain(format!(
                "structure constant count {} does not match f = {f} >= 1",
                c.len()
            )));
        }
        let field = c[0].field().clone();
        if field.p() != p {
            return Err(Error::Structural(format!(
                "series characteristic {} does not match p = {p}",
                field.p()
            )));
        }
        for s in &c {
            if s.field() != &field || s.trunc() != c[0].trunc() {
                return Err(Error::Structural(
                    "structure constants must share field and truncation".into(),
                ));
            }
        }
        Ok(RawRankOne { p, f, c })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn constants(&self) -> &[TruncatedSeries] {
        &self.c
    }

    /// Canonical form: r_i is the u-valuation of c_i and the label is the
    /// product of the leading coefficients. A change of basis by unit series
    /// scales away everything else, so this is the unique canonical
    /// representative; a zero structure constant has no valuation and the
    /// module is degenerate.
    pub fn canonicalize(&self) -> Result<RankOneModule> {
        let mut r = Vec::with_capacity(self.f);
        let mut a = self.c[0].field().one();
        for (i, ci) in self.c.iter().enumerate() {
            match ci.u_valuation() {
                UValuation::Finite(d) => {
                    r.push(d as u64);
                    a = a.mul(ci.coeff(d));
                }
                UValuation::Infinity => {
                    return Err(Error::Degenerate(format!(
                        "structure constant {i} vanishes mod u^{}",
                        ci.trunc() + 1
                    )))
                }
            }
        }
        RankOneModule::new(self.p, self.f, r, a)
    }
}

/// A tame inertial character: exponent of the fixed generator w_{nf-1}
/// mod p^{nf} - 1, plus a nonzero unramified label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InertialCharacter {
    p: u32,
    niveau: u8,
    f: usize,
    exponent: u64,
    unramified: FqElement,
}

impl InertialCharacter {
    pub fn new(
        p: u32,
        niveau: u8,
        f: usize,
        exponent: u128,
        unramified: FqElement,
    ) -> Result<Self> {
        if niveau != 1 && niveau != 2 {
            return Err(Error::Domain(format!(
                "niveau must be 1 or 2, got {niveau}"
            )));
        }
        if unramified.is_zero() {
            return Err(Error::Degenerate("unramified label must be nonzero".into()));
        }
        if unramified.field().p() != p {
            return Err(Error::Structural(
                "unramified label in the wrong characteristic".into(),
            ));
        }
        let m = crate::combinat::modulus(p, niveau as usize * f)? as u128;
        Ok(InertialCharacter {
            p,
            niveau,
            f,
            exponent: (exponent % m) as u64,
            unramified,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn niveau(&self) -> u8 {
        self.niveau
    }

    pub fn f(&self) -> usize {
        self.f
    }

    /// Exponent reduced into [0, p^{niveau f} - 1).
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn unramified(&self) -> &FqElement {
        &self.unramified
    }
}

// --- JSON ---

#[derive(Serialize, Deserialize)]
struct RankOneDto {
    p: u32,
    f: usize,
    r: Vec<u64>,
    a: ElementDto,
}

#[derive(Serialize, Deserialize)]
struct RawRankOneDto {
    p: u32,
    f: usize,
    c: Vec<SeriesDto>,
}

#[derive(Serialize, Deserialize)]
struct CharacterDto {
    p: u32,
    niveau: u8,
    f: usize,
    exponent: u64,
    unramified: ElementDto,
}

impl RankOneModule {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "f": self.f,
            "r": self.r,
            "a": self.a.to_json(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let dto: RankOneDto = serde_json::from_value(v.clone())
            .map_err(|e| Error::Malformed(format!("rank-one module: {e}")))?;
        let a = {
            let field = FqField::new(dto.a.p, dto.a.m, &dto.a.modulus)?;
            field.element(&dto.a.coeffs.iter().map(|&c| c as i64).collect::<Vec<_>>())?
        };
        RankOneModule::new(dto.p, dto.f, dto.r, a)
    }
}

impl RawRankOne {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "f": self.f,
            "c": self.c.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let dto: RawRankOneDto = serde_json::from_value(v.clone())
            .map_err(|e| Error::Malformed(format!("raw rank-one module: {e}")))?;
        let mut c = Vec::with_capacity(dto.c.len());
        for s in &dto.c {
            c.push(TruncatedSeries::from_json(
                &serde_json::to_value(s).expect("dto reserialization"),
            )?);
        }
        RawRankOne::new(dto.p, dto.f, c)
    }
}

impl InertialCharacter {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "niveau": self.niveau,
            "f": self.f,
            "exponent": self.exponent,
            "unramified": self.unramified.to_json(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let dto: CharacterDto = serde_json::from_value(v.clone())
            .map_err(|e| Error::Malformed(format!("inertial character: {e}")))?;
        let u = {
            let field = FqField::new(dto.unramified.p, dto.unramified.m, &dto.unramified.modulus)?;
            field.element(
                &dto.unramified
                    .coeffs
                    .iter()
                    .map(|&c| c as i64)
                    .collect::<Vec<_>>(),
            )?
        };
        InertialCharacter::new(dto.p, dto.niveau, dto.f, dto.exponent as u128, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::cartesian_power;

    fn f3() -> Arc<FqField> {
        FqField::prime(3).unwrap()
    }

    fn f5() -> Arc<FqField> {
        FqField::prime(5).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let f = f3();
        // f = 1, c_0 = u^2
        let raw = RawRankOne::new(3, 1, vec![TruncatedSeries::monomial(f.one(), 2, 6)]).unwrap();
        let m = raw.canonicalize().unwrap();
        assert_eq!(m.r(), &[2]);
        assert!(m.label().is_one());

        // f = 2, c = (2u, u^3 + u^4) over F_5 -> r = (1, 3), a = 2
        let g = f5();
        let c0 = TruncatedSeries::from_ints(&g, 8, &[0, 2]).unwrap();
        let c1 = TruncatedSeries::from_ints(&g, 8, &[0, 0, 0, 1, 1]).unwrap();
        let m = RawRankOne::new(5, 2, vec![c0, c1])
            .unwrap()
            .canonicalize()
            .unwrap();
        assert_eq!(m.r(), &[1, 3]);
        assert_eq!(*m.label(), g.from_int(2));

        // f = 1, c_0 = 2 + u over F_3 -> r = (0), a = 2
        let c = TruncatedSeries::from_ints(&f, 6, &[2, 1]).unwrap();
        let m = RawRankOne::new(3, 1, vec![c])
            .unwrap()
            .canonicalize()
            .unwrap();
        assert_eq!(m.r(), &[0]);
        assert_eq!(*m.label(), f.from_int(2));

        // zero structure constant is degenerate
        let z = TruncatedSeries::zero(&f, 6);
        let raw = RawRankOne::new(3, 1, vec![z]).unwrap();
        assert!(matches!(raw.canonicalize(), Err(Error::Degenerate(_))));
    }

    /// Unit-substitution oracle: find unit series l_i with
    /// c_i * phi(l_{i-1}) = (a)_i u^{r_i} l_i, certifying the canonical form
    /// by u-adic successive approximation.
    fn certify_canonical(raw: &RawRankOne, m: &RankOneModule) {
        let f = raw.f();
        let field = raw.constants()[0].field().clone();
        let trunc = raw.constants()[0].trunc();
        // unit parts v_i = c_i / u^{r_i}
        let mut v = Vec::with_capacity(f);
        for (i, ci) in raw.constants().iter().enumerate() {
            let d = m.r()[i] as usize;
            let mut coeffs = Vec::new();
            for k in d..=ci.trunc() {
                coeffs.push(ci.coeff(k).clone());
            }
            v.push(TruncatedSeries::new(&field, trunc, coeffs).unwrap());
        }
        // w = v_0 * phi(v_{f-1}) * phi^2(v_{f-2}) * ... * phi^{f-1}(v_1)
        let mut w = v[0].clone();
        for k in 1..f {
            w = w.mul(&v[f - k].frobenius_power(k)).unwrap();
        }
        // solve l_0 = (w / a) * phi^f(l_0) degree by degree, l_0[0] = 1
        let w_over_a = w.scale(&m.label().inv().unwrap()).unwrap();
        let mut l0 = TruncatedSeries::constant(field.one(), trunc);
        for _ in 0..=trunc {
            l0 = w_over_a.mul(&l0.frobenius_power(f)).unwrap();
        }
        assert!(l0.coeff(0).is_one());
        // l_i = v_i * phi(l_{i-1}) for i = 1..f-1
        let mut l = vec![l0; f];
        for i in 1..f {
            l[i] = v[i].mul(&l[i - 1].frobenius_substitute()).unwrap();
        }
        // check c_i * phi(l_{i-1}) = (a)_i u^{r_i} l_i for all i; the unit
        // parts are only exact up to trunc - max(r_i), so compare there
        let max_r = *m.r().iter().max().unwrap() as usize;
        let safe = trunc - max_r;
        for i in 0..f {
            let prev = if i == 0 { f - 1 } else { i - 1 };
            let lhs = raw.constants()[i]
                .mul(&l[prev].frobenius_substitute())
                .unwrap();
            let mut rhs = l[i].mul_u_pow(m.r()[i] as usize);
            if i == 0 {
                rhs = rhs.scale(m.label()).unwrap();
            }
            assert_eq!(
                lhs.truncate_to(safe).unwrap(),
                rhs.truncate_to(safe).unwrap(),
                "intertwining fails at index {i}"
            );
        }
    }

    #[test]
    fn canonicalize_certified_by_unit_substitution() {
        let g = f5();
        let c0 = TruncatedSeries::from_ints(&g, 12, &[0, 2]).unwrap();
        let c1 = TruncatedSeries::from_ints(&g, 12, &[0, 0, 0, 1, 1]).unwrap();
        let raw = RawRankOne::new(5, 2, vec![c0, c1]).unwrap();
        certify_canonical(&raw, &raw.canonicalize().unwrap());

        let f = f3();
        let raw = RawRankOne::new(
            3,
            1,
            vec![TruncatedSeries::from_ints(&f, 12, &[2, 1]).unwrap()],
        )
        .unwrap();
        certify_canonical(&raw, &raw.canonicalize().unwrap());

        // and on a batch of random nonzero constants
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let f_deg = 1 + (rand::Rng::gen_range(&mut rng, 0..3u32) as usize);
            let mut c = Vec::new();
            for _ in 0..f_deg {
                loop {
                    let coeffs: Vec<i64> = (0..13)
                        .map(|_| rand::Rng::gen_range(&mut rng, 0..5i64))
                        .collect();
                    let s = TruncatedSeries::from_ints(&g, 12, &coeffs).unwrap();
                    if !s.is_zero() && s.u_valuation().finite().unwrap() <= 2 {
                        c.push(s);
                        break;
                    }
                }
            }
            let raw = RawRankOne::new(5, f_deg, c).unwrap();
            let m = raw.canonicalize().unwrap();
            certify_canonical(&raw, &m);
            // canonicalize is idempotent on canonical structure constants
            let canonical_c: Vec<TruncatedSeries> = (0..f_deg)
                .map(|i| {
                    let s = TruncatedSeries::monomial(g.one(), m.r()[i] as usize, 12);
                    if i == 0 {
                        s.scale(m.label()).unwrap()
                    } else {
                        s
                    }
                })
                .collect();
            let again = RawRankOne::new(5, f_deg, canonical_c)
                .unwrap()
                .canonicalize()
                .unwrap();
            assert_eq!(again, m);
        }
    }

    #[test]
    fn inertial_character_examples() {
        let f = f3();
        let m = RankOneModule::new(3, 2, vec![1, 2], f.one()).unwrap();
        let ch = m.inertial_character();
        assert_eq!(ch.exponent(), 5);
        assert_eq!(ch.niveau(), 1);

        let m = RankOneModule::new(3, 2, vec![0, 0], f.from_int(2)).unwrap();
        let ch = m.inertial_character();
        assert_eq!(ch.exponent(), 0);
        assert_eq!(*ch.unramified(), f.from_int(2));

        let g = f5();
        let m = RankOneModule::new(5, 1, vec![4], g.one()).unwrap();
        assert_eq!(m.inertial_character().exponent(), 0);
    }

    #[test]
    fn product_examples() {
        let f = f3();
        let m1 = RankOneModule::new(3, 2, vec![1, 0], f.one()).unwrap();
        let m2 = RankOneModule::new(3, 2, vec![0, 1], f.one()).unwrap();
        assert_eq!(m1.product(&m2).unwrap().r(), &[1, 1]);

        let id = RankOneModule::new(3, 2, vec![0, 0], f.one()).unwrap();
        assert_eq!(m1.product(&id).unwrap(), m1);

        let a = RankOneModule::new(3, 1, vec![1], f.from_int(2)).unwrap();
        let b = RankOneModule::new(3, 1, vec![2], f.from_int(2)).unwrap();
        let ab = a.product(&b).unwrap();
        assert_eq!(ab.r(), &[3]);
        assert!(ab.label().is_one());

        let g = f5();
        let other = RankOneModule::new(5, 1, vec![1], g.one()).unwrap();
        assert!(matches!(a.product(&other), Err(Error::Structural(_))));
    }

    #[test]
    fn iso_examples() {
        let f = f3();
        let m1 = RankOneModule::new(3, 2, vec![2, 2], f.one()).unwrap();
        let m2 = RankOneModule::new(3, 2, vec![0, 8], f.one()).unwrap();
        assert!(m1.isomorphic(&m2).unwrap());
        assert!(m1.isomorphic(&m1).unwrap());
        let m3 = RankOneModule::new(3, 2, vec![2, 2], f.from_int(2)).unwrap();
        assert!(!m1.isomorphic(&m3).unwrap());
    }

    /// The shift-map oracle: exhibit e''_i -> u^{m_i} e_i intertwining phi,
    /// where r'' dominates both twist vectors and shares the exponent class.
    fn certify_iso_by_shift_map(m1: &RankOneModule, m2: &RankOneModule) {
        let p = m1.p() as i128;
        let f = m1.f();
        let modulus = crate::combinat::modulus(m1.p(), f).unwrap() as i128;
        // r'' = r1 + t*(p-1,...,p-1) dominates r2 for t large enough and
        // keeps the exponent class (the all-(p-1) vector sums to 0 mod p^f-1)
        let max2 = *m2.r().iter().max().unwrap() as i128;
        let t = max2 + 1;
        let rpp: Vec<i128> = m1.r().iter().map(|&x| x as i128 + t * (p - 1)).collect();
        // m_i = (1/(p^f-1)) sum_{j=1..f} p^{f-j} (r''_{i+j} - r2_{i+j})
        for i in 0..f {
            let mut acc: i128 = 0;
            for j in 1..=f {
                let idx = (i + j) % f;
                acc += p.pow((f - j) as u32) * (rpp[idx] - m2.r()[idx] as i128);
            }
            assert_eq!(acc.rem_euclid(modulus), 0, "shift exponents not integral");
            let mi = acc / modulus;
            assert!(mi >= 0, "shift exponent negative");
            // intertwining: r''_i + m_i = r2_i + p * m_{i-1}
            let mut acc_prev: i128 = 0;
            let iprev = (i + f - 1) % f;
            for j in 1..=f {
                let idx = (iprev + j) % f;
                acc_prev += p.pow((f - j) as u32) * (rpp[idx] - m2.r()[idx] as i128);
            }
            let mi_prev = acc_prev / modulus;
            assert_eq!(
                rpp[i] + mi,
                m2.r()[i] as i128 + p * mi_prev,
                "shift map does not intertwine at {i}"
            );
        }
    }

    #[test]
    fn iso_agrees_with_character_and_shift_oracle() {
        // brute force: all twist vectors with entries <= 2p, f <= 3, q in {3, 5}
        for (p, q_ext) in [(3u32, false), (5, false), (3, true)] {
            let field = if q_ext {
                FqField::extension(3, &[1, 0, 1]).unwrap()
            } else {
                FqField::prime(p).unwrap()
            };
            for f in 1usize..=3 {
                let entries: Vec<u64> = (0..=2 * p as u64).collect();
                let vectors = cartesian_power(&entries, f);
                let a = field.one();
                let modules: Vec<RankOneModule> = vectors
                    .iter()
                    .map(|r| RankOneModule::new(p, f, r.clone(), a.clone()).unwrap())
                    .collect();
                let sums: Vec<u64> = modules.iter().map(|m| m.exponent_sum()).collect();
                let mut certified = 0usize;
                for (k1, m1) in modules.iter().enumerate() {
                    for (k2, m2) in modules.iter().enumerate() {
                        let iso = m1.isomorphic(m2).unwrap();
                        assert_eq!(iso, sums[k1] == sums[k2]);
                        assert_eq!(
                            iso,
                            m1.inertial_character() == m2.inertial_character(),
                            "iso vs characters at {:?} {:?}",
                            m1.r(),
                            m2.r()
                        );
                        if iso {
                            certified += 1;
                            if certified % 41 == 0 {
                                certify_iso_by_shift_map(m1, m2);
                            }
                        }
                    }
                }
                assert!(certified > 0);
            }
        }
    }

    #[test]
    fn every_module_has_small_representative() {
        let f = f3();
        let m = RankOneModule::new(3, 2, vec![13, 5], f.from_int(2)).unwrap();
        let e = m.exponent_sum();
        let small = RankOneModule::new(3, 2, vec![e, 0], f.from_int(2)).unwrap();
        assert!(small.r().iter().all(|&x| x < 8));
        assert!(m.isomorphic(&small).unwrap());
    }

    #[test]
    fn character_product_homomorphism() {
        let f = f5();
        let m1 = RankOneModule::new(5, 2, vec![3, 7], f.from_int(2)).unwrap();
        let m2 = RankOneModule::new(5, 2, vec![4, 1], f.from_int(3)).unwrap();
        let prod = m1.product(&m2).unwrap();
        let modulus = 24u64;
        assert_eq!(
            prod.inertial_character().exponent(),
            (m1.inertial_character().exponent() + m2.inertial_character().exponent()) % modulus
        );
        assert_eq!(
            *prod.inertial_character().unramified(),
            m1.label().mul(m2.label())
        );
    }

    #[test]
    fn json_round_trips() {
        let f = f3();
        let m = RankOneModule::new(3, 2, vec![1, 2], f.from_int(2)).unwrap();
        assert_eq!(RankOneModule::from_json(&m.to_json()).unwrap(), m);
        let ch = m.inertial_character();
        assert_eq!(InertialCharacter::from_json(&ch.to_json()).unwrap(), ch);
        let raw = RawRankOne::new(
            3,
            1,
            vec![TruncatedSeries::from_ints(&f, 4, &[0, 2]).unwrap()],
        )
        .unwrap();
        assert_eq!(RawRankOne::from_json(&raw.to_json()).unwrap(), raw);
    }
}
