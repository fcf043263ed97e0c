//! Prime-power finite fields F_{p^k} with deterministic construction.
//!
//! Elements are little-endian coefficient vectors over F_p modulo the
//! lexicographically smallest monic irreducible of degree k (coefficients
//! compared high-degree-first). Fields of cardinality at most 2^16 carry
//! exp/log tables; this is acceleration only and has no semantic effect.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use super::poly;
use crate::error::Error;

pub const DEFAULT_MAX_FIELD_DEGREE: usize = 4096;
const TABLE_LIMIT: u64 = 1 << 16;
const SCAN_LIMIT: u64 = 1 << 20;

fn max_field_degree() -> usize {
    std::env::var("SWL_MAX_FIELD_DEGREE")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_FIELD_DEGREE)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// F_{p^k}. Immutable after construction; obtained through [`build_field`].
pub struct Field {
    pub p: u64,
    pub k: usize,
    /// Monic irreducible defining polynomial, little-endian, length k+1.
    pub modulus: Vec<u64>,
    /// p^k when it fits in u64, else None (enumeration disabled).
    pub cardinality: Option<u64>,
    tables: Option<Tables>,
}

struct Tables {
    /// exp[i] = g^i packed as base-p integer, for a primitive g; length card-1.
    exp: Vec<u32>,
    /// log[packed] = i with g^i = element; log[0] unused.
    log: Vec<u32>,
}

static FIELD_REGISTRY: Lazy<Mutex<HashMap<(u64, usize), Arc<Field>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Deterministic construction of F_{p^k}; repeated calls share one instance.
pub fn build_field(p: u64, k: usize) -> Result<Arc<Field>, Error> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if k == 0 || k > max_field_degree() {
        return Err(Error::SizeBound(format!(
            "field degree {k} outside 1..={}",
            max_field_degree()
        )));
    }
    if let Some(f) = FIELD_REGISTRY.lock().unwrap().get(&(p, k)) {
        return Ok(f.clone());
    }
    let modulus = poly::smallest_irreducible(p, k);
    let cardinality = checked_pow(p, k);
    let mut field = Field { p, k, modulus, cardinality, tables: None };
    if let Some(card) = cardinality {
        if card <= TABLE_LIMIT {
            field.tables = Some(field.build_tables(card));
        }
    }
    let arc = Arc::new(field);
    FIELD_REGISTRY.lock().unwrap().insert((p, k), arc.clone());
    Ok(arc)
}

fn checked_pow(p: u64, k: usize) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

impl Field {
    pub fn card_u64(&self) -> u64 {
        self.cardinality.expect("field too large for enumeration")
    }

    fn pack(&self, coeffs: &[u64]) -> u64 {
        let mut acc = 0u64;
        for &c in coeffs.iter().rev() {
            acc = acc * self.p + c;
        }
        acc
    }

    fn unpack(&self, mut code: u64) -> Vec<u64> {
        let mut coeffs = vec![0u64; self.k];
        for c in coeffs.iter_mut() {
            *c = code % self.p;
            code /= self.p;
        }
        coeffs
    }

    fn raw_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut prod = poly::mul(&a.to_vec(), &b.to_vec(), self.p);
        prod = poly::rem(&prod, &self.modulus, self.p);
        prod.resize(self.k, 0);
        prod
    }

    fn build_tables(&self, card: u64) -> Tables {
        // Find a multiplicative generator by scanning in canonical order.
        let factors = crate::cyclo::prime_factors(card - 1);
        let mut gen_code = 0;
        'scan: for code in 1..card {
            let coeffs = self.unpack(code);
            for &f in &factors {
                if self.raw_pow_u64(&coeffs, (card - 1) / f) == self.one_coeffs() {
                    continue 'scan;
                }
            }
            gen_code = code;
            break;
        }
        assert!(gen_code != 0, "no multiplicative generator found");
        let g = self.unpack(gen_code);
        let mut exp = Vec::with_capacity((card - 1) as usize);
        let mut log = vec![0u32; card as usize];
        let mut cur = self.one_coeffs();
        for i in 0..(card - 1) {
            let code = self.pack(&cur);
            exp.push(code as u32);
            log[code as usize] = i as u32;
            cur = self.raw_mul(&cur, &g);
        }
        Tables { exp, log }
    }

    fn one_coeffs(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.k];
        c[0] = 1;
        c
    }

    fn raw_pow_u64(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let mut acc = self.one_coeffs();
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.raw_mul(&acc, &base);
            }
            base = self.raw_mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{{{}^{}}}", self.p, self.k)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k
    }
}
impl Eq for Field {}

/// An element of a [`Field`].
#[derive(Clone)]
pub struct FieldElem {
    pub field: Arc<Field>,
    /// Little-endian coefficients over F_p, length = field.k.
    pub coeffs: Vec<u64>,
}

impl PartialEq for FieldElem {
    fn eq(&self, other: &Self) -> bool {
        self.assert_same_field(other);
        self.coeffs == other.coeffs
    }
}
impl Eq for FieldElem {}

impl std::hash::Hash for FieldElem {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.field.p.hash(state);
        self.field.k.hash(state);
        self.coeffs.hash(state);
    }
}

impl PartialOrd for FieldElem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical element order: lexicographic on little-endian coefficients.
impl Ord for FieldElem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.assert_same_field(other);
        self.coeffs.cmp(&other.coeffs)
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}@F_{{{}^{}}}", self.coeffs, self.field.p, self.field.k)
    }
}

/// Serialized form: field descriptor {p, k} plus little-endian coefficients.
#[derive(Serialize, Deserialize)]
pub struct FieldElemJson {
    pub p: u64,
    pub k: usize,
    pub coeffs: Vec<u64>,
}

impl FieldElem {
    fn assert_same_field(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.field, &other.field)
                || (self.field.p == other.field.p && self.field.k == other.field.k),
            "field mismatch: {:?} vs {:?}",
            self.field,
            other.field
        );
    }

    pub fn zero(field: &Arc<Field>) -> Self {
        FieldElem { field: field.clone(), coeffs: vec![0; field.k] }
    }

    pub fn one(field: &Arc<Field>) -> Self {
        let mut coeffs = vec![0; field.k];
        coeffs[0] = 1;
        FieldElem { field: field.clone(), coeffs }
    }

    /// The class of the defining polynomial's root (the canonical generator
    /// of the field as an F_p-algebra). For k = 1 this is 0.
    pub fn generator(field: &Arc<Field>) -> Self {
        let mut coeffs = vec![0; field.k];
        if field.k > 1 {
            coeffs[1] = 1;
        }
        FieldElem { field: field.clone(), coeffs }
    }

    pub fn from_prime(field: &Arc<Field>, c: u64) -> Self {
        let mut coeffs = vec![0; field.k];
        coeffs[0] = c % field.p;
        FieldElem { field: field.clone(), coeffs }
    }

    pub fn from_coeffs(field: &Arc<Field>, coeffs: Vec<u64>) -> Self {
        assert_eq!(coeffs.len(), field.k, "coefficient vector length mismatch");
        let p = field.p;
        FieldElem { field: field.clone(), coeffs: coeffs.into_iter().map(|c| c % p).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs.iter().skip(1).all(|&c| c == 0)
    }

    pub fn code(&self) -> u64 {
        self.field.pack(&self.coeffs)
    }

    pub fn from_code(field: &Arc<Field>, code: u64) -> Self {
        FieldElem { field: field.clone(), coeffs: field.unpack(code) }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_field(other);
        let p = self.field.p;
        let coeffs = self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(&a, &b)| (a + b) % p)
            .collect();
        FieldElem { field: self.field.clone(), coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same_field(other);
        let p = self.field.p;
        let coeffs = self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(&a, &b)| (a + p - b) % p)
            .collect();
        FieldElem { field: self.field.clone(), coeffs }
    }

    pub fn neg(&self) -> Self {
        let p = self.field.p;
        let coeffs = self.coeffs.iter().map(|&a| (p - a) % p).collect();
        FieldElem { field: self.field.clone(), coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_field(other);
        if let Some(t) = &self.field.tables {
            if self.is_zero() || other.is_zero() {
                return Self::zero(&self.field);
            }
            let card = self.field.card_u64();
            let i = t.log[self.code() as usize] as u64;
            let j = t.log[other.code() as usize] as u64;
            let code = t.exp[((i + j) % (card - 1)) as usize] as u64;
            return Self::from_code(&self.field, code);
        }
        let coeffs = self.field.raw_mul(&self.coeffs, &other.coeffs);
        FieldElem { field: self.field.clone(), coeffs }
    }

    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        if let Some(t) = &self.field.tables {
            let card = self.field.card_u64();
            let i = t.log[self.code() as usize] as u64;
            let code = t.exp[((card - 1 - i) % (card - 1)) as usize] as u64;
            return Self::from_code(&self.field, code);
        }
        // a^(p^k - 2) via iterated exponentiation without overflowing u64:
        // split p^k-2 into base-p digits.
        let mut acc = Self::one(&self.field);
        // exponent = p^k - 2 processed as bits of a big integer
        let mut exp = num_bigint::BigUint::from(self.field.p);
        exp = exp.pow(self.field.k as u32) - 2u32;
        let mut base = self.clone();
        while exp > num_bigint::BigUint::default() {
            if &exp % 2u32 == num_bigint::BigUint::from(1u32) {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            exp >>= 1;
        }
        acc
    }

    /// x^(p^e) (absolute Frobenius iterated e times, e reduced mod k).
    pub fn frobenius(&self, e: usize) -> Self {
        let e = e % self.field.k;
        if e == 0 {
            return self.clone();
        }
        if let Some(t) = &self.field.tables {
            if self.is_zero() {
                return self.clone();
            }
            let card = self.field.card_u64();
            let mut i = t.log[self.code() as usize] as u128;
            for _ in 0..e {
                i = i * self.field.p as u128 % (card - 1) as u128;
            }
            return Self::from_code(&self.field, t.exp[i as usize] as u64);
        }
        let mut cur = self.clone();
        for _ in 0..e {
            cur = cur.pow_u64(self.field.p);
        }
        cur
    }

    pub fn pow_u64(&self, mut e: u64) -> Self {
        let mut acc = Self::one(&self.field);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn pow_big(&self, e: &num_bigint::BigUint) -> Self {
        let mut acc = Self::one(&self.field);
        let mut base = self.clone();
        let mut e = e.clone();
        while e > num_bigint::BigUint::default() {
            if &e % 2u32 == num_bigint::BigUint::from(1u32) {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative order (enumerable fields only).
    pub fn mult_order(&self) -> u64 {
        assert!(!self.is_zero());
        let card = self.field.card_u64();
        let mut ord = card - 1;
        for f in crate::cyclo::prime_factors(card - 1) {
            while ord % f == 0 && self.pow_u64(ord / f).is_one() {
                ord /= f;
            }
        }
        ord
    }

    pub fn to_json(&self) -> FieldElemJson {
        FieldElemJson { p: self.field.p, k: self.field.k, coeffs: self.coeffs.clone() }
    }

    pub fn from_json(j: &FieldElemJson) -> Result<Self, Error> {
        let field = build_field(j.p, j.k)?;
        if j.coeffs.len() != j.k {
            return Err(Error::Malformed(format!(
                "coefficient vector length {} != field degree {}",
                j.coeffs.len(),
                j.k
            )));
        }
        Ok(Self::from_coeffs(&field, j.coeffs.clone()))
    }
}

/// All elements of an enumerable field in canonical order.
pub fn enumerate_field(field: &Arc<Field>) -> Vec<FieldElem> {
    let card = field.card_u64();
    assert!(card <= SCAN_LIMIT, "field too large to enumerate");
    (0..card).map(|c| FieldElem::from_code(field, c)).collect()
}

static EMBED_CACHE: Lazy<Mutex<HashMap<(u64, usize, usize), Vec<u64>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Canonical embedding F_{p^a} -> F_{p^b} for a | b: the source generator is
/// sent to the smallest root (canonical element order) of the source defining
/// polynomial in the target.
pub fn embed(x: &FieldElem, target: &Arc<Field>) -> Result<FieldElem, Error> {
    let src = &x.field;
    if src.p != target.p {
        return Err(Error::InvalidSubfield(format!(
            "characteristic mismatch {} vs {}",
            src.p, target.p
        )));
    }
    if target.k % src.k != 0 {
        return Err(Error::InvalidSubfield(format!(
            "{} does not divide {}",
            src.k, target.k
        )));
    }
    if src.k == target.k {
        return Ok(FieldElem { field: target.clone(), coeffs: x.coeffs.clone() });
    }
    let key = (src.p, src.k, target.k);
    let root_coeffs = {
        let cache = EMBED_CACHE.lock().unwrap();
        cache.get(&key).cloned()
    };
    let root = match root_coeffs {
        Some(c) => FieldElem { field: target.clone(), coeffs: c },
        None => {
            let card = target.cardinality.ok_or_else(|| {
                Error::SizeBound("embedding target too large for root scan".into())
            })?;
            if card > SCAN_LIMIT {
                return Err(Error::SizeBound(
                    "embedding target exceeds root-scan bound".into(),
                ));
            }
            let mut found = None;
            for code in 0..card {
                let cand = FieldElem::from_code(target, code);
                if eval_poly(&src.modulus, &cand).is_zero() {
                    found = Some(cand);
                    break;
                }
            }
            let root = found.ok_or_else(|| {
                Error::Internal("defining polynomial has no root in extension".into())
            })?;
            EMBED_CACHE.lock().unwrap().insert(key, root.coeffs.clone());
            root
        }
    };
    // x = sum c_i g^i maps to sum c_i root^i.
    let mut acc = FieldElem::zero(target);
    for &c in x.coeffs.iter().rev() {
        acc = acc.mul(&root);
        acc = acc.add(&FieldElem::from_prime(target, c));
    }
    Ok(acc)
}

fn eval_poly(f: &[u64], x: &FieldElem) -> FieldElem {
    let mut acc = FieldElem::zero(&x.field);
    for &c in f.iter().rev() {
        acc = acc.mul(x);
        acc = acc.add(&FieldElem::from_prime(&x.field, c));
    }
    acc
}

/// Preimage under the canonical embedding; errors if x is not in the image.
pub fn subfield_preimage(x: &FieldElem, sub: &Arc<Field>) -> Result<FieldElem, Error> {
    if sub.k == x.field.k {
        return Ok(FieldElem { field: sub.clone(), coeffs: x.coeffs.clone() });
    }
    // Membership: x^(p^a) = x.
    if x.frobenius(sub.k) != *x {
        return Err(Error::InvalidSubfield("element not in subfield".into()));
    }
    // Scan the (small) subfield for the preimage.
    let card = sub.card_u64();
    for code in 0..card {
        let cand = FieldElem::from_code(sub, code);
        if embed(&cand, &x.field)? == *x {
            return Ok(cand);
        }
    }
    Err(Error::Internal("subfield preimage scan failed".into()))
}

/// Relative trace to the subfield F_{p^a} (a | k), returned inside the subfield.
pub fn trace_to(x: &FieldElem, sub: &Arc<Field>) -> Result<FieldElem, Error> {
    check_subfield(x, sub)?;
    let steps = x.field.k / sub.k;
    let mut acc = FieldElem::zero(&x.field);
    let mut cur = x.clone();
    for _ in 0..steps {
        acc = acc.add(&cur);
        cur = cur.frobenius(sub.k);
    }
    subfield_preimage(&acc, sub)
}

/// Relative norm to the subfield F_{p^a} (a | k), returned inside the subfield.
pub fn norm_to(x: &FieldElem, sub: &Arc<Field>) -> Result<FieldElem, Error> {
    check_subfield(x, sub)?;
    let steps = x.field.k / sub.k;
    let mut acc = FieldElem::one(&x.field);
    let mut cur = x.clone();
    for _ in 0..steps {
        acc = acc.mul(&cur);
        cur = cur.frobenius(sub.k);
    }
    subfield_preimage(&acc, sub)
}

fn check_subfield(x: &FieldElem, sub: &Arc<Field>) -> Result<(), Error> {
    if sub.p != x.field.p || x.field.k % sub.k != 0 {
        return Err(Error::InvalidSubfield(format!(
            "F_{{{}^{}}} is not a subfield of F_{{{}^{}}}",
            sub.p, sub.k, x.field.p, x.field.k
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_field_cardinalities() {
        assert_eq!(build_field(2, 6).unwrap().card_u64(), 64);
        assert_eq!(build_field(2, 1).unwrap().card_u64(), 2);
        assert!(build_field(4, 2).is_err()); // 4 not prime
        assert!(build_field(2, 0).is_err());
    }

    #[test]
    fn f9_defining_polynomial_is_x2_plus_1() {
        let f = build_field(3, 2).unwrap();
        assert_eq!(f.modulus, vec![1, 0, 1]);
        assert!(poly::is_irreducible(&f.modulus, 3));
    }

    #[test]
    fn field_axioms_on_f64() {
        let f = build_field(2, 6).unwrap();
        let els = enumerate_field(&f);
        let g = FieldElem::generator(&f);
        // spot associativity/commutativity and inverses
        for a in els.iter().step_by(7) {
            for b in els.iter().step_by(11) {
                assert_eq!(a.mul(b), b.mul(a));
                assert_eq!(a.mul(&b.mul(&g)), a.mul(b).mul(&g));
            }
            if !a.is_zero() {
                assert!(a.mul(&a.inv()).is_one());
            }
        }
    }

    #[test]
    fn embed_is_ring_homomorphic_and_respects_zero_one() {
        let f4 = build_field(2, 2).unwrap();
        let f64 = build_field(2, 6).unwrap();
        assert!(embed(&FieldElem::zero(&f4), &f64).unwrap().is_zero());
        assert!(embed(&FieldElem::one(&f4), &f64).unwrap().is_one());
        let els = enumerate_field(&f4);
        for a in &els {
            for b in &els {
                let lhs = embed(&a.mul(b), &f64).unwrap();
                let rhs = embed(a, &f64).unwrap().mul(&embed(b, &f64).unwrap());
                assert_eq!(lhs, rhs);
                let lhs = embed(&a.add(b), &f64).unwrap();
                let rhs = embed(a, &f64).unwrap().add(&embed(b, &f64).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn embedded_f4_generator_has_order_3() {
        let f4 = build_field(2, 2).unwrap();
        let f64 = build_field(2, 6).unwrap();
        let g = FieldElem::generator(&f4);
        let img = embed(&g, &f64).unwrap();
        assert_eq!(img.mult_order(), 3);
    }

    #[test]
    fn embedding_transitivity_and_frobenius_compatibility() {
        let f2 = build_field(2, 1).unwrap();
        let f4 = build_field(2, 2).unwrap();
        let f16 = build_field(2, 4).unwrap();
        for a in enumerate_field(&f2) {
            let via_mid = embed(&embed(&a, &f4).unwrap(), &f16).unwrap();
            let direct = embed(&a, &f16).unwrap();
            assert_eq!(via_mid, direct);
        }
        let f64 = build_field(2, 6).unwrap();
        for a in enumerate_field(&f4) {
            let lhs = embed(&a.frobenius(1), &f64).unwrap();
            let rhs = embed(&a, &f64).unwrap().frobenius(1);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn frobenius_fixes_ground_field_elements() {
        let f8 = build_field(2, 3).unwrap();
        for a in enumerate_field(&f8) {
            assert_eq!(a.frobenius(3), a);
        }
    }

    #[test]
    fn trace_of_f4_generator_to_f2_is_one() {
        let f2 = build_field(2, 1).unwrap();
        let f4 = build_field(2, 2).unwrap();
        let w = FieldElem::generator(&f4);
        let t = trace_to(&w, &f2).unwrap();
        assert!(t.is_one());
    }

    #[test]
    fn trace_transitivity() {
        let f2 = build_field(2, 1).unwrap();
        let f4 = build_field(2, 2).unwrap();
        let f16 = build_field(2, 4).unwrap();
        for a in enumerate_field(&f16) {
            let direct = trace_to(&a, &f2).unwrap();
            let mid = trace_to(&a, &f4).unwrap();
            let via = trace_to(&mid, &f2).unwrap();
            assert_eq!(direct, via);
        }
    }

    #[test]
    fn norm_is_surjective_onto_subfield_units() {
        // Nr_{F_{q^2}/F_q} hits all of F_q^x for q in {2, 3}.
        for (p, e) in [(2u64, 1usize), (3, 1)] {
            let sub = build_field(p, e).unwrap();
            let big = build_field(p, 2 * e).unwrap();
            let mut image = std::collections::HashSet::new();
            for a in enumerate_field(&big) {
                if !a.is_zero() {
                    image.insert(norm_to(&a, &sub).unwrap().code());
                }
            }
            assert_eq!(image.len() as u64, sub.card_u64() - 1);
        }
    }
}
