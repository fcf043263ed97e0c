//! Exact scalars in cyclotomic fields Q(zeta_M).
//!
//! A `CycloScalar` is a rational coefficient vector reduced modulo the M-th
//! cyclotomic polynomial, so equality is decidable and all arithmetic is
//! exact. Scalars of different conductors interoperate by lifting to the lcm
//! conductor. Complex conjugation is the substitution zeta -> zeta^{-1}.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;

/// Euler phi for small arguments.
pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Prime factors of `n`, without multiplicity.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn divisors(n: u64) -> Vec<u64> {
    let mut divs = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            divs.push(i);
            if i != n / i {
                divs.push(n / i);
            }
        }
        i += 1;
    }
    divs.sort_unstable();
    divs
}

// Integer polynomial helpers for computing cyclotomic polynomials.

fn poly_trim(p: &mut Vec<BigInt>) {
    while p.len() > 1 && p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

fn poly_exact_div(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    // Exact division of integer polynomials with monic-up-to-sign divisor.
    let mut rem: Vec<BigInt> = num.to_vec();
    let dd = den.len() - 1;
    let lead = den[dd].clone();
    assert!(lead.is_one() || (-&lead).is_one(), "divisor must be monic up to sign");
    let mut quot = vec![BigInt::zero(); rem.len().saturating_sub(dd)];
    while rem.len() - 1 >= dd && !(rem.len() == 1 && rem[0].is_zero()) {
        let deg = rem.len() - 1;
        let c = if lead.is_one() { rem[deg].clone() } else { -rem[deg].clone() };
        if !c.is_zero() {
            quot[deg - dd] = c.clone();
            for (i, dc) in den.iter().enumerate() {
                let idx = deg - dd + i;
                let t = &c * dc;
                rem[idx] -= t;
            }
        } else {
            rem.pop();
            continue;
        }
        poly_trim(&mut rem);
        if rem.len() == 1 && rem[0].is_zero() {
            break;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "non-exact polynomial division");
    poly_trim(&mut quot);
    quot
}

fn cyclotomic_raw(n: u64) -> Vec<BigInt> {
    if n == 1 {
        return vec![BigInt::from(-1), BigInt::from(1)];
    }
    // x^n - 1 divided by Phi_d for every proper divisor d of n.
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::from(1);
    let mut result = num;
    for d in divisors(n) {
        if d == n {
            continue;
        }
        let phi_d = cyclotomic_polynomial(d);
        result = poly_exact_div(&result, &phi_d);
    }
    result
}

static CYCLO_CACHE: Lazy<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// The M-th cyclotomic polynomial as an integer coefficient vector
/// (little-endian, monic of degree phi(M)).
pub fn cyclotomic_polynomial(m: u64) -> Arc<Vec<BigInt>> {
    if let Some(p) = CYCLO_CACHE.lock().unwrap().get(&m) {
        return p.clone();
    }
    let p = Arc::new(cyclotomic_raw(m));
    CYCLO_CACHE.lock().unwrap().insert(m, p.clone());
    p
}

/// An exact element of Q(zeta_M).
#[derive(Clone)]
pub struct CycloScalar {
    conductor: u64,
    /// Little-endian coefficients in the power basis 1, z, ..., z^{phi(M)-1}.
    coeffs: Vec<BigRational>,
}

impl CycloScalar {
    fn reduced(conductor: u64, mut coeffs: Vec<BigRational>) -> Self {
        let phi = euler_phi(conductor) as usize;
        if coeffs.len() > phi {
            let modulus = cyclotomic_polynomial(conductor);
            // Reduce modulo the (monic) cyclotomic polynomial.
            for deg in (phi..coeffs.len()).rev() {
                let c = std::mem::replace(&mut coeffs[deg], BigRational::zero());
                if c.is_zero() {
                    continue;
                }
                for (i, mc) in modulus.iter().take(phi).enumerate() {
                    let t = &c * BigRational::from(mc.clone());
                    coeffs[deg - phi + i] -= t;
                }
            }
            coeffs.truncate(phi);
        }
        coeffs.resize(phi, BigRational::zero());
        CycloScalar { conductor, coeffs }
    }

    pub fn zero() -> Self {
        CycloScalar { conductor: 1, coeffs: vec![BigRational::zero()] }
    }

    pub fn one() -> Self {
        CycloScalar { conductor: 1, coeffs: vec![BigRational::one()] }
    }

    pub fn from_rational(r: BigRational) -> Self {
        CycloScalar { conductor: 1, coeffs: vec![r] }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from(BigInt::from(n)))
    }

    /// zeta_M^k.
    pub fn root_of_unity(m: u64, k: u64) -> Self {
        let k = (k % m) as usize;
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = BigRational::one();
        Self::reduced(m, coeffs)
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Re-express in Q(zeta_{M'}) for conductor M | M'.
    pub fn promote(&self, new_conductor: u64) -> Self {
        assert!(
            new_conductor % self.conductor == 0,
            "conductor {} does not divide {}",
            self.conductor,
            new_conductor
        );
        if new_conductor == self.conductor {
            return self.clone();
        }
        let step = (new_conductor / self.conductor) as usize;
        let mut coeffs = vec![BigRational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * step] = c.clone();
        }
        Self::reduced(new_conductor, coeffs)
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        if a.conductor == b.conductor {
            return (a.clone(), b.clone());
        }
        let l = num_integer::lcm(a.conductor, b.conductor);
        (a.promote(l), b.promote(l))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b) = Self::common(self, other);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (mut a, b) = Self::common(self, other);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x -= y;
        }
        a
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = Self::common(self, other);
        let mut prod = vec![BigRational::zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                prod[i + j] += x * y;
            }
        }
        Self::reduced(a.conductor, prod)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= r;
        }
        out
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Substitution zeta -> zeta^e for e coprime to the conductor.
    pub fn galois_map(&self, e: u64) -> Self {
        let m = self.conductor;
        assert_eq!(num_integer::gcd(e % m, m), 1, "galois exponent not coprime to conductor");
        let mut coeffs = vec![BigRational::zero(); ((m as usize - 1) * (self.coeffs.len() - 1)).max(1) + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let idx = ((k as u64 * e) % m) as usize;
            coeffs[idx] += c;
        }
        Self::reduced(m, coeffs)
    }

    /// Complex conjugation zeta -> zeta^{-1}.
    pub fn conj(&self) -> Self {
        if self.conductor <= 2 {
            return self.clone();
        }
        self.galois_map(self.conductor - 1)
    }

    /// Multiplicative inverse, solving x * self = 1 by linear algebra over Q.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.coeffs.len();
        // Column j of the multiplication-by-self matrix is self * z^j.
        let mut cols = Vec::with_capacity(n);
        let mut zj = Self { conductor: self.conductor, coeffs: self.coeffs.clone() };
        for _ in 0..n {
            cols.push(zj.coeffs.clone());
            zj = zj.mul(&Self::root_of_unity(self.conductor.max(2), if self.conductor == 1 { 0 } else { 1 }));
            if self.conductor == 1 {
                break;
            }
        }
        if self.conductor == 1 {
            return Some(Self::from_rational(self.coeffs[0].recip()));
        }
        // Gaussian elimination on the n x n system M x = e_0.
        let mut mat = vec![vec![BigRational::zero(); n + 1]; n];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                mat[i][j] = col[i].clone();
            }
        }
        mat[0][n] = BigRational::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !mat[r][col].is_zero())?;
            mat.swap(col, pivot);
            let inv = mat[col][col].recip();
            for j in col..=n {
                mat[col][j] = &mat[col][j] * &inv;
            }
            for r in 0..n {
                if r != col && !mat[r][col].is_zero() {
                    let f = mat[r][col].clone();
                    for j in col..=n {
                        let t = &f * &mat[col][j];
                        mat[r][j] -= t;
                    }
                }
            }
        }
        let coeffs: Vec<BigRational> = (0..n).map(|i| mat[i][n].clone()).collect();
        Some(Self { conductor: self.conductor, coeffs })
    }

    /// If the scalar is rational, return it.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn equals_integer(&self, n: i64) -> bool {
        match self.as_rational() {
            Some(r) => r == BigRational::from(BigInt::from(n)),
            None => false,
        }
    }

    /// Exact string form "a0 + a1*z + ..." with z = zeta_conductor.
    pub fn to_exact_string(&self) -> String {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cs = c.to_string();
            let term = match i {
                0 => cs,
                1 => format!("{cs}*z"),
                _ => format!("{cs}*z^{i}"),
            };
            parts.push(term);
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            format!("{} [z = zeta_{}]", parts.join(" + "), self.conductor)
        }
    }

    /// JSON value: {"conductor": M, "coeffs": ["a/b", ...]}.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "conductor": self.conductor,
            "coeffs": self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }
}

impl PartialEq for CycloScalar {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = Self::common(self, other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CycloScalar {}

impl fmt::Debug for CycloScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_exact_string())
    }
}

impl fmt::Display for CycloScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_exact_string())
    }
}

/// (-1)^e as a scalar.
pub fn sign_pow(e: u32) -> CycloScalar {
    if e % 2 == 0 {
        CycloScalar::one()
    } else {
        CycloScalar::from_integer(-1)
    }
}

/// q^e as a rational scalar.
pub fn integer_pow(base: u64, e: u32) -> CycloScalar {
    let mut n = BigInt::one();
    for _ in 0..e {
        n *= base;
    }
    CycloScalar::from_rational(BigRational::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials_match_known_values() {
        let as_i64 = |v: &Arc<Vec<BigInt>>| -> Vec<i64> {
            v.iter().map(|c| i64::try_from(c.clone()).unwrap()).collect()
        };
        assert_eq!(as_i64(&cyclotomic_polynomial(1)), vec![-1, 1]);
        assert_eq!(as_i64(&cyclotomic_polynomial(2)), vec![1, 1]);
        assert_eq!(as_i64(&cyclotomic_polynomial(3)), vec![1, 1, 1]);
        assert_eq!(as_i64(&cyclotomic_polynomial(4)), vec![1, 0, 1]);
        assert_eq!(as_i64(&cyclotomic_polynomial(9)), vec![1, 0, 0, 1, 0, 0, 1]);
        assert_eq!(as_i64(&cyclotomic_polynomial(12)), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn roots_of_unity_multiply_by_exponent_addition() {
        let z = CycloScalar::root_of_unity(9, 1);
        let mut acc = CycloScalar::one();
        for _ in 0..9 {
            acc = acc.mul(&z);
        }
        assert_eq!(acc, CycloScalar::one());
        assert_eq!(z.pow(4).mul(&z.pow(5)), CycloScalar::one());
    }

    #[test]
    fn mixed_conductor_arithmetic_lifts_to_lcm() {
        let i = CycloScalar::root_of_unity(4, 1);
        let w = CycloScalar::root_of_unity(3, 1);
        let prod = i.mul(&w);
        assert_eq!(prod.conductor(), 12);
        assert_eq!(prod, CycloScalar::root_of_unity(12, 7));
    }

    #[test]
    fn nontrivial_character_sum_vanishes() {
        // 1 + zeta_3 + zeta_3^2 = 0
        let w = CycloScalar::root_of_unity(3, 1);
        let s = CycloScalar::one().add(&w).add(&w.pow(2));
        assert!(s.is_zero());
    }

    #[test]
    fn conjugation_is_an_involution_and_fixes_rationals() {
        let z = CycloScalar::root_of_unity(9, 2).add(&CycloScalar::from_integer(5));
        assert_eq!(z.conj().conj(), z);
        let r = CycloScalar::from_integer(-7);
        assert_eq!(r.conj(), r);
        assert_eq!(
            CycloScalar::root_of_unity(4, 1).conj(),
            CycloScalar::root_of_unity(4, 3)
        );
    }

    #[test]
    fn inverse_of_root_times_rational() {
        let x = CycloScalar::root_of_unity(9, 4).scale(&BigRational::from(BigInt::from(3)));
        let inv = x.inverse().unwrap();
        assert_eq!(x.mul(&inv), CycloScalar::one());
        assert!(CycloScalar::zero().inverse().is_none());
    }
}
