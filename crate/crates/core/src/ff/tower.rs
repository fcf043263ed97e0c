//! Relative extension fields F = B[Y]/(h) over an enumerable base field B.
//!
//! Lang witnesses and fixed-point counting need fields far beyond the
//! enumeration bound (degrees in the hundreds over F_p). Building them as
//! towers over an already-constructed base keeps base-field arithmetic
//! table-driven and makes "constants from the base" embeddings trivial.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use once_cell::sync::Lazy;

use super::field::{Field, FieldElem};

/// B[Y]/(h) with h monic irreducible over B of degree d >= 1.
pub struct TowerField {
    pub base: Arc<Field>,
    /// Monic modulus, little-endian, length d+1, coefficients in the base.
    pub modulus: Vec<FieldElem>,
    pub deg: usize,
    /// Y^p mod h, cached for Frobenius.
    y_pow_p: Vec<TowerElem>,
}

/// Element: little-endian base-field coefficient vector of length deg.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TowerElem {
    pub coeffs: Vec<FieldElem>,
}

static TOWER_REGISTRY: Lazy<Mutex<HashMap<(u64, usize, usize), Arc<TowerField>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

impl TowerField {
    /// Construct with the lexicographically smallest monic irreducible of
    /// degree d over the base (coefficients compared high-degree-first in the
    /// base's canonical element order). Instances are shared per (base, d).
    pub fn new(base: Arc<Field>, d: usize) -> Arc<TowerField> {
        assert!(d >= 1);
        let key = (base.p, base.k, d);
        if let Some(t) = TOWER_REGISTRY.lock().unwrap().get(&key) {
            return t.clone();
        }
        let modulus = if d == 1 {
            vec![FieldElem::zero(&base), FieldElem::one(&base)]
        } else {
            smallest_irreducible_over(&base, d)
        };
        let mut tf = TowerField { base, modulus, deg: d, y_pow_p: Vec::new() };
        // Cache powers (Y^p)^i mod h for i < d to speed up Frobenius.
        let yp = tf.pow_big_raw(&tf.var(), &BigUint::from(tf.base.p));
        let mut pows = Vec::with_capacity(d);
        let mut cur = tf.one();
        for _ in 0..d {
            pows.push(cur.clone());
            cur = tf.mul(&cur, &yp);
        }
        tf.y_pow_p = pows;
        let arc = Arc::new(tf);
        TOWER_REGISTRY.lock().unwrap().insert(key, arc.clone());
        arc
    }

    pub fn zero(&self) -> TowerElem {
        TowerElem { coeffs: vec![FieldElem::zero(&self.base); self.deg] }
    }

    pub fn one(&self) -> TowerElem {
        let mut coeffs = vec![FieldElem::zero(&self.base); self.deg];
        coeffs[0] = FieldElem::one(&self.base);
        TowerElem { coeffs }
    }

    pub fn var(&self) -> TowerElem {
        let mut coeffs = vec![FieldElem::zero(&self.base); self.deg];
        if self.deg > 1 {
            coeffs[1] = FieldElem::one(&self.base);
        }
        TowerElem { coeffs }
    }

    pub fn from_base(&self, c: &FieldElem) -> TowerElem {
        let mut coeffs = vec![FieldElem::zero(&self.base); self.deg];
        coeffs[0] = c.clone();
        TowerElem { coeffs }
    }

    pub fn is_zero(&self, a: &TowerElem) -> bool {
        a.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        TowerElem {
            coeffs: a.coeffs.iter().zip(b.coeffs.iter()).map(|(x, y)| x.add(y)).collect(),
        }
    }

    pub fn sub(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        TowerElem {
            coeffs: a.coeffs.iter().zip(b.coeffs.iter()).map(|(x, y)| x.sub(y)).collect(),
        }
    }

    pub fn neg(&self, a: &TowerElem) -> TowerElem {
        TowerElem { coeffs: a.coeffs.iter().map(|x| x.neg()).collect() }
    }

    pub fn scale(&self, a: &TowerElem, c: &FieldElem) -> TowerElem {
        TowerElem { coeffs: a.coeffs.iter().map(|x| x.mul(c)).collect() }
    }

    pub fn mul(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        let d = self.deg;
        let zero = FieldElem::zero(&self.base);
        let mut prod = vec![zero.clone(); 2 * d - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                prod[i + j] = prod[i + j].add(&x.mul(y));
            }
        }
        // Reduce modulo the monic modulus.
        for deg in (d..prod.len()).rev() {
            let c = std::mem::replace(&mut prod[deg], zero.clone());
            if c.is_zero() {
                continue;
            }
            for (i, mc) in self.modulus.iter().take(d).enumerate() {
                let t = c.mul(mc);
                prod[deg - d + i] = prod[deg - d + i].sub(&t);
            }
        }
        prod.truncate(d);
        TowerElem { coeffs: prod }
    }

    fn pow_big_raw(&self, a: &TowerElem, e: &BigUint) -> TowerElem {
        let mut acc = self.one();
        let mut base = a.clone();
        let mut e = e.clone();
        let zero = BigUint::default();
        let one = BigUint::from(1u32);
        while e > zero {
            if &e & &one == one {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn pow_big(&self, a: &TowerElem, e: &BigUint) -> TowerElem {
        self.pow_big_raw(a, e)
    }

    pub fn pow_u64(&self, a: &TowerElem, e: u64) -> TowerElem {
        self.pow_big_raw(a, &BigUint::from(e))
    }

    /// Absolute p-power Frobenius: (sum a_i Y^i)^p = sum a_i^p (Y^p)^i.
    pub fn frobenius_p(&self, a: &TowerElem) -> TowerElem {
        let mut acc = self.zero();
        for (i, c) in a.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cp = c.frobenius(1);
            acc = self.add(&acc, &self.scale(&self.y_pow_p[i], &cp));
        }
        acc
    }

    /// x -> x^{p^e}.
    pub fn frobenius(&self, a: &TowerElem, e: usize) -> TowerElem {
        let total = self.base.k * self.deg;
        let e = e % total;
        let mut cur = a.clone();
        for _ in 0..e {
            cur = self.frobenius_p(&cur);
        }
        cur
    }

    pub fn inv(&self, a: &TowerElem) -> TowerElem {
        assert!(!self.is_zero(a), "inverse of zero");
        // a^(|F| - 2)
        let card = BigUint::from(self.base.p).pow((self.base.k * self.deg) as u32);
        self.pow_big_raw(a, &(card - 2u32))
    }

    /// Absolute degree over F_p.
    pub fn abs_degree(&self) -> usize {
        self.base.k * self.deg
    }

    /// Cardinality as a big integer.
    pub fn cardinality(&self) -> BigUint {
        BigUint::from(self.base.p).pow(self.abs_degree() as u32)
    }

    /// Flatten to F_p coordinates (base coefficients concatenated).
    pub fn to_fp_coords(&self, a: &TowerElem) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.abs_degree());
        for c in &a.coeffs {
            out.extend_from_slice(&c.coeffs);
        }
        out
    }

    pub fn from_fp_coords(&self, coords: &[u64]) -> TowerElem {
        assert_eq!(coords.len(), self.abs_degree());
        let k = self.base.k;
        let coeffs = (0..self.deg)
            .map(|i| FieldElem::from_coeffs(&self.base, coords[i * k..(i + 1) * k].to_vec()))
            .collect();
        TowerElem { coeffs }
    }

    /// Deterministic scan order for generator searches: counts through
    /// elements with small coordinates first.
    pub fn scan_elements(&self) -> impl Iterator<Item = TowerElem> + '_ {
        let dim = self.abs_degree();
        let p = self.base.p;
        (1u64..).map(move |code| {
            let mut c = code;
            let mut coords = vec![0u64; dim];
            let mut i = 0;
            while c > 0 && i < dim {
                coords[i] = c % p;
                c /= p;
                i += 1;
            }
            self.from_fp_coords(&coords)
        })
    }
}

fn smallest_irreducible_over(base: &Arc<Field>, d: usize) -> Vec<FieldElem> {
    // Scan monic degree-d polynomials in lexicographic order, high-degree
    // coefficients most significant, using the base's canonical element order.
    let card = base.card_u64();
    let mut digits = vec![0u64; d]; // digits[0] = c_{d-1} most significant
    loop {
        let mut f: Vec<FieldElem> = Vec::with_capacity(d + 1);
        for i in 0..d {
            f.push(FieldElem::from_code(base, digits[d - 1 - i]));
        }
        f.push(FieldElem::one(base));
        if is_irreducible_over(base, &f) {
            return f;
        }
        let mut pos = d;
        loop {
            assert!(pos > 0, "no irreducible polynomial of degree {d} found");
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < card {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Irreducibility of monic f of degree d over an enumerable base field:
/// f is irreducible iff it has no irreducible factor of degree <= d/2, i.e.
/// gcd(f, x^(|B|^j) - x) = 1 for j = 1..d/2. The incremental gcd rejects
/// most reducible candidates after a few Frobenius steps.
fn is_irreducible_over(base: &Arc<Field>, f: &[FieldElem]) -> bool {
    let d = f.len() - 1;
    if d == 1 {
        return true;
    }
    let card = base.card_u64();
    let x = vec![FieldElem::zero(base), FieldElem::one(base)];
    let mut xq = x.clone();
    for _j in 1..=(d / 2) {
        xq = poly_powmod_over(base, &xq, card, f);
        let diff = poly_sub_over(base, &xq, &x);
        let g = poly_gcd_over(base, f, &diff);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

fn poly_trim_over(p: &mut Vec<FieldElem>) {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
}

fn poly_sub_over(base: &Arc<Field>, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
    let n = a.len().max(b.len());
    let zero = FieldElem::zero(base);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).unwrap_or(&zero);
        let y = b.get(i).unwrap_or(&zero);
        out.push(x.sub(y));
    }
    poly_trim_over(&mut out);
    out
}

fn poly_mul_over(base: &Arc<Field>, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
    let zero = FieldElem::zero(base);
    let mut out = vec![zero; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    poly_trim_over(&mut out);
    out
}

fn poly_rem_over(base: &Arc<Field>, a: &[FieldElem], m: &[FieldElem]) -> Vec<FieldElem> {
    let mut r = a.to_vec();
    poly_trim_over(&mut r);
    let dm = m.len() - 1;
    if dm == 0 {
        return vec![FieldElem::zero(base)];
    }
    let lead_inv = m[dm].inv();
    while r.len() > 1 || !r[0].is_zero() {
        let dr = r.len() - 1;
        if dr < dm {
            break;
        }
        let c = r[dr].mul(&lead_inv);
        for (i, mc) in m.iter().enumerate() {
            let idx = dr - dm + i;
            let t = c.mul(mc);
            r[idx] = r[idx].sub(&t);
        }
        poly_trim_over(&mut r);
    }
    r
}

fn poly_gcd_over(base: &Arc<Field>, a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    poly_trim_over(&mut x);
    poly_trim_over(&mut y);
    while !(y.len() == 1 && y[0].is_zero()) {
        let r = poly_rem_over(base, &x, &y);
        x = y;
        y = r;
    }
    x
}

fn poly_powmod_over(base: &Arc<Field>, a: &[FieldElem], e: u64, m: &[FieldElem]) -> Vec<FieldElem> {
    let mut acc = vec![FieldElem::one(base)];
    let mut b = poly_rem_over(base, a, m);
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem_over(base, &poly_mul_over(base, &acc, &b), m);
        }
        b = poly_rem_over(base, &poly_mul_over(base, &b, &b), m);
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::build_field;

    #[test]
    fn tower_field_axioms_and_frobenius_order() {
        let base = build_field(2, 3).unwrap(); // F_8
        let tf = TowerField::new(base, 3); // F_{8^3} = F_{2^9}
        assert_eq!(tf.abs_degree(), 9);
        let a = tf.var();
        let b = tf.add(&tf.var(), &tf.one());
        assert_eq!(tf.mul(&a, &b), tf.mul(&b, &a));
        let ainv = tf.inv(&a);
        assert_eq!(tf.mul(&a, &ainv), tf.one());
        // Frobenius has order 9 on F_{2^9}; x^(2^9) = x.
        let mut x = b.clone();
        for _ in 0..9 {
            x = tf.frobenius_p(&x);
        }
        assert_eq!(x, b);
    }

    #[test]
    fn degree_one_tower_is_the_base() {
        let base = build_field(3, 2).unwrap();
        let tf = TowerField::new(base.clone(), 1);
        let a = tf.from_base(&FieldElem::generator(&base));
        let b = tf.from_base(&FieldElem::from_prime(&base, 2));
        let prod = tf.mul(&a, &b);
        assert_eq!(prod.coeffs[0], FieldElem::generator(&base).mul(&FieldElem::from_prime(&base, 2)));
    }

    #[test]
    fn fp_coordinate_round_trip() {
        let base = build_field(3, 1).unwrap();
        let tf = TowerField::new(base, 4);
        let x = tf.scan_elements().nth(17).unwrap();
        let coords = tf.to_fp_coords(&x);
        assert_eq!(tf.from_fp_coords(&coords), x);
    }
}
