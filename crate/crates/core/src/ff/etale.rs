//! The quadratic etale algebra F_{q^2} (x) F_{q^K} with its two commuting
//! automorphisms sigma' = Fr_q (x) id and phi = id (x) Fr_q.
//!
//! Elements are written x + xi*y with x, y in F_{q^K} and xi the canonical
//! generator of F_{q^2} over F_q (xi^2 = t*xi - n0). For K odd the algebra is
//! the field F_{q^{2K}}; for K even it splits into two copies of F_{q^K},
//! which is exactly the case needed when a Lang witness lives over an
//! even-degree extension. F_{q^K} itself is carried as a tower over F_{q^m}
//! so that level-m constants embed trivially.

use std::sync::Arc;

use num_bigint::BigUint;

use super::field::{build_field, embed, subfield_preimage, Field, FieldElem};
use super::tower::{TowerElem, TowerField};
use crate::error::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EtaleElem {
    pub x: TowerElem,
    pub y: TowerElem,
}

pub struct EtaleAlgebra {
    pub q: u64,
    pub p: u64,
    pub e: usize,
    /// F_{q^K} as a tower; base is F_{q^m} for the Lang use, or F_{q^K}
    /// itself (degree-1 tower) for the standalone algebra handle.
    pub tower: Arc<TowerField>,
    /// K = extension degree of the second tensor factor over F_q.
    pub k_ext: usize,
    /// Trace and norm of xi over F_q, as base-field constants.
    t: FieldElem,
    n0: FieldElem,
    /// F_{q^2} with its canonical generator xi.
    fq2: Arc<Field>,
}

impl EtaleAlgebra {
    /// Algebra over an explicit tower representing F_{q^K}.
    pub fn over_tower(q: u64, tower: Arc<TowerField>) -> Result<EtaleAlgebra, Error> {
        let (p, e) = super::split_prime_power(q)
            .ok_or_else(|| Error::Malformed(format!("{q} is not a prime power")))?;
        assert_eq!(tower.abs_degree() % e, 0);
        let k_ext = tower.abs_degree() / e;
        let fq2 = build_field(p, 2 * e)?;
        let fq = build_field(p, e)?;
        let xi = FieldElem::generator(&fq2);
        let xi_conj = xi.frobenius(e);
        let t_q2 = xi.add(&xi_conj);
        let n_q2 = xi.mul(&xi_conj);
        let t_q = subfield_preimage(&t_q2, &fq)?;
        let n_q = subfield_preimage(&n_q2, &fq)?;
        // Embed the F_q constants into the tower base.
        let t_base = embed(&t_q, &tower.base)?;
        let n_base = embed(&n_q, &tower.base)?;
        Ok(EtaleAlgebra {
            q,
            p,
            e,
            t: t_base,
            n0: n_base,
            tower,
            k_ext,
            fq2,
        })
    }

    /// Standalone handle for F_{q^2} (x) F_{q^K} with F_{q^K} standard.
    pub fn standard(q: u64, k_ext: usize) -> Result<EtaleAlgebra, Error> {
        let (p, e) = super::split_prime_power(q)
            .ok_or_else(|| Error::Malformed(format!("{q} is not a prime power")))?;
        let base = build_field(p, e * k_ext)?;
        let tower = TowerField::new(base, 1);
        Self::over_tower(q, tower)
    }

    pub fn zero(&self) -> EtaleElem {
        EtaleElem { x: self.tower.zero(), y: self.tower.zero() }
    }

    pub fn one(&self) -> EtaleElem {
        EtaleElem { x: self.tower.one(), y: self.tower.zero() }
    }

    pub fn xi(&self) -> EtaleElem {
        EtaleElem { x: self.tower.zero(), y: self.tower.one() }
    }

    pub fn is_zero(&self, a: &EtaleElem) -> bool {
        self.tower.is_zero(&a.x) && self.tower.is_zero(&a.y)
    }

    pub fn add(&self, a: &EtaleElem, b: &EtaleElem) -> EtaleElem {
        EtaleElem { x: self.tower.add(&a.x, &b.x), y: self.tower.add(&a.y, &b.y) }
    }

    pub fn sub(&self, a: &EtaleElem, b: &EtaleElem) -> EtaleElem {
        EtaleElem { x: self.tower.sub(&a.x, &b.x), y: self.tower.sub(&a.y, &b.y) }
    }

    pub fn neg(&self, a: &EtaleElem) -> EtaleElem {
        EtaleElem { x: self.tower.neg(&a.x), y: self.tower.neg(&a.y) }
    }

    /// (x1 + xi y1)(x2 + xi y2) with xi^2 = t*xi - n0.
    pub fn mul(&self, a: &EtaleElem, b: &EtaleElem) -> EtaleElem {
        let tw = &self.tower;
        let xx = tw.mul(&a.x, &b.x);
        let yy = tw.mul(&a.y, &b.y);
        let xy = tw.add(&tw.mul(&a.x, &b.y), &tw.mul(&a.y, &b.x));
        let x = tw.sub(&xx, &tw.scale(&yy, &self.n0));
        let y = tw.add(&xy, &tw.scale(&yy, &self.t));
        EtaleElem { x, y }
    }

    /// sigma' = Fr_q (x) id: fixes the F_{q^K} coordinates, conjugates xi.
    pub fn sigma_prime(&self, a: &EtaleElem) -> EtaleElem {
        // xi -> t - xi.
        let x = self.tower.add(&a.x, &self.tower.scale(&a.y, &self.t));
        EtaleElem { x, y: self.tower.neg(&a.y) }
    }

    /// phi = id (x) Fr_q: q-th power on the F_{q^K} coordinates.
    pub fn phi(&self, a: &EtaleElem) -> EtaleElem {
        EtaleElem { x: self.tower.frobenius(&a.x, self.e), y: self.tower.frobenius(&a.y, self.e) }
    }

    pub fn phi_pow(&self, a: &EtaleElem, d: usize) -> EtaleElem {
        EtaleElem {
            x: self.tower.frobenius(&a.x, self.e * d),
            y: self.tower.frobenius(&a.y, self.e * d),
        }
    }

    /// e * sigma'(e), an element of the sigma'-fixed subalgebra F_{q^K}.
    pub fn sigma_norm(&self, a: &EtaleElem) -> TowerElem {
        let tw = &self.tower;
        // x^2 + t x y + n0 y^2
        let mut n = tw.mul(&a.x, &a.x);
        n = tw.add(&n, &tw.scale(&tw.mul(&a.x, &a.y), &self.t));
        n = tw.add(&n, &tw.scale(&tw.mul(&a.y, &a.y), &self.n0));
        n
    }

    pub fn is_unit(&self, a: &EtaleElem) -> bool {
        !self.tower.is_zero(&self.sigma_norm(a))
    }

    pub fn inv(&self, a: &EtaleElem) -> Result<EtaleElem, Error> {
        let n = self.sigma_norm(a);
        if self.tower.is_zero(&n) {
            return Err(Error::Internal("inverse of a non-unit etale element".into()));
        }
        let n_inv = self.tower.inv(&n);
        let s = self.sigma_prime(a);
        Ok(EtaleElem { x: self.tower.mul(&s.x, &n_inv), y: self.tower.mul(&s.y, &n_inv) })
    }

    pub fn pow_u64(&self, a: &EtaleElem, e: u64) -> EtaleElem {
        self.pow_big(a, &BigUint::from(e))
    }

    pub fn pow_big(&self, a: &EtaleElem, e: &BigUint) -> EtaleElem {
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

    /// F_p coordinate vector [x-coords | y-coords]; dimension 2 * e * K.
    pub fn to_fp_coords(&self, a: &EtaleElem) -> Vec<u64> {
        let mut out = self.tower.to_fp_coords(&a.x);
        out.extend(self.tower.to_fp_coords(&a.y));
        out
    }

    pub fn from_fp_coords(&self, coords: &[u64]) -> EtaleElem {
        let half = coords.len() / 2;
        EtaleElem {
            x: self.tower.from_fp_coords(&coords[..half]),
            y: self.tower.from_fp_coords(&coords[half..]),
        }
    }

    pub fn fp_dim(&self) -> usize {
        2 * self.tower.abs_degree()
    }

    /// Embed a classical element of F_{q^{2m}} where the tower base is
    /// F_{q^m}: decompose c = x + xi_m y with x, y in F_{q^m}.
    pub fn from_level_classical(&self, c: &FieldElem) -> Result<EtaleElem, Error> {
        let top = &c.field; // F_{q^{2m}}
        let base = &self.tower.base; // F_{q^m}
        assert_eq!(top.k, 2 * base.k, "classical element not at the tower's level");
        let m_abs = base.k;
        let xi_m = embed(&FieldElem::generator(&self.fq2), top)?;
        let xi_conj = xi_m.frobenius(m_abs);
        let denom = xi_m.sub(&xi_conj);
        let y_top = c.sub(&c.frobenius(m_abs)).mul(&denom.inv());
        let x_top = c.sub(&xi_m.mul(&y_top));
        let x = subfield_preimage(&x_top, base)?;
        let y = subfield_preimage(&y_top, base)?;
        Ok(EtaleElem { x: self.tower.from_base(&x), y: self.tower.from_base(&y) })
    }

    /// Inverse of [`from_level_classical`] for phi^d-fixed elements: returns
    /// the classical element of F_{q^{2d}}.
    pub fn to_level_classical(&self, a: &EtaleElem, d: usize) -> Result<FieldElem, Error> {
        let fq2d = build_field(self.p, 2 * self.e * d)?;
        let fqd = build_field(self.p, self.e * d)?;
        let grab = |t: &TowerElem| -> Result<FieldElem, Error> {
            for c in t.coeffs.iter().skip(1) {
                if !c.is_zero() {
                    return Err(Error::Internal(
                        "phi^d-fixed element is not base-constant".into(),
                    ));
                }
            }
            subfield_preimage(&t.coeffs[0], &fqd)
        };
        let x = grab(&a.x)?;
        let y = grab(&a.y)?;
        let xi_d = embed(&FieldElem::generator(&self.fq2), &fq2d)?;
        Ok(embed(&x, &fq2d)?.add(&xi_d.mul(&embed(&y, &fq2d)?)))
    }

    /// For K odd: the canonical isomorphism onto the classical field
    /// F_{q^{2K}}, sending xi to the smallest root of its minimal polynomial.
    pub fn to_classical(&self, a: &EtaleElem) -> Result<FieldElem, Error> {
        if self.k_ext % 2 == 0 {
            return Err(Error::Unsupported(
                "to_classical requires odd extension degree".into(),
            ));
        }
        let f_big = build_field(self.p, 2 * self.e * self.k_ext)?;
        let xi_img = self.classical_xi(&f_big)?;
        // Map the tower coordinates through F_{q^K} -> F_{q^{2K}}.
        let lift = |t: &TowerElem| -> Result<FieldElem, Error> {
            // Tower element = polynomial in the tower variable over the base;
            // embed base, then evaluate at the embedded tower variable root.
            let var_root = self.classical_tower_root(&f_big)?;
            let mut acc = FieldElem::zero(&f_big);
            for c in t.coeffs.iter().rev() {
                acc = acc.mul(&var_root);
                acc = acc.add(&embed(c, &f_big)?);
            }
            Ok(acc)
        };
        Ok(lift(&a.x)?.add(&xi_img.mul(&lift(&a.y)?)))
    }

    pub fn from_classical(&self, c: &FieldElem) -> Result<EtaleElem, Error> {
        if self.k_ext % 2 == 0 {
            return Err(Error::Unsupported(
                "from_classical requires odd extension degree".into(),
            ));
        }
        let f_big = &c.field;
        let k_abs = self.e * self.k_ext;
        assert_eq!(f_big.k, 2 * k_abs);
        let xi_img = self.classical_xi(f_big)?;
        let xi_conj = xi_img.frobenius(k_abs);
        let denom = xi_img.sub(&xi_conj);
        let y_big = c.sub(&c.frobenius(k_abs)).mul(&denom.inv());
        let x_big = c.sub(&xi_img.mul(&y_big));
        // Pull x, y back through the tower coordinates.
        let x = self.classical_to_tower(&x_big)?;
        let y = self.classical_to_tower(&y_big)?;
        Ok(EtaleElem { x, y })
    }

    fn classical_xi(&self, f_big: &Arc<Field>) -> Result<FieldElem, Error> {
        // Roots of xi's minimal polynomial in F_{q^{2K}}: the embedded xi and
        // its conjugate; take the smaller in canonical order.
        let a = embed(&FieldElem::generator(&self.fq2), f_big)?;
        let b = a.frobenius(self.e * self.k_ext);
        Ok(if a <= b { a } else { b })
    }

    fn classical_tower_root(&self, f_big: &Arc<Field>) -> Result<FieldElem, Error> {
        // Smallest root in F_{q^{2K}} of the tower modulus (coefficients in
        // the base field, embedded).
        if self.tower.deg == 1 {
            // Tower is the base itself; variable reduces to 0.
            return Ok(FieldElem::zero(f_big));
        }
        let card = f_big
            .cardinality
            .ok_or_else(|| Error::SizeBound("classical field too large".into()))?;
        if card > (1 << 20) {
            return Err(Error::SizeBound("classical root scan too large".into()));
        }
        for code in 0..card {
            let cand = FieldElem::from_code(f_big, code);
            let mut acc = FieldElem::zero(f_big);
            for c in self.tower.modulus.iter().rev() {
                acc = acc.mul(&cand);
                acc = acc.add(&embed(c, f_big)?);
            }
            if acc.is_zero() {
                return Ok(cand);
            }
        }
        Err(Error::Internal("tower modulus has no root in classical field".into()))
    }

    fn classical_to_tower(&self, x_big: &FieldElem) -> Result<TowerElem, Error> {
        // x_big lies in the embedded F_{q^K}; express it in the tower basis
        // {base-elt * var^i} by solving a small linear scan over the tower.
        // Towers used with to/from_classical are degree 1 in practice.
        if self.tower.deg == 1 {
            let x = subfield_preimage(x_big, &self.tower.base)?;
            return Ok(self.tower.from_base(&x));
        }
        Err(Error::Unsupported(
            "from_classical on a proper tower is not needed".into(),
        ))
    }

    /// For K even: the two component projections F_{q^2} (x) F_{q^K} ->
    /// F_{q^K}, determined by the two roots of xi's minimal polynomial in
    /// F_{q^K}. Returns (root1, root2).
    pub fn split_roots(&self) -> Result<(TowerElem, TowerElem), Error> {
        if self.k_ext % 2 != 0 {
            return Err(Error::Unsupported("algebra is a field for odd K".into()));
        }
        let tw = &self.tower;
        if self.p == 2 {
            // Z^2 + tZ + n0 with t != 0 (separability): Z = tW,
            // W^2 + W = n0 / t^2.
            let t = tw.from_base(&self.t);
            let t_inv = tw.inv(&t);
            let c = tw.mul(&tw.from_base(&self.n0), &tw.mul(&t_inv, &t_inv));
            let w = solve_artin_schreier_square(tw, &c)?;
            let r1 = tw.mul(&t, &w);
            let r2 = tw.add(&r1, &t);
            Ok((r1, r2))
        } else {
            // Quadratic formula with a Tonelli-Shanks square root.
            let t = tw.from_base(&self.t);
            let n0 = tw.from_base(&self.n0);
            let four = tw.from_base(&FieldElem::from_prime(&tw.base, 4));
            let disc = tw.sub(&tw.mul(&t, &t), &tw.mul(&four, &n0));
            let s = tower_sqrt(tw, &disc)?;
            let two_inv = tw.inv(&tw.from_base(&FieldElem::from_prime(&tw.base, 2)));
            let r1 = tw.mul(&tw.add(&t, &s), &two_inv);
            let r2 = tw.mul(&tw.sub(&t, &s), &two_inv);
            Ok((r1, r2))
        }
    }

    /// Component values (x + r1*y, x + r2*y) for split roots (r1, r2).
    pub fn components(&self, a: &EtaleElem, roots: &(TowerElem, TowerElem)) -> (TowerElem, TowerElem) {
        let tw = &self.tower;
        (
            tw.add(&a.x, &tw.mul(&roots.0, &a.y)),
            tw.add(&a.x, &tw.mul(&roots.1, &a.y)),
        )
    }

    /// Reassemble an element from component values.
    pub fn from_components(
        &self,
        c1: &TowerElem,
        c2: &TowerElem,
        roots: &(TowerElem, TowerElem),
    ) -> EtaleElem {
        let tw = &self.tower;
        let denom = tw.inv(&tw.sub(&roots.0, &roots.1));
        let y = tw.mul(&tw.sub(c1, c2), &denom);
        let x = tw.sub(c1, &tw.mul(&roots.0, &y));
        EtaleElem { x, y }
    }
}

/// Solve W^2 + W = c over a characteristic-2 tower by F_2-linear algebra.
fn solve_artin_schreier_square(tw: &Arc<TowerField>, c: &TowerElem) -> Result<TowerElem, Error> {
    let dim = tw.abs_degree();
    // Matrix of w -> w^2 + w on F_2 coordinates.
    let mut cols = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut coords = vec![0u64; dim];
        coords[i] = 1;
        let b = tw.from_fp_coords(&coords);
        let img = tw.add(&tw.mul(&b, &b), &b);
        cols.push(tw.to_fp_coords(&img));
    }
    let rhs = tw.to_fp_coords(c);
    let sol = crate::linalg::fp::solve_from_columns(2, dim, &cols, &rhs)
        .ok_or_else(|| Error::Internal("Artin-Schreier equation unsolvable in tower".into()))?;
    Ok(tw.from_fp_coords(&sol))
}

/// Tonelli-Shanks square root in an odd-characteristic tower field.
fn tower_sqrt(tw: &Arc<TowerField>, a: &TowerElem) -> Result<TowerElem, Error> {
    if tw.is_zero(a) {
        return Ok(tw.zero());
    }
    let card = tw.cardinality();
    let nm1 = &card - 1u32;
    let two = BigUint::from(2u32);
    // card - 1 = 2^v * s with s odd
    let mut v = 0u32;
    let mut s = nm1.clone();
    while (&s & BigUint::from(1u32)) == BigUint::default() {
        s >>= 1;
        v += 1;
    }
    let legendre_exp = &nm1 / &two;
    if tw.pow_big(a, &legendre_exp) != tw.one() {
        return Err(Error::Internal("square root of a non-residue requested".into()));
    }
    // Deterministic non-residue scan.
    let mut z = None;
    for cand in tw.scan_elements().take(4096) {
        if tw.is_zero(&cand) {
            continue;
        }
        if tw.pow_big(&cand, &legendre_exp) != tw.one() {
            z = Some(cand);
            break;
        }
    }
    let mut c = tw.pow_big(&z.ok_or_else(|| Error::Internal("no quadratic non-residue found".into()))?, &s);
    let mut x = tw.pow_big(a, &((&s + 1u32) / &two));
    let mut t = tw.pow_big(a, &s);
    let mut m = v;
    loop {
        if t == tw.one() {
            return Ok(x);
        }
        // find least 0 < i < m with t^(2^i) = 1
        let mut i = 0u32;
        let mut t2 = t.clone();
        while t2 != tw.one() {
            t2 = tw.mul(&t2, &t2);
            i += 1;
            if i == m {
                return Err(Error::Internal("Tonelli-Shanks failed".into()));
            }
        }
        let mut b = c.clone();
        for _ in 0..(m - i - 1) {
            b = tw.mul(&b, &b);
        }
        m = i;
        c = tw.mul(&b, &b);
        t = tw.mul(&t, &c);
        x = tw.mul(&x, &b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::field::enumerate_field;

    fn all_elements(alg: &EtaleAlgebra) -> Vec<EtaleElem> {
        // Enumerable only when the tower is degree 1 over a small base.
        assert_eq!(alg.tower.deg, 1);
        let els = enumerate_field(&alg.tower.base);
        let mut out = Vec::new();
        for x in &els {
            for y in &els {
                out.push(EtaleElem {
                    x: alg.tower.from_base(x),
                    y: alg.tower.from_base(y),
                });
            }
        }
        out
    }

    #[test]
    fn sigma_prime_is_an_involution_and_commutes_with_phi() {
        let alg = EtaleAlgebra::standard(2, 3).unwrap();
        for a in all_elements(&alg) {
            assert_eq!(alg.sigma_prime(&alg.sigma_prime(&a)), a);
            let sp = alg.phi(&alg.sigma_prime(&a));
            let ps = alg.sigma_prime(&alg.phi(&a));
            assert_eq!(sp, ps);
        }
    }

    #[test]
    fn phi_fixes_xi() {
        let alg = EtaleAlgebra::standard(2, 3).unwrap();
        assert_eq!(alg.phi(&alg.xi()), alg.xi());
    }

    #[test]
    fn odd_degree_algebra_is_a_field_with_classical_model() {
        let alg = EtaleAlgebra::standard(2, 3).unwrap();
        let f64 = build_field(2, 6).unwrap();
        for a in all_elements(&alg) {
            if !alg.is_zero(&a) {
                assert!(alg.is_unit(&a));
                let inv = alg.inv(&a).unwrap();
                assert_eq!(alg.mul(&a, &inv), alg.one());
            }
            // to_classical is a ring isomorphism.
            let ca = alg.to_classical(&a).unwrap();
            assert_eq!(alg.from_classical(&ca).unwrap(), a);
            for b in [alg.xi(), alg.one()] {
                let cb = alg.to_classical(&b).unwrap();
                assert_eq!(alg.to_classical(&alg.mul(&a, &b)).unwrap(), ca.mul(&cb));
            }
            // sigma' corresponds to x -> x^{q^K}, phi to x -> x^{q^{K+1}}.
            assert_eq!(alg.to_classical(&alg.sigma_prime(&a)).unwrap(), ca.frobenius(3));
            assert_eq!(alg.to_classical(&alg.phi(&a)).unwrap(), ca.frobenius(4));
        }
        let _ = f64;
    }

    #[test]
    fn even_degree_algebra_splits() {
        for q in [2u64, 3] {
            let alg = EtaleAlgebra::standard(q, 2).unwrap();
            let roots = alg.split_roots().unwrap();
            assert_ne!(roots.0, roots.1);
            // Components are ring homomorphisms; sigma' swaps them.
            for a in all_elements(&alg).into_iter().take(40) {
                for b in [alg.xi(), alg.one()] {
                    let (p1, p2) = alg.components(&alg.mul(&a, &b), &roots);
                    let (a1, a2) = alg.components(&a, &roots);
                    let (b1, b2) = alg.components(&b, &roots);
                    assert_eq!(p1, alg.tower.mul(&a1, &b1));
                    assert_eq!(p2, alg.tower.mul(&a2, &b2));
                }
                let (s1, s2) = alg.components(&alg.sigma_prime(&a), &roots);
                let (a1, a2) = alg.components(&a, &roots);
                assert_eq!((s1, s2), (a2.clone(), a1.clone()));
                assert_eq!(alg.from_components(&a1, &a2, &roots), a);
            }
            // Nonzero zero-divisors exist for even K.
            let zd = alg.from_components(&alg.tower.one(), &alg.tower.zero(), &roots);
            assert!(!alg.is_zero(&zd) && !alg.is_unit(&zd));
        }
    }
}
