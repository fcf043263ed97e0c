//! The finite groups H_n(q^k), U_n(q^k), HU_n(q^k) = H x| U, their centers,
//! the group Frobenius F, and reduction into ZU.
//!
//! Elements carry their hermitian space. Internal coordinates are classical:
//! everything lives in F_{q^{2k}}, and for odd k the Frobenius F acts as the
//! q^{k+1}-power map on all coordinates (vector entries, central scalar,
//! matrix entries); on the unitary part this agrees with g -> (t(g^tau))^{-1}
//! with tau the entrywise q-power, which is tested rather than assumed.

pub mod fin;

use std::sync::Arc;

use crate::error::Error;
use crate::ff::{FieldElem, Level};
use crate::herm::HermitianSpace;
use crate::linalg::{FMat, LinearSystem};

/// Element of HU_n(q^k): Heisenberg part (v, a) and unitary part u.
#[derive(Clone)]
pub struct HUElem {
    pub space: Arc<HermitianSpace>,
    pub v: Vec<FieldElem>,
    pub a: FieldElem,
    pub u: FMat,
}

impl PartialEq for HUElem {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v && self.a == other.a && self.u == other.u
    }
}
impl Eq for HUElem {}

impl std::hash::Hash for HUElem {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for x in &self.v {
            x.hash(state);
        }
        self.a.hash(state);
        self.u.hash(state);
    }
}

impl std::fmt::Debug for HUElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "HU(v={:?}, a={}, u={:?})",
            self.v.iter().map(|x| x.code()).collect::<Vec<_>>(),
            self.a.code(),
            self.u
        )
    }
}

impl HUElem {
    pub fn identity(space: &Arc<HermitianSpace>) -> HUElem {
        let f = space.field();
        HUElem {
            space: space.clone(),
            v: vec![FieldElem::zero(&f); space.n],
            a: FieldElem::zero(&f),
            u: FMat::identity(&f, space.n),
        }
    }

    pub fn central(space: &Arc<HermitianSpace>, a: FieldElem) -> HUElem {
        let mut x = Self::identity(space);
        x.a = a;
        x
    }

    pub fn from_unitary(space: &Arc<HermitianSpace>, u: FMat) -> HUElem {
        let mut x = Self::identity(space);
        x.u = u;
        x
    }

    pub fn from_h(space: &Arc<HermitianSpace>, v: Vec<FieldElem>, a: FieldElem) -> HUElem {
        let f = space.field();
        HUElem { space: space.clone(), v, a, u: FMat::identity(&f, space.n) }
    }

    pub fn level(&self) -> Arc<Level> {
        self.space.level.clone()
    }

    /// Membership: a + conj(a) = h(v, v) and the unitary condition on u.
    pub fn is_valid(&self) -> bool {
        let h = self.space.form(&self.v, &self.v);
        if self.space.conj(&self.a).add(&self.a) != h {
            return false;
        }
        let e = self.space.conj_exp();
        self.u.conj_transpose(e).matmul(&self.space.gram).matmul(&self.u) == self.space.gram
    }

    pub fn is_identity(&self) -> bool {
        self.v.iter().all(|x| x.is_zero()) && self.a.is_zero() && self.u.is_identity()
    }

    /// (v,a,u)(v',a',u') = (v + u v', a + a' + h(v, u v'), u u').
    pub fn mul(&self, other: &HUElem) -> HUElem {
        assert!(same_space(&self.space, &other.space), "space mismatch in mul");
        let uv = self.u.apply(&other.v);
        let v: Vec<FieldElem> = self.v.iter().zip(uv.iter()).map(|(x, y)| x.add(y)).collect();
        let a = self.a.add(&other.a).add(&self.space.form(&self.v, &uv));
        let u = self.u.matmul(&other.u);
        HUElem { space: self.space.clone(), v, a, u }
    }

    pub fn inv(&self) -> HUElem {
        let u_inv = self.u.inverse().expect("unitary matrix is invertible");
        let minus_v: Vec<FieldElem> = self.v.iter().map(|x| x.neg()).collect();
        let v = u_inv.apply(&minus_v);
        let a = self.space.conj(&self.a);
        HUElem { space: self.space.clone(), v, a, u: u_inv }
    }

    pub fn conjugate_by(&self, x: &HUElem) -> HUElem {
        x.mul(self).mul(&x.inv())
    }

    /// The group Frobenius: every coordinate to the q^{k+1} power (odd k).
    pub fn frobenius_f(&self) -> HUElem {
        let lv = self.level();
        assert!(lv.k % 2 == 1, "group Frobenius requires odd level");
        self.coordinate_power(lv.e * (lv.k + 1))
    }

    pub fn frobenius_f_pow(&self, i: usize) -> HUElem {
        let lv = self.level();
        assert!(lv.k % 2 == 1, "group Frobenius requires odd level");
        self.coordinate_power(lv.e * (lv.k + 1) * (i % lv.k))
    }

    fn coordinate_power(&self, e: usize) -> HUElem {
        HUElem {
            space: self.space.clone(),
            v: self.v.iter().map(|x| x.frobenius(e)).collect(),
            a: self.a.frobenius(e),
            u: self.u.frobenius(e),
        }
    }

    /// Twisted conjugation x * g * F^i(x)^{-1} (g = self).
    pub fn twisted_conjugate(&self, x: &HUElem, i: usize) -> HUElem {
        x.mul(self).mul(&x.frobenius_f_pow(i).inv())
    }

    /// Canonical sort/hash key.
    pub fn key(&self) -> Vec<u64> {
        let mut k: Vec<u64> = self.v.iter().map(|x| x.code()).collect();
        k.push(self.a.code());
        k.extend(self.u.data.iter().map(|x| x.code()));
        k
    }

    /// N(g) = dim ker(u - 1) over F_{q^{2k}}.
    pub fn fixed_space_dim(&self) -> usize {
        fixed_space_dim(&self.u)
    }

    pub fn to_json(&self, fr_exp: usize) -> serde_json::Value {
        serde_json::json!({
            "v": self.v.iter().map(|x| serde_json::to_value(x.to_json()).unwrap()).collect::<Vec<_>>(),
            "a": serde_json::to_value(self.a.to_json()).unwrap(),
            "u": (0..self.space.n).map(|i| {
                (0..self.space.n)
                    .map(|j| serde_json::to_value(self.u[(i, j)].to_json()).unwrap())
                    .collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
            "frob_exp": fr_exp,
        })
    }

    pub fn from_json(
        space: &Arc<HermitianSpace>,
        val: &serde_json::Value,
    ) -> Result<(HUElem, usize), Error> {
        let f = space.field();
        let parse_fe = |v: &serde_json::Value| -> Result<FieldElem, Error> {
            let j: crate::ff::FieldElemJson = serde_json::from_value(v.clone())
                .map_err(|e| Error::Malformed(format!("bad field element: {e}")))?;
            let x = FieldElem::from_json(&j)?;
            if x.field.k != f.k || x.field.p != f.p {
                return Err(Error::Malformed("field descriptor does not match level".into()));
            }
            Ok(x)
        };
        let v_arr = val
            .get("v")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Malformed("missing v".into()))?;
        if v_arr.len() != space.n {
            return Err(Error::Malformed(format!(
                "v has length {} != n = {}",
                v_arr.len(),
                space.n
            )));
        }
        let v: Result<Vec<FieldElem>, Error> = v_arr.iter().map(parse_fe).collect();
        let a = parse_fe(val.get("a").ok_or_else(|| Error::Malformed("missing a".into()))?)?;
        let u_arr = val
            .get("u")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Malformed("missing u".into()))?;
        if u_arr.len() != space.n {
            return Err(Error::Malformed("u has wrong row count".into()));
        }
        let mut u = FMat::zeros(&f, space.n, space.n);
        for (i, row) in u_arr.iter().enumerate() {
            let row = row
                .as_array()
                .ok_or_else(|| Error::Malformed("u row not an array".into()))?;
            if row.len() != space.n {
                return Err(Error::Malformed("u has wrong column count".into()));
            }
            for (j, cell) in row.iter().enumerate() {
                u[(i, j)] = parse_fe(cell)?;
            }
        }
        let fr_exp = val.get("frob_exp").and_then(|x| x.as_u64()).unwrap_or(0) as usize;
        let elem = HUElem { space: space.clone(), v: v?, a, u };
        if !elem.is_valid() {
            return Err(Error::Malformed("element fails membership invariants".into()));
        }
        Ok((elem, fr_exp))
    }
}

pub fn same_space(a: &Arc<HermitianSpace>, b: &Arc<HermitianSpace>) -> bool {
    Arc::ptr_eq(a, b)
        || (a.n == b.n && a.level.q == b.level.q && a.level.k == b.level.k && a.gram == b.gram)
}

pub fn fixed_space_dim(u: &FMat) -> usize {
    let f = u.field();
    let n = u.rows;
    let diff = u.sub(&FMat::identity(&f, n));
    n - diff.rank()
}

/// Element of the extended group HU_n(q^m) x| Gal(F_{q^{2m}}/F_{q^2}):
/// a pair (h, Fr_{q^2}^j). Fr_{q^2} acts on the group as F^2; the generator
/// sigma = Fr_{q^2}^{(m+1)/2} acts as F.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExtElem {
    pub h: HUElem,
    /// Frobenius exponent j modulo m.
    pub j: usize,
}

impl std::fmt::Debug for ExtElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:?}, Fr^{})", self.h, self.j)
    }
}

/// sigma^i as a Frobenius exponent: i * (m+1)/2 mod m.
pub fn fr_exp_of_sigma(i: usize, m: usize) -> usize {
    (i * ((m + 1) / 2)) % m
}

/// Fr^j as a sigma exponent: 2j mod m.
pub fn sigma_exp_of_fr(j: usize, m: usize) -> usize {
    (2 * j) % m
}

impl ExtElem {
    pub fn new(h: HUElem, j: usize) -> ExtElem {
        let m = h.level().k;
        ExtElem { h, j: j % m }
    }

    pub fn from_sigma(h: HUElem, sigma_i: usize) -> ExtElem {
        let m = h.level().k;
        ExtElem::new(h, fr_exp_of_sigma(sigma_i % m, m))
    }

    pub fn sigma_exp(&self) -> usize {
        sigma_exp_of_fr(self.j, self.h.level().k)
    }

    pub fn identity(space: &Arc<HermitianSpace>) -> ExtElem {
        ExtElem { h: HUElem::identity(space), j: 0 }
    }

    /// (h, Fr^j)(h', Fr^j') = (h * F^{2j}(h'), Fr^{j+j'}).
    pub fn mul(&self, other: &ExtElem) -> ExtElem {
        let m = self.h.level().k;
        let twisted = other.h.frobenius_f_pow((2 * self.j) % m);
        ExtElem { h: self.h.mul(&twisted), j: (self.j + other.j) % m }
    }

    pub fn inv(&self) -> ExtElem {
        let m = self.h.level().k;
        let jinv = (m - self.j) % m;
        // (h, j)^{-1} = (F^{2 jinv}(h^{-1}), jinv)
        let h = self.h.inv().frobenius_f_pow((2 * jinv) % m);
        ExtElem { h, j: jinv }
    }

    pub fn conjugate_by(&self, x: &ExtElem) -> ExtElem {
        x.mul(self).mul(&x.inv())
    }

    pub fn key(&self) -> Vec<u64> {
        let mut k = self.h.key();
        k.push(self.j as u64);
        k
    }
}

/// Result of conjugating an element into Z * U when possible.
#[derive(Clone, Debug)]
pub struct ZUReduction {
    pub reducible: bool,
    /// Central value b0 (in the plus-part) when reducible.
    pub b0: Option<FieldElem>,
    /// The unitary part (unchanged by the reduction).
    pub u: FMat,
    /// N(u) = dim ker(u - 1) over F_{q^{2k}}.
    pub fixed_dim: usize,
}

/// Conjugate x = ((w, b), u) into ZU by a Heisenberg element, when possible:
/// solve (u - 1) x0 = w. Failure (w outside the image) is a valid result.
pub fn reduce_to_zu(x: &HUElem) -> ZUReduction {
    let f = x.space.field();
    let n = x.space.n;
    let diff = x.u.sub(&FMat::identity(&f, n));
    let fixed_dim = n - diff.rank();
    match diff.solve(&x.v) {
        None => ZUReduction { reducible: false, b0: None, u: x.u.clone(), fixed_dim },
        Some(x0) => {
            let b0 = reduce_with_solution(x, &x0, 0);
            ZUReduction { reducible: true, b0: Some(b0), u: x.u.clone(), fixed_dim }
        }
    }
}

/// Conjugate (x, sigma^i) into ZU x| Gamma: solve (u o F^i - 1) x0 = w over
/// F_p (the twisted equation is only semilinear over the field).
pub fn reduce_to_zu_twisted(x: &HUElem, sigma_i: usize) -> ZUReduction {
    let lv = x.level();
    let m = lv.k;
    let i = sigma_i % m;
    if i == 0 {
        return reduce_to_zu(x);
    }
    let f = x.space.field();
    let n = x.space.n;
    let fixed_dim = x.fixed_space_dim();
    let dim = n * f.k;
    let frob_e = lv.e * (lv.k + 1) * i;
    let mut cols = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut coords = vec![0u64; dim];
        coords[c] = 1;
        let vec_in = unflatten(&f, n, &coords);
        let fr: Vec<FieldElem> = vec_in.iter().map(|t| t.frobenius(frob_e)).collect();
        let out = x.u.apply(&fr);
        let img: Vec<FieldElem> = out.iter().zip(vec_in.iter()).map(|(a, b)| a.sub(b)).collect();
        cols.push(flatten(&img));
    }
    let sys = LinearSystem::from_columns(f.p, &cols, dim);
    match sys.solve(&flatten(&x.v)) {
        None => ZUReduction { reducible: false, b0: None, u: x.u.clone(), fixed_dim },
        Some(sol) => {
            let x0 = unflatten(&f, n, &sol);
            let b0 = reduce_with_solution(x, &x0, i);
            ZUReduction { reducible: true, b0: Some(b0), u: x.u.clone(), fixed_dim }
        }
    }
}

/// Central part of s(x0) * (x, sigma^i) * s(x0)^{-1}, where s(x0) is the
/// canonical Heisenberg section over x0.
pub fn reduce_with_solution(x: &HUElem, x0: &[FieldElem], sigma_i: usize) -> FieldElem {
    let lv = x.level();
    let a0 = lv
        .solve_plus_membership(&x.space.form(x0, x0))
        .expect("membership equation solvable");
    let y = HUElem::from_h(&x.space, x0.to_vec(), a0);
    let conj = y.mul(x).mul(&y.frobenius_f_pow(sigma_i).inv());
    assert!(
        conj.v.iter().all(|t| t.is_zero()),
        "reduction solution does not kill the vector part"
    );
    assert_eq!(conj.u, x.u, "unitary part changed under Heisenberg conjugation");
    conj.a
}

pub fn flatten(v: &[FieldElem]) -> Vec<u64> {
    let mut out = Vec::with_capacity(v.len() * v[0].field.k);
    for x in v {
        out.extend_from_slice(&x.coeffs);
    }
    out
}

pub fn unflatten(f: &Arc<crate::ff::Field>, n: usize, coords: &[u64]) -> Vec<FieldElem> {
    let k = f.k;
    (0..n)
        .map(|i| FieldElem::from_coeffs(f, coords[i * k..(i + 1) * k].to_vec()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herm::standard_space;
    use rand::SeedableRng;

    fn space(q: u64, n: usize, k: usize) -> Arc<HermitianSpace> {
        Arc::new(standard_space(q, n, k).unwrap())
    }

    #[test]
    fn multiplication_law_central_part() {
        // ((v,a),1)((v',a'),1) has central part a + a' + h(v, v').
        let s = space(2, 1, 3);
        let g = fin::enumerate_h(&s);
        for x in g.iter().take(20) {
            for y in g.iter().take(20) {
                let prod = x.mul(y);
                let expected = x.a.add(&y.a).add(&s.form(&x.v, &y.v));
                assert_eq!(prod.a, expected);
                assert!(prod.is_valid());
            }
        }
    }

    #[test]
    fn inverses_and_centrality() {
        let s = space(2, 2, 1);
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        let grp = fin::HUGroup::new(&s).unwrap();
        for _ in 0..100 {
            let x = grp.sample(&mut rng);
            assert!(x.is_valid());
            assert!(x.mul(&x.inv()).is_identity());
        }
        let lv = s.level.clone();
        for z in lv.plus_part() {
            let c = HUElem::central(&s, z);
            for _ in 0..20 {
                let x = grp.sample(&mut rng);
                assert_eq!(c.mul(&x), x.mul(&c));
            }
        }
    }

    #[test]
    fn frobenius_is_an_automorphism_with_order_m() {
        let s = space(2, 1, 3);
        let els = fin::enumerate_hu(&s).unwrap();
        for x in els.iter().step_by(17) {
            assert_eq!(x.frobenius_f_pow(3), *x, "F^m = id on HU_1(8)");
            assert!(x.frobenius_f().is_valid());
            for y in els.iter().step_by(131) {
                assert_eq!(x.mul(y).frobenius_f(), x.frobenius_f().mul(&y.frobenius_f()));
            }
        }
        assert!(HUElem::identity(&s).frobenius_f().is_identity());
    }

    #[test]
    fn frobenius_on_unitary_part_is_twisted_transpose_inverse() {
        // Coordinatewise q^{m+1} power equals (t g^(q))^{-1} on U, via the
        // unitary condition. Exhaustive on U_1(8), sampled on U_2(8).
        let s1 = space(2, 1, 3);
        let e = s1.level.e;
        for u in fin::enumerate_u(&s1).unwrap() {
            let lhs = u.frobenius(e * 4);
            let rhs = u.frobenius(e).transpose().inverse().unwrap();
            assert_eq!(lhs, rhs);
        }
        let s2 = space(2, 2, 3);
        let grp = fin::UGroup::new(&s2).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
        for _ in 0..200 {
            let u = grp.sample(&mut rng);
            let lhs = u.frobenius(e * 4);
            let rhs = u.frobenius(e).transpose().inverse().unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn ext_elem_sigma_acts_as_f() {
        let s = space(2, 1, 3);
        let grp = fin::HUGroup::new(&s).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        let m = 3;
        let sigma = ExtElem::from_sigma(HUElem::identity(&s), 1);
        assert_eq!(sigma.j, fr_exp_of_sigma(1, m));
        for _ in 0..50 {
            let h = grp.sample(&mut rng);
            let x = ExtElem::new(h.clone(), 0);
            let conj = x.conjugate_by(&sigma);
            assert_eq!(conj.j, 0);
            assert_eq!(conj.h, h.frobenius_f());
        }
        for i in 0..m {
            assert_eq!(sigma_exp_of_fr(fr_exp_of_sigma(i, m), m), i % m);
        }
    }

    #[test]
    fn zu_reduction_examples() {
        let s = space(2, 1, 3);
        let lv = s.level.clone();
        for z in lv.plus_part() {
            let x = HUElem::central(&s, z.clone());
            let r = reduce_to_zu(&x);
            assert!(r.reducible);
            assert_eq!(r.b0.unwrap(), z);
            assert_eq!(r.fixed_dim, 1);
        }
        // (v, a, 1) with v != 0 is not reducible
        for x in fin::enumerate_h(&s) {
            let r = reduce_to_zu(&x);
            assert_eq!(r.reducible, x.v.iter().all(|t| t.is_zero()));
        }
    }

    #[test]
    fn zu_reduction_is_conjugation_invariant_and_solution_independent() {
        let s = space(2, 1, 3);
        let els = fin::enumerate_hu(&s).unwrap();
        let grp = fin::HUGroup::new(&s).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        for x in els.iter().step_by(37) {
            let r = reduce_to_zu(x);
            for _ in 0..5 {
                let y = grp.sample(&mut rng);
                let r2 = reduce_to_zu(&x.conjugate_by(&y));
                assert_eq!(r.reducible, r2.reducible);
                assert_eq!(r.fixed_dim, r2.fixed_dim);
                if r.reducible {
                    assert_eq!(r.b0, r2.b0);
                }
            }
            // independence of the particular solution: offset by kernel vectors
            if r.reducible && !x.u.is_identity() {
                let f = s.field();
                let diff = x.u.sub(&FMat::identity(&f, 1));
                let x0 = diff.solve(&x.v).unwrap();
                for kb in diff.kernel_basis() {
                    let alt: Vec<FieldElem> =
                        x0.iter().zip(kb.iter()).map(|(a, b)| a.add(b)).collect();
                    let b0 = reduce_with_solution(x, &alt, 0);
                    assert_eq!(Some(b0), r.b0);
                }
            }
        }
    }
}
