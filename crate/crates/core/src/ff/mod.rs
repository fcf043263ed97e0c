//! Exact arithmetic in prime-power finite fields, subfield embeddings,
//! Frobenius/trace/norm maps, the split-quadratic algebra used for Lang
//! solving, and canonical additive characters.
//!
//! Throughout, "level k" means the quadratic pair F_{q^k} inside F_{q^{2k}}
//! with conjugation x -> x^{q^k}; the plus-part at level k is
//! {x in F_{q^{2k}} : x^{q^k} + x = 0}.

pub mod charpsi;
pub mod etale;
pub mod field;
pub mod poly;
pub mod tower;

pub use charpsi::AdditiveCharacter;
pub use etale::{EtaleAlgebra, EtaleElem};
pub use field::{
    build_field, embed, enumerate_field, norm_to, subfield_preimage, trace_to, Field, FieldElem,
    FieldElemJson,
};
pub use tower::{TowerField, TowerElem};

use std::sync::Arc;

use once_cell::sync::OnceCell;

use crate::error::Error;

/// q = p^e together with the fields of a fixed level: F_{q^k} and F_{q^{2k}}.
pub struct Level {
    pub p: u64,
    pub e: usize,
    pub q: u64,
    pub k: usize,
    /// F_{q^k}
    pub mid: Arc<Field>,
    /// F_{q^{2k}}
    pub top: Arc<Field>,
    plus_cell: OnceCell<Vec<FieldElem>>,
    memb_cell: OnceCell<crate::linalg::LinearSystem>,
}

impl Level {
    pub fn new(q: u64, k: usize) -> Result<Level, Error> {
        let (p, e) = split_prime_power(q)
            .ok_or_else(|| Error::Malformed(format!("{q} is not a prime power")))?;
        let mid = build_field(p, e * k)?;
        let top = build_field(p, 2 * e * k)?;
        Ok(Level { p, e, q, k, mid, top, plus_cell: OnceCell::new(), memb_cell: OnceCell::new() })
    }

    /// Conjugation x -> x^{q^k} on F_{q^{2k}}.
    pub fn conj(&self, x: &FieldElem) -> FieldElem {
        x.frobenius(self.e * self.k)
    }

    /// x -> x^q.
    pub fn q_power(&self, x: &FieldElem) -> FieldElem {
        x.frobenius(self.e)
    }

    /// The plus-part {a : a^{q^k} + a = 0}, in canonical order; size q^k.
    pub fn plus_part(&self) -> Vec<FieldElem> {
        self.plus_cell
            .get_or_init(|| {
                let mut out: Vec<FieldElem> = enumerate_field(&self.top)
                    .into_iter()
                    .filter(|a| self.conj(a).add(a).is_zero())
                    .collect();
                out.sort();
                assert_eq!(out.len() as u64, pow_u64(self.q, self.k), "plus-part size");
                out
            })
            .clone()
    }

    fn membership_system(&self) -> &crate::linalg::LinearSystem {
        self.memb_cell.get_or_init(|| {
            // The map a -> a^{q^k} + a is F_p-linear with kernel the plus-part.
            let dim = self.top.k;
            let mut cols = Vec::with_capacity(dim);
            for i in 0..dim {
                let mut coeffs = vec![0u64; dim];
                coeffs[i] = 1;
                let b = FieldElem::from_coeffs(&self.top, coeffs);
                cols.push(self.conj(&b).add(&b).coeffs);
            }
            crate::linalg::LinearSystem::from_columns(self.top.p, &cols, dim)
        })
    }

    /// Canonical solution of a^{q^k} + a = c (smallest in element order), if any.
    pub fn solve_plus_membership(&self, c: &FieldElem) -> Option<FieldElem> {
        let sol = self.membership_system().solve(&c.coeffs)?;
        let part = FieldElem::from_coeffs(&self.top, sol);
        let mut best = part.clone();
        for z in self.plus_part().iter() {
            let cand = part.add(z);
            if cand < best {
                best = cand;
            }
        }
        Some(best)
    }

    /// Generator of mu_{q^k+1} = {x : x^{q^k+1} = 1}, the smallest in
    /// canonical order among generators, together with the group order.
    pub fn mu_generator(&self) -> (FieldElem, u64) {
        let order = pow_u64(self.q, self.k) + 1;
        let factors = crate::cyclo::prime_factors(order);
        for code in 2..self.top.card_u64() {
            let x = FieldElem::from_code(&self.top, code);
            if !x.pow_u64(order).is_one() {
                continue;
            }
            if factors.iter().all(|&f| !x.pow_u64(order / f).is_one()) {
                return (x, order);
            }
        }
        unreachable!("mu_{{q^k+1}} has a generator");
    }

    /// All elements of mu_{q^k+1} in canonical order.
    pub fn mu_elements(&self) -> Vec<FieldElem> {
        let (g, order) = self.mu_generator();
        let mut out = Vec::with_capacity(order as usize);
        let mut cur = FieldElem::one(&self.top);
        for _ in 0..order {
            out.push(cur.clone());
            cur = cur.mul(&g);
        }
        out.sort();
        out
    }
}

pub fn split_prime_power(q: u64) -> Option<(u64, usize)> {
    for p in 2..=q {
        if q % p == 0 {
            // p is the least divisor hence prime
            let mut e = 0;
            let mut m = q;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            if m == 1 {
                return Some((p, e));
            }
            return None;
        }
    }
    None
}

pub fn pow_u64(base: u64, e: usize) -> u64 {
    let mut acc = 1u64;
    for _ in 0..e {
        acc = acc.checked_mul(base).expect("u64 overflow in pow");
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plus_part_q2_level1_is_f2() {
        let lv = Level::new(2, 1).unwrap();
        let plus = lv.plus_part();
        // In characteristic 2 the plus-part at level 1 is F_q itself.
        assert_eq!(plus.len(), 2);
        assert!(plus[0].is_zero());
        assert!(plus[1].is_one());
    }

    #[test]
    fn plus_part_is_closed_under_addition() {
        for q in [2u64, 3] {
            let lv = Level::new(q, 1).unwrap();
            let plus = lv.plus_part();
            for a in &plus {
                for b in &plus {
                    let s = a.add(b);
                    assert!(plus.contains(&s));
                }
            }
        }
    }

    #[test]
    fn mu_subgroup_orders() {
        let lv = Level::new(2, 3).unwrap();
        let (g, order) = lv.mu_generator();
        assert_eq!(order, 9);
        assert!(g.pow_u64(9).is_one());
        assert!(!g.pow_u64(3).is_one());
        let lv1 = Level::new(2, 1).unwrap();
        assert_eq!(lv1.mu_generator().1, 3);
    }

    #[test]
    fn membership_solver_finds_minimal_solutions() {
        let lv = Level::new(2, 3).unwrap();
        for a in enumerate_field(&lv.top).iter().take(32) {
            let c = lv.conj(a).add(a);
            let sol = lv.solve_plus_membership(&c).unwrap();
            assert_eq!(lv.conj(&sol).add(&sol), c);
        }
        let g = FieldElem::generator(&lv.top);
        let c = lv.conj(&g).add(&g);
        assert!(lv.solve_plus_membership(&c).is_some());
    }
}
