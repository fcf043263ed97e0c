//! Canonical additive characters psi of the plus-part.
//!
//! psi_beta(a) = zeta_p^(Tr_{F_{q^{2k}}/F_p}(beta * a)), restricted to
//! {a : a^{q^k} + a = 0}. The twist beta is a parameter: the default is the
//! smallest beta (canonical element order) making psi nontrivial on the
//! plus-part, and alternative twists are selectable by index so verification
//! runs can range over several psi.

use std::sync::Arc;

use super::field::FieldElem;
use super::Level;
use crate::cyclo::CycloScalar;
use crate::error::Error;

#[derive(Clone)]
pub struct AdditiveCharacter {
    pub level: Arc<Level>,
    pub beta: FieldElem,
}

impl AdditiveCharacter {
    /// The `twist_index`-th valid twist in canonical order (0 = default).
    pub fn canonical(level: &Arc<Level>, twist_index: usize) -> Result<AdditiveCharacter, Error> {
        let plus = level.plus_part();
        let mut seen = 0;
        let mut fingerprints: Vec<Vec<u64>> = Vec::new();
        for code in 0..level.top.card_u64() {
            let beta = FieldElem::from_code(&level.top, code);
            let cand = AdditiveCharacter { level: level.clone(), beta };
            let fp: Vec<u64> = plus.iter().map(|a| cand.eval_exponent(a)).collect();
            if fp.iter().all(|&x| x == 0) {
                continue;
            }
            // Twists are counted by their restriction to the plus-part;
            // different beta can restrict to the same character there.
            if fingerprints.contains(&fp) {
                continue;
            }
            fingerprints.push(fp);
            if seen == twist_index {
                return Ok(cand);
            }
            seen += 1;
        }
        Err(Error::Internal("no nontrivial additive character exists".into()))
    }

    /// Derived level-m character psi_m = psi o Tr: the twist is the embedded
    /// beta, by trace transitivity.
    pub fn lift_to_level(&self, target: &Arc<Level>) -> Result<AdditiveCharacter, Error> {
        assert_eq!(target.q, self.level.q);
        assert!(target.k % self.level.k == 0, "level does not divide target level");
        let beta = super::field::embed(&self.beta, &target.top)?;
        Ok(AdditiveCharacter { level: target.clone(), beta })
    }

    /// psi^{-1}, i.e. a -> psi(-a); the twist negates.
    pub fn inverse(&self) -> AdditiveCharacter {
        AdditiveCharacter { level: self.level.clone(), beta: self.beta.neg() }
    }

    /// Exponent Tr_{F/F_p}(beta * a) in 0..p.
    pub fn eval_exponent(&self, a: &FieldElem) -> u64 {
        let x = self.beta.mul(a);
        // absolute trace to F_p
        let mut acc = FieldElem::zero(&x.field);
        let mut cur = x;
        for _ in 0..self.level.top.k {
            acc = acc.add(&cur);
            cur = cur.frobenius(1);
        }
        debug_assert!(acc.coeffs.iter().skip(1).all(|&c| c == 0), "trace not in prime field");
        acc.coeffs[0]
    }

    /// psi(a) as a scalar in Q(zeta_p).
    pub fn eval(&self, a: &FieldElem) -> CycloScalar {
        CycloScalar::root_of_unity(self.level.p, self.eval_exponent(a))
    }

    pub fn is_nontrivial_on_plus_part(&self) -> bool {
        self.level.plus_part().iter().any(|a| self.eval_exponent(a) != 0)
    }

    /// Number of distinct nontrivial characters of the plus-part (= q^k - 1).
    /// For q = 2 at level 1 there is exactly one, so twist grids degenerate.
    pub fn twist_count(level: &Arc<Level>) -> u64 {
        super::pow_u64(level.q, level.k) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_of_zero_is_one_and_some_value_is_not() {
        for q in [2u64, 3] {
            let lv = Arc::new(Level::new(q, 1).unwrap());
            let psi = AdditiveCharacter::canonical(&lv, 0).unwrap();
            assert!(psi.eval(&FieldElem::zero(&lv.top)).equals_integer(1));
            assert!(psi.is_nontrivial_on_plus_part());
        }
    }

    #[test]
    fn psi_is_additive_and_sums_to_zero_on_plus_part() {
        for q in [2u64, 3] {
            let lv = Arc::new(Level::new(q, 1).unwrap());
            let n_twists = AdditiveCharacter::twist_count(&lv).min(2) as usize;
            for idx in 0..n_twists {
                let psi = AdditiveCharacter::canonical(&lv, idx).unwrap();
                let plus = lv.plus_part();
                let mut total = CycloScalar::zero();
                for a in &plus {
                    total = total.add(&psi.eval(a));
                    for b in &plus {
                        assert_eq!(psi.eval(&a.add(b)), psi.eval(a).mul(&psi.eval(b)));
                    }
                }
                assert!(total.is_zero(), "orthogonality of a nontrivial character");
            }
        }
    }

    #[test]
    fn lifted_character_agrees_with_trace_composition() {
        let lv1 = Arc::new(Level::new(2, 1).unwrap());
        let lv3 = Arc::new(Level::new(2, 3).unwrap());
        let psi = AdditiveCharacter::canonical(&lv1, 0).unwrap();
        let psi3 = psi.lift_to_level(&lv3).unwrap();
        let f4 = &lv1.top;
        for a in lv3.plus_part() {
            let tr = crate::ff::trace_to(&a, f4).unwrap();
            assert_eq!(psi3.eval(&a), psi.eval(&tr));
        }
    }

    #[test]
    fn distinct_twists_differ() {
        let lv = Arc::new(Level::new(3, 1).unwrap());
        let psi0 = AdditiveCharacter::canonical(&lv, 0).unwrap();
        let psi1 = AdditiveCharacter::canonical(&lv, 1).unwrap();
        assert_ne!(psi0.beta, psi1.beta);
        let plus = lv.plus_part();
        assert!(plus.iter().any(|a| psi0.eval(a) != psi1.eval(a)));
    }
}
