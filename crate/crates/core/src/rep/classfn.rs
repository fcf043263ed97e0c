//! Class-function algebra: conjugacy classes by orbit closure, induction,
//! restriction, inflation, pointwise products, inner products, and tensor
//! induction. Carriers are explicit element lists with multiplication and
//! inverse supplied as closures, so the same machinery serves plain groups,
//! Galois extensions, products, and quotients.

use std::collections::HashMap;
use std::hash::Hash;

use num_rational::BigRational;

use crate::cyclo::CycloScalar;
use crate::error::Error;

/// Conjugacy classes of a finite group, or twisted classes of a coset.
pub struct Classes<E> {
    pub reps: Vec<E>,
    pub sizes: Vec<usize>,
    pub index: HashMap<E, usize>,
}

impl<E: Clone + Eq + Hash> Classes<E> {
    pub fn class_of(&self, x: &E) -> usize {
        *self.index.get(x).expect("element outside the carrier")
    }
}

/// Orbits of `carrier` under x -> action(g, x) for g in a generating set.
/// The generators must generate the acting group; `verify_cover` asserts the
/// orbits partition the carrier (which they always do) and the caller is
/// responsible for generation, checked where it matters by closure tests.
pub fn orbits_under<E, A>(carrier: &[E], generators: &[E], action: A) -> Classes<E>
where
    E: Clone + Eq + Hash,
    A: Fn(&E, &E) -> E,
{
    let mut index: HashMap<E, usize> = HashMap::with_capacity(carrier.len());
    let mut reps = Vec::new();
    let mut sizes = Vec::new();
    for start in carrier {
        if index.contains_key(start) {
            continue;
        }
        let cid = reps.len();
        let mut queue = vec![start.clone()];
        index.insert(start.clone(), cid);
        let mut size = 0usize;
        while let Some(x) = queue.pop() {
            size += 1;
            for g in generators {
                let y = action(g, &x);
                if !index.contains_key(&y) {
                    index.insert(y.clone(), cid);
                    queue.push(y);
                }
            }
        }
        reps.push(start.clone());
        sizes.push(size);
    }
    Classes { reps, sizes, index }
}

/// Plain conjugacy classes from generators (generators and their inverses
/// are both applied).
pub fn conjugacy_classes<E, FM, FI>(
    carrier: &[E],
    generators: &[E],
    mul: FM,
    inv: FI,
) -> Classes<E>
where
    E: Clone + Eq + Hash,
    FM: Fn(&E, &E) -> E,
    FI: Fn(&E) -> E,
{
    let mut gens: Vec<E> = generators.to_vec();
    gens.extend(generators.iter().map(|g| inv(g)));
    orbits_under(carrier, &gens, |g, x| mul(&mul(g, x), &inv(g)))
}

/// A map from carrier elements to exact scalars, constant on classes by
/// construction when built through `from_classes`.
#[derive(Clone)]
pub struct ClassFunction<E: Clone + Eq + Hash> {
    pub values: HashMap<E, CycloScalar>,
}

impl<E: Clone + Eq + Hash> ClassFunction<E> {
    pub fn from_fn(carrier: &[E], f: impl Fn(&E) -> CycloScalar) -> Self {
        let values = carrier.iter().map(|x| (x.clone(), f(x))).collect();
        ClassFunction { values }
    }

    pub fn from_classes(
        carrier: &[E],
        classes: &Classes<E>,
        class_values: &[CycloScalar],
    ) -> Self {
        let values = carrier
            .iter()
            .map(|x| (x.clone(), class_values[classes.class_of(x)].clone()))
            .collect();
        ClassFunction { values }
    }

    pub fn eval(&self, x: &E) -> &CycloScalar {
        self.values.get(x).expect("element outside the carrier")
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let values = self
            .values
            .iter()
            .map(|(k, v)| (k.clone(), v.mul(other.eval(k))))
            .collect();
        ClassFunction { values }
    }

    /// Restriction to a sub-carrier.
    pub fn restrict(&self, sub: &[E]) -> Self {
        let values = sub.iter().map(|x| (x.clone(), self.eval(x).clone())).collect();
        ClassFunction { values }
    }

    /// Inflation through a projection onto a quotient carrier.
    pub fn inflate<Q: Clone + Eq + Hash>(
        quotient_chi: &ClassFunction<Q>,
        carrier: &[E],
        proj: impl Fn(&E) -> Q,
    ) -> Self {
        let values = carrier
            .iter()
            .map(|x| (x.clone(), quotient_chi.eval(&proj(x)).clone()))
            .collect();
        ClassFunction { values }
    }

    /// <chi1, chi2> = (1/|G|) sum chi1 conj(chi2) over the carrier.
    pub fn inner_product(&self, other: &Self, carrier: &[E]) -> CycloScalar {
        let mut acc = CycloScalar::zero();
        for x in carrier {
            acc = acc.add(&self.eval(x).mul(&other.eval(x).conj()));
        }
        let inv = BigRational::new(1.into(), (carrier.len() as u64).into());
        acc.scale(&inv)
    }

    /// Is the function constant on the given classes?
    pub fn is_constant_on(&self, classes: &Classes<E>, carrier: &[E]) -> bool {
        carrier.iter().all(|x| {
            let c = classes.class_of(x);
            *self.eval(x) == *self.eval(&classes.reps[c])
        })
    }
}

/// Induced character: Ind_K^G(chi)(y) = (1/|K|) sum_{x in G} chi0(x y x^{-1}),
/// with chi0 = chi extended by zero. Evaluated per conjugacy class of G and
/// spread to the whole carrier.
pub fn induce<E, FM, FI, FC>(
    carrier: &[E],
    classes: &Classes<E>,
    k_order: u64,
    mul: FM,
    inv: FI,
    chi0: FC,
) -> ClassFunction<E>
where
    E: Clone + Eq + Hash,
    FM: Fn(&E, &E) -> E + Sync,
    FI: Fn(&E) -> E + Sync,
    FC: Fn(&E) -> Option<CycloScalar> + Sync,
{
    let class_values: Vec<CycloScalar> = classes
        .reps
        .iter()
        .map(|y| {
            let mut acc = CycloScalar::zero();
            for x in carrier {
                let conj = mul(&mul(x, y), &inv(x));
                if let Some(v) = chi0(&conj) {
                    acc = acc.add(&v);
                }
            }
            acc.scale(&BigRational::new(1.into(), k_order.into()))
        })
        .collect();
    ClassFunction::from_classes(carrier, classes, &class_values)
}

/// Single-point induced value (used where full tables are not needed).
pub fn induced_value<E, FM, FI, FC>(
    carrier: &[E],
    k_order: u64,
    mul: FM,
    inv: FI,
    chi0: FC,
    y: &E,
) -> CycloScalar
where
    E: Clone + Eq + Hash,
    FM: Fn(&E, &E) -> E,
    FI: Fn(&E) -> E,
    FC: Fn(&E) -> Option<CycloScalar>,
{
    let mut acc = CycloScalar::zero();
    for x in carrier {
        let conj = mul(&mul(x, y), &inv(x));
        if let Some(v) = chi0(&conj) {
            acc = acc.add(&v);
        }
    }
    acc.scale(&BigRational::new(1.into(), k_order.into()))
}

/// Tensor-induced character value at x, from a subgroup K of finite index
/// with transversal {t_0, ..., t_{r-1}}: the product over orbits O of the
/// permutation induced by x on cosets of chi(t_o^{-1} x^{|O|} t_o).
pub fn tensor_induced_value<E, FM, FI, FK, FC>(
    transversal: &[E],
    x: &E,
    mul: FM,
    inv: FI,
    in_k: FK,
    chi: FC,
) -> Result<CycloScalar, Error>
where
    E: Clone + Eq + Hash,
    FM: Fn(&E, &E) -> E,
    FI: Fn(&E) -> E,
    FK: Fn(&E) -> bool,
    FC: Fn(&E) -> CycloScalar,
{
    let r = transversal.len();
    // Permutation: x t_j K = t_{pi(j)} K.
    let mut pi = vec![usize::MAX; r];
    for j in 0..r {
        let xt = mul(x, &transversal[j]);
        let mut found = None;
        for (i, ti) in transversal.iter().enumerate() {
            if in_k(&mul(&inv(ti), &xt)) {
                found = Some(i);
                break;
            }
        }
        pi[j] = found.ok_or_else(|| Error::Internal("transversal inconsistent".into()))?;
    }
    // Orbit products.
    let mut seen = vec![false; r];
    let mut acc = CycloScalar::one();
    for start in 0..r {
        if seen[start] {
            continue;
        }
        let mut len = 0usize;
        let mut j = start;
        loop {
            seen[j] = true;
            len += 1;
            j = pi[j];
            if j == start {
                break;
            }
        }
        // chi(t_start^{-1} x^len t_start)
        let mut xp = x.clone();
        for _ in 1..len {
            xp = mul(&xp, x);
        }
        let arg = mul(&mul(&inv(&transversal[start]), &xp), &transversal[start]);
        debug_assert!(in_k(&arg));
        acc = acc.mul(&chi(&arg));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Z/6 as a toy carrier: elements 0..6, mul = addition.
    fn z6() -> Vec<u64> {
        (0..6).collect()
    }

    #[test]
    fn induction_from_index_two_subgroup_of_z6() {
        let g = z6();
        let add = |a: &u64, b: &u64| (a + b) % 6;
        let neg = |a: &u64| (6 - a) % 6;
        let classes = conjugacy_classes(&g, &[1], add, neg);
        assert_eq!(classes.reps.len(), 6, "abelian group: singleton classes");
        // K = {0, 2, 4}, chi = trivial; Ind(1)(y) = 2 * [y in K].
        let ind = induce(&g, &classes, 3, add, neg, |y| {
            if y % 2 == 0 {
                Some(CycloScalar::one())
            } else {
                None
            }
        });
        for y in &g {
            let expected = if y % 2 == 0 { 2 } else { 0 };
            assert!(ind.eval(y).equals_integer(expected));
        }
        // degree check: value at identity = index * deg(chi)
        assert!(ind.eval(&0).equals_integer(2));
    }

    #[test]
    fn tensor_induction_multiplies_degrees_and_preserves_triviality() {
        let g = z6();
        let add = |a: &u64, b: &u64| (a + b) % 6;
        let neg = |a: &u64| (6 - a) % 6;
        // K = {0, 3}, transversal {0, 1, 2}; chi = nontrivial character of K.
        let transversal = vec![0u64, 1, 2];
        let chi = |y: &u64| {
            if *y == 0 {
                CycloScalar::one()
            } else {
                CycloScalar::from_integer(-1)
            }
        };
        let in_k = |y: &u64| *y % 3 == 0;
        // Degree multiplies: value at 0 is deg(chi)^3 = 1.
        let v0 = tensor_induced_value(&transversal, &0, add, neg, in_k, chi).unwrap();
        assert!(v0.equals_integer(1));
        // x = 3 in K: fixes each coset, value = chi(3)^3 = -1.
        let v3 = tensor_induced_value(&transversal, &3, add, neg, in_k, chi).unwrap();
        assert!(v3.equals_integer(-1));
        // x = 1: single 3-cycle, value = chi(3) = -1; x = 2: 3-cycle with
        // x^3 = 0, value = chi(0) = 1.
        let v1 = tensor_induced_value(&transversal, &1, add, neg, in_k, chi).unwrap();
        assert!(v1.equals_integer(-1));
        let v2 = tensor_induced_value(&transversal, &2, add, neg, in_k, chi).unwrap();
        assert!(v2.equals_integer(1));
        // trivial character tensor-induces to the trivial character
        for x in &g {
            let v = tensor_induced_value(&transversal, x, add, neg, in_k, |_: &u64| {
                CycloScalar::one()
            })
            .unwrap();
            assert!(v.equals_integer(1));
        }
    }

    #[test]
    fn inner_products_of_abelian_characters() {
        let g = z6();
        let chi1 = ClassFunction::from_fn(&g, |y| CycloScalar::root_of_unity(6, *y));
        let chi2 = ClassFunction::from_fn(&g, |y| CycloScalar::root_of_unity(6, 2 * *y));
        assert!(chi1.inner_product(&chi1, &g).equals_integer(1));
        assert!(chi1.inner_product(&chi2, &g).is_zero());
        let prod = chi1.multiply(&chi1);
        assert!(prod.inner_product(&chi2, &g).equals_integer(1));
    }
}
