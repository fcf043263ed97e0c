//! Enumeration, seeded sampling, conjugacy and twisted conjugacy classes,
//! and parabolic stabilizers.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use super::{same_space, HUElem};
use crate::error::Error;
use crate::ff::{pow_u64, FieldElem};
use crate::herm::{enumerate_vectors, HermitianSpace};
use crate::linalg::FMat;

pub const DEFAULT_MAX_GROUP_ORDER: u64 = 1_000_000;

pub fn max_group_order() -> u64 {
    std::env::var("SWL_MAX_GROUP_ORDER")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_GROUP_ORDER)
}

/// |U_n(q^k)| = Q^{n(n-1)/2} prod_{i=1..n} (Q^i - (-1)^i), Q = q^k.
pub fn u_order(q: u64, k: usize, n: usize) -> u64 {
    let big_q = pow_u64(q, k);
    let mut acc: u64 = pow_u64(big_q, n * (n - 1) / 2);
    for i in 1..=n {
        let qi = pow_u64(big_q, i);
        let term = if i % 2 == 0 { qi - 1 } else { qi + 1 };
        acc = acc.checked_mul(term).expect("group order overflow");
    }
    acc
}

/// |H_n(q^k)| = q^{k(2n+1)}.
pub fn h_order(q: u64, k: usize, n: usize) -> u64 {
    pow_u64(q, k * (2 * n + 1))
}

pub fn hu_order(q: u64, k: usize, n: usize) -> u64 {
    h_order(q, k, n).checked_mul(u_order(q, k, n)).expect("group order overflow")
}

/// All Heisenberg elements (v, a) of the space, in canonical order.
pub fn enumerate_h(space: &Arc<HermitianSpace>) -> Vec<HUElem> {
    let lv = &space.level;
    let f = space.field();
    let plus = lv.plus_part();
    let mut out = Vec::new();
    for v in enumerate_vectors(&f, space.n) {
        let a0 = lv
            .solve_plus_membership(&space.form(&v, &v))
            .expect("Heisenberg membership is solvable");
        for z in &plus {
            out.push(HUElem::from_h(space, v.clone(), a0.add(z)));
        }
    }
    out
}

/// All unitary matrices for the space's Gram, by column extension: choose
/// column j among solutions of the pairing constraints against the previous
/// columns, then filter by the norm condition.
pub fn enumerate_u(space: &Arc<HermitianSpace>) -> Result<Vec<FMat>, Error> {
    let order = u_order(space.level.q, space.level.k, space.n);
    if order > max_group_order() {
        return Err(Error::ThresholdExceeded(format!(
            "|U| = {order} exceeds the enumeration threshold"
        )));
    }
    let f = space.field();
    let n = space.n;
    let mut results = Vec::with_capacity(order as usize);
    let mut partial: Vec<Vec<FieldElem>> = Vec::new();
    extend_columns(space, &f, n, &mut partial, &mut results);
    debug_assert_eq!(results.len() as u64, order, "column extension count");
    Ok(results)
}

fn extend_columns(
    space: &Arc<HermitianSpace>,
    f: &Arc<crate::ff::Field>,
    n: usize,
    partial: &mut Vec<Vec<FieldElem>>,
    results: &mut Vec<FMat>,
) {
    let j = partial.len();
    if j == n {
        let mut m = FMat::zeros(f, n, n);
        for (col, v) in partial.iter().enumerate() {
            for i in 0..n {
                m[(i, col)] = v[i].clone();
            }
        }
        results.push(m);
        return;
    }
    // Solve h(partial[a], x) = gram[a][j] for a < j: affine system over the field.
    let candidates: Vec<Vec<FieldElem>> = if j == 0 {
        enumerate_vectors(f, n)
    } else {
        let mut rows = Vec::with_capacity(j);
        let mut rhs = Vec::with_capacity(j);
        for (a, va) in partial.iter().enumerate() {
            // linear form x -> h(va, x) = sum_i conj(va_i) G[i][t] x_t
            let cva: Vec<FieldElem> = va.iter().map(|x| space.conj(x)).collect();
            let mut row = vec![FieldElem::zero(f); n];
            for t in 0..n {
                for i in 0..n {
                    row[t] = row[t].add(&cva[i].mul(&space.gram[(i, t)]));
                }
            }
            rows.push(row);
            rhs.push(space.gram[(a, j)].clone());
        }
        let m = FMat::from_rows(rows);
        let Some(part) = m.solve(&rhs) else {
            return;
        };
        let kernel = m.kernel_basis();
        let card = f.card_u64();
        let total = card.pow(kernel.len() as u32);
        let mut cands = Vec::with_capacity(total as usize);
        for code in 0..total {
            let mut c = code;
            let mut v = part.clone();
            for kb in &kernel {
                let coeff = FieldElem::from_code(f, c % card);
                c /= card;
                if !coeff.is_zero() {
                    for (i, x) in kb.iter().enumerate() {
                        v[i] = v[i].add(&coeff.mul(x));
                    }
                }
            }
            cands.push(v);
        }
        cands
    };
    let target = space.gram[(j, j)].clone();
    for v in candidates {
        if space.form(&v, &v) == target {
            partial.push(v);
            extend_columns(space, f, n, partial, results);
            partial.pop();
        }
    }
}

pub fn enumerate_hu(space: &Arc<HermitianSpace>) -> Result<Vec<HUElem>, Error> {
    let order = hu_order(space.level.q, space.level.k, space.n);
    if order > max_group_order() {
        return Err(Error::ThresholdExceeded(format!(
            "|HU| = {order} exceeds the enumeration threshold"
        )));
    }
    let h = enumerate_h(space);
    let u = enumerate_u(space)?;
    let mut out = Vec::with_capacity(h.len() * u.len());
    for hh in &h {
        for uu in &u {
            let mut x = hh.clone();
            x.u = uu.clone();
            out.push(x);
        }
    }
    Ok(out)
}

/// Z * U: central Heisenberg part times unitary part.
pub fn enumerate_zu(space: &Arc<HermitianSpace>) -> Result<Vec<HUElem>, Error> {
    let plus = space.level.plus_part();
    let u = enumerate_u(space)?;
    let mut out = Vec::with_capacity(plus.len() * u.len());
    for z in &plus {
        for uu in &u {
            let mut x = HUElem::central(space, z.clone());
            x.u = uu.clone();
            out.push(x);
        }
    }
    Ok(out)
}

pub fn is_zu_member(x: &HUElem) -> bool {
    x.v.iter().all(|t| t.is_zero())
}

/// The unitary group with uniform sampling. Enumeration-backed when the
/// order is below the threshold, otherwise a word walk in a cached
/// generating set (level-1 subgroup, diagonal torus, and for odd n the
/// torus embedding), with the mixing caveat that entails.
pub struct UGroup {
    pub space: Arc<HermitianSpace>,
    pub elements: Option<Vec<FMat>>,
    pub generators: Vec<FMat>,
}

impl UGroup {
    pub fn new(space: &Arc<HermitianSpace>) -> Result<UGroup, Error> {
        let order = u_order(space.level.q, space.level.k, space.n);
        if order <= max_group_order() {
            let elements = enumerate_u(space)?;
            let generators = greedy_generators(&elements);
            Ok(UGroup { space: space.clone(), elements: Some(elements), generators })
        } else {
            Ok(UGroup {
                space: space.clone(),
                elements: None,
                generators: walk_generators(space)?,
            })
        }
    }

    pub fn order(&self) -> u64 {
        u_order(self.space.level.q, self.space.level.k, self.space.n)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> FMat {
        match &self.elements {
            Some(els) => els[rng.gen_range(0..els.len())].clone(),
            None => {
                let gens = &self.generators;
                let f = self.space.field();
                let mut acc = FMat::identity(&f, self.space.n);
                for _ in 0..48 {
                    acc = acc.matmul(&gens[rng.gen_range(0..gens.len())]);
                }
                acc
            }
        }
    }
}

/// A small generating set found greedily: add elements (canonical order)
/// until the closure is the whole list.
fn greedy_generators(elements: &[FMat]) -> Vec<FMat> {
    let mut sorted: Vec<&FMat> = elements.iter().collect();
    sorted.sort_by_key(|m| m.data.iter().map(|x| x.code()).collect::<Vec<_>>());
    let mut gens: Vec<FMat> = Vec::new();
    for cand in sorted {
        if cand.is_identity() {
            continue;
        }
        if gens.is_empty() || closure_size(&gens) < elements.len() {
            gens.push(cand.clone());
            if closure_size(&gens) == elements.len() {
                break;
            }
        } else {
            break;
        }
    }
    gens
}

fn closure_size(gens: &[FMat]) -> usize {
    let f = gens[0].field();
    let n = gens[0].rows;
    let id = FMat::identity(&f, n);
    let key = |m: &FMat| m.data.iter().map(|x| x.code()).collect::<Vec<u64>>();
    let mut seen: HashMap<Vec<u64>, ()> = HashMap::new();
    let mut queue = vec![id];
    seen.insert(key(&queue[0]), ());
    while let Some(x) = queue.pop() {
        for g in gens {
            let y = x.matmul(g);
            let k = key(&y);
            if !seen.contains_key(&k) {
                seen.insert(k, ());
                queue.push(y);
            }
        }
    }
    seen.len()
}

/// Generators for a word walk in a non-enumerable U_n(q^m): the level-1
/// subgroup U_n(q) (entries in F_{q^2}), the diagonal mu-torus, and for odd
/// n the embedded field torus. Adequacy is checked by orbit closure on the
/// small cases in tests, and the caveat documented.
fn walk_generators(space: &Arc<HermitianSpace>) -> Result<Vec<FMat>, Error> {
    let q = space.level.q;
    let n = space.n;
    let f = space.field();
    let mut gens: Vec<FMat> = Vec::new();
    // Level-1 subgroup, embedded.
    let s1 = Arc::new(crate::herm::space_from_level1(q, 1, space.gram_level1.clone())?);
    for u1 in enumerate_u(&s1)? {
        let mut m = FMat::zeros(&f, n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = crate::ff::embed(&u1[(i, j)], &f)?;
            }
        }
        if !m.is_identity() {
            gens.push(m);
        }
        if gens.len() > 24 {
            break;
        }
    }
    // Diagonal torus diag(zeta, 1, ..., 1) for the standard Gram.
    if space.gram.is_identity() {
        let (zeta, _) = space.level.mu_generator();
        let mut m = FMat::identity(&f, n);
        m[(0, 0)] = zeta;
        gens.push(m);
    }
    Ok(gens)
}

/// HU group handle with uniform Heisenberg sampling.
pub struct HUGroup {
    pub space: Arc<HermitianSpace>,
    pub u: UGroup,
    plus: Vec<FieldElem>,
}

impl HUGroup {
    pub fn new(space: &Arc<HermitianSpace>) -> Result<HUGroup, Error> {
        Ok(HUGroup { space: space.clone(), u: UGroup::new(space)?, plus: space.level.plus_part() })
    }

    pub fn order(&self) -> u64 {
        hu_order(self.space.level.q, self.space.level.k, self.space.n)
    }

    /// Uniform by construction: uniform v, uniform membership solution a,
    /// U-part per the UGroup sampler.
    pub fn sample(&self, rng: &mut impl Rng) -> HUElem {
        let f = self.space.field();
        let card = f.card_u64();
        let v: Vec<FieldElem> = (0..self.space.n)
            .map(|_| FieldElem::from_code(&f, rng.gen_range(0..card)))
            .collect();
        let a0 = self
            .space
            .level
            .solve_plus_membership(&self.space.form(&v, &v))
            .expect("membership solvable");
        let z = &self.plus[rng.gen_range(0..self.plus.len())];
        let mut x = HUElem::from_h(&self.space, v, a0.add(z));
        x.u = self.u.sample(rng);
        x
    }
}

/// Generators of HU: Heisenberg coordinate sections, central basis, and the
/// unitary generators. Verified to generate by closure when used for class
/// computations.
pub fn hu_generators(space: &Arc<HermitianSpace>) -> Result<Vec<HUElem>, Error> {
    let f = space.field();
    let lv = &space.level;
    let mut gens = Vec::new();
    // (b, a0(b)) over an F_p-basis of V
    for i in 0..space.n {
        for t in 0..f.k {
            let mut v = vec![FieldElem::zero(&f); space.n];
            let mut coeffs = vec![0u64; f.k];
            coeffs[t] = 1;
            v[i] = FieldElem::from_coeffs(&f, coeffs);
            let a0 = lv
                .solve_plus_membership(&space.form(&v, &v))
                .expect("membership solvable");
            gens.push(HUElem::from_h(space, v, a0));
        }
    }
    // central basis: an F_p-basis of the plus-part
    let plus = lv.plus_part();
    let mut span: Vec<FieldElem> = vec![FieldElem::zero(&f)];
    for z in plus {
        if !span.contains(&z) {
            gens.push(HUElem::central(space, z.clone()));
            let mut new_span = Vec::new();
            for s in &span {
                let mut acc = s.clone();
                for _ in 0..f.p {
                    if !new_span.contains(&acc) {
                        new_span.push(acc.clone());
                    }
                    acc = acc.add(&z);
                }
            }
            span = new_span;
        }
    }
    // unitary generators
    let ug = UGroup::new(space)?;
    for g in &ug.generators {
        gens.push(HUElem::from_unitary(space, g.clone()));
    }
    Ok(gens)
}

/// One twisted conjugacy class: G-orbit of (rep, sigma^i) under
/// g |-> x g F^i(x)^{-1}.
pub struct TwistedClass {
    pub rep: HUElem,
    pub size: usize,
}

pub struct TwistedClasses {
    pub sigma_i: usize,
    pub classes: Vec<TwistedClass>,
    /// element key -> class index
    pub index: HashMap<Vec<u64>, usize>,
}

/// Partition of the coset {(g, sigma^i)} into G-conjugacy orbits.
/// sigma_i = 0 computes plain conjugacy classes.
pub fn twisted_classes(space: &Arc<HermitianSpace>, sigma_i: usize) -> Result<TwistedClasses, Error> {
    let elements = enumerate_hu(space)?;
    let gens = hu_generators(space)?;
    // The generator set must generate the group for orbit closure to equal
    // the twisted class; verify once (closure under plain multiplication).
    verify_generates(&elements, &gens)?;
    let mut gens_all = gens.clone();
    gens_all.extend(gens.iter().map(|g| g.inv()));
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut classes = Vec::new();
    let mut order: Vec<&HUElem> = elements.iter().collect();
    order.sort_by_key(|x| x.key());
    for start in order {
        if index.contains_key(&start.key()) {
            continue;
        }
        let cid = classes.len();
        let mut queue = vec![start.clone()];
        index.insert(start.key(), cid);
        let mut size = 0usize;
        while let Some(x) = queue.pop() {
            size += 1;
            for s in &gens_all {
                let y = x.twisted_conjugate(s, sigma_i);
                if !index.contains_key(&y.key()) {
                    index.insert(y.key(), cid);
                    queue.push(y);
                }
            }
        }
        classes.push(TwistedClass { rep: start.clone(), size });
    }
    Ok(TwistedClasses { sigma_i, classes, index })
}

fn verify_generates(elements: &[HUElem], gens: &[HUElem]) -> Result<(), Error> {
    let mut seen: HashMap<Vec<u64>, ()> = HashMap::new();
    let id = {
        let mut x = gens[0].clone();
        x = x.mul(&x.inv());
        x
    };
    seen.insert(id.key(), ());
    let mut queue = vec![id];
    while let Some(x) = queue.pop() {
        for g in gens {
            let y = x.mul(g);
            if !seen.contains_key(&y.key()) {
                seen.insert(y.key(), ());
                queue.push(y);
            }
        }
    }
    if seen.len() != elements.len() {
        return Err(Error::Internal(format!(
            "generator set closure has size {} != |G| = {}",
            seen.len(),
            elements.len()
        )));
    }
    Ok(())
}

/// Are x and y conjugate in the (enumerable) group?
pub fn are_conjugate(space: &Arc<HermitianSpace>, x: &HUElem, y: &HUElem) -> Result<bool, Error> {
    if x == y {
        return Ok(true);
    }
    // quick invariants first
    if x.fixed_space_dim() != y.fixed_space_dim() {
        return Ok(false);
    }
    let cls = twisted_classes(space, 0)?;
    Ok(cls.index.get(&x.key()) == cls.index.get(&y.key()))
}

/// Parabolic data for an isotropic subspace W of V.
pub struct Parabolic {
    pub space: Arc<HermitianSpace>,
    pub w_basis: Vec<Vec<FieldElem>>,
    /// Stabilizer of W inside the enumerated unitary group.
    pub p_w: Vec<FMat>,
    pub wperp_basis: Vec<Vec<FieldElem>>,
    /// Complement basis of W inside W^perp, lifting a basis of W0 = W^perp/W.
    pub w0_lift: Vec<Vec<FieldElem>>,
    /// The quotient space W0 with its induced form (level-1 Gram).
    pub w0_space: Option<Arc<HermitianSpace>>,
}

impl Parabolic {
    pub fn new(space: &Arc<HermitianSpace>, w_basis: Vec<Vec<FieldElem>>) -> Result<Parabolic, Error> {
        let f = space.field();
        let n = space.n;
        // W isotropic?
        for a in &w_basis {
            for b in &w_basis {
                if !space.form(a, b).is_zero() {
                    return Err(Error::Malformed("subspace is not isotropic".into()));
                }
            }
        }
        // W^perp = kernel of the pairing rows h(w_i, .).
        let mut rows = Vec::new();
        for w in &w_basis {
            let cw: Vec<FieldElem> = w.iter().map(|x| space.conj(x)).collect();
            let mut row = vec![FieldElem::zero(&f); n];
            for t in 0..n {
                for i in 0..n {
                    row[t] = row[t].add(&cw[i].mul(&space.gram[(i, t)]));
                }
            }
            rows.push(row);
        }
        let m = FMat::from_rows(rows);
        let wperp_basis = m.kernel_basis();
        // Complement: extend W-basis to a basis of W^perp greedily.
        let mut current: Vec<Vec<FieldElem>> = w_basis.clone();
        let mut w0_lift = Vec::new();
        for cand in &wperp_basis {
            if !in_span(&f, &current, cand) {
                current.push(cand.clone());
                w0_lift.push(cand.clone());
            }
        }
        // Stabilizer of W in U.
        let u_all = enumerate_u(space)?;
        let p_w: Vec<FMat> = u_all
            .into_iter()
            .filter(|g| {
                w_basis.iter().all(|w| {
                    let gw = g.apply(w);
                    in_span(&f, &w_basis, &gw)
                })
            })
            .collect();
        // Induced form on W0.
        let n0 = w0_lift.len();
        let w0_space = if n0 > 0 {
            let fq2 = space.gram_level1.field();
            let mut gram1 = FMat::zeros(&fq2, n0, n0);
            for i in 0..n0 {
                for j in 0..n0 {
                    let hv = space.form(&w0_lift[i], &w0_lift[j]);
                    gram1[(i, j)] = crate::ff::subfield_preimage(&hv, &fq2)?;
                }
            }
            Some(Arc::new(crate::herm::space_from_level1(
                space.level.q,
                space.level.k,
                gram1,
            )?))
        } else {
            None
        };
        Ok(Parabolic { space: space.clone(), w_basis, p_w, wperp_basis, w0_lift, w0_space })
    }

    pub fn in_wperp(&self, v: &[FieldElem]) -> bool {
        in_span(&self.space.field(), &self.wperp_basis, v)
    }

    /// W0 coordinates of a vector in W^perp.
    pub fn project_vector(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        let f = self.space.field();
        // Solve v = W c1 + L c2, return c2.
        let mut basis: Vec<Vec<FieldElem>> = self.w_basis.clone();
        basis.extend(self.w0_lift.iter().cloned());
        let cols: Vec<Vec<FieldElem>> = basis;
        let n = self.space.n;
        let mut m = FMat::zeros(&f, n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                m[(i, j)] = c[i].clone();
            }
        }
        let sol = m.solve(v).expect("vector not in W^perp");
        sol[self.w_basis.len()..].to_vec()
    }

    /// Induced action of u in P_W on W0.
    pub fn project_u(&self, u: &FMat) -> FMat {
        let f = self.space.field();
        let n0 = self.w0_lift.len();
        let mut out = FMat::zeros(&f, n0, n0);
        for (j, c) in self.w0_lift.iter().enumerate() {
            let img = u.apply(c);
            let col = self.project_vector(&img);
            for i in 0..n0 {
                out[(i, j)] = col[i].clone();
            }
        }
        out
    }

    /// The homomorphism H_{W^perp} x| P_W -> HU_{W0}.
    pub fn project_hu(&self, x: &HUElem) -> HUElem {
        assert!(same_space(&x.space, &self.space));
        assert!(self.in_wperp(&x.v), "Heisenberg part not in W^perp");
        let w0 = self.w0_space.as_ref().expect("W0 is nonzero");
        HUElem {
            space: w0.clone(),
            v: self.project_vector(&x.v),
            a: x.a.clone(),
            u: self.project_u(&x.u),
        }
    }
}

pub fn in_span(f: &Arc<crate::ff::Field>, basis: &[Vec<FieldElem>], v: &[FieldElem]) -> bool {
    if basis.is_empty() {
        return v.iter().all(|x| x.is_zero());
    }
    let n = v.len();
    let mut m = FMat::zeros(f, n, basis.len());
    for (j, c) in basis.iter().enumerate() {
        for i in 0..n {
            m[(i, j)] = c[i].clone();
        }
    }
    m.solve(v).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herm::{isotropic_vector, standard_space};
    use rand::SeedableRng;

    fn space(q: u64, n: usize, k: usize) -> Arc<HermitianSpace> {
        Arc::new(standard_space(q, n, k).unwrap())
    }

    #[test]
    fn group_orders() {
        assert_eq!(u_order(2, 3, 1), 9, "|U_1(8)| = q^m + 1");
        assert_eq!(u_order(2, 1, 2), 18, "|U_2(2)|");
        assert_eq!(u_order(2, 1, 3), 648, "|U_3(2)|");
        assert_eq!(u_order(2, 3, 2), 4536, "|U_2(8)|");
        assert_eq!(h_order(2, 3, 1), 512);
        assert_eq!(hu_order(2, 3, 1), 4608);
    }

    #[test]
    fn enumerations_match_order_formulas() {
        let s = space(2, 1, 3);
        assert_eq!(enumerate_h(&s).len(), 512);
        assert_eq!(enumerate_u(&s).unwrap().len(), 9);
        assert_eq!(enumerate_hu(&s).unwrap().len(), 4608);
        let s22 = space(2, 2, 1);
        let u22 = enumerate_u(&s22).unwrap();
        assert_eq!(u22.len(), 18);
        for u in &u22 {
            let e = s22.conj_exp();
            assert_eq!(u.conj_transpose(e).matmul(&u.clone()), FMat::identity(&s22.field(), 2));
        }
        let s32 = space(3, 1, 1);
        assert_eq!(enumerate_u(&s32).unwrap().len(), 4, "|U_1(3)| = 4");
    }

    #[test]
    fn u3_2_enumeration() {
        let s = space(2, 3, 1);
        assert_eq!(enumerate_u(&s).unwrap().len(), 648);
    }

    #[test]
    fn sampling_is_valid_and_deterministic() {
        let s = space(2, 2, 3);
        let grp = HUGroup::new(&s).unwrap();
        let mut r1 = rand_chacha::ChaCha20Rng::seed_from_u64(42);
        let mut r2 = rand_chacha::ChaCha20Rng::seed_from_u64(42);
        for _ in 0..50 {
            let a = grp.sample(&mut r1);
            let b = grp.sample(&mut r2);
            assert!(a.is_valid());
            assert_eq!(a, b, "seeded sampling is deterministic");
        }
    }

    #[test]
    fn u1_sampling_is_approximately_uniform() {
        // chi-square over the 9 elements of U_1(8), 10^4 draws, 5-sigma bound.
        let s = space(2, 1, 3);
        let grp = UGroup::new(&s).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(2024);
        let mut counts: HashMap<u64, u64> = HashMap::new();
        let draws = 10_000u64;
        for _ in 0..draws {
            let u = grp.sample(&mut rng);
            *counts.entry(u[(0, 0)].code()).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 9);
        let expected = draws as f64 / 9.0;
        let chi2: f64 = counts.values().map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        }).sum();
        // df = 8: mean 8, sd = 4; 8 + 5*4 = 28.
        assert!(chi2 < 28.0, "chi-square {chi2} out of bounds");
    }

    #[test]
    fn twisted_class_sizes_partition_the_group() {
        let s = space(2, 1, 3);
        for i in 0..3 {
            let cls = twisted_classes(&s, i).unwrap();
            let total: usize = cls.classes.iter().map(|c| c.size).sum();
            assert_eq!(total, 4608);
        }
    }

    #[test]
    fn twisted_class_count_matches_base_group_classes() {
        // #classes of HU_1(8) x| sigma equals #classes of HU_1(2).
        let s = space(2, 1, 3);
        let twisted = twisted_classes(&s, 1).unwrap();
        let s_base = space(2, 1, 1);
        let plain = twisted_classes(&s_base, 0).unwrap();
        assert_eq!(twisted.classes.len(), plain.classes.len());
    }

    #[test]
    fn word_walk_generators_cover_small_groups() {
        // The walk generator recipe closes to the full group on small cases.
        for (q, n, k) in [(2u64, 1usize, 3usize), (2, 2, 1)] {
            let s = space(q, n, k);
            let gens = super::walk_generators(&s).unwrap();
            let sz = super::closure_size(&gens);
            assert_eq!(sz as u64, u_order(q, k, n));
        }
    }

    #[test]
    fn parabolic_stabilizer_on_u3_2() {
        let s = space(2, 3, 1);
        let w = isotropic_vector(&s).unwrap();
        let par = Parabolic::new(&s, vec![w]).unwrap();
        let u_total = 648;
        assert!(u_total % par.p_w.len() == 0, "|P_W| divides |U|");
        assert!(par.p_w.iter().any(|g| g.is_identity()));
        // W^perp has dimension n - 1 and W0 dimension n - 2.
        assert_eq!(par.wperp_basis.len(), 2);
        assert_eq!(par.w0_lift.len(), 1);
        // quotient map is a homomorphism on sampled pairs
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(5);
        let hs = enumerate_h(&s);
        let h_in: Vec<&HUElem> = hs.iter().filter(|x| par.in_wperp(&x.v)).collect();
        for _ in 0..60 {
            let a = h_in[rng.gen_range(0..h_in.len())];
            let g = &par.p_w[rng.gen_range(0..par.p_w.len())];
            let b = h_in[rng.gen_range(0..h_in.len())];
            let mut x = (*a).clone();
            x.u = g.clone();
            let y = (*b).clone();
            let lhs = par.project_hu(&x.mul(&y));
            let rhs = par.project_hu(&x).mul(&par.project_hu(&y));
            assert_eq!(lhs, rhs);
        }
    }
}
