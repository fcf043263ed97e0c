//! The monomial Heisenberg model, Weil intertwiners, the Frobenius operator
//! extending the representation to HU x| Gamma, and the closed-form
//! character.
//!
//! The Heisenberg part is induced from the abelian subgroup A over the
//! Lagrangian L = F_{q^m}^n inside V = F_{q^{2m}}^n, with a deterministic
//! character extension psi_A of psi_m. Weil operators are produced by
//! averaging a matrix unit against the intertwining relation (the result is
//! a scalar multiple of the intertwiner exactly, by Schur), and normalized
//! by the trace law tr = (-1)^n (-q^m)^{N(u)}. The Frobenius operator is the
//! analogous average for the twist by F, normalized to trace q^n; its m-th
//! power being the identity is asserted, not assumed.

pub mod classfn;
pub mod matrix;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_rational::BigRational;

use crate::cyclo::{integer_pow, sign_pow, CycloScalar};
use crate::error::Error;
use crate::ff::{embed, pow_u64, AdditiveCharacter, FieldElem};
use crate::grp::{reduce_to_zu, ExtElem, HUElem};
use crate::herm::{enumerate_vectors, HermitianSpace};
use crate::linalg::FMat;
use matrix::{CMat, Monomial};

pub const DEFAULT_MAX_REP_DIM: usize = 256;

fn max_rep_dim() -> usize {
    std::env::var("SWL_MAX_REP_DIM")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_REP_DIM)
}

/// Matrix model of the extended Heisenberg-Weil representation on a standard
/// space (identity Gram) at level m.
pub struct RepModel {
    pub space: Arc<HermitianSpace>,
    pub psi_m: AdditiveCharacter,
    pub dim: usize,
    /// Exponent of the abelian subgroup A: p for odd p, 4 for p = 2.
    pub conductor_e: u64,
    /// Code-indexed decomposition w = l + (delta d): split_table[w.code()]
    /// = (l, delta d), both in the embedded F_{q^m} and its delta-translate.
    split_table: Vec<(FieldElem, FieldElem)>,
    /// Transversal: vector parts (delta * d for d in F_{q^m}^n) and their
    /// canonical central parts, indexed consistently with `trans_index`.
    trans_vec: Vec<Vec<FieldElem>>,
    trans_a: Vec<FieldElem>,
    trans_index: HashMap<u64, usize>,
    /// psi_A data: packed L-part key -> (exponent mod conductor_e, a_Pi).
    psia: HashMap<u64, (u64, FieldElem)>,
    /// Membership sections a0(v) for every v in V, packed-key.
    a0: HashMap<u64, FieldElem>,
    /// psi_m exponents per element code.
    psi_exp: Vec<u64>,
    /// Cached roots of unity for the conductor.
    roots: Vec<CycloScalar>,
    psi_roots: Vec<CycloScalar>,
    /// Frobenius operator T_sigma and its powers T_sigma^j, j < m.
    t_sigma_pows: Vec<CMat>,
    /// Powers aligned with Fr-exponents: t_fr_pows[j] = rho~(Fr^j).
    t_fr_pows: Vec<CMat>,
    weil_cache: Mutex<HashMap<Vec<u64>, Arc<CMat>>>,
}

/// Pack an n-vector of small-field element codes into one u64 key.
fn pack_v(v: &[FieldElem]) -> u64 {
    let mut key = 0u64;
    for x in v {
        key = key << 20 | x.code();
    }
    key
}

impl RepModel {
    /// Build the model for the standard space and a level-m character.
    /// `psia_selector` picks among the valid character extensions psi_A
    /// (0 is canonical; any value yields an isomorphic model).
    pub fn build(
        space: &Arc<HermitianSpace>,
        psi_m: &AdditiveCharacter,
        psia_selector: u64,
    ) -> Result<RepModel, Error> {
        let lv = &space.level;
        assert_eq!(lv.k % 2, 1, "models are built at odd levels");
        assert!(space.gram.is_identity(), "RepModel requires the standard Gram");
        let n = space.n;
        let dim_u64 = pow_u64(lv.q, lv.k * n);
        if dim_u64 > max_rep_dim() as u64 {
            return Err(Error::DimensionBound(format!(
                "model dimension q^(mn) = {dim_u64} exceeds the bound"
            )));
        }
        let dim = dim_u64 as usize;
        let f = space.field();
        assert!(f.card_u64() < (1 << 20), "model fields stay packable");
        // delta: the canonical generator of F_{q^{2m}} lies outside F_{q^m}.
        let delta = FieldElem::generator(&f);
        // Split table: w = l + delta d with l, d in the embedded F_{q^m}.
        let mid_embedded: Vec<FieldElem> = {
            let mut out = Vec::with_capacity(lv.mid.k);
            for t in 0..lv.mid.k {
                let mut coeffs = vec![0u64; lv.mid.k];
                coeffs[t] = 1;
                out.push(embed(&FieldElem::from_coeffs(&lv.mid, coeffs), &f)?);
            }
            out
        };
        let split_sys = {
            let mut cols = Vec::with_capacity(2 * lv.mid.k);
            for b in &mid_embedded {
                cols.push(b.coeffs.clone());
            }
            for b in &mid_embedded {
                cols.push(delta.mul(b).coeffs.clone());
            }
            crate::linalg::LinearSystem::from_columns(f.p, &cols, f.k)
        };
        let split_table: Vec<(FieldElem, FieldElem)> = (0..f.card_u64())
            .map(|code| {
                let w = FieldElem::from_code(&f, code);
                let sol = split_sys.solve(&w.coeffs).expect("splitting basis spans");
                let half = lv.mid.k;
                let mut l = FieldElem::zero(&f);
                let mut dd = FieldElem::zero(&f);
                for t in 0..half {
                    if sol[t] != 0 {
                        let mut c = mid_embedded[t].clone();
                        if sol[t] != 1 {
                            c = c.mul(&FieldElem::from_prime(&f, sol[t]));
                        }
                        l = l.add(&c);
                    }
                    if sol[half + t] != 0 {
                        let mut c = delta.mul(&mid_embedded[t]);
                        if sol[half + t] != 1 {
                            c = c.mul(&FieldElem::from_prime(&f, sol[half + t]));
                        }
                        dd = dd.add(&c);
                    }
                }
                debug_assert_eq!(l.add(&dd), w);
                (l, dd)
            })
            .collect();
        // Membership sections for all of V.
        let mut a0 = HashMap::new();
        for v in enumerate_vectors(&f, n) {
            let s = lv
                .solve_plus_membership(&space.form(&v, &v))
                .ok_or_else(|| Error::Internal("membership equation unsolvable".into()))?;
            a0.insert(pack_v(&v), s);
        }
        // Transversal: delta * (F_{q^m}-vectors), canonical order on d-parts.
        let mid_card = lv.mid.card_u64();
        let mut trans_vec = Vec::with_capacity(dim);
        let mut trans_a = Vec::with_capacity(dim);
        let mut trans_index = HashMap::new();
        let mut d_codes = vec![0u64; n];
        for idx in 0..dim {
            let d_vec: Vec<FieldElem> = d_codes
                .iter()
                .map(|&c| embed(&FieldElem::from_code(&lv.mid, c), &f).unwrap())
                .collect();
            let x: Vec<FieldElem> = d_vec.iter().map(|d| delta.mul(d)).collect();
            let a = a0[&pack_v(&x)].clone();
            trans_index.insert(pack_v(&x), idx);
            trans_vec.push(x);
            trans_a.push(a);
            // odometer over d-codes
            if idx + 1 < dim {
                let mut pos = 0;
                loop {
                    d_codes[pos] += 1;
                    if d_codes[pos] < mid_card {
                        break;
                    }
                    d_codes[pos] = 0;
                    pos += 1;
                }
            }
        }
        // psi_A over L = (embedded F_{q^m})^n.
        let conductor_e = if lv.p == 2 { 4 } else { lv.p };
        let psia = build_psia(space, psi_m, &mid_embedded, conductor_e, psia_selector)?;
        let psi_exp: Vec<u64> = (0..f.card_u64())
            .map(|code| psi_m.eval_exponent(&FieldElem::from_code(&f, code)))
            .collect();
        let roots: Vec<CycloScalar> = (0..conductor_e)
            .map(|k| CycloScalar::root_of_unity(conductor_e, k))
            .collect();
        let psi_roots: Vec<CycloScalar> = (0..lv.p)
            .map(|k| CycloScalar::root_of_unity(lv.p, k))
            .collect();
        let mut model = RepModel {
            space: space.clone(),
            psi_m: psi_m.clone(),
            dim,
            conductor_e,
            split_table,
            trans_vec,
            trans_a,
            trans_index,
            psia,
            a0,
            psi_exp,
            roots,
            psi_roots,
            t_sigma_pows: Vec::new(),
            t_fr_pows: Vec::new(),
            weil_cache: Mutex::new(HashMap::new()),
        };
        model.install_frobenius_operator()?;
        Ok(model)
    }

    fn level_m(&self) -> usize {
        self.space.level.k
    }

    /// psi_A((l, a)) for (l, a) in A, via the packed tables.
    fn psia_eval_packed(&self, l_key: u64, a: &FieldElem) -> CycloScalar {
        let (expo, a_pi) = self.psia.get(&l_key).expect("element outside A");
        let diff = a.sub(a_pi);
        let psi_e = self.psi_exp[diff.code() as usize];
        self.roots[*expo as usize].mul(&self.psi_roots[psi_e as usize])
    }

    /// Decompose (hv, ha) * r_k = r_k' * a with a in A; return (k', psi_A(a)).
    /// Pure Heisenberg arithmetic on raw coordinates (no matrix part).
    fn act_on_transversal(&self, hv: &[FieldElem], ha: &FieldElem, k: usize) -> (usize, CycloScalar) {
        let xk = &self.trans_vec[k];
        // product (w, c) = (hv, ha)(xk, ak): w = hv + xk, c = ha + ak + h(hv, xk)
        let mut c = ha.add(&self.trans_a[k]);
        let n = self.space.n;
        let mut w = Vec::with_capacity(n);
        for i in 0..n {
            // identity Gram: h(v, x) = sum conj(v_i) x_i
            if !hv[i].is_zero() && !xk[i].is_zero() {
                c = c.add(&self.space.conj(&hv[i]).mul(&xk[i]));
            }
            w.push(hv[i].add(&xk[i]));
        }
        // split coordinates and pack both keys
        let mut l_key = 0u64;
        let mut d_key = 0u64;
        let mut l_vec = Vec::with_capacity(n);
        let mut dd_vec = Vec::with_capacity(n);
        for wi in &w {
            let (l, dd) = &self.split_table[wi.code() as usize];
            l_key = l_key << 20 | l.code();
            d_key = d_key << 20 | dd.code();
            l_vec.push(l.clone());
            dd_vec.push(dd.clone());
        }
        let kp = *self.trans_index.get(&d_key).expect("transversal covers V/L");
        // a-part of r_kp^{-1} (w, c): (l, conj(a_kp) + c - h(dd, w))
        let mut a_val = self.space.conj(&self.trans_a[kp]).add(&c);
        for i in 0..n {
            if !dd_vec[i].is_zero() && !w[i].is_zero() {
                a_val = a_val.sub(&self.space.conj(&dd_vec[i]).mul(&w[i]));
            }
        }
        let _ = l_vec;
        (kp, self.psia_eval_packed(l_key, &a_val))
    }

    /// The monomial operator of a Heisenberg element (v, a).
    pub fn rho_h(&self, v: &[FieldElem], a: &FieldElem) -> Monomial {
        let mut perm = vec![0usize; self.dim];
        let mut coeff = vec![CycloScalar::zero(); self.dim];
        for k in 0..self.dim {
            let (kp, c) = self.act_on_transversal(v, a, k);
            perm[k] = kp;
            coeff[k] = c;
        }
        Monomial { perm, coeff }
    }

    /// Averaged intertwiner for an automorphism alpha of H, from the matrix
    /// unit E_{kl}: sum over a section v -> s(v) of H/Z of
    /// rho(alpha(s(v))) E_{kl} rho(s(v))^{-1}. Each term is a scaled matrix
    /// unit, so a full scan costs O(|V|).
    fn averaged_intertwiner(
        &self,
        alpha: &dyn Fn(&HUElem) -> HUElem,
        k: usize,
        l: usize,
    ) -> CMat {
        let mut acc = CMat::zeros(self.dim);
        let f = self.space.field();
        for v in enumerate_vectors(&f, self.space.n) {
            let a = self.a0[&pack_v(&v)].clone();
            let s = HUElem::from_h(&self.space, v, a);
            let s_alpha = alpha(&s);
            // Column k of rho(alpha(s)).
            let (row_i, c1) = self.act_on_transversal(&s_alpha.v, &s_alpha.a, k);
            // Row l of rho(s^{-1}): from s * r_l = r_j * a2, the (l, j) entry
            // of rho(s)^{-1} is psi_A(a2)^{-1}.
            let (col_j, c2) = self.act_on_transversal(&s.v, &s.a, l);
            let c2_inv = c2.conj(); // psi_A values are roots of unity
            let term = c1.mul(&c2_inv);
            acc[(row_i, col_j)] = acc[(row_i, col_j)].add(&term);
        }
        acc
    }

    fn intertwiner_for(
        &self,
        alpha: &dyn Fn(&HUElem) -> HUElem,
        target_trace: &CycloScalar,
    ) -> Result<CMat, Error> {
        for k in 0..self.dim {
            for l in 0..self.dim {
                let t = self.averaged_intertwiner(alpha, k, l);
                if t.is_zero() {
                    continue;
                }
                let tr = t.trace();
                if tr.is_zero() {
                    return Err(Error::Internal(
                        "nonzero intertwiner with zero trace (Schur violation)".into(),
                    ));
                }
                let factor = target_trace.mul(&tr.inverse().expect("nonzero trace inverts"));
                return Ok(t.scale(&factor));
            }
        }
        Err(Error::Internal("intertwiner averaging vanished for all matrix units".into()))
    }

    /// The normalized Weil operator of a unitary u, cached.
    pub fn weil_operator(&self, u: &FMat) -> Result<Arc<CMat>, Error> {
        let key: Vec<u64> = u.data.iter().map(|x| x.code()).collect();
        if let Some(w) = self.weil_cache.lock().unwrap().get(&key) {
            return Ok(w.clone());
        }
        if u.is_identity() {
            let w = Arc::new(CMat::identity(self.dim));
            self.weil_cache.lock().unwrap().insert(key, w.clone());
            return Ok(w);
        }
        let n = self.space.n;
        let m = self.level_m();
        let q = self.space.level.q;
        let nfix = crate::grp::fixed_space_dim(u) as u32;
        // (-1)^n (-q^m)^{N(u)}
        let target = sign_pow(n as u32)
            .mul(&sign_pow(nfix))
            .mul(&integer_pow(pow_u64(q, m), nfix));
        let uc = u.clone();
        let alpha = move |h: &HUElem| -> HUElem {
            let mut out = h.clone();
            out.v = uc.apply(&h.v);
            out
        };
        let w = Arc::new(self.intertwiner_for(&alpha, &target)?);
        self.weil_cache.lock().unwrap().insert(key, w.clone());
        Ok(w)
    }

    fn install_frobenius_operator(&mut self) -> Result<(), Error> {
        let m = self.level_m();
        let n = self.space.n as u32;
        let q = self.space.level.q;
        let t_sigma = if m == 1 {
            CMat::identity(self.dim)
        } else {
            let target = integer_pow(q, n);
            let alpha = move |h: &HUElem| -> HUElem { h.frobenius_f() };
            self.intertwiner_for(&alpha, &target)?
        };
        // T_sigma^m = 1 pins the normalization; anything else is a bug.
        let mut pows = vec![CMat::identity(self.dim)];
        for j in 1..m {
            pows.push(pows[j - 1].matmul(&t_sigma));
        }
        let tm = pows[m - 1].matmul(&t_sigma);
        if !tm.is_identity() {
            return Err(Error::Internal(
                "normalized Frobenius operator does not have order m".into(),
            ));
        }
        // rho~(Fr^j) = T_sigma^{2j mod m}.
        let mut fr = Vec::with_capacity(m);
        for j in 0..m {
            fr.push(pows[crate::grp::sigma_exp_of_fr(j, m)].clone());
        }
        self.t_sigma_pows = pows;
        self.t_fr_pows = fr;
        Ok(())
    }

    pub fn t_sigma(&self) -> &CMat {
        &self.t_sigma_pows[1 % self.t_sigma_pows.len()]
    }

    pub fn t_sigma_pow(&self, i: usize) -> &CMat {
        &self.t_sigma_pows[i % self.level_m()]
    }

    /// rho~(Fr^j).
    pub fn t_fr_pow(&self, j: usize) -> &CMat {
        &self.t_fr_pows[j % self.level_m()]
    }

    /// Full operator rho~((v, a, u), Fr^j) = rho(v, a) W_u T_Fr^j.
    pub fn rho_tilde(&self, x: &ExtElem) -> Result<CMat, Error> {
        assert!(crate::grp::same_space(&x.h.space, &self.space), "level mismatch");
        let w = self.weil_operator(&x.h.u)?;
        let p = self.rho_h(&x.h.v, &x.h.a);
        let wt = if x.j == 0 { (*w).clone() } else { w.matmul(self.t_fr_pow(x.j)) };
        Ok(p.mul_dense(&wt))
    }

    /// tr rho~(x) without forming the full product: O(dim^2).
    pub fn trace_of(&self, x: &ExtElem) -> Result<CycloScalar, Error> {
        assert!(crate::grp::same_space(&x.h.space, &self.space), "level mismatch");
        let w = self.weil_operator(&x.h.u)?;
        let p = self.rho_h(&x.h.v, &x.h.a);
        if x.j == 0 {
            return Ok(p.trace_mul(&w));
        }
        let t = self.t_fr_pow(x.j);
        // tr(P W T) = sum_k c_k (W T)[k, perm(k)]
        let mut acc = CycloScalar::zero();
        for k in 0..self.dim {
            let target_col = p.perm[k];
            let mut entry = CycloScalar::zero();
            for s in 0..self.dim {
                let a = &w[(k, s)];
                if a.is_zero() {
                    continue;
                }
                let b = &t[(s, target_col)];
                if b.is_zero() {
                    continue;
                }
                entry = entry.add(&a.mul(b));
            }
            if !entry.is_zero() {
                acc = acc.add(&p.coeff[k].mul(&entry));
            }
        }
        Ok(acc)
    }

    /// Character on the plain group.
    pub fn trace_hu(&self, x: &HUElem) -> Result<CycloScalar, Error> {
        self.trace_of(&ExtElem::new(x.clone(), 0))
    }

    /// Exact inner product <chi, chi> over H (irreducibility check).
    pub fn h_character_norm(&self) -> Result<BigRational, Error> {
        let els = crate::grp::fin::enumerate_h(&self.space);
        let mut acc = CycloScalar::zero();
        for h in &els {
            let t = self.trace_hu(h)?;
            acc = acc.add(&t.mul(&t.conj()));
        }
        let norm = acc
            .as_rational()
            .ok_or_else(|| Error::Internal("character norm is not rational".into()))?;
        Ok(norm / BigRational::from(num_bigint::BigInt::from(els.len() as u64)))
    }
}

/// Deterministic psi_A: exponent table over the digit decomposition of L.
fn build_psia(
    space: &Arc<HermitianSpace>,
    psi_m: &AdditiveCharacter,
    mid_embedded: &[FieldElem],
    conductor_e: u64,
    selector: u64,
) -> Result<HashMap<u64, (u64, FieldElem)>, Error> {
    let lv = &space.level;
    let f = space.field();
    let n = space.n;
    let p = lv.p;
    // F_p-basis generators of L with canonical sections.
    let mut gens: Vec<HUElem> = Vec::new();
    let mut gen_exps: Vec<u64> = Vec::new();
    for i in 0..n {
        for b in mid_embedded {
            let mut v = vec![FieldElem::zero(&f); n];
            v[i] = b.clone();
            let a0 = lv
                .solve_plus_membership(&space.form(&v, &v))
                .ok_or_else(|| Error::Internal("membership unsolvable".into()))?;
            let g = HUElem::from_h(space, v, a0);
            // Value exponent for the generator: solves x^p = psi_A(g^p).
            let expo = if p == 2 {
                let g2 = g.mul(&g);
                debug_assert!(g2.v.iter().all(|t| t.is_zero()));
                let w = psi_m.eval_exponent(&g2.a); // in {0, 1}, as mu_2 in mu_4
                (w * 2) / 2 + 2 * (selector % 2)
            } else {
                // g^p = identity, so any p-th root of unity works.
                (selector % p) * (conductor_e / p)
            };
            gens.push(g);
            gen_exps.push(expo % conductor_e);
        }
    }
    // Table over all digit vectors.
    let r = gens.len();
    let mut table: HashMap<u64, (u64, FieldElem)> = HashMap::new();
    let mut digits = vec![0u64; r];
    let total = (p as u128).pow(r as u32);
    let mut current: Vec<(HUElem, u64)> = Vec::new(); // stack of prefix products
    let id = HUElem::identity(space);
    table.insert(pack_v(&id.v), (0, FieldElem::zero(&f)));
    let mut count: u128 = 1;
    // Odometer with incremental product: maintain the full product directly.
    let mut prod = id.clone();
    let mut expo = 0u64;
    while count < total {
        // increment digits, updating prod by multiplying a single generator
        let mut pos = 0;
        loop {
            digits[pos] += 1;
            prod = prod.mul(&gens[pos]);
            expo = (expo + gen_exps[pos]) % conductor_e;
            if digits[pos] < p {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
        table.insert(pack_v(&prod.v), (expo, prod.a.clone()));
        count += 1;
    }
    let _ = &mut current;
    Ok(table)
}

/// Closed-form character of the plain Heisenberg-Weil representation:
/// zero off the conjugates of ZU, else psi(b0) (-1)^n (-q^k)^{N(u)}.
pub fn char_closed_form(psi: &AdditiveCharacter, x: &HUElem) -> CycloScalar {
    let red = reduce_to_zu(x);
    if !red.reducible {
        return CycloScalar::zero();
    }
    let n = x.space.n as u32;
    let q = x.space.level.q;
    let k = x.space.level.k;
    let nfix = red.fixed_dim as u32;
    psi.eval(&red.b0.unwrap())
        .mul(&sign_pow(n))
        .mul(&sign_pow(nfix))
        .mul(&integer_pow(pow_u64(q, k), nfix))
}

/// Model for an arbitrary nondegenerate space, as the standard model
/// transported through a level-1 diagonalizing isometry. The isometry has
/// Frobenius-fixed entries, so the transport extends to HU x| Gamma.
pub struct SpaceModel {
    pub space: Arc<HermitianSpace>,
    pub std_space: Arc<HermitianSpace>,
    pub model: Arc<RepModel>,
    /// T: standard coords -> (V, h) coords, h(Tx, Ty) = h_std(x, y).
    pub isometry: FMat,
    isometry_inv: FMat,
}

impl SpaceModel {
    pub fn build(
        space: &Arc<HermitianSpace>,
        psi_m: &AdditiveCharacter,
        psia_selector: u64,
    ) -> Result<SpaceModel, Error> {
        let std_space = Arc::new(crate::herm::standard_space(
            space.level.q,
            space.n,
            space.level.k,
        )?);
        let isometry = crate::herm::diagonalize(space)?;
        let isometry_inv = isometry.inverse().expect("isometry invertible");
        let model = Arc::new(RepModel::build(&std_space, psi_m, psia_selector)?);
        Ok(SpaceModel { space: space.clone(), std_space, model, isometry, isometry_inv })
    }

    /// Group isomorphism HU(V, h) -> HU_std: (v, a, u) -> (T^-1 v, a, T^-1 u T).
    pub fn transport(&self, x: &HUElem) -> HUElem {
        assert!(crate::grp::same_space(&x.space, &self.space));
        HUElem {
            space: self.std_space.clone(),
            v: self.isometry_inv.apply(&x.v),
            a: x.a.clone(),
            u: self.isometry_inv.matmul(&x.u).matmul(&self.isometry),
        }
    }

    pub fn trace_of(&self, x: &HUElem, fr_j: usize) -> Result<CycloScalar, Error> {
        let y = self.transport(x);
        self.model.trace_of(&ExtElem::new(y, fr_j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::Level;
    use crate::grp::fin;
    use crate::herm::standard_space;
    use rand::SeedableRng;

    fn setup(q: u64, n: usize, m: usize) -> (Arc<HermitianSpace>, RepModel) {
        let space = Arc::new(standard_space(q, n, m).unwrap());
        let lv1 = Arc::new(Level::new(q, 1).unwrap());
        let psi = AdditiveCharacter::canonical(&lv1, 0).unwrap();
        let psi_m = psi.lift_to_level(&space.level).unwrap();
        let model = RepModel::build(&space, &psi_m, 0).unwrap();
        (space, model)
    }

    #[test]
    fn dimension_and_central_character() {
        let (space, model) = setup(2, 1, 3);
        assert_eq!(model.dim, 8);
        for z in space.level.plus_part() {
            let rho = model.rho_h(&[FieldElem::zero(&space.field())], &z);
            let dense = rho.to_dense();
            let expected = CMat::identity(8).scale(&model.psi_m.eval(&z));
            assert_eq!(dense, expected, "central elements act by psi_m");
        }
    }

    #[test]
    fn heisenberg_traces_vanish_off_center() {
        let (space, model) = setup(2, 1, 3);
        for h in fin::enumerate_h(&space) {
            let t = model.trace_hu(&h).unwrap();
            if h.v.iter().all(|x| x.is_zero()) {
                assert_eq!(t, model.psi_m.eval(&h.a).mul(&CycloScalar::from_integer(8)));
            } else {
                assert!(t.is_zero(), "trace must vanish off the center");
            }
        }
    }

    #[test]
    fn heisenberg_model_is_a_homomorphism_exhaustively() {
        let (space, model) = setup(2, 1, 3);
        let els = fin::enumerate_h(&space);
        let ops: Vec<Monomial> =
            els.iter().map(|h| model.rho_h(&h.v, &h.a)).collect();
        for (i, x) in els.iter().enumerate() {
            for (j, y) in els.iter().enumerate() {
                let prod = x.mul(y);
                let expected = model.rho_h(&prod.v, &prod.a);
                let got = ops[i].matmul(&ops[j]);
                assert_eq!(got.to_dense(), expected.to_dense());
            }
        }
    }

    #[test]
    fn heisenberg_character_is_irreducible() {
        let (_space, model) = setup(2, 1, 3);
        assert_eq!(model.h_character_norm().unwrap(), BigRational::from(num_bigint::BigInt::from(1)));
    }

    #[test]
    fn psia_choice_does_not_change_characters() {
        let space = Arc::new(standard_space(2, 1, 3).unwrap());
        let lv1 = Arc::new(Level::new(2, 1).unwrap());
        let psi = AdditiveCharacter::canonical(&lv1, 0).unwrap();
        let psi_m = psi.lift_to_level(&space.level).unwrap();
        let m0 = RepModel::build(&space, &psi_m, 0).unwrap();
        let m1 = RepModel::build(&space, &psi_m, 1).unwrap();
        for h in fin::enumerate_h(&space) {
            assert_eq!(m0.trace_hu(&h).unwrap(), m1.trace_hu(&h).unwrap());
        }
        for u in fin::enumerate_u(&space).unwrap() {
            let x = HUElem::from_unitary(&space, u);
            assert_eq!(m0.trace_hu(&x).unwrap(), m1.trace_hu(&x).unwrap());
        }
    }

    #[test]
    fn weil_trace_law_u1() {
        // tr rho~(u) = (-1)^n (-q^m)^{N(u)}: q^{mn} at 1, else -1 on U_1.
        let (space, model) = setup(2, 1, 3);
        for u in fin::enumerate_u(&space).unwrap() {
            let x = HUElem::from_unitary(&space, u.clone());
            let t = model.trace_hu(&x).unwrap();
            if u.is_identity() {
                assert!(t.equals_integer(8));
            } else {
                assert!(t.equals_integer(-1), "got {t:?}");
            }
        }
    }

    #[test]
    fn weil_operators_multiply_on_u1_8() {
        let (space, model) = setup(2, 1, 3);
        let us = fin::enumerate_u(&space).unwrap();
        for a in &us {
            let wa = model.weil_operator(a).unwrap();
            for b in &us {
                let wb = model.weil_operator(b).unwrap();
                let wab = model.weil_operator(&a.matmul(b)).unwrap();
                assert_eq!(wa.matmul(&wb), *wab, "projective cocycle must be trivial");
            }
        }
    }

    #[test]
    fn weil_operators_intertwine() {
        let (space, model) = setup(3, 1, 1);
        let us = fin::enumerate_u(&space).unwrap();
        for u in &us {
            let w = model.weil_operator(u).unwrap();
            for h in fin::enumerate_h(&space).iter().step_by(5) {
                let lhs = w.matmul(&model.rho_h(&h.v, &h.a).to_dense());
                let hu = {
                    let mut y = h.clone();
                    y.v = u.apply(&h.v);
                    y
                };
                let rhs = model.rho_h(&hu.v, &hu.a).to_dense().matmul(&w);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn frobenius_operator_contracts() {
        let (space, model) = setup(2, 1, 3);
        // trace q^n, order m, and the conjugation property.
        assert!(model.t_sigma().trace().equals_integer(2));
        assert!(model.t_sigma_pow(3).is_identity());
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(9);
        let grp = fin::HUGroup::new(&space).unwrap();
        let t = model.t_sigma();
        let t_inv = t.inverse().unwrap();
        for _ in 0..12 {
            let g = grp.sample(&mut rng);
            let rg = model.rho_tilde(&ExtElem::new(g.clone(), 0)).unwrap();
            let rfg = model.rho_tilde(&ExtElem::new(g.frobenius_f(), 0)).unwrap();
            assert_eq!(t.matmul(&rg).matmul(&t_inv), rfg);
        }
    }

    #[test]
    fn frobenius_trace_table() {
        // tr rho~(Fr^j) = q^{n gcd(j, m)}.
        for (q, n) in [(2u64, 1usize), (2, 2)] {
            let (_space, model) = setup(q, n, 3);
            for j in 1..=3usize {
                let d = num_integer::gcd(j, 3);
                let expected = pow_u64(q, n * d) as i64;
                assert!(
                    model.t_fr_pow(j % 3).trace().equals_integer(expected),
                    "q={q} n={n} j={j}"
                );
            }
        }
    }

    #[test]
    fn extended_model_is_a_homomorphism() {
        let (space, model) = setup(2, 1, 3);
        let grp = fin::HUGroup::new(&space).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(17);
        for _ in 0..40 {
            let x = ExtElem::new(grp.sample(&mut rng), rng.gen_range(0..3));
            let y = ExtElem::new(grp.sample(&mut rng), rng.gen_range(0..3));
            let lhs = model.rho_tilde(&x.mul(&y)).unwrap();
            let rhs = model.rho_tilde(&x).unwrap().matmul(&model.rho_tilde(&y).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn closed_form_matches_matrix_traces_exhaustively() {
        let (space, model) = setup(2, 1, 3);
        for x in fin::enumerate_hu(&space).unwrap() {
            let lhs = model.trace_hu(&x).unwrap();
            let rhs = char_closed_form(&model.psi_m, &x);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn trace_of_handles_frobenius_cosets() {
        let (space, model) = setup(2, 1, 3);
        let grp = fin::HUGroup::new(&space).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(23);
        for _ in 0..25 {
            let x = ExtElem::new(grp.sample(&mut rng), rng.gen_range(0..3));
            let fast = model.trace_of(&x).unwrap();
            let slow = model.rho_tilde(&x).unwrap().trace();
            assert_eq!(fast, slow);
        }
    }

    use rand::Rng;
}
