//! Dense matrices over a finite field, sized for the n <= 3 unitary groups
//! and the small linear solves in hermitian-space constructions.

use std::sync::Arc;

use crate::ff::{Field, FieldElem};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<FieldElem>,
}

impl std::fmt::Debug for FMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FMat{}x{}{:?}", self.rows, self.cols, self.data.iter().map(|e| e.code()).collect::<Vec<_>>())
    }
}

impl FMat {
    pub fn zeros(field: &Arc<Field>, rows: usize, cols: usize) -> FMat {
        FMat { rows, cols, data: vec![FieldElem::zero(field); rows * cols] }
    }

    pub fn identity(field: &Arc<Field>, n: usize) -> FMat {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m[(i, i)] = FieldElem::one(field);
        }
        m
    }

    pub fn from_rows(rows_in: Vec<Vec<FieldElem>>) -> FMat {
        let rows = rows_in.len();
        let cols = rows_in[0].len();
        let data = rows_in.into_iter().flatten().collect();
        FMat { rows, cols, data }
    }

    pub fn field(&self) -> Arc<Field> {
        self.data[0].field.clone()
    }

    pub fn matmul(&self, other: &FMat) -> FMat {
        assert_eq!(self.cols, other.rows, "matrix dimension mismatch");
        let field = self.field();
        let mut out = Self::zeros(&field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    out[(i, j)] = out[(i, j)].add(&a.mul(b));
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        assert_eq!(self.cols, v.len());
        let field = self.field();
        let mut out = vec![FieldElem::zero(&field); self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self[(i, j)].is_zero() && !v[j].is_zero() {
                    out[i] = out[i].add(&self[(i, j)].mul(&v[j]));
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> FMat {
        let field = self.field();
        let mut out = Self::zeros(&field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Entry-wise p^e Frobenius.
    pub fn frobenius(&self, e: usize) -> FMat {
        FMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.frobenius(e)).collect(),
        }
    }

    /// Conjugate transpose for the level with conjugation x -> x^(p^e).
    pub fn conj_transpose(&self, e: usize) -> FMat {
        self.transpose().frobenius(e)
    }

    pub fn scale(&self, c: &FieldElem) -> FMat {
        FMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.mul(c)).collect(),
        }
    }

    pub fn add(&self, other: &FMat) -> FMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        FMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(other.data.iter()).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &FMat) -> FMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        FMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(other.data.iter()).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self[(i, j)].is_one()
                    } else {
                        self[(i, j)].is_zero()
                    }
                })
            })
    }

    /// Gaussian elimination; returns (rank, row-reduced copy, transform U)
    /// with U * self = reduced.
    fn row_reduce(&self) -> (usize, FMat, FMat) {
        let field = self.field();
        let mut m = self.clone();
        let mut u = Self::identity(&field, self.rows);
        let mut rank = 0;
        for col in 0..self.cols {
            let pivot = (rank..self.rows).find(|&r| !m[(r, col)].is_zero());
            let Some(pr) = pivot else { continue };
            m.swap_rows(rank, pr);
            u.swap_rows(rank, pr);
            let inv = m[(rank, col)].inv();
            m.scale_row(rank, &inv);
            u.scale_row(rank, &inv);
            for r in 0..self.rows {
                if r != rank && !m[(r, col)].is_zero() {
                    let f = m[(r, col)].clone();
                    m.sub_scaled_row(r, rank, &f);
                    u.sub_scaled_row(r, rank, &f);
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        (rank, m, u)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn scale_row(&mut self, r: usize, c: &FieldElem) {
        for j in 0..self.cols {
            self[(r, j)] = self[(r, j)].mul(c);
        }
    }

    fn sub_scaled_row(&mut self, r: usize, src: usize, f: &FieldElem) {
        for j in 0..self.cols {
            let t = self[(src, j)].mul(f);
            self[(r, j)] = self[(r, j)].sub(&t);
        }
    }

    pub fn rank(&self) -> usize {
        self.row_reduce().0
    }

    pub fn inverse(&self) -> Option<FMat> {
        assert_eq!(self.rows, self.cols);
        let (rank, _, u) = self.row_reduce();
        if rank < self.rows {
            return None;
        }
        Some(u)
    }

    /// Basis of the right kernel.
    pub fn kernel_basis(&self) -> Vec<Vec<FieldElem>> {
        let field = self.field();
        let (_, m, _) = self.row_reduce();
        // Identify pivot columns.
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row < self.rows && m[(row, col)].is_one()
                && (0..self.rows).all(|r| r == row || m[(r, col)].is_zero())
            {
                pivots.push(col);
                row += 1;
            }
        }
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &c in &pivots {
                v[c] = true;
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if is_pivot[free] {
                continue;
            }
            let mut vecx = vec![FieldElem::zero(&field); self.cols];
            vecx[free] = FieldElem::one(&field);
            for (r, &pc) in pivots.iter().enumerate() {
                vecx[pc] = m[(r, free)].neg();
            }
            basis.push(vecx);
        }
        basis
    }

    /// One solution of self * x = b, or None.
    pub fn solve(&self, b: &[FieldElem]) -> Option<Vec<FieldElem>> {
        assert_eq!(b.len(), self.rows);
        let field = self.field();
        let (_, m, u) = self.row_reduce();
        let ub = u.apply(b);
        let mut x = vec![FieldElem::zero(&field); self.cols];
        let mut row = 0;
        for col in 0..self.cols {
            if row < self.rows && m[(row, col)].is_one()
                && (0..self.rows).all(|r| r == row || m[(r, col)].is_zero())
            {
                x[col] = ub[row].clone();
                row += 1;
            }
        }
        // Consistency: remaining rows of reduced system must have zero rhs.
        for r in row..self.rows {
            if !ub[r].is_zero() {
                return None;
            }
        }
        // Verify (the pivot detection above is conservative).
        let check = self.apply(&x);
        if check.iter().zip(b.iter()).all(|(l, r)| l == r) {
            Some(x)
        } else {
            None
        }
    }

    pub fn trace(&self) -> FieldElem {
        assert_eq!(self.rows, self.cols);
        let mut acc = FieldElem::zero(&self.field());
        for i in 0..self.rows {
            acc = acc.add(&self[(i, i)]);
        }
        acc
    }

    /// Characteristic polynomial by Faddeev-LeVerrier is awkward in small
    /// characteristic; use expansion over permutations for n <= 3 instead.
    pub fn char_poly(&self) -> Vec<FieldElem> {
        let n = self.rows;
        assert_eq!(n, self.cols);
        let field = self.field();
        assert!(n <= 4, "char_poly implemented for n <= 4");
        // det(xI - A) expanded symbolically: represent polynomials as vectors.
        let poly_mul = |a: &Vec<FieldElem>, b: &Vec<FieldElem>| -> Vec<FieldElem> {
            let mut out = vec![FieldElem::zero(&field); a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] = out[i + j].add(&x.mul(y));
                }
            }
            out
        };
        let poly_add = |a: &Vec<FieldElem>, b: &Vec<FieldElem>| -> Vec<FieldElem> {
            let n = a.len().max(b.len());
            let z = FieldElem::zero(&field);
            (0..n)
                .map(|i| a.get(i).unwrap_or(&z).add(b.get(i).unwrap_or(&z)))
                .collect()
        };
        // Entries of xI - A as degree-1 polynomials.
        let entry = |i: usize, j: usize| -> Vec<FieldElem> {
            if i == j {
                vec![self[(i, j)].neg(), FieldElem::one(&field)]
            } else {
                vec![self[(i, j)].neg()]
            }
        };
        // Leibniz expansion over S_n.
        let perms: Vec<(Vec<usize>, bool)> = permutations(n);
        let mut acc = vec![FieldElem::zero(&field)];
        for (perm, even) in perms {
            let mut term = vec![FieldElem::one(&field)];
            for (i, &pi) in perm.iter().enumerate() {
                term = poly_mul(&term, &entry(i, pi));
            }
            if !even {
                term = term.iter().map(|c| c.neg()).collect();
            }
            acc = poly_add(&acc, &term);
        }
        acc
    }
}

fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute(&mut items, 0, true, &mut out);
    out
}

fn permute(items: &mut Vec<usize>, k: usize, even: bool, out: &mut Vec<(Vec<usize>, bool)>) {
    if k == items.len() {
        out.push((items.clone(), even));
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        let flip = i != k;
        permute(items, k + 1, even ^ flip, out);
        items.swap(k, i);
    }
}

impl std::ops::Index<(usize, usize)> for FMat {
    type Output = FieldElem;
    fn index(&self, (i, j): (usize, usize)) -> &FieldElem {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for FMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut FieldElem {
        let c = self.cols;
        &mut self.data[i * c + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::build_field;

    #[test]
    fn inverse_and_solve_over_f9() {
        let f9 = build_field(3, 2).unwrap();
        let g = FieldElem::generator(&f9);
        // det = (g + 2) - g^2 = g (g^2 = -1 in this model), nonzero.
        let m = FMat::from_rows(vec![
            vec![FieldElem::one(&f9), g.clone()],
            vec![g.clone(), g.add(&FieldElem::from_prime(&f9, 2))],
        ]);
        let inv = m.inverse().unwrap();
        assert!(m.matmul(&inv).is_identity());
        let b = vec![g.clone(), FieldElem::one(&f9)];
        let x = m.solve(&b).unwrap();
        assert_eq!(m.apply(&x), b);
    }

    #[test]
    fn kernel_of_singular_matrix() {
        let f4 = build_field(2, 2).unwrap();
        let one = FieldElem::one(&f4);
        let m = FMat::from_rows(vec![vec![one.clone(), one.clone()], vec![one.clone(), one.clone()]]);
        assert_eq!(m.rank(), 1);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        assert!(m.apply(&k[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn char_poly_of_companion_matrix() {
        let f2 = build_field(2, 1).unwrap();
        let one = FieldElem::one(&f2);
        let zero = FieldElem::zero(&f2);
        // Companion of x^2 + x + 1 over F_2.
        let m = FMat::from_rows(vec![
            vec![zero.clone(), one.clone()],
            vec![one.clone(), one.clone()],
        ]);
        let cp = m.char_poly();
        assert_eq!(
            cp.iter().map(|c| c.code()).collect::<Vec<_>>(),
            vec![1, 1, 1]
        );
    }
}
