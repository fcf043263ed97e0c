//! Matrices over exact cyclotomic scalars: dense, plus a monomial form for
//! the Heisenberg operators (one nonzero entry per column).

use crate::cyclo::CycloScalar;

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct CMat {
    pub dim: usize,
    pub data: Vec<CycloScalar>,
}

impl std::fmt::Debug for CMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMat{}x{}:", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| self[(i, j)].to_exact_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl CMat {
    pub fn zeros(dim: usize) -> CMat {
        CMat { dim, data: vec![CycloScalar::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> CMat {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = CycloScalar::one();
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                if i == j {
                    self[(i, j)] == CycloScalar::one()
                } else {
                    self[(i, j)].is_zero()
                }
            })
        })
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for k in 0..self.dim {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..self.dim {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let t = a.mul(b);
                    out[(i, j)] = out[(i, j)].add(&t);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        CMat {
            dim: self.dim,
            data: self.data.iter().zip(other.data.iter()).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn scale(&self, c: &CycloScalar) -> CMat {
        CMat { dim: self.dim, data: self.data.iter().map(|x| x.mul(c)).collect() }
    }

    pub fn trace(&self) -> CycloScalar {
        let mut acc = CycloScalar::zero();
        for i in 0..self.dim {
            acc = acc.add(&self[(i, i)]);
        }
        acc
    }

    pub fn pow(&self, e: usize) -> CMat {
        let mut acc = Self::identity(self.dim);
        for _ in 0..e {
            acc = acc.matmul(self);
        }
        acc
    }

    pub fn inverse(&self) -> Option<CMat> {
        // Gauss-Jordan over the cyclotomic field (exact).
        let n = self.dim;
        let mut m = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[(r, col)].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    m.data.swap(col * n + j, pivot * n + j);
                    inv.data.swap(col * n + j, pivot * n + j);
                }
            }
            let pinv = m[(col, col)].inverse()?;
            for j in 0..n {
                m[(col, j)] = m[(col, j)].mul(&pinv);
                inv[(col, j)] = inv[(col, j)].mul(&pinv);
            }
            for r in 0..n {
                if r != col && !m[(r, col)].is_zero() {
                    let f = m[(r, col)].clone();
                    for j in 0..n {
                        let t1 = f.mul(&m[(col, j)]);
                        m[(r, j)] = m[(r, j)].sub(&t1);
                        let t2 = f.mul(&inv[(col, j)]);
                        inv[(r, j)] = inv[(r, j)].sub(&t2);
                    }
                }
            }
        }
        Some(inv)
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = CycloScalar;
    fn index(&self, (i, j): (usize, usize)) -> &CycloScalar {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut CycloScalar {
        let d = self.dim;
        &mut self.data[i * d + j]
    }
}

/// Monomial matrix: column j has its only nonzero entry coeff[j] in row
/// perm[j], i.e. M e_j = coeff[j] e_{perm[j]}.
#[derive(Clone, Debug)]
pub struct Monomial {
    pub perm: Vec<usize>,
    pub coeff: Vec<CycloScalar>,
}

impl Monomial {
    pub fn identity(dim: usize) -> Monomial {
        Monomial { perm: (0..dim).collect(), coeff: vec![CycloScalar::one(); dim] }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// self o other (matrix product).
    pub fn matmul(&self, other: &Monomial) -> Monomial {
        let dim = self.dim();
        let mut perm = vec![0; dim];
        let mut coeff = vec![CycloScalar::zero(); dim];
        for j in 0..dim {
            // other: e_j -> c e_k; self: e_k -> d e_l
            let k = other.perm[j];
            perm[j] = self.perm[k];
            coeff[j] = other.coeff[j].mul(&self.coeff[k]);
        }
        Monomial { perm, coeff }
    }

    pub fn trace(&self) -> CycloScalar {
        let mut acc = CycloScalar::zero();
        for j in 0..self.dim() {
            if self.perm[j] == j {
                acc = acc.add(&self.coeff[j]);
            }
        }
        acc
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim());
        for j in 0..self.dim() {
            m[(self.perm[j], j)] = self.coeff[j].clone();
        }
        m
    }

    /// trace(self * dense) in O(dim^2): sum_j coeff[j] * dense[j, perm[j]].
    pub fn trace_mul(&self, dense: &CMat) -> CycloScalar {
        let mut acc = CycloScalar::zero();
        for j in 0..self.dim() {
            let d = &dense[(j, self.perm[j])];
            if !d.is_zero() {
                acc = acc.add(&self.coeff[j].mul(d));
            }
        }
        acc
    }

    /// self * dense as a dense matrix (row permutation with scaling).
    pub fn mul_dense(&self, dense: &CMat) -> CMat {
        let dim = self.dim();
        let mut out = CMat::zeros(dim);
        for k in 0..dim {
            // row k of dense lands in row perm[k], scaled by coeff[k]
            for j in 0..dim {
                let d = &dense[(k, j)];
                if !d.is_zero() {
                    out[(self.perm[k], j)] = self.coeff[k].mul(d);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::CycloScalar as C;

    fn sample_monomial() -> Monomial {
        Monomial {
            perm: vec![1, 2, 0],
            coeff: vec![C::root_of_unity(4, 1), C::one(), C::from_integer(-1)],
        }
    }

    #[test]
    fn monomial_dense_consistency() {
        let m = sample_monomial();
        let d = m.to_dense();
        let m2 = m.matmul(&m);
        assert_eq!(m2.to_dense(), d.matmul(&d));
        assert_eq!(m.trace(), d.trace());
        let dd = d.matmul(&d);
        assert_eq!(m.trace_mul(&dd), d.matmul(&dd).trace());
        assert_eq!(m.mul_dense(&dd), d.matmul(&dd));
    }

    #[test]
    fn dense_inverse() {
        let m = sample_monomial().to_dense();
        let inv = m.inverse().unwrap();
        assert!(m.matmul(&inv).is_identity());
    }
}
