//! Dense linear algebra over F_p for small p, with a packed-bitset fast path
//! for p = 2. Used by the fixed-point counting and Lang-witness engines,
//! where systems reach a few thousand variables.

/// Row-major matrix over F_p. For p = 2 rows are bit-packed u64 words.
pub enum FpMat {
    Bit { rows: usize, cols: usize, words: usize, data: Vec<u64> },
    Byte { p: u64, rows: usize, cols: usize, data: Vec<u8> },
}

impl FpMat {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> FpMat {
        if p == 2 {
            let words = cols.div_ceil(64);
            FpMat::Bit { rows, cols, words, data: vec![0; rows * words] }
        } else {
            assert!(p < 256, "byte matrices require p < 256");
            FpMat::Byte { p, rows, cols, data: vec![0; rows * cols] }
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            FpMat::Bit { rows, .. } => *rows,
            FpMat::Byte { rows, .. } => *rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            FpMat::Bit { cols, .. } => *cols,
            FpMat::Byte { cols, .. } => *cols,
        }
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        match self {
            FpMat::Bit { words, data, .. } => (data[r * words + c / 64] >> (c % 64)) & 1,
            FpMat::Byte { cols, data, .. } => data[r * cols + c] as u64,
        }
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        match self {
            FpMat::Bit { words, data, .. } => {
                let w = r * *words + c / 64;
                let bit = 1u64 << (c % 64);
                if v & 1 == 1 {
                    data[w] |= bit;
                } else {
                    data[w] &= !bit;
                }
            }
            FpMat::Byte { p, cols, data, .. } => {
                data[r * *cols + c] = (v % *p) as u8;
            }
        }
    }

    fn p(&self) -> u64 {
        match self {
            FpMat::Bit { .. } => 2,
            FpMat::Byte { p, .. } => *p,
        }
    }

    /// row[r] -= f * row[src] (in place), f != 0, r != src.
    fn row_op(&mut self, r: usize, src: usize, f: u64) {
        match self {
            FpMat::Bit { words, data, .. } => {
                let w = *words;
                let (a, b) = if r < src {
                    let (lo, hi) = data.split_at_mut(src * w);
                    (&mut lo[r * w..r * w + w], &hi[..w])
                } else {
                    let (lo, hi) = data.split_at_mut(r * w);
                    (&mut hi[..w], &lo[src * w..src * w + w])
                };
                for i in 0..w {
                    a[i] ^= b[i];
                }
            }
            FpMat::Byte { p, cols, data, .. } => {
                let c = *cols;
                let p = *p;
                let (a, b) = if r < src {
                    let (lo, hi) = data.split_at_mut(src * c);
                    (&mut lo[r * c..(r + 1) * c], &hi[..c])
                } else {
                    let (lo, hi) = data.split_at_mut(r * c);
                    (&mut hi[..c], &lo[src * c..(src + 1) * c])
                };
                let neg_f = p - f;
                for i in 0..c {
                    a[i] = ((a[i] as u64 + neg_f * b[i] as u64) % p) as u8;
                }
            }
        }
    }

    fn scale_row(&mut self, r: usize, f: u64) {
        if let FpMat::Byte { p, cols, data, .. } = self {
            for i in 0..*cols {
                data[r * *cols + i] = ((data[r * *cols + i] as u64 * f) % *p) as u8;
            }
        }
        // p = 2: scaling is always by 1.
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        match self {
            FpMat::Bit { words, data, .. } => {
                for i in 0..*words {
                    data.swap(a * *words + i, b * *words + i);
                }
            }
            FpMat::Byte { cols, data, .. } => {
                for i in 0..*cols {
                    data.swap(a * *cols + i, b * *cols + i);
                }
            }
        }
    }
}

impl FpMat {
    pub fn identity(p: u64, n: usize) -> FpMat {
        let mut m = FpMat::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// out[r] = sum_c M[r][c] v[c] over F_p.
    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        match self {
            FpMat::Bit { rows, cols, words, data } => {
                assert_eq!(v.len(), *cols);
                let mut packed = vec![0u64; *words];
                for (c, &x) in v.iter().enumerate() {
                    if x & 1 == 1 {
                        packed[c / 64] |= 1 << (c % 64);
                    }
                }
                (0..*rows)
                    .map(|r| {
                        let mut acc = 0u32;
                        for w in 0..*words {
                            acc ^= (data[r * words + w] & packed[w]).count_ones();
                        }
                        (acc & 1) as u64
                    })
                    .collect()
            }
            FpMat::Byte { p, rows, cols, data } => {
                assert_eq!(v.len(), *cols);
                (0..*rows)
                    .map(|r| {
                        let mut acc = 0u64;
                        for c in 0..*cols {
                            let m = data[r * cols + c] as u64;
                            if m != 0 && v[c] != 0 {
                                acc += m * v[c];
                            }
                        }
                        acc % p
                    })
                    .collect()
            }
        }
    }

    /// self * other.
    pub fn matmul(&self, other: &FpMat) -> FpMat {
        let p = self.p();
        let (n, k) = (self.rows(), self.cols());
        let m = other.cols();
        assert_eq!(k, other.rows());
        let mut out = FpMat::zeros(p, n, m);
        match (&mut out, other) {
            (
                FpMat::Bit { words, data: out_data, .. },
                FpMat::Bit { words: ow, data: odata, .. },
            ) => {
                for r in 0..n {
                    for c in 0..k {
                        if self.get(r, c) == 1 {
                            for w in 0..*ow {
                                out_data[r * *words + w] ^= odata[c * ow + w];
                            }
                        }
                    }
                }
            }
            _ => {
                for r in 0..n {
                    for c in 0..k {
                        let f = self.get(r, c);
                        if f == 0 {
                            continue;
                        }
                        for j in 0..m {
                            let v = (out.get(r, j) + f * other.get(c, j)) % p;
                            out.set(r, j, v);
                        }
                    }
                }
            }
        }
        out
    }

    /// self += scalar * other.
    pub fn add_scaled(&mut self, other: &FpMat, scalar: u64) {
        let p = self.p();
        let s = scalar % p;
        if s == 0 {
            return;
        }
        match (self, other) {
            (
                FpMat::Bit { data, .. },
                FpMat::Bit { data: odata, .. },
            ) => {
                for (a, b) in data.iter_mut().zip(odata.iter()) {
                    *a ^= b;
                }
            }
            (me, other) => {
                for r in 0..me.rows() {
                    for c in 0..me.cols() {
                        let v = (me.get(r, c) + s * other.get(r, c)) % p;
                        me.set(r, c, v);
                    }
                }
            }
        }
    }
}

fn mod_inv(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Reduced row echelon form, pivoting only on columns < `pivot_limit`.
/// Columns at and beyond the limit are carried along (augmented block).
pub struct Rref {
    pub mat: FpMat,
    pub pivots: Vec<usize>,
}

pub fn rref_with_limit(mut m: FpMat, pivot_limit: usize) -> Rref {
    let rows = m.rows();
    let p = m.p();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..pivot_limit {
        let mut pivot = None;
        for r in rank..rows {
            if m.get(r, col) != 0 {
                pivot = Some(r);
                break;
            }
        }
        let Some(pr) = pivot else { continue };
        m.swap_rows(rank, pr);
        let inv = mod_inv(m.get(rank, col), p);
        if inv != 1 {
            m.scale_row(rank, inv);
        }
        for r in 0..rows {
            if r != rank {
                let f = m.get(r, col);
                if f != 0 {
                    m.row_op(r, rank, f);
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    Rref { mat: m, pivots }
}

pub fn rref(m: FpMat) -> Rref {
    let lim = m.cols();
    rref_with_limit(m, lim)
}

/// Affine solve A x = b where A is given by its columns over F_p.
/// Returns one particular solution, or None if inconsistent.
pub fn solve_from_columns(p: u64, _dim: usize, cols: &[Vec<u64>], rhs: &[u64]) -> Option<Vec<u64>> {
    let sys = LinearSystem::from_columns(p, cols, rhs.len());
    sys.solve(rhs)
}

/// A factored F_p linear system A x = b, reusable across right-hand sides.
///
/// Internally the RREF of [A | I] with pivots restricted to the A block; the
/// identity block records row operations, so each new rhs costs one
/// matrix-vector product.
pub struct LinearSystem {
    p: u64,
    n_rows: usize,
    n_cols: usize,
    rref: Rref,
}

impl LinearSystem {
    /// Build from the images of basis vectors (columns of A).
    pub fn from_columns(p: u64, cols: &[Vec<u64>], n_rows: usize) -> LinearSystem {
        let n_cols = cols.len();
        let mut m = FpMat::zeros(p, n_rows, n_cols + n_rows);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), n_rows);
            for (i, &v) in col.iter().enumerate() {
                if v % p != 0 {
                    m.set(i, j, v % p);
                }
            }
        }
        for i in 0..n_rows {
            m.set(i, n_cols + i, 1);
        }
        let rref = rref_with_limit(m, n_cols);
        LinearSystem { p, n_rows, n_cols, rref }
    }

    pub fn rank(&self) -> usize {
        self.rref.pivots.len()
    }

    /// Dot the recorded row-operation block of `row` with rhs.
    fn reduced_rhs(&self, row: usize, rhs: &[u64]) -> u64 {
        let p = self.p;
        let mut acc = 0u64;
        match &self.rref.mat {
            FpMat::Bit { words, data, .. } => {
                // Augmented block starts at bit n_cols.
                for (i, &r) in rhs.iter().enumerate() {
                    if r & 1 == 1 {
                        let c = self.n_cols + i;
                        acc ^= (data[row * words + c / 64] >> (c % 64)) & 1;
                    }
                }
            }
            FpMat::Byte { cols, data, .. } => {
                for (i, &r) in rhs.iter().enumerate() {
                    if r % p != 0 {
                        acc = (acc + data[row * cols + self.n_cols + i] as u64 * (r % p)) % p;
                    }
                }
            }
        }
        acc
    }

    /// Particular solution, or None if inconsistent.
    pub fn solve(&self, rhs: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(rhs.len(), self.n_rows);
        let rank = self.rank();
        // Rows below the rank have zero A-block; they are consistency tests.
        for row in rank..self.n_rows {
            if self.reduced_rhs(row, rhs) != 0 {
                return None;
            }
        }
        let mut x = vec![0u64; self.n_cols];
        for (row, &pc) in self.rref.pivots.iter().enumerate() {
            x[pc] = self.reduced_rhs(row, rhs);
        }
        Some(x)
    }

    pub fn is_consistent(&self, rhs: &[u64]) -> bool {
        let rank = self.rank();
        (rank..self.n_rows).all(|row| self.reduced_rhs(row, rhs) == 0)
    }

    /// Kernel basis of A.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let p = self.p;
        let pivots = &self.rref.pivots;
        let mut is_pivot = vec![false; self.n_cols];
        for &c in pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in 0..self.n_cols {
            if is_pivot[free] {
                continue;
            }
            let mut v = vec![0u64; self.n_cols];
            v[free] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                let coeff = self.rref.mat.get(row, free);
                if coeff != 0 {
                    v[pc] = (p - coeff) % p;
                }
            }
            basis.push(v);
        }
        basis
    }
}

/// Iterate all F_p combinations of a basis added to a particular vector.
pub fn for_each_affine(p: u64, particular: &[u64], basis: &[Vec<u64>], mut f: impl FnMut(&[u64])) {
    let dim = basis.len();
    let n = particular.len();
    let mut digits = vec![0u64; dim];
    let mut cur = particular.to_vec();
    loop {
        f(&cur);
        let mut pos = 0;
        loop {
            if pos == dim {
                return;
            }
            digits[pos] += 1;
            for (i, c) in cur.iter_mut().enumerate().take(n) {
                *c = (*c + basis[pos][i]) % p;
            }
            if digits[pos] < p {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_kernel_over_f2() {
        // x + y = 1, y + z = 0 over F_2
        let cols = vec![vec![1, 0], vec![1, 1], vec![0, 1]];
        let sys = LinearSystem::from_columns(2, &cols, 2);
        let x = sys.solve(&[1, 0]).unwrap();
        assert_eq!((x[0] + x[1]) % 2, 1);
        assert_eq!((x[1] + x[2]) % 2, 0);
        assert_eq!(sys.kernel_basis().len(), 1);
        let k = &sys.kernel_basis()[0];
        assert_eq!((k[0] + k[1]) % 2, 0);
        assert_eq!((k[1] + k[2]) % 2, 0);
    }

    #[test]
    fn inconsistent_system_detected() {
        // One variable, equations x = rhs0, x = rhs1.
        let cols = vec![vec![1, 1]];
        let sys = LinearSystem::from_columns(3, &cols, 2);
        assert!(sys.solve(&[0, 1]).is_none());
        let x = sys.solve(&[2, 2]).unwrap();
        assert_eq!(x[0], 2);
    }

    #[test]
    fn solutions_verify_over_f3() {
        // Random-ish 4x3 system over F_3, checked by substitution.
        let cols = vec![vec![1, 2, 0, 1], vec![2, 1, 1, 0], vec![0, 2, 2, 2]];
        let sys = LinearSystem::from_columns(3, &cols, 4);
        let apply = |x: &[u64]| -> Vec<u64> {
            (0..4)
                .map(|i| cols.iter().zip(x.iter()).map(|(c, &xv)| c[i] * xv).sum::<u64>() % 3)
                .collect()
        };
        for rhs in [vec![0, 0, 0, 0], apply(&[1, 2, 1])] {
            if let Some(x) = sys.solve(&rhs) {
                assert_eq!(apply(&x), rhs);
            }
        }
        for k in sys.kernel_basis() {
            assert_eq!(apply(&k), vec![0, 0, 0, 0]);
        }
    }

    #[test]
    fn affine_enumeration_covers_p_to_dim() {
        let basis = vec![vec![1, 0, 0], vec![0, 1, 1]];
        let mut count = 0;
        for_each_affine(3, &[0, 0, 1], &basis, |_| count += 1);
        assert_eq!(count, 9);
    }
}
