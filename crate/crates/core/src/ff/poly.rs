//! Dense polynomial arithmetic over F_p (small prime p), used to construct
//! defining polynomials and test irreducibility.

/// Coefficients are little-endian vectors of residues mod p.
pub type Poly = Vec<u64>;

pub fn trim(p: &mut Poly) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

pub fn deg(p: &Poly) -> usize {
    p.len() - 1
}

pub fn is_zero(p: &Poly) -> bool {
    p.iter().all(|&c| c == 0)
}

pub fn add(a: &Poly, b: &Poly, p: u64) -> Poly {
    let n = a.len().max(b.len());
    let mut out = vec![0; n];
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0);
        out[i] = x % p;
    }
    trim(&mut out);
    out
}

pub fn sub(a: &Poly, b: &Poly, p: u64) -> Poly {
    let n = a.len().max(b.len());
    let mut out = vec![0; n];
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0) % p;
        out[i] = x % p;
    }
    trim(&mut out);
    out
}

pub fn mul(a: &Poly, b: &Poly, p: u64) -> Poly {
    if is_zero(a) || is_zero(b) {
        return vec![0];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(&mut out);
    out
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // Fermat: p is prime and a != 0 mod p.
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// Remainder of `a` modulo `m` (m nonzero).
pub fn rem(a: &Poly, m: &Poly, p: u64) -> Poly {
    let mut r = a.clone();
    trim(&mut r);
    let dm = deg(m);
    if dm == 0 {
        return vec![0];
    }
    let lead_inv = mod_inverse(m[dm], p);
    while !is_zero(&r) && deg(&r) >= dm {
        let dr = deg(&r);
        let c = r[dr] * lead_inv % p;
        for (i, &mc) in m.iter().enumerate() {
            let idx = dr - dm + i;
            r[idx] = (r[idx] + p - c * mc % p) % p;
        }
        trim(&mut r);
    }
    r
}

pub fn gcd(a: &Poly, b: &Poly, p: u64) -> Poly {
    let mut x = a.clone();
    let mut y = b.clone();
    trim(&mut x);
    trim(&mut y);
    while !is_zero(&y) {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    // Normalize monic.
    if !is_zero(&x) {
        let inv = mod_inverse(*x.last().unwrap(), p);
        for c in x.iter_mut() {
            *c = *c * inv % p;
        }
    }
    x
}

/// x^(p^reps) mod m, computed by iterated p-th powers.
pub fn frobenius_power_x(m: &Poly, p: u64, reps: usize) -> Poly {
    let mut cur = vec![0, 1]; // x
    for _ in 0..reps {
        cur = pow_mod(&cur, p, m, p);
    }
    cur
}

/// a^e mod m.
pub fn pow_mod(a: &Poly, mut e: u64, m: &Poly, p: u64) -> Poly {
    let mut acc = vec![1];
    let mut base = rem(a, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = rem(&mul(&acc, &base, p), m, p);
        }
        base = rem(&mul(&base, &base, p), m, p);
        e >>= 1;
    }
    acc
}

/// Irreducibility over F_p of a monic polynomial of degree k >= 1.
///
/// f is irreducible iff x^(p^k) = x mod f and gcd(f, x^(p^(k/l)) - x) = 1 for
/// every prime l | k.
pub fn is_irreducible(f: &Poly, p: u64) -> bool {
    let k = deg(f);
    if k == 0 {
        return false;
    }
    if k == 1 {
        return true;
    }
    let xpk = frobenius_power_x(f, p, k);
    let x = vec![0, 1];
    if sub(&xpk, &x, p) != vec![0] {
        return false;
    }
    for l in crate::cyclo::prime_factors(k as u64) {
        let j = k / l as usize;
        let xpj = frobenius_power_x(f, p, j);
        let d = sub(&xpj, &x, p);
        let g = gcd(f, &d, p);
        if deg(&g) != 0 {
            return false;
        }
    }
    true
}

/// The lexicographically smallest monic irreducible of degree k over F_p,
/// comparing coefficient vectors high-degree-first.
pub fn smallest_irreducible(p: u64, k: usize) -> Poly {
    // digits[j] holds c_{k-1-j}, so digits[0] = c_{k-1} is most significant
    // and the counter increments c_0 fastest.
    let mut digits = vec![0u64; k];
    loop {
        let mut f: Poly = Vec::with_capacity(k + 1);
        for i in 0..k {
            f.push(digits[k - 1 - i]);
        }
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
        let mut pos = k;
        loop {
            assert!(pos > 0, "no irreducible polynomial of degree {k} over F_{p}");
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < p {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Evaluate f at a point given arithmetic closures (used for root scans in
/// extension fields).
pub fn eval_with<T: Clone>(
    f: &Poly,
    x: &T,
    zero: T,
    from_base: &dyn Fn(u64) -> T,
    add: &dyn Fn(&T, &T) -> T,
    mul: &dyn Fn(&T, &T) -> T,
) -> T {
    let mut acc = zero;
    for &c in f.iter().rev() {
        acc = mul(&acc, x);
        acc = add(&acc, &from_base(c));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_irreducibles_over_f2_and_f3() {
        // Degree 1 over F_2: x itself.
        assert_eq!(smallest_irreducible(2, 1), vec![0, 1]);
        // Degree 2 over F_2: x^2 + x + 1 is the only irreducible quadratic.
        assert_eq!(smallest_irreducible(2, 2), vec![1, 1, 1]);
        // Degree 2 over F_3: exhaustive oracle.
        let mut found = None;
        'outer: for c1 in 0..3u64 {
            for c0 in 0..3u64 {
                let f = vec![c0, c1, 1];
                if is_irreducible(&f, 3) {
                    found = Some(f);
                    break 'outer;
                }
            }
        }
        // High-degree-first ordering scans c1 before c0, matching the loop above.
        assert_eq!(smallest_irreducible(3, 2), found.unwrap());
        assert_eq!(smallest_irreducible(3, 2), vec![1, 0, 1]); // x^2 + 1
    }

    #[test]
    fn irreducibility_rejects_products() {
        // (x+1)^2 = x^2 + 2x + 1 over F_3
        assert!(!is_irreducible(&vec![1, 2, 1], 3));
        // x^2 over F_2
        assert!(!is_irreducible(&vec![0, 0, 1], 2));
        // x^6 + x + 1 over F_2 is irreducible (standard table entry).
        assert!(is_irreducible(&vec![1, 1, 0, 0, 0, 0, 1], 2));
    }
}
