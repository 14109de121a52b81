//! Polynomials over the prime field F_p, with coefficients stored low
//! degree first as `u64` residues. Only what the field constructions need.

pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + p - y) % p;
    }
    trim(&mut out);
    out
}

pub(crate) fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    trim(&mut out);
    out
}

/// Remainder and quotient of `a` by a nonzero `b`.
pub(crate) fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p);
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![0u64; r.len() - db];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = mul_mod(*r.last().unwrap(), lead_inv, p);
        q[shift] = c;
        for (j, &bj) in b.iter().enumerate() {
            r[shift + j] = (r[shift + j] + p - mul_mod(c, bj, p)) % p;
        }
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

pub(crate) fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    divrem(a, m, p).1
}

fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Inverse of `a` modulo the irreducible `m`; `a` must be nonzero mod `m`.
pub(crate) fn inv_mod_poly(a: &[u64], m: &[u64], p: u64) -> Option<Vec<u64>> {
    // extended Euclid: track s with s*a = r (mod m)
    let mut r0 = m.to_vec();
    let mut r1 = rem(a, m, p);
    let mut s0: Vec<u64> = Vec::new();
    let mut s1: Vec<u64> = vec![1];
    trim(&mut r0);
    if r1.is_empty() {
        return None;
    }
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s2 = sub(&s0, &mul(&q, &s1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
    }
    if r0.len() != 1 {
        return None;
    }
    let c = inv_mod(r0[0], p);
    let mut out: Vec<u64> = s0.iter().map(|&x| mul_mod(x, c, p)).collect();
    out = rem(&out, m, p);
    Some(out)
}

fn powmod_poly(base: &[u64], mut exp: u128, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = rem(base, m, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = rem(&mul(&acc, &b, p), m, p);
        }
        b = rem(&mul(&b, &b, p), m, p);
        exp >>= 1;
    }
    acc
}

/// `t^(p^k) mod m`, by repeated p-th powering.
fn frob_power_of_t(m: &[u64], p: u64, k: usize) -> Vec<u64> {
    let mut x = rem(&[0, 1], m, p);
    for _ in 0..k {
        x = powmod_poly(&x, p as u128, m, p);
    }
    x
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's irreducibility test for a monic polynomial of degree >= 1.
pub(crate) fn is_irreducible(m: &[u64], p: u64) -> bool {
    let f = m.len() - 1;
    if f == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    let full = frob_power_of_t(m, p, f);
    if sub(&full, &rem(&x, m, p), p) != Vec::<u64>::new() {
        return false;
    }
    for q in prime_divisors(f) {
        let h = frob_power_of_t(m, p, f / q);
        let d = gcd(m, &sub(&h, &x, p), p);
        if d.len() != 1 {
            return false;
        }
    }
    true
}

/// The first monic irreducible polynomial of degree `f` over F_p when the
/// non-leading coefficients `(c_{f-1}, ..., c_0)` are read lexicographically.
/// Returned low degree first, including the leading 1.
pub(crate) fn smallest_irreducible(p: u64, f: usize) -> Vec<u64> {
    let mut digits = vec![0u64; f];
    loop {
        let mut cand = digits.clone();
        cand.push(1);
        if is_irreducible(&cand, p) {
            return cand;
        }
        // increment with c_0 as the least significant digit
        let mut i = 0;
        loop {
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
            i += 1;
            assert!(i < f, "no irreducible polynomial found");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_irreducibles() {
        assert_eq!(smallest_irreducible(2, 1), vec![0, 1]);
        assert_eq!(smallest_irreducible(2, 2), vec![1, 1, 1]);
        assert_eq!(smallest_irreducible(3, 2), vec![1, 0, 1]);
        assert_eq!(smallest_irreducible(2, 3), vec![1, 1, 0, 1]);
        assert!(!is_irreducible(&[1, 0, 1], 2));
        assert!(!is_irreducible(&[1, 0, 1], 5));
    }

    #[test]
    fn poly_inverse() {
        let m = smallest_irreducible(5, 3);
        let a = vec![2, 3, 1];
        let inv = inv_mod_poly(&a, &m, 5).unwrap();
        assert_eq!(rem(&mul(&a, &inv, 5), &m, 5), vec![1]);
    }
}
