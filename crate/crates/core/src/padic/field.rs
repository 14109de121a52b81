use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::fp;
use crate::error::{Error, Result};

/// Unramified extension Q_q of Q_p, q = p^f, modelled as
/// `(Z/p^N)[t]/(g)` for the canonical defining polynomial `g`.
///
/// `prec` (N) is the number of p-adic digits carried by every unit; exact
/// inputs are created with N digits and arithmetic only ever loses digits.
pub struct FieldSpec {
    p: u64,
    f: usize,
    prec: u32,
    /// monic, low degree first, length f + 1, coefficients in [0, p)
    modulus: Vec<BigInt>,
    powers: Vec<BigInt>,
    /// column j holds the coordinates of sigma(t^j) mod p^N
    sigma: Vec<Vec<BigInt>>,
    /// coordinates of sigma^{-1}(t^j) = sigma^{f-1}(t^j)
    sigma_inv: Vec<Vec<BigInt>>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldSpec(p={}, f={}, N={})", self.p, self.f, self.prec)
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.f == other.f && self.prec == other.prec
    }
}

impl Eq for FieldSpec {}

impl FieldSpec {
    pub fn new(p: u64, f: usize, prec: u32) -> Result<Arc<FieldSpec>> {
        if !fp::is_prime(p) {
            return Err(Error::InvalidFieldSpec(format!("{p} is not prime")));
        }
        if f == 0 {
            return Err(Error::InvalidFieldSpec("degree f must be >= 1".into()));
        }
        if prec == 0 {
            return Err(Error::InvalidFieldSpec("precision N must be >= 1".into()));
        }
        let g = fp::smallest_irreducible(p, f);
        let modulus: Vec<BigInt> = g.iter().map(|&c| BigInt::from(c)).collect();
        let pb = BigInt::from(p);
        let mut powers = Vec::with_capacity(prec as usize + 1);
        let mut acc = BigInt::one();
        for _ in 0..=prec {
            powers.push(acc.clone());
            acc *= &pb;
        }
        let mut spec = FieldSpec { p, f, prec, modulus, powers, sigma: Vec::new(), sigma_inv: Vec::new() };
        let sigma_t = spec.lift_frobenius_of_t()?;
        spec.sigma = spec.power_table(&sigma_t);
        // sigma^{-1}(t) = sigma^{f-1}(t)
        let mut s = spec.coords_of_t();
        for _ in 0..f.saturating_sub(1) {
            s = spec.apply_table(&spec.sigma, &s, prec);
        }
        spec.sigma_inv = spec.power_table(&s);
        Ok(Arc::new(spec))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.f
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Defining polynomial g, low degree first, including the leading 1.
    pub fn modulus(&self) -> &[BigInt] {
        &self.modulus
    }

    /// Q_p at the same precision.
    pub fn prime_subfield(&self) -> Arc<FieldSpec> {
        FieldSpec::new(self.p, 1, self.prec).expect("p and N already validated")
    }

    pub fn same_as(&self, other: &FieldSpec) -> bool {
        self == other
    }

    pub(crate) fn p_big(&self) -> BigInt {
        BigInt::from(self.p)
    }

    /// p^k for k >= 0.
    pub(crate) fn pow(&self, k: u32) -> BigInt {
        if (k as usize) < self.powers.len() {
            self.powers[k as usize].clone()
        } else {
            num_traits::pow(self.p_big(), k as usize)
        }
    }

    fn coords_of_t(&self) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.f];
        if self.f == 1 {
            // t = -g_0
            v[0] = (-&self.modulus[0]).mod_floor(&self.pow(self.prec));
        } else {
            v[1] = BigInt::one();
        }
        v
    }

    pub(crate) fn reduce(&self, v: &mut [BigInt], k: u32) {
        let m = self.pow(k);
        for c in v.iter_mut() {
            if c.is_negative() || *c >= m {
                *c = c.mod_floor(&m);
            }
        }
    }

    /// Product in (Z/p^k)[t]/(g).
    pub(crate) fn mul_res(&self, a: &[BigInt], b: &[BigInt], k: u32) -> Vec<BigInt> {
        let f = self.f;
        if f == 1 {
            let mut v = vec![&a[0] * &b[0]];
            self.reduce(&mut v, k);
            return v;
        }
        let mut prod = vec![BigInt::zero(); 2 * f - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        // reduce by the monic modulus from the top
        for d in (f..prod.len()).rev() {
            let c = std::mem::take(&mut prod[d]);
            if c.is_zero() {
                continue;
            }
            for i in 0..f {
                prod[d - f + i] -= &c * &self.modulus[i];
            }
        }
        prod.truncate(f);
        self.reduce(&mut prod, k);
        prod
    }

    fn add_res(&self, a: &[BigInt], b: &[BigInt], k: u32) -> Vec<BigInt> {
        let mut v: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(&mut v, k);
        v
    }

    fn scale_res(&self, a: &[BigInt], c: &BigInt, k: u32) -> Vec<BigInt> {
        let mut v: Vec<BigInt> = a.iter().map(|x| x * c).collect();
        self.reduce(&mut v, k);
        v
    }

    /// Inverse of a unit of (Z/p^k)[t]/(g): invert mod p, then Newton-lift.
    pub(crate) fn inv_res(&self, a: &[BigInt], k: u32) -> Option<Vec<BigInt>> {
        let p = self.p;
        let pb = self.p_big();
        let a_mod_p: Vec<u64> = a.iter().map(|c| c.mod_floor(&pb).try_into().unwrap_or(0u64)).collect();
        let m: Vec<u64> = self.modulus.iter().map(|c| c.try_into().unwrap_or(0u64)).collect();
        let inv = fp::inv_mod_poly(&a_mod_p, &m, p)?;
        let mut y: Vec<BigInt> = (0..self.f).map(|i| BigInt::from(inv.get(i).copied().unwrap_or(0))).collect();
        let mut have = 1u32;
        let two = {
            let mut v = vec![BigInt::zero(); self.f];
            v[0] = BigInt::from(2);
            v
        };
        while have < k {
            have = (have * 2).min(k);
            let ay = self.mul_res(a, &y, have);
            let corr: Vec<BigInt> = two.iter().zip(&ay).map(|(x, z)| x - z).collect();
            y = self.mul_res(&y, &corr, have);
        }
        self.reduce(&mut y, k);
        Some(y)
    }

    fn eval_modulus(&self, s: &[BigInt], k: u32) -> Vec<BigInt> {
        // Horner evaluation of g at s
        let mut acc = vec![BigInt::zero(); self.f];
        for c in self.modulus.iter().rev() {
            acc = self.mul_res(&acc, s, k);
            acc[0] += c;
            self.reduce(&mut acc, k);
        }
        acc
    }

    fn eval_derivative(&self, s: &[BigInt], k: u32) -> Vec<BigInt> {
        let mut acc = vec![BigInt::zero(); self.f];
        for (i, c) in self.modulus.iter().enumerate().skip(1).rev() {
            acc = self.mul_res(&acc, s, k);
            acc[0] += c * BigInt::from(i as u64);
            self.reduce(&mut acc, k);
        }
        acc
    }

    /// The root of g congruent to t^p mod p, lifted to p^N by Newton iteration.
    fn lift_frobenius_of_t(&self) -> Result<Vec<BigInt>> {
        let n = self.prec;
        if self.f == 1 {
            return Ok(vec![BigInt::one()]);
        }
        let t = self.coords_of_t();
        let mut s = vec![BigInt::zero(); self.f];
        s[0] = BigInt::one();
        // t^p by square and multiply
        let mut e = self.p;
        let mut base = t;
        while e > 0 {
            if e & 1 == 1 {
                s = self.mul_res(&s, &base, n);
            }
            base = self.mul_res(&base, &base, n);
            e >>= 1;
        }
        for _ in 0..(2 * n + 8) {
            let gs = self.eval_modulus(&s, n);
            if gs.iter().all(|c| c.is_zero()) {
                return Ok(s);
            }
            let d = self.eval_derivative(&s, n);
            let dinv = self.inv_res(&d, n).ok_or(Error::FrobeniusLiftFailure)?;
            let step = self.mul_res(&gs, &dinv, n);
            s = s.iter().zip(&step).map(|(x, y)| x - y).collect();
            self.reduce(&mut s, n);
        }
        Err(Error::FrobeniusLiftFailure)
    }

    /// Columns: coordinates of s^j for j < f.
    fn power_table(&self, s: &[BigInt]) -> Vec<Vec<BigInt>> {
        let mut cols = Vec::with_capacity(self.f);
        let mut cur = vec![BigInt::zero(); self.f];
        cur[0] = BigInt::one();
        for _ in 0..self.f {
            cols.push(cur.clone());
            cur = self.mul_res(&cur, s, self.prec);
        }
        cols
    }

    fn apply_table(&self, table: &[Vec<BigInt>], v: &[BigInt], k: u32) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.f];
        for (j, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out = self.add_res(&out, &self.scale_res(&table[j], c, k), k);
        }
        self.reduce(&mut out, k);
        out
    }

    pub(crate) fn sigma_res(&self, v: &[BigInt], k: u32) -> Vec<BigInt> {
        if self.f == 1 {
            return v.to_vec();
        }
        self.apply_table(&self.sigma, v, k)
    }

    pub(crate) fn sigma_inv_res(&self, v: &[BigInt], k: u32) -> Vec<BigInt> {
        if self.f == 1 {
            return v.to_vec();
        }
        self.apply_table(&self.sigma_inv, v, k)
    }

    /// Coordinates of sigma(t) mod p^N.
    pub fn frobenius_of_generator(&self) -> Vec<BigInt> {
        if self.f == 1 {
            return self.coords_of_t();
        }
        self.sigma[1].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(FieldSpec::new(4, 1, 5), Err(Error::InvalidFieldSpec(_))));
        assert!(matches!(FieldSpec::new(5, 0, 5), Err(Error::InvalidFieldSpec(_))));
        assert!(matches!(FieldSpec::new(5, 1, 0), Err(Error::InvalidFieldSpec(_))));
    }

    #[test]
    fn frobenius_of_t_is_a_root_congruent_to_t_pow_p() {
        let spec = FieldSpec::new(2, 2, 8).unwrap();
        let s = spec.frobenius_of_generator();
        assert!(spec.eval_modulus(&s, 8).iter().all(|c| c.is_zero()));
        // t^2 = -t - 1 = t + 1 mod 2
        let pb = BigInt::from(2);
        let red: Vec<BigInt> = s.iter().map(|c| c.mod_floor(&pb)).collect();
        assert_eq!(red, vec![BigInt::one(), BigInt::one()]);
    }

    #[test]
    fn residue_inverse() {
        let spec = FieldSpec::new(3, 2, 6).unwrap();
        let a = vec![BigInt::from(4), BigInt::from(7)];
        let inv = spec.inv_res(&a, 6).unwrap();
        let prod = spec.mul_res(&a, &inv, 6);
        assert_eq!(prod, vec![BigInt::one(), BigInt::zero()]);
    }
}
