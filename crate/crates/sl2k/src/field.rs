//! Exact scalar arithmetic over F_p, F_{p^e} and Q.
//!
//! A [`FieldSpec`] fixes the coefficient field once; [`Scalar`] values are
//! plain data interpreted through the FieldSpec that created them. No floating
//! point appears anywhere.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;

use crate::error::{Error, Result};

/// An exact field element. `Fp` holds a representative in `[0, p)`,
/// `Fq` a coefficient vector of length `e` in the basis `1, t, .., t^{e-1}`,
/// `Q` a reduced fraction with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Fp(u64),
    Fq(Vec<u64>),
    Q(BigRational),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Fp(a) => *a == 0,
            Scalar::Fq(v) => v.iter().all(|&c| c == 0),
            Scalar::Q(r) => r.is_zero(),
        }
    }
}

impl std::fmt::Display for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scalar::Fp(a) => write!(f, "{a}"),
            Scalar::Fq(v) => {
                let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
                write!(f, "[{}]", parts.join(","))
            }
            Scalar::Q(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

/// Description of the coefficient field: characteristic `p` (0 for Q),
/// extension degree `e`, and for `e > 1` a monic irreducible modulus of
/// degree `e` with coefficients in `[0, p)`, low degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    characteristic: u64,
    extension_degree: usize,
    modulus: Option<Vec<u64>>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldSpec {
    /// The rationals.
    pub fn rationals() -> FieldSpec {
        FieldSpec {
            characteristic: 0,
            extension_degree: 1,
            modulus: None,
        }
    }

    /// The prime field F_p for an odd prime p.
    pub fn prime(p: u64) -> Result<FieldSpec> {
        FieldSpec::new(p, 1, None)
    }

    /// Build a field from characteristic, extension degree and optional
    /// modulus. With `p = 0` only `e = 1` is allowed (the rationals).
    /// For `e > 1` a missing modulus is auto-selected deterministically:
    /// the monic polynomial `t^e + c_{e-1} t^{e-1} + .. + c_0` whose
    /// coefficient word, read as a base-p numeral with `c_0` least
    /// significant, is smallest among irreducibles.
    pub fn new(p: u64, e: usize, modulus: Option<Vec<u64>>) -> Result<FieldSpec> {
        if p == 0 {
            if e != 1 || modulus.is_some() {
                return Err(Error::Malformed(
                    "characteristic 0 requires extension degree 1 and no modulus".into(),
                ));
            }
            return Ok(FieldSpec::rationals());
        }
        if p == 2 {
            return Err(Error::CharTwoUnsupported);
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if e == 0 {
            return Err(Error::Malformed("extension degree must be positive".into()));
        }
        if e == 1 {
            if modulus.is_some() {
                return Err(Error::Malformed("prime field takes no modulus".into()));
            }
            return Ok(FieldSpec {
                characteristic: p,
                extension_degree: 1,
                modulus: None,
            });
        }
        let m = match modulus {
            Some(m) => {
                if m.len() != e + 1 || m[e] != 1 || m.iter().any(|&c| c >= p) {
                    return Err(Error::Malformed(format!(
                        "modulus must be monic of degree {e} with coefficients in [0,{p})"
                    )));
                }
                if !poly_irreducible_mod_p(&m, p) {
                    return Err(Error::ReducibleModulus(p));
                }
                m
            }
            None => auto_modulus(p, e),
        };
        Ok(FieldSpec {
            characteristic: p,
            extension_degree: e,
            modulus: Some(m),
        })
    }

    pub fn characteristic(&self) -> u64 {
        self.characteristic
    }

    pub fn extension_degree(&self) -> usize {
        self.extension_degree
    }

    pub fn modulus(&self) -> Option<&[u64]> {
        self.modulus.as_deref()
    }

    pub fn is_rational(&self) -> bool {
        self.characteristic == 0
    }

    /// Number of elements, None for Q.
    pub fn order(&self) -> Option<u128> {
        if self.characteristic == 0 {
            None
        } else {
            Some((self.characteristic as u128).pow(self.extension_degree as u32))
        }
    }

    /// The prime subfield (Q for characteristic 0).
    pub fn prime_subfield(&self) -> FieldSpec {
        if self.characteristic == 0 {
            FieldSpec::rationals()
        } else {
            FieldSpec {
                characteristic: self.characteristic,
                extension_degree: 1,
                modulus: None,
            }
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_int(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_int(1)
    }

    /// Embed an integer (reduces mod p; exact for Q).
    pub fn from_int(&self, n: i64) -> Scalar {
        match self.characteristic {
            0 => Scalar::Q(BigRational::from_integer(BigInt::from(n))),
            p => {
                let r = n.rem_euclid(p as i64) as u64;
                if self.extension_degree == 1 {
                    Scalar::Fp(r)
                } else {
                    let mut v = vec![0u64; self.extension_degree];
                    v[0] = r;
                    Scalar::Fq(v)
                }
            }
        }
    }

    /// The basis element t^j of an extension field (t^0 = 1 for e = 1).
    pub fn basis_element(&self, j: usize) -> Scalar {
        assert!(j < self.extension_degree, "basis index out of range");
        if self.extension_degree == 1 {
            self.one()
        } else {
            let mut v = vec![0u64; self.extension_degree];
            v[j] = 1;
            Scalar::Fq(v)
        }
    }

    /// Coefficients of `a` in the prime-field basis 1, t, .., t^{e-1}.
    pub fn coeffs(&self, a: &Scalar) -> Vec<u64> {
        match a {
            Scalar::Fp(x) => vec![*x],
            Scalar::Fq(v) => v.clone(),
            Scalar::Q(_) => panic!("coeffs only defined in positive characteristic"),
        }
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Scalar {
        assert_eq!(coeffs.len(), self.extension_degree);
        let p = self.characteristic;
        if self.extension_degree == 1 {
            Scalar::Fp(coeffs[0] % p)
        } else {
            Scalar::Fq(coeffs.iter().map(|c| c % p).collect())
        }
    }

    fn check(&self, a: &Scalar) {
        match (self.characteristic, self.extension_degree, a) {
            (0, _, Scalar::Q(_)) => {}
            (p, 1, Scalar::Fp(x)) if p > 0 => debug_assert!(*x < p),
            (p, e, Scalar::Fq(v)) if p > 0 && e > 1 => debug_assert_eq!(v.len(), e),
            _ => panic!("scalar does not belong to this field: {a:?} in {self:?}"),
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.check(a);
        self.check(b);
        match (a, b) {
            (Scalar::Fp(x), Scalar::Fp(y)) => Scalar::Fp((x + y) % self.characteristic),
            (Scalar::Fq(x), Scalar::Fq(y)) => Scalar::Fq(
                x.iter()
                    .zip(y)
                    .map(|(u, v)| (u + v) % self.characteristic)
                    .collect(),
            ),
            (Scalar::Q(x), Scalar::Q(y)) => Scalar::Q(x + y),
            _ => unreachable!(),
        }
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        self.check(a);
        let p = self.characteristic;
        match a {
            Scalar::Fp(x) => Scalar::Fp((p - x) % p),
            Scalar::Fq(v) => Scalar::Fq(v.iter().map(|x| (p - x) % p).collect()),
            Scalar::Q(r) => Scalar::Q(-r),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.check(a);
        self.check(b);
        match (a, b) {
            (Scalar::Fp(x), Scalar::Fp(y)) => {
                Scalar::Fp(((*x as u128 * *y as u128) % self.characteristic as u128) as u64)
            }
            (Scalar::Fq(x), Scalar::Fq(y)) => {
                let p = self.characteristic as u128;
                let e = self.extension_degree;
                // schoolbook product, then reduce by the modulus
                let mut prod = vec![0u128; 2 * e - 1];
                for (i, u) in x.iter().enumerate() {
                    for (j, v) in y.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + *u as u128 * *v as u128) % p;
                    }
                }
                let m = self.modulus.as_ref().unwrap();
                for k in (e..2 * e - 1).rev() {
                    let c = prod[k];
                    if c == 0 {
                        continue;
                    }
                    prod[k] = 0;
                    // t^k = t^{k-e} * (t^e) and t^e = -(m_0 + .. + m_{e-1} t^{e-1})
                    for (i, &mi) in m.iter().take(e).enumerate() {
                        let sub = c * mi as u128 % p;
                        prod[k - e + i] = (prod[k - e + i] + p - sub) % p;
                    }
                }
                Scalar::Fq(prod[..e].iter().map(|&c| c as u64).collect())
            }
            (Scalar::Q(x), Scalar::Q(y)) => Scalar::Q(x * y),
            _ => unreachable!(),
        }
    }

    /// Multiplicative inverse; None for zero.
    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        self.check(a);
        if a.is_zero() {
            return None;
        }
        match a {
            Scalar::Fp(x) => Some(Scalar::Fp(mod_inverse(*x, self.characteristic))),
            Scalar::Fq(_) => {
                // a^(q-2) with q = p^e
                let q = self.order().unwrap();
                Some(self.pow(a, (q - 2) as u64))
            }
            Scalar::Q(r) => Some(Scalar::Q(r.recip())),
        }
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        match self.inv(b) {
            Some(binv) => Ok(self.mul(a, &binv)),
            None => Err(Error::DivisionUnavailable(b.to_string())),
        }
    }

    pub fn pow(&self, a: &Scalar, mut n: u64) -> Scalar {
        let mut base = a.clone();
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    /// Frobenius iterate a -> a^(p^times).
    pub fn frobenius(&self, a: &Scalar, times: usize) -> Scalar {
        assert!(
            self.characteristic > 0,
            "frobenius needs positive characteristic"
        );
        let mut out = a.clone();
        for _ in 0..times {
            out = self.pow(&out, self.characteristic);
        }
        out
    }

    /// Coefficient expansion of the product of basis elements t^i * t^j.
    pub fn basis_product(&self, i: usize, j: usize) -> Vec<u64> {
        let prod = self.mul(&self.basis_element(i), &self.basis_element(j));
        self.coeffs(&prod)
    }

    /// All field elements, ascending as base-p numerals. Finite fields only.
    pub fn elements(&self) -> Vec<Scalar> {
        let p = self.characteristic;
        assert!(p > 0, "cannot enumerate Q");
        let q = self.order().unwrap();
        let mut out = Vec::with_capacity(q as usize);
        for k in 0..q {
            let mut v = vec![0u64; self.extension_degree];
            let mut rem = k;
            for c in v.iter_mut() {
                *c = (rem % p as u128) as u64;
                rem /= p as u128;
            }
            out.push(self.from_coeffs(&v));
        }
        out
    }

    /// Build a rational scalar from a fraction; fails in positive characteristic
    /// unless the denominator is invertible mod p.
    pub fn from_fraction(&self, num: BigInt, den: BigInt) -> Result<Scalar> {
        if den.is_zero() {
            return Err(Error::Malformed("zero denominator".into()));
        }
        if self.characteristic == 0 {
            return Ok(Scalar::Q(BigRational::new(num, den)));
        }
        let p = BigInt::from(self.characteristic);
        let n = self.from_int(bigint_mod_p(&num, &p));
        let d = self.from_int(bigint_mod_p(&den, &p));
        self.div(&n, &d)
    }
}

fn bigint_mod_p(n: &BigInt, p: &BigInt) -> i64 {
    use num::ToPrimitive;
    let r = ((n % p) + p) % p;
    r.to_i64().unwrap()
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // extended Euclid on (a, p), p prime and a != 0 mod p
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "not invertible");
    s0.rem_euclid(p as i128) as u64
}

/// Irreducibility of a monic polynomial over F_p by trial division against
/// all monic divisors of degree at most deg/2. Degrees here stay small.
fn poly_irreducible_mod_p(coeffs: &[u64], p: u64) -> bool {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        // enumerate monic divisors of degree d
        let count = (p as u128).pow(d as u32);
        for k in 0..count {
            let mut div = vec![0u64; d + 1];
            div[d] = 1;
            let mut rem = k;
            for c in div.iter_mut().take(d) {
                *c = (rem % p as u128) as u64;
                rem /= p as u128;
            }
            if poly_rem_is_zero(coeffs, &div, p) {
                return false;
            }
        }
    }
    true
}

/// Whether `divisor` (monic) divides `poly` exactly over F_p.
fn poly_rem_is_zero(poly: &[u64], divisor: &[u64], p: u64) -> bool {
    let mut rem: Vec<u64> = poly.to_vec();
    let dd = divisor.len() - 1;
    while rem.len() > dd {
        let lead = *rem.last().unwrap() % p;
        let shift = rem.len() - 1 - dd;
        if lead != 0 {
            for (i, &c) in divisor.iter().enumerate() {
                let idx = shift + i;
                let sub = (lead as u128 * c as u128 % p as u128) as u64;
                rem[idx] = (rem[idx] + p - sub % p) % p;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c % p == 0)
}

fn auto_modulus(p: u64, e: usize) -> Vec<u64> {
    let count = (p as u128).pow(e as u32);
    for k in 0..count {
        let mut m = vec![0u64; e + 1];
        m[e] = 1;
        let mut rem = k;
        for c in m.iter_mut().take(e) {
            *c = (rem % p as u128) as u64;
            rem /= p as u128;
        }
        if poly_irreducible_mod_p(&m, p) {
            return m;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}
