//! Dense univariate polynomials over an exact field, plus the invariant
//! factor computation used to decide matrix similarity.

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    field: FieldSpec,
    coeffs: Vec<Scalar>, // low degree first, no trailing zeros
}

impl Poly {
    pub fn new(field: &FieldSpec, mut coeffs: Vec<Scalar>) -> Poly {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Poly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn zero(field: &FieldSpec) -> Poly {
        Poly::new(field, Vec::new())
    }

    pub fn one(field: &FieldSpec) -> Poly {
        let one = field.one();
        Poly::new(field, vec![one])
    }

    pub fn from_ints(field: &FieldSpec, data: &[i64]) -> Poly {
        Poly::new(field, data.iter().map(|&n| field.from_int(n)).collect())
    }

    pub fn x(field: &FieldSpec) -> Poly {
        Poly::new(field, vec![field.zero(), field.one()])
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Some(&self.field.one())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(|| f.zero());
            let b = other.coeffs.get(i).cloned().unwrap_or_else(|| f.zero());
            out.push(f.add(&a, &b));
        }
        Poly::new(f, out)
    }

    pub fn neg(&self) -> Poly {
        let f = &self.field;
        Poly::new(f, self.coeffs.iter().map(|c| f.neg(c)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let f = &self.field;
        if self.is_zero() || other.is_zero() {
            return Poly::zero(f);
        }
        let mut out = vec![f.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(&out[i + j], &f.mul(a, b));
            }
        }
        Poly::new(f, out)
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        let f = &self.field;
        Poly::new(f, self.coeffs.iter().map(|a| f.mul(c, a)).collect())
    }

    /// Euclidean division; divisor must be nonzero.
    pub fn divmod(&self, divisor: &Poly) -> (Poly, Poly) {
        let f = &self.field;
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dd = divisor.degree().unwrap();
        let lead_inv = f.inv(divisor.leading().unwrap()).unwrap();
        let mut rem = self.clone();
        let mut quot = vec![f.zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let c = f.mul(rem.leading().unwrap(), &lead_inv);
            let shift = rd - dd;
            quot[shift] = c.clone();
            let mut sub = vec![f.zero(); shift];
            sub.extend(divisor.coeffs.iter().map(|a| f.mul(&c, a)));
            rem = rem.sub(&Poly::new(f, sub));
        }
        (Poly::new(f, quot), rem)
    }

    pub fn rem(&self, divisor: &Poly) -> Poly {
        self.divmod(divisor).1
    }

    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some(l) => self.scale(&self.field.inv(l).unwrap()),
        }
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let f = &self.field;
        let mut acc = f.zero();
        for c in self.coeffs.iter().rev() {
            acc = f.add(&f.mul(&acc, x), c);
        }
        acc
    }

    /// Irreducibility over a prime field by trial division against every
    /// monic divisor of degree at most deg/2. Desk-scale degrees only.
    pub fn is_irreducible(&self) -> Result<bool> {
        let f = &self.field;
        if f.characteristic() == 0 || f.extension_degree() != 1 {
            return Err(Error::Malformed(
                "irreducibility test is over prime fields only".into(),
            ));
        }
        let p = f.characteristic();
        let Some(deg) = self.degree() else {
            return Ok(false);
        };
        if deg == 0 {
            return Ok(false);
        }
        if deg == 1 {
            return Ok(true);
        }
        let me = self.monic();
        for d in 1..=deg / 2 {
            let count = (p as u128).pow(d as u32);
            for k in 0..count {
                let mut cs = vec![f.zero(); d + 1];
                cs[d] = f.one();
                let mut rem = k;
                for c in cs.iter_mut().take(d) {
                    *c = f.from_int((rem % p as u128) as i64);
                    rem /= p as u128;
                }
                let div = Poly::new(f, cs);
                if me.rem(&div).is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Companion matrix of a monic polynomial.
    pub fn companion(&self) -> Matrix {
        assert!(self.is_monic(), "companion needs a monic polynomial");
        let n = self.degree().unwrap();
        let f = &self.field;
        let mut m = Matrix::zeros(f, n, n);
        for i in 1..n {
            m.set(i, i - 1, f.one());
        }
        for i in 0..n {
            m.set(i, n - 1, f.neg(&self.coeffs[i]));
        }
        m
    }
}

/// Invariant factors of a square matrix: the nonconstant diagonal entries of
/// the Smith normal form of XI - M over F[X], each monic, in divisibility
/// order. Two square matrices are similar iff these lists agree.
pub fn invariant_factors(m: &Matrix) -> Result<Vec<Poly>> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let f = m.field().clone();
    let n = m.rows();
    // polynomial matrix XI - M
    let mut a: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = f.neg(m.get(i, j));
                    if i == j {
                        Poly::new(&f, vec![c, f.one()])
                    } else {
                        Poly::new(&f, vec![c])
                    }
                })
                .collect()
        })
        .collect();

    let mut factors = Vec::new();
    let mut top = 0usize;
    while top < n {
        // find a nonzero entry of minimal degree in the active block
        let mut best: Option<(usize, usize, usize)> = None;
        for i in top..n {
            for j in top..n {
                if let Some(d) = a[i][j].degree() {
                    if best.is_none_or(|(_, _, bd)| d < bd) {
                        best = Some((i, j, d));
                    }
                }
            }
        }
        let Some((bi, bj, _)) = best else {
            break; // block is zero
        };
        a.swap(top, bi);
        for row in a.iter_mut() {
            row.swap(top, bj);
        }
        // clear row and column by division; restart if a remainder drops degree
        loop {
            let pivot = a[top][top].clone();
            let mut touched = false;
            for i in top + 1..n {
                if a[i][top].is_zero() {
                    continue;
                }
                let (q, r) = a[i][top].divmod(&pivot);
                for j in top..n {
                    let s = q.mul(&a[top][j]);
                    a[i][j] = a[i][j].sub(&s);
                }
                if !r.is_zero() {
                    // remainder has smaller degree; swap it up and restart
                    a.swap(top, i);
                    touched = true;
                    break;
                }
            }
            if touched {
                continue;
            }
            for j in top + 1..n {
                if a[top][j].is_zero() {
                    continue;
                }
                let (q, r) = a[top][j].divmod(&pivot);
                for i in top..n {
                    let s = q.mul(&a[i][top]);
                    a[i][j] = a[i][j].sub(&s);
                }
                if !r.is_zero() {
                    for row in a.iter_mut() {
                        row.swap(top, j);
                    }
                    touched = true;
                    break;
                }
            }
            if !touched {
                break;
            }
        }
        // ensure the pivot divides every remaining entry
        let mut fixed = false;
        'outer: for i in top + 1..n {
            for j in top + 1..n {
                if !a[i][j].rem(&a[top][top]).is_zero() {
                    // add row i to row top and redo this pivot
                    for jj in top..n {
                        a[top][jj] = a[top][jj].add(&a[i][jj].clone());
                    }
                    fixed = true;
                    break 'outer;
                }
            }
        }
        if fixed {
            continue;
        }
        factors.push(a[top][top].monic());
        top += 1;
    }
    // drop constant factors, keep divisibility order
    let out: Vec<Poly> = factors
        .into_iter()
        .filter(|p| p.degree().is_some_and(|d| d > 0))
        .collect();
    // degrees of invariant factors of XI - M add up to n
    debug_assert_eq!(out.iter().map(|p| p.degree().unwrap()).sum::<usize>(), n);
    Ok(out)
}

/// Whether two square matrices over the same field are similar.
pub fn similar(a: &Matrix, b: &Matrix) -> Result<bool> {
    if a.field() != b.field() {
        return Err(Error::FieldMismatch);
    }
    if a.rows() != b.rows() || !a.is_square() || !b.is_square() {
        return Ok(false);
    }
    Ok(invariant_factors(a)? == invariant_factors(b)?)
}
