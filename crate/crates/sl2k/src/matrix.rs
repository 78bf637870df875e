//! Dense exact matrices and canonical subspaces.
//!
//! Subspaces are stored as reduced row-echelon bases with zero rows dropped,
//! so equality of subspaces is equality of their basis matrices.

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

impl Matrix {
    pub fn new(field: FieldSpec, rows: usize, cols: usize, entries: Vec<Scalar>) -> Matrix {
        assert_eq!(entries.len(), rows * cols);
        Matrix {
            field,
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(field: &FieldSpec, rows: usize, cols: usize) -> Matrix {
        let entries = vec![field.zero(); rows * cols];
        Matrix::new(field.clone(), rows, cols, entries)
    }

    pub fn identity(field: &FieldSpec, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    /// Build from integer entries, reduced into the field.
    pub fn from_ints(field: &FieldSpec, rows: usize, cols: usize, data: &[i64]) -> Matrix {
        assert_eq!(data.len(), rows * cols);
        let entries = data.iter().map(|&n| field.from_int(n)).collect();
        Matrix::new(field.clone(), rows, cols, entries)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<Scalar> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Some(c) when the matrix equals c times the identity.
    pub fn scalar_of_identity(&self) -> Option<Scalar> {
        if !self.is_square() || self.rows == 0 {
            return None;
        }
        let c = self.get(0, 0).clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let expect = if i == j { c.clone() } else { self.field.zero() };
                if *self.get(i, j) != expect {
                    return None;
                }
            }
        }
        Some(c)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.field, other.field);
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| self.field.add(a, b))
            .collect();
        Matrix::new(self.field.clone(), self.rows, self.cols, entries)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Matrix {
        let entries = self.entries.iter().map(|a| self.field.neg(a)).collect();
        Matrix::new(self.field.clone(), self.rows, self.cols, entries)
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        let entries = self.entries.iter().map(|a| self.field.mul(c, a)).collect();
        Matrix::new(self.field.clone(), self.rows, self.cols, entries)
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.field, other.field);
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j);
                    let v = f.add(cur, &f.mul(a, b));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn pow(&self, mut n: usize) -> Matrix {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Matrix::identity(&self.field, self.rows);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    /// a*b - b*a.
    pub fn commutator(&self, other: &Matrix) -> Matrix {
        self.mul(other).sub(&other.mul(self))
    }

    /// Apply to a column vector given as a slice.
    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols);
        let f = &self.field;
        (0..self.rows)
            .map(|i| {
                let mut acc = f.zero();
                for j in 0..self.cols {
                    let a = self.get(i, j);
                    if !a.is_zero() && !v[j].is_zero() {
                        acc = f.add(&acc, &f.mul(a, &v[j]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut out = Matrix::zeros(&self.field, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Matrix::new(
            self.field.clone(),
            self.rows + other.rows,
            self.cols,
            entries,
        )
    }

    /// Block-diagonal sum.
    pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
        assert!(!blocks.is_empty());
        let f = blocks[0].field.clone();
        let rows: usize = blocks.iter().map(|m| m.rows).sum();
        let cols: usize = blocks.iter().map(|m| m.cols).sum();
        let mut out = Matrix::zeros(&f, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(r0 + i, c0 + j, b.get(i, j).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Kronecker product.
    pub fn kronecker(&self, other: &Matrix) -> Matrix {
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let v = f.mul(a, other.get(k, l));
                        out.set(i * other.rows + k, j * other.cols + l, v);
                    }
                }
            }
        }
        out
    }

    /// In-place reduced row echelon form; returns pivot column indices.
    pub fn echelonize(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    let a = self.get(r, j).clone();
                    let b = self.get(pr, j).clone();
                    self.set(r, j, b);
                    self.set(pr, j, a);
                }
            }
            let inv = f.inv(self.get(r, c)).expect("pivot nonzero");
            for j in 0..self.cols {
                let v = f.mul(&inv, self.get(r, j));
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let factor = self.get(i, c).clone();
                for j in 0..self.cols {
                    let v = f.sub(self.get(i, j), &f.mul(&factor, self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let pivots = m.echelonize();
        // rank-nullity sanity after every elimination
        debug_assert_eq!(pivots.len() + self.kernel_dim_internal(), self.cols);
        pivots.len()
    }

    fn kernel_dim_internal(&self) -> usize {
        let mut m = self.clone();
        let pivots = m.echelonize();
        self.cols - pivots.len()
    }

    /// Null space {v : Mv = 0} as a canonical subspace of the column domain.
    pub fn kernel(&self) -> Subspace {
        let f = &self.field;
        let mut m = self.clone();
        let pivots = m.echelonize();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::new();
        for &fc in &free {
            let mut v = vec![f.zero(); self.cols];
            v[fc] = f.one();
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(m.get(ri, fc));
            }
            basis.push(v);
        }
        debug_assert_eq!(basis.len() + pivots.len(), self.cols);
        Subspace::from_vectors(f, self.cols, basis)
    }

    /// Column space as a canonical subspace of the codomain.
    pub fn image(&self) -> Subspace {
        let t = self.transpose();
        let rows: Vec<Vec<Scalar>> = (0..t.rows).map(|i| t.row(i)).collect();
        Subspace::from_vectors(&self.field, self.rows, rows)
    }

    /// One solution of Mx = b, or None when inconsistent.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(b.len(), self.rows);
        let f = &self.field;
        let mut aug = Matrix::zeros(f, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let pivots = aug.echelonize();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![f.zero(); self.cols];
        for (ri, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(ri, self.cols).clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        assert!(self.is_square());
        let n = self.rows;
        let f = &self.field;
        if n == 0 {
            return Some(self.clone());
        }
        let mut aug = self.hstack(&Matrix::identity(f, n));
        let pivots = aug.echelonize();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut out = Matrix::zeros(f, n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, aug.get(i, n + j).clone());
            }
        }
        Some(out)
    }

    /// Characteristic polynomial, monic, low degree first, via the
    /// division-free Samuelson-Berkowitz recursion.
    pub fn char_poly(&self) -> Result<Vec<Scalar>> {
        if !self.is_square() {
            return Err(Error::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let f = &self.field;
        if n == 0 {
            return Ok(vec![f.one()]);
        }
        // vector of coefficients of det(XI - M_k) as k grows, highest degree first
        let mut c: Vec<Scalar> = vec![f.one()];
        for k in 0..n {
            // principal k+1 x k+1 leading block data
            let a = self.get(k, k).clone();
            let row: Vec<Scalar> = (0..k).map(|j| self.get(k, j).clone()).collect();
            let col: Vec<Scalar> = (0..k).map(|i| self.get(i, k).clone()).collect();
            let block: Vec<Vec<Scalar>> = (0..k)
                .map(|i| (0..k).map(|j| self.get(i, j).clone()).collect())
                .collect();
            // Toeplitz column: 1, -a, -(row col), -(row block col), ..
            let mut t = Vec::with_capacity(k + 2);
            t.push(f.one());
            t.push(f.neg(&a));
            let mut w = col.clone();
            for _ in 0..k {
                let dot = row
                    .iter()
                    .zip(&w)
                    .fold(f.zero(), |acc, (r, v)| f.add(&acc, &f.mul(r, v)));
                t.push(f.neg(&dot));
                let mut nw = vec![f.zero(); k];
                for (i, br) in block.iter().enumerate() {
                    for (j, b) in br.iter().enumerate() {
                        if !b.is_zero() && !w[j].is_zero() {
                            nw[i] = f.add(&nw[i], &f.mul(b, &w[j]));
                        }
                    }
                }
                w = nw;
            }
            // multiply the running polynomial by the Toeplitz column
            let mut next = vec![f.zero(); c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                for (j, tj) in t.iter().enumerate() {
                    if i + j < next.len() {
                        next[i + j] = f.add(&next[i + j], &f.mul(ci, tj));
                    }
                }
            }
            c = next;
        }
        c.reverse();
        Ok(c)
    }
}

/// A subspace of a coordinate space, held as a reduced row-echelon basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn from_vectors(field: &FieldSpec, ambient: usize, vecs: Vec<Vec<Scalar>>) -> Subspace {
        let rows = vecs.len();
        let entries: Vec<Scalar> = vecs.into_iter().flatten().collect();
        let mut m = Matrix::new(field.clone(), rows, ambient, entries);
        let pivots = m.echelonize();
        let rank = pivots.len();
        let mut basis = Matrix::zeros(field, rank, ambient);
        for i in 0..rank {
            for j in 0..ambient {
                basis.set(i, j, m.get(i, j).clone());
            }
        }
        Subspace {
            ambient,
            basis,
            pivots,
        }
    }

    pub fn zero(field: &FieldSpec, ambient: usize) -> Subspace {
        Subspace::from_vectors(field, ambient, Vec::new())
    }

    pub fn full(field: &FieldSpec, ambient: usize) -> Subspace {
        let rows: Vec<Vec<Scalar>> = (0..ambient)
            .map(|i| {
                let mut v = vec![field.zero(); ambient];
                v[i] = field.one();
                v
            })
            .collect();
        Subspace::from_vectors(field, ambient, rows)
    }

    pub fn field(&self) -> &FieldSpec {
        self.basis.field()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.dim()).map(|i| self.basis.row(i)).collect()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Residual of v after eliminating along the echelon basis.
    fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        let f = self.field().clone();
        let mut w = v.to_vec();
        for (ri, &pc) in self.pivots.iter().enumerate() {
            if w[pc].is_zero() {
                continue;
            }
            let factor = w[pc].clone();
            for j in 0..self.ambient {
                let s = f.mul(&factor, self.basis.get(ri, j));
                w[j] = f.sub(&w[j], &s);
            }
        }
        w
    }

    pub fn contains_vector(&self, v: &[Scalar]) -> bool {
        self.reduce(v).iter().all(|c| c.is_zero())
    }

    /// Whether `other` is contained in `self`.
    pub fn contains(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient, other.ambient);
        other.basis_rows().iter().all(|r| self.contains_vector(r))
    }

    /// Coordinates of v in the echelon basis, or None when v lies outside.
    pub fn coordinates(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        if !self.contains_vector(v) {
            return None;
        }
        // in reduced echelon form the coordinate along row i is v[pivot_i]
        Some(self.pivots.iter().map(|&pc| v[pc].clone()).collect())
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        let mut rows = self.basis_rows();
        rows.extend(other.basis_rows());
        Subspace::from_vectors(self.field(), self.ambient, rows)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        let f = self.field().clone();
        // coefficients a with a . basis(self) inside other: kernel of the
        // residual map, which is linear in a
        let k = self.dim();
        if k == 0 || other.dim() == 0 {
            return Subspace::zero(&f, self.ambient);
        }
        let mut resid = Matrix::zeros(&f, self.ambient, k);
        for (i, row) in self.basis_rows().iter().enumerate() {
            let r = other.reduce(row);
            for (j, val) in r.iter().enumerate() {
                resid.set(j, i, val.clone());
            }
        }
        let coeff_kernel = resid.kernel();
        let rows: Vec<Vec<Scalar>> = coeff_kernel
            .basis_rows()
            .iter()
            .map(|a| {
                let mut v = vec![f.zero(); self.ambient];
                for (i, c) in a.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for j in 0..self.ambient {
                        let s = f.mul(c, self.basis.get(i, j));
                        v[j] = f.add(&v[j], &s);
                    }
                }
                v
            })
            .collect();
        Subspace::from_vectors(&f, self.ambient, rows)
    }

    /// Image {Mv : v in self} inside the codomain of M.
    pub fn apply(&self, m: &Matrix) -> Subspace {
        assert_eq!(m.cols(), self.ambient);
        let rows: Vec<Vec<Scalar>> = self.basis_rows().iter().map(|r| m.apply(r)).collect();
        Subspace::from_vectors(self.field(), m.rows(), rows)
    }

    /// Functionals vanishing on the subspace, as rows. With the standard
    /// pairing, a vector lies in the subspace iff all of them kill it.
    pub fn annihilator_functionals(&self) -> Matrix {
        let mut rows = Vec::new();
        for r in self.basis.kernel().basis_rows() {
            rows.push(r);
        }
        let k = rows.len();
        let entries: Vec<Scalar> = rows.into_iter().flatten().collect();
        Matrix::new(self.field().clone(), k, self.ambient, entries)
    }

    /// Preimage {v : Mv in self} inside the domain of M.
    pub fn preimage(&self, m: &Matrix) -> Subspace {
        assert_eq!(m.rows(), self.ambient);
        let fun = self.annihilator_functionals();
        if fun.rows() == 0 {
            return Subspace::full(self.field(), m.cols());
        }
        fun.mul(m).kernel()
    }
}
