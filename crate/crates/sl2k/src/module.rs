//! Modules over the Lie ring sl2(K).
//!
//! A module over K = F_{p^e} (or Q) is stored in additive-basis presentation:
//! the carrier is a vector space over the prime field, and for every K-basis
//! element b_j there is one triple of matrices giving the actions of h_{b_j},
//! x_{b_j}, y_{b_j}. The action of an arbitrary scalar is assembled by
//! additivity, which is the only structure a Lie ring module guarantees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::matrix::{Matrix, Subspace};

/// Matrices of h, x, y for one K-basis element, over the prime field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorTriple {
    pub h: Matrix,
    pub x: Matrix,
    pub y: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SL2Module {
    field: FieldSpec,
    dim: usize,
    gens: Vec<GeneratorTriple>,
}

/// One failed bracket relation, reported by `validate`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketFailure {
    pub relation: String,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub failures: Vec<BracketFailure>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A linear map intertwining two modules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleMap {
    pub matrix: Matrix,
}

impl ModuleMap {
    /// Check matrix * G_src = G_tgt * matrix for every generator.
    pub fn verify(&self, source: &SL2Module, target: &SL2Module) -> Result<()> {
        if source.gens.len() != target.gens.len() {
            return Err(Error::FieldMismatch);
        }
        if self.matrix.rows() != target.dim || self.matrix.cols() != source.dim {
            return Err(Error::DimensionMismatch(format!(
                "map is {}x{}, expected {}x{}",
                self.matrix.rows(),
                self.matrix.cols(),
                target.dim,
                source.dim
            )));
        }
        for (j, (gs, gt)) in source.gens.iter().zip(&target.gens).enumerate() {
            for (name, ms, mt) in [
                ("H", &gs.h, &gt.h),
                ("X", &gs.x, &gt.x),
                ("Y", &gs.y, &gt.y),
            ] {
                if self.matrix.mul(ms) != mt.mul(&self.matrix) {
                    return Err(Error::WitnessConstructionFailed(format!(
                        "map does not intertwine {name}_{j}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_isomorphism(&self, source: &SL2Module, target: &SL2Module) -> Result<bool> {
        self.verify(source, target)?;
        Ok(self.matrix.is_square() && self.matrix.inverse().is_some())
    }
}

/// Prime-field matrix of a K-linear matrix: every entry a becomes the e x e
/// block of multiplication by a in the basis 1, t, .., t^{e-1}. Vector layout
/// puts the e coefficients of tensor slot r at positions r*e .. r*e+e.
pub fn restrict_scalars(m: &Matrix) -> Matrix {
    let k = m.field();
    let e = k.extension_degree();
    let p1 = k.prime_subfield();
    let mut out = Matrix::zeros(&p1, m.rows() * e, m.cols() * e);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let a = m.get(i, j);
            if a.is_zero() {
                continue;
            }
            for c in 0..e {
                let col = k.mul(a, &k.basis_element(c));
                if k.is_rational() {
                    out.set(i, j, col.clone());
                } else {
                    for (r, &coef) in k.coeffs(&col).iter().enumerate() {
                        out.set(i * e + r, j * e + c, p1.from_int(coef as i64));
                    }
                }
            }
        }
    }
    out
}

/// The matrices of multiplication by each basis element b_j on K^kdim,
/// written over the prime field. This is the scalar action a genuinely
/// K-linear carrier comes with.
pub fn k_scalar_matrices(field: &FieldSpec, kdim: usize) -> Vec<Matrix> {
    (0..field.extension_degree())
        .map(|j| {
            let lam = field.basis_element(j);
            let m = Matrix::identity(field, kdim).scale(&lam);
            restrict_scalars(&m)
        })
        .collect()
}

impl SL2Module {
    /// Assemble from parts; checks shapes, not the bracket relations.
    pub fn from_parts(field: FieldSpec, gens: Vec<GeneratorTriple>) -> Result<SL2Module> {
        if gens.len() != field.extension_degree() {
            return Err(Error::Malformed(format!(
                "expected {} generator triples, got {}",
                field.extension_degree(),
                gens.len()
            )));
        }
        let p1 = field.prime_subfield();
        let dim = gens[0].h.rows();
        for g in &gens {
            for m in [&g.h, &g.x, &g.y] {
                if m.rows() != dim || m.cols() != dim {
                    return Err(Error::DimensionMismatch(
                        "generator matrices must be square of equal size".into(),
                    ));
                }
                if *m.field() != p1 {
                    return Err(Error::FieldMismatch);
                }
            }
        }
        Ok(SL2Module { field, dim, gens })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn prime_field(&self) -> FieldSpec {
        self.field.prime_subfield()
    }

    /// Carrier dimension over the prime field.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[GeneratorTriple] {
        &self.gens
    }

    pub fn h(&self, j: usize) -> &Matrix {
        &self.gens[j].h
    }

    pub fn x(&self, j: usize) -> &Matrix {
        &self.gens[j].x
    }

    pub fn y(&self, j: usize) -> &Matrix {
        &self.gens[j].y
    }

    pub fn h0(&self) -> &Matrix {
        self.h(0)
    }

    pub fn x0(&self) -> &Matrix {
        self.x(0)
    }

    pub fn y0(&self) -> &Matrix {
        self.y(0)
    }

    /// All generator matrices with display names.
    pub fn generator_matrices(&self) -> Vec<(String, &Matrix)> {
        let mut out = Vec::with_capacity(3 * self.gens.len());
        for (j, g) in self.gens.iter().enumerate() {
            out.push((format!("H_{j}"), &g.h));
            out.push((format!("X_{j}"), &g.x));
            out.push((format!("Y_{j}"), &g.y));
        }
        out
    }

    fn assemble(&self, pick: impl Fn(&GeneratorTriple) -> &Matrix, lambda: &Scalar) -> Matrix {
        let p1 = self.prime_field();
        let coeffs: Vec<Scalar> = if self.field.is_rational() {
            vec![lambda.clone()]
        } else {
            self.field
                .coeffs(lambda)
                .iter()
                .map(|&c| p1.from_int(c as i64))
                .collect()
        };
        let mut acc = Matrix::zeros(&p1, self.dim, self.dim);
        for (j, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add(&pick(&self.gens[j]).scale(c));
            }
        }
        acc
    }

    /// Action of x_lambda for an arbitrary scalar, assembled by additivity.
    pub fn x_for(&self, lambda: &Scalar) -> Matrix {
        self.assemble(|g| &g.x, lambda)
    }

    pub fn y_for(&self, lambda: &Scalar) -> Matrix {
        self.assemble(|g| &g.y, lambda)
    }

    pub fn h_for(&self, lambda: &Scalar) -> Matrix {
        self.assemble(|g| &g.h, lambda)
    }

    /// Check every defining bracket relation on all K-basis pairs.
    pub fn validate(&self) -> ValidationReport {
        let mut failures = Vec::new();
        let e = self.gens.len();
        let two = self.prime_field().from_int(2);
        for i in 0..e {
            for j in 0..e {
                let prod = if self.field.is_rational() {
                    self.field.one()
                } else {
                    self.field.from_coeffs(&self.field.basis_product(i, j))
                };
                let x_prod = self.x_for(&prod);
                let y_prod = self.y_for(&prod);
                let h_prod = self.h_for(&prod);
                let checks = [
                    (
                        "[H_i,X_j] = 2 X_{bi bj}",
                        self.h(i).commutator(self.x(j)),
                        x_prod.scale(&two),
                    ),
                    (
                        "[H_i,Y_j] = -2 Y_{bi bj}",
                        self.h(i).commutator(self.y(j)),
                        y_prod.scale(&two).neg(),
                    ),
                    (
                        "[X_i,Y_j] = H_{bi bj}",
                        self.x(i).commutator(self.y(j)),
                        h_prod,
                    ),
                    (
                        "[H_i,H_j] = 0",
                        self.h(i).commutator(self.h(j)),
                        Matrix::zeros(&self.prime_field(), self.dim, self.dim),
                    ),
                    (
                        "[X_i,X_j] = 0",
                        self.x(i).commutator(self.x(j)),
                        Matrix::zeros(&self.prime_field(), self.dim, self.dim),
                    ),
                    (
                        "[Y_i,Y_j] = 0",
                        self.y(i).commutator(self.y(j)),
                        Matrix::zeros(&self.prime_field(), self.dim, self.dim),
                    ),
                ];
                for (name, lhs, rhs) in checks {
                    if lhs != rhs {
                        failures.push(BracketFailure {
                            relation: name.to_string(),
                            i,
                            j,
                        });
                    }
                }
            }
        }
        ValidationReport { failures }
    }

    /// The module with every generator acting as zero, of K-dimension kdim.
    pub fn trivial(field: &FieldSpec, kdim: usize) -> SL2Module {
        let e = field.extension_degree();
        let p1 = field.prime_subfield();
        let d = kdim * e;
        let z = || Matrix::zeros(&p1, d, d);
        let gens = (0..e)
            .map(|_| GeneratorTriple {
                h: z(),
                x: z(),
                y: z(),
            })
            .collect();
        SL2Module {
            field: field.clone(),
            dim: d,
            gens,
        }
    }

    /// Symmetric power of the natural module: homogeneous polynomials of
    /// degree k with ordered K-basis Y^k, X Y^{k-1}, .., X^k. x acts as
    /// X d/dY, y as Y d/dX, h as X d/dX - Y d/dY.
    pub fn sym_power(k: usize, field: &FieldSpec) -> Result<SL2Module> {
        let p = field.characteristic();
        if p != 0 && (p as usize) < k + 1 {
            return Err(Error::CharTooSmall {
                p,
                needed: (k + 1) as u64,
            });
        }
        let n = k + 1;
        let mut h = Matrix::zeros(field, n, n);
        let mut x = Matrix::zeros(field, n, n);
        let mut y = Matrix::zeros(field, n, n);
        for j in 0..n {
            // basis vector j is X^j Y^{k-j}
            h.set(j, j, field.from_int(2 * j as i64 - k as i64));
            if j + 1 < n {
                x.set(j + 1, j, field.from_int((k - j) as i64));
            }
            if j > 0 {
                y.set(j - 1, j, field.from_int(j as i64));
            }
        }
        let gens = (0..field.extension_degree())
            .map(|j| {
                let lam = field.basis_element(j);
                GeneratorTriple {
                    h: restrict_scalars(&h.scale(&lam)),
                    x: restrict_scalars(&x.scale(&lam)),
                    y: restrict_scalars(&y.scale(&lam)),
                }
            })
            .collect();
        SL2Module::from_parts(field.clone(), gens)
    }

    /// Two weight-space chains of lengths m = p - n and n, cross-linked by
    /// y through the maps alpha and beta. Requires n < p < 2n. Basis order:
    /// the V1 chain blocks for weights m-1, m-3, .., 1-m, then the V2 chain
    /// blocks for weights n-1, .., 1-n.
    pub fn sab(n: usize, p: u64, alpha: &Matrix, beta: &Matrix) -> Result<SL2Module> {
        let field = FieldSpec::prime(p)?;
        if !((n as u64) < p && p < 2 * n as u64) {
            return Err(Error::BadCharacteristicWindow { n, p });
        }
        let m = (p as usize) - n;
        let d1 = alpha.cols();
        let d2 = alpha.rows();
        if beta.rows() != d1 || beta.cols() != d2 {
            return Err(Error::DimensionMismatch(format!(
                "alpha is {}x{}, beta must be {}x{}, got {}x{}",
                d2,
                d1,
                d1,
                d2,
                beta.rows(),
                beta.cols()
            )));
        }
        if *alpha.field() != field || *beta.field() != field {
            return Err(Error::FieldMismatch);
        }
        let dim = m * d1 + n * d2;
        let mut h = Matrix::zeros(&field, dim, dim);
        let mut x = Matrix::zeros(&field, dim, dim);
        let mut y = Matrix::zeros(&field, dim, dim);
        let v1 = |j: usize| (j - 1) * d1; // block start for chain weight m+1-2j
        let v2 = |i: usize| m * d1 + (i - 1) * d2;
        for j in 1..=m {
            let w = field.from_int(m as i64 + 1 - 2 * j as i64);
            for a in 0..d1 {
                h.set(v1(j) + a, v1(j) + a, w.clone());
            }
            if j >= 2 {
                let c = field.from_int(j as i64 - 1);
                for a in 0..d1 {
                    x.set(v1(j - 1) + a, v1(j) + a, c.clone());
                }
            }
            if j < m {
                let c = field.from_int(m as i64 - j as i64);
                for a in 0..d1 {
                    y.set(v1(j + 1) + a, v1(j) + a, c.clone());
                }
            }
        }
        // wrap: y sends the bottom of the V1 chain to the top of the V2 chain
        for a in 0..d2 {
            for b in 0..d1 {
                y.set(v2(1) + a, v1(m) + b, alpha.get(a, b).clone());
            }
        }
        for i in 1..=n {
            let w = field.from_int(n as i64 + 1 - 2 * i as i64);
            for a in 0..d2 {
                h.set(v2(i) + a, v2(i) + a, w.clone());
            }
            if i >= 2 {
                let c = field.from_int(i as i64 - 1);
                for a in 0..d2 {
                    x.set(v2(i - 1) + a, v2(i) + a, c.clone());
                }
            }
            if i < n {
                let c = field.from_int(n as i64 - i as i64);
                for a in 0..d2 {
                    y.set(v2(i + 1) + a, v2(i) + a, c.clone());
                }
            }
        }
        for a in 0..d1 {
            for b in 0..d2 {
                y.set(v1(1) + a, v2(n) + b, beta.get(a, b).clone());
            }
        }
        SL2Module::from_parts(field, vec![GeneratorTriple { h, x, y }])
    }

    /// Tensor product of copies of the natural module, the i-th factor
    /// twisted by the Frobenius iterate lambda -> lambda^(p^{a_i}). Each
    /// generator acts by the Leibniz rule through the twisted scalar.
    pub fn twisted_tensor(field: &FieldSpec, exponents: &[usize]) -> Result<SL2Module> {
        if field.characteristic() == 0 {
            return Err(Error::CharZeroUnsupported);
        }
        if exponents.is_empty() {
            return Err(Error::EmptyInput("twisted tensor needs a factor".into()));
        }
        let e = field.extension_degree();
        if exponents.iter().any(|&a| a >= e) {
            return Err(Error::Malformed(format!(
                "frobenius exponents must lie in [0,{e})"
            )));
        }
        let nfac = exponents.len();
        let nat = |kind: usize, lam: &Scalar| -> Matrix {
            let mut m = Matrix::zeros(field, 2, 2);
            match kind {
                0 => {
                    m.set(0, 0, lam.clone());
                    m.set(1, 1, field.neg(lam));
                }
                1 => m.set(0, 1, lam.clone()),
                _ => m.set(1, 0, lam.clone()),
            }
            m
        };
        let mut gens = Vec::with_capacity(e);
        for j in 0..e {
            let lam = field.basis_element(j);
            let mut triple = Vec::with_capacity(3);
            for kind in 0..3 {
                let mut sum = Matrix::zeros(field, 1 << nfac, 1 << nfac);
                for (i, &a) in exponents.iter().enumerate() {
                    let twisted = field.frobenius(&lam, a);
                    let mut term = Matrix::identity(field, 1);
                    for slot in 0..nfac {
                        let factor = if slot == i {
                            nat(kind, &twisted)
                        } else {
                            Matrix::identity(field, 2)
                        };
                        term = term.kronecker(&factor);
                    }
                    sum = sum.add(&term);
                }
                triple.push(restrict_scalars(&sum));
            }
            let y = triple.pop().unwrap();
            let x = triple.pop().unwrap();
            let h = triple.pop().unwrap();
            gens.push(GeneratorTriple { h, x, y });
        }
        SL2Module::from_parts(field.clone(), gens)
    }

    pub fn direct_sum(parts: &[SL2Module]) -> Result<SL2Module> {
        let Some(first) = parts.first() else {
            return Err(Error::EmptyInput("direct sum of no modules".into()));
        };
        if parts.iter().any(|m| m.field != first.field) {
            return Err(Error::FieldMismatch);
        }
        let e = first.gens.len();
        let gens = (0..e)
            .map(|j| {
                let hs: Vec<&Matrix> = parts.iter().map(|m| m.h(j)).collect();
                let xs: Vec<&Matrix> = parts.iter().map(|m| m.x(j)).collect();
                let ys: Vec<&Matrix> = parts.iter().map(|m| m.y(j)).collect();
                GeneratorTriple {
                    h: Matrix::block_diag(&hs),
                    x: Matrix::block_diag(&xs),
                    y: Matrix::block_diag(&ys),
                }
            })
            .collect();
        SL2Module::from_parts(first.field.clone(), gens)
    }

    /// Conjugate every generator by a seeded random invertible prime-field
    /// matrix. Deterministic in the seed; preserves the isomorphism class.
    pub fn scramble(&self, seed: u64) -> SL2Module {
        let t = random_invertible(&self.prime_field(), self.dim, seed);
        self.conjugate(&t)
    }

    pub fn conjugate(&self, t: &Matrix) -> SL2Module {
        let tinv = t.inverse().expect("conjugator must be invertible");
        let gens = self
            .gens
            .iter()
            .map(|g| GeneratorTriple {
                h: t.mul(&g.h).mul(&tinv),
                x: t.mul(&g.x).mul(&tinv),
                y: t.mul(&g.y).mul(&tinv),
            })
            .collect();
        SL2Module {
            field: self.field.clone(),
            dim: self.dim,
            gens,
        }
    }

    /// Intersection of the kernels of all generators.
    pub fn annihilator(&self) -> Subspace {
        let p1 = self.prime_field();
        let mut acc = Subspace::full(&p1, self.dim);
        for (_, m) in self.generator_matrices() {
            acc = acc.intersect(&m.kernel());
        }
        acc
    }

    /// Sum of the images of all generators.
    pub fn g_dot_v(&self) -> Subspace {
        let p1 = self.prime_field();
        let mut acc = Subspace::zero(&p1, self.dim);
        for (_, m) in self.generator_matrices() {
            acc = acc.sum(&m.image());
        }
        acc
    }

    /// Weight space for H_0 and the given label (a residue representative
    /// for p > 0, an integer for Q).
    pub fn weight_space(&self, i: i64) -> Subspace {
        let p1 = self.prime_field();
        let shifted = self
            .h0()
            .sub(&Matrix::identity(&p1, self.dim).scale(&p1.from_int(i)));
        shifted.kernel()
    }

    pub fn generalized_weight_space(&self, i: i64) -> Subspace {
        let p1 = self.prime_field();
        let shifted = self
            .h0()
            .sub(&Matrix::identity(&p1, self.dim).scale(&p1.from_int(i)));
        shifted.mul(&shifted).kernel()
    }

    fn weight_labels(&self) -> Vec<i64> {
        match self.field.characteristic() {
            0 => {
                let b = self.dim as i64;
                (-b..=b).collect()
            }
            p => (0..p as i64).collect(),
        }
    }

    /// All nonzero weight spaces of H_0, with the shift property of x and y
    /// verified on each (x raises the label by 2, y lowers it, h_lambda
    /// preserves it).
    pub fn weight_spaces(&self) -> Result<Vec<(i64, Subspace)>> {
        self.weight_spaces_by(|i| self.weight_space(i))
    }

    /// Generalized weight spaces ker (H_0 - i)^2, same interface.
    pub fn generalized_weight_spaces(&self) -> Result<Vec<(i64, Subspace)>> {
        self.weight_spaces_by(|i| self.generalized_weight_space(i))
    }

    fn weight_spaces_by(&self, space: impl Fn(i64) -> Subspace) -> Result<Vec<(i64, Subspace)>> {
        let p = self.field.characteristic() as i64;
        let mut out = Vec::new();
        for i in self.weight_labels() {
            let s = space(i);
            if s.is_zero() {
                continue;
            }
            let up = if p > 0 { (i + 2).rem_euclid(p) } else { i + 2 };
            let down = if p > 0 { (i - 2).rem_euclid(p) } else { i - 2 };
            let e_up = space(up);
            let e_down = space(down);
            for (j, g) in self.gens.iter().enumerate() {
                if !e_up.contains(&s.apply(&g.x)) {
                    return Err(Error::HypothesisViolated(format!(
                        "X_{j} does not raise weight {i} by 2"
                    )));
                }
                if !e_down.contains(&s.apply(&g.y)) {
                    return Err(Error::HypothesisViolated(format!(
                        "Y_{j} does not lower weight {i} by 2"
                    )));
                }
                if !s.contains(&s.apply(&g.h)) {
                    return Err(Error::HypothesisViolated(format!(
                        "H_{j} does not preserve weight {i}"
                    )));
                }
            }
            out.push((i, s));
        }
        Ok(out)
    }

    /// The Casimir operator 2 X0 Y0 + 2 Y0 X0 + H0^2.
    pub fn casimir(&self) -> Matrix {
        let two = self.prime_field().from_int(2);
        let xy = self.x0().mul(self.y0());
        let yx = self.y0().mul(self.x0());
        let hh = self.h0().mul(self.h0());
        xy.scale(&two).add(&yx.scale(&two)).add(&hh)
    }

    /// Smallest subspace containing the vectors and invariant under every
    /// generator.
    pub fn submodule_closure(&self, vectors: &[Vec<Scalar>]) -> Subspace {
        let p1 = self.prime_field();
        let mut span = Subspace::from_vectors(&p1, self.dim, vectors.to_vec());
        loop {
            let before = span.dim();
            let mut next = span.clone();
            for (_, g) in self.generator_matrices() {
                next = next.sum(&span.apply(g));
            }
            if next.dim() == before {
                return next;
            }
            span = next;
        }
    }

    pub fn is_invariant(&self, w: &Subspace) -> bool {
        self.generator_matrices()
            .iter()
            .all(|(_, g)| w.contains(&w.apply(g)))
    }

    /// Largest subspace of `inside` invariant under all generators.
    pub fn largest_invariant_inside(&self, inside: &Subspace) -> Subspace {
        let mut w = inside.clone();
        loop {
            let mut next = w.clone();
            for (_, g) in self.generator_matrices() {
                next = next.intersect(&w.preimage(g));
            }
            if next.dim() == w.dim() {
                return next;
            }
            w = next;
        }
    }

    /// Restriction of the action to an invariant subspace, in its echelon
    /// basis. Returns the submodule and the basis used for lifting.
    pub fn restrict(&self, w: &Subspace) -> Result<Restriction> {
        let rows = w.basis_rows();
        for (name, g) in self.generator_matrices() {
            if !w.contains(&w.apply(g)) {
                return Err(Error::NotInvariant(name));
            }
        }
        let p1 = self.prime_field();
        let k = w.dim();
        let induced = |m: &Matrix| -> Matrix {
            let mut out = Matrix::zeros(&p1, k, k);
            for (col, r) in rows.iter().enumerate() {
                let img = m.apply(r);
                let coords = w.coordinates(&img).expect("invariance checked");
                for (row, c) in coords.into_iter().enumerate() {
                    out.set(row, col, c);
                }
            }
            out
        };
        let gens = self
            .gens
            .iter()
            .map(|g| GeneratorTriple {
                h: induced(&g.h),
                x: induced(&g.x),
                y: induced(&g.y),
            })
            .collect();
        let module = SL2Module::from_parts(self.field.clone(), gens)?;
        Ok(Restriction {
            module,
            basis: w.clone(),
        })
    }

    /// Quotient by an invariant subspace. Coordinates of the quotient are the
    /// non-pivot positions of the subspace's echelon basis.
    pub fn quotient(&self, w: &Subspace) -> Result<QuotientData> {
        for (name, g) in self.generator_matrices() {
            if !w.contains(&w.apply(g)) {
                return Err(Error::NotInvariant(name));
            }
        }
        let p1 = self.prime_field();
        let pivot_set: std::collections::HashSet<usize> = w.pivots().iter().copied().collect();
        let free: Vec<usize> = (0..self.dim).filter(|c| !pivot_set.contains(c)).collect();
        let q = QuotientData {
            module: SL2Module::trivial(&self.field, 0),
            w: w.clone(),
            free: free.clone(),
            ambient: self.dim,
        };
        let k = free.len();
        let induced = |m: &Matrix| -> Matrix {
            let mut out = Matrix::zeros(&p1, k, k);
            for (col, &fc) in free.iter().enumerate() {
                let mut v = vec![p1.zero(); self.dim];
                v[fc] = p1.one();
                let img = m.apply(&v);
                let coords = q.project(&img);
                for (row, c) in coords.into_iter().enumerate() {
                    out.set(row, col, c);
                }
            }
            out
        };
        let gens = self
            .gens
            .iter()
            .map(|g| GeneratorTriple {
                h: induced(&g.h),
                x: induced(&g.x),
                y: induced(&g.y),
            })
            .collect();
        let module = SL2Module::from_parts(self.field.clone(), gens)?;
        Ok(QuotientData { module, ..q })
    }

    /// Simplicity by exhaustive closure search. When X_0 is nilpotent every
    /// nonzero submodule meets ker X_0 (the restriction of X_0 stays
    /// nilpotent), so only projective points of ker X_0 need enumeration;
    /// otherwise all projective points of the carrier are tried.
    pub fn is_simple_bruteforce(&self, budget: u128) -> Result<bool> {
        let p = self.field.characteristic();
        if p == 0 {
            return Err(Error::CharZeroUnsupported);
        }
        if self.dim == 0 {
            return Ok(false);
        }
        let p1 = self.prime_field();
        let nilpotent = self.x0().pow(self.dim).is_zero();
        let seed_space = if nilpotent {
            self.x0().kernel()
        } else {
            Subspace::full(&p1, self.dim)
        };
        let k = seed_space.dim() as u32;
        if k == 0 {
            // x0 invertible kernel case cannot happen (full space has dim > 0)
            return Ok(false);
        }
        let points = ((p as u128).pow(k) - 1) / (p as u128 - 1);
        if points > budget {
            return Err(Error::BudgetExceeded {
                count: points,
                budget,
            });
        }
        let basis = seed_space.basis_rows();
        // coordinates with first nonzero entry equal to 1
        let mut coords = vec![0u64; k as usize];
        for lead in 0..k as usize {
            coords.iter_mut().for_each(|c| *c = 0);
            coords[lead] = 1;
            loop {
                let mut v = vec![p1.zero(); self.dim];
                for (ci, &c) in coords.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let s = p1.from_int(c as i64);
                    for j in 0..self.dim {
                        v[j] = p1.add(&v[j], &p1.mul(&s, &basis[ci][j]));
                    }
                }
                if self.submodule_closure(&[v]).dim() != self.dim {
                    return Ok(false);
                }
                // advance the free coordinates after the leading one
                let mut pos = k as usize;
                loop {
                    if pos == lead + 1 {
                        pos = 0;
                        break;
                    }
                    let idx = pos - 1;
                    coords[idx] += 1;
                    if coords[idx] < p {
                        break;
                    }
                    coords[idx] = 0;
                    pos -= 1;
                }
                if pos == 0 {
                    break;
                }
            }
        }
        Ok(true)
    }
}

/// A submodule together with the basis identifying it inside its parent.
pub struct Restriction {
    pub module: SL2Module,
    pub basis: Subspace,
}

impl Restriction {
    /// Lift a vector of the restricted module back to the parent.
    pub fn lift(&self, v: &[Scalar]) -> Vec<Scalar> {
        let f = self.basis.field().clone();
        let n = self.basis.ambient_dim();
        let mut out = vec![f.zero(); n];
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for j in 0..n {
                out[j] = f.add(&out[j], &f.mul(c, self.basis.basis().get(i, j)));
            }
        }
        out
    }

    pub fn lift_subspace(&self, s: &Subspace) -> Subspace {
        let rows: Vec<Vec<Scalar>> = s.basis_rows().iter().map(|r| self.lift(r)).collect();
        Subspace::from_vectors(self.basis.field(), self.basis.ambient_dim(), rows)
    }
}

/// A quotient module together with the projection data.
pub struct QuotientData {
    pub module: SL2Module,
    pub w: Subspace,
    free: Vec<usize>,
    ambient: usize,
}

impl QuotientData {
    /// Coordinates of the class of v: reduce along the subspace basis and
    /// read the non-pivot positions.
    pub fn project(&self, v: &[Scalar]) -> Vec<Scalar> {
        let mut w = v.to_vec();
        let f = self.w.field().clone();
        // eliminate pivot coordinates
        for (ri, &pc) in self.w.pivots().iter().enumerate() {
            if w[pc].is_zero() {
                continue;
            }
            let factor = w[pc].clone();
            for j in 0..self.ambient {
                let s = f.mul(&factor, self.w.basis().get(ri, j));
                w[j] = f.sub(&w[j], &s);
            }
        }
        self.free.iter().map(|&c| w[c].clone()).collect()
    }

    /// A representative of a quotient vector: non-pivot coordinates filled,
    /// pivot coordinates zero.
    pub fn lift(&self, v: &[Scalar]) -> Vec<Scalar> {
        let f = self.w.field().clone();
        let mut out = vec![f.zero(); self.ambient];
        for (i, &c) in self.free.iter().enumerate() {
            out[c] = v[i].clone();
        }
        out
    }

    /// Preimage in the parent of a subspace of the quotient.
    pub fn lift_subspace(&self, s: &Subspace) -> Subspace {
        let mut rows: Vec<Vec<Scalar>> = s.basis_rows().iter().map(|r| self.lift(r)).collect();
        rows.extend(self.w.basis_rows());
        Subspace::from_vectors(self.w.field(), self.ambient, rows)
    }
}

fn random_invertible(field: &FieldSpec, n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            for j in 0..n {
                let v = match field.characteristic() {
                    0 => field.from_int(rng.gen_range(-2i64..=2)),
                    p => field.from_int(rng.gen_range(0..p) as i64),
                };
                m.set(i, j, v);
            }
        }
        if n == 0 || m.inverse().is_some() {
            return m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    fn f9() -> FieldSpec {
        FieldSpec::new(3, 2, None).unwrap()
    }

    #[test]
    fn sym1_over_f5_matches_natural_action() {
        let m = SL2Module::sym_power(1, &f(5)).unwrap();
        // basis (Y, X): x maps Y to X and kills X; h = diag(-1, 1)
        let p1 = f(5);
        assert_eq!(*m.x0(), Matrix::from_ints(&p1, 2, 2, &[0, 0, 1, 0]));
        assert_eq!(*m.h0(), Matrix::from_ints(&p1, 2, 2, &[-1, 0, 0, 1]));
        assert!(m.validate().is_valid());
    }

    #[test]
    fn sym_power_char_too_small() {
        assert_eq!(
            SL2Module::sym_power(3, &f(3)),
            Err(Error::CharTooSmall { p: 3, needed: 4 })
        );
        // the boundary case p = k+1 is allowed and valid
        let edge = SL2Module::sym_power(2, &f(3)).unwrap();
        assert!(edge.validate().is_valid());
        // characteristic zero always works
        assert!(SL2Module::sym_power(5, &FieldSpec::rationals()).is_ok());
    }

    #[test]
    fn sym2_over_f7_x_rank_and_nilpotency() {
        let m = SL2Module::sym_power(2, &f(7)).unwrap();
        // x kills only the top monomial X^2
        assert_eq!(m.x0().rank(), 2);
        assert!(!m.x0().pow(2).is_zero());
        assert!(m.x0().pow(3).is_zero());
    }

    #[test]
    fn constructors_validate() {
        let one = Matrix::identity(&f(3), 1);
        for m in [
            SL2Module::sym_power(3, &f(7)).unwrap(),
            SL2Module::sym_power(1, &f9()).unwrap(),
            SL2Module::sab(2, 3, &one, &one).unwrap(),
            SL2Module::twisted_tensor(&f9(), &[0, 1]).unwrap(),
            SL2Module::trivial(&f(5), 3),
            SL2Module::sym_power(2, &FieldSpec::rationals()).unwrap(),
        ] {
            let rep = m.validate();
            assert!(rep.is_valid(), "failures: {:?}", rep.failures);
        }
    }

    #[test]
    fn corrupted_module_reports_xy_failure() {
        let mut m = SL2Module::sym_power(1, &f(5)).unwrap();
        // swap X and Y in the only triple
        let g = m.gens[0].clone();
        m.gens[0] = GeneratorTriple {
            h: g.h,
            x: g.y,
            y: g.x,
        };
        let rep = m.validate();
        assert!(!rep.is_valid());
        assert!(rep
            .failures
            .iter()
            .any(|fl| fl.relation.contains("[X_i,Y_j]")));
    }

    #[test]
    fn sab_requires_the_window() {
        let one = Matrix::identity(&f(7), 1);
        assert!(matches!(
            SL2Module::sab(3, 7, &one, &one),
            Err(Error::BadCharacteristicWindow { n: 3, p: 7 })
        ));
    }

    #[test]
    fn sab_2_3_identity_links() {
        let one = Matrix::identity(&f(3), 1);
        let m = SL2Module::sab(2, 3, &one, &one).unwrap();
        assert_eq!(m.dim(), 3);
        assert!(m.validate().is_valid());
        // x^2 = 0 by construction, y^2 walks around the link so it is nonzero
        assert!(m.x0().pow(2).is_zero());
        assert!(!m.y0().pow(2).is_zero());
        // weight spaces: E_0 the V1 chain, E_1 and E_2 the V2 chain
        for (label, dim) in [(0, 1), (1, 1), (2, 1)] {
            assert_eq!(m.weight_space(label).dim(), dim, "E_{label}");
        }
    }

    #[test]
    fn sab_zero_links_decompose() {
        let zero = Matrix::zeros(&f(3), 1, 1);
        let m = SL2Module::sab(2, 3, &zero, &zero).unwrap();
        assert!(m.validate().is_valid());
        // with alpha = beta = 0 the two chains are independent submodules
        assert!(!m.is_simple_bruteforce(1_000).unwrap());
        assert!(m.y0().pow(2).is_zero());
        // and the module splits as trivial + Nat
        let rep = crate::decomposition::classify_quadratic_char3(&m).unwrap();
        assert_eq!(rep.ann_dim, 1);
        assert_eq!(rep.multiplicities.get(&1), Some(&1));
    }

    #[test]
    fn direct_sum_rejects_mixed_fields() {
        let a = SL2Module::trivial(&f(5), 1);
        let b = SL2Module::trivial(&f(7), 1);
        assert_eq!(SL2Module::direct_sum(&[a, b]), Err(Error::FieldMismatch));
        assert!(matches!(
            SL2Module::direct_sum(&[]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn twisted_tensor_f9_bilinear_cancellation() {
        let k = f9();
        let m = SL2Module::twisted_tensor(&k, &[0, 1]).unwrap();
        assert_eq!(m.dim(), 8);
        assert!(m.validate().is_valid());
        // X_1 X_t = 0 although X_1^2 != 0: a product of twisted maps vanishes
        // with neither factor square-zero
        let xt = m.x(1);
        let x1 = m.x(0);
        assert!(x1.mul(xt).is_zero());
        assert!(xt.mul(x1).is_zero());
        assert!(!x1.mul(x1).is_zero());
        // witness vector a = e_{2,1} - e_{1,2}: killed by X_1 but not X_t
        let p1 = m.prime_field();
        let e = 2;
        let mut a = vec![p1.zero(); 8];
        a[2 * e] = p1.one(); // e_{2,1} is tensor index 2
        a[e] = p1.from_int(-1); // e_{1,2} is tensor index 1
        assert!(m.x0().apply(&a).iter().all(|c| c.is_zero()));
        let xta = xt.apply(&a);
        assert!(xta.iter().any(|c| !c.is_zero()));
        // X_t a = (t - t^3) e_{1,1} = (t - (-t)) e_{1,1} = 2t e_{1,1}
        let mut expect = vec![p1.zero(); 8];
        expect[1] = p1.from_int(2);
        assert_eq!(xta, expect);
    }

    #[test]
    fn twisted_identity_twist_is_natural() {
        let k = f9();
        let tw = SL2Module::twisted_tensor(&k, &[0]).unwrap();
        let nat = SL2Module::sym_power(1, &k).unwrap();
        // same dimension and an explicit intertwiner: swap basis order Y,X vs e1,e2
        assert_eq!(tw.dim(), nat.dim());
        let p1 = tw.prime_field();
        // nat basis (Y, X) maps to tensor basis (e2, e1) blockwise
        let mut t = Matrix::zeros(&p1, 4, 4);
        for c in 0..2 {
            t.set(2 + c, c, p1.one());
            t.set(c, 2 + c, p1.one());
        }
        let map = ModuleMap { matrix: t };
        assert!(map.is_isomorphism(&nat, &tw).unwrap());
    }

    #[test]
    fn direct_sum_and_annihilator() {
        let p1 = f(5);
        let m = SL2Module::direct_sum(&[
            SL2Module::trivial(&p1, 2),
            SL2Module::sym_power(1, &p1).unwrap(),
        ])
        .unwrap();
        assert_eq!(m.dim(), 4);
        assert!(m.validate().is_valid());
        assert_eq!(m.annihilator().dim(), 2);
        assert_eq!(m.g_dot_v().dim(), 2);
        // both are invariant
        assert!(m.is_invariant(&m.annihilator()));
        assert!(m.is_invariant(&m.g_dot_v()));
    }

    #[test]
    fn trivial_module_extremes() {
        let m = SL2Module::trivial(&f(5), 3);
        assert!(m.annihilator().is_full());
        assert!(m.g_dot_v().is_zero());
        assert!(m.casimir().is_zero());
        let ws = m.weight_spaces().unwrap();
        assert_eq!(ws.len(), 1);
        assert_eq!(ws[0].0, 0);
        assert!(ws[0].1.is_full());
    }

    #[test]
    fn sym2_weights_and_casimir_over_f5() {
        let m = SL2Module::sym_power(2, &f(5)).unwrap();
        let ws = m.weight_spaces().unwrap();
        let labels: Vec<i64> = ws.iter().map(|(l, _)| *l).collect();
        assert_eq!(labels, vec![0, 2, 3]);
        for (_, s) in &ws {
            assert_eq!(s.dim(), 1);
        }
        // casimir acts as k(k+2) = 8 = 3 mod 5
        let c = m.casimir();
        assert_eq!(c.scalar_of_identity(), Some(f(5).from_int(8)));
        // annihilator empty, g.V everything: irreducible
        assert!(m.annihilator().is_zero());
        assert!(m.g_dot_v().is_full());
    }

    #[test]
    fn casimir_commutes_over_prime_field() {
        let m = SL2Module::sym_power(3, &f(7)).unwrap().scramble(11);
        let c = m.casimir();
        for (_, g) in m.generator_matrices() {
            assert!(c.commutator(g).is_zero());
        }
    }

    #[test]
    fn casimir_noncentrality_witness_on_f9_tensor() {
        let m = SL2Module::twisted_tensor(&f9(), &[0, 1]).unwrap();
        let c = m.casimir();
        let p1 = m.prime_field();
        let eight = p1.from_int(8);
        for j in 0..2 {
            // [c1, h_lambda] = 8 (x y_lambda - x_lambda y)
            let lhs = c.commutator(m.h(j));
            let rhs = m.x0().mul(m.y(j)).sub(&m.x(j).mul(m.y0())).scale(&eight);
            assert_eq!(lhs, rhs);
        }
        // and it is genuinely noncentral
        assert!(!c.commutator(m.h(1)).is_zero());
    }

    #[test]
    fn scramble_preserves_class() {
        let m = SL2Module::sym_power(2, &f(7)).unwrap();
        let s = m.scramble(42);
        assert!(s.validate().is_valid());
        // closure of the scrambled highest vector still generates everything
        assert!(s.is_simple_bruteforce(10_000).unwrap());
    }

    #[test]
    fn closure_of_highest_vector_is_all_of_sym_k() {
        let m = SL2Module::sym_power(3, &f(7)).unwrap();
        let p1 = m.prime_field();
        let mut top = vec![p1.zero(); 4];
        top[3] = p1.one(); // X^3
        assert!(m.submodule_closure(&[top]).is_full());
    }

    #[test]
    fn simplicity_bruteforce_examples() {
        let p1 = f(5);
        let two_nats = SL2Module::direct_sum(&[
            SL2Module::sym_power(1, &p1).unwrap(),
            SL2Module::sym_power(1, &p1).unwrap(),
        ])
        .unwrap();
        assert!(!two_nats.is_simple_bruteforce(1_000_000).unwrap());
        let one = Matrix::identity(&f(3), 1);
        let sab = SL2Module::sab(2, 3, &one, &one).unwrap();
        assert!(sab.is_simple_bruteforce(1_000_000).unwrap());
        // budget enforcement
        assert!(matches!(
            two_nats.is_simple_bruteforce(1),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn quotient_and_restrict_round_trip() {
        let p1 = f(5);
        let m = SL2Module::direct_sum(&[
            SL2Module::trivial(&p1, 1),
            SL2Module::sym_power(1, &p1).unwrap(),
        ])
        .unwrap()
        .scramble(3);
        let ann = m.annihilator();
        let gv = m.g_dot_v();
        let r = m.restrict(&gv).unwrap();
        assert!(r.module.validate().is_valid());
        assert_eq!(r.module.dim(), 2);
        let q = m.quotient(&ann).unwrap();
        assert!(q.module.validate().is_valid());
        assert_eq!(q.module.dim(), 2);
        // g.V maps isomorphically onto V/Ann here
        assert_eq!(q.module.g_dot_v().dim(), 2);
        // restriction to a non-invariant subspace errors
        let p1 = m.prime_field();
        let mut v = vec![p1.zero(); 3];
        v[0] = p1.one();
        let line = Subspace::from_vectors(&p1, 3, vec![v]);
        if !m.is_invariant(&line) {
            assert!(matches!(m.restrict(&line), Err(Error::NotInvariant(_))));
        }
    }

    #[test]
    fn weight_spaces_of_rational_sym3() {
        let q = FieldSpec::rationals();
        let m = SL2Module::sym_power(3, &q).unwrap();
        let ws = m.weight_spaces().unwrap();
        let labels: Vec<i64> = ws.iter().map(|(l, _)| *l).collect();
        assert_eq!(labels, vec![-3, -1, 1, 3]);
        let c = m.casimir();
        assert_eq!(c.scalar_of_identity(), Some(q.from_int(15)));
    }

    #[test]
    fn sym_powers_over_extensions_have_k_line_weights() {
        let k = f9();
        let m = SL2Module::sym_power(2, &k).unwrap();
        assert_eq!(m.dim(), 6);
        let ws = m.weight_spaces().unwrap();
        for (_, s) in &ws {
            assert_eq!(s.dim(), 2); // one K-line each
        }
        assert_eq!(ws.len(), 3);
        // jordan structure: rank X0^j = (k+1-j) * e
        for j in 0..=3usize {
            assert_eq!(m.x0().pow(j).rank(), (3 - j) * 2);
        }
    }
}
