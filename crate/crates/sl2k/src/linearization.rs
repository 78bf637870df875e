//! Reconstruction of scalar structure: recover a K-vector-space structure on
//! an abstract module whose prime-field skeleton is isotypic, build the
//! kernel and image composition series, and separate the annihilator from
//! g.V when both coherence hypotheses hold.

use std::collections::BTreeMap;

use num::BigInt;

use crate::decomposition::build_witness;
use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::matrix::{Matrix, Subspace};
use crate::module::{k_scalar_matrices, ModuleMap, SL2Module};

/// d_i = (i-1)! (n-1)! / (n-i)! for i = 1..n; these scale the scalar
/// reconstruction on each weight block. All prime factors are below n.
pub fn d_coefficients(n: usize) -> Vec<BigInt> {
    assert!(n >= 2, "need n >= 2");
    let fact = |m: usize| -> BigInt {
        (1..=m as i64)
            .map(BigInt::from)
            .product::<BigInt>()
            .max(BigInt::from(1))
    };
    (1..=n)
        .map(|i| fact(i - 1) * fact(n - 1) / fact(n - i))
        .collect()
}

/// The action of multiplication by each K-basis element on a carrier,
/// stored per basis index and extended additively.
#[derive(Debug, Clone)]
pub struct ScalarAction {
    matrices: Vec<Matrix>,
}

impl ScalarAction {
    pub fn new(matrices: Vec<Matrix>) -> ScalarAction {
        ScalarAction { matrices }
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    /// Multiplication by an arbitrary scalar, assembled by additivity.
    pub fn action_of(&self, field: &FieldSpec, lambda: &Scalar) -> Matrix {
        let p1 = field.prime_subfield();
        let coeffs: Vec<Scalar> = if field.is_rational() {
            vec![lambda.clone()]
        } else {
            field
                .coeffs(lambda)
                .iter()
                .map(|&c| p1.from_int(c as i64))
                .collect()
        };
        let d = self.matrices[0].rows();
        let mut acc = Matrix::zeros(&p1, d, d);
        for (j, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add(&self.matrices[j].scale(c));
            }
        }
        acc
    }

    /// Check the scalar-action laws against a module: multiplication by 1 is
    /// the identity, products of basis elements multiply through the field
    /// table, and every generator commutes with every scalar.
    pub fn verify(&self, v: &SL2Module) -> Result<()> {
        let k = v.field();
        let e = k.extension_degree();
        if self.matrices.len() != e {
            return Err(Error::HypothesisViolated(format!(
                "scalar action has {} matrices, field has degree {e}",
                self.matrices.len()
            )));
        }
        let p1 = v.prime_field();
        if self.matrices[0] != Matrix::identity(&p1, v.dim()) {
            return Err(Error::HypothesisViolated(
                "multiplication by 1 is not the identity".into(),
            ));
        }
        for i in 0..e {
            for j in 0..e {
                let expect = if k.is_rational() {
                    self.matrices[0].clone()
                } else {
                    let mut acc = Matrix::zeros(&p1, v.dim(), v.dim());
                    for (idx, &c) in k.basis_product(i, j).iter().enumerate() {
                        if c != 0 {
                            acc = acc.add(&self.matrices[idx].scale(&p1.from_int(c as i64)));
                        }
                    }
                    acc
                };
                if self.matrices[i].mul(&self.matrices[j]) != expect
                    || self.matrices[j].mul(&self.matrices[i]) != expect
                {
                    return Err(Error::HypothesisViolated(format!(
                        "scalar action fails multiplicativity at basis pair ({i},{j})"
                    )));
                }
            }
        }
        for (name, g) in v.generator_matrices() {
            for (j, s) in self.matrices.iter().enumerate() {
                if !g.commutator(s).is_zero() {
                    return Err(Error::HypothesisViolated(format!(
                        "generator {name} does not commute with scalar {j}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A verified isomorphism onto a sum of symmetric powers over K.
#[derive(Debug, Clone)]
pub struct KClassification {
    /// k -> number of Sym^k Nat summands over K.
    pub multiplicities: BTreeMap<usize, usize>,
    pub model: SL2Module,
    pub witness: ModuleMap,
}

#[derive(Debug, Clone)]
pub struct LinearizeOutcome {
    pub action: ScalarAction,
    /// Dimension of the carrier over K.
    pub k_dim: usize,
    /// Number of Sym^{n-1} copies over K.
    pub copies: usize,
    pub classification: KClassification,
}

/// Coherence of kernels: ker x <= ker x_lambda for every lambda. Checking
/// the K-basis generators suffices: x_lambda is a prime-field combination of
/// them, and a sum of maps killing a subspace kills it.
pub fn kernel_coherent(v: &SL2Module) -> bool {
    let kerx = v.x0().kernel();
    (0..v.generators().len()).all(|j| v.x(j).kernel().contains(&kerx))
}

/// Coherence of images: im x_lambda <= im x for every lambda; a sum of maps
/// with images inside im x stays inside.
pub fn image_coherent(v: &SL2Module) -> bool {
    let imx = v.x0().image();
    (0..v.generators().len()).all(|j| imx.contains(&v.x(j).image()))
}

/// Recover the K-scalar multiplication on a module whose restriction to the
/// prime-field subring is a sum of copies of Sym^{n-1} with no annihilator,
/// and certify the module as a sum of Sym^{n-1} Nat over K.
///
/// The scalar action on the weight block of label n+1-2i is
/// (1/((n-1) d_i)) y^{i-1} h_lambda x^{i-1}.
pub fn linearize(v: &SL2Module, n: usize) -> Result<LinearizeOutcome> {
    let k = v.field().clone();
    let p = k.characteristic();
    let e = k.extension_degree();
    let p1 = v.prime_field();
    let d = v.dim();
    if n < 2 {
        return Err(Error::HypothesisViolated("need n >= 2".into()));
    }
    if p != 0 && (p as usize) < n {
        return Err(Error::CharTooSmall {
            p,
            needed: n as u64,
        });
    }
    if d % (e * n) != 0 {
        return Err(Error::HypothesisViolated(format!(
            "carrier dimension {d} is not a multiple of e*n = {}",
            e * n
        )));
    }
    let copies = d / (e * n);

    // the prime-field skeleton must be purely Sym^{n-1}-isotypic
    let restriction = SL2Module::from_parts(p1.clone(), vec![v.generators()[0].clone()])?;
    let mut iso_mults = BTreeMap::new();
    if d > 0 {
        iso_mults.insert(n - 1, d / n);
    }
    build_witness(&restriction, 0, &iso_mults).map_err(|_| {
        Error::HypothesisViolated(
            "restriction to the prime subring is not isotypic without annihilator".into(),
        )
    })?;

    if d == 0 {
        let action = ScalarAction::new(vec![Matrix::zeros(&p1, 0, 0); e]);
        let model = SL2Module::trivial(&k, 0);
        let witness = ModuleMap {
            matrix: Matrix::zeros(&p1, 0, 0),
        };
        return Ok(LinearizeOutcome {
            action,
            k_dim: 0,
            copies: 0,
            classification: KClassification {
                multiplicities: BTreeMap::new(),
                model,
                witness,
            },
        });
    }

    // weight blocks with pairwise distinct labels
    let labels: Vec<i64> = (1..=n)
        .map(|i| {
            let w = n as i64 + 1 - 2 * i as i64;
            if p > 0 {
                w.rem_euclid(p as i64)
            } else {
                w
            }
        })
        .collect();
    {
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != n {
            return Err(Error::HypothesisViolated(
                "weight labels collide in this characteristic".into(),
            ));
        }
    }
    let blocks: Vec<Subspace> = labels.iter().map(|&l| v.weight_space(l)).collect();
    let total: usize = blocks.iter().map(|b| b.dim()).sum();
    if total != d {
        return Err(Error::HypothesisViolated(
            "weight spaces do not span the carrier".into(),
        ));
    }

    // projections onto each block along the others
    let mut basis = Matrix::zeros(&p1, d, d);
    let mut row0 = 0usize;
    let mut ranges = Vec::new();
    for b in &blocks {
        for (i, r) in b.basis_rows().iter().enumerate() {
            for (j, c) in r.iter().enumerate() {
                basis.set(row0 + i, j, c.clone());
            }
        }
        ranges.push(row0..row0 + b.dim());
        row0 += b.dim();
    }
    let bt = basis.transpose();
    let bt_inv = bt
        .inverse()
        .ok_or_else(|| Error::HypothesisViolated("weight spaces are not independent".into()))?;
    let projections: Vec<Matrix> = ranges
        .iter()
        .map(|range| {
            let mut diag = Matrix::zeros(&p1, d, d);
            for i in range.clone() {
                diag.set(i, i, p1.one());
            }
            bt.mul(&diag).mul(&bt_inv)
        })
        .collect();

    // scalar action by the weight-block formula
    let ds = d_coefficients(n);
    let mut coefs = Vec::with_capacity(n);
    for di in &ds {
        let scaled = BigInt::from(n as i64 - 1) * di;
        let c = p1
            .from_fraction(BigInt::from(1), scaled.clone())
            .map_err(|_| Error::DivisionUnavailable(format!("(n-1) d_i = {scaled}")))?;
        coefs.push(c);
    }
    let mut xpow = vec![Matrix::identity(&p1, d)];
    let mut ypow = vec![Matrix::identity(&p1, d)];
    for i in 1..n {
        xpow.push(xpow[i - 1].mul(v.x0()));
        ypow.push(v.y0().mul(&ypow[i - 1]));
    }
    let action_matrices: Vec<Matrix> = (0..e)
        .map(|j| {
            let mut s = Matrix::zeros(&p1, d, d);
            for (idx, proj) in projections.iter().enumerate() {
                let i = idx + 1;
                let term = ypow[i - 1]
                    .mul(v.h(j))
                    .mul(&xpow[i - 1])
                    .mul(proj)
                    .scale(&coefs[idx]);
                s = s.add(&term);
            }
            s
        })
        .collect();
    let action = ScalarAction::new(action_matrices);
    action.verify(v)?;

    // the action must make the generators K-linear multiples of the
    // prime-field ones and preserve each weight block
    for j in 0..e {
        let sj = &action.matrices[j];
        if *v.x(j) != sj.mul(v.x0()) || *v.y(j) != sj.mul(v.y0()) || *v.h(j) != sj.mul(v.h0()) {
            return Err(Error::HypothesisViolated(format!(
                "generators at basis index {j} are not scalar multiples of the prime triple"
            )));
        }
        for b in &blocks {
            if !b.contains(&b.apply(sj)) {
                return Err(Error::HypothesisViolated(
                    "scalar action does not preserve a weight block".into(),
                ));
            }
        }
    }
    // consequences: kernels and images of all x_lambda agree (same for y)
    for j in 0..e {
        if v.x(j).kernel() != v.x0().kernel() || v.x(j).image() != v.x0().image() {
            return Err(Error::HypothesisViolated(
                "kernel or image of x_lambda differs from x".into(),
            ));
        }
        if v.y(j).kernel() != v.y0().kernel() || v.y(j).image() != v.y0().image() {
            return Err(Error::HypothesisViolated(
                "kernel or image of y_lambda differs from y".into(),
            ));
        }
    }

    // certified isomorphism onto copies of Sym^{n-1} over K: pick a K-basis
    // of the highest weight space and orbit it down with y
    let hw = v.x0().kernel().intersect(&blocks[0]);
    if hw.dim() != copies * e {
        return Err(Error::HypothesisViolated(format!(
            "highest weight space has dimension {}, expected {}",
            hw.dim(),
            copies * e
        )));
    }
    let mut k_basis: Vec<Vec<Scalar>> = Vec::with_capacity(copies);
    let mut span = Subspace::zero(&p1, d);
    for row in hw.basis_rows() {
        if span.contains_vector(&row) {
            continue;
        }
        let line: Vec<Vec<Scalar>> = action.matrices.iter().map(|s| s.apply(&row)).collect();
        span = span.sum(&Subspace::from_vectors(&p1, d, line));
        k_basis.push(row);
    }
    if k_basis.len() != copies || span.dim() != hw.dim() {
        return Err(Error::HypothesisViolated(
            "highest weight space is not free over the recovered scalars".into(),
        ));
    }
    let factorial = |m: usize| -> Scalar {
        let mut acc = p1.one();
        for i in 1..=m as i64 {
            acc = p1.mul(&acc, &p1.from_int(i));
        }
        acc
    };
    let nfact_inv = p1
        .inv(&factorial(n - 1))
        .ok_or_else(|| Error::DivisionUnavailable(format!("{}!", n - 1)))?;
    let mut witness = Matrix::zeros(&p1, d, d);
    let mut col = 0usize;
    for w in &k_basis {
        // orbit[s] = y^s w
        let mut orbit = vec![w.clone()];
        for s in 1..n {
            orbit.push(v.y0().apply(&orbit[s - 1]));
        }
        for r in 0..n {
            // model vector b_j X^r Y^{n-1-r} maps to S_j (r!/(n-1)!) y^{n-1-r} w
            let coef = p1.mul(&factorial(r), &nfact_inv);
            let base: Vec<Scalar> = orbit[n - 1 - r].iter().map(|c| p1.mul(&coef, c)).collect();
            for j in 0..e {
                let img = action.matrices[j].apply(&base);
                for (row, c) in img.iter().enumerate() {
                    witness.set(row, col, c.clone());
                }
                col += 1;
            }
        }
    }
    let model = if copies == 0 {
        SL2Module::trivial(&k, 0)
    } else {
        let one = SL2Module::sym_power(n - 1, &k)?;
        SL2Module::direct_sum(&vec![one; copies])?
    };
    let map = ModuleMap { matrix: witness };
    map.verify(&model, v)
        .map_err(|e| Error::HypothesisViolated(e.to_string()))?;
    if map.matrix.inverse().is_none() {
        return Err(Error::HypothesisViolated(
            "isotype witness is singular".into(),
        ));
    }
    // the witness is K-linear: it intertwines the scalar actions too
    let model_scalars = k_scalar_matrices(&k, n * copies);
    for (j, ms) in model_scalars.iter().enumerate() {
        if map.matrix.mul(ms) != action.matrices[j].mul(&map.matrix) {
            return Err(Error::HypothesisViolated("witness is not K-linear".into()));
        }
    }
    let mut multiplicities = BTreeMap::new();
    if copies > 0 {
        multiplicities.insert(n - 1, copies);
    }
    Ok(LinearizeOutcome {
        action,
        k_dim: d / e,
        copies,
        classification: KClassification {
            multiplicities,
            model,
            witness: map,
        },
    })
}

/// One quotient step of a composition series: V_idx / V_{idx-1} with its
/// isotype k and the recovered K-structure.
#[derive(Debug, Clone)]
pub struct QuotientStep {
    pub k: usize,
    pub outcome: LinearizeOutcome,
}

#[derive(Debug, Clone)]
pub struct SeriesReport {
    /// Ascending invariant subspaces of the input module; n terms.
    pub terms: Vec<Subspace>,
    /// Quotient structures for terms[i+1]/terms[i], in ascending order.
    pub steps: Vec<QuotientStep>,
}

fn check_length_alternatives(v: &SL2Module, n: usize) -> Result<()> {
    let p = v.field().characteristic();
    if !v.x0().pow(n).is_zero() {
        return Err(Error::HypothesisViolated(format!("x^{n} != 0")));
    }
    let large = p == 0 || p as usize >= 2 * n + 1;
    let two_sided = p > 0 && p as usize >= n + 1 && v.y0().pow(n).is_zero();
    if !(large || two_sided) {
        return Err(Error::HypothesisViolated(format!(
            "need characteristic 0 or >= {} with x^{n} = 0, or y^{n} = 0 with characteristic >= {}",
            2 * n + 1,
            n + 1
        )));
    }
    Ok(())
}

/// Ascending series Ann = V_0 <= .. <= V_{n-1} = V whose quotients carry
/// K-structures of ascending isotype, under kernel coherence. V_bot at each
/// stage is the largest invariant subspace killed by x^{n-1}.
pub fn series_ker(v: &SL2Module, n: usize) -> Result<SeriesReport> {
    check_length_alternatives(v, n)?;
    if !kernel_coherent(v) {
        return Err(Error::HypothesisViolated(
            "kernel coherence fails: some ker x is not inside ker x_lambda".into(),
        ));
    }
    series_ker_inner(v, n)
}

fn series_ker_inner(v: &SL2Module, n: usize) -> Result<SeriesReport> {
    let p1 = v.prime_field();
    if n <= 1 {
        // x acts as zero, hence so does everything
        let ann = v.annihilator();
        if !ann.is_full() {
            return Err(Error::HypothesisViolated(
                "length 1 module with nontrivial action".into(),
            ));
        }
        return Ok(SeriesReport {
            terms: vec![Subspace::full(&p1, v.dim())],
            steps: Vec::new(),
        });
    }
    let v_bot = v.largest_invariant_inside(&v.x0().pow(n - 1).kernel());
    // kernel coherence passes to submodules
    let bot = v.restrict(&v_bot)?;
    debug_assert!(kernel_coherent(&bot.module));
    debug_assert!(bot.module.x0().pow(n - 1).is_zero());
    let inner = series_ker_inner(&bot.module, n - 1)?;
    let mut terms: Vec<Subspace> = inner.terms.iter().map(|t| bot.lift_subspace(t)).collect();
    terms.push(Subspace::full(&p1, v.dim()));
    let q = v.quotient(&v_bot)?;
    let outcome = linearize(&q.module, n)?;
    let mut steps = inner.steps;
    steps.push(QuotientStep { k: n - 1, outcome });
    debug_assert_eq!(terms[0], v.annihilator());
    Ok(SeriesReport { terms, steps })
}

/// Ascending series 0 = V_0 <= .. <= V_{n-1} = g.V whose quotients carry
/// K-structures of descending isotype, under image coherence. V_top at each
/// stage is the closure of the image of x^{n-1}.
pub fn series_im(v: &SL2Module, n: usize) -> Result<SeriesReport> {
    check_length_alternatives(v, n)?;
    if !image_coherent(v) {
        return Err(Error::HypothesisViolated(
            "image coherence fails: some im x_lambda is not inside im x".into(),
        ));
    }
    series_im_inner(v, n)
}

fn series_im_inner(v: &SL2Module, n: usize) -> Result<SeriesReport> {
    let p1 = v.prime_field();
    if n <= 1 {
        let gv = v.g_dot_v();
        if !gv.is_zero() {
            return Err(Error::HypothesisViolated(
                "length 1 module with nonzero g.V".into(),
            ));
        }
        return Ok(SeriesReport {
            terms: vec![Subspace::zero(&p1, v.dim())],
            steps: Vec::new(),
        });
    }
    let top_rows: Vec<Vec<Scalar>> = v.x0().pow(n - 1).image().basis_rows();
    let v_top = v.submodule_closure(&top_rows);
    let top = v.restrict(&v_top)?;
    let outcome = linearize(&top.module, n)?;
    let q = v.quotient(&v_top)?;
    // image coherence passes to quotients
    debug_assert!(image_coherent(&q.module));
    debug_assert!(q.module.x0().pow(n - 1).is_zero());
    let inner = series_im_inner(&q.module, n - 1)?;
    let mut terms = vec![Subspace::zero(&p1, v.dim())];
    terms.extend(inner.terms.iter().map(|t| q.lift_subspace(t)));
    let mut steps = vec![QuotientStep { k: n - 1, outcome }];
    steps.extend(inner.steps);
    debug_assert_eq!(*terms.last().unwrap(), v.g_dot_v());
    Ok(SeriesReport { terms, steps })
}

/// Result of separating the annihilator from g.V with a single K-structure
/// on the latter.
#[derive(Debug, Clone)]
pub struct Separation {
    pub ann: Subspace,
    pub g_v: Subspace,
    /// The action restricted to g.V in its echelon basis.
    pub module_on_gv: SL2Module,
    pub action: ScalarAction,
    /// k -> number of Sym^k Nat summands of g.V over K.
    pub multiplicities: BTreeMap<usize, usize>,
    pub model: SL2Module,
    pub witness: ModuleMap,
}

/// Under both coherence hypotheses, V = Ann + g.V directly and g.V carries a
/// K-structure splitting into symmetric-power isotypes.
pub fn separate(v: &SL2Module, n: usize) -> Result<Separation> {
    check_length_alternatives(v, n)?;
    if !kernel_coherent(v) {
        return Err(Error::HypothesisViolated("kernel coherence fails".into()));
    }
    if !image_coherent(v) {
        return Err(Error::HypothesisViolated("image coherence fails".into()));
    }
    let p1 = v.prime_field();
    let ann = v.annihilator();
    let g_v = v.g_dot_v();
    if !ann.intersect(&g_v).is_zero() || ann.dim() + g_v.dim() != v.dim() {
        return Err(Error::NotDirect);
    }

    // peel isotypes from the top: closure of im x^{m-1} against the largest
    // submodule killed by x^{m-1}
    let mut isotypes: Vec<(usize, Subspace, LinearizeOutcome)> = Vec::new();
    let mut current: SL2Module = v.clone();
    // chain of restriction bases back to V coordinates
    let mut lifts: Vec<crate::module::Restriction> = Vec::new();
    let mut m = n;
    loop {
        if m <= 1 {
            if !current.annihilator().is_full() {
                return Err(Error::HypothesisViolated(
                    "separation bottomed out with residual action".into(),
                ));
            }
            break;
        }
        let top_rows = current.x0().pow(m - 1).image().basis_rows();
        let v_top = current.submodule_closure(&top_rows);
        let v_bot = current.largest_invariant_inside(&current.x0().pow(m - 1).kernel());
        if !v_top.intersect(&v_bot).is_zero() || v_top.dim() + v_bot.dim() != current.dim() {
            return Err(Error::NotDirect);
        }
        if !v_top.is_zero() {
            let top = current.restrict(&v_top)?;
            let outcome = linearize(&top.module, m)?;
            // lift the subspace back through the restriction chain
            let mut lifted = v_top.clone();
            for r in lifts.iter().rev() {
                lifted = r.lift_subspace(&lifted);
            }
            isotypes.push((m - 1, lifted, outcome));
        }
        let bot = current.restrict(&v_bot)?;
        lifts.push(crate::module::Restriction {
            module: bot.module.clone(),
            basis: bot.basis.clone(),
        });
        current = bot.module;
        m -= 1;
    }

    // the isotypes exhaust g.V
    let mut union = Subspace::zero(&p1, v.dim());
    for (_, s, _) in &isotypes {
        union = union.sum(s);
    }
    if union != g_v {
        return Err(Error::NotDirect);
    }

    let gv_mod = v.restrict(&g_v)?;
    let e = v.field().extension_degree();
    // concatenated per-isotype bases, expressed in g.V coordinates
    let mut coord_rows: Vec<Vec<Scalar>> = Vec::new();
    for (_, s, _) in &isotypes {
        for r in s.basis_rows() {
            coord_rows.push(g_v.coordinates(&r).expect("isotype inside g.V"));
        }
    }
    let gdim = g_v.dim();
    let mut a = Matrix::zeros(&p1, gdim, gdim);
    for (i, r) in coord_rows.iter().enumerate() {
        for (j, c) in r.iter().enumerate() {
            a.set(i, j, c.clone());
        }
    }
    let at = a.transpose();
    let at_inv = at
        .inverse()
        .ok_or_else(|| Error::HypothesisViolated("isotype bases are dependent".into()))?;
    let action_matrices: Vec<Matrix> = (0..e)
        .map(|j| {
            if isotypes.is_empty() {
                return Matrix::zeros(&p1, gdim, gdim);
            }
            let blocks: Vec<&Matrix> = isotypes
                .iter()
                .map(|(_, _, o)| &o.action.matrices()[j])
                .collect();
            let block = Matrix::block_diag(&blocks);
            at.mul(&block).mul(&at_inv)
        })
        .collect();
    let action = ScalarAction::new(action_matrices);
    action.verify(&gv_mod.module)?;

    // single classification over K with blocks in ascending isotype order
    let mut multiplicities: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, _, o) in &isotypes {
        if o.copies > 0 {
            *multiplicities.entry(*k).or_insert(0) += o.copies;
        }
    }
    let mut parts: Vec<SL2Module> = Vec::new();
    let mut witness_cols: Vec<Vec<Scalar>> = Vec::new();
    let mut ordered: Vec<&(usize, Subspace, LinearizeOutcome)> = isotypes.iter().collect();
    ordered.sort_by_key(|(k, _, _)| *k);
    for (_, s, o) in &ordered {
        parts.push(o.classification.model.clone());
        // witness columns: model basis -> isotype coords -> V -> g.V coords
        let w = &o.classification.witness.matrix;
        for col in 0..w.cols() {
            let local: Vec<Scalar> = (0..w.rows()).map(|r| w.get(r, col).clone()).collect();
            // local are coordinates in the echelon basis of s
            let mut ambient = vec![p1.zero(); v.dim()];
            for (i, c) in local.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for j in 0..v.dim() {
                    ambient[j] = p1.add(&ambient[j], &p1.mul(c, s.basis().get(i, j)));
                }
            }
            witness_cols.push(g_v.coordinates(&ambient).expect("inside g.V"));
        }
    }
    let model = if parts.is_empty() {
        SL2Module::trivial(v.field(), 0)
    } else {
        SL2Module::direct_sum(&parts)?
    };
    let mut wm = Matrix::zeros(&p1, gdim, gdim);
    for (c, colv) in witness_cols.iter().enumerate() {
        for (r, val) in colv.iter().enumerate() {
            wm.set(r, c, val.clone());
        }
    }
    let witness = ModuleMap { matrix: wm };
    witness
        .verify(&model, &gv_mod.module)
        .map_err(|e| Error::HypothesisViolated(e.to_string()))?;
    if witness.matrix.inverse().is_none() {
        return Err(Error::HypothesisViolated(
            "separation witness singular".into(),
        ));
    }
    // K-linearity of the witness against the model scalars
    let kdim_model: usize = model.dim() / e;
    let model_scalars = k_scalar_matrices(v.field(), kdim_model);
    for (j, ms) in model_scalars.iter().enumerate() {
        if witness.matrix.mul(ms) != action.matrices()[j].mul(&witness.matrix) {
            return Err(Error::HypothesisViolated(
                "separation witness is not K-linear".into(),
            ));
        }
    }
    Ok(Separation {
        ann,
        g_v,
        module_on_gv: gv_mod.module,
        action,
        multiplicities,
        model,
        witness,
    })
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

    fn f25() -> FieldSpec {
        FieldSpec::new(5, 2, None).unwrap()
    }

    #[test]
    fn d_coefficient_table() {
        let d3: Vec<i64> = d_coefficients(3)
            .iter()
            .map(|b| b.try_into().unwrap())
            .collect();
        assert_eq!(d3, vec![1, 2, 4]);
        let d2: Vec<i64> = d_coefficients(2)
            .iter()
            .map(|b| b.try_into().unwrap())
            .collect();
        assert_eq!(d2, vec![1, 1]);
        // recurrence d_{i+1} = i (n-i) d_i and the closed form of d_n
        for n in 2..9usize {
            let ds = d_coefficients(n);
            for i in 1..n {
                assert_eq!(
                    ds[i],
                    BigInt::from((i * (n - i)) as i64) * &ds[i - 1],
                    "n={n}, i={i}"
                );
            }
            let fact: BigInt = (1..n as i64).map(BigInt::from).product();
            assert_eq!(*ds.last().unwrap(), &fact * &fact);
        }
    }

    #[test]
    fn linearize_recovers_structure_on_forgotten_nat_over_f9() {
        let v = SL2Module::sym_power(1, &f9()).unwrap();
        let out = linearize(&v, 2).unwrap();
        assert_eq!(out.k_dim, 2);
        assert_eq!(out.copies, 1);
        // the recovered scalars coincide with the genuine ones
        let genuine = k_scalar_matrices(&f9(), 2);
        assert_eq!(out.action.matrices(), &genuine[..]);
    }

    #[test]
    fn linearize_after_scramble_still_succeeds() {
        let v = SL2Module::sym_power(1, &f9()).unwrap().scramble(77);
        let out = linearize(&v, 2).unwrap();
        assert_eq!(out.copies, 1);
        assert!(out
            .classification
            .witness
            .is_isomorphism(&out.classification.model, &v)
            .unwrap());
    }

    #[test]
    fn linearize_refuses_twisted_tensor() {
        let v = SL2Module::twisted_tensor(&f9(), &[0, 1]).unwrap();
        assert!(matches!(
            linearize(&v, 3),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn linearize_at_char_equal_n_over_f27() {
        let k27 = FieldSpec::new(3, 3, None).unwrap();
        let v = SL2Module::sym_power(2, &k27).unwrap().scramble(5);
        let out = linearize(&v, 3).unwrap();
        assert_eq!(out.k_dim, 3);
        assert_eq!(out.copies, 1);
    }

    #[test]
    fn coherence_predicates() {
        let lin = SL2Module::sym_power(2, &f25()).unwrap();
        assert!(kernel_coherent(&lin));
        assert!(image_coherent(&lin));
        let tw = SL2Module::twisted_tensor(&f9(), &[0, 1]).unwrap();
        assert!(!kernel_coherent(&tw));
        assert!(!image_coherent(&tw));
        let t = SL2Module::trivial(&f(5), 2);
        assert!(kernel_coherent(&t));
        assert!(image_coherent(&t));
    }

    #[test]
    fn series_ker_on_prime_field_mixed_sum() {
        let p1 = f(7);
        let v = SL2Module::direct_sum(&[
            SL2Module::sym_power(1, &p1).unwrap(),
            SL2Module::sym_power(2, &p1).unwrap(),
        ])
        .unwrap()
        .scramble(9);
        let rep = series_ker(&v, 3).unwrap();
        assert_eq!(rep.terms.len(), 3);
        assert_eq!(rep.terms[0], v.annihilator());
        assert!(rep.terms[2].is_full());
        assert_eq!(rep.terms[1].dim(), 2);
        let ks: Vec<usize> = rep.steps.iter().map(|s| s.k).collect();
        assert_eq!(ks, vec![1, 2]);
        for (i, s) in rep.steps.iter().enumerate() {
            assert_eq!(s.outcome.copies, 1, "step {i}");
        }
        // nesting and invariance
        for w in rep.terms.windows(2) {
            assert!(w[1].contains(&w[0]));
        }
        for t in &rep.terms {
            assert!(v.is_invariant(t));
        }
    }

    #[test]
    fn series_over_f25_recovers_k_dimensions() {
        let k = f25();
        let v = SL2Module::direct_sum(&[
            SL2Module::sym_power(1, &k).unwrap(),
            SL2Module::sym_power(2, &k).unwrap(),
        ])
        .unwrap()
        .scramble(13);
        let rep = series_ker(&v, 3).unwrap();
        assert_eq!(rep.terms.len(), 3);
        // quotient K-dimensions 2 then 3
        assert_eq!(rep.steps[0].outcome.k_dim, 2);
        assert_eq!(rep.steps[1].outcome.k_dim, 3);
        let imrep = series_im(&v, 3).unwrap();
        assert_eq!(imrep.terms[0].dim(), 0);
        assert_eq!(*imrep.terms.last().unwrap(), v.g_dot_v());
        // isotypes descend for the image series
        let ks: Vec<usize> = imrep.steps.iter().map(|s| s.k).collect();
        assert_eq!(ks, vec![2, 1]);
    }

    #[test]
    fn series_and_separation_with_an_empty_middle_isotype() {
        // a pure Sym^2 at n = 3: the k = 1 quotient is zero-dimensional
        let k = f25();
        let v = SL2Module::sym_power(2, &k).unwrap().scramble(19);
        let rep = series_ker(&v, 3).unwrap();
        assert_eq!(rep.terms.len(), 3);
        assert_eq!(rep.terms[0].dim(), 0);
        assert_eq!(rep.terms[1].dim(), 0);
        assert!(rep.terms[2].is_full());
        assert_eq!(rep.steps[0].outcome.copies, 0);
        assert_eq!(rep.steps[1].outcome.copies, 1);
        let sep = separate(&v, 3).unwrap();
        assert!(sep.ann.is_zero());
        assert_eq!(sep.multiplicities.get(&2), Some(&1));
        assert_eq!(sep.multiplicities.get(&1), None);
    }

    #[test]
    fn full_stack_at_the_lowest_admissible_characteristic() {
        // p = n+1 = 5: the Casimir eigenvalues of the annihilator and of the
        // top isotype collide at 0, the hardest splitting regime
        let f5 = FieldSpec::prime(5).unwrap();
        let v = SL2Module::direct_sum(&[
            SL2Module::trivial(&f5, 2),
            SL2Module::sym_power(1, &f5).unwrap(),
            SL2Module::sym_power(2, &f5).unwrap(),
            SL2Module::sym_power(3, &f5).unwrap(),
        ])
        .unwrap()
        .scramble(6);
        let sk = series_ker(&v, 4).unwrap();
        assert_eq!(sk.terms[0].dim(), 2);
        assert_eq!(sk.terms.len(), 4);
        let si = series_im(&v, 4).unwrap();
        assert_eq!(si.terms.last().unwrap().dim(), 9);
        let sep = separate(&v, 4).unwrap();
        assert_eq!(sep.ann.dim(), 2);
        assert_eq!(sep.multiplicities.len(), 3);
        // K-linear variant over F_25 with a hole at the middle isotype
        let f25 = f25();
        let w = SL2Module::direct_sum(&[
            SL2Module::trivial(&f25, 1),
            SL2Module::sym_power(1, &f25).unwrap(),
            SL2Module::sym_power(3, &f25).unwrap(),
        ])
        .unwrap()
        .scramble(31);
        let sk = series_ker(&w, 4).unwrap();
        let kdims: Vec<usize> = sk.steps.iter().map(|s| s.outcome.k_dim).collect();
        assert_eq!(kdims, vec![2, 0, 4]);
        let sep = separate(&w, 4).unwrap();
        assert_eq!(sep.ann.dim(), 2);
        assert_eq!(sep.multiplicities.get(&3), Some(&1));
    }

    #[test]
    fn series_refuses_twisted_tensor() {
        let tw = SL2Module::twisted_tensor(&f9(), &[0, 1]).unwrap();
        assert!(matches!(
            series_ker(&tw, 3),
            Err(Error::HypothesisViolated(_))
        ));
        assert!(matches!(
            series_im(&tw, 3),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn separate_trivial_module() {
        let t = SL2Module::trivial(&f(5), 3);
        let sep = separate(&t, 2).unwrap();
        assert!(sep.ann.is_full());
        assert!(sep.g_v.is_zero());
        assert!(sep.multiplicities.is_empty());
    }

    #[test]
    fn separate_k_linear_mixed_sum_over_f25() {
        let k = f25();
        let v = SL2Module::direct_sum(&[
            SL2Module::trivial(&k, 1),
            SL2Module::sym_power(1, &k).unwrap(),
            SL2Module::sym_power(2, &k).unwrap(),
        ])
        .unwrap()
        .scramble(21);
        let sep = separate(&v, 3).unwrap();
        assert_eq!(sep.ann.dim(), 2); // one K-line over F_5
        assert_eq!(sep.g_v.dim(), 10);
        assert_eq!(sep.multiplicities.get(&1), Some(&1));
        assert_eq!(sep.multiplicities.get(&2), Some(&1));
        assert!(sep
            .witness
            .is_isomorphism(&sep.model, &sep.module_on_gv)
            .unwrap());
    }

    #[test]
    fn separate_refuses_one_sided_low_window_module() {
        // a cross-linked module: x^2 = 0 but y^2 != 0 and p = 3 < 2n+1
        let one = Matrix::identity(&f(3), 1);
        let v = SL2Module::sab(2, 3, &one, &one).unwrap();
        assert!(kernel_coherent(&v)); // e = 1 makes coherence automatic
        assert!(image_coherent(&v));
        assert!(matches!(separate(&v, 2), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn rational_series() {
        let q = FieldSpec::rationals();
        let v = SL2Module::direct_sum(&[
            SL2Module::trivial(&q, 1),
            SL2Module::sym_power(2, &q).unwrap(),
        ])
        .unwrap()
        .scramble(2);
        let rep = series_ker(&v, 3).unwrap();
        assert_eq!(rep.terms[0].dim(), 1);
        let sep = separate(&v, 3).unwrap();
        assert_eq!(sep.ann.dim(), 1);
        assert_eq!(sep.multiplicities.get(&2), Some(&1));
    }
}
