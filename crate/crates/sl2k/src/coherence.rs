//! Coherence degrees of the action and the Casimir bracket chain.
//!
//! The ascending degree is the least n with ker x^n inside the kernel of
//! every n-fold product x_{l1} .. x_{ln}; the descending degree dually
//! bounds images. Products are multi-additive in each scalar slot, so
//! K-basis tuples decide the inclusions (a randomized full-scalar check
//! backs this up in the tests).

use crate::error::{Error, Result};
use crate::identities::u_length;
use crate::matrix::{Matrix, Subspace};
use crate::module::SL2Module;

fn x_nilpotency_index(v: &SL2Module) -> Result<usize> {
    crate::identities::x_nilpotency(v)
}

/// Walk all e^n words X_{j1} .. X_{jn}, sharing suffix products, and test
/// the given predicate on each; true when every word passes.
fn all_words(v: &SL2Module, n: usize, pred: &mut dyn FnMut(&Matrix) -> bool) -> bool {
    fn rec(
        v: &SL2Module,
        depth: usize,
        suffix: &Matrix,
        pred: &mut dyn FnMut(&Matrix) -> bool,
    ) -> bool {
        if depth == 0 {
            return pred(suffix);
        }
        (0..v.generators().len()).all(|j| {
            let next = v.x(j).mul(suffix);
            rec(v, depth - 1, &next, pred)
        })
    }
    let id = Matrix::identity(&v.prime_field(), v.dim());
    rec(v, n, &id, pred)
}

/// Ascending coherence degree: least n such that ker x^n lies in the kernel
/// of every n-fold product of x_lambda's. Searches n = 1 .. nilpotency
/// index of x and reports a violated bound if none works.
pub fn kappa(v: &SL2Module) -> Result<usize> {
    let ell = x_nilpotency_index(v)?;
    for n in 1..=ell.max(1) {
        let ker = v.x0().pow(n).kernel();
        let rows = ker.basis_rows();
        let ok = all_words(v, n, &mut |w| {
            rows.iter().all(|r| w.apply(r).iter().all(|c| c.is_zero()))
        });
        if ok {
            return Ok(n);
        }
    }
    Err(Error::BoundViolated(ell))
}

/// Descending coherence degree: least n such that the image of every n-fold
/// product of x_lambda's lies in im x^n.
pub fn iota(v: &SL2Module) -> Result<usize> {
    let ell = x_nilpotency_index(v)?;
    for n in 1..=ell.max(1) {
        let im = v.x0().pow(n).image();
        let ok = all_words(v, n, &mut |w| im.contains(&w.image()));
        if ok {
            return Ok(n);
        }
    }
    Err(Error::BoundViolated(ell))
}

/// Verdict of the coherence bound kappa, iota <= length - 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoherenceVerdict {
    pub length: usize,
    pub kappa: usize,
    pub iota: usize,
    /// The bound length - 1; None when the length is 1 and the bound is
    /// vacuous (both degrees are then 1 by convention).
    pub bound: Option<usize>,
}

impl CoherenceVerdict {
    pub fn holds(&self) -> bool {
        match self.bound {
            None => true,
            Some(b) => self.kappa <= b && self.iota <= b,
        }
    }
}

/// Compute length, both coherence degrees, and check the bound
/// kappa, iota <= length - 1 (vacuous at length 1). Requires characteristic
/// 0 or >= length + 1.
pub fn check_coherence_bound(v: &SL2Module) -> Result<CoherenceVerdict> {
    let length = u_length(v)?;
    let p = v.field().characteristic();
    if p != 0 && (p as usize) < length + 1 {
        return Err(Error::CharTooSmall {
            p,
            needed: (length + 1) as u64,
        });
    }
    let kappa = kappa(v)?;
    let iota = iota(v)?;
    let bound = if length >= 2 { Some(length - 1) } else { None };
    Ok(CoherenceVerdict {
        length,
        kappa,
        iota,
        bound,
    })
}

/// A witness that the given stage is not kernel-coherent: a vector of
/// ker x^stage together with the basis word (indices of x generators, applied
/// right to left) that fails to kill it. None when the stage is coherent.
pub fn kernel_incoherence_witness(
    v: &SL2Module,
    stage: usize,
) -> Option<(Vec<usize>, Vec<crate::field::Scalar>)> {
    let ker = v.x0().pow(stage).kernel();
    let rows = ker.basis_rows();
    let e = v.generators().len();
    let mut word = vec![0usize; stage];
    loop {
        let mut m = Matrix::identity(&v.prime_field(), v.dim());
        for &j in &word {
            m = v.x(j).mul(&m);
        }
        for r in &rows {
            if m.apply(r).iter().any(|c| !c.is_zero()) {
                return Some((word, r.clone()));
            }
        }
        let mut pos = word.len();
        loop {
            if pos == 0 {
                return None;
            }
            word[pos - 1] += 1;
            if word[pos - 1] < e {
                break;
            }
            word[pos - 1] = 0;
            pos -= 1;
        }
    }
}

/// Least n >= 1 such that every n-fold iterated bracket of generators with
/// the Casimir element acts as zero, found by growing the bracket chain
/// L_0 = span(c1), L_{k+1} = span([G, L_k]). Capped at dim^2 steps; twisted
/// actions can cycle forever and then the cap is reported.
pub fn casimir_height(v: &SL2Module) -> Result<usize> {
    let p1 = v.prime_field();
    let d = v.dim();
    let flat = |m: &Matrix| -> Vec<crate::field::Scalar> {
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(m.get(i, j).clone());
            }
        }
        out
    };
    let unflat =
        |r: &[crate::field::Scalar]| -> Matrix { Matrix::new(p1.clone(), d, d, r.to_vec()) };
    let cap = d * d;
    let mut level = Subspace::from_vectors(&p1, d * d, vec![flat(&v.casimir())]);
    for n in 1..=cap.max(1) {
        let mut next_rows = Vec::new();
        for row in level.basis_rows() {
            let m = unflat(&row);
            for (_, g) in v.generator_matrices() {
                next_rows.push(flat(&g.commutator(&m)));
            }
        }
        let next = Subspace::from_vectors(&p1, d * d, next_rows);
        if next.is_zero() {
            return Ok(n);
        }
        level = next;
    }
    Err(Error::HeightUnboundedWithinCap(cap))
}
