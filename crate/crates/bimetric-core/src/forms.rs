//! Form spaces over finite fields: symmetric, alternating, hermitian, and
//! quadratic, with congruence normal forms, standard bases built from
//! hyperbolic pairs, non-degenerate splitting of subspaces, and constructive
//! isometry extension with a rank-defect bound.
//!
//! Vectors are rows and matrices act on the right. A quadratic form is stored
//! as an upper-triangular representative B with Q(v) = v B v^T; the polar
//! form B + B^T is the associated bilinear form. In characteristic 2 the
//! polar form is alternating and does not determine Q, which is why the two
//! are tracked separately.

use alloc::vec;
use alloc::vec::Vec;

use crate::field_core::{FieldElement, FieldSpec, Matrix};
use crate::linear_split::random_gl;
use crate::rng::SplitMix64;
use crate::Error;

/// Scan caps for the deterministic searches. Exhaustive coefficient scans
/// run when the combination count fits the limit; single-element scans are
/// truncated at the cap and report SearchExhausted past it.
const FULL_SCAN_LIMIT: u64 = 2_000_000;
const ELEMENT_SCAN_CAP: u32 = 65_536;
const PAIR_SCAN_CAP: u64 = 4_000_000;

/// The four supported form kinds.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FormKind {
    SymmetricBilinear,
    Alternating,
    Hermitian,
    Quadratic,
}

/// A finite-dimensional space carrying one form of a fixed kind.
///
/// For the three bilinear/sesquilinear kinds `gram` is the Gram matrix of
/// the form itself; for the quadratic kind it is the upper-triangular
/// representative of Q.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FormSpace {
    kind: FormKind,
    gram: Matrix,
}

impl FormSpace {
    /// Builds a space after checking the kind's shape invariant. Quadratic
    /// input is canonicalized to its upper-triangular representative, which
    /// leaves Q unchanged.
    pub fn new(kind: FormKind, gram: Matrix) -> Result<FormSpace, Error> {
        if !gram.is_square() {
            return Err(Error::ShapeMismatch);
        }
        let f = gram.field().clone();
        let n = gram.rows();
        match kind {
            FormKind::SymmetricBilinear => {
                if gram != gram.transpose() {
                    return Err(Error::NotSymmetric);
                }
            }
            FormKind::Alternating => {
                if !gram.add(&gram.transpose()).is_zero() {
                    return Err(Error::NotAlternating);
                }
                for i in 0..n {
                    if gram.get(i, i) != f.zero() {
                        return Err(Error::NotAlternating);
                    }
                }
            }
            FormKind::Hermitian => {
                if !f.involution_enabled() {
                    return Err(Error::NoInvolution);
                }
                if gram != gram.conj_transpose() {
                    return Err(Error::NotHermitian);
                }
            }
            FormKind::Quadratic => {
                let ut = Matrix::from_fn(&f, n, n, |i, j| {
                    if i == j {
                        gram.get(i, i)
                    } else if i < j {
                        f.add(gram.get(i, j), gram.get(j, i))
                    } else {
                        f.zero()
                    }
                });
                return Ok(FormSpace { kind, gram: ut });
            }
        }
        Ok(FormSpace { kind, gram })
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn field(&self) -> &FieldSpec {
        self.gram.field()
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    /// Gram matrix of the bilinear form paired with this space: the form
    /// itself for the bilinear kinds, B + B^T for the quadratic kind.
    pub fn polar(&self) -> Matrix {
        match self.kind {
            FormKind::Quadratic => self.gram.add(&self.gram.transpose()),
            _ => self.gram.clone(),
        }
    }

    /// Form value phi(u, v); the second argument is conjugated in the
    /// hermitian kind, and the polar form is used in the quadratic kind.
    pub fn evaluate(&self, u: &[FieldElement], v: &[FieldElement]) -> FieldElement {
        let f = self.field();
        assert_eq!(u.len(), self.dim());
        assert_eq!(v.len(), self.dim());
        match self.kind {
            FormKind::Hermitian => {
                let r = self.gram.row_vec_mul(u);
                let mut acc = f.zero();
                for j in 0..v.len() {
                    acc = f.add(acc, f.mul(r[j], f.involution(v[j])));
                }
                acc
            }
            FormKind::Quadratic => {
                let a = self.gram.row_vec_mul(u);
                let b = self.gram.row_vec_mul(v);
                let mut acc = f.zero();
                for j in 0..v.len() {
                    acc = f.add(acc, f.add(f.mul(a[j], v[j]), f.mul(b[j], u[j])));
                }
                acc
            }
            _ => {
                let r = self.gram.row_vec_mul(u);
                let mut acc = f.zero();
                for j in 0..v.len() {
                    acc = f.add(acc, f.mul(r[j], v[j]));
                }
                acc
            }
        }
    }

    /// Q(v) for the quadratic kind, the norm h(v, v) for the hermitian kind,
    /// and phi(v, v) for the bilinear kinds.
    pub fn quadratic_value(&self, v: &[FieldElement]) -> FieldElement {
        let f = self.field();
        assert_eq!(v.len(), self.dim());
        match self.kind {
            FormKind::Hermitian => self.evaluate(v, v),
            _ => {
                let r = self.gram.row_vec_mul(v);
                let mut acc = f.zero();
                for j in 0..v.len() {
                    acc = f.add(acc, f.mul(r[j], v[j]));
                }
                acc
            }
        }
    }

    /// Non-singularity test. For the quadratic kind the polar form may have
    /// a radical of dimension 1 (characteristic 2, odd dimension) provided Q
    /// does not vanish on it.
    pub fn is_nonsingular(&self) -> bool {
        match self.kind {
            FormKind::Quadratic => {
                let rad = self.polar().kernel_basis();
                match rad.len() {
                    0 => true,
                    1 => self.quadratic_value(&rad[0]) != self.field().zero(),
                    _ => false,
                }
            }
            _ => self.gram.is_invertible(),
        }
    }

    /// The same form on the row span of `basis`, expressed in the basis
    /// coordinates. Rows must be a basis of the subspace.
    pub fn restrict(&self, basis: &Matrix) -> Result<FormSpace, Error> {
        if basis.cols() != self.dim() {
            return Err(Error::ShapeMismatch);
        }
        if basis.field() != self.field() {
            return Err(Error::FieldMismatch);
        }
        let f = self.field().clone();
        let m = basis.rows();
        match self.kind {
            FormKind::Quadratic => {
                let prod = basis.mul(&self.polar()).mul(&basis.transpose());
                let ut = Matrix::from_fn(&f, m, m, |i, j| {
                    if i == j {
                        self.quadratic_value(basis.row(i))
                    } else if i < j {
                        prod.get(i, j)
                    } else {
                        f.zero()
                    }
                });
                FormSpace::new(FormKind::Quadratic, ut)
            }
            FormKind::Hermitian => {
                let g = basis.mul(&self.gram).mul(&basis.conj_transpose());
                FormSpace::new(FormKind::Hermitian, g)
            }
            _ => {
                let g = basis.mul(&self.gram).mul(&basis.transpose());
                FormSpace::new(self.kind, g)
            }
        }
    }

    /// Exact test that v -> v g preserves the form. In the quadratic kind
    /// the criterion is that g B g^T - B is alternating, which covers Q and
    /// the polar form in every characteristic.
    pub fn is_isometry(&self, g: &Matrix) -> bool {
        if !g.is_square() || g.rows() != self.dim() || g.field() != self.field() {
            return false;
        }
        let f = self.field();
        match self.kind {
            FormKind::Hermitian => g.mul(&self.gram).mul(&g.conj_transpose()) == self.gram,
            FormKind::Quadratic => {
                let m = g.mul(&self.gram).mul(&g.transpose()).sub(&self.gram);
                if !m.add(&m.transpose()).is_zero() {
                    return false;
                }
                (0..self.dim()).all(|i| m.get(i, i) == f.zero())
            }
            _ => g.mul(&self.gram).mul(&g.transpose()) == self.gram,
        }
    }
}

/// Shape of the non-hyperbolic remainder of a standard basis.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TailKind {
    /// Fully paired basis.
    Empty,
    /// One extra vector spanning an orthogonal summand.
    Line,
    /// Two extra vectors spanning an anisotropic orthogonal summand.
    Plane,
}

/// Basis of a non-singular quadratic or hermitian space: hyperbolic pairs
/// (e_i, f_i) with Q(e_i) = Q(f_i) = 0 and phi(e_i, f_j) = delta_ij, plus a
/// tail of at most two vectors spanning an orthogonal direct summand.
///
/// Hermitian spaces report an orthonormal basis instead: `pairs` holds
/// consecutive unit vectors (floor(dim / 2) pairs) and the tail is the last
/// unit vector when the dimension is odd.
#[derive(Clone, Debug)]
pub struct StandardBasis {
    pub pairs: Vec<(Vec<FieldElement>, Vec<FieldElement>)>,
    pub tail: Vec<Vec<FieldElement>>,
    pub tail_kind: TailKind,
}

impl StandardBasis {
    /// Basis rows in order e_1, f_1, ..., e_m, f_m, tail.
    pub fn rows(&self) -> Vec<Vec<FieldElement>> {
        let mut out = Vec::with_capacity(2 * self.pairs.len() + self.tail.len());
        for (e, fv) in &self.pairs {
            out.push(e.clone());
            out.push(fv.clone());
        }
        for t in &self.tail {
            out.push(t.clone());
        }
        out
    }
}

fn vscale(f: &FieldSpec, c: FieldElement, v: &[FieldElement]) -> Vec<FieldElement> {
    v.iter().map(|&a| f.mul(c, a)).collect()
}

fn vsub_scaled(
    f: &FieldSpec,
    v: &[FieldElement],
    c: FieldElement,
    w: &[FieldElement],
) -> Vec<FieldElement> {
    v.iter()
        .zip(w.iter())
        .map(|(&a, &b)| f.sub(a, f.mul(c, b)))
        .collect()
}

fn vadd(f: &FieldSpec, v: &[FieldElement], w: &[FieldElement]) -> Vec<FieldElement> {
    v.iter().zip(w.iter()).map(|(&a, &b)| f.add(a, b)).collect()
}

fn vconj(f: &FieldSpec, v: &[FieldElement]) -> Vec<FieldElement> {
    v.iter().map(|&a| f.involution(a)).collect()
}

fn unit_rows(f: &FieldSpec, n: usize) -> Vec<Vec<FieldElement>> {
    (0..n)
        .map(|i| {
            let mut v = vec![f.zero(); n];
            v[i] = f.one();
            v
        })
        .collect()
}

/// Greedy independent subset of exactly `want` rows, kept in input order.
fn independent_subset(
    f: &FieldSpec,
    cands: &[Vec<FieldElement>],
    want: usize,
) -> Result<Vec<Vec<FieldElement>>, Error> {
    let mut kept: Vec<Vec<FieldElement>> = Vec::new();
    let mut reduced: Vec<Vec<FieldElement>> = Vec::new();
    for cand in cands {
        if kept.len() == want {
            break;
        }
        let mut r = cand.clone();
        for s in &reduced {
            let lead = s.iter().position(|&a| a != f.zero()).unwrap();
            let c = f.mul(r[lead], f.inv(s[lead]).unwrap());
            if c != f.zero() {
                r = vsub_scaled(f, &r, c, s);
            }
        }
        if r.iter().any(|&a| a != f.zero()) {
            kept.push(cand.clone());
            reduced.push(r);
        }
    }
    if kept.len() != want {
        return Err(Error::SearchExhausted);
    }
    Ok(kept)
}

fn bilinear_value(
    f: &FieldSpec,
    k: &Matrix,
    x: &[FieldElement],
    y: &[FieldElement],
) -> FieldElement {
    let r = k.row_vec_mul(x);
    let mut acc = f.zero();
    for j in 0..y.len() {
        acc = f.add(acc, f.mul(r[j], y[j]));
    }
    acc
}

fn sesquilinear_value(
    f: &FieldSpec,
    k: &Matrix,
    x: &[FieldElement],
    y: &[FieldElement],
) -> FieldElement {
    let r = k.row_vec_mul(x);
    let mut acc = f.zero();
    for j in 0..y.len() {
        acc = f.add(acc, f.mul(r[j], f.involution(y[j])));
    }
    acc
}

/// Congruence normal form of an alternating matrix: invertible c and block
/// diagonal d with s blocks ((0, 1), (-1, 0)) followed by zeros, 2s = rk(k),
/// and k = c d c^T.
pub fn skew_congruence_normal_form(k: &Matrix) -> Result<(Matrix, Matrix), Error> {
    if !k.is_square() {
        return Err(Error::ShapeMismatch);
    }
    let f = k.field().clone();
    let n = k.rows();
    if !k.add(&k.transpose()).is_zero() {
        return Err(Error::NotAlternating);
    }
    for i in 0..n {
        if k.get(i, i) != f.zero() {
            return Err(Error::NotAlternating);
        }
    }
    let phi = |x: &[FieldElement], y: &[FieldElement]| bilinear_value(&f, k, x, y);
    let mut rest = unit_rows(&f, n);
    let mut pair_rows: Vec<Vec<FieldElement>> = Vec::new();
    loop {
        let mut found = None;
        'scan: for i in 0..rest.len() {
            for j in (i + 1)..rest.len() {
                if phi(&rest[i], &rest[j]) != f.zero() {
                    found = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((i, j)) = found else { break };
        let x = rest[i].clone();
        let mu = phi(&x, &rest[j]);
        let y = vscale(&f, f.inv(mu)?, &rest[j]);
        rest.remove(j);
        rest.remove(i);
        for w in rest.iter_mut() {
            // w := w - phi(w, y) x + phi(w, x) y, orthogonal to the new pair.
            let a = phi(w, &y);
            let b = phi(w, &x);
            let mut next = vsub_scaled(&f, w, a, &x);
            next = vadd(&f, &next, &vscale(&f, b, &y));
            *w = next;
        }
        pair_rows.push(x);
        pair_rows.push(y);
    }
    let s = pair_rows.len() / 2;
    pair_rows.extend(rest);
    let p = Matrix::from_rows(&f, n, &pair_rows);
    let c = p.inverse()?;
    let d = Matrix::from_fn(&f, n, n, |i, j| {
        if i < 2 * s && i / 2 == j / 2 {
            if j == i + 1 {
                f.one()
            } else if i == j + 1 {
                f.neg(f.one())
            } else {
                f.zero()
            }
        } else {
            f.zero()
        }
    });
    if c.mul(&d).mul(&c.transpose()) != *k {
        return Err(Error::BoundViolation);
    }
    Ok((c, d))
}

/// Congruence normal form of a symmetric matrix, valid in every
/// characteristic: invertible c and d with s blocks ((0, 1), (1, 0)), then
/// s' nonzero diagonal entries, then zeros, with 2s + s' = rk(k) and
/// k = c d c^T.
pub fn symmetric_congruence_normal_form(k: &Matrix) -> Result<(Matrix, Matrix), Error> {
    if !k.is_square() {
        return Err(Error::ShapeMismatch);
    }
    let f = k.field().clone();
    let n = k.rows();
    if *k != k.transpose() {
        return Err(Error::NotSymmetric);
    }
    let char2 = f.characteristic() == 2;
    let phi = |x: &[FieldElement], y: &[FieldElement]| bilinear_value(&f, k, x, y);
    let mut rest = unit_rows(&f, n);
    let mut pair_rows: Vec<Vec<FieldElement>> = Vec::new();
    let mut diag: Vec<(Vec<FieldElement>, FieldElement)> = Vec::new();
    loop {
        if let Some(i) = rest.iter().position(|w| phi(w, w) != f.zero()) {
            let x = rest.remove(i);
            let a = phi(&x, &x);
            let ainv = f.inv(a)?;
            for w in rest.iter_mut() {
                let c = f.mul(phi(w, &x), ainv);
                *w = vsub_scaled(&f, w, c, &x);
            }
            diag.push((x, a));
            continue;
        }
        let mut found = None;
        'scan: for i in 0..rest.len() {
            for j in (i + 1)..rest.len() {
                if phi(&rest[i], &rest[j]) != f.zero() {
                    found = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((i, j)) = found else { break };
        if !char2 {
            // phi(w_i + w_j, w_i + w_j) = 2 phi(w_i, w_j) != 0; fold and let
            // the diagonal branch pick it up.
            let sum = vadd(&f, &rest[i], &rest[j]);
            rest[i] = sum;
            continue;
        }
        // Alternating restriction: extract a ((0, 1), (1, 0)) pair.
        let x = rest[i].clone();
        let mu = phi(&x, &rest[j]);
        let y = vscale(&f, f.inv(mu)?, &rest[j]);
        rest.remove(j);
        rest.remove(i);
        for w in rest.iter_mut() {
            let a = phi(w, &y);
            let b = phi(w, &x);
            let mut next = vsub_scaled(&f, w, a, &x);
            next = vsub_scaled(&f, &next, b, &y);
            *w = next;
        }
        pair_rows.push(x);
        pair_rows.push(y);
    }
    let s = pair_rows.len() / 2;
    let sp = diag.len();
    let mut rows = pair_rows;
    let mut diag_vals = Vec::with_capacity(sp);
    for (v, a) in diag {
        rows.push(v);
        diag_vals.push(a);
    }
    rows.extend(rest);
    let p = Matrix::from_rows(&f, n, &rows);
    let c = p.inverse()?;
    let d = Matrix::from_fn(&f, n, n, |i, j| {
        if i < 2 * s && i / 2 == j / 2 && i != j {
            f.one()
        } else if i >= 2 * s && i < 2 * s + sp && i == j {
            diag_vals[i - 2 * s]
        } else {
            f.zero()
        }
    });
    if c.mul(&d).mul(&c.transpose()) != *k {
        return Err(Error::BoundViolation);
    }
    Ok((c, d))
}

/// Congruence normal form of an anti-hermitian matrix (conj(k)^T = -k over
/// a field with involution): invertible c and diagonal d whose rk(k) leading
/// entries are nonzero and anti-fixed, with k = c d conj(c)^T.
pub fn anti_hermitian_congruence_normal_form(k: &Matrix) -> Result<(Matrix, Matrix), Error> {
    if !k.is_square() {
        return Err(Error::ShapeMismatch);
    }
    let f = k.field().clone();
    let n = k.rows();
    if !f.involution_enabled() {
        return Err(Error::NoInvolution);
    }
    if k.conj_transpose() != k.neg() {
        return Err(Error::NotAntiHermitian);
    }
    let psi = |x: &[FieldElement], y: &[FieldElement]| sesquilinear_value(&f, k, x, y);
    let mut rest = unit_rows(&f, n);
    let mut diag: Vec<(Vec<FieldElement>, FieldElement)> = Vec::new();
    loop {
        if let Some(i) = rest.iter().position(|w| psi(w, w) != f.zero()) {
            let x = rest.remove(i);
            let a = psi(&x, &x);
            let ainv = f.inv(a)?;
            for w in rest.iter_mut() {
                let c = f.mul(psi(w, &x), ainv);
                *w = vsub_scaled(&f, w, c, &x);
            }
            diag.push((x, a));
            continue;
        }
        let mut found = None;
        'scan: for i in 0..rest.len() {
            for j in (i + 1)..rest.len() {
                if psi(&rest[i], &rest[j]) != f.zero() {
                    found = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((i, j)) = found else { break };
        // psi(w_i + c w_j, same) = conj(c) mu - conj(conj(c) mu) is nonzero
        // for some c because the involution is not the identity.
        let mut hit = None;
        for idx in 0..f.order() {
            let c = f.element(idx);
            let cand = vadd(&f, &rest[i], &vscale(&f, c, &rest[j]));
            if psi(&cand, &cand) != f.zero() {
                hit = Some(cand);
                break;
            }
        }
        let Some(cand) = hit else {
            return Err(Error::SearchExhausted);
        };
        rest[i] = cand;
    }
    let r = diag.len();
    let mut rows = Vec::with_capacity(n);
    let mut vals = Vec::with_capacity(r);
    for (v, a) in diag {
        rows.push(v);
        vals.push(a);
    }
    rows.extend(rest);
    let p = Matrix::from_rows(&f, n, &rows);
    let c = p.inverse()?;
    let d = Matrix::from_fn(&f, n, n, |i, j| {
        if i == j && i < r {
            vals[i]
        } else {
            f.zero()
        }
    });
    if c.mul(&d).mul(&c.conj_transpose()) != *k {
        return Err(Error::BoundViolation);
    }
    Ok((c, d))
}

/// Deterministic isotropic-vector search on the span of `basis` inside
/// `space`. Scans every combination of the first min(3, dim) basis vectors,
/// which is complete: a quadratic form in three variables over a finite
/// field always has a nontrivial zero. Falls back to seeded random sampling
/// over the whole span when the coefficient scan would be too large.
fn isotropic_in_span(space: &FormSpace, basis: &[Vec<FieldElement>]) -> Option<Vec<FieldElement>> {
    let f = space.field().clone();
    let d = basis.len();
    if d == 0 {
        return None;
    }
    let support = d.min(3);
    let q = f.order() as u64;
    let mut combos: u64 = 1;
    for _ in 0..support {
        combos = combos.saturating_mul(q);
    }
    if combos <= FULL_SCAN_LIMIT {
        let mut idx = vec![0u32; support];
        loop {
            // Advance the odometer; skip the all-zero tuple.
            let mut pos = 0;
            while pos < support {
                idx[pos] += 1;
                if idx[pos] < f.order() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == support {
                return None;
            }
            let mut v = vec![f.zero(); basis[0].len()];
            for (s, &ci) in idx.iter().enumerate() {
                if ci != 0 {
                    v = vadd(&f, &v, &vscale(&f, f.element(ci), &basis[s]));
                }
            }
            if space.quadratic_value(&v) == f.zero() {
                return Some(v);
            }
        }
    }
    let mut rng = SplitMix64::new(0x5D4A_9C0F_0A11_0B5E);
    for _ in 0..200_000 {
        let mut v = vec![f.zero(); basis[0].len()];
        let mut nonzero = false;
        for b in basis.iter().take(support) {
            let c = f.element(rng.below(f.order() as u64) as u32);
            if c != f.zero() {
                nonzero = true;
                v = vadd(&f, &v, &vscale(&f, c, b));
            }
        }
        if nonzero && space.quadratic_value(&v) == f.zero() {
            return Some(v);
        }
    }
    None
}

fn standard_basis_quadratic(space: &FormSpace) -> Result<StandardBasis, Error> {
    let f = space.field().clone();
    let n = space.dim();
    let mut basis = unit_rows(&f, n);
    let mut pairs = Vec::new();
    while !basis.is_empty() {
        let Some(e) = isotropic_in_span(space, &basis) else {
            break;
        };
        let Some(j) = basis
            .iter()
            .position(|b| space.evaluate(&e, b) != f.zero())
        else {
            return Err(Error::SingularSpace);
        };
        let mu = space.evaluate(&e, &basis[j]);
        let u = vscale(&f, f.inv(mu)?, &basis[j]);
        // f = u - Q(u) e is the isotropic partner with phi(e, f) = 1.
        let fv = vsub_scaled(&f, &u, space.quadratic_value(&u), &e);
        let mut cands = Vec::with_capacity(basis.len());
        for w in &basis {
            let a = space.evaluate(w, &fv);
            let b = space.evaluate(w, &e);
            let mut next = vsub_scaled(&f, w, a, &e);
            next = vsub_scaled(&f, &next, b, &fv);
            cands.push(next);
        }
        basis = independent_subset(&f, &cands, basis.len() - 2)?;
        pairs.push((e, fv));
    }
    if basis.len() > 2 {
        return Err(Error::SearchExhausted);
    }
    let tail_kind = match basis.len() {
        0 => TailKind::Empty,
        1 => TailKind::Line,
        _ => TailKind::Plane,
    };
    let sb = StandardBasis {
        pairs,
        tail: basis,
        tail_kind,
    };
    debug_assert!(standard_basis_is_valid(space, &sb));
    Ok(sb)
}

fn standard_basis_hermitian(space: &FormSpace) -> Result<StandardBasis, Error> {
    let f = space.field().clone();
    let n = space.dim();
    let mut basis = unit_rows(&f, n);
    let mut units: Vec<Vec<FieldElement>> = Vec::new();
    while !basis.is_empty() {
        let x = match basis.iter().position(|b| space.evaluate(b, b) != f.zero()) {
            Some(i) => basis[i].clone(),
            None => {
                // All basis norms vanish; h(b_i + c b_j, same) = Tr(conj(c) mu)
                // is nonzero for some pair and scalar unless the form is zero.
                let mut hit = None;
                'scan: for i in 0..basis.len() {
                    for j in (i + 1)..basis.len() {
                        if space.evaluate(&basis[i], &basis[j]) == f.zero() {
                            continue;
                        }
                        for idx in 0..f.order() {
                            let c = f.element(idx);
                            let cand = vadd(&f, &basis[i], &vscale(&f, c, &basis[j]));
                            if space.evaluate(&cand, &cand) != f.zero() {
                                hit = Some(cand);
                                break 'scan;
                            }
                        }
                    }
                }
                hit.ok_or(Error::SingularSpace)?
            }
        };
        let alpha = space.evaluate(&x, &x);
        let alpha_inv = f.inv(alpha)?;
        // Unit scaling: c with c conj(c) = alpha^{-1}; the norm map onto the
        // fixed field is surjective, so the scan succeeds.
        let mut unit = None;
        for idx in 0..f.order().min(ELEMENT_SCAN_CAP) {
            let c = f.element(idx);
            if f.mul(c, f.involution(c)) == alpha_inv {
                unit = Some(vscale(&f, c, &x));
                break;
            }
        }
        let Some(u) = unit else {
            return Err(Error::SearchExhausted);
        };
        let mut cands = Vec::with_capacity(basis.len());
        for w in &basis {
            cands.push(vsub_scaled(&f, w, space.evaluate(w, &u), &u));
        }
        basis = independent_subset(&f, &cands, basis.len() - 1)?;
        units.push(u);
    }
    let mut pairs = Vec::new();
    let mut iter = units.into_iter();
    let mut tail = Vec::new();
    loop {
        let Some(a) = iter.next() else { break };
        match iter.next() {
            Some(b) => pairs.push((a, b)),
            None => {
                tail.push(a);
                break;
            }
        }
    }
    let tail_kind = if tail.is_empty() {
        TailKind::Empty
    } else {
        TailKind::Line
    };
    let sb = StandardBasis {
        pairs,
        tail,
        tail_kind,
    };
    debug_assert!(standard_basis_is_valid(space, &sb));
    Ok(sb)
}

/// Exact Gram identity check for a standard basis.
fn standard_basis_is_valid(space: &FormSpace, sb: &StandardBasis) -> bool {
    let f = space.field();
    let rows = sb.rows();
    if rows.len() != space.dim() {
        return false;
    }
    let m = Matrix::from_rows(f, space.dim(), &rows);
    if !m.is_invertible() {
        return false;
    }
    match space.kind() {
        FormKind::Hermitian => {
            for (i, a) in rows.iter().enumerate() {
                for (j, b) in rows.iter().enumerate() {
                    let want = if i == j { f.one() } else { f.zero() };
                    if space.evaluate(a, b) != want {
                        return false;
                    }
                }
            }
            true
        }
        FormKind::Quadratic => {
            for (i, (e, fv)) in sb.pairs.iter().enumerate() {
                if space.quadratic_value(e) != f.zero() || space.quadratic_value(fv) != f.zero() {
                    return false;
                }
                for (j, (e2, f2)) in sb.pairs.iter().enumerate() {
                    if space.evaluate(e, f2) != if i == j { f.one() } else { f.zero() } {
                        return false;
                    }
                    if i != j && space.evaluate(e, e2) != f.zero() {
                        return false;
                    }
                    if i != j && space.evaluate(fv, f2) != f.zero() {
                        return false;
                    }
                }
                for t in &sb.tail {
                    if space.evaluate(e, t) != f.zero() || space.evaluate(fv, t) != f.zero() {
                        return false;
                    }
                }
            }
            // Tail spans an anisotropic summand (or the polar radical line).
            match sb.tail.len() {
                0 => true,
                1 => space.quadratic_value(&sb.tail[0]) != f.zero(),
                2 => {
                    for ia in 0..f.order() {
                        for ib in 0..f.order() {
                            if ia == 0 && ib == 0 {
                                continue;
                            }
                            let v = vadd(
                                f,
                                &vscale(f, f.element(ia), &sb.tail[0]),
                                &vscale(f, f.element(ib), &sb.tail[1]),
                            );
                            if space.quadratic_value(&v) == f.zero() {
                                return false;
                            }
                        }
                    }
                    true
                }
                _ => false,
            }
        }
        _ => false,
    }
}

/// Standard basis of a non-singular quadratic or hermitian space: hyperbolic
/// pairs plus a tail of at most two vectors, or an orthonormal basis in the
/// hermitian kind.
pub fn standard_basis(space: &FormSpace) -> Result<StandardBasis, Error> {
    match space.kind() {
        FormKind::Quadratic | FormKind::Hermitian => {}
        _ => return Err(Error::InvalidPayload),
    }
    if !space.is_nonsingular() {
        return Err(Error::SingularSpace);
    }
    match space.kind() {
        FormKind::Quadratic => standard_basis_quadratic(space),
        _ => standard_basis_hermitian(space),
    }
}

/// Inside the subspace spanned by the rows of `w`, peels off a subspace D
/// with V = D + D-perp (orthogonal, polar form non-singular on D) and
/// dim(W/D) <= dim(V/W). Returns a basis of D; all three conditions are
/// re-checked exactly.
pub fn split_off_nondegenerate(space: &FormSpace, w: &Matrix) -> Result<Matrix, Error> {
    if w.cols() != space.dim() {
        return Err(Error::ShapeMismatch);
    }
    if w.field() != space.field() {
        return Err(Error::FieldMismatch);
    }
    if w.rank() != w.rows() {
        return Err(Error::InvalidPayload);
    }
    let f = space.field().clone();
    let n = space.dim();
    let dim_w = w.rows();
    let mut rest: Vec<Vec<FieldElement>> = (0..dim_w).map(|i| w.row(i).to_vec()).collect();
    let mut d_rows: Vec<Vec<FieldElement>> = Vec::new();
    loop {
        if let Some(i) = rest.iter().position(|x| space.evaluate(x, x) != f.zero()) {
            let x = rest.remove(i);
            let ainv = f.inv(space.evaluate(&x, &x))?;
            for v in rest.iter_mut() {
                let c = f.mul(space.evaluate(v, &x), ainv);
                *v = vsub_scaled(&f, v, c, &x);
            }
            d_rows.push(x);
            continue;
        }
        let mut found = None;
        'scan: for i in 0..rest.len() {
            for j in (i + 1)..rest.len() {
                if space.evaluate(&rest[i], &rest[j]) != f.zero() {
                    found = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((i, j)) = found else { break };
        let y = rest.remove(j);
        let x = rest.remove(i);
        let mu = space.evaluate(&x, &y);
        let nu = space.evaluate(&y, &x);
        let mu_inv = f.inv(mu)?;
        let nu_inv = f.inv(nu)?;
        for v in rest.iter_mut() {
            let alpha = f.mul(space.evaluate(v, &y), mu_inv);
            let beta = f.mul(space.evaluate(v, &x), nu_inv);
            let mut next = vsub_scaled(&f, v, alpha, &x);
            next = vsub_scaled(&f, &next, beta, &y);
            *v = next;
        }
        d_rows.push(x);
        d_rows.push(y);
    }
    let d = Matrix::from_rows(&f, n, &d_rows);
    // dim(W/D) <= dim(V/W); can slip only in the characteristic-2 odd
    // dimension corner where the polar form has a radical.
    if dim_w - d.rows() > n - dim_w {
        return Err(Error::BoundViolation);
    }
    if d.rows() > 0 {
        let gd = match space.kind() {
            FormKind::Hermitian => d.mul(&space.gram).mul(&d.conj_transpose()),
            _ => d.mul(&space.polar()).mul(&d.transpose()),
        };
        if !gd.is_invertible() {
            return Err(Error::BoundViolation);
        }
    }
    let perp = perp_basis(space, &d);
    if perp.len() + d.rows() != n {
        return Err(Error::BoundViolation);
    }
    let mut all = d_rows.clone();
    all.extend(perp);
    if Matrix::from_rows(&f, n, &all).rank() != n {
        return Err(Error::BoundViolation);
    }
    Ok(d)
}

/// Basis of the perp of the row span of `a` under the space's bilinear or
/// sesquilinear pairing.
fn perp_basis(space: &FormSpace, a: &Matrix) -> Vec<Vec<FieldElement>> {
    let f = space.field().clone();
    if a.rows() == 0 {
        return unit_rows(&f, space.dim());
    }
    match space.kind() {
        FormKind::Hermitian => {
            let m = a.mul(&space.gram);
            m.kernel_basis()
                .into_iter()
                .map(|v| vconj(&f, &v))
                .collect()
        }
        _ => a.mul(&space.polar()).kernel_basis(),
    }
}

/// Pairwise form agreement of two row lists under the same space.
fn gram_pairs_match(space: &FormSpace, dom: &[Vec<FieldElement>], img: &[Vec<FieldElement>]) -> bool {
    for i in 0..dom.len() {
        for j in i..dom.len() {
            if space.evaluate(&dom[i], &dom[j]) != space.evaluate(&img[i], &img[j]) {
                return false;
            }
        }
        if space.quadratic_value(&dom[i]) != space.quadratic_value(&img[i]) {
            return false;
        }
    }
    true
}

fn combo_row(
    f: &FieldSpec,
    combo: &[FieldElement],
    rows: &[Vec<FieldElement>],
) -> Vec<FieldElement> {
    let mut out = vec![f.zero(); rows[0].len()];
    for (c, r) in combo.iter().zip(rows.iter()) {
        if *c != f.zero() {
            out = vadd(f, &out, &vscale(f, *c, r));
        }
    }
    out
}

/// Solves phi(rows_i, p) = rhs_i for p.
fn solve_pairings(
    space: &FormSpace,
    rows: &Matrix,
    rhs: &[FieldElement],
) -> Option<Vec<FieldElement>> {
    let f = space.field().clone();
    match space.kind() {
        FormKind::Hermitian => {
            let a = rows.mul(&space.gram);
            a.solve_right(rhs).map(|x| vconj(&f, &x))
        }
        _ => {
            let a = rows.mul(&space.polar());
            a.solve_right(rhs)
        }
    }
}

/// Extends a form-preserving injection, given by basis rows `domain` mapping
/// to rows `images`, to an isometry of the whole space. The extension is
/// found constructively: the radical of the partial domain is paired off
/// with partner vectors on both sides, and the orthogonal complements are
/// matched through their standard bases.
pub fn witt_complete(space: &FormSpace, domain: &Matrix, images: &Matrix) -> Result<Matrix, Error> {
    match space.kind() {
        FormKind::Quadratic | FormKind::Hermitian => {}
        _ => return Err(Error::InvalidPayload),
    }
    if !space.is_nonsingular() {
        return Err(Error::SingularSpace);
    }
    let f = space.field().clone();
    let n = space.dim();
    if domain.cols() != n || images.cols() != n || domain.rows() != images.rows() {
        return Err(Error::ShapeMismatch);
    }
    if domain.field() != space.field() || images.field() != space.field() {
        return Err(Error::FieldMismatch);
    }
    if domain.rank() != domain.rows() {
        return Err(Error::InvalidPayload);
    }
    if images.rank() != images.rows() {
        return Err(Error::NotIsometry);
    }
    let mut dom_rows: Vec<Vec<FieldElement>> = (0..domain.rows()).map(|i| domain.row(i).to_vec()).collect();
    let mut img_rows: Vec<Vec<FieldElement>> = (0..images.rows()).map(|i| images.row(i).to_vec()).collect();
    if !gram_pairs_match(space, &dom_rows, &img_rows) {
        return Err(Error::NotIsometry);
    }
    // Pair off the radical of the partial domain.
    loop {
        let dmat = Matrix::from_rows(&f, n, &dom_rows);
        let gram_u = match space.kind() {
            FormKind::Hermitian => dmat.mul(&space.gram).mul(&dmat.conj_transpose()),
            _ => dmat.mul(&space.polar()).mul(&dmat.transpose()),
        };
        let rad = gram_u.kernel_basis();
        let Some(combo) = rad.first() else { break };
        // For hermitian spaces the kernel is taken on the conjugated
        // coefficients so that the radical row is a plain combination.
        let combo: Vec<FieldElement> = match space.kind() {
            FormKind::Hermitian => vconj(&f, combo),
            _ => combo.clone(),
        };
        let piv = combo
            .iter()
            .position(|&c| c != f.zero())
            .ok_or(Error::SearchExhausted)?;
        dom_rows[piv] = combo_row(&f, &combo, &dom_rows);
        img_rows[piv] = combo_row(&f, &combo, &img_rows);
        let dmat = Matrix::from_rows(&f, n, &dom_rows);
        let imat = Matrix::from_rows(&f, n, &img_rows);
        let mut rhs = vec![f.zero(); dom_rows.len()];
        rhs[piv] = f.one();
        let p = solve_pairings(space, &dmat, &rhs).ok_or(Error::SearchExhausted)?;
        let p0 = solve_pairings(space, &imat, &rhs).ok_or(Error::SearchExhausted)?;
        let target = space.quadratic_value(&p);
        let r_img = img_rows[piv].clone();
        let mut perp = vec![r_img];
        perp.extend(perp_basis(space, &imat));
        let mut partner = None;
        'qmatch: {
            for b in &perp {
                for idx in 0..f.order().min(ELEMENT_SCAN_CAP) {
                    let c = f.element(idx);
                    let cand = vadd(&f, &p0, &vscale(&f, c, b));
                    if space.quadratic_value(&cand) == target {
                        partner = Some(cand);
                        break 'qmatch;
                    }
                }
            }
            let mut budget = PAIR_SCAN_CAP;
            for bi in 0..perp.len() {
                for bj in (bi + 1)..perp.len() {
                    for ia in 0..f.order() {
                        for ib in 0..f.order() {
                            if budget == 0 {
                                break 'qmatch;
                            }
                            budget -= 1;
                            let mut cand = vadd(&f, &p0, &vscale(&f, f.element(ia), &perp[bi]));
                            cand = vadd(&f, &cand, &vscale(&f, f.element(ib), &perp[bj]));
                            if space.quadratic_value(&cand) == target {
                                partner = Some(cand);
                                break 'qmatch;
                            }
                        }
                    }
                }
            }
        }
        let Some(p_img) = partner else {
            return Err(Error::SearchExhausted);
        };
        dom_rows.push(p);
        img_rows.push(p_img);
        if !gram_pairs_match(space, &dom_rows, &img_rows) {
            return Err(Error::SearchExhausted);
        }
    }
    // Match the orthogonal complements through their standard bases.
    let k = dom_rows.len();
    if k < n {
        let dmat = Matrix::from_rows(&f, n, &dom_rows);
        let imat = Matrix::from_rows(&f, n, &img_rows);
        let perp_d = perp_basis(space, &dmat);
        let perp_i = perp_basis(space, &imat);
        if perp_d.len() != n - k || perp_i.len() != n - k {
            return Err(Error::SearchExhausted);
        }
        let pd = Matrix::from_rows(&f, n, &perp_d);
        let pi = Matrix::from_rows(&f, n, &perp_i);
        let sub_d = space.restrict(&pd)?;
        let sub_i = space.restrict(&pi)?;
        let sbd = standard_basis(&sub_d)?;
        let sbi = standard_basis(&sub_i)?;
        if sbd.pairs.len() != sbi.pairs.len() || sbd.tail.len() != sbi.tail.len() {
            return Err(Error::SearchExhausted);
        }
        let lift = |v: &[FieldElement], base: &Matrix| -> Vec<FieldElement> {
            base.row_vec_mul(v)
        };
        for (pair_d, pair_i) in sbd.pairs.iter().zip(sbi.pairs.iter()) {
            dom_rows.push(lift(&pair_d.0, &pd));
            img_rows.push(lift(&pair_i.0, &pi));
            dom_rows.push(lift(&pair_d.1, &pd));
            img_rows.push(lift(&pair_i.1, &pi));
        }
        match sbd.tail.len() {
            0 => {}
            1 => {
                let a = sub_d.quadratic_value(&sbd.tail[0]);
                let b = sub_i.quadratic_value(&sbi.tail[0]);
                let mut scaled = None;
                for idx in 0..f.order().min(ELEMENT_SCAN_CAP) {
                    let c = f.element(idx);
                    let norm = match space.kind() {
                        FormKind::Hermitian => f.mul(c, f.involution(c)),
                        _ => f.mul(c, c),
                    };
                    if f.mul(norm, b) == a {
                        scaled = Some(vscale(&f, c, &sbi.tail[0]));
                        break;
                    }
                }
                let Some(t) = scaled else {
                    return Err(Error::SearchExhausted);
                };
                dom_rows.push(lift(&sbd.tail[0], &pd));
                img_rows.push(lift(&t, &pi));
            }
            _ => {
                let qx = sub_d.quadratic_value(&sbd.tail[0]);
                let qy = sub_d.quadratic_value(&sbd.tail[1]);
                let pxy = sub_d.evaluate(&sbd.tail[0], &sbd.tail[1]);
                let mut matched = None;
                'plane: for ia in 0..f.order() {
                    for ib in 0..f.order() {
                        if ia == 0 && ib == 0 {
                            continue;
                        }
                        let (ca, cb) = (f.element(ia), f.element(ib));
                        let v = vadd(
                            &f,
                            &vscale(&f, ca, &sbi.tail[0]),
                            &vscale(&f, cb, &sbi.tail[1]),
                        );
                        if sub_i.quadratic_value(&v) != qx {
                            continue;
                        }
                        for ic in 0..f.order() {
                            for id in 0..f.order() {
                                let (cc, cd) = (f.element(ic), f.element(id));
                                if f.sub(f.mul(ca, cd), f.mul(cb, cc)) == f.zero() {
                                    continue;
                                }
                                let wv = vadd(
                                    &f,
                                    &vscale(&f, cc, &sbi.tail[0]),
                                    &vscale(&f, cd, &sbi.tail[1]),
                                );
                                if sub_i.quadratic_value(&wv) == qy
                                    && sub_i.evaluate(&v, &wv) == pxy
                                {
                                    matched = Some((v, wv));
                                    break 'plane;
                                }
                            }
                        }
                    }
                }
                let Some((v, wv)) = matched else {
                    return Err(Error::SearchExhausted);
                };
                dom_rows.push(lift(&sbd.tail[0], &pd));
                img_rows.push(lift(&v, &pi));
                dom_rows.push(lift(&sbd.tail[1], &pd));
                img_rows.push(lift(&wv, &pi));
            }
        }
    }
    let dmat = Matrix::from_rows(&f, n, &dom_rows);
    let imat = Matrix::from_rows(&f, n, &img_rows);
    let h = dmat.inverse()?.mul(&imat);
    if !space.is_isometry(&h) || domain.mul(&h) != *images {
        return Err(Error::BoundViolation);
    }
    Ok(h)
}

/// Given a space whose Gram is block-diagonal with respect to
/// V = L + S (L the first dim - dim_s coordinates) and an isometry g of V,
/// produces an isometry h of L with rk(g|_L - h) <= 3 dim S. The subspace
/// matched exactly is U = D from [`split_off_nondegenerate`] applied to
/// L intersect g^{-1}(L); both the dimension bookkeeping and the final rank
/// bound are re-checked.
pub fn witt_extend(space: &FormSpace, dim_s: usize, g: &Matrix) -> Result<Matrix, Error> {
    match space.kind() {
        FormKind::Quadratic | FormKind::Hermitian => {}
        _ => return Err(Error::InvalidPayload),
    }
    let f = space.field().clone();
    let n = space.dim();
    if dim_s > n {
        return Err(Error::ShapeMismatch);
    }
    let l = n - dim_s;
    for i in 0..n {
        for j in 0..n {
            if (i < l) != (j < l) && space.gram.get(i, j) != f.zero() {
                return Err(Error::ShapeMismatch);
            }
        }
    }
    let l_space = FormSpace::new(space.kind, space.gram.block(0, 0, l, l))?;
    let s_space = FormSpace::new(space.kind, space.gram.block(l, l, dim_s, dim_s))?;
    if !l_space.is_nonsingular() || !s_space.is_nonsingular() {
        return Err(Error::SingularSpace);
    }
    if !space.is_isometry(g) {
        return Err(Error::NotIsometry);
    }
    if dim_s == 0 {
        return Ok(g.clone());
    }
    // W = L intersect g^{-1}(L): vectors with zero S-part before and after g.
    let constraint = Matrix::from_fn(&f, n, 2 * dim_s, |i, j| {
        if j < dim_s {
            if i == l + j {
                f.one()
            } else {
                f.zero()
            }
        } else {
            g.get(i, l + (j - dim_s))
        }
    });
    let w_rows = constraint.transpose().kernel_basis();
    let w = Matrix::from_rows(&f, n, &w_rows);
    let u = split_off_nondegenerate(space, &w)?;
    if n - u.rows() > 4 * dim_s {
        return Err(Error::BoundViolation);
    }
    // U and g(U) lie in L; drop the zero S-coordinates.
    let ul = u.block(0, 0, u.rows(), l);
    let ug = u.mul(g);
    for i in 0..ug.rows() {
        for j in l..n {
            if ug.get(i, j) != f.zero() {
                return Err(Error::BoundViolation);
            }
        }
    }
    let ugl = ug.block(0, 0, ug.rows(), l);
    let h = witt_complete(&l_space, &ul, &ugl)?;
    // rk(g|_L - h) <= 3 dim S.
    let defect = Matrix::from_fn(&f, l, n, |i, j| {
        let hij = if j < l { h.get(i, j) } else { f.zero() };
        f.sub(g.get(i, j), hij)
    });
    if defect.rank() > 3 * dim_s {
        return Err(Error::BoundViolation);
    }
    Ok(h)
}

/// Random non-singular quadratic space of the given dimension: a seeded
/// congruence transform of hyperbolic pair blocks plus a random anisotropic
/// tail of dimension at most 2.
pub fn random_quadratic_space(
    field: &FieldSpec,
    dim: usize,
    rng: &mut SplitMix64,
) -> Result<FormSpace, Error> {
    let f = field.clone();
    if dim == 0 {
        return FormSpace::new(FormKind::Quadratic, Matrix::zero(&f, 0, 0));
    }
    let odd = dim % 2 == 1;
    let plane = !odd && rng.below(2) == 1;
    let paired = if odd {
        dim - 1
    } else if plane {
        dim - 2
    } else {
        dim
    };
    let mut rows: Vec<Vec<FieldElement>> = vec![vec![f.zero(); dim]; dim];
    let mut i = 0;
    while i < paired {
        rows[i][i + 1] = f.one();
        i += 2;
    }
    if odd {
        rows[dim - 1][dim - 1] = f.element(1 + rng.below((f.order() - 1) as u64) as u32);
    }
    if plane {
        let (a, b, c) = anisotropic_plane_coeffs(&f).ok_or(Error::SearchExhausted)?;
        rows[dim - 2][dim - 2] = a;
        rows[dim - 2][dim - 1] = b;
        rows[dim - 1][dim - 1] = c;
    }
    let base = Matrix::from_rows(&f, dim, &rows);
    let t = random_gl(&f, dim, rng);
    let space = FormSpace::new(FormKind::Quadratic, t.mul(&base).mul(&t.transpose()))?;
    debug_assert!(space.is_nonsingular());
    Ok(space)
}

/// First (a, b, c) whose form a x^2 + b xy + c y^2 has no nontrivial zero.
fn anisotropic_plane_coeffs(f: &FieldSpec) -> Option<(FieldElement, FieldElement, FieldElement)> {
    for ia in 0..f.order() {
        for ib in 0..f.order() {
            for ic in 0..f.order() {
                let (a, b, c) = (f.element(ia), f.element(ib), f.element(ic));
                let mut anis = true;
                'vecs: for x in 0..f.order() {
                    for y in 0..f.order() {
                        if x == 0 && y == 0 {
                            continue;
                        }
                        let (xe, ye) = (f.element(x), f.element(y));
                        let val = f.add(
                            f.add(f.mul(a, f.mul(xe, xe)), f.mul(b, f.mul(xe, ye))),
                            f.mul(c, f.mul(ye, ye)),
                        );
                        if val == f.zero() {
                            anis = false;
                            break 'vecs;
                        }
                    }
                }
                if anis {
                    return Some((a, b, c));
                }
            }
        }
    }
    None
}

/// Random non-singular hermitian space: a seeded congruence transform of the
/// identity Gram.
pub fn random_hermitian_space(
    field: &FieldSpec,
    dim: usize,
    rng: &mut SplitMix64,
) -> Result<FormSpace, Error> {
    if !field.involution_enabled() {
        return Err(Error::NoInvolution);
    }
    let t = random_gl(field, dim, rng);
    FormSpace::new(FormKind::Hermitian, t.mul(&t.conj_transpose()))
}

/// Random isometry of a non-singular quadratic or hermitian space, built as
/// a product of `steps` reflections in anisotropic vectors (unitary
/// pseudo-reflections in the hermitian kind).
pub fn random_isometry(
    space: &FormSpace,
    steps: usize,
    rng: &mut SplitMix64,
) -> Result<Matrix, Error> {
    match space.kind() {
        FormKind::Quadratic | FormKind::Hermitian => {}
        _ => return Err(Error::InvalidPayload),
    }
    let f = space.field().clone();
    let n = space.dim();
    let mut pool: Vec<Vec<FieldElement>> = Vec::new();
    let units = unit_rows(&f, n);
    for u in &units {
        if space.quadratic_value(u) != f.zero() {
            pool.push(u.clone());
        }
    }
    'fill: for i in 0..n {
        for j in (i + 1)..n {
            for idx in 1..f.order() {
                let cand = vadd(&f, &units[i], &vscale(&f, f.element(idx), &units[j]));
                if space.quadratic_value(&cand) != f.zero() {
                    pool.push(cand);
                }
                if pool.len() >= 48 {
                    break 'fill;
                }
            }
        }
    }
    if pool.is_empty() {
        return Ok(Matrix::identity(&f, n));
    }
    let norm_one: Vec<FieldElement> = if space.kind() == FormKind::Hermitian {
        (0..f.order())
            .map(|i| f.element(i))
            .filter(|&c| f.mul(c, f.involution(c)) == f.one() && c != f.one())
            .collect()
    } else {
        Vec::new()
    };
    let mut h = Matrix::identity(&f, n);
    for _ in 0..steps {
        let w = &pool[rng.below(pool.len() as u64) as usize];
        let qinv = f.inv(space.quadratic_value(w))?;
        let r = match space.kind() {
            FormKind::Quadratic => {
                let pv = space.polar().row_vec_mul(w);
                Matrix::from_fn(&f, n, n, |i, j| {
                    let delta = if i == j { f.one() } else { f.zero() };
                    f.sub(delta, f.mul(f.mul(pv[i], qinv), w[j]))
                })
            }
            _ => {
                let zeta = if norm_one.is_empty() {
                    f.neg(f.one())
                } else {
                    norm_one[rng.below(norm_one.len() as u64) as usize]
                };
                let scale = f.mul(f.sub(f.one(), zeta), qinv);
                let cw = vconj(&f, w);
                let gv = space.gram.transpose().row_vec_mul(&cw);
                Matrix::from_fn(&f, n, n, |i, j| {
                    let delta = if i == j { f.one() } else { f.zero() };
                    f.sub(delta, f.mul(f.mul(gv[i], scale), w[j]))
                })
            }
        };
        debug_assert!(space.is_isometry(&r));
        h = h.mul(&r);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32, k: u32) -> FieldSpec {
        FieldSpec::new(p, k).unwrap()
    }

    fn quad(f: &FieldSpec, rows: &[&[u32]]) -> FormSpace {
        FormSpace::new(FormKind::Quadratic, Matrix::from_indices(f, rows)).unwrap()
    }

    fn random_alternating(f: &FieldSpec, n: usize, rng: &mut SplitMix64) -> Matrix {
        let m = Matrix::from_fn(f, n, n, |_, _| f.element(rng.below(f.order() as u64) as u32));
        m.sub(&m.transpose())
    }

    fn random_symmetric(f: &FieldSpec, n: usize, rng: &mut SplitMix64) -> Matrix {
        let mut rows = vec![vec![f.zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = f.element(rng.below(f.order() as u64) as u32);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        Matrix::from_rows(f, n, &rows)
    }

    fn random_anti_hermitian(f: &FieldSpec, n: usize, rng: &mut SplitMix64) -> Matrix {
        let m = Matrix::from_fn(f, n, n, |_, _| f.element(rng.below(f.order() as u64) as u32));
        m.sub(&m.conj_transpose())
    }

    fn random_subspace(f: &FieldSpec, n: usize, k: usize, rng: &mut SplitMix64) -> Matrix {
        let t = random_gl(f, n, rng);
        t.block(0, 0, k, n)
    }

    #[test]
    fn skew_normal_form_zero() {
        let f = gf(3, 1);
        let k = Matrix::zero(&f, 3, 3);
        let (c, d) = skew_congruence_normal_form(&k).unwrap();
        assert!(c.is_invertible());
        assert!(d.is_zero());
    }

    #[test]
    fn skew_normal_form_standard_block() {
        let f = gf(5, 1);
        let k = Matrix::from_indices(&f, &[&[0, 1], &[4, 0]]);
        let (c, d) = skew_congruence_normal_form(&k).unwrap();
        assert_eq!(c.mul(&d).mul(&c.transpose()), k);
        assert_eq!(d, k);
    }

    fn check_skew_layout(k: &Matrix, c: &Matrix, d: &Matrix) {
        let f = k.field();
        assert!(c.is_invertible());
        assert_eq!(c.mul(d).mul(&c.transpose()), *k);
        let rk = k.rank();
        assert_eq!(rk % 2, 0);
        let s = rk / 2;
        assert_eq!(d.rank(), rk);
        let n = k.rows();
        for i in 0..n {
            for j in 0..n {
                let want = if i < 2 * s && i / 2 == j / 2 && j == i + 1 {
                    f.one()
                } else if i < 2 * s && i / 2 == j / 2 && i == j + 1 {
                    f.neg(f.one())
                } else {
                    f.zero()
                };
                assert_eq!(d.get(i, j), want);
            }
        }
    }

    #[test]
    fn skew_normal_form_reconstructs() {
        let f = gf(3, 1);
        let mut rng = SplitMix64::new(7);
        let t = random_gl(&f, 6, &mut rng);
        let base = Matrix::from_indices(
            &f,
            &[
                &[0, 1, 0, 0, 0, 0],
                &[2, 0, 0, 0, 0, 0],
                &[0, 0, 0, 1, 0, 0],
                &[0, 0, 2, 0, 0, 0],
                &[0, 0, 0, 0, 0, 0],
                &[0, 0, 0, 0, 0, 0],
            ],
        );
        let k = t.mul(&base).mul(&t.transpose());
        assert_eq!(k.rank(), 4);
        let (c, d) = skew_congruence_normal_form(&k).unwrap();
        check_skew_layout(&k, &c, &d);
    }

    #[test]
    fn skew_normal_form_rejects() {
        let f = gf(3, 1);
        let sym = Matrix::from_indices(&f, &[&[1, 2], &[2, 0]]);
        assert_eq!(
            skew_congruence_normal_form(&sym).unwrap_err(),
            Error::NotAlternating
        );
        let f2 = gf(2, 1);
        let diag = Matrix::from_indices(&f2, &[&[1, 1], &[1, 0]]);
        assert_eq!(
            skew_congruence_normal_form(&diag).unwrap_err(),
            Error::NotAlternating
        );
    }

    #[test]
    fn skew_normal_form_structure() {
        for (p, k, n) in [(2, 1, 6), (3, 1, 5), (2, 2, 4), (5, 1, 7), (3, 2, 4)] {
            let f = gf(p, k);
            let mut rng = SplitMix64::new(100 + p as u64 * 10 + k as u64);
            for _ in 0..8 {
                let m = random_alternating(&f, n, &mut rng);
                let (c, d) = skew_congruence_normal_form(&m).unwrap();
                check_skew_layout(&m, &c, &d);
            }
        }
    }

    fn check_symmetric_layout(k: &Matrix, c: &Matrix, d: &Matrix) {
        let f = k.field();
        assert!(c.is_invertible());
        assert_eq!(c.mul(d).mul(&c.transpose()), *k);
        let n = k.rows();
        let mut i = 0;
        let mut s = 0;
        while i + 1 < n && d.get(i, i) == f.zero() && d.get(i, i + 1) != f.zero() {
            assert_eq!(d.get(i, i + 1), f.one());
            assert_eq!(d.get(i + 1, i), f.one());
            assert_eq!(d.get(i + 1, i + 1), f.zero());
            s += 1;
            i += 2;
        }
        let mut sp = 0;
        while i < n && d.get(i, i) != f.zero() {
            sp += 1;
            i += 1;
        }
        for r in 0..n {
            for q in 0..n {
                let in_pair = r < 2 * s && r / 2 == q / 2 && r != q;
                let in_diag = r == q && r >= 2 * s && r < 2 * s + sp;
                if !in_pair && !in_diag {
                    assert_eq!(d.get(r, q), f.zero());
                }
            }
        }
        assert_eq!(2 * s + sp, k.rank());
    }

    #[test]
    fn symmetric_normal_form_diag() {
        let f = gf(3, 1);
        let k = Matrix::identity(&f, 2);
        let (c, d) = symmetric_congruence_normal_form(&k).unwrap();
        check_symmetric_layout(&k, &c, &d);
        assert_eq!(d.get(0, 0), f.one());
        assert_eq!(d.get(1, 1), f.one());
    }

    #[test]
    fn symmetric_normal_form_char2_pair() {
        let f = gf(2, 1);
        let k = Matrix::from_indices(&f, &[&[0, 1], &[1, 0]]);
        let (c, d) = symmetric_congruence_normal_form(&k).unwrap();
        check_symmetric_layout(&k, &c, &d);
        assert_eq!(d, k);
    }

    #[test]
    fn symmetric_normal_form_structure() {
        for (p, k, n) in [(2, 1, 5), (3, 1, 6), (2, 2, 4), (5, 1, 5), (3, 2, 4)] {
            let f = gf(p, k);
            let mut rng = SplitMix64::new(200 + p as u64 * 10 + k as u64);
            for _ in 0..8 {
                let m = random_symmetric(&f, n, &mut rng);
                let (c, d) = symmetric_congruence_normal_form(&m).unwrap();
                check_symmetric_layout(&m, &c, &d);
            }
        }
    }

    fn check_anti_hermitian_layout(k: &Matrix, c: &Matrix, d: &Matrix) {
        let f = k.field();
        assert!(c.is_invertible());
        assert_eq!(c.mul(d).mul(&c.conj_transpose()), *k);
        let n = k.rows();
        let r = k.rank();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    assert_eq!(d.get(i, j), f.zero());
                } else if i < r {
                    let v = d.get(i, i);
                    assert_ne!(v, f.zero());
                    assert_eq!(f.involution(v), f.neg(v));
                } else {
                    assert_eq!(d.get(i, i), f.zero());
                }
            }
        }
    }

    #[test]
    fn anti_hermitian_normal_form_gf4() {
        let f = gf(2, 2);
        let x = f.x();
        let x2 = f.mul(x, x);
        let k = Matrix::from_fn(&f, 2, 2, |i, j| match (i, j) {
            (0, 0) => f.one(),
            (0, 1) => x,
            (1, 0) => x2,
            _ => f.zero(),
        });
        let (c, d) = anti_hermitian_congruence_normal_form(&k).unwrap();
        check_anti_hermitian_layout(&k, &c, &d);
    }

    #[test]
    fn anti_hermitian_normal_form_structure() {
        for (p, k, n) in [(2, 2, 4), (3, 2, 3), (2, 2, 5), (3, 2, 4)] {
            let f = gf(p, k);
            let mut rng = SplitMix64::new(300 + p as u64 * 10 + n as u64);
            for _ in 0..8 {
                let m = random_anti_hermitian(&f, n, &mut rng);
                let (c, d) = anti_hermitian_congruence_normal_form(&m).unwrap();
                check_anti_hermitian_layout(&m, &c, &d);
            }
        }
    }

    #[test]
    fn anti_hermitian_requires_involution() {
        let f = gf(3, 1);
        let k = Matrix::zero(&f, 2, 2);
        assert_eq!(
            anti_hermitian_congruence_normal_form(&k).unwrap_err(),
            Error::NoInvolution
        );
    }

    #[test]
    fn form_space_canonicalizes_quadratic() {
        let f = gf(3, 1);
        let full = Matrix::from_indices(&f, &[&[1, 2, 0], &[1, 0, 1], &[2, 2, 1]]);
        let space = FormSpace::new(FormKind::Quadratic, full.clone()).unwrap();
        for i in 0..3 {
            for j in 0..i {
                assert_eq!(space.gram().get(i, j), f.zero());
            }
        }
        let mut rng = SplitMix64::new(9);
        for _ in 0..20 {
            let v: Vec<FieldElement> =
                (0..3).map(|_| f.element(rng.below(9) as u32 % 3)).collect();
            let direct = {
                let r = full.row_vec_mul(&v);
                let mut acc = f.zero();
                for j in 0..3 {
                    acc = f.add(acc, f.mul(r[j], v[j]));
                }
                acc
            };
            assert_eq!(space.quadratic_value(&v), direct);
        }
    }

    #[test]
    fn form_space_rejects() {
        let f = gf(3, 1);
        let m = Matrix::from_indices(&f, &[&[0, 1], &[2, 0]]);
        assert_eq!(
            FormSpace::new(FormKind::SymmetricBilinear, m.clone()).unwrap_err(),
            Error::NotSymmetric
        );
        let sym = Matrix::identity(&f, 2);
        assert_eq!(
            FormSpace::new(FormKind::Alternating, sym.clone()).unwrap_err(),
            Error::NotAlternating
        );
        assert_eq!(
            FormSpace::new(FormKind::Hermitian, sym).unwrap_err(),
            Error::NoInvolution
        );
        let f4 = gf(2, 2);
        let bad = Matrix::from_fn(&f4, 2, 2, |i, j| if i == 0 && j == 1 { f4.x() } else { f4.zero() });
        assert_eq!(
            FormSpace::new(FormKind::Hermitian, bad).unwrap_err(),
            Error::NotHermitian
        );
    }

    #[test]
    fn evaluate_polarization() {
        let f = gf(2, 1);
        let space = quad(&f, &[&[1, 1, 0], &[0, 0, 1], &[0, 0, 1]]);
        let mut rng = SplitMix64::new(21);
        for _ in 0..30 {
            let u: Vec<FieldElement> = (0..3).map(|_| f.element(rng.below(2) as u32)).collect();
            let v: Vec<FieldElement> = (0..3).map(|_| f.element(rng.below(2) as u32)).collect();
            let uv = vadd(&f, &u, &v);
            let lhs = f.sub(
                space.quadratic_value(&uv),
                f.add(space.quadratic_value(&u), space.quadratic_value(&v)),
            );
            assert_eq!(lhs, space.evaluate(&u, &v));
        }
        let f9 = gf(3, 2);
        let mut rng9 = SplitMix64::new(22);
        let h = random_hermitian_space(&f9, 3, &mut rng9).unwrap();
        for _ in 0..20 {
            let u: Vec<FieldElement> = (0..3).map(|_| f9.element(rng9.below(9) as u32)).collect();
            let v: Vec<FieldElement> = (0..3).map(|_| f9.element(rng9.below(9) as u32)).collect();
            assert_eq!(h.evaluate(&u, &v), f9.involution(h.evaluate(&v, &u)));
        }
    }

    #[test]
    fn is_isometry_checks_quadratic_part() {
        let f = gf(2, 1);
        let space = quad(&f, &[&[0, 1], &[0, 0]]);
        let swap = Matrix::from_indices(&f, &[&[0, 1], &[1, 0]]);
        assert!(space.is_isometry(&swap));
        // Preserves the polar form but moves Q(e0) from 0 to 1.
        let shear = Matrix::from_indices(&f, &[&[1, 1], &[0, 1]]);
        assert!(!space.is_isometry(&shear));
    }

    #[test]
    fn standard_basis_hyperbolic_plane() {
        let f = gf(3, 1);
        let space = quad(&f, &[&[0, 1], &[0, 0]]);
        let sb = standard_basis(&space).unwrap();
        assert_eq!(sb.pairs.len(), 1);
        assert_eq!(sb.tail_kind, TailKind::Empty);
        assert!(standard_basis_is_valid(&space, &sb));
    }

    #[test]
    fn standard_basis_line_tail() {
        let f = gf(5, 1);
        let space = quad(&f, &[&[0, 1, 0], &[0, 0, 0], &[0, 0, 1]]);
        let sb = standard_basis(&space).unwrap();
        assert_eq!(sb.pairs.len(), 1);
        assert_eq!(sb.tail_kind, TailKind::Line);
        assert!(standard_basis_is_valid(&space, &sb));
    }

    #[test]
    fn standard_basis_diagonal_form() {
        let f = gf(5, 1);
        let space = quad(&f, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let sb = standard_basis(&space).unwrap();
        assert_eq!(sb.pairs.len(), 1);
        assert_eq!(sb.tail_kind, TailKind::Line);
        assert!(standard_basis_is_valid(&space, &sb));
    }

    #[test]
    fn standard_basis_hermitian() {
        let f = gf(3, 2);
        let even = FormSpace::new(FormKind::Hermitian, Matrix::identity(&f, 4)).unwrap();
        let sb = standard_basis(&even).unwrap();
        assert_eq!(sb.pairs.len(), 2);
        assert_eq!(sb.tail_kind, TailKind::Empty);
        assert!(standard_basis_is_valid(&even, &sb));
        let mut rng = SplitMix64::new(31);
        let odd = random_hermitian_space(&f, 3, &mut rng).unwrap();
        let sb = standard_basis(&odd).unwrap();
        assert_eq!(sb.pairs.len(), 1);
        assert_eq!(sb.tail_kind, TailKind::Line);
        assert!(standard_basis_is_valid(&odd, &sb));
    }

    #[test]
    fn standard_basis_char2() {
        let f = gf(2, 1);
        let two_planes = quad(&f, &[&[0, 1, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, 0, 0]]);
        let sb = standard_basis(&two_planes).unwrap();
        assert_eq!(sb.pairs.len(), 2);
        assert_eq!(sb.tail_kind, TailKind::Empty);
        let anis = quad(&f, &[&[1, 1], &[0, 1]]);
        let sb = standard_basis(&anis).unwrap();
        assert_eq!(sb.pairs.len(), 0);
        assert_eq!(sb.tail_kind, TailKind::Plane);
        assert!(standard_basis_is_valid(&anis, &sb));
        let radical_line = quad(&f, &[&[0, 1, 0], &[0, 0, 0], &[0, 0, 1]]);
        let sb = standard_basis(&radical_line).unwrap();
        assert_eq!(sb.pairs.len(), 1);
        assert_eq!(sb.tail_kind, TailKind::Line);
        assert!(standard_basis_is_valid(&radical_line, &sb));
    }

    #[test]
    fn standard_basis_rejects_singular() {
        let f = gf(3, 1);
        let degenerate = quad(&f, &[&[0, 1, 0], &[0, 0, 0], &[0, 0, 0]]);
        assert_eq!(standard_basis(&degenerate).unwrap_err(), Error::SingularSpace);
        let f9 = gf(3, 2);
        let h = FormSpace::new(FormKind::Hermitian, Matrix::zero(&f9, 2, 2)).unwrap();
        assert_eq!(standard_basis(&h).unwrap_err(), Error::SingularSpace);
        let alt = FormSpace::new(FormKind::Alternating, Matrix::zero(&f, 2, 2)).unwrap();
        assert_eq!(standard_basis(&alt).unwrap_err(), Error::InvalidPayload);
    }

    #[test]
    fn standard_basis_random_spaces() {
        for (p, k) in [(2, 1), (3, 1), (2, 2), (5, 1), (3, 2)] {
            let f = gf(p, k);
            let mut rng = SplitMix64::new(400 + p as u64 * 10 + k as u64);
            for dim in 2..7 {
                let space = random_quadratic_space(&f, dim, &mut rng).unwrap();
                let sb = standard_basis(&space).unwrap();
                assert!(standard_basis_is_valid(&space, &sb));
            }
        }
        for (p, k) in [(2, 2), (3, 2)] {
            let f = gf(p, k);
            let mut rng = SplitMix64::new(500 + p as u64);
            for dim in 1..6 {
                let space = random_hermitian_space(&f, dim, &mut rng).unwrap();
                let sb = standard_basis(&space).unwrap();
                assert!(standard_basis_is_valid(&space, &sb));
            }
        }
    }

    fn check_split_off(space: &FormSpace, w: &Matrix, d: &Matrix) {
        let f = space.field().clone();
        let n = space.dim();
        // D lies inside W.
        let mut all = Vec::new();
        for i in 0..w.rows() {
            all.push(w.row(i).to_vec());
        }
        for i in 0..d.rows() {
            all.push(d.row(i).to_vec());
        }
        assert_eq!(Matrix::from_rows(&f, n, &all).rank(), w.rows());
        // The pairing is non-singular on D.
        if d.rows() > 0 {
            let gd = match space.kind() {
                FormKind::Hermitian => d.mul(&space.gram).mul(&d.conj_transpose()),
                _ => d.mul(&space.polar()).mul(&d.transpose()),
            };
            assert!(gd.is_invertible());
        }
        // V = D + D-perp.
        let perp = perp_basis(space, d);
        assert_eq!(perp.len() + d.rows(), n);
        // Codimension bound.
        assert!(w.rows() - d.rows() <= n - w.rows());
    }

    #[test]
    fn split_off_full_space() {
        let f = gf(3, 1);
        let mut rng = SplitMix64::new(41);
        let space = random_quadratic_space(&f, 4, &mut rng).unwrap();
        let w = Matrix::identity(&f, 4);
        let d = split_off_nondegenerate(&space, &w).unwrap();
        assert_eq!(d.rows(), 4);
        check_split_off(&space, &w, &d);
    }

    #[test]
    fn split_off_isotropic_line() {
        let f = gf(3, 1);
        let space = quad(&f, &[&[0, 1], &[0, 0]]);
        let w = Matrix::from_indices(&f, &[&[1, 0]]);
        let d = split_off_nondegenerate(&space, &w).unwrap();
        assert_eq!(d.rows(), 0);
    }

    #[test]
    fn split_off_random_subspace() {
        let f = gf(3, 1);
        let mut rng = SplitMix64::new(43);
        let space = random_quadratic_space(&f, 6, &mut rng).unwrap();
        let w = random_subspace(&f, 6, 4, &mut rng);
        let d = split_off_nondegenerate(&space, &w).unwrap();
        assert!(d.rows() >= 2);
        check_split_off(&space, &w, &d);
    }

    #[test]
    fn split_off_all_kinds() {
        let f3 = gf(3, 1);
        let f9 = gf(3, 2);
        let mut rng = SplitMix64::new(47);
        let sympl = {
            let base = Matrix::from_indices(
                &f3,
                &[
                    &[0, 1, 0, 0, 0, 0],
                    &[2, 0, 0, 0, 0, 0],
                    &[0, 0, 0, 1, 0, 0],
                    &[0, 0, 2, 0, 0, 0],
                    &[0, 0, 0, 0, 0, 1],
                    &[0, 0, 0, 0, 2, 0],
                ],
            );
            let t = random_gl(&f3, 6, &mut rng);
            FormSpace::new(FormKind::Alternating, t.mul(&base).mul(&t.transpose())).unwrap()
        };
        let symm = {
            let t = random_gl(&f3, 5, &mut rng);
            FormSpace::new(FormKind::SymmetricBilinear, t.mul(&t.transpose())).unwrap()
        };
        let herm = random_hermitian_space(&f9, 5, &mut rng).unwrap();
        for space in [&sympl, &symm, &herm] {
            let f = space.field().clone();
            let n = space.dim();
            for k in 0..=n {
                let w = random_subspace(&f, n, k, &mut rng);
                let d = split_off_nondegenerate(space, &w).unwrap();
                check_split_off(space, &w, &d);
            }
        }
        let f2 = gf(2, 1);
        let mut rng2 = SplitMix64::new(48);
        for dim in [4usize, 6] {
            let space = random_quadratic_space(&f2, dim, &mut rng2).unwrap();
            for k in 0..=dim {
                let w = random_subspace(&f2, dim, k, &mut rng2);
                let d = split_off_nondegenerate(&space, &w).unwrap();
                check_split_off(&space, &w, &d);
            }
        }
    }

    #[test]
    fn witt_complete_full_domain() {
        let f = gf(3, 1);
        let mut rng = SplitMix64::new(51);
        let space = random_quadratic_space(&f, 4, &mut rng).unwrap();
        let g = random_isometry(&space, 6, &mut rng).unwrap();
        let domain = Matrix::identity(&f, 4);
        let h = witt_complete(&space, &domain, &g).unwrap();
        assert_eq!(h, g);
    }

    #[test]
    fn witt_complete_empty_domain() {
        let f = gf(3, 1);
        let mut rng = SplitMix64::new(52);
        let space = random_quadratic_space(&f, 4, &mut rng).unwrap();
        let empty = Matrix::zero(&f, 0, 4);
        let h = witt_complete(&space, &empty, &empty).unwrap();
        assert!(h.is_identity());
    }

    #[test]
    fn witt_complete_hyperbolic_shift() {
        let f = gf(5, 1);
        let space = quad(&f, &[&[0, 1], &[0, 0]]);
        let domain = Matrix::from_indices(&f, &[&[1, 0]]);
        let images = Matrix::from_indices(&f, &[&[0, 1]]);
        let h = witt_complete(&space, &domain, &images).unwrap();
        assert!(space.is_isometry(&h));
        assert_eq!(domain.mul(&h), images);
    }

    #[test]
    fn witt_complete_radical_partnering() {
        let f = gf(3, 1);
        let space = quad(
            &f,
            &[&[0, 1, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, 0, 0]],
        );
        let domain = Matrix::from_indices(&f, &[&[1, 0, 0, 0]]);
        let images = Matrix::from_indices(&f, &[&[0, 0, 1, 0]]);
        let h = witt_complete(&space, &domain, &images).unwrap();
        assert!(space.is_isometry(&h));
        assert_eq!(domain.mul(&h), images);
    }

    #[test]
    fn witt_complete_rejects_non_isometry() {
        let f = gf(3, 1);
        let space = quad(&f, &[&[0, 1], &[0, 0]]);
        let domain = Matrix::from_indices(&f, &[&[1, 0]]);
        let images = Matrix::from_indices(&f, &[&[1, 1]]);
        assert_eq!(
            witt_complete(&space, &domain, &images).unwrap_err(),
            Error::NotIsometry
        );
    }

    #[test]
    fn witt_complete_random_extension() {
        let cases: [(u32, u32, bool); 5] =
            [(3, 1, false), (5, 1, false), (2, 1, false), (2, 2, true), (3, 2, true)];
        for (p, k, hermitian) in cases {
            let f = gf(p, k);
            let mut rng = SplitMix64::new(600 + p as u64 * 10 + k as u64);
            for dim in 3..6 {
                if !hermitian && p == 2 && dim % 2 == 1 {
                    continue;
                }
                let space = if hermitian {
                    random_hermitian_space(&f, dim, &mut rng).unwrap()
                } else {
                    random_quadratic_space(&f, dim, &mut rng).unwrap()
                };
                let g = random_isometry(&space, 5, &mut rng).unwrap();
                for sub in 0..=dim {
                    let w = random_subspace(&f, dim, sub, &mut rng);
                    let images = w.mul(&g);
                    let h = witt_complete(&space, &w, &images).unwrap();
                    assert!(space.is_isometry(&h));
                    assert_eq!(w.mul(&h), images);
                }
            }
        }
    }

    #[test]
    fn witt_extend_identity_cases() {
        let f = gf(3, 1);
        let mut rng = SplitMix64::new(61);
        let space = random_quadratic_space(&f, 6, &mut rng).unwrap();
        let g = random_isometry(&space, 4, &mut rng).unwrap();
        assert_eq!(witt_extend(&space, 0, &g).unwrap(), g);
        let block = quad(
            &f,
            &[
                &[0, 1, 0, 0, 0],
                &[0, 0, 0, 0, 0],
                &[0, 0, 1, 0, 0],
                &[0, 0, 0, 0, 1],
                &[0, 0, 0, 0, 0],
            ],
        );
        let id = Matrix::identity(&f, 5);
        let h = witt_extend(&block, 2, &id).unwrap();
        assert!(h.is_identity());
        assert_eq!(h.rows(), 3);
    }

    #[test]
    fn witt_extend_gates() {
        let f = gf(3, 1);
        // Off-block entry between L and S.
        let coupled = quad(&f, &[&[1, 1], &[0, 1]]);
        assert_eq!(
            witt_extend(&coupled, 1, &Matrix::identity(&f, 2)).unwrap_err(),
            Error::ShapeMismatch
        );
        // Singular S block.
        let bad_s = quad(&f, &[&[0, 1, 0], &[0, 0, 0], &[0, 0, 0]]);
        assert_eq!(
            witt_extend(&bad_s, 1, &Matrix::identity(&f, 3)).unwrap_err(),
            Error::SingularSpace
        );
        // Non-isometry.
        let ok = quad(&f, &[&[0, 1, 0], &[0, 0, 0], &[0, 0, 1]]);
        let bad_g = Matrix::from_indices(&f, &[&[1, 1, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(witt_extend(&ok, 1, &bad_g).unwrap_err(), Error::NotIsometry);
    }

    fn block_quadratic(
        f: &FieldSpec,
        l: usize,
        s: usize,
        rng: &mut SplitMix64,
    ) -> FormSpace {
        let left = random_quadratic_space(f, l, rng).unwrap();
        let right = random_quadratic_space(f, s, rng).unwrap();
        FormSpace::new(
            FormKind::Quadratic,
            Matrix::block_diag(left.gram(), right.gram()),
        )
        .unwrap()
    }

    fn block_hermitian(
        f: &FieldSpec,
        l: usize,
        s: usize,
        rng: &mut SplitMix64,
    ) -> FormSpace {
        let left = random_hermitian_space(f, l, rng).unwrap();
        let right = random_hermitian_space(f, s, rng).unwrap();
        FormSpace::new(
            FormKind::Hermitian,
            Matrix::block_diag(left.gram(), right.gram()),
        )
        .unwrap()
    }

    #[test]
    fn witt_extend_random_quadratic() {
        let f = gf(3, 1);
        let mut rng = SplitMix64::new(71);
        let space = block_quadratic(&f, 8, 2, &mut rng);
        let g = random_isometry(&space, 8, &mut rng).unwrap();
        let h = witt_extend(&space, 2, &g).unwrap();
        let l_space = FormSpace::new(FormKind::Quadratic, space.gram().block(0, 0, 8, 8)).unwrap();
        assert!(l_space.is_isometry(&h));
        let defect = Matrix::from_fn(&f, 8, 10, |i, j| {
            let hij = if j < 8 { h.get(i, j) } else { f.zero() };
            f.sub(g.get(i, j), hij)
        });
        assert!(defect.rank() <= 6);
    }

    #[test]
    fn witt_extend_random_property() {
        let cases: [(u32, u32, bool); 4] = [(3, 1, false), (5, 1, false), (2, 2, true), (3, 2, true)];
        for (p, k, hermitian) in cases {
            let f = gf(p, k);
            let mut rng = SplitMix64::new(700 + p as u64 * 10 + k as u64);
            for l in [4usize, 6] {
                for s in [0usize, 1, 2] {
                    let space = if hermitian {
                        block_hermitian(&f, l, s, &mut rng)
                    } else {
                        block_quadratic(&f, l, s, &mut rng)
                    };
                    let g = random_isometry(&space, 6, &mut rng).unwrap();
                    let h = witt_extend(&space, s, &g).unwrap();
                    let l_space = space.restrict(&Matrix::identity(&f, l + s).block(0, 0, l, l + s)).unwrap();
                    assert!(l_space.is_isometry(&h));
                    let defect = Matrix::from_fn(&f, l, l + s, |i, j| {
                        let hij = if j < l { h.get(i, j) } else { f.zero() };
                        f.sub(g.get(i, j), hij)
                    });
                    assert!(defect.rank() <= 3 * s);
                }
            }
        }
        // Characteristic 2 with even blocks only.
        let f = gf(2, 1);
        let mut rng = SplitMix64::new(720);
        for s in [0usize, 2] {
            let space = block_quadratic(&f, 6, s, &mut rng);
            let g = random_isometry(&space, 6, &mut rng).unwrap();
            let h = witt_extend(&space, s, &g).unwrap();
            let defect = Matrix::from_fn(&f, 6, 6 + s, |i, j| {
                let hij = if j < 6 { h.get(i, j) } else { f.zero() };
                f.sub(g.get(i, j), hij)
            });
            assert!(defect.rank() <= 3 * s);
        }
    }

    #[test]
    fn random_isometry_preserves_form() {
        let f = gf(2, 1);
        let mut rng = SplitMix64::new(81);
        for dim in [2usize, 4, 6] {
            let space = random_quadratic_space(&f, dim, &mut rng).unwrap();
            let g = random_isometry(&space, 7, &mut rng).unwrap();
            assert!(space.is_isometry(&g));
        }
        let f9 = gf(3, 2);
        let mut rng9 = SplitMix64::new(82);
        for dim in [2usize, 3, 5] {
            let space = random_hermitian_space(&f9, dim, &mut rng9).unwrap();
            let g = random_isometry(&space, 7, &mut rng9).unwrap();
            assert!(space.is_isometry(&g));
        }
    }

    #[test]
    fn restrict_matches_values() {
        let f = gf(3, 1);
        let mut rng = SplitMix64::new(91);
        let space = random_quadratic_space(&f, 5, &mut rng).unwrap();
        let basis = random_subspace(&f, 5, 3, &mut rng);
        let sub = space.restrict(&basis).unwrap();
        for _ in 0..20 {
            let coeffs: Vec<FieldElement> =
                (0..3).map(|_| f.element(rng.below(3) as u32)).collect();
            let lifted = basis.row_vec_mul(&coeffs);
            assert_eq!(sub.quadratic_value(&coeffs), space.quadratic_value(&lifted));
            let coeffs2: Vec<FieldElement> =
                (0..3).map(|_| f.element(rng.below(3) as u32)).collect();
            let lifted2 = basis.row_vec_mul(&coeffs2);
            assert_eq!(
                sub.evaluate(&coeffs, &coeffs2),
                space.evaluate(&lifted, &lifted2)
            );
        }
    }
}
