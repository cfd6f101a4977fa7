//! Block models of the symplectic, unitary, and split orthogonal groups:
//! 2n x 2n elements kept as four n x n blocks, exact membership tests,
//! constructive factorizations into unipotent block triangles and a block
//! diagonal part, and geodesic point constructions inside the unipotent and
//! block diagonal subgroups.
//!
//! Written multiplicatively on blocks: (a b; c d). The conjugation used in
//! the block equations is the field involution for the unitary tag and the
//! identity for the other two tags.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::sign::Signed;
use num_traits::One;
use num_traits::Zero;

use crate::field_core::{FieldElement, FieldSpec, Matrix};
use crate::forms::{
    anti_hermitian_congruence_normal_form, skew_congruence_normal_form,
    symmetric_congruence_normal_form,
};
use crate::linear_split::{normalize_by_e, split_sl, EMatrix};
use crate::rng::SplitMix64;
use crate::{Error, Rational};

/// Which block group an element claims to live in.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GroupTag {
    Sp,
    SU,
    OmegaPlusShape,
}

impl GroupTag {
    /// The unitary tag conjugates with the field involution; the other two
    /// use the identity.
    pub fn uses_involution(self) -> bool {
        matches!(self, GroupTag::SU)
    }
}

/// A 2n x 2n group element stored as four n x n blocks (a b; c d).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BlockElement {
    tag: GroupTag,
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
}

impl BlockElement {
    pub fn new(
        tag: GroupTag,
        a: Matrix,
        b: Matrix,
        c: Matrix,
        d: Matrix,
    ) -> Result<BlockElement, Error> {
        let n = a.rows();
        for m in [&a, &b, &c, &d] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::ShapeMismatch);
            }
            if m.field() != a.field() {
                return Err(Error::FieldMismatch);
            }
        }
        if n == 0 {
            return Err(Error::ShapeMismatch);
        }
        if tag.uses_involution() && !a.field().involution_enabled() {
            return Err(Error::NoInvolution);
        }
        Ok(BlockElement { tag, a, b, c, d })
    }

    /// Splits a 2n x 2n matrix into blocks.
    pub fn from_matrix(tag: GroupTag, m: &Matrix) -> Result<BlockElement, Error> {
        if !m.is_square() || m.rows() % 2 != 0 {
            return Err(Error::ShapeMismatch);
        }
        let n = m.rows() / 2;
        BlockElement::new(
            tag,
            m.block(0, 0, n, n),
            m.block(0, n, n, n),
            m.block(n, 0, n, n),
            m.block(n, n, n, n),
        )
    }

    pub fn identity(tag: GroupTag, field: &FieldSpec, n: usize) -> Result<BlockElement, Error> {
        BlockElement::new(
            tag,
            Matrix::identity(field, n),
            Matrix::zero(field, n, n),
            Matrix::zero(field, n, n),
            Matrix::identity(field, n),
        )
    }

    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    pub fn field(&self) -> &FieldSpec {
        self.a.field()
    }

    /// Half the ambient dimension: the block size n.
    pub fn half_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn blocks(&self) -> (&Matrix, &Matrix, &Matrix, &Matrix) {
        (&self.a, &self.b, &self.c, &self.d)
    }

    /// The full 2n x 2n matrix.
    pub fn matrix(&self) -> Matrix {
        Matrix::from_blocks_2x2(&self.a, &self.b, &self.c, &self.d)
    }

    /// Conjugate transpose under this element's group conjugation.
    fn conj_t(&self, m: &Matrix) -> Matrix {
        if self.tag.uses_involution() {
            m.conj_transpose()
        } else {
            m.transpose()
        }
    }

    pub fn mul(&self, other: &BlockElement) -> Result<BlockElement, Error> {
        if self.tag != other.tag {
            return Err(Error::InvalidPayload);
        }
        if self.half_dim() != other.half_dim() {
            return Err(Error::ShapeMismatch);
        }
        if self.field() != other.field() {
            return Err(Error::FieldMismatch);
        }
        BlockElement::new(
            self.tag,
            self.a.mul(&other.a).add(&self.b.mul(&other.c)),
            self.a.mul(&other.b).add(&self.b.mul(&other.d)),
            self.c.mul(&other.a).add(&self.d.mul(&other.c)),
            self.c.mul(&other.b).add(&self.d.mul(&other.d)),
        )
    }

    pub fn inverse(&self) -> Result<BlockElement, Error> {
        BlockElement::from_matrix(self.tag, &self.matrix().inverse()?)
    }

    pub fn transpose(&self) -> BlockElement {
        BlockElement {
            tag: self.tag,
            a: self.a.transpose(),
            b: self.c.transpose(),
            c: self.b.transpose(),
            d: self.d.transpose(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_identity() && self.b.is_zero() && self.c.is_zero() && self.d.is_identity()
    }
}

/// Exact membership test for the element's claimed group: the defining
/// block equations plus determinant one.
pub fn membership(g: &BlockElement) -> bool {
    let f = g.field().clone();
    let n = g.half_dim();
    let one = Matrix::identity(&f, n);
    let ct = |m: &Matrix| g.conj_t(m);
    let ok = match g.tag {
        GroupTag::Sp => {
            let adt = g.a.mul(&g.d.transpose()).sub(&g.b.mul(&g.c.transpose()));
            let abt = g.a.mul(&g.b.transpose());
            let cdt = g.c.mul(&g.d.transpose());
            adt == one && abt == abt.transpose() && cdt == cdt.transpose()
        }
        _ => {
            let e1 = g.a.mul(&ct(&g.d)).add(&g.b.mul(&ct(&g.c)));
            let e2 = g.a.mul(&ct(&g.b)).add(&g.b.mul(&ct(&g.a)));
            let e3 = g.c.mul(&ct(&g.d)).add(&g.d.mul(&ct(&g.c)));
            e1 == one && e2.is_zero() && e3.is_zero()
        }
    };
    ok && g.matrix().det() == f.one()
}

/// Tags of the factor subgroups appearing in the factorizations.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FactorTag {
    /// Upper unipotent block (1 k; 0 1) with k symmetric.
    U,
    /// Lower unipotent block (1 0; k 1) with k symmetric.
    UT,
    /// Upper unipotent block with conj(k)^T = -k.
    V,
    /// Lower unipotent block with conj(k)^T = -k.
    VT,
    /// Block diagonal (a^-1 0; 0 conj(a)^T) with a invertible.
    H,
    /// Block pair of the determinant-one diagonals for lambda^-1 and
    /// conj(lambda).
    E,
    /// H-shape whose a-part has every eigenspace within 2 of the fixed
    /// space: dim ker(a - lambda) <= dim ker(a - 1) + 2 for lambda != 0.
    Y,
}

/// Payload of a factor: the defining matrix, or the scalar for the E tag.
#[derive(Clone, Debug)]
pub enum FactorPayload {
    Matrix(Matrix),
    Lambda {
        field: FieldSpec,
        lambda: FieldElement,
        n: usize,
    },
}

/// One factor of a factorization: a tag, the group context fixing the
/// conjugation, and the defining payload.
#[derive(Clone, Debug)]
pub struct SubgroupFactor {
    group: GroupTag,
    tag: FactorTag,
    payload: FactorPayload,
}

fn conj_of(group: GroupTag, m: &Matrix) -> Matrix {
    if group.uses_involution() {
        m.conj_transpose()
    } else {
        m.transpose()
    }
}

fn eigenspace_dim(a: &Matrix, lambda: FieldElement) -> usize {
    a.rows() - a.sub_scalar(lambda).rank()
}

impl SubgroupFactor {
    /// Unipotent factor with tag U, UT, V, or VT.
    pub fn unipotent(group: GroupTag, tag: FactorTag, k: Matrix) -> Result<SubgroupFactor, Error> {
        match tag {
            FactorTag::U | FactorTag::UT | FactorTag::V | FactorTag::VT => {}
            _ => return Err(Error::InvalidPayload),
        }
        if !k.is_square() || k.rows() == 0 {
            return Err(Error::ShapeMismatch);
        }
        if group.uses_involution() && !k.field().involution_enabled() {
            return Err(Error::NoInvolution);
        }
        let ok = match tag {
            FactorTag::U | FactorTag::UT => k == k.transpose(),
            _ => conj_of(group, &k) == k.neg(),
        };
        if !ok {
            return Err(Error::InvalidPayload);
        }
        Ok(SubgroupFactor {
            group,
            tag,
            payload: FactorPayload::Matrix(k),
        })
    }

    /// Block diagonal factor with tag H or Y; the payload is the a-part.
    pub fn block_diagonal(
        group: GroupTag,
        tag: FactorTag,
        a: Matrix,
    ) -> Result<SubgroupFactor, Error> {
        match tag {
            FactorTag::H | FactorTag::Y => {}
            _ => return Err(Error::InvalidPayload),
        }
        if !a.is_square() || a.rows() == 0 {
            return Err(Error::ShapeMismatch);
        }
        if group.uses_involution() && !a.field().involution_enabled() {
            return Err(Error::NoInvolution);
        }
        if !a.is_invertible() {
            return Err(Error::SingularMatrix);
        }
        if tag == FactorTag::Y {
            let f = a.field().clone();
            let fixed = eigenspace_dim(&a, f.one());
            for lam in f.nonzero_elements() {
                if eigenspace_dim(&a, lam) > fixed + 2 {
                    return Err(Error::InvalidPayload);
                }
            }
        }
        Ok(SubgroupFactor {
            group,
            tag,
            payload: FactorPayload::Matrix(a),
        })
    }

    /// Scaling factor with tag E.
    pub fn scaling(
        group: GroupTag,
        field: &FieldSpec,
        lambda: FieldElement,
        n: usize,
    ) -> Result<SubgroupFactor, Error> {
        if lambda == field.zero() {
            return Err(Error::ZeroLambda);
        }
        if n == 0 {
            return Err(Error::ShapeMismatch);
        }
        if group.uses_involution() && !field.involution_enabled() {
            return Err(Error::NoInvolution);
        }
        Ok(SubgroupFactor {
            group,
            tag: FactorTag::E,
            payload: FactorPayload::Lambda {
                field: field.clone(),
                lambda,
                n,
            },
        })
    }

    pub fn group(&self) -> GroupTag {
        self.group
    }

    pub fn tag(&self) -> FactorTag {
        self.tag
    }

    pub fn payload(&self) -> &FactorPayload {
        &self.payload
    }

    pub fn field(&self) -> &FieldSpec {
        match &self.payload {
            FactorPayload::Matrix(m) => m.field(),
            FactorPayload::Lambda { field, .. } => field,
        }
    }

    pub fn half_dim(&self) -> usize {
        match &self.payload {
            FactorPayload::Matrix(m) => m.rows(),
            FactorPayload::Lambda { n, .. } => *n,
        }
    }

    /// The block element this factor defines.
    pub fn embed(&self) -> BlockElement {
        let f = self.field().clone();
        let n = self.half_dim();
        let one = Matrix::identity(&f, n);
        let zero = Matrix::zero(&f, n, n);
        match (&self.payload, self.tag) {
            (FactorPayload::Matrix(k), FactorTag::U | FactorTag::V) => {
                BlockElement::new(self.group, one.clone(), k.clone(), zero, one)
                    .expect("validated payload")
            }
            (FactorPayload::Matrix(k), FactorTag::UT | FactorTag::VT) => {
                BlockElement::new(self.group, one.clone(), zero, k.clone(), one)
                    .expect("validated payload")
            }
            (FactorPayload::Matrix(a), _) => {
                let inv = a.inverse().expect("validated payload");
                let lower = conj_of(self.group, a);
                BlockElement::new(self.group, inv, zero.clone(), zero, lower)
                    .expect("validated payload")
            }
            (
                FactorPayload::Lambda { lambda, n, .. },
                _,
            ) => {
                let top = EMatrix::new(&f, f.inv(*lambda).expect("nonzero lambda"), *n)
                    .expect("validated payload")
                    .matrix();
                let low_lambda = if self.group.uses_involution() {
                    f.involution(*lambda)
                } else {
                    *lambda
                };
                let low = EMatrix::new(&f, low_lambda, *n)
                    .expect("validated payload")
                    .matrix();
                BlockElement::new(self.group, top, zero.clone(), zero, low)
                    .expect("validated payload")
            }
        }
    }
}

/// Brings a to diag(1_r, 0) by invertible row and column transforms:
/// returns (y1, y2, r) with y1 a y2 = diag(1_r, 0).
fn rank_normal_form(a: &Matrix) -> Result<(Matrix, Matrix, usize), Error> {
    let f = a.field().clone();
    let n = a.rows();
    let mut work: Vec<Vec<FieldElement>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut left: Vec<Vec<FieldElement>> = (0..n)
        .map(|i| {
            let mut v = vec![f.zero(); n];
            v[i] = f.one();
            v
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&i| work[i][col] != f.zero()) else {
            continue;
        };
        work.swap(row, p);
        left.swap(row, p);
        let inv = f.inv(work[row][col])?;
        for j in 0..n {
            work[row][j] = f.mul(work[row][j], inv);
            left[row][j] = f.mul(left[row][j], inv);
        }
        for i in 0..n {
            if i == row || work[i][col] == f.zero() {
                continue;
            }
            let c = work[i][col];
            for j in 0..n {
                work[i][j] = f.sub(work[i][j], f.mul(c, work[row][j]));
                left[i][j] = f.sub(left[i][j], f.mul(c, left[row][j]));
            }
        }
        pivots.push(col);
        row += 1;
    }
    let r = row;
    let y1 = Matrix::from_rows(&f, n, &left);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    // Permute pivot columns to the front, then clear the top-right block.
    let perm = Matrix::from_fn(&f, n, n, |i, j| {
        let src = if j < r { pivots[j] } else { free[j - r] };
        if i == src {
            f.one()
        } else {
            f.zero()
        }
    });
    let shear = Matrix::from_fn(&f, n, n, |i, j| {
        if i == j {
            f.one()
        } else if i < r && j >= r {
            f.neg(work[i][free[j - r]])
        } else {
            f.zero()
        }
    });
    let y2 = perm.mul(&shear);
    debug_assert!({
        let res = y1.mul(a).mul(&y2);
        (0..n).all(|i| {
            (0..n).all(|j| {
                let want = if i == j && i < r { f.one() } else { f.zero() };
                res.get(i, j) == want
            })
        })
    });
    Ok((y1, y2, r))
}

/// H-shape block element whose a-block is the given matrix.
fn h_with_a_block(tag: GroupTag, a_block: &Matrix) -> Result<BlockElement, Error> {
    let f = a_block.field().clone();
    let n = a_block.rows();
    // The lower block for a-part alpha is conj(alpha)^T with alpha = a_block^-1.
    let alpha = a_block.inverse()?;
    let lower = if tag.uses_involution() {
        alpha.conj_transpose()
    } else {
        alpha.transpose()
    };
    BlockElement::new(
        tag,
        a_block.clone(),
        Matrix::zero(&f, n, n),
        Matrix::zero(&f, n, n),
        lower,
    )
}

/// Extracts the H payload a from a block diagonal element (a^-1 0; 0 conj(a)^T).
fn h_payload(g: &BlockElement) -> Result<Matrix, Error> {
    if !g.b.is_zero() || !g.c.is_zero() {
        return Err(Error::ResidualShape);
    }
    let a = g.a.inverse()?;
    if g.conj_t(&a) != g.d {
        return Err(Error::ResidualShape);
    }
    Ok(a)
}

/// Factors a symplectic block element as u1 u2 u3 h with u1, u3 lower
/// unipotent, u2 upper unipotent (all with symmetric payloads), and h block
/// diagonal. The reconstruction and every factor invariant are re-verified.
pub fn factor_symplectic(
    g: &BlockElement,
) -> Result<(SubgroupFactor, SubgroupFactor, SubgroupFactor, SubgroupFactor), Error> {
    if g.tag != GroupTag::Sp || !membership(g) {
        return Err(Error::NotInGroup);
    }
    let f = g.field().clone();
    let n = g.half_dim();
    let (y1, y2, r) = rank_normal_form(&g.a)?;
    let x1 = h_with_a_block(GroupTag::Sp, &y1)?;
    let x2 = h_with_a_block(GroupTag::Sp, &y2)?;
    let g1 = x1.mul(g)?.mul(&x2)?;
    // b-block of g1 is (P Q; 0 S) with S invertible.
    let k3 = Matrix::from_fn(&f, n, n, |i, j| {
        if i == j && i >= r {
            f.one()
        } else {
            f.zero()
        }
    });
    let x3 = SubgroupFactor::unipotent(GroupTag::Sp, FactorTag::UT, k3)?.embed();
    let g2 = g1.mul(&x3)?;
    let a2_inv = g2.a.inverse().map_err(|_| Error::NotInGroup)?;
    let x1b = h_with_a_block(GroupTag::Sp, &a2_inv)?.mul(&x1)?;
    let w = h_with_a_block(GroupTag::Sp, &a2_inv)?.mul(&g2)?;
    let x4 = SubgroupFactor::unipotent(GroupTag::Sp, FactorTag::U, w.b.neg())?.embed();
    let res = w.mul(&x4)?;
    if !res.a.is_identity() || !res.b.is_zero() || !res.d.is_identity() {
        return Err(Error::ResidualShape);
    }
    // g = x1b^-1 res x4^-1 x3^-1 x2^-1; conjugating the unipotent part by
    // x1b^-1 moves both diagonal factors to the right.
    let h1 = x1b.inverse()?;
    let h1i = x1b;
    let u1 = h1.mul(&res)?.mul(&h1i)?;
    let u2 = h1.mul(&x4.inverse()?)?.mul(&h1i)?;
    let u3 = h1.mul(&x3.inverse()?)?.mul(&h1i)?;
    let h = h1.mul(&x2.inverse()?)?;
    let f1 = SubgroupFactor::unipotent(GroupTag::Sp, FactorTag::UT, u1.c.clone())?;
    let f2 = SubgroupFactor::unipotent(GroupTag::Sp, FactorTag::U, u2.b.clone())?;
    let f3 = SubgroupFactor::unipotent(GroupTag::Sp, FactorTag::UT, u3.c.clone())?;
    let fh = SubgroupFactor::block_diagonal(GroupTag::Sp, FactorTag::H, h_payload(&h)?)?;
    let back = f1
        .embed()
        .mul(&f2.embed())?
        .mul(&f3.embed())?
        .mul(&fh.embed())?;
    if back != *g {
        return Err(Error::BoundViolation);
    }
    Ok((f1, f2, f3, fh))
}

/// Anti-hermitian square matrix of size m whose rank is m, except that the
/// combination (m odd, characteristic != 2, identity conjugation) only
/// admits rank m - 1. Block diagonal: floor(m/2) blocks ((0,1),(-1,0)),
/// then one diagonal entry lambda with conj(lambda) = -lambda when m is odd
/// (lambda = 1 in characteristic 2, an anti-fixed scalar when the
/// conjugation is a genuine involution, 0 otherwise).
fn build_k1_with(m: usize, field: &FieldSpec, use_involution: bool) -> Matrix {
    let f = field.clone();
    let mut rows = vec![vec![f.zero(); m]; m];
    let pairs = m / 2;
    for p in 0..pairs {
        rows[2 * p][2 * p + 1] = f.one();
        rows[2 * p + 1][2 * p] = f.neg(f.one());
    }
    if m % 2 == 1 {
        let lambda = if f.characteristic() == 2 {
            f.one()
        } else if use_involution && f.involution_enabled() {
            f.nonzero_elements()
                .find(|&x| f.involution(x) == f.neg(x))
                .unwrap_or(f.zero())
        } else {
            f.zero()
        };
        rows[m - 1][m - 1] = lambda;
    }
    Matrix::from_rows(&f, m, &rows)
}

/// As the factorization's auxiliary matrix: anti-hermitian under the field's
/// own conjugation (the involution when the field has one, transposition
/// otherwise) with the stated rank.
pub fn build_k1(m: usize, field: &FieldSpec) -> Matrix {
    build_k1_with(m, field, field.involution_enabled())
}

/// Factors a unitary or orthogonal-shape block element as v1 v2 v3 h with
/// v1, v3 upper unipotent, v2 lower unipotent (anti-hermitian payloads),
/// and h block diagonal with determinant one. The core row reduction runs
/// on the inverse transpose so that the residual factor lands in the first
/// slot; reconstruction and all invariants are re-verified.
pub fn factor_isometry_block(
    g: &BlockElement,
) -> Result<(SubgroupFactor, SubgroupFactor, SubgroupFactor, SubgroupFactor), Error> {
    let tag = g.tag;
    if tag == GroupTag::Sp || !membership(g) {
        return Err(Error::NotInGroup);
    }
    if tag == GroupTag::OmegaPlusShape && g.half_dim() < 3 {
        return Err(Error::ShapeMismatch);
    }
    let f = g.field().clone();
    let n = g.half_dim();
    let ghat = g.inverse()?.transpose();
    let (y1, y2, r) = rank_normal_form(&ghat.a)?;
    let x1 = h_with_a_block(tag, &y1)?;
    let x2 = h_with_a_block(tag, &y2)?;
    let g1 = x1.mul(&ghat)?.mul(&x2)?;
    // b-block of g1 is (P Q; 0 S) with S invertible; normalize to (P 0; 0 1).
    let s = g1.b.block(r, r, n - r, n - r);
    let q = g1.b.block(0, r, r, n - r);
    let s_inv = s.inverse().map_err(|_| Error::NotInGroup)?;
    let qs = q.mul(&s_inv);
    let fix = Matrix::from_fn(&f, n, n, |i, j| {
        if i < r && j < r {
            if i == j {
                f.one()
            } else {
                f.zero()
            }
        } else if i < r {
            f.neg(qs.get(i, j - r))
        } else if j >= r {
            s_inv.get(i - r, j - r)
        } else {
            f.zero()
        }
    });
    let x1c = h_with_a_block(tag, &fix)?.mul(&x1)?;
    let g1b = h_with_a_block(tag, &fix)?.mul(&g1)?;
    let k1 = build_k1_with(n - r, &f, tag.uses_involution());
    let k3 = Matrix::from_fn(&f, n, n, |i, j| {
        if i >= r && j >= r {
            k1.get(i - r, j - r)
        } else {
            f.zero()
        }
    });
    let x3 = SubgroupFactor::unipotent(tag, FactorTag::VT, k3)?.embed();
    let g2 = g1b.mul(&x3)?;
    let a2_inv = g2.a.inverse().map_err(|_| Error::ImpossibleCase)?;
    let x1d = h_with_a_block(tag, &a2_inv)?.mul(&x1c)?;
    let w = h_with_a_block(tag, &a2_inv)?.mul(&g2)?;
    let x4 = SubgroupFactor::unipotent(tag, FactorTag::V, w.b.neg())?.embed();
    let res = w.mul(&x4)?;
    if !res.a.is_identity() || !res.b.is_zero() || !res.d.is_identity() {
        return Err(Error::ResidualShape);
    }
    // ghat = x1d^-1 res x4^-1 x3^-1 x2^-1, so transposing the inverse gives
    // g = x1d^T res^-T x4^T x3^T x2^T; conjugating by x1d^T yields the
    // upper-lower-upper pattern with the diagonal part on the right.
    let a_conj = BlockElement::from_matrix(tag, &x1d.matrix().transpose())?;
    let a_inv = a_conj.inverse()?;
    let res_it = res.inverse()?.transpose();
    let v1 = a_conj.mul(&res_it)?.mul(&a_inv)?;
    let v2 = a_conj
        .mul(&BlockElement::from_matrix(tag, &x4.matrix().transpose())?)?
        .mul(&a_inv)?;
    let v3 = a_conj
        .mul(&BlockElement::from_matrix(tag, &x3.matrix().transpose())?)?
        .mul(&a_inv)?;
    let h = a_conj.mul(&BlockElement::from_matrix(tag, &x2.matrix().transpose())?)?;
    let f1 = SubgroupFactor::unipotent(tag, FactorTag::V, v1.b.clone())?;
    let f2 = SubgroupFactor::unipotent(tag, FactorTag::VT, v2.c.clone())?;
    let f3 = SubgroupFactor::unipotent(tag, FactorTag::V, v3.b.clone())?;
    let fh = SubgroupFactor::block_diagonal(tag, FactorTag::H, h_payload(&h)?)?;
    if !membership(&h) {
        return Err(Error::BoundViolation);
    }
    let back = f1
        .embed()
        .mul(&f2.embed())?
        .mul(&f3.embed())?
        .mul(&fh.embed())?;
    if back != *g {
        return Err(Error::BoundViolation);
    }
    Ok((f1, f2, f3, fh))
}

fn rational_in_unit(t: &Rational) -> bool {
    !t.is_negative() && *t <= Rational::one()
}

/// The point at parameter t on the geodesic through a unipotent factor:
/// the payload's congruence normal form is truncated to its first rows and
/// conjugated back. The kept row count is 2 floor((s + s'/2) t) for a
/// symmetric payload with s pair blocks and s' diagonal entries,
/// 2 floor(s t) for an alternating payload, and floor(rk t) for a genuinely
/// anti-hermitian payload; t = 1 returns the factor itself. The rank of
/// (result - 1) always lies within 2 of t rk(u - 1), and result - lambda
/// is invertible for lambda outside {0, 1}.
pub fn unipotent_geodesic_point(u: &SubgroupFactor, t: &Rational) -> Result<BlockElement, Error> {
    let (tag, k) = match (&u.payload, u.tag) {
        (FactorPayload::Matrix(k), FactorTag::U | FactorTag::UT | FactorTag::V | FactorTag::VT) => {
            (u.tag, k)
        }
        _ => return Err(Error::InvalidPayload),
    };
    if !rational_in_unit(t) {
        return Err(Error::InvalidPayload);
    }
    if t.is_one() {
        return Ok(u.embed());
    }
    let f = k.field().clone();
    let n = k.rows();
    let genuine = u.group.uses_involution();
    let symmetric_payload = matches!(tag, FactorTag::U | FactorTag::UT)
        || (!genuine && f.characteristic() == 2);
    let (c, d, kept) = if symmetric_payload {
        let (c, d) = symmetric_congruence_normal_form(k)?;
        let rk = k.rank() as i64;
        // 2 floor((s + s'/2) t) = 2 floor(rk t / 2).
        let kept = 2 * (Rational::from_integer(rk) * t / Rational::from_integer(2))
            .floor()
            .to_integer();
        (c, d, kept as usize)
    } else if !genuine {
        let (c, d) = skew_congruence_normal_form(k)?;
        let s = (k.rank() / 2) as i64;
        let kept = 2 * (Rational::from_integer(s) * t).floor().to_integer();
        (c, d, kept as usize)
    } else {
        let (c, d) = anti_hermitian_congruence_normal_form(k)?;
        let rk = k.rank() as i64;
        let kept = (Rational::from_integer(rk) * t).floor().to_integer();
        (c, d, kept as usize)
    };
    let dt = Matrix::from_fn(&f, n, n, |i, j| {
        if i < kept {
            d.get(i, j)
        } else {
            f.zero()
        }
    });
    let right = if genuine {
        c.conj_transpose()
    } else {
        c.transpose()
    };
    let kt = c.mul(&dt).mul(&right);
    let point = SubgroupFactor::unipotent(u.group, tag, kt)?;
    Ok(point.embed())
}

/// Splits a block diagonal factor as e y with e a scaling factor and y
/// balanced: the a-part of y satisfies the eigenspace condition of the Y
/// tag. Exact: e.embed() y.embed() equals the input's embedding.
pub fn decompose_h(h: &SubgroupFactor) -> Result<(SubgroupFactor, SubgroupFactor), Error> {
    let a = match (&h.payload, h.tag) {
        (FactorPayload::Matrix(a), FactorTag::H) => a,
        _ => return Err(Error::InvalidPayload),
    };
    let f = a.field().clone();
    let block = h.embed();
    if block.matrix().det() != f.one() {
        return Err(Error::NotSpecialLinear);
    }
    // a^T = m z with z balanced, hence a = z^T m and the scaling factor
    // peels off on the left of the embedded block pair.
    let (m, z) = normalize_by_e(&a.transpose())?;
    let e = SubgroupFactor::scaling(h.group, &f, m.lambda, a.rows())?;
    let y = SubgroupFactor::block_diagonal(h.group, FactorTag::Y, z.transpose())?;
    if e.embed().mul(&y.embed())? != block {
        return Err(Error::BoundViolation);
    }
    Ok((e, y))
}

/// Near-midpoint under the plain rank metric: x h where (h, _) splits
/// x^-1 y at scalar one with half the displacement rank as budget.
fn midpoint_rank(x: &Matrix, y: &Matrix) -> Result<Matrix, Error> {
    let g = x.inverse()?.mul(y);
    if g.is_identity() {
        return Ok(x.clone());
    }
    let f = g.field().clone();
    let r = g.sub_scalar(f.one()).rank();
    let (h, _) = split_sl(&g, f.one(), Rational::new(r as i64, 2))?;
    Ok(x.mul(&h))
}

/// The point at the dyadic parameter num / 2^depth on a bisection path from
/// lo to hi, where midpoints are taken under the rank metric.
fn dyadic_point_rank(
    lo: &Matrix,
    hi: &Matrix,
    num: u64,
    depth: usize,
) -> Result<Matrix, Error> {
    if num == 0 {
        return Ok(lo.clone());
    }
    if num == 1u64 << depth {
        return Ok(hi.clone());
    }
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let mut num = num;
    let mut span = 1u64 << depth;
    while span > 1 {
        let mid = midpoint_rank(&lo, &hi)?;
        span /= 2;
        if num >= span {
            lo = mid;
            num -= span;
        } else {
            hi = mid;
        }
        if num == 0 {
            return Ok(lo);
        }
        if num == span {
            return Ok(hi);
        }
    }
    Ok(lo)
}

/// The point at parameter t on the star path through a balanced block
/// diagonal factor. The a-part is conjugated to a shape fixing the
/// eigenspace of one, the moving block is determinant-corrected into the
/// special linear group, a depth-limited dyadic path under the rank metric
/// runs from the identity to it, and the sampled point is conjugated back
/// and embedded as a block pair. The parameter snaps to the nearest
/// multiple of 2^-depth (ties upward); t = 1 returns the factor exactly.
///
/// For snapped parameters t1, t2 with birth depths k1, k2, the projective
/// distance between the two points is at most
/// |t1 - t2| rk(w' - 1) / n + (k1 + k2) 3 / n, where w' is the corrected
/// moving block and n the half dimension.
pub fn star_path_point(
    y: &SubgroupFactor,
    t: &Rational,
    depth: usize,
) -> Result<BlockElement, Error> {
    let a = match (&y.payload, y.tag) {
        (FactorPayload::Matrix(a), FactorTag::Y) => a,
        _ => return Err(Error::InvalidPayload),
    };
    if !rational_in_unit(t) || depth >= 32 {
        return Err(Error::InvalidPayload);
    }
    if t.is_one() {
        return Ok(y.embed());
    }
    let f = a.field().clone();
    let n = a.rows();
    let r = a.sub_scalar(f.one()).rank();
    if r == 0 || t.is_zero() {
        return BlockElement::identity(y.group, &f, n);
    }
    // Columns: a basis of the eigenspace of one, completed by unit vectors.
    let kernel = a.sub_scalar(f.one()).kernel_basis();
    let mut rows_t: Vec<Vec<FieldElement>> = kernel;
    let mut rank_so_far = rows_t.len();
    for i in 0..n {
        if rank_so_far == n {
            break;
        }
        let mut unit = vec![f.zero(); n];
        unit[i] = f.one();
        rows_t.push(unit);
        let cand = Matrix::from_rows(&f, n, &rows_t);
        if cand.rank() == rank_so_far + 1 {
            rank_so_far += 1;
        } else {
            rows_t.pop();
        }
    }
    let p = Matrix::from_rows(&f, n, &rows_t).transpose();
    let p_inv = p.inverse()?;
    let shaped = p_inv.mul(a).mul(&p);
    let w = shaped.block(n - r, n - r, r, r);
    let det_w = w.det();
    let corr = Matrix::from_fn(&f, r, r, |i, j| {
        if i != j {
            f.zero()
        } else if i == 0 {
            f.inv(det_w).expect("moving block is invertible")
        } else {
            f.one()
        }
    });
    let wp = w.mul(&corr);
    // Snap t to the grid, ties upward.
    let scale = Rational::from_integer(1i64 << depth);
    let half = Rational::new(1, 2);
    let num = (*t * scale + half).floor().to_integer() as u64;
    let q = dyadic_point_rank(&Matrix::identity(&f, r), &wp, num, depth)?;
    let lifted = Matrix::from_fn(&f, n, n, |i, j| {
        if i < n - r && j < n - r {
            if i == j {
                f.one()
            } else {
                f.zero()
            }
        } else if i >= n - r && j >= n - r {
            q.get(i - (n - r), j - (n - r))
        } else {
            f.zero()
        }
    });
    let qp = p.mul(&lifted).mul(&p_inv);
    let lower = if y.group.uses_involution() {
        qp.conj_transpose()
    } else {
        qp.transpose()
    };
    BlockElement::new(
        y.group,
        qp.inverse()?,
        Matrix::zero(&f, n, n),
        Matrix::zero(&f, n, n),
        lower,
    )
}

/// Random symmetric matrix.
pub fn random_symmetric_matrix(field: &FieldSpec, n: usize, rng: &mut SplitMix64) -> Matrix {
    let f = field.clone();
    let mut rows = vec![vec![f.zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = f.element(rng.below(f.order() as u64) as u32);
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    Matrix::from_rows(&f, n, &rows)
}

/// Random matrix with conj(k)^T = -k under the given conjugation.
pub fn random_skew_hermitian_matrix(
    field: &FieldSpec,
    n: usize,
    use_involution: bool,
    rng: &mut SplitMix64,
) -> Matrix {
    let f = field.clone();
    if !use_involution && f.characteristic() == 2 {
        // Identity conjugation in characteristic 2: any symmetric matrix.
        return random_symmetric_matrix(field, n, rng);
    }
    let m = Matrix::from_fn(&f, n, n, |_, _| {
        f.element(rng.below(f.order() as u64) as u32)
    });
    let mt = if use_involution {
        m.conj_transpose()
    } else {
        m.transpose()
    };
    m.sub(&mt)
}

/// Random word in the generators of the tagged block group: unipotent
/// blocks on both sides and block diagonal elements with determinant one.
pub fn random_group_word(
    tag: GroupTag,
    field: &FieldSpec,
    n: usize,
    len: usize,
    rng: &mut SplitMix64,
) -> Result<BlockElement, Error> {
    let f = field.clone();
    let mut acc = BlockElement::identity(tag, &f, n)?;
    for _ in 0..len {
        let gen = match rng.below(3) {
            0 | 1 => {
                let upper = rng.below(2) == 0;
                match tag {
                    GroupTag::Sp => {
                        let k = random_symmetric_matrix(&f, n, rng);
                        let ft = if upper { FactorTag::U } else { FactorTag::UT };
                        SubgroupFactor::unipotent(tag, ft, k)?.embed()
                    }
                    _ => {
                        let k =
                            random_skew_hermitian_matrix(&f, n, tag.uses_involution(), rng);
                        let ft = if upper { FactorTag::V } else { FactorTag::VT };
                        SubgroupFactor::unipotent(tag, ft, k)?.embed()
                    }
                }
            }
            _ => {
                let mut a = crate::linear_split::random_gl(&f, n, rng);
                if tag.uses_involution() {
                    // Normalize so the block pair has determinant one.
                    let det = a.det();
                    let inv = f.inv(det).expect("invertible");
                    let fix = Matrix::from_fn(&f, n, n, |i, j| {
                        if i != j {
                            f.zero()
                        } else if i == 0 {
                            inv
                        } else {
                            f.one()
                        }
                    });
                    a = fix.mul(&a);
                }
                SubgroupFactor::block_diagonal(tag, FactorTag::H, a)?.embed()
            }
        };
        acc = acc.mul(&gen)?;
    }
    Ok(acc)
}
