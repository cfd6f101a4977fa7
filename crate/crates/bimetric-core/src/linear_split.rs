//! Rank and projective-rank metrics on matrix groups, and the rank-budgeted
//! factorizations: any g with rk(g - lambda 1) = r factors as g = h k with
//! rk(h - lambda 1) near phi1 and rk(k - 1) near r - phi1 (slack 2 in the
//! general linear case, 3 after determinant correction in the special linear
//! case); any invertible a factors as m x with m in the one-parameter
//! diagonal subgroup and x having near-maximal fixed space among its
//! eigenspaces.
//!
//! Vectors are rows and matrices act on the right throughout.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Signed;

use crate::field_core::{FieldElement, FieldSpec, Matrix};
use crate::poly::Poly;
use crate::rng::SplitMix64;
use crate::{Error, Rational};

/// Attempt cap for the seeded searches for a maximal-orbit vector and a
/// pairing vector; random failure at this depth has negligible probability
/// over any supported field.
const SEARCH_CAP: usize = 256;

/// Seed for the deterministic internal searches.
const SEARCH_SEED: u64 = 0x5D4A_9C0F_0A11_0B5E;

/// rk(x - y)/n.
pub fn rank_distance(x: &Matrix, y: &Matrix) -> Result<Rational, Error> {
    if x.field() != y.field() {
        return Err(Error::FieldMismatch);
    }
    if !x.is_square() || x.rows() != y.rows() || y.rows() != y.cols() || x.rows() == 0 {
        return Err(Error::ShapeMismatch);
    }
    Ok(Rational::new(
        x.sub(y).rank() as i64,
        x.rows() as i64,
    ))
}

/// min over nonzero lambda of rk(x - lambda y)/n; constant on projective
/// classes of x and y.
pub fn projective_rank_distance(x: &Matrix, y: &Matrix) -> Result<Rational, Error> {
    if x.field() != y.field() {
        return Err(Error::FieldMismatch);
    }
    if !x.is_square() || x.rows() != y.rows() || y.rows() != y.cols() || x.rows() == 0 {
        return Err(Error::ShapeMismatch);
    }
    let f = x.field();
    let best = f
        .nonzero_elements()
        .map(|lam| x.sub(&y.scale(lam)).rank())
        .min()
        .expect("field has a nonzero element");
    Ok(Rational::new(best as i64, x.rows() as i64))
}

/// Basis of a g-invariant subspace on which g acts cyclically: row i + 1 is
/// row 0 times (g - 1)^i.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CyclicSummand {
    pub basis: Matrix,
}

impl CyclicSummand {
    pub fn dim(&self) -> usize {
        self.basis.rows()
    }
}

/// Row span with reduction bookkeeping: each stored row is remembered as a
/// combination of the inserted rows, so the first dependence yields the
/// monic annihilator directly.
struct SpanTracker {
    field: FieldSpec,
    rows: Vec<Vec<FieldElement>>,
    pivots: Vec<usize>,
    combos: Vec<Vec<FieldElement>>,
}

impl SpanTracker {
    fn new(field: &FieldSpec) -> SpanTracker {
        SpanTracker {
            field: field.clone(),
            rows: Vec::new(),
            pivots: Vec::new(),
            combos: Vec::new(),
        }
    }

    fn reduce(&self, row: &mut [FieldElement], combo: Option<&mut Vec<FieldElement>>) {
        let f = &self.field;
        let mut combo = combo;
        for (i, er) in self.rows.iter().enumerate() {
            let c = row[self.pivots[i]];
            if c == f.zero() {
                continue;
            }
            for j in 0..row.len() {
                row[j] = f.sub(row[j], f.mul(c, er[j]));
            }
            if let Some(cb) = combo.as_deref_mut() {
                for (j, &e) in self.combos[i].iter().enumerate() {
                    cb[j] = f.sub(cb[j], f.mul(c, e));
                }
            }
        }
    }

    fn contains(&self, row: &[FieldElement]) -> bool {
        let f = &self.field;
        let mut r = row.to_vec();
        self.reduce(&mut r, None);
        r.iter().all(|&e| e == f.zero())
    }

    /// Insert the row v (g-1)^step. On the first dependence returns the
    /// coefficients of a monic polynomial of degree `step` annihilating v.
    fn insert(&mut self, row: &[FieldElement], step: usize) -> Option<Vec<FieldElement>> {
        let f = self.field.clone();
        let mut r = row.to_vec();
        let mut combo = vec![f.zero(); step + 1];
        combo[step] = f.one();
        self.reduce(&mut r, Some(&mut combo));
        match r.iter().position(|&e| e != f.zero()) {
            None => Some(combo),
            Some(p) => {
                let inv = f.inv(r[p]).expect("leading entry is nonzero");
                for e in r.iter_mut() {
                    *e = f.mul(inv, *e);
                }
                for e in combo.iter_mut() {
                    *e = f.mul(inv, *e);
                }
                self.rows.push(r);
                self.pivots.push(p);
                self.combos.push(combo);
                None
            }
        }
    }
}

/// Monic minimal polynomial of the row vector v under y (in powers of y).
fn row_annihilator(y: &Matrix, v: &[FieldElement]) -> Poly {
    let f = y.field();
    let mut tr = SpanTracker::new(f);
    let mut cur = v.to_vec();
    let mut step = 0;
    loop {
        if let Some(coeffs) = tr.insert(&cur, step) {
            return Poly::from_coeffs(f, coeffs);
        }
        cur = y.row_vec_mul(&cur);
        step += 1;
    }
}

/// Minimal polynomial of y on the whole space: lcm of row annihilators of
/// the standard basis, skipping vectors already inside a processed orbit.
fn space_min_poly(y: &Matrix) -> Poly {
    let f = y.field().clone();
    let d = y.rows();
    let mut mu = Poly::one(&f);
    let mut span = SpanTracker::new(&f);
    for i in 0..d {
        let mut e = vec![f.zero(); d];
        e[i] = f.one();
        if span.contains(&e) {
            continue;
        }
        let ann = row_annihilator(y, &e);
        let m = ann.deg().expect("annihilator of a nonzero vector");
        mu = mu.lcm(&ann);
        let mut cur = e;
        for _ in 0..m {
            span.insert(&cur, 0);
            cur = y.row_vec_mul(&cur);
        }
    }
    mu
}

fn random_vector(f: &FieldSpec, d: usize, rng: &mut SplitMix64) -> Vec<FieldElement> {
    loop {
        let v: Vec<FieldElement> = (0..d)
            .map(|_| f.element(rng.below(f.order() as u64) as u32))
            .collect();
        if v.iter().any(|&e| e != f.zero()) {
            return v;
        }
    }
}

/// A vector whose annihilator equals the minimal polynomial: standard basis
/// first, then seeded random vectors.
fn max_order_vector(
    y: &Matrix,
    mu: &Poly,
    rng: &mut SplitMix64,
) -> Result<(Vec<FieldElement>, Poly), Error> {
    let f = y.field().clone();
    let d = y.rows();
    for i in 0..d {
        let mut e = vec![f.zero(); d];
        e[i] = f.one();
        let ann = row_annihilator(y, &e);
        if ann == *mu {
            return Ok((e, ann));
        }
    }
    for _ in 0..SEARCH_CAP {
        let v = random_vector(&f, d, rng);
        let ann = row_annihilator(y, &v);
        if ann == *mu {
            return Ok((v, ann));
        }
    }
    Err(Error::SearchExhausted)
}

fn dot(f: &FieldSpec, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
    let mut acc = f.zero();
    for (x, y) in a.iter().zip(b) {
        acc = f.add(acc, f.mul(*x, *y));
    }
    acc
}

/// Invariant complement of the chain span: find a column w making the
/// pairing (chain_i, y^j w) nondegenerate; the complement is the left
/// annihilator of the column orbit of w.
fn invariant_complement(
    y: &Matrix,
    chain: &[Vec<FieldElement>],
    rng: &mut SplitMix64,
) -> Result<Vec<Vec<FieldElement>>, Error> {
    let f = y.field().clone();
    let d = y.rows();
    let m = chain.len();
    let yt = y.transpose();
    let try_w = |w: Vec<FieldElement>| -> Option<Vec<Vec<FieldElement>>> {
        let mut cols = Vec::with_capacity(m);
        let mut cur = w;
        for _ in 0..m {
            cols.push(cur.clone());
            cur = yt.row_vec_mul(&cur);
        }
        let k = Matrix::from_fn(&f, m, m, |i, j| dot(&f, &chain[i], &cols[j]));
        if !k.is_invertible() {
            return None;
        }
        let n_mat = Matrix::from_fn(&f, d, m, |i, j| cols[j][i]);
        Some(n_mat.left_kernel_basis())
    };
    for i in 0..d {
        let mut w = vec![f.zero(); d];
        w[i] = f.one();
        if let Some(basis) = try_w(w) {
            return Ok(basis);
        }
    }
    for _ in 0..SEARCH_CAP {
        if let Some(basis) = try_w(random_vector(&f, d, rng)) {
            return Ok(basis);
        }
    }
    Err(Error::SearchExhausted)
}

/// Cyclic summand with its annihilator in powers of (g - 1); the companion
/// shape of the local action is read off the annihilator.
struct SummandData {
    basis: Matrix,
    ann: Poly,
}

impl SummandData {
    fn dim(&self) -> usize {
        self.ann.deg().expect("annihilator has positive degree")
    }

    /// Matrix of g on the summand in its chain basis: e_i g = e_i + e_{i+1}
    /// for i < m, and e_m g = e_m - sum a_i e_{i+1} from the annihilator.
    fn local_matrix(&self) -> Matrix {
        let f = self.basis.field();
        let m = self.dim();
        let a = self.ann.coeffs();
        Matrix::from_fn(f, m, m, |i, j| {
            let mut v = if i == j { f.one() } else { f.zero() };
            if i + 1 < m {
                if j == i + 1 {
                    v = f.add(v, f.one());
                }
            } else {
                v = f.sub(v, a[j]);
            }
            v
        })
    }

    /// rk(g - 1) on the summand: m - 1 exactly when 1 is an eigenvalue,
    /// i.e. when the annihilator has zero constant term.
    fn unit_rank(&self) -> usize {
        let f = self.basis.field();
        let m = self.dim();
        if self.ann.coeffs()[0] == f.zero() {
            m - 1
        } else {
            m
        }
    }
}

/// Split the space into g-invariant cyclic summands by repeatedly peeling
/// the orbit of a maximal-order vector and passing to an invariant
/// complement.
fn decompose(g: &Matrix) -> Result<Vec<SummandData>, Error> {
    let f = g.field().clone();
    let n = g.rows();
    let mut rng = SplitMix64::new(SEARCH_SEED);
    let mut space = Matrix::identity(&f, n);
    let mut local_g = g.clone();
    let mut out = Vec::new();
    while space.rows() > 0 {
        let d = space.rows();
        let y = local_g.sub(&Matrix::identity(&f, d));
        let mu = space_min_poly(&y);
        let (v, ann) = max_order_vector(&y, &mu, &mut rng)?;
        let m = ann.deg().expect("nonzero vector");
        let mut chain = Vec::with_capacity(m);
        let mut cur = v;
        for _ in 0..m {
            chain.push(cur.clone());
            cur = y.row_vec_mul(&cur);
        }
        let chain_m = Matrix::from_rows(&f, d, &chain);
        out.push(SummandData {
            basis: chain_m.mul(&space),
            ann,
        });
        if m == d {
            break;
        }
        let w_rows = invariant_complement(&y, &chain, &mut rng)?;
        let wb = Matrix::from_rows(&f, d, &w_rows);
        let img = wb.mul(&local_g);
        let wbt = wb.transpose();
        let mut rows_new = Vec::with_capacity(wb.rows());
        for i in 0..wb.rows() {
            let x = wbt
                .solve_right(img.row(i))
                .ok_or(Error::SearchExhausted)?;
            rows_new.push(x);
        }
        local_g = Matrix::from_rows(&f, wb.rows(), &rows_new);
        space = wb.mul(&space);
    }
    Ok(out)
}

/// Invariant cyclic-summand decomposition of the space under g. The bases
/// concatenate to a basis of the full space.
pub fn cyclic_decomposition(g: &Matrix) -> Result<Vec<CyclicSummand>, Error> {
    if !g.is_square() || g.rows() == 0 {
        return Err(Error::ShapeMismatch);
    }
    if !g.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    Ok(decompose(g)?
        .into_iter()
        .map(|s| CyclicSummand { basis: s.basis })
        .collect())
}

/// Factor pair for one cyclic block with budgets phi1 + phi2 = rk(G - 1):
/// the chain-shift map of rank s + 1 and its cofactor, where s is phi1
/// rounded up.
fn cyclic_base(data: &SummandData, phi1: &Rational) -> (Matrix, Matrix) {
    let f = data.basis.field().clone();
    let m = data.dim();
    let g_local = data.local_matrix();
    let s = phi1.ceil().to_integer() as usize;
    if s >= m {
        return (g_local, Matrix::identity(&f, m));
    }
    if s == 0 {
        return (Matrix::identity(&f, m), g_local);
    }
    // e_i -> e_i + e_{i+1} for i <= s, e_{s+1} -> e_1, identity beyond.
    let h = Matrix::from_fn(&f, m, m, |i, j| {
        if i < s {
            if j == i || j == i + 1 {
                f.one()
            } else {
                f.zero()
            }
        } else if i == s {
            if j == 0 {
                f.one()
            } else {
                f.zero()
            }
        } else if i == j {
            f.one()
        } else {
            f.zero()
        }
    });
    let k = h
        .inverse()
        .expect("shift map is invertible")
        .mul(&g_local);
    (h, k)
}

/// Core split at lambda = 1: distribute cyclic summands to the two factors
/// by budget, with at most one summand split internally.
fn split_unit(g: &Matrix, phi1: Rational) -> Result<(Matrix, Matrix), Error> {
    let f = g.field().clone();
    let summands = decompose(g)?;
    let p = summands.len();
    // 1 = wholly h side, 2 = wholly k side, 3 = split internally.
    let mut assign = vec![1u8; p];
    let mut base_budget = None;
    let mut b1 = phi1;
    for i in 0..p {
        let rho = Rational::from_integer(summands[i].unit_rank() as i64);
        if rho <= b1 {
            b1 -= rho;
        } else {
            assign[i] = 3;
            for a in assign.iter_mut().skip(i + 1) {
                *a = 2;
            }
            base_budget = Some(b1);
            break;
        }
    }
    let mut h_blocks: Vec<Matrix> = Vec::with_capacity(p);
    let mut k_blocks: Vec<Matrix> = Vec::with_capacity(p);
    for (i, data) in summands.iter().enumerate() {
        let m = data.dim();
        let (hb, kb) = match assign[i] {
            1 => (data.local_matrix(), Matrix::identity(&f, m)),
            2 => (Matrix::identity(&f, m), data.local_matrix()),
            _ => cyclic_base(data, base_budget.as_ref().expect("budget set at split")),
        };
        h_blocks.push(hb);
        k_blocks.push(kb);
    }
    let fold = |blocks: Vec<Matrix>| {
        let mut it = blocks.into_iter();
        let first = it.next().expect("at least one summand");
        it.fold(first, |acc, b| Matrix::block_diag(&acc, &b))
    };
    let t = {
        let mut rows: Vec<Vec<FieldElement>> = Vec::with_capacity(g.rows());
        for s in &summands {
            for i in 0..s.basis.rows() {
                rows.push(s.basis.row(i).to_vec());
            }
        }
        Matrix::from_rows(&f, g.rows(), &rows)
    };
    let ti = t.inverse().expect("summand bases span the space");
    let h = ti.mul(&fold(h_blocks)).mul(&t);
    let k = ti.mul(&fold(k_blocks)).mul(&t);
    Ok((h, k))
}

fn check_range(phi1: &Rational, r: usize) -> Result<(), Error> {
    if *phi1 < Rational::from_integer(0) || *phi1 > Rational::from_integer(r as i64) {
        return Err(Error::PhiOutOfRange);
    }
    Ok(())
}

fn slack(rank: usize, target: &Rational) -> Rational {
    (Rational::from_integer(rank as i64) - target).abs()
}

/// Factor g = h k with |rk(h - lambda 1) - phi1| <= 2 and
/// |rk(k - 1) - (r - phi1)| <= 2, where r = rk(g - lambda 1).
pub fn split_gl(
    g: &Matrix,
    lambda: FieldElement,
    phi1: Rational,
) -> Result<(Matrix, Matrix), Error> {
    let f = g.field().clone();
    if !g.is_square() || g.rows() == 0 {
        return Err(Error::ShapeMismatch);
    }
    if lambda == f.zero() {
        return Err(Error::ZeroLambda);
    }
    if !g.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    let r = g.sub_scalar(lambda).rank();
    check_range(&phi1, r)?;
    let phi2 = Rational::from_integer(r as i64) - phi1;
    let g1 = g.scale(f.inv(lambda)?);
    let (h1, k) = split_unit(&g1, phi1)?;
    let h = h1.scale(lambda);
    let two = Rational::from_integer(2);
    let ok = h.mul(&k) == *g
        && slack(h.sub_scalar(lambda).rank(), &phi1) <= two
        && slack(k.sub_scalar(f.one()).rank(), &phi2) <= two;
    if !ok {
        return Err(Error::BoundViolation);
    }
    Ok((h, k))
}

/// As split_gl but inside the special linear group: a diagonal determinant
/// correction moves each factor by rank at most 1, giving slack 3.
pub fn split_sl(
    g: &Matrix,
    lambda: FieldElement,
    phi1: Rational,
) -> Result<(Matrix, Matrix), Error> {
    let f = g.field().clone();
    if !g.is_square() || g.rows() == 0 {
        return Err(Error::ShapeMismatch);
    }
    if g.det() != f.one() {
        return Err(Error::NotSpecialLinear);
    }
    let (hp, kp) = split_gl(g, lambda, phi1)?;
    let n = g.rows();
    let det_k = kp.det();
    let mut d_entries = vec![f.one(); n];
    d_entries[0] = det_k;
    let d = Matrix::diag(&f, &d_entries);
    d_entries[0] = f.inv(det_k)?;
    let d_inv = Matrix::diag(&f, &d_entries);
    let h = hp.mul(&d);
    let k = d_inv.mul(&kp);
    let r = g.sub_scalar(lambda).rank();
    let phi2 = Rational::from_integer(r as i64) - phi1;
    let three = Rational::from_integer(3);
    let ok = h.det() == f.one()
        && k.det() == f.one()
        && h.mul(&k) == *g
        && slack(h.sub_scalar(lambda).rank(), &phi1) <= three
        && slack(k.sub_scalar(f.one()).rank(), &phi2) <= three;
    if !ok {
        return Err(Error::BoundViolation);
    }
    Ok((h, k))
}

/// The determinant-one diagonal matrix with first entry lambda^-(n-1) and
/// remaining entries lambda.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EMatrix {
    field: FieldSpec,
    pub lambda: FieldElement,
    pub n: usize,
}

impl EMatrix {
    pub fn new(field: &FieldSpec, lambda: FieldElement, n: usize) -> Result<EMatrix, Error> {
        if lambda == field.zero() {
            return Err(Error::ZeroLambda);
        }
        if n == 0 {
            return Err(Error::ShapeMismatch);
        }
        Ok(EMatrix {
            field: field.clone(),
            lambda,
            n,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn matrix(&self) -> Matrix {
        let f = &self.field;
        let inv = f.inv(self.lambda).expect("lambda is nonzero");
        let mut entries = vec![self.lambda; self.n];
        entries[0] = f.pow(inv, self.n as u64 - 1);
        Matrix::diag(f, &entries)
    }

    pub fn inverse(&self) -> EMatrix {
        EMatrix {
            field: self.field.clone(),
            lambda: self.field.inv(self.lambda).expect("lambda is nonzero"),
            n: self.n,
        }
    }
}

fn kernel_dim(a: &Matrix, lambda: FieldElement) -> usize {
    a.rows() - a.sub_scalar(lambda).rank()
}

/// Factor a = m x with m in the diagonal one-parameter subgroup and x
/// balanced: for every nonzero lambda,
/// dim ker(x - lambda 1) <= dim ker(x - 1) + 2.
pub fn normalize_by_e(a: &Matrix) -> Result<(EMatrix, Matrix), Error> {
    let f = a.field().clone();
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::ShapeMismatch);
    }
    if !a.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    let n = a.rows();
    // Largest eigenspace wins; ties go to the earliest lambda in the fixed
    // field enumeration.
    let mut best = None;
    for lam in f.nonzero_elements() {
        let s = kernel_dim(a, lam);
        let better = match best {
            None => true,
            Some((_, bs)) => s > bs,
        };
        if better {
            best = Some((lam, s));
        }
    }
    let (lam, _) = best.expect("field has a nonzero element");
    let m = EMatrix::new(&f, lam, n)?;
    let x = m.inverse().matrix().mul(a);
    let fixed = kernel_dim(&x, f.one());
    for mu in f.nonzero_elements() {
        if kernel_dim(&x, mu) > fixed + 2 {
            return Err(Error::BoundViolation);
        }
    }
    if m.matrix().mul(&x) != *a {
        return Err(Error::BoundViolation);
    }
    Ok((m, x))
}

/// Scalar minimizing rk(g - lambda 1), ties to the earliest enumerated
/// lambda, together with that minimal rank.
pub fn min_rank_scalar(g: &Matrix) -> (FieldElement, usize) {
    let f = g.field();
    let mut best = None;
    for lam in f.nonzero_elements() {
        let r = g.sub_scalar(lam).rank();
        let better = match best {
            None => true,
            Some((_, br)) => r < br,
        };
        if better {
            best = Some((lam, r));
        }
    }
    best.expect("field has a nonzero element")
}

/// Near-midpoint x h for projective classes, where (h, _) splits x^-1 y at
/// the rank-minimizing scalar with half the minimal rank as budget. Both
/// projective distances to the endpoints are at most d(x,y)/2 + 3/n.
pub fn midpoint_psl(x: &Matrix, y: &Matrix) -> Result<Matrix, Error> {
    if x.field() != y.field() {
        return Err(Error::FieldMismatch);
    }
    if !x.is_square() || x.rows() != y.rows() || y.rows() != y.cols() || x.rows() == 0 {
        return Err(Error::ShapeMismatch);
    }
    let g = x.inverse()?.mul(y);
    let (lam, r) = min_rank_scalar(&g);
    let (h, _) = split_sl(&g, lam, Rational::new(r as i64, 2))?;
    Ok(x.mul(&h))
}

/// Deterministic uniform invertible matrix.
pub fn random_gl(field: &FieldSpec, n: usize, rng: &mut SplitMix64) -> Matrix {
    loop {
        let m = Matrix::from_fn(field, n, n, |_, _| {
            field.element(rng.below(field.order() as u64) as u32)
        });
        if m.is_invertible() {
            return m;
        }
    }
}

/// Deterministic random determinant-one matrix: a random invertible matrix
/// with its first row scaled by the inverse determinant.
pub fn random_sl(field: &FieldSpec, n: usize, rng: &mut SplitMix64) -> Matrix {
    let mut m = random_gl(field, n, rng);
    let d = m.det();
    if d != field.one() {
        let di = field.inv(d).expect("determinant of invertible matrix");
        for j in 0..n {
            m.set(0, j, field.mul(di, m.get(0, j)));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32, k: u32) -> FieldSpec {
        FieldSpec::new(p, k).unwrap()
    }

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn rank_distance_examples() {
        let f = gf(3, 1);
        let id = Matrix::identity(&f, 4);
        assert_eq!(rank_distance(&id, &id).unwrap(), rat(0, 1));
        let minus = Matrix::scalar(&f, 4, f.neg(f.one()));
        assert_eq!(rank_distance(&id, &minus).unwrap(), rat(1, 1));
        let f5 = gf(5, 1);
        let id5 = Matrix::identity(&f5, 4);
        let d = Matrix::diag(
            &f5,
            &[f5.one(), f5.one(), f5.from_int(2), f5.one()],
        );
        assert_eq!(rank_distance(&id5, &d).unwrap(), rat(1, 4));
    }

    #[test]
    fn rank_distance_is_bi_invariant() {
        let f = gf(2, 2);
        let mut rng = SplitMix64::new(3);
        for _ in 0..10 {
            let x = random_gl(&f, 5, &mut rng);
            let y = random_gl(&f, 5, &mut rng);
            let c = random_gl(&f, 5, &mut rng);
            let d0 = rank_distance(&x, &y).unwrap();
            assert_eq!(rank_distance(&c.mul(&x), &c.mul(&y)).unwrap(), d0);
            assert_eq!(rank_distance(&x.mul(&c), &y.mul(&c)).unwrap(), d0);
            // Conjugation invariance of the distance from the identity.
            let id = Matrix::identity(&f, 5);
            let conj = c.mul(&x).mul(&c.inverse().unwrap());
            assert_eq!(
                rank_distance(&id, &conj).unwrap(),
                rank_distance(&id, &x).unwrap()
            );
        }
    }

    #[test]
    fn projective_distance_examples() {
        let f = gf(5, 1);
        let x = Matrix::identity(&f, 4);
        let y = x.scale(f.from_int(3));
        assert_eq!(projective_rank_distance(&x, &y).unwrap(), rat(0, 1));
        let d = Matrix::diag(
            &f,
            &[f.from_int(2), f.from_int(2), f.from_int(2), f.one()],
        );
        assert_eq!(projective_rank_distance(&x, &d).unwrap(), rat(1, 4));
        let mut rng = SplitMix64::new(5);
        for _ in 0..10 {
            let a = random_gl(&f, 4, &mut rng);
            let b = random_gl(&f, 4, &mut rng);
            assert_eq!(
                projective_rank_distance(&a, &b).unwrap(),
                projective_rank_distance(&b, &a).unwrap()
            );
        }
    }

    #[test]
    fn projective_distance_triangle_inequality() {
        let f = gf(2, 2);
        let mut rng = SplitMix64::new(11);
        for _ in 0..15 {
            let x = random_sl(&f, 6, &mut rng);
            let y = random_sl(&f, 6, &mut rng);
            let z = random_sl(&f, 6, &mut rng);
            let dxy = projective_rank_distance(&x, &y).unwrap();
            let dyz = projective_rank_distance(&y, &z).unwrap();
            let dxz = projective_rank_distance(&x, &z).unwrap();
            assert!(dxz <= dxy + dyz);
        }
    }

    fn jordan_block(f: &FieldSpec, n: usize) -> Matrix {
        Matrix::from_fn(f, n, n, |i, j| {
            if i == j || j == i + 1 {
                f.one()
            } else {
                f.zero()
            }
        })
    }

    #[test]
    fn cyclic_decomposition_examples() {
        let f = gf(3, 1);
        let j4 = jordan_block(&f, 4);
        let dec = cyclic_decomposition(&j4).unwrap();
        assert_eq!(dec.len(), 1);
        assert_eq!(dec[0].dim(), 4);
        let id3 = Matrix::identity(&f, 3);
        let dec = cyclic_decomposition(&id3).unwrap();
        assert_eq!(dec.len(), 3);
        assert!(dec.iter().all(|s| s.dim() == 1));
        let f2 = gf(2, 1);
        let g = Matrix::block_diag(&jordan_block(&f2, 2), &Matrix::identity(&f2, 1));
        let dec = cyclic_decomposition(&g).unwrap();
        let mut dims: Vec<usize> = dec.iter().map(|s| s.dim()).collect();
        dims.sort();
        assert_eq!(dims, vec![1, 2]);
    }

    #[test]
    fn cyclic_decomposition_invariants() {
        let f = gf(2, 2);
        let mut rng = SplitMix64::new(23);
        for n in [2usize, 4, 6] {
            for _ in 0..8 {
                let g = random_gl(&f, n, &mut rng);
                let dec = cyclic_decomposition(&g).unwrap();
                let mut rows = Vec::new();
                for s in &dec {
                    for i in 0..s.dim() {
                        rows.push(s.basis.row(i).to_vec());
                    }
                }
                assert_eq!(rows.len(), n);
                let t = Matrix::from_rows(&f, n, &rows);
                assert!(t.is_invertible());
                let y = g.sub(&Matrix::identity(&f, n));
                for s in &dec {
                    // Chain relation between consecutive rows.
                    for i in 0..s.dim() - 1 {
                        assert_eq!(y.row_vec_mul(s.basis.row(i)), s.basis.row(i + 1));
                    }
                    // Invariance: the image of the last row stays inside.
                    let last = y.row_vec_mul(s.basis.row(s.dim() - 1));
                    assert!(s.basis.transpose().solve_right(&last).is_some());
                }
            }
        }
    }

    fn check_gl_contract(g: &Matrix, lambda: FieldElement, phi1: Rational, bound: i64) {
        let f = g.field().clone();
        let r = g.sub_scalar(lambda).rank();
        let phi2 = Rational::from_integer(r as i64) - phi1;
        let (h, k) = if bound == 2 {
            split_gl(g, lambda, phi1).unwrap()
        } else {
            split_sl(g, lambda, phi1).unwrap()
        };
        assert_eq!(h.mul(&k), *g);
        assert!(slack(h.sub_scalar(lambda).rank(), &phi1) <= Rational::from_integer(bound));
        assert!(slack(k.sub_scalar(f.one()).rank(), &phi2) <= Rational::from_integer(bound));
        if bound == 3 {
            assert_eq!(h.det(), f.one());
            assert_eq!(k.det(), f.one());
        }
    }

    #[test]
    fn split_gl_scalar_and_endpoint_cases() {
        let f = gf(5, 1);
        let lam = f.from_int(3);
        let g = Matrix::scalar(&f, 4, lam);
        let (h, k) = split_gl(&g, lam, rat(0, 1)).unwrap();
        assert_eq!(h.mul(&k), g);
        assert_eq!(h.sub_scalar(lam).rank(), 0);
        assert_eq!(k, Matrix::identity(&f, 4));
        // phi1 = r puts everything on the h side.
        let mut rng = SplitMix64::new(9);
        let g = random_gl(&f, 5, &mut rng);
        let r = g.sub_scalar(f.one()).rank();
        let (h, k) = split_gl(&g, f.one(), rat(r as i64, 1)).unwrap();
        assert_eq!(h.mul(&k), g);
        assert_eq!(k, Matrix::identity(&f, 5));
    }

    #[test]
    fn split_gl_jordan_example() {
        let f = gf(3, 1);
        let g = jordan_block(&f, 4);
        assert_eq!(g.sub_scalar(f.one()).rank(), 3);
        let (h, k) = split_gl(&g, f.one(), rat(3, 2)).unwrap();
        // s = 2, so the shift factor has rank s + 1 = 3.
        assert_eq!(h.sub_scalar(f.one()).rank(), 3);
        assert_eq!(h.mul(&k), g);
        check_gl_contract(&g, f.one(), rat(3, 2), 2);
    }

    #[test]
    fn split_gl_errors() {
        let f = gf(5, 1);
        let g = Matrix::identity(&f, 3);
        assert_eq!(
            split_gl(&g, f.zero(), rat(0, 1)).unwrap_err(),
            Error::ZeroLambda
        );
        assert_eq!(
            split_gl(&g, f.one(), rat(1, 1)).unwrap_err(),
            Error::PhiOutOfRange
        );
        let sing = Matrix::zero(&f, 3, 3);
        assert_eq!(
            split_gl(&sing, f.one(), rat(0, 1)).unwrap_err(),
            Error::SingularMatrix
        );
        let not_sl = Matrix::diag(&f, &[f.from_int(2), f.one()]);
        assert_eq!(
            split_sl(&not_sl, f.one(), rat(0, 1)).unwrap_err(),
            Error::NotSpecialLinear
        );
    }

    #[test]
    fn split_random_contract_over_fields() {
        for (p, k) in [(2u32, 1u32), (3, 1), (2, 2), (5, 1), (3, 2)] {
            let f = gf(p, k);
            let mut rng = SplitMix64::new(1000 + p as u64 * 10 + k as u64);
            for _ in 0..25 {
                let n = 2 + rng.below(9) as usize;
                let g = random_gl(&f, n, &mut rng);
                let nz: Vec<FieldElement> = f.nonzero_elements().collect();
                let lam = nz[rng.below(nz.len() as u64) as usize];
                let r = g.sub_scalar(lam).rank();
                let phi1 = rat(rng.below(2 * r as u64 + 1) as i64, 2);
                check_gl_contract(&g, lam, phi1, 2);
                let gs = random_sl(&f, n, &mut rng);
                let r = gs.sub_scalar(lam).rank();
                let phi1 = rat(rng.below(2 * r as u64 + 1) as i64, 2);
                check_gl_contract(&gs, lam, phi1, 3);
            }
        }
    }

    #[test]
    fn split_sl_examples() {
        let f = gf(5, 1);
        let id = Matrix::identity(&f, 3);
        let (h, k) = split_sl(&id, f.one(), rat(0, 1)).unwrap();
        assert_eq!(h, id);
        assert_eq!(k, id);
        let g = Matrix::diag(&f, &[f.from_int(2), f.from_int(3)]);
        assert_eq!(g.det(), f.one());
        check_gl_contract(&g, f.one(), rat(1, 1), 3);
        let f9 = gf(3, 2);
        let mut rng = SplitMix64::new(77);
        let g = random_sl(&f9, 10, &mut rng);
        let (lam, r) = min_rank_scalar(&g);
        check_gl_contract(&g, lam, rat(r as i64, 2), 3);
    }

    #[test]
    fn e_matrix_shape() {
        let f = gf(5, 1);
        let m = EMatrix::new(&f, f.from_int(2), 4).unwrap();
        let mat = m.matrix();
        assert_eq!(mat.det(), f.one());
        // 2^-3 = 2 over GF(5).
        assert_eq!(mat, Matrix::scalar(&f, 4, f.from_int(2)));
        assert!(m.inverse().matrix().mul(&mat).is_identity());
        assert_eq!(EMatrix::new(&f, f.zero(), 4).unwrap_err(), Error::ZeroLambda);
        let f4 = gf(2, 2);
        let e = EMatrix::new(&f4, f4.x(), 3).unwrap();
        let mat = e.matrix();
        assert_eq!(mat.get(0, 0), f4.pow(f4.inv(f4.x()).unwrap(), 2));
        assert_eq!(mat.get(1, 1), f4.x());
        assert_eq!(mat.det(), f4.one());
    }

    #[test]
    fn normalize_examples() {
        let f = gf(5, 1);
        let id = Matrix::identity(&f, 4);
        let (m, x) = normalize_by_e(&id).unwrap();
        assert_eq!(m.lambda, f.one());
        assert_eq!(x, id);
        // Scalar input: the fixed space of x has dimension at least n - 1.
        let a = Matrix::scalar(&f, 4, f.from_int(2));
        let (m, x) = normalize_by_e(&a).unwrap();
        assert_eq!(m.matrix().mul(&x), a);
        assert!(kernel_dim(&x, f.one()) >= 3);
        let f7 = gf(7, 1);
        let mut rng = SplitMix64::new(13);
        for _ in 0..10 {
            let a = random_gl(&f7, 6, &mut rng);
            let (m, x) = normalize_by_e(&a).unwrap();
            assert_eq!(m.matrix().mul(&x), a);
            let fixed = kernel_dim(&x, f7.one());
            for mu in f7.nonzero_elements() {
                assert!(kernel_dim(&x, mu) <= fixed + 2);
            }
        }
    }

    #[test]
    fn midpoint_psl_examples() {
        let f = gf(3, 1);
        let mut rng = SplitMix64::new(19);
        let x = random_sl(&f, 6, &mut rng);
        assert_eq!(midpoint_psl(&x, &x).unwrap(), x);
        // Identity to a small unipotent: midpoint rank near r/2.
        let id = Matrix::identity(&f, 6);
        let y = Matrix::block_diag(
            &Matrix::block_diag(&jordan_block(&f, 2), &jordan_block(&f, 2)),
            &Matrix::identity(&f, 2),
        );
        assert_eq!(y.det(), f.one());
        let (lam, r) = min_rank_scalar(&y);
        assert_eq!(lam, f.one());
        assert_eq!(r, 2);
        let z = midpoint_psl(&id, &y).unwrap();
        let rz = z.sub_scalar(f.one()).rank() as i64;
        assert!((Rational::from_integer(rz) - rat(1, 1)).abs() <= rat(3, 1));
        let half = projective_rank_distance(&id, &y).unwrap() / 2 + rat(3, 6);
        assert!(projective_rank_distance(&id, &z).unwrap() <= half);
        assert!(projective_rank_distance(&z, &y).unwrap() <= half);
    }

    #[test]
    fn midpoint_psl_random_pairs() {
        let f = gf(2, 2);
        let mut rng = SplitMix64::new(29);
        for _ in 0..6 {
            let x = random_sl(&f, 8, &mut rng);
            let y = random_sl(&f, 8, &mut rng);
            let z = midpoint_psl(&x, &y).unwrap();
            let half = projective_rank_distance(&x, &y).unwrap() / 2 + rat(3, 8);
            assert!(projective_rank_distance(&x, &z).unwrap() <= half);
            assert!(projective_rank_distance(&z, &y).unwrap() <= half);
        }
    }
}
