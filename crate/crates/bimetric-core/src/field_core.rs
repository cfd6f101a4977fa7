//! Exact arithmetic over small finite fields GF(p^k) and dense matrix
//! algebra over them.
//!
//! Supported fields have prime characteristic p <= 97 and degree k <= 4.
//! An element is stored as its canonical index c0 + c1 p + ... + c_{k-1}
//! p^{k-1} in the modulus basis. Fields of order at most 512 precompute
//! full operation tables; larger fields compute digitwise on demand.
//!
//! The element enumeration order, used everywhere a "first" or "smallest"
//! scalar must be picked, is coefficient-lexicographic: elements are ordered
//! by their coefficient tuples (c0, c1, ...) with c0 compared first. The
//! auto-chosen modulus is the first monic irreducible of degree k in the
//! same coefficient order.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::Error;

/// Largest field order for which full operation tables are precomputed.
const TABLE_LIMIT: u32 = 512;

/// Largest supported characteristic.
const MAX_P: u32 = 97;

/// Largest supported extension degree.
const MAX_K: u32 = 4;

/// Element of a [`FieldSpec`], stored as its canonical index.
///
/// An element carries no field pointer; all arithmetic goes through the
/// owning [`FieldSpec`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FieldElement(u32);

impl FieldElement {
    /// Canonical index c0 + c1 p + ... + c_{k-1} p^{k-1}.
    pub fn index(self) -> u32 {
        self.0
    }
}

struct Tables {
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    conj: Vec<u16>,
}

struct FieldInner {
    p: u32,
    k: u32,
    q: u32,
    /// Length k+1, modulus[i] = coefficient of x^i, monic irreducible.
    modulus: Vec<u32>,
    tables: Option<Tables>,
}

/// Handle to a finite field GF(p^k). Cheap to clone; immutable after
/// construction.
#[derive(Clone)]
pub struct FieldSpec(Arc<FieldInner>);

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.k == other.0.k && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FieldSpec {}

impl core::fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "GF({}^{})", self.0.p, self.0.k)
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Remainder check for Z_p polynomials: true iff den divides num.
/// Coefficient slices are little-endian; den is monic.
fn zp_divides(num: &[u32], den: &[u32], p: u32) -> bool {
    let dn = num.len() - 1;
    let dd = den.len() - 1;
    let mut work: Vec<u32> = num.to_vec();
    let pp = p as u64;
    for i in (dd..=dn).rev() {
        let c = work[i] as u64;
        if c == 0 {
            continue;
        }
        for j in 0..=dd {
            let t = (c * den[j] as u64) % pp;
            let cur = work[i - dd + j] as u64;
            work[i - dd + j] = ((cur + pp - t) % pp) as u32;
        }
    }
    work[..dd].iter().all(|&c| c == 0)
}

/// Exhaustive irreducibility test for monic poly of degree k <= 4 over Z_p:
/// trial division by every monic divisor of degree 1..=k/2.
fn zp_irreducible(poly: &[u32], p: u32) -> bool {
    let k = poly.len() - 1;
    if k == 1 {
        return true;
    }
    for d in 1..=k / 2 {
        let count = (p as u64).pow(d as u32);
        let mut den = vec![0u32; d + 1];
        den[d] = 1;
        for idx in 0..count {
            let mut v = idx;
            for c in den.iter_mut().take(d) {
                *c = (v % p as u64) as u32;
                v /= p as u64;
            }
            if zp_divides(poly, &den, p) {
                return false;
            }
        }
    }
    true
}

/// First irreducible monic of degree k in coefficient order (c0 first).
fn find_modulus(p: u32, k: u32) -> Vec<u32> {
    let k = k as usize;
    let count = (p as u64).pow(k as u32);
    let mut poly = vec![0u32; k + 1];
    poly[k] = 1;
    for idx in 0..count {
        // idx enumerated with c0 as the most significant digit.
        let mut v = idx;
        for i in (0..k).rev() {
            poly[i] = (v % p as u64) as u32;
            v /= p as u64;
        }
        if zp_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("an irreducible of every degree exists over every prime field")
}

impl FieldSpec {
    /// GF(p^k) with the auto-chosen modulus.
    pub fn new(p: u32, k: u32) -> Result<FieldSpec, Error> {
        if !is_prime(p) || p > MAX_P || k == 0 || k > MAX_K {
            return Err(Error::UnsupportedField);
        }
        Ok(Self::build(p, k, find_modulus(p, k)))
    }

    /// GF(p^k) with an explicit modulus, coefficients little-endian.
    pub fn with_modulus(p: u32, k: u32, modulus: &[u32]) -> Result<FieldSpec, Error> {
        if !is_prime(p) || p > MAX_P || k == 0 || k > MAX_K {
            return Err(Error::UnsupportedField);
        }
        if modulus.len() != k as usize + 1
            || modulus[k as usize] != 1
            || modulus.iter().any(|&c| c >= p)
        {
            return Err(Error::BadModulus);
        }
        if !zp_irreducible(modulus, p) {
            return Err(Error::BadModulus);
        }
        Ok(Self::build(p, k, modulus.to_vec()))
    }

    fn build(p: u32, k: u32, modulus: Vec<u32>) -> FieldSpec {
        let q = p.pow(k);
        let mut inner = FieldInner {
            p,
            k,
            q,
            modulus,
            tables: None,
        };
        if q <= TABLE_LIMIT {
            let qs = q as usize;
            let mut add = vec![0u16; qs * qs];
            let mut mul = vec![0u16; qs * qs];
            let mut neg = vec![0u16; qs];
            let mut inv = vec![0u16; qs];
            let mut conj = vec![0u16; qs];
            for a in 0..q {
                neg[a as usize] = inner.neg_raw(a) as u16;
                conj[a as usize] = inner.conj_raw(a) as u16;
                if a != 0 {
                    inv[a as usize] = inner.pow_raw(a, q as u64 - 2) as u16;
                }
                for b in 0..q {
                    add[(a * q + b) as usize] = inner.add_raw(a, b) as u16;
                    mul[(a * q + b) as usize] = inner.mul_raw(a, b) as u16;
                }
            }
            inner.tables = Some(Tables {
                add,
                mul,
                neg,
                inv,
                conj,
            });
        }
        FieldSpec(Arc::new(inner))
    }

    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    pub fn degree(&self) -> u32 {
        self.0.k
    }

    /// Field order q = p^k.
    pub fn order(&self) -> u32 {
        self.0.q
    }

    /// Modulus coefficients, little-endian, length k+1.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    /// True iff the involution x -> x^(p^(k/2)) has order exactly 2,
    /// which holds exactly when k is even.
    pub fn involution_enabled(&self) -> bool {
        self.0.k % 2 == 0
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(0)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement(1)
    }

    /// The modulus-basis generator x. Requires degree >= 2.
    pub fn x(&self) -> FieldElement {
        assert!(self.0.k >= 2);
        FieldElement(self.0.p)
    }

    /// Prime-subfield embedding of an integer.
    pub fn from_int(&self, v: u64) -> FieldElement {
        FieldElement((v % self.0.p as u64) as u32)
    }

    /// Element with the given canonical index.
    pub fn element(&self, index: u32) -> FieldElement {
        assert!(index < self.0.q, "element index out of range");
        FieldElement(index)
    }

    /// Element from its coefficient vector, little-endian, length <= k.
    pub fn from_coeffs(&self, coeffs: &[u32]) -> FieldElement {
        assert!(coeffs.len() <= self.0.k as usize);
        let mut idx = 0u32;
        for &c in coeffs.iter().rev() {
            assert!(c < self.0.p);
            idx = idx * self.0.p + c;
        }
        FieldElement(idx)
    }

    /// Coefficient vector of an element, little-endian, length k.
    pub fn coeffs(&self, a: FieldElement) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.0.k as usize);
        let mut idx = a.0;
        for _ in 0..self.0.k {
            v.push(idx % self.0.p);
            idx /= self.0.p;
        }
        v
    }

    /// Position of an element in the coefficient-lexicographic enumeration.
    pub fn enum_position(&self, a: FieldElement) -> u32 {
        // The enumeration reads the coefficient tuple with c0 as the most
        // significant digit.
        let mut idx = a.0;
        let mut pos = 0u32;
        for _ in 0..self.0.k {
            pos = pos * self.0.p + idx % self.0.p;
            idx /= self.0.p;
        }
        pos
    }

    /// All elements in coefficient-lexicographic order; zero comes first.
    pub fn elements(&self) -> Elements {
        Elements {
            field: self.clone(),
            pos: 0,
        }
    }

    /// All nonzero elements in coefficient-lexicographic order.
    pub fn nonzero_elements(&self) -> Elements {
        Elements {
            field: self.clone(),
            pos: 1,
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if let Some(t) = &self.0.tables {
            FieldElement(t.add[(a.0 * self.0.q + b.0) as usize] as u32)
        } else {
            FieldElement(self.0.add_raw(a.0, b.0))
        }
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if let Some(t) = &self.0.tables {
            FieldElement(t.mul[(a.0 * self.0.q + b.0) as usize] as u32)
        } else {
            FieldElement(self.0.mul_raw(a.0, b.0))
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if let Some(t) = &self.0.tables {
            FieldElement(t.neg[a.0 as usize] as u32)
        } else {
            FieldElement(self.0.neg_raw(a.0))
        }
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, Error> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        if let Some(t) = &self.0.tables {
            Ok(FieldElement(t.inv[a.0 as usize] as u32))
        } else {
            Ok(FieldElement(self.0.pow_raw(a.0, self.0.q as u64 - 2)))
        }
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        let mut acc = self.one();
        let mut base = a;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// The order-2 involution x -> x^(p^(k/2)) for even k; identity for odd k.
    #[inline]
    pub fn involution(&self, a: FieldElement) -> FieldElement {
        if let Some(t) = &self.0.tables {
            FieldElement(t.conj[a.0 as usize] as u32)
        } else {
            FieldElement(self.0.conj_raw(a.0))
        }
    }

    /// The p-power Frobenius map.
    pub fn frobenius(&self, a: FieldElement) -> FieldElement {
        self.pow(a, self.0.p as u64)
    }

    /// Text form: plain integer for prime fields, "[c0,c1,...]" otherwise.
    pub fn format_element(&self, a: FieldElement) -> String {
        if self.0.k == 1 {
            alloc::format!("{}", a.0)
        } else {
            let cs = self.coeffs(a);
            let mut s = String::from("[");
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&alloc::format!("{}", c));
            }
            s.push(']');
            s
        }
    }
}

impl FieldInner {
    fn digits(&self, idx: u32) -> [u32; 4] {
        let mut d = [0u32; 4];
        let mut v = idx;
        for slot in d.iter_mut().take(self.k as usize) {
            *slot = v % self.p;
            v /= self.p;
        }
        d
    }

    fn from_digits(&self, d: &[u32; 4]) -> u32 {
        let mut idx = 0u32;
        for i in (0..self.k as usize).rev() {
            idx = idx * self.p + d[i];
        }
        idx
    }

    fn add_raw(&self, a: u32, b: u32) -> u32 {
        let da = self.digits(a);
        let db = self.digits(b);
        let mut out = [0u32; 4];
        for i in 0..self.k as usize {
            out[i] = (da[i] + db[i]) % self.p;
        }
        self.from_digits(&out)
    }

    fn neg_raw(&self, a: u32) -> u32 {
        let da = self.digits(a);
        let mut out = [0u32; 4];
        for i in 0..self.k as usize {
            out[i] = (self.p - da[i]) % self.p;
        }
        self.from_digits(&out)
    }

    fn mul_raw(&self, a: u32, b: u32) -> u32 {
        let k = self.k as usize;
        let p = self.p as u64;
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = [0u64; 7];
        for i in 0..k {
            if da[i] == 0 {
                continue;
            }
            for j in 0..k {
                prod[i + j] += da[i] as u64 * db[j] as u64;
            }
        }
        // Reduce by the monic modulus: x^d = -sum m_j x^(d-k+j).
        for i in (k..=2 * k - 2).rev() {
            let c = prod[i] % p;
            prod[i] = 0;
            if c == 0 {
                continue;
            }
            for j in 0..k {
                let m = self.modulus[j] as u64;
                prod[i - k + j] += c * ((p - m) % p);
            }
        }
        let mut out = [0u32; 4];
        for i in 0..k {
            out[i] = (prod[i] % p) as u32;
        }
        self.from_digits(&out)
    }

    fn pow_raw(&self, a: u32, mut e: u64) -> u32 {
        let mut acc = 1u32;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        acc
    }

    fn conj_raw(&self, a: u32) -> u32 {
        if self.k % 2 == 1 {
            a
        } else {
            self.pow_raw(a, (self.p as u64).pow(self.k / 2))
        }
    }
}

/// Iterator over field elements in coefficient-lexicographic order.
pub struct Elements {
    field: FieldSpec,
    pos: u32,
}

impl Iterator for Elements {
    type Item = FieldElement;

    fn next(&mut self) -> Option<FieldElement> {
        if self.pos >= self.field.0.q {
            return None;
        }
        // Digit-reversal maps enumeration position to canonical index.
        let p = self.field.0.p;
        let mut v = self.pos;
        let mut idx = 0u32;
        for _ in 0..self.field.0.k {
            idx = idx * p + v % p;
            v /= p;
        }
        self.pos += 1;
        Some(FieldElement(idx))
    }
}

/// Dense matrix over a [`FieldSpec`]. Immutable value type: every operation
/// returns a fresh matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<FieldElement>,
}

impl core::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Matrix({}x{} over {:?}) [", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.field.format_element(self.get(i, j)))?;
            }
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zero(field: &FieldSpec, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            entries: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: &FieldSpec, n: usize) -> Matrix {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.entries[i * n + i] = field.one();
        }
        m
    }

    /// lambda times the identity.
    pub fn scalar(field: &FieldSpec, n: usize, lambda: FieldElement) -> Matrix {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.entries[i * n + i] = lambda;
        }
        m
    }

    pub fn diag(field: &FieldSpec, entries: &[FieldElement]) -> Matrix {
        let n = entries.len();
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.entries[i * n + i] = entries[i];
        }
        m
    }

    pub fn from_fn(
        field: &FieldSpec,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> FieldElement,
    ) -> Matrix {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Matrix {
            field: field.clone(),
            rows,
            cols,
            entries,
        }
    }

    /// Build from canonical element indices, one slice per row.
    pub fn from_indices(field: &FieldSpec, rows: &[&[u32]]) -> Matrix {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c));
        Matrix::from_fn(field, r, c, |i, j| field.element(rows[i][j]))
    }

    /// Build from row vectors of the stated width.
    pub fn from_rows(field: &FieldSpec, cols: usize, rows: &[Vec<FieldElement>]) -> Matrix {
        assert!(rows.iter().all(|row| row.len() == cols));
        Matrix::from_fn(field, rows.len(), cols, |i, j| rows[i][j])
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        assert!(i < self.rows && j < self.cols);
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        assert!(i < self.rows && j < self.cols);
        self.entries[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(&self.field, self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Entrywise field involution.
    pub fn conj(&self) -> Matrix {
        let f = self.field.clone();
        Matrix {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&e| f.involution(e)).collect(),
        }
    }

    pub fn conj_transpose(&self) -> Matrix {
        self.transpose().conj()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert!(self.field == other.field);
        assert!(self.rows == other.rows && self.cols == other.cols);
        let f = &self.field;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Matrix {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert!(self.field == other.field);
        assert!(self.rows == other.rows && self.cols == other.cols);
        let f = &self.field;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| f.sub(a, b))
            .collect();
        Matrix {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn neg(&self) -> Matrix {
        let f = &self.field;
        Matrix {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&a| f.neg(a)).collect(),
        }
    }

    /// self - lambda * identity.
    pub fn sub_scalar(&self, lambda: FieldElement) -> Matrix {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            let v = self.field.sub(m.get(i, i), lambda);
            m.set(i, i, v);
        }
        m
    }

    pub fn scale(&self, lambda: FieldElement) -> Matrix {
        let f = &self.field;
        Matrix {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&a| f.mul(a, lambda)).collect(),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert!(self.field == other.field);
        assert!(self.cols == other.rows, "inner dimensions must agree");
        let f = &self.field;
        let mut out = Matrix::zero(f, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.entries[i * self.cols + l];
                if a == f.zero() {
                    continue;
                }
                let src = l * other.cols;
                let dst = i * other.cols;
                for j in 0..other.cols {
                    let t = f.mul(a, other.entries[src + j]);
                    out.entries[dst + j] = f.add(out.entries[dst + j], t);
                }
            }
        }
        out
    }

    /// Row action v -> v * self; v has length rows, result length cols.
    pub fn row_vec_mul(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(v.len(), self.rows);
        let f = &self.field;
        let mut out = vec![f.zero(); self.cols];
        for (l, &vl) in v.iter().enumerate() {
            if vl == f.zero() {
                continue;
            }
            let src = l * self.cols;
            for j in 0..self.cols {
                let t = f.mul(vl, self.entries[src + j]);
                out[j] = f.add(out[j], t);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Matrix {
        assert!(self.is_square());
        let mut acc = Matrix::identity(&self.field, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        let z = self.field.zero();
        self.entries.iter().all(|&e| e == z)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Matrix::identity(&self.field, self.rows)
    }

    /// Row rank by exact Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut work = self.entries.clone();
        echelon(&self.field, &mut work, self.rows, self.cols, false).rank
    }

    /// Determinant of a square matrix.
    pub fn det(&self) -> FieldElement {
        assert!(self.is_square());
        let mut work = self.entries.clone();
        let e = echelon(&self.field, &mut work, self.rows, self.cols, false);
        if e.rank < self.rows {
            self.field.zero()
        } else {
            e.det
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Result<Matrix, Error> {
        assert!(self.is_square());
        let n = self.rows;
        let f = &self.field;
        // Augment with the identity and fully reduce.
        let mut work = vec![f.zero(); n * 2 * n];
        for i in 0..n {
            for j in 0..n {
                work[i * 2 * n + j] = self.get(i, j);
            }
            work[i * 2 * n + n + i] = f.one();
        }
        let e = echelon(f, &mut work, n, 2 * n, true);
        // Pivots escaping into the right half mean the left half is singular.
        if e.pivot_cols.iter().any(|&c| c >= n) {
            return Err(Error::SingularMatrix);
        }
        Ok(Matrix::from_fn(f, n, n, |i, j| work[i * 2 * n + n + j]))
    }

    /// Right kernel: independent row vectors v with self * v^T = 0,
    /// count = cols - rank. Free coordinates are taken in increasing
    /// column order, so the basis is deterministic.
    pub fn kernel_basis(&self) -> Vec<Vec<FieldElement>> {
        let f = &self.field;
        let mut work = self.entries.clone();
        let e = echelon(f, &mut work, self.rows, self.cols, true);
        let mut is_pivot = vec![false; self.cols];
        for &c in &e.pivot_cols {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for fc in 0..self.cols {
            if is_pivot[fc] {
                continue;
            }
            let mut v = vec![f.zero(); self.cols];
            v[fc] = f.one();
            for (i, &pc) in e.pivot_cols.iter().enumerate() {
                v[pc] = f.neg(work[i * self.cols + fc]);
            }
            basis.push(v);
        }
        basis
    }

    /// Left kernel: vectors v with v * self = 0.
    pub fn left_kernel_basis(&self) -> Vec<Vec<FieldElement>> {
        self.transpose().kernel_basis()
    }

    /// One solution x of self * x^T = rhs^T, free coordinates zero;
    /// None if the system is inconsistent.
    pub fn solve_right(&self, rhs: &[FieldElement]) -> Option<Vec<FieldElement>> {
        assert_eq!(rhs.len(), self.rows);
        let f = &self.field;
        let w = self.cols + 1;
        let mut work = vec![f.zero(); self.rows * w];
        for i in 0..self.rows {
            for j in 0..self.cols {
                work[i * w + j] = self.get(i, j);
            }
            work[i * w + self.cols] = rhs[i];
        }
        let e = echelon(f, &mut work, self.rows, w, true);
        if e.pivot_cols.contains(&self.cols) {
            return None;
        }
        let mut x = vec![f.zero(); self.cols];
        for (i, &pc) in e.pivot_cols.iter().enumerate() {
            x[pc] = work[i * w + self.cols];
        }
        Some(x)
    }

    /// Copy of the rows*cols block with top-left corner (r0, c0).
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        Matrix::from_fn(&self.field, rows, cols, |i, j| self.get(r0 + i, c0 + j))
    }

    /// Assemble (a b; c d); widths and heights must agree blockwise.
    pub fn from_blocks_2x2(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Matrix {
        assert!(a.field == b.field && a.field == c.field && a.field == d.field);
        assert!(a.rows == b.rows && c.rows == d.rows);
        assert!(a.cols == c.cols && b.cols == d.cols);
        let rows = a.rows + c.rows;
        let cols = a.cols + b.cols;
        Matrix::from_fn(&a.field, rows, cols, |i, j| {
            if i < a.rows {
                if j < a.cols {
                    a.get(i, j)
                } else {
                    b.get(i, j - a.cols)
                }
            } else if j < a.cols {
                c.get(i - a.rows, j)
            } else {
                d.get(i - a.rows, j - a.cols)
            }
        })
    }

    /// Assemble diag(a, b) with zero off-diagonal blocks.
    pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
        let zb = Matrix::zero(&a.field, a.rows, b.cols);
        let zc = Matrix::zero(&a.field, b.rows, a.cols);
        Matrix::from_blocks_2x2(a, &zb, &zc, b)
    }
}

pub(crate) struct Echelon {
    pub rank: usize,
    /// Pivot column of each pivot row, in order.
    pub pivot_cols: Vec<usize>,
    /// Signed product of pivots; meaningful only for square full-rank input.
    pub det: FieldElement,
}

/// In-place Gaussian elimination with the fixed pivot rule: scan columns left
/// to right, take the first nonzero entry at or below the current row. Pivot
/// rows are normalized to leading 1. With `full`, eliminates above pivots too
/// (reduced echelon form).
pub(crate) fn echelon(
    f: &FieldSpec,
    work: &mut [FieldElement],
    rows: usize,
    cols: usize,
    full: bool,
) -> Echelon {
    let zero = f.zero();
    let mut det = f.one();
    let mut piv_row = 0usize;
    let mut pivot_cols = Vec::new();
    for col in 0..cols {
        if piv_row == rows {
            break;
        }
        let mut sel = None;
        for r in piv_row..rows {
            if work[r * cols + col] != zero {
                sel = Some(r);
                break;
            }
        }
        let Some(sel) = sel else { continue };
        if sel != piv_row {
            for c in col..cols {
                work.swap(sel * cols + c, piv_row * cols + c);
            }
            det = f.neg(det);
        }
        let pv = work[piv_row * cols + col];
        det = f.mul(det, pv);
        let pinv = f.inv(pv).expect("pivot is nonzero");
        for c in col..cols {
            let v = f.mul(pinv, work[piv_row * cols + c]);
            work[piv_row * cols + c] = v;
        }
        let lo = if full { 0 } else { piv_row + 1 };
        for r in lo..rows {
            if r == piv_row {
                continue;
            }
            let factor = work[r * cols + col];
            if factor == zero {
                continue;
            }
            let nf = f.neg(factor);
            for c in col..cols {
                let t = f.mul(nf, work[piv_row * cols + c]);
                work[r * cols + c] = f.add(work[r * cols + c], t);
            }
        }
        pivot_cols.push(col);
        piv_row += 1;
    }
    Echelon {
        rank: piv_row,
        pivot_cols,
        det,
    }
}
