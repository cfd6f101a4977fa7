//! Crate-internal univariate polynomials over a [`FieldSpec`].
//!
//! Coefficients are little-endian with no trailing zeros; the zero
//! polynomial has an empty coefficient list. Only the operations needed for
//! minimal-polynomial bookkeeping live here: multiplication, remainder,
//! gcd, and lcm, all deterministic.

use alloc::vec::Vec;

use crate::field_core::{FieldElement, FieldSpec};

#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct Poly {
    field: FieldSpec,
    coeffs: Vec<FieldElement>,
}

impl Poly {
    pub fn zero(field: &FieldSpec) -> Poly {
        Poly {
            field: field.clone(),
            coeffs: Vec::new(),
        }
    }

    pub fn one(field: &FieldSpec) -> Poly {
        Poly {
            field: field.clone(),
            coeffs: alloc::vec![field.one()],
        }
    }

    pub fn from_coeffs(field: &FieldSpec, coeffs: Vec<FieldElement>) -> Poly {
        let mut p = Poly {
            field: field.clone(),
            coeffs,
        };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        let z = self.field.zero();
        while self.coeffs.last() == Some(&z) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; None for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let f = &self.field;
        if self.is_zero() || other.is_zero() {
            return Poly::zero(f);
        }
        let mut out = alloc::vec![f.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == f.zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly::from_coeffs(f, out)
    }

    /// Remainder of self by a nonzero divisor.
    pub fn rem(&self, den: &Poly) -> Poly {
        assert!(!den.is_zero());
        let f = &self.field;
        let dd = den.deg().unwrap();
        let lead_inv = f.inv(den.coeffs[dd]).expect("nonzero leading coefficient");
        let mut work = self.coeffs.clone();
        while work.len() > dd {
            let top = work.len() - 1;
            let c = f.mul(work[top], lead_inv);
            if c != f.zero() {
                for j in 0..=dd {
                    let t = f.mul(c, den.coeffs[j]);
                    work[top - dd + j] = f.sub(work[top - dd + j], t);
                }
            }
            work.pop();
        }
        Poly::from_coeffs(f, work)
    }

    /// Quotient of self by a nonzero divisor that divides self exactly.
    pub fn exact_div(&self, den: &Poly) -> Poly {
        assert!(!den.is_zero());
        let f = &self.field;
        if self.is_zero() {
            return Poly::zero(f);
        }
        let dd = den.deg().unwrap();
        let lead_inv = f.inv(den.coeffs[dd]).unwrap();
        let mut work = self.coeffs.clone();
        let mut quot = alloc::vec![f.zero(); work.len() - dd];
        while work.len() > dd {
            let top = work.len() - 1;
            let c = f.mul(work[top], lead_inv);
            quot[top - dd] = c;
            if c != f.zero() {
                for j in 0..=dd {
                    let t = f.mul(c, den.coeffs[j]);
                    work[top - dd + j] = f.sub(work[top - dd + j], t);
                }
            }
            work.pop();
        }
        assert!(work.iter().all(|&c| c == f.zero()), "division must be exact");
        Poly::from_coeffs(f, quot)
    }

    /// Scale so the leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        let f = &self.field;
        if self.is_zero() {
            return self.clone();
        }
        let lead = *self.coeffs.last().unwrap();
        if lead == f.one() {
            return self.clone();
        }
        let li = f.inv(lead).unwrap();
        Poly::from_coeffs(f, self.coeffs.iter().map(|&c| f.mul(c, li)).collect())
    }

    /// Monic greatest common divisor by the Euclidean algorithm.
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

    /// Monic least common multiple.
    pub fn lcm(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.field);
        }
        let g = self.gcd(other);
        self.mul(other).exact_div(&g).monic()
    }
}
