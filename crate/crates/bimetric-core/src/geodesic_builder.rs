//! Dyadic midpoint paths in finite metric groups. Given endpoints and a
//! midpoint oracle whose outputs land within epsilon of half the distance,
//! the recursion fills 2^K + 1 points whose pairwise distances track the
//! endpoint distance linearly: a point born at depth k and one born at
//! depth k' deviate by at most (k + k') epsilon. All distances and bounds
//! are exact rationals.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::sign::Signed;
use num_traits::Zero;

use crate::field_core::Matrix;
use crate::linear_split::{midpoint_psl, projective_rank_distance, rank_distance, split_sl};
use crate::perm_split::{hamming_distance, midpoint_perm, Permutation};
use crate::{Error, Rational};

/// Which bi-invariant metric the context measures with.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DistanceKind {
    /// Fraction of moved points between permutations.
    Hamming,
    /// rk(x^-1 y - 1) / n between special linear matrices.
    Rank,
    /// min over scalars of rk(x^-1 y - lambda) / n, the metric of the
    /// projective quotient.
    ProjectiveRank,
}

/// A path element: a permutation or a matrix, per the context's kind.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PathElement {
    Perm(Permutation),
    Mat(Matrix),
}

/// Ambient degree, metric selector, and the midpoint slack epsilon:
/// 3/(2n) for the Hamming metric, 3/n for the matrix metrics.
#[derive(Clone, Debug)]
pub struct MetricGroupContext {
    kind: DistanceKind,
    n: usize,
    epsilon: Rational,
}

impl MetricGroupContext {
    pub fn new(kind: DistanceKind, n: usize) -> Result<MetricGroupContext, Error> {
        if n == 0 {
            return Err(Error::ShapeMismatch);
        }
        let epsilon = match kind {
            DistanceKind::Hamming => Rational::new(3, 2 * n as i64),
            _ => Rational::new(3, n as i64),
        };
        Ok(MetricGroupContext { kind, n, epsilon })
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> Rational {
        self.epsilon
    }

    fn check(&self, x: &PathElement) -> Result<(), Error> {
        match (self.kind, x) {
            (DistanceKind::Hamming, PathElement::Perm(p)) if p.n() == self.n => Ok(()),
            (DistanceKind::Rank | DistanceKind::ProjectiveRank, PathElement::Mat(m))
                if m.is_square() && m.rows() == self.n =>
            {
                Ok(())
            }
            _ => Err(Error::ShapeMismatch),
        }
    }

    /// Exact distance between two elements of this context.
    pub fn distance(&self, x: &PathElement, y: &PathElement) -> Result<Rational, Error> {
        self.check(x)?;
        self.check(y)?;
        match (x, y) {
            (PathElement::Perm(a), PathElement::Perm(b)) => hamming_distance(a, b),
            (PathElement::Mat(a), PathElement::Mat(b)) => match self.kind {
                DistanceKind::Rank => rank_distance(a, b),
                _ => projective_rank_distance(a, b),
            },
            _ => Err(Error::ShapeMismatch),
        }
    }

    /// Midpoint oracle: an element within epsilon of half the distance
    /// from both inputs.
    pub fn midpoint(&self, x: &PathElement, y: &PathElement) -> Result<PathElement, Error> {
        self.check(x)?;
        self.check(y)?;
        match (x, y) {
            (PathElement::Perm(a), PathElement::Perm(b)) => {
                Ok(PathElement::Perm(midpoint_perm(a, b)?))
            }
            (PathElement::Mat(a), PathElement::Mat(b)) => match self.kind {
                DistanceKind::Rank => {
                    let g = a.inverse()?.mul(b);
                    if g.is_identity() {
                        return Ok(PathElement::Mat(a.clone()));
                    }
                    let f = g.field().clone();
                    let r = g.sub_scalar(f.one()).rank();
                    let (h, _) = split_sl(&g, f.one(), Rational::new(r as i64, 2))?;
                    Ok(PathElement::Mat(a.mul(&h)))
                }
                _ => Ok(PathElement::Mat(midpoint_psl(a, b)?)),
            },
            _ => Err(Error::ShapeMismatch),
        }
    }
}

/// A depth-K dyadic path: point i sits at parameter i / 2^K.
#[derive(Clone, Debug)]
pub struct DyadicPath {
    depth: usize,
    points: Vec<PathElement>,
}

impl DyadicPath {
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of points: 2^depth + 1.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> &PathElement {
        &self.points[i]
    }

    pub fn points(&self) -> &[PathElement] {
        &self.points
    }

    /// Parameter of point i as an exact rational i / 2^depth.
    pub fn lambda(&self, i: usize) -> Rational {
        Rational::new(i as i64, 1i64 << self.depth)
    }

    /// Recursion level that produced point i: endpoints are 0, and interior
    /// point i = m 2^j with m odd was produced at level depth - j.
    pub fn birth_depth(&self, i: usize) -> usize {
        if i == 0 || i == self.points.len() - 1 {
            0
        } else {
            self.depth - (i.trailing_zeros() as usize)
        }
    }
}

/// Builds the dyadic path from x to y: level by level, each new point is
/// the midpoint oracle applied to its two neighbors from earlier levels.
/// For points born at depths k and k', the distance deviates from
/// |lambda - lambda'| d(x, y) by at most (k + k') epsilon. Depth is capped
/// at 24.
pub fn dyadic_path(
    ctx: &MetricGroupContext,
    x: &PathElement,
    y: &PathElement,
    depth: usize,
) -> Result<DyadicPath, Error> {
    ctx.check(x)?;
    ctx.check(y)?;
    if depth > 24 {
        return Err(Error::ShapeMismatch);
    }
    let size = (1usize << depth) + 1;
    let mut slots: Vec<Option<PathElement>> = vec![None; size];
    slots[0] = Some(x.clone());
    slots[size - 1] = Some(y.clone());
    for level in 1..=depth {
        let step = 1usize << (depth - level);
        let mut i = step;
        while i < size {
            if slots[i].is_none() {
                let left = slots[i - step].as_ref().expect("parent filled");
                let right = slots[i + step].as_ref().expect("parent filled");
                slots[i] = Some(ctx.midpoint(left, right)?);
            }
            i += 2 * step;
        }
    }
    let points = slots.into_iter().map(|s| s.expect("all filled")).collect();
    Ok(DyadicPath { depth, points })
}

/// Exact maximum over all point pairs of |d(p_i, p_j) - |lambda_i -
/// lambda_j| d(x, y)|.
pub fn path_deviation(ctx: &MetricGroupContext, path: &DyadicPath) -> Result<Rational, Error> {
    let ell = ctx.distance(path.point(0), path.point(path.len() - 1))?;
    let mut worst = Rational::zero();
    for i in 0..path.len() {
        for j in (i + 1)..path.len() {
            let d = ctx.distance(path.point(i), path.point(j))?;
            let ideal = (path.lambda(j) - path.lambda(i)) * ell;
            let dev = (d - ideal).abs();
            if dev > worst {
                worst = dev;
            }
        }
    }
    Ok(worst)
}

/// Certifies z as a midpoint of x and y: each slack is
/// d(x, y)/2 + epsilon minus the actual distance from the corresponding
/// endpoint, and both must be nonnegative for a valid midpoint.
pub fn halfdistance_certificate(
    ctx: &MetricGroupContext,
    x: &PathElement,
    y: &PathElement,
    z: &PathElement,
) -> Result<(Rational, Rational), Error> {
    let ell = ctx.distance(x, y)?;
    let half = ell / Rational::new(2, 1) + ctx.epsilon;
    let d1 = ctx.distance(x, z)?;
    let d2 = ctx.distance(z, y)?;
    Ok((half - d1, half - d2))
}
