//! Permutations under the normalized Hamming metric and the constructive
//! support-splitting factorization: every even permutation g factors as
//! g = h k with h, k even and the supports of h and k within 3/2 of any
//! prescribed split t mu(g), (1-t) mu(g).
//!
//! Composition is left to right throughout: (s t)(i) = t(s(i)). Points are
//! 0-indexed internally; the CLI layer converts to 1-indexed text forms.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Signed;

use crate::rng::SplitMix64;
use crate::{Error, Rational};

/// Permutation in image-array form: `images[i]` is the image of point i.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Permutation {
    images: Vec<u32>,
}

/// Disjoint cycles of a permutation; fixed points omitted. Cycles are listed
/// by increasing smallest moved point and each cycle starts at its smallest
/// point, so the decomposition is deterministic.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CycleDecomposition {
    pub cycles: Vec<Vec<u32>>,
}

impl Permutation {
    pub fn identity(n: usize) -> Permutation {
        Permutation {
            images: (0..n as u32).collect(),
        }
    }

    /// Validates that `images` is a bijection of 0..n.
    pub fn from_images(images: Vec<u32>) -> Result<Permutation, Error> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v as usize >= n || seen[v as usize] {
                return Err(Error::InvalidPayload);
            }
            seen[v as usize] = true;
        }
        Ok(Permutation { images })
    }

    /// Product of the given cycles on 0..n. Cycles must be disjoint;
    /// length-1 entries are allowed and act as fixed points.
    pub fn from_cycles(n: usize, cycles: &[Vec<u32>]) -> Result<Permutation, Error> {
        let mut images: Vec<u32> = (0..n as u32).collect();
        let mut seen = vec![false; n];
        for cyc in cycles {
            for &pt in cyc {
                if pt as usize >= n || seen[pt as usize] {
                    return Err(Error::InvalidPayload);
                }
                seen[pt as usize] = true;
            }
            if cyc.len() >= 2 {
                for i in 0..cyc.len() {
                    images[cyc[i] as usize] = cyc[(i + 1) % cyc.len()];
                }
            }
        }
        Ok(Permutation { images })
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    /// Left-to-right composition: (self.compose(t))(i) = t(self(i)).
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.n(), other.n());
        Permutation {
            images: self.images.iter().map(|&v| other.images[v as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.n()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v as usize] = i as u32;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    pub fn cycle_decomposition(&self) -> CycleDecomposition {
        let n = self.n();
        let mut visited = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if visited[start] || self.images[start] as usize == start {
                continue;
            }
            let mut cyc = Vec::new();
            let mut p = start;
            while !visited[p] {
                visited[p] = true;
                cyc.push(p as u32);
                p = self.images[p] as usize;
            }
            cycles.push(cyc);
        }
        CycleDecomposition { cycles }
    }

    /// Number of cycles of length >= 2.
    pub fn cycle_count(&self) -> usize {
        self.cycle_decomposition().cycles.len()
    }

    pub fn is_even(&self) -> bool {
        // Sign is (-1)^(mu - number of nontrivial cycles).
        let dec = self.cycle_decomposition();
        let mu: usize = dec.cycles.iter().map(|c| c.len()).sum();
        (mu - dec.cycles.len()) % 2 == 0
    }
}

/// Number of points moved.
pub fn support_count(g: &Permutation) -> usize {
    g.images()
        .iter()
        .enumerate()
        .filter(|&(i, &v)| i as u32 != v)
        .count()
}

/// Normalized Hamming distance mu(s^-1 t)/n. The count equals the number of
/// points where s and t disagree, so no composition is performed.
pub fn hamming_distance(s: &Permutation, t: &Permutation) -> Result<Rational, Error> {
    if s.n() != t.n() {
        return Err(Error::ShapeMismatch);
    }
    if s.n() == 0 {
        return Ok(Rational::from_integer(0));
    }
    let moved = s
        .images()
        .iter()
        .zip(t.images())
        .filter(|(a, b)| a != b)
        .count();
    Ok(Rational::new(moved as i64, s.n() as i64))
}

/// Split the cycle pi = (a1 ... am) at 1 < l < m into lambda = (a1 ... al)
/// and rho = (a1 a_{l+1} ... am), so that lambda rho = pi left to right.
/// The factors are single cycles of lengths l and m - l + 1 sharing only a1.
pub fn split_cycle(pi: &[u32], l: usize) -> Result<(Vec<u32>, Vec<u32>), Error> {
    let m = pi.len();
    if l <= 1 || l >= m {
        return Err(Error::LengthOutOfRange);
    }
    let lambda = pi[..l].to_vec();
    let mut rho = Vec::with_capacity(m - l + 1);
    rho.push(pi[0]);
    rho.extend_from_slice(&pi[l..]);
    Ok((lambda, rho))
}

/// Internal selection state for the cycle-packing phases.
struct Packing {
    /// 0 = unassigned, 1 = first factor, 2 = second factor.
    assigned: Vec<u8>,
}

/// Greedy even packing of unassigned cycles into side `side` within `budget`.
///
/// Odd-length cycles (even permutations) are taken individually in order of
/// decreasing length, ties by smallest moved point. Even-length cycles are
/// taken in pairs, shortest two first, to preserve evenness. Both phases run
/// against a budget that only shrinks, which gives the two residual
/// properties the shape analysis needs: no leftover odd-length cycle fits
/// the final remainder, and no two leftover even-length cycles fit jointly.
fn pack_side(cycles: &[Vec<u32>], pack: &mut Packing, side: u8, budget: Rational) -> Rational {
    let mut remaining = budget;
    let mut odd_idx: Vec<usize> = (0..cycles.len())
        .filter(|&i| pack.assigned[i] == 0 && cycles[i].len() % 2 == 1)
        .collect();
    odd_idx.sort_by_key(|&i| (usize::MAX - cycles[i].len(), cycles[i][0]));
    for i in odd_idx {
        let mu = Rational::from_integer(cycles[i].len() as i64);
        if mu <= remaining {
            pack.assigned[i] = side;
            remaining -= mu;
        }
    }
    let mut even_idx: Vec<usize> = (0..cycles.len())
        .filter(|&i| pack.assigned[i] == 0 && cycles[i].len() % 2 == 0)
        .collect();
    even_idx.sort_by_key(|&i| (cycles[i].len(), cycles[i][0]));
    let mut it = 0;
    while it + 1 < even_idx.len() {
        let (a, b) = (even_idx[it], even_idx[it + 1]);
        let mu = Rational::from_integer((cycles[a].len() + cycles[b].len()) as i64);
        if mu <= remaining {
            pack.assigned[a] = side;
            pack.assigned[b] = side;
            remaining -= mu;
            it += 2;
        } else {
            break;
        }
    }
    remaining
}

/// Candidate factorization of the two-even-cycle residual, recorded by shape
/// so that slacks can be compared before any permutation is built.
#[derive(Clone, Copy, Debug)]
enum ResidualCand {
    /// Whole residual to one side.
    AllLeft,
    AllRight,
    /// h2 = c_whole * lambda_l(c_other), k2 = rho; l even.
    WholeLeft { whole: usize, l: usize },
    /// h2 = lambda_l(c_other), k2 = rho * c_whole; l odd.
    WholeRight { whole: usize, l: usize },
    /// h2 threads the x-cycle plus the first s points of the other cycle,
    /// k2 returns through the remaining points; s odd.
    Bridge { xcyc: usize, s: usize },
    /// Same shapes applied to the inverse residual, factors swapped back.
    MirrorWholeLeft { whole: usize, l: usize },
    MirrorWholeRight { whole: usize, l: usize },
    MirrorBridge { xcyc: usize, s: usize },
}

impl ResidualCand {
    /// Support sizes (mu_h2, mu_k2) from the shape alone.
    fn sizes(self, len: [usize; 2]) -> (usize, usize) {
        match self {
            ResidualCand::AllLeft => (len[0] + len[1], 0),
            ResidualCand::AllRight => (0, len[0] + len[1]),
            ResidualCand::WholeLeft { whole, l } => (len[whole] + l, len[1 - whole] - l + 1),
            ResidualCand::WholeRight { whole, l } => (l, len[1 - whole] - l + 1 + len[whole]),
            ResidualCand::Bridge { xcyc, s } => (len[xcyc] + s, len[1 - xcyc] - s + 2),
            ResidualCand::MirrorWholeLeft { whole, l } => {
                let (a, b) = ResidualCand::WholeLeft { whole, l }.sizes(len);
                (b, a)
            }
            ResidualCand::MirrorWholeRight { whole, l } => {
                let (a, b) = ResidualCand::WholeRight { whole, l }.sizes(len);
                (b, a)
            }
            ResidualCand::MirrorBridge { xcyc, s } => {
                let (a, b) = ResidualCand::Bridge { xcyc, s }.sizes(len);
                (b, a)
            }
        }
    }
}

/// Bridge factorization of the product of two disjoint cycles x, y:
/// h2 = (x1 ... xL y1 ... ys), k2 = (x1 y_{s+1} ... yM y1), with s odd.
/// Both factors have odd length, hence are even, and h2 k2 = x y.
fn bridge_pair(n: usize, x: &[u32], y: &[u32], s: usize) -> (Permutation, Permutation) {
    let mut h_cycle = x.to_vec();
    h_cycle.extend_from_slice(&y[..s]);
    let mut k_cycle = Vec::with_capacity(y.len() - s + 2);
    k_cycle.push(x[0]);
    k_cycle.extend_from_slice(&y[s..]);
    k_cycle.push(y[0]);
    let h = Permutation::from_cycles(n, &[h_cycle]).expect("disjoint by construction");
    let k = Permutation::from_cycles(n, &[k_cycle]).expect("disjoint by construction");
    (h, k)
}

/// Build the (h2, k2) pair a candidate describes; h2 k2 = c0 c1 and both
/// factors are even.
fn build_residual_cand(
    n: usize,
    cand: ResidualCand,
    c: [&Vec<u32>; 2],
) -> (Permutation, Permutation) {
    let single = |cyc: &[u32]| Permutation::from_cycles(n, &[cyc.to_vec()]).unwrap();
    match cand {
        ResidualCand::AllLeft => {
            let d = Permutation::from_cycles(n, &[c[0].clone(), c[1].clone()]).unwrap();
            (d, Permutation::identity(n))
        }
        ResidualCand::AllRight => {
            let d = Permutation::from_cycles(n, &[c[0].clone(), c[1].clone()]).unwrap();
            (Permutation::identity(n), d)
        }
        ResidualCand::WholeLeft { whole, l } => {
            let (lambda, rho) = split_cycle(c[1 - whole], l).unwrap();
            let h = Permutation::from_cycles(n, &[c[whole].clone(), lambda]).unwrap();
            (h, single(&rho))
        }
        ResidualCand::WholeRight { whole, l } => {
            let (lambda, rho) = split_cycle(c[1 - whole], l).unwrap();
            let k = Permutation::from_cycles(n, &[rho, c[whole].clone()]).unwrap();
            (single(&lambda), k)
        }
        ResidualCand::Bridge { xcyc, s } => bridge_pair(n, c[xcyc], c[1 - xcyc], s),
        ResidualCand::MirrorWholeLeft { whole, l }
        | ResidualCand::MirrorWholeRight { whole, l } => {
            let rev: [Vec<u32>; 2] = [reverse_cycle(c[0]), reverse_cycle(c[1])];
            let inner = match cand {
                ResidualCand::MirrorWholeLeft { .. } => ResidualCand::WholeLeft { whole, l },
                _ => ResidualCand::WholeRight { whole, l },
            };
            let (hp, kp) = build_residual_cand(n, inner, [&rev[0], &rev[1]]);
            (kp.inverse(), hp.inverse())
        }
        ResidualCand::MirrorBridge { xcyc, s } => {
            let rev: [Vec<u32>; 2] = [reverse_cycle(c[0]), reverse_cycle(c[1])];
            let (hp, kp) = bridge_pair(n, &rev[xcyc], &rev[1 - xcyc], s);
            (kp.inverse(), hp.inverse())
        }
    }
}

/// The inverse of a cycle, listed from the same base point.
fn reverse_cycle(c: &[u32]) -> Vec<u32> {
    let mut r = Vec::with_capacity(c.len());
    r.push(c[0]);
    r.extend(c[1..].iter().rev());
    r
}

fn abs_diff(a: Rational, b: Rational) -> Rational {
    (a - b).abs()
}

/// Factor an even permutation g as h k with h, k even,
/// |mu(h) - t mu(g)| <= 3/2 and |mu(k) - (1-t) mu(g)| <= 3/2.
///
/// The output is verified before it is returned: evenness, exact
/// recomposition, and both support bounds.
pub fn split_even(g: &Permutation, t: Rational) -> Result<(Permutation, Permutation), Error> {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    if t < zero || t > one {
        return Err(Error::PhiOutOfRange);
    }
    if !g.is_even() {
        return Err(Error::ParityError);
    }
    let n = g.n();
    let cycles = g.cycle_decomposition().cycles;
    let mu_g = Rational::from_integer(cycles.iter().map(|c| c.len() as i64).sum());
    let budget_h = t * mu_g;
    let budget_k = (one - t) * mu_g;

    let mut pack = Packing {
        assigned: vec![0u8; cycles.len()],
    };
    let r1 = pack_side(&cycles, &mut pack, 1, budget_h);
    let r2 = pack_side(&cycles, &mut pack, 2, budget_k);

    let h1_cycles: Vec<Vec<u32>> = cycles
        .iter()
        .zip(&pack.assigned)
        .filter(|(_, &a)| a == 1)
        .map(|(c, _)| c.clone())
        .collect();
    let k1_cycles: Vec<Vec<u32>> = cycles
        .iter()
        .zip(&pack.assigned)
        .filter(|(_, &a)| a == 2)
        .map(|(c, _)| c.clone())
        .collect();
    let residual: Vec<&Vec<u32>> = cycles
        .iter()
        .zip(&pack.assigned)
        .filter(|(_, &a)| a == 0)
        .map(|(c, _)| c)
        .collect();

    let h1 = Permutation::from_cycles(n, &h1_cycles)?;
    let k1 = Permutation::from_cycles(n, &k1_cycles)?;

    let (h, k) = match residual.len() {
        0 => (h1, k1),
        1 => {
            let d_cycle = residual[0];
            if d_cycle.len() % 2 == 0 {
                return Err(Error::ResidualShape);
            }
            let mu_d = d_cycle.len();
            let three_halves = Rational::new(3, 2);
            if r1 <= three_halves {
                // k absorbs the whole residual cycle.
                let d = Permutation::from_cycles(n, &[d_cycle.clone()])?;
                (h1, k1.compose(&d))
            } else if r2 <= three_halves {
                let d = Permutation::from_cycles(n, &[d_cycle.clone()])?;
                (h1.compose(&d), k1)
            } else {
                // Both remainders exceed 3/2, so mu_d >= 5 and the unique odd
                // l in [r1 - 1/2, r1 + 3/2) satisfies 3 <= l <= mu_d - 2.
                let lo = r1 - Rational::new(1, 2);
                let mut l = lo.ceil().to_integer();
                if l % 2 == 0 {
                    l += 1;
                }
                let l = l as usize;
                assert!((3..=mu_d - 2).contains(&l));
                let (lambda, rho) = split_cycle(d_cycle, l)?;
                let h2 = Permutation::from_cycles(n, &[lambda])?;
                let k2 = Permutation::from_cycles(n, &[rho])?;
                (h1.compose(&h2), k2.compose(&k1))
            }
        }
        2 => {
            let (c0, c1) = (residual[0], residual[1]);
            if c0.len() % 2 != 0 || c1.len() % 2 != 0 {
                return Err(Error::ResidualShape);
            }
            let len = [c0.len(), c1.len()];
            let mut cands = vec![ResidualCand::AllLeft, ResidualCand::AllRight];
            for whole in 0..2usize {
                let other = len[1 - whole];
                for l in 2..other {
                    if l % 2 == 0 {
                        cands.push(ResidualCand::WholeLeft { whole, l });
                        cands.push(ResidualCand::MirrorWholeLeft { whole, l });
                    } else {
                        cands.push(ResidualCand::WholeRight { whole, l });
                        cands.push(ResidualCand::MirrorWholeRight { whole, l });
                    }
                }
            }
            for xcyc in 0..2usize {
                let mut s = 1;
                while s <= len[1 - xcyc] - 1 {
                    cands.push(ResidualCand::Bridge { xcyc, s });
                    cands.push(ResidualCand::MirrorBridge { xcyc, s });
                    s += 2;
                }
            }
            let slack_of = |cand: ResidualCand| {
                let (a, b) = cand.sizes(len);
                let s1 = abs_diff(Rational::from_integer(a as i64), r1);
                let s2 = abs_diff(Rational::from_integer(b as i64), r2);
                if s1 > s2 {
                    s1
                } else {
                    s2
                }
            };
            let best = *cands
                .iter()
                .min_by(|&&a, &&b| slack_of(a).cmp(&slack_of(b)))
                .expect("candidate list is nonempty");
            if slack_of(best) > Rational::new(3, 2) {
                return Err(Error::BoundViolation);
            }
            let (h2, k2) = build_residual_cand(n, best, [c0, c1]);
            (h1.compose(&h2), k2.compose(&k1))
        }
        _ => return Err(Error::ResidualShape),
    };

    // Verify the full contract before returning.
    let three_halves = Rational::new(3, 2);
    let mu_h = Rational::from_integer(support_count(&h) as i64);
    let mu_k = Rational::from_integer(support_count(&k) as i64);
    let ok = h.is_even()
        && k.is_even()
        && h.compose(&k) == *g
        && abs_diff(mu_h, t * mu_g) <= three_halves
        && abs_diff(mu_k, (one - t) * mu_g) <= three_halves;
    if !ok {
        return Err(Error::BoundViolation);
    }
    Ok((h, k))
}

/// Near-midpoint z = x h, where (h, _) = split_even(x^-1 y, 1/2). Both
/// distances d(x,z) and d(z,y) are at most d(x,y)/2 + 3/(2n).
pub fn midpoint_perm(x: &Permutation, y: &Permutation) -> Result<Permutation, Error> {
    if x.n() != y.n() {
        return Err(Error::ShapeMismatch);
    }
    let g = x.inverse().compose(y);
    let (h, _) = split_even(&g, Rational::new(1, 2))?;
    Ok(x.compose(&h))
}

/// Deterministic uniform even permutation: Fisher-Yates from the given
/// generator, with a final transposition of points 0, 1 if the shuffle
/// came out odd.
pub fn random_even(n: usize, rng: &mut SplitMix64) -> Permutation {
    let mut images: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        images.swap(i, j);
    }
    let mut g = Permutation { images };
    if !g.is_even() {
        g.images.swap(0, 1);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(n: usize, cycles: &[&[u32]]) -> Permutation {
        let owned: Vec<Vec<u32>> = cycles.iter().map(|c| c.to_vec()).collect();
        Permutation::from_cycles(n, &owned).unwrap()
    }

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn support_count_examples() {
        assert_eq!(support_count(&Permutation::identity(7)), 0);
        assert_eq!(support_count(&perm(5, &[&[0, 1, 2]])), 3);
        assert_eq!(support_count(&perm(6, &[&[0, 1], &[2, 3]])), 4);
    }

    #[test]
    fn composition_is_left_to_right() {
        // (0 1) then (1 2): 0 -> 1 -> 2.
        let a = perm(3, &[&[0, 1]]);
        let b = perm(3, &[&[1, 2]]);
        let ab = a.compose(&b);
        assert_eq!(ab.apply(0), 2);
        assert_eq!(ab.apply(1), 0);
        assert_eq!(ab.apply(2), 1);
    }

    #[test]
    fn hamming_examples() {
        let g = perm(6, &[&[0, 1, 2]]);
        assert_eq!(hamming_distance(&g, &g).unwrap(), rat(0, 1));
        let id4 = Permutation::identity(4);
        let dbl = perm(4, &[&[0, 1], &[2, 3]]);
        assert_eq!(hamming_distance(&id4, &dbl).unwrap(), rat(1, 1));
        // d((1 2 3),(1 3 2)) in S_5 is mu((1 2 3))/5 = 3/5.
        let c = perm(5, &[&[0, 1, 2]]);
        let ci = perm(5, &[&[0, 2, 1]]);
        assert_eq!(hamming_distance(&c, &ci).unwrap(), rat(3, 5));
        // Bi-invariance on a sample.
        let w = perm(5, &[&[1, 3], &[2, 4]]);
        assert_eq!(
            hamming_distance(&w.compose(&c), &w.compose(&ci)).unwrap(),
            rat(3, 5)
        );
        assert_eq!(
            hamming_distance(&c.compose(&w), &ci.compose(&w)).unwrap(),
            rat(3, 5)
        );
    }

    #[test]
    fn split_cycle_examples() {
        // (0 1 2 3 4) at l = 3.
        let (l, r) = split_cycle(&[0, 1, 2, 3, 4], 3).unwrap();
        assert_eq!(l, vec![0, 1, 2]);
        assert_eq!(r, vec![0, 3, 4]);
        let (l, r) = split_cycle(&[0, 1, 2], 2).unwrap();
        assert_eq!(l, vec![0, 1]);
        assert_eq!(r, vec![0, 2]);
        let (l, r) = split_cycle(&[0, 1, 2, 3], 2).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(r.len(), 3);
        assert_eq!(split_cycle(&[0, 1, 2], 1), Err(Error::LengthOutOfRange));
        assert_eq!(split_cycle(&[0, 1, 2], 3), Err(Error::LengthOutOfRange));
    }

    #[test]
    fn split_cycle_composes_back() {
        for m in 3..10usize {
            let pi: Vec<u32> = (0..m as u32).collect();
            for l in 2..m {
                let (lam, rho) = split_cycle(&pi, l).unwrap();
                assert_eq!(lam.len(), l);
                assert_eq!(rho.len(), m - l + 1);
                let pl = perm(m, &[&lam]);
                let pr = perm(m, &[&rho]);
                assert_eq!(pl.compose(&pr), perm(m, &[&pi]));
                // The factors share exactly the base point.
                let shared: Vec<u32> =
                    lam.iter().filter(|p| rho.contains(p)).copied().collect();
                assert_eq!(shared, vec![pi[0]]);
            }
        }
    }

    fn check_contract(g: &Permutation, t: Rational) {
        let (h, k) = split_even(g, t).unwrap();
        assert!(h.is_even() && k.is_even());
        assert_eq!(h.compose(&k), *g);
        let mu_g = support_count(g) as i64;
        let mu_h = Rational::from_integer(support_count(&h) as i64);
        let mu_k = Rational::from_integer(support_count(&k) as i64);
        let bound = rat(3, 2);
        assert!((mu_h - t * Rational::from_integer(mu_g)).abs() <= bound);
        assert!(
            (mu_k - (Rational::from_integer(1) - t) * Rational::from_integer(mu_g)).abs() <= bound
        );
    }

    #[test]
    fn split_even_endpoints() {
        let g = perm(9, &[&[0, 1, 2], &[3, 4, 5, 6, 7]]);
        let (h, k) = split_even(&g, rat(0, 1)).unwrap();
        assert!(h.is_identity());
        assert_eq!(k, g);
        let (h, k) = split_even(&g, rat(1, 1)).unwrap();
        assert_eq!(h, g);
        assert!(k.is_identity());
    }

    #[test]
    fn split_even_two_three_cycles() {
        let g = perm(6, &[&[0, 1, 2], &[3, 4, 5]]);
        let (h, k) = split_even(&g, rat(1, 2)).unwrap();
        assert_eq!(h, perm(6, &[&[0, 1, 2]]));
        assert_eq!(k, perm(6, &[&[3, 4, 5]]));
    }

    #[test]
    fn split_even_five_cycle_splits_interior() {
        let g = perm(5, &[&[0, 1, 2, 3, 4]]);
        check_contract(&g, rat(1, 2));
        let (h, k) = split_even(&g, rat(1, 2)).unwrap();
        // Budgets 5/2 each force the interior split into two 3-cycles.
        assert_eq!(support_count(&h), 3);
        assert_eq!(support_count(&k), 3);
    }

    #[test]
    fn split_even_two_transpositions_bridges() {
        let g = perm(6, &[&[0, 1], &[2, 3]]);
        check_contract(&g, rat(1, 2));
        let (h, k) = split_even(&g, rat(1, 2)).unwrap();
        assert_eq!(support_count(&h), 3);
        assert_eq!(support_count(&k), 3);
    }

    #[test]
    fn split_even_rejects_odd_input() {
        let g = perm(4, &[&[0, 1]]);
        assert_eq!(split_even(&g, rat(1, 2)), Err(Error::ParityError));
        let g2 = perm(4, &[&[0, 1, 2]]);
        assert_eq!(split_even(&g2, rat(3, 2)), Err(Error::PhiOutOfRange));
        assert_eq!(split_even(&g2, rat(-1, 2)), Err(Error::PhiOutOfRange));
    }

    #[test]
    fn split_even_exhaustive_small() {
        // Every even permutation of 4 and 5 points, t on a grid of ninths.
        for n in [4usize, 5] {
            let mut images: Vec<u32> = (0..n as u32).collect();
            loop {
                let g = Permutation::from_images(images.clone()).unwrap();
                if g.is_even() {
                    for num in 0..=9 {
                        check_contract(&g, rat(num, 9));
                    }
                }
                if !next_permutation(&mut images) {
                    break;
                }
            }
        }
    }

    fn next_permutation(arr: &mut [u32]) -> bool {
        let n = arr.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && arr[i - 1] >= arr[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while arr[j] <= arr[i - 1] {
            j -= 1;
        }
        arr.swap(i - 1, j);
        arr[i..].reverse();
        true
    }

    #[test]
    fn split_even_mixed_cycle_shapes() {
        // Shapes that force each residual branch.
        let cases: Vec<(usize, Vec<Vec<u32>>)> = vec![
            (10, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]),
            (12, vec![vec![0, 1], vec![2, 3, 4, 5, 6, 7, 8, 9]]),
            (13, vec![vec![0, 1, 2], vec![3, 4], vec![5, 6], vec![7, 8, 9, 10, 11]]),
            (9, vec![vec![0, 1, 2, 3, 4, 5, 6]]),
            (11, vec![vec![0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10]]),
        ];
        for (n, cycles) in cases {
            let g = Permutation::from_cycles(n, &cycles).unwrap();
            for num in 0..=8 {
                check_contract(&g, rat(num, 8));
            }
            check_contract(&g, rat(1, 3));
            check_contract(&g, rat(7, 11));
        }
    }

    #[test]
    fn midpoint_examples() {
        let x = perm(6, &[&[0, 1, 2]]);
        assert_eq!(midpoint_perm(&x, &x).unwrap(), x);
        let id = Permutation::identity(6);
        let y = perm(6, &[&[0, 1, 2], &[3, 4, 5]]);
        let z = midpoint_perm(&id, &y).unwrap();
        let l = hamming_distance(&id, &y).unwrap();
        let eps = rat(3, 12);
        assert!(hamming_distance(&id, &z).unwrap() <= l / 2 + eps);
        assert!(hamming_distance(&z, &y).unwrap() <= l / 2 + eps);
        // A_9 example: distances from the midpoint within 5/18 + 3/18.
        let id9 = Permutation::identity(9);
        let y9 = perm(9, &[&[0, 1, 2, 3, 4]]);
        let z9 = midpoint_perm(&id9, &y9).unwrap();
        let cap = rat(5, 18) + rat(3, 18);
        assert!(hamming_distance(&id9, &z9).unwrap() <= cap);
        assert!(hamming_distance(&z9, &y9).unwrap() <= cap);
    }

    #[test]
    fn random_even_is_even_and_deterministic() {
        let mut r1 = SplitMix64::new(42);
        let mut r2 = SplitMix64::new(42);
        for n in [2usize, 3, 7, 30] {
            let a = random_even(n, &mut r1);
            let b = random_even(n, &mut r2);
            assert!(a.is_even());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn random_split_contract_holds() {
        let mut rng = SplitMix64::new(7);
        for n in [6usize, 10, 50] {
            for _ in 0..60 {
                let g = random_even(n, &mut rng);
                let num = rng.below(101) as i64;
                check_contract(&g, rat(num, 100));
            }
        }
    }

    #[test]
    fn from_images_validates() {
        assert!(Permutation::from_images(vec![1, 0, 2]).is_ok());
        assert_eq!(
            Permutation::from_images(vec![1, 1, 2]),
            Err(Error::InvalidPayload)
        );
        assert_eq!(
            Permutation::from_images(vec![0, 3]),
            Err(Error::InvalidPayload)
        );
        assert_eq!(
            Permutation::from_cycles(5, &[vec![0, 1], vec![1, 2]]),
            Err(Error::InvalidPayload)
        );
    }

    #[test]
    fn cycle_decomposition_is_canonical() {
        let g = perm(8, &[&[4, 6, 5], &[0, 2]]);
        let dec = g.cycle_decomposition();
        assert_eq!(dec.cycles, vec![vec![0, 2], vec![4, 6, 5]]);
        // Each cycle starts at its smallest point.
        for c in &dec.cycles {
            assert!(c.iter().all(|p| p >= &c[0]));
        }
    }
}
