//! Concrete vectors of the sequence-space model: a finitely supported
//! exact part plus one power-law tail per index block.
//!
//! Coordinates are 1-based; coordinate n belongs to block n mod k. A
//! vector is `finite_part` on coordinates ≤ tail_start and equals
//! c_j·n^{σ_j} on block j beyond it. Membership in a weighted space V_α,
//! compatibility, and the inner product's definedness are all decided by
//! exact exponent comparisons; only the convergent tail sums themselves
//! are evaluated numerically, with integral-test remainder bounds.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::Zero;
use thiserror::Error;

use crate::lattice::{BlockExponent, IndexLattice, SpaceIndex};
use crate::scalar::{cabs_f64, conj, crat_to_f64, czero, exact_pow, rat_to_f64, CRat};

/// Hard cap on summed tail terms per block before giving up on a tolerance.
const MAX_TAIL_TERMS: u64 = 100_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VectorError {
    #[error("vector has {found} blocks, expected {expected}")]
    BlockMismatch { expected: usize, found: usize },
    #[error("coordinates are 1-based; index 0 is invalid")]
    InvalidCoordinate,
    #[error("finite part supported at {index}, beyond tail start {tail_start}")]
    FiniteSupportBeyondTailStart { index: u64, tail_start: u64 },
    #[error("inner product undefined: the pair is incompatible")]
    IncompatiblePair,
    #[error("tolerance must be positive")]
    NonPositiveTolerance,
    #[error("tolerance not reachable within {0} tail terms per block")]
    ToleranceUnreachable(u64),
    #[error("coordinate {0} has an irrational value (non-integer tail exponent); exact arithmetic unavailable")]
    ExactPowerUnavailable(u64),
    #[error("tails on block {0} carry different exponents; sum is not a single power law")]
    TailsNotAligned(usize),
}

/// One power-law tail c·n^σ on a block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tail {
    pub coefficient: CRat,
    pub exponent: BigRational,
}

impl Tail {
    pub fn new(coefficient: CRat, exponent: BigRational) -> Self {
        Tail {
            coefficient,
            exponent,
        }
    }

    pub fn zero() -> Self {
        Tail {
            coefficient: czero(),
            exponent: BigRational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient.re.is_zero() && self.coefficient.im.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipVector {
    blocks: usize,
    tail_start: u64,
    finite: BTreeMap<u64, CRat>,
    tails: Vec<Tail>,
}

impl PipVector {
    pub fn new(
        blocks: usize,
        tail_start: u64,
        finite: BTreeMap<u64, CRat>,
        tails: Vec<Tail>,
    ) -> Result<Self, VectorError> {
        if tails.len() != blocks {
            return Err(VectorError::BlockMismatch {
                expected: blocks,
                found: tails.len(),
            });
        }
        let mut pruned = BTreeMap::new();
        for (idx, v) in finite {
            if idx == 0 {
                return Err(VectorError::InvalidCoordinate);
            }
            if idx > tail_start {
                return Err(VectorError::FiniteSupportBeyondTailStart {
                    index: idx,
                    tail_start,
                });
            }
            if !(v.re.is_zero() && v.im.is_zero()) {
                pruned.insert(idx, v);
            }
        }
        let tails = tails
            .into_iter()
            .map(|t| if t.is_zero() { Tail::zero() } else { t })
            .collect();
        Ok(PipVector {
            blocks,
            tail_start,
            finite: pruned,
            tails,
        })
    }

    /// The coordinate vector e_n.
    pub fn basis(blocks: usize, n: u64) -> Self {
        let mut finite = BTreeMap::new();
        finite.insert(n, crate::scalar::cone());
        PipVector::new(blocks, n, finite, vec![Tail::zero(); blocks]).expect("valid basis vector")
    }

    /// Vector that is a single tail c·n^σ on one block, zero elsewhere.
    pub fn pure_tail(
        blocks: usize,
        block: usize,
        coefficient: CRat,
        exponent: BigRational,
    ) -> Self {
        let mut tails = vec![Tail::zero(); blocks];
        tails[block] = Tail::new(coefficient, exponent);
        PipVector::new(blocks, 0, BTreeMap::new(), tails).expect("valid tail vector")
    }

    pub fn zero(blocks: usize) -> Self {
        PipVector::new(blocks, 0, BTreeMap::new(), vec![Tail::zero(); blocks])
            .expect("valid zero vector")
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn tail_start(&self) -> u64 {
        self.tail_start
    }

    pub fn finite_part(&self) -> &BTreeMap<u64, CRat> {
        &self.finite
    }

    pub fn tails(&self) -> &[Tail] {
        &self.tails
    }

    pub fn block_of(&self, n: u64) -> usize {
        (n % self.blocks as u64) as usize
    }

    pub fn is_zero(&self) -> bool {
        self.finite.is_empty() && self.tails.iter().all(Tail::is_zero)
    }

    /// Exact value at a coordinate, when it is rational.
    pub fn coordinate(&self, n: u64) -> Result<CRat, VectorError> {
        if n == 0 {
            return Err(VectorError::InvalidCoordinate);
        }
        if n <= self.tail_start {
            return Ok(self.finite.get(&n).cloned().unwrap_or_else(czero));
        }
        let t = &self.tails[self.block_of(n)];
        if t.is_zero() {
            return Ok(czero());
        }
        let p = exact_pow(n, &t.exponent).ok_or(VectorError::ExactPowerUnavailable(n))?;
        Ok(CRat::new(&t.coefficient.re * &p, &t.coefficient.im * &p))
    }

    /// Whether the coordinate vanishes; decidable for every tail exponent.
    pub fn coordinate_is_zero(&self, n: u64) -> bool {
        if n == 0 {
            return true;
        }
        if n <= self.tail_start {
            return !self.finite.contains_key(&n);
        }
        self.tails[self.block_of(n)].is_zero()
    }

    /// Decides f ∈ V_α: every active tail must satisfy σ_j + α_j < −1/2.
    pub fn member(&self, index: &SpaceIndex) -> Result<bool, VectorError> {
        match index {
            SpaceIndex::Top => Ok(true),
            SpaceIndex::Bottom => Ok(self.tails.iter().all(Tail::is_zero)),
            SpaceIndex::At(alpha) => {
                if alpha.blocks() != self.blocks {
                    return Err(VectorError::BlockMismatch {
                        expected: self.blocks,
                        found: alpha.blocks(),
                    });
                }
                let half = crate::scalar::ratio(-1, 2);
                Ok(self
                    .tails
                    .iter()
                    .enumerate()
                    .all(|(j, t)| t.is_zero() || t.exponent.clone() + alpha.component(j) < half))
            }
        }
    }

    pub fn member_at(&self, alpha: &BlockExponent) -> Result<bool, VectorError> {
        self.member(&SpaceIndex::At(alpha.clone()))
    }

    pub fn scale(&self, c: &CRat) -> PipVector {
        let finite = self
            .finite
            .iter()
            .map(|(k, v)| (*k, v.clone() * c.clone()))
            .collect();
        let tails = self
            .tails
            .iter()
            .map(|t| Tail::new(t.coefficient.clone() * c.clone(), t.exponent.clone()))
            .collect();
        PipVector::new(self.blocks, self.tail_start, finite, tails)
            .expect("scaling preserves shape")
    }

    /// Same vector re-expressed with a later tail start; the gap
    /// coordinates are materialized exactly into the finite part.
    pub fn with_tail_start(&self, n: u64) -> Result<PipVector, VectorError> {
        if n <= self.tail_start {
            return Ok(self.clone());
        }
        let mut finite = self.finite.clone();
        for idx in self.tail_start + 1..=n {
            let v = self.coordinate(idx)?;
            if !(v.re.is_zero() && v.im.is_zero()) {
                finite.insert(idx, v);
            }
        }
        PipVector::new(self.blocks, n, finite, self.tails.clone())
    }

    /// Exact sum; tails on a shared block must carry equal exponents.
    pub fn add(&self, other: &PipVector) -> Result<PipVector, VectorError> {
        if other.blocks != self.blocks {
            return Err(VectorError::BlockMismatch {
                expected: self.blocks,
                found: other.blocks,
            });
        }
        let n = self.tail_start.max(other.tail_start);
        let a = self.with_tail_start(n)?;
        let b = other.with_tail_start(n)?;
        let mut finite = a.finite.clone();
        for (idx, v) in &b.finite {
            let entry = finite.entry(*idx).or_insert_with(czero);
            *entry = entry.clone() + v.clone();
        }
        let mut tails = Vec::with_capacity(self.blocks);
        for (j, (ta, tb)) in a.tails.iter().zip(&b.tails).enumerate() {
            let t = if ta.is_zero() {
                tb.clone()
            } else if tb.is_zero() {
                ta.clone()
            } else if ta.exponent == tb.exponent {
                Tail::new(
                    ta.coefficient.clone() + tb.coefficient.clone(),
                    ta.exponent.clone(),
                )
            } else {
                return Err(VectorError::TailsNotAligned(j));
            };
            tails.push(t);
        }
        PipVector::new(self.blocks, n, finite, tails)
    }

    /// Exact semantic equality, aligning tail starts first.
    pub fn equivalent(&self, other: &PipVector) -> Result<bool, VectorError> {
        if other.blocks != self.blocks {
            return Ok(false);
        }
        let n = self.tail_start.max(other.tail_start);
        let a = self.with_tail_start(n)?;
        let b = other.with_tail_start(n)?;
        Ok(a.finite == b.finite
            && a.tails
                .iter()
                .zip(&b.tails)
                .all(|(x, y)| x == y || (x.is_zero() && y.is_zero())))
    }
}

/// Outcome of the compatibility search f # g relative to a lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compatibility {
    /// Absolutely convergent, certified by a lattice element r with
    /// f ∈ V_r and g ∈ V_r̄ (first such r in canonical order).
    Witnessed(BlockExponent),
    /// Absolutely convergent, but no lattice element certifies it.
    AbsoluteOnly,
    Incompatible,
}

impl Compatibility {
    pub fn is_compatible(&self) -> bool {
        !matches!(self, Compatibility::Incompatible)
    }
}

/// Σ|f_n g_n| < ∞ ⇔ σ_f + σ_g < −1 on every jointly active block;
/// a lattice witness is searched in canonical order.
pub fn compatible(
    f: &PipVector,
    g: &PipVector,
    lattice: &IndexLattice,
) -> Result<Compatibility, VectorError> {
    if f.blocks() != g.blocks() {
        return Err(VectorError::BlockMismatch {
            expected: f.blocks(),
            found: g.blocks(),
        });
    }
    let minus_one = crate::scalar::rat(-1);
    let absolute = f.tails().iter().zip(g.tails()).all(|(tf, tg)| {
        tf.is_zero() || tg.is_zero() || tf.exponent.clone() + tg.exponent.clone() < minus_one
    });
    if !absolute {
        return Ok(Compatibility::Incompatible);
    }
    for r in lattice.elements() {
        if f.member_at(r)? && g.member_at(&r.negated())? {
            return Ok(Compatibility::Witnessed(r.clone()));
        }
    }
    Ok(Compatibility::AbsoluteOnly)
}

/// Value of a partial inner product: an exactly accumulated head, a
/// numerically evaluated tail, and a certified absolute error bound.
#[derive(Debug, Clone)]
pub struct InnerProductValue {
    /// Exact contribution of all coordinates ≤ max tail start (when those
    /// coordinates are rational; irrational heads go into the float part).
    pub exact_head: CRat,
    /// Float estimate of the full sum (head + tails).
    pub value: (f64, f64),
    /// Certified bound: |value − true sum| ≤ error_bound.
    pub error_bound: f64,
}

impl InnerProductValue {
    /// Real-axis enclosure [value.0 − bound, value.0 + bound].
    pub fn real_enclosure(&self) -> (f64, f64) {
        (
            self.value.0 - self.error_bound,
            self.value.0 + self.error_bound,
        )
    }
}

/// ⟨f, g⟩ = Σ conj(f_n)·g_n, conjugate-linear in f and linear in g,
/// defined exactly on compatible pairs.
pub fn partial_inner_product(
    f: &PipVector,
    g: &PipVector,
    lattice: &IndexLattice,
    tol: &BigRational,
) -> Result<InnerProductValue, VectorError> {
    if tol <= &BigRational::zero() {
        return Err(VectorError::NonPositiveTolerance);
    }
    if !compatible(f, g, lattice)?.is_compatible() {
        return Err(VectorError::IncompatiblePair);
    }
    let tol_f = rat_to_f64(tol);
    let blocks = f.blocks() as u64;
    let head_end = f.tail_start().max(g.tail_start());

    // Head: exact where coordinates are rational, f64 otherwise.
    let mut exact_head = czero();
    let mut float_head = (0.0f64, 0.0f64);
    let mut abs_accum = 0.0f64;
    let mut op_count: u64 = 0;
    for n in 1..=head_end {
        if f.coordinate_is_zero(n) || g.coordinate_is_zero(n) {
            continue;
        }
        match (f.coordinate(n), g.coordinate(n)) {
            (Ok(a), Ok(b)) => {
                exact_head += conj(&a) * b;
            }
            _ => {
                let (fa, fb) = (coordinate_f64(f, n), coordinate_f64(g, n));
                let prod = complex_mul(complex_conj(fa), fb);
                float_head.0 += prod.0;
                float_head.1 += prod.1;
                abs_accum += prod.0.hypot(prod.1);
                op_count += 3;
            }
        }
    }

    // Tails: per block, w · Σ_{n > head_end, n ≡ j} n^s with s < −1.
    let mut tail_value = (0.0f64, 0.0f64);
    let mut remainder_bound = 0.0f64;
    let active: Vec<usize> = (0..f.blocks())
        .filter(|&j| !f.tails()[j].is_zero() && !g.tails()[j].is_zero())
        .collect();
    if !active.is_empty() {
        let budget = tol_f / (2.0 * active.len() as f64);
        for &j in &active {
            let tf = &f.tails()[j];
            let tg = &g.tails()[j];
            let w = conj(&tf.coefficient) * tg.coefficient.clone();
            let w_abs = cabs_f64(&w) * (1.0 + 1e-12);
            let s = rat_to_f64(&(tf.exponent.clone() + tg.exponent.clone()));
            // first coordinate of block j strictly beyond the head
            let mut n = head_end + 1;
            while n % blocks != j as u64 {
                n += 1;
            }
            let mut series = 0.0f64;
            let mut terms: u64 = 0;
            loop {
                series += (n as f64).powf(s);
                terms += 1;
                // Σ_{m≥1} (n+mk)^s ≤ (1/k)∫_n^∞ x^s dx = n^{s+1}/(k(−s−1))
                let rem = (n as f64).powf(s + 1.0) / (blocks as f64 * (-s - 1.0));
                if w_abs * rem <= budget {
                    remainder_bound += w_abs * rem;
                    break;
                }
                if terms >= MAX_TAIL_TERMS {
                    return Err(VectorError::ToleranceUnreachable(MAX_TAIL_TERMS));
                }
                n += blocks;
            }
            let (wr, wi) = crat_to_f64(&w);
            tail_value.0 += wr * series;
            tail_value.1 += wi * series;
            abs_accum += w_abs * series;
            op_count += 2 * terms;
        }
    }

    let float_slop = if op_count == 0 {
        0.0
    } else {
        4.0 * op_count as f64 * f64::EPSILON * abs_accum.max(1.0)
    };
    let error_bound = remainder_bound + float_slop;
    if error_bound > tol_f {
        return Err(VectorError::ToleranceUnreachable(MAX_TAIL_TERMS));
    }
    let (hr, hi) = crat_to_f64(&exact_head);
    Ok(InnerProductValue {
        exact_head,
        value: (
            hr + float_head.0 + tail_value.0,
            hi + float_head.1 + tail_value.1,
        ),
        error_bound,
    })
}

fn coordinate_f64(v: &PipVector, n: u64) -> (f64, f64) {
    if n <= v.tail_start() {
        v.finite_part()
            .get(&n)
            .map(crat_to_f64)
            .unwrap_or((0.0, 0.0))
    } else {
        let t = &v.tails()[v.block_of(n)];
        if t.is_zero() {
            (0.0, 0.0)
        } else {
            let p = (n as f64).powf(rat_to_f64(&t.exponent));
            let (cr, ci) = crat_to_f64(&t.coefficient);
            (cr * p, ci * p)
        }
    }
}

fn complex_conj(z: (f64, f64)) -> (f64, f64) {
    (z.0, -z.1)
}

fn complex_mul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// Tail part that may carry several power laws per block. This is the
/// closure of [`PipVector`] under diagonal symbol action; it exists so
/// well-definedness checks stay exact even when an operator mixes
/// exponents on one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiTailVector {
    blocks: usize,
    tail_start: u64,
    finite: BTreeMap<u64, CRat>,
    tails: Vec<Vec<(BigRational, CRat)>>,
}

impl MultiTailVector {
    pub fn from_pip(v: &PipVector) -> Self {
        MultiTailVector {
            blocks: v.blocks(),
            tail_start: v.tail_start(),
            finite: v.finite_part().clone(),
            tails: v
                .tails()
                .iter()
                .map(|t| {
                    if t.is_zero() {
                        Vec::new()
                    } else {
                        vec![(t.exponent.clone(), t.coefficient.clone())]
                    }
                })
                .collect(),
        }
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn tail_start(&self) -> u64 {
        self.tail_start
    }

    pub fn finite_part(&self) -> &BTreeMap<u64, CRat> {
        &self.finite
    }

    pub fn tail_terms(&self, block: usize) -> &[(BigRational, CRat)] {
        &self.tails[block]
    }

    pub fn build(
        blocks: usize,
        tail_start: u64,
        finite: BTreeMap<u64, CRat>,
        tails: Vec<Vec<(BigRational, CRat)>>,
    ) -> Self {
        let finite = finite
            .into_iter()
            .filter(|(_, v)| !(v.re.is_zero() && v.im.is_zero()))
            .collect();
        let tails = tails.into_iter().map(normalize_terms).collect();
        MultiTailVector {
            blocks,
            tail_start,
            finite,
            tails,
        }
    }

    pub fn with_tail_start(&self, n: u64) -> Result<MultiTailVector, VectorError> {
        if n <= self.tail_start {
            return Ok(self.clone());
        }
        let mut finite = self.finite.clone();
        for idx in self.tail_start + 1..=n {
            let j = (idx % self.blocks as u64) as usize;
            let mut val = czero();
            for (sigma, c) in &self.tails[j] {
                let p = exact_pow(idx, sigma).ok_or(VectorError::ExactPowerUnavailable(idx))?;
                val += CRat::new(&c.re * &p, &c.im * &p);
            }
            if !(val.re.is_zero() && val.im.is_zero()) {
                finite.insert(idx, val);
            }
        }
        Ok(MultiTailVector::build(
            self.blocks,
            n,
            finite,
            self.tails.clone(),
        ))
    }

    pub fn add(&self, other: &MultiTailVector) -> Result<MultiTailVector, VectorError> {
        if other.blocks != self.blocks {
            return Err(VectorError::BlockMismatch {
                expected: self.blocks,
                found: other.blocks,
            });
        }
        let n = self.tail_start.max(other.tail_start);
        let a = self.with_tail_start(n)?;
        let b = other.with_tail_start(n)?;
        let mut finite = a.finite.clone();
        for (idx, v) in &b.finite {
            let entry = finite.entry(*idx).or_insert_with(czero);
            *entry = entry.clone() + v.clone();
        }
        let tails = a
            .tails
            .iter()
            .zip(&b.tails)
            .map(|(x, y)| {
                let mut merged = x.clone();
                merged.extend(y.iter().cloned());
                merged
            })
            .collect();
        Ok(MultiTailVector::build(self.blocks, n, finite, tails))
    }

    /// Collapses to a plain vector when each block carries at most one
    /// power law.
    pub fn into_pip(self) -> Result<PipVector, VectorError> {
        let mut tails = Vec::with_capacity(self.blocks);
        for (j, terms) in self.tails.iter().enumerate() {
            match terms.len() {
                0 => tails.push(Tail::zero()),
                1 => tails.push(Tail::new(terms[0].1.clone(), terms[0].0.clone())),
                _ => return Err(VectorError::TailsNotAligned(j)),
            }
        }
        PipVector::new(self.blocks, self.tail_start, self.finite, tails)
    }

    pub fn equivalent(&self, other: &MultiTailVector) -> Result<bool, VectorError> {
        if other.blocks != self.blocks {
            return Ok(false);
        }
        let n = self.tail_start.max(other.tail_start);
        let a = self.with_tail_start(n)?;
        let b = other.with_tail_start(n)?;
        Ok(a == b)
    }

    /// Every power law on every active block must satisfy σ + α < −1/2.
    pub fn member_at(&self, alpha: &BlockExponent) -> Result<bool, VectorError> {
        if alpha.blocks() != self.blocks {
            return Err(VectorError::BlockMismatch {
                expected: self.blocks,
                found: alpha.blocks(),
            });
        }
        let half = crate::scalar::ratio(-1, 2);
        Ok(self.tails.iter().enumerate().all(|(j, terms)| {
            terms
                .iter()
                .all(|(sigma, _)| sigma.clone() + alpha.component(j) < half)
        }))
    }

    /// Support-based absolute-convergence test for Σ|f_n g_n|: every
    /// cross pair of power laws on a shared block must have σ+σ' < −1.
    pub fn absolutely_compatible(&self, other: &MultiTailVector) -> bool {
        let minus_one = crate::scalar::rat(-1);
        self.tails.iter().zip(&other.tails).all(|(xs, ys)| {
            xs.iter()
                .all(|(sx, _)| ys.iter().all(|(sy, _)| sx.clone() + sy.clone() < minus_one))
        })
    }
}

fn normalize_terms(terms: Vec<(BigRational, CRat)>) -> Vec<(BigRational, CRat)> {
    let mut merged: BTreeMap<BigRational, CRat> = BTreeMap::new();
    for (sigma, c) in terms {
        let entry = merged.entry(sigma).or_insert_with(czero);
        *entry = entry.clone() + c;
    }
    merged
        .into_iter()
        .filter(|(_, c)| !(c.re.is_zero() && c.im.is_zero()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::IndexLattice;
    use crate::scalar::{cone, crat, rat, ratio};

    fn l1() -> IndexLattice {
        IndexLattice::close(&[BlockExponent::from_ints(&[1])], true).unwrap()
    }

    fn tail_vec(sigma: i64) -> PipVector {
        PipVector::pure_tail(1, 0, cone(), rat(sigma))
    }

    #[test]
    fn membership_examples() {
        let f = tail_vec(-1);
        // Σ n^{2(σ+α)} with σ+α = −1 converges
        assert!(f.member_at(&BlockExponent::from_ints(&[0])).unwrap());
        // boundary σ+α = −1/2 diverges and is excluded
        let alpha = BlockExponent::new(vec![ratio(1, 2)]);
        assert!(!f.member_at(&alpha).unwrap());
        // finite vectors lie in every assaying space, including V^#
        let e = PipVector::basis(1, 3);
        assert!(e.member(&SpaceIndex::Bottom).unwrap());
        assert!(e.member_at(&BlockExponent::from_ints(&[5])).unwrap());
        assert!(!f.member(&SpaceIndex::Bottom).unwrap());
        assert!(f.member(&SpaceIndex::Top).unwrap());
    }

    /// Partial-sum oracle with integral-test bounds: the boundary case
    /// σ+α = −1/2 gives Σ n^{-1}, whose partial sums exceed ln(N);
    /// the strict case stays under its finite integral bound.
    #[test]
    fn membership_boundary_divergence_oracle() {
        let n_max = 200_000u64;
        let mut boundary = 0.0f64;
        let mut strict = 0.0f64;
        for n in 1..=n_max {
            boundary += 1.0 / n as f64; // 2(σ+α) = −1
            strict += (n as f64).powf(-1.2);
        }
        assert!(boundary > (n_max as f64 + 1.0).ln());
        assert!(strict < 1.0 + 1.0 / 0.2);
    }

    #[test]
    fn membership_monotone_in_index_order() {
        let l = l1();
        let samples = [
            tail_vec(-1),
            tail_vec(-2),
            tail_vec(0),
            PipVector::basis(1, 2),
        ];
        for f in &samples {
            for r in l.elements() {
                for s in l.elements() {
                    if l.space_leq(r, s).unwrap() && f.member_at(r).unwrap() {
                        assert!(f.member_at(s).unwrap(), "V_{r} ⊆ V_{s} violated");
                    }
                }
            }
        }
    }

    #[test]
    fn compatibility_examples() {
        let l = l1();
        let f = tail_vec(-1);
        assert_eq!(
            compatible(&f, &f, &l).unwrap(),
            Compatibility::Witnessed(BlockExponent::from_ints(&[0]))
        );
        let g = tail_vec(1);
        assert_eq!(compatible(&g, &g, &l).unwrap(), Compatibility::Incompatible);
        // finite vectors are compatible with everything; a growing tail
        // lies in no assaying space, so no lattice witness exists
        let e = PipVector::basis(1, 1);
        assert_eq!(compatible(&e, &g, &l).unwrap(), Compatibility::AbsoluteOnly);
        // with a steep tail every r certifies; the first in canonical
        // order is returned
        let h = tail_vec(-3);
        assert_eq!(
            compatible(&e, &h, &l).unwrap(),
            Compatibility::Witnessed(BlockExponent::from_ints(&[-1]))
        );
    }

    #[test]
    fn absolute_without_lattice_witness_is_surfaced() {
        let l = IndexLattice::close(&[BlockExponent::from_ints(&[0])], false).unwrap();
        let f = tail_vec(0);
        let g = tail_vec(-2);
        assert_eq!(compatible(&f, &g, &l).unwrap(), Compatibility::AbsoluteOnly);
    }

    #[test]
    fn inner_product_of_basis_vectors_is_exact() {
        let l = l1();
        let e1 = PipVector::basis(1, 1);
        let v = partial_inner_product(&e1, &e1, &l, &ratio(1, 1_000_000)).unwrap();
        assert_eq!(v.exact_head, cone());
        assert_eq!(v.value, (1.0, 0.0));
        assert_eq!(v.error_bound, 0.0);
    }

    #[test]
    fn zeta_two_enclosure() {
        let l = l1();
        let f = tail_vec(-1);
        let tol = ratio(1, 1_000_000);
        let v = partial_inner_product(&f, &f, &l, &tol).unwrap();
        let zeta2 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        assert!(v.error_bound <= 1e-6);
        let (lo, hi) = v.real_enclosure();
        assert!(
            lo <= zeta2 && zeta2 <= hi,
            "enclosure [{lo}, {hi}] misses ζ(2)"
        );
        assert!(lo <= 1.6449340668 && 1.6449340668 <= hi);
    }

    #[test]
    fn incompatible_pair_never_returns_a_number() {
        let l = l1();
        let g = tail_vec(1);
        assert_eq!(
            partial_inner_product(&g, &g, &l, &ratio(1, 1000)).unwrap_err(),
            VectorError::IncompatiblePair
        );
        assert_eq!(
            partial_inner_product(&g, &g, &l, &rat(0)).unwrap_err(),
            VectorError::NonPositiveTolerance
        );
    }

    #[test]
    fn inner_product_is_hermitian() {
        let l = l1();
        let f = PipVector::pure_tail(1, 0, crat(1, 2), rat(-1));
        let g = PipVector::pure_tail(1, 0, crat(3, -1), rat(-2));
        let tol = ratio(1, 100_000);
        let fg = partial_inner_product(&f, &g, &l, &tol).unwrap();
        let gf = partial_inner_product(&g, &f, &l, &tol).unwrap();
        assert!((fg.value.0 - gf.value.0).abs() <= fg.error_bound + gf.error_bound);
        assert!((fg.value.1 + gf.value.1).abs() <= fg.error_bound + gf.error_bound);
    }

    #[test]
    fn inner_product_linear_in_second_argument() {
        let l = l1();
        let f = tail_vec(-1);
        let g = tail_vec(-2);
        let h = PipVector::pure_tail(1, 0, crat(2, 0), rat(-2));
        let sum = g.add(&h).unwrap();
        let tol = ratio(1, 1_000_000);
        let a = partial_inner_product(&f, &g, &l, &tol).unwrap();
        let b = partial_inner_product(&f, &h, &l, &tol).unwrap();
        let c = partial_inner_product(&f, &sum, &l, &tol).unwrap();
        let tol_f = 3.0 * 1e-6;
        assert!((c.value.0 - a.value.0 - b.value.0).abs() <= tol_f);
        assert!((c.value.1 - a.value.1 - b.value.1).abs() <= tol_f);
    }

    #[test]
    fn nondegeneracy_on_decidable_coordinates() {
        // pairing against every coordinate vector e_n with n ≤ N+k
        // determines the vector: all pairings zero forces the finite
        // part and every tail coefficient to vanish
        let l = IndexLattice::close(&[BlockExponent::from_ints(&[1, 0])], true).unwrap();
        let blocks = 2usize;
        let tol = ratio(1, 1_000_000);
        let mut finite = BTreeMap::new();
        finite.insert(2u64, crat(0, 3));
        let samples = [
            PipVector::pure_tail(blocks, 1, crat(5, 0), rat(-2)),
            PipVector::new(blocks, 2, finite, vec![Tail::zero(), Tail::zero()]).unwrap(),
            PipVector::zero(blocks),
        ];
        for g in &samples {
            let n_probe = g.tail_start() + blocks as u64;
            let mut all_zero = true;
            for n in 1..=n_probe {
                let e = PipVector::basis(blocks, n);
                let ip = partial_inner_product(&e, g, &l, &tol).unwrap();
                // finite × anything is exact: ⟨e_n, g⟩ = g_n
                assert_eq!(ip.error_bound, 0.0);
                assert_eq!(ip.exact_head, g.coordinate(n).unwrap());
                if !(ip.exact_head.re.is_zero() && ip.exact_head.im.is_zero()) {
                    all_zero = false;
                }
            }
            assert_eq!(all_zero, g.is_zero(), "pairings characterize the vector");
        }
    }

    #[test]
    fn vector_arithmetic_and_alignment() {
        let f = PipVector::pure_tail(2, 1, cone(), rat(-1));
        let shifted = f.with_tail_start(4).unwrap();
        assert!(f.equivalent(&shifted).unwrap());
        assert_eq!(
            shifted.coordinate(3).unwrap(),
            CRat::new(ratio(1, 3), rat(0))
        );
        // coordinate 3 is odd → block 1, carries the tail
        assert!(!shifted.coordinate_is_zero(3));
        // coordinate 2 is even → block 0, zero
        assert!(shifted.coordinate_is_zero(2));
        let sum = f.add(&f.scale(&crat(-1, 0))).unwrap();
        assert!(sum.is_zero());
    }

    #[test]
    fn multi_tail_round_trip_and_merge() {
        let f = PipVector::pure_tail(1, 0, cone(), rat(-2));
        let m = MultiTailVector::from_pip(&f);
        assert!(m.clone().into_pip().unwrap().equivalent(&f).unwrap());
        let mixed = MultiTailVector::build(
            1,
            0,
            BTreeMap::new(),
            vec![vec![(rat(-2), cone()), (rat(-3), cone())]],
        );
        assert!(mixed.clone().into_pip().is_err());
        let merged = MultiTailVector::build(
            1,
            0,
            BTreeMap::new(),
            vec![vec![(rat(-2), cone()), (rat(-2), crat(-1, 0))]],
        );
        assert_eq!(merged.tail_terms(0).len(), 0);
    }
}
