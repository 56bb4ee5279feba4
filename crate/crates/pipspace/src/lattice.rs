//! Finite involutive lattices of block exponents.
//!
//! A block exponent α encodes one power-weighted sequence space
//! V_α = {f : Σ |f_n|² n^{2α_j} < ∞ on each residue block j (mod k)}.
//! Larger exponents mean smaller spaces, so the index order on spaces is
//! the *reverse* of the componentwise order on exponents:
//!
//!   p ≤ q  (V_p ⊆ V_q)  ⇔  α(p) ≥ α(q) componentwise
//!   meet  V_p ∧ V_q = V_p ∩ V_q  ⇔  componentwise max
//!   join  V_p ∨ V_q              ⇔  componentwise min
//!   involution (Köthe dual)      ⇔  negation
//!
//! The extremal spaces V^# (finite sequences) and V (all sequences) are
//! kept as formal markers; they are never lattice elements.

use std::collections::BTreeSet;
use std::fmt;

use num::rational::BigRational;
use num::Zero;
use thiserror::Error;

use crate::scalar::fmt_rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("exponent has {found} blocks, lattice expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("generator set is empty")]
    EmptyGenerators,
    #[error("{0} is not an element of the lattice")]
    NotAnElement(String),
    #[error("operation requires a genuine lattice element, got a formal marker")]
    FormalOperand,
}

/// Vector of exact rational exponents, one per index block.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BlockExponent {
    exps: Vec<BigRational>,
}

impl BlockExponent {
    pub fn new(exps: Vec<BigRational>) -> Self {
        assert!(!exps.is_empty(), "block count must be at least 1");
        BlockExponent { exps }
    }

    pub fn from_ints(exps: &[i64]) -> Self {
        Self::new(exps.iter().map(|&e| crate::scalar::rat(e)).collect())
    }

    pub fn zero(blocks: usize) -> Self {
        Self::new(vec![BigRational::zero(); blocks])
    }

    pub fn blocks(&self) -> usize {
        self.exps.len()
    }

    pub fn component(&self, j: usize) -> &BigRational {
        &self.exps[j]
    }

    pub fn components(&self) -> &[BigRational] {
        &self.exps
    }

    pub fn negated(&self) -> Self {
        Self::new(self.exps.iter().map(|e| -e.clone()).collect())
    }

    pub fn componentwise_max(&self, other: &Self) -> Self {
        Self::new(
            self.exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a.max(b).clone())
                .collect(),
        )
    }

    pub fn componentwise_min(&self, other: &Self) -> Self {
        Self::new(
            self.exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a.min(b).clone())
                .collect(),
        )
    }

    /// a_j ≤ b_j on every block.
    pub fn componentwise_le(&self, other: &Self) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            self.exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl fmt::Display for BlockExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.exps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", fmt_rat(e))?;
        }
        write!(f, ")")
    }
}

/// A lattice element or one of the formal extremes V^# / V.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SpaceIndex {
    /// V^#, the space of finite sequences; smaller than every V_r.
    Bottom,
    At(BlockExponent),
    /// V, the space of all sequences; larger than every V_r.
    Top,
}

impl SpaceIndex {
    pub fn involution(&self) -> SpaceIndex {
        match self {
            SpaceIndex::Bottom => SpaceIndex::Top,
            SpaceIndex::Top => SpaceIndex::Bottom,
            SpaceIndex::At(e) => SpaceIndex::At(e.negated()),
        }
    }

    pub fn as_element(&self) -> Option<&BlockExponent> {
        match self {
            SpaceIndex::At(e) => Some(e),
            _ => None,
        }
    }
}

impl fmt::Display for SpaceIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceIndex::Bottom => write!(f, "V#"),
            SpaceIndex::Top => write!(f, "V"),
            SpaceIndex::At(e) => write!(f, "{e}"),
        }
    }
}

/// Query selector for [`IndexLattice::query`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeOp {
    Leq,
    Meet,
    Join,
    Involution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryResult {
    Bool(bool),
    Index(SpaceIndex),
}

/// Finite involutive lattice: closed under componentwise max, min, and
/// negation. Elements are kept sorted in the canonical (lexicographic)
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexLattice {
    blocks: usize,
    elements: Vec<BlockExponent>,
}

impl IndexLattice {
    /// Closure of the generators (plus 0 in LHS mode) under negation,
    /// componentwise max, and componentwise min, taken blockwise: the
    /// result is the full product grid of the per-block coordinate
    /// values appearing in the generators, their negations, and zero.
    /// The grid is a fixpoint of all three operations, so the closure is
    /// idempotent and every stated lattice invariant holds on it.
    pub fn close(generators: &[BlockExponent], lhs_mode: bool) -> Result<Self, LatticeError> {
        let first = generators.first().ok_or(LatticeError::EmptyGenerators)?;
        let blocks = first.blocks();
        for g in generators {
            if g.blocks() != blocks {
                return Err(LatticeError::DimensionMismatch {
                    expected: blocks,
                    found: g.blocks(),
                });
            }
        }
        let mut block_values: Vec<BTreeSet<BigRational>> = vec![BTreeSet::new(); blocks];
        for g in generators {
            for (j, v) in g.components().iter().enumerate() {
                block_values[j].insert(v.clone());
                block_values[j].insert(-v.clone());
            }
        }
        if lhs_mode {
            for vals in &mut block_values {
                vals.insert(BigRational::zero());
            }
        }
        let mut elements = vec![Vec::new()];
        for vals in &block_values {
            elements = elements
                .into_iter()
                .flat_map(|prefix: Vec<BigRational>| {
                    vals.iter().map(move |v| {
                        let mut next = prefix.clone();
                        next.push(v.clone());
                        next
                    })
                })
                .collect();
        }
        let set: BTreeSet<BlockExponent> = elements.into_iter().map(BlockExponent::new).collect();
        Ok(IndexLattice {
            blocks,
            elements: set.into_iter().collect(),
        })
    }

    /// Lattice with exactly the given elements; no closure is taken.
    /// Used by tests that need doctored non-closed families.
    pub fn from_elements_unchecked(blocks: usize, mut elements: Vec<BlockExponent>) -> Self {
        assert!(!elements.is_empty(), "a lattice needs at least one element");
        assert!(elements.iter().all(|e| e.blocks() == blocks));
        elements.sort();
        elements.dedup();
        IndexLattice { blocks, elements }
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements in canonical (lexicographic) order.
    pub fn elements(&self) -> &[BlockExponent] {
        &self.elements
    }

    pub fn contains(&self, e: &BlockExponent) -> bool {
        self.elements.binary_search(e).is_ok()
    }

    pub fn position(&self, e: &BlockExponent) -> Option<usize> {
        self.elements.binary_search(e).ok()
    }

    fn require(&self, e: &BlockExponent) -> Result<(), LatticeError> {
        if e.blocks() != self.blocks {
            return Err(LatticeError::DimensionMismatch {
                expected: self.blocks,
                found: e.blocks(),
            });
        }
        if self.contains(e) {
            Ok(())
        } else {
            Err(LatticeError::NotAnElement(e.to_string()))
        }
    }

    /// Componentwise-minimal exponent m; indexes the largest member space.
    pub fn min_exponent(&self) -> BlockExponent {
        self.elements
            .iter()
            .cloned()
            .reduce(|a, b| a.componentwise_min(&b))
            .expect("lattice is nonempty")
    }

    /// Componentwise-maximal exponent M; indexes the smallest member space.
    pub fn max_exponent(&self) -> BlockExponent {
        self.elements
            .iter()
            .cloned()
            .reduce(|a, b| a.componentwise_max(&b))
            .expect("lattice is nonempty")
    }

    /// Index order: p ≤ q iff V_p ⊆ V_q iff α(p) ≥ α(q) componentwise.
    pub fn space_leq(&self, p: &BlockExponent, q: &BlockExponent) -> Result<bool, LatticeError> {
        self.require(p)?;
        self.require(q)?;
        Ok(q.componentwise_le(p))
    }

    /// Index order extended to the formal extremes V^# and V.
    pub fn space_leq_formal(&self, p: &SpaceIndex, q: &SpaceIndex) -> Result<bool, LatticeError> {
        match (p, q) {
            (SpaceIndex::Bottom, _) | (_, SpaceIndex::Top) => Ok(true),
            (SpaceIndex::Top, _) | (_, SpaceIndex::Bottom) => Ok(false),
            (SpaceIndex::At(a), SpaceIndex::At(b)) => self.space_leq(a, b),
        }
    }

    /// V_p ∧ V_q = V_p ∩ V_q: componentwise max of exponents.
    pub fn meet(
        &self,
        p: &BlockExponent,
        q: &BlockExponent,
    ) -> Result<BlockExponent, LatticeError> {
        self.require(p)?;
        self.require(q)?;
        Ok(p.componentwise_max(q))
    }

    /// V_p ∨ V_q: componentwise min of exponents.
    pub fn join(
        &self,
        p: &BlockExponent,
        q: &BlockExponent,
    ) -> Result<BlockExponent, LatticeError> {
        self.require(p)?;
        self.require(q)?;
        Ok(p.componentwise_min(q))
    }

    /// Köthe dual: negation of the exponent.
    pub fn involution(&self, p: &BlockExponent) -> Result<BlockExponent, LatticeError> {
        self.require(p)?;
        Ok(p.negated())
    }

    /// Single entry point mirroring the four lattice queries.
    pub fn query(
        &self,
        op: LatticeOp,
        p: &SpaceIndex,
        q: Option<&SpaceIndex>,
    ) -> Result<QueryResult, LatticeError> {
        match op {
            LatticeOp::Leq => {
                let q = q.ok_or(LatticeError::FormalOperand)?;
                Ok(QueryResult::Bool(self.space_leq_formal(p, q)?))
            }
            LatticeOp::Involution => {
                if let SpaceIndex::At(e) = p {
                    self.require(e)?;
                }
                Ok(QueryResult::Index(p.involution()))
            }
            LatticeOp::Meet | LatticeOp::Join => {
                let q = q.ok_or(LatticeError::FormalOperand)?;
                let (a, b) = match (p, q) {
                    (SpaceIndex::At(a), SpaceIndex::At(b)) => (a, b),
                    _ => return Err(LatticeError::FormalOperand),
                };
                let out = if op == LatticeOp::Meet {
                    self.meet(a, b)?
                } else {
                    self.join(a, b)?
                };
                Ok(QueryResult::Index(SpaceIndex::At(out)))
            }
        }
    }

    /// Canonical text form: one element per line, lexicographic order.
    pub fn canonical_listing(&self) -> String {
        let mut out = String::new();
        for e in &self.elements {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratio};
    use proptest::prelude::*;

    fn be(v: &[i64]) -> BlockExponent {
        BlockExponent::from_ints(v)
    }

    /// Independent fixpoint oracle: enumerate negations, maxes, and mins
    /// over a plain Vec with linear membership scans until stable.
    fn ops_fixpoint(start: &[BlockExponent]) -> Vec<BlockExponent> {
        let mut out: Vec<BlockExponent> = Vec::new();
        let mut queue: Vec<BlockExponent> = start.to_vec();
        while let Some(e) = queue.pop() {
            if out.contains(&e) {
                continue;
            }
            queue.push(e.negated());
            for o in &out {
                queue.push(e.componentwise_max(o));
                queue.push(e.componentwise_min(o));
            }
            out.push(e);
        }
        out.sort();
        out
    }

    #[test]
    fn chain_from_single_generator() {
        let l = IndexLattice::close(&[be(&[1])], true).unwrap();
        assert_eq!(l.elements(), &[be(&[-1]), be(&[0]), be(&[1])]);
    }

    #[test]
    fn self_dual_singleton_already_closed() {
        let l = IndexLattice::close(&[be(&[0])], false).unwrap();
        assert_eq!(l.elements(), &[be(&[0])]);
    }

    #[test]
    fn two_generators_close_to_nine_element_grid() {
        let l = IndexLattice::close(&[be(&[1, 0]), be(&[0, 1])], true).unwrap();
        let expected: Vec<BlockExponent> = [
            [-1, -1],
            [-1, 0],
            [-1, 1],
            [0, -1],
            [0, 0],
            [0, 1],
            [1, -1],
            [1, 0],
            [1, 1],
        ]
        .iter()
        .map(|v| be(v))
        .collect();
        assert_eq!(l.elements(), &expected[..]);
        // the result is a fixpoint of the three lattice operations
        assert_eq!(ops_fixpoint(l.elements()), expected);
    }

    #[test]
    fn mixed_lengths_rejected() {
        let err = IndexLattice::close(&[be(&[1]), be(&[1, 0])], false).unwrap_err();
        assert_eq!(
            err,
            LatticeError::DimensionMismatch {
                expected: 1,
                found: 2
            }
        );
        assert_eq!(
            IndexLattice::close(&[], false).unwrap_err(),
            LatticeError::EmptyGenerators
        );
    }

    #[test]
    fn query_basics() {
        let l = IndexLattice::close(&[be(&[1, 0]), be(&[0, 1])], true).unwrap();
        assert_eq!(l.involution(&be(&[1, 0])).unwrap(), be(&[-1, 0]));
        assert_eq!(l.meet(&be(&[1, 0]), &be(&[0, 1])).unwrap(), be(&[1, 1]));
        assert_eq!(l.join(&be(&[1, 0]), &be(&[0, 1])).unwrap(), be(&[0, 0]));
        // V_(1,1) ⊆ V_(0,0)
        assert!(l.space_leq(&be(&[1, 1]), &be(&[0, 0])).unwrap());
        assert!(!l.space_leq(&be(&[0, 0]), &be(&[1, 1])).unwrap());
        assert!(matches!(
            l.meet(&be(&[2, 2]), &be(&[0, 0])),
            Err(LatticeError::NotAnElement(_))
        ));
    }

    #[test]
    fn formal_extremes_bound_everything() {
        let l = IndexLattice::close(&[be(&[1])], true).unwrap();
        for e in l.elements() {
            let at = SpaceIndex::At(e.clone());
            assert!(l.space_leq_formal(&SpaceIndex::Bottom, &at).unwrap());
            assert!(l.space_leq_formal(&at, &SpaceIndex::Top).unwrap());
            assert!(!l.space_leq_formal(&SpaceIndex::Top, &at).unwrap());
        }
        assert_eq!(SpaceIndex::Bottom.involution(), SpaceIndex::Top);
    }

    #[test]
    fn involution_reverses_order_and_de_morgan_holds() {
        let l = IndexLattice::close(&[be(&[1, 0]), be(&[0, 1])], true).unwrap();
        for p in l.elements() {
            for q in l.elements() {
                let leq = l.space_leq(p, q).unwrap();
                let rev = l.space_leq(&q.negated(), &p.negated()).unwrap();
                assert_eq!(leq, rev, "involution must reverse order at ({p}, {q})");
                assert_eq!(
                    l.meet(p, q).unwrap().negated(),
                    l.join(&p.negated(), &q.negated()).unwrap(),
                    "De Morgan failed at ({p}, {q})"
                );
            }
        }
    }

    #[test]
    fn closure_bounds_attained() {
        let l = IndexLattice::close(&[be(&[1, 0]), be(&[0, 1])], true).unwrap();
        let m = l.min_exponent();
        let big = l.max_exponent();
        assert!(l.contains(&m));
        assert!(l.contains(&big));
        for e in l.elements() {
            assert!(m.componentwise_le(e));
            assert!(e.componentwise_le(&big));
        }
    }

    #[test]
    fn rational_exponents_close() {
        let g = BlockExponent::new(vec![ratio(1, 2)]);
        let l = IndexLattice::close(std::slice::from_ref(&g), true).unwrap();
        assert_eq!(l.len(), 3);
        assert!(l.contains(&BlockExponent::new(vec![ratio(-1, 2)])));
        assert_eq!(l.elements()[1], BlockExponent::new(vec![rat(0)]));
    }

    fn small_exponent(blocks: usize) -> impl Strategy<Value = BlockExponent> {
        proptest::collection::vec((-3i64..=3, 1i64..=2), blocks)
            .prop_map(|v| BlockExponent::new(v.into_iter().map(|(n, d)| ratio(n, d)).collect()))
    }

    proptest! {
        #[test]
        fn closure_is_idempotent_stable_and_contains_generated_sublattice(
            gens in proptest::collection::vec(small_exponent(2), 1..4)
        ) {
            let l = IndexLattice::close(&gens, true).unwrap();
            let again = IndexLattice::close(l.elements(), true).unwrap();
            prop_assert_eq!(l.elements(), again.elements());
            // stable under negation / max / min
            prop_assert_eq!(l.elements(), &ops_fixpoint(l.elements())[..]);
            // contains every element reachable from the generators and 0
            let mut seeds = gens.clone();
            seeds.push(BlockExponent::zero(2));
            for e in ops_fixpoint(&seeds) {
                prop_assert!(l.contains(&e));
            }
        }
    }
}
