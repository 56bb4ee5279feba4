//! Operator calculus on the sequence-space model.
//!
//! An operator symbol is a finite sum of diagonal power terms plus a
//! finite matrix block: the diagonal term (γ, c) acts as
//! (Af)_n = c_j·n^{γ_j}·f_n on block j, and the matrix block acts on
//! coordinates 1..M₀. An operator is identified with its coherent family
//! of representatives A_{ur}: V_r → V_u; existence of a representative is
//! a support-based boundedness certificate, so the admissible source set
//! d(A) is initial and the attained target set i(A) is final in the
//! index order.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::Zero;
use thiserror::Error;

use crate::lattice::{BlockExponent, IndexLattice, LatticeError};
use crate::linalg::CMatrix;
use crate::scalar::{cone, conj, czero, exact_pow, CRat};
use crate::vectors::{MultiTailVector, PipVector, VectorError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OperatorError {
    #[error("operator has {found} blocks, expected {expected}")]
    BlockMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error("product undefined: no factorization index in i(A) ∩ d(B)")]
    UndefinedProduct,
    #[error("{0} is outside the operator's admissible source set d(A)")]
    OutsideDomain(String),
    #[error("vector does not belong to the source space V_{0}")]
    NotInSource(String),
    #[error("coordinate {0} needs an irrational power; exact arithmetic unavailable")]
    ExactPowerUnavailable(u64),
}

/// Which homomorphism condition failed, with the witness index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomFailure {
    /// Condition (i): no admissible target for this source index.
    Source(BlockExponent),
    /// Condition (ii): no admissible source for this target index.
    Target(BlockExponent),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub is_homomorphism: bool,
    pub hom_failure: Option<HomFailure>,
    pub is_totally_regular: bool,
    pub is_projection: bool,
    pub is_isomorphism_certified: bool,
    /// Sufficient injectivity certificate; `false` is not a refutation.
    pub mono_certificate: bool,
    /// Sufficient surjectivity certificate; `false` is not a refutation.
    pub epi_certificate: bool,
    pub is_zero: bool,
}

/// Admissible sources and attained targets of an operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainImage {
    pub domain: Vec<BlockExponent>,
    pub image: Vec<BlockExponent>,
    /// False when d(A) is empty: the symbol is not an operator on this
    /// pair of lattices.
    pub is_operator: bool,
}

/// One continuous representative A_{ur}: V_r → V_u of an operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representative {
    pub target: BlockExponent,
    pub source: BlockExponent,
    pub symbol: OperatorSymbol,
}

impl Representative {
    pub fn new(
        symbol: OperatorSymbol,
        target: BlockExponent,
        source: BlockExponent,
    ) -> Result<Self, OperatorError> {
        if !symbol.representative_exists(&target, &source) {
            return Err(OperatorError::OutsideDomain(source.to_string()));
        }
        Ok(Representative {
            target,
            source,
            symbol,
        })
    }
}

/// Composition result together with one factorization witness t with
/// V_source → V_t → V_target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    pub symbol: OperatorSymbol,
    pub witness: BlockExponent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorSymbol {
    blocks: usize,
    // γ → per-block coefficients; kept pruned of all-zero terms
    diag: BTreeMap<BlockExponent, Vec<CRat>>,
    // trimmed finite block
    matrix: CMatrix,
}

impl OperatorSymbol {
    pub fn new(
        blocks: usize,
        diag_terms: Vec<(BlockExponent, Vec<CRat>)>,
        matrix: CMatrix,
    ) -> Result<Self, OperatorError> {
        let mut diag: BTreeMap<BlockExponent, Vec<CRat>> = BTreeMap::new();
        for (gamma, coeffs) in diag_terms {
            if gamma.blocks() != blocks {
                return Err(OperatorError::BlockMismatch {
                    expected: blocks,
                    found: gamma.blocks(),
                });
            }
            if coeffs.len() != blocks {
                return Err(OperatorError::BlockMismatch {
                    expected: blocks,
                    found: coeffs.len(),
                });
            }
            let entry = diag.entry(gamma).or_insert_with(|| vec![czero(); blocks]);
            for (e, c) in entry.iter_mut().zip(coeffs) {
                *e = e.clone() + c;
            }
        }
        diag.retain(|_, coeffs| coeffs.iter().any(|c| !(c.re.is_zero() && c.im.is_zero())));
        Ok(OperatorSymbol {
            blocks,
            diag,
            matrix: matrix.trimmed(),
        })
    }

    pub fn zero(blocks: usize) -> Self {
        OperatorSymbol {
            blocks,
            diag: BTreeMap::new(),
            matrix: CMatrix::zeros(0),
        }
    }

    pub fn identity(blocks: usize) -> Self {
        Self::diagonal(BlockExponent::zero(blocks), cone())
    }

    /// Diagonal term with one scalar coefficient on every block.
    pub fn diagonal(gamma: BlockExponent, coefficient: CRat) -> Self {
        let blocks = gamma.blocks();
        let coeffs = vec![coefficient; blocks];
        Self::new(blocks, vec![(gamma, coeffs)], CMatrix::zeros(0)).expect("consistent shape")
    }

    pub fn diagonal_per_block(
        gamma: BlockExponent,
        coeffs: Vec<CRat>,
    ) -> Result<Self, OperatorError> {
        let blocks = gamma.blocks();
        Self::new(blocks, vec![(gamma, coeffs)], CMatrix::zeros(0))
    }

    /// Multiplication by the indicator of one block: γ = 0 with
    /// coefficient 1 there and 0 elsewhere.
    pub fn block_indicator(blocks: usize, block: usize) -> Self {
        let mut coeffs = vec![czero(); blocks];
        coeffs[block] = cone();
        Self::diagonal_per_block(BlockExponent::zero(blocks), coeffs).expect("consistent shape")
    }

    pub fn from_matrix(blocks: usize, matrix: CMatrix) -> Self {
        Self::new(blocks, Vec::new(), matrix).expect("consistent shape")
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn diag_terms(&self) -> &BTreeMap<BlockExponent, Vec<CRat>> {
        &self.diag
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn matrix_dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.diag.is_empty() && self.matrix.is_zero()
    }

    pub fn add(&self, other: &OperatorSymbol) -> Result<OperatorSymbol, OperatorError> {
        if other.blocks != self.blocks {
            return Err(OperatorError::BlockMismatch {
                expected: self.blocks,
                found: other.blocks,
            });
        }
        let mut terms: Vec<(BlockExponent, Vec<CRat>)> = self
            .diag
            .iter()
            .map(|(g, c)| (g.clone(), c.clone()))
            .collect();
        terms.extend(other.diag.iter().map(|(g, c)| (g.clone(), c.clone())));
        OperatorSymbol::new(self.blocks, terms, self.matrix.add(&other.matrix))
    }

    pub fn scale(&self, s: &CRat) -> OperatorSymbol {
        let terms = self
            .diag
            .iter()
            .map(|(g, c)| (g.clone(), c.iter().map(|x| x.clone() * s.clone()).collect()))
            .collect();
        OperatorSymbol::new(self.blocks, terms, self.matrix.scale(s)).expect("consistent shape")
    }

    pub fn sub(&self, other: &OperatorSymbol) -> Result<OperatorSymbol, OperatorError> {
        self.add(&other.scale(&crate::scalar::crat(-1, 0)))
    }

    /// Diagonal coefficients conjugated, matrix block conjugate-transposed.
    pub fn adjoint(&self) -> OperatorSymbol {
        let terms = self
            .diag
            .iter()
            .map(|(g, c)| (g.clone(), c.iter().map(conj).collect()))
            .collect();
        OperatorSymbol::new(self.blocks, terms, self.matrix.conj_transpose())
            .expect("consistent shape")
    }

    /// Support-based effective exponent per block: max γ_j over terms
    /// whose coefficient is nonzero there; `None` stands for −∞
    /// (the block is unconstrained).
    pub fn effective_exponent(&self) -> Vec<Option<BigRational>> {
        let mut e: Vec<Option<BigRational>> = vec![None; self.blocks];
        for (gamma, coeffs) in &self.diag {
            for j in 0..self.blocks {
                if !(coeffs[j].re.is_zero() && coeffs[j].im.is_zero()) {
                    let g = gamma.component(j);
                    e[j] = Some(match &e[j] {
                        None => g.clone(),
                        Some(cur) => cur.max(g).clone(),
                    });
                }
            }
        }
        e
    }

    /// Boundedness certificate for A_{ur}: V_r → V_u: on every block
    /// with a finite effective exponent, α(u) ≤ α(r) − e_j. The finite
    /// matrix block never obstructs.
    pub fn representative_exists(&self, u: &BlockExponent, r: &BlockExponent) -> bool {
        assert_eq!(u.blocks(), self.blocks, "target block count mismatch");
        assert_eq!(r.blocks(), self.blocks, "source block count mismatch");
        self.effective_exponent()
            .iter()
            .enumerate()
            .all(|(j, e)| match e {
                None => true,
                Some(e) => u.component(j) <= &(r.component(j) - e),
            })
    }

    /// d(A) and i(A) by exhaustive scan over a source/target lattice pair.
    pub fn domain_image_between(
        &self,
        src: &IndexLattice,
        tgt: &IndexLattice,
    ) -> Result<DomainImage, OperatorError> {
        if src.blocks() != self.blocks || tgt.blocks() != self.blocks {
            return Err(OperatorError::BlockMismatch {
                expected: self.blocks,
                found: src.blocks().max(tgt.blocks()),
            });
        }
        let domain: Vec<BlockExponent> = src
            .elements()
            .iter()
            .filter(|r| {
                tgt.elements()
                    .iter()
                    .any(|u| self.representative_exists(u, r))
            })
            .cloned()
            .collect();
        let image: Vec<BlockExponent> = tgt
            .elements()
            .iter()
            .filter(|u| {
                src.elements()
                    .iter()
                    .any(|r| self.representative_exists(u, r))
            })
            .cloned()
            .collect();
        let is_operator = !domain.is_empty();
        Ok(DomainImage {
            domain,
            image,
            is_operator,
        })
    }

    pub fn domain_image(&self, lattice: &IndexLattice) -> Result<DomainImage, OperatorError> {
        self.domain_image_between(lattice, lattice)
    }

    /// Exact value of the diagonal part at a finite coordinate.
    fn diag_value_at(&self, n: u64) -> Result<CRat, OperatorError> {
        let j = (n % self.blocks as u64) as usize;
        let mut val = czero();
        for (gamma, coeffs) in &self.diag {
            let c = &coeffs[j];
            if c.re.is_zero() && c.im.is_zero() {
                continue;
            }
            let p =
                exact_pow(n, gamma.component(j)).ok_or(OperatorError::ExactPowerUnavailable(n))?;
            val += CRat::new(&c.re * &p, &c.im * &p);
        }
        Ok(val)
    }

    /// Action on a multi-tail vector; always exact, may mix exponents.
    pub fn apply_multi(&self, f: &MultiTailVector) -> Result<MultiTailVector, OperatorError> {
        if f.blocks() != self.blocks {
            return Err(OperatorError::BlockMismatch {
                expected: self.blocks,
                found: f.blocks(),
            });
        }
        let n0 = f.tail_start().max(self.matrix.dim() as u64);
        let f = f.with_tail_start(n0)?;
        // diagonal action on the finite part
        let mut finite: BTreeMap<u64, CRat> = BTreeMap::new();
        for (&n, v) in f.finite_part() {
            let d = self.diag_value_at(n)?;
            if !(d.re.is_zero() && d.im.is_zero()) {
                finite.insert(n, d * v.clone());
            }
        }
        // matrix action on coordinates 1..M₀
        let m = self.matrix.dim() as u64;
        for row in 1..=m {
            let mut acc = czero();
            for col in 1..=m {
                let a = self.matrix.get(row as usize - 1, col as usize - 1);
                if a.re.is_zero() && a.im.is_zero() {
                    continue;
                }
                if let Some(v) = f.finite_part().get(&col) {
                    acc += a.clone() * v.clone();
                }
            }
            if !(acc.re.is_zero() && acc.im.is_zero()) {
                let entry = finite.entry(row).or_insert_with(czero);
                *entry = entry.clone() + acc;
            }
        }
        // diagonal action on the tails
        let mut tails: Vec<Vec<(BigRational, CRat)>> = vec![Vec::new(); self.blocks];
        for j in 0..self.blocks {
            for (sigma, c) in f.tail_terms(j) {
                for (gamma, coeffs) in &self.diag {
                    let cv = &coeffs[j];
                    if cv.re.is_zero() && cv.im.is_zero() {
                        continue;
                    }
                    tails[j].push((sigma + gamma.component(j), cv.clone() * c.clone()));
                }
            }
        }
        Ok(MultiTailVector::build(self.blocks, n0, finite, tails))
    }

    /// Evaluation of a representative at r on a concrete vector. The
    /// result is a member of V_u for every u with a representative.
    pub fn apply(
        &self,
        f: &PipVector,
        r: &BlockExponent,
        src: &IndexLattice,
        tgt: &IndexLattice,
    ) -> Result<PipVector, OperatorError> {
        src.position(r)
            .ok_or_else(|| LatticeError::NotAnElement(r.to_string()))?;
        let in_domain = tgt
            .elements()
            .iter()
            .any(|u| self.representative_exists(u, r));
        if !in_domain {
            return Err(OperatorError::OutsideDomain(r.to_string()));
        }
        if !f.member_at(r)? {
            return Err(OperatorError::NotInSource(r.to_string()));
        }
        let out = self.apply_multi(&MultiTailVector::from_pip(f))?;
        Ok(out.into_pip()?)
    }

    pub fn apply_in(
        &self,
        f: &PipVector,
        r: &BlockExponent,
        lattice: &IndexLattice,
    ) -> Result<PipVector, OperatorError> {
        self.apply(f, r, lattice, lattice)
    }

    /// Homomorphism test between lattices: for every r there must be a u
    /// with both A_{ur} and A_{ū r̄}, and symmetrically for every u.
    pub fn check_homomorphism(
        &self,
        src: &IndexLattice,
        tgt: &IndexLattice,
    ) -> Result<Option<HomFailure>, OperatorError> {
        if src.blocks() != self.blocks || tgt.blocks() != self.blocks {
            return Err(OperatorError::BlockMismatch {
                expected: self.blocks,
                found: src.blocks().max(tgt.blocks()),
            });
        }
        let dual_pair = |u: &BlockExponent, r: &BlockExponent| {
            self.representative_exists(u, r)
                && self.representative_exists(&u.negated(), &r.negated())
        };
        for r in src.elements() {
            if !tgt.elements().iter().any(|u| dual_pair(u, r)) {
                return Ok(Some(HomFailure::Source(r.clone())));
            }
        }
        for u in tgt.elements() {
            if !src.elements().iter().any(|r| dual_pair(u, r)) {
                return Ok(Some(HomFailure::Target(u.clone())));
            }
        }
        Ok(None)
    }

    /// Candidate two-sided inverse within the symbol family: single
    /// diagonal term inverted exponent-wise plus a finite matrix
    /// correction. `None` when no candidate can be built exactly.
    fn inverse_candidate(&self) -> Option<OperatorSymbol> {
        if self.diag.len() != 1 {
            return None;
        }
        let (gamma, coeffs) = self.diag.iter().next()?;
        if coeffs.iter().any(|c| c.re.is_zero() && c.im.is_zero()) {
            return None;
        }
        let inv_coeffs: Vec<CRat> = coeffs.iter().map(|c| cone() / c.clone()).collect();
        let diag_inv = OperatorSymbol::diagonal_per_block(gamma.negated(), inv_coeffs).ok()?;
        let m = self.matrix.dim();
        if m == 0 {
            return Some(diag_inv);
        }
        // finite block of D: diag(c_{b(n)}·n^{γ_{b(n)}}) for n ≤ m
        let mut d_blk = CMatrix::zeros(m);
        for n in 1..=m as u64 {
            let v = self.diag_value_at(n).ok()?;
            d_blk.set(n as usize - 1, n as usize - 1, v);
        }
        let full = d_blk.add(&self.matrix);
        let full_inv = full.inverse()?;
        let d_blk_inv = d_blk.inverse()?;
        let correction = full_inv.add(&d_blk_inv.scale(&crate::scalar::crat(-1, 0)));
        OperatorSymbol::new(
            self.blocks,
            diag_inv
                .diag
                .iter()
                .map(|(g, c)| (g.clone(), c.clone()))
                .collect(),
            correction,
        )
        .ok()
    }

    /// Mono/epi sufficient certificate: one diagonal exponent, nonzero
    /// on every block, and an invertible combined finite block.
    fn injectivity_certificate(&self) -> bool {
        if self.diag.len() != 1 {
            return false;
        }
        let coeffs = self.diag.values().next().expect("one term");
        if coeffs.iter().any(|c| c.re.is_zero() && c.im.is_zero()) {
            return false;
        }
        let m = self.matrix.dim();
        if m == 0 {
            return true;
        }
        let mut d_blk = CMatrix::zeros(m);
        for n in 1..=m as u64 {
            match self.diag_value_at(n) {
                Ok(v) => d_blk.set(n as usize - 1, n as usize - 1, v),
                Err(_) => return false,
            }
        }
        d_blk.add(&self.matrix).is_invertible()
    }

    /// Classification flags over a single lattice (the Op(V_I) setting).
    pub fn classify(&self, lattice: &IndexLattice) -> Result<Classification, OperatorError> {
        let hom_failure = self.check_homomorphism(lattice, lattice)?;
        let is_homomorphism = hom_failure.is_none();
        let is_totally_regular = lattice
            .elements()
            .iter()
            .all(|r| self.representative_exists(r, r));
        let is_projection = is_homomorphism
            && self.adjoint() == *self
            && compose_in(self, self, lattice)
                .map(|c| c.symbol == *self)
                .unwrap_or(false);
        let is_isomorphism_certified = is_homomorphism
            && self
                .inverse_candidate()
                .map(|inv| {
                    inv.check_homomorphism(lattice, lattice) == Ok(None)
                        && compose_in(&inv, self, lattice)
                            .map(|c| c.symbol == OperatorSymbol::identity(self.blocks))
                            .unwrap_or(false)
                        && compose_in(self, &inv, lattice)
                            .map(|c| c.symbol == OperatorSymbol::identity(self.blocks))
                            .unwrap_or(false)
                })
                .unwrap_or(false);
        let cert = self.injectivity_certificate();
        Ok(Classification {
            is_homomorphism,
            hom_failure,
            is_totally_regular,
            is_projection,
            is_isomorphism_certified,
            mono_certificate: cert,
            epi_certificate: cert,
            is_zero: self.is_zero(),
        })
    }
}

/// Symbol product b·a (a acts first) with factorization through the
/// intermediate lattice: defined iff i(a) ∩ d(b) is nonempty there.
pub fn compose(
    b: &OperatorSymbol,
    a: &OperatorSymbol,
    src: &IndexLattice,
    mid: &IndexLattice,
    tgt: &IndexLattice,
) -> Result<Composition, OperatorError> {
    if a.blocks() != b.blocks() {
        return Err(OperatorError::BlockMismatch {
            expected: a.blocks(),
            found: b.blocks(),
        });
    }
    let i_a = a.domain_image_between(src, mid)?.image;
    let d_b = b.domain_image_between(mid, tgt)?.domain;
    let witness = i_a
        .iter()
        .find(|t| d_b.contains(t))
        .cloned()
        .ok_or(OperatorError::UndefinedProduct)?;

    // diagonal × diagonal: exponents add, per-block coefficients multiply
    let mut terms: Vec<(BlockExponent, Vec<CRat>)> = Vec::new();
    for (ga, ca) in a.diag_terms() {
        for (gb, cb) in b.diag_terms() {
            let coeffs = ca
                .iter()
                .zip(cb)
                .map(|(x, y)| x.clone() * y.clone())
                .collect();
            terms.push((ga.add(gb), coeffs));
        }
    }
    // finite block: D_b·M_a + M_b·D_a + M_b·M_a, evaluated exactly
    let m = a.matrix_dim().max(b.matrix_dim());
    let mut matrix = CMatrix::zeros(m);
    if m > 0 {
        let ma = a.matrix().embedded(m);
        let mb = b.matrix().embedded(m);
        let mut diag_b = CMatrix::zeros(m);
        let mut diag_a = CMatrix::zeros(m);
        for n in 1..=m as u64 {
            // only needed where a matrix entry is nonzero; computing the
            // full diagonal keeps the code simple and may error only if
            // an irrational power is genuinely required
            let need_b = (0..m).any(|c| {
                let v = ma.get(n as usize - 1, c);
                !(v.re.is_zero() && v.im.is_zero())
            });
            let need_a = (0..m).any(|r| {
                let v = mb.get(r, n as usize - 1);
                !(v.re.is_zero() && v.im.is_zero())
            });
            if need_b {
                diag_b.set(n as usize - 1, n as usize - 1, b.diag_value_at(n)?);
            }
            if need_a {
                diag_a.set(n as usize - 1, n as usize - 1, a.diag_value_at(n)?);
            }
        }
        matrix = diag_b.mul(&ma).add(&mb.mul(&diag_a)).add(&mb.mul(&ma));
    }
    let symbol = OperatorSymbol::new(a.blocks(), terms, matrix)?;
    Ok(Composition { symbol, witness })
}

/// Product within a single lattice (the Op(V_I) partial multiplication).
pub fn compose_in(
    b: &OperatorSymbol,
    a: &OperatorSymbol,
    lattice: &IndexLattice,
) -> Result<Composition, OperatorError> {
    compose(b, a, lattice, lattice, lattice)
}

/// n-th power of a symbol within a lattice; n = 0 gives the identity.
pub fn power_in(
    a: &OperatorSymbol,
    n: u32,
    lattice: &IndexLattice,
) -> Result<OperatorSymbol, OperatorError> {
    let mut acc = OperatorSymbol::identity(a.blocks());
    for _ in 0..n {
        acc = compose_in(a, &acc, lattice)?.symbol;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{crat, rat, ratio};
    use crate::vectors::Tail;

    fn l1() -> IndexLattice {
        IndexLattice::close(&[BlockExponent::from_ints(&[1])], true).unwrap()
    }

    fn l2() -> IndexLattice {
        IndexLattice::close(
            &[
                BlockExponent::from_ints(&[1, 0]),
                BlockExponent::from_ints(&[0, 1]),
            ],
            true,
        )
        .unwrap()
    }

    fn diag_n(e: i64) -> OperatorSymbol {
        OperatorSymbol::diagonal(BlockExponent::from_ints(&[e]), cone())
    }

    fn be(v: &[i64]) -> BlockExponent {
        BlockExponent::from_ints(v)
    }

    #[test]
    fn representative_criterion_matches_sup_ratio_oracle() {
        let a = diag_n(1);
        // u = 0, r = 1: sup_n n^{1+0−1} = 1 < ∞
        assert!(a.representative_exists(&be(&[0]), &be(&[1])));
        // u = 1, r = 1: sup_n n^{1+1−1} = sup n diverges
        assert!(!a.representative_exists(&be(&[1]), &be(&[1])));
        // numeric oracle: the ratio n^{e+u−r} at n = 1000 vs n = 1
        let grows = |e: f64, u: f64, r: f64| (1000.0f64).powf(e + u - r) > 1.5;
        assert!(!grows(1.0, 0.0, 1.0));
        assert!(grows(1.0, 1.0, 1.0));
        // identity: representatives are exactly the embeddings
        let id = OperatorSymbol::identity(1);
        let l = l1();
        for u in l.elements() {
            for r in l.elements() {
                assert_eq!(
                    id.representative_exists(u, r),
                    u.componentwise_le(r),
                    "embedding E_ur exists iff α(u) ≤ α(r)"
                );
            }
        }
    }

    #[test]
    fn domain_and_image_examples() {
        let l = l1();
        let a = diag_n(1);
        let di = a.domain_image(&l).unwrap();
        assert_eq!(di.domain, vec![be(&[0]), be(&[1])]);
        assert_eq!(di.image, vec![be(&[-1]), be(&[0])]);
        assert!(di.is_operator);

        let id = OperatorSymbol::identity(1);
        let di = id.domain_image(&l).unwrap();
        assert_eq!(di.domain, l.elements());
        assert_eq!(di.image, l.elements());

        let l2 = l2();
        let a22 = OperatorSymbol::diagonal(be(&[2, 2]), cone());
        let di = a22.domain_image(&l2).unwrap();
        assert_eq!(di.domain, vec![be(&[1, 1])]);
        assert_eq!(di.image, vec![be(&[-1, -1])]);

        // too steep for the lattice: not an operator here
        let a3 = diag_n(3);
        let di = a3.domain_image(&l).unwrap();
        assert!(di.domain.is_empty());
        assert!(!di.is_operator);
    }

    #[test]
    fn domain_initial_image_final() {
        let l = l2();
        let samples = [
            OperatorSymbol::diagonal(be(&[1, 0]), cone()),
            OperatorSymbol::diagonal(be(&[2, 2]), crat(0, 1)),
            OperatorSymbol::identity(2),
            OperatorSymbol::block_indicator(2, 0),
        ];
        for a in &samples {
            let di = a.domain_image(&l).unwrap();
            for r in &di.domain {
                for r2 in l.elements() {
                    if l.space_leq(r2, r).unwrap() {
                        assert!(di.domain.contains(r2), "d(A) must be initial");
                    }
                }
            }
            for u in &di.image {
                for u2 in l.elements() {
                    if l.space_leq(u, u2).unwrap() {
                        assert!(di.image.contains(u2), "i(A) must be final");
                    }
                }
            }
        }
    }

    #[test]
    fn adjoint_involution_and_duality() {
        let a = OperatorSymbol::diagonal(be(&[1]), crat(0, 1));
        let adj = a.adjoint();
        assert_eq!(
            adj,
            OperatorSymbol::diagonal(be(&[1]), crat(0, -1)),
            "diag i·n¹ must conjugate to diag −i·n¹"
        );
        assert_eq!(adj.adjoint(), a);

        let m = OperatorSymbol::from_matrix(
            1,
            CMatrix::from_rows(vec![
                vec![crat(0, 0), crat(1, 0)],
                vec![crat(0, 0), crat(0, 0)],
            ]),
        );
        let mt = m.adjoint();
        assert_eq!(*mt.matrix().get(1, 0), crat(1, 0));
        assert_eq!(*mt.matrix().get(0, 1), crat(0, 0));

        // exists(A^×, r̄, ū) ⇔ exists(A, u, r), exhaustively over L1
        let l = l1();
        for u in l.elements() {
            for r in l.elements() {
                assert_eq!(
                    a.adjoint()
                        .representative_exists(&r.negated(), &u.negated()),
                    a.representative_exists(u, r)
                );
            }
        }
    }

    #[test]
    fn composition_with_witness_and_undefined_case() {
        let l = l1();
        let a = diag_n(1);
        let c = compose_in(&a, &a, &l).unwrap();
        assert_eq!(c.witness, be(&[0]));
        assert_eq!(c.symbol, OperatorSymbol::diagonal(be(&[2]), cone()));
        let di = c.symbol.domain_image(&l).unwrap();
        assert_eq!(di.domain, vec![be(&[1])]);

        // lattice {−1/2, 0, 1/2}: i(A) = {−1/2}, d(B) = {1/2}, disjoint
        let half = IndexLattice::close(&[BlockExponent::new(vec![ratio(1, 2)])], true).unwrap();
        assert_eq!(
            compose_in(&a, &a, &half).unwrap_err(),
            OperatorError::UndefinedProduct
        );

        // unit law
        let id = OperatorSymbol::identity(1);
        assert_eq!(compose_in(&id, &a, &l).unwrap().symbol, a);
        assert_eq!(compose_in(&a, &id, &l).unwrap().symbol, a);
    }

    #[test]
    fn composition_of_matrix_and_diagonal_blocks() {
        let l = l1();
        let m = OperatorSymbol::from_matrix(
            1,
            CMatrix::from_rows(vec![
                vec![crat(0, 0), crat(1, 0)],
                vec![crat(0, 0), crat(0, 0)],
            ]),
        );
        let d = diag_n(1);
        // (D·M)f picks coordinate 2 into coordinate 1, then scales by n¹ = 1
        let dm = compose_in(&d, &m, &l).unwrap().symbol;
        assert_eq!(*dm.matrix().get(0, 1), crat(1, 0));
        // (M·D): first scale (coordinate 2 by 2¹), then move into slot 1
        let md = compose_in(&m, &d, &l).unwrap().symbol;
        assert_eq!(*md.matrix().get(0, 1), crat(2, 0));
        // matrix × matrix on the finite block
        let mm = compose_in(&m, &m, &l).unwrap().symbol;
        assert!(mm.matrix().is_zero());
        assert!(mm.diag_terms().is_empty());
    }

    #[test]
    fn adjoint_is_contravariant_over_products() {
        let l = l1();
        let a = OperatorSymbol::diagonal(be(&[-1]), crat(2, 1));
        let b = OperatorSymbol::diagonal(be(&[1]), crat(0, 3));
        let ba = compose_in(&b, &a, &l).unwrap().symbol;
        let lhs = ba.adjoint();
        let rhs = compose_in(&a.adjoint(), &b.adjoint(), &l).unwrap().symbol;
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn classify_examples() {
        let l = l1();
        let two_id = OperatorSymbol::identity(1).scale(&crat(2, 0));
        let c = two_id.classify(&l).unwrap();
        assert!(c.is_homomorphism);
        assert!(c.is_totally_regular);
        assert!(c.is_isomorphism_certified);
        assert!(!c.is_projection);
        assert!(c.mono_certificate && c.epi_certificate);

        let a = diag_n(1);
        let c = a.classify(&l).unwrap();
        assert!(!c.is_homomorphism);
        // first failing source in canonical order is −1; r = 1 fails too
        // (no u with u ≤ 0 and −u ≤ −2)
        assert_eq!(c.hom_failure, Some(HomFailure::Source(be(&[-1]))));
        let r = be(&[1]);
        assert!(!l.elements().iter().any(|u| {
            a.representative_exists(u, &r) && a.representative_exists(&u.negated(), &r.negated())
        }));
        assert!(!c.is_totally_regular);

        let l2 = l2();
        let p = OperatorSymbol::block_indicator(2, 0);
        let c = p.classify(&l2).unwrap();
        assert!(c.is_projection);
        assert!(c.is_homomorphism);
        assert!(c.is_totally_regular);
        assert!(!c.mono_certificate, "an indicator kills a block");

        let z = OperatorSymbol::zero(2);
        let c = z.classify(&l2).unwrap();
        assert!(c.is_zero);
        assert!(
            c.is_homomorphism,
            "zero symbol is unconstrained in this model"
        );
    }

    #[test]
    fn matrix_unit_projection_classifies() {
        let l = l1();
        let p = OperatorSymbol::from_matrix(1, CMatrix::from_rows(vec![vec![crat(1, 0)]]));
        let c = p.classify(&l).unwrap();
        assert!(c.is_projection);
        assert!(!c.is_isomorphism_certified);
    }

    #[test]
    fn apply_examples() {
        let l = l1();
        let a = diag_n(1);
        let f = PipVector::pure_tail(1, 0, cone(), rat(-2));
        let out = a.apply_in(&f, &be(&[0]), &l).unwrap();
        assert_eq!(out.tails()[0], Tail::new(cone(), rat(-1)));
        assert!(out.member_at(&be(&[-1])).unwrap());

        let id = OperatorSymbol::identity(1);
        assert!(id
            .apply_in(&f, &be(&[0]), &l)
            .unwrap()
            .equivalent(&f)
            .unwrap());

        let m = OperatorSymbol::from_matrix(
            1,
            CMatrix::from_rows(vec![
                vec![crat(0, 0), crat(1, 0)],
                vec![crat(0, 0), crat(0, 0)],
            ]),
        );
        let e2 = PipVector::basis(1, 2);
        let out = m.apply_in(&e2, &be(&[0]), &l).unwrap();
        assert!(out.equivalent(&PipVector::basis(1, 1)).unwrap());

        // error paths
        assert!(matches!(
            a.apply_in(&f, &be(&[-1]), &l),
            Err(OperatorError::OutsideDomain(_))
        ));
        let g = PipVector::pure_tail(1, 0, cone(), rat(0));
        assert!(matches!(
            a.apply_in(&g, &be(&[1]), &l),
            Err(OperatorError::NotInSource(_))
        ));
    }

    #[test]
    fn representative_constructor_validates() {
        let a = diag_n(1);
        let rep = Representative::new(a.clone(), be(&[0]), be(&[1])).unwrap();
        assert_eq!(rep.target, be(&[0]));
        assert!(Representative::new(a, be(&[1]), be(&[1])).is_err());
    }

    #[test]
    fn apply_lands_in_every_admissible_target() {
        let l = l1();
        let a = diag_n(1);
        let f = PipVector::pure_tail(1, 0, crat(3, -2), rat(-3));
        for r in a.domain_image(&l).unwrap().domain {
            if !f.member_at(&r).unwrap() {
                continue;
            }
            let out = a.apply_in(&f, &r, &l).unwrap();
            for u in l.elements() {
                if a.representative_exists(u, &r) {
                    assert!(out.member_at(u).unwrap());
                }
            }
        }
    }

    #[test]
    fn homomorphism_product_is_homomorphism() {
        let l = l2();
        let p = OperatorSymbol::block_indicator(2, 0);
        let q = OperatorSymbol::block_indicator(2, 1);
        let c = compose_in(&p, &q, &l).unwrap();
        assert!(c.symbol.is_zero(), "orthogonal indicators compose to zero");
        let cl = c.symbol.classify(&l).unwrap();
        assert!(cl.is_homomorphism);
    }

    #[test]
    fn projection_splits_orthogonally() {
        let l = l2();
        let tol = ratio(1, 1000);
        let projections = [
            OperatorSymbol::block_indicator(2, 0),
            OperatorSymbol::block_indicator(2, 1),
            OperatorSymbol::from_matrix(2, CMatrix::from_rows(vec![vec![crat(1, 0)]])),
        ];
        let mut rng = crate::sampling::seeded_rng(77);
        for p in &projections {
            assert!(p.classify(&l).unwrap().is_projection);
            let one_minus_p = OperatorSymbol::identity(2).sub(p).unwrap();
            for _ in 0..10 {
                let (f, g, r) = crate::sampling::random_compatible_pair(&mut rng, &l);
                let pf = p.apply_in(&f, &r, &l).unwrap();
                let qf = one_minus_p.apply_in(&f, &r, &l).unwrap();
                assert!(pf.add(&qf).unwrap().equivalent(&f).unwrap());
                // ⟨Pf, (1−P)g⟩ = 0 exactly: the supports are disjoint
                let qg = one_minus_p.apply_in(&g, &r.negated(), &l).unwrap();
                let ip = crate::vectors::partial_inner_product(&pf, &qg, &l, &tol).unwrap();
                assert_eq!(ip.value, (0.0, 0.0));
                assert_eq!(ip.error_bound, 0.0);
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_symbol() -> impl Strategy<Value = OperatorSymbol> {
            let term = (
                proptest::collection::vec(-2i64..=2, 2),
                proptest::collection::vec((-2i64..=2, -2i64..=2), 2),
            );
            proptest::collection::vec(term, 0..3).prop_map(|terms| {
                let diag = terms
                    .into_iter()
                    .map(|(g, cs)| {
                        (
                            BlockExponent::from_ints(&g),
                            cs.into_iter().map(|(re, im)| crat(re, im)).collect(),
                        )
                    })
                    .collect();
                OperatorSymbol::new(2, diag, CMatrix::zeros(0)).unwrap()
            })
        }

        proptest! {
            #[test]
            fn adjoint_is_involutive(a in arb_symbol()) {
                prop_assert_eq!(a.adjoint().adjoint(), a);
            }

            #[test]
            fn domain_initial_image_final(a in arb_symbol()) {
                let l = l2();
                let di = a.domain_image(&l).unwrap();
                for r in &di.domain {
                    for r2 in l.elements() {
                        if l.space_leq(r2, r).unwrap() {
                            prop_assert!(di.domain.contains(r2));
                        }
                    }
                }
                for u in &di.image {
                    for u2 in l.elements() {
                        if l.space_leq(u, u2).unwrap() {
                            prop_assert!(di.image.contains(u2));
                        }
                    }
                }
            }
        }
    }
}
