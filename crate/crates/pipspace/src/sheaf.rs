//! The operator sheaf V_r ↦ Op_r over an index lattice.
//!
//! Sections live in a fixed finite symbol space (a chosen set G of
//! diagonal exponent vectors plus the M₀×M₀ matrix units). Because the
//! boundedness certificate is support based, Op_r is a *coordinate*
//! subspace: the diagonal directions γ with γ ≤ α(r) − m (m the minimal
//! lattice exponent) plus all matrix units. Restrictions are then
//! coordinate inclusions, which is what later makes the Čech complex
//! exact integer linear algebra.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::Zero;
use rand::Rng;
use thiserror::Error;

use crate::lattice::{BlockExponent, IndexLattice, LatticeError};
use crate::linalg::CMatrix;
use crate::operators::{OperatorError, OperatorSymbol};
use crate::scalar::rat;
use crate::scalar::CRat;
use crate::vectors::{MultiTailVector, PipVector, Tail, VectorError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SheafError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error("symbol space has {found} blocks, lattice expects {expected}")]
    BlockMismatch { expected: usize, found: usize },
    #[error("section vector has {found} coordinates, symbol space has {expected}")]
    WrongDimension { expected: usize, found: usize },
    #[error("section {index} uses coordinate {coordinate} outside its claimed space")]
    MalformedSection { index: usize, coordinate: usize },
    #[error("restriction requires q ≤ p; got p = {p}, q = {q}")]
    OrderViolation { p: String, q: String },
    #[error(
        "gluing hypothesis fails: sections {first} and {second} differ at coordinate {coordinate}"
    )]
    S2Violation {
        first: usize,
        second: usize,
        coordinate: usize,
    },
    #[error("gluing requires a nonempty family")]
    EmptyFamily,
}

/// Finite coefficient space for operator symbols: an ordered set of
/// diagonal exponent vectors plus the matrix-unit basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSpace {
    blocks: usize,
    diag_exponents: Vec<BlockExponent>,
    matrix_dim: usize,
}

impl SymbolSpace {
    pub fn new(
        blocks: usize,
        mut diag_exponents: Vec<BlockExponent>,
        matrix_dim: usize,
    ) -> Result<Self, SheafError> {
        for g in &diag_exponents {
            if g.blocks() != blocks {
                return Err(SheafError::BlockMismatch {
                    expected: blocks,
                    found: g.blocks(),
                });
            }
        }
        diag_exponents.sort();
        diag_exponents.dedup();
        Ok(SymbolSpace {
            blocks,
            diag_exponents,
            matrix_dim,
        })
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn diag_exponents(&self) -> &[BlockExponent] {
        &self.diag_exponents
    }

    pub fn diag_len(&self) -> usize {
        self.diag_exponents.len()
    }

    pub fn matrix_dim(&self) -> usize {
        self.matrix_dim
    }

    /// d_W = |G| + M₀².
    pub fn dimension(&self) -> usize {
        self.diag_exponents.len() + self.matrix_dim * self.matrix_dim
    }

    pub fn basis_label(&self, i: usize) -> String {
        if i < self.diag_exponents.len() {
            format!("diag{}", self.diag_exponents[i])
        } else {
            let k = i - self.diag_exponents.len();
            let (r, c) = (k / self.matrix_dim, k % self.matrix_dim);
            format!("E[{},{}]", r + 1, c + 1)
        }
    }

    /// Symbol carried by a rational coordinate vector: scalar diagonal
    /// coefficients (the same on every block) plus the matrix block.
    pub fn symbol_from_coordinates(
        &self,
        coords: &[BigRational],
    ) -> Result<OperatorSymbol, SheafError> {
        if coords.len() != self.dimension() {
            return Err(SheafError::WrongDimension {
                expected: self.dimension(),
                found: coords.len(),
            });
        }
        let terms: Vec<(BlockExponent, Vec<CRat>)> = self
            .diag_exponents
            .iter()
            .zip(coords)
            .filter(|(_, c)| !c.is_zero())
            .map(|(g, c)| {
                (
                    g.clone(),
                    vec![CRat::new(c.clone(), BigRational::zero()); self.blocks],
                )
            })
            .collect();
        let mut matrix = CMatrix::zeros(self.matrix_dim);
        for r in 0..self.matrix_dim {
            for c in 0..self.matrix_dim {
                let v = &coords[self.diag_len() + r * self.matrix_dim + c];
                matrix.set(r, c, CRat::new(v.clone(), BigRational::zero()));
            }
        }
        Ok(OperatorSymbol::new(self.blocks, terms, matrix)?)
    }
}

/// The sheaf model: per lattice element, the coordinate support of Op_r.
#[derive(Debug, Clone)]
pub struct SheafModel {
    lattice: IndexLattice,
    symbols: SymbolSpace,
    sections: BTreeMap<BlockExponent, Vec<usize>>,
}

impl SheafModel {
    pub fn new(lattice: IndexLattice, symbols: SymbolSpace) -> Result<Self, SheafError> {
        if symbols.blocks() != lattice.blocks() {
            return Err(SheafError::BlockMismatch {
                expected: lattice.blocks(),
                found: symbols.blocks(),
            });
        }
        let m = lattice.min_exponent();
        let mut sections = BTreeMap::new();
        for r in lattice.elements() {
            let bound = r.sub(&m);
            let mut support: Vec<usize> = symbols
                .diag_exponents()
                .iter()
                .enumerate()
                .filter(|(_, g)| g.componentwise_le(&bound))
                .map(|(i, _)| i)
                .collect();
            support.extend(symbols.diag_len()..symbols.dimension());
            sections.insert(r.clone(), support);
        }
        Ok(SheafModel {
            lattice,
            symbols,
            sections,
        })
    }

    pub fn lattice(&self) -> &IndexLattice {
        &self.lattice
    }

    pub fn symbols(&self) -> &SymbolSpace {
        &self.symbols
    }

    /// Basis-index support of Op_r (diagonal directions admissible at r,
    /// plus every matrix unit).
    pub fn sections_at(&self, r: &BlockExponent) -> Result<&[usize], SheafError> {
        self.sections
            .get(r)
            .map(Vec::as_slice)
            .ok_or_else(|| LatticeError::NotAnElement(r.to_string()).into())
    }

    /// Whether a coordinate vector lies in Op_r.
    pub fn in_section(
        &self,
        r: &BlockExponent,
        coords: &[BigRational],
    ) -> Result<bool, SheafError> {
        if coords.len() != self.symbols.dimension() {
            return Err(SheafError::WrongDimension {
                expected: self.symbols.dimension(),
                found: coords.len(),
            });
        }
        let support = self.sections_at(r)?;
        Ok(coords
            .iter()
            .enumerate()
            .all(|(i, c)| c.is_zero() || support.contains(&i)))
    }

    /// ρ^p_q for q ≤ p: the identity on coordinates (Op_p ⊆ Op_q).
    pub fn restrict(
        &self,
        section: &[BigRational],
        p: &BlockExponent,
        q: &BlockExponent,
    ) -> Result<Vec<BigRational>, SheafError> {
        if !self.lattice.space_leq(q, p)? {
            return Err(SheafError::OrderViolation {
                p: p.to_string(),
                q: q.to_string(),
            });
        }
        if !self.in_section(p, section)? {
            return Err(SheafError::MalformedSection {
                index: 0,
                coordinate: first_offending(section, self.sections_at(p)?),
            });
        }
        debug_assert!(
            self.in_section(q, section).unwrap_or(false),
            "restriction must stay a section"
        );
        Ok(section.to_vec())
    }

    /// Glues sections agreeing on pairwise meets into the unique section
    /// at the join of their indices.
    pub fn glue(
        &self,
        family: &[(BlockExponent, Vec<BigRational>)],
    ) -> Result<(BlockExponent, Vec<BigRational>), SheafError> {
        if family.is_empty() {
            return Err(SheafError::EmptyFamily);
        }
        for (idx, (r, s)) in family.iter().enumerate() {
            self.sections_at(r)?;
            if !self.in_section(r, s)? {
                return Err(SheafError::MalformedSection {
                    index: idx,
                    coordinate: first_offending(s, self.sections_at(r)?),
                });
            }
        }
        // restrictions are coordinate identities, so agreement on the
        // meet is plain vector equality
        for i in 0..family.len() {
            for j in i + 1..family.len() {
                if let Some(c) = first_difference(&family[i].1, &family[j].1) {
                    return Err(SheafError::S2Violation {
                        first: i,
                        second: j,
                        coordinate: c,
                    });
                }
            }
        }
        let join = family
            .iter()
            .map(|(r, _)| r.clone())
            .reduce(|a, b| a.componentwise_min(&b))
            .expect("nonempty family");
        let glued = family[0].1.clone();
        debug_assert!(self.in_section(&join, &glued).unwrap_or(false));
        Ok((join, glued))
    }

    /// Presheaf functor laws: ρ_p^p = id and composition along chains.
    pub fn check_presheaf_laws(&self) -> Result<PresheafLawReport, SheafError> {
        let mut chains = 0usize;
        for p in self.lattice.elements() {
            let basis = self.basis_sections(p);
            for s in &basis {
                if self.restrict(s, p, p)? != *s {
                    return Ok(PresheafLawReport {
                        identity_law: false,
                        composition_law: true,
                        chains_checked: chains,
                    });
                }
            }
            for q in self.lattice.elements() {
                if !self.lattice.space_leq(q, p)? {
                    continue;
                }
                for r in self.lattice.elements() {
                    if !self.lattice.space_leq(r, q)? {
                        continue;
                    }
                    chains += 1;
                    for s in &basis {
                        let two_step = self.restrict(&self.restrict(s, p, q)?, q, r)?;
                        let direct = self.restrict(s, p, r)?;
                        if two_step != direct {
                            return Ok(PresheafLawReport {
                                identity_law: true,
                                composition_law: false,
                                chains_checked: chains,
                            });
                        }
                    }
                }
            }
        }
        Ok(PresheafLawReport {
            identity_law: true,
            composition_law: true,
            chains_checked: chains,
        })
    }

    /// S1 over all pairs: sections agreeing after restriction to both
    /// members of a pair are equal. Exact because restrictions are
    /// coordinate identities; checked over the basis sections.
    pub fn check_s1(&self) -> Result<bool, SheafError> {
        for r in self.lattice.elements() {
            for s in self.lattice.elements() {
                let meet = self.lattice.meet(r, s)?;
                for a in self.basis_sections(r) {
                    for b in self.basis_sections(r) {
                        let ra = self.restrict(&a, r, &meet)?;
                        let rb = self.restrict(&b, r, &meet)?;
                        if ra == rb && a != b {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }

    /// S2 over all pairs and all shared basis directions: gluing exists
    /// and restricts back to the inputs.
    pub fn check_s2(&self) -> Result<S2Report, SheafError> {
        let mut glued = 0usize;
        for r in self.lattice.elements() {
            for s in self.lattice.elements() {
                let sup_r = self.sections_at(r)?.to_vec();
                let sup_s = self.sections_at(s)?.to_vec();
                for &i in sup_r.iter().filter(|i| sup_s.contains(i)) {
                    let v = self.basis_vector(i);
                    let (join, g) = self.glue(&[(r.clone(), v.clone()), (s.clone(), v.clone())])?;
                    if g != v || self.restrict(&g, &join, &self.lattice.meet(r, s)?).is_err() {
                        return Ok(S2Report {
                            pass: false,
                            families_glued: glued,
                        });
                    }
                    glued += 1;
                }
            }
        }
        Ok(S2Report {
            pass: true,
            families_glued: glued,
        })
    }

    pub fn basis_vector(&self, i: usize) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); self.symbols.dimension()];
        v[i] = rat(1);
        v
    }

    fn basis_sections(&self, r: &BlockExponent) -> Vec<Vec<BigRational>> {
        self.sections
            .get(r)
            .map(|sup| sup.iter().map(|&i| self.basis_vector(i)).collect())
            .unwrap_or_default()
    }
}

fn first_offending(section: &[BigRational], support: &[usize]) -> usize {
    section
        .iter()
        .enumerate()
        .find(|(i, c)| !c.is_zero() && !support.contains(i))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

fn first_difference(a: &[BigRational], b: &[BigRational]) -> Option<usize> {
    a.iter().zip(b).position(|(x, y)| x != y)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresheafLawReport {
    pub identity_law: bool,
    pub composition_law: bool,
    pub chains_checked: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct S2Report {
    pub pass: bool,
    pub families_glued: usize,
}

/// Outcome of the vector-level well-definedness check for one glued
/// section: the glued operator's action on f = f_r + f_s is independent
/// of the decomposition, by exact tail and finite-part arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlueActionReport {
    pub decompositions_checked: usize,
    pub pass: bool,
}

/// Splits f ∈ V_{r∨s} as f_r + f_s: each tail block goes to whichever of
/// r, s accommodates it (ties broken toward r unless the coin says
/// otherwise), finite coordinates are split by the coin.
pub fn random_decomposition<R: Rng>(
    f: &PipVector,
    r: &BlockExponent,
    s: &BlockExponent,
    rng: &mut R,
) -> Result<(PipVector, PipVector), SheafError> {
    let half = crate::scalar::ratio(-1, 2);
    let blocks = f.blocks();
    let mut tails_r = vec![Tail::zero(); blocks];
    let mut tails_s = vec![Tail::zero(); blocks];
    for (j, t) in f.tails().iter().enumerate() {
        if t.is_zero() {
            continue;
        }
        let fits_r = t.exponent.clone() + r.component(j) < half;
        let fits_s = t.exponent.clone() + s.component(j) < half;
        match (fits_r, fits_s) {
            (true, true) => {
                if rng.random_bool(0.5) {
                    // split the coefficient between both sides
                    let c1 = crate::scalar::crat(rng.random_range(-2..3), rng.random_range(-2..3));
                    tails_r[j] = Tail::new(t.coefficient.clone() - c1.clone(), t.exponent.clone());
                    tails_s[j] = Tail::new(c1, t.exponent.clone());
                } else if rng.random_bool(0.5) {
                    tails_r[j] = t.clone();
                } else {
                    tails_s[j] = t.clone();
                }
            }
            (true, false) => tails_r[j] = t.clone(),
            (false, true) => tails_s[j] = t.clone(),
            (false, false) => {
                return Err(SheafError::OrderViolation {
                    p: r.to_string(),
                    q: s.to_string(),
                })
            }
        }
    }
    let mut fin_r = BTreeMap::new();
    let mut fin_s = BTreeMap::new();
    for (&n, v) in f.finite_part() {
        if rng.random_bool(0.5) {
            fin_r.insert(n, v.clone());
        } else {
            fin_s.insert(n, v.clone());
        }
    }
    let fr = PipVector::new(blocks, f.tail_start(), fin_r, tails_r).map_err(SheafError::from)?;
    let fs = PipVector::new(blocks, f.tail_start(), fin_s, tails_s).map_err(SheafError::from)?;
    Ok((fr, fs))
}

/// Vector-level gluing well-definedness: for sampled f and two random
/// decompositions f = f_r + f_s = f'_r + f'_s, the glued symbol gives
/// A·f_r + A·f_s = A·f'_r + A·f'_s = A·f exactly.
pub fn vector_gluing_check<R: Rng>(
    model: &SheafModel,
    r: &BlockExponent,
    s: &BlockExponent,
    section: &[BigRational],
    samples: &[PipVector],
    rounds_per_sample: usize,
    rng: &mut R,
) -> Result<GlueActionReport, SheafError> {
    let symbol = model.symbols().symbol_from_coordinates(section)?;
    let mut checked = 0usize;
    for f in samples {
        let direct = symbol.apply_multi(&MultiTailVector::from_pip(f))?;
        for _ in 0..rounds_per_sample {
            let (fr, fs) = random_decomposition(f, r, s, rng)?;
            let sum_back = fr.add(&fs)?;
            if !sum_back.equivalent(f)? {
                return Ok(GlueActionReport {
                    decompositions_checked: checked,
                    pass: false,
                });
            }
            let ar = symbol.apply_multi(&MultiTailVector::from_pip(&fr))?;
            let a_s = symbol.apply_multi(&MultiTailVector::from_pip(&fs))?;
            let combined = ar.add(&a_s)?;
            if !combined.equivalent(&direct)? {
                return Ok(GlueActionReport {
                    decompositions_checked: checked,
                    pass: false,
                });
            }
            checked += 1;
        }
    }
    Ok(GlueActionReport {
        decompositions_checked: checked,
        pass: true,
    })
}
