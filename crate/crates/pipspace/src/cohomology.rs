//! Čech cochain complexes of the operator (co)sheaf over a finite
//! covering, with exact coboundary matrices, cohomology dimensions,
//! contracting homotopies, and refinement maps.
//!
//! Tuples are ordered by the canonical (lexicographic) total order on
//! exponent vectors. A p-cochain entry at a tuple lives in the section
//! space at the tuple's meet (sheaf mode) or join (cosheaf mode); the
//! coboundary is the alternating sum of restrictions/extensions, which
//! are coordinate inclusions, so all cochain maps are sparse {0,±1}
//! matrices. The maps never mix symbol-basis coordinates, so rank
//! computations split into one block per coordinate, each handled by two
//! independent exact elimination routes.

use itertools::Itertools;
use num::rational::BigRational;
use num::Zero;
use thiserror::Error;

use crate::cosheaf::{CosheafError, CosheafModel, CosheafVariant};
use crate::lattice::{BlockExponent, IndexLattice, LatticeError};
use crate::linalg::{rank_bareiss, RatMatrix, SparseIntMatrix};
use crate::sheaf::{SheafError, SheafModel};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CohomologyError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Cosheaf(#[from] CosheafError),
    #[error("covering must be nonempty")]
    EmptyCovering,
    #[error("covering member {0} is not in the lattice")]
    MemberNotInLattice(String),
    #[error("p_max must be at least 1")]
    InvalidPMax,
    #[error("covering mode {found} does not match the model ({expected})")]
    ModeMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("cosheaf extension undefined while assembling tuple ({tuple}): {reason}")]
    PartialExtensionAbort { tuple: String, reason: String },
    #[error("covering has no maximum member; contracting homotopy unavailable")]
    NoMaximumMember,
    #[error("refinement inclusion fails at {member}: V_{member} is not contained in V_{target}")]
    RefinementInclusionViolation { member: String, target: String },
    #[error("refinement assignment has {found} entries, covering has {expected}")]
    AssignmentLengthMismatch { expected: usize, found: usize },
    #[error("refinement assignment index {0} is out of range")]
    AssignmentOutOfRange(usize),
    #[error("the two elimination routes disagree at degree {0}; this is a bug")]
    RankMismatch(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoveringMode {
    /// Open covering; tuples meet at intersections.
    Sheaf,
    /// Closed covering; tuples combine along unions (lattice joins).
    Cosheaf,
}

impl CoveringMode {
    pub fn label(&self) -> &'static str {
        match self {
            CoveringMode::Sheaf => "sheaf",
            CoveringMode::Cosheaf => "cosheaf",
        }
    }
}

/// Finite family of distinct lattice indices in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Covering {
    members: Vec<BlockExponent>,
    mode: CoveringMode,
}

impl Covering {
    pub fn new(
        members: Vec<BlockExponent>,
        mode: CoveringMode,
        lattice: &IndexLattice,
    ) -> Result<Self, CohomologyError> {
        if members.is_empty() {
            return Err(CohomologyError::EmptyCovering);
        }
        let mut members = members;
        members.sort();
        members.dedup();
        for m in &members {
            if !lattice.contains(m) {
                return Err(CohomologyError::MemberNotInLattice(m.to_string()));
            }
        }
        Ok(Covering { members, mode })
    }

    pub fn members(&self) -> &[BlockExponent] {
        &self.members
    }

    pub fn mode(&self) -> CoveringMode {
        self.mode
    }

    /// The member t with j ≤ t for every member j, when present: the
    /// componentwise-minimal exponent, provided it is itself a member.
    pub fn maximum_member(&self) -> Option<BlockExponent> {
        let min = self
            .members
            .iter()
            .cloned()
            .reduce(|a, b| a.componentwise_min(&b))?;
        self.members.contains(&min).then_some(min)
    }

    /// Whether the family's join reaches the largest lattice member.
    pub fn join_is_lattice_top(&self, lattice: &IndexLattice) -> bool {
        let join = self
            .members
            .iter()
            .cloned()
            .reduce(|a, b| a.componentwise_min(&b));
        join == Some(lattice.min_exponent())
    }
}

/// Basis bookkeeping for one cochain degree: the (p+1)-tuples in
/// lexicographic order, each with its combined index and the coordinate
/// support of the section space there.
#[derive(Debug, Clone)]
pub struct DegreeData {
    pub tuples: Vec<Vec<usize>>,
    pub combined: Vec<BlockExponent>,
    pub supports: Vec<Vec<usize>>,
    pub offsets: Vec<usize>,
    pub dim: usize,
    /// Symbol-basis coordinate of each column (class of the direct-sum
    /// decomposition).
    pub col_class: Vec<usize>,
}

/// The assembled complex: degree data for p = 0..=p_max+1 and coboundary
/// matrices D_p: C^p → C^{p+1} for p = 0..=p_max, with DD = 0 verified
/// exactly on assembly.
#[derive(Debug, Clone)]
pub struct CochainComplex {
    pub degrees: Vec<DegreeData>,
    pub d: Vec<SparseIntMatrix>,
    pub p_max: usize,
    pub classes: usize,
}

enum ModelRef<'a> {
    Sheaf(&'a SheafModel),
    Cosheaf(&'a CosheafModel),
}

impl ModelRef<'_> {
    fn combined(&self, members: &[BlockExponent], tuple: &[usize]) -> BlockExponent {
        let fold = |a: BlockExponent, b: &BlockExponent| match self {
            ModelRef::Sheaf(_) => a.componentwise_max(b),
            ModelRef::Cosheaf(_) => a.componentwise_min(b),
        };
        let mut it = tuple.iter().map(|&i| &members[i]);
        let first = it.next().expect("tuples are nonempty").clone();
        it.fold(first, fold)
    }

    fn support(&self, r: &BlockExponent) -> Result<Vec<usize>, CohomologyError> {
        match self {
            ModelRef::Sheaf(m) => Ok(m.sections_at(r)?.to_vec()),
            ModelRef::Cosheaf(m) => Ok(m.cosections_at(r)?.to_vec()),
        }
    }

    fn dimension(&self) -> usize {
        match self {
            ModelRef::Sheaf(m) => m.symbols().dimension(),
            ModelRef::Cosheaf(m) => m.symbols().dimension(),
        }
    }

    /// For the partial cosheaf the map from a face's combined index into
    /// the tuple's combined index must be an allowed extension.
    fn map_allowed(&self, from: &BlockExponent, to: &BlockExponent) -> Result<(), String> {
        if let ModelRef::Cosheaf(m) = self {
            if matches!(m.variant(), CosheafVariant::PartialAdditive { .. }) {
                m.extension_allowed(from, to).map_err(|e| e.to_string())?;
            }
        }
        Ok(())
    }
}

fn assemble(
    model: &ModelRef<'_>,
    members: &[BlockExponent],
    p_max: usize,
) -> Result<CochainComplex, CohomologyError> {
    if p_max < 1 {
        return Err(CohomologyError::InvalidPMax);
    }
    if members.is_empty() {
        return Err(CohomologyError::EmptyCovering);
    }
    let n = members.len();
    let mut degrees = Vec::with_capacity(p_max + 2);
    for p in 0..=p_max + 1 {
        let tuples: Vec<Vec<usize>> = (0..n).combinations(p + 1).collect();
        let mut combined = Vec::with_capacity(tuples.len());
        let mut supports = Vec::with_capacity(tuples.len());
        let mut offsets = Vec::with_capacity(tuples.len());
        let mut col_class = Vec::new();
        let mut dim = 0usize;
        for t in &tuples {
            let idx = model.combined(members, t);
            let sup = model.support(&idx)?;
            offsets.push(dim);
            dim += sup.len();
            col_class.extend(sup.iter().copied());
            combined.push(idx);
            supports.push(sup);
        }
        degrees.push(DegreeData {
            tuples,
            combined,
            supports,
            offsets,
            dim,
            col_class,
        });
    }

    let mut d = Vec::with_capacity(p_max + 1);
    for p in 0..=p_max {
        let (lo, hi) = (&degrees[p], &degrees[p + 1]);
        let mut m = SparseIntMatrix::zeros(hi.dim, lo.dim);
        for (ti, tuple) in hi.tuples.iter().enumerate() {
            for k in 0..tuple.len() {
                let mut face = tuple.clone();
                face.remove(k);
                let fi = lo
                    .tuples
                    .binary_search(&face)
                    .expect("face of a tuple is a tuple");
                let sign = if k % 2 == 0 { 1 } else { -1 };
                model
                    .map_allowed(&lo.combined[fi], &hi.combined[ti])
                    .map_err(|reason| CohomologyError::PartialExtensionAbort {
                        tuple: tuple_label(members, tuple),
                        reason,
                    })?;
                for (pos, coord) in lo.supports[fi].iter().enumerate() {
                    let Some(tpos) = hi.supports[ti].iter().position(|c| c == coord) else {
                        return Err(CohomologyError::PartialExtensionAbort {
                            tuple: tuple_label(members, tuple),
                            reason: format!("coordinate {coord} is inadmissible at the union"),
                        });
                    };
                    m.add_entry(hi.offsets[ti] + tpos, lo.offsets[fi] + pos, sign);
                }
            }
        }
        d.push(m);
    }

    // DD = 0, exactly, in sparse integer arithmetic
    for p in 0..p_max {
        assert!(
            d[p + 1].compose(&d[p]).is_zero(),
            "coboundary square must vanish at degree {p}"
        );
    }
    Ok(CochainComplex {
        degrees,
        d,
        p_max,
        classes: model.dimension(),
    })
}

fn tuple_label(members: &[BlockExponent], tuple: &[usize]) -> String {
    tuple
        .iter()
        .map(|&i| members[i].to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Čech complex of the operator sheaf over an open covering.
pub fn build_sheaf_complex(
    model: &SheafModel,
    covering: &Covering,
    p_max: usize,
) -> Result<CochainComplex, CohomologyError> {
    if covering.mode() != CoveringMode::Sheaf {
        return Err(CohomologyError::ModeMismatch {
            expected: "sheaf",
            found: covering.mode().label(),
        });
    }
    assemble(&ModelRef::Sheaf(model), covering.members(), p_max)
}

/// Čech complex of an operator cosheaf over a closed covering.
pub fn build_cosheaf_complex(
    model: &CosheafModel,
    covering: &Covering,
    p_max: usize,
) -> Result<CochainComplex, CohomologyError> {
    if covering.mode() != CoveringMode::Cosheaf {
        return Err(CohomologyError::ModeMismatch {
            expected: "cosheaf",
            found: covering.mode().label(),
        });
    }
    assemble(&ModelRef::Cosheaf(model), covering.members(), p_max)
}

/// Assembly with an explicit member order (no canonical sorting); the
/// cohomology dimensions do not depend on the chosen total order, and a
/// test pins that down empirically.
pub fn build_sheaf_complex_ordered(
    model: &SheafModel,
    members: &[BlockExponent],
    p_max: usize,
) -> Result<CochainComplex, CohomologyError> {
    assemble(&ModelRef::Sheaf(model), members, p_max)
}

impl CochainComplex {
    /// Applies D_p to a rational cochain vector.
    pub fn apply_d(&self, p: usize, cochain: &[BigRational]) -> Vec<BigRational> {
        self.d[p].apply_rat(cochain)
    }

    /// Rank of D_p by two independent exact routes, split into one block
    /// per symbol-basis coordinate. The coboundary maps each coordinate
    /// to itself, so the matrix is block diagonal over classes; that
    /// invariant is asserted here before it is relied upon.
    fn rank_d(&self, p: usize) -> Result<usize, CohomologyError> {
        let m = &self.d[p];
        let rows = &self.degrees[p + 1].col_class;
        let cols = &self.degrees[p].col_class;
        let dense = m.to_rat_matrix();
        for r in 0..dense.rows() {
            for c in 0..dense.cols() {
                assert!(
                    dense.get(r, c).is_zero() || rows[r] == cols[c],
                    "coboundary must not mix symbol coordinates"
                );
            }
        }
        let mut total_gauss = 0usize;
        let mut total_bareiss = 0usize;
        for class in 0..self.classes {
            let row_idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i] == class).collect();
            let col_idx: Vec<usize> = (0..cols.len()).filter(|&i| cols[i] == class).collect();
            if row_idx.is_empty() || col_idx.is_empty() {
                continue;
            }
            let sub = RatMatrix::from_rows(
                row_idx
                    .iter()
                    .map(|&r| col_idx.iter().map(|&c| dense.get(r, c).clone()).collect())
                    .collect(),
            );
            total_gauss += sub.rank();
            total_bareiss += rank_bareiss(&sub);
        }
        if total_gauss != total_bareiss {
            return Err(CohomologyError::RankMismatch(p));
        }
        Ok(total_gauss)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeDims {
    pub degree: usize,
    pub dim_c: usize,
    pub dim_z: usize,
    pub dim_b: usize,
    pub dim_h: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohomologyReport {
    pub dims: Vec<DegreeDims>,
    /// H^p = 0 for every 1 ≤ p ≤ p_max.
    pub acyclic_above_zero: bool,
}

impl CohomologyReport {
    pub fn h(&self, p: usize) -> usize {
        self.dims[p].dim_h
    }
}

/// Exact cohomology dimensions per degree. dim H^p = dim Z^p − dim B^p
/// with dim Z^p = dim C^p − rank D_p and dim B^p = rank D_{p−1}.
pub fn cohomology_dims(complex: &CochainComplex) -> Result<CohomologyReport, CohomologyError> {
    let mut ranks = Vec::with_capacity(complex.p_max + 1);
    for p in 0..=complex.p_max {
        ranks.push(complex.rank_d(p)?);
    }
    let mut dims = Vec::new();
    for p in 0..=complex.p_max {
        let dim_c = complex.degrees[p].dim;
        let dim_z = dim_c - ranks[p];
        let dim_b = if p == 0 { 0 } else { ranks[p - 1] };
        dims.push(DegreeDims {
            degree: p,
            dim_c,
            dim_z,
            dim_b,
            dim_h: dim_z - dim_b,
        });
    }
    let acyclic_above_zero = dims.iter().skip(1).all(|d| d.dim_h == 0);
    Ok(CohomologyReport {
        dims,
        acyclic_above_zero,
    })
}

#[derive(Debug, Clone)]
pub struct HomotopyCertificate {
    pub top: BlockExponent,
    /// Degrees 1..=p_max at which D h + h D = id was verified exactly.
    pub degrees_verified: Vec<usize>,
}

/// Discrete analog of a partition-of-unity contraction: when the
/// covering contains a maximum member t, the cone maps
/// (hA)_S = ±A_{t∪S} satisfy D h + h D = id in degrees ≥ 1, so every
/// such covering is acyclic above degree zero.
pub fn contracting_homotopy(
    model: &SheafModel,
    covering: &Covering,
    complex: &CochainComplex,
) -> Result<HomotopyCertificate, CohomologyError> {
    for member in covering.members() {
        if !model.lattice().contains(member) {
            return Err(CohomologyError::MemberNotInLattice(member.to_string()));
        }
    }
    let top = covering
        .maximum_member()
        .ok_or(CohomologyError::NoMaximumMember)?;
    let t_idx = covering
        .members()
        .iter()
        .position(|m| *m == top)
        .expect("maximum member is a member");

    // h_p: C^p → C^{p−1} for p = 1..=p_max+1
    let mut h = Vec::with_capacity(complex.p_max + 1);
    for p in 1..=complex.p_max + 1 {
        let (lo, hi) = (&complex.degrees[p - 1], &complex.degrees[p]);
        let mut m = SparseIntMatrix::zeros(lo.dim, hi.dim);
        for (si, s) in lo.tuples.iter().enumerate() {
            if s.contains(&t_idx) {
                continue;
            }
            let mut cone = s.clone();
            let pos = cone
                .binary_search(&t_idx)
                .expect_err("t is not in the tuple");
            cone.insert(pos, t_idx);
            let ci = hi
                .tuples
                .binary_search(&cone)
                .expect("cone tuple exists at the next degree");
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            // adjoining the maximum member does not change the meet, so
            // the two supports coincide coordinate for coordinate
            for (k, coord) in lo.supports[si].iter().enumerate() {
                let cpos = hi.supports[ci]
                    .iter()
                    .position(|c| c == coord)
                    .expect("cone support matches");
                m.add_entry(lo.offsets[si] + k, hi.offsets[ci] + cpos, sign);
            }
        }
        h.push(m);
    }

    let mut degrees_verified = Vec::new();
    for p in 1..=complex.p_max {
        let dh = complex.d[p - 1].compose(&h[p - 1]);
        let hd = h[p].compose(&complex.d[p]);
        let id = SparseIntMatrix::identity(complex.degrees[p].dim);
        if !dh.add(&hd).sub(&id).is_zero() {
            panic!("homotopy identity failed at degree {p}; this is a bug");
        }
        degrees_verified.push(p);
    }
    Ok(HomotopyCertificate {
        top,
        degrees_verified,
    })
}

/// Basis data for H^p = Z^p / B^p of one complex at one degree.
#[derive(Debug, Clone)]
pub struct HomologyBasis {
    pub z_basis: Vec<Vec<BigRational>>,
    /// Columns spanning B^p (the coboundary image; zero-width at p = 0).
    pub b_matrix: RatMatrix,
    /// Cocycles extending a basis of B^p to a basis of Z^p.
    pub h_reps: Vec<Vec<BigRational>>,
}

pub fn homology_basis(complex: &CochainComplex, p: usize) -> HomologyBasis {
    let z_basis = complex.d[p].to_rat_matrix().kernel_basis();
    let dim_c = complex.degrees[p].dim;
    let b_matrix = if p == 0 {
        RatMatrix::zeros(dim_c, 0)
    } else {
        complex.d[p - 1].to_rat_matrix()
    };
    let base_rank = b_matrix.rank();
    let mut chosen: Vec<Vec<BigRational>> = Vec::new();
    for z in &z_basis {
        let mut cols: Vec<Vec<BigRational>> =
            (0..b_matrix.cols()).map(|c| b_matrix.column(c)).collect();
        cols.extend(chosen.iter().cloned());
        cols.push(z.clone());
        let stacked = matrix_from_columns(dim_c, &cols);
        if stacked.rank() > base_rank + chosen.len() {
            chosen.push(z.clone());
        }
    }
    HomologyBasis {
        z_basis,
        b_matrix,
        h_reps: chosen,
    }
}

fn matrix_from_columns(rows: usize, cols: &[Vec<BigRational>]) -> RatMatrix {
    let mut m = RatMatrix::zeros(rows, cols.len());
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            m.set(r, c, v.clone());
        }
    }
    m
}

/// Whether a cocycle is a coboundary: v ∈ im D_{p−1}.
pub fn is_coboundary(complex: &CochainComplex, p: usize, v: &[BigRational]) -> bool {
    if p == 0 {
        return v.iter().all(Zero::is_zero);
    }
    complex.d[p - 1].to_rat_matrix().solve(v).is_some()
}

/// Refinement comparison t: J → K with V_j ⊆ V_{t(j)}: the induced
/// cochain maps t*: C^p(K) → C^p(J), verified to commute with D, plus
/// the induced matrices on cohomology in the chosen H-bases.
#[derive(Debug)]
pub struct RefinementData {
    pub cochain_maps: Vec<SparseIntMatrix>,
    pub commutes_with_d: bool,
    /// Per degree p ≤ p_max: matrix H^p(K) → H^p(J).
    pub induced_on_h: Vec<RatMatrix>,
}

pub fn refinement_map(
    model: &SheafModel,
    fine: &Covering,
    coarse: &Covering,
    assignment: &[usize],
    fine_complex: &CochainComplex,
    coarse_complex: &CochainComplex,
) -> Result<RefinementData, CohomologyError> {
    let lattice = model.lattice();
    if assignment.len() != fine.members().len() {
        return Err(CohomologyError::AssignmentLengthMismatch {
            expected: fine.members().len(),
            found: assignment.len(),
        });
    }
    for (j, &ti) in assignment.iter().enumerate() {
        let target = coarse
            .members()
            .get(ti)
            .ok_or(CohomologyError::AssignmentOutOfRange(ti))?;
        if !lattice.space_leq(&fine.members()[j], target)? {
            return Err(CohomologyError::RefinementInclusionViolation {
                member: fine.members()[j].to_string(),
                target: target.to_string(),
            });
        }
    }
    let p_max = fine_complex.p_max.min(coarse_complex.p_max);

    let mut cochain_maps = Vec::with_capacity(p_max + 1);
    for p in 0..=p_max {
        let (jd, kd) = (&fine_complex.degrees[p], &coarse_complex.degrees[p]);
        let mut m = SparseIntMatrix::zeros(jd.dim, kd.dim);
        for (si, s) in jd.tuples.iter().enumerate() {
            let image: Vec<usize> = s.iter().map(|&j| assignment[j]).collect();
            let Some((sorted, sign)) = sort_with_sign(&image) else {
                continue; // degenerate tuple maps to zero
            };
            let ki = kd
                .tuples
                .binary_search(&sorted)
                .expect("image tuple exists in the coarse complex");
            // restriction from the coarse combined index down to the
            // fine one: supports only grow, so every coordinate lands
            for (pos, coord) in kd.supports[ki].iter().enumerate() {
                let jpos = jd.supports[si]
                    .iter()
                    .position(|c| c == coord)
                    .expect("restriction support is contained");
                m.add_entry(jd.offsets[si] + jpos, kd.offsets[ki] + pos, sign);
            }
        }
        cochain_maps.push(m);
    }

    let mut commutes = true;
    for p in 0..p_max {
        let lhs = cochain_maps[p + 1].compose(&coarse_complex.d[p]);
        let rhs = fine_complex.d[p].compose(&cochain_maps[p]);
        if !lhs.sub(&rhs).is_zero() {
            commutes = false;
        }
    }

    let mut induced = Vec::with_capacity(p_max + 1);
    for p in 0..=p_max {
        let hk = homology_basis(coarse_complex, p);
        let hj = homology_basis(fine_complex, p);
        let dim_cj = fine_complex.degrees[p].dim;
        let mut cols: Vec<Vec<BigRational>> = (0..hj.b_matrix.cols())
            .map(|c| hj.b_matrix.column(c))
            .collect();
        let b_cols = cols.len();
        cols.extend(hj.h_reps.iter().cloned());
        let solver = matrix_from_columns(dim_cj, &cols);
        let mut out = RatMatrix::zeros(hj.h_reps.len(), hk.h_reps.len());
        for (c, z) in hk.h_reps.iter().enumerate() {
            let w = cochain_maps[p].apply_rat(z);
            let x = solver
                .solve(&w)
                .expect("image of a cocycle decomposes over B ⊕ H");
            for r in 0..hj.h_reps.len() {
                out.set(r, c, x[b_cols + r].clone());
            }
        }
        induced.push(out);
    }

    Ok(RefinementData {
        cochain_maps,
        commutes_with_d: commutes,
        induced_on_h: induced,
    })
}

fn sort_with_sign(tuple: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut indexed: Vec<usize> = tuple.to_vec();
    let mut sign = 1i64;
    // insertion sort, counting transpositions
    for i in 1..indexed.len() {
        let mut j = i;
        while j > 0 && indexed[j - 1] > indexed[j] {
            indexed.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if indexed.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((indexed, sign))
}
