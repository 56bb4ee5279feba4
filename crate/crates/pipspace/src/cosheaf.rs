//! Cosheaves of operators over the index lattice, in three variants:
//!
//! * `PartialAdditive` — cosections are the sheaf's Op_r; extensions are
//!   only attempted along the coarsened relation q ⪯ p (∃w in the
//!   witness family with p = q ∨ w), and an individual cosection may
//!   still fail to extend when its coordinates are inadmissible at the
//!   target. On a full lattice ⪯ coincides with ≤, since w = p always
//!   works; the relation only bites on doctored witness families.
//! * `UniversalLeftMultipliers` — cosections are the everywhere-defined
//!   symbols (d(C) = I), constant across the lattice; extensions always
//!   exist.
//! * `FinalSet` — cosections at r are the symbols attaining r as a
//!   target (r ∈ i(A)); supports grow along the index order, extensions
//!   are coordinate inclusions.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::Zero;
use thiserror::Error;

use crate::lattice::{BlockExponent, IndexLattice, LatticeError};
use crate::scalar::rat;
use crate::sheaf::{SheafError, SymbolSpace};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CosheafError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error("extension undefined: {from} ⪯ {to} fails (no join witness in the family)")]
    ExtensionUndefined { from: String, to: String },
    #[error("extension undefined: order {from} ≤ {to} fails")]
    OrderViolation { from: String, to: String },
    #[error("cosection does not extend: coordinate {coordinate} is inadmissible at {to}")]
    SectionNotExtendable { coordinate: usize, to: String },
    #[error("cosection vector has {found} coordinates, expected {expected}")]
    WrongDimension { expected: usize, found: usize },
    #[error("cosection {index} uses coordinate {coordinate} outside its claimed space")]
    MalformedCosection { index: usize, coordinate: usize },
    #[error("family is empty")]
    EmptyFamily,
    #[error("CS2 witness construction failed: no unique cosection at the meet")]
    Cs2Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CosheafVariant {
    /// Sheaf sections with partially defined extensions; the witness
    /// family defaults to the whole lattice.
    PartialAdditive {
        witness_family: Option<Vec<BlockExponent>>,
    },
    UniversalLeftMultipliers,
    FinalSet,
}

impl CosheafVariant {
    pub fn label(&self) -> &'static str {
        match self {
            CosheafVariant::PartialAdditive { .. } => "partial_additive",
            CosheafVariant::UniversalLeftMultipliers => "universal_left_multipliers",
            CosheafVariant::FinalSet => "final_set",
        }
    }
}

/// Diagonal directions of the universal left multipliers: those γ ∈ G
/// admissible at every lattice element (equivalently γ ≤ 0). All matrix
/// units are universal. Returned as basis indices into the symbol space.
pub fn universal_left_multipliers(lattice: &IndexLattice, symbols: &SymbolSpace) -> Vec<usize> {
    let m = lattice.min_exponent();
    let mut support: Vec<usize> = symbols
        .diag_exponents()
        .iter()
        .enumerate()
        .filter(|(_, g)| {
            lattice
                .elements()
                .iter()
                .all(|r| g.componentwise_le(&r.sub(&m)))
        })
        .map(|(i, _)| i)
        .collect();
    support.extend(symbols.diag_len()..symbols.dimension());
    support
}

#[derive(Debug, Clone)]
pub struct CosheafModel {
    lattice: IndexLattice,
    symbols: SymbolSpace,
    variant: CosheafVariant,
    cosections: BTreeMap<BlockExponent, Vec<usize>>,
}

impl CosheafModel {
    pub fn new(
        lattice: IndexLattice,
        symbols: SymbolSpace,
        variant: CosheafVariant,
    ) -> Result<Self, CosheafError> {
        if symbols.blocks() != lattice.blocks() {
            return Err(SheafError::BlockMismatch {
                expected: lattice.blocks(),
                found: symbols.blocks(),
            }
            .into());
        }
        let m = lattice.min_exponent();
        let big = lattice.max_exponent();
        let mut cosections = BTreeMap::new();
        for r in lattice.elements() {
            let diag: Vec<usize> = match &variant {
                CosheafVariant::UniversalLeftMultipliers => {
                    universal_left_multipliers(&lattice, &symbols)
                        .into_iter()
                        .filter(|&i| i < symbols.diag_len())
                        .collect()
                }
                CosheafVariant::FinalSet => {
                    // r ∈ i(A_γ) ⇔ α(r) ≤ M − γ ⇔ γ ≤ M − α(r)
                    let bound = big.sub(r);
                    symbols
                        .diag_exponents()
                        .iter()
                        .enumerate()
                        .filter(|(_, g)| g.componentwise_le(&bound))
                        .map(|(i, _)| i)
                        .collect()
                }
                CosheafVariant::PartialAdditive { .. } => {
                    let bound = r.sub(&m);
                    symbols
                        .diag_exponents()
                        .iter()
                        .enumerate()
                        .filter(|(_, g)| g.componentwise_le(&bound))
                        .map(|(i, _)| i)
                        .collect()
                }
            };
            let mut support = diag;
            support.extend(symbols.diag_len()..symbols.dimension());
            cosections.insert(r.clone(), support);
        }
        Ok(CosheafModel {
            lattice,
            symbols,
            variant,
            cosections,
        })
    }

    pub fn lattice(&self) -> &IndexLattice {
        &self.lattice
    }

    pub fn symbols(&self) -> &SymbolSpace {
        &self.symbols
    }

    pub fn variant(&self) -> &CosheafVariant {
        &self.variant
    }

    pub fn cosections_at(&self, r: &BlockExponent) -> Result<&[usize], CosheafError> {
        self.cosections
            .get(r)
            .map(Vec::as_slice)
            .ok_or_else(|| LatticeError::NotAnElement(r.to_string()).into())
    }

    pub fn in_cosection(
        &self,
        r: &BlockExponent,
        coords: &[BigRational],
    ) -> Result<bool, CosheafError> {
        if coords.len() != self.symbols.dimension() {
            return Err(CosheafError::WrongDimension {
                expected: self.symbols.dimension(),
                found: coords.len(),
            });
        }
        let support = self.cosections_at(r)?;
        Ok(coords
            .iter()
            .enumerate()
            .all(|(i, c)| c.is_zero() || support.contains(&i)))
    }

    /// Whether δ^p_q is attempted at all: plain order for the total
    /// variants, the coarsened relation for the partial one.
    pub fn extension_allowed(
        &self,
        q: &BlockExponent,
        p: &BlockExponent,
    ) -> Result<(), CosheafError> {
        match &self.variant {
            CosheafVariant::UniversalLeftMultipliers | CosheafVariant::FinalSet => {
                if self.lattice.space_leq(q, p)? {
                    Ok(())
                } else {
                    Err(CosheafError::OrderViolation {
                        from: q.to_string(),
                        to: p.to_string(),
                    })
                }
            }
            CosheafVariant::PartialAdditive { witness_family } => {
                self.lattice
                    .position(q)
                    .ok_or_else(|| CosheafError::from(LatticeError::NotAnElement(q.to_string())))?;
                self.lattice
                    .position(p)
                    .ok_or_else(|| CosheafError::from(LatticeError::NotAnElement(p.to_string())))?;
                let family: &[BlockExponent] = witness_family
                    .as_deref()
                    .unwrap_or_else(|| self.lattice.elements());
                if family.iter().any(|w| q.componentwise_min(w) == *p) {
                    Ok(())
                } else {
                    Err(CosheafError::ExtensionUndefined {
                        from: q.to_string(),
                        to: p.to_string(),
                    })
                }
            }
        }
    }

    /// δ^p_q: identity on coordinates when defined. For the partial
    /// variant a cosection extends only if its support is admissible at
    /// the target (the genuine operator-level obstruction: q ∈ d(A)
    /// but p ∉ d(A)).
    pub fn extend(
        &self,
        cosection: &[BigRational],
        q: &BlockExponent,
        p: &BlockExponent,
    ) -> Result<Vec<BigRational>, CosheafError> {
        self.extension_allowed(q, p)?;
        if !self.in_cosection(q, cosection)? {
            return Err(CosheafError::MalformedCosection {
                index: 0,
                coordinate: first_offending(cosection, self.cosections_at(q)?),
            });
        }
        let target = self.cosections_at(p)?;
        if let Some((i, _)) = cosection
            .iter()
            .enumerate()
            .find(|(i, c)| !c.is_zero() && !target.contains(i))
        {
            return Err(CosheafError::SectionNotExtendable {
                coordinate: i,
                to: p.to_string(),
            });
        }
        Ok(cosection.to_vec())
    }

    /// δ^p_p = id and the cocycle law δ^t_z ∘ δ^z_q = δ^t_q on all
    /// chains where the relevant extensions are defined.
    pub fn check_extension_laws(&self) -> Result<ExtensionLawReport, CosheafError> {
        let mut chains = 0usize;
        for q in self.lattice.elements() {
            let basis = self.basis_cosections(q)?;
            for v in &basis {
                if self.extend(v, q, q)? != *v {
                    return Ok(ExtensionLawReport {
                        identity_law: false,
                        cocycle_law: true,
                        chains_checked: chains,
                    });
                }
            }
            for z in self.lattice.elements() {
                if self.extension_allowed(q, z).is_err() {
                    continue;
                }
                for t in self.lattice.elements() {
                    if self.extension_allowed(z, t).is_err()
                        || self.extension_allowed(q, t).is_err()
                    {
                        continue;
                    }
                    chains += 1;
                    for v in &basis {
                        let step = match self.extend(v, q, z) {
                            Ok(mid) => self.extend(&mid, z, t),
                            Err(e) => Err(e),
                        };
                        let direct = self.extend(v, q, t);
                        match (step, direct) {
                            (Ok(a), Ok(b)) if a == b => {}
                            (Err(_), Err(_)) => {}
                            _ => {
                                return Ok(ExtensionLawReport {
                                    identity_law: true,
                                    cocycle_law: false,
                                    chains_checked: chains,
                                })
                            }
                        }
                    }
                }
            }
        }
        Ok(ExtensionLawReport {
            identity_law: true,
            cocycle_law: true,
            chains_checked: chains,
        })
    }

    /// CS1/CS2 (or their partial forms) over one closed cover J, checked
    /// exhaustively on basis-generated families.
    pub fn check_cover(&self, members: &[BlockExponent]) -> Result<CosheafReport, CosheafError> {
        if members.is_empty() {
            return Err(CosheafError::EmptyFamily);
        }
        for r in members {
            self.cosections_at(r)?;
        }
        let meet = members
            .iter()
            .cloned()
            .reduce(|a, b| a.componentwise_max(&b))
            .expect("nonempty cover");
        self.lattice
            .position(&meet)
            .ok_or_else(|| CosheafError::from(LatticeError::NotAnElement(meet.to_string())))?;

        // CS1: cosections at the meet with equal extensions to every
        // member are equal. Extensions are coordinate identities, so
        // distinct basis vectors must stay distinct.
        let meet_basis = self.basis_cosections(&meet)?;
        let mut cs1 = true;
        'outer: for a in &meet_basis {
            for b in &meet_basis {
                if a == b {
                    continue;
                }
                let mut all_equal = true;
                let mut any_defined = false;
                for r in members {
                    match (self.extend(a, &meet, r), self.extend(b, &meet, r)) {
                        (Ok(x), Ok(y)) => {
                            any_defined = true;
                            if x != y {
                                all_equal = false;
                                break;
                            }
                        }
                        _ => {
                            all_equal = false;
                            break;
                        }
                    }
                }
                if all_equal && any_defined {
                    cs1 = false;
                    break 'outer;
                }
            }
        }

        // CS2: basis-generated families with pairwise-equal extensions to
        // joins glue to a unique cosection at the meet.
        let mut cs2 = true;
        let mut families_glued = 0usize;
        let mut vacuous = 0usize;
        for i in 0..self.symbols.dimension() {
            let v = self.basis_vector(i);
            if !members
                .iter()
                .all(|r| self.in_cosection(r, &v).unwrap_or(false))
            {
                continue;
            }
            let family: Vec<(BlockExponent, Vec<BigRational>)> =
                members.iter().map(|r| (r.clone(), v.clone())).collect();
            match self.glue_family(&family) {
                Ok(FamilyOutcome::Glued(t)) => {
                    families_glued += 1;
                    if t != v {
                        cs2 = false;
                    }
                }
                Ok(FamilyOutcome::NoGlueRequired { .. }) => vacuous += 1,
                _ => cs2 = false,
            }
        }
        Ok(CosheafReport {
            variant: self.variant.label(),
            cs1,
            cs2,
            families_glued,
            families_vacuous: vacuous,
        })
    }

    /// Applies the gluing clause to one explicit family {t_j at W_j}.
    /// When the pairwise hypothesis fails the outcome is
    /// `NoGlueRequired`, not an error.
    pub fn glue_family(
        &self,
        family: &[(BlockExponent, Vec<BigRational>)],
    ) -> Result<FamilyOutcome, CosheafError> {
        if family.is_empty() {
            return Err(CosheafError::EmptyFamily);
        }
        for (idx, (r, t)) in family.iter().enumerate() {
            if !self.in_cosection(r, t)? {
                return Err(CosheafError::MalformedCosection {
                    index: idx,
                    coordinate: first_offending(t, self.cosections_at(r)?),
                });
            }
        }
        // pairwise hypothesis: extensions to the join exist and agree
        for i in 0..family.len() {
            for j in i + 1..family.len() {
                let (ri, ti) = &family[i];
                let (rj, tj) = &family[j];
                let join = ri.componentwise_min(rj);
                if self.lattice.position(&join).is_none() {
                    return Ok(FamilyOutcome::NoGlueRequired {
                        first: i,
                        second: j,
                    });
                }
                match (self.extend(ti, ri, &join), self.extend(tj, rj, &join)) {
                    (Ok(a), Ok(b)) => {
                        if a != b {
                            return Ok(FamilyOutcome::NoGlueRequired {
                                first: i,
                                second: j,
                            });
                        }
                    }
                    _ => {
                        return Ok(FamilyOutcome::NoGlueRequired {
                            first: i,
                            second: j,
                        })
                    }
                }
            }
        }
        // the unique t at the meet with δ_W^{W_j}(t) = t_j: extensions
        // are coordinate identities, so all t_j coincide and t is that
        // common vector
        let meet = family
            .iter()
            .map(|(r, _)| r.clone())
            .reduce(|a, b| a.componentwise_max(&b))
            .expect("nonempty family");
        let t = family[0].1.clone();
        for (r, tj) in family {
            if &t != tj {
                return Err(CosheafError::Cs2Failure);
            }
            if self.extend(&t, &meet, r).is_err() {
                return Err(CosheafError::Cs2Failure);
            }
        }
        if !self.in_cosection(&meet, &t)? {
            return Err(CosheafError::Cs2Failure);
        }
        Ok(FamilyOutcome::Glued(t))
    }

    pub fn basis_vector(&self, i: usize) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); self.symbols.dimension()];
        v[i] = rat(1);
        v
    }

    fn basis_cosections(&self, r: &BlockExponent) -> Result<Vec<Vec<BigRational>>, CosheafError> {
        Ok(self
            .cosections_at(r)?
            .iter()
            .map(|&i| self.basis_vector(i))
            .collect())
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

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyOutcome {
    Glued(Vec<BigRational>),
    /// The pairwise hypothesis failed between these members; the gluing
    /// clause is vacuous for this family.
    NoGlueRequired {
        first: usize,
        second: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionLawReport {
    pub identity_law: bool,
    pub cocycle_law: bool,
    pub chains_checked: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosheafReport {
    pub variant: &'static str,
    pub cs1: bool,
    pub cs2: bool,
    pub families_glued: usize,
    pub families_vacuous: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sheaf::SheafModel;

    fn be(v: &[i64]) -> BlockExponent {
        BlockExponent::from_ints(v)
    }

    fn l1() -> IndexLattice {
        IndexLattice::close(&[be(&[1])], true).unwrap()
    }

    fn l2() -> IndexLattice {
        IndexLattice::close(&[be(&[1, 0]), be(&[0, 1])], true).unwrap()
    }

    fn g2() -> Vec<BlockExponent> {
        vec![be(&[1, 0]), be(&[0, 1]), be(&[0, 0]), be(&[-1, -1])]
    }

    #[test]
    fn universal_multipliers_examples() {
        let s1 = SymbolSpace::new(1, vec![be(&[0]), be(&[1])], 0).unwrap();
        let lop = universal_left_multipliers(&l1(), &s1);
        assert_eq!(lop, vec![0]); // γ = 0 only

        let s2 = SymbolSpace::new(2, g2(), 1).unwrap();
        let lop = universal_left_multipliers(&l2(), &s2);
        // γ = (−1,−1) and (0,0), plus the matrix unit
        assert_eq!(lop.len(), 3);
        let exps = s2.diag_exponents();
        for &i in &lop {
            if i < s2.diag_len() {
                assert!(exps[i].componentwise_le(&be(&[0, 0])));
            }
        }
        // matrix units always included
        assert!(lop.contains(&s2.diag_len()));
    }

    #[test]
    fn final_set_supports_grow_with_the_space() {
        let s1 = SymbolSpace::new(1, vec![be(&[0]), be(&[1])], 0).unwrap();
        let model = CosheafModel::new(l1(), s1, CosheafVariant::FinalSet).unwrap();
        // Ôp_r = {γ ≤ 1 − α(r)}
        assert_eq!(model.cosections_at(&be(&[1])).unwrap(), &[0]);
        assert_eq!(model.cosections_at(&be(&[0])).unwrap(), &[0, 1]);
        assert_eq!(model.cosections_at(&be(&[-1])).unwrap(), &[0, 1]);
        // monotone: q ≤ p ⇒ Ôp_q ⊆ Ôp_p
        let l = model.lattice().clone();
        for q in l.elements() {
            for p in l.elements() {
                if l.space_leq(q, p).unwrap() {
                    let sq = model.cosections_at(q).unwrap();
                    let sp = model.cosections_at(p).unwrap();
                    assert!(sq.iter().all(|i| sp.contains(i)));
                }
            }
        }
        // extension from V_0 up to the largest space V_{−1} keeps γ=1
        let v = model.basis_vector(1);
        let out = model.extend(&v, &be(&[0]), &be(&[-1])).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn universal_extensions_are_total_identities() {
        let s1 = SymbolSpace::new(1, vec![be(&[0]), be(&[1])], 0).unwrap();
        let model = CosheafModel::new(l1(), s1, CosheafVariant::UniversalLeftMultipliers).unwrap();
        let l = model.lattice().clone();
        for q in l.elements() {
            for p in l.elements() {
                if !l.space_leq(q, p).unwrap() {
                    continue;
                }
                for &i in model.cosections_at(q).unwrap() {
                    let v = model.basis_vector(i);
                    assert_eq!(model.extend(&v, q, p).unwrap(), v);
                }
            }
        }
    }

    #[test]
    fn partial_variant_reports_extension_undefined_on_doctored_family() {
        let s2 = SymbolSpace::new(2, g2(), 0).unwrap();
        // witness family without any w giving (0,0) = (1,1) ∨ w
        let doctored = vec![be(&[1, 1]), be(&[1, 0])];
        let model = CosheafModel::new(
            l2(),
            s2,
            CosheafVariant::PartialAdditive {
                witness_family: Some(doctored),
            },
        )
        .unwrap();
        let v = model.basis_vector(1); // γ = (0,0)
        let err = model.extend(&v, &be(&[1, 1]), &be(&[0, 0])).unwrap_err();
        assert!(matches!(err, CosheafError::ExtensionUndefined { .. }));
        // with the full lattice as witness family the same extension is
        // attempted (w = (0,0) works) and succeeds for γ = (0,0)
        let s2 = SymbolSpace::new(2, g2(), 0).unwrap();
        let full = CosheafModel::new(
            l2(),
            s2,
            CosheafVariant::PartialAdditive {
                witness_family: None,
            },
        )
        .unwrap();
        assert_eq!(full.extend(&v, &be(&[1, 1]), &be(&[0, 0])).unwrap(), v);
        // but a section becomes inadmissible once the target drops below
        // its exponent: γ = (1,0) lives at (1,1), not at (−1,0)
        let steep = full.basis_vector(3);
        let d = full.cosections_at(&be(&[1, 1])).unwrap();
        assert!(d.contains(&3));
        let err = full
            .extend(&steep, &be(&[1, 1]), &be(&[-1, 0]))
            .unwrap_err();
        assert!(matches!(err, CosheafError::SectionNotExtendable { .. }));
    }

    #[test]
    fn extension_laws_hold_on_all_variants() {
        for variant in [
            CosheafVariant::UniversalLeftMultipliers,
            CosheafVariant::FinalSet,
            CosheafVariant::PartialAdditive {
                witness_family: None,
            },
        ] {
            let s2 = SymbolSpace::new(2, g2(), 0).unwrap();
            let model = CosheafModel::new(l2(), s2, variant).unwrap();
            let report = model.check_extension_laws().unwrap();
            assert!(report.identity_law, "{}", model.variant().label());
            assert!(report.cocycle_law, "{}", model.variant().label());
            assert!(report.chains_checked > 0);
        }
    }

    #[test]
    fn cover_axioms_pass_for_universal_and_final_set() {
        let members = vec![be(&[1, 0]), be(&[0, 1])];
        for variant in [
            CosheafVariant::UniversalLeftMultipliers,
            CosheafVariant::FinalSet,
        ] {
            let s2 = SymbolSpace::new(2, g2(), 0).unwrap();
            let model = CosheafModel::new(l2(), s2, variant).unwrap();
            let report = model.check_cover(&members).unwrap();
            assert!(report.cs1 && report.cs2, "{:?}", report);
            assert!(report.families_glued > 0);
        }
    }

    #[test]
    fn final_set_family_examples() {
        let s2 = SymbolSpace::new(2, g2(), 0).unwrap();
        let model = CosheafModel::new(l2(), s2, CosheafVariant::FinalSet).unwrap();
        // t₁ = t₂ = γ (0,0): glues to the same coordinate at the meet (1,1)
        let v = model.basis_vector(1);
        assert_eq!(model.symbols().diag_exponents()[1], be(&[0, 0]));
        let fam = vec![(be(&[1, 0]), v.clone()), (be(&[0, 1]), v.clone())];
        assert_eq!(model.glue_family(&fam).unwrap(), FamilyOutcome::Glued(v));
        // different coordinates: extensions to the join differ → vacuous
        // (γ=(1,0) is a cosection at (0,1) since (1,0) ≤ M−(0,1) = (1,0))
        let a = model.basis_vector(3); // γ = (1,0)
        let b = model.basis_vector(2); // γ = (0,1)
        let fam = vec![(be(&[0, 1]), a), (be(&[1, 0]), b)];
        assert_eq!(
            model.glue_family(&fam).unwrap(),
            FamilyOutcome::NoGlueRequired {
                first: 0,
                second: 1
            }
        );
    }

    #[test]
    fn sheaf_and_cosheaf_axioms_pass_together_on_the_projective_model() {
        // the model lattice is projective and additive, so the same
        // lattice carries both structures at once
        let s2 = SymbolSpace::new(2, g2(), 0).unwrap();
        let sheaf = SheafModel::new(l2(), s2.clone()).unwrap();
        assert!(sheaf.check_s1().unwrap());
        assert!(sheaf.check_s2().unwrap().pass);
        let cosheaf = CosheafModel::new(l2(), s2, CosheafVariant::FinalSet).unwrap();
        let all = l2().elements().to_vec();
        let report = cosheaf.check_cover(&all).unwrap();
        assert!(report.cs1 && report.cs2);
    }
}
