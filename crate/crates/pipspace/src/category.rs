//! Finite-category engine: the embedding category of a lattice, the
//! ℕ-graded category generated by a totally regular operator, the
//! contravariant involution functor, and composition checks for
//! homomorphisms between lattices of spaces.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::lattice::{BlockExponent, IndexLattice, SpaceIndex};
use crate::operators::{compose_in, power_in, HomFailure, OperatorError, OperatorSymbol};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CategoryError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("operator is not totally regular; it does not generate a graded category")]
    NotTotallyRegular,
    #[error(
        "operator {operator} is not a homomorphism (failing condition with witness {witness})"
    )]
    NotHomomorphism { operator: String, witness: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatArrow {
    pub label: String,
    pub source: usize,
    pub target: usize,
    /// Power grade for arrows of the operator-generated category.
    pub grade: Option<u32>,
}

/// A small category with an explicit (possibly grade-truncated)
/// composition table.
#[derive(Debug, Clone)]
pub struct FiniteCategory {
    pub objects: Vec<String>,
    pub arrows: Vec<CatArrow>,
    pub identities: Vec<usize>,
    /// (second, first) → composite.
    pub compose: BTreeMap<(usize, usize), usize>,
    /// Grade cap: pairs whose grades sum beyond it are exempt from the
    /// totality requirement.
    pub truncated_at: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryAxiomReport {
    pub objects: usize,
    pub arrows: usize,
    pub identity_ok: bool,
    pub composition_total: bool,
    pub unit_law_ok: bool,
    pub associativity_ok: bool,
    pub composable_pairs: usize,
    pub triples_checked: usize,
    pub failure_witness: Option<String>,
}

impl CategoryAxiomReport {
    pub fn all_pass(&self) -> bool {
        self.identity_ok && self.composition_total && self.unit_law_ok && self.associativity_ok
    }
}

impl FiniteCategory {
    fn within_truncation(&self, f: usize, g: usize) -> bool {
        match self.truncated_at {
            None => true,
            Some(cap) => {
                let gf = self.arrows[f].grade.unwrap_or(0);
                let gg = self.arrows[g].grade.unwrap_or(0);
                gf + gg <= cap
            }
        }
    }

    /// Exhaustive check of the four axiom families: identities,
    /// composition closure, unit laws, and associativity.
    pub fn check_axioms(&self) -> CategoryAxiomReport {
        let mut report = CategoryAxiomReport {
            objects: self.objects.len(),
            arrows: self.arrows.len(),
            identity_ok: true,
            composition_total: true,
            unit_law_ok: true,
            associativity_ok: true,
            composable_pairs: 0,
            triples_checked: 0,
            failure_witness: None,
        };
        for (obj, &id) in self.identities.iter().enumerate() {
            let a = &self.arrows[id];
            if a.source != obj || a.target != obj {
                report.identity_ok = false;
                report.failure_witness = Some(format!("identity of {}", self.objects[obj]));
            }
        }
        for (f, af) in self.arrows.iter().enumerate() {
            for (g, ag) in self.arrows.iter().enumerate() {
                if af.target != ag.source {
                    continue;
                }
                report.composable_pairs += 1;
                match self.compose.get(&(g, f)) {
                    None => {
                        if self.within_truncation(f, g) {
                            report.composition_total = false;
                            report.failure_witness = Some(format!("{} ∘ {}", ag.label, af.label));
                        }
                    }
                    Some(&gf) => {
                        let c = &self.arrows[gf];
                        if c.source != af.source || c.target != ag.target {
                            report.composition_total = false;
                            report.failure_witness =
                                Some(format!("{} ∘ {} lands wrongly", ag.label, af.label));
                        }
                    }
                }
            }
        }
        for (f, af) in self.arrows.iter().enumerate() {
            let id_src = self.identities[af.source];
            let id_tgt = self.identities[af.target];
            if self.compose.get(&(f, id_src)) != Some(&f)
                || self.compose.get(&(id_tgt, f)) != Some(&f)
            {
                report.unit_law_ok = false;
                report.failure_witness = Some(format!("unit law at {}", af.label));
            }
        }
        for (f, af) in self.arrows.iter().enumerate() {
            for (g, ag) in self.arrows.iter().enumerate() {
                if af.target != ag.source {
                    continue;
                }
                let Some(&gf) = self.compose.get(&(g, f)) else {
                    continue;
                };
                for (h, ah) in self.arrows.iter().enumerate() {
                    if ag.target != ah.source {
                        continue;
                    }
                    let Some(&hg) = self.compose.get(&(h, g)) else {
                        continue;
                    };
                    let left = self.compose.get(&(h, gf));
                    let right = self.compose.get(&(hg, f));
                    match (left, right) {
                        (Some(a), Some(b)) => {
                            report.triples_checked += 1;
                            if a != b {
                                report.associativity_ok = false;
                                report.failure_witness =
                                    Some(format!("({} ∘ {}) ∘ {}", ah.label, ag.label, af.label));
                            }
                        }
                        // truncated composites are exempt
                        _ => {}
                    }
                }
            }
        }
        report
    }

    pub fn is_initial(&self, obj: usize) -> bool {
        (0..self.objects.len()).all(|y| {
            self.arrows
                .iter()
                .filter(|a| a.source == obj && a.target == y)
                .count()
                == 1
        })
    }

    pub fn is_terminal(&self, obj: usize) -> bool {
        (0..self.objects.len()).all(|y| {
            self.arrows
                .iter()
                .filter(|a| a.source == y && a.target == obj)
                .count()
                == 1
        })
    }

    pub fn initial_objects(&self) -> Vec<usize> {
        (0..self.objects.len())
            .filter(|&o| self.is_initial(o))
            .collect()
    }

    pub fn terminal_objects(&self) -> Vec<usize> {
        (0..self.objects.len())
            .filter(|&o| self.is_terminal(o))
            .collect()
    }
}

/// The category of one lattice of spaces: objects are the assaying
/// spaces plus the formal extremes, arrows are the natural embeddings
/// E_sr: V_r → V_s for r ≤ s.
pub fn build_vi_category(lattice: &IndexLattice) -> FiniteCategory {
    let mut objs: Vec<SpaceIndex> = Vec::with_capacity(lattice.len() + 2);
    objs.push(SpaceIndex::Bottom);
    objs.extend(lattice.elements().iter().cloned().map(SpaceIndex::At));
    objs.push(SpaceIndex::Top);

    let leq = |a: &SpaceIndex, b: &SpaceIndex| {
        lattice
            .space_leq_formal(a, b)
            .expect("objects come from the lattice")
    };
    let mut arrows = Vec::new();
    let mut by_pair: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (src, a) in objs.iter().enumerate() {
        for (tgt, b) in objs.iter().enumerate() {
            if leq(a, b) {
                let idx = arrows.len();
                arrows.push(CatArrow {
                    label: format!("E[{b}←{a}]"),
                    source: src,
                    target: tgt,
                    grade: None,
                });
                by_pair.insert((src, tgt), idx);
            }
        }
    }
    let identities: Vec<usize> = (0..objs.len()).map(|o| by_pair[&(o, o)]).collect();
    let mut compose = BTreeMap::new();
    for (f, af) in arrows.iter().enumerate() {
        for (g, ag) in arrows.iter().enumerate() {
            if af.target == ag.source {
                compose.insert((g, f), by_pair[&(af.source, ag.target)]);
            }
        }
    }
    FiniteCategory {
        objects: objs.iter().map(ToString::to_string).collect(),
        arrows,
        identities,
        compose,
        truncated_at: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSymbolReport {
    pub arrows: usize,
    pub symbol_products_checked: usize,
    pub all_products_match: bool,
}

/// The ℕ-graded category generated by a totally regular operator:
/// arrows A^n_{pq}: V_q → V_p for q ≤ p and n ≤ n_max, with identity
/// the zeroth power. The composition table carries m+n ≤ n_max; the
/// grade-additive laws make the truncation sound there.
pub fn build_operator_category(
    lattice: &IndexLattice,
    symbol: &OperatorSymbol,
    n_max: u32,
) -> Result<(FiniteCategory, GradedSymbolReport), CategoryError> {
    let class = symbol.classify(lattice)?;
    if !class.is_totally_regular {
        return Err(CategoryError::NotTotallyRegular);
    }
    let objects: Vec<String> = lattice.elements().iter().map(ToString::to_string).collect();
    let n_objs = objects.len();
    let mut arrows = Vec::new();
    let mut by_key: BTreeMap<(u32, usize, usize), usize> = BTreeMap::new();
    for n in 0..=n_max {
        for src in 0..n_objs {
            for tgt in 0..n_objs {
                let q = &lattice.elements()[src];
                let p = &lattice.elements()[tgt];
                if !lattice.space_leq(q, p).expect("lattice members") {
                    continue;
                }
                let idx = arrows.len();
                arrows.push(CatArrow {
                    label: format!("A^{n}[{p}←{q}]"),
                    source: src,
                    target: tgt,
                    grade: Some(n),
                });
                by_key.insert((n, src, tgt), idx);
            }
        }
    }
    let identities: Vec<usize> = (0..n_objs).map(|o| by_key[&(0, o, o)]).collect();
    let mut compose = BTreeMap::new();
    for (f, af) in arrows.iter().enumerate() {
        for (g, ag) in arrows.iter().enumerate() {
            if af.target != ag.source {
                continue;
            }
            let total = af.grade.unwrap() + ag.grade.unwrap();
            if total > n_max {
                continue;
            }
            compose.insert((g, f), by_key[&(total, af.source, ag.target)]);
        }
    }
    let category = FiniteCategory {
        objects,
        arrows,
        identities,
        compose,
        truncated_at: Some(n_max),
    };

    // verify the table against genuine symbol arithmetic: the product of
    // the m-th and n-th powers is the (m+n)-th power, and each power has
    // the representative its arrow claims
    let mut checked = 0usize;
    let mut all_match = true;
    let powers: Vec<OperatorSymbol> = (0..=n_max)
        .map(|n| power_in(symbol, n, lattice))
        .collect::<Result<_, _>>()?;
    for (n, pw) in powers.iter().enumerate() {
        for q in lattice.elements() {
            for p in lattice.elements() {
                if lattice.space_leq(q, p).expect("members") {
                    let _ = n;
                    if !pw.representative_exists(p, q) {
                        all_match = false;
                    }
                }
            }
        }
    }
    for m in 0..=n_max {
        for n in 0..=n_max - m {
            let prod = compose_in(&powers[m as usize], &powers[n as usize], lattice)?;
            checked += 1;
            if prod.symbol != powers[(m + n) as usize] {
                all_match = false;
            }
        }
    }
    let arrows = category.arrows.len();
    Ok((
        category,
        GradedSymbolReport {
            arrows,
            symbol_products_checked: checked,
            all_products_match: all_match,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctorReport {
    pub preserves_identities: bool,
    pub contravariant_on_composites: bool,
    pub pairs_checked: usize,
}

impl FunctorReport {
    pub fn all_pass(&self) -> bool {
        self.preserves_identities && self.contravariant_on_composites
    }
}

/// The involution V_r ↦ V_r̄ as a contravariant endofunctor of the
/// embedding category: E_sr ↦ E_{r̄s̄}, checked exhaustively.
pub fn involution_functor_check(lattice: &IndexLattice) -> FunctorReport {
    let cat = build_vi_category(lattice);
    let objs: Vec<SpaceIndex> = {
        let mut v = Vec::with_capacity(cat.objects.len());
        v.push(SpaceIndex::Bottom);
        v.extend(lattice.elements().iter().cloned().map(SpaceIndex::At));
        v.push(SpaceIndex::Top);
        v
    };
    let obj_map: Vec<usize> = objs
        .iter()
        .map(|o| {
            let img = o.involution();
            objs.iter()
                .position(|x| *x == img)
                .expect("closed under involution")
        })
        .collect();
    // arrow map: E[b←a] ↦ E[ā←b̄]
    let arrow_map: Vec<usize> = cat
        .arrows
        .iter()
        .map(|arr| {
            let (src, tgt) = (obj_map[arr.target], obj_map[arr.source]);
            cat.arrows
                .iter()
                .position(|x| x.source == src && x.target == tgt)
                .expect("dual embedding exists")
        })
        .collect();

    let mut preserves_identities = true;
    for (obj, &id) in cat.identities.iter().enumerate() {
        if arrow_map[id] != cat.identities[obj_map[obj]] {
            preserves_identities = false;
        }
    }
    let mut contravariant = true;
    let mut pairs = 0usize;
    for (&(g, f), &gf) in &cat.compose {
        pairs += 1;
        // F(g ∘ f) must equal F(f) ∘ F(g)
        let lhs = arrow_map[gf];
        let rhs = cat.compose.get(&(arrow_map[f], arrow_map[g])).copied();
        if rhs != Some(lhs) {
            contravariant = false;
        }
    }
    FunctorReport {
        preserves_identities,
        contravariant_on_composites: contravariant,
        pairs_checked: pairs,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipCompositionReport {
    pub witness: BlockExponent,
    pub composite_is_homomorphism: bool,
    pub composite_is_zero: bool,
    pub unit_laws_ok: bool,
    pub associativity_ok: bool,
}

/// Composition inside the homomorphism category: both inputs must be
/// homomorphisms; the composite is checked to exist, to be one as well,
/// and to satisfy unit and associativity laws by exact symbol algebra.
pub fn check_pip_composition(
    second: &OperatorSymbol,
    first: &OperatorSymbol,
    lattice: &IndexLattice,
) -> Result<PipCompositionReport, CategoryError> {
    for (name, op) in [("A", first), ("B", second)] {
        if let Some(fail) = op.check_homomorphism(lattice, lattice)? {
            let witness = match fail {
                HomFailure::Source(r) => format!("condition (i) at r = {r}"),
                HomFailure::Target(u) => format!("condition (ii) at u = {u}"),
            };
            return Err(CategoryError::NotHomomorphism {
                operator: name.to_string(),
                witness,
            });
        }
    }
    let prod = compose_in(second, first, lattice)?;
    let composite_is_homomorphism = prod.symbol.check_homomorphism(lattice, lattice)?.is_none();
    let id = OperatorSymbol::identity(first.blocks());
    let unit_laws_ok = compose_in(&id, first, lattice)?.symbol == *first
        && compose_in(first, &id, lattice)?.symbol == *first
        && compose_in(&id, second, lattice)?.symbol == *second
        && compose_in(second, &id, lattice)?.symbol == *second;
    // associativity on the triple (first, second, composite)
    let c = &prod.symbol;
    let left = compose_in(c, &compose_in(second, first, lattice)?.symbol, lattice)?.symbol;
    let right = compose_in(&compose_in(c, second, lattice)?.symbol, first, lattice)?.symbol;
    Ok(PipCompositionReport {
        witness: prod.witness,
        composite_is_homomorphism,
        composite_is_zero: prod.symbol.is_zero(),
        unit_laws_ok,
        associativity_ok: left == right,
    })
}
