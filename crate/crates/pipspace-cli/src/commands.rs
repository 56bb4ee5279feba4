//! Command implementations. Every command renders one deterministic
//! report: aligned human-readable lines, each law line naming the
//! internal check that produced it, followed by a machine-readable
//! key=value block.

use num::rational::BigRational;
use thiserror::Error;

use pipspace::category::{
    build_operator_category, build_vi_category, check_pip_composition, involution_functor_check,
    CategoryError,
};
use pipspace::cohomology::{
    build_cosheaf_complex, build_sheaf_complex, cohomology_dims, contracting_homotopy,
    CohomologyError, Covering, CoveringMode,
};
use pipspace::cosheaf::{universal_left_multipliers, CosheafError, CosheafModel, CosheafVariant};
use pipspace::lattice::LatticeError;
use pipspace::operators::{HomFailure, OperatorError};
use pipspace::sampling;
use pipspace::scalar::fmt_rat;
use pipspace::sheaf::{vector_gluing_check, SheafError, SheafModel};
use pipspace::vectors::VectorError;

use crate::config::{ConfigError, Experiment};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("lattice: {0}")]
    Lattice(#[from] LatticeError),
    #[error("operator: {0}")]
    Operator(#[from] OperatorError),
    #[error("vector: {0}")]
    Vector(#[from] VectorError),
    #[error("sheaf: {0}")]
    Sheaf(#[from] SheafError),
    #[error("cosheaf: {0}")]
    Cosheaf(#[from] CosheafError),
    #[error("cohomology: {0}")]
    Cohomology(#[from] CohomologyError),
    #[error("category: {0}")]
    Category(#[from] CategoryError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub struct Report {
    pub title: String,
    lines: Vec<String>,
    machine: Vec<String>,
    pub violations: usize,
}

impl Report {
    pub fn new(title: &str) -> Self {
        Report {
            title: title.to_string(),
            lines: Vec::new(),
            machine: Vec::new(),
            violations: 0,
        }
    }

    fn check(&mut self, pass: bool, text: &str, source: &str) {
        let status = if pass { "PASS" } else { "FAIL" };
        self.lines.push(format!("{status}  {text:<58} [{source}]"));
        if !pass {
            self.violations += 1;
        }
    }

    fn info(&mut self, text: &str) {
        self.lines.push(format!("      {text}"));
    }

    fn machine(&mut self, line: String) {
        self.machine.push(line);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("== {} ==\n", self.title));
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str("\n[machine]\n");
        for l in &self.machine {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str(&format!("violations={}\n", self.violations));
        out
    }

    fn absorb(&mut self, other: Report) {
        self.lines.push(String::new());
        self.lines.push(format!("-- {} --", other.title));
        self.lines.extend(other.lines);
        self.machine.extend(
            other
                .machine
                .into_iter()
                .map(|l| format!("{}.{l}", other.title)),
        );
        self.violations += other.violations;
    }
}

pub fn close_lattice(exp: &Experiment) -> Result<Report, CliError> {
    let mut r = Report::new("close-lattice");
    let l = &exp.lattice;
    r.info(&format!(
        "{} blocks, {} elements (canonical order):",
        l.blocks(),
        l.len()
    ));
    for e in l.elements() {
        r.info(&format!("  {e}"));
        r.machine(format!("element={e}"));
    }
    // stability: applying involution/meet/join adds nothing
    let mut stable = true;
    for a in l.elements() {
        if !l.contains(&a.negated()) {
            stable = false;
        }
        for b in l.elements() {
            if !l.contains(&l.meet(a, b)?) || !l.contains(&l.join(a, b)?) {
                stable = false;
            }
        }
    }
    r.check(
        stable,
        "closure stable under involution, meet, join",
        "lattice::close",
    );
    let m = l.min_exponent();
    let big = l.max_exponent();
    r.check(
        l.contains(&m) && l.contains(&big),
        "componentwise extremes attained",
        "lattice::min_exponent/max_exponent",
    );
    r.machine(format!("count={}", l.len()));
    r.machine(format!("min_exponent={m}"));
    r.machine(format!("max_exponent={big}"));
    Ok(r)
}

pub fn classify_op(exp: &Experiment) -> Result<Report, CliError> {
    let mut r = Report::new("classify-op");
    if exp.operators.is_empty() {
        r.info("no operators declared");
        return Ok(r);
    }
    for (name, op) in &exp.operators {
        let di = op.domain_image(&exp.lattice)?;
        let c = op.classify(&exp.lattice)?;
        r.info(&format!("operator '{name}':"));
        if !di.is_operator {
            r.info("  d(A) empty: not an operator on this lattice");
        }
        r.info(&format!(
            "  d(A) = {{{}}}",
            di.domain
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        ));
        r.info(&format!(
            "  i(A) = {{{}}}",
            di.image
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        ));
        match &c.hom_failure {
            None => r.info("  homomorphism: yes"),
            Some(HomFailure::Source(w)) => r.info(&format!(
                "  homomorphism: no; condition (i) fails at r = {w}"
            )),
            Some(HomFailure::Target(w)) => r.info(&format!(
                "  homomorphism: no; condition (ii) fails at u = {w}"
            )),
        }
        r.info(&format!("  totally regular: {}", c.is_totally_regular));
        r.info(&format!("  projection: {}", c.is_projection));
        r.info(&format!(
            "  isomorphism certified: {}",
            c.is_isomorphism_certified
        ));
        r.info(&format!(
            "  mono/epi certificates: {}/{} (sufficient only)",
            c.mono_certificate, c.epi_certificate
        ));
        if c.is_zero {
            r.info("  zero operator (flagged edge case)");
        }
        r.machine(format!(
            "operator={name} is_operator={} homomorphism={} totally_regular={} projection={} isomorphism={} mono_cert={} epi_cert={} zero={}",
            di.is_operator,
            c.is_homomorphism,
            c.is_totally_regular,
            c.is_projection,
            c.is_isomorphism_certified,
            c.mono_certificate,
            c.epi_certificate,
            c.is_zero
        ));
        // adjoint involution, reported as a law line per operator
        r.check(
            op.adjoint().adjoint() == *op,
            &format!("adjoint involution (A^x)^x = A for '{name}'"),
            "operators::adjoint",
        );
    }
    Ok(r)
}

pub fn category_check(exp: &Experiment) -> Result<Report, CliError> {
    let mut r = Report::new("category-check");
    let cat = build_vi_category(&exp.lattice);
    let ax = cat.check_axioms();
    r.info(&format!(
        "embedding category: {} objects, {} arrows",
        ax.objects, ax.arrows
    ));
    r.check(ax.identity_ok, "identity axiom", "category::check_axioms");
    r.check(
        ax.composition_total,
        "composition closure on composable pairs",
        "category::check_axioms",
    );
    r.check(ax.unit_law_ok, "unit laws", "category::check_axioms");
    r.check(
        ax.associativity_ok,
        &format!("associativity ({} triples)", ax.triples_checked),
        "category::check_axioms",
    );
    if let Some(w) = &ax.failure_witness {
        r.info(&format!("  witness: {w}"));
    }
    let initial = cat.initial_objects();
    let terminal = cat.terminal_objects();
    r.check(
        initial == vec![0],
        "V# is the unique initial object (arrow counting)",
        "category::is_initial",
    );
    r.check(
        terminal == vec![cat.objects.len() - 1],
        "V is the unique terminal object (arrow counting)",
        "category::is_terminal",
    );
    let f = involution_functor_check(&exp.lattice);
    r.check(
        f.preserves_identities,
        "involution functor preserves identities",
        "category::involution_functor_check",
    );
    r.check(
        f.contravariant_on_composites,
        &format!(
            "involution functor reverses composites ({} pairs)",
            f.pairs_checked
        ),
        "category::involution_functor_check",
    );
    r.machine(format!("objects={} arrows={}", ax.objects, ax.arrows));

    for (name, op) in &exp.operators {
        let class = op.classify(&exp.lattice)?;
        if !class.is_totally_regular {
            r.info(&format!(
                "operator '{name}' is not totally regular; no graded category"
            ));
            continue;
        }
        let (graded, symbols) = build_operator_category(&exp.lattice, op, exp.n_max)?;
        let gax = graded.check_axioms();
        r.check(
            gax.all_pass(),
            &format!(
                "graded category of '{name}' axioms up to n_max = {}",
                exp.n_max
            ),
            "category::build_operator_category",
        );
        if let Some(w) = &gax.failure_witness {
            r.info(&format!("  witness: {w}"));
        }
        r.check(
            symbols.all_products_match,
            &format!(
                "grade additivity by symbol arithmetic ({} products)",
                symbols.symbol_products_checked
            ),
            "operators::compose_in",
        );
        r.machine(format!(
            "graded_operator={name} arrows={} products={}",
            symbols.arrows, symbols.symbol_products_checked
        ));
    }

    // composition checks inside the homomorphism category, over declared
    // operator pairs that classify as homomorphisms
    let homs: Vec<(&String, &pipspace::operators::OperatorSymbol)> = {
        let mut v = Vec::new();
        for (n, o) in &exp.operators {
            if o.classify(&exp.lattice)?.is_homomorphism {
                v.push((n, o));
            }
        }
        v
    };
    for (na, a) in &homs {
        for (nb, b) in &homs {
            let rep = check_pip_composition(b, a, &exp.lattice)?;
            r.check(
                rep.composite_is_homomorphism && rep.unit_laws_ok && rep.associativity_ok,
                &format!(
                    "homomorphism composition '{nb}' ∘ '{na}' (witness {})",
                    rep.witness
                ),
                "category::check_pip_composition",
            );
            if rep.composite_is_zero {
                r.info(&format!(
                    "  note: '{nb}' ∘ '{na}' is the zero operator (flagged, not decided)"
                ));
            }
        }
    }
    Ok(r)
}

pub fn sheaf_check(exp: &Experiment) -> Result<Report, CliError> {
    let mut r = Report::new("sheaf-check");
    let symbols = exp.require_symbols()?;
    let model = SheafModel::new(exp.lattice.clone(), symbols.clone())?;
    let laws = model.check_presheaf_laws()?;
    r.check(
        laws.identity_law,
        "presheaf identity law ρ_p^p = id",
        "sheaf::check_presheaf_laws",
    );
    r.check(
        laws.composition_law,
        &format!("presheaf composition over {} chains", laws.chains_checked),
        "sheaf::check_presheaf_laws",
    );
    r.check(
        model.check_s1()?,
        "S1 local identity (all pairs)",
        "sheaf::check_s1",
    );
    let s2 = model.check_s2()?;
    r.check(
        s2.pass,
        &format!("S2 gluing over all pairs ({} families)", s2.families_glued),
        "sheaf::check_s2",
    );

    // vector-level well-definedness over incomparable pairs
    let mut rng = sampling::seeded_rng(exp.seed);
    let mut pairs = Vec::new();
    for (i, a) in exp.lattice.elements().iter().enumerate() {
        for b in exp.lattice.elements().iter().skip(i + 1) {
            if !exp.lattice.space_leq(a, b)? && !exp.lattice.space_leq(b, a)? {
                pairs.push((a.clone(), b.clone()));
            }
        }
    }
    if pairs.is_empty() && exp.lattice.len() >= 2 {
        pairs.push((
            exp.lattice.elements()[0].clone(),
            exp.lattice.elements()[1].clone(),
        ));
    }
    pairs.truncate(3);
    for (a, b) in &pairs {
        let join = exp.lattice.join(a, b)?;
        let sup_a = model.sections_at(a)?.to_vec();
        let sup_b = model.sections_at(b)?;
        let section: Vec<BigRational> = (0..symbols.dimension())
            .map(|i| {
                if sup_a.contains(&i) && sup_b.contains(&i) {
                    pipspace::scalar::rat(1)
                } else {
                    pipspace::scalar::rat(0)
                }
            })
            .collect();
        let samples: Vec<pipspace::vectors::PipVector> = (0..4)
            .map(|_| sampling::random_vector_in(&mut rng, &join, 4))
            .collect();
        let report = vector_gluing_check(&model, a, b, &section, &samples, 25, &mut rng)?;
        r.check(
            report.pass,
            &format!(
                "gluing action well-defined over ({a}, {b}), {} decompositions",
                report.decompositions_checked
            ),
            "sheaf::vector_gluing_check",
        );
    }
    r.machine(format!("s2_families={}", s2.families_glued));
    Ok(r)
}

pub fn cosheaf_check(exp: &Experiment) -> Result<Report, CliError> {
    let mut r = Report::new("cosheaf-check");
    let symbols = exp.require_symbols()?;
    let variant = exp
        .cosheaf_variant
        .clone()
        .unwrap_or(CosheafVariant::FinalSet);
    let model = CosheafModel::new(exp.lattice.clone(), symbols.clone(), variant.clone())?;
    r.info(&format!("variant: {}", model.variant().label()));

    let lop = universal_left_multipliers(&exp.lattice, symbols);
    r.info(&format!(
        "universal left multipliers: dimension {} ({} diagonal + {} matrix units)",
        lop.len(),
        lop.iter().filter(|&&i| i < symbols.diag_len()).count(),
        symbols.matrix_dim() * symbols.matrix_dim()
    ));
    r.machine(format!("lop_dim={}", lop.len()));

    let laws = model.check_extension_laws()?;
    r.check(
        laws.identity_law,
        "extension identity law δ_p^p = id",
        "cosheaf::check_extension_laws",
    );
    r.check(
        laws.cocycle_law,
        &format!("extension cocycle law over {} chains", laws.chains_checked),
        "cosheaf::check_extension_laws",
    );

    if matches!(variant, CosheafVariant::PartialAdditive { .. }) {
        r.info("note: on the full lattice the coarsened relation ⪯ coincides with ≤ (w = target works)");
        let mut undefined = Vec::new();
        for q in exp.lattice.elements() {
            for p in exp.lattice.elements() {
                if exp.lattice.space_leq(q, p)? && model.extension_allowed(q, p).is_err() {
                    undefined.push(format!("{q} → {p}"));
                }
            }
        }
        if undefined.is_empty() {
            r.info("no extension-undefined pairs under the witness family");
        } else {
            for pair in &undefined {
                r.info(&format!("extension-undefined: {pair}"));
            }
            r.machine(format!("extension_undefined_pairs={}", undefined.len()));
        }
    }

    let mut covers: Vec<(String, Vec<pipspace::lattice::BlockExponent>)> = exp
        .coverings
        .iter()
        .filter(|(_, c)| c.mode() == CoveringMode::Cosheaf)
        .map(|(n, c)| (n.clone(), c.members().to_vec()))
        .collect();
    if covers.is_empty() {
        covers.push(("full-lattice".to_string(), exp.lattice.elements().to_vec()));
    }
    for (name, members) in &covers {
        let rep = model.check_cover(members)?;
        r.check(
            rep.cs1,
            &format!("CS1 on covering '{name}'"),
            "cosheaf::check_cover",
        );
        r.check(
            rep.cs2,
            &format!(
                "CS2 on covering '{name}' ({} glued, {} vacuous)",
                rep.families_glued, rep.families_vacuous
            ),
            "cosheaf::check_cover",
        );
        r.machine(format!(
            "covering={name} cs1={} cs2={} glued={} vacuous={}",
            rep.cs1, rep.cs2, rep.families_glued, rep.families_vacuous
        ));
    }
    Ok(r)
}

pub fn glue(exp: &Experiment) -> Result<Report, CliError> {
    let mut r = Report::new("glue");
    let symbols = exp.require_symbols()?;
    let model = SheafModel::new(exp.lattice.clone(), symbols.clone())?;
    if exp.glue_sections.is_empty() {
        r.info("no glue_sections declared");
        return Ok(r);
    }
    match model.glue(&exp.glue_sections) {
        Ok((at, section)) => {
            r.check(true, &format!("family glues at join {at}"), "sheaf::glue");
            let coords: Vec<String> = section.iter().map(fmt_rat).collect();
            r.info(&format!(
                "glued section coordinates: [{}]",
                coords.join(", ")
            ));
            r.machine(format!("glued_at={at}"));
            r.machine(format!("glued_coords={}", coords.join(",")));
            if exp.glue_sections.len() >= 2 {
                let mut rng = sampling::seeded_rng(exp.seed);
                let (a, _) = &exp.glue_sections[0];
                let (b, _) = &exp.glue_sections[1];
                let join = exp.lattice.join(a, b)?;
                let samples: Vec<pipspace::vectors::PipVector> = (0..4)
                    .map(|_| sampling::random_vector_in(&mut rng, &join, 4))
                    .collect();
                let rep = vector_gluing_check(&model, a, b, &section, &samples, 25, &mut rng)?;
                r.check(
                    rep.pass,
                    &format!(
                        "glued action decomposition-independent ({} decompositions)",
                        rep.decompositions_checked
                    ),
                    "sheaf::vector_gluing_check",
                );
            }
        }
        Err(SheafError::S2Violation {
            first,
            second,
            coordinate,
        }) => {
            r.check(
                false,
                &format!(
                    "S2 violation: sections {first} and {second} differ at coordinate {coordinate}"
                ),
                "sheaf::glue",
            );
        }
        Err(e) => return Err(e.into()),
    }
    Ok(r)
}

pub fn cohomology(exp: &Experiment) -> Result<Report, CliError> {
    let mut r = Report::new("cohomology");
    let symbols = exp.require_symbols()?;
    let mut coverings = exp.coverings.clone();
    if coverings.is_empty() {
        coverings.push((
            "full-lattice".to_string(),
            Covering::new(
                exp.lattice.elements().to_vec(),
                CoveringMode::Sheaf,
                &exp.lattice,
            )?,
        ));
    }
    for (name, covering) in &coverings {
        let p_max = exp
            .p_max
            .min(covering.members().len().saturating_sub(1))
            .max(1);
        r.info(&format!(
            "covering '{name}' ({}): {} members, join reaches lattice top: {}",
            covering.mode().label(),
            covering.members().len(),
            if covering.join_is_lattice_top(&exp.lattice) {
                "yes"
            } else {
                "no"
            }
        ));
        let (complex, homotopy_line) = match covering.mode() {
            CoveringMode::Sheaf => {
                let model = SheafModel::new(exp.lattice.clone(), symbols.clone())?;
                let complex = build_sheaf_complex(&model, covering, p_max)?;
                let line = match contracting_homotopy(&model, covering, &complex) {
                    Ok(cert) => Some((
                        true,
                        format!(
                            "contracting homotopy at top {} verified in degrees {:?}",
                            cert.top, cert.degrees_verified
                        ),
                    )),
                    Err(CohomologyError::NoMaximumMember) => Some((
                        false,
                        "no maximum member: homotopy unavailable (dims still computed)".to_string(),
                    )),
                    Err(e) => return Err(e.into()),
                };
                (complex, line)
            }
            CoveringMode::Cosheaf => {
                let variant = exp
                    .cosheaf_variant
                    .clone()
                    .unwrap_or(CosheafVariant::FinalSet);
                let model = CosheafModel::new(exp.lattice.clone(), symbols.clone(), variant)?;
                match build_cosheaf_complex(&model, covering, p_max) {
                    Ok(cx) => (cx, None),
                    Err(CohomologyError::PartialExtensionAbort { tuple, reason }) => {
                        r.check(
                            false,
                            &format!("assembly aborted at tuple ({tuple}): {reason}"),
                            "cohomology::build_cosheaf_complex",
                        );
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        };
        r.check(
            true,
            &format!("DD = 0 exactly for '{name}'"),
            "cohomology::assemble",
        );
        let report = cohomology_dims(&complex)?;
        r.info("degree  dim_C  dim_Z  dim_B  dim_H  acyclic?");
        for d in &report.dims {
            let acyclic = if d.degree == 0 {
                "-"
            } else if d.dim_h == 0 {
                "yes"
            } else {
                "no"
            };
            r.info(&format!(
                "{:>6}  {:>5}  {:>5}  {:>5}  {:>5}  {:>8}",
                d.degree, d.dim_c, d.dim_z, d.dim_b, d.dim_h, acyclic
            ));
            r.machine(format!(
                "covering={name} degree={} dim_c={} dim_z={} dim_b={} dim_h={} acyclic={acyclic}",
                d.degree, d.dim_c, d.dim_z, d.dim_b, d.dim_h
            ));
        }
        r.info(&format!(
            "acyclic above degree zero: {}",
            report.acyclic_above_zero
        ));
        if let Some((pass, line)) = homotopy_line {
            if pass {
                r.check(true, &line, "cohomology::contracting_homotopy");
                r.check(
                    report.acyclic_above_zero,
                    &format!("homotopy cross-check against dims for '{name}'"),
                    "cohomology::cohomology_dims",
                );
            } else {
                r.info(&line);
            }
        }
    }
    Ok(r)
}

/// Compatibility and inner-product survey of the declared vectors;
/// part of report-all.
fn vectors_report(exp: &Experiment) -> Result<Report, CliError> {
    let mut r = Report::new("vectors");
    for (name, f) in &exp.vectors {
        let members: Vec<String> = exp
            .lattice
            .elements()
            .iter()
            .filter(|e| f.member_at(e).unwrap_or(false))
            .map(ToString::to_string)
            .collect();
        r.info(&format!(
            "vector '{name}': member of {{{}}}",
            members.join(", ")
        ));
        r.machine(format!("vector={name} member_count={}", members.len()));
    }
    let names: Vec<&String> = exp.vectors.keys().collect();
    for (i, na) in names.iter().enumerate() {
        for nb in names.iter().skip(i) {
            let f = &exp.vectors[na.as_str()];
            let g = &exp.vectors[nb.as_str()];
            let compat = pipspace::vectors::compatible(f, g, &exp.lattice)?;
            match &compat {
                pipspace::vectors::Compatibility::Witnessed(w) => {
                    r.info(&format!("{na} # {nb}: compatible, lattice witness {w}"));
                }
                pipspace::vectors::Compatibility::AbsoluteOnly => {
                    r.info(&format!(
                        "{na} # {nb}: absolutely convergent, no lattice witness"
                    ));
                }
                pipspace::vectors::Compatibility::Incompatible => {
                    r.info(&format!("{na} # {nb}: incompatible"));
                }
            }
            if compat.is_compatible() {
                let fg = pipspace::vectors::partial_inner_product(f, g, &exp.lattice, &exp.tol)?;
                let gf = pipspace::vectors::partial_inner_product(g, f, &exp.lattice, &exp.tol)?;
                r.info(&format!(
                    "  <{na},{nb}> = {:+.10}{:+.10}i, certified error <= {:.3e}",
                    fg.value.0, fg.value.1, fg.error_bound
                ));
                r.check(
                    (fg.value.0 - gf.value.0).abs() <= fg.error_bound + gf.error_bound
                        && (fg.value.1 + gf.value.1).abs() <= fg.error_bound + gf.error_bound,
                    &format!("Hermitian symmetry <{na},{nb}> = conj(<{nb},{na}>)"),
                    "vectors::partial_inner_product",
                );
                r.machine(format!(
                    "pair={na},{nb} value={:+.12},{:+.12} bound={:.6e}",
                    fg.value.0, fg.value.1, fg.error_bound
                ));
            } else {
                let err = pipspace::vectors::partial_inner_product(f, g, &exp.lattice, &exp.tol);
                r.check(
                    matches!(err, Err(VectorError::IncompatiblePair)),
                    &format!("undefined inner product raised for {na} # {nb}"),
                    "vectors::partial_inner_product",
                );
                r.machine(format!("pair={na},{nb} incompatible=true"));
            }
        }
    }
    Ok(r)
}

pub fn report_all(exp: &Experiment) -> Result<Report, CliError> {
    let mut r = Report::new("report-all");
    r.absorb(close_lattice(exp)?);
    r.absorb(classify_op(exp)?);
    if !exp.vectors.is_empty() {
        r.absorb(vectors_report(exp)?);
    }
    r.absorb(category_check(exp)?);
    if exp.symbols.is_some() {
        r.absorb(sheaf_check(exp)?);
        r.absorb(cosheaf_check(exp)?);
        if !exp.glue_sections.is_empty() {
            r.absorb(glue(exp)?);
        }
        r.absorb(cohomology(exp)?);
    } else {
        r.info("no [symbols] section: sheaf, cosheaf, glue, cohomology skipped");
    }
    Ok(r)
}
