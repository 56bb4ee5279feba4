//! TOML experiment configuration and its resolution into library types.
//!
//! All numerics are exact-rational strings ("p/q" or an integer string);
//! complex values are {re, im} pairs. The full schema is documented in
//! the repository README.

use std::collections::BTreeMap;
use std::path::Path;

use num::rational::BigRational;
use serde::Deserialize;
use thiserror::Error;

use pipspace::cohomology::{Covering, CoveringMode};
use pipspace::cosheaf::CosheafVariant;
use pipspace::lattice::{BlockExponent, IndexLattice};
use pipspace::linalg::CMatrix;
use pipspace::operators::OperatorSymbol;
use pipspace::scalar::CRat;
use pipspace::sheaf::SymbolSpace;
use pipspace::vectors::{PipVector, Tail};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("field {field}: '{value}' is not a rational (expected p/q or an integer)")]
    BadRational { field: String, value: String },
    #[error("config requires a [{0}] section for this command")]
    MissingSection(&'static str),
    #[error("{what} '{name}' does not resolve")]
    UnresolvedReference { what: &'static str, name: String },
    #[error("tolerance must be a positive rational, got '{0}'")]
    BadTolerance(String),
    #[error("unknown cosheaf variant '{0}' (expected partial_additive, universal, or final_set)")]
    UnknownVariant(String),
    #[error("unknown covering mode '{0}' (expected sheaf or cosheaf)")]
    UnknownMode(String),
    #[error("lattice: {0}")]
    Lattice(#[from] pipspace::lattice::LatticeError),
    #[error("vector '{name}': {source}")]
    Vector {
        name: String,
        source: pipspace::vectors::VectorError,
    },
    #[error("operator '{name}': {source}")]
    Operator {
        name: String,
        source: pipspace::operators::OperatorError,
    },
    #[error("symbols: {0}")]
    Sheaf(#[from] pipspace::sheaf::SheafError),
    #[error("covering '{name}': {source}")]
    Covering {
        name: String,
        source: pipspace::cohomology::CohomologyError,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub lattice: RawLattice,
    pub symbols: Option<RawSymbols>,
    #[serde(default)]
    pub params: RawParams,
    #[serde(default)]
    pub vectors: Vec<RawVector>,
    #[serde(default)]
    pub operators: Vec<RawOperator>,
    #[serde(default)]
    pub coverings: Vec<RawCovering>,
    pub cosheaf: Option<RawCosheaf>,
    #[serde(default)]
    pub glue_sections: Vec<RawGlueSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLattice {
    pub blocks: usize,
    #[serde(default)]
    pub lhs_mode: bool,
    pub generators: Vec<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSymbols {
    #[serde(default)]
    pub matrix_dim: usize,
    pub diag_exponents: Vec<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub p_max: Option<usize>,
    pub n_max: Option<u32>,
    pub tol: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawVector {
    pub name: String,
    #[serde(default)]
    pub tail_start: u64,
    #[serde(default)]
    pub tails: Vec<RawTail>,
    #[serde(default)]
    pub finite: Vec<RawFiniteEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTail {
    pub block: usize,
    pub re: String,
    #[serde(default = "zero_string")]
    pub im: String,
    pub exponent: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFiniteEntry {
    pub index: u64,
    pub re: String,
    #[serde(default = "zero_string")]
    pub im: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOperator {
    pub name: String,
    #[serde(default)]
    pub diag: Vec<RawDiagTerm>,
    /// M₀×M₀ rows of [re, im] string pairs.
    #[serde(default)]
    pub matrix: Vec<Vec<[String; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDiagTerm {
    pub exponent: Vec<String>,
    /// Scalar coefficient applied on every block.
    pub re: Option<String>,
    #[serde(default = "zero_string")]
    pub im: String,
    /// Per-block [re, im] coefficients; overrides re/im when present.
    pub coeffs: Option<Vec<[String; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCovering {
    pub name: String,
    pub mode: String,
    pub members: Vec<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCosheaf {
    pub variant: String,
    pub witness_family: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGlueSection {
    pub at: Vec<String>,
    pub coords: Vec<String>,
}

fn zero_string() -> String {
    "0".to_string()
}

/// Fully resolved experiment: every reference checked, every numeral
/// exact.
pub struct Experiment {
    pub lattice: IndexLattice,
    pub symbols: Option<SymbolSpace>,
    pub vectors: BTreeMap<String, PipVector>,
    pub operators: BTreeMap<String, OperatorSymbol>,
    pub coverings: Vec<(String, Covering)>,
    pub cosheaf_variant: Option<CosheafVariant>,
    pub glue_sections: Vec<(BlockExponent, Vec<BigRational>)>,
    pub p_max: usize,
    pub n_max: u32,
    pub tol: BigRational,
    pub seed: u64,
}

pub fn load(path: &Path) -> Result<RawConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn parse_rat(field: &str, value: &str) -> Result<BigRational, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::BadRational {
        field: field.to_string(),
        value: value.to_string(),
    })
}

fn parse_exponent(field: &str, comps: &[String]) -> Result<BlockExponent, ConfigError> {
    let mut v = Vec::with_capacity(comps.len());
    for (i, c) in comps.iter().enumerate() {
        v.push(parse_rat(&format!("{field}[{i}]"), c)?);
    }
    Ok(BlockExponent::new(v))
}

fn parse_crat(field: &str, re: &str, im: &str) -> Result<CRat, ConfigError> {
    Ok(CRat::new(
        parse_rat(&format!("{field}.re"), re)?,
        parse_rat(&format!("{field}.im"), im)?,
    ))
}

pub fn resolve(raw: &RawConfig, overrides: &RawParams) -> Result<Experiment, ConfigError> {
    let generators: Vec<BlockExponent> = raw
        .lattice
        .generators
        .iter()
        .enumerate()
        .map(|(i, g)| parse_exponent(&format!("lattice.generators[{i}]"), g))
        .collect::<Result<_, _>>()?;
    let lattice = IndexLattice::close(&generators, raw.lattice.lhs_mode)?;

    let symbols = raw
        .symbols
        .as_ref()
        .map(|s| -> Result<SymbolSpace, ConfigError> {
            let exps: Vec<BlockExponent> = s
                .diag_exponents
                .iter()
                .enumerate()
                .map(|(i, g)| parse_exponent(&format!("symbols.diag_exponents[{i}]"), g))
                .collect::<Result<_, _>>()?;
            Ok(SymbolSpace::new(raw.lattice.blocks, exps, s.matrix_dim)?)
        })
        .transpose()?;

    let mut vectors = BTreeMap::new();
    for rv in &raw.vectors {
        let mut tails = vec![Tail::zero(); raw.lattice.blocks];
        for t in &rv.tails {
            if t.block >= raw.lattice.blocks {
                return Err(ConfigError::UnresolvedReference {
                    what: "tail block",
                    name: format!("{} (vector '{}')", t.block, rv.name),
                });
            }
            tails[t.block] = Tail::new(
                parse_crat(&format!("vector '{}' tail", rv.name), &t.re, &t.im)?,
                parse_rat(&format!("vector '{}' tail exponent", rv.name), &t.exponent)?,
            );
        }
        let mut finite = BTreeMap::new();
        for f in &rv.finite {
            finite.insert(
                f.index,
                parse_crat(
                    &format!("vector '{}' finite[{}]", rv.name, f.index),
                    &f.re,
                    &f.im,
                )?,
            );
        }
        let v =
            PipVector::new(raw.lattice.blocks, rv.tail_start, finite, tails).map_err(|source| {
                ConfigError::Vector {
                    name: rv.name.clone(),
                    source,
                }
            })?;
        vectors.insert(rv.name.clone(), v);
    }

    let mut operators = BTreeMap::new();
    for ro in &raw.operators {
        let mut terms = Vec::new();
        for (i, term) in ro.diag.iter().enumerate() {
            let gamma = parse_exponent(
                &format!("operator '{}' diag[{i}].exponent", ro.name),
                &term.exponent,
            )?;
            let coeffs: Vec<CRat> = if let Some(per_block) = &term.coeffs {
                per_block
                    .iter()
                    .map(|[re, im]| {
                        parse_crat(&format!("operator '{}' diag[{i}].coeffs", ro.name), re, im)
                    })
                    .collect::<Result<_, _>>()?
            } else {
                let re = term.re.as_deref().unwrap_or("1");
                let c = parse_crat(&format!("operator '{}' diag[{i}]", ro.name), re, &term.im)?;
                vec![c; raw.lattice.blocks]
            };
            terms.push((gamma, coeffs));
        }
        let dim = ro.matrix.len();
        let mut matrix = CMatrix::zeros(dim);
        for (r, row) in ro.matrix.iter().enumerate() {
            for (c, [re, im]) in row.iter().enumerate() {
                matrix.set(
                    r,
                    c,
                    parse_crat(&format!("operator '{}' matrix[{r}][{c}]", ro.name), re, im)?,
                );
            }
        }
        let op = OperatorSymbol::new(raw.lattice.blocks, terms, matrix).map_err(|source| {
            ConfigError::Operator {
                name: ro.name.clone(),
                source,
            }
        })?;
        operators.insert(ro.name.clone(), op);
    }

    let mut coverings = Vec::new();
    for rc in &raw.coverings {
        let mode = match rc.mode.as_str() {
            "sheaf" => CoveringMode::Sheaf,
            "cosheaf" => CoveringMode::Cosheaf,
            other => return Err(ConfigError::UnknownMode(other.to_string())),
        };
        let members: Vec<BlockExponent> = rc
            .members
            .iter()
            .enumerate()
            .map(|(i, m)| parse_exponent(&format!("covering '{}' members[{i}]", rc.name), m))
            .collect::<Result<_, _>>()?;
        let covering =
            Covering::new(members, mode, &lattice).map_err(|source| ConfigError::Covering {
                name: rc.name.clone(),
                source,
            })?;
        coverings.push((rc.name.clone(), covering));
    }

    let cosheaf_variant = raw
        .cosheaf
        .as_ref()
        .map(|c| -> Result<CosheafVariant, ConfigError> {
            match c.variant.as_str() {
                "universal" | "universal_left_multipliers" => {
                    Ok(CosheafVariant::UniversalLeftMultipliers)
                }
                "final_set" => Ok(CosheafVariant::FinalSet),
                "partial_additive" => {
                    let witness_family = c
                        .witness_family
                        .as_ref()
                        .map(|fam| {
                            fam.iter()
                                .enumerate()
                                .map(|(i, w)| {
                                    parse_exponent(&format!("cosheaf.witness_family[{i}]"), w)
                                })
                                .collect::<Result<Vec<_>, _>>()
                        })
                        .transpose()?;
                    Ok(CosheafVariant::PartialAdditive { witness_family })
                }
                other => Err(ConfigError::UnknownVariant(other.to_string())),
            }
        })
        .transpose()?;

    let mut glue_sections = Vec::new();
    for (i, gs) in raw.glue_sections.iter().enumerate() {
        let at = parse_exponent(&format!("glue_sections[{i}].at"), &gs.at)?;
        if !lattice.contains(&at) {
            return Err(ConfigError::UnresolvedReference {
                what: "glue section index",
                name: at.to_string(),
            });
        }
        let coords: Vec<BigRational> = gs
            .coords
            .iter()
            .enumerate()
            .map(|(j, c)| parse_rat(&format!("glue_sections[{i}].coords[{j}]"), c))
            .collect::<Result<_, _>>()?;
        glue_sections.push((at, coords));
    }

    let pick = |a: Option<usize>, b: Option<usize>, d: usize| a.or(b).unwrap_or(d);
    let tol_str = overrides
        .tol
        .clone()
        .or_else(|| raw.params.tol.clone())
        .unwrap_or_else(|| "1/1000000".to_string());
    let tol = parse_rat("params.tol", &tol_str)
        .map_err(|_| ConfigError::BadTolerance(tol_str.clone()))?;
    if tol <= BigRational::from_integer(0.into()) {
        return Err(ConfigError::BadTolerance(tol_str));
    }

    Ok(Experiment {
        lattice,
        symbols,
        vectors,
        operators,
        coverings,
        cosheaf_variant,
        glue_sections,
        p_max: pick(overrides.p_max, raw.params.p_max, 3),
        n_max: overrides.n_max.or(raw.params.n_max).unwrap_or(4),
        tol,
        seed: overrides.seed.or(raw.params.seed).unwrap_or(0),
    })
}

impl Experiment {
    pub fn require_symbols(&self) -> Result<&SymbolSpace, ConfigError> {
        self.symbols
            .as_ref()
            .ok_or(ConfigError::MissingSection("symbols"))
    }
}
