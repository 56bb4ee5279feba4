//! Seeded generators for the property-check harness: random exponents,
//! operators, homomorphisms, vectors within a given space, and cochains.
//! Everything is driven by a caller-provided RNG so runs are
//! reproducible from a seed.

use num::rational::BigRational;
use num::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::lattice::{BlockExponent, IndexLattice};
use crate::linalg::CMatrix;
use crate::operators::OperatorSymbol;
use crate::scalar::{crat, rat, ratio, CRat};
use crate::vectors::{PipVector, Tail};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_exponent<R: Rng>(rng: &mut R, blocks: usize, lo: i64, hi: i64) -> BlockExponent {
    BlockExponent::new(
        (0..blocks)
            .map(|_| rat(rng.random_range(lo..=hi)))
            .collect(),
    )
}

pub fn random_coefficient<R: Rng>(rng: &mut R) -> CRat {
    crat(rng.random_range(-2..=2), rng.random_range(-2..=2))
}

/// Diagonal-plus-matrix operator with up to `max_terms` diagonal terms
/// (integer exponents in [−2, 2], per-block coefficients possibly zero)
/// and a matrix block of size up to `max_matrix_dim`.
pub fn random_operator<R: Rng>(
    rng: &mut R,
    blocks: usize,
    max_terms: usize,
    max_matrix_dim: usize,
) -> OperatorSymbol {
    let n_terms = rng.random_range(0..=max_terms);
    let terms: Vec<(BlockExponent, Vec<CRat>)> = (0..n_terms)
        .map(|_| {
            (
                random_exponent(rng, blocks, -2, 2),
                (0..blocks).map(|_| random_coefficient(rng)).collect(),
            )
        })
        .collect();
    let dim = rng.random_range(0..=max_matrix_dim);
    let mut matrix = CMatrix::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            matrix.set(r, c, random_coefficient(rng));
        }
    }
    OperatorSymbol::new(blocks, terms, matrix).expect("consistent shape")
}

/// Random homomorphism: diagonal exponents ≤ 0 make every space
/// invariant, so condition (i)/(ii) hold with u = r. The result is
/// verified before being returned.
pub fn random_homomorphism<R: Rng>(
    rng: &mut R,
    lattice: &IndexLattice,
    single_term: bool,
) -> OperatorSymbol {
    let blocks = lattice.blocks();
    loop {
        let n_terms = if single_term {
            1
        } else {
            rng.random_range(1..=2)
        };
        let terms: Vec<(BlockExponent, Vec<CRat>)> = (0..n_terms)
            .map(|_| {
                (
                    random_exponent(rng, blocks, -2, 0),
                    (0..blocks)
                        .map(|_| {
                            let c = random_coefficient(rng);
                            if c.re == rat(0) && c.im == rat(0) {
                                crat(1, 0)
                            } else {
                                c
                            }
                        })
                        .collect(),
                )
            })
            .collect();
        let dim = if single_term {
            0
        } else {
            rng.random_range(0..=2)
        };
        let mut matrix = CMatrix::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                matrix.set(r, c, random_coefficient(rng));
            }
        }
        let candidate = OperatorSymbol::new(blocks, terms, matrix).expect("consistent shape");
        if candidate
            .check_homomorphism(lattice, lattice)
            .expect("matching blocks")
            .is_none()
            && !candidate.is_zero()
        {
            return candidate;
        }
    }
}

/// Largest integer strictly below −1/2 − α, the admissible tail
/// exponents for membership in V_α on that block.
fn max_tail_exponent(alpha: &BigRational) -> i64 {
    let bound = ratio(-1, 2) - alpha;
    let floor = bound.floor().to_integer().to_i64().expect("small exponent");
    if bound.is_integer() {
        floor - 1
    } else {
        floor
    }
}

/// Random member of V_r with integer tail exponents and a small finite
/// part, so all downstream arithmetic stays exact.
pub fn random_vector_in<R: Rng>(rng: &mut R, r: &BlockExponent, tail_start: u64) -> PipVector {
    let blocks = r.blocks();
    let tails: Vec<Tail> = (0..blocks)
        .map(|j| {
            if rng.random_bool(0.2) {
                return Tail::zero();
            }
            let sigma = max_tail_exponent(r.component(j)) - rng.random_range(0..2);
            Tail::new(random_coefficient(rng), rat(sigma))
        })
        .collect();
    let mut finite = std::collections::BTreeMap::new();
    for n in 1..=tail_start {
        if rng.random_bool(0.5) {
            finite.insert(n, random_coefficient(rng));
        }
    }
    PipVector::new(blocks, tail_start, finite, tails).expect("valid sampled vector")
}

/// A pair (f, g) with f ∈ V_r and g ∈ V_r̄ for a random lattice member,
/// hence compatible by construction.
pub fn random_compatible_pair<R: Rng>(
    rng: &mut R,
    lattice: &IndexLattice,
) -> (PipVector, PipVector, BlockExponent) {
    let r = lattice.elements()[rng.random_range(0..lattice.len())].clone();
    let f = random_vector_in(rng, &r, 3);
    let g = random_vector_in(rng, &r.negated(), 3);
    (f, g, r)
}

pub fn random_cochain<R: Rng>(rng: &mut R, dim: usize) -> Vec<BigRational> {
    (0..dim)
        .map(|_| ratio(rng.random_range(-6..=6), rng.random_range(1..=3)))
        .collect()
}
