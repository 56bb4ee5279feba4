//! Exact-arithmetic models of partial inner product spaces built from
//! power-weighted sequence spaces: finite involutive exponent lattices,
//! vectors with decidable compatibility, an operator calculus with
//! coherent representative families, finite categories of embeddings,
//! operator sheaves and cosheaves over the lattice, and Čech cohomology
//! of those (co)sheaves over finite coverings — all over exact rationals
//! except for certified tail summation.

pub mod category;
pub mod cohomology;
pub mod cosheaf;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod sampling;
pub mod scalar;
pub mod sheaf;
pub mod vectors;

pub use cohomology::{Covering, CoveringMode};
pub use cosheaf::{CosheafModel, CosheafVariant};
pub use lattice::{BlockExponent, IndexLattice, LatticeError, LatticeOp, SpaceIndex};
pub use operators::OperatorSymbol;
pub use sheaf::{SheafModel, SymbolSpace};
pub use vectors::PipVector;
