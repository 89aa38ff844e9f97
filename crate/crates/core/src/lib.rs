//! Workbench for forbidden configurations in ternary matrices.
//!
//! * [`matrix`]: packed `s`-matrices, standard configurations, the text format.
//! * [`containment`]: `F ≺ A` by per-pair counting and by a generic row-map search.
//! * [`formulas`]: closed forms, bounds and hypothesis predicates.
//! * [`triangle`]: the triangular-array operation game.
//! * [`layout`]: lower-bound constructions from non-edge layouts, self-verified.
//! * [`decompose`]: mark assignment, the `[B | C]` split and the digraph `T`.
//! * [`solver`]: exact `forb(m, 3, F)` for small `m`, plus a direct reference solver.
//! * [`verify`]: the bundled verification suite and its reports.

pub mod containment;
pub mod decompose;
pub mod formulas;
pub mod layout;
pub mod matrix;
pub mod solver;
pub mod triangle;
pub mod verify;

pub use matrix::{read_matrix, write_matrix, Column, ConfigurationF, SMatrix};
