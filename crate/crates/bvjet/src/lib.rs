//! Exact symbolic kernel for graded jet algebras with an antibracket.
//!
//! The crate builds canonical differential expressions in fields and
//! antifields over an exact rational coefficient field, provides the total
//! derivative, higher Euler operators, the total-derivative-corrected
//! antibracket on densities with its evolutionary calculus, moving-frame
//! geometry, the spinning-particle master action, and the descent-cocycle
//! machinery, and machine-checks every identity exactly (no floating point).

pub mod bracket;
pub mod checks;
pub mod cohomology;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod model;
pub mod par;
pub mod parse;
pub mod randgen;
pub mod rat;
pub mod roster;
