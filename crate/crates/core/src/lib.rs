//! Exact combinatorial invariants of cyclic quotient surface singularities
//! `1/n(1,a)`: Hirzebruch-Jung continued fractions, the resolution tower
//! (minimal, maximal, P- and M-resolutions), the zero-continued-fraction
//! descriptor sets, and a controlled MMP engine (flips plus divisorial
//! contractions) that matches each Milnor fiber with its symplectic filling.
//!
//! All arithmetic is exact; there is no floating point anywhere.

pub mod cfrac;
pub mod tsing;

pub mod kset;
pub mod mmp;
pub mod resolutions;

pub mod identify;
