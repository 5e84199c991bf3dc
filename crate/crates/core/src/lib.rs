//! Invariant almost complex structures on real flag manifolds of split real
//! forms, decided with exact rational arithmetic.

pub mod chevalley;
pub mod exactalg;
pub mod invariants;
pub mod isotropy;
pub mod nijenhuis;
pub mod report;
pub mod rootsys;
