//! Combinatorial engine for framed trusses, stratified trusses, manifold and
//! cell diagrams, and tangle trusses.

pub mod diagram;
pub mod explore;
pub mod io;
pub mod poset;
pub mod render;
pub mod strat;
pub mod tangle;
pub mod truss;
