//! Weakly aggregative modal logic over n-ary Kripke models: formulas with a
//! diagonal box, model checking, bounded satisfiability, wa^n-bisimulation,
//! unraveling, standard translation, and K_n proof checking.

pub mod bisim;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod interp;
pub mod model;
pub mod proof;
pub mod sat;
pub mod semantics;
pub mod syntax;
pub mod translate;
pub mod unravel;

pub use error::{Error, Result};
pub use model::{NModel, PointedModel};
pub use syntax::{parse, Formula};
