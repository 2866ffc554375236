//! A toolkit for the modal mu-calculus and parity formulas: parsing and
//! size analytics, Fischer-Ladner closure graphs, alternation depth,
//! compilation to parity formulas over subformula dags and closure
//! graphs, Bekic decompilation, guarded transformation, alpha-invariant
//! renamings, and game-based semantic validation.

pub mod alpha;
pub mod alternation;
pub mod compile;
pub mod decompile;
pub mod error;
pub mod formula;
pub mod generate;
pub mod guard;
pub mod parity;
pub mod semantics;

pub use error::{Error, Result};
pub use formula::{parse, print, Formula, Parity, Var};
pub use parity::ParityFormula;
pub use semantics::{KripkeModel, ParityGame};
