//! Combinatorial and algebraic rigidity analysis of body-and-cad constraint graphs.

pub mod bracket;
pub mod error;
pub mod factoring;
pub mod gc;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod pebble;
pub mod rigidity;

pub use error::{Error, Result};
pub use graph::{BicoloredMultigraph, Color, FrameSignature, TieDown, TieLoop};
pub use linalg::Rational;
