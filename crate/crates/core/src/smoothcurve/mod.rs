//! Expressions, symbolic differentiation and jet evaluation.

mod expr;
mod jet;

pub use expr::{parse_expr, Arg, Expr, Func, Node};
pub use jet::Jet;

/// Default truncation order for curve jets.
pub const DEFAULT_ORDER: usize = 7;
