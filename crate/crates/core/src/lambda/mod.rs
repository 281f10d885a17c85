//! Frontend for the calculus: AST, parser, type checker, and the primitive
//! function table.

pub mod ast;
pub mod parser;
pub mod prims;
pub mod types;

pub use ast::{SimpleType, Term};
pub use parser::{parse, parse_type, ParseError};
pub use prims::{grid_modulus, PrimError, Primitive, PrimitiveTable};
pub use types::{desugar_lets, typecheck, TypeError, TypingContext};
