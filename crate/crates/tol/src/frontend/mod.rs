//! Lexer, parser, and syntax tree for TOL source files.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod token;

pub use ast::{pretty_unit, Unit};
pub use lexer::{lex, LexError};
pub use parser::{parse, ParseError};
