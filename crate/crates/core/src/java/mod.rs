//! Reading, parsing and splicing Java sources.

mod lexer;
mod parser;
mod source;
mod tree;

pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{is_primitive, parse_source};
pub use source::{splice, Edit, SourceFile, Span};
pub use tree::{statement_text, LiteralKind, Node, NodeKind, SyntaxTree};
