//! Java tokenizer.
//!
//! `>` is always emitted as a single-character token (except as part of
//! `>=`, `>>=` and `>>>=`) so that nested generic argument lists close
//! cleanly; the parser glues adjacent `>` tokens back into shift operators
//! in expression position.

use super::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    IntLit,
    FloatLit,
    CharLit,
    StringLit,
    TextBlock,
    /// Operators and separators.
    Punct,
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub offset: usize,
    pub message: String,
}

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
];

// Longest first within each leading character.
const PUNCT: &[&str] = &[
    ">>>=", "<<=", ">>=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", "(", ")", "{", "}", "[", "]", ";", ",", ".",
    "@", "=", ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

pub fn is_keyword(word: &[u8]) -> bool {
    KEYWORDS.iter().any(|k| k.as_bytes() == word)
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b == b'$' || b >= 0x80
}

fn is_ident_part(b: u8) -> bool {
    is_ident_start(b) || b.is_ascii_digit()
}

pub fn tokenize(src: &[u8]) -> Result<Vec<Token>, LexError> {
    Lexer { src, pos: 0 }.run()
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn peek(&self, ahead: usize) -> u8 {
        self.src.get(self.pos + ahead).copied().unwrap_or(0)
    }

    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, LexError> {
        Err(LexError {
            offset,
            message: message.into(),
        })
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        let mut tokens = Vec::new();
        // A leading byte-order mark is not part of the program.
        if self.src.starts_with(b"\xEF\xBB\xBF") {
            self.pos = 3;
        }
        loop {
            self.skip_trivia()?;
            let start = self.pos;
            if start >= self.src.len() {
                tokens.push(Token {
                    kind: TokenKind::Eof,
                    span: Span::empty(start),
                });
                return Ok(tokens);
            }
            let kind = self.next_kind()?;
            tokens.push(Token {
                kind,
                span: Span::new(start, self.pos),
            });
        }
    }

    fn skip_trivia(&mut self) -> Result<(), LexError> {
        loop {
            match (self.peek(0), self.peek(1)) {
                (b' ' | b'\t' | b'\n' | b'\r' | 0x0c, _) => self.pos += 1,
                (b'/', b'/') => {
                    while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                (b'/', b'*') => {
                    let start = self.pos;
                    self.pos += 2;
                    loop {
                        if self.pos + 1 >= self.src.len() {
                            return self.err(start, "unterminated block comment");
                        }
                        if self.src[self.pos] == b'*' && self.src[self.pos + 1] == b'/' {
                            self.pos += 2;
                            break;
                        }
                        self.pos += 1;
                    }
                }
                (0x1a, _) if self.pos + 1 == self.src.len() => self.pos += 1,
                _ => return Ok(()),
            }
        }
    }

    fn next_kind(&mut self) -> Result<TokenKind, LexError> {
        let b = self.peek(0);
        if is_ident_start(b) {
            let start = self.pos;
            while self.pos < self.src.len() && is_ident_part(self.src[self.pos]) {
                self.pos += 1;
            }
            return Ok(if is_keyword(&self.src[start..self.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            });
        }
        if b.is_ascii_digit() || (b == b'.' && self.peek(1).is_ascii_digit()) {
            return Ok(self.number());
        }
        match b {
            b'"' => {
                if self.peek(1) == b'"' && self.peek(2) == b'"' {
                    self.text_block()
                } else {
                    self.quoted(b'"')?;
                    Ok(TokenKind::StringLit)
                }
            }
            b'\'' => {
                self.quoted(b'\'')?;
                Ok(TokenKind::CharLit)
            }
            _ => self.punct(),
        }
    }

    fn quoted(&mut self, quote: u8) -> Result<(), LexError> {
        let start = self.pos;
        self.pos += 1;
        loop {
            match self.src.get(self.pos) {
                None | Some(b'\n') => return self.err(start, "unterminated literal"),
                Some(b'\\') => self.pos += 2,
                Some(&c) if c == quote => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(_) => self.pos += 1,
            }
        }
    }

    fn text_block(&mut self) -> Result<TokenKind, LexError> {
        let start = self.pos;
        self.pos += 3;
        loop {
            match self.src.get(self.pos) {
                None => return self.err(start, "unterminated text block"),
                Some(b'\\') => self.pos += 2,
                Some(b'"') if self.peek(1) == b'"' && self.peek(2) == b'"' => {
                    self.pos += 3;
                    return Ok(TokenKind::TextBlock);
                }
                Some(_) => self.pos += 1,
            }
        }
    }

    fn number(&mut self) -> TokenKind {
        let mut float = false;
        if self.peek(0) == b'0' && matches!(self.peek(1), b'x' | b'X') {
            self.pos += 2;
            self.digits(|c| c.is_ascii_hexdigit());
            if self.peek(0) == b'.' {
                float = true;
                self.pos += 1;
                self.digits(|c| c.is_ascii_hexdigit());
            }
            if matches!(self.peek(0), b'p' | b'P') {
                float = true;
                self.exponent();
            }
        } else if self.peek(0) == b'0' && matches!(self.peek(1), b'b' | b'B') {
            self.pos += 2;
            self.digits(|c| c == b'0' || c == b'1');
        } else {
            self.digits(|c| c.is_ascii_digit());
            // An integer can never be followed by a member selector, so any
            // single `.` continues a floating-point literal.
            if self.peek(0) == b'.' && self.peek(1) != b'.' {
                float = true;
                self.pos += 1;
                self.digits(|c| c.is_ascii_digit());
            }
            if matches!(self.peek(0), b'e' | b'E') {
                float = true;
                self.exponent();
            }
        }
        match self.peek(0) {
            b'l' | b'L' if !float => {
                self.pos += 1;
                TokenKind::IntLit
            }
            b'f' | b'F' | b'd' | b'D' => {
                self.pos += 1;
                TokenKind::FloatLit
            }
            _ if float => TokenKind::FloatLit,
            _ => TokenKind::IntLit,
        }
    }

    fn digits(&mut self, accept: impl Fn(u8) -> bool) {
        while self.pos < self.src.len()
            && (accept(self.src[self.pos]) || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
    }

    fn exponent(&mut self) {
        self.pos += 1;
        if matches!(self.peek(0), b'+' | b'-') {
            self.pos += 1;
        }
        self.digits(|c| c.is_ascii_digit());
    }

    fn punct(&mut self) -> Result<TokenKind, LexError> {
        let rest = &self.src[self.pos..];
        if rest[0] == b'>' {
            // Only assignment forms are glued; bare shifts stay split.
            for p in [">>>=", ">>=", ">="] {
                if rest.starts_with(p.as_bytes()) {
                    self.pos += p.len();
                    return Ok(TokenKind::Punct);
                }
            }
            self.pos += 1;
            return Ok(TokenKind::Punct);
        }
        match PUNCT.iter().find(|p| rest.starts_with(p.as_bytes())) {
            Some(p) => {
                self.pos += p.len();
                Ok(TokenKind::Punct)
            }
            None => self.err(
                self.pos,
                format!("unexpected character {:?}", rest[0] as char),
            ),
        }
    }
}
