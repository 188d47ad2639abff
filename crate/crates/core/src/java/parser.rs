//! Recursive-descent Java parser producing a span-annotated tree.
//!
//! Expressions and statements are structured fully. Types, generics,
//! annotations and lambda parameter lists are consumed and spanned but not
//! broken down, since no mutation operator looks inside them.

use super::lexer::{self, Token, TokenKind};
use super::tree::{LiteralKind, Node, NodeKind, SyntaxTree};
use super::{SourceFile, Span};
use crate::error::{Error, Result};

const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "char", "short", "int", "long", "float", "double",
];

pub fn is_primitive(word: &str) -> bool {
    PRIMITIVES.contains(&word)
}

const ASSIGN_OPS: &[&str] = &[
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=",
];

/// Parses one compilation unit.
pub fn parse_source(file: &SourceFile) -> Result<SyntaxTree> {
    let src = file.content();
    let tokens = lexer::tokenize(src).map_err(|e| Error::Parse {
        file: file.path().to_path_buf(),
        line: file.line_of(e.offset),
        message: e.message,
    })?;
    let mut parser = Parser {
        src,
        tokens,
        pos: 0,
        arena: Vec::new(),
        no_lambda: false,
    };
    let root = parser.compilation_unit().map_err(|e| Error::Parse {
        file: file.path().to_path_buf(),
        line: file.line_of(e.offset),
        message: e.message,
    })?;
    Ok(parser.finish(root, file))
}

struct Failure {
    offset: usize,
    message: String,
}

type PResult<T> = std::result::Result<T, Failure>;

struct Raw {
    kind: NodeKind,
    span: Span,
    op: Option<(String, Span)>,
    type_span: Option<Span>,
    modifiers: Vec<String>,
    children: Vec<usize>,
}

struct Modifiers {
    start: Option<usize>,
    keywords: Vec<String>,
}

struct Parser<'a> {
    src: &'a [u8],
    tokens: Vec<Token>,
    pos: usize,
    arena: Vec<Raw>,
    /// Set while parsing case labels, where `x -> ...` is not a lambda.
    no_lambda: bool,
}

impl<'a> Parser<'a> {
    // ---- token helpers ----

    fn tok(&self, ahead: usize) -> Token {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        self.tokens[i]
    }

    fn text_of(&self, t: Token) -> &'a str {
        // Tokens split on ASCII boundaries, so identifiers with non-ASCII
        // bytes still form valid UTF-8 slices of a valid UTF-8 file; fall
        // back to an empty string otherwise.
        std::str::from_utf8(&self.src[t.span.start..t.span.end]).unwrap_or("")
    }

    fn text(&self, ahead: usize) -> &'a str {
        self.text_of(self.tok(ahead))
    }

    fn at(&self, s: &str) -> bool {
        let t = self.tok(0);
        t.kind != TokenKind::Eof
            && !matches!(
                t.kind,
                TokenKind::StringLit | TokenKind::CharLit | TokenKind::TextBlock
            )
            && self.text_of(t) == s
    }

    fn at_ahead(&self, ahead: usize, s: &str) -> bool {
        let t = self.tok(ahead);
        matches!(
            t.kind,
            TokenKind::Punct | TokenKind::Keyword | TokenKind::Ident
        ) && self.text_of(t) == s
    }

    fn at_kind(&self, kind: TokenKind) -> bool {
        self.tok(0).kind == kind
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.at(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.tok(0);
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, s: &str) -> PResult<Token> {
        if self.at(s) {
            Ok(self.bump())
        } else {
            self.fail(format!("expected `{}`, found `{}`", s, self.text(0)))
        }
    }

    fn expect_ident(&mut self) -> PResult<Token> {
        if self.at_kind(TokenKind::Ident) {
            Ok(self.bump())
        } else {
            self.fail(format!("expected identifier, found `{}`", self.text(0)))
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(Failure {
            offset: self.tok(0).span.start,
            message: message.into(),
        })
    }

    /// End offset of the previously consumed token.
    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.tokens[self.pos - 1].span.end
        }
    }

    fn start(&self) -> usize {
        self.tok(0).span.start
    }

    /// Runs `f`, rewinding tokens and created nodes when it fails.
    fn attempt<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> Option<T> {
        let (pos, len, no_lambda) = (self.pos, self.arena.len(), self.no_lambda);
        match f(self) {
            Ok(v) => Some(v),
            Err(_) => {
                self.pos = pos;
                self.arena.truncate(len);
                self.no_lambda = no_lambda;
                None
            }
        }
    }

    /// Would `f` succeed from here? Never consumes anything.
    fn lookahead(&mut self, f: impl FnOnce(&mut Self) -> PResult<()>) -> bool {
        let (pos, len, no_lambda) = (self.pos, self.arena.len(), self.no_lambda);
        let ok = f(self).is_ok();
        self.pos = pos;
        self.arena.truncate(len);
        self.no_lambda = no_lambda;
        ok
    }

    fn node(&mut self, kind: NodeKind, span: Span, children: Vec<usize>) -> usize {
        self.arena.push(Raw {
            kind,
            span,
            op: None,
            type_span: None,
            modifiers: Vec::new(),
            children,
        });
        self.arena.len() - 1
    }

    fn op_node(
        &mut self,
        kind: NodeKind,
        span: Span,
        op: (String, Span),
        children: Vec<usize>,
    ) -> usize {
        let id = self.node(kind, span, children);
        self.arena[id].op = Some(op);
        id
    }

    fn span_of(&self, id: usize) -> Span {
        self.arena[id].span
    }

    /// Skips a balanced `open ... close` group starting at the current token.
    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<()> {
        self.expect(open)?;
        let mut depth = 1;
        while depth > 0 {
            if self.at_kind(TokenKind::Eof) {
                return self.fail(format!("unbalanced `{open}`"));
            }
            if self.at(open) {
                depth += 1;
            } else if self.at(close) {
                depth -= 1;
            }
            self.bump();
        }
        Ok(())
    }

    // ---- tree finalisation ----

    fn finish(self, root: usize, file: &SourceFile) -> SyntaxTree {
        let mut arena = self.arena;
        // Creation order already is source order for almost every construct;
        // sorting pins it down.
        let spans: Vec<Span> = arena.iter().map(|r| r.span).collect();
        for raw in &mut arena {
            raw.children
                .sort_by_key(|c| (spans[*c].start, spans[*c].end));
        }

        // Pre-order numbering.
        let mut order = Vec::with_capacity(arena.len());
        let mut stack = vec![(root, None::<usize>)];
        let mut new_id = vec![usize::MAX; arena.len()];
        let mut parents = Vec::with_capacity(arena.len());
        while let Some((raw, parent)) = stack.pop() {
            new_id[raw] = order.len();
            order.push(raw);
            parents.push(parent);
            for child in arena[raw].children.iter().rev() {
                stack.push((*child, Some(raw)));
            }
        }

        let nodes = order
            .iter()
            .zip(parents)
            .enumerate()
            .map(|(id, (&raw, parent))| {
                let r = &arena[raw];
                Node {
                    id,
                    kind: r.kind,
                    span: r.span,
                    line: file.line_of(r.span.start),
                    operator_token: r.op.as_ref().map(|(t, _)| t.clone()),
                    operator_span: r.op.as_ref().map(|(_, s)| *s),
                    type_span: r.type_span,
                    modifiers: r.modifiers.clone(),
                    parent: parent.map(|p| new_id[p]),
                    children: r.children.iter().map(|c| new_id[*c]).collect(),
                }
            })
            .collect();
        SyntaxTree { nodes, root: 0 }
    }

    // ---- declarations ----

    fn compilation_unit(&mut self) -> PResult<usize> {
        let mut children = Vec::new();
        let mods = self.modifiers(false)?;
        if self.at("package") {
            let start = mods.start.unwrap_or_else(|| self.start());
            while !self.at(";") {
                if self.at_kind(TokenKind::Eof) {
                    return self.fail("unterminated package declaration");
                }
                self.bump();
            }
            self.bump();
            children.push(self.node(
                NodeKind::PackageDecl,
                Span::new(start, self.prev_end()),
                vec![],
            ));
        } else if mods.start.is_some() || !mods.keywords.is_empty() {
            children.push(self.type_decl(mods)?);
        }
        loop {
            if self.at_kind(TokenKind::Eof) {
                break;
            }
            if self.eat(";") {
                continue;
            }
            if self.at("import") {
                let start = self.start();
                while !self.at(";") {
                    if self.at_kind(TokenKind::Eof) {
                        return self.fail("unterminated import");
                    }
                    self.bump();
                }
                self.bump();
                children.push(self.node(
                    NodeKind::ImportDecl,
                    Span::new(start, self.prev_end()),
                    vec![],
                ));
                continue;
            }
            let mods = self.modifiers(false)?;
            children.push(self.type_decl(mods)?);
        }
        Ok(self.node(
            NodeKind::CompilationUnit,
            Span::new(0, self.src.len()),
            children,
        ))
    }

    fn is_modifier_keyword(word: &str) -> bool {
        matches!(
            word,
            "public"
                | "protected"
                | "private"
                | "static"
                | "abstract"
                | "final"
                | "native"
                | "synchronized"
                | "transient"
                | "volatile"
                | "strictfp"
        )
    }

    /// Consumes modifiers and annotations. `member` enables the `default`
    /// interface-method modifier.
    fn modifiers(&mut self, member: bool) -> PResult<Modifiers> {
        let mut mods = Modifiers {
            start: None,
            keywords: Vec::new(),
        };
        loop {
            let start = self.start();
            if self.at("@") && !self.at_ahead(1, "interface") {
                self.annotation()?;
            } else if self.at_kind(TokenKind::Keyword) && Self::is_modifier_keyword(self.text(0)) {
                // `synchronized (x) {}` is a statement, not a modifier.
                if self.at("synchronized") && self.at_ahead(1, "(") {
                    break;
                }
                mods.keywords.push(self.text(0).to_string());
                self.bump();
            } else if member
                && self.at("default")
                && !self.at_ahead(1, ":")
                && !self.at_ahead(1, "->")
            {
                mods.keywords.push("default".into());
                self.bump();
            } else if self.at("sealed") && self.starts_type_or_modifier(1) {
                mods.keywords.push("sealed".into());
                self.bump();
            } else if self.at("non")
                && self.at_ahead(1, "-")
                && self.at_ahead(2, "sealed")
                && self.tok(1).span.start == self.tok(0).span.end
            {
                mods.keywords.push("non-sealed".into());
                self.pos += 3;
            } else {
                break;
            }
            mods.start.get_or_insert(start);
        }
        Ok(mods)
    }

    fn starts_type_or_modifier(&self, ahead: usize) -> bool {
        let t = self.text(ahead);
        matches!(
            t,
            "class"
                | "interface"
                | "abstract"
                | "static"
                | "final"
                | "public"
                | "private"
                | "protected"
                | "strictfp"
        ) || t == "@"
    }

    fn annotation(&mut self) -> PResult<()> {
        self.expect("@")?;
        self.expect_ident()?;
        while self.at(".") && self.tok(1).kind == TokenKind::Ident {
            self.pos += 2;
        }
        if self.at("(") {
            self.skip_balanced("(", ")")?;
        }
        Ok(())
    }

    fn at_record_decl(&self) -> bool {
        self.at("record")
            && self.tok(1).kind == TokenKind::Ident
            && (self.at_ahead(2, "(") || self.at_ahead(2, "<"))
    }

    fn at_type_decl(&self) -> bool {
        self.at("class")
            || self.at("interface")
            || self.at("enum")
            || (self.at("@") && self.at_ahead(1, "interface"))
            || self.at_record_decl()
    }

    fn type_decl(&mut self, mods: Modifiers) -> PResult<usize> {
        let start = mods.start.unwrap_or_else(|| self.start());
        let kind = if self.eat("class") {
            NodeKind::ClassDecl
        } else if self.eat("interface") {
            NodeKind::InterfaceDecl
        } else if self.eat("enum") {
            NodeKind::EnumDecl
        } else if self.at("@") && self.at_ahead(1, "interface") {
            self.pos += 2;
            NodeKind::AnnotationTypeDecl
        } else if self.at_record_decl() {
            self.bump();
            NodeKind::RecordDecl
        } else {
            return self.fail(format!(
                "expected a type declaration, found `{}`",
                self.text(0)
            ));
        };
        self.expect_ident()?;
        if self.at("<") {
            self.type_params()?;
        }
        let mut children = Vec::new();
        if kind == NodeKind::RecordDecl {
            children.extend(self.formal_params()?);
        }
        loop {
            if self.eat("extends") || self.eat("implements") || self.eat("permits") {
                self.type_list()?;
            } else {
                break;
            }
        }
        if kind == NodeKind::EnumDecl {
            children.extend(self.enum_body()?);
        } else {
            children.extend(self.class_body(kind == NodeKind::RecordDecl)?);
        }
        let id = self.node(kind, Span::new(start, self.prev_end()), children);
        self.arena[id].modifiers = mods.keywords;
        Ok(id)
    }

    fn type_list(&mut self) -> PResult<()> {
        self.parse_type()?;
        while self.eat(",") {
            self.parse_type()?;
        }
        Ok(())
    }

    fn type_params(&mut self) -> PResult<()> {
        self.expect("<")?;
        let mut depth = 1;
        while depth > 0 {
            if self.at_kind(TokenKind::Eof) {
                return self.fail("unterminated type parameters");
            }
            if self.at("<") {
                depth += 1;
            } else if self.at(">") {
                depth -= 1;
            }
            self.bump();
        }
        Ok(())
    }

    fn class_body(&mut self, record: bool) -> PResult<Vec<usize>> {
        self.expect("{")?;
        let mut members = Vec::new();
        while !self.eat("}") {
            if self.at_kind(TokenKind::Eof) {
                return self.fail("unterminated class body");
            }
            if self.eat(";") {
                continue;
            }
            members.push(self.member(record)?);
        }
        Ok(members)
    }

    fn enum_body(&mut self) -> PResult<Vec<usize>> {
        self.expect("{")?;
        let mut members = Vec::new();
        while !self.at(";") && !self.at("}") {
            let mods = self.modifiers(false)?;
            let start = mods.start.unwrap_or_else(|| self.start());
            self.expect_ident()?;
            let mut children = Vec::new();
            if self.at("(") {
                children.extend(self.arguments()?);
            }
            if self.at("{") {
                children.extend(self.class_body(false)?);
            }
            members.push(self.node(
                NodeKind::EnumConstant,
                Span::new(start, self.prev_end()),
                children,
            ));
            if !self.eat(",") {
                break;
            }
        }
        if self.eat(";") {
            while !self.at("}") {
                if self.at_kind(TokenKind::Eof) {
                    return self.fail("unterminated enum body");
                }
                if self.eat(";") {
                    continue;
                }
                members.push(self.member(false)?);
            }
        }
        self.expect("}")?;
        Ok(members)
    }

    fn member(&mut self, record: bool) -> PResult<usize> {
        let mods = self.modifiers(true)?;
        let start = mods.start.unwrap_or_else(|| self.start());
        if self.at("{") {
            let body = self.block()?;
            let id = self.node(
                NodeKind::Initializer,
                Span::new(start, self.prev_end()),
                vec![body],
            );
            self.arena[id].modifiers = mods.keywords;
            return Ok(id);
        }
        if self.at_type_decl() {
            return self.type_decl(mods);
        }
        if self.at("<") {
            self.type_params()?;
        }
        // Constructor, or compact record constructor.
        if self.at_kind(TokenKind::Ident)
            && (self.at_ahead(1, "(") || (record && self.at_ahead(1, "{")))
        {
            self.bump();
            let mut children = if self.at("(") {
                self.formal_params()?
            } else {
                Vec::new()
            };
            if self.eat("throws") {
                self.type_list()?;
            }
            children.push(self.block()?);
            let id = self.node(
                NodeKind::ConstructorDecl,
                Span::new(start, self.prev_end()),
                children,
            );
            self.arena[id].modifiers = mods.keywords;
            return Ok(id);
        }

        let type_span = self.parse_type()?;
        if self.at_kind(TokenKind::Ident) && self.at_ahead(1, "(") {
            self.bump();
            let mut children = self.formal_params()?;
            self.dims()?;
            if self.eat("throws") {
                self.type_list()?;
            }
            if self.at("{") {
                children.push(self.block()?);
            } else if self.eat("default") {
                // Annotation element default; not an expression we mutate.
                while !self.at(";") {
                    if self.at_kind(TokenKind::Eof) {
                        return self.fail("unterminated annotation element");
                    }
                    if self.at("{") {
                        self.skip_balanced("{", "}")?;
                    } else if self.at("(") {
                        self.skip_balanced("(", ")")?;
                    } else {
                        self.bump();
                    }
                }
                self.expect(";")?;
            } else {
                self.expect(";")?;
            }
            let id = self.node(
                NodeKind::MethodDecl,
                Span::new(start, self.prev_end()),
                children,
            );
            self.arena[id].type_span = Some(type_span);
            self.arena[id].modifiers = mods.keywords;
            return Ok(id);
        }

        let children = self.declarators()?;
        self.expect(";")?;
        let id = self.node(
            NodeKind::FieldDecl,
            Span::new(start, self.prev_end()),
            children,
        );
        self.arena[id].type_span = Some(type_span);
        self.arena[id].modifiers = mods.keywords;
        Ok(id)
    }

    fn formal_params(&mut self) -> PResult<Vec<usize>> {
        self.expect("(")?;
        let mut params = Vec::new();
        if self.eat(")") {
            return Ok(params);
        }
        loop {
            let mods = self.modifiers(false)?;
            let start = mods.start.unwrap_or_else(|| self.start());
            let ty = self.parse_type()?;
            let mut type_span = ty;
            if self.at("...") {
                type_span = ty.to(self.bump().span);
            }
            // Receiver parameter: `Outer.this` or `this`.
            if self.eat("this") {
            } else {
                self.expect_ident()?;
                if self.at(".") && self.at_ahead(1, "this") {
                    self.pos += 2;
                }
            }
            self.dims()?;
            let id = self.node(
                NodeKind::Parameter,
                Span::new(start, self.prev_end()),
                vec![],
            );
            self.arena[id].type_span = Some(type_span);
            self.arena[id].modifiers = mods.keywords;
            params.push(id);
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(params)
    }

    fn dims(&mut self) -> PResult<()> {
        loop {
            if self.at("@") {
                self.annotation()?;
            } else if self.at("[") && self.at_ahead(1, "]") {
                self.pos += 2;
            } else {
                return Ok(());
            }
        }
    }

    /// `name [dims] [= init], ...` returning initializer expressions.
    fn declarators(&mut self) -> PResult<Vec<usize>> {
        let mut inits = Vec::new();
        loop {
            self.expect_ident()?;
            self.dims()?;
            if self.eat("=") {
                inits.push(self.var_init()?);
            }
            if !self.eat(",") {
                return Ok(inits);
            }
        }
    }

    fn var_init(&mut self) -> PResult<usize> {
        if self.at("{") {
            self.array_init()
        } else {
            self.expression()
        }
    }

    fn array_init(&mut self) -> PResult<usize> {
        let start = self.expect("{")?.span.start;
        let mut items = Vec::new();
        while !self.at("}") {
            items.push(self.var_init()?);
            if !self.eat(",") {
                break;
            }
        }
        self.expect("}")?;
        Ok(self.node(
            NodeKind::ArrayInit,
            Span::new(start, self.prev_end()),
            items,
        ))
    }

    // ---- types (spanned, no nodes) ----

    fn parse_type(&mut self) -> PResult<Span> {
        while self.at("@") {
            self.annotation()?;
        }
        let start = self.start();
        if self.at_kind(TokenKind::Keyword) && (is_primitive(self.text(0)) || self.at("void")) {
            self.bump();
        } else {
            self.expect_ident()?;
            if self.at("<") {
                self.type_args()?;
            }
            while self.at(".") && (self.tok(1).kind == TokenKind::Ident || self.at_ahead(1, "@")) {
                self.bump();
                while self.at("@") {
                    self.annotation()?;
                }
                self.expect_ident()?;
                if self.at("<") {
                    self.type_args()?;
                }
            }
        }
        self.dims()?;
        Ok(Span::new(start, self.prev_end()))
    }

    fn type_args(&mut self) -> PResult<()> {
        self.expect("<")?;
        if self.eat(">") {
            return Ok(());
        }
        loop {
            while self.at("@") {
                self.annotation()?;
            }
            if self.eat("?") {
                if self.eat("extends") || self.eat("super") {
                    self.parse_type()?;
                    while self.eat("&") {
                        self.parse_type()?;
                    }
                }
            } else {
                self.parse_type()?;
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(">")?;
        Ok(())
    }

    // ---- statements ----

    fn block(&mut self) -> PResult<usize> {
        let start = self.expect("{")?.span.start;
        let mut stmts = Vec::new();
        while !self.eat("}") {
            if self.at_kind(TokenKind::Eof) {
                return self.fail("unterminated block");
            }
            stmts.push(self.block_statement()?);
        }
        Ok(self.node(NodeKind::Block, Span::new(start, self.prev_end()), stmts))
    }

    fn block_statement(&mut self) -> PResult<usize> {
        let start = self.start();
        let explicit_mods = self.at("final")
            || self.at("abstract")
            || self.at("static")
            || self.at("strictfp")
            || (self.at("@") && !self.at_ahead(1, "interface"));
        if explicit_mods {
            let mods = self.modifiers(false)?;
            if self.at_type_decl() {
                let decl = self.type_decl(mods)?;
                let span = self.span_of(decl);
                return Ok(self.node(NodeKind::LocalTypeDecl, span, vec![decl]));
            }
            let id = self.local_var_decl(start, mods.keywords)?;
            self.expect(";")?;
            self.arena[id].span = Span::new(start, self.prev_end());
            return Ok(id);
        }
        if self.at("class") || self.at("interface") || self.at("enum") || self.at_record_decl() {
            let decl = self.type_decl(Modifiers {
                start: None,
                keywords: Vec::new(),
            })?;
            let span = self.span_of(decl);
            return Ok(self.node(NodeKind::LocalTypeDecl, span, vec![decl]));
        }
        if self.looks_like_local_var() {
            let id = self.local_var_decl(start, Vec::new())?;
            self.expect(";")?;
            self.arena[id].span = Span::new(start, self.prev_end());
            return Ok(id);
        }
        self.statement()
    }

    /// `Type name` followed by something only a declarator can follow with.
    fn looks_like_local_var(&mut self) -> bool {
        let t = self.tok(0);
        let plausible = (t.kind == TokenKind::Ident && self.text(0) != "yield")
            || (t.kind == TokenKind::Keyword && is_primitive(self.text(0)));
        if !plausible {
            return false;
        }
        self.lookahead(|p| {
            p.parse_type()?;
            p.expect_ident()?;
            if p.at("=") || p.at(";") || p.at(",") || p.at("[") || p.at(":") {
                Ok(())
            } else {
                p.fail("not a declaration")
            }
        })
    }

    /// Declaration without its terminating `;`.
    fn local_var_decl(&mut self, start: usize, modifiers: Vec<String>) -> PResult<usize> {
        let type_span = self.parse_type()?;
        let inits = self.declarators()?;
        let id = self.node(
            NodeKind::LocalVarDecl,
            Span::new(start, self.prev_end()),
            inits,
        );
        self.arena[id].type_span = Some(type_span);
        self.arena[id].modifiers = modifiers;
        Ok(id)
    }

    fn statement(&mut self) -> PResult<usize> {
        let start = self.start();
        let t = self.tok(0);
        let word = self.text(0);
        let kw = t.kind == TokenKind::Keyword;
        if t.kind == TokenKind::Punct && word == "{" {
            return self.block();
        }
        if t.kind == TokenKind::Punct && word == ";" {
            self.bump();
            return Ok(self.node(NodeKind::EmptyStmt, t.span, vec![]));
        }
        if kw {
            match word {
                "if" => {
                    self.bump();
                    let cond = self.paren_condition()?;
                    let then = self.statement()?;
                    let mut children = vec![cond, then];
                    if self.eat("else") {
                        children.push(self.statement()?);
                    }
                    return Ok(self.node(
                        NodeKind::IfStmt,
                        Span::new(start, self.prev_end()),
                        children,
                    ));
                }
                "while" => {
                    self.bump();
                    let cond = self.paren_condition()?;
                    let body = self.statement()?;
                    return Ok(self.node(
                        NodeKind::WhileStmt,
                        Span::new(start, self.prev_end()),
                        vec![cond, body],
                    ));
                }
                "do" => {
                    self.bump();
                    let body = self.statement()?;
                    self.expect("while")?;
                    let cond = self.paren_condition()?;
                    self.expect(";")?;
                    return Ok(self.node(
                        NodeKind::DoStmt,
                        Span::new(start, self.prev_end()),
                        vec![body, cond],
                    ));
                }
                "for" => return self.for_statement(),
                "switch" => {
                    let children = self.switch_body()?;
                    return Ok(self.node(
                        NodeKind::SwitchStmt,
                        Span::new(start, self.prev_end()),
                        children,
                    ));
                }
                "return" => {
                    self.bump();
                    let mut children = Vec::new();
                    if !self.at(";") {
                        children.push(self.expression()?);
                    }
                    self.expect(";")?;
                    return Ok(self.node(
                        NodeKind::ReturnStmt,
                        Span::new(start, self.prev_end()),
                        children,
                    ));
                }
                "throw" => {
                    self.bump();
                    let e = self.expression()?;
                    self.expect(";")?;
                    return Ok(self.node(
                        NodeKind::ThrowStmt,
                        Span::new(start, self.prev_end()),
                        vec![e],
                    ));
                }
                "break" | "continue" => {
                    self.bump();
                    if self.at_kind(TokenKind::Ident) {
                        self.bump();
                    }
                    self.expect(";")?;
                    let kind = if word == "break" {
                        NodeKind::BreakStmt
                    } else {
                        NodeKind::ContinueStmt
                    };
                    return Ok(self.node(kind, Span::new(start, self.prev_end()), vec![]));
                }
                "try" => return self.try_statement(),
                "synchronized" => {
                    self.bump();
                    let lock = self.paren_condition()?;
                    let body = self.block()?;
                    return Ok(self.node(
                        NodeKind::SyncStmt,
                        Span::new(start, self.prev_end()),
                        vec![lock, body],
                    ));
                }
                "assert" => {
                    self.bump();
                    let mut children = vec![self.expression()?];
                    if self.eat(":") {
                        children.push(self.expression()?);
                    }
                    self.expect(";")?;
                    return Ok(self.node(
                        NodeKind::AssertStmt,
                        Span::new(start, self.prev_end()),
                        children,
                    ));
                }
                _ => {}
            }
        }
        if t.kind == TokenKind::Ident {
            if self.at_ahead(1, ":") {
                self.pos += 2;
                let body = self.statement()?;
                return Ok(self.node(
                    NodeKind::LabeledStmt,
                    Span::new(start, self.prev_end()),
                    vec![body],
                ));
            }
            if word == "yield"
                && !["=", ".", "[", "++", "--", "(", ";"]
                    .iter()
                    .any(|s| self.at_ahead(1, s))
                && !ASSIGN_OPS.iter().any(|s| self.at_ahead(1, s))
            {
                self.bump();
                let e = self.expression()?;
                self.expect(";")?;
                return Ok(self.node(
                    NodeKind::YieldStmt,
                    Span::new(start, self.prev_end()),
                    vec![e],
                ));
            }
        }
        let e = self.expression()?;
        self.expect(";")?;
        Ok(self.node(
            NodeKind::ExprStmt,
            Span::new(start, self.prev_end()),
            vec![e],
        ))
    }

    fn paren_condition(&mut self) -> PResult<usize> {
        self.expect("(")?;
        let saved = std::mem::replace(&mut self.no_lambda, false);
        let e = self.expression();
        self.no_lambda = saved;
        let e = e?;
        self.expect(")")?;
        Ok(e)
    }

    fn for_statement(&mut self) -> PResult<usize> {
        let start = self.expect("for")?.span.start;
        self.expect("(")?;
        // Enhanced for: `[mods] Type name : expr`.
        let foreach = self.lookahead(|p| {
            p.modifiers(false)?;
            p.parse_type()?;
            p.expect_ident()?;
            p.dims()?;
            p.expect(":")?;
            Ok(())
        });
        if foreach {
            let decl_start = self.start();
            let mods = self.modifiers(false)?;
            let type_span = self.parse_type()?;
            self.expect_ident()?;
            self.dims()?;
            let var = self.node(
                NodeKind::LocalVarDecl,
                Span::new(decl_start, self.prev_end()),
                vec![],
            );
            self.arena[var].type_span = Some(type_span);
            self.arena[var].modifiers = mods.keywords;
            self.expect(":")?;
            let iterable = self.expression()?;
            self.expect(")")?;
            let body = self.statement()?;
            return Ok(self.node(
                NodeKind::ForEachStmt,
                Span::new(start, self.prev_end()),
                vec![var, iterable, body],
            ));
        }

        let mut children = Vec::new();
        if !self.at(";") {
            let decl_start = self.start();
            if self.at("final") || self.at("@") {
                let mods = self.modifiers(false)?;
                children.push(self.local_var_decl(decl_start, mods.keywords)?);
            } else if self.looks_like_local_var() {
                children.push(self.local_var_decl(decl_start, Vec::new())?);
            } else {
                children.extend(self.expression_list()?);
            }
        }
        self.expect(";")?;
        if !self.at(";") {
            children.push(self.expression()?);
        }
        self.expect(";")?;
        if !self.at(")") {
            children.extend(self.expression_list()?);
        }
        self.expect(")")?;
        children.push(self.statement()?);
        Ok(self.node(
            NodeKind::ForStmt,
            Span::new(start, self.prev_end()),
            children,
        ))
    }

    fn expression_list(&mut self) -> PResult<Vec<usize>> {
        let mut list = vec![self.expression()?];
        while self.eat(",") {
            list.push(self.expression()?);
        }
        Ok(list)
    }

    fn try_statement(&mut self) -> PResult<usize> {
        let start = self.expect("try")?.span.start;
        let mut children = Vec::new();
        if self.eat("(") {
            while !self.at(")") {
                let res_start = self.start();
                if self.at("final") || self.at("@") {
                    let mods = self.modifiers(false)?;
                    children.push(self.local_var_decl(res_start, mods.keywords)?);
                } else if self.looks_like_local_var() {
                    children.push(self.local_var_decl(res_start, Vec::new())?);
                } else {
                    children.push(self.expression()?);
                }
                if !self.eat(";") {
                    break;
                }
            }
            self.expect(")")?;
        }
        children.push(self.block()?);
        while self.at("catch") {
            let catch_start = self.bump().span.start;
            self.expect("(")?;
            let mods = self.modifiers(false)?;
            let param_start = mods.start.unwrap_or_else(|| self.start());
            let mut type_span = self.parse_type()?;
            while self.eat("|") {
                type_span = type_span.to(self.parse_type()?);
            }
            self.expect_ident()?;
            let param = self.node(
                NodeKind::Parameter,
                Span::new(param_start, self.prev_end()),
                vec![],
            );
            self.arena[param].type_span = Some(type_span);
            self.arena[param].modifiers = mods.keywords;
            self.expect(")")?;
            let body = self.block()?;
            children.push(self.node(
                NodeKind::CatchClause,
                Span::new(catch_start, self.prev_end()),
                vec![param, body],
            ));
        }
        if self.eat("finally") {
            children.push(self.block()?);
        }
        Ok(self.node(
            NodeKind::TryStmt,
            Span::new(start, self.prev_end()),
            children,
        ))
    }

    /// `switch (selector) { cases }` shared by statements and expressions.
    fn switch_body(&mut self) -> PResult<Vec<usize>> {
        self.expect("switch")?;
        let mut children = vec![self.paren_condition()?];
        self.expect("{")?;
        while !self.eat("}") {
            if self.at_kind(TokenKind::Eof) {
                return self.fail("unterminated switch");
            }
            children.push(self.switch_case()?);
        }
        Ok(children)
    }

    fn switch_case(&mut self) -> PResult<usize> {
        let start = self.start();
        let mut children = Vec::new();
        if self.eat("default") {
        } else {
            self.expect("case")?;
            loop {
                if self.eat("default") || self.eat("null") {
                } else if let Some(()) = self.attempt(|p| {
                    p.case_pattern()?;
                    if p.at(",") || p.at(":") || p.at("->") || p.at("when") {
                        Ok(())
                    } else {
                        p.fail("not a pattern")
                    }
                }) {
                } else {
                    let saved = std::mem::replace(&mut self.no_lambda, true);
                    let label = self.ternary();
                    self.no_lambda = saved;
                    children.push(label?);
                }
                if !self.eat(",") {
                    break;
                }
            }
            if self.eat("when") {
                let saved = std::mem::replace(&mut self.no_lambda, true);
                let guard = self.ternary();
                self.no_lambda = saved;
                children.push(guard?);
            }
        }
        if self.eat("->") {
            if self.at("{") {
                children.push(self.block()?);
            } else if self.at("throw") {
                children.push(self.statement()?);
            } else {
                let e = self.expression()?;
                self.expect(";")?;
                let span = Span::new(self.span_of(e).start, self.prev_end());
                children.push(self.node(NodeKind::ExprStmt, span, vec![e]));
            }
        } else {
            self.expect(":")?;
            while !self.at("case") && !self.at("default") && !self.at("}") {
                if self.at_kind(TokenKind::Eof) {
                    return self.fail("unterminated switch case");
                }
                children.push(self.block_statement()?);
            }
            // `default` here may still start a statement in odd code, but a
            // label is the only legal reading inside a switch block.
        }
        Ok(self.node(
            NodeKind::SwitchCase,
            Span::new(start, self.prev_end()),
            children,
        ))
    }

    /// Type pattern `[final] Type name` or record pattern `Type(...)`.
    fn case_pattern(&mut self) -> PResult<()> {
        self.modifiers(false)?;
        self.parse_type()?;
        if self.at("(") {
            self.skip_balanced("(", ")")?;
            if self.at_kind(TokenKind::Ident) && !self.at("when") {
                self.bump();
            }
            Ok(())
        } else {
            self.expect_ident().map(|_| ())
        }
    }

    // ---- expressions ----

    pub(crate) fn expression(&mut self) -> PResult<usize> {
        if let Some(lambda) = self.try_lambda()? {
            return Ok(lambda);
        }
        let lhs = self.ternary()?;
        if self.at_kind(TokenKind::Punct) && ASSIGN_OPS.contains(&self.text(0)) {
            let op = self.bump();
            let rhs = self.expression()?;
            let span = self.span_of(lhs).to(self.span_of(rhs));
            let text = self.text_of(op).to_string();
            return Ok(self.op_node(NodeKind::AssignExpr, span, (text, op.span), vec![lhs, rhs]));
        }
        Ok(lhs)
    }

    fn try_lambda(&mut self) -> PResult<Option<usize>> {
        if self.no_lambda {
            return Ok(None);
        }
        let start = self.start();
        if self.at_kind(TokenKind::Ident) && self.at_ahead(1, "->") {
            self.pos += 2;
        } else if self.at("(") {
            // Find the matching `)` and check for an arrow after it.
            let mut depth = 0usize;
            let mut i = self.pos;
            loop {
                let t = self.tokens[i];
                if t.kind == TokenKind::Eof {
                    return Ok(None);
                }
                if t.kind == TokenKind::Punct {
                    match self.text_of(t) {
                        "(" => depth += 1,
                        ")" => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                i += 1;
            }
            let next = self.tokens[(i + 1).min(self.tokens.len() - 1)];
            if !(next.kind == TokenKind::Punct && self.text_of(next) == "->") {
                return Ok(None);
            }
            self.pos = i + 2;
        } else {
            return Ok(None);
        }
        let saved = std::mem::replace(&mut self.no_lambda, false);
        let body = if self.at("{") {
            self.block()
        } else {
            self.expression()
        };
        self.no_lambda = saved;
        let body = body?;
        Ok(Some(self.node(
            NodeKind::LambdaExpr,
            Span::new(start, self.prev_end()),
            vec![body],
        )))
    }

    fn ternary(&mut self) -> PResult<usize> {
        let cond = self.binary(1)?;
        if !self.at("?") {
            return Ok(cond);
        }
        self.bump();
        let saved = std::mem::replace(&mut self.no_lambda, false);
        let then = self.expression();
        self.no_lambda = saved;
        let then = then?;
        self.expect(":")?;
        let otherwise = match self.try_lambda()? {
            Some(l) => l,
            None => self.ternary()?,
        };
        let span = self.span_of(cond).to(self.span_of(otherwise));
        Ok(self.node(NodeKind::ConditionalExpr, span, vec![cond, then, otherwise]))
    }

    /// The binary operator at the cursor: (text, precedence, token count).
    fn peek_binop(&self) -> Option<(&'static str, u8, usize)> {
        let t = self.tok(0);
        if t.kind == TokenKind::Keyword && self.text_of(t) == "instanceof" {
            return Some(("instanceof", 7, 1));
        }
        if t.kind != TokenKind::Punct {
            return None;
        }
        let op: &'static str = match self.text_of(t) {
            "||" => "||",
            "&&" => "&&",
            "|" => "|",
            "^" => "^",
            "&" => "&",
            "==" => "==",
            "!=" => "!=",
            "<" => "<",
            "<=" => "<=",
            ">=" => ">=",
            "<<" => "<<",
            "+" => "+",
            "-" => "-",
            "*" => "*",
            "/" => "/",
            "%" => "%",
            ">" => {
                let glued = |a: Token, b: Token| {
                    b.kind == TokenKind::Punct
                        && self.text_of(b) == ">"
                        && a.span.end == b.span.start
                };
                let (t1, t2) = (self.tok(1), self.tok(2));
                if glued(t, t1) && glued(t1, t2) {
                    return Some((">>>", 8, 3));
                }
                if glued(t, t1) {
                    return Some((">>", 8, 2));
                }
                ">"
            }
            _ => return None,
        };
        let prec = match op {
            "||" => 1,
            "&&" => 2,
            "|" => 3,
            "^" => 4,
            "&" => 5,
            "==" | "!=" => 6,
            "<" | ">" | "<=" | ">=" => 7,
            "<<" => 8,
            "+" | "-" => 9,
            _ => 10,
        };
        Some((op, prec, 1))
    }

    fn binary(&mut self, min_prec: u8) -> PResult<usize> {
        let mut lhs = self.unary()?;
        while let Some((op, prec, count)) = self.peek_binop() {
            if prec < min_prec {
                break;
            }
            if op == "instanceof" {
                self.bump();
                if self.at("final") {
                    self.bump();
                }
                self.parse_type()?;
                if self.at("(") {
                    self.skip_balanced("(", ")")?;
                }
                if self.at_kind(TokenKind::Ident) {
                    self.bump();
                }
                let span = Span::new(self.span_of(lhs).start, self.prev_end());
                lhs = self.node(NodeKind::InstanceOfExpr, span, vec![lhs]);
                continue;
            }
            let first = self.tok(0).span.start;
            self.pos += count;
            let op_span = Span::new(first, self.prev_end());
            let rhs = self.binary(prec + 1)?;
            let span = self.span_of(lhs).to(self.span_of(rhs));
            lhs = self.op_node(
                NodeKind::BinaryExpr,
                span,
                (op.to_string(), op_span),
                vec![lhs, rhs],
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<usize> {
        let t = self.tok(0);
        if t.kind == TokenKind::Punct {
            let word = self.text_of(t);
            if matches!(word, "++" | "--" | "+" | "-" | "!" | "~") {
                self.bump();
                let operand = self.unary()?;
                let span = t.span.to(self.span_of(operand));
                return Ok(self.op_node(
                    NodeKind::UnaryExpr,
                    span,
                    (word.to_string(), t.span),
                    vec![operand],
                ));
            }
            if word == "(" {
                if let Some(cast) = self.attempt(|p| p.cast()) {
                    return Ok(cast);
                }
            }
        }
        let mut e = self.primary()?;
        while self.at("++") || self.at("--") {
            let op = self.bump();
            let span = self.span_of(e).to(op.span);
            let text = self.text_of(op).to_string();
            e = self.op_node(NodeKind::PostfixExpr, span, (text, op.span), vec![e]);
        }
        Ok(e)
    }

    fn cast(&mut self) -> PResult<usize> {
        let start = self.expect("(")?.span.start;
        let ty_start = self.tok(0);
        let type_span = self.parse_type()?;
        while self.eat("&") {
            self.parse_type()?;
        }
        self.expect(")")?;
        let primitive = ty_start.kind == TokenKind::Keyword
            && is_primitive(self.text_of(ty_start))
            && self.src[type_span.start..type_span.end]
                .iter()
                .all(|b| *b != b'[');
        let operand = if primitive {
            self.unary()?
        } else {
            let t = self.tok(0);
            let word = self.text_of(t);
            let starts_operand = match t.kind {
                TokenKind::Ident
                | TokenKind::IntLit
                | TokenKind::FloatLit
                | TokenKind::CharLit
                | TokenKind::StringLit
                | TokenKind::TextBlock => true,
                TokenKind::Keyword => {
                    matches!(
                        word,
                        "this" | "super" | "new" | "true" | "false" | "null" | "switch"
                    ) || is_primitive(word)
                        || word == "void"
                }
                TokenKind::Punct => matches!(word, "(" | "!" | "~"),
                TokenKind::Eof => false,
            };
            if !starts_operand {
                return self.fail("not a cast");
            }
            match self.try_lambda()? {
                Some(l) => l,
                None => self.unary()?,
            }
        };
        let span = Span::new(start, self.span_of(operand).end);
        let id = self.node(NodeKind::CastExpr, span, vec![operand]);
        self.arena[id].type_span = Some(type_span);
        Ok(id)
    }

    fn arguments(&mut self) -> PResult<Vec<usize>> {
        self.expect("(")?;
        let saved = std::mem::replace(&mut self.no_lambda, false);
        let mut args = Vec::new();
        let result = (|| {
            if !self.at(")") {
                args = self.expression_list()?;
            }
            self.expect(")")?;
            Ok(())
        })();
        self.no_lambda = saved;
        result.map(|_| args)
    }

    fn literal_kind(kind: TokenKind, word: &str) -> Option<LiteralKind> {
        Some(match kind {
            TokenKind::IntLit => LiteralKind::Int,
            TokenKind::FloatLit => LiteralKind::Float,
            TokenKind::CharLit => LiteralKind::Char,
            TokenKind::StringLit => LiteralKind::String,
            TokenKind::TextBlock => LiteralKind::TextBlock,
            TokenKind::Keyword if word == "true" || word == "false" => LiteralKind::Bool,
            TokenKind::Keyword if word == "null" => LiteralKind::Null,
            _ => return None,
        })
    }

    fn primary(&mut self) -> PResult<usize> {
        let t = self.tok(0);
        let word = self.text_of(t);
        let start = t.span.start;
        let base = if let Some(lit) = Self::literal_kind(t.kind, word) {
            self.bump();
            self.node(NodeKind::Literal(lit), t.span, vec![])
        } else if t.kind == TokenKind::Keyword {
            match word {
                "this" | "super" => {
                    self.bump();
                    let kind = if word == "this" {
                        NodeKind::This
                    } else {
                        NodeKind::Super
                    };
                    let base = self.node(kind, t.span, vec![]);
                    if self.at("(") {
                        // Explicit constructor invocation.
                        let mut children = vec![base];
                        children.extend(self.arguments()?);
                        self.node(
                            NodeKind::MethodCall,
                            Span::new(start, self.prev_end()),
                            children,
                        )
                    } else {
                        base
                    }
                }
                "new" => self.creator(None)?,
                "switch" => {
                    let children = self.switch_body()?;
                    self.node(
                        NodeKind::SwitchExpr,
                        Span::new(start, self.prev_end()),
                        children,
                    )
                }
                w if is_primitive(w) || w == "void" => {
                    self.parse_type()?;
                    if self.eat("::") {
                        self.expect("new")?;
                        self.node(
                            NodeKind::MethodRef,
                            Span::new(start, self.prev_end()),
                            vec![],
                        )
                    } else {
                        self.expect(".")?;
                        self.expect("class")?;
                        self.node(
                            NodeKind::ClassLiteral,
                            Span::new(start, self.prev_end()),
                            vec![],
                        )
                    }
                }
                _ => return self.fail(format!("unexpected `{word}` in expression")),
            }
        } else if t.kind == TokenKind::Ident {
            if let Some(id) = self.type_prefixed_primary() {
                id
            } else {
                self.bump();
                let name = self.node(NodeKind::Name, t.span, vec![]);
                if self.at("(") {
                    let mut children = vec![name];
                    children.extend(self.arguments()?);
                    self.node(
                        NodeKind::MethodCall,
                        Span::new(start, self.prev_end()),
                        children,
                    )
                } else {
                    name
                }
            }
        } else if t.kind == TokenKind::Punct && word == "(" {
            self.bump();
            let saved = std::mem::replace(&mut self.no_lambda, false);
            let inner = self.expression();
            self.no_lambda = saved;
            let inner = inner?;
            self.expect(")")?;
            self.node(
                NodeKind::ParenExpr,
                Span::new(start, self.prev_end()),
                vec![inner],
            )
        } else if t.kind == TokenKind::Punct && word == "@" {
            // Type annotation on a method reference or class literal.
            self.annotation()?;
            return self.primary();
        } else {
            return self.fail(format!("unexpected `{word}` in expression"));
        };
        self.selectors(base)
    }

    /// `Type[].class`, `Type[]::new`, `Generic<T>::method`.
    fn type_prefixed_primary(&mut self) -> Option<usize> {
        let generic = self.at_ahead(1, "<");
        let array = self.at_ahead(1, "[") && self.at_ahead(2, "]");
        let qualified_array = self.at_ahead(1, ".");
        if !(generic || array || qualified_array) {
            return None;
        }
        let start = self.start();
        self.attempt(|p| {
            let ty = p.parse_type()?;
            let has_extras = p.src[ty.start..ty.end]
                .iter()
                .any(|b| *b == b'<' || *b == b'[');
            if !has_extras {
                return p.fail("plain name");
            }
            if p.eat("::") {
                if p.at("<") {
                    p.type_args()?;
                }
                if !p.eat("new") {
                    p.expect_ident()?;
                }
                Ok(p.node(NodeKind::MethodRef, Span::new(start, p.prev_end()), vec![]))
            } else if p.at(".") && p.at_ahead(1, "class") {
                p.pos += 2;
                Ok(p.node(
                    NodeKind::ClassLiteral,
                    Span::new(start, p.prev_end()),
                    vec![],
                ))
            } else {
                p.fail("not a type-prefixed expression")
            }
        })
    }

    fn creator(&mut self, outer: Option<usize>) -> PResult<usize> {
        let new_tok = self.expect("new")?;
        let start = outer.map_or(new_tok.span.start, |o| self.span_of(o).start);
        if self.at("<") {
            self.type_args()?;
        }
        while self.at("@") {
            self.annotation()?;
        }
        // Element/class type without dims.
        let ty_start = self.start();
        if self.at_kind(TokenKind::Keyword) && is_primitive(self.text(0)) {
            self.bump();
        } else {
            self.expect_ident()?;
            if self.at("<") {
                self.type_args()?;
            }
            while self.at(".") {
                self.bump();
                while self.at("@") {
                    self.annotation()?;
                }
                self.expect_ident()?;
                if self.at("<") {
                    self.type_args()?;
                }
            }
        }
        let type_span = Span::new(ty_start, self.prev_end());
        let mut children: Vec<usize> = outer.into_iter().collect();
        let kind = if self.at("[") || self.at("@") {
            while self.at("[") || self.at("@") {
                if self.at("@") {
                    self.annotation()?;
                    continue;
                }
                self.bump();
                if self.eat("]") {
                    continue;
                }
                let saved = std::mem::replace(&mut self.no_lambda, false);
                let dim = self.expression();
                self.no_lambda = saved;
                children.push(dim?);
                self.expect("]")?;
            }
            if self.at("{") {
                children.push(self.array_init()?);
            }
            NodeKind::NewArray
        } else {
            children.extend(self.arguments()?);
            if self.at("{") {
                children.extend(self.class_body(false)?);
            }
            NodeKind::NewObject
        };
        let id = self.node(kind, Span::new(start, self.prev_end()), children);
        self.arena[id].type_span = Some(type_span);
        Ok(id)
    }

    fn selectors(&mut self, mut e: usize) -> PResult<usize> {
        loop {
            let start = self.span_of(e).start;
            if self.at(".") {
                self.bump();
                if self.at("new") {
                    e = self.creator(Some(e))?;
                    continue;
                }
                if self.at("<") {
                    self.type_args()?;
                }
                if self.eat("class") {
                    e = self.node(
                        NodeKind::ClassLiteral,
                        Span::new(start, self.prev_end()),
                        vec![e],
                    );
                    continue;
                }
                if self.eat("this") {
                    e = self.node(NodeKind::This, Span::new(start, self.prev_end()), vec![e]);
                    continue;
                }
                if self.eat("super") {
                    e = self.node(NodeKind::Super, Span::new(start, self.prev_end()), vec![e]);
                    continue;
                }
                self.expect_ident()?;
                let access = Span::new(start, self.prev_end());
                if self.at("(") {
                    let mut children = vec![e];
                    children.extend(self.arguments()?);
                    e = self.node(
                        NodeKind::MethodCall,
                        Span::new(start, self.prev_end()),
                        children,
                    );
                } else {
                    e = self.node(NodeKind::FieldAccess, access, vec![e]);
                }
            } else if self.at("[") {
                self.bump();
                let saved = std::mem::replace(&mut self.no_lambda, false);
                let index = self.expression();
                self.no_lambda = saved;
                let index = index?;
                self.expect("]")?;
                e = self.node(
                    NodeKind::ArrayAccess,
                    Span::new(start, self.prev_end()),
                    vec![e, index],
                );
            } else if self.at("::") {
                self.bump();
                if self.at("<") {
                    self.type_args()?;
                }
                if !self.eat("new") {
                    self.expect_ident()?;
                }
                e = self.node(
                    NodeKind::MethodRef,
                    Span::new(start, self.prev_end()),
                    vec![e],
                );
            } else {
                return Ok(e);
            }
        }
    }
}
