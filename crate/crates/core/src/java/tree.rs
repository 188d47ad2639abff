use serde::{Deserialize, Serialize};

use super::{SourceFile, Span};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiteralKind {
    Int,
    Float,
    Char,
    String,
    TextBlock,
    Bool,
    Null,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    CompilationUnit,
    PackageDecl,
    ImportDecl,
    ClassDecl,
    InterfaceDecl,
    EnumDecl,
    RecordDecl,
    AnnotationTypeDecl,
    EnumConstant,
    FieldDecl,
    MethodDecl,
    ConstructorDecl,
    Parameter,
    Initializer,

    Block,
    LocalVarDecl,
    LocalTypeDecl,
    ExprStmt,
    IfStmt,
    WhileStmt,
    DoStmt,
    ForStmt,
    ForEachStmt,
    SwitchStmt,
    SwitchCase,
    ReturnStmt,
    ThrowStmt,
    BreakStmt,
    ContinueStmt,
    YieldStmt,
    TryStmt,
    CatchClause,
    SyncStmt,
    LabeledStmt,
    AssertStmt,
    EmptyStmt,

    BinaryExpr,
    UnaryExpr,
    PostfixExpr,
    AssignExpr,
    ConditionalExpr,
    InstanceOfExpr,
    CastExpr,
    LambdaExpr,
    MethodRef,
    Literal(LiteralKind),
    Name,
    FieldAccess,
    MethodCall,
    ArrayAccess,
    NewObject,
    NewArray,
    ArrayInit,
    ParenExpr,
    This,
    Super,
    ClassLiteral,
    SwitchExpr,
}

impl NodeKind {
    pub fn is_statement(self) -> bool {
        use NodeKind::*;
        matches!(
            self,
            LocalVarDecl
                | LocalTypeDecl
                | ExprStmt
                | IfStmt
                | WhileStmt
                | DoStmt
                | ForStmt
                | ForEachStmt
                | SwitchStmt
                | ReturnStmt
                | ThrowStmt
                | BreakStmt
                | ContinueStmt
                | YieldStmt
                | TryStmt
                | SyncStmt
                | LabeledStmt
                | AssertStmt
                | EmptyStmt
                | Block
        )
    }

    pub fn is_type_decl(self) -> bool {
        use NodeKind::*;
        matches!(
            self,
            ClassDecl | InterfaceDecl | EnumDecl | RecordDecl | AnnotationTypeDecl
        )
    }

    pub fn is_string_literal(self) -> bool {
        matches!(
            self,
            NodeKind::Literal(LiteralKind::String | LiteralKind::TextBlock)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub kind: NodeKind,
    pub span: Span,
    /// 1-based line of `span.start`.
    pub line: usize,
    /// Operator text for operator expressions; shifts are reported glued (`>>`).
    pub operator_token: Option<String>,
    pub operator_span: Option<Span>,
    /// Declared type of parameters, fields and locals; return type of methods.
    pub type_span: Option<Span>,
    /// Keyword modifiers of declarations (`final`, `static`, ...).
    pub modifiers: Vec<String>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Parse tree of one compilation unit. Node ids are pre-order indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxTree {
    pub nodes: Vec<Node>,
    pub root: usize,
}

impl SyntaxTree {
    pub fn node(&self, id: usize) -> Result<&Node> {
        self.nodes.get(id).ok_or(Error::UnknownNode(id))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter()
    }

    pub fn children(&self, id: usize) -> impl Iterator<Item = &Node> {
        self.nodes[id].children.iter().map(move |c| &self.nodes[*c])
    }

    /// Ancestors of `id`, nearest first, not including `id` itself.
    pub fn ancestors(&self, id: usize) -> impl Iterator<Item = &Node> {
        std::iter::successors(self.nodes[id].parent, move |p| self.nodes[*p].parent)
            .map(move |p| &self.nodes[p])
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    /// Smallest statement containing `id` (itself when it is one).
    pub fn enclosing_statement(&self, id: usize) -> Result<&Node> {
        let node = self.node(id)?;
        if node.kind.is_statement() || node.kind == NodeKind::FieldDecl {
            return Ok(node);
        }
        Ok(self
            .ancestors(id)
            .find(|n| n.kind.is_statement() || n.kind == NodeKind::FieldDecl)
            .unwrap_or(node))
    }

    /// The innermost method, constructor or lambda around `id`.
    pub fn enclosing_callable(&self, id: usize) -> Option<&Node> {
        self.ancestors(id).find(|n| {
            matches!(
                n.kind,
                NodeKind::MethodDecl | NodeKind::ConstructorDecl | NodeKind::LambdaExpr
            )
        })
    }
}

/// Source text and line of the smallest statement enclosing `node_id`.
pub fn statement_text(
    tree: &SyntaxTree,
    file: &SourceFile,
    node_id: usize,
) -> Result<(String, usize)> {
    let stmt = tree.enclosing_statement(node_id)?;
    Ok((file.slice_str(stmt.span).into_owned(), stmt.line))
}
