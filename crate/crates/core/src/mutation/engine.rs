use std::collections::BTreeSet;

use super::{replacement_for, Mutant, OperatorKind};
use crate::java::{
    is_primitive, splice, Edit, LiteralKind, Node, NodeKind, SourceFile, Span, SyntaxTree,
};

/// A mutation site before ids are assigned.
struct Candidate {
    operator: OperatorKind,
    edit: Edit,
    node_ids: Vec<usize>,
    /// Statement pair and line, when the edit does not sit inside a statement.
    display: Option<(String, String, usize)>,
}

/// Every first-order mutant of `file` under the enabled operators, ordered
/// by edit position then operator name, numbered from 1.
pub fn enumerate_mutants(
    tree: &SyntaxTree,
    file: &SourceFile,
    enabled: &BTreeSet<OperatorKind>,
) -> Vec<Mutant> {
    let mut candidates = Vec::new();
    if enabled.iter().any(|k| k.family() == super::Family::Classic) {
        candidates.extend(classic_candidates(tree, file));
    }
    if enabled
        .iter()
        .any(|k| k.family() == super::Family::NullType)
    {
        candidates.extend(null_candidates(tree, file));
    }
    candidates.retain(|c| enabled.contains(&c.operator));
    number(tree, file, candidates)
}

/// Mutants of the four null-type operators only.
pub fn enumerate_null_mutants(tree: &SyntaxTree, file: &SourceFile) -> Vec<Mutant> {
    number(tree, file, null_candidates(tree, file))
}

fn number(tree: &SyntaxTree, file: &SourceFile, mut candidates: Vec<Candidate>) -> Vec<Mutant> {
    candidates.sort_by(|a, b| {
        (
            a.edit.span.start,
            a.operator.name(),
            a.edit.span.end,
            &a.node_ids,
            &a.edit.replacement,
        )
            .cmp(&(
                b.edit.span.start,
                b.operator.name(),
                b.edit.span.end,
                &b.node_ids,
                &b.edit.replacement,
            ))
    });
    candidates
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let (before, after, line) = match c.display {
                Some(d) => d,
                None => describe(tree, file, c.node_ids[0], &c.edit),
            };
            Mutant {
                mutant_id: i as u32 + 1,
                operator: c.operator,
                edits: vec![c.edit],
                before,
                after,
                line,
                node_ids: c.node_ids,
                source_path: file.path().to_path_buf(),
            }
        })
        .collect()
}

/// Enclosing statement text before and after `edit`, and its line.
fn describe(
    tree: &SyntaxTree,
    file: &SourceFile,
    node_id: usize,
    edit: &Edit,
) -> (String, String, usize) {
    let stmt = tree
        .enclosing_statement(node_id)
        .expect("candidate node ids come from the tree");
    let text = file.slice(stmt.span);
    let local = Edit::new(
        Span::new(
            edit.span.start - stmt.span.start,
            edit.span.end - stmt.span.start,
        ),
        edit.replacement.clone(),
    );
    let after = splice(text, std::slice::from_ref(&local)).expect("edit lies inside its statement");
    (
        String::from_utf8_lossy(text).into_owned(),
        String::from_utf8_lossy(&after).into_owned(),
        stmt.line,
    )
}

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$' || b >= 0x80
}

fn is_op_byte(b: u8) -> bool {
    b"+-*/%&|^!~<>=?:".contains(&b)
}

fn glues(left: u8, right: u8) -> bool {
    (is_ident_byte(left) && is_ident_byte(right))
        || (is_op_byte(left) && is_op_byte(right))
        || (left == b'/' && right == b'*')
}

/// Builds an edit, padding the replacement with spaces where it would
/// otherwise fuse with a neighbouring token.
fn guarded_edit(content: &[u8], span: Span, replacement: &str) -> Edit {
    let left = span.start.checked_sub(1).map(|i| content[i]);
    let right = content.get(span.end).copied();
    let bytes = replacement.as_bytes();
    let mut out = String::with_capacity(replacement.len() + 2);
    match (bytes.first(), bytes.last()) {
        (Some(&first), Some(&last)) => {
            if left.is_some_and(|l| glues(l, first)) {
                out.push(' ');
            }
            out.push_str(replacement);
            if right.is_some_and(|r| glues(last, r)) {
                out.push(' ');
            }
        }
        _ => {
            if let (Some(l), Some(r)) = (left, right) {
                if glues(l, r) {
                    out.push(' ');
                }
            }
        }
    }
    Edit::new(span, out)
}

/// Syntactically a `String`: a string literal, or a `+` chain/parenthesis
/// around one.
fn is_stringish(tree: &SyntaxTree, node: &Node) -> bool {
    match node.kind {
        k if k.is_string_literal() => true,
        NodeKind::ParenExpr => tree.children(node.id).any(|c| is_stringish(tree, c)),
        NodeKind::BinaryExpr if node.operator_token.as_deref() == Some("+") => {
            tree.children(node.id).any(|c| is_stringish(tree, c))
        }
        _ => false,
    }
}

fn is_null_literal(node: &Node) -> bool {
    node.kind == NodeKind::Literal(LiteralKind::Null)
}

fn classic_candidates(tree: &SyntaxTree, file: &SourceFile) -> Vec<Candidate> {
    let content = file.content();
    let mut out = Vec::new();
    let mut push = |operator: OperatorKind, node: &Node, span: Span, replacement: &str| {
        out.push(Candidate {
            operator,
            edit: guarded_edit(content, span, replacement),
            node_ids: vec![node.id],
            display: None,
        });
    };
    for node in tree.iter() {
        let (Some(token), Some(op_span)) = (node.operator_token.as_deref(), node.operator_span)
        else {
            continue;
        };
        match node.kind {
            NodeKind::BinaryExpr => {
                let Some(kind) = OperatorKind::for_binary(token) else {
                    continue;
                };
                if kind == OperatorKind::AorB
                    && tree.children(node.id).any(|c| is_stringish(tree, c))
                {
                    continue;
                }
                if let Ok(rep) = replacement_for(kind, token) {
                    push(kind, node, op_span, &rep);
                }
            }
            NodeKind::UnaryExpr | NodeKind::PostfixExpr => {
                let kind = match token {
                    "++" | "--" => OperatorKind::AorS,
                    "+" | "-" if node.kind == NodeKind::UnaryExpr => OperatorKind::AorU,
                    "!" => OperatorKind::Cod,
                    _ => continue,
                };
                if kind == OperatorKind::AorU
                    && token == "-"
                    && negates_min_literal(tree, file, node)
                {
                    continue;
                }
                if kind == OperatorKind::Cod {
                    push(kind, node, op_span, "");
                } else if let Ok(rep) = replacement_for(kind, token) {
                    push(kind, node, op_span, &rep);
                }
            }
            NodeKind::AssignExpr => {
                if token == "+="
                    && tree
                        .children(node.id)
                        .nth(1)
                        .is_some_and(|rhs| is_stringish(tree, rhs))
                {
                    continue;
                }
                if let Ok(rep) = replacement_for(OperatorKind::Saor, token) {
                    push(OperatorKind::Saor, node, op_span, &rep);
                }
            }
            _ => {}
        }
    }
    out
}

/// `-2147483648` and `-9223372036854775808L` only exist negated.
fn negates_min_literal(tree: &SyntaxTree, file: &SourceFile, node: &Node) -> bool {
    tree.children(node.id).next().is_some_and(|operand| {
        operand.kind == NodeKind::Literal(LiteralKind::Int) && {
            let text = file.slice_str(operand.span).replace('_', "");
            let digits = text.trim_end_matches(['l', 'L']);
            digits == "2147483648" || digits == "9223372036854775808"
        }
    })
}

/// Reference type by syntax alone: anything but a bare primitive or `void`.
fn is_reference_type(file: &SourceFile, span: Span) -> bool {
    let text = file.slice_str(span);
    let text = text.trim();
    !(is_primitive(text) || text == "void")
}

fn null_candidates(tree: &SyntaxTree, file: &SourceFile) -> Vec<Candidate> {
    let content = file.content();
    let mut out = Vec::new();
    for node in tree.iter() {
        match node.kind {
            NodeKind::ReturnStmt => {
                let Some(expr) = tree.children(node.id).next() else {
                    continue;
                };
                if is_null_literal(expr) {
                    continue;
                }
                let returns_reference = tree.enclosing_callable(node.id).is_some_and(|m| {
                    m.kind == NodeKind::MethodDecl
                        && m.type_span.is_some_and(|t| is_reference_type(file, t))
                });
                if returns_reference {
                    out.push(Candidate {
                        operator: OperatorKind::NullifyReturnValue,
                        edit: guarded_edit(content, expr.span, "null"),
                        node_ids: vec![expr.id],
                        display: None,
                    });
                }
            }
            NodeKind::MethodDecl | NodeKind::ConstructorDecl => {
                out.extend(nullify_inputs(tree, file, node));
            }
            NodeKind::NewObject => {
                let Some(parent) = node.parent.map(|p| &tree.nodes[p]) else {
                    continue;
                };
                // `new T();` as a statement and `new T().m()` would not compile.
                let is_receiver = matches!(
                    parent.kind,
                    NodeKind::MethodCall
                        | NodeKind::FieldAccess
                        | NodeKind::ArrayAccess
                        | NodeKind::MethodRef
                ) && parent.children.first() == Some(&node.id);
                let is_outer =
                    parent.kind == NodeKind::NewObject && parent.children.first() == Some(&node.id);
                if parent.kind == NodeKind::ExprStmt || is_receiver || is_outer {
                    continue;
                }
                out.push(Candidate {
                    operator: OperatorKind::NullifyObjectInitialization,
                    edit: guarded_edit(content, node.span, "null"),
                    node_ids: vec![node.id],
                    display: None,
                });
            }
            NodeKind::BinaryExpr => {
                let (Some(token), Some(op_span)) =
                    (node.operator_token.as_deref(), node.operator_span)
                else {
                    continue;
                };
                if !matches!(token, "==" | "!=") || !tree.children(node.id).any(is_null_literal) {
                    continue;
                }
                if let Ok(rep) = replacement_for(OperatorKind::RemoveNullCheck, token) {
                    out.push(Candidate {
                        operator: OperatorKind::RemoveNullCheck,
                        edit: guarded_edit(content, op_span, &rep),
                        node_ids: vec![node.id],
                        display: None,
                    });
                }
            }
            _ => {}
        }
    }
    out
}

/// One `param = null;` insertion per reference-typed, non-final parameter,
/// placed at body entry (after an explicit `this(...)`/`super(...)` call).
fn nullify_inputs(tree: &SyntaxTree, file: &SourceFile, method: &Node) -> Vec<Candidate> {
    let Some(body) = tree.children(method.id).find(|c| c.kind == NodeKind::Block) else {
        return Vec::new();
    };
    let first_stmt = tree.children(body.id).next();
    let explicit_ctor_call = first_stmt.filter(|s| {
        method.kind == NodeKind::ConstructorDecl
            && s.kind == NodeKind::ExprStmt
            && tree.children(s.id).next().is_some_and(|call| {
                call.kind == NodeKind::MethodCall
                    && tree.children(call.id).next().is_some_and(|callee| {
                        matches!(callee.kind, NodeKind::This | NodeKind::Super)
                    })
            })
    });
    let insert_at = explicit_ctor_call.map_or(body.span.start + 1, |s| s.span.end);

    let mut out = Vec::new();
    for param in tree
        .children(method.id)
        .filter(|c| c.kind == NodeKind::Parameter)
    {
        let Some(type_span) = param.type_span else {
            continue;
        };
        if param.modifiers.iter().any(|m| m == "final") || !is_reference_type(file, type_span) {
            continue;
        }
        let name_text = file.slice_str(Span::new(type_span.end, param.span.end));
        let name = name_text
            .trim()
            .trim_end_matches(|c: char| c == '[' || c == ']' || c.is_whitespace());
        if name.is_empty() || name.contains("this") {
            continue;
        }
        let statement = format!("{name} = null;");
        out.push(Candidate {
            operator: OperatorKind::NullifyInputVariable,
            edit: Edit::new(Span::empty(insert_at), format!(" {statement}")),
            node_ids: vec![param.id],
            display: Some((String::new(), statement, file.line_of(insert_at))),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::java::parse_source;

    fn mutants(src: &str, ops: &[OperatorKind]) -> (SourceFile, Vec<Mutant>) {
        let file = SourceFile::new("T.java", src);
        let tree = parse_source(&file).unwrap();
        let enabled = ops.iter().copied().collect();
        let ms = enumerate_mutants(&tree, &file, &enabled);
        (file, ms)
    }

    fn mutated(file: &SourceFile, m: &Mutant) -> String {
        String::from_utf8(splice(file.content(), &m.edits).unwrap()).unwrap()
    }

    fn wrap(body: &str) -> String {
        format!("class T {{\n  Object f(int a, int b) {{\n    {body}\n  }}\n}}\n")
    }

    #[test]
    fn aor_b_on_addition() {
        let (file, ms) = mutants(&wrap("int c = a + b;"), &[OperatorKind::AorB]);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].before, "int c = a + b;");
        assert_eq!(ms[0].after, "int c = a - b;");
        assert_eq!(ms[0].line, 3);
        assert!(mutated(&file, &ms[0]).contains("int c = a - b;"));
    }

    #[test]
    fn aor_b_skips_string_operands() {
        let (_, ms) = mutants(
            &wrap("String s = \"s\" + name; t = (\"a\" + x) + y; u = x + \"\"\"\n b\"\"\";"),
            &[OperatorKind::AorB],
        );
        assert!(ms.is_empty(), "{ms:?}");
    }

    #[test]
    fn interfaces_yield_nothing() {
        let (_, ms) = mutants("interface I { void f(); }", &OperatorKind::ALL);
        assert!(ms.is_empty());
    }

    #[test]
    fn ror_negates() {
        let (_, ms) = mutants(&wrap("boolean c = a >= b;"), &[OperatorKind::Ror]);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].after, "boolean c = a < b;");
    }

    #[test]
    fn cod_deletes_negation_without_fusing_tokens() {
        let (_, ms) = mutants(&wrap("if (!ok) return!done;"), &[OperatorKind::Cod]);
        let afters: Vec<_> = ms.iter().map(|m| m.after.as_str()).collect();
        assert_eq!(afters, ["if (ok) return!done;", "return done;"]);
    }

    #[test]
    fn aor_u_pads_to_avoid_increment() {
        let (file, ms) = mutants(&wrap("int c = a -+b;"), &[OperatorKind::AorU]);
        assert_eq!(ms.len(), 1);
        assert!(mutated(&file, &ms[0]).contains("int c = a - -b;"));
    }

    #[test]
    fn aor_u_keeps_min_value_literals() {
        let (_, ms) = mutants(
            &wrap("int c = -2147483648; long d = -9223372036854775808L; int e = -1;"),
            &[OperatorKind::AorU],
        );
        assert_eq!(ms.len(), 1);
    }

    #[test]
    fn ids_follow_position_then_operator() {
        let (_, ms) = mutants(
            &wrap("if (x != null && a > b) return a * b;"),
            &OperatorKind::ALL,
        );
        let listing: Vec<_> = ms
            .iter()
            .map(|m| (m.mutant_id, m.operator.name()))
            .collect();
        assert_eq!(
            listing,
            [
                (1, "ROR"),
                (2, "RemoveNullCheck"),
                (3, "COR"),
                (4, "ROR"),
                (5, "NullifyReturnValue"),
                (6, "AOR-B"),
            ]
        );
    }

    #[test]
    fn nullify_return_value_requires_reference_type() {
        let src = "class T {\n  List f() { return makeList(); }\n  int g() { return 1; }\n  \
                   void h() { return; }\n  String n() { return null; }\n  \
                   Runnable r() { return () -> { return; }; }\n}\n";
        let (file, ms) = mutants(src, &[OperatorKind::NullifyReturnValue]);
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[0].before, "return makeList();");
        assert_eq!(ms[0].after, "return null;");
        assert!(mutated(&file, &ms[1]).contains("Runnable r() { return null; }"));
    }

    #[test]
    fn nullify_input_variable_inserts_at_body_entry() {
        let src = "class T {\n  T(String s, int n) { this(s, n, 0); }\n  \
                   void f(int x, final Object o, List<String> xs, String... rest) { use(xs); }\n}\n";
        let (file, ms) = mutants(src, &[OperatorKind::NullifyInputVariable]);
        let afters: Vec<_> = ms.iter().map(|m| m.after.as_str()).collect();
        assert_eq!(afters, ["s = null;", "xs = null;", "rest = null;"]);
        assert!(mutated(&file, &ms[0]).contains("{ this(s, n, 0); s = null; }"));
        assert!(mutated(&file, &ms[1]).contains("{ xs = null; use(xs); }"));
        assert!(ms.iter().all(|m| m.before.is_empty()));
    }

    #[test]
    fn primitive_parameters_are_not_nullified() {
        let (_, ms) = mutants(
            "class T { int f(int x) { return x; } }",
            &[OperatorKind::NullifyInputVariable],
        );
        assert!(ms.is_empty());
    }

    #[test]
    fn nullify_object_initialization_sites() {
        let src = wrap("Object o = new Object(); new Foo(); new Bar().go(); throw new E(\"x\");");
        let (_, ms) = mutants(&src, &[OperatorKind::NullifyObjectInitialization]);
        let afters: Vec<_> = ms.iter().map(|m| m.after.as_str()).collect();
        assert_eq!(afters, ["Object o = null;", "throw null;"]);
    }

    #[test]
    fn remove_null_check_flips_comparison() {
        let (_, ms) = mutants(
            &wrap("if (s != null) { use(s); } if (null == t) {}"),
            &[OperatorKind::RemoveNullCheck],
        );
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[0].after, "if (s == null) { use(s); }");
        assert_eq!(ms[1].after, "if (null != t) {}");
    }

    #[test]
    fn saor_and_shift_and_logical() {
        let (_, ms) = mutants(
            &wrap("a *= b; a %= 2; a ^= 1; a >>>= 1; int c = a >> b | a & b ^ 1; c = a >>> 2;"),
            &OperatorKind::ALL,
        );
        let pairs: Vec<_> = ms
            .iter()
            .map(|m| (m.operator.name(), m.after.clone()))
            .collect();
        assert!(pairs.contains(&("SAOR", "a /= b;".into())));
        assert!(pairs.contains(&("SAOR", "a /= 2;".into())));
        assert!(pairs.contains(&("SAOR", "a &= 1;".into())));
        assert!(!pairs.iter().any(|(_, a)| a.contains(">>=")));
        assert!(pairs.contains(&("SOR", "int c = a << b | a & b ^ 1;".into())));
        assert!(pairs.contains(&("LOR", "int c = a >> b & a & b ^ 1;".into())));
        assert!(pairs.contains(&("LOR", "int c = a >> b | a | b ^ 1;".into())));
        assert!(pairs.contains(&("LOR", "int c = a >> b | a & b & 1;".into())));
        assert!(pairs.contains(&("SOR", "c = a >> 2;".into())));
    }

    #[test]
    fn aor_s_prefix_and_postfix() {
        let (_, ms) = mutants(&wrap("++a; b--;"), &[OperatorKind::AorS]);
        let afters: Vec<_> = ms.iter().map(|m| m.after.as_str()).collect();
        assert_eq!(afters, ["--a;", "b++;"]);
    }

    #[test]
    fn null_only_enumeration() {
        let file = SourceFile::new(
            "T.java",
            wrap("if (a != null) return new X(); return a + b;"),
        );
        let tree = parse_source(&file).unwrap();
        let ms = enumerate_null_mutants(&tree, &file);
        assert!(ms
            .iter()
            .all(|m| m.operator.family() == crate::mutation::Family::NullType));
        assert_eq!(ms.len(), 4);
    }
}
