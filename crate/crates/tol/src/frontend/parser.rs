use crate::frontend::ast::*;
use crate::frontend::lexer::unescape;
use crate::frontend::token::{Token, TokenKind};
use crate::span::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub expected: Vec<&'static str>,
    pub span: Span,
}

impl ParseError {
    pub fn render(&self) -> String {
        if self.expected.is_empty() {
            self.message.clone()
        } else {
            format!("{}, expected {}", self.message, self.expected.join(" or "))
        }
    }
}

/// Recursive-descent parser over the token stream of one file.
/// The first syntax error aborts; there is no recovery.
pub fn parse(tokens: &[Token]) -> Result<Unit, ParseError> {
    let mut p = Parser { tokens, pos: 0 };
    let mut packages = Vec::new();
    while !p.at(TokenKind::Eof) {
        packages.push(p.package()?);
    }
    Ok(Unit { packages })
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_kind(&self, ahead: usize) -> TokenKind {
        self.tokens
            .get(self.pos + ahead)
            .map(|t| t.kind)
            .unwrap_or(TokenKind::Eof)
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek().kind == kind
    }

    fn bump(&mut self) -> &'t Token {
        let tok = &self.tokens[self.pos.min(self.tokens.len() - 1)];
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.at(kind) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<&'t Token, ParseError> {
        if self.at(kind) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[kind.describe()]))
        }
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        let tok = self.peek();
        let got = if tok.kind == TokenKind::Eof {
            "unexpected end of input".to_string()
        } else {
            format!("unexpected {}", describe_token(tok))
        };
        ParseError {
            message: got,
            expected: expected.to_vec(),
            span: tok.span,
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        let tok = self.expect(TokenKind::Ident)?;
        Ok(Ident {
            text: tok.lexeme.clone(),
            span: tok.span,
        })
    }

    fn package(&mut self) -> Result<PackageDecl, ParseError> {
        let kw = self.expect(TokenKind::Package)?;
        let name = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut tests = Vec::new();
        let mut classes = Vec::new();
        while !self.eat(TokenKind::RBrace) {
            match self.peek().kind {
                TokenKind::Test => {
                    let t = self.test_block()?;
                    if t.target.is_some() {
                        return Err(ParseError {
                            message: "package tests cannot name a target method".to_string(),
                            expected: vec![],
                            span: t.span,
                        });
                    }
                    tests.push(t);
                }
                TokenKind::Class => classes.push(self.class()?),
                _ => return Err(self.unexpected(&["'class'", "'test'", "'}'"])),
            }
        }
        Ok(PackageDecl {
            name,
            tests,
            classes,
            span: kw.span,
        })
    }

    fn class(&mut self) -> Result<ClassDecl, ParseError> {
        let kw = self.expect(TokenKind::Class)?;
        let name = self.ident()?;
        let mut parents = Vec::new();
        if self.eat(TokenKind::Extends) {
            parents.push(self.ident()?);
            while self.eat(TokenKind::Comma) {
                parents.push(self.ident()?);
            }
        }
        self.expect(TokenKind::LBrace)?;
        let mut members = Vec::new();
        while !self.eat(TokenKind::RBrace) {
            members.push(self.member(&name.text)?);
        }
        Ok(ClassDecl {
            name,
            parents,
            members,
            span: kw.span,
        })
    }

    fn member(&mut self, class_name: &str) -> Result<Member, ParseError> {
        match self.peek().kind {
            TokenKind::Test => {
                let t = self.test_block()?;
                if t.target.is_some() {
                    Ok(Member::PropertyTest(t))
                } else {
                    Ok(Member::ClassTest(t))
                }
            }
            TokenKind::Resolve => Ok(Member::Resolve(self.resolve_clause()?)),
            TokenKind::Public
            | TokenKind::Private
            | TokenKind::Ident
            | TokenKind::KwInt
            | TokenKind::KwBool
            | TokenKind::KwString
            | TokenKind::KwColor => self.field_method_or_ctor(class_name),
            _ => Err(self.unexpected(&[
                "'test'",
                "'resolve'",
                "'public'",
                "'private'",
                "member declaration",
            ])),
        }
    }

    fn visibility(&mut self) -> VisibilityDecl {
        if self.eat(TokenKind::Private) {
            VisibilityDecl::Private
        } else {
            self.eat(TokenKind::Public);
            VisibilityDecl::Public
        }
    }

    fn field_method_or_ctor(&mut self, class_name: &str) -> Result<Member, ParseError> {
        let start = self.peek().span;
        let visibility = self.visibility();
        // One token of lookahead past the leading name decides the form:
        //   T name ;|=      field
        //   T name (        method with return type
        //   name (          void method, or constructor when name is the class
        let is_type_start = matches!(
            self.peek().kind,
            TokenKind::Ident
                | TokenKind::KwInt
                | TokenKind::KwBool
                | TokenKind::KwString
                | TokenKind::KwColor
        );
        if !is_type_start {
            return Err(self.unexpected(&["type", "member name"]));
        }
        if self.peek_kind(1) == TokenKind::LParen {
            let name = self.ident_or_type_name()?;
            let params = self.params()?;
            let body = self.block()?;
            if name.text == class_name {
                return Ok(Member::Ctor(CtorDecl {
                    visibility,
                    name,
                    params,
                    body,
                    span: start,
                }));
            }
            return Ok(Member::Method(MethodDecl {
                visibility,
                ret: None,
                name,
                params,
                body,
                span: start,
            }));
        }
        let ty = self.type_expr()?;
        let name = self.ident()?;
        match self.peek().kind {
            TokenKind::LParen => {
                let params = self.params()?;
                let body = self.block()?;
                Ok(Member::Method(MethodDecl {
                    visibility,
                    ret: Some(ty),
                    name,
                    params,
                    body,
                    span: start,
                }))
            }
            TokenKind::Assign => {
                self.bump();
                let init = self.expr()?;
                self.expect(TokenKind::Semi)?;
                Ok(Member::Field(FieldDecl {
                    visibility,
                    ty,
                    name,
                    init: Some(init),
                    span: start,
                }))
            }
            TokenKind::Semi => {
                self.bump();
                Ok(Member::Field(FieldDecl {
                    visibility,
                    ty,
                    name,
                    init: None,
                    span: start,
                }))
            }
            _ => Err(self.unexpected(&["'('", "'='", "';'"])),
        }
    }

    /// A leading member name may lex as a type keyword only for class
    /// names; built-in type keywords are not valid member names.
    fn ident_or_type_name(&mut self) -> Result<Ident, ParseError> {
        if self.at(TokenKind::Ident) {
            self.ident()
        } else {
            Err(self.unexpected(&["identifier"]))
        }
    }

    fn test_block(&mut self) -> Result<TestBlock, ParseError> {
        let kw = self.expect(TokenKind::Test)?;
        let name = self.ident()?;
        let target = if self.eat(TokenKind::For) {
            Some(self.ident()?)
        } else {
            None
        };
        let body = self.block()?;
        Ok(TestBlock {
            name,
            target,
            body,
            span: kw.span,
        })
    }

    fn resolve_clause(&mut self) -> Result<ResolveClause, ParseError> {
        let kw = self.expect(TokenKind::Resolve)?;
        let subject = self.ident()?;
        let strategy = match self.peek().kind {
            TokenKind::Rename => {
                self.bump();
                let mut arms = vec![self.rename_arm()?];
                while self.eat(TokenKind::Comma) {
                    arms.push(self.rename_arm()?);
                }
                StrategyDecl::Rename(arms)
            }
            TokenKind::Select => {
                self.bump();
                StrategyDecl::Select(self.qualified_name()?)
            }
            TokenKind::Unify => {
                self.bump();
                StrategyDecl::Unify
            }
            _ => return Err(self.unexpected(&["'rename'", "'select'", "'unify'"])),
        };
        self.expect(TokenKind::Semi)?;
        Ok(ResolveClause {
            subject,
            strategy,
            span: kw.span,
        })
    }

    fn rename_arm(&mut self) -> Result<RenameArm, ParseError> {
        let from = self.qualified_name()?;
        self.expect(TokenKind::As)?;
        let to = self.ident()?;
        Ok(RenameArm { from, to })
    }

    fn qualified_name(&mut self) -> Result<QualifiedName, ParseError> {
        let owner = self.ident()?;
        self.expect(TokenKind::Dot)?;
        let name = self.ident()?;
        Ok(QualifiedName { owner, name })
    }

    fn params(&mut self) -> Result<Vec<Param>, ParseError> {
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if !self.at(TokenKind::RParen) {
            loop {
                let ty = self.type_expr()?;
                let name = self.ident()?;
                params.push(Param { ty, name });
                if !self.eat(TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        Ok(params)
    }

    fn type_expr(&mut self) -> Result<TypeExpr, ParseError> {
        let tok = self.peek();
        let span = tok.span;
        let kind = match tok.kind {
            TokenKind::KwInt => TypeExprKind::Int,
            TokenKind::KwBool => TypeExprKind::Bool,
            TokenKind::KwString => TypeExprKind::Str,
            TokenKind::KwColor => TypeExprKind::Color,
            TokenKind::Ident => TypeExprKind::Named(tok.lexeme.clone()),
            _ => return Err(self.unexpected(&["type"])),
        };
        self.bump();
        Ok(TypeExpr { kind, span })
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        let open = self.expect(TokenKind::LBrace)?;
        let mut stmts = Vec::new();
        while !self.eat(TokenKind::RBrace) {
            stmts.push(self.stmt()?);
        }
        Ok(Block {
            stmts,
            span: open.span,
        })
    }

    /// A single statement, or a braced block, normalized to a block.
    fn stmt_or_block(&mut self) -> Result<Block, ParseError> {
        if self.at(TokenKind::LBrace) {
            self.block()
        } else {
            let stmt = self.stmt()?;
            let span = stmt.span();
            Ok(Block {
                stmts: vec![stmt],
                span,
            })
        }
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let tok = self.peek();
        let span = tok.span;
        match tok.kind {
            TokenKind::If => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let then_branch = self.stmt_or_block()?;
                let else_branch = if self.eat(TokenKind::Else) {
                    Some(self.stmt_or_block()?)
                } else {
                    None
                };
                Ok(Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                    span,
                })
            }
            TokenKind::Return => {
                self.bump();
                let value = if self.at(TokenKind::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(TokenKind::Semi)?;
                Ok(Stmt::Return { value, span })
            }
            TokenKind::Assert => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Semi)?;
                Ok(Stmt::Assert { cond, span })
            }
            TokenKind::Print => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let value = self.expr()?;
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Semi)?;
                Ok(Stmt::Print { value, span })
            }
            // `T name = ...;` or `T name;` begins a declaration; everything
            // else that starts with a name is an expression or assignment.
            TokenKind::KwInt | TokenKind::KwBool | TokenKind::KwString => self.var_decl(),
            TokenKind::KwColor if self.peek_kind(1) == TokenKind::Ident => self.var_decl(),
            TokenKind::Ident
                if self.peek_kind(1) == TokenKind::Ident
                    && matches!(self.peek_kind(2), TokenKind::Assign | TokenKind::Semi) =>
            {
                self.var_decl()
            }
            _ => {
                let expr = self.expr()?;
                if self.eat(TokenKind::Assign) {
                    if !matches!(expr, Expr::Name(_) | Expr::Field { .. }) {
                        return Err(ParseError {
                            message: "assignment target must be a variable or field".to_string(),
                            expected: vec![],
                            span: expr.span(),
                        });
                    }
                    let value = self.expr()?;
                    self.expect(TokenKind::Semi)?;
                    Ok(Stmt::Assign {
                        target: expr,
                        value,
                        span,
                    })
                } else {
                    self.expect(TokenKind::Semi)?;
                    Ok(Stmt::Expr { expr, span })
                }
            }
        }
    }

    fn var_decl(&mut self) -> Result<Stmt, ParseError> {
        let span = self.peek().span;
        let ty = self.type_expr()?;
        let name = self.ident()?;
        let init = if self.eat(TokenKind::Assign) {
            Some(self.expr()?)
        } else {
            None
        };
        self.expect(TokenKind::Semi)?;
        Ok(Stmt::VarDecl {
            ty,
            name,
            init,
            span,
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.equality()
    }

    fn equality(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.instance_of()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::EqEq => BinOp::Eq,
                TokenKind::NotEq => BinOp::Ne,
                _ => break,
            };
            let span = self.bump().span;
            let rhs = self.instance_of()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn instance_of(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.additive()?;
        if self.at(TokenKind::Instanceof) {
            let span = self.bump().span;
            let class = self.ident()?;
            return Ok(Expr::InstanceOf {
                expr: Box::new(lhs),
                class,
                span,
            });
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.postfix()?;
        while self.at(TokenKind::Plus) {
            let span = self.bump().span;
            let rhs = self.postfix()?;
            lhs = Expr::Binary {
                op: BinOp::Add,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut expr = self.primary()?;
        while self.at(TokenKind::Dot) {
            self.bump();
            let name = self.ident()?;
            if self.at(TokenKind::LParen) {
                let span = name.span;
                let args = self.args()?;
                expr = Expr::Call {
                    recv: Some(Box::new(expr)),
                    name,
                    args,
                    span,
                };
            } else {
                expr = Expr::Field {
                    recv: Box::new(expr),
                    name,
                };
            }
        }
        Ok(expr)
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect(TokenKind::LParen)?;
        let mut args = Vec::new();
        if !self.at(TokenKind::RParen) {
            loop {
                args.push(self.expr()?);
                if !self.eat(TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        Ok(args)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::IntLit => {
                self.bump();
                Ok(Expr::Int(tok.lexeme.parse().unwrap(), tok.span))
            }
            TokenKind::StrLit => {
                self.bump();
                Ok(Expr::Str(unescape(&tok.lexeme), tok.span))
            }
            TokenKind::True => {
                self.bump();
                Ok(Expr::Bool(true, tok.span))
            }
            TokenKind::False => {
                self.bump();
                Ok(Expr::Bool(false, tok.span))
            }
            TokenKind::Null => {
                self.bump();
                Ok(Expr::Null(tok.span))
            }
            TokenKind::Current => {
                self.bump();
                Ok(Expr::Current(tok.span))
            }
            TokenKind::KwColor => {
                self.bump();
                self.expect(TokenKind::Dot)?;
                let member = self.ident()?;
                let color = match member.text.as_str() {
                    "Red" => ColorName::Red,
                    "Green" => ColorName::Green,
                    _ => {
                        return Err(ParseError {
                            message: format!("unknown color '{}'", member.text),
                            expected: vec!["'Red'", "'Green'"],
                            span: member.span,
                        })
                    }
                };
                Ok(Expr::Color(color, tok.span))
            }
            TokenKind::New => {
                self.bump();
                let class = self.ident()?;
                let args = self.args()?;
                Ok(Expr::New {
                    class,
                    args,
                    span: tok.span,
                })
            }
            TokenKind::Super => {
                self.bump();
                self.expect(TokenKind::Dot)?;
                let name = self.ident()?;
                let args = self.args()?;
                Ok(Expr::SuperCall {
                    name,
                    args,
                    span: tok.span,
                })
            }
            TokenKind::Ident if tok.lexeme == "classnameOf" => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(Expr::ClassnameOf {
                    expr: Box::new(inner),
                    span: tok.span,
                })
            }
            TokenKind::Ident => {
                self.bump();
                let name = Ident {
                    text: tok.lexeme.clone(),
                    span: tok.span,
                };
                if self.at(TokenKind::LParen) {
                    let args = self.args()?;
                    Ok(Expr::Call {
                        recv: None,
                        name,
                        args,
                        span: tok.span,
                    })
                } else {
                    Ok(Expr::Name(name))
                }
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            _ => Err(self.unexpected(&["expression"])),
        }
    }
}

fn describe_token(tok: &Token) -> String {
    match tok.kind {
        TokenKind::Ident | TokenKind::IntLit | TokenKind::StrLit => format!("'{}'", tok.lexeme),
        other => other.describe().to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::lexer::lex;
    use crate::frontend::pretty_unit;
    use crate::span::FileId;

    fn parse_src(src: &str) -> Result<Unit, ParseError> {
        parse(&lex(FileId(0), src).unwrap())
    }

    #[test]
    fn resolve_clause_forms() {
        let unit = parse_src(
            "package p { class D extends B, C { \
             resolve add unify; \
             resolve add select B.add; \
             resolve add rename B.add as addB, C.add as addC; } }",
        )
        .unwrap();
        let class = &unit.packages[0].classes[0];
        assert_eq!(class.parents.len(), 2);
        let strategies: Vec<&Member> = class.members.iter().collect();
        assert!(matches!(
            strategies[0],
            Member::Resolve(ResolveClause {
                strategy: StrategyDecl::Unify,
                ..
            })
        ));
        assert!(matches!(
            strategies[1],
            Member::Resolve(ResolveClause {
                strategy: StrategyDecl::Select(_),
                ..
            })
        ));
        match strategies[2] {
            Member::Resolve(ResolveClause {
                strategy: StrategyDecl::Rename(arms),
                ..
            }) => assert_eq!(arms.len(), 2),
            other => panic!("expected rename clause, got {other:?}"),
        }
    }

    #[test]
    fn test_block_missing_target() {
        let err = parse_src("package p { class A { test T for { } } }").unwrap_err();
        assert!(err.expected.contains(&"identifier"), "{err:?}");
    }

    #[test]
    fn property_vs_class_test() {
        let unit = parse_src(
            "package p { class A { test P for m { } test C { } public int m() { return 1; } } }",
        )
        .unwrap();
        let members = &unit.packages[0].classes[0].members;
        assert!(matches!(members[0], Member::PropertyTest(_)));
        assert!(matches!(members[1], Member::ClassTest(_)));
    }

    #[test]
    fn ctor_is_recognized_by_name() {
        let unit = parse_src(
            "package p { class Food { public Food(Color c) { } public setColor(Color c) { } } }",
        )
        .unwrap();
        let members = &unit.packages[0].classes[0].members;
        assert!(matches!(members[0], Member::Ctor(_)));
        assert!(matches!(
            members[1],
            Member::Method(MethodDecl { ret: None, .. })
        ));
    }

    #[test]
    fn field_with_initializer() {
        let unit =
            parse_src("package p { class A { private Food lastFoodEaten = null; } }").unwrap();
        match &unit.packages[0].classes[0].members[0] {
            Member::Field(f) => {
                assert_eq!(f.visibility, VisibilityDecl::Private);
                assert!(matches!(f.init, Some(Expr::Null(_))));
            }
            other => panic!("expected field, got {other:?}"),
        }
    }

    #[test]
    fn statement_disambiguation() {
        let unit = parse_src(
            "package p { class A { public f() { \
             Food last = Current.lastFoodEaten(); \
             last = null; \
             Current.lastFoodEaten = last; \
             lastFoodEaten(); } } }",
        )
        .unwrap();
        let body = match &unit.packages[0].classes[0].members[0] {
            Member::Method(m) => &m.body,
            other => panic!("expected method, got {other:?}"),
        };
        assert!(matches!(body.stmts[0], Stmt::VarDecl { .. }));
        assert!(matches!(body.stmts[1], Stmt::Assign { .. }));
        assert!(matches!(body.stmts[2], Stmt::Assign { .. }));
        assert!(matches!(body.stmts[3], Stmt::Expr { .. }));
    }

    #[test]
    fn precedence_groups_concat_before_equality() {
        let unit = parse_src(
            "package p { class A { public f() { assert(classnameOf(Current) + \".x\" == \"A.x\"); } } }",
        )
        .unwrap();
        let body = match &unit.packages[0].classes[0].members[0] {
            Member::Method(m) => &m.body,
            _ => unreachable!(),
        };
        match &body.stmts[0] {
            Stmt::Assert { cond, .. } => match cond {
                Expr::Binary {
                    op: BinOp::Eq, lhs, ..
                } => {
                    assert!(matches!(**lhs, Expr::Binary { op: BinOp::Add, .. }))
                }
                other => panic!("expected equality, got {other:?}"),
            },
            _ => unreachable!(),
        }
    }

    #[test]
    fn error_spans_point_into_input() {
        let err = parse_src("package p { class A extends { } }").unwrap_err();
        assert_eq!(err.span.line, 1);
        assert!(err.span.col > 1);
    }

    #[test]
    fn pretty_print_round_trip() {
        let src = "package zoo { \
            test Pkg { print(\"p\"); } \
            class Food { private Color color; public Food(Color c) { color = c; } \
              public bool isColor(Color c) { return color == c; } } \
            class Grass extends Food { public Grass() { setColor(Color.Green); } } \
            class Cow extends Food { \
              test T for isColor { assert(Current.isColor(Color.Green) != true); } \
              resolve isColor unify; \
              public bool isColor(Color c) { if (c == Color.Red) return false; else { return super.isColor(c); } } } }";
        let first = pretty_unit(&parse_src(src).unwrap());
        let second = pretty_unit(&parse_src(&first).unwrap());
        assert_eq!(first, second);
    }
}
