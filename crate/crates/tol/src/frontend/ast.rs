//! Syntax tree for TOL compilation units.
//!
//! Every node carries the span of its introducing token so later stages
//! can point diagnostics back at the source.

use crate::span::Span;
use std::fmt::Write;

#[derive(Clone, Debug)]
pub struct Ident {
    pub text: String,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Unit {
    pub packages: Vec<PackageDecl>,
}

#[derive(Clone, Debug)]
pub struct PackageDecl {
    pub name: Ident,
    pub tests: Vec<TestBlock>,
    pub classes: Vec<ClassDecl>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct ClassDecl {
    pub name: Ident,
    pub parents: Vec<Ident>,
    pub members: Vec<Member>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum Member {
    Field(FieldDecl),
    Method(MethodDecl),
    Ctor(CtorDecl),
    PropertyTest(TestBlock),
    ClassTest(TestBlock),
    Resolve(ResolveClause),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VisibilityDecl {
    Public,
    Private,
}

#[derive(Clone, Debug)]
pub struct FieldDecl {
    pub visibility: VisibilityDecl,
    pub ty: TypeExpr,
    pub name: Ident,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct MethodDecl {
    pub visibility: VisibilityDecl,
    pub ret: Option<TypeExpr>,
    pub name: Ident,
    pub params: Vec<Param>,
    pub body: Block,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct CtorDecl {
    pub visibility: VisibilityDecl,
    pub name: Ident,
    pub params: Vec<Param>,
    pub body: Block,
    pub span: Span,
}

/// `test Name for target { ... }` when `target` is present, otherwise a
/// class-level (or package-level) test block.
#[derive(Clone, Debug)]
pub struct TestBlock {
    pub name: Ident,
    pub target: Option<Ident>,
    pub body: Block,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct ResolveClause {
    pub subject: Ident,
    pub strategy: StrategyDecl,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum StrategyDecl {
    Rename(Vec<RenameArm>),
    Select(QualifiedName),
    Unify,
}

#[derive(Clone, Debug)]
pub struct RenameArm {
    pub from: QualifiedName,
    pub to: Ident,
}

/// `Owner.member`, naming one parent's version of a clashing entity.
#[derive(Clone, Debug)]
pub struct QualifiedName {
    pub owner: Ident,
    pub name: Ident,
}

#[derive(Clone, Debug)]
pub struct Param {
    pub ty: TypeExpr,
    pub name: Ident,
}

#[derive(Clone, Debug)]
pub struct TypeExpr {
    pub kind: TypeExprKind,
    pub span: Span,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TypeExprKind {
    Int,
    Bool,
    Str,
    Color,
    Named(String),
}

#[derive(Clone, Debug)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum Stmt {
    VarDecl {
        ty: TypeExpr,
        name: Ident,
        init: Option<Expr>,
        span: Span,
    },
    Assign {
        target: Expr,
        value: Expr,
        span: Span,
    },
    Expr {
        expr: Expr,
        span: Span,
    },
    If {
        cond: Expr,
        then_branch: Block,
        else_branch: Option<Block>,
        span: Span,
    },
    Return {
        value: Option<Expr>,
        span: Span,
    },
    Assert {
        cond: Expr,
        span: Span,
    },
    Print {
        value: Expr,
        span: Span,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ColorName {
    Red,
    Green,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BinOp {
    Eq,
    Ne,
    Add,
}

#[derive(Clone, Debug)]
pub enum Expr {
    Int(i64, Span),
    Str(String, Span),
    Bool(bool, Span),
    Null(Span),
    Color(ColorName, Span),
    Current(Span),
    /// Bare identifier: a local, a parameter, or an implicit field of
    /// the current object.
    Name(Ident),
    Field {
        recv: Box<Expr>,
        name: Ident,
    },
    Call {
        recv: Option<Box<Expr>>,
        name: Ident,
        args: Vec<Expr>,
        span: Span,
    },
    SuperCall {
        name: Ident,
        args: Vec<Expr>,
        span: Span,
    },
    New {
        class: Ident,
        args: Vec<Expr>,
        span: Span,
    },
    ClassnameOf {
        expr: Box<Expr>,
        span: Span,
    },
    InstanceOf {
        expr: Box<Expr>,
        class: Ident,
        span: Span,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        span: Span,
    },
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Int(_, s)
            | Expr::Str(_, s)
            | Expr::Bool(_, s)
            | Expr::Null(s)
            | Expr::Color(_, s)
            | Expr::Current(s) => *s,
            Expr::Name(id) => id.span,
            Expr::Field { name, .. } => name.span,
            Expr::Call { span, .. }
            | Expr::SuperCall { span, .. }
            | Expr::New { span, .. }
            | Expr::ClassnameOf { span, .. }
            | Expr::InstanceOf { span, .. }
            | Expr::Binary { span, .. } => *span,
        }
    }
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::VarDecl { span, .. }
            | Stmt::Assign { span, .. }
            | Stmt::Expr { span, .. }
            | Stmt::If { span, .. }
            | Stmt::Return { span, .. }
            | Stmt::Assert { span, .. }
            | Stmt::Print { span, .. } => *span,
        }
    }
}

// ---------------------------------------------------------------------------
// Pretty printer. Emits canonical source that re-parses to the same tree,
// which is what the round-trip tests check.

pub fn pretty_unit(unit: &Unit) -> String {
    let mut p = Printer::default();
    for pkg in &unit.packages {
        p.line(&format!("package {} {{", pkg.name.text));
        p.indent += 1;
        for t in &pkg.tests {
            p.test_block(t);
        }
        for c in &pkg.classes {
            p.class(c);
        }
        p.indent -= 1;
        p.line("}");
    }
    p.out
}

#[derive(Default)]
struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn line(&mut self, text: &str) {
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn class(&mut self, c: &ClassDecl) {
        let mut head = format!("class {}", c.name.text);
        if !c.parents.is_empty() {
            let names: Vec<&str> = c.parents.iter().map(|p| p.text.as_str()).collect();
            write!(head, " extends {}", names.join(", ")).unwrap();
        }
        head.push_str(" {");
        self.line(&head);
        self.indent += 1;
        for m in &c.members {
            match m {
                Member::Field(f) => {
                    let mut s = format!("{} {} {}", vis(f.visibility), ty(&f.ty), f.name.text);
                    if let Some(init) = &f.init {
                        write!(s, " = {}", expr(init)).unwrap();
                    }
                    s.push(';');
                    self.line(&s);
                }
                Member::Method(m) => {
                    let ret = m
                        .ret
                        .as_ref()
                        .map(|t| format!("{} ", ty(t)))
                        .unwrap_or_default();
                    let head = format!(
                        "{} {}{}({}) {{",
                        vis(m.visibility),
                        ret,
                        m.name.text,
                        params(&m.params)
                    );
                    self.line(&head);
                    self.block_body(&m.body);
                    self.line("}");
                }
                Member::Ctor(c) => {
                    let head = format!(
                        "{} {}({}) {{",
                        vis(c.visibility),
                        c.name.text,
                        params(&c.params)
                    );
                    self.line(&head);
                    self.block_body(&c.body);
                    self.line("}");
                }
                Member::PropertyTest(t) | Member::ClassTest(t) => self.test_block(t),
                Member::Resolve(r) => {
                    let s = match &r.strategy {
                        StrategyDecl::Rename(arms) => {
                            let rendered: Vec<String> = arms
                                .iter()
                                .map(|a| {
                                    format!(
                                        "{}.{} as {}",
                                        a.from.owner.text, a.from.name.text, a.to.text
                                    )
                                })
                                .collect();
                            format!("resolve {} rename {};", r.subject.text, rendered.join(", "))
                        }
                        StrategyDecl::Select(q) => format!(
                            "resolve {} select {}.{};",
                            r.subject.text, q.owner.text, q.name.text
                        ),
                        StrategyDecl::Unify => format!("resolve {} unify;", r.subject.text),
                    };
                    self.line(&s);
                }
            }
        }
        self.indent -= 1;
        self.line("}");
    }

    fn test_block(&mut self, t: &TestBlock) {
        let head = match &t.target {
            Some(target) => format!("test {} for {} {{", t.name.text, target.text),
            None => format!("test {} {{", t.name.text),
        };
        self.line(&head);
        self.block_body(&t.body);
        self.line("}");
    }

    fn block_body(&mut self, b: &Block) {
        self.indent += 1;
        for s in &b.stmts {
            self.stmt(s);
        }
        self.indent -= 1;
    }

    fn stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::VarDecl {
                ty: t, name, init, ..
            } => {
                let mut line = format!("{} {}", ty(t), name.text);
                if let Some(e) = init {
                    write!(line, " = {}", expr(e)).unwrap();
                }
                line.push(';');
                self.line(&line);
            }
            Stmt::Assign { target, value, .. } => {
                self.line(&format!("{} = {};", expr(target), expr(value)));
            }
            Stmt::Expr { expr: e, .. } => self.line(&format!("{};", expr(e))),
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                ..
            } => {
                self.line(&format!("if ({}) {{", expr(cond)));
                self.block_body(then_branch);
                match else_branch {
                    Some(eb) => {
                        self.line("} else {");
                        self.block_body(eb);
                        self.line("}");
                    }
                    None => self.line("}"),
                }
            }
            Stmt::Return { value, .. } => match value {
                Some(e) => self.line(&format!("return {};", expr(e))),
                None => self.line("return;"),
            },
            Stmt::Assert { cond, .. } => self.line(&format!("assert({});", expr(cond))),
            Stmt::Print { value, .. } => self.line(&format!("print({});", expr(value))),
        }
    }
}

fn vis(v: VisibilityDecl) -> &'static str {
    match v {
        VisibilityDecl::Public => "public",
        VisibilityDecl::Private => "private",
    }
}

fn ty(t: &TypeExpr) -> String {
    match &t.kind {
        TypeExprKind::Int => "int".to_string(),
        TypeExprKind::Bool => "bool".to_string(),
        TypeExprKind::Str => "string".to_string(),
        TypeExprKind::Color => "Color".to_string(),
        TypeExprKind::Named(n) => n.clone(),
    }
}

fn params(ps: &[Param]) -> String {
    let rendered: Vec<String> = ps
        .iter()
        .map(|p| format!("{} {}", ty(&p.ty), p.name.text))
        .collect();
    rendered.join(", ")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

fn expr(e: &Expr) -> String {
    match e {
        Expr::Int(v, _) => v.to_string(),
        Expr::Str(s, _) => escape(s),
        Expr::Bool(b, _) => b.to_string(),
        Expr::Null(_) => "null".to_string(),
        Expr::Color(ColorName::Red, _) => "Color.Red".to_string(),
        Expr::Color(ColorName::Green, _) => "Color.Green".to_string(),
        Expr::Current(_) => "Current".to_string(),
        Expr::Name(id) => id.text.clone(),
        Expr::Field { recv, name } => format!("{}.{}", expr(recv), name.text),
        Expr::Call {
            recv, name, args, ..
        } => {
            let rendered: Vec<String> = args.iter().map(expr).collect();
            match recv {
                Some(r) => format!("{}.{}({})", expr(r), name.text, rendered.join(", ")),
                None => format!("{}({})", name.text, rendered.join(", ")),
            }
        }
        Expr::SuperCall { name, args, .. } => {
            let rendered: Vec<String> = args.iter().map(expr).collect();
            format!("super.{}({})", name.text, rendered.join(", "))
        }
        Expr::New { class, args, .. } => {
            let rendered: Vec<String> = args.iter().map(expr).collect();
            format!("new {}({})", class.text, rendered.join(", "))
        }
        Expr::ClassnameOf { expr: inner, .. } => format!("classnameOf({})", expr(inner)),
        Expr::InstanceOf {
            expr: inner, class, ..
        } => {
            format!("({} instanceof {})", expr(inner), class.text)
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let sym = match op {
                BinOp::Eq => "==",
                BinOp::Ne => "!=",
                BinOp::Add => "+",
            };
            format!("({} {} {})", expr(lhs), sym, expr(rhs))
        }
    }
}
