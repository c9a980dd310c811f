//! Tree-walking interpreter and test executor.
//!
//! Each plan step allocates a fresh instance of its executing class, binds
//! it to `Current`, and interprets the test body. Property and class tests
//! run white-box (private members of any object are reachable); package
//! tests run black-box (public members only, and no `Current`). A failing
//! assertion aborts only the current body; execution always proceeds to
//! the next step.

use crate::conflicts::dispatch_method;
use crate::frontend::ast::{BinOp, Block, ColorName, Expr, Stmt};
use crate::metamodel::{
    ClassId, EntityId, GlobalPropId, LocalPropId, Role, SealedModel, Signature, Visibility,
};
use crate::resolver::{ExecutionPlan, PlanStep, StepKind};
use crate::span::Span;
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;
use std::time::Instant;

#[derive(Clone, Debug)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(Rc<str>),
    Null,
    Color(ColorName),
    Object(Rc<RefCell<Object>>),
}

#[derive(Debug)]
pub struct Object {
    pub class: ClassId,
    /// One slot per field family visible from the dynamic class.
    pub fields: BTreeMap<GlobalPropId, Value>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TestStatus {
    Pass,
    Fail,
    RuntimeError,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RuntimeErrorKind {
    NullDereference,
    NoSuchMethod,
    NoSuchField,
    NoSuchClass,
    VisibilityViolation,
    TypeMismatch,
    ArityMismatch,
    NoCurrent,
}

impl RuntimeErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            RuntimeErrorKind::NullDereference => "NullDereference",
            RuntimeErrorKind::NoSuchMethod => "NoSuchMethod",
            RuntimeErrorKind::NoSuchField => "NoSuchField",
            RuntimeErrorKind::NoSuchClass => "NoSuchClass",
            RuntimeErrorKind::VisibilityViolation => "VisibilityViolation",
            RuntimeErrorKind::TypeMismatch => "TypeMismatch",
            RuntimeErrorKind::ArityMismatch => "ArityMismatch",
            RuntimeErrorKind::NoCurrent => "NoCurrent",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RuntimeErrorInfo {
    pub kind: RuntimeErrorKind,
    pub message: String,
    pub span: Span,
}

/// The record of one executed plan step.
#[derive(Clone, Debug)]
pub struct TestOutcome {
    pub test: EntityId,
    pub executing_class: Option<ClassId>,
    pub status: TestStatus,
    pub failed_assert: Option<Span>,
    /// Printed lines up to the point the body stopped.
    pub output: Vec<String>,
    pub duration_ms: u64,
    pub error: Option<RuntimeErrorInfo>,
}

enum Interrupt {
    Return(Value),
    AssertFail(Span),
    Error(RuntimeErrorInfo),
}

type EvalResult = Result<Value, Interrupt>;
type ExecResult = Result<(), Interrupt>;

fn rt_error(kind: RuntimeErrorKind, message: impl Into<String>, span: Span) -> Interrupt {
    Interrupt::Error(RuntimeErrorInfo {
        kind,
        message: message.into(),
        span,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Access {
    /// Ordinary code: private members of the defining class only.
    Method { defining: ClassId },
    /// Property and class tests: everything is visible.
    WhiteBox,
    /// Package tests: public members only.
    BlackBox,
}

struct Frame {
    locals: HashMap<String, Value>,
    current: Option<Value>,
    access: Access,
}

struct Interpreter<'m> {
    model: &'m SealedModel,
    output: Vec<String>,
}

/// Runs one plan step in isolation and captures its outcome.
pub fn run_test(model: &SealedModel, step: &PlanStep) -> TestOutcome {
    let started = Instant::now();
    let mut interp = Interpreter {
        model,
        output: Vec::new(),
    };
    let entry = model.test(step.test);
    let body = model.body(entry.body);
    let result = match step.kind {
        StepKind::PackageTest => interp.exec_test_body(body, None, Access::BlackBox),
        StepKind::ClassTest | StepKind::PropertyTest => {
            let class = step.executing_class.expect("class-level step");
            match interp.instantiate(class, Vec::new(), body.span) {
                Ok(instance) => interp.exec_test_body(body, Some(instance), Access::WhiteBox),
                Err(i) => Err(i),
            }
        }
    };
    let (status, failed_assert, error) = match result {
        Ok(()) => (TestStatus::Pass, None, None),
        Err(Interrupt::Return(_)) => (TestStatus::Pass, None, None),
        Err(Interrupt::AssertFail(span)) => (TestStatus::Fail, Some(span), None),
        Err(Interrupt::Error(info)) => (TestStatus::RuntimeError, None, Some(info)),
    };
    TestOutcome {
        test: step.test,
        executing_class: step.executing_class,
        status,
        failed_assert,
        output: interp.output,
        duration_ms: started.elapsed().as_millis() as u64,
        error,
    }
}

/// Runs every step of the plan in order; failures never skip later steps.
pub fn run_all(model: &SealedModel, plan: &ExecutionPlan) -> Vec<TestOutcome> {
    run_plan(model, plan, false)
}

pub fn run_plan(model: &SealedModel, plan: &ExecutionPlan, fail_fast: bool) -> Vec<TestOutcome> {
    let mut outcomes = Vec::new();
    for step in &plan.steps {
        let outcome = run_test(model, step);
        let stop = fail_fast && outcome.status != TestStatus::Pass;
        outcomes.push(outcome);
        if stop {
            break;
        }
    }
    outcomes
}

impl<'m> Interpreter<'m> {
    fn exec_test_body(
        &mut self,
        body: &Block,
        current: Option<Value>,
        access: Access,
    ) -> ExecResult {
        let mut frame = Frame {
            locals: HashMap::new(),
            current,
            access,
        };
        self.exec_block(body, &mut frame)
    }

    fn exec_block(&mut self, block: &Block, frame: &mut Frame) -> ExecResult {
        for stmt in &block.stmts {
            self.exec_stmt(stmt, frame)?;
        }
        Ok(())
    }

    fn exec_stmt(&mut self, stmt: &Stmt, frame: &mut Frame) -> ExecResult {
        match stmt {
            Stmt::VarDecl { name, init, .. } => {
                let value = match init {
                    Some(e) => self.eval(e, frame)?,
                    None => Value::Null,
                };
                frame.locals.insert(name.text.clone(), value);
                Ok(())
            }
            Stmt::Assign { target, value, .. } => {
                let value = self.eval(value, frame)?;
                self.assign(target, value, frame)
            }
            Stmt::Expr { expr, .. } => {
                self.eval(expr, frame)?;
                Ok(())
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                span,
            } => {
                let value = self.eval(cond, frame)?;
                match value {
                    Value::Bool(true) => self.exec_block(then_branch, frame),
                    Value::Bool(false) => match else_branch {
                        Some(eb) => self.exec_block(eb, frame),
                        None => Ok(()),
                    },
                    other => Err(rt_error(
                        RuntimeErrorKind::TypeMismatch,
                        format!("condition is {}, not a bool", type_of(&other)),
                        *span,
                    )),
                }
            }
            Stmt::Return { value, .. } => {
                let value = match value {
                    Some(e) => self.eval(e, frame)?,
                    None => Value::Null,
                };
                Err(Interrupt::Return(value))
            }
            Stmt::Assert { cond, span } => match self.eval(cond, frame)? {
                Value::Bool(true) => Ok(()),
                Value::Bool(false) => Err(Interrupt::AssertFail(*span)),
                other => Err(rt_error(
                    RuntimeErrorKind::TypeMismatch,
                    format!("assertion argument is {}, not a bool", type_of(&other)),
                    *span,
                )),
            },
            Stmt::Print { value, .. } => {
                let value = self.eval(value, frame)?;
                self.output.push(self.stringify(&value));
                Ok(())
            }
        }
    }

    fn assign(&mut self, target: &Expr, value: Value, frame: &mut Frame) -> ExecResult {
        match target {
            Expr::Name(id) => {
                if frame.locals.contains_key(&id.text) {
                    frame.locals.insert(id.text.clone(), value);
                    return Ok(());
                }
                let receiver = self.current_object(frame, id.span)?;
                self.write_field(&receiver, &id.text, value, frame.access, id.span)
            }
            Expr::Field { recv, name } => {
                let receiver = self.eval(recv, frame)?;
                let receiver = self.expect_object(receiver, name.span)?;
                self.write_field(&receiver, &name.text, value, frame.access, name.span)
            }
            _ => Err(rt_error(
                RuntimeErrorKind::TypeMismatch,
                "assignment target must be a variable or field",
                target.span(),
            )),
        }
    }

    fn eval(&mut self, expr: &Expr, frame: &mut Frame) -> EvalResult {
        match expr {
            Expr::Int(v, _) => Ok(Value::Int(*v)),
            Expr::Str(s, _) => Ok(Value::Str(Rc::from(s.as_str()))),
            Expr::Bool(b, _) => Ok(Value::Bool(*b)),
            Expr::Null(_) => Ok(Value::Null),
            Expr::Color(c, _) => Ok(Value::Color(*c)),
            Expr::Current(span) => match &frame.current {
                Some(v) => Ok(v.clone()),
                None => Err(rt_error(
                    RuntimeErrorKind::NoCurrent,
                    "'Current' is not available in a package test",
                    *span,
                )),
            },
            Expr::Name(id) => {
                if let Some(v) = frame.locals.get(&id.text) {
                    return Ok(v.clone());
                }
                let receiver = self.current_object(frame, id.span)?;
                self.read_field(&receiver, &id.text, frame.access, id.span)
            }
            Expr::Field { recv, name } => {
                let receiver = self.eval(recv, frame)?;
                let receiver = self.expect_object(receiver, name.span)?;
                self.read_field(&receiver, &name.text, frame.access, name.span)
            }
            Expr::Call {
                recv,
                name,
                args,
                span,
            } => {
                let receiver = match recv {
                    Some(r) => {
                        let value = self.eval(r, frame)?;
                        self.expect_object(value, *span)?
                    }
                    None => self.current_object(frame, *span)?,
                };
                let args = self.eval_args(args, frame)?;
                let class = receiver.borrow().class;
                let Some(method) = dispatch_method(self.model, class, &name.text) else {
                    return Err(rt_error(
                        RuntimeErrorKind::NoSuchMethod,
                        format!(
                            "no method '{}' on class '{}'",
                            name.text,
                            self.model.class(class).name
                        ),
                        *span,
                    ));
                };
                self.check_member_access(
                    self.model.local_property(method).visibility,
                    self.model.local_property(method).owner,
                    frame.access,
                    &name.text,
                    *span,
                )?;
                self.invoke(method, receiver, args, *span)
            }
            Expr::SuperCall { name, args, span } => {
                let Access::Method { defining } = frame.access else {
                    return Err(rt_error(
                        RuntimeErrorKind::NoSuchMethod,
                        "'super' calls are only available inside methods",
                        *span,
                    ));
                };
                let receiver = self.current_object(frame, *span)?;
                let args = self.eval_args(args, frame)?;
                let method = self
                    .model
                    .class(defining)
                    .parents
                    .iter()
                    .find_map(|p| dispatch_method(self.model, *p, &name.text))
                    .ok_or_else(|| {
                        rt_error(
                            RuntimeErrorKind::NoSuchMethod,
                            format!(
                                "no inherited method '{}' above '{}'",
                                name.text,
                                self.model.class(defining).name
                            ),
                            *span,
                        )
                    })?;
                self.invoke(method, receiver, args, *span)
            }
            Expr::New { class, args, span } => {
                let Some(class_id) = self.model.class_by_name(&class.text) else {
                    return Err(rt_error(
                        RuntimeErrorKind::NoSuchClass,
                        format!("unknown class '{}'", class.text),
                        *span,
                    ));
                };
                let args = self.eval_args(args, frame)?;
                let instance = self.instantiate(class_id, args, *span)?;
                Ok(instance)
            }
            Expr::ClassnameOf { expr, span } => {
                let value = self.eval(expr, frame)?;
                let object = self.expect_object(value, *span)?;
                let class = object.borrow().class;
                Ok(Value::Str(Rc::from(self.model.class(class).name.as_str())))
            }
            Expr::InstanceOf { expr, class, span } => {
                let value = self.eval(expr, frame)?;
                let Some(target) = self.model.class_by_name(&class.text) else {
                    return Err(rt_error(
                        RuntimeErrorKind::NoSuchClass,
                        format!("unknown class '{}'", class.text),
                        *span,
                    ));
                };
                match value {
                    Value::Object(obj) => {
                        let class = obj.borrow().class;
                        Ok(Value::Bool(self.model.is_subclass_or_eq(class, target)))
                    }
                    _ => Ok(Value::Bool(false)),
                }
            }
            Expr::Binary { op, lhs, rhs, span } => {
                let left = self.eval(lhs, frame)?;
                let right = self.eval(rhs, frame)?;
                match op {
                    BinOp::Eq => Ok(Value::Bool(values_equal(&left, &right))),
                    BinOp::Ne => Ok(Value::Bool(!values_equal(&left, &right))),
                    BinOp::Add => match (&left, &right) {
                        (Value::Int(a), Value::Int(b)) => Ok(Value::Int(a + b)),
                        (Value::Str(a), Value::Str(b)) => {
                            Ok(Value::Str(Rc::from(format!("{a}{b}").as_str())))
                        }
                        _ => Err(rt_error(
                            RuntimeErrorKind::TypeMismatch,
                            format!(
                                "'+' cannot combine {} and {}",
                                type_of(&left),
                                type_of(&right)
                            ),
                            *span,
                        )),
                    },
                }
            }
        }
    }

    fn eval_args(&mut self, args: &[Expr], frame: &mut Frame) -> Result<Vec<Value>, Interrupt> {
        args.iter().map(|a| self.eval(a, frame)).collect()
    }

    fn current_object(
        &mut self,
        frame: &Frame,
        span: Span,
    ) -> Result<Rc<RefCell<Object>>, Interrupt> {
        match &frame.current {
            Some(Value::Object(obj)) => Ok(obj.clone()),
            Some(_) => Err(rt_error(
                RuntimeErrorKind::TypeMismatch,
                "'Current' is not an object",
                span,
            )),
            None => Err(rt_error(
                RuntimeErrorKind::NoCurrent,
                "no current object in this context",
                span,
            )),
        }
    }

    fn expect_object(&self, value: Value, span: Span) -> Result<Rc<RefCell<Object>>, Interrupt> {
        match value {
            Value::Object(obj) => Ok(obj),
            Value::Null => Err(rt_error(
                RuntimeErrorKind::NullDereference,
                "null has no members",
                span,
            )),
            other => Err(rt_error(
                RuntimeErrorKind::TypeMismatch,
                format!("{} has no members", type_of(&other)),
                span,
            )),
        }
    }

    /// Nearest field declaration for `name` from the object's dynamic class.
    fn find_field(&self, class: ClassId, name: &str, span: Span) -> Result<LocalPropId, Interrupt> {
        for d in crate::conflicts::lookup_order(self.model, class) {
            for l in self.model.own_local_properties(d) {
                let p = self.model.local_property(l);
                if p.role == Role::Field && p.name == name {
                    return Ok(l);
                }
            }
        }
        Err(rt_error(
            RuntimeErrorKind::NoSuchField,
            format!(
                "no variable or field '{}' on class '{}'",
                name,
                self.model.class(class).name
            ),
            span,
        ))
    }

    fn check_member_access(
        &self,
        visibility: Visibility,
        owner: ClassId,
        access: Access,
        name: &str,
        span: Span,
    ) -> Result<(), Interrupt> {
        if visibility == Visibility::Public {
            return Ok(());
        }
        match access {
            Access::WhiteBox => Ok(()),
            Access::Method { defining } if defining == owner => Ok(()),
            Access::Method { .. } => Err(rt_error(
                RuntimeErrorKind::VisibilityViolation,
                format!(
                    "'{}' is private to class '{}'",
                    name,
                    self.model.class(owner).name
                ),
                span,
            )),
            Access::BlackBox => Err(rt_error(
                RuntimeErrorKind::VisibilityViolation,
                format!("'{name}' is private and package tests are black-box"),
                span,
            )),
        }
    }

    fn read_field(
        &mut self,
        receiver: &Rc<RefCell<Object>>,
        name: &str,
        access: Access,
        span: Span,
    ) -> EvalResult {
        let class = receiver.borrow().class;
        let field = self.find_field(class, name, span)?;
        let p = self.model.local_property(field);
        self.check_member_access(p.visibility, p.owner, access, name, span)?;
        Ok(receiver
            .borrow()
            .fields
            .get(&p.global)
            .cloned()
            .unwrap_or(Value::Null))
    }

    fn write_field(
        &mut self,
        receiver: &Rc<RefCell<Object>>,
        name: &str,
        value: Value,
        access: Access,
        span: Span,
    ) -> ExecResult {
        let class = receiver.borrow().class;
        let field = self.find_field(class, name, span)?;
        let p = self.model.local_property(field);
        self.check_member_access(p.visibility, p.owner, access, name, span)?;
        receiver.borrow_mut().fields.insert(p.global, value);
        Ok(())
    }

    /// Allocates an instance: every visible field slot starts null, field
    /// initializers run base classes first, then the class's own
    /// constructor body (if any) with its parameters bound.
    fn instantiate(&mut self, class: ClassId, args: Vec<Value>, span: Span) -> EvalResult {
        let mut fields = BTreeMap::new();
        for d in self.model.ancestors_or_self(class) {
            for l in self.model.own_local_properties(d) {
                let p = self.model.local_property(l);
                if p.role == Role::Field {
                    fields.insert(p.global, Value::Null);
                }
            }
        }
        let object = Rc::new(RefCell::new(Object { class, fields }));

        let mut init_order = crate::conflicts::lookup_order(self.model, class);
        init_order.reverse();
        for d in init_order {
            for l in self.model.own_local_properties(d) {
                let p = self.model.local_property(l);
                let (Role::Field, Some(init)) = (p.role, p.field_init) else {
                    continue;
                };
                let mut frame = Frame {
                    locals: HashMap::new(),
                    current: Some(Value::Object(object.clone())),
                    access: Access::Method { defining: d },
                };
                let init_expr = self.model.field_init(init).clone();
                let value = self.eval(&init_expr, &mut frame)?;
                object.borrow_mut().fields.insert(p.global, value);
            }
        }

        match &self.model.class(class).ctor {
            Some(ctor) => {
                if ctor.params.len() != args.len() {
                    return Err(rt_error(
                        RuntimeErrorKind::ArityMismatch,
                        format!(
                            "constructor of '{}' takes {} arguments, got {}",
                            self.model.class(class).name,
                            ctor.params.len(),
                            args.len()
                        ),
                        span,
                    ));
                }
                let mut locals = HashMap::new();
                for (p, a) in ctor.params.iter().zip(args) {
                    locals.insert(p.name.clone(), a);
                }
                let mut frame = Frame {
                    locals,
                    current: Some(Value::Object(object.clone())),
                    access: Access::Method { defining: class },
                };
                let body = self.model.body(ctor.body).clone();
                match self.exec_block(&body, &mut frame) {
                    Ok(()) | Err(Interrupt::Return(_)) => {}
                    Err(other) => return Err(other),
                }
            }
            None => {
                if !args.is_empty() {
                    return Err(rt_error(
                        RuntimeErrorKind::ArityMismatch,
                        format!(
                            "class '{}' has no constructor taking arguments",
                            self.model.class(class).name
                        ),
                        span,
                    ));
                }
            }
        }
        Ok(Value::Object(object))
    }

    fn invoke(
        &mut self,
        method: LocalPropId,
        receiver: Rc<RefCell<Object>>,
        args: Vec<Value>,
        span: Span,
    ) -> EvalResult {
        let prop = self.model.local_property(method);
        let Signature::Method { params, .. } = &prop.signature else {
            return Err(rt_error(
                RuntimeErrorKind::NoSuchMethod,
                format!("'{}' is a field, not a method", prop.name),
                span,
            ));
        };
        if params.len() != args.len() {
            return Err(rt_error(
                RuntimeErrorKind::ArityMismatch,
                format!(
                    "'{}' takes {} arguments, got {}",
                    self.model.display_name(method.id()),
                    params.len(),
                    args.len()
                ),
                span,
            ));
        }
        let mut locals = HashMap::new();
        for (p, a) in params.iter().zip(args) {
            locals.insert(p.name.clone(), a);
        }
        let mut frame = Frame {
            locals,
            current: Some(Value::Object(receiver)),
            access: Access::Method {
                defining: prop.owner,
            },
        };
        let body = prop.body.expect("methods carry bodies");
        let body = self.model.body(body).clone();
        match self.exec_block(&body, &mut frame) {
            Ok(()) => Ok(Value::Null),
            Err(Interrupt::Return(v)) => Ok(v),
            Err(other) => Err(other),
        }
    }

    fn stringify(&self, value: &Value) -> String {
        match value {
            Value::Int(v) => v.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Str(s) => s.to_string(),
            Value::Null => "null".to_string(),
            Value::Color(ColorName::Red) => "Red".to_string(),
            Value::Color(ColorName::Green) => "Green".to_string(),
            Value::Object(obj) => self.model.class(obj.borrow().class).name.clone(),
        }
    }
}

fn type_of(value: &Value) -> &'static str {
    match value {
        Value::Int(_) => "an int",
        Value::Bool(_) => "a bool",
        Value::Str(_) => "a string",
        Value::Null => "null",
        Value::Color(_) => "a color",
        Value::Object(_) => "an object",
    }
}

fn values_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => x == y,
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::Str(x), Value::Str(y)) => x == y,
        (Value::Color(x), Value::Color(y)) => x == y,
        (Value::Null, Value::Null) => true,
        (Value::Object(x), Value::Object(y)) => Rc::ptr_eq(x, y),
        _ => false,
    }
}
