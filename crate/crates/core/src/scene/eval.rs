//! Lowered program form and the expression interpreter.
//!
//! Names are resolved to slots once, at compile time. Shape bodies are
//! executed by the renderer; this module evaluates constants, user
//! functions and expressions.

use std::collections::HashMap;

use super::ast::*;
use super::check::check;
use super::error::{EvalError, SceneError};
use crate::dynamics::{escape_count_from, Complex};
use crate::render::stream::{child_key, RandStream, VariationSeed};

/// Default cap on nested user-function frames. Self tail calls reuse
/// their frame and do not count.
pub const MAX_CALL_DEPTH: u32 = 1_000_000;

/// Path component under which constants draw their random numbers.
pub(crate) const CONST_BRANCH: u64 = u64::MAX - 1;
/// Path component for the startshape arguments.
pub(crate) const START_BRANCH: u64 = u64::MAX;

#[derive(Debug, Clone)]
pub(crate) enum Ir {
    Num(f64),
    Const(u32),
    Local(u32),
    Neg(Box<Ir>),
    Bin(BinOp, Box<Ir>, Box<Ir>, Span),
    If(Box<Ir>, Box<Ir>, Box<Ir>),
    Rand(Box<Ir>, Box<Ir>, Span),
    Call(u32, Box<[Ir]>, Span),
}

#[derive(Debug, Clone)]
pub(crate) struct Func {
    pub name: String,
    pub arity: usize,
    pub body: Ir,
    /// Iteration limit operand when the body is the recognised escape loop.
    pub escape: Option<Ir>,
}

#[derive(Debug, Clone)]
pub(crate) struct AdjIr {
    pub kind: AdjustKind,
    pub values: Vec<Ir>,
}

#[derive(Debug, Clone)]
pub(crate) enum SIr {
    Loop { var: Option<u32>, count: Ir, adjust: Vec<AdjIr>, body: Vec<SIr>, span: Span },
    If { cond: Ir, then_body: Vec<SIr>, else_body: Vec<SIr> },
    Bind { slot: u32, value: Ir },
    Prim { kind: PrimKind, adjust: Vec<AdjIr> },
    Call { shape: u32, args: Vec<Ir>, adjust: Vec<AdjIr>, span: Span },
}

#[derive(Debug, Clone)]
pub(crate) struct ShapeIr {
    pub name: String,
    pub slots: usize,
    pub body: Vec<SIr>,
}

/// One `rand(lo, hi)` draw, recorded on request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandDraw {
    pub span: Span,
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

/// Whether calls to the recognised escape-loop function run natively or
/// through the interpreter. Both give identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EscapePath {
    #[default]
    Native,
    Interpreted,
}

/// A checked program with names resolved, ready to evaluate. Immutable and
/// shareable between threads.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub(crate) const_names: Vec<String>,
    const_exprs: Vec<Ir>,
    const_order: Vec<usize>,
    pub(crate) funcs: Vec<Func>,
    func_index: HashMap<String, u32>,
    pub(crate) shapes: Vec<ShapeIr>,
    pub(crate) start: u32,
    pub(crate) start_args: Vec<Ir>,
    pub(crate) start_span: Span,
}

/// Evaluation state for one statement (or one top-level expression).
pub(crate) struct Ctx<'a> {
    pub consts: &'a [f64],
    pub rng: RandStream,
    pub iterations: u64,
    pub iteration_budget: u64,
    pub depth: u32,
    pub max_depth: u32,
    pub escape: EscapePath,
    pub draws: Option<&'a mut Vec<RandDraw>>,
}

impl<'a> Ctx<'a> {
    pub fn new(consts: &'a [f64], rng: RandStream) -> Self {
        Self {
            consts,
            rng,
            iterations: 0,
            iteration_budget: u64::MAX,
            depth: 0,
            max_depth: MAX_CALL_DEPTH,
            escape: EscapePath::Native,
            draws: None,
        }
    }

    #[inline]
    fn charge(&mut self, n: u64, span: Span) -> Result<(), EvalError> {
        self.iterations += n;
        if self.iterations > self.iteration_budget {
            return Err(EvalError::limit(span, "escape-iteration cap exceeded"));
        }
        Ok(())
    }
}

enum Tail {
    Value(f64),
    Again(Vec<f64>),
}

#[inline]
fn truthy(v: f64) -> bool {
    v != 0.0
}

#[inline]
fn bool_num(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl Compiled {
    /// Checks and lowers a parsed program.
    pub fn new(program: &Program) -> Result<Self, SceneError> {
        check(program)?;
        Lowering::run(program)
    }

    pub fn shape_names(&self) -> impl Iterator<Item = &str> {
        self.shapes.iter().map(|s| s.name.as_str())
    }

    pub fn start_shape(&self) -> &str {
        &self.shapes[self.start as usize].name
    }

    /// Values of all constants, by name, for the given variation.
    pub fn constants(&self, seed: &VariationSeed) -> Result<Vec<(String, f64)>, SceneError> {
        let vals = self.constant_values(seed, EscapePath::Native)?;
        Ok(self.const_names.iter().cloned().zip(vals).collect())
    }

    pub(crate) fn constant_values(&self, seed: &VariationSeed, escape: EscapePath) -> Result<Vec<f64>, EvalError> {
        let mut vals = vec![f64::NAN; self.const_exprs.len()];
        let branch = child_key(seed.seed(), CONST_BRANCH);
        for &i in &self.const_order {
            let v = {
                let mut ctx = Ctx::new(&vals, RandStream::new(child_key(branch, i as u64)));
                ctx.escape = escape;
                self.eval(&self.const_exprs[i], &[], &mut ctx)?
            };
            vals[i] = v;
        }
        Ok(vals)
    }

    /// Calls a user function with plain arguments. Constants are evaluated
    /// under the empty variation tag.
    pub fn call_function(&self, name: &str, args: &[f64], escape: EscapePath) -> Result<f64, SceneError> {
        let consts = self.constant_values(&VariationSeed::default(), escape)?;
        self.call_function_with(name, args, &consts, escape)
    }

    pub(crate) fn call_function_with(
        &self,
        name: &str,
        args: &[f64],
        consts: &[f64],
        escape: EscapePath,
    ) -> Result<f64, SceneError> {
        let span = Span::new(0, 0);
        let Some(&fid) = self.func_index.get(name) else {
            return Err(EvalError::new(span, format!("unknown function '{name}'")).into());
        };
        let f = &self.funcs[fid as usize];
        if f.arity != args.len() {
            return Err(EvalError::new(span, format!("function '{name}' takes {} arguments", f.arity)).into());
        }
        let mut ctx = Ctx::new(consts, RandStream::new(0));
        ctx.escape = escape;
        Ok(self.call(fid, args.to_vec(), span, &mut ctx)?)
    }

    /// Evaluates a free-standing expression against this program's
    /// constants and functions plus the given bindings. Names are looked up
    /// in `bindings` first.
    pub fn eval_expr(
        &self,
        e: &Expr,
        bindings: &[(&str, f64)],
        rng: &mut RandStream,
        escape: EscapePath,
    ) -> Result<f64, SceneError> {
        let consts = self.constant_values(&VariationSeed::default(), escape)?;
        let names: Vec<&str> = bindings.iter().map(|b| b.0).collect();
        let locals: Vec<f64> = bindings.iter().map(|b| b.1).collect();
        let lw = Lowering::for_program(self);
        let ir = lw.expr(e, &mut |n| names.iter().rposition(|&b| b == n).map(|i| i as u32))?;
        let mut ctx = Ctx::new(&consts, rng.clone());
        ctx.escape = escape;
        let v = self.eval(&ir, &locals, &mut ctx)?;
        *rng = ctx.rng;
        Ok(v)
    }

    pub(crate) fn eval(&self, ir: &Ir, locals: &[f64], ctx: &mut Ctx) -> Result<f64, EvalError> {
        Ok(match ir {
            Ir::Num(v) => *v,
            Ir::Const(i) => ctx.consts[*i as usize],
            Ir::Local(i) => locals[*i as usize],
            Ir::Neg(a) => -self.eval(a, locals, ctx)?,
            Ir::Bin(op, a, b, span) => {
                let l = self.eval(a, locals, ctx)?;
                match op {
                    BinOp::And => bool_num(truthy(l) && truthy(self.eval(b, locals, ctx)?)),
                    BinOp::Or => bool_num(truthy(l) || truthy(self.eval(b, locals, ctx)?)),
                    _ => {
                        let r = self.eval(b, locals, ctx)?;
                        match op {
                            BinOp::Add => l + r,
                            BinOp::Sub => l - r,
                            BinOp::Mul => l * r,
                            BinOp::Div => {
                                if r == 0.0 {
                                    return Err(EvalError::new(*span, "division by zero"));
                                }
                                l / r
                            }
                            BinOp::Lt => bool_num(l < r),
                            BinOp::Le => bool_num(l <= r),
                            BinOp::Gt => bool_num(l > r),
                            BinOp::Ge => bool_num(l >= r),
                            BinOp::Eq => bool_num(l == r),
                            BinOp::And | BinOp::Or => unreachable!(),
                        }
                    }
                }
            }
            Ir::If(c, a, b) => {
                if truthy(self.eval(c, locals, ctx)?) {
                    self.eval(a, locals, ctx)?
                } else {
                    self.eval(b, locals, ctx)?
                }
            }
            Ir::Rand(a, b, span) => {
                let lo = self.eval(a, locals, ctx)?;
                let hi = self.eval(b, locals, ctx)?;
                let value = ctx.rng.uniform(lo, hi);
                if let Some(d) = ctx.draws.as_deref_mut() {
                    d.push(RandDraw { span: *span, lo, hi, value });
                }
                value
            }
            Ir::Call(f, args, span) => {
                let vals = self.eval_args(args, locals, ctx)?;
                self.call(*f, vals, *span, ctx)?
            }
        })
    }

    fn eval_args(&self, args: &[Ir], locals: &[f64], ctx: &mut Ctx) -> Result<Vec<f64>, EvalError> {
        args.iter().map(|a| self.eval(a, locals, ctx)).collect()
    }

    fn call(&self, fid: u32, args: Vec<f64>, span: Span, ctx: &mut Ctx) -> Result<f64, EvalError> {
        let f = &self.funcs[fid as usize];
        if ctx.escape == EscapePath::Native {
            if let Some(limit) = &f.escape {
                let m = match limit {
                    Ir::Num(v) => *v,
                    Ir::Const(i) => ctx.consts[*i as usize],
                    _ => unreachable!("escape limit is a number or constant"),
                };
                let (n, it) = escape_count_from(args[0], m, Complex::new(args[1], args[2]), Complex::new(args[3], args[4]));
                // one body evaluation per iteration plus the final one
                ctx.charge(it + 1, span)?;
                return Ok(n);
            }
        }
        if ctx.depth >= ctx.max_depth {
            return Err(EvalError::limit(
                span,
                format!("recursion depth exceeds {} frames in '{}'", ctx.max_depth, f.name),
            ));
        }
        ctx.depth += 1;
        let r = stacker::maybe_grow(128 * 1024, 4 * 1024 * 1024, || self.run_body(fid, args, span, ctx));
        ctx.depth -= 1;
        r
    }

    fn run_body(&self, fid: u32, mut args: Vec<f64>, span: Span, ctx: &mut Ctx) -> Result<f64, EvalError> {
        let body = &self.funcs[fid as usize].body;
        loop {
            ctx.charge(1, span)?;
            match self.eval_tail(body, &args, fid, ctx)? {
                Tail::Value(v) => return Ok(v),
                Tail::Again(next) => args = next,
            }
        }
    }

    fn eval_tail(&self, ir: &Ir, locals: &[f64], fid: u32, ctx: &mut Ctx) -> Result<Tail, EvalError> {
        match ir {
            Ir::If(c, a, b) => {
                if truthy(self.eval(c, locals, ctx)?) {
                    self.eval_tail(a, locals, fid, ctx)
                } else {
                    self.eval_tail(b, locals, fid, ctx)
                }
            }
            Ir::Call(g, args, _) if *g == fid => Ok(Tail::Again(self.eval_args(args, locals, ctx)?)),
            _ => Ok(Tail::Value(self.eval(ir, locals, ctx)?)),
        }
    }
}

/// Truncation toward zero for count contexts.
pub(crate) fn loop_count(v: f64, span: Span) -> Result<u64, EvalError> {
    if !v.is_finite() || v < 0.0 {
        return Err(EvalError::new(span, format!("loop count must be a non-negative finite number, got {v}")));
    }
    Ok(v.trunc() as u64)
}

struct Lowering {
    consts: HashMap<String, u32>,
    funcs: HashMap<String, u32>,
    shapes: HashMap<String, u32>,
}

type Resolve<'r> = dyn FnMut(&str) -> Option<u32> + 'r;

impl Lowering {
    fn for_program(c: &Compiled) -> Self {
        Self {
            consts: c.const_names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect(),
            funcs: c.func_index.clone(),
            shapes: c.shapes.iter().enumerate().map(|(i, s)| (s.name.clone(), i as u32)).collect(),
        }
    }

    fn run(p: &Program) -> Result<Compiled, SceneError> {
        let lw = Self {
            consts: p.constants().enumerate().map(|(i, c)| (c.name.clone(), i as u32)).collect(),
            funcs: p.functions().enumerate().map(|(i, f)| (f.name.clone(), i as u32)).collect(),
            shapes: p.shapes().enumerate().map(|(i, s)| (s.name.clone(), i as u32)).collect(),
        };

        let mut funcs = Vec::new();
        for (fid, f) in p.functions().enumerate() {
            let body = lw.expr(&f.body, &mut |n| f.params.iter().position(|q| q == n).map(|i| i as u32))?;
            let escape = recognise_escape(fid as u32, f.params.len(), &body);
            funcs.push(Func { name: f.name.clone(), arity: f.params.len(), body, escape });
        }

        let mut const_exprs = Vec::new();
        for c in p.constants() {
            const_exprs.push(lw.expr(&c.value, &mut |_| None)?);
        }
        let const_spans: Vec<Span> = p.constants().map(|c| c.span).collect();
        let const_names: Vec<String> = p.constants().map(|c| c.name.clone()).collect();
        let const_order = const_order(&const_exprs, &funcs, &const_names, &const_spans)?;

        let mut shapes = Vec::new();
        for s in p.shapes() {
            let mut scope: Vec<(String, u32)> =
                s.params.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
            let mut next = s.params.len() as u32;
            let mut max = next;
            let body = lw.block(&s.body, &mut scope, &mut next, &mut max)?;
            shapes.push(ShapeIr { name: s.name.clone(), slots: max as usize, body });
        }

        let start = p.start().expect("checked");
        let start_args = start.args.iter().map(|a| lw.expr(a, &mut |_| None)).collect::<Result<_, _>>()?;
        Ok(Compiled {
            const_names,
            const_exprs,
            const_order,
            funcs,
            func_index: lw.funcs.clone(),
            shapes,
            start: lw.shapes[&start.name],
            start_args,
            start_span: start.span,
        })
    }

    fn block(
        &self,
        body: &[Stmt],
        scope: &mut Vec<(String, u32)>,
        next: &mut u32,
        max: &mut u32,
    ) -> Result<Vec<SIr>, SceneError> {
        let mark = scope.len();
        let slot_mark = *next;
        let mut out = Vec::with_capacity(body.len());
        for stmt in body {
            out.push(match stmt {
                Stmt::Loop { var, count, adjust, body, span } => {
                    let count = self.scoped(count, scope)?;
                    let adjust = self.adjust(adjust, scope)?;
                    let inner = scope.len();
                    let inner_slot = *next;
                    let var = var.as_ref().map(|v| {
                        let slot = alloc(next, max);
                        scope.push((v.clone(), slot));
                        slot
                    });
                    let body = self.block(body, scope, next, max)?;
                    scope.truncate(inner);
                    *next = inner_slot;
                    SIr::Loop { var, count, adjust, body, span: *span }
                }
                Stmt::If { cond, then_body, else_body, .. } => SIr::If {
                    cond: self.scoped(cond, scope)?,
                    then_body: self.block(then_body, scope, next, max)?,
                    else_body: match else_body {
                        Some(e) => self.block(e, scope, next, max)?,
                        None => Vec::new(),
                    },
                },
                Stmt::Bind { name, value, .. } => {
                    let value = self.scoped(value, scope)?;
                    let slot = alloc(next, max);
                    scope.push((name.clone(), slot));
                    SIr::Bind { slot, value }
                }
                Stmt::Prim { kind, adjust, .. } => SIr::Prim { kind: *kind, adjust: self.adjust(adjust, scope)? },
                Stmt::Call { name, args, adjust, span } => SIr::Call {
                    shape: self.shapes[name],
                    args: args.iter().map(|a| self.scoped(a, scope)).collect::<Result<_, _>>()?,
                    adjust: self.adjust(adjust, scope)?,
                    span: *span,
                },
            });
        }
        scope.truncate(mark);
        *next = slot_mark;
        Ok(out)
    }

    fn scoped(&self, e: &Expr, scope: &[(String, u32)]) -> Result<Ir, SceneError> {
        self.expr(e, &mut |n| scope.iter().rev().find(|(s, _)| s == n).map(|(_, i)| *i))
    }

    fn adjust(&self, adjust: &[Adjust], scope: &[(String, u32)]) -> Result<Vec<AdjIr>, SceneError> {
        adjust
            .iter()
            .map(|a| {
                Ok(AdjIr {
                    kind: a.kind,
                    values: a.values.iter().map(|v| self.scoped(v, scope)).collect::<Result<_, _>>()?,
                })
            })
            .collect()
    }

    fn expr(&self, e: &Expr, local: &mut Resolve) -> Result<Ir, SceneError> {
        Ok(match &e.kind {
            ExprKind::Num(v) => Ir::Num(*v),
            ExprKind::Var(name) => {
                if let Some(i) = local(name) {
                    Ir::Local(i)
                } else if let Some(&i) = self.consts.get(name) {
                    Ir::Const(i)
                } else {
                    return Err(SceneError::semantic(e.span, format!("unresolved name '{name}'")));
                }
            }
            ExprKind::Neg(a) => Ir::Neg(Box::new(self.expr(a, local)?)),
            ExprKind::Binary(op, a, b) => {
                Ir::Bin(*op, Box::new(self.expr(a, local)?), Box::new(self.expr(b, local)?), e.span)
            }
            ExprKind::If(c, a, b) => Ir::If(
                Box::new(self.expr(c, local)?),
                Box::new(self.expr(a, local)?),
                Box::new(self.expr(b, local)?),
            ),
            ExprKind::Rand(a, b) => Ir::Rand(Box::new(self.expr(a, local)?), Box::new(self.expr(b, local)?), e.span),
            ExprKind::Call(name, args) => {
                let Some(&f) = self.funcs.get(name) else {
                    return Err(SceneError::semantic(e.span, format!("unknown function '{name}'")));
                };
                let args = args.iter().map(|a| self.expr(a, local)).collect::<Result<Vec<_>, _>>()?;
                Ir::Call(f, args.into_boxed_slice(), e.span)
            }
        })
    }
}

fn alloc(next: &mut u32, max: &mut u32) -> u32 {
    let s = *next;
    *next += 1;
    *max = (*max).max(*next);
    s
}

fn refs(ir: &Ir, consts: &mut Vec<u32>, calls: &mut Vec<u32>) {
    match ir {
        Ir::Num(_) | Ir::Local(_) => {}
        Ir::Const(i) => consts.push(*i),
        Ir::Neg(a) => refs(a, consts, calls),
        Ir::Bin(_, a, b, _) | Ir::Rand(a, b, _) => {
            refs(a, consts, calls);
            refs(b, consts, calls);
        }
        Ir::If(c, a, b) => {
            refs(c, consts, calls);
            refs(a, consts, calls);
            refs(b, consts, calls);
        }
        Ir::Call(f, args, _) => {
            calls.push(*f);
            args.iter().for_each(|a| refs(a, consts, calls));
        }
    }
}

/// Evaluation order for constants, following references through function
/// bodies. Cycles are rejected.
fn const_order(exprs: &[Ir], funcs: &[Func], names: &[String], spans: &[Span]) -> Result<Vec<usize>, SceneError> {
    // constants reachable from each function, to a fixed point
    let mut direct: Vec<(Vec<u32>, Vec<u32>)> = funcs
        .iter()
        .map(|f| {
            let (mut c, mut g) = (Vec::new(), Vec::new());
            refs(&f.body, &mut c, &mut g);
            if let Some(l) = &f.escape {
                refs(l, &mut c, &mut g);
            }
            (c, g)
        })
        .collect();
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..direct.len() {
            let calls = direct[i].1.clone();
            for g in calls {
                let extra: Vec<u32> = direct[g as usize].0.clone();
                for c in extra {
                    if !direct[i].0.contains(&c) {
                        direct[i].0.push(c);
                        changed = true;
                    }
                }
            }
        }
    }

    let deps: Vec<Vec<u32>> = exprs
        .iter()
        .map(|e| {
            let (mut c, mut g) = (Vec::new(), Vec::new());
            refs(e, &mut c, &mut g);
            for f in g {
                c.extend_from_slice(&direct[f as usize].0);
            }
            c
        })
        .collect();

    // 0 = unvisited, 1 = in progress, 2 = done
    let mut state = vec![0u8; exprs.len()];
    let mut order = Vec::with_capacity(exprs.len());
    fn visit(
        i: usize,
        deps: &[Vec<u32>],
        state: &mut [u8],
        order: &mut Vec<usize>,
        names: &[String],
        spans: &[Span],
    ) -> Result<(), SceneError> {
        match state[i] {
            2 => return Ok(()),
            1 => return Err(SceneError::semantic(spans[i], format!("constant '{}' depends on itself", names[i]))),
            _ => {}
        }
        state[i] = 1;
        for &d in &deps[i] {
            visit(d as usize, deps, state, order, names, spans)?;
        }
        state[i] = 2;
        order.push(i);
        Ok(())
    }
    for i in 0..exprs.len() {
        visit(i, &deps, &mut state, &mut order, names, spans)?;
    }
    Ok(order)
}

fn is_local(ir: &Ir, i: u32) -> bool {
    matches!(ir, Ir::Local(j) if *j == i)
}

fn is_num(ir: &Ir, v: f64) -> bool {
    matches!(ir, Ir::Num(x) if *x == v)
}

fn bin(ir: &Ir, want: BinOp) -> Option<(&Ir, &Ir)> {
    match ir {
        Ir::Bin(op, a, b, _) if *op == want => Some((a, b)),
        _ => None,
    }
}

fn is_square(ir: &Ir, i: u32) -> bool {
    bin(ir, BinOp::Mul).is_some_and(|(a, b)| is_local(a, i) && is_local(b, i))
}

/// Recognises
/// `f(n, zr, zi, cr, ci) = if((n < M) && (zr*zr + zi*zi < 4),
///     f(n + 1, zr*zr - zi*zi + cr, 2*zr*zi + ci, cr, ci), n)`
/// with `M` a number or a constant, returning `M`.
fn recognise_escape(fid: u32, arity: usize, body: &Ir) -> Option<Ir> {
    if arity != 5 {
        return None;
    }
    let Ir::If(cond, then, other) = body else {
        return None;
    };
    if !is_local(other, 0) {
        return None;
    }
    let (left, right) = bin(cond, BinOp::And)?;
    let (n, limit) = bin(left, BinOp::Lt)?;
    if !is_local(n, 0) || !matches!(limit, Ir::Num(_) | Ir::Const(_)) {
        return None;
    }
    let (sum, four) = bin(right, BinOp::Lt)?;
    let (a, b) = bin(sum, BinOp::Add)?;
    if !(is_square(a, 1) && is_square(b, 2) && is_num(four, 4.0)) {
        return None;
    }
    let Ir::Call(g, args, _) = &**then else {
        return None;
    };
    if *g != fid || args.len() != 5 {
        return None;
    }
    let (n1, one) = bin(&args[0], BinOp::Add)?;
    let (diff, cr) = bin(&args[1], BinOp::Add)?;
    let (sq_r, sq_i) = bin(diff, BinOp::Sub)?;
    let (prod, ci) = bin(&args[2], BinOp::Add)?;
    let (two_zr, zi) = bin(prod, BinOp::Mul)?;
    let (two, zr) = bin(two_zr, BinOp::Mul)?;
    let ok = is_local(n1, 0)
        && is_num(one, 1.0)
        && is_square(sq_r, 1)
        && is_square(sq_i, 2)
        && is_local(cr, 3)
        && is_num(two, 2.0)
        && is_local(zr, 1)
        && is_local(zi, 2)
        && is_local(ci, 4)
        && is_local(&args[3], 3)
        && is_local(&args[4], 4);
    ok.then(|| limit.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::load;

    const STEPS: &str = "startshape s
        MAXSTEPS = 40
        steps(numSteps, z_r, z_i, c_r, c_i) =
          if((numSteps < MAXSTEPS) && (z_r*z_r+z_i*z_i<4),
            steps(numSteps+1,
              z_r*z_r - z_i*z_i + c_r, 2*z_r*z_i + c_i, c_r, c_i),
            numSteps)
        shape s {}";

    fn compiled(src: &str) -> Compiled {
        load(src).unwrap().1
    }

    fn eval_str(c: &Compiled, src: &str, bindings: &[(&str, f64)]) -> Result<f64, SceneError> {
        let toks = crate::scene::lexer::tokenize(src).unwrap();
        let e = crate::scene::parser::parse_expr(&toks).unwrap();
        c.eval_expr(&e, bindings, &mut RandStream::new(1), EscapePath::Interpreted)
    }

    #[test]
    fn escape_loop_is_recognised() {
        let c = compiled(STEPS);
        assert!(matches!(c.funcs[0].escape, Some(Ir::Const(0))));
        // a near miss is left to the interpreter
        let c = compiled(&STEPS.replace("2*z_r*z_i", "2*z_i*z_r"));
        assert!(c.funcs[0].escape.is_none());
    }

    #[test]
    fn steps_examples() {
        let c = compiled(STEPS);
        for path in [EscapePath::Native, EscapePath::Interpreted] {
            assert_eq!(c.call_function("steps", &[0.0; 5], path).unwrap(), 40.0);
            assert_eq!(c.call_function("steps", &[0.0, 2.0, 0.0, 0.0, 0.0], path).unwrap(), 0.0);
            assert_eq!(c.call_function("steps", &[0.0, 0.0, 0.0, 1.0, 0.0], path).unwrap(), 2.0);
            assert_eq!(c.call_function("steps", &[40.0, 0.0, 0.0, 0.0, 0.0], path).unwrap(), 40.0);
        }
    }

    #[test]
    fn arithmetic_and_logic() {
        let c = compiled("startshape s K = 3 shape s {}");
        assert_eq!(eval_str(&c, "1 + 2 * K", &[]).unwrap(), 7.0);
        assert_eq!(eval_str(&c, "(1 < 2) + (2 <= 2) + (3 > 4) + (1 == 1)", &[]).unwrap(), 3.0);
        assert_eq!(eval_str(&c, "if(a, 10, 20)", &[("a", 0.0)]).unwrap(), 20.0);
        assert_eq!(eval_str(&c, "-a - -a", &[("a", 2.5)]).unwrap(), 0.0);
        assert_eq!(eval_str(&c, "2 || 0", &[]).unwrap(), 1.0);
    }

    #[test]
    fn short_circuit_guards_division() {
        let c = compiled("startshape s shape s {}");
        assert_eq!(eval_str(&c, "(d > 0) && (1 / d > 0)", &[("d", 0.0)]).unwrap(), 0.0);
        assert_eq!(eval_str(&c, "(d == 0) || (1 / d > 0)", &[("d", 0.0)]).unwrap(), 1.0);
        assert_eq!(eval_str(&c, "if(d == 0, 0, 1 / d)", &[("d", 0.0)]).unwrap(), 0.0);
        let err = eval_str(&c, "1 / d", &[("d", 0.0)]).unwrap_err();
        assert_eq!(err.kind(), "eval");
        assert_eq!(err.message(), "division by zero");
        assert_eq!((err.span().line, err.span().col), (1, 3));
    }

    #[test]
    fn unbound_name() {
        let c = compiled("startshape s shape s {}");
        let err = eval_str(&c, "q + 1", &[]).unwrap_err();
        assert!(err.message().contains("'q'"));
    }

    #[test]
    fn rand_is_deterministic_per_stream() {
        let c = compiled("startshape s shape s {}");
        let e = crate::scene::parser::parse_expr(&crate::scene::lexer::tokenize("rand(0, 1) + rand(0, 1)").unwrap())
            .unwrap();
        let run = |key| {
            let mut rng = RandStream::new(key);
            (0..4).map(|_| c.eval_expr(&e, &[], &mut rng, EscapePath::Native).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn constants_resolve_in_dependency_order() {
        let c = compiled("startshape s A = B * 2 f(x) = x + C B = f(1) C = 10 shape s {}");
        let vals = c.constants(&VariationSeed::default()).unwrap();
        assert_eq!(vals, vec![("A".to_string(), 22.0), ("B".to_string(), 11.0), ("C".to_string(), 10.0)]);
    }

    #[test]
    fn constant_cycles_are_rejected() {
        let err = load("startshape s A = f(1) f(x) = x + A shape s {}").unwrap_err();
        assert!(err.message().contains("depends on itself"), "{err}");
        assert!(load("startshape s A = A shape s {}").is_err());
    }

    #[test]
    fn deep_tail_recursion_runs_in_constant_stack() {
        let c = compiled("startshape s count(n, acc) = if(n > 0, count(n - 1, acc + 1), acc) shape s {}");
        assert_eq!(c.call_function("count", &[5e6, 0.0], EscapePath::Native).unwrap(), 5e6);
    }

    #[test]
    fn recursion_cap() {
        let c = compiled("startshape s down(n) = if(n > 0, 1 + down(n - 1), 0) shape s {}");
        assert_eq!(c.call_function("down", &[10_000.0], EscapePath::Native).unwrap(), 10_000.0);
        let consts = [];
        let mut ctx = Ctx::new(&consts, RandStream::new(0));
        ctx.max_depth = 100;
        let err = c.call(0, vec![1000.0], Span::new(1, 1), &mut ctx).unwrap_err();
        assert_eq!(err.kind, super::super::error::EvalErrorKind::Limit);
        assert!(err.message.contains("recursion depth"));
    }

    #[test]
    fn loop_counts() {
        assert_eq!(loop_count(3.9, Span::default()).unwrap(), 3);
        assert_eq!(loop_count(0.0, Span::default()).unwrap(), 0);
        assert!(loop_count(-1.0, Span::default()).is_err());
        assert!(loop_count(f64::NAN, Span::default()).is_err());
        assert!(loop_count(f64::INFINITY, Span::default()).is_err());
    }
}
