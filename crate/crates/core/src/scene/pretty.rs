//! Canonical formatting. The output parses back to a structurally
//! identical program.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";
const UNARY_PREC: u8 = 6;
const ATOM_PREC: u8 = 7;

pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    for item in &p.items {
        match item {
            Item::StartShape(s) => {
                out.push_str("startshape ");
                out.push_str(&s.name);
                if !s.args.is_empty() {
                    let _ = write!(out, "({})", expr_list(&s.args));
                }
            }
            Item::Const(c) => {
                let _ = write!(out, "{} = {}", c.name, expr(&c.value));
            }
            Item::Func(f) => {
                let _ = write!(out, "{}({}) = {}", f.name, f.params.join(", "), expr(&f.body));
            }
            Item::Shape(s) => {
                out.push_str("shape ");
                out.push_str(&s.name);
                if !s.params.is_empty() {
                    let _ = write!(out, "({})", s.params.join(", "));
                }
                out.push(' ');
                block(&mut out, &s.body, 0);
            }
        }
        out.push('\n');
    }
    out
}

fn block(out: &mut String, body: &[Stmt], depth: usize) {
    if body.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    for s in body {
        for _ in 0..=depth {
            out.push_str(INDENT);
        }
        stmt(out, s, depth + 1);
        out.push('\n');
    }
    for _ in 0..depth {
        out.push_str(INDENT);
    }
    out.push('}');
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    match s {
        Stmt::Loop { var, count, adjust, body, .. } => {
            out.push_str("loop ");
            if let Some(v) = var {
                let _ = write!(out, "{v} = ");
            }
            let _ = write!(out, "{} {} ", expr(count), adjust_list(adjust));
            block(out, body, depth);
        }
        Stmt::If { cond, then_body, else_body, .. } => {
            let _ = write!(out, "if ({}) ", expr(cond));
            block(out, then_body, depth);
            if let Some(e) = else_body {
                out.push_str(" else ");
                block(out, e, depth);
            }
        }
        Stmt::Bind { name, value, .. } => {
            let _ = write!(out, "{name} = {}", expr(value));
        }
        Stmt::Prim { kind, adjust, .. } => {
            out.push_str(match kind {
                PrimKind::Square => "SQUARE",
                PrimKind::Fill => "FILL",
            });
            out.push_str(&adjust_list(adjust));
        }
        Stmt::Call { name, args, adjust, .. } => {
            let _ = write!(out, "{name}({}){}", expr_list(args), adjust_list(adjust));
        }
    }
}

fn adjust_list(adjust: &[Adjust]) -> String {
    let parts: Vec<String> = adjust
        .iter()
        .map(|a| {
            let mut s = a.kind.keyword().to_string();
            for v in &a.values {
                s.push(' ');
                s.push_str(&expr(v));
            }
            s
        })
        .collect();
    format!("[{}]", parts.join(" "))
}

fn expr_list(args: &[Expr]) -> String {
    args.iter().map(expr).collect::<Vec<_>>().join(", ")
}

pub fn expr(e: &Expr) -> String {
    expr_prec(e, 0)
}

fn expr_prec(e: &Expr, parent: u8) -> String {
    let (text, prec) = match &e.kind {
        ExprKind::Num(v) => (format!("{v}"), ATOM_PREC),
        ExprKind::Var(name) => (name.clone(), ATOM_PREC),
        ExprKind::Neg(inner) => (format!("-{}", expr_prec(inner, UNARY_PREC)), UNARY_PREC),
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            (format!("{} {} {}", expr_prec(l, p), op.symbol(), expr_prec(r, p + 1)), p)
        }
        ExprKind::If(c, a, b) => (format!("if({}, {}, {})", expr(c), expr(a), expr(b)), ATOM_PREC),
        ExprKind::Rand(a, b) => (format!("rand({}, {})", expr(a), expr(b)), ATOM_PREC),
        ExprKind::Call(name, args) => (format!("{name}({})", expr_list(args)), ATOM_PREC),
    };
    if prec < parent {
        format!("({text})")
    } else {
        text
    }
}
