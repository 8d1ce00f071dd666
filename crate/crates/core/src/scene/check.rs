//! Semantic validation run after parsing: a single start shape, unique
//! definitions, and every name and call resolving with the right arity.

use std::collections::HashMap;

use super::ast::*;
use super::error::SceneError;

pub fn check(program: &Program) -> Result<(), SceneError> {
    let mut start: Option<&StartShape> = None;
    let mut consts: HashMap<&str, Span> = HashMap::new();
    let mut funcs: HashMap<&str, usize> = HashMap::new();
    let mut shapes: HashMap<&str, usize> = HashMap::new();

    for item in &program.items {
        match item {
            Item::StartShape(s) => {
                if start.is_some() {
                    return Err(SceneError::semantic(s.span, "duplicate startshape directive"));
                }
                start = Some(s);
            }
            Item::Const(c) => {
                if consts.insert(&c.name, c.span).is_some() {
                    return Err(SceneError::semantic(c.span, format!("duplicate constant '{}'", c.name)));
                }
            }
            Item::Func(f) => {
                if funcs.insert(&f.name, f.params.len()).is_some() {
                    return Err(SceneError::semantic(f.span, format!("duplicate function '{}'", f.name)));
                }
                unique_params(&f.params, f.span)?;
            }
            Item::Shape(s) => {
                if shapes.insert(&s.name, s.params.len()).is_some() {
                    return Err(SceneError::semantic(s.span, format!("duplicate shape '{}'", s.name)));
                }
                unique_params(&s.params, s.span)?;
            }
        }
    }

    let Some(start) = start else {
        return Err(SceneError::semantic(Span::new(1, 1), "missing startshape"));
    };

    let ctx = Checker { consts: &consts, funcs: &funcs, shapes: &shapes };
    match shapes.get(start.name.as_str()) {
        None => {
            return Err(SceneError::semantic(
                start.span,
                format!("startshape refers to unknown shape '{}'", start.name),
            ))
        }
        Some(&n) if n != start.args.len() => {
            return Err(SceneError::semantic(
                start.span,
                format!("shape '{}' takes {n} arguments, startshape passes {}", start.name, start.args.len()),
            ))
        }
        _ => {}
    }
    let mut scope = Vec::new();
    for a in &start.args {
        ctx.expr(a, &scope)?;
    }

    for item in &program.items {
        match item {
            Item::Const(c) => ctx.expr(&c.value, &scope)?,
            Item::Func(f) => {
                scope = f.params.iter().map(String::as_str).collect();
                ctx.expr(&f.body, &scope)?;
                scope.clear();
            }
            Item::Shape(s) => {
                scope = s.params.iter().map(String::as_str).collect();
                ctx.block(&s.body, &mut scope)?;
                scope.clear();
            }
            Item::StartShape(_) => {}
        }
    }
    Ok(())
}

fn unique_params(params: &[String], span: Span) -> Result<(), SceneError> {
    for (i, p) in params.iter().enumerate() {
        if params[..i].contains(p) {
            return Err(SceneError::semantic(span, format!("duplicate parameter '{p}'")));
        }
    }
    Ok(())
}

struct Checker<'a> {
    consts: &'a HashMap<&'a str, Span>,
    funcs: &'a HashMap<&'a str, usize>,
    shapes: &'a HashMap<&'a str, usize>,
}

impl<'a> Checker<'a> {
    fn block<'p>(&self, body: &'p [Stmt], scope: &mut Vec<&'p str>) -> Result<(), SceneError> {
        let mark = scope.len();
        for stmt in body {
            match stmt {
                Stmt::Loop { var, count, adjust, body, .. } => {
                    self.expr(count, scope)?;
                    self.adjust(adjust, scope)?;
                    let inner = scope.len();
                    if let Some(v) = var {
                        scope.push(v);
                    }
                    self.block(body, scope)?;
                    scope.truncate(inner);
                }
                Stmt::If { cond, then_body, else_body, .. } => {
                    self.expr(cond, scope)?;
                    self.block(then_body, scope)?;
                    if let Some(e) = else_body {
                        self.block(e, scope)?;
                    }
                }
                Stmt::Bind { name, value, .. } => {
                    self.expr(value, scope)?;
                    scope.push(name);
                }
                Stmt::Prim { adjust, .. } => self.adjust(adjust, scope)?,
                Stmt::Call { name, args, adjust, span } => {
                    match self.shapes.get(name.as_str()) {
                        None => return Err(SceneError::semantic(*span, format!("unknown shape '{name}'"))),
                        Some(&n) if n != args.len() => {
                            return Err(SceneError::semantic(
                                *span,
                                format!("shape '{name}' takes {n} arguments, got {}", args.len()),
                            ))
                        }
                        _ => {}
                    }
                    for a in args {
                        self.expr(a, scope)?;
                    }
                    self.adjust(adjust, scope)?;
                }
            }
        }
        scope.truncate(mark);
        Ok(())
    }

    fn adjust(&self, adjust: &[Adjust], scope: &[&str]) -> Result<(), SceneError> {
        for a in adjust {
            for v in &a.values {
                self.expr(v, scope)?;
            }
        }
        Ok(())
    }

    fn expr(&self, e: &Expr, scope: &[&str]) -> Result<(), SceneError> {
        match &e.kind {
            ExprKind::Num(_) => Ok(()),
            ExprKind::Var(name) => {
                if scope.contains(&name.as_str()) || self.consts.contains_key(name.as_str()) {
                    Ok(())
                } else {
                    Err(SceneError::semantic(e.span, format!("unresolved name '{name}'")))
                }
            }
            ExprKind::Neg(a) => self.expr(a, scope),
            ExprKind::Binary(_, a, b) | ExprKind::Rand(a, b) => {
                self.expr(a, scope)?;
                self.expr(b, scope)
            }
            ExprKind::If(c, a, b) => {
                self.expr(c, scope)?;
                self.expr(a, scope)?;
                self.expr(b, scope)
            }
            ExprKind::Call(name, args) => {
                match self.funcs.get(name.as_str()) {
                    None => return Err(SceneError::semantic(e.span, format!("unknown function '{name}'"))),
                    Some(&n) if n != args.len() => {
                        return Err(SceneError::semantic(
                            e.span,
                            format!("function '{name}' takes {n} arguments, got {}", args.len()),
                        ))
                    }
                    _ => {}
                }
                args.iter().try_for_each(|a| self.expr(a, scope))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{lexer::tokenize, parser::parse};

    fn run(src: &str) -> Result<(), SceneError> {
        check(&parse(&tokenize(src)?)?)
    }

    fn message(src: &str) -> String {
        run(src).unwrap_err().message()
    }

    #[test]
    fn missing_startshape() {
        assert_eq!(message("shape s {}"), "missing startshape");
    }

    #[test]
    fn duplicates() {
        assert!(message("startshape s startshape s shape s {}").contains("duplicate startshape"));
        assert!(message("startshape s A = 1 A = 2 shape s {}").contains("duplicate constant"));
        assert!(message("startshape s shape s {} shape s {}").contains("duplicate shape"));
        assert!(message("startshape s f(a, a) = a shape s {}").contains("duplicate parameter"));
        // same name in different kinds is fine
        run("startshape s s = 1 s(a) = a shape s {}").unwrap();
    }

    #[test]
    fn resolution() {
        assert!(message("startshape s shape s { SQUARE[x q] }").contains("unresolved name 'q'"));
        assert!(message("startshape s shape s { t()[] }").contains("unknown shape 't'"));
        assert!(message("startshape s shape s { v = g(1) }").contains("unknown function 'g'"));
        assert!(message("startshape s(1) shape s {}").contains("takes 0 arguments"));
        assert!(message("startshape q shape s {}").contains("unknown shape 'q'"));
        assert!(message("startshape s f(a) = a shape s { v = f(1, 2) }").contains("takes 1 arguments"));
    }

    #[test]
    fn scoping() {
        run("startshape s(1) shape s(p) { loop i = 3 [] { v = i + p SQUARE[x v] } }").unwrap();
        // loop variable does not leak out of the body
        assert!(message("startshape s shape s { loop i = 3 [] {} SQUARE[x i] }").contains("'i'"));
        // a binding is visible only after its statement
        assert!(message("startshape s shape s { SQUARE[x v] v = 1 }").contains("'v'"));
        // bindings inside an if-body stay there
        assert!(message("startshape s shape s { if (1) { v = 1 } SQUARE[x v] }").contains("'v'"));
        // function bodies see parameters and constants only
        assert!(message("startshape s K = 2 f(a) = a * K + b shape s {}").contains("'b'"));
    }
}
