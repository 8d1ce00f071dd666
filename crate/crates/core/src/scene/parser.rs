//! Recursive-descent parser for scene files.
//!
//! ```text
//! program    := item* ;
//! item       := startshape | constdef | funcdef | shapedef ;
//! startshape := "startshape" IDENT [ "(" exprlist ")" ] ;
//! constdef   := IDENT "=" expr ;
//! funcdef    := IDENT "(" identlist ")" "=" expr ;
//! shapedef   := "shape" IDENT [ "(" identlist ")" ] "{" stmt* "}" ;
//! stmt       := loop | cond | localbind | prim | call ;
//! loop       := "loop" [ IDENT "=" ] expr "[" adjust* "]" "{" stmt* "}" ;
//! cond       := "if" "(" expr ")" "{" stmt* "}" [ "else" "{" stmt* "}" ] ;
//! localbind  := IDENT "=" expr ;
//! prim       := ("SQUARE" | "FILL") "[" adjust* "]" ;
//! call       := IDENT "(" exprlist ")" "[" adjust* "]" ;
//! adjust     := keyword expr [ expr ] ;
//! ```
//!
//! Inside an adjustment list a `-` with whitespace before it and none after
//! it starts a new value instead of continuing a subtraction, so
//! `x -CX -CY` reads as two values.

use super::ast::*;
use super::error::SceneError;
use super::lexer::{Token, TokenKind};

pub fn parse(tokens: &[Token]) -> Result<Program, SceneError> {
    let mut p = Parser { toks: tokens, pos: 0 };
    let mut items = Vec::new();
    while !p.at_end() {
        items.push(p.item()?);
    }
    Ok(Program { items })
}

/// Parses a single expression, for callers that evaluate ad-hoc formulas.
pub fn parse_expr(tokens: &[Token]) -> Result<Expr, SceneError> {
    let mut p = Parser { toks: tokens, pos: 0 };
    let e = p.expr(0, false)?;
    if !p.at_end() {
        return Err(p.unexpected("end of expression"));
    }
    Ok(e)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&'a TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn peek_kind_at(&self, offset: usize) -> Option<&'a TokenKind> {
        self.toks.get(self.pos + offset).map(|t| &t.kind)
    }

    fn span(&self) -> Span {
        match self.peek() {
            Some(t) => t.span,
            None => self
                .toks
                .last()
                .map(|t| Span::new(t.span.line, t.span.col + 1))
                .unwrap_or(Span::new(1, 1)),
        }
    }

    fn unexpected(&self, expected: impl Into<String>) -> SceneError {
        SceneError::Syntax {
            span: self.span(),
            expected: expected.into(),
            found: self
                .peek()
                .map(|t| t.kind.to_string())
                .unwrap_or_else(|| "end of input".to_string()),
        }
    }

    fn bump(&mut self) -> &'a Token {
        let t = &self.toks[self.pos];
        self.pos += 1;
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_kind() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Span, SceneError> {
        if self.peek_kind() == Some(&kind) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(kind.to_string()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), SceneError> {
        match self.peek_kind() {
            Some(TokenKind::Ident(name)) => {
                let span = self.bump().span;
                Ok((name.clone(), span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn item(&mut self) -> Result<Item, SceneError> {
        match self.peek_kind() {
            Some(TokenKind::Startshape) => {
                let span = self.bump().span;
                let (name, _) = self.ident("start shape name")?;
                let args = if self.eat(&TokenKind::LParen) { self.expr_list()? } else { Vec::new() };
                Ok(Item::StartShape(StartShape { name, args, span }))
            }
            Some(TokenKind::Shape) => {
                let span = self.bump().span;
                let (name, _) = self.ident("shape name")?;
                let params = if self.eat(&TokenKind::LParen) { self.ident_list()? } else { Vec::new() };
                let body = self.block()?;
                Ok(Item::Shape(ShapeDef { name, params, body, span }))
            }
            Some(TokenKind::Ident(_)) => {
                let (name, span) = self.ident("definition")?;
                if self.eat(&TokenKind::Assign) {
                    let value = self.expr(0, false)?;
                    Ok(Item::Const(ConstDef { name, value, span }))
                } else if self.eat(&TokenKind::LParen) {
                    let params = self.ident_list()?;
                    self.expect(TokenKind::Assign)?;
                    let body = self.expr(0, false)?;
                    Ok(Item::Func(FuncDef { name, params, body, span }))
                } else {
                    Err(self.unexpected("'=' or '(' after definition name"))
                }
            }
            _ => Err(self.unexpected("'startshape', 'shape', or a definition")),
        }
    }

    /// Parameter names after an already-consumed `(`.
    fn ident_list(&mut self) -> Result<Vec<String>, SceneError> {
        let mut names = Vec::new();
        if self.eat(&TokenKind::RParen) {
            return Ok(names);
        }
        loop {
            names.push(self.ident("parameter name")?.0);
            if self.eat(&TokenKind::Comma) {
                continue;
            }
            self.expect(TokenKind::RParen)?;
            return Ok(names);
        }
    }

    /// Arguments after an already-consumed `(`.
    fn expr_list(&mut self) -> Result<Vec<Expr>, SceneError> {
        let mut args = Vec::new();
        if self.eat(&TokenKind::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr(0, false)?);
            if self.eat(&TokenKind::Comma) {
                continue;
            }
            self.expect(TokenKind::RParen)?;
            return Ok(args);
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, SceneError> {
        self.expect(TokenKind::LBrace)?;
        let mut body = Vec::new();
        while !self.eat(&TokenKind::RBrace) {
            if self.at_end() {
                return Err(self.unexpected("'}'"));
            }
            body.push(self.stmt()?);
        }
        Ok(body)
    }

    fn stmt(&mut self) -> Result<Stmt, SceneError> {
        let span = self.span();
        match self.peek_kind() {
            Some(TokenKind::Loop) => {
                self.bump();
                let var = match (self.peek_kind(), self.peek_kind_at(1)) {
                    (Some(TokenKind::Ident(name)), Some(TokenKind::Assign)) => {
                        let name = name.clone();
                        self.pos += 2;
                        Some(name)
                    }
                    _ => None,
                };
                let count = self.expr(0, false)?;
                let adjust = self.adjust_list()?;
                let body = self.block()?;
                Ok(Stmt::Loop { var, count, adjust, body, span })
            }
            Some(TokenKind::If) => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let cond = self.expr(0, false)?;
                self.expect(TokenKind::RParen)?;
                let then_body = self.block()?;
                let else_body = if self.eat(&TokenKind::Else) { Some(self.block()?) } else { None };
                Ok(Stmt::If { cond, then_body, else_body, span })
            }
            Some(TokenKind::Square) | Some(TokenKind::Fill) => {
                let kind = if self.bump().kind == TokenKind::Square { PrimKind::Square } else { PrimKind::Fill };
                let adjust = self.adjust_list()?;
                Ok(Stmt::Prim { kind, adjust, span })
            }
            Some(TokenKind::Ident(_)) => {
                let (name, _) = self.ident("statement")?;
                if self.eat(&TokenKind::Assign) {
                    let value = self.expr(0, false)?;
                    Ok(Stmt::Bind { name, value, span })
                } else if self.eat(&TokenKind::LParen) {
                    let args = self.expr_list()?;
                    let adjust = self.adjust_list()?;
                    Ok(Stmt::Call { name, args, adjust, span })
                } else {
                    Err(self.unexpected(format!("'=' or '(' after '{name}'")))
                }
            }
            _ => Err(self.unexpected("statement or '}'")),
        }
    }

    fn adjust_list(&mut self) -> Result<Vec<Adjust>, SceneError> {
        self.expect(TokenKind::LBracket)?;
        let mut out = Vec::new();
        while !self.eat(&TokenKind::RBracket) {
            let span = self.span();
            let kind = match self.peek_kind() {
                Some(TokenKind::Ident(word)) => AdjustKind::from_keyword(word),
                _ => None,
            };
            let Some(kind) = kind else {
                return Err(self.unexpected("adjustment keyword or ']'"));
            };
            self.bump();
            if !self.starts_value() {
                return Err(self.unexpected(format!(
                    "value expression for adjustment '{}'",
                    kind.keyword()
                )));
            }
            let mut values = vec![self.expr(0, true)?];
            if kind.takes_second_value() && self.starts_value() {
                values.push(self.expr(0, true)?);
            }
            out.push(Adjust { kind, values, span });
        }
        Ok(out)
    }

    /// Whether the next token can begin an adjustment value.
    fn starts_value(&self) -> bool {
        match self.peek_kind() {
            Some(TokenKind::Ident(word)) => AdjustKind::from_keyword(word).is_none(),
            Some(TokenKind::Number(_)) | Some(TokenKind::LParen) | Some(TokenKind::Minus) => true,
            Some(TokenKind::If) => self.peek_kind_at(1) == Some(&TokenKind::LParen),
            _ => false,
        }
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek_kind()? {
            TokenKind::OrOr => BinOp::Or,
            TokenKind::AndAnd => BinOp::And,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            TokenKind::EqEq => BinOp::Eq,
            TokenKind::Plus => BinOp::Add,
            TokenKind::Minus => BinOp::Sub,
            TokenKind::Star => BinOp::Mul,
            TokenKind::Slash => BinOp::Div,
            _ => return None,
        })
    }

    fn expr(&mut self, min_prec: u8, in_adjust: bool) -> Result<Expr, SceneError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            if op.precedence() < min_prec {
                break;
            }
            let tok = self.peek().expect("binop implies a token");
            let span = tok.span;
            if in_adjust && op == BinOp::Sub && tok.space_before && !tok.space_after {
                break;
            }
            self.bump();
            let rhs = self.expr(op.precedence() + 1, in_adjust)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SceneError> {
        if self.peek_kind() == Some(&TokenKind::Minus) {
            let span = self.bump().span;
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, SceneError> {
        let span = self.span();
        match self.peek_kind() {
            Some(TokenKind::Number(v)) => {
                let v = *v;
                self.bump();
                Ok(Expr::new(ExprKind::Num(v), span))
            }
            Some(TokenKind::LParen) => {
                self.bump();
                let e = self.expr(0, false)?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            Some(TokenKind::If) if self.peek_kind_at(1) == Some(&TokenKind::LParen) => {
                self.pos += 2;
                let mut args = self.expr_list()?;
                if args.len() != 3 {
                    return Err(SceneError::Syntax {
                        span,
                        expected: "if(condition, then, else) with 3 arguments".into(),
                        found: format!("{} arguments", args.len()),
                    });
                }
                let c = args.remove(0);
                let a = args.remove(0);
                let b = args.remove(0);
                Ok(Expr::new(ExprKind::If(Box::new(c), Box::new(a), Box::new(b)), span))
            }
            Some(TokenKind::Ident(name)) => {
                let name = name.clone();
                self.bump();
                if !self.eat(&TokenKind::LParen) {
                    return Ok(Expr::new(ExprKind::Var(name), span));
                }
                let mut args = self.expr_list()?;
                if name == "rand" {
                    if args.len() != 2 {
                        return Err(SceneError::Syntax {
                            span,
                            expected: "rand(low, high) with 2 arguments".into(),
                            found: format!("{} arguments", args.len()),
                        });
                    }
                    let lo = args.remove(0);
                    let hi = args.remove(0);
                    return Ok(Expr::new(ExprKind::Rand(Box::new(lo), Box::new(hi)), span));
                }
                Ok(Expr::new(ExprKind::Call(name, args), span))
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::lexer::tokenize;

    fn prog(src: &str) -> Result<Program, SceneError> {
        parse(&tokenize(src)?)
    }

    fn expr(src: &str) -> Expr {
        parse_expr(&tokenize(src).unwrap()).unwrap()
    }

    fn syntax_line(src: &str) -> (u32, String) {
        match prog(src) {
            Err(SceneError::Syntax { span, expected, .. }) => (span.line, expected),
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_program() {
        let p = prog("startshape s  shape s {}").unwrap();
        assert_eq!(p.items.len(), 2);
        assert_eq!(p.start().unwrap().name, "s");
        assert!(p.shape("s").unwrap().body.is_empty());
    }

    #[test]
    fn adjustment_without_value() {
        let (line, expected) = syntax_line("shape s { SQUARE[x] }");
        assert_eq!(line, 1);
        assert!(expected.contains("adjustment 'x'"), "{expected}");
    }

    #[test]
    fn precedence() {
        let e = expr("1 + 2 * 3 < 4 && 5 || 6");
        let ExprKind::Binary(BinOp::Or, lhs, _) = e.kind else { panic!() };
        let ExprKind::Binary(BinOp::And, cmp, _) = lhs.kind else { panic!() };
        let ExprKind::Binary(BinOp::Lt, sum, _) = cmp.kind else { panic!() };
        let ExprKind::Binary(BinOp::Add, _, prod) = sum.kind else { panic!() };
        assert!(matches!(prod.kind, ExprKind::Binary(BinOp::Mul, _, _)));
        // left associativity
        let e = expr("8 - 4 - 2");
        let ExprKind::Binary(BinOp::Sub, lhs, rhs) = e.kind else { panic!() };
        assert!(matches!(lhs.kind, ExprKind::Binary(BinOp::Sub, _, _)));
        assert_eq!(rhs.kind, ExprKind::Num(2.0));
    }

    #[test]
    fn unary_binds_tighter_than_binary() {
        let e = expr("-a * b");
        let ExprKind::Binary(BinOp::Mul, lhs, _) = e.kind else { panic!() };
        assert!(matches!(lhs.kind, ExprKind::Neg(_)));
    }

    #[test]
    fn two_valued_translation() {
        let p = prog("startshape b shape b { s()[r 120 x -CX -CY] } shape s {}").unwrap();
        let Stmt::Call { adjust, .. } = &p.shape("b").unwrap().body[0] else { panic!() };
        assert_eq!(adjust.len(), 2);
        assert_eq!(adjust[1].kind, AdjustKind::X);
        assert_eq!(adjust[1].values.len(), 2);
        assert!(matches!(adjust[1].values[0].kind, ExprKind::Neg(_)));
        assert!(matches!(adjust[1].values[1].kind, ExprKind::Neg(_)));

        // spaced minus stays a subtraction
        let p = prog("startshape b shape b { SQUARE[x a - b] }").unwrap();
        let Stmt::Prim { adjust, .. } = &p.shape("b").unwrap().body[0] else { panic!() };
        assert_eq!(adjust[0].values.len(), 1);
        assert!(matches!(adjust[0].values[0].kind, ExprKind::Binary(BinOp::Sub, _, _)));
    }

    #[test]
    fn size_takes_two_values_others_one() {
        let p = prog("startshape b shape b { SQUARE[size W H b 0.9] SQUARE[s 2] }").unwrap();
        let Stmt::Prim { adjust, .. } = &p.shape("b").unwrap().body[0] else { panic!() };
        assert_eq!(adjust.len(), 2);
        assert_eq!(adjust[0].values.len(), 2);
        assert_eq!(adjust[1].kind, AdjustKind::Brightness);
        let err = prog("startshape b shape b { SQUARE[b 1 2] }").unwrap_err();
        assert_eq!(err.kind(), "syntax");
    }

    #[test]
    fn statements() {
        let src = "startshape s
            shape s(a) {
                loop i = (N) [] { v = i * 2  SQUARE[x v] }
                loop 3 [r 10] { FILL[b 1] }
                if (a == 1) { t(1)[] } else { SQUARE[] }
            }
            shape t(k) {}";
        let p = prog(src).unwrap();
        let body = &p.shape("s").unwrap().body;
        assert_eq!(body.len(), 3);
        assert!(matches!(&body[0], Stmt::Loop { var: Some(v), .. } if v == "i"));
        assert!(matches!(&body[1], Stmt::Loop { var: None, adjust, .. } if adjust.len() == 1));
        assert!(matches!(&body[2], Stmt::If { else_body: Some(_), .. }));
    }

    #[test]
    fn error_lines() {
        assert_eq!(syntax_line("startshape s\nshape s {\n  SQUARE[b 1\n}\n").0, 4);
        assert_eq!(syntax_line("A = 1\nB = (2 +\n").0, 2);
        assert_eq!(syntax_line("startshape s\n\nshape s {\n  loop i = 3 {\n  }\n}").0, 4);
        let (_, expected) = syntax_line("x = if(1, 2)");
        assert!(expected.contains("3 arguments"));
    }

    #[test]
    fn rand_and_calls() {
        let e = expr("rand(60, 74) + f(1, 2, 3)");
        let ExprKind::Binary(_, lhs, rhs) = e.kind else { panic!() };
        assert!(matches!(lhs.kind, ExprKind::Rand(_, _)));
        assert!(matches!(rhs.kind, ExprKind::Call(ref n, ref a) if n == "f" && a.len() == 3));
    }
}
