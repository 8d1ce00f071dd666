use std::fmt;

use super::ast::Span;
use super::error::SceneError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Startshape,
    Shape,
    Loop,
    If,
    Else,
    Square,
    Fill,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    AndAnd,
    OrOr,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident(name) => return write!(f, "identifier '{name}'"),
            TokenKind::Number(v) => return write!(f, "number {v}"),
            TokenKind::Startshape => "'startshape'",
            TokenKind::Shape => "'shape'",
            TokenKind::Loop => "'loop'",
            TokenKind::If => "'if'",
            TokenKind::Else => "'else'",
            TokenKind::Square => "'SQUARE'",
            TokenKind::Fill => "'FILL'",
            TokenKind::LParen => "'('",
            TokenKind::RParen => "')'",
            TokenKind::LBracket => "'['",
            TokenKind::RBracket => "']'",
            TokenKind::LBrace => "'{'",
            TokenKind::RBrace => "'}'",
            TokenKind::Comma => "','",
            TokenKind::Assign => "'='",
            TokenKind::Plus => "'+'",
            TokenKind::Minus => "'-'",
            TokenKind::Star => "'*'",
            TokenKind::Slash => "'/'",
            TokenKind::Lt => "'<'",
            TokenKind::Le => "'<='",
            TokenKind::Gt => "'>'",
            TokenKind::Ge => "'>='",
            TokenKind::EqEq => "'=='",
            TokenKind::AndAnd => "'&&'",
            TokenKind::OrOr => "'||'",
        };
        f.write_str(s)
    }
}

/// A token plus the whitespace around it. Adjustment lists need the
/// spacing to tell `x -CX -CY` (two values) from `x a - b` (one value).
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
    pub space_before: bool,
    pub space_after: bool,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, SceneError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens: Vec<Token> = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let mut space_before = true;

    while i < chars.len() {
        let ch = chars[i];
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            space_before = true;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            space_before = true;
            continue;
        }
        if ch == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            space_before = true;
            continue;
        }

        let span = Span::new(line, col);
        let start = i;
        let kind = if ch.is_ascii_alphabetic() || ch == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            keyword(&word).unwrap_or(TokenKind::Ident(word))
        } else if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            i = scan_number(&chars, i);
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<f64>().map_err(|_| SceneError::Lex {
                span,
                message: format!("malformed number '{text}'"),
            })?;
            TokenKind::Number(value)
        } else {
            let next = chars.get(i + 1).copied();
            let (kind, len) = match (ch, next) {
                ('<', Some('=')) => (TokenKind::Le, 2),
                ('>', Some('=')) => (TokenKind::Ge, 2),
                ('=', Some('=')) => (TokenKind::EqEq, 2),
                ('&', Some('&')) => (TokenKind::AndAnd, 2),
                ('|', Some('|')) => (TokenKind::OrOr, 2),
                ('<', _) => (TokenKind::Lt, 1),
                ('>', _) => (TokenKind::Gt, 1),
                ('=', _) => (TokenKind::Assign, 1),
                ('(', _) => (TokenKind::LParen, 1),
                (')', _) => (TokenKind::RParen, 1),
                ('[', _) => (TokenKind::LBracket, 1),
                (']', _) => (TokenKind::RBracket, 1),
                ('{', _) => (TokenKind::LBrace, 1),
                ('}', _) => (TokenKind::RBrace, 1),
                (',', _) => (TokenKind::Comma, 1),
                ('+', _) => (TokenKind::Plus, 1),
                ('-', _) => (TokenKind::Minus, 1),
                ('*', _) => (TokenKind::Star, 1),
                ('/', _) => (TokenKind::Slash, 1),
                _ => {
                    return Err(SceneError::Lex {
                        span,
                        message: format!("illegal character {ch:?}"),
                    })
                }
            };
            i += len;
            kind
        };
        col += (i - start) as u32;
        if let Some(prev) = tokens.last_mut() {
            prev.space_after = space_before;
        }
        tokens.push(Token { kind, span, space_before, space_after: true });
        space_before = false;
    }
    Ok(tokens)
}

fn scan_number(chars: &[char], mut i: usize) -> usize {
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    if i < chars.len() && chars[i] == '.' {
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

fn keyword(word: &str) -> Option<TokenKind> {
    Some(match word {
        "startshape" => TokenKind::Startshape,
        "shape" => TokenKind::Shape,
        "loop" => TokenKind::Loop,
        "if" => TokenKind::If,
        "else" => TokenKind::Else,
        "SQUARE" => TokenKind::Square,
        "FILL" => TokenKind::Fill,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn loop_header() {
        assert_eq!(
            kinds("loop i = (LIMIT) [] {"),
            vec![
                Loop,
                Ident("i".into()),
                Assign,
                LParen,
                Ident("LIMIT".into()),
                RParen,
                LBracket,
                RBracket,
                LBrace
            ]
        );
    }

    #[test]
    fn empty_source() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("  # only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn signed_seed() {
        assert_eq!(kinds("0.39, -0.252857"), vec![Number(0.39), Comma, Minus, Number(0.252857)]);
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("LIMIT = 1000 # Image resolution\nMAXSTEPS = 40").unwrap();
        assert_eq!(toks.len(), 6);
        assert_eq!((toks[3].span.line, toks[3].span.col), (2, 1));
        assert_eq!(toks[3].kind, Ident("MAXSTEPS".into()));
    }

    #[test]
    fn operators_and_keywords() {
        assert_eq!(
            kinds("a<=b>=c==d&&e||f<g>h SQUARE FILL square z_r"),
            vec![
                Ident("a".into()),
                Le,
                Ident("b".into()),
                Ge,
                Ident("c".into()),
                EqEq,
                Ident("d".into()),
                AndAnd,
                Ident("e".into()),
                OrOr,
                Ident("f".into()),
                Lt,
                Ident("g".into()),
                Gt,
                Ident("h".into()),
                Square,
                Fill,
                Ident("square".into()),
                Ident("z_r".into()),
            ]
        );
        assert_eq!(kinds("1e3 .5 2.5E-1"), vec![Number(1000.0), Number(0.5), Number(0.25)]);
    }

    #[test]
    fn minus_spacing() {
        let toks = tokenize("x -CX -CY").unwrap();
        assert!(toks[1].space_before && !toks[1].space_after);
        let toks = tokenize("a - b").unwrap();
        assert!(toks[1].space_before && toks[1].space_after);
    }

    #[test]
    fn illegal_character() {
        let err = tokenize("shape s {\n  SQUARE[b 1] @\n}").unwrap_err();
        match err {
            SceneError::Lex { span, .. } => assert_eq!((span.line, span.col), (2, 15)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(tokenize("a & b").is_err());
    }
}
