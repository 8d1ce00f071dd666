use std::fmt;

/// Source position (1-based line and column).
///
/// Positions never take part in equality, so two programs compare equal
/// when they have the same structure regardless of layout.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Self { line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    StartShape(StartShape),
    Const(ConstDef),
    Func(FuncDef),
    Shape(ShapeDef),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartShape {
    pub name: String,
    pub args: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstDef {
    pub name: String,
    pub value: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuncDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimKind {
    Square,
    Fill,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Loop {
        var: Option<String>,
        count: Expr,
        adjust: Vec<Adjust>,
        body: Vec<Stmt>,
        span: Span,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Option<Vec<Stmt>>,
        span: Span,
    },
    Bind {
        name: String,
        value: Expr,
        span: Span,
    },
    Prim {
        kind: PrimKind,
        adjust: Vec<Adjust>,
        span: Span,
    },
    Call {
        name: String,
        args: Vec<Expr>,
        adjust: Vec<Adjust>,
        span: Span,
    },
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::Loop { span, .. }
            | Stmt::If { span, .. }
            | Stmt::Bind { span, .. }
            | Stmt::Prim { span, .. }
            | Stmt::Call { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjustKind {
    X,
    Y,
    Rotate,
    Size,
    Hue,
    Saturation,
    Brightness,
}

impl AdjustKind {
    /// Keyword spellings, canonical one first.
    pub fn from_keyword(word: &str) -> Option<AdjustKind> {
        Some(match word {
            "x" => AdjustKind::X,
            "y" => AdjustKind::Y,
            "r" => AdjustKind::Rotate,
            "size" | "s" => AdjustKind::Size,
            "h" | "hue" => AdjustKind::Hue,
            "sat" | "saturation" => AdjustKind::Saturation,
            "b" | "brightness" => AdjustKind::Brightness,
            _ => return None,
        })
    }

    pub fn keyword(self) -> &'static str {
        match self {
            AdjustKind::X => "x",
            AdjustKind::Y => "y",
            AdjustKind::Rotate => "r",
            AdjustKind::Size => "size",
            AdjustKind::Hue => "h",
            AdjustKind::Saturation => "sat",
            AdjustKind::Brightness => "b",
        }
    }

    /// `size w h` and `x dx dy` accept a second value.
    pub fn takes_second_value(self) -> bool {
        matches!(self, AdjustKind::Size | AdjustKind::X)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adjust {
    pub kind: AdjustKind,
    pub values: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Rand(Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }
}

impl Program {
    pub fn start(&self) -> Option<&StartShape> {
        self.items.iter().find_map(|i| match i {
            Item::StartShape(s) => Some(s),
            _ => None,
        })
    }

    pub fn constants(&self) -> impl Iterator<Item = &ConstDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Const(c) => Some(c),
            _ => None,
        })
    }

    pub fn functions(&self) -> impl Iterator<Item = &FuncDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Func(f) => Some(f),
            _ => None,
        })
    }

    pub fn shapes(&self) -> impl Iterator<Item = &ShapeDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Shape(s) => Some(s),
            _ => None,
        })
    }

    pub fn constant(&self, name: &str) -> Option<&ConstDef> {
        self.constants().find(|c| c.name == name)
    }

    pub fn shape(&self, name: &str) -> Option<&ShapeDef> {
        self.shapes().find(|s| s.name == name)
    }
}
