//! Surface syntax trees, straight out of the parser.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    /// 1-based.
    pub line: u32,
    /// 1-based column in characters.
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SizeAst {
    Infty,
    Ident(String),
    Succ(Box<SizeAst>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermAst {
    Type,
    Kind,
    /// Variable or symbol; which one is the resolver's business.
    Ident(String, Span),
    /// `C^a`
    Ann(String, SizeAst, Span),
    /// `(x : T) U`
    Prod(String, Box<TermAst>, Box<TermAst>),
    /// `T -> U`
    Arrow(Box<TermAst>, Box<TermAst>),
    /// `[x : T] u`
    Abs(String, Box<TermAst>, Box<TermAst>),
    App(Box<TermAst>, Box<TermAst>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    /// `data C : K .`
    Data { name: String, kind: TermAst, span: Span },
    /// `symbol f : T .`
    Symbol { name: String, ty: TermAst, span: Span },
    /// `rule L --> R in x : T, ... .`
    Rule {
        lhs: TermAst,
        rhs: TermAst,
        env: Vec<(String, TermAst)>,
        span: Span,
    },
    /// `assume x : T .`
    Assume { name: String, ty: TermAst, span: Span },
    /// `infer t .`
    Infer { term: TermAst, span: Span },
    /// `check t : T .`
    Check { term: TermAst, ty: TermAst, span: Span },
    /// `annotate f .`
    Annotate { name: String, span: Span },
}

impl Decl {
    pub fn span(&self) -> Span {
        match self {
            Decl::Data { span, .. }
            | Decl::Symbol { span, .. }
            | Decl::Rule { span, .. }
            | Decl::Assume { span, .. }
            | Decl::Infer { span, .. }
            | Decl::Check { span, .. }
            | Decl::Annotate { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
}
