//! Recursive-descent parser for the declaration language.
//!
//! ```text
//! file  ::= decl*
//! decl  ::= "data" IDENT ":" term "."
//!         | "symbol" IDENT ":" term "."
//!         | "rule" term "-->" term ("in" IDENT ":" term ("," IDENT ":" term)*)? "."
//!         | "assume" IDENT ":" term "."
//!         | "infer" term "."
//!         | "check" term ":" term "."
//!         | "annotate" IDENT "."
//! term  ::= "(" IDENT ":" term ")" term      products
//!         | "[" IDENT ":" term "]" term      abstractions
//!         | app ("->" term)?                 arrows associate right
//! app   ::= atom+                            associates left
//! atom  ::= IDENT ("^" annot)? | "Type" | "Kind" | "(" term ")"
//! annot ::= "oo" | IDENT | "(" size ")"
//! size  ::= "s" size | "oo" | IDENT | "(" size ")"
//! ```

use crate::ast::{Decl, SizeAst, SourceFile, Span, TermAst};
use crate::lexer::{lex, Tok, Token};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

pub fn parse_file(text: &str) -> Result<SourceFile, ParseError> {
    let (toks, eof) = lex(text).map_err(|e| ParseError {
        span: e.span,
        message: e.message,
    })?;
    let mut p = Parser { toks, pos: 0, eof };
    let mut decls = Vec::new();
    while !p.at_end() {
        decls.push(p.decl()?);
    }
    Ok(SourceFile { decls })
}

/// Parses a single term, for tests and tooling.
pub fn parse_term(text: &str) -> Result<TermAst, ParseError> {
    let (toks, eof) = lex(text).map_err(|e| ParseError {
        span: e.span,
        message: e.message,
    })?;
    let mut p = Parser { toks, pos: 0, eof };
    let t = p.term()?;
    if !p.at_end() {
        return Err(p.unexpected("end of input"));
    }
    Ok(t)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: Span,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.pos + n).map(|t| &t.tok)
    }

    fn here(&self) -> Span {
        self.toks.get(self.pos).map(|t| t.span).unwrap_or(self.eof)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let (span, got) = match self.toks.get(self.pos) {
            Some(t) => (t.span, t.tok.describe()),
            None => (self.eof, "end of input".into()),
        };
        ParseError {
            span,
            message: format!("expected {wanted}, found {got}"),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<Span, ParseError> {
        match self.peek() {
            Some(t) if *t == tok => Ok(self.bump().unwrap().span),
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<(String, Span), ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let t = self.bump().unwrap();
                match t.tok {
                    Tok::Ident(s) => Ok((s, t.span)),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn decl(&mut self) -> Result<Decl, ParseError> {
        let span = self.here();
        let (kw, _) = match self.peek() {
            Some(Tok::Ident(_)) => self.ident("a declaration")?,
            _ => return Err(self.unexpected(
                "a declaration (data, symbol, rule, assume, infer, check or annotate)",
            )),
        };
        let decl = match kw.as_str() {
            "data" | "symbol" | "assume" => {
                let (name, _) = self.ident("a name")?;
                self.expect(Tok::Colon, "`:`")?;
                let ty = self.term()?;
                match kw.as_str() {
                    "data" => Decl::Data { name, kind: ty, span },
                    "symbol" => Decl::Symbol { name, ty, span },
                    _ => Decl::Assume { name, ty, span },
                }
            }
            "rule" => {
                let lhs = self.term()?;
                self.expect(Tok::LongArrow, "`-->`")?;
                let rhs = self.term()?;
                let mut env = Vec::new();
                if self.peek() == Some(&Tok::In) {
                    self.bump();
                    loop {
                        let (x, _) = self.ident("a variable name")?;
                        self.expect(Tok::Colon, "`:`")?;
                        let ty = self.term()?;
                        env.push((x, ty));
                        if self.peek() == Some(&Tok::Comma) {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                Decl::Rule { lhs, rhs, env, span }
            }
            "infer" => Decl::Infer { term: self.term()?, span },
            "check" => {
                let term = self.term()?;
                self.expect(Tok::Colon, "`:`")?;
                let ty = self.term()?;
                Decl::Check { term, ty, span }
            }
            "annotate" => {
                let (name, _) = self.ident("a symbol name")?;
                Decl::Annotate { name, span }
            }
            other => {
                return Err(ParseError {
                    span,
                    message: format!(
                        "expected a declaration keyword, found `{other}`"
                    ),
                })
            }
        };
        self.expect(Tok::Dot, "`.` ending the declaration")?;
        Ok(decl)
    }

    fn term(&mut self) -> Result<TermAst, ParseError> {
        // product lookahead: `(` IDENT `:`
        if self.peek() == Some(&Tok::LParen)
            && matches!(self.peek_at(1), Some(Tok::Ident(_)))
            && self.peek_at(2) == Some(&Tok::Colon)
        {
            self.bump();
            let (x, _) = self.ident("a binder name")?;
            self.bump(); // colon
            let ty = self.term()?;
            self.expect(Tok::RParen, "`)`")?;
            let body = self.term()?;
            return Ok(TermAst::Prod(x, Box::new(ty), Box::new(body)));
        }
        if self.peek() == Some(&Tok::LBracket) {
            self.bump();
            let (x, _) = self.ident("a binder name")?;
            self.expect(Tok::Colon, "`:`")?;
            let ty = self.term()?;
            self.expect(Tok::RBracket, "`]`")?;
            let body = self.term()?;
            return Ok(TermAst::Abs(x, Box::new(ty), Box::new(body)));
        }
        let t = self.app()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let u = self.term()?;
            return Ok(TermAst::Arrow(Box::new(t), Box::new(u)));
        }
        Ok(t)
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::LParen))
    }

    fn app(&mut self) -> Result<TermAst, ParseError> {
        let mut t = self.atom()?;
        while self.starts_atom() {
            let u = self.atom()?;
            t = TermAst::App(Box::new(t), Box::new(u));
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<TermAst, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let (name, span) = self.ident("a term")?;
                match name.as_str() {
                    "Type" => Ok(TermAst::Type),
                    "Kind" => Ok(TermAst::Kind),
                    _ => {
                        if self.peek() == Some(&Tok::Caret) {
                            self.bump();
                            let a = self.annot()?;
                            Ok(TermAst::Ann(name, a, span))
                        } else {
                            Ok(TermAst::Ident(name, span))
                        }
                    }
                }
            }
            Some(Tok::LParen) => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    /// The size directly after `^`: an identifier, `oo`, or parenthesized.
    fn annot(&mut self) -> Result<SizeAst, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "s" => Err(ParseError {
                span: self.here(),
                message: "successor sizes must be parenthesized, as in `nat^(s a)`".into(),
            }),
            Some(Tok::Ident(_)) => {
                let (name, _) = self.ident("a size")?;
                Ok(if name == "oo" {
                    SizeAst::Infty
                } else {
                    SizeAst::Ident(name)
                })
            }
            Some(Tok::LParen) => {
                self.bump();
                let a = self.size()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(a)
            }
            _ => Err(self.unexpected("a size annotation")),
        }
    }

    fn size(&mut self) -> Result<SizeAst, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "s" => {
                self.bump();
                Ok(SizeAst::Succ(Box::new(self.size()?)))
            }
            Some(Tok::Ident(_)) => {
                let (name, _) = self.ident("a size")?;
                Ok(if name == "oo" {
                    SizeAst::Infty
                } else {
                    SizeAst::Ident(name)
                })
            }
            Some(Tok::LParen) => {
                self.bump();
                let a = self.size()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(a)
            }
            _ => Err(self.unexpected("a size")),
        }
    }
}
