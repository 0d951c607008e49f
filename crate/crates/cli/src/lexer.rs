//! Tokenizer. Identifiers are runs of letters, digits, `_` and `'`, so
//! symbol names like `0` are ordinary identifiers. `--` starts a comment
//! unless it is the rule arrow `-->`.

use crate::ast::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `in`, reserved so a rule environment terminates the right-hand side.
    In,
    Dot,
    Colon,
    Comma,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    /// `->`
    Arrow,
    /// `-->`
    LongArrow,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::In => "`in`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LongArrow => "`-->`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(text: &str) -> Result<(Vec<Token>, Span), LexError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        let advance = |i: &mut usize, line: &mut u32, col: &mut u32| {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
            continue;
        }
        if c == '-' {
            if chars.get(i + 1) == Some(&'-') {
                if chars.get(i + 2) == Some(&'>') {
                    toks.push(Token { tok: Tok::LongArrow, span });
                    for _ in 0..3 {
                        advance(&mut i, &mut line, &mut col);
                    }
                } else {
                    // comment to end of line
                    while i < chars.len() && chars[i] != '\n' {
                        advance(&mut i, &mut line, &mut col);
                    }
                }
                continue;
            }
            if chars.get(i + 1) == Some(&'>') {
                toks.push(Token { tok: Tok::Arrow, span });
                advance(&mut i, &mut line, &mut col);
                advance(&mut i, &mut line, &mut col);
                continue;
            }
            return Err(LexError {
                span,
                message: "stray `-` (did you mean `->`, `-->` or a `--` comment?)".into(),
            });
        }
        let single = match c {
            '.' => Some(Tok::Dot),
            ':' => Some(Tok::Colon),
            ',' => Some(Tok::Comma),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            _ => None,
        };
        if let Some(tok) = single {
            toks.push(Token { tok, span });
            advance(&mut i, &mut line, &mut col);
            continue;
        }
        if is_ident_char(c) {
            let mut name = String::new();
            while i < chars.len() && is_ident_char(chars[i]) {
                name.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            let tok = if name == "in" { Tok::In } else { Tok::Ident(name) };
            toks.push(Token { tok, span });
            continue;
        }
        return Err(LexError {
            span,
            message: format!("unexpected character `{c}`"),
        });
    }
    Ok((toks, Span::new(line, col)))
}
