//! Plain-text rendering of sizes and terms in the surface syntax.
//!
//! The output parses back to an alpha-equal term. Constant predicate symbols
//! annotated with `oo` are printed bare, mirroring the input convention that
//! a missing annotation means `oo`.

use crate::size::SizeExpr;
use crate::term::{Sort, Term};
use std::fmt::Write;

pub fn pretty_size(a: &SizeExpr) -> String {
    match a {
        SizeExpr::Infty => "oo".to_string(),
        SizeExpr::Var(v) => v.0.clone(),
        SizeExpr::Succ(b) => format!("s {}", pretty_size(b)),
    }
}

pub fn pretty_term(t: &Term) -> String {
    let mut out = String::new();
    go(t, 0, &mut out);
    out
}

/// `prec` 0: binders and arrows; 1: applications; 2: atoms.
fn go(t: &Term, prec: u8, out: &mut String) {
    match t {
        Term::Sort(Sort::Star) => out.push_str("Type"),
        Term::Sort(Sort::Box) => out.push_str("Kind"),
        Term::Var(x) | Term::Symb(x) => out.push_str(x),
        Term::ConstPred(c, a) => {
            out.push_str(c);
            match a {
                SizeExpr::Infty => {}
                SizeExpr::Var(v) => {
                    let _ = write!(out, "^{v}");
                }
                SizeExpr::Succ(_) => {
                    let _ = write!(out, "^({})", pretty_size(a));
                }
            }
        }
        Term::App(f, a) => {
            parens_if(prec > 1, out, |out| {
                go(f, 1, out);
                out.push(' ');
                go(a, 2, out);
            });
        }
        Term::Abs(x, ty, body) => {
            parens_if(prec > 0, out, |out| {
                let _ = write!(out, "[{x} : ");
                go(ty, 0, out);
                out.push_str("] ");
                go(body, 0, out);
            });
        }
        Term::Prod(x, ty, body) => {
            parens_if(prec > 0, out, |out| {
                if body.free_vars().contains(x) {
                    let _ = write!(out, "({x} : ");
                    go(ty, 0, out);
                    out.push_str(") ");
                    go(body, 0, out);
                } else {
                    go(ty, 1, out);
                    out.push_str(" -> ");
                    go(body, 0, out);
                }
            });
        }
    }
}

fn parens_if(cond: bool, out: &mut String, body: impl FnOnce(&mut String)) {
    if cond {
        out.push('(');
        body(out);
        out.push(')');
    } else {
        body(out);
    }
}
