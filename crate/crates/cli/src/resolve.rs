//! Resolution of surface trees into core terms.
//!
//! An identifier is, in priority order: a bound variable, an assumed or
//! pattern variable, a declared symbol, or a free variable. Leaving unknown
//! names as free variables keeps rule patterns natural (their variables need
//! no forward declaration) and defers "unbound" complaints to the type
//! checker, which knows the environment.

use crate::ast::{SizeAst, Span, TermAst};
use cacsa_core::size::SizeExpr;
use cacsa_core::term::{abs, app, const_pred, prod, star, symb, var, Env, Signature, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolveError {
    pub span: Span,
    pub message: String,
}

pub struct Scope<'a> {
    pub sig: &'a Signature,
    /// Names introduced by `assume` or a rule environment.
    pub globals: &'a Env,
}

pub fn resolve_size(a: &SizeAst) -> SizeExpr {
    match a {
        SizeAst::Infty => SizeExpr::Infty,
        SizeAst::Ident(x) => SizeExpr::var(x.clone()),
        SizeAst::Succ(b) => resolve_size(b).succ(),
    }
}

pub fn resolve_term(t: &TermAst, scope: &Scope<'_>) -> Result<Term, ResolveError> {
    go(t, scope, &mut Vec::new())
}

fn go(t: &TermAst, scope: &Scope<'_>, bound: &mut Vec<String>) -> Result<Term, ResolveError> {
    Ok(match t {
        TermAst::Type => star(),
        TermAst::Kind => Term::Sort(cacsa_core::term::Sort::Box),
        TermAst::Ident(x, _) => {
            if bound.iter().any(|b| b == x) || scope.globals.contains(x) {
                var(x.clone())
            } else {
                match scope.sig.get(x) {
                    Some(d) if d.is_const_pred => const_pred(x.clone(), SizeExpr::Infty),
                    Some(_) => symb(x.clone()),
                    None => var(x.clone()),
                }
            }
        }
        TermAst::Ann(c, a, span) => match scope.sig.get(c) {
            Some(d) if d.is_const_pred => const_pred(c.clone(), resolve_size(a)),
            Some(_) => {
                return Err(ResolveError {
                    span: *span,
                    message: format!("`{c}` is not a data symbol; only data symbols carry sizes"),
                })
            }
            None => {
                return Err(ResolveError {
                    span: *span,
                    message: format!("unknown data symbol `{c}`"),
                })
            }
        },
        TermAst::Prod(x, a, b) => {
            let a = go(a, scope, bound)?;
            bound.push(x.clone());
            let b = go(b, scope, bound);
            bound.pop();
            prod(x.clone(), a, b?)
        }
        TermAst::Arrow(a, b) => {
            let a = go(a, scope, bound)?;
            let b = go(b, scope, bound)?;
            cacsa_core::term::arrow(a, b)
        }
        TermAst::Abs(x, a, b) => {
            let a = go(a, scope, bound)?;
            bound.push(x.clone());
            let b = go(b, scope, bound);
            bound.pop();
            abs(x.clone(), a, b?)
        }
        TermAst::App(f, u) => app(go(f, scope, bound)?, go(u, scope, bound)?),
    })
}
