//! File processing: declarations build a signature, goals run against it.
//!
//! Processing order follows the file. Declarations are resolved as they
//! arrive, so a name used before its declaration stays a free variable and
//! signature validation flags it. Goals are resolved in place but executed
//! only after the whole signature has been validated.

use crate::ast::{Decl, Span};
use crate::parser::parse_file;
use crate::resolve::{resolve_term, Scope};
use cacsa_core::constraint::gen_sub;
use cacsa_core::solver::{solve_with_report, Solution};
use cacsa_core::term::{Env, Signature, Term};
use cacsa_core::typing::{
    annotate_symbol, validate_rules, validate_signature, Checker, InferSession, TypeError,
    TypeErrorKind,
};
use cacsa_core::RewriteRule;
use std::fmt::Write;

#[derive(Debug, Clone)]
pub struct Options {
    pub fuel: u64,
    pub dump_constraints: bool,
    pub trace: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            fuel: 100_000,
            dump_constraints: false,
            trace: false,
        }
    }
}

/// What `run_source` hands back: a line-oriented report and the process
/// exit code (0 ok, 1 type or constraint error, 2 parse or validation
/// error, 3 fuel exhaustion).
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: String,
}

enum Goal {
    Infer(Term, Span),
    Check(Term, Term, Span),
    Annotate(String, Span),
}

struct Runner<'a> {
    file: &'a str,
    opts: &'a Options,
    report: String,
    errors: Vec<TypeErrorKind>,
}

impl Runner<'_> {
    fn line(&mut self, s: impl AsRef<str>) {
        self.report.push_str(s.as_ref());
        self.report.push('\n');
    }

    fn diag(&mut self, span: Span, kind: &str, message: &str) {
        let file = self.file;
        self.line(format!(
            "{file}:{}:{}: error[{kind}]: {message}",
            span.line, span.col
        ));
    }

    fn type_error(&mut self, span: Span, e: &TypeError) {
        self.diag(span, e.kind.label(), &e.message);
        if let Some(residue) = &e.residue {
            self.line(format!("  residue: {residue}"));
        }
        self.errors.push(e.kind);
    }

    fn dump(&mut self, c: &cacsa_core::constraint::ConstraintProblem) {
        if !self.opts.dump_constraints {
            return;
        }
        let rep = solve_with_report(c);
        let mut block = String::new();
        let _ = writeln!(block, "```");
        let _ = writeln!(block, "input:            {c}");
        let _ = writeln!(block, "after equalities: {}", rep.after_equalities);
        match &rep.reduced {
            Some(r) => {
                let _ = writeln!(block, "reduced form:     {r}");
            }
            None => {
                let _ = writeln!(block, "reduced form:     (equalities unsatisfiable)");
            }
        }
        match &rep.result {
            Solution::Sat(phi) => {
                let _ = writeln!(block, "mgs:              {phi}");
            }
            Solution::Unsat => {
                let _ = writeln!(block, "mgs:              none (unsatisfiable)");
            }
        }
        block.push_str("```");
        self.line(block);
    }
}

pub fn run_source(file: &str, text: &str, opts: &Options) -> Outcome {
    let mut r = Runner {
        file,
        opts,
        report: String::new(),
        errors: Vec::new(),
    };
    let (sig, assumes, goals) = match prepare(&mut r, text) {
        Some(loaded) => loaded,
        None => {
            return Outcome {
                exit_code: 2,
                report: r.report,
            }
        }
    };

    for goal in &goals {
        run_goal(&mut r, &sig, &assumes, goal, opts);
    }

    let exit_code = if r.errors.iter().any(|k| *k == TypeErrorKind::FuelExhausted) {
        3
    } else if r.errors.is_empty() {
        0
    } else {
        1
    };
    Outcome {
        exit_code,
        report: r.report,
    }
}

/// Builds and validates a file's signature and assumptions, ignoring goals.
/// Lets tests and tooling drive the library directly on corpus files.
pub fn load_signature(file: &str, text: &str, opts: &Options) -> Result<(Signature, Env), Outcome> {
    let mut r = Runner {
        file,
        opts,
        report: String::new(),
        errors: Vec::new(),
    };
    match prepare(&mut r, text) {
        Some((sig, assumes, _)) => Ok((sig, assumes)),
        None => Err(Outcome {
            exit_code: 2,
            report: r.report,
        }),
    }
}

/// Declaration pass: resolve everything, build the signature, validate it.
/// `None` means errors were reported; the caller exits with code 2.
fn prepare(r: &mut Runner<'_>, text: &str) -> Option<(Signature, Env, Vec<Goal>)> {
    let opts = r.opts;
    let parsed = match parse_file(text) {
        Ok(p) => p,
        Err(e) => {
            r.diag(e.span, "parse", &e.message);
            return None;
        }
    };

    let mut sig = Signature::new();
    let mut assumes = Env::new();
    let mut goals: Vec<Goal> = Vec::new();
    let mut symbol_spans: Vec<(String, Span)> = Vec::new();
    let mut rule_spans: Vec<Span> = Vec::new();
    let mut bad = false;

    for decl in &parsed.decls {
        let span = decl.span();
        match decl {
            Decl::Data { name, kind, .. } | Decl::Symbol { name, ty: kind, .. } => {
                let is_data = matches!(decl, Decl::Data { .. });
                let scope = Scope {
                    sig: &sig,
                    globals: &assumes,
                };
                match resolve_term(kind, &scope) {
                    Ok(ty) => {
                        if let Err(e) = sig.declare(name.clone(), ty, is_data) {
                            r.diag(span, "invalid-signature", &e.to_string());
                            bad = true;
                        } else {
                            symbol_spans.push((name.clone(), span));
                        }
                    }
                    Err(e) => {
                        r.diag(e.span, "parse", &e.message);
                        bad = true;
                    }
                }
            }
            Decl::Rule { lhs, rhs, env, .. } => {
                let mut renv = Env::new();
                // environment entries may mention each other's names
                let mut names_env = assumes.clone();
                for (x, _) in env {
                    names_env.push(x.clone(), Term::Sort(cacsa_core::term::Sort::Star));
                }
                let mut ok = true;
                for (x, ty_ast) in env {
                    let scope2 = Scope {
                        sig: &sig,
                        globals: &names_env,
                    };
                    match resolve_term(ty_ast, &scope2) {
                        Ok(ty) => renv.push(x.clone(), ty),
                        Err(e) => {
                            r.diag(e.span, "parse", &e.message);
                            ok = false;
                        }
                    }
                }
                let sides: Result<Vec<Term>, _> = [lhs, rhs]
                    .iter()
                    .map(|side| {
                        resolve_term(
                            side,
                            &Scope {
                                sig: &sig,
                                globals: &names_env,
                            },
                        )
                    })
                    .collect();
                match sides {
                    Ok(sides) if ok => match RewriteRule::new(sides[0].clone(), sides[1].clone(), renv) {
                        Ok(rule) => {
                            sig.add_rule(rule);
                            rule_spans.push(span);
                        }
                        Err(msg) => {
                            r.diag(span, "invalid-rule", &msg);
                            bad = true;
                        }
                    },
                    Ok(_) => bad = true,
                    Err(e) => {
                        r.diag(e.span, "parse", &e.message);
                        bad = true;
                    }
                }
            }
            Decl::Assume { name, ty, .. } => {
                let scope = Scope {
                    sig: &sig,
                    globals: &assumes,
                };
                match resolve_term(ty, &scope) {
                    Ok(ty) => assumes.push(name.clone(), ty),
                    Err(e) => {
                        r.diag(e.span, "parse", &e.message);
                        bad = true;
                    }
                }
            }
            Decl::Infer { term, .. } => {
                let scope = Scope {
                    sig: &sig,
                    globals: &assumes,
                };
                match resolve_term(term, &scope) {
                    Ok(t) => goals.push(Goal::Infer(t, span)),
                    Err(e) => {
                        r.diag(e.span, "parse", &e.message);
                        bad = true;
                    }
                }
            }
            Decl::Check { term, ty, .. } => {
                let scope = Scope {
                    sig: &sig,
                    globals: &assumes,
                };
                match (resolve_term(term, &scope), resolve_term(ty, &scope)) {
                    (Ok(t), Ok(ty)) => goals.push(Goal::Check(t, ty, span)),
                    (Err(e), _) | (_, Err(e)) => {
                        r.diag(e.span, "parse", &e.message);
                        bad = true;
                    }
                }
            }
            Decl::Annotate { name, .. } => goals.push(Goal::Annotate(name.clone(), span)),
        }
    }
    if bad {
        return None;
    }

    // whole-signature validation before any goal runs
    let mut verrs = validate_signature(&mut sig, opts.fuel);
    verrs.extend(validate_rules(&sig));
    if !verrs.is_empty() {
        for e in &verrs {
            let span = locate(&e.message, &symbol_spans, &rule_spans);
            r.diag(span, e.kind.label(), &e.message);
        }
        return None;
    }
    Some((sig, assumes, goals))
}

/// Best-effort span for a validation error: the declaration of the symbol
/// or rule its message names.
fn locate(message: &str, symbols: &[(String, Span)], rules: &[Span]) -> Span {
    if let Some(rest) = message.strip_prefix("rule ") {
        if let Some(n) = rest
            .split_whitespace()
            .next()
            .and_then(|w| w.parse::<usize>().ok())
        {
            if n >= 1 && n <= rules.len() {
                return rules[n - 1];
            }
        }
    }
    let mut best: Option<(usize, Span)> = None;
    for (name, span) in symbols {
        let hit = message
            .split(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '\''))
            .any(|tok| tok == name);
        if hit && best.map_or(true, |(len, _)| name.len() > len) {
            best = Some((name.len(), *span));
        }
    }
    best.map(|(_, s)| s).unwrap_or(Span::new(1, 1))
}

fn run_goal(r: &mut Runner<'_>, sig: &Signature, assumes: &Env, goal: &Goal, opts: &Options) {
    let ck = Checker::new(sig, opts.fuel);
    match goal {
        Goal::Infer(t, span) => {
            let mut ses = InferSession::with_used(t.size_vars());
            for (_, ty) in assumes.iter() {
                ses.note_used(ty.size_vars());
            }
            if opts.trace {
                ses.trace = Some(Vec::new());
            }
            match ck.infer(assumes, t, &mut ses) {
                Ok(ty) => {
                    r.line(format!("infer {t} : {ty}"));
                    if let Some(steps) = &ses.trace {
                        for step in steps {
                            r.line(format!("  | {step}"));
                        }
                    }
                }
                Err(e) => r.type_error(*span, &e),
            }
        }
        Goal::Check(t, ty, span) => {
            // same pipeline as the library's check, kept inline so the
            // final constraint problem is at hand for --dump-constraints
            let mut ses = InferSession::with_used(ty.size_vars());
            ses.note_used(t.size_vars());
            for (_, envty) in assumes.iter() {
                ses.note_used(envty.size_vars());
            }
            let inferred = match ck.infer(assumes, t, &mut ses) {
                Ok(it) => it,
                Err(e) => {
                    r.type_error(*span, &e);
                    return;
                }
            };
            let pair = (|| -> Result<_, TypeError> {
                let lhs = cacsa_core::rewrite::normalize_term(sig, &inferred, opts.fuel)?;
                let rhs = cacsa_core::rewrite::normalize_term(sig, ty, opts.fuel)?;
                Ok(gen_sub(&lhs, &rhs))
            })();
            let c = match pair {
                Ok(c) => c,
                Err(e) => {
                    r.type_error(*span, &e);
                    return;
                }
            };
            match cacsa_core::solver::solve(&c) {
                Solution::Sat(psi) => {
                    r.line(format!("check {t} : {ty} ok"));
                    if !psi.is_empty() {
                        r.line(format!("  instantiation: {psi}"));
                    }
                }
                Solution::Unsat => {
                    let e = TypeError {
                        kind: TypeErrorKind::UnsatConstraints,
                        message: format!("{t} has type {inferred}, which does not fit {ty}"),
                        residue: Some(c.clone()),
                    };
                    r.type_error(*span, &e);
                }
            }
            r.dump(&c);
        }
        Goal::Annotate(name, span) => {
            match annotate_symbol(sig, name, opts.fuel) {
                Ok(out) => {
                    r.line(format!(
                        "annotate {name}: {} rule(s), heuristic size check",
                        out.rules_checked
                    ));
                    match &out.solution {
                        Solution::Unsat => {
                            let e = TypeError {
                                kind: TypeErrorKind::UnsatConstraints,
                                message: format!(
                                    "the annotations of {name} are unsatisfiable with its rules"
                                ),
                                residue: Some(out.constraints.clone()),
                            };
                            r.type_error(*span, &e);
                        }
                        Solution::Sat(_) => {
                            for (x, v) in &out.identified {
                                r.line(format!("  {x} = {v}"));
                            }
                            for v in &out.forced_infinite {
                                r.line(format!("  {v} requires oo (not size-preserving)"));
                            }
                            // forced variables are reported, not treated as
                            // failures: the check is a heuristic and a
                            // satisfiable problem still has a solution
                            if out.accepted() {
                                r.line("  accepted");
                            }
                        }
                    }
                    r.dump(&out.constraints);
                }
                Err(e) => r.type_error(*span, &e),
            }
        }
    }
}
