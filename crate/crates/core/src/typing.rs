//! Type inference and checking.
//!
//! Inference is syntax-directed. Every symbol occurrence takes a fresh copy
//! of its declared size variables, applications compare the argument's
//! inferred type against the domain by generating size constraints, and the
//! most general solution instantiates the codomain. Checking infers a type
//! and solves the final subtyping problem; the returned substitution says
//! how the expected type's own size variables must be instantiated.
//!
//! Rule-annotation checking reuses the same machinery in an accumulating
//! mode: instead of solving at each application, constraints pile up and are
//! solved once per symbol, with the head symbol's declared variables and the
//! rule environments' variables kept rigid so the report can name them.

use crate::constraint::{gen_sub, ConstraintProblem};
use crate::rewrite::{normalize_term, RewriteError, RewriteRule};
use crate::size::{normalize, SizeSubst, SizeVar};
use crate::solver::{solve, Solution};
use crate::term::{app, is_kind, prod, subst_term, symb, Env, Signature, Sort, Term, TermSubst};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeErrorKind {
    NotAProduct,
    UnsatConstraints,
    UnboundVariable,
    IllSortedBinder,
    BoxHasNoType,
    FuelExhausted,
    SortMismatch,
    InvalidSignature,
    InvalidRule,
}

impl TypeErrorKind {
    pub fn label(self) -> &'static str {
        match self {
            TypeErrorKind::NotAProduct => "not-a-product",
            TypeErrorKind::UnsatConstraints => "unsat-constraints",
            TypeErrorKind::UnboundVariable => "unbound-variable",
            TypeErrorKind::IllSortedBinder => "ill-sorted-binder",
            TypeErrorKind::BoxHasNoType => "box-has-no-type",
            TypeErrorKind::FuelExhausted => "fuel-exhausted",
            TypeErrorKind::SortMismatch => "sort-mismatch",
            TypeErrorKind::InvalidSignature => "invalid-signature",
            TypeErrorKind::InvalidRule => "invalid-rule",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub message: String,
    /// For unsatisfiable constraint failures, the offending problem.
    pub residue: Option<ConstraintProblem>,
}

impl TypeError {
    pub fn new(kind: TypeErrorKind, message: impl Into<String>) -> Self {
        TypeError {
            kind,
            message: message.into(),
            residue: None,
        }
    }

    fn unsat(message: impl Into<String>, residue: ConstraintProblem) -> Self {
        TypeError {
            kind: TypeErrorKind::UnsatConstraints,
            message: message.into(),
            residue: Some(residue),
        }
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for TypeError {}

impl From<RewriteError> for TypeError {
    fn from(e: RewriteError) -> Self {
        TypeError::new(TypeErrorKind::FuelExhausted, e.to_string())
    }
}

/// Bookkeeping for one inference run: which size variables are taken, and a
/// supply of fresh ones guaranteed disjoint from everything seen so far.
/// Fresh names contain `#`, which the surface syntax cannot produce.
#[derive(Debug, Clone)]
pub struct InferSession {
    used: BTreeSet<SizeVar>,
    next: u64,
    accumulate: bool,
    store: ConstraintProblem,
    pub trace: Option<Vec<String>>,
}

impl InferSession {
    pub fn new() -> Self {
        InferSession {
            used: BTreeSet::new(),
            next: 0,
            accumulate: false,
            store: ConstraintProblem::top(),
            trace: None,
        }
    }

    pub fn with_used(vars: impl IntoIterator<Item = SizeVar>) -> Self {
        let mut s = InferSession::new();
        s.note_used(vars);
        s
    }

    fn accumulating(vars: impl IntoIterator<Item = SizeVar>) -> Self {
        let mut s = InferSession::with_used(vars);
        s.accumulate = true;
        s
    }

    pub fn note_used(&mut self, vars: impl IntoIterator<Item = SizeVar>) {
        self.used.extend(vars);
    }

    pub fn fresh(&mut self) -> SizeVar {
        loop {
            let cand = SizeVar::new(format!("#{}", self.next));
            self.next += 1;
            if self.used.insert(cand.clone()) {
                return cand;
            }
        }
    }

    /// A renaming of `vars` to fresh variables.
    pub fn rename_fresh(&mut self, vars: &BTreeSet<SizeVar>) -> SizeSubst {
        let mut out = SizeSubst::new();
        for v in vars {
            out.bind(v.clone(), crate::size::SizeExpr::Var(self.fresh()));
        }
        out
    }

    fn note(&mut self, line: impl FnOnce() -> String) {
        if let Some(t) = &mut self.trace {
            t.push(line());
        }
    }
}

impl Default for InferSession {
    fn default() -> Self {
        InferSession::new()
    }
}

pub struct Checker<'a> {
    pub sig: &'a Signature,
    pub fuel: u64,
}

impl<'a> Checker<'a> {
    pub fn new(sig: &'a Signature, fuel: u64) -> Self {
        Checker { sig, fuel }
    }

    fn norm(&self, t: &Term) -> Result<Term, TypeError> {
        Ok(normalize_term(self.sig, t, self.fuel)?)
    }

    /// The sort classifying a binder's type, for the abstraction and product
    /// rules.
    fn binder_sort(&self, env: &Env, ty: &Term, ses: &mut InferSession) -> Result<Sort, TypeError> {
        let t = self.infer(env, ty, ses)?;
        match self.norm(&t)? {
            Term::Sort(s) => Ok(s),
            other => Err(TypeError::new(
                TypeErrorKind::IllSortedBinder,
                format!("binder type {ty} has type {other}, which is not a sort"),
            )),
        }
    }

    /// One application step: the function's type against one argument.
    fn apply_one(
        &self,
        env: &Env,
        fun: &Term,
        fun_ty: &Term,
        arg: &Term,
        ses: &mut InferSession,
    ) -> Result<Term, TypeError> {
        ses.note_used(fun_ty.size_vars());
        let (x, dom, cod) = match self.norm(fun_ty)? {
            Term::Prod(x, dom, cod) => (x, dom, cod),
            other => {
                return Err(TypeError::new(
                    TypeErrorKind::NotAProduct,
                    format!("{fun} has type {other}, which is not a product"),
                ))
            }
        };
        let arg_ty = self.infer(env, arg, ses)?;
        let c = gen_sub(&self.norm(&arg_ty)?, &dom);
        let instantiated = if ses.accumulate {
            ses.store = std::mem::replace(&mut ses.store, ConstraintProblem::top()).and(c);
            *cod
        } else {
            let phi = match solve(&c) {
                Solution::Sat(phi) => phi,
                Solution::Unsat => {
                    return Err(TypeError::unsat(
                        format!("argument {arg} of type {arg_ty} does not fit {dom}"),
                        c,
                    ))
                }
            };
            let applied = cod.subst_size(&phi);
            let rho = ses.rename_fresh(&applied.size_vars());
            applied.subst_size(&rho)
        };
        Ok(subst_term(&instantiated, &TermSubst::one(&x, arg.clone())))
    }

    pub fn infer(&self, env: &Env, t: &Term, ses: &mut InferSession) -> Result<Term, TypeError> {
        let ty = match t {
            Term::Sort(Sort::Star) => Term::Sort(Sort::Box),
            Term::Sort(Sort::Box) => {
                return Err(TypeError::new(
                    TypeErrorKind::BoxHasNoType,
                    "the sort Kind has no type",
                ))
            }
            Term::Var(x) => match env.lookup(x) {
                Some(ty) => ty.clone(),
                None => {
                    return Err(TypeError::new(
                        TypeErrorKind::UnboundVariable,
                        format!("unbound variable {x}"),
                    ))
                }
            },
            Term::ConstPred(c, _) => match self.sig.get(c) {
                // annotations do not change a constructor's kind
                Some(decl) => decl.ty.clone(),
                None => {
                    return Err(TypeError::new(
                        TypeErrorKind::UnboundVariable,
                        format!("undeclared type constructor {c}"),
                    ))
                }
            },
            Term::Symb(f) => match self.sig.get(f) {
                Some(decl) => {
                    // each occurrence gets its own copy of the size variables
                    let rho = ses.rename_fresh(&decl.ty.size_vars());
                    decl.ty.subst_size(&rho)
                }
                None => {
                    return Err(TypeError::new(
                        TypeErrorKind::UnboundVariable,
                        format!("undeclared symbol {f}"),
                    ))
                }
            },
            Term::Abs(x, ty, body) => {
                self.binder_sort(env, ty, ses)?;
                let env2 = env.extended(x.clone(), (**ty).clone());
                let body_ty = self.infer(&env2, body, ses)?;
                if body_ty == Term::Sort(Sort::Box) {
                    return Err(TypeError::new(
                        TypeErrorKind::SortMismatch,
                        format!("abstraction body {body} is a kind; it cannot be abstracted"),
                    ));
                }
                prod(x.clone(), (**ty).clone(), body_ty)
            }
            Term::Prod(x, a, b) => {
                self.binder_sort(env, a, ses)?;
                let env2 = env.extended(x.clone(), (**a).clone());
                let body_ty = self.infer(&env2, b, ses)?;
                match self.norm(&body_ty)? {
                    Term::Sort(s) => Term::Sort(s),
                    other => {
                        return Err(TypeError::new(
                            TypeErrorKind::SortMismatch,
                            format!("product body {b} has type {other}, which is not a sort"),
                        ))
                    }
                }
            }
            Term::App(f, u) => {
                let fun_ty = self.infer(env, f, ses)?;
                self.apply_one(env, f, &fun_ty, u, ses)?
            }
        };
        ses.note_used(ty.size_vars());
        ses.note(|| format!("{t} : {ty}"));
        Ok(ty)
    }

    /// Infers a type for `t` and solves it against `ty`. Success returns the
    /// substitution instantiating `ty`'s size variables.
    pub fn check(&self, env: &Env, t: &Term, ty: &Term) -> Result<SizeSubst, TypeError> {
        let mut ses = InferSession::with_used(ty.size_vars());
        ses.note_used(t.size_vars());
        for (_, envty) in env.iter() {
            ses.note_used(envty.size_vars());
        }
        let inferred = self.infer(env, t, &mut ses)?;
        let c = gen_sub(&self.norm(&inferred)?, &self.norm(ty)?);
        match solve(&c) {
            Solution::Sat(psi) => Ok(psi),
            Solution::Unsat => Err(TypeError::unsat(
                format!("{t} has type {inferred}, which does not fit {ty}"),
                c,
            )),
        }
    }
}

/// Sorts every symbol's declared type (with annotations erased to `oo`) and
/// records the sort; data symbols must be kind-level. Returns all problems.
pub fn validate_signature(sig: &mut Signature, fuel: u64) -> Vec<TypeError> {
    let mut errors = Vec::new();
    let mut sorts: Vec<(String, Sort)> = Vec::new();
    {
        let checker = Checker::new(sig, fuel);
        for decl in sig.symbols() {
            let erased = decl.ty.erase_sizes();
            let mut ses = InferSession::new();
            match checker
                .infer(&Env::new(), &erased, &mut ses)
                .and_then(|t| checker.norm(&t))
            {
                Ok(Term::Sort(s)) => {
                    if decl.is_const_pred && (s != Sort::Box || !is_kind(&decl.ty)) {
                        errors.push(TypeError::new(
                            TypeErrorKind::InvalidSignature,
                            format!("data symbol {} must be declared with a kind", decl.name),
                        ));
                    } else {
                        sorts.push((decl.name.clone(), s));
                    }
                }
                Ok(other) => errors.push(TypeError::new(
                    TypeErrorKind::InvalidSignature,
                    format!("type of {} has type {other}, which is not a sort", decl.name),
                )),
                Err(e) => errors.push(TypeError::new(
                    TypeErrorKind::InvalidSignature,
                    format!("type of {} is not well sorted: {}", decl.name, e.message),
                )),
            }
        }
    }
    for (name, s) in sorts {
        sig.set_sort(&name, s);
    }
    errors
}

fn is_algebraic(t: &Term) -> bool {
    match t {
        Term::Var(_) | Term::Symb(_) | Term::ConstPred(_, _) => true,
        Term::App(f, u) => is_algebraic(f) && is_algebraic(u),
        _ => false,
    }
}

/// Shape checks on the rewrite rules: algebraic left side headed by a
/// non-data symbol, no invented right-side variables, no more arguments than
/// the head's type has products, and no size annotations besides `oo`.
pub fn validate_rules(sig: &Signature) -> Vec<TypeError> {
    let mut errors = Vec::new();
    for (i, rule) in sig.rules().iter().enumerate() {
        let mut err = |msg: String| {
            errors.push(TypeError::new(
                TypeErrorKind::InvalidRule,
                format!("rule {} ({} ...): {msg}", i + 1, rule.head),
            ));
        };
        if !is_algebraic(&rule.lhs) {
            err("left side must be built from symbols and variables only".into());
        }
        match sig.get(&rule.head) {
            None => err(format!("head symbol {} is not declared", rule.head)),
            Some(decl) => {
                if decl.is_const_pred {
                    err(format!("head symbol {} is a data symbol", rule.head));
                }
                if rule.lhs_args().len() > decl.arity {
                    err(format!(
                        "left side applies {} to {} arguments but its type has only {}",
                        rule.head,
                        rule.lhs_args().len(),
                        decl.arity
                    ));
                }
            }
        }
        let lhs_vars = rule.lhs.free_vars();
        for v in rule.rhs.free_vars() {
            if !lhs_vars.contains(&v) {
                err(format!("right side mentions {v}, which the left side does not bind"));
            }
        }
        for side in [&rule.lhs, &rule.rhs] {
            if !side.is_infty_term() {
                err(format!("{side} carries size annotations other than oo"));
            }
        }
    }
    errors
}

/// Result of checking a symbol's size annotations against its rules.
#[derive(Debug, Clone)]
pub struct AnnotateOutcome {
    pub symbol: String,
    pub rules_checked: usize,
    /// The conjoined constraint problem over all of the symbol's rules.
    pub constraints: ConstraintProblem,
    pub solution: Solution,
    /// User-facing variables: the symbol's declared ones plus the rule
    /// environments' annotation variables.
    pub rigid: BTreeSet<SizeVar>,
    /// Declared variables occurring only in the codomain: the unknowns the
    /// rules are expected to pin down.
    pub outputs: BTreeSet<SizeVar>,
    /// Output variables whose least solution coincides with a user variable.
    pub identified: Vec<(SizeVar, SizeVar)>,
    /// User variables the rules force to `oo`: the annotation is not
    /// size-preserving there.
    pub forced_infinite: Vec<SizeVar>,
}

impl AnnotateOutcome {
    /// Satisfiable and no declared or environment variable collapses to
    /// `oo`: the annotations are consistent with every rule.
    pub fn accepted(&self) -> bool {
        self.solution.is_sat() && self.forced_infinite.is_empty()
    }
}

fn codomain_only_vars(ty: &Term) -> BTreeSet<SizeVar> {
    let mut domains = BTreeSet::new();
    let mut cur = ty;
    while let Term::Prod(_, a, b) = cur {
        domains.extend(a.size_vars());
        cur = b;
    }
    cur.size_vars().difference(&domains).cloned().collect()
}

/// Accumulates one rule's constraints into the session: the head keeps its
/// declared size variables as-is, arguments are checked left to right, the
/// right side is inferred, and the final subtyping of right into left is
/// conjoined.
fn rule_constraints(
    checker: &Checker<'_>,
    rule: &RewriteRule,
    ses: &mut InferSession,
) -> Result<(), TypeError> {
    let decl = checker.sig.get(&rule.head).ok_or_else(|| {
        TypeError::new(
            TypeErrorKind::UnboundVariable,
            format!("undeclared symbol {}", rule.head),
        )
    })?;
    let head = symb(rule.head.clone());
    let mut lhs_ty = decl.ty.clone();
    let mut fun = head;
    for arg in rule.lhs_args() {
        lhs_ty = checker.apply_one(&rule.env, &fun, &lhs_ty, arg, ses)?;
        fun = app(fun, arg.clone());
    }
    let rhs_ty = checker.infer(&rule.env, &rule.rhs, ses)?;
    let c = gen_sub(&checker.norm(&rhs_ty)?, &checker.norm(&lhs_ty)?);
    ses.store = std::mem::replace(&mut ses.store, ConstraintProblem::top()).and(c);
    Ok(())
}

/// Checks one rule against its head symbol's annotations.
pub fn check_rule_annotations(
    sig: &Signature,
    rule: &RewriteRule,
    fuel: u64,
) -> Result<AnnotateOutcome, TypeError> {
    annotate_rules(sig, &rule.head, std::slice::from_ref(rule), fuel)
}

/// Checks every rule of `symbol` at once: one constraint problem, one
/// solution, shared declared variables.
pub fn annotate_symbol(sig: &Signature, symbol: &str, fuel: u64) -> Result<AnnotateOutcome, TypeError> {
    let rules: Vec<RewriteRule> = sig.rules_for(symbol).into_iter().cloned().collect();
    annotate_rules(sig, symbol, &rules, fuel)
}

fn annotate_rules(
    sig: &Signature,
    symbol: &str,
    rules: &[RewriteRule],
    fuel: u64,
) -> Result<AnnotateOutcome, TypeError> {
    let decl = sig.get(symbol).ok_or_else(|| {
        TypeError::new(
            TypeErrorKind::UnboundVariable,
            format!("undeclared symbol {symbol}"),
        )
    })?;
    let checker = Checker::new(sig, fuel);
    let mut rigid = decl.ty.size_vars();
    for rule in rules {
        for (_, ty) in rule.env.iter() {
            rigid.extend(ty.size_vars());
        }
    }
    let mut ses = InferSession::accumulating(rigid.iter().cloned());
    for rule in rules {
        rule_constraints(&checker, rule, &mut ses)?;
    }
    let constraints = ses.store.clone();
    let solution = solve(&constraints);
    let outputs = codomain_only_vars(&decl.ty);
    let mut identified = Vec::new();
    let mut forced_infinite = Vec::new();
    if let Solution::Sat(psi) = &solution {
        for x in &outputs {
            let img = normalize(&psi.image(x));
            if let Some(v) = rigid
                .iter()
                .filter(|v| !outputs.contains(*v))
                .find(|v| normalize(&psi.image(v)) == img)
            {
                identified.push((x.clone(), v.clone()));
            }
        }
        for v in &rigid {
            if normalize(&psi.image(v)).is_infty() {
                forced_infinite.push(v.clone());
            }
        }
    }
    Ok(AnnotateOutcome {
        symbol: symbol.to_string(),
        rules_checked: rules.len(),
        constraints,
        solution,
        rigid,
        outputs,
        identified,
        forced_infinite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::size::SizeExpr;
    use crate::term::{abs, app_many, arrow, const_pred, star, var};

    fn v(n: &str) -> SizeExpr {
        SizeExpr::var(n)
    }
    fn sv(n: &str) -> SizeVar {
        SizeVar::new(n)
    }
    fn s(e: SizeExpr) -> SizeExpr {
        SizeExpr::Succ(Box::new(e))
    }
    fn inf() -> SizeExpr {
        SizeExpr::Infty
    }
    fn nat(a: SizeExpr) -> Term {
        const_pred("nat", a)
    }
    fn boolean() -> Term {
        const_pred("bool", inf())
    }
    fn env_of(pairs: impl IntoIterator<Item = (&'static str, Term)>) -> Env {
        Env::from_pairs(pairs.into_iter().map(|(x, t)| (x.to_string(), t)))
    }

    /// nat and bool with zero : nat^(s z), succ : nat^c -> nat^(s c),
    /// minus : nat^a -> nat^b -> nat^a and its three rules.
    fn arith_sig() -> Signature {
        let mut sig = Signature::new();
        sig.declare("nat", star(), true).unwrap();
        sig.declare("bool", star(), true).unwrap();
        sig.declare("zero", nat(s(v("z"))), false).unwrap();
        sig.declare("succ", arrow(nat(v("c")), nat(s(v("c")))), false)
            .unwrap();
        sig.declare(
            "minus",
            arrow(nat(v("a")), arrow(nat(v("b")), nat(v("a")))),
            false,
        )
        .unwrap();
        let x = var("x");
        let y = var("y");
        let m = |a: Term, b: Term| app_many(symb("minus"), [a, b]);
        let succ = |a: Term| app(symb("succ"), a);
        sig.add_rule(
            RewriteRule::new(
                m(x.clone(), symb("zero")),
                x.clone(),
                env_of([("x", nat(v("a")))]),
            )
            .unwrap(),
        );
        sig.add_rule(
            RewriteRule::new(
                m(symb("zero"), x.clone()),
                symb("zero"),
                env_of([("x", nat(v("b")))]),
            )
            .unwrap(),
        );
        sig.add_rule(
            RewriteRule::new(
                m(succ(x.clone()), succ(y.clone())),
                m(x.clone(), y.clone()),
                env_of([("x", nat(v("a'"))), ("y", nat(v("b'")))]),
            )
            .unwrap(),
        );
        let errs = validate_signature(&mut sig, 1000);
        assert!(errs.is_empty(), "{errs:?}");
        sig
    }

    #[test]
    fn sorts_and_failures() {
        let sig = arith_sig();
        let ck = Checker::new(&sig, 1000);
        let mut ses = InferSession::new();
        assert_eq!(
            ck.infer(&Env::new(), &star(), &mut ses).unwrap(),
            Term::Sort(Sort::Box)
        );
        let e = ck
            .infer(&Env::new(), &Term::Sort(Sort::Box), &mut ses)
            .unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::BoxHasNoType);

        // application of a sort to a sort
        let e = ck
            .infer(&Env::new(), &app(star(), star()), &mut ses)
            .unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::NotAProduct);

        let e = ck.infer(&Env::new(), &var("ghost"), &mut ses).unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::UnboundVariable);
    }

    #[test]
    fn constructors_type_at_any_annotation() {
        let sig = arith_sig();
        let ck = Checker::new(&sig, 1000);
        let mut ses = InferSession::new();
        for ann in [inf(), v("a"), s(s(v("a")))] {
            assert_eq!(ck.infer(&Env::new(), &nat(ann), &mut ses).unwrap(), star());
        }
    }

    #[test]
    fn successor_of_an_unbounded_number_is_unbounded() {
        let sig = arith_sig();
        let ck = Checker::new(&sig, 1000);
        let env = env_of([("x", nat(inf()))]);
        let mut ses = InferSession::new();
        let ty = ck
            .infer(&env, &app(symb("succ"), var("x")), &mut ses)
            .unwrap();
        // {oo <= c'} forces c' to oo and s oo collapses
        assert_eq!(ty, nat(inf()));
    }

    #[test]
    fn zero_gets_a_fresh_positive_size() {
        let sig = arith_sig();
        let ck = Checker::new(&sig, 1000);
        let mut ses = InferSession::new();
        let ty = ck.infer(&Env::new(), &symb("zero"), &mut ses).unwrap();
        match ty {
            Term::ConstPred(c, a) => {
                assert_eq!(c, "nat");
                let (k, base) = a.parts();
                assert_eq!(k, 1);
                assert!(matches!(base, crate::size::SizeBase::Var(w) if w.0.starts_with('#')));
            }
            other => panic!("expected an annotated nat, got {other}"),
        }
    }

    #[test]
    fn inference_is_deterministic() {
        let sig = arith_sig();
        let ck = Checker::new(&sig, 1000);
        let t = app(
            symb("succ"),
            app_many(symb("minus"), [symb("zero"), symb("zero")]),
        );
        let mut s1 = InferSession::new();
        let mut s2 = InferSession::new();
        let t1 = ck.infer(&Env::new(), &t, &mut s1).unwrap();
        let t2 = ck.infer(&Env::new(), &t, &mut s2).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn check_instantiates_the_expected_type() {
        let sig = arith_sig();
        let ck = Checker::new(&sig, 1000);

        // zero : nat^B fixes B to one past a fresh base
        let psi = ck.check(&Env::new(), &symb("zero"), &nat(v("B"))).unwrap();
        let img = psi.image(&sv("B"));
        let (k, base) = img.parts();
        assert_eq!(k, 1);
        assert!(matches!(base, crate::size::SizeBase::Var(_)));

        // zero : nat^oo leaves nothing to instantiate
        let psi = ck.check(&Env::new(), &symb("zero"), &nat(inf())).unwrap();
        assert!(psi.is_empty());

        // a nat is not a bool, and the residue says so
        let env = env_of([("x", nat(inf()))]);
        let e = ck.check(&env, &var("x"), &boolean()).unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::UnsatConstraints);
        assert!(e.residue.unwrap().is_bottom());
    }

    #[test]
    fn inferred_types_check_against_themselves() {
        let sig = arith_sig();
        let ck = Checker::new(&sig, 1000);
        let zero = symb("zero");
        let succ = |t: Term| app(symb("succ"), t);
        let samples = [
            zero.clone(),
            succ(zero.clone()),
            succ(succ(zero.clone())),
            app_many(symb("minus"), [succ(zero.clone()), zero.clone()]),
            abs("x", nat(inf()), succ(var("x"))),
            nat(inf()),
        ];
        for t in &samples {
            let mut ses = InferSession::new();
            let ty = ck.infer(&Env::new(), t, &mut ses).unwrap();
            ck.check(&Env::new(), t, &ty)
                .unwrap_or_else(|e| panic!("{t} : {ty} does not re-check: {e}"));
        }
    }

    #[test]
    fn checking_survives_annotation_instantiation() {
        // a type that checks keeps checking when its size variables are
        // instantiated, in particular all the way up to oo
        let sig = arith_sig();
        let ck = Checker::new(&sig, 1000);
        let zero = symb("zero");
        let cases = [
            (zero.clone(), nat(v("B"))),
            (app(symb("succ"), zero.clone()), nat(v("B"))),
            (zero.clone(), nat(s(v("B")))),
        ];
        for (t, ty) in &cases {
            ck.check(&Env::new(), t, ty).unwrap();
            let up = ty.subst_size(&SizeSubst::from_pairs([(sv("B"), inf())]));
            ck.check(&Env::new(), t, &up)
                .unwrap_or_else(|e| panic!("{t} : {up} should still check: {e}"));
        }
    }

    #[test]
    fn inferred_size_variables_avoid_the_initial_set() {
        let sig = arith_sig();
        let ck = Checker::new(&sig, 1000);
        let reserved: BTreeSet<SizeVar> = [sv("a"), sv("b"), sv("c"), sv("z")].into();
        let mut ses = InferSession::with_used(reserved.iter().cloned());
        let t = app_many(symb("minus"), [symb("zero"), symb("zero")]);
        let ty = ck.infer(&Env::new(), &t, &mut ses).unwrap();
        assert!(ty.size_vars().is_disjoint(&reserved), "{ty}");
    }

    #[test]
    fn signature_validation_rejects_nonsense() {
        let mut sig = Signature::new();
        sig.declare("nat", star(), true).unwrap();
        // a type whose own type is not a sort
        sig.declare("bad", app(star(), star()), false).unwrap();
        // a data symbol at object level
        sig.declare("weird", nat(inf()), true).unwrap();
        let errs = validate_signature(&mut sig, 1000);
        assert_eq!(errs.len(), 2);
        assert!(errs
            .iter()
            .all(|e| e.kind == TypeErrorKind::InvalidSignature));
        // the good symbol got its sort recorded
        assert_eq!(sig.get("nat").unwrap().sort, Some(Sort::Box));
    }

    #[test]
    fn rule_validation_rejects_malformed_rules() {
        let mut sig = Signature::new();
        sig.declare("nat", star(), true).unwrap();
        sig.declare("f", arrow(nat(inf()), nat(inf())), false).unwrap();
        assert!(validate_rules(&sig).is_empty());

        // rhs variable not bound on the left
        sig.add_rule(
            RewriteRule::new(app(symb("f"), var("x")), var("y"), Env::new()).unwrap(),
        );
        // too many arguments
        sig.add_rule(
            RewriteRule::new(
                app_many(symb("f"), [var("x"), var("y")]),
                var("x"),
                Env::new(),
            )
            .unwrap(),
        );
        // abstraction on the left
        sig.add_rule(
            RewriteRule::new(
                app(symb("f"), abs("x", nat(inf()), var("x"))),
                symb("f"),
                Env::new(),
            )
            .unwrap(),
        );
        let errs = validate_rules(&sig);
        assert_eq!(errs.len(), 3);
        assert!(errs.iter().all(|e| e.kind == TypeErrorKind::InvalidRule));
    }

    #[test]
    fn minus_annotation_is_accepted() {
        let sig = arith_sig();
        let out = annotate_symbol(&sig, "minus", 1000).unwrap();
        assert_eq!(out.rules_checked, 3);
        assert!(out.solution.is_sat());
        assert!(out.accepted(), "forced: {:?}", out.forced_infinite);
    }

    #[test]
    fn unknown_output_annotation_is_identified_with_the_input() {
        // minus declared with an output unknown X; the rules force X = a
        let mut sig = Signature::new();
        sig.declare("nat", star(), true).unwrap();
        sig.declare("zero", nat(v("z")), false).unwrap();
        sig.declare("succ", arrow(nat(v("c")), nat(s(v("c")))), false)
            .unwrap();
        sig.declare(
            "minus",
            arrow(nat(v("a")), arrow(nat(v("b")), nat(v("X")))),
            false,
        )
        .unwrap();
        let x = var("x");
        let y = var("y");
        let m = |a: Term, b: Term| app_many(symb("minus"), [a, b]);
        let succ = |a: Term| app(symb("succ"), a);
        sig.add_rule(
            RewriteRule::new(
                m(x.clone(), symb("zero")),
                x.clone(),
                env_of([("x", nat(v("a")))]),
            )
            .unwrap(),
        );
        sig.add_rule(
            RewriteRule::new(
                m(symb("zero"), x.clone()),
                symb("zero"),
                env_of([("x", nat(v("b")))]),
            )
            .unwrap(),
        );
        sig.add_rule(
            RewriteRule::new(
                m(succ(x.clone()), succ(y.clone())),
                m(x.clone(), y.clone()),
                env_of([("x", nat(v("a'"))), ("y", nat(v("b'")))]),
            )
            .unwrap(),
        );
        let errs = validate_signature(&mut sig, 1000);
        assert!(errs.is_empty(), "{errs:?}");

        let out = annotate_symbol(&sig, "minus", 1000).unwrap();
        assert_eq!(out.outputs, BTreeSet::from([sv("X")]));
        assert!(out.accepted());
        assert!(
            out.identified.contains(&(sv("X"), sv("a"))),
            "identified: {:?}",
            out.identified
        );
    }

    #[test]
    fn size_preserving_identity_is_accepted_and_pinned() {
        let mut sig = Signature::new();
        sig.declare("nat", star(), true).unwrap();
        sig.declare("id", arrow(nat(v("a")), nat(v("X"))), false)
            .unwrap();
        sig.add_rule(
            RewriteRule::new(
                app(symb("id"), var("x")),
                var("x"),
                env_of([("x", nat(v("a")))]),
            )
            .unwrap(),
        );
        validate_signature(&mut sig, 1000);
        let out = annotate_symbol(&sig, "id", 1000).unwrap();
        assert!(out.accepted());
        assert_eq!(out.identified, vec![(sv("X"), sv("a"))]);
    }

    #[test]
    fn size_increasing_rule_forces_infinity() {
        // id : nat^a -> nat^a with id x --> succ x requires s a <= a
        let mut sig = Signature::new();
        sig.declare("nat", star(), true).unwrap();
        sig.declare("succ", arrow(nat(v("c")), nat(s(v("c")))), false)
            .unwrap();
        sig.declare("id", arrow(nat(v("a")), nat(v("a"))), false)
            .unwrap();
        sig.add_rule(
            RewriteRule::new(
                app(symb("id"), var("x")),
                app(symb("succ"), var("x")),
                env_of([("x", nat(v("a")))]),
            )
            .unwrap(),
        );
        validate_signature(&mut sig, 1000);
        let out = annotate_symbol(&sig, "id", 1000).unwrap();
        assert!(out.solution.is_sat());
        assert_eq!(out.forced_infinite, vec![sv("a")]);
        assert!(!out.accepted());
    }
}
