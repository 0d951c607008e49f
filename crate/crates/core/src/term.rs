//! Terms, environments and signatures.
//!
//! The term language has two sorts, variables, symbols, constant predicate
//! symbols carrying a size annotation, abstractions, dependent products and
//! applications. Constant predicate symbols are the only places where size
//! expressions appear inside terms; the annotation of every `ConstPred` node
//! is kept in normal form.

use crate::rewrite::RewriteRule;
use crate::size::{normalize, SizeExpr, SizeSubst, SizeVar};
use indexmap::IndexMap;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    /// The sort of types of objects.
    Star,
    /// The sort of kinds.
    Box,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Star => write!(f, "Type"),
            Sort::Box => write!(f, "Kind"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Sort(Sort),
    Var(String),
    /// A symbol that is not a constant predicate symbol.
    Symb(String),
    /// A constant predicate symbol with its size annotation.
    ConstPred(String, SizeExpr),
    /// `[x : ty] body`
    Abs(String, Box<Term>, Box<Term>),
    /// `(x : ty) body`
    Prod(String, Box<Term>, Box<Term>),
    App(Box<Term>, Box<Term>),
}

pub fn star() -> Term {
    Term::Sort(Sort::Star)
}

pub fn var(name: impl Into<String>) -> Term {
    Term::Var(name.into())
}

pub fn symb(name: impl Into<String>) -> Term {
    Term::Symb(name.into())
}

pub fn const_pred(name: impl Into<String>, a: SizeExpr) -> Term {
    Term::ConstPred(name.into(), normalize(&a))
}

pub fn abs(x: impl Into<String>, ty: Term, body: Term) -> Term {
    Term::Abs(x.into(), Box::new(ty), Box::new(body))
}

pub fn prod(x: impl Into<String>, ty: Term, body: Term) -> Term {
    Term::Prod(x.into(), Box::new(ty), Box::new(body))
}

/// Non-dependent product `a -> b`; the binder name is unused.
pub fn arrow(a: Term, b: Term) -> Term {
    prod("_", a, b)
}

pub fn app(f: Term, arg: Term) -> Term {
    Term::App(Box::new(f), Box::new(arg))
}

pub fn app_many(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
    args.into_iter().fold(f, app)
}

impl Term {
    /// Head and arguments of a left-nested application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut head = self;
        while let Term::App(f, a) = head {
            args.push(a.as_ref());
            head = f;
        }
        args.reverse();
        (head, args)
    }

    /// Number of leading products.
    pub fn prod_spine_len(&self) -> usize {
        let mut n = 0;
        let mut t = self;
        while let Term::Prod(_, _, body) = t {
            n += 1;
            t = body;
        }
        n
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match t {
                Term::Sort(_) | Term::Symb(_) | Term::ConstPred(_, _) => {}
                Term::Var(x) => {
                    if !bound.iter().any(|b| b == x) {
                        out.insert(x.clone());
                    }
                }
                Term::Abs(x, ty, body) | Term::Prod(x, ty, body) => {
                    go(ty, bound, out);
                    bound.push(x.clone());
                    go(body, bound, out);
                    bound.pop();
                }
                Term::App(f, a) => {
                    go(f, bound, out);
                    go(a, bound, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Size variables occurring in annotations anywhere in the term.
    pub fn size_vars(&self) -> BTreeSet<SizeVar> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::ConstPred(_, a) = t {
                out.extend(a.vars());
            }
        });
        out
    }

    /// True when every size annotation is `oo`.
    pub fn is_infty_term(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |t| {
            if let Term::ConstPred(_, a) = t {
                ok &= a.is_infty();
            }
        });
        ok
    }

    fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self {
            Term::Sort(_) | Term::Var(_) | Term::Symb(_) | Term::ConstPred(_, _) => {}
            Term::Abs(_, ty, body) | Term::Prod(_, ty, body) => {
                ty.visit(f);
                body.visit(f);
            }
            Term::App(g, a) => {
                g.visit(f);
                a.visit(f);
            }
        }
    }

    /// Replaces every size annotation by `oo`.
    pub fn erase_sizes(&self) -> Term {
        self.map_annotations(&|_| SizeExpr::Infty)
    }

    /// Applies a size substitution to every annotation, renormalizing.
    pub fn subst_size(&self, phi: &SizeSubst) -> Term {
        self.map_annotations(&|a| phi.apply(a))
    }

    /// Like `subst_size` but keeps `s` applied to `oo` images. Subtyping at
    /// argument positions compares annotations syntactically, so this is the
    /// substitution under which constraint generation is exact.
    pub fn subst_size_raw(&self, phi: &SizeSubst) -> Term {
        self.map_annotations(&|a| phi.apply_raw(a))
    }

    fn map_annotations(&self, f: &impl Fn(&SizeExpr) -> SizeExpr) -> Term {
        match self {
            Term::Sort(_) | Term::Var(_) | Term::Symb(_) => self.clone(),
            Term::ConstPred(c, a) => Term::ConstPred(c.clone(), f(a)),
            Term::Abs(x, ty, body) => Term::Abs(
                x.clone(),
                Box::new(ty.map_annotations(f)),
                Box::new(body.map_annotations(f)),
            ),
            Term::Prod(x, ty, body) => Term::Prod(
                x.clone(),
                Box::new(ty.map_annotations(f)),
                Box::new(body.map_annotations(f)),
            ),
            Term::App(g, a) => Term::App(
                Box::new(g.map_annotations(f)),
                Box::new(a.map_annotations(f)),
            ),
        }
    }
}

/// A finite substitution of terms for term variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermSubst {
    map: BTreeMap<String, Term>,
}

impl TermSubst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn one(x: impl Into<String>, t: Term) -> Self {
        let mut s = Self::new();
        s.bind(x, t);
        s
    }

    pub fn bind(&mut self, x: impl Into<String>, t: Term) {
        self.map.insert(x.into(), t);
    }

    pub fn get(&self, x: &str) -> Option<&Term> {
        self.map.get(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.map.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }
}

/// Picks a name not rejected by `avoid`, starting from `base` and appending
/// `#0`, `#1`, ... as needed. Surface identifiers cannot contain `#`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    let stem = match base.find('#') {
        Some(i) => &base[..i],
        None => base,
    };
    let mut k = 0u64;
    loop {
        let cand = format!("{stem}#{k}");
        if !avoid.contains(&cand) {
            return cand;
        }
        k += 1;
    }
}

/// Capture-avoiding substitution of terms for free term variables.
pub fn subst_term(t: &Term, sub: &TermSubst) -> Term {
    if sub.is_empty() {
        return t.clone();
    }
    match t {
        Term::Sort(_) | Term::Symb(_) | Term::ConstPred(_, _) => t.clone(),
        Term::Var(x) => sub.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::App(f, a) => app(subst_term(f, sub), subst_term(a, sub)),
        Term::Abs(x, ty, body) => {
            let (x2, ty2, body2) = subst_binder(x, ty, body, sub);
            abs(x2, ty2, body2)
        }
        Term::Prod(x, ty, body) => {
            let (x2, ty2, body2) = subst_binder(x, ty, body, sub);
            prod(x2, ty2, body2)
        }
    }
}

fn subst_binder(x: &str, ty: &Term, body: &Term, sub: &TermSubst) -> (String, Term, Term) {
    let ty2 = subst_term(ty, sub);
    let fv_body = body.free_vars();
    // only bindings for variables actually free in the body matter
    let mut inner = TermSubst::new();
    for (v, u) in sub.iter() {
        if v != x && fv_body.contains(v) {
            inner.bind(v.clone(), u.clone());
        }
    }
    if inner.is_empty() {
        return (x.to_string(), ty2, body.clone());
    }
    let mut range_fv = BTreeSet::new();
    for (_, u) in inner.iter() {
        range_fv.extend(u.free_vars());
    }
    if range_fv.contains(x) {
        let mut avoid = range_fv;
        avoid.extend(fv_body);
        avoid.insert(x.to_string());
        let x2 = fresh_name(x, &avoid);
        let renamed = subst_term(body, &TermSubst::one(x, var(x2.clone())));
        (x2, ty2, subst_term(&renamed, &inner))
    } else {
        (x.to_string(), ty2, subst_term(body, &inner))
    }
}

/// Equality up to renaming of bound term variables. Size annotations and free
/// variables are compared syntactically.
pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    fn go(t: &Term, u: &Term, stack: &mut Vec<(String, String)>) -> bool {
        match (t, u) {
            (Term::Sort(a), Term::Sort(b)) => a == b,
            (Term::Symb(f), Term::Symb(g)) => f == g,
            (Term::ConstPred(c, a), Term::ConstPred(d, b)) => c == d && a == b,
            (Term::Var(x), Term::Var(y)) => {
                let lx = stack.iter().rev().position(|(l, _)| l == x);
                let ly = stack.iter().rev().position(|(_, r)| r == y);
                match (lx, ly) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Term::App(f, a), Term::App(g, b)) => go(f, g, stack) && go(a, b, stack),
            (Term::Abs(x, tx, bx), Term::Abs(y, ty, by))
            | (Term::Prod(x, tx, bx), Term::Prod(y, ty, by)) => {
                if !go(tx, ty, stack) {
                    return false;
                }
                stack.push((x.clone(), y.clone()));
                let r = go(bx, by, stack);
                stack.pop();
                r
            }
            _ => false,
        }
    }
    go(t, u, &mut Vec::new())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::pretty_term(self))
    }
}

/// A typing environment: an ordered list of variable declarations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    entries: Vec<(String, Term)>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Term)>) -> Self {
        Env {
            entries: pairs.into_iter().collect(),
        }
    }

    pub fn push(&mut self, x: impl Into<String>, ty: Term) {
        self.entries.push((x.into(), ty));
    }

    pub fn extended(&self, x: impl Into<String>, ty: Term) -> Env {
        let mut e = self.clone();
        e.push(x, ty);
        e
    }

    /// Innermost declaration wins.
    pub fn lookup(&self, x: &str) -> Option<&Term> {
        self.entries
            .iter()
            .rev()
            .find(|(y, _)| y == x)
            .map(|(_, t)| t)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.lookup(x).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, Term)> {
        self.entries.iter()
    }

    pub fn names(&self) -> BTreeSet<String> {
        self.entries.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Declaration of one symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSig {
    pub name: String,
    pub ty: Term,
    /// Sort of the declared type, filled in by signature validation.
    pub sort: Option<Sort>,
    pub is_const_pred: bool,
    /// Length of the leading product spine of `ty`.
    pub arity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("symbol `{0}` is declared twice")]
pub struct DuplicateSymbol(pub String);

/// Symbol declarations in declaration order, plus the rewrite rules.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    symbols: IndexMap<String, SymbolSig>,
    rules: Vec<RewriteRule>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(
        &mut self,
        name: impl Into<String>,
        ty: Term,
        is_const_pred: bool,
    ) -> Result<(), DuplicateSymbol> {
        let name = name.into();
        if self.symbols.contains_key(&name) {
            return Err(DuplicateSymbol(name));
        }
        let arity = ty.prod_spine_len();
        self.symbols.insert(
            name.clone(),
            SymbolSig {
                name,
                ty,
                sort: None,
                is_const_pred,
                arity,
            },
        );
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&SymbolSig> {
        self.symbols.get(name)
    }

    pub fn set_sort(&mut self, name: &str, sort: Sort) {
        if let Some(s) = self.symbols.get_mut(name) {
            s.sort = Some(sort);
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = &SymbolSig> {
        self.symbols.values()
    }

    pub fn add_rule(&mut self, rule: RewriteRule) {
        self.rules.push(rule);
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    /// Rules whose head is `name`, in declaration order.
    pub fn rules_for<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a RewriteRule> {
        self.rules.iter().filter(move |r| r.head == name)
    }
}

/// Syntactic classes of terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermClass {
    Object,
    Predicate,
    Kind,
    Sort,
    Other,
}

/// True for `Type` and products ending in `Type`.
pub fn is_kind(t: &Term) -> bool {
    match t {
        Term::Sort(Sort::Star) => true,
        Term::Prod(_, _, body) => is_kind(body),
        _ => false,
    }
}

/// Sort of a variable whose declared type is `ty`: object variables have
/// predicate types, predicate variables have kinds.
fn binder_sort(sig: &Signature, sorts: &BTreeMap<String, Sort>, ty: &Term) -> Option<Sort> {
    match classify(sig, sorts, ty) {
        TermClass::Predicate => Some(Sort::Star),
        TermClass::Kind => Some(Sort::Box),
        TermClass::Sort if *ty == star() => Some(Sort::Box),
        _ => None,
    }
}

/// Determines the syntactic class of a well-scoped term. `sorts` assigns a
/// sort to every free term variable; binder sorts are derived from the
/// declared types along the way.
pub fn classify(sig: &Signature, sorts: &BTreeMap<String, Sort>, t: &Term) -> TermClass {
    match t {
        Term::Sort(_) => TermClass::Sort,
        Term::Var(x) => match sorts.get(x) {
            Some(Sort::Star) => TermClass::Object,
            Some(Sort::Box) => TermClass::Predicate,
            None => TermClass::Other,
        },
        Term::ConstPred(_, _) => TermClass::Predicate,
        Term::Symb(f) => match sig.get(f).and_then(|s| s.sort) {
            Some(Sort::Star) => TermClass::Object,
            Some(Sort::Box) => TermClass::Predicate,
            None => TermClass::Other,
        },
        Term::Abs(x, ty, body) => match binder_sort(sig, sorts, ty) {
            Some(sx) => {
                let mut inner = sorts.clone();
                inner.insert(x.clone(), sx);
                match classify(sig, &inner, body) {
                    TermClass::Object => TermClass::Object,
                    TermClass::Predicate => TermClass::Predicate,
                    _ => TermClass::Other,
                }
            }
            None => TermClass::Other,
        },
        Term::Prod(x, ty, body) => match binder_sort(sig, sorts, ty) {
            Some(sx) => {
                let mut inner = sorts.clone();
                inner.insert(x.clone(), sx);
                match classify(sig, &inner, body) {
                    TermClass::Predicate => TermClass::Predicate,
                    TermClass::Kind => TermClass::Kind,
                    TermClass::Sort if *body.as_ref() == star() => TermClass::Kind,
                    _ => TermClass::Other,
                }
            }
            None => TermClass::Other,
        },
        Term::App(f, _) => match classify(sig, sorts, f) {
            TermClass::Object => TermClass::Object,
            TermClass::Predicate => TermClass::Predicate,
            _ => TermClass::Other,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::size::SizeExpr;

    fn nat(a: SizeExpr) -> Term {
        const_pred("nat", a)
    }
    fn inf() -> SizeExpr {
        SizeExpr::Infty
    }
    fn sv(n: &str) -> SizeVar {
        SizeVar::new(n)
    }

    fn tiny_sig() -> Signature {
        let mut sig = Signature::new();
        sig.declare("nat", star(), true).unwrap();
        sig.declare("0", nat(inf()), false).unwrap();
        sig.declare(
            "s",
            arrow(nat(SizeExpr::var("a")), nat(SizeExpr::var("a").succ())),
            false,
        )
        .unwrap();
        sig.set_sort("nat", Sort::Box);
        sig.set_sort("0", Sort::Star);
        sig.set_sort("s", Sort::Star);
        sig
    }

    #[test]
    fn alpha_eq_renames_bound_variables() {
        let t = abs("x", nat(inf()), var("x"));
        let u = abs("y", nat(inf()), var("y"));
        assert!(alpha_eq(&t, &u));

        // free variables are not renamed
        let t = abs("x", star(), var("z"));
        let u = abs("y", star(), var("y"));
        assert!(!alpha_eq(&t, &u));

        // annotations are compared syntactically
        assert!(!alpha_eq(
            &nat(SizeExpr::var("a")),
            &nat(SizeExpr::var("b"))
        ));
        assert!(alpha_eq(&nat(inf()), &nat(inf())));
    }

    #[test]
    fn alpha_eq_is_an_equivalence() {
        let terms = [
            var("x"),
            symb("0"),
            nat(SizeExpr::var("a")),
            abs("x", nat(inf()), var("x")),
            abs("y", nat(inf()), var("y")),
            prod("x", star(), app(var("x"), var("x"))),
            prod("z", star(), app(var("z"), var("z"))),
            app(symb("s"), symb("0")),
        ];
        for t in &terms {
            assert!(alpha_eq(t, t));
        }
        for t in &terms {
            for u in &terms {
                assert_eq!(alpha_eq(t, u), alpha_eq(u, t));
                for w in &terms {
                    if alpha_eq(t, u) && alpha_eq(u, w) {
                        assert!(alpha_eq(t, w));
                    }
                }
            }
        }
    }

    #[test]
    fn variable_sets() {
        let t = abs("x", nat(SizeExpr::var("a")), app(var("x"), var("y")));
        assert_eq!(
            t.free_vars(),
            BTreeSet::from(["y".to_string()])
        );
        assert_eq!(t.size_vars(), BTreeSet::from([sv("a")]));
        assert!(!t.is_infty_term());
        assert!(t.erase_sizes().is_infty_term());
    }

    #[test]
    fn subst_avoids_capture() {
        // ([x:Type] y){y := x} must not capture the inserted x
        let t = abs("x", star(), var("y"));
        let r = subst_term(&t, &TermSubst::one("y", var("x")));
        match &r {
            Term::Abs(b, _, body) => {
                assert_ne!(b, "x");
                assert_eq!(body.as_ref(), &var("x"));
            }
            _ => panic!("expected abstraction, got {r:?}"),
        }
        // and the result is alpha-independent of the binder name chosen
        assert!(alpha_eq(&r, &abs("q", star(), var("x"))));
    }

    #[test]
    fn subst_binds_only_free_occurrences() {
        let t = abs("x", star(), app(var("x"), var("y")));
        let r = subst_term(&t, &TermSubst::one("x", symb("0")));
        assert!(alpha_eq(&t, &r));

        let r = subst_term(&var("y"), &TermSubst::one("y", app(symb("s"), symb("0"))));
        assert_eq!(r, app(symb("s"), symb("0")));
    }

    #[test]
    fn subst_composition_on_disjoint_domains() {
        let t = app(var("x"), var("y"));
        let mut both = TermSubst::new();
        both.bind("x", symb("0"));
        both.bind("y", symb("s"));
        let seq = subst_term(&subst_term(&t, &TermSubst::one("x", symb("0"))), &TermSubst::one("y", symb("s")));
        assert!(alpha_eq(&subst_term(&t, &both), &seq));
    }

    #[test]
    fn subst_size_maps_annotations() {
        let t = app(nat(SizeExpr::var("a").succ()), var("x"));
        let phi = SizeSubst::from_pairs([(sv("a"), SizeExpr::Infty)]);
        assert_eq!(t.subst_size(&phi), app(nat(inf()), var("x")));
    }

    #[test]
    fn classify_examples() {
        let sig = tiny_sig();
        let sorts = BTreeMap::new();
        assert_eq!(classify(&sig, &sorts, &symb("0")), TermClass::Object);
        assert_eq!(
            classify(&sig, &sorts, &nat(SizeExpr::var("a"))),
            TermClass::Predicate
        );
        assert_eq!(classify(&sig, &sorts, &star()), TermClass::Sort);
        // Type -> nat -> Type
        let k = arrow(star(), arrow(nat(inf()), star()));
        assert_eq!(classify(&sig, &sorts, &k), TermClass::Kind);
        assert!(is_kind(&k));
        assert!(is_kind(&star()));
        assert!(!is_kind(&nat(inf())));
        // an abstraction of an object is an object
        let t = abs("x", nat(inf()), app(symb("s"), var("x")));
        assert_eq!(classify(&sig, &sorts, &t), TermClass::Object);
        // a product into a predicate is a predicate
        let p = prod("x", nat(inf()), nat(inf()));
        assert_eq!(classify(&sig, &sorts, &p), TermClass::Predicate);
        // applying a sort is neither object, predicate nor kind
        assert_eq!(classify(&sig, &sorts, &app(star(), star())), TermClass::Other);
    }

    #[test]
    fn spine_decomposition() {
        let t = app_many(symb("f"), [var("x"), var("y"), symb("0")]);
        let (head, args) = t.spine();
        assert_eq!(head, &symb("f"));
        assert_eq!(args, vec![&var("x"), &var("y"), &symb("0")]);

        let ty = prod("A", star(), arrow(var("A"), var("A")));
        assert_eq!(ty.prod_spine_len(), 2);
        assert_eq!(arrow(star(), star()).prod_spine_len(), 1);
    }

    #[test]
    fn env_lookup_is_innermost() {
        let mut env = Env::new();
        env.push("x", nat(inf()));
        env.push("y", star());
        env.push("x", star());
        assert_eq!(env.lookup("x"), Some(&star()));
        assert_eq!(env.lookup("y"), Some(&star()));
        assert_eq!(env.lookup("z"), None);
    }

    #[test]
    fn duplicate_declarations_are_rejected() {
        let mut sig = Signature::new();
        sig.declare("nat", star(), true).unwrap();
        assert!(sig.declare("nat", star(), true).is_err());
    }
}
