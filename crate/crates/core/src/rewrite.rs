//! Higher-order rewriting and normalization.
//!
//! Reduction is beta plus the rewrite rules of the signature, applied
//! leftmost-outermost with beta tried first. Rule left-hand sides are
//! algebraic patterns; matching is first-order, compares size-annotated
//! symbols by name only, and supports non-left-linear patterns.

use crate::term::{alpha_eq, app, app_many, subst_term, Env, Signature, Term, TermSubst};

/// A rewrite rule `head l1 ... ln --> rhs` together with the typing
/// environment of its pattern variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    pub lhs: Term,
    pub rhs: Term,
    /// Name of the symbol heading `lhs`.
    pub head: String,
    /// Declared types of the pattern variables, used when checking size
    /// annotations; rewriting itself never consults it.
    pub env: Env,
}

impl RewriteRule {
    pub fn new(lhs: Term, rhs: Term, env: Env) -> Result<Self, String> {
        let (head, _) = lhs.spine();
        match head {
            Term::Symb(f) => Ok(RewriteRule {
                head: f.clone(),
                lhs,
                rhs,
                env,
            }),
            _ => Err("left-hand side must be headed by a symbol".to_string()),
        }
    }

    pub fn lhs_args(&self) -> Vec<&Term> {
        self.lhs.spine().1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("normalization did not finish within {0} reduction steps")]
    FuelExhausted(u64),
}

/// Matches an algebraic pattern against a term, extending `sub` with the
/// bindings of the pattern variables. Size annotations are ignored; repeated
/// pattern variables must match alpha-equal terms.
pub fn match_pattern(pattern: &Term, term: &Term, sub: &mut TermSubst) -> bool {
    match (pattern, term) {
        (Term::Var(x), _) => match sub.get(x) {
            Some(prev) => alpha_eq(prev, term),
            None => {
                sub.bind(x.clone(), term.clone());
                true
            }
        },
        (Term::Symb(f), Term::Symb(g)) => f == g,
        (Term::ConstPred(c, _), Term::ConstPred(d, _)) => c == d,
        (Term::App(pf, pa), Term::App(tf, ta)) => {
            match_pattern(pf, tf, sub) && match_pattern(pa, ta, sub)
        }
        _ => false,
    }
}

/// One reduction at the root, if any: beta, then the rules for the head
/// symbol in declaration order. Rules may be applied under extra arguments.
fn step_root(sig: &Signature, t: &Term) -> Option<Term> {
    if let Term::App(f, a) = t {
        if let Term::Abs(x, _, body) = f.as_ref() {
            return Some(subst_term(body, &TermSubst::one(x.clone(), a.as_ref().clone())));
        }
    }
    let (head, args) = t.spine();
    if let Term::Symb(f) = head {
        for rule in sig.rules_for(f) {
            let pat_args = rule.lhs_args();
            if pat_args.len() > args.len() {
                continue;
            }
            let mut sub = TermSubst::new();
            if pat_args
                .iter()
                .zip(args.iter())
                .all(|(p, u)| match_pattern(p, u, &mut sub))
            {
                let contracted = subst_term(&rule.rhs, &sub);
                let rest = args[pat_args.len()..].iter().map(|u| (*u).clone());
                return Some(app_many(contracted, rest));
            }
        }
    }
    None
}

/// One leftmost-outermost reduction anywhere in the term.
fn step(sig: &Signature, t: &Term) -> Option<Term> {
    if let Some(r) = step_root(sig, t) {
        return Some(r);
    }
    match t {
        Term::Sort(_) | Term::Var(_) | Term::Symb(_) | Term::ConstPred(_, _) => None,
        Term::App(f, a) => step(sig, f)
            .map(|f2| app(f2, a.as_ref().clone()))
            .or_else(|| step(sig, a).map(|a2| app(f.as_ref().clone(), a2))),
        Term::Abs(x, ty, body) => step(sig, ty)
            .map(|ty2| Term::Abs(x.clone(), Box::new(ty2), body.clone()))
            .or_else(|| {
                step(sig, body).map(|b2| Term::Abs(x.clone(), ty.clone(), Box::new(b2)))
            }),
        Term::Prod(x, ty, body) => step(sig, ty)
            .map(|ty2| Term::Prod(x.clone(), Box::new(ty2), body.clone()))
            .or_else(|| {
                step(sig, body).map(|b2| Term::Prod(x.clone(), ty.clone(), Box::new(b2)))
            }),
    }
}

/// Reduces to normal form, spending at most `fuel` reduction steps.
pub fn normalize_term(sig: &Signature, t: &Term, fuel: u64) -> Result<Term, RewriteError> {
    let mut current = t.clone();
    let mut remaining = fuel;
    while let Some(next) = step(sig, &current) {
        if remaining == 0 {
            return Err(RewriteError::FuelExhausted(fuel));
        }
        remaining -= 1;
        current = next;
    }
    Ok(current)
}

/// Beta-rule convertibility: both sides normalize to alpha-equal terms.
pub fn convertible(sig: &Signature, a: &Term, b: &Term, fuel: u64) -> Result<bool, RewriteError> {
    let na = normalize_term(sig, a, fuel)?;
    let nb = normalize_term(sig, b, fuel)?;
    Ok(alpha_eq(&na, &nb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::size::{SizeExpr, SizeSubst, SizeVar};
    use crate::term::*;

    const FUEL: u64 = 10_000;

    fn nat(a: SizeExpr) -> Term {
        const_pred("nat", a)
    }
    fn inf() -> SizeExpr {
        SizeExpr::Infty
    }
    fn num(n: u32) -> Term {
        let mut t = symb("0");
        for _ in 0..n {
            t = app(symb("s"), t);
        }
        t
    }

    /// nat, 0, s, minus with the usual two rules, plus a looping symbol.
    fn arith_sig() -> Signature {
        let mut sig = Signature::new();
        sig.declare("nat", star(), true).unwrap();
        sig.declare("0", nat(inf()), false).unwrap();
        sig.declare("s", arrow(nat(inf()), nat(inf())), false).unwrap();
        sig.declare("minus", arrow(nat(inf()), arrow(nat(inf()), nat(inf()))), false)
            .unwrap();
        sig.declare("loop", nat(inf()), false).unwrap();
        let minus = |a, b| app_many(symb("minus"), [a, b]);
        sig.add_rule(RewriteRule::new(minus(var("x"), symb("0")), var("x"), Env::new()).unwrap());
        sig.add_rule(
            RewriteRule::new(
                minus(app(symb("s"), var("x")), app(symb("s"), var("y"))),
                minus(var("x"), var("y")),
                Env::new(),
            )
            .unwrap(),
        );
        sig.add_rule(RewriteRule::new(symb("loop"), symb("loop"), Env::new()).unwrap());
        sig
    }

    #[test]
    fn beta_reduction() {
        let sig = Signature::new();
        let t = app(abs("x", nat(inf()), app(symb("s"), var("x"))), symb("0"));
        assert_eq!(normalize_term(&sig, &t, FUEL).unwrap(), num(1));
    }

    #[test]
    fn rule_reduction() {
        let sig = arith_sig();
        let minus = |a, b| app_many(symb("minus"), [a, b]);
        assert_eq!(normalize_term(&sig, &minus(num(3), num(2)), FUEL).unwrap(), num(1));
        assert_eq!(normalize_term(&sig, &minus(num(0), num(0)), FUEL).unwrap(), num(0));
        // no rule for minus 0 (s y): stuck term is its own normal form
        let stuck = minus(num(0), num(1));
        assert_eq!(normalize_term(&sig, &stuck, FUEL).unwrap(), stuck);
    }

    #[test]
    fn rules_fire_under_binders_and_extra_args() {
        let mut sig = arith_sig();
        // k x y --> x, applied to three arguments
        sig.declare(
            "k",
            arrow(nat(inf()), arrow(nat(inf()), nat(inf()))),
            false,
        )
        .unwrap();
        sig.add_rule(
            RewriteRule::new(
                app_many(symb("k"), [var("x"), var("y")]),
                var("x"),
                Env::new(),
            )
            .unwrap(),
        );
        let t = app_many(symb("k"), [symb("s"), num(0), num(2)]);
        assert_eq!(normalize_term(&sig, &t, FUEL).unwrap(), num(3));

        let under = abs("z", nat(inf()), app_many(symb("minus"), [var("z"), num(0)]));
        assert!(alpha_eq(
            &normalize_term(&sig, &under, FUEL).unwrap(),
            &abs("z", nat(inf()), var("z"))
        ));
    }

    #[test]
    fn matching_ignores_size_annotations() {
        let mut sig = Signature::new();
        sig.declare("nat", star(), true).unwrap();
        sig.declare("bool", star(), true).unwrap();
        sig.declare("true", const_pred("bool", inf()), false).unwrap();
        sig.declare("isnat", arrow(star(), const_pred("bool", inf())), false)
            .unwrap();
        sig.add_rule(
            RewriteRule::new(
                app(symb("isnat"), nat(inf())),
                symb("true"),
                Env::new(),
            )
            .unwrap(),
        );
        let t = app(symb("isnat"), nat(SizeExpr::var("a").succ()));
        assert_eq!(normalize_term(&sig, &t, FUEL).unwrap(), symb("true"));
    }

    #[test]
    fn non_left_linear_patterns() {
        let mut sig = arith_sig();
        sig.declare("bool", star(), true).unwrap();
        sig.declare("true", const_pred("bool", inf()), false).unwrap();
        sig.declare(
            "same",
            arrow(nat(inf()), arrow(nat(inf()), const_pred("bool", inf()))),
            false,
        )
        .unwrap();
        sig.add_rule(
            RewriteRule::new(
                app_many(symb("same"), [var("x"), var("x")]),
                symb("true"),
                Env::new(),
            )
            .unwrap(),
        );
        let eq = app_many(symb("same"), [num(2), num(2)]);
        assert_eq!(normalize_term(&sig, &eq, FUEL).unwrap(), symb("true"));
        let ne = app_many(symb("same"), [num(2), num(1)]);
        assert_eq!(normalize_term(&sig, &ne, FUEL).unwrap(), ne);
    }

    #[test]
    fn earlier_rules_take_precedence() {
        let mut sig = Signature::new();
        sig.declare("nat", star(), true).unwrap();
        sig.declare("0", nat(inf()), false).unwrap();
        sig.declare("s", arrow(nat(inf()), nat(inf())), false).unwrap();
        sig.declare("f", arrow(nat(inf()), nat(inf())), false).unwrap();
        sig.add_rule(RewriteRule::new(app(symb("f"), var("x")), num(1), Env::new()).unwrap());
        sig.add_rule(RewriteRule::new(app(symb("f"), num(0)), num(2), Env::new()).unwrap());
        assert_eq!(normalize_term(&sig, &app(symb("f"), num(0)), FUEL).unwrap(), num(1));
    }

    #[test]
    fn fuel_runs_out_on_loops() {
        let sig = arith_sig();
        assert_eq!(
            normalize_term(&sig, &symb("loop"), 50),
            Err(RewriteError::FuelExhausted(50))
        );
        // an infinite beta loop is caught as well
        let omega_half = abs("x", star(), app(var("x"), var("x")));
        let omega = app(omega_half.clone(), omega_half);
        assert_eq!(
            normalize_term(&Signature::new(), &omega, 50),
            Err(RewriteError::FuelExhausted(50))
        );
    }

    #[test]
    fn convertible_modulo_reduction() {
        let sig = arith_sig();
        let minus = |a, b| app_many(symb("minus"), [a, b]);
        assert!(convertible(&sig, &minus(num(2), num(2)), &num(0), FUEL).unwrap());
        assert!(!convertible(&sig, &minus(num(2), num(1)), &num(0), FUEL).unwrap());
        let id = |v: &str| abs(v, nat(inf()), var(v));
        assert!(convertible(&sig, &id("x"), &id("y"), FUEL).unwrap());
    }

    #[test]
    fn normalization_commutes_with_size_substitution() {
        let sig = arith_sig();
        let alpha = SizeVar::new("a");
        let t = app(
            abs("A", star(), arrow(var("A"), var("A"))),
            nat(SizeExpr::Var(alpha.clone())),
        );
        let phi = SizeSubst::from_pairs([(alpha, SizeExpr::var("b").succ())]);
        let lhs = normalize_term(&sig, &t.subst_size(&phi), FUEL).unwrap();
        let rhs = normalize_term(&sig, &t, FUEL).unwrap().subst_size(&phi);
        assert!(alpha_eq(&lhs, &rhs));
    }
}
