//! Size constraint problems and their generation from type comparisons.
//!
//! A problem is either unsatisfiable or a finite conjunction of equations
//! `a = b` and inequations `a <= b` between size expressions. Atoms are kept
//! normalized and deduplicated; equations are stored orientation-free by
//! ordering the two sides.

use crate::size::{normalize, size_leq, SizeExpr, SizeSubst, SizeVar};
use crate::term::{fresh_name, subst_term, var, Term, TermSubst};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintProblem {
    Bottom,
    Conj {
        eqs: BTreeSet<(SizeExpr, SizeExpr)>,
        ineqs: BTreeSet<(SizeExpr, SizeExpr)>,
    },
}

impl ConstraintProblem {
    /// The empty conjunction, satisfied by everything.
    pub fn top() -> Self {
        ConstraintProblem::Conj {
            eqs: BTreeSet::new(),
            ineqs: BTreeSet::new(),
        }
    }

    pub fn bottom() -> Self {
        ConstraintProblem::Bottom
    }

    pub fn eq(a: SizeExpr, b: SizeExpr) -> Self {
        let mut c = Self::top();
        c.add_eq(a, b);
        c
    }

    pub fn leq(a: SizeExpr, b: SizeExpr) -> Self {
        let mut c = Self::top();
        c.add_leq(a, b);
        c
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, ConstraintProblem::Bottom)
    }

    pub fn is_top(&self) -> bool {
        match self {
            ConstraintProblem::Bottom => false,
            ConstraintProblem::Conj { eqs, ineqs } => eqs.is_empty() && ineqs.is_empty(),
        }
    }

    pub fn add_eq(&mut self, a: SizeExpr, b: SizeExpr) {
        if let ConstraintProblem::Conj { eqs, .. } = self {
            let a = normalize(&a);
            let b = normalize(&b);
            let atom = if b < a { (b, a) } else { (a, b) };
            eqs.insert(atom);
        }
    }

    pub fn add_leq(&mut self, a: SizeExpr, b: SizeExpr) {
        if let ConstraintProblem::Conj { ineqs, .. } = self {
            ineqs.insert((normalize(&a), normalize(&b)));
        }
    }

    /// Conjunction; `Bottom` absorbs.
    pub fn and(self, other: ConstraintProblem) -> ConstraintProblem {
        match (self, other) {
            (ConstraintProblem::Bottom, _) | (_, ConstraintProblem::Bottom) => {
                ConstraintProblem::Bottom
            }
            (
                ConstraintProblem::Conj { mut eqs, mut ineqs },
                ConstraintProblem::Conj {
                    eqs: e2,
                    ineqs: i2,
                },
            ) => {
                eqs.extend(e2);
                ineqs.extend(i2);
                ConstraintProblem::Conj { eqs, ineqs }
            }
        }
    }

    pub fn eqs(&self) -> impl Iterator<Item = &(SizeExpr, SizeExpr)> {
        match self {
            ConstraintProblem::Bottom => None.into_iter().flatten(),
            ConstraintProblem::Conj { eqs, .. } => Some(eqs.iter()).into_iter().flatten(),
        }
    }

    pub fn ineqs(&self) -> impl Iterator<Item = &(SizeExpr, SizeExpr)> {
        match self {
            ConstraintProblem::Bottom => None.into_iter().flatten(),
            ConstraintProblem::Conj { ineqs, .. } => Some(ineqs.iter()).into_iter().flatten(),
        }
    }

    pub fn vars(&self) -> BTreeSet<SizeVar> {
        let mut out = BTreeSet::new();
        for (a, b) in self.eqs().chain(self.ineqs()) {
            out.extend(a.vars());
            out.extend(b.vars());
        }
        out
    }

    /// Number of atoms; `Bottom` has none.
    pub fn len(&self) -> usize {
        match self {
            ConstraintProblem::Bottom => 0,
            ConstraintProblem::Conj { eqs, ineqs } => eqs.len() + ineqs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Does `phi` solve the problem? An equation is satisfied when both sides
    /// become the same expression under raw substitution: `s` is a free
    /// constructor here, so `s oo` does not count as `oo`. An inequation is
    /// satisfied in the size order, which does identify the two.
    pub fn satisfies(&self, phi: &SizeSubst) -> bool {
        match self {
            ConstraintProblem::Bottom => false,
            ConstraintProblem::Conj { eqs, ineqs } => {
                eqs.iter()
                    .all(|(a, b)| phi.apply_raw(a) == phi.apply_raw(b))
                    && ineqs
                        .iter()
                        .all(|(a, b)| size_leq(&phi.apply_raw(a), &phi.apply_raw(b)))
            }
        }
    }

    pub fn subst(&self, phi: &SizeSubst) -> ConstraintProblem {
        match self {
            ConstraintProblem::Bottom => ConstraintProblem::Bottom,
            ConstraintProblem::Conj { eqs, ineqs } => {
                let mut out = ConstraintProblem::top();
                for (a, b) in eqs {
                    out.add_eq(phi.apply(a), phi.apply(b));
                }
                for (a, b) in ineqs {
                    out.add_leq(phi.apply(a), phi.apply(b));
                }
                out
            }
        }
    }
}

impl fmt::Display for ConstraintProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintProblem::Bottom => write!(f, "unsatisfiable"),
            ConstraintProblem::Conj { eqs, ineqs } => {
                if self.is_top() {
                    return write!(f, "(empty)");
                }
                let mut first = true;
                for (a, b) in eqs {
                    if !first {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a} = {b}")?;
                    first = false;
                }
                for (a, b) in ineqs {
                    if !first {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a} <= {b}")?;
                    first = false;
                }
                Ok(())
            }
        }
    }
}

/// Equates two terms componentwise. With `force_inf` set, every annotation
/// met is additionally pushed to `oo`; this is used below the arguments of a
/// compared constant predicate symbol, where subtyping requires ground,
/// hence infinite, annotations.
fn gen_eq(t: &Term, u: &Term, force_inf: bool) -> ConstraintProblem {
    match (t, u) {
        (Term::Sort(s1), Term::Sort(s2)) if s1 == s2 => ConstraintProblem::top(),
        (Term::Var(x), Term::Var(y)) if x == y => ConstraintProblem::top(),
        (Term::Symb(f), Term::Symb(g)) if f == g => ConstraintProblem::top(),
        (Term::ConstPred(c, a), Term::ConstPred(d, b)) if c == d => {
            let mut out = ConstraintProblem::eq(a.clone(), b.clone());
            if force_inf {
                out.add_leq(SizeExpr::Infty, a.clone());
            }
            out
        }
        (Term::App(f1, a1), Term::App(f2, a2)) => {
            gen_eq(f1, f2, force_inf).and(gen_eq(a1, a2, force_inf))
        }
        (Term::Abs(x, t1, b1), Term::Abs(y, t2, b2))
        | (Term::Prod(x, t1, b1), Term::Prod(y, t2, b2)) => {
            let (b1z, b2z) = align_binders(x, b1, y, b2);
            gen_eq(t1, t2, force_inf).and(gen_eq(&b1z, &b2z, force_inf))
        }
        _ => ConstraintProblem::bottom(),
    }
}

/// Renames both bodies so their binders agree on one fresh variable.
fn align_binders(x: &str, b1: &Term, y: &str, b2: &Term) -> (Term, Term) {
    if x == y {
        return (b1.clone(), b2.clone());
    }
    let mut avoid = b1.free_vars();
    avoid.extend(b2.free_vars());
    avoid.insert(x.to_string());
    avoid.insert(y.to_string());
    let z = fresh_name(x, &avoid);
    (
        subst_term(b1, &TermSubst::one(x.to_string(), var(z.clone()))),
        subst_term(b2, &TermSubst::one(y.to_string(), var(z))),
    )
}

/// Constraints whose solutions make `t` a subtype of `u`. Both terms are
/// expected in normal form; the caller normalizes.
pub fn gen_sub(t: &Term, u: &Term) -> ConstraintProblem {
    if let (Term::Prod(x, a1, b1), Term::Prod(y, a2, b2)) = (t, u) {
        let (b1z, b2z) = align_binders(x, b1, y, b2);
        return gen_sub(a2, a1).and(gen_sub(&b1z, &b2z));
    }
    let (ht, at) = t.spine();
    let (hu, au) = u.spine();
    if let (Term::ConstPred(c, a), Term::ConstPred(d, b)) = (ht, hu) {
        if c == d && at.len() == au.len() {
            let mut out = ConstraintProblem::leq(a.clone(), b.clone());
            for (x, y) in at.iter().zip(au.iter()) {
                out = out.and(gen_eq(x, y, true));
            }
            return out;
        }
    }
    gen_eq(t, u, false)
}
