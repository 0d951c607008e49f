//! The algebra of size expressions.
//!
//! A size expression is a variable, a successor of a size expression, or the
//! infinite size `oo`. Normal forms have no successor above `oo`, so a normal
//! expression is either `oo` or a tower `s^k(a)` over a variable. Every
//! `SizeExpr` handed to another module is expected to be normal; the raw
//! constructors exist so that normalization itself can be written and tested.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A size variable. User-visible names come from the surface syntax; names
/// containing `#` (inference-fresh), `$` (solver-fresh) or `~` (oracle bases)
/// cannot be written in source files, which keeps the namespaces apart.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SizeVar(pub String);

impl SizeVar {
    pub fn new(name: impl Into<String>) -> Self {
        SizeVar(name.into())
    }
}

impl fmt::Display for SizeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SizeExpr {
    Var(SizeVar),
    Succ(Box<SizeExpr>),
    Infty,
}

impl fmt::Display for SizeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeExpr::Var(v) => write!(f, "{v}"),
            SizeExpr::Succ(a) => match a.as_ref() {
                SizeExpr::Var(v) => write!(f, "s {v}"),
                inner => write!(f, "s ({inner})"),
            },
            SizeExpr::Infty => write!(f, "oo"),
        }
    }
}

/// The base of a normal size expression: a variable or `oo`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeBase<'a> {
    Var(&'a SizeVar),
    Infty,
}

impl SizeExpr {
    pub fn var(name: impl Into<String>) -> Self {
        SizeExpr::Var(SizeVar::new(name))
    }

    /// `s a`, already normalized: a successor of `oo` collapses to `oo`.
    pub fn succ(self) -> Self {
        match self {
            SizeExpr::Infty => SizeExpr::Infty,
            a => SizeExpr::Succ(Box::new(a)),
        }
    }

    /// `s^k(base)`, normalized.
    pub fn from_parts(k: u32, base: SizeExpr) -> Self {
        let mut e = base;
        for _ in 0..k {
            e = e.succ();
        }
        e
    }

    /// Splits a normal expression into successor count and base.
    /// On a non-normal expression the count includes successors above `oo`.
    pub fn parts(&self) -> (u32, SizeBase<'_>) {
        let mut k = 0;
        let mut e = self;
        while let SizeExpr::Succ(inner) = e {
            k += 1;
            e = inner;
        }
        match e {
            SizeExpr::Var(v) => (k, SizeBase::Var(v)),
            SizeExpr::Infty => (k, SizeBase::Infty),
            SizeExpr::Succ(_) => unreachable!(),
        }
    }

    pub fn is_infty(&self) -> bool {
        matches!(self, SizeExpr::Infty)
    }

    pub fn vars(&self) -> BTreeSet<SizeVar> {
        let mut out = BTreeSet::new();
        let (_, base) = self.parts();
        if let SizeBase::Var(v) = base {
            out.insert(v.clone());
        }
        out
    }
}

/// Rewrites `s oo` to `oo` exhaustively, yielding the unique normal form.
pub fn normalize(a: &SizeExpr) -> SizeExpr {
    let (k, base) = a.parts();
    match base {
        SizeBase::Infty => SizeExpr::Infty,
        SizeBase::Var(v) => SizeExpr::from_parts(k, SizeExpr::Var(v.clone())),
    }
}

/// Decides the size quasi-order on normal forms: everything is below `oo`,
/// and `s^p a <= s^q a` exactly when `p <= q`. Distinct bases are unrelated.
pub fn size_leq(a: &SizeExpr, b: &SizeExpr) -> bool {
    let (p, ab) = a.parts();
    let (q, bb) = b.parts();
    match (ab, bb) {
        (_, SizeBase::Infty) => true,
        (SizeBase::Infty, SizeBase::Var(_)) => false,
        (SizeBase::Var(x), SizeBase::Var(y)) => x == y && p <= q,
    }
}

/// A substitution on size variables. Variables outside the domain map to
/// themselves.
///
/// Images are stored as given. The constraint solver may bind a variable to a
/// successor tower over `oo`: equations treat `s` as a free constructor, so
/// `s oo` and `oo` are different solutions of an equation even though the
/// size order cannot tell them apart. `apply` renormalizes its result; use
/// `apply_raw` where that distinction matters.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SizeSubst {
    map: BTreeMap<SizeVar, SizeExpr>,
}

impl SizeSubst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (SizeVar, SizeExpr)>) -> Self {
        let mut s = Self::new();
        for (v, e) in pairs {
            s.bind(v, e);
        }
        s
    }

    pub fn bind(&mut self, v: SizeVar, e: SizeExpr) {
        self.map.insert(v, e);
    }

    pub fn get(&self, v: &SizeVar) -> Option<&SizeExpr> {
        self.map.get(v)
    }

    /// Image of a variable, identity outside the domain.
    pub fn image(&self, v: &SizeVar) -> SizeExpr {
        self.map
            .get(v)
            .cloned()
            .unwrap_or_else(|| SizeExpr::Var(v.clone()))
    }

    pub fn domain(&self) -> impl Iterator<Item = &SizeVar> {
        self.map.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SizeVar, &SizeExpr)> {
        self.map.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    /// Applies the substitution and renormalizes.
    pub fn apply(&self, a: &SizeExpr) -> SizeExpr {
        normalize(&self.apply_raw(a))
    }

    /// Applies the substitution structurally, keeping any `s` applied to an
    /// `oo` image. Equation satisfaction compares such raw results.
    pub fn apply_raw(&self, a: &SizeExpr) -> SizeExpr {
        let (k, base) = a.parts();
        let img = match base {
            SizeBase::Infty => SizeExpr::Infty,
            SizeBase::Var(v) => self.image(v),
        };
        let mut out = img;
        for _ in 0..k {
            out = SizeExpr::Succ(Box::new(out));
        }
        out
    }

    /// `self` then `other`: the substitution with domain
    /// `dom(self) ∪ dom(other)` mapping `v` to `other(self(v))`.
    pub fn then(&self, other: &SizeSubst) -> SizeSubst {
        let mut out = SizeSubst::new();
        for (v, e) in self.iter() {
            out.bind(v.clone(), other.apply_raw(e));
        }
        for (v, e) in other.iter() {
            if !out.map.contains_key(v) {
                out.bind(v.clone(), e.clone());
            }
        }
        out
    }

    /// Base variables occurring in range expressions.
    pub fn range_vars(&self) -> BTreeSet<SizeVar> {
        let mut out = BTreeSet::new();
        for (_, e) in self.iter() {
            out.extend(e.vars());
        }
        out
    }
}

impl fmt::Display for SizeSubst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, e)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v} := {e}")?;
        }
        write!(f, "}}")
    }
}

/// Pointwise order on substitutions: `phi(v) <= psi(v)` for every variable in
/// either domain (identity elsewhere, so variables bound on one side only are
/// compared against themselves).
pub fn subst_leq(phi: &SizeSubst, psi: &SizeSubst) -> bool {
    let mut vars: BTreeSet<&SizeVar> = phi.domain().collect();
    vars.extend(psi.domain());
    vars.iter()
        .all(|v| size_leq(&phi.image(v), &psi.image(v)))
}

/// Decides whether `phi` is more general than `psi`: is there a `chi` with
/// `(v phi) chi <= v psi` for every binding `v` of `phi`?
///
/// Requirements are grouped by the base variable of each binding's image.
/// A binding `v := oo` demands `v psi = oo` outright. A binding `v := s^k b`
/// demands `s^k (b chi) <= v psi`; an `oo` target is vacuous, and the finite
/// targets must share one base, with `b chi` the pointwise minimum
/// `s^(min(q - k))` of that base.
pub fn more_general(phi: &SizeSubst, psi: &SizeSubst) -> bool {
    // per range base: list of (k, target) requirements with finite targets
    let mut reqs: BTreeMap<SizeVar, Vec<(u32, SizeExpr)>> = BTreeMap::new();
    for (v, e) in phi.iter() {
        let target = normalize(&psi.image(v));
        let (k, base) = e.parts();
        match base {
            SizeBase::Infty => {
                if !target.is_infty() {
                    return false;
                }
            }
            SizeBase::Var(b) => {
                reqs.entry(b.clone()).or_default().push((k, target));
            }
        }
    }
    for (_, targets) in reqs {
        let mut bound: Option<(SizeVar, i64)> = None;
        for (k, t) in targets {
            let (q, tb) = t.parts();
            match tb {
                SizeBase::Infty => continue,
                SizeBase::Var(g) => {
                    let slack = q as i64 - k as i64;
                    match &mut bound {
                        None => bound = Some((g.clone(), slack)),
                        Some((g0, s0)) => {
                            if g0 != g {
                                return false;
                            }
                            *s0 = (*s0).min(slack);
                        }
                    }
                }
            }
        }
        if let Some((_, slack)) = bound {
            if slack < 0 {
                return false;
            }
        }
    }
    true
}

/// Witness search behind `more_general`, used to cross-check the decision
/// procedure: enumerate every `chi` whose domain is the base variables of
/// `phi`'s range, with images `oo` or `s^k g` for `g` occurring in `psi` and
/// `k <= max_exp`, and test the defining condition directly.
pub fn more_general_brute(phi: &SizeSubst, psi: &SizeSubst, max_exp: u32) -> bool {
    let bases: Vec<SizeVar> = phi.range_vars().into_iter().collect();
    let mut candidates: Vec<SizeExpr> = vec![SizeExpr::Infty];
    // the witness only has to reach the comparison targets psi(v), v in dom(phi)
    let mut target_vars: BTreeSet<SizeVar> = BTreeSet::new();
    for v in phi.domain() {
        target_vars.extend(psi.image(v).vars());
    }
    for g in &target_vars {
        for k in 0..=max_exp {
            candidates.push(SizeExpr::from_parts(k, SizeExpr::Var(g.clone())));
        }
    }
    let n = bases.len();
    let mut idx = vec![0usize; n];
    loop {
        let chi = SizeSubst::from_pairs(
            bases
                .iter()
                .cloned()
                .zip(idx.iter().map(|&i| candidates[i].clone())),
        );
        let ok = phi
            .iter()
            .all(|(v, e)| size_leq(&chi.apply(e), &psi.image(v)));
        if ok {
            return true;
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == n {
                return false;
            }
            idx[pos] += 1;
            if idx[pos] < candidates.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
