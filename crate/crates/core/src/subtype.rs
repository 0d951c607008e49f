//! Subtyping induced by the order on sizes.
//!
//! On normal forms the relation is generated by three rules: reflexivity up
//! to alpha, widening of the size annotation on a fully applied constant
//! predicate symbol, and the usual contra/covariant rule for products. The
//! size rule demands syntactically equal argument lists without size
//! variables; only the head annotation may grow.

use crate::rewrite::{normalize_term, RewriteError};
use crate::size::size_leq;
use crate::term::{alpha_eq, fresh_name, subst_term, var, Signature, Term, TermSubst};

/// Subtyping on terms assumed to be in normal form.
pub fn subtype_nf(t: &Term, u: &Term) -> bool {
    if alpha_eq(t, u) {
        return true;
    }
    match (t, u) {
        (Term::Prod(x, a1, b1), Term::Prod(y, a2, b2)) => {
            if !subtype_nf(a2, a1) {
                return false;
            }
            let mut avoid = b1.free_vars();
            avoid.extend(b2.free_vars());
            avoid.insert(x.clone());
            avoid.insert(y.clone());
            let z = fresh_name(x, &avoid);
            let b1z = subst_term(b1, &TermSubst::one(x.clone(), var(z.clone())));
            let b2z = subst_term(b2, &TermSubst::one(y.clone(), var(z)));
            subtype_nf(&b1z, &b2z)
        }
        _ => {
            let (ht, at) = t.spine();
            let (hu, au) = u.spine();
            match (ht, hu) {
                (Term::ConstPred(c, a), Term::ConstPred(d, b)) => {
                    c == d
                        && at.len() == au.len()
                        && at.iter().zip(au.iter()).all(|(x, y)| alpha_eq(x, y))
                        && at.iter().all(|x| x.size_vars().is_empty())
                        && size_leq(a, b)
                }
                _ => false,
            }
        }
    }
}

/// Normalizes both sides, then compares them with `subtype_nf`.
pub fn subtype(sig: &Signature, t: &Term, u: &Term, fuel: u64) -> Result<bool, RewriteError> {
    let nt = normalize_term(sig, t, fuel)?;
    let nu = normalize_term(sig, u, fuel)?;
    Ok(subtype_nf(&nt, &nu))
}
