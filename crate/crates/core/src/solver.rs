//! Constraint solving: satisfiability and smallest solutions.
//!
//! Equalities are solved by first-order unification over the free algebra of
//! `s`-towers on variables and the constant `oo`; a substitution is threaded
//! into the inequalities as variables are eliminated. Inequalities are then
//! reduced to a set of variables forced to `oo` plus a linear part whose
//! dependency graph has no cycle of positive total cost; the pointwise-least
//! solution of the linear part is read off by longest-path relaxation. The
//! composition of the three layers is the most general solution.
//!
//! Mid-solve atoms can contain towers over `oo` (from substituting `oo`
//! under a successor); they are kept as-is, since equations distinguish
//! `s oo` from `oo`.

use crate::constraint::ConstraintProblem;
use crate::size::{normalize, size_leq, SizeBase, SizeExpr, SizeSubst, SizeVar};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub type Atom = (SizeExpr, SizeExpr);

fn orient(a: SizeExpr, b: SizeExpr) -> Atom {
    if b < a {
        (b, a)
    } else {
        (a, b)
    }
}

/// Tower height plus a leaf weight of 1 for `oo` and 2 for a variable.
/// The per-step termination arguments count these.
fn weight(e: &SizeExpr) -> usize {
    let (k, base) = e.parts();
    k as usize
        + match base {
            SizeBase::Infty => 1,
            SizeBase::Var(_) => 2,
        }
}

fn atom_vars(atom: &Atom) -> BTreeSet<SizeVar> {
    let mut s = atom.0.vars();
    s.extend(atom.1.vars());
    s
}

fn subst_atom_raw(phi: &SizeSubst, (a, b): &Atom) -> (SizeExpr, SizeExpr) {
    (phi.apply_raw(a), phi.apply_raw(b))
}

/// State of the equality phase: failed, or pending equations, a solved
/// substitution-in-progress, and the inequalities receiving eliminations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverState {
    Bot,
    Triple {
        pending: BTreeSet<Atom>,
        solved: Vec<(SizeVar, SizeExpr)>,
        ineqs: BTreeSet<Atom>,
    },
}

impl SolverState {
    pub fn from_problem(c: &ConstraintProblem) -> SolverState {
        match c {
            ConstraintProblem::Bottom => SolverState::Bot,
            _ => SolverState::Triple {
                pending: c.eqs().cloned().collect(),
                solved: Vec::new(),
                ineqs: c.ineqs().cloned().collect(),
            },
        }
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, SolverState::Bot)
    }

    /// The solved zone as a substitution.
    pub fn solved_subst(&self) -> SizeSubst {
        match self {
            SolverState::Bot => SizeSubst::new(),
            SolverState::Triple { solved, .. } => SizeSubst::from_pairs(solved.iter().cloned()),
        }
    }

    /// Solutions of a state: every zone holds. Pending and solved equations
    /// use the raw reading, inequalities the size order.
    pub fn satisfies(&self, phi: &SizeSubst) -> bool {
        match self {
            SolverState::Bot => false,
            SolverState::Triple {
                pending,
                solved,
                ineqs,
            } => {
                pending
                    .iter()
                    .all(|(a, b)| phi.apply_raw(a) == phi.apply_raw(b))
                    && solved.iter().all(|(v, e)| {
                        phi.apply_raw(&SizeExpr::Var(v.clone())) == phi.apply_raw(e)
                    })
                    && ineqs
                        .iter()
                        .all(|(a, b)| size_leq(&phi.apply_raw(a), &phi.apply_raw(b)))
            }
        }
    }
}

impl fmt::Display for SolverState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverState::Bot => write!(f, "unsatisfiable"),
            SolverState::Triple {
                pending,
                solved,
                ineqs,
            } => {
                let eq_strs: Vec<String> =
                    pending.iter().map(|(a, b)| format!("{a} = {b}")).collect();
                let solved_strs: Vec<String> =
                    solved.iter().map(|(v, e)| format!("{v} = {e}")).collect();
                let ineq_strs: Vec<String> =
                    ineqs.iter().map(|(a, b)| format!("{a} <= {b}")).collect();
                write!(
                    f,
                    "pending: [{}]  solved: [{}]  order: [{}]",
                    eq_strs.join(", "),
                    solved_strs.join(", "),
                    ineq_strs.join(", ")
                )
            }
        }
    }
}

/// Termination measure of the equality phase: number of pending atoms, then
/// their total weight. Every step decreases it lexicographically.
pub fn eq_measure(st: &SolverState) -> (usize, usize) {
    match st {
        SolverState::Bot => (0, 0),
        SolverState::Triple { pending, .. } => (
            pending.len(),
            pending.iter().map(|(a, b)| weight(a) + weight(b)).sum(),
        ),
    }
}

/// One unification step on the least pending atom. `None` when no equation
/// is pending (or the state is failed).
pub fn eq_step(st: &SolverState) -> Option<SolverState> {
    let (pending, solved, ineqs) = match st {
        SolverState::Bot => return None,
        SolverState::Triple {
            pending,
            solved,
            ineqs,
        } => (pending, solved, ineqs),
    };
    let atom = pending.iter().next()?.clone();
    let mut rest = pending.clone();
    rest.remove(&atom);
    let (x, y) = &atom;

    // trivial pair
    if x == y {
        return Some(SolverState::Triple {
            pending: rest,
            solved: solved.clone(),
            ineqs: ineqs.clone(),
        });
    }
    // peel one successor from both sides
    if let (SizeExpr::Succ(a), SizeExpr::Succ(b)) = (x, y) {
        rest.insert(orient(a.as_ref().clone(), b.as_ref().clone()));
        return Some(SolverState::Triple {
            pending: rest,
            solved: solved.clone(),
            ineqs: ineqs.clone(),
        });
    }
    // the constant oo never equals a successor of anything
    if matches!((x, y), (SizeExpr::Infty, SizeExpr::Succ(_)))
        || matches!((x, y), (SizeExpr::Succ(_), SizeExpr::Infty))
    {
        return Some(SolverState::Bot);
    }
    // a variable against some other expression
    let (v, o) = match (x, y) {
        (SizeExpr::Var(v), o) | (o, SizeExpr::Var(v)) => (v.clone(), o.clone()),
        _ => unreachable!("covered: equal, succ/succ, infty/succ"),
    };
    // occurs check: v = s^(k+1) v has no finite tree solution
    if let (_, SizeBase::Var(b)) = o.parts() {
        if *b == v {
            return Some(SolverState::Bot);
        }
    }
    // eliminate v, propagating into all three zones
    let theta = SizeSubst::from_pairs([(v.clone(), o.clone())]);
    let pending2 = rest
        .iter()
        .map(|at| {
            let (a, b) = subst_atom_raw(&theta, at);
            orient(a, b)
        })
        .collect();
    let mut solved2: Vec<(SizeVar, SizeExpr)> = solved
        .iter()
        .map(|(w, e)| (w.clone(), theta.apply_raw(e)))
        .collect();
    solved2.push((v, o));
    let ineqs2 = ineqs.iter().map(|at| subst_atom_raw(&theta, at)).collect();
    Some(SolverState::Triple {
        pending: pending2,
        solved: solved2,
        ineqs: ineqs2,
    })
}

/// Runs the unification rules to their normal form: `Bot` or a state with no
/// pending equation and the solved zone in solved form.
pub fn simplify_equalities(mut st: SolverState) -> SolverState {
    while let Some(next) = eq_step(&st) {
        st = next;
        if st.is_bot() {
            break;
        }
    }
    st
}

/// Dependency graph of a conjunction of linear inequalities: one vertex per
/// variable, one edge `a --(p-q)--> b` per atom `s^p a <= s^q b`.
#[derive(Debug, Clone)]
pub struct DepGraph {
    pub vars: Vec<SizeVar>,
    /// (from, to, cost, originating atom)
    pub edges: Vec<(usize, usize, i64, Atom)>,
}

pub fn dep_graph(lin: &BTreeSet<Atom>) -> DepGraph {
    let mut vars: BTreeSet<SizeVar> = BTreeSet::new();
    for at in lin {
        vars.extend(atom_vars(at));
    }
    let vars: Vec<SizeVar> = vars.into_iter().collect();
    let index: BTreeMap<&SizeVar, usize> = vars.iter().zip(0..).collect();
    let mut edges = Vec::new();
    for at in lin {
        let (p, ab) = at.0.parts();
        let (q, bb) = at.1.parts();
        if let (SizeBase::Var(a), SizeBase::Var(b)) = (ab, bb) {
            edges.push((index[a], index[b], p as i64 - q as i64, at.clone()));
        }
    }
    DepGraph { vars, edges }
}

/// Finds a cyclic path of positive total cost, returning the atoms of its
/// edges, or `None` when every cycle has cost <= 0.
///
/// Longest-path relaxation from a zero-initialized front stabilizes within
/// |V| rounds exactly when no positive cycle exists; an edge still relaxable
/// afterwards pins a vertex whose predecessor chain must loop through a
/// positive cycle.
pub fn find_increasing_cycle(g: &DepGraph) -> Option<Vec<Atom>> {
    let n = g.vars.len();
    if n == 0 {
        return None;
    }
    let mut dist = vec![0i64; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    for _ in 0..n {
        let mut changed = false;
        for (i, &(u, v, c, _)) in g.edges.iter().enumerate() {
            if dist[u] + c > dist[v] {
                dist[v] = dist[u] + c;
                pred[v] = Some(i);
                changed = true;
            }
        }
        if !changed {
            return None;
        }
    }
    // still relaxable: recover the cycle through the predecessor links
    let (i0, &(_, v0, _, _)) = g
        .edges
        .iter()
        .enumerate()
        .find(|(_, &(u, v, c, _))| dist[u] + c > dist[v])?;
    pred[v0] = Some(i0);
    // walk back n steps to be certain we sit inside a cycle
    let mut x = v0;
    for _ in 0..n {
        x = g.edges[pred[x].expect("walked into an unreached vertex")].0;
    }
    let mut cycle = Vec::new();
    let mut cost = 0i64;
    let mut w = x;
    loop {
        let e = pred[w].expect("cycle vertex without predecessor");
        let (u, _, c, ref atom) = g.edges[e];
        cycle.push(atom.clone());
        cost += c;
        w = u;
        if w == x {
            break;
        }
    }
    debug_assert!(cost > 0, "recovered cycle must be increasing");
    cycle.reverse();
    Some(cycle)
}

/// Inequalities reduced to variables forced to `oo` plus a linear part with
/// no increasing cycle; the two mention disjoint variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReducedForm {
    pub inf_vars: BTreeSet<SizeVar>,
    pub lin_part: BTreeSet<Atom>,
}

impl fmt::Display for ReducedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.inf_vars.iter().map(|v| format!("oo <= {v}")).collect();
        parts.extend(self.lin_part.iter().map(|(a, b)| format!("{a} <= {b}")));
        if parts.is_empty() {
            write!(f, "(empty)")
        } else {
            write!(f, "{}", parts.join(", "))
        }
    }
}

/// Termination measure of the inequality phase: total atom weight, then the
/// multiset of variable occurrence counts, compared as a descending sequence.
pub fn ineq_measure(c: &BTreeSet<Atom>) -> (usize, Vec<usize>) {
    let total = c.iter().map(|(a, b)| weight(a) + weight(b)).sum();
    let mut occ: BTreeMap<SizeVar, usize> = BTreeMap::new();
    for at in c {
        for side in [&at.0, &at.1] {
            if let (_, SizeBase::Var(v)) = side.parts() {
                *occ.entry(v.clone()).or_default() += 1;
            }
        }
    }
    let mut counts: Vec<usize> = occ.into_values().collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    (total, counts)
}

/// One reduction step on a conjunction of inequalities, or `None` at normal
/// form. In order: drop an atom bounded by an `oo` tower on the right;
/// propagate an `oo` tower on the left into the other atoms; collapse an
/// increasing cycle to `oo <= a` for its variables.
pub fn ineq_step(c: &BTreeSet<Atom>) -> Option<BTreeSet<Atom>> {
    // (1) a <= s^k oo always holds
    for at in c {
        if matches!(at.1.parts(), (_, SizeBase::Infty)) {
            let mut next = c.clone();
            next.remove(at);
            return Some(next);
        }
    }
    // (3) s^k oo <= s^l a forces a to oo
    for at in c {
        if let ((k, SizeBase::Infty), (l, SizeBase::Var(v))) = (at.0.parts(), at.1.parts()) {
            let v = v.clone();
            let mut rest = c.clone();
            rest.remove(at);
            let occurs_elsewhere = rest.iter().any(|other| atom_vars(other).contains(&v));
            if k == 0 && l == 0 && !occurs_elsewhere {
                // already the reduced atom oo <= v with v isolated
                continue;
            }
            let theta = SizeSubst::from_pairs([(v.clone(), SizeExpr::Infty)]);
            let mut next: BTreeSet<Atom> =
                rest.iter().map(|a| subst_atom_raw(&theta, a)).collect();
            next.insert((SizeExpr::Infty, SizeExpr::Var(v)));
            return Some(next);
        }
    }
    // (2) an increasing cycle forces all its variables to oo
    let lin: BTreeSet<Atom> = c
        .iter()
        .filter(|at| {
            matches!(at.0.parts(), (_, SizeBase::Var(_)))
                && matches!(at.1.parts(), (_, SizeBase::Var(_)))
        })
        .cloned()
        .collect();
    let cycle = find_increasing_cycle(&dep_graph(&lin))?;
    let mut next = c.clone();
    let mut forced = BTreeSet::new();
    for at in &cycle {
        next.remove(at);
        forced.extend(atom_vars(at));
    }
    for v in forced {
        next.insert((SizeExpr::Infty, SizeExpr::Var(v)));
    }
    Some(next)
}

/// Reduces a conjunction of inequalities and splits the normal form.
pub fn simplify_inequalities(ineqs: &BTreeSet<Atom>) -> ReducedForm {
    let mut c = ineqs.clone();
    while let Some(next) = ineq_step(&c) {
        c = next;
    }
    let mut out = ReducedForm::default();
    for at in c {
        match (at.0.parts(), at.1.parts()) {
            ((0, SizeBase::Infty), (0, SizeBase::Var(v))) => {
                out.inf_vars.insert(v.clone());
            }
            _ => {
                out.lin_part.insert(at);
            }
        }
    }
    debug_assert!(
        {
            let lin_vars: BTreeSet<SizeVar> =
                out.lin_part.iter().flat_map(|a| atom_vars(a)).collect();
            lin_vars.is_disjoint(&out.inf_vars)
        },
        "reduced form must split the variables"
    );
    out
}

/// The pointwise-least solution of a linear part with no increasing cycle:
/// the least nonnegative `z` with `z_a + p <= z_b + q` per atom
/// `s^p a <= s^q b`, realized as `a := s^(z_a) g_c` with one fresh base `g_c`
/// per connected component. Fresh bases avoid the given set.
pub fn minimal_linear_solution(lin: &BTreeSet<Atom>, avoid: &BTreeSet<SizeVar>) -> SizeSubst {
    let g = dep_graph(lin);
    let n = g.vars.len();
    let mut z = vec![0i64; n];
    for round in 0..=n {
        let mut changed = false;
        for &(u, v, c, _) in &g.edges {
            if z[u] + c > z[v] {
                z[v] = z[u] + c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        debug_assert!(round < n, "linear part must have no increasing cycle");
    }
    // connected components of the undirected graph
    let mut comp = vec![usize::MAX; n];
    let mut adj = vec![Vec::new(); n];
    for &(u, v, _, _) in &g.edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut next_comp = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            if comp[x] != usize::MAX {
                continue;
            }
            comp[x] = next_comp;
            stack.extend(adj[x].iter().copied());
        }
        next_comp += 1;
    }
    // one fresh base per component, in order of each component's least vertex
    let mut bases: Vec<Option<SizeVar>> = vec![None; next_comp];
    let mut counter = 0u64;
    let mut fresh = || loop {
        let cand = SizeVar::new(format!("${counter}"));
        counter += 1;
        if !avoid.contains(&cand) {
            return cand;
        }
    };
    let mut out = SizeSubst::new();
    for i in 0..n {
        let base = bases[comp[i]].get_or_insert_with(&mut fresh).clone();
        out.bind(
            g.vars[i].clone(),
            SizeExpr::from_parts(z[i] as u32, SizeExpr::Var(base)),
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Sat(SizeSubst),
    Unsat,
}

impl Solution {
    pub fn is_sat(&self) -> bool {
        matches!(self, Solution::Sat(_))
    }

    pub fn subst(&self) -> Option<&SizeSubst> {
        match self {
            Solution::Sat(phi) => Some(phi),
            Solution::Unsat => None,
        }
    }
}

/// Intermediate stages of one `solve` run, for diagnostics.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub after_equalities: SolverState,
    pub reduced: Option<ReducedForm>,
    pub result: Solution,
}

pub fn solve(c: &ConstraintProblem) -> Solution {
    solve_with_report(c).result
}

/// Unification, then inequality reduction, then the least linear solution;
/// the most general solution is their composition.
pub fn solve_with_report(c: &ConstraintProblem) -> SolveReport {
    let st = simplify_equalities(SolverState::from_problem(c));
    if st.is_bot() {
        return SolveReport {
            after_equalities: SolverState::Bot,
            reduced: None,
            result: Solution::Unsat,
        };
    }
    let (solved, ineqs) = match &st {
        SolverState::Triple { solved, ineqs, .. } => (solved.clone(), ineqs.clone()),
        SolverState::Bot => unreachable!(),
    };
    let reduced = simplify_inequalities(&ineqs);
    // everything forced infinite, plus the least solution of the linear part
    let mut rho = SizeSubst::new();
    for v in &reduced.inf_vars {
        rho.bind(v.clone(), SizeExpr::Infty);
    }
    let mut avoid: BTreeSet<SizeVar> = c.vars();
    for (v, e) in &solved {
        avoid.insert(v.clone());
        avoid.extend(e.vars());
    }
    avoid.extend(reduced.inf_vars.iter().cloned());
    let phi_z = minimal_linear_solution(&reduced.lin_part, &avoid);
    for (v, e) in phi_z.iter() {
        rho.bind(v.clone(), e.clone());
    }
    let mgs = SizeSubst::from_pairs(solved).then(&rho);
    SolveReport {
        after_equalities: st,
        reduced: Some(reduced),
        result: Solution::Sat(mgs),
    }
}

/// Whether `phi` treats each base group of `mgs` uniformly: variables whose
/// `mgs` images are finite towers over one shared base must be either all
/// finite or all infinite under `phi`.
///
/// The computed solution is least among such solutions. It cannot be least
/// outside them, and nothing can: a problem like `a <= s (s c), s b <= c`
/// ties `a`, `b`, `c` to one base in every solution that keeps `c` finite,
/// while the solution sending `c` to `oo` leaves `a` and `b` on unrelated
/// bases; no single solution sits below both shapes.
pub fn base_coherent(mgs: &SizeSubst, phi: &SizeSubst) -> bool {
    let mut groups: BTreeMap<SizeVar, Vec<&SizeVar>> = BTreeMap::new();
    for (v, e) in mgs.iter() {
        if let (_, SizeBase::Var(b)) = e.parts() {
            groups.entry(b.clone()).or_default().push(v);
        }
    }
    groups.values().all(|vs| {
        let mut statuses = vs
            .iter()
            .map(|v| normalize(&phi.image(v)).is_infty());
        let first = statuses.next();
        first.map_or(true, |f| statuses.all(|s| s == f))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("problem has {0} size variables, over the budget of {1}")]
pub struct BudgetExceeded(pub usize, pub usize);

/// Enumerates every substitution over the problem's variables whose images
/// are towers `s^k b` with `k <= exp_budget` and `b` one of as many fresh
/// bases as there are variables, or `oo`; returns the satisfying ones.
/// Towers over `oo` are included: they are genuine equation solutions.
pub fn brute_force_solve(
    c: &ConstraintProblem,
    var_budget: usize,
    exp_budget: u32,
) -> Result<Vec<SizeSubst>, BudgetExceeded> {
    let vars: Vec<SizeVar> = c.vars().into_iter().collect();
    if vars.len() > var_budget {
        return Err(BudgetExceeded(vars.len(), var_budget));
    }
    let mut candidates: Vec<SizeExpr> = Vec::new();
    for k in 0..=exp_budget {
        let mut tower = SizeExpr::Infty;
        for _ in 0..k {
            tower = SizeExpr::Succ(Box::new(tower));
        }
        candidates.push(tower);
    }
    for j in 0..vars.len() {
        let base = SizeExpr::var(format!("~{j}"));
        for k in 0..=exp_budget {
            candidates.push(SizeExpr::from_parts(k, base.clone()));
        }
    }
    let n = vars.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let phi = SizeSubst::from_pairs(
            vars.iter()
                .cloned()
                .zip(idx.iter().map(|&i| candidates[i].clone())),
        );
        if c.satisfies(&phi) {
            out.push(phi);
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(out);
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
