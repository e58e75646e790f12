//! The core term language: a single impredicative sort, Pi/lambda,
//! constants, metavariables, structure constructors and projections,
//! the unit type and its one-branch eliminator.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::error::{Error, Result};

/// Identifier of a metavariable, unique per elaboration session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetaId(pub u32);

impl std::fmt::Display for MetaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type RcTerm = Rc<Term>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// The single sort `Type` (type-in-type).
    Sort,
    /// A local variable.
    Var(String),
    /// A global constant.
    Const(String),
    /// A metavariable together with the local variables its solution may mention.
    Meta(MetaId, Vec<String>),
    App(RcTerm, RcTerm),
    Lam(String, RcTerm, RcTerm),
    Pi(String, RcTerm, RcTerm),
    /// Structure literal: struct name, parameter values, field values.
    Mk(String, Vec<Term>, Vec<Term>),
    /// Primitive projection: struct name, field index, scrutinee.
    Proj(String, usize, RcTerm),
    /// The unit type and its canonical inhabitant.
    UnitTy,
    Star,
    /// One-branch unit eliminator: motive (the result type), branch, scrutinee.
    Case1(RcTerm, RcTerm, RcTerm),
}

impl Term {
    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Rc::new(f), Rc::new(a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn lam(x: impl Into<String>, ty: Term, body: Term) -> Term {
        Term::Lam(x.into(), Rc::new(ty), Rc::new(body))
    }

    pub fn pi(x: impl Into<String>, dom: Term, cod: Term) -> Term {
        Term::Pi(x.into(), Rc::new(dom), Rc::new(cod))
    }

    /// Non-dependent function space.
    pub fn arrow(dom: Term, cod: Term) -> Term {
        Term::pi("_", dom, cod)
    }

    pub fn cnst(name: impl Into<String>) -> Term {
        Term::Const(name.into())
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    /// Decompose nested applications into head and argument list.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut head = self;
        let mut args = Vec::new();
        while let Term::App(f, a) = head {
            args.push(a.as_ref());
            head = f.as_ref();
        }
        args.reverse();
        (head, args)
    }

    pub fn spine_owned(&self) -> (Term, Vec<Term>) {
        let (h, args) = self.spine();
        (h.clone(), args.into_iter().cloned().collect())
    }

    pub fn head_const(&self) -> Option<&str> {
        match self.spine().0 {
            Term::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Is this a metavariable, possibly applied to arguments?
    pub fn flex_head(&self) -> Option<(MetaId, &[String])> {
        match self.spine().0 {
            Term::Meta(m, sc) => Some((*m, sc)),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> HashSet<String> {
        let mut out = HashSet::new();
        self.collect_free_vars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_vars(&self, bound: &mut Vec<String>, out: &mut HashSet<String>) {
        match self {
            Term::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            Term::Meta(_, scope) => {
                // Scope entries are variable references of the solution.
                for x in scope {
                    if !bound.iter().any(|b| b == x) {
                        out.insert(x.clone());
                    }
                }
            }
            Term::App(f, a) => {
                f.collect_free_vars(bound, out);
                a.collect_free_vars(bound, out);
            }
            Term::Lam(x, ty, body) | Term::Pi(x, ty, body) => {
                ty.collect_free_vars(bound, out);
                bound.push(x.clone());
                body.collect_free_vars(bound, out);
                bound.pop();
            }
            Term::Mk(_, params, fields) => {
                for t in params.iter().chain(fields) {
                    t.collect_free_vars(bound, out);
                }
            }
            Term::Proj(_, _, t) => t.collect_free_vars(bound, out),
            Term::Case1(c, b, s) => {
                c.collect_free_vars(bound, out);
                b.collect_free_vars(bound, out);
                s.collect_free_vars(bound, out);
            }
            Term::Sort | Term::Const(_) | Term::UnitTy | Term::Star => {}
        }
    }

    pub fn metas(&self) -> Vec<MetaId> {
        let mut out = Vec::new();
        self.collect_metas(&mut out);
        out
    }

    /// First-occurrence (preorder) order, no duplicates.
    fn collect_metas(&self, out: &mut Vec<MetaId>) {
        match self {
            Term::Meta(m, _) => {
                if !out.contains(m) {
                    out.push(*m);
                }
            }
            Term::App(f, a) => {
                f.collect_metas(out);
                a.collect_metas(out);
            }
            Term::Lam(_, ty, body) | Term::Pi(_, ty, body) => {
                ty.collect_metas(out);
                body.collect_metas(out);
            }
            Term::Mk(_, params, fields) => {
                for t in params.iter().chain(fields) {
                    t.collect_metas(out);
                }
            }
            Term::Proj(_, _, t) => t.collect_metas(out),
            Term::Case1(c, b, s) => {
                c.collect_metas(out);
                b.collect_metas(out);
                s.collect_metas(out);
            }
            _ => {}
        }
    }

    pub fn contains_meta(&self, m: MetaId) -> bool {
        self.metas().contains(&m)
    }

    pub fn has_metas(&self) -> bool {
        !self.metas().is_empty()
    }

    pub fn contains_const(&self, name: &str) -> bool {
        match self {
            Term::Const(c) => c == name,
            Term::App(f, a) => f.contains_const(name) || a.contains_const(name),
            Term::Lam(_, ty, body) | Term::Pi(_, ty, body) => {
                ty.contains_const(name) || body.contains_const(name)
            }
            Term::Mk(_, params, fields) => {
                params.iter().chain(fields).any(|t| t.contains_const(name))
            }
            Term::Proj(_, _, t) => t.contains_const(name),
            Term::Case1(c, b, s) => {
                c.contains_const(name) || b.contains_const(name) || s.contains_const(name)
            }
            _ => false,
        }
    }
}

impl std::fmt::Display for Term {
    /// Plain rendering for error messages; the frontend has a nicer printer
    /// that knows about user-declared infix operators.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fn atom(t: &Term) -> bool {
            matches!(
                t,
                Term::Sort
                    | Term::Var(_)
                    | Term::Const(_)
                    | Term::Meta(..)
                    | Term::UnitTy
                    | Term::Star
                    | Term::Mk(..)
            )
        }
        fn paren(t: &Term, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
            if atom(t) {
                write!(f, "{t}")
            } else {
                write!(f, "({t})")
            }
        }
        match self {
            Term::Sort => write!(f, "Type"),
            Term::Var(x) => write!(f, "{x}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Meta(m, _) => write!(f, "?m{m}"),
            Term::App(g, a) => {
                match g.as_ref() {
                    Term::App(..) => write!(f, "{g}")?,
                    _ => paren(g, f)?,
                }
                write!(f, " ")?;
                paren(a, f)
            }
            Term::Lam(x, ty, b) => write!(f, "fun {x} : {ty}. {b}"),
            Term::Pi(x, ty, b) => {
                if x == "_" {
                    paren(ty, f)?;
                    write!(f, " -> {b}")
                } else {
                    write!(f, "Pi {x} : {ty}. {b}")
                }
            }
            Term::Mk(_, params, fields) => {
                write!(f, "<|")?;
                for (i, t) in params.iter().chain(fields).enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, " {t}")?;
                }
                write!(f, " |>")
            }
            Term::Proj(s, i, t) => {
                write!(f, "{s}#{i} ")?;
                paren(t, f)
            }
            Term::UnitTy => write!(f, "Unit"),
            Term::Star => write!(f, "star"),
            Term::Case1(c, b, s) => {
                write!(f, "case1 ")?;
                paren(c, f)?;
                write!(f, " ")?;
                paren(b, f)?;
                write!(f, " ")?;
                paren(s, f)
            }
        }
    }
}

/// Pick a name based on `base` that avoids everything in `avoid`.
/// Deterministic, so replay output is stable.
pub fn fresh_name(base: &str, avoid: &HashSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    for i in 1u32.. {
        let cand = format!("{base}{i}");
        if !avoid.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

/// A simultaneous assignment for variables and metavariables, the argument
/// of [`subst`].
#[derive(Debug, Clone, Default)]
pub struct Assignment {
    pub vars: HashMap<String, Term>,
    pub metas: HashMap<MetaId, Term>,
}

impl Assignment {
    pub fn var(x: impl Into<String>, t: Term) -> Assignment {
        let mut a = Assignment::default();
        a.vars.insert(x.into(), t);
        a
    }

    pub fn meta(m: MetaId, t: Term) -> Assignment {
        let mut a = Assignment::default();
        a.metas.insert(m, t);
        a
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() && self.metas.is_empty()
    }
}

/// Capture-avoiding simultaneous substitution. Metavariable occurrences are
/// replaced only if mapped; the replacement may only mention variables in the
/// meta's declared scope (after the variable part of the assignment).
pub fn subst(t: &Term, a: &Assignment) -> Result<Term> {
    if a.is_empty() {
        return Ok(t.clone());
    }
    subst_go(t, a)
}

fn subst_go(t: &Term, a: &Assignment) -> Result<Term> {
    match t {
        Term::Var(x) => Ok(a.vars.get(x).cloned().unwrap_or_else(|| t.clone())),
        Term::Meta(m, scope) => {
            // Scope entries are themselves subject to the variable assignment:
            // if an entry is mapped to a plain variable, rename it; anything
            // else leaves the entry in place (the solution will be checked on
            // instantiation).
            if let Some(repl) = a.metas.get(m) {
                for v in repl.free_vars() {
                    if !scope.iter().any(|s| *s == v) {
                        return Err(Error::ScopeViolation {
                            meta: m.to_string(),
                            var: v,
                        });
                    }
                }
                // The replacement lives in the meta's scope; variables of the
                // scope may themselves be substituted.
                return subst_go(repl, &Assignment { vars: a.vars.clone(), metas: HashMap::new() });
            }
            let scope2 = scope
                .iter()
                .map(|x| match a.vars.get(x) {
                    Some(Term::Var(y)) => y.clone(),
                    _ => x.clone(),
                })
                .collect();
            Ok(Term::Meta(*m, scope2))
        }
        Term::App(f, x) => Ok(Term::app(subst_go(f, a)?, subst_go(x, a)?)),
        Term::Lam(x, ty, body) => {
            let (x2, ty2, body2) = subst_binder(x, ty, body, a)?;
            Ok(Term::lam(x2, ty2, body2))
        }
        Term::Pi(x, ty, body) => {
            let (x2, ty2, body2) = subst_binder(x, ty, body, a)?;
            Ok(Term::pi(x2, ty2, body2))
        }
        Term::Mk(s, params, fields) => Ok(Term::Mk(
            s.clone(),
            params.iter().map(|t| subst_go(t, a)).collect::<Result<_>>()?,
            fields.iter().map(|t| subst_go(t, a)).collect::<Result<_>>()?,
        )),
        Term::Proj(s, i, t) => Ok(Term::Proj(s.clone(), *i, Rc::new(subst_go(t, a)?))),
        Term::Case1(c, b, s) => Ok(Term::Case1(
            Rc::new(subst_go(c, a)?),
            Rc::new(subst_go(b, a)?),
            Rc::new(subst_go(s, a)?),
        )),
        Term::Sort | Term::Const(_) | Term::UnitTy | Term::Star => Ok(t.clone()),
    }
}

fn subst_binder(x: &str, ty: &Term, body: &Term, a: &Assignment) -> Result<(String, Term, Term)> {
    let ty2 = subst_go(ty, a)?;
    // Bound occurrences shadow the assignment.
    let mut inner = a.clone();
    inner.vars.remove(x);
    // Rename the binder if any replacement would capture it.
    let captures = inner
        .vars
        .values()
        .chain(inner.metas.values())
        .any(|t| t.free_vars().contains(x));
    if captures {
        let mut avoid: HashSet<String> = body.free_vars();
        for t in inner.vars.values().chain(inner.metas.values()) {
            avoid.extend(t.free_vars());
        }
        avoid.extend(inner.vars.keys().cloned());
        let x2 = fresh_name(x, &avoid);
        inner
            .vars
            .insert(x.to_string(), Term::var(x2.clone()));
        let body2 = subst_go(body, &inner)?;
        Ok((x2, ty2, body2))
    } else {
        let body2 = subst_go(body, &inner)?;
        Ok((x.to_string(), ty2, body2))
    }
}

/// Structurally replace metavariable occurrences; `f` receives the meta id
/// and its scope list and returns the replacement, if any. No scope or
/// capture checking — callers own those invariants (hint freshening,
/// substitution application).
pub fn map_metas(t: &Term, f: &mut impl FnMut(MetaId, &[String]) -> Option<Term>) -> Term {
    match t {
        Term::Meta(m, scope) => f(*m, scope).unwrap_or_else(|| t.clone()),
        Term::App(g, a) => Term::app(map_metas(g, f), map_metas(a, f)),
        Term::Lam(x, ty, body) => Term::lam(x.clone(), map_metas(ty, f), map_metas(body, f)),
        Term::Pi(x, ty, body) => Term::pi(x.clone(), map_metas(ty, f), map_metas(body, f)),
        Term::Mk(s, params, fields) => Term::Mk(
            s.clone(),
            params.iter().map(|u| map_metas(u, f)).collect(),
            fields.iter().map(|u| map_metas(u, f)).collect(),
        ),
        Term::Proj(s, i, u) => Term::Proj(s.clone(), *i, Rc::new(map_metas(u, f))),
        Term::Case1(c, b, s) => Term::Case1(
            Rc::new(map_metas(c, f)),
            Rc::new(map_metas(b, f)),
            Rc::new(map_metas(s, f)),
        ),
        _ => t.clone(),
    }
}

/// Number of occurrences of a metavariable (linearity checks).
pub fn count_meta(t: &Term, m: MetaId) -> usize {
    match t {
        Term::Meta(n, _) => usize::from(*n == m),
        Term::App(f, a) => count_meta(f, m) + count_meta(a, m),
        Term::Lam(_, ty, b) | Term::Pi(_, ty, b) => count_meta(ty, m) + count_meta(b, m),
        Term::Mk(_, ps, fs) => ps.iter().chain(fs).map(|u| count_meta(u, m)).sum(),
        Term::Proj(_, _, u) => count_meta(u, m),
        Term::Case1(c, b, s) => count_meta(c, m) + count_meta(b, m) + count_meta(s, m),
        _ => 0,
    }
}

/// Alpha-equivalence. Metavariables are equal only to themselves.
pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    fn go(t: &Term, u: &Term, lhs: &mut Vec<String>, rhs: &mut Vec<String>) -> bool {
        match (t, u) {
            (Term::Sort, Term::Sort)
            | (Term::UnitTy, Term::UnitTy)
            | (Term::Star, Term::Star) => true,
            (Term::Var(x), Term::Var(y)) => {
                let ix = lhs.iter().rposition(|b| b == x);
                let iy = rhs.iter().rposition(|b| b == y);
                match (ix, iy) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Term::Const(a), Term::Const(b)) => a == b,
            (Term::Meta(m, s1), Term::Meta(n, s2)) => m == n && s1 == s2,
            (Term::App(f1, a1), Term::App(f2, a2)) => {
                go(f1, f2, lhs, rhs) && go(a1, a2, lhs, rhs)
            }
            (Term::Lam(x, ty1, b1), Term::Lam(y, ty2, b2))
            | (Term::Pi(x, ty1, b1), Term::Pi(y, ty2, b2)) => {
                if !go(ty1, ty2, lhs, rhs) {
                    return false;
                }
                lhs.push(x.clone());
                rhs.push(y.clone());
                let r = go(b1, b2, lhs, rhs);
                lhs.pop();
                rhs.pop();
                r
            }
            (Term::Mk(s1, p1, f1), Term::Mk(s2, p2, f2)) => {
                s1 == s2
                    && p1.len() == p2.len()
                    && f1.len() == f2.len()
                    && p1.iter().zip(p2).all(|(a, b)| go(a, b, lhs, rhs))
                    && f1.iter().zip(f2).all(|(a, b)| go(a, b, lhs, rhs))
            }
            (Term::Proj(s1, i1, t1), Term::Proj(s2, i2, t2)) => {
                s1 == s2 && i1 == i2 && go(t1, t2, lhs, rhs)
            }
            (Term::Case1(c1, b1, s1), Term::Case1(c2, b2, s2)) => {
                go(c1, c2, lhs, rhs) && go(b1, b2, lhs, rhs) && go(s1, s2, lhs, rhs)
            }
            _ => false,
        }
    }
    go(t, u, &mut Vec::new(), &mut Vec::new())
}

/// Replace every alpha-equal occurrence of `target` in `t` by `repl`.
/// Occurrences under binders that capture a free variable of `target` are
/// left alone.
pub fn replace_subterm(t: &Term, target: &Term, repl: &Term) -> Term {
    if alpha_eq(t, target) {
        return repl.clone();
    }
    let target_fvs = target.free_vars();
    match t {
        Term::App(f, a) => Term::app(
            replace_subterm(f, target, repl),
            replace_subterm(a, target, repl),
        ),
        Term::Lam(x, ty, body) | Term::Pi(x, ty, body) => {
            let ty2 = replace_subterm(ty, target, repl);
            let body2 = if target_fvs.contains(x) {
                body.as_ref().clone()
            } else {
                replace_subterm(body, target, repl)
            };
            match t {
                Term::Lam(..) => Term::lam(x.clone(), ty2, body2),
                _ => Term::pi(x.clone(), ty2, body2),
            }
        }
        Term::Mk(s, params, fields) => Term::Mk(
            s.clone(),
            params.iter().map(|u| replace_subterm(u, target, repl)).collect(),
            fields.iter().map(|u| replace_subterm(u, target, repl)).collect(),
        ),
        Term::Proj(s, i, u) => Term::Proj(s.clone(), *i, Rc::new(replace_subterm(u, target, repl))),
        Term::Case1(c, b, s) => Term::Case1(
            Rc::new(replace_subterm(c, target, repl)),
            Rc::new(replace_subterm(b, target, repl)),
            Rc::new(replace_subterm(s, target, repl)),
        ),
        _ => t.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subst_single_meta() {
        let m = MetaId(0);
        let t = Term::Meta(m, vec![]);
        let r = subst(&t, &Assignment::meta(m, Term::Star)).unwrap();
        assert_eq!(r, Term::Star);
    }

    #[test]
    fn subst_under_application() {
        let m = MetaId(1);
        let t = Term::app(Term::cnst("carr"), Term::Meta(m, vec![]));
        let r = subst(&t, &Assignment::meta(m, Term::cnst("Z"))).unwrap();
        assert_eq!(r, Term::app(Term::cnst("carr"), Term::cnst("Z")));
    }

    #[test]
    fn subst_respects_binders() {
        // (fun x:T. x)[x := anything] is unchanged.
        let t = Term::lam("x", Term::cnst("T"), Term::var("x"));
        let r = subst(&t, &Assignment::var("x", Term::cnst("boom"))).unwrap();
        assert!(alpha_eq(&r, &t));
    }

    #[test]
    fn subst_avoids_capture() {
        // (fun x:T. y)[y := x] must rename the binder.
        let t = Term::lam("x", Term::cnst("T"), Term::var("y"));
        let r = subst(&t, &Assignment::var("y", Term::var("x"))).unwrap();
        match &r {
            Term::Lam(b, _, body) => {
                assert_ne!(b, "x");
                assert_eq!(body.as_ref(), &Term::var("x"));
            }
            _ => panic!("expected lambda"),
        }
    }

    #[test]
    fn subst_scope_violation() {
        let m = MetaId(2);
        let t = Term::Meta(m, vec![]);
        let err = subst(&t, &Assignment::meta(m, Term::var("x"))).unwrap_err();
        assert!(matches!(err, Error::ScopeViolation { .. }));
    }

    #[test]
    fn alpha_eq_renames() {
        let t = Term::lam("x", Term::Sort, Term::var("x"));
        let u = Term::lam("y", Term::Sort, Term::var("y"));
        assert!(alpha_eq(&t, &u));
        let v = Term::lam("y", Term::Sort, Term::var("z"));
        assert!(!alpha_eq(&t, &v));
    }
}
