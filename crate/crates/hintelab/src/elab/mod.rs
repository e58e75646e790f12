//! Bidirectional elaboration of surface terms: placeholders become
//! metavariables, type mismatches trigger coercion insertion, leftover
//! metavariables turn into proof obligations, and goals can be rewritten
//! with hint-aware matching of the equation's sides.

use std::collections::HashMap;

use crate::coerce::{promote, CoercionTable};
use crate::error::{Error, Result};
use crate::hintdb::HintDb;
use crate::kernel::{
    conv, fresh_name, infer_type_core, normalize_greedy, subst, whnf, Assignment, Declaration,
    GlobalEnv, LocalContext, MetaId, NoMetas, Policy, Term,
};
use crate::unify::{MetaCx, MetaOrigin, MetaSubst, TraceEvent, TypesView, Unifier, UnifyConfig};

/// Surface syntax as produced by the parser; `_` is a placeholder, `?name`
/// a named metavariable, `<| ... |>` a structure literal whose structure is
/// taken from the expected type.
#[derive(Debug, Clone, PartialEq)]
pub enum Surface {
    Ident(String),
    Placeholder,
    MetaRef(String),
    Type,
    Unit,
    Star,
    App(Box<Surface>, Box<Surface>),
    Lam(String, Box<Surface>, Box<Surface>),
    Pi(String, Box<Surface>, Box<Surface>),
    Arrow(Box<Surface>, Box<Surface>),
    MkLit(Vec<Surface>),
}

impl Surface {
    pub fn app(f: Surface, a: Surface) -> Surface {
        Surface::App(Box::new(f), Box::new(a))
    }

    pub fn ident(x: impl Into<String>) -> Surface {
        Surface::Ident(x.into())
    }
}

#[derive(Debug, Clone)]
pub struct ElabResult {
    pub term: Term,
    pub ty: Term,
    pub obligations: Vec<(String, Term)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LR,
    RL,
}

#[derive(Debug, Clone)]
pub struct RewriteOutcome {
    pub new_goal: Term,
    /// `fun h : new_goal. …` proving the old goal from the new one.
    pub proof_step: Term,
}

/// One elaboration session: a metavariable context and substitution shared
/// by every term of a command.
pub struct Elaborator<'a> {
    pub env: &'a GlobalEnv,
    pub db: &'a HintDb,
    pub coercions: &'a CoercionTable,
    pub metas: MetaCx,
    pub subst: MetaSubst,
    pub cfg: UnifyConfig,
    pub trace: Vec<TraceEvent>,
    named: HashMap<String, MetaId>,
}

impl<'a> Elaborator<'a> {
    pub fn new(
        env: &'a GlobalEnv,
        db: &'a HintDb,
        coercions: &'a CoercionTable,
        cfg: UnifyConfig,
    ) -> Self {
        Elaborator {
            env,
            db,
            coercions,
            metas: MetaCx::new(),
            subst: MetaSubst::new(),
            cfg,
            trace: Vec::new(),
            named: HashMap::new(),
        }
    }

    fn unify_terms(&mut self, ctx: &mut LocalContext, a: &Term, b: &Term) -> Result<()> {
        let mut u = Unifier::new(self.env, self.db, &mut self.metas, self.cfg);
        let r = u.unify(&mut self.subst, ctx, a, b, 0);
        self.trace.extend(u.trace);
        r
    }

    /// Trial unification: the substitution and trace are rolled back on
    /// failure.
    fn try_unify(&mut self, ctx: &mut LocalContext, a: &Term, b: &Term) -> Result<()> {
        let snap = self.subst.clone();
        let tlen = self.trace.len();
        match self.unify_terms(ctx, a, b) {
            Ok(()) => Ok(()),
            Err(e) => {
                self.subst = snap;
                self.trace.truncate(tlen);
                Err(e)
            }
        }
    }

    fn promote_term(
        &mut self,
        ctx: &mut LocalContext,
        term: &Term,
        actual: &Term,
        expected: &Term,
    ) -> Result<Term> {
        let mut u = Unifier::new(self.env, self.db, &mut self.metas, self.cfg);
        let r = promote(&mut u, self.coercions, &mut self.subst, ctx, term, actual, expected);
        self.trace.extend(u.trace);
        r
    }

    fn fresh_placeholder(&mut self, ctx: &LocalContext, name: &str, ty: Term) -> Term {
        let m = self
            .metas
            .fresh_scoped(name, ty, ctx, MetaOrigin::UserPlaceholder);
        self.metas.term(m)
    }

    fn named_meta(&mut self, ctx: &LocalContext, name: &str, ty: Term) -> Term {
        if let Some(&m) = self.named.get(name) {
            return self.metas.term(m);
        }
        let m = self
            .metas
            .fresh_scoped(name, ty, ctx, MetaOrigin::UserPlaceholder);
        self.named.insert(name.to_string(), m);
        self.metas.term(m)
    }

    fn whnf(&self, t: &Term) -> Result<Term> {
        let mut fuel = self.cfg.fuel;
        whnf(self.env, &self.subst.apply(t), Policy::NoCoercionDelta, &mut fuel)
    }

    pub fn infer(&mut self, ctx: &mut LocalContext, t: &Surface) -> Result<(Term, Term)> {
        match t {
            Surface::Ident(x) => {
                if let Some(ty) = ctx.lookup(x) {
                    return Ok((Term::var(x.clone()), ty.clone()));
                }
                Ok((Term::cnst(x.clone()), self.env.type_of_const(x)?))
            }
            Surface::Type => Ok((Term::Sort, Term::Sort)),
            Surface::Unit => Ok((Term::UnitTy, Term::Sort)),
            Surface::Star => Ok((Term::Star, Term::UnitTy)),
            Surface::Placeholder => {
                let ty = self.fresh_placeholder(ctx, "ty", Term::Sort);
                Ok((self.fresh_placeholder(ctx, "_", ty.clone()), ty))
            }
            Surface::MetaRef(name) => {
                let m = if let Some(&m) = self.named.get(name) {
                    m
                } else {
                    let ty = self.fresh_placeholder(ctx, &format!("{name}_ty"), Term::Sort);
                    let m = self
                        .metas
                        .fresh_scoped(name, ty, ctx, MetaOrigin::UserPlaceholder);
                    self.named.insert(name.clone(), m);
                    m
                };
                Ok((self.metas.term(m), self.metas.info(m).ty.clone()))
            }
            Surface::App(f, a) => {
                let (ft, fty) = self.infer(ctx, f)?;
                let fty = self.whnf(&fty)?;
                let (x, dom, cod) = match fty {
                    Term::Pi(x, dom, cod) => (x, dom.as_ref().clone(), cod.as_ref().clone()),
                    flex if flex.flex_head().is_some() => {
                        // Invent a non-dependent arrow for a flex function
                        // type (placeholders in head position).
                        let d = self.fresh_placeholder(ctx, "dom", Term::Sort);
                        let c = self.fresh_placeholder(ctx, "cod", Term::Sort);
                        self.unify_terms(ctx, &flex, &Term::arrow(d.clone(), c.clone()))?;
                        ("_".to_string(), d, c)
                    }
                    other => {
                        return Err(Error::IllTyped(format!(
                            "cannot apply a term of type `{other}`"
                        )))
                    }
                };
                let at = self.check(ctx, a, &dom)?;
                let rty = subst(&cod, &Assignment::var(x, at.clone()))?;
                Ok((Term::app(ft, at), rty))
            }
            Surface::Lam(x, ty, body) => {
                let dom = self.check(ctx, ty, &Term::Sort)?;
                ctx.push(x.clone(), dom.clone());
                let r = self.infer(ctx, body);
                ctx.pop();
                let (bt, bty) = r?;
                Ok((
                    Term::lam(x.clone(), dom.clone(), bt),
                    Term::pi(x.clone(), dom, bty),
                ))
            }
            Surface::Pi(x, ty, body) => {
                let dom = self.check(ctx, ty, &Term::Sort)?;
                ctx.push(x.clone(), dom.clone());
                let r = self.check(ctx, body, &Term::Sort);
                ctx.pop();
                Ok((Term::pi(x.clone(), dom, r?), Term::Sort))
            }
            Surface::Arrow(a, b) => {
                let dom = self.check(ctx, a, &Term::Sort)?;
                let cod = self.check(ctx, b, &Term::Sort)?;
                Ok((Term::arrow(dom, cod), Term::Sort))
            }
            Surface::MkLit(_) => Err(Error::IllTyped(
                "a structure literal needs an expected type".into(),
            )),
        }
    }

    pub fn check(&mut self, ctx: &mut LocalContext, t: &Surface, expected: &Term) -> Result<Term> {
        match t {
            Surface::Placeholder => Ok(self.fresh_placeholder(ctx, "_", self.subst.apply(expected))),
            Surface::MetaRef(name) if !self.named.contains_key(name) => {
                Ok(self.named_meta(ctx, name, self.subst.apply(expected)))
            }
            Surface::Lam(x, ty, body) => {
                if let Term::Pi(y, dom, cod) = self.whnf(expected)? {
                    let given = self.check(ctx, ty, &Term::Sort)?;
                    self.unify_terms(ctx, &given, &dom)?;
                    let cod = subst(&cod, &Assignment::var(y, Term::var(x.clone())))?;
                    ctx.push(x.clone(), given.clone());
                    let r = self.check(ctx, body, &cod);
                    ctx.pop();
                    return Ok(Term::lam(x.clone(), given, r?));
                }
                self.check_via_infer(ctx, t, expected)
            }
            Surface::MkLit(vals) => {
                let ex = self.whnf(expected)?;
                let (head, params) = ex.spine();
                let sname = match head {
                    Term::Const(c) if self.env.structure(c).is_some() => c.clone(),
                    _ => {
                        return Err(Error::IllTyped(format!(
                            "structure literal checked against non-structure type `{ex}`"
                        )))
                    }
                };
                let sd = self.env.structure(&sname).expect("checked above").clone();
                if params.len() != sd.params.len() || vals.len() != sd.fields.len() {
                    return Err(Error::IllTyped(format!(
                        "structure literal arity mismatch for `{sname}`"
                    )));
                }
                let mut a = Assignment::default();
                for ((pname, _), pval) in sd.params.iter().zip(&params) {
                    a.vars.insert(pname.clone(), (*pval).clone());
                }
                let mut fields = Vec::with_capacity(vals.len());
                for (fld, v) in sd.fields.iter().zip(vals) {
                    let fty = subst(&fld.ty, &a)?;
                    let ft = self.check(ctx, v, &fty)?;
                    a.vars.insert(fld.name.clone(), ft.clone());
                    fields.push(ft);
                }
                Ok(Term::Mk(
                    sname,
                    params.into_iter().cloned().collect(),
                    fields,
                ))
            }
            _ => self.check_via_infer(ctx, t, expected),
        }
    }

    fn check_via_infer(
        &mut self,
        ctx: &mut LocalContext,
        t: &Surface,
        expected: &Term,
    ) -> Result<Term> {
        let (tt, actual) = self.infer(ctx, t)?;
        match self.try_unify(ctx, &actual, expected) {
            Ok(()) => Ok(tt),
            Err(e) if e.is_hard() => Err(e),
            Err(_) => self.promote_term(ctx, &self.subst.apply(&tt), &actual, expected),
        }
    }

    /// Close the session: instantiate the term, turn unsolved metavariables
    /// into obligation axioms (declared into `env`, numbered from
    /// `counter`), greedy-normalize, and re-check the result in the kernel.
    pub fn finalize(
        &mut self,
        env: &mut GlobalEnv,
        counter: &mut usize,
        term: &Term,
        ty: &Term,
    ) -> Result<ElabResult> {
        let mut obligations = Vec::new();
        let mut worklist = self.subst.apply(term).metas();
        let mut guard = 0usize;
        while let Some(m) = worklist.first().copied() {
            guard += 1;
            if guard > 10_000 {
                return Err(Error::Internal("obligation closure does not settle".into()));
            }
            let r = self.subst.apply(&self.metas.info(m).ty);
            // Inner metas of the obligation's type must be closed first so
            // the generated axiom is itself meta-free.
            let inner = r.metas();
            if let Some(&first) = inner.first() {
                worklist.insert(0, first);
                if inner.contains(&m) {
                    return Err(Error::Internal(format!(
                        "metavariable ?{} occurs in its own type",
                        self.metas.info(m).name
                    )));
                }
                continue;
            }
            let info = self.metas.info(m).clone();
            if info.scope.len() != info.scope_tys.len() {
                return Err(Error::Internal(format!(
                    "cannot close obligation over the scope of ?{}",
                    info.name
                )));
            }
            let mut closed = normalize_greedy(env, &r);
            for (x, xty) in info.scope.iter().zip(&info.scope_tys).rev() {
                closed = Term::pi(x.clone(), self.subst.apply(xty), closed);
            }
            *counter += 1;
            let name = format!("obligation_{counter}");
            env.declare(Declaration::Axiom {
                name: name.clone(),
                ty: closed.clone(),
            })?;
            let solution = Term::apps(
                Term::cnst(name.clone()),
                info.scope.iter().map(|x| Term::var(x.clone())),
            );
            self.subst.insert(m, solution);
            obligations.push((name, closed));
            worklist = self.subst.apply(term).metas();
        }

        let out = normalize_greedy(env, &self.subst.apply(term));
        let out_ty = normalize_greedy(env, &self.subst.apply(ty));
        // Kernel re-check: elaboration output must stand on its own.
        let mut fuel = self.cfg.fuel;
        let inferred = infer_type_core(env, &mut LocalContext::new(), &NoMetas, &out, &mut fuel)
            .map_err(|e| Error::Internal(format!("elaborated term does not type-check: {e}")))?;
        if !conv(env, &inferred, &out_ty, &mut fuel)? {
            return Err(Error::Internal(format!(
                "elaborated term has type `{inferred}`, not `{out_ty}`"
            )));
        }
        Ok(ElabResult {
            term: out,
            ty: out_ty,
            obligations,
        })
    }

    /// Rewrite `goal` with an equation proof: elaborate the proof to
    /// `eq A l r`, find the `occurrence`-th (1-based, leftmost-outermost,
    /// outside binders) subterm unifying with `l` (`r` when `dir` is RL —
    /// this matching may fire hints), and replace it by the other side.
    /// The new goal is greedy-normalized; the proof step is a function from
    /// the new goal to the old one built from the equality eliminator.
    pub fn rewrite_goal(
        &mut self,
        goal: &Term,
        proof: &Surface,
        dir: Direction,
        occurrence: usize,
    ) -> Result<RewriteOutcome> {
        let mut ctx = LocalContext::new();
        let (pf, pfty) = self.infer(&mut ctx, proof)?;
        let pfty = self.whnf(&pfty)?;
        let (head, args) = pfty.spine();
        let (a, l, r) = match (head, args.as_slice()) {
            (Term::Const(c), [a, l, r]) if c == "eq" => {
                ((*a).clone(), (*l).clone(), (*r).clone())
            }
            _ => {
                return Err(Error::IllTyped(format!(
                    "rewrite needs a proof of an equation, got `{pfty}`"
                )))
            }
        };
        let (pat, other, pf_lr) = match dir {
            Direction::LR => (l.clone(), r.clone(), pf.clone()),
            Direction::RL => (
                r.clone(),
                l.clone(),
                Term::apps(Term::cnst("eqSym"), [a.clone(), l.clone(), r.clone(), pf]),
            ),
        };

        let goal = self.subst.apply(goal);
        let hole = fresh_name("x", &goal.free_vars());
        let mut count = 0usize;
        let mut matched = None;
        let holed = self
            .rewrite_scan(&goal, &pat, &mut count, occurrence, &hole, &mut matched)
            .ok_or(Error::NoMatch)?;
        let matched = matched.expect("a successful scan records the occurrence");

        let a = self.subst.apply(&a);
        let other = self.subst.apply(&other);
        let motive = Term::lam(hole.clone(), a.clone(), self.subst.apply(&holed));
        let new_goal = normalize_greedy(
            self.env,
            &self
                .subst
                .apply(&subst(&holed, &Assignment::var(hole, other.clone()))?),
        );
        // The old goal is motive[matched]; the proof runs the eliminator
        // from `other` back to the matched side.
        let lhs_proof = Term::apps(
            Term::cnst("eqSym"),
            [
                a.clone(),
                self.subst.apply(&pat),
                other.clone(),
                self.subst.apply(&pf_lr),
            ],
        );
        let proof_step = Term::lam(
            "h",
            new_goal.clone(),
            Term::apps(
                Term::cnst("eqInd"),
                [
                    a,
                    other,
                    motive,
                    Term::var("h"),
                    self.subst.apply(&matched),
                    lhs_proof,
                ],
            ),
        );
        // Sanity-check the step whenever it is closed.
        if !proof_step.has_metas() {
            let mut fuel = self.cfg.fuel;
            let got = infer_type_core(
                self.env,
                &mut LocalContext::new(),
                &TypesView {
                    metas: &self.metas,
                    subst: &self.subst,
                },
                &proof_step,
                &mut fuel,
            )
            .map_err(|e| Error::Internal(format!("rewrite step does not type-check: {e}")))?;
            let want = Term::arrow(new_goal.clone(), goal.clone());
            if !conv(self.env, &got, &want, &mut fuel)? {
                return Err(Error::Internal(format!(
                    "rewrite step has type `{got}`, expected `{want}`"
                )));
            }
        }
        Ok(RewriteOutcome {
            new_goal,
            proof_step,
        })
    }

    /// Leftmost-outermost scan for the `target`-th subterm unifying with
    /// `pat`. A matching subterm is counted and not descended into
    /// (occurrences never overlap); subterms under binders are skipped, as
    /// the motive cannot abstract them.
    fn rewrite_scan(
        &mut self,
        t: &Term,
        pat: &Term,
        count: &mut usize,
        target: usize,
        hole: &str,
        matched: &mut Option<Term>,
    ) -> Option<Term> {
        let mut ctx = LocalContext::new();
        let snap = self.subst.clone();
        let tlen = self.trace.len();
        match self.unify_terms(&mut ctx, pat, t) {
            Ok(()) => {
                *count += 1;
                if *count == target {
                    *matched = Some(t.clone());
                    return Some(Term::var(hole));
                }
                self.subst = snap;
                self.trace.truncate(tlen);
                return None;
            }
            Err(_) => {
                self.subst = snap;
                self.trace.truncate(tlen);
            }
        }
        let mut go = |this: &mut Self, c: &Term| this.rewrite_scan(c, pat, count, target, hole, matched);
        match t {
            Term::App(f, x) => {
                if let Some(f2) = go(self, f) {
                    return Some(Term::app(f2, x.as_ref().clone()));
                }
                go(self, x).map(|x2| Term::app(f.as_ref().clone(), x2))
            }
            Term::Mk(s, params, fields) => {
                let mut params = params.clone();
                let mut fields = fields.clone();
                for slot in params.iter_mut().chain(fields.iter_mut()) {
                    if let Some(r) = go(self, slot) {
                        *slot = r;
                        return Some(Term::Mk(s.clone(), params, fields));
                    }
                }
                None
            }
            Term::Proj(s, i, u) => {
                go(self, u).map(|u2| Term::Proj(s.clone(), *i, std::rc::Rc::new(u2)))
            }
            Term::Case1(c, b, s) => {
                if let Some(c2) = go(self, c) {
                    return Some(Term::Case1(
                        std::rc::Rc::new(c2),
                        b.clone(),
                        s.clone(),
                    ));
                }
                if let Some(b2) = go(self, b) {
                    return Some(Term::Case1(
                        c.clone(),
                        std::rc::Rc::new(b2),
                        s.clone(),
                    ));
                }
                go(self, s).map(|s2| Term::Case1(c.clone(), b.clone(), std::rc::Rc::new(s2)))
            }
            // Binder types are scanned, bodies are not.
            Term::Lam(x, ty, b) => go(self, ty).map(|ty2| Term::lam(x.clone(), ty2, b.as_ref().clone())),
            Term::Pi(x, ty, b) => go(self, ty).map(|ty2| Term::pi(x.clone(), ty2, b.as_ref().clone())),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coerce::{declare_nonuniform, declare_prelude, NonuniformBranch};
    use crate::hintdb::HintSpec;
    use crate::kernel::{FieldDecl, FieldKind, Reducibility, StructDecl};

    fn lmeta(i: u32) -> Term {
        Term::Meta(MetaId(i), vec![])
    }

    /// Prelude + Int monoid world with the carr/op/unit hints and the grid
    /// equation.
    fn world() -> (GlobalEnv, HintDb, CoercionTable) {
        let mut env = GlobalEnv::new();
        declare_prelude(&mut env).unwrap();
        let ax = |env: &mut GlobalEnv, n: &str, ty: Term| {
            env.declare(Declaration::Axiom {
                name: n.into(),
                ty,
            })
            .unwrap()
        };
        ax(&mut env, "Int", Term::Sort);
        ax(
            &mut env,
            "zplus",
            Term::arrow(Term::cnst("Int"), Term::arrow(Term::cnst("Int"), Term::cnst("Int"))),
        );
        ax(&mut env, "z0", Term::cnst("Int"));
        ax(&mut env, "a", Term::cnst("Int"));
        env.declare(Declaration::Structure(StructDecl {
            name: "Monoid".into(),
            params: vec![],
            fields: vec![
                FieldDecl {
                    name: "carr".into(),
                    ty: Term::Sort,
                    kind: FieldKind::Data,
                },
                FieldDecl {
                    name: "op".into(),
                    ty: Term::arrow(
                        Term::var("carr"),
                        Term::arrow(Term::var("carr"), Term::var("carr")),
                    ),
                    kind: FieldKind::Data,
                },
                FieldDecl {
                    name: "unit".into(),
                    ty: Term::var("carr"),
                    kind: FieldKind::Data,
                },
            ],
        }))
        .unwrap();
        env.declare(Declaration::Def {
            name: "Z".into(),
            ty: Term::cnst("Monoid"),
            body: Term::apps(
                Term::cnst("mkMonoid"),
                [Term::cnst("Int"), Term::cnst("zplus"), Term::cnst("z0")],
            ),
            red: Reducibility::Reducible,
            is_instance: true,
        })
        .unwrap();
        // grid : Pi G : Monoid. Pi x : carr G. eq (carr G) (op G x (unit G)) x
        let carr = |g: Term| Term::app(Term::cnst("carr"), g);
        ax(
            &mut env,
            "grid",
            Term::pi(
                "G",
                Term::cnst("Monoid"),
                Term::pi(
                    "x",
                    carr(Term::var("G")),
                    Term::apps(
                        Term::cnst("eq"),
                        [
                            carr(Term::var("G")),
                            Term::apps(
                                Term::cnst("op"),
                                [
                                    Term::var("G"),
                                    Term::var("x"),
                                    Term::app(Term::cnst("unit"), Term::var("G")),
                                ],
                            ),
                            Term::var("x"),
                        ],
                    ),
                ),
            ),
        );
        let mut db = HintDb::new();
        for (proj, rhs) in [
            ("carr", Term::cnst("Int")),
            ("op", Term::cnst("zplus")),
            ("unit", Term::cnst("z0")),
        ] {
            db.declare_hint(
                &env,
                HintSpec {
                    context: vec![],
                    telescope: vec![("g".into(), Term::cnst("Z"))],
                    lhs: Term::app(Term::cnst(proj), lmeta(0)),
                    rhs,
                    priority: None,
                },
            )
            .unwrap();
        }
        (env, db, CoercionTable::new())
    }

    fn eq_int(l: Term, r: Term) -> Term {
        Term::apps(Term::cnst("eq"), [Term::cnst("Int"), l, r])
    }

    fn zp(l: Term, r: Term) -> Term {
        Term::apps(Term::cnst("zplus"), [l, r])
    }

    #[test]
    fn infer_application() {
        let (env, db, tbl) = world();
        let mut e = Elaborator::new(&env, &db, &tbl, UnifyConfig::default());
        let t = Surface::app(
            Surface::app(Surface::ident("zplus"), Surface::ident("z0")),
            Surface::ident("z0"),
        );
        let (tt, ty) = e.infer(&mut LocalContext::new(), &t).unwrap();
        assert_eq!(ty, Term::cnst("Int"));
        let mut env2 = env.clone();
        let r = e.finalize(&mut env2, &mut 0, &tt, &ty).unwrap();
        assert!(r.obligations.is_empty());
        assert_eq!(r.term, zp(Term::cnst("z0"), Term::cnst("z0")));
    }

    #[test]
    fn placeholder_solved_by_hint_under_binder() {
        let (env, db, tbl) = world();
        let mut e = Elaborator::new(&env, &db, &tbl, UnifyConfig::default());
        // fun b : Int. grid _ b  :  Pi b : Int. eq Int (zplus b z0) b
        let t = Surface::Lam(
            "b".into(),
            Box::new(Surface::ident("Int")),
            Box::new(Surface::app(
                Surface::app(Surface::ident("grid"), Surface::Placeholder),
                Surface::ident("b"),
            )),
        );
        let expected = Term::pi(
            "b",
            Term::cnst("Int"),
            eq_int(zp(Term::var("b"), Term::cnst("z0")), Term::var("b")),
        );
        let tt = e.check(&mut LocalContext::new(), &t, &expected).unwrap();
        let mut env2 = env.clone();
        let r = e.finalize(&mut env2, &mut 0, &tt, &expected).unwrap();
        assert!(r.obligations.is_empty());
        assert_eq!(
            r.term,
            Term::lam(
                "b",
                Term::cnst("Int"),
                Term::apps(Term::cnst("grid"), [Term::cnst("Z"), Term::var("b")]),
            )
        );
    }

    #[test]
    fn structure_literal_checks_against_expected() {
        let (env, db, tbl) = world();
        let mut e = Elaborator::new(&env, &db, &tbl, UnifyConfig::default());
        let t = Surface::MkLit(vec![
            Surface::ident("Int"),
            Surface::ident("zplus"),
            Surface::ident("z0"),
        ]);
        let tt = e
            .check(&mut LocalContext::new(), &t, &Term::cnst("Monoid"))
            .unwrap();
        assert!(matches!(tt, Term::Mk(ref n, _, ref fs) if n == "Monoid" && fs.len() == 3));
    }

    #[test]
    fn check_inserts_nonuniform_coercion() {
        let (env, mut db, tbl) = world();
        declare_nonuniform(
            &env,
            &mut db,
            &NonuniformBranch {
                context: vec![],
                source: Term::Sort,
                target: Term::cnst("Monoid"),
                pattern: Term::cnst("Int"),
                result: Term::Mk(
                    "Monoid".into(),
                    vec![],
                    vec![Term::cnst("Int"), Term::cnst("zplus"), Term::cnst("z0")],
                ),
            },
            None,
        )
        .unwrap();
        let mut e = Elaborator::new(&env, &db, &tbl, UnifyConfig::default());
        let tt = e
            .check(
                &mut LocalContext::new(),
                &Surface::ident("Int"),
                &Term::cnst("Monoid"),
            )
            .unwrap();
        assert!(matches!(tt, Term::Mk(ref n, _, _) if n == "Monoid"));
        let mut env2 = env.clone();
        let r = e.finalize(&mut env2, &mut 0, &tt, &Term::cnst("Monoid")).unwrap();
        assert!(r.obligations.is_empty());
    }

    #[test]
    fn unsolved_branch_variable_becomes_obligation() {
        let (mut env, mut db, tbl) = world();
        env.declare(Declaration::Axiom {
            name: "Claim".into(),
            ty: Term::Sort,
        })
        .unwrap();
        env.declare(Declaration::Structure(StructDecl {
            name: "Tagged".into(),
            params: vec![],
            fields: vec![
                FieldDecl {
                    name: "val".into(),
                    ty: Term::cnst("Int"),
                    kind: FieldKind::Data,
                },
                FieldDecl {
                    name: "why".into(),
                    ty: Term::cnst("Claim"),
                    kind: FieldKind::Property,
                },
            ],
        }))
        .unwrap();
        declare_nonuniform(
            &env,
            &mut db,
            &NonuniformBranch {
                context: vec![("p".into(), Term::cnst("Claim"))],
                source: Term::cnst("Int"),
                target: Term::cnst("Tagged"),
                pattern: Term::cnst("z0"),
                result: Term::Mk(
                    "Tagged".into(),
                    vec![],
                    vec![Term::cnst("z0"), Term::var("p")],
                ),
            },
            None,
        )
        .unwrap();
        let mut e = Elaborator::new(&env, &db, &tbl, UnifyConfig::default());
        let tt = e
            .check(
                &mut LocalContext::new(),
                &Surface::ident("z0"),
                &Term::cnst("Tagged"),
            )
            .unwrap();
        let mut env2 = env.clone();
        let mut counter = 0;
        let r = e.finalize(&mut env2, &mut counter, &tt, &Term::cnst("Tagged")).unwrap();
        assert_eq!(r.obligations.len(), 1);
        assert_eq!(r.obligations[0].0, "obligation_1");
        assert_eq!(r.obligations[0].1, Term::cnst("Claim"));
        assert!(r.term.contains_const("obligation_1"));
        assert!(env2.contains("obligation_1"));
    }

    #[test]
    fn rewrite_with_grid_closes_goal_to_refl_shape() {
        let (env, db, tbl) = world();
        let mut e = Elaborator::new(&env, &db, &tbl, UnifyConfig::default());
        let goal = eq_int(zp(Term::cnst("a"), Term::cnst("z0")), Term::cnst("a"));
        let proof = Surface::app(
            Surface::app(Surface::ident("grid"), Surface::Placeholder),
            Surface::Placeholder,
        );
        let out = e.rewrite_goal(&goal, &proof, Direction::LR, 1).unwrap();
        assert_eq!(out.new_goal, eq_int(Term::cnst("a"), Term::cnst("a")));
        // the matching fired hints
        assert!(e.trace.iter().any(|ev| ev.rule == "hint"));
    }

    #[test]
    fn rewrite_occurrence_selection() {
        let (env, db, tbl) = world();
        let mut e = Elaborator::new(&env, &db, &tbl, UnifyConfig::default());
        // zplus (zplus a z0) z0 = zplus a z0; occurrence 1 is the whole lhs,
        // occurrence 2 the rhs.
        let inner = zp(Term::cnst("a"), Term::cnst("z0"));
        let goal = eq_int(zp(inner.clone(), Term::cnst("z0")), inner.clone());
        let proof = Surface::app(
            Surface::app(Surface::ident("grid"), Surface::Placeholder),
            Surface::Placeholder,
        );
        let out = e.rewrite_goal(&goal, &proof, Direction::LR, 2).unwrap();
        assert_eq!(
            out.new_goal,
            eq_int(zp(inner, Term::cnst("z0")), Term::cnst("a"))
        );
    }

    #[test]
    fn rewrite_without_match_fails() {
        let (env, db, tbl) = world();
        let mut e = Elaborator::new(&env, &db, &tbl, UnifyConfig::default());
        let goal = eq_int(Term::cnst("a"), Term::cnst("a"));
        let proof = Surface::app(
            Surface::app(Surface::ident("grid"), Surface::Placeholder),
            Surface::Placeholder,
        );
        assert!(matches!(
            e.rewrite_goal(&goal, &proof, Direction::LR, 1),
            Err(Error::NoMatch)
        ));
    }

    #[test]
    fn rewrite_right_to_left() {
        let (env, db, tbl) = world();
        let mut e = Elaborator::new(&env, &db, &tbl, UnifyConfig::default());
        // RL by grid turns an `a` into zplus a z0 (the equation read backwards)
        let goal = eq_int(Term::cnst("a"), Term::cnst("a"));
        let proof = Surface::app(
            Surface::app(Surface::ident("grid"), Surface::Placeholder),
            Surface::ident("a"),
        );
        let out = e.rewrite_goal(&goal, &proof, Direction::RL, 1).unwrap();
        assert_eq!(
            out.new_goal,
            eq_int(
                Term::apps(
                    Term::cnst("op"),
                    [
                        Term::cnst("Z"),
                        Term::cnst("a"),
                        Term::app(Term::cnst("unit"), Term::cnst("Z")),
                    ],
                ),
                Term::cnst("a"),
            )
        );
    }
}
