//! Unification with metavariables. Structural first-order decomposition with
//! a pattern-fragment assignment rule; on failure the hint database is
//! consulted, and as a last resort both sides are retried under full delta.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::hintdb::{Candidate, HintDb};
use crate::kernel::term::map_metas;
use crate::kernel::typecheck::MetaTypes;
use crate::kernel::{
    alpha_eq, conv, fresh_name, infer_type_core, subst, whnf, Assignment, GlobalEnv, LocalContext,
    MetaId, Policy, Term, DEFAULT_FUEL,
};

pub const DEFAULT_MAX_HINT_DEPTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetaOrigin {
    UserPlaceholder,
    CoercionSlot,
    HintFresh,
    Obligation,
}

#[derive(Debug, Clone)]
pub struct MetaInfo {
    pub name: String,
    pub ty: Term,
    pub scope: Vec<String>,
    /// Types of the scope variables, when the creation site had them (used
    /// to Pi-close obligation types). Empty otherwise.
    pub scope_tys: Vec<Term>,
    pub origin: MetaOrigin,
}

/// All metavariables of one elaboration session; ids index into the list.
#[derive(Debug, Clone, Default)]
pub struct MetaCx {
    infos: Vec<MetaInfo>,
}

impl MetaCx {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(
        &mut self,
        name: impl Into<String>,
        ty: Term,
        scope: Vec<String>,
        origin: MetaOrigin,
    ) -> MetaId {
        let id = MetaId(self.infos.len() as u32);
        self.infos.push(MetaInfo {
            name: name.into(),
            ty,
            scope,
            scope_tys: Vec::new(),
            origin,
        });
        id
    }

    /// Fresh meta scoped over the whole local context, with the variable
    /// types recorded.
    pub fn fresh_scoped(
        &mut self,
        name: impl Into<String>,
        ty: Term,
        ctx: &LocalContext,
        origin: MetaOrigin,
    ) -> MetaId {
        let id = self.fresh(name, ty, ctx.names(), origin);
        self.infos[id.0 as usize].scope_tys =
            ctx.iter().map(|(_, t)| t.clone()).collect();
        id
    }

    pub fn info(&self, m: MetaId) -> &MetaInfo {
        &self.infos[m.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.infos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infos.is_empty()
    }

    /// The meta as a term, carrying its scope.
    pub fn term(&self, m: MetaId) -> Term {
        Term::Meta(m, self.info(m).scope.clone())
    }
}

/// The σ/τ/ρ of the formalism: a map from metavariables to terms.
#[derive(Debug, Clone, Default)]
pub struct MetaSubst {
    map: HashMap<u32, Term>,
}

impl MetaSubst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, m: MetaId) -> Option<&Term> {
        self.map.get(&m.0)
    }

    pub fn contains(&self, m: MetaId) -> bool {
        self.map.contains_key(&m.0)
    }

    pub fn insert(&mut self, m: MetaId, t: Term) {
        self.map.insert(m.0, t);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Replace every solved meta, recursively (terminates because the
    /// assignment graph is acyclic by the occurs check).
    pub fn apply(&self, t: &Term) -> Term {
        map_metas(t, &mut |m, _| self.map.get(&m.0).map(|sol| self.apply(sol)))
    }

    /// Solved metas in id order.
    pub fn assignments(&self) -> Vec<(MetaId, Term)> {
        let mut out: Vec<_> = self
            .map
            .iter()
            .map(|(k, v)| (MetaId(*k), v.clone()))
            .collect();
        out.sort_by_key(|(m, _)| *m);
        out
    }
}

/// Metavariable types as the kernel sees them mid-session.
pub struct TypesView<'a> {
    pub metas: &'a MetaCx,
    pub subst: &'a MetaSubst,
}

impl MetaTypes for TypesView<'_> {
    fn meta_type(&self, m: MetaId) -> Option<Term> {
        Some(self.subst.apply(&self.metas.info(m).ty))
    }
}

/// One record of the structured unification trace.
#[derive(Debug, Clone)]
pub struct TraceEvent {
    pub depth: usize,
    pub rule: String,
    pub swapped: bool,
    pub hint: Option<String>,
    pub assignments: Vec<(String, Term)>,
}

#[derive(Debug, Clone, Copy)]
pub struct UnifyConfig {
    pub max_hint_depth: usize,
    pub fuel: u64,
}

impl Default for UnifyConfig {
    fn default() -> Self {
        UnifyConfig {
            max_hint_depth: DEFAULT_MAX_HINT_DEPTH,
            fuel: DEFAULT_FUEL,
        }
    }
}

pub struct Unifier<'a> {
    pub env: &'a GlobalEnv,
    pub db: &'a HintDb,
    pub metas: &'a mut MetaCx,
    pub cfg: UnifyConfig,
    pub fuel: u64,
    pub trace: Vec<TraceEvent>,
}

/// A flex side usable for direct assignment: bare meta, or meta applied to
/// distinct variables.
fn as_pattern(t: &Term) -> Option<(MetaId, Vec<String>, Vec<String>)> {
    let (head, args) = t.spine();
    let Term::Meta(m, scope) = head else {
        return None;
    };
    let mut vars = Vec::with_capacity(args.len());
    for a in args {
        match a {
            Term::Var(x) if !vars.contains(x) => vars.push(x.clone()),
            _ => return None,
        }
    }
    Some((*m, scope.clone(), vars))
}

impl<'a> Unifier<'a> {
    pub fn new(env: &'a GlobalEnv, db: &'a HintDb, metas: &'a mut MetaCx, cfg: UnifyConfig) -> Self {
        Unifier {
            env,
            db,
            metas,
            cfg,
            fuel: cfg.fuel,
            trace: Vec::new(),
        }
    }

    /// Extend `subst` so that both sides become convertible, or fail without
    /// committing (the caller should treat `subst` as poisoned on error and
    /// roll back from its own snapshot).
    pub fn unify(
        &mut self,
        s: &mut MetaSubst,
        ctx: &mut LocalContext,
        lhs: &Term,
        rhs: &Term,
        depth: usize,
    ) -> Result<()> {
        let l0 = s.apply(lhs);
        let r0 = s.apply(rhs);
        self.solve(s, ctx, &l0, &r0, depth, false)
    }

    fn solve(
        &mut self,
        s: &mut MetaSubst,
        ctx: &mut LocalContext,
        l0: &Term,
        r0: &Term,
        depth: usize,
        full: bool,
    ) -> Result<()> {
        let env = self.env;
        // Never unfold coercion-reducible constants while unifying: an
        // unfolded `force` drops its value argument, so a nonuniform hint
        // for one value would match every other.
        let pol = if full {
            Policy::NoCoercionDelta
        } else {
            Policy::NoInstanceDelta
        };
        let lw = whnf(env, l0, pol, &mut self.fuel)?;
        let rw = whnf(env, r0, pol, &mut self.fuel)?;
        if alpha_eq(&lw, &rw) {
            return Ok(());
        }

        // Pattern-fragment assignment. The solution is the *pre-whnf* other
        // side so instance constants survive in elaborated terms.
        if let Some((m, scope, vars)) = as_pattern(&lw) {
            if !s.contains(m) {
                match self.assign(s, ctx, m, &scope, &vars, r0, depth) {
                    Ok(()) => return Ok(()),
                    Err(e) if e.is_hard() => return Err(e),
                    Err(_) => {}
                }
            }
        }
        if let Some((m, scope, vars)) = as_pattern(&rw) {
            if !s.contains(m) {
                match self.assign(s, ctx, m, &scope, &vars, l0, depth) {
                    Ok(()) => return Ok(()),
                    Err(e) if e.is_hard() => return Err(e),
                    Err(_) => {}
                }
            }
        }

        // Structural decomposition, rolled back wholesale on failure.
        let snap = s.clone();
        let tlen = self.trace.len();
        match self.decompose(s, ctx, &lw, &rw, depth) {
            Ok(()) => return Ok(()),
            Err(e) if e.is_hard() => return Err(e),
            Err(_) => {
                *s = snap;
                self.trace.truncate(tlen);
            }
        }

        let mut depth_hit = None;
        if !full {
            // Hints fire on the failed problem, before any delta unfolding
            // of instance constants.
            match self.try_hints(s, ctx, &lw, &rw, depth) {
                Ok(()) => return Ok(()),
                Err(e) if e.is_hard() => return Err(e),
                Err(e @ Error::DepthExceeded(_)) => depth_hit = Some(e),
                Err(_) => {}
            }
            // Last resort: full delta on both sides.
            let lf = whnf(env, l0, Policy::NoCoercionDelta, &mut self.fuel)?;
            let rf = whnf(env, r0, Policy::NoCoercionDelta, &mut self.fuel)?;
            if !(alpha_eq(&lf, &lw) && alpha_eq(&rf, &rw)) {
                match self.solve(s, ctx, &lf, &rf, depth, true) {
                    Ok(()) => return Ok(()),
                    Err(e) if e.is_hard() => return Err(e),
                    Err(_) => {}
                }
            }
        }
        Err(depth_hit.unwrap_or(Error::UnifyFail {
            lhs: lw.to_string(),
            rhs: rw.to_string(),
        }))
    }

    #[allow(clippy::too_many_arguments)]
    fn assign(
        &mut self,
        s: &mut MetaSubst,
        ctx: &mut LocalContext,
        m: MetaId,
        scope: &[String],
        vars: &[String],
        value: &Term,
        depth: usize,
    ) -> Result<()> {
        let name = self.metas.info(m).name.clone();
        if value.contains_meta(m) {
            return Err(Error::OccursCheck(name));
        }
        // Applied variables are abstracted away.
        let mut sol = value.clone();
        for v in vars.iter().rev() {
            let vty = ctx
                .lookup(v)
                .cloned()
                .ok_or_else(|| Error::UnboundName(v.clone()))?;
            sol = Term::lam(v.clone(), s.apply(&vty), sol);
        }
        for fv in sol.free_vars() {
            if !scope.contains(&fv) {
                return Err(Error::ScopeViolation {
                    meta: name,
                    var: fv,
                });
            }
        }
        // Best-effort type check: skipped when remaining metas make the
        // solution's type underdetermined.
        let want = s.apply(&self.metas.info(m).ty);
        let view = TypesView {
            metas: self.metas,
            subst: s,
        };
        let mut fuel = self.fuel;
        match infer_type_core(self.env, ctx, &view, &sol, &mut fuel) {
            Ok(got) => {
                if !got.has_metas()
                    && !want.has_metas()
                    && !conv(self.env, &got, &want, &mut fuel)?
                {
                    return Err(Error::TypeMismatch {
                        expected: want.to_string(),
                        got: got.to_string(),
                    });
                }
            }
            Err(e) if e.is_hard() => return Err(e),
            Err(_) => {}
        }
        self.fuel = fuel;
        s.insert(m, sol.clone());
        self.trace.push(TraceEvent {
            depth,
            rule: "assign".into(),
            swapped: false,
            hint: None,
            assignments: vec![(name, sol)],
        });
        Ok(())
    }

    fn decompose(
        &mut self,
        s: &mut MetaSubst,
        ctx: &mut LocalContext,
        lw: &Term,
        rw: &Term,
        depth: usize,
    ) -> Result<()> {
        match (lw, rw) {
            (Term::App(f1, a1), Term::App(f2, a2)) => {
                self.unify(s, ctx, f1, f2, depth)?;
                self.unify(s, ctx, a1, a2, depth)
            }
            (Term::Lam(x1, t1, b1), Term::Lam(x2, t2, b2))
            | (Term::Pi(x1, t1, b1), Term::Pi(x2, t2, b2)) => {
                self.unify(s, ctx, t1, t2, depth)?;
                let mut avoid: std::collections::HashSet<String> =
                    ctx.names().into_iter().collect();
                avoid.extend(b1.free_vars());
                avoid.extend(b2.free_vars());
                let x = fresh_name(x1, &avoid);
                let b1 = subst(b1, &Assignment::var(x1.as_str(), Term::var(x.clone())))?;
                let b2 = subst(b2, &Assignment::var(x2.as_str(), Term::var(x.clone())))?;
                ctx.push(x, s.apply(t1));
                let r = self.unify(s, ctx, &b1, &b2, depth);
                ctx.pop();
                r
            }
            (Term::Mk(n1, p1, f1), Term::Mk(n2, p2, f2))
                if n1 == n2 && p1.len() == p2.len() && f1.len() == f2.len() =>
            {
                for (a, b) in p1.iter().zip(p2).chain(f1.iter().zip(f2)) {
                    self.unify(s, ctx, a, b, depth)?;
                }
                Ok(())
            }
            (Term::Proj(n1, i1, s1), Term::Proj(n2, i2, s2)) if n1 == n2 && i1 == i2 => {
                self.unify(s, ctx, s1, s2, depth)
            }
            (Term::Case1(c1, b1, s1), Term::Case1(c2, b2, s2)) => {
                self.unify(s, ctx, c1, c2, depth)?;
                self.unify(s, ctx, b1, b2, depth)?;
                self.unify(s, ctx, s1, s2, depth)
            }
            _ => Err(Error::UnifyFail {
                lhs: lw.to_string(),
                rhs: rw.to_string(),
            }),
        }
    }

    /// Try candidate hints in priority order; the first whose patterns and
    /// telescope equations all unify wins.
    pub fn try_hints(
        &mut self,
        s: &mut MetaSubst,
        ctx: &mut LocalContext,
        lw: &Term,
        rw: &Term,
        depth: usize,
    ) -> Result<()> {
        if depth >= self.cfg.max_hint_depth {
            return Err(Error::DepthExceeded(self.cfg.max_hint_depth));
        }
        let cands = self.db.retrieve_hints(self.env, lw, rw);
        let mut depth_hit = None;
        for cand in cands {
            let snap = s.clone();
            let tlen = self.trace.len();
            match self.apply_hint(s, ctx, cand, lw, rw, depth) {
                Ok(()) => return Ok(()),
                Err(e) if e.is_hard() => return Err(e),
                Err(e @ Error::DepthExceeded(_)) => {
                    depth_hit = Some(e);
                    *s = snap;
                    self.trace.truncate(tlen);
                }
                Err(_) => {
                    *s = snap;
                    self.trace.truncate(tlen);
                }
            }
        }
        Err(depth_hit.unwrap_or(Error::UnifyFail {
            lhs: lw.to_string(),
            rhs: rw.to_string(),
        }))
    }

    fn apply_hint(
        &mut self,
        s: &mut MetaSubst,
        ctx: &mut LocalContext,
        cand: Candidate,
        lw: &Term,
        rw: &Term,
        depth: usize,
    ) -> Result<()> {
        let db = self.db;
        let hint = db.hint(cand.idx);
        let scope = ctx.names();
        // Freshen every hint meta; later entries' types may mention earlier
        // metas, so the renaming is built up in order.
        let mut fresh: Vec<Term> = Vec::new();
        let metas_of = |fresh: &Vec<Term>, t: &Term| {
            map_metas(t, &mut |m, _| fresh.get(m.0 as usize).cloned())
        };
        for hm in hint
            .context
            .iter()
            .map(|c| (&c.name, &c.ty))
            .chain(hint.telescope.iter().map(|d| (&d.name, &d.ty)))
        {
            let ty = metas_of(&fresh, hm.1);
            let id = self
                .metas
                .fresh_scoped(hm.0.clone(), ty, &*ctx, MetaOrigin::HintFresh);
            fresh.push(Term::Meta(id, scope.clone()));
        }
        let plhs = metas_of(&fresh, &hint.lhs);
        let prhs = metas_of(&fresh, &hint.rhs);
        let (p, q) = if cand.swapped {
            (&prhs, &plhs)
        } else {
            (&plhs, &prhs)
        };
        self.unify(s, ctx, p, lw, depth + 1)?;
        self.unify(s, ctx, q, rw, depth + 1)?;
        for (j, d) in hint.telescope.iter().enumerate() {
            let mterm = &fresh[hint.context.len() + j];
            let def = metas_of(&fresh, &d.def);
            self.unify(s, ctx, mterm, &def, depth + 1)?;
        }
        let assignments = fresh
            .iter()
            .filter_map(|t| match t {
                Term::Meta(m, _) => s
                    .get(*m)
                    .map(|sol| (self.metas.info(*m).name.clone(), s.apply(sol))),
                _ => None,
            })
            .collect();
        self.trace.push(TraceEvent {
            depth,
            rule: "hint".into(),
            swapped: cand.swapped,
            hint: Some(hint.name.clone()),
            assignments,
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hintdb::HintSpec;
    use crate::kernel::{Declaration, FieldDecl, FieldKind, Reducibility, StructDecl};

    fn lmeta(i: u32) -> Term {
        Term::Meta(MetaId(i), vec![])
    }

    /// Int/Nat monoids with instance Z and a product construction.
    fn base_env() -> GlobalEnv {
        let mut env = GlobalEnv::new();
        let ax = |env: &mut GlobalEnv, n: &str, ty: Term| {
            env.declare(Declaration::Axiom {
                name: n.into(),
                ty,
            })
            .unwrap()
        };
        ax(&mut env, "Int", Term::Sort);
        ax(&mut env, "Nat", Term::Sort);
        ax(
            &mut env,
            "zplus",
            Term::arrow(Term::cnst("Int"), Term::arrow(Term::cnst("Int"), Term::cnst("Int"))),
        );
        ax(&mut env, "z0", Term::cnst("Int"));
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
        ax(
            &mut env,
            "prod",
            Term::arrow(Term::Sort, Term::arrow(Term::Sort, Term::Sort)),
        );
        ax(
            &mut env,
            "prodop",
            Term::pi(
                "A",
                Term::Sort,
                Term::pi(
                    "B",
                    Term::Sort,
                    Term::arrow(
                        Term::arrow(Term::var("A"), Term::arrow(Term::var("A"), Term::var("A"))),
                        Term::arrow(
                            Term::arrow(Term::var("B"), Term::arrow(Term::var("B"), Term::var("B"))),
                            {
                                let p = Term::apps(Term::cnst("prod"), [Term::var("A"), Term::var("B")]);
                                Term::arrow(p.clone(), Term::arrow(p.clone(), p))
                            },
                        ),
                    ),
                ),
            ),
        );
        ax(
            &mut env,
            "pair",
            Term::pi(
                "A",
                Term::Sort,
                Term::pi(
                    "B",
                    Term::Sort,
                    Term::arrow(
                        Term::var("A"),
                        Term::arrow(
                            Term::var("B"),
                            Term::apps(Term::cnst("prod"), [Term::var("A"), Term::var("B")]),
                        ),
                    ),
                ),
            ),
        );
        // MxM h q := the product monoid
        let carr = |g: Term| Term::app(Term::cnst("carr"), g);
        let body = Term::lam(
            "h",
            Term::cnst("Monoid"),
            Term::lam(
                "q",
                Term::cnst("Monoid"),
                Term::apps(
                    Term::cnst("mkMonoid"),
                    [
                        Term::apps(
                            Term::cnst("prod"),
                            [carr(Term::var("h")), carr(Term::var("q"))],
                        ),
                        Term::apps(
                            Term::cnst("prodop"),
                            [
                                carr(Term::var("h")),
                                carr(Term::var("q")),
                                Term::app(Term::cnst("op"), Term::var("h")),
                                Term::app(Term::cnst("op"), Term::var("q")),
                            ],
                        ),
                        Term::apps(
                            Term::cnst("pair"),
                            [
                                carr(Term::var("h")),
                                carr(Term::var("q")),
                                Term::app(Term::cnst("unit"), Term::var("h")),
                                Term::app(Term::cnst("unit"), Term::var("q")),
                            ],
                        ),
                    ],
                ),
            ),
        );
        env.declare(Declaration::Def {
            name: "MxM".into(),
            ty: Term::arrow(
                Term::cnst("Monoid"),
                Term::arrow(Term::cnst("Monoid"), Term::cnst("Monoid")),
            ),
            body,
            red: Reducibility::Reducible,
            is_instance: false,
        })
        .unwrap();
        env
    }

    /// The carrier/operation/unit hint triple.
    fn base_db(env: &GlobalEnv) -> HintDb {
        let mut db = HintDb::new();
        for (proj, rhs) in [
            ("carr", Term::cnst("Int")),
            ("op", Term::cnst("zplus")),
            ("unit", Term::cnst("z0")),
        ] {
            db.declare_hint(
                env,
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
        db
    }

    /// Base hints plus the recursive product hint.
    fn full_db(env: &GlobalEnv) -> HintDb {
        let mut db = base_db(env);
        // (?A := carr ?h; ?B := carr ?q; ?g := MxM ?h ?q) : carr ?g == prod ?A ?B
        db.declare_hint(
            env,
            HintSpec {
                context: vec![
                    ("h".into(), Term::cnst("Monoid")),
                    ("q".into(), Term::cnst("Monoid")),
                ],
                telescope: vec![
                    ("A".into(), Term::app(Term::cnst("carr"), lmeta(0))),
                    ("B".into(), Term::app(Term::cnst("carr"), lmeta(1))),
                    ("g".into(), Term::apps(Term::cnst("MxM"), [lmeta(0), lmeta(1)])),
                ],
                lhs: Term::app(Term::cnst("carr"), lmeta(4)),
                rhs: Term::apps(Term::cnst("prod"), [lmeta(2), lmeta(3)]),
                priority: None,
            },
        )
        .unwrap();
        db
    }

    fn session<'a>(
        env: &'a GlobalEnv,
        db: &'a HintDb,
        metas: &'a mut MetaCx,
    ) -> Unifier<'a> {
        Unifier::new(env, db, metas, UnifyConfig::default())
    }

    #[test]
    fn assigns_bare_meta() {
        let env = base_env();
        let db = HintDb::new();
        let mut metas = MetaCx::new();
        let m = metas.fresh(
            "m",
            Term::arrow(Term::cnst("Int"), Term::arrow(Term::cnst("Int"), Term::cnst("Int"))),
            vec![],
            MetaOrigin::UserPlaceholder,
        );
        let mt = metas.term(m);
        let mut u = session(&env, &db, &mut metas);
        let mut s = MetaSubst::new();
        u.unify(&mut s, &mut LocalContext::new(), &mt, &Term::cnst("zplus"), 0)
            .unwrap();
        assert_eq!(s.apply(&mt), Term::cnst("zplus"));
    }

    #[test]
    fn occurs_check_blocks_cycle() {
        let env = base_env();
        let db = HintDb::new();
        let mut metas = MetaCx::new();
        let m = metas.fresh("m", Term::Sort, vec![], MetaOrigin::UserPlaceholder);
        let mt = metas.term(m);
        let cyc = Term::app(Term::cnst("carr"), mt.clone());
        let mut u = session(&env, &db, &mut metas);
        let mut s = MetaSubst::new();
        assert!(u
            .unify(&mut s, &mut LocalContext::new(), &mt, &cyc, 0)
            .is_err());
    }

    #[test]
    fn carrier_hint_fires() {
        let env = base_env();
        let db = full_db(&env);
        let mut metas = MetaCx::new();
        let g = metas.fresh("G", Term::cnst("Monoid"), vec![], MetaOrigin::UserPlaceholder);
        let gt = metas.term(g);
        let mut u = session(&env, &db, &mut metas);
        let mut s = MetaSubst::new();
        u.unify(
            &mut s,
            &mut LocalContext::new(),
            &Term::app(Term::cnst("carr"), gt.clone()),
            &Term::cnst("Int"),
            0,
        )
        .unwrap();
        assert_eq!(s.apply(&gt), Term::cnst("Z"));
    }

    #[test]
    fn paper_grid_style_problem() {
        // op ?G ?x (unit ?G) =?= zplus a z0, with a : Int in scope
        let env = base_env();
        let db = full_db(&env);
        let mut ctx = LocalContext::new();
        ctx.push("a", Term::cnst("Int"));
        let mut metas = MetaCx::new();
        let g = metas.fresh(
            "G",
            Term::cnst("Monoid"),
            vec!["a".into()],
            MetaOrigin::UserPlaceholder,
        );
        let gt = metas.term(g);
        let x = metas.fresh(
            "x",
            Term::app(Term::cnst("carr"), gt.clone()),
            vec!["a".into()],
            MetaOrigin::UserPlaceholder,
        );
        let xt = metas.term(x);
        let lhs = Term::apps(
            Term::cnst("op"),
            [gt.clone(), xt.clone(), Term::app(Term::cnst("unit"), gt.clone())],
        );
        let rhs = Term::apps(Term::cnst("zplus"), [Term::var("a"), Term::cnst("z0")]);
        let mut u = session(&env, &db, &mut metas);
        let mut s = MetaSubst::new();
        u.unify(&mut s, &mut ctx, &lhs, &rhs, 0).unwrap();
        assert_eq!(s.apply(&gt), Term::cnst("Z"));
        assert_eq!(s.apply(&xt), Term::var("a"));
        // soundness: both sides convertible after instantiation
        let mut fuel = DEFAULT_FUEL;
        assert!(conv(&env, &s.apply(&lhs), &s.apply(&rhs), &mut fuel).unwrap());
    }

    #[test]
    fn product_hint_recurses() {
        // carr ?1 =?= prod Int Int solves ?1 to the product instance MxM Z Z
        let env = base_env();
        let db = full_db(&env);
        let mut metas = MetaCx::new();
        let g = metas.fresh("1", Term::cnst("Monoid"), vec![], MetaOrigin::UserPlaceholder);
        let gt = metas.term(g);
        let lhs = Term::app(Term::cnst("carr"), gt.clone());
        let rhs = Term::apps(Term::cnst("prod"), [Term::cnst("Int"), Term::cnst("Int")]);
        let mut u = session(&env, &db, &mut metas);
        let mut s = MetaSubst::new();
        u.unify(&mut s, &mut LocalContext::new(), &lhs, &rhs, 0).unwrap();
        assert_eq!(
            s.apply(&gt),
            Term::apps(Term::cnst("MxM"), [Term::cnst("Z"), Term::cnst("Z")])
        );
        // the trace shows a recursive hint application (two depth levels)
        let hint_depths: Vec<usize> = u
            .trace
            .iter()
            .filter(|e| e.rule == "hint")
            .map(|e| e.depth)
            .collect();
        assert!(hint_depths.contains(&0));
        assert!(hint_depths.iter().any(|d| *d > 0));
        let mut fuel = DEFAULT_FUEL;
        assert!(conv(&env, &s.apply(&lhs), &s.apply(&rhs), &mut fuel).unwrap());
    }

    #[test]
    fn no_hint_means_failure() {
        let env = base_env();
        let db = base_db(&env);
        let mut metas = MetaCx::new();
        let g = metas.fresh("g", Term::cnst("Monoid"), vec![], MetaOrigin::UserPlaceholder);
        let gt = metas.term(g);
        let mut u = session(&env, &db, &mut metas);
        let mut s = MetaSubst::new();
        // heads with no hint indexed at all: a clean failure
        let r = u.unify(
            &mut s,
            &mut LocalContext::new(),
            &Term::cnst("prod"),
            &Term::cnst("pair"),
            0,
        );
        assert!(matches!(r, Err(Error::UnifyFail { .. })));
        // a carrier problem no hint solves: the search bottoms out (either
        // plain failure or the depth bound, depending on how the swapped
        // orientations regenerate the problem) but never succeeds
        let r = u.unify(
            &mut s,
            &mut LocalContext::new(),
            &Term::app(Term::cnst("carr"), gt.clone()),
            &Term::cnst("Nat"),
            0,
        );
        assert!(r.is_err());
        assert!(s.apply(&gt).has_metas());
    }

    #[test]
    fn cyclic_hint_hits_depth_bound() {
        let mut env = GlobalEnv::new();
        env.declare(Declaration::Axiom {
            name: "Int".into(),
            ty: Term::Sort,
        })
        .unwrap();
        env.declare(Declaration::Axiom {
            name: "Nat".into(),
            ty: Term::Sort,
        })
        .unwrap();
        env.declare(Declaration::Axiom {
            name: "f".into(),
            ty: Term::arrow(Term::Sort, Term::Sort),
        })
        .unwrap();
        let mut db = HintDb::new();
        // (?p := f ?w; ?r := f ?w) : ?p == ?r — matches any failed problem
        // and regenerates an isomorphic subproblem forever.
        db.declare_hint(
            &env,
            HintSpec {
                context: vec![("w".into(), Term::Sort)],
                telescope: vec![
                    ("p".into(), Term::app(Term::cnst("f"), lmeta(0))),
                    ("r".into(), Term::app(Term::cnst("f"), lmeta(0))),
                ],
                lhs: lmeta(1),
                rhs: lmeta(2),
                priority: None,
            },
        )
        .unwrap();
        let mut metas = MetaCx::new();
        let mut u = session(&env, &db, &mut metas);
        let mut s = MetaSubst::new();
        let started = std::time::Instant::now();
        let r = u.unify(
            &mut s,
            &mut LocalContext::new(),
            &Term::cnst("Int"),
            &Term::cnst("Nat"),
            0,
        );
        assert!(matches!(r, Err(Error::DepthExceeded(_))));
        assert!(started.elapsed().as_millis() < 100);
    }

    #[test]
    fn hint_uses_are_freshened() {
        let env = base_env();
        let db = full_db(&env);
        let mut metas = MetaCx::new();
        let g1 = metas.fresh("g1", Term::cnst("Monoid"), vec![], MetaOrigin::UserPlaceholder);
        let g2 = metas.fresh("g2", Term::cnst("Monoid"), vec![], MetaOrigin::UserPlaceholder);
        let t1 = metas.term(g1);
        let t2 = metas.term(g2);
        let mut u = session(&env, &db, &mut metas);
        let mut s = MetaSubst::new();
        let before = u.metas.len();
        u.unify(
            &mut s,
            &mut LocalContext::new(),
            &Term::app(Term::cnst("carr"), t1),
            &Term::cnst("Int"),
            0,
        )
        .unwrap();
        let mid = u.metas.len();
        u.unify(
            &mut s,
            &mut LocalContext::new(),
            &Term::app(Term::cnst("carr"), t2),
            &Term::cnst("Int"),
            0,
        )
        .unwrap();
        let after = u.metas.len();
        assert!(mid > before && after > mid);
    }

    #[test]
    fn monotonic_over_assigned_metas() {
        let env = base_env();
        let db = HintDb::new();
        let mut metas = MetaCx::new();
        let m = metas.fresh("m", Term::Sort, vec![], MetaOrigin::UserPlaceholder);
        let mt = metas.term(m);
        let mut u = session(&env, &db, &mut metas);
        let mut s = MetaSubst::new();
        u.unify(&mut s, &mut LocalContext::new(), &mt, &Term::cnst("Int"), 0)
            .unwrap();
        // unifying the now-solved meta against something else must fail,
        // not reassign
        assert!(u
            .unify(&mut s, &mut LocalContext::new(), &mt, &Term::cnst("Nat"), 0)
            .is_err());
        assert_eq!(s.apply(&mt), Term::cnst("Int"));
    }
}
