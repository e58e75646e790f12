//! The coercion layer: the force/k prelude, uniform coercions, compilation
//! of nonuniform coercion declarations into unification hints, and promotion
//! of a term to an expected type.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::hintdb::{key_of, HintDb, HintSpec};
use crate::kernel::{
    normalize_greedy, subst, whnf, Assignment, Declaration, GlobalEnv, LocalContext, MetaId,
    Policy, Reducibility, Term,
};
use crate::unify::{MetaOrigin, MetaSubst, Unifier};

/// One branch of a nonuniform coercion declaration: in `context`, promote a
/// term matching `pattern` (of type `source`) to `result` (of type `target`).
#[derive(Debug, Clone)]
pub struct NonuniformBranch {
    pub context: Vec<(String, Term)>,
    pub source: Term,
    pub target: Term,
    pub pattern: Term,
    pub result: Term,
}

/// A registered uniform coercion: the function applied at `arg_index`
/// (1-based) repairs a mismatch between that argument's type and the
/// codomain behind it.
#[derive(Debug, Clone)]
pub struct UniformCoercion {
    pub fn_name: String,
    pub arg_index: usize,
}

/// The uniform-coercion functions, parallel to the key entries the hint
/// database indexes (same indices).
#[derive(Debug, Clone, Default)]
pub struct CoercionTable {
    entries: Vec<UniformCoercion>,
}

impl CoercionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[UniformCoercion] {
        &self.entries
    }

    pub fn entry(&self, idx: usize) -> &UniformCoercion {
        &self.entries[idx]
    }
}

/// Install the force/k pair and the equality axioms. `force S s T t l`
/// computes the promotion target type behind the unit-typed lock `l`;
/// `k` is the universal fallback coercion inhabiting it.
pub fn declare_prelude(env: &mut GlobalEnv) -> Result<()> {
    if env.contains("force") {
        return Err(Error::AlreadyDeclared("force".into()));
    }
    let quantify = |body: Term| {
        Term::pi(
            "S",
            Term::Sort,
            Term::pi(
                "s",
                Term::var("S"),
                Term::pi(
                    "T",
                    Term::Sort,
                    Term::pi("t", Term::var("T"), Term::pi("l", Term::UnitTy, body)),
                ),
            ),
        )
    };
    let abstract_ = |body: Term| {
        Term::lam(
            "S",
            Term::Sort,
            Term::lam(
                "s",
                Term::var("S"),
                Term::lam(
                    "T",
                    Term::Sort,
                    Term::lam("t", Term::var("T"), Term::lam("l", Term::UnitTy, body)),
                ),
            ),
        )
    };
    let applied = |c: &str| {
        Term::apps(
            Term::cnst(c),
            [
                Term::var("S"),
                Term::var("s"),
                Term::var("T"),
                Term::var("t"),
                Term::var("l"),
            ],
        )
    };

    env.declare(Declaration::Def {
        name: "force".into(),
        ty: quantify(Term::Sort),
        body: abstract_(Term::Case1(
            std::rc::Rc::new(Term::Sort),
            std::rc::Rc::new(Term::var("T")),
            std::rc::Rc::new(Term::var("l")),
        )),
        red: Reducibility::CoercionReducible,
        is_instance: false,
    })?;
    env.declare(Declaration::Def {
        name: "k".into(),
        ty: quantify(applied("force")),
        body: abstract_(Term::Case1(
            std::rc::Rc::new(applied("force")),
            std::rc::Rc::new(Term::var("t")),
            std::rc::Rc::new(Term::var("l")),
        )),
        red: Reducibility::CoercionReducible,
        is_instance: false,
    })?;

    let ax = |env: &mut GlobalEnv, name: &str, ty: Term| {
        env.declare(Declaration::Axiom {
            name: name.into(),
            ty,
        })
    };
    let eq = |a: Term, l: Term, r: Term| Term::apps(Term::cnst("eq"), [a, l, r]);
    ax(
        env,
        "eq",
        Term::pi(
            "A",
            Term::Sort,
            Term::arrow(Term::var("A"), Term::arrow(Term::var("A"), Term::Sort)),
        ),
    )?;
    ax(
        env,
        "refl",
        Term::pi(
            "A",
            Term::Sort,
            Term::pi(
                "a",
                Term::var("A"),
                eq(Term::var("A"), Term::var("a"), Term::var("a")),
            ),
        ),
    )?;
    ax(
        env,
        "eqInd",
        Term::pi(
            "A",
            Term::Sort,
            Term::pi(
                "a",
                Term::var("A"),
                Term::pi(
                    "P",
                    Term::arrow(Term::var("A"), Term::Sort),
                    Term::arrow(
                        Term::app(Term::var("P"), Term::var("a")),
                        Term::pi(
                            "b",
                            Term::var("A"),
                            Term::arrow(
                                eq(Term::var("A"), Term::var("a"), Term::var("b")),
                                Term::app(Term::var("P"), Term::var("b")),
                            ),
                        ),
                    ),
                ),
            ),
        ),
    )?;
    ax(
        env,
        "eqSym",
        Term::pi(
            "A",
            Term::Sort,
            Term::pi(
                "a",
                Term::var("A"),
                Term::pi(
                    "b",
                    Term::var("A"),
                    Term::arrow(
                        eq(Term::var("A"), Term::var("a"), Term::var("b")),
                        eq(Term::var("A"), Term::var("b"), Term::var("a")),
                    ),
                ),
            ),
        ),
    )?;
    Ok(())
}

/// Register `fn_name` as a uniform coercion at its `arg_index`-th argument
/// (1-based): source key from that argument's type, target key from the
/// codomain behind it.
pub fn declare_uniform(
    env: &GlobalEnv,
    db: &mut HintDb,
    table: &mut CoercionTable,
    fn_name: &str,
    arg_index: usize,
) -> Result<usize> {
    if arg_index == 0 {
        return Err(Error::InvalidArgIndex(arg_index));
    }
    let mut ty = env.type_of_const(fn_name)?;
    let mut fuel = crate::kernel::DEFAULT_FUEL;
    let mut source = None;
    for i in 1..=arg_index {
        ty = whnf(env, &ty, Policy::Full, &mut fuel)?;
        let Term::Pi(_, dom, cod) = &ty else {
            return Err(Error::InvalidArgIndex(arg_index));
        };
        if i == arg_index {
            source = Some(dom.as_ref().clone());
        }
        // Binder variables stay as variables: they key as wildcards.
        ty = cod.as_ref().clone();
    }
    let source = source.expect("loop ran at least once");
    let source_key = key_of(env, &source, db.key_depth);
    let target_key = key_of(env, &ty, db.key_depth);
    let idx = db.register_coercion(fn_name, source_key, target_key)?;
    debug_assert_eq!(idx, table.entries.len());
    table.entries.push(UniformCoercion {
        fn_name: fn_name.to_string(),
        arg_index,
    });
    Ok(idx)
}

/// Compile a nonuniform branch to its unification hint
/// `Γ′ ⊢ (?T := T′; ?t := t′; ?l := star) : force S′ s′ ?T ?t ?l == T′`,
/// where primes turn every context variable into a metavariable. Pure sugar:
/// the database ends up exactly as if the hint were declared by hand.
pub fn declare_nonuniform(
    env: &GlobalEnv,
    db: &mut HintDb,
    branch: &NonuniformBranch,
    priority: Option<i64>,
) -> Result<usize> {
    let n_ctx = branch.context.len();
    // Replace context variables by context metas, in order (later context
    // types may mention earlier variables).
    let mut a = Assignment::default();
    let mut context = Vec::with_capacity(n_ctx);
    for (i, (x, ty)) in branch.context.iter().enumerate() {
        let ty = subst(ty, &a)?;
        context.push((x.clone(), ty));
        a.vars.insert(x.clone(), Term::Meta(MetaId(i as u32), vec![]));
    }
    let source = subst(&branch.source, &a)?;
    let target = subst(&branch.target, &a)?;
    let pattern = subst(&branch.pattern, &a)?;
    let result = subst(&branch.result, &a)?;

    let taken: HashSet<String> = branch.context.iter().map(|(x, _)| x.clone()).collect();
    let tele_name = |base: &str| crate::kernel::fresh_name(base, &taken);
    let m = |i: usize| Term::Meta(MetaId((n_ctx + i) as u32), vec![]);
    let lhs = Term::apps(
        Term::cnst("force"),
        [source, pattern, m(0), m(1), m(2)],
    );
    db.declare_hint(
        env,
        HintSpec {
            context,
            telescope: vec![
                (tele_name("T"), target.clone()),
                (tele_name("t"), result),
                (tele_name("l"), Term::Star),
            ],
            lhs,
            rhs: target,
            priority,
        },
    )
}

/// Repair a type mismatch: `term : actual` is wanted at type `expected`.
/// Uniform coercions are tried first (cheap and coherent); otherwise the
/// term is promoted to `k actual term ?T ?t ?l` and
/// `force actual term ?T ?t ?l ≟ expected` is solved, which fires the
/// nonuniform hints. The result is greedy-normalized, so a solved lock
/// makes `k` disappear.
pub fn promote(
    u: &mut Unifier,
    table: &CoercionTable,
    s: &mut MetaSubst,
    ctx: &mut LocalContext,
    term: &Term,
    actual: &Term,
    expected: &Term,
) -> Result<Term> {
    let actual = s.apply(actual);
    let expected = s.apply(expected);

    for idx in u.db.retrieve_coercions(u.env, &actual, &expected) {
        let snap = s.clone();
        let tlen = u.trace.len();
        match try_uniform(u, s, ctx, table.entry(idx), term, &actual, &expected) {
            Ok(t) => return Ok(t),
            Err(e) if e.is_hard() => return Err(e),
            Err(_) => {
                *s = snap;
                u.trace.truncate(tlen);
            }
        }
    }

    let snap = s.clone();
    let tlen = u.trace.len();
    let mt = u
        .metas
        .fresh_scoped("T", Term::Sort, ctx, MetaOrigin::CoercionSlot);
    let t_ty = u.metas.term(mt);
    let mv = u
        .metas
        .fresh_scoped("t", t_ty.clone(), ctx, MetaOrigin::CoercionSlot);
    let ml = u
        .metas
        .fresh_scoped("l", Term::UnitTy, ctx, MetaOrigin::CoercionSlot);
    let slots = [t_ty, u.metas.term(mv), u.metas.term(ml)];
    let forced = Term::apps(
        Term::cnst("force"),
        [actual.clone(), term.clone()].into_iter().chain(slots.clone()),
    );
    match u.unify(s, ctx, &forced, &expected, 0) {
        Ok(()) => {
            let promoted = Term::apps(
                Term::cnst("k"),
                [actual, term.clone()].into_iter().chain(slots),
            );
            Ok(normalize_greedy(u.env, &s.apply(&promoted)))
        }
        Err(e) if e.is_hard() => Err(e),
        Err(_) => {
            *s = snap;
            u.trace.truncate(tlen);
            Err(Error::NoCoercion {
                from: actual.to_string(),
                to: expected.to_string(),
            })
        }
    }
}

/// Apply one uniform coercion: fresh metas for the arguments before the
/// coerced position, then check that the argument type matches `actual` and
/// the codomain matches `expected`.
fn try_uniform(
    u: &mut Unifier,
    s: &mut MetaSubst,
    ctx: &mut LocalContext,
    entry: &UniformCoercion,
    term: &Term,
    actual: &Term,
    expected: &Term,
) -> Result<Term> {
    let mut ty = u.env.type_of_const(&entry.fn_name)?;
    let mut args = Vec::with_capacity(entry.arg_index);
    for i in 1..=entry.arg_index {
        ty = whnf(u.env, &ty, Policy::Full, &mut u.fuel)?;
        let Term::Pi(x, dom, cod) = &ty else {
            return Err(Error::InvalidArgIndex(entry.arg_index));
        };
        let (x, dom, cod) = (x.clone(), dom.as_ref().clone(), cod.as_ref().clone());
        let arg = if i == entry.arg_index {
            u.unify(s, ctx, &dom, actual, 0)?;
            term.clone()
        } else {
            let m = u.metas.fresh_scoped(
                format!("{}_arg{}", entry.fn_name, i),
                dom,
                ctx,
                MetaOrigin::CoercionSlot,
            );
            u.metas.term(m)
        };
        ty = subst(&cod, &Assignment::var(x, arg.clone()))?;
        args.push(arg);
    }
    u.unify(s, ctx, &ty, expected, 0)?;
    let out = Term::apps(Term::cnst(&*entry.fn_name), args);
    Ok(normalize_greedy(u.env, &s.apply(&out)))
}
