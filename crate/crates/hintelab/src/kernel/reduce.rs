//! Weak-head and full reduction, conversion, and the greedy normalizer that
//! eagerly contracts projection-over-constructor and unit-eliminator redexes.

use std::rc::Rc;

use crate::error::{Error, Result};
use crate::kernel::env::{ConstKind, GlobalEnv, Reducibility};
use crate::kernel::term::{alpha_eq, subst, Assignment, Term};

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// beta + iota + delta on every non-opaque constant.
    Full,
    /// beta + iota only.
    NoDelta,
    /// beta + iota + delta, but structure instances and coercion-reducible
    /// constants stay folded so hint patterns can match them symbolically.
    NoInstanceDelta,
    /// beta + iota + delta including instances, but coercion-reducible
    /// constants stay folded: unfolding `force` would erase its value
    /// argument and defeat the lock encoding during unification.
    NoCoercionDelta,
}

fn delta_allowed(pol: Policy, red: Reducibility, is_instance: bool) -> bool {
    match pol {
        Policy::Full => red != Reducibility::Opaque,
        Policy::NoDelta => false,
        Policy::NoInstanceDelta => red == Reducibility::Reducible && !is_instance,
        Policy::NoCoercionDelta => red == Reducibility::Reducible,
    }
}

fn tick(fuel: &mut u64) -> Result<()> {
    if *fuel == 0 {
        return Err(Error::FuelExhausted);
    }
    *fuel -= 1;
    Ok(())
}

fn subst_var(t: &Term, x: &str, v: &Term) -> Term {
    subst(t, &Assignment::var(x, v.clone())).expect("variable substitution cannot fail")
}

/// Weak-head normal form under the given policy. Total on well-scoped terms;
/// stuck terms are returned as-is.
pub fn whnf(env: &GlobalEnv, t: &Term, pol: Policy, fuel: &mut u64) -> Result<Term> {
    let (mut head, mut args) = t.spine_owned();
    loop {
        tick(fuel)?;
        if let Term::App(..) = head {
            let (h2, mut a2) = head.spine_owned();
            a2.extend(args);
            head = h2;
            args = a2;
        }
        match head {
            Term::Lam(ref x, _, ref body) if !args.is_empty() => {
                let arg = args.remove(0);
                head = subst_var(body, x, &arg);
            }
            Term::Case1(ref c, ref b, ref s) => {
                let s2 = whnf(env, s, pol, fuel)?;
                if s2 == Term::Star {
                    head = b.as_ref().clone();
                } else {
                    let stuck = Term::Case1(c.clone(), b.clone(), Rc::new(s2));
                    return Ok(Term::apps(stuck, args));
                }
            }
            Term::Proj(ref sname, i, ref scrut) => {
                let s2 = whnf(env, scrut, pol, fuel)?;
                if let Term::Mk(_, _, fields) = &s2 {
                    head = fields[i].clone();
                } else {
                    return Ok(Term::apps(Term::Proj(sname.clone(), i, Rc::new(s2)), args));
                }
            }
            Term::Const(ref c) => match env.const_kind(c) {
                Some(ConstKind::Constructor(sd)) => {
                    let n = sd.params.len() + sd.fields.len();
                    if args.len() >= n {
                        let rest = args.split_off(n);
                        let fields = args.split_off(sd.params.len());
                        head = Term::Mk(sd.name.clone(), args, fields);
                        args = rest;
                    } else {
                        return Ok(Term::apps(head, args));
                    }
                }
                Some(ConstKind::Projection(sd, i)) => {
                    let k = sd.params.len();
                    if args.len() >= k + 1 {
                        let s2 = whnf(env, &args[k], pol, fuel)?;
                        if let Term::Mk(_, _, fields) = &s2 {
                            head = fields[i].clone();
                            args.drain(0..=k);
                        } else {
                            args[k] = s2;
                            return Ok(Term::apps(head, args));
                        }
                    } else {
                        return Ok(Term::apps(head, args));
                    }
                }
                Some(ConstKind::Def {
                    body,
                    red,
                    is_instance,
                    ..
                }) if delta_allowed(pol, red, is_instance) => {
                    head = body.clone();
                }
                _ => return Ok(Term::apps(head, args)),
            },
            _ => return Ok(Term::apps(head, args)),
        }
    }
}

/// Full beta-delta-iota normal form.
pub fn normalize_full(env: &GlobalEnv, t: &Term, fuel: &mut u64) -> Result<Term> {
    let t = whnf(env, t, Policy::Full, fuel)?;
    map_children_res(&t, &mut |c| normalize_full(env, c, fuel))
}

/// Convertibility: identical full normal forms up to alpha. Metavariables are
/// treated as rigid symbols.
pub fn conv(env: &GlobalEnv, t: &Term, u: &Term, fuel: &mut u64) -> Result<bool> {
    if alpha_eq(t, u) {
        return Ok(true);
    }
    let nt = normalize_full(env, t, fuel)?;
    let nu = normalize_full(env, u, fuel)?;
    Ok(alpha_eq(&nt, &nu))
}

fn map_children_res(t: &Term, f: &mut impl FnMut(&Term) -> Result<Term>) -> Result<Term> {
    Ok(match t {
        Term::App(g, a) => Term::app(f(g)?, f(a)?),
        Term::Lam(x, ty, body) => Term::lam(x.clone(), f(ty)?, f(body)?),
        Term::Pi(x, ty, body) => Term::pi(x.clone(), f(ty)?, f(body)?),
        Term::Mk(s, params, fields) => Term::Mk(
            s.clone(),
            params.iter().map(&mut *f).collect::<Result<_>>()?,
            fields.iter().map(&mut *f).collect::<Result<_>>()?,
        ),
        Term::Proj(s, i, u) => Term::Proj(s.clone(), *i, Rc::new(f(u)?)),
        Term::Case1(c, b, s) => Term::Case1(Rc::new(f(c)?), Rc::new(f(b)?), Rc::new(f(s)?)),
        _ => t.clone(),
    })
}

/// Greedy normalization: contracts, everywhere in the term,
/// projection-over-constructor and unit-eliminator redexes, beta redexes, and
/// coercion-reducible constants whose unfolding exposes one of the former.
/// No general delta unfolding; structure instances stay folded. Idempotent.
pub fn normalize_greedy(env: &GlobalEnv, t: &Term) -> Term {
    let mut fuel = DEFAULT_FUEL;
    greedy_go(env, t, &mut fuel)
}

fn greedy_go(env: &GlobalEnv, t: &Term, fuel: &mut u64) -> Term {
    if *fuel == 0 {
        return t.clone();
    }
    *fuel -= 1;
    let t = map_children_res(t, &mut |c| Ok(greedy_go(env, c, fuel)))
        .expect("greedy child traversal cannot fail");
    greedy_head(env, t, fuel)
}

fn greedy_head(env: &GlobalEnv, t: Term, fuel: &mut u64) -> Term {
    if *fuel == 0 {
        return t;
    }
    *fuel -= 1;
    let (head, mut args) = t.spine_owned();
    match &head {
        Term::Lam(x, _, body) if !args.is_empty() => {
            let arg = args.remove(0);
            let r = subst_var(body, x, &arg);
            greedy_go(env, &Term::apps(r, args), fuel)
        }
        Term::Case1(_, b, s) if s.as_ref() == &Term::Star => {
            greedy_head(env, Term::apps(b.as_ref().clone(), args), fuel)
        }
        Term::Proj(_, i, scrut) => {
            if let Term::Mk(_, _, fields) = scrut.as_ref() {
                greedy_head(env, Term::apps(fields[*i].clone(), args), fuel)
            } else {
                Term::apps(head, args)
            }
        }
        Term::Const(c) => match env.const_kind(c) {
            Some(ConstKind::Constructor(sd)) => {
                let n = sd.params.len() + sd.fields.len();
                if args.len() >= n {
                    let rest = args.split_off(n);
                    let fields = args.split_off(sd.params.len());
                    greedy_head(env, Term::apps(Term::Mk(sd.name.clone(), args, fields), rest), fuel)
                } else {
                    Term::apps(head, args)
                }
            }
            Some(ConstKind::Projection(sd, i)) => {
                let k = sd.params.len();
                if args.len() >= k + 1 {
                    if let Term::Mk(_, _, fields) = &args[k] {
                        let field = fields[i].clone();
                        let rest = args.split_off(k + 1);
                        greedy_head(env, Term::apps(field, rest), fuel)
                    } else {
                        Term::apps(head, args)
                    }
                } else {
                    Term::apps(head, args)
                }
            }
            Some(ConstKind::Def {
                body,
                red: Reducibility::CoercionReducible,
                ..
            }) if !args.is_empty() => {
                match unfold_if_exposes_redex(env, body, &args) {
                    Some(r) => greedy_go(env, &r, fuel),
                    None => Term::apps(head, args),
                }
            }
            _ => Term::apps(head, args),
        },
        _ => Term::apps(head, args),
    }
}

/// Trial unfolding for a coercion-reducible constant: beta-apply the body to
/// the arguments and commit only when the result is a unit-eliminator redex
/// on `star` or a projection applied to a constructor.
fn unfold_if_exposes_redex(env: &GlobalEnv, body: &Term, args: &[Term]) -> Option<Term> {
    let mut b = body.clone();
    let mut rem = args.to_vec();
    while let Term::Lam(x, _, bd) = &b {
        if rem.is_empty() {
            return None; // under-applied
        }
        let arg = rem.remove(0);
        b = subst_var(bd, x, &arg);
    }
    let exposes = match &b {
        Term::Case1(_, _, s) => s.as_ref() == &Term::Star,
        Term::Proj(_, _, scrut) => matches!(scrut.as_ref(), Term::Mk(..)),
        _ => {
            let (h, sp) = b.spine();
            match h {
                Term::Const(c) => match env.const_kind(c) {
                    Some(ConstKind::Projection(sd, _)) => sp
                        .get(sd.params.len())
                        .is_some_and(|s| matches!(s, Term::Mk(..))),
                    _ => false,
                },
                _ => false,
            }
        }
    };
    if exposes {
        Some(Term::apps(b, rem))
    } else {
        None
    }
}
