//! Bidirectional-free core type inference (type-in-type) and instance
//! expansion.

use crate::error::{Error, Result};
use crate::kernel::env::{ConstKind, FieldKind, GlobalEnv, LocalContext};
use crate::kernel::reduce::{conv, normalize_full, whnf, Policy};
use crate::kernel::term::{replace_subterm, subst, Assignment, MetaId, Term};

/// Source of types for metavariables occurring in a term. The kernel itself
/// has no metavariable state; the unifier supplies one of these.
pub trait MetaTypes {
    fn meta_type(&self, m: MetaId) -> Option<Term>;
}

/// For closed (meta-free) terms.
pub struct NoMetas;

impl MetaTypes for NoMetas {
    fn meta_type(&self, _m: MetaId) -> Option<Term> {
        None
    }
}

/// Infer the type of `t` in `ctx`. Fails on unbound names, non-functional
/// application heads and mismatched arguments; the sort of sorts is `Type`
/// itself.
pub fn infer_type_core(
    env: &GlobalEnv,
    ctx: &mut LocalContext,
    metas: &dyn MetaTypes,
    t: &Term,
    fuel: &mut u64,
) -> Result<Term> {
    match t {
        Term::Sort => Ok(Term::Sort),
        Term::Var(x) => ctx
            .lookup(x)
            .cloned()
            .ok_or_else(|| Error::UnboundName(x.clone())),
        Term::Const(c) => env.type_of_const(c),
        Term::Meta(m, _) => metas
            .meta_type(*m)
            .ok_or_else(|| Error::UnboundName(format!("?m{m}"))),
        Term::App(g, a) => {
            let tg = infer_type_core(env, ctx, metas, g, fuel)?;
            let tg = whnf(env, &tg, Policy::Full, fuel)?;
            let Term::Pi(x, dom, cod) = tg else {
                return Err(Error::IllTyped(format!(
                    "`{g}` of type `{tg}` is applied to an argument"
                )));
            };
            let ta = infer_type_core(env, ctx, metas, a, fuel)?;
            if !conv(env, &ta, &dom, fuel)? {
                return Err(Error::TypeMismatch {
                    expected: dom.to_string(),
                    got: ta.to_string(),
                });
            }
            subst(&cod, &Assignment::var(&x, a.as_ref().clone()))
        }
        Term::Lam(x, ty, body) => {
            check_is_type(env, ctx, metas, ty, fuel)?;
            ctx.push(x.clone(), ty.as_ref().clone());
            let tb = infer_type_core(env, ctx, metas, body, fuel);
            ctx.pop();
            Ok(Term::pi(x.clone(), ty.as_ref().clone(), tb?))
        }
        Term::Pi(x, dom, cod) => {
            check_is_type(env, ctx, metas, dom, fuel)?;
            ctx.push(x.clone(), dom.as_ref().clone());
            let r = check_is_type(env, ctx, metas, cod, fuel);
            ctx.pop();
            r?;
            Ok(Term::Sort)
        }
        Term::Mk(sname, params, fields) => {
            let sd = env
                .structure(sname)
                .ok_or_else(|| Error::UnboundName(sname.clone()))?;
            if params.len() != sd.params.len() || fields.len() != sd.fields.len() {
                return Err(Error::IllTyped(format!(
                    "structure literal for `{sname}` has the wrong arity"
                )));
            }
            // Parameter and field types may mention earlier parameters and
            // fields; substitute the supplied values as we go.
            let mut a = Assignment::default();
            for ((x, pty), v) in sd.params.iter().zip(params) {
                let want = subst(pty, &a)?;
                let got = infer_type_core(env, ctx, metas, v, fuel)?;
                if !conv(env, &got, &want, fuel)? {
                    return Err(Error::TypeMismatch {
                        expected: want.to_string(),
                        got: got.to_string(),
                    });
                }
                a.vars.insert(x.clone(), v.clone());
            }
            for (fd, v) in sd.fields.iter().zip(fields) {
                let want = subst(&fd.ty, &a)?;
                let got = infer_type_core(env, ctx, metas, v, fuel)?;
                if !conv(env, &got, &want, fuel)? {
                    return Err(Error::TypeMismatch {
                        expected: want.to_string(),
                        got: got.to_string(),
                    });
                }
                a.vars.insert(fd.name.clone(), v.clone());
            }
            Ok(Term::apps(Term::cnst(sname.clone()), params.iter().cloned()))
        }
        Term::Proj(sname, i, scrut) => {
            let sd = env
                .structure(sname)
                .ok_or_else(|| Error::UnboundName(sname.clone()))?;
            if *i >= sd.fields.len() {
                return Err(Error::IllTyped(format!(
                    "`{sname}` has no field #{i}"
                )));
            }
            let ts = infer_type_core(env, ctx, metas, scrut, fuel)?;
            let ts = whnf(env, &ts, Policy::Full, fuel)?;
            let (head, pvals) = ts.spine();
            if head != &Term::cnst(sname.clone()) || pvals.len() != sd.params.len() {
                return Err(Error::TypeMismatch {
                    expected: sname.clone(),
                    got: ts.to_string(),
                });
            }
            let mut a = Assignment::default();
            for ((x, _), v) in sd.params.iter().zip(&pvals) {
                a.vars.insert(x.clone(), (*v).clone());
            }
            for (j, earlier) in sd.fields.iter().enumerate().take(*i) {
                a.vars.insert(
                    earlier.name.clone(),
                    Term::Proj(sname.clone(), j, scrut.clone()),
                );
            }
            subst(&sd.fields[*i].ty, &a)
        }
        Term::UnitTy => Ok(Term::Sort),
        Term::Star => Ok(Term::UnitTy),
        Term::Case1(c, b, s) => {
            let ts = infer_type_core(env, ctx, metas, s, fuel)?;
            if !conv(env, &ts, &Term::UnitTy, fuel)? {
                return Err(Error::TypeMismatch {
                    expected: Term::UnitTy.to_string(),
                    got: ts.to_string(),
                });
            }
            check_is_type(env, ctx, metas, c, fuel)?;
            // The branch lives at the motive with the scrutinee specialized
            // to `star`.
            let want = replace_subterm(c, s, &Term::Star);
            let tb = infer_type_core(env, ctx, metas, b, fuel)?;
            if !conv(env, &tb, &want, fuel)? {
                return Err(Error::TypeMismatch {
                    expected: want.to_string(),
                    got: tb.to_string(),
                });
            }
            Ok(c.as_ref().clone())
        }
    }
}

fn check_is_type(
    env: &GlobalEnv,
    ctx: &mut LocalContext,
    metas: &dyn MetaTypes,
    t: &Term,
    fuel: &mut u64,
) -> Result<()> {
    let ty = infer_type_core(env, ctx, metas, t, fuel)?;
    if conv(env, &ty, &Term::Sort, fuel)? {
        Ok(())
    } else {
        Err(Error::TypeMismatch {
            expected: Term::Sort.to_string(),
            got: ty.to_string(),
        })
    }
}

/// Unfold an instance constant to an explicit structure literal: data fields
/// are fully normalized, property fields become the corresponding projection
/// applied to the constant itself (keeping proofs compact and printable).
pub fn expand_instance(env: &GlobalEnv, name: &str, fuel: &mut u64) -> Result<Term> {
    match env.const_kind(name) {
        Some(ConstKind::Def { .. }) => {}
        Some(_) | None => return Err(Error::NotAnInstance(name.to_string())),
    }
    let w = whnf(env, &Term::cnst(name), Policy::Full, fuel)?;
    let Term::Mk(sname, params, fields) = w else {
        return Err(Error::NotAnInstance(name.to_string()));
    };
    let sd = env
        .structure(&sname)
        .ok_or_else(|| Error::UnboundName(sname.clone()))?;
    let params: Vec<Term> = params
        .iter()
        .map(|p| normalize_full(env, p, fuel))
        .collect::<Result<_>>()?;
    let mut out_fields = Vec::with_capacity(fields.len());
    for (fd, v) in sd.fields.iter().zip(&fields) {
        out_fields.push(match fd.kind {
            FieldKind::Data => normalize_full(env, v, fuel)?,
            FieldKind::Property => Term::apps(
                Term::cnst(fd.name.clone()),
                params.iter().cloned().chain([Term::cnst(name)]),
            ),
        });
    }
    Ok(Term::Mk(sname, params, out_fields))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::env::{Declaration, FieldDecl, Reducibility, StructDecl};
    use crate::kernel::reduce::DEFAULT_FUEL;
    use std::rc::Rc;

    fn env() -> GlobalEnv {
        let mut env = GlobalEnv::new();
        env.declare(Declaration::Axiom {
            name: "Nat".into(),
            ty: Term::Sort,
        })
        .unwrap();
        env.declare(Declaration::Axiom {
            name: "zero".into(),
            ty: Term::cnst("Nat"),
        })
        .unwrap();
        env.declare(Declaration::Axiom {
            name: "eq".into(),
            ty: Term::pi(
                "A",
                Term::Sort,
                Term::pi(
                    "a",
                    Term::var("A"),
                    Term::pi("b", Term::var("A"), Term::Sort),
                ),
            ),
        })
        .unwrap();
        // Pointed A := { pt : A ; pt_eq : eq A pt pt }
        env.declare(Declaration::Structure(StructDecl {
            name: "Pointed".into(),
            params: vec![("A".into(), Term::Sort)],
            fields: vec![
                FieldDecl {
                    name: "pt".into(),
                    ty: Term::var("A"),
                    kind: FieldKind::Data,
                },
                FieldDecl {
                    name: "pt_eq".into(),
                    ty: Term::apps(
                        Term::cnst("eq"),
                        [Term::var("A"), Term::var("pt"), Term::var("pt")],
                    ),
                    kind: FieldKind::Property,
                },
            ],
        }))
        .unwrap();
        env.declare(Declaration::Axiom {
            name: "zero_eq".into(),
            ty: Term::apps(
                Term::cnst("eq"),
                [Term::cnst("Nat"), Term::cnst("zero"), Term::cnst("zero")],
            ),
        })
        .unwrap();
        env
    }

    fn infer(env: &GlobalEnv, t: &Term) -> Result<Term> {
        let mut fuel = DEFAULT_FUEL;
        infer_type_core(env, &mut LocalContext::new(), &NoMetas, t, &mut fuel)
    }

    #[test]
    fn infers_constructor_application() {
        let env = env();
        let lit = Term::Mk(
            "Pointed".into(),
            vec![Term::cnst("Nat")],
            vec![Term::cnst("zero"), Term::cnst("zero_eq")],
        );
        let ty = infer(&env, &lit).unwrap();
        assert_eq!(ty, Term::app(Term::cnst("Pointed"), Term::cnst("Nat")));
        // The curried constructor constant has the same result type.
        let curried = Term::apps(
            Term::cnst("mkPointed"),
            [Term::cnst("Nat"), Term::cnst("zero"), Term::cnst("zero_eq")],
        );
        let ty2 = infer(&env, &curried).unwrap();
        let mut fuel = DEFAULT_FUEL;
        assert!(conv(&env, &ty, &ty2, &mut fuel).unwrap());
    }

    #[test]
    fn infers_dependent_projection_type() {
        let env = env();
        let lit = Term::Mk(
            "Pointed".into(),
            vec![Term::cnst("Nat")],
            vec![Term::cnst("zero"), Term::cnst("zero_eq")],
        );
        let pr = Term::Proj("Pointed".into(), 1, Rc::new(lit.clone()));
        let ty = infer(&env, &pr).unwrap();
        // eq Nat (Pointed#0 lit) (Pointed#0 lit), convertible to eq Nat zero zero
        let mut fuel = DEFAULT_FUEL;
        let want = Term::apps(
            Term::cnst("eq"),
            [Term::cnst("Nat"), Term::cnst("zero"), Term::cnst("zero")],
        );
        assert!(conv(&env, &ty, &want, &mut fuel).unwrap());
    }

    #[test]
    fn rejects_field_type_mismatch() {
        let env = env();
        let lit = Term::Mk(
            "Pointed".into(),
            vec![Term::cnst("Nat")],
            vec![Term::cnst("Nat"), Term::cnst("zero_eq")],
        );
        assert!(matches!(
            infer(&env, &lit),
            Err(Error::TypeMismatch { .. })
        ));
    }

    #[test]
    fn case1_types_at_motive() {
        let env = env();
        let t = Term::Case1(
            Rc::new(Term::cnst("Nat")),
            Rc::new(Term::cnst("zero")),
            Rc::new(Term::Star),
        );
        assert_eq!(infer(&env, &t).unwrap(), Term::cnst("Nat"));
    }

    #[test]
    fn case1_dependent_motive() {
        // fun l : Unit. case1 (case1 Type Nat l) zero l  : Pi l : Unit. case1 Type Nat l
        let env = env();
        let motive = Term::Case1(
            Rc::new(Term::Sort),
            Rc::new(Term::cnst("Nat")),
            Rc::new(Term::var("l")),
        );
        let t = Term::lam(
            "l",
            Term::UnitTy,
            Term::Case1(
                Rc::new(motive.clone()),
                Rc::new(Term::cnst("zero")),
                Rc::new(Term::var("l")),
            ),
        );
        let ty = infer(&env, &t).unwrap();
        assert_eq!(ty, Term::pi("l", Term::UnitTy, motive));
    }

    #[test]
    fn expand_instance_splits_data_and_property() {
        let mut env = env();
        env.declare(Declaration::Def {
            name: "NatPt".into(),
            ty: Term::app(Term::cnst("Pointed"), Term::cnst("Nat")),
            body: Term::apps(
                Term::cnst("mkPointed"),
                [Term::cnst("Nat"), Term::cnst("zero"), Term::cnst("zero_eq")],
            ),
            red: Reducibility::Reducible,
            is_instance: true,
        })
        .unwrap();
        let mut fuel = DEFAULT_FUEL;
        let e = expand_instance(&env, "NatPt", &mut fuel).unwrap();
        let want = Term::Mk(
            "Pointed".into(),
            vec![Term::cnst("Nat")],
            vec![
                Term::cnst("zero"),
                Term::apps(Term::cnst("pt_eq"), [Term::cnst("Nat"), Term::cnst("NatPt")]),
            ],
        );
        assert_eq!(e, want);
        // and the expansion is well-typed at the instance's type
        let ty = infer(&env, &e).unwrap();
        assert!(conv(
            &env,
            &ty,
            &Term::app(Term::cnst("Pointed"), Term::cnst("Nat")),
            &mut fuel
        )
        .unwrap());
    }

    #[test]
    fn expand_instance_rejects_non_instances() {
        let env = env();
        assert!(matches!(
            expand_instance(&env, "zero", &mut { DEFAULT_FUEL }),
            Err(Error::NotAnInstance(_))
        ));
    }
}
