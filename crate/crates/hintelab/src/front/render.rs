//! Deterministic, re-parseable term rendering. Constants declared `infix`
//! print infix with their precedence; `prefix` constants print prefixed;
//! structure literals print as `<| ... |>`; metavariables as `?name`.

use std::collections::HashMap;

use super::parse::infix_bp;
use crate::kernel::{GlobalEnv, MetaId, Term};

/// User-declared notations. Scripts extend this with `infix "sym" name prec`
/// and `prefix "sym" name`; the table drives both parsing and rendering.
#[derive(Debug, Clone, Default)]
pub struct Notation {
    /// constant name -> (symbol, precedence)
    pub infix: HashMap<String, (String, u32)>,
    /// symbol -> (constant name, precedence)
    pub infix_sym: HashMap<String, (String, u32)>,
    /// constant name -> symbol
    pub prefix: HashMap<String, String>,
    /// symbol -> constant name
    pub prefix_sym: HashMap<String, String>,
}

impl Notation {
    pub fn declare_infix(&mut self, sym: &str, name: &str, prec: u32) {
        self.infix.insert(name.to_string(), (sym.to_string(), prec));
        self.infix_sym
            .insert(sym.to_string(), (name.to_string(), prec));
    }

    pub fn declare_prefix(&mut self, sym: &str, name: &str) {
        self.prefix.insert(name.to_string(), sym.to_string());
        self.prefix_sym.insert(sym.to_string(), name.to_string());
    }
}

const PREFIX_BP: u32 = 9_000;
const APP_BP: u32 = 10_000;

/// Render with metavariables shown as `?<id>`.
pub fn render(env: &GlobalEnv, no: &Notation, t: &Term) -> String {
    render_with(env, no, &|m| format!("{}", m.0), t)
}

/// Render with metavariables named by position (used for hint patterns,
/// whose metas are local indices into the hint's context + telescope).
pub fn render_named(env: &GlobalEnv, no: &Notation, names: &[String], t: &Term) -> String {
    render_with(
        env,
        no,
        &|m| {
            names
                .get(m.0 as usize)
                .cloned()
                .unwrap_or_else(|| format!("{}", m.0))
        },
        t,
    )
}

fn render_with(
    env: &GlobalEnv,
    no: &Notation,
    meta_name: &dyn Fn(MetaId) -> String,
    t: &Term,
) -> String {
    let mut out = String::new();
    go(env, no, meta_name, t, 0, &mut out);
    out
}

fn go(
    env: &GlobalEnv,
    no: &Notation,
    mn: &dyn Fn(MetaId) -> String,
    t: &Term,
    min: u32,
    out: &mut String,
) {
    match t {
        Term::Sort => out.push_str("Type"),
        Term::UnitTy => out.push_str("Unit"),
        Term::Star => out.push_str("star"),
        Term::Var(x) => out.push_str(x),
        Term::Const(c) => out.push_str(c),
        Term::Meta(m, _) => {
            out.push('?');
            out.push_str(&mn(*m));
        }
        Term::App(f, b) => {
            // infix: exactly `c a b` with c declared infix
            if let Term::App(g, a) = f.as_ref() {
                if let Term::Const(c) = g.as_ref() {
                    if let Some((sym, prec)) = no.infix.get(c) {
                        let bp = infix_bp(*prec);
                        paren(bp < min, out, |out| {
                            go(env, no, mn, a, bp, out);
                            out.push(' ');
                            out.push_str(sym);
                            out.push(' ');
                            go(env, no, mn, b, bp + 1, out);
                        });
                        return;
                    }
                }
            }
            // prefix: exactly `c a` with c declared prefix
            if let Term::Const(c) = f.as_ref() {
                if let Some(sym) = no.prefix.get(c) {
                    paren(PREFIX_BP < min, out, |out| {
                        out.push_str(sym);
                        go(env, no, mn, b, PREFIX_BP + 1, out);
                    });
                    return;
                }
            }
            paren(APP_BP < min, out, |out| {
                go(env, no, mn, f, APP_BP, out);
                out.push(' ');
                go(env, no, mn, b, APP_BP + 1, out);
            });
        }
        Term::Lam(x, ty, body) => paren(min > 0, out, |out| {
            out.push_str("fun ");
            out.push_str(x);
            out.push_str(" : ");
            go(env, no, mn, ty, 0, out);
            out.push_str(" => ");
            go(env, no, mn, body, 0, out);
        }),
        Term::Pi(x, dom, cod) => {
            if cod.free_vars().contains(x.as_str()) {
                paren(min > 0, out, |out| {
                    out.push_str("Pi ");
                    out.push_str(x);
                    out.push_str(" : ");
                    go(env, no, mn, dom, 0, out);
                    out.push_str(". ");
                    go(env, no, mn, cod, 0, out);
                });
            } else {
                paren(20 < min, out, |out| {
                    go(env, no, mn, dom, 21, out);
                    out.push_str(" -> ");
                    go(env, no, mn, cod, 20, out);
                });
            }
        }
        Term::Mk(_, _, fields) => {
            out.push_str("<| ");
            for (i, f) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                go(env, no, mn, f, 0, out);
            }
            out.push_str(" |>");
        }
        Term::Proj(sname, idx, scrut) => {
            // print as the projection constant applied to the scrutinee
            let field = env
                .structure(sname)
                .map(|s| s.fields[*idx].name.clone())
                .unwrap_or_else(|| format!("{sname}.{idx}"));
            paren(APP_BP < min, out, |out| {
                out.push_str(&field);
                out.push(' ');
                go(env, no, mn, scrut, APP_BP + 1, out);
            });
        }
        Term::Case1(motive, branch, scrut) => {
            // only reachable for non-normal terms (e.g. a stuck lock)
            paren(APP_BP < min, out, |out| {
                out.push_str("case1 ");
                go(env, no, mn, motive, APP_BP + 1, out);
                out.push(' ');
                go(env, no, mn, branch, APP_BP + 1, out);
                out.push(' ');
                go(env, no, mn, scrut, APP_BP + 1, out);
            });
        }
    }
}

fn paren(needed: bool, out: &mut String, inner: impl FnOnce(&mut String)) {
    if needed {
        out.push('(');
        inner(out);
        out.push(')');
    } else {
        inner(out);
    }
}
