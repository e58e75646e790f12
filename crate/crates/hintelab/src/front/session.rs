//! Script replay: a fresh environment with the prelude loaded, commands
//! executed in order, rendered output collected per command, and diagnostics
//! with source positions.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use super::parse::{Cmd, Command, Parser};
use super::render::{render, render_named, Notation};
use crate::coerce::{
    declare_nonuniform, declare_prelude, declare_uniform, CoercionTable, NonuniformBranch,
};
use crate::elab::{Elaborator, Surface};
use crate::error::{Error, Result};
use crate::hintdb::{render_key, HintDb, HintSpec};
use crate::kernel::{
    ConstKind, Declaration, FieldDecl, GlobalEnv, LocalContext, MetaId, StructDecl, Term,
    DEFAULT_FUEL,
};
use crate::unify::{TraceEvent, UnifyConfig};

#[derive(Debug, Clone, Copy)]
pub struct Flags {
    pub trace: bool,
    pub max_hint_depth: usize,
    pub fuel: u64,
    /// Turn any produced proof obligation into an error.
    pub obligations_fail: bool,
    pub keep_going: bool,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            trace: false,
            max_hint_depth: 8,
            fuel: DEFAULT_FUEL,
            obligations_fail: false,
            keep_going: false,
        }
    }
}

pub struct Session {
    pub env: GlobalEnv,
    pub db: HintDb,
    pub coercions: CoercionTable,
    pub notation: Notation,
    pub flags: Flags,
    /// Rendered command output (the golden-test stream).
    pub output: String,
    /// Unification trace lines (a separate stream so goldens stay stable).
    pub trace_output: String,
    goals: HashMap<String, Term>,
    obligation_counter: usize,
    base_dir: PathBuf,
    include_depth: usize,
}

impl Session {
    pub fn new(flags: Flags) -> Session {
        let mut env = GlobalEnv::new();
        declare_prelude(&mut env).expect("the prelude always loads into an empty environment");
        Session {
            env,
            db: HintDb::new(),
            coercions: CoercionTable::new(),
            notation: Notation::default(),
            flags,
            output: String::new(),
            trace_output: String::new(),
            goals: HashMap::new(),
            obligation_counter: 0,
            base_dir: PathBuf::from("."),
            include_depth: 0,
        }
    }

    /// The current statement of a named conjecture, if declared.
    pub fn goal(&self, name: &str) -> Option<&Term> {
        self.goals.get(name)
    }

    fn cfg(&self) -> UnifyConfig {
        UnifyConfig {
            max_hint_depth: self.flags.max_hint_depth,
            fuel: self.flags.fuel,
        }
    }

    fn out(&mut self, line: impl AsRef<str>) {
        self.output.push_str(line.as_ref());
        self.output.push('\n');
    }

    fn push_trace(&mut self, events: &[TraceEvent]) {
        if !self.flags.trace {
            return;
        }
        for ev in events {
            let mut line = format!("TRACE depth={} rule={}", ev.depth, ev.rule);
            if let Some(h) = &ev.hint {
                line.push_str(&format!(" hint={h}"));
            }
            if ev.swapped {
                line.push_str(" swapped");
            }
            for (name, t) in &ev.assignments {
                line.push_str(&format!(" ?{name} := {}", self.render(t)));
            }
            self.trace_output.push_str(&line);
            self.trace_output.push('\n');
        }
    }

    fn render(&self, t: &Term) -> String {
        render(&self.env, &self.notation, t)
    }

    /// Run a whole script; returns the exit code (0 success, 1 elaboration
    /// error, 2 syntax error, 3 internal invariant violation).
    pub fn run_script(&mut self, src: &str) -> i32 {
        let mut parser = match Parser::new(src) {
            Ok(p) => p,
            Err(e) => {
                self.diagnose(&e);
                return e.exit_code();
            }
        };
        let mut worst = 0;
        while !parser.at_eof() {
            let cmd = match parser.next_command(&self.notation) {
                Ok(c) => c,
                Err(e) => {
                    self.diagnose(&e);
                    worst = worst.max(e.exit_code());
                    if self.flags.keep_going {
                        parser.skip_to_command();
                        continue;
                    }
                    return worst;
                }
            };
            let (line, col) = (cmd.line, cmd.col);
            if let Err(e) = self.exec(cmd) {
                self.out(format!("ERROR {line}:{col}: {e}"));
                self.out("");
                worst = worst.max(e.exit_code());
                if !self.flags.keep_going {
                    return worst;
                }
            }
        }
        worst
    }

    pub fn run_file(&mut self, path: &Path) -> i32 {
        let src = match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                self.out(format!("ERROR 0:0: cannot read `{}`: {e}", path.display()));
                return 2;
            }
        };
        if let Some(dir) = path.parent() {
            self.base_dir = dir.to_path_buf();
        }
        self.run_script(&src)
    }

    fn diagnose(&mut self, e: &Error) {
        if let Error::Syntax { line, col, msg } = e {
            self.out(format!("ERROR {line}:{col}: syntax error: {msg}"));
        } else {
            self.out(format!("ERROR 0:0: {e}"));
        }
        self.out("");
    }

    fn exec(&mut self, cmd: Command) -> Result<()> {
        match cmd.kind {
            Cmd::Def { name, ty, body } => self.cmd_def(&name, &ty, &body),
            Cmd::Axiom { name, ty } => self.cmd_axiom(&name, &ty),
            Cmd::Structure {
                name,
                params,
                fields,
            } => self.cmd_structure(&name, &params, &fields),
            Cmd::Coercion { name, arg_index } => {
                declare_uniform(&self.env, &mut self.db, &mut self.coercions, &name, arg_index)?;
                Ok(())
            }
            Cmd::Nonuniform {
                context,
                source,
                target,
                pattern,
                result,
                priority,
            } => self.cmd_nonuniform(&context, &source, &target, &pattern, &result, priority),
            Cmd::Hint {
                priority,
                context,
                telescope,
                lhs,
                rhs,
            } => self.cmd_hint(priority, &context, &telescope, &lhs, &rhs),
            Cmd::Check { term, expected } => self.cmd_check(&term, &expected),
            Cmd::Infer { term } => self.cmd_infer(&term),
            Cmd::Conjecture { name, statement } => self.cmd_conjecture(&name, &statement),
            Cmd::Rewrite {
                proof,
                goal,
                dir,
                occurrence,
            } => self.cmd_rewrite(&proof, &goal, dir, occurrence),
            Cmd::Expand { name } => {
                let n = self.db.expand_instance_in_hints(&self.env, &name)?;
                self.out(format!("EXPANDED {name}: {n}"));
                self.out("");
                Ok(())
            }
            Cmd::DumpHints => {
                self.dump_hints();
                Ok(())
            }
            Cmd::DumpCoercions => {
                self.dump_coercions();
                Ok(())
            }
            Cmd::InfixDecl { sym, name, prec } => {
                if !self.env.contains(&name) {
                    return Err(Error::UnboundName(name));
                }
                self.notation.declare_infix(&sym, &name, prec);
                Ok(())
            }
            Cmd::PrefixDecl { sym, name } => {
                if !self.env.contains(&name) {
                    return Err(Error::UnboundName(name));
                }
                self.notation.declare_prefix(&sym, &name);
                Ok(())
            }
            Cmd::Include { path } => self.cmd_include(&path, cmd.line, cmd.col),
        }
    }

    // ----- declarations ---------------------------------------------------

    fn cmd_def(&mut self, name: &str, ty: &Surface, body: &Surface) -> Result<()> {
        let base = self.env.clone();
        let mut e = Elaborator::new(&base, &self.db, &self.coercions, self.cfg());
        let res = (|| {
            let mut ctx = LocalContext::new();
            let ty = e.check(&mut ctx, ty, &Term::Sort)?;
            let body = e.check(&mut ctx, body, &ty)?;
            e.finalize(&mut self.env, &mut self.obligation_counter, &body, &ty)
        })();
        let trace = std::mem::take(&mut e.trace);
        drop(e);
        self.push_trace(&trace);
        let r = res?;
        self.report_obligations(&r.obligations)?;
        let (head, _) = r.term.spine();
        let is_instance = match head {
            Term::Mk(..) => true,
            Term::Const(c) => matches!(self.env.const_kind(c), Some(ConstKind::Constructor(_))),
            _ => false,
        };
        self.env.declare(Declaration::Def {
            name: name.to_string(),
            ty: r.ty,
            body: r.term,
            red: crate::kernel::Reducibility::Reducible,
            is_instance,
        })
    }

    fn cmd_axiom(&mut self, name: &str, ty: &Surface) -> Result<()> {
        let base = self.env.clone();
        let mut e = Elaborator::new(&base, &self.db, &self.coercions, self.cfg());
        let res = (|| {
            let mut ctx = LocalContext::new();
            let ty = e.check(&mut ctx, ty, &Term::Sort)?;
            e.finalize(&mut self.env, &mut self.obligation_counter, &ty, &Term::Sort)
        })();
        let trace = std::mem::take(&mut e.trace);
        drop(e);
        self.push_trace(&trace);
        let r = res?;
        self.report_obligations(&r.obligations)?;
        self.env.declare(Declaration::Axiom {
            name: name.to_string(),
            ty: r.term,
        })
    }

    /// Elaborate a surface type in a context, rejecting leftover
    /// metavariables (declarations must be fully explicit).
    fn closed_type(
        e: &mut Elaborator,
        ctx: &mut LocalContext,
        s: &Surface,
        what: &str,
    ) -> Result<Term> {
        let t = e.check(ctx, s, &Term::Sort)?;
        let t = e.subst.apply(&t);
        if t.has_metas() {
            return Err(Error::IllTyped(format!(
                "placeholders are not allowed in {what}"
            )));
        }
        Ok(t)
    }

    fn cmd_structure(
        &mut self,
        name: &str,
        params: &[(String, Surface)],
        fields: &[(crate::kernel::FieldKind, String, Surface)],
    ) -> Result<()> {
        let base = self.env.clone();
        let mut e = Elaborator::new(&base, &self.db, &self.coercions, self.cfg());
        let mut ctx = LocalContext::new();
        let mut decl = StructDecl {
            name: name.to_string(),
            params: Vec::new(),
            fields: Vec::new(),
        };
        for (x, ty) in params {
            let t = Self::closed_type(&mut e, &mut ctx, ty, "structure parameters")?;
            ctx.push(x.clone(), t.clone());
            decl.params.push((x.clone(), t));
        }
        for (kind, fname, fty) in fields {
            let t = Self::closed_type(&mut e, &mut ctx, fty, "structure fields")?;
            ctx.push(fname.clone(), t.clone());
            decl.fields.push(FieldDecl {
                name: fname.clone(),
                ty: t,
                kind: *kind,
            });
        }
        self.env.declare(Declaration::Structure(decl))
    }

    fn cmd_nonuniform(
        &mut self,
        context: &[(String, Surface)],
        source: &Surface,
        target: &Surface,
        pattern: &Surface,
        result: &Surface,
        priority: Option<i64>,
    ) -> Result<()> {
        let base = self.env.clone();
        let mut e = Elaborator::new(&base, &self.db, &self.coercions, self.cfg());
        let mut ctx = LocalContext::new();
        let mut branch = NonuniformBranch {
            context: Vec::new(),
            source: Term::Sort,
            target: Term::Sort,
            pattern: Term::Sort,
            result: Term::Sort,
        };
        for (x, ty) in context {
            let t = Self::closed_type(&mut e, &mut ctx, ty, "a coercion context")?;
            ctx.push(x.clone(), t.clone());
            branch.context.push((x.clone(), t));
        }
        branch.source = Self::closed_type(&mut e, &mut ctx, source, "a coercion source")?;
        branch.target = Self::closed_type(&mut e, &mut ctx, target, "a coercion target")?;
        let closed_at = |e: &mut Elaborator,
                         ctx: &mut LocalContext,
                         s: &Surface,
                         expected: &Term,
                         what: &str|
         -> Result<Term> {
            let t = e.check(ctx, s, expected)?;
            let t = e.subst.apply(&t);
            if t.has_metas() {
                return Err(Error::IllTyped(format!(
                    "placeholders are not allowed in {what}"
                )));
            }
            Ok(t)
        };
        let src = branch.source.clone();
        let tgt = branch.target.clone();
        branch.pattern = closed_at(&mut e, &mut ctx, pattern, &src, "a coercion pattern")?;
        branch.result = closed_at(&mut e, &mut ctx, result, &tgt, "a coercion result")?;
        declare_nonuniform(&self.env, &mut self.db, &branch, priority)?;
        Ok(())
    }

    // ----- hints ------------------------------------------------------------

    /// Lower a hint-side surface term to a kernel term, resolving `?name`
    /// references through the hint's own metavariable numbering.
    fn lower_hint_term(
        &self,
        s: &Surface,
        metas: &HashMap<String, u32>,
        bound: &mut Vec<String>,
    ) -> Result<Term> {
        Ok(match s {
            Surface::Ident(x) => {
                if bound.iter().any(|b| b == x) {
                    Term::var(x.clone())
                } else {
                    Term::cnst(x.clone())
                }
            }
            Surface::MetaRef(n) => match metas.get(n) {
                Some(&i) => Term::Meta(MetaId(i), vec![]),
                None => return Err(Error::UnboundName(format!("?{n}"))),
            },
            Surface::Type => Term::Sort,
            Surface::Unit => Term::UnitTy,
            Surface::Star => Term::Star,
            Surface::App(f, a) => Term::app(
                self.lower_hint_term(f, metas, bound)?,
                self.lower_hint_term(a, metas, bound)?,
            ),
            Surface::Lam(x, ty, body) => {
                let ty = self.lower_hint_term(ty, metas, bound)?;
                bound.push(x.clone());
                let body = self.lower_hint_term(body, metas, bound);
                bound.pop();
                Term::lam(x.clone(), ty, body?)
            }
            Surface::Pi(x, dom, cod) => {
                let dom = self.lower_hint_term(dom, metas, bound)?;
                bound.push(x.clone());
                let cod = self.lower_hint_term(cod, metas, bound);
                bound.pop();
                Term::pi(x.clone(), dom, cod?)
            }
            Surface::Arrow(a, b) => Term::arrow(
                self.lower_hint_term(a, metas, bound)?,
                self.lower_hint_term(b, metas, bound)?,
            ),
            Surface::Placeholder => {
                return Err(Error::IllTyped(
                    "`_` is not allowed in hint declarations".into(),
                ))
            }
            Surface::MkLit(_) => {
                return Err(Error::IllTyped(
                    "structure literals are not allowed in hint declarations; apply the constructor".into(),
                ))
            }
        })
    }

    fn cmd_hint(
        &mut self,
        priority: Option<i64>,
        context: &[(String, Surface)],
        telescope: &[(String, Surface)],
        lhs: &Surface,
        rhs: &Surface,
    ) -> Result<()> {
        let mut metas: HashMap<String, u32> = HashMap::new();
        let mut bound = Vec::new();
        let mut ctx_terms = Vec::new();
        for (i, (x, ty)) in context.iter().enumerate() {
            let t = self.lower_hint_term(ty, &metas, &mut bound)?;
            metas.insert(x.clone(), i as u32);
            ctx_terms.push((x.clone(), t));
        }
        let mut tele_terms = Vec::new();
        for (j, (x, def)) in telescope.iter().enumerate() {
            let d = self.lower_hint_term(def, &metas, &mut bound)?;
            metas.insert(x.clone(), (context.len() + j) as u32);
            tele_terms.push((x.clone(), d));
        }
        let lhs = self.lower_hint_term(lhs, &metas, &mut bound)?;
        let rhs = self.lower_hint_term(rhs, &metas, &mut bound)?;
        self.db.declare_hint(
            &self.env,
            HintSpec {
                context: ctx_terms,
                telescope: tele_terms,
                lhs,
                rhs,
                priority,
            },
        )?;
        Ok(())
    }

    // ----- checking, goals, rewriting --------------------------------------

    fn report_obligations(&mut self, obligations: &[(String, Term)]) -> Result<()> {
        for (name, ty) in obligations {
            let line = format!("OBLIGATION {name}: {}", self.render(ty));
            self.out(line);
        }
        if self.flags.obligations_fail {
            if let Some((name, _)) = obligations.first() {
                return Err(Error::OpenObligation(name.clone()));
            }
        }
        Ok(())
    }

    fn cmd_check(&mut self, term: &Surface, expected: &Surface) -> Result<()> {
        let base = self.env.clone();
        let mut e = Elaborator::new(&base, &self.db, &self.coercions, self.cfg());
        let res = (|| {
            let mut ctx = LocalContext::new();
            let expected = e.check(&mut ctx, expected, &Term::Sort)?;
            let t = e.check(&mut ctx, term, &expected)?;
            e.finalize(&mut self.env, &mut self.obligation_counter, &t, &expected)
        })();
        let trace = std::mem::take(&mut e.trace);
        drop(e);
        self.push_trace(&trace);
        let r = res?;
        self.out(format!("TERM: {}", self.render(&r.term)));
        self.out(format!("TYPE: {}", self.render(&r.ty)));
        self.report_obligations(&r.obligations)?;
        self.out("");
        Ok(())
    }

    fn cmd_infer(&mut self, term: &Surface) -> Result<()> {
        let base = self.env.clone();
        let mut e = Elaborator::new(&base, &self.db, &self.coercions, self.cfg());
        let res = (|| {
            let mut ctx = LocalContext::new();
            let (t, ty) = e.infer(&mut ctx, term)?;
            e.finalize(&mut self.env, &mut self.obligation_counter, &t, &ty)
        })();
        let trace = std::mem::take(&mut e.trace);
        drop(e);
        self.push_trace(&trace);
        let r = res?;
        self.out(format!("TERM: {}", self.render(&r.term)));
        self.out(format!("TYPE: {}", self.render(&r.ty)));
        self.report_obligations(&r.obligations)?;
        self.out("");
        Ok(())
    }

    fn cmd_conjecture(&mut self, name: &str, statement: &Surface) -> Result<()> {
        let base = self.env.clone();
        let mut e = Elaborator::new(&base, &self.db, &self.coercions, self.cfg());
        let res = (|| {
            let mut ctx = LocalContext::new();
            let t = e.check(&mut ctx, statement, &Term::Sort)?;
            e.finalize(&mut self.env, &mut self.obligation_counter, &t, &Term::Sort)
        })();
        let trace = std::mem::take(&mut e.trace);
        drop(e);
        self.push_trace(&trace);
        let r = res?;
        self.goals.insert(name.to_string(), r.term.clone());
        self.out(format!("GOAL {name}: {}", self.render(&r.term)));
        self.out("");
        Ok(())
    }

    fn cmd_rewrite(
        &mut self,
        proof: &Surface,
        goal_name: &str,
        dir: crate::elab::Direction,
        occurrence: usize,
    ) -> Result<()> {
        let goal = self
            .goals
            .get(goal_name)
            .cloned()
            .ok_or_else(|| Error::UnboundName(goal_name.to_string()))?;
        let base = self.env.clone();
        let mut e = Elaborator::new(&base, &self.db, &self.coercions, self.cfg());
        let res = e.rewrite_goal(&goal, proof, dir, occurrence);
        let trace = std::mem::take(&mut e.trace);
        drop(e);
        self.push_trace(&trace);
        let out = res?;
        if out.new_goal.has_metas() {
            return Err(Error::IllTyped(
                "rewrite left unsolved metavariables in the goal".into(),
            ));
        }
        self.goals.insert(goal_name.to_string(), out.new_goal.clone());
        self.out(format!("GOAL {goal_name}: {}", self.render(&out.new_goal)));
        self.out("");
        Ok(())
    }

    // ----- dumps ------------------------------------------------------------

    pub fn dump_hints(&mut self) {
        let mut lines = Vec::new();
        for h in self.db.hints() {
            let names: Vec<String> = h
                .context
                .iter()
                .map(|m| m.name.clone())
                .chain(h.telescope.iter().map(|d| d.name.clone()))
                .collect();
            let rn = |t: &Term| render_named(&self.env, &self.notation, &names, t);
            lines.push(format!("HINT {} priority {}", h.name, h.priority));
            let ctx = if h.context.is_empty() {
                "(none)".to_string()
            } else {
                h.context
                    .iter()
                    .map(|m| format!("{} : {}", m.name, rn(&m.ty)))
                    .collect::<Vec<_>>()
                    .join("; ")
            };
            lines.push(format!("  context: {ctx}"));
            let tele = h
                .telescope
                .iter()
                .map(|d| format!("{} := {}", d.name, rn(&d.def)))
                .collect::<Vec<_>>()
                .join("; ");
            lines.push(format!("  telescope: {tele}"));
            lines.push(format!("  pattern: {} == {}", rn(&h.lhs), rn(&h.rhs)));
            lines.push(format!(
                "  keys: [{}] / [{}]",
                render_key(&h.lhs_key),
                render_key(&h.rhs_key)
            ));
        }
        for l in lines {
            self.out(l);
        }
        self.out("");
    }

    pub fn dump_coercions(&mut self) {
        let mut lines = Vec::new();
        for (i, c) in self.coercions.entries().iter().enumerate() {
            let keys = self.db.coercion_keys(i);
            lines.push(format!("COERCION {} at {}", c.fn_name, c.arg_index));
            lines.push(format!("  source: [{}]", render_key(&keys.source_key)));
            for a in &keys.source_aliases {
                lines.push(format!("  source alias: [{}]", render_key(a)));
            }
            lines.push(format!("  target: [{}]", render_key(&keys.target_key)));
            for a in &keys.target_aliases {
                lines.push(format!("  target alias: [{}]", render_key(a)));
            }
        }
        for l in lines {
            self.out(l);
        }
        self.out("");
    }

    // ----- includes ---------------------------------------------------------

    fn cmd_include(&mut self, path: &str, line: usize, col: usize) -> Result<()> {
        if self.include_depth >= 16 {
            return Err(Error::Syntax {
                line,
                col,
                msg: "include nesting too deep (cycle?)".into(),
            });
        }
        let full = self.base_dir.join(path);
        let src = std::fs::read_to_string(&full).map_err(|e| Error::Syntax {
            line,
            col,
            msg: format!("cannot read include `{}`: {e}", full.display()),
        })?;
        let saved_dir = self.base_dir.clone();
        if let Some(dir) = full.parent() {
            self.base_dir = dir.to_path_buf();
        }
        self.include_depth += 1;
        let mut parser = Parser::new(&src)?;
        let mut result = Ok(());
        while !parser.at_eof() {
            let cmd = parser.next_command(&self.notation)?;
            if let Err(e) = self.exec(cmd) {
                result = Err(e);
                break;
            }
        }
        self.include_depth -= 1;
        self.base_dir = saved_dir;
        result
    }
}
