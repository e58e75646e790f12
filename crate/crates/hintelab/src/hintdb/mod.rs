//! Hint storage: validation (linearity, well-typedness, acceptability),
//! discrimination-tree indexing of both pattern orientations, and retrieval
//! for the unifier and the coercion mechanism.

pub mod path;

use crate::error::{Error, Result};
use crate::kernel::term::{count_meta, map_metas, replace_subterm};
use crate::kernel::typecheck::MetaTypes;
use crate::kernel::{
    conv, expand_instance, infer_type_core, normalize_greedy, GlobalEnv, LocalContext, MetaId,
    Term, DEFAULT_FUEL,
};
pub use path::{key_of, keys_compatible, render_key, DiscTree, PathKey, PathSym, KEY_DEPTH};

/// A named metavariable of a hint (context entry, or telescope entry once a
/// definition is attached). Inside the hint's terms these are referenced as
/// `Meta(i)` where `i` indexes context entries first, then telescope entries.
#[derive(Debug, Clone)]
pub struct HintMeta {
    pub name: String,
    pub ty: Term,
}

#[derive(Debug, Clone)]
pub struct HintDef {
    pub name: String,
    pub ty: Term,
    pub def: Term,
}

#[derive(Debug, Clone)]
pub struct Hint {
    pub name: String,
    pub context: Vec<HintMeta>,
    pub telescope: Vec<HintDef>,
    pub lhs: Term,
    pub rhs: Term,
    /// Lower fires first; defaults to declaration order.
    pub priority: i64,
    pub decl_order: usize,
    pub lhs_key: PathKey,
    pub rhs_key: PathKey,
}

impl Hint {
    /// Substitute the telescope definitions into `t` (the τ-side of the
    /// acceptability condition).
    pub fn apply_telescope(&self, t: &Term) -> Term {
        let mut out = t.clone();
        for _ in 0..self.telescope.len() {
            out = map_metas(&out, &mut |m, _| {
                (m.0 as usize)
                    .checked_sub(self.context.len())
                    .and_then(|j| self.telescope.get(j))
                    .map(|d| d.def.clone())
            });
        }
        out
    }
}

/// What a hint declaration provides before validation. Terms reference the
/// hint's own metavariables as `Meta(i)` (context first, then telescope).
#[derive(Debug, Clone)]
pub struct HintSpec {
    pub context: Vec<(String, Term)>,
    /// (name, definition); the type is inferred from the definition.
    pub telescope: Vec<(String, Term)>,
    pub lhs: Term,
    pub rhs: Term,
    pub priority: Option<i64>,
}

/// Which stored pattern side a tree entry refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    Lhs,
    Rhs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Payload {
    Hint { idx: usize, side: Side },
    Coercion { idx: usize },
}

/// A uniform coercion's index entry (the function itself lives in the
/// coercion table; the database only needs its keys).
#[derive(Debug, Clone)]
pub struct CoercionKeys {
    pub source_key: PathKey,
    pub source_aliases: Vec<PathKey>,
    pub target_key: PathKey,
    pub target_aliases: Vec<PathKey>,
}

/// A retrieval candidate: hint index plus whether the problem matched the
/// hint with its sides swapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub idx: usize,
    pub swapped: bool,
}

#[derive(Debug, Clone, Default)]
pub struct HintDb {
    hints: Vec<Hint>,
    coercions: Vec<CoercionKeys>,
    tree: DiscTree<Payload>,
    pub key_depth: usize,
}

struct LocalTypes<'a>(&'a [Term]);

impl MetaTypes for LocalTypes<'_> {
    fn meta_type(&self, m: MetaId) -> Option<Term> {
        self.0.get(m.0 as usize).cloned()
    }
}

impl HintDb {
    pub fn new() -> Self {
        HintDb {
            hints: Vec::new(),
            coercions: Vec::new(),
            tree: DiscTree::new(),
            key_depth: KEY_DEPTH,
        }
    }

    pub fn hints(&self) -> &[Hint] {
        &self.hints
    }

    pub fn hint(&self, idx: usize) -> &Hint {
        &self.hints[idx]
    }

    pub fn coercion_keys(&self, idx: usize) -> &CoercionKeys {
        &self.coercions[idx]
    }

    /// Validate and index a hint: linearity of telescope metas, types of
    /// both sides agree, sides convertible after telescopic substitution.
    pub fn declare_hint(&mut self, env: &GlobalEnv, spec: HintSpec) -> Result<usize> {
        let n_ctx = spec.context.len();
        let decl_order = self.hints.len();
        let name = format!("hint_{}", decl_order + 1);

        // Linearity: each telescope meta occurs exactly once in lhs + rhs.
        for (j, (mname, _)) in spec.telescope.iter().enumerate() {
            let m = MetaId((n_ctx + j) as u32);
            if count_meta(&spec.lhs, m) + count_meta(&spec.rhs, m) != 1 {
                return Err(Error::NonlinearPattern(mname.clone()));
            }
        }

        // Well-typedness: context meta types are given; telescope meta types
        // are the inferred types of their definitions; both sides must have
        // convertible types.
        let mut fuel = DEFAULT_FUEL;
        let mut types: Vec<Term> = spec.context.iter().map(|(_, ty)| ty.clone()).collect();
        let mut telescope = Vec::with_capacity(spec.telescope.len());
        for (mname, def) in &spec.telescope {
            // Canonical form: a fully applied constructor and the literal
            // instance it builds declare the same hint.
            let def = normalize_greedy(env, def);
            let ty = infer_type_core(
                env,
                &mut LocalContext::new(),
                &LocalTypes(&types),
                &def,
                &mut fuel,
            )?;
            types.push(ty.clone());
            telescope.push(HintDef {
                name: mname.clone(),
                ty,
                def,
            });
        }
        let lhs_key = key_of(env, &spec.lhs, self.key_depth);
        let rhs_key = key_of(env, &spec.rhs, self.key_depth);
        let hint = Hint {
            name,
            context: spec
                .context
                .iter()
                .map(|(n, ty)| HintMeta {
                    name: n.clone(),
                    ty: ty.clone(),
                })
                .collect(),
            telescope,
            lhs: spec.lhs,
            rhs: spec.rhs,
            priority: spec.priority.unwrap_or(decl_order as i64),
            decl_order,
            lhs_key,
            rhs_key,
        };

        // Well-typedness of the sides is checked after the telescope is
        // substituted: the raw patterns may apply a meta at a meta-typed
        // position (`?t : ?T`) and only the substituted sides have concrete
        // enough types (`carr ?g` vs a concrete carrier, likewise).
        let al = hint.apply_telescope(&hint.lhs);
        let ar = hint.apply_telescope(&hint.rhs);
        let tl = infer_type_core(env, &mut LocalContext::new(), &LocalTypes(&types), &al, &mut fuel)?;
        let tr = infer_type_core(env, &mut LocalContext::new(), &LocalTypes(&types), &ar, &mut fuel)?;
        if !conv(env, &tl, &tr, &mut fuel)? {
            return Err(Error::TypeMismatch {
                expected: tl.to_string(),
                got: tr.to_string(),
            });
        }

        // Acceptability: the sides must be convertible once every telescope
        // meta is replaced by its definition (context metas stay rigid).
        if !conv(env, &al, &ar, &mut fuel)? {
            return Err(Error::NotAcceptable {
                lhs: al.to_string(),
                rhs: ar.to_string(),
            });
        }

        let idx = self.hints.len();
        self.tree
            .insert(&hint.lhs_key, Payload::Hint { idx, side: Side::Lhs });
        self.tree
            .insert(&hint.rhs_key, Payload::Hint { idx, side: Side::Rhs });

        // One-step closure: a coercion keyed on a term matching one side of
        // this hint becomes retrievable under the other side's key as well.
        for (cidx, c) in self.coercions.iter_mut().enumerate() {
            for (from, to) in [(&hint.lhs_key, &hint.rhs_key), (&hint.rhs_key, &hint.lhs_key)] {
                if keys_compatible(&c.source_key, from) && !c.source_aliases.contains(to) {
                    c.source_aliases.push(to.clone());
                    self.tree.insert(to, Payload::Coercion { idx: cidx });
                }
                if keys_compatible(&c.target_key, from) && !c.target_aliases.contains(to) {
                    c.target_aliases.push(to.clone());
                }
            }
        }

        self.hints.push(hint);
        Ok(idx)
    }

    /// Index a uniform coercion under its source key (and any aliases induced
    /// by already-declared hints). Rejects a second coercion with the same
    /// key pair.
    pub fn register_coercion(
        &mut self,
        name: &str,
        source_key: PathKey,
        target_key: PathKey,
    ) -> Result<usize> {
        if self
            .coercions
            .iter()
            .any(|c| c.source_key == source_key && c.target_key == target_key)
        {
            return Err(Error::DuplicateCoercion(name.to_string()));
        }
        let mut entry = CoercionKeys {
            source_key,
            target_key,
            source_aliases: Vec::new(),
            target_aliases: Vec::new(),
        };
        for h in &self.hints {
            for (from, to) in [(&h.lhs_key, &h.rhs_key), (&h.rhs_key, &h.lhs_key)] {
                if keys_compatible(&entry.source_key, from) && !entry.source_aliases.contains(to) {
                    entry.source_aliases.push(to.clone());
                }
                if keys_compatible(&entry.target_key, from) && !entry.target_aliases.contains(to) {
                    entry.target_aliases.push(to.clone());
                }
            }
        }
        let idx = self.coercions.len();
        self.tree.insert(&entry.source_key, Payload::Coercion { idx });
        for alias in entry.source_aliases.clone() {
            self.tree.insert(&alias, Payload::Coercion { idx });
        }
        self.coercions.push(entry);
        Ok(idx)
    }

    /// Rewrite every stored telescope definition mentioning the instance
    /// constant `name` to use its expanded literal instead (data fields
    /// unfolded, property fields kept as projections of the instance), so
    /// that hint solutions come out as projection redexes the greedy
    /// normalizer contracts. Returns the number of hints rewritten.
    pub fn expand_instance_in_hints(&mut self, env: &GlobalEnv, name: &str) -> Result<usize> {
        let mut fuel = DEFAULT_FUEL;
        let expanded = expand_instance(env, name, &mut fuel)?;
        let target = Term::cnst(name);
        let mut changed = 0;
        for h in &mut self.hints {
            let mut touched = false;
            for d in &mut h.telescope {
                if d.def.contains_const(name) {
                    d.def = replace_subterm(&d.def, &target, &expanded);
                    touched = true;
                }
            }
            if !touched {
                continue;
            }
            changed += 1;
            // The expansion is convertible with the instance, so
            // acceptability is preserved; re-checked defensively.
            let al = h.apply_telescope(&h.lhs);
            let ar = h.apply_telescope(&h.rhs);
            if !conv(env, &al, &ar, &mut fuel)? {
                return Err(Error::NotAcceptable {
                    lhs: al.to_string(),
                    rhs: ar.to_string(),
                });
            }
        }
        Ok(changed)
    }

    /// Candidate hints for the problem `lhs ≟ rhs`, both orientations,
    /// sorted by (priority, declaration order, forward-before-swapped).
    /// Over-approximates: every truly applicable hint is in the list.
    pub fn retrieve_hints(&self, env: &GlobalEnv, lhs: &Term, rhs: &Term) -> Vec<Candidate> {
        let ql = key_of(env, lhs, self.key_depth);
        let qr = key_of(env, rhs, self.key_depth);
        let mut out: Vec<Candidate> = Vec::new();
        let mut push = |idx: usize, swapped: bool| {
            let c = Candidate { idx, swapped };
            if !out.contains(&c) {
                out.push(c);
            }
        };
        for p in self.tree.retrieve(&ql) {
            if let Payload::Hint { idx, side } = p {
                push(idx, side == Side::Rhs);
            }
        }
        for p in self.tree.retrieve(&qr) {
            if let Payload::Hint { idx, side } = p {
                push(idx, side == Side::Lhs);
            }
        }
        out.sort_by_key(|c| {
            let h = &self.hints[c.idx];
            (h.priority, h.decl_order, c.swapped)
        });
        out
    }

    /// Candidate uniform coercions from `actual` to `expected` (by key
    /// compatibility, including hint aliases), in declaration order.
    pub fn retrieve_coercions(&self, env: &GlobalEnv, actual: &Term, expected: &Term) -> Vec<usize> {
        let qa = key_of(env, actual, self.key_depth);
        let qe = key_of(env, expected, self.key_depth);
        let mut out: Vec<usize> = Vec::new();
        for p in self.tree.retrieve(&qa) {
            if let Payload::Coercion { idx } = p {
                let c = &self.coercions[idx];
                let target_ok = keys_compatible(&c.target_key, &qe)
                    || c.target_aliases.iter().any(|a| keys_compatible(a, &qe));
                if target_ok && !out.contains(&idx) {
                    out.push(idx);
                }
            }
        }
        out.sort_unstable();
        out
    }
}
