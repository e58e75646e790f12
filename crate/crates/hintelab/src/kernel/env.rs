//! Global environment: ordered declarations plus the derived constants
//! (constructors and projections) induced by structure declarations.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::kernel::term::{subst, Assignment, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reducibility {
    /// Unfolded by full reduction.
    Reducible,
    /// Never unfolded.
    Opaque,
    /// Unfolded by full reduction and by the greedy normalizer when that
    /// exposes a projection or unit-eliminator redex; kept folded while
    /// matching hint patterns.
    CoercionReducible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Data,
    Property,
}

#[derive(Debug, Clone)]
pub struct FieldDecl {
    pub name: String,
    /// May mention the parameter names and earlier field names as variables.
    pub ty: Term,
    pub kind: FieldKind,
}

#[derive(Debug, Clone)]
pub struct StructDecl {
    pub name: String,
    pub params: Vec<(String, Term)>,
    pub fields: Vec<FieldDecl>,
}

impl StructDecl {
    pub fn constructor_name(&self) -> String {
        format!("mk{}", self.name)
    }

    /// `Π params. Type`
    pub fn type_of_self(&self) -> Term {
        self.params
            .iter()
            .rev()
            .fold(Term::Sort, |acc, (x, ty)| Term::pi(x.clone(), ty.clone(), acc))
    }

    /// The structure type applied to its parameters (as variables).
    pub fn self_applied(&self) -> Term {
        Term::apps(
            Term::cnst(self.name.clone()),
            self.params.iter().map(|(x, _)| Term::var(x.clone())),
        )
    }

    /// `Π params. Π fields. S params`
    pub fn type_of_constructor(&self) -> Term {
        let mut ty = self.self_applied();
        for f in self.fields.iter().rev() {
            ty = Term::pi(f.name.clone(), f.ty.clone(), ty);
        }
        for (x, pty) in self.params.iter().rev() {
            ty = Term::pi(x.clone(), pty.clone(), ty);
        }
        ty
    }

    /// `Π params. Π self : S params. <field type with earlier fields projected>`
    pub fn type_of_projection(&self, idx: usize) -> Result<Term> {
        let fld = &self.fields[idx];
        let mut a = Assignment::default();
        let self_var = Term::var("self");
        // Earlier fields are referenced through their projection constants
        // (the same spelling elaborated terms use), so the stuck forms agree
        // syntactically.
        for earlier in self.fields.iter().take(idx) {
            a.vars.insert(
                earlier.name.clone(),
                Term::apps(
                    Term::cnst(earlier.name.clone()),
                    self.params
                        .iter()
                        .map(|(x, _)| Term::var(x.clone()))
                        .chain([self_var.clone()]),
                ),
            );
        }
        let mut ty = subst(&fld.ty, &a)?;
        ty = Term::pi("self", self.self_applied(), ty);
        for (x, pty) in self.params.iter().rev() {
            ty = Term::pi(x.clone(), pty.clone(), ty);
        }
        Ok(ty)
    }
}

#[derive(Debug, Clone)]
pub enum Declaration {
    Def {
        name: String,
        ty: Term,
        body: Term,
        red: Reducibility,
        /// Body reduces to a structure literal; such constants are shielded
        /// from delta during hint matching so hints can name them.
        is_instance: bool,
    },
    Axiom {
        name: String,
        ty: Term,
    },
    Structure(StructDecl),
}

impl Declaration {
    pub fn name(&self) -> &str {
        match self {
            Declaration::Def { name, .. } | Declaration::Axiom { name, .. } => name,
            Declaration::Structure(s) => &s.name,
        }
    }
}

/// How a constant resolves in the environment.
#[derive(Debug, Clone, Copy)]
pub enum ConstKind<'a> {
    Def {
        ty: &'a Term,
        body: &'a Term,
        red: Reducibility,
        is_instance: bool,
    },
    Axiom(&'a Term),
    StructType(&'a StructDecl),
    Constructor(&'a StructDecl),
    Projection(&'a StructDecl, usize),
}

#[derive(Debug, Clone, Default)]
pub struct GlobalEnv {
    decls: Vec<Declaration>,
    index: HashMap<String, usize>,
    /// projection name -> (declaration index of structure, field index)
    projections: HashMap<String, (usize, usize)>,
    /// constructor name -> declaration index of structure
    constructors: HashMap<String, usize>,
}

impl GlobalEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn decls(&self) -> &[Declaration] {
        &self.decls
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
            || self.projections.contains_key(name)
            || self.constructors.contains_key(name)
    }

    pub fn declare(&mut self, d: Declaration) -> Result<()> {
        let name = d.name().to_string();
        if self.contains(&name) {
            return Err(Error::AlreadyDeclared(name));
        }
        if let Declaration::Structure(sd) = &d {
            let ctor = sd.constructor_name();
            if self.contains(&ctor) {
                return Err(Error::AlreadyDeclared(ctor));
            }
            for f in &sd.fields {
                if self.contains(&f.name) {
                    return Err(Error::AlreadyDeclared(f.name.clone()));
                }
            }
            let idx = self.decls.len();
            self.constructors.insert(ctor, idx);
            for (i, f) in sd.fields.iter().enumerate() {
                self.projections.insert(f.name.clone(), (idx, i));
            }
        }
        self.index.insert(name, self.decls.len());
        self.decls.push(d);
        Ok(())
    }

    pub fn const_kind(&self, name: &str) -> Option<ConstKind<'_>> {
        if let Some(&i) = self.index.get(name) {
            return Some(match &self.decls[i] {
                Declaration::Def {
                    ty,
                    body,
                    red,
                    is_instance,
                    ..
                } => ConstKind::Def {
                    ty,
                    body,
                    red: *red,
                    is_instance: *is_instance,
                },
                Declaration::Axiom { ty, .. } => ConstKind::Axiom(ty),
                Declaration::Structure(sd) => ConstKind::StructType(sd),
            });
        }
        if let Some(&i) = self.constructors.get(name) {
            if let Declaration::Structure(sd) = &self.decls[i] {
                return Some(ConstKind::Constructor(sd));
            }
        }
        if let Some(&(i, f)) = self.projections.get(name) {
            if let Declaration::Structure(sd) = &self.decls[i] {
                return Some(ConstKind::Projection(sd, f));
            }
        }
        None
    }

    pub fn structure(&self, name: &str) -> Option<&StructDecl> {
        match self.index.get(name).map(|&i| &self.decls[i]) {
            Some(Declaration::Structure(sd)) => Some(sd),
            _ => None,
        }
    }

    pub fn structures(&self) -> impl Iterator<Item = &StructDecl> {
        self.decls.iter().filter_map(|d| match d {
            Declaration::Structure(sd) => Some(sd),
            _ => None,
        })
    }

    pub fn type_of_const(&self, name: &str) -> Result<Term> {
        match self.const_kind(name) {
            Some(ConstKind::Def { ty, .. }) => Ok(ty.clone()),
            Some(ConstKind::Axiom(ty)) => Ok(ty.clone()),
            Some(ConstKind::StructType(sd)) => Ok(sd.type_of_self()),
            Some(ConstKind::Constructor(sd)) => Ok(sd.type_of_constructor()),
            Some(ConstKind::Projection(sd, i)) => sd.type_of_projection(i),
            None => Err(Error::UnboundName(name.to_string())),
        }
    }
}

/// Ordered telescope of local bindings.
#[derive(Debug, Clone, Default)]
pub struct LocalContext {
    bindings: Vec<(String, Term)>,
}

impl LocalContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, ty: Term) {
        self.bindings.push((name.into(), ty));
    }

    pub fn pop(&mut self) {
        self.bindings.pop();
    }

    pub fn lookup(&self, name: &str) -> Option<&Term> {
        self.bindings
            .iter()
            .rev()
            .find(|(x, _)| x == name)
            .map(|(_, ty)| ty)
    }

    pub fn names(&self) -> Vec<String> {
        self.bindings.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, Term)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}
