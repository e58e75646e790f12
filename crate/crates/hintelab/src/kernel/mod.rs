//! Trusted core: terms, the global environment, reduction, conversion and
//! type inference.

pub mod env;
pub mod reduce;
pub mod term;
pub mod typecheck;

pub use env::{
    ConstKind, Declaration, FieldDecl, FieldKind, GlobalEnv, LocalContext, Reducibility,
    StructDecl,
};
pub use reduce::{conv, normalize_full, normalize_greedy, whnf, Policy, DEFAULT_FUEL};
pub use term::{
    alpha_eq, fresh_name, replace_subterm, subst, Assignment, MetaId, RcTerm, Term,
};
pub use typecheck::{expand_instance, infer_type_core, MetaTypes, NoMetas};
