//! Path keys (flattened term skeletons) and the discrimination tree.

use std::collections::BTreeMap;

use crate::kernel::{whnf, GlobalEnv, Policy, Term, DEFAULT_FUEL};

/// Skeleton depth used when flattening terms into keys.
pub const KEY_DEPTH: usize = 4;

/// One symbol of a flattened preorder skeleton. Each symbol knows how many
/// subtrees follow it, so a wildcard on either side can skip whole subtrees.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathSym {
    Const(String, usize),
    Sort,
    Pi,
    Lam,
    Mk(String, usize),
    Proj(String, usize),
    Unit,
    Star,
    Wild,
}

impl PathSym {
    pub fn arity(&self) -> usize {
        match self {
            PathSym::Const(_, n) | PathSym::Mk(_, n) => *n,
            PathSym::Pi | PathSym::Lam => 2,
            PathSym::Proj(..) => 1,
            PathSym::Sort | PathSym::Unit | PathSym::Star | PathSym::Wild => 0,
        }
    }
}

impl std::fmt::Display for PathSym {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PathSym::Const(c, n) => write!(f, "{c}/{n}"),
            PathSym::Sort => write!(f, "Type"),
            PathSym::Pi => write!(f, "Pi"),
            PathSym::Lam => write!(f, "fun"),
            PathSym::Mk(s, n) => write!(f, "mk{s}/{n}"),
            PathSym::Proj(s, i) => write!(f, "{s}#{i}"),
            PathSym::Unit => write!(f, "Unit"),
            PathSym::Star => write!(f, "star"),
            PathSym::Wild => write!(f, "*"),
        }
    }
}

pub type PathKey = Vec<PathSym>;

pub fn render_key(key: &PathKey) -> String {
    key.iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Flatten `t` to its retrieval key: the preorder skeleton of the
/// `NoInstanceDelta` weak-head normal form, down to `depth` levels.
/// Metavariable-headed subterms, variables and anything deeper than `depth`
/// become wildcards.
pub fn key_of(env: &GlobalEnv, t: &Term, depth: usize) -> PathKey {
    let mut out = Vec::new();
    key_go(env, t, depth, &mut out);
    out
}

fn key_go(env: &GlobalEnv, t: &Term, depth: usize, out: &mut PathKey) {
    if depth == 0 {
        out.push(PathSym::Wild);
        return;
    }
    let mut fuel = DEFAULT_FUEL;
    let w = whnf(env, t, Policy::NoInstanceDelta, &mut fuel).unwrap_or_else(|_| t.clone());
    let (head, args) = w.spine();
    match head {
        Term::Const(c) => {
            out.push(PathSym::Const(c.clone(), args.len()));
            for a in args {
                key_go(env, a, depth - 1, out);
            }
        }
        Term::Mk(s, params, fields) if args.is_empty() => {
            out.push(PathSym::Mk(s.clone(), params.len() + fields.len()));
            for a in params.iter().chain(fields) {
                key_go(env, a, depth - 1, out);
            }
        }
        Term::Proj(s, i, scrut) if args.is_empty() => {
            out.push(PathSym::Proj(s.clone(), *i));
            key_go(env, scrut, depth - 1, out);
        }
        Term::Pi(_, dom, cod) if args.is_empty() => {
            out.push(PathSym::Pi);
            key_go(env, dom, depth - 1, out);
            key_go(env, cod, depth - 1, out);
        }
        Term::Lam(_, ty, body) if args.is_empty() => {
            out.push(PathSym::Lam);
            key_go(env, ty, depth - 1, out);
            key_go(env, body, depth - 1, out);
        }
        Term::Sort if args.is_empty() => out.push(PathSym::Sort),
        Term::UnitTy if args.is_empty() => out.push(PathSym::Unit),
        Term::Star if args.is_empty() => out.push(PathSym::Star),
        // Variables, metas, stuck eliminators, and anything applied to
        // arguments that should not be: approximate with a wildcard.
        _ => out.push(PathSym::Wild),
    }
}

/// Do two keys match, treating a wildcard on either side as matching one
/// whole subtree of the other?
pub fn keys_compatible(a: &[PathSym], b: &[PathSym]) -> bool {
    fn go(a: &[PathSym], b: &[PathSym]) -> Option<(usize, usize)> {
        // Returns how many symbols of each side one subtree consumes.
        match (a.first()?, b.first()?) {
            (PathSym::Wild, _) => Some((1, skip(b))),
            (_, PathSym::Wild) => Some((skip(a), 1)),
            (x, y) if x == y => {
                let (mut i, mut j) = (1, 1);
                for _ in 0..x.arity() {
                    let (di, dj) = go(&a[i..], &b[j..])?;
                    i += di;
                    j += dj;
                }
                Some((i, j))
            }
            _ => None,
        }
    }
    matches!(go(a, b), Some((i, j)) if i == a.len() && j == b.len())
}

/// Number of symbols making up the first subtree of `k`.
fn skip(k: &[PathSym]) -> usize {
    let mut need = 1usize;
    let mut i = 0usize;
    while need > 0 {
        need = need - 1 + k[i].arity();
        i += 1;
    }
    i
}

/// Trie over path keys; payloads sit at the node completing a key.
#[derive(Debug, Clone)]
pub struct DiscTree<P> {
    root: Node<P>,
}

impl<P> Default for DiscTree<P> {
    fn default() -> Self {
        DiscTree {
            root: Node::default(),
        }
    }
}

#[derive(Debug, Clone)]
struct Node<P> {
    children: BTreeMap<PathSym, Node<P>>,
    payloads: Vec<P>,
}

impl<P> Default for Node<P> {
    fn default() -> Self {
        Node {
            children: BTreeMap::new(),
            payloads: Vec::new(),
        }
    }
}

impl<P: Clone + PartialEq> DiscTree<P> {
    pub fn new() -> Self {
        DiscTree {
            root: Node::default(),
        }
    }

    pub fn insert(&mut self, key: &[PathSym], payload: P) {
        let mut node = &mut self.root;
        for sym in key {
            node = node.children.entry(sym.clone()).or_default();
        }
        if !node.payloads.contains(&payload) {
            node.payloads.push(payload);
        }
    }

    /// All payloads whose key matches the query, wildcards matching whole
    /// subtrees in both directions. May contain duplicates (a payload can be
    /// reachable along several paths); callers dedupe.
    pub fn retrieve(&self, query: &[PathSym]) -> Vec<P> {
        let mut out = Vec::new();
        retrieve_go(&self.root, query, &mut out);
        out
    }
}

fn retrieve_go<P: Clone>(node: &Node<P>, q: &[PathSym], out: &mut Vec<P>) {
    if q.is_empty() {
        out.extend(node.payloads.iter().cloned());
        return;
    }
    // A stored wildcard matches the entire first query subtree.
    if let Some(child) = node.children.get(&PathSym::Wild) {
        retrieve_go(child, &q[skip(q)..], out);
    }
    if q[0] == PathSym::Wild {
        // A query wildcard matches any whole stored subtree.
        for (sym, child) in &node.children {
            if *sym != PathSym::Wild {
                skip_stored(child, sym.arity(), &mut |n| retrieve_go(n, &q[1..], out));
            }
        }
    } else if let Some(child) = node.children.get(&q[0]) {
        retrieve_go(child, &q[1..], out);
    }
}

/// Visit every node exactly `need` whole subtrees below `node`.
fn skip_stored<P>(node: &Node<P>, need: usize, visit: &mut impl FnMut(&Node<P>)) {
    if need == 0 {
        visit(node);
        return;
    }
    for (sym, child) in &node.children {
        skip_stored(child, need - 1 + sym.arity(), visit);
    }
}
