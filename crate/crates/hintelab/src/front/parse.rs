//! Recursive-descent / Pratt parser for commands and terms. Operator tokens
//! get their meaning from the notation table, which scripts extend with
//! `infix` and `prefix` declarations, so commands are parsed one at a time
//! as the script is replayed.

use super::lex::{lex, Tok, Token};
use super::render::Notation;
use crate::elab::{Direction, Surface};
use crate::error::{Error, Result};
use crate::kernel::FieldKind;

#[derive(Debug, Clone)]
pub struct Command {
    pub line: usize,
    pub col: usize,
    pub kind: Cmd,
}

#[derive(Debug, Clone)]
pub enum Cmd {
    Def {
        name: String,
        ty: Surface,
        body: Surface,
    },
    Axiom {
        name: String,
        ty: Surface,
    },
    Structure {
        name: String,
        params: Vec<(String, Surface)>,
        fields: Vec<(FieldKind, String, Surface)>,
    },
    Coercion {
        name: String,
        arg_index: usize,
    },
    Nonuniform {
        context: Vec<(String, Surface)>,
        source: Surface,
        target: Surface,
        pattern: Surface,
        result: Surface,
        priority: Option<i64>,
    },
    Hint {
        priority: Option<i64>,
        context: Vec<(String, Surface)>,
        telescope: Vec<(String, Surface)>,
        lhs: Surface,
        rhs: Surface,
    },
    Check {
        term: Surface,
        expected: Surface,
    },
    Infer {
        term: Surface,
    },
    Conjecture {
        name: String,
        statement: Surface,
    },
    Rewrite {
        proof: Surface,
        goal: String,
        dir: Direction,
        occurrence: usize,
    },
    Expand {
        name: String,
    },
    DumpHints,
    DumpCoercions,
    InfixDecl {
        sym: String,
        name: String,
        prec: u32,
    },
    PrefixDecl {
        sym: String,
        name: String,
    },
    Include {
        path: String,
    },
}

/// Binding power of `->` (right associative). User infix operators sit
/// above it, application above everything.
const ARROW_BP: u32 = 20;

pub fn infix_bp(prec: u32) -> u32 {
    40 + 2 * prec
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
        })
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if !matches!(t, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<()> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {:?}", self.peek()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected {what}, found {other:?}")),
        }
    }

    fn int(&mut self, what: &str) -> Result<i64> {
        match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                Ok(v)
            }
            ref other => self.err(format!("expected {what}, found {other:?}")),
        }
    }

    fn string(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected {what}, found {other:?}")),
        }
    }

    // ----- terms ---------------------------------------------------------

    fn starts_atom(tok: &Tok) -> bool {
        matches!(
            tok,
            Tok::Ident(_)
                | Tok::Underscore
                | Tok::MetaName(_)
                | Tok::TypeKw
                | Tok::UnitKw
                | Tok::StarKw
                | Tok::LParen
                | Tok::LMk
        )
    }

    pub fn term(&mut self, no: &Notation) -> Result<Surface> {
        self.term_bp(no, 0)
    }

    fn term_bp(&mut self, no: &Notation, min: u32) -> Result<Surface> {
        let mut lhs = self.prefix_term(no)?;
        loop {
            match self.peek().clone() {
                Tok::Arrow => {
                    if ARROW_BP < min {
                        break;
                    }
                    self.bump();
                    // right associative: the recursive call may take
                    // another arrow at the same level
                    let rhs = self.term_bp(no, ARROW_BP)?;
                    lhs = Surface::Arrow(Box::new(lhs), Box::new(rhs));
                }
                Tok::Op(s) => {
                    let Some((cname, prec)) = no.infix_sym.get(&s).cloned() else {
                        return self.err(format!("`{s}` is not a declared infix operator"));
                    };
                    let bp = infix_bp(prec);
                    if bp < min {
                        break;
                    }
                    self.bump();
                    let rhs = self.term_bp(no, bp + 1)?;
                    lhs = Surface::app(Surface::app(Surface::ident(cname), lhs), rhs);
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn prefix_term(&mut self, no: &Notation) -> Result<Surface> {
        match self.peek().clone() {
            Tok::Fun => {
                self.bump();
                let x = self.ident("a binder name after `fun`")?;
                self.expect(&Tok::Colon, "`:` after the binder")?;
                let ty = self.term_bp(no, 0)?;
                self.expect(&Tok::FatArrow, "`=>` after the binder type")?;
                let body = self.term_bp(no, 0)?;
                Ok(Surface::Lam(x, Box::new(ty), Box::new(body)))
            }
            Tok::Pi => {
                self.bump();
                let x = self.ident("a binder name after `Pi`")?;
                self.expect(&Tok::Colon, "`:` after the binder")?;
                let ty = self.term_bp(no, 0)?;
                self.expect(&Tok::Dot, "`.` after the binder type")?;
                let body = self.term_bp(no, 0)?;
                Ok(Surface::Pi(x, Box::new(ty), Box::new(body)))
            }
            Tok::Op(s) => {
                let Some(cname) = no.prefix_sym.get(&s).cloned() else {
                    return self.err(format!("`{s}` is not a declared prefix operator"));
                };
                self.bump();
                let arg = self.prefix_term(no)?;
                Ok(Surface::app(Surface::ident(cname), arg))
            }
            _ => self.app_chain(no),
        }
    }

    fn app_chain(&mut self, no: &Notation) -> Result<Surface> {
        let mut f = self.atom(no)?;
        while Self::starts_atom(self.peek()) {
            let a = self.atom(no)?;
            f = Surface::app(f, a);
        }
        Ok(f)
    }

    fn atom(&mut self, no: &Notation) -> Result<Surface> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(Surface::Ident(s))
            }
            Tok::Underscore => {
                self.bump();
                Ok(Surface::Placeholder)
            }
            Tok::MetaName(s) => {
                self.bump();
                Ok(Surface::MetaRef(s))
            }
            Tok::TypeKw => {
                self.bump();
                Ok(Surface::Type)
            }
            Tok::UnitKw => {
                self.bump();
                Ok(Surface::Unit)
            }
            Tok::StarKw => {
                self.bump();
                Ok(Surface::Star)
            }
            Tok::LParen => {
                self.bump();
                let t = self.term_bp(no, 0)?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::LMk => {
                self.bump();
                let mut fields = Vec::new();
                if self.peek() != &Tok::RMk {
                    loop {
                        fields.push(self.term_bp(no, 0)?);
                        if self.peek() == &Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(&Tok::RMk, "`|>` closing the structure literal")?;
                Ok(Surface::MkLit(fields))
            }
            other => self.err(format!("expected a term, found {other:?}")),
        }
    }

    // ----- binder lists --------------------------------------------------

    /// A single parenthesized list `(x : T; y : U)`, possibly empty `()`.
    /// `;` and `,` both separate entries.
    fn binder_list(&mut self, no: &Notation) -> Result<Vec<(String, Surface)>> {
        self.expect(&Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                let x = self.ident("a binder name")?;
                self.expect(&Tok::Colon, "`:` after the binder name")?;
                let ty = self.term_bp(no, 0)?;
                out.push((x, ty));
                match self.peek() {
                    Tok::Semi | Tok::Comma => {
                        self.bump();
                        if self.peek() == &Tok::RParen {
                            break;
                        }
                    }
                    _ => break,
                }
            }
        }
        self.expect(&Tok::RParen, "`)` closing the binder list")?;
        Ok(out)
    }

    /// Zero or more `(x : T)` groups.
    fn binder_groups(&mut self, no: &Notation) -> Result<Vec<(String, Surface)>> {
        let mut out = Vec::new();
        while self.peek() == &Tok::LParen {
            let x = {
                self.bump();
                let x = self.ident("a binder name")?;
                self.expect(&Tok::Colon, "`:` after the binder name")?;
                x
            };
            let ty = self.term_bp(no, 0)?;
            self.expect(&Tok::RParen, "`)` closing the binder")?;
            out.push((x, ty));
        }
        Ok(out)
    }

    // ----- commands ------------------------------------------------------

    pub fn next_command(&mut self, no: &Notation) -> Result<Command> {
        let (line, col) = self.here();
        let kind = match self.peek().clone() {
            Tok::Def => {
                self.bump();
                let name = self.ident("a name after `def`")?;
                self.expect(&Tok::Colon, "`:`")?;
                let ty = self.term(no)?;
                self.expect(&Tok::Assign, "`:=`")?;
                let body = self.term(no)?;
                Cmd::Def { name, ty, body }
            }
            Tok::AxiomKw => {
                self.bump();
                let name = self.ident("a name after `axiom`")?;
                self.expect(&Tok::Colon, "`:`")?;
                let ty = self.term(no)?;
                Cmd::Axiom { name, ty }
            }
            Tok::StructureKw => {
                self.bump();
                let name = self.ident("a name after `structure`")?;
                let params = self.binder_groups(no)?;
                self.expect(&Tok::Assign, "`:=`")?;
                self.expect(&Tok::LBrace, "`{`")?;
                let mut fields = Vec::new();
                while self.peek() != &Tok::RBrace {
                    let kind = match self.bump() {
                        Tok::Field => FieldKind::Data,
                        Tok::Prop => FieldKind::Property,
                        other => {
                            return self
                                .err(format!("expected `field` or `prop`, found {other:?}"))
                        }
                    };
                    let fname = self.ident("a field name")?;
                    self.expect(&Tok::Colon, "`:`")?;
                    let fty = self.term(no)?;
                    self.expect(&Tok::Semi, "`;` after the field")?;
                    fields.push((kind, fname, fty));
                }
                self.expect(&Tok::RBrace, "`}`")?;
                Cmd::Structure {
                    name,
                    params,
                    fields,
                }
            }
            Tok::Coercion => {
                self.bump();
                let name = self.ident("a constant name after `coercion`")?;
                self.expect(&Tok::At, "`at`")?;
                let n = self.int("an argument index")?;
                if n < 1 {
                    return self.err("the coercion argument index must be at least 1");
                }
                Cmd::Coercion {
                    name,
                    arg_index: n as usize,
                }
            }
            Tok::Nonuniform => {
                self.bump();
                self.expect(&Tok::Coercion, "`coercion` after `nonuniform`")?;
                let context = self.binder_list(no)?;
                let st = self.term(no)?;
                let Surface::Arrow(source, target) = st else {
                    return self.err("expected `source -> target` (parenthesize an arrow source)");
                };
                self.expect(&Tok::Assign, "`:=`")?;
                let pattern = self.term(no)?;
                self.expect(&Tok::FatArrow, "`=>` between pattern and result")?;
                let result = self.term(no)?;
                let priority = if self.peek() == &Tok::Priority {
                    self.bump();
                    Some(self.int("a priority")?)
                } else {
                    None
                };
                Cmd::Nonuniform {
                    context,
                    source: *source,
                    target: *target,
                    pattern,
                    result,
                    priority,
                }
            }
            Tok::HintKw => {
                self.bump();
                let priority = if self.peek() == &Tok::Priority {
                    self.bump();
                    Some(self.int("a priority")?)
                } else {
                    None
                };
                let context = self.binder_list(no)?;
                self.expect(&Tok::Turnstile, "`|-`")?;
                self.expect(&Tok::LParen, "`(` opening the telescope")?;
                let mut telescope = Vec::new();
                while self.peek() != &Tok::RParen {
                    let x = self.ident("a telescope name")?;
                    self.expect(&Tok::Assign, "`:=`")?;
                    let def = self.term(no)?;
                    telescope.push((x, def));
                    if self.peek() == &Tok::Semi {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect(&Tok::RParen, "`)` closing the telescope")?;
                self.expect(&Tok::Colon, "`:`")?;
                let lhs = self.term(no)?;
                self.expect(&Tok::EqEq, "`==` between the pattern sides")?;
                let rhs = self.term(no)?;
                Cmd::Hint {
                    priority,
                    context,
                    telescope,
                    lhs,
                    rhs,
                }
            }
            Tok::Check => {
                self.bump();
                let term = self.term(no)?;
                self.expect(&Tok::Colon, "`:` before the expected type")?;
                let expected = self.term(no)?;
                Cmd::Check { term, expected }
            }
            Tok::Infer => {
                self.bump();
                let term = self.term(no)?;
                Cmd::Infer { term }
            }
            Tok::Conjecture => {
                self.bump();
                let name = self.ident("a name after `conjecture`")?;
                self.expect(&Tok::Colon, "`:`")?;
                let statement = self.term(no)?;
                Cmd::Conjecture { name, statement }
            }
            Tok::Rewrite => {
                self.bump();
                let dir = if self.peek() == &Tok::LArrow {
                    self.bump();
                    Direction::RL
                } else {
                    Direction::LR
                };
                let proof = self.term(no)?;
                self.expect(&Tok::In, "`in` before the goal name")?;
                let goal = self.ident("a goal name")?;
                let occurrence = if self.peek() == &Tok::At {
                    self.bump();
                    let n = self.int("an occurrence number")?;
                    if n < 1 {
                        return self.err("occurrence numbers start at 1");
                    }
                    n as usize
                } else {
                    1
                };
                Cmd::Rewrite {
                    proof,
                    goal,
                    dir,
                    occurrence,
                }
            }
            Tok::Expand => {
                self.bump();
                let name = self.ident("an instance name after `expand`")?;
                Cmd::Expand { name }
            }
            Tok::Dump => {
                self.bump();
                match self.bump() {
                    Tok::Ident(s) if s == "hints" => Cmd::DumpHints,
                    Tok::Ident(s) if s == "coercions" => Cmd::DumpCoercions,
                    other => {
                        return self
                            .err(format!("expected `hints` or `coercions`, found {other:?}"))
                    }
                }
            }
            Tok::Infix => {
                self.bump();
                let sym = self.string("an operator string")?;
                let name = self.ident("a constant name")?;
                let prec = self.int("a precedence")?;
                if prec < 0 {
                    return self.err("precedence must be nonnegative");
                }
                Cmd::InfixDecl {
                    sym,
                    name,
                    prec: prec as u32,
                }
            }
            Tok::Prefix => {
                self.bump();
                let sym = self.string("an operator string")?;
                let name = self.ident("a constant name")?;
                Cmd::PrefixDecl { sym, name }
            }
            Tok::Include => {
                self.bump();
                let path = self.string("a file path")?;
                Cmd::Include { path }
            }
            other => return self.err(format!("expected a command, found {other:?}")),
        };
        Ok(Command { line, col, kind })
    }

    /// Peek whether the next command is reachable (used by error recovery
    /// under --keep-going: skip tokens until something that starts a
    /// command).
    pub fn skip_to_command(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof
                | Tok::Def
                | Tok::AxiomKw
                | Tok::StructureKw
                | Tok::Coercion
                | Tok::Nonuniform
                | Tok::HintKw
                | Tok::Check
                | Tok::Infer
                | Tok::Conjecture
                | Tok::Rewrite
                | Tok::Expand
                | Tok::Dump
                | Tok::Infix
                | Tok::Prefix
                | Tok::Include => break,
                _ => {
                    self.bump();
                }
            }
        }
    }
}
