//! Tokenizer for the script language. ASCII-first; a few unicode aliases
//! (→, ⋆, 𝟙, Π, λ) are accepted on input.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    /// `?name`
    MetaName(String),
    // keywords
    Def,
    AxiomKw,
    StructureKw,
    Field,
    Prop,
    Coercion,
    Nonuniform,
    HintKw,
    Check,
    Infer,
    Conjecture,
    Rewrite,
    Expand,
    At,
    In,
    Priority,
    Dump,
    Infix,
    Prefix,
    Include,
    Fun,
    Pi,
    TypeKw,
    UnitKw,
    StarKw,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    LMk,
    RMk,
    Colon,
    Semi,
    Comma,
    Dot,
    Underscore,
    Arrow,
    FatArrow,
    Assign,
    EqEq,
    Turnstile,
    LArrow,
    /// Any other operator-character run; meaning is assigned by `infix` /
    /// `prefix` declarations.
    Op(String),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "def" => Tok::Def,
        "axiom" => Tok::AxiomKw,
        "structure" => Tok::StructureKw,
        "field" => Tok::Field,
        "prop" => Tok::Prop,
        "coercion" => Tok::Coercion,
        "nonuniform" => Tok::Nonuniform,
        "hint" => Tok::HintKw,
        "check" => Tok::Check,
        "infer" => Tok::Infer,
        "conjecture" => Tok::Conjecture,
        "rewrite" => Tok::Rewrite,
        "expand" => Tok::Expand,
        "at" => Tok::At,
        "in" => Tok::In,
        "priority" => Tok::Priority,
        "dump" => Tok::Dump,
        "infix" => Tok::Infix,
        "prefix" => Tok::Prefix,
        "include" => Tok::Include,
        "fun" => Tok::Fun,
        "Pi" => Tok::Pi,
        "Type" => Tok::TypeKw,
        "Unit" => Tok::UnitKw,
        "star" => Tok::StarKw,
        _ => return None,
    })
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_cont(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

const OP_CHARS: &str = "+-*/=<>@$%^&~|!";

pub fn lex(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let n = chars.len();
    let mut i = 0;
    let mut line = 1usize;
    let mut col = 1usize;
    macro_rules! push {
        ($tok:expr, $l:expr, $c:expr) => {
            out.push(Token {
                tok: $tok,
                line: $l,
                col: $c,
            })
        };
    }
    while i < n {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let adv = |i: &mut usize, line: &mut usize, col: &mut usize, k: usize| {
            for j in 0..k {
                if chars[*i + j] == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
            }
            *i += k;
        };
        if c.is_whitespace() {
            adv(&mut i, &mut line, &mut col, 1);
            continue;
        }
        // line comments
        if c == '-' && i + 1 < n && chars[i + 1] == '-' {
            while i < n && chars[i] != '\n' {
                adv(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        match c {
            '(' => {
                push!(Tok::LParen, l0, c0);
                adv(&mut i, &mut line, &mut col, 1);
            }
            ')' => {
                push!(Tok::RParen, l0, c0);
                adv(&mut i, &mut line, &mut col, 1);
            }
            '{' => {
                push!(Tok::LBrace, l0, c0);
                adv(&mut i, &mut line, &mut col, 1);
            }
            '}' => {
                push!(Tok::RBrace, l0, c0);
                adv(&mut i, &mut line, &mut col, 1);
            }
            ';' => {
                push!(Tok::Semi, l0, c0);
                adv(&mut i, &mut line, &mut col, 1);
            }
            ',' => {
                push!(Tok::Comma, l0, c0);
                adv(&mut i, &mut line, &mut col, 1);
            }
            '.' => {
                push!(Tok::Dot, l0, c0);
                adv(&mut i, &mut line, &mut col, 1);
            }
            ':' => {
                if i + 1 < n && chars[i + 1] == '=' {
                    push!(Tok::Assign, l0, c0);
                    adv(&mut i, &mut line, &mut col, 2);
                } else {
                    push!(Tok::Colon, l0, c0);
                    adv(&mut i, &mut line, &mut col, 1);
                }
            }
            '?' => {
                adv(&mut i, &mut line, &mut col, 1);
                let start = i;
                while i < n && is_ident_cont(chars[i]) {
                    adv(&mut i, &mut line, &mut col, 1);
                }
                if start == i {
                    return Err(Error::Syntax {
                        line: l0,
                        col: c0,
                        msg: "`?` must be followed by a metavariable name".into(),
                    });
                }
                push!(Tok::MetaName(chars[start..i].iter().collect()), l0, c0);
            }
            '"' => {
                adv(&mut i, &mut line, &mut col, 1);
                let start = i;
                while i < n && chars[i] != '"' {
                    adv(&mut i, &mut line, &mut col, 1);
                }
                if i == n {
                    return Err(Error::Syntax {
                        line: l0,
                        col: c0,
                        msg: "unterminated string literal".into(),
                    });
                }
                push!(Tok::Str(chars[start..i].iter().collect()), l0, c0);
                adv(&mut i, &mut line, &mut col, 1);
            }
            '→' => {
                push!(Tok::Arrow, l0, c0);
                adv(&mut i, &mut line, &mut col, 1);
            }
            '⋆' => {
                push!(Tok::StarKw, l0, c0);
                adv(&mut i, &mut line, &mut col, 1);
            }
            '𝟙' => {
                push!(Tok::UnitKw, l0, c0);
                adv(&mut i, &mut line, &mut col, 1);
            }
            'Π' => {
                push!(Tok::Pi, l0, c0);
                adv(&mut i, &mut line, &mut col, 1);
            }
            'λ' => {
                push!(Tok::Fun, l0, c0);
                adv(&mut i, &mut line, &mut col, 1);
            }
            _ if c.is_ascii_digit() => {
                let start = i;
                while i < n && chars[i].is_ascii_digit() {
                    adv(&mut i, &mut line, &mut col, 1);
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse::<i64>().map_err(|_| Error::Syntax {
                    line: l0,
                    col: c0,
                    msg: format!("integer literal `{s}` out of range"),
                })?;
                push!(Tok::Int(v), l0, c0);
            }
            _ if is_ident_start(c) => {
                let start = i;
                while i < n && is_ident_cont(chars[i]) {
                    adv(&mut i, &mut line, &mut col, 1);
                }
                let s: String = chars[start..i].iter().collect();
                if s == "_" {
                    push!(Tok::Underscore, l0, c0);
                } else if let Some(kw) = keyword(&s) {
                    push!(kw, l0, c0);
                } else {
                    push!(Tok::Ident(s), l0, c0);
                }
            }
            _ if OP_CHARS.contains(c) => {
                let start = i;
                while i < n && OP_CHARS.contains(chars[i]) {
                    adv(&mut i, &mut line, &mut col, 1);
                }
                let s: String = chars[start..i].iter().collect();
                let tok = match s.as_str() {
                    "->" => Tok::Arrow,
                    "=>" => Tok::FatArrow,
                    "==" => Tok::EqEq,
                    "|-" => Tok::Turnstile,
                    "<-" => Tok::LArrow,
                    "<|" => Tok::LMk,
                    "|>" => Tok::RMk,
                    _ => Tok::Op(s),
                };
                push!(tok, l0, c0);
            }
            _ => {
                return Err(Error::Syntax {
                    line: l0,
                    col: c0,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lexes_a_def() {
        let t = toks("def id : Pi A:Type. A -> A := fun A:Type => fun a:A => a");
        assert_eq!(t[0], Tok::Def);
        assert_eq!(t[1], Tok::Ident("id".into()));
        assert!(t.contains(&Tok::Arrow));
        assert!(t.contains(&Tok::Assign));
        assert!(t.contains(&Tok::FatArrow));
        assert_eq!(*t.last().unwrap(), Tok::Eof);
    }

    #[test]
    fn operator_runs_and_reserved_sequences() {
        assert_eq!(
            toks("a + -(b)")[1..4],
            [Tok::Op("+".into()), Tok::Op("-".into()), Tok::LParen]
        );
        assert_eq!(toks("<| x |>")[0], Tok::LMk);
        assert_eq!(toks("<| x |>")[2], Tok::RMk);
        assert_eq!(toks("P == Q")[1], Tok::EqEq);
        assert_eq!(toks("|- x")[0], Tok::Turnstile);
        assert_eq!(toks("rewrite <- h")[1], Tok::LArrow);
    }

    #[test]
    fn comments_and_positions() {
        let ts = lex("ax -- trailing words\n  foo").unwrap();
        assert_eq!(ts[1].tok, Tok::Ident("foo".into()));
        assert_eq!((ts[1].line, ts[1].col), (2, 3));
    }

    #[test]
    fn metavariable_names() {
        assert_eq!(toks("?g")[0], Tok::MetaName("g".into()));
        assert!(lex("? g").is_err());
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!(toks("A → B")[1], Tok::Arrow);
        assert_eq!(toks("⋆")[0], Tok::StarKw);
    }
}
