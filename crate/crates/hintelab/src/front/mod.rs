//! Surface language: lexer, parser, term rendering with user notations, and
//! sequential script replay.

pub mod lex;
pub mod parse;
pub mod render;
pub mod session;

pub use parse::{Cmd, Command, Parser};
pub use render::{render, render_named, Notation};
pub use session::{Flags, Session};
