//! Shared tokenizer for terms, metaterms and signature files.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Semi,
    Colon,
    Eq,
    Star,
    Bang,
    At,
    Squig,
    Arrow,
    Assign,
}

impl Tok {
    fn show(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Star => "`*`".into(),
            Tok::Bang => "`!`".into(),
            Tok::At => "`@`".into(),
            Tok::Squig => "`~>`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::Assign => "`:=`".into(),
        }
    }
}

pub(crate) struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '-'
}

impl Lexer {
    pub(crate) fn new(text: &str) -> Result<Lexer> {
        let mut toks = Vec::new();
        let (mut line, mut col) = (1usize, 1usize);
        let mut chars = text.chars().peekable();
        while let Some(&c) = chars.peek() {
            let (l0, c0) = (line, col);
            let mut bump = |chars: &mut core::iter::Peekable<core::str::Chars<'_>>| {
                let c = chars.next();
                if c == Some('\n') {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                c
            };
            if c.is_whitespace() {
                bump(&mut chars);
                continue;
            }
            if c == '#' {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
                continue;
            }
            let tok = if ident_start(c) {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if !ident_continue(c) {
                        break;
                    }
                    s.push(c);
                    bump(&mut chars);
                }
                Tok::Ident(s)
            } else if c.is_ascii_digit() {
                let mut n = 0usize;
                while let Some(&c) = chars.peek() {
                    let Some(d) = c.to_digit(10) else { break };
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(d as usize))
                        .ok_or(Error::Syntax { line: l0, col: c0, msg: "number too large".into() })?;
                    bump(&mut chars);
                }
                Tok::Num(n)
            } else {
                bump(&mut chars);
                let two = |chars: &mut core::iter::Peekable<core::str::Chars<'_>>, want: char| {
                    chars.peek() == Some(&want)
                };
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    ';' => Tok::Semi,
                    '*' => Tok::Star,
                    '!' => Tok::Bang,
                    '@' => Tok::At,
                    ':' if two(&mut chars, '=') => {
                        bump(&mut chars);
                        Tok::Assign
                    }
                    ':' => Tok::Colon,
                    '=' if two(&mut chars, '>') => {
                        bump(&mut chars);
                        Tok::Arrow
                    }
                    '=' => Tok::Eq,
                    '~' if two(&mut chars, '>') => {
                        bump(&mut chars);
                        Tok::Squig
                    }
                    other => {
                        return Err(Error::Syntax {
                            line: l0,
                            col: c0,
                            msg: format!("unexpected character `{other}`"),
                        })
                    }
                }
            };
            toks.push((tok, l0, c0));
        }
        Ok(Lexer { toks, pos: 0, end: (line, col) })
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.peek_at(0)
    }

    pub(crate) fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn error(&self, msg: String) -> Error {
        let (line, col) = self
            .toks
            .get(self.pos)
            .map(|t| (t.1, t.2))
            .unwrap_or(self.end);
        Error::Syntax { line, col, msg }
    }

    pub(crate) fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, t: &Tok) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(&t.show()))
        }
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> Error {
        let found = match self.peek() {
            Some(t) => t.show(),
            None => "end of input".to_string(),
        };
        self.error(format!("expected {wanted}, found {found}"))
    }

    pub(crate) fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub(crate) fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn num(&mut self) -> Result<usize> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    pub(crate) fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    /// Finds an `@ n` annotation before the next `;` or closing `}` at
    /// nesting depth 0, without consuming anything.
    pub(crate) fn lookahead_level(&self) -> Option<usize> {
        let mut depth = 0usize;
        let mut k = 0;
        while let Some(t) = self.peek_at(k) {
            match t {
                Tok::LParen | Tok::LBrack | Tok::LBrace => depth += 1,
                Tok::RParen | Tok::RBrack => depth = depth.saturating_sub(1),
                Tok::RBrace if depth == 0 => return None,
                Tok::RBrace => depth -= 1,
                Tok::Semi if depth == 0 => return None,
                Tok::At if depth == 0 => {
                    return match self.peek_at(k + 1) {
                        Some(Tok::Num(n)) => Some(*n),
                        _ => None,
                    }
                }
                _ => {}
            }
            k += 1;
        }
        None
    }

    /// Consumes `name+ .` if present.
    pub(crate) fn binder_names(&mut self) -> Result<Vec<String>> {
        let mut k = 0;
        while let Some(Tok::Ident(_)) = self.peek_at(k) {
            k += 1;
        }
        if k == 0 || self.peek_at(k) != Some(&Tok::Dot) {
            return Ok(Vec::new());
        }
        let mut names = Vec::with_capacity(k);
        for _ in 0..k {
            names.push(self.ident()?);
        }
        self.expect(&Tok::Dot)?;
        Ok(names)
    }
}
