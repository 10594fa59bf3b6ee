//! Tokenizer for `.aic` files.

use std::fmt;

use super::{Pos, SurfaceError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    One,
    Star,
    Backslash,
    Colon,
    Dot,
    Bang,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Bar,
    Semi,
    Eq,
    /// `<-`
    VolArrow,
    /// `<=`
    PerArrow,
    /// `-o`
    Lolli,
    /// `-{`
    EffOpen,
    /// `}>`
    EffClose,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::One => "`1`",
            Tok::Star => "`*`",
            Tok::Backslash => "`\\`",
            Tok::Colon => "`:`",
            Tok::Dot => "`.`",
            Tok::Bang => "`!`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::Comma => "`,`",
            Tok::Bar => "`|`",
            Tok::Semi => "`;`",
            Tok::Eq => "`=`",
            Tok::VolArrow => "`<-`",
            Tok::PerArrow => "`<=`",
            Tok::Lolli => "`-o`",
            Tok::EffOpen => "`-{`",
            Tok::EffClose => "`}>`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, SurfaceError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let two = |tok: Tok| (tok, 2);
        let (tok, len) = match c {
            '*' => (Tok::Star, 1),
            '\\' => (Tok::Backslash, 1),
            ':' => (Tok::Colon, 1),
            '.' => (Tok::Dot, 1),
            '!' => (Tok::Bang, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBrack, 1),
            ']' => (Tok::RBrack, 1),
            ',' => (Tok::Comma, 1),
            '|' => (Tok::Bar, 1),
            ';' => (Tok::Semi, 1),
            '=' => (Tok::Eq, 1),
            '<' if next == Some('-') => two(Tok::VolArrow),
            '<' if next == Some('=') => two(Tok::PerArrow),
            '-' if next == Some('o') && !chars.get(i + 2).copied().is_some_and(is_ident_char) => two(Tok::Lolli),
            '-' if next == Some('{') => two(Tok::EffOpen),
            '}' if next == Some('>') => two(Tok::EffClose),
            '1' if !next.is_some_and(|d| d.is_ascii_alphanumeric()) => (Tok::One, 1),
            c if is_ident_start(c) => {
                let start = i;
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let s: String = chars[start..j].iter().collect();
                let len = j - start;
                (Tok::Ident(s), len)
            }
            other => return Err(SurfaceError::Syntax { pos, msg: format!("unexpected character `{other}`") }),
        };
        for _ in 0..len {
            bump!();
        }
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
