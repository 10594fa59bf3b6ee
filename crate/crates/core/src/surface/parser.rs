//! Recursive-descent parser with scope resolution.
//!
//! Every binder receives a name distinct from all other binders and from
//! the declared free variables, so later phases never have to worry about
//! shadowing.

use std::collections::HashSet;

use super::lexer::{tokenize, Tok};
use super::{Pos, RegionDecl, SourceFile, SurfaceError, VarDecl};
use crate::syntax::{fresh_name, Effect, Name, Region, Term, Type, Var, Volatility};
use crate::usage::{Family, Mult};

const RESERVED: &[&str] = &["let", "in", "nu", "get", "set", "pset", "program", "region", "var"];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    /// Source name to resolved name, innermost last.
    scope: Vec<(String, Name)>,
    used: HashSet<Name>,
    /// Positions of store literals in source order.
    stores: Vec<Pos>,
    /// Binders introduced by `M ; N`, whose body comes after `M` in the
    /// source.
    seq_binders: HashSet<Name>,
}

type PResult<T> = Result<T, SurfaceError>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            toks: tokenize(src)?,
            at: 0,
            scope: Vec::new(),
            used: HashSet::new(),
            stores: Vec::new(),
            seq_binders: HashSet::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(SurfaceError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.next().1)
        } else {
            self.error(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Pos> {
        if self.is_kw(kw) {
            Ok(self.next().1)
        } else {
            self.error(format!("expected `{kw}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let p = self.next().1;
                Ok((s, p))
            }
            other => self.error(format!("expected an identifier, found {other}")),
        }
    }

    // ---- types ----

    fn ty(&mut self) -> PResult<Type> {
        let dom = self.ty_atom()?;
        match self.peek() {
            Tok::Lolli => {
                self.next();
                Ok(Type::lolli(dom, self.ty()?))
            }
            Tok::EffOpen => {
                self.next();
                let mut eff = Effect::empty();
                if *self.peek() != Tok::EffClose {
                    loop {
                        let (r, _) = self.ident()?;
                        eff.insert(Region::new(&r));
                        if *self.peek() == Tok::Comma {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::EffClose)?;
                Ok(Type::arrow(dom, eff, self.ty()?))
            }
            _ => Ok(dom),
        }
    }

    fn ty_atom(&mut self) -> PResult<Type> {
        match self.peek().clone() {
            Tok::One => {
                self.next();
                Ok(Type::One)
            }
            Tok::Bang => {
                self.next();
                Ok(Type::bang(self.ty_atom()?))
            }
            Tok::LParen => {
                self.next();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) if s == "B" => {
                self.next();
                Ok(Type::Behaviour)
            }
            Tok::Ident(s) if s == "Reg" => {
                self.next();
                let (r, _) = self.ident()?;
                Ok(Type::reg(Region::new(&r), self.ty_atom()?))
            }
            other => self.error(format!("expected a type, found {other}")),
        }
    }

    // ---- binding ----

    fn lookup(&self, s: &str, pos: Pos) -> PResult<Name> {
        self.scope
            .iter()
            .rev()
            .find(|(src, _)| src == s)
            .map(|(_, n)| n.clone())
            .ok_or_else(|| SurfaceError::Unresolved { pos, name: s.to_string() })
    }

    fn bind(&mut self, s: &str) -> Name {
        let name = fresh_name(&Name::new(s), |n| self.used.contains(n));
        self.used.insert(name.clone());
        self.scope.push((s.to_string(), name.clone()));
        name
    }

    fn address(&mut self) -> PResult<Var> {
        let (s, pos) = self.ident()?;
        Ok(Var::new(self.lookup(&s, pos)?))
    }

    // ---- terms ----

    fn par(&mut self) -> PResult<Term> {
        let left = self.seq()?;
        if *self.peek() == Tok::Bar {
            self.next();
            Ok(Term::par(left, self.par()?))
        } else {
            Ok(left)
        }
    }

    fn seq(&mut self) -> PResult<Term> {
        let first = self.app()?;
        if *self.peek() == Tok::Semi {
            self.next();
            let then = self.seq()?;
            let z = fresh_name(&Name::new("z"), |n| self.used.contains(n));
            self.used.insert(z.clone());
            self.seq_binders.insert(z.clone());
            Ok(Term::app(Term::Lam { param: z, ty: Type::One, body: Box::new(then) }, first))
        } else {
            Ok(first)
        }
    }

    fn starts_operand(&self) -> bool {
        match self.peek() {
            Tok::Star | Tok::Bang | Tok::LParen | Tok::LBrack | Tok::Backslash => true,
            Tok::Ident(s) => !matches!(s.as_str(), "in" | "program" | "region" | "var"),
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<Term> {
        let mut t = self.prefix()?;
        while self.starts_operand() {
            let binder = self.is_binder_start();
            let arg = self.prefix()?;
            t = Term::app(t, arg);
            if binder {
                // a binder extends to the right, nothing can follow it
                break;
            }
        }
        Ok(t)
    }

    fn is_binder_start(&self) -> bool {
        *self.peek() == Tok::Backslash || self.is_kw("let") || self.is_kw("nu")
    }

    fn prefix(&mut self) -> PResult<Term> {
        if *self.peek() == Tok::Bang {
            self.next();
            return Ok(Term::bang(self.prefix()?));
        }
        self.atom()
    }

    fn value(&mut self) -> PResult<Term> {
        let pos = self.pos();
        let v = self.par()?;
        if v.is_value() {
            Ok(v)
        } else {
            Err(SurfaceError::Syntax { pos, msg: format!("expected a value, found `{v}`") })
        }
    }

    fn atom(&mut self) -> PResult<Term> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Star => {
                self.next();
                Ok(Term::Unit)
            }
            Tok::LParen => {
                self.next();
                let t = self.par()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBrack => {
                self.next();
                self.stores.push(pos);
                let addr = self.address()?;
                let mode = match self.next() {
                    (Tok::VolArrow, _) => Volatility::Volatile,
                    (Tok::PerArrow, _) => Volatility::Persistent,
                    (other, p) => {
                        return Err(SurfaceError::Syntax { pos: p, msg: format!("expected `<-` or `<=`, found {other}") })
                    }
                };
                let value = self.value()?;
                self.expect(Tok::RBrack)?;
                Ok(Term::Store { addr, mode, value: Box::new(value) })
            }
            Tok::Backslash => {
                self.next();
                let (x, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                self.expect(Tok::Dot)?;
                let param = self.bind(&x);
                let body = self.par()?;
                self.scope.pop();
                Ok(Term::Lam { param, ty, body: Box::new(body) })
            }
            Tok::Ident(kw) if kw == "let" => {
                self.next();
                self.expect(Tok::Bang)?;
                let (x, _) = self.ident()?;
                self.expect(Tok::Eq)?;
                let bound = self.par()?;
                self.expect_kw("in")?;
                let name = self.bind(&x);
                let body = self.par()?;
                self.scope.pop();
                Ok(Term::LetBang { name, bound: Box::new(bound), body: Box::new(body) })
            }
            Tok::Ident(kw) if kw == "nu" => {
                self.next();
                let (x, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let tpos = self.pos();
                let ty = self.ty()?;
                let Type::Reg(region, content) = ty else {
                    return Err(SurfaceError::Syntax { pos: tpos, msg: format!("restriction needs a region type, found `{ty}`") });
                };
                self.expect(Tok::Dot)?;
                let name = self.bind(&x);
                let body = self.par()?;
                self.scope.pop();
                Ok(Term::Nu { name, region, content: *content, body: Box::new(body) })
            }
            Tok::Ident(kw) if kw == "get" => {
                self.next();
                self.expect(Tok::LParen)?;
                let addr = self.address()?;
                self.expect(Tok::RParen)?;
                Ok(Term::Get(addr))
            }
            Tok::Ident(kw) if kw == "set" || kw == "pset" => {
                self.next();
                let mode = if kw == "set" { Volatility::Volatile } else { Volatility::Persistent };
                self.expect(Tok::LParen)?;
                let addr = self.address()?;
                self.expect(Tok::Comma)?;
                let value = self.value()?;
                self.expect(Tok::RParen)?;
                Ok(Term::Set { addr, mode, value: Box::new(value) })
            }
            Tok::Ident(_) => {
                let (s, p) = self.ident()?;
                Ok(Term::Var(Var::new(self.lookup(&s, p)?)))
            }
            other => self.error(format!("expected a term, found {other}")),
        }
    }

    // ---- files ----

    fn file(&mut self) -> PResult<SourceFile> {
        let mut regions: Vec<RegionDecl> = Vec::new();
        let mut vars: Vec<VarDecl> = Vec::new();
        loop {
            if self.is_kw("region") {
                self.next();
                let (name, pos) = self.ident()?;
                if regions.iter().any(|r| r.name.as_str() == name) {
                    return Err(SurfaceError::Duplicate { pos, name });
                }
                let volatility = match self.next() {
                    (Tok::Ident(s), _) if s == "volatile" => Volatility::Volatile,
                    (Tok::Ident(s), _) if s == "persistent" => Volatility::Persistent,
                    (other, p) => {
                        return Err(SurfaceError::Syntax {
                            pos: p,
                            msg: format!("expected `volatile` or `persistent`, found {other}"),
                        })
                    }
                };
                self.expect(Tok::Colon)?;
                let content = self.ty()?;
                if volatility == Volatility::Persistent && !matches!(content, Type::Bang(_)) {
                    return Err(SurfaceError::NonBangPersistent { pos, region: name });
                }
                self.expect_kw("family")?;
                let family = match self.next() {
                    (Tok::Ident(s), _) if s == "aff" => Family::Aff,
                    (Tok::Ident(s), _) if s == "wo" => Family::Wo,
                    (Tok::Ident(s), _) if s == "exp" => Family::Exp,
                    (other, p) => {
                        return Err(SurfaceError::Syntax {
                            pos: p,
                            msg: format!("expected `aff`, `wo` or `exp`, found {other}"),
                        })
                    }
                };
                regions.push(RegionDecl { name: Region::new(&name), volatility, content, family });
            } else if self.is_kw("var") {
                self.next();
                let (name, pos) = self.ident()?;
                if vars.iter().any(|v| v.name.as_str() == name) {
                    return Err(SurfaceError::Duplicate { pos, name });
                }
                self.expect(Tok::Colon)?;
                self.expect(Tok::LParen)?;
                let usage = match self.next() {
                    (Tok::One, _) => Mult::One,
                    (Tok::Ident(s), _) if s == "inf" => Mult::Inf,
                    (other, p) => {
                        return Err(SurfaceError::Syntax { pos: p, msg: format!("expected `1` or `inf`, found {other}") })
                    }
                };
                self.expect(Tok::Comma)?;
                let ty = self.ty()?;
                self.expect(Tok::RParen)?;
                let n = Name::new(&name);
                self.used.insert(n.clone());
                self.scope.push((name, n.clone()));
                vars.push(VarDecl { name: n, usage, ty });
            } else {
                break;
            }
        }
        self.expect_kw("program")?;
        let program = self.par()?;
        if *self.peek() != Tok::Eof {
            return self.error(format!("unexpected {} after the program", self.peek()));
        }
        self.check_static(&program)?;
        Ok(SourceFile { regions, vars, program })
    }

    /// Stores may only sit under `|` and `nu`. Stores are visited in
    /// source order, so the n-th store seen is the n-th one parsed.
    fn check_static(&self, program: &Term) -> PResult<()> {
        let mut index = 0usize;
        let mut bad = None;
        let seq = &self.seq_binders;
        fn walk(t: &Term, is_static: bool, index: &mut usize, bad: &mut Option<usize>, seq: &HashSet<Name>) {
            match t {
                Term::Par(a, b) => {
                    walk(a, is_static, index, bad, seq);
                    walk(b, is_static, index, bad, seq);
                }
                Term::Nu { body, .. } => walk(body, is_static, index, bad, seq),
                Term::Store { value, .. } => {
                    if !is_static && bad.is_none() {
                        *bad = Some(*index);
                    }
                    *index += 1;
                    walk(value, false, index, bad, seq);
                }
                other => {
                    let mut children: Vec<&Term> = Vec::new();
                    match other {
                        Term::Lam { body, .. } | Term::Bang(body) => children.push(body),
                        Term::App(f, m) => match &**f {
                            Term::Lam { param, body, .. } if seq.contains(param) => children.extend([&**m, &**body]),
                            _ => children.extend([&**f, &**m]),
                        },
                        Term::LetBang { bound, body, .. } => children.extend([&**bound, &**body]),
                        Term::Set { value, .. } => children.push(value),
                        _ => {}
                    }
                    for c in children {
                        walk(c, false, index, bad, seq);
                    }
                }
            }
        }
        walk(program, true, &mut index, &mut bad, seq);
        match bad {
            Some(i) => Err(SurfaceError::StoreNotStatic { pos: self.stores[i] }),
            None => Ok(()),
        }
    }
}

/// Parses a complete `.aic` file.
pub fn parse(src: &str) -> Result<SourceFile, SurfaceError> {
    Parser::new(src)?.file()
}

/// Parses a single term whose free identifiers are taken as given.
pub fn parse_term(src: &str, free: &[&str]) -> Result<Term, SurfaceError> {
    let mut p = Parser::new(src)?;
    for f in free {
        let n = Name::new(f);
        p.used.insert(n.clone());
        p.scope.push((f.to_string(), n));
    }
    let t = p.par()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {}", p.peek()));
    }
    p.check_static(&t)?;
    Ok(t)
}

pub fn parse_type(src: &str) -> Result<Type, SurfaceError> {
    let mut p = Parser::new(src)?;
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {}", p.peek()));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn types_round_trip_through_display() {
        for s in ["1", "B", "!Reg r 1 -o B", "(1 -o 1) -o 1 -o 1", "!(1 -{r,s}> 1)", "Reg r !(1 -{r}> 1)"] {
            assert_eq!(parse_type(s).unwrap().to_string(), s);
        }
        assert_eq!(parse_type("1 -{}> 1").unwrap(), Type::lolli(Type::One, Type::One));
    }

    #[test]
    fn application_is_left_associative() {
        let t = parse_term("f x y", &["f", "x", "y"]).unwrap();
        assert_eq!(t, Term::app(Term::app(Term::var("f"), Term::var("x")), Term::var("y")));
    }

    #[test]
    fn binder_as_last_argument() {
        let t = parse_term("f \\x:1. x", &["f"]).unwrap();
        assert_eq!(t, Term::app(Term::var("f"), Term::lam("x", Type::One, Term::var("x"))));
    }

    #[test]
    fn shadowing_is_renamed() {
        let t = parse_term("\\x:1. \\x:1. x", &[]).unwrap();
        assert_eq!(t, Term::lam("x", Type::One, Term::lam("x_1", Type::One, Term::var("x_1"))));
    }

    #[test]
    fn sequence_binds_loosest_but_par() {
        let t = parse_term("a ; b | c", &["a", "b", "c"]).unwrap();
        assert!(matches!(t, Term::Par(..)));
    }

    #[test]
    fn reserved_words_are_not_identifiers() {
        assert!(parse_term("\\in:1. *", &[]).is_err());
    }
}
