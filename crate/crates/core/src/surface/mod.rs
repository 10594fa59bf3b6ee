//! Concrete syntax of `.aic` program files.
//!
//! ```text
//! region r volatile : 1 family aff
//! var y : (inf, Reg r 1)
//! program (\x:!Reg r 1. let !x = x in (get(x) | set(x, *))) !y
//! ```

mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::syntax::{print::term_to_string, Name, Region, Term, Type, Volatility};
use crate::usage::{Family, Mult};

pub use parser::{parse, parse_term, parse_type};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("{pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: unresolved identifier `{name}`")]
    Unresolved { pos: Pos, name: String },
    #[error("{pos}: duplicate declaration of `{name}`")]
    Duplicate { pos: Pos, name: String },
    #[error("{pos}: persistent region `{region}` must hold a type of the form !A")]
    NonBangPersistent { pos: Pos, region: String },
    #[error("{pos}: store in non-static position")]
    StoreNotStatic { pos: Pos },
}

impl SurfaceError {
    pub fn pos(&self) -> Option<Pos> {
        match self {
            SurfaceError::Syntax { pos, .. }
            | SurfaceError::Unresolved { pos, .. }
            | SurfaceError::Duplicate { pos, .. }
            | SurfaceError::NonBangPersistent { pos, .. }
            | SurfaceError::StoreNotStatic { pos } => Some(*pos),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionDecl {
    pub name: Region,
    pub volatility: Volatility,
    pub content: Type,
    pub family: Family,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: Name,
    pub usage: Mult,
    pub ty: Type,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFile {
    pub regions: Vec<RegionDecl>,
    pub vars: Vec<VarDecl>,
    pub program: Term,
}

impl SourceFile {
    pub fn new(program: Term) -> Self {
        SourceFile { regions: Vec::new(), vars: Vec::new(), program }
    }

    pub fn region(&self, r: &Region) -> Option<&RegionDecl> {
        self.regions.iter().find(|d| &d.name == r)
    }

    pub fn var(&self, x: &Name) -> Option<&VarDecl> {
        self.vars.iter().find(|d| &d.name == x)
    }

    /// Same preamble, different program.
    pub fn with_program(&self, program: Term) -> SourceFile {
        SourceFile { regions: self.regions.clone(), vars: self.vars.clone(), program }
    }
}

/// Renders a file in the concrete syntax accepted by [`parse`].
pub fn print(f: &SourceFile) -> String {
    let mut out = String::new();
    for r in &f.regions {
        out.push_str(&format!("region {} {} : {} family {}\n", r.name, r.volatility, r.content, r.family));
    }
    for v in &f.vars {
        out.push_str(&format!("var {} : ({}, {})\n", v.name, v.usage, v.ty));
    }
    out.push_str("program ");
    out.push_str(&term_to_string(&f.program));
    out.push('\n');
    out
}

impl fmt::Display for SourceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_eq, struct_equiv};

    const EXAMPLE1: &str = "region r volatile : 1 family aff\nprogram \\x:!Reg r 1. let !x = x in (get(x) | set(x, *))\n";

    #[test]
    fn unit_program() {
        let f = parse("program *").unwrap();
        assert!(f.regions.is_empty() && f.vars.is_empty());
        assert_eq!(f.program, Term::Unit);
        assert_eq!(print(&f), "program *\n");
    }

    #[test]
    fn example_one_shape() {
        let f = parse(EXAMPLE1).unwrap();
        let Term::Lam { body, .. } = &f.program else { panic!("expected a lambda") };
        let Term::LetBang { body, .. } = &**body else { panic!("expected let!") };
        assert!(matches!(&**body, Term::Par(a, b)
            if matches!(**a, Term::Get(_)) && matches!(**b, Term::Set { mode: Volatility::Volatile, .. })));
    }

    #[test]
    fn binders_are_renamed_apart() {
        let f = parse(EXAMPLE1).unwrap();
        let mut names = std::collections::HashSet::new();
        f.program.collect_names(&mut names);
        assert_eq!(names.len(), 2);
    }

    #[test]
    fn unresolved_identifier() {
        let e = parse("program get(x)").unwrap_err();
        assert!(matches!(e, SurfaceError::Unresolved { ref name, .. } if name == "x"));
        assert_eq!(e.pos(), Some(Pos { line: 1, col: 13 }));
    }

    #[test]
    fn duplicates_and_persistent_contents() {
        let e = parse("region r volatile : 1 family aff\nregion r volatile : 1 family aff\nprogram *").unwrap_err();
        assert!(matches!(e, SurfaceError::Duplicate { .. }));
        let e = parse("region r persistent : 1 family wo\nprogram *").unwrap_err();
        assert!(matches!(e, SurfaceError::NonBangPersistent { .. }));
    }

    #[test]
    fn stores_must_be_static() {
        let src = "var y : (inf, Reg r 1)\nregion r volatile : 1 family aff\nprogram (\\z:B. z) [y <- *]";
        assert!(parse(src).is_err());
        let src = "region r volatile : 1 family aff\nvar y : (inf, Reg r 1)\nprogram (\\z:B. z) [y <- *]";
        assert!(matches!(parse(src).unwrap_err(), SurfaceError::StoreNotStatic { .. }));
        let ok = "region r volatile : 1 family aff\nprogram nu x : Reg r 1. (get(x) | ([x <- *] | *))";
        assert!(parse(ok).is_ok());
    }

    #[test]
    fn set_requires_a_value() {
        let src = "region r volatile : 1 family aff\nvar y : (inf, Reg r 1)\nprogram set(y, get(y))";
        assert!(matches!(parse(src).unwrap_err(), SurfaceError::Syntax { .. }));
    }

    #[test]
    fn sequence_sugar_and_round_trip() {
        let src = "region r persistent : !(1 -{r}> 1) family wo\n\
                   program nu x : Reg r !(1 -{r}> 1). pset(x, !(\\y:1. let !f = get(x) in f y)) ; let !f = get(x) in f *";
        let f = parse(src).unwrap();
        let printed = print(&f);
        let again = parse(&printed).unwrap();
        assert!(alpha_eq(&f.program, &again.program), "{printed}");
        assert_eq!(print(&again), printed);
    }

    #[test]
    fn par_association_round_trips() {
        let f = parse("program (* | *) | (\\x:1. x) *").unwrap();
        assert_eq!(print(&f), "program (* | *) | (\\x:1. x) *\n");
        let g = parse(&print(&f)).unwrap();
        assert!(struct_equiv(&f.program, &g.program).unwrap());
    }

    #[test]
    fn parse_errors_have_positions() {
        let e = parse("program (\\x:1. x").unwrap_err();
        assert!(e.pos().is_some());
        assert!(e.to_string().starts_with("1:"));
    }
}
