//! Erasure of `!`, usages and restriction.

use std::fmt;

use crate::surface::SourceFile;
use crate::syntax::{Name, Region, Term, Type, Var};

use super::{IType, ITerm, TranslationError};

pub fn forget_type(a: &Type) -> IType {
    match a {
        Type::One => IType::Unit1,
        Type::Behaviour => IType::Behaviour,
        Type::Bang(a) => forget_type(a),
        Type::Reg(r, a) => IType::region_ref(r.clone(), forget_type(a)),
        Type::Arrow(a, e, b) => IType::arrow(forget_type(a), e.clone(), forget_type(b)),
    }
}

fn constant(v: &Var) -> Result<ITerm, TranslationError> {
    v.region.clone().map(ITerm::RegionConst).ok_or_else(|| TranslationError::Undecorated(v.name.clone()))
}

/// Translates a decorated term. Decorated occurrences become region
/// constants; every address position must be decorated.
pub fn forget_term(p: &Term) -> Result<ITerm, TranslationError> {
    Ok(match p {
        Term::Unit => ITerm::Unit,
        Term::Var(v) => match &v.region {
            Some(r) => ITerm::RegionConst(r.clone()),
            None => ITerm::Var(v.name.clone()),
        },
        Term::Lam { param, ty, body } => ITerm::lam(param.clone(), Some(forget_type(ty)), forget_term(body)?),
        Term::App(f, a) => ITerm::app(forget_term(f)?, forget_term(a)?),
        Term::Bang(m) => forget_term(m)?,
        Term::LetBang { name, bound, body } => {
            ITerm::app(ITerm::lam(name.clone(), None, forget_term(body)?), forget_term(bound)?)
        }
        Term::Nu { body, .. } => forget_term(body)?,
        Term::Get(x) => ITerm::Get(Box::new(constant(x)?)),
        Term::Set { addr, value, .. } => ITerm::PSet(Box::new(constant(addr)?), Box::new(forget_term(value)?)),
        Term::Store { addr, value, .. } => {
            let ITerm::RegionConst(r) = constant(addr)? else { unreachable!() };
            ITerm::PStore(r, Box::new(forget_term(value)?))
        }
        Term::Par(a, b) => ITerm::par(forget_term(a)?, forget_term(b)?),
    })
}

/// A translated file: region signature in declaration order, the
/// non-address variables of the preamble, and the program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetFile {
    pub regions: Vec<(Region, IType)>,
    pub vars: Vec<(Name, IType)>,
    pub program: ITerm,
}

/// Translates the preamble of `file` together with `decorated`, normally
/// the decorated program of a typing report for `file`.
pub fn forget_file(file: &SourceFile, decorated: &Term) -> Result<TargetFile, TranslationError> {
    Ok(TargetFile {
        regions: file.regions.iter().map(|d| (d.name.clone(), forget_type(&d.content))).collect(),
        vars: file
            .vars
            .iter()
            .filter(|v| v.ty.region().is_none())
            .map(|v| (v.name.clone(), forget_type(&v.ty)))
            .collect(),
        program: forget_term(decorated)?,
    })
}

impl fmt::Display for TargetFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, a) in &self.regions {
            writeln!(f, "region {r} : {a}")?;
        }
        for (x, a) in &self.vars {
            writeln!(f, "var {x} : {a}")?;
        }
        writeln!(f, "program {}", self.program)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse, parse_type};
    use crate::syntax::{Effect, Volatility};
    use crate::typing::{typecheck, Mode};

    fn ty(s: &str) -> Type {
        parse_type(s).unwrap()
    }

    #[test]
    fn types() {
        assert_eq!(forget_type(&ty("!(1 -{r}> 1)")).to_string(), "1 -{r}> 1");
        assert_eq!(forget_type(&ty("Reg r !1")), IType::region_ref(Region::new("r"), IType::Unit1));
        assert_eq!(forget_type(&ty("1")), IType::Unit1);
        assert_eq!(forget_type(&ty("B")), IType::Behaviour);
    }

    #[test]
    fn let_bang_becomes_application() {
        let t = Term::let_bang("x", Term::bang(Term::Unit), Term::var("x"));
        assert_eq!(forget_term(&t).unwrap().to_string(), "(\\x. x) *");
    }

    #[test]
    fn volatile_store_becomes_persistent() {
        let t = Term::Store {
            addr: Var::decorated(Name::new("x"), Region::new("r")),
            mode: Volatility::Volatile,
            value: Box::new(Term::Unit),
        };
        assert_eq!(forget_term(&t).unwrap(), ITerm::PStore(Region::new("r"), Box::new(ITerm::Unit)));
    }

    #[test]
    fn undecorated_address_is_rejected() {
        assert_eq!(forget_term(&Term::get("x")), Err(TranslationError::Undecorated(Name::new("x"))));
    }

    #[test]
    fn decorated_mix() {
        // x1^r1 | let !x2 = !x1 in x2^r2 | \x3. x3^r3 | nu x4. x4^r4, with
        // every address living in its own region.
        let src = "region r1 persistent : !1 family wo\nregion r2 persistent : !1 family wo\n\
                   region r3 persistent : !1 family wo\nregion r4 persistent : !1 family wo\n\
                   var x1 : (inf, Reg r1 !1)\nvar y : (inf, Reg r2 !1)\n\
                   program x1 | (let !x2 = !y in x2) | (\\x3:Reg r3 !1. x3) | nu x4 : Reg r4 !1. x4";
        let file = parse(src).unwrap();
        let rep = typecheck(&file, Mode::effects()).unwrap();
        let t = forget_file(&file, &rep.decorated).unwrap();
        assert_eq!(t.program.to_string(), "r1 | (\\x2. r2) r2 | (\\x3:Reg r3 1. r3) | r4");
        assert!(t.vars.is_empty());
        assert_eq!(rep.effect, Effect::empty());
    }
}
