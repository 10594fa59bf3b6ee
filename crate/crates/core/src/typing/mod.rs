//! Typechecking under the base, confluent, effects and stratified
//! disciplines.

mod check;
mod formation;
mod subtype;

use std::fmt;

use thiserror::Error;

use crate::surface::SourceFile;
use crate::syntax::{Effect, Name, Region, Term, Type, Volatility};
use crate::usage::{Family, MapClash, Mult, Offender, RegionUsage, UsageMap};

pub use check::typecheck;
pub use formation::{check_type, check_value_type, form_region_context, FormationError};
pub use subtype::{subtype, subtype_pair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum System {
    Base,
    Effects,
}

/// Typing discipline. Stratification only makes sense with effects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mode {
    pub system: System,
    pub stratified: bool,
    pub confluent: bool,
}

impl Mode {
    pub fn base() -> Self {
        Mode { system: System::Base, stratified: false, confluent: false }
    }

    pub fn effects() -> Self {
        Mode { system: System::Effects, stratified: false, confluent: false }
    }

    pub fn stratified() -> Self {
        Mode { system: System::Effects, stratified: true, confluent: false }
    }

    pub fn with_confluent(self) -> Self {
        Mode { confluent: true, ..self }
    }

    pub fn has_effects(&self) -> bool {
        self.system == System::Effects
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.system {
            System::Base => "base",
            System::Effects => "effects",
        })?;
        if self.stratified {
            f.write_str("+stratified")?;
        }
        if self.confluent {
            f.write_str("+confluent")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeErrorKind {
    #[error("{0}")]
    Formation(#[from] FormationError),
    #[error("usage clash: {0}")]
    UsageClash(MapClash),
    #[error("cannot promote over {0}")]
    Promotion(Offender),
    #[error("type mismatch: expected `{expected}`, found `{actual}`")]
    Mismatch { expected: Type, actual: Type },
    #[error("expected a function, found `{0}`")]
    ExpectedArrow(Type),
    #[error("expected a type of the form !A, found `{0}`")]
    ExpectedBang(Type),
    #[error("expected an address, found `{0}`")]
    ExpectedRegion(Type),
    #[error("expected a value type, found `{0}`")]
    ExpectedValueType(Type),
    #[error("store in a non-static position")]
    StoreInTerm,
    #[error("region `{region}` is {declared}, but the operation is {used}")]
    VolatilityMismatch { region: Region, declared: Volatility, used: Volatility },
    #[error("volatile write to region `{region}` of family {family} breaks confluence (family aff required)")]
    ConfluentFamily { region: Region, family: Family },
    #[error("unbound variable `{0}`")]
    Unbound(Name),
}

/// A type error located by the path of subterm positions leading to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub kind: TypeErrorKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "at {}: {}", self.path, self.kind)
        }
    }
}

/// At most this many diagnostics are collected before giving up.
pub const MAX_DIAGNOSTICS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct TypeErrors(pub Vec<Diagnostic>);

impl TypeErrors {
    pub fn first(&self) -> &Diagnostic {
        &self.0[0]
    }

    pub fn is_formation(&self) -> bool {
        self.0.iter().any(|d| matches!(d.kind, TypeErrorKind::Formation(_)))
    }
}

impl fmt::Display for TypeErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Result of a successful typecheck.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypingReport {
    pub ty: Type,
    pub effect: Effect,
    pub usages: UsageMap,
    /// The program with every region-typed occurrence labelled by its region.
    pub decorated: Term,
    /// Declared regions, in declaration order.
    pub regions: Vec<(Region, Family)>,
    /// Declared free variables, in declaration order.
    pub vars: Vec<Name>,
    /// Inferred multiplicity of each restriction binder.
    pub binder_usages: Vec<(Name, Mult)>,
    pub warnings: Vec<String>,
}

impl TypingReport {
    /// Usage of a declared region, neutral if unused.
    pub fn region_usage(&self, r: &Region) -> Option<RegionUsage> {
        let fam = self.regions.iter().find(|(n, _)| n == r)?.1;
        Some(self.usages.region(r).unwrap_or(RegionUsage::neutral(fam)))
    }

    /// The judgement proper, for comparisons that ignore the preamble.
    pub fn judgement(&self) -> (Type, Effect, UsageMap) {
        (self.ty.clone(), self.effect.clone(), self.usages.clone())
    }

    /// Line-oriented rendering: type, effect, region usages, then the
    /// usages of used free variables.
    pub fn render(&self) -> String {
        let mut out = format!("type: {}\n", self.ty);
        let effect: Vec<&str> =
            self.regions.iter().filter(|(r, _)| self.effect.contains(r)).map(|(r, _)| r.as_str()).collect();
        out.push_str(&format!("effect: {{{}}}\n", effect.join(",")));
        for (r, _) in &self.regions {
            let u = self.region_usage(r).expect("declared region");
            out.push_str(&format!("usage {r} = {u}\n"));
        }
        for x in &self.vars {
            if self.usages.uses_var(x) {
                out.push_str(&format!("usage {x} = {}\n", self.usages.var(x)));
            }
        }
        out
    }
}

/// Typechecks a program against the preamble of `file`.
pub fn typecheck_program(file: &SourceFile, program: &Term, mode: Mode) -> Result<TypingReport, TypeErrors> {
    typecheck(&file.with_program(program.clone()), mode)
}
