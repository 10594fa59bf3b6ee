//! The forgetful translation into the intuitionistic target calculus, the
//! target calculus itself, and a lockstep simulation checker.
//!
//! The target has no `!`, no usages and no restriction. Addresses are
//! replaced by the constant of their region, and every store is persistent.

mod check;
mod forget;
mod machine;
mod simulate;

use std::fmt;

use thiserror::Error;

use crate::syntax::{Effect, Name, Region};

pub use check::{i_subtype, i_typecheck, i_typecheck_in, ITypeError};
pub use forget::{forget_file, forget_term, forget_type, TargetFile};
pub use machine::{i_enabled, i_run, i_step, IRedex, ISite, IState};
pub use simulate::{check_simulation, SimulationOutcome, SimulationStep, SimulationVerdict};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IType {
    Unit1,
    Behaviour,
    Arrow(Box<IType>, Effect, Box<IType>),
    RegionRef(Region, Box<IType>),
}

impl IType {
    pub fn arrow(dom: IType, eff: Effect, cod: IType) -> IType {
        IType::Arrow(Box::new(dom), eff, Box::new(cod))
    }

    pub fn region_ref(r: Region, content: IType) -> IType {
        IType::RegionRef(r, Box::new(content))
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IType::Arrow(..) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

impl fmt::Display for IType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IType::Unit1 => f.write_str("1"),
            IType::Behaviour => f.write_str("B"),
            IType::RegionRef(r, a) => {
                write!(f, "Reg {r} ")?;
                a.fmt_atom(f)
            }
            IType::Arrow(a, e, b) => {
                a.fmt_atom(f)?;
                if e.is_empty() {
                    f.write_str(" -> ")?;
                } else {
                    write!(f, " -{e}> ")?;
                }
                write!(f, "{b}")
            }
        }
    }
}

/// Terms of the target calculus.
///
/// A lambda produced from `let !` carries no annotation; the checker types
/// it from the argument it is applied to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ITerm {
    Unit,
    Var(Name),
    RegionConst(Region),
    Lam { param: Name, ty: Option<IType>, body: Box<ITerm> },
    App(Box<ITerm>, Box<ITerm>),
    Get(Box<ITerm>),
    PSet(Box<ITerm>, Box<ITerm>),
    Par(Box<ITerm>, Box<ITerm>),
    PStore(Region, Box<ITerm>),
}

impl ITerm {
    pub fn app(f: ITerm, a: ITerm) -> ITerm {
        ITerm::App(Box::new(f), Box::new(a))
    }

    pub fn par(a: ITerm, b: ITerm) -> ITerm {
        ITerm::Par(Box::new(a), Box::new(b))
    }

    pub fn lam(param: Name, ty: Option<IType>, body: ITerm) -> ITerm {
        ITerm::Lam { param, ty, body: Box::new(body) }
    }

    /// `V ::= * | x | r | \x.M`
    pub fn is_value(&self) -> bool {
        matches!(self, ITerm::Unit | ITerm::Var(_) | ITerm::RegionConst(_) | ITerm::Lam { .. })
    }

    pub fn is_store_like(&self) -> bool {
        match self {
            ITerm::PStore(..) => true,
            ITerm::Par(a, b) => a.is_store_like() && b.is_store_like(),
            _ => false,
        }
    }

    pub fn has_free(&self, x: &Name) -> bool {
        match self {
            ITerm::Unit | ITerm::RegionConst(_) => false,
            ITerm::Var(y) => y == x,
            ITerm::Lam { param, body, .. } => param != x && body.has_free(x),
            ITerm::App(a, b) | ITerm::PSet(a, b) | ITerm::Par(a, b) => a.has_free(x) || b.has_free(x),
            ITerm::Get(a) | ITerm::PStore(_, a) => a.has_free(x),
        }
    }

    fn names(&self, out: &mut Vec<Name>) {
        match self {
            ITerm::Unit | ITerm::RegionConst(_) => {}
            ITerm::Var(y) => out.push(y.clone()),
            ITerm::Lam { param, body, .. } => {
                out.push(param.clone());
                body.names(out);
            }
            ITerm::App(a, b) | ITerm::PSet(a, b) | ITerm::Par(a, b) => {
                a.names(out);
                b.names(out);
            }
            ITerm::Get(a) | ITerm::PStore(_, a) => a.names(out),
        }
    }

    /// A print that is identical for α-equivalent terms.
    pub fn alpha_key(&self) -> String {
        let mut out = String::new();
        Printer { canonical: true }.go(self, PAR, true, &mut Vec::new(), &mut out);
        out
    }
}

/// Capture-avoiding `[value/var]target` in the target calculus.
pub fn i_subst(value: &ITerm, var: &Name, target: &ITerm) -> ITerm {
    if !target.has_free(var) {
        return target.clone();
    }
    match target {
        ITerm::Unit | ITerm::RegionConst(_) => target.clone(),
        ITerm::Var(y) => {
            if y == var {
                value.clone()
            } else {
                target.clone()
            }
        }
        ITerm::Lam { param, ty, body } => {
            if value.has_free(param) {
                let mut taken = Vec::new();
                value.names(&mut taken);
                body.names(&mut taken);
                taken.push(var.clone());
                let fresh = crate::syntax::fresh_name(param, |n| taken.contains(n));
                let body = i_subst(&ITerm::Var(fresh.clone()), param, body);
                ITerm::lam(fresh, ty.clone(), i_subst(value, var, &body))
            } else {
                ITerm::lam(param.clone(), ty.clone(), i_subst(value, var, body))
            }
        }
        ITerm::App(a, b) => ITerm::app(i_subst(value, var, a), i_subst(value, var, b)),
        ITerm::PSet(a, b) => ITerm::PSet(Box::new(i_subst(value, var, a)), Box::new(i_subst(value, var, b))),
        ITerm::Par(a, b) => ITerm::par(i_subst(value, var, a), i_subst(value, var, b)),
        ITerm::Get(a) => ITerm::Get(Box::new(i_subst(value, var, a))),
        ITerm::PStore(r, a) => ITerm::PStore(r.clone(), Box::new(i_subst(value, var, a))),
    }
}

const PAR: u8 = 0;
const APP: u8 = 1;
const ARG: u8 = 2;

struct Printer {
    canonical: bool,
}

impl Printer {
    fn go(&self, t: &ITerm, prec: u8, tail: bool, env: &mut Vec<(Name, String)>, out: &mut String) {
        let needs = match t {
            ITerm::Par(..) => prec > PAR,
            ITerm::App(..) => prec > APP,
            ITerm::Lam { .. } => !tail,
            _ => false,
        };
        if needs {
            out.push('(');
            self.go(t, PAR, true, env, out);
            out.push(')');
            return;
        }
        match t {
            ITerm::Unit => out.push('*'),
            ITerm::Var(x) => match env.iter().rev().find(|(n, _)| n == x) {
                Some((_, p)) => out.push_str(p),
                None => out.push_str(x.as_str()),
            },
            ITerm::RegionConst(r) => {
                if self.canonical {
                    out.push('@');
                }
                out.push_str(r.as_str());
            }
            ITerm::Lam { param, ty, body } => {
                let printed = if self.canonical { format!("%{}", env.len()) } else { param.to_string() };
                out.push('\\');
                out.push_str(&printed);
                if let Some(ty) = ty {
                    out.push_str(&format!(":{ty}"));
                }
                out.push_str(". ");
                env.push((param.clone(), printed));
                self.go(body, PAR, tail, env, out);
                env.pop();
            }
            ITerm::App(f, a) => {
                self.go(f, APP, false, env, out);
                out.push(' ');
                self.go(a, ARG, tail, env, out);
            }
            ITerm::Get(a) => {
                out.push_str("get(");
                self.go(a, PAR, true, env, out);
                out.push(')');
            }
            ITerm::PSet(a, v) => {
                out.push_str("pset(");
                self.go(a, PAR, true, env, out);
                out.push_str(", ");
                self.go(v, PAR, true, env, out);
                out.push(')');
            }
            ITerm::PStore(r, v) => {
                out.push_str(&format!("[{r} <= "));
                self.go(v, PAR, true, env, out);
                out.push(']');
            }
            ITerm::Par(a, b) => {
                self.go(a, APP, false, env, out);
                out.push_str(" | ");
                self.go(b, PAR, tail, env, out);
            }
        }
    }
}

impl fmt::Display for ITerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        Printer { canonical: false }.go(self, PAR, true, &mut Vec::new(), &mut out);
        f.write_str(&out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslationError {
    #[error("address `{0}` carries no region decoration")]
    Undecorated(Name),
    #[error("target term is not a value: `{0}`")]
    NotAValue(String),
    #[error("target runtime shape error: {0}")]
    RuntimeShape(String),
    #[error("target site {0} is not enabled")]
    NotEnabled(ISite),
    #[error(transparent)]
    Machine(#[from] crate::machine::MachineError),
    #[error("source program does not typecheck: {0}")]
    Source(String),
}
