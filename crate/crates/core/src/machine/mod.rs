//! Small-step execution over canonical program states.

mod explore;
mod progress;
mod run;

use std::fmt;

use thiserror::Error;

use crate::syntax::{
    canonicalize, decompose, hole_mut, subst, CanonicalProgram, Decomposition, LocalRedex, SyntaxError, Term,
    Volatility,
};

pub use explore::{explore, ExploreResult, Violation};
pub use progress::{classify_stuck, ProgressReport, ThreadStatus};
pub use run::{run, Outcome, Scheduler, Trace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RedexKind {
    Beta,
    LetBang,
    SetV,
    SetP,
    GetVolatile,
    GetPersistent,
}

impl fmt::Display for RedexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RedexKind::Beta => "beta",
            RedexKind::LetBang => "letbang",
            RedexKind::SetV => "setv",
            RedexKind::SetP => "setp",
            RedexKind::GetVolatile => "get-volatile",
            RedexKind::GetPersistent => "get-persistent",
        })
    }
}

/// A redex in thread `thread`; reads also name the store they consume or
/// inspect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RedexSite {
    pub thread: usize,
    pub store: Option<usize>,
    pub kind: RedexKind,
}

impl fmt::Display for RedexSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@thread {}", self.kind, self.thread)?;
        if let Some(s) = self.store {
            write!(f, " (store {s})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("runtime shape error: {0}")]
    RuntimeShape(String),
    #[error("site {0} is not enabled")]
    NotEnabled(RedexSite),
    #[error("the state can still reduce")]
    NotStuck,
    #[error("thread {thread} is neither a value nor a blocked read: `{term}`")]
    ClassificationFailure { thread: usize, term: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineState {
    pub program: CanonicalProgram,
    pub steps: usize,
}

impl MachineState {
    pub fn new(program: &Term) -> Result<Self, MachineError> {
        Ok(MachineState { program: canonicalize(program)?, steps: 0 })
    }

    pub fn fingerprint(&self) -> String {
        self.program.fingerprint()
    }

    pub fn to_term(&self) -> Term {
        self.program.to_term()
    }

    /// Readable print of the canonical program.
    pub fn print(&self) -> String {
        self.to_term().to_string()
    }
}

/// Every way the state can take one step, in the fixed order used by the
/// leftmost scheduler: by thread, then by store.
pub fn enabled(s: &MachineState) -> Vec<RedexSite> {
    let p = &s.program;
    let mut out = Vec::new();
    for (i, t) in p.threads.iter().enumerate() {
        let kind = match decompose(t) {
            Ok(Decomposition::Redex(LocalRedex::Beta)) => RedexKind::Beta,
            Ok(Decomposition::Redex(LocalRedex::LetBang)) => RedexKind::LetBang,
            Ok(Decomposition::Redex(LocalRedex::SetV)) => RedexKind::SetV,
            Ok(Decomposition::Redex(LocalRedex::SetP)) => RedexKind::SetP,
            Ok(Decomposition::BlockedRead(x)) => {
                for (j, st) in p.stores.iter().enumerate() {
                    if st.addr.name == x.name {
                        let kind = match st.mode {
                            Volatility::Volatile => RedexKind::GetVolatile,
                            Volatility::Persistent => RedexKind::GetPersistent,
                        };
                        out.push(RedexSite { thread: i, store: Some(j), kind });
                    }
                }
                continue;
            }
            _ => continue,
        };
        out.push(RedexSite { thread: i, store: None, kind });
    }
    out
}

fn shape(msg: impl Into<String>) -> MachineError {
    MachineError::RuntimeShape(msg.into())
}

/// Fires `site`, returning the canonical successor state.
pub fn step(s: &MachineState, site: RedexSite) -> Result<MachineState, MachineError> {
    let mut p = s.program.clone();
    let mut thread = p.threads.get(site.thread).cloned().ok_or(MachineError::NotEnabled(site))?;
    let hole = hole_mut(&mut thread);
    let mut new_store = None;
    match site.kind {
        RedexKind::Beta => {
            let Term::App(f, v) = &*hole else { return Err(MachineError::NotEnabled(site)) };
            let Term::Lam { param, body, .. } = &**f else {
                return Err(shape(format!("application of non-function `{f}`")));
            };
            *hole = subst(v, param, body)?;
        }
        RedexKind::LetBang => {
            let Term::LetBang { name, bound, body } = &*hole else { return Err(MachineError::NotEnabled(site)) };
            let Term::Bang(v) = &**bound else {
                return Err(shape(format!("let ! bound to non-! value `{bound}`")));
            };
            *hole = subst(v, name, body)?;
        }
        RedexKind::SetV | RedexKind::SetP => {
            let Term::Set { addr, mode, value } = &*hole else { return Err(MachineError::NotEnabled(site)) };
            new_store = Some(Term::Store { addr: addr.clone(), mode: *mode, value: value.clone() });
            *hole = Term::Unit;
        }
        RedexKind::GetVolatile | RedexKind::GetPersistent => {
            let Term::Get(x) = &*hole else { return Err(MachineError::NotEnabled(site)) };
            let j = site.store.ok_or(MachineError::NotEnabled(site))?;
            let st = p.stores.get(j).ok_or(MachineError::NotEnabled(site))?;
            let expected = if site.kind == RedexKind::GetVolatile { Volatility::Volatile } else { Volatility::Persistent };
            if st.addr.name != x.name || st.mode != expected {
                return Err(MachineError::NotEnabled(site));
            }
            if expected == Volatility::Persistent && !matches!(st.value, Term::Bang(_)) {
                return Err(shape(format!("persistent read of non-! value `{}`", st.value)));
            }
            *hole = st.value.clone();
            if expected == Volatility::Volatile {
                p.stores.remove(j);
            }
        }
    }
    let replacement = match new_store {
        Some(store) => Term::par(thread, store),
        None => thread,
    };
    p.absorb(site.thread, replacement)?;
    Ok(MachineState { program: p, steps: s.steps + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse;

    fn state(src: &str) -> MachineState {
        MachineState::new(&parse(src).unwrap().program).unwrap()
    }

    const PRE: &str = "region r volatile : 1 family aff\nregion p persistent : !1 family wo\n\
                       var x : (inf, Reg r 1)\nvar q : (inf, Reg p !1)\n";

    #[test]
    fn beta() {
        let s = state("program (\\x:1. x) *");
        let sites = enabled(&s);
        assert_eq!(sites, vec![RedexSite { thread: 0, store: None, kind: RedexKind::Beta }]);
        assert_eq!(step(&s, sites[0]).unwrap().print(), "*");
    }

    #[test]
    fn volatile_read_consumes() {
        let s = state(&format!("{PRE}program get(x) | [x <- *]"));
        let sites = enabled(&s);
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].kind, RedexKind::GetVolatile);
        let t = step(&s, sites[0]).unwrap();
        assert_eq!(t.program.threads, vec![Term::Unit]);
        assert!(t.program.stores.is_empty());
    }

    #[test]
    fn two_volatile_stores_two_sites() {
        let s = state(&format!("{PRE}program get(x) | [x <- *] | [x <- *]"));
        assert_eq!(enabled(&s).len(), 2);
    }

    #[test]
    fn persistent_read_keeps_store() {
        let s = state(&format!("{PRE}program get(q) | [q <= !*]"));
        let t = step(&s, enabled(&s)[0]).unwrap();
        assert_eq!(t.print(), "!* | [q <= !*]");
    }

    #[test]
    fn writes_create_stores() {
        let s = state(&format!("{PRE}program set(x, *) ; get(x)"));
        let t = step(&s, enabled(&s)[0]).unwrap();
        assert_eq!(t.program.stores.len(), 1);
        assert_eq!(enabled(&t)[0].kind, RedexKind::Beta);
    }

    #[test]
    fn unit_has_no_sites() {
        assert!(enabled(&state("program *")).is_empty());
    }

    #[test]
    fn runtime_shape_errors() {
        let s = state("program let !y = * in y");
        assert!(matches!(step(&s, enabled(&s)[0]), Err(MachineError::RuntimeShape(_))));
    }
}
