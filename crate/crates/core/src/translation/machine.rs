//! Reduction in the target calculus: beta, persistent reads and writes.

use std::fmt;

use crate::syntax::Region;

use super::{i_subst, ITerm, TranslationError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IRedex {
    Beta,
    Read,
    PSet,
}

impl fmt::Display for IRedex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IRedex::Beta => "beta",
            IRedex::Read => "get",
            IRedex::PSet => "pset",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ISite {
    pub thread: usize,
    pub store: Option<usize>,
    pub kind: IRedex,
}

impl fmt::Display for ISite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@thread {}", self.kind, self.thread)?;
        if let Some(s) = self.store {
            write!(f, " (store {s})")?;
        }
        Ok(())
    }
}

/// A flattened target program. There is no restriction in the target, so
/// the canonical form is just the threads and the stores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IState {
    pub threads: Vec<ITerm>,
    pub stores: Vec<(Region, ITerm)>,
}

fn flatten(t: ITerm, threads: &mut Vec<ITerm>, stores: &mut Vec<(Region, ITerm)>) {
    match t {
        ITerm::Par(a, b) => {
            flatten(*a, threads, stores);
            flatten(*b, threads, stores);
        }
        ITerm::PStore(r, v) => stores.push((r, *v)),
        t => threads.push(t),
    }
}

impl IState {
    pub fn new(t: &ITerm) -> IState {
        let (mut threads, mut stores) = (Vec::new(), Vec::new());
        flatten(t.clone(), &mut threads, &mut stores);
        IState { threads, stores }
    }

    pub fn to_term(&self) -> ITerm {
        let parts = self
            .threads
            .iter()
            .cloned()
            .chain(self.stores.iter().map(|(r, v)| ITerm::PStore(r.clone(), Box::new(v.clone()))));
        let mut parts: Vec<ITerm> = parts.collect();
        let mut acc = parts.pop().unwrap_or(ITerm::Unit);
        while let Some(p) = parts.pop() {
            acc = ITerm::par(p, acc);
        }
        acc
    }

    /// Sorted α-keys of the threads.
    pub fn thread_keys(&self) -> Vec<String> {
        let mut k: Vec<String> = self.threads.iter().map(ITerm::alpha_key).collect();
        k.sort();
        k
    }

    /// Sorted α-keys of the stores.
    pub fn store_keys(&self) -> Vec<String> {
        let mut k: Vec<String> = self.stores.iter().map(|(r, v)| format!("{r}<={}", v.alpha_key())).collect();
        k.sort();
        k
    }
}

impl fmt::Display for IState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// The redex of a thread under `E ::= [] | E M | V E`, if any.
fn redex(t: &ITerm) -> Option<(&ITerm, IRedex)> {
    match t {
        ITerm::App(f, a) => {
            if !f.is_value() {
                redex(f)
            } else if !a.is_value() {
                redex(a)
            } else if matches!(**f, ITerm::Lam { .. }) {
                Some((t, IRedex::Beta))
            } else {
                None
            }
        }
        ITerm::Get(v) if matches!(**v, ITerm::RegionConst(_)) => Some((t, IRedex::Read)),
        ITerm::PSet(v, w) if matches!(**v, ITerm::RegionConst(_)) && w.is_value() => Some((t, IRedex::PSet)),
        _ => None,
    }
}

fn redex_mut(t: &mut ITerm) -> &mut ITerm {
    let descend = match t {
        ITerm::App(f, a) if !f.is_value() => Some(true),
        ITerm::App(_, a) if !a.is_value() => Some(false),
        _ => None,
    };
    match (descend, t) {
        (Some(true), ITerm::App(f, _)) => redex_mut(f),
        (Some(false), ITerm::App(_, a)) => redex_mut(a),
        (_, t) => t,
    }
}

pub fn i_enabled(s: &IState) -> Vec<ISite> {
    let mut out = Vec::new();
    for (i, t) in s.threads.iter().enumerate() {
        match redex(t) {
            Some((ITerm::Get(v), IRedex::Read)) => {
                let ITerm::RegionConst(r) = &**v else { continue };
                for (j, (q, _)) in s.stores.iter().enumerate() {
                    if q == r {
                        out.push(ISite { thread: i, store: Some(j), kind: IRedex::Read });
                    }
                }
            }
            Some((_, kind)) => out.push(ISite { thread: i, store: None, kind }),
            None => {}
        }
    }
    out
}

pub fn i_step(s: &IState, site: ISite) -> Result<IState, TranslationError> {
    let mut thread = s.threads.get(site.thread).cloned().ok_or(TranslationError::NotEnabled(site))?;
    let mut extra = None;
    let hole = redex_mut(&mut thread);
    match (site.kind, &*hole) {
        (IRedex::Beta, ITerm::App(f, v)) => {
            let ITerm::Lam { param, body, .. } = &**f else { return Err(TranslationError::NotEnabled(site)) };
            if !v.is_value() {
                return Err(TranslationError::NotAValue(v.to_string()));
            }
            *hole = i_subst(v, param, body);
        }
        (IRedex::Read, ITerm::Get(v)) => {
            let ITerm::RegionConst(r) = &**v else { return Err(TranslationError::NotEnabled(site)) };
            let j = site.store.ok_or(TranslationError::NotEnabled(site))?;
            match s.stores.get(j) {
                Some((q, w)) if q == r => *hole = w.clone(),
                _ => return Err(TranslationError::NotEnabled(site)),
            }
        }
        (IRedex::PSet, ITerm::PSet(v, w)) => {
            let ITerm::RegionConst(r) = &**v else { return Err(TranslationError::NotEnabled(site)) };
            extra = Some((r.clone(), (**w).clone()));
            *hole = ITerm::Unit;
        }
        _ => return Err(TranslationError::NotEnabled(site)),
    }
    let (mut threads, mut stores) = (Vec::new(), Vec::new());
    flatten(thread, &mut threads, &mut stores);
    let mut out = s.clone();
    out.threads.splice(site.thread..=site.thread, threads);
    out.stores.extend(stores);
    out.stores.extend(extra);
    Ok(out)
}

/// Runs the leftmost strategy for at most `max_steps` steps. Returns the
/// final state, the number of steps taken and whether it is a normal form.
pub fn i_run(s: &IState, max_steps: usize) -> Result<(IState, usize, bool), TranslationError> {
    let mut cur = s.clone();
    for n in 0..=max_steps {
        let sites = i_enabled(&cur);
        let Some(site) = sites.first() else { return Ok((cur, n, true)) };
        if n == max_steps {
            break;
        }
        cur = i_step(&cur, *site)?;
    }
    Ok((cur, max_steps, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Name;

    fn r() -> ITerm {
        ITerm::RegionConst(Region::new("r"))
    }

    #[test]
    fn beta() {
        let id = ITerm::lam(Name::new("x"), None, ITerm::Var(Name::new("x")));
        let s = IState::new(&ITerm::app(id, ITerm::Unit));
        let sites = i_enabled(&s);
        assert_eq!(sites, vec![ISite { thread: 0, store: None, kind: IRedex::Beta }]);
        assert_eq!(i_step(&s, sites[0]).unwrap().to_string(), "*");
    }

    #[test]
    fn read_keeps_store() {
        let s = IState::new(&ITerm::par(ITerm::Get(Box::new(r())), ITerm::PStore(Region::new("r"), Box::new(ITerm::Unit))));
        let t = i_step(&s, i_enabled(&s)[0]).unwrap();
        assert_eq!(t.to_string(), "* | [r <= *]");
    }

    #[test]
    fn pset_adds_store() {
        let s = IState::new(&ITerm::PSet(Box::new(r()), Box::new(ITerm::Unit)));
        let t = i_step(&s, i_enabled(&s)[0]).unwrap();
        assert_eq!(t.to_string(), "* | [r <= *]");
        assert!(i_enabled(&t).is_empty());
    }

    #[test]
    fn blocked_read_is_normal() {
        let s = IState::new(&ITerm::Get(Box::new(r())));
        let (_, n, normal) = i_run(&s, 10).unwrap();
        assert_eq!((n, normal), (0, true));
    }
}
