//! Abstract syntax of programs, binding, substitution and structural
//! equivalence.
//!
//! Terms follow the usual call-by-value grammar extended with addresses:
//! values are `*`, variables, abstractions and `!V`; stores `[x <- V]`
//! (volatile) and `[x <= V]` (persistent) may only appear in static
//! positions, i.e. under parallel composition and `nu` at the top of a
//! program.

mod canonical;
mod decompose;
pub mod print;
mod types;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use canonical::{canonicalize, struct_equiv, Binder, CanonicalProgram, StoreEntry};
pub use decompose::{decompose, hole_mut, Decomposition, LocalRedex, Opaque};
pub use types::{Effect, Type};

macro_rules! ident_newtype {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(s: &str) -> Self {
                $name(Arc::from(s))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }
    };
}

ident_newtype!(
    /// Variable (and address) name.
    Name
);
ident_newtype!(
    /// Region name.
    Region
);

/// Whether a region's stores are consumed by reads or kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Volatility {
    Volatile,
    Persistent,
}

impl fmt::Display for Volatility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Volatility::Volatile => "volatile",
            Volatility::Persistent => "persistent",
        })
    }
}

/// A variable occurrence. `region` is the decoration added by the
/// typechecker to occurrences of region-typed variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Var {
    pub name: Name,
    pub region: Option<Region>,
}

impl Var {
    pub fn new(name: impl Into<Name>) -> Self {
        Var { name: name.into(), region: None }
    }

    pub fn decorated(name: Name, region: Region) -> Self {
        Var { name, region: Some(region) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Unit,
    Var(Var),
    Lam { param: Name, ty: Type, body: Box<Term> },
    App(Box<Term>, Box<Term>),
    Bang(Box<Term>),
    LetBang { name: Name, bound: Box<Term>, body: Box<Term> },
    /// `nu x : Reg region content. body`
    Nu { name: Name, region: Region, content: Type, body: Box<Term> },
    Get(Var),
    /// `set(x, V)` when volatile, `pset(x, V)` when persistent.
    Set { addr: Var, mode: Volatility, value: Box<Term> },
    /// `[x <- V]` when volatile, `[x <= V]` when persistent.
    Store { addr: Var, mode: Volatility, value: Box<Term> },
    Par(Box<Term>, Box<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("substitution expects a value, found `{0}`")]
    NotAValue(String),
    #[error("address position of `{var}` would receive non-variable `{value}`")]
    NonAddress { var: Name, value: String },
    #[error("malformed program: {0}")]
    Malformed(String),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn lam(param: &str, ty: Type, body: Term) -> Term {
        Term::Lam { param: Name::new(param), ty, body: Box::new(body) }
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn bang(t: Term) -> Term {
        Term::Bang(Box::new(t))
    }

    pub fn let_bang(name: &str, bound: Term, body: Term) -> Term {
        Term::LetBang { name: Name::new(name), bound: Box::new(bound), body: Box::new(body) }
    }

    pub fn nu(name: &str, region: &str, content: Type, body: Term) -> Term {
        Term::Nu {
            name: Name::new(name),
            region: Region::new(region),
            content,
            body: Box::new(body),
        }
    }

    pub fn get(addr: &str) -> Term {
        Term::Get(Var::new(addr))
    }

    pub fn set(addr: &str, mode: Volatility, value: Term) -> Term {
        Term::Set { addr: Var::new(addr), mode, value: Box::new(value) }
    }

    pub fn store(addr: &str, mode: Volatility, value: Term) -> Term {
        Term::Store { addr: Var::new(addr), mode, value: Box::new(value) }
    }

    pub fn par(a: Term, b: Term) -> Term {
        Term::Par(Box::new(a), Box::new(b))
    }

    /// `M ; N`, i.e. `(\z:1. N) M` with `z` fresh for `N`.
    pub fn seq(first: Term, then: Term) -> Term {
        let mut avoid = HashSet::new();
        then.collect_names(&mut avoid);
        first.collect_names(&mut avoid);
        let z = fresh_name(&Name::new("z"), |n| avoid.contains(n));
        Term::app(Term::Lam { param: z, ty: Type::One, body: Box::new(then) }, first)
    }

    /// `V ::= * | x | \x.M | !V`
    pub fn is_value(&self) -> bool {
        match self {
            Term::Unit | Term::Var(_) | Term::Lam { .. } => true,
            Term::Bang(v) => v.is_value(),
            _ => false,
        }
    }

    pub fn is_store(&self) -> bool {
        matches!(self, Term::Store { .. })
    }

    /// A program built only from stores, parallel composition and `nu`.
    /// Such a program behaves as a store for typing purposes.
    pub fn is_store_like(&self) -> bool {
        match self {
            Term::Store { .. } => true,
            Term::Par(a, b) => a.is_store_like() && b.is_store_like(),
            Term::Nu { body, .. } => body.is_store_like(),
            _ => false,
        }
    }

    /// True if a store occurs anywhere inside the term.
    pub fn contains_store(&self) -> bool {
        let mut found = false;
        self.visit(&mut |t| found |= t.is_store());
        found
    }

    /// Checks that stores only occur at static positions.
    pub fn check_static_stores(&self) -> Result<(), SyntaxError> {
        match self {
            Term::Par(a, b) => {
                a.check_static_stores()?;
                b.check_static_stores()
            }
            Term::Nu { body, .. } => body.check_static_stores(),
            Term::Store { value, .. } => {
                if value.contains_store() {
                    Err(SyntaxError::Malformed("store nested inside a stored value".into()))
                } else {
                    Ok(())
                }
            }
            t => {
                if t.contains_store() {
                    Err(SyntaxError::Malformed(format!(
                        "store in non-static position inside `{}`",
                        print::term_to_string(t)
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Pre-order traversal of all subterms.
    pub fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self {
            Term::Unit | Term::Var(_) | Term::Get(_) => {}
            Term::Lam { body, .. } | Term::Bang(body) | Term::Nu { body, .. } => body.visit(f),
            Term::App(a, b) | Term::Par(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::LetBang { bound, body, .. } => {
                bound.visit(f);
                body.visit(f);
            }
            Term::Set { value, .. } | Term::Store { value, .. } => value.visit(f),
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    pub fn has_free(&self, x: &Name) -> bool {
        match self {
            Term::Unit => false,
            Term::Var(v) | Term::Get(v) => &v.name == x,
            Term::Lam { param, body, .. } => param != x && body.has_free(x),
            Term::App(a, b) | Term::Par(a, b) => a.has_free(x) || b.has_free(x),
            Term::Bang(t) => t.has_free(x),
            Term::LetBang { name, bound, body } => {
                bound.has_free(x) || (name != x && body.has_free(x))
            }
            Term::Nu { name, body, .. } => name != x && body.has_free(x),
            Term::Set { addr, value, .. } | Term::Store { addr, value, .. } => {
                &addr.name == x || value.has_free(x)
            }
        }
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        let note = |v: &Var, bound: &Vec<Name>, out: &mut BTreeSet<Name>| {
            if !bound.contains(&v.name) {
                out.insert(v.name.clone());
            }
        };
        match self {
            Term::Unit => {}
            Term::Var(v) | Term::Get(v) => note(v, bound, out),
            Term::Lam { param: x, body, .. } | Term::Nu { name: x, body, .. } => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Term::App(a, b) | Term::Par(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::Bang(t) => t.collect_free(bound, out),
            Term::LetBang { name, bound: m, body } => {
                m.collect_free(bound, out);
                bound.push(name.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Term::Set { addr, value, .. } | Term::Store { addr, value, .. } => {
                note(addr, bound, out);
                value.collect_free(bound, out);
            }
        }
    }

    /// Every name occurring in the term, free or bound.
    pub fn collect_names(&self, out: &mut HashSet<Name>) {
        self.visit(&mut |t| match t {
            Term::Var(v) | Term::Get(v) => {
                out.insert(v.name.clone());
            }
            Term::Set { addr, .. } | Term::Store { addr, .. } => {
                out.insert(addr.name.clone());
            }
            Term::Lam { param: x, .. } | Term::LetBang { name: x, .. } | Term::Nu { name: x, .. } => {
                out.insert(x.clone());
            }
            _ => {}
        });
    }

    /// Removes every decoration.
    pub fn strip_decorations(&self) -> Term {
        self.map_vars(&mut |v| Var::new(v.name.clone()))
    }

    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Var) -> Term {
        match self {
            Term::Unit => Term::Unit,
            Term::Var(v) => Term::Var(f(v)),
            Term::Get(v) => Term::Get(f(v)),
            Term::Lam { param, ty, body } => Term::Lam {
                param: param.clone(),
                ty: ty.clone(),
                body: Box::new(body.map_vars(f)),
            },
            Term::App(a, b) => Term::app(a.map_vars(f), b.map_vars(f)),
            Term::Par(a, b) => Term::par(a.map_vars(f), b.map_vars(f)),
            Term::Bang(t) => Term::bang(t.map_vars(f)),
            Term::LetBang { name, bound, body } => Term::LetBang {
                name: name.clone(),
                bound: Box::new(bound.map_vars(f)),
                body: Box::new(body.map_vars(f)),
            },
            Term::Nu { name, region, content, body } => Term::Nu {
                name: name.clone(),
                region: region.clone(),
                content: content.clone(),
                body: Box::new(body.map_vars(f)),
            },
            Term::Set { addr, mode, value } => Term::Set {
                addr: f(addr),
                mode: *mode,
                value: Box::new(value.map_vars(f)),
            },
            Term::Store { addr, mode, value } => Term::Store {
                addr: f(addr),
                mode: *mode,
                value: Box::new(value.map_vars(f)),
            },
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::term_to_string(self))
    }
}

/// A name derived from `base` that `taken` rejects. Trailing `_<digits>`
/// suffixes of `base` are dropped first so repeated renaming stays short.
pub fn fresh_name(base: &Name, taken: impl Fn(&Name) -> bool) -> Name {
    let s = base.as_str();
    let stem = match s.rfind('_') {
        Some(i) if i > 0 && s[i + 1..].chars().all(|c| c.is_ascii_digit()) && i + 1 < s.len() => &s[..i],
        _ => s,
    };
    let plain = Name::new(stem);
    if !taken(&plain) {
        return plain;
    }
    (1..)
        .map(|k| Name::new(&format!("{stem}_{k}")))
        .find(|n| !taken(n))
        .expect("unbounded name supply")
}

/// Capture-avoiding substitution `[value/var]target`.
///
/// Decorations survive: when a decorated occurrence is replaced by an
/// undecorated variable, the occurrence's region label is kept.
pub fn subst(value: &Term, var: &Name, target: &Term) -> Result<Term, SyntaxError> {
    if !value.is_value() {
        return Err(SyntaxError::NotAValue(value.to_string()));
    }
    let fv = value.free_vars();
    Subst { value, var, fv: &fv }.go(target)
}

/// Renames the free occurrences of `from` to `to` (capture-avoiding).
pub fn rename(target: &Term, from: &Name, to: &Name) -> Term {
    subst(&Term::Var(Var::new(to.clone())), from, target)
        .expect("variable-for-variable substitution cannot fail")
}

struct Subst<'a> {
    value: &'a Term,
    var: &'a Name,
    fv: &'a BTreeSet<Name>,
}

impl Subst<'_> {
    fn address(&self, a: &Var) -> Result<Var, SyntaxError> {
        if &a.name != self.var {
            return Ok(a.clone());
        }
        match self.value {
            Term::Var(w) => Ok(Var {
                name: w.name.clone(),
                region: w.region.clone().or_else(|| a.region.clone()),
            }),
            other => Err(SyntaxError::NonAddress { var: a.name.clone(), value: other.to_string() }),
        }
    }

    /// Renames `binder` away from the substituted value's free variables
    /// when it would capture them.
    fn open(&self, binder: &Name, body: &Term) -> (Name, Option<Term>) {
        if !self.fv.contains(binder) {
            return (binder.clone(), None);
        }
        let mut avoid = HashSet::new();
        body.collect_names(&mut avoid);
        let fresh = fresh_name(binder, |n| {
            avoid.contains(n) || self.fv.contains(n) || n == self.var
        });
        let renamed = rename(body, binder, &fresh);
        (fresh, Some(renamed))
    }

    fn under(&self, binder: &Name, body: &Term) -> Result<(Name, Term), SyntaxError> {
        if binder == self.var || !body.has_free(self.var) {
            return Ok((binder.clone(), body.clone()));
        }
        let (b, renamed) = self.open(binder, body);
        let body = renamed.as_ref().unwrap_or(body);
        Ok((b, self.go(body)?))
    }

    fn go(&self, t: &Term) -> Result<Term, SyntaxError> {
        if !t.has_free(self.var) {
            return Ok(t.clone());
        }
        Ok(match t {
            Term::Unit => Term::Unit,
            Term::Var(v) => {
                if &v.name == self.var {
                    match self.value {
                        Term::Var(w) => Term::Var(Var {
                            name: w.name.clone(),
                            region: w.region.clone().or_else(|| v.region.clone()),
                        }),
                        other => other.clone(),
                    }
                } else {
                    t.clone()
                }
            }
            Term::Get(a) => Term::Get(self.address(a)?),
            Term::Lam { param, ty, body } => {
                let (param, body) = self.under(param, body)?;
                Term::Lam { param, ty: ty.clone(), body: Box::new(body) }
            }
            Term::App(a, b) => Term::app(self.go(a)?, self.go(b)?),
            Term::Par(a, b) => Term::par(self.go(a)?, self.go(b)?),
            Term::Bang(m) => Term::bang(self.go(m)?),
            Term::LetBang { name, bound, body } => {
                let bound = self.go(bound)?;
                let (name, body) = self.under(name, body)?;
                Term::LetBang { name, bound: Box::new(bound), body: Box::new(body) }
            }
            Term::Nu { name, region, content, body } => {
                let (name, body) = self.under(name, body)?;
                Term::Nu {
                    name,
                    region: region.clone(),
                    content: content.clone(),
                    body: Box::new(body),
                }
            }
            Term::Set { addr, mode, value } => Term::Set {
                addr: self.address(addr)?,
                mode: *mode,
                value: Box::new(self.go(value)?),
            },
            Term::Store { addr, mode, value } => Term::Store {
                addr: self.address(addr)?,
                mode: *mode,
                value: Box::new(self.go(value)?),
            },
        })
    }
}

/// Syntactic equality up to renaming of bound variables. Decorations are
/// ignored.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn same(x: &Name, y: &Name, env: &[(Name, Name)]) -> bool {
        for (l, r) in env.iter().rev() {
            if l == x || r == y {
                return l == x && r == y;
            }
        }
        x == y
    }
    fn go(a: &Term, b: &Term, env: &mut Vec<(Name, Name)>) -> bool {
        match (a, b) {
            (Term::Unit, Term::Unit) => true,
            (Term::Var(x), Term::Var(y)) | (Term::Get(x), Term::Get(y)) => same(&x.name, &y.name, env),
            (
                Term::Lam { param: x, ty: s, body: m },
                Term::Lam { param: y, ty: t, body: n },
            ) => {
                s == t && {
                    env.push((x.clone(), y.clone()));
                    let r = go(m, n, env);
                    env.pop();
                    r
                }
            }
            (Term::App(a1, a2), Term::App(b1, b2)) | (Term::Par(a1, a2), Term::Par(b1, b2)) => {
                go(a1, b1, env) && go(a2, b2, env)
            }
            (Term::Bang(m), Term::Bang(n)) => go(m, n, env),
            (
                Term::LetBang { name: x, bound: m1, body: m2 },
                Term::LetBang { name: y, bound: n1, body: n2 },
            ) => {
                go(m1, n1, env) && {
                    env.push((x.clone(), y.clone()));
                    let r = go(m2, n2, env);
                    env.pop();
                    r
                }
            }
            (
                Term::Nu { name: x, region: r, content: s, body: m },
                Term::Nu { name: y, region: q, content: t, body: n },
            ) => {
                r == q && s == t && {
                    env.push((x.clone(), y.clone()));
                    let res = go(m, n, env);
                    env.pop();
                    res
                }
            }
            (
                Term::Set { addr: x, mode: m1, value: v1 },
                Term::Set { addr: y, mode: m2, value: v2 },
            )
            | (
                Term::Store { addr: x, mode: m1, value: v1 },
                Term::Store { addr: y, mode: m2, value: v2 },
            ) => m1 == m2 && same(&x.name, &y.name, env) && go(v1, v2, env),
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x() -> Name {
        Name::new("x")
    }

    #[test]
    fn subst_identity_case() {
        assert_eq!(subst(&Term::Unit, &x(), &Term::var("x")).unwrap(), Term::Unit);
    }

    #[test]
    fn subst_avoids_capture() {
        // [y/x](\y:1. x) must not become \y:1. y
        let target = Term::lam("y", Type::One, Term::var("x"));
        let out = subst(&Term::var("y"), &x(), &target).unwrap();
        match &out {
            Term::Lam { param, body, .. } => {
                assert_ne!(param.as_str(), "y");
                assert_eq!(**body, Term::var("y"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(alpha_eq(&out, &Term::lam("w", Type::One, Term::var("y"))));
    }

    #[test]
    fn subst_keeps_decoration_on_addresses() {
        let target = Term::Get(Var::decorated(x(), Region::new("r")));
        let out = subst(&Term::var("y"), &x(), &target).unwrap();
        assert_eq!(out, Term::Get(Var::decorated(Name::new("y"), Region::new("r"))));
        let value = Term::Var(Var::decorated(Name::new("y"), Region::new("r")));
        let out = subst(&value, &x(), &Term::get("x")).unwrap();
        assert_eq!(out, Term::Get(Var::decorated(Name::new("y"), Region::new("r"))));
    }

    #[test]
    fn subst_rejects_non_values() {
        let app = Term::app(Term::var("f"), Term::Unit);
        assert!(matches!(subst(&app, &x(), &Term::var("x")), Err(SyntaxError::NotAValue(_))));
        assert!(matches!(
            subst(&Term::Unit, &x(), &Term::get("x")),
            Err(SyntaxError::NonAddress { .. })
        ));
    }

    #[test]
    fn subst_respects_shadowing() {
        let target = Term::let_bang("x", Term::var("x"), Term::var("x"));
        let out = subst(&Term::Unit, &x(), &target).unwrap();
        assert_eq!(out, Term::let_bang("x", Term::Unit, Term::var("x")));
    }

    #[test]
    fn fresh_names_strip_suffixes() {
        let taken: HashSet<Name> = ["x", "x_1"].into_iter().map(Name::new).collect();
        assert_eq!(fresh_name(&Name::new("x_1"), |n| taken.contains(n)).as_str(), "x_2");
        assert_eq!(fresh_name(&Name::new("y"), |n| taken.contains(n)).as_str(), "y");
    }

    #[test]
    fn static_store_check() {
        let ok = Term::nu("x", "r", Type::One, Term::par(Term::get("x"), Term::store("x", Volatility::Volatile, Term::Unit)));
        assert!(ok.check_static_stores().is_ok());
        let bad = Term::app(Term::var("f"), Term::par(Term::Unit, Term::store("x", Volatility::Volatile, Term::Unit)));
        assert!(bad.check_static_stores().is_err());
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            Just(Term::Unit),
            prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),
            prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::get),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            let names = prop::sample::select(vec!["x", "y", "z", "w"]);
            prop_oneof![
                (names.clone(), inner.clone()).prop_map(|(n, b)| Term::lam(n, Type::One, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app(a, b)),
                inner.clone().prop_map(Term::bang),
                (names.clone(), inner.clone(), inner.clone()).prop_map(|(n, a, b)| Term::let_bang(n, a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::par(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn subst_leaves_terms_without_the_variable(t in arb_term()) {
            let fresh = Name::new("q");
            prop_assert_eq!(subst(&Term::Unit, &fresh, &t).unwrap(), t);
        }

        #[test]
        fn subst_removes_free_occurrences(t in arb_term()) {
            let out = subst(&Term::var("w"), &x(), &t).unwrap();
            prop_assert!(!out.has_free(&x()));
            prop_assert!(alpha_eq(&out, &out.clone()));
        }
    }
}
