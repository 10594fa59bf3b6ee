//! Types and effects for the target calculus.
//!
//! Contexts are unrestricted, so there is no usage bookkeeping; the only
//! structure beyond simple types is the stratified region signature.

use thiserror::Error;

use crate::syntax::{Effect, Name, Region};

use super::{IType, ITerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ITypeError {
    #[error("region `{0}` is not declared")]
    UndeclaredRegion(Region),
    #[error("region `{0}` is declared twice")]
    DuplicateRegion(Region),
    #[error("content of region `{region}` refers to `{referenced}`, which is not declared before it")]
    Stratification { region: Region, referenced: Region },
    #[error("`Reg {region} {actual}` does not match the declared content `{expected}`")]
    ContentMismatch { region: Region, expected: IType, actual: IType },
    #[error("B is not a value-type")]
    BehaviourInValueType,
    #[error("expected `{expected}`, found `{actual}`")]
    Mismatch { expected: IType, actual: IType },
    #[error("expected a function, found `{0}`")]
    ExpectedArrow(IType),
    #[error("expected a region constant, found `{0}`")]
    ExpectedRegion(IType),
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error("expected a value, found `{0}`")]
    NotAValue(String),
    #[error("unannotated lambda `\\{0}` outside head position")]
    Unannotated(Name),
}

/// `a ≤ b`: reflexive, arrows contravariant in the domain and covariant in
/// the codomain with `e ⊆ e' ⊆ dom`.
pub fn i_subtype(dom: &Effect, a: &IType, b: &IType) -> bool {
    if a == b {
        return true;
    }
    match (a, b) {
        (IType::Arrow(a1, e1, b1), IType::Arrow(a2, e2, b2)) => {
            e1.is_subset(e2) && e2.is_subset(dom) && i_subtype(dom, a2, a1) && i_subtype(dom, b1, b2)
        }
        _ => false,
    }
}

fn effect_visible(visible: &[(Region, IType)], e: &Effect, owner: Option<&Region>) -> Result<(), ITypeError> {
    for r in e.iter() {
        if !visible.iter().any(|(n, _)| n == r) {
            return Err(match owner {
                Some(o) => ITypeError::Stratification { region: o.clone(), referenced: r.clone() },
                None => ITypeError::UndeclaredRegion(r.clone()),
            });
        }
    }
    Ok(())
}

/// Formation of `ty` against the regions in `visible`. `owner` names the
/// region whose content is being formed, for diagnostics.
fn form(visible: &[(Region, IType)], ty: &IType, value: bool, owner: Option<&Region>) -> Result<(), ITypeError> {
    match ty {
        IType::Unit1 => Ok(()),
        IType::Behaviour => {
            if value {
                Err(ITypeError::BehaviourInValueType)
            } else {
                Ok(())
            }
        }
        IType::Arrow(a, e, b) => {
            form(visible, a, true, owner)?;
            effect_visible(visible, e, owner)?;
            form(visible, b, false, owner)
        }
        IType::RegionRef(r, a) => match visible.iter().find(|(n, _)| n == r) {
            Some((_, declared)) if declared == &**a => Ok(()),
            Some((_, declared)) => Err(ITypeError::ContentMismatch {
                region: r.clone(),
                expected: declared.clone(),
                actual: (**a).clone(),
            }),
            None => Err(match owner {
                Some(o) => ITypeError::Stratification { region: o.clone(), referenced: r.clone() },
                None => ITypeError::UndeclaredRegion(r.clone()),
            }),
        },
    }
}

/// Each region's content is formed against the regions declared before it.
pub fn i_form_regions(regions: &[(Region, IType)]) -> Result<(), ITypeError> {
    for (i, (r, a)) in regions.iter().enumerate() {
        if regions[..i].iter().any(|(n, _)| n == r) {
            return Err(ITypeError::DuplicateRegion(r.clone()));
        }
        form(&regions[..i], a, true, Some(r))?;
    }
    Ok(())
}

struct Checker<'a> {
    regions: &'a [(Region, IType)],
    dom: Effect,
    env: Vec<(Name, IType)>,
}

impl Checker<'_> {
    fn value(&mut self, v: &ITerm) -> Result<IType, ITypeError> {
        if !v.is_value() {
            return Err(ITypeError::NotAValue(v.to_string()));
        }
        Ok(self.synth(v)?.0)
    }

    fn address(&mut self, v: &ITerm) -> Result<(Region, IType), ITypeError> {
        match self.value(v)? {
            IType::RegionRef(r, a) => Ok((r, *a)),
            other => Err(ITypeError::ExpectedRegion(other)),
        }
    }

    fn expect(&self, expected: &IType, actual: IType) -> Result<(), ITypeError> {
        if i_subtype(&self.dom, &actual, expected) {
            Ok(())
        } else {
            Err(ITypeError::Mismatch { expected: expected.clone(), actual })
        }
    }

    fn under<T>(&mut self, x: &Name, ty: IType, f: impl FnOnce(&mut Self) -> T) -> T {
        self.env.push((x.clone(), ty));
        let r = f(self);
        self.env.pop();
        r
    }

    fn synth(&mut self, t: &ITerm) -> Result<(IType, Effect), ITypeError> {
        let none = Effect::empty();
        match t {
            ITerm::Unit => Ok((IType::Unit1, none)),
            ITerm::Var(x) => self
                .env
                .iter()
                .rev()
                .find(|(n, _)| n == x)
                .map(|(_, a)| (a.clone(), none))
                .ok_or_else(|| ITypeError::Unbound(x.clone())),
            ITerm::RegionConst(r) => {
                let (_, a) =
                    self.regions.iter().find(|(n, _)| n == r).ok_or_else(|| ITypeError::UndeclaredRegion(r.clone()))?;
                Ok((IType::region_ref(r.clone(), a.clone()), none))
            }
            ITerm::Lam { param, ty: Some(a), body } => {
                form(self.regions, a, true, None)?;
                let (b, e) = self.under(param, a.clone(), |c| c.synth(body))?;
                Ok((IType::arrow(a.clone(), e, b), none))
            }
            ITerm::Lam { param, ty: None, .. } => Err(ITypeError::Unannotated(param.clone())),
            ITerm::App(f, arg) => {
                if let ITerm::Lam { param, ty: None, body } = &**f {
                    let (a, e3) = self.synth(arg)?;
                    if a == IType::Behaviour {
                        return Err(ITypeError::BehaviourInValueType);
                    }
                    let (b, e2) = self.under(param, a, |c| c.synth(body))?;
                    return Ok((b, e2.union(&e3)));
                }
                let (ft, e1) = self.synth(f)?;
                let IType::Arrow(dom, e2, cod) = ft else {
                    return Err(ITypeError::ExpectedArrow(ft));
                };
                let (a, e3) = self.synth(arg)?;
                self.expect(&dom, a)?;
                Ok((*cod, e1.union(&e2).union(&e3)))
            }
            ITerm::Get(v) => {
                let (r, a) = self.address(v)?;
                Ok((a, Effect::single(r)))
            }
            ITerm::PSet(v, w) => {
                let (r, a) = self.address(v)?;
                let b = self.value(w)?;
                self.expect(&a, b)?;
                Ok((IType::Unit1, Effect::single(r)))
            }
            ITerm::PStore(r, v) => {
                let (_, a) =
                    self.regions.iter().find(|(n, _)| n == r).ok_or_else(|| ITypeError::UndeclaredRegion(r.clone()))?;
                let a = a.clone();
                let b = self.value(v)?;
                self.expect(&a, b)?;
                Ok((IType::Behaviour, none))
            }
            ITerm::Par(p, q) => {
                let (a, ea) = self.synth(p)?;
                let (b, eb) = self.synth(q)?;
                Ok(match (p.is_store_like(), q.is_store_like()) {
                    (true, true) => (IType::Behaviour, none),
                    (false, true) => (a, ea),
                    (true, false) => (b, eb),
                    (false, false) => (IType::Behaviour, ea.union(&eb)),
                })
            }
        }
    }
}

/// Synthesizes the type and effect of a closed target program.
pub fn i_typecheck(regions: &[(Region, IType)], term: &ITerm) -> Result<(IType, Effect), ITypeError> {
    i_typecheck_in(regions, &[], term)
}

/// As [`i_typecheck`], with a context of free variables.
pub fn i_typecheck_in(
    regions: &[(Region, IType)],
    vars: &[(Name, IType)],
    term: &ITerm,
) -> Result<(IType, Effect), ITypeError> {
    i_form_regions(regions)?;
    for (_, a) in vars {
        form(regions, a, true, None)?;
    }
    let mut c = Checker { regions, dom: regions.iter().map(|(r, _)| r.clone()).collect(), env: vars.to_vec() };
    c.synth(term)
}
