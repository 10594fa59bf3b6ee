//! Formation of region contexts and types.
//!
//! Unstratified: every `Reg r B` must have `B` equal to the declared content
//! of `r`, and every latent effect must name declared regions. Stratified:
//! the content of each region may only mention regions declared strictly
//! before it.

use thiserror::Error;

use crate::surface::RegionDecl;
use crate::syntax::{Region, Type};
use crate::usage::Family;

use super::Mode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormationError {
    #[error("undeclared region `{0}`")]
    UndeclaredRegion(Region),
    #[error("`Reg {region} {found}` does not match the declared content `{expected}` of `{region}`")]
    ContentMismatch { region: Region, expected: Type, found: Type },
    #[error("region `{0}` refers to itself in its own content type")]
    SelfReference(Region),
    #[error("region `{region}` refers to `{referenced}`, which is not declared before it")]
    ForwardReference { region: Region, referenced: Region },
    #[error("behaviour type `B` used where a value type is required in `{0}`")]
    BehaviourInValueType(Type),
    #[error("region `{0}` uses family exp, which is not allowed when confluence is required")]
    ExpInConfluent(Region),
    #[error("stratified checking requires the effects system")]
    StratifiedBase,
}

/// Checks that `ty` is a well-formed value type over the regions `visible`.
pub fn check_value_type(visible: &[RegionDecl], ty: &Type) -> Result<(), FormationError> {
    if *ty == Type::Behaviour {
        return Err(FormationError::BehaviourInValueType(ty.clone()));
    }
    check_type(visible, ty)
}

/// Checks a type, allowing `B` only as an arrow codomain or at the top.
pub fn check_type(visible: &[RegionDecl], ty: &Type) -> Result<(), FormationError> {
    let lookup = |r: &Region| visible.iter().find(|d| &d.name == r);
    match ty {
        Type::One | Type::Behaviour => Ok(()),
        Type::Bang(a) => check_value_type(visible, a).map_err(|e| wrap_behaviour(e, ty)),
        Type::Reg(r, a) => {
            let decl = lookup(r).ok_or_else(|| FormationError::UndeclaredRegion(r.clone()))?;
            if **a != decl.content {
                return Err(FormationError::ContentMismatch {
                    region: r.clone(),
                    expected: decl.content.clone(),
                    found: (**a).clone(),
                });
            }
            check_value_type(visible, a).map_err(|e| wrap_behaviour(e, ty))
        }
        Type::Arrow(a, e, b) => {
            for r in e.iter() {
                lookup(r).ok_or_else(|| FormationError::UndeclaredRegion(r.clone()))?;
            }
            check_value_type(visible, a).map_err(|e| wrap_behaviour(e, ty))?;
            check_type(visible, b)
        }
    }
}

fn wrap_behaviour(e: FormationError, outer: &Type) -> FormationError {
    match e {
        FormationError::BehaviourInValueType(_) => FormationError::BehaviourInValueType(outer.clone()),
        other => other,
    }
}

/// Checks the region preamble under `mode`.
pub fn form_region_context(decls: &[RegionDecl], mode: Mode) -> Result<(), FormationError> {
    if mode.stratified && !mode.has_effects() {
        return Err(FormationError::StratifiedBase);
    }
    for (i, d) in decls.iter().enumerate() {
        if mode.confluent && d.family == Family::Exp {
            return Err(FormationError::ExpInConfluent(d.name.clone()));
        }
        if mode.stratified {
            let earlier = &decls[..i];
            for r in d.content.regions() {
                if r == d.name {
                    return Err(FormationError::SelfReference(r));
                }
                if !earlier.iter().any(|e| e.name == r) {
                    return Err(FormationError::ForwardReference { region: d.name.clone(), referenced: r });
                }
            }
            check_value_type(earlier, &d.content)?;
        } else {
            check_value_type(decls, &d.content)?;
        }
    }
    Ok(())
}
