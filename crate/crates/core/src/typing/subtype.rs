//! Subtyping induced by effect containment.

use crate::syntax::{Effect, Type};

/// `a ≤ b` under a region signature whose domain is `dom`.
///
/// Reflexive on every type; `!` is covariant; arrows are contravariant in
/// the domain, covariant in the codomain and require `e ⊆ e' ⊆ dom`;
/// address types are related only to themselves.
pub fn subtype(dom: &Effect, a: &Type, b: &Type) -> bool {
    if a == b {
        return true;
    }
    match (a, b) {
        (Type::Bang(a), Type::Bang(b)) => subtype(dom, a, b),
        (Type::Arrow(a1, e1, b1), Type::Arrow(a2, e2, b2)) => {
            e1.is_subset(e2) && e2.is_subset(dom) && subtype(dom, a2, a1) && subtype(dom, b1, b2)
        }
        _ => false,
    }
}

/// `(α, e) ≤ (α', e')` iff `α ≤ α'` and `e ⊆ e' ⊆ dom`.
pub fn subtype_pair(dom: &Effect, a: (&Type, &Effect), b: (&Type, &Effect)) -> bool {
    subtype(dom, a.0, b.0) && a.1.is_subset(b.1) && b.1.is_subset(dom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Region;

    fn eff(rs: &[&str]) -> Effect {
        rs.iter().map(|r| Region::new(r)).collect()
    }

    fn arr(rs: &[&str]) -> Type {
        Type::arrow(Type::One, eff(rs), Type::One)
    }

    #[test]
    fn effect_containment() {
        let dom = eff(&["r", "s"]);
        assert!(subtype(&dom, &arr(&["r"]), &arr(&["r", "s"])));
        assert!(!subtype(&dom, &arr(&["r", "s"]), &arr(&["r"])));
        assert!(!subtype(&eff(&["r"]), &arr(&["r"]), &arr(&["r", "s"])));
    }

    #[test]
    fn variance() {
        let dom = eff(&["r"]);
        // (1 -{r}> 1) -o 1  ≤  (1 -o 1) -o 1
        let a = Type::lolli(arr(&["r"]), Type::One);
        let b = Type::lolli(arr(&[]), Type::One);
        assert!(subtype(&dom, &a, &b));
        assert!(!subtype(&dom, &b, &a));
        assert!(subtype(&dom, &Type::bang(arr(&[])), &Type::bang(arr(&["r"]))));
        let reg = |t| Type::reg(Region::new("r"), t);
        assert!(!subtype(&dom, &reg(arr(&[])), &reg(arr(&["r"]))));
    }

    #[test]
    fn pairs() {
        let dom = eff(&["r"]);
        assert!(subtype_pair(&dom, (&Type::One, &eff(&[])), (&Type::One, &eff(&["r"]))));
        assert!(!subtype_pair(&dom, (&Type::One, &eff(&["r"])), (&Type::One, &eff(&[]))));
    }
}
