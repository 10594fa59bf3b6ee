//! Value-types, behaviours and latent effects.

use std::collections::BTreeSet;
use std::fmt;

use super::Region;

/// A finite set of regions a term may read or write.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Effect(BTreeSet<Region>);

impl Effect {
    pub fn empty() -> Self {
        Effect(BTreeSet::new())
    }

    pub fn single(r: Region) -> Self {
        Effect(BTreeSet::from([r]))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, r: &Region) -> bool {
        self.0.contains(r)
    }

    pub fn insert(&mut self, r: Region) {
        self.0.insert(r);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Region> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn union(&self, other: &Effect) -> Effect {
        Effect(self.0.union(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &Effect) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl FromIterator<Region> for Effect {
    fn from_iter<I: IntoIterator<Item = Region>>(iter: I) -> Self {
        Effect(iter.into_iter().collect())
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("}")
    }
}

/// Types of the calculus. `Behaviour` is the type of programs that do not
/// return a value; every other constructor is a value-type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    One,
    Behaviour,
    Bang(Box<Type>),
    Reg(Region, Box<Type>),
    Arrow(Box<Type>, Effect, Box<Type>),
}

impl Type {
    pub fn bang(t: Type) -> Type {
        Type::Bang(Box::new(t))
    }

    pub fn reg(r: Region, t: Type) -> Type {
        Type::Reg(r, Box::new(t))
    }

    pub fn arrow(dom: Type, eff: Effect, cod: Type) -> Type {
        Type::Arrow(Box::new(dom), eff, Box::new(cod))
    }

    /// Arrow with an empty latent effect (`A -o B`).
    pub fn lolli(dom: Type, cod: Type) -> Type {
        Type::arrow(dom, Effect::empty(), cod)
    }

    pub fn is_value_type(&self) -> bool {
        !matches!(self, Type::Behaviour)
    }

    /// The region of an address type, if this is one.
    pub fn region(&self) -> Option<(&Region, &Type)> {
        match self {
            Type::Reg(r, a) => Some((r, a)),
            _ => None,
        }
    }

    /// Copy of the type with every latent effect removed.
    pub fn erase_effects(&self) -> Type {
        match self {
            Type::One | Type::Behaviour => self.clone(),
            Type::Bang(a) => Type::bang(a.erase_effects()),
            Type::Reg(r, a) => Type::reg(r.clone(), a.erase_effects()),
            Type::Arrow(a, _, b) => Type::lolli(a.erase_effects(), b.erase_effects()),
        }
    }

    /// Every region named by the type, either as an address region or in
    /// a latent effect.
    pub fn regions(&self) -> BTreeSet<Region> {
        let mut out = BTreeSet::new();
        self.collect_regions(&mut out);
        out
    }

    fn collect_regions(&self, out: &mut BTreeSet<Region>) {
        match self {
            Type::One | Type::Behaviour => {}
            Type::Bang(a) => a.collect_regions(out),
            Type::Reg(r, a) => {
                out.insert(r.clone());
                a.collect_regions(out);
            }
            Type::Arrow(a, e, b) => {
                a.collect_regions(out);
                out.extend(e.iter().cloned());
                b.collect_regions(out);
            }
        }
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Arrow(..) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::One => f.write_str("1"),
            Type::Behaviour => f.write_str("B"),
            Type::Bang(a) => {
                f.write_str("!")?;
                a.fmt_atom(f)
            }
            Type::Reg(r, a) => {
                write!(f, "Reg {r} ")?;
                a.fmt_atom(f)
            }
            Type::Arrow(a, e, b) => {
                a.fmt_atom(f)?;
                if e.is_empty() {
                    f.write_str(" -o ")?;
                } else {
                    f.write_str(" -")?;
                    write!(f, "{e}")?;
                    f.write_str("> ")?;
                }
                write!(f, "{b}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Region {
        Region::new(s)
    }

    #[test]
    fn display_nests_arrows_to_the_right() {
        let t = Type::lolli(Type::bang(Type::reg(r("r"), Type::One)), Type::Behaviour);
        assert_eq!(t.to_string(), "!Reg r 1 -o B");
        let curried = Type::lolli(
            Type::lolli(Type::One, Type::One),
            Type::lolli(Type::One, Type::One),
        );
        assert_eq!(curried.to_string(), "(1 -o 1) -o 1 -o 1");
    }

    #[test]
    fn display_effects() {
        let e: Effect = [r("s"), r("r")].into_iter().collect();
        let t = Type::bang(Type::arrow(Type::One, e, Type::One));
        assert_eq!(t.to_string(), "!(1 -{r,s}> 1)");
    }

    #[test]
    fn erase_drops_latent_effects() {
        let t = Type::reg(r("r"), Type::bang(Type::arrow(Type::One, Effect::single(r("r")), Type::One)));
        assert_eq!(t.erase_effects().to_string(), "Reg r !(1 -o 1)");
        assert_eq!(t.regions().len(), 1);
    }
}
