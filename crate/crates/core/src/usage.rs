//! Usage algebra: partial sums of multiplicities for variables and of
//! ⟨output, input⟩ pairs for regions, plus the affinity predicate used by
//! promotion.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Name, Region, Volatility};

/// Variable multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mult {
    Zero,
    One,
    Inf,
}

impl Mult {
    pub const ALL: [Mult; 3] = [Mult::Zero, Mult::One, Mult::Inf];

    /// `x ⊎ 0 = 0 ⊎ x = x`, `∞ ⊎ ∞ = ∞`, undefined otherwise.
    pub fn sum(self, other: Mult) -> Option<Mult> {
        match (self, other) {
            (Mult::Zero, x) | (x, Mult::Zero) => Some(x),
            (Mult::Inf, Mult::Inf) => Some(Mult::Inf),
            _ => None,
        }
    }
}

impl fmt::Display for Mult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mult::Zero => "0",
            Mult::One => "1",
            Mult::Inf => "inf",
        })
    }
}

/// One of the three closed sets of region usages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Aff,
    Wo,
    Exp,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Aff, Family::Wo, Family::Exp];

    pub fn members(self) -> &'static [(Mult, Mult)] {
        use Mult::*;
        match self {
            Family::Aff => &[(Zero, Zero), (One, Zero), (Zero, One), (One, One)],
            Family::Wo => &[(One, Inf), (Zero, Inf)],
            Family::Exp => &[(Inf, Inf)],
        }
    }

    pub fn contains(self, out: Mult, inp: Mult) -> bool {
        self.members().contains(&(out, inp))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Aff => "aff",
            Family::Wo => "wo",
            Family::Exp => "exp",
        })
    }
}

/// A region usage `⟨out, in⟩` tagged with its family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionUsage {
    pub out: Mult,
    pub inp: Mult,
    pub family: Family,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum UsageError {
    #[error("usages {left} and {right} belong to different families")]
    FamilyMismatch { left: RegionUsage, right: RegionUsage },
    #[error("usages {left} and {right} cannot be summed")]
    ComponentClash { left: RegionUsage, right: RegionUsage },
    #[error("<{out},{inp}> is not a member of family {family}")]
    NotMember { out: Mult, inp: Mult, family: Family },
}

impl RegionUsage {
    pub fn new(out: Mult, inp: Mult, family: Family) -> Result<Self, UsageError> {
        if family.contains(out, inp) {
            Ok(RegionUsage { out, inp, family })
        } else {
            Err(UsageError::NotMember { out, inp, family })
        }
    }

    /// Every usage of every family (seven in total).
    pub fn all() -> Vec<RegionUsage> {
        Family::ALL
            .iter()
            .flat_map(|&family| family.members().iter().map(move |&(out, inp)| RegionUsage { out, inp, family }))
            .collect()
    }

    pub fn neutral(family: Family) -> Self {
        let (out, inp) = match family {
            Family::Aff => (Mult::Zero, Mult::Zero),
            Family::Wo => (Mult::Zero, Mult::Inf),
            Family::Exp => (Mult::Inf, Mult::Inf),
        };
        RegionUsage { out, inp, family }
    }

    /// Smallest member allowing a read (`v' ≠ 0`).
    pub fn read(family: Family) -> Self {
        let (out, inp) = match family {
            Family::Aff => (Mult::Zero, Mult::One),
            Family::Wo => (Mult::Zero, Mult::Inf),
            Family::Exp => (Mult::Inf, Mult::Inf),
        };
        RegionUsage { out, inp, family }
    }

    /// Smallest member allowing a write (`v ≠ 0`).
    pub fn write(family: Family) -> Self {
        let (out, inp) = match family {
            Family::Aff => (Mult::One, Mult::Zero),
            Family::Wo => (Mult::One, Mult::Inf),
            Family::Exp => (Mult::Inf, Mult::Inf),
        };
        RegionUsage { out, inp, family }
    }

    pub fn is_neutral(&self) -> bool {
        *self == RegionUsage::neutral(self.family)
    }
}

impl fmt::Display for RegionUsage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}> {}", self.out, self.inp, self.family)
    }
}

pub fn usum(a: RegionUsage, b: RegionUsage) -> Result<RegionUsage, UsageError> {
    if a.family != b.family {
        return Err(UsageError::FamilyMismatch { left: a, right: b });
    }
    let clash = UsageError::ComponentClash { left: a, right: b };
    let out = a.out.sum(b.out).ok_or(clash)?;
    let inp = a.inp.sum(b.inp).ok_or(clash)?;
    RegionUsage::new(out, inp, a.family).map_err(|_| clash)
}

/// Failure of a map sum, naming the offending key.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapClash {
    #[error("variable `{name}` used with multiplicities {left} and {right}")]
    Var { name: Name, left: Mult, right: Mult },
    #[error("region `{region}`: {reason}")]
    Region { region: Region, reason: UsageError },
}

/// Usages of the hypotheses a term actually uses. Absent variables have
/// multiplicity 0 and absent regions the neutral usage of their family.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UsageMap {
    vars: BTreeMap<Name, Mult>,
    regions: BTreeMap<Region, RegionUsage>,
}

impl UsageMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(&self, x: &Name) -> Mult {
        self.vars.get(x).copied().unwrap_or(Mult::Zero)
    }

    pub fn region(&self, r: &Region) -> Option<RegionUsage> {
        self.regions.get(r).copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = (&Name, Mult)> {
        self.vars.iter().map(|(n, m)| (n, *m))
    }

    pub fn regions(&self) -> impl Iterator<Item = (&Region, RegionUsage)> {
        self.regions.iter().map(|(r, u)| (r, *u))
    }

    pub fn uses_var(&self, x: &Name) -> bool {
        self.vars.contains_key(x)
    }

    pub fn add_var(&mut self, x: Name, m: Mult) -> Result<(), MapClash> {
        let left = self.var(&x);
        let sum = left.sum(m).ok_or_else(|| MapClash::Var { name: x.clone(), left, right: m })?;
        self.vars.insert(x, sum);
        Ok(())
    }

    pub fn add_region(&mut self, r: Region, u: RegionUsage) -> Result<(), MapClash> {
        let sum = match self.regions.get(&r) {
            None => u,
            Some(&left) => usum(left, u).map_err(|reason| MapClash::Region { region: r.clone(), reason })?,
        };
        self.regions.insert(r, sum);
        Ok(())
    }

    /// Removes a discharged variable, returning its accumulated usage.
    pub fn remove_var(&mut self, x: &Name) -> Mult {
        self.vars.remove(x).unwrap_or(Mult::Zero)
    }

    pub fn msum(&self, other: &UsageMap) -> Result<UsageMap, MapClash> {
        let mut out = self.clone();
        for (x, m) in other.vars() {
            out.add_var(x.clone(), m)?;
        }
        for (r, u) in other.regions() {
            out.add_region(r.clone(), u)?;
        }
        Ok(out)
    }
}

/// A hypothesis as seen by the affinity predicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hyp {
    Var(Mult),
    Region(RegionUsage, Volatility),
}

/// `aff(x:(u,A))` iff `u = 1`; `aff(r:(⟨v,v'⟩,A))` iff `1 ∈ {v,v'}` or the
/// region is volatile and `v' ≠ 0`.
pub fn is_aff_hyp(h: Hyp) -> bool {
    match h {
        Hyp::Var(m) => m == Mult::One,
        Hyp::Region(u, vol) => {
            u.out == Mult::One || u.inp == Mult::One || (vol == Volatility::Volatile && u.inp != Mult::Zero)
        }
    }
}

/// The first hypothesis that forbids promotion.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Offender {
    #[error("affine variable `{0}`")]
    Var(Name),
    #[error("affine region `{0}`")]
    Region(Region),
}

/// `¬aff` over the used hypotheses of `m`. Regions missing from
/// `volatility` are treated as persistent.
pub fn check_not_aff(m: &UsageMap, volatility: impl Fn(&Region) -> Option<Volatility>) -> Result<(), Offender> {
    for (x, u) in m.vars() {
        if u != Mult::Zero && is_aff_hyp(Hyp::Var(u)) {
            return Err(Offender::Var(x.clone()));
        }
    }
    for (r, u) in m.regions() {
        let vol = volatility(r).unwrap_or(Volatility::Persistent);
        if is_aff_hyp(Hyp::Region(u, vol)) {
            return Err(Offender::Region(r.clone()));
        }
    }
    Ok(())
}
