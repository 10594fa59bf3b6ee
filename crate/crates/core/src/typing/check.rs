//! Bottom-up synthesis of types, effects and usages.
//!
//! Each subterm reports the hypotheses it actually uses, so context
//! splitting is the sum of the children's maps and weakening is implicit.

use std::borrow::Cow;

use crate::surface::{RegionDecl, SourceFile};
use crate::syntax::{Effect, Name, Region, Term, Type, Var, Volatility};
use crate::usage::{check_not_aff, Family, Mult, RegionUsage, UsageMap};

use super::formation::{check_value_type, form_region_context};
use super::subtype::subtype;
use super::{Diagnostic, Mode, TypeErrorKind, TypeErrors, TypingReport, MAX_DIAGNOSTICS};

/// How a variable was bound, which fixes the multiplicity an occurrence
/// contributes.
#[derive(Clone, Copy, Debug)]
enum Origin {
    Lambda,
    LetBang,
    /// Restriction binders are checked as intuitionistic; the reported
    /// multiplicity is inferred separately from the occurrences.
    Nu,
    Declared(Mult),
}

impl Origin {
    fn mult(self) -> Mult {
        match self {
            Origin::Lambda => Mult::One,
            Origin::LetBang | Origin::Nu => Mult::Inf,
            Origin::Declared(m) => m,
        }
    }
}

struct Judgement {
    ty: Type,
    eff: Effect,
    usage: UsageMap,
    decorated: Term,
}

type Synth = Result<Judgement, Vec<Diagnostic>>;

struct Checker<'a> {
    regions: &'a [RegionDecl],
    mode: Mode,
    dom: Effect,
    env: Vec<(Name, Type, Origin)>,
    path: Vec<&'static str>,
    binder_usages: Vec<(Name, Mult)>,
}

impl Checker<'_> {
    fn diag(&self, kind: TypeErrorKind) -> Vec<Diagnostic> {
        vec![Diagnostic { path: self.path.join("/"), kind }]
    }

    fn region(&self, r: &Region) -> Result<&RegionDecl, Vec<Diagnostic>> {
        self.regions
            .iter()
            .find(|d| &d.name == r)
            .ok_or_else(|| self.diag(super::FormationError::UndeclaredRegion(r.clone()).into()))
    }

    fn effect_of(&self, r: &Region) -> Effect {
        if self.mode.has_effects() {
            Effect::single(r.clone())
        } else {
            Effect::empty()
        }
    }

    fn lookup(&self, x: &Name) -> Result<(Type, Origin), Vec<Diagnostic>> {
        self.env
            .iter()
            .rev()
            .find(|(n, _, _)| n == x)
            .map(|(_, t, o)| (t.clone(), *o))
            .ok_or_else(|| self.diag(TypeErrorKind::Unbound(x.clone())))
    }

    fn sum(&self, a: &UsageMap, b: &UsageMap) -> Result<UsageMap, Vec<Diagnostic>> {
        a.msum(b).map_err(|c| self.diag(TypeErrorKind::UsageClash(c)))
    }

    fn nested<T>(&mut self, seg: &'static str, f: impl FnOnce(&mut Self) -> T) -> T {
        self.path.push(seg);
        let r = f(self);
        self.path.pop();
        r
    }

    fn binding<T>(&mut self, x: &Name, ty: Type, origin: Origin, f: impl FnOnce(&mut Self) -> T) -> T {
        self.env.push((x.clone(), ty, origin));
        let r = f(self);
        self.env.pop();
        r
    }

    fn formed(&self, ty: &Type) -> Result<(), Vec<Diagnostic>> {
        check_value_type(self.regions, ty).map_err(|e| self.diag(e.into()))
    }

    /// An occurrence of `x` used as an address: its type, region, and the
    /// usage of the variable itself.
    fn address(&self, x: &Var) -> Result<(Region, Type, UsageMap, Var), Vec<Diagnostic>> {
        let (ty, origin) = self.lookup(&x.name)?;
        let Type::Reg(r, content) = ty else {
            return Err(self.diag(TypeErrorKind::ExpectedRegion(ty)));
        };
        let mut u = UsageMap::new();
        u.add_var(x.name.clone(), origin.mult()).map_err(|c| self.diag(TypeErrorKind::UsageClash(c)))?;
        Ok((r.clone(), *content, u, Var::decorated(x.name.clone(), r)))
    }

    fn synth(&mut self, t: &Term, is_static: bool) -> Synth {
        match t {
            Term::Unit => Ok(Judgement { ty: Type::One, eff: Effect::empty(), usage: UsageMap::new(), decorated: Term::Unit }),
            Term::Var(v) => {
                let (ty, origin) = self.lookup(&v.name)?;
                let mut usage = UsageMap::new();
                usage.add_var(v.name.clone(), origin.mult()).expect("fresh map");
                let decorated = match &ty {
                    Type::Reg(r, _) => Term::Var(Var::decorated(v.name.clone(), r.clone())),
                    _ => Term::Var(Var::new(v.name.clone())),
                };
                Ok(Judgement { ty, eff: Effect::empty(), usage, decorated })
            }
            Term::Lam { param, ty, body } => {
                self.formed(ty)?;
                let mut j = self.nested("lam", |c| c.binding(param, ty.clone(), Origin::Lambda, |c| c.synth(body, false)))?;
                j.usage.remove_var(param);
                let eff = if self.mode.has_effects() { j.eff } else { Effect::empty() };
                Ok(Judgement {
                    ty: Type::arrow(ty.clone(), eff, j.ty),
                    eff: Effect::empty(),
                    usage: j.usage,
                    decorated: Term::Lam { param: param.clone(), ty: ty.clone(), body: Box::new(j.decorated) },
                })
            }
            Term::App(f, a) => {
                let jf = self.nested("app.fn", |c| c.synth(f, false));
                let ja = self.nested("app.arg", |c| c.synth(a, false));
                let (jf, ja) = both(jf, ja)?;
                let Type::Arrow(dom, latent, cod) = &jf.ty else {
                    return Err(self.diag(TypeErrorKind::ExpectedArrow(jf.ty)));
                };
                if !subtype(&self.dom, &ja.ty, dom) {
                    return Err(self.diag(TypeErrorKind::Mismatch { expected: (**dom).clone(), actual: ja.ty }));
                }
                let usage = self.sum(&jf.usage, &ja.usage)?;
                Ok(Judgement {
                    ty: (**cod).clone(),
                    eff: jf.eff.union(&ja.eff).union(latent),
                    usage,
                    decorated: Term::app(jf.decorated, ja.decorated),
                })
            }
            Term::Bang(m) => {
                let j = self.nested("bang", |c| c.synth(m, false))?;
                if !j.ty.is_value_type() {
                    return Err(self.diag(TypeErrorKind::ExpectedValueType(j.ty)));
                }
                let regions = self.regions;
                check_not_aff(&j.usage, |r| regions.iter().find(|d| &d.name == r).map(|d| d.volatility))
                    .map_err(|o| self.diag(TypeErrorKind::Promotion(o)))?;
                Ok(Judgement { ty: Type::bang(j.ty), eff: j.eff, usage: j.usage, decorated: Term::bang(j.decorated) })
            }
            Term::LetBang { name, bound, body } => {
                let jm = self.nested("let.bound", |c| c.synth(bound, false))?;
                let Type::Bang(inner) = &jm.ty else {
                    return Err(self.diag(TypeErrorKind::ExpectedBang(jm.ty)));
                };
                let inner = (**inner).clone();
                let mut jn =
                    self.nested("let.body", |c| c.binding(name, inner, Origin::LetBang, |c| c.synth(body, false)))?;
                jn.usage.remove_var(name);
                let usage = self.sum(&jm.usage, &jn.usage)?;
                Ok(Judgement {
                    ty: jn.ty,
                    eff: jm.eff.union(&jn.eff),
                    usage,
                    decorated: Term::LetBang {
                        name: name.clone(),
                        bound: Box::new(jm.decorated),
                        body: Box::new(jn.decorated),
                    },
                })
            }
            Term::Nu { name, region, content, body } => {
                let ty = Type::reg(region.clone(), content.clone());
                self.formed(&ty)?;
                let mut j = self.nested("nu", |c| c.binding(name, ty, Origin::Nu, |c| c.synth(body, is_static)))?;
                j.usage.remove_var(name);
                self.binder_usages.push((name.clone(), infer_nu_usage(body, name)));
                Ok(Judgement {
                    decorated: Term::Nu {
                        name: name.clone(),
                        region: region.clone(),
                        content: content.clone(),
                        body: Box::new(j.decorated),
                    },
                    ..j
                })
            }
            Term::Get(x) => {
                let (r, content, mut usage, dx) = self.address(x)?;
                let decl = self.region(&r)?;
                usage.add_region(r.clone(), RegionUsage::read(decl.family)).expect("fresh region entry");
                Ok(Judgement { ty: content, eff: self.effect_of(&r), usage, decorated: Term::Get(dx) })
            }
            Term::Set { addr, mode, value } | Term::Store { addr, mode, value } => {
                let is_store = t.is_store();
                if is_store && !is_static {
                    return Err(self.diag(TypeErrorKind::StoreInTerm));
                }
                let seg = if is_store { "store.value" } else { "set.value" };
                let (r, content, usage, dx) = self.address(addr)?;
                let decl = self.region(&r)?.clone();
                if decl.volatility != *mode {
                    return Err(self.diag(TypeErrorKind::VolatilityMismatch {
                        region: r,
                        declared: decl.volatility,
                        used: *mode,
                    }));
                }
                if *mode == Volatility::Persistent && !matches!(content, Type::Bang(_)) {
                    return Err(self.diag(TypeErrorKind::ExpectedBang(content)));
                }
                if self.mode.confluent && *mode == Volatility::Volatile && decl.family != Family::Aff {
                    return Err(self.diag(TypeErrorKind::ConfluentFamily { region: r, family: decl.family }));
                }
                let jv = self.nested(seg, |c| c.synth(value, false))?;
                if !subtype(&self.dom, &jv.ty, &content) {
                    return Err(self.diag(TypeErrorKind::Mismatch { expected: content, actual: jv.ty }));
                }
                let mut usage = self.sum(&usage, &jv.usage)?;
                usage
                    .add_region(r.clone(), RegionUsage::write(decl.family))
                    .map_err(|c| self.diag(TypeErrorKind::UsageClash(c)))?;
                let value = Box::new(jv.decorated);
                if is_store {
                    Ok(Judgement {
                        ty: Type::Behaviour,
                        eff: Effect::empty(),
                        usage,
                        decorated: Term::Store { addr: dx, mode: *mode, value },
                    })
                } else {
                    Ok(Judgement {
                        ty: Type::One,
                        eff: self.effect_of(&r).union(&jv.eff),
                        usage,
                        decorated: Term::Set { addr: dx, mode: *mode, value },
                    })
                }
            }
            Term::Par(a, b) => {
                let ja = self.nested("par.left", |c| c.synth(a, is_static));
                let jb = self.nested("par.right", |c| c.synth(b, is_static));
                let (ja, jb) = both(ja, jb)?;
                let usage = self.sum(&ja.usage, &jb.usage)?;
                let (ty, eff) = match (a.is_store_like(), b.is_store_like()) {
                    (true, true) => (Type::Behaviour, Effect::empty()),
                    (false, true) => (ja.ty, ja.eff),
                    (true, false) => (jb.ty, jb.eff),
                    (false, false) => (Type::Behaviour, ja.eff.union(&jb.eff)),
                };
                Ok(Judgement { ty, eff, usage, decorated: Term::par(ja.decorated, jb.decorated) })
            }
        }
    }
}

/// Joins two independent results, keeping the diagnostics of both sides.
fn both(a: Synth, b: Synth) -> Result<(Judgement, Judgement), Vec<Diagnostic>> {
    match (a, b) {
        (Ok(a), Ok(b)) => Ok((a, b)),
        (Err(mut e), Err(f)) => {
            e.extend(f);
            e.truncate(MAX_DIAGNOSTICS);
            Err(e)
        }
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// `∞` if the bound address occurs twice or under `!`, else `1`.
fn infer_nu_usage(body: &Term, x: &Name) -> Mult {
    fn go(t: &Term, x: &Name, under_bang: bool, count: &mut usize, banged: &mut bool) {
        let hit = |v: &Var, count: &mut usize, banged: &mut bool| {
            if &v.name == x {
                *count += 1;
                *banged |= under_bang;
            }
        };
        match t {
            Term::Unit => {}
            Term::Var(v) | Term::Get(v) => hit(v, count, banged),
            Term::Set { addr, value, .. } | Term::Store { addr, value, .. } => {
                hit(addr, count, banged);
                go(value, x, under_bang, count, banged);
            }
            Term::Lam { param: y, body, .. } | Term::Nu { name: y, body, .. } => {
                if y != x {
                    go(body, x, under_bang, count, banged);
                }
            }
            Term::LetBang { name, bound, body } => {
                go(bound, x, under_bang, count, banged);
                if name != x {
                    go(body, x, under_bang, count, banged);
                }
            }
            Term::App(a, b) | Term::Par(a, b) => {
                go(a, x, under_bang, count, banged);
                go(b, x, under_bang, count, banged);
            }
            Term::Bang(m) => go(m, x, true, count, banged),
        }
    }
    let (mut count, mut banged) = (0, false);
    go(body, x, false, &mut count, &mut banged);
    if count >= 2 || banged {
        Mult::Inf
    } else {
        Mult::One
    }
}

fn erase_file(file: &SourceFile) -> SourceFile {
    fn erase_term(t: &Term) -> Term {
        match t {
            Term::Unit | Term::Var(_) | Term::Get(_) => t.clone(),
            Term::Lam { param, ty, body } => {
                Term::Lam { param: param.clone(), ty: ty.erase_effects(), body: Box::new(erase_term(body)) }
            }
            Term::App(a, b) => Term::app(erase_term(a), erase_term(b)),
            Term::Par(a, b) => Term::par(erase_term(a), erase_term(b)),
            Term::Bang(m) => Term::bang(erase_term(m)),
            Term::LetBang { name, bound, body } => Term::LetBang {
                name: name.clone(),
                bound: Box::new(erase_term(bound)),
                body: Box::new(erase_term(body)),
            },
            Term::Nu { name, region, content, body } => Term::Nu {
                name: name.clone(),
                region: region.clone(),
                content: content.erase_effects(),
                body: Box::new(erase_term(body)),
            },
            Term::Set { addr, mode, value } => {
                Term::Set { addr: addr.clone(), mode: *mode, value: Box::new(erase_term(value)) }
            }
            Term::Store { addr, mode, value } => {
                Term::Store { addr: addr.clone(), mode: *mode, value: Box::new(erase_term(value)) }
            }
        }
    }
    let mut out = file.clone();
    for r in &mut out.regions {
        r.content = r.content.erase_effects();
    }
    for v in &mut out.vars {
        v.ty = v.ty.erase_effects();
    }
    out.program = erase_term(&file.program);
    out
}

/// Typechecks `file` under `mode`.
///
/// In the base system every latent effect of the file is erased first and
/// all synthesized effects are empty.
pub fn typecheck(file: &SourceFile, mode: Mode) -> Result<TypingReport, TypeErrors> {
    let file: Cow<SourceFile> = if mode.has_effects() { Cow::Borrowed(file) } else { Cow::Owned(erase_file(file)) };
    let single = |kind: TypeErrorKind| TypeErrors(vec![Diagnostic { path: String::new(), kind }]);
    form_region_context(&file.regions, mode).map_err(|e| single(e.into()))?;
    for v in &file.vars {
        check_value_type(&file.regions, &v.ty).map_err(|e| single(e.into()))?;
    }
    let mut checker = Checker {
        regions: &file.regions,
        mode,
        dom: file.regions.iter().map(|d| d.name.clone()).collect(),
        env: file.vars.iter().map(|v| (v.name.clone(), v.ty.clone(), Origin::Declared(v.usage))).collect(),
        path: Vec::new(),
        binder_usages: Vec::new(),
    };
    let j = checker.synth(&file.program, true).map_err(TypeErrors)?;
    let warnings = file
        .regions
        .iter()
        .filter(|d| d.volatility == Volatility::Volatile && d.family == Family::Exp)
        .map(|d| format!("region `{}` is volatile with family exp: promotion over its reads is impossible", d.name))
        .collect();
    Ok(TypingReport {
        ty: j.ty,
        effect: j.eff,
        usages: j.usage,
        decorated: j.decorated,
        regions: file.regions.iter().map(|d| (d.name.clone(), d.family)).collect(),
        vars: file.vars.iter().map(|v| v.name.clone()).collect(),
        binder_usages: checker.binder_usages,
        warnings,
    })
}
