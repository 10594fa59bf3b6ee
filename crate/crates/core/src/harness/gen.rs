//! Random well-typed programs, built by following typing rules top-down.
//!
//! Every choice keeps the partial derivation valid: region usages are
//! drawn from a per-region budget so that all sums stay defined, affine
//! variables are used at most once, promotion only sees non-affine
//! hypotheses, and effects stay inside the budget of the enclosing arrow.
//! The result is still re-checked and regenerated on the rare miss.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::surface::{RegionDecl, SourceFile, VarDecl};
use crate::syntax::{Effect, Name, Region, Term, Type, Var, Volatility};
use crate::typing::{subtype, typecheck, Mode};
use crate::usage::{is_aff_hyp, Family, Hyp, Mult, RegionUsage};

/// Relative weights of the term constructors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights {
    pub leaf: u32,
    pub app: u32,
    pub lam: u32,
    pub let_bang: u32,
    pub seq: u32,
    pub get: u32,
    pub set: u32,
    pub nu: u32,
    pub par: u32,
    pub store: u32,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { leaf: 3, app: 3, lam: 3, let_bang: 3, seq: 2, get: 4, set: 4, nu: 1, par: 2, store: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    /// Maximum term depth; 1 or less yields `program *`.
    pub max_depth: usize,
    /// Number of regions declared for the families aff, wo and exp.
    pub regions: [usize; 3],
    pub mode: Mode,
    pub weights: Weights,
    /// Upper bound on the number of top-level threads.
    pub max_threads: usize,
}

impl GenConfig {
    pub fn new(mode: Mode, seed: u64) -> Self {
        let regions = if mode.confluent { [2, 1, 0] } else { [1, 1, 1] };
        GenConfig { seed, max_depth: 4, regions, mode, weights: Weights::default(), max_threads: 3 }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GenConfig { seed, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug)]
struct Budget {
    reads: Option<u32>,
    writes: Option<u32>,
}

#[derive(Clone, Debug)]
struct Entry {
    name: Name,
    ty: Type,
    affine: bool,
    used: bool,
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    cfg: &'a GenConfig,
    regions: Vec<RegionDecl>,
    budgets: Vec<Budget>,
    dom: Effect,
    ctx: Vec<Entry>,
    /// Affine entries below this index are invisible (we are under `!`).
    barrier: usize,
    promote: bool,
    counter: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Prod {
    Leaf,
    App,
    Lam,
    LetBang,
    Seq,
    Get,
    Set,
    Nu,
    Par,
}

impl Gen<'_> {
    fn fresh(&mut self, prefix: &str) -> Name {
        self.counter += 1;
        Name::new(&format!("{prefix}{}", self.counter))
    }

    fn effects(&self) -> bool {
        self.cfg.mode.has_effects()
    }

    fn region_index(&self, r: &Region) -> usize {
        self.regions.iter().position(|d| &d.name == r).expect("declared region")
    }

    fn random_subset(&mut self, of: &Effect) -> Effect {
        if !self.effects() {
            return Effect::empty();
        }
        let rs: Vec<Region> = of.iter().cloned().collect();
        rs.into_iter().filter(|_| self.rng.gen_bool(0.4)).collect()
    }

    fn usable(&self, i: usize) -> bool {
        let e = &self.ctx[i];
        !(e.affine && (e.used || i < self.barrier))
    }

    fn use_var(&mut self, i: usize) -> Term {
        if self.ctx[i].affine {
            self.ctx[i].used = true;
        }
        Term::Var(Var::new(self.ctx[i].name.clone()))
    }

    fn vars_matching(&self, want: &Type) -> Vec<usize> {
        (0..self.ctx.len()).filter(|&i| self.usable(i) && subtype(&self.dom, &self.ctx[i].ty, want)).collect()
    }

    /// Addresses visible with unrestricted usage, by type.
    fn shared_addresses(&self) -> Vec<Type> {
        let mut out: Vec<Type> = self
            .ctx
            .iter()
            .filter(|e| !e.affine && matches!(e.ty, Type::Reg(..)))
            .map(|e| e.ty.clone())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn can_read(&self, r: &Region) -> bool {
        let i = self.region_index(r);
        let d = &self.regions[i];
        if self.budgets[i].reads == Some(0) {
            return false;
        }
        !self.promote || !is_aff_hyp(Hyp::Region(RegionUsage::read(d.family), d.volatility))
    }

    fn can_write(&self, r: &Region) -> bool {
        let i = self.region_index(r);
        let d = &self.regions[i];
        if self.budgets[i].writes == Some(0) {
            return false;
        }
        if self.cfg.mode.confluent && d.volatility == Volatility::Volatile && d.family != Family::Aff {
            return false;
        }
        !self.promote || !is_aff_hyp(Hyp::Region(RegionUsage::write(d.family), d.volatility))
    }

    fn consume(&mut self, r: &Region, write: bool) {
        let i = self.region_index(r);
        let slot = if write { &mut self.budgets[i].writes } else { &mut self.budgets[i].reads };
        if let Some(n) = slot {
            *n -= 1;
        }
    }

    /// A random value-type, optionally allowing `B` as the final codomain.
    fn value_type(&mut self, depth: usize, eff: &Effect) -> Type {
        let addrs = self.shared_addresses();
        let mut choices = vec![(0, 4), (1, 2)];
        if depth > 0 {
            choices.extend([(2, 3), (3, 2), (4, 1)]);
        }
        if !addrs.is_empty() {
            choices.push((5, 2));
        }
        let pick = choices.choose_weighted(&mut self.rng, |c| c.1).expect("non-empty").0;
        match pick {
            0 => Type::One,
            1 => Type::bang(Type::One),
            2 => {
                let dom = self.value_type(depth - 1, eff);
                let cod = self.value_type(depth - 1, eff);
                Type::arrow(dom, self.random_subset(eff), cod)
            }
            3 => {
                let dom = self.value_type(depth - 1, eff);
                let cod = self.value_type(depth - 1, eff);
                Type::bang(Type::arrow(dom, self.random_subset(eff), cod))
            }
            4 => {
                let dom = self.value_type(depth - 1, eff);
                Type::arrow(dom, self.random_subset(eff), Type::Behaviour)
            }
            _ => addrs.choose(&mut self.rng).expect("non-empty").clone(),
        }
    }

    fn weight(&self, p: Prod) -> u32 {
        let w = &self.cfg.weights;
        match p {
            Prod::Leaf => w.leaf,
            Prod::App => w.app,
            Prod::Lam => w.lam,
            Prod::LetBang => w.let_bang,
            Prod::Seq => w.seq,
            Prod::Get => w.get,
            Prod::Set => w.set,
            Prod::Nu => w.nu,
            Prod::Par => w.par,
        }
    }

    /// Readable addresses whose content fits `want`, as context indices.
    fn readable(&self, want: &Type, eff: &Effect) -> Vec<usize> {
        (0..self.ctx.len())
            .filter(|&i| self.usable(i))
            .filter(|&i| match &self.ctx[i].ty {
                Type::Reg(r, c) => {
                    (!self.effects() || eff.contains(r)) && self.can_read(r) && subtype(&self.dom, c, want)
                }
                _ => false,
            })
            .collect()
    }

    fn writable(&self, eff: &Effect) -> Vec<usize> {
        (0..self.ctx.len())
            .filter(|&i| self.usable(i))
            .filter(|&i| match &self.ctx[i].ty {
                Type::Reg(r, _) => (!self.effects() || eff.contains(r)) && self.can_write(r),
                _ => false,
            })
            .collect()
    }

    /// Functions in scope whose codomain fits `want` and whose latent
    /// effect fits `eff`.
    fn callable(&self, want: &Type, eff: &Effect) -> Vec<usize> {
        (0..self.ctx.len())
            .filter(|&i| self.usable(i))
            .filter(|&i| match &self.ctx[i].ty {
                Type::Arrow(_, e, cod) => e.is_subset(eff) && subtype(&self.dom, cod, want),
                _ => false,
            })
            .collect()
    }

    fn bind<T>(&mut self, name: Name, ty: Type, affine: bool, f: impl FnOnce(&mut Self) -> T) -> T {
        self.ctx.push(Entry { name, ty, affine, used: false });
        let r = f(self);
        self.ctx.pop();
        r
    }

    fn promoted<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        let (b, p) = (self.barrier, self.promote);
        self.barrier = self.ctx.len();
        self.promote = true;
        let r = f(self);
        self.barrier = b;
        self.promote = p;
        r
    }

    fn address_term(&mut self, i: usize) -> Var {
        if self.ctx[i].affine {
            self.ctx[i].used = true;
        }
        Var::new(self.ctx[i].name.clone())
    }

    fn region_of(&self, i: usize) -> (Region, Type) {
        match &self.ctx[i].ty {
            Type::Reg(r, c) => (r.clone(), (**c).clone()),
            _ => unreachable!("address expected"),
        }
    }

    /// A value of type `want`, if one can be built.
    fn value(&mut self, want: &Type, depth: usize) -> Option<Term> {
        let vars = self.vars_matching(want);
        if !vars.is_empty() && self.rng.gen_bool(0.3) {
            let i = *vars.choose(&mut self.rng).expect("non-empty");
            return Some(self.use_var(i));
        }
        match want {
            Type::One => Some(Term::Unit),
            Type::Bang(a) => {
                let a = (**a).clone();
                self.promoted(|g| g.value(&a, depth)).map(Term::bang)
            }
            Type::Arrow(a, e, b) => Some(self.lambda(a, e, b, depth)),
            Type::Reg(..) | Type::Behaviour => {
                let i = *vars.choose(&mut self.rng)?;
                Some(self.use_var(i))
            }
        }
    }

    fn lambda(&mut self, a: &Type, e: &Effect, b: &Type, depth: usize) -> Term {
        let x = self.fresh("y");
        let body = self.bind(x.clone(), a.clone(), true, |g| g.term(b, e, depth.saturating_sub(1)));
        Term::Lam { param: x, ty: a.clone(), body: Box::new(body) }
    }

    /// Something of type `want` with effect inside `eff`, always succeeding.
    fn term(&mut self, want: &Type, eff: &Effect, depth: usize) -> Term {
        let mut prods = vec![Prod::Leaf];
        if depth > 0 {
            prods.extend([Prod::App, Prod::LetBang, Prod::Nu]);
            if *want == Type::One || *want == Type::Behaviour {
                prods.push(Prod::Seq);
            }
            if matches!(want, Type::Arrow(..)) {
                prods.push(Prod::Lam);
            }
            if *want == Type::Behaviour {
                prods.push(Prod::Par);
            }
        }
        if !self.readable(want, eff).is_empty() {
            prods.push(Prod::Get);
        }
        if *want == Type::One && !self.writable(eff).is_empty() {
            prods.push(Prod::Set);
        }
        let weighted: Vec<(Prod, u32)> = prods.iter().map(|&p| (p, self.weight(p))).collect();
        let p = weighted.choose_weighted(&mut self.rng, |c| c.1).map(|c| c.0).unwrap_or(Prod::Leaf);
        match p {
            Prod::Leaf => self.leaf(want, eff, depth),
            Prod::Lam => {
                let Type::Arrow(a, e, b) = want else { unreachable!() };
                self.lambda(a, e, b, depth)
            }
            Prod::App => {
                let heads = self.callable(want, eff);
                if !heads.is_empty() && self.rng.gen_bool(0.5) {
                    let i = *heads.choose(&mut self.rng).expect("non-empty");
                    let Type::Arrow(a, _, _) = self.ctx[i].ty.clone() else { unreachable!() };
                    let f = self.use_var(i);
                    let arg = self.term(&a, eff, depth - 1);
                    return Term::app(f, arg);
                }
                let a = self.value_type(1, eff);
                let x = self.fresh("y");
                let body = self.bind(x.clone(), a.clone(), true, |g| g.term(want, eff, depth - 1));
                let arg = self.term(&a, eff, depth - 1);
                Term::app(Term::Lam { param: x, ty: a, body: Box::new(body) }, arg)
            }
            Prod::LetBang => {
                let a = self.value_type(1, eff);
                let bound = self.term(&Type::bang(a.clone()), eff, depth - 1);
                let x = self.fresh("f");
                let body = self.bind(x.clone(), a, false, |g| g.term(want, eff, depth - 1));
                Term::LetBang { name: x, bound: Box::new(bound), body: Box::new(body) }
            }
            Prod::Seq => {
                let first = self.term(&Type::One, eff, depth - 1);
                let then = self.term(want, eff, depth - 1);
                Term::seq(first, then)
            }
            Prod::Nu => {
                let d = self.regions.choose(&mut self.rng).expect("regions exist").clone();
                let x = self.fresh("n");
                let ty = Type::reg(d.name.clone(), d.content.clone());
                let body = self.bind(x.clone(), ty, false, |g| g.term(want, eff, depth - 1));
                Term::Nu { name: x, region: d.name, content: d.content, body: Box::new(body) }
            }
            Prod::Par => {
                let a = self.thread_type(eff);
                let b = self.thread_type(eff);
                let l = self.term(&a, eff, depth - 1);
                let r = self.term(&b, eff, depth - 1);
                Term::par(l, r)
            }
            Prod::Get => {
                let cands = self.readable(want, eff);
                let i = *cands.choose(&mut self.rng).expect("non-empty");
                let (r, _) = self.region_of(i);
                self.consume(&r, false);
                Term::Get(self.address_term(i))
            }
            Prod::Set => {
                let cands = self.writable(eff);
                let i = *cands.choose(&mut self.rng).expect("non-empty");
                let (r, content) = self.region_of(i);
                let d = self.regions[self.region_index(&r)].clone();
                self.consume(&r, true);
                let addr = self.address_term(i);
                let Some(v) = self.value(&content, depth.saturating_sub(1)) else {
                    return self.leaf(want, eff, depth);
                };
                Term::Set { addr, mode: d.volatility, value: Box::new(v) }
            }
        }
    }

    fn leaf(&mut self, want: &Type, eff: &Effect, depth: usize) -> Term {
        let vars = self.vars_matching(want);
        if !vars.is_empty() && self.rng.gen_bool(0.5) {
            let i = *vars.choose(&mut self.rng).expect("non-empty");
            return self.use_var(i);
        }
        match want {
            Type::One => Term::Unit,
            Type::Behaviour => Term::par(Term::Unit, Term::Unit),
            Type::Bang(a) => {
                let a = (**a).clone();
                let inner = self.promoted(|g| g.term(&a, eff, depth.saturating_sub(1)));
                Term::bang(inner)
            }
            Type::Arrow(a, e, b) => self.lambda(a, e, b, depth.min(1)),
            Type::Reg(..) => {
                let i = *vars.first().expect("address types are only chosen when an address is in scope");
                self.use_var(i)
            }
        }
    }

    fn thread_type(&mut self, eff: &Effect) -> Type {
        if self.rng.gen_bool(0.2) {
            Type::Behaviour
        } else {
            self.value_type(1, eff)
        }
    }

    fn content(&mut self, i: usize, volatility: Volatility) -> Type {
        let earlier: Vec<RegionDecl> = self.regions[..i].to_vec();
        let eff: Effect = if self.cfg.mode.stratified {
            earlier.iter().map(|d| d.name.clone()).collect()
        } else {
            self.dom.clone()
        };
        let mut choices = vec![0, 0, 1];
        if !earlier.is_empty() {
            choices.push(2);
        }
        let inner = match *choices.choose(&mut self.rng).expect("non-empty") {
            0 => Type::One,
            1 => Type::arrow(Type::One, self.random_subset(&eff), Type::One),
            _ => {
                let d = earlier.choose(&mut self.rng).expect("non-empty");
                Type::reg(d.name.clone(), d.content.clone())
            }
        };
        match volatility {
            Volatility::Persistent => Type::bang(inner),
            Volatility::Volatile => inner,
        }
    }

    fn preamble(&mut self) -> Vec<VarDecl> {
        let mut k = 0;
        for (fi, &n) in self.cfg.regions.iter().enumerate() {
            let family = Family::ALL[fi];
            if self.cfg.mode.confluent && family == Family::Exp {
                continue;
            }
            for _ in 0..n {
                let volatility = if self.cfg.mode.confluent && family == Family::Wo {
                    Volatility::Persistent
                } else if self.rng.gen_bool(0.5) {
                    Volatility::Volatile
                } else {
                    Volatility::Persistent
                };
                let name = Region::new(&format!("r{k}"));
                k += 1;
                self.regions.push(RegionDecl { name, volatility, content: Type::One, family });
            }
        }
        self.dom = self.regions.iter().map(|d| d.name.clone()).collect();
        for i in 0..self.regions.len() {
            let v = self.regions[i].volatility;
            self.regions[i].content = self.content(i, v);
            let (reads, writes) = match self.regions[i].family {
                Family::Aff => (Some(1), Some(1)),
                Family::Wo => (None, Some(1)),
                Family::Exp => (None, None),
            };
            self.budgets.push(Budget { reads, writes });
        }
        let mut vars = Vec::new();
        for d in self.regions.clone() {
            if self.rng.gen_bool(0.8) {
                let name = Name::new(&format!("a{}", &d.name.as_str()[1..]));
                let ty = Type::reg(d.name.clone(), d.content.clone());
                vars.push(VarDecl { name: name.clone(), usage: Mult::Inf, ty: ty.clone() });
                self.ctx.push(Entry { name, ty, affine: false, used: false });
            }
        }
        vars
    }

    fn program(&mut self) -> Term {
        let depth = self.cfg.max_depth - 1;
        let mut binders = Vec::new();
        if !self.regions.is_empty() {
            for _ in 0..self.rng.gen_range(0..=1) {
                let d = self.regions.choose(&mut self.rng).expect("non-empty").clone();
                let x = self.fresh("n");
                let ty = Type::reg(d.name.clone(), d.content.clone());
                self.ctx.push(Entry { name: x.clone(), ty, affine: false, used: false });
                binders.push((x, d));
            }
        }
        let eff = self.dom.clone();
        let mut parts = Vec::new();
        let stores = if self.cfg.weights.store == 0 { 0 } else { self.rng.gen_range(0..=2) };
        for _ in 0..stores {
            if let Some(s) = self.store(depth) {
                parts.push(s);
            }
        }
        let threads = self.rng.gen_range(1..=self.cfg.max_threads.max(1));
        for _ in 0..threads {
            let ty = self.thread_type(&eff);
            let t = self.term(&ty, &eff, depth);
            parts.push(t);
        }
        parts.shuffle(&mut self.rng);
        let mut program = parts.pop().expect("at least one thread");
        while let Some(p) = parts.pop() {
            program = Term::par(p, program);
        }
        for (x, d) in binders.into_iter().rev() {
            program = Term::Nu { name: x, region: d.name, content: d.content, body: Box::new(program) };
        }
        program
    }

    fn store(&mut self, depth: usize) -> Option<Term> {
        let all = self.dom.clone();
        let cands = self.writable(&all);
        let i = *cands.choose(&mut self.rng)?;
        let (r, content) = self.region_of(i);
        let mode = self.regions[self.region_index(&r)].volatility;
        self.consume(&r, true);
        let addr = self.address_term(i);
        let v = self.value(&content, depth.min(2))?;
        Some(Term::Store { addr, mode, value: Box::new(v) })
    }
}

fn attempt(cfg: &GenConfig, rng: ChaCha8Rng) -> (SourceFile, ChaCha8Rng) {
    let mut g = Gen {
        rng,
        cfg,
        regions: Vec::new(),
        budgets: Vec::new(),
        dom: Effect::empty(),
        ctx: Vec::new(),
        barrier: 0,
        promote: false,
        counter: 0,
    };
    let vars = g.preamble();
    let program = g.program();
    let file = SourceFile { regions: g.regions, vars, program };
    (file, g.rng)
}

/// Number of fresh attempts before the depth is reduced.
const ATTEMPTS: usize = 16;

/// A random file that typechecks under `config.mode`, together with the
/// number of generated candidates the typechecker rejected.
pub fn gen_typed_counted(config: &GenConfig) -> (SourceFile, usize) {
    let mut rejected = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cfg = config.clone();
    while cfg.max_depth > 1 {
        for _ in 0..ATTEMPTS {
            let (file, next) = attempt(&cfg, rng);
            rng = next;
            if typecheck(&file, cfg.mode).is_ok() {
                return (file, rejected);
            }
            rejected += 1;
        }
        cfg.max_depth -= 1;
    }
    (SourceFile::new(Term::Unit), rejected)
}

/// A random file that typechecks under `config.mode`.
pub fn gen_typed(config: &GenConfig) -> SourceFile {
    gen_typed_counted(config).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::print;

    #[test]
    fn depth_one_is_unit() {
        let cfg = GenConfig { max_depth: 1, ..GenConfig::new(Mode::effects(), 3) };
        assert_eq!(print(&gen_typed(&cfg)).trim_end(), "program *");
    }

    #[test]
    fn deterministic() {
        let cfg = GenConfig::new(Mode::stratified(), 42);
        assert_eq!(gen_typed(&cfg), gen_typed(&cfg));
    }

    #[test]
    fn outputs_typecheck_in_every_mode() {
        for mode in [Mode::base(), Mode::effects(), Mode::stratified(), Mode::stratified().with_confluent()] {
            let mut rejected = 0;
            for seed in 0..200 {
                let (f, r) = gen_typed_counted(&GenConfig::new(mode, seed));
                rejected += r;
                assert!(typecheck(&f, mode).is_ok(), "{mode}: {}", print(&f));
            }
            assert_eq!(rejected, 0, "{mode}: {rejected} rejected candidates");
        }
    }
}
