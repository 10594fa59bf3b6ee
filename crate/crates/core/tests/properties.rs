mod common;

use aic_core::harness::{gen_typed, GenConfig};
use aic_core::surface::{RegionDecl, SourceFile, VarDecl};
use aic_core::syntax::{canonicalize, struct_equiv, subst, Name, Region, Term, Type, Volatility};
use aic_core::translation::{forget_term, i_subst, IState};
use aic_core::typing::{subtype, typecheck, Mode};
use aic_core::usage::{Family, Mult};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn file(mode: Mode, seed: u64) -> SourceFile {
    gen_typed(&GenConfig::new(mode, seed))
}

/// Reverses the thread order and re-nests the parallel composition.
fn shuffle(t: &Term) -> Term {
    let c = canonicalize(t).unwrap();
    let mut parts: Vec<Term> = c.threads.iter().rev().cloned().collect();
    parts.extend(c.stores.iter().map(|s| s.to_term()));
    let mut acc = parts.pop().unwrap_or(Term::Unit);
    while let Some(p) = parts.pop() {
        acc = Term::par(acc, p);
    }
    for b in c.binders.iter().rev() {
        acc = Term::Nu { name: b.name.clone(), region: b.region.clone(), content: b.content.clone(), body: Box::new(acc) };
    }
    acc
}

/// Every `(\x:A. M) V` in `t`.
fn redexes(t: &Term, out: &mut Vec<(Name, Term, Term)>) {
    t.visit(&mut |s| {
        if let Term::App(f, v) = s {
            if let Term::Lam { param, body, .. } = &**f {
                if v.is_value() {
                    out.push((param.clone(), (**body).clone(), (**v).clone()));
                }
            }
        }
    });
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn weakening_keeps_the_report(seed in any::<u64>()) {
        let f = file(Mode::effects(), seed);
        let before = typecheck(&f, Mode::effects()).unwrap();
        let mut g = f.clone();
        g.regions.push(RegionDecl {
            name: Region::new("extra"),
            volatility: Volatility::Volatile,
            content: Type::One,
            family: Family::Aff,
        });
        g.vars.push(VarDecl { name: Name::new("unused"), usage: Mult::One, ty: Type::reg(Region::new("extra"), Type::One) });
        let after = typecheck(&g, Mode::effects()).unwrap();
        prop_assert_eq!(before.judgement(), after.judgement());
        prop_assert_eq!(before.decorated, after.decorated);
    }

    #[test]
    fn mode_monotonicity(seed in any::<u64>()) {
        let f = file(Mode::stratified().with_confluent(), seed);
        prop_assert!(typecheck(&f, Mode::base()).is_ok());
        let strat = typecheck(&f, Mode::stratified()).unwrap();
        let eff = typecheck(&f, Mode::effects()).unwrap();
        prop_assert_eq!(strat, eff);
    }

    #[test]
    fn structural_equivalence_preserves_typing(seed in any::<u64>()) {
        let f = file(Mode::effects(), seed);
        let p = shuffle(&f.program);
        prop_assert!(struct_equiv(&f.program, &p).unwrap());
        let a = typecheck(&f, Mode::effects()).unwrap();
        let b = typecheck(&f.with_program(p), Mode::effects()).unwrap();
        prop_assert_eq!(a.ty, b.ty);
        prop_assert_eq!(a.effect, b.effect);
        prop_assert_eq!(a.usages, b.usages);
    }

    #[test]
    fn translation_commutes_with_substitution(seed in any::<u64>()) {
        let f = file(Mode::stratified(), seed);
        let d = typecheck(&f, Mode::stratified()).unwrap().decorated;
        let mut rs = Vec::new();
        redexes(&d, &mut rs);
        for (x, m, v) in rs {
            let lhs = forget_term(&subst(&v, &x, &m).unwrap()).unwrap();
            let rhs = i_subst(&forget_term(&v).unwrap(), &x, &forget_term(&m).unwrap());
            prop_assert_eq!(lhs.alpha_key(), rhs.alpha_key());
        }
    }

    #[test]
    fn translation_respects_structural_equivalence(seed in any::<u64>()) {
        let f = file(Mode::stratified(), seed);
        let d = typecheck(&f, Mode::stratified()).unwrap().decorated;
        let a = IState::new(&forget_term(&d).unwrap());
        let b = IState::new(&forget_term(&shuffle(&d)).unwrap());
        prop_assert_eq!(a.thread_keys(), b.thread_keys());
        prop_assert_eq!(a.store_keys(), b.store_keys());
    }

    #[test]
    fn subtyping_is_a_preorder(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dom = common::all_regions();
        let a = common::random_type(&mut rng, 3, true);
        let b = common::vary(&mut rng, &a, true);
        let c = common::vary(&mut rng, &b, true);
        prop_assert!(subtype(&dom, &a, &a));
        prop_assert!(subtype(&dom, &a, &b));
        prop_assert!(subtype(&dom, &b, &c));
        prop_assert!(subtype(&dom, &a, &c));
        prop_assert_eq!(subtype(&dom, &b, &a), a == b);
    }
}
