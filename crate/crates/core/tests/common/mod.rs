//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::path::PathBuf;

use aic_core::surface::{parse, RegionDecl, SourceFile};
use aic_core::syntax::{Effect, Region, Type, Volatility};
use aic_core::usage::Family;
use rand::Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data").join(name)
}

pub fn load(name: &str) -> SourceFile {
    let text = std::fs::read_to_string(data_path(name)).expect("golden file");
    parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Three regions for random types: contents `1`, `!1` and `1 -o 1`.
pub fn type_regions() -> Vec<RegionDecl> {
    let decl = |n: &str, volatility, content, family| RegionDecl { name: Region::new(n), volatility, content, family };
    vec![
        decl("r0", Volatility::Volatile, Type::One, Family::Aff),
        decl("r1", Volatility::Persistent, Type::bang(Type::One), Family::Wo),
        decl("r2", Volatility::Volatile, Type::lolli(Type::One, Type::One), Family::Exp),
    ]
}

pub fn all_regions() -> Effect {
    type_regions().into_iter().map(|d| d.name).collect()
}

fn random_effect(rng: &mut impl Rng) -> Effect {
    type_regions().into_iter().map(|d| d.name).filter(|_| rng.gen_bool(0.4)).collect()
}

/// A random value type over [`type_regions`], or `B` in codomains.
pub fn random_type(rng: &mut impl Rng, depth: usize, codomain: bool) -> Type {
    let regions = type_regions();
    let top = if depth == 0 { 2 } else { 5 };
    match rng.gen_range(0..top + usize::from(codomain)) {
        n if n >= top => Type::Behaviour,
        0 => Type::One,
        1 => {
            let d = &regions[rng.gen_range(0..regions.len())];
            Type::reg(d.name.clone(), d.content.clone())
        }
        2 => Type::bang(random_type(rng, depth - 1, false)),
        _ => Type::arrow(random_type(rng, depth - 1, false), random_effect(rng), random_type(rng, depth - 1, true)),
    }
}

/// A type that is larger than `t` by construction when `up`, smaller
/// otherwise: latent effects grow in positive positions and shrink in
/// negative ones.
pub fn vary(rng: &mut impl Rng, t: &Type, up: bool) -> Type {
    match t {
        Type::One | Type::Behaviour | Type::Reg(..) => t.clone(),
        Type::Bang(a) => Type::bang(vary(rng, a, up)),
        Type::Arrow(a, e, b) => {
            let e2: Effect = if up {
                e.union(&random_effect(rng))
            } else {
                e.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect()
            };
            Type::arrow(vary(rng, a, !up), e2, vary(rng, b, up))
        }
    }
}
