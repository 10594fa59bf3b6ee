//! Acceptance suite: one PASS/FAIL line per criterion, each with its time
//! limit. Exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use aic_core::harness::{
    prop_confluence, prop_progress, prop_simulation, prop_subject_reduction, prop_termination, GenConfig,
    PropertyResult, STATE_BUDGET, STEP_BUDGET,
};
use aic_core::machine::{explore, run, MachineState, Outcome, Scheduler};
use aic_core::syntax::Region;
use aic_core::typing::{subtype, typecheck, FormationError, Mode, TypeErrorKind};
use aic_core::usage::{usum, Family, Mult, RegionUsage};
use common::load;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Base seed for every generated sample.
const SEED: u64 = 2009;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn expect_eq(what: &str, got: &str, want: &str) -> Result<(), String> {
    ensure(got == want, || format!("{what}: expected {want:?}, got {got:?}"))
}

fn render(name: &str) -> Result<String, String> {
    typecheck(&load(name), Mode::base()).map(|r| r.render()).map_err(|e| format!("{name}: {e}"))
}

fn state(name: &str) -> MachineState {
    MachineState::new(&load(name).program).expect("golden program")
}

fn golden_example1() -> Result<String, String> {
    expect_eq("example1", &render("example1.aic")?, "type: !Reg r 1 -o B\neffect: {}\nusage r = <1,1> aff\n")?;
    Ok("type !Reg r 1 -o B, r = <1,1>".into())
}

fn golden_example2() -> Result<String, String> {
    expect_eq(
        "functional",
        &render("example2_functional.aic")?,
        "type: (Reg r 1 -o 1) -o (Reg r 1 -o 1) -o B\neffect: {}\nusage r = <0,0> aff\n",
    )?;
    expect_eq("reader", &render("example2_reader.aic")?, "type: Reg r 1 -o 1\neffect: {}\nusage r = <0,1> aff\n")?;
    expect_eq("writer", &render("example2_writer.aic")?, "type: Reg r 1 -o 1\neffect: {}\nusage r = <1,0> aff\n")?;
    expect_eq("application", &render("example2_app.aic")?, "type: B\neffect: {}\nusage r = <1,1> aff\n")?;
    Ok("usages <0,0>, <0,1>, <1,0>; application <1,1>".into())
}

fn divergence() -> Result<String, String> {
    let f = load("divergent.aic");
    let r = typecheck(&f, Mode::effects()).map_err(|e| format!("effects mode: {e}"))?;
    expect_eq("effect", &r.effect.to_string(), "{r}")?;
    match typecheck(&f, Mode::stratified()) {
        Ok(_) => return Err("stratified mode accepted the divergent program".into()),
        Err(e) => ensure(
            e.0.iter().any(|d| d.kind == TypeErrorKind::Formation(FormationError::SelfReference(Region::new("r")))),
            || format!("no self-reference diagnostic: {e}"),
        )?,
    }
    let s = state("divergent.aic");
    for seed in 1..=10 {
        let t = run(&s, Scheduler::Seeded(seed), STEP_BUDGET).map_err(|e| e.to_string())?;
        ensure(t.outcome == Outcome::StepLimit, || format!("seed {seed}: {}", t.outcome))?;
    }
    Ok(format!("effect {{r}}, self-reference rejected, step limit {STEP_BUDGET} for seeds 1..10"))
}

fn confluence_rejection() -> Result<String, String> {
    let mode = Mode::base().with_confluent();
    for name in ["race2.aic", "race3.aic"] {
        match typecheck(&load(name), mode) {
            Ok(_) => return Err(format!("{name} accepted in confluent mode")),
            Err(e) => ensure(
                e.0.iter().any(|d| matches!(&d.kind, TypeErrorKind::UsageClash(c) if c.to_string().contains("region `r`"))),
                || format!("{name}: no usage clash on r: {e}"),
            )?,
        }
    }
    typecheck(&load("race4.aic"), mode).map_err(|e| format!("race4: {e}"))?;
    let x = explore(&state("race4.aic"), STATE_BUDGET).map_err(|e| e.to_string())?;
    ensure(x.normal_forms.len() == 1 && x.violations.is_empty() && !x.budget_exceeded, || {
        format!("race4: {} normal forms, {} violations", x.normal_forms.len(), x.violations.len())
    })?;
    Ok("two races rejected with a clash on r; persistent race has 1 normal form, 0 violations".into())
}

fn property(r: PropertyResult) -> Result<String, String> {
    if r.passed() {
        Ok(format!("{}: {} cases, 0 failures", r.name, r.cases))
    } else {
        Err(r.to_string())
    }
}

fn subject_reduction() -> Result<String, String> {
    let base = property(prop_subject_reduction(500, &GenConfig::new(Mode::base(), SEED)))?;
    let eff = property(prop_subject_reduction(500, &GenConfig::new(Mode::effects(), SEED)))?;
    Ok(format!("{base}; {eff}"))
}

fn strong_confluence() -> Result<String, String> {
    property(prop_confluence(200, &GenConfig::new(Mode::stratified().with_confluent(), SEED)))
}

fn termination() -> Result<String, String> {
    property(prop_termination(300, &GenConfig::new(Mode::stratified(), SEED)))
}

fn simulation() -> Result<String, String> {
    property(prop_simulation(200, &GenConfig::new(Mode::stratified(), SEED)))
}

fn progress() -> Result<String, String> {
    property(prop_progress(100, &GenConfig::new(Mode::stratified(), SEED)))
}

/// Every defined sum, written out by hand. Everything else is undefined.
const REGION_SUMS: [&str; 13] = [
    "<0,0> aff + <0,0> aff = <0,0> aff",
    "<0,0> aff + <1,0> aff = <1,0> aff",
    "<0,0> aff + <0,1> aff = <0,1> aff",
    "<0,0> aff + <1,1> aff = <1,1> aff",
    "<1,0> aff + <0,0> aff = <1,0> aff",
    "<0,1> aff + <0,0> aff = <0,1> aff",
    "<1,1> aff + <0,0> aff = <1,1> aff",
    "<1,0> aff + <0,1> aff = <1,1> aff",
    "<0,1> aff + <1,0> aff = <1,1> aff",
    "<1,inf> wo + <0,inf> wo = <1,inf> wo",
    "<0,inf> wo + <1,inf> wo = <1,inf> wo",
    "<0,inf> wo + <0,inf> wo = <0,inf> wo",
    "<inf,inf> exp + <inf,inf> exp = <inf,inf> exp",
];

const MULT_SUMS: [&str; 6] = ["0 + 0 = 0", "0 + 1 = 1", "0 + inf = inf", "1 + 0 = 1", "inf + 0 = inf", "inf + inf = inf"];

fn algebra() -> Result<String, String> {
    let all = RegionUsage::all();
    ensure(all.len() == 7, || format!("{} region usages", all.len()))?;
    let mut sums = Vec::new();
    for &a in &all {
        for &b in &all {
            if let Ok(c) = usum(a, b) {
                sums.push(format!("{a} + {b} = {c}"));
            }
            ensure(usum(a, b).ok() == usum(b, a).ok(), || format!("{a} + {b} does not commute"))?;
            for &c in &all {
                let left = usum(a, b).ok().and_then(|ab| usum(ab, c).ok());
                let right = usum(b, c).ok().and_then(|bc| usum(a, bc).ok());
                ensure(left == right, || format!("({a} + {b}) + {c} is not associative"))?;
            }
        }
        let n = RegionUsage::neutral(a.family);
        ensure(usum(n, a).ok() == Some(a) && usum(a, n).ok() == Some(a), || format!("{n} is not neutral for {a}"))?;
    }
    let mut want: Vec<String> = REGION_SUMS.iter().map(|s| s.to_string()).collect();
    sums.sort();
    want.sort();
    ensure(sums == want, || format!("region sum table differs: {sums:?}"))?;

    let mut msums = Vec::new();
    for a in Mult::ALL {
        for b in Mult::ALL {
            if let Some(c) = a.sum(b) {
                msums.push(format!("{a} + {b} = {c}"));
            }
            ensure(a.sum(b) == b.sum(a), || format!("{a} + {b} does not commute"))?;
            for c in Mult::ALL {
                let left = a.sum(b).and_then(|ab| ab.sum(c));
                let right = b.sum(c).and_then(|bc| a.sum(bc));
                ensure(left == right, || format!("({a} + {b}) + {c} is not associative"))?;
            }
        }
        ensure(Mult::Zero.sum(a) == Some(a), || format!("0 is not neutral for {a}"))?;
    }
    let mut want: Vec<String> = MULT_SUMS.iter().map(|s| s.to_string()).collect();
    msums.sort();
    want.sort();
    ensure(msums == want, || format!("multiplicity sum table differs: {msums:?}"))?;
    for f in Family::ALL {
        for &(o, i) in f.members() {
            RegionUsage::new(o, i, f).map_err(|e| e.to_string())?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let dom = common::all_regions();
    let regions = common::type_regions();
    for k in 0..1000 {
        let a = common::random_type(&mut rng, 3, true);
        aic_core::typing::check_type(&regions, &a).map_err(|e| format!("type {k} `{a}` is ill-formed: {e}"))?;
        let b = common::vary(&mut rng, &a, true);
        let c = common::vary(&mut rng, &b, true);
        ensure(subtype(&dom, &a, &a), || format!("`{a}` is not a subtype of itself"))?;
        ensure(subtype(&dom, &a, &b) && subtype(&dom, &b, &c), || format!("widening of `{a}` is not a supertype"))?;
        ensure(subtype(&dom, &a, &c), || format!("transitivity fails on `{a}` <= `{b}` <= `{c}`"))?;
    }
    Ok("49 region and 9 multiplicity sums match the table; laws hold; 1000 types checked".into())
}

const CRITERIA: [(&str, Check, u64); 10] = [
    ("1 golden typing, example 1", golden_example1, 1),
    ("2 golden typing, example 2", golden_example2, 1),
    ("3 divergence and stratification", divergence, 10),
    ("4 confluence rejection suite", confluence_rejection, 5),
    ("5 subject reduction property", subject_reduction, 60),
    ("6 strong confluence property", strong_confluence, 120),
    ("7 termination property", termination, 120),
    ("8 simulation property", simulation, 120),
    ("9 progress classification", progress, 30),
    ("10 algebra exhaustives", algebra, 5),
];

fn main() -> ExitCode {
    let mut failed = 0;
    for (name, check, limit) in CRITERIA {
        let t = Instant::now();
        let res = check();
        let took = t.elapsed();
        let res = match res {
            Ok(detail) if took > Duration::from_secs(limit) => Err(format!("{detail}; took longer than {limit} s")),
            other => other,
        };
        match res {
            Ok(detail) => println!("PASS [{name}] {:.3} s (limit {limit} s): {detail}", took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL [{name}] {:.3} s (limit {limit} s): {why}", took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", CRITERIA.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
